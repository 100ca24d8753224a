//! Entry-wise division, `vec`, Kronecker actions and the vec-permutation.
//!
//! Every vectorization in this crate is column-major: for an `m x n` matrix
//! `A`, `vec(A)[j * m + i] = A[(i, j)]` (0-based). This is the storage order
//! of `nalgebra::DMatrix`, so `vec` is a copy of the backing slice.

use nalgebra::{DMatrix, DVector};

use crate::error::{dim_err, Result};

/// `c‡`: the reciprocal of `c`, or 1 when `c` is zero.
#[inline]
pub fn dagger(c: f64) -> f64 {
    if c == 0.0 {
        1.0
    } else {
        1.0 / c
    }
}

/// Entry-wise division `a / b = diag‡(b) a`.
pub fn entrywise_div(a: &DVector<f64>, b: &DVector<f64>) -> Result<DVector<f64>> {
    if a.len() != b.len() {
        return Err(dim_err("entrywise_div", a.len(), b.len()));
    }
    Ok(a.zip_map(b, |ai, bi| ai * dagger(bi)))
}

pub fn vec(a: &DMatrix<f64>) -> DVector<f64> {
    DVector::from_column_slice(a.as_slice())
}

/// Inverse of [`vec`].
pub fn unvec(v: &DVector<f64>, rows: usize, cols: usize) -> Result<DMatrix<f64>> {
    if v.len() != rows * cols {
        return Err(dim_err("unvec", rows * cols, v.len()));
    }
    Ok(DMatrix::from_column_slice(rows, cols, v.as_slice()))
}

/// The vec-permutation `Π_mn` with `Π_mn vec(A) = vec(Aᵀ)` for `A` of size
/// `rows x cols`. Applied as an index map, never stored as a matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VecPermutation {
    pub rows: usize,
    pub cols: usize,
}

impl VecPermutation {
    pub fn new(rows: usize, cols: usize) -> Self {
        Self { rows, cols }
    }

    pub fn len(&self) -> usize {
        self.rows * self.cols
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// The permutation with swapped dimensions, i.e. `Π_nm`.
    pub fn transposed(&self) -> Self {
        Self::new(self.cols, self.rows)
    }

    /// Source index of output entry `k`: `(Π v)[k] = v[source(k)]`.
    #[inline]
    pub fn source(&self, k: usize) -> usize {
        // output is vec(Aᵀ), Aᵀ is cols x rows
        let (j, i) = (k % self.cols, k / self.cols);
        j * self.rows + i
    }

    pub fn apply(&self, v: &DVector<f64>) -> Result<DVector<f64>> {
        if v.len() != self.len() {
            return Err(dim_err("vec_perm_apply", self.len(), v.len()));
        }
        Ok(DVector::from_fn(v.len(), |k, _| v[self.source(k)]))
    }

    /// Right-multiplication `X Π` for `X` with `rows * cols` columns.
    pub fn permute_columns(&self, x: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        if x.ncols() != self.len() {
            return Err(dim_err("permute_columns", self.len(), x.ncols()));
        }
        // (XΠ) e_{source(k)} = X e_k
        let mut out = DMatrix::zeros(x.nrows(), x.ncols());
        for k in 0..self.len() {
            out.set_column(self.source(k), &x.column(k));
        }
        Ok(out)
    }
}

/// `(xᵀ ⊗ y) vec(z) = vec(y z x)` without forming the Kronecker product.
pub fn kron_apply(x: &DMatrix<f64>, y: &DMatrix<f64>, z: &DMatrix<f64>) -> Result<DVector<f64>> {
    if y.ncols() != z.nrows() {
        return Err(dim_err("kron_apply (Y·Z)", y.ncols(), z.nrows()));
    }
    if z.ncols() != x.nrows() {
        return Err(dim_err("kron_apply (Z·X)", z.ncols(), x.nrows()));
    }
    Ok(vec(&(y * z * x)))
}

/// Dense Kronecker product `a ⊗ b`.
pub fn kron(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    a.kronecker(b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn explicit_perm(rows: usize, cols: usize) -> DMatrix<f64> {
        // column (i + j*rows) of the identity goes to position of A[i,j] in vec(Aᵀ)
        let n = rows * cols;
        let mut p = DMatrix::zeros(n, n);
        for i in 0..rows {
            for j in 0..cols {
                p[(i * cols + j, j * rows + i)] = 1.0;
            }
        }
        p
    }

    #[test]
    fn entrywise_div_examples() {
        let r = entrywise_div(&DVector::from_vec(vec![2.0, 4.0]), &DVector::from_vec(vec![2.0, 2.0])).unwrap();
        assert_eq!(r.as_slice(), &[1.0, 2.0]);
        let r = entrywise_div(&DVector::from_vec(vec![3.0, 0.0]), &DVector::from_vec(vec![0.0, 2.0])).unwrap();
        assert_eq!(r.as_slice(), &[3.0, 0.0]);
        let r = entrywise_div(&DVector::zeros(3), &DVector::from_vec(vec![0.0, -1.0, 5.0])).unwrap();
        assert_eq!(r.as_slice(), &[0.0, 0.0, 0.0]);
        assert!(entrywise_div(&DVector::zeros(2), &DVector::zeros(3)).is_err());
    }

    #[test]
    fn vec_examples() {
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 3.0, 2.0, 4.0]);
        assert_eq!(vec(&a).as_slice(), &[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(vec(&DMatrix::identity(2, 2)).as_slice(), &[1.0, 0.0, 0.0, 1.0]);
        let row = DMatrix::from_row_slice(1, 3, &[5.0, 6.0, 7.0]);
        assert_eq!(vec(&row).as_slice(), &[5.0, 6.0, 7.0]);
    }

    #[test]
    fn vec_perm_examples() {
        let p = VecPermutation::new(2, 2);
        let v = DVector::from_vec(vec![1.0, 2.0, 3.0, 4.0]);
        assert_eq!(p.apply(&v).unwrap().as_slice(), &[1.0, 3.0, 2.0, 4.0]);

        let p = VecPermutation::new(1, 4);
        let v = DVector::from_vec(vec![1.0, 2.0, 3.0, 4.0]);
        assert_eq!(p.apply(&v).unwrap(), v);

        let p = VecPermutation::new(3, 2);
        let v = DVector::from_fn(6, |i, _| (i as f64 + 1.0).sin());
        assert_eq!(p.apply(&v).unwrap(), explicit_perm(3, 2) * &v);
        assert!(p.apply(&DVector::zeros(5)).is_err());
    }

    #[test]
    fn permute_columns_matches_explicit() {
        let p = VecPermutation::new(3, 2);
        let x = DMatrix::from_fn(2, 6, |i, j| (i * 7 + j) as f64 - 3.5);
        let expected = &x * explicit_perm(3, 2);
        assert_eq!(p.permute_columns(&x).unwrap(), expected);
    }

    #[test]
    fn kron_apply_matches_dense() {
        // Y: 3x2, Z: 2x2, X: 2x3 -> vec(YZX) = (Xᵀ ⊗ Y) vec(Z)
        let y = DMatrix::from_fn(3, 2, |i, j| 0.3 * i as f64 - 0.7 * j as f64 + 1.1);
        let z = DMatrix::from_fn(2, 2, |i, j| (i + 2 * j) as f64 * 0.5 - 0.2);
        let x = DMatrix::from_fn(2, 3, |i, j| ((i * 3 + j) as f64).cos());
        let fast = kron_apply(&x, &y, &z).unwrap();
        let dense = kron(&x.transpose(), &y) * vec(&z);
        assert!((&fast - &dense).norm() <= 1e-12 * dense.norm());

        let id2 = DMatrix::identity(2, 2);
        assert_eq!(kron_apply(&id2, &id2, &z).unwrap(), vec(&z));
        assert!(kron_apply(&x, &y, &DMatrix::zeros(3, 3)).is_err());
    }

    #[test]
    fn row_kron_column_is_outer_product() {
        let a = DMatrix::from_row_slice(1, 3, &[1.0, -2.0, 0.5]);
        let b = DMatrix::from_column_slice(2, 1, &[3.0, 4.0]);
        assert_eq!(kron(&a, &b), &b * &a);
    }

    proptest! {
        #![proptest_config(ProptestConfig {
            failure_persistence: None,
            rng_seed: proptest::test_runner::RngSeed::Fixed(11),
            ..ProptestConfig::default()
        })]

        #[test]
        fn perm_twice_is_identity(rows in 1usize..7, cols in 1usize..7, seed in 0u64..1000) {
            let v = DVector::from_fn(rows * cols, |i, _| ((i as u64 * 31 + seed) % 97) as f64);
            let p = VecPermutation::new(rows, cols);
            let back = p.transposed().apply(&p.apply(&v).unwrap()).unwrap();
            prop_assert_eq!(back, v);
        }

        #[test]
        fn perm_transposes(rows in 1usize..7, cols in 1usize..7) {
            let a = DMatrix::from_fn(rows, cols, |i, j| (i * 10 + j) as f64);
            let p = VecPermutation::new(rows, cols);
            prop_assert_eq!(p.apply(&vec(&a)).unwrap(), vec(&a.transpose()));
        }

        #[test]
        fn div_then_mul_recovers(a in proptest::collection::vec(-10.0f64..10.0, 1..8), zero_mask in any::<u8>()) {
            let n = a.len();
            let b = DVector::from_fn(n, |i, _| if zero_mask & (1 << i) != 0 { 0.0 } else { 1.5 + i as f64 });
            let a = DVector::from_vec(a);
            let q = entrywise_div(&a, &b).unwrap();
            for i in 0..n {
                if b[i] != 0.0 {
                    prop_assert!((q[i] * b[i] - a[i]).abs() <= 1e-12 * a[i].abs().max(1.0));
                }
            }
        }

        #[test]
        fn kron_apply_random(p in 1usize..5, q in 1usize..5, r in 1usize..5, s in 1usize..5, seed in 0u64..500) {
            let f = |i: usize, j: usize, k: u64| (((i * 13 + j * 7) as u64 + seed * k) % 23) as f64 / 7.0 - 1.5;
            let y = DMatrix::from_fn(p, q, |i, j| f(i, j, 1));
            let z = DMatrix::from_fn(q, r, |i, j| f(i, j, 2));
            let x = DMatrix::from_fn(r, s, |i, j| f(i, j, 3));
            let fast = kron_apply(&x, &y, &z).unwrap();
            let dense = kron(&x.transpose(), &y) * vec(&z);
            prop_assert!((&fast - &dense).norm() <= 1e-12 * dense.norm().max(1e-300));
        }
    }
}
