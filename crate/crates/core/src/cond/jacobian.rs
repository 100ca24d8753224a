//! Row-structured Jacobians of `(A, b) -> Lᵀx(A, b)`.
//!
//! Both the ILS and the TLS derivatives share the shape
//!
//! ```text
//! row i over vec(ΔA):  vec(u w_iᵀ - v_i xᵀ)ᵀ      (an m x n matrix of rank <= 2)
//! row i over Δb:       v_iᵀ
//! ```
//!
//! with `u ∈ R^m`, `w_i ∈ R^n`, `v_i ∈ R^m`. For ILS, `u = Jr`,
//! `w_i = M⁻¹ l_i` and `v_i = J A w_i`. Keeping only the generators
//! (`O(k(m+n))` numbers) lets every product with `|M_g'|` or with a
//! structure basis run in `O(k·mn)` time without the `k x (mn+m)` matrix.

use nalgebra::{DMatrix, DVector};

use super::params::{MatrixWeight, VectorWeight};
use crate::error::{dim_err, Error, Result};
use crate::par;
use crate::structured::StructureBasis;

/// Largest dense Jacobian (in entries) that will be materialized.
pub const DENSE_ENTRY_LIMIT: usize = 50_000_000;

#[derive(Debug, Clone)]
pub struct RowJacobian {
    u: DVector<f64>,
    w: DMatrix<f64>,
    v: DMatrix<f64>,
    x: DVector<f64>,
}

impl RowJacobian {
    pub fn new(u: DVector<f64>, w: DMatrix<f64>, v: DMatrix<f64>, x: DVector<f64>) -> Result<Self> {
        let (m, n, k) = (u.len(), x.len(), w.ncols());
        if w.nrows() != n {
            return Err(dim_err("RowJacobian (w rows)", n, w.nrows()));
        }
        if v.shape() != (m, k) {
            return Err(dim_err("RowJacobian (v)", format!("{m}x{k}"), format!("{}x{}", v.nrows(), v.ncols())));
        }
        Ok(Self { u, w, v, x })
    }

    pub fn m(&self) -> usize {
        self.u.len()
    }

    pub fn n(&self) -> usize {
        self.x.len()
    }

    pub fn k(&self) -> usize {
        self.w.ncols()
    }

    /// Number of columns, `mn + m`.
    pub fn ncols(&self) -> usize {
        self.m() * self.n() + self.m()
    }

    pub fn u(&self) -> &DVector<f64> {
        &self.u
    }

    pub fn w(&self) -> &DMatrix<f64> {
        &self.w
    }

    pub fn v(&self) -> &DMatrix<f64> {
        &self.v
    }

    pub fn x(&self) -> &DVector<f64> {
        &self.x
    }

    /// Entry of row `i` at the position of `ΔA[(row, col)]`.
    #[inline]
    pub fn entry_a(&self, i: usize, row: usize, col: usize) -> f64 {
        self.u[row] * self.w[(col, i)] - self.v[(row, i)] * self.x[col]
    }

    /// Row `i` restricted to `vec(ΔA)`, reshaped to `m x n`.
    pub fn row_a(&self, i: usize) -> DMatrix<f64> {
        &self.u * self.w.column(i).transpose() - self.v.column(i) * self.x.transpose()
    }

    /// Row `i` restricted to `Δb`.
    pub fn row_b(&self, i: usize) -> DVector<f64> {
        self.v.column(i).into_owned()
    }

    /// `M_g' [vec(ΔA); Δb]`.
    pub fn apply(&self, da: &DMatrix<f64>, db: &DVector<f64>) -> Result<DVector<f64>> {
        if da.shape() != (self.m(), self.n()) {
            return Err(dim_err("jacobian apply (dA)", format!("{}x{}", self.m(), self.n()), format!("{}x{}", da.nrows(), da.ncols())));
        }
        if db.len() != self.m() {
            return Err(dim_err("jacobian apply (db)", self.m(), db.len()));
        }
        let daw = da * &self.w;
        let dax = da * &self.x;
        Ok(daw.tr_mul(&self.u) - self.v.tr_mul(&dax) + self.v.tr_mul(db))
    }

    /// Same as [`apply`](Self::apply) with the direction given as one vector
    /// of length `mn + m`.
    pub fn apply_vec(&self, z: &DVector<f64>) -> Result<DVector<f64>> {
        let (m, n) = (self.m(), self.n());
        if z.len() != self.ncols() {
            return Err(dim_err("jacobian apply", self.ncols(), z.len()));
        }
        let da = DMatrix::from_column_slice(m, n, &z.as_slice()[..m * n]);
        let db = DVector::from_column_slice(&z.as_slice()[m * n..]);
        self.apply(&da, &db)
    }

    /// `M_g'ᵀ y` split into its `ΔA` and `Δb` parts.
    pub fn apply_transpose(&self, y: &DVector<f64>) -> Result<(DMatrix<f64>, DVector<f64>)> {
        if y.len() != self.k() {
            return Err(dim_err("jacobian apply_transpose", self.k(), y.len()));
        }
        let wy = &self.w * y;
        let vy = &self.v * y;
        let da = &self.u * wy.transpose() - &vy * self.x.transpose();
        Ok((da, vy))
    }

    /// The dense `k x (mn + m)` matrix.
    pub fn to_dense(&self) -> Result<DMatrix<f64>> {
        let (m, n, k) = (self.m(), self.n(), self.k());
        let entries = k * self.ncols();
        if entries > DENSE_ENTRY_LIMIT {
            return Err(Error::MemoryGuard { entries, limit: DENSE_ENTRY_LIMIT });
        }
        let mut out = DMatrix::zeros(k, self.ncols());
        for i in 0..k {
            for col in 0..n {
                for row in 0..m {
                    out[(i, col * m + row)] = self.entry_a(i, row, col);
                }
            }
            for row in 0..m {
                out[(i, m * n + row)] = self.v[(row, i)];
            }
        }
        Ok(out)
    }

    /// `|M_g'| |vec(Ψ, β)|`, one entry per output row.
    ///
    /// Each row is summed in a fixed order, so the result does not depend on
    /// how rows are distributed across threads.
    pub fn abs_weighted_row_sums(&self, psi: &MatrixWeight, beta: &VectorWeight) -> DVector<f64> {
        let (m, n) = (self.m(), self.n());
        let sums = par::map_indices_min(self.k(), 4, |i| {
            let mut s = 0.0;
            for col in 0..n {
                let wc = self.w[(col, i)];
                let xc = self.x[col];
                for row in 0..m {
                    let e = self.u[row] * wc - self.v[(row, i)] * xc;
                    s += e.abs() * psi.at(row, col).abs();
                }
            }
            for row in 0..m {
                s += self.v[(row, i)].abs() * beta.at(row).abs();
            }
            s
        });
        DVector::from_vec(sums)
    }

    /// `W Wᵀ` for `W = [Ψ·M_A, β·M_b]` with scalar weights, from the
    /// generators alone:
    /// `Ψ²[‖u‖² WᵀW - (Wᵀx)(Vᵀu)ᵀ - (Vᵀu)(Wᵀx)ᵀ + ‖x‖² VᵀV] + β² VᵀV`.
    pub fn weighted_gram(&self, psi: f64, beta: f64) -> DMatrix<f64> {
        let wtw = self.w.tr_mul(&self.w);
        let vtv = self.v.tr_mul(&self.v);
        let wx = self.w.tr_mul(&self.x);
        let vu = self.v.tr_mul(&self.u);
        let cross = &wx * vu.transpose();
        let a_part = wtw * self.u.norm_squared() - &cross - cross.transpose() + &vtv * self.x.norm_squared();
        a_part * (psi * psi) + vtv * (beta * beta)
    }

    /// `M_g' blkdiag(Φ_A, Φ_b)`, optionally with the columns scaled by
    /// `D⁻¹`. Each basis column only touches its own support, so the cost is
    /// `O(k · (support of Φ_A + support of Φ_b))`.
    pub fn project(&self, basis_a: &StructureBasis, basis_b: &StructureBasis, normalize: bool) -> Result<DMatrix<f64>> {
        let (m, n) = (self.m(), self.n());
        if basis_a.shape() != (m, n) {
            return Err(dim_err("structure basis for A", format!("{m}x{n}"), format!("{}x{}", basis_a.rows(), basis_a.cols())));
        }
        if basis_b.shape() != (m, 1) {
            return Err(dim_err("structure basis for b", format!("{m}x1"), format!("{}x{}", basis_b.rows(), basis_b.cols())));
        }
        let (k1, k2) = (basis_a.nparams(), basis_b.nparams());
        let rows = par::map_indices_min(self.k(), 4, |i| {
            let mut out = Vec::with_capacity(k1 + k2);
            for j in 0..k1 {
                let mut s = 0.0;
                for &(idx, val) in basis_a.support(j) {
                    s += self.entry_a(i, idx % m, idx / m) * val;
                }
                out.push(if normalize { s / basis_a.norms()[j] } else { s });
            }
            for j in 0..k2 {
                let mut s = 0.0;
                for &(idx, val) in basis_b.support(j) {
                    s += self.v[(idx, i)] * val;
                }
                out.push(if normalize { s / basis_b.norms()[j] } else { s });
            }
            out
        });
        Ok(DMatrix::from_fn(self.k(), k1 + k2, |i, j| rows[i][j]))
    }
}
