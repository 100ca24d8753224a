//! Small dense helpers shared across modules.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

/// Largest singular value by dense SVD. Zero for empty matrices.
pub fn spectral_norm(a: &DMatrix<f64>) -> f64 {
    if a.nrows() == 0 || a.ncols() == 0 {
        return 0.0;
    }
    // The SVD of the wide/tall side is the same; go through the smaller Gram
    // dimension only when the matrix is very elongated.
    let (r, c) = (a.nrows(), a.ncols());
    if r.min(c) * 8 < r.max(c) && r.min(c) <= 64 {
        let g = if r < c { a * a.transpose() } else { a.transpose() * a };
        // Gram route squares the condition; fine for the largest value.
        return sym_max_eig(&g).max(0.0).sqrt();
    }
    a.singular_values().max()
}

/// Largest eigenvalue of a symmetric matrix.
pub fn sym_max_eig(a: &DMatrix<f64>) -> f64 {
    if a.nrows() == 0 {
        return 0.0;
    }
    a.clone().symmetric_eigen().eigenvalues.max()
}

/// Max absolute row sum, the induced ∞-norm.
pub fn inf_norm_mat(a: &DMatrix<f64>) -> f64 {
    a.row_iter()
        .map(|row| row.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

pub fn inf_norm(v: &DVector<f64>) -> f64 {
    v.iter().fold(0.0, |acc, x| acc.max(x.abs()))
}

pub fn gaussian_matrix<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| rng.sample(StandardNormal))
}

pub fn gaussian_vector<R: Rng + ?Sized>(rng: &mut R, len: usize) -> DVector<f64> {
    DVector::from_fn(len, |_, _| rng.sample(StandardNormal))
}

/// A sample from the uniform distribution on the unit sphere in `R^len`.
pub fn unit_sphere<R: Rng + ?Sized>(rng: &mut R, len: usize) -> DVector<f64> {
    loop {
        let g = gaussian_vector(rng, len);
        let n = g.norm();
        if n > 0.0 {
            return g / n;
        }
    }
}

/// `rows x cols` matrix with orthonormal columns: thin QR of a Gaussian
/// matrix with the signs of `R`'s diagonal folded into `Q`, which makes the
/// result Haar distributed.
pub fn random_orthonormal<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> DMatrix<f64> {
    assert!(cols <= rows, "random_orthonormal needs cols <= rows");
    if cols == 0 {
        return DMatrix::zeros(rows, 0);
    }
    let qr = gaussian_matrix(rng, rows, cols).qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..cols {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    q
}

/// Orthonormalizes the columns of `z` (full column rank assumed) by QR.
pub fn orthonormalize(z: &DMatrix<f64>) -> DMatrix<f64> {
    if z.ncols() == 0 {
        return z.clone();
    }
    z.clone().qr().q()
}

/// Householder reflector `I - 2 u uᵀ` for a unit vector `u`.
pub fn householder(u: &DVector<f64>) -> DMatrix<f64> {
    let n = u.len();
    DMatrix::identity(n, n) - 2.0 * u * u.transpose()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn spectral_norm_routes_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for (r, c) in [(4, 90), (90, 4), (10, 12), (1, 1)] {
            let a = gaussian_matrix(&mut rng, r, c);
            let svd = a.singular_values().max();
            assert!((spectral_norm(&a) - svd).abs() <= 1e-12 * svd);
        }
        assert_eq!(spectral_norm(&DMatrix::zeros(0, 3)), 0.0);
    }

    #[test]
    fn orthonormal_columns() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let q = random_orthonormal(&mut rng, 12, 5);
        let g = q.transpose() * &q;
        assert!((g - DMatrix::identity(5, 5)).amax() < 1e-13);
    }

    #[test]
    fn norms() {
        let a = DMatrix::from_row_slice(2, 2, &[1.0, -2.0, -3.0, 0.5]);
        assert_eq!(inf_norm_mat(&a), 3.5);
        assert_eq!(inf_norm(&DVector::from_vec(vec![-4.0, 2.0])), 4.0);
    }
}
