//! Random test problems with a planted solution and residual.

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::ils::{IlsProblem, SignatureSplit};
use crate::linalg::{gaussian_vector, householder, random_orthonormal, unit_sphere};
use crate::structured::{toeplitz, StructureKind, StructuredParams};

/// Attempts before a generator gives up on producing a positive definite `AᵀJA`.
pub const MAX_ATTEMPTS: usize = 20;

/// A generated problem together with the data it was built from.
#[derive(Debug, Clone)]
pub struct Planted {
    pub problem: IlsProblem,
    pub x: DVector<f64>,
    pub r: DVector<f64>,
    /// 1-based number of the attempt that succeeded.
    pub attempts: usize,
}

/// `(1, 2², …, n²)`.
pub fn planted_solution(n: usize) -> DVector<f64> {
    DVector::from_fn(n, |i, _| ((i + 1) * (i + 1)) as f64)
}

/// Generator stream for attempt `attempt` of a call seeded with `seed`.
fn attempt_rng(seed: u64, attempt: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(attempt as u64);
    rng
}

fn check_dims(m: usize, n: usize, p: usize) -> Result<SignatureSplit> {
    if n == 0 || p < n || p > m {
        return Err(Error::InvalidParameter(format!("need 1 <= n <= p <= m, got m = {m}, n = {n}, p = {p}")));
    }
    SignatureSplit::new(p, m - p)
}

fn check_rho(rho: f64) -> Result<()> {
    if !(rho.is_finite() && rho >= 0.0) {
        return Err(Error::InvalidParameter(format!("rho must be finite and nonnegative, got {rho}")));
    }
    Ok(())
}

/// Retries `build` with fresh streams until the problem is positive definite.
fn with_retries<F>(seed: u64, rho: f64, mut build: F) -> Result<Planted>
where
    F: FnMut(&mut ChaCha8Rng) -> Result<(DMatrix<f64>, SignatureSplit)>,
{
    let mut last = String::new();
    for attempt in 0..MAX_ATTEMPTS {
        let mut rng = attempt_rng(seed, attempt);
        let (a, split) = build(&mut rng)?;
        let (m, n) = a.shape();
        let x = planted_solution(n);
        let r = rho * unit_sphere(&mut rng, m);
        let b = &a * &x + &r;
        match IlsProblem::new(a, b, split) {
            Ok(problem) => return Ok(Planted { problem, x, r, attempts: attempt + 1 }),
            Err(e @ (Error::NotPositiveDefinite | Error::RankDeficient(_))) => last = e.to_string(),
            Err(e) => return Err(e),
        }
    }
    Err(Error::Generation { attempts: MAX_ATTEMPTS, reason: last })
}

/// `D = n^{-l} diag(n^l, (n-1)^l, …, 1)`.
pub fn example1_diagonal(n: usize, l: f64) -> DVector<f64> {
    DVector::from_fn(n, |i, _| ((n - i) as f64 / n as f64).powf(l))
}

/// `A = diag(U_p, U_q) [D; 0] V` with Householder `U_p`, `U_q`, `V`, so that
/// `κ(A) = n^l`.
pub fn gen_example1(m: usize, n: usize, p: usize, l: f64, rho: f64, seed: u64) -> Result<Planted> {
    let split = check_dims(m, n, p)?;
    check_rho(rho)?;
    let d = example1_diagonal(n, l);
    with_retries(seed, rho, |rng| {
        let up = householder(&unit_sphere(rng, p));
        let uq = householder(&unit_sphere(rng, m - p));
        let v = householder(&unit_sphere(rng, n));
        let mut u = DMatrix::zeros(m, m);
        u.view_mut((0, 0), (p, p)).copy_from(&up);
        u.view_mut((p, p), (m - p, m - p)).copy_from(&uq);
        let mut dv = DMatrix::zeros(m, n);
        dv.rows_mut(0, n).copy_from(&(DMatrix::from_diagonal(&d) * v));
        Ok((u * dv, split))
    })
}

/// `D_ii = κ^{-(n-i)/(n-1)}`, geometric from `κ⁻¹` to 1.
pub fn example2_diagonal(n: usize, kappa: f64) -> DVector<f64> {
    if n == 1 {
        return DVector::from_element(1, 1.0);
    }
    DVector::from_fn(n, |i, _| kappa.powf(-((n - 1 - i) as f64) / (n - 1) as f64))
}

/// `A = [Q₁DU; ½Q₂DU]` with random orthonormal factors.
pub fn gen_example2(m: usize, n: usize, p: usize, kappa: f64, rho: f64, seed: u64) -> Result<Planted> {
    let split = check_dims(m, n, p)?;
    check_rho(rho)?;
    if !(kappa >= 1.0 && kappa.is_finite()) {
        return Err(Error::InvalidParameter(format!("kappa must be >= 1, got {kappa}")));
    }
    let d = DMatrix::from_diagonal(&example2_diagonal(n, kappa));
    let q = m - p;
    with_retries(seed, rho, |rng| {
        let q1 = random_orthonormal(rng, p, n);
        // with fewer rows than columns Q₂ gets orthonormal rows instead
        let q2 = if q >= n { random_orthonormal(rng, q, n) } else { random_orthonormal(rng, n, q).transpose() };
        let u = random_orthonormal(rng, n, n);
        let du = &d * u;
        let mut a = DMatrix::zeros(m, n);
        a.rows_mut(0, p).copy_from(&(q1 * &du));
        a.rows_mut(p, q).copy_from(&(0.5 * q2 * &du));
        Ok((a, split))
    })
}

/// Structure kind of the example 3 coefficient matrix.
pub fn example3_kind() -> StructureKind {
    StructureKind::stacked_scaled(StructureKind::Toeplitz, 0.5)
}

/// `A = [B; ½B]` with a Gaussian Toeplitz `B`, `J = diag(I_n, -I_n)`.
pub fn gen_example3(n: usize, rho: f64, seed: u64) -> Result<(Planted, StructuredParams)> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!("example 3 needs n >= 2, got {n}")));
    }
    check_rho(rho)?;
    let split = SignatureSplit::new(n, n)?;
    let planted = with_retries(seed, rho, |rng| {
        let c = gaussian_vector(rng, n);
        let mut r = gaussian_vector(rng, n);
        r[0] = c[0];
        let b = toeplitz(&c, &r);
        let mut a = DMatrix::zeros(2 * n, n);
        a.rows_mut(0, n).copy_from(&b);
        a.rows_mut(n, n).copy_from(&(0.5 * b));
        Ok((a, split))
    })?;
    let sp = StructuredParams::structured_a(&example3_kind(), planted.problem.a(), planted.problem.b())?;
    Ok((planted, sp))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cond(a: &DMatrix<f64>) -> f64 {
        let s = a.singular_values();
        s.max() / s.min()
    }

    #[test]
    fn example1_identity_diagonal() {
        let g = gen_example1(20, 8, 12, 0.0, 1.0, 1).unwrap();
        let s = g.problem.a().singular_values();
        assert!(s.iter().all(|v| (v - 1.0).abs() <= 1e-12));
    }

    #[test]
    fn example1_condition_and_residual() {
        for (l, seed) in [(1.0, 2), (3.0, 3), (4.0, 4)] {
            let g = gen_example1(30, 10, 18, l, 1e-2, seed).unwrap();
            let target = 10f64.powf(l);
            assert!((cond(g.problem.a()) - target).abs() <= 1e-8 * target);
            let res = (g.problem.b() - g.problem.a() * &g.x).norm();
            assert!((res - 1e-2).abs() <= 1e-12);
        }
    }

    #[test]
    fn example2_diagonal_ends() {
        let d = example2_diagonal(6, 1e4);
        assert!((d[0] - 1e-4).abs() <= 1e-16);
        assert_eq!(d[5], 1.0);
        assert!((d[1] / d[0] - d[2] / d[1]).abs() <= 1e-12);
    }

    #[test]
    fn example2_always_positive_definite() {
        for seed in 0..100 {
            let g = gen_example2(30, 12, 18, 1e6, 1.0, seed).unwrap();
            assert_eq!(g.attempts, 1);
            assert!((g.r.norm() - 1.0).abs() <= 1e-12);
            assert!(g.problem.gram().clone().cholesky().is_some());
        }
    }

    #[test]
    fn example2_short_second_block() {
        let g = gen_example2(20, 8, 16, 1e3, 1.0, 5).unwrap();
        assert_eq!(g.problem.split().q, 4);
    }

    #[test]
    fn example3_structure() {
        let (g, sp) = gen_example3(8, 1e2, 6).unwrap();
        let a = g.problem.a();
        let b = a.rows(0, 8).into_owned();
        // M = BᵀB - ¼BᵀB = ¾BᵀB
        let m = g.problem.gram();
        assert!((m - 0.75 * b.tr_mul(&b)).amax() <= 1e-12 * m.amax());
        assert_eq!(sp.varphi.len(), 15);
        assert!((g.r.norm() - 1e2).abs() <= 1e-12 * 1e2);
        let back = sp.basis_a.embed(&sp.varphi).unwrap();
        assert!((back - a).amax() <= 1e-14 * a.amax());
    }

    #[test]
    fn generators_are_deterministic() {
        let a = gen_example2(20, 6, 12, 1e2, 1.0, 9).unwrap();
        let b = gen_example2(20, 6, 12, 1e2, 1.0, 9).unwrap();
        assert_eq!(a.problem.a(), b.problem.a());
        assert_eq!(a.problem.b(), b.problem.b());
    }

    #[test]
    fn rejects_bad_dimensions() {
        assert!(gen_example1(10, 6, 5, 0.0, 1.0, 0).is_err());
        assert!(gen_example3(1, 1.0, 0).is_err());
        assert!(gen_example2(10, 4, 6, 0.5, 1.0, 0).is_err());
    }
}
