//! Small-sample statistical condition estimation.

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::wallis::wallis;
use crate::cond::{ils_jacobian, CondParams};
use crate::error::{Error, Result};
use crate::ils::IlsProblem;
use crate::kron::dagger;
use crate::linalg::{gaussian_matrix, inf_norm, orthonormalize};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SsceConfig {
    /// Number of sample directions.
    pub k: usize,
    pub seed: u64,
    /// Use the exact Wallis products instead of `sqrt(2 / (π (k - 1/2)))`.
    pub exact_wallis: bool,
}

impl Default for SsceConfig {
    fn default() -> Self {
        Self { k: 3, seed: 0, exact_wallis: false }
    }
}

/// `k` orthonormal directions in `R^dim`, uniformly distributed.
pub fn sample_directions(dim: usize, k: usize, seed: u64) -> Result<DMatrix<f64>> {
    if k == 0 || k > dim {
        return Err(Error::InvalidParameter(format!("need 1 <= k <= {dim}, got k = {k}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(orthonormalize(&gaussian_matrix(&mut rng, dim, k)))
}

/// Squared condition number of `zᵀx` for a unit direction `z`:
/// `Ψ²‖r‖²‖y‖² + (Ψ²‖x‖² + β²)‖Ay‖² - 2Ψ²(yᵀx)(rᵀAy)` with `y = M⁻¹z`,
/// before division by `ξ²`.
fn directional_square(problem: &IlsProblem, z: &DVector<f64>, psi: f64, beta: f64) -> Result<f64> {
    let (a, x, r) = (problem.a(), problem.x(), problem.r());
    let y = problem.factor().solve(z)?;
    let ay = a * &y;
    let p2 = psi * psi;
    let v = p2 * r.norm_squared() * y.norm_squared() + (p2 * x.norm_squared() + beta * beta) * ay.norm_squared()
        - 2.0 * p2 * y.dot(x) * r.dot(&ay);
    if v < 0.0 {
        log::warn!("ssce: negative directional value {v:e} clamped to zero");
        return Ok(0.0);
    }
    Ok(v)
}

/// Statistical estimate of the normwise condition number with `L = I`.
pub fn estimate_kappa2_ssce(problem: &IlsProblem, params: &CondParams, config: &SsceConfig) -> Result<f64> {
    let (psi, beta, xi) = params.scalars()?;
    if params.l.is_some() {
        return Err(Error::InvalidParameter("the 2-norm SSCE estimate is defined for L = I only".into()));
    }
    let n = problem.n();
    let z = sample_directions(n, config.k, config.seed)?;
    let mut sum = 0.0;
    for i in 0..config.k {
        sum += directional_square(problem, &z.column(i).into_owned(), psi, beta)?;
    }
    let ratio = wallis(config.k, !config.exact_wallis) / wallis(n, !config.exact_wallis);
    Ok(ratio * sum.sqrt() / xi)
}

/// Statistical estimates of the mixed and componentwise condition numbers.
#[derive(Debug, Clone, PartialEq)]
pub struct InfSsceEstimate {
    pub mixed: f64,
    pub componentwise: f64,
    /// Per-component estimate of `|M_g'||vec(A, b)|`.
    pub per_component: DVector<f64>,
}

pub fn estimate_kappa_inf_ssce(problem: &IlsProblem, params: &CondParams, config: &SsceConfig) -> Result<InfSsceEstimate> {
    let (m, n) = (problem.m(), problem.n());
    let l = params.l_matrix(n)?;
    let t = m * (n + 1);
    let jac = ils_jacobian(problem, &l)?;
    let z = sample_directions(t, config.k, config.seed)?;
    let mut sq = DVector::zeros(l.ncols());
    for i in 0..config.k {
        let u = jac.apply_vec(&z.column(i).into_owned())?;
        sq += u.map(|v| v * v);
    }
    let ratio = wallis(config.k, !config.exact_wallis) / wallis(t, !config.exact_wallis);
    let est = sq.map(|v| ratio * v.sqrt());
    let lx = l.tr_mul(problem.x());
    let denom = inf_norm(&lx);
    if denom == 0.0 {
        return Err(Error::UndefinedConditionNumber("‖Lᵀx‖_∞ = 0"));
    }
    let componentwise = est.iter().zip(lx.iter()).map(|(e, v)| e * dagger(v.abs())).fold(0.0, f64::max);
    Ok(InfSsceEstimate { mixed: inf_norm(&est) / denom, componentwise, per_component: est })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cond::{kappa_2ils, normwise_middle};
    use crate::ils::SignatureSplit;
    use crate::linalg::gaussian_vector;

    fn problem(seed: u64, m: usize, n: usize, p: usize) -> IlsProblem {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut a = gaussian_matrix(&mut rng, m, n);
        a.rows_mut(p, m - p).scale_mut(0.3);
        IlsProblem::new(a, gaussian_vector(&mut rng, m), SignatureSplit::new(p, m - p).unwrap()).unwrap()
    }

    #[test]
    fn directions_orthonormal() {
        let z = sample_directions(40, 5, 3).unwrap();
        let g = z.tr_mul(&z);
        assert!((g - DMatrix::identity(5, 5)).amax() <= 1e-12);
        assert!(sample_directions(3, 4, 0).is_err());
    }

    #[test]
    fn directional_values_match_kernel_rows() {
        let p = problem(1, 12, 4, 9);
        let k = normwise_middle(p.a(), p.x(), p.r(), 0.9, 1.2);
        let s = p.apply_minv(&k).unwrap();
        let z = sample_directions(4, 3, 2).unwrap();
        for i in 0..3 {
            let zi = z.column(i).into_owned();
            let v = directional_square(&p, &zi, 0.9, 1.2).unwrap();
            let oracle = s.tr_mul(&zi).norm_squared();
            assert!((v - oracle).abs() <= 1e-10 * oracle);
        }
    }

    #[test]
    fn full_basis_dominates() {
        let p = problem(4, 15, 5, 10);
        let params = CondParams::default();
        let exact = kappa_2ils(&p, &params).unwrap();
        let cfg = SsceConfig { k: 5, exact_wallis: true, ..SsceConfig::default() };
        let est = estimate_kappa2_ssce(&p, &params, &cfg).unwrap();
        assert!(est >= exact * (1.0 - 1e-12));
        // with all n directions the sum is the Frobenius norm squared
        let k = normwise_middle(p.a(), p.x(), p.r(), 1.0, 1.0);
        let fro = p.apply_minv(&k).unwrap().norm();
        assert!((est - fro).abs() <= 1e-10 * fro);
    }

    #[test]
    fn deterministic_in_seed() {
        let p = problem(5, 10, 3, 7);
        let cfg = SsceConfig { seed: 9, ..SsceConfig::default() };
        let a = estimate_kappa_inf_ssce(&p, &CondParams::default(), &cfg).unwrap();
        let b = estimate_kappa_inf_ssce(&p, &CondParams::default(), &cfg).unwrap();
        assert_eq!(a, b);
        let s1 = estimate_kappa2_ssce(&p, &CondParams::default(), &cfg).unwrap();
        let s2 = estimate_kappa2_ssce(&p, &CondParams::default(), &cfg).unwrap();
        assert_eq!(s1.to_bits(), s2.to_bits());
    }

    #[test]
    fn full_basis_gives_row_norms() {
        let p = problem(6, 3, 2, 3);
        let t = 9;
        let cfg = SsceConfig { k: t, exact_wallis: true, ..SsceConfig::default() };
        let est = estimate_kappa_inf_ssce(&p, &CondParams::default(), &cfg).unwrap();
        let dense = ils_jacobian(&p, &DMatrix::identity(2, 2)).unwrap().to_dense().unwrap();
        for i in 0..2 {
            let row = dense.row(i).norm();
            assert!((est.per_component[i] - row).abs() <= 1e-12 * row);
        }
        // ‖m‖₂ ≤ ‖m‖₁ ≤ √t ‖m‖₂ against the ∞-norm value with unit weights
        let kinf = crate::cond::kappa_inf(&p, &CondParams::default()).unwrap();
        let top = est.per_component.amax();
        assert!(top <= kinf * (1.0 + 1e-12) && kinf <= (t as f64).sqrt() * top);
    }

    #[test]
    fn l_must_be_identity_for_2norm() {
        let p = problem(7, 8, 3, 6);
        let params = CondParams::default().with_l(DMatrix::identity(3, 2));
        assert!(estimate_kappa2_ssce(&p, &params, &SsceConfig::default()).is_err());
    }
}
