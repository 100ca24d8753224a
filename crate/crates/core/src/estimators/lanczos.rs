//! Spectral norm intervals by Golub-Kahan-Lanczos bidiagonalization.
//!
//! After `j` steps from a start vector `v₁`, `S V_j = U_j B_j` with `B_j`
//! upper bidiagonal (diagonal `α`, superdiagonal `β`). The largest singular
//! value of `B_j` is a guaranteed lower bound for `‖S‖₂`. For the upper
//! bound let `p_j` be the characteristic polynomial of `B_jᵀB_j`; then
//! `‖p_j(SᵀS)v₁‖ = Π α_iβ_i`, and if the component `c₁` of `v₁` along the
//! top right singular vector satisfies `|c₁| ≥ g`, the largest eigenvalue
//! `λ` of `SᵀS` obeys `p_j(λ) ≤ Π α_iβ_i / g`. For `v₁` uniform on the
//! sphere in `R^d`, `c₁² ~ Beta(1/2, (d-1)/2)`, so taking `g²` as its
//! `ε`-quantile gives an upper bound that holds with probability `1 - ε`.

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{Beta, ContinuousCDF};

use crate::error::{Error, Result};
use crate::linalg::unit_sphere;

/// Iteration cap independent of the operator size.
pub const MAX_LANCZOS_STEPS: usize = 300;

/// A linear map known only through products with it and its transpose.
pub trait LinearOperator: Sync {
    fn nrows(&self) -> usize;
    fn ncols(&self) -> usize;
    fn apply(&self, v: &DVector<f64>) -> DVector<f64>;
    fn apply_transpose(&self, w: &DVector<f64>) -> DVector<f64>;

    /// A deterministic upper bound on the spectral norm, if one is cheap.
    fn norm_upper_bound(&self) -> Option<f64> {
        None
    }
}

impl LinearOperator for DMatrix<f64> {
    fn nrows(&self) -> usize {
        self.nrows()
    }

    fn ncols(&self) -> usize {
        self.ncols()
    }

    fn apply(&self, v: &DVector<f64>) -> DVector<f64> {
        self * v
    }

    fn apply_transpose(&self, w: &DVector<f64>) -> DVector<f64> {
        self.tr_mul(w)
    }

    fn norm_upper_bound(&self) -> Option<f64> {
        Some(self.norm())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormInterval {
    /// Certified lower bound.
    pub alpha1: f64,
    /// Upper bound holding with probability at least `1 - epsilon`.
    pub alpha2: f64,
    pub delta: f64,
    pub epsilon: f64,
    pub iterations: usize,
    /// The iteration cap was hit before `alpha2 / alpha1 <= 1 + delta`.
    pub ratio_not_met: bool,
}

impl NormInterval {
    pub fn midpoint(&self) -> f64 {
        0.5 * (self.alpha1 + self.alpha2)
    }

    pub fn contains(&self, value: f64) -> bool {
        self.alpha1 <= value && value <= self.alpha2
    }
}

/// `g` with `P(|c₁| < g) = ε` for the first coordinate of a uniform unit
/// vector in `R^d`.
pub fn sphere_component_quantile(d: usize, epsilon: f64) -> Result<f64> {
    if d <= 1 {
        return Ok(1.0);
    }
    let beta = Beta::new(0.5, 0.5 * (d as f64 - 1.0)).map_err(|e| Error::InvalidParameter(e.to_string()))?;
    Ok(beta.inverse_cdf(epsilon).sqrt())
}

/// Largest `t > θ_max` with `Σ ln(t - θ_i) = target`.
fn polynomial_root(theta: &[f64], target: f64) -> f64 {
    let tmax = theta.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let f = |s: f64| theta.iter().map(|&th| ((tmax - th) + s).ln()).sum::<f64>() - target;
    // bracket the offset s = t - θ_max geometrically
    let scale = tmax.abs().max(f64::MIN_POSITIVE);
    let (mut lo, mut hi) = (scale * 1e-300_f64.max(f64::EPSILON * f64::EPSILON), scale);
    while f(hi) < 0.0 {
        lo = hi;
        hi *= 2.0;
    }
    if f(lo) > 0.0 {
        return tmax + lo;
    }
    for _ in 0..200 {
        let mid = (lo * hi).sqrt();
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-15 * hi {
            break;
        }
    }
    tmax + hi
}

/// Encloses `‖op‖₂` in `[α₁, α₂]` with `α₂ / α₁ ≤ 1 + δ`, where the lower
/// bound is certain and the upper one fails with probability at most `ε`.
pub fn spectral_interval<O: LinearOperator + ?Sized>(op: &O, delta: f64, epsilon: f64, seed: u64) -> Result<NormInterval> {
    if !(delta > 0.0 && delta < 1.0) || !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::InvalidParameter(format!("delta and epsilon must lie in (0, 1), got {delta}, {epsilon}")));
    }
    let (rows, cols) = (op.nrows(), op.ncols());
    let mut interval = NormInterval { alpha1: 0.0, alpha2: 0.0, delta, epsilon, iterations: 0, ratio_not_met: false };
    if rows == 0 || cols == 0 {
        return Ok(interval);
    }
    let deterministic = op.norm_upper_bound().unwrap_or(f64::INFINITY);
    let log_g = sphere_component_quantile(cols, epsilon)?.ln();
    // one step past the rank: the start vector may have a null-space component
    let cap = (rows.min(cols) + 1).min(cols).min(MAX_LANCZOS_STEPS);

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut vs: Vec<DVector<f64>> = vec![unit_sphere(&mut rng, cols)];
    let mut us: Vec<DVector<f64>> = Vec::new();
    let (mut alphas, mut betas): (Vec<f64>, Vec<f64>) = (Vec::new(), Vec::new());
    let mut log_prod = 0.0;
    // largest product norm seen, the scale for breakdown tests
    let mut op_scale: f64 = 0.0;

    for j in 0..cap {
        let mut p = op.apply(&vs[j]);
        op_scale = op_scale.max(p.norm());
        if j > 0 {
            p.axpy(-betas[j - 1], &us[j - 1], 1.0);
        }
        for u in &us {
            let c = u.dot(&p);
            p.axpy(-c, u, 1.0);
        }
        let alpha = p.norm();
        let mut q = DVector::zeros(cols);
        if alpha > 0.0 {
            let u = p / alpha;
            q = op.apply_transpose(&u);
            op_scale = op_scale.max(q.norm());
            q.axpy(-alpha, &vs[j], 1.0);
            us.push(u);
        } else {
            us.push(DVector::zeros(rows));
        }
        for v in &vs {
            let c = v.dot(&q);
            q.axpy(-c, v, 1.0);
        }
        let beta = q.norm();
        alphas.push(alpha);
        betas.push(beta);

        let k = j + 1;
        let b = DMatrix::from_fn(k, k, |r, c| {
            if r == c {
                alphas[r]
            } else if c == r + 1 {
                betas[r]
            } else {
                0.0
            }
        });
        let sv = b.singular_values();
        // rounding allowance on both ends of the interval
        let slack = 8.0 * (k + 1) as f64 * f64::EPSILON;
        let smax = sv.max();
        interval.alpha1 = interval.alpha1.max(smax * (1.0 - slack));
        interval.iterations = k;

        let tiny = 64.0 * f64::EPSILON * op_scale;
        if alpha <= tiny || beta <= tiny {
            // invariant subspace: the Ritz values are exact
            interval.alpha2 = smax * (1.0 + slack);
            return Ok(interval);
        }
        log_prod += alpha.ln() + beta.ln();
        let theta: Vec<f64> = sv.iter().map(|s| s * s).collect();
        let upper = polynomial_root(&theta, log_prod - log_g).sqrt().min(deterministic) * (1.0 + slack);
        interval.alpha2 = upper.max(smax * (1.0 + slack));
        if interval.alpha2 <= (1.0 + delta) * interval.alpha1 {
            return Ok(interval);
        }
        vs.push(q / beta);
    }
    interval.ratio_not_met = true;
    log::warn!(
        "spectral_interval: ratio {:.4} after {} steps exceeds 1 + delta",
        interval.alpha2 / interval.alpha1,
        interval.iterations
    );
    Ok(interval)
}
