//! Probabilistic estimation of the partial normwise condition number.

use nalgebra::{DMatrix, DVector};

use super::lanczos::{spectral_interval, LinearOperator, NormInterval};
use crate::cond::CondParams;
use crate::error::Result;
use crate::ils::IlsProblem;

/// `S = LᵀM⁻¹K` with
/// `K = [Ψ‖r‖(I - Aᵀr xᵀ/‖r‖²), -βAᵀ, Ψ‖x‖Aᵀ(I - rrᵀ/‖r‖²)]`,
/// applied through solves with `M` and never formed.
pub struct PceOperator<'a> {
    problem: &'a IlsProblem,
    l: DMatrix<f64>,
    psi: f64,
    beta: f64,
    rn: f64,
    xn: f64,
    atr: DVector<f64>,
}

impl<'a> PceOperator<'a> {
    pub fn new(problem: &'a IlsProblem, params: &CondParams) -> Result<Self> {
        let (psi, beta, _) = params.scalars()?;
        let l = params.l_matrix(problem.n())?;
        Ok(Self {
            problem,
            l,
            psi,
            beta,
            rn: problem.r().norm(),
            xn: problem.x().norm(),
            atr: problem.a().tr_mul(problem.r()),
        })
    }

    fn m(&self) -> usize {
        self.problem.m()
    }

    fn n(&self) -> usize {
        self.problem.n()
    }
}

impl LinearOperator for PceOperator<'_> {
    fn nrows(&self) -> usize {
        self.l.ncols()
    }

    fn ncols(&self) -> usize {
        2 * self.m() + self.n()
    }

    fn apply(&self, v: &DVector<f64>) -> DVector<f64> {
        let (m, n) = (self.m(), self.n());
        let (a, x, r) = (self.problem.a(), self.problem.x(), self.problem.r());
        let v1 = v.rows(0, n);
        let v2 = v.rows(n, m);
        let mut v3 = v.rows(n + m, m).into_owned();
        let mut kv = v1 * (self.psi * self.rn);
        if self.rn > 0.0 {
            kv.axpy(-self.psi * x.dot(&v1) / self.rn, &self.atr, 1.0);
            let c = r.dot(&v3) / (self.rn * self.rn);
            v3.axpy(-c, r, 1.0);
        }
        kv -= a.tr_mul(&v2) * self.beta;
        kv += a.tr_mul(&v3) * (self.psi * self.xn);
        let y = self.problem.factor().solve(&kv).expect("dimensions checked at construction");
        self.l.tr_mul(&y)
    }

    fn apply_transpose(&self, w: &DVector<f64>) -> DVector<f64> {
        let (m, n) = (self.m(), self.n());
        let (a, x, r) = (self.problem.a(), self.problem.x(), self.problem.r());
        let y = self.problem.factor().solve(&(&self.l * w)).expect("dimensions checked at construction");
        let ay = a * &y;
        let mut out = DVector::zeros(2 * m + n);
        let mut top = &y * (self.psi * self.rn);
        let mut bottom = &ay * (self.psi * self.xn);
        if self.rn > 0.0 {
            let rtay = r.dot(&ay);
            top.axpy(-self.psi * rtay / self.rn, x, 1.0);
            bottom.axpy(-self.psi * self.xn * rtay / (self.rn * self.rn), r, 1.0);
        }
        out.rows_mut(0, n).copy_from(&top);
        out.rows_mut(n, m).copy_from(&(&ay * -self.beta));
        out.rows_mut(n + m, m).copy_from(&bottom);
        out
    }
}

/// Estimate of the partial normwise condition number: the midpoint of a
/// spectral norm interval for `S`, divided by `ξ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PceEstimate {
    pub value: f64,
    pub interval: NormInterval,
}

pub fn estimate_kappa2_pce(problem: &IlsProblem, params: &CondParams, delta: f64, epsilon: f64, seed: u64) -> Result<PceEstimate> {
    let (_, _, xi) = params.scalars()?;
    let op = PceOperator::new(problem, params)?;
    let interval = spectral_interval(&op, delta, epsilon, seed)?;
    Ok(PceEstimate { value: interval.midpoint() / xi, interval })
}
