//! Exact partial condition numbers of the ILS problem.
//!
//! `J = I` gives the linear least squares case through the same code.

mod jacobian;
mod params;

pub use jacobian::{RowJacobian, DENSE_ENTRY_LIMIT};
pub use params::{CondParams, MatrixWeight, NormMode, VectorWeight};

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::ils::IlsProblem;
use crate::kron::{dagger, entrywise_div};
use crate::linalg::{inf_norm, inf_norm_mat, spectral_norm, sym_max_eig};

/// How [`build_mg`] stores `M_g'`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MgMode {
    Dense,
    Rows,
}

/// `M_g'`: the Jacobian of `(A, b) -> Lᵀx(A, b)` for an ILS problem.
#[derive(Debug, Clone)]
pub struct JacobianMg {
    rows: RowJacobian,
    dense: Option<DMatrix<f64>>,
}

impl JacobianMg {
    pub fn rows(&self) -> &RowJacobian {
        &self.rows
    }

    pub fn dense(&self) -> Option<&DMatrix<f64>> {
        self.dense.as_ref()
    }

    /// Row `i` over `vec(ΔA)` as an `m x n` matrix `Jr (M⁻¹l_i)ᵀ - J A M⁻¹ l_i xᵀ`.
    pub fn ra(&self, i: usize) -> DMatrix<f64> {
        self.rows.row_a(i)
    }

    /// Row `i` over `Δb`: `J A M⁻¹ l_i`.
    pub fn rb(&self, i: usize) -> DVector<f64> {
        self.rows.row_b(i)
    }
}

/// Row generators of `M_g'` for the projector `l`.
pub fn ils_jacobian(problem: &IlsProblem, l: &DMatrix<f64>) -> Result<RowJacobian> {
    let split = problem.split();
    let w = problem.apply_minv(l)?;
    let v = split.apply_rows(&(problem.a() * &w));
    RowJacobian::new(split.apply(problem.r()), w, v, problem.x().clone())
}

pub fn build_mg(problem: &IlsProblem, params: &CondParams, mode: MgMode) -> Result<JacobianMg> {
    let l = params.l_matrix(problem.n())?;
    let rows = ils_jacobian(problem, &l)?;
    let dense = match mode {
        MgMode::Dense => Some(rows.to_dense()?),
        MgMode::Rows => None,
    };
    Ok(JacobianMg { rows, dense })
}

/// `diag‡(ξ) M diag(vec(Ψ, β))` in dense form.
pub(crate) fn weighted_dense(jac: &RowJacobian, params: &CondParams) -> Result<DMatrix<f64>> {
    let (m, n, k) = (jac.m(), jac.n(), jac.k());
    params.psi.check(m, n)?;
    params.beta.check(m, "beta")?;
    params.xi.check(k, "xi")?;
    let mut d = jac.to_dense()?;
    for col in 0..n {
        for row in 0..m {
            let s = params.psi.at(row, col);
            d.column_mut(col * m + row).scale_mut(s);
        }
    }
    for row in 0..m {
        let s = params.beta.at(row);
        d.column_mut(m * n + row).scale_mut(s);
    }
    for i in 0..k {
        d.row_mut(i).scale_mut(dagger(params.xi.at(i)));
    }
    Ok(d)
}

/// Induced `(μ, ν)` norm of the weighted Jacobian. Only the pairs `(2, 2)`
/// and `(∞, ∞)` are supported.
pub(crate) fn unified_norm(jac: &RowJacobian, params: &CondParams, mu: NormMode, nu: NormMode) -> Result<f64> {
    match (mu, nu) {
        (NormMode::Two, NormMode::Two) => Ok(spectral_norm(&weighted_dense(jac, params)?)),
        (NormMode::Inf, NormMode::Inf) => Ok(inf_norm_mat(&weighted_dense(jac, params)?)),
        (mu, nu) => Err(Error::NotImplemented(format!("induced norm pair ({mu:?}, {nu:?})"))),
    }
}

/// The partial unified condition number `‖diag‡(ξ) M_g' diag(vec(Ψ, β))‖_{μ,ν}`.
pub fn kappa_unified(problem: &IlsProblem, params: &CondParams, mu: NormMode, nu: NormMode) -> Result<f64> {
    if let (NormMode::Two, NormMode::Inf) | (NormMode::Inf, NormMode::Two) = (mu, nu) {
        return Err(Error::NotImplemented(format!("induced norm pair ({mu:?}, {nu:?})")));
    }
    let l = params.l_matrix(problem.n())?;
    unified_norm(&ils_jacobian(problem, &l)?, params, mu, nu)
}

/// The `n x (2m + n)` matrix
/// `[Ψ‖r‖(I - Aᵀr xᵀ/‖r‖²), -βAᵀ, Ψ‖x‖Aᵀ(I - r rᵀ/‖r‖²)]`.
///
/// At `r = 0` the rank-one corrections are dropped; both vanish with `r`.
pub fn normwise_middle(a: &DMatrix<f64>, x: &DVector<f64>, r: &DVector<f64>, psi: f64, beta: f64) -> DMatrix<f64> {
    let (m, n) = a.shape();
    let rn2 = r.norm_squared();
    let rn = rn2.sqrt();
    let xn = x.norm();
    let at = a.transpose();
    let mut k = DMatrix::zeros(n, 2 * m + n);

    let mut b1 = DMatrix::identity(n, n) * (psi * rn);
    let mut b3 = &at * (psi * xn);
    if rn2 > 0.0 {
        let atr = &at * r;
        b1 -= &atr * x.transpose() * (psi / rn);
        b3 -= &atr * r.transpose() * (psi * xn / rn2);
    }
    k.columns_mut(0, n).copy_from(&b1);
    k.columns_mut(n, m).copy_from(&(&at * -beta));
    k.columns_mut(n + m, m).copy_from(&b3);
    k
}

/// Partial normwise condition number from the `k x (2m + n)` form
/// `‖LᵀM⁻¹[Ψ‖r‖(I - Aᵀr xᵀ/‖r‖²), -βAᵀ, Ψ‖x‖Aᵀ(I - rrᵀ/‖r‖²)]‖₂ / ξ`.
pub fn kappa_2ils(problem: &IlsProblem, params: &CondParams) -> Result<f64> {
    let (psi, beta, xi) = params.scalars()?;
    let l = params.l_matrix(problem.n())?;
    let k = normwise_middle(problem.a(), problem.x(), problem.r(), psi, beta);
    let s = l.tr_mul(&problem.apply_minv(&k)?);
    Ok(spectral_norm(&s) / xi)
}

/// The `k x k` cross-product form
/// `‖LᵀM⁻¹(Ψ²‖r‖²I + (Ψ²‖x‖² + β²)AᵀA - Ψ²(x rᵀA + Aᵀr xᵀ))M⁻¹L‖₂^{1/2} / ξ`.
///
/// Forms `AᵀA`, so it is less accurate than [`kappa_2ils`]; kept as an
/// independent check.
pub fn kappa_2ils_gram(problem: &IlsProblem, params: &CondParams) -> Result<f64> {
    let (psi, beta, xi) = params.scalars()?;
    let n = problem.n();
    let l = params.l_matrix(n)?;
    let (a, x, r) = (problem.a(), problem.x(), problem.r());
    let ata = a.tr_mul(a);
    let atr = a.tr_mul(r);
    let xrta = x * atr.transpose();
    let inner = DMatrix::identity(n, n) * (psi * psi * r.norm_squared()) + &ata * (psi * psi * x.norm_squared() + beta * beta)
        - (&xrta + xrta.transpose()) * (psi * psi);
    let minv_l = problem.apply_minv(&l)?;
    let c = minv_l.tr_mul(&(inner * &minv_l));
    let c = (&c + c.transpose()) * 0.5;
    Ok(sym_max_eig(&c).max(0.0).sqrt() / xi)
}

/// `‖ |M_g'| |vec(Ψ, β)| / |ξ| ‖_∞`, evaluated row by row.
pub fn kappa_inf(problem: &IlsProblem, params: &CondParams) -> Result<f64> {
    params.validate(problem.m(), problem.n())?;
    let l = params.l_matrix(problem.n())?;
    let jac = ils_jacobian(problem, &l)?;
    let num = jac.abs_weighted_row_sums(&params.psi, &params.beta);
    let xi = params.xi.to_vector(jac.k()).map(f64::abs);
    Ok(inf_norm(&entrywise_div(&num, &xi)?))
}

/// `|M_g'| |vec(A, b)|`, the shared numerator of the mixed and
/// componentwise condition numbers, together with `Lᵀx`.
pub fn mixed_numerator(problem: &IlsProblem, l: &DMatrix<f64>) -> Result<(DVector<f64>, DVector<f64>)> {
    let jac = ils_jacobian(problem, l)?;
    let num = jac.abs_weighted_row_sums(
        &MatrixWeight::Elementwise(problem.a().clone()),
        &VectorWeight::Elementwise(problem.b().clone()),
    );
    Ok((num, l.tr_mul(problem.x())))
}

/// Partial mixed condition number `‖ |M_g'| |vec(A, b)| ‖_∞ / ‖Lᵀx‖_∞`.
pub fn kappa_mixed(problem: &IlsProblem, params: &CondParams) -> Result<f64> {
    let l = params.l_matrix(problem.n())?;
    let (num, lx) = mixed_numerator(problem, &l)?;
    mixed_from_parts(&num, &lx)
}

/// Partial componentwise condition number `‖ |M_g'| |vec(A, b)| / |Lᵀx| ‖_∞`.
pub fn kappa_componentwise(problem: &IlsProblem, params: &CondParams) -> Result<f64> {
    let l = params.l_matrix(problem.n())?;
    let (num, lx) = mixed_numerator(problem, &l)?;
    componentwise_from_parts(&num, &lx)
}

pub(crate) fn mixed_from_parts(num: &DVector<f64>, lx: &DVector<f64>) -> Result<f64> {
    let denom = inf_norm(lx);
    if denom == 0.0 {
        return Err(Error::UndefinedConditionNumber("‖Lᵀx‖_∞ = 0"));
    }
    Ok(inf_norm(num) / denom)
}

pub(crate) fn componentwise_from_parts(num: &DVector<f64>, lx: &DVector<f64>) -> Result<f64> {
    Ok(inf_norm(&entrywise_div(num, &lx.map(f64::abs))?))
}

/// LLS partial normwise condition number through the thin SVD of `A`:
/// `‖S Σ⁻² Vᵀ L‖₂ / ξ`, `S_ii = sqrt(Ψ²‖r‖² + (Ψ²‖x‖² + β²)σ_i²)`.
pub fn kappa_lls_svd_check(a: &DMatrix<f64>, b: &DVector<f64>, params: &CondParams) -> Result<f64> {
    let (psi, beta, xi) = params.scalars()?;
    let (m, n) = a.shape();
    if b.len() != m {
        return Err(crate::error::dim_err("kappa_lls_svd_check (b)", m, b.len()));
    }
    let l = params.l_matrix(n)?;
    let svd = a.clone().svd(true, true);
    let (u, vt) = (svd.u.as_ref().unwrap(), svd.v_t.as_ref().unwrap());
    let s = &svd.singular_values;
    let (smax, smin) = (s.max(), s.min());
    if smin <= smax * f64::EPSILON * (m.max(n) as f64) {
        return Err(Error::RankDeficient(if smax > 0.0 { smin / smax } else { 0.0 }));
    }
    // x = V Σ⁻¹ Uᵀ b
    let utb = u.tr_mul(b);
    let x = vt.tr_mul(&DVector::from_fn(n, |i, _| utb[i] / s[i]));
    let r = b - a * &x;
    let (rn2, xn2) = (r.norm_squared(), x.norm_squared());
    let vtl = vt * &l;
    let scaled = DMatrix::from_fn(n, l.ncols(), |i, j| {
        let sii = (psi * psi * rn2 + (psi * psi * xn2 + beta * beta) * s[i] * s[i]).sqrt();
        sii / (s[i] * s[i]) * vtl[(i, j)]
    });
    Ok(spectral_norm(&scaled) / xi)
}
