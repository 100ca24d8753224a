//! Total least squares as a special ILS problem.
//!
//! Stacking `B = σ̃I_n`, `d = 0` under `A` with signature `diag(I_m, -I_n)`,
//! where `σ̃` is the smallest singular value of `[A, b]`, gives an ILS
//! problem whose solution is the TLS solution
//! `x = (AᵀA - σ̃²I)⁻¹Aᵀb`. Its Jacobian has the same row shape as the ILS
//! one with `u = r`, `w_i = M̃⁻¹l_i` and `v_i` the rows of
//! `D_σ = LᵀM̃⁻¹(Aᵀ + 2xrᵀ/(1 + ‖x‖²))`.

use nalgebra::{Cholesky, DMatrix, DVector};

use crate::cond::{
    componentwise_from_parts, mixed_from_parts, unified_norm, CondParams, MatrixWeight, NormMode, RowJacobian,
    VectorWeight, DENSE_ENTRY_LIMIT,
};
use crate::error::{dim_err, Error, Result};
use crate::kron::{dagger, kron, VecPermutation};
use crate::linalg::{inf_norm_mat, spectral_norm, sym_max_eig};
use crate::structured::{structured_2norm, structured_abs_sums, StructuredParams};

/// Minimum relative gap `(σ_n - σ̃)/σ_n` for a unique TLS solution.
pub const TLS_GAP: f64 = 1e-10;

/// The composed-perturbation route divides by `σ̃`; it requires
/// `σ̃ > 1e-13 ‖[A, b]‖₂`.
pub const TLS_SIGMA_FLOOR: f64 = 1e-13;

#[derive(Debug, Clone)]
pub struct TlsProblem {
    a: DMatrix<f64>,
    b: DVector<f64>,
    sigma_tilde: f64,
    sigma_n: f64,
    norm_ab: f64,
    // thin SVD of A: M̃⁻¹ = V diag(1/(σ_i² - σ̃²)) Vᵀ
    v: DMatrix<f64>,
    inv_shifted: DVector<f64>,
    x: DVector<f64>,
    r: DVector<f64>,
}

/// Solves the TLS problem through the SVDs of `[A, b]` and `A`.
pub fn solve_tls(a: &DMatrix<f64>, b: &DVector<f64>) -> Result<TlsProblem> {
    let (m, n) = a.shape();
    if b.len() != m {
        return Err(dim_err("solve_tls (b)", m, b.len()));
    }
    if n == 0 || m <= n {
        return Err(dim_err("solve_tls (rows > cols)", format!("m > {n}"), m));
    }
    let mut ab = a.clone().insert_column(n, 0.0);
    ab.set_column(n, b);
    let sab = ab.singular_values();
    let sigma_tilde = sab.min();
    let norm_ab = sab.max();

    let svd = a.clone().svd(true, true);
    let s = &svd.singular_values;
    let sigma_n = s.min();
    if !(sigma_n > 0.0) || (sigma_n - sigma_tilde) / sigma_n < TLS_GAP {
        return Err(Error::TlsNotGeneric { sigma_tilde, sigma_n });
    }
    let (u, vt) = (svd.u.unwrap(), svd.v_t.unwrap());
    let inv_shifted = s.map(|si| 1.0 / ((si - sigma_tilde) * (si + sigma_tilde)));
    let utb = u.tr_mul(b);
    let coef = DVector::from_fn(n, |i, _| s[i] * inv_shifted[i] * utb[i]);
    let v = vt.transpose();
    let x = &v * coef;
    let r = b - a * &x;
    Ok(TlsProblem { a: a.clone(), b: b.clone(), sigma_tilde, sigma_n, norm_ab, v, inv_shifted, x, r })
}

impl TlsProblem {
    pub fn a(&self) -> &DMatrix<f64> {
        &self.a
    }

    pub fn b(&self) -> &DVector<f64> {
        &self.b
    }

    pub fn m(&self) -> usize {
        self.a.nrows()
    }

    pub fn n(&self) -> usize {
        self.a.ncols()
    }

    pub fn sigma_tilde(&self) -> f64 {
        self.sigma_tilde
    }

    pub fn sigma_n(&self) -> f64 {
        self.sigma_n
    }

    pub fn x(&self) -> &DVector<f64> {
        &self.x
    }

    pub fn r(&self) -> &DVector<f64> {
        &self.r
    }

    /// `AᵀA - σ̃²I`, formed explicitly.
    pub fn m_tilde(&self) -> DMatrix<f64> {
        let n = self.n();
        self.a.tr_mul(&self.a) - DMatrix::identity(n, n) * self.sigma_tilde.powi(2)
    }

    /// `M̃⁻¹ Y`.
    pub fn apply_mtilde_inv(&self, y: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        if y.nrows() != self.n() {
            return Err(dim_err("apply_mtilde_inv", self.n(), y.nrows()));
        }
        let mut t = self.v.tr_mul(y);
        for (i, mut row) in t.row_iter_mut().enumerate() {
            row *= self.inv_shifted[i];
        }
        Ok(&self.v * t)
    }

    /// `D_σ = LᵀM̃⁻¹(Aᵀ + 2xrᵀ/(1 + ‖x‖²))`.
    pub fn d_sigma(&self, l: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        Ok(self.jacobian(l)?.v().transpose())
    }

    /// Row generators of the TLS Jacobian for the projector `l`.
    pub fn jacobian(&self, l: &DMatrix<f64>) -> Result<RowJacobian> {
        if l.nrows() != self.n() {
            return Err(dim_err("L", self.n(), l.nrows()));
        }
        let w = self.apply_mtilde_inv(l)?;
        let c = 2.0 / (1.0 + self.x.norm_squared());
        let xw = w.tr_mul(&self.x);
        let v = &self.a * &w + &self.r * (xw.transpose() * c);
        RowJacobian::new(self.r.clone(), w, v, self.x.clone())
    }
}

/// `‖diag‡(ξ) [(rᵀ ⊗ LᵀM̃⁻¹)Π - xᵀ ⊗ D_σ, D_σ] diag(vec(Ψ, β))‖_{μ,ν}`.
pub fn kappa_unified_tls(tls: &TlsProblem, params: &CondParams, mu: NormMode, nu: NormMode) -> Result<f64> {
    let l = params.l_matrix(tls.n())?;
    unified_norm(&tls.jacobian(&l)?, params, mu, nu)
}

/// Partial normwise TLS condition number with scalar weights.
///
/// The dense Jacobian is used while it fits under [`DENSE_ENTRY_LIMIT`];
/// beyond that the `k x k` Gram matrix is assembled from the row generators.
pub fn kappa_2tls(tls: &TlsProblem, params: &CondParams) -> Result<f64> {
    let (psi, beta, xi) = params.scalars()?;
    let l = params.l_matrix(tls.n())?;
    let jac = tls.jacobian(&l)?;
    if jac.k() * jac.ncols() <= DENSE_ENTRY_LIMIT {
        let mut d = jac.to_dense()?;
        let mn = tls.m() * tls.n();
        d.columns_mut(0, mn).scale_mut(psi);
        d.columns_mut(mn, tls.m()).scale_mut(beta);
        Ok(spectral_norm(&d) / xi)
    } else {
        Ok(sym_max_eig(&jac.weighted_gram(psi, beta)).max(0.0).sqrt() / xi)
    }
}

fn tls_numerator(tls: &TlsProblem, l: &DMatrix<f64>) -> Result<DVector<f64>> {
    Ok(tls.jacobian(l)?.abs_weighted_row_sums(
        &MatrixWeight::Elementwise(tls.a.clone()),
        &VectorWeight::Elementwise(tls.b.clone()),
    ))
}

pub fn kappa_mixed_tls(tls: &TlsProblem, params: &CondParams) -> Result<f64> {
    let l = params.l_matrix(tls.n())?;
    mixed_from_parts(&tls_numerator(tls, &l)?, &l.tr_mul(&tls.x))
}

pub fn kappa_componentwise_tls(tls: &TlsProblem, params: &CondParams) -> Result<f64> {
    let l = params.l_matrix(tls.n())?;
    componentwise_from_parts(&tls_numerator(tls, &l)?, &l.tr_mul(&tls.x))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TlsFlavor {
    Two,
    Mixed,
    Componentwise,
}

/// Structured TLS condition numbers. `A` (and `b`) must lie in the span of
/// the bases in `sp`.
pub fn kappa_structured_tls(tls: &TlsProblem, params: &CondParams, sp: &StructuredParams, which: TlsFlavor) -> Result<f64> {
    let s1 = sp.basis_a.extract(&tls.a)?;
    let s2 = sp.basis_b.extract_vector(&tls.b)?;
    let l = params.l_matrix(tls.n())?;
    let jac = tls.jacobian(&l)?;
    match which {
        TlsFlavor::Two => structured_2norm(&jac, params, sp),
        TlsFlavor::Mixed => mixed_from_parts(&structured_abs_sums(&jac, sp, &s1, &s2)?, &l.tr_mul(&tls.x)),
        TlsFlavor::Componentwise => {
            componentwise_from_parts(&structured_abs_sums(&jac, sp, &s1, &s2)?, &l.tr_mul(&tls.x))
        }
    }
}

/// ILS problem `[A; B] x ≈ [b; d]` with signature `diag(I_m, -I_s)`, kept
/// in its four blocks.
#[derive(Debug, Clone)]
pub struct StackedIls {
    pub a: DMatrix<f64>,
    pub b: DVector<f64>,
    pub bmat: DMatrix<f64>,
    pub d: DVector<f64>,
}

/// First-order dependence of `(ΔB, Δd)` on `(ΔA, Δb)`:
/// `vec(ΔB) = [M₁, M₂][vec(ΔA); Δb]`, `Δd = [M₃, M₄][vec(ΔA); Δb]`.
#[derive(Debug, Clone)]
pub struct ComposedBlocks {
    pub m1: DMatrix<f64>,
    pub m2: DMatrix<f64>,
    pub m3: DMatrix<f64>,
    pub m4: DMatrix<f64>,
}

impl ComposedBlocks {
    /// `B` and `d` independent of the data.
    pub fn zeros(m: usize, n: usize, s: usize) -> Self {
        Self {
            m1: DMatrix::zeros(s * n, m * n),
            m2: DMatrix::zeros(s * n, m),
            m3: DMatrix::zeros(s, m * n),
            m4: DMatrix::zeros(s, m),
        }
    }

    /// Blocks of `B = σ̃I_n`, `d = 0` with
    /// `ΔB = σ̃⁻¹ rᵀ(Δb - ΔA x)/(1 + ‖x‖²) I_n` to first order.
    pub fn tls(tls: &TlsProblem) -> Result<Self> {
        let (m, n) = (tls.m(), tls.n());
        let threshold = TLS_SIGMA_FLOOR * tls.norm_ab;
        if !(tls.sigma_tilde > threshold) {
            return Err(Error::TlsConsistent { sigma_tilde: tls.sigma_tilde, threshold });
        }
        let c = 1.0 / (tls.sigma_tilde * (1.0 + tls.x.norm_squared()));
        let vec_i = DMatrix::from_fn(n * n, 1, |i, _| if i % (n + 1) == 0 { 1.0 } else { 0.0 });
        let xt = DMatrix::from_row_slice(1, n, tls.x.as_slice());
        let rt = DMatrix::from_row_slice(1, m, tls.r.as_slice());
        Ok(Self {
            m1: &vec_i * kron(&xt, &rt) * -c,
            m2: &vec_i * &rt * c,
            m3: DMatrix::zeros(n, m * n),
            m4: DMatrix::zeros(n, m),
        })
    }

    fn check(&self, m: usize, n: usize, s: usize) -> Result<()> {
        let want = [(s * n, m * n), (s * n, m), (s, m * n), (s, m)];
        for (blk, w) in [&self.m1, &self.m2, &self.m3, &self.m4].into_iter().zip(want) {
            if blk.shape() != w {
                return Err(dim_err("composed block", format!("{}x{}", w.0, w.1), format!("{}x{}", blk.nrows(), blk.ncols())));
            }
        }
        Ok(())
    }
}

impl StackedIls {
    pub fn tls(tls: &TlsProblem) -> Self {
        let n = tls.n();
        Self {
            a: tls.a.clone(),
            b: tls.b.clone(),
            bmat: DMatrix::identity(n, n) * tls.sigma_tilde,
            d: DVector::zeros(n),
        }
    }

    /// `[N₁, N₂]` and `[N₃, N₄]` for the projector `l`, assembled densely
    /// from Kronecker products, together with `M̃ = AᵀA - BᵀB` certified by
    /// Cholesky.
    fn n_blocks(&self, l: &DMatrix<f64>) -> Result<(DMatrix<f64>, DMatrix<f64>, DMatrix<f64>, DMatrix<f64>)> {
        let (m, n) = self.a.shape();
        let s = self.bmat.nrows();
        if self.b.len() != m || self.bmat.ncols() != n || self.d.len() != s {
            return Err(dim_err("stacked ILS blocks", format!("A {m}x{n}, B sx{n}"), format!("B {}x{}", s, self.bmat.ncols())));
        }
        let mt = self.a.tr_mul(&self.a) - self.bmat.tr_mul(&self.bmat);
        let chol = Cholesky::new(mt).ok_or(Error::NotPositiveDefinite)?;
        let x = chol.solve(&(self.a.tr_mul(&self.b) - self.bmat.tr_mul(&self.d)));
        let r = &self.b - &self.a * &x;
        let sres = &self.d - &self.bmat * &x;
        let lt_minv = chol.solve(l).transpose();
        let row = |v: &DVector<f64>| DMatrix::from_row_slice(1, v.len(), v.as_slice());

        let n1 = VecPermutation::new(m, n).permute_columns(&kron(&row(&r), &lt_minv))?
            - kron(&row(&x), &(&lt_minv * self.a.transpose()));
        let n2 = &lt_minv * self.a.transpose();
        let n3 = kron(&row(&x), &(&lt_minv * self.bmat.transpose()))
            - VecPermutation::new(s, n).permute_columns(&kron(&row(&sres), &lt_minv))?;
        let n4 = -(&lt_minv * self.bmat.transpose());
        Ok((n1, n2, n3, n4))
    }

    /// `[N₁ + N₃M₁ + N₄M₃, N₂ + N₃M₂ + N₄M₄]`.
    pub fn composed_jacobian(&self, blocks: &ComposedBlocks, l: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        let (m, n) = self.a.shape();
        blocks.check(m, n, self.bmat.nrows())?;
        let (n1, n2, n3, n4) = self.n_blocks(l)?;
        let left = n1 + &n3 * &blocks.m1 + &n4 * &blocks.m3;
        let right = n2 + &n3 * &blocks.m2 + &n4 * &blocks.m4;
        let mut out = DMatrix::zeros(l.ncols(), m * n + m);
        out.columns_mut(0, m * n).copy_from(&left);
        out.columns_mut(m * n, m).copy_from(&right);
        Ok(out)
    }
}

/// Condition number of the stacked problem when `B` and `d` move with the
/// data as described by `blocks`.
pub fn kappa_composed_ils(stacked: &StackedIls, blocks: &ComposedBlocks, params: &CondParams, mu: NormMode, nu: NormMode) -> Result<f64> {
    let (m, n) = stacked.a.shape();
    let l = params.l_matrix(n)?;
    params.validate(m, n)?;
    let mut d = stacked.composed_jacobian(blocks, &l)?;
    for col in 0..n {
        for row in 0..m {
            d.column_mut(col * m + row).scale_mut(params.psi.at(row, col));
        }
    }
    for row in 0..m {
        d.column_mut(m * n + row).scale_mut(params.beta.at(row));
    }
    for i in 0..l.ncols() {
        d.row_mut(i).scale_mut(dagger(params.xi.at(i)));
    }
    match (mu, nu) {
        (NormMode::Two, NormMode::Two) => Ok(spectral_norm(&d)),
        (NormMode::Inf, NormMode::Inf) => Ok(inf_norm_mat(&d)),
        _ => Err(Error::NotImplemented(format!("induced norm pair ({mu:?}, {nu:?})"))),
    }
}
