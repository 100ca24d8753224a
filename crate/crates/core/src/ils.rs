//! Indefinite least squares instances: `min (b - Ax)ᵀ J (b - Ax)` with the
//! signature `J = diag(I_p, -I_q)`.
//!
//! The problem has a unique solution `x = M⁻¹AᵀJb`, `M = AᵀJA`, iff `M` is
//! positive definite. The factor of `M` is computed without forming the
//! cross product: with `A_p = QR` and `Y = A_q R⁻¹`,
//! `M = Rᵀ (I - YᵀY) R`, so `M = F Fᵀ` with `F = Rᵀ G` and `G Gᵀ` the
//! Cholesky factorization of `I - YᵀY`. That factorization exists iff `M`
//! is positive definite, and it stays usable when `κ(A)²` exceeds `1/ε`.

use nalgebra::{Cholesky, DMatrix, DVector};

use crate::error::{dim_err, Error, Result};

/// Reciprocal-condition threshold below which a near-singular warning is
/// attached to the problem.
pub const NEAR_SINGULAR_RCOND: f64 = 1e3 * f64::EPSILON;

/// Split `p + q = m` of the signature matrix `J`. `J` is never stored; it acts
/// as a sign flip on the trailing `q` entries.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SignatureSplit {
    pub p: usize,
    pub q: usize,
}

impl SignatureSplit {
    pub fn new(p: usize, q: usize) -> Result<Self> {
        if p == 0 {
            return Err(Error::InvalidParameter("signature needs p >= 1".into()));
        }
        Ok(Self { p, q })
    }

    /// `J = I_m`, the linear least squares case.
    pub fn identity(m: usize) -> Self {
        Self { p: m, q: 0 }
    }

    pub fn m(&self) -> usize {
        self.p + self.q
    }

    pub fn apply(&self, v: &DVector<f64>) -> DVector<f64> {
        let mut out = v.clone();
        self.apply_mut(&mut out);
        out
    }

    pub fn apply_mut(&self, v: &mut DVector<f64>) {
        for e in v.iter_mut().skip(self.p) {
            *e = -*e;
        }
    }

    /// `J X`, a sign flip of the trailing `q` rows.
    pub fn apply_rows(&self, x: &DMatrix<f64>) -> DMatrix<f64> {
        let mut out = x.clone();
        for i in self.p..out.nrows() {
            out.row_mut(i).neg_mut();
        }
        out
    }
}

/// `M = F Fᵀ` with `F` lower triangular.
#[derive(Debug, Clone)]
pub struct SpdFactor {
    lower: DMatrix<f64>,
}

impl SpdFactor {
    pub fn from_lower(lower: DMatrix<f64>) -> Self {
        Self { lower }
    }

    pub fn lower(&self) -> &DMatrix<f64> {
        &self.lower
    }

    pub fn dim(&self) -> usize {
        self.lower.nrows()
    }

    /// `M⁻¹ V` by two triangular solves per column.
    pub fn solve_mat(&self, v: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        if v.nrows() != self.dim() {
            return Err(dim_err("apply_minv", self.dim(), v.nrows()));
        }
        if v.ncols() == 0 {
            return Ok(v.clone());
        }
        let y = self
            .lower
            .solve_lower_triangular(v)
            .ok_or(Error::NotPositiveDefinite)?;
        self.lower
            .tr_solve_lower_triangular(&y)
            .ok_or(Error::NotPositiveDefinite)
    }

    pub fn solve(&self, v: &DVector<f64>) -> Result<DVector<f64>> {
        if v.len() != self.dim() {
            return Err(dim_err("apply_minv", self.dim(), v.len()));
        }
        let y = self
            .lower
            .solve_lower_triangular(v)
            .ok_or(Error::NotPositiveDefinite)?;
        self.lower
            .tr_solve_lower_triangular(&y)
            .ok_or(Error::NotPositiveDefinite)
    }

    /// Cheap reciprocal condition estimate `(min |F_ii| / max |F_ii|)²`.
    pub fn rcond_estimate(&self) -> f64 {
        let d = self.lower.diagonal().map(f64::abs);
        if d.is_empty() {
            return 1.0;
        }
        let (lo, hi) = (d.min(), d.max());
        if hi == 0.0 {
            0.0
        } else {
            (lo / hi).powi(2)
        }
    }
}

/// Forms `M = A_pᵀA_p - A_qᵀA_q` and a factor certifying positive definiteness.
pub fn check_spd(a: &DMatrix<f64>, split: SignatureSplit) -> Result<(DMatrix<f64>, SpdFactor)> {
    let (m, n) = a.shape();
    if split.m() != m {
        return Err(dim_err("check_spd (p + q)", m, split.m()));
    }
    let ap = a.rows(0, split.p);
    let aq = a.rows(split.p, split.q);
    let gram = ap.transpose() * ap - aq.transpose() * aq;

    // M positive definite forces A_p to have full column rank.
    if split.p < n {
        return Err(Error::NotPositiveDefinite);
    }
    let r = ap.clone_owned().qr().r();
    if r.diagonal().iter().any(|&d| d == 0.0 || !d.is_finite()) {
        return Err(Error::NotPositiveDefinite);
    }
    let rt = r.transpose();
    let lower = if split.q == 0 {
        rt
    } else {
        // Yᵀ = R⁻ᵀ A_qᵀ
        let yt = rt
            .solve_lower_triangular(&aq.transpose())
            .ok_or(Error::NotPositiveDefinite)?;
        let inner = DMatrix::identity(n, n) - &yt * yt.transpose();
        let g = Cholesky::new(inner).ok_or(Error::NotPositiveDefinite)?;
        rt * g.l()
    };
    if lower.iter().any(|v| !v.is_finite()) {
        return Err(Error::NotPositiveDefinite);
    }
    Ok((gram, SpdFactor::from_lower(lower)))
}

#[derive(Debug, Clone, PartialEq)]
pub enum Warning {
    /// `m == n`: the problem is a square system, not a genuine ILS problem.
    SquareSystem,
    /// `M` is positive definite but close to singular.
    NearSingular { rcond: f64 },
}

#[derive(Debug, Clone)]
pub struct IlsSolution {
    pub x: DVector<f64>,
    /// `b - Ax`
    pub r: DVector<f64>,
}

/// An ILS instance with its factorization and solution. Immutable once built.
#[derive(Debug, Clone)]
pub struct IlsProblem {
    a: DMatrix<f64>,
    b: DVector<f64>,
    split: SignatureSplit,
    gram: DMatrix<f64>,
    factor: SpdFactor,
    solution: IlsSolution,
    warnings: Vec<Warning>,
}

impl IlsProblem {
    pub fn new(a: DMatrix<f64>, b: DVector<f64>, split: SignatureSplit) -> Result<Self> {
        let (m, n) = a.shape();
        if n == 0 {
            return Err(Error::InvalidParameter("A needs at least one column".into()));
        }
        if b.len() != m {
            return Err(dim_err("IlsProblem (b)", m, b.len()));
        }
        if m < n {
            return Err(dim_err("IlsProblem (m >= n)", format!(">= {n}"), m));
        }
        let (gram, factor) = check_spd(&a, split)?;

        let mut warnings = Vec::new();
        if m == n {
            warnings.push(Warning::SquareSystem);
        }
        let rcond = factor.rcond_estimate();
        if rcond < NEAR_SINGULAR_RCOND {
            log::debug!("AᵀJA is nearly singular (rcond ~ {rcond:e})");
            warnings.push(Warning::NearSingular { rcond });
        }

        let rhs = a.transpose() * split.apply(&b);
        let x = factor.solve(&rhs)?;
        let r = &b - &a * &x;
        Ok(Self {
            a,
            b,
            split,
            gram,
            factor,
            solution: IlsSolution { x, r },
            warnings,
        })
    }

    /// Linear least squares, `J = I`.
    pub fn lls(a: DMatrix<f64>, b: DVector<f64>) -> Result<Self> {
        let m = a.nrows();
        Self::new(a, b, SignatureSplit::identity(m))
    }

    pub fn a(&self) -> &DMatrix<f64> {
        &self.a
    }

    pub fn b(&self) -> &DVector<f64> {
        &self.b
    }

    pub fn split(&self) -> SignatureSplit {
        self.split
    }

    pub fn m(&self) -> usize {
        self.a.nrows()
    }

    pub fn n(&self) -> usize {
        self.a.ncols()
    }

    /// `M = AᵀJA` as formed by `A_pᵀA_p - A_qᵀA_q`.
    pub fn gram(&self) -> &DMatrix<f64> {
        &self.gram
    }

    pub fn factor(&self) -> &SpdFactor {
        &self.factor
    }

    pub fn solution(&self) -> &IlsSolution {
        &self.solution
    }

    pub fn x(&self) -> &DVector<f64> {
        &self.solution.x
    }

    pub fn r(&self) -> &DVector<f64> {
        &self.solution.r
    }

    pub fn warnings(&self) -> &[Warning] {
        &self.warnings
    }

    pub fn apply_minv(&self, v: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        self.factor.solve_mat(v)
    }

    /// Same signature, perturbed data.
    pub fn perturbed(&self, da: &DMatrix<f64>, db: &DVector<f64>) -> Result<Self> {
        Self::new(&self.a + da, &self.b + db, self.split)
    }

    /// Smallest eigenvalue of the explicitly formed `M`; a diagnostic for
    /// problems near the positive-definite boundary.
    pub fn min_eigenvalue(&self) -> f64 {
        self.gram.clone().symmetric_eigen().eigenvalues.min()
    }
}

/// Solves the ILS problem, returning `x` and `r = b - Ax`.
pub fn solve_ils(problem: &IlsProblem) -> IlsSolution {
    problem.solution.clone()
}
