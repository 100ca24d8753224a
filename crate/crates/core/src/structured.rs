//! Linear structures and the structured condition numbers.
//!
//! A structure basis `Φ` maps a parameter vector `s` to `vec(A) = Φ s`.
//! For every supported kind the columns of `Φ` have disjoint supports, so
//! `ΦᵀΦ = diag(d²)` and extraction is a weighted average per parameter.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};

use crate::cond::{componentwise_from_parts, ils_jacobian, mixed_from_parts, CondParams, RowJacobian};
use crate::error::{dim_err, Error, Result};
use crate::ils::IlsProblem;
use crate::kron::{dagger, vec};
use crate::linalg::{inf_norm, spectral_norm};

/// Tolerance, relative to `‖A‖_F`, for accepting data as structured.
pub const STRUCTURE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub enum StructureKind {
    Toeplitz,
    Hankel,
    Symmetric,
    /// `[B; cB]` with `B` of the base kind.
    StackedScaled { base: Box<StructureKind>, scale: f64 },
    Full,
}

impl StructureKind {
    pub fn stacked_scaled(base: StructureKind, scale: f64) -> Self {
        Self::StackedScaled { base: Box::new(base), scale }
    }
}

impl fmt::Display for StructureKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Toeplitz => f.write_str("toeplitz"),
            Self::Hankel => f.write_str("hankel"),
            Self::Symmetric => f.write_str("symmetric"),
            Self::Full => f.write_str("full"),
            Self::StackedScaled { base, scale } => write!(f, "stacked_scaled:{base}:{scale}"),
        }
    }
}

impl FromStr for StructureKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "toeplitz" => Ok(Self::Toeplitz),
            "hankel" => Ok(Self::Hankel),
            "symmetric" => Ok(Self::Symmetric),
            "full" => Ok(Self::Full),
            _ => {
                let rest = s
                    .strip_prefix("stacked_scaled:")
                    .ok_or_else(|| Error::UnsupportedStructure(s.to_string()))?;
                let (base, scale) = rest
                    .rsplit_once(':')
                    .ok_or_else(|| Error::UnsupportedStructure(s.to_string()))?;
                let scale: f64 = scale
                    .parse()
                    .map_err(|_| Error::UnsupportedStructure(format!("bad scale in {s}")))?;
                Ok(Self::stacked_scaled(base.parse()?, scale))
            }
        }
    }
}

/// Sparse structure matrix `Φ` for `rows x cols` data.
#[derive(Debug, Clone)]
pub struct StructureBasis {
    kind: StructureKind,
    rows: usize,
    cols: usize,
    support: Vec<Vec<(usize, f64)>>,
    norms_sq: DVector<f64>,
    norms: DVector<f64>,
}

pub fn make_basis(kind: &StructureKind, rows: usize, cols: usize) -> Result<StructureBasis> {
    let support = supports(kind, rows, cols)?;
    let norms_sq = DVector::from_iterator(
        support.len(),
        support.iter().map(|s| s.iter().map(|&(_, v)| v * v).sum::<f64>()),
    );
    if norms_sq.iter().any(|&d| d == 0.0) {
        return Err(Error::UnsupportedStructure(format!("{kind} with a zero scale")));
    }
    let norms = norms_sq.map(f64::sqrt);
    Ok(StructureBasis { kind: kind.clone(), rows, cols, support, norms_sq, norms })
}

fn supports(kind: &StructureKind, m: usize, n: usize) -> Result<Vec<Vec<(usize, f64)>>> {
    if m == 0 || n == 0 {
        return Err(Error::UnsupportedStructure(format!("{kind} of size {m}x{n}")));
    }
    Ok(match kind {
        StructureKind::Full => (0..m * n).map(|j| vec![(j, 1.0)]).collect(),
        StructureKind::Toeplitz => {
            let mut s = vec![Vec::new(); m + n - 1];
            for col in 0..n {
                for row in 0..m {
                    s[col + m - 1 - row].push((col * m + row, 1.0));
                }
            }
            s
        }
        StructureKind::Hankel => {
            let mut s = vec![Vec::new(); m + n - 1];
            for col in 0..n {
                for row in 0..m {
                    s[row + col].push((col * m + row, 1.0));
                }
            }
            s
        }
        StructureKind::Symmetric => {
            if m != n {
                return Err(Error::UnsupportedStructure(format!("symmetric of size {m}x{n}")));
            }
            let mut s = Vec::with_capacity(n * (n + 1) / 2);
            for col in 0..n {
                for row in 0..=col {
                    let mut p = vec![(col * n + row, 1.0)];
                    if row != col {
                        p.push((row * n + col, 1.0));
                    }
                    s.push(p);
                }
            }
            s
        }
        StructureKind::StackedScaled { base, scale } => {
            if !m.is_multiple_of(2) {
                return Err(Error::UnsupportedStructure(format!("{kind} needs an even row count, got {m}")));
            }
            let mb = m / 2;
            supports(base, mb, n)?
                .into_iter()
                .map(|p| {
                    p.into_iter()
                        .flat_map(|(idx, v)| {
                            let (row, col) = (idx % mb, idx / mb);
                            [(col * m + row, v), (col * m + mb + row, v * scale)]
                        })
                        .collect()
                })
                .collect()
        }
    })
}

impl StructureBasis {
    /// Identity basis for unstructured data.
    pub fn full(rows: usize, cols: usize) -> Self {
        make_basis(&StructureKind::Full, rows, cols.max(1)).expect("full basis of positive size")
    }

    pub fn kind(&self) -> &StructureKind {
        &self.kind
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn nparams(&self) -> usize {
        self.support.len()
    }

    /// Nonzero entries `(index into vec(data), value)` of column `j` of `Φ`.
    pub fn support(&self, j: usize) -> &[(usize, f64)] {
        &self.support[j]
    }

    /// Column norms `d`.
    pub fn norms(&self) -> &DVector<f64> {
        &self.norms
    }

    /// Diagonal of `ΦᵀΦ`.
    pub fn norms_squared(&self) -> &DVector<f64> {
        &self.norms_sq
    }

    /// `vec(data) = Φ s`.
    pub fn embed(&self, s: &DVector<f64>) -> Result<DMatrix<f64>> {
        if s.len() != self.nparams() {
            return Err(dim_err("embed", self.nparams(), s.len()));
        }
        let mut out = DMatrix::zeros(self.rows, self.cols);
        for (j, p) in self.support.iter().enumerate() {
            for &(idx, v) in p {
                out[(idx % self.rows, idx / self.rows)] += v * s[j];
            }
        }
        Ok(out)
    }

    /// `s = diag(d²)⁻¹ Φᵀ vec(data)`; fails if `Φ s` misses the data by more
    /// than `1e-12 ‖data‖_F`.
    pub fn extract(&self, data: &DMatrix<f64>) -> Result<DVector<f64>> {
        if data.shape() != self.shape() {
            return Err(dim_err(
                "extract",
                format!("{}x{}", self.rows, self.cols),
                format!("{}x{}", data.nrows(), data.ncols()),
            ));
        }
        let s = DVector::from_iterator(
            self.nparams(),
            self.support.iter().zip(self.norms_sq.iter()).map(|(p, d2)| {
                p.iter().map(|&(idx, v)| v * data[(idx % self.rows, idx / self.rows)]).sum::<f64>() / d2
            }),
        );
        let diff = self.embed(&s)? - data;
        let (mut worst, mut at) = (0.0, (0, 0));
        for col in 0..self.cols {
            for row in 0..self.rows {
                let d = diff[(row, col)].abs();
                if d > worst {
                    worst = d;
                    at = (row, col);
                }
            }
        }
        if worst > STRUCTURE_TOL * data.norm() {
            return Err(Error::StructureViolation { kind: self.kind.to_string(), row: at.0, col: at.1, deviation: worst });
        }
        Ok(s)
    }

    pub fn extract_vector(&self, data: &DVector<f64>) -> Result<DVector<f64>> {
        self.extract(&DMatrix::from_column_slice(data.len(), 1, data.as_slice()))
    }

    /// Dense `Φ`, for checks on small sizes.
    pub fn dense_phi(&self) -> DMatrix<f64> {
        let mut phi = DMatrix::zeros(self.rows * self.cols, self.nparams());
        for (j, p) in self.support.iter().enumerate() {
            for &(idx, v) in p {
                phi[(idx, j)] = v;
            }
        }
        phi
    }
}

/// Toeplitz matrix with first column `c` and first row `r` (`r[0]` is ignored).
pub fn toeplitz(c: &DVector<f64>, r: &DVector<f64>) -> DMatrix<f64> {
    DMatrix::from_fn(c.len(), r.len(), |i, j| if i >= j { c[i - j] } else { r[j - i] })
}

/// Parameters of [`toeplitz`]`(c, r)` in basis order: `c` reversed, then `r[1..]`.
pub fn toeplitz_params(c: &DVector<f64>, r: &DVector<f64>) -> DVector<f64> {
    DVector::from_iterator(c.len() + r.len() - 1, c.iter().rev().chain(r.iter().skip(1)).copied())
}

/// Structure bases for `A` and `b` with the weights `φ`, `θ` of the general
/// ∞-norm form.
#[derive(Debug, Clone)]
pub struct StructuredParams {
    pub basis_a: StructureBasis,
    pub basis_b: StructureBasis,
    pub varphi: DVector<f64>,
    pub theta: DVector<f64>,
}

impl StructuredParams {
    /// `φ = s₁`, `θ = s₂`, the parameters of the data itself.
    pub fn from_data(basis_a: StructureBasis, basis_b: StructureBasis, a: &DMatrix<f64>, b: &DVector<f64>) -> Result<Self> {
        let varphi = basis_a.extract(a)?;
        let theta = basis_b.extract_vector(b)?;
        Ok(Self { basis_a, basis_b, varphi, theta })
    }

    /// Structured `A`, unstructured `b`.
    pub fn structured_a(kind: &StructureKind, a: &DMatrix<f64>, b: &DVector<f64>) -> Result<Self> {
        Self::from_data(make_basis(kind, a.nrows(), a.ncols())?, StructureBasis::full(b.len(), 1), a, b)
    }

    fn check(&self, m: usize, n: usize) -> Result<()> {
        if self.basis_a.shape() != (m, n) {
            return Err(dim_err("basis for A", format!("{m}x{n}"), format!("{}x{}", self.basis_a.rows(), self.basis_a.cols())));
        }
        if self.basis_b.shape() != (m, 1) {
            return Err(dim_err("basis for b", format!("{m}x1"), format!("{}x{}", self.basis_b.rows(), self.basis_b.cols())));
        }
        if self.varphi.len() != self.basis_a.nparams() {
            return Err(dim_err("varphi", self.basis_a.nparams(), self.varphi.len()));
        }
        if self.theta.len() != self.basis_b.nparams() {
            return Err(dim_err("theta", self.basis_b.nparams(), self.theta.len()));
        }
        Ok(())
    }
}

/// `‖[Ψ M_A Φ₁ D₁⁻¹, β M_b Φ₂ D₂⁻¹]‖₂ / ξ` for any row-form Jacobian.
pub(crate) fn structured_2norm(jac: &RowJacobian, params: &CondParams, sp: &StructuredParams) -> Result<f64> {
    let (psi, beta, xi) = params.scalars()?;
    let mut p = jac.project(&sp.basis_a, &sp.basis_b, true)?;
    let k1 = sp.basis_a.nparams();
    p.columns_mut(0, k1).scale_mut(psi);
    let k2 = p.ncols() - k1;
    p.columns_mut(k1, k2).scale_mut(beta);
    Ok(spectral_norm(&p) / xi)
}

/// `|M Φ| |[φ; θ]|`.
pub(crate) fn structured_abs_sums(jac: &RowJacobian, sp: &StructuredParams, phi: &DVector<f64>, theta: &DVector<f64>) -> Result<DVector<f64>> {
    let p = jac.project(&sp.basis_a, &sp.basis_b, false)?;
    let weights = DVector::from_iterator(phi.len() + theta.len(), phi.iter().chain(theta.iter()).map(|v| v.abs()));
    Ok(p.abs() * weights)
}

/// Parameters of the problem data, checked against the bases.
fn data_params(problem: &IlsProblem, sp: &StructuredParams) -> Result<(DVector<f64>, DVector<f64>)> {
    sp.check(problem.m(), problem.n())?;
    Ok((sp.basis_a.extract(problem.a())?, sp.basis_b.extract_vector(problem.b())?))
}

pub fn kappa_2ils_structured(problem: &IlsProblem, params: &CondParams, sp: &StructuredParams) -> Result<f64> {
    data_params(problem, sp)?;
    let jac = ils_jacobian(problem, &params.l_matrix(problem.n())?)?;
    structured_2norm(&jac, params, sp)
}

/// `‖ |M_g' Φ| |[s₁; s₂]| ‖_∞ / ‖Lᵀx‖_∞`.
pub fn kappa_mixed_structured(problem: &IlsProblem, params: &CondParams, sp: &StructuredParams) -> Result<f64> {
    let (s1, s2) = data_params(problem, sp)?;
    let l = params.l_matrix(problem.n())?;
    let num = structured_abs_sums(&ils_jacobian(problem, &l)?, sp, &s1, &s2)?;
    mixed_from_parts(&num, &l.tr_mul(problem.x()))
}

/// `‖ |M_g' Φ| |[s₁; s₂]| / |Lᵀx| ‖_∞`.
pub fn kappa_componentwise_structured(problem: &IlsProblem, params: &CondParams, sp: &StructuredParams) -> Result<f64> {
    let (s1, s2) = data_params(problem, sp)?;
    let l = params.l_matrix(problem.n())?;
    let num = structured_abs_sums(&ils_jacobian(problem, &l)?, sp, &s1, &s2)?;
    componentwise_from_parts(&num, &l.tr_mul(problem.x()))
}

/// `‖ |M_g' Φ| |[φ; θ]| / |ξ| ‖_∞` with the weights of `sp` and `params.xi`.
pub fn kappa_inf_structured_general(problem: &IlsProblem, params: &CondParams, sp: &StructuredParams) -> Result<f64> {
    data_params(problem, sp)?;
    let l = params.l_matrix(problem.n())?;
    let k = l.ncols();
    params.xi.check(k, "xi")?;
    let num = structured_abs_sums(&ils_jacobian(problem, &l)?, sp, &sp.varphi, &sp.theta)?;
    Ok(inf_norm(&DVector::from_fn(k, |i, _| num[i] * dagger(params.xi.at(i).abs()))))
}

/// `vec(A)` for a basis and parameters; shorthand for tests and generators.
pub fn embed_vec(basis: &StructureBasis, s: &DVector<f64>) -> Result<DVector<f64>> {
    Ok(vec(&basis.embed(s)?))
}
