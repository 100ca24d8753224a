use nalgebra::{DMatrix, DVector};

use crate::error::{dim_err, Error, Result};

/// Weight on the matrix data, `Ψ`.
#[derive(Debug, Clone, PartialEq)]
pub enum MatrixWeight {
    Scalar(f64),
    Elementwise(DMatrix<f64>),
}

/// Weight on a vector, `β` for the right-hand side or `ξ` for the output.
#[derive(Debug, Clone, PartialEq)]
pub enum VectorWeight {
    Scalar(f64),
    Elementwise(DVector<f64>),
}

impl MatrixWeight {
    #[inline]
    pub fn at(&self, i: usize, j: usize) -> f64 {
        match self {
            Self::Scalar(s) => *s,
            Self::Elementwise(m) => m[(i, j)],
        }
    }

    pub fn check(&self, rows: usize, cols: usize) -> Result<()> {
        match self {
            Self::Scalar(s) if *s > 0.0 && s.is_finite() => Ok(()),
            Self::Scalar(s) => Err(Error::InvalidParameter(format!("scalar weight must be positive, got {s}"))),
            Self::Elementwise(m) if m.shape() == (rows, cols) => Ok(()),
            Self::Elementwise(m) => Err(dim_err("psi", format!("{rows}x{cols}"), format!("{}x{}", m.nrows(), m.ncols()))),
        }
    }
}

impl VectorWeight {
    #[inline]
    pub fn at(&self, i: usize) -> f64 {
        match self {
            Self::Scalar(s) => *s,
            Self::Elementwise(v) => v[i],
        }
    }

    pub fn check(&self, len: usize, what: &'static str) -> Result<()> {
        match self {
            Self::Scalar(s) if *s > 0.0 && s.is_finite() => Ok(()),
            Self::Scalar(s) => Err(Error::InvalidParameter(format!("scalar {what} must be positive, got {s}"))),
            Self::Elementwise(v) if v.len() == len => Ok(()),
            Self::Elementwise(v) => Err(dim_err(what, len, v.len())),
        }
    }

    pub fn to_vector(&self, len: usize) -> DVector<f64> {
        match self {
            Self::Scalar(s) => DVector::from_element(len, *s),
            Self::Elementwise(v) => v.clone(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NormMode {
    Two,
    Inf,
}

/// Projector `L` (identity when `None`), data weights `Ψ`, `β`, output
/// weight `ξ` and the norm pair used by the unified condition number.
#[derive(Debug, Clone, PartialEq)]
pub struct CondParams {
    pub l: Option<DMatrix<f64>>,
    pub psi: MatrixWeight,
    pub beta: VectorWeight,
    pub xi: VectorWeight,
    pub norm_mode: NormMode,
}

impl Default for CondParams {
    fn default() -> Self {
        Self {
            l: None,
            psi: MatrixWeight::Scalar(1.0),
            beta: VectorWeight::Scalar(1.0),
            xi: VectorWeight::Scalar(1.0),
            norm_mode: NormMode::Two,
        }
    }
}

impl CondParams {
    pub fn scalar(psi: f64, beta: f64, xi: f64) -> Self {
        Self {
            psi: MatrixWeight::Scalar(psi),
            beta: VectorWeight::Scalar(beta),
            xi: VectorWeight::Scalar(xi),
            ..Self::default()
        }
    }

    pub fn with_l(mut self, l: DMatrix<f64>) -> Self {
        self.l = Some(l);
        self
    }

    /// `L` materialized for a problem with `n` unknowns.
    pub fn l_matrix(&self, n: usize) -> Result<DMatrix<f64>> {
        match &self.l {
            None => Ok(DMatrix::identity(n, n)),
            Some(l) if l.nrows() == n && l.ncols() <= n => Ok(l.clone()),
            Some(l) => Err(dim_err("L", format!("{n}xk with k <= {n}"), format!("{}x{}", l.nrows(), l.ncols()))),
        }
    }

    pub fn k(&self, n: usize) -> usize {
        self.l.as_ref().map_or(n, |l| l.ncols())
    }

    pub fn validate(&self, m: usize, n: usize) -> Result<()> {
        self.l_matrix(n)?;
        self.psi.check(m, n)?;
        self.beta.check(m, "beta")?;
        self.xi.check(self.k(n), "xi")
    }

    /// `(Ψ, β, ξ)` when all three are positive scalars.
    pub fn scalars(&self) -> Result<(f64, f64, f64)> {
        match (&self.psi, &self.beta, &self.xi) {
            (MatrixWeight::Scalar(p), VectorWeight::Scalar(b), VectorWeight::Scalar(x)) => {
                for (v, name) in [(p, "psi"), (b, "beta"), (x, "xi")] {
                    if !(*v > 0.0 && v.is_finite()) {
                        return Err(Error::InvalidParameter(format!("{name} must be positive, got {v}")));
                    }
                }
                Ok((*p, *b, *x))
            }
            _ => Err(Error::InvalidParameter(
                "closed 2-norm forms need scalar psi, beta and xi".into(),
            )),
        }
    }

    /// The weights that turn the ∞-norm form into the mixed condition
    /// number: `Ψ = A`, `β = b`, `ξ = ‖Lᵀx‖_∞`.
    pub fn mixed(a: &DMatrix<f64>, b: &DVector<f64>, lx_inf: f64, l: Option<DMatrix<f64>>) -> Self {
        Self {
            l,
            psi: MatrixWeight::Elementwise(a.clone()),
            beta: VectorWeight::Elementwise(b.clone()),
            xi: VectorWeight::Scalar(lx_inf),
            norm_mode: NormMode::Inf,
        }
    }
}
