//! Convex objectives the flows and actions are evaluated on.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// A convex objective with its minimizer at `xstar` and `f(xstar) = 0`.
///
/// Quadratics are stored pre-diagonalized: rotating coordinates does not
/// change the flow, so a diagonal Hessian loses no generality.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PotentialRepr", into = "PotentialRepr")]
pub enum Potential {
    /// `f(x) = ½ Σ λᵢ (xᵢ − x*ᵢ)²` with all `λᵢ > 0`.
    QuadraticDiagonal { eigenvalues: Vec<f64>, xstar: Vec<f64> },
    /// `f(x) = a (x − x*)^p` on the real line, `p` even.
    Polynomial1D { a: f64, p: u32, xstar: f64 },
    /// `f ≡ 0` in `dim` dimensions (the free particle).
    Zero { dim: usize },
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
enum PotentialRepr {
    Quadratic { eigenvalues: Vec<f64>, xstar: Option<Vec<f64>> },
    Polynomial { a: f64, p: u32, #[serde(default)] xstar: f64 },
    Zero { dim: usize },
}

impl TryFrom<PotentialRepr> for Potential {
    type Error = Error;

    fn try_from(r: PotentialRepr) -> Result<Self> {
        match r {
            PotentialRepr::Quadratic { eigenvalues, xstar } => {
                let xstar = xstar.unwrap_or_else(|| vec![0.0; eigenvalues.len()]);
                Potential::quadratic(eigenvalues, xstar)
            }
            PotentialRepr::Polynomial { a, p, xstar } => Potential::polynomial(a, p, xstar),
            PotentialRepr::Zero { dim } => Potential::zero(dim),
        }
    }
}

impl From<Potential> for PotentialRepr {
    fn from(p: Potential) -> Self {
        match p {
            Potential::QuadraticDiagonal { eigenvalues, xstar } => PotentialRepr::Quadratic {
                eigenvalues,
                xstar: Some(xstar),
            },
            Potential::Polynomial1D { a, p, xstar } => PotentialRepr::Polynomial { a, p, xstar },
            Potential::Zero { dim } => PotentialRepr::Zero { dim },
        }
    }
}

impl Potential {
    pub fn quadratic(eigenvalues: Vec<f64>, xstar: Vec<f64>) -> Result<Self> {
        if eigenvalues.is_empty() {
            return Err(invalid("quadratic potential needs at least one eigenvalue"));
        }
        if eigenvalues.len() != xstar.len() {
            return Err(Error::DimensionMismatch {
                expected: eigenvalues.len(),
                got: xstar.len(),
            });
        }
        if let Some(l) = eigenvalues.iter().find(|l| !(l.is_finite() && **l > 0.0)) {
            return Err(invalid(format!("eigenvalues must be positive and finite, got {l}")));
        }
        if xstar.iter().any(|x| !x.is_finite()) {
            return Err(invalid("minimizer must be finite"));
        }
        Ok(Potential::QuadraticDiagonal { eigenvalues, xstar })
    }

    /// One-dimensional `½ β x²`.
    pub fn scalar_quadratic(beta: f64) -> Result<Self> {
        Potential::quadratic(vec![beta], vec![0.0])
    }

    pub fn polynomial(a: f64, p: u32, xstar: f64) -> Result<Self> {
        if !(a.is_finite() && a > 0.0) {
            return Err(invalid(format!("polynomial coefficient must be positive, got {a}")));
        }
        if p < 2 || p % 2 != 0 {
            return Err(invalid(format!("polynomial degree must be even and >= 2, got {p}")));
        }
        if !xstar.is_finite() {
            return Err(invalid("minimizer must be finite"));
        }
        Ok(Potential::Polynomial1D { a, p, xstar })
    }

    pub fn zero(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(invalid("dimension must be positive"));
        }
        Ok(Potential::Zero { dim })
    }

    pub fn dim(&self) -> usize {
        match self {
            Potential::QuadraticDiagonal { eigenvalues, .. } => eigenvalues.len(),
            Potential::Polynomial1D { .. } => 1,
            Potential::Zero { dim } => *dim,
        }
    }

    pub fn minimizer(&self) -> Vec<f64> {
        match self {
            Potential::QuadraticDiagonal { xstar, .. } => xstar.clone(),
            Potential::Polynomial1D { xstar, .. } => vec![*xstar],
            Potential::Zero { dim } => vec![0.0; *dim],
        }
    }

    /// Quadratic (or free) potentials have a Hessian independent of position.
    pub fn is_quadratic(&self) -> bool {
        !matches!(self, Potential::Polynomial1D { .. })
    }

    fn check_dim(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: x.len(),
            });
        }
        Ok(())
    }

    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        self.check_dim(x)?;
        Ok(self.eval_unchecked(x))
    }

    pub fn grad(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_dim(x)?;
        let mut g = vec![0.0; x.len()];
        self.grad_into(x, &mut g);
        Ok(g)
    }

    /// Diagonal of the Hessian at `x` (the full Hessian is diagonal for every
    /// supported kind).
    pub fn hessian_diagonal(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_dim(x)?;
        let mut h = vec![0.0; x.len()];
        self.hessian_diag_into(x, &mut h);
        Ok(h)
    }

    pub(crate) fn eval_unchecked(&self, x: &[f64]) -> f64 {
        match self {
            Potential::QuadraticDiagonal { eigenvalues, xstar } => {
                0.5 * eigenvalues
                    .iter()
                    .zip(xstar)
                    .zip(x)
                    .map(|((l, s), xi)| l * (xi - s) * (xi - s))
                    .sum::<f64>()
            }
            Potential::Polynomial1D { a, p, xstar } => a * (x[0] - xstar).powi(*p as i32),
            Potential::Zero { .. } => 0.0,
        }
    }

    pub(crate) fn grad_into(&self, x: &[f64], out: &mut [f64]) {
        match self {
            Potential::QuadraticDiagonal { eigenvalues, xstar } => {
                for i in 0..x.len() {
                    out[i] = eigenvalues[i] * (x[i] - xstar[i]);
                }
            }
            Potential::Polynomial1D { a, p, xstar } => {
                out[0] = a * *p as f64 * (x[0] - xstar).powi(*p as i32 - 1);
            }
            Potential::Zero { .. } => out.iter_mut().for_each(|g| *g = 0.0),
        }
    }

    pub(crate) fn hessian_diag_into(&self, x: &[f64], out: &mut [f64]) {
        match self {
            Potential::QuadraticDiagonal { eigenvalues, .. } => out.copy_from_slice(eigenvalues),
            Potential::Polynomial1D { a, p, xstar } => {
                let pf = *p as f64;
                out[0] = a * pf * (pf - 1.0) * (x[0] - xstar).powi(*p as i32 - 2);
            }
            Potential::Zero { .. } => out.iter_mut().for_each(|h| *h = 0.0),
        }
    }

    /// Hessian eigenvalue range `(μ, β)`.
    pub fn curvature_bounds(&self) -> Result<(f64, f64)> {
        match self {
            Potential::QuadraticDiagonal { eigenvalues, .. } => {
                let mu = eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
                let beta = eigenvalues.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                Ok((mu, beta))
            }
            Potential::Zero { .. } => Ok((0.0, 0.0)),
            Potential::Polynomial1D { .. } => Err(Error::Unsupported(
                "polynomial curvature is unbounded; use curvature_bounds_on with an interval".into(),
            )),
        }
    }

    /// Curvature range over `[lo, hi]`. For polynomials `f''` is monotone in
    /// `|x − x*|`, so the extremes sit at the endpoints or at `x*`.
    pub fn curvature_bounds_on(&self, lo: f64, hi: f64) -> Result<(f64, f64)> {
        if !(hi >= lo) {
            return Err(invalid(format!("empty interval [{lo}, {hi}]")));
        }
        match self {
            Potential::Polynomial1D { xstar, .. } => {
                let f2 = |x: f64| {
                    let mut h = [0.0];
                    self.hessian_diag_into(&[x], &mut h);
                    h[0]
                };
                let (a, b) = (f2(lo), f2(hi));
                let max = a.max(b);
                let min = if lo <= *xstar && *xstar <= hi {
                    f2(*xstar)
                } else {
                    a.min(b)
                };
                Ok((min, max))
            }
            _ => self.curvature_bounds(),
        }
    }

    /// Distinct Hessian eigenvalues, used to decouple Jacobi's equation.
    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        match self {
            Potential::QuadraticDiagonal { eigenvalues, .. } => Ok(eigenvalues.clone()),
            Potential::Zero { dim } => Ok(vec![0.0; *dim]),
            Potential::Polynomial1D { .. } => Err(Error::Unsupported(
                "polynomial potentials have position-dependent curvature".into(),
            )),
        }
    }
}
