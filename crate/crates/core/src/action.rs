//! The action `J[Y] = ∫ w(t)(½‖Ẏ‖² − f(Y)) dt` and its variations.

use serde::{Deserialize, Serialize};

use crate::dynamics::{DampingSchedule, Trajectory};
use crate::error::{Error, Result};
use crate::perturbations::{align, Perturbation, PerturbationSpec};
use crate::potentials::Potential;
use crate::quadrature::{integrate_split, simpson_samples, DEFAULT_PANELS_PER_UNIT};

/// Largest endpoint value a perturbation may have.
pub const ADMISSIBILITY_TOLERANCE: f64 = 1e-12;

/// Lagrangian `w(t)(½‖Ẏ‖² − f(Y))` with `w = t^c` or `e^{αt}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LagrangianSpec {
    pub damping: DampingSchedule,
    #[serde(rename = "potential")]
    pub pot: Potential,
}

/// `P = L_ẎẎ` and `Qᵢ = L_YᵢYᵢ − d/dt L_YᵢẎᵢ` at one time.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PQCoefficients {
    pub p: f64,
    pub q: Vec<f64>,
}

/// A second variation together with what produced it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VariationReport {
    pub value: f64,
    pub t1: f64,
    pub t2: f64,
    pub perturbation: PerturbationSpec,
    pub spec: LagrangianSpec,
}

impl LagrangianSpec {
    pub fn new(damping: DampingSchedule, pot: Potential) -> Self {
        LagrangianSpec { damping, pot }
    }

    fn check_dim(&self, got: usize) -> Result<()> {
        if got != self.pot.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.pot.dim(),
                got,
            });
        }
        Ok(())
    }

    pub fn lagrangian(&self, y: &[f64], ydot: &[f64], t: f64) -> Result<f64> {
        self.check_dim(y.len())?;
        self.check_dim(ydot.len())?;
        self.damping.check_time(t)?;
        Ok(self.lagrangian_unchecked(y, ydot, t))
    }

    fn lagrangian_unchecked(&self, y: &[f64], ydot: &[f64], t: f64) -> f64 {
        let kinetic = 0.5 * ydot.iter().map(|v| v * v).sum::<f64>();
        self.damping.weight_unchecked(t) * (kinetic - self.pot.eval_unchecked(y))
    }

    fn check_curve(&self, curve: &Trajectory) -> Result<()> {
        self.check_dim(curve.dim())?;
        self.damping.check_time(curve.t1())
    }

    /// Simpson's rule on each uniform piece of the curve's grid.
    pub fn action(&self, curve: &Trajectory) -> Result<f64> {
        self.check_curve(curve)?;
        integrate_curve(curve, |i, t| {
            self.lagrangian_unchecked(curve.value(i), curve.deriv(i), t)
        })
    }

    /// `δJ[Y; h] = ∫ (L_Y·h + L_Ẏ·ḣ) dt`.
    pub fn first_variation(&self, curve: &Trajectory, h: &Perturbation) -> Result<f64> {
        self.check_curve(curve)?;
        check_admissible(h)?;
        let dir = h.direction(curve.dim())?;
        let grid = align(curve, h)?;
        let mut g = vec![0.0; grid.dim()];
        integrate_curve(&grid, |i, t| {
            let w = self.damping.weight_unchecked(t);
            let (hv, dh) = h.eval(t);
            self.pot.grad_into(grid.value(i), &mut g);
            let v = grid.deriv(i);
            (0..dir.len())
                .map(|k| w * (-g[k] * hv + v[k] * dh) * dir[k])
                .sum::<f64>()
        })
    }

    /// `P` and `Q` at `t`; position-independent, so quadratic potentials only.
    pub fn pq_coefficients(&self, t: f64) -> Result<PQCoefficients> {
        self.damping.check_time(t)?;
        let lambdas = self.curvatures()?;
        let w = self.damping.weight_unchecked(t);
        Ok(PQCoefficients {
            p: w,
            q: lambdas.iter().map(|l| -l * w).collect(),
        })
    }

    fn curvatures(&self) -> Result<Vec<f64>> {
        if !self.pot.is_quadratic() {
            return Err(Error::Unsupported(
                "curvature depends on position; evaluate along a base trajectory".into(),
            ));
        }
        self.pot.hessian_diagonal(&self.pot.minimizer())
    }

    /// `½∫(P‖ḣ‖² + Σ Qᵢhᵢ²) dt` for quadratic potentials, where no base curve
    /// is needed. Pieces are split at the knots of `h`.
    pub fn second_variation(&self, t1: f64, t2: f64, h: &Perturbation) -> Result<f64> {
        self.damping.check_time(t1)?;
        check_admissible(h)?;
        check_interval(h, t1, t2)?;
        let d = self.pot.dim();
        let dir = h.direction(d)?;
        let lambdas = self.curvatures()?;
        let dir2: f64 = dir.iter().map(|x| x * x).sum();
        let qdir: f64 = lambdas.iter().zip(&dir).map(|(l, x)| l * x * x).sum();
        let half = integrate_split(
            |t| {
                let w = self.damping.weight_unchecked(t);
                let (hv, dh) = h.eval(t);
                w * dh * dh * dir2 - w * qdir * hv * hv
            },
            t1,
            t2,
            &h.knots(),
            DEFAULT_PANELS_PER_UNIT,
        )?;
        Ok(0.5 * half)
    }

    /// `½∫(L_YY h² + 2 L_YẎ hḣ + L_ẎẎ ḣ²) dt` along `base`, with `L_YY`
    /// evaluated at the base positions. Works for every potential.
    pub fn second_variation_along(&self, base: &Trajectory, h: &Perturbation) -> Result<f64> {
        self.check_curve(base)?;
        check_admissible(h)?;
        let dir = h.direction(base.dim())?;
        let grid = align(base, h)?;
        let mut hess = vec![0.0; grid.dim()];
        let half = integrate_curve(&grid, |i, t| {
            let w = self.damping.weight_unchecked(t);
            let (hv, dh) = h.eval(t);
            self.pot.hessian_diag_into(grid.value(i), &mut hess);
            let l_yy: f64 = hess.iter().zip(&dir).map(|(f2, x)| -w * f2 * x * x).sum();
            let l_ydot_ydot = w * dir.iter().map(|x| x * x).sum::<f64>();
            let l_y_ydot = 0.0;
            l_yy * hv * hv + 2.0 * l_y_ydot * hv * dh + l_ydot_ydot * dh * dh
        })?;
        Ok(0.5 * half)
    }

    pub fn report(&self, t1: f64, t2: f64, h: &Perturbation) -> Result<VariationReport> {
        Ok(VariationReport {
            value: self.second_variation(t1, t2, h)?,
            t1,
            t2,
            perturbation: h.spec().clone(),
            spec: self.clone(),
        })
    }
}

fn check_admissible(h: &Perturbation) -> Result<()> {
    let (a, b) = h.endpoint_values();
    if a.abs() > ADMISSIBILITY_TOLERANCE || b.abs() > ADMISSIBILITY_TOLERANCE {
        return Err(Error::NotAdmissible(format!(
            "h(t1) = {a}, h(t2) = {b}"
        )));
    }
    Ok(())
}

fn check_interval(h: &Perturbation, t1: f64, t2: f64) -> Result<()> {
    let (a, b) = h.interval();
    let tol = 1e-12 * (t2 - t1).max(t1.abs()).max(t2.abs());
    if (a - t1).abs() > tol || (b - t2).abs() > tol {
        return Err(Error::NotAdmissible(format!(
            "perturbation lives on [{a}, {b}], not [{t1}, {t2}]"
        )));
    }
    Ok(())
}

/// Simpson's rule of `f(i, t_i)` over every uniform piece of `curve`.
pub(crate) fn integrate_curve<F: FnMut(usize, f64) -> f64>(curve: &Trajectory, mut f: F) -> Result<f64> {
    let times = curve.times();
    let mut total = 0.0;
    for (a, b) in curve.segments() {
        if (b - a) % 2 != 0 {
            return Err(Error::Grid(format!(
                "Simpson's rule needs an even number of intervals, piece [{}, {}] has {}",
                times[a],
                times[b],
                b - a
            )));
        }
        let samples: Vec<f64> = (a..=b).map(|i| f(i, times[i])).collect();
        total += simpson_samples(&samples, (times[b] - times[a]) / (b - a) as f64)?;
    }
    Ok(total)
}
