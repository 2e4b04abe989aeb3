//! Accelerated flows, their sampled trajectories, and the Bregman family.

use std::fmt;
use std::io::{self, Write};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::ode;
use crate::potentials::Potential;
use crate::quadrature::Piece;

/// Relative tolerance on grid uniformity.
pub const GRID_TOLERANCE: f64 = 1e-12;
/// Tolerance on `α = 2√β` for the critical regime.
pub const CRITICAL_TOLERANCE: f64 = 1e-12;
/// Step of the centered difference used for schedules without a derivative.
pub const SCHEDULE_FD_STEP: f64 = 1e-6;
/// Slack allowed in the ideal-scaling comparisons.
pub const IDEAL_SCALING_TOLERANCE: f64 = 1e-9;

fn default_c() -> f64 {
    3.0
}

/// Friction applied to the velocity: `c/t` or a constant `α`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "DampingRepr", into = "DampingRepr")]
pub enum DampingSchedule {
    Vanishing { c: f64 },
    Constant { alpha: f64 },
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
enum DampingRepr {
    Vanishing {
        #[serde(default = "default_c")]
        c: f64,
    },
    Constant {
        alpha: f64,
    },
}

impl TryFrom<DampingRepr> for DampingSchedule {
    type Error = Error;

    fn try_from(r: DampingRepr) -> Result<Self> {
        match r {
            DampingRepr::Vanishing { c } => DampingSchedule::vanishing(c),
            DampingRepr::Constant { alpha } => DampingSchedule::constant(alpha),
        }
    }
}

impl From<DampingSchedule> for DampingRepr {
    fn from(d: DampingSchedule) -> Self {
        match d {
            DampingSchedule::Vanishing { c } => DampingRepr::Vanishing { c },
            DampingSchedule::Constant { alpha } => DampingRepr::Constant { alpha },
        }
    }
}

/// Position of a constant damping relative to `2√β`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    Underdamped,
    Critical,
    Overdamped,
}

impl DampingSchedule {
    pub fn vanishing(c: f64) -> Result<Self> {
        if !(c.is_finite() && c >= 0.0) {
            return Err(invalid(format!("vanishing damping needs c >= 0, got {c}")));
        }
        Ok(DampingSchedule::Vanishing { c })
    }

    pub fn constant(alpha: f64) -> Result<Self> {
        if !(alpha.is_finite() && alpha >= 0.0) {
            return Err(invalid(format!("constant damping needs alpha >= 0, got {alpha}")));
        }
        Ok(DampingSchedule::Constant { alpha })
    }

    /// The `3/t` schedule.
    pub fn nesterov() -> Self {
        DampingSchedule::Vanishing { c: 3.0 }
    }

    pub fn is_vanishing(&self) -> bool {
        matches!(self, DampingSchedule::Vanishing { .. })
    }

    pub fn check_time(&self, t: f64) -> Result<()> {
        if !t.is_finite() {
            return Err(Error::NonFinite(t));
        }
        if self.is_vanishing() && t <= 0.0 {
            return Err(Error::SingularTime(t));
        }
        Ok(())
    }

    /// `d(t)`, which is also `ẇ/w` for the Lagrangian weight `w`.
    pub fn coefficient(&self, t: f64) -> Result<f64> {
        self.check_time(t)?;
        Ok(self.coefficient_unchecked(t))
    }

    pub(crate) fn coefficient_unchecked(&self, t: f64) -> f64 {
        match *self {
            DampingSchedule::Vanishing { c } => c / t,
            DampingSchedule::Constant { alpha } => alpha,
        }
    }

    /// Lagrangian time weight `t^c` or `e^{αt}`.
    pub fn weight(&self, t: f64) -> Result<f64> {
        self.check_time(t)?;
        Ok(self.weight_unchecked(t))
    }

    pub(crate) fn weight_unchecked(&self, t: f64) -> f64 {
        match *self {
            DampingSchedule::Vanishing { c } => t.powf(c),
            DampingSchedule::Constant { alpha } => (alpha * t).exp(),
        }
    }

    /// Regime against curvature `beta`; `None` for vanishing damping.
    pub fn regime(&self, beta: f64) -> Option<Regime> {
        match *self {
            DampingSchedule::Vanishing { .. } => None,
            DampingSchedule::Constant { alpha } => Some(classify_regime(alpha, beta)),
        }
    }
}

pub fn classify_regime(alpha: f64, beta: f64) -> Regime {
    let threshold = 2.0 * beta.sqrt();
    if (alpha - threshold).abs() <= CRITICAL_TOLERANCE * threshold.max(1.0) {
        Regime::Critical
    } else if alpha < threshold {
        Regime::Underdamped
    } else {
        Regime::Overdamped
    }
}

/// A C¹ curve sampled with its derivative on a piecewise-uniform grid.
///
/// Most trajectories have a single uniform piece. Resampling onto the knots
/// of a perturbation splits the grid; every piece keeps an even number of
/// intervals so Simpson's rule applies piece by piece.
#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    dim: usize,
    times: Vec<f64>,
    values: Vec<f64>,
    derivs: Vec<f64>,
    breaks: Vec<usize>,
}

impl Trajectory {
    /// Wraps samples on a uniform grid.
    pub fn new(dim: usize, times: Vec<f64>, values: Vec<f64>, derivs: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(invalid("dimension must be positive"));
        }
        let n = times.len();
        if n < 3 {
            return Err(Error::Grid(format!("need at least 3 grid points, got {n}")));
        }
        for (len, what) in [(values.len(), "values"), (derivs.len(), "derivs")] {
            if len != n * dim {
                return Err(Error::Grid(format!(
                    "{what} has {len} entries, expected {}",
                    n * dim
                )));
            }
        }
        let (t1, t2) = (times[0], times[n - 1]);
        if !(t2 > t1) || times.iter().any(|t| !t.is_finite()) {
            return Err(Error::Grid("times must be finite and increasing".into()));
        }
        let h = (t2 - t1) / (n - 1) as f64;
        let tol = GRID_TOLERANCE * (t2 - t1).max(t1.abs()).max(t2.abs());
        for (i, t) in times.iter().enumerate() {
            if (t - (t1 + h * i as f64)).abs() > tol {
                return Err(Error::Grid(format!("grid is not uniform at index {i}")));
            }
        }
        Ok(Trajectory {
            dim,
            times,
            values,
            derivs,
            breaks: vec![0, n - 1],
        })
    }

    /// Samples `f(t, x, v)` on the nodes of consecutive pieces.
    pub fn from_pieces<F>(dim: usize, pieces: &[Piece], mut f: F) -> Result<Self>
    where
        F: FnMut(f64, &mut [f64], &mut [f64]),
    {
        if dim == 0 {
            return Err(invalid("dimension must be positive"));
        }
        if pieces.is_empty() {
            return Err(Error::Grid("no pieces".into()));
        }
        for w in pieces.windows(2) {
            if w[0].b != w[1].a {
                return Err(Error::Grid("pieces are not contiguous".into()));
            }
        }
        let total: usize = pieces.iter().map(|p| p.n).sum::<usize>() + 1;
        let mut times = Vec::with_capacity(total);
        let mut values = vec![0.0; total * dim];
        let mut derivs = vec![0.0; total * dim];
        let mut breaks = vec![0];
        for p in pieces {
            if p.n < 2 || !(p.b > p.a) {
                return Err(Error::Grid(format!("degenerate piece [{}, {}]", p.a, p.b)));
            }
            let start = if times.is_empty() { 0 } else { 1 };
            for i in start..=p.n {
                times.push(p.node(i));
            }
            breaks.push(times.len() - 1);
        }
        for (i, &t) in times.iter().enumerate() {
            let r = i * dim..(i + 1) * dim;
            let (x, v) = (&mut values[r.clone()], &mut derivs[r]);
            f(t, x, v);
        }
        Ok(Trajectory {
            dim,
            times,
            values,
            derivs,
            breaks,
        })
    }

    /// Grid points `from..=to` of a single-piece trajectory.
    pub fn window(&self, from: usize, to: usize) -> Result<Self> {
        if self.breaks.len() != 2 {
            return Err(Error::Grid("window of a piecewise grid".into()));
        }
        if !(from < to && to < self.len()) {
            return Err(Error::Grid(format!(
                "window {from}..={to} outside 0..{}",
                self.len()
            )));
        }
        let d = self.dim;
        Trajectory::new(
            d,
            self.times[from..=to].to_vec(),
            self.values[from * d..(to + 1) * d].to_vec(),
            self.derivs[from * d..(to + 1) * d].to_vec(),
        )
    }

    /// Samples `f` on the uniform grid of `n` intervals over `[t1, t2]`.
    pub fn sample<F>(dim: usize, t1: f64, t2: f64, n: usize, f: F) -> Result<Self>
    where
        F: FnMut(f64, &mut [f64], &mut [f64]),
    {
        if !(t2 > t1) {
            return Err(invalid(format!("empty interval [{t1}, {t2}]")));
        }
        Trajectory::from_pieces(dim, &[Piece { a: t1, b: t2, n }], f)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of grid points.
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn t1(&self) -> f64 {
        self.times[0]
    }

    pub fn t2(&self) -> f64 {
        self.times[self.times.len() - 1]
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn value(&self, i: usize) -> &[f64] {
        &self.values[i * self.dim..(i + 1) * self.dim]
    }

    pub fn deriv(&self, i: usize) -> &[f64] {
        &self.derivs[i * self.dim..(i + 1) * self.dim]
    }

    /// Grid index ranges `(start, end)` of the uniform pieces, inclusive.
    pub fn segments(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.breaks.windows(2).map(|w| (w[0], w[1]))
    }

    /// Spacing of a single-piece grid.
    pub fn step(&self) -> Option<f64> {
        (self.breaks.len() == 2).then(|| (self.t2() - self.t1()) / (self.len() - 1) as f64)
    }

    pub fn max_step(&self) -> f64 {
        self.segments()
            .map(|(a, b)| (self.times[b] - self.times[a]) / (b - a) as f64)
            .fold(0.0, f64::max)
    }

    /// Interior nodes where the grid spacing changes.
    pub fn knots(&self) -> Vec<f64> {
        self.breaks[1..self.breaks.len() - 1]
            .iter()
            .map(|&i| self.times[i])
            .collect()
    }

    /// Cubic Hermite interpolation of value and derivative at `t`.
    pub fn interpolate(&self, t: f64) -> Result<(Vec<f64>, Vec<f64>)> {
        let mut x = vec![0.0; self.dim];
        let mut v = vec![0.0; self.dim];
        self.interpolate_into(t, &mut x, &mut v)?;
        Ok((x, v))
    }

    pub(crate) fn interpolate_into(&self, t: f64, x: &mut [f64], v: &mut [f64]) -> Result<()> {
        let n = self.len();
        if !(t >= self.t1() && t <= self.t2()) {
            return Err(invalid(format!(
                "t = {t} outside [{}, {}]",
                self.t1(),
                self.t2()
            )));
        }
        let j = self.times.partition_point(|&s| s <= t);
        if j >= 1 && self.times[j - 1] == t {
            x.copy_from_slice(self.value(j - 1));
            v.copy_from_slice(self.deriv(j - 1));
            return Ok(());
        }
        let i = j.clamp(1, n - 1) - 1;
        let (ta, tb) = (self.times[i], self.times[i + 1]);
        let h = tb - ta;
        let s = (t - ta) / h;
        let (s2, s3) = (s * s, s * s * s);
        let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
        let h10 = s3 - 2.0 * s2 + s;
        let h01 = -2.0 * s3 + 3.0 * s2;
        let h11 = s3 - s2;
        let d00 = 6.0 * s2 - 6.0 * s;
        let d10 = 3.0 * s2 - 4.0 * s + 1.0;
        let d11 = 3.0 * s2 - 2.0 * s;
        let (xa, xb, va, vb) = (self.value(i), self.value(i + 1), self.deriv(i), self.deriv(i + 1));
        for k in 0..self.dim {
            x[k] = h00 * xa[k] + h10 * h * va[k] + h01 * xb[k] + h11 * h * vb[k];
            v[k] = d00 * (xa[k] - xb[k]) / h + d10 * va[k] + d11 * vb[k];
        }
        Ok(())
    }

    /// CSV with header `t,x_0..,v_0..` and 17 significant digits.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        let mut header = String::from("t");
        for k in 0..self.dim {
            header.push_str(&format!(",x_{k}"));
        }
        for k in 0..self.dim {
            header.push_str(&format!(",v_{k}"));
        }
        writeln!(w, "{header}")?;
        for i in 0..self.len() {
            write!(w, "{:.16e}", self.times[i])?;
            for x in self.value(i) {
                write!(w, ",{x:.16e}")?;
            }
            for v in self.deriv(i) {
                write!(w, ",{v:.16e}")?;
            }
            writeln!(w)?;
        }
        Ok(())
    }

    pub fn to_csv(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("CSV is ASCII")
    }
}

/// `½‖Ẋ‖² + f(X)` at every grid point.
pub fn energy(traj: &Trajectory, pot: &Potential) -> Result<Vec<f64>> {
    check_dim(pot, traj.dim())?;
    Ok((0..traj.len())
        .map(|i| {
            let v = traj.deriv(i);
            0.5 * v.iter().map(|x| x * x).sum::<f64>() + pot.eval_unchecked(traj.value(i))
        })
        .collect())
}

fn check_dim(pot: &Potential, got: usize) -> Result<()> {
    if pot.dim() != got {
        return Err(Error::DimensionMismatch {
            expected: pot.dim(),
            got,
        });
    }
    Ok(())
}

fn check_run(pot: &Potential, x0: &[f64], v0: &[f64], t1: f64, t2: f64, n: usize) -> Result<()> {
    check_dim(pot, x0.len())?;
    check_dim(pot, v0.len())?;
    if !(t1.is_finite() && t2.is_finite() && t1 < t2) {
        return Err(invalid(format!("need t1 < t2, got [{t1}, {t2}]")));
    }
    if n < 2 {
        return Err(invalid(format!("n_steps must be >= 2, got {n}")));
    }
    if x0.iter().chain(v0).any(|x| !x.is_finite()) {
        return Err(invalid("initial state must be finite"));
    }
    Ok(())
}

fn phase_space_trajectory(d: usize, times: Vec<f64>, states: Vec<f64>) -> Result<Trajectory> {
    let n = times.len();
    let mut values = Vec::with_capacity(n * d);
    let mut derivs = Vec::with_capacity(n * d);
    for row in states.chunks_exact(2 * d) {
        values.extend_from_slice(&row[..d]);
        derivs.extend_from_slice(&row[d..]);
    }
    Trajectory::new(d, times, values, derivs)
}

/// RK4 on `Ẋ = V`, `V̇ = −d(t)V − ∇f(X)`.
pub fn integrate_flow(
    pot: &Potential,
    damping: DampingSchedule,
    x0: &[f64],
    v0: &[f64],
    t1: f64,
    t2: f64,
    n_steps: usize,
) -> Result<Trajectory> {
    check_run(pot, x0, v0, t1, t2, n_steps)?;
    damping.check_time(t1)?;
    let d = pot.dim();
    let sys = (2 * d, |t: f64, y: &[f64], out: &mut [f64]| {
        let (dx, dv) = out.split_at_mut(d);
        dx.copy_from_slice(&y[d..]);
        pot.grad_into(&y[..d], dv);
        let k = damping.coefficient_unchecked(t);
        for i in 0..d {
            dv[i] = -k * y[d + i] - dv[i];
        }
    });
    let y0: Vec<f64> = x0.iter().chain(v0).copied().collect();
    let (times, states) = ode::integrate(&sys, &y0, t1, t2, n_steps)?;
    phase_space_trajectory(d, times, states)
}

/// RK4 on the gradient flow `Ẋ = −∇f(X)`.
pub fn integrate_gradient_flow(
    pot: &Potential,
    x0: &[f64],
    t1: f64,
    t2: f64,
    n_steps: usize,
) -> Result<Trajectory> {
    check_run(pot, x0, x0, t1, t2, n_steps)?;
    let d = pot.dim();
    let sys = (d, |_t: f64, y: &[f64], out: &mut [f64]| {
        pot.grad_into(y, out);
        out.iter_mut().for_each(|g| *g = -*g);
    });
    let (times, values) = ode::integrate(&sys, x0, t1, t2, n_steps)?;
    let mut derivs = vec![0.0; values.len()];
    for (x, v) in values.chunks_exact(d).zip(derivs.chunks_exact_mut(d)) {
        pot.grad_into(x, v);
        v.iter_mut().for_each(|g| *g = -*g);
    }
    Trajectory::new(d, times, values, derivs)
}

/// Exact `(y, ẏ)` at elapsed time `s` for `ÿ + αẏ + λy = 0`.
pub fn damped_oscillator(lambda: f64, alpha: f64, y0: f64, v0: f64, s: f64) -> (f64, f64) {
    let disc = alpha * alpha - 4.0 * lambda;
    let scale = (alpha * alpha).max(4.0 * lambda);
    if disc.abs() <= CRITICAL_TOLERANCE * scale {
        let r = -0.5 * alpha;
        let b = v0 - r * y0;
        let e = (r * s).exp();
        ((y0 + b * s) * e, (b + r * (y0 + b * s)) * e)
    } else if disc > 0.0 {
        let root = disc.sqrt();
        let (r1, r2) = (0.5 * (-alpha + root), 0.5 * (-alpha - root));
        let c1 = (v0 - r2 * y0) / (r1 - r2);
        let c2 = y0 - c1;
        let (e1, e2) = ((r1 * s).exp(), (r2 * s).exp());
        (c1 * e1 + c2 * e2, r1 * c1 * e1 + r2 * c2 * e2)
    } else {
        let w = 0.5 * (-disc).sqrt();
        let a = y0;
        let b = (v0 + 0.5 * alpha * a) / w;
        let e = (-0.5 * alpha * s).exp();
        let (sn, cs) = (w * s).sin_cos();
        let y = e * (a * cs + b * sn);
        let dy = e * ((b * w - 0.5 * alpha * a) * cs - (a * w + 0.5 * alpha * b) * sn);
        (y, dy)
    }
}

/// Closed-form constant-damping flow on a quadratic (or free) potential.
pub fn constant_damping_exact(
    pot: &Potential,
    alpha: f64,
    x0: &[f64],
    v0: &[f64],
    t1: f64,
    t: f64,
) -> Result<(Vec<f64>, Vec<f64>)> {
    check_dim(pot, x0.len())?;
    check_dim(pot, v0.len())?;
    if !pot.is_quadratic() {
        return Err(Error::Unsupported(
            "closed form exists only for quadratic potentials".into(),
        ));
    }
    let xstar = pot.minimizer();
    let lambdas = pot.hessian_diagonal(&xstar)?;
    let mut x = vec![0.0; x0.len()];
    let mut v = vec![0.0; x0.len()];
    for i in 0..x0.len() {
        let (y, dy) = damped_oscillator(lambdas[i], alpha, x0[i] - xstar[i], v0[i], t - t1);
        x[i] = xstar[i] + y;
        v[i] = dy;
    }
    Ok((x, v))
}

/// Max over interior grid points of `‖Ẍ + d(t)Ẋ + ∇f(X)‖`, with `Ẍ` a
/// centered difference of the stored derivatives.
pub fn el_residual(traj: &Trajectory, pot: &Potential, damping: DampingSchedule) -> Result<f64> {
    check_dim(pot, traj.dim())?;
    if traj.len() < 4 {
        return Err(Error::Grid(format!(
            "residual needs at least 4 points, got {}",
            traj.len()
        )));
    }
    damping.check_time(traj.t1())?;
    let d = traj.dim();
    let mut g = vec![0.0; d];
    let mut worst: f64 = 0.0;
    for (a, b) in traj.segments() {
        for i in a + 1..b {
            let h2 = traj.times[i + 1] - traj.times[i - 1];
            let k = damping.coefficient_unchecked(traj.times[i]);
            pot.grad_into(traj.value(i), &mut g);
            let (vm, v, vp) = (traj.deriv(i - 1), traj.deriv(i), traj.deriv(i + 1));
            let norm = (0..d)
                .map(|j| {
                    let r = (vp[j] - vm[j]) / h2 + k * v[j] + g[j];
                    r * r
                })
                .sum::<f64>()
                .sqrt();
            worst = worst.max(norm);
        }
    }
    Ok(worst)
}

pub type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A scalar schedule of time, optionally with its derivative.
#[derive(Clone)]
pub struct Schedule {
    f: ScalarFn,
    df: Option<ScalarFn>,
}

impl fmt::Debug for Schedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Schedule")
            .field("analytic_derivative", &self.df.is_some())
            .finish()
    }
}

impl Schedule {
    pub fn new(f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Schedule {
            f: Arc::new(f),
            df: None,
        }
    }

    pub fn with_derivative(
        f: impl Fn(f64) -> f64 + Send + Sync + 'static,
        df: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Schedule {
            f: Arc::new(f),
            df: Some(Arc::new(df)),
        }
    }

    pub fn value(&self, t: f64) -> f64 {
        (self.f)(t)
    }

    pub fn derivative(&self, t: f64) -> f64 {
        match &self.df {
            Some(df) => df(t),
            None => {
                let s = SCHEDULE_FD_STEP;
                ((self.f)(t + s) - (self.f)(t - s)) / (2.0 * s)
            }
        }
    }

    fn checked(&self, t: f64, name: &str) -> Result<(f64, f64)> {
        let (v, dv) = (self.value(t), self.derivative(t));
        if !(v.is_finite() && dv.is_finite()) {
            return Err(invalid(format!("{name}(t) is not defined at t = {t}")));
        }
        Ok((v, dv))
    }
}

/// Distance-generating function of the Bregman divergence.
#[derive(Clone, Debug, PartialEq)]
pub enum Geometry {
    /// `ψ(x) = ½‖x‖²`.
    Euclidean,
    /// Any other ψ, identified by name. Integration refuses it.
    Other(String),
}

/// Schedules `α, β, γ` and geometry `ψ` of the Bregman Lagrangian.
#[derive(Clone, Debug)]
pub struct BregmanParams {
    pub alpha: Schedule,
    pub beta: Schedule,
    pub gamma: Schedule,
    pub psi: Geometry,
}

impl BregmanParams {
    pub fn euclidean(alpha: Schedule, beta: Schedule, gamma: Schedule) -> Self {
        BregmanParams {
            alpha,
            beta,
            gamma,
            psi: Geometry::Euclidean,
        }
    }

    /// `α = log(p/t)`, `β = p log t + log C`, `γ = p log t`.
    ///
    /// Gives `Ẍ + ((p+1)/t)Ẋ + C p² t^{p−2} ∇f = 0`; `p = 2, C = 1/4` is the
    /// `3/t` flow.
    pub fn polynomial(p: f64, scale: f64) -> Result<Self> {
        if !(p.is_finite() && p > 0.0) {
            return Err(invalid(format!("p must be positive, got {p}")));
        }
        if !(scale.is_finite() && scale > 0.0) {
            return Err(invalid(format!("scale must be positive, got {scale}")));
        }
        let log_scale = scale.ln();
        Ok(BregmanParams::euclidean(
            Schedule::with_derivative(move |t| (p / t).ln(), |t| -1.0 / t),
            Schedule::with_derivative(move |t| p * t.ln() + log_scale, move |t| p / t),
            Schedule::with_derivative(move |t| p * t.ln(), move |t| p / t),
        ))
    }

    /// The member of the polynomial family equal to the `3/t` flow.
    pub fn nesterov() -> Self {
        BregmanParams::polynomial(2.0, 0.25).expect("constants are valid")
    }
}

/// RK4 on `Ẍ + (e^α − α̇)Ẋ + e^{2α+β}∇f(X) = 0` (Euclidean ψ).
pub fn integrate_bregman_flow(
    params: &BregmanParams,
    pot: &Potential,
    x0: &[f64],
    v0: &[f64],
    t1: f64,
    t2: f64,
    n_steps: usize,
) -> Result<Trajectory> {
    if let Geometry::Other(name) = &params.psi {
        return Err(Error::Unsupported(format!(
            "Bregman dynamics are implemented for Euclidean psi only, got {name}"
        )));
    }
    check_run(pot, x0, v0, t1, t2, n_steps)?;
    // RK4 samples the coefficients at whole and half steps only.
    let half = 0.5 * (t2 - t1) / n_steps as f64;
    let mut friction = Vec::with_capacity(2 * n_steps + 1);
    let mut force = Vec::with_capacity(2 * n_steps + 1);
    for j in 0..=2 * n_steps {
        let t = if j == 2 * n_steps { t2 } else { t1 + half * j as f64 };
        let (a, da) = params.alpha.checked(t, "alpha")?;
        let b = params.beta.value(t);
        if !b.is_finite() {
            return Err(invalid(format!("beta(t) is not defined at t = {t}")));
        }
        let ea = a.exp();
        friction.push(ea - da);
        force.push((2.0 * a + b).exp());
    }
    let d = pot.dim();
    let sys = (2 * d, |t: f64, y: &[f64], out: &mut [f64]| {
        let j = (((t - t1) / half).round() as usize).min(2 * n_steps);
        let (dx, dv) = out.split_at_mut(d);
        dx.copy_from_slice(&y[d..]);
        pot.grad_into(&y[..d], dv);
        for i in 0..d {
            dv[i] = -friction[j] * y[d + i] - force[j] * dv[i];
        }
    });
    let y0: Vec<f64> = x0.iter().chain(v0).copied().collect();
    let (times, states) = ode::integrate(&sys, &y0, t1, t2, n_steps)?;
    phase_space_trajectory(d, times, states)
}

/// Outcome of sampling `β̇ ≤ e^α` and `γ̇ = e^α`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IdealScaling {
    pub holds: bool,
    pub beta_condition: bool,
    pub gamma_condition: bool,
    pub max_violation: f64,
}

pub fn check_ideal_scaling(params: &BregmanParams, grid: &[f64]) -> Result<IdealScaling> {
    if grid.is_empty() {
        return Err(Error::Grid("empty grid".into()));
    }
    let mut beta_excess: f64 = 0.0;
    let mut gamma_gap: f64 = 0.0;
    for &t in grid {
        let (a, _) = params.alpha.checked(t, "alpha")?;
        let (_, db) = params.beta.checked(t, "beta")?;
        let (_, dg) = params.gamma.checked(t, "gamma")?;
        let ea = a.exp();
        beta_excess = beta_excess.max(db - ea);
        gamma_gap = gamma_gap.max((dg - ea).abs());
    }
    let beta_condition = beta_excess <= IDEAL_SCALING_TOLERANCE;
    let gamma_condition = gamma_gap <= IDEAL_SCALING_TOLERANCE;
    Ok(IdealScaling {
        holds: beta_condition && gamma_condition,
        beta_condition,
        gamma_condition,
        max_violation: beta_excess.max(0.0).max(gamma_gap),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn unit() -> Potential {
        Potential::scalar_quadratic(1.0).unwrap()
    }

    #[test]
    fn window_keeps_samples() {
        let traj = integrate_flow(&unit(), DampingSchedule::nesterov(), &[1.0], &[0.0], 1.0, 2.0, 100).unwrap();
        let w = traj.window(10, 50).unwrap();
        assert_eq!(w.len(), 41);
        assert_eq!(w.t1(), traj.times()[10]);
        assert_eq!(w.value(40), traj.value(50));
        assert!(traj.window(50, 10).is_err());
        assert!(traj.window(0, 101).is_err());
    }

    #[test]
    fn damping_json_forms() {
        let d: DampingSchedule = serde_json::from_str(r#"{"kind":"vanishing"}"#).unwrap();
        assert_eq!(d, DampingSchedule::nesterov());
        let d: DampingSchedule =
            serde_json::from_str(r#"{"kind":"constant","alpha":2.5}"#).unwrap();
        assert_eq!(d, DampingSchedule::Constant { alpha: 2.5 });
        assert!(serde_json::from_str::<DampingSchedule>(r#"{"kind":"constant","alpha":-1}"#).is_err());
        assert!(serde_json::from_str::<DampingSchedule>(r#"{"kind":"constant","alpha":1,"x":0}"#).is_err());
        let s = serde_json::to_string(&DampingSchedule::nesterov()).unwrap();
        assert_eq!(s, r#"{"kind":"vanishing","c":3.0}"#);
    }

    #[test]
    fn regimes() {
        assert_eq!(classify_regime(2.0, 1.0), Regime::Critical);
        assert_eq!(classify_regime(1.0, 1.0), Regime::Underdamped);
        assert_eq!(classify_regime(3.0, 1.0), Regime::Overdamped);
        assert_eq!(classify_regime(2.0 * 7f64.sqrt(), 7.0), Regime::Critical);
        assert_eq!(DampingSchedule::nesterov().regime(1.0), None);
    }

    #[test]
    fn vanishing_rejects_nonpositive_start() {
        let r = integrate_flow(&unit(), DampingSchedule::nesterov(), &[1.0], &[0.0], 0.0, 1.0, 10);
        assert_eq!(r, Err(Error::SingularTime(0.0)));
    }

    #[test]
    fn critical_damping_matches_exponential() {
        let d = DampingSchedule::constant(2.0).unwrap();
        let traj = integrate_flow(&unit(), d, &[1.0], &[-1.0], 0.0, 5.0, 5000).unwrap();
        assert_eq!(traj.len(), 5001);
        let err = traj
            .times()
            .iter()
            .enumerate()
            .map(|(i, t)| (traj.value(i)[0] - (-t).exp()).abs())
            .fold(0.0, f64::max);
        assert!(err <= 1e-8, "{err}");
    }

    fn rk4_error(n: usize) -> f64 {
        let d = DampingSchedule::constant(2.0).unwrap();
        let traj = integrate_flow(&unit(), d, &[1.0], &[0.5], 0.0, 5.0, n).unwrap();
        (0..traj.len())
            .map(|i| {
                let (y, _) = damped_oscillator(1.0, 2.0, 1.0, 0.5, traj.times()[i]);
                (traj.value(i)[0] - y).abs()
            })
            .fold(0.0, f64::max)
    }

    #[test]
    fn rk4_fourth_order() {
        let ratio = rk4_error(100) / rk4_error(200);
        assert!((12.0..=20.0).contains(&ratio), "{ratio}");
    }

    #[test]
    fn oscillator_closed_form_satisfies_ode() {
        for (lambda, alpha) in [(1.0, 1.0), (1.0, 3.0), (4.0, 4.0), (0.0, 1.0), (0.0, 0.0)] {
            let (y0, v0) = (0.7, -0.3);
            let (y, v) = damped_oscillator(lambda, alpha, y0, v0, 0.0);
            assert!((y - y0).abs() < 1e-14 && (v - v0).abs() < 1e-14);
            let s = 1.3;
            let e = 1e-4;
            let (ym, vm) = damped_oscillator(lambda, alpha, y0, v0, s - e);
            let (y, v) = damped_oscillator(lambda, alpha, y0, v0, s);
            let (yp, vp) = damped_oscillator(lambda, alpha, y0, v0, s + e);
            assert!(((yp - ym) / (2.0 * e) - v).abs() < 1e-7);
            let acc = (vp - vm) / (2.0 * e);
            assert!((acc + alpha * v + lambda * y).abs() < 1e-7, "{lambda} {alpha}");
        }
    }

    #[test]
    fn agd_rate_bounded() {
        let traj = integrate_flow(&unit(), DampingSchedule::nesterov(), &[1.0], &[0.0], 0.01, 20.0, 8000)
            .unwrap();
        let worst = (0..traj.len())
            .filter(|&i| traj.times()[i] >= 1.0)
            .map(|i| {
                let t = traj.times()[i];
                t * t * 0.5 * traj.value(i)[0].powi(2)
            })
            .fold(0.0, f64::max);
        assert!(worst <= 8.0, "{worst}");
    }

    fn residual(n: usize) -> f64 {
        // The path started at rest from x = 1 at t = 0.01, followed from t = 1.
        let head = integrate_flow(&unit(), DampingSchedule::nesterov(), &[1.0], &[0.0], 0.01, 1.0, 2000)
            .unwrap();
        let last = head.len() - 1;
        let (x1, v1) = (head.value(last).to_vec(), head.deriv(last).to_vec());
        let traj = integrate_flow(&unit(), DampingSchedule::nesterov(), &x1, &v1, 1.0, 10.0, n).unwrap();
        el_residual(&traj, &unit(), DampingSchedule::nesterov()).unwrap()
    }

    #[test]
    fn residual_small_and_second_order() {
        let (r1, r2) = (residual(4000), residual(8000));
        assert!(r1 <= 1e-5, "{r1}");
        assert!(r1 / r2 >= 3.5, "{}", r1 / r2);
    }

    #[test]
    fn residual_of_equilibrium_is_zero() {
        let pot = Potential::quadratic(vec![1.0, 3.0], vec![0.5, -2.0]).unwrap();
        let traj = integrate_flow(
            &pot,
            DampingSchedule::nesterov(),
            &[0.5, -2.0],
            &[0.0, 0.0],
            0.5,
            3.0,
            50,
        )
        .unwrap();
        assert!(el_residual(&traj, &pot, DampingSchedule::nesterov()).unwrap() < 1e-14);
        for i in 0..traj.len() {
            assert_eq!(traj.value(i), &[0.5, -2.0]);
        }
    }

    #[test]
    fn derivs_consistent_with_values() {
        let err = |n: usize| {
            let traj = integrate_flow(&unit(), DampingSchedule::nesterov(), &[1.0], &[0.0], 1.0, 5.0, n)
                .unwrap();
            (1..traj.len() - 1)
                .map(|i| {
                    let h2 = traj.times()[i + 1] - traj.times()[i - 1];
                    ((traj.value(i + 1)[0] - traj.value(i - 1)[0]) / h2 - traj.deriv(i)[0]).abs()
                })
                .fold(0.0, f64::max)
        };
        let ratio = err(200) / err(400);
        assert!((3.5..=4.5).contains(&ratio), "{ratio}");
    }

    #[test]
    fn bregman_reproduces_nesterov() {
        let pot = unit();
        let a = integrate_flow(&pot, DampingSchedule::nesterov(), &[1.0], &[0.0], 0.1, 10.0, 4000).unwrap();
        let b = integrate_bregman_flow(&BregmanParams::nesterov(), &pot, &[1.0], &[0.0], 0.1, 10.0, 4000)
            .unwrap();
        for i in 0..a.len() {
            assert!((a.value(i)[0] - b.value(i)[0]).abs() <= 1e-10);
            assert!((a.deriv(i)[0] - b.deriv(i)[0]).abs() <= 1e-10);
        }
    }

    #[test]
    fn bregman_unit_scale_is_flow_on_scaled_potential() {
        let b = integrate_bregman_flow(
            &BregmanParams::polynomial(2.0, 1.0).unwrap(),
            &unit(),
            &[1.0],
            &[0.0],
            0.1,
            10.0,
            4000,
        )
        .unwrap();
        let four = Potential::scalar_quadratic(4.0).unwrap();
        let a = integrate_flow(&four, DampingSchedule::nesterov(), &[1.0], &[0.0], 0.1, 10.0, 4000).unwrap();
        for i in 0..a.len() {
            assert!((a.value(i)[0] - b.value(i)[0]).abs() <= 1e-10);
        }
    }

    #[test]
    fn bregman_rejects_other_geometry() {
        let mut p = BregmanParams::nesterov();
        p.psi = Geometry::Other("entropy".into());
        let r = integrate_bregman_flow(&p, &unit(), &[1.0], &[0.0], 0.1, 1.0, 10);
        assert!(matches!(r, Err(Error::Unsupported(_))));
    }

    #[test]
    fn bregman_equilibrium() {
        let pot = Potential::scalar_quadratic(2.0).unwrap();
        let t = integrate_bregman_flow(&BregmanParams::nesterov(), &pot, &[0.0], &[0.0], 0.1, 5.0, 100)
            .unwrap();
        assert!((0..t.len()).all(|i| t.value(i)[0] == 0.0));
    }

    #[test]
    fn bregman_undefined_schedule_reported() {
        let r = integrate_bregman_flow(&BregmanParams::nesterov(), &unit(), &[1.0], &[0.0], -1.0, 1.0, 10);
        assert!(matches!(r, Err(Error::InvalidParameter(_))));
    }

    #[test]
    fn ideal_scaling_cases() {
        let grid: Vec<f64> = (0..=99).map(|i| 0.1 + 9.9 * i as f64 / 99.0).collect();
        let r = check_ideal_scaling(&BregmanParams::polynomial(2.0, 1.0).unwrap(), &grid).unwrap();
        assert!(r.holds && r.max_violation < 1e-12);

        let steep = BregmanParams::euclidean(
            Schedule::new(|t| (2.0 / t).ln()),
            Schedule::new(|t| 3.0 * t.ln()),
            Schedule::new(|t| 2.0 * t.ln()),
        );
        let grid: Vec<f64> = (1..=10).map(f64::from).collect();
        let r = check_ideal_scaling(&steep, &grid).unwrap();
        assert!(!r.holds && !r.beta_condition && r.gamma_condition);

        let linear = BregmanParams::euclidean(Schedule::new(|_| 0.0), Schedule::new(|_| 0.0), Schedule::new(|t| t));
        let r = check_ideal_scaling(&linear, &grid).unwrap();
        assert!(r.gamma_condition);

        assert!(check_ideal_scaling(&BregmanParams::nesterov(), &[-1.0]).is_err());
    }

    #[test]
    fn hermite_reproduces_cubics() {
        let traj = Trajectory::sample(1, 0.0, 2.0, 10, |t, x, v| {
            x[0] = t * t * t - t;
            v[0] = 3.0 * t * t - 1.0;
        })
        .unwrap();
        for t in [0.0, 0.13, 0.77, 1.5, 2.0] {
            let (x, v) = traj.interpolate(t).unwrap();
            assert!((x[0] - (t * t * t - t)).abs() < 1e-13);
            assert!((v[0] - (3.0 * t * t - 1.0)).abs() < 1e-12);
        }
        assert!(traj.interpolate(2.1).is_err());
    }

    #[test]
    fn csv_layout() {
        let traj = Trajectory::sample(2, 0.0, 1.0, 2, |t, x, v| {
            x.copy_from_slice(&[t, 2.0 * t]);
            v.copy_from_slice(&[1.0, 2.0]);
        })
        .unwrap();
        let csv = traj.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "t,x_0,x_1,v_0,v_1");
        assert_eq!(lines.len(), 4);
        let row: Vec<f64> = lines[2].split(',').map(|s| s.parse().unwrap()).collect();
        assert_eq!(row, vec![0.5, 0.5, 1.0, 1.0, 2.0]);
    }

    #[test]
    fn non_uniform_grid_rejected() {
        let r = Trajectory::new(1, vec![0.0, 0.4, 1.0], vec![0.0; 3], vec![0.0; 3]);
        assert!(matches!(r, Err(Error::Grid(_))));
    }

    #[test]
    fn pieces_record_segments() {
        let pieces = [Piece { a: 0.0, b: 1.0, n: 4 }, Piece { a: 1.0, b: 1.5, n: 2 }];
        let traj = Trajectory::from_pieces(1, &pieces, |t, x, _| x[0] = t).unwrap();
        assert_eq!(traj.len(), 7);
        assert_eq!(traj.segments().collect::<Vec<_>>(), vec![(0, 4), (4, 6)]);
        assert_eq!(traj.knots(), vec![1.0]);
        assert_eq!(traj.step(), None);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn constant_damping_dissipates_energy(
            alpha in 0.1f64..4.0,
            beta in 0.1f64..4.0,
            x0 in -2.0f64..2.0,
            v0 in -2.0f64..2.0,
        ) {
            let pot = Potential::scalar_quadratic(beta).unwrap();
            let d = DampingSchedule::constant(alpha).unwrap();
            let traj = integrate_flow(&pot, d, &[x0], &[v0], 0.0, 10.0, 2000).unwrap();
            let e = energy(&traj, &pot).unwrap();
            for w in e.windows(2) {
                prop_assert!(w[1] <= w[0] + 1e-9);
            }
        }

        #[test]
        fn equilibrium_is_fixed(
            lambdas in proptest::collection::vec(0.01f64..10.0, 1..4),
            c in 0.5f64..5.0,
        ) {
            let xstar: Vec<f64> = lambdas.iter().map(|l| l - 1.0).collect();
            let pot = Potential::quadratic(lambdas.clone(), xstar.clone()).unwrap();
            let v0 = vec![0.0; lambdas.len()];
            let traj = integrate_flow(&pot, DampingSchedule::vanishing(c).unwrap(), &xstar, &v0, 0.5, 4.0, 64)
                .unwrap();
            for i in 0..traj.len() {
                for (x, s) in traj.value(i).iter().zip(&xstar) {
                    prop_assert!((x - s).abs() <= 1e-14);
                }
            }
        }
    }
}
