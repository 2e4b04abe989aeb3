//! Jacobi's equation `(Pḣ)' − Qh = 0`, conjugate points and the
//! minimizer/saddle verdict for the flow.
//!
//! With `P = w` and `Q = −λw` the equation reads `ḧ + (ẇ/w)ḣ + λh = 0`,
//! which is the flow itself linearized along one eigendirection.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::action::LagrangianSpec;
use crate::bessel::{j1, y1};
use crate::dynamics::{classify_regime, DampingSchedule, Regime, Trajectory};
use crate::error::{invalid, Error, Result};
use crate::ode::{self, Rk4};
use crate::perturbations::Perturbation;
use crate::potentials::Potential;

/// Width below which a bracketed zero is accepted.
pub const BISECTION_TOLERANCE: f64 = 1e-12;
/// Smallest `n_steps` accepted by shooting.
pub const MIN_SHOOTING_STEPS: usize = 1000;
/// `|J1(√β t1)|` below which the closed vanishing-damping form degenerates.
pub const DEGENERACY_TOLERANCE: f64 = 1e-12;
/// Relative depth of a sign-preserving dip reported as a tangential zero.
pub const TANGENTIAL_TOLERANCE: f64 = 1e-11;
/// Distance from `t2` within which a conjugate time counts as on the boundary.
pub const BOUNDARY_TOLERANCE: f64 = 1e-9;
/// Scan steps per half-period `π/√λ` in the Bessel root search.
pub const SCAN_STEPS_PER_HALF_PERIOD: f64 = 64.0;
/// Search window `50/√λ` past `t1` for vanishing damping.
pub const SEARCH_CAP: f64 = 50.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    ClosedForm,
    Shooting,
}

/// Zeros in `(t1, t2)` of the Jacobi solution with `h(t1) = 0, ḣ(t1) = 1`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConjugateReport {
    pub eigen_lambda: f64,
    pub t1: f64,
    pub t2: f64,
    pub conjugate_times: Vec<f64>,
    pub method: Method,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Minimizer,
    Saddle,
    AtBoundary,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DirectionReport {
    pub eigenvalue: f64,
    pub first_conjugate_time: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Classification {
    pub verdict: Verdict,
    pub t1: f64,
    pub t2: f64,
    pub damping: DampingSchedule,
    pub directions: Vec<DirectionReport>,
    /// Eigenvalue whose conjugate point comes first.
    pub binding_eigenvalue: Option<f64>,
    pub earliest_conjugate_time: Option<f64>,
    /// `P = w(t) > 0` on the interval.
    pub legendre: bool,
}

fn check_beta(beta: f64) -> Result<()> {
    if !(beta.is_finite() && beta > 0.0) {
        return Err(invalid(format!("curvature must be positive, got {beta}")));
    }
    Ok(())
}

/// `[Y1(√β t) − Y1(√β t1) J1(√β t)/J1(√β t1)] / t`, the solution of
/// `ḧ + (3/t)ḣ + βh = 0` vanishing at `t1`.
pub fn jacobi_closed_vanishing(beta: f64, t1: f64, t: f64) -> Result<f64> {
    check_beta(beta)?;
    if !(t1 > 0.0) {
        return Err(Error::SingularTime(t1));
    }
    if !(t > 0.0) {
        return Err(Error::SingularTime(t));
    }
    let x = beta.sqrt();
    let j_start = j1(x * t1);
    if j_start.abs() < DEGENERACY_TOLERANCE {
        return Err(Error::Degenerate(format!(
            "J1(sqrt(beta) t1) = {j_start:e}; use shooting"
        )));
    }
    Ok((y1(x * t) - y1(x * t1) * j1(x * t) / j_start) / t)
}

/// `Y1(√β t) J1(√β t1) − J1(√β t) Y1(√β t1)`; zero exactly at the points
/// conjugate to `t1` and free of the division in the closed form.
pub fn conjugate_condition_vanishing(beta: f64, t1: f64, t: f64) -> Result<f64> {
    check_beta(beta)?;
    if !(t1 > 0.0 && t > 0.0) {
        return Err(Error::SingularTime(t1.min(t)));
    }
    Ok(cross(beta.sqrt(), t1, t))
}

fn cross(x: f64, t1: f64, t: f64) -> f64 {
    y1(x * t) * j1(x * t1) - j1(x * t) * y1(x * t1)
}

/// Solution of `ḧ + αḣ + βh = 0` with `h(t1) = 0`, `ḣ(t1) = 1`.
///
/// Underdamped: `e^{−α s/2} sin(ω s)/ω`; critical: `s e^{−α s/2}`;
/// overdamped: `e^{−α s/2} sinh(γ s)/γ`, with `s = t − t1`.
pub fn jacobi_closed_constant(alpha: f64, beta: f64, t1: f64, t: f64) -> Result<f64> {
    check_beta(beta)?;
    if !(alpha.is_finite() && alpha >= 0.0) {
        return Err(invalid(format!("alpha must be >= 0, got {alpha}")));
    }
    let s = t - t1;
    let decay = (-0.5 * alpha * s).exp();
    let disc = 4.0 * beta - alpha * alpha;
    Ok(match classify_regime(alpha, beta) {
        Regime::Critical => s * decay,
        Regime::Underdamped => {
            let w = 0.5 * disc.sqrt();
            decay * (w * s).sin() / w
        }
        Regime::Overdamped => {
            let g = 0.5 * (-disc).sqrt();
            decay * (g * s).sinh() / g
        }
    })
}

fn check_interval(damping: DampingSchedule, t1: f64, t2: f64) -> Result<()> {
    if !(t1.is_finite() && t2.is_finite() && t1 < t2) {
        return Err(invalid(format!("need t1 < t2, got [{t1}, {t2}]")));
    }
    damping.check_time(t1)
}

/// Integrates `ḧ + d(t)ḣ + κ(t)h = 0` from `(h0, ḣ0)` at `t1`.
pub fn solve_jacobi<K>(
    damping: DampingSchedule,
    curvature: K,
    t1: f64,
    t2: f64,
    n_steps: usize,
    h0: f64,
    dh0: f64,
) -> Result<Trajectory>
where
    K: Fn(f64) -> f64,
{
    check_interval(damping, t1, t2)?;
    if n_steps < 2 {
        return Err(invalid("n_steps must be >= 2"));
    }
    let sys = jacobi_system(damping, &curvature);
    let (times, states) = ode::integrate(&sys, &[h0, dh0], t1, t2, n_steps)?;
    let values = states.iter().step_by(2).copied().collect();
    let derivs = states.iter().skip(1).step_by(2).copied().collect();
    Trajectory::new(1, times, values, derivs)
}

fn jacobi_system<'a, K: Fn(f64) -> f64>(
    damping: DampingSchedule,
    curvature: &'a K,
) -> (usize, impl Fn(f64, &[f64], &mut [f64]) + 'a) {
    (2usize, move |t: f64, y: &[f64], out: &mut [f64]| {
        out[0] = y[1];
        out[1] = -damping.coefficient_unchecked(t) * y[1] - curvature(t) * y[0];
    })
}

fn shoot<K: Fn(f64) -> f64>(
    damping: DampingSchedule,
    curvature: &K,
    t1: f64,
    t2: f64,
    n_steps: usize,
) -> Result<Vec<f64>> {
    check_interval(damping, t1, t2)?;
    if n_steps < MIN_SHOOTING_STEPS {
        return Err(invalid(format!(
            "shooting needs n_steps >= {MIN_SHOOTING_STEPS}, got {n_steps}"
        )));
    }
    let sys = jacobi_system(damping, curvature);
    let (times, states) = ode::integrate(&sys, &[0.0, 1.0], t1, t2, n_steps)?;
    let h: Vec<f64> = states.iter().step_by(2).copied().collect();
    let peak = h.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let mut roots = Vec::new();
    let mut stepper = Rk4::new(&sys);
    let mut y = [0.0; 2];
    for i in 1..h.len() - 1 {
        let (a, b, c) = (h[i - 1], h[i], h[i + 1]);
        if b.abs() < a.abs() && b.abs() <= c.abs() && a * b > 0.0 && b * c > 0.0 {
            if b.abs() < TANGENTIAL_TOLERANCE * peak {
                return Err(Error::TangentialZero(times[i]));
            }
        }
    }
    for i in 0..h.len() - 1 {
        let (a, b) = (h[i], h[i + 1]);
        if b == 0.0 && i + 1 < h.len() - 1 {
            roots.push(times[i + 1]);
            continue;
        }
        if a * b >= 0.0 {
            continue;
        }
        let start = [states[2 * i], states[2 * i + 1]];
        let t_start = times[i];
        let mut eval = |t: f64| {
            y = start;
            stepper.step(t_start, &mut y, t - t_start);
            y[0]
        };
        let (mut lo, mut hi) = (times[i], times[i + 1]);
        let sign_lo = a.signum();
        while hi - lo > BISECTION_TOLERANCE {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if eval(mid).signum() == sign_lo {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let root = 0.5 * (lo + hi);
        if root > t1 && root < t2 {
            roots.push(root);
        }
    }
    Ok(roots)
}

/// Conjugate points of `t1` found by RK4 shooting with `h(t1) = 0, ḣ(t1) = 1`
/// and bisection of every sign change.
pub fn conjugate_points_shooting(
    spec: &LagrangianSpec,
    eigen_lambda: f64,
    t1: f64,
    t2: f64,
    n_steps: usize,
) -> Result<ConjugateReport> {
    if !(eigen_lambda.is_finite() && eigen_lambda >= 0.0) {
        return Err(invalid(format!("eigenvalue must be >= 0, got {eigen_lambda}")));
    }
    let times = shoot(spec.damping, &|_| eigen_lambda, t1, t2, n_steps)?;
    Ok(ConjugateReport {
        eigen_lambda,
        t1,
        t2,
        conjugate_times: times,
        method: Method::Shooting,
    })
}

/// Shooting along a base trajectory, with curvature `f''(Y(t))` taken from
/// Hermite interpolation of the base. Needed when the Hessian depends on
/// position.
pub fn conjugate_points_along(
    spec: &LagrangianSpec,
    base: &Trajectory,
    n_steps: usize,
) -> Result<Vec<f64>> {
    if base.dim() != 1 || spec.pot.dim() != 1 {
        return Err(Error::Unsupported("shooting along a base curve is one-dimensional".into()));
    }
    let pot = &spec.pot;
    let curvature = |t: f64| {
        let mut x = [0.0];
        let mut v = [0.0];
        let tt = t.clamp(base.t1(), base.t2());
        base.interpolate_into(tt, &mut x, &mut v)
            .expect("time clamped into the base interval");
        let mut f2 = [0.0];
        pot.hessian_diag_into(&x, &mut f2);
        f2[0]
    };
    shoot(spec.damping, &curvature, base.t1(), base.t2(), n_steps)
}

/// Bessel conjugate condition scanned over `[from, to]`, returning up to
/// `limit` roots.
fn bessel_roots(beta: f64, t1: f64, to: f64, limit: usize) -> Vec<f64> {
    let x = beta.sqrt();
    let step = PI / x / SCAN_STEPS_PER_HALF_PERIOD;
    let g = |t: f64| cross(x, t1, t);
    let mut roots = Vec::new();
    let mut a = t1;
    let mut ga = f64::NAN;
    let mut i = 1u64;
    while roots.len() < limit {
        let b = (t1 + step * i as f64).min(to);
        let gb = g(b);
        if gb == 0.0 {
            roots.push(b);
        } else if ga.is_finite() && ga * gb < 0.0 {
            let (mut lo, mut hi) = (a, b);
            while hi - lo > BISECTION_TOLERANCE {
                let mid = 0.5 * (lo + hi);
                if mid <= lo || mid >= hi {
                    break;
                }
                if g(mid).signum() == ga.signum() {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            roots.push(0.5 * (lo + hi));
        }
        if b >= to {
            break;
        }
        a = b;
        ga = gb;
        i += 1;
    }
    roots
}

/// All conjugate points in `(t1, t2)` from the closed forms (constant
/// damping, or vanishing damping with `c = 3`).
pub fn conjugate_points_closed(
    damping: DampingSchedule,
    eigen_lambda: f64,
    t1: f64,
    t2: f64,
) -> Result<ConjugateReport> {
    check_interval(damping, t1, t2)?;
    check_beta(eigen_lambda)?;
    let times = match damping {
        DampingSchedule::Constant { alpha } => match classify_regime(alpha, eigen_lambda) {
            Regime::Underdamped => {
                let gap = 2.0 * PI / (4.0 * eigen_lambda - alpha * alpha).sqrt();
                (1..)
                    .map(|k| t1 + gap * k as f64)
                    .take_while(|&t| t < t2)
                    .collect()
            }
            _ => Vec::new(),
        },
        DampingSchedule::Vanishing { c } if c == 3.0 => {
            bessel_roots(eigen_lambda, t1, t2, usize::MAX)
                .into_iter()
                .filter(|&t| t < t2)
                .collect()
        }
        DampingSchedule::Vanishing { .. } => {
            return Err(Error::Unsupported(
                "closed form requires c = 3; use shooting".into(),
            ))
        }
    };
    Ok(ConjugateReport {
        eigen_lambda,
        t1,
        t2,
        conjugate_times: times,
        method: Method::ClosedForm,
    })
}

/// First point conjugate to `t1` along an eigendirection with curvature
/// `eigen_lambda`, or `None` if there is none.
pub fn first_conjugate_time(damping: DampingSchedule, eigen_lambda: f64, t1: f64) -> Result<Option<f64>> {
    damping.check_time(t1)?;
    if !(eigen_lambda.is_finite() && eigen_lambda >= 0.0) {
        return Err(invalid(format!("eigenvalue must be >= 0, got {eigen_lambda}")));
    }
    if eigen_lambda == 0.0 {
        return Ok(None);
    }
    match damping {
        DampingSchedule::Constant { alpha } => Ok(match classify_regime(alpha, eigen_lambda) {
            Regime::Underdamped => Some(t1 + 2.0 * PI / (4.0 * eigen_lambda - alpha * alpha).sqrt()),
            _ => None,
        }),
        DampingSchedule::Vanishing { c } => {
            let cap = t1 + SEARCH_CAP / eigen_lambda.sqrt();
            if c == 3.0 {
                return Ok(bessel_roots(eigen_lambda, t1, cap, 1).first().copied());
            }
            let half_period = PI / eigen_lambda.sqrt();
            let h = (half_period / 400.0).min(t1 / c.max(1.0));
            let n = (((cap - t1) / h).ceil() as usize).max(MIN_SHOOTING_STEPS);
            Ok(shoot(damping, &|_| eigen_lambda, t1, cap, n)?.first().copied())
        }
    }
}

/// Minimizer or saddle verdict for the flow on `[t1, t2]`.
pub fn classify(pot: &Potential, damping: DampingSchedule, t1: f64, t2: f64) -> Result<Classification> {
    if !pot.is_quadratic() {
        return Err(Error::Unsupported(
            "classification needs a quadratic potential".into(),
        ));
    }
    check_interval(damping, t1, t2)?;
    let lambdas = pot.hessian_diagonal(&pot.minimizer())?;
    let mut directions = Vec::with_capacity(lambdas.len());
    let mut binding: Option<(f64, f64)> = None;
    for &l in &lambdas {
        let first = first_conjugate_time(damping, l, t1)?;
        if let Some(t) = first {
            if binding.map_or(true, |(_, b)| t < b) {
                binding = Some((l, t));
            }
        }
        directions.push(DirectionReport {
            eigenvalue: l,
            first_conjugate_time: first,
        });
    }
    let tol = BOUNDARY_TOLERANCE * t2.abs().max(1.0);
    let verdict = match binding {
        Some((_, t)) if (t - t2).abs() <= tol => Verdict::AtBoundary,
        Some((_, t)) if t < t2 => Verdict::Saddle,
        _ => Verdict::Minimizer,
    };
    // w is monotone, so positivity at both ends covers the interval.
    let legendre = damping.weight(t1)? > 0.0 && damping.weight(t2)? > 0.0;
    Ok(Classification {
        verdict,
        t1,
        t2,
        damping,
        directions,
        binding_eigenvalue: binding.map(|(l, _)| l),
        earliest_conjugate_time: binding.map(|(_, t)| t),
        legendre,
    })
}

/// Root `ε*` of the triangle second variation, `u = βc²`.
pub fn epsilon_star(u: f64, beta: f64) -> Result<f64> {
    check_beta(beta)?;
    if !(u.is_finite() && u >= 0.0) {
        return Err(invalid(format!("u must be >= 0, got {u}")));
    }
    let disc = 25.0 * u * u - 60.0 * u + 225.0;
    Ok(((15.0 - 5.0 * u + disc.sqrt()) / (3.0 * beta)).sqrt())
}

/// Closed-form second variation of the unit triangle of half-width `eps`
/// centred at `c`, for `3/t` damping on `βx²/2`.
pub fn triangle_d2j_closed(beta: f64, c: f64, eps: f64, sigma: f64) -> f64 {
    let num = (0.3 * beta * eps.powi(4) + (beta * c * c - 3.0) * eps * eps - 3.0 * c * c) * c;
    -sigma * sigma * num / (3.0 * eps)
}

/// Closed-form second variation of `σ sin(kπ(t−t1)/(t2−t1))` for constant
/// damping `α = 1` on `x²/2`.
pub fn sinusoid_d2j_closed(t1: f64, t2: f64, k: u32, sigma: f64) -> f64 {
    let l = t2 - t1;
    let kp2 = (k as f64 * PI).powi(2);
    let l2 = l * l;
    sigma * sigma * t1.exp() * l.exp_m1() / 2.0 * kp2 * (2.0 * kp2 - l2) / (l2 * (l2 + 4.0 * kp2))
}

/// A pair of triangles on `[t1, t2]` whose second variations have opposite
/// signs under `3/t` damping on `βx²/2`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IndefinitenessWitness {
    pub beta: f64,
    pub t1: f64,
    pub t2: f64,
    pub c: f64,
    pub epsilon_star: f64,
    pub eps_small: f64,
    pub eps_large: f64,
    pub d2j_small: f64,
    pub d2j_large: f64,
    pub d2j_small_closed: f64,
    pub d2j_large_closed: f64,
}

/// Centres both triangles at the midpoint; `ε = ε*/2` and
/// `ε = (ε* + (t2−t1)/2)/2`.
pub fn indefiniteness_witness(beta: f64, t1: f64, t2: f64) -> Result<IndefinitenessWitness> {
    check_beta(beta)?;
    check_interval(DampingSchedule::nesterov(), t1, t2)?;
    let c = 0.5 * (t1 + t2);
    let half = 0.5 * (t2 - t1);
    let star = epsilon_star(beta * c * c, beta)?;
    if half * (1.0 - 1e-3) <= star {
        return Err(invalid(format!(
            "interval half-length {half} does not exceed eps* = {star}; no centred witness"
        )));
    }
    let eps_small = 0.5 * star;
    let eps_large = 0.5 * (star + half);
    let spec = LagrangianSpec::new(DampingSchedule::nesterov(), Potential::scalar_quadratic(beta)?);
    let value = |eps: f64| -> Result<f64> {
        let h = Perturbation::triangle(c, eps, eps * 1e-3, t1, t2)?;
        spec.second_variation(t1, t2, &h)
    };
    Ok(IndefinitenessWitness {
        beta,
        t1,
        t2,
        c,
        epsilon_star: star,
        eps_small,
        eps_large,
        d2j_small: value(eps_small)?,
        d2j_large: value(eps_large)?,
        d2j_small_closed: triangle_d2j_closed(beta, c, eps_small, 1.0),
        d2j_large_closed: triangle_d2j_closed(beta, c, eps_large, 1.0),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn nesterov(beta: f64) -> LagrangianSpec {
        LagrangianSpec::new(DampingSchedule::nesterov(), Potential::scalar_quadratic(beta).unwrap())
    }

    fn constant(alpha: f64, beta: f64) -> LagrangianSpec {
        LagrangianSpec::new(
            DampingSchedule::constant(alpha).unwrap(),
            Potential::scalar_quadratic(beta).unwrap(),
        )
    }

    #[test]
    fn closed_vanishing_starts_at_zero_and_solves_ode() {
        assert!(jacobi_closed_vanishing(1.0, 1.0, 1.0).unwrap().abs() < 1e-12);
        let e = 1e-4;
        for i in 0..=190 {
            let t = 1.05 + 0.1 * i as f64;
            let h = |s| jacobi_closed_vanishing(1.0, 1.0, s).unwrap();
            let (hm, h0, hp) = (h(t - e), h(t), h(t + e));
            let r = (hp - 2.0 * h0 + hm) / (e * e) + 3.0 / t * (hp - hm) / (2.0 * e) + h0;
            assert!(r.abs() <= 1e-6, "t={t} r={r}");
        }
    }

    #[test]
    fn closed_vanishing_degenerate_and_domain() {
        // First positive zero of J1.
        let z = 3.831_705_970_207_512;
        assert!(matches!(jacobi_closed_vanishing(1.0, z, 5.0), Err(Error::Degenerate(_))));
        assert!(matches!(jacobi_closed_vanishing(1.0, 0.0, 5.0), Err(Error::SingularTime(_))));
    }

    #[test]
    fn closed_vanishing_zeros_match_condition() {
        let r = conjugate_points_closed(DampingSchedule::nesterov(), 1.0, 1.0, 20.0).unwrap();
        assert!(!r.conjugate_times.is_empty());
        for t in r.conjugate_times {
            let peak = (0..100)
                .map(|i| jacobi_closed_vanishing(1.0, 1.0, 1.0 + 0.19 * i as f64).unwrap().abs())
                .fold(0.0, f64::max);
            assert!(jacobi_closed_vanishing(1.0, 1.0, t).unwrap().abs() <= 1e-9 * peak);
        }
    }

    #[test]
    fn closed_vanishing_not_identically_zero() {
        for (beta, t1) in [(0.1, 0.5), (1.0, 1.0), (10.0, 4.0)] {
            let m = (1..=100)
                .map(|i| jacobi_closed_vanishing(beta, t1, t1 + 0.01 * i as f64).unwrap().abs())
                .fold(0.0, f64::max);
            assert!(m > 0.0);
        }
    }

    #[test]
    fn closed_constant_regimes() {
        for i in 1..200 {
            let t = 0.05 * i as f64;
            assert!(jacobi_closed_constant(2.0, 1.0, 0.0, t).unwrap() > 0.0);
            assert!(jacobi_closed_constant(3.0, 1.0, 0.0, t).unwrap() > 0.0);
        }
        let f = |t: f64| jacobi_closed_constant(1.0, 1.0, 0.0, t).unwrap();
        let (mut lo, mut hi) = (3.0, 4.0);
        assert!(f(lo) > 0.0 && f(hi) < 0.0);
        for _ in 0..100 {
            let mid = 0.5 * (lo + hi);
            if f(mid) > 0.0 {
                lo = mid
            } else {
                hi = mid
            }
        }
        assert!((lo - 2.0 * PI / 3f64.sqrt()).abs() <= 1e-9);
        assert!((2.0 * PI / 3f64.sqrt() - 3.62760).abs() < 1e-5);
    }

    #[test]
    fn closed_constant_matches_shooting_solution() {
        for (alpha, beta) in [(1.0, 1.0), (2.0, 1.0), (3.0, 1.0)] {
            let d = DampingSchedule::constant(alpha).unwrap();
            let traj = solve_jacobi(d, |_| beta, 0.5, 6.0, 4000, 0.0, 1.0).unwrap();
            for i in (0..traj.len()).step_by(97) {
                let t = traj.times()[i];
                let exact = jacobi_closed_constant(alpha, beta, 0.5, t).unwrap();
                assert!((traj.value(i)[0] - exact).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn shooting_vanishing_matches_bessel() {
        let rep = conjugate_points_shooting(&nesterov(1.0), 1.0, 1.0, 20.0, 20_000).unwrap();
        let closed = conjugate_points_closed(DampingSchedule::nesterov(), 1.0, 1.0, 20.0).unwrap();
        assert_eq!(rep.conjugate_times.len(), closed.conjugate_times.len());
        for (a, b) in rep.conjugate_times.iter().zip(&closed.conjugate_times) {
            assert!((a - b).abs() <= 1e-8, "{a} {b}");
        }
    }

    #[test]
    fn shooting_constant_formula() {
        let rep = conjugate_points_shooting(&constant(1.0, 1.0), 1.0, 0.5, 10.0, 10_000).unwrap();
        let gap = 2.0 * PI / 3f64.sqrt();
        assert_eq!(rep.conjugate_times.len(), 2);
        for (k, t) in rep.conjugate_times.iter().enumerate() {
            assert!((t - (0.5 + gap * (k + 1) as f64)).abs() <= 1e-8);
        }
        let crit = conjugate_points_shooting(&constant(2.0, 1.0), 1.0, 0.5, 100.0, 100_000).unwrap();
        assert!(crit.conjugate_times.is_empty());
    }

    #[test]
    fn shooting_preconditions() {
        assert!(conjugate_points_shooting(&nesterov(1.0), 1.0, 0.0, 2.0, 2000).is_err());
        assert!(conjugate_points_shooting(&nesterov(1.0), 1.0, 1.0, 2.0, 999).is_err());
    }

    #[test]
    fn first_conjugate_time_cases() {
        let crit = DampingSchedule::constant(2.0).unwrap();
        assert_eq!(first_conjugate_time(crit, 1.0, 0.3).unwrap(), None);
        let under = DampingSchedule::constant(1.0).unwrap();
        let t = first_conjugate_time(under, 1.0, 0.3).unwrap().unwrap();
        assert!((t - 0.3 - 3.6276).abs() < 1e-4);
        let a = first_conjugate_time(DampingSchedule::nesterov(), 4.0, 1.0).unwrap().unwrap();
        let b = first_conjugate_time(DampingSchedule::nesterov(), 1.0, 1.0).unwrap().unwrap();
        assert!(a < b);
        assert_eq!(first_conjugate_time(DampingSchedule::nesterov(), 0.0, 1.0).unwrap(), None);
    }

    #[test]
    fn first_conjugate_time_other_c_uses_shooting() {
        let d = DampingSchedule::vanishing(2.0).unwrap();
        let t = first_conjugate_time(d, 1.0, 1.0).unwrap().unwrap();
        let spec = LagrangianSpec::new(d, Potential::scalar_quadratic(1.0).unwrap());
        let rep = conjugate_points_shooting(&spec, 1.0, 1.0, t + 1.0, 20_000).unwrap();
        assert!((rep.conjugate_times[0] - t).abs() < 1e-8);
    }

    #[test]
    fn classify_examples() {
        let pot = Potential::scalar_quadratic(1.0).unwrap();
        let crit = DampingSchedule::constant(2.0).unwrap();
        assert_eq!(classify(&pot, crit, 0.0, 50.0).unwrap().verdict, Verdict::Minimizer);
        let under = DampingSchedule::constant(1.0).unwrap();
        let c = classify(&pot, under, 0.0, 4.0).unwrap();
        assert_eq!(c.verdict, Verdict::Saddle);
        assert_eq!(c.binding_eigenvalue, Some(1.0));
        let boundary = 2.0 * PI / 3f64.sqrt();
        assert_eq!(classify(&pot, under, 0.0, boundary).unwrap().verdict, Verdict::AtBoundary);
        let ten = Potential::scalar_quadratic(10.0).unwrap();
        assert_eq!(
            classify(&ten, DampingSchedule::nesterov(), 1.0, 3.1).unwrap().verdict,
            Verdict::Saddle
        );
        let poly = Potential::polynomial(1.0, 4, 0.0).unwrap();
        assert!(matches!(classify(&poly, crit, 0.0, 1.0), Err(Error::Unsupported(_))));
    }

    #[test]
    fn classify_picks_largest_eigenvalue() {
        let pot = Potential::quadratic(vec![3e-4, 2e-2], vec![0.0, 0.0]).unwrap();
        let c = classify(&pot, DampingSchedule::nesterov(), 0.01, 200.0).unwrap();
        assert_eq!(c.binding_eigenvalue, Some(2e-2));
        assert!(c.legendre);
    }

    #[test]
    fn epsilon_star_values() {
        assert!((epsilon_star(0.0, 1.0).unwrap() - 10f64.sqrt()).abs() < 1e-14);
        let big = epsilon_star(1e9, 2.0).unwrap();
        assert!((big * big * 2.0 - 3.0).abs() < 1e-6);
        let e = epsilon_star(4.0, 1.0).unwrap();
        assert!((e * e - (-5.0 + 385f64.sqrt()) / 3.0).abs() < 1e-12);
        assert!((e - 2.207_67).abs() < 1e-5);
        assert!(triangle_d2j_closed(1.0, 2.0, e, 1.0).abs() < 1e-12);
    }

    #[test]
    fn triangle_closed_example() {
        assert!((triangle_d2j_closed(1.0, 2.0, 1.0, 1.0) - 10.7 * 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn sinusoid_closed_matches_direct_integral() {
        // ½∫ e^t (ḣ² − h²) dt by Simpson on a fine grid.
        for (t1, t2, k) in [(0.0, 2.0 * PI, 1), (0.5, 3.0, 2), (-1.0, 9.0, 3)] {
            let l: f64 = t2 - t1;
            let w = k as f64 * PI / l;
            let direct = crate::quadrature::simpson(
                |t| {
                    let s = w * (t - t1);
                    0.5 * t.exp() * (w * w * s.cos().powi(2) - s.sin().powi(2))
                },
                t1,
                t2,
                200_000,
            )
            .unwrap();
            let closed = sinusoid_d2j_closed(t1, t2, k, 1.0);
            assert!((direct - closed).abs() <= 1e-9 * closed.abs(), "{direct} {closed}");
        }
        let v = sinusoid_d2j_closed(0.0, 2.0 * PI, 1, 1.0);
        assert!((v + (2.0 * PI).exp_m1() / 32.0).abs() < 1e-12);
    }

    #[test]
    fn witness_has_opposite_signs() {
        let w = indefiniteness_witness(10.0, 1.0, 1.0 + 40f64.sqrt() / 10f64.sqrt() + 0.1).unwrap();
        assert!(w.d2j_small > 0.0 && w.d2j_large < 0.0);
        assert!(indefiniteness_witness(10.0, 1.0, 1.5).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(20))]

        #[test]
        fn shooting_agrees_with_bessel(beta in 0.1f64..10.0, t1 in 0.5f64..5.0) {
            let first = first_conjugate_time(DampingSchedule::nesterov(), beta, t1).unwrap().unwrap();
            let t2 = first + 0.5;
            let n = (((t2 - t1) * beta.sqrt() * 2000.0) as usize).max(4000);
            let rep = conjugate_points_shooting(&nesterov(beta), beta, t1, t2, n).unwrap();
            prop_assert!((rep.conjugate_times[0] - first).abs() <= 1e-7);
        }

        #[test]
        fn sign_change_within_bracket(beta in 0.1f64..10.0, c in 0.1f64..10.0) {
            let e = epsilon_star(beta * c * c, beta).unwrap();
            prop_assert!(e >= (3.0 / beta).sqrt() - 1e-12 && e <= (10.0 / beta).sqrt() + 1e-12);
            prop_assert!(triangle_d2j_closed(beta, c, 0.99 * e, 1.0) > 0.0);
            prop_assert!(triangle_d2j_closed(beta, c, 1.01 * e, 1.0) < 0.0);
        }

        #[test]
        fn reported_conjugate_times_are_zeros(alpha in 0.0f64..1.9, beta in 0.5f64..4.0) {
            let spec = constant(alpha, beta);
            let rep = conjugate_points_shooting(&spec, beta, 0.0, 15.0, 15_000).unwrap();
            let peak = (0..=1500)
                .map(|i| jacobi_closed_constant(alpha, beta, 0.0, 0.01 * i as f64).unwrap().abs())
                .fold(0.0, f64::max);
            for t in rep.conjugate_times {
                prop_assert!(t > 0.0 && t < 15.0);
                prop_assert!(jacobi_closed_constant(alpha, beta, 0.0, t).unwrap().abs() <= 1e-9 * peak);
            }
        }
    }
}
