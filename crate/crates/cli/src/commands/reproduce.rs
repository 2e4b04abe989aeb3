//! Built-in experiments behind `vnag reproduce`.

use serde::Serialize;
use serde_json::json;
use vnag_core::dynamics::integrate_flow;
use vnag_core::jacobi::{
    classify, conjugate_points_along, conjugate_points_shooting, first_conjugate_time,
    indefiniteness_witness, solve_jacobi, triangle_d2j_closed,
};
use vnag_core::perturbations::perturb_curve;
use vnag_core::plot::Chart;
use vnag_core::{
    DampingSchedule, LagrangianSpec, Perturbation, PerturbationSpec, Potential, Trajectory, Verdict,
};

use crate::error::Result;
use crate::output::{Cell, Outcome, Table};

pub const DEFAULT_T1: f64 = 0.01;

const INITIAL_CONDITIONS: &str =
    "initial conditions are a choice: v0 = 0 and t1 = 0.01 unless stated otherwise";

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Figure {
    Fig1,
    Fig2,
    Fig3,
    Unbounded,
    Poly,
}

impl Figure {
    pub const ALL: [Figure; 5] = [
        Figure::Fig1,
        Figure::Fig2,
        Figure::Fig3,
        Figure::Unbounded,
        Figure::Poly,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Figure::Fig1 => "fig1",
            Figure::Fig2 => "fig2",
            Figure::Fig3 => "fig3",
            Figure::Unbounded => "unbounded",
            Figure::Poly => "poly",
        }
    }
}

pub fn run(figure: Figure, seed: u64) -> Result<Outcome> {
    match figure {
        Figure::Fig1 => fig1(seed),
        Figure::Fig2 => fig2(),
        Figure::Fig3 => fig3(),
        Figure::Unbounded => unbounded(),
        Figure::Poly => poly(),
    }
}

fn every(n: usize, stride: usize) -> impl Iterator<Item = usize> {
    (0..n).step_by(stride).chain(if (n - 1) % stride == 0 { None } else { Some(n - 1) })
}

// ---------------------------------------------------------------------------
// fig1: the flow on x²/2 perturbed in directions of opposite curvature.

pub const FIG1_T2: f64 = 10.0;
pub const FIG1_CENTRE: f64 = 5.0;
pub const FIG1_EPS_SMALL: f64 = 0.5;
pub const FIG1_EPS_LARGE: f64 = 4.5;
const FIG1_STEPS: usize = 10_000;
const FIG1_SIGMAS: [f64; 4] = [0.05, 0.1, 0.2, 0.4];
const FIG1_SHOWN_SIGMA: f64 = 0.2;

#[derive(Serialize)]
struct Fig1Family {
    name: &'static str,
    perturbation: PerturbationSpec,
    second_variation: f64,
    closed_form: Option<f64>,
    increments: Vec<[f64; 2]>,
}

fn fig1(seed: u64) -> Result<Outcome> {
    let (t1, t2) = (DEFAULT_T1, FIG1_T2);
    let pot = Potential::scalar_quadratic(1.0)?;
    let damping = DampingSchedule::nesterov();
    let lag = LagrangianSpec::new(damping, pot.clone());
    let base = integrate_flow(&pot, damping, &[1.0], &[0.0], t1, t2, FIG1_STEPS)?;
    let j_base = lag.action(&base)?;

    let families = [
        ("small_eps", PerturbationSpec::triangle(FIG1_CENTRE, FIG1_EPS_SMALL)),
        ("large_eps", PerturbationSpec::triangle(FIG1_CENTRE, FIG1_EPS_LARGE)),
        ("fourier", PerturbationSpec::fourier(seed, 8, 1.0)),
    ];
    let mut table = Table::new(["family", "sigma", "delta_j", "sigma2_d2j"]);
    let mut out = Vec::new();
    let mut built = Vec::new();
    for (name, spec) in families {
        let h = spec.build(t1, t2)?;
        let d2j = lag.second_variation(t1, t2, &h)?;
        let mut increments = Vec::new();
        for s in FIG1_SIGMAS {
            let curve = perturb_curve(&base, &h.scale(s)?)?;
            let dj = lag.action(&curve)? - j_base;
            increments.push([s, dj]);
            table.push(vec![name.into(), s.into(), dj.into(), (s * s * d2j).into()]);
        }
        let closed = match spec.shape {
            vnag_core::perturbations::Shape::Triangle { c, eps, .. } => {
                Some(triangle_d2j_closed(1.0, c, eps, 1.0))
            }
            _ => None,
        };
        out.push(Fig1Family {
            name,
            perturbation: spec,
            second_variation: d2j,
            closed_form: closed,
            increments,
        });
        built.push((name, h));
    }

    let mut curves = Table::new(["t", "base", "small_eps", "large_eps", "fourier"]);
    let mut lines: Vec<Vec<(f64, f64)>> = vec![Vec::new(); 4];
    for i in every(base.len(), 10) {
        let t = base.times()[i];
        let x = base.value(i)[0];
        let mut row: Vec<Cell> = vec![t.into(), x.into()];
        lines[0].push((t, x));
        for (k, (_, h)) in built.iter().enumerate() {
            let y = x + FIG1_SHOWN_SIGMA * h.eval(t).0;
            row.push(y.into());
            lines[k + 1].push((t, y));
        }
        curves.push(row);
    }
    let mut chart = Chart::new("flow on x^2/2 with perturbations").labels("t", "X(t)");
    for (label, pts) in ["flow", "small eps", "large eps", "fourier"].into_iter().zip(lines) {
        chart = chart.line(label, pts);
    }
    let mut inc_chart = Chart::new("J[X + sigma h] - J[X]").labels("sigma", "increment").hline(0.0);
    for f in &out {
        inc_chart = inc_chart.line(f.name, f.increments.iter().map(|p| (p[0], p[1])).collect());
    }

    let opposite = out[0].second_variation > 0.0 && out[1].second_variation < 0.0;
    Ok(Outcome::new(
        "fig1",
        json!({ "potential": pot, "damping": damping, "interval": [t1, t2], "x0": [1.0], "v0": [0.0],
                "n_steps": FIG1_STEPS, "seed": seed, "sigmas": FIG1_SIGMAS }),
        json!({ "action_of_flow": j_base, "families": out, "opposite_signs": opposite }),
    )
    .note(INITIAL_CONDITIONS)
    .note(format!(
        "perturbation families are a choice: triangles centred at {FIG1_CENTRE} with eps = \
         {FIG1_EPS_SMALL} (positive second variation) and eps = {FIG1_EPS_LARGE} (negative), \
         plus an 8-mode random sine series from the seed"
    ))
    .file("trajectory.csv", curves.to_csv())
    .file("table.csv", table.to_csv())
    .file("figure.svg", chart.to_svg())
    .file("increments.svg", inc_chart.to_svg()))
}

// ---------------------------------------------------------------------------
// fig2: first conjugate times for βx²/2 under 3/t damping.

pub const FIG2_T1: [f64; 2] = [1.0, 4.0];
pub const FIG2_BETAS: [f64; 5] = [0.5, 1.0, 2.0, 4.0, 8.0];
const FIG2_SLOPES: [f64; 6] = [0.25, 0.5, 1.0, 1.5, 2.0, 3.0];
const FIG2_WINDOW: f64 = 10.0;
const FIG2_STEPS: usize = 4000;

#[derive(Serialize)]
struct Fig2Row {
    t1: f64,
    beta: f64,
    first_conjugate_time: Option<f64>,
    shooting: Option<f64>,
}

fn fig2() -> Result<Outcome> {
    let damping = DampingSchedule::nesterov();
    let mut rows = Vec::new();
    let mut solutions = Table::new(["t1", "beta", "slope", "t", "h"]);
    let mut table = Table::new(["t1", "beta", "first_conjugate_time", "shooting", "difference"]);
    let mut jacobi_chart = Chart::new("Jacobi solutions, t1 = 1, unit slope").labels("t", "h").hline(0.0);
    let mut marks = Vec::new();
    for &t1 in &FIG2_T1 {
        let t2 = t1 + FIG2_WINDOW;
        for &beta in &FIG2_BETAS {
            let first = first_conjugate_time(damping, beta, t1)?;
            let spec = LagrangianSpec::new(damping, Potential::scalar_quadratic(beta)?);
            let horizon = first.map_or(t2, |t| t.max(t2) + 1.0);
            let shot = conjugate_points_shooting(&spec, beta, t1, horizon, 20 * FIG2_STEPS)?
                .conjugate_times
                .first()
                .copied();
            for &slope in &FIG2_SLOPES {
                let sol = solve_jacobi(damping, |_| beta, t1, t2, FIG2_STEPS, 0.0, slope)?;
                let mut pts = Vec::new();
                for i in every(sol.len(), 8) {
                    let (t, h) = (sol.times()[i], sol.value(i)[0]);
                    solutions.push(vec![t1.into(), beta.into(), slope.into(), t.into(), h.into()]);
                    pts.push((t, h));
                }
                if t1 == FIG2_T1[0] && slope == 1.0 {
                    jacobi_chart = jacobi_chart.line(format!("beta = {beta}"), pts);
                }
            }
            if t1 == FIG2_T1[0] {
                if let Some(t) = first.filter(|&t| t <= t2) {
                    marks.push((t, 0.0));
                }
            }
            table.push(vec![
                t1.into(),
                beta.into(),
                first.into(),
                shot.into(),
                first.zip(shot).map(|(a, b)| (a - b).abs()).into(),
            ]);
            rows.push(Fig2Row {
                t1,
                beta,
                first_conjugate_time: first,
                shooting: shot,
            });
        }
    }
    jacobi_chart = jacobi_chart.markers("first conjugate point", marks);

    let mut chart = Chart::new("first conjugate time").labels("beta", "t");
    let mut monotone = true;
    for &t1 in &FIG2_T1 {
        let pts: Vec<(f64, f64)> = rows
            .iter()
            .filter(|r| r.t1 == t1)
            .filter_map(|r| r.first_conjugate_time.map(|t| (r.beta, t)))
            .collect();
        monotone &= pts.len() == FIG2_BETAS.len() && pts.windows(2).all(|w| w[1].1 <= w[0].1);
        chart = chart.line(format!("t1 = {t1}"), pts.clone()).markers(format!("t1 = {t1}"), pts);
    }
    Ok(Outcome::new(
        "fig2",
        json!({ "damping": damping, "t1": FIG2_T1, "betas": FIG2_BETAS, "slopes": FIG2_SLOPES,
                "window": FIG2_WINDOW, "n_steps": FIG2_STEPS }),
        json!({ "rows": rows, "nonincreasing_in_beta": monotone }),
    )
    .note("first_conjugate_time comes from the Bessel conjugate condition; shooting is the cross-check")
    .file("trajectory.csv", solutions.to_csv())
    .file("table.csv", table.to_csv())
    .file("figure.svg", chart.to_svg())
    .file("jacobi.svg", jacobi_chart.to_svg()))
}

// ---------------------------------------------------------------------------
// fig3: a badly conditioned 2-D quadratic under several dampings.

pub const FIG3_EIGENVALUES: [f64; 2] = [2e-2, 3e-4];
pub const FIG3_LENGTHS: [f64; 6] = [10.0, 25.0, 50.0, 100.0, 200.0, 300.0];
const FIG3_STEPS_PER_UNIT: usize = 100;

#[derive(Serialize)]
struct Fig3Case {
    label: String,
    damping: DampingSchedule,
    crossover_length: Option<f64>,
    lengths: Vec<f64>,
    verdicts: Vec<Verdict>,
    actions: Vec<f64>,
}

fn fig3() -> Result<Outcome> {
    let [beta, mu] = FIG3_EIGENVALUES;
    let pot = Potential::quadratic(FIG3_EIGENVALUES.to_vec(), vec![0.0, 0.0])?;
    let t1 = DEFAULT_T1;
    let longest = FIG3_LENGTHS[FIG3_LENGTHS.len() - 1];
    let n = FIG3_STEPS_PER_UNIT * longest as usize;
    let dampings = [
        ("3/t".to_string(), DampingSchedule::nesterov()),
        ("alpha = 2 sqrt(mu)".to_string(), DampingSchedule::constant(2.0 * mu.sqrt())?),
        ("alpha = 0.1".to_string(), DampingSchedule::constant(0.1)?),
        ("alpha = 2 sqrt(beta)".to_string(), DampingSchedule::constant(2.0 * beta.sqrt())?),
        ("alpha = 0.5".to_string(), DampingSchedule::constant(0.5)?),
    ];
    let mut cases = Vec::new();
    let mut table = Table::new(["damping", "length", "verdict", "action"]);
    let mut trajs = Vec::new();
    for (label, damping) in &dampings {
        let traj = integrate_flow(&pot, *damping, &[1.0, 1.0], &[0.0, 0.0], t1, t1 + longest, n)?;
        let lag = LagrangianSpec::new(*damping, pot.clone());
        let mut case = Fig3Case {
            label: label.clone(),
            damping: *damping,
            crossover_length: None,
            lengths: FIG3_LENGTHS.to_vec(),
            verdicts: Vec::new(),
            actions: Vec::new(),
        };
        for &len in &FIG3_LENGTHS {
            let last = (len * FIG3_STEPS_PER_UNIT as f64).round() as usize;
            let class = classify(&pot, *damping, t1, traj.times()[last])?;
            let j = lag.action(&traj.window(0, last)?)?;
            table.push(vec![
                label.as_str().into(),
                len.into(),
                format!("{:?}", class.verdict).to_lowercase().into(),
                j.into(),
            ]);
            case.verdicts.push(class.verdict);
            case.actions.push(j);
            if len == longest {
                case.crossover_length = class.earliest_conjugate_time.map(|t| t - t1);
            }
        }
        cases.push(case);
        trajs.push(traj);
    }

    let mut header = vec!["t".to_string()];
    for k in 0..dampings.len() {
        header.push(format!("x_{k}"));
        header.push(format!("y_{k}"));
    }
    let mut curves = Table::new(header);
    let mut chart = Chart::new("trajectories in the plane").labels("x", "y");
    let mut pts: Vec<Vec<(f64, f64)>> = vec![Vec::new(); dampings.len()];
    for i in every(n + 1, 20) {
        let mut row: Vec<Cell> = vec![trajs[0].times()[i].into()];
        for (k, tr) in trajs.iter().enumerate() {
            let v = tr.value(i);
            row.push(v[0].into());
            row.push(v[1].into());
            pts[k].push((v[0], v[1]));
        }
        curves.push(row);
    }
    for ((label, _), p) in dampings.iter().zip(pts) {
        chart = chart.line(label.as_str(), p);
    }
    Ok(Outcome::new(
        "fig3",
        json!({ "potential": pot, "interval_start": t1, "x0": [1.0, 1.0], "v0": [0.0, 0.0],
                "lengths": FIG3_LENGTHS, "steps_per_unit": FIG3_STEPS_PER_UNIT }),
        json!({ "cases": cases }),
    )
    .note(INITIAL_CONDITIONS)
    .note(
        "eigenvalues are the caption's beta = 2e-2 and mu = 3e-4 taken verbatim; the caption's \
         formula 0.02x^2 + 0.0004y^2 would give Hessian eigenvalues 4e-2 and 8e-4",
    )
    .note("crossover_length is the first conjugate time minus t1 on the longest interval; action is each flow's own Lagrangian")
    .file("trajectory.csv", curves.to_csv())
    .file("table.csv", table.to_csv())
    .file("figure.svg", chart.to_svg()))
}

// ---------------------------------------------------------------------------
// unbounded: J[σh] along fixed triangles around the minimizer.

pub const UNBOUNDED_BETA: f64 = 1.0;
pub const UNBOUNDED_INTERVAL: (f64, f64) = (1.0, 9.0);
pub const UNBOUNDED_SIGMAS: [f64; 4] = [1.0, 10.0, 100.0, 1000.0];
const UNBOUNDED_STEPS: usize = 16_000;

#[derive(Serialize)]
struct UnboundedFamily {
    name: &'static str,
    eps: f64,
    actions: Vec<f64>,
    closed_form: Vec<f64>,
    monotone: bool,
}

/// `J[x* + σh]` for each σ.
pub fn scaled_actions(lag: &LagrangianSpec, h: &Perturbation, sigmas: &[f64], n: usize) -> Result<Vec<f64>> {
    let (t1, t2) = h.interval();
    let xstar = lag.pot.minimizer();
    let base = Trajectory::sample(xstar.len(), t1, t2, n, |_, x, v| {
        x.copy_from_slice(&xstar);
        v.fill(0.0);
    })?;
    sigmas
        .iter()
        .map(|&s| Ok(lag.action(&perturb_curve(&base, &h.scale(s)?)?)?))
        .collect()
}

fn unbounded() -> Result<Outcome> {
    let (t1, t2) = UNBOUNDED_INTERVAL;
    let beta = UNBOUNDED_BETA;
    let witness = indefiniteness_witness(beta, t1, t2)?;
    let lag = LagrangianSpec::new(DampingSchedule::nesterov(), Potential::scalar_quadratic(beta)?);
    let mut table = Table::new(["family", "eps", "sigma", "action", "closed_form"]);
    let mut chart = Chart::new("J[sigma h]")
        .labels("log10 sigma", "sign(J) log10 |J|")
        .hline(0.0);
    let mut fams = Vec::new();
    for (name, eps) in [("small_eps", witness.eps_small), ("large_eps", witness.eps_large)] {
        let h = Perturbation::triangle(witness.c, eps, 1e-3 * eps, t1, t2)?;
        let actions = scaled_actions(&lag, &h, &UNBOUNDED_SIGMAS, UNBOUNDED_STEPS)?;
        let closed: Vec<f64> = UNBOUNDED_SIGMAS
            .iter()
            .map(|&s| triangle_d2j_closed(beta, witness.c, eps, s))
            .collect();
        let monotone = if actions[0] > 0.0 {
            actions.windows(2).all(|w| w[1] > w[0])
        } else {
            actions.windows(2).all(|w| w[1] < w[0])
        };
        for (i, &s) in UNBOUNDED_SIGMAS.iter().enumerate() {
            table.push(vec![name.into(), eps.into(), s.into(), actions[i].into(), closed[i].into()]);
        }
        let pts = UNBOUNDED_SIGMAS
            .iter()
            .zip(&actions)
            .map(|(s, j)| (s.log10(), j.signum() * j.abs().log10()))
            .collect();
        chart = chart.line(name, pts);
        fams.push(UnboundedFamily {
            name,
            eps,
            actions,
            closed_form: closed,
            monotone,
        });
    }
    Ok(Outcome::new(
        "unbounded",
        json!({ "beta": beta, "interval": [t1, t2], "sigmas": UNBOUNDED_SIGMAS, "n_steps": UNBOUNDED_STEPS }),
        json!({ "witness": witness, "families": fams, "threshold_length": (40.0 / beta).sqrt() }),
    )
    .note("curves are x* + sigma h, so the action equals the second variation exactly for this quadratic")
    .file("table.csv", table.to_csv())
    .file("figure.svg", chart.to_svg()))
}

// ---------------------------------------------------------------------------
// poly: conjugate points along the flow on x⁴.

pub const POLY_STARTS: [f64; 7] = [0.01, 1.0, 2.0, 5.0, 10.0, 20.0, 50.0];
pub const POLY_T2: f64 = 200.0;
const POLY_STEPS_PER_UNIT: f64 = 200.0;

#[derive(Serialize)]
struct PolyWindow {
    start: f64,
    first_conjugate_time: Option<f64>,
    /// Windows `[start, start + L]` with `L` below this contain no conjugate point.
    conjugate_free_length: Option<f64>,
}

fn poly() -> Result<Outcome> {
    let pot = Potential::polynomial(1.0, 4, 0.0)?;
    let damping = DampingSchedule::nesterov();
    let t1 = POLY_STARTS[0];
    let n = ((POLY_T2 - t1) * POLY_STEPS_PER_UNIT).round() as usize;
    let base = integrate_flow(&pot, damping, &[1.0], &[0.0], t1, POLY_T2, n)?;
    let spec = LagrangianSpec::new(damping, pot.clone());
    let h = (POLY_T2 - t1) / n as f64;
    let mut windows = Vec::new();
    let mut table = Table::new(["start", "first_conjugate_time", "conjugate_free_length"]);
    for &s in &POLY_STARTS {
        let from = ((s - t1) / h).round() as usize;
        let sub = base.window(from, n)?;
        let steps = (4 * (n - from)).max(1000);
        let roots = conjugate_points_along(&spec, &sub, steps)?;
        let first = roots.first().copied();
        let start = s;
        table.push(vec![start.into(), first.into(), first.map(|t| t - start).into()]);
        windows.push(PolyWindow {
            start,
            first_conjugate_time: first,
            conjugate_free_length: first.map(|t| t - start),
        });
    }
    let mut curves = Table::new(["t", "x", "v", "curvature"]);
    let mut path = Vec::new();
    for i in every(base.len(), 20) {
        let (t, x, v) = (base.times()[i], base.value(i)[0], base.deriv(i)[0]);
        curves.push(vec![t.into(), x.into(), v.into(), (12.0 * x * x).into()]);
        path.push((t, x));
    }
    let lengths: Vec<(f64, f64)> = windows
        .iter()
        .filter_map(|w| w.conjugate_free_length.map(|l| (w.start, l)))
        .collect();
    let chart = Chart::new("conjugate-free window length on x^4")
        .labels("window start", "length")
        .line("length", lengths.clone())
        .markers("length", lengths);
    let path_chart = Chart::new("flow on x^4").labels("t", "X(t)").line("X", path).hline(0.0);
    Ok(Outcome::new(
        "poly",
        json!({ "potential": pot, "damping": damping, "x0": [1.0], "v0": [0.0], "interval": [t1, POLY_T2],
                "starts": POLY_STARTS, "steps_per_unit": POLY_STEPS_PER_UNIT }),
        json!({ "windows": windows }),
    )
    .note(INITIAL_CONDITIONS)
    .note("curvature along the flow is f''(X(t)) = 12 X(t)^2, taken from Hermite interpolation of the base samples")
    .file("trajectory.csv", curves.to_csv())
    .file("table.csv", table.to_csv())
    .file("figure.svg", chart.to_svg())
    .file("flow.svg", path_chart.to_svg()))
}
