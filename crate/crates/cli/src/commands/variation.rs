use serde::Serialize;
use serde_json::json;
use vnag_core::dynamics::integrate_flow;
use vnag_core::jacobi::{epsilon_star, sinusoid_d2j_closed, triangle_d2j_closed};
use vnag_core::perturbations::Shape;
use vnag_core::plot::Chart;
use vnag_core::{DampingSchedule, LagrangianSpec, PerturbationSpec, Potential};

use crate::config::ExperimentConfig;
use crate::error::{CliError, Result};
use crate::output::{Cell, Outcome, Table};

#[derive(Clone, Debug, Serialize)]
pub struct Row {
    pub potential: Potential,
    pub perturbation: PerturbationSpec,
    pub quadrature: f64,
    pub closed_form: Option<f64>,
    pub relative_difference: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct SignChange {
    pub potential: Potential,
    pub c: f64,
    pub sigma: f64,
    pub bracket: [f64; 2],
    pub epsilon_star: Option<f64>,
}

/// Configured perturbations followed by the swept ones: triangles over
/// `c × eps`, then sinusoids over `k`, each repeated per `sigma`.
pub fn perturbation_list(cfg: &ExperimentConfig, t1: f64, t2: f64) -> Vec<PerturbationSpec> {
    let sw = &cfg.sweep;
    let sigmas = if sw.sigma.is_empty() { vec![1.0] } else { sw.sigma.clone() };
    let centres = if sw.c.is_empty() { vec![0.5 * (t1 + t2)] } else { sw.c.clone() };
    let mut out = cfg.perturbations.clone();
    for &c in &centres {
        for &eps in &sw.eps {
            for &s in &sigmas {
                out.push(PerturbationSpec::triangle(c, eps).with_sigma(s));
            }
        }
    }
    for &k in &sw.k {
        for &s in &sigmas {
            out.push(PerturbationSpec::sinusoid(k).with_sigma(s));
        }
    }
    out
}

/// The closed form of δ²J where one is known: triangles under `3/t` damping
/// and sinusoids under `α = 1` with unit curvature, both on quadratics.
pub fn closed_form(
    pot: &Potential,
    damping: DampingSchedule,
    h: &PerturbationSpec,
    t1: f64,
    t2: f64,
) -> Option<f64> {
    let Potential::QuadraticDiagonal { eigenvalues, .. } = pot else {
        return None;
    };
    let dir = h.direction.clone().unwrap_or_else(|| vec![1.0; eigenvalues.len()]);
    if dir.len() != eigenvalues.len() {
        return None;
    }
    let weighted = dir.iter().zip(eigenvalues).filter(|(d, _)| **d != 0.0);
    match (&h.shape, damping) {
        (Shape::Triangle { c, eps, .. }, DampingSchedule::Vanishing { c: w }) if w == 3.0 => Some(
            weighted
                .map(|(d, &l)| d * d * triangle_d2j_closed(l, *c, *eps, h.sigma))
                .sum(),
        ),
        (Shape::Sinusoid { k }, DampingSchedule::Constant { alpha }) if alpha == 1.0 => {
            let mut total = 0.0;
            for (d, &l) in weighted {
                if l != 1.0 {
                    return None;
                }
                total += d * d * sinusoid_d2j_closed(t1, t2, *k, h.sigma);
            }
            Some(total)
        }
        _ => None,
    }
}

pub fn rows(cfg: &ExperimentConfig) -> Result<Vec<Row>> {
    let (t1, t2) = cfg.require_interval()?;
    let damping = cfg.damping_or_default();
    let specs = perturbation_list(cfg, t1, t2);
    if specs.is_empty() {
        return Err(CliError::config(
            "no perturbations: give `perturbations` or `sweep.eps`/`sweep.k`",
        ));
    }
    let mut rows = Vec::new();
    for pot in cfg.potentials()? {
        let lag = LagrangianSpec::new(damping, pot.clone());
        let base = if pot.is_quadratic() {
            None
        } else {
            let (x0, v0) = cfg.initial_state(pot.dim())?;
            Some(integrate_flow(&pot, damping, &x0, &v0, t1, t2, cfg.n_steps_or_default())?)
        };
        for spec in &specs {
            let h = spec.build(t1, t2)?;
            let quadrature = match &base {
                None => lag.second_variation(t1, t2, &h)?,
                Some(b) => lag.second_variation_along(b, &h)?,
            };
            let closed = closed_form(&pot, damping, spec, t1, t2);
            rows.push(Row {
                potential: pot.clone(),
                perturbation: spec.clone(),
                quadrature,
                closed_form: closed,
                relative_difference: closed.map(|c| relative(quadrature, c)),
            });
        }
    }
    Ok(rows)
}

pub fn relative(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / a.abs().max(b.abs())
    }
}

/// Consecutive-ε sign flips of triangle δ²J at fixed potential, centre and σ.
pub fn sign_changes(rows: &[Row], damping: DampingSchedule) -> Vec<SignChange> {
    let mut groups: Vec<(Potential, f64, f64, Vec<(f64, f64)>)> = Vec::new();
    for r in rows {
        let Shape::Triangle { c, eps, .. } = r.perturbation.shape else {
            continue;
        };
        let s = r.perturbation.sigma;
        match groups
            .iter_mut()
            .find(|g| g.0 == r.potential && g.1 == c && g.2 == s)
        {
            Some(g) => g.3.push((eps, r.quadrature)),
            None => groups.push((r.potential.clone(), c, s, vec![(eps, r.quadrature)])),
        }
    }
    let mut out = Vec::new();
    for (pot, c, sigma, mut pts) in groups {
        pts.sort_by(|a, b| a.0.total_cmp(&b.0));
        let star = match (&pot, damping) {
            (Potential::QuadraticDiagonal { eigenvalues, .. }, DampingSchedule::Vanishing { c: w })
                if w == 3.0 && eigenvalues.len() == 1 =>
            {
                epsilon_star(eigenvalues[0] * c * c, eigenvalues[0]).ok()
            }
            _ => None,
        };
        for w in pts.windows(2) {
            if w[0].1.signum() != w[1].1.signum() && w[0].1 != 0.0 && w[1].1 != 0.0 {
                out.push(SignChange {
                    potential: pot.clone(),
                    c,
                    sigma,
                    bracket: [w[0].0, w[1].0],
                    epsilon_star: star,
                });
            }
        }
    }
    out
}

fn describe(p: &Potential) -> String {
    match p {
        Potential::QuadraticDiagonal { eigenvalues, .. } => {
            let l: Vec<String> = eigenvalues.iter().map(|v| v.to_string()).collect();
            format!("quadratic[{}]", l.join(" "))
        }
        Potential::Polynomial1D { a, p, .. } => format!("polynomial[a={a} p={p}]"),
        Potential::Zero { dim } => format!("zero[{dim}]"),
    }
}

pub fn table(rows: &[Row]) -> Table {
    let mut t = Table::new([
        "potential",
        "kind",
        "c",
        "eps",
        "k",
        "sigma",
        "quadrature",
        "closed_form",
        "relative_difference",
    ]);
    for r in rows {
        let (kind, c, eps, k): (&str, Cell, Cell, Cell) = match &r.perturbation.shape {
            Shape::Triangle { c, eps, .. } => ("triangle", (*c).into(), (*eps).into(), Cell::Empty),
            Shape::Sinusoid { k } => ("sinusoid", Cell::Empty, Cell::Empty, (*k).into()),
            Shape::Fourier { .. } => ("fourier", Cell::Empty, Cell::Empty, Cell::Empty),
        };
        t.push(vec![
            describe(&r.potential).into(),
            kind.into(),
            c,
            eps,
            k,
            r.perturbation.sigma.into(),
            r.quadrature.into(),
            r.closed_form.into(),
            r.relative_difference.into(),
        ]);
    }
    t
}

fn figure(rows: &[Row], changes: &[SignChange]) -> Chart {
    let mut chart = Chart::new("second variation").hline(0.0);
    let mut any_triangle = false;
    let mut seen: Vec<(Potential, f64, f64)> = Vec::new();
    for r in rows {
        let Shape::Triangle { c, .. } = r.perturbation.shape else {
            continue;
        };
        any_triangle = true;
        let key = (r.potential.clone(), c, r.perturbation.sigma);
        if seen.contains(&key) {
            continue;
        }
        let mut pts: Vec<(f64, f64)> = rows
            .iter()
            .filter_map(|q| match q.perturbation.shape {
                Shape::Triangle { c: qc, eps, .. }
                    if q.potential == key.0 && qc == key.1 && q.perturbation.sigma == key.2 =>
                {
                    Some((eps, q.quadrature))
                }
                _ => None,
            })
            .collect();
        pts.sort_by(|a, b| a.0.total_cmp(&b.0));
        chart = chart.line(format!("{} c={}", describe(&key.0), key.1), pts);
        seen.push(key);
    }
    if any_triangle {
        for s in changes {
            if let Some(e) = s.epsilon_star {
                chart = chart.vline(e);
            }
        }
        chart.labels("eps", "d2J")
    } else {
        let pts = rows.iter().enumerate().map(|(i, r)| (i as f64, r.quadrature)).collect();
        chart.markers("d2J", pts).labels("perturbation", "d2J")
    }
}

pub fn run(cfg: &ExperimentConfig) -> Result<Outcome> {
    let rows = rows(cfg)?;
    let damping = cfg.damping_or_default();
    let changes = sign_changes(&rows, damping);
    let mut outcome = Outcome::new(
        cfg.experiment.clone().unwrap_or_else(|| "second-variation".into()),
        json!(cfg),
        json!({ "rows": rows, "sign_changes": changes }),
    )
    .file("table.csv", table(&rows).to_csv())
    .file("figure.svg", figure(&rows, &changes).to_svg());
    if rows.iter().any(|r| r.closed_form.is_none()) {
        outcome = outcome.note(
            "closed_form is null where no closed form applies (triangles need 3/t damping, \
             sinusoids need alpha = 1 and unit curvature)",
        );
    }
    if rows.iter().any(|r| !r.potential.is_quadratic()) {
        outcome = outcome.note("non-quadratic potentials are expanded around the integrated flow");
    }
    Ok(outcome)
}
