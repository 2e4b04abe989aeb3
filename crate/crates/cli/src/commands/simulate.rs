use serde_json::json;
use vnag_core::dynamics::{self, check_ideal_scaling, constant_damping_exact};
use vnag_core::plot::Chart;
use vnag_core::{DampingSchedule, Potential, Trajectory};

use crate::config::ExperimentConfig;
use crate::error::Result;
use crate::output::Outcome;

pub fn run(cfg: &ExperimentConfig) -> Result<Outcome> {
    let pot = cfg.require_potential()?;
    let (t1, t2) = cfg.require_interval()?;
    let n = cfg.n_steps_or_default();
    let (x0, v0) = cfg.initial_state(pot.dim())?;

    let mut outputs = serde_json::Map::new();
    let traj = match &cfg.bregman {
        Some(preset) => {
            let params = preset.params()?;
            let traj = dynamics::integrate_bregman_flow(&params, pot, &x0, &v0, t1, t2, n)?;
            outputs.insert(
                "ideal_scaling".into(),
                json!(check_ideal_scaling(&params, traj.times())?),
            );
            traj
        }
        None => {
            let damping = cfg.damping_or_default();
            let traj = dynamics::integrate_flow(pot, damping, &x0, &v0, t1, t2, n)?;
            let residual = if traj.len() >= 4 {
                Some(dynamics::el_residual(&traj, pot, damping)?)
            } else {
                None
            };
            outputs.insert("el_residual".into(), json!(residual));
            if let DampingSchedule::Constant { alpha } = damping {
                if pot.is_quadratic() {
                    outputs.insert(
                        "closed_form_max_error".into(),
                        json!(closed_form_error(&traj, pot, alpha, &x0, &v0)?),
                    );
                }
            }
            traj
        }
    };
    let last = traj.len() - 1;
    outputs.insert("n_rows".into(), json!(traj.len()));
    outputs.insert("final_x".into(), json!(traj.value(last)));
    outputs.insert("final_f".into(), json!(pot.eval(traj.value(last))?));

    let mut outcome = Outcome::new(
        cfg.experiment.clone().unwrap_or_else(|| "simulate".into()),
        json!(cfg),
        outputs.into(),
    )
    .file("trajectory.csv", traj.to_csv())
    .file("figure.svg", figure(&traj).to_svg());
    if cfg.x0.is_none() || cfg.v0.is_none() {
        outcome = outcome.note("unspecified initial conditions default to x0 = 1, v0 = 0");
    }
    Ok(outcome)
}

/// Largest deviation from the exact constant-damping solution on the grid.
pub fn closed_form_error(
    traj: &Trajectory,
    pot: &Potential,
    alpha: f64,
    x0: &[f64],
    v0: &[f64],
) -> Result<f64> {
    let t1 = traj.t1();
    let mut worst: f64 = 0.0;
    for (i, &t) in traj.times().iter().enumerate() {
        let (x, _) = constant_damping_exact(pot, alpha, x0, v0, t1, t)?;
        for (a, b) in x.iter().zip(traj.value(i)) {
            worst = worst.max((a - b).abs());
        }
    }
    Ok(worst)
}

fn figure(traj: &Trajectory) -> Chart {
    let stride = (traj.len() / 2000).max(1);
    let mut chart = Chart::new("flow").labels("t", "X(t)");
    for k in 0..traj.dim() {
        let pts = (0..traj.len())
            .step_by(stride)
            .chain(std::iter::once(traj.len() - 1))
            .map(|i| (traj.times()[i], traj.value(i)[k]))
            .collect();
        chart = chart.line(format!("x_{k}"), pts);
    }
    chart
}
