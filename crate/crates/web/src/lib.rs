//! WebAssembly bindings for the interactive demo page in `www/`.
//!
//! Every export returns a self-contained SVG string. The plain Rust
//! functions behind them are public so they can be tested natively.

use vnag_core::jacobi::{
    conjugate_points_closed, conjugate_points_shooting, epsilon_star, first_conjugate_time,
    solve_jacobi, triangle_d2j_closed,
};
use vnag_core::plot::Chart;
use vnag_core::{DampingSchedule, LagrangianSpec, Perturbation, Potential, Result};
use wasm_bindgen::prelude::*;

const SAMPLES: usize = 400;

fn damping(constant: bool, param: f64) -> Result<DampingSchedule> {
    if constant {
        DampingSchedule::constant(param)
    } else {
        DampingSchedule::vanishing(param)
    }
}

/// Jacobi field vanishing at `t1` on `[t1, t2]`, with its conjugate points marked.
pub fn jacobi_chart(beta: f64, t1: f64, t2: f64, constant: bool, param: f64) -> Result<String> {
    let d = damping(constant, param)?;
    let h = solve_jacobi(d, |_| beta, t1, t2, 20 * SAMPLES, 0.0, 1.0)?;
    let every = h.len() / SAMPLES;
    let curve: Vec<(f64, f64)> = (0..h.len())
        .step_by(every.max(1))
        .map(|i| (h.times()[i], h.value(i)[0]))
        .collect();
    let spec = LagrangianSpec::new(d, Potential::scalar_quadratic(beta)?);
    let report = match conjugate_points_closed(d, beta, t1, t2) {
        Ok(r) => r,
        Err(_) => conjugate_points_shooting(&spec, beta, t1, t2, 20 * SAMPLES)?,
    };
    let marks = report.conjugate_times.iter().map(|&t| (t, 0.0)).collect();
    let title = match report.conjugate_times.first() {
        Some(t) => format!("Jacobi field: first conjugate point at t = {t:.4}, saddle on [t1, t2]"),
        None => "Jacobi field: no conjugate point, minimizer on [t1, t2]".to_string(),
    };
    Ok(Chart::new(title)
        .labels("t", "h(t)")
        .line("h", curve)
        .markers("conjugate points", marks)
        .hline(0.0)
        .to_svg())
}

/// δ²J of the unit triangle bump against its half-width, with the sign change marked.
pub fn triangle_chart(beta: f64, c: f64) -> Result<String> {
    let spec = LagrangianSpec::new(DampingSchedule::nesterov(), Potential::scalar_quadratic(beta)?);
    let (t1, t2) = (0.05 * c, 2.0 * c);
    let top = 0.95 * (c - t1);
    let mut closed = Vec::with_capacity(SAMPLES);
    let mut quadrature = Vec::new();
    for i in 1..=SAMPLES {
        let eps = top * i as f64 / SAMPLES as f64;
        closed.push((eps, triangle_d2j_closed(beta, c, eps, 1.0)));
        if i % 20 == 0 {
            let h = Perturbation::triangle(c, eps, eps / 1000.0, t1, t2)?;
            quadrature.push((eps, spec.second_variation(t1, t2, &h)?));
        }
    }
    let star = epsilon_star(beta * c * c, beta)?;
    let mut chart = Chart::new(format!("triangle second variation, eps* = {star:.4}"))
        .labels("eps", "second variation")
        .line("closed form", closed)
        .markers("quadrature", quadrature)
        .hline(0.0);
    if star <= top {
        chart = chart.vline(star);
    }
    Ok(chart.to_svg())
}

/// Trajectory of the flow on `f = βx²/2` from `x(t1) = 1`, together with `t^p f(X)`.
pub fn trajectory_chart(beta: f64, constant: bool, param: f64, t1: f64, t2: f64) -> Result<String> {
    let d = damping(constant, param)?;
    let pot = Potential::scalar_quadratic(beta)?;
    let traj = vnag_core::dynamics::integrate_flow(&pot, d, &[1.0], &[0.0], t1, t2, 20 * SAMPLES)?;
    let every = (traj.len() / SAMPLES).max(1);
    let mut xs = Vec::new();
    let mut scaled = Vec::new();
    for i in (0..traj.len()).step_by(every) {
        let t = traj.times()[i];
        let x = traj.value(i)[0];
        xs.push((t, x));
        scaled.push((t, t * t * pot.eval(&[x])?));
    }
    let first = first_conjugate_time(d, beta, t1)?;
    let mut chart = Chart::new("flow on a scalar quadratic")
        .labels("t", "X(t) and t^2 f(X(t))")
        .line("X", xs)
        .line("t^2 f", scaled)
        .hline(0.0);
    if let Some(t) = first.filter(|&t| t <= t2) {
        chart = chart.vline(t);
    }
    Ok(chart.to_svg())
}

fn js(r: Result<String>) -> std::result::Result<String, JsValue> {
    r.map_err(|e| JsValue::from_str(&e.to_string()))
}

#[wasm_bindgen(js_name = jacobiSvg)]
pub fn jacobi_svg(beta: f64, t1: f64, t2: f64, constant: bool, param: f64) -> std::result::Result<String, JsValue> {
    js(jacobi_chart(beta, t1, t2, constant, param))
}

#[wasm_bindgen(js_name = triangleSvg)]
pub fn triangle_svg(beta: f64, c: f64) -> std::result::Result<String, JsValue> {
    js(triangle_chart(beta, c))
}

#[wasm_bindgen(js_name = trajectorySvg)]
pub fn trajectory_svg(beta: f64, constant: bool, param: f64, t1: f64, t2: f64) -> std::result::Result<String, JsValue> {
    js(trajectory_chart(beta, constant, param, t1, t2))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn jacobi_chart_reports_conjugate_point() {
        let svg = jacobi_chart(1.0, 1.0, 10.0, false, 3.0).unwrap();
        assert!(svg.starts_with("<svg"));
        assert!(svg.contains("first conjugate point"));
        let svg = jacobi_chart(1.0, 1.0, 10.0, true, 2.0).unwrap();
        assert!(svg.contains("no conjugate point"));
    }

    #[test]
    fn triangle_chart_marks_sign_change() {
        let svg = triangle_chart(1.0, 5.0).unwrap();
        let star = epsilon_star(25.0, 1.0).unwrap();
        assert!(svg.contains(&format!("{star:.4}")));
    }

    #[test]
    fn trajectory_chart_rejects_bad_input() {
        assert!(trajectory_chart(1.0, false, 3.0, 0.01, 20.0).is_ok());
        assert!(trajectory_chart(-1.0, false, 3.0, 0.01, 20.0).is_err());
        assert!(trajectory_chart(1.0, false, 3.0, 0.0, 20.0).is_err());
    }
}
