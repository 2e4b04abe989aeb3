use serde_json::json;
use vnag_core::jacobi::classify;
use vnag_core::plot::Chart;
use vnag_core::{Classification, DampingSchedule, Verdict};

use crate::config::ExperimentConfig;
use crate::error::Result;
use crate::output::{Outcome, Table};

/// One classification per (potential, damping, interval), in that nesting.
pub fn classifications(cfg: &ExperimentConfig) -> Result<Vec<Classification>> {
    let mut out = Vec::new();
    for pot in cfg.potentials()? {
        for damping in cfg.dampings()? {
            for (t1, t2) in cfg.intervals()? {
                out.push(classify(&pot, damping, t1, t2)?);
            }
        }
    }
    Ok(out)
}

fn verdict_name(v: Verdict) -> &'static str {
    match v {
        Verdict::Minimizer => "minimizer",
        Verdict::Saddle => "saddle",
        Verdict::AtBoundary => "at_boundary",
    }
}

pub fn table(rows: &[Classification]) -> Table {
    let mut t = Table::new([
        "damping",
        "parameter",
        "beta",
        "t1",
        "t2",
        "verdict",
        "binding_eigenvalue",
        "earliest_conjugate_time",
    ]);
    for c in rows {
        let (kind, param) = match c.damping {
            DampingSchedule::Vanishing { c } => ("vanishing", c),
            DampingSchedule::Constant { alpha } => ("constant", alpha),
        };
        let beta = c.directions.iter().map(|d| d.eigenvalue).fold(f64::NAN, f64::max);
        t.push(vec![
            kind.into(),
            param.into(),
            beta.into(),
            c.t1.into(),
            c.t2.into(),
            verdict_name(c.verdict).into(),
            c.binding_eigenvalue.into(),
            c.earliest_conjugate_time.into(),
        ]);
    }
    t
}

fn figure(rows: &[Classification]) -> Chart {
    let mut chart = Chart::new("first conjugate time against interval length")
        .labels("t2 - t1", "first conjugate time - t1");
    let lengths: Vec<f64> = rows.iter().map(|c| c.t2 - c.t1).collect();
    let hi = lengths.iter().copied().fold(0.0, f64::max);
    chart = chart.line("t2", vec![(0.0, 0.0), (hi, hi)]);
    for v in [Verdict::Minimizer, Verdict::AtBoundary, Verdict::Saddle] {
        let pts: Vec<(f64, f64)> = rows
            .iter()
            .filter(|c| c.verdict == v)
            .filter_map(|c| c.earliest_conjugate_time.map(|t| (c.t2 - c.t1, t - c.t1)))
            .collect();
        if !pts.is_empty() {
            chart = chart.markers(verdict_name(v), pts);
        }
    }
    chart
}

pub fn run(cfg: &ExperimentConfig) -> Result<Outcome> {
    let rows = classifications(cfg)?;
    let mut outcome = Outcome::new(
        cfg.experiment.clone().unwrap_or_else(|| "classify".into()),
        json!(cfg),
        json!({ "classifications": rows }),
    )
    .file("table.csv", table(&rows).to_csv())
    .file("figure.svg", figure(&rows).to_svg());
    outcome.report.verdicts = rows.iter().map(|c| c.verdict).collect();
    if rows.iter().any(|c| c.earliest_conjugate_time.is_none()) {
        outcome = outcome.note("directions without a conjugate point are omitted from the figure");
    }
    Ok(outcome)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_has_one_row_per_case() {
        let cfg = ExperimentConfig::from_json(
            r#"{"interval": [1, 2], "sweep": {"beta": [10], "length": [1.9, 2.1]}}"#,
        )
        .unwrap();
        let rows = classifications(&cfg).unwrap();
        assert_eq!(rows.len(), 2);
        assert_eq!(rows[1].verdict, Verdict::Saddle);
        let csv = table(&rows).to_csv();
        assert_eq!(csv.lines().count(), 3);
    }
}
