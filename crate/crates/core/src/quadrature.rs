//! Composite Simpson quadrature on uniform and piecewise-uniform grids.

use crate::error::{invalid, Error, Result};

/// Panel density used when a grid is built from scratch for an analytic
/// integrand.
pub const DEFAULT_PANELS_PER_UNIT: f64 = 2000.0;
/// Smallest number of Simpson panels placed on any piece.
pub const MIN_PANELS: usize = 256;

/// A closed interval `[a, b]` split into `n` equal panels (`n` even).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Piece {
    pub a: f64,
    pub b: f64,
    pub n: usize,
}

impl Piece {
    pub fn step(&self) -> f64 {
        (self.b - self.a) / self.n as f64
    }

    pub fn node(&self, i: usize) -> f64 {
        if i == self.n {
            self.b
        } else {
            self.a + self.step() * i as f64
        }
    }
}

/// Simpson weights applied to samples on a uniform grid with spacing `h`.
pub fn simpson_samples(values: &[f64], h: f64) -> Result<f64> {
    let intervals = values.len().saturating_sub(1);
    if intervals < 2 || intervals % 2 != 0 {
        return Err(Error::Grid(format!(
            "Simpson's rule needs an even number of intervals, got {intervals}"
        )));
    }
    let mut odd = 0.0;
    let mut even = 0.0;
    for (i, v) in values.iter().enumerate().take(intervals).skip(1) {
        if i % 2 == 1 {
            odd += v;
        } else {
            even += v;
        }
    }
    Ok(h / 3.0 * (values[0] + values[intervals] + 4.0 * odd + 2.0 * even))
}

/// Composite Simpson rule for `f` on `[a, b]` with `n` panels.
pub fn simpson<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, n: usize) -> Result<f64> {
    if n < 2 || n % 2 != 0 {
        return Err(invalid(format!("panel count must be even and >= 2, got {n}")));
    }
    if !(b > a) {
        return Err(invalid(format!("empty interval [{a}, {b}]")));
    }
    let piece = Piece { a, b, n };
    let h = piece.step();
    let mut sum = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        sum += w * f(piece.node(i));
    }
    Ok(sum * h / 3.0)
}

/// Splits `[t1, t2]` at every breakpoint strictly inside it and gives each
/// piece an even panel count with spacing no larger than `max_step`.
pub fn split_grid(t1: f64, t2: f64, breaks: &[f64], max_step: f64) -> Result<Vec<Piece>> {
    if !(t2 > t1) {
        return Err(invalid(format!("empty interval [{t1}, {t2}]")));
    }
    if !(max_step > 0.0) {
        return Err(invalid("max_step must be positive"));
    }
    let mut points: Vec<f64> = breaks
        .iter()
        .copied()
        .filter(|&b| b > t1 && b < t2)
        .collect();
    points.push(t1);
    points.push(t2);
    points.sort_by(|a, b| a.partial_cmp(b).unwrap());
    points.dedup_by(|a, b| (*a - *b).abs() <= 1e-14 * (1.0 + b.abs()));

    let pieces = points
        .windows(2)
        .map(|w| {
            let len = w[1] - w[0];
            let mut n = (len / max_step).ceil() as usize;
            n = n.max(2);
            if n % 2 == 1 {
                n += 1;
            }
            Piece { a: w[0], b: w[1], n }
        })
        .collect();
    Ok(pieces)
}

/// Integrates an analytic integrand over `[t1, t2]`, splitting at `breaks`.
pub fn integrate_split<F: FnMut(f64) -> f64>(
    mut f: F,
    t1: f64,
    t2: f64,
    breaks: &[f64],
    panels_per_unit: f64,
) -> Result<f64> {
    let pieces = split_grid(t1, t2, breaks, 1.0 / panels_per_unit)?;
    let mut total = 0.0;
    for p in pieces {
        total += simpson(&mut f, p.a, p.b, p.n.max(MIN_PANELS))?;
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cubic_is_exact() {
        let v = simpson(|t| t * t * t - 2.0 * t + 1.0, 0.0, 2.0, 2).unwrap();
        assert!((v - (4.0 - 4.0 + 2.0)).abs() < 1e-14);
    }

    #[test]
    fn odd_sample_count_rejected() {
        assert!(simpson_samples(&[1.0, 2.0, 3.0, 4.0], 0.1).is_err());
        assert!(simpson(|t| t, 0.0, 1.0, 3).is_err());
    }

    #[test]
    fn fourth_order_convergence() {
        let exact = 1.0 - (1.0f64).cos();
        let e1 = (simpson(f64::sin, 0.0, 1.0, 8).unwrap() - exact).abs();
        let e2 = (simpson(f64::sin, 0.0, 1.0, 16).unwrap() - exact).abs();
        let ratio = e1 / e2;
        assert!(ratio > 14.0 && ratio < 18.0, "ratio {ratio}");
    }

    #[test]
    fn split_respects_breaks() {
        let pieces = split_grid(0.0, 1.0, &[0.25, 0.5, 2.0, -1.0], 0.1).unwrap();
        assert_eq!(pieces.len(), 3);
        assert_eq!(pieces[0].b, 0.25);
        assert!(pieces.iter().all(|p| p.n % 2 == 0 && p.step() <= 0.1 + 1e-15));
    }

    #[test]
    fn kinked_integrand_exact_with_breaks() {
        let f = |t: f64| (t - 0.3).abs();
        let exact = 0.3 * 0.3 / 2.0 + 0.7 * 0.7 / 2.0;
        let v = integrate_split(f, 0.0, 1.0, &[0.3], 10.0).unwrap();
        assert!((v - exact).abs() < 1e-14);
    }
}
