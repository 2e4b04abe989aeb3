//! Bessel functions of order one, `J1` and `Y1`.
//!
//! Below [`SERIES_LIMIT`] both functions are summed from their power series.
//! The alternating terms grow to ~1e7 before decaying at the upper end of
//! that range, so the sums are carried in double-double arithmetic and only
//! rounded once at the end. Above the limit the Hankel asymptotic expansion
//! is used, truncated at its smallest term.

use std::f64::consts::{FRAC_2_PI, PI};

use crate::error::{Error, Result};

/// Crossover between the power series and the asymptotic expansion.
pub const SERIES_LIMIT: f64 = 20.0;

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Bessel function of the first kind of order one.
pub fn bessel_j1(x: f64) -> Result<f64> {
    if x.is_nan() || x < 0.0 {
        return Err(Error::InvalidParameter(format!("j1 requires x >= 0, got {x}")));
    }
    Ok(j1(x))
}

/// Bessel function of the second kind of order one.
pub fn bessel_y1(x: f64) -> Result<f64> {
    if x.is_nan() || x <= 0.0 {
        return Err(Error::InvalidParameter(format!("y1 requires x > 0, got {x}")));
    }
    Ok(y1(x))
}

/// Unchecked `J1` for `x >= 0`.
pub(crate) fn j1(x: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else if x < SERIES_LIMIT {
        series(x).0
    } else {
        let (p, q) = hankel_pq(x);
        let (s, c) = x.sin_cos();
        // cos(x - 3π/4) and sin(x - 3π/4) without reducing x - 3π/4.
        let cos_chi = (s - c) * std::f64::consts::FRAC_1_SQRT_2;
        let sin_chi = -(s + c) * std::f64::consts::FRAC_1_SQRT_2;
        (FRAC_2_PI / x).sqrt() * (p * cos_chi - q * sin_chi)
    }
}

/// Unchecked `Y1` for `x > 0`.
pub(crate) fn y1(x: f64) -> f64 {
    if x < SERIES_LIMIT {
        let (j, s) = series(x);
        FRAC_2_PI * j * ((0.5 * x).ln() + EULER_GAMMA) - FRAC_2_PI / x - s / PI
    } else {
        let (p, q) = hankel_pq(x);
        let (s, c) = x.sin_cos();
        let cos_chi = (s - c) * std::f64::consts::FRAC_1_SQRT_2;
        let sin_chi = -(s + c) * std::f64::consts::FRAC_1_SQRT_2;
        (FRAC_2_PI / x).sqrt() * (p * sin_chi + q * cos_chi)
    }
}

/// Returns `J1(x)` and `Σ_k (H_k + H_{k+1}) (-1)^k (x/2)^{2k+1} / (k!(k+1)!)`
/// where `H_k` is the k-th harmonic number.
fn series(x: f64) -> (f64, f64) {
    let half = Dd::from(0.5 * x);
    let q = -half * half;
    let mut term = half;
    let mut j = term;
    // H_0 + H_1 = 1
    let mut s = term;
    let mut h_k = Dd::from(0.0);
    for k in 1..200u32 {
        let kf = k as f64;
        term = (term * q).div_f64(kf * (kf + 1.0));
        h_k = h_k + Dd::from(1.0).div_f64(kf);
        let h_next = h_k + Dd::from(1.0).div_f64(kf + 1.0);
        j = j + term;
        s = s + term * (h_k + h_next);
        if k > 2 && term.hi.abs() < 1e-34 * j.hi.abs().max(1e-300) {
            break;
        }
    }
    (j.to_f64(), s.to_f64())
}

/// Hankel `P` and `Q` for order one.
fn hankel_pq(x: f64) -> (f64, f64) {
    const MU: f64 = 4.0;
    let mut p = 1.0;
    let mut q = 0.0;
    let mut a = 1.0;
    let mut prev = f64::INFINITY;
    let inv8x = 1.0 / (8.0 * x);
    for k in 1..200u32 {
        let odd = (2 * k - 1) as f64;
        a *= (MU - odd * odd) * inv8x / k as f64;
        let mag = a.abs();
        if mag > prev {
            break;
        }
        prev = mag;
        // a_k / x^k enters P (even k) or Q (odd k) with sign (-1)^{floor(k/2)}.
        let sign = if (k / 2) % 2 == 0 { 1.0 } else { -1.0 };
        if k % 2 == 0 {
            p += sign * a;
        } else {
            q += sign * a;
        }
        if mag < 1e-18 {
            break;
        }
    }
    (p, q)
}

/// Unevaluated sum `hi + lo` with `|lo| <= ulp(hi) / 2`.
#[derive(Clone, Copy, Debug)]
struct Dd {
    hi: f64,
    lo: f64,
}

impl Dd {
    fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    fn div_f64(self, d: f64) -> Dd {
        let q1 = self.hi / d;
        let (p, e) = two_prod(q1, d);
        let r = (self.hi - p - e + self.lo) / d;
        quick_two_sum(q1, r)
    }
}

impl From<f64> for Dd {
    fn from(v: f64) -> Self {
        Dd { hi: v, lo: 0.0 }
    }
}

impl std::ops::Add for Dd {
    type Output = Dd;
    fn add(self, o: Dd) -> Dd {
        let (s, e) = two_sum(self.hi, o.hi);
        let (t, f) = two_sum(self.lo, o.lo);
        let r = quick_two_sum(s, e + t);
        quick_two_sum(r.hi, r.lo + f)
    }
}

impl std::ops::Mul for Dd {
    type Output = Dd;
    fn mul(self, o: Dd) -> Dd {
        let (p, e) = two_prod(self.hi, o.hi);
        quick_two_sum(p, e + (self.hi * o.lo + self.lo * o.hi))
    }
}

impl std::ops::Neg for Dd {
    type Output = Dd;
    fn neg(self) -> Dd {
        Dd { hi: -self.hi, lo: -self.lo }
    }
}

fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

fn quick_two_sum(a: f64, b: f64) -> Dd {
    let s = a + b;
    Dd { hi: s, lo: b - (s - a) }
}

fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn domain_errors() {
        assert!(bessel_j1(-1.0).is_err());
        assert!(bessel_y1(0.0).is_err());
        assert!(bessel_y1(-2.0).is_err());
        assert_eq!(bessel_j1(0.0).unwrap(), 0.0);
    }

    #[test]
    fn j1_at_one_matches_plain_series() {
        // Power series summed directly; no cancellation at x = 1.
        let mut term = 0.5;
        let mut sum = 0.0;
        for m in 0..30 {
            sum += term;
            let m = m as f64;
            term *= -0.25 / ((m + 1.0) * (m + 2.0));
        }
        assert!((sum - 0.4400505857449335).abs() < 1e-15);
        assert!((bessel_j1(1.0).unwrap() - sum).abs() < 1e-15);
    }

    #[test]
    fn regimes_agree_at_crossover() {
        for x in [19.5, 20.0, 20.5, 21.0] {
            let (j_s, s) = series(x);
            let y_s = FRAC_2_PI * j_s * ((0.5 * x).ln() + EULER_GAMMA) - FRAC_2_PI / x - s / PI;
            let (p, q) = hankel_pq(x);
            let amp = (FRAC_2_PI / x).sqrt();
            let chi = x - 0.75 * PI;
            let j_a = amp * (p * chi.cos() - q * chi.sin());
            let y_a = amp * (p * chi.sin() + q * chi.cos());
            assert!((j_s - j_a).abs() < 1e-14, "x={x} {j_s} {j_a}");
            assert!((y_s - y_a).abs() < 1e-14, "x={x} {y_s} {y_a}");
        }
    }

    #[test]
    fn wronskian() {
        // J1 Y1' - J1' Y1 = 2/(πx)
        for x in [0.3f64, 2.0, 7.5, 15.0, 33.0, 120.0] {
            let h = 1e-5 * x.max(1.0);
            let dj = (j1(x + h) - j1(x - h)) / (2.0 * h);
            let dy = (y1(x + h) - y1(x - h)) / (2.0 * h);
            let w = j1(x) * dy - dj * y1(x);
            assert!((w - FRAC_2_PI / x).abs() < 1e-7 * FRAC_2_PI / x + 1e-9, "x={x}");
        }
    }
}
