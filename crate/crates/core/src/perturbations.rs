//! Admissible displacements `h` with `h(t1) = h(t2) = 0`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dynamics::Trajectory;
use crate::error::{invalid, Error, Result};
use crate::quadrature::{split_grid, MIN_PANELS};

/// Points used for the sampled sup-norm.
pub const SUP_NORM_SAMPLES: usize = 10_000;
/// Default blend half-width as a fraction of `ε`.
pub const DEFAULT_DELTA_RATIO: f64 = 1e-3;
/// Largest allowed blend half-width as a fraction of `ε`.
pub const MAX_DELTA_RATIO: f64 = 1e-2;

/// Shape of the C¹ blend that rounds each triangle corner.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Blend {
    /// Quadratic blend plus a zero-mean cubic correction chosen so that
    /// `∫ḣ²` over the corner equals that of the sharp corner.
    #[default]
    Energy,
    /// Plain quadratic blend (`ḣ` piecewise linear).
    Quadratic,
}

/// Profile of a perturbation before it is placed on an interval.
#[derive(Clone, Debug, PartialEq)]
pub enum Shape {
    Triangle {
        c: f64,
        eps: f64,
        delta: Option<f64>,
        blend: Blend,
    },
    Sinusoid {
        k: u32,
    },
    Fourier {
        seed: u64,
        n_modes: usize,
        decay: f64,
    },
}

/// Descriptor of a perturbation as it appears in configuration files.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SpecRepr", into = "SpecRepr")]
pub struct PerturbationSpec {
    pub shape: Shape,
    pub sigma: f64,
    /// Direction in `ℝ^d` along which the scalar profile acts; all ones when
    /// absent.
    pub direction: Option<Vec<f64>>,
}

fn one() -> f64 {
    1.0
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
enum SpecRepr {
    Triangle {
        c: f64,
        eps: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        delta: Option<f64>,
        #[serde(default)]
        blend: Blend,
        #[serde(default = "one")]
        sigma: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        direction: Option<Vec<f64>>,
    },
    Sinusoid {
        k: u32,
        #[serde(default = "one")]
        sigma: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        direction: Option<Vec<f64>>,
    },
    Fourier {
        seed: u64,
        n_modes: usize,
        decay: f64,
        #[serde(default = "one")]
        sigma: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        direction: Option<Vec<f64>>,
    },
}

impl TryFrom<SpecRepr> for PerturbationSpec {
    type Error = Error;

    fn try_from(r: SpecRepr) -> Result<Self> {
        let (shape, sigma, direction) = match r {
            SpecRepr::Triangle {
                c,
                eps,
                delta,
                blend,
                sigma,
                direction,
            } => (
                Shape::Triangle {
                    c,
                    eps,
                    delta,
                    blend,
                },
                sigma,
                direction,
            ),
            SpecRepr::Sinusoid { k, sigma, direction } => (Shape::Sinusoid { k }, sigma, direction),
            SpecRepr::Fourier {
                seed,
                n_modes,
                decay,
                sigma,
                direction,
            } => (
                Shape::Fourier {
                    seed,
                    n_modes,
                    decay,
                },
                sigma,
                direction,
            ),
        };
        let spec = PerturbationSpec {
            shape,
            sigma,
            direction,
        };
        spec.validate()?;
        Ok(spec)
    }
}

impl From<PerturbationSpec> for SpecRepr {
    fn from(s: PerturbationSpec) -> Self {
        let (sigma, direction) = (s.sigma, s.direction);
        match s.shape {
            Shape::Triangle {
                c,
                eps,
                delta,
                blend,
            } => SpecRepr::Triangle {
                c,
                eps,
                delta,
                blend,
                sigma,
                direction,
            },
            Shape::Sinusoid { k } => SpecRepr::Sinusoid { k, sigma, direction },
            Shape::Fourier {
                seed,
                n_modes,
                decay,
            } => SpecRepr::Fourier {
                seed,
                n_modes,
                decay,
                sigma,
                direction,
            },
        }
    }
}

impl PerturbationSpec {
    pub fn new(shape: Shape) -> Self {
        PerturbationSpec {
            shape,
            sigma: 1.0,
            direction: None,
        }
    }

    pub fn triangle(c: f64, eps: f64) -> Self {
        PerturbationSpec::new(Shape::Triangle {
            c,
            eps,
            delta: None,
            blend: Blend::Energy,
        })
    }

    pub fn sinusoid(k: u32) -> Self {
        PerturbationSpec::new(Shape::Sinusoid { k })
    }

    pub fn fourier(seed: u64, n_modes: usize, decay: f64) -> Self {
        PerturbationSpec::new(Shape::Fourier {
            seed,
            n_modes,
            decay,
        })
    }

    pub fn with_sigma(mut self, sigma: f64) -> Self {
        self.sigma = sigma;
        self
    }

    /// Checks everything that does not depend on the interval.
    pub fn validate(&self) -> Result<()> {
        if !(self.sigma.is_finite() && self.sigma >= 0.0) {
            return Err(invalid(format!("sigma must be >= 0, got {}", self.sigma)));
        }
        if let Some(d) = &self.direction {
            if d.is_empty() || d.iter().any(|x| !x.is_finite()) {
                return Err(invalid("direction must be a non-empty finite vector"));
            }
        }
        match self.shape {
            Shape::Triangle { c, eps, delta, .. } => {
                if !(c.is_finite() && eps.is_finite() && eps > 0.0) {
                    return Err(invalid(format!("triangle needs finite c and eps > 0, got c={c}, eps={eps}")));
                }
                if let Some(delta) = delta {
                    if !(delta > 0.0 && delta <= MAX_DELTA_RATIO * eps) {
                        return Err(invalid(format!(
                            "blend half-width must satisfy 0 < delta <= eps/100, got {delta}"
                        )));
                    }
                }
            }
            Shape::Sinusoid { k } => {
                if k < 1 {
                    return Err(invalid("sinusoid needs k >= 1"));
                }
            }
            Shape::Fourier { n_modes, decay, .. } => {
                if n_modes < 1 {
                    return Err(invalid("fourier needs n_modes >= 1"));
                }
                if !(decay.is_finite() && decay > 0.0) {
                    return Err(invalid(format!("fourier needs decay > 0, got {decay}")));
                }
            }
        }
        Ok(())
    }

    /// Places the profile on `[t1, t2]`.
    pub fn build(&self, t1: f64, t2: f64) -> Result<Perturbation> {
        self.validate()?;
        if !(t1.is_finite() && t2.is_finite() && t1 < t2) {
            return Err(invalid(format!("need t1 < t2, got [{t1}, {t2}]")));
        }
        let profile = match self.shape {
            Shape::Triangle {
                c,
                eps,
                delta,
                blend,
            } => {
                let delta = delta.unwrap_or(DEFAULT_DELTA_RATIO * eps);
                if !(c - eps - delta >= t1 && c + eps + delta <= t2) {
                    return Err(invalid(format!(
                        "triangle support [{}, {}] exceeds [{t1}, {t2}]",
                        c - eps - delta,
                        c + eps + delta
                    )));
                }
                Profile::Triangle(Triangle::new(c, eps, delta, blend))
            }
            Shape::Sinusoid { k } => {
                let mut a = vec![0.0; k as usize];
                a[k as usize - 1] = 1.0;
                Profile::Sines(a)
            }
            Shape::Fourier {
                seed,
                n_modes,
                decay,
            } => Profile::Sines(fourier_coefficients(seed, n_modes, decay)),
        };
        Ok(Perturbation {
            spec: self.clone(),
            profile,
            t1,
            t2,
        })
    }
}

/// `a_k = u_k k^{−decay}` with `u_k` uniform on `[−1, 1]` from a ChaCha8
/// stream seeded by `seed`.
pub fn fourier_coefficients(seed: u64, n_modes: usize, decay: f64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (1..=n_modes)
        .map(|k| rng.random_range(-1.0..=1.0) * (k as f64).powf(-decay))
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
struct Corner {
    at: f64,
    left_slope: f64,
    right_slope: f64,
    left_value: f64,
    /// Coefficient of `v(1−v)(1−2v)` in `ḣ`.
    kappa: f64,
}

#[derive(Clone, Debug, PartialEq)]
struct Triangle {
    c: f64,
    eps: f64,
    delta: f64,
    corners: [Corner; 3],
}

impl Triangle {
    fn new(c: f64, eps: f64, delta: f64, blend: Blend) -> Self {
        let s = 1.0 / eps;
        let ratio = match blend {
            Blend::Energy => 0.5 * (7.0 - 189f64.sqrt()),
            Blend::Quadratic => 0.0,
        };
        let corner = |at: f64, l: f64, r: f64, v: f64| Corner {
            at,
            left_slope: l,
            right_slope: r,
            left_value: v,
            kappa: ratio * (r - l),
        };
        Triangle {
            c,
            eps,
            delta,
            corners: [
                corner(c - eps, 0.0, s, 0.0),
                corner(c, s, -s, 1.0 - delta * s),
                corner(c + eps, -s, 0.0, delta * s),
            ],
        }
    }

    fn knots(&self) -> Vec<f64> {
        self.corners
            .iter()
            .flat_map(|k| [k.at - self.delta, k.at + self.delta])
            .collect()
    }

    fn eval(&self, t: f64) -> (f64, f64) {
        let (c, eps, delta) = (self.c, self.eps, self.delta);
        if t <= c - eps - delta || t >= c + eps + delta {
            return (0.0, 0.0);
        }
        for k in &self.corners {
            if (t - k.at).abs() < delta {
                let u = t - (k.at - delta);
                let v = u / (2.0 * delta);
                let jump = k.right_slope - k.left_slope;
                let phi = v * (1.0 - v) * (1.0 - 2.0 * v);
                let big_phi = 0.5 * v * v * (1.0 - v) * (1.0 - v);
                let h = k.left_value
                    + k.left_slope * u
                    + jump * u * u / (4.0 * delta)
                    + k.kappa * 2.0 * delta * big_phi;
                let dh = k.left_slope + jump * v + k.kappa * phi;
                return (h, dh);
            }
        }
        if t < c {
            ((t - (c - eps)) / eps, 1.0 / eps)
        } else {
            ((c + eps - t) / eps, -1.0 / eps)
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Profile {
    Triangle(Triangle),
    /// `Σ a_k sin(kπ(t−t1)/(t2−t1))`.
    Sines(Vec<f64>),
}

/// A perturbation placed on `[t1, t2]`, scaled by `σ`.
#[derive(Clone, Debug, PartialEq)]
pub struct Perturbation {
    spec: PerturbationSpec,
    profile: Profile,
    t1: f64,
    t2: f64,
}

impl Perturbation {
    pub fn triangle(c: f64, eps: f64, delta: f64, t1: f64, t2: f64) -> Result<Self> {
        PerturbationSpec::new(Shape::Triangle {
            c,
            eps,
            delta: Some(delta),
            blend: Blend::Energy,
        })
        .build(t1, t2)
    }

    pub fn sinusoid(k: u32, t1: f64, t2: f64) -> Result<Self> {
        PerturbationSpec::sinusoid(k).build(t1, t2)
    }

    pub fn fourier_sine(seed: u64, n_modes: usize, decay: f64, t1: f64, t2: f64) -> Result<Self> {
        PerturbationSpec::fourier(seed, n_modes, decay).build(t1, t2)
    }

    pub fn spec(&self) -> &PerturbationSpec {
        &self.spec
    }

    pub fn interval(&self) -> (f64, f64) {
        (self.t1, self.t2)
    }

    pub fn sigma(&self) -> f64 {
        self.spec.sigma
    }

    /// Pointwise `σ·h`.
    pub fn scale(&self, sigma: f64) -> Result<Self> {
        if !(sigma.is_finite() && sigma >= 0.0) {
            return Err(invalid(format!("sigma must be >= 0, got {sigma}")));
        }
        let mut out = self.clone();
        out.spec.sigma *= sigma;
        Ok(out)
    }

    /// Sine coefficients, for sinusoid and Fourier perturbations.
    pub fn coefficients(&self) -> Option<&[f64]> {
        match &self.profile {
            Profile::Sines(a) => Some(a),
            Profile::Triangle(_) => None,
        }
    }

    /// Interior times where `h` is only piecewise smooth.
    pub fn knots(&self) -> Vec<f64> {
        match &self.profile {
            Profile::Triangle(tri) => tri.knots(),
            Profile::Sines(_) => Vec::new(),
        }
    }

    /// `(h(t), ḣ(t))` of the scalar profile. `h` is exactly zero at the
    /// endpoints and both vanish outside `[t1, t2]`.
    pub fn eval(&self, t: f64) -> (f64, f64) {
        if t < self.t1 || t > self.t2 {
            return (0.0, 0.0);
        }
        let (h, dh) = self.eval_formula(t);
        if t == self.t1 || t == self.t2 {
            (0.0, dh)
        } else {
            (h, dh)
        }
    }

    /// The defining formula at the two endpoints, without the clamping that
    /// [`Perturbation::eval`] applies.
    pub fn endpoint_values(&self) -> (f64, f64) {
        (self.eval_formula(self.t1).0, self.eval_formula(self.t2).0)
    }

    fn eval_formula(&self, t: f64) -> (f64, f64) {
        let (h, dh) = match &self.profile {
            Profile::Triangle(tri) => tri.eval(t),
            Profile::Sines(a) => {
                let w = std::f64::consts::PI / (self.t2 - self.t1);
                let x = w * (t - self.t1);
                a.iter().enumerate().fold((0.0, 0.0), |(h, dh), (i, ak)| {
                    let k = (i + 1) as f64;
                    let (s, c) = (k * x).sin_cos();
                    (h + ak * s, dh + ak * k * w * c)
                })
            }
        };
        (self.spec.sigma * h, self.spec.sigma * dh)
    }

    /// Direction vector in `ℝ^dim`.
    pub fn direction(&self, dim: usize) -> Result<Vec<f64>> {
        match &self.spec.direction {
            None => Ok(vec![1.0; dim]),
            Some(d) if d.len() == dim => Ok(d.clone()),
            Some(d) => Err(Error::DimensionMismatch {
                expected: dim,
                got: d.len(),
            }),
        }
    }

    /// `max|h| + max|ḣ|` of the scalar profile on an evenly spaced sample.
    pub fn sup_norm(&self) -> f64 {
        let n = SUP_NORM_SAMPLES - 1;
        let (mut mh, mut md) = (0.0f64, 0.0f64);
        for i in 0..=n {
            let t = self.t1 + (self.t2 - self.t1) * i as f64 / n as f64;
            let (h, dh) = self.eval(t);
            mh = mh.max(h.abs());
            md = md.max(dh.abs());
        }
        mh + md
    }

    fn check_interval(&self, t1: f64, t2: f64) -> Result<()> {
        let tol = 1e-12 * (t2 - t1).max(t1.abs()).max(t2.abs());
        if (self.t1 - t1).abs() > tol || (self.t2 - t2).abs() > tol {
            return Err(invalid(format!(
                "perturbation lives on [{}, {}], curve on [{t1}, {t2}]",
                self.t1, self.t2
            )));
        }
        Ok(())
    }
}

/// `base` on a grid that has `h`'s knots as nodes. Returns `base` itself
/// when no resampling is needed; otherwise values come from cubic Hermite
/// interpolation of the base samples.
pub fn align(base: &Trajectory, h: &Perturbation) -> Result<Trajectory> {
    h.check_interval(base.t1(), base.t2())?;
    let knots: Vec<f64> = h
        .knots()
        .into_iter()
        .filter(|&k| k > base.t1() && k < base.t2())
        .collect();
    let existing = base.knots();
    let covered = knots
        .iter()
        .all(|k| existing.iter().any(|e| (e - k).abs() <= 1e-14 * (1.0 + k.abs())));
    if covered {
        return Ok(base.clone());
    }
    let mut pieces = split_grid(base.t1(), base.t2(), &knots, base.max_step())?;
    for p in &mut pieces {
        p.n = p.n.max(MIN_PANELS);
    }
    let mut err = None;
    let out = Trajectory::from_pieces(base.dim(), &pieces, |t, x, v| {
        if let Err(e) = base.interpolate_into(t, x, v) {
            err = Some(e);
        }
    })?;
    match err {
        Some(e) => Err(e),
        None => Ok(out),
    }
}

/// `Y + h` with derivative `Ẏ + ḣ`.
pub fn perturb_curve(base: &Trajectory, h: &Perturbation) -> Result<Trajectory> {
    let aligned = align(base, h)?;
    let dir = h.direction(base.dim())?;
    let d = base.dim();
    let times = aligned.times().to_vec();
    let pieces: Vec<_> = aligned
        .segments()
        .map(|(a, b)| crate::quadrature::Piece {
            a: times[a],
            b: times[b],
            n: b - a,
        })
        .collect();
    let mut i = 0;
    Trajectory::from_pieces(d, &pieces, |t, x, v| {
        let (hv, dh) = h.eval(t);
        for k in 0..d {
            x[k] = aligned.value(i)[k] + hv * dir[k];
            v[k] = aligned.deriv(i)[k] + dh * dir[k];
        }
        i += 1;
    })
}
