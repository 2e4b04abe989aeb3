//! Classical fixed-step fourth-order Runge-Kutta.

use crate::error::{Error, Result};

/// Right-hand side `dy/dt = f(t, y)` written into `out`.
pub trait System {
    fn dim(&self) -> usize;
    fn rhs(&self, t: f64, y: &[f64], out: &mut [f64]);
}

impl<F> System for (usize, F)
where
    F: Fn(f64, &[f64], &mut [f64]),
{
    fn dim(&self) -> usize {
        self.0
    }

    fn rhs(&self, t: f64, y: &[f64], out: &mut [f64]) {
        (self.1)(t, y, out)
    }
}

/// Scratch buffers for repeated steps.
pub struct Rk4<'a, S: System> {
    sys: &'a S,
    k1: Vec<f64>,
    k2: Vec<f64>,
    k3: Vec<f64>,
    k4: Vec<f64>,
    tmp: Vec<f64>,
}

impl<'a, S: System> Rk4<'a, S> {
    pub fn new(sys: &'a S) -> Self {
        let n = sys.dim();
        Self {
            sys,
            k1: vec![0.0; n],
            k2: vec![0.0; n],
            k3: vec![0.0; n],
            k4: vec![0.0; n],
            tmp: vec![0.0; n],
        }
    }

    /// Advances `y` from `t` to `t + h` in place.
    pub fn step(&mut self, t: f64, y: &mut [f64], h: f64) {
        let n = y.len();
        self.sys.rhs(t, y, &mut self.k1);
        for i in 0..n {
            self.tmp[i] = y[i] + 0.5 * h * self.k1[i];
        }
        self.sys.rhs(t + 0.5 * h, &self.tmp, &mut self.k2);
        for i in 0..n {
            self.tmp[i] = y[i] + 0.5 * h * self.k2[i];
        }
        self.sys.rhs(t + 0.5 * h, &self.tmp, &mut self.k3);
        for i in 0..n {
            self.tmp[i] = y[i] + h * self.k3[i];
        }
        self.sys.rhs(t + h, &self.tmp, &mut self.k4);
        for i in 0..n {
            y[i] += h / 6.0 * (self.k1[i] + 2.0 * self.k2[i] + 2.0 * self.k3[i] + self.k4[i]);
        }
    }
}

/// Integrates on the uniform grid `t1 + i (t2 - t1) / n`, returning the
/// `n + 1` grid times and the states stored row-major.
pub fn integrate<S: System>(
    sys: &S,
    y0: &[f64],
    t1: f64,
    t2: f64,
    n: usize,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let d = sys.dim();
    debug_assert_eq!(y0.len(), d);
    let h = (t2 - t1) / n as f64;
    let mut times = Vec::with_capacity(n + 1);
    let mut states = Vec::with_capacity((n + 1) * d);
    let mut y = y0.to_vec();
    let mut stepper = Rk4::new(sys);
    times.push(t1);
    states.extend_from_slice(&y);
    for i in 0..n {
        let t = t1 + h * i as f64;
        stepper.step(t, &mut y, h);
        let t_next = if i + 1 == n { t2 } else { t1 + h * (i + 1) as f64 };
        if y.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite(t_next));
        }
        times.push(t_next);
        states.extend_from_slice(&y);
    }
    Ok((times, states))
}
