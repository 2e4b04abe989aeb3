//! Calculus-of-variations analysis of accelerated gradient flows.
//!
//! The crate integrates the damped flows `Ẍ + d(t)Ẋ + ∇f(X) = 0`, evaluates
//! the action of the Lagrangian `w(t)(½‖Ẏ‖² − f(Y))` whose Euler-Lagrange
//! equation they are, and decides through the Jacobi equation whether the
//! flow minimizes that action or is only a saddle point of it.

pub mod action;
pub mod bessel;
pub mod dynamics;
pub mod error;
pub mod jacobi;
pub mod ode;
pub mod perturbations;
pub mod plot;
pub mod potentials;
pub mod quadrature;

pub use action::{LagrangianSpec, PQCoefficients, VariationReport};
pub use bessel::{bessel_j1, bessel_y1};
pub use dynamics::{BregmanParams, DampingSchedule, Regime, Trajectory};
pub use error::{Error, Result};
pub use jacobi::{Classification, ConjugateReport, Method, Verdict};
pub use perturbations::{Perturbation, PerturbationSpec};
pub use potentials::Potential;
