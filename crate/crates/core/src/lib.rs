//! Numerical toolkit for differential inclusions `y' in F(t, y)` with
//! impulses fired on state-dependent surfaces `t = tau_j(y)`.
//!
//! * [`jumpspace`]: piecewise paths with `m` jump records, their norm and
//!   metric, and the reduction of solved trajectories.
//! * [`fields`]: convex set-valued fields and their selections, including
//!   mollified (Lipschitz) approximations.
//! * [`problem`]: problem data, Gronwall envelopes and grid verifiers.
//! * [`integrator`]: adaptive Runge–Kutta with event location and impulses.
//! * [`funnel`]: solution samples, Hausdorff and k-center diagnostics, the
//!   level cascade and the contraction homotopy.
//! * [`catalog`] and [`cli`]: named problems and the `pulse` command.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod catalog;
pub mod cli;
pub mod error;
pub mod fields;
pub mod funnel;
pub mod integrator;
pub mod jumpspace;
pub mod linalg;
pub mod problem;
pub mod spline;

pub use error::{Error, Result};
