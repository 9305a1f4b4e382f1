//! Finite-volume simulation of the doubly degenerate nutrient taxis system
//!
//! ```text
//! u_t = div(u v grad u) - chi div(u^2 v grad v) + ell u v
//! v_t = lap v - u v
//! ```
//!
//! on a rectangle with no-flux boundaries, together with executable checks
//! of its balance laws and a priori estimates.

pub mod diagnostics;
pub mod error;
pub mod experiments;
pub mod grid;
pub mod ineq_lab;
pub mod model;
pub mod stepper;

pub use diagnostics::{check_invariants, dual_distance, functionals, DiagConfig, DiagRecord, ViolationReport};
pub use error::{Result, TaxisError};
pub use grid::{FaceField, GridSpec, ScalarField};
pub use model::{Params, State};
pub use stepper::{run, stable_dt, step_euler, StepControl, Trajectory};
