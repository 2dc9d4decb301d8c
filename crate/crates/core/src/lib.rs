//! Proximal point method for nonsmooth (strongly) quasar-convex functions.
//!
//! The crate provides
//! - an [`Objective`] interface carrying values, Clarke subgradients and
//!   generalized Jacobians,
//! - a gallery of homogeneous test functions and the randomized product
//!   families used for benchmarking ([`functions`]),
//! - the proximity operator computed by multi-start semismooth Newton
//!   ([`prox`]),
//! - the proximal point method ([`ppa`]) and a plain semismooth Newton
//!   baseline ([`ssn`]),
//! - sampling checks of the quasar-convexity inequalities and of the
//!   convergence bounds ([`checker`]),
//! - a seeded batch harness producing comparison tables ([`experiments`]).

mod error;
mod minnorm;
mod newton;

pub mod checker;
pub mod experiments;
pub mod functions;
pub mod objective;
pub mod ppa;
pub mod prox;
pub mod space;
pub mod ssn;
pub mod trace;

pub use error::{Error, Result};
pub use objective::{FnObjective, Objective, QuasarCertificate, Restricted};
pub use ppa::{run_ppa, run_ppa_tracked, select_iterate, BetaSchedule, PpaConfig};
pub use prox::{prox, prox_oracle_grid, prox_residual, ssn_subsolve, ProxConfig, ProxResult};
pub use space::{finite_diff_gradient, project_box, vector, BoxConstraint, Matrix, Vector};
pub use ssn::{run_ssn, run_ssn_tracked, SsnConfig};
pub use trace::{SolverTrace, Termination};
