//! Robust integral reinforcement learning for partially-unknown linear plants.
//!
//! The crate is `no_std` (it needs `alloc`) and contains the numerical core:
//!
//! - [`linalg`]: dense symmetric linear algebra, Kronecker bases, Lyapunov
//!   solves and interval matrices.
//! - [`sdp`]: a barrier-method feasibility solver for affine LMIs and decay
//!   rate bisection.
//! - [`critic`]: value-kernel estimation from trajectory windows with
//!   confidence intervals.
//! - [`actor`]: robust policy improvement via LMIs, plus the unconstrained
//!   optimal update used as a baseline.
//! - [`plant`]: the glucose-kinetics virtual patient.
//!
//! I/O, configuration files and the scenario harness live in the `robust-irl`
//! crate.
#![cfg_attr(not(test), no_std)]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod actor;
pub mod critic;
pub mod linalg;
pub mod plant;
pub mod sdp;

pub use actor::{ActorConfig, ActorError, Policy, UpdateMode};
pub use critic::{CriticError, TransitionSample, ValueEstimate};
pub use linalg::{IntervalMatrix, LinalgError, LinearModel, Matrix, SymMatrix};
pub use plant::{NoiseSpec, PatientParams, PlantState};
pub use sdp::{AffineLmi, Assignment, LmiSolution, SdpError, SolverOptions, VarId};
