//! Stability certification for scalar linear and nonlinear delay
//! differential equations with time-varying coefficients and delays.
//!
//! * [`funcmodel`] — analysable time-function descriptors and sound bounds.
//! * [`dde_model`] — equation descriptors, validation and transforms.
//! * [`mmatrix`] — M-matrix predicates.
//! * [`catalog`] — the registry of sufficient stability tests.
//! * [`solver`] — method-of-steps integration and falsification.
//! * [`linearize`] — global linearised stability for nonlinear equations.

pub mod funcmodel;
pub mod dde_model;
pub mod mmatrix;
pub mod catalog;
pub mod solver;
pub mod linearize;
