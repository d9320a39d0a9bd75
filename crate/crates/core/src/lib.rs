//! Axisymmetric hybrid boundary-element / finite-element solver for open,
//! inextensible lipid membranes with a free edge immersed in Stokes flow.
//!
//! The membrane is the surface of revolution of a generating curve. Bulk flow
//! enters through a single-layer potential reduced to the curve, the membrane
//! mechanics through a mixed P2-P1 finite element scheme, and time stepping is
//! semi-implicit with one monolithic linear solve per step.

pub mod config;
pub mod curve;
pub mod diagnostics;
pub mod error;
pub mod fem;
pub mod mesh;
pub mod oracle;
pub mod output;
pub mod quadrature;
pub mod scenarios;
pub mod solver;
pub mod special;
pub mod study;
pub mod validation;

pub use error::{Error, Result};
