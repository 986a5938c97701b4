//! Group testing for two defect types over shared pools.
//!
//! Items can be defective for type A, type B, or both. Three kinds of pooled
//! tests are available: tests that react to A only, to B only, and to either
//! (AB). This crate provides
//!
//! - pooling-design construction from the transversal lines of the
//!   3-dimensional affine geometry AG(3, q) ([`design`], [`geometry`]),
//! - exact combinatorial verifiers for disjunctness, separability and the
//!   unique collinearity condition ([`properties`]),
//! - a noisy-OR test channel simulator ([`sim`]),
//! - a belief-propagation decoder for the per-item joint posterior over the
//!   four (A, B) defect states, plus an exact enumeration oracle ([`bp`]),
//! - a reproducible Monte Carlo harness for worst-rank screening statistics
//!   ([`experiment`], [`report`]).
//!
//! With the default `parallel` feature, replications and the decoder's
//! message sweeps run on rayon; without it everything runs sequentially.
//! Results are byte-identical either way.

pub mod bp;
pub mod config;
pub mod design;
pub mod error;
pub mod experiment;
pub mod field;
pub mod geometry;
pub mod matrix;
mod par;
pub mod properties;
pub mod report;
pub mod sim;

pub use error::{Error, Result};
pub use properties::WorkBudget;
