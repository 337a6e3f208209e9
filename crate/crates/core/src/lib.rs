//! Two-class abstract-shape problems, a from-scratch convolutional network,
//! and the experiment harness that trains and audits it.

pub mod dataset;
pub mod error;
pub mod geometry;
pub mod harness;
pub mod nn;
pub mod problems;

pub use error::{Error, Result};
