//! Bregman distances, projections, semigroup actions and approximate
//! invariant means, with numerical checks of fixed-point properties.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod actions;
pub mod bregman;
pub mod classify;
pub mod error;
pub mod lab;
pub mod matrix;
pub mod means;
pub mod numeric;
pub mod projection;
pub mod report;
pub mod run;
pub mod scenario;
pub mod semigroup;
pub mod sets;

pub use error::{Error, Result};
