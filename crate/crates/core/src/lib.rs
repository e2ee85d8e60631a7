//! Hyperboloid-model hyperbolic geometry with numerical curvature checks for
//! curves and surfaces, the warped-product tube metric used in negatively
//! curved Dehn filling, and exact slope arithmetic for Dehn surgery.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod curves;
pub mod error;
pub mod hyperbolic;
pub mod surfaces;
pub mod surgery;
pub mod tube;

pub use error::{Error, Result};
