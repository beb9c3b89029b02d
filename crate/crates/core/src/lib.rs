#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod baseline;
pub mod error;
pub mod linalg;
pub mod model;
pub mod pgs;
pub mod reformulate;
pub mod ridehail;
pub mod solver;

pub use error::{Error, Result};
