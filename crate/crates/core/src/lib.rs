#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod confidence;
pub mod environment;
pub mod error;
pub mod estimation;
pub mod evaluation;
pub mod harness;
pub mod linalg;
pub mod mathkit;
pub mod policies;

pub use error::{BanditError, Result};
