#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::too_many_arguments)]

pub mod check;
pub mod coverage;
pub mod density;
pub mod ecdf;
pub mod error;
pub mod estimate;
pub mod estimator;
pub mod exact;
pub mod limit;
pub mod nonuniform;
pub mod numeric;
pub mod quadrature;
pub mod roots;
pub mod simulation;
pub mod spacings;
pub mod stream;
pub mod tables;
pub mod uniform;

pub use error::{Error, Result};
