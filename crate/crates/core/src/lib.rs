//! Spiking reservoir simulation, network transfer and mixed-signal export.

// `!(x > 0.0)` is used on purpose so NaN fails validation; index loops
// mirror the matrix algebra
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod codecs;
pub mod error;
pub mod dynapse;
pub mod esn;
pub mod experiments;
pub mod lif;
pub mod matrix_csv;
pub mod par;
pub mod readout;
pub mod signal;
pub mod topology;
pub mod transfer;

pub use error::{Error, Result};
