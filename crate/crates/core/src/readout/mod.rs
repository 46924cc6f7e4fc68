//! Linear readouts and classification scoring.

mod metrics;
mod ridge;
mod ternary;

pub use metrics::{binarize, classify_metrics, mse, nrmse, Metrics};
pub use ridge::{add_bias_row, predict, ridge_fit, ridge_from_gram, RidgeSolution, MAX_CONDITION};
pub use ternary::{
    ternary_fit, ternary_initialization, ternary_objective, ternary_row_objective, TernaryMatrix,
    EXHAUSTIVE_MAX_WIDTH,
};
