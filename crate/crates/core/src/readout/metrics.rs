use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Confusion counts with derived ratios. A ratio with a zero denominator is
/// `None` and is omitted from JSON.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub accuracy: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sensitivity: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub precision: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f1: Option<f64>,
}

fn ratio(num: usize, den: usize) -> Option<f64> {
    (den > 0).then(|| num as f64 / den as f64)
}

impl Metrics {
    pub fn from_counts(tp: usize, fp: usize, tn: usize, fn_: usize) -> Self {
        Self {
            tp,
            fp,
            tn,
            fn_,
            accuracy: ratio(tp + tn, tp + tn + fp + fn_),
            sensitivity: ratio(tp, tp + fn_),
            precision: ratio(tp, tp + fp),
            f1: ratio(2 * tp, 2 * tp + fp + fn_),
        }
    }
}

/// `1` where `value >= threshold`.
pub fn binarize(predictions: &[f64], threshold: f64) -> Vec<u8> {
    predictions
        .iter()
        .map(|&p| u8::from(p >= threshold))
        .collect()
}

pub fn classify_metrics(pred: &[u8], truth: &[u8]) -> Result<Metrics> {
    if pred.len() != truth.len() {
        return Err(Error::Dimension {
            context: "prediction/label length",
            expected: truth.len(),
            actual: pred.len(),
        });
    }
    let (mut tp, mut fp, mut tn, mut fn_) = (0, 0, 0, 0);
    for (&p, &t) in pred.iter().zip(truth) {
        match (p != 0, t != 0) {
            (true, true) => tp += 1,
            (true, false) => fp += 1,
            (false, false) => tn += 1,
            (false, true) => fn_ += 1,
        }
    }
    Ok(Metrics::from_counts(tp, fp, tn, fn_))
}

pub fn mse(pred: &[f64], target: &[f64]) -> Result<f64> {
    if pred.len() != target.len() || pred.is_empty() {
        return Err(Error::Dimension {
            context: "mse length",
            expected: target.len(),
            actual: pred.len(),
        });
    }
    Ok(pred
        .iter()
        .zip(target)
        .map(|(p, t)| (p - t).powi(2))
        .sum::<f64>()
        / pred.len() as f64)
}

/// Root-mean-square error divided by the root-mean-square of the target, so
/// the all-zero predictor scores exactly 1.
pub fn nrmse(pred: &[f64], target: &[f64]) -> Result<f64> {
    let err = mse(pred, target)?;
    let power = target.iter().map(|t| t * t).sum::<f64>() / target.len() as f64;
    if power == 0.0 {
        return Err(Error::InsufficientData("NRMSE target is identically zero".into()));
    }
    Ok((err / power).sqrt())
}
