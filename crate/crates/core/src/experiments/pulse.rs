//! A one-second 1 kHz pulse block into a quiet reservoir, scored by how many
//! distinct temporal responses it evokes.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::reservoir::{Reservoir, ReservoirConfig};
use super::report::{matrix_csv, RunBundle, Series};
use crate::error::{Error, Result};
use crate::signal::{Spike, SpikeTrain};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PulseConfig {
    pub reservoir: ReservoirConfig,
    pub duration: f64,
    pub block_start: f64,
    pub block_end: f64,
    pub spacing: f64,
    pub sample_every: f64,
}

impl Default for PulseConfig {
    fn default() -> Self {
        Self {
            reservoir: ReservoirConfig::default(),
            duration: 6.5,
            block_start: 0.5,
            block_end: 1.5,
            spacing: 0.001,
            sample_every: 0.01,
        }
    }
}

/// Spikes at `start + k * spacing` for every `k` with the time in
/// `[start, end)`, on input channel `channel`.
pub fn pulse_block(start: f64, end: f64, spacing: f64, channel: usize) -> Vec<Spike> {
    let count = ((end - start) / spacing - 1e-9).ceil().max(0.0) as usize;
    (0..count)
        .map(|k| Spike {
            neuron: channel,
            time: start + k as f64 * spacing,
        })
        .collect()
}

pub fn pulse_input(config: &PulseConfig) -> Result<SpikeTrain> {
    SpikeTrain::from_events(pulse_block(
        config.block_start,
        config.block_end,
        config.spacing,
        0,
    ))
}

/// `exp(H) - 1` where `H` is the Shannon entropy of the normalized singular
/// values: 0 for a rank-one response, `r - 1` for `r` equal singular values.
pub fn diversity_score(features: &DMatrix<f64>) -> Result<f64> {
    let sv = features.singular_values();
    let total: f64 = sv.iter().sum();
    if !(total > 0.0) {
        return Err(Error::Silent("reservoir produced no spikes".into()));
    }
    let h: f64 = sv
        .iter()
        .map(|s| s / total)
        .filter(|p| *p > 0.0)
        .map(|p| -p * p.ln())
        .sum();
    Ok(h.exp() - 1.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PulseMetrics {
    pub profile: String,
    pub input_spikes: usize,
    pub reservoir_spikes: usize,
    pub active_neurons: usize,
    pub diversity: f64,
}

pub fn pulse_experiment(config: &PulseConfig) -> Result<(PulseMetrics, RunBundle)> {
    let input = pulse_input(config)?;
    let reservoir = Reservoir::build(&config.reservoir, &[1.0])?;
    let resp = reservoir.respond(&input, config.duration, config.sample_every)?;
    let diversity = diversity_score(&resp.features)?;
    let active = (0..reservoir.n())
        .filter(|&i| resp.trace.spikes.count_for(i) > 0)
        .count();
    let metrics = PulseMetrics {
        profile: config.reservoir.profile.name().to_string(),
        input_spikes: input.len(),
        reservoir_spikes: resp.trace.spikes.len(),
        active_neurons: active,
        diversity,
    };
    let times: Vec<f64> = resp.grid.times().collect();
    let bundle = RunBundle::new(
        "pulse",
        config,
        &metrics,
        vec![
            Series::new("features.csv", matrix_csv(&times, "n", &resp.features)),
            Series::new("spikes.csv", resp.trace.spikes.to_csv()),
            Series::new("input_spikes.csv", input.to_csv()),
        ],
    )?;
    Ok((metrics, bundle))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn block_has_thousand_spikes() {
        let b = pulse_block(0.5, 1.5, 0.001, 0);
        assert_eq!(b.len(), 1000);
        assert!((b[999].time - 1.499).abs() < 1e-12);
    }

    #[test]
    fn diversity_of_rank_one_is_zero() {
        let m = DMatrix::from_fn(4, 10, |i, j| (i + 1) as f64 * (j as f64).sin());
        assert!(diversity_score(&m).unwrap().abs() < 1e-6);
        let eye = DMatrix::<f64>::identity(5, 5);
        assert!((diversity_score(&eye).unwrap() - 4.0).abs() < 1e-12);
        assert!(diversity_score(&DMatrix::zeros(3, 3)).is_err());
    }
}
