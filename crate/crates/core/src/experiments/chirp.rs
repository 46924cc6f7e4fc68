//! Pulse-chirp regression: each repetition is a short pulse block followed by
//! a gap, and the readout must reproduce a chirp spanning the whole
//! repetition from the reservoir's lingering response.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::pulse::pulse_block;
use super::reservoir::{Reservoir, ReservoirConfig};
use super::report::{columns_csv, RunBundle, Series};
use crate::error::{Error, Result};
use crate::readout::{add_bias_row, mse, predict, ridge_fit};
use crate::signal::SpikeTrain;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ChirpConfig {
    pub reservoir: ReservoirConfig,
    pub repetitions: usize,
    pub period: f64,
    pub block: f64,
    pub spacing: f64,
    pub f_start: f64,
    pub f_end: f64,
    pub amplitude: f64,
    pub train_repetitions: usize,
    pub ridge_alpha: f64,
    pub sample_every: f64,
}

impl Default for ChirpConfig {
    fn default() -> Self {
        Self {
            reservoir: ReservoirConfig::default(),
            repetitions: 30,
            period: 3.35,
            block: 0.5,
            spacing: 0.001,
            f_start: 0.5,
            f_end: 4.0,
            amplitude: 1.0,
            train_repetitions: 24,
            ridge_alpha: 1e-3,
            sample_every: 0.01,
        }
    }
}

impl ChirpConfig {
    pub fn duration(&self) -> f64 {
        self.repetitions as f64 * self.period
    }

    /// Samples per repetition.
    fn samples_per_period(&self) -> Result<usize> {
        let r = self.period / self.sample_every;
        if (r - r.round()).abs() > 1e-6 || r < 1.0 {
            return Err(Error::invalid("period must be a multiple of sample_every"));
        }
        Ok(r.round() as usize)
    }

    /// `amplitude * sin(2π (f0 τ + k τ²/2))`, τ the time within the repetition,
    /// with the instantaneous frequency reaching `f_end` at the period's end.
    pub fn target(&self, tau: f64) -> f64 {
        let k = (self.f_end - self.f_start) / self.period;
        self.amplitude * (2.0 * PI * (self.f_start * tau + 0.5 * k * tau * tau)).sin()
    }

    pub fn input(&self) -> Result<SpikeTrain> {
        let mut events = Vec::new();
        for r in 0..self.repetitions {
            let t0 = r as f64 * self.period;
            events.extend(pulse_block(t0, t0 + self.block, self.spacing, 0));
        }
        SpikeTrain::from_events(events)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChirpMetrics {
    pub profile: String,
    pub duration: f64,
    pub input_spikes: usize,
    pub reservoir_spikes: usize,
    pub train_mse: f64,
    pub test_mse: f64,
}

pub fn chirp_experiment(config: &ChirpConfig) -> Result<(ChirpMetrics, RunBundle)> {
    if config.train_repetitions == 0 || config.train_repetitions >= config.repetitions {
        return Err(Error::invalid("train_repetitions must leave at least one test repetition"));
    }
    let per = config.samples_per_period()?;
    let input = config.input()?;
    let duration = config.duration();
    let reservoir = Reservoir::build(&config.reservoir, &[1.0])?;
    let resp = reservoir.respond(&input, duration, config.sample_every)?;
    if resp.trace.spikes.is_empty() {
        return Err(Error::Silent("reservoir produced no spikes".into()));
    }

    let total = per * config.repetitions;
    let phi = add_bias_row(&resp.features.columns(0, total).into_owned());
    let target: Vec<f64> = (0..total)
        .map(|k| config.target((k % per) as f64 * config.sample_every))
        .collect();
    let split = per * config.train_repetitions;
    let y_train = DMatrix::from_row_slice(1, split, &target[..split]);
    let sol = ridge_fit(&phi.columns(0, split).into_owned(), &y_train, config.ridge_alpha)?;
    let pred: Vec<f64> = predict(&sol, &phi)?.iter().copied().collect();

    let metrics = ChirpMetrics {
        profile: config.reservoir.profile.name().to_string(),
        duration,
        input_spikes: input.len(),
        reservoir_spikes: resp.trace.spikes.len(),
        train_mse: mse(&pred[..split], &target[..split])?,
        test_mse: mse(&pred[split..], &target[split..])?,
    };
    let times: Vec<f64> = resp.grid.times().take(total).collect();
    let is_test: Vec<f64> = (0..total).map(|k| f64::from(u8::from(k >= split))).collect();
    let bundle = RunBundle::new(
        "chirp",
        config,
        &metrics,
        vec![Series::new(
            "prediction.csv",
            columns_csv(
                &times,
                &["target".into(), "prediction".into(), "test".into()],
                &[&target, &pred, &is_test],
            ),
        )],
    )?;
    Ok((metrics, bundle))
}
