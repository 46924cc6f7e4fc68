//! Two-class pattern recognition: ramp-plus-sine versus sine, whose second
//! halves coincide, so late-segment decisions need memory of the first half.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::reservoir::{Reservoir, ReservoirConfig};
use super::report::{columns_csv, RunBundle, Series};
use crate::codecs::delta_encode;
use crate::error::{Error, Result};
use crate::readout::{add_bias_row, predict, ridge_fit};
use crate::signal::SampledSignal;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RampSineConfig {
    pub reservoir: ReservoirConfig,
    pub segment: f64,
    /// Repetitions of each pattern; segments alternate ramp+sine, sine.
    pub repetitions: usize,
    pub fs: f64,
    pub delta_threshold: f64,
    pub offset: f64,
    pub sine_amplitude: f64,
    pub sine_freq: f64,
    pub ramp_height: f64,
    pub washout_segments: usize,
    pub train_segments: usize,
    pub ridge_alpha: f64,
    pub bin: f64,
    pub sample_every: f64,
}

impl Default for RampSineConfig {
    fn default() -> Self {
        Self {
            reservoir: ReservoirConfig {
                input_weight: 0.2,
                ..ReservoirConfig::default()
            },
            segment: 2.0,
            repetitions: 5,
            fs: 1000.0,
            delta_threshold: 0.1,
            offset: 0.5,
            sine_amplitude: 0.25,
            sine_freq: 2.0,
            ramp_height: 0.25,
            washout_segments: 2,
            train_segments: 4,
            ridge_alpha: 1e-3,
            bin: 0.01,
            sample_every: 0.001,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Pattern {
    RampSine,
    Sine,
}

impl RampSineConfig {
    pub fn segments(&self) -> usize {
        2 * self.repetitions
    }

    pub fn duration(&self) -> f64 {
        self.segments() as f64 * self.segment
    }

    pub fn pattern_of(&self, segment: usize) -> Pattern {
        if segment.is_multiple_of(2) {
            Pattern::RampSine
        } else {
            Pattern::Sine
        }
    }

    /// Pattern value at time `t` within a segment. The ramp rises linearly
    /// over the first half and is absent in the second.
    pub fn value(&self, pattern: Pattern, t: f64) -> f64 {
        let sine = self.offset + self.sine_amplitude * (2.0 * PI * self.sine_freq * t).sin();
        let half = self.segment / 2.0;
        match pattern {
            Pattern::RampSine if t < half => sine + self.ramp_height * t / half,
            _ => sine,
        }
    }

    pub fn samples_per_segment(&self) -> Result<usize> {
        let s = self.segment * self.fs;
        if (s - s.round()).abs() > 1e-6 || s < 2.0 {
            return Err(Error::invalid("segment * fs must be a whole number of samples"));
        }
        Ok(s.round() as usize)
    }

    pub fn signal(&self) -> Result<SampledSignal> {
        let per = self.samples_per_segment()?;
        let dt = 1.0 / self.fs;
        let xs: Vec<f64> = (0..per * self.segments())
            .map(|k| self.value(self.pattern_of(k / per), (k % per) as f64 * dt))
            .collect();
        SampledSignal::from_channels(0.0, dt, &[xs])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RampSineMetrics {
    pub profile: String,
    pub duration: f64,
    pub up_spikes: usize,
    pub down_spikes: usize,
    pub reservoir_spikes: usize,
    pub train_accuracy: f64,
    pub test_accuracy: f64,
    /// Test accuracy restricted to the segments' second halves, where the two
    /// inputs coincide.
    pub test_accuracy_second_half: f64,
}

pub fn rampsine_experiment(config: &RampSineConfig) -> Result<(RampSineMetrics, RunBundle)> {
    let segs = config.segments();
    if config.washout_segments + config.train_segments >= segs {
        return Err(Error::invalid("no test segments left"));
    }
    let signal = config.signal()?;
    let spikes = delta_encode(&signal, config.delta_threshold)?;
    let input = spikes.interleave(1);
    let duration = config.duration();

    let reservoir = Reservoir::build(&config.reservoir, &[1.0, -1.0])?;
    let resp = reservoir.respond(&input, duration, config.sample_every)?;
    if resp.trace.spikes.is_empty() {
        return Err(Error::Silent("reservoir produced no spikes".into()));
    }

    let per_seg = {
        let r = config.segment / config.sample_every;
        if (r - r.round()).abs() > 1e-6 {
            return Err(Error::invalid("segment must be a multiple of sample_every"));
        }
        r.round() as usize
    };
    let per_bin = {
        let r = config.bin / config.sample_every;
        if (r - r.round()).abs() > 1e-6 || r < 1.0 || per_seg % (r.round() as usize) != 0 {
            return Err(Error::invalid("bin must be a multiple of sample_every dividing the segment"));
        }
        r.round() as usize
    };
    // sample k covers ((k-1) dt, k dt]; features at samples 1..=total
    let total = per_seg * segs;
    let phi = add_bias_row(&resp.features.columns(1, total).into_owned());
    let label = |k: usize| match config.pattern_of(k / per_seg) {
        Pattern::RampSine => 0usize,
        Pattern::Sine => 1,
    };
    let y = DMatrix::from_fn(2, total, |c, k| f64::from(u8::from(label(k) == c)));
    let t0 = config.washout_segments * per_seg;
    let t1 = t0 + config.train_segments * per_seg;
    let sol = ridge_fit(
        &phi.columns(t0, t1 - t0).into_owned(),
        &y.columns(t0, t1 - t0).into_owned(),
        config.ridge_alpha,
    )?;
    let pred = predict(&sol, &phi)?;

    let bins = total / per_bin;
    let mut bin_class = vec![0usize; bins];
    let mut bin_score = vec![0.0; bins];
    for b in 0..bins {
        let cols = pred.columns(b * per_bin, per_bin);
        let s0: f64 = cols.row(0).sum();
        let s1: f64 = cols.row(1).sum();
        bin_class[b] = usize::from(s1 > s0);
        bin_score[b] = (s1 - s0) / per_bin as f64;
    }
    let accuracy = |range: std::ops::Range<usize>, second_half_only: bool| {
        let bins_per_seg = per_seg / per_bin;
        let chosen: Vec<usize> = (range.start / per_bin..range.end / per_bin)
            .filter(|b| !second_half_only || (b % bins_per_seg) >= bins_per_seg / 2)
            .collect();
        let correct = chosen
            .iter()
            .filter(|&&b| bin_class[b] == label(b * per_bin))
            .count();
        correct as f64 / chosen.len().max(1) as f64
    };

    let metrics = RampSineMetrics {
        profile: config.reservoir.profile.name().to_string(),
        duration,
        up_spikes: spikes.up.len(),
        down_spikes: spikes.down.len(),
        reservoir_spikes: resp.trace.spikes.len(),
        train_accuracy: accuracy(t0..t1, false),
        test_accuracy: accuracy(t1..total, false),
        test_accuracy_second_half: accuracy(t1..total, true),
    };

    let bin_times: Vec<f64> = (0..bins).map(|b| (b + 1) as f64 * config.bin).collect();
    let truth: Vec<f64> = (0..bins).map(|b| label(b * per_bin) as f64).collect();
    let class: Vec<f64> = bin_class.iter().map(|&c| c as f64).collect();
    let split: Vec<f64> = (0..bins)
        .map(|b| {
            let k = b * per_bin;
            if k < t0 {
                0.0
            } else if k < t1 {
                1.0
            } else {
                2.0
            }
        })
        .collect();
    let bundle = RunBundle::new(
        "rampsine",
        config,
        &metrics,
        vec![
            Series::new(
                "bins.csv",
                columns_csv(
                    &bin_times,
                    &["label".into(), "predicted".into(), "score".into(), "split".into()],
                    &[&truth, &class, &bin_score, &split],
                ),
            ),
            Series::new("input.csv", signal.to_csv("u")),
        ],
    )?;
    Ok((metrics, bundle))
}
