//! Uniformly sampled signals and spike trains.

use std::cmp::Ordering;
use std::fmt::Write as _;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative slack used when mapping continuous times onto a step grid.
pub(crate) const GRID_EPS: f64 = 1e-9;

/// Index of the step `[k dt, (k+1) dt)` that contains `t`.
pub(crate) fn step_index(t: f64, dt: f64) -> usize {
    let k = (t / dt + GRID_EPS).floor();
    if k <= 0.0 {
        0
    } else {
        k as usize
    }
}

/// Number of whole steps of size `dt` in `duration`.
pub(crate) fn step_count(duration: f64, dt: f64) -> usize {
    (duration / dt + GRID_EPS).floor() as usize
}

/// A regular time grid `t0, t0 + dt, ..., t0 + (len-1) dt`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    pub t0: f64,
    pub dt: f64,
    pub len: usize,
}

impl TimeGrid {
    pub fn new(t0: f64, dt: f64, len: usize) -> Result<Self> {
        if !(dt > 0.0) || !t0.is_finite() {
            return Err(Error::invalid("time grid needs dt > 0 and finite t0"));
        }
        Ok(Self { t0, dt, len })
    }

    /// Grid covering `[0, duration]` inclusive at spacing `dt`.
    pub fn covering(duration: f64, dt: f64) -> Result<Self> {
        Self::new(0.0, dt, step_count(duration, dt) + 1)
    }

    pub fn time(&self, k: usize) -> f64 {
        self.t0 + k as f64 * self.dt
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.len).map(move |k| self.time(k))
    }
}

/// Multi-channel signal sampled on a regular grid, stored channels × samples.
///
/// Between samples the signal is held constant (zero-order hold), so a
/// signal with `K` samples covers `[t0, t0 + K dt)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledSignal {
    pub t0: f64,
    pub dt: f64,
    pub values: DMatrix<f64>,
}

impl SampledSignal {
    pub fn new(t0: f64, dt: f64, values: DMatrix<f64>) -> Result<Self> {
        if !(dt > 0.0) || !t0.is_finite() {
            return Err(Error::invalid("signal needs dt > 0 and finite t0"));
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            let ch = pos % values.nrows().max(1);
            return Err(Error::invalid(format!(
                "non-finite sample in channel {ch}"
            )));
        }
        Ok(Self { t0, dt, values })
    }

    pub fn from_channels(t0: f64, dt: f64, channels: &[Vec<f64>]) -> Result<Self> {
        let n = channels.len();
        let k = channels.first().map_or(0, Vec::len);
        if let Some(bad) = channels.iter().find(|c| c.len() != k) {
            return Err(Error::Dimension {
                context: "signal channels",
                expected: k,
                actual: bad.len(),
            });
        }
        let values = DMatrix::from_fn(n, k, |i, j| channels[i][j]);
        Self::new(t0, dt, values)
    }

    pub fn zeros(channels: usize, grid: TimeGrid) -> Self {
        Self {
            t0: grid.t0,
            dt: grid.dt,
            values: DMatrix::zeros(channels, grid.len),
        }
    }

    pub fn channels(&self) -> usize {
        self.values.nrows()
    }

    pub fn len(&self) -> usize {
        self.values.ncols()
    }

    pub fn is_empty(&self) -> bool {
        self.values.ncols() == 0
    }

    pub fn grid(&self) -> TimeGrid {
        TimeGrid {
            t0: self.t0,
            dt: self.dt,
            len: self.len(),
        }
    }

    pub fn time(&self, k: usize) -> f64 {
        self.t0 + k as f64 * self.dt
    }

    /// End of the hold interval of the last sample.
    pub fn end_time(&self) -> f64 {
        self.t0 + self.len() as f64 * self.dt
    }

    /// Whether the held signal is defined on all of `[0, duration]`.
    pub fn covers(&self, duration: f64) -> bool {
        let slack = GRID_EPS * self.dt.max(duration.abs());
        self.t0 <= slack && self.end_time() + slack >= duration
    }

    /// Sample index held at time `t` (clamped to the stored range).
    pub fn index_at(&self, t: f64) -> usize {
        let k = step_index(t - self.t0, self.dt);
        k.min(self.len().saturating_sub(1))
    }

    pub fn channel(&self, i: usize) -> Vec<f64> {
        self.values.row(i).iter().copied().collect()
    }

    /// CSV with a `time` column followed by one column per channel.
    pub fn to_csv(&self, prefix: &str) -> String {
        let mut out = String::from("time");
        for c in 0..self.channels() {
            let _ = write!(out, ",{prefix}{c}");
        }
        out.push('\n');
        for k in 0..self.len() {
            let _ = write!(out, "{}", self.time(k));
            for c in 0..self.channels() {
                let _ = write!(out, ",{}", self.values[(c, k)]);
            }
            out.push('\n');
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Spike {
    pub neuron: usize,
    pub time: f64,
}

fn spike_order(a: &Spike, b: &Spike) -> Ordering {
    a.time
        .partial_cmp(&b.time)
        .unwrap_or(Ordering::Equal)
        .then(a.neuron.cmp(&b.neuron))
}

/// Time-sorted spike events; ties are broken by neuron index.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SpikeTrain {
    events: Vec<Spike>,
}

impl SpikeTrain {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds a train from unordered events.
    pub fn from_events(mut events: Vec<Spike>) -> Result<Self> {
        if events.iter().any(|s| !s.time.is_finite()) {
            return Err(Error::invalid("spike times must be finite"));
        }
        events.sort_by(spike_order);
        Ok(Self { events })
    }

    /// Appends an event that is not earlier than the current last one.
    pub fn push(&mut self, neuron: usize, time: f64) {
        debug_assert!(self
            .events
            .last()
            .is_none_or(|l| spike_order(l, &Spike { neuron, time }) != Ordering::Greater));
        self.events.push(Spike { neuron, time });
    }

    pub fn events(&self) -> &[Spike] {
        &self.events
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    /// Largest neuron index plus one.
    pub fn neuron_bound(&self) -> usize {
        self.events.iter().map(|s| s.neuron + 1).max().unwrap_or(0)
    }

    /// Superposition of two trains.
    pub fn merge(&self, other: &SpikeTrain) -> SpikeTrain {
        let mut out = Vec::with_capacity(self.len() + other.len());
        let (mut i, mut j) = (0, 0);
        while i < self.events.len() && j < other.events.len() {
            if spike_order(&self.events[i], &other.events[j]) != Ordering::Greater {
                out.push(self.events[i]);
                i += 1;
            } else {
                out.push(other.events[j]);
                j += 1;
            }
        }
        out.extend_from_slice(&self.events[i..]);
        out.extend_from_slice(&other.events[j..]);
        SpikeTrain { events: out }
    }

    /// Shifts every spike by `offset` seconds and neuron indices by `neuron_offset`.
    pub fn shifted(&self, offset: f64, neuron_offset: usize) -> SpikeTrain {
        SpikeTrain {
            events: self
                .events
                .iter()
                .map(|s| Spike {
                    neuron: s.neuron + neuron_offset,
                    time: s.time + offset,
                })
                .collect(),
        }
    }

    pub fn count_for(&self, neuron: usize) -> usize {
        self.events.iter().filter(|s| s.neuron == neuron).count()
    }

    /// Spike times per neuron, `n` lists.
    pub fn per_neuron(&self, n: usize) -> Vec<Vec<f64>> {
        let mut out = vec![Vec::new(); n];
        for s in &self.events {
            if s.neuron < n {
                out[s.neuron].push(s.time);
            }
        }
        out
    }

    /// Checks that each neuron's spikes are at least `min_isi` apart.
    pub fn respects_min_isi(&self, min_isi: f64) -> bool {
        let n = self.neuron_bound();
        self.per_neuron(n).iter().all(|ts| {
            ts.windows(2)
                .all(|w| w[1] - w[0] >= min_isi * (1.0 - GRID_EPS))
        })
    }

    pub fn is_sorted(&self) -> bool {
        self.events
            .windows(2)
            .all(|w| spike_order(&w[0], &w[1]) != Ordering::Greater)
    }

    /// `time,neuron` CSV.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("time,neuron\n");
        for s in &self.events {
            let _ = writeln!(out, "{},{}", s.time, s.neuron);
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut events = Vec::new();
        for (idx, line) in text.lines().enumerate() {
            let lineno = idx + 1;
            if idx == 0 && line.trim() == "time,neuron" {
                continue;
            }
            if line.trim().is_empty() {
                continue;
            }
            let mut parts = line.split(',');
            let (Some(t), Some(n), None) = (parts.next(), parts.next(), parts.next()) else {
                return Err(Error::parse(lineno, "expected `time,neuron`"));
            };
            let time: f64 = t
                .trim()
                .parse()
                .map_err(|_| Error::parse(lineno, format!("bad time `{t}`")))?;
            let neuron: usize = n
                .trim()
                .parse()
                .map_err(|_| Error::parse(lineno, format!("bad neuron `{n}`")))?;
            events.push(Spike { neuron, time });
        }
        Self::from_events(events).map_err(|e| Error::parse(0, e.to_string()))
    }
}

impl FromIterator<Spike> for SpikeTrain {
    fn from_iter<I: IntoIterator<Item = Spike>>(iter: I) -> Self {
        let mut events: Vec<Spike> = iter.into_iter().collect();
        events.sort_by(spike_order);
        SpikeTrain { events }
    }
}
