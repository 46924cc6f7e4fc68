//! The shared 16×16 LIF reservoir and its two synapse-speed profiles.

use nalgebra::DMatrix;
use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::codecs::exp_smooth;
use crate::error::{Error, Result};
use crate::lif::{lif_run, sample_grid, Input, LifParams, LifWeights, RunSpec, SimTrace};
use crate::signal::{step_count, SampledSignal, SpikeTrain, TimeGrid};
use crate::topology::{topo_generate, topo_to_weights_scaled, SpatialTopology, TopologyParams};

/// Synapse-speed profile. `Default` runs every synapse fast; `Tuned` keeps
/// inputs fast and slows the recurrent synapses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Profile {
    Default,
    Tuned,
}

impl Profile {
    pub fn name(self) -> &'static str {
        match self {
            Profile::Default => "default",
            Profile::Tuned => "tuned",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "default" => Ok(Profile::Default),
            "tuned" => Ok(Profile::Tuned),
            other => Err(Error::UnknownPreset(other.to_string())),
        }
    }
}

/// Synaptic time constants of a profile (s).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpeedSettings {
    pub tau_input: f64,
    pub tau_recurrent: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ReservoirConfig {
    pub topology_seed: u64,
    pub profile: Profile,
    pub fast: SpeedSettings,
    pub slow: SpeedSettings,
    pub tau_v: f64,
    pub theta: f64,
    /// Bias current as a fraction of the threshold.
    pub bias_fraction: f64,
    pub dt: f64,
    pub w_exc: f64,
    pub w_inh: f64,
    /// Magnitude of each input synapse.
    pub input_weight: f64,
    /// Fraction of neurons receiving each input channel.
    pub input_fraction: f64,
    pub input_seed: u64,
    /// Feature smoothing kernel (s), shared by both profiles.
    pub tau_s: f64,
}

impl Default for ReservoirConfig {
    fn default() -> Self {
        Self {
            topology_seed: 0,
            profile: Profile::Tuned,
            fast: SpeedSettings {
                tau_input: 0.005,
                tau_recurrent: 0.005,
            },
            slow: SpeedSettings {
                tau_input: 0.005,
                tau_recurrent: 0.1,
            },
            tau_v: 0.02,
            theta: 1.0,
            bias_fraction: 0.9,
            dt: 1e-4,
            w_exc: 0.005,
            w_inh: 0.01,
            input_weight: 0.002,
            input_fraction: 0.3,
            input_seed: 0,
            tau_s: 0.02,
        }
    }
}

impl ReservoirConfig {
    pub fn with_profile(mut self, profile: Profile) -> Self {
        self.profile = profile;
        self
    }

    pub fn speeds(&self) -> SpeedSettings {
        match self.profile {
            Profile::Default => self.fast,
            Profile::Tuned => self.slow,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("tau_v", self.tau_v),
            ("theta", self.theta),
            ("dt", self.dt),
            ("w_exc", self.w_exc),
            ("w_inh", self.w_inh),
            ("tau_s", self.tau_s),
            ("fast.tau_input", self.fast.tau_input),
            ("fast.tau_recurrent", self.fast.tau_recurrent),
            ("slow.tau_input", self.slow.tau_input),
            ("slow.tau_recurrent", self.slow.tau_recurrent),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::invalid(format!("{name} must be positive")));
            }
        }
        if !(self.input_weight >= 0.0) {
            return Err(Error::invalid("input_weight must be nonnegative"));
        }
        if !(self.input_fraction > 0.0 && self.input_fraction <= 1.0) {
            return Err(Error::invalid("input_fraction must lie in (0, 1]"));
        }
        if !(self.bias_fraction >= 0.0) {
            return Err(Error::invalid("bias_fraction must be nonnegative"));
        }
        let speeds = self.speeds();
        if self.dt > speeds.tau_input / 10.0 {
            return Err(Error::invalid(format!(
                "dt = {} must be at most tau_input / 10",
                self.dt
            )));
        }
        Ok(())
    }

    pub fn topology(&self) -> Result<SpatialTopology> {
        topo_generate(&TopologyParams::with_seed(self.topology_seed))
    }

    pub fn lif_params(&self) -> Result<LifParams> {
        LifParams::new(
            self.tau_v,
            self.speeds().tau_recurrent,
            self.theta,
            self.bias_fraction * self.theta,
            self.dt,
        )
    }

    /// Input matrix for channels with the given signs: each channel reaches
    /// a seeded random subset of neurons with weight `sign * input_weight`.
    pub fn input_weights(&self, n: usize, signs: &[f64]) -> DMatrix<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.input_seed);
        let k = ((self.input_fraction * n as f64).round() as usize).clamp(1, n);
        let mut w = DMatrix::zeros(n, signs.len());
        for (c, s) in signs.iter().enumerate() {
            for i in sample(&mut rng, n, k).into_iter() {
                w[(i, c)] = s * self.input_weight;
            }
        }
        w
    }
}

/// A reservoir ready to simulate.
#[derive(Debug, Clone)]
pub struct Reservoir {
    pub config: ReservoirConfig,
    pub topology: SpatialTopology,
    pub weights: LifWeights,
    pub params: LifParams,
}

#[derive(Debug, Clone)]
pub struct Response {
    pub trace: SimTrace,
    /// Smoothed spiking activity on the sample grid, N × K.
    pub features: DMatrix<f64>,
    pub grid: TimeGrid,
}

impl Reservoir {
    /// `signs[c]` is +1 for an excitatory input channel and -1 for an
    /// inhibitory one.
    pub fn build(config: &ReservoirConfig, signs: &[f64]) -> Result<Self> {
        config.validate()?;
        let topology = config.topology()?;
        let w = topo_to_weights_scaled(&topology, config.w_exc, config.w_inh)?;
        let n = topology.n();
        let weights = LifWeights::new(config.input_weights(n, signs), w)?;
        Ok(Self {
            config: *config,
            topology,
            weights,
            params: config.lif_params()?,
        })
    }

    pub fn n(&self) -> usize {
        self.weights.n()
    }

    /// Filters each input channel's spikes through the input synapse,
    /// `u_c(t) = sum exp(-(t - t_f)/tau_in) / tau_in`, on the simulation grid.
    pub fn input_current(&self, spikes: &SpikeTrain, duration: f64) -> Result<SampledSignal> {
        let tau = self.config.speeds().tau_input;
        let grid = TimeGrid::new(0.0, self.params.dt, step_count(duration, self.params.dt) + 1)?;
        let mut u = exp_smooth(spikes, self.weights.m(), tau, &grid)?;
        u.values /= tau;
        Ok(u)
    }

    pub fn respond(&self, spikes: &SpikeTrain, duration: f64, sample_every: f64) -> Result<Response> {
        let u = self.input_current(spikes, duration)?;
        let spec = RunSpec::new(duration, sample_every);
        let trace = lif_run(&self.weights, &self.params, Input::Sampled(&u), None, &spec)?;
        let grid = sample_grid(&spec, self.params.dt)?;
        let features = exp_smooth(&trace.spikes, self.n(), self.config.tau_s, &grid)?.values;
        Ok(Response {
            trace,
            features,
            grid,
        })
    }
}
