//! Teacher-to-student transfer: a rate ESN and a LIF network of the same size
//! are driven by the same white noise, the teacher's states are injected in
//! place of the student's recurrent current, and the student's recurrent
//! matrix is regressed from its own smoothed spiking activity.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::codecs::exp_smooth;
use crate::error::{Error, Result};
use crate::esn::{esn_generate, esn_run, EsnParams, EsnWeights};
use crate::lif::{lif_run, sample_grid, Input, LifParams, LifWeights, RunSpec};
use crate::readout::{nrmse, ridge_fit, ternary_fit, TernaryMatrix};
use crate::signal::{step_count, SampledSignal};

/// I.i.d. uniform samples in `[-amplitude, amplitude]` covering `duration`.
pub fn white_noise(m: usize, duration: f64, dt: f64, seed: u64, amplitude: f64) -> Result<SampledSignal> {
    if !(amplitude > 0.0 && amplitude.is_finite()) {
        return Err(Error::invalid("noise amplitude must be positive"));
    }
    if !(dt > 0.0) || !(duration > 0.0) {
        return Err(Error::invalid("dt and duration must be positive"));
    }
    let k = step_count(duration, dt).max(1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let values = DMatrix::from_fn(m, k, |_, _| rng.gen_range(-amplitude..=amplitude));
    SampledSignal::new(0.0, dt, values)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TransferMode {
    FullPrecision,
    Ternary,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TeacherConfig {
    pub leak_lambda: f64,
    pub dt: f64,
    pub spectral_radius: f64,
    pub input_scaling: f64,
    pub density: f64,
    pub seed: u64,
}

impl Default for TeacherConfig {
    fn default() -> Self {
        Self {
            leak_lambda: 5.0,
            dt: 1e-3,
            spectral_radius: 0.9,
            input_scaling: 1.0,
            density: 0.1,
            seed: 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct StudentConfig {
    pub tau_v: f64,
    pub tau_r: f64,
    pub theta: f64,
    pub i_0: f64,
    pub dt: f64,
    /// Student input weights are uniform in `[-input_gain, input_gain]`.
    pub input_gain: f64,
    pub input_seed: u64,
}

impl Default for StudentConfig {
    fn default() -> Self {
        Self {
            tau_v: 0.02,
            tau_r: 0.05,
            theta: 0.1,
            i_0: 0.09,
            dt: 1e-4,
            input_gain: 0.05,
            input_seed: 2,
        }
    }
}

impl StudentConfig {
    pub fn lif_params(&self) -> Result<LifParams> {
        LifParams::new(self.tau_v, self.tau_r, self.theta, self.i_0, self.dt)
    }

    pub fn input_weights(&self, n: usize, m: usize) -> DMatrix<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.input_seed);
        let g = self.input_gain;
        DMatrix::from_fn(n, m, |_, _| g * rng.gen_range(-1.0..=1.0))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TransferConfig {
    pub n: usize,
    pub m: usize,
    pub noise_seed: u64,
    pub noise_amplitude: f64,
    /// Each noise sample is held for this long.
    pub noise_dt: f64,
    pub duration: f64,
    /// Harvest sampling period.
    pub sample_every: f64,
    pub mode: TransferMode,
    pub ridge_alpha: f64,
    pub washout_fraction: f64,
    pub train_fraction: f64,
    pub teacher: TeacherConfig,
    pub student: StudentConfig,
}

impl Default for TransferConfig {
    fn default() -> Self {
        Self {
            n: 64,
            m: 1,
            noise_seed: 0,
            noise_amplitude: 1.0,
            noise_dt: 0.01,
            duration: 20.0,
            sample_every: 0.01,
            mode: TransferMode::FullPrecision,
            ridge_alpha: 1e-6,
            washout_fraction: 0.1,
            train_fraction: 0.8,
            teacher: TeacherConfig::default(),
            student: StudentConfig::default(),
        }
    }
}

impl TransferConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.m == 0 {
            return Err(Error::invalid("n and m must be at least 1"));
        }
        if !(self.washout_fraction >= 0.0 && self.washout_fraction < 1.0) {
            return Err(Error::invalid("washout_fraction must lie in [0, 1)"));
        }
        if !(self.train_fraction > 0.0 && self.train_fraction < 1.0) {
            return Err(Error::invalid("train_fraction must lie in (0, 1)"));
        }
        if !(self.ridge_alpha > 0.0) {
            return Err(Error::invalid("ridge_alpha must be positive"));
        }
        Ok(())
    }

    pub fn teacher_params(&self) -> Result<EsnParams> {
        EsnParams::continuous(self.teacher.leak_lambda, self.teacher.dt)
    }

    pub fn teacher_weights(&self) -> Result<EsnWeights> {
        let t = &self.teacher;
        esn_generate(self.n, self.m, t.spectral_radius, t.input_scaling, t.density, t.seed)
    }

    pub fn noise(&self) -> Result<SampledSignal> {
        white_noise(
            self.m,
            self.duration,
            self.noise_dt,
            self.noise_seed,
            self.noise_amplitude,
        )
    }

    fn run_spec(&self) -> RunSpec {
        RunSpec::new(self.duration, self.sample_every)
    }
}

/// Sampled teacher states and student activity on a shared grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Harvest {
    pub times: Vec<f64>,
    /// Teacher states, N × K.
    pub x: DMatrix<f64>,
    /// Smoothed student activity, N × K.
    pub r_x: DMatrix<f64>,
    /// First sample after washout.
    pub washout: usize,
    /// First held-out sample.
    pub split: usize,
    pub spike_count: usize,
}

impl Harvest {
    pub fn train(&self) -> (DMatrix<f64>, DMatrix<f64>) {
        let len = self.split - self.washout;
        (
            self.r_x.columns(self.washout, len).into_owned(),
            self.x.columns(self.washout, len).into_owned(),
        )
    }

    pub fn test(&self) -> (DMatrix<f64>, DMatrix<f64>) {
        let len = self.x.ncols() - self.split;
        (
            self.r_x.columns(self.split, len).into_owned(),
            self.x.columns(self.split, len).into_owned(),
        )
    }

    pub fn to_csv(&self) -> String {
        let n = self.x.nrows();
        let mut out = String::from("time");
        for i in 0..n {
            out.push_str(&format!(",x{i}"));
        }
        for i in 0..n {
            out.push_str(&format!(",r{i}"));
        }
        out.push('\n');
        for (k, t) in self.times.iter().enumerate() {
            out.push_str(&t.to_string());
            for v in self.x.column(k).iter().chain(self.r_x.column(k).iter()) {
                out.push(',');
                out.push_str(&v.to_string());
            }
            out.push('\n');
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum TransferWeights {
    Full(DMatrix<f64>),
    Ternary(TernaryMatrix),
}

impl TransferWeights {
    pub fn to_f64(&self) -> DMatrix<f64> {
        match self {
            Self::Full(w) => w.clone(),
            Self::Ternary(t) => t.to_f64(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransferResult {
    pub w_hat: TransferWeights,
    /// NRMSE of `Ŵ r_x` against `x` on the held-out tail.
    pub fit_nrmse: f64,
    pub train_nrmse: f64,
    pub harvest: Harvest,
}

/// Runs teacher and injected student and collects the regression data.
pub fn harvest(config: &TransferConfig) -> Result<Harvest> {
    config.validate()?;
    let params = config.student.lif_params()?;
    let spec = config.run_spec();
    let grid = sample_grid(&spec, params.dt)?;
    let k = grid.len;
    let washout = (config.washout_fraction * k as f64).floor() as usize;
    let split = washout + (config.train_fraction * (k - washout) as f64).floor() as usize;
    if split - washout < config.n || split >= k {
        return Err(Error::InsufficientData(format!(
            "{} training samples for {} neurons; lengthen the run",
            split.saturating_sub(washout),
            config.n
        )));
    }

    let noise = config.noise()?;
    let teacher = config.teacher_weights()?;
    let teacher_trace = esn_run(
        &teacher,
        &config.teacher_params()?,
        &noise,
        config.duration,
        config.teacher.dt,
    )?;
    let inject = teacher_trace.to_signal();

    let student = LifWeights::new(
        config.student.input_weights(config.n, config.m),
        DMatrix::zeros(config.n, config.n),
    )?;
    let trace = lif_run(&student, &params, Input::Sampled(&noise), Some(&inject), &spec)?;
    if trace.spikes.is_empty() {
        return Err(Error::Silent(
            "student emitted no spikes; raise i_0 or the input gain".into(),
        ));
    }

    let r_x = exp_smooth(&trace.spikes, config.n, params.tau_r, &grid)?.values / params.tau_r;
    let x = DMatrix::from_fn(config.n, grid.len, |i, k| {
        inject.values[(i, inject.index_at(grid.time(k)).min(inject.len() - 1))]
    });
    Ok(Harvest {
        times: grid.times().collect(),
        x,
        r_x,
        washout,
        split,
        spike_count: trace.spikes.len(),
    })
}

fn flat_nrmse(pred: &DMatrix<f64>, target: &DMatrix<f64>) -> Result<f64> {
    nrmse(pred.as_slice(), target.as_slice())
}

/// Fits Ŵ on an existing harvest.
pub fn fit_harvest(harvest: Harvest, mode: TransferMode, ridge_alpha: f64) -> Result<TransferResult> {
    let (r_train, x_train) = harvest.train();
    let (r_test, x_test) = harvest.test();
    let w_hat = match mode {
        TransferMode::FullPrecision => {
            TransferWeights::Full(ridge_fit(&r_train, &x_train, ridge_alpha)?.w_out)
        }
        TransferMode::Ternary => TransferWeights::Ternary(ternary_fit(&r_train, &x_train)?),
    };
    let w = w_hat.to_f64();
    let fit_nrmse = flat_nrmse(&(&w * &r_test), &x_test)?;
    let train_nrmse = flat_nrmse(&(&w * &r_train), &x_train)?;
    Ok(TransferResult {
        w_hat,
        fit_nrmse,
        train_nrmse,
        harvest,
    })
}

pub fn transfer(config: &TransferConfig) -> Result<TransferResult> {
    fit_harvest(harvest(config)?, config.mode, config.ridge_alpha)
}

#[derive(Debug, Clone, PartialEq)]
pub struct AutonomyReport {
    pub times: Vec<f64>,
    /// `Ŵ r` of the free-running student, N × K.
    pub predicted: DMatrix<f64>,
    /// Teacher states on the same grid, N × K.
    pub teacher: DMatrix<f64>,
    /// Over samples after the washout.
    pub nrmse: f64,
}

/// Runs the student with `Ŵ` as its recurrence (no injection) under the
/// configured noise and compares `Ŵ r` to the teacher. Diagnostic only.
pub fn autonomy_check(w_hat: &DMatrix<f64>, config: &TransferConfig) -> Result<AutonomyReport> {
    config.validate()?;
    let noise = config.noise()?;
    let teacher = esn_run(
        &config.teacher_weights()?,
        &config.teacher_params()?,
        &noise,
        config.duration,
        config.teacher.dt,
    )?
    .to_signal();
    let params = config.student.lif_params()?;
    let student = LifWeights::new(config.student.input_weights(config.n, config.m), w_hat.clone())?;
    let spec = config.run_spec();
    let trace = lif_run(&student, &params, Input::Sampled(&noise), None, &spec)?;
    let grid = sample_grid(&spec, params.dt)?;
    let r = exp_smooth(&trace.spikes, config.n, params.tau_r, &grid)?.values / params.tau_r;
    let predicted = w_hat * r;
    let x = DMatrix::from_fn(config.n, grid.len, |i, k| {
        teacher.values[(i, teacher.index_at(grid.time(k)).min(teacher.len() - 1))]
    });
    let washout = (config.washout_fraction * grid.len as f64).floor() as usize;
    let len = grid.len - washout;
    let nrmse = flat_nrmse(
        &predicted.columns(washout, len).into_owned(),
        &x.columns(washout, len).into_owned(),
    )?;
    Ok(AutonomyReport {
        times: grid.times().collect(),
        predicted,
        teacher: x,
        nrmse,
    })
}
