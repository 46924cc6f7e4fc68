//! Leaky-integrator echo state network, used as the transfer teacher and as
//! the software ECG baseline.
//!
//! Continuous form, Euler-discretized:
//! `x <- x + dt * (-lambda x + tanh(W_in u + W x))`.
//! Discrete leaky form with per-step leak `a = lambda * dt`:
//! `x <- (1 - a) x + a * tanh(W_in u + W x)`.

use nalgebra::{DMatrix, DVector};
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::signal::{step_count, SampledSignal, TimeGrid};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EsnUpdate {
    Continuous,
    LeakyDiscrete,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EsnParams {
    /// Leaking rate (1/s).
    pub leak_lambda: f64,
    /// Integration step (s).
    pub dt: f64,
    pub update: EsnUpdate,
}

impl EsnParams {
    pub fn continuous(leak_lambda: f64, dt: f64) -> Result<Self> {
        let p = Self {
            leak_lambda,
            dt,
            update: EsnUpdate::Continuous,
        };
        p.validate()?;
        Ok(p)
    }

    /// Discrete leaky update with per-step leak coefficient `leak` in (0, 1].
    pub fn discrete(leak: f64, dt: f64) -> Result<Self> {
        let p = Self {
            leak_lambda: leak / dt,
            dt,
            update: EsnUpdate::LeakyDiscrete,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.leak_lambda > 0.0) || !(self.dt > 0.0) {
            return Err(Error::invalid("leak_lambda and dt must be positive"));
        }
        if self.leak_lambda * self.dt > 1.0 + 1e-12 {
            return Err(Error::invalid(format!(
                "dt * leak_lambda = {} exceeds 1",
                self.leak_lambda * self.dt
            )));
        }
        Ok(())
    }

    pub fn step_leak(&self) -> f64 {
        self.leak_lambda * self.dt
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EsnWeights {
    pub w_in: DMatrix<f64>,
    pub w: DMatrix<f64>,
    /// Achieved spectral radius of `w`.
    pub spectral_radius: f64,
    pub input_scaling: f64,
    pub density: f64,
    pub seed: u64,
}

impl EsnWeights {
    pub fn n(&self) -> usize {
        self.w.nrows()
    }

    pub fn m(&self) -> usize {
        self.w_in.ncols()
    }

    /// Wraps hand-built matrices, recording their spectral radius.
    pub fn from_matrices(w_in: DMatrix<f64>, w: DMatrix<f64>) -> Result<Self> {
        if w.nrows() != w.ncols() || w_in.nrows() != w.nrows() {
            return Err(Error::Dimension {
                context: "ESN weights",
                expected: w.nrows(),
                actual: w_in.nrows(),
            });
        }
        let nnz = w.iter().filter(|x| **x != 0.0).count();
        let total = (w.nrows() * w.ncols()).max(1);
        Ok(Self {
            spectral_radius: spectral_radius(&w),
            input_scaling: w_in.amax(),
            density: nnz as f64 / total as f64,
            seed: 0,
            w_in,
            w,
        })
    }
}

/// Spectral radius from the full complex spectrum (real Schur form).
pub fn spectral_radius(w: &DMatrix<f64>) -> f64 {
    if w.is_empty() {
        return 0.0;
    }
    w.clone()
        .schur()
        .complex_eigenvalues()
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max)
}

/// True when the directed graph with an edge `j -> i` for every nonzero
/// `w[(i, j)]` has no cycle (Kahn's algorithm).
pub fn support_is_acyclic(w: &DMatrix<f64>) -> bool {
    let n = w.nrows();
    let mut indegree = vec![0usize; n];
    for i in 0..n {
        for j in 0..n {
            if w[(i, j)] != 0.0 {
                indegree[i] += 1;
            }
        }
    }
    let mut ready: Vec<usize> = (0..n).filter(|&i| indegree[i] == 0).collect();
    let mut removed = 0;
    while let Some(j) = ready.pop() {
        removed += 1;
        for i in 0..n {
            if w[(i, j)] != 0.0 {
                indegree[i] -= 1;
                if indegree[i] == 0 {
                    ready.push(i);
                }
            }
        }
    }
    removed == n
}

/// Norm-ratio power iteration. Stops after `max_iter` iterations or when the
/// relative change of the estimate drops below `tol`. Only reliable when the
/// dominant eigenvalue is real and simple.
pub fn power_iteration_radius(w: &DMatrix<f64>, max_iter: usize, tol: f64) -> f64 {
    let n = w.nrows();
    if n == 0 {
        return 0.0;
    }
    let mut x = DVector::from_fn(n, |i, _| 1.0 + (i as f64 * 0.618_033_988_75).fract());
    x /= x.norm();
    let mut est = 0.0;
    for _ in 0..max_iter {
        let y = w * &x;
        let norm = y.norm();
        if norm == 0.0 {
            return 0.0;
        }
        let rel = (norm - est).abs() / norm;
        est = norm;
        x = y / norm;
        if rel < tol {
            break;
        }
    }
    est
}

/// Random reservoir: `round(density * n^2)` recurrent entries uniform in
/// [-1, 1] at uniformly chosen positions, rescaled to the target spectral
/// radius; dense input weights uniform in [-input_scaling, input_scaling].
pub fn esn_generate(
    n: usize,
    m: usize,
    target_radius: f64,
    input_scaling: f64,
    density: f64,
    seed: u64,
) -> Result<EsnWeights> {
    if n == 0 || m == 0 {
        return Err(Error::invalid("n and m must be at least 1"));
    }
    if !(target_radius > 0.0) {
        return Err(Error::invalid("spectral radius must be positive"));
    }
    if !(density > 0.0 && density <= 1.0) {
        return Err(Error::invalid("density must lie in (0, 1]"));
    }
    if !(input_scaling >= 0.0) {
        return Err(Error::invalid("input scaling must be nonnegative"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let total = n * n;
    let nnz = ((density * total as f64).round() as usize).clamp(1, total);
    let mut w = DMatrix::zeros(n, n);
    for pos in sample(&mut rng, total, nnz).into_iter() {
        w[(pos / n, pos % n)] = rng.gen_range(-1.0..=1.0);
    }
    let w_in = DMatrix::from_fn(n, m, |_, _| input_scaling * rng.gen_range(-1.0..=1.0));

    // An acyclic support graph means a nilpotent matrix. Its eigenvalues are
    // exactly zero but come out of the Schur solver as rounding noise, which
    // would blow the rescaled weights up.
    if support_is_acyclic(&w) {
        return Err(Error::ZeroSpectralRadius);
    }
    let raw = spectral_radius(&w);
    if raw <= f64::MIN_POSITIVE {
        return Err(Error::ZeroSpectralRadius);
    }
    w *= target_radius / raw;
    let achieved = spectral_radius(&w);
    if (achieved - target_radius).abs() > 1e-6 * target_radius {
        return Err(Error::ZeroSpectralRadius);
    }
    Ok(EsnWeights {
        w_in,
        w,
        spectral_radius: achieved,
        input_scaling,
        density: nnz as f64 / total as f64,
        seed,
    })
}

/// Named configurations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EsnPreset {
    /// Per-step leak coefficient of the discrete update.
    pub leak: f64,
    pub spectral_radius: f64,
    pub ridge_alpha: f64,
}

impl EsnPreset {
    pub const ECG_BASELINE: EsnPreset = EsnPreset {
        leak: 0.99,
        spectral_radius: 0.9,
        ridge_alpha: 1e-6,
    };

    pub fn by_name(name: &str) -> Result<Self> {
        match name {
            "ecg-baseline" => Ok(Self::ECG_BASELINE),
            other => Err(Error::UnknownPreset(other.to_string())),
        }
    }

    pub fn params(&self, dt: f64) -> Result<EsnParams> {
        EsnParams::discrete(self.leak, dt)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EsnTrace {
    pub sample_times: Vec<f64>,
    /// States, N × K.
    pub states: DMatrix<f64>,
}

impl EsnTrace {
    pub fn to_signal(&self) -> SampledSignal {
        let dt = if self.sample_times.len() > 1 {
            self.sample_times[1] - self.sample_times[0]
        } else {
            1.0
        };
        SampledSignal {
            t0: self.sample_times.first().copied().unwrap_or(0.0),
            dt,
            values: self.states.clone(),
        }
    }
}

/// Row-compressed copy of the recurrent matrix for the update loop.
struct SparseRows {
    rows: Vec<Vec<(usize, f64)>>,
}

impl SparseRows {
    fn new(w: &DMatrix<f64>) -> Self {
        let rows = (0..w.nrows())
            .map(|i| {
                (0..w.ncols())
                    .filter_map(|j| {
                        let v = w[(i, j)];
                        (v != 0.0).then_some((j, v))
                    })
                    .collect()
            })
            .collect();
        Self { rows }
    }
}

pub fn esn_run(
    weights: &EsnWeights,
    params: &EsnParams,
    input: &SampledSignal,
    duration: f64,
    sample_every: f64,
) -> Result<EsnTrace> {
    esn_run_from(&DVector::zeros(weights.n()), weights, params, input, duration, sample_every)
}

/// Runs from state `x0`, sampling at `t = j * sample_every` including `t = 0`.
pub fn esn_run_from(
    x0: &DVector<f64>,
    weights: &EsnWeights,
    params: &EsnParams,
    input: &SampledSignal,
    duration: f64,
    sample_every: f64,
) -> Result<EsnTrace> {
    params.validate()?;
    let dt = params.dt;
    let ratio = sample_every / dt;
    let stride = ratio.round();
    if stride < 1.0 || (ratio - stride).abs() > 1e-6 * ratio.max(1.0) {
        return Err(Error::invalid("sample_every must be a positive multiple of dt"));
    }
    let stride = stride as usize;
    let steps = step_count(duration, dt);
    let grid = TimeGrid::new(0.0, stride as f64 * dt, steps / stride + 1)?;
    let mut states = DMatrix::zeros(weights.n(), grid.len);
    esn_drive(x0, weights, params, input, duration, |k, x| {
        if k % stride == 0 {
            states.column_mut(k / stride).copy_from_slice(x);
        }
    })?;
    Ok(EsnTrace {
        sample_times: grid.times().collect(),
        states,
    })
}

/// Integrates from `x0` for `duration`, calling `visit(k, x)` with the state
/// at `t = k * dt` for every step, `k = 0` included.
pub fn esn_drive(
    x0: &DVector<f64>,
    weights: &EsnWeights,
    params: &EsnParams,
    input: &SampledSignal,
    duration: f64,
    mut visit: impl FnMut(usize, &[f64]),
) -> Result<()> {
    params.validate()?;
    let n = weights.n();
    let m = weights.m();
    if x0.len() != n {
        return Err(Error::Dimension {
            context: "initial ESN state",
            expected: n,
            actual: x0.len(),
        });
    }
    if input.channels() != m {
        return Err(Error::Dimension {
            context: "ESN input channels",
            expected: m,
            actual: input.channels(),
        });
    }
    if !(duration > 0.0) {
        return Err(Error::invalid("duration must be positive"));
    }
    if !input.covers(duration) {
        return Err(Error::InputTooShort {
            covered: input.end_time(),
            required: duration,
        });
    }
    let dt = params.dt;
    let steps = step_count(duration, dt);
    let sparse = SparseRows::new(&weights.w);
    let mut x: Vec<f64> = x0.iter().copied().collect();
    let mut pre = vec![0.0; n];
    visit(0, &x);
    let lambda = params.leak_lambda;
    let a = params.step_leak();

    for k in 0..steps {
        let t = k as f64 * dt;
        let u = input.values.column(input.index_at(t));
        for i in 0..n {
            let mut acc = 0.0;
            for c in 0..m {
                acc += weights.w_in[(i, c)] * u[c];
            }
            for &(j, wij) in &sparse.rows[i] {
                acc += wij * x[j];
            }
            pre[i] = acc;
        }
        match params.update {
            EsnUpdate::Continuous => {
                for i in 0..n {
                    x[i] += dt * (-lambda * x[i] + pre[i].tanh());
                }
            }
            EsnUpdate::LeakyDiscrete => {
                for i in 0..n {
                    x[i] = (1.0 - a) * x[i] + a * pre[i].tanh();
                }
            }
        }
        if let Some(i) = x.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                neuron: i,
                time: (k + 1) as f64 * dt,
            });
        }
        visit(k + 1, &x);
    }
    Ok(())
}
