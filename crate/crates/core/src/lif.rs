//! Discrete-time recurrent networks of leaky integrate-and-fire neurons.
//!
//! Dynamics (resting potential 0, unit membrane resistance):
//!
//! ```text
//! tau_v dv/dt = -v + W_in u + W r + I_0 - theta s
//! tau_r dr/dt = -r + s
//! ```
//!
//! integrated with explicit forward Euler. A neuron whose updated potential
//! exceeds `theta` spikes and has `theta` subtracted from its potential; the
//! Dirac input to the synaptic filter adds `1/tau_r` to its current in the
//! same step. When an injection vector is supplied it replaces `W r`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::signal::{step_count, step_index, SampledSignal, SpikeTrain, TimeGrid, GRID_EPS};

pub const DEFAULT_DT: f64 = 1e-4;

/// Fraction of the rheobase used for the default bias current.
pub const DEFAULT_BIAS_FRACTION: f64 = 0.9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LifParams {
    /// Membrane time constant (s).
    pub tau_v: f64,
    /// Synaptic time constant (s).
    pub tau_r: f64,
    /// Threshold minus reset potential.
    pub theta: f64,
    /// Constant bias current.
    pub i_0: f64,
    /// Integration step (s).
    pub dt: f64,
}

impl LifParams {
    pub fn new(tau_v: f64, tau_r: f64, theta: f64, i_0: f64, dt: f64) -> Result<Self> {
        let p = Self {
            tau_v,
            tau_r,
            theta,
            i_0,
            dt,
        };
        p.validate()?;
        Ok(p)
    }

    /// Bias just below the rheobase. With unit resistance the steady-state
    /// potential equals the input current, so the rheobase is `theta`.
    pub fn with_default_bias(tau_v: f64, tau_r: f64, theta: f64, dt: f64) -> Result<Self> {
        Self::new(tau_v, tau_r, theta, DEFAULT_BIAS_FRACTION * theta, dt)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("tau_v", self.tau_v),
            ("tau_r", self.tau_r),
            ("theta", self.theta),
            ("dt", self.dt),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::invalid(format!("{name} must be positive, got {v}")));
            }
        }
        if !self.i_0.is_finite() {
            return Err(Error::invalid("i_0 must be finite"));
        }
        let limit = self.tau_v.min(self.tau_r) / 10.0;
        if self.dt > limit * (1.0 + GRID_EPS) {
            return Err(Error::invalid(format!(
                "dt = {} exceeds min(tau_v, tau_r)/10 = {limit}",
                self.dt
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LifWeights {
    /// Input weights, N × m.
    pub w_in: DMatrix<f64>,
    /// Recurrent weights, N × N; `w[(i, j)]` maps neuron j onto neuron i.
    pub w: DMatrix<f64>,
}

impl LifWeights {
    pub fn new(w_in: DMatrix<f64>, w: DMatrix<f64>) -> Result<Self> {
        let n = w.nrows();
        if w.ncols() != n {
            return Err(Error::Dimension {
                context: "recurrent weights (columns)",
                expected: n,
                actual: w.ncols(),
            });
        }
        if w_in.nrows() != n {
            return Err(Error::Dimension {
                context: "input weights (rows)",
                expected: n,
                actual: w_in.nrows(),
            });
        }
        Ok(Self { w_in, w })
    }

    pub fn zeros(n: usize, m: usize) -> Self {
        Self {
            w_in: DMatrix::zeros(n, m),
            w: DMatrix::zeros(n, n),
        }
    }

    pub fn n(&self) -> usize {
        self.w.nrows()
    }

    pub fn m(&self) -> usize {
        self.w_in.ncols()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LifState {
    pub v: DVector<f64>,
    pub r: DVector<f64>,
    pub t: f64,
}

impl LifState {
    pub fn zeros(n: usize) -> Self {
        Self {
            v: DVector::zeros(n),
            r: DVector::zeros(n),
            t: 0.0,
        }
    }
}

fn first_non_finite(v: &DVector<f64>) -> Option<usize> {
    v.iter().position(|x| !x.is_finite())
}

/// One forward-Euler step. Returns the new state and the indices that fired.
pub fn lif_step(
    state: &LifState,
    params: &LifParams,
    weights: &LifWeights,
    u: &[f64],
    inject: Option<&[f64]>,
) -> Result<(LifState, Vec<usize>)> {
    let n = weights.n();
    if state.v.len() != n || state.r.len() != n {
        return Err(Error::Dimension {
            context: "state",
            expected: n,
            actual: state.v.len().min(state.r.len()),
        });
    }
    if u.len() != weights.m() {
        return Err(Error::Dimension {
            context: "input vector",
            expected: weights.m(),
            actual: u.len(),
        });
    }
    let recurrent: DVector<f64> = match inject {
        Some(x) if x.len() != n => {
            return Err(Error::Dimension {
                context: "injection vector",
                expected: n,
                actual: x.len(),
            })
        }
        Some(x) => DVector::from_column_slice(x),
        None => &weights.w * &state.r,
    };
    let u = DVector::from_column_slice(u);
    let drive = &weights.w_in * u + recurrent;

    let gv = params.dt / params.tau_v;
    let decay_r = 1.0 - params.dt / params.tau_r;
    let kick = 1.0 / params.tau_r;
    let mut v = state.v.clone();
    let mut r = state.r.clone();
    let mut fired = Vec::new();
    for i in 0..n {
        v[i] += gv * (-v[i] + drive[i] + params.i_0);
        r[i] *= decay_r;
        if v[i] > params.theta {
            v[i] -= params.theta;
            r[i] += kick;
            fired.push(i);
        }
    }
    let t = state.t + params.dt;
    if let Some(i) = first_non_finite(&v).or_else(|| first_non_finite(&r)) {
        return Err(Error::NonFinite { neuron: i, time: t });
    }
    Ok((LifState { v, r, t }, fired))
}

/// External drive for [`lif_run`].
#[derive(Debug, Clone, Copy)]
pub enum Input<'a> {
    /// No external input.
    Silent,
    /// Sampled m-channel signal, zero-order hold between samples.
    Sampled(&'a SampledSignal),
    /// Spike train whose neuron index is the input channel. Each spike is a
    /// unit impulse held for one step (amplitude `1/dt`).
    Spikes(&'a SpikeTrain),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RunSpec {
    pub duration: f64,
    pub sample_every: f64,
    pub record_v: bool,
}

impl RunSpec {
    pub fn new(duration: f64, sample_every: f64) -> Self {
        Self {
            duration,
            sample_every,
            record_v: false,
        }
    }

    pub fn with_v(mut self) -> Self {
        self.record_v = true;
        self
    }

    /// Steps per sample; `sample_every` must be a whole multiple of `dt`.
    pub(crate) fn stride(&self, dt: f64) -> Result<usize> {
        if !(self.duration > 0.0) {
            return Err(Error::invalid("duration must be positive"));
        }
        let ratio = self.sample_every / dt;
        let stride = ratio.round();
        if stride < 1.0 || (ratio - stride).abs() > 1e-6 * ratio.max(1.0) {
            return Err(Error::invalid(format!(
                "sample_every = {} is not a positive multiple of dt = {dt}",
                self.sample_every
            )));
        }
        Ok(stride as usize)
    }
}

/// Sampled output of a simulation run.
#[derive(Debug, Clone, PartialEq)]
pub struct SimTrace {
    pub sample_times: Vec<f64>,
    /// Synaptic currents, N × K.
    pub r_samples: DMatrix<f64>,
    pub spikes: SpikeTrain,
    pub v_samples: Option<DMatrix<f64>>,
}

impl SimTrace {
    pub fn n(&self) -> usize {
        self.r_samples.nrows()
    }

    /// The sampled synaptic currents as a signal on the sample grid.
    pub fn r_signal(&self) -> SampledSignal {
        let dt = if self.sample_times.len() > 1 {
            self.sample_times[1] - self.sample_times[0]
        } else {
            1.0
        };
        SampledSignal {
            t0: self.sample_times.first().copied().unwrap_or(0.0),
            dt,
            values: self.r_samples.clone(),
        }
    }

    /// `time,n0,n1,...` CSV of the synaptic currents.
    pub fn to_csv(&self) -> String {
        use std::fmt::Write as _;
        let mut out = String::from("time");
        for i in 0..self.n() {
            let _ = write!(out, ",n{i}");
        }
        out.push('\n');
        for (k, t) in self.sample_times.iter().enumerate() {
            let _ = write!(out, "{t}");
            for i in 0..self.n() {
                let _ = write!(out, ",{}", self.r_samples[(i, k)]);
            }
            out.push('\n');
        }
        out
    }
}

/// Per-step input provider, precomputed so the hot loop stays branch-light.
enum StepInput<'a> {
    Silent,
    Sampled(&'a SampledSignal),
    Spikes { counts: Vec<(usize, usize, f64)> },
}

impl<'a> StepInput<'a> {
    fn prepare(input: Input<'a>, m: usize, dt: f64, steps: usize, duration: f64) -> Result<Self> {
        match input {
            Input::Silent => Ok(StepInput::Silent),
            Input::Sampled(sig) => {
                if sig.channels() != m {
                    return Err(Error::Dimension {
                        context: "input channels",
                        expected: m,
                        actual: sig.channels(),
                    });
                }
                if !sig.covers(duration) {
                    return Err(Error::InputTooShort {
                        covered: sig.end_time(),
                        required: duration,
                    });
                }
                Ok(StepInput::Sampled(sig))
            }
            Input::Spikes(train) => {
                if train.neuron_bound() > m {
                    return Err(Error::Dimension {
                        context: "input spike channel",
                        expected: m,
                        actual: train.neuron_bound(),
                    });
                }
                // (step, channel, amplitude), sorted by step
                let mut counts: Vec<(usize, usize, f64)> = Vec::new();
                for s in train.events() {
                    if s.time < 0.0 {
                        continue;
                    }
                    let k = step_index(s.time, dt);
                    if k >= steps {
                        break;
                    }
                    match counts.last_mut() {
                        Some(last) if last.0 == k && last.1 == s.neuron => last.2 += 1.0 / dt,
                        _ => counts.push((k, s.neuron, 1.0 / dt)),
                    }
                }
                Ok(StepInput::Spikes { counts })
            }
        }
    }
}

/// Drives the network for `spec.duration` seconds from the zero state.
///
/// Samples are taken at `t = j * sample_every` for `j = 0, 1, ...` up to
/// the duration, including the initial state. The run is deterministic.
pub fn lif_run(
    weights: &LifWeights,
    params: &LifParams,
    input: Input<'_>,
    inject: Option<&SampledSignal>,
    spec: &RunSpec,
) -> Result<SimTrace> {
    lif_run_from(&LifState::zeros(weights.n()), weights, params, input, inject, spec)
}

/// [`lif_run`] starting from an arbitrary state.
pub fn lif_run_from(
    state0: &LifState,
    weights: &LifWeights,
    params: &LifParams,
    input: Input<'_>,
    inject: Option<&SampledSignal>,
    spec: &RunSpec,
) -> Result<SimTrace> {
    params.validate()?;
    let n = weights.n();
    let m = weights.m();
    let dt = params.dt;
    if state0.v.len() != n || state0.r.len() != n {
        return Err(Error::Dimension {
            context: "initial state",
            expected: n,
            actual: state0.v.len(),
        });
    }
    let stride = spec.stride(dt)?;
    let steps = step_count(spec.duration, dt);
    let n_samples = steps / stride + 1;

    let step_input = StepInput::prepare(input, m, dt, steps, spec.duration)?;
    if let Some(x) = inject {
        if x.channels() != n {
            return Err(Error::Dimension {
                context: "injection channels",
                expected: n,
                actual: x.channels(),
            });
        }
        if !x.covers(spec.duration) {
            return Err(Error::InputTooShort {
                covered: x.end_time(),
                required: spec.duration,
            });
        }
    }

    let gv = dt / params.tau_v;
    let decay_r = 1.0 - dt / params.tau_r;
    let kick = 1.0 / params.tau_r;
    let t0 = state0.t;

    let mut v: Vec<f64> = state0.v.iter().copied().collect();
    let mut r: Vec<f64> = state0.r.iter().copied().collect();
    // Recurrent drive W r, maintained incrementally: the filter is linear
    // with a shared time constant, so W r decays like r and jumps by
    // W[:, j] / tau_r when neuron j fires.
    let mut rec: Vec<f64> = if inject.is_none() {
        (&weights.w * &state0.r).iter().copied().collect()
    } else {
        vec![0.0; n]
    };
    let mut drive = vec![0.0; n];
    let mut fired: Vec<usize> = Vec::new();
    let mut spike_cursor = 0usize;

    let mut sample_times = Vec::with_capacity(n_samples);
    let mut r_samples = DMatrix::zeros(n, n_samples);
    let mut v_samples = spec.record_v.then(|| DMatrix::zeros(n, n_samples));
    let mut spikes = SpikeTrain::new();

    let record = |j: usize,
                  t: f64,
                  r: &[f64],
                  v: &[f64],
                  sample_times: &mut Vec<f64>,
                  r_samples: &mut DMatrix<f64>,
                  v_samples: &mut Option<DMatrix<f64>>| {
        sample_times.push(t);
        r_samples.column_mut(j).copy_from_slice(r);
        if let Some(vs) = v_samples.as_mut() {
            vs.column_mut(j).copy_from_slice(v);
        }
    };
    record(0, t0, &r, &v, &mut sample_times, &mut r_samples, &mut v_samples);

    for k in 0..steps {
        let t = t0 + k as f64 * dt;
        // recurrent or injected term
        match inject {
            Some(x) => {
                let col = x.index_at(t - t0);
                drive.copy_from_slice(x.values.column(col).as_slice());
            }
            None => drive.copy_from_slice(&rec),
        }
        // external input
        match &step_input {
            StepInput::Silent => {}
            StepInput::Sampled(sig) => {
                let col = sig.values.column(sig.index_at(t - t0));
                for c in 0..m {
                    let uc = col[c];
                    if uc != 0.0 {
                        for (d, w) in drive.iter_mut().zip(weights.w_in.column(c).iter()) {
                            *d += w * uc;
                        }
                    }
                }
            }
            StepInput::Spikes { counts } => {
                while spike_cursor < counts.len() && counts[spike_cursor].0 == k {
                    let (_, c, amp) = counts[spike_cursor];
                    for (d, w) in drive.iter_mut().zip(weights.w_in.column(c).iter()) {
                        *d += w * amp;
                    }
                    spike_cursor += 1;
                }
            }
        }

        fired.clear();
        for i in 0..n {
            v[i] += gv * (-v[i] + drive[i] + params.i_0);
            r[i] *= decay_r;
            if v[i] > params.theta {
                v[i] -= params.theta;
                r[i] += kick;
                fired.push(i);
            }
        }
        let t_next = t0 + (k + 1) as f64 * dt;
        if inject.is_none() {
            for x in rec.iter_mut() {
                *x *= decay_r;
            }
            for &j in &fired {
                for (x, w) in rec.iter_mut().zip(weights.w.column(j).iter()) {
                    *x += w * kick;
                }
            }
        }
        for &j in &fired {
            spikes.push(j, t_next);
        }
        if !v[..].iter().sum::<f64>().is_finite() || !rec[..].iter().sum::<f64>().is_finite() {
            let i = v
                .iter()
                .zip(rec.iter())
                .position(|(a, b)| !a.is_finite() || !b.is_finite())
                .unwrap_or(0);
            return Err(Error::NonFinite {
                neuron: i,
                time: t_next,
            });
        }
        if (k + 1) % stride == 0 {
            record(
                (k + 1) / stride,
                t_next,
                &r,
                &v,
                &mut sample_times,
                &mut r_samples,
                &mut v_samples,
            );
        }
    }

    Ok(SimTrace {
        sample_times,
        r_samples,
        spikes,
        v_samples,
    })
}

/// The synaptic filter alone: Euler-integrates `tau_r dr/dt = -r + s` for a
/// given spike train, sampled on the same grid [`lif_run`] uses.
pub fn synaptic_trace(
    spikes: &SpikeTrain,
    n: usize,
    tau_r: f64,
    dt: f64,
    spec: &RunSpec,
) -> Result<DMatrix<f64>> {
    let stride = spec.stride(dt)?;
    let steps = step_count(spec.duration, dt);
    let n_samples = steps / stride + 1;
    let decay = 1.0 - dt / tau_r;
    let kick = 1.0 / tau_r;
    let mut r = vec![0.0; n];
    let mut out = DMatrix::zeros(n, n_samples);
    let events = spikes.events();
    let mut cursor = 0;
    for k in 0..steps {
        for x in r.iter_mut() {
            *x *= decay;
        }
        // a spike emitted at the end of step k carries time (k+1) dt
        let t_end = (k + 1) as f64 * dt;
        while cursor < events.len() && events[cursor].time <= t_end + GRID_EPS * dt {
            let s = events[cursor];
            if s.neuron < n {
                r[s.neuron] += kick;
            }
            cursor += 1;
        }
        if (k + 1) % stride == 0 {
            out.column_mut((k + 1) / stride).copy_from_slice(&r);
        }
    }
    Ok(out)
}

/// Sample grid matching a [`lif_run`] with the given spec.
pub fn sample_grid(spec: &RunSpec, dt: f64) -> Result<TimeGrid> {
    let stride = spec.stride(dt)?;
    let steps = step_count(spec.duration, dt);
    TimeGrid::new(0.0, stride as f64 * dt, steps / stride + 1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn params() -> LifParams {
        LifParams::new(0.02, 0.01, 1.0, 0.0, 1e-4).unwrap()
    }

    #[test]
    fn rejects_coarse_dt() {
        assert!(LifParams::new(0.02, 0.005, 1.0, 0.0, 1e-3).is_err());
        assert!(LifParams::new(0.02, 0.005, 1.0, 0.0, 5e-4).is_ok());
        assert!(LifParams::new(-0.02, 0.005, 1.0, 0.0, 1e-4).is_err());
    }

    #[test]
    fn homogeneous_fixed_point() {
        let w = LifWeights::zeros(3, 1);
        let (s, fired) = lif_step(&LifState::zeros(3), &params(), &w, &[0.0], None).unwrap();
        assert!(fired.is_empty());
        assert!(s.v.iter().all(|&x| x == 0.0));
        assert!(s.r.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn two_neuron_step_matches_hand_arithmetic() {
        let p = LifParams::new(0.02, 0.01, 1.0, 0.3, 1e-4).unwrap();
        let w = LifWeights::new(
            DMatrix::from_row_slice(2, 1, &[0.5, -0.25]),
            DMatrix::from_row_slice(2, 2, &[0.0, 0.7, -0.4, 0.1]),
        )
        .unwrap();
        let s = LifState {
            v: DVector::from_vec(vec![0.2, 1.0]),
            r: DVector::from_vec(vec![3.0, 5.0]),
            t: 0.0,
        };
        let (next, fired) = lif_step(&s, &p, &w, &[2.0], None).unwrap();
        // hand-expanded Euler step
        let g = 1e-4 / 0.02;
        let i0 = 0.5 * 2.0 + (0.0 * 3.0 + 0.7 * 5.0) + 0.3;
        let i1 = -0.25 * 2.0 + (-0.4 * 3.0 + 0.1 * 5.0) + 0.3;
        let v0 = 0.2 + g * (-0.2 + i0);
        let v1 = 1.0 + g * (-1.0 + i1);
        assert!(v0 < 1.0 && v1 < 1.0);
        assert!(fired.is_empty());
        assert_abs_diff_eq!(next.v[0], v0, epsilon = 1e-12);
        assert_abs_diff_eq!(next.v[1], v1, epsilon = 1e-12);
        let d = 1.0 - 1e-4 / 0.01;
        assert_abs_diff_eq!(next.r[0], 3.0 * d, epsilon = 1e-12);
        assert_abs_diff_eq!(next.r[1], 5.0 * d, epsilon = 1e-12);
    }

    #[test]
    fn firing_subtracts_theta_and_kicks_r() {
        let p = LifParams::new(0.02, 0.01, 1.0, 0.0, 1e-4).unwrap();
        let w = LifWeights::new(DMatrix::from_element(1, 1, 1.0), DMatrix::zeros(1, 1)).unwrap();
        let s = LifState {
            v: DVector::from_element(1, 0.999),
            r: DVector::zeros(1),
            t: 0.0,
        };
        let (next, fired) = lif_step(&s, &p, &w, &[100.0], None).unwrap();
        assert_eq!(fired, vec![0]);
        let g = 1e-4 / 0.02;
        assert_abs_diff_eq!(next.v[0], 0.999 + g * (-0.999 + 100.0) - 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(next.r[0], 100.0, epsilon = 1e-12);
    }

    #[test]
    fn dimension_errors() {
        let w = LifWeights::zeros(2, 1);
        let s = LifState::zeros(2);
        assert!(matches!(
            lif_step(&s, &params(), &w, &[0.0, 1.0], None),
            Err(Error::Dimension { .. })
        ));
        assert!(matches!(
            lif_step(&s, &params(), &w, &[0.0], Some(&[1.0])),
            Err(Error::Dimension { .. })
        ));
    }

    #[test]
    fn non_finite_names_neuron() {
        let w = LifWeights::new(DMatrix::from_row_slice(2, 1, &[0.0, 1e10]), DMatrix::zeros(2, 2))
            .unwrap();
        let err = lif_step(&LifState::zeros(2), &params(), &w, &[1e300], None).unwrap_err();
        assert!(matches!(err, Error::NonFinite { neuron: 1, .. }), "{err}");
    }

    #[test]
    fn silent_run_is_empty() {
        let w = LifWeights::zeros(4, 1);
        let tr = lif_run(&w, &params(), Input::Silent, None, &RunSpec::new(0.01, 1e-3)).unwrap();
        assert!(tr.spikes.is_empty());
        assert_eq!(tr.sample_times.len(), 11);
        assert_abs_diff_eq!(tr.sample_times[10], 0.01, epsilon = 1e-15);
    }

    #[test]
    fn short_input_is_rejected() {
        let w = LifWeights::zeros(2, 1);
        let sig = SampledSignal::from_channels(0.0, 1e-3, &[vec![0.0; 5]]).unwrap();
        let err = lif_run(&w, &params(), Input::Sampled(&sig), None, &RunSpec::new(0.01, 1e-3))
            .unwrap_err();
        assert!(matches!(err, Error::InputTooShort { .. }));
    }

    #[test]
    fn run_matches_repeated_steps() {
        let p = LifParams::new(0.02, 0.01, 1.0, 0.95, 1e-4).unwrap();
        let w = LifWeights::new(
            DMatrix::from_row_slice(3, 1, &[1.5, 0.5, 0.0]),
            DMatrix::from_row_slice(3, 3, &[0.0, 0.02, -0.01, 0.03, 0.0, 0.0, 0.05, 0.04, 0.0]),
        )
        .unwrap();
        let sig = SampledSignal::from_channels(0.0, 1e-4, &[vec![1.0; 2001]]).unwrap();
        let spec = RunSpec::new(0.2, 1e-4).with_v();
        let tr = lif_run(&w, &p, Input::Sampled(&sig), None, &spec).unwrap();
        let mut s = LifState::zeros(3);
        let mut n_spikes = 0;
        for k in 0..2000 {
            let (next, fired) = lif_step(&s, &p, &w, &[1.0], None).unwrap();
            n_spikes += fired.len();
            s = next;
            for i in 0..3 {
                assert_abs_diff_eq!(tr.r_samples[(i, k + 1)], s.r[i], epsilon = 1e-9);
                assert_abs_diff_eq!(tr.v_samples.as_ref().unwrap()[(i, k + 1)], s.v[i], epsilon = 1e-9);
            }
        }
        assert!(n_spikes > 0);
        assert_eq!(n_spikes, tr.spikes.len());
    }

    #[test]
    fn spike_input_is_unit_impulse() {
        // one input spike moves v by w_in * dt/tau_v * (1/dt) = w_in / tau_v
        let p = params();
        let w = LifWeights::new(DMatrix::from_element(1, 1, 0.01), DMatrix::zeros(1, 1)).unwrap();
        let train: SpikeTrain = [crate::signal::Spike { neuron: 0, time: 0.0 }]
            .into_iter()
            .collect();
        let tr = lif_run(&w, &p, Input::Spikes(&train), None, &RunSpec::new(1e-3, 1e-4).with_v())
            .unwrap();
        assert_abs_diff_eq!(tr.v_samples.unwrap()[(0, 1)], 0.01 / 0.02, epsilon = 1e-12);
    }

    #[test]
    fn r_matches_standalone_filter() {
        let p = LifParams::new(0.02, 0.005, 1.0, 1.2, 1e-4).unwrap();
        let w = LifWeights::new(DMatrix::zeros(2, 1), DMatrix::zeros(2, 2)).unwrap();
        let spec = RunSpec::new(0.3, 1e-3);
        let tr = lif_run(&w, &p, Input::Silent, None, &spec).unwrap();
        assert!(!tr.spikes.is_empty());
        let r = synaptic_trace(&tr.spikes, 2, p.tau_r, p.dt, &spec).unwrap();
        assert!((r - &tr.r_samples).amax() < 1e-9);
    }
}
