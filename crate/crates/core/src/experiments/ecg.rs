//! PVC detection on ECG recordings: high-pass and normalize, drive a
//! reservoir, smooth its states, ridge-read a per-bin PVC indicator, and vote
//! per beat inside a window around each annotated beat.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::beats::{BeatAnnotations, BeatLabel};
use super::filter::butter2_highpass;
use super::report::{columns_csv, RunBundle, Series};
use super::reservoir::{Reservoir, ReservoirConfig};
use crate::codecs::{delta_encode, exp_smooth};
use crate::error::{Error, Result};
use crate::esn::{esn_drive, esn_generate, EsnParams, EsnPreset};
use crate::readout::{add_bias_row, binarize, classify_metrics, ridge_from_gram, Metrics};
use crate::signal::SampledSignal;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EsnModel {
    pub n: usize,
    pub density: f64,
    pub input_scaling: f64,
    pub bias_scaling: f64,
    /// Per-step leak of the discrete update.
    pub leak: f64,
    pub spectral_radius: f64,
    pub seed: u64,
}

impl Default for EsnModel {
    fn default() -> Self {
        let preset = EsnPreset::ECG_BASELINE;
        Self {
            n: 100,
            density: 0.1,
            input_scaling: 1.0,
            bias_scaling: 0.2,
            leak: preset.leak,
            spectral_radius: preset.spectral_radius,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SpikingModel {
    pub reservoir: ReservoirConfig,
    pub delta_threshold: f64,
}

impl Default for SpikingModel {
    fn default() -> Self {
        Self {
            reservoir: ReservoirConfig {
                input_weight: 0.2,
                ..ReservoirConfig::default()
            },
            delta_threshold: 0.1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum EcgModel {
    Esn(EsnModel),
    Spiking(SpikingModel),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EcgConfig {
    pub model: EcgModel,
    pub highpass_cutoff: f64,
    /// Only the first `max_duration` seconds of the recording are used.
    pub max_duration: Option<f64>,
    pub train_fraction: f64,
    /// Leading seconds excluded from training and scoring.
    pub washout: f64,
    /// Half-width (s) of the beat window used for targets and votes.
    pub window: f64,
    /// Feature sampling period (s).
    pub bin: f64,
    /// Smoothing time constants searched by cross-validation; 0 means the
    /// raw ESN state.
    pub smoothing_taus: Vec<f64>,
    pub alphas: Vec<f64>,
    pub thresholds: Vec<f64>,
    pub folds: usize,
}

impl Default for EcgConfig {
    fn default() -> Self {
        Self {
            model: EcgModel::Esn(EsnModel::default()),
            highpass_cutoff: 0.5,
            max_duration: None,
            train_fraction: 2.0 / 3.0,
            washout: 2.0,
            window: 0.15,
            bin: 0.02,
            smoothing_taus: vec![0.05, 0.1, 0.2],
            alphas: vec![EsnPreset::ECG_BASELINE.ridge_alpha],
            thresholds: vec![0.2, 0.3, 0.4, 0.5, 0.6],
            folds: 5,
        }
    }
}

impl EcgConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.train_fraction > 0.0 && self.train_fraction < 1.0) {
            return Err(Error::invalid("train_fraction must lie in (0, 1)"));
        }
        if !(self.window > 0.0 && self.bin > 0.0 && self.washout >= 0.0) {
            return Err(Error::invalid("window and bin must be positive, washout nonnegative"));
        }
        if self.folds < 2 {
            return Err(Error::invalid("need at least 2 folds"));
        }
        if self.smoothing_taus.is_empty() || self.alphas.is_empty() || self.thresholds.is_empty() {
            return Err(Error::invalid("hyperparameter grids must be nonempty"));
        }
        if self.smoothing_taus.iter().any(|t| !(*t >= 0.0 && t.is_finite())) {
            return Err(Error::invalid("smoothing taus must be finite and nonnegative"));
        }
        if self.alphas.iter().any(|a| !(*a > 0.0 && a.is_finite())) {
            return Err(Error::invalid("ridge alphas must be positive"));
        }
        if let Some(d) = self.max_duration {
            if !(d > 0.0) {
                return Err(Error::invalid("max_duration must be positive"));
            }
        }
        if let EcgModel::Spiking(s) = &self.model {
            if self.smoothing_taus.contains(&0.0) {
                return Err(Error::invalid("the spiking model needs positive smoothing taus"));
            }
            s.reservoir.validate()?;
        }
        Ok(())
    }
}

/// High-pass, then min-max normalize to [0, 1].
pub fn preprocess(recording: &SampledSignal, cutoff: f64) -> Result<Vec<f64>> {
    if recording.channels() != 1 {
        return Err(Error::Dimension {
            context: "ECG channels",
            expected: 1,
            actual: recording.channels(),
        });
    }
    let filter = butter2_highpass(cutoff, 1.0 / recording.dt)?;
    let mut x = filter.filtfilt(&recording.channel(0))?;
    let lo = x.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = x.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let span = hi - lo;
    if !(span > 0.0) {
        return Err(Error::invalid("recording is constant after filtering"));
    }
    x.iter_mut().for_each(|v| *v = (*v - lo) / span);
    Ok(x)
}

/// Smoothed reservoir features, one matrix per smoothing constant, sampled
/// at `times`.
struct Features {
    times: Vec<f64>,
    by_tau: Vec<DMatrix<f64>>,
}

fn esn_features(m: &EsnModel, x: &[f64], dt: f64, bin: f64, taus: &[f64]) -> Result<Features> {
    let weights = esn_generate(m.n, 2, m.spectral_radius, 1.0, m.density, m.seed)?;
    let mut weights = weights;
    for i in 0..m.n {
        weights.w_in[(i, 0)] *= m.input_scaling;
        weights.w_in[(i, 1)] *= m.bias_scaling;
    }
    let params = EsnParams::discrete(m.leak, dt)?;
    let input = SampledSignal::from_channels(0.0, dt, &[x.to_vec(), vec![1.0; x.len()]])?;
    let stride = ((bin / dt).round() as usize).max(1);
    let steps = x.len() - 1;
    let cols = steps / stride + 1;
    let decay: Vec<f64> = taus
        .iter()
        .map(|&t| if t == 0.0 { 0.0 } else { (-dt / t).exp() })
        .collect();
    let mut smooth = vec![vec![0.0; m.n]; taus.len()];
    let mut by_tau = vec![DMatrix::zeros(m.n, cols); taus.len()];
    esn_drive(
        &DVector::zeros(m.n),
        &weights,
        &params,
        &input,
        steps as f64 * dt,
        |k, state| {
            for (s, &d) in smooth.iter_mut().zip(&decay) {
                for (si, xi) in s.iter_mut().zip(state) {
                    *si = d * *si + (1.0 - d) * xi;
                }
            }
            if k % stride == 0 {
                for (f, s) in by_tau.iter_mut().zip(&smooth) {
                    f.column_mut(k / stride).copy_from_slice(s);
                }
            }
        },
    )?;
    Ok(Features {
        times: (0..cols).map(|j| (j * stride) as f64 * dt).collect(),
        by_tau,
    })
}

fn spiking_features(m: &SpikingModel, x: &[f64], dt: f64, bin: f64, taus: &[f64]) -> Result<Features> {
    let signal = SampledSignal::from_channels(0.0, dt, &[x.to_vec()])?;
    let input = delta_encode(&signal, m.delta_threshold)?.interleave(1);
    let reservoir = Reservoir::build(&m.reservoir, &[1.0, -1.0])?;
    let duration = (x.len() - 1) as f64 * dt;
    let resp = reservoir.respond(&input, duration, bin)?;
    if resp.trace.spikes.is_empty() {
        return Err(Error::Silent("ECG reservoir produced no spikes".into()));
    }
    let by_tau = taus
        .iter()
        .map(|&t| exp_smooth(&resp.trace.spikes, reservoir.n(), t, &resp.grid).map(|s| s.values))
        .collect::<Result<Vec<_>>>()?;
    Ok(Features {
        times: resp.grid.times().collect(),
        by_tau,
    })
}

/// Strict-majority vote of `binary` over the samples within `window` of each
/// beat; a beat with no samples in range is voted normal.
pub fn beat_votes(times: &[f64], binary: &[u8], beats: &[f64], window: f64) -> Vec<u8> {
    beats
        .iter()
        .map(|&b| {
            let lo = times.partition_point(|&t| t < b - window);
            let hi = times.partition_point(|&t| t <= b + window);
            let ones = binary[lo..hi].iter().filter(|&&v| v == 1).count();
            u8::from(hi > lo && 2 * ones > hi - lo)
        })
        .collect()
}

/// `1` at times within `window` of a PVC beat.
pub fn pvc_target(times: &[f64], annotations: &BeatAnnotations, window: f64) -> Vec<f64> {
    let pvc: Vec<f64> = annotations
        .beats
        .iter()
        .filter(|b| b.label == BeatLabel::Pvc)
        .map(|b| b.time)
        .collect();
    times
        .iter()
        .map(|&t| {
            let i = pvc.partition_point(|&p| p < t - window);
            f64::from(u8::from(i < pvc.len() && pvc[i] <= t + window))
        })
        .collect()
}

/// Contiguous fold boundaries over `len` items: fold `f` is
/// `bounds[f]..bounds[f + 1]`.
pub fn fold_bounds(len: usize, folds: usize) -> Vec<usize> {
    (0..=folds).map(|f| f * len / folds).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CvScore {
    pub tau: f64,
    pub alpha: f64,
    pub threshold: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mean_f1: Option<f64>,
    pub folds_scored: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EcgMetrics {
    pub selected: CvScore,
    pub train_beats: usize,
    pub train_pvc: usize,
    pub test_beats: usize,
    pub test_pvc: usize,
    pub train: Metrics,
    pub test: Metrics,
    pub cv: Vec<CvScore>,
}

struct Beats {
    times: Vec<f64>,
    truth: Vec<u8>,
}

fn beats_in(annotations: &BeatAnnotations, lo: f64, hi: f64, window: f64) -> Beats {
    let sel: Vec<_> = annotations
        .beats
        .iter()
        .filter(|b| b.time - window >= lo && b.time + window < hi)
        .collect();
    Beats {
        times: sel.iter().map(|b| b.time).collect(),
        truth: sel.iter().map(|b| u8::from(b.label == BeatLabel::Pvc)).collect(),
    }
}

fn stats(phi: &DMatrix<f64>, y: &[f64], range: std::ops::Range<usize>) -> (DMatrix<f64>, DMatrix<f64>) {
    let cols = phi.columns(range.start, range.len());
    let yv = DMatrix::from_row_slice(1, range.len(), &y[range]);
    (cols * cols.transpose(), yv * cols.transpose())
}

fn score(
    predictions: &[f64],
    times: &[f64],
    beats: &Beats,
    threshold: f64,
    window: f64,
) -> Result<Metrics> {
    let votes = beat_votes(times, &binarize(predictions, threshold), &beats.times, window);
    classify_metrics(&votes, &beats.truth)
}

pub fn ecg_experiment(
    recording: &SampledSignal,
    annotations: &BeatAnnotations,
    config: &EcgConfig,
) -> Result<(EcgMetrics, RunBundle)> {
    config.validate()?;
    let dt = recording.dt;
    let mut x = preprocess(recording, config.highpass_cutoff)?;
    if let Some(limit) = config.max_duration {
        let keep = ((limit / dt).floor() as usize + 1).min(x.len());
        x.truncate(keep);
    }
    let end = recording.t0 + (x.len() - 1) as f64 * dt;
    let t0 = recording.t0;
    let split = t0 + config.train_fraction * (end - t0);
    let start = t0 + config.washout;
    if start >= split {
        return Err(Error::InsufficientData("washout covers the whole training split".into()));
    }

    let feats = match &config.model {
        EcgModel::Esn(m) => esn_features(m, &x, dt, config.bin, &config.smoothing_taus)?,
        EcgModel::Spiking(m) => spiking_features(m, &x, dt, config.bin, &config.smoothing_taus)?,
    };
    let times: Vec<f64> = feats.times.iter().map(|t| t + t0).collect();
    let target = pvc_target(&times, annotations, config.window);
    let i0 = times.partition_point(|&t| t < start);
    let i1 = times.partition_point(|&t| t < split);

    let train_beats = beats_in(annotations, start, split, config.window);
    let test_beats = beats_in(annotations, split, end, config.window);
    let train_pvc = train_beats.truth.iter().filter(|&&v| v == 1).count();
    if train_pvc == 0 {
        return Err(Error::InsufficientData("no PVC beats in the training split".into()));
    }
    if test_beats.times.is_empty() {
        return Err(Error::InsufficientData("no beats in the test split".into()));
    }

    let bounds: Vec<usize> = fold_bounds(i1 - i0, config.folds).iter().map(|b| b + i0).collect();
    if bounds.windows(2).any(|w| w[1] == w[0]) {
        return Err(Error::InsufficientData("training split too short for the folds".into()));
    }
    let fold_beats: Vec<Beats> = bounds
        .windows(2)
        .map(|w| {
            let (lo, hi) = (times[w[0]], times[w[1] - 1]);
            let sel: Vec<usize> = (0..train_beats.times.len())
                .filter(|&b| train_beats.times[b] >= lo && train_beats.times[b] <= hi)
                .collect();
            Beats {
                times: sel.iter().map(|&b| train_beats.times[b]).collect(),
                truth: sel.iter().map(|&b| train_beats.truth[b]).collect(),
            }
        })
        .collect();

    let phis: Vec<DMatrix<f64>> = feats.by_tau.iter().map(add_bias_row).collect();
    let mut cv = Vec::new();
    for (phi, &tau) in phis.iter().zip(&config.smoothing_taus) {
        let per_fold: Vec<_> = bounds
            .windows(2)
            .map(|w| stats(phi, &target, w[0]..w[1]))
            .collect();
        let gram: DMatrix<f64> = per_fold.iter().map(|s| &s.0).sum();
        let cross: DMatrix<f64> = per_fold.iter().map(|s| &s.1).sum();
        for &alpha in &config.alphas {
            let mut f1s = vec![Vec::new(); config.thresholds.len()];
            for (f, w) in bounds.windows(2).enumerate() {
                let sol = ridge_from_gram(&(&gram - &per_fold[f].0), &(&cross - &per_fold[f].1), alpha)?;
                let pred = &sol.w_out * phi.columns(w[0], w[1] - w[0]);
                for (ti, &th) in config.thresholds.iter().enumerate() {
                    let m = score(pred.as_slice(), &times[w[0]..w[1]], &fold_beats[f], th, config.window)?;
                    if let Some(f1) = m.f1 {
                        f1s[ti].push(f1);
                    }
                }
            }
            for (ti, &threshold) in config.thresholds.iter().enumerate() {
                let v = &f1s[ti];
                cv.push(CvScore {
                    tau,
                    alpha,
                    threshold,
                    mean_f1: (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64),
                    folds_scored: v.len(),
                });
            }
        }
    }
    let selected = cv
        .iter()
        .copied()
        .fold(None::<CvScore>, |best, c| match (best, c.mean_f1) {
            (None, _) => Some(c),
            (Some(b), Some(f)) if b.mean_f1.is_none_or(|bf| f > bf) => Some(c),
            (b, _) => b,
        })
        .expect("grids are nonempty");

    let k = config
        .smoothing_taus
        .iter()
        .position(|&t| t == selected.tau)
        .expect("selected tau comes from the grid");
    let phi = &phis[k];
    let (gram, cross) = stats(phi, &target, i0..i1);
    let sol = ridge_from_gram(&gram, &cross, selected.alpha)?;
    let pred = &sol.w_out * phi;
    let pred = pred.as_slice();
    let train = score(&pred[i0..i1], &times[i0..i1], &train_beats, selected.threshold, config.window)?;
    let test_votes = beat_votes(
        &times[i1..],
        &binarize(&pred[i1..], selected.threshold),
        &test_beats.times,
        config.window,
    );
    let test = classify_metrics(&test_votes, &test_beats.truth)?;

    let metrics = EcgMetrics {
        selected,
        train_beats: train_beats.times.len(),
        train_pvc,
        test_beats: test_beats.times.len(),
        test_pvc: test_beats.truth.iter().filter(|&&v| v == 1).count(),
        train,
        test,
        cv,
    };
    let beat_truth: Vec<f64> = test_beats.truth.iter().map(|&v| f64::from(v)).collect();
    let beat_pred: Vec<f64> = test_votes.iter().map(|&v| f64::from(v)).collect();
    let series = vec![
        Series::new(
            "readout.csv",
            columns_csv(
                &times[i0..],
                &["prediction".into(), "target".into()],
                &[&pred[i0..], &target[i0..]],
            ),
        ),
        Series::new(
            "test_beats.csv",
            columns_csv(
                &test_beats.times,
                &["truth".into(), "predicted".into()],
                &[&beat_truth, &beat_pred],
            ),
        ),
    ];
    let bundle = RunBundle::new("ecg", config, &metrics, series)?;
    Ok((metrics, bundle))
}
