//! Synthetic ECG at 360 Hz: Gaussian-sum beats with premature, wide,
//! inverted ventricular beats mixed in, plus baseline wander and noise.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::beats::{Beat, BeatAnnotations, BeatLabel};
use crate::error::{Error, Result};
use crate::signal::SampledSignal;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SynthEcgParams {
    pub duration: f64,
    pub fs: f64,
    /// Beats per minute.
    pub heart_rate: f64,
    pub pvc_rate: f64,
    /// Beat-time jitter bound (s).
    pub jitter: f64,
    /// PVCs arrive this fraction of an RR interval early.
    pub prematurity: f64,
    pub wander_amplitude: f64,
    pub wander_freq: f64,
    pub noise_std: f64,
}

impl Default for SynthEcgParams {
    fn default() -> Self {
        Self {
            duration: 540.0,
            fs: 360.0,
            heart_rate: 72.0,
            pvc_rate: 0.1,
            jitter: 0.01,
            prematurity: 0.3,
            wander_amplitude: 0.2,
            wander_freq: 0.2,
            noise_std: 0.02,
        }
    }
}

/// (amplitude, offset from the R peak in s, width in s)
type Wave = (f64, f64, f64);

const NORMAL_BEAT: [Wave; 5] = [
    (0.15, -0.20, 0.025),
    (-0.10, -0.03, 0.010),
    (1.00, 0.0, 0.012),
    (-0.25, 0.03, 0.010),
    (0.30, 0.25, 0.060),
];

const PVC_BEAT: [Wave; 3] = [(-1.10, 0.0, 0.040), (0.25, 0.07, 0.025), (0.45, 0.30, 0.080)];

fn beat_shape(label: BeatLabel) -> &'static [Wave] {
    match label {
        BeatLabel::Normal => &NORMAL_BEAT,
        BeatLabel::Pvc => &PVC_BEAT,
    }
}

pub fn synth_ecg(params: &SynthEcgParams, seed: u64) -> Result<(SampledSignal, BeatAnnotations)> {
    let p = params;
    if !(p.duration > 0.0 && p.fs > 0.0 && p.heart_rate > 0.0) {
        return Err(Error::invalid("duration, fs and heart_rate must be positive"));
    }
    if !(0.0..=1.0).contains(&p.pvc_rate) {
        return Err(Error::invalid("pvc_rate must lie in [0, 1]"));
    }
    if !(p.jitter >= 0.0 && p.noise_std >= 0.0 && (0.0..0.5).contains(&p.prematurity)) {
        return Err(Error::invalid("jitter and noise must be nonnegative, prematurity in [0, 0.5)"));
    }
    let rr = 60.0 / p.heart_rate;
    if p.jitter >= 0.1 * rr {
        return Err(Error::invalid("jitter must stay below a tenth of the RR interval"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut beats = Vec::new();
    let mut n = 0usize;
    loop {
        let nominal = (n as f64 + 0.5) * rr;
        if nominal >= p.duration {
            break;
        }
        let pvc = n > 0 && rng.gen::<f64>() < p.pvc_rate;
        let jitter = if p.jitter > 0.0 {
            rng.gen_range(-p.jitter..=p.jitter)
        } else {
            0.0
        };
        let (time, label) = if pvc {
            (nominal - p.prematurity * rr + jitter, BeatLabel::Pvc)
        } else {
            (nominal + jitter, BeatLabel::Normal)
        };
        beats.push(Beat { time, label });
        n += 1;
    }

    let len = (p.duration * p.fs).round() as usize;
    let dt = 1.0 / p.fs;
    let mut x = vec![0.0; len];
    for b in &beats {
        for &(amp, offset, width) in beat_shape(b.label) {
            let centre = b.time + offset;
            let lo = ((centre - 5.0 * width) * p.fs).floor().max(0.0) as usize;
            let hi = (((centre + 5.0 * width) * p.fs).ceil() as usize).min(len);
            for (k, xk) in x.iter_mut().enumerate().take(hi).skip(lo) {
                let d = k as f64 * dt - centre;
                *xk += amp * (-0.5 * (d / width).powi(2)).exp();
            }
        }
    }
    let phase = rng.gen_range(0.0..2.0 * PI);
    let noise = Normal::new(0.0, p.noise_std.max(f64::MIN_POSITIVE))
        .map_err(|e| Error::invalid(e.to_string()))?;
    for (k, xk) in x.iter_mut().enumerate() {
        let t = k as f64 * dt;
        *xk += p.wander_amplitude * (2.0 * PI * p.wander_freq * t + phase).sin();
        if p.noise_std > 0.0 {
            *xk += noise.sample(&mut rng);
        }
    }
    Ok((
        SampledSignal::from_channels(0.0, dt, &[x])?,
        BeatAnnotations::new(beats)?,
    ))
}
