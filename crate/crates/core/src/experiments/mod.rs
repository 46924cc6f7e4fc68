//! Slow-dynamics benchmarks and the ECG pipeline.

pub mod beats;
pub mod chirp;
pub mod ecg;
pub mod filter;
pub mod pulse;
pub mod rampsine;
pub mod report;
pub mod reservoir;
pub mod synth;

pub use beats::{signal_from_csv, signal_to_csv, Beat, BeatAnnotations, BeatLabel};
pub use chirp::{chirp_experiment, ChirpConfig, ChirpMetrics};
pub use ecg::{ecg_experiment, EcgConfig, EcgMetrics, EcgModel, EsnModel, SpikingModel};
pub use filter::{butter2_highpass, Biquad};
pub use pulse::{diversity_score, pulse_experiment, PulseConfig, PulseMetrics};
pub use rampsine::{rampsine_experiment, RampSineConfig, RampSineMetrics};
pub use report::{RunBundle, Series};
pub use reservoir::{Profile, Reservoir, ReservoirConfig, SpeedSettings};
pub use synth::{synth_ecg, SynthEcgParams};

use std::path::Path;

/// Reads a `time,value` signal file and a `time,label` annotation file.
pub fn ingest_ecg_csv(signal: &Path, annotations: &Path) -> crate::Result<(crate::signal::SampledSignal, BeatAnnotations)> {
    let s = signal_from_csv(&std::fs::read_to_string(signal)?)?;
    let a = BeatAnnotations::from_csv(&std::fs::read_to_string(annotations)?)?;
    Ok((s, a))
}
