use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use slowdyn::dynapse::{
    bias_preset, check_cam_budget, events_to_spikes, parse_spike_file, spikes_to_events,
    weights_to_lines, write_bias_file, write_netparser, write_spike_file, CamReport, Role,
    CAM_LIMIT,
};
use slowdyn::experiments::{
    chirp_experiment, ecg_experiment, ingest_ecg_csv, pulse_experiment, rampsine_experiment,
    signal_to_csv, synth_ecg, ChirpConfig, EcgConfig, EcgModel, Profile, PulseConfig,
    RampSineConfig, ReservoirConfig, RunBundle, Series, SynthEcgParams,
};
use slowdyn::matrix_csv::{read_triplets, write_dense, write_triplets};
use slowdyn::signal::SpikeTrain;
use slowdyn::topology::{coord, topo_generate, topo_stats, topo_to_weights, TopologyParams};
use slowdyn::transfer::{autonomy_check, transfer as run_transfer, TransferConfig, TransferWeights};
use slowdyn::{par, Error};

use crate::{Experiment, ProfileArg, RoleArg};

/// Error with the exit code it maps to.
#[derive(Debug)]
pub enum Failure {
    Usage(anyhow::Error),
    Runtime(anyhow::Error),
}

impl Failure {
    pub fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 2,
            Failure::Runtime(_) => 1,
        }
    }

    pub fn error(&self) -> &anyhow::Error {
        match self {
            Failure::Usage(e) | Failure::Runtime(e) => e,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidParameter(_) | Error::UnknownPreset(_) => Failure::Usage(e.into()),
            other => Failure::Runtime(other.into()),
        }
    }
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Runtime(e)
    }
}

type CmdResult<T = ()> = Result<T, Failure>;

fn usage(msg: impl std::fmt::Display) -> Failure {
    Failure::Usage(anyhow!("{msg}"))
}

fn load_config<T: DeserializeOwned + Default>(path: Option<&Path>) -> CmdResult<T> {
    let Some(path) = path else {
        return Ok(T::default());
    };
    let text = fs::read_to_string(path)
        .map_err(|e| usage(format!("cannot read config {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| usage(format!("config {}: {e}", path.display())))
}

fn read_input(path: &Path) -> CmdResult<String> {
    fs::read_to_string(path)
        .with_context(|| format!("reading {}", path.display()))
        .map_err(Failure::Runtime)
}

fn write_output(path: &Path, text: &str) -> CmdResult {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).with_context(|| format!("creating {}", parent.display()))?;
    }
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

fn write_bundle(bundle: &RunBundle, dir: &Path) -> CmdResult {
    bundle
        .write(dir)
        .with_context(|| format!("writing run bundle to {}", dir.display()))?;
    eprintln!("wrote {} ({})", dir.display(), &bundle.fingerprint()[..12]);
    Ok(())
}

fn profile_of(p: ProfileArg) -> Profile {
    match p {
        ProfileArg::Default => Profile::Default,
        ProfileArg::Tuned => Profile::Tuned,
    }
}

fn seed_reservoir(r: &mut ReservoirConfig, seed: Option<u64>, profile: Option<ProfileArg>) {
    if let Some(s) = seed {
        r.topology_seed = s;
        r.input_seed = s;
    }
    if let Some(p) = profile {
        r.profile = profile_of(p);
    }
}

/// Where the ECG recording comes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum EcgSource {
    Synthetic {
        #[serde(default)]
        params: SynthEcgParams,
        #[serde(default)]
        seed: u64,
    },
    /// Paths are relative to the config file.
    Files { signal: PathBuf, annotations: PathBuf },
}

impl Default for EcgSource {
    fn default() -> Self {
        EcgSource::Synthetic {
            params: SynthEcgParams::default(),
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EcgRunConfig {
    pub source: EcgSource,
    pub pipeline: EcgConfig,
}

fn run_ecg(mut config: EcgRunConfig, base: &Path, seed: Option<u64>, profile: Option<ProfileArg>) -> CmdResult<RunBundle> {
    if let Some(s) = seed {
        if let EcgSource::Synthetic { seed, .. } = &mut config.source {
            *seed = s;
        }
    }
    match &mut config.pipeline.model {
        EcgModel::Esn(m) => {
            if let Some(s) = seed {
                m.seed = s;
            }
        }
        EcgModel::Spiking(m) => seed_reservoir(&mut m.reservoir, seed, profile),
    }
    let (recording, annotations) = match &config.source {
        EcgSource::Synthetic { params, seed } => synth_ecg(params, *seed)?,
        EcgSource::Files { signal, annotations } => {
            ingest_ecg_csv(&base.join(signal), &base.join(annotations))?
        }
    };
    let (_, mut bundle) = ecg_experiment(&recording, &annotations, &config.pipeline)?;
    bundle.config = serde_json::to_value(&config).map_err(anyhow::Error::from)?;
    Ok(bundle)
}

fn run_one(
    experiment: Experiment,
    config: Option<&Path>,
    seed: Option<u64>,
    profile: Option<ProfileArg>,
) -> CmdResult<RunBundle> {
    let bundle = match experiment {
        Experiment::Pulse => {
            let mut c: PulseConfig = load_config(config)?;
            seed_reservoir(&mut c.reservoir, seed, profile);
            pulse_experiment(&c)?.1
        }
        Experiment::Chirp => {
            let mut c: ChirpConfig = load_config(config)?;
            seed_reservoir(&mut c.reservoir, seed, profile);
            chirp_experiment(&c)?.1
        }
        Experiment::Rampsine => {
            let mut c: RampSineConfig = load_config(config)?;
            seed_reservoir(&mut c.reservoir, seed, profile);
            rampsine_experiment(&c)?.1
        }
        Experiment::Ecg => {
            let c: EcgRunConfig = load_config(config)?;
            let base = config
                .and_then(Path::parent)
                .map(Path::to_path_buf)
                .unwrap_or_default();
            run_ecg(c, &base, seed, profile)?
        }
    };
    Ok(bundle)
}

pub fn run(
    experiment: Experiment,
    config: Option<&Path>,
    out: &Path,
    profile: Option<ProfileArg>,
    seeds: &[u64],
    jobs: usize,
) -> CmdResult {
    if seeds.is_empty() {
        let bundle = run_one(experiment, config, None, profile)?;
        return write_bundle(&bundle, out);
    }
    // parse once up front so a bad config fails before any work starts
    match experiment {
        Experiment::Pulse => load_config::<PulseConfig>(config).map(drop)?,
        Experiment::Chirp => load_config::<ChirpConfig>(config).map(drop)?,
        Experiment::Rampsine => load_config::<RampSineConfig>(config).map(drop)?,
        Experiment::Ecg => load_config::<EcgRunConfig>(config).map(drop)?,
    }
    let results = par::map_with_jobs(seeds, jobs, |&s| {
        let bundle = run_one(experiment, config, Some(s), profile)?;
        write_bundle(&bundle, &out.join(format!("seed-{s}")))
    });
    let failed: Vec<String> = seeds
        .iter()
        .zip(&results)
        .filter_map(|(s, r)| r.as_ref().err().map(|e| format!("seed {s}: {:#}", e.error())))
        .collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure::Runtime(anyhow!("{}", failed.join("; "))))
    }
}

#[derive(Debug, Serialize)]
struct CamSummary {
    ok: bool,
    limit: u32,
    neurons: usize,
    max_total: u32,
    violations: Vec<String>,
}

impl From<&CamReport> for CamSummary {
    fn from(r: &CamReport) -> Self {
        Self {
            ok: r.ok(),
            limit: CAM_LIMIT,
            neurons: r.usage.len(),
            max_total: r.usage.values().map(|u| u.total()).max().unwrap_or(0),
            violations: r.violations.iter().map(ToString::to_string).collect(),
        }
    }
}

#[derive(Debug, Serialize)]
struct TransferReport {
    mode: String,
    fit_nrmse: f64,
    train_nrmse: f64,
    spike_count: usize,
    nonzero_weights: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    autonomy_nrmse: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    cam: Option<CamSummary>,
}

pub fn transfer(config: &Path, out: &Path, autonomy: bool) -> CmdResult {
    let cfg: TransferConfig = load_config(Some(config))?;
    let result = run_transfer(&cfg)?;
    let w = result.w_hat.to_f64();
    let mut series = vec![Series::new("harvest.csv", result.harvest.to_csv())];
    let mut report = TransferReport {
        mode: String::new(),
        fit_nrmse: result.fit_nrmse,
        train_nrmse: result.train_nrmse,
        spike_count: result.harvest.spike_count,
        nonzero_weights: w.iter().filter(|v| **v != 0.0).count(),
        autonomy_nrmse: None,
        cam: None,
    };
    match &result.w_hat {
        TransferWeights::Full(w) => {
            report.mode = "full-precision".into();
            series.push(Series::new("w_hat.csv", write_dense(w)));
        }
        TransferWeights::Ternary(_) => {
            report.mode = "ternary".into();
            let lines = weights_to_lines(&w, Role::Recurrent, 1.0)?;
            report.cam = Some(CamSummary::from(&check_cam_budget(&lines)));
            series.push(Series::new("w_hat.txt", write_netparser(&lines)));
        }
    }
    if autonomy {
        let a = autonomy_check(&w, &cfg)?;
        report.autonomy_nrmse = Some(a.nrmse);
    }
    let bundle = RunBundle::new("transfer", &cfg, &report, series)?;
    write_bundle(&bundle, out)
}

pub fn encode(input: &Path, out: &Path, core_mask: u8) -> CmdResult {
    let text = read_input(input)?;
    if text.trim().is_empty() {
        return write_output(out, "");
    }
    let spikes = SpikeTrain::from_csv(&text)
        .with_context(|| format!("parsing {}", input.display()))?;
    let entries = spikes_to_events(&spikes, core_mask)?;
    write_output(out, &write_spike_file(&entries))
}

pub fn decode(input: &Path, out: &Path) -> CmdResult {
    let text = read_input(input)?;
    if text.trim().is_empty() {
        return write_output(out, "");
    }
    let entries = parse_spike_file(&text).with_context(|| format!("parsing {}", input.display()))?;
    let (spikes, events) = events_to_spikes(&entries)?;
    if events.iter().any(|e| e.core_mask != events[0].core_mask) {
        eprintln!("note: events target different core masks; the CSV keeps only neuron ids");
    }
    write_output(out, &spikes.to_csv())
}

#[derive(Debug, Serialize)]
struct TopologySummary {
    neurons: usize,
    excitatory: usize,
    synapses: usize,
    dale: bool,
}

pub fn gen_topology(config: Option<&Path>, seed: Option<u64>, out: &Path) -> CmdResult {
    let mut params: TopologyParams = load_config(config)?;
    if let Some(s) = seed {
        params.seed = s;
    }
    let t = topo_generate(&params)?;
    let w = topo_to_weights(&t, 1.0)?;
    let mut neurons = String::from("index,x,y,kind\n");
    for (i, k) in t.kinds.iter().enumerate() {
        let (x, y) = coord(i);
        let kind = if k.sign() > 0 { "exc" } else { "inh" };
        neurons.push_str(&format!("{i},{x},{y},{kind}\n"));
    }
    let summary = TopologySummary {
        neurons: t.n(),
        excitatory: t.excitatory_count(),
        synapses: t.synapses.len(),
        dale: t.satisfies_dale(),
    };
    let metrics = serde_json::json!({ "summary": summary, "stats": topo_stats(&t) });
    let series = vec![
        Series::new("weights.csv", write_triplets(&w)),
        Series::new("neurons.csv", neurons),
    ];
    let bundle = RunBundle::new("topology", &params, &metrics, series)?;
    write_bundle(&bundle, out)
}

pub fn export_dynapse(
    weights: Option<&Path>,
    n: Option<usize>,
    topology_seed: Option<u64>,
    role: RoleArg,
    cam_unit: f64,
    bias: ProfileArg,
    out: &Path,
) -> CmdResult {
    let w = match (weights, topology_seed) {
        (Some(path), None) => {
            let n = n.ok_or_else(|| usage("--weights needs --n"))?;
            let text = read_input(path)?;
            read_triplets(&text, n, n).with_context(|| format!("parsing {}", path.display()))?
        }
        (None, Some(seed)) => topo_to_weights(&topo_generate(&TopologyParams::with_seed(seed))?, 1.0)?,
        _ => return Err(usage("give exactly one of --weights or --topology-seed")),
    };
    let role = match role {
        RoleArg::Input => Role::Input,
        RoleArg::Recurrent => Role::Recurrent,
    };
    let lines = weights_to_lines(&w, role, cam_unit)?;
    let report = CamSummary::from(&check_cam_budget(&lines));
    let bias = bias_preset(match bias {
        ProfileArg::Default => "default",
        ProfileArg::Tuned => "tuned",
    })?;
    write_output(&out.join("network.txt"), &write_netparser(&lines))?;
    write_output(&out.join("biases.txt"), &write_bias_file(&bias))?;
    let json = serde_json::to_string_pretty(&report).map_err(anyhow::Error::from)? + "\n";
    write_output(&out.join("cam_report.json"), &json)?;
    if report.ok {
        Ok(())
    } else {
        Err(Failure::Runtime(anyhow!(
            "{} neuron(s) exceed the {CAM_LIMIT}-CAM budget: {}",
            report.violations.len(),
            report.violations.join(", ")
        )))
    }
}

pub fn synth_ecg_cmd(config: Option<&Path>, seed: u64, out: &Path) -> CmdResult {
    let params: SynthEcgParams = load_config(config)?;
    let (signal, beats) = synth_ecg(&params, seed)?;
    write_output(&out.join("signal.csv"), &signal_to_csv(&signal))?;
    write_output(&out.join("annotations.csv"), &beats.to_csv())?;
    eprintln!("wrote {} ({} beats, {} PVC)", out.display(), beats.len(), beats.pvc_count());
    Ok(())
}
