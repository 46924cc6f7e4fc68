mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use commands::Failure;

/// Spiking reservoir experiments, reservoir transfer and Dynap-se file tools.
#[derive(Debug, Parser)]
#[command(name = "slowdyn", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Experiment {
    Pulse,
    Chirp,
    Rampsine,
    Ecg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ProfileArg {
    Default,
    Tuned,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RoleArg {
    Input,
    Recurrent,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run an experiment and write its report bundle.
    Run {
        experiment: Experiment,
        /// JSON config; omitted keys take their defaults, unknown keys are rejected.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Output directory (one subdirectory per seed when --seeds is given).
        #[arg(long)]
        out: PathBuf,
        /// Override the reservoir profile.
        #[arg(long, value_enum)]
        profile: Option<ProfileArg>,
        /// Comma-separated seeds; each run gets its own directory.
        #[arg(long, value_delimiter = ',')]
        seeds: Vec<u64>,
        /// Worker threads for multi-seed runs.
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
    /// Fit a spiking student to an echo state teacher.
    Transfer {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Also run the student freely with the fitted recurrence.
        #[arg(long)]
        autonomy: bool,
    },
    /// Convert a `time,neuron` spike CSV to a Dynap-se spike file.
    Encode {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// 4-bit destination core mask.
        #[arg(long, default_value_t = 0b1111)]
        core_mask: u8,
    },
    /// Convert a Dynap-se spike file back to a `time,neuron` CSV.
    Decode {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Generate the 16x16 spatial reservoir.
    GenTopology {
        /// JSON topology parameters.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Write a NetParser connectivity file and bias table.
    ExportDynapse {
        /// Sparse `row,col,value` weight file (w[post][pre]).
        #[arg(long, conflicts_with = "topology_seed", requires = "n")]
        weights: Option<PathBuf>,
        /// Matrix size for --weights.
        #[arg(long)]
        n: Option<usize>,
        /// Export the spatial reservoir generated from this seed instead.
        #[arg(long)]
        topology_seed: Option<u64>,
        #[arg(long, value_enum, default_value_t = RoleArg::Recurrent)]
        role: RoleArg,
        /// Weight magnitude represented by one CAM slot.
        #[arg(long, default_value_t = 1.0)]
        cam_unit: f64,
        #[arg(long, value_enum, default_value_t = ProfileArg::Tuned)]
        bias: ProfileArg,
        #[arg(long)]
        out: PathBuf,
    },
    /// Write a synthetic 360 Hz ECG and its beat annotations.
    SynthEcg {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
}

fn dispatch(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Run {
            experiment,
            config,
            out,
            profile,
            seeds,
            jobs,
        } => commands::run(experiment, config.as_deref(), &out, profile, &seeds, jobs),
        Command::Transfer {
            config,
            out,
            autonomy,
        } => commands::transfer(&config, &out, autonomy),
        Command::Encode {
            input,
            out,
            core_mask,
        } => commands::encode(&input, &out, core_mask),
        Command::Decode { input, out } => commands::decode(&input, &out),
        Command::GenTopology { config, seed, out } => {
            commands::gen_topology(config.as_deref(), seed, &out)
        }
        Command::ExportDynapse {
            weights,
            n,
            topology_seed,
            role,
            cam_unit,
            bias,
            out,
        } => commands::export_dynapse(
            weights.as_deref(),
            n,
            topology_seed,
            role,
            cam_unit,
            bias,
            &out,
        ),
        Command::SynthEcg { config, seed, out } => {
            commands::synth_ecg_cmd(config.as_deref(), seed, &out)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {:#}", f.error());
            ExitCode::from(f.code())
        }
    }
}
