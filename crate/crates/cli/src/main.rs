mod commands;
mod config;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

#[derive(Parser)]
#[command(
    name = "luxprobe",
    version,
    about = "HDR lighting representation, probe rendering and evaluation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// Flags shared by every command.
#[derive(Args, Serialize, Clone, Debug)]
pub struct Common {
    /// Seed for randomized steps; always recorded in the manifest.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Manifest location (defaults next to the primary output).
    #[arg(long)]
    pub manifest: Option<PathBuf>,
    /// JSON object whose keys supply flags not given on the command line.
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Perspective crop of a panorama.
    Crop(commands::CropArgs),
    /// Supervised crops and lighting targets from a directory of panoramas.
    DatasetGen(commands::DatasetGenArgs),
    /// Dual tone-mapped 8-bit pair of an HDR map.
    Tonemap(commands::TonemapArgs),
    /// Rule-based HDR reconstruction from a dual tone-mapped pair.
    Inverse(commands::InverseArgs),
    /// Train the fusion MLP on synthetic data.
    FuseTrain(commands::FuseTrainArgs),
    /// HDR reconstruction with a trained fusion MLP.
    FuseApply(commands::FuseApplyArgs),
    /// Mirror, matte and diffuse sphere renders of an environment map.
    RenderProbes(commands::RenderProbesArgs),
    /// Three-sphere metrics and PAE for one prediction.
    Eval(commands::EvalArgs),
    /// Per-frame metrics and temporal statistics for two map sequences.
    EvalVideo(commands::EvalVideoArgs),
    /// Dominant light direction of an environment map.
    Peak(commands::PeakArgs),
    /// Rotate an environment map about the vertical axis.
    Rotate(commands::RotateArgs),
}

fn error_code(err: &anyhow::Error) -> &'static str {
    for cause in err.chain() {
        if let Some(e) = cause.downcast_ref::<luxprobe::Error>() {
            return e.code();
        }
        if cause.downcast_ref::<std::io::Error>().is_some() {
            return "io";
        }
        if cause.downcast_ref::<serde_json::Error>().is_some() {
            return "format";
        }
    }
    "input"
}

fn fail(err: &anyhow::Error) -> ExitCode {
    let message = format!("{err:#}").replace(['\n', '\r'], " ");
    eprintln!("ERROR {}: {message}", error_code(err));
    ExitCode::from(1)
}

fn configure_threads() -> Result<(), String> {
    let Ok(value) = std::env::var("LUXPROBE_THREADS") else {
        return Ok(());
    };
    let n: usize = value
        .trim()
        .parse()
        .map_err(|_| format!("LUXPROBE_THREADS must be a non-negative integer, got '{value}'"))?;
    if n > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| e.to_string())?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let argv = match config::merge(std::env::args_os().collect()) {
        Ok(a) => a,
        Err(e) => return fail(&e.context("config")),
    };
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Err(msg) = configure_threads() {
        eprintln!("ERROR usage: {msg}");
        return ExitCode::from(2);
    }
    let result = match cli.command {
        Command::Crop(a) => commands::crop(a),
        Command::DatasetGen(a) => commands::dataset_gen(a),
        Command::Tonemap(a) => commands::tonemap(a),
        Command::Inverse(a) => commands::inverse(a),
        Command::FuseTrain(a) => commands::fuse_train(a),
        Command::FuseApply(a) => commands::fuse_apply(a),
        Command::RenderProbes(a) => commands::render_probes(a),
        Command::Eval(a) => commands::eval(a),
        Command::EvalVideo(a) => commands::eval_video(a),
        Command::Peak(a) => commands::peak(a),
        Command::Rotate(a) => commands::rotate(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => fail(&e),
    }
}
