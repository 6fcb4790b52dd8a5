//! `tqd`: generate drifting-texture sequences, run the classic or improved
//! TQD model over them and score the responses.

mod commands;
mod fields;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use tqd_core::{Direction, TextureKind, ThresholdSchedule, Variant};

#[derive(Parser, Debug)]
#[command(name = "tqd", version, about = "Wide-field motion direction with two-quadrant detectors")]
struct Cli {
    /// Worker threads (defaults to one per core).
    #[arg(long, global = true, value_name = "N")]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Render a drifting texture sequence to a directory of PGM frames.
    Generate(GenerateArgs),
    /// Run one model variant over a sequence.
    Run(RunArgs),
    /// Score saved responses of one or more runs at a single frame.
    Metrics(MetricsArgs),
    /// Run both variants over sequences and score them in one pass.
    Compare(CompareArgs),
}

#[derive(Args, Debug)]
pub struct GenerateArgs {
    /// Frame size as WIDTHxHEIGHT.
    #[arg(long, value_parser = parse_size, default_value = "200x100")]
    pub size: (usize, usize),
    /// Sample rate in Hz.
    #[arg(long, default_value_t = 1000.0)]
    pub rate: f64,
    /// Motion direction: right, up, left, down, or radians.
    #[arg(long, value_parser = parse_direction)]
    pub dir: Direction,
    /// Speed in pixels per second.
    #[arg(long)]
    pub vel: f64,
    #[arg(long)]
    pub frames: usize,
    #[arg(long, value_parser = parse_texture, default_value = "clutter")]
    pub texture: TextureKind,
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
    /// Luminance range as LO,HI within [0, 1].
    #[arg(long, value_parser = parse_range, default_value = "0,1")]
    pub luminance: (f64, f64),
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum Model {
    Classic,
    Improved,
}

impl From<Model> for Variant {
    fn from(m: Model) -> Variant {
        match m {
            Model::Classic => Variant::Classic,
            Model::Improved => Variant::Improved,
        }
    }
}

#[derive(Args, Debug)]
pub struct RunArgs {
    #[arg(long, value_enum)]
    pub model: Model,
    /// Model configuration file (key=value lines); defaults otherwise.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Frames whose LPTC fields are saved for `metrics`.
    #[arg(long, value_delimiter = ',', default_value = "840")]
    pub save_fields: Vec<usize>,
    /// Also dump every intermediate stage at the saved frames.
    #[arg(long)]
    pub dump_stages: bool,
}

#[derive(Args, Debug)]
pub struct MetricsArgs {
    #[arg(long, default_value_t = 840)]
    pub frame: usize,
    /// True motion direction; defaults to the one recorded with the runs.
    #[arg(long, value_parser = parse_direction)]
    pub truth: Option<Direction>,
    #[arg(long, num_args = 1.., required = true)]
    pub runs: Vec<PathBuf>,
    /// Comma-separated thresholds, ascending, starting at 0.01.
    #[arg(long, value_parser = parse_gammas)]
    pub gammas: Option<ThresholdSchedule>,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct CompareArgs {
    #[arg(long = "in", num_args = 1.., required = true)]
    pub inputs: Vec<PathBuf>,
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, default_value_t = 840)]
    pub frame: usize,
    #[arg(long, value_parser = parse_direction)]
    pub truth: Option<Direction>,
    #[arg(long, value_parser = parse_gammas)]
    pub gammas: Option<ThresholdSchedule>,
    #[arg(long)]
    pub out: PathBuf,
}

fn parse_size(s: &str) -> Result<(usize, usize), String> {
    let (w, h) = s
        .split_once(['x', 'X'])
        .ok_or_else(|| format!("expected WIDTHxHEIGHT, got `{s}`"))?;
    let w: usize = w.trim().parse().map_err(|_| format!("bad width `{w}`"))?;
    let h: usize = h.trim().parse().map_err(|_| format!("bad height `{h}`"))?;
    if w == 0 || h == 0 {
        return Err(format!("frame must have positive area, got {w}x{h}"));
    }
    Ok((w, h))
}

fn parse_range(s: &str) -> Result<(f64, f64), String> {
    let (lo, hi) = s.split_once(',').ok_or_else(|| format!("expected LO,HI, got `{s}`"))?;
    let lo: f64 = lo.trim().parse().map_err(|_| format!("bad bound `{lo}`"))?;
    let hi: f64 = hi.trim().parse().map_err(|_| format!("bad bound `{hi}`"))?;
    Ok((lo, hi))
}

fn parse_direction(s: &str) -> Result<Direction, String> {
    s.parse().map_err(|e: tqd_core::Error| e.to_string())
}

fn parse_texture(s: &str) -> Result<TextureKind, String> {
    s.parse().map_err(|e: tqd_core::Error| e.to_string())
}

fn parse_gammas(s: &str) -> Result<ThresholdSchedule, String> {
    ThresholdSchedule::parse(s).map_err(|e| e.to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error[threads]: {e}");
            return ExitCode::FAILURE;
        }
    }
    let result = match cli.command {
        Command::Generate(a) => commands::generate(&a),
        Command::Run(a) => commands::run(&a),
        Command::Metrics(a) => commands::metrics(&a),
        Command::Compare(a) => commands::compare(&a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error[{}]: {}", e.category(), e.to_string().replace('\n', " "));
            ExitCode::FAILURE
        }
    }
}
