mod commands;
mod config;

use std::fmt;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};
use serde_json::Value;

/// Bad flag combination or value, reported with exit code 2.
#[derive(Debug)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

/// Result of a command: human-readable text and the equivalent JSON.
pub struct Report {
    pub text: String,
    pub json: Value,
}

#[derive(Parser)]
#[command(name = "foveakit", version, about = "Foveated sensor grids, kNN kernel tables and sampling analyses")]
struct Cli {
    /// Print machine-readable JSON instead of text.
    #[arg(long, global = true)]
    json: bool,

    /// TOML file of flag defaults, one table per subcommand; flags override it.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a foveated sensor grid.
    Grid(GridArgs),
    /// Compile neighbourhoods and a kernel-map bundle between two grids.
    Tables(TablesArgs),
    /// Sample an image through a grid at one or more fixations.
    Foveate(FoveateArgs),
    /// Render a foveated signal back to an image, or plot a grid.
    Render(RenderArgs),
    /// Receptive-field and resolution analyses.
    #[command(subcommand)]
    Analyze(AnalyzeCommand),
    /// Log-polar and warped-Cartesian comparison samplers.
    #[command(subcommand)]
    Baselines(BaselinesCommand),
    /// Analytic transformer FLOPs.
    Flops(FlopsArgs),
    /// Find foveation values giving exactly N samples.
    SolveA(SolveArgs),
}

#[derive(Clone, Copy, ValueEnum)]
pub enum RuleArg {
    FiniteDifference,
    Differential,
}

#[derive(Args)]
#[command(group(ArgGroup::new("size").required(true).args(["target_n", "n_r", "lattice"])))]
pub struct GridArgs {
    /// Foveation parameter in degrees.
    #[arg(long, allow_negative_numbers = true)]
    pub a: f64,
    /// Field-of-view diameter in degrees.
    #[arg(long, default_value_t = 16.0)]
    pub fov: f64,
    /// Largest grid not exceeding this many active points.
    #[arg(long)]
    pub target_n: Option<usize>,
    /// Exact number of rings, the centre point included.
    #[arg(long)]
    pub n_r: Option<usize>,
    /// Square SIDE × SIDE lattice instead of rings.
    #[arg(long, value_name = "SIDE", conflicts_with = "stagger")]
    pub lattice: Option<usize>,
    /// Rings (or lattice rows) of padding outside the field of view.
    #[arg(long, default_value_t = 0)]
    pub pad_rings: usize,
    /// Rotate odd rings by half a sample.
    #[arg(long)]
    pub stagger: bool,
    #[arg(long, value_enum, default_value = "finite-difference")]
    pub rule: RuleArg,
    /// Output directory for the manifest and point blob.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, default_value = "grid")]
    pub stem: String,
    /// Also write PNG plots of the visual positions and the flattened chart.
    #[arg(long, requires = "out")]
    pub png: bool,
}

#[derive(Clone, Copy, ValueEnum)]
pub enum MetricArg {
    Chord,
    MeanEccentricity,
}

#[derive(Args)]
#[command(group(ArgGroup::new("output").required(true).args(["out_grid", "target_n_out"])))]
#[command(group(ArgGroup::new("size").required(true).args(["k", "min_covering"])))]
pub struct TablesArgs {
    /// Manifest of the input grid.
    #[arg(long)]
    pub grid_in: PathBuf,
    /// Manifest of the output grid.
    #[arg(long)]
    pub out_grid: Option<PathBuf>,
    /// Build the output grid with the input's foveation and about this many points.
    #[arg(long)]
    pub target_n_out: Option<usize>,
    /// Neighbours per output unit.
    #[arg(long)]
    pub k: Option<usize>,
    /// Use the smallest k whose neighbourhoods cover every input point.
    #[arg(long)]
    pub min_covering: bool,
    /// Reference kernel samples per neighbour spacing (1 or 2).
    #[arg(long, default_value_t = 1)]
    pub res_multiplier: usize,
    #[arg(long, value_enum, default_value = "chord")]
    pub metric: MetricArg,
    /// Bundle directory.
    #[arg(long)]
    pub out: PathBuf,
    /// Check the written tables against a dense 3×3 convolution (lattice grids).
    #[arg(long)]
    pub self_test: bool,
    /// Export this many random forward-pass cases next to the bundle.
    #[arg(long, requires = "seed")]
    pub reference_cases: Option<usize>,
    #[arg(long, default_value_t = 3)]
    pub c_in: usize,
    #[arg(long, default_value_t = 8)]
    pub c_out: usize,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Args)]
pub struct FoveateArgs {
    /// Manifest of the sensor grid.
    #[arg(long)]
    pub grid: PathBuf,
    /// PNG, PGM or PPM image.
    #[arg(long)]
    pub image: PathBuf,
    /// Fixation as a fraction of the image width.
    #[arg(long, default_value_t = 0.5)]
    pub cx: f64,
    /// Fixation as a fraction of the image height, from the top.
    #[arg(long, default_value_t = 0.5)]
    pub cy: f64,
    /// Field-of-view diameter as a fraction of the shorter image side.
    #[arg(long, default_value_t = 1.0)]
    pub scale: f64,
    /// Draw this many fixations uniformly from a disc around the image centre.
    #[arg(long, requires = "seed", conflicts_with_all = ["cx", "cy"])]
    pub fixations: Option<usize>,
    /// Radius of the fixation disc as a fraction of the image size.
    #[arg(long, default_value_t = 0.25)]
    pub radius: f64,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value = "signal")]
    pub stem: String,
    /// Also write a PNG back-projection of every signal.
    #[arg(long)]
    pub png: bool,
}

#[derive(Args)]
pub struct RenderArgs {
    /// Manifest of the sensor grid.
    #[arg(long)]
    pub grid: PathBuf,
    /// Signal manifest; without one the grid itself is plotted.
    #[arg(long)]
    pub signal: Option<PathBuf>,
    /// Output PNG.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub width: Option<usize>,
    #[arg(long)]
    pub height: Option<usize>,
    /// Plot the flattened chart instead of visual positions.
    #[arg(long, conflicts_with = "signal")]
    pub flat: bool,
}

#[derive(Subcommand)]
pub enum AnalyzeCommand {
    /// RF diameter and shape per layer of the five-layer test stack.
    Rf(RfArgs),
    /// Sensor samples per native pixel against eccentricity.
    Resolution(ResolutionArgs),
}

#[derive(Clone, Copy, ValueEnum)]
pub enum StatArg {
    MaxExtent,
    Gaussian,
}

#[derive(Args)]
pub struct RfArgs {
    #[arg(long)]
    pub a: f64,
    #[arg(long, default_value_t = 16.0)]
    pub fov: f64,
    /// Active points of the input grid.
    #[arg(long, default_value_t = 4096)]
    pub n_input: usize,
    #[arg(long, value_enum, default_value = "max-extent")]
    pub stat: StatArg,
    /// Directory for the CSV, JSON and PNG outputs.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args)]
pub struct ResolutionArgs {
    #[arg(long)]
    pub grid: PathBuf,
    /// Native image width in pixels.
    #[arg(long)]
    pub width: usize,
    #[arg(long)]
    pub height: usize,
    #[arg(long, default_value_t = 0.5)]
    pub cx: f64,
    #[arg(long, default_value_t = 0.5)]
    pub cy: f64,
    #[arg(long, default_value_t = 1.0)]
    pub scale: f64,
    /// CSV output.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Subcommand)]
pub enum BaselinesCommand {
    /// Anisotropy of k-neighbour footprints at normalized sensor radii.
    Anisotropy(AnisotropyArgs),
    /// Radial over angular spacing per ring.
    DrDtheta(DrDthetaArgs),
    /// Save a comparison sampler to disk.
    Export(ExportArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KindArg {
    LogPolar,
    Warped,
    Foveated,
}

#[derive(Args)]
pub struct AnisotropyArgs {
    #[arg(long, value_enum)]
    pub kind: KindArg,
    #[arg(long, default_value_t = 0.5)]
    pub a: f64,
    #[arg(long, default_value_t = 16.0)]
    pub fov: f64,
    /// Array side for log-polar and warped samplers.
    #[arg(long, default_value_t = 64)]
    pub side: usize,
    /// Points of the foveated grid; defaults to side².
    #[arg(long)]
    pub target_n: Option<usize>,
    /// Normalized sensor radius in [0, 1]; repeatable.
    #[arg(long, default_values_t = [0.9])]
    pub r: Vec<f64>,
    /// Neighbours per footprint.
    #[arg(long, default_value_t = 200)]
    pub k: usize,
    /// CSV output.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args)]
pub struct DrDthetaArgs {
    #[arg(long, value_enum, default_value = "log-polar")]
    pub kind: KindArg,
    #[arg(long, default_value_t = 0.5)]
    pub a: f64,
    #[arg(long, default_value_t = 16.0)]
    pub fov: f64,
    #[arg(long, default_value_t = 64)]
    pub side: usize,
    #[arg(long)]
    pub target_n: Option<usize>,
    /// CSV output.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args)]
pub struct ExportArgs {
    #[arg(long, value_enum)]
    pub kind: KindArg,
    #[arg(long, default_value_t = 0.5)]
    pub a: f64,
    #[arg(long, default_value_t = 16.0)]
    pub fov: f64,
    #[arg(long, default_value_t = 64)]
    pub side: usize,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value = "baseline")]
    pub stem: String,
}

#[derive(Args)]
#[command(group(ArgGroup::new("what").required(true).multiple(true).args(["tokens", "resolution"])))]
pub struct FlopsArgs {
    /// Patch-token count; repeatable. Ratios are relative to the last one.
    #[arg(long)]
    pub tokens: Vec<usize>,
    /// Square input resolution for the fixation curve; repeatable.
    #[arg(long)]
    pub resolution: Vec<usize>,
    /// Fixation counts for the curve; repeatable.
    #[arg(long, default_values_t = [1])]
    pub fixations: Vec<usize>,
    #[arg(long, default_value_t = 384)]
    pub embed_dim: usize,
    #[arg(long, default_value_t = 1536)]
    pub mlp_dim: usize,
    #[arg(long, default_value_t = 12)]
    pub layers: usize,
    #[arg(long, default_value_t = 6)]
    pub heads: usize,
    #[arg(long, default_value_t = 8)]
    pub patch_size: usize,
    #[arg(long, default_value_t = 5)]
    pub extra_tokens: usize,
    #[arg(long, default_value_t = 1000)]
    pub num_classes: usize,
    /// Plain two-layer MLP instead of the gated one.
    #[arg(long)]
    pub ungated: bool,
    #[arg(long)]
    pub bias: bool,
    /// CSV output for the fixation curve.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args)]
pub struct SolveArgs {
    /// Required number of active points.
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 16.0)]
    pub fov: f64,
    #[arg(long, default_value_t = 2)]
    pub n_r_min: usize,
    #[arg(long, default_value_t = 64)]
    pub n_r_max: usize,
    #[arg(long, default_value_t = 0.01)]
    pub a_min: f64,
    #[arg(long, default_value_t = 1000.0)]
    pub a_max: f64,
}

/// 2 for usage errors, 3 for corrupted or mismatched artifacts, 1 otherwise.
fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if cause.downcast_ref::<UsageError>().is_some() {
            return 2;
        }
        if let Some(e) = cause.downcast_ref::<foveakit::Error>() {
            return match e {
                foveakit::Error::Integrity { .. } | foveakit::Error::Format(_) => 3,
                _ => 1,
            };
        }
    }
    1
}

fn run(cli: Cli) -> anyhow::Result<Report> {
    match cli.command {
        Command::Grid(a) => commands::grid(a),
        Command::Tables(a) => commands::tables(a),
        Command::Foveate(a) => commands::foveate(a),
        Command::Render(a) => commands::render(a),
        Command::Analyze(AnalyzeCommand::Rf(a)) => commands::analyze_rf(a),
        Command::Analyze(AnalyzeCommand::Resolution(a)) => commands::analyze_resolution(a),
        Command::Baselines(BaselinesCommand::Anisotropy(a)) => commands::anisotropy(a),
        Command::Baselines(BaselinesCommand::DrDtheta(a)) => commands::dr_dtheta(a),
        Command::Baselines(BaselinesCommand::Export(a)) => commands::export_baseline(a),
        Command::Flops(a) => commands::flops(a),
        Command::SolveA(a) => commands::solve_a(a),
    }
}

fn main() -> ExitCode {
    let json_requested = std::env::args().any(|a| a == "--json");
    let fail = |err: anyhow::Error| {
        let code = exit_code(&err);
        eprintln!("error: {err:#}");
        if json_requested {
            let _ = writeln!(std::io::stdout(), "{}", serde_json::json!({ "error": format!("{err:#}"), "exit_code": code }));
        }
        ExitCode::from(code)
    };
    let args = match config::apply(std::env::args_os().collect()) {
        Ok(a) => a,
        Err(e) => return fail(e),
    };
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            let code = e.exit_code();
            if json_requested && e.use_stderr() {
                let msg = e.kind().as_str().unwrap_or("invalid arguments");
                let _ = writeln!(std::io::stdout(), "{}", serde_json::json!({ "error": msg, "exit_code": code }));
            }
            return ExitCode::from(code as u8);
        }
    };
    let json = cli.json;
    match run(cli) {
        Ok(report) => {
            let body = if json {
                serde_json::to_string_pretty(&report.json).expect("report serializes") + "\n"
            } else {
                report.text
            };
            // a closed pipe (e.g. `| head`) is not an error
            let _ = std::io::stdout().lock().write_all(body.as_bytes());
            ExitCode::SUCCESS
        }
        Err(e) => fail(e),
    }
}
