use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use node_sense::curve_fit::FitMethod;
use node_sense::exp_models::ExpKind;
use node_sense::mc_estimation::Builtin;

#[derive(Debug, Parser)]
#[command(
    name = "node-sense",
    about = "Coverage estimation, curve fitting and cell simulation for sensor networks"
)]
pub struct Cli {
    /// Base seed for every random draw.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,

    /// Output format; each command has its own default.
    #[arg(long, global = true, value_enum)]
    pub output: Option<Format>,

    /// Suppress warnings on stderr.
    #[arg(long, short, global = true)]
    pub quiet: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Monte Carlo acceptance sampling.
    #[command(subcommand)]
    Mc(McCommand),
    /// Classify cell centers against a circular coverage region.
    Coverage(CoverageArgs),
    /// Least-squares line fit.
    Fit(FitArgs),
    /// Exponential growth and decay models.
    #[command(subcommand)]
    Exp(ExpCommand),
    /// Position prediction from two samples.
    #[command(subcommand)]
    Predict(PredictCommand),
    /// Replay a join/leave script against the cell model.
    Sim(SimArgs),
}

#[derive(Debug, Subcommand)]
pub enum McCommand {
    /// Estimate π from points in the unit square.
    Pi(PiArgs),
    /// Area under a bounded function.
    Integrate(CurveArgs),
    /// Expected node count under a bounded function.
    Nodes(NodesArgs),
}

#[derive(Debug, Args)]
pub struct SamplingArgs {
    #[arg(long)]
    pub samples: u64,
    /// Independent RNG streams, run in parallel.
    #[arg(long, default_value_t = 1)]
    pub streams: u32,
}

#[derive(Debug, Args)]
pub struct PiArgs {
    #[command(flatten)]
    pub sampling: SamplingArgs,
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
pub struct CurveArgs {
    /// `poly:c0,c1,...` (ascending degree) or `builtin:NAME`.
    #[arg(long = "fn", value_parser = parse_fn_spec, allow_hyphen_values = true)]
    pub function: FnSpec,
    #[arg(long)]
    pub b1: f64,
    #[arg(long)]
    pub b2: f64,
    #[arg(long)]
    pub height: f64,
    #[command(flatten)]
    pub sampling: SamplingArgs,
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
pub struct NodesArgs {
    /// Total number of nodes in the bounding rectangle.
    #[arg(long)]
    pub total: u64,
    #[command(flatten)]
    pub curve: CurveArgs,
}

#[derive(Debug, Clone, PartialEq)]
pub enum FnSpec {
    Poly(Vec<f64>),
    Builtin(Builtin),
}

pub fn parse_fn_spec(s: &str) -> Result<FnSpec, String> {
    let (tag, body) = s
        .split_once(':')
        .ok_or_else(|| format!("expected poly:c0,c1,... or builtin:NAME, got '{s}'"))?;
    match tag {
        "poly" => body
            .split(',')
            .map(|c| {
                c.trim()
                    .parse::<f64>()
                    .map_err(|e| format!("coefficient '{c}': {e}"))
            })
            .collect::<Result<Vec<_>, _>>()
            .map(FnSpec::Poly),
        "builtin" => body
            .parse()
            .map(FnSpec::Builtin)
            .map_err(|e| format!("{e}")),
        other => Err(format!("unknown function kind '{other}'")),
    }
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
pub struct CoverageArgs {
    /// Region center as `X,Y`.
    #[arg(long, value_parser = parse_pair, allow_hyphen_values = true)]
    pub center: (f64, f64),
    #[arg(long)]
    pub radius: f64,
    /// CSV with header `id,x,y`.
    #[arg(long)]
    pub cells: PathBuf,
    /// Half-width of the boundary band around score 1.
    #[arg(long, default_value_t = node_sense::coverage::DEFAULT_EPSILON)]
    pub epsilon: f64,
}

pub fn parse_pair(s: &str) -> Result<(f64, f64), String> {
    let (x, y) = s
        .split_once(',')
        .ok_or_else(|| format!("expected X,Y, got '{s}'"))?;
    let x = x.trim().parse().map_err(|e| format!("'{x}': {e}"))?;
    let y = y.trim().parse().map_err(|e| format!("'{y}': {e}"))?;
    Ok((x, y))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Vertical,
    Perpendicular,
}

impl From<MethodArg> for FitMethod {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Vertical => FitMethod::VerticalOffsets,
            MethodArg::Perpendicular => FitMethod::PerpendicularOffsets,
        }
    }
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
pub struct FitArgs {
    #[arg(long, value_enum, default_value = "vertical")]
    pub method: MethodArg,
    /// CSV with header `x,y`.
    #[arg(long)]
    pub input: PathBuf,
    /// Also write sampled points of the fitted line to this CSV.
    #[arg(long, requires = "range")]
    pub emit_line: Option<PathBuf>,
    /// Sampling interval `X1:X2` for `--emit-line` (along y for a vertical line).
    #[arg(long, value_parser = parse_range, allow_hyphen_values = true)]
    pub range: Option<(f64, f64)>,
    #[arg(long, default_value_t = 100)]
    pub steps: usize,
}

pub fn parse_range(s: &str) -> Result<(f64, f64), String> {
    let (a, b) = s
        .split_once(':')
        .ok_or_else(|| format!("expected X1:X2, got '{s}'"))?;
    let a = a.trim().parse().map_err(|e| format!("'{a}': {e}"))?;
    let b = b.trim().parse().map_err(|e| format!("'{b}': {e}"))?;
    Ok((a, b))
}

#[derive(Debug, Subcommand)]
pub enum ExpCommand {
    /// Fit a model to a `t,y` series.
    Fit(ExpFitArgs),
    /// Evaluate a model at one instant.
    Eval(ExpEvalArgs),
    /// Write `steps + 1` evenly spaced samples of a model.
    Curve(ExpCurveArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModelArg {
    GrowthDecay,
    Modified,
}

#[derive(Debug, Args)]
pub struct ExpFitArgs {
    #[arg(long, value_enum)]
    pub model: ModelArg,
    /// CSV with header `t,y`.
    #[arg(long)]
    pub input: PathBuf,
    /// Capacity `N`, required for the modified model.
    #[arg(long)]
    pub capacity: Option<f64>,
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
pub struct ModelArgs {
    /// growth, decay or modified-growth.
    #[arg(long)]
    pub kind: ExpKind,
    #[arg(long)]
    pub scale: f64,
    #[arg(long)]
    pub rate: f64,
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
pub struct ExpEvalArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long)]
    pub t: f64,
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
pub struct ExpCurveArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long)]
    pub t1: f64,
    #[arg(long)]
    pub t2: f64,
    #[arg(long, default_value_t = 100)]
    pub steps: usize,
    /// Destination CSV with header `t,value`.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Subcommand)]
pub enum PredictCommand {
    /// Position at the midpoint instant.
    Midway(SamplePair),
    /// Position at the next equidistant instant.
    #[command(alias = "extrapolate")]
    Extreme(SamplePair),
    /// Arithmetic, harmonic and geometric means of two instants.
    Means(TimePair),
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
pub struct SamplePair {
    #[arg(long)]
    pub t1: f64,
    #[arg(long)]
    pub p1: f64,
    #[arg(long)]
    pub t2: f64,
    #[arg(long)]
    pub p2: f64,
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
pub struct TimePair {
    #[arg(long)]
    pub t1: f64,
    #[arg(long)]
    pub t2: f64,
}

#[derive(Debug, Args)]
pub struct SimArgs {
    /// CSV with header `time,op,cell,node`.
    #[arg(long)]
    pub events: PathBuf,
    /// Size of the global address space.
    #[arg(long)]
    pub ips: u32,
    #[arg(long)]
    pub cells: u32,
    /// Also write the per-event log CSV here.
    #[arg(long)]
    pub log: Option<PathBuf>,
}
