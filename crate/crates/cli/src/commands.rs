use std::collections::BTreeMap;
use std::io::Write;
use std::net::Ipv4Addr;
use std::path::Path;

use node_sense::cell_network::{run_script, CellState, Event, EventOp, LogEntry, NodeId};
use node_sense::coverage::{classify_cell, partition_ips, IpAllocation, MembershipKind};
use node_sense::curve_fit::{fit, LinearFit};
use node_sense::exp_models::{
    fit_growth_decay, fit_modified_growth, sample_curve, ExpModel, TimeSeries,
};
use node_sense::mc_estimation::{
    estimate_area_under_curve, estimate_pi, BoundedFunction, FunctionKind, McConfig, McEstimate,
};
use node_sense::position_prediction::{
    am_hm_gm, predict_extrapolated, predict_midway, PositionSample,
};
use node_sense::{CoverageRegion, Point2D, PointSet};
use serde::Serialize;

use crate::args::*;
use crate::error::CliError;
use crate::table;

/// What a successful run produced: bytes for stdout and warnings for stderr.
#[derive(Debug, Default)]
pub struct Outcome {
    pub stdout: String,
    pub warnings: Vec<String>,
}

impl Outcome {
    fn text(stdout: String) -> Self {
        Self {
            stdout,
            warnings: Vec::new(),
        }
    }
}

pub fn run(cli: &Cli) -> Result<Outcome, CliError> {
    let fmt = cli.output;
    match &cli.command {
        Command::Mc(cmd) => mc(cmd, cli.seed, fmt.unwrap_or(Format::Json)),
        Command::Coverage(a) => coverage(a, fmt.unwrap_or(Format::Csv)),
        Command::Fit(a) => fit_cmd(a, fmt.unwrap_or(Format::Json)),
        Command::Exp(cmd) => exp(cmd, fmt.unwrap_or(Format::Json)),
        Command::Predict(cmd) => predict(cmd, fmt.unwrap_or(Format::Json)),
        Command::Sim(a) => sim(a, fmt.unwrap_or(Format::Json)),
    }
}

fn json_line<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string(value).expect("output serializes");
    s.push('\n');
    s
}

fn csv_rows<T: Serialize>(rows: &[T]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in rows {
        w.serialize(row).expect("row serializes");
    }
    String::from_utf8(w.into_inner().expect("in-memory writer")).expect("utf-8 output")
}

/// Like `csv_rows` but with an explicit header, kept even when `rows` is empty.
fn csv_table<T: Serialize>(header: &[&str], rows: &[T]) -> String {
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(Vec::new());
    w.write_record(header).expect("header writes");
    for row in rows {
        w.serialize(row).expect("row serializes");
    }
    String::from_utf8(w.into_inner().expect("in-memory writer")).expect("utf-8 output")
}

/// Writes a CSV file with an explicit header (so empty tables keep it).
fn write_csv<T: Serialize>(path: &Path, header: &[&str], rows: &[T]) -> Result<(), CliError> {
    let out_err = |e: &dyn std::fmt::Display| CliError::Output {
        path: path.into(),
        message: e.to_string(),
    };
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_path(path)
        .map_err(|e| out_err(&e))?;
    w.write_record(header).map_err(|e| out_err(&e))?;
    for row in rows {
        w.serialize(row).map_err(|e| out_err(&e))?;
    }
    w.flush().map_err(|e| out_err(&e))
}

fn emit<T: Serialize>(value: &T, fmt: Format) -> String {
    match fmt {
        Format::Json => json_line(value),
        Format::Csv => csv_rows(std::slice::from_ref(value)),
    }
}

fn mc(cmd: &McCommand, seed: u64, fmt: Format) -> Result<Outcome, CliError> {
    let config = |s: &SamplingArgs| {
        let cfg = McConfig::new(s.samples, seed).with_streams(s.streams);
        cfg.validate().map(|_| cfg)
    };
    let est: McEstimate<f64> = match cmd {
        McCommand::Pi(a) => estimate_pi(&config(&a.sampling)?)?,
        McCommand::Integrate(a) => estimate_area_under_curve(&bounded(a)?, &config(&a.sampling)?)?,
        McCommand::Nodes(a) => {
            let est = estimate_area_under_curve(&bounded(&a.curve)?, &config(&a.curve.sampling)?)?;
            if a.total == 0 {
                return Err(node_sense::mc_estimation::McError::NoNodes.into());
            }
            // Same counts, rescaled from the rectangle's area to its node total.
            McEstimate::from_counts(est.accepted, est.total, a.total as f64)
        }
    };
    Ok(Outcome::text(emit(&est, fmt)))
}

fn bounded(a: &CurveArgs) -> Result<BoundedFunction<f64>, CliError> {
    let kind = match &a.function {
        FnSpec::Poly(c) => FunctionKind::Polynomial(c.clone()),
        FnSpec::Builtin(b) => FunctionKind::Builtin(*b),
    };
    Ok(BoundedFunction::new(kind, a.b1, a.b2, a.height)?)
}

#[derive(Serialize)]
struct CoverageRow<'a> {
    id: &'a str,
    score: f64,
    membership: MembershipKind,
}

fn coverage(a: &CoverageArgs, fmt: Format) -> Result<Outcome, CliError> {
    let region = CoverageRegion::new(Point2D::new(a.center.0, a.center.1), a.radius)?;
    if !(a.epsilon.is_finite() && a.epsilon >= 0.0) {
        return Err(CliError::Usage(format!(
            "--epsilon must be finite and non-negative, got {}",
            a.epsilon
        )));
    }
    let cells = table::read(&a.cells, &["id", "x", "y"], |r| {
        let p = Point2D::new(r.parse(1)?, r.parse(2)?);
        let m = classify_cell(&region, p, a.epsilon).map_err(|e| r.error(e.to_string()))?;
        Ok((r.text(0).to_string(), m))
    })?;
    let rows: Vec<CoverageRow> = cells
        .iter()
        .map(|(id, m)| CoverageRow {
            id,
            score: m.score,
            membership: m.kind,
        })
        .collect();
    let stdout = match fmt {
        Format::Json => json_line(&rows),
        Format::Csv => csv_table(&["id", "score", "membership"], &rows),
    };
    Ok(Outcome::text(stdout))
}

#[derive(Serialize)]
struct FitOut {
    method: &'static str,
    a: f64,
    b: f64,
    r: f64,
    r2: f64,
    se_a: f64,
    se_b: f64,
    s: f64,
    residual: f64,
    n: usize,
    /// Present only for a vertical perpendicular line `x = vertical_x`.
    #[serde(skip_serializing_if = "Option::is_none")]
    vertical_x: Option<f64>,
}

impl From<&LinearFit<f64>> for FitOut {
    fn from(f: &LinearFit<f64>) -> Self {
        Self {
            method: f.method.as_str(),
            a: f.intercept,
            b: f.slope,
            r: f.r,
            r2: f.r_squared,
            se_a: f.se_a,
            se_b: f.se_b,
            s: f.s,
            residual: f.residual,
            n: f.n,
            vertical_x: f.vertical_x,
        }
    }
}

fn fit_cmd(a: &FitArgs, fmt: Format) -> Result<Outcome, CliError> {
    let pairs = table::read(&a.input, &["x", "y"], |r| {
        Ok((r.parse::<f64>(0)?, r.parse::<f64>(1)?))
    })?;
    let points = PointSet::from_pairs(&pairs)?;
    let line = fit(&points, a.method.into())?;
    if let (Some(path), Some((lo, hi))) = (&a.emit_line, a.range) {
        let steps = a.steps.max(1);
        let rows: Vec<(f64, f64)> = (0..=steps)
            .map(|i| {
                let u = if i == steps {
                    hi
                } else {
                    lo + (hi - lo) * i as f64 / steps as f64
                };
                match line.vertical_x {
                    Some(x) => (x, u),
                    None => (u, line.predict(u)),
                }
            })
            .collect();
        write_csv(path, &["x", "y"], &rows)?;
    }
    Ok(Outcome::text(emit(&FitOut::from(&line), fmt)))
}

#[derive(Serialize)]
struct ModelOut {
    kind: &'static str,
    scale: f64,
    rate: f64,
}

impl From<&ExpModel<f64>> for ModelOut {
    fn from(m: &ExpModel<f64>) -> Self {
        Self {
            kind: m.kind.as_str(),
            scale: m.scale,
            rate: m.rate,
        }
    }
}

fn model(a: &ModelArgs) -> Result<ExpModel<f64>, CliError> {
    Ok(ExpModel::new(a.kind, a.scale, a.rate)?)
}

fn exp(cmd: &ExpCommand, fmt: Format) -> Result<Outcome, CliError> {
    match cmd {
        ExpCommand::Fit(a) => {
            let samples = table::read(&a.input, &["t", "y"], |r| {
                Ok((r.parse::<f64>(0)?, r.parse::<f64>(1)?))
            })?;
            let series = TimeSeries::new(samples)?;
            let m = match (a.model, a.capacity) {
                (ModelArg::GrowthDecay, _) => fit_growth_decay(&series)?,
                (ModelArg::Modified, Some(n)) => fit_modified_growth(&series, n)?,
                (ModelArg::Modified, None) => {
                    return Err(CliError::Usage(
                        "--model modified requires --capacity".into(),
                    ))
                }
            };
            Ok(Outcome::text(emit(&ModelOut::from(&m), fmt)))
        }
        ExpCommand::Eval(a) => {
            let value = model(&a.model)?.evaluate(a.t)?;
            #[derive(Serialize)]
            struct Value {
                t: f64,
                value: f64,
            }
            let stdout = match fmt {
                Format::Json => json_line(&value),
                Format::Csv => csv_rows(&[Value { t: a.t, value }]),
            };
            Ok(Outcome::text(stdout))
        }
        ExpCommand::Curve(a) => {
            let rows = sample_curve(&model(&a.model)?, a.t1, a.t2, a.steps)?;
            write_csv(&a.out, &["t", "value"], &rows)?;
            #[derive(Serialize)]
            struct Written<'a> {
                out: &'a str,
                rows: usize,
            }
            let out = a.out.to_string_lossy();
            Ok(Outcome::text(emit(
                &Written {
                    out: &out,
                    rows: rows.len(),
                },
                fmt,
            )))
        }
    }
}

fn predict(cmd: &PredictCommand, fmt: Format) -> Result<Outcome, CliError> {
    let pair = |a: &SamplePair| -> Result<_, CliError> {
        Ok((
            PositionSample::new(a.t1, a.p1)?,
            PositionSample::new(a.t2, a.p2)?,
        ))
    };
    let stdout = match cmd {
        PredictCommand::Midway(a) => {
            let (s1, s2) = pair(a)?;
            emit(&predict_midway(&s1, &s2)?, fmt)
        }
        PredictCommand::Extreme(a) => {
            let (s1, s2) = pair(a)?;
            emit(&predict_extrapolated(&s1, &s2)?, fmt)
        }
        PredictCommand::Means(a) => emit(&am_hm_gm(a.t1, a.t2)?, fmt),
    };
    Ok(Outcome::text(stdout))
}

#[derive(Serialize)]
struct LogRow<'a> {
    time: u64,
    op: &'static str,
    cell: u32,
    node: &'a str,
    result: &'static str,
    leader: &'a str,
    version: u64,
    ip: Ipv4Addr,
}

impl<'a> From<&'a LogEntry> for LogRow<'a> {
    fn from(e: &'a LogEntry) -> Self {
        Self {
            time: e.time,
            op: e.op.as_str(),
            cell: e.cell,
            node: e.node.as_str(),
            result: e.result.as_str(),
            leader: e.leader.as_ref().map_or("", NodeId::as_str),
            version: e.version,
            ip: e.ip,
        }
    }
}

const LOG_HEADER: [&str; 8] = [
    "time", "op", "cell", "node", "result", "leader", "version", "ip",
];

#[derive(Serialize)]
struct CellView<'a> {
    cell: u32,
    leader: Option<&'a str>,
    members: Vec<&'a str>,
    version: u64,
    free_ips: usize,
    table: &'a BTreeMap<NodeId, Ipv4Addr>,
}

impl<'a> From<&'a CellState> for CellView<'a> {
    fn from(c: &'a CellState) -> Self {
        Self {
            cell: c.cell_id,
            leader: c.leader().map(NodeId::as_str),
            members: c.members().iter().map(NodeId::as_str).collect(),
            version: c.version(),
            free_ips: c.free_ips().count(),
            table: &c.table().entries,
        }
    }
}

#[derive(Serialize)]
struct SimOut<'a> {
    allocation: IpAllocation,
    cells: Vec<CellView<'a>>,
    log: Vec<LogRow<'a>>,
}

fn sim(a: &SimArgs, fmt: Format) -> Result<Outcome, CliError> {
    let allocation = partition_ips(a.ips, a.cells)?;
    let events = table::read(&a.events, &["time", "op", "cell", "node"], |r| {
        let op: EventOp = r.parse(1)?;
        let node = NodeId::new(r.text(3)).map_err(|e| r.error(e.to_string()))?;
        Ok(Event {
            time: r.parse(0)?,
            op,
            cell: r.parse(2)?,
            node,
        })
    })?;
    let outcome = run_script(&events, allocation)?;

    let mut warnings = Vec::new();
    if allocation.underprovisioned {
        warnings.push(format!(
            "{} addresses for {} cells: every cell block is empty",
            a.ips, a.cells
        ));
    } else if allocation.remainder > 0 {
        warnings.push(format!(
            "{} addresses held in reserve",
            allocation.remainder
        ));
    }

    let log: Vec<LogRow> = outcome.log.iter().map(LogRow::from).collect();
    if let Some(path) = &a.log {
        write_csv(path, &LOG_HEADER, &log)?;
    }
    let stdout = match fmt {
        Format::Json => {
            let cells = outcome.cells.iter().map(CellView::from).collect();
            json_line(&SimOut {
                allocation,
                cells,
                log,
            })
        }
        Format::Csv => csv_table(&LOG_HEADER, &log),
    };
    Ok(Outcome { stdout, warnings })
}

/// Prints `outcome` and returns the process exit code.
pub fn report(result: Result<Outcome, CliError>, quiet: bool) -> i32 {
    let stderr = std::io::stderr();
    match result {
        Ok(outcome) => {
            if !quiet {
                let mut err = stderr.lock();
                for w in &outcome.warnings {
                    let line = serde_json::json!({ "warning": w });
                    let _ = writeln!(err, "{line}");
                }
            }
            let mut out = std::io::stdout().lock();
            match out
                .write_all(outcome.stdout.as_bytes())
                .and_then(|_| out.flush())
            {
                Ok(()) => 0,
                Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => 0,
                Err(_) => 1,
            }
        }
        Err(e) => {
            let _ = writeln!(stderr.lock(), "{}", e.to_json());
            e.exit_code()
        }
    }
}
