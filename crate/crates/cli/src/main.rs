use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use log::{info, warn};
use serde::Serialize;

use readability_core::dataflow::{ExecConfig, Executor};
use readability_core::graphio::{self, EdgeList, IoError};
use readability_core::metrics::enhanced::{StripOrientation, StripWidth};
use readability_core::metrics::{check_ideal_angle, check_radius, MetricError, MetricKind};
use readability_core::graph::IngestStats;
use readability_core::report::{evaluate, EvalParams, MetricValues, Mode, ReadabilityReport};
use readability_core::LayoutGraph;

#[derive(Parser)]
#[command(name = "readability", version, about = "Readability metrics for graph layouts")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate metrics on one layout
    Eval(EvalArgs),
    /// Generate a layout file for an edge list
    Gen(GenArgs),
    /// Compare the enhanced algorithms with the serial oracle
    Compare(CompareArgs),
    /// Time one mode across several thread counts
    Bench(BenchArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Oracle,
    Exact,
    Enhanced,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Oracle => Mode::Oracle,
            ModeArg::Exact => Mode::ExactParallel,
            ModeArg::Enhanced => Mode::Enhanced,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum OrientationArg {
    Vertical,
    Horizontal,
    Both,
}

impl From<OrientationArg> for StripOrientation {
    fn from(o: OrientationArg) -> Self {
        match o {
            OrientationArg::Vertical => StripOrientation::Vertical,
            OrientationArg::Horizontal => StripOrientation::Horizontal,
            OrientationArg::Both => StripOrientation::Both,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum StripUnit {
    /// Fraction of the layout extent along the strip axis
    Fraction,
    /// Layout units
    Absolute,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, ValueEnum)]
enum Generator {
    Random,
    Fr,
}

#[derive(Args)]
struct InputArgs {
    /// Edge list: whitespace-separated id pairs, `#` comments
    #[arg(long)]
    edges: PathBuf,
    /// Layout CSV with header `id,x,y`
    #[arg(long)]
    layout: Option<PathBuf>,
    /// Generate the layout instead of reading one
    #[arg(long, value_enum, conflicts_with = "layout")]
    generate: Option<Generator>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Side of the square frame for generated layouts
    #[arg(long, default_value_t = 100.0)]
    extent: f64,
    /// Force-directed iterations for `--generate fr`
    #[arg(long, default_value_t = 50)]
    iterations: usize,
}

#[derive(Args)]
struct MetricArgs {
    /// Comma-separated subset of nc, ma, ml, ec, eca
    #[arg(long, value_delimiter = ',', default_value = "nc,ma,ml,ec,eca")]
    metrics: Vec<String>,
    /// Vertex boundary radius for node occlusion (layout units)
    #[arg(long, default_value_t = 0.5)]
    radius: f64,
    /// Ideal crossing angle in degrees
    #[arg(long, default_value_t = 70.0)]
    ideal_angle: f64,
    /// Strip width for the enhanced crossing algorithms
    #[arg(long, default_value_t = 0.05)]
    strip_width: f64,
    #[arg(long, value_enum, default_value_t = StripUnit::Fraction)]
    strip_unit: StripUnit,
    #[arg(long, value_enum, default_value_t = OrientationArg::Vertical)]
    orientation: OrientationArg,
}

#[derive(Args)]
struct OutputArgs {
    /// Write results here instead of standard output
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Args)]
struct EvalArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    metric: MetricArgs,
    #[command(flatten)]
    out: OutputArgs,
    #[arg(long, value_enum, default_value_t = ModeArg::Exact)]
    mode: ModeArg,
    /// Worker threads for the parallel paths
    #[arg(long, default_value_t = 1)]
    threads: usize,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long)]
    edges: PathBuf,
    #[arg(long, value_enum, default_value_t = Generator::Random)]
    kind: Generator,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 100.0)]
    extent: f64,
    #[arg(long, default_value_t = 50)]
    iterations: usize,
    /// Layout CSV to write; standard output when absent
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct CompareArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    metric: MetricArgs,
    #[command(flatten)]
    out: OutputArgs,
    #[arg(long, default_value_t = 1)]
    threads: usize,
}

#[derive(Args)]
struct BenchArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    metric: MetricArgs,
    #[command(flatten)]
    out: OutputArgs,
    #[arg(long, value_enum, default_value_t = ModeArg::Enhanced)]
    mode: ModeArg,
    /// Ascending thread counts to time
    #[arg(long, value_delimiter = ',', default_value = "1,2,4,8")]
    threads_list: Vec<usize>,
    /// Runs per thread count; the fastest is kept
    #[arg(long, default_value_t = 3)]
    repeat: usize,
}

enum Failure {
    Usage(String),
    Input(String),
    Invariant(String),
}

impl From<IoError> for Failure {
    fn from(e: IoError) -> Self {
        Failure::Input(e.to_string())
    }
}

impl From<MetricError> for Failure {
    fn from(e: MetricError) -> Self {
        match e {
            MetricError::InvalidRadius(_)
            | MetricError::InvalidIdealAngle(_)
            | MetricError::InvalidStripWidth(_)
            | MetricError::TooManyStrips(_) => Failure::Usage(e.to_string()),
            MetricError::Dataflow(_) | MetricError::EmptyAngles => Failure::Invariant(e.to_string()),
            _ => Failure::Input(e.to_string()),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Input(e.to_string())
    }
}

type Outcome<T> = Result<T, Failure>;

/// Validated metric parameters; the angle is converted to radians here.
fn eval_params(m: &MetricArgs) -> Outcome<(EvalParams, Vec<MetricKind>)> {
    let mut kinds = Vec::new();
    for name in &m.metrics {
        let kind: MetricKind = name.parse().map_err(Failure::Usage)?;
        if !kinds.contains(&kind) {
            kinds.push(kind);
        }
    }
    check_radius(m.radius)?;
    let ideal_angle = m.ideal_angle.to_radians();
    check_ideal_angle(ideal_angle)
        .map_err(|_| Failure::Usage(format!("ideal angle must lie in (0, 90] degrees, got {}", m.ideal_angle)))?;
    let strip_width = match m.strip_unit {
        StripUnit::Fraction => StripWidth::Fraction(m.strip_width),
        StripUnit::Absolute => StripWidth::Absolute(m.strip_width),
    };
    let valid = m.strip_width.is_finite()
        && m.strip_width > 0.0
        && (m.strip_unit == StripUnit::Absolute || m.strip_width < 1.0);
    if !valid {
        return Err(MetricError::InvalidStripWidth(m.strip_width).into());
    }
    let params = EvalParams { radius: m.radius, ideal_angle, strip_width, orientation: m.orientation.into() };
    Ok((params, kinds))
}

fn check_threads(t: usize) -> Outcome<Executor> {
    let config = ExecConfig::new(t).map_err(|e| Failure::Usage(e.to_string()))?;
    Executor::new(config).map_err(|e| Failure::Invariant(e.to_string()))
}

fn check_generator(extent: f64, iterations: usize) -> Outcome<()> {
    if !(extent.is_finite() && extent > 0.0) {
        return Err(Failure::Usage(format!("extent must be finite and positive, got {extent}")));
    }
    if iterations == 0 {
        return Err(Failure::Usage("iterations must be at least 1".to_string()));
    }
    Ok(())
}

fn generate(edges: &EdgeList, kind: Generator, extent: f64, iterations: usize, seed: u64) -> Outcome<LayoutGraph> {
    Ok(match kind {
        Generator::Random => graphio::random_layout(edges, extent, seed)?,
        Generator::Fr => graphio::fr_layout(edges, iterations, extent, seed)?,
    })
}

fn load(input: &InputArgs) -> Outcome<(LayoutGraph, IngestStats)> {
    check_generator(input.extent, input.iterations)?;
    if input.layout.is_none() && input.generate.is_none() {
        return Err(Failure::Usage("a layout is required: pass --layout or --generate".to_string()));
    }
    let edges = graphio::read_edgelist(&input.edges)?;
    info!("read {} edges over {} vertices", edges.edges.len(), edges.vertices.len());
    let g = match (&input.layout, input.generate) {
        (Some(path), _) => graphio::assemble(graphio::read_layout(path)?, &edges)
            .map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?,
        (None, Some(kind)) => generate(&edges, kind, input.extent, input.iterations, input.seed)?,
        (None, None) => unreachable!(),
    };
    Ok((g, edges.stats))
}

fn emit(out: &OutputArgs, text: &str) -> Outcome<()> {
    match &out.output {
        Some(path) => fs::write(path, text).map_err(|e| Failure::Input(format!("{}: {e}", path.display()))),
        None => {
            io::stdout().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

fn csv_text<R: Serialize>(rows: &[R]) -> Outcome<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in rows {
        w.serialize(row).map_err(|e| Failure::Invariant(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| Failure::Invariant(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
}

fn json_text<R: Serialize + ?Sized>(value: &R) -> Outcome<String> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| Failure::Invariant(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

/// Internal consistency checks on a finished report.
fn check_report(r: &ReadabilityReport) -> Outcome<()> {
    if let Some(field) = r.first_non_finite() {
        return Err(Failure::Invariant(format!("{field} is not finite")));
    }
    let m = &r.metrics;
    if m.edge_length_variation.is_some_and(|v| v < 0.0) {
        return Err(Failure::Invariant("edge_length_variation is negative".to_string()));
    }
    if m.edge_crossing_angle.is_some_and(|v| !(0.0..=1.0).contains(&v)) {
        return Err(Failure::Invariant("edge_crossing_angle lies outside [0, 1]".to_string()));
    }
    Ok(())
}

/// A metric value that keeps counts integral in CSV and JSON rows.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(untagged)]
enum Value {
    Count(u64),
    Real(f64),
}

fn metric_value(m: &MetricValues, kind: MetricKind) -> Option<Value> {
    match kind {
        MetricKind::NodeOcclusion => m.node_occlusion.map(Value::Count),
        MetricKind::EdgeCrossing => m.edge_crossing.map(Value::Count),
        _ => m.get(kind).map(Value::Real),
    }
}

#[derive(Serialize)]
struct EvalRow {
    metric: &'static str,
    value: Value,
    seconds: f64,
}

fn cmd_eval(a: &EvalArgs) -> Outcome<()> {
    let (params, kinds) = eval_params(&a.metric)?;
    let ex = check_threads(a.threads)?;
    let (g, stats) = load(&a.input)?;
    let report = evaluate(&g, stats, a.mode.into(), &params, &kinds, &ex)?;
    check_report(&report)?;
    for w in &report.warnings {
        warn!("{w}");
    }
    let text = match a.out.format {
        Format::Json => graphio::report_to_json(&report)? + "\n",
        Format::Csv => {
            let rows: Vec<EvalRow> = MetricKind::ALL
                .into_iter()
                .filter_map(|k| {
                    Some(EvalRow {
                        metric: k.short_name(),
                        value: metric_value(&report.metrics, k)?,
                        seconds: report.elapsed.get(k).unwrap_or(0.0),
                    })
                })
                .collect();
            csv_text(&rows)?
        }
    };
    emit(&a.out, &text)
}

fn cmd_gen(a: &GenArgs) -> Outcome<()> {
    check_generator(a.extent, a.iterations)?;
    let edges = graphio::read_edgelist(&a.edges)?;
    let g = generate(&edges, a.kind, a.extent, a.iterations, a.seed)?;
    match &a.output {
        Some(path) => graphio::write_layout_file(path, &g)?,
        None => graphio::write_layout(io::stdout().lock(), &g)?,
    }
    info!("wrote positions for {} vertices", g.vertex_count());
    Ok(())
}

#[derive(Serialize)]
struct CompareRow {
    metric: &'static str,
    oracle: Value,
    enhanced: Value,
    pct_error: f64,
}

/// `|enhanced - oracle| / oracle * 100`; zero when both are zero and
/// infinite when only the oracle is.
fn pct_error(enhanced: f64, oracle: f64) -> f64 {
    if oracle == 0.0 {
        if enhanced == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        (enhanced - oracle).abs() / oracle.abs() * 100.0
    }
}

fn cmd_compare(a: &CompareArgs) -> Outcome<()> {
    let (params, kinds) = eval_params(&a.metric)?;
    let ex = check_threads(a.threads)?;
    let (g, stats) = load(&a.input)?;
    let truth = evaluate(&g, stats, Mode::Oracle, &params, &kinds, &ex)?;
    let approx = evaluate(&g, stats, Mode::Enhanced, &params, &kinds, &ex)?;
    let mut rows = Vec::new();
    for k in MetricKind::ALL.into_iter().filter(|k| kinds.contains(k)) {
        let (o, e) = (truth.metrics.get(k).unwrap_or(0.0), approx.metrics.get(k).unwrap_or(0.0));
        let err = pct_error(e, o);
        if err.is_infinite() {
            warn!("{k}: oracle is 0 but enhanced is {e}");
        }
        let (oracle, enhanced) = (
            metric_value(&truth.metrics, k).unwrap_or(Value::Real(0.0)),
            metric_value(&approx.metrics, k).unwrap_or(Value::Real(0.0)),
        );
        rows.push(CompareRow { metric: k.short_name(), oracle, enhanced, pct_error: err });
    }
    let text = match a.out.format {
        Format::Csv => csv_text(&rows)?,
        Format::Json => json_text(&rows)?,
    };
    emit(&a.out, &text)?;
    if approx.metrics.node_occlusion != truth.metrics.node_occlusion {
        return Err(Failure::Invariant("grid node occlusion differs from the oracle".to_string()));
    }
    if let (Some(e), Some(o)) = (approx.metrics.edge_crossing, truth.metrics.edge_crossing) {
        if params.orientation != StripOrientation::Both && e > o {
            return Err(Failure::Invariant(format!("strip crossing count {e} exceeds the exact count {o}")));
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct BenchRow {
    threads: usize,
    metric: &'static str,
    value: Value,
    seconds: f64,
    speedup: f64,
}

fn cmd_bench(a: &BenchArgs) -> Outcome<()> {
    let (params, kinds) = eval_params(&a.metric)?;
    let list = &a.threads_list;
    if list.is_empty() || list.contains(&0) || list.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Failure::Usage("--threads-list must be nonempty, positive and strictly ascending".to_string()));
    }
    if a.repeat == 0 {
        return Err(Failure::Usage("--repeat must be at least 1".to_string()));
    }
    let mode: Mode = a.mode.into();
    let (g, _) = load(&a.input)?;
    let mut rows: Vec<BenchRow> = Vec::new();
    let mut baseline: Vec<f64> = Vec::new();
    let mut reference: Option<ReadabilityReport> = None;
    for &threads in list {
        let ex = check_threads(threads)?;
        let mut best: Option<ReadabilityReport> = None;
        for _ in 0..a.repeat {
            let r = evaluate(&g, Default::default(), mode, &params, &kinds, &ex)?;
            best = Some(match best {
                Some(b) if total_seconds(&b) <= total_seconds(&r) => b,
                _ => r,
            });
        }
        let report = best.expect("repeat >= 1");
        check_report(&report)?;
        if let Some(first) = &reference {
            if first.metrics != report.metrics {
                return Err(Failure::Invariant(format!("metric values changed at {threads} threads")));
            }
        }
        for (i, k) in MetricKind::ALL.into_iter().filter(|k| kinds.contains(k)).enumerate() {
            let seconds = report.elapsed.get(k).unwrap_or(0.0);
            if baseline.len() <= i {
                baseline.push(seconds);
            }
            let speedup = if mode == Mode::Oracle || seconds == 0.0 { 1.0 } else { baseline[i] / seconds };
            rows.push(BenchRow {
                threads,
                metric: k.short_name(),
                value: metric_value(&report.metrics, k).unwrap_or(Value::Real(0.0)),
                seconds,
                speedup,
            });
            info!("{threads} thread(s) {k}: {seconds:.4}s");
        }
        reference.get_or_insert(report);
    }
    let text = match a.out.format {
        Format::Csv => csv_text(&rows)?,
        Format::Json => json_text(&rows)?,
    };
    emit(&a.out, &text)
}

fn total_seconds(r: &ReadabilityReport) -> f64 {
    MetricKind::ALL.into_iter().filter_map(|k| r.elapsed.get(k)).sum()
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .target(env_logger::Target::Stderr)
        .init();
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Eval(a) => cmd_eval(a),
        Command::Gen(a) => cmd_gen(a),
        Command::Compare(a) => cmd_compare(a),
        Command::Bench(a) => cmd_bench(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Input(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(3)
        }
        Err(Failure::Invariant(m)) => {
            eprintln!("internal error: {m}");
            ExitCode::from(4)
        }
    }
}
