//! `hindiv`: network diversity measures from the command line.
//!
//! Exit codes: 0 success, 1 invalid data or failed computation, 2 usage error, 3 I/O error.

use std::fs::File;
use std::io::{self, BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use hindiv::io::histogram::{histogram, write_histogram_to, BinSpec};
use hindiv::io::report::{format_value, read_reports, write_records, ReportFormat, ReportRecord};
use hindiv::io::{load_network, parse_metapath_expr, LoadedNetwork};
use hindiv::netdiv::{Endpoint, MeasureKind, NetworkDiversity, SinkPolicy, Start};
use hindiv::walk::{conditional_distribution, propagate, MetaPath, VertexDistribution};
use hindiv::{AlphaOrder, Distribution, Error, VertexId, VertexTypeId};

#[derive(Parser)]
#[command(name = "hindiv", version, about = "True-diversity measures along meta paths of heterogeneous information networks")]
struct Cli {
    /// Worker threads for parallel work (defaults to the number of cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check that the schema and edge files form a well-formed network.
    Validate(NetworkArgs),
    /// Print vertex types and edge types.
    Schema(NetworkArgs),
    /// Print the distribution reached by a walk along a meta path.
    Walk(WalkArgs),
    /// Compute one diversity measure for one or more orders.
    Diversity(DiversityArgs),
    /// Compute a per-vertex measure for every vertex of its endpoint type.
    Sweep(SweepArgs),
    /// Bin the values of a report file.
    Histogram(HistogramArgs),
}

#[derive(Args)]
struct NetworkArgs {
    /// Schema file (JSON).
    #[arg(long)]
    schema: PathBuf,
    /// Edge file (CSV with header edge_type,src,dst[,multiplicity]); repeatable.
    #[arg(long = "edges")]
    edges: Vec<PathBuf>,
    /// Do not add sink vertices.
    #[arg(long)]
    no_sinks: bool,
}

#[derive(Args)]
struct WalkArgs {
    #[command(flatten)]
    network: NetworkArgs,
    /// Meta path, e.g. `users -chosen-> items -types-> tags`.
    #[arg(long)]
    metapath: String,
    /// Start distribution: `uniform`, `uniform:<file of names>` or `dist:<file of name,weight>`.
    #[arg(long, default_value = "uniform", conflicts_with = "vertex")]
    start: String,
    /// Start the walk at this vertex instead.
    #[arg(long)]
    vertex: Option<String>,
    /// List the sink vertex among the entries.
    #[arg(long)]
    include_sinks: bool,
}

#[derive(Args)]
struct MeasureArgs {
    #[command(flatten)]
    network: NetworkArgs,
    #[arg(long)]
    metapath: String,
    /// Measure name, e.g. collective, individual, mean-individual, backward-posterior.
    #[arg(long, value_parser = parse_measure)]
    measure: MeasureKind,
    /// Order: 0, 1, 2, inf or any non-negative number; repeatable.
    #[arg(long = "alpha", value_parser = parse_alpha, default_value = "1")]
    alphas: Vec<AlphaOrder>,
    #[arg(long, default_value = "uniform")]
    start: String,
    /// Comparison meta path of relative collective diversity.
    #[arg(long)]
    baseline_metapath: Option<String>,
    /// Start distribution of the comparison walk.
    #[arg(long, default_value = "uniform")]
    baseline_start: String,
    /// Count the sink vertex as a type.
    #[arg(long)]
    include_sinks: bool,
    /// Output file (defaults to stdout).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Jsonl)]
    format: Format,
}

#[derive(Args)]
struct DiversityArgs {
    #[command(flatten)]
    measure: MeasureArgs,
    /// Conditioning vertex of single-vertex measures.
    #[arg(long)]
    vertex: Option<String>,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    measure: MeasureArgs,
}

#[derive(Args)]
struct HistogramArgs {
    /// Report file (JSON lines or CSV).
    #[arg(long)]
    input: PathBuf,
    /// Logarithmic bins per decade.
    #[arg(long, default_value_t = 20, conflicts_with = "linear")]
    bins_per_decade: u32,
    /// Use this many equal-width bins instead.
    #[arg(long)]
    linear: Option<u32>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Jsonl,
    Csv,
}

impl From<Format> for ReportFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::Jsonl => ReportFormat::JsonLines,
            Format::Csv => ReportFormat::Csv,
        }
    }
}

fn parse_alpha(s: &str) -> Result<AlphaOrder, Error> {
    s.parse()
}

fn parse_measure(s: &str) -> Result<MeasureKind, Error> {
    match s {
        "backward" => Ok(MeasureKind::BackwardPosterior),
        "mean-backward" | "mean_backward" => Ok(MeasureKind::MeanBackwardPosterior),
        other => other.parse(),
    }
}

/// A failure with its exit code.
struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure {
            code: if e.is_io() { 3 } else { 1 },
            message: e.to_string(),
        }
    }
}

fn usage(message: impl Into<String>) -> Failure {
    Failure {
        code: 2,
        message: message.into(),
    }
}

fn io_failure(path: Option<&Path>, e: io::Error) -> Failure {
    let message = match path {
        Some(p) => format!("{}: {e}", p.display()),
        None => e.to_string(),
    };
    Failure { code: 3, message }
}

type CliResult<T = ()> = Result<T, Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    let result = match cli.command {
        Command::Validate(a) => cmd_validate(&a),
        Command::Schema(a) => cmd_schema(&a),
        Command::Walk(a) => cmd_walk(&a),
        Command::Diversity(a) => cmd_diversity(&a),
        Command::Sweep(a) => cmd_sweep(&a),
        Command::Histogram(a) => cmd_histogram(&a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn load(args: &NetworkArgs) -> CliResult<LoadedNetwork> {
    Ok(load_network(&args.schema, &args.edges, !args.no_sinks)?)
}

/// Runs `write` against the `--out` file or stdout.
fn with_output(out: Option<&Path>, write: impl FnOnce(&mut dyn Write) -> io::Result<()>) -> CliResult {
    match out {
        Some(path) => {
            let mut file = File::create(path).map_err(|e| io_failure(Some(path), e))?;
            write(&mut file).map_err(|e| io_failure(Some(path), e))
        }
        None => {
            let stdout = io::stdout();
            let mut lock = stdout.lock();
            write(&mut lock).map_err(|e| io_failure(None, e))
        }
    }
}

fn cmd_validate(args: &NetworkArgs) -> CliResult {
    let net = load(args)?;
    net.hin.check_invariants()?;
    let hin = &net.hin;
    let vertices: u64 = hin
        .vertex_types()
        .iter()
        .enumerate()
        .map(|(t, _)| hin.real_cardinality(VertexTypeId(t as u32)) as u64)
        .sum();
    let edges: u64 = hin
        .edge_types()
        .iter()
        .map(|e| hin.table(e.id).total())
        .sum();
    println!(
        "ok: {} vertex types, {} edge types, {vertices} vertices, {edges} edges{}",
        hin.vertex_types().len(),
        hin.edge_types().len(),
        if hin.is_augmented() { " (sinks included)" } else { "" }
    );
    Ok(())
}

fn cmd_schema(args: &NetworkArgs) -> CliResult {
    let net = load(args)?;
    print!("{}", net.hin.schema());
    Ok(())
}

/// Parses a `--start` value for walks starting in `ty`.
fn parse_start(spec: &str, net: &LoadedNetwork, ty: VertexTypeId) -> CliResult<Start> {
    if spec == "uniform" {
        return Ok(Start::Uniform);
    }
    let (kind, path) = spec
        .split_once(':')
        .ok_or_else(|| usage(format!("invalid start `{spec}`: use uniform, uniform:<file> or dist:<file>")))?;
    let path = Path::new(path);
    let lines = read_lines(path)?;
    match kind {
        "uniform" => {
            let indices = lines
                .iter()
                .map(|(_, name)| Ok(net.vertex(ty, name)?.index))
                .collect::<CliResult<Vec<u32>>>()?;
            Ok(Start::UniformSubset(indices))
        }
        "dist" => {
            let mut weights = vec![0.0; net.hin.cardinality(ty) as usize];
            for (line, text) in &lines {
                let (name, weight) = text
                    .rsplit_once(|c: char| c == ',' || c.is_whitespace())
                    .ok_or_else(|| Failure::from(Error::Parse {
                        context: path.display().to_string(),
                        line: *line,
                        message: "expected `name,weight`".into(),
                    }))?;
                let w: f64 = weight.trim().parse().map_err(|_| {
                    Failure::from(Error::Parse {
                        context: path.display().to_string(),
                        line: *line,
                        message: format!("weight `{}` is not a number", weight.trim()),
                    })
                })?;
                weights[net.vertex(ty, name.trim())?.index as usize] += w;
            }
            let dist = Distribution::normalize(weights)?;
            Ok(Start::Explicit(VertexDistribution::from_distribution(&net.hin, ty, dist)?))
        }
        _ => Err(usage(format!("invalid start `{spec}`: use uniform, uniform:<file> or dist:<file>"))),
    }
}

/// Non-empty, non-comment lines with their line numbers.
fn read_lines(path: &Path) -> CliResult<Vec<(u64, String)>> {
    let file = File::open(path).map_err(|e| io_failure(Some(path), e))?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| io_failure(Some(path), e))?;
        let trimmed = line.trim();
        if !trimmed.is_empty() && !trimmed.starts_with('#') {
            out.push((i as u64 + 1, trimmed.to_string()));
        }
    }
    Ok(out)
}

fn cmd_walk(args: &WalkArgs) -> CliResult {
    let net = load(&args.network)?;
    let hin = &net.hin;
    let path = parse_metapath_expr(hin, &args.metapath)?;
    let dist = match &args.vertex {
        Some(name) => conditional_distribution(hin, &path, net.vertex(path.source(), name)?)?,
        None => {
            let start = parse_start(&args.start, &net, path.source())?.resolve(hin, path.source())?;
            propagate(hin, &path, &start)?
        }
    };
    let ty = path.target();
    let sink = hin.sink(ty);
    let mut entries: Vec<(u32, f64)> = dist
        .nonzero()
        .filter(|e| args.include_sinks || Some(e.0) != sink)
        .collect();
    entries.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    let sink_mass = dist.sink_mass(hin);
    with_output(None, |out| {
        for (i, p) in &entries {
            writeln!(out, "{} {}", net.vertex_name(VertexId::new(ty, *i)), format_value(*p))?;
        }
        writeln!(out, "sink_mass {}", format_value(sink_mass))
    })
}

struct Prepared {
    net: LoadedNetwork,
    path: MetaPath,
    start: Start,
}

fn prepare(args: &MeasureArgs) -> CliResult<Prepared> {
    let net = load(&args.network)?;
    let path = parse_metapath_expr(&net.hin, &args.metapath)?;
    let start = parse_start(&args.start, &net, path.source())?;
    Ok(Prepared { net, path, start })
}

fn engine<'h>(p: &'h Prepared, args: &MeasureArgs) -> NetworkDiversity<'h> {
    let policy = if args.include_sinks {
        SinkPolicy::Include
    } else {
        SinkPolicy::Exclude
    };
    NetworkDiversity::new(&p.net.hin).with_sink_policy(policy)
}

fn emit(p: &Prepared, args: &MeasureArgs, reports: &[hindiv::DiversityReport]) -> CliResult {
    let records: Vec<ReportRecord> = reports
        .iter()
        .map(|r| ReportRecord::from_report(r, &p.net))
        .collect();
    with_output(args.out.as_deref(), |out| write_records(out, &records, args.format.into()))
}

fn cmd_diversity(args: &DiversityArgs) -> CliResult {
    let m = &args.measure;
    let kind = m.measure;
    match (kind.requires_vertex(), &args.vertex) {
        (true, None) => return Err(usage(format!("--measure {kind} requires --vertex"))),
        (false, Some(_)) => return Err(usage(format!("--measure {kind} does not take --vertex"))),
        _ => {}
    }
    if kind == MeasureKind::RelativeCollective && m.baseline_metapath.is_none() {
        return Err(usage("--measure relative-collective requires --baseline-metapath"));
    }
    let p = prepare(m)?;
    let nd = engine(&p, m);
    let reports = if kind == MeasureKind::RelativeCollective {
        let baseline = parse_metapath_expr(&p.net.hin, m.baseline_metapath.as_deref().unwrap())?;
        let baseline_start = parse_start(&m.baseline_start, &p.net, baseline.source())?;
        nd.relative_collective(&p.path, &p.start, &baseline, &baseline_start, &m.alphas)?
    } else {
        let vertex = match (&args.vertex, kind.conditioning_endpoint()) {
            (Some(name), Some(end)) => {
                let ty = match end {
                    Endpoint::Source => p.path.source(),
                    Endpoint::Target => p.path.target(),
                };
                Some(p.net.vertex(ty, name)?)
            }
            _ => None,
        };
        nd.measure(kind, &p.path, vertex, &p.start, &m.alphas)?
    };
    emit(&p, m, &reports)
}

fn cmd_sweep(args: &SweepArgs) -> CliResult {
    let m = &args.measure;
    if !m.measure.requires_vertex() {
        return Err(usage(format!("--measure {} is not a per-vertex measure", m.measure)));
    }
    let p = prepare(m)?;
    let reports = engine(&p, m).sweep(m.measure, &p.path, &p.start, &m.alphas, m.include_sinks)?;
    emit(&p, m, &reports)
}

fn cmd_histogram(args: &HistogramArgs) -> CliResult {
    let records = read_reports(&args.input)?;
    let values: Vec<f64> = records.iter().map(|r| r.value).collect();
    let spec = match args.linear {
        Some(bins) => BinSpec::Linear { bins },
        None => BinSpec::Log {
            per_decade: args.bins_per_decade,
        },
    };
    let bins = histogram(&values, spec)?;
    with_output(args.out.as_deref(), |out| write_histogram_to(out, &bins))
}
