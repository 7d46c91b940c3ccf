// SPDX-License-Identifier: Apache-2.0

//! `contact`: build trajectory indexes, query them and benchmark them.

mod workload;

use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;
use std::time::Instant;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use contact::ingest::{self, NormalizeConfig, RawRecord};
use contact::oracle::{oracle_interval, oracle_slice, PositionTable};
use contact::{ContactIndex, Dataset, Error, Extent, IndexConfig, Rect};

use workload::{Class, Query, Workload};

#[derive(Parser)]
#[command(name = "contact", version, about = "Compressed index for fixed-rate trajectories")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build an index file from raw samples.
    Build(BuildArgs),
    /// Answer one object, trajectory, time-slice or time-interval query.
    Query(QueryArgs),
    /// Time the six query classes on seeded random workloads; writes CSV.
    Bench(BenchArgs),
    /// Print index parameters and sizes.
    Stats(IndexArg),
    /// Build in memory and compare random queries against a brute-force scan.
    OracleCheck(CheckArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Bin,
}

#[derive(Args)]
struct InputArgs {
    /// Sample file, or `-` for standard input.
    #[arg(long)]
    input: PathBuf,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Grid size as WIDTHxHEIGHT; defaults to the smallest grid holding
    /// every sample.
    #[arg(long)]
    extent: Option<ExtentArg>,
    /// Sort, deduplicate, drop samples faster than --max-speed and
    /// interpolate gaps shorter than --max-gap before indexing.
    #[arg(long)]
    clean: bool,
    #[arg(long, default_value_t = ingest::DEFAULT_MAX_SPEED, requires = "clean")]
    max_speed: u64,
    #[arg(long, default_value_t = ingest::DEFAULT_MAX_GAP, requires = "clean")]
    max_gap: u32,
}

#[derive(Args)]
struct IndexParams {
    /// Snapshot distance in instants.
    #[arg(long, default_value_t = 120)]
    period: u32,
    /// Data instants per MBR tree leaf.
    #[arg(long, default_value_t = 80)]
    leaf_size: u32,
}

#[derive(Args)]
struct BuildArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    params: IndexParams,
    #[arg(long)]
    output: PathBuf,
}

#[derive(Args)]
struct IndexArg {
    /// Index file written by `build`.
    #[arg(long)]
    input: PathBuf,
}

#[derive(Args)]
struct QueryArgs {
    #[command(flatten)]
    index: IndexArg,
    /// Object id; gives an object query, or a trajectory query with --to.
    #[arg(long, conflicts_with = "region", required_unless_present = "region")]
    object: Option<u32>,
    /// Rectangle X1,Y1,X2,Y2 (inclusive corners); gives a time-slice
    /// query, or a time-interval query with --to.
    #[arg(long)]
    region: Option<RectArg>,
    /// Query instant, or start of the interval.
    #[arg(long)]
    from: u32,
    /// End of the interval, inclusive.
    #[arg(long)]
    to: Option<u32>,
}

#[derive(Args)]
struct BenchArgs {
    #[command(flatten)]
    index: IndexArg,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Run each class across this many threads and report throughput
    /// instead of single-thread latency.
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
    threads: Option<u32>,
    /// CSV destination; standard output when absent.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct CheckArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    params: IndexParams,
    /// Random queries per class.
    #[arg(long, default_value_t = 200)]
    queries: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

#[derive(Clone, Copy, Debug)]
struct ExtentArg(Extent);

impl FromStr for ExtentArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let (w, h) = s.split_once(['x', 'X']).ok_or_else(|| format!("expected WIDTHxHEIGHT, got {s:?}"))?;
        let parse = |v: &str| v.trim().parse::<u32>().map_err(|e| format!("{v:?}: {e}"));
        let (w, h) = (parse(w)?, parse(h)?);
        if w == 0 || h == 0 {
            return Err("grid sides must be positive".into());
        }
        Ok(ExtentArg(Extent::new(w, h)))
    }
}

#[derive(Clone, Copy, Debug)]
struct RectArg(Rect);

impl FromStr for RectArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let v: Vec<u32> = s
            .split(',')
            .map(|f| f.trim().parse::<u32>().map_err(|e| format!("{f:?}: {e}")))
            .collect::<Result<_, _>>()?;
        let [x1, y1, x2, y2] = v[..] else {
            return Err(format!("expected X1,Y1,X2,Y2, got {s:?}"));
        };
        Rect::checked(x1, x2, y1, y2).map(RectArg).map_err(|e| e.to_string())
    }
}

/// How a command failed; decides the exit code.
enum Failure {
    Usage(anyhow::Error),
    Data(anyhow::Error),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Data(e)
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Data(e.into())
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Data(e.into())
    }
}

type Outcome = Result<(), Failure>;

/// Errors caused by the query itself rather than the data.
fn query_error(e: Error) -> Failure {
    match e {
        Error::OutOfBounds { .. } | Error::UnknownObject(_) | Error::InvalidArgument(_) => Failure::Usage(e.into()),
        e => Failure::Data(e.into()),
    }
}

fn read_records(args: &InputArgs) -> anyhow::Result<Vec<RawRecord>> {
    let input: Box<dyn Read> = if args.input == Path::new("-") {
        Box::new(io::stdin().lock())
    } else {
        Box::new(File::open(&args.input).with_context(|| format!("opening {}", args.input.display()))?)
    };
    let mut input = BufReader::new(input);
    let records = match args.format {
        Format::Csv => ingest::parse_csv(&mut input as &mut dyn BufRead)?,
        Format::Bin => ingest::parse_binary(input)?,
    };
    Ok(records)
}

fn load_dataset(args: &InputArgs) -> anyhow::Result<Dataset> {
    let records = read_records(args).with_context(|| format!("reading {}", args.input.display()))?;
    let extent = match args.extent {
        Some(ExtentArg(e)) => e,
        None => {
            let w = records.iter().map(|r| r.x).max().map_or(1, |x| x + 1);
            let h = records.iter().map(|r| r.y).max().map_or(1, |y| y + 1);
            Extent::new(w, h)
        }
    };
    let records = if args.clean {
        let config = NormalizeConfig { max_speed: args.max_speed, max_gap: args.max_gap, extent };
        ingest::normalize(records, &config)?
    } else {
        records
    };
    Ok(Dataset::from_unsorted(extent, records)?)
}

fn config(params: &IndexParams) -> Result<IndexConfig, Failure> {
    if params.period < 2 {
        return Err(Failure::Usage(anyhow!("--period must be at least 2")));
    }
    if params.leaf_size == 0 {
        return Err(Failure::Usage(anyhow!("--leaf-size must be positive")));
    }
    Ok(IndexConfig::new(params.period, params.leaf_size))
}

fn load_index(path: &Path) -> anyhow::Result<ContactIndex> {
    ContactIndex::load(path).with_context(|| format!("loading index {}", path.display()))
}

fn print_sizes(out: &mut impl Write, ix: &ContactIndex) -> io::Result<()> {
    let s = ix.size_breakdown();
    let base = ix.baseline_bytes();
    writeln!(out, "snapshots_bytes={}", s.snapshots)?;
    writeln!(out, "logs_bytes={}", s.logs)?;
    writeln!(out, "trees_bytes={}", s.trees)?;
    writeln!(out, "tables_bytes={}", s.tables)?;
    writeln!(out, "total_bytes={}", s.total())?;
    writeln!(out, "baseline_bytes={base}")?;
    let ratio = if base == 0 { 0.0 } else { 100.0 * s.total() as f64 / base as f64 };
    writeln!(out, "compression={ratio:.2}%")
}

fn build(args: &BuildArgs) -> Outcome {
    let config = config(&args.params)?;
    let data = load_dataset(&args.input)?;
    let ix = ContactIndex::build(&data, &config).context("building index")?;
    ix.save(&args.output).with_context(|| format!("writing {}", args.output.display()))?;
    let mut out = io::stdout().lock();
    writeln!(out, "objects={} samples={} snapshots={}", ix.ids().len(), ix.sample_count(), ix.snapshots().len())?;
    print_sizes(&mut out, &ix)?;
    Ok(())
}

fn stats(args: &IndexArg) -> Outcome {
    let ix = load_index(&args.input)?;
    let mut out = io::stdout().lock();
    let e = ix.extent();
    writeln!(out, "grid={}x{}", e.width, e.height)?;
    writeln!(out, "period={}", ix.period())?;
    writeln!(out, "leaf_size={}", ix.leaf_capacity())?;
    writeln!(out, "horizon={}", ix.horizon())?;
    writeln!(out, "max_speed={}", ix.max_speed())?;
    writeln!(out, "objects={}", ix.ids().len())?;
    writeln!(out, "samples={}", ix.sample_count())?;
    writeln!(out, "snapshots={}", ix.snapshots().len())?;
    writeln!(out, "logs={}", ix.log_entries().count())?;
    print_sizes(&mut out, &ix)?;
    Ok(())
}

fn query(args: &QueryArgs) -> Outcome {
    let ix = load_index(&args.index.input)?;
    let mut out = BufWriter::new(io::stdout().lock());
    match (args.object, args.region, args.to) {
        (Some(id), _, None) => {
            if let Some((x, y)) = ix.object_position(id, args.from).map_err(query_error)? {
                writeln!(out, "x={x} y={y}")?;
            }
        }
        (Some(id), _, Some(to)) => {
            for s in ix.trajectory(id, args.from, to).map_err(query_error)? {
                writeln!(out, "t={} x={} y={}", s.instant, s.x, s.y)?;
            }
        }
        (None, Some(RectArg(r)), None) => {
            for (id, x, y) in ix.time_slice(&r, args.from).map_err(query_error)? {
                writeln!(out, "object={id} x={x} y={y}")?;
            }
        }
        (None, Some(RectArg(r)), Some(to)) => {
            for id in ix.time_interval(&r, args.from, to).map_err(query_error)? {
                writeln!(out, "object={id}")?;
            }
        }
        (None, None, _) => unreachable!("clap requires --object or --region"),
    }
    out.flush()?;
    Ok(())
}

/// Runs `q` and returns a value derived from the answer, so the work
/// cannot be optimized away.
fn run(ix: &ContactIndex, q: &Query) -> contact::Result<u64> {
    Ok(match *q {
        Query::Object { id, q } => ix.object_position(id, q)?.map_or(0, |(x, y)| x as u64 + y as u64),
        Query::Trajectory { id, b, e } => ix.trajectory(id, b, e)?.len() as u64,
        Query::Slice { r, q } => ix.time_slice(&r, q)?.len() as u64,
        Query::Interval { r, b, e } => ix.time_interval(&r, b, e)?.len() as u64,
    })
}

/// Mean wall time per query in microseconds.
fn time_class(ix: &ContactIndex, queries: &[Query], threads: u32) -> contact::Result<f64> {
    let start = Instant::now();
    if threads <= 1 {
        let mut acc = 0u64;
        for q in queries {
            acc = acc.wrapping_add(run(ix, std::hint::black_box(q))?);
        }
        std::hint::black_box(acc);
    } else {
        let chunk = queries.len().div_ceil(threads as usize);
        std::thread::scope(|scope| {
            let workers: Vec<_> = queries
                .chunks(chunk)
                .map(|part| {
                    scope.spawn(move || part.iter().try_fold(0u64, |acc, q| run(ix, q).map(|v| acc.wrapping_add(v))))
                })
                .collect();
            for w in workers {
                std::hint::black_box(w.join().expect("bench worker panicked")?);
            }
            Ok::<_, Error>(())
        })?;
    }
    Ok(start.elapsed().as_secs_f64() * 1e6 / queries.len() as f64)
}

fn bench(args: &BenchArgs) -> Outcome {
    let ix = load_index(&args.index.input)?;
    if ix.ids().is_empty() {
        return Err(Failure::Data(anyhow!("index holds no objects")));
    }
    let threads = args.threads.unwrap_or(1);
    let mut out: Box<dyn Write> = match &args.output {
        Some(p) => Box::new(BufWriter::new(File::create(p).with_context(|| format!("creating {}", p.display()))?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    };
    writeln!(out, "query,period,leaf_size,threads,queries,mean_us,space_bytes")?;
    let space = ix.size_in_bytes();
    for class in Class::ALL {
        let queries = Workload::new(ix.ids(), ix.extent(), ix.horizon(), args.seed, class).take(class, class.count());
        let mean = time_class(&ix, &queries, threads).map_err(|e| Failure::Data(e.into()))?;
        writeln!(
            out,
            "{},{},{},{threads},{},{mean:.3},{space}",
            class.name(),
            ix.period(),
            ix.leaf_capacity(),
            queries.len()
        )?;
    }
    out.flush()?;
    Ok(())
}

fn oracle_check(args: &CheckArgs) -> Outcome {
    let config = config(&args.params)?;
    let data = load_dataset(&args.input)?;
    let ix = ContactIndex::build(&data, &config).context("building index")?;
    if ix.ids().is_empty() {
        println!("no objects; nothing to check");
        return Ok(());
    }
    let table = PositionTable::new(data.records(), ix.horizon())?;
    let mut failed = 0usize;
    for class in Class::ALL {
        let queries = Workload::new(ix.ids(), ix.extent(), ix.horizon(), args.seed, class).take(class, args.queries);
        let mut mismatches = 0usize;
        for q in &queries {
            let same = match *q {
                Query::Object { id, q } => ix.object_position(id, q)? == table.position(id, q),
                Query::Trajectory { id, b, e } => {
                    let got: Vec<_> = ix.trajectory(id, b, e)?.iter().map(|s| (s.instant, s.x, s.y)).collect();
                    got == table.trajectory(id, b, e)
                }
                Query::Slice { r, q } => ix.time_slice(&r, q)? == oracle_slice(&table, &r, q),
                Query::Interval { r, b, e } => ix.time_interval(&r, b, e)? == oracle_interval(&table, &r, b, e),
            };
            if !same {
                mismatches += 1;
                if mismatches == 1 {
                    eprintln!("first {} mismatch: {q:?}", class.name());
                }
            }
        }
        println!("{} queries={} mismatches={mismatches}", class.name(), queries.len());
        failed += mismatches;
    }
    if failed > 0 {
        return Err(Failure::Data(anyhow!("{failed} answers differ from the brute-force scan")));
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match &cli.command {
        Command::Build(a) => build(a),
        Command::Query(a) => query(a),
        Command::Bench(a) => bench(a),
        Command::Stats(a) => stats(a),
        Command::OracleCheck(a) => oracle_check(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
        Err(Failure::Data(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
