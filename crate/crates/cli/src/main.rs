use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Duration;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use log::warn;
use tempfile::NamedTempFile;

use bibcheck::net::stub::FixtureFetcher;
use bibcheck::net::{Fetcher, HttpFetcher, NetChecker};
use bibcheck::reader::{open_reader, InputFormat, ReaderDiagnostics, ReaderOptions};
use bibcheck::report::{
    aggregate_csv, build_uniqueness_index, validate_stream, Aggregator, CsvReportWriter, UniquenessIndex, Validator,
};
use bibcheck::schema::{compile, parse_schema, CompiledSchema, SchemaSyntax};
use bibcheck::value::SourceFormat;

/// Validate bibliographic records against a declarative rule schema.
#[derive(Parser)]
#[command(name = "bibcheck", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse and compile a schema, then print a summary.
    CheckConfig {
        /// Schema file (`.json` for JSON, anything else for YAML).
        schema: PathBuf,
    },
    /// Validate records and write the CSV report.
    Validate(Box<ValidateArgs>),
    /// Recompute aggregate statistics from a CSV report.
    Aggregate(AggregateArgs),
}

#[derive(Args)]
struct ValidateArgs {
    /// Input files, read in the order given.
    #[arg(long, required = true, num_args = 1..)]
    input: Vec<PathBuf>,
    /// iso2709, alephseq, picaplain, picanorm, csv or jsonl. Defaults to csv
    /// or jsonl for CSV and JSON schemas.
    #[arg(long)]
    format: Option<InputFormat>,
    #[arg(long)]
    schema: PathBuf,
    /// CSV report path.
    #[arg(long)]
    output: PathBuf,
    /// Also write aggregate statistics as JSON.
    #[arg(long)]
    aggregate_out: Option<PathBuf>,
    /// CSV column holding the record id.
    #[arg(long)]
    id_column: Option<String>,
    /// JSON pointer to the record id.
    #[arg(long)]
    id_pointer: Option<String>,
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u16).range(1..))]
    workers: u16,
    /// Allow contentType and dimension rules to fetch URLs.
    #[arg(long)]
    enable_network: bool,
    /// Per-URL time limit for network rules.
    #[arg(long, default_value_t = 10)]
    timeout_secs: u64,
    #[arg(long, allow_hyphen_values = true)]
    blocked_floor: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    improve_floor: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    good_floor: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    blocking_score: Option<f64>,
    /// Debug log for rules flagged `debug` (stderr if absent).
    #[arg(long)]
    log: Option<PathBuf>,
    /// Schema field whose first value groups the aggregate statistics.
    #[arg(long)]
    group_by: Option<String>,
    /// Serve network rules from files in this directory instead of HTTP.
    #[arg(long, hide = true)]
    net_fixtures: Option<PathBuf>,
}

#[derive(Args)]
struct AggregateArgs {
    /// CSV report written by `validate`.
    #[arg(long)]
    input: PathBuf,
    /// Schema the report was written with.
    #[arg(long)]
    schema: PathBuf,
    /// JSON output path (stdout if absent).
    #[arg(long)]
    output: Option<PathBuf>,
}

fn load_schema(path: &Path) -> Result<CompiledSchema> {
    let text = std::fs::read_to_string(path).with_context(|| format!("cannot read schema {}", path.display()))?;
    let config = parse_schema(&text, SchemaSyntax::from_path(path))
        .with_context(|| format!("invalid schema {}", path.display()))?;
    compile(config).map_err(|err| anyhow::anyhow!("schema {} does not compile:\n{err}", path.display()))
}

fn plural(n: usize, word: &str) -> String {
    if n == 1 {
        format!("{n} {word}")
    } else {
        format!("{n} {word}s")
    }
}

fn check_config(path: &Path) -> Result<()> {
    let schema = load_schema(path)?;
    let order: Vec<&str> = schema
        .evaluation_order()
        .iter()
        .map(|&i| schema.rules()[i].id.as_str())
        .collect();
    println!(
        "{}, {}",
        plural(schema.fields().len(), "field"),
        plural(schema.rules().len(), "rule")
    );
    println!("evaluation order: {}", order.join(", "));
    Ok(())
}

/// Writes to a temporary file next to `path` and renames it into place
/// only when `write` succeeds.
fn write_atomically(path: &Path, write: impl FnOnce(&mut BufWriter<&mut File>) -> Result<()>) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = NamedTempFile::new_in(dir).with_context(|| format!("cannot create a file in {}", dir.display()))?;
    {
        let mut out = BufWriter::new(tmp.as_file_mut());
        write(&mut out)?;
        out.flush()?;
    }
    tmp.persist(path)
        .with_context(|| format!("cannot write {}", path.display()))?;
    Ok(())
}

fn report_diagnostics(path: &Path, diag: &ReaderDiagnostics) -> Result<()> {
    for w in diag.warnings.iter().take(20) {
        warn!("{}: {w}", path.display());
    }
    let total = diag.warning_count();
    if total > 20 {
        warn!("{}: {} more warnings", path.display(), total - 20);
    }
    if diag.records_skipped > 0 {
        warn!(
            "{}: skipped {} defective record(s)",
            path.display(),
            diag.records_skipped
        );
    }
    if let Some(err) = &diag.io_error {
        bail!("error reading {}: {err}", path.display());
    }
    Ok(())
}

fn open_input(
    path: &Path,
    format: InputFormat,
    options: &ReaderOptions,
) -> Result<Box<dyn bibcheck::reader::RecordReader + Send>> {
    let file = File::open(path).with_context(|| format!("cannot open {}", path.display()))?;
    open_reader(format, BufReader::new(file), options).with_context(|| format!("cannot read {}", path.display()))
}

fn resolve_format(args: &ValidateArgs, schema: &CompiledSchema) -> Result<InputFormat> {
    let format = match (args.format, schema.format()) {
        (Some(f), _) => f,
        (None, SourceFormat::Csv) => InputFormat::Csv,
        (None, SourceFormat::Json) => InputFormat::JsonLines,
        (None, other) => bail!("--format is required for {other} schemas"),
    };
    if format.source_format() != schema.format() {
        bail!(
            "input format {format} does not match the schema's {} format",
            schema.format()
        );
    }
    Ok(format)
}

fn validate(args: &ValidateArgs) -> Result<()> {
    let schema = load_schema(&args.schema)?;
    let format = resolve_format(args, &schema)?;
    let network_rules = schema.network_rule_ids();
    if !network_rules.is_empty() && !args.enable_network {
        bail!(
            "rules {} need network access; pass --enable-network to run them",
            network_rules.join(", ")
        );
    }

    let mut policy = schema.policy();
    policy.blocked_floor = args.blocked_floor.unwrap_or(policy.blocked_floor);
    policy.improve_floor = args.improve_floor.unwrap_or(policy.improve_floor);
    policy.good_floor = args.good_floor.unwrap_or(policy.good_floor);
    policy.blocking_score = args.blocking_score.unwrap_or(policy.blocking_score);
    policy.validate().map_err(anyhow::Error::msg)?;

    let options = ReaderOptions {
        id_column: args.id_column.clone(),
        id_pointer: args.id_pointer.clone(),
    };

    let index = if schema.uses_unique() {
        let mut index = UniquenessIndex::for_schema(&schema);
        for path in &args.input {
            let mut reader = open_input(path, format, &options)?;
            let part = build_uniqueness_index(&mut reader, &schema);
            index.merge(part);
            report_diagnostics(path, reader.diagnostics())?;
        }
        Some(index)
    } else {
        for path in &args.input {
            File::open(path).with_context(|| format!("cannot open {}", path.display()))?;
        }
        None
    };

    let net = if args.enable_network {
        let fetcher: Arc<dyn Fetcher> = match &args.net_fixtures {
            Some(dir) => Arc::new(FixtureFetcher::new(dir)),
            None => Arc::new(HttpFetcher::new()),
        };
        Some(NetChecker::new(fetcher).with_timeout(Duration::from_secs(args.timeout_secs)))
    } else {
        None
    };

    let mut validator = Validator::new(&schema).with_policy(policy);
    if let Some(index) = &index {
        validator = validator.with_index(index);
    }
    if let Some(net) = &net {
        validator = validator.with_net(net);
    }
    if let Some(field) = &args.group_by {
        validator = validator.with_group_field(field).map_err(anyhow::Error::msg)?;
    }

    let mut debug_out: Box<dyn Write> = match &args.log {
        Some(path) => Box::new(BufWriter::new(
            File::create(path).with_context(|| format!("cannot create {}", path.display()))?,
        )),
        None => Box::new(io::stderr()),
    };
    let mut aggregator = Aggregator::new(&schema);
    if args.group_by.is_some() {
        aggregator = aggregator.grouped();
    }

    let mut records = 0u64;
    write_atomically(&args.output, |out| {
        let mut csv = CsvReportWriter::new(out, &schema)?;
        for path in &args.input {
            let mut reader = open_input(path, format, &options)?;
            records += validate_stream(
                &mut reader,
                &validator,
                usize::from(args.workers),
                |report| -> Result<()> {
                    for line in &report.debug {
                        writeln!(debug_out, "{line}")?;
                    }
                    csv.write(&report)?;
                    aggregator.add(&report);
                    Ok(())
                },
            )?;
            report_diagnostics(path, reader.diagnostics())?;
        }
        csv.finish()?;
        Ok(())
    })?;
    debug_out.flush()?;

    let stats = aggregator.finish();
    if let Some(path) = &args.aggregate_out {
        write_atomically(path, |out| Ok(out.write_all(stats.to_json().as_bytes())?))?;
    }

    let (mut pass, mut decided) = (0u64, 0u64);
    for counts in stats.rules.values() {
        pass += counts.pass;
        decided += counts.pass + counts.fail;
    }
    let rate = if decided == 0 {
        100.0
    } else {
        100.0 * pass as f64 / decided as f64
    };
    let categories: Vec<String> = stats.categories.iter().map(|(k, v)| format!("{k} {v}")).collect();
    println!(
        "{records} records, {rate:.1}% of decided checks passed ({pass}/{decided}); {}",
        categories.join(", ")
    );
    Ok(())
}

fn aggregate(args: &AggregateArgs) -> Result<()> {
    let schema = load_schema(&args.schema)?;
    let file = File::open(&args.input).with_context(|| format!("cannot open {}", args.input.display()))?;
    let stats = aggregate_csv(BufReader::new(file), &schema)
        .with_context(|| format!("cannot aggregate {}", args.input.display()))?;
    let json = stats.to_json();
    match &args.output {
        Some(path) => write_atomically(path, |out| Ok(out.write_all(json.as_bytes())?))?,
        None => io::stdout().write_all(json.as_bytes())?,
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn"))
        .format_timestamp(None)
        .init();
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::CheckConfig { schema } => check_config(schema),
        Command::Validate(args) => validate(args),
        Command::Aggregate(args) => aggregate(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(2)
        }
    }
}
