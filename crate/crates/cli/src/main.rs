//! `varbai`: run and inspect variance-constrained best-arm identification experiments.
//!
//! Exit codes: `0` on success, `1` when `verify` finds a failing property, `2` on
//! usage or configuration errors.

mod output;
mod source;

use std::io::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use varbai_core::experiments::{aggregates_json, catalog_keys, write_csv, SCHEMA_VERSION};
use varbai_core::verify::{check_catalog, check_coverage, check_hardness_oracle};
use varbai_core::{
    hardness, run_trials, Algorithm, CaseId, CatalogEntry, EngineConfig, RiskAverseStopRule, TrialOptions,
};

macro_rules! out {
    ($($arg:tt)*) => { write!(std::io::stdout().lock(), $($arg)*)? };
}

macro_rules! outln {
    ($($arg:tt)*) => { writeln!(std::io::stdout().lock(), $($arg)*)? };
}

#[derive(Parser)]
#[command(name = "varbai", version, about = "Variance-constrained best-arm identification experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Hardness quantities, lower bound and sample-complexity scale of instances.
    Hardness(HardnessArgs),
    /// Run seeded trials and write per-trial CSV and aggregate JSON.
    Run(RunArgs),
    /// List or describe catalog entries.
    #[command(subcommand)]
    Catalog(CatalogCommand),
    /// Run the fast self-check suite.
    Verify(VerifyArgs),
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct SourceArgs {
    /// Catalog case (1a, 1b, 1c, 1d, 2, 3, 4a, 4b, 4c, 4d, cmp).
    #[arg(long)]
    catalog: Option<String>,
    /// Instance document (TOML, or JSON by extension).
    #[arg(long)]
    instance: Option<PathBuf>,
}

#[derive(Args)]
struct IndexArgs {
    /// Catalog indices, comma separated.
    #[arg(long, value_delimiter = ',')]
    j: Vec<u32>,
    /// Every index of the catalog case.
    #[arg(long, conflicts_with = "j")]
    all_j: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Args)]
struct HardnessArgs {
    #[command(flatten)]
    source: SourceArgs,
    #[command(flatten)]
    index: IndexArgs,
    #[arg(long, default_value_t = 0.05)]
    delta: f64,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
}

#[derive(Clone, Copy, ValueEnum)]
enum StopRuleArg {
    VarianceUcb,
    SampleVariance,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    source: SourceArgs,
    #[command(flatten)]
    index: IndexArgs,
    /// Algorithms, comma separated: valucb, valucb_subg, riskaverse, va_uniform.
    #[arg(long, value_delimiter = ',', default_value = "valucb")]
    algo: Vec<Algorithm>,
    #[arg(long, default_value_t = 20)]
    trials: u32,
    #[arg(long, default_value_t = 0.05)]
    delta: f64,
    /// Master seed; every random stream is derived from it.
    #[arg(long)]
    seed: u64,
    /// Safety cap on time steps per trial; capped trials count as failures.
    #[arg(long, default_value_t = 1_000_000_000)]
    max_time_steps: u64,
    /// Per-trial CSV output path.
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Aggregate JSON output path.
    #[arg(long)]
    json: Option<PathBuf>,
    /// Worker threads; aggregates do not depend on this value.
    #[arg(long, default_value_t = 1)]
    parallel: usize,
    /// Variance test in the RiskAverse stopping rule.
    #[arg(long, value_enum, default_value_t = StopRuleArg::VarianceUcb)]
    riskaverse_stop: StopRuleArg,
}

#[derive(Subcommand)]
enum CatalogCommand {
    /// One line per catalog case.
    List {
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Arms, classes and gaps of catalog entries.
    Describe {
        case: String,
        #[command(flatten)]
        index: IndexArgs,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Fault {
    Radius,
    Oracle,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long)]
    seed: u64,
    /// Trials of the coverage property.
    #[arg(long, default_value_t = 50)]
    coverage_trials: u32,
    /// Negative controls: shrink the confidence radii or perturb the oracle input.
    #[arg(long, value_enum, hide = true)]
    inject_fault: Option<Fault>,
}

fn entries(source: &SourceArgs, index: &IndexArgs) -> Result<Vec<CatalogEntry>> {
    match (&source.catalog, &source.instance) {
        (Some(case), None) => source::catalog_entries(case, &index.j, index.all_j),
        (None, Some(path)) => {
            if !index.j.is_empty() || index.all_j {
                bail!("--j and --all-j apply to --catalog only");
            }
            Ok(vec![source::load_instance(path)?])
        }
        _ => unreachable!("clap enforces exactly one source"),
    }
}

fn cmd_hardness(args: &HardnessArgs) -> Result<()> {
    let mut docs = Vec::new();
    for entry in entries(&args.source, &args.index)? {
        let report = hardness::report(&entry.ground_truth, args.delta);
        match args.format {
            Format::Text => out!("{}", output::hardness_text(&entry, &report)),
            Format::Json => docs.push(serde_json::json!({
                "case": entry.case_id,
                "j": entry.j,
                "report": report,
            })),
        }
    }
    if let Format::Json = args.format {
        let doc = serde_json::json!({ "schema_version": SCHEMA_VERSION, "instances": docs });
        outln!("{}", serde_json::to_string_pretty(&doc)?);
    }
    Ok(())
}

fn cmd_run(args: &RunArgs) -> Result<()> {
    if args.parallel == 0 {
        bail!("--parallel must be at least 1");
    }
    let options = TrialOptions {
        engine: EngineConfig::default().with_max_time_steps(args.max_time_steps),
        parallel: args.parallel,
        riskaverse_stop_rule: match args.riskaverse_stop {
            StopRuleArg::VarianceUcb => RiskAverseStopRule::VarianceUcb,
            StopRuleArg::SampleVariance => RiskAverseStopRule::SampleVariance,
        },
    };
    let entries = entries(&args.source, &args.index)?;
    let mut records = Vec::new();
    let mut aggregates = Vec::new();
    for entry in &entries {
        for &alg in &args.algo {
            let batch = run_trials(alg, entry, args.delta, args.trials, args.seed, &options)
                .with_context(|| format!("{alg} on {}", output::entry_title(entry)))?;
            outln!("{}", output::summary_line(&batch.aggregate));
            records.extend(batch.records);
            aggregates.push(batch.aggregate);
        }
    }
    if let Some(path) = &args.csv {
        let mut buf = Vec::new();
        write_csv(&records, &mut buf)?;
        output::write_atomic(path, &buf)?;
    }
    if let Some(path) = &args.json {
        let mut text = serde_json::to_string_pretty(&aggregates_json(&aggregates))?;
        text.push('\n');
        output::write_atomic(path, text.as_bytes())?;
    }
    Ok(())
}

fn cmd_catalog(cmd: &CatalogCommand) -> Result<()> {
    match cmd {
        CatalogCommand::List { format } => {
            let keys = catalog_keys();
            match format {
                Format::Text => {
                    for case in CaseId::CATALOG {
                        let r = case.j_range();
                        outln!("{:<4} j={}..{}  {}", case.label(), r.start(), r.end(), case.short_description());
                    }
                    outln!("{} entries", keys.len());
                }
                Format::Json => {
                    let cases: Vec<_> = CaseId::CATALOG
                        .iter()
                        .map(|c| {
                            let r = c.j_range();
                            serde_json::json!({
                                "case": c,
                                "j_min": r.start(),
                                "j_max": r.end(),
                                "description": c.short_description(),
                            })
                        })
                        .collect();
                    let doc = serde_json::json!({
                        "schema_version": SCHEMA_VERSION,
                        "entries": keys.len(),
                        "cases": cases,
                    });
                    outln!("{}", serde_json::to_string_pretty(&doc)?);
                }
            }
        }
        CatalogCommand::Describe { case, index } => {
            for (k, entry) in source::catalog_entries(case, &index.j, index.all_j)?.iter().enumerate() {
                if k > 0 {
                    outln!();
                }
                out!("{}", output::describe_text(entry));
            }
        }
    }
    Ok(())
}

fn cmd_verify(args: &VerifyArgs) -> Result<bool> {
    if args.coverage_trials == 0 {
        bail!("--coverage-trials must be at least 1");
    }
    let radius_scale = match args.inject_fault {
        Some(Fault::Radius) => 0.1,
        _ => 1.0,
    };
    let checks = [
        check_catalog(),
        check_hardness_oracle(matches!(args.inject_fault, Some(Fault::Oracle))),
        check_coverage(args.coverage_trials, args.seed, radius_scale),
    ];
    for c in &checks {
        outln!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
    }
    Ok(checks.iter().all(|c| c.passed))
}

fn is_broken_pipe(e: &anyhow::Error) -> bool {
    e.chain().any(|c| c.downcast_ref::<std::io::Error>().is_some_and(|io| io.kind() == std::io::ErrorKind::BrokenPipe))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Hardness(a) => cmd_hardness(a).map(|_| true),
        Command::Run(a) => cmd_run(a).map(|_| true),
        Command::Catalog(c) => cmd_catalog(c).map(|_| true),
        Command::Verify(a) => cmd_verify(a),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) if is_broken_pipe(&e) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
