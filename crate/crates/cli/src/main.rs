//! `megazord`: run the benchmark, generate a synthetic corpus, or dump one
//! series' decomposition. Failures print a JSON object on stderr and exit
//! nonzero (2 for usage errors, 1 otherwise).

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use megazord_core::decomposition::{classical_decompose, DEFAULT_WINDOW};
use megazord_core::harness::synth::{generate_synthetic, write_ohlcv_csv, SynthConfig};
use megazord_core::harness::{emit_reports, run_experiment, ExperimentConfig};
use megazord_core::ingest::{extract_close_series, parse_ohlcv_csv};
use megazord_core::metrics::Metric;
use megazord_core::Error;
use serde_json::json;

#[derive(Parser)]
#[command(
    name = "megazord",
    version,
    about = "Decomposition-based price forecasting benchmark"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate every variant and baseline on a corpus and write reports.
    Run(RunArgs),
    /// Write a seeded trend + sinusoid + noise corpus as OHLCV CSV.
    Synth(SynthArgs),
    /// Write the trend/seasonal/residual split of one symbol as CSV.
    Decompose(DecomposeArgs),
}

#[derive(Args)]
struct RunArgs {
    /// TOML file with any ExperimentConfig fields; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    data: Option<PathBuf>,
    /// Comma-separated symbols.
    #[arg(long, value_delimiter = ',', conflicts_with = "sample")]
    symbols: Option<Vec<String>>,
    /// Seeded random sample of this many symbols.
    #[arg(long)]
    sample: Option<usize>,
    /// Comma-separated variants, e.g. `LL,CC` or `megazord_c0`.
    #[arg(long, value_delimiter = ',')]
    variants: Option<Vec<String>>,
    /// Comma-separated baselines; an empty string disables them.
    #[arg(long, value_delimiter = ',')]
    baselines: Option<Vec<String>>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    jobs: Option<usize>,
    /// Training epochs per component network.
    #[arg(long)]
    epochs: Option<usize>,
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long, default_value_t = 10)]
    series: usize,
    #[arg(long, default_value_t = 300)]
    length: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct DecomposeArgs {
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    symbol: String,
    /// Output CSV; `-` writes to stdout.
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = DEFAULT_WINDOW)]
    window: usize,
}

fn non_empty(list: Vec<String>) -> Vec<String> {
    list.into_iter().filter(|s| !s.trim().is_empty()).collect()
}

fn experiment_config(args: RunArgs) -> Result<ExperimentConfig, Error> {
    let mut config = match &args.config {
        Some(path) => ExperimentConfig::from_toml_file(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(v) = args.data {
        config.data_path = Some(v);
    }
    if let Some(v) = args.symbols {
        config.symbols = non_empty(v);
        config.sample = None;
    }
    if let Some(v) = args.sample {
        config.sample = Some(v);
        config.symbols.clear();
    }
    if let Some(v) = args.variants {
        config.variants = non_empty(v);
    }
    if let Some(v) = args.baselines {
        config.baselines = non_empty(v);
    }
    if let Some(v) = args.seed {
        config.root_seed = v;
    }
    if let Some(v) = args.out {
        config.output_dir = v;
    }
    if let Some(v) = args.jobs {
        config.jobs = v;
    }
    if let Some(v) = args.epochs {
        config.train.epochs = v;
    }
    Ok(config)
}

fn run(args: RunArgs) -> Result<(), Error> {
    let config = experiment_config(args)?;
    let report = run_experiment(&config)?;
    let written = emit_reports(&report, &config.output_dir)?;
    for d in &report.diagnostics {
        eprintln!("{}", json!({ "diagnostic": d }));
    }
    let mut out = io::stdout().lock();
    writeln!(
        out,
        "{} symbols x {} methods, {} cells scored",
        report.symbols.len(),
        report.methods.len(),
        report.rows.len()
    )?;
    if let Some(ranking) = &report.summary(Metric::Tu).ranking {
        writeln!(out, "TU mean ranks (CD {:.3}):", ranking.cd)?;
        let means = report.mean_scores(Metric::Tu);
        for name in ranking.ordering() {
            let i = ranking.methods.iter().position(|m| m == name).unwrap_or(0);
            writeln!(
                out,
                "  {name:<14} rank {:>6.3}  mean TU {:.4}",
                ranking.mean_ranks[i], means[name]
            )?;
        }
    }
    for path in written {
        writeln!(out, "wrote {}", path.display())?;
    }
    Ok(())
}

fn synth(args: SynthArgs) -> Result<(), Error> {
    let records = generate_synthetic(&SynthConfig {
        series: args.series,
        length: args.length,
        seed: args.seed,
        ..SynthConfig::default()
    })?;
    write_ohlcv_csv(&records, BufWriter::new(File::create(&args.out)?))?;
    println!("wrote {} rows to {}", records.len(), args.out.display());
    Ok(())
}

fn decompose(args: DecomposeArgs) -> Result<(), Error> {
    let bytes = std::fs::read(&args.data)
        .map_err(|e| Error::DataUnreadable(format!("{}: {e}", args.data.display())))?;
    let records = parse_ohlcv_csv(bytes.as_slice())?;
    let series = extract_close_series(&records, &args.symbol)?;
    let decomposition = classical_decompose(series.values(), args.window)?;
    if args.out.as_os_str() == "-" {
        decomposition.write_csv(io::stdout().lock())
    } else {
        decomposition.write_csv(BufWriter::new(File::create(&args.out)?))
    }
}

fn fail(kind: &str, message: &str, code: u8) -> ExitCode {
    eprintln!("{}", json!({ "error": kind, "message": message }));
    ExitCode::from(code)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            // --help / --version
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => return fail("Usage", e.render().to_string().trim(), 2),
    };
    let result = match cli.command {
        Command::Run(args) => run(args),
        Command::Synth(args) => synth(args),
        Command::Decompose(args) => decompose(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => fail(e.kind(), &e.to_string(), 1),
    }
}
