//! Experiment orchestration: every (symbol, method) cell on a shared split,
//! scored, ranked per metric and written out as CSV/JSON reports.

mod config;
mod report;
pub mod synth;

use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use config::{ExperimentConfig, Method};
pub use report::{emit_reports, OUTPUT_FILES};

use crate::baselines::rolling_one_step_forecasts;
use crate::error::{Error, Result};
use crate::ingest::{extract_close_series, holdout_split, parse_ohlcv_csv, symbols, SplitSeries};
use crate::megazord::{derive_seed, fit, forecast_test};
use crate::metrics::{evaluate, ForecastRun, Metric, MetricReport};
use crate::rank_stats::{rank_methods, Better, RankResult, ScoreMatrix};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub symbol: Option<String>,
    pub method: Option<String>,
    pub kind: String,
    pub message: String,
}

impl Diagnostic {
    fn new(
        symbol: Option<&str>,
        method: Option<&str>,
        kind: &str,
        message: impl Into<String>,
    ) -> Self {
        Self {
            symbol: symbol.map(str::to_string),
            method: method.map(str::to_string),
            kind: kind.to_string(),
            message: message.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricRow {
    pub symbol: String,
    pub method: String,
    pub report: MetricReport,
}

/// Mean variant score against the best baseline on one symbol.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BestCompetitorRow {
    pub symbol: String,
    pub megazord_mean: f64,
    pub best_baseline: String,
    pub best_baseline_score: f64,
    pub megazord_wins: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricSummary {
    pub metric: Metric,
    /// Symbols kept in the score matrix (all methods succeeded).
    pub symbols: Vec<String>,
    pub ranking: Option<RankResult>,
    pub best_competitor: Vec<BestCompetitorRow>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvaluationReport {
    pub config: ExperimentConfig,
    pub methods: Vec<String>,
    pub symbols: Vec<String>,
    /// Split fingerprint per evaluated symbol, shared by all its cells.
    pub split_fingerprints: BTreeMap<String, String>,
    pub rows: Vec<MetricRow>,
    pub forecasts: Vec<ForecastRun>,
    pub diagnostics: Vec<Diagnostic>,
    pub metrics: Vec<MetricSummary>,
}

impl EvaluationReport {
    pub fn row(&self, symbol: &str, method: &str) -> Option<&MetricRow> {
        self.rows
            .iter()
            .find(|r| r.symbol == symbol && r.method == method)
    }

    pub fn summary(&self, metric: Metric) -> &MetricSummary {
        self.metrics
            .iter()
            .find(|m| m.metric == metric)
            .expect("every metric is summarised")
    }

    /// Mean of one metric per method over the symbols where it succeeded.
    pub fn mean_scores(&self, metric: Metric) -> BTreeMap<String, f64> {
        let mut acc: BTreeMap<String, (f64, usize)> = BTreeMap::new();
        for r in &self.rows {
            let e = acc.entry(r.method.clone()).or_default();
            e.0 += r.report.get(metric);
            e.1 += 1;
        }
        acc.into_iter()
            .map(|(k, (s, n))| (k, s / n as f64))
            .collect()
    }
}

struct CellOutput {
    run: ForecastRun,
    report: MetricReport,
    split_fingerprint: String,
    warnings: Vec<String>,
}

fn run_cell(config: &ExperimentConfig, method: &Method, split: &SplitSeries) -> Result<CellOutput> {
    let symbol = split.train.symbol();
    let seed = derive_seed(config.root_seed, symbol, &method.name());
    let (run, warnings) = match method {
        Method::Megazord(variant) => {
            let model = fit(&split.train, *variant, &config.megazord_config(), seed)?;
            (forecast_test(&model, split)?, model.warnings)
        }
        Method::Baseline(b) => (
            rolling_one_step_forecasts(&config.baseline_config(*b, seed), split)?,
            Vec::new(),
        ),
    };
    let report = evaluate(&run)?;
    Ok(CellOutput {
        run,
        report,
        split_fingerprint: split.fingerprint(),
        warnings,
    })
}

fn select_symbols(config: &ExperimentConfig, available: Vec<String>) -> Result<Vec<String>> {
    if !config.symbols.is_empty() {
        if let Some(missing) = config.symbols.iter().find(|s| !available.contains(s)) {
            return Err(Error::UnknownSymbol(missing.clone()));
        }
        return Ok(config.symbols.clone());
    }
    let mut sorted = available;
    sorted.sort();
    match config.sample {
        None => Ok(sorted),
        Some(n) if n > sorted.len() => Err(Error::ConfigInvalid(format!(
            "sample of {n} requested but the corpus has {} symbols",
            sorted.len()
        ))),
        Some(n) => {
            let mut rng = ChaCha8Rng::seed_from_u64(config.root_seed);
            let mut picked = rand::seq::index::sample(&mut rng, sorted.len(), n).into_vec();
            picked.sort_unstable();
            Ok(picked.into_iter().map(|i| sorted[i].clone()).collect())
        }
    }
}

fn summarize_metric(
    metric: Metric,
    methods: &[Method],
    symbols: &[String],
    cells: &BTreeMap<(String, String), MetricReport>,
    alpha: f64,
    diagnostics: &mut Vec<Diagnostic>,
) -> MetricSummary {
    let names: Vec<String> = methods.iter().map(Method::name).collect();
    let complete: Vec<String> = symbols
        .iter()
        .filter(|s| {
            names
                .iter()
                .all(|m| cells.contains_key(&((*s).clone(), m.clone())))
        })
        .cloned()
        .collect();
    for s in symbols.iter().filter(|s| !complete.contains(s)) {
        diagnostics.push(Diagnostic::new(
            Some(s),
            None,
            "ExcludedFromRanking",
            format!(
                "{} matrix drops {s}: at least one method failed",
                metric.name()
            ),
        ));
    }
    let score = |s: &String, m: &String| cells[&(s.clone(), m.clone())].get(metric);

    let better = if metric.higher_is_better() {
        Better::Higher
    } else {
        Better::Lower
    };
    let scores: Vec<Vec<f64>> = names
        .iter()
        .map(|m| complete.iter().map(|s| score(s, m)).collect())
        .collect();
    let ranking = match ScoreMatrix::new(names.clone(), complete.clone(), scores, better)
        .and_then(|matrix| rank_methods(&matrix, alpha))
    {
        Ok(r) => Some(r),
        Err(e) => {
            diagnostics.push(Diagnostic::new(
                None,
                None,
                e.kind(),
                format!("{} ranking skipped: {e}", metric.name()),
            ));
            None
        }
    };

    let variants: Vec<&String> = methods
        .iter()
        .zip(&names)
        .filter(|(m, _)| m.is_megazord())
        .map(|(_, n)| n)
        .collect();
    let baselines: Vec<&String> = methods
        .iter()
        .zip(&names)
        .filter(|(m, _)| !m.is_megazord())
        .map(|(_, n)| n)
        .collect();
    let mut best_competitor = Vec::new();
    if !variants.is_empty() && !baselines.is_empty() {
        for s in &complete {
            let megazord_mean =
                variants.iter().map(|m| score(s, m)).sum::<f64>() / variants.len() as f64;
            let mut best = baselines[0];
            for &b in &baselines[1..] {
                let improves = match better {
                    Better::Lower => score(s, b) < score(s, best),
                    Better::Higher => score(s, b) > score(s, best),
                };
                if improves {
                    best = b;
                }
            }
            let best_score = score(s, best);
            best_competitor.push(BestCompetitorRow {
                symbol: s.clone(),
                megazord_mean,
                best_baseline: best.clone(),
                best_baseline_score: best_score,
                megazord_wins: match better {
                    Better::Lower => megazord_mean < best_score,
                    Better::Higher => megazord_mean > best_score,
                },
            });
        }
    }
    MetricSummary {
        metric,
        symbols: complete,
        ranking,
        best_competitor,
    }
}

/// Runs every (symbol, method) cell on `config.jobs` threads. Results do not
/// depend on the thread count: seeds are derived per cell and outputs are
/// merged in (symbol, method) order.
pub fn run_experiment(config: &ExperimentConfig) -> Result<EvaluationReport> {
    let methods = config.validate()?;
    let path = config
        .data_path
        .as_ref()
        .ok_or_else(|| Error::ConfigInvalid("data_path is required".into()))?;
    let bytes = std::fs::read(path)
        .map_err(|e| Error::DataUnreadable(format!("{}: {e}", path.display())))?;
    let records = parse_ohlcv_csv(bytes.as_slice())?;
    let selected = select_symbols(config, symbols(&records))?;

    let mut diagnostics = Vec::new();
    let mut splits = Vec::new();
    for symbol in &selected {
        match extract_close_series(&records, symbol)
            .and_then(|s| holdout_split(&s, config.split_fraction))
        {
            Ok(split) => splits.push(split),
            Err(e) => {
                diagnostics.push(Diagnostic::new(Some(symbol), None, e.kind(), e.to_string()))
            }
        }
    }
    let split_fingerprints: BTreeMap<String, String> = splits
        .iter()
        .map(|s| (s.train.symbol().to_string(), s.fingerprint()))
        .collect();

    let cells: Vec<(&SplitSeries, &Method)> = splits
        .iter()
        .flat_map(|s| methods.iter().map(move |m| (s, m)))
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.jobs)
        .build()
        .map_err(|e| Error::ConfigInvalid(format!("thread pool: {e}")))?;
    let outcomes: Vec<Result<CellOutput>> = pool.install(|| {
        cells
            .par_iter()
            .map(|(split, method)| run_cell(config, method, split))
            .collect()
    });

    let mut rows = Vec::new();
    let mut forecasts = Vec::new();
    let mut scored = BTreeMap::new();
    for ((split, method), outcome) in cells.iter().zip(outcomes) {
        let symbol = split.train.symbol();
        let name = method.name();
        match outcome {
            Ok(cell) => {
                debug_assert_eq!(cell.split_fingerprint, split_fingerprints[symbol]);
                for w in cell.warnings {
                    let kind = w.split(':').next().unwrap_or("Warning").to_string();
                    diagnostics.push(Diagnostic::new(Some(symbol), Some(&name), &kind, w));
                }
                scored.insert((symbol.to_string(), name.clone()), cell.report);
                rows.push(MetricRow {
                    symbol: symbol.to_string(),
                    method: name,
                    report: cell.report,
                });
                forecasts.push(cell.run);
            }
            Err(e) => diagnostics.push(Diagnostic::new(
                Some(symbol),
                Some(&name),
                e.kind(),
                e.to_string(),
            )),
        }
    }
    if rows.is_empty() {
        return Err(Error::AllCellsFailed);
    }

    let evaluated: Vec<String> = splits
        .iter()
        .map(|s| s.train.symbol().to_string())
        .collect();
    let metrics = Metric::ALL
        .into_iter()
        .map(|m| {
            summarize_metric(
                m,
                &methods,
                &evaluated,
                &scored,
                config.alpha,
                &mut diagnostics,
            )
        })
        .collect();

    Ok(EvaluationReport {
        config: config.clone(),
        methods: methods.iter().map(Method::name).collect(),
        symbols: evaluated,
        split_fingerprints,
        rows,
        forecasts,
        diagnostics,
        metrics,
    })
}
