use std::fs;
use std::path::{Path, PathBuf};

use serde_json::json;

use super::EvaluationReport;
use crate::error::{Error, Result};

/// Every file `emit_reports` writes, in write order.
pub const OUTPUT_FILES: [&str; 12] = [
    "metrics.csv",
    "forecasts.csv",
    "ranks_mse.csv",
    "ranks_tu.csv",
    "ranks_pocid.csv",
    "cd_diagram_mse.json",
    "cd_diagram_tu.json",
    "cd_diagram_pocid.json",
    "best_competitor_mse.csv",
    "best_competitor_tu.csv",
    "best_competitor_pocid.csv",
    "summary.json",
];

fn csv_bytes(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| Error::IoFailure(e.to_string());
    w.write_record(header).map_err(io)?;
    for row in rows {
        w.write_record(&row).map_err(io)?;
    }
    w.into_inner().map_err(|e| Error::IoFailure(e.to_string()))
}

fn json_bytes(value: &serde_json::Value) -> Result<Vec<u8>> {
    let mut out = serde_json::to_vec_pretty(value).map_err(|e| Error::IoFailure(e.to_string()))?;
    out.push(b'\n');
    Ok(out)
}

fn render(report: &EvaluationReport) -> Result<Vec<(String, Vec<u8>)>> {
    let mut files = Vec::new();
    files.push((
        "metrics.csv".to_string(),
        csv_bytes(
            &["symbol", "method", "mse", "tu", "pocid"],
            report.rows.iter().map(|r| {
                vec![
                    r.symbol.clone(),
                    r.method.clone(),
                    r.report.mse.to_string(),
                    r.report.tu.to_string(),
                    r.report.pocid.to_string(),
                ]
            }),
        )?,
    ));
    files.push((
        "forecasts.csv".to_string(),
        csv_bytes(
            &["symbol", "variant", "index", "actual", "predicted"],
            report.forecasts.iter().flat_map(|run| {
                run.actuals
                    .iter()
                    .zip(&run.predictions)
                    .enumerate()
                    .map(move |(i, (z, p))| {
                        vec![
                            run.symbol.clone(),
                            run.method.clone(),
                            (i + 1).to_string(),
                            z.to_string(),
                            p.to_string(),
                        ]
                    })
            }),
        )?,
    ));

    let mut ranks = Vec::new();
    let mut diagrams = Vec::new();
    let mut competitors = Vec::new();
    for summary in &report.metrics {
        let name = summary.metric.name();
        let ranking = summary.ranking.as_ref();
        ranks.push((
            format!("ranks_{name}.csv"),
            csv_bytes(
                &["method", "mean_rank"],
                ranking.into_iter().flat_map(|r| {
                    r.methods
                        .iter()
                        .zip(&r.mean_ranks)
                        .map(|(m, v)| vec![m.clone(), v.to_string()])
                }),
            )?,
        ));
        diagrams.push((
            format!("cd_diagram_{name}.json"),
            json_bytes(&json!({
                "metric": name,
                "better": if summary.metric.higher_is_better() { "higher" } else { "lower" },
                "series": summary.symbols,
                "ranking": ranking,
            }))?,
        ));
        competitors.push((
            format!("best_competitor_{name}.csv"),
            csv_bytes(
                &[
                    "symbol",
                    "megazord_mean",
                    "best_baseline",
                    "best_baseline_score",
                    "megazord_wins",
                ],
                summary.best_competitor.iter().map(|r| {
                    vec![
                        r.symbol.clone(),
                        r.megazord_mean.to_string(),
                        r.best_baseline.clone(),
                        r.best_baseline_score.to_string(),
                        r.megazord_wins.to_string(),
                    ]
                }),
            )?,
        ));
    }
    files.extend(ranks);
    files.extend(diagrams);
    files.extend(competitors);

    let friedman: serde_json::Map<String, serde_json::Value> = report
        .metrics
        .iter()
        .map(|m| {
            (
                m.metric.name().to_string(),
                json!(m.ranking.as_ref().map(|r| r.friedman)),
            )
        })
        .collect();
    // the thread count cannot change results, so it stays out of the echo
    let mut config =
        serde_json::to_value(&report.config).map_err(|e| Error::IoFailure(e.to_string()))?;
    if let Some(map) = config.as_object_mut() {
        map.remove("jobs");
    }
    files.push((
        "summary.json".to_string(),
        json_bytes(&json!({
            "tool": "megazord",
            "version": env!("CARGO_PKG_VERSION"),
            "root_seed": report.config.root_seed,
            "config": config,
            "methods": report.methods,
            "symbols": report.symbols,
            "split_fingerprints": report.split_fingerprints,
            "cells": {
                "succeeded": report.rows.len(),
                "attempted": report.symbols.len() * report.methods.len(),
            },
            "friedman": friedman,
            "diagnostics": report.diagnostics,
        }))?,
    ));
    debug_assert_eq!(
        files.iter().map(|(n, _)| n.as_str()).collect::<Vec<_>>(),
        OUTPUT_FILES
    );
    Ok(files)
}

/// Writes every report file into `output_dir`. Each file is first written
/// under a temporary name; renames happen only after all writes succeeded.
pub fn emit_reports(report: &EvaluationReport, output_dir: &Path) -> Result<Vec<PathBuf>> {
    let files = render(report)?;
    fs::create_dir_all(output_dir)?;
    let mut staged = Vec::new();
    for (name, bytes) in &files {
        let tmp = output_dir.join(format!(".{name}.tmp"));
        if let Err(e) = fs::write(&tmp, bytes) {
            for (t, _) in &staged {
                let _ = fs::remove_file(t);
            }
            return Err(e.into());
        }
        staged.push((tmp, output_dir.join(name)));
    }
    for (tmp, dest) in &staged {
        fs::rename(tmp, dest)?;
    }
    Ok(staged.into_iter().map(|(_, d)| d).collect())
}
