use std::fs;
use std::path::Path;

use megazord_core::harness::synth::{generate_synthetic, write_ohlcv_csv, SynthConfig};
use megazord_core::harness::{emit_reports, run_experiment, ExperimentConfig, OUTPUT_FILES};
use megazord_core::metrics::Metric;
use megazord_core::Error;
use megazord_neural::TrainConfig;

fn corpus(dir: &Path, series: usize, length: usize) -> std::path::PathBuf {
    let records = generate_synthetic(&SynthConfig {
        series,
        length,
        seed: 4,
        ..SynthConfig::default()
    })
    .unwrap();
    let path = dir.join("prices.csv");
    write_ohlcv_csv(&records, fs::File::create(&path).unwrap()).unwrap();
    path
}

fn small(data: &Path, jobs: usize) -> ExperimentConfig {
    ExperimentConfig {
        data_path: Some(data.to_path_buf()),
        variants: vec!["CC".into(), "C0".into(), "LC".into()],
        root_seed: 21,
        jobs,
        train: TrainConfig {
            epochs: 2,
            ..TrainConfig::default()
        },
        ..ExperimentConfig::default()
    }
}

fn read_all(dir: &Path) -> Vec<(String, Vec<u8>)> {
    OUTPUT_FILES
        .iter()
        .map(|f| (f.to_string(), fs::read(dir.join(f)).unwrap()))
        .collect()
}

#[test]
fn outputs_independent_of_thread_count() {
    let tmp = tempfile::tempdir().unwrap();
    let data = corpus(tmp.path(), 4, 70);
    let out = tmp.path().join("out");
    let mut outputs = Vec::new();
    for jobs in [1, 3, 1] {
        let report = run_experiment(&small(&data, jobs)).unwrap();
        emit_reports(&report, &out).unwrap();
        outputs.push(read_all(&out));
    }
    assert_eq!(outputs[0], outputs[1]);
    assert_eq!(outputs[0], outputs[2]);
}

#[test]
fn every_row_has_forecasts_and_shared_split() {
    let tmp = tempfile::tempdir().unwrap();
    let data = corpus(tmp.path(), 3, 60);
    let report = run_experiment(&small(&data, 1)).unwrap();
    assert_eq!(report.rows.len(), 3 * 9);
    assert_eq!(report.rows.len(), report.forecasts.len());
    for (row, run) in report.rows.iter().zip(&report.forecasts) {
        assert_eq!((&row.symbol, &row.method), (&run.symbol, &run.method));
        assert_eq!(run.horizon(), 12);
    }
    assert_eq!(report.split_fingerprints.len(), 3);

    let out = tmp.path().join("out");
    let written = emit_reports(&report, &out).unwrap();
    assert_eq!(written.len(), OUTPUT_FILES.len());
    let forecasts = fs::read_to_string(out.join("forecasts.csv")).unwrap();
    assert_eq!(forecasts.lines().count(), 1 + 27 * 12);
    let metrics = fs::read_to_string(out.join("metrics.csv")).unwrap();
    assert_eq!(
        metrics.lines().next().unwrap(),
        "symbol,method,mse,tu,pocid"
    );
    assert_eq!(metrics.lines().count(), 28);
    let summary: serde_json::Value =
        serde_json::from_slice(&fs::read(out.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["cells"]["succeeded"], 27);
    assert_eq!(summary["root_seed"], 21);
    assert!(summary["config"].get("jobs").is_none());
    let echoed: ExperimentConfig = serde_json::from_value(summary["config"].clone()).unwrap();
    assert_eq!(echoed, small(&data, 1));
    let cd: serde_json::Value =
        serde_json::from_slice(&fs::read(out.join("cd_diagram_tu.json")).unwrap()).unwrap();
    assert_eq!(cd["ranking"]["methods"].as_array().unwrap().len(), 9);
    assert!(cd["ranking"]["cd"].as_f64().unwrap() > 0.0);
    assert!(!out.read_dir().unwrap().any(|e| e
        .unwrap()
        .file_name()
        .to_string_lossy()
        .ends_with(".tmp")));
}

#[test]
fn failed_cells_drop_their_symbol_from_rankings() {
    let tmp = tempfile::tempdir().unwrap();
    let long = generate_synthetic(&SynthConfig {
        series: 3,
        length: 60,
        seed: 8,
        ..SynthConfig::default()
    })
    .unwrap();
    // 26 observations: a valid split, but 20 training points are too few for the networks
    let short = generate_synthetic(&SynthConfig {
        series: 4,
        length: 26,
        seed: 8,
        ..SynthConfig::default()
    })
    .unwrap();
    let mut records = long;
    records.extend(short.into_iter().filter(|r| r.symbol == "SYN003"));
    let data = tmp.path().join("mixed.csv");
    write_ohlcv_csv(&records, fs::File::create(&data).unwrap()).unwrap();

    let report = run_experiment(&small(&data, 2)).unwrap();
    assert_eq!(report.symbols.len(), 4);
    let tu = report.summary(Metric::Tu);
    assert_eq!(tu.symbols, ["SYN000", "SYN001", "SYN002"]);
    assert_eq!(tu.ranking.as_ref().unwrap().n_series, 3);
    assert!(report.row("SYN003", "ses").is_some());
    assert!(report.row("SYN003", "megazord_cc").is_none());
    assert!(report
        .diagnostics
        .iter()
        .any(|d| d.kind == "SeriesTooShort" && d.symbol.as_deref() == Some("SYN003")));
    assert!(report
        .diagnostics
        .iter()
        .any(|d| d.kind == "ExcludedFromRanking" && d.symbol.as_deref() == Some("SYN003")));
}

#[test]
fn sampling_and_explicit_symbols() {
    let tmp = tempfile::tempdir().unwrap();
    let data = corpus(tmp.path(), 5, 40);
    let cfg = ExperimentConfig {
        variants: vec!["C0".into()],
        baselines: vec!["ma".into()],
        sample: Some(3),
        ..small(&data, 1)
    };
    let a = run_experiment(&cfg).unwrap();
    assert_eq!(a.symbols.len(), 3);
    assert_eq!(a.symbols, run_experiment(&cfg).unwrap().symbols);
    let mut sorted = a.symbols.clone();
    sorted.sort();
    assert_eq!(sorted, a.symbols);

    let cfg = ExperimentConfig {
        sample: None,
        symbols: vec!["SYN004".into(), "SYN001".into()],
        ..cfg
    };
    assert_eq!(run_experiment(&cfg).unwrap().symbols, ["SYN004", "SYN001"]);
    let cfg = ExperimentConfig {
        symbols: vec!["NOPE".into()],
        ..cfg
    };
    assert!(matches!(run_experiment(&cfg), Err(Error::UnknownSymbol(s)) if s == "NOPE"));
}

#[test]
fn unreadable_or_missing_data() {
    let cfg = ExperimentConfig {
        data_path: Some("/definitely/not/here.csv".into()),
        ..ExperimentConfig::default()
    };
    assert!(matches!(
        run_experiment(&cfg),
        Err(Error::DataUnreadable(_))
    ));
    assert!(matches!(
        run_experiment(&ExperimentConfig::default()),
        Err(Error::ConfigInvalid(_))
    ));
}

/// Recomputes every best-competitor file from metrics.csv alone.
#[test]
fn best_competitor_matches_metrics_csv() {
    let tmp = tempfile::tempdir().unwrap();
    let data = corpus(tmp.path(), 3, 60);
    let out = tmp.path().join("out");
    emit_reports(&run_experiment(&small(&data, 1)).unwrap(), &out).unwrap();

    let mut reader = csv::Reader::from_path(out.join("metrics.csv")).unwrap();
    let rows: Vec<(String, String, [f64; 3])> = reader
        .records()
        .map(|r| {
            let r = r.unwrap();
            let v = |i: usize| r[i].parse::<f64>().unwrap();
            (r[0].to_string(), r[1].to_string(), [v(2), v(3), v(4)])
        })
        .collect();
    for (col, metric, higher) in [(0, "mse", false), (1, "tu", false), (2, "pocid", true)] {
        let mut reader =
            csv::Reader::from_path(out.join(format!("best_competitor_{metric}.csv"))).unwrap();
        let written: Vec<csv::StringRecord> = reader.records().map(Result::unwrap).collect();
        assert_eq!(written.len(), 3);
        for rec in written {
            let symbol = &rec[0];
            let mine: Vec<f64> = rows
                .iter()
                .filter(|r| r.0 == symbol && r.1.starts_with("megazord_"))
                .map(|r| r.2[col])
                .collect();
            let mean = mine.iter().sum::<f64>() / mine.len() as f64;
            let mut best: Option<(&str, f64)> = None;
            for r in rows
                .iter()
                .filter(|r| r.0 == symbol && !r.1.starts_with("megazord_"))
            {
                let v = r.2[col];
                let better = best.is_none_or(|(_, b)| if higher { v > b } else { v < b });
                if better {
                    best = Some((&r.1, v));
                }
            }
            let (name, score) = best.unwrap();
            assert!((rec[1].parse::<f64>().unwrap() - mean).abs() <= 1e-12 * mean.abs().max(1.0));
            assert_eq!(&rec[2], name);
            assert_eq!(rec[3].parse::<f64>().unwrap(), score);
            let wins = if higher { mean > score } else { mean < score };
            assert_eq!(&rec[4], wins.to_string().as_str());
        }
    }
}
