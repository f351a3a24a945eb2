//! Seeded trend + sinusoid + noise price corpus in OHLCV form.

use std::f64::consts::PI;
use std::io::Write;

use chrono::{Datelike, Days, NaiveDate, Weekday};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::ObservationRecord;
use crate::megazord::derive_seed;

/// Closing price `z_t = level + slope·t + amplitude·sin(2πt/period + phase) + ε_t`,
/// with `level`, `slope`, `amplitude` and `phase` drawn once per series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthConfig {
    pub series: usize,
    pub length: usize,
    pub seed: u64,
    pub level: (f64, f64),
    pub slope: (f64, f64),
    pub amplitude: (f64, f64),
    pub period: f64,
    pub noise_sd: f64,
    pub start_date: NaiveDate,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            series: 10,
            length: 300,
            seed: 0,
            level: (50.0, 150.0),
            slope: (0.1, 0.15),
            amplitude: (1.3, 1.6),
            period: 5.0,
            noise_sd: 1.0,
            start_date: NaiveDate::from_ymd_opt(2013, 2, 8).expect("valid date"),
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::ConfigInvalid(m));
        if self.series == 0 || self.length < 2 {
            return bad("need at least one series of length >= 2".into());
        }
        for (name, (lo, hi)) in [
            ("level", self.level),
            ("slope", self.slope),
            ("amplitude", self.amplitude),
        ] {
            if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
                return bad(format!("{name} range ({lo}, {hi}) is invalid"));
            }
        }
        if self.level.0 <= 0.0 {
            return bad("level must be positive".into());
        }
        if !(self.period > 0.0) || !(self.noise_sd >= 0.0) {
            return bad("period must be > 0 and noise_sd >= 0".into());
        }
        Ok(())
    }

    pub fn symbol(&self, i: usize) -> String {
        format!("SYN{i:03}")
    }
}

/// Monday–Friday calendar starting at `start` (rolled forward off weekends).
pub fn business_days(start: NaiveDate, count: usize) -> Vec<NaiveDate> {
    let mut out = Vec::with_capacity(count);
    let mut d = start;
    while out.len() < count {
        if !matches!(d.weekday(), Weekday::Sat | Weekday::Sun) {
            out.push(d);
        }
        d = d + Days::new(1);
    }
    out
}

fn uniform(rng: &mut ChaCha8Rng, (lo, hi): (f64, f64)) -> f64 {
    if lo == hi {
        lo
    } else {
        rng.random_range(lo..hi)
    }
}

pub fn generate_synthetic(config: &SynthConfig) -> Result<Vec<ObservationRecord>> {
    config.validate()?;
    let dates = business_days(config.start_date, config.length);
    let mut records = Vec::with_capacity(config.series * config.length);
    for i in 0..config.series {
        let symbol = config.symbol(i);
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(config.seed, &symbol, "synth"));
        let level = uniform(&mut rng, config.level);
        let slope = uniform(&mut rng, config.slope);
        let amplitude = uniform(&mut rng, config.amplitude);
        let phase = rng.random_range(0.0..2.0 * PI);
        let noise = Normal::new(0.0, config.noise_sd).expect("validated sd");
        let wick = Normal::new(0.0, 0.25 * config.noise_sd.max(1e-3)).expect("positive sd");
        let mut prev_close: Option<f64> = None;
        for (t, &date) in dates.iter().enumerate() {
            let tf = t as f64;
            let close = (level
                + slope * tf
                + amplitude * (2.0 * PI * tf / config.period + phase).sin()
                + noise.sample(&mut rng))
            .max(0.01);
            let open = prev_close.unwrap_or(close);
            let high = open.max(close) + wick.sample(&mut rng).abs();
            let low = (open.min(close) - wick.sample(&mut rng).abs()).max(0.005);
            let volume = rng.random_range(100_000u64..1_000_000) as f64;
            records.push(ObservationRecord {
                date,
                open: Some(open),
                high: Some(high),
                low: Some(low),
                close: Some(close),
                volume: Some(volume),
                symbol: symbol.clone(),
            });
            prev_close = Some(close);
        }
    }
    Ok(records)
}

fn cell(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// `date,open,high,low,close,volume,Name`, one row per record.
pub fn write_ohlcv_csv<W: Write>(records: &[ObservationRecord], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let io = |e: csv::Error| Error::IoFailure(e.to_string());
    w.write_record(["date", "open", "high", "low", "close", "volume", "Name"])
        .map_err(io)?;
    for r in records {
        w.write_record([
            r.date.format("%Y-%m-%d").to_string(),
            cell(r.open),
            cell(r.high),
            cell(r.low),
            cell(r.close),
            cell(r.volume),
            r.symbol.clone(),
        ])
        .map_err(io)?;
    }
    w.flush()?;
    Ok(())
}
