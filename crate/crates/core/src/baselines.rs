//! Classical one-step-ahead forecasters, each refit on the expanding history.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::SplitSeries;
use crate::metrics::ForecastRun;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BaselineMethod {
    Arima110,
    Ar1,
    Rw,
    Ses,
    Ma,
    KnnTsp,
}

impl BaselineMethod {
    pub const ALL: [BaselineMethod; 6] = [
        BaselineMethod::Arima110,
        BaselineMethod::Ar1,
        BaselineMethod::Rw,
        BaselineMethod::Ses,
        BaselineMethod::Ma,
        BaselineMethod::KnnTsp,
    ];

    pub fn name(self) -> &'static str {
        match self {
            BaselineMethod::Arima110 => "arima110",
            BaselineMethod::Ar1 => "ar1",
            BaselineMethod::Rw => "rw",
            BaselineMethod::Ses => "ses",
            BaselineMethod::Ma => "ma",
            BaselineMethod::KnnTsp => "knn_tsp",
        }
    }

    pub fn parse(name: &str) -> Option<Self> {
        let key = name.trim().to_ascii_lowercase().replace(['-', ' '], "_");
        Self::ALL.into_iter().find(|m| {
            m.name() == key
                || matches!(
                    (m, key.as_str()),
                    (BaselineMethod::Arima110, "arima")
                        | (BaselineMethod::Ar1, "ar")
                        | (BaselineMethod::KnnTsp, "knn")
                )
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselineConfig {
    pub method: BaselineMethod,
    pub alpha: f64,
    pub ma_window: usize,
    pub knn_window: usize,
    pub knn_neighbors: usize,
    pub rw_seed: u64,
}

impl BaselineConfig {
    pub fn new(method: BaselineMethod) -> Self {
        Self {
            method,
            alpha: 0.95,
            ma_window: 10,
            knn_window: 5,
            knn_neighbors: 3,
            rw_seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return Err(Error::InvalidArgument(format!(
                "alpha {} outside (0, 1]",
                self.alpha
            )));
        }
        if self.ma_window == 0 || self.knn_window == 0 || self.knn_neighbors == 0 {
            return Err(Error::InvalidArgument("windows and k must be >= 1".into()));
        }
        Ok(())
    }

    /// Shortest history every step of this method accepts.
    pub fn min_history(&self) -> usize {
        match self.method {
            BaselineMethod::Arima110 => 4,
            BaselineMethod::Ar1 => 3,
            BaselineMethod::Rw => 2,
            BaselineMethod::Ses => 1,
            BaselineMethod::Ma => self.ma_window,
            BaselineMethod::KnnTsp => self.knn_window + self.knn_neighbors,
        }
    }
}

/// `y = intercept + slope * x` by ordinary least squares.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearFit {
    pub intercept: f64,
    pub slope: f64,
    /// Regressor had no spread; slope forced to 0, intercept = mean(y).
    pub degenerate: bool,
}

pub fn least_squares(x: &[f64], y: &[f64]) -> LinearFit {
    debug_assert_eq!(x.len(), y.len());
    let n = x.len() as f64;
    let mean_x = x.iter().sum::<f64>() / n;
    let mean_y = y.iter().sum::<f64>() / n;
    let all_equal = x.iter().all(|&v| v == x[0]);
    let sxx: f64 = x.iter().map(|v| (v - mean_x) * (v - mean_x)).sum();
    if all_equal || sxx == 0.0 {
        return LinearFit {
            intercept: mean_y,
            slope: 0.0,
            degenerate: true,
        };
    }
    let sxy: f64 = x
        .iter()
        .zip(y)
        .map(|(a, b)| (a - mean_x) * (b - mean_y))
        .sum();
    let slope = sxy / sxx;
    LinearFit {
        intercept: mean_y - slope * mean_x,
        slope,
        degenerate: false,
    }
}

fn require(history: &[f64], required: usize) -> Result<()> {
    if history.len() < required {
        return Err(Error::SeriesTooShort {
            len: history.len(),
            required,
        });
    }
    Ok(())
}

/// Conditional least-squares AR(1) fit on the pairs `(z_{t-1}, z_t)`.
pub fn fit_ar1(history: &[f64]) -> Result<LinearFit> {
    require(history, 3)?;
    let n = history.len();
    Ok(least_squares(&history[..n - 1], &history[1..]))
}

pub fn forecast_ar1(history: &[f64]) -> Result<f64> {
    let fit = fit_ar1(history)?;
    let last = history[history.len() - 1];
    if history.iter().all(|&v| v == last) {
        return Ok(last);
    }
    Ok(fit.intercept + fit.slope * last)
}

/// AR(1) with intercept on the first differences.
pub fn fit_arima110(history: &[f64]) -> Result<LinearFit> {
    require(history, 4)?;
    let diffs: Vec<f64> = history.windows(2).map(|w| w[1] - w[0]).collect();
    Ok(least_squares(&diffs[..diffs.len() - 1], &diffs[1..]))
}

pub fn forecast_arima110(history: &[f64]) -> Result<f64> {
    let fit = fit_arima110(history)?;
    let n = history.len();
    let last = history[n - 1];
    if history.iter().all(|&v| v == last) {
        return Ok(last);
    }
    let last_diff = last - history[n - 2];
    Ok(last + fit.intercept + fit.slope * last_diff)
}

/// Sample standard deviation of the first differences (0 with fewer than two).
pub fn difference_sd(history: &[f64]) -> f64 {
    let diffs: Vec<f64> = history.windows(2).map(|w| w[1] - w[0]).collect();
    if diffs.len() < 2 {
        return 0.0;
    }
    let mean = diffs.iter().sum::<f64>() / diffs.len() as f64;
    let var = diffs.iter().map(|d| (d - mean) * (d - mean)).sum::<f64>() / (diffs.len() - 1) as f64;
    var.sqrt()
}

/// Last value plus a Gaussian step whose spread matches past differences.
pub fn forecast_rw<R: Rng + ?Sized>(history: &[f64], rng: &mut R) -> Result<f64> {
    require(history, 2)?;
    let sigma = difference_sd(history);
    let eps: f64 = rng.sample(StandardNormal);
    Ok(history[history.len() - 1] + sigma * eps)
}

pub fn forecast_ses(history: &[f64], alpha: f64) -> Result<f64> {
    require(history, 1)?;
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "alpha {alpha} outside (0, 1]"
        )));
    }
    Ok(history[1..]
        .iter()
        .fold(history[0], |s, &z| alpha * z + (1.0 - alpha) * s))
}

pub fn forecast_ma(history: &[f64], window: usize) -> Result<f64> {
    if window == 0 {
        return Err(Error::InvalidArgument("window must be >= 1".into()));
    }
    if history.len() < window {
        return Err(Error::WindowTooLarge {
            window,
            len: history.len(),
        });
    }
    let tail = &history[history.len() - window..];
    Ok(tail.iter().sum::<f64>() / window as f64)
}

/// Mean successor of the `k` past windows nearest (Euclidean) to the latest
/// `window` values. Candidates end before the last index; ties go to the
/// earlier window.
pub fn forecast_knn_tsp(history: &[f64], window: usize, k: usize) -> Result<f64> {
    if window == 0 || k == 0 {
        return Err(Error::InvalidArgument("window and k must be >= 1".into()));
    }
    let n = history.len();
    let available = n.saturating_sub(window);
    if available < k {
        return Err(Error::NotEnoughCandidates {
            available,
            required: k,
        });
    }
    let query = &history[n - window..];
    // candidate `s` covers history[s .. s + window] and is followed by history[s + window]
    let mut scored: Vec<(f64, usize)> = (0..available)
        .map(|s| {
            let d2: f64 = history[s..s + window]
                .iter()
                .zip(query)
                .map(|(a, b)| (a - b) * (a - b))
                .sum();
            (d2.sqrt(), s)
        })
        .collect();
    scored.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let total: f64 = scored[..k].iter().map(|&(_, s)| history[s + window]).sum();
    Ok(total / k as f64)
}

/// One forecast per test step from `train ++ test[..t]`.
pub fn rolling_one_step_forecasts(
    config: &BaselineConfig,
    split: &SplitSeries,
) -> Result<ForecastRun> {
    config.validate()?;
    let all = split.full_values();
    let start = split.train.len();
    require(split.train.values(), config.min_history())?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.rw_seed);
    let predictions = (start..all.len())
        .map(|t| {
            let history = &all[..t];
            match config.method {
                BaselineMethod::Arima110 => forecast_arima110(history),
                BaselineMethod::Ar1 => forecast_ar1(history),
                BaselineMethod::Rw => forecast_rw(history, &mut rng),
                BaselineMethod::Ses => forecast_ses(history, config.alpha),
                BaselineMethod::Ma => forecast_ma(history, config.ma_window),
                BaselineMethod::KnnTsp => {
                    forecast_knn_tsp(history, config.knn_window, config.knn_neighbors)
                }
            }
        })
        .collect::<Result<Vec<f64>>>()?;
    ForecastRun::new(
        split.train.symbol(),
        config.method.name(),
        split.test.values().to_vec(),
        predictions,
        all[start - 1],
    )
}
