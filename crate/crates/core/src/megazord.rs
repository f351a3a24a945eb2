//! The hybrid forecaster: decompose, difference the trend, scale each
//! modelled component to [0, 1], fit one network per component and add the
//! component forecasts back together.

use megazord_neural::{
    build_cnn_forecaster, build_lstm_forecaster, make_supervised_windows, train, Network, Tensor,
    TrainConfig,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::decomposition::{
    classical_decompose, first_difference, recompose_forecast, trailing_moving_average,
    SeasonalPattern, DEFAULT_WINDOW,
};
use crate::error::{Error, Result};
use crate::ingest::{SplitSeries, UnivariateSeries};
use crate::metrics::ForecastRun;

pub const DEFAULT_LOOKBACK: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NetKind {
    Cnn,
    Lstm,
}

impl NetKind {
    fn letter(self) -> char {
        match self {
            NetKind::Cnn => 'C',
            NetKind::Lstm => 'L',
        }
    }

    fn build(self, lookback: usize, seed: u64) -> Result<Network> {
        Ok(match self {
            NetKind::Cnn => build_cnn_forecaster(lookback, seed)?,
            NetKind::Lstm => build_lstm_forecaster(lookback, seed)?,
        })
    }
}

/// Trend network plus optional seasonal network.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct VariantSpec {
    pub trend: NetKind,
    pub seasonal: Option<NetKind>,
}

impl VariantSpec {
    pub const ALL: [VariantSpec; 6] = [
        VariantSpec::new(NetKind::Lstm, Some(NetKind::Lstm)),
        VariantSpec::new(NetKind::Lstm, Some(NetKind::Cnn)),
        VariantSpec::new(NetKind::Lstm, None),
        VariantSpec::new(NetKind::Cnn, Some(NetKind::Lstm)),
        VariantSpec::new(NetKind::Cnn, Some(NetKind::Cnn)),
        VariantSpec::new(NetKind::Cnn, None),
    ];

    pub const fn new(trend: NetKind, seasonal: Option<NetKind>) -> Self {
        Self { trend, seasonal }
    }

    /// Two-letter code such as `LC` or `C0`.
    pub fn acronym(&self) -> String {
        let s = self.seasonal.map_or('0', NetKind::letter);
        format!("{}{}", self.trend.letter(), s)
    }

    /// Method label used in reports, e.g. `megazord_lc`.
    pub fn name(&self) -> String {
        format!("megazord_{}", self.acronym().to_ascii_lowercase())
    }

    /// Accepts `LC`, `l,c`, `C0`, `megazord_cc`, `MegazordNet_LC`.
    pub fn parse(text: &str) -> Option<Self> {
        let lower = text.trim().to_ascii_lowercase();
        let code: String = lower
            .trim_start_matches("megazordnet")
            .trim_start_matches("megazord")
            .chars()
            .filter(|c| c.is_ascii_alphanumeric())
            .collect();
        Self::ALL
            .into_iter()
            .find(|v| v.acronym().to_ascii_lowercase() == code)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MegazordConfig {
    pub lookback: usize,
    pub window: usize,
    pub train: TrainConfig,
}

impl Default for MegazordConfig {
    fn default() -> Self {
        Self {
            lookback: DEFAULT_LOOKBACK,
            window: DEFAULT_WINDOW,
            train: TrainConfig::default(),
        }
    }
}

impl MegazordConfig {
    pub fn min_train_len(&self) -> usize {
        (2 * self.window).max(self.window + self.lookback + 2)
    }
}

/// Affine map of the training range onto [0, 1]; not clipped outside it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MinMaxScaler {
    pub min: f64,
    pub max: f64,
}

impl MinMaxScaler {
    /// `None` when the values have (numerically) zero range.
    pub fn fit(values: &[f64]) -> Option<Self> {
        let min = values.iter().copied().fold(f64::INFINITY, f64::min);
        let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let scale = min.abs().max(max.abs()).max(1.0);
        (max - min > 1e-12 * scale).then_some(Self { min, max })
    }

    pub fn scale(&self, v: f64) -> f64 {
        (v - self.min) / (self.max - self.min)
    }

    pub fn unscale(&self, s: f64) -> f64 {
        self.min + s * (self.max - self.min)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ComponentModel {
    Network {
        network: Box<Network>,
        scaler: MinMaxScaler,
        loss_history: Vec<f64>,
    },
    /// The component had zero range in training; its forecast is that value.
    Constant(f64),
}

impl ComponentModel {
    /// Forecast the next value from the most recent `lookback` raw values.
    pub fn predict(&self, recent: &[f64]) -> Result<f64> {
        match self {
            ComponentModel::Constant(c) => Ok(*c),
            ComponentModel::Network {
                network, scaler, ..
            } => {
                let scaled: Vec<f64> = recent.iter().map(|&v| scaler.scale(v)).collect();
                let out = network.forward(&Tensor::column(&scaled))?;
                Ok(scaler.unscale(out))
            }
        }
    }

    pub fn is_constant(&self) -> bool {
        matches!(self, ComponentModel::Constant(_))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MegazordModel {
    pub variant: VariantSpec,
    pub lookback: usize,
    pub window: usize,
    pub seasonal_pattern: SeasonalPattern,
    pub trend_model: ComponentModel,
    pub seasonal_model: Option<ComponentModel>,
    pub warnings: Vec<String>,
    train_fingerprint: String,
}

/// One forecast with its additive parts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ForecastStep {
    /// Position in the full (train + test) series.
    pub index: usize,
    pub trend_prev: f64,
    pub delta_hat: f64,
    pub seasonal_hat: f64,
    pub prediction: f64,
}

/// Seed for one (symbol, label) cell: the first 8 bytes of
/// SHA-256(root_seed ‖ symbol ‖ 0x00 ‖ label).
pub fn derive_seed(root_seed: u64, symbol: &str, label: &str) -> u64 {
    let mut h = Sha256::new();
    h.update(root_seed.to_le_bytes());
    h.update(symbol.as_bytes());
    h.update([0u8]);
    h.update(label.as_bytes());
    let digest = h.finalize();
    u64::from_le_bytes(digest[..8].try_into().expect("32-byte digest"))
}

fn fit_component(
    kind: NetKind,
    values: &[f64],
    config: &MegazordConfig,
    seed: u64,
    label: &str,
    warnings: &mut Vec<String>,
) -> Result<ComponentModel> {
    let Some(scaler) = MinMaxScaler::fit(values) else {
        let value = values.iter().sum::<f64>() / values.len() as f64;
        warnings.push(format!(
            "ConstantComponent: {label} has zero range in training; forecasting the constant {value}"
        ));
        return Ok(ComponentModel::Constant(value));
    };
    let scaled: Vec<f64> = values.iter().map(|&v| scaler.scale(v)).collect();
    let (inputs, targets) = make_supervised_windows(&scaled, config.lookback)?;
    let mut network = kind.build(config.lookback, seed)?;
    let train_config = TrainConfig {
        seed,
        ..config.train.clone()
    };
    let report = train(&mut network, &inputs, &targets, &train_config)?;
    Ok(ComponentModel::Network {
        network: Box::new(network),
        scaler,
        loss_history: report.loss_history,
    })
}

pub fn fit(
    train_series: &UnivariateSeries,
    variant: VariantSpec,
    config: &MegazordConfig,
    seed: u64,
) -> Result<MegazordModel> {
    if config.lookback == 0 || config.window == 0 {
        return Err(Error::InvalidArgument(
            "lookback and window must be >= 1".into(),
        ));
    }
    let values = train_series.values();
    let required = config.min_train_len();
    if values.len() < required {
        return Err(Error::SeriesTooShort {
            len: values.len(),
            required,
        });
    }
    let decomposition = classical_decompose(values, config.window)?;
    let deltas = first_difference(decomposition.trend())?.deltas;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let trend_seed: u64 = rng.random();
    let seasonal_seed: u64 = rng.random();
    let mut warnings = Vec::new();
    let trend_model = fit_component(
        variant.trend,
        &deltas,
        config,
        trend_seed,
        "trend deltas",
        &mut warnings,
    )?;
    let seasonal_model = variant
        .seasonal
        .map(|kind| {
            fit_component(
                kind,
                &decomposition.seasonal(),
                config,
                seasonal_seed,
                "seasonal",
                &mut warnings,
            )
        })
        .transpose()?;

    Ok(MegazordModel {
        variant,
        lookback: config.lookback,
        window: config.window,
        seasonal_pattern: decomposition.pattern().clone(),
        trend_model,
        seasonal_model,
        warnings,
        train_fingerprint: train_series.fingerprint(),
    })
}

impl MegazordModel {
    /// Forecast the value at index `history.len()` from observed history only.
    pub fn predict_next(&self, history: &[f64]) -> Result<ForecastStep> {
        let t = history.len();
        let span = self.lookback + self.window;
        if t < span {
            return Err(Error::SeriesTooShort {
                len: t,
                required: span,
            });
        }
        // trend at t-1-lookback ..= t-1 gives `lookback` deltas
        let trend = trailing_moving_average(&history[t - span..], self.window)?;
        let deltas = first_difference(&trend)?.deltas;
        let trend_prev = trend[trend.len() - 1];
        let delta_hat = self.trend_model.predict(&deltas)?;
        let seasonal_hat = match &self.seasonal_model {
            Some(model) => {
                let recent = self.seasonal_pattern.tile(t - self.lookback, self.lookback);
                model.predict(&recent)?
            }
            None => 0.0,
        };
        Ok(ForecastStep {
            index: t,
            trend_prev,
            delta_hat,
            seasonal_hat,
            prediction: recompose_forecast(trend_prev, delta_hat, seasonal_hat)?,
        })
    }
}

/// One-step-ahead forecasts over the test segment, always fed observed prices.
pub fn forecast_test_detailed(
    model: &MegazordModel,
    split: &SplitSeries,
) -> Result<(ForecastRun, Vec<ForecastStep>)> {
    if split.train.fingerprint() != model.train_fingerprint {
        return Err(Error::ModelSeriesMismatch);
    }
    let all = split.full_values();
    let start = split.train.len();
    let steps = (start..all.len())
        .map(|t| model.predict_next(&all[..t]))
        .collect::<Result<Vec<_>>>()?;
    let run = ForecastRun::new(
        split.train.symbol(),
        model.variant.name(),
        split.test.values().to_vec(),
        steps.iter().map(|s| s.prediction).collect(),
        all[start - 1],
    )?;
    Ok((run, steps))
}

pub fn forecast_test(model: &MegazordModel, split: &SplitSeries) -> Result<ForecastRun> {
    forecast_test_detailed(model, split).map(|(run, _)| run)
}
