//! Additive trend/seasonal/residual split with a trailing moving average.

use std::io::Write;

use crate::error::{Error, Result};

pub const DEFAULT_WINDOW: usize = 10;

/// `out[i] = mean(values[i ..= i + window - 1])`, i.e. the average ending at
/// source index `i + window - 1`.
pub fn trailing_moving_average(values: &[f64], window: usize) -> Result<Vec<f64>> {
    if window == 0 {
        return Err(Error::InvalidArgument("window must be >= 1".into()));
    }
    if values.len() < window {
        return Err(Error::WindowTooLarge {
            window,
            len: values.len(),
        });
    }
    Ok(values
        .windows(window)
        .map(|w| w.iter().sum::<f64>() / window as f64)
        .collect())
}

/// Phase means of detrended values, recentred to sum to zero over one period.
/// `pattern[p]` is the seasonal value at every index `t` with `t % window == p`.
#[derive(Debug, Clone, PartialEq)]
pub struct SeasonalPattern {
    pattern: Vec<f64>,
}

impl SeasonalPattern {
    pub fn from_values(pattern: Vec<f64>) -> Self {
        Self { pattern }
    }

    pub fn period(&self) -> usize {
        self.pattern.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.pattern
    }

    pub fn at(&self, t: usize) -> f64 {
        self.pattern[t % self.pattern.len()]
    }

    /// Pattern values for indices `start .. start + len`.
    pub fn tile(&self, start: usize, len: usize) -> Vec<f64> {
        (start..start + len).map(|t| self.at(t)).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Decomposition {
    window: usize,
    source: Vec<f64>,
    trend: Vec<f64>,
    seasonal: SeasonalPattern,
    residual: Vec<f64>,
}

impl Decomposition {
    pub fn window(&self) -> usize {
        self.window
    }

    /// First source index where trend and residual are defined.
    pub fn valid_from(&self) -> usize {
        self.window - 1
    }

    pub fn len(&self) -> usize {
        self.source.len()
    }

    pub fn is_empty(&self) -> bool {
        self.source.is_empty()
    }

    pub fn source(&self) -> &[f64] {
        &self.source
    }

    /// Trend on the valid range; element `i` belongs to source index `valid_from + i`.
    pub fn trend(&self) -> &[f64] {
        &self.trend
    }

    pub fn residual(&self) -> &[f64] {
        &self.residual
    }

    pub fn pattern(&self) -> &SeasonalPattern {
        &self.seasonal
    }

    /// Seasonal values aligned with [`Decomposition::trend`].
    pub fn seasonal(&self) -> Vec<f64> {
        self.seasonal.tile(self.valid_from(), self.trend.len())
    }

    pub fn trend_at(&self, t: usize) -> Option<f64> {
        t.checked_sub(self.valid_from())
            .and_then(|i| self.trend.get(i).copied())
    }

    pub fn seasonal_at(&self, t: usize) -> Option<f64> {
        (t >= self.valid_from() && t < self.len()).then(|| self.seasonal.at(t))
    }

    pub fn residual_at(&self, t: usize) -> Option<f64> {
        t.checked_sub(self.valid_from())
            .and_then(|i| self.residual.get(i).copied())
    }

    /// CSV rows `index,z,trend,seasonal,residual` over the valid range.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let io = |e: csv::Error| Error::IoFailure(e.to_string());
        w.write_record(["index", "z", "trend", "seasonal", "residual"])
            .map_err(io)?;
        for t in self.valid_from()..self.len() {
            let i = t - self.valid_from();
            w.write_record([
                t.to_string(),
                self.source[t].to_string(),
                self.trend[i].to_string(),
                self.seasonal.at(t).to_string(),
                self.residual[i].to_string(),
            ])
            .map_err(io)?;
        }
        w.flush()?;
        Ok(())
    }
}

pub fn classical_decompose(values: &[f64], window: usize) -> Result<Decomposition> {
    if window == 0 {
        return Err(Error::InvalidArgument("window must be >= 1".into()));
    }
    if values.len() < 2 * window {
        return Err(Error::SeriesTooShort {
            len: values.len(),
            required: 2 * window,
        });
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFiniteInput);
    }
    let trend = trailing_moving_average(values, window)?;
    let start = window - 1;
    let detrended: Vec<f64> = trend
        .iter()
        .enumerate()
        .map(|(i, m)| values[start + i] - m)
        .collect();

    let mut sums = vec![0.0; window];
    let mut counts = vec![0usize; window];
    for (i, d) in detrended.iter().enumerate() {
        let phase = (start + i) % window;
        sums[phase] += d;
        counts[phase] += 1;
    }
    let mut pattern: Vec<f64> = sums
        .iter()
        .zip(&counts)
        .map(|(s, &c)| s / c as f64)
        .collect();
    let centre = pattern.iter().sum::<f64>() / window as f64;
    pattern.iter_mut().for_each(|p| *p -= centre);
    let seasonal = SeasonalPattern::from_values(pattern);

    let residual = detrended
        .iter()
        .enumerate()
        .map(|(i, d)| d - seasonal.at(start + i))
        .collect();
    Ok(Decomposition {
        window,
        source: values.to_vec(),
        trend,
        seasonal,
        residual,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct DifferencedSeries {
    pub deltas: Vec<f64>,
    pub anchor: f64,
}

impl DifferencedSeries {
    /// Running sum of the deltas starting from the anchor.
    pub fn reconstruct(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.deltas.len() + 1);
        let mut acc = self.anchor;
        out.push(acc);
        for d in &self.deltas {
            acc += d;
            out.push(acc);
        }
        out
    }
}

pub fn first_difference(values: &[f64]) -> Result<DifferencedSeries> {
    if values.len() < 2 {
        return Err(Error::SeriesTooShort {
            len: values.len(),
            required: 2,
        });
    }
    Ok(DifferencedSeries {
        deltas: values.windows(2).map(|w| w[1] - w[0]).collect(),
        anchor: values[0],
    })
}

/// `(prev_trend + trend_delta_hat) + seasonal_hat`.
pub fn recompose_forecast(prev_trend: f64, trend_delta_hat: f64, seasonal_hat: f64) -> Result<f64> {
    if !(prev_trend.is_finite() && trend_delta_hat.is_finite() && seasonal_hat.is_finite()) {
        return Err(Error::NonFiniteInput);
    }
    Ok((prev_trend + trend_delta_hat) + seasonal_hat)
}
