//! MSE, Theil's U and POCID over one-step-ahead forecast runs.
//!
//! Both TU and POCID look one step back at the first test index; there the
//! previous actual and the previous prediction are the last training value.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForecastRun {
    pub symbol: String,
    pub method: String,
    pub actuals: Vec<f64>,
    pub predictions: Vec<f64>,
    /// Last training observation, `z_0`.
    pub pre_test_actual: f64,
}

impl ForecastRun {
    pub fn new(
        symbol: impl Into<String>,
        method: impl Into<String>,
        actuals: Vec<f64>,
        predictions: Vec<f64>,
        pre_test_actual: f64,
    ) -> Result<Self> {
        if actuals.is_empty() || actuals.len() != predictions.len() {
            return Err(Error::InvalidArgument(format!(
                "run needs equal non-empty actuals and predictions ({} vs {})",
                actuals.len(),
                predictions.len()
            )));
        }
        let finite = actuals
            .iter()
            .chain(&predictions)
            .chain(std::iter::once(&pre_test_actual))
            .all(|v| v.is_finite());
        if !finite {
            return Err(Error::NonFiniteInput);
        }
        Ok(Self {
            symbol: symbol.into(),
            method: method.into(),
            actuals,
            predictions,
            pre_test_actual,
        })
    }

    pub fn horizon(&self) -> usize {
        self.actuals.len()
    }

    fn previous_actuals(&self) -> impl Iterator<Item = f64> + '_ {
        std::iter::once(self.pre_test_actual).chain(self.actuals.iter().copied())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    Mse,
    Tu,
    Pocid,
}

impl Metric {
    pub const ALL: [Metric; 3] = [Metric::Mse, Metric::Tu, Metric::Pocid];

    pub fn name(self) -> &'static str {
        match self {
            Metric::Mse => "mse",
            Metric::Tu => "tu",
            Metric::Pocid => "pocid",
        }
    }

    pub fn higher_is_better(self) -> bool {
        matches!(self, Metric::Pocid)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub mse: f64,
    pub tu: f64,
    pub pocid: f64,
}

impl MetricReport {
    pub fn get(&self, metric: Metric) -> f64 {
        match metric {
            Metric::Mse => self.mse,
            Metric::Tu => self.tu,
            Metric::Pocid => self.pocid,
        }
    }
}

fn squared_errors(run: &ForecastRun) -> f64 {
    run.actuals
        .iter()
        .zip(&run.predictions)
        .map(|(z, p)| (z - p) * (z - p))
        .sum()
}

pub fn mse(run: &ForecastRun) -> f64 {
    squared_errors(run) / run.horizon() as f64
}

pub fn theils_u(run: &ForecastRun) -> Result<f64> {
    let naive: f64 = run
        .actuals
        .iter()
        .zip(run.previous_actuals())
        .map(|(z, prev)| (z - prev) * (z - prev))
        .sum();
    if naive == 0.0 {
        return Err(Error::DegenerateSeries);
    }
    Ok(squared_errors(run) / naive)
}

pub fn pocid(run: &ForecastRun) -> f64 {
    let previous_predictions =
        std::iter::once(run.pre_test_actual).chain(run.predictions.iter().copied());
    let hits = run
        .actuals
        .iter()
        .zip(run.previous_actuals())
        .zip(run.predictions.iter().zip(previous_predictions))
        .filter(|((&z, z_prev), (&p, p_prev))| (p - p_prev) * (z - z_prev) > 0.0)
        .count();
    100.0 * hits as f64 / run.horizon() as f64
}

pub fn evaluate(run: &ForecastRun) -> Result<MetricReport> {
    Ok(MetricReport {
        mse: mse(run),
        tu: theils_u(run)?,
        pocid: pocid(run),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(z0: f64, z: &[f64], p: &[f64]) -> ForecastRun {
        ForecastRun::new("S", "m", z.to_vec(), p.to_vec(), z0).unwrap()
    }

    #[test]
    fn mse_examples() {
        assert_eq!(mse(&run(0.0, &[1.0, 2.0], &[1.0, 2.0])), 0.0);
        assert_eq!(mse(&run(0.0, &[0.0, 0.0], &[1.0, 1.0])), 1.0);
        assert!((mse(&run(0.0, &[1.0, 2.0, 3.0], &[2.0, 2.0, 2.0])) - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn tu_examples() {
        assert_eq!(
            theils_u(&run(1.0, &[3.0, 2.0, 5.0], &[1.0, 3.0, 2.0])).unwrap(),
            1.0
        );
        assert_eq!(theils_u(&run(1.0, &[3.0, 2.0], &[3.0, 2.0])).unwrap(), 0.0);
        assert_eq!(theils_u(&run(1.0, &[2.0, 3.0], &[1.5, 2.5])).unwrap(), 0.25);
        assert!(matches!(
            theils_u(&run(4.0, &[4.0, 4.0], &[1.0, 2.0])),
            Err(Error::DegenerateSeries)
        ));
    }

    #[test]
    fn pocid_examples() {
        assert_eq!(pocid(&run(0.0, &[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0])), 100.0);
        assert_eq!(
            pocid(&run(0.0, &[1.0, 3.0, 2.0], &[7.0, 7.0, 7.0])),
            100.0 / 3.0
        );
        assert_eq!(pocid(&run(7.0, &[1.0, 3.0, 2.0], &[7.0, 7.0, 7.0])), 0.0);
        let p = pocid(&run(10.0, &[11.0, 10.0, 12.0], &[10.5, 10.8, 11.0]));
        assert!((p - 200.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn run_validation() {
        assert!(ForecastRun::new("S", "m", vec![], vec![], 1.0).is_err());
        assert!(ForecastRun::new("S", "m", vec![1.0], vec![1.0, 2.0], 1.0).is_err());
        assert!(ForecastRun::new("S", "m", vec![1.0], vec![f64::NAN], 1.0).is_err());
    }
}
