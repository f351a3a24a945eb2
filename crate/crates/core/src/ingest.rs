//! OHLCV parsing, per-symbol close series and the chronological holdout cut.

use std::io::Read;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// Decomposition window + lookback + a handful of test points.
pub const MIN_SERIES_LEN: usize = 25;

const COLUMNS: [&str; 7] = ["date", "open", "high", "low", "close", "volume", "symbol"];

/// One parsed CSV row. Numeric fields are `None` when the cell was empty,
/// unparsable or out of domain (non-positive close, negative volume).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObservationRecord {
    pub date: NaiveDate,
    pub open: Option<f64>,
    pub high: Option<f64>,
    pub low: Option<f64>,
    pub close: Option<f64>,
    pub volume: Option<f64>,
    pub symbol: String,
}

impl ObservationRecord {
    pub fn is_complete(&self) -> bool {
        self.open.is_some()
            && self.high.is_some()
            && self.low.is_some()
            && self.close.is_some()
            && self.volume.is_some()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct UnivariateSeries {
    symbol: String,
    dates: Vec<NaiveDate>,
    values: Vec<f64>,
}

impl UnivariateSeries {
    pub fn new(symbol: impl Into<String>, dates: Vec<NaiveDate>, values: Vec<f64>) -> Result<Self> {
        if dates.is_empty() || dates.len() != values.len() {
            return Err(Error::InvalidArgument(format!(
                "series needs matching non-empty dates and values ({} vs {})",
                dates.len(),
                values.len()
            )));
        }
        if let Some(w) = dates.windows(2).find(|w| w[0] >= w[1]) {
            return Err(Error::DuplicateDate(w[1]));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteInput);
        }
        Ok(Self {
            symbol: symbol.into(),
            dates,
            values,
        })
    }

    pub fn symbol(&self) -> &str {
        &self.symbol
    }

    pub fn dates(&self) -> &[NaiveDate] {
        &self.dates
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// SHA-256 over symbol, dates and the bit patterns of the values.
    pub fn fingerprint(&self) -> String {
        let mut h = Sha256::new();
        h.update(self.symbol.as_bytes());
        for (d, v) in self.dates.iter().zip(&self.values) {
            h.update(d.to_string().as_bytes());
            h.update(v.to_bits().to_le_bytes());
        }
        h.finalize().iter().map(|b| format!("{b:02x}")).collect()
    }

    fn slice(&self, range: std::ops::Range<usize>) -> Self {
        Self {
            symbol: self.symbol.clone(),
            dates: self.dates[range.clone()].to_vec(),
            values: self.values[range].to_vec(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SplitSeries {
    pub train: UnivariateSeries,
    pub test: UnivariateSeries,
    pub split_fraction: f64,
}

impl SplitSeries {
    pub fn horizon(&self) -> usize {
        self.test.len()
    }

    /// Training values followed by test values.
    pub fn full_values(&self) -> Vec<f64> {
        let mut all = self.train.values().to_vec();
        all.extend_from_slice(self.test.values());
        all
    }

    pub fn fingerprint(&self) -> String {
        let mut h = Sha256::new();
        h.update(self.train.fingerprint().as_bytes());
        h.update(self.test.fingerprint().as_bytes());
        h.finalize().iter().map(|b| format!("{b:02x}")).collect()
    }
}

/// Header-driven OHLCV reader. Column order is free, names are
/// case-insensitive and `Name` is accepted for `symbol`.
pub fn parse_ohlcv_csv<R: Read>(source: R) -> Result<Vec<ObservationRecord>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(source);
    let headers = reader
        .headers()
        .map_err(|e| Error::DataUnreadable(e.to_string()))?
        .clone();
    let normalized: Vec<String> = headers
        .iter()
        .map(|h| {
            match h
                .trim_start_matches('\u{feff}')
                .to_ascii_lowercase()
                .as_str()
            {
                "name" => "symbol".to_string(),
                other => other.to_string(),
            }
        })
        .collect();
    let mut index = [0usize; 7];
    for (slot, col) in index.iter_mut().zip(COLUMNS) {
        *slot = normalized
            .iter()
            .position(|h| h == col)
            .ok_or_else(|| Error::MissingHeader(col.to_string()))?;
    }

    let mut records = Vec::new();
    for row in reader.records() {
        let row = row.map_err(|e| {
            let line = e.position().map(|p| p.line()).unwrap_or(0);
            Error::MalformedRow {
                line,
                reason: e.to_string(),
            }
        })?;
        let line = row.position().map(|p| p.line()).unwrap_or(0);
        let cell = |i: usize| row.get(index[i]).unwrap_or("");
        let date =
            NaiveDate::parse_from_str(cell(0), "%Y-%m-%d").map_err(|e| Error::MalformedRow {
                line,
                reason: format!("bad date `{}`: {e}", cell(0)),
            })?;
        let symbol = cell(6);
        if symbol.is_empty() {
            return Err(Error::MalformedRow {
                line,
                reason: "empty symbol".into(),
            });
        }
        let number = |i: usize| cell(i).parse::<f64>().ok().filter(|v| v.is_finite());
        records.push(ObservationRecord {
            date,
            open: number(1),
            high: number(2),
            low: number(3),
            close: number(4).filter(|&c| c > 0.0),
            volume: number(5).filter(|&v| v >= 0.0),
            symbol: symbol.to_string(),
        });
    }
    Ok(records)
}

/// Distinct symbols in first-seen order.
pub fn symbols(records: &[ObservationRecord]) -> Vec<String> {
    let mut seen = std::collections::BTreeSet::new();
    records
        .iter()
        .filter(|r| seen.insert(r.symbol.as_str()))
        .map(|r| r.symbol.clone())
        .collect()
}

/// Close prices of `symbol`, incomplete rows dropped, sorted by date.
pub fn extract_close_series(
    records: &[ObservationRecord],
    symbol: &str,
) -> Result<UnivariateSeries> {
    let mut rows: Vec<&ObservationRecord> = records.iter().filter(|r| r.symbol == symbol).collect();
    if rows.is_empty() {
        return Err(Error::UnknownSymbol(symbol.to_string()));
    }
    rows.retain(|r| r.is_complete());
    if rows.is_empty() {
        return Err(Error::SeriesTooShort {
            len: 0,
            required: 1,
        });
    }
    rows.sort_by_key(|r| r.date);
    if let Some(w) = rows.windows(2).find(|w| w[0].date == w[1].date) {
        return Err(Error::DuplicateDate(w[1].date));
    }
    let dates = rows.iter().map(|r| r.date).collect();
    let values = rows
        .iter()
        .map(|r| r.close.expect("complete row"))
        .collect();
    UnivariateSeries::new(symbol, dates, values)
}

/// Training length for `n` observations: `floor(fraction * n)`.
pub fn split_point(n: usize, fraction: f64) -> usize {
    // tolerance absorbs products such as 0.29 * 100 = 28.999999999999996
    ((fraction * n as f64) + 1e-9).floor() as usize
}

pub fn holdout_split(series: &UnivariateSeries, fraction: f64) -> Result<SplitSeries> {
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "split fraction {fraction} outside (0, 1)"
        )));
    }
    let n = series.len();
    if n < MIN_SERIES_LEN {
        return Err(Error::SeriesTooShort {
            len: n,
            required: MIN_SERIES_LEN,
        });
    }
    let cut = split_point(n, fraction);
    if cut == 0 || cut == n {
        return Err(Error::InvalidArgument(format!(
            "fraction {fraction} leaves an empty side for {n} observations"
        )));
    }
    Ok(SplitSeries {
        train: series.slice(0..cut),
        test: series.slice(cut..n),
        split_fraction: fraction,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const HEADER: &str = "date,open,high,low,close,volume,Name\n";

    fn parse(body: &str) -> Result<Vec<ObservationRecord>> {
        parse_ohlcv_csv(format!("{HEADER}{body}").as_bytes())
    }

    fn series(n: usize) -> UnivariateSeries {
        let start = NaiveDate::from_ymd_opt(2013, 2, 8).unwrap();
        let dates = (0..n)
            .map(|i| start + chrono::Days::new(i as u64))
            .collect();
        UnivariateSeries::new("X", dates, (0..n).map(|i| i as f64 + 1.0).collect()).unwrap()
    }

    #[test]
    fn single_row() {
        let recs = parse("2014-09-05,95.0,96.0,94.0,95.5,100000,APH\n").unwrap();
        assert_eq!(recs.len(), 1);
        assert_eq!(recs[0].close, Some(95.5));
        assert_eq!(recs[0].symbol, "APH");
        assert!(recs[0].is_complete());
    }

    #[test]
    fn empty_close_is_missing_not_zero() {
        let recs = parse("2014-09-05,95.0,96.0,94.0,,100000,APH\n").unwrap();
        assert_eq!(recs[0].close, None);
        assert!(!recs[0].is_complete());
    }

    #[test]
    fn header_order_and_case_are_free() {
        let csv = "SYMBOL,Close,Volume,Low,High,Open,Date\nAAL,10,5,9,11,9.5,2015-01-02\n";
        let recs = parse_ohlcv_csv(csv.as_bytes()).unwrap();
        assert_eq!(recs[0].close, Some(10.0));
        assert_eq!(recs[0].open, Some(9.5));
        assert_eq!(recs[0].symbol, "AAL");
    }

    #[test]
    fn missing_column_reported() {
        let csv = "date,open,high,low,volume,Name\n";
        assert!(matches!(
            parse_ohlcv_csv(csv.as_bytes()),
            Err(Error::MissingHeader(c)) if c == "close"
        ));
    }

    #[test]
    fn malformed_rows_carry_line_numbers() {
        let err = parse("2014-09-05,1,1,1,1,1,A\n2014-13-01,1,1,1,1,1,A\n").unwrap_err();
        assert!(
            matches!(err, Error::MalformedRow { line: 3, .. }),
            "{err:?}"
        );
        let err = parse("2014-09-05,1,1,1,1,A\n").unwrap_err();
        assert!(
            matches!(err, Error::MalformedRow { line: 2, .. }),
            "{err:?}"
        );
    }

    #[test]
    fn out_of_domain_values_are_missing() {
        let recs = parse("2014-09-05,1,1,1,-3,-1,A\n").unwrap();
        assert_eq!(recs[0].close, None);
        assert_eq!(recs[0].volume, None);
    }

    #[test]
    fn extract_drops_incomplete_rows() {
        let recs =
            parse("2014-09-01,1,1,1,10,1,A\n2014-09-02,1,1,1,,1,A\n2014-09-03,1,1,1,12,1,A\n")
                .unwrap();
        let s = extract_close_series(&recs, "A").unwrap();
        assert_eq!(s.values(), &[10.0, 12.0]);
    }

    #[test]
    fn extract_sorts_by_date() {
        let recs =
            parse("2014-09-03,1,1,1,3,1,A\n2014-09-01,1,1,1,1,1,A\n2014-09-02,1,1,1,2,1,A\n")
                .unwrap();
        assert_eq!(
            extract_close_series(&recs, "A").unwrap().values(),
            &[1.0, 2.0, 3.0]
        );
    }

    #[test]
    fn extract_errors() {
        let recs = parse("2014-09-01,1,1,1,1,1,A\n2014-09-01,1,1,1,2,1,A\n").unwrap();
        assert!(matches!(
            extract_close_series(&recs, "A"),
            Err(Error::DuplicateDate(d)) if d == NaiveDate::from_ymd_opt(2014, 9, 1).unwrap()
        ));
        assert!(matches!(
            extract_close_series(&recs, "B"),
            Err(Error::UnknownSymbol(_))
        ));
    }

    #[test]
    fn split_arithmetic() {
        assert_eq!(split_point(10, 0.8), 8);
        assert_eq!(split_point(1258, 0.8), 1006);
        let s = holdout_split(&series(1258), 0.8).unwrap();
        assert_eq!((s.train.len(), s.test.len()), (1006, 252));
        assert!(matches!(
            holdout_split(&series(5), 0.8),
            Err(Error::SeriesTooShort { len: 5, .. })
        ));
    }

    #[test]
    fn split_is_contiguous() {
        let full = series(40);
        let s = holdout_split(&full, 0.8).unwrap();
        assert_eq!(s.full_values(), full.values());
        assert!(s.train.dates().last() < s.test.dates().first());
    }

    #[test]
    fn symbols_in_first_seen_order() {
        let recs =
            parse("2014-09-01,1,1,1,1,1,B\n2014-09-01,1,1,1,1,1,A\n2014-09-02,1,1,1,1,1,B\n")
                .unwrap();
        assert_eq!(symbols(&recs), vec!["B", "A"]);
    }
}
