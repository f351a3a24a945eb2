//! Friedman mean ranks, Nemenyi critical difference and CD-diagram groups.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::{Error, Result};

/// Studentized range quantiles q(0.05, k, ∞) / √2 for k = 2..=20.
const NEMENYI_Q_05: [f64; 19] = [
    1.959964233,
    2.343700476,
    2.569032073,
    2.727774717,
    2.849705382,
    2.948319908,
    3.030878867,
    3.101730260,
    3.163683420,
    3.218653901,
    3.268003591,
    3.312738701,
    3.353617959,
    3.391230382,
    3.426041249,
    3.458424619,
    3.488684546,
    3.517072762,
    3.543799277,
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Better {
    Lower,
    Higher,
}

/// Methods × series table of one metric.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreMatrix {
    methods: Vec<String>,
    series: Vec<String>,
    /// `scores[m][s]`
    scores: Vec<Vec<f64>>,
    better: Better,
}

impl ScoreMatrix {
    pub fn new(
        methods: Vec<String>,
        series: Vec<String>,
        scores: Vec<Vec<f64>>,
        better: Better,
    ) -> Result<Self> {
        if methods.len() < 2 || series.len() < 2 {
            return Err(Error::InvalidMatrix(format!(
                "need K >= 2 methods and N >= 2 series, got {}x{}",
                methods.len(),
                series.len()
            )));
        }
        if scores.len() != methods.len() || scores.iter().any(|r| r.len() != series.len()) {
            return Err(Error::InvalidMatrix(
                "score rows do not match labels".into(),
            ));
        }
        if scores.iter().flatten().any(|v| v.is_nan()) {
            return Err(Error::InvalidMatrix("missing (NaN) cell".into()));
        }
        Ok(Self {
            methods,
            series,
            scores,
            better,
        })
    }

    pub fn methods(&self) -> &[String] {
        &self.methods
    }

    pub fn series(&self) -> &[String] {
        &self.series
    }

    pub fn scores(&self) -> &[Vec<f64>] {
        &self.scores
    }

    pub fn better(&self) -> Better {
        self.better
    }

    pub fn k(&self) -> usize {
        self.methods.len()
    }

    pub fn n(&self) -> usize {
        self.series.len()
    }
}

/// Ranks 1..=k of one column (1 = best), ties sharing their midrank.
fn column_ranks(values: &[f64], better: Better) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| {
        let ord = values[a].total_cmp(&values[b]);
        match better {
            Better::Lower => ord,
            Better::Higher => ord.reverse(),
        }
    });
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        // positions i..=j (0-based) share the mean of ranks i+1..=j+1
        let mid = (i + j + 2) as f64 / 2.0;
        for &idx in &order[i..=j] {
            ranks[idx] = mid;
        }
        i = j + 1;
    }
    ranks
}

pub fn friedman_ranks(matrix: &ScoreMatrix) -> Vec<f64> {
    let mut totals = vec![0.0; matrix.k()];
    for s in 0..matrix.n() {
        let column: Vec<f64> = matrix.scores.iter().map(|row| row[s]).collect();
        for (t, r) in totals.iter_mut().zip(column_ranks(&column, matrix.better)) {
            *t += r;
        }
    }
    totals.iter().map(|t| t / matrix.n() as f64).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FriedmanTest {
    pub statistic: f64,
    pub df: usize,
    pub p_value: f64,
}

/// χ²_F = 12N / (k(k+1)) · (Σ R_j² − k(k+1)²/4) against χ²(k−1).
pub fn friedman_test(mean_ranks: &[f64], n: usize) -> FriedmanTest {
    let k = mean_ranks.len() as f64;
    let sum_sq: f64 = mean_ranks.iter().map(|r| r * r).sum();
    let statistic =
        (12.0 * n as f64 / (k * (k + 1.0)) * (sum_sq - k * (k + 1.0).powi(2) / 4.0)).max(0.0);
    let df = mean_ranks.len() - 1;
    let p_value = ChiSquared::new(df as f64)
        .map(|d| d.sf(statistic))
        .unwrap_or(f64::NAN);
    FriedmanTest {
        statistic,
        df,
        p_value,
    }
}

pub fn nemenyi_q(k: usize, alpha: f64) -> Result<f64> {
    if (alpha - 0.05).abs() > 1e-12 {
        return Err(Error::UnsupportedAlpha(alpha));
    }
    if !(2..=20).contains(&k) {
        return Err(Error::KOutOfTable(k));
    }
    Ok(NEMENYI_Q_05[k - 2])
}

/// `q_α(k) · sqrt(k(k+1) / (6n))`
pub fn nemenyi_cd(k: usize, n: usize, alpha: f64) -> Result<f64> {
    let q = nemenyi_q(k, alpha)?;
    if n < 2 {
        return Err(Error::InvalidArgument(format!(
            "need n >= 2 series, got {n}"
        )));
    }
    Ok(q * ((k * (k + 1)) as f64 / (6.0 * n as f64)).sqrt())
}

/// Maximal runs (in rank order) whose mean ranks span less than `cd`.
/// Runs contained in an earlier run are dropped; isolated methods stay as
/// singletons. Returns method indices, each group sorted best first.
pub fn group_methods(mean_ranks: &[f64], cd: f64) -> Vec<Vec<usize>> {
    let mut order: Vec<usize> = (0..mean_ranks.len()).collect();
    order.sort_by(|&a, &b| mean_ranks[a].total_cmp(&mean_ranks[b]).then(a.cmp(&b)));
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut last_end: Option<usize> = None;
    for start in 0..order.len() {
        let mut end = start;
        while end + 1 < order.len() && mean_ranks[order[end + 1]] - mean_ranks[order[start]] < cd {
            end += 1;
        }
        if last_end.is_some_and(|e| e >= end) {
            continue;
        }
        groups.push(order[start..=end].to_vec());
        last_end = Some(end);
    }
    groups
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankResult {
    pub methods: Vec<String>,
    pub mean_ranks: Vec<f64>,
    pub n_series: usize,
    pub alpha: f64,
    pub cd: f64,
    pub groups: Vec<Vec<String>>,
    pub friedman: FriedmanTest,
}

impl RankResult {
    /// Method names sorted by ascending mean rank (ties by input order).
    pub fn ordering(&self) -> Vec<&str> {
        let mut idx: Vec<usize> = (0..self.methods.len()).collect();
        idx.sort_by(|&a, &b| {
            self.mean_ranks[a]
                .total_cmp(&self.mean_ranks[b])
                .then(a.cmp(&b))
        });
        idx.into_iter().map(|i| self.methods[i].as_str()).collect()
    }
}

pub fn rank_methods(matrix: &ScoreMatrix, alpha: f64) -> Result<RankResult> {
    let cd = nemenyi_cd(matrix.k(), matrix.n(), alpha)?;
    let mean_ranks = friedman_ranks(matrix);
    let groups = group_methods(&mean_ranks, cd)
        .into_iter()
        .map(|g| g.into_iter().map(|i| matrix.methods[i].clone()).collect())
        .collect();
    Ok(RankResult {
        methods: matrix.methods.clone(),
        friedman: friedman_test(&mean_ranks, matrix.n()),
        mean_ranks,
        n_series: matrix.n(),
        alpha,
        cd,
        groups,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn matrix(scores: Vec<Vec<f64>>, better: Better) -> ScoreMatrix {
        let k = scores.len();
        let n = scores[0].len();
        ScoreMatrix::new(
            (0..k).map(|i| format!("m{i}")).collect(),
            (0..n).map(|i| format!("s{i}")).collect(),
            scores,
            better,
        )
        .unwrap()
    }

    #[test]
    fn dominance() {
        let m = matrix(vec![vec![0.1, 0.2], vec![0.5, 0.9]], Better::Lower);
        assert_eq!(friedman_ranks(&m), vec![1.0, 2.0]);
        let m = matrix(vec![vec![0.1, 0.2], vec![0.5, 0.9]], Better::Higher);
        assert_eq!(friedman_ranks(&m), vec![2.0, 1.0]);
    }

    #[test]
    fn all_tied() {
        let m = matrix(vec![vec![3.0; 4]; 5], Better::Lower);
        assert_eq!(friedman_ranks(&m), vec![3.0; 5]);
    }

    #[test]
    fn hand_ranked_three_by_three() {
        // s0: a<b<c, s1: b<c<a, s2: a=b<c
        let m = matrix(
            vec![
                vec![1.0, 9.0, 2.0],
                vec![2.0, 1.0, 2.0],
                vec![3.0, 5.0, 4.0],
            ],
            Better::Lower,
        );
        let r = friedman_ranks(&m);
        let expected = [
            (1.0 + 3.0 + 1.5) / 3.0,
            (2.0 + 1.0 + 1.5) / 3.0,
            (3.0 + 2.0 + 3.0) / 3.0,
        ];
        for (a, b) in r.iter().zip(expected) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn cd_anchor() {
        let cd = nemenyi_cd(12, 148, 0.05).unwrap();
        assert!((cd - 1.37).abs() <= 0.01, "{cd}");
        let cd2 = nemenyi_cd(2, 9, 0.05).unwrap();
        assert!((cd2 - 1.959964233 / 3.0).abs() < 1e-12);
        let ratio = nemenyi_cd(7, 10, 0.05).unwrap() / nemenyi_cd(7, 40, 0.05).unwrap();
        assert!((ratio - 2.0).abs() < 1e-12);
    }

    #[test]
    fn cd_errors() {
        assert!(matches!(
            nemenyi_cd(5, 10, 0.1),
            Err(Error::UnsupportedAlpha(_))
        ));
        assert!(matches!(
            nemenyi_cd(21, 10, 0.05),
            Err(Error::KOutOfTable(21))
        ));
        assert!(matches!(
            nemenyi_cd(1, 10, 0.05),
            Err(Error::KOutOfTable(1))
        ));
    }

    #[test]
    fn grouping_examples() {
        assert_eq!(
            group_methods(&[1.0, 1.2, 5.0], 1.37),
            vec![vec![0, 1], vec![2]]
        );
        assert_eq!(group_methods(&[2.0, 1.0, 1.5], 5.0), vec![vec![1, 2, 0]]);
        assert_eq!(
            group_methods(&[1.0, 2.0, 3.0], 1.5),
            vec![vec![0, 1], vec![1, 2]]
        );
    }

    #[test]
    fn friedman_statistic_extremes() {
        let t = friedman_test(&[2.0, 2.0, 2.0], 10);
        assert_eq!(t.statistic, 0.0);
        assert!((t.p_value - 1.0).abs() < 1e-12);
        // perfectly consistent ordering over n series: χ² = n(k−1)
        let t = friedman_test(&[1.0, 2.0, 3.0], 10);
        assert!((t.statistic - 20.0).abs() < 1e-9);
        assert!(t.p_value < 1e-4);
    }

    #[test]
    fn rejects_bad_matrices() {
        let one = ScoreMatrix::new(
            vec!["a".into()],
            vec!["x".into(), "y".into()],
            vec![vec![1.0, 2.0]],
            Better::Lower,
        );
        assert!(one.is_err());
        let nan = ScoreMatrix::new(
            vec!["a".into(), "b".into()],
            vec!["x".into(), "y".into()],
            vec![vec![1.0, f64::NAN], vec![1.0, 2.0]],
            Better::Lower,
        );
        assert!(nan.is_err());
    }
}
