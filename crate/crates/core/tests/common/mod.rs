//! Reference computations shared by the oracle and acceptance targets.
#![allow(dead_code)]

use megazord_core::baselines::LinearFit;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Exhaustive neighbour scan: repeated arg-min with a strict comparison, so
/// the earliest window wins every tie.
pub fn brute_force_knn(history: &[f64], window: usize, k: usize) -> f64 {
    let n = history.len();
    let query = &history[n - window..];
    let mut dist: Vec<Option<f64>> = (0..n - window)
        .map(|s| {
            let mut acc = 0.0;
            for j in 0..window {
                let d = history[s + j] - query[j];
                acc += d * d;
            }
            Some(acc.sqrt())
        })
        .collect();
    let mut total = 0.0;
    for _ in 0..k {
        let mut best: Option<usize> = None;
        for (s, d) in dist.iter().enumerate() {
            if let Some(d) = d {
                if best.is_none_or(|b| *d < dist[b].unwrap()) {
                    best = Some(s);
                }
            }
        }
        let b = best.unwrap();
        total += history[b + window];
        dist[b] = None;
    }
    total / k as f64
}

pub fn random_history(rng: &mut ChaCha8Rng, len: usize) -> Vec<f64> {
    match rng.random_range(0..3) {
        // small integers: exact distance ties are common
        0 => (0..len).map(|_| rng.random_range(0..4) as f64).collect(),
        1 => (0..len).map(|_| rng.random_range(-50.0..50.0)).collect(),
        _ => {
            let mut v = rng.random_range(20.0..200.0);
            (0..len)
                .map(|_| {
                    v += rng.random_range(-1.0..1.0);
                    v
                })
                .collect()
        }
    }
}

/// `Σe / Σ|y|` and `Σe·x / Σ|x·y|` for the residuals of a fit.
pub fn normal_equation_residuals(fit: &LinearFit, x: &[f64], y: &[f64]) -> (f64, f64) {
    let e: Vec<f64> = x
        .iter()
        .zip(y)
        .map(|(a, b)| b - fit.intercept - fit.slope * a)
        .collect();
    let s0: f64 = e.iter().sum();
    let s1: f64 = e.iter().zip(x).map(|(e, a)| e * a).sum();
    let n0: f64 = y.iter().map(|v| v.abs()).sum::<f64>().max(1e-300);
    let n1: f64 = x
        .iter()
        .zip(y)
        .map(|(a, b)| (a * b).abs())
        .sum::<f64>()
        .max(1e-300);
    (s0.abs() / n0, s1.abs() / n1)
}
