//! Return probabilities and the spectral radius of the walk operator.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use super::AnalysisError;
use crate::walker::WeightedGraph;

/// `p_{2n}(v, v)` for `n = 1..=n_max`, by exact propagation of the
/// distribution of the walk started at `v`.
pub fn return_probabilities(view: &WeightedGraph, v: usize, n_max: usize) -> Vec<f64> {
    let n = view.vertex_count();
    let mut mu = vec![0.0; n];
    mu[v] = 1.0;
    let mut next = vec![0.0; n];
    let mut out = Vec::with_capacity(n_max);
    for t in 1..=2 * n_max {
        next.iter_mut().for_each(|x| *x = 0.0);
        for x in 0..n {
            if mu[x] == 0.0 {
                continue;
            }
            let w = view.weight(x);
            if w == 0.0 {
                next[x] += mu[x];
                continue;
            }
            for &(y, wy) in view.entries(x) {
                next[y] += mu[x] * wy / w;
            }
        }
        std::mem::swap(&mut mu, &mut next);
        if t % 2 == 0 {
            out.push(mu[v]);
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectralEstimate {
    /// `p_{2n}(v, v)`, `n = 1..=n_max`.
    pub returns: Vec<f64>,
    /// `p_{2n}(v, v)^{1 / 2n}`.
    pub roots: Vec<f64>,
    pub last: f64,
    /// `exp(c / 2)` from the fit `ln p_{2n} = a + b ln n + c n + d / n`
    /// over `n_max / 2 <= n <= n_max`.
    pub trend: f64,
}

/// Spectral radius estimate from return probabilities up to time `2 n_max`.
pub fn spectral_radius_estimate(view: &WeightedGraph, v: usize, n_max: usize) -> Result<SpectralEstimate, AnalysisError> {
    if n_max < 6 {
        return Err(AnalysisError::BadParameter(format!("n_max must be at least 6, got {n_max}")));
    }
    let returns = return_probabilities(view, v, n_max);
    if returns.iter().any(|&p| !(p > 0.0)) {
        return Err(AnalysisError::BadParameter("zero return probability (periodic or isolated)".into()));
    }
    let roots: Vec<f64> = returns.iter().enumerate().map(|(i, p)| p.powf(1.0 / (2.0 * (i + 1) as f64))).collect();
    let last = *roots.last().expect("n_max >= 6");
    let pts: Vec<usize> = (n_max / 2..=n_max).collect();
    let design = DMatrix::from_fn(pts.len(), 4, |r, c| {
        let n = pts[r] as f64;
        match c {
            0 => 1.0,
            1 => n.ln(),
            2 => n,
            _ => 1.0 / n,
        }
    });
    let y = DVector::from_iterator(pts.len(), pts.iter().map(|&n| returns[n - 1].ln()));
    let coef = design
        .svd(true, true)
        .solve(&y, 1e-14)
        .map_err(|e| AnalysisError::BadParameter(e.to_string()))?;
    Ok(SpectralEstimate { returns, roots, last, trend: (coef[2] / 2.0).exp() })
}
