//! Harmonic extensions of boundary functions by Monte Carlo.

use rayon::prelude::*;
use serde::Serialize;

use super::{mean_and_se, AnalysisError};
use crate::rng::stream_rng;
use crate::walker::WalkHost;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HarmonicEstimate {
    pub value: f64,
    pub se: f64,
    pub converged: usize,
    pub not_converged: usize,
}

/// Exit angle of a walk from `start`, run until its Euclidean centre is
/// within `eps` of the unit circle or `steps` are used up.
fn exit_angle<H: WalkHost>(host: &H, start: &H::State, steps: usize, eps: f64, seed: u64, stream: u64) -> Option<f64> {
    let target = eps.ln();
    let mut rng = stream_rng(seed, stream);
    let mut s = start.clone();
    for _ in 0..=steps {
        let o = host.observe(&s);
        if o.hyp.is_some_and(|h| h.log_gap < target) {
            return Some(o.arg);
        }
        s = host.step(&s, &mut rng)?;
    }
    None
}

/// `h(v) = E_v[g(exit angle)]` from `walks` walks on streams
/// `first_stream..first_stream + walks`.
#[allow(clippy::too_many_arguments)]
pub fn harmonic_estimate<H, G>(
    host: &H,
    start: &H::State,
    g: &G,
    walks: usize,
    steps: usize,
    eps: f64,
    seed: u64,
    first_stream: u64,
) -> Result<HarmonicEstimate, AnalysisError>
where
    H: WalkHost,
    G: Fn(f64) -> f64 + Sync,
{
    let angles: Vec<Option<f64>> = (0..walks as u64)
        .into_par_iter()
        .map(|i| exit_angle(host, start, steps, eps, seed, first_stream + i))
        .collect();
    let values: Vec<f64> = angles.iter().flatten().map(|&a| g(a)).collect();
    if values.is_empty() {
        return Err(AnalysisError::NotConverged);
    }
    let (value, se) = mean_and_se(&values);
    Ok(HarmonicEstimate { value, se, converged: values.len(), not_converged: walks - values.len() })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LevyReport {
    /// Evaluated step indices.
    pub steps: Vec<usize>,
    pub h: Vec<HarmonicEstimate>,
    /// `|h(X_N) - g(exit angle of the trajectory)|` when the trajectory exits.
    pub terminal_gap: Option<f64>,
}

/// Harmonic extension evaluated along a trajectory at every `stride`-th
/// state (and the last one).
#[allow(clippy::too_many_arguments)]
pub fn levy_convergence_check<H, G>(
    host: &H,
    states: &[H::State],
    g: &G,
    inner_walks: usize,
    steps: usize,
    eps: f64,
    stride: usize,
    seed: u64,
) -> Result<LevyReport, AnalysisError>
where
    H: WalkHost,
    G: Fn(f64) -> f64 + Sync,
{
    if states.is_empty() {
        return Err(AnalysisError::EmptyInput);
    }
    let stride = stride.max(1);
    let mut idx: Vec<usize> = (0..states.len()).step_by(stride).collect();
    if *idx.last().expect("nonempty") != states.len() - 1 {
        idx.push(states.len() - 1);
    }
    let mut h = Vec::with_capacity(idx.len());
    for (k, &i) in idx.iter().enumerate() {
        let first = (k * inner_walks) as u64;
        h.push(harmonic_estimate(host, &states[i], g, inner_walks, steps, eps, seed, first)?);
    }
    let target = eps.ln();
    let exit = states.iter().map(|s| host.observe(s)).find(|o| o.hyp.is_some_and(|x| x.log_gap < target));
    let terminal_gap = exit.map(|o| (h.last().expect("nonempty").value - g(o.arg)).abs());
    Ok(LevyReport { steps: idx, h, terminal_gap })
}
