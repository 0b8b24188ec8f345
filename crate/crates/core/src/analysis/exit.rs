//! Exit points and dyadic histograms of exit angles.

use std::f64::consts::PI;

use serde::Serialize;

use super::AnalysisError;
use crate::walker::CircleObs;

/// Angle and time of the first step whose Euclidean centre lies within
/// `eps` of the unit circle.
pub fn exit_point(obs: &[CircleObs], eps: f64) -> Result<(f64, usize), AnalysisError> {
    let target = eps.ln();
    obs.iter()
        .enumerate()
        .find(|(_, o)| o.hyp.is_some_and(|h| h.log_gap < target))
        .map(|(t, o)| (o.arg, t))
        .ok_or(AnalysisError::NotConverged)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExitHistogram {
    pub level: u32,
    /// Counts on the arcs `[2 pi j / 2^level, 2 pi (j + 1) / 2^level)`.
    pub counts: Vec<usize>,
    pub total: usize,
    pub max_arc_mass: f64,
    /// Smallest count among the eight level-3 arcs.
    pub min_coarse_count: usize,
}

fn arc_index(angle: f64, level: u32) -> usize {
    let bins = 1usize << level;
    let t = angle.rem_euclid(2.0 * PI) / (2.0 * PI);
    ((t * bins as f64) as usize).min(bins - 1)
}

pub(crate) fn dyadic_counts(angles: &[f64], level: u32) -> Vec<usize> {
    let mut counts = vec![0; 1 << level];
    for &a in angles {
        counts[arc_index(a, level)] += 1;
    }
    counts
}

pub fn exit_histogram(angles: &[f64], level: u32) -> Result<ExitHistogram, AnalysisError> {
    if angles.is_empty() {
        return Err(AnalysisError::EmptyInput);
    }
    if level == 0 || level > 30 {
        return Err(AnalysisError::BadParameter(format!("level {level}")));
    }
    let counts = dyadic_counts(angles, level);
    let total = angles.len();
    let max_arc_mass = *counts.iter().max().expect("nonempty") as f64 / total as f64;
    let min_coarse_count = *dyadic_counts(angles, 3).iter().min().expect("eight arcs");
    Ok(ExitHistogram { level, counts, total, max_arc_mass, min_coarse_count })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SymmetryReport {
    pub level: u32,
    /// Largest `|c1 - c2| / sqrt(c1 + c2)` over arcs.
    pub worst_z: f64,
    pub failing_arcs: usize,
}

/// Compares the histogram of `a` with that of `b` rotated by `rotation`,
/// arc by arc, against `|c1 - c2| <= 3 sqrt(c1 + c2)`. The two samples
/// should be independent and of equal size.
pub fn rotation_symmetry(a: &[f64], b: &[f64], rotation: f64, level: u32) -> Result<SymmetryReport, AnalysisError> {
    if a.is_empty() || b.is_empty() {
        return Err(AnalysisError::EmptyInput);
    }
    let ca = dyadic_counts(a, level);
    let rotated: Vec<f64> = b.iter().map(|x| x + rotation).collect();
    let cb = dyadic_counts(&rotated, level);
    let mut worst_z: f64 = 0.0;
    let mut failing_arcs = 0;
    for (&x, &y) in ca.iter().zip(&cb) {
        let (x, y) = (x as f64, y as f64);
        let diff = (x - y).abs();
        if x + y > 0.0 {
            worst_z = worst_z.max(diff / (x + y).sqrt());
        }
        if diff > 3.0 * (x + y).sqrt() {
            failing_arcs += 1;
        }
    }
    Ok(SymmetryReport { level, worst_z, failing_arcs })
}
