//! Estimators over walks and packings.

mod bls;
mod exit;
mod harmonic;
mod spectral;
mod transport;

pub use bls::{bls_refinement, BlsReport, TestedCluster};
pub use exit::{exit_histogram, exit_point, rotation_symmetry, ExitHistogram, SymmetryReport};
pub use harmonic::{harmonic_estimate, levy_convergence_check, HarmonicEstimate, LevyReport};
pub use spectral::{return_probabilities, spectral_radius_estimate, SpectralEstimate};
pub use transport::{angle_transport_report, TransportReport};

use serde::Serialize;
use thiserror::Error;

use crate::walker::{CircleObs, ObservedWalk};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnalysisError {
    #[error("walk {walk} reached the window collar after {steps} steps")]
    TrajectoryExitsWindow { walk: usize, steps: usize },
    #[error("walk never came within the requested distance of the boundary")]
    NotConverged,
    #[error("no input values")]
    EmptyInput,
    #[error("packing has not converged: defect {0:e}")]
    UnconvergedPacking(f64),
    #[error("walks are too short for the burn-in: {0} steps")]
    TooShort(usize),
    #[error("invalid parameter: {0}")]
    BadParameter(String),
}

/// Slopes of hyperbolic distance and of `-ln r` against time.
#[derive(Debug, Clone, Serialize)]
pub struct SpeedEstimate {
    /// `None` for plane packings.
    pub speed_hyp: Option<f64>,
    pub speed_se: Option<f64>,
    pub decay_rate: f64,
    pub decay_se: f64,
    /// First and last step used in the fits.
    pub n_range: (usize, usize),
    pub walks: usize,
}

impl SpeedEstimate {
    /// `|speed - decay| / sqrt(se_speed^2 + se_decay^2)`.
    pub fn discrepancy_z(&self) -> Option<f64> {
        let (s, se) = (self.speed_hyp?, self.speed_se?);
        let comb = (se * se + self.decay_se * self.decay_se).sqrt();
        Some((s - self.decay_rate).abs() / comb)
    }
}

/// Least-squares slope of `y` against `x`.
pub(crate) fn ols_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
    }
    sxy / sxx
}

pub(crate) fn mean_and_se(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, f64::NAN);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Fits both slopes per walk over the steps after the first `burn_in`
/// fraction and averages them across walks. Every walk must have run to
/// full length without touching the window collar.
pub fn estimate_speed<S>(walks: &[ObservedWalk<S>], burn_in: f64) -> Result<SpeedEstimate, AnalysisError> {
    if walks.is_empty() {
        return Err(AnalysisError::EmptyInput);
    }
    if !(0.0..1.0).contains(&burn_in) {
        return Err(AnalysisError::BadParameter(format!("burn-in fraction {burn_in}")));
    }
    if let Some((i, w)) = walks.iter().enumerate().find(|(_, w)| w.exited) {
        return Err(AnalysisError::TrajectoryExitsWindow { walk: i, steps: w.obs.len() - 1 });
    }
    let len = walks.iter().map(|w| w.obs.len()).min().expect("nonempty");
    let first = ((len - 1) as f64 * burn_in).ceil() as usize;
    if len < first + 3 {
        return Err(AnalysisError::TooShort(len - 1));
    }
    let xs: Vec<f64> = (first..len).map(|n| n as f64).collect();
    let hyperbolic = walks[0].obs[0].hyp.is_some();
    let mut speeds = Vec::with_capacity(walks.len());
    let mut decays = Vec::with_capacity(walks.len());
    for w in walks {
        let obs = &w.obs[first..len];
        let decay: Vec<f64> = obs.iter().map(|o| o.neg_log_r).collect();
        decays.push(ols_slope(&xs, &decay));
        if hyperbolic {
            let dist: Vec<f64> = obs.iter().map(|o| o.hyp.map_or(f64::NAN, |h| h.dist)).collect();
            speeds.push(ols_slope(&xs, &dist));
        }
    }
    let (decay_rate, decay_se) = mean_and_se(&decays);
    let (speed_hyp, speed_se) = if hyperbolic {
        let (m, se) = mean_and_se(&speeds);
        (Some(m), Some(se))
    } else {
        (None, None)
    };
    Ok(SpeedEstimate { speed_hyp, speed_se, decay_rate, decay_se, n_range: (first, len - 1), walks: walks.len() })
}

/// Outcome of the two-sided distance-to-boundary bound along one walk.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SandwichReport {
    pub checked: usize,
    pub lower_violations: usize,
    pub upper_violations: usize,
    /// Smallest `ln(gap) - ln(lower)` seen.
    pub lower_margin: f64,
    /// Smallest `ln(upper) - ln(gap)` seen.
    pub upper_margin: f64,
}

fn log_add_exp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    let m = a.max(b);
    m + ((a - m).exp() + (b - m).exp()).ln()
}

/// Checks `r_n exp(-c deg_n) <= 1 - |z_h(X_n)| <= 2 sum_{i=n}^N r_i + (1 - |z(X_N)|)`
/// at every step, in logarithms.
pub fn sandwich_check(obs: &[CircleObs], c_hat: f64) -> Option<SandwichReport> {
    let last = obs.last()?.hyp?;
    let mut report = SandwichReport {
        checked: 0,
        lower_violations: 0,
        upper_violations: 0,
        lower_margin: f64::INFINITY,
        upper_margin: f64::INFINITY,
    };
    // suffix log-sums of 2 r_i
    let mut suffix = f64::NEG_INFINITY;
    let mut uppers = vec![0.0; obs.len()];
    for (i, o) in obs.iter().enumerate().rev() {
        suffix = log_add_exp(suffix, std::f64::consts::LN_2 - o.neg_log_r);
        uppers[i] = log_add_exp(suffix, last.log_gap);
    }
    for (o, &upper) in obs.iter().zip(&uppers) {
        let h = o.hyp?;
        let lower = -o.neg_log_r - c_hat * o.deg as f64;
        let lm = h.log_gap_h - lower;
        let um = upper - h.log_gap_h;
        report.checked += 1;
        report.lower_violations += usize::from(lm < 0.0);
        report.upper_violations += usize::from(um < 0.0);
        report.lower_margin = report.lower_margin.min(lm);
        report.upper_margin = report.upper_margin.min(um);
    }
    Some(report)
}
