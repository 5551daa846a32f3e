use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{build_model, fit_log_log, selection_time, validate_grid, LogLogFit, REFERENCE_BETA};
use crate::dynamics::BranchPair;
use crate::error::{Error, Result};
use crate::thin_spectrum::ModelKind;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingScanResult {
    pub n_values: Vec<usize>,
    pub collapse_times: Vec<f64>,
    pub fit_slope: f64,
    pub fit_intercept: f64,
    pub fit_r_squared: f64,
    pub residuals: Vec<f64>,
    pub o: f64,
    pub threshold: f64,
}

impl ScalingScanResult {
    /// `τ·N·o` per point; constant when `τ ∝ 1/(N·o)`.
    pub fn scaled_times(&self) -> Vec<f64> {
        self.n_values.iter().zip(&self.collapse_times).map(|(&n, t)| t * n as f64 * self.o).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OScanResult {
    pub n_particles: usize,
    pub o_values: Vec<f64>,
    pub collapse_times: Vec<f64>,
    pub fit: LogLogFit,
}

fn cat_collapse_time(kind: ModelKind, n: usize, cutoff: usize, o: f64, threshold: f64) -> Result<f64> {
    let model = build_model(kind, n, cutoff)?;
    let branches = BranchPair::from_model(&model, REFERENCE_BETA)?;
    let cat = branches.superposition(0.5)?;
    selection_time(&cat, &model, &branches, o, threshold)
}

fn check_threshold(threshold: f64) -> Result<()> {
    if !(threshold > 0.5 && threshold < 1.0) {
        return Err(Error::invalid("threshold", format!("must lie in (0.5, 1), got {threshold}")));
    }
    Ok(())
}

/// Selection time of the equal-weight cat state across system sizes, with a
/// log-log fit of `τ` against `N`.
pub fn scaling_scan(
    n_values: &[usize],
    o: f64,
    kind: ModelKind,
    cutoff: usize,
    threshold: f64,
) -> Result<ScalingScanResult> {
    validate_grid("n_values", n_values)?;
    if n_values.len() < 4 || n_values[n_values.len() - 1] < 4 * n_values[0] {
        return Err(Error::invalid("n_values", "need at least 4 sizes spanning 2 octaves"));
    }
    check_threshold(threshold)?;
    let collapse_times: Vec<f64> =
        n_values.par_iter().map(|&n| cat_collapse_time(kind, n, cutoff, o, threshold)).collect::<Result<_>>()?;
    let x: Vec<f64> = n_values.iter().map(|&n| n as f64).collect();
    let fit = fit_log_log(&x, &collapse_times)?;
    Ok(ScalingScanResult {
        n_values: n_values.to_vec(),
        collapse_times,
        fit_slope: fit.slope,
        fit_intercept: fit.intercept,
        fit_r_squared: fit.r_squared,
        residuals: fit.residuals,
        o,
        threshold,
    })
}

/// The dual scan: fixed `N`, varying field strength.
pub fn o_scan(
    n_particles: usize,
    o_values: &[f64],
    kind: ModelKind,
    cutoff: usize,
    threshold: f64,
) -> Result<OScanResult> {
    if o_values.len() < 2 || o_values.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::invalid("o_values", "need at least two increasing values"));
    }
    check_threshold(threshold)?;
    let collapse_times: Vec<f64> = o_values
        .par_iter()
        .map(|&o| cat_collapse_time(kind, n_particles, cutoff, o, threshold))
        .collect::<Result<_>>()?;
    let fit = fit_log_log(o_values, &collapse_times)?;
    Ok(OScanResult { n_particles, o_values: o_values.to_vec(), collapse_times, fit })
}
