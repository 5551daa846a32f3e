use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{build_model, fit_log_log, selection_time, validate_grid, LogLogFit, DEFAULT_THRESHOLD, REFERENCE_BETA};
use crate::dynamics::{evolve_trajectory, BranchPair, PropagatorConfig};
use crate::error::{Error, Result};
use crate::thin_spectrum::ModelKind;

/// Grid points per trajectory.
pub const DRIFT_SAMPLES: usize = 400;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum DriftHorizon {
    /// Multiple of the measured cat selection time `τ(N)`.
    CollapseMultiple(f64),
    /// Fixed time in `ħ/J`; required when `o = 0`.
    Fixed(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DriftRow {
    pub n_particles: usize,
    pub horizon: f64,
    pub max_drift: f64,
    /// `E_{cutoff−1} − E₀`.
    pub spectral_range: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DriftScanResult {
    pub o: f64,
    pub rows: Vec<DriftRow>,
    /// Fit of `ln(max_drift)` against `ln N`; absent when a drift vanishes.
    pub fit: Option<LogLogFit>,
}

/// Largest `|⟨Ĥ₀⟩(t) − ⟨Ĥ₀⟩(0)|` along the cat-state trajectory for each size.
pub fn energy_drift_scan(
    n_values: &[usize],
    o: f64,
    kind: ModelKind,
    cutoff: usize,
    horizon: DriftHorizon,
) -> Result<DriftScanResult> {
    validate_grid("n_values", n_values)?;
    if !(o >= 0.0 && o.is_finite()) {
        return Err(Error::invalid("o", format!("must be >= 0, got {o}")));
    }
    match horizon {
        DriftHorizon::CollapseMultiple(m) if !(m > 0.0) || o == 0.0 => {
            return Err(Error::invalid("horizon", "collapse multiples need o > 0 and a positive multiple"));
        }
        DriftHorizon::Fixed(t) if !(t > 0.0 && t.is_finite()) => {
            return Err(Error::invalid("horizon", format!("must be > 0, got {t}")));
        }
        _ => {}
    }
    let rows: Vec<DriftRow> = n_values
        .par_iter()
        .map(|&n| {
            let model = build_model(kind, n, cutoff)?;
            let branches = BranchPair::from_model(&model, REFERENCE_BETA)?;
            let cat = branches.superposition(0.5)?;
            let t_end = match horizon {
                DriftHorizon::CollapseMultiple(m) => m * selection_time(&cat, &model, &branches, o, DEFAULT_THRESHOLD)?,
                DriftHorizon::Fixed(t) => t,
            };
            let dt = t_end / DRIFT_SAMPLES as f64;
            let grid: Vec<f64> = (0..=DRIFT_SAMPLES).map(|k| k as f64 * dt).collect();
            let config = PropagatorConfig::new(o, dt)?;
            let rec = evolve_trajectory(&cat, &model, &config, &grid, None)?;
            let e0 = rec.energy[0];
            let max_drift = rec.energy.iter().map(|e| (e - e0).abs()).fold(0.0, f64::max);
            let e = model.energies();
            Ok(DriftRow { n_particles: n, horizon: t_end, max_drift, spectral_range: e[e.len() - 1] - e[0] })
        })
        .collect::<Result<_>>()?;
    let fit = if rows.len() >= 2 && rows.iter().all(|r| r.max_drift > 0.0) {
        let x: Vec<f64> = rows.iter().map(|r| r.n_particles as f64).collect();
        let y: Vec<f64> = rows.iter().map(|r| r.max_drift).collect();
        Some(fit_log_log(&x, &y)?)
    } else {
        None
    };
    Ok(DriftScanResult { o, rows, fit })
}
