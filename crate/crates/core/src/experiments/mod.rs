//! Numerical experiments built on the thin-spectrum dynamics.

mod born;
mod drift;
mod equilibrium;
mod fit;
mod perturbation;
mod regime;
mod scaling;

pub use born::{born_ensemble, BornEnsembleResult, BornParams, Strategy, DEFAULT_SEED};
pub use drift::{energy_drift_scan, DriftHorizon, DriftRow, DriftScanResult};
pub use equilibrium::{
    equilibrium_collapse, equilibrium_order_scan, CollapseResult, EquilibriumRow, EquilibriumScan, FieldScaling,
};
pub use fit::{fit_log_log, LogLogFit};
pub use perturbation::{perturbation_study, PerturbationResult};
pub use regime::{regime_study, OverlapClass, RegimeStudyResult};
pub use scaling::{o_scan, scaling_scan, OScanResult, ScalingScanResult};

use crate::dynamics::{branch_selection_time, BranchPair, PropagatorConfig};
use crate::error::{Error, Result};
use crate::thin_spectrum::{build_ladder_model, build_lieb_mattis_model, ModelKind, QuantumState, ThinSpectrumModel};

/// Dimensionless field `b·(N/4)/(E₁ − E₀)` defining the two branch wavepackets.
/// At this value `|⟨L|R⟩|²` is about 2.5e-10.
pub const REFERENCE_BETA: f64 = 100.0;

/// Relative branch weight that counts as selected.
pub const DEFAULT_THRESHOLD: f64 = 0.99;

/// March step for selection searches, in units of `ħ/(N·o)`.
pub const SEARCH_STEP_UNITS: f64 = 0.02;

pub fn build_model(kind: ModelKind, n_particles: usize, cutoff: usize) -> Result<ThinSpectrumModel> {
    match kind {
        ModelKind::Ladder => build_ladder_model(n_particles, cutoff, 1.0),
        ModelKind::LiebMattis => build_lieb_mattis_model(n_particles, cutoff, 1.0),
        ModelKind::Custom => Err(Error::invalid("model_kind", "experiments need a ladder or lieb-mattis model")),
    }
}

pub(crate) fn search_config(n_particles: usize, o: f64) -> Result<PropagatorConfig> {
    if !(o > 0.0 && o.is_finite()) {
        return Err(Error::invalid("o", format!("must be > 0, got {o}")));
    }
    PropagatorConfig::new(o, SEARCH_STEP_UNITS / (n_particles as f64 * o))
}

/// Time for the favoured branch's relative weight to exceed `threshold`,
/// with the experiment error naming the grid point on a miss.
pub(crate) fn selection_time(
    state: &QuantumState,
    model: &ThinSpectrumModel,
    branches: &BranchPair,
    o: f64,
    threshold: f64,
) -> Result<f64> {
    let n = model.n_particles();
    let config = search_config(n, o)?;
    branch_selection_time(state, model, &config, branches, threshold, None)?.ok_or_else(|| {
        Error::Experiment(format!("no branch selection for N = {n}, o = {o:e} within the horizon 1e3/(N·o)"))
    })
}

pub(crate) fn validate_grid(field: &'static str, values: &[usize]) -> Result<()> {
    if values.is_empty() {
        return Err(Error::invalid(field, "empty grid"));
    }
    if values.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::invalid(field, "must be strictly increasing"));
    }
    Ok(())
}
