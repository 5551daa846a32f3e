use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{build_model, selection_time, validate_grid, REFERENCE_BETA};
use crate::dynamics::BranchPair;
use crate::error::{Error, Result};
use crate::thin_spectrum::{ModelKind, QuantumState};

/// Squared weight on the favoured branch for the finite-overlap recipe.
pub const FINITE_OVERLAP_WEIGHT: f64 = 0.1;

/// Relative branch weight that ends the selection delay.
pub const DELAY_THRESHOLD: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum OverlapClass {
    FiniteOverlap,
    ZeroOverlap,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegimeStudyResult {
    pub n_values: Vec<usize>,
    pub selection_delays: Vec<f64>,
    pub overlap_class: OverlapClass,
    /// `|⟨L|ψ₀⟩|²` per size.
    pub initial_overlaps: Vec<f64>,
}

fn initial_state(class: OverlapClass, branches: &BranchPair) -> Result<QuantumState> {
    match class {
        OverlapClass::FiniteOverlap => branches.superposition(FINITE_OVERLAP_WEIGHT),
        OverlapClass::ZeroOverlap => {
            let psi = branches.rival.orthogonalized_against(&branches.favoured)?;
            let residual = psi.overlap_sq(&branches.favoured);
            if residual > 1e-12 {
                return Err(Error::Experiment(format!("zero-overlap state retains overlap {residual:e}")));
            }
            Ok(psi)
        }
    }
}

/// Selection delays from a finite-overlap start and from a start orthogonal
/// to the favoured branch, on the same size grid.
pub fn regime_study(
    n_values: &[usize],
    o: f64,
    kind: ModelKind,
    cutoff: usize,
) -> Result<(RegimeStudyResult, RegimeStudyResult)> {
    validate_grid("n_values", n_values)?;
    let rows: Vec<[(f64, f64); 2]> = n_values
        .par_iter()
        .map(|&n| {
            let model = build_model(kind, n, cutoff)?;
            let branches = BranchPair::from_model(&model, REFERENCE_BETA)?;
            let mut out = [(0.0, 0.0); 2];
            for (slot, class) in out.iter_mut().zip([OverlapClass::FiniteOverlap, OverlapClass::ZeroOverlap]) {
                let psi = initial_state(class, &branches)?;
                let delay = selection_time(&psi, &model, &branches, o, DELAY_THRESHOLD)?;
                *slot = (delay, psi.overlap_sq(&branches.favoured));
            }
            Ok(out)
        })
        .collect::<Result<_>>()?;
    let build = |idx: usize, class| RegimeStudyResult {
        n_values: n_values.to_vec(),
        selection_delays: rows.iter().map(|r| r[idx].0).collect(),
        overlap_class: class,
        initial_overlaps: rows.iter().map(|r| r[idx].1).collect(),
    };
    Ok((build(0, OverlapClass::FiniteOverlap), build(1, OverlapClass::ZeroOverlap)))
}
