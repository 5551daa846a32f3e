use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::build_model;
use crate::dynamics::{dominant_mode, project_perturbation};
use crate::error::{Error, Result};
use crate::thin_spectrum::{ModelKind, ThinSpectrumModel};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerturbationResult {
    pub n_particles: usize,
    pub o: f64,
    pub epsilon: f64,
    /// Squared overlap of each perturbed dominant mode with the unperturbed one.
    pub overlaps: Vec<f64>,
}

impl PerturbationResult {
    pub fn count_at_least(&self, bound: f64) -> usize {
        self.overlaps.iter().filter(|&&x| x >= bound).count()
    }
}

/// Random symmetric matrix orthogonal to `Ô` with unit spectral norm.
fn random_remainder(model: &ThinSpectrumModel, rng: &mut ChaCha8Rng) -> Result<DMatrix<f64>> {
    let n = model.cutoff();
    let mut p = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let v = rng.random_range(-1.0..1.0);
            p[(i, j)] = v;
            p[(j, i)] = v;
        }
    }
    let (_, r) = project_perturbation(&p, model)?;
    let norm = r.clone().symmetric_eigenvalues().amax();
    if norm == 0.0 {
        return Err(Error::Experiment("random remainder vanished".into()));
    }
    Ok(r / norm)
}

/// Dominant modes of `Ĥ₀ − i(o·Ô + ε·R)` for `samples` random remainders `R`.
pub fn perturbation_study(
    kind: ModelKind,
    n_particles: usize,
    cutoff: usize,
    o: f64,
    epsilon_ratio: f64,
    samples: usize,
    seed: u64,
) -> Result<PerturbationResult> {
    if !(epsilon_ratio >= 0.0 && epsilon_ratio.is_finite()) {
        return Err(Error::invalid("epsilon_ratio", format!("must be >= 0, got {epsilon_ratio}")));
    }
    let model = build_model(kind, n_particles, cutoff)?;
    let (reference, _) = dominant_mode(&model, o)?;
    let overlaps = (0..samples as u64)
        .into_par_iter()
        .map(|sample| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(sample);
            let r = random_remainder(&model, &mut rng)?;
            let perturbed = model.with_order_param(model.order_param() + r * epsilon_ratio)?;
            let (mode, _) = dominant_mode(&perturbed, o)?;
            Ok(mode.overlap_sq(&reference))
        })
        .collect::<Result<_>>()?;
    Ok(PerturbationResult { n_particles, o, epsilon: epsilon_ratio * o, overlaps })
}
