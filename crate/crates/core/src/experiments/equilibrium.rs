use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{build_model, validate_grid};
use crate::error::{Error, Result};
use crate::thin_spectrum::{broken_ground_state, ModelKind};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EquilibriumRow {
    pub b: f64,
    pub n_times_b: f64,
    /// `−⟨Ô⟩/(N/4)` in the ground state of `Ĥ₀ + b·Ô`; non-negative.
    pub order_normalized: f64,
    pub truncation_warning: bool,
    pub leakage: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquilibriumScan {
    pub n_particles: usize,
    pub rows: Vec<EquilibriumRow>,
}

pub fn equilibrium_order_scan(
    n_particles: usize,
    b_values: &[f64],
    kind: ModelKind,
    cutoff: usize,
) -> Result<EquilibriumScan> {
    if b_values.iter().any(|b| !(*b >= 0.0 && b.is_finite())) {
        return Err(Error::invalid("b_values", "must be finite and non-negative"));
    }
    if b_values.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::invalid("b_values", "must be strictly increasing"));
    }
    let model = build_model(kind, n_particles, cutoff)?;
    let scale = n_particles as f64 / 4.0;
    let rows = b_values
        .par_iter()
        .map(|&b| {
            let eq = broken_ground_state(&model, b)?;
            Ok(EquilibriumRow {
                b,
                n_times_b: n_particles as f64 * b,
                order_normalized: (-eq.order_expectation / scale).max(0.0),
                truncation_warning: eq.truncation_warning,
                leakage: eq.leakage,
            })
        })
        .collect::<Result<_>>()?;
    Ok(EquilibriumScan { n_particles, rows })
}

/// Scaling variable along which curves for different sizes are compared.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FieldScaling {
    /// `x = N·b`.
    Linear,
    /// `x = N²·b`, the combination that fixes the branch shape on the ladder.
    Quadratic,
}

impl FieldScaling {
    fn field(self, x: f64, n: usize) -> f64 {
        match self {
            FieldScaling::Linear => x / n as f64,
            FieldScaling::Quadratic => x / (n as f64 * n as f64),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CollapseResult {
    pub scaling: FieldScaling,
    pub scaled_fields: Vec<f64>,
    pub scans: Vec<EquilibriumScan>,
    /// Largest difference between sizes at a common scaled field.
    pub max_spread: f64,
    pub any_truncated: bool,
}

/// Runs one scan per size on a common grid of the scaling variable and
/// reports the maximum vertical spread between the curves.
pub fn equilibrium_collapse(
    n_values: &[usize],
    scaled_fields: &[f64],
    scaling: FieldScaling,
    kind: ModelKind,
    cutoff: usize,
) -> Result<CollapseResult> {
    validate_grid("n_values", n_values)?;
    let scans: Vec<EquilibriumScan> = n_values
        .iter()
        .map(|&n| {
            let b: Vec<f64> = scaled_fields.iter().map(|&x| scaling.field(x, n)).collect();
            equilibrium_order_scan(n, &b, kind, cutoff)
        })
        .collect::<Result<_>>()?;
    let max_spread = (0..scaled_fields.len())
        .map(|i| {
            let ys = scans.iter().map(|s| s.rows[i].order_normalized);
            let hi = ys.clone().fold(f64::NEG_INFINITY, f64::max);
            let lo = ys.fold(f64::INFINITY, f64::min);
            hi - lo
        })
        .fold(0.0, f64::max);
    let any_truncated = scans.iter().flat_map(|s| &s.rows).any(|r| r.truncation_warning);
    Ok(CollapseResult { scaling, scaled_fields: scaled_fields.to_vec(), scans, max_spread, any_truncated })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_field_has_no_order() {
        for n in [256, 1024] {
            let scan = equilibrium_order_scan(n, &[0.0, 1e-4], ModelKind::Ladder, 32).unwrap();
            assert_eq!(scan.rows[0].order_normalized, 0.0);
            assert!(scan.rows[1].order_normalized > 0.0);
        }
    }

    #[test]
    fn order_grows_with_field() {
        let b: Vec<f64> = (0..20).map(|k| 1e-5 * 1.6f64.powi(k)).collect();
        let scan = equilibrium_order_scan(512, &b, ModelKind::Ladder, 64).unwrap();
        for w in scan.rows.windows(2) {
            assert!(w[1].order_normalized >= w[0].order_normalized - 1e-12);
        }
    }

    #[test]
    fn quadratic_variable_collapses_ladder_curves() {
        let x: Vec<f64> = (0..12).map(|k| 0.5 * 2f64.powi(k)).collect();
        let c = equilibrium_collapse(&[256, 1024], &x, FieldScaling::Quadratic, ModelKind::Ladder, 64).unwrap();
        assert!(c.max_spread < 1e-9, "{}", c.max_spread);
    }

    #[test]
    fn rejects_decreasing_fields() {
        assert!(equilibrium_order_scan(256, &[1e-3, 1e-4], ModelKind::Ladder, 16).is_err());
        assert!(equilibrium_order_scan(256, &[-1.0], ModelKind::Ladder, 16).is_err());
    }
}
