//! Thin-spectrum dynamics of a finite antiferromagnet under a weak non-unitary field.

pub mod angular;
pub mod dynamics;
pub mod error;
pub mod experiments;
pub mod linalg;
pub mod oracle;
pub mod thin_spectrum;

pub use dynamics::{
    branch_selection_time, collapse_time, dominant_mode, evolve_trajectory, generator, project_perturbation, propagate,
    Backend, BranchPair, Propagator, PropagatorConfig, TrajectoryRecord,
};
pub use error::{Error, Result};
pub use thin_spectrum::{
    broken_ground_state, build_ladder_model, build_lieb_mattis_model, energy_expectation, order_parameter_expectation,
    symmetric_ground_state, EquilibriumResult, ModelKind, QuantumState, ThinSpectrumModel,
};
