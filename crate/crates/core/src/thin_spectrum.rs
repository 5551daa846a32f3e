//! Thin-spectrum models, quantum states and equilibrium ground states.
//!
//! Units: ħ = J = 1 unless a coupling is passed explicitly. The
//! symmetry-breaking field enters as `+b·Ô` with `b ≥ 0`, so the favoured
//! ordered state carries negative `⟨Ô⟩`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::angular::staggered_element;
use crate::error::{Error, Result};
use crate::linalg::{CVector, C64};

/// Tolerance on the unit norm of a [`QuantumState`].
pub const NORM_TOLERANCE: f64 = 1e-12;

/// Weight allowed on the top tenth of retained levels before a
/// ground state is flagged as truncated.
pub const LEAKAGE_LIMIT: f64 = 1e-6;

pub const DEFAULT_CUTOFF: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ModelKind {
    /// Constant `N/4` order-parameter coupling on a `J n(n+1)/N` tower.
    Ladder,
    /// Exact `m = 0` sector of the infinite-range two-sublattice antiferromagnet.
    LiebMattis,
    /// User-supplied energies and order-parameter matrix.
    Custom,
}

impl std::str::FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace(['-', '_'], "").as_str() {
            "ladder" => Ok(ModelKind::Ladder),
            "liebmattis" => Ok(ModelKind::LiebMattis),
            _ => Err(Error::invalid("model_kind", format!("unknown model kind `{s}`"))),
        }
    }
}

impl std::fmt::Display for ModelKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let name = match self {
            ModelKind::Ladder => "ladder",
            ModelKind::LiebMattis => "lieb-mattis",
            ModelKind::Custom => "custom",
        };
        f.write_str(name)
    }
}

/// Truncated thin-spectrum tower: diagonal `Ĥ₀` plus the order-parameter matrix `Ô`.
#[derive(Debug, Clone, PartialEq)]
pub struct ThinSpectrumModel {
    n_particles: usize,
    energies: DVector<f64>,
    order_param: DMatrix<f64>,
    order_norm: f64,
    kind: ModelKind,
}

impl ThinSpectrumModel {
    /// Builds a model from explicit energies and a real symmetric `Ô`.
    pub fn custom(n_particles: usize, energies: Vec<f64>, order_param: DMatrix<f64>) -> Result<Self> {
        let cutoff = energies.len();
        if cutoff < 2 {
            return Err(Error::invalid("cutoff", format!("need at least 2 levels, got {cutoff}")));
        }
        if n_particles == 0 {
            return Err(Error::invalid("n_particles", "must be positive"));
        }
        if order_param.nrows() != cutoff || order_param.ncols() != cutoff {
            return Err(Error::invalid(
                "order_param",
                format!("shape {}x{} does not match {cutoff} levels", order_param.nrows(), order_param.ncols()),
            ));
        }
        if energies.iter().any(|e| !e.is_finite()) || order_param.iter().any(|x| !x.is_finite()) {
            return Err(Error::invalid("energies", "non-finite entry"));
        }
        if energies.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::invalid("energies", "must be non-decreasing"));
        }
        let asym = (&order_param - order_param.transpose()).amax();
        if asym > 1e-12 * order_param.amax().max(1.0) {
            return Err(Error::invalid("order_param", "must be symmetric"));
        }
        Ok(Self::assemble(n_particles, energies, order_param, ModelKind::Custom))
    }

    fn assemble(n_particles: usize, energies: Vec<f64>, order_param: DMatrix<f64>, kind: ModelKind) -> Self {
        let order_norm = SymmetricEigen::new(order_param.clone()).eigenvalues.amax();
        Self { n_particles, energies: DVector::from_vec(energies), order_param, order_norm, kind }
    }

    pub fn n_particles(&self) -> usize {
        self.n_particles
    }

    pub fn cutoff(&self) -> usize {
        self.energies.len()
    }

    pub fn energies(&self) -> &DVector<f64> {
        &self.energies
    }

    pub fn order_param(&self) -> &DMatrix<f64> {
        &self.order_param
    }

    /// Spectral norm of `Ô`.
    pub fn order_norm(&self) -> f64 {
        self.order_norm
    }

    pub fn kind(&self) -> ModelKind {
        self.kind
    }

    /// Full `Ĥ₀` as a dense matrix.
    pub fn hamiltonian(&self) -> DMatrix<f64> {
        DMatrix::from_diagonal(&self.energies)
    }

    /// Gap between the two lowest levels.
    pub fn first_gap(&self) -> f64 {
        self.energies[1] - self.energies[0]
    }

    /// Field `b` with `b·(N/4) / (E₁ − E₀) = beta`.
    pub fn field_for_beta(&self, beta: f64) -> f64 {
        beta * self.first_gap() / (self.n_particles as f64 / 4.0)
    }

    /// Same model with `Ô` replaced by `perturbation` (used for generic non-unitary fields).
    pub fn with_order_param(&self, perturbation: DMatrix<f64>) -> Result<Self> {
        Self::custom(self.n_particles, self.energies.as_slice().to_vec(), perturbation)
    }

    pub(crate) fn check_dim(&self, len: usize) -> Result<()> {
        if len != self.cutoff() {
            return Err(Error::invalid("state", format!("dimension {len} does not match cutoff {}", self.cutoff())));
        }
        Ok(())
    }
}

fn check_common(n_particles: usize, cutoff: usize, coupling_j: f64) -> Result<()> {
    if cutoff < 2 {
        return Err(Error::invalid("cutoff", format!("need cutoff >= 2, got {cutoff}")));
    }
    if n_particles < 2 {
        return Err(Error::invalid("n_particles", format!("need n_particles >= 2, got {n_particles}")));
    }
    if !(coupling_j > 0.0 && coupling_j.is_finite()) {
        return Err(Error::invalid("coupling_j", format!("must be positive, got {coupling_j}")));
    }
    Ok(())
}

fn tower_energies(n_particles: usize, cutoff: usize, coupling_j: f64) -> Vec<f64> {
    let n = n_particles as f64;
    (0..cutoff).map(|k| coupling_j * (k * (k + 1)) as f64 / n).collect()
}

/// Ladder tower `E_n = J n(n+1)/N` with constant couplings `O_{n,n±1} = N/4`.
pub fn build_ladder_model(n_particles: usize, cutoff: usize, coupling_j: f64) -> Result<ThinSpectrumModel> {
    check_common(n_particles, cutoff, coupling_j)?;
    let quarter = n_particles as f64 / 4.0;
    let mut order = DMatrix::zeros(cutoff, cutoff);
    for k in 0..cutoff - 1 {
        order[(k, k + 1)] = quarter;
        order[(k + 1, k)] = quarter;
    }
    Ok(ThinSpectrumModel::assemble(
        n_particles,
        tower_energies(n_particles, cutoff, coupling_j),
        order,
        ModelKind::Ladder,
    ))
}

/// Lieb–Mattis thin spectrum: sublattice spins `N/4`, total spin `n`, `m = 0`.
///
/// Energies are relative to the singlet; `Ô = S_A^z − S_B^z` is tridiagonal
/// in total spin.
pub fn build_lieb_mattis_model(n_particles: usize, cutoff: usize, coupling_j: f64) -> Result<ThinSpectrumModel> {
    check_common(n_particles, cutoff, coupling_j)?;
    if n_particles % 4 != 0 {
        return Err(Error::invalid("n_particles", format!("{n_particles} is not divisible by 4")));
    }
    let sector = n_particles / 2 + 1;
    if cutoff > sector {
        return Err(Error::invalid("cutoff", format!("{cutoff} exceeds the {sector} total-spin levels of the sector")));
    }
    let two_s = (n_particles / 2) as i64;
    let mut order = DMatrix::zeros(cutoff, cutoff);
    for k in 0..cutoff - 1 {
        let el = staggered_element(two_s, k as i64);
        order[(k, k + 1)] = el;
        order[(k + 1, k)] = el;
    }
    Ok(ThinSpectrumModel::assemble(
        n_particles,
        tower_energies(n_particles, cutoff, coupling_j),
        order,
        ModelKind::LiebMattis,
    ))
}

/// Complex amplitude vector over the thin-spectrum basis, always unit norm.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantumState {
    amplitudes: CVector,
}

impl QuantumState {
    /// Normalizes `amplitudes`; fails on a zero or non-finite vector.
    pub fn new(amplitudes: CVector) -> Result<Self> {
        let norm = amplitudes.norm();
        if !(norm.is_finite() && norm > 0.0) {
            return Err(Error::invalid("amplitudes", "cannot normalize a zero or non-finite vector"));
        }
        Ok(Self { amplitudes: amplitudes / C64::new(norm, 0.0) })
    }

    pub fn from_real(amplitudes: &[f64]) -> Result<Self> {
        Self::new(CVector::from_iterator(amplitudes.len(), amplitudes.iter().map(|&x| C64::new(x, 0.0))))
    }

    pub fn basis(dim: usize, index: usize) -> Result<Self> {
        if index >= dim {
            return Err(Error::invalid("index", format!("{index} outside dimension {dim}")));
        }
        let mut v = CVector::zeros(dim);
        v[index] = C64::new(1.0, 0.0);
        Ok(Self { amplitudes: v })
    }

    /// `Σ cᵢ ψᵢ`, renormalized.
    pub fn superpose(parts: &[(C64, &QuantumState)]) -> Result<Self> {
        let dim = parts.first().map(|(_, s)| s.dim()).ok_or_else(|| Error::invalid("parts", "empty"))?;
        let mut acc = CVector::zeros(dim);
        for (c, s) in parts {
            if s.dim() != dim {
                return Err(Error::invalid("parts", "dimension mismatch"));
            }
            acc += s.amplitudes() * *c;
        }
        Self::new(acc)
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> CVector {
        self.amplitudes
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn overlap(&self, other: &QuantumState) -> C64 {
        self.amplitudes.dotc(&other.amplitudes)
    }

    /// `|⟨self|other⟩|²`.
    pub fn overlap_sq(&self, other: &QuantumState) -> f64 {
        self.overlap(other).norm_sqr()
    }

    /// Inverse participation ratio reciprocal, `1 / Σ|ψₙ|⁴`.
    pub fn participation_ratio(&self) -> f64 {
        1.0 / self.amplitudes.iter().map(|z| z.norm_sqr().powi(2)).sum::<f64>()
    }

    /// Removes the component along `other` and renormalizes.
    pub fn orthogonalized_against(&self, other: &QuantumState) -> Result<Self> {
        let proj = other.amplitudes.dotc(&self.amplitudes);
        Self::new(&self.amplitudes - other.amplitudes() * proj)
    }
}

/// Lowest eigenpair of `Ĥ₀ + b·Ô`.
#[derive(Debug, Clone, PartialEq)]
pub struct EquilibriumResult {
    pub state: QuantumState,
    pub energy: f64,
    pub order_expectation: f64,
    /// Weight on the top 10% of retained levels exceeded [`LEAKAGE_LIMIT`].
    pub truncation_warning: bool,
    pub leakage: f64,
}

/// The isotropic `n = 0` basis state.
pub fn symmetric_ground_state(model: &ThinSpectrumModel) -> QuantumState {
    QuantumState::basis(model.cutoff(), 0).expect("cutoff >= 2")
}

/// Weight carried by the top tenth (at least one) of the retained levels.
pub fn top_level_weight(state: &QuantumState) -> f64 {
    let dim = state.dim();
    let top = dim.div_ceil(10).max(1);
    state.amplitudes().iter().skip(dim - top).map(|z| z.norm_sqr()).sum()
}

/// Symmetry-broken ground state of `Ĥ₀ + b·Ô` on the truncated basis.
pub fn broken_ground_state(model: &ThinSpectrumModel, field_b: f64) -> Result<EquilibriumResult> {
    if !(field_b >= 0.0 && field_b.is_finite()) {
        return Err(Error::invalid("field_b", format!("must be a non-negative number, got {field_b}")));
    }
    let dim = model.cutoff();
    if field_b == 0.0 {
        // Ĥ₀ is diagonal and non-decreasing, so n = 0 is (one of) the lowest.
        let state = symmetric_ground_state(model);
        let leakage = top_level_weight(&state);
        return Ok(EquilibriumResult {
            state,
            energy: model.energies()[0],
            order_expectation: 0.0,
            truncation_warning: false,
            leakage,
        });
    }
    let h = model.hamiltonian() + model.order_param() * field_b;
    let eig = SymmetricEigen::new(h);

    let lowest = eig.eigenvalues.min();
    let scale = eig.eigenvalues.amax().max(1.0);
    let degenerate: Vec<usize> = (0..dim).filter(|&i| eig.eigenvalues[i] - lowest <= 1e-12 * scale).collect();

    // Within a degenerate lowest eigenspace pick the vector with maximal n = 0 amplitude.
    let mut vec = DVector::<f64>::zeros(dim);
    if degenerate.len() == 1 {
        vec.copy_from(&eig.eigenvectors.column(degenerate[0]));
    } else {
        for &i in &degenerate {
            let col = eig.eigenvectors.column(i);
            vec += col * col[0];
        }
        if vec.norm() < 1e-14 {
            vec.copy_from(&eig.eigenvectors.column(degenerate[0]));
        }
    }
    if vec[0] < 0.0 || (vec[0] == 0.0 && vec.iter().find(|x| **x != 0.0).is_some_and(|x| *x < 0.0)) {
        vec = -vec;
    }
    let amps: Vec<f64> = vec.iter().copied().collect();
    let state = QuantumState::from_real(&amps)?;
    let order_expectation = order_parameter_expectation(model, &state)?;
    let energy = real_expectation(&model.hamiltonian(), &state) + field_b * order_expectation;
    let leakage = top_level_weight(&state);
    Ok(EquilibriumResult { state, energy, order_expectation, truncation_warning: leakage > LEAKAGE_LIMIT, leakage })
}

pub(crate) fn real_expectation(op: &DMatrix<f64>, state: &QuantumState) -> f64 {
    let psi = state.amplitudes();
    let mut acc = C64::new(0.0, 0.0);
    for j in 0..psi.len() {
        let mut col = C64::new(0.0, 0.0);
        for i in 0..psi.len() {
            let o = op[(i, j)];
            if o != 0.0 {
                col += psi[i].conj() * o;
            }
        }
        acc += col * psi[j];
    }
    acc.re
}

/// `⟨ψ|Ô|ψ⟩`, checked to be real.
pub fn order_parameter_expectation(model: &ThinSpectrumModel, state: &QuantumState) -> Result<f64> {
    model.check_dim(state.dim())?;
    let psi = state.amplitudes();
    let mut acc = C64::new(0.0, 0.0);
    for j in 0..psi.len() {
        for i in 0..psi.len() {
            let o = model.order_param()[(i, j)];
            if o != 0.0 {
                acc += psi[i].conj() * o * psi[j];
            }
        }
    }
    let scale = model.order_norm().max(1.0);
    if acc.im.abs() > 1e-12 * scale {
        return Err(Error::InvalidModel(format!("order parameter expectation has imaginary part {:e}", acc.im)));
    }
    Ok(acc.re)
}

/// `⟨ψ|Ĥ₀|ψ⟩`.
pub fn energy_expectation(model: &ThinSpectrumModel, state: &QuantumState) -> Result<f64> {
    model.check_dim(state.dim())?;
    Ok(state.amplitudes().iter().zip(model.energies().iter()).map(|(z, e)| z.norm_sqr() * e).sum())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ladder_energies() {
        let m = build_ladder_model(100, 20, 1.0).unwrap();
        assert!((m.energies()[1] - 0.02).abs() < 1e-15);
        assert!((m.energies()[2] - 0.06).abs() < 1e-15);
        assert_eq!(m.kind(), ModelKind::Ladder);
        assert_eq!(m.order_param()[(3, 4)], 25.0);
        assert_eq!(m.order_param()[(3, 3)], 0.0);
        assert_eq!(m.order_param()[(3, 5)], 0.0);
    }

    #[test]
    fn ladder_spacing_halves_when_n_doubles() {
        let a = build_ladder_model(100, 20, 1.0).unwrap();
        let b = build_ladder_model(200, 20, 1.0).unwrap();
        assert!((b.energies()[1] - 0.01).abs() < 1e-15);
        for k in 0..19 {
            let da = a.energies()[k + 1] - a.energies()[k];
            let db = b.energies()[k + 1] - b.energies()[k];
            assert_eq!(db * 200.0, da * 100.0);
        }
    }

    #[test]
    fn ladder_rejects_bad_arguments() {
        match build_ladder_model(100, 1, 1.0) {
            Err(Error::InvalidArgument { field, .. }) => assert_eq!(field, "cutoff"),
            other => panic!("unexpected {other:?}"),
        }
        match build_ladder_model(1, 4, 1.0) {
            Err(Error::InvalidArgument { field, .. }) => assert_eq!(field, "n_particles"),
            other => panic!("unexpected {other:?}"),
        }
        assert!(build_ladder_model(10, 4, 0.0).is_err());
    }

    #[test]
    fn lieb_mattis_rejects_bad_arguments() {
        match build_lieb_mattis_model(6, 2, 1.0) {
            Err(Error::InvalidArgument { field, .. }) => assert_eq!(field, "n_particles"),
            other => panic!("unexpected {other:?}"),
        }
        match build_lieb_mattis_model(8, 6, 1.0) {
            Err(Error::InvalidArgument { field, .. }) => assert_eq!(field, "cutoff"),
            other => panic!("unexpected {other:?}"),
        }
        assert!(build_lieb_mattis_model(8, 5, 1.0).is_ok());
    }

    #[test]
    fn lieb_mattis_spacing_scales_with_n() {
        let a = build_lieb_mattis_model(400, 30, 1.0).unwrap();
        let b = build_lieb_mattis_model(800, 30, 1.0).unwrap();
        for k in 0..29 {
            let da = (a.energies()[k + 1] - a.energies()[k]) * 400.0;
            let db = (b.energies()[k + 1] - b.energies()[k]) * 800.0;
            assert!((da - db).abs() < 1e-12);
        }
    }

    #[test]
    fn symmetric_state_has_zero_order() {
        for m in [build_ladder_model(100, 16, 1.0).unwrap(), build_lieb_mattis_model(8, 3, 1.0).unwrap()] {
            let s = symmetric_ground_state(&m);
            assert_eq!(s.amplitudes()[0], C64::new(1.0, 0.0));
            assert!(s.amplitudes().iter().skip(1).all(|z| *z == C64::new(0.0, 0.0)));
            assert_eq!(order_parameter_expectation(&m, &s).unwrap(), 0.0);
        }
    }

    #[test]
    fn two_level_order_expectation() {
        let m = build_ladder_model(100, 4, 1.0).unwrap();
        let plus = QuantumState::from_real(&[1.0, 1.0, 0.0, 0.0]).unwrap();
        let minus = QuantumState::from_real(&[1.0, -1.0, 0.0, 0.0]).unwrap();
        assert!((order_parameter_expectation(&m, &plus).unwrap() - 25.0).abs() < 1e-12);
        assert!((order_parameter_expectation(&m, &minus).unwrap() + 25.0).abs() < 1e-12);
        let wrong = QuantumState::from_real(&[1.0, 0.0]).unwrap();
        assert!(order_parameter_expectation(&m, &wrong).is_err());
    }

    #[test]
    fn zero_field_gives_symmetric_state() {
        for m in [build_ladder_model(100, 16, 1.0).unwrap(), build_lieb_mattis_model(12, 7, 1.0).unwrap()] {
            let r = broken_ground_state(&m, 0.0).unwrap();
            assert_eq!(r.state, symmetric_ground_state(&m));
            assert_eq!(r.order_expectation, 0.0);
            assert!(!r.truncation_warning);
        }
    }

    #[test]
    fn broken_state_at_beta_thousand_is_ordered() {
        // b·(N/4)/E₁ = 10³ on N = 1000, 200 levels; reference from an
        // independent dense eigen-solve: ⟨Ô⟩/(N/4) = -1.96740416213949
        let m = build_ladder_model(1000, 200, 1.0).unwrap();
        let b = m.field_for_beta(1e3);
        let r = broken_ground_state(&m, b).unwrap();
        let normalized = r.order_expectation / 250.0;
        assert!(normalized.abs() >= 0.9);
        assert!((normalized + 1.96740416213949).abs() < 1e-10);
        assert!(!r.truncation_warning);
    }

    #[test]
    fn truncation_is_flagged() {
        let m = build_ladder_model(1000, 8, 1.0).unwrap();
        let r = broken_ground_state(&m, m.field_for_beta(1e4)).unwrap();
        assert!(r.truncation_warning);
        assert!(r.leakage > LEAKAGE_LIMIT);
    }

    #[test]
    fn degenerate_tie_break_prefers_n0() {
        let m = ThinSpectrumModel::custom(4, vec![0.0, 0.0, 1.0], DMatrix::zeros(3, 3)).unwrap();
        let r = broken_ground_state(&m, 0.0).unwrap();
        assert_eq!(r.state, symmetric_ground_state(&m));
    }

    #[test]
    fn negative_field_rejected() {
        let m = build_ladder_model(16, 4, 1.0).unwrap();
        assert!(broken_ground_state(&m, -1.0).is_err());
    }

    #[test]
    fn custom_model_validation() {
        let asym = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 2.0, 0.0]);
        assert!(ThinSpectrumModel::custom(2, vec![0.0, 1.0], asym).is_err());
        assert!(ThinSpectrumModel::custom(2, vec![1.0, 0.0], DMatrix::zeros(2, 2)).is_err());
    }
}
