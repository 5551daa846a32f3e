//! Non-unitary time evolution under `K = Ĥ₀ − i·o·Ô`.
//!
//! The physical state at time `t` is `exp(−i t K) ψ₀` divided by its norm.
//! `K` is complex-symmetric (`Kᵀ = K`) but not Hermitian, so its
//! eigenvectors are not orthogonal and the raw norm grows or decays.

use nalgebra::{DMatrix, Dyn, LU};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, CVector, ComplexEigen, C64};
use crate::thin_spectrum::{
    broken_ground_state, energy_expectation, order_parameter_expectation, QuantumState, ThinSpectrumModel,
};

/// Largest `o·t·‖Ô‖` a single-shot exponential may carry.
pub const SINGLE_SHOT_LIMIT: f64 = 500.0;

pub const DEFAULT_REL_TOLERANCE: f64 = 1e-10;

/// Horizon multiplier for collapse searches, in units of `ħ/(N·o)`.
pub const DEFAULT_HORIZON_UNITS: f64 = 1e3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Backend {
    /// General complex eigendecomposition of `K`.
    DenseEigen,
    /// Padé scaling and squaring of `−i t K`.
    ScalingSquaring,
    /// Substepped Taylor action with per-substep renormalization.
    SteppedIntegration,
}

impl std::str::FromStr for Backend {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace(['-', '_'], "").as_str() {
            "denseeigen" => Ok(Backend::DenseEigen),
            "scalingsquaring" => Ok(Backend::ScalingSquaring),
            "steppedintegration" | "stepped" => Ok(Backend::SteppedIntegration),
            _ => Err(Error::invalid("backend", format!("unknown backend `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PropagatorConfig {
    pub field_strength_o: f64,
    pub time_step: f64,
    pub rel_tolerance: f64,
    pub backend: Backend,
}

impl PropagatorConfig {
    pub fn new(field_strength_o: f64, time_step: f64) -> Result<Self> {
        let config = Self {
            field_strength_o,
            time_step,
            rel_tolerance: DEFAULT_REL_TOLERANCE,
            backend: Backend::ScalingSquaring,
        };
        config.validate()?;
        Ok(config)
    }

    pub fn with_backend(mut self, backend: Backend) -> Self {
        self.backend = backend;
        self
    }

    pub fn with_tolerance(mut self, rel_tolerance: f64) -> Result<Self> {
        self.rel_tolerance = rel_tolerance;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.field_strength_o >= 0.0 && self.field_strength_o.is_finite()) {
            return Err(Error::invalid("field_strength_o", format!("must be >= 0, got {}", self.field_strength_o)));
        }
        if !(self.time_step > 0.0 && self.time_step.is_finite()) {
            return Err(Error::invalid("time_step", format!("must be > 0, got {}", self.time_step)));
        }
        if !(self.rel_tolerance > 0.0 && self.rel_tolerance <= 1e-4) {
            return Err(Error::invalid("rel_tolerance", format!("must lie in (0, 1e-4], got {}", self.rel_tolerance)));
        }
        Ok(())
    }
}

/// `K = Ĥ₀ − i·o·Ô`.
pub fn generator(model: &ThinSpectrumModel, o: f64) -> Result<CMatrix> {
    if !(o >= 0.0 && o.is_finite()) {
        return Err(Error::invalid("o", format!("must be >= 0, got {o}")));
    }
    let n = model.cutoff();
    let e = model.energies();
    let op = model.order_param();
    Ok(CMatrix::from_fn(n, n, |i, j| {
        let re = if i == j { e[i] } else { 0.0 };
        C64::new(re, -o * op[(i, j)])
    }))
}

struct EigenCache {
    values: Vec<C64>,
    vectors: CMatrix,
    lu: LU<C64, Dyn, Dyn>,
}

/// Reusable propagator for one model and configuration.
///
/// Caches the eigendecomposition (DenseEigen) or the most recent step matrix
/// (ScalingSquaring), so marching on a uniform grid costs one mat-vec per step.
pub struct Propagator {
    generator: CMatrix,
    config: PropagatorConfig,
    growth_bound: f64,
    eigen: Option<EigenCache>,
    step_cache: Option<(f64, CMatrix)>,
}

impl Propagator {
    pub fn new(model: &ThinSpectrumModel, config: &PropagatorConfig) -> Result<Self> {
        config.validate()?;
        let generator = generator(model, config.field_strength_o)?;
        let mut prop = Self {
            generator,
            config: *config,
            growth_bound: config.field_strength_o * model.order_norm(),
            eigen: None,
            step_cache: None,
        };
        if config.backend == Backend::DenseEigen {
            prop.eigen = Some(prop.decompose()?);
        }
        Ok(prop)
    }

    fn decompose(&self) -> Result<EigenCache> {
        let ComplexEigen { values, vectors, max_residual } = linalg::complex_eigen(&self.generator)?;
        let bound = 1e-10 * self.generator.norm().max(f64::MIN_POSITIVE);
        if max_residual > bound {
            return Err(Error::EigenResidual { residual: max_residual, bound });
        }
        let lu = vectors.clone().lu();
        Ok(EigenCache { values, vectors, lu })
    }

    pub fn generator(&self) -> &CMatrix {
        &self.generator
    }

    pub fn config(&self) -> &PropagatorConfig {
        &self.config
    }

    /// One exponential of `dt` without splitting. Returns the normalized
    /// vector and `ln ‖exp(−i dt K) v‖`.
    pub fn single_shot(&mut self, v: &CVector, dt: f64) -> Result<(CVector, f64)> {
        let exponent = self.growth_bound * dt;
        if self.config.backend != Backend::SteppedIntegration && exponent > SINGLE_SHOT_LIMIT {
            return Err(Error::Overflow { exponent, limit: SINGLE_SHOT_LIMIT });
        }
        if dt == 0.0 {
            let n = v.norm();
            return Ok((v / C64::new(n, 0.0), n.ln()));
        }
        let raw = match self.config.backend {
            Backend::DenseEigen => {
                let cache = self.eigen.as_ref().expect("decomposed on construction");
                let coeffs = cache.lu.solve(v).ok_or(Error::Singular("eigenvector matrix"))?;
                let phased = CVector::from_iterator(
                    coeffs.len(),
                    coeffs.iter().zip(&cache.values).map(|(c, l)| c * (C64::new(0.0, -dt) * l).exp()),
                );
                &cache.vectors * phased
            }
            Backend::ScalingSquaring => {
                let reuse = matches!(&self.step_cache, Some((cached, _)) if *cached == dt);
                if !reuse {
                    let u = linalg::expm(&(&self.generator * C64::new(0.0, -dt)))?;
                    self.step_cache = Some((dt, u));
                }
                let (_, u) = self.step_cache.as_ref().expect("filled above");
                u * v
            }
            Backend::SteppedIntegration => {
                let out = linalg::taylor_action(&self.generator, v, dt, 0.1 * self.config.rel_tolerance)?;
                return Ok((out.vector, out.log_norm));
            }
        };
        let n = raw.norm();
        if !(n.is_finite() && n > 0.0) {
            return Err(Error::Overflow { exponent, limit: SINGLE_SHOT_LIMIT });
        }
        Ok((raw / C64::new(n, 0.0), n.ln()))
    }

    /// Advances by `dt`, splitting into pieces that respect the single-shot
    /// limit and renormalizing between them.
    pub fn advance(&mut self, v: &CVector, dt: f64) -> Result<(CVector, f64)> {
        let pieces = if self.config.backend == Backend::SteppedIntegration {
            1
        } else {
            ((self.growth_bound * dt / SINGLE_SHOT_LIMIT).ceil() as usize).max(1)
        };
        let h = dt / pieces as f64;
        let mut cur = v.clone();
        let mut log_norm = 0.0;
        for _ in 0..pieces {
            let (next, ln) = self.single_shot(&cur, h)?;
            cur = next;
            log_norm += ln;
        }
        Ok((cur, log_norm))
    }
}

/// Applies `exp(−i t K)` and renormalizes. Returns the state and the raw norm.
pub fn propagate(
    state: &QuantumState,
    model: &ThinSpectrumModel,
    config: &PropagatorConfig,
    t: f64,
) -> Result<(QuantumState, f64)> {
    model.check_dim(state.dim())?;
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::invalid("t", format!("must be >= 0, got {t}")));
    }
    let mut prop = Propagator::new(model, config)?;
    let (v, log_norm) = prop.single_shot(state.amplitudes(), t)?;
    let raw_norm = log_norm.exp();
    if !raw_norm.is_finite() {
        return Err(Error::Overflow { exponent: log_norm, limit: f64::MAX.ln() });
    }
    Ok((QuantumState::new(v)?, raw_norm))
}

/// Observable time series along a renormalized trajectory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRecord {
    pub times: Vec<f64>,
    /// `ln ‖exp(−i t K) ψ₀‖`, accumulated across renormalized steps.
    pub log_raw_norm: Vec<f64>,
    pub energy: Vec<f64>,
    pub order_param: Vec<f64>,
    /// Squared overlaps with the two designated branch states.
    pub branch_overlaps: Option<(Vec<f64>, Vec<f64>)>,
}

impl TrajectoryRecord {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Raw norm at each grid time, `exp(log_raw_norm)`; may overflow to infinity.
    pub fn raw_norm(&self) -> Vec<f64> {
        self.log_raw_norm.iter().map(|l| l.exp()).collect()
    }
}

/// Records `⟨Ĥ₀⟩`, `⟨Ô⟩`, accumulated log-norm and optional branch overlaps on `t_grid`.
pub fn evolve_trajectory(
    state: &QuantumState,
    model: &ThinSpectrumModel,
    config: &PropagatorConfig,
    t_grid: &[f64],
    branches: Option<(&QuantumState, &QuantumState)>,
) -> Result<TrajectoryRecord> {
    model.check_dim(state.dim())?;
    match t_grid.first() {
        Some(&t0) if t0 == 0.0 => {}
        _ => return Err(Error::invalid("t_grid", "must start at 0")),
    }
    if t_grid.windows(2).any(|w| !(w[1] > w[0])) || t_grid.iter().any(|t| !t.is_finite()) {
        return Err(Error::invalid("t_grid", "must be strictly increasing and finite"));
    }
    if let Some((a, b)) = branches {
        model.check_dim(a.dim())?;
        model.check_dim(b.dim())?;
    }

    let mut prop = Propagator::new(model, config)?;
    let mut rec = TrajectoryRecord {
        times: Vec::with_capacity(t_grid.len()),
        log_raw_norm: Vec::with_capacity(t_grid.len()),
        energy: Vec::with_capacity(t_grid.len()),
        order_param: Vec::with_capacity(t_grid.len()),
        branch_overlaps: branches.map(|_| (Vec::new(), Vec::new())),
    };

    let mut cur = state.clone();
    let mut log_norm = 0.0;
    let mut prev_t = 0.0;
    for &t in t_grid {
        if t > prev_t {
            let (v, ln) = prop
                .advance(cur.amplitudes(), t - prev_t)
                .map_err(|e| Error::AtTime { time: t, source: Box::new(e) })?;
            cur = QuantumState::new(v).map_err(|e| Error::AtTime { time: t, source: Box::new(e) })?;
            log_norm += ln;
        }
        rec.times.push(t);
        rec.log_raw_norm.push(log_norm);
        rec.energy.push(energy_expectation(model, &cur)?);
        rec.order_param.push(order_parameter_expectation(model, &cur)?);
        if let (Some((a, b)), Some((oa, ob))) = (branches, rec.branch_overlaps.as_mut()) {
            oa.push(a.overlap_sq(&cur));
            ob.push(b.overlap_sq(&cur));
        }
        prev_t = t;
    }
    Ok(rec)
}

fn fix_phase(v: &CVector) -> CVector {
    let pivot = v.iter().find(|z| z.norm() > 1e-300).copied().unwrap_or(C64::new(1.0, 0.0));
    let phase = pivot.conj() / pivot.norm();
    v * phase
}

/// Eigenvector of `K` with the largest amplitude growth rate `Im λ`.
///
/// For the amplitude factor `exp(−iλt)` the modulus grows as `exp(Im λ · t)`.
pub fn dominant_mode(model: &ThinSpectrumModel, o: f64) -> Result<(QuantumState, f64)> {
    if !(o > 0.0 && o.is_finite()) {
        return Err(Error::invalid("o", format!("must be > 0, got {o}")));
    }
    let k = generator(model, o)?;
    let eig = linalg::complex_eigen(&k)?;
    let bound = 1e-10 * k.norm();
    if eig.max_residual > bound {
        return Err(Error::EigenResidual { residual: eig.max_residual, bound });
    }
    let mut order: Vec<usize> = (0..eig.values.len()).collect();
    order.sort_by(|&a, &b| eig.values[b].im.total_cmp(&eig.values[a].im));
    let first = eig.values[order[0]].im;
    let second = eig.values[order[1]].im;
    let numerically_zero = 1e-12 * k.norm();
    let scale = first.abs().max(second.abs());
    if (first - second).abs() <= 1e-9 * scale || scale <= numerically_zero {
        return Err(Error::Degenerate { first, second });
    }
    let v = eig.vectors.column(order[0]).into_owned();
    Ok((QuantumState::new(fix_phase(&v))?, first))
}

/// Splits `P = o_parallel·Ô + R` with `R` orthogonal to `Ô` in the trace inner product.
pub fn project_perturbation(perturbation: &DMatrix<f64>, model: &ThinSpectrumModel) -> Result<(f64, DMatrix<f64>)> {
    let op = model.order_param();
    if perturbation.shape() != op.shape() {
        return Err(Error::invalid(
            "perturbation",
            format!("shape {:?} does not match model {:?}", perturbation.shape(), op.shape()),
        ));
    }
    let norm_sq = op.dot(op);
    if norm_sq == 0.0 {
        return Err(Error::InvalidModel("order parameter is identically zero".into()));
    }
    let o_parallel = perturbation.dot(op) / norm_sq;
    let remainder = perturbation - op * o_parallel;
    Ok((o_parallel, remainder))
}

/// Two designated branch states; the relative weight measures which one is selected.
#[derive(Debug, Clone, PartialEq)]
pub struct BranchPair {
    pub favoured: QuantumState,
    pub rival: QuantumState,
}

impl BranchPair {
    /// Ground states of `Ĥ₀ + b·Ô` (favoured, `⟨Ô⟩ < 0`) and `Ĥ₀ − b·Ô`,
    /// with `b` set by the dimensionless `b·(N/4)/(E₁ − E₀) = beta`.
    pub fn from_model(model: &ThinSpectrumModel, beta: f64) -> Result<Self> {
        let b = model.field_for_beta(beta);
        let favoured = broken_ground_state(model, b)?;
        let flipped = model.with_order_param(-model.order_param())?;
        let rival = broken_ground_state(&flipped, b)?;
        if favoured.truncation_warning || rival.truncation_warning {
            return Err(Error::invalid(
                "cutoff",
                format!("branch wavepackets leak {:.2e} onto the top levels", favoured.leakage.max(rival.leakage)),
            ));
        }
        Ok(Self { favoured: favoured.state, rival: rival.state })
    }

    /// `|⟨L|ψ⟩|² / (|⟨L|ψ⟩|² + |⟨R|ψ⟩|²)`.
    pub fn relative_weight(&self, psi: &CVector) -> f64 {
        let l = self.favoured.amplitudes().dotc(psi).norm_sqr();
        let r = self.rival.amplitudes().dotc(psi).norm_sqr();
        if l + r == 0.0 {
            0.5
        } else {
            l / (l + r)
        }
    }

    /// Equal-amplitude superposition with squared weight `weight` on the favoured branch.
    pub fn superposition(&self, weight: f64) -> Result<QuantumState> {
        if !(0.0..=1.0).contains(&weight) {
            return Err(Error::invalid("weight", format!("must lie in [0, 1], got {weight}")));
        }
        QuantumState::superpose(&[
            (C64::new(weight.sqrt(), 0.0), &self.favoured),
            (C64::new((1.0 - weight).sqrt(), 0.0), &self.rival),
        ])
    }

    /// `|⟨L|R⟩|²`.
    pub fn branch_overlap(&self) -> f64 {
        self.favoured.overlap_sq(&self.rival)
    }
}

fn resolve_horizon(model: &ThinSpectrumModel, config: &PropagatorConfig, horizon: Option<f64>) -> Result<f64> {
    match horizon {
        Some(h) if h > 0.0 && h.is_finite() => Ok(h),
        Some(h) => Err(Error::invalid("horizon", format!("must be > 0, got {h}"))),
        None if config.field_strength_o > 0.0 => {
            Ok(DEFAULT_HORIZON_UNITS / (model.n_particles() as f64 * config.field_strength_o))
        }
        None => Err(Error::invalid("horizon", "an explicit horizon is required when o = 0")),
    }
}

/// First time `observable` exceeds `threshold`, marching on `time_step` and
/// bisecting inside the first bracketing step to relative precision 1e-6.
fn first_crossing(
    prop: &mut Propagator,
    start: &CVector,
    observable: impl Fn(&CVector) -> f64,
    threshold: f64,
    horizon: f64,
) -> Result<Option<f64>> {
    if observable(start) > threshold {
        return Ok(Some(0.0));
    }
    let step = prop.config().time_step;
    let mut t = 0.0;
    let mut cur = start.clone();
    let mut steps = 0u64;
    while t < horizon {
        let dt = step.min(horizon - t);
        let (next, _) = prop.advance(&cur, dt).map_err(|e| Error::AtTime { time: t + dt, source: Box::new(e) })?;
        if observable(&next) > threshold {
            let (mut lo, mut hi) = (0.0, dt);
            while hi - lo > 1e-6 * (t + hi) {
                let mid = 0.5 * (lo + hi);
                let (probe, _) = prop.advance(&cur, mid)?;
                if observable(&probe) > threshold {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            return Ok(Some(t + hi));
        }
        cur = next;
        steps += 1;
        t = step * steps as f64;
    }
    Ok(None)
}

/// First time `|⟨target|ψ(t)⟩|²` exceeds `threshold`; `None` if the horizon
/// (default `10³ ħ/(N·o)`) passes first.
pub fn collapse_time(
    state: &QuantumState,
    model: &ThinSpectrumModel,
    config: &PropagatorConfig,
    target: &QuantumState,
    threshold: f64,
    horizon: Option<f64>,
) -> Result<Option<f64>> {
    model.check_dim(state.dim())?;
    model.check_dim(target.dim())?;
    if !(threshold > 0.5 && threshold < 1.0) {
        return Err(Error::invalid("threshold", format!("must lie in (0.5, 1), got {threshold}")));
    }
    let horizon = resolve_horizon(model, config, horizon)?;
    let mut prop = Propagator::new(model, config)?;
    let tgt = target.amplitudes().clone();
    first_crossing(&mut prop, state.amplitudes(), |v| tgt.dotc(v).norm_sqr(), threshold, horizon)
}

/// First time the favoured branch's relative weight exceeds `threshold`.
pub fn branch_selection_time(
    state: &QuantumState,
    model: &ThinSpectrumModel,
    config: &PropagatorConfig,
    branches: &BranchPair,
    threshold: f64,
    horizon: Option<f64>,
) -> Result<Option<f64>> {
    model.check_dim(state.dim())?;
    model.check_dim(branches.favoured.dim())?;
    if !(threshold > 0.0 && threshold < 1.0) {
        return Err(Error::invalid("threshold", format!("must lie in (0, 1), got {threshold}")));
    }
    let horizon = resolve_horizon(model, config, horizon)?;
    let mut prop = Propagator::new(model, config)?;
    first_crossing(&mut prop, state.amplitudes(), |v| branches.relative_weight(v), threshold, horizon)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::thin_spectrum::{build_ladder_model, symmetric_ground_state};

    fn two_level(g: f64) -> ThinSpectrumModel {
        ThinSpectrumModel::custom(2, vec![0.0, 0.0], DMatrix::from_row_slice(2, 2, &[0.0, 0.0, 0.0, -g])).unwrap()
    }

    #[test]
    fn generator_entries() {
        let m = build_ladder_model(100, 8, 1.0).unwrap();
        let k0 = generator(&m, 0.0).unwrap();
        assert!(k0.iter().all(|z| z.im == 0.0));
        for i in 0..8 {
            assert_eq!(k0[(i, i)].re, m.energies()[i]);
        }
        let k = generator(&m, 1e-3).unwrap();
        assert!((k[(0, 1)] - C64::new(0.0, -0.025)).norm() < 1e-15);
        assert_eq!(k, k.transpose());
        assert!(generator(&m, -1.0).is_err());
    }

    #[test]
    fn zero_time_is_identity() {
        let m = build_ladder_model(100, 8, 1.0).unwrap();
        let psi = QuantumState::from_real(&[0.3, -0.2, 0.5, 0.0, 0.1, 0.0, 0.0, 0.7]).unwrap();
        for backend in [Backend::DenseEigen, Backend::ScalingSquaring, Backend::SteppedIntegration] {
            let cfg = PropagatorConfig::new(1e-2, 0.1).unwrap().with_backend(backend);
            let (out, raw) = propagate(&psi, &m, &cfg, 0.0).unwrap();
            assert!((raw - 1.0).abs() < 1e-15);
            assert!((out.amplitudes() - psi.amplitudes()).norm() < 1e-15);
        }
    }

    #[test]
    fn two_level_weights_closed_form() {
        // weights ∝ (0.75, 0.25 e^{2gt}) with g t = 1
        let m = two_level(1.0);
        let psi = QuantumState::from_real(&[0.75f64.sqrt(), 0.25f64.sqrt()]).unwrap();
        let want = 0.25 * std::f64::consts::E.powi(2) / (0.75 + 0.25 * std::f64::consts::E.powi(2));
        assert!((want - 0.711_234_594_2).abs() < 1e-9);
        for backend in [Backend::DenseEigen, Backend::ScalingSquaring, Backend::SteppedIntegration] {
            let cfg = PropagatorConfig::new(1.0, 0.1).unwrap().with_backend(backend);
            let (out, raw) = propagate(&psi, &m, &cfg, 1.0).unwrap();
            assert!((out.amplitudes()[1].norm_sqr() - want).abs() < 1e-12, "{backend:?}");
            let raw_want = (0.75 + 0.25 * std::f64::consts::E.powi(2)).sqrt();
            assert!((raw - raw_want).abs() < 1e-10);
        }
    }

    #[test]
    fn overflow_is_reported() {
        let m = two_level(1.0);
        let psi = QuantumState::from_real(&[1.0, 1.0]).unwrap();
        let cfg = PropagatorConfig::new(1.0, 0.1).unwrap();
        match propagate(&psi, &m, &cfg, 600.0) {
            Err(Error::Overflow { .. }) => {}
            other => panic!("expected overflow, got {other:?}"),
        }
        // Stepped evaluation handles long horizons but the raw norm itself overflows.
        let cfg = cfg.with_backend(Backend::SteppedIntegration);
        assert!(matches!(propagate(&psi, &m, &cfg, 1000.0), Err(Error::Overflow { .. })));
    }

    #[test]
    fn dominant_mode_of_diagonal_case() {
        let (mode, rate) = dominant_mode(&two_level(1.0), 1.0).unwrap();
        assert!((rate - 1.0).abs() < 1e-12);
        assert!((mode.amplitudes()[1].norm() - 1.0).abs() < 1e-12);
        assert!(mode.amplitudes()[1].im.abs() < 1e-15 && mode.amplitudes()[1].re > 0.0);
    }

    #[test]
    fn dominant_mode_degeneracy() {
        let m = ThinSpectrumModel::custom(2, vec![0.0, 1.0], DMatrix::from_row_slice(2, 2, &[-1.0, 0.0, 0.0, -1.0]))
            .unwrap();
        assert!(matches!(dominant_mode(&m, 1.0), Err(Error::Degenerate { .. })));
        assert!(dominant_mode(&m, 0.0).is_err());
    }

    #[test]
    fn projection_examples() {
        let m = build_ladder_model(20, 5, 1.0).unwrap();
        let (par, rem) = project_perturbation(&(m.order_param() * 3.0), &m).unwrap();
        assert!((par - 3.0).abs() < 1e-15);
        assert!(rem.amax() < 1e-12);

        let mut p = DMatrix::zeros(5, 5);
        p[(0, 2)] = 1.0;
        p[(2, 0)] = 1.0;
        p[(1, 3)] = -0.5;
        p[(3, 1)] = -0.5;
        let (par, rem) = project_perturbation(&p, &m).unwrap();
        assert_eq!(par, 0.0);
        assert_eq!(rem, p);

        let zero = ThinSpectrumModel::custom(2, vec![0.0, 1.0], DMatrix::zeros(2, 2)).unwrap();
        assert!(matches!(project_perturbation(&DMatrix::zeros(2, 2), &zero), Err(Error::InvalidModel(_))));
        assert!(project_perturbation(&DMatrix::zeros(3, 3), &m).is_err());
    }

    #[test]
    fn collapse_time_closed_form() {
        // τ = (1/2g) ln[(w/(1-w)) · (0.75/0.25)] = ln(297)/2 for w = 0.99, g = 1
        let m = two_level(1.0);
        let psi = QuantumState::from_real(&[0.75f64.sqrt(), 0.25f64.sqrt()]).unwrap();
        let target = QuantumState::basis(2, 1).unwrap();
        let cfg = PropagatorConfig::new(1.0, 0.05).unwrap();
        let tau = collapse_time(&psi, &m, &cfg, &target, 0.99, Some(50.0)).unwrap().unwrap();
        let want = 0.5 * (99.0f64 * 3.0).ln();
        assert!((tau - want).abs() < 2e-6 * want, "{tau} vs {want}");

        // 0.75 already on the growing branch: τ = ln(33)/2 ≈ 1.748
        let psi = QuantumState::from_real(&[0.25f64.sqrt(), 0.75f64.sqrt()]).unwrap();
        let tau = collapse_time(&psi, &m, &cfg, &target, 0.99, Some(50.0)).unwrap().unwrap();
        let want = 0.5 * 33f64.ln();
        assert!((want - 1.748_254).abs() < 1e-6);
        assert!((tau - want).abs() < 2e-6 * want, "{tau} vs {want}");
    }

    #[test]
    fn collapse_time_trivial_cases() {
        let m = build_ladder_model(64, 8, 1.0).unwrap();
        let s0 = symmetric_ground_state(&m);
        let cfg = PropagatorConfig::new(1e-3, 1.0).unwrap();
        assert_eq!(collapse_time(&s0, &m, &cfg, &s0, 0.99, None).unwrap(), Some(0.0));

        let unitary = PropagatorConfig::new(0.0, 1.0).unwrap();
        let other = QuantumState::basis(8, 3).unwrap();
        assert_eq!(collapse_time(&s0, &m, &unitary, &other, 0.99, Some(200.0)).unwrap(), None);
        assert!(matches!(
            collapse_time(&s0, &m, &unitary, &other, 0.99, None),
            Err(Error::InvalidArgument { field: "horizon", .. })
        ));
        assert!(collapse_time(&s0, &m, &cfg, &other, 0.4, None).is_err());
    }

    #[test]
    fn trajectory_single_point() {
        let m = build_ladder_model(64, 8, 1.0).unwrap();
        let psi = QuantumState::from_real(&[1.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]).unwrap();
        let cfg = PropagatorConfig::new(1e-3, 1.0).unwrap();
        let rec = evolve_trajectory(&psi, &m, &cfg, &[0.0], Some((&psi, &psi))).unwrap();
        assert_eq!(rec.len(), 1);
        assert_eq!(rec.log_raw_norm[0], 0.0);
        assert_eq!(rec.energy[0], energy_expectation(&m, &psi).unwrap());
        assert_eq!(rec.order_param[0], order_parameter_expectation(&m, &psi).unwrap());
        let (a, _) = rec.branch_overlaps.unwrap();
        assert!((a[0] - 1.0).abs() < 1e-15);
        assert!(evolve_trajectory(&psi, &m, &cfg, &[0.5, 1.0], None).is_err());
        assert!(evolve_trajectory(&psi, &m, &cfg, &[0.0, 1.0, 1.0], None).is_err());
    }

    #[test]
    fn config_validation() {
        assert!(PropagatorConfig::new(-1.0, 0.1).is_err());
        assert!(PropagatorConfig::new(1.0, 0.0).is_err());
        assert!(PropagatorConfig::new(1.0, 0.1).unwrap().with_tolerance(1e-3).is_err());
        assert!(PropagatorConfig::new(1.0, 0.1).unwrap().with_tolerance(1e-6).is_ok());
    }
}
