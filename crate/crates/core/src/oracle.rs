//! Brute-force reference: the infinite-range bipartite antiferromagnet
//! `(2J/N) S_A·S_B + b(S_A^z − S_B^z)` in the full `2^N` product basis.
//!
//! Site `i` is spin-up when bit `i` of the basis index is set. Even sites
//! form sublattice A, odd sites sublattice B.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::angular::clebsch_gordan;
use crate::dynamics::{evolve_trajectory, PropagatorConfig};
use crate::error::{Error, Result};
use crate::linalg::{expm, CMatrix, CVector, C64};
use crate::thin_spectrum::{QuantumState, ThinSpectrumModel};

pub const MAX_SPINS: usize = 12;

#[derive(Debug, Clone)]
pub struct FullSpinSystem {
    n_spins: usize,
    coupling_j: f64,
    field_b: f64,
    hamiltonian: DMatrix<f64>,
    /// Diagonal of `S_A^z − S_B^z`.
    staggered: DVector<f64>,
}

fn site_sz(state: usize, site: usize) -> f64 {
    if state >> site & 1 == 1 {
        0.5
    } else {
        -0.5
    }
}

pub fn build_full_system(n_spins: usize, coupling_j: f64, field_b: f64) -> Result<FullSpinSystem> {
    if n_spins > MAX_SPINS {
        return Err(Error::SizeLimit { n_spins, limit: MAX_SPINS });
    }
    if n_spins == 0 || n_spins % 2 != 0 {
        return Err(Error::invalid("n_spins", format!("must be even and positive, got {n_spins}")));
    }
    if !coupling_j.is_finite() || !field_b.is_finite() {
        return Err(Error::invalid("coupling", "must be finite"));
    }
    let dim = 1usize << n_spins;
    let pref = 2.0 * coupling_j / n_spins as f64;
    let staggered = DVector::from_fn(dim, |x, _| {
        (0..n_spins).map(|i| if i % 2 == 0 { site_sz(x, i) } else { -site_sz(x, i) }).sum()
    });
    let mut h = DMatrix::zeros(dim, dim);
    for x in 0..dim {
        let mut diag = field_b * staggered[x];
        for i in (0..n_spins).step_by(2) {
            for j in (1..n_spins).step_by(2) {
                diag += pref * site_sz(x, i) * site_sz(x, j);
                if (x >> i & 1) != (x >> j & 1) {
                    let y = x ^ (1 << i) ^ (1 << j);
                    h[(y, x)] += 0.5 * pref;
                }
            }
        }
        h[(x, x)] = diag;
    }
    Ok(FullSpinSystem { n_spins, coupling_j, field_b, hamiltonian: h, staggered })
}

impl FullSpinSystem {
    pub fn n_spins(&self) -> usize {
        self.n_spins
    }

    pub fn dim(&self) -> usize {
        1 << self.n_spins
    }

    pub fn field_b(&self) -> f64 {
        self.field_b
    }

    pub fn hamiltonian(&self) -> &DMatrix<f64> {
        &self.hamiltonian
    }

    pub fn staggered_diagonal(&self) -> &DVector<f64> {
        &self.staggered
    }

    pub fn staggered_op(&self) -> DMatrix<f64> {
        DMatrix::from_diagonal(&self.staggered)
    }

    /// `‖[Ĥ, S^z_total]‖` in the Frobenius norm.
    pub fn sz_commutator_norm(&self) -> f64 {
        let m = |x: usize| x.count_ones() as f64 - self.n_spins as f64 / 2.0;
        let mut acc = 0.0;
        for ((i, j), h) in self.hamiltonian.iter().enumerate().map(|(k, h)| ((k % self.dim(), k / self.dim()), h)) {
            let c = h * (m(j) - m(i));
            acc += c * c;
        }
        acc.sqrt()
    }

    /// `⟨ψ|S_total²|ψ⟩` for a real state, from `S² = (S^z)² + N/2 + Σ_{i≠j} S⁺ᵢS⁻ⱼ`.
    pub fn total_spin_squared(&self, psi: &DVector<f64>) -> f64 {
        let n = self.n_spins;
        let mut acc = 0.0;
        for (x, &a) in psi.iter().enumerate() {
            if a == 0.0 {
                continue;
            }
            let m: f64 = (0..n).map(|i| site_sz(x, i)).sum();
            acc += a * a * (m * m + 0.5 * n as f64);
            for i in 0..n {
                for j in 0..n {
                    if i != j && (x >> i & 1) == 0 && (x >> j & 1) == 1 {
                        acc += psi[x ^ (1 << i) ^ (1 << j)] * a;
                    }
                }
            }
        }
        acc
    }

    /// Ground energy, first gap and ground vector.
    pub fn ground_state(&self) -> (f64, f64, DVector<f64>) {
        let eig = SymmetricEigen::new(self.hamiltonian.clone());
        let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let e0 = eig.eigenvalues[order[0]];
        let gap = eig.eigenvalues[order[1]] - e0;
        (e0, gap, eig.eigenvectors.column(order[0]).into_owned())
    }

    pub fn staggered_expectation(&self, psi: &CVector) -> f64 {
        let w: f64 = psi.iter().map(|z| z.norm_sqr()).sum();
        psi.iter().zip(self.staggered.iter()).map(|(z, s)| z.norm_sqr() * s).sum::<f64>() / w
    }
}

/// Columns are the product-basis vectors of `|s, s; S, M = 0⟩`, `s = N/4`,
/// `S = 0..cutoff−1`, built from sublattice Dicke states and Clebsch–Gordan
/// coefficients.
pub fn thin_sector_basis(n_spins: usize, cutoff: usize) -> Result<DMatrix<f64>> {
    if n_spins == 0 || n_spins % 4 != 0 || n_spins > MAX_SPINS {
        return Err(Error::invalid(
            "n_spins",
            format!("must be a positive multiple of 4 up to {MAX_SPINS}, got {n_spins}"),
        ));
    }
    let half = n_spins / 2;
    let two_s = half as i64;
    if cutoff == 0 || cutoff > half + 1 {
        return Err(Error::invalid("cutoff", format!("sector holds {} states, requested {cutoff}", half + 1)));
    }
    let dim = 1usize << n_spins;
    let binom = |n: usize, k: usize| -> f64 { (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64) };
    let mut basis = DMatrix::zeros(dim, cutoff);
    for x in 0..dim {
        let up_a = (0..n_spins).step_by(2).filter(|&i| x >> i & 1 == 1).count();
        let up_b = (1..n_spins).step_by(2).filter(|&i| x >> i & 1 == 1).count();
        // 2m_A = 2·up_A − N/2; M = 0 needs m_B = −m_A.
        let two_ma = 2 * up_a as i64 - two_s;
        let two_mb = 2 * up_b as i64 - two_s;
        if two_ma + two_mb != 0 {
            continue;
        }
        let dicke = 1.0 / (binom(half, up_a) * binom(half, up_b)).sqrt();
        for total in 0..cutoff {
            basis[(x, total)] = dicke * clebsch_gordan(two_s, two_ma, two_s, two_mb, 2 * total as i64, 0);
        }
    }
    Ok(basis)
}

/// Projects `Ĥ` (energies relative to the singlet) and `S_A^z − S_B^z` onto
/// the thin sector.
pub fn thin_sector_projection(system: &FullSpinSystem, cutoff: usize) -> Result<ThinSpectrumModel> {
    if system.field_b != 0.0 {
        return Err(Error::invalid("field_b", "projection needs the zero-field system"));
    }
    let basis = thin_sector_basis(system.n_spins, cutoff)?;
    let h = basis.transpose() * &system.hamiltonian * &basis;
    let op = basis.transpose() * DMatrix::from_diagonal(&system.staggered) * &basis;
    let e0 = h[(0, 0)];
    let energies: Vec<f64> = (0..cutoff).map(|k| h[(k, k)] - e0).collect();
    let off_diag = (0..cutoff)
        .flat_map(|i| (0..cutoff).filter(move |&j| j != i).map(move |j| (i, j)))
        .map(|(i, j)| h[(i, j)].abs())
        .fold(0.0, f64::max);
    if off_diag > 1e-10 * system.coupling_j.abs().max(1.0) {
        return Err(Error::InvalidModel(format!("thin-sector Hamiltonian not diagonal (off-diagonal {off_diag:e})")));
    }
    ThinSpectrumModel::custom(system.n_spins, energies, op)
}

/// Evolves `initial` in the full space under `Ĥ − i·o·(S_A^z − S_B^z)` and
/// along the thin model, and returns the largest difference of the
/// staggered-magnetization expectations over `t_grid`.
pub fn full_evolution_check(
    system: &FullSpinSystem,
    thin_model: &ThinSpectrumModel,
    o: f64,
    t_grid: &[f64],
    initial: &CVector,
) -> Result<f64> {
    if initial.len() != system.dim() {
        return Err(Error::invalid("initial", format!("expected dimension {}, got {}", system.dim(), initial.len())));
    }
    let basis = thin_sector_basis(system.n_spins, thin_model.cutoff())?;
    let cbasis = basis.map(|x| C64::new(x, 0.0));
    let norm = initial.norm();
    if norm == 0.0 {
        return Err(Error::invalid("initial", "zero vector"));
    }
    let psi0 = initial / C64::new(norm, 0.0);
    let sector = cbasis.adjoint() * &psi0;
    let outside = 1.0 - sector.norm_squared();
    if outside > 1e-10 {
        return Err(Error::invalid("initial", format!("weight {outside:e} lies outside the thin sector")));
    }
    let thin_state = QuantumState::new(sector)?;

    match t_grid.first() {
        Some(&t0) if t0 == 0.0 => {}
        _ => return Err(Error::invalid("t_grid", "must start at 0")),
    }
    let step = if t_grid.len() > 1 { t_grid[1] } else { 1.0 };
    let config = PropagatorConfig::new(o, step)?;
    let thin = evolve_trajectory(&thin_state, thin_model, &config, t_grid, None)?;

    // Both operators conserve total S^z and the thin sector has S^z = 0, so evolve only that block.
    let half = system.n_spins / 2;
    let block: Vec<usize> = (0..system.dim()).filter(|s| s.count_ones() as usize == half).collect();
    let k = CMatrix::from_fn(block.len(), block.len(), |a, b| {
        let (i, j) = (block[a], block[b]);
        let stag = if i == j { system.staggered[i] } else { 0.0 };
        C64::new(system.hamiltonian[(i, j)], -o * stag)
    });
    let mut psi = CVector::from_iterator(block.len(), block.iter().map(|&i| psi0[i]));
    let mut cached: Option<(f64, CMatrix)> = None;
    let mut prev = 0.0;
    let mut worst: f64 = 0.0;
    for (idx, &t) in t_grid.iter().enumerate() {
        let dt = t - prev;
        if dt > 0.0 {
            if !matches!(&cached, Some((c, _)) if (c - dt).abs() <= 1e-12 * dt) {
                cached = Some((dt, expm(&(&k * C64::new(0.0, -dt)))?));
            }
            let (_, u) = cached.as_ref().expect("filled above");
            psi = u * psi;
            let n = psi.norm();
            psi /= C64::new(n, 0.0);
        }
        let stag: f64 = block.iter().zip(psi.iter()).map(|(&i, a)| a.norm_sqr() * system.staggered[i]).sum();
        worst = worst.max((stag - thin.order_param[idx]).abs());
        prev = t;
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::thin_spectrum::build_lieb_mattis_model;

    #[test]
    fn four_spin_ground_energy() {
        let sys = build_full_system(4, 1.0, 0.0).unwrap();
        let (e0, gap, psi) = sys.ground_state();
        assert!((e0 + 1.0).abs() < 1e-12);
        assert!(gap > 0.1);
        assert!(sys.total_spin_squared(&psi).abs() < 1e-10);
    }

    #[test]
    fn two_spin_singlet() {
        let sys = build_full_system(2, 1.0, 0.0).unwrap();
        let (_, _, psi) = sys.ground_state();
        let sign = psi[1].signum();
        let want = [0.0, 0.5f64.sqrt(), -(0.5f64.sqrt()), 0.0];
        for (a, w) in psi.iter().zip(want) {
            assert!((a * sign - w).abs() < 1e-12, "{psi}");
        }
    }

    #[test]
    fn field_orders_against_staggered_axis() {
        let sys = build_full_system(8, 1.0, 0.3).unwrap();
        let (_, _, psi) = sys.ground_state();
        assert!(sys.staggered_expectation(&psi.map(|x| C64::new(x, 0.0))) < 0.0);
        assert!(sys.sz_commutator_norm() < 1e-12);
    }

    #[test]
    fn size_limit() {
        assert!(matches!(build_full_system(14, 1.0, 0.0), Err(Error::SizeLimit { .. })));
        assert!(build_full_system(5, 1.0, 0.0).is_err());
    }

    #[test]
    fn projection_matches_closed_form() {
        for (n, cutoff) in [(4, 3), (8, 5)] {
            let sys = build_full_system(n, 1.0, 0.0).unwrap();
            let proj = thin_sector_projection(&sys, cutoff).unwrap();
            let lm = build_lieb_mattis_model(n, cutoff, 1.0).unwrap();
            assert!((proj.energies() - lm.energies()).amax() < 1e-10);
            assert!((proj.order_param() - lm.order_param()).amax() < 1e-10, "N={n}");
        }
        let sys = build_full_system(4, 1.0, 0.0).unwrap();
        let proj = thin_sector_projection(&sys, 3).unwrap();
        for k in 0..3 {
            assert!((proj.energies()[k] - 0.25 * (k * (k + 1)) as f64).abs() < 1e-12);
        }
    }

    #[test]
    fn projection_errors() {
        let sys = build_full_system(4, 1.0, 0.0).unwrap();
        assert!(thin_sector_projection(&sys, 4).is_err());
        let biased = build_full_system(4, 1.0, 0.1).unwrap();
        assert!(thin_sector_projection(&biased, 2).is_err());
    }

    #[test]
    fn projector_is_idempotent() {
        let b = thin_sector_basis(8, 5).unwrap();
        let p = &b * b.transpose();
        assert!((&p * &p - &p).amax() < 1e-12);
        assert!((b.transpose() * &b - DMatrix::identity(5, 5)).amax() < 1e-12);
    }

    #[test]
    fn unitary_stationary_state() {
        let sys = build_full_system(8, 1.0, 0.0).unwrap();
        let thin = thin_sector_projection(&sys, 5).unwrap();
        let b = thin_sector_basis(8, 5).unwrap();
        let psi = b.column(2).map(|x| C64::new(x, 0.0));
        let grid: Vec<f64> = (0..20).map(|k| k as f64 * 0.5).collect();
        let dev = full_evolution_check(&sys, &thin, 0.0, &grid, &psi).unwrap();
        assert!(dev < 1e-10);
    }

    #[test]
    fn rejects_state_outside_sector() {
        let sys = build_full_system(4, 1.0, 0.0).unwrap();
        let thin = thin_sector_projection(&sys, 3).unwrap();
        let mut psi = CVector::zeros(16);
        psi[0] = C64::new(1.0, 0.0);
        assert!(full_evolution_check(&sys, &thin, 0.0, &[0.0, 1.0], &psi).is_err());
    }
}
