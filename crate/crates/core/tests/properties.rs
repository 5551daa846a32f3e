use nalgebra::DMatrix;
use proptest::prelude::*;

use unibreak_core::dynamics::{dominant_mode, project_perturbation, propagate, Backend, PropagatorConfig};
use unibreak_core::linalg::{CVector, C64};
use unibreak_core::thin_spectrum::{
    broken_ground_state, build_ladder_model, order_parameter_expectation, QuantumState, ThinSpectrumModel,
};

fn state(values: &[(f64, f64)]) -> QuantumState {
    let v = CVector::from_iterator(values.len(), values.iter().map(|&(re, im)| C64::new(re, im)));
    QuantumState::new(v + CVector::from_element(values.len(), C64::new(1e-3, 0.0))).unwrap()
}

fn random_model(dim: usize, energies: &[f64], couplings: &[f64]) -> ThinSpectrumModel {
    let mut e: Vec<f64> = energies[..dim].to_vec();
    e.sort_by(f64::total_cmp);
    let base = e[0];
    e.iter_mut().for_each(|x| *x -= base);
    let mut op = DMatrix::zeros(dim, dim);
    let mut k = 0;
    for i in 0..dim {
        for j in i..dim {
            op[(i, j)] = couplings[k];
            op[(j, i)] = couplings[k];
            k += 1;
        }
    }
    ThinSpectrumModel::custom(64, e, op).unwrap()
}

fn amplitudes(dim: usize) -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), dim)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn semigroup(n in 16usize..1024, cutoff in 2usize..16, o in 1e-4..1e-2f64,
                 t1 in 0.0..50.0f64, t2 in 0.0..50.0f64, amps in amplitudes(16)) {
        let model = build_ladder_model(n, cutoff, 1.0).unwrap();
        let psi = state(&amps[..cutoff]);
        let cfg = PropagatorConfig::new(o, 1.0).unwrap();
        let (direct, _) = propagate(&psi, &model, &cfg, t1 + t2).unwrap();
        let (half, _) = propagate(&psi, &model, &cfg, t1).unwrap();
        let (composed, _) = propagate(&half, &model, &cfg, t2).unwrap();
        prop_assert!((direct.amplitudes() - composed.amplitudes()).norm() < 1e-9);
    }

    #[test]
    fn backends_agree(dim in 2usize..=64, seed_e in prop::collection::vec(0.0..5.0f64, 64),
                      seed_c in prop::collection::vec(-1.0..1.0f64, 64 * 65 / 2),
                      o in 0.0..0.2f64, t in 0.0..5.0f64, amps in amplitudes(64)) {
        let model = random_model(dim, &seed_e, &seed_c);
        let psi = state(&amps[..dim]);
        let base = PropagatorConfig::new(o, 1.0).unwrap();
        let (reference, raw_ref) = propagate(&psi, &model, &base.with_backend(Backend::DenseEigen), t).unwrap();
        for backend in [Backend::ScalingSquaring, Backend::SteppedIntegration] {
            let (out, raw) = propagate(&psi, &model, &base.with_backend(backend), t).unwrap();
            prop_assert!((out.amplitudes() - reference.amplitudes()).norm() < base.rel_tolerance, "{backend:?}");
            prop_assert!((raw / raw_ref - 1.0).abs() < base.rel_tolerance);
        }
    }

    #[test]
    fn unitary_limit_preserves_norm(n in 16usize..4096, cutoff in 2usize..32, t in 0.0..1e3f64,
                                     amps in amplitudes(32)) {
        let model = build_ladder_model(n, cutoff, 1.0).unwrap();
        let cfg = PropagatorConfig::new(0.0, 1.0).unwrap();
        let (_, raw) = propagate(&state(&amps[..cutoff]), &model, &cfg, t).unwrap();
        prop_assert!((raw - 1.0).abs() < 1e-10);
    }

    #[test]
    fn projection_is_exact(cutoff in 2usize..12, entries in prop::collection::vec(-3.0..3.0f64, 144)) {
        let model = build_ladder_model(64, cutoff, 1.0).unwrap();
        let p = DMatrix::from_fn(cutoff, cutoff, |i, j| entries[i.min(j) * 12 + i.max(j)]);
        let (par, rem) = project_perturbation(&p, &model).unwrap();
        prop_assert!((model.order_param() * par + &rem - &p).amax() < 1e-12);
        prop_assert!(rem.dot(model.order_param()).abs() < 1e-12 * p.norm().max(1.0) * model.order_param().norm());
    }

    #[test]
    fn order_monotone_in_field(n in 32usize..2048, b1 in 0.0..1e-2f64, b2 in 0.0..1e-2f64) {
        let model = build_ladder_model(n, 48, 1.0).unwrap();
        let (lo, hi) = if b1 <= b2 { (b1, b2) } else { (b2, b1) };
        let a = broken_ground_state(&model, lo).unwrap();
        let b = broken_ground_state(&model, hi).unwrap();
        prop_assert!(b.order_expectation <= a.order_expectation + 1e-9 * model.order_norm());
        prop_assert!(a.order_expectation <= 1e-12 * model.order_norm());
    }

    #[test]
    fn normalized_state_has_bounded_order(n in 16usize..4096, cutoff in 2usize..16, amps in amplitudes(16)) {
        let model = build_ladder_model(n, cutoff, 1.0).unwrap();
        let x = order_parameter_expectation(&model, &state(&amps[..cutoff])).unwrap();
        prop_assert!(x.abs() <= model.order_norm() * (1.0 + 1e-12));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn dominant_mode_attracts(o in 5e-4..5e-3f64, amps in amplitudes(16)) {
        let n = 512;
        let model = build_ladder_model(n, 16, 1.0).unwrap();
        let (mode, _) = dominant_mode(&model, o).unwrap();
        let psi = state(&amps);
        prop_assume!(psi.overlap_sq(&mode) > 1e-6);
        let cfg = PropagatorConfig::new(o, 1.0).unwrap().with_backend(Backend::SteppedIntegration);
        let (end, _) = propagate(&psi, &model, &cfg, 1e3 / (n as f64 * o)).unwrap();
        prop_assert!(end.overlap_sq(&mode) > 1.0 - 1e-6);
    }
}
