use unibreak_core::dynamics::{evolve_trajectory, Backend, BranchPair, PropagatorConfig};
use unibreak_core::experiments::{
    born_ensemble, build_model, energy_drift_scan, equilibrium_order_scan, regime_study, scaling_scan, BornParams,
    DriftHorizon, Strategy,
};
use unibreak_core::linalg::C64;
use unibreak_core::oracle::{build_full_system, full_evolution_check, thin_sector_basis, thin_sector_projection};
use unibreak_core::thin_spectrum::{
    build_ladder_model, build_lieb_mattis_model, symmetric_ground_state, ModelKind, QuantumState,
};

use crate::config::{Command, Resolved};
use crate::error::CliError;
use crate::output::{Cell, Table};

/// Tolerances for `oracle-check`; exceeding one is an experiment failure.
const ORACLE_STATIC_TOL: f64 = 1e-10;
const ORACLE_TRAJECTORY_TOL: f64 = 1e-6;

pub fn run(cfg: &Resolved, seed: u64) -> Result<Table, CliError> {
    match cfg.command {
        Command::Spectrum => spectrum(cfg),
        Command::Equilibrium => equilibrium(cfg),
        Command::Evolve => evolve(cfg),
        Command::CollapseScan => collapse_scan(cfg),
        Command::Regime => regime(cfg),
        Command::Born => born(cfg, seed),
        Command::EnergyDrift => energy_drift(cfg),
        Command::OracleCheck => oracle_check(cfg),
    }
}

fn model_kind(cfg: &Resolved) -> Result<ModelKind, CliError> {
    cfg.get("model_kind")
}

fn spectrum(cfg: &Resolved) -> Result<Table, CliError> {
    let n: usize = cfg.get("n_particles")?;
    let cutoff: usize = cfg.get("cutoff")?;
    let j: f64 = cfg.get("coupling_j")?;
    let model = match model_kind(cfg)? {
        ModelKind::Ladder => build_ladder_model(n, cutoff, j)?,
        ModelKind::LiebMattis => build_lieb_mattis_model(n, cutoff, j)?,
        ModelKind::Custom => return Err(CliError::Config("model_kind must be ladder or lieb-mattis".into())),
    };
    let mut t = Table::new(vec!["level", "energy", "order_to_next"]);
    for k in 0..cutoff {
        let up = if k + 1 < cutoff { model.order_param()[(k, k + 1)] } else { 0.0 };
        t.push(vec![k.into(), model.energies()[k].into(), up.into()]);
    }
    Ok(t)
}

fn equilibrium(cfg: &Resolved) -> Result<Table, CliError> {
    let scan = equilibrium_order_scan(
        cfg.get("n_particles")?,
        &cfg.list::<f64>("b_values")?,
        model_kind(cfg)?,
        cfg.get("cutoff")?,
    )?;
    let mut t = Table::new(vec!["b", "n_times_b", "order_normalized", "truncation_warning", "leakage"]);
    for r in &scan.rows {
        t.push(vec![
            r.b.into(),
            r.n_times_b.into(),
            r.order_normalized.into(),
            r.truncation_warning.into(),
            r.leakage.into(),
        ]);
    }
    Ok(t)
}

fn evolve(cfg: &Resolved) -> Result<Table, CliError> {
    let n: usize = cfg.get("n_particles")?;
    let model = build_model(model_kind(cfg)?, n, cfg.get("cutoff")?)?;
    let dt: f64 = cfg.get("time_step")?;
    let steps: usize = cfg.get("steps")?;
    let config = PropagatorConfig::new(cfg.get("field_strength")?, dt)?
        .with_backend(cfg.get::<Backend>("backend")?)
        .with_tolerance(cfg.get("rel_tolerance")?)?;
    let branches = BranchPair::from_model(&model, cfg.get("beta")?)?;
    let initial = match cfg.raw("initial") {
        "cat" => branches.superposition(cfg.get("weight")?)?,
        "favoured" => branches.favoured.clone(),
        "rival" => branches.rival.clone(),
        "symmetric" => symmetric_ground_state(&model),
        other => return Err(CliError::Config(format!("key `initial`: unknown recipe `{other}`"))),
    };
    let grid: Vec<f64> = (0..=steps).map(|k| k as f64 * dt).collect();
    let rec = evolve_trajectory(&initial, &model, &config, &grid, Some((&branches.favoured, &branches.rival)))?;
    let (wl, wr) = rec.branch_overlaps.clone().expect("branches supplied");
    let mut t = Table::new(vec!["t", "log_raw_norm", "energy", "order_param", "overlap_l", "overlap_r"]);
    for i in 0..rec.len() {
        t.push(vec![
            rec.times[i].into(),
            rec.log_raw_norm[i].into(),
            rec.energy[i].into(),
            rec.order_param[i].into(),
            wl[i].into(),
            wr[i].into(),
        ]);
    }
    Ok(t)
}

fn collapse_scan(cfg: &Resolved) -> Result<Table, CliError> {
    let scan = scaling_scan(
        &cfg.list::<usize>("n_values")?,
        cfg.get("field_strength")?,
        model_kind(cfg)?,
        cfg.get("cutoff")?,
        cfg.get("threshold")?,
    )?;
    let mut t = Table::new(vec!["n", "tau", "log_n", "log_tau"]);
    for (&n, &tau) in scan.n_values.iter().zip(&scan.collapse_times) {
        t.push(vec![n.into(), tau.into(), (n as f64).ln().into(), tau.ln().into()]);
    }
    t.summary =
        Some(vec![("slope", scan.fit_slope), ("intercept", scan.fit_intercept), ("r_squared", scan.fit_r_squared)]);
    Ok(t)
}

fn regime(cfg: &Resolved) -> Result<Table, CliError> {
    let (a, b) = regime_study(
        &cfg.list::<usize>("n_values")?,
        cfg.get("field_strength")?,
        model_kind(cfg)?,
        cfg.get("cutoff")?,
    )?;
    let mut t = Table::new(vec!["n", "delay_finite_overlap", "delay_zero_overlap", "overlap_finite", "overlap_zero"]);
    for i in 0..a.n_values.len() {
        t.push(vec![
            a.n_values[i].into(),
            a.selection_delays[i].into(),
            b.selection_delays[i].into(),
            a.initial_overlaps[i].into(),
            b.initial_overlaps[i].into(),
        ]);
    }
    Ok(t)
}

fn born(cfg: &Resolved, seed: u64) -> Result<Table, CliError> {
    let params = BornParams {
        weight_initial: cfg.get("weight_initial")?,
        trials: cfg.get("trials")?,
        o: cfg.get("field_strength")?,
        model_kind: model_kind(cfg)?,
        n_particles: cfg.get("n_particles")?,
        cutoff: cfg.get("cutoff")?,
        strategy: cfg.get::<Strategy>("strategy")?,
        seed,
        step_units: cfg.get("step_units")?,
        absorb: cfg.get("absorb")?,
        max_steps: cfg.get("max_steps")?,
    };
    let r = born_ensemble(&params)?;
    let strategy = match r.strategy {
        Strategy::MartingaleBias => "martingale-bias",
        Strategy::SymmetricFlip => "symmetric-flip",
    };
    let mut t = Table::new(vec![
        "weight_initial",
        "trials",
        "frequency_l",
        "ci_halfwidth",
        "strategy",
        "absorbed_l",
        "absorbed_r",
        "non_absorbed",
        "mean_steps",
    ]);
    t.push(vec![
        r.weight_initial.into(),
        r.trials.into(),
        r.frequency_l.into(),
        r.ci_halfwidth.into(),
        strategy.into(),
        r.absorbed_l.into(),
        r.absorbed_r.into(),
        r.non_absorbed.into(),
        r.mean_steps.into(),
    ]);
    Ok(t)
}

fn energy_drift(cfg: &Resolved) -> Result<Table, CliError> {
    let horizon = match cfg.optional::<f64>("horizon")? {
        Some(t) => DriftHorizon::Fixed(t),
        None => DriftHorizon::CollapseMultiple(cfg.get("horizon_multiple")?),
    };
    let scan = energy_drift_scan(
        &cfg.list::<usize>("n_values")?,
        cfg.get("field_strength")?,
        model_kind(cfg)?,
        cfg.get("cutoff")?,
        horizon,
    )?;
    let mut t = Table::new(vec!["n", "horizon", "max_drift", "spectral_range"]);
    for r in &scan.rows {
        t.push(vec![r.n_particles.into(), r.horizon.into(), r.max_drift.into(), r.spectral_range.into()]);
    }
    t.summary = scan.fit.map(|f| vec![("slope", f.slope), ("intercept", f.intercept), ("r_squared", f.r_squared)]);
    Ok(t)
}

fn oracle_check(cfg: &Resolved) -> Result<Table, CliError> {
    let n: usize = cfg.get("n_spins")?;
    let o: f64 = cfg.get("field_strength")?;
    let units: f64 = cfg.get("horizon_units")?;
    let samples: usize = cfg.get("samples")?;
    if samples == 0 || !(units > 0.0) || !(o > 0.0) {
        return Err(CliError::Config("samples, horizon_units and field_strength must be positive".into()));
    }
    let cutoff = n / 2 + 1;
    let sys = build_full_system(n, 1.0, 0.0)?;
    let proj = thin_sector_projection(&sys, cutoff)?;
    let lm = build_lieb_mattis_model(n, cutoff, 1.0)?;
    let energy_err = (proj.energies() - lm.energies()).amax();
    let op_err = (proj.order_param() - lm.order_param()).amax();
    let horizon = units / (n as f64 * o);
    let grid: Vec<f64> = (0..=samples).map(|k| k as f64 * horizon / samples as f64).collect();
    let amps: Vec<f64> = (0..cutoff).map(|k| 0.5f64.powi(k as i32)).collect();
    let thin = QuantumState::from_real(&amps)?;
    let full = thin_sector_basis(n, cutoff)?.map(|x| C64::new(x, 0.0)) * thin.amplitudes();
    let deviation = full_evolution_check(&sys, &lm, o, &grid, &full)?;
    let (_, gap, _) = sys.ground_state();

    // (name, value, bound, value must exceed the bound)
    let checks: [(&str, f64, f64, bool); 5] = [
        ("energy_max_error", energy_err, ORACLE_STATIC_TOL, false),
        ("order_param_max_error", op_err, ORACLE_STATIC_TOL, false),
        ("trajectory_deviation", deviation, ORACLE_TRAJECTORY_TOL, false),
        ("sz_commutator_norm", sys.sz_commutator_norm(), ORACLE_STATIC_TOL, false),
        ("singlet_gap", gap, 0.0, true),
    ];
    let mut t = Table::new(vec!["quantity", "value", "bound", "pass"]);
    let mut failed = Vec::new();
    for (name, value, tol, lower) in checks {
        let pass = if lower { value > tol } else { value <= tol };
        if !pass {
            failed.push(name);
        }
        t.push(vec![Cell::from(name), value.into(), tol.into(), pass.into()]);
    }
    if !failed.is_empty() {
        return Err(CliError::Experiment(format!("oracle checks failed: {}", failed.join(", "))));
    }
    Ok(t)
}
