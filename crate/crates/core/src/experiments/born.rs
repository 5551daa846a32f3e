use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{build_model, REFERENCE_BETA};
use crate::dynamics::{generator, BranchPair};
use crate::error::{Error, Result};
use crate::linalg::{expm, CMatrix, CVector, C64};
use crate::thin_spectrum::ModelKind;

pub const DEFAULT_SEED: u64 = 0x5eed_0f_b0_2a;

/// How the sign of the stochastic field is drawn each interval.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Strategy {
    /// Favour L with the probability that keeps the L weight a martingale.
    MartingaleBias,
    /// Favour either branch with probability 1/2.
    SymmetricFlip,
}

impl std::str::FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace(['-', '_'], "").as_str() {
            "martingalebias" | "martingale" => Ok(Strategy::MartingaleBias),
            "symmetricflip" | "symmetric" => Ok(Strategy::SymmetricFlip),
            _ => Err(Error::invalid("strategy", format!("unknown strategy `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BornParams {
    pub weight_initial: f64,
    pub trials: usize,
    pub o: f64,
    pub model_kind: ModelKind,
    pub n_particles: usize,
    pub cutoff: usize,
    pub strategy: Strategy,
    pub seed: u64,
    /// Resampling interval in units of `ħ/(N·o)`.
    pub step_units: f64,
    /// Relative branch weight that ends a trial.
    pub absorb: f64,
    pub max_steps: usize,
}

impl Default for BornParams {
    fn default() -> Self {
        Self {
            weight_initial: 0.5,
            trials: 10_000,
            o: 1e-3,
            model_kind: ModelKind::Ladder,
            n_particles: 1024,
            cutoff: 32,
            strategy: Strategy::MartingaleBias,
            seed: DEFAULT_SEED,
            step_units: 0.1,
            absorb: 0.999,
            max_steps: 100_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BornEnsembleResult {
    pub trials: usize,
    pub weight_initial: f64,
    pub frequency_l: f64,
    /// `3·sqrt(f(1−f)/trials)`.
    pub ci_halfwidth: f64,
    pub strategy: Strategy,
    pub absorbed_l: usize,
    pub absorbed_r: usize,
    pub non_absorbed: usize,
    pub mean_steps: f64,
}

#[derive(Clone, Copy)]
enum Outcome {
    Left(usize),
    Right(usize),
    Open,
}

fn unit(v: CVector) -> CVector {
    let n = v.norm();
    v / C64::new(n, 0.0)
}

struct Stepper {
    towards_l: CMatrix,
    towards_r: CMatrix,
    branches: BranchPair,
}

impl Stepper {
    fn run(&self, start: &CVector, params: &BornParams, rng: &mut ChaCha8Rng) -> Outcome {
        let mut psi = start.clone();
        let mut p = self.branches.relative_weight(&psi);
        for step in 0..=params.max_steps {
            if p >= params.absorb {
                return Outcome::Left(step);
            }
            if p <= 1.0 - params.absorb {
                return Outcome::Right(step);
            }
            if step == params.max_steps {
                break;
            }
            let plus = unit(&self.towards_l * &psi);
            let minus = unit(&self.towards_r * &psi);
            let p_plus = self.branches.relative_weight(&plus);
            let p_minus = self.branches.relative_weight(&minus);
            let favour_l = match params.strategy {
                Strategy::SymmetricFlip => 0.5,
                Strategy::MartingaleBias if p_plus > p_minus => ((p - p_minus) / (p_plus - p_minus)).clamp(0.0, 1.0),
                Strategy::MartingaleBias => 0.5,
            };
            if rng.random::<f64>() < favour_l {
                psi = plus;
                p = p_plus;
            } else {
                psi = minus;
                p = p_minus;
            }
        }
        Outcome::Open
    }
}

/// Repeated stochastic-field trials from `√w·|L⟩ + √(1−w)·|R⟩`.
///
/// The field `±o·Ô` is redrawn every interval. Each trial owns the ChaCha
/// stream `trial` of `seed`, so results do not depend on scheduling.
pub fn born_ensemble(params: &BornParams) -> Result<BornEnsembleResult> {
    if !(0.0..=1.0).contains(&params.weight_initial) {
        return Err(Error::invalid("weight_initial", format!("must lie in [0, 1], got {}", params.weight_initial)));
    }
    if params.trials == 0 {
        return Err(Error::invalid("trials", "must be positive"));
    }
    if !(params.o > 0.0 && params.o.is_finite()) {
        return Err(Error::invalid("o", format!("must be > 0, got {}", params.o)));
    }
    if !(params.step_units > 0.0) {
        return Err(Error::invalid("step_units", "must be > 0"));
    }
    if !(params.absorb > 0.5 && params.absorb < 1.0) {
        return Err(Error::invalid("absorb", format!("must lie in (0.5, 1), got {}", params.absorb)));
    }
    let model = build_model(params.model_kind, params.n_particles, params.cutoff)?;
    let branches = BranchPair::from_model(&model, REFERENCE_BETA)?;
    let dt = params.step_units / (params.n_particles as f64 * params.o);
    let flipped = model.with_order_param(-model.order_param())?;
    let minus_i_dt = C64::new(0.0, -dt);
    let stepper = Stepper {
        towards_l: expm(&(generator(&model, params.o)? * minus_i_dt))?,
        towards_r: expm(&(generator(&flipped, params.o)? * minus_i_dt))?,
        branches,
    };
    let start = stepper.branches.superposition(params.weight_initial)?.into_amplitudes();

    let outcomes: Vec<Outcome> = (0..params.trials as u64)
        .into_par_iter()
        .map(|trial| {
            let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
            rng.set_stream(trial);
            stepper.run(&start, params, &mut rng)
        })
        .collect();

    let (mut left, mut right, mut open, mut steps) = (0usize, 0usize, 0usize, 0usize);
    for o in &outcomes {
        match *o {
            Outcome::Left(s) => {
                left += 1;
                steps += s;
            }
            Outcome::Right(s) => {
                right += 1;
                steps += s;
            }
            Outcome::Open => open += 1,
        }
    }
    if open * 100 > params.trials {
        return Err(Error::Experiment(format!(
            "{open} of {} trials unabsorbed after {} steps",
            params.trials, params.max_steps
        )));
    }
    let absorbed = left + right;
    let frequency_l = left as f64 / absorbed as f64;
    let ci_halfwidth = 3.0 * (frequency_l * (1.0 - frequency_l) / params.trials as f64).sqrt();
    Ok(BornEnsembleResult {
        trials: params.trials,
        weight_initial: params.weight_initial,
        frequency_l,
        ci_halfwidth,
        strategy: params.strategy,
        absorbed_l: left,
        absorbed_r: right,
        non_absorbed: open,
        mean_steps: steps as f64 / absorbed as f64,
    })
}
