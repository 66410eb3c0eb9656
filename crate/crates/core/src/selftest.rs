//! Randomized property batteries with per-trial seeding.
//!
//! Trial `t` of battery `b` draws from `seeded_rng(seed, b·2³² + t)`, so the
//! summary does not depend on execution order or thread count.

use std::f64::consts::PI;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::accinfo::{estimate, holevo_chi};
use crate::bb84::{
    build_conjugate_pair, named_attack_for, norm_bound_check, posterior_invariant, theorem3_pair,
    AttackKind, ConjugateDef, THEOREM3_SLACK,
};
use crate::error::{Error, Result};
use crate::linalg::{c, re, ComplexMatrix};
use crate::protocol::{check_measurement_pair, theorem2_rhs, Scenario, TRADEOFF_SLACK};
use crate::quantum::Ensemble;
use crate::random::{
    random_attack, random_decomposition, random_density, random_povm, random_pvm, seeded_rng,
};
use crate::report::{TOOL, VERSION};
use crate::steering::{verify_theorem1, SteeringContext, STEERING_TOL};
use crate::uncertainty::{check_eur, robertson_check, Pvm, UR_SLACK};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Execution {
    Serial,
    Parallel,
}

/// Aggregate of one battery; `worst_margin` is the smallest `rhs − lhs` seen.
#[derive(Clone, Debug, Serialize)]
pub struct BatterySummary {
    pub name: &'static str,
    pub trials: usize,
    pub failures: usize,
    pub errors: usize,
    pub worst_margin: f64,
    pub tolerance: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct SelftestSummary {
    pub tool: &'static str,
    pub version: &'static str,
    pub seed: u64,
    pub trials: usize,
    pub batteries: Vec<BatterySummary>,
    pub pass: bool,
}

impl SelftestSummary {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plain data") + "\n"
    }
}

type Trial = fn(&mut ChaCha8Rng) -> Result<f64>;

struct Battery {
    name: &'static str,
    tolerance: f64,
    trial: Trial,
}

fn steering_trial(rng: &mut ChaCha8Rng) -> Result<f64> {
    let d = rng.random_range(2..=5);
    let m = rng.random_range(1..=6);
    let rho = random_density(d, rng);
    let ens = random_decomposition(&rho, m, rng).ok_or(Error::NoConvergence)?;
    let r = verify_theorem1(&SteeringContext::new(rho)?, &ens, true)?;
    let worst = r
        .completeness_error
        .max(r.max_prob_error())
        .max(r.max_state_error());
    Ok(-worst)
}

fn eur_trial(rng: &mut ChaCha8Rng) -> Result<f64> {
    let d = rng.random_range(2..=5);
    let rho = random_density(d, rng);
    let ka = rng.random_range(d..=d + 2);
    let kb = rng.random_range(d..=d + 2);
    let a = random_povm(d, ka, rng);
    let b = random_povm(d, kb, rng);
    Ok(check_eur(&rho, &a, &b)?.margin())
}

fn robertson_trial(rng: &mut ChaCha8Rng) -> Result<f64> {
    let d = rng.random_range(2..=4);
    let rho = random_density(d, rng);
    let mut values = || {
        (0..d)
            .map(|_| rng.random_range(-2.0..2.0))
            .collect::<Vec<f64>>()
    };
    let (va, vb) = (values(), values());
    let a = Pvm::new(random_pvm(d, rng), va)?;
    let b = Pvm::new(random_pvm(d, rng), vb)?;
    let r = robertson_check(&rho, &a, &b)?;
    Ok(r.lhs - r.rhs)
}

fn tradeoff_trial(rng: &mut ChaCha8Rng) -> Result<f64> {
    let d = if rng.random_bool(0.5) { 2 } else { 4 };
    let rho = random_density(d, rng);
    let mx = rng.random_range(2..=d + 1);
    let my = rng.random_range(2..=d + 1);
    let ex = random_decomposition(&rho, mx, rng).ok_or(Error::NoConvergence)?;
    let ey = random_decomposition(&rho, my, rng).ok_or(Error::NoConvergence)?;
    let anc = rng.random_range(2..=4);
    let sc = Scenario::new(ex, ey, random_attack(d, anc, rng))?;
    let bound = theorem2_rhs(&sc)?;
    let bob = random_povm(d, d + 1, rng);
    let eve = random_povm(anc, anc + 1, rng);
    Ok(check_measurement_pair(&sc, &bound, &bob, &eve)?.margin())
}

fn theorem3_trial(rng: &mut ChaCha8Rng) -> Result<f64> {
    let cp = build_conjugate_pair(1, ConjugateDef::Hadamard)?;
    let theta = rng.random_range(0.0..PI / 2.0);
    let attack = named_attack_for(AttackKind::PartialEntangle(theta), &cp)?;
    let eve = random_povm(2, rng.random_range(2..=4), rng);
    let (info, h) = theorem3_pair(&cp, &attack, &eve)?;
    let inv = posterior_invariant(&cp, &attack, &eve)?;
    Ok((h - info).min(inv.min_sum - inv.bound))
}

fn norm_trial(rng: &mut ChaCha8Rng) -> Result<f64> {
    let phase = rng.random_range(0.0..2.0 * PI);
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let q = ComplexMatrix::from_rows(&[
        vec![re(s), re(s)],
        vec![
            c(s * phase.cos(), s * phase.sin()),
            c(-s * phase.cos(), -s * phase.sin()),
        ],
    ])?;
    let n = rng.random_range(1..=2);
    let r = norm_bound_check(&build_conjugate_pair(n, ConjugateDef::Custom(q))?)?;
    // attained as well as respected
    Ok((r.bound - r.max_norm).min(r.max_norm - r.bound))
}

fn bracket_trial(rng: &mut ChaCha8Rng) -> Result<f64> {
    let p = rng.random_range(0.05..0.95);
    let a = crate::random::random_pure_state(2, rng);
    let b = crate::random::random_pure_state(2, rng);
    let ens = Ensemble::from_pure(vec![(p, a), (1.0 - p, b)])?;
    let est = estimate(&ens, 2, rng.random())?;
    Ok(holevo_chi(&ens) - est.lower_bits)
}

fn batteries() -> [Battery; 7] {
    [
        Battery {
            name: "steering",
            tolerance: STEERING_TOL,
            trial: steering_trial,
        },
        Battery {
            name: "entropic_uncertainty",
            tolerance: UR_SLACK,
            trial: eur_trial,
        },
        Battery {
            name: "robertson",
            tolerance: UR_SLACK,
            trial: robertson_trial,
        },
        Battery {
            name: "tradeoff_pairs",
            tolerance: TRADEOFF_SLACK,
            trial: tradeoff_trial,
        },
        Battery {
            name: "error_randomness",
            tolerance: THEOREM3_SLACK,
            trial: theorem3_trial,
        },
        Battery {
            name: "norm_bound",
            tolerance: 1e-9,
            trial: norm_trial,
        },
        Battery {
            name: "holevo_bracket",
            tolerance: 1e-6,
            trial: bracket_trial,
        },
    ]
}

fn run_one(seed: u64, battery: usize, t: usize, trial: Trial) -> Result<f64> {
    let mut rng = seeded_rng(seed, ((battery as u64) << 32) | t as u64);
    trial(&mut rng)
}

fn collect(
    seed: u64,
    battery: usize,
    trials: usize,
    trial: Trial,
    exec: Execution,
) -> Vec<Result<f64>> {
    match exec {
        #[cfg(feature = "parallel")]
        Execution::Parallel => {
            use rayon::prelude::*;
            (0..trials)
                .into_par_iter()
                .map(|t| run_one(seed, battery, t, trial))
                .collect()
        }
        _ => (0..trials)
            .map(|t| run_one(seed, battery, t, trial))
            .collect(),
    }
}

/// Runs every battery `trials` times; the summary is identical for both execution modes.
pub fn run_selftest(seed: u64, trials: usize, exec: Execution) -> Result<SelftestSummary> {
    if trials == 0 {
        return Err(Error::OptimizerBudgetZero);
    }
    let mut out = Vec::new();
    for (b, battery) in batteries().into_iter().enumerate() {
        let results = collect(seed, b, trials, battery.trial, exec);
        let mut failures = 0;
        let mut errors = 0;
        let mut worst = f64::INFINITY;
        for r in &results {
            match r {
                Ok(m) => {
                    worst = worst.min(*m);
                    if *m < -battery.tolerance {
                        failures += 1;
                    }
                }
                Err(_) => errors += 1,
            }
        }
        out.push(BatterySummary {
            name: battery.name,
            trials,
            failures,
            errors,
            worst_margin: worst,
            tolerance: battery.tolerance,
        });
    }
    let pass = out.iter().all(|b| b.failures == 0 && b.errors == 0);
    Ok(SelftestSummary {
        tool: TOOL,
        version: VERSION,
        seed,
        trials,
        batteries: out,
        pass,
    })
}
