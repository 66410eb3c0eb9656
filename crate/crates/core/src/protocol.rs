//! Two-ensemble encoding with an eavesdropper: Bob's information on one
//! encoded variable traded against Eve's information on the other.

use serde::Serialize;

use crate::accinfo::{estimate, info_of_measurement, InfoEstimate};
use crate::error::{Error, Result};
use crate::quantum::{apply_attack, Attack, DensityOperator, Ensemble, Povm, SUM_TOL};
use crate::steering::{build_steering_povm, SteeringContext};
use crate::uncertainty::{overlap_bound, OverlapBound};

/// Slack for both trade-off inequalities.
pub const TRADEOFF_SLACK: f64 = 1e-6;

/// Alice encodes `X` with `ens_x` or `Y` with `ens_y`; both average to the same state.
#[derive(Clone, Debug)]
pub struct Scenario {
    ens_x: Ensemble,
    ens_y: Ensemble,
    attack: Attack,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Encoding {
    X,
    Y,
}

impl Scenario {
    pub fn new(ens_x: Ensemble, ens_y: Ensemble, attack: Attack) -> Result<Self> {
        if ens_x.dim() != ens_y.dim() {
            return Err(Error::DimensionMismatch {
                expected: ens_x.dim(),
                found: ens_y.dim(),
            });
        }
        if attack.system_dim() != ens_x.dim() {
            return Err(Error::DimensionMismatch {
                expected: ens_x.dim(),
                found: attack.system_dim(),
            });
        }
        let gap = ens_x
            .average()
            .matrix()
            .max_abs_diff(ens_y.average().matrix());
        if gap > SUM_TOL {
            return Err(Error::AverageMismatch(gap));
        }
        Ok(Self {
            ens_x,
            ens_y,
            attack,
        })
    }

    pub fn dim(&self) -> usize {
        self.ens_x.dim()
    }

    pub fn rho(&self) -> &DensityOperator {
        self.ens_x.average()
    }

    pub fn ensemble(&self, which: Encoding) -> &Ensemble {
        match which {
            Encoding::X => &self.ens_x,
            Encoding::Y => &self.ens_y,
        }
    }

    pub fn attack(&self) -> &Attack {
        &self.attack
    }

    pub fn with_attack(&self, attack: Attack) -> Result<Self> {
        Self::new(self.ens_x.clone(), self.ens_y.clone(), attack)
    }
}

/// Right-hand side `H(X) + H(Y) + 2 log₂ max ‖F_x^{1/2} F_y^{1/2}‖` with its ingredients.
#[derive(Clone, Debug)]
pub struct Theorem2Bound {
    pub h_x: f64,
    pub h_y: f64,
    pub overlap: OverlapBound,
    pub rhs_bits: f64,
    pub f_x: Povm,
    pub f_y: Povm,
}

/// Both steering POVMs are built in the one Schmidt basis of the shared state.
pub fn theorem2_rhs(sc: &Scenario) -> Result<Theorem2Bound> {
    let ctx = SteeringContext::new(sc.rho().clone())?;
    let f_x = build_steering_povm(&ctx, &sc.ens_x, true)?;
    let f_y = build_steering_povm(&ctx, &sc.ens_y, true)?;
    let overlap = overlap_bound(&f_x, &f_y)?;
    let h_x = sc.ens_x.prior_entropy();
    let h_y = sc.ens_y.prior_entropy();
    Ok(Theorem2Bound {
        h_x,
        h_y,
        rhs_bits: h_x + h_y - overlap.bound_bits,
        overlap,
        f_x,
        f_y,
    })
}

/// `(p_i, U(ρ_i ⊗ |Ω⟩⟨Ω|)U†)` for the chosen encoding.
pub fn conditional_states(sc: &Scenario, which: Encoding) -> Result<Vec<(f64, DensityOperator)>> {
    sc.ensemble(which)
        .members()
        .iter()
        .map(|(p, s)| Ok((*p, apply_attack(s, &sc.attack)?)))
        .collect()
}

fn reduced_ensemble(sc: &Scenario, which: Encoding, keep: usize) -> Result<Ensemble> {
    let dims = [sc.dim(), sc.attack.ancilla_dim()];
    let members = conditional_states(sc, which)?
        .into_iter()
        .map(|(p, s)| Ok((p, s.reduce(&dims, &[keep])?)))
        .collect::<Result<Vec<_>>>()?;
    Ensemble::new(members)
}

/// What Bob holds for each value of the encoded variable.
pub fn bob_ensemble(sc: &Scenario, which: Encoding) -> Result<Ensemble> {
    reduced_ensemble(sc, which, 0)
}

/// What Eve's ancilla holds for each value of the encoded variable.
pub fn eve_ensemble(sc: &Scenario, which: Encoding) -> Result<Ensemble> {
    reduced_ensemble(sc, which, 1)
}

/// Both inequalities evaluated for one fixed pair of measurements.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct PairCheck {
    pub i_xb: f64,
    pub i_ye: f64,
    pub i_xe: f64,
    pub i_yb: f64,
    pub rhs_bits: f64,
    pub pass: bool,
}

impl PairCheck {
    pub fn margin(&self) -> f64 {
        self.rhs_bits - (self.i_xb + self.i_ye).max(self.i_xe + self.i_yb)
    }
}

/// Information extracted by Bob's `bob` and Eve's `eve` measurements, checked against `bound`.
pub fn check_measurement_pair(
    sc: &Scenario,
    bound: &Theorem2Bound,
    bob: &Povm,
    eve: &Povm,
) -> Result<PairCheck> {
    let i_xb = info_of_measurement(&bob_ensemble(sc, Encoding::X)?, bob)?;
    let i_yb = info_of_measurement(&bob_ensemble(sc, Encoding::Y)?, bob)?;
    let i_xe = info_of_measurement(&eve_ensemble(sc, Encoding::X)?, eve)?;
    let i_ye = info_of_measurement(&eve_ensemble(sc, Encoding::Y)?, eve)?;
    let rhs = bound.rhs_bits;
    Ok(PairCheck {
        i_xb,
        i_ye,
        i_xe,
        i_yb,
        rhs_bits: rhs,
        pass: i_xb + i_ye <= rhs + TRADEOFF_SLACK && i_xe + i_yb <= rhs + TRADEOFF_SLACK,
    })
}

/// Estimated information gains with Holevo brackets.
#[derive(Clone, Debug, Serialize)]
pub struct TradeoffReport {
    pub bound_bits: f64,
    pub i_xb: f64,
    pub i_ye: f64,
    pub i_xe: f64,
    pub i_yb: f64,
    pub i_xb_upper: f64,
    pub i_ye_upper: f64,
    pub i_xe_upper: f64,
    pub i_yb_upper: f64,
    pub measurements_used: Vec<String>,
    pub margin: f64,
    pub pass: bool,
}

fn describe(name: &str, e: &InfoEstimate) -> String {
    format!(
        "{name}: {:?} with {} outcomes after {} restarts",
        e.method,
        e.best_povm.len(),
        e.restarts
    )
    .to_lowercase()
}

/// Optimizes Bob's and Eve's measurements separately per encoding and checks
/// both inequalities on the best-found (lower-bound) values.
pub fn run_tradeoff(sc: &Scenario, budget: usize, seed: u64) -> Result<TradeoffReport> {
    if budget == 0 {
        return Err(Error::OptimizerBudgetZero);
    }
    let bound = theorem2_rhs(sc)?;
    let xb = estimate(&bob_ensemble(sc, Encoding::X)?, budget, seed)?;
    let ye = estimate(
        &eve_ensemble(sc, Encoding::Y)?,
        budget,
        seed.wrapping_add(1),
    )?;
    let xe = estimate(
        &eve_ensemble(sc, Encoding::X)?,
        budget,
        seed.wrapping_add(2),
    )?;
    let yb = estimate(
        &bob_ensemble(sc, Encoding::Y)?,
        budget,
        seed.wrapping_add(3),
    )?;
    let sum1 = xb.lower_bits + ye.lower_bits;
    let sum2 = xe.lower_bits + yb.lower_bits;
    let margin = bound.rhs_bits - sum1.max(sum2);
    Ok(TradeoffReport {
        bound_bits: bound.rhs_bits,
        i_xb: xb.lower_bits,
        i_ye: ye.lower_bits,
        i_xe: xe.lower_bits,
        i_yb: yb.lower_bits,
        i_xb_upper: xb.upper_bits,
        i_ye_upper: ye.upper_bits,
        i_xe_upper: xe.upper_bits,
        i_yb_upper: yb.upper_bits,
        measurements_used: vec![
            describe("bob/x", &xb),
            describe("eve/y", &ye),
            describe("eve/x", &xe),
            describe("bob/y", &yb),
        ],
        margin,
        pass: margin >= -TRADEOFF_SLACK,
    })
}
