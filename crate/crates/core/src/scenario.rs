//! JSON scenario files: two ensembles with a common average and an attack.
//!
//! Complex numbers are `[re, im]` pairs. Unknown fields are rejected.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::bb84::{build_conjugate_pair, named_attack_for, AttackKind, BasisLabel, ConjugateDef};
use crate::error::Error;
use crate::linalg::{c, ComplexMatrix, C64};
use crate::protocol::Scenario;
use crate::quantum::{Attack, DensityOperator, Ensemble, PureState};
use crate::random::{random_attack, random_decomposition, random_density, seeded_rng};

pub const SCHEMA_VERSION: u32 = 1;
pub const DEFAULT_BUDGET: usize = 8;

/// Why a scenario could not be loaded.
#[derive(Debug, thiserror::Error)]
pub enum InputError {
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },
    #[error("line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error(transparent)]
    Invalid(#[from] Error),
}

pub type Pair = [f64; 2];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum StateSpec {
    Pure { data: Vec<Pair> },
    Density { data: Vec<Vec<Pair>> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MemberSpec {
    pub prob: f64,
    pub state: StateSpec,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnsemblesSpec {
    pub x: Vec<MemberSpec>,
    pub y: Vec<MemberSpec>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NamedParams {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta: Option<f64>,
    /// `"a"` or `"b"` for intercept-resend.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub basis: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum AttackSpec {
    Named {
        name: String,
        #[serde(default)]
        params: NamedParams,
    },
    Explicit {
        ancilla_dim: usize,
        omega: Vec<Pair>,
        unitary: Vec<Vec<Pair>>,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub version: u32,
    pub dim: usize,
    pub ensembles: EnsemblesSpec,
    pub attack: AttackSpec,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_budget")]
    pub budget: usize,
}

fn default_budget() -> usize {
    DEFAULT_BUDGET
}

fn to_c(p: &Pair) -> C64 {
    c(p[0], p[1])
}

fn vector(data: &[Pair]) -> Vec<C64> {
    data.iter().map(to_c).collect()
}

fn matrix(data: &[Vec<Pair>]) -> crate::Result<ComplexMatrix> {
    let rows: Vec<Vec<C64>> = data.iter().map(|r| vector(r)).collect();
    ComplexMatrix::from_rows(&rows)
}

fn pairs(v: &[C64]) -> Vec<Pair> {
    v.iter().map(|z| [z.re, z.im]).collect()
}

fn matrix_pairs(m: &ComplexMatrix) -> Vec<Vec<Pair>> {
    m.to_rows().iter().map(|r| pairs(r)).collect()
}

impl StateSpec {
    pub fn build(&self, dim: usize) -> crate::Result<DensityOperator> {
        let rho = match self {
            StateSpec::Pure { data } => PureState::new(vector(data))?.density(),
            StateSpec::Density { data } => DensityOperator::new(matrix(data)?)?,
        };
        if rho.dim() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: rho.dim(),
            });
        }
        Ok(rho)
    }

    pub fn from_density(rho: &DensityOperator) -> Self {
        StateSpec::Density {
            data: matrix_pairs(rho.matrix()),
        }
    }
}

fn ensemble(members: &[MemberSpec], dim: usize) -> crate::Result<Ensemble> {
    let built = members
        .iter()
        .map(|m| Ok((m.prob, m.state.build(dim)?)))
        .collect::<crate::Result<Vec<_>>>()?;
    Ensemble::new(built)
}

fn qubits_for(dim: usize) -> crate::Result<usize> {
    if dim.is_power_of_two() && dim > 1 {
        Ok(dim.trailing_zeros() as usize)
    } else {
        Err(Error::UnsupportedN(dim))
    }
}

/// Parses a named attack; `theta` defaults to π/4 and `basis` to `"a"`.
pub fn parse_attack_kind(name: &str, params: &NamedParams) -> crate::Result<AttackKind> {
    let basis = match params.basis.as_deref() {
        None | Some("a") => BasisLabel::A,
        Some("b") => BasisLabel::B,
        Some(other) => return Err(Error::InvalidState(format!("unknown basis '{other}'"))),
    };
    Ok(match name {
        "identity" => AttackKind::Identity,
        "intercept_resend" => AttackKind::InterceptResend(basis),
        "cnot_clone" => AttackKind::CnotClone,
        "partial_entangle" => {
            AttackKind::PartialEntangle(params.theta.unwrap_or(std::f64::consts::FRAC_PI_4))
        }
        "swap" => AttackKind::Swap,
        "depolarizing_swap" => AttackKind::DepolarizingSwap,
        other => return Err(Error::InvalidState(format!("unknown attack '{other}'"))),
    })
}

impl AttackSpec {
    pub fn build(&self, dim: usize) -> crate::Result<Attack> {
        match self {
            AttackSpec::Named { name, params } => {
                let kind = parse_attack_kind(name, params)?;
                if kind == AttackKind::Identity {
                    return Ok(Attack::identity(dim));
                }
                let cp = build_conjugate_pair(qubits_for(dim)?, ConjugateDef::Hadamard)?;
                named_attack_for(kind, &cp)
            }
            AttackSpec::Explicit {
                ancilla_dim,
                omega,
                unitary,
            } => Attack::new(
                *ancilla_dim,
                PureState::new(vector(omega))?,
                matrix(unitary)?,
            ),
        }
    }

    pub fn from_attack(a: &Attack) -> Self {
        AttackSpec::Explicit {
            ancilla_dim: a.ancilla_dim(),
            omega: pairs(a.omega().vector()),
            unitary: matrix_pairs(a.unitary()),
        }
    }
}

impl ScenarioFile {
    pub fn from_json(text: &str) -> Result<Self, InputError> {
        let file: ScenarioFile = serde_json::from_str(text).map_err(|e| InputError::Syntax {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
        if file.version != SCHEMA_VERSION {
            return Err(
                Error::InvalidState(format!("unsupported version {}", file.version)).into(),
            );
        }
        Ok(file)
    }

    pub fn load(path: &std::path::Path) -> Result<Self, InputError> {
        let text = std::fs::read_to_string(path).map_err(|e| InputError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plain data") + "\n"
    }

    pub fn ensembles(&self) -> crate::Result<(Ensemble, Ensemble)> {
        Ok((
            ensemble(&self.ensembles.x, self.dim)?,
            ensemble(&self.ensembles.y, self.dim)?,
        ))
    }

    pub fn build(&self) -> crate::Result<Scenario> {
        let (x, y) = self.ensembles()?;
        Scenario::new(x, y, self.attack.build(self.dim)?)
    }

    /// Random full-rank state in dimension `dim`, two decompositions of it and a random attack.
    pub fn generate(dim: usize, seed: u64) -> crate::Result<Self> {
        let mut rng = seeded_rng(seed, 0);
        let rho = random_density(dim, &mut rng);
        let draw = |rng: &mut rand_chacha::ChaCha8Rng| -> crate::Result<Vec<MemberSpec>> {
            let m = rng.random_range(2..=dim + 2);
            let ens =
                random_decomposition(&rho, m, rng).ok_or(Error::RankDeficient { rank: 0, dim })?;
            Ok(ens
                .members()
                .iter()
                .map(|(p, s)| MemberSpec {
                    prob: *p,
                    state: StateSpec::from_density(s),
                })
                .collect())
        };
        let x = draw(&mut rng)?;
        let y = draw(&mut rng)?;
        let attack = random_attack(dim, 2, &mut rng);
        Ok(ScenarioFile {
            version: SCHEMA_VERSION,
            dim,
            ensembles: EnsemblesSpec { x, y },
            attack: AttackSpec::from_attack(&attack),
            seed,
            budget: DEFAULT_BUDGET,
        })
    }
}
