//! Conjugate coding on `n` qubits: error randomness versus eavesdropper
//! information, the operator norm bound behind it, and a set of named attacks.

use serde::Serialize;

use crate::accinfo::{estimate, info_of_measurement};
use crate::error::{Error, Result};
use crate::linalg::{op_norm, re, tensor_all, ComplexMatrix};
use crate::protocol::{eve_ensemble, Encoding, Scenario};
use crate::quantum::{
    apply_attack, attacked_purification, measure, posterior_joint, shannon_entropy, Attack,
    DensityOperator, Ensemble, Povm, PureState,
};

/// Largest supported qubit count.
pub const MAX_QUBITS: usize = 3;
/// Slack on the information/error inequality.
pub const THEOREM3_SLACK: f64 = 1e-6;
/// Tolerance for unbiasedness and the norm bound.
pub const MUB_TOL: f64 = 1e-9;
/// Eve outcomes at or below this probability are reported but not checked.
pub const POSTERIOR_MIN_PROB: f64 = 1e-9;

const S: f64 = std::f64::consts::FRAC_1_SQRT_2;

/// Single-qubit basis matrices, columns are basis vectors.
pub fn hadamard() -> ComplexMatrix {
    ComplexMatrix::from_real(&[&[S, S], &[S, -S]])
}

/// `(|0⟩ ± i|1⟩)/√2`.
pub fn circular() -> ComplexMatrix {
    ComplexMatrix::from_rows(&[
        vec![re(S), re(S)],
        vec![crate::linalg::c(0.0, S), crate::linalg::c(0.0, -S)],
    ])
    .expect("2x2")
}

#[derive(Clone, Debug)]
pub enum ConjugateDef {
    Hadamard,
    /// Any qubit basis unbiased with respect to the computational one.
    Custom(ComplexMatrix),
}

/// Per-qubit choice between the computational (`Z`) and Hadamard (`X`) basis.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum QubitBasis {
    Z,
    X,
}

impl QubitBasis {
    fn matrix(self) -> ComplexMatrix {
        match self {
            QubitBasis::Z => ComplexMatrix::identity(2),
            QubitBasis::X => hadamard(),
        }
    }

    fn flipped(self) -> Self {
        match self {
            QubitBasis::Z => QubitBasis::X,
            QubitBasis::X => QubitBasis::Z,
        }
    }
}

/// Two mutually unbiased product bases on `n` qubits plus the auxiliary basis
/// `|i̲⟩ = Σ_j |a_j⟩⟨b_i|a_j⟩` that makes `Σ|a_i⟩|a_i⟩ = Σ|i̲⟩|b_i⟩`.
#[derive(Clone, Debug)]
pub struct ConjugatePair {
    n: usize,
    basis_a: ComplexMatrix,
    basis_b: ComplexMatrix,
    basis_underline: ComplexMatrix,
}

fn check_n(n: usize) -> Result<()> {
    if n == 0 || n > MAX_QUBITS {
        Err(Error::UnsupportedN(n))
    } else {
        Ok(())
    }
}

fn unbiasedness_defect(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    let d = a.dim();
    let overlaps = &a.adjoint() * b;
    let mut worst: f64 = 0.0;
    for i in 0..d {
        for j in 0..d {
            worst = worst.max((overlaps.get(i, j).norm_sqr() - 1.0 / d as f64).abs());
        }
    }
    worst
}

impl ConjugatePair {
    fn from_bases(n: usize, basis_a: ComplexMatrix, basis_b: ComplexMatrix) -> Result<Self> {
        basis_a.ensure_unitary()?;
        basis_b.ensure_unitary()?;
        let defect = unbiasedness_defect(&basis_a, &basis_b);
        if defect > MUB_TOL {
            return Err(Error::NotUnbiased(defect));
        }
        // column i of A (B†A)^T is Σ_j ⟨b_i|a_j⟩ |a_j⟩
        let basis_underline = &basis_a * &(&basis_b.adjoint() * &basis_a).transpose();
        Ok(Self {
            n,
            basis_a,
            basis_b,
            basis_underline,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        1 << self.n
    }

    pub fn basis_a(&self) -> &ComplexMatrix {
        &self.basis_a
    }

    pub fn basis_b(&self) -> &ComplexMatrix {
        &self.basis_b
    }

    pub fn basis_underline(&self) -> &ComplexMatrix {
        &self.basis_underline
    }

    pub fn basis(&self, which: Encoding) -> &ComplexMatrix {
        match which {
            Encoding::X => &self.basis_a,
            Encoding::Y => &self.basis_b,
        }
    }

    /// Uniform ensemble over the vectors of one basis.
    pub fn uniform_ensemble(&self, which: Encoding) -> Ensemble {
        let basis = self.basis(which);
        let d = self.dim();
        Ensemble::from_pure(
            (0..d)
                .map(|j| {
                    (
                        1.0 / d as f64,
                        PureState::normalized(basis.column(j)).expect("unit column"),
                    )
                })
                .collect(),
        )
        .expect("orthonormal basis")
    }

    /// Alice encodes in basis a (`X`) or basis b (`Y`).
    pub fn scenario(&self, attack: Attack) -> Result<Scenario> {
        Scenario::new(
            self.uniform_ensemble(Encoding::X),
            self.uniform_ensemble(Encoding::Y),
            attack,
        )
    }
}

/// Computational basis against a product of single-qubit conjugate bases.
pub fn build_conjugate_pair(n: usize, conjugate: ConjugateDef) -> Result<ConjugatePair> {
    check_n(n)?;
    let q = match conjugate {
        ConjugateDef::Hadamard => hadamard(),
        ConjugateDef::Custom(m) => {
            if m.dim() != 2 {
                return Err(Error::DimensionMismatch {
                    expected: 2,
                    found: m.dim(),
                });
            }
            m.ensure_unitary()?;
            let defect = unbiasedness_defect(&ComplexMatrix::identity(2), &m);
            if defect > MUB_TOL {
                return Err(Error::NotUnbiased(defect));
            }
            m
        }
    };
    ConjugatePair::from_bases(n, ComplexMatrix::identity(1 << n), tensor_all(&vec![q; n]))
}

/// Basis a is the product of the listed per-qubit bases, basis b flips every choice.
pub fn build_mixed_pair(choices: &[QubitBasis]) -> Result<ConjugatePair> {
    check_n(choices.len())?;
    let a: Vec<_> = choices.iter().map(|c| c.matrix()).collect();
    let b: Vec<_> = choices.iter().map(|c| c.flipped().matrix()).collect();
    ConjugatePair::from_bases(choices.len(), tensor_all(&a), tensor_all(&b))
}

/// `E_l = Σ_i |i̲⟩⟨i̲| ⊗ |b_{i⊕l}⟩⟨b_{i⊕l}|` and `P_j = |a_j⟩⟨a_j| ⊗ 1` on `A ⊗ B`.
#[derive(Clone, Debug)]
pub struct ErrorOperators {
    pub e: Povm,
    pub p: Povm,
}

pub fn error_operators(cp: &ConjugatePair) -> Result<ErrorOperators> {
    let d = cp.dim();
    let e = (0..d)
        .map(|l| {
            let mut acc = ComplexMatrix::zeros(d * d);
            for i in 0..d {
                let u = ComplexMatrix::outer(
                    &cp.basis_underline.column(i),
                    &cp.basis_underline.column(i),
                );
                let k = i ^ l;
                let b = ComplexMatrix::outer(&cp.basis_b.column(k), &cp.basis_b.column(k));
                acc = &acc + &crate::linalg::tensor(&u, &b);
            }
            (l.to_string(), acc.hermitian_part())
        })
        .collect();
    let p = (0..d)
        .map(|j| {
            let a = ComplexMatrix::outer(&cp.basis_a.column(j), &cp.basis_a.column(j));
            (
                j.to_string(),
                crate::linalg::tensor(&a, &ComplexMatrix::identity(d)),
            )
        })
        .collect();
    Ok(ErrorOperators {
        e: Povm::new(e)?,
        p: Povm::new(p)?,
    })
}

/// Distribution of `e = j ⊕ k` when Alice sends `|x_j⟩` uniformly and Bob measures in the same basis.
pub fn error_distribution(
    cp: &ConjugatePair,
    attack: &Attack,
    encoding: Encoding,
) -> Result<Vec<f64>> {
    let d = cp.dim();
    if attack.system_dim() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: attack.system_dim(),
        });
    }
    let basis = cp.basis(encoding);
    let bob = Povm::from_basis(basis)?;
    let mut dist = vec![0.0; d];
    for j in 0..d {
        let sent = PureState::normalized(basis.column(j))?.density();
        let out = apply_attack(&sent, attack)?.reduce(&[d, attack.ancilla_dim()], &[0])?;
        for (k, pk) in measure(&out, &bob)?.into_iter().enumerate() {
            dist[j ^ k] += pk / d as f64;
        }
    }
    Ok(dist)
}

/// `H(A⊕B)` for the given encoding basis.
pub fn error_entropy(cp: &ConjugatePair, attack: &Attack, encoding: Encoding) -> Result<f64> {
    shannon_entropy(&error_distribution(cp, attack, encoding)?)
}

#[derive(Clone, Debug, Serialize)]
pub struct Theorem3Side {
    /// Best-found Eve information on the key when Alice uses this basis.
    pub i_ae_lower: f64,
    pub i_ae_upper: f64,
    /// Error entropy in the other basis.
    pub h_error: f64,
    pub margin: f64,
    pub pass: bool,
    #[serde(skip)]
    pub eve_povm: Povm,
}

#[derive(Clone, Debug, Serialize)]
pub struct Theorem3Report {
    pub direct: Theorem3Side,
    /// Roles of the two bases exchanged.
    pub mirrored: Theorem3Side,
    pub pass: bool,
}

fn side(
    cp: &ConjugatePair,
    attack: &Attack,
    key: Encoding,
    budget: usize,
    seed: u64,
) -> Result<Theorem3Side> {
    let sc = cp.scenario(attack.clone())?;
    let est = estimate(&eve_ensemble(&sc, key)?, budget, seed)?;
    let other = match key {
        Encoding::X => Encoding::Y,
        Encoding::Y => Encoding::X,
    };
    let h_error = error_entropy(cp, attack, other)?;
    let margin = h_error - est.lower_bits;
    Ok(Theorem3Side {
        i_ae_lower: est.lower_bits,
        i_ae_upper: est.upper_bits,
        h_error,
        margin,
        pass: margin >= -THEOREM3_SLACK,
        eve_povm: est.best_povm,
    })
}

/// `I(A:E|a) ≤ H(A⊕B|b)` with Eve's side estimated, and the same with a and b exchanged.
pub fn theorem3_check(
    cp: &ConjugatePair,
    attack: &Attack,
    budget: usize,
    seed: u64,
) -> Result<Theorem3Report> {
    let direct = side(cp, attack, Encoding::X, budget, seed)?;
    let mirrored = side(cp, attack, Encoding::Y, budget, seed.wrapping_add(1))?;
    let pass = direct.pass && mirrored.pass;
    Ok(Theorem3Report {
        direct,
        mirrored,
        pass,
    })
}

/// The inequality for one fixed Eve measurement; returns `(info, h_error)`.
pub fn theorem3_pair(cp: &ConjugatePair, attack: &Attack, eve: &Povm) -> Result<(f64, f64)> {
    let sc = cp.scenario(attack.clone())?;
    let info = info_of_measurement(&eve_ensemble(&sc, Encoding::X)?, eve)?;
    Ok((info, error_entropy(cp, attack, Encoding::Y)?))
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct NormBound {
    pub max_norm: f64,
    pub bound: f64,
    pub pass: bool,
}

/// Exhaustive `max_{l,j} ‖E_l P_j‖` against `2^{-n/2}`.
pub fn norm_bound_check(cp: &ConjugatePair) -> Result<NormBound> {
    let ops = error_operators(cp)?;
    let mut max_norm: f64 = 0.0;
    for (_, e) in ops.e.elements() {
        for (_, p) in ops.p.elements() {
            max_norm = max_norm.max(op_norm(&(e * p)));
        }
    }
    let bound = 0.5f64.powf(cp.n as f64 / 2.0);
    Ok(NormBound {
        max_norm,
        bound,
        pass: max_norm <= bound + MUB_TOL,
    })
}

/// Entropies of both error families in one a-posteriori state of `A ⊗ B`.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct PosteriorEntropies {
    pub outcome: usize,
    pub prob: f64,
    pub h_e: f64,
    pub h_p: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct PosteriorInvariant {
    pub entries: Vec<PosteriorEntropies>,
    pub min_sum: f64,
    pub bound: f64,
    pub pass: bool,
}

/// Eve measures `eve` on her ancilla of `(1⊗U)|Φ⟩|Ω⟩`, `|Φ⟩ = 2^{-n/2} Σ|a_i⟩|a_i⟩`;
/// every resulting state of `A ⊗ B` must satisfy `H(E) + H(P) ≥ n`.
pub fn posterior_invariant(
    cp: &ConjugatePair,
    attack: &Attack,
    eve: &Povm,
) -> Result<PosteriorInvariant> {
    let d = cp.dim();
    if attack.system_dim() != d || eve.dim() != attack.ancilla_dim() {
        return Err(Error::DimensionMismatch {
            expected: attack.ancilla_dim(),
            found: eve.dim(),
        });
    }
    let amp = 1.0 / (d as f64).sqrt();
    let mut phi = vec![re(0.0); d * d];
    for i in 0..d {
        let col = cp.basis_a.column(i);
        for x in 0..d {
            for y in 0..d {
                phi[x * d + y] += col[x] * col[y] * amp;
            }
        }
    }
    let psi = attacked_purification(&PureState::normalized(phi)?, d, attack)?;
    let post = posterior_joint(&psi, &[d, d, attack.ancilla_dim()], &[(2, eve)], &[0, 1])?;
    let ops = error_operators(cp)?;
    let mut entries = Vec::new();
    for ((o, p), state) in post.outcomes.iter().zip(&post.probs).zip(&post.states) {
        if let Some(rho) = state {
            entries.push(PosteriorEntropies {
                outcome: o[0],
                prob: *p,
                h_e: family_entropy(rho, &ops.e)?,
                h_p: family_entropy(rho, &ops.p)?,
            });
        }
    }
    let min_sum = entries
        .iter()
        .filter(|e| e.prob > POSTERIOR_MIN_PROB)
        .map(|e| e.h_e + e.h_p)
        .fold(f64::INFINITY, f64::min);
    let bound = cp.n as f64;
    Ok(PosteriorInvariant {
        pass: min_sum >= bound - MUB_TOL,
        entries,
        min_sum,
        bound,
    })
}

fn family_entropy(rho: &DensityOperator, family: &Povm) -> Result<f64> {
    let p = measure(rho, family)?;
    let total: f64 = p.iter().sum();
    shannon_entropy(&p.iter().map(|x| x / total).collect::<Vec<_>>())
}

/// Which basis an intercept-resend attack copies.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum BasisLabel {
    A,
    B,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum AttackKind {
    Identity,
    InterceptResend(BasisLabel),
    /// Copies the computational value into the ancilla.
    CnotClone,
    /// Per qubit, the ancilla rotates from `|0⟩` to `cos θ|0⟩ + sin θ|1⟩` when the basis-a value is 1.
    PartialEntangle(f64),
    /// Exchanges the system with an ancilla prepared in `|0…0⟩`.
    Swap,
    /// Exchanges the system with half of a maximally entangled ancilla pair.
    DepolarizingSwap,
}

/// Attack built against the Hadamard pair on `n` qubits.
pub fn named_attack(kind: AttackKind, n: usize) -> Result<Attack> {
    named_attack_for(kind, &build_conjugate_pair(n, ConjugateDef::Hadamard)?)
}

/// `|s⟩|e⟩ ↦ |s⟩|e ⊕ s⟩` with the control read in `basis`.
fn copy_in_basis(basis: &ComplexMatrix) -> ComplexMatrix {
    let d = basis.dim();
    let perm = ComplexMatrix::from_fn(d * d, |row, col| {
        let (s, e) = (col / d, col % d);
        if row == s * d + (e ^ s) {
            re(1.0)
        } else {
            re(0.0)
        }
    });
    conjugate_system(basis, &perm)
}

/// `(V ⊗ 1) M (V† ⊗ 1)`.
fn conjugate_system(v: &ComplexMatrix, m: &ComplexMatrix) -> ComplexMatrix {
    let anc = m.dim() / v.dim();
    let w = crate::linalg::tensor(v, &ComplexMatrix::identity(anc));
    &(&w * m) * &w.adjoint()
}

fn swap_matrix(d: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(d * d, |row, col| {
        let (a, b) = (col / d, col % d);
        if row == b * d + a {
            re(1.0)
        } else {
            re(0.0)
        }
    })
}

pub fn named_attack_for(kind: AttackKind, cp: &ConjugatePair) -> Result<Attack> {
    let d = cp.dim();
    let n = cp.n;
    let zero = PureState::basis(d, 0);
    match kind {
        AttackKind::Identity => Ok(Attack::identity(d)),
        AttackKind::InterceptResend(BasisLabel::A) => {
            Attack::new(d, zero, copy_in_basis(&cp.basis_a))
        }
        AttackKind::InterceptResend(BasisLabel::B) => {
            Attack::new(d, zero, copy_in_basis(&cp.basis_b))
        }
        AttackKind::CnotClone => Attack::new(d, zero, copy_in_basis(&ComplexMatrix::identity(d))),
        AttackKind::PartialEntangle(theta) => {
            let (cs, sn) = (theta.cos(), theta.sin());
            let rot = ComplexMatrix::from_real(&[&[cs, -sn], &[sn, cs]]);
            let id = ComplexMatrix::identity(2);
            // block-diagonal over the control value s, acting on the ancilla qubits
            let mut u = ComplexMatrix::zeros(d * d);
            for s in 0..d {
                let factors: Vec<_> = (0..n)
                    .map(|q| {
                        if (s >> (n - 1 - q)) & 1 == 1 {
                            rot.clone()
                        } else {
                            id.clone()
                        }
                    })
                    .collect();
                let block = tensor_all(&factors);
                for r in 0..d {
                    for c in 0..d {
                        u.set(s * d + r, s * d + c, block.get(r, c));
                    }
                }
            }
            Attack::new(d, zero, conjugate_system(&cp.basis_a, &u))
        }
        AttackKind::Swap => Attack::new(d, zero, swap_matrix(d)),
        AttackKind::DepolarizingSwap => {
            // system ⊗ (E1 ⊗ E2); swap system with E1
            let amp = 1.0 / (d as f64).sqrt();
            let omega = PureState::new(
                (0..d * d)
                    .map(|i| re(if i / d == i % d { amp } else { 0.0 }))
                    .collect(),
            )?;
            let u = crate::linalg::tensor(&swap_matrix(d), &ComplexMatrix::identity(d));
            Attack::new(d * d, omega, u)
        }
    }
}
