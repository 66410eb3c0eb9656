//! States, ensembles, measurements and their classical statistics.

use crate::error::{Error, Result};
use crate::linalg::{
    self, eig_hermitian, kron_vec, norm, partial_trace_multi, tensor, ComplexMatrix, FactorLayout,
    C64,
};

/// Hermiticity, positivity and trace tolerance for density operators.
pub const STATE_TOL: f64 = 1e-9;
/// Max-entry tolerance for ensemble averages and POVM completeness.
pub const SUM_TOL: f64 = 1e-8;
/// Outcomes at or below this probability carry no conditional state.
pub const P_FLOOR: f64 = 1e-12;
/// Probabilities within this distance of 0 or 1 are snapped to the boundary.
pub const PROB_CLIP: f64 = 1e-12;

/// Unit vector state.
#[derive(Clone, Debug, PartialEq)]
pub struct PureState {
    vector: Vec<C64>,
}

impl PureState {
    pub fn new(vector: Vec<C64>) -> Result<Self> {
        let n = norm(&vector);
        if vector.is_empty() || (n - 1.0).abs() > STATE_TOL {
            return Err(Error::InvalidState(format!("vector norm {n} is not 1")));
        }
        Ok(Self { vector })
    }

    /// Rescales a nonzero vector to unit norm.
    pub fn normalized(vector: Vec<C64>) -> Result<Self> {
        let n = norm(&vector);
        if vector.is_empty() || n < 1e-300 || !n.is_finite() {
            return Err(Error::InvalidState("cannot normalize a zero vector".into()));
        }
        Ok(Self {
            vector: vector.into_iter().map(|z| z / n).collect(),
        })
    }

    /// Computational basis vector `|i⟩` of dimension `dim`.
    pub fn basis(dim: usize, i: usize) -> Self {
        let mut v = vec![C64::default(); dim];
        v[i] = C64::new(1.0, 0.0);
        Self { vector: v }
    }

    pub fn vector(&self) -> &[C64] {
        &self.vector
    }

    pub fn dim(&self) -> usize {
        self.vector.len()
    }

    pub fn tensor(&self, other: &PureState) -> PureState {
        PureState {
            vector: kron_vec(&self.vector, &other.vector),
        }
    }

    pub fn density(&self) -> DensityOperator {
        DensityOperator {
            matrix: ComplexMatrix::projector(&self.vector),
        }
    }
}

/// Positive semidefinite, unit-trace operator.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityOperator {
    matrix: ComplexMatrix,
}

impl DensityOperator {
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        let herm = matrix.hermitian_deviation();
        if herm > STATE_TOL {
            return Err(Error::NotHermitian(herm));
        }
        let tr = matrix.trace();
        if (tr.re - 1.0).abs() > STATE_TOL || tr.im.abs() > STATE_TOL {
            return Err(Error::InvalidState(format!("trace {tr} is not 1")));
        }
        let min = *eig_hermitian(&matrix)?.eigenvalues.last().unwrap_or(&0.0);
        if min < -STATE_TOL {
            return Err(Error::NotPsd(min));
        }
        Ok(Self {
            matrix: matrix.hermitian_part(),
        })
    }

    /// Hermitizes and renormalizes a matrix known to be a state up to rounding.
    pub(crate) fn from_matrix_lenient(matrix: ComplexMatrix) -> Self {
        let h = matrix.hermitian_part();
        let tr = h.trace().re;
        let matrix = if tr > 0.0 { h.scale(1.0 / tr) } else { h };
        Self { matrix }
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self {
            matrix: ComplexMatrix::identity(dim).scale(1.0 / dim as f64),
        }
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        eig_hermitian(&self.matrix)
            .map(|e| e.eigenvalues)
            .unwrap_or_default()
    }

    pub fn rank(&self) -> usize {
        self.eigenvalues()
            .iter()
            .filter(|&&l| l > linalg::RANK_TOL)
            .count()
    }

    pub fn tensor(&self, other: &DensityOperator) -> DensityOperator {
        DensityOperator {
            matrix: tensor(&self.matrix, &other.matrix),
        }
    }

    /// Reduced state on the factors in `keep`.
    pub fn reduce(&self, dims: &[usize], keep: &[usize]) -> Result<DensityOperator> {
        Ok(Self::from_matrix_lenient(partial_trace_multi(
            &self.matrix,
            dims,
            keep,
        )?))
    }

    /// Von Neumann entropy in bits.
    pub fn entropy(&self) -> f64 {
        self.eigenvalues()
            .into_iter()
            .filter(|&l| l > 0.0)
            .map(|l| -l * l.log2())
            .sum::<f64>()
            .max(0.0)
    }

    /// `½‖ρ − σ‖₁`.
    pub fn trace_distance(&self, other: &DensityOperator) -> f64 {
        let diff = &self.matrix - &other.matrix;
        match eig_hermitian(&diff) {
            Ok(e) => 0.5 * e.eigenvalues.iter().map(|l| l.abs()).sum::<f64>(),
            Err(_) => f64::NAN,
        }
    }
}

/// Probability-weighted list of states together with their average.
#[derive(Clone, Debug)]
pub struct Ensemble {
    members: Vec<(f64, DensityOperator)>,
    average: DensityOperator,
}

impl Ensemble {
    pub fn new(members: Vec<(f64, DensityOperator)>) -> Result<Self> {
        let average = Self::mix(&members)?;
        Ok(Self { members, average })
    }

    /// Builds an ensemble with a declared average, rejecting any mismatch above [`SUM_TOL`].
    pub fn with_average(
        members: Vec<(f64, DensityOperator)>,
        average: DensityOperator,
    ) -> Result<Self> {
        let mixed = Self::mix(&members)?;
        if mixed.dim() != average.dim() {
            return Err(Error::DimensionMismatch {
                expected: average.dim(),
                found: mixed.dim(),
            });
        }
        let gap = mixed.matrix.max_abs_diff(&average.matrix);
        if gap > SUM_TOL {
            return Err(Error::AverageMismatch(gap));
        }
        Ok(Self { members, average })
    }

    pub fn from_pure(members: Vec<(f64, PureState)>) -> Result<Self> {
        Self::new(members.into_iter().map(|(p, s)| (p, s.density())).collect())
    }

    fn mix(members: &[(f64, DensityOperator)]) -> Result<DensityOperator> {
        let first = members
            .first()
            .ok_or_else(|| Error::InvalidState("empty ensemble".into()))?;
        let dim = first.1.dim();
        let mut total = 0.0;
        let mut acc = ComplexMatrix::zeros(dim);
        for (p, s) in members {
            if *p < -PROB_CLIP || !p.is_finite() {
                return Err(Error::InvalidProbability(*p));
            }
            if s.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: s.dim(),
                });
            }
            total += p;
            acc = &acc + &s.matrix.scale(p.max(0.0));
        }
        if (total - 1.0).abs() > STATE_TOL {
            return Err(Error::NotNormalized(total));
        }
        Ok(DensityOperator::from_matrix_lenient(acc))
    }

    pub fn members(&self) -> &[(f64, DensityOperator)] {
        &self.members
    }

    pub fn probs(&self) -> Vec<f64> {
        self.members.iter().map(|(p, _)| p.max(0.0)).collect()
    }

    pub fn average(&self) -> &DensityOperator {
        &self.average
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.average.dim()
    }

    /// Entropy of the member index, in bits.
    pub fn prior_entropy(&self) -> f64 {
        shannon_entropy(&self.probs()).unwrap_or(f64::NAN)
    }

    /// Same ensemble with every member mapped through `f`.
    pub fn map_states(
        &self,
        f: impl Fn(&DensityOperator) -> Result<DensityOperator>,
    ) -> Result<Ensemble> {
        let members = self
            .members
            .iter()
            .map(|(p, s)| Ok((*p, f(s)?)))
            .collect::<Result<Vec<_>>>()?;
        Ensemble::new(members)
    }
}

/// Finite family of labelled positive operators summing to the identity.
#[derive(Clone, Debug)]
pub struct Povm {
    elements: Vec<(String, ComplexMatrix)>,
}

impl Povm {
    pub fn new(elements: Vec<(String, ComplexMatrix)>) -> Result<Self> {
        let dim = elements
            .first()
            .map(|(_, m)| m.dim())
            .ok_or_else(|| Error::InvalidPovm("no elements".into()))?;
        let mut sum = ComplexMatrix::zeros(dim);
        for (label, m) in &elements {
            if m.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: m.dim(),
                });
            }
            let e = eig_hermitian(m)?;
            let min = *e.eigenvalues.last().unwrap_or(&0.0);
            if min < -STATE_TOL {
                return Err(Error::InvalidPovm(format!(
                    "element {label} has eigenvalue {min:.3e}"
                )));
            }
            sum = &sum + m;
        }
        let gap = sum.max_abs_diff(&ComplexMatrix::identity(dim));
        if gap > SUM_TOL {
            return Err(Error::InvalidPovm(format!(
                "elements sum to identity only within {gap:.3e}"
            )));
        }
        Ok(Self {
            elements: elements
                .into_iter()
                .map(|(l, m)| (l, m.hermitian_part()))
                .collect(),
        })
    }

    /// Builds a POVM from unlabelled elements, labelling them `0, 1, …`.
    pub fn from_elements(elements: Vec<ComplexMatrix>) -> Result<Self> {
        Self::new(
            elements
                .into_iter()
                .enumerate()
                .map(|(i, m)| (i.to_string(), m))
                .collect(),
        )
    }

    /// Projective measurement onto the columns of a unitary.
    pub fn from_basis(basis: &ComplexMatrix) -> Result<Self> {
        basis.ensure_unitary()?;
        Self::from_elements(
            (0..basis.dim())
                .map(|j| ComplexMatrix::projector(&basis.column(j)))
                .collect(),
        )
    }

    pub fn computational(dim: usize) -> Self {
        Self::from_basis(&ComplexMatrix::identity(dim)).expect("identity is unitary")
    }

    /// Single-outcome measurement `{1}`.
    pub fn trivial(dim: usize) -> Self {
        Self {
            elements: vec![("1".into(), ComplexMatrix::identity(dim))],
        }
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.elements[0].1.dim()
    }

    pub fn elements(&self) -> &[(String, ComplexMatrix)] {
        &self.elements
    }

    pub fn element(&self, i: usize) -> &ComplexMatrix {
        &self.elements[i].1
    }

    pub fn label(&self, i: usize) -> &str {
        &self.elements[i].0
    }

    /// Whether every element is a projector and distinct elements are orthogonal.
    pub fn is_pvm(&self, tol: f64) -> bool {
        self.pvm_defect().is_none_or(|(_, dev)| dev <= tol)
    }

    /// Largest violation of idempotence or orthogonality, with a description.
    pub fn pvm_defect(&self) -> Option<(String, f64)> {
        let mut worst: Option<(String, f64)> = None;
        let mut record = |what: String, dev: f64| {
            if worst.as_ref().is_none_or(|(_, w)| dev > *w) {
                worst = Some((what, dev));
            }
        };
        for (i, (li, a)) in self.elements.iter().enumerate() {
            record(format!("{li} not idempotent"), (a * a).max_abs_diff(a));
            for (lj, b) in &self.elements[i + 1..] {
                record(format!("{li} and {lj} not orthogonal"), (a * b).max_abs());
            }
        }
        worst
    }

    /// Product measurement `{A_a ⊗ B_b}` with labels `a,b`.
    pub fn tensor(&self, other: &Povm) -> Povm {
        let mut elements = Vec::with_capacity(self.len() * other.len());
        for (la, a) in &self.elements {
            for (lb, b) in &other.elements {
                elements.push((format!("{la},{lb}"), tensor(a, b)));
            }
        }
        Povm { elements }
    }

    /// `A ⊗ 1` on a composite space.
    pub fn extend_right(&self, dim: usize) -> Povm {
        let id = ComplexMatrix::identity(dim);
        Povm {
            elements: self
                .elements
                .iter()
                .map(|(l, a)| (l.clone(), tensor(a, &id)))
                .collect(),
        }
    }
}

/// Eavesdropping interaction: ancilla in a pure state coupled by a joint unitary.
#[derive(Clone, Debug)]
pub struct Attack {
    ancilla_dim: usize,
    omega: PureState,
    unitary: ComplexMatrix,
}

impl Attack {
    pub fn new(ancilla_dim: usize, omega: PureState, unitary: ComplexMatrix) -> Result<Self> {
        if omega.dim() != ancilla_dim {
            return Err(Error::DimensionMismatch {
                expected: ancilla_dim,
                found: omega.dim(),
            });
        }
        if ancilla_dim == 0 || !unitary.dim().is_multiple_of(ancilla_dim) {
            return Err(Error::DimensionMismatch {
                expected: ancilla_dim,
                found: unitary.dim(),
            });
        }
        unitary.ensure_unitary()?;
        Ok(Self {
            ancilla_dim,
            omega,
            unitary,
        })
    }

    /// No interaction, trivial one-dimensional ancilla.
    pub fn identity(system_dim: usize) -> Self {
        Self {
            ancilla_dim: 1,
            omega: PureState::basis(1, 0),
            unitary: ComplexMatrix::identity(system_dim),
        }
    }

    pub fn ancilla_dim(&self) -> usize {
        self.ancilla_dim
    }

    pub fn system_dim(&self) -> usize {
        self.unitary.dim() / self.ancilla_dim
    }

    pub fn omega(&self) -> &PureState {
        &self.omega
    }

    pub fn unitary(&self) -> &ComplexMatrix {
        &self.unitary
    }
}

/// Outcome probabilities `tr(ρ A_a)`.
pub fn measure(rho: &DensityOperator, povm: &Povm) -> Result<Vec<f64>> {
    if rho.dim() != povm.dim() {
        return Err(Error::DimensionMismatch {
            expected: povm.dim(),
            found: rho.dim(),
        });
    }
    let probs: Vec<f64> = povm
        .elements
        .iter()
        .map(|(_, a)| clip_prob((rho.matrix() * a).trace().re))
        .collect();
    Ok(probs)
}

fn clip_prob(p: f64) -> f64 {
    if (-PROB_CLIP..0.0).contains(&p) {
        0.0
    } else if p > 1.0 && p <= 1.0 + PROB_CLIP {
        1.0
    } else {
        p
    }
}

/// Result of measuring some tensor factors of a pure state.
#[derive(Clone, Debug)]
pub struct Posterior {
    /// Outcome indices, one per measured factor, in the order the measurements were given.
    pub outcomes: Vec<Vec<usize>>,
    pub probs: Vec<f64>,
    /// A-posteriori state on the kept factors; `None` when the probability is at or below [`P_FLOOR`].
    pub states: Vec<Option<DensityOperator>>,
}

impl Posterior {
    /// Joint table of two measured factors, `table[a][b]`.
    pub fn joint_table(&self, sizes: (usize, usize)) -> Vec<Vec<f64>> {
        let mut t = vec![vec![0.0; sizes.1]; sizes.0];
        for (o, p) in self.outcomes.iter().zip(&self.probs) {
            t[o[0]][o[1]] += p;
        }
        t
    }
}

/// Applies `op` to one tensor factor of a vector.
pub fn apply_local(
    op: &ComplexMatrix,
    factor: usize,
    dims: &[usize],
    v: &[C64],
) -> Result<Vec<C64>> {
    let total: usize = dims.iter().product();
    if v.len() != total {
        return Err(Error::DimensionMismatch {
            expected: total,
            found: v.len(),
        });
    }
    if factor >= dims.len() || op.dim() != dims[factor] {
        return Err(Error::DimensionMismatch {
            expected: dims.get(factor).copied().unwrap_or(0),
            found: op.dim(),
        });
    }
    let layout = FactorLayout::new(dims, &[factor])?;
    let mut out = vec![C64::default(); total];
    for r in 0..layout.rest_dim {
        for k in 0..layout.kept_dim {
            let mut acc = C64::default();
            for k2 in 0..layout.kept_dim {
                acc += op.get(k, k2) * v[layout.index(k2, r)];
            }
            out[layout.index(k, r)] = acc;
        }
    }
    Ok(out)
}

/// `tr_rest(|u⟩⟨v|)` over all factors not in `keep`.
pub(crate) fn reduced_outer(
    u: &[C64],
    v: &[C64],
    dims: &[usize],
    keep: &[usize],
) -> Result<ComplexMatrix> {
    let layout = FactorLayout::new(dims, keep)?;
    let mut out = ComplexMatrix::zeros(layout.kept_dim);
    for k1 in 0..layout.kept_dim {
        for k2 in 0..layout.kept_dim {
            let mut acc = C64::default();
            for r in 0..layout.rest_dim {
                acc += u[layout.index(k1, r)] * v[layout.index(k2, r)].conj();
            }
            out.set(k1, k2, acc);
        }
    }
    Ok(out)
}

/// Measures the listed factors of `psi` jointly and returns the outcome
/// distribution together with the a-posteriori state on the `keep` factors.
/// Factors that are neither measured nor kept are traced out.
pub fn posterior_joint(
    psi: &PureState,
    dims: &[usize],
    measured: &[(usize, &Povm)],
    keep: &[usize],
) -> Result<Posterior> {
    let total: usize = dims.iter().product();
    if psi.dim() != total {
        return Err(Error::DimensionMismatch {
            expected: total,
            found: psi.dim(),
        });
    }
    for (f, povm) in measured {
        if *f >= dims.len() || povm.dim() != dims[*f] || keep.contains(f) {
            return Err(Error::DimensionMismatch {
                expected: dims.get(*f).copied().unwrap_or(0),
                found: povm.dim(),
            });
        }
    }

    let sizes: Vec<usize> = measured.iter().map(|(_, p)| p.len()).collect();
    let count: usize = sizes.iter().product();
    let mut outcomes = Vec::with_capacity(count);
    let mut probs = Vec::with_capacity(count);
    let mut states = Vec::with_capacity(count);

    for flat in 0..count {
        let mut idx = vec![0usize; sizes.len()];
        let mut rem = flat;
        for (slot, &s) in idx.iter_mut().zip(&sizes).rev() {
            *slot = rem % s;
            rem /= s;
        }
        let mut applied = psi.vector().to_vec();
        for ((f, povm), &o) in measured.iter().zip(&idx) {
            applied = apply_local(povm.element(o), *f, dims, &applied)?;
        }
        let p = clip_prob(linalg::inner(psi.vector(), &applied).re);
        let state = if p > P_FLOOR {
            let m = reduced_outer(&applied, psi.vector(), dims, keep)?;
            Some(DensityOperator::from_matrix_lenient(
                m.hermitian_part().scale(1.0 / p),
            ))
        } else {
            None
        };
        outcomes.push(idx);
        probs.push(p);
        states.push(state);
    }
    Ok(Posterior {
        outcomes,
        probs,
        states,
    })
}

/// Shannon entropy in bits, `0·log 0 = 0`.
pub fn shannon_entropy(p: &[f64]) -> Result<f64> {
    let mut total = 0.0;
    let mut h = 0.0;
    for &x in p {
        if x < -PROB_CLIP || !x.is_finite() {
            return Err(Error::InvalidProbability(x));
        }
        total += x;
        if x > 0.0 {
            h -= x * x.log2();
        }
    }
    if (total - 1.0).abs() > SUM_TOL {
        return Err(Error::NotNormalized(total));
    }
    Ok(h.max(0.0))
}

/// `H(rows) + H(cols) − H(joint)` in bits.
pub fn mutual_information(joint: &[Vec<f64>]) -> Result<f64> {
    let cols = joint.first().map_or(0, Vec::len);
    if joint.iter().any(|r| r.len() != cols) {
        return Err(Error::DimensionMismatch {
            expected: cols,
            found: joint.iter().map(Vec::len).find(|&l| l != cols).unwrap_or(0),
        });
    }
    let rows: Vec<f64> = joint.iter().map(|r| r.iter().sum()).collect();
    let colm: Vec<f64> = (0..cols)
        .map(|j| joint.iter().map(|r| r[j]).sum())
        .collect();
    let flat: Vec<f64> = joint.iter().flatten().copied().collect();
    let h_joint = shannon_entropy(&flat)?;
    let i = shannon_entropy(&rows)? + shannon_entropy(&colm)? - h_joint;
    Ok(if (-PROB_CLIP..0.0).contains(&i) {
        0.0
    } else {
        i
    })
}

/// `U(ρ ⊗ |Ω⟩⟨Ω|)U†` on system ⊗ ancilla.
pub fn apply_attack(input: &DensityOperator, attack: &Attack) -> Result<DensityOperator> {
    if input.dim() != attack.system_dim() {
        return Err(Error::DimensionMismatch {
            expected: attack.system_dim(),
            found: input.dim(),
        });
    }
    attack.unitary.ensure_unitary()?;
    let joint = tensor(input.matrix(), attack.omega.density().matrix());
    let u = &attack.unitary;
    Ok(DensityOperator::from_matrix_lenient(
        &(u * &joint) * &u.adjoint(),
    ))
}

/// `(1 ⊗ U)` applied to `|φ⟩ ⊗ |Ω⟩`, where `U` acts on the last factor of `φ` and the ancilla.
pub fn attacked_purification(
    phi: &PureState,
    left_dim: usize,
    attack: &Attack,
) -> Result<PureState> {
    let sys = attack.system_dim();
    if phi.dim() != left_dim * sys {
        return Err(Error::DimensionMismatch {
            expected: left_dim * sys,
            found: phi.dim(),
        });
    }
    let with_ancilla = phi.tensor(attack.omega());
    let v = apply_local(
        attack.unitary(),
        1,
        &[left_dim, sys * attack.ancilla_dim()],
        with_ancilla.vector(),
    )?;
    PureState::normalized(v)
}
