//! Remote ensemble preparation.
//!
//! Given a state `ρ` with eigenbasis `{e_k}` and the purification
//! `|Φ⟩ = Σ_k √λ_k |e_k⟩⊗|e_k⟩`, any decomposition `ρ = Σ_i p_i ρ_i` is
//! prepared on the second factor by measuring the first with
//! `F_i = p_i ρ^{-1/2} ρ_iᵀ ρ^{-1/2}`, the transpose taken in `{e_k}`.

use crate::error::{Error, Result};
use crate::linalg::{
    eig_hermitian, inv_sqrt_psd, support_projector, transpose_in_basis, ComplexMatrix, C64,
    RANK_TOL,
};
use crate::quantum::{
    posterior_joint, DensityOperator, Ensemble, Povm, PureState, P_FLOOR, SUM_TOL,
};

/// Tolerance for every per-outcome check in [`verify_theorem1`].
pub const STEERING_TOL: f64 = 1e-8;

/// Label given to the kernel projector appended in non-strict mode.
pub const OFF_SUPPORT_LABEL: &str = "off-support";

/// A state, its Schmidt basis and the purification built from them.
#[derive(Clone, Debug)]
pub struct SteeringContext {
    rho: DensityOperator,
    schmidt_basis: ComplexMatrix,
    lambdas: Vec<f64>,
    phi: PureState,
}

impl SteeringContext {
    /// Uses the canonical eigenbasis of `rho`.
    pub fn new(rho: DensityOperator) -> Result<Self> {
        let eig = eig_hermitian(rho.matrix())?;
        Self::assemble(rho, eig.eigenvectors, eig.eigenvalues)
    }

    /// Uses a caller-chosen eigenbasis (columns), e.g. another basis of a degenerate eigenspace.
    pub fn with_basis(rho: DensityOperator, basis: ComplexMatrix) -> Result<Self> {
        if basis.dim() != rho.dim() {
            return Err(Error::DimensionMismatch {
                expected: rho.dim(),
                found: basis.dim(),
            });
        }
        basis.ensure_unitary()?;
        let local = &(&basis.adjoint() * rho.matrix()) * &basis;
        let lambdas: Vec<f64> = (0..rho.dim()).map(|k| local.get(k, k).re).collect();
        let off = ComplexMatrix::from_fn(rho.dim(), |i, j| {
            if i == j {
                C64::default()
            } else {
                local.get(i, j)
            }
        });
        if off.max_abs() > 1e-9 {
            return Err(Error::InvalidState(format!(
                "basis does not diagonalize the state (off-diagonal {:.3e})",
                off.max_abs()
            )));
        }
        Self::assemble(rho, basis, lambdas)
    }

    fn assemble(rho: DensityOperator, basis: ComplexMatrix, lambdas: Vec<f64>) -> Result<Self> {
        let d = rho.dim();
        let weights: Vec<f64> = lambdas.iter().map(|l| l.max(0.0).sqrt()).collect();
        let mut v = vec![C64::default(); d * d];
        for (k, w) in weights.iter().enumerate() {
            let col = basis.column(k);
            for i in 0..d {
                for j in 0..d {
                    v[i * d + j] += col[i] * col[j] * *w;
                }
            }
        }
        let phi = PureState::normalized(v)?;
        Ok(Self {
            rho,
            schmidt_basis: basis,
            lambdas,
            phi,
        })
    }

    pub fn rho(&self) -> &DensityOperator {
        &self.rho
    }

    pub fn schmidt_basis(&self) -> &ComplexMatrix {
        &self.schmidt_basis
    }

    pub fn schmidt_coefficients(&self) -> &[f64] {
        &self.lambdas
    }

    pub fn phi(&self) -> &PureState {
        &self.phi
    }

    pub fn dim(&self) -> usize {
        self.rho.dim()
    }

    pub fn rank(&self) -> usize {
        self.lambdas.iter().filter(|&&l| l > RANK_TOL).count()
    }
}

/// Builds `F_i = p_i ρ^{-1/2} ᵗρ_i ρ^{-1/2}` for every member of `ens`.
///
/// Strict mode requires `ρ` to be full rank. Otherwise the inverse square
/// root is taken on the support and the kernel projector is appended as an
/// extra outcome labelled [`OFF_SUPPORT_LABEL`], which `|Φ⟩` never triggers.
pub fn build_steering_povm(ctx: &SteeringContext, ens: &Ensemble, strict: bool) -> Result<Povm> {
    let d = ctx.dim();
    if ens.dim() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: ens.dim(),
        });
    }
    let gap = ens.average().matrix().max_abs_diff(ctx.rho.matrix());
    if gap > SUM_TOL {
        return Err(Error::AverageMismatch(gap));
    }
    let rank = ctx.rank();
    if strict && rank < d {
        return Err(Error::RankDeficient { rank, dim: d });
    }

    let inv_sqrt = inv_sqrt_psd(ctx.rho.matrix(), rank < d)?;
    let mut elements = Vec::with_capacity(ens.len() + 1);
    for (i, (p, state)) in ens.members().iter().enumerate() {
        let t = transpose_in_basis(state.matrix(), &ctx.schmidt_basis)?;
        let f = (&(&inv_sqrt * &t) * &inv_sqrt).scale(p.max(0.0));
        elements.push((i.to_string(), f.hermitian_part()));
    }
    if rank < d {
        let kernel = &ComplexMatrix::identity(d) - &support_projector(ctx.rho.matrix())?;
        elements.push((OFF_SUPPORT_LABEL.to_string(), kernel));
    }
    Povm::new(elements)
}

/// Per-member outcome of checking that the steering POVM prepares the ensemble.
#[derive(Clone, Debug)]
pub struct Theorem1Report {
    /// `max |Σ F − 1|`.
    pub completeness_error: f64,
    /// `|⟨Φ|F_i ⊗ 1|Φ⟩ − p_i|` per member.
    pub prob_errors: Vec<f64>,
    /// Trace distance between the a-posteriori state and `ρ_i` per member.
    pub state_errors: Vec<f64>,
    pub pass: bool,
}

impl Theorem1Report {
    pub fn max_prob_error(&self) -> f64 {
        self.prob_errors.iter().copied().fold(0.0, f64::max)
    }

    pub fn max_state_error(&self) -> f64 {
        self.state_errors.iter().copied().fold(0.0, f64::max)
    }
}

/// Measures `F` on the first half of `|Φ⟩` and compares outcome statistics
/// and a-posteriori states of the second half with the ensemble.
pub fn verify_theorem1(
    ctx: &SteeringContext,
    ens: &Ensemble,
    strict: bool,
) -> Result<Theorem1Report> {
    let povm = build_steering_povm(ctx, ens, strict)?;
    let d = ctx.dim();

    let mut sum = ComplexMatrix::zeros(d);
    for (_, f) in povm.elements() {
        sum = &sum + f;
    }
    let completeness_error = sum.max_abs_diff(&ComplexMatrix::identity(d));

    let post = posterior_joint(&ctx.phi, &[d, d], &[(0, &povm)], &[1])?;
    let mut prob_errors = Vec::with_capacity(ens.len());
    let mut state_errors = Vec::with_capacity(ens.len());
    for (i, (p, state)) in ens.members().iter().enumerate() {
        prob_errors.push((post.probs[i] - p).abs());
        let err = match &post.states[i] {
            Some(s) => s.trace_distance(state),
            None if *p <= P_FLOOR => 0.0,
            None => f64::INFINITY,
        };
        state_errors.push(err);
    }
    let pass = completeness_error <= STEERING_TOL
        && prob_errors.iter().all(|&e| e <= STEERING_TOL)
        && state_errors.iter().all(|&e| e <= STEERING_TOL);
    Ok(Theorem1Report {
        completeness_error,
        prob_errors,
        state_errors,
        pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::re;
    use crate::random::{random_decomposition, random_density, random_unitary, seeded_rng};
    use rand::Rng;

    const S: f64 = std::f64::consts::FRAC_1_SQRT_2;

    fn plus() -> PureState {
        PureState::new(vec![re(S), re(S)]).unwrap()
    }

    fn minus() -> PureState {
        PureState::new(vec![re(S), re(-S)]).unwrap()
    }

    #[test]
    fn phi_reduces_to_rho() {
        let mut rng = seeded_rng(5, 0);
        let rho = random_density(4, &mut rng);
        let ctx = SteeringContext::new(rho.clone()).unwrap();
        let reduced = ctx.phi().density().reduce(&[4, 4], &[0]).unwrap();
        assert!(reduced.matrix().max_abs_diff(rho.matrix()) < 1e-9);
        let reduced_b = ctx.phi().density().reduce(&[4, 4], &[1]).unwrap();
        assert!(reduced_b.matrix().max_abs_diff(rho.matrix()) < 1e-9);
    }

    #[test]
    fn computational_ensemble_of_mixed_qubit() {
        let ctx = SteeringContext::new(DensityOperator::maximally_mixed(2)).unwrap();
        let ens = Ensemble::from_pure(vec![
            (0.5, PureState::basis(2, 0)),
            (0.5, PureState::basis(2, 1)),
        ])
        .unwrap();
        let f = build_steering_povm(&ctx, &ens, true).unwrap();
        assert!(
            f.element(0)
                .max_abs_diff(&ComplexMatrix::from_real_diag(&[1.0, 0.0]))
                < 1e-12
        );
        assert!(
            f.element(1)
                .max_abs_diff(&ComplexMatrix::from_real_diag(&[0.0, 1.0]))
                < 1e-12
        );
        let report = verify_theorem1(&ctx, &ens, true).unwrap();
        assert!(report.pass);
        assert!(report.max_prob_error() < 1e-12 && report.max_state_error() < 1e-12);
    }

    #[test]
    fn single_member_gives_identity() {
        let mut rng = seeded_rng(9, 0);
        let rho = random_density(3, &mut rng);
        let ctx = SteeringContext::new(rho.clone()).unwrap();
        let ens = Ensemble::new(vec![(1.0, rho)]).unwrap();
        let f = build_steering_povm(&ctx, &ens, true).unwrap();
        assert_eq!(f.len(), 1);
        assert!(f.element(0).max_abs_diff(&ComplexMatrix::identity(3)) < 1e-9);
    }

    #[test]
    fn conjugate_ensemble_is_transpose_fixed() {
        let ctx = SteeringContext::new(DensityOperator::maximally_mixed(2)).unwrap();
        let ens = Ensemble::from_pure(vec![(0.5, plus()), (0.5, minus())]).unwrap();
        let f = build_steering_povm(&ctx, &ens, true).unwrap();
        // oracle: ρ^{-1/2} = √2·1, so F_i = ½·2·ᵗ|±⟩⟨±| = |±⟩⟨±| for real vectors
        let expect_plus = ComplexMatrix::projector(plus().vector());
        let expect_minus = ComplexMatrix::projector(minus().vector());
        assert!(f.element(0).max_abs_diff(&expect_plus) < 1e-12);
        assert!(f.element(1).max_abs_diff(&expect_minus) < 1e-12);
    }

    #[test]
    fn complex_member_is_conjugated() {
        // |+i⟩ = (|0⟩ + i|1⟩)/√2 transposes to |−i⟩⟨−i| in the computational basis.
        let ctx = SteeringContext::new(DensityOperator::maximally_mixed(2)).unwrap();
        let pi = PureState::new(vec![re(S), crate::linalg::c(0.0, S)]).unwrap();
        let mi = PureState::new(vec![re(S), crate::linalg::c(0.0, -S)]).unwrap();
        let ens = Ensemble::from_pure(vec![(0.5, pi), (0.5, mi.clone())]).unwrap();
        let f = build_steering_povm(&ctx, &ens, true).unwrap();
        assert!(
            f.element(0)
                .max_abs_diff(&ComplexMatrix::projector(mi.vector()))
                < 1e-12
        );
        assert!(verify_theorem1(&ctx, &ens, true).unwrap().pass);
    }

    #[test]
    fn random_instances_pass() {
        for trial in 0..40 {
            let mut rng = seeded_rng(77, trial);
            let d = rng.random_range(2..=6);
            let m = rng.random_range(1..=6);
            let rho = random_density(d, &mut rng);
            let ens = random_decomposition(&rho, m, &mut rng).unwrap();
            let ctx = SteeringContext::new(rho).unwrap();
            let report = verify_theorem1(&ctx, &ens, true).unwrap();
            assert!(report.pass, "trial {trial}: {report:?}");
        }
    }

    #[test]
    fn rank_deficient_strict_and_lenient() {
        let rho = DensityOperator::new(ComplexMatrix::from_real_diag(&[0.7, 0.3, 0.0])).unwrap();
        let ctx = SteeringContext::new(rho).unwrap();
        let ens = Ensemble::from_pure(vec![
            (
                0.5,
                PureState::normalized(vec![re(0.7f64.sqrt()), re(0.3f64.sqrt()), re(0.0)]).unwrap(),
            ),
            (
                0.5,
                PureState::normalized(vec![re(0.7f64.sqrt()), re(-(0.3f64.sqrt())), re(0.0)])
                    .unwrap(),
            ),
        ])
        .unwrap();
        assert_eq!(
            build_steering_povm(&ctx, &ens, true).unwrap_err(),
            Error::RankDeficient { rank: 2, dim: 3 }
        );
        assert!(matches!(
            verify_theorem1(&ctx, &ens, true),
            Err(Error::RankDeficient { .. })
        ));
        let f = build_steering_povm(&ctx, &ens, false).unwrap();
        assert_eq!(f.len(), 3);
        assert_eq!(f.label(2), OFF_SUPPORT_LABEL);
        let report = verify_theorem1(&ctx, &ens, false).unwrap();
        assert!(report.pass, "{report:?}");
    }

    #[test]
    fn average_mismatch_rejected() {
        let ctx = SteeringContext::new(DensityOperator::maximally_mixed(2)).unwrap();
        let ens = Ensemble::from_pure(vec![(1.0, PureState::basis(2, 0))]).unwrap();
        assert!(matches!(
            build_steering_povm(&ctx, &ens, true),
            Err(Error::AverageMismatch(_))
        ));
    }

    #[test]
    fn any_schmidt_basis_of_degenerate_state_works() {
        let mut rng = seeded_rng(21, 0);
        let rho = DensityOperator::new(ComplexMatrix::from_real_diag(&[0.4, 0.3, 0.3])).unwrap();
        // rotate inside the degenerate 2-dimensional eigenspace
        let small = random_unitary(2, &mut rng);
        let basis = ComplexMatrix::from_fn(3, |i, j| match (i, j) {
            (0, 0) => re(1.0),
            (0, _) | (_, 0) => re(0.0),
            _ => small.get(i - 1, j - 1),
        });
        let ens = random_decomposition(&rho, 4, &mut rng).unwrap();
        let canonical = SteeringContext::new(rho.clone()).unwrap();
        let rotated = SteeringContext::with_basis(rho, basis).unwrap();
        assert!(
            canonical
                .schmidt_basis()
                .max_abs_diff(rotated.schmidt_basis())
                > 1e-3
        );
        assert!(verify_theorem1(&canonical, &ens, true).unwrap().pass);
        assert!(verify_theorem1(&rotated, &ens, true).unwrap().pass);
    }

    #[test]
    fn with_basis_rejects_non_eigenbasis() {
        let rho = DensityOperator::new(ComplexMatrix::from_real_diag(&[0.8, 0.2])).unwrap();
        let h = ComplexMatrix::from_real(&[&[S, S], &[S, -S]]);
        assert!(SteeringContext::with_basis(rho, h).is_err());
    }
}
