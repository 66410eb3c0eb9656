//! Seeded random instances: states, unitaries, measurements, decompositions.
//!
//! Every generator draws from a [`ChaCha8Rng`], so an instance depends only
//! on `(seed, stream)` and is identical across platforms and thread counts.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Exp1, StandardNormal};

use crate::linalg::{c, inv_sqrt_psd, ComplexMatrix, C64};
use crate::quantum::{Attack, DensityOperator, Ensemble, Povm, PureState};

/// Generator for trial `stream` under a global `seed`.
pub fn seeded_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn gaussian(rng: &mut impl Rng) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    c(re, im)
}

pub fn gaussian_vector(d: usize, rng: &mut impl Rng) -> Vec<C64> {
    (0..d).map(|_| gaussian(rng)).collect()
}

/// Haar-distributed pure state.
pub fn random_pure_state(d: usize, rng: &mut impl Rng) -> PureState {
    loop {
        if let Ok(s) = PureState::normalized(gaussian_vector(d, rng)) {
            return s;
        }
    }
}

/// Ginibre-ensemble mixed state `GG†/tr(GG†)`, full rank with probability one.
pub fn random_density(d: usize, rng: &mut impl Rng) -> DensityOperator {
    let g = ComplexMatrix::from_fn(d, |_, _| gaussian(rng));
    let m = &g * &g.adjoint();
    let tr = m.trace().re;
    DensityOperator::from_matrix_lenient(m.scale(1.0 / tr))
}

/// Haar-distributed unitary (QR of a Ginibre matrix with the phase of `R` removed).
pub fn random_unitary(d: usize, rng: &mut impl Rng) -> ComplexMatrix {
    let g = ComplexMatrix::from_fn(d, |_, _| gaussian(rng));
    let qr = g.into_inner().qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..d {
        let z = r[(j, j)];
        let phase = if z.norm() > 0.0 {
            z / z.norm()
        } else {
            c(1.0, 0.0)
        };
        for i in 0..d {
            q[(i, j)] *= phase;
        }
    }
    ComplexMatrix::from_inner(q).expect("square")
}

/// Rank-one POVM from `k ≥ d` random vectors: `h_j = S^{-1/2} g_j`, `S = Σ g_j g_j†`.
pub fn random_povm(d: usize, k: usize, rng: &mut impl Rng) -> Povm {
    let k = k.max(d);
    loop {
        let gs: Vec<Vec<C64>> = (0..k).map(|_| gaussian_vector(d, rng)).collect();
        if let Some(p) = frame_povm(&gs) {
            return p;
        }
    }
}

/// Normalizes a spanning set of vectors into a rank-one POVM.
pub(crate) fn frame_povm(vectors: &[Vec<C64>]) -> Option<Povm> {
    let d = vectors.first()?.len();
    let mut s = ComplexMatrix::zeros(d);
    for g in vectors {
        s = &s + &ComplexMatrix::projector(g);
    }
    let w = inv_sqrt_psd(&s, false).ok()?;
    let elements = vectors
        .iter()
        .map(|g| ComplexMatrix::projector(&w.apply(g)))
        .collect();
    Povm::from_elements(elements).ok()
}

/// Projective measurement onto a Haar-random basis.
pub fn random_pvm(d: usize, rng: &mut impl Rng) -> Povm {
    Povm::from_basis(&random_unitary(d, rng)).expect("Haar unitary")
}

pub fn random_attack(system_dim: usize, ancilla_dim: usize, rng: &mut impl Rng) -> Attack {
    let omega = random_pure_state(ancilla_dim, rng);
    let u = random_unitary(system_dim * ancilla_dim, rng);
    Attack::new(ancilla_dim, omega, u).expect("random attack is valid")
}

/// Flat-Dirichlet weights.
pub fn random_simplex(n: usize, rng: &mut impl Rng) -> Vec<f64> {
    let raw: Vec<f64> = (0..n).map(|_| rng.sample::<f64, _>(Exp1) + 1e-12).collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|x| x / total).collect()
}

/// Random `m`-member decomposition of a given state.
///
/// Draws `m − 1` Haar pure states with flat-Dirichlet weights scaled to a
/// total `t`, then adds the residual `ρ − Σ w_j |ψ_j⟩⟨ψ_j|` as the last member.
/// `t` is halved until the residual is positive; `t ≤ λ_min(ρ)` always works.
/// Returns `None` if `ρ` is singular and `m > 1`.
pub fn random_decomposition(
    rho: &DensityOperator,
    m: usize,
    rng: &mut impl Rng,
) -> Option<Ensemble> {
    if m <= 1 {
        return Ensemble::with_average(vec![(1.0, rho.clone())], rho.clone()).ok();
    }
    let d = rho.dim();
    let lam_min = rho.eigenvalues().last().copied().unwrap_or(0.0);
    if lam_min <= 1e-10 {
        return None;
    }
    let pure: Vec<PureState> = (0..m - 1).map(|_| random_pure_state(d, rng)).collect();
    let shares = random_simplex(m - 1, rng);
    let u: f64 = rng.random_range(0.3..0.95);
    let mut total = (lam_min * (m - 1) as f64).min(0.9) * u;
    loop {
        let mut residual = rho.matrix().clone();
        for (s, w) in pure.iter().zip(&shares) {
            residual = &residual - &ComplexMatrix::projector(s.vector()).scale(total * w);
        }
        let res_state = residual.scale(1.0 / (1.0 - total));
        if let Ok(state) = DensityOperator::new(res_state) {
            let mut members: Vec<(f64, DensityOperator)> = pure
                .iter()
                .zip(&shares)
                .map(|(s, w)| (total * w, s.density()))
                .collect();
            members.push((1.0 - total, state));
            return Ensemble::with_average(members, rho.clone()).ok();
        }
        if total <= lam_min * 0.5 {
            return None;
        }
        total *= 0.5;
    }
}
