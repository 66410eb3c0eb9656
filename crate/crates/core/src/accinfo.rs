//! Accessible information of an ensemble, bracketed from both sides.
//!
//! The lower end is the best mutual information found over a candidate set
//! of measurements (pretty good measurement, random rank-one POVMs, and a
//! monotone ascent refinement of the promising ones). The upper end is the Holevo
//! quantity.

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{inv_sqrt_psd, support_projector, ComplexMatrix, RANK_TOL};
use crate::quantum::{measure, mutual_information, Ensemble, Povm, SUM_TOL};
use crate::random::{random_povm, seeded_rng};

/// Maximum number of ascent iterations.
pub const SEESAW_MAX_ITER: usize = 200;
/// Ascent stops once an accepted step improves the objective by less than this (bits).
pub const SEESAW_MIN_GAIN: f64 = 1e-9;

/// Which candidate produced the best lower bound.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Pgm,
    Random,
    Seesaw,
}

#[derive(Clone, Debug)]
pub struct InfoEstimate {
    pub lower_bits: f64,
    pub upper_bits: f64,
    pub best_povm: Povm,
    pub method: Method,
    pub restarts: usize,
}

/// `p(x, z) = p_x tr(ρ_x Z_z)`.
pub fn joint_table(ens: &Ensemble, povm: &Povm) -> Result<Vec<Vec<f64>>> {
    ens.members()
        .iter()
        .map(|(p, s)| {
            Ok(measure(s, povm)?
                .into_iter()
                .map(|q| q * p.max(0.0))
                .collect())
        })
        .collect()
}

pub fn info_of_measurement(ens: &Ensemble, povm: &Povm) -> Result<f64> {
    mutual_information(&joint_table(ens, povm)?)
}

/// `p_i ρ^{-1/2} ρ_i ρ^{-1/2}`, completed by the kernel projector of `ρ` when singular.
pub fn pretty_good_measurement(ens: &Ensemble) -> Result<Povm> {
    let d = ens.dim();
    // the members' own mixture rather than the declared average, so the elements sum exactly
    let avg = &ens
        .members()
        .iter()
        .fold(ComplexMatrix::zeros(d), |acc, (p, s)| {
            &acc + &s.matrix().scale(p.max(0.0))
        })
        .hermitian_part();
    let support = support_projector(avg)?;
    let kernel = &ComplexMatrix::identity(d) - &support;
    for (p, s) in ens.members() {
        if *p > 0.0 {
            let leak = (&(&kernel * s.matrix()) * &kernel).trace().re;
            if leak > SUM_TOL {
                return Err(Error::SupportMismatch(leak));
            }
        }
    }
    let inv_sqrt = inv_sqrt_psd(avg, true)?;
    let mut elements: Vec<(String, ComplexMatrix)> = ens
        .members()
        .iter()
        .enumerate()
        .map(|(i, (p, s))| {
            let e = (&(&inv_sqrt * s.matrix()) * &inv_sqrt).scale(p.max(0.0));
            (i.to_string(), e.hermitian_part())
        })
        .collect();
    if kernel.trace().re > RANK_TOL {
        elements.push(("residual".to_string(), kernel));
    }
    Povm::new(elements)
}

/// `χ = S(Σ p_i ρ_i) − Σ p_i S(ρ_i)` in bits.
pub fn holevo_chi(ens: &Ensemble) -> f64 {
    let mixed: f64 = ens
        .members()
        .iter()
        .map(|(p, s)| p.max(0.0) * s.entropy())
        .sum();
    (ens.average().entropy() - mixed).max(0.0)
}

/// Gradient blocks `G_z = Σ_x p_x log₂(p(x|z)/p_x) ρ_x`; the objective equals `Σ_z tr(Z_z G_z)`.
fn gradients(ens: &Ensemble, table: &[Vec<f64>]) -> Vec<ComplexMatrix> {
    let d = ens.dim();
    let outcomes = table.first().map_or(0, Vec::len);
    let mut out = Vec::with_capacity(outcomes);
    for z in 0..outcomes {
        let r: f64 = table.iter().map(|row| row[z]).sum();
        let mut g = ComplexMatrix::zeros(d);
        if r > 0.0 {
            for ((p, s), row) in ens.members().iter().zip(table) {
                if *p <= 0.0 {
                    continue;
                }
                let cond = (row[z] / p).max(1e-15);
                let ratio = (cond / r).log2();
                g = &g + &s.matrix().scale(p * ratio);
            }
        }
        out.push(g);
    }
    out
}

/// Trace of one ascent run; `history` holds the objective after every accepted step.
#[derive(Clone, Debug)]
pub struct SeesawTrace {
    pub povm: Povm,
    pub value: f64,
    pub history: Vec<f64>,
}

/// Monotone ascent on `I(X:Z)` over POVMs with a fixed outcome count.
///
/// Each step rescales `Z_z ↦ S^{-1/2}(1 + εG_z) Z_z (1 + εG_z)S^{-1/2}` and is
/// accepted only if the objective increases; `ε` shrinks on rejection and
/// grows after acceptance.
pub fn seesaw(ens: &Ensemble, start: &Povm) -> Result<SeesawTrace> {
    let d = ens.dim();
    let mut povm = start.clone();
    let mut value = info_of_measurement(ens, &povm)?;
    let mut history = vec![value];
    let mut step = 0.5;

    for _ in 0..SEESAW_MAX_ITER {
        let table = joint_table(ens, &povm)?;
        let grads = gradients(ens, &table);
        let scale = grads.iter().map(|g| g.max_abs()).fold(0.0, f64::max);
        if scale <= 0.0 {
            break;
        }
        let mut accepted = None;
        while step >= 1e-10 {
            let eps = step / scale;
            let moved: Vec<ComplexMatrix> = povm
                .elements()
                .iter()
                .zip(&grads)
                .map(|((_, z), g)| {
                    let k = &ComplexMatrix::identity(d) + &g.scale(eps);
                    &(&k * z) * &k.adjoint()
                })
                .collect();
            let total = moved
                .iter()
                .skip(1)
                .fold(moved[0].clone(), |acc, m| &acc + m);
            let candidate = inv_sqrt_psd(&total, false).ok().and_then(|w| {
                let elements = povm
                    .elements()
                    .iter()
                    .zip(&moved)
                    .map(|((l, _), m)| (l.clone(), (&(&w * m) * &w).hermitian_part()))
                    .collect();
                Povm::new(elements).ok()
            });
            if let Some(c) = candidate {
                let v = info_of_measurement(ens, &c)?;
                if v > value {
                    accepted = Some((c, v));
                    step = (step * 1.5).min(4.0);
                    break;
                }
            }
            step *= 0.5;
        }
        match accepted {
            Some((c, v)) => {
                let gain = v - value;
                povm = c;
                value = v;
                history.push(v);
                if gain < SEESAW_MIN_GAIN {
                    break;
                }
            }
            None => break,
        }
    }
    Ok(SeesawTrace {
        povm,
        value,
        history,
    })
}

/// Best-found accessible information with its Holevo bracket.
///
/// The pretty good measurement is refined by [`seesaw`] first. Then `budget`
/// random rank-one POVMs (between `d` and `min(d², d + m)` outcomes for `m`
/// members) are drawn in order; any candidate whose raw value beats the
/// current best is refined as well. Raising the budget only appends
/// candidates, so the result is nondecreasing in `budget` for a fixed seed.
pub fn estimate(ens: &Ensemble, budget: usize, seed: u64) -> Result<InfoEstimate> {
    if budget == 0 {
        return Err(Error::OptimizerBudgetZero);
    }
    let d = ens.dim();
    let upper = holevo_chi(ens);

    let pgm = pretty_good_measurement(ens)?;
    let mut best = refine(ens, pgm, Method::Pgm)?;

    let max_outcomes = (d * d).min(d + ens.len()).max(d);
    for restart in 0..budget {
        let mut rng = seeded_rng(seed, restart as u64);
        let k = rng.random_range(d..=max_outcomes);
        let candidate = random_povm(d, k, &mut rng);
        let raw = info_of_measurement(ens, &candidate)?;
        if raw > best.0 {
            let refined = refine(ens, candidate, Method::Random)?;
            if refined.0 > best.0 {
                best = refined;
            }
        }
    }

    Ok(InfoEstimate {
        lower_bits: best.0.max(0.0),
        upper_bits: upper,
        best_povm: best.1,
        method: best.2,
        restarts: budget,
    })
}

fn refine(ens: &Ensemble, start: Povm, method: Method) -> Result<(f64, Povm, Method)> {
    let raw = info_of_measurement(ens, &start)?;
    let trace = seesaw(ens, &start)?;
    Ok(if trace.value > raw {
        (trace.value, trace.povm, Method::Seesaw)
    } else {
        (raw, start, method)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::re;
    use crate::quantum::{DensityOperator, PureState};
    use crate::random::random_density;

    const S: f64 = std::f64::consts::FRAC_1_SQRT_2;

    fn zero_plus() -> Ensemble {
        Ensemble::from_pure(vec![
            (0.5, PureState::basis(2, 0)),
            (0.5, PureState::new(vec![re(S), re(S)]).unwrap()),
        ])
        .unwrap()
    }

    fn h2(p: f64) -> f64 {
        if p <= 0.0 || p >= 1.0 {
            0.0
        } else {
            -p * p.log2() - (1.0 - p) * (1.0 - p).log2()
        }
    }

    #[test]
    fn orthogonal_ensemble_perfectly_read() {
        let ens = Ensemble::from_pure(vec![
            (0.2, PureState::basis(3, 0)),
            (0.3, PureState::basis(3, 1)),
            (0.5, PureState::basis(3, 2)),
        ])
        .unwrap();
        let h = ens.prior_entropy();
        assert!((info_of_measurement(&ens, &Povm::computational(3)).unwrap() - h).abs() < 1e-12);
        let pgm = pretty_good_measurement(&ens).unwrap();
        assert!(pgm.is_pvm(1e-9));
        assert!((holevo_chi(&ens) - h).abs() < 1e-9);
        let est = estimate(&ens, 4, 0).unwrap();
        assert!((est.lower_bits - h).abs() < 1e-6 && (est.upper_bits - h).abs() < 1e-6);
    }

    #[test]
    fn identical_members_carry_nothing() {
        let mut rng = seeded_rng(1, 0);
        let s = random_density(3, &mut rng);
        let ens = Ensemble::new(vec![(0.4, s.clone()), (0.6, s)]).unwrap();
        assert!(
            info_of_measurement(&ens, &random_povm(3, 5, &mut rng))
                .unwrap()
                .abs()
                < 1e-12
        );
        assert!(holevo_chi(&ens).abs() < 1e-9);
        let est = estimate(&ens, 3, 0).unwrap();
        assert!(est.lower_bits.abs() < 1e-9);
    }

    #[test]
    fn zero_plus_computational_info() {
        // oracle: joint table [[1/2, 0], [1/4, 1/4]]; rows (1/2, 1/2), cols (3/4, 1/4)
        // I = 1 + H(3/4) − H(1/2, 0, 1/4, 1/4) = 1 + 0.811278 − 1.5
        let expected = 1.0 + h2(0.75) - 1.5;
        let table = joint_table(&zero_plus(), &Povm::computational(2)).unwrap();
        assert!((table[0][0] - 0.5).abs() < 1e-15 && (table[1][1] - 0.25).abs() < 1e-15);
        let got = info_of_measurement(&zero_plus(), &Povm::computational(2)).unwrap();
        assert!((got - expected).abs() < 1e-12);
        assert!((got - 0.3113).abs() < 1e-4);
    }

    #[test]
    fn pgm_examples() {
        let comp = Ensemble::from_pure(vec![
            (0.5, PureState::basis(2, 0)),
            (0.5, PureState::basis(2, 1)),
        ])
        .unwrap();
        let pgm = pretty_good_measurement(&comp).unwrap();
        assert!(
            pgm.element(0)
                .max_abs_diff(&ComplexMatrix::from_real_diag(&[1.0, 0.0]))
                < 1e-12
        );
        assert!(
            pgm.element(1)
                .max_abs_diff(&ComplexMatrix::from_real_diag(&[0.0, 1.0]))
                < 1e-12
        );

        let pgm = pretty_good_measurement(&zero_plus()).unwrap();
        let total = &pgm.element(0).clone() + pgm.element(1);
        assert!(total.max_abs_diff(&ComplexMatrix::identity(2)) < 1e-12);
        assert_eq!(pgm.len(), 2);
    }

    #[test]
    fn pgm_of_rank_deficient_average_gets_residual() {
        let ens = Ensemble::from_pure(vec![
            (0.5, PureState::basis(3, 0)),
            (0.5, PureState::basis(3, 1)),
        ])
        .unwrap();
        let pgm = pretty_good_measurement(&ens).unwrap();
        assert_eq!(pgm.len(), 3);
        assert_eq!(pgm.label(2), "residual");
    }

    #[test]
    fn pgm_support_mismatch() {
        let members = vec![
            (0.5, PureState::basis(2, 0).density()),
            (0.5, PureState::basis(2, 1).density()),
        ];
        let declared =
            DensityOperator::new(ComplexMatrix::from_real_diag(&[0.5 + 5e-9, 0.5 - 5e-9])).unwrap();
        // declared average within tolerance still supports both members
        let ens = Ensemble::with_average(members, declared).unwrap();
        assert!(pretty_good_measurement(&ens).is_ok());
    }

    #[test]
    fn holevo_zero_plus() {
        // oracle: average [[3/4, 1/4], [1/4, 1/4]] has eigenvalues (1 ± 1/√2)/2 = cos²(π/8), sin²(π/8)
        let cos2 = (std::f64::consts::PI / 8.0).cos().powi(2);
        let eig = zero_plus().average().eigenvalues();
        assert!((eig[0] - cos2).abs() < 1e-12);
        assert!((holevo_chi(&zero_plus()) - h2(cos2)).abs() < 1e-12);
        assert!((holevo_chi(&zero_plus()) - 0.6009).abs() < 1e-4);
    }

    #[test]
    fn zero_plus_estimate_reaches_projective_optimum() {
        // oracle: sweep real projective measurements at angle t on the Bloch great circle
        let mut grid_best: f64 = 0.0;
        for k in 0..10_000 {
            let t = std::f64::consts::PI * k as f64 / 10_000.0;
            let v = vec![re((t / 2.0).cos()), re((t / 2.0).sin())];
            let w = vec![re(-(t / 2.0).sin()), re((t / 2.0).cos())];
            let p = Povm::from_elements(vec![
                ComplexMatrix::projector(&v),
                ComplexMatrix::projector(&w),
            ])
            .unwrap();
            grid_best = grid_best.max(info_of_measurement(&zero_plus(), &p).unwrap());
        }
        let est = estimate(&zero_plus(), 8, 3).unwrap();
        assert!(est.lower_bits >= 0.39);
        assert!(
            est.lower_bits >= grid_best - 1e-3,
            "{} vs {grid_best}",
            est.lower_bits
        );
        assert!(est.lower_bits <= est.upper_bits + 1e-6);
    }

    #[test]
    fn seesaw_is_monotone() {
        for t in 0..10 {
            let mut rng = seeded_rng(55, t);
            let members: Vec<_> = (0..3)
                .map(|_| (1.0 / 3.0, random_density(3, &mut rng)))
                .collect();
            let ens = Ensemble::new(members).unwrap();
            let start = random_povm(3, 5, &mut rng);
            let trace = seesaw(&ens, &start).unwrap();
            assert!(trace.history.windows(2).all(|w| w[1] > w[0]));
            assert!(trace.value <= holevo_chi(&ens) + 1e-6);
        }
    }

    #[test]
    fn estimate_deterministic_and_budget_monotone() {
        let mut rng = seeded_rng(66, 0);
        let members: Vec<_> = (0..4)
            .map(|_| (0.25, random_density(2, &mut rng)))
            .collect();
        let ens = Ensemble::new(members).unwrap();
        let a = estimate(&ens, 5, 42).unwrap();
        let b = estimate(&ens, 5, 42).unwrap();
        assert_eq!(a.lower_bits, b.lower_bits);
        let mut prev = 0.0;
        for budget in [1, 2, 4, 8, 16] {
            let e = estimate(&ens, budget, 42).unwrap();
            assert!(e.lower_bits >= prev - 1e-12);
            prev = e.lower_bits.max(prev);
            assert!(e.lower_bits <= e.upper_bits + 1e-6);
            assert!(e.lower_bits <= ens.prior_entropy() + 1e-9);
        }
        assert_eq!(
            estimate(&ens, 0, 1).unwrap_err(),
            Error::OptimizerBudgetZero
        );
    }
}
