//! Entropic and variance-based uncertainty relations for finite measurements.

use crate::error::{Error, Result};
use crate::linalg::{op_norm, sqrt_psd, ComplexMatrix};
use crate::quantum::{measure, shannon_entropy, DensityOperator, Povm};

/// Slack for the entropic and Robertson inequalities.
pub const UR_SLACK: f64 = 1e-9;
/// Idempotence/orthogonality tolerance for projection-valued measurements.
pub const PVM_TOL: f64 = 1e-8;

/// `c = max_{a,b} ‖A_a^{1/2} B_b^{1/2}‖` and the entropic bound `−2 log₂ c`.
#[derive(Clone, Debug, PartialEq)]
pub struct OverlapBound {
    pub c: f64,
    pub bound_bits: f64,
    pub argmax: (String, String),
    pub argmax_index: (usize, usize),
}

fn sqrt_elements(p: &Povm) -> Result<Vec<ComplexMatrix>> {
    p.elements().iter().map(|(_, m)| sqrt_psd(m)).collect()
}

/// Exhaustive maximum of `‖A_a^{1/2} B_b^{1/2}‖` over all element pairs.
pub fn overlap_bound(a: &Povm, b: &Povm) -> Result<OverlapBound> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            found: b.dim(),
        });
    }
    let ra = sqrt_elements(a)?;
    let rb = sqrt_elements(b)?;
    let mut best = (f64::NEG_INFINITY, 0, 0);
    for (i, x) in ra.iter().enumerate() {
        for (j, y) in rb.iter().enumerate() {
            let n = op_norm(&(x * y));
            if n > best.0 {
                best = (n, i, j);
            }
        }
    }
    let (c, i, j) = best;
    Ok(OverlapBound {
        c,
        bound_bits: -2.0 * c.log2(),
        argmax: (a.label(i).to_string(), b.label(j).to_string()),
        argmax_index: (i, j),
    })
}

/// `max_{a,b} ‖A_a B_b‖` without square roots; equals [`overlap_bound`]'s `c` for PVMs.
pub fn pvm_overlap(a: &Povm, b: &Povm) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            found: b.dim(),
        });
    }
    let mut best: f64 = 0.0;
    for (_, x) in a.elements() {
        for (_, y) in b.elements() {
            best = best.max(op_norm(&(x * y)));
        }
    }
    Ok(best)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EurCheck {
    pub lhs_bits: f64,
    pub rhs_bits: f64,
    pub pass: bool,
}

impl EurCheck {
    pub fn margin(&self) -> f64 {
        self.lhs_bits - self.rhs_bits
    }
}

/// `H(A|ρ) + H(B|ρ) ≥ −2 log₂ c`.
pub fn check_eur(rho: &DensityOperator, a: &Povm, b: &Povm) -> Result<EurCheck> {
    let bound = overlap_bound(a, b)?;
    check_eur_with(rho, a, b, &bound)
}

/// [`check_eur`] with a precomputed overlap bound.
pub fn check_eur_with(
    rho: &DensityOperator,
    a: &Povm,
    b: &Povm,
    bound: &OverlapBound,
) -> Result<EurCheck> {
    let lhs = shannon_entropy(&measure(rho, a)?)? + shannon_entropy(&measure(rho, b)?)?;
    Ok(EurCheck {
        lhs_bits: lhs,
        rhs_bits: bound.bound_bits,
        pass: lhs >= bound.bound_bits - UR_SLACK,
    })
}

/// Projection-valued measurement with a real value attached to each outcome.
#[derive(Clone, Debug)]
pub struct Pvm {
    povm: Povm,
    values: Vec<f64>,
}

impl Pvm {
    pub fn new(povm: Povm, values: Vec<f64>) -> Result<Self> {
        if values.len() != povm.len() {
            return Err(Error::DimensionMismatch {
                expected: povm.len(),
                found: values.len(),
            });
        }
        if let Some((what, dev)) = povm.pvm_defect() {
            if dev > PVM_TOL {
                return Err(Error::NotPvm(format!("{what} (deviation {dev:.3e})")));
            }
        }
        Ok(Self { povm, values })
    }

    pub fn povm(&self) -> &Povm {
        &self.povm
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// `Â = Σ_a a·A_a`.
    pub fn observable(&self) -> ComplexMatrix {
        self.povm
            .elements()
            .iter()
            .zip(&self.values)
            .fold(ComplexMatrix::zeros(self.povm.dim()), |acc, ((_, m), v)| {
                &acc + &m.scale(*v)
            })
    }

    /// `tr(ρÂ)`.
    pub fn expectation(&self, rho: &DensityOperator) -> f64 {
        (rho.matrix() * &self.observable()).trace().re
    }

    /// `(⟨Â²⟩ − ⟨Â⟩²)^{1/2}`.
    pub fn stddev(&self, rho: &DensityOperator) -> f64 {
        let a = self.observable();
        let mean = (rho.matrix() * &a).trace().re;
        let second = (&(rho.matrix() * &a) * &a).trace().re;
        (second - mean * mean).max(0.0).sqrt()
    }

    /// Same projectors, values permuted: outcome `a` takes the old value of outcome `perm[a]`.
    pub fn relabeled(&self, perm: &[usize]) -> Result<Pvm> {
        let n = self.values.len();
        let mut seen = vec![false; n];
        if perm.len() != n {
            return Err(Error::InvalidRelabel(format!(
                "expected {n} entries, got {}",
                perm.len()
            )));
        }
        for &p in perm {
            if p >= n || seen[p] {
                return Err(Error::InvalidRelabel(format!(
                    "{perm:?} is not a permutation"
                )));
            }
            seen[p] = true;
        }
        Ok(Pvm {
            povm: self.povm.clone(),
            values: perm.iter().map(|&p| self.values[p]).collect(),
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RobertsonCheck {
    pub std_a: f64,
    pub std_b: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub pass: bool,
}

/// `ΔA·ΔB ≥ ½|tr(ρ[Â, B̂])|`.
pub fn robertson_check(rho: &DensityOperator, a: &Pvm, b: &Pvm) -> Result<RobertsonCheck> {
    if a.povm.dim() != rho.dim() || b.povm.dim() != rho.dim() {
        return Err(Error::DimensionMismatch {
            expected: rho.dim(),
            found: a.povm.dim().max(b.povm.dim()),
        });
    }
    let (oa, ob) = (a.observable(), b.observable());
    let comm = &(&oa * &ob) - &(&ob * &oa);
    let rhs = 0.5 * (rho.matrix() * &comm).trace().norm();
    let (std_a, std_b) = (a.stddev(rho), b.stddev(rho));
    let lhs = std_a * std_b;
    Ok(RobertsonCheck {
        std_a,
        std_b,
        lhs,
        rhs,
        pass: lhs >= rhs - UR_SLACK,
    })
}

/// Standard deviation and outcome entropy before and after permuting outcome values.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ShuffleDemo {
    pub stddev_before: f64,
    pub stddev_after: f64,
    pub entropy_before: f64,
    pub entropy_after: f64,
}

pub fn label_shuffle_demo(rho: &DensityOperator, pvm: &Pvm, perm: &[usize]) -> Result<ShuffleDemo> {
    let shuffled = pvm.relabeled(perm)?;
    // Entropy reads only the outcome distribution, which relabeling leaves alone.
    let entropy_before = shannon_entropy(&measure(rho, pvm.povm())?)?;
    let entropy_after = shannon_entropy(&measure(rho, shuffled.povm())?)?;
    Ok(ShuffleDemo {
        stddev_before: pvm.stddev(rho),
        stddev_after: shuffled.stddev(rho),
        entropy_before,
        entropy_after,
    })
}
