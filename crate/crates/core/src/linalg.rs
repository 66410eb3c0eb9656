//! Dense complex linear algebra over small square matrices.
//!
//! [`ComplexMatrix`] wraps an `nalgebra` matrix and adds the handful of
//! operator-level routines the rest of the crate needs: Hermitian
//! eigendecomposition with a reproducible eigenvector convention, spectral
//! functions of positive semidefinite matrices, the spectral norm, Kronecker
//! products, partial traces and basis-dependent transposition.

use std::fmt;
use std::ops::{Add, Mul, Sub};

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex;

use crate::error::{Error, Result};

pub type C64 = Complex<f64>;

/// Asymmetry accepted by [`eig_hermitian`] (relative to the largest entry).
pub const HERMITIAN_TOL: f64 = 1e-9;
/// Most negative eigenvalue still treated as zero by [`func_psd`].
pub const PSD_TOL: f64 = 1e-9;
/// Eigenvalues above this threshold span the support of a PSD matrix.
pub const RANK_TOL: f64 = 1e-10;
/// Max-entry deviation of `U†U` from the identity accepted for unitaries.
pub const UNITARY_TOL: f64 = 1e-9;
/// Eigenvalues closer than this are treated as one degenerate cluster.
const DEGENERACY_TOL: f64 = 1e-10;
/// Components below this modulus are skipped when fixing eigenvector phases.
const PHASE_TOL: f64 = 1e-10;

#[inline]
pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

#[inline]
pub fn re(x: f64) -> C64 {
    C64::new(x, 0.0)
}

/// `⟨u|v⟩`, conjugate-linear in the first argument.
pub fn inner(u: &[C64], v: &[C64]) -> C64 {
    u.iter().zip(v).map(|(a, b)| a.conj() * b).sum()
}

pub fn norm(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Kronecker product of two vectors (left factor most significant).
pub fn kron_vec(a: &[C64], b: &[C64]) -> Vec<C64> {
    let mut out = Vec::with_capacity(a.len() * b.len());
    for x in a {
        for y in b {
            out.push(x * y);
        }
    }
    out
}

/// Dense square complex matrix.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix(DMatrix<C64>);

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix({}x{})", self.dim(), self.dim())?;
        for i in 0..self.dim() {
            let row: Vec<String> = (0..self.dim())
                .map(|j| {
                    let z = self.0[(i, j)];
                    format!("{:+.6}{:+.6}i", z.re, z.im)
                })
                .collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        Ok(())
    }
}

impl ComplexMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self(DMatrix::zeros(dim, dim))
    }

    pub fn identity(dim: usize) -> Self {
        Self(DMatrix::identity(dim, dim))
    }

    pub fn from_fn(dim: usize, f: impl FnMut(usize, usize) -> C64) -> Self {
        Self(DMatrix::from_fn(dim, dim, f))
    }

    /// Builds a matrix from rows; every row must have as many entries as there are rows.
    pub fn from_rows(rows: &[Vec<C64>]) -> Result<Self> {
        let dim = rows.len();
        if dim == 0 {
            return Err(Error::DimensionMismatch {
                expected: 1,
                found: 0,
            });
        }
        for row in rows {
            if row.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: row.len(),
                });
            }
        }
        Ok(Self::from_fn(dim, |i, j| rows[i][j]))
    }

    /// Convenience constructor from real rows (panics on ragged input).
    pub fn from_real(rows: &[&[f64]]) -> Self {
        let dim = rows.len();
        assert!(rows.iter().all(|r| r.len() == dim), "ragged real matrix");
        Self::from_fn(dim, |i, j| re(rows[i][j]))
    }

    pub fn from_real_diag(diag: &[f64]) -> Self {
        let n = diag.len();
        Self::from_fn(n, |i, j| if i == j { re(diag[i]) } else { C64::default() })
    }

    /// Matrix whose columns are the given vectors.
    pub fn from_columns(cols: &[Vec<C64>]) -> Result<Self> {
        let dim = cols.len();
        for col in cols {
            if col.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: col.len(),
                });
            }
        }
        Ok(Self::from_fn(dim, |i, j| cols[j][i]))
    }

    pub fn from_inner(m: DMatrix<C64>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::DimensionMismatch {
                expected: m.nrows(),
                found: m.ncols(),
            });
        }
        Ok(Self(m))
    }

    /// `|u⟩⟨v|`.
    pub fn outer(u: &[C64], v: &[C64]) -> Self {
        assert_eq!(u.len(), v.len(), "outer product of unequal lengths");
        Self::from_fn(u.len(), |i, j| u[i] * v[j].conj())
    }

    /// `|v⟩⟨v|`.
    pub fn projector(v: &[C64]) -> Self {
        Self::outer(v, v)
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.0[(i, j)]
    }

    pub fn set(&mut self, i: usize, j: usize, v: C64) {
        self.0[(i, j)] = v;
    }

    pub fn as_inner(&self) -> &DMatrix<C64> {
        &self.0
    }

    pub fn into_inner(self) -> DMatrix<C64> {
        self.0
    }

    pub fn column(&self, j: usize) -> Vec<C64> {
        self.0.column(j).iter().copied().collect()
    }

    pub fn to_rows(&self) -> Vec<Vec<C64>> {
        (0..self.dim())
            .map(|i| (0..self.dim()).map(|j| self.0[(i, j)]).collect())
            .collect()
    }

    pub fn adjoint(&self) -> Self {
        Self(self.0.adjoint())
    }

    pub fn transpose(&self) -> Self {
        Self(self.0.transpose())
    }

    pub fn conj(&self) -> Self {
        Self(self.0.map(|z| z.conj()))
    }

    pub fn trace(&self) -> C64 {
        self.0.trace()
    }

    pub fn scale(&self, s: f64) -> Self {
        Self(self.0.map(|z| z * s))
    }

    pub fn scale_c(&self, s: C64) -> Self {
        Self(self.0.map(|z| z * s))
    }

    pub fn apply(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(v.len(), self.dim(), "matrix-vector dimension mismatch");
        (0..self.dim())
            .map(|i| (0..self.dim()).map(|j| self.0[(i, j)] * v[j]).sum())
            .collect()
    }

    /// `⟨v|M|v⟩`.
    pub fn expectation(&self, v: &[C64]) -> C64 {
        inner(v, &self.apply(v))
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().fold(0.0, |m, z| m.max(z.norm()))
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.dim(), other.dim(), "max_abs_diff dimension mismatch");
        self.0
            .iter()
            .zip(other.0.iter())
            .fold(0.0, |m, (a, b)| m.max((a - b).norm()))
    }

    /// `max |M_ij − conj(M_ji)|`.
    pub fn hermitian_deviation(&self) -> f64 {
        let d = self.dim();
        let mut dev: f64 = 0.0;
        for i in 0..d {
            for j in i..d {
                dev = dev.max((self.0[(i, j)] - self.0[(j, i)].conj()).norm());
            }
        }
        dev
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermitian_deviation() <= tol
    }

    /// `(M + M†)/2`.
    pub fn hermitian_part(&self) -> Self {
        Self((&self.0 + self.0.adjoint()).map(|z| z * 0.5))
    }

    /// `max |U†U − 1|`.
    pub fn unitarity_deviation(&self) -> f64 {
        let prod = Self(self.0.adjoint() * &self.0);
        prod.max_abs_diff(&Self::identity(self.dim()))
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        self.unitarity_deviation() <= tol
    }

    fn check_unitary(&self) -> Result<()> {
        let dev = self.unitarity_deviation();
        if dev > UNITARY_TOL {
            return Err(Error::NotUnitary(dev));
        }
        Ok(())
    }

    pub fn ensure_unitary(&self) -> Result<()> {
        self.check_unitary()
    }
}

impl<'a> Mul<&'a ComplexMatrix> for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &'a ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix(&self.0 * &rhs.0)
    }
}

impl<'a> Add<&'a ComplexMatrix> for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: &'a ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix(&self.0 + &rhs.0)
    }
}

impl<'a> Sub<&'a ComplexMatrix> for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: &'a ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix(&self.0 - &rhs.0)
    }
}

/// Eigenvalues sorted descending with the matching unitary of column eigenvectors.
#[derive(Clone, Debug)]
pub struct EigenDecomposition {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: ComplexMatrix,
}

impl EigenDecomposition {
    /// `V·diag(f(λ))·V†`.
    pub fn reconstruct_with(&self, mut f: impl FnMut(f64) -> f64) -> ComplexMatrix {
        let v = self.eigenvectors.as_inner();
        let d = v.nrows();
        let mut scaled = v.clone();
        for (j, &lam) in self.eigenvalues.iter().enumerate() {
            let s = f(lam);
            for i in 0..d {
                scaled[(i, j)] *= s;
            }
        }
        ComplexMatrix(scaled * v.adjoint())
    }

    pub fn reconstruct(&self) -> ComplexMatrix {
        self.reconstruct_with(|x| x)
    }

    /// Number of eigenvalues above [`RANK_TOL`].
    pub fn rank(&self) -> usize {
        self.eigenvalues.iter().filter(|&&l| l > RANK_TOL).count()
    }
}

/// Hermitian eigendecomposition.
///
/// Eigenvalues come back in descending order. Inside a degenerate cluster the
/// eigenvectors are replaced by the Gram-Schmidt orthonormalization of the
/// computational basis vectors projected onto the eigenspace (in index
/// order), and every eigenvector is rotated so that its first non-negligible
/// component is real and positive. The output is therefore a function of the
/// matrix alone.
pub fn eig_hermitian(m: &ComplexMatrix) -> Result<EigenDecomposition> {
    let scale = m.max_abs().max(1.0);
    let dev = m.hermitian_deviation();
    if dev > HERMITIAN_TOL * scale {
        return Err(Error::NotHermitian(dev));
    }
    eig_hermitian_unchecked(&m.hermitian_part())
}

fn eig_hermitian_unchecked(h: &ComplexMatrix) -> Result<EigenDecomposition> {
    let d = h.dim();
    let eig = SymmetricEigen::try_new(h.0.clone(), f64::EPSILON, 0).ok_or(Error::NoConvergence)?;

    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let eigenvalues: Vec<f64> = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let mut cols: Vec<Vec<C64>> = order
        .iter()
        .map(|&k| eig.eigenvectors.column(k).iter().copied().collect())
        .collect();

    let spread = eigenvalues.iter().fold(1.0f64, |m, l| m.max(l.abs()));
    let mut start = 0;
    while start < d {
        let mut end = start + 1;
        while end < d && eigenvalues[end - 1] - eigenvalues[end] <= DEGENERACY_TOL * spread {
            end += 1;
        }
        if end - start > 1 {
            let canon = canonical_span(&cols[start..end], d);
            cols.splice(start..end, canon);
        }
        start = end;
    }

    for col in cols.iter_mut() {
        fix_phase(col);
    }

    Ok(EigenDecomposition {
        eigenvalues,
        eigenvectors: ComplexMatrix::from_columns(&cols)?,
    })
}

/// Orthonormal basis of `span(vs)` obtained by projecting `e_0, e_1, …` onto
/// the span and orthonormalizing in index order.
fn canonical_span(vs: &[Vec<C64>], d: usize) -> Vec<Vec<C64>> {
    let k = vs.len();
    let mut out: Vec<Vec<C64>> = Vec::with_capacity(k);
    for j in 0..d {
        if out.len() == k {
            break;
        }
        // P e_j = Σ_v v · conj(v_j)
        let mut w = vec![C64::default(); d];
        for v in vs {
            let coef = v[j].conj();
            for (wi, vi) in w.iter_mut().zip(v) {
                *wi += vi * coef;
            }
        }
        for u in &out {
            let proj = inner(u, &w);
            for (wi, ui) in w.iter_mut().zip(u) {
                *wi -= ui * proj;
            }
        }
        let n = norm(&w);
        if n > 1e-4 {
            out.push(w.into_iter().map(|z| z / n).collect());
        }
    }
    // Numerically impossible unless vs is not orthonormal; keep the input then.
    if out.len() < k {
        return vs.to_vec();
    }
    out
}

fn fix_phase(v: &mut [C64]) {
    if let Some(z) = v.iter().copied().find(|z| z.norm() > PHASE_TOL) {
        let phase = z.conj() / z.norm();
        for x in v.iter_mut() {
            *x *= phase;
        }
    }
}

/// Applies `f` to the spectrum of a positive semidefinite matrix.
///
/// Eigenvalues in `[-PSD_TOL, 0)` are clipped to zero. With `support_only`,
/// `f` is evaluated only on eigenvalues above [`RANK_TOL`] and the kernel is
/// mapped to zero.
pub fn func_psd(
    m: &ComplexMatrix,
    f: impl Fn(f64) -> f64,
    support_only: bool,
) -> Result<ComplexMatrix> {
    let eig = eig_hermitian(m)?;
    let min = eig.eigenvalues.last().copied().unwrap_or(0.0);
    if min < -PSD_TOL {
        return Err(Error::NotPsd(min));
    }
    let mapped: Vec<f64> = eig
        .eigenvalues
        .iter()
        .map(|&l| {
            let l = l.max(0.0);
            if support_only && l <= RANK_TOL {
                0.0
            } else {
                f(l)
            }
        })
        .collect();
    if mapped.iter().any(|x| !x.is_finite()) {
        return Err(Error::SingularOffSupport);
    }
    let mut it = mapped.into_iter();
    Ok(eig.reconstruct_with(|_| it.next().unwrap_or(0.0)))
}

pub fn sqrt_psd(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    func_psd(m, f64::sqrt, false)
}

/// `M^{-1/2}` on the support of `M` (pseudo-inverse square root).
pub fn inv_sqrt_psd(m: &ComplexMatrix, support_only: bool) -> Result<ComplexMatrix> {
    func_psd(m, |x| 1.0 / x.sqrt(), support_only)
}

/// Orthogonal projector onto the span of eigenvectors with eigenvalue above [`RANK_TOL`].
pub fn support_projector(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    let eig = eig_hermitian(m)?;
    Ok(eig.reconstruct_with(|l| if l > RANK_TOL { 1.0 } else { 0.0 }))
}

/// Spectral norm (largest singular value), via the top eigenvalue of `M†M`.
pub fn op_norm(m: &ComplexMatrix) -> f64 {
    if m.dim() == 0 {
        return 0.0;
    }
    let gram = (&m.adjoint() * m).hermitian_part();
    match eig_hermitian_unchecked(&gram) {
        Ok(eig) => eig.eigenvalues[0].max(0.0).sqrt(),
        Err(_) => f64::NAN,
    }
}

/// Kronecker product; composite index `i = i_a·dim(b) + i_b`.
pub fn tensor(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    ComplexMatrix(a.0.kronecker(&b.0))
}

/// Kronecker product of a list of factors, left to right.
pub fn tensor_all(factors: &[ComplexMatrix]) -> ComplexMatrix {
    factors
        .iter()
        .skip(1)
        .fold(factors[0].clone(), |acc, f| tensor(&acc, f))
}

/// Which half of a bipartite system to keep.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Keep {
    A,
    B,
}

pub fn partial_trace(m: &ComplexMatrix, dims: (usize, usize), keep: Keep) -> Result<ComplexMatrix> {
    let keep = match keep {
        Keep::A => [0usize],
        Keep::B => [1usize],
    };
    partial_trace_multi(m, &[dims.0, dims.1], &keep)
}

/// Reduced operator on the factors listed in `keep` (in the order given by `dims`).
pub fn partial_trace_multi(
    m: &ComplexMatrix,
    dims: &[usize],
    keep: &[usize],
) -> Result<ComplexMatrix> {
    let total: usize = dims.iter().product();
    if m.dim() != total {
        return Err(Error::DimensionMismatch {
            expected: total,
            found: m.dim(),
        });
    }
    let layout = FactorLayout::new(dims, keep)?;
    let (kd, rd) = (layout.kept_dim, layout.rest_dim);
    let mut out = ComplexMatrix::zeros(kd);
    for k1 in 0..kd {
        for k2 in 0..kd {
            let mut acc = C64::default();
            for r in 0..rd {
                acc += m.0[(layout.index(k1, r), layout.index(k2, r))];
            }
            out.0[(k1, k2)] = acc;
        }
    }
    Ok(out)
}

/// Maps (kept index, traced index) pairs onto composite indices.
#[derive(Clone, Debug)]
pub(crate) struct FactorLayout {
    pub kept_dim: usize,
    pub rest_dim: usize,
    kept_map: Vec<usize>,
    rest_map: Vec<usize>,
}

impl FactorLayout {
    pub(crate) fn new(dims: &[usize], keep: &[usize]) -> Result<Self> {
        for (pos, &k) in keep.iter().enumerate() {
            if k >= dims.len() || keep[..pos].contains(&k) {
                return Err(Error::DimensionMismatch {
                    expected: dims.len(),
                    found: k,
                });
            }
        }
        let mut strides = vec![1usize; dims.len()];
        for f in (0..dims.len().saturating_sub(1)).rev() {
            strides[f] = strides[f + 1] * dims[f + 1];
        }
        let rest: Vec<usize> = (0..dims.len()).filter(|f| !keep.contains(f)).collect();
        let offsets = |factors: &[usize]| -> Vec<usize> {
            let mut out = vec![0usize];
            for &f in factors {
                let mut next = Vec::with_capacity(out.len() * dims[f]);
                for &base in &out {
                    for x in 0..dims[f] {
                        next.push(base + x * strides[f]);
                    }
                }
                out = next;
            }
            out
        };
        let kept_map = offsets(keep);
        let rest_map = offsets(&rest);
        Ok(Self {
            kept_dim: kept_map.len(),
            rest_dim: rest_map.len(),
            kept_map,
            rest_map,
        })
    }

    #[inline]
    pub(crate) fn index(&self, kept: usize, rest: usize) -> usize {
        self.kept_map[kept] + self.rest_map[rest]
    }
}

/// Transpose with respect to the orthonormal basis given by the columns of `basis`:
/// `V·(V†MV)ᵀ·V†`.
pub fn transpose_in_basis(m: &ComplexMatrix, basis: &ComplexMatrix) -> Result<ComplexMatrix> {
    if m.dim() != basis.dim() {
        return Err(Error::DimensionMismatch {
            expected: m.dim(),
            found: basis.dim(),
        });
    }
    basis.check_unitary()?;
    let v = &basis.0;
    let local = v.adjoint() * &m.0 * v;
    Ok(ComplexMatrix(v * local.transpose() * v.adjoint()))
}
