//! The nonlinear eigenvalue problem abstraction and eigenpair bookkeeping.

use std::sync::atomic::{AtomicUsize, Ordering as AtomicOrdering};

use faer::{Mat, MatRef};

use crate::contour::Contour;
use crate::error::{NepError, Result};
use crate::linalg::DenseLu;
use crate::c64;

/// A holomorphic matrix-valued function `T(z)` of size `n × n`.
///
/// Only [`Nep::dim`] and [`Nep::evaluate`] are required. Problems whose dense
/// form is too large to materialize override `apply`, `frobenius_norm` and
/// `factorize` so that `evaluate` is never called on the hot path.
///
/// Implementations must tolerate concurrent `factorize` calls at distinct shifts.
pub trait Nep: Send + Sync {
    fn dim(&self) -> usize;

    /// Dense `T(z)`.
    fn evaluate(&self, z: c64) -> Mat<c64>;

    /// `T(z) · x` for an `n × k` block.
    fn apply(&self, z: c64, x: MatRef<'_, c64>) -> Mat<c64> {
        self.evaluate(z) * x
    }

    /// `‖T(z)‖_F`.
    fn frobenius_norm(&self, z: c64) -> f64 {
        self.evaluate(z).norm_l2()
    }

    /// Factorizes `T(z)` for repeated multi-right-hand-side solves.
    fn factorize(&self, z: c64) -> Result<Box<dyn Factorization>> {
        let t = self.evaluate(z);
        DenseLu::new(t.as_ref())
            .map(|lu| Box::new(lu) as Box<dyn Factorization>)
            .ok_or(NepError::Singular(z))
    }
}

/// A factorization of `T(z)` at a fixed shift.
pub trait Factorization: Send + Sync {
    /// `T(z)⁻¹ · rhs`.
    fn solve(&self, rhs: MatRef<'_, c64>) -> Mat<c64>;
}

impl Factorization for DenseLu {
    fn solve(&self, rhs: MatRef<'_, c64>) -> Mat<c64> {
        DenseLu::solve(self, rhs)
    }
}

impl<P: Nep + ?Sized> Nep for &P {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn evaluate(&self, z: c64) -> Mat<c64> {
        (**self).evaluate(z)
    }
    fn apply(&self, z: c64, x: MatRef<'_, c64>) -> Mat<c64> {
        (**self).apply(z, x)
    }
    fn frobenius_norm(&self, z: c64) -> f64 {
        (**self).frobenius_norm(z)
    }
    fn factorize(&self, z: c64) -> Result<Box<dyn Factorization>> {
        (**self).factorize(z)
    }
}

impl<P: Nep + ?Sized> Nep for Box<P> {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn evaluate(&self, z: c64) -> Mat<c64> {
        (**self).evaluate(z)
    }
    fn apply(&self, z: c64, x: MatRef<'_, c64>) -> Mat<c64> {
        (**self).apply(z, x)
    }
    fn frobenius_norm(&self, z: c64) -> f64 {
        (**self).frobenius_norm(z)
    }
    fn factorize(&self, z: c64) -> Result<Box<dyn Factorization>> {
        (**self).factorize(z)
    }
}

/// Wraps a problem and counts `factorize` calls.
pub struct CountingNep<P> {
    inner: P,
    factorizations: AtomicUsize,
}

impl<P: Nep> CountingNep<P> {
    pub fn new(inner: P) -> Self {
        CountingNep {
            inner,
            factorizations: AtomicUsize::new(0),
        }
    }

    pub fn factorizations(&self) -> usize {
        self.factorizations.load(AtomicOrdering::SeqCst)
    }

    pub fn reset(&self) {
        self.factorizations.store(0, AtomicOrdering::SeqCst);
    }

    pub fn inner(&self) -> &P {
        &self.inner
    }
}

impl<P: Nep> Nep for CountingNep<P> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }
    fn evaluate(&self, z: c64) -> Mat<c64> {
        self.inner.evaluate(z)
    }
    fn apply(&self, z: c64, x: MatRef<'_, c64>) -> Mat<c64> {
        self.inner.apply(z, x)
    }
    fn frobenius_norm(&self, z: c64) -> f64 {
        self.inner.frobenius_norm(z)
    }
    fn factorize(&self, z: c64) -> Result<Box<dyn Factorization>> {
        self.factorizations.fetch_add(1, AtomicOrdering::SeqCst);
        self.inner.factorize(z)
    }
}

/// Relative residual `‖T(λ)x‖₂ / (‖x‖₂ ‖T(λ)‖_F)`.
pub fn residual<P: Nep + ?Sized>(problem: &P, lambda: c64, x: MatRef<'_, c64>) -> Result<f64> {
    if x.ncols() != 1 {
        return Err(NepError::invalid("residual expects a single column"));
    }
    if x.nrows() != problem.dim() {
        return Err(NepError::DimensionMismatch {
            expected: problem.dim(),
            found: x.nrows(),
        });
    }
    let xnorm = x.norm_l2();
    if !(xnorm > 0.0) {
        return Err(NepError::invalid("residual of a zero vector is undefined"));
    }
    let tnorm = problem.frobenius_norm(lambda);
    if tnorm == 0.0 {
        return Err(NepError::DegenerateProblem(lambda));
    }
    Ok(problem.apply(lambda, x).norm_l2() / (xnorm * tnorm))
}

/// Eigenvalues paired with eigenvector columns and their residuals.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenpairSet {
    values: Vec<c64>,
    vectors: Mat<c64>,
    residuals: Vec<f64>,
}

impl EigenpairSet {
    /// Pairs column `i` of `vectors` with `values[i]`. Residuals are left as NaN
    /// until [`EigenpairSet::finalize`].
    pub fn new(values: Vec<c64>, vectors: Mat<c64>) -> Result<Self> {
        if values.len() != vectors.ncols() {
            return Err(NepError::DimensionMismatch {
                expected: values.len(),
                found: vectors.ncols(),
            });
        }
        let residuals = vec![f64::NAN; values.len()];
        Ok(EigenpairSet {
            values,
            vectors,
            residuals,
        })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.vectors.nrows()
    }

    pub fn values(&self) -> &[c64] {
        &self.values
    }

    pub fn vectors(&self) -> MatRef<'_, c64> {
        self.vectors.as_ref()
    }

    pub fn vector(&self, i: usize) -> MatRef<'_, c64> {
        self.vectors.as_ref().subcols(i, 1)
    }

    pub fn residuals(&self) -> &[f64] {
        &self.residuals
    }

    /// Indices of pairs whose eigenvalue lies inside `contour`.
    pub fn interior(&self, contour: &Contour) -> Vec<usize> {
        (0..self.len())
            .filter(|&i| contour.contains(self.values[i]))
            .collect()
    }

    /// Normalizes every column, recomputes residuals and sorts the pairs:
    /// interior first (when a contour is given), then by ascending residual.
    /// Zero columns are dropped with a warning. Idempotent up to rounding.
    pub fn finalize<P: Nep + ?Sized>(
        &self,
        problem: &P,
        contour: Option<&Contour>,
    ) -> Result<EigenpairSet> {
        let n = problem.dim();
        if self.dim() != n {
            return Err(NepError::DimensionMismatch {
                expected: n,
                found: self.dim(),
            });
        }
        let mut kept = Vec::with_capacity(self.len());
        for i in 0..self.len() {
            let col = self.vectors.col(i);
            let norm = col.norm_l2();
            if !(norm > 0.0) || !norm.is_finite() || !self.values[i].is_finite() {
                log::warn!(
                    "dropping eigenpair {i} (λ = {}): zero or non-finite eigenvector",
                    self.values[i]
                );
                continue;
            }
            let unit = Mat::from_fn(n, 1, |r, _| col[r] / norm);
            let res = residual(problem, self.values[i], unit.as_ref())?;
            kept.push((self.values[i], unit, res));
        }
        let inside = |l: c64| contour.map_or(false, |c| c.contains(l));
        kept.sort_by(|a, b| {
            inside(b.0)
                .cmp(&inside(a.0))
                .then(a.2.total_cmp(&b.2))
                .then(a.0.norm().total_cmp(&b.0.norm()))
                .then(a.0.im.total_cmp(&b.0.im))
                .then(a.0.re.total_cmp(&b.0.re))
        });
        let mut vectors = Mat::<c64>::zeros(n, kept.len());
        for (j, (_, v, _)) in kept.iter().enumerate() {
            for r in 0..n {
                vectors[(r, j)] = v[(r, 0)];
            }
        }
        Ok(EigenpairSet {
            values: kept.iter().map(|k| k.0).collect(),
            residuals: kept.iter().map(|k| k.2).collect(),
            vectors,
        })
    }

    /// Keeps the listed pairs, in the listed order.
    pub fn select(&self, indices: &[usize]) -> EigenpairSet {
        let n = self.dim();
        EigenpairSet {
            values: indices.iter().map(|&i| self.values[i]).collect(),
            residuals: indices.iter().map(|&i| self.residuals[i]).collect(),
            vectors: Mat::from_fn(n, indices.len(), |r, j| self.vectors[(r, indices[j])]),
        }
    }
}

/// `[T(λ_1)x_1, …, T(λ_m)x_m]`.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockResidual {
    matrix: Mat<c64>,
}

impl BlockResidual {
    pub fn matrix(&self) -> MatRef<'_, c64> {
        self.matrix.as_ref()
    }

    pub fn into_matrix(self) -> Mat<c64> {
        self.matrix
    }

    pub fn column_norms(&self) -> Vec<f64> {
        (0..self.matrix.ncols())
            .map(|j| self.matrix.col(j).norm_l2())
            .collect()
    }
}

pub fn block_residual<P: Nep + ?Sized>(problem: &P, pairs: &EigenpairSet) -> Result<BlockResidual> {
    if pairs.is_empty() {
        return Err(NepError::invalid("block residual of an empty eigenpair set"));
    }
    block_residual_of(problem, pairs.values(), pairs.vectors())
}

pub(crate) fn block_residual_of<P: Nep + ?Sized>(
    problem: &P,
    values: &[c64],
    vectors: MatRef<'_, c64>,
) -> Result<BlockResidual> {
    let n = problem.dim();
    if vectors.nrows() != n {
        return Err(NepError::DimensionMismatch {
            expected: n,
            found: vectors.nrows(),
        });
    }
    let mut matrix = Mat::<c64>::zeros(n, values.len());
    for (j, &lambda) in values.iter().enumerate() {
        let col = problem.apply(lambda, vectors.subcols(j, 1));
        for r in 0..n {
            matrix[(r, j)] = col[(r, 0)];
        }
    }
    Ok(BlockResidual { matrix })
}
