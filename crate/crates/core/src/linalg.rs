//! Dense complex kernels used by the solvers: filtered SVD, thin QR, the dense
//! eigensolver and a right-sided triangular solve. faer does the heavy lifting;
//! this module pins down the conventions (ordering, signs, rank handling) the
//! solvers rely on.

use std::cmp::Ordering;

use faer::linalg::solvers::{PartialPivLu, Solve};
use faer::{Mat, MatRef};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{NepError, Result};
use crate::c64;

/// Default relative cutoff for discarding singular values.
pub const DEFAULT_SVD_FILTER_TOL: f64 = 1e-12;

/// `A ≈ left · diag(singular) · rightᴴ`, truncated to the retained rank.
#[derive(Debug, Clone)]
pub struct SvdResult {
    pub left: Mat<c64>,
    pub singular: Vec<f64>,
    pub right: Mat<c64>,
}

impl SvdResult {
    pub fn rank(&self) -> usize {
        self.singular.len()
    }
}

/// Thin QR factorization with `re(r_ii) >= 0`.
#[derive(Debug, Clone)]
pub struct QrResult {
    pub q: Mat<c64>,
    pub r: Mat<c64>,
}

/// Thin SVD keeping only `σ_i > tol_rel · σ_max`.
pub fn svd_filtered(a: MatRef<'_, c64>, tol_rel: f64) -> Result<SvdResult> {
    if a.nrows() == 0 || a.ncols() == 0 {
        return Err(NepError::invalid("cannot take the SVD of an empty matrix"));
    }
    if !(tol_rel > 0.0 && tol_rel < 1.0) {
        return Err(NepError::invalid(format!(
            "svd filter tolerance must lie in (0, 1), got {tol_rel}"
        )));
    }
    let svd = a.thin_svd().map_err(|_| NepError::SvdNonConvergence {
        rows: a.nrows(),
        cols: a.ncols(),
    })?;
    let s = svd.S().column_vector();
    let sigma_max = s[0].re;
    if !(sigma_max > 0.0) || !sigma_max.is_finite() {
        return Err(NepError::EmptySubspace);
    }
    let rank = (0..s.nrows())
        .take_while(|&i| s[i].re > tol_rel * sigma_max)
        .count();
    if rank == 0 {
        return Err(NepError::EmptySubspace);
    }
    Ok(SvdResult {
        left: svd.U().subcols(0, rank).to_owned(),
        singular: (0..rank).map(|i| s[i].re).collect(),
        right: svd.V().subcols(0, rank).to_owned(),
    })
}

/// Thin QR of an `n × m` matrix, `n >= m`. Columns whose `|r_ii|` drops below
/// `1e-14 · ‖A‖_F` are reported as rank deficiency instead of being regularized.
pub fn qr_thin(a: MatRef<'_, c64>) -> Result<QrResult> {
    let (n, m) = (a.nrows(), a.ncols());
    if m == 0 || n < m {
        return Err(NepError::invalid(format!(
            "thin QR needs a nonempty n x m matrix with n >= m, got {n} x {m}"
        )));
    }
    let qr = a.qr();
    let mut q = qr.compute_thin_Q();
    let mut r = qr.thin_R().to_owned();
    let threshold = 1e-14 * a.norm_l2();
    for i in 0..m {
        let d = r[(i, i)];
        let mag = d.norm();
        if !(mag > threshold) {
            return Err(NepError::RankDeficient {
                column: i,
                value: mag,
            });
        }
        let phase = d / mag;
        let conj = phase.conj();
        for row in 0..n {
            q[(row, i)] *= phase;
        }
        for col in i..m {
            r[(i, col)] *= conj;
        }
        r[(i, i)] = c64::new(mag, 0.0);
    }
    Ok(QrResult { q, r })
}

/// Eigenvalues and unit-norm right eigenvectors of a square matrix.
///
/// Pairs are ordered by ascending `|λ - center|` when a center is given,
/// otherwise by ascending real then imaginary part.
pub fn dense_eig(b: MatRef<'_, c64>, center: Option<c64>) -> Result<(Vec<c64>, Mat<c64>)> {
    let n = b.nrows();
    if n != b.ncols() {
        return Err(NepError::invalid(format!(
            "dense eigensolver needs a square matrix, got {} x {}",
            n,
            b.ncols()
        )));
    }
    if n == 0 {
        return Ok((Vec::new(), Mat::zeros(0, 0)));
    }
    if !b.is_all_finite() {
        return Err(NepError::EigenNonConvergence(n));
    }
    let evd = b.eigen().map_err(|_| NepError::EigenNonConvergence(n))?;
    let s = evd.S().column_vector();
    let u = evd.U();
    let values: Vec<c64> = (0..n).map(|i| s[i]).collect();

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        let (a, b) = (values[i], values[j]);
        let primary = match center {
            Some(c) => (a - c).norm().total_cmp(&(b - c).norm()),
            None => Ordering::Equal,
        };
        primary
            .then(a.re.total_cmp(&b.re))
            .then(a.im.total_cmp(&b.im))
            .then(i.cmp(&j))
    });

    let sorted_values = order.iter().map(|&i| values[i]).collect();
    let mut vectors = Mat::<c64>::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        let col = u.col(src);
        let norm = col.norm_l2();
        let scale = if norm > 0.0 { 1.0 / norm } else { 1.0 };
        for i in 0..n {
            vectors[(i, dst)] = col[i] * scale;
        }
    }
    Ok((sorted_values, vectors))
}

/// Computes `M · r⁻¹` for upper triangular `r` by substitution along each row.
pub fn triangular_solve_right(m: MatRef<'_, c64>, r: MatRef<'_, c64>) -> Result<Mat<c64>> {
    let k = r.nrows();
    if r.ncols() != k {
        return Err(NepError::invalid("triangular factor must be square"));
    }
    if m.ncols() != k {
        return Err(NepError::DimensionMismatch {
            expected: k,
            found: m.ncols(),
        });
    }
    if let Some(i) = (0..k).find(|&i| r[(i, i)] == c64::new(0.0, 0.0)) {
        return Err(NepError::SingularTriangular(i));
    }
    let mut x = Mat::<c64>::zeros(m.nrows(), k);
    for row in 0..m.nrows() {
        for j in 0..k {
            let mut acc = m[(row, j)];
            for p in 0..j {
                acc -= x[(row, p)] * r[(p, j)];
            }
            x[(row, j)] = acc / r[(j, j)];
        }
    }
    Ok(x)
}

/// Dense LU with partial pivoting plus the pivot magnitudes needed for a
/// singularity check.
pub(crate) struct DenseLu {
    lu: PartialPivLu<c64>,
}

impl DenseLu {
    /// Fails when the smallest pivot is below `n · ε` times the largest one.
    pub(crate) fn new(a: MatRef<'_, c64>) -> Option<Self> {
        let n = a.nrows();
        if !a.is_all_finite() {
            return None;
        }
        let lu = a.partial_piv_lu();
        let u = lu.U();
        let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
        for i in 0..n {
            let d = u[(i, i)].norm();
            lo = lo.min(d);
            hi = hi.max(d);
        }
        if n > 0 && !(lo > (n as f64) * f64::EPSILON * hi) {
            return None;
        }
        Some(DenseLu { lu })
    }

    pub(crate) fn solve(&self, rhs: MatRef<'_, c64>) -> Mat<c64> {
        self.lu.solve(rhs)
    }
}

/// `n × m` block of independent standard complex Gaussians (real and imaginary
/// parts each with variance 1/2).
pub fn random_complex_gaussian<R: Rng + ?Sized>(rng: &mut R, n: usize, m: usize) -> Mat<c64> {
    let scale = std::f64::consts::FRAC_1_SQRT_2;
    let mut out = Mat::<c64>::zeros(n, m);
    for j in 0..m {
        for i in 0..n {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            out[(i, j)] = c64::new(re * scale, im * scale);
        }
    }
    out
}

/// Frobenius norm.
pub fn frobenius(a: MatRef<'_, c64>) -> f64 {
    a.norm_l2()
}
