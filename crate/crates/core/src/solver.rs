//! Beyn's method, the residual-inverse-iteration hybrid and its higher-moment
//! block Hankel variant.
//!
//! Every solver starts with a Beyn pass on direct moments of a seeded random
//! probing block. The iterative solvers then repeat with RII moments built
//! from the current Ritz pairs until every interior residual is below the
//! tolerance.

use std::str::FromStr;

use faer::{Mat, MatRef};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::contour::Contour;
use crate::error::{NepError, Result};
use crate::linalg::{
    dense_eig, qr_thin, random_complex_gaussian, svd_filtered, triangular_solve_right,
    DEFAULT_SVD_FILTER_TOL,
};
use crate::moments::{assemble_hankel, MomentEngine, MomentSet};
use crate::nep::{EigenpairSet, Nep};
use crate::par::Execution;
use crate::c64;

/// Largest `K·m` accepted; bounds the dense eigenproblem size.
pub const MAX_CANDIDATES: usize = 4096;

/// How the reduced eigenproblem is formed from `Q_0`, `Q_1`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum Linearization {
    /// `Q_0 = qr`, `B = qᴴQ_1r⁻¹`, `X = qY`.
    Qr,
    /// `Q_0 = V_0Σ_0W_0ᴴ`, `B = V_0ᴴQ_1W_0Σ_0⁻¹`, `X = V_0Y`.
    #[default]
    Svd,
}

impl FromStr for Linearization {
    type Err = NepError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "qr" => Ok(Linearization::Qr),
            "svd" => Ok(Linearization::Svd),
            other => Err(NepError::invalid(format!(
                "unknown linearization '{other}', expected 'qr' or 'svd'"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverOptions {
    /// Probing block width `m`.
    pub subspace: usize,
    /// Quadrature node count `N`.
    pub nodes: usize,
    /// Moment pairs `K`; 1 for the plain hybrid.
    pub moments: usize,
    /// Refinement passes allowed after the first (Beyn) pass.
    pub max_iterations: usize,
    pub tolerance: f64,
    pub seed: u64,
    pub linearization: Linearization,
    pub svd_filter_tol: f64,
    /// Keep node factorizations across passes.
    pub cache_factorizations: bool,
    pub execution: Execution,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            subspace: 8,
            nodes: 16,
            moments: 1,
            max_iterations: 20,
            tolerance: 1e-12,
            seed: 0,
            linearization: Linearization::Svd,
            svd_filter_tol: DEFAULT_SVD_FILTER_TOL,
            cache_factorizations: true,
            execution: Execution::Parallel,
        }
    }
}

impl SolverOptions {
    pub fn validate(&self, dim: usize) -> Result<()> {
        if self.subspace == 0 {
            return Err(NepError::invalid("subspace size m must be at least 1"));
        }
        if self.subspace > dim {
            return Err(NepError::invalid(format!(
                "subspace size m = {} exceeds the problem dimension {dim}",
                self.subspace
            )));
        }
        if self.nodes < 2 {
            return Err(NepError::invalid(format!(
                "node count N must be at least 2, got {}",
                self.nodes
            )));
        }
        if self.moments == 0 {
            return Err(NepError::invalid("moment count K must be at least 1"));
        }
        if self.moments.saturating_mul(self.subspace) > MAX_CANDIDATES {
            return Err(NepError::invalid(format!(
                "K·m = {} exceeds the dense eigensolver limit {MAX_CANDIDATES}",
                self.moments * self.subspace
            )));
        }
        if !(self.tolerance > 0.0 && self.tolerance.is_finite()) {
            return Err(NepError::invalid(format!(
                "tolerance must be positive and finite, got {}",
                self.tolerance
            )));
        }
        if !(self.svd_filter_tol > 0.0 && self.svd_filter_tol < 1.0) {
            return Err(NepError::invalid(format!(
                "svd filter tolerance must lie in (0, 1), got {}",
                self.svd_filter_tol
            )));
        }
        Ok(())
    }
}

/// Per-pass history of a solve. Entry 0 is the Beyn pass.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceRecord {
    /// Max residual over interior pairs, `+∞` when there are none.
    pub max_residuals: Vec<f64>,
    pub interior_counts: Vec<usize>,
    pub factorizations: usize,
    pub block_solves: usize,
    pub converged: bool,
    /// Pass whose pairs were returned.
    pub returned_pass: usize,
}

impl ConvergenceRecord {
    /// Number of passes performed, the Beyn pass included.
    pub fn passes(&self) -> usize {
        self.max_residuals.len()
    }

    /// First pass whose max interior residual is below `tol`, if any.
    pub fn first_below(&self, tol: f64) -> Option<usize> {
        self.max_residuals.iter().position(|&r| r < tol)
    }
}

/// `(converged, max interior residual, interior count)`.
///
/// Converged means at least one interior pair and every interior residual
/// below `tol`. Pairs outside the contour never block convergence.
pub fn check_convergence(pairs: &EigenpairSet, contour: &Contour, tol: f64) -> (bool, f64, usize) {
    let interior = pairs.interior(contour);
    if interior.is_empty() {
        return (false, f64::INFINITY, 0);
    }
    let max = interior.iter().fold(0.0f64, |acc, &i| {
        let r = pairs.residuals()[i];
        if r.is_nan() {
            f64::INFINITY
        } else {
            acc.max(r)
        }
    });
    (max < tol, max, interior.len())
}

/// Interior candidates by ascending residual, then exterior candidates by
/// ascending `|λ − c|/r`, `|λ|` and imaginary part; the first `keep` survive.
pub fn deflate(pairs: &EigenpairSet, contour: &Contour, keep: usize) -> EigenpairSet {
    let mut order: Vec<usize> = (0..pairs.len()).collect();
    let v = pairs.values();
    let r = pairs.residuals();
    order.sort_by(|&a, &b| {
        let (ia, ib) = (contour.contains(v[a]), contour.contains(v[b]));
        ib.cmp(&ia).then_with(|| {
            if ia {
                r[a].total_cmp(&r[b])
            } else {
                contour
                    .relative_distance(v[a])
                    .total_cmp(&contour.relative_distance(v[b]))
            }
            .then(v[a].norm().total_cmp(&v[b].norm()))
            .then(v[a].im.total_cmp(&v[b].im))
            .then(v[a].re.total_cmp(&v[b].re))
        })
    });
    order.truncate(keep);
    pairs.select(&order)
}

fn svd_linearize(q0: MatRef<'_, c64>, q1: MatRef<'_, c64>, center: c64, tol: f64) -> Result<(Vec<c64>, Mat<c64>)> {
    let svd = svd_filtered(q0, tol)?;
    // W_0 Σ_0⁻¹
    let mut right = svd.right.clone();
    for (j, &s) in svd.singular.iter().enumerate() {
        for i in 0..right.nrows() {
            right[(i, j)] /= s;
        }
    }
    let b = svd.left.adjoint() * q1 * &right;
    let (values, y) = dense_eig(b.as_ref(), Some(center))?;
    Ok((values, &svd.left * &y))
}

fn qr_linearize(q0: MatRef<'_, c64>, q1: MatRef<'_, c64>, center: c64) -> Result<(Vec<c64>, Mat<c64>)> {
    let qr = qr_thin(q0)?;
    let b = triangular_solve_right((qr.q.adjoint() * q1).as_ref(), qr.r.as_ref())?;
    let (values, y) = dense_eig(b.as_ref(), Some(center))?;
    Ok((values, &qr.q * &y))
}

/// Ritz pairs from one moment set, finalized and deflated to at most `m`.
fn extract<P: Nep + ?Sized>(
    problem: &P,
    contour: &Contour,
    ms: &MomentSet,
    opts: &SolverOptions,
    linearization: Linearization,
) -> Result<EigenpairSet> {
    let n = problem.dim();
    let (values, vectors) = if ms.order() == 1 {
        match linearization {
            Linearization::Svd => {
                svd_linearize(ms.moment(0), ms.moment(1), contour.center(), opts.svd_filter_tol)?
            }
            Linearization::Qr => qr_linearize(ms.moment(0), ms.moment(1), contour.center())?,
        }
    } else {
        let pencil = assemble_hankel(ms);
        let (values, y) = svd_linearize(
            pencil.h0.as_ref(),
            pencil.h1.as_ref(),
            contour.center(),
            opts.svd_filter_tol,
        )
        .map_err(|e| match e {
            NepError::EmptySubspace => NepError::DeflationUnderflow,
            other => other,
        })?;
        (values, y.as_ref().subrows(0, n).to_owned())
    };
    let candidates = EigenpairSet::new(values, vectors)?.finalize(problem, Some(contour))?;
    if candidates.is_empty() {
        return Err(if ms.order() == 1 {
            NepError::EmptySubspace
        } else {
            NepError::DeflationUnderflow
        });
    }
    Ok(deflate(&candidates, contour, opts.subspace))
}

fn initial_block(n: usize, opts: &SolverOptions) -> Mat<c64> {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    random_complex_gaussian(&mut rng, n, opts.subspace)
}

fn run<P: Nep + ?Sized>(
    problem: &P,
    contour: &Contour,
    opts: &SolverOptions,
    first_linearization: Linearization,
    refine: bool,
) -> Result<(EigenpairSet, ConvergenceRecord)> {
    let n = problem.dim();
    opts.validate(n)?;
    let rule = contour.trapezoid_rule(opts.nodes)?;
    let engine = MomentEngine::new(problem, rule, opts.cache_factorizations, opts.execution);
    let order = opts.moments;

    let x0 = initial_block(n, opts);
    let ms = engine.direct_moments(x0.as_ref(), order)?;
    let mut pairs = extract(problem, contour, &ms, opts, first_linearization)?;

    let mut record = ConvergenceRecord {
        max_residuals: Vec::new(),
        interior_counts: Vec::new(),
        factorizations: 0,
        block_solves: 0,
        converged: false,
        returned_pass: 0,
    };
    let (mut converged, max, count) = check_convergence(&pairs, contour, opts.tolerance);
    record.max_residuals.push(max);
    record.interior_counts.push(count);
    log::info!("pass 0: max interior residual {max:e}, {count} interior");
    let mut best = (max, 0, pairs.clone());

    if refine {
        for pass in 1..=opts.max_iterations {
            if converged {
                break;
            }
            let ms = engine.rii_moments(pairs.vectors(), pairs.values(), order)?;
            pairs = extract(problem, contour, &ms, opts, opts.linearization)?;
            let (c, max, count) = check_convergence(&pairs, contour, opts.tolerance);
            converged = c;
            record.max_residuals.push(max);
            record.interior_counts.push(count);
            log::info!("pass {pass}: max interior residual {max:e}, {count} interior");
            if converged || max < best.0 {
                best = (max, pass, pairs.clone());
            }
        }
    }

    record.converged = converged;
    record.returned_pass = best.1;
    record.factorizations = engine.factorizations();
    record.block_solves = engine.block_solves();
    if !converged {
        log::warn!(
            "not converged after {} passes; returning pass {} (max interior residual {:e})",
            record.passes(),
            best.1,
            best.0
        );
    }
    Ok((best.2, record))
}

/// Single Beyn pass with the SVD linearization; `opts.moments` must be 1.
pub fn beyn_solve<P: Nep + ?Sized>(
    problem: &P,
    contour: &Contour,
    opts: &SolverOptions,
) -> Result<(EigenpairSet, ConvergenceRecord)> {
    if opts.moments != 1 {
        return Err(NepError::invalid("beyn_solve uses a single moment pair (K = 1)"));
    }
    run(problem, contour, opts, Linearization::Svd, false)
}

/// Beyn pass followed by RII refinement passes; requires `opts.moments == 1`.
pub fn hybrid_solve<P: Nep + ?Sized>(
    problem: &P,
    contour: &Contour,
    opts: &SolverOptions,
) -> Result<(EigenpairSet, ConvergenceRecord)> {
    if opts.moments != 1 {
        return Err(NepError::invalid(format!(
            "hybrid_solve needs K = 1, got K = {}; use higher_moment_solve",
            opts.moments
        )));
    }
    run(problem, contour, opts, opts.linearization, true)
}

/// Block Hankel variant with `K ≥ 2` moment pairs and deflation back to `m`
/// pairs each pass. The pencil is always linearized through the SVD.
pub fn higher_moment_solve<P: Nep + ?Sized>(
    problem: &P,
    contour: &Contour,
    opts: &SolverOptions,
) -> Result<(EigenpairSet, ConvergenceRecord)> {
    if opts.moments < 2 {
        return Err(NepError::invalid(format!(
            "higher_moment_solve needs K >= 2, got K = {}; use hybrid_solve",
            opts.moments
        )));
    }
    run(problem, contour, opts, Linearization::Svd, true)
}

/// Dispatches on `opts.moments`: [`hybrid_solve`] for 1, otherwise
/// [`higher_moment_solve`].
pub fn solve<P: Nep + ?Sized>(
    problem: &P,
    contour: &Contour,
    opts: &SolverOptions,
) -> Result<(EigenpairSet, ConvergenceRecord)> {
    if opts.moments == 1 {
        hybrid_solve(problem, contour, opts)
    } else {
        higher_moment_solve(problem, contour, opts)
    }
}
