//! Contour moments and block Hankel pencils.
//!
//! Two moment flavours are computed from the same quadrature rule:
//!
//! ```text
//! direct:  A_k = Σ_j ω_j z_j^k T(z_j)⁻¹ X
//! rii:     Q_k = Σ_j ω_j z_j^k [X − T(z_j)⁻¹ T(X, Λ)] (z_j I − Λ)⁻¹
//! ```
//!
//! where `T(X, Λ)` is the block residual `[T(λ_1)x_1, …, T(λ_m)x_m]`.
//! Node work fans out through [`crate::par`]; partial sums are always added in
//! ascending node order so results do not depend on scheduling.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::OnceLock;

use faer::{Mat, MatRef};

use crate::contour::QuadratureRule;
use crate::error::{NepError, Result};
use crate::nep::{block_residual_of, Factorization, Nep};
use crate::par::{num_threads, try_map_indexed, Execution};
use crate::c64;

/// Relative distance (in units of the radius) below which a Ritz value is
/// considered to sit on a quadrature node.
pub const NEAR_POLE_GUARD: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MomentKind {
    Direct,
    Rii,
}

/// Moments `0 … 2K−1`, all `n × m`.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentSet {
    kind: MomentKind,
    moments: Vec<Mat<c64>>,
}

impl MomentSet {
    pub fn kind(&self) -> MomentKind {
        self.kind
    }

    /// Number of moment pairs `K`.
    pub fn order(&self) -> usize {
        self.moments.len() / 2
    }

    pub fn moment(&self, k: usize) -> MatRef<'_, c64> {
        self.moments[k].as_ref()
    }

    pub fn moments(&self) -> &[Mat<c64>] {
        &self.moments
    }

    pub fn nrows(&self) -> usize {
        self.moments[0].nrows()
    }

    pub fn ncols(&self) -> usize {
        self.moments[0].ncols()
    }
}

/// Block Hankel matrices built from a [`MomentSet`].
#[derive(Debug, Clone, PartialEq)]
pub struct HankelPencil {
    pub h0: Mat<c64>,
    pub h1: Mat<c64>,
}

/// `h0` block `(i, j)` is moment `i + j`, `h1` block `(i, j)` is moment `i + j + 1`.
pub fn assemble_hankel(ms: &MomentSet) -> HankelPencil {
    let k = ms.order();
    let (n, m) = (ms.nrows(), ms.ncols());
    let block = |shift: usize| {
        Mat::from_fn(k * n, k * m, |r, c| {
            ms.moments[r / n + c / m + shift][(r % n, c % m)]
        })
    };
    HankelPencil {
        h0: block(0),
        h1: block(1),
    }
}

/// Evaluates moments against one quadrature rule, optionally keeping the node
/// factorizations between calls.
pub struct MomentEngine<'a, P: Nep + ?Sized> {
    problem: &'a P,
    rule: QuadratureRule,
    execution: Execution,
    cache: Option<Vec<OnceLock<Box<dyn Factorization>>>>,
    factorizations: AtomicUsize,
    block_solves: AtomicUsize,
}

impl<'a, P: Nep + ?Sized> MomentEngine<'a, P> {
    pub fn new(problem: &'a P, rule: QuadratureRule, cache: bool, execution: Execution) -> Self {
        let cache = cache.then(|| (0..rule.len()).map(|_| OnceLock::new()).collect());
        MomentEngine {
            problem,
            rule,
            execution,
            cache,
            factorizations: AtomicUsize::new(0),
            block_solves: AtomicUsize::new(0),
        }
    }

    pub fn rule(&self) -> &QuadratureRule {
        &self.rule
    }

    /// Factorizations performed so far.
    pub fn factorizations(&self) -> usize {
        self.factorizations.load(Ordering::SeqCst)
    }

    /// Multi-right-hand-side solves performed so far.
    pub fn block_solves(&self) -> usize {
        self.block_solves.load(Ordering::SeqCst)
    }

    fn factorize(&self, node: usize) -> Result<Box<dyn Factorization>> {
        let z = self.rule.nodes()[node];
        self.factorizations.fetch_add(1, Ordering::SeqCst);
        self.problem.factorize(z).map_err(|e| match e {
            NepError::Singular(z) => NepError::NodeSingular { node, z },
            other => other,
        })
    }

    /// `T(z_node)⁻¹ rhs`, reusing a cached factorization when enabled.
    fn solve(&self, node: usize, rhs: MatRef<'_, c64>) -> Result<Mat<c64>> {
        let sol = match &self.cache {
            Some(cache) => {
                let slot = &cache[node];
                if slot.get().is_none() {
                    let f = self.factorize(node)?;
                    // Each node is handled by exactly one worker per pass.
                    let _ = slot.set(f);
                }
                slot.get().expect("slot initialized").solve(rhs)
            }
            None => self.factorize(node)?.solve(rhs),
        };
        self.block_solves.fetch_add(1, Ordering::SeqCst);
        if !sol.is_all_finite() {
            return Err(NepError::NodeSingular {
                node,
                z: self.rule.nodes()[node],
            });
        }
        Ok(sol)
    }

    /// Sums `ω_j z_j^k · f(j)` for `k < count` in ascending `j`, computing
    /// `f` for one chunk of nodes at a time to bound memory.
    fn accumulate<F>(&self, kind: MomentKind, count: usize, rows: usize, cols: usize, f: F) -> Result<MomentSet>
    where
        F: Fn(usize) -> Result<Mat<c64>> + Send + Sync,
    {
        let total = self.rule.len();
        let chunk = if self.execution.is_parallel() {
            num_threads().max(1)
        } else {
            1
        };
        let mut moments = vec![Mat::<c64>::zeros(rows, cols); count];
        let mut start = 0;
        while start < total {
            let len = chunk.min(total - start);
            let parts = try_map_indexed(self.execution, len, |i| f(start + i))?;
            for (i, part) in parts.into_iter().enumerate() {
                let j = start + i;
                let (z, w) = (self.rule.nodes()[j], self.rule.weights()[j]);
                let mut scale = w;
                for acc in moments.iter_mut() {
                    *acc += &part * faer::Scale(scale);
                    scale *= z;
                }
            }
            start += len;
        }
        Ok(MomentSet { kind, moments })
    }

    /// Direct moments `A_0 … A_{2K−1}`.
    pub fn direct_moments(&self, x: MatRef<'_, c64>, order: usize) -> Result<MomentSet> {
        self.check_block(x, order)?;
        self.accumulate(MomentKind::Direct, 2 * order, x.nrows(), x.ncols(), |j| {
            self.solve(j, x)
        })
    }

    /// RII moments `Q_0 … Q_{2K−1}` for the current Ritz pairs `(values, x)`.
    pub fn rii_moments(&self, x: MatRef<'_, c64>, values: &[c64], order: usize) -> Result<MomentSet> {
        self.check_block(x, order)?;
        if values.len() != x.ncols() {
            return Err(NepError::DimensionMismatch {
                expected: x.ncols(),
                found: values.len(),
            });
        }
        let guard = NEAR_POLE_GUARD * self.rule.radius();
        for (node, &z) in self.rule.nodes().iter().enumerate() {
            for (pair, &lambda) in values.iter().enumerate() {
                let distance = (z - lambda).norm();
                if distance < guard {
                    return Err(NepError::NearPole {
                        node,
                        pair,
                        lambda,
                        distance,
                    });
                }
            }
        }
        let residual = block_residual_of(self.problem, values, x)?.into_matrix();
        self.accumulate(MomentKind::Rii, 2 * order, x.nrows(), x.ncols(), |j| {
            let z = self.rule.nodes()[j];
            let correction = self.solve(j, residual.as_ref())?;
            Ok(Mat::from_fn(x.nrows(), x.ncols(), |r, c| {
                (x[(r, c)] - correction[(r, c)]) / (z - values[c])
            }))
        })
    }

    fn check_block(&self, x: MatRef<'_, c64>, order: usize) -> Result<()> {
        if order == 0 {
            return Err(NepError::invalid("moment order K must be at least 1"));
        }
        if x.nrows() != self.problem.dim() {
            return Err(NepError::DimensionMismatch {
                expected: self.problem.dim(),
                found: x.nrows(),
            });
        }
        if x.ncols() == 0 {
            return Err(NepError::invalid("probing block has no columns"));
        }
        Ok(())
    }
}

/// One-shot direct moments with a fresh engine: exactly `N` factorizations.
pub fn direct_moments<P: Nep + ?Sized>(
    problem: &P,
    x: MatRef<'_, c64>,
    rule: &QuadratureRule,
    order: usize,
) -> Result<MomentSet> {
    MomentEngine::new(problem, rule.clone(), false, Execution::default()).direct_moments(x, order)
}

/// One-shot RII moments with a fresh engine: exactly `N` factorizations.
pub fn rii_moments<P: Nep + ?Sized>(
    problem: &P,
    x: MatRef<'_, c64>,
    values: &[c64],
    rule: &QuadratureRule,
    order: usize,
) -> Result<MomentSet> {
    MomentEngine::new(problem, rule.clone(), false, Execution::default())
        .rii_moments(x, values, order)
}
