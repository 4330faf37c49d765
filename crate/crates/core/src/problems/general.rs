use std::fmt;
use std::sync::Arc;

use faer::linalg::solvers::Solve;
use faer::sparse::linalg::solvers::Lu;
use faer::sparse::{SparseColMat, SymbolicSparseColMat, Triplet};
use faer::{Mat, MatRef};

use crate::error::{NepError, Result};
use crate::nep::{Factorization, Nep};
use crate::c64;

/// A named scalar function `f(z)` in a split form `T(z) = Σ_p f_p(z) C_p`.
#[derive(Clone)]
pub struct ScalarFn {
    label: String,
    f: Arc<dyn Fn(c64) -> c64 + Send + Sync>,
}

impl ScalarFn {
    pub fn new(label: impl Into<String>, f: impl Fn(c64) -> c64 + Send + Sync + 'static) -> Self {
        ScalarFn {
            label: label.into(),
            f: Arc::new(f),
        }
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn eval(&self, z: c64) -> c64 {
        (self.f)(z)
    }
}

impl fmt::Debug for ScalarFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_tuple("ScalarFn").field(&self.label).finish()
    }
}

/// A coefficient matrix; sparse coefficients are stored as deduplicated triplets.
#[derive(Debug, Clone)]
pub enum Coefficient {
    Dense(Mat<c64>),
    Sparse {
        nrows: usize,
        ncols: usize,
        entries: Vec<(usize, usize, c64)>,
    },
}

impl Coefficient {
    fn shape(&self) -> (usize, usize) {
        match self {
            Coefficient::Dense(m) => (m.nrows(), m.ncols()),
            Coefficient::Sparse { nrows, ncols, .. } => (*nrows, *ncols),
        }
    }
}

/// Union sparsity pattern of all coefficients, with per-term positions into it.
#[derive(Debug, Clone)]
struct Pattern {
    symbolic: SymbolicSparseColMat<usize>,
    positions: Vec<Vec<usize>>,
    values: Vec<Vec<c64>>,
}

/// `T(z) = Σ_p f_p(z) C_p`.
#[derive(Debug, Clone)]
pub struct GeneralNep {
    n: usize,
    terms: Vec<(ScalarFn, Coefficient)>,
    pattern: Option<Pattern>,
}

impl GeneralNep {
    pub fn new(terms: Vec<(ScalarFn, Coefficient)>) -> Result<Self> {
        let n = terms
            .first()
            .map(|t| t.1.shape().0)
            .ok_or_else(|| NepError::invalid("a split-form problem needs at least one term"))?;
        if n == 0 {
            return Err(NepError::invalid("coefficient matrices must be nonempty"));
        }
        for (f, c) in &terms {
            if c.shape() != (n, n) {
                return Err(NepError::invalid(format!(
                    "coefficient of term '{}' is {:?}, expected {n} x {n}",
                    f.label(),
                    c.shape()
                )));
            }
        }
        let any_sparse = terms
            .iter()
            .any(|(_, c)| matches!(c, Coefficient::Sparse { .. }));
        let pattern = if any_sparse {
            Some(build_pattern(n, &terms)?)
        } else {
            None
        };
        Ok(GeneralNep { n, terms, pattern })
    }

    pub fn terms(&self) -> &[(ScalarFn, Coefficient)] {
        &self.terms
    }

    pub fn is_sparse(&self) -> bool {
        self.pattern.is_some()
    }

    /// Sparse `T(z)` on the union pattern. `None` for all-dense problems.
    pub fn assemble_sparse(&self, z: c64) -> Option<SparseColMat<usize, c64>> {
        let pattern = self.pattern.as_ref()?;
        let mut values = vec![c64::new(0.0, 0.0); pattern.symbolic.compute_nnz()];
        for (t, (f, _)) in self.terms.iter().enumerate() {
            let s = f.eval(z);
            for (&pos, &v) in pattern.positions[t].iter().zip(&pattern.values[t]) {
                values[pos] += s * v;
            }
        }
        Some(SparseColMat::new(pattern.symbolic.clone(), values))
    }
}

fn coefficient_triplets(c: &Coefficient) -> Vec<(usize, usize, c64)> {
    match c {
        Coefficient::Dense(m) => {
            let mut out = Vec::new();
            for j in 0..m.ncols() {
                for i in 0..m.nrows() {
                    if m[(i, j)] != c64::new(0.0, 0.0) {
                        out.push((i, j, m[(i, j)]));
                    }
                }
            }
            out
        }
        Coefficient::Sparse { entries, .. } => entries.clone(),
    }
}

fn build_pattern(n: usize, terms: &[(ScalarFn, Coefficient)]) -> Result<Pattern> {
    let per_term: Vec<Vec<(usize, usize, c64)>> =
        terms.iter().map(|(_, c)| coefficient_triplets(c)).collect();
    let mut keys: Vec<(usize, usize)> = per_term
        .iter()
        .flat_map(|t| t.iter().map(|&(i, j, _)| (j, i)))
        .collect();
    keys.sort_unstable();
    keys.dedup();
    let triplets: Vec<Triplet<usize, usize, c64>> = keys
        .iter()
        .map(|&(j, i)| Triplet::new(i, j, c64::new(1.0, 0.0)))
        .collect();
    let structure = SparseColMat::<usize, c64>::try_new_from_triplets(n, n, &triplets)
        .map_err(|e| NepError::invalid(format!("cannot build sparse pattern: {e:?}")))?;
    let positions = per_term
        .iter()
        .map(|t| {
            t.iter()
                .map(|&(i, j, _)| keys.binary_search(&(j, i)).expect("key present"))
                .collect()
        })
        .collect();
    let values = per_term
        .iter()
        .map(|t| t.iter().map(|&(_, _, v)| v).collect())
        .collect();
    Ok(Pattern {
        symbolic: structure.symbolic().to_owned().map_err(|e| {
            NepError::invalid(format!("cannot build sparse pattern: {e:?}"))
        })?,
        positions,
        values,
    })
}

fn sparse_apply(entries: &[(usize, usize, c64)], x: MatRef<'_, c64>, scale: c64, out: &mut Mat<c64>) {
    for &(i, j, v) in entries {
        let sv = scale * v;
        for k in 0..x.ncols() {
            out[(i, k)] += sv * x[(j, k)];
        }
    }
}

struct SparseLu {
    lu: Lu<usize, c64>,
}

impl Factorization for SparseLu {
    fn solve(&self, rhs: MatRef<'_, c64>) -> Mat<c64> {
        self.lu.solve(rhs)
    }
}

impl Nep for GeneralNep {
    fn dim(&self) -> usize {
        self.n
    }

    fn evaluate(&self, z: c64) -> Mat<c64> {
        let mut out = Mat::<c64>::zeros(self.n, self.n);
        for (f, c) in &self.terms {
            let s = f.eval(z);
            match c {
                Coefficient::Dense(m) => out += m * faer::Scale(s),
                Coefficient::Sparse { entries, .. } => {
                    for &(i, j, v) in entries {
                        out[(i, j)] += s * v;
                    }
                }
            }
        }
        out
    }

    fn apply(&self, z: c64, x: MatRef<'_, c64>) -> Mat<c64> {
        let mut out = Mat::<c64>::zeros(self.n, x.ncols());
        for (f, c) in &self.terms {
            let s = f.eval(z);
            match c {
                Coefficient::Dense(m) => out += m * x * faer::Scale(s),
                Coefficient::Sparse { entries, .. } => sparse_apply(entries, x, s, &mut out),
            }
        }
        out
    }

    fn frobenius_norm(&self, z: c64) -> f64 {
        match self.assemble_sparse(z) {
            Some(t) => t
                .val()
                .iter()
                .map(|v| v.norm_sqr())
                .sum::<f64>()
                .sqrt(),
            None => self.evaluate(z).norm_l2(),
        }
    }

    fn factorize(&self, z: c64) -> Result<Box<dyn Factorization>> {
        match self.assemble_sparse(z) {
            Some(t) => {
                let lu = t.sp_lu().map_err(|_| NepError::Singular(z))?;
                Ok(Box::new(SparseLu { lu }))
            }
            None => {
                let t = self.evaluate(z);
                crate::linalg::DenseLu::new(t.as_ref())
                    .map(|lu| Box::new(lu) as Box<dyn Factorization>)
                    .ok_or(NepError::Singular(z))
            }
        }
    }
}
