use faer::{Mat, MatRef};

use crate::error::{NepError, Result};
use crate::linalg::DenseLu;
use crate::nep::Nep;
use crate::c64;

/// Matrix polynomial `T(z) = Σ_p z^p T_p`.
#[derive(Debug, Clone)]
pub struct PolynomialNep {
    coeffs: Vec<Mat<c64>>,
}

impl PolynomialNep {
    /// `coeffs[p]` multiplies `z^p`.
    pub fn new(coeffs: Vec<Mat<c64>>) -> Result<Self> {
        let first = coeffs
            .first()
            .ok_or_else(|| NepError::invalid("a matrix polynomial needs at least one coefficient"))?;
        let n = first.nrows();
        if n == 0 {
            return Err(NepError::invalid("coefficient matrices must be nonempty"));
        }
        for c in &coeffs {
            if c.nrows() != n || c.ncols() != n {
                return Err(NepError::invalid(format!(
                    "all coefficients must be {n} x {n}, found {} x {}",
                    c.nrows(),
                    c.ncols()
                )));
            }
        }
        Ok(PolynomialNep { coeffs })
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coefficient(&self, p: usize) -> MatRef<'_, c64> {
        self.coeffs[p].as_ref()
    }

    /// All eigenvalues, from the dense eigenvalues of the block companion
    /// matrix. Requires an invertible leading coefficient.
    pub fn companion_eigenvalues(&self) -> Result<Vec<c64>> {
        let d = self.degree();
        let n = self.dim();
        if d == 0 {
            return Err(NepError::invalid("a constant polynomial has no eigenvalues"));
        }
        let lead = DenseLu::new(self.coeffs[d].as_ref()).ok_or_else(|| {
            NepError::invalid("leading coefficient is singular; companion form has infinite eigenvalues")
        })?;
        let size = d * n;
        let mut companion = Mat::<c64>::zeros(size, size);
        for k in 0..d - 1 {
            for i in 0..n {
                companion[(k * n + i, (k + 1) * n + i)] = c64::new(1.0, 0.0);
            }
        }
        for p in 0..d {
            let block = lead.solve(self.coeffs[p].as_ref());
            for i in 0..n {
                for j in 0..n {
                    companion[((d - 1) * n + i, p * n + j)] = -block[(i, j)];
                }
            }
        }
        companion
            .eigenvalues()
            .map_err(|_| NepError::EigenNonConvergence(size))
    }
}

impl Nep for PolynomialNep {
    fn dim(&self) -> usize {
        self.coeffs[0].nrows()
    }

    fn evaluate(&self, z: c64) -> Mat<c64> {
        let mut acc = self.coeffs[self.degree()].clone();
        for coeff in self.coeffs.iter().rev().skip(1) {
            acc = &acc * faer::Scale(z) + coeff;
        }
        acc
    }

    fn apply(&self, z: c64, x: MatRef<'_, c64>) -> Mat<c64> {
        let mut acc = &self.coeffs[self.degree()] * x;
        for coeff in self.coeffs.iter().rev().skip(1) {
            acc = &acc * faer::Scale(z) + coeff * x;
        }
        acc
    }
}
