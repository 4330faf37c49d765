//! Contour-integration eigensolvers for nonlinear eigenvalue problems
//! `T(λ)x = 0`.
//!
//! Eigenvalues inside a circle are found from quadrature-based moments of the
//! resolvent `T(z)⁻¹`:
//!
//! * [`beyn_solve`] runs Beyn's method, a single pass.
//! * [`hybrid_solve`] refines the Beyn pass with residual-inverse-iteration
//!   moments until the interior residuals drop below a tolerance.
//! * [`higher_moment_solve`] uses `K ≥ 2` moment pairs in a block Hankel
//!   pencil, which resolves eigenvalues sharing an eigenvector.
//!
//! ```
//! use nepcontour::{c64, hybrid_solve, problems::make_linear_diag, Contour, SolverOptions};
//!
//! let problem = make_linear_diag(&[c64::new(0.1, 0.0), c64::new(0.9, 0.0), c64::new(3.0, 0.0)])?;
//! let contour = Contour::new(c64::new(0.0, 0.0), 1.0)?;
//! let opts = SolverOptions { subspace: 3, ..Default::default() };
//! let (pairs, record) = hybrid_solve(&problem, &contour, &opts)?;
//! assert!(record.converged);
//! assert_eq!(pairs.interior(&contour).len(), 2);
//! # Ok::<(), nepcontour::NepError>(())
//! ```

pub mod contour;
pub mod error;
pub mod linalg;
pub mod moments;
pub mod nep;
pub mod par;
pub mod problems;
pub mod solver;

pub use faer::c64;
pub use faer::Mat;

pub use contour::{trapezoid_rule, Contour, QuadratureRule};
pub use error::{NepError, Result};
pub use moments::{assemble_hankel, direct_moments, rii_moments, HankelPencil, MomentEngine, MomentKind, MomentSet};
pub use nep::{block_residual, residual, BlockResidual, CountingNep, EigenpairSet, Factorization, Nep};
pub use par::Execution;
pub use solver::{
    beyn_solve, check_convergence, deflate, higher_moment_solve, hybrid_solve, solve,
    ConvergenceRecord, Linearization, SolverOptions,
};
