//! Problem gallery, generic problem representations and matrix file IO.

mod gallery;
mod general;
mod mtx;
mod polynomial;

pub use gallery::*;
pub use general::{Coefficient, GeneralNep, ScalarFn};
pub use mtx::{read_matrix_market, write_matrix_market, MtxField, MtxFormat, MtxMatrix, MtxSymmetry};
pub use polynomial::PolynomialNep;
