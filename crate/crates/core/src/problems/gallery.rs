//! Constructors for the benchmark problems and small synthetic problems.

use std::path::Path;

use faer::Mat;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::general::{Coefficient, GeneralNep, ScalarFn};
use super::mtx::read_matrix_market;
use super::polynomial::PolynomialNep;
use crate::error::{NepError, Result};
use crate::linalg::random_complex_gaussian;
use crate::c64;

/// Default experiment parameters for a gallery problem.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProblemDefaults {
    pub center: c64,
    pub radius: f64,
    pub subspace: usize,
    pub nodes: usize,
    pub moments: usize,
    /// Eigenvalues expected strictly inside the default contour.
    pub interior: usize,
}

pub const BUTTERFLY_DEFAULTS: ProblemDefaults = ProblemDefaults {
    center: c64::new(1.0, 1.0),
    radius: 0.5,
    subspace: 30,
    nodes: 16,
    moments: 1,
    interior: 13,
};

pub const DEFICIENT_QUADRATIC_DEFAULTS: ProblemDefaults = ProblemDefaults {
    center: c64::new(0.0, 0.0),
    radius: 0.25,
    subspace: 4,
    nodes: 16,
    moments: 2,
    interior: 4,
};

pub const GUN_DEFAULTS: ProblemDefaults = ProblemDefaults {
    center: c64::new(140000.0, 0.0),
    radius: 30000.0,
    subspace: 32,
    nodes: 32,
    moments: 1,
    interior: 17,
};

pub const HADELER_DEFAULTS: ProblemDefaults = ProblemDefaults {
    center: c64::new(-30.0, 0.0),
    radius: 10.0,
    subspace: 15,
    nodes: 16,
    moments: 1,
    interior: 12,
};

/// Default shared roots of the deficient quadratic.
pub const DEFICIENT_A: f64 = -0.2;
pub const DEFICIENT_B: f64 = 0.1;
pub const DEFICIENT_DIM: usize = 15;
/// Seed for which the default contour holds exactly four eigenvalues.
pub const DEFICIENT_SEED: u64 = 43;

pub const HADELER_DIM: usize = 200;
pub const HADELER_ALPHA: f64 = 100.0;

pub const GUN_DIM: usize = 9956;
pub const GUN_SIGMA1: f64 = 0.0;
pub const GUN_SIGMA2: f64 = 108.8774;
/// File names expected inside a gun data directory.
pub const GUN_FILES: [&str; 4] = ["K.mtx", "M.mtx", "W1.mtx", "W2.mtx"];

const BUTTERFLY_GRID: usize = 8;
const BUTTERFLY_PARAMS: [f64; 10] = [0.6, 1.3, 1.3, 0.1, 0.1, 1.2, 1.0, 1.0, 1.2, 1.0];

fn re(v: f64) -> c64 {
    c64::new(v, 0.0)
}

/// Quartic butterfly problem on an 8×8 grid (n = 64).
pub fn make_butterfly() -> PolynomialNep {
    make_butterfly_with(BUTTERFLY_GRID, BUTTERFLY_PARAMS)
        .expect("default butterfly parameters are valid")
}

/// Butterfly quartic on a `grid × grid` mesh. `c` holds the ten stencil weights.
///
/// Row `r = i·grid + j` couples to its `j ± 1` and `i ± grid` neighbours:
///
/// ```text
/// T_0: diag 4(c0+c1)/6,  j±1: c0/6,   i±grid: c1/6
/// T_1:                   j∓1: ±c2,    i∓grid: ±c3     (minus on the forward side)
/// T_2: diag −2(c4+c5),   j±1: c4,     i±grid: c5
/// T_3:                   j∓1: ±c6,    i∓grid: ±c7
/// T_4: diag 2(c8+c9),    j±1: −c8,    i±grid: −c9
/// ```
pub fn make_butterfly_with(grid: usize, c: [f64; 10]) -> Result<PolynomialNep> {
    if grid < 2 {
        return Err(NepError::invalid("butterfly grid must be at least 2"));
    }
    let n = grid * grid;
    let mut t: Vec<Mat<c64>> = (0..5).map(|_| Mat::zeros(n, n)).collect();
    // (diagonal, horizontal back, horizontal forward, vertical back, vertical forward)
    let stencils = [
        (4.0 * c[0] / 6.0 + 4.0 * c[1] / 6.0, c[0] / 6.0, c[0] / 6.0, c[1] / 6.0, c[1] / 6.0),
        (0.0, c[2], -c[2], c[3], -c[3]),
        (-2.0 * c[4] - 2.0 * c[5], c[4], c[4], c[5], c[5]),
        (0.0, c[6], -c[6], c[7], -c[7]),
        (2.0 * c[8] + 2.0 * c[9], -c[8], -c[8], -c[9], -c[9]),
    ];
    for row in 0..n {
        let (i, j) = (row / grid, row % grid);
        for (k, &(d, hb, hf, vb, vf)) in stencils.iter().enumerate() {
            t[k][(row, row)] = re(d);
            if j > 0 {
                t[k][(row, row - 1)] = re(hb);
            }
            if j + 1 < grid {
                t[k][(row, row + 1)] = re(hf);
            }
            if i > 0 {
                t[k][(row, row - grid)] = re(vb);
            }
            if i + 1 < grid {
                t[k][(row, row + grid)] = re(vf);
            }
        }
    }
    PolynomialNep::new(t)
}

/// `T(z) = T_0 + (z − a)(z − b)T_1` with `n = 15`, seeded Gaussian `T_0`, `T_1`
/// and a zero first column in `T_0`, so `e_1` is an eigenvector for both `a` and `b`.
pub fn make_deficient_quadratic(a: f64, b: f64, seed: u64) -> Result<PolynomialNep> {
    if a == b || !a.is_finite() || !b.is_finite() {
        return Err(NepError::invalid(format!(
            "shared roots must be distinct and finite, got a = {a}, b = {b}"
        )));
    }
    let n = DEFICIENT_DIM;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut t0 = random_complex_gaussian(&mut rng, n, n);
    let t1 = random_complex_gaussian(&mut rng, n, n);
    for i in 0..n {
        t0[(i, 0)] = re(0.0);
    }
    // (z − a)(z − b) = ab − (a + b)z + z²
    let c0 = &t0 + &t1 * faer::Scale(re(a * b));
    let c1 = &t1 * faer::Scale(re(-(a + b)));
    PolynomialNep::new(vec![c0, c1, t1])
}

/// Deficient quadratic with the default roots and seed.
pub fn make_deficient_quadratic_default() -> PolynomialNep {
    make_deficient_quadratic(DEFICIENT_A, DEFICIENT_B, DEFICIENT_SEED)
        .expect("default deficient quadratic parameters are valid")
}

/// `T(λ) = (e^λ − 1)B_1 + λ²B_2 − αI` with, for 1-based `j, k`,
/// `B_1[j,k] = (n + 1 − max(j, k))·j·k` and `B_2[j,k] = n·δ_jk + 1/(j + k)`.
pub fn make_hadeler(n: usize, alpha: f64) -> Result<GeneralNep> {
    if n < 2 {
        return Err(NepError::invalid(format!("hadeler needs n >= 2, got {n}")));
    }
    if !alpha.is_finite() {
        return Err(NepError::invalid("hadeler alpha must be finite"));
    }
    let b1 = Mat::from_fn(n, n, |j, k| {
        let (j, k) = (j + 1, k + 1);
        re(((n + 1 - j.max(k)) * j * k) as f64)
    });
    let b2 = Mat::from_fn(n, n, |j, k| {
        let diag = if j == k { n as f64 } else { 0.0 };
        re(diag + 1.0 / (j + k + 2) as f64)
    });
    let b0 = Mat::<c64>::identity(n, n);
    GeneralNep::new(vec![
        (ScalarFn::new("exp(z)-1", |z: c64| z.exp() - 1.0), Coefficient::Dense(b1)),
        (ScalarFn::new("z^2", |z: c64| z * z), Coefficient::Dense(b2)),
        (
            ScalarFn::new("-alpha", move |_| re(-alpha)),
            Coefficient::Dense(b0),
        ),
    ])
}

/// Gun cavity problem from explicit coefficient matrices:
/// `T(λ) = K − λM + i√(λ − σ1²)W_1 + i√(λ − σ2²)W_2`, principal square roots.
pub fn make_gun_from(k: Coefficient, m: Coefficient, w1: Coefficient, w2: Coefficient) -> Result<GeneralNep> {
    let (s1, s2) = (GUN_SIGMA1 * GUN_SIGMA1, GUN_SIGMA2 * GUN_SIGMA2);
    GeneralNep::new(vec![
        (ScalarFn::new("1", |_| re(1.0)), k),
        (ScalarFn::new("-z", |z: c64| -z), m),
        (
            ScalarFn::new("i*sqrt(z-s1^2)", move |z: c64| c64::i() * (z - s1).sqrt()),
            w1,
        ),
        (
            ScalarFn::new("i*sqrt(z-s2^2)", move |z: c64| c64::i() * (z - s2).sqrt()),
            w2,
        ),
    ])
}

/// Gun cavity problem read from four Matrix Market files `[K, M, W1, W2]`.
pub fn make_gun(paths: [&Path; 4]) -> Result<GeneralNep> {
    let mut coeffs = Vec::with_capacity(4);
    let mut dim = None;
    for path in paths {
        let mtx = read_matrix_market(path)?;
        if mtx.nrows() != mtx.ncols() {
            return Err(NepError::Parse {
                path: path.to_path_buf(),
                line: 0,
                message: format!("expected a square matrix, found {} x {}", mtx.nrows(), mtx.ncols()),
            });
        }
        match dim {
            None => dim = Some(mtx.nrows()),
            Some(d) if d != mtx.nrows() => {
                return Err(NepError::Parse {
                    path: path.to_path_buf(),
                    line: 0,
                    message: format!("dimension {} does not match {d}", mtx.nrows()),
                })
            }
            _ => {}
        }
        coeffs.push(mtx.into_coefficient());
    }
    let mut it = coeffs.into_iter();
    let (k, m, w1, w2) = (
        it.next().unwrap(),
        it.next().unwrap(),
        it.next().unwrap(),
        it.next().unwrap(),
    );
    make_gun_from(k, m, w1, w2)
}

/// Gun cavity problem from a directory holding [`GUN_FILES`].
pub fn make_gun_from_dir(dir: &Path) -> Result<GeneralNep> {
    let paths: Vec<_> = GUN_FILES.iter().map(|f| dir.join(f)).collect();
    make_gun([&paths[0], &paths[1], &paths[2], &paths[3]])
}

/// `true` when `dir` holds all four gun data files.
pub fn gun_data_present(dir: &Path) -> bool {
    GUN_FILES.iter().all(|f| dir.join(f).is_file())
}

/// `T(z) = zI − A`, whose eigenpairs are those of `A`.
pub fn make_linear(a: Mat<c64>) -> Result<PolynomialNep> {
    if a.nrows() != a.ncols() {
        return Err(NepError::invalid(format!(
            "linear problem needs a square matrix, got {} x {}",
            a.nrows(),
            a.ncols()
        )));
    }
    let n = a.nrows();
    PolynomialNep::new(vec![-a, Mat::identity(n, n)])
}

/// `T(z) = zI − diag(d)`.
pub fn make_linear_diag(d: &[c64]) -> Result<PolynomialNep> {
    make_linear(Mat::from_fn(d.len(), d.len(), |i, j| {
        if i == j {
            d[i]
        } else {
            re(0.0)
        }
    }))
}

/// Scalar `T(z) = cos z`, roots at `π/2 + kπ`.
pub fn make_cosine() -> GeneralNep {
    GeneralNep::new(vec![(
        ScalarFn::new("cos(z)", |z: c64| z.cos()),
        Coefficient::Dense(Mat::identity(1, 1)),
    )])
    .expect("scalar cosine problem is valid")
}
