//! Matrix Market reader and writer.
//!
//! Supports the `coordinate` and `array` formats with `real`, `integer` and
//! `complex` fields and `general`, `symmetric`, `skew-symmetric` and
//! `hermitian` storage. Symmetric storage is expanded on read.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use faer::Mat;

use super::general::Coefficient;
use crate::error::{NepError, Result};
use crate::c64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MtxFormat {
    Coordinate,
    Array,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MtxField {
    Real,
    Integer,
    Complex,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MtxSymmetry {
    General,
    Symmetric,
    SkewSymmetric,
    Hermitian,
}

/// A matrix read from a Matrix Market file, stored as merged, column-major
/// sorted triplets with explicit zeros removed.
#[derive(Debug, Clone, PartialEq)]
pub struct MtxMatrix {
    nrows: usize,
    ncols: usize,
    format: MtxFormat,
    entries: Vec<(usize, usize, c64)>,
}

impl MtxMatrix {
    /// Builds a matrix from triplets, summing duplicates.
    pub fn from_triplets(
        nrows: usize,
        ncols: usize,
        triplets: impl IntoIterator<Item = (usize, usize, c64)>,
    ) -> Result<Self> {
        let mut merged: BTreeMap<(usize, usize), c64> = BTreeMap::new();
        for (i, j, v) in triplets {
            if i >= nrows || j >= ncols {
                return Err(NepError::invalid(format!(
                    "entry ({i}, {j}) outside a {nrows} x {ncols} matrix"
                )));
            }
            *merged.entry((j, i)).or_insert(c64::new(0.0, 0.0)) += v;
        }
        Ok(MtxMatrix {
            nrows,
            ncols,
            format: MtxFormat::Coordinate,
            entries: merged
                .into_iter()
                .filter(|(_, v)| *v != c64::new(0.0, 0.0))
                .map(|((j, i), v)| (i, j, v))
                .collect(),
        })
    }

    pub fn from_dense(m: &Mat<c64>) -> Self {
        let mut entries = Vec::new();
        for j in 0..m.ncols() {
            for i in 0..m.nrows() {
                if m[(i, j)] != c64::new(0.0, 0.0) {
                    entries.push((i, j, m[(i, j)]));
                }
            }
        }
        MtxMatrix {
            nrows: m.nrows(),
            ncols: m.ncols(),
            format: MtxFormat::Array,
            entries,
        }
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn format(&self) -> MtxFormat {
        self.format
    }

    /// Nonzero entries `(row, col, value)`, sorted by column then row.
    pub fn entries(&self) -> &[(usize, usize, c64)] {
        &self.entries
    }

    pub fn to_dense(&self) -> Mat<c64> {
        let mut m = Mat::<c64>::zeros(self.nrows, self.ncols);
        for &(i, j, v) in &self.entries {
            m[(i, j)] = v;
        }
        m
    }

    /// Array files become dense coefficients, coordinate files sparse ones.
    pub fn into_coefficient(self) -> Coefficient {
        match self.format {
            MtxFormat::Array => Coefficient::Dense(self.to_dense()),
            MtxFormat::Coordinate => Coefficient::Sparse {
                nrows: self.nrows,
                ncols: self.ncols,
                entries: self.entries,
            },
        }
    }
}

struct Lines<R> {
    inner: R,
    line: usize,
    buf: String,
}

impl<R: BufRead> Lines<R> {
    /// Next line that is neither blank nor a `%` comment.
    fn next_data(&mut self, path: &Path) -> Result<Option<(usize, String)>> {
        loop {
            self.buf.clear();
            let read = self.inner.read_line(&mut self.buf).map_err(|e| NepError::Io {
                path: path.to_path_buf(),
                source: e,
            })?;
            if read == 0 {
                return Ok(None);
            }
            self.line += 1;
            let t = self.buf.trim();
            if !t.is_empty() && !t.starts_with('%') {
                return Ok(Some((self.line, t.to_string())));
            }
        }
    }
}

fn parse_err(path: &Path, line: usize, message: impl Into<String>) -> NepError {
    NepError::Parse {
        path: path.to_path_buf(),
        line,
        message: message.into(),
    }
}

fn parse_header(path: &Path, header: &str) -> Result<(MtxFormat, MtxField, MtxSymmetry)> {
    let words: Vec<String> = header.split_whitespace().map(|w| w.to_ascii_lowercase()).collect();
    if words.len() != 5 || words[0] != "%%matrixmarket" || words[1] != "matrix" {
        return Err(parse_err(
            path,
            1,
            format!("expected '%%MatrixMarket matrix <format> <field> <symmetry>', found '{header}'"),
        ));
    }
    let format = match words[2].as_str() {
        "coordinate" => MtxFormat::Coordinate,
        "array" => MtxFormat::Array,
        other => return Err(parse_err(path, 1, format!("unsupported format '{other}'"))),
    };
    let field = match words[3].as_str() {
        "real" | "double" => MtxField::Real,
        "integer" => MtxField::Integer,
        "complex" => MtxField::Complex,
        other => return Err(parse_err(path, 1, format!("unsupported field '{other}'"))),
    };
    let symmetry = match words[4].as_str() {
        "general" => MtxSymmetry::General,
        "symmetric" => MtxSymmetry::Symmetric,
        "skew-symmetric" => MtxSymmetry::SkewSymmetric,
        "hermitian" => MtxSymmetry::Hermitian,
        other => return Err(parse_err(path, 1, format!("unsupported symmetry '{other}'"))),
    };
    if symmetry == MtxSymmetry::Hermitian && field != MtxField::Complex {
        return Err(parse_err(path, 1, "hermitian storage requires a complex field"));
    }
    Ok((format, field, symmetry))
}

fn parse_usize(path: &Path, line: usize, tok: Option<&str>, what: &str) -> Result<usize> {
    let tok = tok.ok_or_else(|| parse_err(path, line, format!("missing {what}")))?;
    tok.parse()
        .map_err(|_| parse_err(path, line, format!("invalid {what} '{tok}'")))
}

fn parse_f64(path: &Path, line: usize, tok: Option<&str>) -> Result<f64> {
    let tok = tok.ok_or_else(|| parse_err(path, line, "missing value"))?;
    let v: f64 = tok
        .parse()
        .map_err(|_| parse_err(path, line, format!("invalid number '{tok}'")))?;
    if !v.is_finite() {
        return Err(parse_err(path, line, format!("non-finite value '{tok}'")));
    }
    Ok(v)
}

fn parse_value<'a>(
    path: &Path,
    line: usize,
    field: MtxField,
    toks: &mut impl Iterator<Item = &'a str>,
) -> Result<c64> {
    let re = parse_f64(path, line, toks.next())?;
    let im = match field {
        MtxField::Complex => parse_f64(path, line, toks.next())?,
        _ => 0.0,
    };
    if toks.next().is_some() {
        return Err(parse_err(path, line, "trailing tokens after entry"));
    }
    Ok(c64::new(re, im))
}

/// Mirror of a stored lower-triangle entry `(i, j, v)`, if any.
fn mirror(symmetry: MtxSymmetry, i: usize, j: usize, v: c64) -> Option<(usize, usize, c64)> {
    if i == j {
        return None;
    }
    match symmetry {
        MtxSymmetry::General => None,
        MtxSymmetry::Symmetric => Some((j, i, v)),
        MtxSymmetry::SkewSymmetric => Some((j, i, -v)),
        MtxSymmetry::Hermitian => Some((j, i, v.conj())),
    }
}

pub fn read_matrix_market(path: &Path) -> Result<MtxMatrix> {
    let file = File::open(path).map_err(|e| NepError::Io {
        path: path.to_path_buf(),
        source: e,
    })?;
    let mut lines = Lines {
        inner: BufReader::new(file),
        line: 0,
        buf: String::new(),
    };
    lines.inner.read_line(&mut lines.buf).map_err(|e| NepError::Io {
        path: path.to_path_buf(),
        source: e,
    })?;
    lines.line = 1;
    let header = lines.buf.trim().to_string();
    let (format, field, symmetry) = parse_header(path, &header)?;

    let (size_line, size) = lines
        .next_data(path)?
        .ok_or_else(|| parse_err(path, lines.line, "missing size line"))?;
    let mut toks = size.split_whitespace();
    let nrows = parse_usize(path, size_line, toks.next(), "row count")?;
    let ncols = parse_usize(path, size_line, toks.next(), "column count")?;
    if symmetry != MtxSymmetry::General && nrows != ncols {
        return Err(parse_err(path, size_line, "symmetric storage requires a square matrix"));
    }

    let mut triplets = Vec::new();
    match format {
        MtxFormat::Coordinate => {
            let nnz = parse_usize(path, size_line, toks.next(), "entry count")?;
            if toks.next().is_some() {
                return Err(parse_err(path, size_line, "trailing tokens on size line"));
            }
            triplets.reserve(nnz * if symmetry == MtxSymmetry::General { 1 } else { 2 });
            for _ in 0..nnz {
                let (ln, text) = lines
                    .next_data(path)?
                    .ok_or_else(|| parse_err(path, lines.line, format!("expected {nnz} entries")))?;
                let mut t = text.split_whitespace();
                let i = parse_usize(path, ln, t.next(), "row index")?;
                let j = parse_usize(path, ln, t.next(), "column index")?;
                if i == 0 || j == 0 || i > nrows || j > ncols {
                    return Err(parse_err(path, ln, format!("index ({i}, {j}) out of range")));
                }
                if symmetry != MtxSymmetry::General && j > i {
                    return Err(parse_err(path, ln, "entry above the diagonal in symmetric storage"));
                }
                let v = parse_value(path, ln, field, &mut t)?;
                triplets.push((i - 1, j - 1, v));
                triplets.extend(mirror(symmetry, i - 1, j - 1, v));
            }
        }
        MtxFormat::Array => {
            if toks.next().is_some() {
                return Err(parse_err(path, size_line, "trailing tokens on size line"));
            }
            for j in 0..ncols {
                let start = match symmetry {
                    MtxSymmetry::General => 0,
                    MtxSymmetry::SkewSymmetric => j + 1,
                    _ => j,
                };
                for i in start..nrows {
                    let (ln, text) = lines.next_data(path)?.ok_or_else(|| {
                        parse_err(path, lines.line, "fewer array entries than declared")
                    })?;
                    let v = parse_value(path, ln, field, &mut text.split_whitespace())?;
                    triplets.push((i, j, v));
                    triplets.extend(mirror(symmetry, i, j, v));
                }
            }
        }
    }
    if let Some((ln, _)) = lines.next_data(path)? {
        return Err(parse_err(path, ln, "unexpected data after the last entry"));
    }
    let mut m = MtxMatrix::from_triplets(nrows, ncols, triplets)?;
    m.format = format;
    Ok(m)
}

/// Writes `m` in coordinate general format; the field is `real` when every
/// entry has a zero imaginary part, `complex` otherwise.
pub fn write_matrix_market(path: &Path, m: &MtxMatrix) -> Result<()> {
    let io = |e| NepError::Io {
        path: path.to_path_buf(),
        source: e,
    };
    let file = File::create(path).map_err(io)?;
    let mut w = BufWriter::new(file);
    let complex = m.entries.iter().any(|(_, _, v)| v.im != 0.0);
    let field = if complex { "complex" } else { "real" };
    writeln!(w, "%%MatrixMarket matrix coordinate {field} general").map_err(io)?;
    writeln!(w, "{} {} {}", m.nrows, m.ncols, m.entries.len()).map_err(io)?;
    for &(i, j, v) in &m.entries {
        if complex {
            writeln!(w, "{} {} {:e} {:e}", i + 1, j + 1, v.re, v.im).map_err(io)?;
        } else {
            writeln!(w, "{} {} {:e}", i + 1, j + 1, v.re).map_err(io)?;
        }
    }
    w.flush().map_err(io)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn write_tmp(contents: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(contents.as_bytes()).unwrap();
        f
    }

    fn c(re: f64, im: f64) -> c64 {
        c64::new(re, im)
    }

    #[test]
    fn symmetric_coordinate_is_expanded() {
        let f = write_tmp("%%MatrixMarket matrix coordinate real symmetric\n% comment\n2 2 2\n1 1 1\n2 1 3\n");
        let m = read_matrix_market(f.path()).unwrap();
        let d = m.to_dense();
        assert_eq!(d[(0, 0)], c(1.0, 0.0));
        assert_eq!(d[(0, 1)], c(3.0, 0.0));
        assert_eq!(d[(1, 0)], c(3.0, 0.0));
        assert_eq!(d[(1, 1)], c(0.0, 0.0));
        assert_eq!(m.format(), MtxFormat::Coordinate);
    }

    #[test]
    fn array_identity() {
        let f = write_tmp("%%MatrixMarket matrix array real general\n3 3\n1\n0\n0\n0\n1\n0\n0\n0\n1\n");
        let m = read_matrix_market(f.path()).unwrap();
        assert_eq!(m.to_dense(), Mat::<c64>::identity(3, 3));
        assert!(matches!(m.into_coefficient(), Coefficient::Dense(_)));
    }

    #[test]
    fn complex_hermitian_and_skew() {
        let f = write_tmp("%%MatrixMarket matrix coordinate complex hermitian\n2 2 2\n1 1 2 0\n2 1 1 -1\n");
        let d = read_matrix_market(f.path()).unwrap().to_dense();
        assert_eq!(d[(1, 0)], c(1.0, -1.0));
        assert_eq!(d[(0, 1)], c(1.0, 1.0));
        let f = write_tmp("%%MatrixMarket matrix array real skew-symmetric\n3 3\n1\n2\n3\n");
        let d = read_matrix_market(f.path()).unwrap().to_dense();
        assert_eq!(d[(1, 0)], c(1.0, 0.0));
        assert_eq!(d[(0, 1)], c(-1.0, 0.0));
        assert_eq!(d[(2, 1)], c(3.0, 0.0));
        assert_eq!(d[(1, 2)], c(-3.0, 0.0));
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let cases = [
            ("%%MatrixMarket matrix coordinate real general\n2 2 1\n1 x 1\n", 3),
            ("%%MatrixMarket matrix coordinate real general\n2 2 1\n3 1 1\n", 3),
            ("%%MatrixMarket matrix coordinate real general\n2 2 2\n1 1 1\n", 3),
            ("%%MatrixMarket matrix coordinate real symmetric\n2 2 1\n1 2 1\n", 3),
            ("%%MatrixMarket matrix blob real general\n2 2 1\n", 1),
            ("%%MatrixMarket matrix array real general\n2 2\n1\n2\n3\n4\n5\n", 7),
            ("not a header\n", 1),
        ];
        for (text, line) in cases {
            let f = write_tmp(text);
            match read_matrix_market(f.path()) {
                Err(NepError::Parse { line: l, .. }) => assert_eq!(l, line, "{text}"),
                other => panic!("expected parse error for {text:?}, got {other:?}"),
            }
        }
        let missing = Path::new("/nonexistent/definitely/missing.mtx");
        assert!(matches!(read_matrix_market(missing), Err(NepError::Io { .. })));
    }

    #[test]
    fn duplicates_are_summed() {
        let f = write_tmp("%%MatrixMarket matrix coordinate real general\n2 2 3\n1 1 1\n1 1 2\n2 2 5\n");
        let m = read_matrix_market(f.path()).unwrap();
        assert_eq!(m.entries(), &[(0, 0, c(3.0, 0.0)), (1, 1, c(5.0, 0.0))]);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn write_then_read_round_trips(
            entries in proptest::collection::vec((0usize..7, 0usize..5, -1e3f64..1e3, -1e3f64..1e3), 0..30),
            real in any::<bool>(),
        ) {
            let m = MtxMatrix::from_triplets(
                7, 5,
                entries.iter().map(|&(i, j, a, b)| (i, j, c(a, if real { 0.0 } else { b }))),
            ).unwrap();
            let dir = tempfile::tempdir().unwrap();
            let path = dir.path().join("m.mtx");
            write_matrix_market(&path, &m).unwrap();
            let back = read_matrix_market(&path).unwrap();
            prop_assert_eq!(back, m);
        }
    }
}
