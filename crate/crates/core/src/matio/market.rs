//! Matrix Market reader and writer.
//!
//! Supports `coordinate` and `array` formats with `real`, `double` or
//! `integer` fields and `general`, `symmetric` or `skew-symmetric` symmetry.
//! Symmetric storage is expanded to the full matrix on load. Indices are
//! 1-based on disk and 0-based in memory.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::matio::matrix::{CsrMatrix, MatrixHandle, Storage};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Layout {
    Coordinate,
    Array,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Symmetry {
    General,
    Symmetric,
    Skew,
}

pub fn load_matrix_market(path: impl AsRef<Path>) -> Result<MatrixHandle> {
    let path = path.as_ref();
    let file = File::open(path)?;
    read_matrix_market(BufReader::new(file), path)
}

/// Parses Matrix Market text from any reader; `origin` is only used in
/// error messages.
pub fn read_matrix_market<R: BufRead>(reader: R, origin: &Path) -> Result<MatrixHandle> {
    let err = |line: usize, msg: String| Error::Parse {
        path: PathBuf::from(origin),
        line,
        msg,
    };

    let mut lines = reader.lines().enumerate().map(|(i, l)| (i + 1, l));

    let (lineno, header) = match lines.next() {
        Some((n, l)) => (n, l?),
        None => return Err(err(1, "empty file".into())),
    };
    let tokens: Vec<String> = header.split_whitespace().map(str::to_ascii_lowercase).collect();
    if tokens.len() != 5 || tokens[0] != "%%matrixmarket" || tokens[1] != "matrix" {
        return Err(err(lineno, format!("bad header `{header}`")));
    }
    let layout = match tokens[2].as_str() {
        "coordinate" => Layout::Coordinate,
        "array" => Layout::Array,
        other => return Err(err(lineno, format!("unknown format `{other}`"))),
    };
    match tokens[3].as_str() {
        "real" | "double" | "integer" => {}
        other => return Err(Error::Unsupported(format!("field `{other}`"))),
    }
    let symmetry = match tokens[4].as_str() {
        "general" => Symmetry::General,
        "symmetric" => Symmetry::Symmetric,
        "skew-symmetric" => Symmetry::Skew,
        other => return Err(Error::Unsupported(format!("symmetry `{other}`"))),
    };

    // data lines: skip comments and blanks
    let mut data = lines.filter_map(|(n, l)| match l {
        Ok(s) => {
            let t = s.trim();
            if t.is_empty() || t.starts_with('%') {
                None
            } else {
                Some(Ok((n, t.to_owned())))
            }
        }
        Err(e) => Some(Err(e)),
    });

    let (size_line, size) = match data.next() {
        Some(r) => r?,
        None => return Err(err(lineno + 1, "missing size line".into())),
    };
    let dims: Vec<usize> = size
        .split_whitespace()
        .map(|t| t.parse::<usize>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|e| err(size_line, format!("bad size line: {e}")))?;
    let expected = if layout == Layout::Coordinate { 3 } else { 2 };
    if dims.len() != expected {
        return Err(err(size_line, format!("size line needs {expected} integers")));
    }
    let (m, n) = (dims[0], dims[1]);
    if m == 0 || n == 0 {
        return Err(err(size_line, "empty matrix".into()));
    }
    if symmetry != Symmetry::General && m != n {
        return Err(err(size_line, "symmetric storage requires a square matrix".into()));
    }

    let parse_val = |line: usize, t: &str| -> Result<f64> {
        t.parse::<f64>()
            .map_err(|e| err(line, format!("bad value `{t}`: {e}")))
    };

    match layout {
        Layout::Coordinate => {
            let nnz = dims[2];
            if nnz == 0 {
                return Err(err(size_line, "empty matrix".into()));
            }
            let mut trip = Vec::with_capacity(nnz * if symmetry == Symmetry::General { 1 } else { 2 });
            let mut count = 0usize;
            for item in data {
                let (ln, s) = item?;
                if count == nnz {
                    return Err(err(ln, format!("more than {nnz} entries")));
                }
                let mut it = s.split_whitespace();
                let (Some(ti), Some(tj), Some(tv), None) = (it.next(), it.next(), it.next(), it.next())
                else {
                    return Err(err(ln, "expected `row col value`".into()));
                };
                let i: usize = ti.parse().map_err(|e| err(ln, format!("bad row index: {e}")))?;
                let j: usize = tj.parse().map_err(|e| err(ln, format!("bad column index: {e}")))?;
                if i == 0 || j == 0 || i > m || j > n {
                    return Err(err(ln, format!("index ({i}, {j}) out of range")));
                }
                let v = parse_val(ln, tv)?;
                let (i, j) = (i - 1, j - 1);
                trip.push((i, j, v));
                if i != j {
                    match symmetry {
                        Symmetry::General => {}
                        Symmetry::Symmetric => trip.push((j, i, v)),
                        Symmetry::Skew => trip.push((j, i, -v)),
                    }
                }
                count += 1;
            }
            if count != nnz {
                return Err(err(size_line, format!("declared {nnz} entries, found {count}")));
            }
            let csr = CsrMatrix::from_triplets(m, n, trip)?;
            if csr.nnz() == 0 {
                return Err(err(size_line, "empty matrix (all entries zero)".into()));
            }
            Ok(MatrixHandle::sparse(csr))
        }
        Layout::Array => {
            // column-major; symmetric variants store the lower triangle only
            let mut positions = Vec::new();
            for j in 0..n {
                let start = match symmetry {
                    Symmetry::General => 0,
                    Symmetry::Symmetric => j,
                    Symmetry::Skew => j + 1,
                };
                for i in start..m {
                    positions.push((i, j));
                }
            }
            let mut a = DMatrix::zeros(m, n);
            let mut k = 0usize;
            for item in data {
                let (ln, s) = item?;
                for t in s.split_whitespace() {
                    let Some(&(i, j)) = positions.get(k) else {
                        return Err(err(ln, "too many values".into()));
                    };
                    let v = parse_val(ln, t)?;
                    a[(i, j)] = v;
                    match symmetry {
                        Symmetry::General => {}
                        Symmetry::Symmetric => a[(j, i)] = v,
                        Symmetry::Skew => a[(j, i)] = -v,
                    }
                    k += 1;
                }
            }
            if k != positions.len() {
                return Err(err(size_line, format!("expected {} values, found {k}", positions.len())));
            }
            Ok(MatrixHandle::dense(a))
        }
    }
}

/// Writes CSR handles as `coordinate real general` and dense handles as
/// `array real general`, with 17 significant digits.
pub fn write_matrix_market<W: Write>(a: &MatrixHandle, mut w: W) -> Result<()> {
    match a.storage() {
        Storage::Sparse(s) => {
            writeln!(w, "%%MatrixMarket matrix coordinate real general")?;
            writeln!(w, "{} {} {}", s.nrows(), s.ncols(), s.nnz())?;
            for (i, j, v) in s.triplets() {
                writeln!(w, "{} {} {:.16e}", i + 1, j + 1, v)?;
            }
        }
        Storage::Dense(d) => {
            writeln!(w, "%%MatrixMarket matrix array real general")?;
            writeln!(w, "{} {}", d.nrows(), d.ncols())?;
            for v in d.iter() {
                writeln!(w, "{v:.16e}")?;
            }
        }
    }
    Ok(())
}

pub fn save_matrix_market(a: &MatrixHandle, path: impl AsRef<Path>) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_matrix_market(a, &mut w)?;
    w.flush()?;
    Ok(())
}

/// One value per line in scientific notation with 17 significant digits.
pub fn write_vector<W: Write>(v: &[f64], mut w: W) -> Result<()> {
    for x in v {
        writeln!(w, "{x:.16e}")?;
    }
    Ok(())
}

pub fn save_vector(v: &[f64], path: impl AsRef<Path>) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_vector(v, &mut w)?;
    w.flush()?;
    Ok(())
}

pub fn load_vector(path: impl AsRef<Path>) -> Result<Vec<f64>> {
    let path = path.as_ref();
    let reader = BufReader::new(File::open(path)?);
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        let t = line.trim();
        if t.is_empty() {
            continue;
        }
        out.push(t.parse::<f64>().map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            line: i + 1,
            msg: format!("bad value `{t}`: {e}"),
        })?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(s: &str) -> Result<MatrixHandle> {
        read_matrix_market(s.as_bytes(), Path::new("<test>"))
    }

    #[test]
    fn identity_coordinate() {
        let a = parse("%%MatrixMarket matrix coordinate real general\n2 2 2\n1 1 1\n2 2 1\n").unwrap();
        assert_eq!(a.to_dense(), DMatrix::identity(2, 2));
        assert_eq!(a.nnz(), 2);
    }

    #[test]
    fn symmetric_is_expanded() {
        let a = parse(
            "%%MatrixMarket matrix coordinate real symmetric\n% comment\n3 3 3\n1 1 2.0\n3 1 -1.5\n2 2 4\n",
        )
        .unwrap();
        let d = a.to_dense();
        assert_eq!(d[(0, 2)], -1.5);
        assert_eq!(d[(2, 0)], -1.5);
        assert_eq!(a.nnz(), 4);
    }

    #[test]
    fn array_is_column_major() {
        let a = parse("%%MatrixMarket matrix array real general\n3 2\n1\n2\n3\n4\n5\n6\n").unwrap();
        let d = a.to_dense();
        assert_eq!(d[(2, 0)], 3.0);
        assert_eq!(d[(0, 1)], 4.0);
    }

    #[test]
    fn rejects_pattern_complex_and_empty() {
        assert!(matches!(
            parse("%%MatrixMarket matrix coordinate pattern general\n2 2 1\n1 1\n"),
            Err(Error::Unsupported(_))
        ));
        assert!(matches!(
            parse("%%MatrixMarket matrix coordinate complex general\n2 2 1\n1 1 1 0\n"),
            Err(Error::Unsupported(_))
        ));
        assert!(parse("%%MatrixMarket matrix coordinate real general\n0 0 0\n").is_err());
        assert!(parse("%%MatrixMarket matrix coordinate real general\n3 3 0\n").is_err());
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let e = parse("%%MatrixMarket matrix coordinate real general\n% c\n2 2 2\n1 1 1\n2 x 1\n")
            .unwrap_err();
        match e {
            Error::Parse { line, .. } => assert_eq!(line, 5),
            other => panic!("unexpected {other:?}"),
        }
        let e = parse("%%MatrixMarket matrix coordinate real general\n2 2 1\n3 1 1\n").unwrap_err();
        assert!(matches!(e, Error::Parse { line: 3, .. }));
    }
}
