//! Matrix Market exchange format.
//!
//! Sparse matrices use `coordinate real general`, dense matrices and vectors
//! use `array real general` (column-major). Files are 1-based; everything in
//! memory is 0-based. Values are written with 17 significant digits so a
//! write/read cycle reproduces every `f64` bit for bit.

use std::collections::HashSet;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use super::{CsrMatrix, DenseMatrix, LinearOperator};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Layout {
    Coordinate,
    Array,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Symmetry {
    General,
    Symmetric,
}

struct Lines<R> {
    inner: std::io::Lines<R>,
    line_no: usize,
    path: PathBuf,
}

impl<R: BufRead> Lines<R> {
    fn new(reader: R, path: &Path) -> Self {
        Self {
            inner: reader.lines(),
            line_no: 0,
            path: path.to_path_buf(),
        }
    }

    fn err(&self, msg: impl Into<String>) -> Error {
        Error::Parse {
            path: self.path.clone(),
            line: self.line_no,
            msg: msg.into(),
        }
    }

    fn next_raw(&mut self) -> Result<Option<String>> {
        match self.inner.next() {
            None => Ok(None),
            Some(Ok(l)) => {
                self.line_no += 1;
                Ok(Some(l))
            }
            Some(Err(source)) => Err(Error::Io {
                path: self.path.clone(),
                source,
            }),
        }
    }

    /// Next line that is neither blank nor a `%` comment.
    fn next_data(&mut self) -> Result<Option<String>> {
        while let Some(l) = self.next_raw()? {
            let t = l.trim();
            if !t.is_empty() && !t.starts_with('%') {
                return Ok(Some(t.to_string()));
            }
        }
        Ok(None)
    }

    fn expect_data(&mut self, what: &str) -> Result<String> {
        self.next_data()?
            .ok_or_else(|| self.err(format!("unexpected end of file, expected {what}")))
    }
}

fn parse_header<R: BufRead>(lines: &mut Lines<R>) -> Result<(Layout, Symmetry)> {
    let header = lines.next_raw()?.ok_or_else(|| lines.err("empty file"))?;
    let tokens: Vec<String> = header
        .split_whitespace()
        .map(|t| t.to_ascii_lowercase())
        .collect();
    if tokens.len() != 5 || tokens[0] != "%%matrixmarket" || tokens[1] != "matrix" {
        return Err(lines.err(
            "malformed header, expected '%%MatrixMarket matrix <layout> <field> <symmetry>'",
        ));
    }
    let layout = match tokens[2].as_str() {
        "coordinate" => Layout::Coordinate,
        "array" => Layout::Array,
        other => return Err(lines.err(format!("unsupported layout '{other}'"))),
    };
    match tokens[3].as_str() {
        "real" | "integer" | "double" => {}
        other => {
            return Err(lines.err(format!(
                "unsupported field '{other}', only real data is accepted"
            )))
        }
    }
    let symmetry = match tokens[4].as_str() {
        "general" => Symmetry::General,
        "symmetric" => Symmetry::Symmetric,
        other => return Err(lines.err(format!("unsupported symmetry '{other}'"))),
    };
    Ok((layout, symmetry))
}

fn parse_usize<R: BufRead>(lines: &Lines<R>, tok: &str) -> Result<usize> {
    tok.parse::<usize>()
        .map_err(|_| lines.err(format!("invalid integer '{tok}'")))
}

fn parse_real<R: BufRead>(lines: &Lines<R>, tok: &str) -> Result<f64> {
    let v = tok
        .parse::<f64>()
        .map_err(|_| lines.err(format!("invalid real '{tok}'")))?;
    if !v.is_finite() {
        return Err(lines.err(format!("non-finite value '{tok}'")));
    }
    Ok(v)
}

fn read_operator<R: BufRead>(reader: R, path: &Path) -> Result<LinearOperator> {
    let mut lines = Lines::new(reader, path);
    let (layout, symmetry) = parse_header(&mut lines)?;
    let size_line = lines.expect_data("size line")?;
    let sizes: Vec<&str> = size_line.split_whitespace().collect();
    match layout {
        Layout::Coordinate => {
            if sizes.len() != 3 {
                return Err(lines.err("coordinate size line needs 'rows cols nnz'"));
            }
            let nrows = parse_usize(&lines, sizes[0])?;
            let ncols = parse_usize(&lines, sizes[1])?;
            let nnz = parse_usize(&lines, sizes[2])?;
            if symmetry == Symmetry::Symmetric && nrows != ncols {
                return Err(lines.err("symmetric matrix must be square"));
            }
            let mut seen = HashSet::with_capacity(nnz);
            let mut triplets = Vec::with_capacity(nnz);
            for _ in 0..nnz {
                let l = lines.expect_data("matrix entry")?;
                let toks: Vec<&str> = l.split_whitespace().collect();
                if toks.len() != 3 {
                    return Err(lines.err("entry line needs 'row col value'"));
                }
                let i = parse_usize(&lines, toks[0])?;
                let j = parse_usize(&lines, toks[1])?;
                let v = parse_real(&lines, toks[2])?;
                if i == 0 || j == 0 || i > nrows || j > ncols {
                    return Err(lines.err(format!(
                        "index ({i}, {j}) out of bounds for a {nrows}x{ncols} matrix"
                    )));
                }
                let (i, j) = (i - 1, j - 1);
                if symmetry == Symmetry::Symmetric && j > i {
                    return Err(lines.err("symmetric storage must list the lower triangle only"));
                }
                if !seen.insert((i, j)) {
                    return Err(lines.err(format!("duplicate entry ({}, {})", i + 1, j + 1)));
                }
                triplets.push((i, j, v));
                if symmetry == Symmetry::Symmetric && i != j {
                    triplets.push((j, i, v));
                }
            }
            if lines.next_data()?.is_some() {
                return Err(lines.err("more entries than declared"));
            }
            Ok(CsrMatrix::from_triplets(nrows, ncols, triplets)?.into())
        }
        Layout::Array => {
            if sizes.len() != 2 {
                return Err(lines.err("array size line needs 'rows cols'"));
            }
            let nrows = parse_usize(&lines, sizes[0])?;
            let ncols = parse_usize(&lines, sizes[1])?;
            if symmetry == Symmetry::Symmetric && nrows != ncols {
                return Err(lines.err("symmetric matrix must be square"));
            }
            let mut dense = DenseMatrix::zeros(nrows, ncols);
            for j in 0..ncols {
                let first_row = if symmetry == Symmetry::Symmetric {
                    j
                } else {
                    0
                };
                for i in first_row..nrows {
                    let l = lines.expect_data("array value")?;
                    let mut toks = l.split_whitespace();
                    let tok = toks.next().unwrap_or_default();
                    if toks.next().is_some() {
                        return Err(lines.err("array lines hold exactly one value"));
                    }
                    let v = parse_real(&lines, tok)?;
                    dense.set(i, j, v);
                    if symmetry == Symmetry::Symmetric {
                        dense.set(j, i, v);
                    }
                }
            }
            if lines.next_data()?.is_some() {
                return Err(lines.err("more values than declared"));
            }
            Ok(dense.into())
        }
    }
}

fn open(path: &Path) -> Result<BufReader<File>> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Reads a matrix. Coordinate files become CSR, array files become dense.
pub fn read_matrix(path: impl AsRef<Path>) -> Result<LinearOperator> {
    let path = path.as_ref();
    read_operator(open(path)?, path)
}

/// Parses matrix text already in memory; `label` names the source in errors.
pub fn parse_matrix(text: &str, label: &str) -> Result<LinearOperator> {
    read_operator(text.as_bytes(), Path::new(label))
}

/// Reads a vector stored as an `n x 1` matrix in either layout.
pub fn read_vector(path: impl AsRef<Path>) -> Result<Vec<f64>> {
    let path = path.as_ref();
    let op = read_operator(open(path)?, path)?;
    operator_to_vector(op, path)
}

fn operator_to_vector(op: LinearOperator, path: &Path) -> Result<Vec<f64>> {
    if op.ncols() != 1 {
        return Err(Error::Parse {
            path: path.to_path_buf(),
            line: 2,
            msg: format!("expected a single column, found {}", op.ncols()),
        });
    }
    Ok(match op {
        LinearOperator::Dense(d) => d.values().to_vec(),
        LinearOperator::Csr(m) => {
            let mut v = vec![0.0; m.nrows()];
            for (i, _, x) in m.triplets() {
                v[i] = x;
            }
            v
        }
    })
}

/// Serializes a matrix: CSR as coordinate, dense as column-major array.
pub fn format_matrix(op: &LinearOperator, out: &mut impl Write) -> std::io::Result<()> {
    match op {
        LinearOperator::Csr(m) => {
            writeln!(out, "%%MatrixMarket matrix coordinate real general")?;
            writeln!(out, "{} {} {}", m.nrows(), m.ncols(), m.nnz())?;
            for (i, j, v) in m.triplets() {
                writeln!(out, "{} {} {:.16e}", i + 1, j + 1, v)?;
            }
        }
        LinearOperator::Dense(d) => {
            writeln!(out, "%%MatrixMarket matrix array real general")?;
            writeln!(out, "{} {}", d.nrows(), d.ncols())?;
            for j in 0..d.ncols() {
                for i in 0..d.nrows() {
                    writeln!(out, "{:.16e}", d.get(i, j))?;
                }
            }
        }
    }
    Ok(())
}

pub fn write_matrix(path: impl AsRef<Path>, op: &LinearOperator) -> Result<()> {
    let path = path.as_ref();
    let finite = match op {
        LinearOperator::Csr(m) => m.values().iter().all(|v| v.is_finite()),
        LinearOperator::Dense(d) => d.values().iter().all(|v| v.is_finite()),
    };
    if !finite {
        return Err(Error::InvalidInput(
            "matrix contains non-finite values".into(),
        ));
    }
    let mut w = create(path)?;
    format_matrix(op, &mut w).map_err(io_err(path))?;
    w.flush().map_err(io_err(path))
}

/// Writes a vector as an `n x 1` array.
pub fn write_vector(path: impl AsRef<Path>, v: &[f64]) -> Result<()> {
    let path = path.as_ref();
    super::ensure_finite(v, "vector")?;
    let mut w = create(path)?;
    let write = |w: &mut BufWriter<File>| -> std::io::Result<()> {
        writeln!(w, "%%MatrixMarket matrix array real general")?;
        writeln!(w, "{} 1", v.len())?;
        for x in v {
            writeln!(w, "{x:.16e}")?;
        }
        w.flush()
    };
    write(&mut w).map_err(io_err(path))
}
