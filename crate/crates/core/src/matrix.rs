//! The 0/1 input matrix and its text format.
//!
//! ```text
//! 3
//! 1 1 0
//! 0 1 1
//! 1 1 0
//! ```
//!
//! Line 1 holds `n`, the next `n` lines hold `n` whitespace-separated `0`/`1`
//! tokens each. Trailing blank lines are ignored.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::error::{Error, Result};

/// An `n x n` matrix with entries in {0, 1}, read as the biadjacency matrix of
/// a bipartite graph: row `i` is joined to column `j` iff `a[i][j] = 1`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BinaryMatrix {
    n: usize,
    bits: Vec<bool>,
}

impl BinaryMatrix {
    pub fn from_rows(rows: &[Vec<u8>]) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(Error::invalid("matrix must have n >= 1"));
        }
        let mut bits = Vec::with_capacity(n * n);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::invalid(format!(
                    "row {} has {} entries, expected {n}",
                    i + 1,
                    row.len()
                )));
            }
            for &x in row {
                match x {
                    0 => bits.push(false),
                    1 => bits.push(true),
                    other => return Err(Error::invalid(format!("entry {other} is not 0/1"))),
                }
            }
        }
        Ok(Self { n, bits })
    }

    /// Builds a matrix from an entry predicate.
    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> bool) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("matrix must have n >= 1"));
        }
        let bits = (0..n * n).map(|k| f(k / n, k % n)).collect();
        Ok(Self { n, bits })
    }

    pub fn ones(n: usize) -> Result<Self> {
        Self::from_fn(n, |_, _| true)
    }

    pub fn zeros(n: usize) -> Result<Self> {
        Self::from_fn(n, |_, _| false)
    }

    pub fn identity(n: usize) -> Result<Self> {
        Self::from_fn(n, |i, j| i == j)
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> bool {
        self.bits[row * self.n + col]
    }

    pub fn set(&mut self, row: usize, col: usize, value: bool) {
        self.bits[row * self.n + col] = value;
    }

    /// Edge set of the bipartite graph, row-major.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.n * self.n)
            .filter(|&k| self.bits[k])
            .map(move |k| (k / self.n, k % self.n))
    }

    pub fn edge_count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn is_complete(&self) -> bool {
        self.bits.iter().all(|&b| b)
    }

    pub fn row(&self, i: usize) -> &[bool] {
        &self.bits[i * self.n..(i + 1) * self.n]
    }
}

impl fmt::Display for BinaryMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{}", self.n)?;
        for i in 0..self.n {
            for (j, &b) in self.row(i).iter().enumerate() {
                if j > 0 {
                    f.write_str(" ")?;
                }
                f.write_str(if b { "1" } else { "0" })?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

fn parse_err(line: usize, column: usize, message: String) -> Error {
    Error::Parse {
        line,
        column,
        message,
    }
}

/// Parses the matrix text format. Errors carry the 1-based line and token
/// column of the offending input.
pub fn parse_matrix(text: &str) -> Result<BinaryMatrix> {
    let mut lines = text.lines().enumerate();
    let (header_idx, header) = lines
        .by_ref()
        .find(|(_, l)| !l.trim().is_empty())
        .ok_or_else(|| parse_err(1, 1, "empty input, expected dimension n".into()))?;
    let header_line = header_idx + 1;
    let mut header_tokens = header.split_whitespace();
    let n_token = header_tokens.next().unwrap_or_default();
    let n: usize = n_token
        .parse()
        .map_err(|_| parse_err(header_line, 1, format!("dimension {n_token:?} is not a positive integer")))?;
    if n == 0 {
        return Err(parse_err(header_line, 1, "dimension must be at least 1".into()));
    }
    if header_tokens.next().is_some() {
        return Err(parse_err(header_line, 2, "unexpected token after dimension".into()));
    }

    let mut bits = Vec::with_capacity(n * n);
    let mut rows = 0;
    for (idx, line) in lines {
        let line_no = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        if rows == n {
            return Err(parse_err(
                line_no,
                1,
                format!("dimension mismatch: header declares {n} rows, found more"),
            ));
        }
        let mut count = 0;
        for (col, token) in line.split_whitespace().enumerate() {
            count += 1;
            if count > n {
                return Err(parse_err(
                    line_no,
                    col + 1,
                    format!("row {} has more than {n} entries", rows + 1),
                ));
            }
            match token {
                "0" => bits.push(false),
                "1" => bits.push(true),
                _ => {
                    return Err(parse_err(
                        line_no,
                        col + 1,
                        format!("non-binary token {token:?} at row {}", rows + 1),
                    ))
                }
            }
        }
        if count < n {
            return Err(parse_err(
                line_no,
                count + 1,
                format!("row {} has {count} entries, expected {n}", rows + 1),
            ));
        }
        rows += 1;
    }
    if rows < n {
        let last = text.lines().count().max(1);
        return Err(parse_err(
            last,
            1,
            format!("dimension mismatch: header declares {n} rows, found {rows}"),
        ));
    }
    Ok(BinaryMatrix { n, bits })
}
