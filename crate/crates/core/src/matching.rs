//! Elements of the state space: perfect matchings and near-perfect matchings
//! of the complete bipartite graph `K_{n,n}`.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};

const FREE: u16 = u16::MAX;

/// Which part of the state space a matching lies in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MatchingKind {
    Perfect,
    /// Row `hole_u` and column `hole_v` are the uncovered vertices.
    NearPerfect { hole_u: usize, hole_v: usize },
}

/// The class a matching belongs to: the perfect class or the near-perfect
/// class of one hole pair. Perfect sorts first, holes row-major.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum MatchingClass {
    Perfect,
    Hole(usize, usize),
}

/// A perfect or near-perfect matching on `n + n` vertices.
///
/// Stored as the two partial inverse maps row -> column and column -> row so
/// that every kernel move is O(1).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Matching {
    row_to_col: Vec<u16>,
    col_to_row: Vec<u16>,
    hole: Option<(u16, u16)>,
}

impl Matching {
    /// Perfect matching `{(i, perm[i])}`.
    pub fn perfect(perm: &[usize]) -> Result<Self> {
        let pairs: Vec<(usize, usize)> = perm.iter().copied().enumerate().collect();
        let m = Self::from_pairs(perm.len(), &pairs)?;
        if !m.is_perfect() {
            return Err(Error::invalid("permutation does not cover every vertex"));
        }
        Ok(m)
    }

    /// Validates that `pairs` is a perfect matching or a near-perfect matching
    /// of `K_{n,n}`.
    pub fn from_pairs(n: usize, pairs: &[(usize, usize)]) -> Result<Self> {
        if n == 0 || n >= FREE as usize {
            return Err(Error::invalid("matching dimension out of range"));
        }
        let mut row_to_col = vec![FREE; n];
        let mut col_to_row = vec![FREE; n];
        for &(u, v) in pairs {
            if u >= n || v >= n {
                return Err(Error::invalid("pair index out of range"));
            }
            if row_to_col[u] != FREE || col_to_row[v] != FREE {
                return Err(Error::invalid("pairs share a vertex"));
            }
            row_to_col[u] = v as u16;
            col_to_row[v] = u as u16;
        }
        let hole = match pairs.len() {
            k if k == n => None,
            k if k + 1 == n => {
                let u = row_to_col.iter().position(|&c| c == FREE).unwrap_or(0);
                let v = col_to_row.iter().position(|&r| r == FREE).unwrap_or(0);
                Some((u as u16, v as u16))
            }
            _ => return Err(Error::invalid("a matching in the state space has n or n-1 pairs")),
        };
        Ok(Self {
            row_to_col,
            col_to_row,
            hole,
        })
    }

    /// Builds from a row -> column map whose only free entry (if any) is the
    /// hole row. The caller guarantees the map is injective.
    pub(crate) fn from_row_map(row_to_col: Vec<u16>, hole: Option<(u16, u16)>) -> Self {
        let n = row_to_col.len();
        let mut col_to_row = vec![FREE; n];
        for (u, &v) in row_to_col.iter().enumerate() {
            if v != FREE {
                col_to_row[v as usize] = u as u16;
            }
        }
        Self {
            row_to_col,
            col_to_row,
            hole,
        }
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.row_to_col.len()
    }

    #[inline]
    pub fn is_perfect(&self) -> bool {
        self.hole.is_none()
    }

    #[inline]
    pub fn hole(&self) -> Option<(usize, usize)> {
        self.hole.map(|(u, v)| (u as usize, v as usize))
    }

    pub fn kind(&self) -> MatchingKind {
        match self.hole() {
            None => MatchingKind::Perfect,
            Some((hole_u, hole_v)) => MatchingKind::NearPerfect { hole_u, hole_v },
        }
    }

    pub fn class(&self) -> MatchingClass {
        match self.hole() {
            None => MatchingClass::Perfect,
            Some((u, v)) => MatchingClass::Hole(u, v),
        }
    }

    /// Number of pairs: `n` or `n - 1`.
    pub fn len(&self) -> usize {
        self.n() - usize::from(self.hole.is_some())
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn col_of(&self, row: usize) -> Option<usize> {
        match self.row_to_col[row] {
            FREE => None,
            c => Some(c as usize),
        }
    }

    #[inline]
    pub fn row_of(&self, col: usize) -> Option<usize> {
        match self.col_to_row[col] {
            FREE => None,
            r => Some(r as usize),
        }
    }

    #[inline]
    pub fn contains(&self, row: usize, col: usize) -> bool {
        self.row_to_col[row] == col as u16
    }

    /// Pairs `(row, col)` in row order.
    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.row_to_col
            .iter()
            .enumerate()
            .filter(|(_, &c)| c != FREE)
            .map(|(u, &c)| (u, c as usize))
    }

    /// Removes `(u, v)` from a perfect matching.
    pub(crate) fn remove(&mut self, u: usize, v: usize) {
        debug_assert!(self.hole.is_none() && self.contains(u, v));
        self.row_to_col[u] = FREE;
        self.col_to_row[v] = FREE;
        self.hole = Some((u as u16, v as u16));
    }

    /// Fills the hole pair `(u, v)`.
    pub(crate) fn add(&mut self, u: usize, v: usize) {
        debug_assert_eq!(self.hole(), Some((u, v)));
        self.row_to_col[u] = v as u16;
        self.col_to_row[v] = u as u16;
        self.hole = None;
    }

    /// Hole row `u`, hole column `z`; column `v` currently matched to row `w`.
    /// Moves `v` from `w` to `u`; the new hole is `(w, z)`.
    pub(crate) fn slide_column(&mut self, u: usize, v: usize) {
        let w = self.col_to_row[v];
        let (_, z) = self.hole.expect("slide needs a hole");
        self.row_to_col[u] = v as u16;
        self.col_to_row[v] = u as u16;
        self.row_to_col[w as usize] = FREE;
        self.hole = Some((w, z));
    }

    /// Hole column `v`, hole row `y`; row `u` currently matched to column `z`.
    /// Moves `u` from `z` to `v`; the new hole is `(y, z)`.
    pub(crate) fn slide_row(&mut self, u: usize, v: usize) {
        let z = self.row_to_col[u];
        let (y, _) = self.hole.expect("slide needs a hole");
        self.row_to_col[u] = v as u16;
        self.col_to_row[v] = u as u16;
        self.col_to_row[z as usize] = FREE;
        self.hole = Some((y, z));
    }

    /// Checks the internal maps against each other. Test helper.
    pub fn is_consistent(&self) -> bool {
        let n = self.n();
        let mut free_rows = 0;
        let mut free_cols = 0;
        for u in 0..n {
            match self.row_to_col[u] {
                FREE => free_rows += 1,
                c if (c as usize) < n && self.col_to_row[c as usize] == u as u16 => {}
                _ => return false,
            }
        }
        for v in 0..n {
            match self.col_to_row[v] {
                FREE => free_cols += 1,
                r if (r as usize) < n && self.row_to_col[r as usize] == v as u16 => {}
                _ => return false,
            }
        }
        match self.hole {
            None => free_rows == 0 && free_cols == 0,
            Some((u, v)) => {
                free_rows == 1
                    && free_cols == 1
                    && self.row_to_col[u as usize] == FREE
                    && self.col_to_row[v as usize] == FREE
            }
        }
    }
}
