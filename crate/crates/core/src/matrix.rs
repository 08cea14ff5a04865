//! Symmetric zero-diagonal matrices.
//!
//! Everything in this crate lives on hollow symmetric matrices: observed
//! adjacency matrices (binary), edge-probability matrices (entries in [0,1])
//! and CUSUM difference matrices (entries in [-1,1]). Only the strict upper
//! triangle is stored, so symmetry and the zero diagonal hold by construction.

use crate::error::{Error, Result};

/// Symmetric `n x n` matrix with zero diagonal, stored as the strict upper
/// triangle in row-major order.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix {
    n: usize,
    upper: Vec<f64>,
}

#[inline]
fn tri_len(n: usize) -> usize {
    n * (n - 1) / 2
}

impl SymMatrix {
    /// All-zero matrix (the empty graph).
    pub fn zeros(n: usize) -> Self {
        SymMatrix {
            n,
            upper: vec![0.0; tri_len(n)],
        }
    }

    /// Adjacency matrix of the complete graph.
    pub fn complete(n: usize) -> Self {
        SymMatrix {
            n,
            upper: vec![1.0; tri_len(n)],
        }
    }

    /// Constant off-diagonal value `c`, i.e. `c * (J - I)`.
    pub fn constant(n: usize, c: f64) -> Self {
        SymMatrix {
            n,
            upper: vec![c; tri_len(n)],
        }
    }

    /// Build from a function on upper-triangle index pairs `i < j`.
    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut upper = Vec::with_capacity(tri_len(n));
        for i in 0..n {
            for j in (i + 1)..n {
                upper.push(f(i, j));
            }
        }
        SymMatrix { n, upper }
    }

    /// Validate a full dense matrix (row-major rows) and take its upper
    /// triangle. Rejects non-square input, asymmetry and nonzero diagonals.
    pub fn from_dense(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::invalid(format!(
                    "matrix is not square: row {i} has {} entries, expected {n}",
                    row.len()
                )));
            }
            if rows[i][i] != 0.0 {
                return Err(Error::invalid(format!(
                    "nonzero diagonal entry at ({i},{i}): {}",
                    rows[i][i]
                )));
            }
            for j in (i + 1)..n {
                if rows[i][j] != rows[j][i] {
                    return Err(Error::invalid(format!(
                        "matrix is not symmetric at ({i},{j}): {} vs {}",
                        rows[i][j], rows[j][i]
                    )));
                }
            }
        }
        Ok(Self::from_fn(n, |i, j| rows[i][j]))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    fn tri_index(&self, i: usize, j: usize) -> usize {
        debug_assert!(i < j && j < self.n);
        // Offset of row i's strict upper part, then column offset.
        i * self.n - i * (i + 1) / 2 + (j - i - 1)
    }

    /// Entry `(i, j)`; the diagonal is identically zero.
    #[inline]
    pub fn entry(&self, i: usize, j: usize) -> f64 {
        if i == j {
            0.0
        } else if i < j {
            self.upper[self.tri_index(i, j)]
        } else {
            self.upper[self.tri_index(j, i)]
        }
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        assert!(i != j, "diagonal entries are fixed at zero");
        let idx = if i < j {
            self.tri_index(i, j)
        } else {
            self.tri_index(j, i)
        };
        self.upper[idx] = value;
    }

    /// Iterate over upper-triangle entries as `(i, j, value)`.
    pub fn iter_upper(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        let n = self.n;
        (0..n)
            .flat_map(move |i| ((i + 1)..n).map(move |j| (i, j)))
            .zip(self.upper.iter())
            .map(|((i, j), &v)| (i, j, v))
    }

    /// Raw upper-triangle storage, row-major `i < j`.
    pub(crate) fn upper_raw(&self) -> &[f64] {
        &self.upper
    }

    pub(crate) fn from_upper_raw(n: usize, upper: Vec<f64>) -> Self {
        assert_eq!(upper.len(), tri_len(n));
        SymMatrix { n, upper }
    }

    /// Row sums; for a binary matrix these are vertex degrees.
    pub fn row_sums(&self) -> Vec<f64> {
        let mut sums = vec![0.0; self.n];
        for (i, j, v) in self.iter_upper() {
            sums[i] += v;
            sums[j] += v;
        }
        sums
    }

    /// Largest entry (0.0 for n <= 1, since the diagonal is zero).
    pub fn max_entry(&self) -> f64 {
        self.upper.iter().fold(0.0_f64, |acc, &v| acc.max(v))
    }

    /// True when every entry is exactly 0 or 1.
    pub fn is_binary(&self) -> bool {
        self.upper.iter().all(|&v| v == 0.0 || v == 1.0)
    }

    /// True when every entry lies in `[lo, hi]`.
    pub fn entries_within(&self, lo: f64, hi: f64) -> bool {
        self.upper.iter().all(|&v| v >= lo && v <= hi)
    }

    /// Entrywise scaling by `c`.
    pub fn scaled(&self, c: f64) -> Self {
        SymMatrix {
            n: self.n,
            upper: self.upper.iter().map(|v| c * v).collect(),
        }
    }

    /// Entrywise difference `self - other`.
    pub fn sub(&self, other: &SymMatrix) -> Self {
        assert_eq!(self.n, other.n, "dimension mismatch");
        SymMatrix {
            n: self.n,
            upper: self
                .upper
                .iter()
                .zip(&other.upper)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }

    /// Frobenius norm, counting both triangles.
    pub fn frobenius_norm(&self) -> f64 {
        (2.0 * self.upper.iter().map(|v| v * v).sum::<f64>()).sqrt()
    }

    /// Copy with the given rows/columns zeroed out.
    pub fn masked(&self, zeroed: &[bool]) -> Self {
        assert_eq!(zeroed.len(), self.n);
        let mut out = self.clone();
        let mut idx = 0;
        for i in 0..self.n {
            for j in (i + 1)..self.n {
                if zeroed[i] || zeroed[j] {
                    out.upper[idx] = 0.0;
                }
                idx += 1;
            }
        }
        out
    }

    /// Apply a vertex relabeling: `out[p(i)][p(j)] = self[i][j]`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        assert_eq!(perm.len(), self.n);
        let mut out = SymMatrix::zeros(self.n);
        for (i, j, v) in self.iter_upper() {
            if v != 0.0 {
                out.set(perm[i], perm[j], v);
            }
        }
        out
    }

    /// Materialize the full dense matrix, row-major, length `n*n`.
    pub(crate) fn to_full(&self) -> Vec<f64> {
        let n = self.n;
        let mut full = vec![0.0; n * n];
        for (i, j, v) in self.iter_upper() {
            full[i * n + j] = v;
            full[j * n + i] = v;
        }
        full
    }
}
