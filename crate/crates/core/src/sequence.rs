//! Sequences of network snapshots on a shared vertex set.
//!
//! A sequence holds `T` symmetric zero-diagonal layers; observed data is
//! binary, while averaged or synthetic layers may carry fractional values in
//! [0, 1]. Degree statistics and high-degree trimming both operate on a layer
//! range so detectors can work per scan interval.

use std::ops::Range;

use crate::error::{Error, Result};
use crate::matrix::SymMatrix;

/// Ordered layers `A^(1), ..., A^(T)` on `n` shared vertices.
#[derive(Debug, Clone, PartialEq)]
pub struct AdjacencySequence {
    n: usize,
    layers: Vec<SymMatrix>,
}

/// Time-averaged degree statistics over a layer range.
///
/// `global_mean` is the average over *ordered* vertex pairs (each edge counts
/// toward both endpoints), so a complete layer on `n` vertices has mean
/// `n - 1`. `normalized` divides by `1 + sqrt(4 mu)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DegreeProfile {
    pub per_vertex: Vec<f64>,
    pub global_mean: f64,
    pub normalized: f64,
}

impl AdjacencySequence {
    /// Build from layers, validating shared dimension and entry range.
    pub fn new(layers: Vec<SymMatrix>) -> Result<Self> {
        if layers.is_empty() {
            return Err(Error::invalid("a sequence needs at least one layer"));
        }
        let n = layers[0].n();
        for (t, layer) in layers.iter().enumerate() {
            if layer.n() != n {
                return Err(Error::invalid(format!(
                    "layer {t} has {} vertices, expected {n}",
                    layer.n()
                )));
            }
            if !layer.entries_within(0.0, 1.0) {
                return Err(Error::invalid(format!(
                    "layer {t} has entries outside [0, 1]"
                )));
            }
        }
        Ok(AdjacencySequence { n, layers })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of layers `T`.
    pub fn t_len(&self) -> usize {
        self.layers.len()
    }

    pub fn layer(&self, t: usize) -> &SymMatrix {
        &self.layers[t]
    }

    pub fn layers(&self) -> &[SymMatrix] {
        &self.layers
    }

    /// True when every layer is 0/1-valued (observed data).
    pub fn is_binary(&self) -> bool {
        self.layers.iter().all(|l| l.is_binary())
    }

    /// Clone of the sub-sequence over `range`.
    pub fn restricted(&self, range: Range<usize>) -> Result<Self> {
        self.check_range(&range)?;
        Ok(AdjacencySequence {
            n: self.n,
            layers: self.layers[range].to_vec(),
        })
    }

    /// Relabel vertices in every layer.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        AdjacencySequence {
            n: self.n,
            layers: self.layers.iter().map(|l| l.permuted(perm)).collect(),
        }
    }

    fn check_range(&self, range: &Range<usize>) -> Result<()> {
        if range.is_empty() {
            return Err(Error::invalid("layer range is empty"));
        }
        if range.end > self.t_len() {
            return Err(Error::invalid(format!(
                "layer range {}..{} exceeds T = {}",
                range.start,
                range.end,
                self.t_len()
            )));
        }
        Ok(())
    }

    /// Row sums accumulated over `range` (not yet divided by its length).
    pub(crate) fn range_row_sums(&self, range: Range<usize>) -> Vec<f64> {
        let mut sums = vec![0.0; self.n];
        for layer in &self.layers[range] {
            for (i, j, v) in layer.iter_upper() {
                sums[i] += v;
                sums[j] += v;
            }
        }
        sums
    }

    /// Prefix sums over layers for O(1) interval aggregation.
    pub(crate) fn prefix(&self) -> LayerPrefix {
        LayerPrefix::build(self)
    }
}

/// Sample degree statistics over a layer range.
///
/// `per_vertex[i]` averages vertex i's degree over the range; `global_mean`
/// is the grand mean over ordered pairs, equal to the vertex average.
pub fn degree_profile(
    seq: &AdjacencySequence,
    layer_range: Range<usize>,
    mu: f64,
) -> Result<DegreeProfile> {
    seq.check_range(&layer_range)?;
    if !(mu > 0.0) {
        return Err(Error::invalid(format!("mu must be positive, got {mu}")));
    }
    let len = layer_range.len() as f64;
    let per_vertex: Vec<f64> = seq
        .range_row_sums(layer_range)
        .into_iter()
        .map(|s| s / len)
        .collect();
    let global_mean = per_vertex.iter().sum::<f64>() / seq.n() as f64;
    Ok(DegreeProfile {
        global_mean,
        normalized: global_mean / (1.0 + (4.0 * mu).sqrt()),
        per_vertex,
    })
}

/// Zero out the rows and columns of the `gamma` highest-degree vertices,
/// with degrees taken over `layer_range`.
///
/// Vertex indexing is preserved (zeroing, not deletion) so matrices from
/// different intervals stay dimension-compatible. Ties at the degree order
/// statistic are broken toward the lower vertex index.
pub fn trim(
    seq: &AdjacencySequence,
    layer_range: Range<usize>,
    gamma: usize,
) -> Result<AdjacencySequence> {
    seq.check_range(&layer_range)?;
    if gamma > seq.n() {
        return Err(Error::invalid(format!(
            "cannot trim {gamma} of {} vertices",
            seq.n()
        )));
    }
    let sums = seq.range_row_sums(layer_range.clone());
    let mask = trim_mask(&sums, gamma);
    let layers = seq.layers[layer_range]
        .iter()
        .map(|l| l.masked(&mask))
        .collect();
    Ok(AdjacencySequence {
        n: seq.n(),
        layers,
    })
}

/// Indices of the `gamma` highest-degree vertices (degree desc, index asc).
pub(crate) fn highest_degree_vertices(row_sums: &[f64], gamma: usize) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..row_sums.len()).collect();
    idx.sort_by(|&a, &b| {
        row_sums[b]
            .partial_cmp(&row_sums[a])
            .expect("degree sums are finite")
            .then(a.cmp(&b))
    });
    idx.truncate(gamma);
    idx
}

/// Boolean mask form of `highest_degree_vertices`.
pub(crate) fn trim_mask(row_sums: &[f64], gamma: usize) -> Vec<bool> {
    let mut mask = vec![false; row_sums.len()];
    for v in highest_degree_vertices(row_sums, gamma) {
        mask[v] = true;
    }
    mask
}

/// Per-layer prefix sums of the upper triangle and of row sums.
///
/// Entries of binary layers are small integers, so prefix differences are
/// exact and bit-identical to direct summation over the same layers.
pub(crate) struct LayerPrefix {
    n: usize,
    t_len: usize,
    /// `upper[t]` = sum of layers `0..t`, packed upper triangle.
    upper: Vec<Vec<f64>>,
    /// `rows[t][i]` = row sum of vertex i over layers `0..t`.
    rows: Vec<Vec<f64>>,
}

impl LayerPrefix {
    fn build(seq: &AdjacencySequence) -> Self {
        let n = seq.n();
        let t_len = seq.t_len();
        let tri = n * (n - 1) / 2;
        let mut upper = Vec::with_capacity(t_len + 1);
        let mut rows = Vec::with_capacity(t_len + 1);
        upper.push(vec![0.0; tri]);
        rows.push(vec![0.0; n]);
        for t in 0..t_len {
            let mut acc = upper[t].clone();
            for (a, v) in acc.iter_mut().zip(seq.layer(t).upper_raw()) {
                *a += v;
            }
            let mut row_acc = rows[t].clone();
            for (i, j, v) in seq.layer(t).iter_upper() {
                row_acc[i] += v;
                row_acc[j] += v;
            }
            upper.push(acc);
            rows.push(row_acc);
        }
        LayerPrefix {
            n,
            t_len,
            upper,
            rows,
        }
    }

    pub(crate) fn n(&self) -> usize {
        self.n
    }

    pub(crate) fn t_len(&self) -> usize {
        self.t_len
    }

    pub(crate) fn upper_at(&self, t: usize) -> &[f64] {
        &self.upper[t]
    }

    /// Accumulated row sums over layers `a..b`.
    pub(crate) fn row_sums(&self, a: usize, b: usize) -> Vec<f64> {
        (0..self.n)
            .map(|i| self.rows[b][i] - self.rows[a][i])
            .collect()
    }

    /// Mean degree over ordered pairs for layers `a..b`.
    pub(crate) fn mean_degree(&self, a: usize, b: usize) -> f64 {
        let total: f64 = (0..self.n)
            .map(|i| self.rows[b][i] - self.rows[a][i])
            .sum();
        total / (self.n as f64 * (b - a) as f64)
    }
}
