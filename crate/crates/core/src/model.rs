//! Generative models for network sequences.
//!
//! A `ProbabilitySequence` is a piecewise-constant sequence of edge
//! probability matrices; its segment boundaries are the change points.
//! Observations are drawn edge-by-edge as independent Bernoulli variables
//! (`sample_mirgram`). `ground_truth` evaluates the three difficulty
//! functionals of an instance: cushion (minimum segment length), signal
//! (minimum spectral jump across a change point) and sparsity (maximum edge
//! probability), plus the population degree scales derived from them.
//!
//! `hard_instance_detect` and `hard_instance_localize` build the
//! rank-perturbed instances that sit near the detectability and
//! localizability boundaries: a flat density `rho` plus `alpha * rho` times
//! a (sum of) Rademacher outer product(s), diagonal zeroed.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::matrix::SymMatrix;
use crate::sequence::AdjacencySequence;
use crate::spectral::{spectral_norm, DEFAULT_SPECTRAL_TOL};

/// One constant block: edge probabilities `matrix` up to layer `end`
/// (exclusive boundary coordinate; the block covers layers `prev_end..end`).
#[derive(Debug, Clone, PartialEq)]
pub struct Segment {
    pub matrix: SymMatrix,
    pub end: usize,
}

/// Piecewise-constant sequence of edge-probability matrices.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbabilitySequence {
    n: usize,
    t_len: usize,
    segments: Vec<Segment>,
}

/// Difficulty functionals of a probability sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruth {
    /// Minimum gap between consecutive change points, boundaries included.
    pub cushion: usize,
    /// Minimum spectral norm of the jump across any change point (0 if none).
    pub signal: f64,
    /// Same minimum over Frobenius norms, reported for reference.
    pub signal_frobenius: f64,
    /// Largest edge probability anywhere in the sequence.
    pub sparsity: f64,
    /// `n * sparsity`, the worst-case expected degree scale.
    pub degree_bound: f64,
    /// Largest expected row sum over vertices and layers.
    pub max_expected_degree: f64,
}

/// Which end of the sequence carries the perturbed block in the
/// localizability construction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChangeSide {
    Early,
    Late,
}

impl ProbabilitySequence {
    /// Build from segments, validating boundaries and entry ranges.
    pub fn new(n: usize, t_len: usize, segments: Vec<Segment>) -> Result<Self> {
        if segments.is_empty() {
            return Err(Error::invalid("at least one segment is required"));
        }
        if t_len < 1 {
            return Err(Error::invalid("sequence length must be at least 1"));
        }
        let mut prev_end = 0usize;
        for (k, seg) in segments.iter().enumerate() {
            if seg.matrix.n() != n {
                return Err(Error::invalid(format!(
                    "segment {k} is on {} vertices, expected {n}",
                    seg.matrix.n()
                )));
            }
            if !seg.matrix.entries_within(0.0, 1.0) {
                return Err(Error::invalid(format!(
                    "segment {k} has probabilities outside [0, 1]"
                )));
            }
            if seg.end <= prev_end {
                return Err(Error::invalid(format!(
                    "segment boundaries must increase strictly: {} after {}",
                    seg.end, prev_end
                )));
            }
            if k > 0 && seg.matrix == segments[k - 1].matrix {
                return Err(Error::invalid(format!(
                    "segments {} and {k} have identical matrices; merge them",
                    k - 1
                )));
            }
            prev_end = seg.end;
        }
        if prev_end != t_len {
            return Err(Error::invalid(format!(
                "last segment ends at {prev_end}, expected T = {t_len}"
            )));
        }
        Ok(ProbabilitySequence {
            n,
            t_len,
            segments,
        })
    }

    /// A single constant block (no change points).
    pub fn constant(t_len: usize, matrix: SymMatrix) -> Result<Self> {
        let n = matrix.n();
        Self::new(n, t_len, vec![Segment { matrix, end: t_len }])
    }

    /// Piecewise homogeneous blocks: `(end, rho)` pairs, each block a
    /// constant off-diagonal density `rho`.
    pub fn piecewise_er(n: usize, blocks: &[(usize, f64)]) -> Result<Self> {
        let t_len = blocks.last().map(|b| b.0).unwrap_or(0);
        let segments = blocks
            .iter()
            .map(|&(end, rho)| Segment {
                matrix: SymMatrix::constant(n, rho),
                end,
            })
            .collect();
        Self::new(n, t_len, segments)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn t_len(&self) -> usize {
        self.t_len
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    /// Number of change points `K`.
    pub fn num_change_points(&self) -> usize {
        self.segments.len() - 1
    }

    /// Change point locations: the layer count before each jump.
    pub fn change_points(&self) -> Vec<usize> {
        self.segments[..self.segments.len() - 1]
            .iter()
            .map(|s| s.end)
            .collect()
    }

    /// Probability matrix governing layer `t` (0-based).
    pub fn layer_matrix(&self, t: usize) -> &SymMatrix {
        assert!(t < self.t_len);
        let idx = self
            .segments
            .partition_point(|s| s.end <= t)
            .min(self.segments.len() - 1);
        &self.segments[idx].matrix
    }

    /// Entrywise scaling by `c` in (0, 1]; cushion is untouched while signal
    /// and sparsity scale linearly.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        if !(c > 0.0 && c <= 1.0) {
            return Err(Error::invalid(format!("scale must lie in (0, 1], got {c}")));
        }
        let segments = self
            .segments
            .iter()
            .map(|s| Segment {
                matrix: s.matrix.scaled(c),
                end: s.end,
            })
            .collect();
        Self::new(self.n, self.t_len, segments)
    }
}

/// Evaluate the difficulty functionals of `q`.
pub fn ground_truth(q: &ProbabilitySequence) -> Result<GroundTruth> {
    let mut cushion = usize::MAX;
    let mut prev_end = 0usize;
    for seg in q.segments() {
        cushion = cushion.min(seg.end - prev_end);
        prev_end = seg.end;
    }

    let mut signal = 0.0_f64;
    let mut signal_frobenius = 0.0_f64;
    if q.num_change_points() > 0 {
        signal = f64::INFINITY;
        signal_frobenius = f64::INFINITY;
        for pair in q.segments().windows(2) {
            let jump = pair[1].matrix.sub(&pair[0].matrix);
            signal = signal.min(spectral_norm(&jump, DEFAULT_SPECTRAL_TOL)?);
            signal_frobenius = signal_frobenius.min(jump.frobenius_norm());
        }
    }

    let sparsity = q
        .segments()
        .iter()
        .fold(0.0_f64, |acc, s| acc.max(s.matrix.max_entry()));
    let max_expected_degree = q.segments().iter().fold(0.0_f64, |acc, s| {
        s.matrix.row_sums().into_iter().fold(acc, f64::max)
    });

    Ok(GroundTruth {
        cushion,
        signal,
        signal_frobenius,
        sparsity,
        degree_bound: q.n() as f64 * sparsity,
        max_expected_degree,
    })
}

/// Draw one observed sequence: independent `Ber(P^(t)_ij)` for `i < j`,
/// mirrored to the lower triangle, zero diagonal. Deterministic in `seed`.
pub fn sample_mirgram(q: &ProbabilitySequence, seed: u64) -> AdjacencySequence {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let layers: Vec<SymMatrix> = (0..q.t_len())
        .map(|t| {
            let p = q.layer_matrix(t);
            SymMatrix::from_fn(q.n(), |i, j| {
                if rng.random::<f64>() < p.entry(i, j) {
                    1.0
                } else {
                    0.0
                }
            })
        })
        .collect();
    AdjacencySequence::new(layers).expect("sampled layers are binary by construction")
}

fn rademacher_vector(n: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    (0..n)
        .map(|_| if rng.random::<f64>() < 0.5 { -1.0 } else { 1.0 })
        .collect()
}

fn check_probability(value: f64, alpha: f64, rho: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&value) {
        return Err(Error::invalid(format!(
            "perturbed entry {value} escapes [0, 1] for (alpha, rho) = ({alpha}, {rho})"
        )));
    }
    Ok(())
}

/// Detectability lower-bound instance: `kappa` layers of
/// `rho (1 + alpha U U^T)` off-diagonal (U Rademacher), then `T - kappa`
/// layers of flat density `rho`. `alpha = 0` collapses to a constant
/// sequence with no change point.
pub fn hard_instance_detect(
    n: usize,
    t_len: usize,
    kappa: usize,
    rho: f64,
    alpha: f64,
    seed: u64,
) -> Result<ProbabilitySequence> {
    if !(rho > 0.0 && rho < 1.0) {
        return Err(Error::invalid(format!("rho must lie in (0, 1), got {rho}")));
    }
    if !(alpha >= 0.0) {
        return Err(Error::invalid(format!(
            "alpha must be nonnegative, got {alpha}"
        )));
    }
    let base = SymMatrix::constant(n, rho);
    if alpha == 0.0 {
        return ProbabilitySequence::constant(t_len, base);
    }
    if kappa < 1 || kappa >= t_len {
        return Err(Error::invalid(format!(
            "kappa must satisfy 1 <= kappa < T, got kappa={kappa}, T={t_len}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let u = rademacher_vector(n, &mut rng);
    let perturbed = SymMatrix::from_fn(n, |i, j| rho * (1.0 + alpha * u[i] * u[j]));
    check_probability(rho * (1.0 + alpha), alpha, rho)?;
    check_probability(rho * (1.0 - alpha), alpha, rho)?;
    ProbabilitySequence::new(
        n,
        t_len,
        vec![
            Segment {
                matrix: perturbed,
                end: kappa,
            },
            Segment {
                matrix: base,
                end: t_len,
            },
        ],
    )
}

/// Localizability lower-bound instance: rank-`r` perturbation
/// `rho (1 + alpha * sum_i 3^-i U_i U_i^T)` placed either on the first
/// `kappa` layers (`Early`, change at `kappa`) or the last `kappa` layers
/// (`Late`, change at `T - kappa`).
///
/// The Rademacher vectors are redrawn (up to 100 attempts) until they are
/// linearly independent, so the perturbation has exact rank `r`.
pub fn hard_instance_localize(
    n: usize,
    t_len: usize,
    kappa: usize,
    rho: f64,
    alpha: f64,
    r: usize,
    side: ChangeSide,
    seed: u64,
) -> Result<ProbabilitySequence> {
    if !(rho > 0.0 && rho < 1.0) {
        return Err(Error::invalid(format!("rho must lie in (0, 1), got {rho}")));
    }
    if !(alpha >= 0.0) {
        return Err(Error::invalid(format!(
            "alpha must be nonnegative, got {alpha}"
        )));
    }
    if r < 1 || r > n {
        return Err(Error::invalid(format!(
            "rank must satisfy 1 <= r <= n, got r={r}, n={n}"
        )));
    }
    let base = SymMatrix::constant(n, rho);
    if alpha == 0.0 {
        return ProbabilitySequence::constant(t_len, base);
    }
    if kappa < 1 || kappa >= t_len {
        return Err(Error::invalid(format!(
            "kappa must satisfy 1 <= kappa < T, got kappa={kappa}, T={t_len}"
        )));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut vectors: Option<Vec<Vec<f64>>> = None;
    for _ in 0..100 {
        let candidate: Vec<Vec<f64>> = (0..r).map(|_| rademacher_vector(n, &mut rng)).collect();
        if sign_vectors_independent(&candidate) {
            vectors = Some(candidate);
            break;
        }
    }
    let vectors = vectors.ok_or_else(|| {
        Error::invalid(format!(
            "failed to draw {r} independent sign vectors on {n} vertices in 100 attempts"
        ))
    })?;

    let mut lowest = f64::INFINITY;
    let mut highest = f64::NEG_INFINITY;
    let perturbed = SymMatrix::from_fn(n, |i, j| {
        let gamma: f64 = vectors
            .iter()
            .enumerate()
            .map(|(k, u)| 3.0_f64.powi(-(k as i32 + 1)) * u[i] * u[j])
            .sum();
        let p = rho * (1.0 + alpha * gamma);
        lowest = lowest.min(p);
        highest = highest.max(p);
        p
    });
    check_probability(lowest, alpha, rho)?;
    check_probability(highest, alpha, rho)?;

    let tau = match side {
        ChangeSide::Early => kappa,
        ChangeSide::Late => t_len - kappa,
    };
    let (first, second) = match side {
        ChangeSide::Early => (perturbed, base),
        ChangeSide::Late => (base, perturbed),
    };
    ProbabilitySequence::new(
        n,
        t_len,
        vec![
            Segment {
                matrix: first,
                end: tau,
            },
            Segment {
                matrix: second,
                end: t_len,
            },
        ],
    )
}

/// Rank check via Gaussian elimination on the n x r sign matrix.
fn sign_vectors_independent(vectors: &[Vec<f64>]) -> bool {
    let r = vectors.len();
    if r == 0 {
        return true;
    }
    let n = vectors[0].len();
    if r > n {
        return false;
    }
    let mut cols: Vec<Vec<f64>> = vectors.to_vec();
    let tol = 1e-8 * n as f64;
    let mut rank = 0;
    for pivot_col in 0..r {
        // Find the largest remaining entry in this column.
        let mut best_row = None;
        let mut best_val = tol;
        for row in rank..n {
            if cols[pivot_col][row].abs() > best_val {
                best_val = cols[pivot_col][row].abs();
                best_row = Some(row);
            }
        }
        let Some(best_row) = best_row else {
            return false;
        };
        for col in cols.iter_mut() {
            col.swap(rank, best_row);
        }
        let pivot = cols[pivot_col][rank];
        for col in (pivot_col + 1)..r {
            let factor = cols[col][rank] / pivot;
            for row in rank..n {
                let sub = factor * cols[pivot_col][row];
                cols[col][row] -= sub;
            }
        }
        rank += 1;
    }
    rank == r
}
