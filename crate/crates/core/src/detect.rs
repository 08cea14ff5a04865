//! The two detection procedures.
//!
//! `detect_window` sweeps window lengths `kappa, kappa-1, ..., lambda_min`
//! over a deterministic grid of overlapping intervals (stride `floor(L/3)`),
//! trims per interval, scans the middle third of each interval for the peak
//! CUSUM norm and thresholds it. Detections of the same change point across
//! windows and overlapping intervals are merged, preferring the smallest
//! window in which the detection persists.
//!
//! `detect_wbs` draws a pool of `M` random intervals once, then recursively
//! splits the sequence: within the current segment every pool interval of
//! length at least `kappa` is scanned, the best above-threshold candidate is
//! recorded as a change point and the recursion continues strictly left and
//! right of it.
//!
//! Both detectors are deterministic given the configuration seed and
//! parallelize their per-interval scans; results are collected in a fixed
//! order so worker count never changes the output.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::sequence::{trim_mask, AdjacencySequence, LayerPrefix};
use crate::stats::{branch_epsilon_eta, gamma_count, scan_prefix, threshold_base};
use crate::spectral::DEFAULT_SPECTRAL_TOL;

/// How an interval set was constructed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IntervalKind {
    DeterministicGrid,
    RandomWbs,
}

/// A collection of scan intervals in boundary coordinates: an interval
/// `(start, end)` covers layers `start..end`.
#[derive(Debug, Clone, PartialEq)]
pub struct IntervalSet {
    pub intervals: Vec<(usize, usize)>,
    /// Nominal window length (grid) or cushion (random pool).
    pub window: usize,
    pub kind: IntervalKind,
}

/// Which detection procedure produced a report.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Algorithm {
    Window,
    Wbs,
}

impl Algorithm {
    pub fn as_str(&self) -> &'static str {
        match self {
            Algorithm::Window => "window",
            Algorithm::Wbs => "wbs",
        }
    }
}

/// Every tunable of the two detectors.
#[derive(Debug, Clone, PartialEq)]
pub struct DetectorConfig {
    /// Cushion: largest window for the sweep, minimum segment length for WBS.
    pub kappa: usize,
    /// Smallest window length in the sweep (Algorithm 1 runs kappa down to 3).
    pub lambda_min: usize,
    /// Normalization constant entering the trimming count.
    pub mu: f64,
    /// Threshold exponent parameter.
    pub zeta: f64,
    /// Threshold calibration constant.
    pub theta_mu: f64,
    /// Pool size M for wild binary segmentation.
    pub num_random_intervals: usize,
    /// Seed for all randomness (WBS interval draws).
    pub seed: u64,
    /// Relative tolerance of the spectral-norm iteration.
    pub spectral_tol: f64,
    /// Compute trimming degrees over all layers instead of per interval.
    pub global_trim_degrees: bool,
}

impl DetectorConfig {
    pub fn new(kappa: usize) -> Self {
        DetectorConfig {
            kappa,
            lambda_min: 3,
            mu: 1.0,
            zeta: 1.0,
            theta_mu: 1.0,
            num_random_intervals: 100,
            seed: 0,
            spectral_tol: DEFAULT_SPECTRAL_TOL,
            global_trim_degrees: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.lambda_min < 3 {
            return Err(Error::Config(format!(
                "lambda_min must be at least 3, got {}",
                self.lambda_min
            )));
        }
        if self.kappa < self.lambda_min {
            return Err(Error::Config(format!(
                "kappa ({}) must be at least lambda_min ({})",
                self.kappa, self.lambda_min
            )));
        }
        if !(self.mu > 0.0) {
            return Err(Error::Config(format!("mu must be positive, got {}", self.mu)));
        }
        if !(self.zeta > 0.0) {
            return Err(Error::Config(format!(
                "zeta must be positive, got {}",
                self.zeta
            )));
        }
        if !(self.theta_mu >= 0.0) {
            return Err(Error::Config(format!(
                "theta_mu must be nonnegative, got {}",
                self.theta_mu
            )));
        }
        if self.num_random_intervals < 1 {
            return Err(Error::Config("M must be at least 1".into()));
        }
        if !(self.spectral_tol > 0.0) {
            return Err(Error::Config(format!(
                "spectral_tol must be positive, got {}",
                self.spectral_tol
            )));
        }
        Ok(())
    }
}

/// One accepted change point.
#[derive(Debug, Clone, PartialEq)]
pub struct Detection {
    /// Estimated change point: layers `1..=tau_hat` precede the jump.
    pub tau_hat: usize,
    /// Window length at which it was found (the cushion for WBS).
    pub window: usize,
    /// Scan interval `(start, end]` that produced it.
    pub interval: (usize, usize),
    /// Peak CUSUM spectral norm.
    pub stat: f64,
    /// Threshold it cleared.
    pub threshold: f64,
}

/// Detector output: merged detections sorted by location.
#[derive(Debug, Clone, PartialEq)]
pub struct DetectionReport {
    pub algorithm: Algorithm,
    pub detections: Vec<Detection>,
    pub estimated_k: usize,
    pub config: DetectorConfig,
}

/// The deterministic interval grid for window length `lambda`:
/// starts `(l-1) * floor(lambda/3)` for `l = 1..=ceil(3T/lambda) - 2`,
/// each interval capped at `T`.
pub fn build_grid(t_len: usize, lambda: usize) -> Result<IntervalSet> {
    if lambda < 3 || lambda > t_len {
        return Err(Error::invalid(format!(
            "window length must satisfy 3 <= lambda <= T, got lambda={lambda}, T={t_len}"
        )));
    }
    let stride = lambda / 3;
    let count = (3 * t_len).div_ceil(lambda) - 2;
    let intervals = (0..count)
        .map(|l| {
            let start = l * stride;
            (start, (start + lambda).min(t_len))
        })
        .collect();
    Ok(IntervalSet {
        intervals,
        window: lambda,
        kind: IntervalKind::DeterministicGrid,
    })
}

/// One scanned grid cell: interval plus its peak statistic and the
/// threshold base (threshold = theta_mu * base).
#[derive(Debug, Clone)]
pub(crate) struct RawScan {
    pub window: usize,
    pub interval: (usize, usize),
    pub tau_hat: usize,
    pub stat: f64,
    pub base: f64,
}

/// Scan every (window, interval) cell of the sweep without thresholding.
pub(crate) fn window_scan(seq: &AdjacencySequence, cfg: &DetectorConfig) -> Result<Vec<RawScan>> {
    cfg.validate()?;
    let n = seq.n();
    let t_len = seq.t_len();
    if n < 3 {
        return Err(Error::invalid(format!("need at least 3 vertices, got {n}")));
    }
    if t_len < 3 {
        return Err(Error::invalid(format!("need at least 3 layers, got {t_len}")));
    }

    let prefix = seq.prefix();
    let d_bar = prefix.mean_degree(0, t_len);
    let global_degrees = prefix.row_sums(0, t_len);

    // One job per (window, interval) pair; order fixes the output order.
    struct Job {
        lambda: usize,
        gamma: usize,
        base: f64,
        interval: (usize, usize),
    }
    let mut jobs = Vec::new();
    for lambda in (cfg.lambda_min..=cfg.kappa).rev() {
        if lambda > t_len {
            continue;
        }
        let grid = build_grid(t_len, lambda)?;
        let pool_size = grid.intervals.len();
        let (epsilon, _) = branch_epsilon_eta(n, pool_size);
        let gamma = gamma_count(cfg.mu, n, pool_size, lambda, d_bar, epsilon)?;
        let base = threshold_base(cfg.zeta, d_bar, lambda, pool_size, n);
        for interval in grid.intervals {
            jobs.push(Job {
                lambda,
                gamma,
                base,
                interval,
            });
        }
    }

    jobs.par_iter()
        .map(|job| {
            let (start, end) = job.interval;
            let degrees = if cfg.global_trim_degrees {
                global_degrees.clone()
            } else {
                prefix.row_sums(start, end)
            };
            let mask = trim_mask(&degrees, job.gamma);
            let cushion = job.lambda / 3;
            let (u_rel, stat) =
                scan_prefix(&prefix, start, end, cushion, Some(&mask), cfg.spectral_tol)?;
            Ok(RawScan {
                window: job.lambda,
                interval: job.interval,
                tau_hat: start + u_rel,
                stat,
                base: job.base,
            })
        })
        .collect()
}

/// Window-based detection: sweep, threshold, merge.
pub fn detect_window(seq: &AdjacencySequence, cfg: &DetectorConfig) -> Result<DetectionReport> {
    let raw = window_scan(seq, cfg)?;
    let over: Vec<Detection> = raw
        .into_iter()
        .filter(|r| r.stat > cfg.theta_mu * r.base)
        .map(|r| Detection {
            tau_hat: r.tau_hat,
            window: r.window,
            interval: r.interval,
            stat: r.stat,
            threshold: cfg.theta_mu * r.base,
        })
        .collect();
    let merged = merge_detections(over, cfg.lambda_min / 3);
    Ok(DetectionReport {
        algorithm: Algorithm::Window,
        estimated_k: merged.len(),
        detections: merged,
        config: cfg.clone(),
    })
}

/// Collapse detections of the same physical change point: any two detections
/// within `proximity` layers of each other share a cluster, and the cluster
/// is represented by its smallest-window detection, ties broken by the
/// largest stat-to-threshold ratio. Output is sorted by location.
pub fn merge_detections(mut raw: Vec<Detection>, proximity: usize) -> Vec<Detection> {
    if raw.is_empty() {
        return raw;
    }
    raw.sort_by(|a, b| {
        a.tau_hat
            .cmp(&b.tau_hat)
            .then(a.window.cmp(&b.window))
            .then(a.interval.cmp(&b.interval))
    });
    let mut merged: Vec<Detection> = Vec::new();
    let mut cluster: Vec<Detection> = vec![raw[0].clone()];
    let flush = |cluster: &[Detection], merged: &mut Vec<Detection>| {
        let best = cluster
            .iter()
            .min_by(|a, b| {
                a.window
                    .cmp(&b.window)
                    .then(ratio(b).partial_cmp(&ratio(a)).expect("ratios are ordered"))
            })
            .expect("cluster is never empty");
        merged.push(best.clone());
    };
    for det in raw.into_iter().skip(1) {
        let last_tau = cluster.last().expect("nonempty").tau_hat;
        if det.tau_hat - last_tau <= proximity {
            cluster.push(det);
        } else {
            flush(&cluster, &mut merged);
            cluster = vec![det];
        }
    }
    flush(&cluster, &mut merged);
    merged.sort_by_key(|d| d.tau_hat);
    merged
}

fn ratio(d: &Detection) -> f64 {
    if d.threshold > 0.0 {
        d.stat / d.threshold
    } else if d.stat > 0.0 {
        f64::INFINITY
    } else {
        0.0
    }
}

/// The random interval pool: endpoints drawn uniformly (with replacement)
/// from `1..=T`, rejecting pairs until `e > s`.
pub fn draw_wbs_pool(t_len: usize, count: usize, seed: u64) -> IntervalSet {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut intervals = Vec::with_capacity(count);
    while intervals.len() < count {
        let s = rng.random_range(1..=t_len);
        let e = rng.random_range(1..=t_len);
        if e > s {
            intervals.push((s, e));
        }
    }
    IntervalSet {
        intervals,
        window: 0,
        kind: IntervalKind::RandomWbs,
    }
}

/// One scanned pool interval within the current recursion segment.
#[derive(Debug, Clone)]
pub(crate) struct WbsScan {
    pub interval: (usize, usize),
    pub tau_hat: usize,
    pub stat: f64,
    pub base: f64,
}

struct WbsContext<'a> {
    prefix: &'a LayerPrefix,
    pool: &'a [(usize, usize)],
    cfg: &'a DetectorConfig,
    n: usize,
    epsilon: f64,
    global_degrees: Vec<f64>,
    global_d_bar: f64,
}

/// Scan every pool interval `[s_m, e_m]` contained in `[s, e]` with length
/// at least kappa. Interval `(s_m, e_m]` covers layers `s_m..e_m` (0-based),
/// the scan range is `(s_m + floor(kappa/3), e_m - floor(kappa/3)]`, and the
/// threshold uses the interval's own mean degree with window `kappa` and the
/// full pool size `M`.
fn wbs_level_scan(ctx: &WbsContext, s: usize, e: usize) -> Result<Vec<WbsScan>> {
    let cfg = ctx.cfg;
    let kappa = cfg.kappa;
    let eligible: Vec<(usize, usize)> = ctx
        .pool
        .iter()
        .copied()
        .filter(|&(sm, em)| sm >= s && em <= e && em - sm >= kappa)
        .collect();
    let m_total = cfg.num_random_intervals;
    eligible
        .par_iter()
        .map(|&(sm, em)| {
            let (degrees, d_bar) = if cfg.global_trim_degrees {
                (ctx.global_degrees.clone(), ctx.global_d_bar)
            } else {
                (
                    ctx.prefix.row_sums(sm, em),
                    ctx.prefix.mean_degree(sm, em),
                )
            };
            let gamma = gamma_count(cfg.mu, ctx.n, m_total, kappa, d_bar, ctx.epsilon)?;
            let mask = trim_mask(&degrees, gamma);
            let cushion = kappa / 3;
            let (u_rel, stat) =
                scan_prefix(ctx.prefix, sm, em, cushion, Some(&mask), cfg.spectral_tol)?;
            Ok(WbsScan {
                interval: (sm, em),
                tau_hat: sm + u_rel,
                stat,
                base: threshold_base(cfg.zeta, d_bar, kappa, m_total, ctx.n),
            })
        })
        .collect()
}

fn wbs_recurse(ctx: &WbsContext, s: usize, e: usize, out: &mut Vec<Detection>) -> Result<()> {
    if e <= s || e - s < ctx.cfg.kappa {
        return Ok(());
    }
    let scans = wbs_level_scan(ctx, s, e)?;
    let theta = ctx.cfg.theta_mu;
    let mut best: Option<&WbsScan> = None;
    for scan in scans.iter().filter(|c| c.stat > theta * c.base) {
        if best.map_or(true, |b| scan.stat > b.stat) {
            best = Some(scan);
        }
    }
    let Some(best) = best else {
        return Ok(());
    };
    let u0 = best.tau_hat;
    out.push(Detection {
        tau_hat: u0,
        window: ctx.cfg.kappa,
        interval: best.interval,
        stat: best.stat,
        threshold: theta * best.base,
    });
    wbs_recurse(ctx, s, u0, out)?;
    wbs_recurse(ctx, u0 + 1, e, out)
}

/// Wild binary segmentation over a seeded random interval pool.
pub fn detect_wbs(seq: &AdjacencySequence, cfg: &DetectorConfig) -> Result<DetectionReport> {
    cfg.validate()?;
    let n = seq.n();
    let t_len = seq.t_len();
    if n < 3 {
        return Err(Error::invalid(format!("need at least 3 vertices, got {n}")));
    }
    if t_len < 3 {
        return Err(Error::invalid(format!("need at least 3 layers, got {t_len}")));
    }
    let prefix = seq.prefix();
    let pool = draw_wbs_pool(t_len, cfg.num_random_intervals, cfg.seed);
    let (epsilon, _) = branch_epsilon_eta(n, cfg.num_random_intervals);
    let ctx = WbsContext {
        prefix: &prefix,
        pool: &pool.intervals,
        cfg,
        n,
        epsilon,
        global_degrees: prefix.row_sums(0, t_len),
        global_d_bar: prefix.mean_degree(0, t_len),
    };
    let mut detections = Vec::new();
    wbs_recurse(&ctx, 1, t_len, &mut detections)?;
    detections.sort_by_key(|d| d.tau_hat);
    Ok(DetectionReport {
        algorithm: Algorithm::Wbs,
        estimated_k: detections.len(),
        detections,
        config: cfg.clone(),
    })
}

/// Largest stat-to-base ratio over the whole sweep: the window detector
/// reports at least one change point exactly when `theta_mu` is below this.
pub(crate) fn window_critical_ratio(seq: &AdjacencySequence, cfg: &DetectorConfig) -> Result<f64> {
    let raw = window_scan(seq, cfg)?;
    Ok(raw
        .iter()
        .map(|r| ratio_parts(r.stat, r.base))
        .fold(0.0, f64::max))
}

/// Same for WBS: whether any change point is reported at all is decided by
/// the top-level pass over the pool.
pub(crate) fn wbs_critical_ratio(seq: &AdjacencySequence, cfg: &DetectorConfig) -> Result<f64> {
    cfg.validate()?;
    let t_len = seq.t_len();
    if seq.n() < 3 || t_len < 3 {
        return Err(Error::invalid("need at least 3 vertices and 3 layers".to_string()));
    }
    let prefix = seq.prefix();
    let pool = draw_wbs_pool(t_len, cfg.num_random_intervals, cfg.seed);
    let (epsilon, _) = branch_epsilon_eta(seq.n(), cfg.num_random_intervals);
    let ctx = WbsContext {
        prefix: &prefix,
        pool: &pool.intervals,
        cfg,
        n: seq.n(),
        epsilon,
        global_degrees: prefix.row_sums(0, t_len),
        global_d_bar: prefix.mean_degree(0, t_len),
    };
    if t_len - 1 < cfg.kappa {
        return Ok(0.0);
    }
    let scans = wbs_level_scan(&ctx, 1, t_len)?;
    Ok(scans
        .iter()
        .map(|c| ratio_parts(c.stat, c.base))
        .fold(0.0, f64::max))
}

fn ratio_parts(stat: f64, base: f64) -> f64 {
    if base > 0.0 {
        stat / base
    } else if stat > 0.0 {
        f64::INFINITY
    } else {
        0.0
    }
}
