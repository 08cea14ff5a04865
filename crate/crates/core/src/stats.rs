//! Scalar and matrix statistics driving the detectors.
//!
//! The pieces, in the order they feed one another:
//!
//! * `phi` / `phi_inverse`: the convex rate function `phi(z) = z ln z - z + 1`
//!   and its monotone inverse on [1, inf).
//! * `psi_triple`: the (epsilon, Psi, eta) triple; the branch depends on the
//!   interval-pool size relative to (e, e^n).
//! * `gamma_count`: how many high-degree vertices to trim before forming
//!   CUSUM matrices; exponential in the observed mean degree.
//! * `cusum` / `scan_interval`: the weighted left/right average difference
//!   `G^(t)` over a scan interval and the offset maximizing its spectral
//!   norm. All offsets are relative to the interval start, so the weight
//!   `sqrt((t/L)(1 - t/L))` and the divisors stay well defined.
//! * `threshold`: the data-dependent detection threshold in spectral-norm
//!   units.

use std::f64::consts::E;

use crate::error::{Error, Result};
use crate::matrix::SymMatrix;
use crate::sequence::{AdjacencySequence, LayerPrefix};
use crate::spectral::{spectral_norm, DEFAULT_SPECTRAL_TOL};

/// Root-finding tolerance for `phi_inverse` when not specified.
pub const DEFAULT_PHI_TOL: f64 = 1e-12;

/// The (epsilon, Psi, eta) triple controlling trimming and the theory bounds.
#[derive(Debug, Clone, PartialEq)]
pub struct PsiTriple {
    pub epsilon_mu: f64,
    pub psi_mu: f64,
    pub eta: f64,
}

/// A computed detection threshold together with the constants that formed it.
#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdSpec {
    pub theta_mu: f64,
    pub zeta: f64,
    /// `theta_mu * sqrt((d_bar / window) * (zeta + 6 + ln|L| / ln n))`.
    pub value: f64,
}

/// `phi(z) = z ln z - z + 1` on [1, inf); strictly increasing, phi(1) = 0.
pub fn phi(z: f64) -> Result<f64> {
    if !(z >= 1.0) {
        return Err(Error::domain(format!("phi requires z >= 1, got {z}")));
    }
    Ok(z * z.ln() - z + 1.0)
}

/// Monotone inverse of `phi`: the unique `z >= 1` with `phi(z) = y`.
///
/// Bisection on a doubling bracket; stops at `|phi(z) - y| <= tol` or when
/// the bracket reaches floating-point resolution.
pub fn phi_inverse(y: f64, tol: f64) -> Result<f64> {
    if !(y >= 0.0) {
        return Err(Error::domain(format!(
            "phi_inverse requires y >= 0, got {y}"
        )));
    }
    if !(tol > 0.0) {
        return Err(Error::invalid(format!("tolerance must be positive: {tol}")));
    }
    if y == 0.0 {
        return Ok(1.0);
    }
    let mut lo = 1.0_f64;
    let mut hi = 2.0_f64;
    while phi(hi).expect("hi >= 1") < y {
        lo = hi;
        hi *= 2.0;
        if hi.is_infinite() {
            return Err(Error::domain(format!("phi_inverse overflow for y = {y}")));
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let val = phi(mid).expect("mid >= 1");
        if (val - y).abs() <= tol {
            return Ok(mid);
        }
        if val < y {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Branch selector shared by `psi_triple` and `gamma_count`: the main regime
/// is `|L| in (e, e^n)`, evaluated in log space so large `n` cannot overflow.
fn pool_in_main_branch(n: usize, num_intervals: usize) -> bool {
    let l = num_intervals as f64;
    l > E && l.ln() < n as f64
}

/// (epsilon, eta) for the given pool size; no sample quantities involved.
pub(crate) fn branch_epsilon_eta(n: usize, num_intervals: usize) -> (f64, f64) {
    if pool_in_main_branch(n, num_intervals) {
        let eta = (n as f64).ln() / (num_intervals as f64).ln().ln();
        ((2.0 * eta - 2.0) / (6.0 * eta - 3.0), eta)
    } else {
        (1.0 / 6.0, 1.0)
    }
}

/// The (epsilon, Psi, eta) triple.
///
/// `window` is the effective scan length `L /\ kappa`; `pop_frakd` is the
/// largest expected row sum of the model.
pub fn psi_triple(
    mu: f64,
    n: usize,
    num_intervals: usize,
    window: usize,
    pop_frakd: f64,
) -> Result<PsiTriple> {
    if !(mu > 0.0) {
        return Err(Error::invalid(format!("mu must be positive, got {mu}")));
    }
    if n < 3 || window < 1 || num_intervals < 1 {
        return Err(Error::invalid(format!(
            "psi_triple requires n >= 3, window >= 1, num_intervals >= 1 \
             (got n={n}, window={window}, num_intervals={num_intervals})"
        )));
    }
    if pop_frakd == 0.0 {
        return Err(Error::DegenerateModel(
            "maximum expected row sum is zero; the model generates empty graphs".into(),
        ));
    }
    if !(pop_frakd > 0.0) {
        return Err(Error::invalid(format!(
            "expected row sum must be nonnegative, got {pop_frakd}"
        )));
    }

    let l = num_intervals as f64;
    let wd = window as f64 * pop_frakd;
    let (epsilon, eta) = branch_epsilon_eta(n, num_intervals);
    let psi = if pool_in_main_branch(n, num_intervals) {
        let arg = (l.ln().ln() / wd).max(3.0) / (2.0 / 3.0 - 2.0 * epsilon);
        phi_inverse(arg, DEFAULT_PHI_TOL)?
    } else {
        let arg = (2.0 * l.ln()).max(3.0 * wd) / ((1.0 / 3.0 - epsilon) * wd);
        phi_inverse(arg, DEFAULT_PHI_TOL)?
    };
    Ok(PsiTriple {
        epsilon_mu: epsilon,
        psi_mu: psi,
        eta,
    })
}

/// Number of highest-degree vertices to trim, capped at `n`.
///
/// `d_bar` is the sample mean degree over the relevant layers; `window` is
/// `L /\ kappa`; `epsilon_mu` comes from `psi_triple` (or
/// `branch_epsilon_eta` when no model quantities are available).
pub fn gamma_count(
    mu: f64,
    n: usize,
    num_intervals: usize,
    window: usize,
    d_bar: f64,
    epsilon_mu: f64,
) -> Result<usize> {
    if !(mu > 0.0) {
        return Err(Error::invalid(format!("mu must be positive, got {mu}")));
    }
    if !(epsilon_mu > 0.0 && epsilon_mu < 1.0 / 3.0) {
        return Err(Error::domain(format!(
            "epsilon must lie in (0, 1/3), got {epsilon_mu}"
        )));
    }
    if !(d_bar >= 0.0) {
        return Err(Error::invalid(format!(
            "mean degree must be nonnegative, got {d_bar}"
        )));
    }
    if num_intervals < 1 || window < 1 {
        return Err(Error::invalid(
            "gamma_count requires window >= 1 and num_intervals >= 1".to_string(),
        ));
    }

    let l = num_intervals as f64;
    let degree_term = 3.0 * window as f64 * d_bar / (1.0 + (4.0 * mu).sqrt());
    let (coefficient, inner) = if pool_in_main_branch(n, num_intervals) {
        (
            3.0 * epsilon_mu / (2.0 - 6.0 * epsilon_mu),
            l.ln().ln().max(degree_term),
        )
    } else {
        (
            3.0 * epsilon_mu / (1.0 - 3.0 * epsilon_mu),
            (2.0 * l.ln()).max(degree_term),
        )
    };
    let raw = 25.0 * n as f64 / 4.0 * (-coefficient * inner).exp();
    Ok((raw.ceil() as usize).min(n))
}

/// CUSUM matrix `G^(t)` for an interval of `len` layers starting at boundary
/// `start` (layers `start..start+len`), evaluated at relative offset `t_rel`.
///
/// `G = sqrt((t/L)(1 - t/L)) * (mean(first t layers) - mean(rest))`.
/// Layers are expected to be pre-trimmed.
pub fn cusum(
    trimmed: &AdjacencySequence,
    interval: (usize, usize),
    t_rel: usize,
) -> Result<SymMatrix> {
    let (start, len) = interval;
    check_interval(trimmed, start, len)?;
    if t_rel < 1 || t_rel > len - 1 {
        return Err(Error::invalid(format!(
            "offset {t_rel} outside 1..={} for an interval of length {len}",
            len - 1
        )));
    }
    let prefix = trimmed.prefix();
    Ok(cusum_packed(&prefix, start, len, t_rel, None))
}

/// Offset maximizing `||G^(t)||` over `t_rel in (cushion, len - cushion]`,
/// ties resolved toward the smallest offset. Returns `(t_rel, max norm)`.
pub fn scan_interval(
    trimmed: &AdjacencySequence,
    interval: (usize, usize),
    cushion: usize,
) -> Result<(usize, f64)> {
    let (start, len) = interval;
    check_interval(trimmed, start, len)?;
    let prefix = trimmed.prefix();
    scan_prefix(
        &prefix,
        start,
        start + len,
        cushion,
        None,
        DEFAULT_SPECTRAL_TOL,
    )
}

/// Detection threshold
/// `theta_mu * sqrt((d_bar / window) * (zeta + 6 + ln(num_intervals)/ln(n)))`.
///
/// The window-based detector passes its interval length and grid size; wild
/// binary segmentation passes the cushion `kappa` and its pool size `M`.
pub fn threshold(
    theta_mu: f64,
    zeta: f64,
    d_bar: f64,
    window: usize,
    num_intervals: usize,
    n: usize,
) -> Result<ThresholdSpec> {
    if !(theta_mu >= 0.0) || !(zeta > 0.0) || !(d_bar >= 0.0) {
        return Err(Error::invalid(format!(
            "threshold requires theta_mu >= 0, zeta > 0, d_bar >= 0 \
             (got {theta_mu}, {zeta}, {d_bar})"
        )));
    }
    if window < 1 || num_intervals < 1 || n < 3 {
        return Err(Error::invalid(format!(
            "threshold requires window >= 1, num_intervals >= 1, n >= 3 \
             (got {window}, {num_intervals}, {n})"
        )));
    }
    let value = theta_mu * threshold_base(zeta, d_bar, window, num_intervals, n);
    Ok(ThresholdSpec {
        theta_mu,
        zeta,
        value,
    })
}

/// The threshold without its `theta_mu` factor; calibration searches over
/// `theta_mu`, so detection fires iff `theta_mu < stat / base`.
pub(crate) fn threshold_base(
    zeta: f64,
    d_bar: f64,
    window: usize,
    num_intervals: usize,
    n: usize,
) -> f64 {
    let log_ratio = (num_intervals as f64).ln() / (n as f64).ln();
    ((d_bar / window as f64) * (zeta + 6.0 + log_ratio)).sqrt()
}

fn check_interval(seq: &AdjacencySequence, start: usize, len: usize) -> Result<()> {
    if len < 2 {
        return Err(Error::invalid(format!(
            "interval length must be at least 2, got {len}"
        )));
    }
    if start + len > seq.t_len() {
        return Err(Error::invalid(format!(
            "interval {start}..{} exceeds T = {}",
            start + len,
            seq.t_len()
        )));
    }
    Ok(())
}

/// Build `G^(t)` from prefix sums; `mask` zeroes trimmed vertices.
pub(crate) fn cusum_packed(
    prefix: &LayerPrefix,
    start: usize,
    len: usize,
    t_rel: usize,
    mask: Option<&[bool]>,
) -> SymMatrix {
    let n = prefix.n();
    let t = t_rel as f64;
    let l = len as f64;
    // sqrt((t/L)(1 - t/L)) in the symmetric form sqrt(t (L - t)) / L, so the
    // weight is bitwise identical at offsets t and L - t.
    let left_div = t;
    let right_div = (len - t_rel) as f64;
    let weight = (left_div * right_div).sqrt() / l;

    let lo = prefix.upper_at(start);
    let mid = prefix.upper_at(start + t_rel);
    let hi = prefix.upper_at(start + len);

    let tri = lo.len();
    let mut g = vec![0.0; tri];
    for e in 0..tri {
        let left = mid[e] - lo[e];
        let right = hi[e] - mid[e];
        g[e] = weight * (left / left_div - right / right_div);
    }
    let mut out = SymMatrix::from_upper_raw(n, g);
    if let Some(mask) = mask {
        out = out.masked(mask);
    }
    out
}

/// Scan `||G^(t)||` over the relative offsets `(cushion, len - cushion]` of
/// the interval covering layers `start..end`.
pub(crate) fn scan_prefix(
    prefix: &LayerPrefix,
    start: usize,
    end: usize,
    cushion: usize,
    mask: Option<&[bool]>,
    spectral_tol: f64,
) -> Result<(usize, f64)> {
    debug_assert!(end <= prefix.t_len());
    let len = end - start;
    if len < 2 || len <= 2 * cushion {
        return Err(Error::invalid(format!(
            "empty scan range: interval length {len} with cushion {cushion}"
        )));
    }
    let mut best_t = 0usize;
    let mut best_stat = f64::NEG_INFINITY;
    for t_rel in (cushion + 1)..=(len - cushion) {
        debug_assert!(t_rel >= 1 && t_rel <= len - 1);
        let g = cusum_packed(prefix, start, len, t_rel, mask);
        let stat = spectral_norm(&g, spectral_tol)?;
        if stat > best_stat {
            best_stat = stat;
            best_t = t_rel;
        }
    }
    Ok((best_t, best_stat))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn seq_from(layers: Vec<SymMatrix>) -> AdjacencySequence {
        AdjacencySequence::new(layers).unwrap()
    }

    /// Independent CUSUM oracle: entrywise sums over the raw layers.
    fn cusum_direct(layers: &[SymMatrix], t_rel: usize) -> SymMatrix {
        let n = layers[0].n();
        let len = layers.len() as f64;
        let t = t_rel as f64;
        let w = ((t / len) * (1.0 - t / len)).sqrt();
        SymMatrix::from_fn(n, |i, j| {
            let left: f64 = layers[..t_rel].iter().map(|l| l.entry(i, j)).sum();
            let right: f64 = layers[t_rel..].iter().map(|l| l.entry(i, j)).sum();
            w * (left / t - right / (len - t))
        })
    }

    // ---- phi / phi_inverse ----

    #[test]
    fn phi_at_one_is_zero() {
        assert_eq!(phi(1.0).unwrap(), 0.0);
    }

    #[test]
    fn phi_at_e_is_one() {
        assert!((phi(E).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn phi_at_two() {
        let expected = 2.0 * std::f64::consts::LN_2 - 1.0;
        assert!((phi(2.0).unwrap() - expected).abs() < 1e-15);
        assert!((phi(2.0).unwrap() - 0.386294).abs() < 1e-6);
    }

    #[test]
    fn phi_rejects_below_one() {
        assert!(matches!(phi(0.5), Err(Error::Domain(_))));
    }

    #[test]
    fn phi_inverse_at_zero_and_one() {
        assert_eq!(phi_inverse(0.0, 1e-12).unwrap(), 1.0);
        assert!((phi_inverse(1.0, 1e-13).unwrap() - E).abs() < 1e-10);
    }

    #[test]
    fn phi_inverse_rejects_negative() {
        assert!(matches!(phi_inverse(-0.1, 1e-12), Err(Error::Domain(_))));
    }

    #[test]
    fn phi_round_trip_on_spot_values() {
        for z in [1.1, 2.0, 10.0, 100.0] {
            let back = phi_inverse(phi(z).unwrap(), 1e-13).unwrap();
            assert!((back - z).abs() <= 1e-9, "z={z} back={back}");
        }
    }

    #[test]
    fn phi_round_trip_on_log_grid() {
        // Log-spaced grid over [1, 1e3].
        for k in 0..=120 {
            let z = 10f64.powf(3.0 * k as f64 / 120.0);
            let back = phi_inverse(phi(z).unwrap(), 1e-12).unwrap();
            assert!((back - z).abs() <= 1e-9, "z={z} back={back}");
        }
    }

    // ---- psi_triple ----

    #[test]
    fn psi_degenerate_branch_hits_phi_inverse_of_18() {
        // |L| = 2 is outside (e, e^n); with 2 ln|L| <= 3 w d the argument
        // collapses to 3 / (1/3 - 1/6) = 18 independent of w d.
        let triple = psi_triple(1.0, 10, 2, 2, 1.0).unwrap();
        assert_eq!(triple.epsilon_mu, 1.0 / 6.0);
        assert_eq!(triple.eta, 1.0);
        assert!((phi(triple.psi_mu).unwrap() - 18.0).abs() < 1e-8);
    }

    #[test]
    fn psi_main_branch_epsilon_increases_to_one_third() {
        // epsilon = (2 eta - 2)/(6 eta - 3) is increasing in eta with limit 1/3.
        let eps = |eta: f64| (2.0 * eta - 2.0) / (6.0 * eta - 3.0);
        assert_eq!(eps(1.0), 0.0);
        let mut prev = -1.0;
        for eta in [1.0, 1.5, 2.0, 5.0, 20.0, 1e3, 1e6] {
            let e = eps(eta);
            assert!(e > prev);
            assert!(e < 1.0 / 3.0);
            prev = e;
        }
        assert!((eps(1e9) - 1.0 / 3.0).abs() < 1e-8);
    }

    #[test]
    fn psi_main_branch_outputs_are_finite_and_in_range() {
        // |L| = 40 lies in (e, e^n) for n = 50.
        let triple = psi_triple(0.5, 50, 40, 6, 2.5).unwrap();
        assert!(triple.eta > 1.0);
        assert!(triple.epsilon_mu > 0.0 && triple.epsilon_mu < 1.0 / 3.0);
        assert!(triple.psi_mu.is_finite() && triple.psi_mu >= 1.0);
        let expected_eps = (2.0 * triple.eta - 2.0) / (6.0 * triple.eta - 3.0);
        assert!((triple.epsilon_mu - expected_eps).abs() < 1e-15);
    }

    #[test]
    fn psi_zero_row_sum_is_degenerate() {
        assert!(matches!(
            psi_triple(1.0, 10, 5, 3, 0.0),
            Err(Error::DegenerateModel(_))
        ));
    }

    // ---- gamma_count ----

    #[test]
    fn gamma_formula_matches_scalar_oracle() {
        // n=100, epsilon=1/6, degree term 3*window*d_bar/(1+sqrt(4mu)) = 10
        // dominating in the main branch: ceil(625 * exp(-(0.5/(2-1)) * 10)).
        // Realized with mu=1 (divisor 3), window=5, d_bar=2: 3*5*2/3 = 10.
        let n = 100;
        let num_intervals = 20; // in (e, e^n)
        let got = gamma_count(1.0, n, num_intervals, 5, 2.0, 1.0 / 6.0).unwrap();
        let coefficient = 3.0 * (1.0 / 6.0) / (2.0 - 6.0 / 6.0);
        let oracle = (625.0 * (-coefficient * 10.0_f64).exp()).ceil() as usize;
        assert_eq!(oracle, 5);
        assert_eq!(got, oracle);
    }

    #[test]
    fn gamma_with_no_data_caps_at_n() {
        // d_bar = 0 and |L| = 1 zero both log terms: ceil(25n/4) capped at n.
        let got = gamma_count(1.0, 100, 1, 4, 0.0, 1.0 / 6.0).unwrap();
        assert_eq!(got, 100);
    }

    #[test]
    fn gamma_shrinks_to_nothing_for_dense_graphs() {
        let n = 200;
        let gamma = gamma_count(1.0, n, 10, 10, 50.0, 1.0 / 6.0).unwrap();
        assert_eq!(gamma, 1);
        assert!((gamma as f64) / (n as f64) <= 0.01);
    }

    #[test]
    fn gamma_nonincreasing_in_degree_and_window() {
        let mut prev = usize::MAX;
        for d_bar in [0.0, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0] {
            let g = gamma_count(1.0, 100, 20, 4, d_bar, 0.25).unwrap();
            assert!(g <= prev, "gamma not monotone in d_bar");
            prev = g;
        }
        let mut prev = usize::MAX;
        for window in [1, 2, 4, 8, 16] {
            let g = gamma_count(1.0, 100, 20, window, 1.5, 0.25).unwrap();
            assert!(g <= prev, "gamma not monotone in window");
            prev = g;
        }
    }

    #[test]
    fn gamma_rejects_epsilon_outside_domain() {
        assert!(matches!(
            gamma_count(1.0, 10, 5, 3, 1.0, 1.0 / 3.0),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            gamma_count(1.0, 10, 5, 3, 1.0, 0.0),
            Err(Error::Domain(_))
        ));
    }

    // ---- cusum ----

    #[test]
    fn cusum_of_identical_layers_is_exactly_zero() {
        let seq = seq_from(vec![SymMatrix::complete(5); 6]);
        for t in 1..6 {
            let g = cusum(&seq, (0, 6), t).unwrap();
            assert!(g.iter_upper().all(|(_, _, v)| v == 0.0));
        }
    }

    #[test]
    fn cusum_midpoint_weight_is_half() {
        // (B, B, C, C) at t=2: G = (1/2)(B - C) exactly.
        let b = SymMatrix::complete(4);
        let c = SymMatrix::zeros(4);
        let seq = seq_from(vec![b.clone(), b.clone(), c.clone(), c.clone()]);
        let g = cusum(&seq, (0, 4), 2).unwrap();
        for (i, j, v) in g.iter_upper() {
            assert_eq!(v, 0.5 * (b.entry(i, j) - c.entry(i, j)));
        }
        let stat = spectral_norm(&g, 1e-12).unwrap();
        assert!((stat - 3.0 / 2.0).abs() < 1e-9); // ||B - C|| = n - 1 = 3
    }

    #[test]
    fn cusum_matches_direct_summation_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let layers: Vec<SymMatrix> = (0..5)
            .map(|_| SymMatrix::from_fn(6, |_, _| if rng.random::<f64>() < 0.4 { 1.0 } else { 0.0 }))
            .collect();
        let seq = seq_from(layers.clone());
        for t in 1..5 {
            let g = cusum(&seq, (0, 5), t).unwrap();
            let oracle = cusum_direct(&layers, t);
            for (i, j, v) in g.iter_upper() {
                let want = oracle.entry(i, j);
                assert!(
                    (v - want).abs() <= 1e-15 * want.abs().max(1.0),
                    "mismatch at ({i},{j},t={t}): {v} vs {want}"
                );
            }
        }
    }

    #[test]
    fn cusum_rejects_offsets_outside_interval() {
        let seq = seq_from(vec![SymMatrix::zeros(3); 4]);
        assert!(cusum(&seq, (0, 4), 0).is_err());
        assert!(cusum(&seq, (0, 4), 4).is_err());
        assert!(cusum(&seq, (2, 4), 1).is_err()); // exceeds T
    }

    // ---- scan_interval ----

    #[test]
    fn scan_constant_layers_returns_first_offset() {
        let seq = seq_from(vec![SymMatrix::complete(4); 6]);
        let (u, stat) = scan_interval(&seq, (0, 6), 2).unwrap();
        assert_eq!(u, 3);
        assert_eq!(stat, 0.0);
    }

    #[test]
    fn scan_finds_the_block_boundary() {
        // (B, B, B, C, C, C): peak at t=3 with stat ||B - C|| / 2.
        let b = SymMatrix::complete(5);
        let c = SymMatrix::zeros(5);
        let seq = seq_from(vec![
            b.clone(),
            b.clone(),
            b.clone(),
            c.clone(),
            c.clone(),
            c,
        ]);
        let (u, stat) = scan_interval(&seq, (0, 6), 2).unwrap();
        assert_eq!(u, 3);
        assert!((stat - 4.0 / 2.0).abs() < 1e-9);
    }

    #[test]
    fn scan_doubles_with_the_layers() {
        // Fractional layers are legal; doubling 0.5-valued entries stays
        // inside [0, 1] and scales every CUSUM matrix by exactly 2.
        let half = SymMatrix::constant(5, 0.5);
        let zero = SymMatrix::zeros(5);
        let seq1 = seq_from(vec![half.clone(), half.clone(), zero.clone(), zero.clone()]);
        let seq2 = seq_from(vec![
            SymMatrix::complete(5),
            SymMatrix::complete(5),
            zero.clone(),
            zero,
        ]);
        let (u1, s1) = scan_interval(&seq1, (0, 4), 1).unwrap();
        let (u2, s2) = scan_interval(&seq2, (0, 4), 1).unwrap();
        assert_eq!(u1, u2);
        assert!((s2 - 2.0 * s1).abs() <= 1e-12 * s2.max(1.0));
    }

    #[test]
    fn scan_rejects_empty_range() {
        let seq = seq_from(vec![SymMatrix::zeros(3); 4]);
        assert!(scan_interval(&seq, (0, 4), 2).is_err());
    }

    #[test]
    fn scan_is_invariant_under_vertex_relabeling() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let layers: Vec<SymMatrix> = (0..9)
            .map(|t| {
                let p = if t < 4 { 0.15 } else { 0.55 };
                SymMatrix::from_fn(12, |_, _| if rng.random::<f64>() < p { 1.0 } else { 0.0 })
            })
            .collect();
        let seq = seq_from(layers);
        let perm: Vec<usize> = vec![5, 3, 11, 0, 7, 1, 10, 2, 9, 4, 8, 6];
        let relabeled = seq.permuted(&perm);
        let (u1, s1) = scan_interval(&seq, (0, 9), 3).unwrap();
        let (u2, s2) = scan_interval(&relabeled, (0, 9), 3).unwrap();
        assert_eq!(u1, u2);
        assert!((s1 - s2).abs() <= 1e-8 * s1.max(1.0));
    }

    #[test]
    fn cusum_mean_is_zero_under_constant_model() {
        // 500 Monte Carlo draws from a constant edge-probability model; the
        // grand mean of G entries must sit within 4 standard errors of 0.
        let n = 12;
        let len = 8;
        let t_rel = 3;
        let p = 0.3;
        let reps = 500;
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let mut values = Vec::new();
        for _ in 0..reps {
            let layers: Vec<SymMatrix> = (0..len)
                .map(|_| SymMatrix::from_fn(n, |_, _| if rng.random::<f64>() < p { 1.0 } else { 0.0 }))
                .collect();
            let seq = seq_from(layers);
            let g = cusum(&seq, (0, len), t_rel).unwrap();
            values.extend(g.iter_upper().map(|(_, _, v)| v));
        }
        let count = values.len() as f64;
        let mean = values.iter().sum::<f64>() / count;
        let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (count - 1.0);
        let se = (var / count).sqrt();
        assert!(
            mean.abs() <= 4.0 * se,
            "grand mean {mean} exceeds 4 SE = {}",
            4.0 * se
        );
    }

    // ---- threshold ----

    #[test]
    fn threshold_zero_degree_gives_zero() {
        let spec = threshold(1.5, 1.0, 0.0, 8, 10, 20).unwrap();
        assert_eq!(spec.value, 0.0);
    }

    #[test]
    fn threshold_follows_inverse_sqrt_window_law() {
        let a = threshold(1.0, 1.0, 2.5, 8, 40, 50).unwrap().value;
        let b = threshold(1.0, 1.0, 2.5, 32, 40, 50).unwrap().value;
        assert_eq!(a / b, 2.0);
    }

    #[test]
    fn threshold_worked_example() {
        // theta=1, zeta=1, d_bar=2, window=8, |L| = n: value = sqrt((2/8)*8).
        let spec = threshold(1.0, 1.0, 2.0, 8, 30, 30).unwrap();
        assert!((spec.value - 2.0_f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn threshold_rejects_bad_inputs() {
        assert!(threshold(-1.0, 1.0, 1.0, 4, 4, 10).is_err());
        assert!(threshold(1.0, 0.0, 1.0, 4, 4, 10).is_err());
        assert!(threshold(1.0, 1.0, 1.0, 4, 4, 2).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn cusum_negates_under_time_reversal(seed in 0u64..300, len in 4usize..9) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let layers: Vec<SymMatrix> = (0..len)
                .map(|_| SymMatrix::from_fn(7, |_, _| if rng.random::<f64>() < 0.35 { 1.0 } else { 0.0 }))
                .collect();
            let seq = seq_from(layers.clone());
            let reversed = seq_from(layers.into_iter().rev().collect());
            for t in 1..len {
                let g = cusum(&seq, (0, len), t).unwrap();
                let h = cusum(&reversed, (0, len), len - t).unwrap();
                for (i, j, v) in g.iter_upper() {
                    prop_assert_eq!(h.entry(i, j), -v);
                }
            }
        }

        #[test]
        fn phi_inverse_is_inverse_on_random_points(y in 0.0f64..500.0) {
            let z = phi_inverse(y, 1e-12).unwrap();
            let back = phi(z).unwrap();
            prop_assert!((back - y).abs() <= 1e-9 * y.max(1.0));
        }
    }
}
