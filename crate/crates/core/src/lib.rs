//! Offline change point detection and localization for sequences of networks.
//!
//! The observable is a sequence of symmetric binary adjacency matrices on a
//! shared vertex set. Change points are layers where the expected adjacency
//! matrix jumps; they are found by scanning intervals with a spectral-norm
//! CUSUM statistic over degree-trimmed layers, either on a deterministic
//! sliding grid (`detect::detect_window`) or by wild binary segmentation over
//! random intervals (`detect::detect_wbs`).
//!
//! The crate also ships the generative side needed to exercise the detectors:
//! piecewise-constant edge-probability models with Bernoulli sampling
//! (`model`), hardest-case instances near the detectability boundary, and a
//! seeded Monte Carlo harness (`eval`) for risk estimates, localization
//! accuracy, threshold calibration and phase-diagram sweeps.

pub mod error;
pub mod matrix;
pub mod model;
pub mod sequence;
pub mod spectral;
pub mod stats;

pub use error::{Error, Result};
pub use matrix::SymMatrix;
pub use model::{
    ground_truth, hard_instance_detect, hard_instance_localize, sample_mirgram, ChangeSide,
    GroundTruth, ProbabilitySequence, Segment,
};
pub use sequence::{degree_profile, trim, AdjacencySequence, DegreeProfile};
pub use spectral::{spectral_norm, spectral_norm_seeded, DEFAULT_SPECTRAL_TOL};
pub use stats::{
    cusum, gamma_count, phi, phi_inverse, psi_triple, scan_interval, threshold, PsiTriple,
    ThresholdSpec,
};
