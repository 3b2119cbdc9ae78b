//! Pattern division multiple access (PDMA) downlink over a large-scale
//! antenna cluster.
//!
//! Users are superposed on `N` beams through a binary pattern matrix `B`
//! (which beams carry which user) and a power matrix `P`. The receiver
//! applies a spatial filter to separate beams, normalizes each beam to an
//! equivalent SISO link, and runs successive interference cancellation
//! within each beam.
//!
//! The crate is organized along that chain:
//!
//! - [`channel`]: user drops and Rayleigh/path-loss/shadowing channels.
//! - [`pattern`]: pattern matrices, the simple beam policy and the
//!   min-max inner-product beam search.
//! - [`transceiver`]: beamforming, pattern mapping, spatial filters,
//!   equivalent gains, SIC ordering, SINR and sum rate.
//! - [`power`]: the geometric power policy and a log-barrier solver for
//!   sum-rate maximal power allocation.
//! - [`baselines`]: OMA and power-domain NOMA expressed as patterns.
//! - [`harness`]: Monte Carlo trials, sweeps, presets and CSV output.
//! - [`cli`]: the command-line front end used by the `pdma` binary.

pub mod baselines;
pub mod channel;
pub mod cli;
pub mod error;
pub mod harness;
pub mod linalg;
pub mod pattern;
pub mod power;
pub mod transceiver;

pub use error::{PdmaError, Result};
