//! Rare-event link-level simulation for AWGN channels.
//!
//! The crate estimates bit and word error rates of BPSK and square-QAM links with
//! plain Monte Carlo, quasi-Monte Carlo (Halton, Sobol, Owen-scrambled Sobol) and
//! adaptive Gaussian importance sampling by exponential tilting or variance scaling.
//!
//! Layout:
//!
//! * [`lowdisc`] - uniform point streams on `[0,1)^d`.
//! * [`normal_map`] - inverse normal CDF and the uniform-to-Gaussian transform.
//! * [`modem`] - bits, Gray-mapped constellations, hard decisions and error metrics.
//! * [`channel`] - AWGN target, tilted and scaled proposals, exact log weights.
//! * [`adaptive`] - estimators, second-moment surrogates, fixed-point updates and the adaptive loop.
//! * [`harness`] - SNR sweeps, method comparison and result files.
//! * [`exec`] - sequential or rayon-backed block execution.

pub mod adaptive;
pub mod channel;
pub mod error;
pub mod exec;
pub mod harness;
pub mod lowdisc;
pub mod modem;
pub mod normal_map;

pub use error::{Error, Result};
