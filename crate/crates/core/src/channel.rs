//! AWGN target channel, Gaussian proposals and exact log importance weights.
//!
//! The target is `y | x ~ N(x, sigma2 I_n)`. Tilted proposals shift the mean to
//! `x + theta`; scaled proposals inflate the variance to `c * sigma2`. Complex
//! symbols are flattened to real dimensions before any weight is evaluated.
//! Weights are always returned as logarithms.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Default clamp margin for scaled proposals.
pub const DEFAULT_DELTA: f64 = 0.1;

/// Per-real-dimension noise variance `0.5 * 10^(-snr_db / 10)`.
pub fn sigma2_from_snr(snr_db: f64) -> f64 {
    0.5 * 10f64.powf(-snr_db / 10.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelConfig {
    pub snr_db: f64,
    pub sigma2: f64,
}

impl ChannelConfig {
    pub fn from_snr(snr_db: f64) -> Result<Self> {
        if !snr_db.is_finite() {
            return Err(Error::invalid(format!("SNR must be finite, got {snr_db}")));
        }
        Ok(Self {
            snr_db,
            sigma2: sigma2_from_snr(snr_db),
        })
    }

    pub fn sigma(&self) -> f64 {
        self.sigma2.sqrt()
    }
}

/// `y = x + noise`.
pub fn apply_awgn(x: &[f64], noise: &[f64]) -> Result<Vec<f64>> {
    if x.len() != noise.len() {
        return Err(Error::invalid(format!(
            "signal has {} dimensions but noise has {}",
            x.len(),
            noise.len()
        )));
    }
    Ok(x.iter().zip(noise).map(|(a, b)| a + b).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TiltParams {
    pub theta: Vec<f64>,
}

impl TiltParams {
    pub fn new(theta: Vec<f64>) -> Result<Self> {
        if theta.iter().any(|t| !t.is_finite()) {
            return Err(Error::invalid("tilt parameters must be finite"));
        }
        Ok(Self { theta })
    }

    pub fn zeros(n: usize) -> Self {
        Self { theta: vec![0.0; n] }
    }

    pub fn norm2(&self) -> f64 {
        self.theta.iter().map(|t| t * t).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScaleParams {
    c: f64,
    delta: f64,
}

impl ScaleParams {
    /// Requires `delta > 0` and `c >= 1 + delta`.
    pub fn new(c: f64, delta: f64) -> Result<Self> {
        if !(delta > 0.0 && delta.is_finite()) {
            return Err(Error::invalid(format!("clamp margin must be positive, got {delta}")));
        }
        if !(c.is_finite() && c >= 1.0 + delta) {
            return Err(Error::invalid(format!(
                "scale factor {c} violates c >= 1 + delta = {}",
                1.0 + delta
            )));
        }
        Ok(Self { c, delta })
    }

    /// `max(1 + delta, c_hat)`.
    pub fn clamped(c_hat: f64, delta: f64) -> Result<Self> {
        let c = if c_hat.is_nan() { 1.0 + delta } else { c_hat.max(1.0 + delta) };
        Self::new(c, delta)
    }

    /// Scale equivalent to lowering the SNR by `offset_db`, clamped.
    pub fn from_snr_offset(offset_db: f64, delta: f64) -> Result<Self> {
        Self::clamped(10f64.powf(offset_db / 10.0), delta)
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }
}

/// Noise residual `r = y - x` with its cached squared norm.
#[derive(Debug, Clone, PartialEq)]
pub struct Residual {
    r: Vec<f64>,
    r2: f64,
}

impl Residual {
    pub fn new(r: Vec<f64>) -> Self {
        let r2 = r.iter().map(|v| v * v).sum();
        Self { r, r2 }
    }

    pub fn from_signals(y: &[f64], x: &[f64]) -> Result<Self> {
        if y.len() != x.len() {
            return Err(Error::invalid("received and sent vectors differ in length"));
        }
        Ok(Self::new(y.iter().zip(x).map(|(a, b)| a - b).collect()))
    }

    pub fn values(&self) -> &[f64] {
        &self.r
    }

    pub fn norm2(&self) -> f64 {
        self.r2
    }

    pub fn dimension(&self) -> usize {
        self.r.len()
    }
}

#[inline]
pub(crate) fn log_weight_tilt_raw(r: &[f64], theta: &[f64], sigma2: f64) -> f64 {
    let mut dot = 0.0;
    let mut t2 = 0.0;
    for (ri, ti) in r.iter().zip(theta) {
        dot += ri * ti;
        t2 += ti * ti;
    }
    (-2.0 * dot + t2) / (2.0 * sigma2)
}

#[inline]
pub(crate) fn log_weight_scale_raw(r2: f64, n: usize, c: f64, sigma2: f64) -> f64 {
    0.5 * n as f64 * c.ln() + (1.0 / c - 1.0) * r2 / (2.0 * sigma2)
}

/// `log[pi(y|x) / g_theta(y|x)] = (-2 r.theta + |theta|^2) / (2 sigma2)`.
pub fn log_weight_tilt(res: &Residual, theta: &TiltParams, sigma2: f64) -> Result<f64> {
    if res.dimension() != theta.theta.len() {
        return Err(Error::invalid(format!(
            "residual has {} dimensions but theta has {}",
            res.dimension(),
            theta.theta.len()
        )));
    }
    if !(sigma2 > 0.0) {
        return Err(Error::invalid("sigma2 must be positive"));
    }
    Ok(log_weight_tilt_raw(&res.r, &theta.theta, sigma2))
}

/// `log[pi(y|x) / g_c(y|x)] = (n/2) ln c + (1/c - 1) |r|^2 / (2 sigma2)`.
pub fn log_weight_scale(res: &Residual, scale: &ScaleParams, sigma2: f64, n: usize) -> Result<f64> {
    if n != res.dimension() {
        return Err(Error::invalid(format!(
            "noise dimension {n} does not match residual dimension {}",
            res.dimension()
        )));
    }
    if !(sigma2 > 0.0) {
        return Err(Error::invalid("sigma2 must be positive"));
    }
    Ok(log_weight_scale_raw(res.r2, n, scale.c, sigma2))
}
