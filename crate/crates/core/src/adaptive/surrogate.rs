//! Second-moment surrogates, their gradients and the fixed-point proposal updates.
//!
//! Samples carry `log_w`, the log weight of the proposal that generated them
//! (zero for samples from the target). Each surrogate term is multiplied by
//! that weight, so the same formulas hold whether the samples come from the
//! target or from any earlier proposal.

use super::accum::{AccumulatorSet, ScaledSum};
use super::WeightedSample;
use crate::channel::{ScaleParams, TiltParams};
use crate::{Error, Result};

/// Damped iteration `x <- (1 - damping) x + damping * ratio(x)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FixedPointOptions {
    pub damping: f64,
    /// Stop once `|ratio(x) - x|` falls below this.
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl Default for FixedPointOptions {
    fn default() -> Self {
        Self {
            damping: 0.5,
            tolerance: 1e-8,
            max_iterations: 200,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FixedPoint<P> {
    pub params: P,
    pub iterations: usize,
    /// `|ratio(x) - x|` at the returned point.
    pub residual: f64,
    pub converged: bool,
}

fn residual_of(s: &WeightedSample) -> Result<&[f64]> {
    s.residual
        .as_deref()
        .ok_or_else(|| Error::invalid("tilt surrogate needs full residual vectors"))
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn tilt_log_term(s: &WeightedSample, r: &[f64], theta: &[f64], t2: f64, sigma2: f64) -> f64 {
    2.0 * s.loss.ln() + s.log_w + (-2.0 * dot(r, theta) + t2) / (2.0 * sigma2)
}

fn check_dims(samples: &[WeightedSample], n: usize) -> Result<()> {
    for s in samples {
        if let Some(r) = &s.residual {
            if r.len() != n {
                return Err(Error::invalid(format!(
                    "residual dimension {} does not match parameter dimension {n}",
                    r.len()
                )));
            }
        }
    }
    Ok(())
}

/// `(1/N) sum l^2 w_gen exp[(-2 r.theta + |theta|^2) / (2 sigma2)]`.
pub fn second_moment_tilt(samples: &[WeightedSample], theta: &TiltParams, sigma2: f64) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::invalid("surrogate needs at least one sample"));
    }
    check_dims(samples, theta.theta.len())?;
    let t2 = theta.norm2();
    let mut sum = ScaledSum::default();
    for s in samples.iter().filter(|s| s.loss > 0.0) {
        let r = residual_of(s)?;
        sum.add(tilt_log_term(s, r, &theta.theta, t2, sigma2), 1.0);
    }
    Ok(sum.value() / samples.len() as f64)
}

/// Gradient of [`second_moment_tilt`]: each term times `(theta - r) / sigma2`.
pub fn grad_second_moment_tilt(
    samples: &[WeightedSample],
    theta: &TiltParams,
    sigma2: f64,
) -> Result<Vec<f64>> {
    if samples.is_empty() {
        return Err(Error::invalid("surrogate needs at least one sample"));
    }
    check_dims(samples, theta.theta.len())?;
    let t2 = theta.norm2();
    let mut sums = vec![ScaledSum::default(); theta.theta.len()];
    for s in samples.iter().filter(|s| s.loss > 0.0) {
        let r = residual_of(s)?;
        let lt = tilt_log_term(s, r, &theta.theta, t2, sigma2);
        for ((acc, &rj), &tj) in sums.iter_mut().zip(r).zip(&theta.theta) {
            acc.add(lt, (tj - rj) / sigma2);
        }
    }
    let n = samples.len() as f64;
    Ok(sums.iter().map(|s| s.value() / n).collect())
}

/// Right-hand side of the optimal-tilt equation:
/// `sum l^2 w_gen e^{-r.theta/sigma2} r / sum l^2 w_gen e^{-r.theta/sigma2}`.
pub fn tilt_ratio(samples: &[WeightedSample], theta: &[f64], sigma2: f64) -> Result<Vec<f64>> {
    let mut num = vec![ScaledSum::default(); theta.len()];
    let mut den = ScaledSum::default();
    for s in samples.iter().filter(|s| s.loss > 0.0) {
        let r = residual_of(s)?;
        if r.len() != theta.len() {
            return Err(Error::invalid("residual and theta dimensions differ"));
        }
        let lt = 2.0 * s.loss.ln() + s.log_w - dot(r, theta) / sigma2;
        den.add(lt, 1.0);
        for (acc, &rj) in num.iter_mut().zip(r) {
            acc.add(lt, rj);
        }
    }
    if den.is_zero() {
        return Err(Error::NoErrorSamples);
    }
    Ok(num.iter().map(|v| v.ratio(&den)).collect())
}

/// Solves `theta = tilt_ratio(theta)` by damped iteration from `start`.
pub fn solve_tilt_fixed_point(
    samples: &[WeightedSample],
    start: &[f64],
    sigma2: f64,
    opts: FixedPointOptions,
) -> Result<FixedPoint<TiltParams>> {
    let mut theta = start.to_vec();
    let mut iterations = 0;
    loop {
        let target = tilt_ratio(samples, &theta, sigma2)?;
        let residual = target
            .iter()
            .zip(&theta)
            .map(|(a, b)| (a - b).powi(2))
            .sum::<f64>()
            .sqrt();
        if residual < opts.tolerance || iterations >= opts.max_iterations {
            let last = if residual < opts.tolerance { target } else { theta };
            return Ok(FixedPoint {
                params: TiltParams::new(last)?,
                iterations,
                residual,
                converged: residual < opts.tolerance,
            });
        }
        for (t, g) in theta.iter_mut().zip(&target) {
            *t = (1.0 - opts.damping) * *t + opts.damping * g;
        }
        iterations += 1;
    }
}

/// Tilt update from everything accumulated so far.
///
/// Starts from the plug-in ratio at the sampling proposals (one undamped step)
/// and iterates to the self-consistent point. With no error samples the caller
/// keeps `theta_current`; this returns [`Error::NoErrorSamples`].
pub fn update_theta_fixed_point(
    accums: &AccumulatorSet,
    theta_current: &TiltParams,
    sigma2: f64,
) -> Result<FixedPoint<TiltParams>> {
    if accums.n_errors() == 0 {
        return Err(Error::NoErrorSamples);
    }
    let start = accums
        .tilt_plugin_ratio()
        .unwrap_or_else(|| theta_current.theta.clone());
    solve_tilt_fixed_point(accums.error_samples(), &start, sigma2, FixedPointOptions::default())
}

fn scale_log_term(s: &WeightedSample, c: f64, sigma2: f64) -> f64 {
    2.0 * s.loss.ln() + s.log_w + (1.0 / c - 1.0) * s.r2 / (2.0 * sigma2)
}

/// `(c^{n/2} / N) sum l^2 w_gen exp[(1/c - 1) |r|^2 / (2 sigma2)]`.
pub fn second_moment_scale(samples: &[WeightedSample], c: f64, sigma2: f64, n: usize) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::invalid("surrogate needs at least one sample"));
    }
    if !(c > 0.0) {
        return Err(Error::invalid("scale factor must be positive"));
    }
    let mut sum = ScaledSum::default();
    for s in samples.iter().filter(|s| s.loss > 0.0) {
        sum.add(0.5 * n as f64 * c.ln() + scale_log_term(s, c, sigma2), 1.0);
    }
    Ok(sum.value() / samples.len() as f64)
}

/// `d/dc` of [`second_moment_scale`]:
/// `(n/2) c^{n/2-1} A - c^{n/2-2} B`, with `B` carrying the extra factor `|r|^2 / (2 sigma2)`.
pub fn grad_second_moment_scale(samples: &[WeightedSample], c: f64, sigma2: f64, n: usize) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::invalid("surrogate needs at least one sample"));
    }
    if !(c > 0.0) {
        return Err(Error::invalid("scale factor must be positive"));
    }
    let half_n = 0.5 * n as f64;
    let mut sum = ScaledSum::default();
    for s in samples.iter().filter(|s| s.loss > 0.0) {
        let lt = scale_log_term(s, c, sigma2);
        let stat = s.r2 / (2.0 * sigma2);
        sum.add(lt + (half_n - 2.0) * c.ln(), half_n * c - stat);
    }
    Ok(sum.value() / samples.len() as f64)
}

/// Stationary-point ratio `2 sum l^2 e s / (n sum l^2 e)` with `s = |r|^2 / (2 sigma2)`.
pub fn scale_ratio(samples: &[WeightedSample], c: f64, sigma2: f64, n: usize) -> Result<f64> {
    let mut num = ScaledSum::default();
    let mut den = ScaledSum::default();
    for s in samples.iter().filter(|s| s.loss > 0.0) {
        let lt = scale_log_term(s, c, sigma2);
        den.add(lt, 1.0);
        num.add(lt, s.r2 / (2.0 * sigma2));
    }
    if den.is_zero() {
        return Err(Error::NoErrorSamples);
    }
    Ok(2.0 * num.ratio(&den) / n as f64)
}

/// Solves `c = max(1 + delta, scale_ratio(c))` by damped iteration; every
/// iterate is clamped.
pub fn solve_scale_fixed_point(
    samples: &[WeightedSample],
    start: f64,
    delta: f64,
    sigma2: f64,
    n: usize,
    opts: FixedPointOptions,
) -> Result<FixedPoint<ScaleParams>> {
    let floor = 1.0 + delta;
    let mut c = start.max(floor);
    let mut iterations = 0;
    loop {
        let target = scale_ratio(samples, c, sigma2, n)?.max(floor);
        let residual = (target - c).abs();
        if residual < opts.tolerance || iterations >= opts.max_iterations {
            let last = if residual < opts.tolerance { target } else { c };
            return Ok(FixedPoint {
                params: ScaleParams::clamped(last, delta)?,
                iterations,
                residual,
                converged: residual < opts.tolerance,
            });
        }
        c = ((1.0 - opts.damping) * c + opts.damping * target).max(floor);
        iterations += 1;
    }
}

/// Scale update from everything accumulated so far, clamped to `c >= 1 + delta`.
pub fn update_c_fixed_point(
    accums: &AccumulatorSet,
    c_current: &ScaleParams,
    sigma2: f64,
    n: usize,
) -> Result<FixedPoint<ScaleParams>> {
    if accums.n_errors() == 0 {
        return Err(Error::NoErrorSamples);
    }
    let start = accums
        .scale_plugin_ratio(sigma2, n)
        .unwrap_or_else(|| c_current.c());
    solve_scale_fixed_point(
        accums.error_samples(),
        start,
        c_current.delta(),
        sigma2,
        n,
        FixedPointOptions::default(),
    )
}
