//! Mergeable log-space accumulators for pooled importance-sampling estimates.

use super::{EstimateReport, WeightedSample};
use crate::{Error, Result};

/// A running sum kept as `acc * exp(shift)`.
///
/// Terms are added as `(log_magnitude, signed factor)`, so products of huge or
/// tiny weights with signed statistics never leave double range.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaledSum {
    shift: f64,
    acc: f64,
}

impl Default for ScaledSum {
    fn default() -> Self {
        Self {
            shift: f64::NEG_INFINITY,
            acc: 0.0,
        }
    }
}

impl ScaledSum {
    /// Adds `factor * exp(log_mag)`.
    #[inline]
    pub fn add(&mut self, log_mag: f64, factor: f64) {
        if factor == 0.0 || log_mag == f64::NEG_INFINITY {
            return;
        }
        if self.shift == f64::NEG_INFINITY {
            self.shift = log_mag;
            self.acc = factor;
        } else if log_mag > self.shift {
            self.acc = self.acc * (self.shift - log_mag).exp() + factor;
            self.shift = log_mag;
        } else {
            self.acc += factor * (log_mag - self.shift).exp();
        }
    }

    pub fn merge(&mut self, other: &ScaledSum) {
        self.add(other.shift, other.acc);
    }

    pub fn is_zero(&self) -> bool {
        self.acc == 0.0
    }

    /// Plain value; may overflow or underflow.
    pub fn value(&self) -> f64 {
        if self.acc == 0.0 {
            0.0
        } else {
            self.acc * self.shift.exp()
        }
    }

    /// `ln(value)` for positive sums.
    pub fn ln(&self) -> f64 {
        if self.acc <= 0.0 {
            f64::NEG_INFINITY
        } else {
            self.acc.ln() + self.shift
        }
    }

    /// `self / other`.
    pub fn ratio(&self, other: &ScaledSum) -> f64 {
        if self.acc == 0.0 {
            return 0.0;
        }
        self.acc / other.acc * (self.shift - other.shift).exp()
    }

    /// `self / other^2`.
    pub fn ratio_to_square(&self, other: &ScaledSum) -> f64 {
        if self.acc == 0.0 {
            return 0.0;
        }
        self.acc / (other.acc * other.acc) * (self.shift - 2.0 * other.shift).exp()
    }
}

/// Weighted mean and centered second moment of a value stream, in log-weight space.
///
/// Welford-style updates and pairwise merges keep `sum v (x - mean)^2` free of
/// the cancellation in `sum v x^2 - (sum v) mean^2`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
struct WeightedMoments {
    weight: ScaledSum,
    mean: f64,
    m2: ScaledSum,
}

impl WeightedMoments {
    fn add(&mut self, log_v: f64, x: f64) {
        if log_v == f64::NEG_INFINITY {
            return;
        }
        if self.weight.is_zero() {
            self.weight.add(log_v, 1.0);
            self.mean = x;
            return;
        }
        let ln_old = self.weight.ln();
        self.weight.add(log_v, 1.0);
        let ln_new = self.weight.ln();
        let d = x - self.mean;
        self.mean += (log_v - ln_new).exp().min(1.0) * d;
        // v d^2 (1 - v/W_new), with 1 - v/W_new = W_old/W_new taken in log space
        if d != 0.0 {
            self.m2.add(log_v + 2.0 * d.abs().ln() + ln_old - ln_new, 1.0);
        }
    }

    fn merge(&mut self, other: &WeightedMoments) {
        if other.weight.is_zero() {
            return;
        }
        if self.weight.is_zero() {
            *self = *other;
            return;
        }
        let (ln_a, ln_b) = (self.weight.ln(), other.weight.ln());
        self.weight.merge(&other.weight);
        let ln_new = self.weight.ln();
        let d = other.mean - self.mean;
        self.mean += (ln_b - ln_new).exp().min(1.0) * d;
        self.m2.merge(&other.m2);
        // d^2 W_a W_b / W_new
        if d != 0.0 {
            self.m2.add(ln_a + ln_b - ln_new + 2.0 * d.abs().ln(), 1.0);
        }
    }
}

/// Sufficient statistics of a weighted sample stream.
///
/// Holds `sum w`, `sum w l`, `sum w^2`, `sum w^2 l^2`, the `w^2`-weighted mean and
/// centered second moment of the losses, the tilt
/// numerator `sum w^2 l^2 r` (vector), the scale numerator `sum w^2 l^2 |r|^2`,
/// and a copy of every sample with positive loss. Those error samples are all
/// the fixed-point updates need, because samples with zero loss drop out of
/// every second-moment term.
#[derive(Debug, Clone, PartialEq)]
pub struct AccumulatorSet {
    dim: usize,
    n: u64,
    n_errors: u64,
    sum_w: ScaledSum,
    sum_wl: ScaledSum,
    sum_w2: ScaledSum,
    sum_w2l2: ScaledSum,
    loss_moments: WeightedMoments,
    tilt_num: Vec<ScaledSum>,
    scale_num: ScaledSum,
    errors: Vec<WeightedSample>,
}

impl AccumulatorSet {
    pub fn new(dim: usize) -> Self {
        Self {
            dim,
            n: 0,
            n_errors: 0,
            sum_w: ScaledSum::default(),
            sum_wl: ScaledSum::default(),
            sum_w2: ScaledSum::default(),
            sum_w2l2: ScaledSum::default(),
            loss_moments: WeightedMoments::default(),
            tilt_num: vec![ScaledSum::default(); dim],
            scale_num: ScaledSum::default(),
            errors: Vec::new(),
        }
    }

    pub fn dimension(&self) -> usize {
        self.dim
    }

    pub fn n_samples(&self) -> u64 {
        self.n
    }

    /// Samples with positive loss.
    pub fn n_errors(&self) -> u64 {
        self.n_errors
    }

    pub fn error_samples(&self) -> &[WeightedSample] {
        &self.errors
    }

    pub fn push(&mut self, sample: &WeightedSample) {
        let lw = sample.log_w;
        let l = sample.loss;
        self.n += 1;
        self.sum_w.add(lw, 1.0);
        self.sum_w2.add(2.0 * lw, 1.0);
        self.loss_moments.add(2.0 * lw, l);
        if l > 0.0 {
            self.n_errors += 1;
            self.sum_wl.add(lw, l);
            self.sum_w2l2.add(2.0 * lw, l * l);
            if let Some(r) = &sample.residual {
                for (acc, &rj) in self.tilt_num.iter_mut().zip(r) {
                    acc.add(2.0 * lw, l * l * rj);
                }
            }
            self.scale_num.add(2.0 * lw, l * l * sample.r2);
            self.errors.push(sample.clone());
        }
    }

    /// Folds `other` in; `other`'s samples are treated as coming after ours.
    pub fn merge(&mut self, other: &AccumulatorSet) {
        assert_eq!(self.dim, other.dim, "merging accumulators of different dimension");
        self.n += other.n;
        self.n_errors += other.n_errors;
        self.sum_w.merge(&other.sum_w);
        self.sum_wl.merge(&other.sum_wl);
        self.sum_w2.merge(&other.sum_w2);
        self.sum_w2l2.merge(&other.sum_w2l2);
        self.loss_moments.merge(&other.loss_moments);
        for (a, b) in self.tilt_num.iter_mut().zip(&other.tilt_num) {
            a.merge(b);
        }
        self.scale_num.merge(&other.scale_num);
        self.errors.extend_from_slice(&other.errors);
    }

    /// `(sum w)^2 / sum w^2`.
    pub fn ess(&self) -> f64 {
        if self.sum_w.is_zero() {
            return 0.0;
        }
        1.0 / self.sum_w2.ratio_to_square(&self.sum_w)
    }

    /// Self-normalized estimate with delta-method standard error
    /// `sqrt(sum w^2 (l - p)^2) / sum w`.
    pub fn snis_report(&self) -> Result<EstimateReport> {
        if self.n == 0 {
            return Err(Error::invalid("no samples accumulated"));
        }
        if self.sum_w.is_zero() {
            return Err(Error::DegenerateWeights("all pooled weights are zero".into()));
        }
        let p = self.sum_wl.ratio(&self.sum_w);
        // sum w^2 (l - p)^2 = centered moment about the w^2-mean q, plus (q - p)^2 sum w^2
        let m = &self.loss_moments;
        let var = m.m2.ratio_to_square(&self.sum_w)
            + (m.mean - p).powi(2) * self.sum_w2.ratio_to_square(&self.sum_w);
        Ok(EstimateReport::new(p, var.max(0.0).sqrt(), self.ess(), self.n))
    }

    /// Plain Monte Carlo report; valid when every weight is 1.
    pub fn mc_report(&self) -> Result<EstimateReport> {
        if self.n == 0 {
            return Err(Error::invalid("no samples accumulated"));
        }
        let n = self.n as f64;
        let mean = self.sum_wl.value() / n;
        let se = if self.n > 1 {
            let m = &self.loss_moments;
            let ss = m.m2.value() + n * (m.mean - mean).powi(2);
            (ss / (n - 1.0) / n).sqrt()
        } else {
            0.0
        };
        Ok(EstimateReport::new(mean, se, n, self.n))
    }

    /// `sum w^2 l^2 r / sum w^2 l^2`: the tilt ratio at the sampling proposals.
    pub fn tilt_plugin_ratio(&self) -> Option<Vec<f64>> {
        if self.sum_w2l2.is_zero() || self.errors.iter().any(|s| s.residual.is_none()) {
            return None;
        }
        Some(self.tilt_num.iter().map(|t| t.ratio(&self.sum_w2l2)).collect())
    }

    /// `sum w^2 l^2 |r|^2 / (n sigma2 sum w^2 l^2)`: the scale ratio at the sampling proposals.
    pub fn scale_plugin_ratio(&self, sigma2: f64, n: usize) -> Option<f64> {
        if self.sum_w2l2.is_zero() {
            return None;
        }
        Some(self.scale_num.ratio(&self.sum_w2l2) / (n as f64 * sigma2))
    }
}
