//! Estimators, second-moment surrogates, fixed-point proposal updates and the
//! adaptive importance-sampling loop.
//!
//! The loop draws a batch from the current Gaussian proposal, folds it into a
//! running [`AccumulatorSet`], refits the proposal from every sample seen so far,
//! and finally reports one self-normalized estimate over all batches, each
//! sample weighted against the proposal that produced it.

mod accum;
mod estimators;
mod sampler;
mod surrogate;

use std::io::Write;

use serde::{Deserialize, Serialize};

pub use accum::{AccumulatorSet, ScaledSum};
pub use estimators::{
    conditional_is_estimate, effective_sample_size, is_estimate_snis, is_estimate_unnormalized,
    mc_estimate, pool_weighted,
};
pub use sampler::{
    simulate_ranges, simulate_ranges_with, LinkScenario, LinkScratch, LossKind, PointSource,
    RangeResult, SampleOptions, Scenario, ThresholdScenario,
};
pub use surrogate::{
    grad_second_moment_scale, grad_second_moment_tilt, scale_ratio, second_moment_scale,
    second_moment_tilt, solve_scale_fixed_point, solve_tilt_fixed_point, tilt_ratio,
    update_c_fixed_point, update_theta_fixed_point, FixedPoint, FixedPointOptions,
};

use crate::channel::{log_weight_scale_raw, log_weight_tilt_raw, ScaleParams, TiltParams};
use crate::exec::{Exec, DEFAULT_BLOCK};
use crate::normal_map::GaussianSpec;
use crate::{Error, Result};

/// One transmission drawn from a proposal.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedSample {
    /// WER indicator or BER fraction.
    pub loss: f64,
    /// Log weight against the generating proposal.
    pub log_w: f64,
    /// `y - x`; may be dropped for zero-loss samples in scale mode.
    pub residual: Option<Vec<f64>>,
    /// `|y - x|^2`.
    pub r2: f64,
    pub codeword_id: u64,
    pub proposal_id: u32,
}

impl WeightedSample {
    pub fn new(loss: f64, log_w: f64, residual: Vec<f64>, codeword_id: u64, proposal_id: u32) -> Self {
        let r2 = residual.iter().map(|v| v * v).sum();
        Self {
            loss,
            log_w,
            residual: Some(residual),
            r2,
            codeword_id,
            proposal_id,
        }
    }

    /// Scalar-residual sample for scale-only work.
    pub fn with_r2(loss: f64, log_w: f64, r2: f64, codeword_id: u64, proposal_id: u32) -> Self {
        Self {
            loss,
            log_w,
            residual: None,
            r2,
            codeword_id,
            proposal_id,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateReport {
    pub p_hat: f64,
    pub std_err: f64,
    pub ess: f64,
    pub n_samples: u64,
    /// `1 / sqrt(p_hat N)`, the predicted relative error of plain MC.
    pub rel_err_pred: Option<f64>,
}

impl EstimateReport {
    pub fn new(p_hat: f64, std_err: f64, ess: f64, n_samples: u64) -> Self {
        let rel_err_pred = (p_hat > 0.0).then(|| 1.0 / (p_hat * n_samples as f64).sqrt());
        Self {
            p_hat,
            std_err,
            ess,
            n_samples,
            rel_err_pred,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProposalMode {
    Tilt,
    Scale,
}

/// A Gaussian proposal around the sent signal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProposalParams {
    /// The channel itself, `N(x, sigma2 I)`.
    Target,
    /// `N(x + theta, sigma2 I)`.
    Tilt(TiltParams),
    /// `N(x, c sigma2 I)`.
    Scale(ScaleParams),
}

impl ProposalParams {
    pub fn gaussian(&self, sigma2: f64, n: usize) -> Result<GaussianSpec> {
        let sigma = sigma2.sqrt();
        match self {
            ProposalParams::Target => GaussianSpec::centered(n, sigma),
            ProposalParams::Tilt(t) => {
                if t.theta.len() != n {
                    return Err(Error::invalid(format!(
                        "tilt has {} entries but the noise has {n} dimensions",
                        t.theta.len()
                    )));
                }
                GaussianSpec::new(t.theta.clone(), sigma)
            }
            ProposalParams::Scale(s) => GaussianSpec::centered(n, (s.c() * sigma2).sqrt()),
        }
    }

    /// `log pi(y|x) - log g(y|x)` for residual `r` with `|r|^2 = r2`.
    #[inline]
    pub fn log_weight(&self, r: &[f64], r2: f64, sigma2: f64) -> f64 {
        match self {
            ProposalParams::Target => 0.0,
            ProposalParams::Tilt(t) => log_weight_tilt_raw(r, &t.theta, sigma2),
            ProposalParams::Scale(s) => log_weight_scale_raw(r2, r.len(), s.c(), sigma2),
        }
    }

    fn mode(&self) -> Option<ProposalMode> {
        match self {
            ProposalParams::Target => None,
            ProposalParams::Tilt(_) => Some(ProposalMode::Tilt),
            ProposalParams::Scale(_) => Some(ProposalMode::Scale),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProposalState {
    pub mode: ProposalMode,
    pub params: ProposalParams,
    pub iteration: usize,
}

#[derive(Debug, Clone)]
pub struct AdaptiveConfig {
    pub mode: ProposalMode,
    /// Sample budget of each iteration; its length is the iteration count.
    pub iteration_samples: Vec<u64>,
    pub initial: ProposalParams,
    pub sigma2: f64,
    pub source: PointSource,
    /// Index of the first sample; iteration `t` continues where `t - 1` stopped.
    pub start_index: u64,
    pub exec: Exec,
    pub block: u64,
    pub keep_samples: bool,
}

impl AdaptiveConfig {
    /// `iterations` batches of `per_iteration` samples each.
    pub fn new(
        mode: ProposalMode,
        iterations: usize,
        per_iteration: u64,
        initial: ProposalParams,
        sigma2: f64,
        source: PointSource,
    ) -> Self {
        Self {
            mode,
            iteration_samples: vec![per_iteration; iterations],
            initial,
            sigma2,
            source,
            start_index: 0,
            exec: Exec::default(),
            block: DEFAULT_BLOCK,
            keep_samples: false,
        }
    }

    /// Spreads `total` samples over `iterations` batches, earlier batches taking the remainder.
    pub fn split_budget(total: u64, iterations: usize) -> Vec<u64> {
        let t = iterations.max(1) as u64;
        (0..t).map(|i| total / t + u64::from(i < total % t)).collect()
    }
}

/// One line of the run log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iteration: usize,
    pub proposal: ProposalParams,
    pub samples: u64,
    pub error_events: u64,
    /// ESS of this iteration's own weights.
    pub ess: f64,
    /// Whether the proposal was refit after this iteration.
    pub updated: bool,
    pub fixed_point_iterations: Option<usize>,
    pub fixed_point_residual: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct AdaptiveOutcome {
    pub report: EstimateReport,
    /// No sample in any iteration had a positive loss; `report.p_hat` is then 0.
    pub zero_events: bool,
    /// Proposal used by each iteration, followed by the final refit when one happened.
    pub history: Vec<ProposalState>,
    pub run_log: Vec<IterationRecord>,
    pub accums: AccumulatorSet,
    /// Every sample, when `keep_samples` was set.
    pub samples: Vec<WeightedSample>,
}

fn validate(scenario_dim: usize, cfg: &AdaptiveConfig) -> Result<()> {
    if cfg.iteration_samples.is_empty() {
        return Err(Error::invalid("adaptive loop needs at least one iteration"));
    }
    if cfg.iteration_samples.contains(&0) {
        return Err(Error::invalid("every iteration needs a positive sample budget"));
    }
    if !(cfg.sigma2 > 0.0 && cfg.sigma2.is_finite()) {
        return Err(Error::invalid("sigma2 must be positive and finite"));
    }
    if cfg.initial.mode() != Some(cfg.mode) {
        return Err(Error::invalid("initial proposal does not match the adaptation mode"));
    }
    if let ProposalParams::Tilt(t) = &cfg.initial {
        if t.theta.len() != scenario_dim {
            return Err(Error::invalid(format!(
                "initial tilt has {} entries, noise dimension is {scenario_dim}",
                t.theta.len()
            )));
        }
    }
    Ok(())
}

/// Refit from all accumulated samples; `None` when there is nothing to fit.
fn refit(
    accums: &AccumulatorSet,
    current: &ProposalParams,
    sigma2: f64,
    n: usize,
) -> Result<Option<(ProposalParams, usize, f64)>> {
    let fitted = match current {
        ProposalParams::Tilt(t) => update_theta_fixed_point(accums, t, sigma2)
            .map(|fp| (ProposalParams::Tilt(fp.params), fp.iterations, fp.residual)),
        ProposalParams::Scale(s) => update_c_fixed_point(accums, s, sigma2, n)
            .map(|fp| (ProposalParams::Scale(fp.params), fp.iterations, fp.residual)),
        ProposalParams::Target => return Ok(None),
    };
    match fitted {
        Ok(v) => Ok(Some(v)),
        Err(Error::NoErrorSamples) => Ok(None),
        Err(e) => Err(e),
    }
}

/// Adaptive importance sampling with pooled self-normalization.
pub fn adaptive_loop<S: Scenario>(scenario: &S, cfg: &AdaptiveConfig) -> Result<AdaptiveOutcome> {
    let n = scenario.noise_dim();
    validate(n, cfg)?;
    let opts = SampleOptions {
        exec: cfg.exec,
        block: cfg.block,
        keep_samples: cfg.keep_samples,
    };
    let mut current = cfg.initial.clone();
    let mut all = AccumulatorSet::new(n);
    let mut samples = Vec::new();
    let mut history = Vec::new();
    let mut run_log = Vec::new();
    let mut cursor = cfg.start_index;
    let iterations = cfg.iteration_samples.len();

    for (t, &budget) in cfg.iteration_samples.iter().enumerate() {
        history.push(ProposalState {
            mode: cfg.mode,
            params: current.clone(),
            iteration: t,
        });
        let range = cursor..cursor + budget;
        cursor += budget;
        let batch = simulate_ranges(
            scenario,
            &current,
            cfg.sigma2,
            &[range],
            t as u32,
            cfg.source,
            opts,
        )?
        .pop()
        .expect("one range in, one result out");
        all.merge(&batch.accums);
        samples.extend(batch.samples);

        let mut record = IterationRecord {
            iteration: t,
            proposal: current.clone(),
            samples: budget,
            error_events: batch.accums.n_errors(),
            ess: batch.accums.ess(),
            updated: false,
            fixed_point_iterations: None,
            fixed_point_residual: None,
        };
        if t + 1 < iterations {
            if let Some((next, iters, residual)) = refit(&all, &current, cfg.sigma2, n)? {
                record.updated = true;
                record.fixed_point_iterations = Some(iters);
                record.fixed_point_residual = Some(residual);
                current = next;
            }
        }
        run_log.push(record);
    }

    let zero_events = all.n_errors() == 0;
    let report = if zero_events {
        EstimateReport::new(0.0, 0.0, all.ess(), all.n_samples())
    } else {
        all.snis_report()?
    };
    Ok(AdaptiveOutcome {
        report,
        zero_events,
        history,
        run_log,
        accums: all,
        samples,
    })
}

/// Writes the run log as one JSON object per line.
pub fn write_run_log<W: Write>(records: &[IterationRecord], mut out: W) -> Result<()> {
    for r in records {
        serde_json::to_writer(&mut out, r)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lowdisc::SequenceKind;

    #[test]
    fn budget_split() {
        assert_eq!(AdaptiveConfig::split_budget(10, 3), vec![4, 3, 3]);
        assert_eq!(AdaptiveConfig::split_budget(9, 3), vec![3, 3, 3]);
    }

    #[test]
    fn rejects_bad_configs() {
        let toy = ThresholdScenario { threshold: 4.0 };
        let src = PointSource::new(SequenceKind::PseudoRandom, 0);
        let mut cfg = AdaptiveConfig::new(
            ProposalMode::Scale,
            0,
            10,
            ProposalParams::Scale(ScaleParams::new(2.0, 0.1).unwrap()),
            1.0,
            src,
        );
        assert!(adaptive_loop(&toy, &cfg).is_err());
        cfg.iteration_samples = vec![10, 0];
        assert!(adaptive_loop(&toy, &cfg).is_err());
        cfg.iteration_samples = vec![10];
        cfg.initial = ProposalParams::Tilt(TiltParams::zeros(1));
        assert!(adaptive_loop(&toy, &cfg).is_err());
        cfg.mode = ProposalMode::Tilt;
        cfg.initial = ProposalParams::Tilt(TiltParams::zeros(2));
        assert!(adaptive_loop(&toy, &cfg).is_err());
    }

    #[test]
    fn zero_events_are_flagged_not_invented() {
        let toy = ThresholdScenario { threshold: 40.0 };
        let cfg = AdaptiveConfig::new(
            ProposalMode::Scale,
            3,
            500,
            ProposalParams::Scale(ScaleParams::new(2.0, 0.1).unwrap()),
            1.0,
            PointSource::new(SequenceKind::PseudoRandom, 1),
        );
        let out = adaptive_loop(&toy, &cfg).unwrap();
        assert!(out.zero_events);
        assert_eq!(out.report.p_hat, 0.0);
        assert!(out.run_log.iter().all(|r| !r.updated));
        assert!(out
            .history
            .iter()
            .all(|h| h.params == ProposalParams::Scale(ScaleParams::new(2.0, 0.1).unwrap())));
    }

    #[test]
    fn run_log_is_json_lines() {
        let toy = ThresholdScenario { threshold: 2.0 };
        let cfg = AdaptiveConfig::new(
            ProposalMode::Tilt,
            2,
            1000,
            ProposalParams::Tilt(TiltParams::new(vec![1.0]).unwrap()),
            1.0,
            PointSource::new(SequenceKind::PseudoRandom, 2),
        );
        let out = adaptive_loop(&toy, &cfg).unwrap();
        let mut buf = Vec::new();
        write_run_log(&out.run_log, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<_> = text.lines().collect();
        assert_eq!(lines.len(), 2);
        let first: IterationRecord = serde_json::from_str(lines[0]).unwrap();
        assert_eq!(first, out.run_log[0]);
        assert!(first.updated);
    }
}
