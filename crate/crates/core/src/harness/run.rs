use std::ops::Range;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::config::{ExperimentConfig, Method};
use crate::adaptive::{
    adaptive_loop, simulate_ranges_with, AccumulatorSet, AdaptiveConfig, EstimateReport,
    IterationRecord, LinkScenario, PointSource, ProposalMode, ProposalParams, SampleOptions,
    Scenario,
};
use crate::channel::{sigma2_from_snr, ScaleParams, TiltParams};
use crate::lowdisc::prng::derive_key;
use crate::lowdisc::{PointStream, SequenceKind};
use crate::{Error, Result};

/// Key labels separating the bit stream from the noise stream of one seed.
const BIT_STREAM: u64 = 0x6269_7473;
const NOISE_STREAM: u64 = 0x6e6f_6973;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub snr_db: f64,
    pub method: Method,
    pub p_hat: f64,
    pub std_err: f64,
    pub ess: f64,
    pub n_samples: u64,
    pub zero_events: bool,
    pub wall_time_s: f64,
    pub seed: u64,
}

impl ResultRow {
    /// The row with its wall time zeroed, for reproducibility checks.
    pub fn without_timing(&self) -> Self {
        Self {
            wall_time_s: 0.0,
            ..self.clone()
        }
    }
}

/// Run-log line of one adaptive IS iteration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunLogEntry {
    pub snr_db: f64,
    pub method: Method,
    pub seed: u64,
    #[serde(flatten)]
    pub record: IterationRecord,
}

/// Result of one (SNR, method) cell.
#[derive(Debug, Clone)]
pub struct CellOutcome {
    pub row: ResultRow,
    pub run_log: Vec<RunLogEntry>,
}

#[derive(Debug, Clone)]
pub struct ExperimentOutcome {
    pub rows: Vec<ResultRow>,
    pub run_log: Vec<RunLogEntry>,
}

/// Seed of the codeword bits.
pub fn bit_seed(seed: u64) -> u64 {
    derive_key(seed, BIT_STREAM)
}

/// Seed of the pseudo-random and scrambled point streams.
pub fn noise_seed(seed: u64) -> u64 {
    derive_key(seed, NOISE_STREAM)
}

/// Index ranges of the packs: pack `p` holds words `p*N .. (p+1)*N`.
pub fn pack_ranges(words_per_pack: u64, packs: u64) -> Vec<Range<u64>> {
    (0..packs)
        .map(|p| p * words_per_pack..(p + 1) * words_per_pack)
        .collect()
}

pub fn link_scenario(cfg: &ExperimentConfig) -> Result<LinkScenario> {
    LinkScenario::new(cfg.scheme()?, cfg.word_bits()?, cfg.loss, bit_seed(cfg.seed))
}

/// Plain estimate under the channel itself, over packs of words.
///
/// `make_points(cursor)` supplies the uniform points; it is the only thing that
/// differs between the MC and QMC methods. The estimate pools all packs; its
/// standard error comes from the spread of the per-pack means when there are at
/// least two packs and from the per-word variance otherwise.
pub fn estimate_plain<S, P, F>(
    scenario: &S,
    sigma2: f64,
    words_per_pack: u64,
    packs: u64,
    make_points: F,
    opts: SampleOptions,
) -> Result<(EstimateReport, AccumulatorSet)>
where
    S: Scenario,
    P: PointStream,
    F: Fn(u64) -> Result<P> + Sync + Send,
{
    let ranges = pack_ranges(words_per_pack, packs);
    let parts = simulate_ranges_with(
        scenario,
        &ProposalParams::Target,
        sigma2,
        &ranges,
        0,
        make_points,
        opts,
    )?;
    let mut total = AccumulatorSet::new(scenario.noise_dim());
    let mut means = Vec::with_capacity(parts.len());
    for part in &parts {
        total.merge(&part.accums);
        means.push(part.accums.mc_report()?.p_hat);
    }
    let pooled = total.mc_report()?;
    let std_err = if means.len() >= 2 {
        let k = means.len() as f64;
        let mean = means.iter().sum::<f64>() / k;
        let var = means.iter().map(|m| (m - mean).powi(2)).sum::<f64>() / (k - 1.0);
        (var / k).sqrt()
    } else {
        pooled.std_err
    };
    let report = EstimateReport::new(pooled.p_hat, std_err, pooled.ess, pooled.n_samples);
    Ok((report, total))
}

/// Initial proposal of an IS method at noise variance `sigma2`.
pub fn initial_proposal(cfg: &ExperimentConfig, method: Method, dim: usize) -> Result<ProposalParams> {
    match method {
        Method::IsTilt => Ok(ProposalParams::Tilt(TiltParams::new(vec![cfg.init_tilt; dim])?)),
        Method::IsScale => {
            let c0 = 10f64.powf(cfg.init_proposal_snr_offset / 10.0);
            Ok(ProposalParams::Scale(ScaleParams::clamped(c0, cfg.delta)?))
        }
        _ => Err(Error::invalid(format!("{method} has no proposal"))),
    }
}

/// Runs one cell of the sweep.
pub fn run_cell(cfg: &ExperimentConfig, snr_db: f64, method: Method) -> Result<CellOutcome> {
    let start = Instant::now();
    let scenario = link_scenario(cfg)?;
    let sigma2 = sigma2_from_snr(snr_db);
    let dim = scenario.noise_dim();
    let opts = SampleOptions {
        exec: cfg.exec,
        block: cfg.block,
        keep_samples: false,
    };
    let (report, zero_events, records) = match method.sequence_kind() {
        Some(kind) => {
            let source = PointSource::new(kind, noise_seed(cfg.seed));
            let (report, accums) = estimate_plain(
                &scenario,
                sigma2,
                cfg.words_per_pack,
                cfg.packs,
                |cursor| source.generator(dim, cursor),
                opts,
            )?;
            (report, accums.n_errors() == 0, Vec::new())
        }
        None => {
            let mode = if method == Method::IsTilt {
                ProposalMode::Tilt
            } else {
                ProposalMode::Scale
            };
            let adaptive = AdaptiveConfig {
                mode,
                iteration_samples: AdaptiveConfig::split_budget(
                    cfg.total_samples(),
                    cfg.adapt_iterations,
                ),
                initial: initial_proposal(cfg, method, dim)?,
                sigma2,
                source: PointSource::new(cfg.is_points, noise_seed(cfg.seed)),
                start_index: 0,
                exec: cfg.exec,
                block: cfg.block,
                keep_samples: false,
            };
            let out = adaptive_loop(&scenario, &adaptive)?;
            (out.report, out.zero_events, out.run_log)
        }
    };
    let row = ResultRow {
        snr_db,
        method,
        p_hat: report.p_hat,
        std_err: report.std_err,
        ess: report.ess,
        n_samples: report.n_samples,
        zero_events,
        wall_time_s: start.elapsed().as_secs_f64(),
        seed: cfg.seed,
    };
    let run_log = records
        .into_iter()
        .map(|record| RunLogEntry {
            snr_db,
            method,
            seed: cfg.seed,
            record,
        })
        .collect();
    Ok(CellOutcome { row, run_log })
}

/// Every (SNR, method) cell, rows ordered by SNR and then method as listed.
pub fn run_experiment_logged(cfg: &ExperimentConfig) -> Result<ExperimentOutcome> {
    cfg.validate()?;
    let mut rows = Vec::new();
    let mut run_log = Vec::new();
    for &snr in &cfg.snr_list {
        for &method in &cfg.methods {
            let cell = run_cell(cfg, snr, method)?;
            log::info!(
                "snr {snr} dB, {method}: p_hat {:e}, std_err {:e}{}",
                cell.row.p_hat,
                cell.row.std_err,
                if cell.row.zero_events { ", no error events" } else { "" }
            );
            rows.push(cell.row);
            run_log.extend(cell.run_log);
        }
    }
    Ok(ExperimentOutcome { rows, run_log })
}

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Vec<ResultRow>> {
    Ok(run_experiment_logged(cfg)?.rows)
}

/// Point kind that feeds a method.
pub fn point_kind(cfg: &ExperimentConfig, method: Method) -> SequenceKind {
    method.sequence_kind().unwrap_or(cfg.is_points)
}
