//! Link-level sample generation over index ranges.
//!
//! Sample `i` always uses codeword `i` and point `i` of the point source, so the
//! output is independent of how ranges are split into blocks or threads.

use std::ops::Range;

use serde::{Deserialize, Serialize};

use super::accum::AccumulatorSet;
use super::{ProposalParams, WeightedSample};
use crate::exec::{blocks, map_ordered, Exec, DEFAULT_BLOCK};
use crate::lowdisc::{PointStream, SequenceGenerator, SequenceKind};
use crate::modem::{count_bit_errors, fill_random_bits, ModulationScheme};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LossKind {
    Ber,
    Wer,
}

/// A system whose loss depends on the noise added to sample `index`.
pub trait Scenario: Sync {
    type Scratch: Send;

    /// Real noise dimensions per sample.
    fn noise_dim(&self) -> usize;

    fn scratch(&self) -> Self::Scratch;

    /// Loss in `[0,1]` and codeword identifier for sample `index`.
    fn evaluate(&self, index: u64, noise: &[f64], scratch: &mut Self::Scratch) -> (f64, u64);
}

/// Random words, modulation, AWGN, hard decisions and a BER or WER loss.
#[derive(Debug, Clone)]
pub struct LinkScenario {
    scheme: ModulationScheme,
    bits_per_word: usize,
    loss: LossKind,
    bit_seed: u64,
    blocks_per_word: u64,
}

impl LinkScenario {
    pub fn new(
        scheme: ModulationScheme,
        bits_per_word: usize,
        loss: LossKind,
        bit_seed: u64,
    ) -> Result<Self> {
        let k = scheme.bits_per_symbol();
        if bits_per_word == 0 || bits_per_word % k != 0 {
            return Err(Error::invalid(format!(
                "bits per word ({bits_per_word}) must be a positive multiple of {k}"
            )));
        }
        Ok(Self {
            scheme,
            bits_per_word,
            loss,
            bit_seed,
            blocks_per_word: bits_per_word.div_ceil(64) as u64,
        })
    }

    pub fn scheme(&self) -> &ModulationScheme {
        &self.scheme
    }

    pub fn bits_per_word(&self) -> usize {
        self.bits_per_word
    }

    /// The message bits of word `index`.
    pub fn word_bits(&self, index: u64) -> Vec<u8> {
        let mut bits = vec![0u8; self.bits_per_word];
        fill_random_bits(self.bit_seed, index * self.blocks_per_word, &mut bits);
        bits
    }
}

#[derive(Debug)]
pub struct LinkScratch {
    bits: Vec<u8>,
    decided: Vec<u8>,
    signal: Vec<f64>,
}

impl Scenario for LinkScenario {
    type Scratch = LinkScratch;

    fn noise_dim(&self) -> usize {
        self.bits_per_word / self.scheme.bits_per_symbol() * self.scheme.real_dims_per_symbol()
    }

    fn scratch(&self) -> LinkScratch {
        LinkScratch {
            bits: vec![0; self.bits_per_word],
            decided: vec![0; self.bits_per_word],
            signal: vec![0.0; self.noise_dim()],
        }
    }

    fn evaluate(&self, index: u64, noise: &[f64], scratch: &mut LinkScratch) -> (f64, u64) {
        fill_random_bits(self.bit_seed, index * self.blocks_per_word, &mut scratch.bits);
        self.scheme.modulate_real(&scratch.bits, &mut scratch.signal);
        for (x, e) in scratch.signal.iter_mut().zip(noise) {
            *x += e;
        }
        self.scheme.demodulate_real(&scratch.signal, &mut scratch.decided);
        let errors = count_bit_errors(&scratch.bits, &scratch.decided);
        let loss = match self.loss {
            LossKind::Ber => errors as f64 / self.bits_per_word as f64,
            LossKind::Wer => (errors > 0) as u8 as f64,
        };
        let codeword = scratch
            .bits
            .iter()
            .take(64)
            .fold(0u64, |acc, &b| (acc << 1) | b as u64);
        (loss, codeword)
    }
}

/// One-dimensional toy: `x = 0`, loss `1{y > threshold}`.
#[derive(Debug, Clone, Copy)]
pub struct ThresholdScenario {
    pub threshold: f64,
}

impl Scenario for ThresholdScenario {
    type Scratch = ();

    fn noise_dim(&self) -> usize {
        1
    }

    fn scratch(&self) {}

    fn evaluate(&self, _index: u64, noise: &[f64], _: &mut ()) -> (f64, u64) {
        ((noise[0] > self.threshold) as u8 as f64, 0)
    }
}

/// Which point stream feeds the Gaussian transform.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PointSource {
    pub kind: SequenceKind,
    pub seed: u64,
}

impl PointSource {
    pub fn new(kind: SequenceKind, seed: u64) -> Self {
        Self { kind, seed }
    }

    /// Generator for `dim` dimensions starting at `cursor`, padding Sobol past the table.
    pub fn generator(&self, dim: usize, cursor: u64) -> Result<SequenceGenerator> {
        SequenceGenerator::at_cursor(self.kind, dim, self.seed, cursor, true)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SampleOptions {
    pub exec: Exec,
    pub block: u64,
    pub keep_samples: bool,
}

impl Default for SampleOptions {
    fn default() -> Self {
        Self {
            exec: Exec::default(),
            block: DEFAULT_BLOCK,
            keep_samples: false,
        }
    }
}

/// Accumulated statistics for one index range, plus the raw samples when kept.
#[derive(Debug, Clone)]
pub struct RangeResult {
    pub accums: AccumulatorSet,
    pub samples: Vec<WeightedSample>,
}

impl RangeResult {
    fn empty(dim: usize) -> Self {
        Self {
            accums: AccumulatorSet::new(dim),
            samples: Vec::new(),
        }
    }

    fn absorb(&mut self, other: RangeResult) {
        self.accums.merge(&other.accums);
        self.samples.extend(other.samples);
    }
}

fn simulate_block<S, P>(
    scenario: &S,
    proposal: &ProposalParams,
    sigma2: f64,
    range: Range<u64>,
    proposal_id: u32,
    mut points: P,
    keep: bool,
) -> Result<RangeResult>
where
    S: Scenario,
    P: PointStream,
{
    let n = scenario.noise_dim();
    if points.dimension() != n {
        return Err(Error::invalid(format!(
            "point source has dimension {} but the scenario needs {n}",
            points.dimension()
        )));
    }
    let gaussian = proposal.gaussian(sigma2, n)?;
    let mut scratch = scenario.scratch();
    let mut u = vec![0.0; n];
    let mut noise = vec![0.0; n];
    let mut out = RangeResult::empty(n);
    for index in range {
        points.fill_next(&mut u);
        gaussian.map_into(&u, &mut noise)?;
        let (loss, codeword) = scenario.evaluate(index, &noise, &mut scratch);
        let r2: f64 = noise.iter().map(|e| e * e).sum();
        let log_w = proposal.log_weight(&noise, r2, sigma2);
        // residual vectors are only stored for samples that carry an error
        let sample = WeightedSample {
            loss,
            log_w,
            residual: (loss > 0.0 || keep).then(|| noise.clone()),
            r2,
            codeword_id: codeword,
            proposal_id,
        };
        out.accums.push(&sample);
        if keep {
            out.samples.push(sample);
        }
    }
    Ok(out)
}

/// Simulates every range under `proposal` and returns one result per range.
///
/// `make_points(cursor)` must return a stream whose first point is point `cursor`.
pub fn simulate_ranges_with<S, P, F>(
    scenario: &S,
    proposal: &ProposalParams,
    sigma2: f64,
    ranges: &[Range<u64>],
    proposal_id: u32,
    make_points: F,
    opts: SampleOptions,
) -> Result<Vec<RangeResult>>
where
    S: Scenario,
    P: PointStream,
    F: Fn(u64) -> Result<P> + Sync + Send,
{
    let jobs: Vec<(usize, Range<u64>)> = ranges
        .iter()
        .enumerate()
        .flat_map(|(i, r)| blocks(r.clone(), opts.block).into_iter().map(move |b| (i, b)))
        .collect();
    let parts = map_ordered(opts.exec, &jobs, |(_, block)| {
        let points = make_points(block.start)?;
        simulate_block(
            scenario,
            proposal,
            sigma2,
            block.clone(),
            proposal_id,
            points,
            opts.keep_samples,
        )
    });
    let dim = scenario.noise_dim();
    let mut results: Vec<RangeResult> = ranges.iter().map(|_| RangeResult::empty(dim)).collect();
    for ((owner, _), part) in jobs.iter().zip(parts) {
        results[*owner].absorb(part?);
    }
    Ok(results)
}

/// [`simulate_ranges_with`] using a [`PointSource`].
pub fn simulate_ranges<S: Scenario>(
    scenario: &S,
    proposal: &ProposalParams,
    sigma2: f64,
    ranges: &[Range<u64>],
    proposal_id: u32,
    source: PointSource,
    opts: SampleOptions,
) -> Result<Vec<RangeResult>> {
    let dim = scenario.noise_dim();
    simulate_ranges_with(
        scenario,
        proposal,
        sigma2,
        ranges,
        proposal_id,
        |cursor| source.generator(dim, cursor),
        opts,
    )
}
