use std::collections::BTreeSet;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::adaptive::LossKind;
use crate::channel::DEFAULT_DELTA;
use crate::exec::{Exec, DEFAULT_BLOCK};
use crate::lowdisc::SequenceKind;
use crate::modem::ModulationScheme;
use crate::{Error, Result};

/// Estimation method of one result row.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Mc,
    QmcHalton,
    QmcSobol,
    RqmcSobol,
    IsTilt,
    IsScale,
}

impl Method {
    pub const ALL: [Method; 6] = [
        Method::Mc,
        Method::QmcHalton,
        Method::QmcSobol,
        Method::RqmcSobol,
        Method::IsTilt,
        Method::IsScale,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::Mc => "mc",
            Method::QmcHalton => "qmc-halton",
            Method::QmcSobol => "qmc-sobol",
            Method::RqmcSobol => "rqmc-sobol",
            Method::IsTilt => "is-tilt",
            Method::IsScale => "is-scale",
        }
    }

    pub fn is_importance_sampling(self) -> bool {
        matches!(self, Method::IsTilt | Method::IsScale)
    }

    /// Point stream of the non-IS methods.
    pub fn sequence_kind(self) -> Option<SequenceKind> {
        match self {
            Method::Mc => Some(SequenceKind::PseudoRandom),
            Method::QmcHalton => Some(SequenceKind::Halton),
            Method::QmcSobol => Some(SequenceKind::Sobol),
            Method::RqmcSobol => Some(SequenceKind::ScrambledSobol),
            Method::IsTilt | Method::IsScale => None,
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| Error::config("method", format!("unknown method `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Modulation {
    Bpsk,
    Qam,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OutputFormat {
    #[default]
    Csv,
    JsonLines,
}

impl FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "json-lines" => Ok(OutputFormat::JsonLines),
            _ => Err(Error::config("format", format!("expected csv or json-lines, got `{s}`"))),
        }
    }
}

/// One experiment: every method at every SNR.
///
/// Read from flat `key = value` files whose keys mirror the CLI flags. Lines
/// starting with `#` are comments; list values are comma separated.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub modulation: Modulation,
    /// QAM order; ignored for BPSK.
    pub order: usize,
    /// Defaults to one symbol per word.
    pub bits_per_word: Option<usize>,
    pub snr_list: Vec<f64>,
    pub methods: Vec<Method>,
    /// Words per pack (`N`).
    pub words_per_pack: u64,
    /// Number of packs (`N_s`).
    pub packs: u64,
    pub loss: LossKind,
    /// Adaptation rounds (`T`) of the IS methods.
    pub adapt_iterations: usize,
    /// Initial variance scaling in dB below the channel SNR.
    pub init_proposal_snr_offset: f64,
    pub delta: f64,
    /// Initial tilt, the same in every noise dimension.
    pub init_tilt: f64,
    /// Point stream feeding the IS proposals.
    pub is_points: SequenceKind,
    pub seed: u64,
    pub out: Option<PathBuf>,
    pub format: OutputFormat,
    pub run_log: Option<PathBuf>,
    pub exec: Exec,
    pub block: u64,
    explicit: BTreeSet<&'static str>,
}

const KEYS: [&str; 19] = [
    "modulation",
    "order",
    "bits_per_word",
    "snr",
    "method",
    "words_per_pack",
    "packs",
    "loss",
    "adapt_iterations",
    "init_proposal_snr_offset",
    "delta",
    "init_tilt",
    "is_points",
    "seed",
    "out",
    "format",
    "run_log",
    "exec",
    "block",
];

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            modulation: Modulation::Qam,
            order: 16,
            bits_per_word: None,
            snr_list: Vec::new(),
            methods: vec![Method::Mc],
            words_per_pack: 5000,
            packs: 100,
            loss: LossKind::Ber,
            adapt_iterations: 5,
            init_proposal_snr_offset: 5.0,
            delta: DEFAULT_DELTA,
            init_tilt: 0.0,
            is_points: SequenceKind::PseudoRandom,
            seed: 0,
            out: None,
            format: OutputFormat::Csv,
            run_log: None,
            exec: Exec::default(),
            block: DEFAULT_BLOCK,
            explicit: BTreeSet::new(),
        }
    }
}

fn parse_num<T: FromStr>(field: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::config(field, format!("cannot parse `{value}`")))
}

fn parse_list<T: FromStr>(field: &str, value: &str) -> Result<Vec<T>> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| parse_num(field, s))
        .collect()
}

impl ExperimentConfig {
    /// Parses `key = value` text on top of the defaults and validates the result.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        cfg.apply_text(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    /// Applies `key = value` lines without validating. `#` starts a comment.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split_once('#').map_or(raw, |(kept, _)| kept).trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::config(
                    format!("line {}", lineno + 1),
                    format!("expected `key = value`, got `{line}`"),
                )
            })?;
            self.set(key.trim(), value.trim())?;
        }
        Ok(())
    }

    /// Sets one field by its key; unknown keys are config errors.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let canonical = KEYS
            .iter()
            .copied()
            .find(|k| *k == key)
            .ok_or_else(|| Error::config(key, "unknown key"))?;
        match canonical {
            "modulation" => {
                self.modulation = match value {
                    "bpsk" => Modulation::Bpsk,
                    "qam" => Modulation::Qam,
                    _ => return Err(Error::config(key, format!("expected bpsk or qam, got `{value}`"))),
                }
            }
            "order" => self.order = parse_num(key, value)?,
            "bits_per_word" => self.bits_per_word = Some(parse_num(key, value)?),
            "snr" => self.snr_list = parse_list(key, value)?,
            "method" => {
                self.methods = value
                    .split(',')
                    .map(str::trim)
                    .filter(|s| !s.is_empty())
                    .map(Method::from_str)
                    .collect::<Result<_>>()?
            }
            "words_per_pack" => self.words_per_pack = parse_num(key, value)?,
            "packs" => self.packs = parse_num(key, value)?,
            "loss" => {
                self.loss = match value {
                    "ber" => LossKind::Ber,
                    "wer" => LossKind::Wer,
                    _ => return Err(Error::config(key, format!("expected ber or wer, got `{value}`"))),
                }
            }
            "adapt_iterations" => self.adapt_iterations = parse_num(key, value)?,
            "init_proposal_snr_offset" => self.init_proposal_snr_offset = parse_num(key, value)?,
            "delta" => self.delta = parse_num(key, value)?,
            "init_tilt" => self.init_tilt = parse_num(key, value)?,
            "is_points" => {
                self.is_points = match value {
                    "pseudo" => SequenceKind::PseudoRandom,
                    "halton" => SequenceKind::Halton,
                    "sobol" => SequenceKind::Sobol,
                    "scrambled-sobol" => SequenceKind::ScrambledSobol,
                    _ => {
                        return Err(Error::config(
                            key,
                            format!("expected pseudo, halton, sobol or scrambled-sobol, got `{value}`"),
                        ))
                    }
                }
            }
            "seed" => self.seed = parse_num(key, value)?,
            "out" => self.out = Some(PathBuf::from(value)),
            "format" => self.format = value.parse()?,
            "run_log" => self.run_log = Some(PathBuf::from(value)),
            "exec" => {
                self.exec = match value {
                    "parallel" => Exec::Parallel,
                    "sequential" => Exec::Sequential,
                    _ => {
                        return Err(Error::config(
                            key,
                            format!("expected parallel or sequential, got `{value}`"),
                        ))
                    }
                }
            }
            "block" => self.block = parse_num(key, value)?,
            _ => unreachable!("every listed key is handled"),
        }
        self.explicit.insert(canonical);
        Ok(())
    }

    pub fn scheme(&self) -> Result<ModulationScheme> {
        match self.modulation {
            Modulation::Bpsk => Ok(ModulationScheme::bpsk()),
            Modulation::Qam => ModulationScheme::qam(self.order)
                .map_err(|_| Error::config("order", format!("unsupported QAM order {}", self.order))),
        }
    }

    pub fn word_bits(&self) -> Result<usize> {
        let k = self.scheme()?.bits_per_symbol();
        let bits = self.bits_per_word.unwrap_or(k);
        if bits == 0 || bits % k != 0 {
            return Err(Error::config(
                "bits_per_word",
                format!("must be a positive multiple of {k}, got {bits}"),
            ));
        }
        Ok(bits)
    }

    /// Samples per (SNR, method) cell: `N * N_s`.
    pub fn total_samples(&self) -> u64 {
        self.words_per_pack.saturating_mul(self.packs)
    }

    pub fn validate(&self) -> Result<()> {
        self.word_bits()?;
        if self.snr_list.is_empty() {
            return Err(Error::config("snr", "at least one SNR is required"));
        }
        if let Some(bad) = self.snr_list.iter().find(|s| !s.is_finite()) {
            return Err(Error::config("snr", format!("SNR {bad} is not finite")));
        }
        if self.methods.is_empty() {
            return Err(Error::config("method", "at least one method is required"));
        }
        if self.words_per_pack == 0 {
            return Err(Error::config("words_per_pack", "must be at least 1"));
        }
        if self.packs == 0 {
            return Err(Error::config("packs", "must be at least 1"));
        }
        if self.adapt_iterations == 0 {
            return Err(Error::config("adapt_iterations", "must be at least 1"));
        }
        if self.methods.iter().any(|m| m.is_importance_sampling())
            && self.total_samples() < self.adapt_iterations as u64
        {
            return Err(Error::config(
                "adapt_iterations",
                "exceeds the total sample budget words_per_pack * packs",
            ));
        }
        if !(self.delta > 0.0 && self.delta.is_finite()) {
            return Err(Error::config("delta", "must be positive and finite"));
        }
        if !self.init_proposal_snr_offset.is_finite() {
            return Err(Error::config("init_proposal_snr_offset", "must be finite"));
        }
        if !self.init_tilt.is_finite() {
            return Err(Error::config("init_tilt", "must be finite"));
        }
        if self.block == 0 {
            return Err(Error::config("block", "must be at least 1"));
        }
        Ok(())
    }

    /// Explicitly set fields that no selected method uses.
    pub fn warnings(&self) -> Vec<String> {
        let uses = |m: Method| self.methods.contains(&m);
        let tilt = uses(Method::IsTilt);
        let scale = uses(Method::IsScale);
        let mut out = Vec::new();
        let mut unused = |key: &str, applies: bool, why: &str| {
            if self.explicit.contains(key) && !applies {
                out.push(format!("`{key}` is ignored: {why}"));
            }
        };
        unused("order", self.modulation == Modulation::Qam, "modulation is bpsk");
        unused("adapt_iterations", tilt || scale, "no importance-sampling method selected");
        unused("is_points", tilt || scale, "no importance-sampling method selected");
        unused("run_log", tilt || scale, "no importance-sampling method selected");
        unused("init_proposal_snr_offset", scale, "is-scale is not selected");
        unused("delta", scale, "is-scale is not selected");
        unused("init_tilt", tilt, "is-tilt is not selected");
        out
    }
}
