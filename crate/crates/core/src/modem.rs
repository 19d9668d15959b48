//! Bits, Gray-mapped BPSK/square-QAM constellations, hard-decision demodulation
//! and error metrics. The channel code is the identity: codeword = message.
//!
//! QAM constellations have unit average symbol energy. Symbol labels are the
//! bit patterns read most-significant first; the first half of a label selects
//! the in-phase level and the second half the quadrature level, each through a
//! reflected Gray code.

use serde::{Deserialize, Serialize};

use crate::lowdisc::prng::splitmix64;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BitWord {
    bits: Vec<u8>,
}

impl BitWord {
    pub fn new(bits: Vec<u8>) -> Result<Self> {
        if bits.is_empty() {
            return Err(Error::invalid("bit word must not be empty"));
        }
        if bits.iter().any(|&b| b > 1) {
            return Err(Error::invalid("bits must be 0 or 1"));
        }
        Ok(Self { bits })
    }

    pub fn bits(&self) -> &[u8] {
        &self.bits
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }
}

/// `count` equiprobable bits, reproducible per seed. Bit `i` is bit `i % 64` of
/// the `i / 64`-th SplitMix64 output.
pub fn random_bits(count: usize, seed: u64) -> Result<BitWord> {
    if count == 0 {
        return Err(Error::invalid("bit count must be positive"));
    }
    let mut bits = vec![0u8; count];
    fill_random_bits(seed, 0, &mut bits);
    Ok(BitWord { bits })
}

/// Fills `out` with the bits starting at 64-bit block `block`.
pub(crate) fn fill_random_bits(seed: u64, block: u64, out: &mut [u8]) {
    for (k, chunk) in out.chunks_mut(64).enumerate() {
        let word = splitmix64(seed, block + k as u64);
        for (i, b) in chunk.iter_mut().enumerate() {
            *b = ((word >> i) & 1) as u8;
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ModulationKind {
    Bpsk,
    SquareQam,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Iq {
    pub re: f64,
    pub im: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModulationScheme {
    kind: ModulationKind,
    order: usize,
    bits_per_symbol: usize,
    /// Constellation indexed by symbol label.
    points: Vec<Iq>,
    /// Per-axis amplitude levels, lowest first (QAM only).
    levels: Vec<f64>,
    /// Per-axis label of each level (QAM only).
    level_labels: Vec<usize>,
}

#[inline]
fn gray(i: usize) -> usize {
    i ^ (i >> 1)
}

impl ModulationScheme {
    pub fn bpsk() -> Self {
        Self {
            kind: ModulationKind::Bpsk,
            order: 2,
            bits_per_symbol: 1,
            points: vec![Iq { re: 1.0, im: 0.0 }, Iq { re: -1.0, im: 0.0 }],
            levels: Vec::new(),
            level_labels: Vec::new(),
        }
    }

    /// Square QAM of order 4, 16 or 64.
    pub fn qam(order: usize) -> Result<Self> {
        if !matches!(order, 4 | 16 | 64) {
            return Err(Error::invalid(format!(
                "square QAM order must be 4, 16 or 64, got {order}"
            )));
        }
        let bits_per_symbol = order.trailing_zeros() as usize;
        let side = 1usize << (bits_per_symbol / 2);
        let axis_bits = bits_per_symbol / 2;
        // average energy of the {±1, ±3, ...} grid is 2(M-1)/3
        let norm = (2.0 * (order as f64 - 1.0) / 3.0).sqrt();
        let levels: Vec<f64> = (0..side)
            .map(|i| (2.0 * i as f64 - (side as f64 - 1.0)) / norm)
            .collect();
        let level_labels: Vec<usize> = (0..side).map(gray).collect();
        let mut label_to_level = vec![0usize; side];
        for (level, &label) in level_labels.iter().enumerate() {
            label_to_level[label] = level;
        }
        let points = (0..order)
            .map(|label| {
                let i_label = label >> axis_bits;
                let q_label = label & (side - 1);
                Iq {
                    re: levels[label_to_level[i_label]],
                    im: levels[label_to_level[q_label]],
                }
            })
            .collect();
        Ok(Self {
            kind: ModulationKind::SquareQam,
            order,
            bits_per_symbol,
            points,
            levels,
            level_labels,
        })
    }

    pub fn kind(&self) -> ModulationKind {
        self.kind
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn bits_per_symbol(&self) -> usize {
        self.bits_per_symbol
    }

    /// Real noise dimensions per symbol: 1 for BPSK, 2 for QAM.
    pub fn real_dims_per_symbol(&self) -> usize {
        match self.kind {
            ModulationKind::Bpsk => 1,
            ModulationKind::SquareQam => 2,
        }
    }

    pub fn constellation(&self) -> &[Iq] {
        &self.points
    }

    pub fn point(&self, label: usize) -> Iq {
        self.points[label]
    }

    pub fn per_axis_levels(&self) -> &[f64] {
        &self.levels
    }

    pub fn per_axis_labels(&self) -> &[usize] {
        &self.level_labels
    }

    /// Nearest constellation label; ties go to the lowest label.
    pub fn decide(&self, r: Iq) -> usize {
        let mut best = 0;
        let mut best_d = f64::INFINITY;
        for (label, p) in self.points.iter().enumerate() {
            let d = (r.re - p.re).powi(2) + (r.im - p.im).powi(2);
            if d < best_d {
                best_d = d;
                best = label;
            }
        }
        best
    }

    fn label_of(&self, bits: &[u8]) -> usize {
        bits.iter().fold(0, |acc, &b| (acc << 1) | b as usize)
    }

    fn write_label(&self, label: usize, out: &mut [u8]) {
        let k = self.bits_per_symbol;
        for (i, o) in out.iter_mut().enumerate() {
            *o = ((label >> (k - 1 - i)) & 1) as u8;
        }
    }

    /// Writes the flattened real signal for `bits` into `out`.
    pub(crate) fn modulate_real(&self, bits: &[u8], out: &mut [f64]) {
        let k = self.bits_per_symbol;
        let dims = self.real_dims_per_symbol();
        for (chunk, o) in bits.chunks(k).zip(out.chunks_mut(dims)) {
            let p = self.points[self.label_of(chunk)];
            o[0] = p.re;
            if dims == 2 {
                o[1] = p.im;
            }
        }
    }

    /// Hard decisions on a flattened real received vector.
    pub(crate) fn demodulate_real(&self, received: &[f64], out: &mut [u8]) {
        let k = self.bits_per_symbol;
        let dims = self.real_dims_per_symbol();
        for (r, o) in received.chunks(dims).zip(out.chunks_mut(k)) {
            let iq = Iq {
                re: r[0],
                im: if dims == 2 { r[1] } else { 0.0 },
            };
            self.write_label(self.decide(iq), o);
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SymbolWord {
    pub symbols: Vec<Iq>,
    pub scheme: ModulationKind,
}

impl SymbolWord {
    /// Flattens to real dimensions: one per BPSK symbol, two per QAM symbol.
    pub fn to_real(&self) -> Vec<f64> {
        match self.scheme {
            ModulationKind::Bpsk => self.symbols.iter().map(|s| s.re).collect(),
            ModulationKind::SquareQam => {
                self.symbols.iter().flat_map(|s| [s.re, s.im]).collect()
            }
        }
    }

    pub fn from_real(values: &[f64], scheme: &ModulationScheme) -> Result<Self> {
        let dims = scheme.real_dims_per_symbol();
        if values.len() % dims != 0 {
            return Err(Error::invalid("real vector length is not a whole number of symbols"));
        }
        let symbols = values
            .chunks(dims)
            .map(|c| Iq {
                re: c[0],
                im: if dims == 2 { c[1] } else { 0.0 },
            })
            .collect();
        Ok(Self {
            symbols,
            scheme: scheme.kind(),
        })
    }
}

pub fn modulate(word: &BitWord, scheme: &ModulationScheme) -> Result<SymbolWord> {
    let k = scheme.bits_per_symbol();
    if word.len() % k != 0 {
        return Err(Error::invalid(format!(
            "word length {} is not a multiple of {k} bits per symbol",
            word.len()
        )));
    }
    let symbols = word
        .bits()
        .chunks(k)
        .map(|c| scheme.point(scheme.label_of(c)))
        .collect();
    Ok(SymbolWord {
        symbols,
        scheme: scheme.kind(),
    })
}

pub fn demodulate(received: &SymbolWord, scheme: &ModulationScheme) -> Result<BitWord> {
    if received.scheme != scheme.kind() {
        return Err(Error::invalid("received word was produced by a different scheme"));
    }
    if received.symbols.is_empty() {
        return Err(Error::invalid("received word is empty"));
    }
    let k = scheme.bits_per_symbol();
    let mut bits = vec![0u8; received.symbols.len() * k];
    for (s, out) in received.symbols.iter().zip(bits.chunks_mut(k)) {
        scheme.write_label(scheme.decide(*s), out);
    }
    Ok(BitWord { bits })
}

fn check_lengths(a: &BitWord, b: &BitWord) -> Result<()> {
    if a.len() != b.len() {
        return Err(Error::invalid(format!(
            "word lengths differ: {} vs {}",
            a.len(),
            b.len()
        )));
    }
    Ok(())
}

#[inline]
pub(crate) fn count_bit_errors(a: &[u8], b: &[u8]) -> usize {
    a.iter().zip(b).filter(|(x, y)| x != y).count()
}

/// Fraction of differing positions.
pub fn bit_error_rate(sent: &BitWord, received: &BitWord) -> Result<f64> {
    check_lengths(sent, received)?;
    Ok(count_bit_errors(&sent.bits, &received.bits) as f64 / sent.len() as f64)
}

/// 1 when any bit differs.
pub fn word_error_indicator(sent: &BitWord, received: &BitWord) -> Result<u8> {
    check_lengths(sent, received)?;
    Ok((sent.bits != received.bits) as u8)
}
