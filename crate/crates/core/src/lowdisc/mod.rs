//! Uniform point streams on `[0,1)^d`: pseudo-random, Halton, Sobol and
//! Owen-scrambled Sobol.
//!
//! Halton and unscrambled Sobol start at sequence index 1 so the all-zeros point
//! is never emitted. Scrambled Sobol starts at index 0; scrambling moves that
//! point away from the origin and keeps the leading `2^m` points a full net.
//!
//! Generators are single-owner. Parallel work splits the cursor range and
//! builds one generator per range with [`SequenceGenerator::at_cursor`].

mod halton;
pub mod prng;
mod scramble;
mod sobol;

use serde::{Deserialize, Serialize};

pub use halton::{first_primes, radical_inverse};
pub use scramble::{owen_scramble, scrambled_unit, ScrambleKey};
pub use sobol::{sobol_bits, DirectionEntry, DirectionNumberTable, SOBOL_BITS};

use crate::{Error, Result};
use prng::{derive_key, splitmix64, to_open_unit};

/// Label for the key of the padding stream used past the Sobol table.
const PADDING_STREAM: u64 = 0x7061_6464;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SequenceKind {
    PseudoRandom,
    Halton,
    Sobol,
    ScrambledSobol,
}

impl SequenceKind {
    pub fn is_low_discrepancy(self) -> bool {
        !matches!(self, SequenceKind::PseudoRandom)
    }
}

/// A point in `[0,1)^d`.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitPoint {
    pub coords: Vec<f64>,
}

impl UnitPoint {
    pub fn dimension(&self) -> usize {
        self.coords.len()
    }
}

/// Anything that emits successive points of a fixed dimension.
pub trait PointStream {
    fn dimension(&self) -> usize;

    /// Writes the next point into `out` (length = dimension) and advances.
    fn fill_next(&mut self, out: &mut [f64]);

    fn next_point(&mut self) -> UnitPoint {
        let mut coords = vec![0.0; self.dimension()];
        self.fill_next(&mut coords);
        UnitPoint { coords }
    }
}

#[derive(Debug, Clone)]
pub struct SequenceGenerator {
    kind: SequenceKind,
    dimension: usize,
    seed: u64,
    cursor: u64,
    /// Leading dimensions served by the low-discrepancy construction.
    structured_dims: usize,
    directions: Vec<[u32; SOBOL_BITS]>,
    sobol_state: Vec<u32>,
    primes: Vec<u64>,
    scramble_keys: Vec<ScrambleKey>,
    padding_key: u64,
}

impl SequenceGenerator {
    /// Strict constructor: Sobol kinds fail when `dimension` exceeds the table.
    pub fn new(kind: SequenceKind, dimension: usize, seed: u64) -> Result<Self> {
        Self::build(kind, dimension, seed, 0, false)
    }

    /// Like [`new`](Self::new) but Sobol coordinates past the table capacity are
    /// filled from the seeded pseudo-random stream; see [`is_padded`](Self::is_padded).
    pub fn with_padding(kind: SequenceKind, dimension: usize, seed: u64) -> Result<Self> {
        Self::build(kind, dimension, seed, 0, true)
    }

    /// Generator positioned so that its first emitted point is the one at `cursor`.
    pub fn at_cursor(
        kind: SequenceKind,
        dimension: usize,
        seed: u64,
        cursor: u64,
        allow_padding: bool,
    ) -> Result<Self> {
        Self::build(kind, dimension, seed, cursor, allow_padding)
    }

    fn build(
        kind: SequenceKind,
        dimension: usize,
        seed: u64,
        cursor: u64,
        allow_padding: bool,
    ) -> Result<Self> {
        if dimension == 0 {
            return Err(Error::invalid("sequence dimension must be positive"));
        }
        let mut gen = SequenceGenerator {
            kind,
            dimension,
            seed,
            cursor,
            structured_dims: dimension,
            directions: Vec::new(),
            sobol_state: Vec::new(),
            primes: Vec::new(),
            scramble_keys: Vec::new(),
            padding_key: derive_key(seed, PADDING_STREAM),
        };
        match kind {
            SequenceKind::PseudoRandom => {}
            SequenceKind::Halton => gen.primes = first_primes(dimension),
            SequenceKind::Sobol | SequenceKind::ScrambledSobol => {
                let table = DirectionNumberTable::embedded();
                if dimension > table.capacity() {
                    if !allow_padding {
                        return Err(Error::Capacity {
                            requested: dimension,
                            capacity: table.capacity(),
                        });
                    }
                    gen.structured_dims = table.capacity();
                }
                gen.directions = (0..gen.structured_dims)
                    .map(|d| table.direction_vectors(d))
                    .collect::<Result<_>>()?;
                if kind == SequenceKind::ScrambledSobol {
                    gen.scramble_keys = (0..gen.structured_dims)
                        .map(|d| ScrambleKey::new(seed, d))
                        .collect();
                }
                let index = gen.sequence_index();
                gen.sobol_state = gen.directions.iter().map(|v| sobol_bits(v, index)).collect();
            }
        }
        Ok(gen)
    }

    pub fn kind(&self) -> SequenceKind {
        self.kind
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn cursor(&self) -> u64 {
        self.cursor
    }

    /// True when some coordinates come from the padding stream.
    pub fn is_padded(&self) -> bool {
        self.structured_dims < self.dimension
    }

    fn sequence_index(&self) -> u64 {
        match self.kind {
            SequenceKind::Halton | SequenceKind::Sobol => self.cursor + 1,
            SequenceKind::PseudoRandom | SequenceKind::ScrambledSobol => self.cursor,
        }
    }

    #[inline]
    fn pseudo_random(&self, key: u64, coord: usize) -> f64 {
        let counter = self
            .cursor
            .wrapping_mul(self.dimension as u64)
            .wrapping_add(coord as u64);
        to_open_unit(splitmix64(key, counter))
    }
}

impl PointStream for SequenceGenerator {
    fn dimension(&self) -> usize {
        self.dimension
    }

    fn fill_next(&mut self, out: &mut [f64]) {
        assert_eq!(out.len(), self.dimension, "point buffer has wrong dimension");
        const SCALE: f64 = 1.0 / 4_294_967_296.0;
        let index = self.sequence_index();
        match self.kind {
            SequenceKind::PseudoRandom => {
                for (j, o) in out.iter_mut().enumerate() {
                    *o = self.pseudo_random(self.seed, j);
                }
            }
            SequenceKind::Halton => {
                for (o, &p) in out.iter_mut().zip(&self.primes) {
                    *o = halton::radical_inverse_unchecked(index, p);
                }
            }
            SequenceKind::Sobol | SequenceKind::ScrambledSobol => {
                let scrambled = self.kind == SequenceKind::ScrambledSobol;
                for j in 0..self.structured_dims {
                    let bits = self.sobol_state[j];
                    out[j] = if scrambled {
                        scrambled_unit(bits, self.scramble_keys[j])
                    } else {
                        bits as f64 * SCALE
                    };
                }
                for j in self.structured_dims..self.dimension {
                    out[j] = self.pseudo_random(self.padding_key, j);
                }
                // Gray-code step to the next index
                let next = index + 1;
                let bit = next.trailing_zeros() as usize;
                if bit < SOBOL_BITS {
                    for (state, v) in self.sobol_state.iter_mut().zip(&self.directions) {
                        *state ^= v[bit];
                    }
                }
            }
        }
        self.cursor += 1;
    }
}
