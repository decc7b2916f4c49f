//! Seed derivation and counter-based randomness.
//!
//! Sequential consumers (population generation, visit synthesis, hiring and
//! firing) get a ChaCha stream derived from `(seed, purpose, index)`. Hot-loop
//! consumers that need a draw per edge or per person per day use [`uniform`],
//! a stateless hash of the full coordinate. Stateless draws make the outcome of
//! one edge independent of how many other edges were examined, so runs of
//! different scenarios with the same seed share their random numbers.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Purposes for derived streams. Adding a variant never perturbs existing ones.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[repr(u64)]
pub enum Stream {
    Households = 1,
    Employment = 2,
    Occupations = 3,
    Wfh = 4,
    Income = 5,
    Places = 6,
    Visits = 7,
    Workplaces = 8,
    Seeding = 9,
    Template = 10,
    Transmission = 11,
    Progression = 12,
    CommunityFilter = 13,
    WorkplaceAbsence = 14,
    Hiring = 15,
    Calibration = 16,
    Posterior = 17,
    Labor = 18,
}

#[inline]
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[inline]
pub fn mix(parts: &[u64]) -> u64 {
    parts
        .iter()
        .fold(0x6A09_E667_F3BC_C909, |acc, &p| splitmix64(acc ^ splitmix64(p)))
}

/// A ChaCha stream for `(seed, purpose, index)`.
pub fn stream(seed: u64, purpose: Stream, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(mix(&[seed, purpose as u64, index]))
}

/// A uniform draw in `[0, 1)` determined entirely by its coordinates.
#[inline]
pub fn uniform(seed: u64, purpose: Stream, a: u64, b: u64, c: u64) -> f64 {
    let h = mix(&[seed, purpose as u64, a, b, c]);
    (h >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Rounds `x` to `floor(x)` or `floor(x) + 1` with probabilities that keep the
/// expectation equal to `x`.
pub fn stochastic_round<R: Rng + ?Sized>(x: f64, rng: &mut R) -> i64 {
    let floor = x.floor();
    let frac = x - floor;
    let up = frac > 0.0 && rng.random::<f64>() < frac;
    floor as i64 + i64::from(up)
}

/// Index drawn from non-negative `weights` (not necessarily normalized).
/// Returns `None` when every weight is zero.
pub fn categorical<R: Rng + ?Sized>(weights: &[f64], rng: &mut R) -> Option<usize> {
    let total: f64 = weights.iter().sum();
    if total <= 0.0 {
        return None;
    }
    let mut target = rng.random::<f64>() * total;
    let mut last = None;
    for (i, &w) in weights.iter().enumerate() {
        if w <= 0.0 {
            continue;
        }
        last = Some(i);
        if target < w {
            return Some(i);
        }
        target -= w;
    }
    last
}

/// Cumulative-sum sampler for repeated draws from one categorical distribution.
#[derive(Debug, Clone)]
pub struct CumulativeTable {
    cumulative: Vec<f64>,
}

impl CumulativeTable {
    pub fn new(weights: &[f64]) -> Option<Self> {
        let mut acc = 0.0;
        let cumulative: Vec<f64> = weights
            .iter()
            .map(|&w| {
                acc += w.max(0.0);
                acc
            })
            .collect();
        (acc > 0.0).then_some(Self { cumulative })
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let total = *self.cumulative.last().expect("non-empty table");
        let target = rng.random::<f64>() * total;
        let idx = self.cumulative.partition_point(|&c| c <= target);
        idx.min(self.cumulative.len() - 1)
    }
}
