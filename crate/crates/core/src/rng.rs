//! Counter-based randomness.
//!
//! Every draw is a pure function of `(seed, epoch, sample_index, class,
//! clause, literal, purpose)`, so results do not depend on the order in
//! which clauses or literals are visited. The sparse learner and the dense
//! reference machine consume identical draws for identical keys.

/// What a draw is used for; part of the key.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[repr(u8)]
pub enum Purpose {
    /// Literal membership when a clause is created with subsampling.
    PoolSample = 1,
    /// Whether a clause receives feedback for the current sample.
    ClauseSelect = 2,
    /// Per-literal Type I decision.
    TypeI = 3,
    /// Which non-target class receives negative feedback.
    NegativeClass = 4,
    /// Sample permutation when shuffling is enabled.
    Shuffle = 5,
}

/// Key value used for the epoch and sample slots of draws made outside the
/// training loop (clause initialization).
pub const NO_STEP: u64 = u64::MAX;

const GOLDEN: u64 = 0x9e37_79b9_7f4a_7c15;

#[inline]
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(GOLDEN);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

#[inline]
fn absorb(h: u64, key: u64) -> u64 {
    mix(h ^ key)
}

/// A probability with its integer comparison threshold precomputed.
///
/// `hit` on a 53-bit draw `d` is exactly `d * 2^-53 < p`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Probability {
    p: f64,
    threshold: u64,
}

impl Probability {
    pub fn new(p: f64) -> Self {
        let threshold = if p.is_nan() || p <= 0.0 {
            0
        } else if p >= 1.0 {
            1 << 53
        } else {
            (p * (1u64 << 53) as f64).ceil() as u64
        };
        Self { p, threshold }
    }

    pub fn value(&self) -> f64 {
        self.p
    }

    pub fn is_certain(&self) -> bool {
        self.threshold == 1 << 53
    }
}

/// Seeded root of the keyed draw space.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RandomSource {
    seed: u64,
}

impl RandomSource {
    pub fn new(seed: u64) -> Self {
        Self { seed }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Fixes the step and clause coordinates; the returned stream draws per
    /// literal and purpose.
    #[inline]
    pub fn clause_stream(&self, epoch: u64, sample_index: u64, class: u32, clause: u32) -> ClauseStream {
        let mut h = mix(self.seed);
        h = absorb(h, epoch);
        h = absorb(h, sample_index);
        h = absorb(h, class as u64);
        h = absorb(h, clause as u64);
        ClauseStream { prefix: h }
    }

    /// Stream for clause initialization, keyed outside any training step.
    pub fn init_stream(&self, class: u32, clause: u32) -> ClauseStream {
        self.clause_stream(NO_STEP, NO_STEP, class, clause)
    }

    /// Raw 64-bit draw for the full key.
    #[inline]
    pub fn draw(&self, epoch: u64, sample_index: u64, class: u32, clause: u32, literal: u32, purpose: Purpose) -> u64 {
        self.clause_stream(epoch, sample_index, class, clause).draw(literal, purpose)
    }

    /// Uniform index in `0..n` for a step-level decision (`n > 0`).
    pub fn index(&self, epoch: u64, sample_index: u64, class: u32, purpose: Purpose, n: usize) -> usize {
        debug_assert!(n > 0);
        let u = self.clause_stream(epoch, sample_index, class, u32::MAX).unit(u32::MAX, purpose);
        ((u * n as f64) as usize).min(n - 1)
    }
}

/// Draws for one `(seed, epoch, sample, class, clause)` coordinate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ClauseStream {
    prefix: u64,
}

impl ClauseStream {
    #[inline]
    pub fn draw(&self, literal: u32, purpose: Purpose) -> u64 {
        absorb(self.prefix, ((literal as u64) << 8) | purpose as u64)
    }

    /// Uniform value in `[0, 1)` with 53 bits of resolution.
    #[inline]
    pub fn unit(&self, literal: u32, purpose: Purpose) -> f64 {
        (self.draw(literal, purpose) >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// `true` with probability `p`. Identical to `unit(..) < p`.
    #[inline]
    pub fn bernoulli(&self, literal: u32, purpose: Purpose, p: f64) -> bool {
        self.hit(literal, purpose, Probability::new(p))
    }

    #[inline]
    pub fn hit(&self, literal: u32, purpose: Purpose, p: Probability) -> bool {
        (self.draw(literal, purpose) >> 11) < p.threshold
    }
}
