//! Splittable counter-based random streams.
//!
//! Reproducibility contract: every random draw in the crate comes from a
//! stream addressed by a *path* of labels under a master seed — replicate
//! index, then dimension, then role (scrambling matrix vs. digital shift).
//! Streams are counter-based: the n-th output is a pure function of
//! `(key, n)`, so replicates can fan out across threads in any order and
//! still produce bit-identical results.
//!
//! The generator is splitmix64 evaluated at counter positions; keys are
//! derived by chaining the same finalizer over the path labels.

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;
const ROOT_SALT: u64 = 0x243F_6A88_85A3_08D3;

/// splitmix64 finalizer: a bijective avalanche mix on 64 bits.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Hash a label path into a stream key.
pub fn derive_key(parts: &[u64]) -> u64 {
    let mut key = ROOT_SALT;
    for &p in parts {
        key = mix64(key ^ mix64(p.wrapping_add(GOLDEN_GAMMA)));
    }
    key
}

/// Source of raw 64-bit words. Lets tests substitute counting doubles for
/// exhaustive-law checks.
pub trait RandomBits {
    fn next_u64(&mut self) -> u64;
}

/// A node in the seed-derivation tree. `Copy`, cheap, immutable; children
/// are derived by label so sibling streams never overlap.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SeedTree {
    key: u64,
}

impl SeedTree {
    pub fn new(master_seed: u64) -> Self {
        SeedTree {
            key: derive_key(&[master_seed]),
        }
    }

    /// Child node for `label`; chaining `child` walks the path.
    pub fn child(&self, label: u64) -> Self {
        SeedTree {
            key: mix64(self.key ^ mix64(label.wrapping_add(GOLDEN_GAMMA))),
        }
    }

    pub fn key(&self) -> u64 {
        self.key
    }

    /// The stream rooted at this node, starting at counter 0.
    pub fn rng(&self) -> CounterRng {
        CounterRng {
            key: self.key,
            counter: 0,
        }
    }
}

/// Counter-based generator: output n is `mix64(key + n·γ)` — splitmix64
/// with seed `key`, evaluated lazily.
#[derive(Clone, Debug)]
pub struct CounterRng {
    key: u64,
    counter: u64,
}

impl CounterRng {
    pub fn new(key: u64) -> Self {
        CounterRng { key, counter: 0 }
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.counter = self.counter.wrapping_add(1);
        mix64(self.key.wrapping_add(self.counter.wrapping_mul(GOLDEN_GAMMA)))
    }

    /// Uniform in [0,1) with 53 random bits.
    #[inline]
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / 9_007_199_254_740_992.0)
    }
}

impl RandomBits for CounterRng {
    #[inline]
    fn next_u64(&mut self) -> u64 {
        CounterRng::next_u64(self)
    }
}

/// Serves packed bits from a word source, LSB first. Consumption layout is
/// part of the reproducibility contract: callers drawing k bits then k' bits
/// read bits 0..k then k..k+k' of the underlying word stream.
pub struct BitBuffer<'a, R: RandomBits> {
    rng: &'a mut R,
    word: u64,
    avail: u32,
}

impl<'a, R: RandomBits> BitBuffer<'a, R> {
    pub fn new(rng: &'a mut R) -> Self {
        BitBuffer {
            rng,
            word: 0,
            avail: 0,
        }
    }

    /// Take `n ≤ 64` bits, packed into the low bits of the result.
    pub fn take(&mut self, n: u32) -> u64 {
        assert!(n <= 64);
        if n == 0 {
            return 0;
        }
        if self.avail == 0 {
            self.word = self.rng.next_u64();
            self.avail = 64;
        }
        if n <= self.avail {
            let out = if n == 64 { self.word } else { self.word & ((1u64 << n) - 1) };
            self.word = if n == 64 { 0 } else { self.word >> n };
            self.avail -= n;
            return out;
        }
        // Split across the word boundary: low part from the current word,
        // high part from the next.
        let low_n = self.avail;
        let low = self.word;
        self.word = self.rng.next_u64();
        self.avail = 64;
        let high = self.take(n - low_n);
        low | (high << low_n)
    }
}
