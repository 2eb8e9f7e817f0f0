//! Deterministic, label-partitioned random streams.
//!
//! Every stochastic part of a scenario (wind, sensor noise, command drops)
//! draws from its own stream, derived from the master seed and a short label.
//! A draw is a pure function of `(master_seed, label, counter)`, so adding or
//! consuming one stream can never shift the values of another, and any draw
//! can be reproduced in isolation.

/// Counter-based PRNG stream. Not cryptographic; stable across platforms.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RandomStream {
    master_seed: u64,
    label: String,
    key: u64,
    counter: u64,
}

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 finalizer.
#[inline]
fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// FNV-1a over the label bytes keeps stream keys stable across runs.
fn label_hash(label: &str) -> u64 {
    let mut h: u64 = 0xCBF2_9CE4_8422_2325;
    for b in label.as_bytes() {
        h ^= u64::from(*b);
        h = h.wrapping_mul(0x0000_0100_0000_01B3);
    }
    h
}

impl RandomStream {
    pub fn new(master_seed: u64, label: &str) -> Self {
        RandomStream {
            master_seed,
            label: label.to_owned(),
            key: mix(master_seed ^ label_hash(label)),
            counter: 0,
        }
    }

    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Number of draws consumed so far.
    pub fn counter(&self) -> u64 {
        self.counter
    }

    /// The value this stream produces at an arbitrary counter position.
    pub fn value_at(&self, counter: u64) -> u64 {
        mix(self.key.wrapping_add(counter.wrapping_add(1).wrapping_mul(GOLDEN_GAMMA)))
    }

    pub fn next_u64(&mut self) -> u64 {
        let v = self.value_at(self.counter);
        self.counter += 1;
        v
    }

    /// Uniform draw in `[0, 1)` with 53 bits of precision.
    pub fn next_uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Standard normal draw via Box-Muller; consumes exactly two counters.
    pub fn next_gaussian(&mut self) -> f64 {
        // u1 in (0, 1] so the log stays finite.
        let u1 = ((self.next_u64() >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64);
        let u2 = self.next_uniform();
        (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    }

    /// Bernoulli draw; consumes one counter even when `p` is 0 or 1 so that
    /// downstream draws do not shift when a probability is tuned.
    pub fn next_bool(&mut self, p: f64) -> bool {
        self.next_uniform() < p
    }
}
