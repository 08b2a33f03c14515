//! Counter-based random number generation.
//!
//! Every random quantity in the crate is a pure function of a 64-bit key and a
//! 64-bit counter (splitmix64-style), so overlapping windows, worker counts,
//! and evaluation order cannot change a draw. Edge weights are keyed by
//! `seed ^ edge fingerprint`, walk paths by `(seed, stream tag)`.

const GOLDEN: u64 = 0x9e37_79b9_7f4a_7c15;

/// splitmix64 finalizer.
#[inline]
pub fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Draw number `ctr` of the stream identified by `key`.
#[inline]
pub fn draw(key: u64, ctr: u64) -> u64 {
    mix(key.wrapping_add(ctr.wrapping_add(1).wrapping_mul(GOLDEN)))
}

/// Derive an independent stream key from a base key and a tag.
#[inline]
pub fn substream(key: u64, tag: u64) -> u64 {
    mix(key ^ mix(tag.wrapping_add(GOLDEN)))
}

#[inline]
fn to_unit(x: u64) -> f64 {
    // 53 high bits -> [0,1)
    (x >> 11) as f64 * (1.0 / 9007199254740992.0)
}

#[inline]
fn to_open_unit(x: u64) -> f64 {
    // strictly inside (0,1); keeps inverse-CDF exponentials strictly positive
    ((x >> 11) as f64 + 0.5) * (1.0 / 9007199254740992.0)
}

/// Sequential view over a counter-based stream.
#[derive(Debug, Clone)]
pub struct CounterRng {
    key: u64,
    ctr: u64,
}

impl CounterRng {
    pub fn new(key: u64) -> Self {
        CounterRng { key, ctr: 0 }
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        let x = draw(self.key, self.ctr);
        self.ctr += 1;
        x
    }

    /// Uniform on [0,1).
    #[inline]
    pub fn uniform(&mut self) -> f64 {
        to_unit(self.next_u64())
    }

    /// Uniform on the open interval (0,1).
    #[inline]
    pub fn uniform_open(&mut self) -> f64 {
        to_open_unit(self.next_u64())
    }

    /// Exponential with the given rate, strictly positive.
    #[inline]
    pub fn exponential(&mut self, rate: f64) -> f64 {
        debug_assert!(rate > 0.0);
        -(1.0 - self.uniform_open()).ln() / rate
    }

    /// Standard normal via the inverse CDF (one draw per variate).
    #[inline]
    pub fn standard_normal(&mut self) -> f64 {
        use statrs::distribution::{ContinuousCDF, Normal};
        let n = Normal::new(0.0, 1.0).expect("unit normal");
        n.inverse_cdf(self.uniform_open())
    }
}

/// Uniform [0,1) value for slot `slot` of the stream `key`.
#[inline]
pub fn unit_draw(key: u64, slot: u64) -> f64 {
    to_unit(draw(key, slot))
}
