//! Counter-based random streams.
//!
//! A stream is addressed by a master key and a path of sub-identifiers
//! (frame index, purpose tag, pixel, ...). The n-th value of a stream is a
//! pure function of `(key, path, n)`, so streams can be created and consumed
//! on any thread, in any order, without changing what they produce.

use rand_core::RngCore;

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 finalizer.
#[inline]
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Stable 64-bit identifier for a purpose label (FNV-1a).
pub const fn tag(label: &str) -> u64 {
    let bytes = label.as_bytes();
    let mut hash = 0xcbf2_9ce4_8422_2325_u64;
    let mut i = 0;
    while i < bytes.len() {
        hash ^= bytes[i] as u64;
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
        i += 1;
    }
    hash
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RandomStream {
    key: u64,
    path: Vec<u64>,
    stream: u64,
    counter: u64,
}

impl RandomStream {
    pub fn new(key: u64) -> Self {
        Self {
            key,
            path: Vec::new(),
            stream: mix64(key ^ GOLDEN),
            counter: 0,
        }
    }

    pub fn with_path(key: u64, path: &[u64]) -> Self {
        let mut s = Self::new(key);
        for &p in path {
            s = s.derive(p);
        }
        s
    }

    /// Child stream at `path + [id]`, starting from its first value.
    pub fn derive(&self, id: u64) -> Self {
        let mut path = Vec::with_capacity(self.path.len() + 1);
        path.extend_from_slice(&self.path);
        path.push(id);
        Self {
            key: self.key,
            path,
            stream: mix64(self.stream.rotate_left(23) ^ mix64(id.wrapping_add(GOLDEN))),
            counter: 0,
        }
    }

    pub fn derive_tag(&self, label: &str) -> Self {
        self.derive(tag(label))
    }

    pub fn key(&self) -> u64 {
        self.key
    }

    pub fn path(&self) -> &[u64] {
        &self.path
    }

    /// Number of values drawn so far.
    pub fn position(&self) -> u64 {
        self.counter
    }

    #[inline]
    pub fn next_raw(&mut self) -> u64 {
        self.counter = self.counter.wrapping_add(1);
        mix64(self.stream ^ mix64(self.counter.wrapping_mul(GOLDEN)))
    }

    /// Uniform in `[0, 1)` with 53 bits of resolution.
    #[inline]
    pub fn next_f64(&mut self) -> f64 {
        (self.next_raw() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform in the closed interval `[lo, hi]`; returns `lo` when the range is empty.
    #[inline]
    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        let u = self.next_f64();
        if hi <= lo {
            return lo;
        }
        (lo + (hi - lo) * u).clamp(lo, hi)
    }

    pub fn uniform_range(&mut self, range: [f64; 2]) -> f64 {
        self.uniform(range[0], range[1])
    }

    /// Uniform integer in `[0, n)` without modulo bias. `n` must be positive.
    pub fn below(&mut self, n: u64) -> u64 {
        assert!(n > 0, "below(0)");
        let threshold = n.wrapping_neg() % n;
        loop {
            let m = (self.next_raw() as u128) * (n as u128);
            if (m as u64) >= threshold {
                return (m >> 64) as u64;
            }
        }
    }

    /// Uniform integer in the closed interval `[lo, hi]`.
    pub fn uniform_int(&mut self, lo: u64, hi: u64) -> u64 {
        if hi <= lo {
            return lo;
        }
        let span = hi - lo;
        if span == u64::MAX {
            return self.next_raw();
        }
        lo + self.below(span + 1)
    }

    pub fn bernoulli(&mut self, p: f64) -> bool {
        self.next_f64() < p
    }
}

impl RngCore for RandomStream {
    fn next_u32(&mut self) -> u32 {
        (self.next_raw() >> 32) as u32
    }

    fn next_u64(&mut self) -> u64 {
        self.next_raw()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        rand_core::impls::fill_bytes_via_next(self, dst)
    }
}
