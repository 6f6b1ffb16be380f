//! Small numeric utilities shared across arenas.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Neumaier-compensated running sum.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }

    /// Combine two partial sums. Merging in a fixed order gives a fixed result.
    pub fn merge(mut self, other: CompensatedSum) -> Self {
        self.add(other.sum);
        self.add(other.comp);
        self
    }
}

impl std::iter::FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = CompensatedSum::new();
        for x in iter {
            s.add(x);
        }
        s
    }
}

/// Fractional part in `[0, 1)` using floor semantics.
#[inline]
pub fn frac(x: f64) -> f64 {
    let r = x - x.floor();
    // x slightly below an integer can round up to exactly 1.0
    if r >= 1.0 {
        0.0
    } else {
        r
    }
}

/// `frac(m·w)` computed from the exact product `m·w = p + e` (`fma`), so the
/// result stays accurate when `m·w` is large.
#[inline]
pub fn frac_mul(m: f64, w: f64) -> f64 {
    let p = m * w;
    let e = m.mul_add(w, -p);
    frac(frac(p) + e)
}

/// Distance on the circle R/Z.
#[inline]
pub fn circle_dist(a: f64, b: f64) -> f64 {
    let d = frac(a - b);
    d.min(1.0 - d)
}

/// Random-access stream of uniform variates keyed by `(seed, lane, index)`.
///
/// Each value depends only on its key, so kicks can be regenerated in any
/// order and from any thread.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SeedStream {
    pub seed: u64,
}

impl SeedStream {
    pub fn new(seed: u64) -> Self {
        Self { seed }
    }

    fn rng(&self, lane: u64, index: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(lane);
        // two 32-bit words per f64 draw, 8 draws reserved per index
        rng.set_word_pos(u128::from(index) * 16);
        rng
    }

    /// Uniform in `[0, 1)`.
    pub fn uniform(&self, lane: u64, index: u64) -> f64 {
        self.rng(lane, index).random::<f64>()
    }

    /// Several uniforms in `[0, 1)` for the same key (at most 8).
    pub fn uniforms<const K: usize>(&self, lane: u64, index: u64) -> [f64; K] {
        assert!(K <= 8);
        let mut rng = self.rng(lane, index);
        std::array::from_fn(|_| rng.random::<f64>())
    }

    /// Uniform integer in `0..n`.
    pub fn below(&self, lane: u64, index: u64, n: usize) -> usize {
        self.rng(lane, index).random_range(0..n)
    }

    /// A sequential generator for Monte-Carlo work on one task.
    pub fn task_rng(&self, task: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed ^ 0x9E37_79B9_7F4A_7C15);
        rng.set_stream(task);
        rng
    }
}

/// `n` equally spaced points from `a` to `b` inclusive (`a:b:n` grids).
pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    match n {
        0 => vec![],
        1 => vec![a],
        _ => (0..n)
            .map(|j| a + (b - a) * j as f64 / (n - 1) as f64)
            .collect(),
    }
}

/// Relative difference `|x - y| / max(|y|, floor)`.
pub fn rel_diff(x: f64, y: f64, floor: f64) -> f64 {
    (x - y).abs() / y.abs().max(floor)
}
