//! Intervals `I_k = [r_k, r_k + 1/k]` covering every `τ ≥ 0` infinitely often,
//! and the kicks `h^{β_k}`, `β_k = (k−1)r_{k−1} − k r_k`, whose evolution is
//! `f^{(k)}(τ) = h^{k(τ − r_k)}`.
//!
//! The harmonic series is cut into consecutive blocks of sum at least 1, and
//! block `j(m, n) = d(d−1)/2 + m` (`d = m + n − 1`) is the n-th block of the
//! m-th subsequence. Within subsequence `m`, `r_k` is the sum of `1/k'` over
//! the earlier indices `k'` of that subsequence, so each subsequence tiles
//! `[0, ∞)` once.

use std::sync::{Arc, OnceLock};

use serde::{Deserialize, Serialize};

use super::mat2::Mat2;
use crate::error::{invalid, KickedError, Result};
use crate::numeric::CompensatedSum;
use crate::sequential::KickSchedule;

const TABLE: usize = 1 << 16;
const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

fn table() -> &'static [f64] {
    static T: OnceLock<Vec<f64>> = OnceLock::new();
    T.get_or_init(|| {
        let mut s = CompensatedSum::new();
        let mut v = Vec::with_capacity(TABLE);
        v.push(0.0);
        for k in 1..TABLE {
            s.add(1.0 / k as f64);
            v.push(s.value());
        }
        v
    })
}

/// `H(n) = 1 + 1/2 + ⋯ + 1/n`, `H(0) = 0`.
pub fn harmonic(n: u64) -> f64 {
    if (n as usize) < TABLE {
        return table()[n as usize];
    }
    let x = n as f64;
    let x2 = x * x;
    x.ln() + EULER_GAMMA + 1.0 / (2.0 * x) - 1.0 / (12.0 * x2) + 1.0 / (120.0 * x2 * x2)
}

/// `Σ_{k=s}^{e} 1/k`.
fn block_sum(s: u64, e: u64) -> f64 {
    harmonic(e) - harmonic(s - 1)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Block {
    pub start: u64,
    pub end: u64,
    pub sum: f64,
}

/// `j(m, n)` for `m, n ≥ 1`.
pub fn cantor_pair(m: u64, n: u64) -> u64 {
    let d = m + n - 1;
    d * (d - 1) / 2 + m
}

/// Inverse of [`cantor_pair`].
pub fn cantor_unpair(j: u64) -> (u64, u64) {
    let mut d = ((2.0 * j as f64).sqrt()) as u64;
    while d * (d + 1) / 2 < j {
        d += 1;
    }
    while d > 1 && (d - 1) * d / 2 >= j {
        d -= 1;
    }
    let m = j - d * (d - 1) / 2;
    (m, d + 1 - m)
}

/// Blocks are built while indices stay exactly representable in f64.
const MAX_INDEX: u64 = 1 << 53;

#[derive(Debug, Clone)]
pub struct IntervalCover {
    blocks: Arc<Vec<Block>>,
}

impl Default for IntervalCover {
    fn default() -> Self {
        Self::new()
    }
}

impl IntervalCover {
    pub fn new() -> Self {
        let mut blocks = Vec::new();
        let mut s = 1u64;
        loop {
            // smallest e with Σ_{s..=e} 1/k ≥ 1; the block spans about a factor e
            let mut lo = s;
            let mut hi = s.saturating_mul(4).max(s + 4);
            if hi >= MAX_INDEX {
                break;
            }
            while lo < hi {
                let mid = lo + (hi - lo) / 2;
                if block_sum(s, mid) >= 1.0 {
                    hi = mid;
                } else {
                    lo = mid + 1;
                }
            }
            blocks.push(Block {
                start: s,
                end: lo,
                sum: block_sum(s, lo),
            });
            s = lo + 1;
        }
        Self {
            blocks: Arc::new(blocks),
        }
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    /// Largest `k` for which `r_k` is available.
    pub fn max_k(&self) -> u64 {
        self.blocks.last().map_or(0, |b| b.end)
    }

    fn block_of(&self, k: u64) -> Result<usize> {
        if k == 0 || k > self.max_k() {
            return Err(KickedError::NumericalGuard(format!(
                "k = {k} is outside the constructed range 1..={}",
                self.max_k()
            )));
        }
        Ok(self.blocks.partition_point(|b| b.end < k))
    }

    /// Sum of the first `n − 1` blocks of subsequence `m`.
    fn prefix(&self, m: u64, n: u64) -> f64 {
        let mut s = CompensatedSum::new();
        for t in 1..n {
            s.add(self.blocks[cantor_pair(m, t) as usize - 1].sum);
        }
        s.value()
    }

    /// `(m, n)`: which subsequence and which of its blocks contains `k`.
    pub fn subsequence_of(&self, k: u64) -> Result<(u64, u64)> {
        Ok(cantor_unpair(self.block_of(k)? as u64 + 1))
    }

    /// Left endpoint `r_k`; `r_0 = 0`.
    pub fn r(&self, k: u64) -> Result<f64> {
        if k == 0 {
            return Ok(0.0);
        }
        let b = self.block_of(k)?;
        let (m, n) = cantor_unpair(b as u64 + 1);
        let block = &self.blocks[b];
        Ok(self.prefix(m, n) + block_sum(block.start, k - 1))
    }

    pub fn interval(&self, k: u64) -> Result<(f64, f64)> {
        let r = self.r(k)?;
        Ok((r, r + 1.0 / k as f64))
    }

    /// `β_k = (k−1) r_{k−1} − k r_k`.
    pub fn beta(&self, k: u64) -> Result<f64> {
        if k == 0 {
            return invalid("kicks are indexed from 1");
        }
        Ok((k - 1) as f64 * self.r(k - 1)? - k as f64 * self.r(k)?)
    }

    /// Kicks `h^{β_k}`. Indices past [`max_k`](Self::max_k) yield NaN entries.
    pub fn kicks(&self) -> KickSchedule<Mat2> {
        let me = self.clone();
        KickSchedule::indexed(move |k| Mat2::horocycle(me.beta(k).unwrap_or(f64::NAN)))
    }

    /// `h^{k(τ − r_k)}`.
    pub fn evolution(&self, k: u64, tau: f64) -> Result<Mat2> {
        Ok(Mat2::horocycle(k as f64 * (tau - self.r(k)?)))
    }

    /// The index `k` in subsequence `m` with `τ ∈ I_k`, if the constructed
    /// blocks reach `τ`.
    pub fn cover_in_subsequence(&self, m: u64, tau: f64) -> Option<u64> {
        if tau < 0.0 || m == 0 {
            return None;
        }
        for n in 1.. {
            let j = cantor_pair(m, n) as usize;
            if j > self.blocks.len() {
                return None;
            }
            let block = self.blocks[j - 1];
            let below = self.prefix(m, n);
            if tau <= below + block.sum {
                // largest k in the block with r_k ≤ τ
                let (mut lo, mut hi) = (block.start, block.end);
                while lo < hi {
                    let mid = lo + (hi - lo).div_ceil(2);
                    if below + block_sum(block.start, mid - 1) <= tau {
                        lo = mid;
                    } else {
                        hi = mid - 1;
                    }
                }
                return Some(lo);
            }
        }
        None
    }

    /// Indices `k` with `τ ∈ I_k`, at most one per subsequence, sorted.
    pub fn covering_indices(&self, tau: f64) -> Vec<u64> {
        let mut ks: Vec<u64> = (1..)
            .take_while(|&m| cantor_pair(m, 1) as usize <= self.blocks.len())
            .filter_map(|m| self.cover_in_subsequence(m, tau))
            .collect();
        ks.sort_unstable();
        ks
    }

    /// All `k ≤ k_max` with `τ ∈ I_k`, by direct scan.
    pub fn scan(&self, tau: f64, k_max: u64) -> Result<Vec<u64>> {
        let mut out = Vec::new();
        for k in 1..=k_max {
            let (lo, hi) = self.interval(k)?;
            if lo <= tau && tau <= hi {
                out.push(k);
            }
        }
        Ok(out)
    }
}

/// `τ` with fewer than `multiplicity` covering intervals among the constructed
/// blocks, and the largest index needed over the grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverReport {
    pub multiplicity: usize,
    pub grid_points: usize,
    pub undercovered: Vec<f64>,
    /// `K(τ)`: the `multiplicity`-th smallest covering index, per grid point.
    pub k_needed: Vec<u64>,
}

pub fn cover_report(cover: &IntervalCover, grid: &[f64], multiplicity: usize) -> CoverReport {
    let mut undercovered = Vec::new();
    let mut k_needed = Vec::with_capacity(grid.len());
    for &tau in grid {
        let ks = cover.covering_indices(tau);
        if ks.len() < multiplicity || multiplicity == 0 {
            undercovered.push(tau);
            k_needed.push(0);
        } else {
            k_needed.push(ks[multiplicity - 1]);
        }
    }
    CoverReport {
        multiplicity,
        grid_points: grid.len(),
        undercovered,
        k_needed,
    }
}
