//! SAD block matching with the three-step search.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::Frame;
use crate::error::{Error, Result};

/// Displacement `(p, q)` of a block from the current frame into the
/// reference frame: current pixel `(x, y)` is compared with reference pixel
/// `(x + p, y + q)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct MotionVector {
    pub p: i32,
    pub q: i32,
}

impl MotionVector {
    pub const ZERO: MotionVector = MotionVector { p: 0, q: 0 };

    pub fn new(p: i32, q: i32) -> Self {
        Self { p, q }
    }

    pub fn is_zero(&self) -> bool {
        self.p == 0 && self.q == 0
    }

    fn norm2(&self) -> i64 {
        let (p, q) = (self.p as i64, self.q as i64);
        p * p + q * q
    }
}

/// Sum of absolute differences between the `n × n` block at `origin` in
/// `current` and the block displaced by `d` in `reference`.
pub fn sad(
    current: &Frame,
    reference: &Frame,
    origin: (usize, usize),
    n: usize,
    d: MotionVector,
) -> Result<u64> {
    let (x, y) = origin;
    let (rx, ry) = (x as i64 + d.p as i64, y as i64 + d.q as i64);
    let out_of_bounds = || Error::OutOfBounds {
        x: x as i64,
        y: y as i64,
        p: d.p as i64,
        q: d.q as i64,
    };
    if x + n > current.width() || y + n > current.height() {
        return Err(out_of_bounds());
    }
    if rx < 0
        || ry < 0
        || rx as usize + n > reference.width()
        || ry as usize + n > reference.height()
    {
        return Err(out_of_bounds());
    }
    let (rx, ry) = (rx as usize, ry as usize);
    let mut total = 0u64;
    for j in 0..n {
        let a = current.row(y + j, x, n);
        let b = reference.row(ry + j, rx, n);
        total += a
            .iter()
            .zip(b)
            .map(|(&u, &v)| u.abs_diff(v) as u64)
            .sum::<u64>();
    }
    Ok(total)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TssParams {
    pub block_size: usize,
    /// Power of two; the search reaches `2·initial_step − 1` pixels.
    pub initial_step: u32,
    /// Blocks whose zero-displacement SAD is below this stop immediately.
    pub stop_threshold: u64,
}

impl Default for TssParams {
    fn default() -> Self {
        Self::for_block_size(16)
    }
}

impl TssParams {
    /// Step 4 and a threshold of two grey levels per pixel.
    pub fn for_block_size(block_size: usize) -> Self {
        Self {
            block_size,
            initial_step: 4,
            stop_threshold: 2 * (block_size * block_size) as u64,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.block_size == 0 {
            return Err(Error::Config("block_size must be positive".into()));
        }
        if self.initial_step == 0 || !self.initial_step.is_power_of_two() {
            return Err(Error::Config(format!(
                "initial_step must be a power of two, got {}",
                self.initial_step
            )));
        }
        Ok(())
    }

    pub fn max_displacement(&self) -> i32 {
        2 * self.initial_step as i32 - 1
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SearchResult {
    pub vector: MotionVector,
    pub sad: u64,
    /// Number of in-frame candidate positions evaluated.
    pub evaluations: usize,
}

/// `(sad, |v|², p, q)` ordering: lower SAD first, then shorter vectors, then
/// lexicographic.
fn better(a: (u64, MotionVector), b: (u64, MotionVector)) -> bool {
    (a.0, a.1.norm2(), a.1.p, a.1.q) < (b.0, b.1.norm2(), b.1.p, b.1.q)
}

/// Three-step search for one block. Candidates whose displaced block leaves
/// the reference frame are skipped.
pub fn tss_search(
    current: &Frame,
    reference: &Frame,
    origin: (usize, usize),
    params: &TssParams,
) -> Result<SearchResult> {
    params.validate()?;
    let n = params.block_size;
    let mut best_sad = sad(current, reference, origin, n, MotionVector::ZERO)?;
    let mut best = MotionVector::ZERO;
    let mut evaluations = 1;
    if best_sad < params.stop_threshold {
        return Ok(SearchResult {
            vector: best,
            sad: best_sad,
            evaluations,
        });
    }

    let mut step = params.initial_step as i32;
    while step >= 1 {
        let center = best;
        for dq in [-step, 0, step] {
            for dp in [-step, 0, step] {
                if dp == 0 && dq == 0 {
                    continue;
                }
                let cand = MotionVector::new(center.p + dp, center.q + dq);
                let Ok(value) = sad(current, reference, origin, n, cand) else {
                    continue;
                };
                evaluations += 1;
                if better((value, cand), (best_sad, best)) {
                    best_sad = value;
                    best = cand;
                }
            }
        }
        step /= 2;
    }
    Ok(SearchResult {
        vector: best,
        sad: best_sad,
        evaluations,
    })
}

/// Exhaustive search over `|p|, |q| ≤ range` with the same tie-breaking as
/// [`tss_search`].
pub fn full_search(
    current: &Frame,
    reference: &Frame,
    origin: (usize, usize),
    block_size: usize,
    range: i32,
) -> Result<SearchResult> {
    let mut best_sad = sad(current, reference, origin, block_size, MotionVector::ZERO)?;
    let mut best = MotionVector::ZERO;
    let mut evaluations = 1;
    for q in -range..=range {
        for p in -range..=range {
            let cand = MotionVector::new(p, q);
            if cand.is_zero() {
                continue;
            }
            let Ok(value) = sad(current, reference, origin, block_size, cand) else {
                continue;
            };
            evaluations += 1;
            if better((value, cand), (best_sad, best)) {
                best_sad = value;
                best = cand;
            }
        }
    }
    Ok(SearchResult {
        vector: best,
        sad: best_sad,
        evaluations,
    })
}

/// Per-block motion vectors over a grid of disjoint blocks.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MotionField {
    pub blocks_x: usize,
    pub blocks_y: usize,
    pub block_size: usize,
    pub vectors: Vec<MotionVector>,
}

impl MotionField {
    pub fn zeros(blocks_x: usize, blocks_y: usize, block_size: usize) -> Self {
        Self {
            blocks_x,
            blocks_y,
            block_size,
            vectors: vec![MotionVector::ZERO; blocks_x * blocks_y],
        }
    }

    pub fn get(&self, bx: usize, by: usize) -> MotionVector {
        self.vectors[by * self.blocks_x + bx]
    }

    pub fn set(&mut self, bx: usize, by: usize, v: MotionVector) {
        self.vectors[by * self.blocks_x + bx] = v;
    }

    pub fn moving_blocks(&self) -> usize {
        self.vectors.iter().filter(|v| !v.is_zero()).count()
    }
}

/// Run the three-step search on every full block of the frame. Blocks cut off
/// by the right or bottom edge keep a zero vector.
pub fn compute_motion_field(
    current: &Frame,
    reference: &Frame,
    params: &TssParams,
) -> Result<MotionField> {
    params.validate()?;
    if current.width() != reference.width() || current.height() != reference.height() {
        return Err(Error::DimensionMismatch(format!(
            "frames are {}x{} and {}x{}",
            current.width(),
            current.height(),
            reference.width(),
            reference.height()
        )));
    }
    let n = params.block_size;
    if current.width() < n || current.height() < n {
        return Err(Error::InvalidFrame(format!(
            "{}x{} frame is smaller than the {n}px block",
            current.width(),
            current.height()
        )));
    }
    let blocks_x = current.width().div_ceil(n);
    let blocks_y = current.height().div_ceil(n);
    let vectors = (0..blocks_x * blocks_y)
        .into_par_iter()
        .map(|i| {
            let (x, y) = ((i % blocks_x) * n, (i / blocks_x) * n);
            if x + n > current.width() || y + n > current.height() {
                return Ok(MotionVector::ZERO);
            }
            tss_search(current, reference, (x, y), params).map(|r| r.vector)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(MotionField {
        blocks_x,
        blocks_y,
        block_size: n,
        vectors,
    })
}
