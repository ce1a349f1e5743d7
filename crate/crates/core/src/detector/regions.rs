//! Grouping moving blocks into object detections and pruning background
//! clutter.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use super::MotionField;
use crate::error::{Error, Result};

/// Pixel rectangle `[x, x + width) × [y, y + height)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PixelRect {
    pub x: usize,
    pub y: usize,
    pub width: usize,
    pub height: usize,
}

impl PixelRect {
    pub fn contains(&self, px: f64, py: f64) -> bool {
        px >= self.x as f64
            && py >= self.y as f64
            && px <= (self.x + self.width) as f64
            && py <= (self.y + self.height) as f64
    }

    /// Does this rectangle overlap the square of half-width `half` around
    /// `(cx, cy)`?
    pub fn intersects_window(&self, cx: f64, cy: f64, half: f64) -> bool {
        let (x0, y0) = (self.x as f64, self.y as f64);
        let (x1, y1) = (x0 + self.width as f64, y0 + self.height as f64);
        x0 <= cx + half && x1 >= cx - half && y0 <= cy + half && y1 >= cy - half
    }
}

/// A connected region of moving blocks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Detection {
    /// Mean of the member block centres, in pixels.
    pub centroid: (f64, f64),
    pub block_count: usize,
    pub bbox: PixelRect,
    /// Mean block-matching vector `(p, q)` over the member blocks. It points
    /// from the current frame back into the reference frame.
    pub mean_vector: (f64, f64),
    /// Member blocks as `(bx, by)` grid coordinates, row-major order.
    pub blocks: Vec<(usize, usize)>,
}

impl Detection {
    /// Displacement of the region from the reference frame to the current
    /// frame, the negation of `mean_vector`.
    pub fn motion(&self) -> (f64, f64) {
        (-self.mean_vector.0, -self.mean_vector.1)
    }

    pub fn distance_to(&self, x: f64, y: f64) -> f64 {
        (self.centroid.0 - x).hypot(self.centroid.1 - y)
    }

    /// Detection for a known location and motion, with no block support.
    /// Used for externally supplied initial locations and measurement-level
    /// tracking.
    pub fn at(x: f64, y: f64, motion: (f64, f64)) -> Self {
        Self {
            centroid: (x, y),
            block_count: 0,
            bbox: PixelRect {
                x: x.max(0.0) as usize,
                y: y.max(0.0) as usize,
                width: 0,
                height: 0,
            },
            mean_vector: (-motion.0, -motion.1),
            blocks: Vec::new(),
        }
    }
}

/// 8-connected regions of non-zero motion vectors with at least
/// `min_region_blocks` members, ordered by their first block in row-major
/// scan order.
pub fn extract_objects(field: &MotionField, min_region_blocks: usize) -> Vec<Detection> {
    let (bw, bh) = (field.blocks_x, field.blocks_y);
    let mut seen = vec![false; bw * bh];
    let mut out = Vec::new();
    let mut queue = VecDeque::new();

    for start in 0..bw * bh {
        if seen[start] || field.vectors[start].is_zero() {
            continue;
        }
        seen[start] = true;
        queue.push_back(start);
        let mut members = Vec::new();
        while let Some(i) = queue.pop_front() {
            members.push(i);
            let (bx, by) = ((i % bw) as i64, (i / bw) as i64);
            for dy in -1..=1 {
                for dx in -1..=1 {
                    let (nx, ny) = (bx + dx, by + dy);
                    if nx < 0 || ny < 0 || nx >= bw as i64 || ny >= bh as i64 {
                        continue;
                    }
                    let j = ny as usize * bw + nx as usize;
                    if !seen[j] && !field.vectors[j].is_zero() {
                        seen[j] = true;
                        queue.push_back(j);
                    }
                }
            }
        }
        if members.len() >= min_region_blocks.max(1) {
            members.sort_unstable();
            out.push(region_to_detection(field, &members));
        }
    }
    out
}

fn region_to_detection(field: &MotionField, members: &[usize]) -> Detection {
    let n = field.block_size;
    let bw = field.blocks_x;
    let count = members.len() as f64;
    let blocks: Vec<(usize, usize)> = members.iter().map(|&i| (i % bw, i / bw)).collect();

    let (mut cx, mut cy, mut mp, mut mq) = (0.0, 0.0, 0.0, 0.0);
    for (&(bx, by), &i) in blocks.iter().zip(members) {
        cx += (bx * n) as f64 + n as f64 / 2.0;
        cy += (by * n) as f64 + n as f64 / 2.0;
        mp += field.vectors[i].p as f64;
        mq += field.vectors[i].q as f64;
    }
    let min_bx = blocks.iter().map(|b| b.0).min().unwrap_or(0);
    let max_bx = blocks.iter().map(|b| b.0).max().unwrap_or(0);
    let min_by = blocks.iter().map(|b| b.1).min().unwrap_or(0);
    let max_by = blocks.iter().map(|b| b.1).max().unwrap_or(0);

    Detection {
        centroid: (cx / count, cy / count),
        block_count: members.len(),
        bbox: PixelRect {
            x: min_bx * n,
            y: min_by * n,
            width: (max_bx - min_bx + 1) * n,
            height: (max_by - min_by + 1) * n,
        },
        mean_vector: (mp / count, mq / count),
        blocks,
    }
}

/// Keep the detections of the newest frame in `history` that can be chained
/// back through every earlier frame (nearest centroid within one block size)
/// and whose accumulated motion over the chain exceeds half a block size.
///
/// `history` holds the last `w ≥ 2` frames of detections, oldest first.
pub fn temporal_consistency_filter(
    history: &[Vec<Detection>],
    block_size: usize,
) -> Result<Vec<Detection>> {
    if history.len() < 2 {
        return Err(Error::Config(format!(
            "temporal window must cover at least 2 frames, got {}",
            history.len()
        )));
    }
    let reach = block_size as f64;
    let min_travel = block_size as f64 / 2.0;
    let (newest, earlier) = history.split_last().expect("non-empty history");

    let kept = newest
        .iter()
        .filter(|det| {
            let mut cur = *det;
            let (mut tx, mut ty) = cur.motion();
            for frame in earlier.iter().rev() {
                let prev = frame
                    .iter()
                    .map(|d| (d.distance_to(cur.centroid.0, cur.centroid.1), d))
                    .filter(|(dist, _)| *dist <= reach)
                    .min_by(|a, b| a.0.total_cmp(&b.0));
                let Some((_, prev)) = prev else {
                    return false;
                };
                let (mx, my) = prev.motion();
                tx += mx;
                ty += my;
                cur = prev;
            }
            tx.hypot(ty) > min_travel
        })
        .cloned()
        .collect();
    Ok(kept)
}

#[cfg(test)]
mod tests {
    use super::super::MotionVector;
    use super::*;

    fn field_with(blocks: &[(usize, usize)], v: MotionVector) -> MotionField {
        let mut f = MotionField::zeros(10, 8, 16);
        for &(bx, by) in blocks {
            f.set(bx, by, v);
        }
        f
    }

    #[test]
    fn empty_field_has_no_objects() {
        assert!(extract_objects(&MotionField::zeros(5, 5, 16), 1).is_empty());
    }

    #[test]
    fn two_by_three_cluster() {
        let blocks: Vec<_> = (2..5)
            .flat_map(|bx| (1..3).map(move |by| (bx, by)))
            .collect();
        let f = field_with(&blocks, MotionVector::new(-2, 1));
        let dets = extract_objects(&f, 3);
        assert_eq!(dets.len(), 1);
        let d = &dets[0];
        assert_eq!(d.block_count, 6);
        // blocks x 2..5 span pixels 32..80, y 1..3 span 16..48
        assert_eq!(d.centroid, (56.0, 32.0));
        assert_eq!(
            d.bbox,
            PixelRect {
                x: 32,
                y: 16,
                width: 48,
                height: 32
            }
        );
        assert_eq!(d.mean_vector, (-2.0, 1.0));
        assert_eq!(d.motion(), (2.0, -1.0));
        assert!(d.bbox.contains(d.centroid.0, d.centroid.1));
    }

    #[test]
    fn isolated_blocks_are_pruned() {
        let mut blocks: Vec<_> = (2..5)
            .flat_map(|bx| (1..3).map(move |by| (bx, by)))
            .collect();
        blocks.push((8, 6));
        blocks.push((0, 7));
        let f = field_with(&blocks, MotionVector::new(1, 0));
        let dets = extract_objects(&f, 3);
        assert_eq!(dets.len(), 1);
        assert_eq!(dets[0].block_count, 6);
        assert_eq!(extract_objects(&f, 1).len(), 3);
    }

    #[test]
    fn diagonal_neighbours_connect() {
        let f = field_with(&[(1, 1), (2, 2), (3, 3)], MotionVector::new(0, 3));
        let dets = extract_objects(&f, 3);
        assert_eq!(dets.len(), 1);
        assert_eq!(dets[0].blocks, vec![(1, 1), (2, 2), (3, 3)]);
    }

    fn det(x: f64, y: f64, motion: (f64, f64)) -> Detection {
        Detection::at(x, y, motion)
    }

    #[test]
    fn steady_mover_is_kept() {
        let history = vec![
            vec![det(40.0, 50.0, (4.0, 0.0))],
            vec![det(44.0, 50.0, (4.0, 0.0))],
            vec![det(48.0, 50.0, (4.0, 0.0))],
        ];
        let kept = temporal_consistency_filter(&history, 16).unwrap();
        assert_eq!(kept.len(), 1);
    }

    #[test]
    fn flicker_is_removed() {
        let history = vec![vec![], vec![], vec![det(48.0, 50.0, (4.0, 0.0))]];
        assert!(temporal_consistency_filter(&history, 16)
            .unwrap()
            .is_empty());
        let history = vec![vec![det(48.0, 50.0, (4.0, 0.0))], vec![], vec![]];
        assert!(temporal_consistency_filter(&history, 16)
            .unwrap()
            .is_empty());
    }

    #[test]
    fn oscillating_region_is_removed() {
        let history = vec![
            vec![det(100.0, 20.0, (4.0, 0.0))],
            vec![det(96.0, 20.0, (-4.0, 0.0))],
            vec![det(100.0, 20.0, (4.0, 0.0))],
        ];
        assert!(temporal_consistency_filter(&history, 16)
            .unwrap()
            .is_empty());
    }

    #[test]
    fn window_must_span_two_frames() {
        assert!(temporal_consistency_filter(&[vec![]], 16).is_err());
    }
}
