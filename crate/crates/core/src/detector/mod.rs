//! Block-matching moving-object detection.

mod block_match;
mod frame;
mod regions;

pub use block_match::{
    compute_motion_field, full_search, sad, tss_search, MotionField, MotionVector, SearchResult,
    TssParams,
};
pub use frame::{list_pgm_files, load_sequence, Frame};
pub use regions::{extract_objects, temporal_consistency_filter, Detection, PixelRect};

use std::collections::VecDeque;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Detector settings. `stop_threshold` defaults to `2·block_size²` when not
/// set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DetectorConfig {
    pub block_size: usize,
    pub initial_step: u32,
    pub stop_threshold: Option<u64>,
    pub min_region_blocks: usize,
    pub temporal_window: usize,
    /// Apply the temporal consistency filter in the detection workflow.
    pub temporal_filter: bool,
}

impl Default for DetectorConfig {
    fn default() -> Self {
        Self {
            block_size: 16,
            initial_step: 4,
            stop_threshold: None,
            min_region_blocks: 3,
            temporal_window: 3,
            temporal_filter: false,
        }
    }
}

impl DetectorConfig {
    pub fn tss(&self) -> TssParams {
        let mut p = TssParams::for_block_size(self.block_size);
        p.initial_step = self.initial_step;
        if let Some(t) = self.stop_threshold {
            p.stop_threshold = t;
        }
        p
    }

    /// Copy with every defaulted value filled in.
    pub fn resolved(&self) -> Self {
        Self {
            stop_threshold: Some(self.tss().stop_threshold),
            ..self.clone()
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.tss().validate()?;
        if self.min_region_blocks == 0 {
            return Err(Error::Config("min_region_blocks must be at least 1".into()));
        }
        if self.temporal_window < 2 {
            return Err(Error::Config("temporal_window must be at least 2".into()));
        }
        Ok(())
    }

    /// Motion field plus connected regions for one frame pair.
    pub fn detect(
        &self,
        current: &Frame,
        reference: &Frame,
    ) -> Result<(MotionField, Vec<Detection>)> {
        let field = compute_motion_field(current, reference, &self.tss())?;
        let dets = extract_objects(&field, self.min_region_blocks);
        Ok((field, dets))
    }
}

/// Detections for the pair `(frames[frame − 1], frames[frame])`.
#[derive(Debug, Clone, PartialEq)]
pub struct PairDetections {
    pub frame: usize,
    pub field: MotionField,
    pub detections: Vec<Detection>,
}

/// Detect every consecutive frame pair. With `temporal_filter` set, each
/// pair is filtered against the raw detections of the preceding pairs, so the
/// first `temporal_window − 1` pairs report nothing.
pub fn detect_sequence(frames: &[Frame], config: &DetectorConfig) -> Result<Vec<PairDetections>> {
    config.validate()?;
    let w = config.temporal_window;
    let mut history: VecDeque<Vec<Detection>> = VecDeque::with_capacity(w);
    let mut out = Vec::with_capacity(frames.len().saturating_sub(1));
    for (k, pair) in frames.windows(2).enumerate() {
        let (field, raw) = config.detect(&pair[1], &pair[0])?;
        let detections = if config.temporal_filter {
            if history.len() == w {
                history.pop_front();
            }
            history.push_back(raw);
            if history.len() < w {
                Vec::new()
            } else {
                temporal_consistency_filter(history.make_contiguous(), config.block_size)?
            }
        } else {
            raw
        };
        out.push(PairDetections {
            frame: k + 1,
            field,
            detections,
        });
    }
    Ok(out)
}

/// One row per detection: `frame, region_id, centroid_x, centroid_y,
/// block_count, mean_p, mean_q`. `mean_p, mean_q` are the raw block-matching
/// averages (reference minus current).
pub fn write_detections_csv<W: Write>(pairs: &[PairDetections], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "frame",
        "region_id",
        "centroid_x",
        "centroid_y",
        "block_count",
        "mean_p",
        "mean_q",
    ])?;
    for pair in pairs {
        for (id, d) in pair.detections.iter().enumerate() {
            w.write_record([
                pair.frame.to_string(),
                id.to_string(),
                format!("{:.6}", d.centroid.0),
                format!("{:.6}", d.centroid.1),
                d.block_count.to_string(),
                format!("{:.6}", d.mean_vector.0),
                format!("{:.6}", d.mean_vector.1),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Every block of every field: `frame, bx, by, p, q`.
pub fn write_motion_field_csv<W: Write>(pairs: &[PairDetections], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["frame", "bx", "by", "p", "q"])?;
    for pair in pairs {
        let f = &pair.field;
        for by in 0..f.blocks_y {
            for bx in 0..f.blocks_x {
                let v = f.get(bx, by);
                w.write_record([
                    pair.frame.to_string(),
                    bx.to_string(),
                    by.to_string(),
                    v.p.to_string(),
                    v.q.to_string(),
                ])?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scene::Scene;

    #[test]
    fn leaves_are_dropped_by_temporal_filter() {
        let frames = Scene::square_with_leaves().sequence(12);
        let mut cfg = DetectorConfig::default();
        let raw = detect_sequence(&frames, &cfg).unwrap();
        assert!(raw.iter().all(|p| p.detections.len() == 2));

        cfg.temporal_filter = true;
        let filtered = detect_sequence(&frames, &cfg).unwrap();
        assert!(filtered[..2].iter().all(|p| p.detections.is_empty()));
        for p in &filtered[2..] {
            assert_eq!(p.detections.len(), 1, "pair {}", p.frame);
            assert!(p.detections[0].centroid.1 < 100.0);
        }
    }

    #[test]
    fn csv_layouts() {
        let frames = Scene::moving_square().sequence(3);
        let pairs = detect_sequence(&frames, &DetectorConfig::default()).unwrap();
        let mut buf = Vec::new();
        write_detections_csv(&pairs, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(
            lines[0],
            "frame,region_id,centroid_x,centroid_y,block_count,mean_p,mean_q"
        );
        assert_eq!(lines.len(), 3);
        assert!(lines[1].starts_with("1,0,"));
        assert!(lines[1].ends_with(",-4.000000,0.000000"));

        let mut buf = Vec::new();
        write_motion_field_csv(&pairs, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 1 + 2 * 16 * 10);
    }

    #[test]
    fn invalid_config_is_rejected() {
        let cfg = DetectorConfig {
            min_region_blocks: 0,
            ..DetectorConfig::default()
        };
        assert!(matches!(detect_sequence(&[], &cfg), Err(Error::Config(_))));
    }
}
