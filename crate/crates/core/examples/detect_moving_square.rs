//! Detect a moving square next to an oscillating distractor, with and
//! without the temporal consistency filter.

use ukf_tracker::detector::{detect_sequence, DetectorConfig};
use ukf_tracker::scene::Scene;

fn main() -> ukf_tracker::Result<()> {
    let scene = Scene::square_with_leaves();
    let frames = scene.sequence(12);

    for temporal_filter in [false, true] {
        let cfg = DetectorConfig {
            temporal_filter,
            ..DetectorConfig::default()
        };
        println!("temporal filter {temporal_filter}");
        for pair in detect_sequence(&frames, &cfg)? {
            let truth = scene.objects[0].center(pair.frame);
            let found: Vec<String> = pair
                .detections
                .iter()
                .map(|d| {
                    let m = d.motion();
                    format!(
                        "({:.0}, {:.0}) {} blocks moving ({:+.1}, {:+.1})",
                        d.centroid.0, d.centroid.1, d.block_count, m.0, m.1
                    )
                })
                .collect();
            println!(
                "  frame {:>2} square at ({:.0}, {:.0}): {}",
                pair.frame,
                truth.0,
                truth.1,
                if found.is_empty() {
                    "-".into()
                } else {
                    found.join("; ")
                }
            );
        }
    }
    Ok(())
}
