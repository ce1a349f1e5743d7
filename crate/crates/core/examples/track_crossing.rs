//! Track two objects whose paths cross. While their detections are merged
//! both tracks coast on the filter prediction; afterwards each picks up its
//! own object again.

use ukf_tracker::scene::Scene;
use ukf_tracker::tracker::{track_sequence, TrackStatus, TrackingSetup};

fn main() -> ukf_tracker::Result<()> {
    let scene = Scene::crossing_pair();
    let frames = scene.sequence(240);

    // Block-quantised centroids are uniform over a block, so R matches that
    // spread; the objects move at constant velocity, so Q and the initial
    // acceleration uncertainty are tiny.
    let mut setup = TrackingSetup::default();
    setup.noise.measurement_sigma = 16.0 / 12f64.sqrt();
    setup.noise.process_q = 1e-8;
    setup.tracker.init_sigma_acceleration = 1e-3;

    let tracker = track_sequence(&frames, setup)?;
    let steps = tracker.tracks()[0].history.len();
    for k in (0..steps).step_by(8) {
        let frame = tracker.tracks()[0].history[k].frame;
        let mut line = format!("frame {frame:>3}");
        for t in tracker.tracks() {
            let r = &t.history[k];
            let (tx, ty) = scene.objects[t.id].center(frame);
            let flag = match r.status {
                TrackStatus::Tracked => ' ',
                TrackStatus::Occluded => '*',
            };
            line += &format!(
                "  | id {} ({:6.1}, {:6.1}){flag} truth ({:3.0}, {:3.0})",
                t.id, r.estimate.x, r.estimate.y, tx, ty
            );
        }
        println!("{line}");
    }
    println!("* = occluded, coasting on the prediction");
    Ok(())
}
