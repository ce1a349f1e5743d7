use ukf_tracker::detector::{Detection, DetectorConfig};
use ukf_tracker::scene::{Motion, Scene, SceneObject, Sprite};
use ukf_tracker::tracker::{
    export_tracks, track_sequence, track_sequence_from, TrackStatus, Tracker, TrackingSetup,
};

/// One square crossing a 448 px wide frame at 3 px/frame, long enough for a
/// 120-frame run.
fn long_run() -> Scene {
    Scene {
        width: 448,
        height: 128,
        background: 30,
        objects: vec![SceneObject {
            sprite: Sprite::textured(32, 5),
            origin: (24, 40),
            motion: Motion::Linear { vx: 3, vy: 0 },
        }],
    }
}

#[test]
fn window_centres_are_the_previous_prediction() {
    let scene = Scene::crossing_pair();
    let frames = scene.sequence(60);
    let (_, first) = DetectorConfig::default()
        .detect(&frames[1], &frames[0])
        .unwrap();
    let mut tracker = Tracker::init(&first, TrackingSetup::default(), 1).unwrap();
    for pair in frames[1..].windows(2) {
        let predicted = tracker.predict_all().unwrap();
        let out = tracker.step(&pair[1], &pair[0]).unwrap();
        let centres: Vec<(f64, f64)> = predicted.iter().map(|p| (p.x, p.y)).collect();
        assert_eq!(out.window_centers, centres);
        for (t, p) in tracker.tracks().iter().zip(&predicted) {
            assert_eq!(&t.history.last().unwrap().predicted, p);
        }
    }
}

#[test]
fn ids_are_stable_and_rows_are_ordered() {
    let frames = Scene::crossing_pair().sequence(80);
    let tracker = track_sequence(&frames, TrackingSetup::default()).unwrap();
    for (i, t) in tracker.tracks().iter().enumerate() {
        assert_eq!(t.id, i);
        assert_eq!(t.history.len(), 78);
        assert!(t.history.windows(2).all(|w| w[1].frame == w[0].frame + 1));
    }
    let rows = export_tracks(&tracker);
    assert_eq!(rows.len(), 2 * 78);
    assert!(rows
        .windows(2)
        .all(|w| (w[0].frame, w[0].id) < (w[1].frame, w[1].id)));
}

#[test]
fn filtering_beats_raw_centroids_on_a_clean_run() {
    let scene = long_run();
    let frames = scene.sequence(120);
    let tracker = track_sequence(&frames, TrackingSetup::default()).unwrap();
    let track = &tracker.tracks()[0];
    assert!(track
        .history
        .iter()
        .all(|r| r.status == TrackStatus::Tracked));

    let (mut filtered, mut raw) = (0.0, 0.0);
    for r in &track.history {
        let (tx, ty) = scene.objects[0].center(r.frame);
        let det = r.detection.as_ref().unwrap();
        filtered += (r.estimate.x - tx).hypot(r.estimate.y - ty);
        raw += det.distance_to(tx, ty);
    }
    let n = track.history.len() as f64;
    assert!(n >= 100.0);
    assert!(
        filtered / n <= raw / n,
        "filter {:.3} px vs detector {:.3} px",
        filtered / n,
        raw / n
    );
}

#[test]
fn externally_seeded_tracks_match_detected_ones() {
    let scene = long_run();
    let frames = scene.sequence(30);
    let (x, y) = scene.objects[0].center(0);
    let tracker = track_sequence_from(
        &frames,
        &[Detection::at(x, y, (3.0, 0.0))],
        TrackingSetup::default(),
    )
    .unwrap();
    let last = tracker.tracks()[0].history.last().unwrap();
    assert_eq!(last.frame, 29);
    let (tx, ty) = scene.objects[0].center(29);
    assert!((last.estimate.x - tx).hypot(last.estimate.y - ty) <= 16.0);
    let history = &tracker.tracks()[0].history;
    let mean_vx = history.iter().map(|r| r.estimate.vx).sum::<f64>() / history.len() as f64;
    assert!((mean_vx - 3.0).abs() < 0.5, "mean vx {mean_vx}");
}

#[test]
fn runs_are_repeatable() {
    let frames = Scene::crossing_pair().sequence(40);
    let a = track_sequence(&frames, TrackingSetup::default()).unwrap();
    let b = track_sequence(&frames, TrackingSetup::default()).unwrap();
    assert_eq!(export_tracks(&a), export_tracks(&b));
}
