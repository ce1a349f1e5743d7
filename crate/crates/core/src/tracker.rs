//! Closed-loop multi-object tracking.
//!
//! All `M` objects share one stacked unscented filter over a `6M` state. Each
//! frame the filter predicts every object, the predictions centre the
//! detection windows, detections are associated greedily by distance, and the
//! filter is updated with the positions of the objects that were matched.
//! Objects without a clean match (including both parties of a merged blob)
//! coast on their prediction.

use std::io::Write;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::detector::{Detection, DetectorConfig, Frame, MotionField};
use crate::error::{Error, Result};
use crate::filters::{ukf_predict, ukf_update_partial, GaussianState, NoiseModel, SystemModel};
use crate::motion::{
    noise_model, pack_state, system_model, unpack_state, MultiObjectLayout, NoiseConfig,
    ObjectKinematics, OBJECT_STATE_DIM,
};
use crate::ut::{compute_weights, UtConfig, UtWeights};

/// Association gate radius in pixels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Gate {
    /// `2·block_size + |predicted velocity|·dt`, recomputed every frame.
    Auto(AutoGate),
    Fixed(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AutoGate {
    Auto,
}

impl Default for Gate {
    fn default() -> Self {
        Gate::Auto(AutoGate::Auto)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrackerConfig {
    pub gate_radius: Gate,
    /// Frame interval in frames.
    pub dt: f64,
    /// Initial position standard deviation; `None` means one block size.
    pub init_sigma_position: Option<f64>,
    pub init_sigma_velocity: f64,
    pub init_sigma_acceleration: f64,
}

impl Default for TrackerConfig {
    fn default() -> Self {
        Self {
            gate_radius: Gate::default(),
            dt: 1.0,
            init_sigma_position: None,
            init_sigma_velocity: 2.0,
            init_sigma_acceleration: 1.0,
        }
    }
}

/// Everything the tracking loop needs.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TrackingSetup {
    pub detector: DetectorConfig,
    pub ut: UtConfig,
    pub noise: NoiseConfig,
    pub tracker: TrackerConfig,
}

impl TrackingSetup {
    pub fn validate(&self) -> Result<()> {
        self.detector.validate()?;
        self.ut.validate()?;
        self.noise.validate()?;
        let t = &self.tracker;
        if !(t.dt.is_finite() && t.dt > 0.0) {
            return Err(Error::Config(format!("dt must be positive, got {}", t.dt)));
        }
        if let Gate::Fixed(r) = t.gate_radius {
            if r.is_nan() || r < self.detector.block_size as f64 {
                return Err(Error::Config(format!(
                    "gate_radius {r} is smaller than the block size {}",
                    self.detector.block_size
                )));
            }
        }
        let sigmas = [
            t.init_sigma_position.unwrap_or(1.0),
            t.init_sigma_velocity,
            t.init_sigma_acceleration,
        ];
        if sigmas.iter().any(|s| !(s.is_finite() && *s >= 0.0)) {
            return Err(Error::Config(
                "initial standard deviations must be >= 0".into(),
            ));
        }
        Ok(())
    }

    fn init_sigma_position(&self) -> f64 {
        self.tracker
            .init_sigma_position
            .unwrap_or(self.detector.block_size as f64)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TrackStatus {
    Tracked,
    Occluded,
}

impl TrackStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            TrackStatus::Tracked => "tracked",
            TrackStatus::Occluded => "occluded",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrackRecord {
    pub frame: usize,
    /// Filter prediction for this frame; also the centre of the detection
    /// window.
    pub predicted: ObjectKinematics,
    pub estimate: ObjectKinematics,
    pub status: TrackStatus,
    pub detection: Option<Detection>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Track {
    pub id: usize,
    pub status: TrackStatus,
    /// Marginal of the stacked filter over this object's six states.
    pub state: GaussianState,
    pub history: Vec<TrackRecord>,
}

/// Greedy nearest-neighbour assignment.
///
/// All `(track, detection)` pairs within the track's gate are visited in
/// ascending distance (ties by track then detection index); each track and
/// each detection is used at most once. Returns the detection index chosen
/// for every track.
pub fn associate(
    predictions: &[(f64, f64)],
    detections: &[Detection],
    gates: &[f64],
) -> Vec<Option<usize>> {
    assert_eq!(predictions.len(), gates.len(), "one gate per prediction");
    let mut pairs: Vec<(f64, usize, usize)> = Vec::new();
    for (t, (&(px, py), &gate)) in predictions.iter().zip(gates).enumerate() {
        for (d, det) in detections.iter().enumerate() {
            let dist = det.distance_to(px, py);
            if dist <= gate {
                pairs.push((dist, t, d));
            }
        }
    }
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));

    let mut assignment = vec![None; predictions.len()];
    let mut taken = vec![false; detections.len()];
    for (_, t, d) in pairs {
        if assignment[t].is_none() && !taken[d] {
            assignment[t] = Some(d);
            taken[d] = true;
        }
    }
    assignment
}

/// Per-frame output of [`Tracker::step`].
#[derive(Debug, Clone, PartialEq)]
pub struct StepOutput {
    pub frame: usize,
    pub estimates: Vec<ObjectKinematics>,
    /// Detection window centres (the predicted positions).
    pub window_centers: Vec<(f64, f64)>,
    pub gates: Vec<f64>,
    /// Detections that intersected at least one window.
    pub detections: Vec<Detection>,
    pub field: Option<MotionField>,
}

#[derive(Debug, Clone)]
pub struct Tracker {
    setup: TrackingSetup,
    layout: MultiObjectLayout,
    model: SystemModel,
    noise: NoiseModel,
    weights: UtWeights,
    posterior: GaussianState,
    tracks: Vec<Track>,
    frame: usize,
}

impl Tracker {
    /// Start one track per detection. `frame` is the index of the current
    /// frame of the pair the detections came from; the first
    /// [`Tracker::step`] processes `frame + 1`.
    pub fn init(
        first_detections: &[Detection],
        setup: TrackingSetup,
        frame: usize,
    ) -> Result<Self> {
        setup.validate()?;
        if first_detections.is_empty() {
            return Err(Error::EmptyDetections);
        }
        let dt = setup.tracker.dt;
        let layout = MultiObjectLayout::new(first_detections.len(), dt)?;
        let objects: Vec<ObjectKinematics> = first_detections
            .iter()
            .map(|d| {
                let (mx, my) = d.motion();
                ObjectKinematics {
                    x: d.centroid.0,
                    vx: mx / dt,
                    ax: 0.0,
                    y: d.centroid.1,
                    vy: my / dt,
                    ay: 0.0,
                }
            })
            .collect();
        let sp = setup.init_sigma_position();
        let sv = setup.tracker.init_sigma_velocity;
        let sa = setup.tracker.init_sigma_acceleration;
        let axis = [sp * sp, sv * sv, sa * sa];
        let cov = DMatrix::from_diagonal(&DVector::from_iterator(
            layout.state_dim(),
            (0..2 * layout.m).flat_map(|_| axis),
        ));
        let posterior = GaussianState::new(pack_state(&objects), cov)?;
        let weights = compute_weights(layout.state_dim(), &setup.ut)?;
        let noise = noise_model(&layout, &setup.noise)?;
        let tracks = (0..layout.m)
            .map(|id| Track {
                id,
                status: TrackStatus::Tracked,
                state: posterior.marginal(id * OBJECT_STATE_DIM, OBJECT_STATE_DIM),
                history: Vec::new(),
            })
            .collect();
        Ok(Self {
            model: system_model(&layout),
            setup,
            layout,
            noise,
            weights,
            posterior,
            tracks,
            frame,
        })
    }

    pub fn setup(&self) -> &TrackingSetup {
        &self.setup
    }

    pub fn layout(&self) -> &MultiObjectLayout {
        &self.layout
    }

    pub fn tracks(&self) -> &[Track] {
        &self.tracks
    }

    /// Stacked posterior after the latest step.
    pub fn state(&self) -> &GaussianState {
        &self.posterior
    }

    /// Index of the most recently processed frame.
    pub fn frame(&self) -> usize {
        self.frame
    }

    pub fn model(&self) -> &SystemModel {
        &self.model
    }

    pub fn noise(&self) -> &NoiseModel {
        &self.noise
    }

    pub fn weights(&self) -> &UtWeights {
        &self.weights
    }

    pub fn estimates(&self) -> Vec<ObjectKinematics> {
        unpack_state(&self.posterior.mean).expect("state length is a multiple of 6")
    }

    fn predict_state(&self) -> Result<GaussianState> {
        let (predicted, _) = ukf_predict(&self.posterior, &self.model, &self.noise, &self.weights)?;
        Ok(predicted)
    }

    /// One-frame-ahead prediction of every object. Does not change the
    /// tracker.
    pub fn predict_all(&self) -> Result<Vec<ObjectKinematics>> {
        unpack_state(&self.predict_state()?.mean)
    }

    fn gates(&self, predictions: &[ObjectKinematics]) -> Vec<f64> {
        match self.setup.tracker.gate_radius {
            Gate::Fixed(r) => vec![r; predictions.len()],
            Gate::Auto(_) => {
                let base = 2.0 * self.setup.detector.block_size as f64;
                predictions
                    .iter()
                    .map(|p| base + p.vx.hypot(p.vy) * self.setup.tracker.dt)
                    .collect()
            }
        }
    }

    /// Full loop on one frame pair: block matching over the frame, keep the
    /// regions touching some prediction window, associate and update.
    pub fn step(&mut self, current: &Frame, reference: &Frame) -> Result<StepOutput> {
        let predictions = self.predict_all()?;
        let gates = self.gates(&predictions);
        let (field, regions) = self.setup.detector.detect(current, reference)?;
        let windowed: Vec<Detection> = regions
            .into_iter()
            .filter(|d| {
                predictions
                    .iter()
                    .zip(&gates)
                    .any(|(p, &g)| d.bbox.intersects_window(p.x, p.y, g))
            })
            .collect();
        let mut out = self.step_with_detections(&windowed)?;
        out.field = Some(field);
        Ok(out)
    }

    /// Measurement-level step: predict, associate `detections`, update.
    pub fn step_with_detections(&mut self, detections: &[Detection]) -> Result<StepOutput> {
        let predicted = self.predict_state()?;
        let predictions = unpack_state(&predicted.mean)?;
        let gates = self.gates(&predictions);
        let centers: Vec<(f64, f64)> = predictions.iter().map(|p| (p.x, p.y)).collect();
        let mut assignment = associate(&centers, detections, &gates);

        // A detection inside the gate of a track that went unmatched is a
        // merged blob: nobody gets updated with it.
        let unmatched: Vec<usize> = (0..assignment.len())
            .filter(|&t| assignment[t].is_none())
            .collect();
        for slot in assignment.iter_mut() {
            if let Some(d) = *slot {
                let det = &detections[d];
                let contested = unmatched
                    .iter()
                    .any(|&u| det.distance_to(centers[u].0, centers[u].1) <= gates[u]);
                if contested {
                    *slot = None;
                }
            }
        }

        let assigned: Vec<usize> = (0..assignment.len())
            .filter(|&t| assignment[t].is_some())
            .collect();
        let posterior = if assigned.is_empty() {
            predicted.clone()
        } else {
            let rows: Vec<usize> = assigned.iter().flat_map(|&t| [2 * t, 2 * t + 1]).collect();
            let y = DVector::from_iterator(
                rows.len(),
                assigned.iter().flat_map(|&t| {
                    let c = detections[assignment[t].unwrap()].centroid;
                    [c.0, c.1]
                }),
            );
            let frozen: Vec<bool> = (0..self.layout.state_dim())
                .map(|i| assignment[i / OBJECT_STATE_DIM].is_none())
                .collect();
            ukf_update_partial(
                &predicted,
                &self.model.select_measurements(&rows),
                &self.noise.select_measurements(&rows),
                &self.weights,
                &y,
                &frozen,
            )?
        };

        self.frame += 1;
        let estimates = unpack_state(&posterior.mean)?;
        for (t, track) in self.tracks.iter_mut().enumerate() {
            let detection = assignment[t].map(|d| detections[d].clone());
            track.status = if detection.is_some() {
                TrackStatus::Tracked
            } else {
                TrackStatus::Occluded
            };
            track.state = posterior.marginal(t * OBJECT_STATE_DIM, OBJECT_STATE_DIM);
            track.history.push(TrackRecord {
                frame: self.frame,
                predicted: predictions[t],
                estimate: estimates[t],
                status: track.status,
                detection,
            });
        }
        self.posterior = posterior;

        Ok(StepOutput {
            frame: self.frame,
            estimates,
            window_centers: centers,
            gates,
            detections: detections.to_vec(),
            field: None,
        })
    }
}

/// Start a tracker from a frame sequence: the detections of frames 0→1 seed
/// the tracks, then every later pair is stepped.
pub fn track_sequence(frames: &[Frame], setup: TrackingSetup) -> Result<Tracker> {
    if frames.len() < 2 {
        return Err(Error::Config("tracking needs at least two frames".into()));
    }
    let (_, first) = setup.detector.detect(&frames[1], &frames[0])?;
    let mut tracker = Tracker::init(&first, setup, 1)?;
    for pair in frames[1..].windows(2) {
        tracker.step(&pair[1], &pair[0])?;
    }
    Ok(tracker)
}

/// Track a sequence from externally supplied object states at frame 0; every
/// pair from `(0, 1)` on is stepped.
pub fn track_sequence_from(
    frames: &[Frame],
    initial: &[Detection],
    setup: TrackingSetup,
) -> Result<Tracker> {
    let mut tracker = Tracker::init(initial, setup, 0)?;
    for pair in frames.windows(2) {
        tracker.step(&pair[1], &pair[0])?;
    }
    Ok(tracker)
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrackRow {
    pub frame: usize,
    pub id: usize,
    pub kinematics: ObjectKinematics,
    pub status: TrackStatus,
    pub associated: bool,
}

/// Track history as rows ordered by frame, then id.
pub fn export_tracks(tracker: &Tracker) -> Vec<TrackRow> {
    let mut rows: Vec<TrackRow> = tracker
        .tracks()
        .iter()
        .flat_map(|t| {
            t.history.iter().map(move |r| TrackRow {
                frame: r.frame,
                id: t.id,
                kinematics: r.estimate,
                status: r.status,
                associated: r.detection.is_some(),
            })
        })
        .collect();
    rows.sort_by_key(|r| (r.frame, r.id));
    rows
}

pub const TRACK_CSV_HEADER: [&str; 10] = [
    "frame",
    "id",
    "x",
    "y",
    "vx",
    "vy",
    "ax",
    "ay",
    "status",
    "associated",
];

pub fn write_tracks_csv<W: Write>(rows: &[TrackRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(TRACK_CSV_HEADER)?;
    for r in rows {
        let k = &r.kinematics;
        w.write_record([
            r.frame.to_string(),
            r.id.to_string(),
            format!("{:.6}", k.x),
            format!("{:.6}", k.y),
            format!("{:.6}", k.vx),
            format!("{:.6}", k.vy),
            format!("{:.6}", k.ax),
            format!("{:.6}", k.ay),
            r.status.as_str().to_string(),
            u8::from(r.associated).to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
