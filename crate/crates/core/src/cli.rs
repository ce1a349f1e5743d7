//! Run configuration and the four file-level workflows behind the
//! `ukf-track` binary.
//!
//! A run is described by a [`RunConfig`] (TOML, every field optional),
//! optionally patched by command-line [`Overrides`]. Each workflow validates
//! the resolved config, writes it to `config.toml` in the output directory and
//! then its own outputs. Re-running from that file reproduces the outputs
//! byte for byte.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::detector::{
    detect_sequence, load_sequence, write_detections_csv, write_motion_field_csv, Detection,
    DetectorConfig, Frame,
};
use crate::error::{Error, Result};
use crate::motion::NoiseConfig;
use crate::sim::{
    path_file_name, run_comparison, simulate_trial, write_comparison_csv, write_path_csv,
    write_report, write_summary_csv, Scenario, TurnSpec,
};
use crate::tracker::{
    export_tracks, track_sequence, track_sequence_from, write_tracks_csv, TrackStatus, Tracker,
    TrackerConfig, TrackingSetup,
};
use crate::ut::UtConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Workflow {
    Detect,
    Track,
    Simulate,
    Compare,
}

impl Workflow {
    pub fn as_str(&self) -> &'static str {
        match self {
            Workflow::Detect => "detect",
            Workflow::Track => "track",
            Workflow::Simulate => "simulate",
            Workflow::Compare => "compare",
        }
    }

    fn needs_frames(&self) -> bool {
        matches!(self, Workflow::Detect | Workflow::Track)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IoConfig {
    /// Directory of PGM frames (detect, track).
    pub input: Option<PathBuf>,
    pub out: PathBuf,
    /// CSV of initial object states (`x,y[,vx,vy]`) at frame 0 (track).
    pub init: Option<PathBuf>,
    /// Also write every motion field (detect).
    pub dump_field: bool,
}

impl Default for IoConfig {
    fn default() -> Self {
        Self {
            input: None,
            out: PathBuf::from("out"),
            init: None,
            dump_field: false,
        }
    }
}

/// The `[sim]` section. The UT and process-noise settings come from `[ut]`
/// and `[noise]`; the measurement noise is each sigma level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimConfig {
    pub seed: u64,
    pub trials: usize,
    pub sigma_levels: Vec<f64>,
    pub path_trial: usize,
    /// Initial position standard deviation; absent means the noise level.
    pub init_sigma_position: Option<f64>,
    pub init_sigma_velocity: f64,
    pub init_sigma_acceleration: f64,
    pub path: TurnSpec,
}

impl Default for SimConfig {
    fn default() -> Self {
        let s = Scenario::default();
        Self {
            seed: s.seed,
            trials: s.trials,
            sigma_levels: s.sigma_levels,
            path_trial: s.path_trial,
            init_sigma_position: s.init_sigma_position,
            init_sigma_velocity: s.init_sigma_velocity,
            init_sigma_acceleration: s.init_sigma_acceleration,
            path: s.path,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub io: IoConfig,
    pub detector: DetectorConfig,
    pub ut: UtConfig,
    pub noise: NoiseConfig,
    pub tracker: TrackerConfig,
    pub sim: SimConfig,
}

impl RunConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::Input {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        Self::from_toml_str(&text).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    /// Copy with derived defaults written out explicitly.
    pub fn resolved(&self) -> Self {
        let mut out = self.clone();
        out.detector = self.detector.resolved();
        out.tracker.init_sigma_position = Some(
            self.tracker
                .init_sigma_position
                .unwrap_or(self.detector.block_size as f64),
        );
        out
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn tracking_setup(&self) -> TrackingSetup {
        TrackingSetup {
            detector: self.detector.clone(),
            ut: self.ut,
            noise: self.noise,
            tracker: self.tracker.clone(),
        }
    }

    pub fn scenario(&self) -> Scenario {
        let s = &self.sim;
        Scenario {
            path: s.path.clone(),
            sigma_levels: s.sigma_levels.clone(),
            trials: s.trials,
            seed: s.seed,
            path_trial: s.path_trial,
            ut: self.ut,
            process_q: self.noise.process_q,
            init_sigma_position: s.init_sigma_position,
            init_sigma_velocity: s.init_sigma_velocity,
            init_sigma_acceleration: s.init_sigma_acceleration,
        }
    }

    /// Checks everything the given workflow reads.
    pub fn validate(&self, workflow: Workflow) -> Result<()> {
        let as_config = |e: Error| match e {
            Error::InvalidAlpha(_) => Error::Config(e.to_string()),
            other => other,
        };
        self.tracking_setup().validate().map_err(as_config)?;
        self.scenario().validate().map_err(as_config)?;
        if workflow.needs_frames() && self.io.input.is_none() {
            return Err(Error::Config(format!(
                "{} needs an input directory",
                workflow.as_str()
            )));
        }
        Ok(())
    }
}

/// Command-line values that replace the corresponding config entries when
/// present.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub input: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub block_size: Option<usize>,
    pub alpha: Option<f64>,
    pub sigma_levels: Option<Vec<f64>>,
    pub trials: Option<usize>,
    pub init: Option<PathBuf>,
    pub dump_field: bool,
    pub temporal_filter: bool,
}

impl Overrides {
    pub fn apply(&self, cfg: &mut RunConfig) {
        if let Some(v) = &self.input {
            cfg.io.input = Some(v.clone());
        }
        if let Some(v) = &self.out {
            cfg.io.out = v.clone();
        }
        if let Some(v) = self.seed {
            cfg.sim.seed = v;
        }
        if let Some(v) = self.block_size {
            cfg.detector.block_size = v;
        }
        if let Some(v) = self.alpha {
            cfg.ut.alpha = v;
        }
        if let Some(v) = &self.sigma_levels {
            cfg.sim.sigma_levels = v.clone();
        }
        if let Some(v) = self.trials {
            cfg.sim.trials = v;
        }
        if let Some(v) = &self.init {
            cfg.io.init = Some(v.clone());
        }
        if self.dump_field {
            cfg.io.dump_field = true;
        }
        if self.temporal_filter {
            cfg.detector.temporal_filter = true;
        }
    }
}

/// Process exit status for an error: 2 for unreadable input or unwritable
/// output, 3 for invalid configuration, 4 when tracking finds nothing to
/// track, 1 otherwise.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Input { .. } | Error::Io(_) | Error::Csv(_) => 2,
        Error::Config(_) | Error::InvalidAlpha(_) => 3,
        Error::EmptyDetections => 4,
        _ => 1,
    }
}

/// Resolve, validate, prepare the output directory and run `workflow`.
/// Returns the files written, `config.toml` first.
pub fn run(workflow: Workflow, config: &RunConfig) -> Result<Vec<PathBuf>> {
    let cfg = config.resolved();
    cfg.validate(workflow)?;
    let out = &cfg.io.out;
    fs::create_dir_all(out).map_err(|e| Error::Input {
        path: out.clone(),
        message: e.to_string(),
    })?;
    let config_path = out.join("config.toml");
    write_file(
        &config_path,
        |w| Ok(w.write_all(cfg.to_toml()?.as_bytes())?),
    )?;

    let mut files = vec![config_path];
    files.extend(match workflow {
        Workflow::Detect => cmd_detect(&cfg)?,
        Workflow::Track => cmd_track(&cfg)?,
        Workflow::Simulate => cmd_simulate(&cfg)?,
        Workflow::Compare => cmd_compare(&cfg)?,
    });
    Ok(files)
}

fn write_file<F>(path: &Path, body: F) -> Result<()>
where
    F: FnOnce(&mut BufWriter<fs::File>) -> Result<()>,
{
    let file = fs::File::create(path).map_err(|e| Error::Input {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    let mut w = BufWriter::new(file);
    body(&mut w)?;
    w.flush()?;
    Ok(())
}

fn load_frames(cfg: &RunConfig) -> Result<Vec<Frame>> {
    let dir = cfg
        .io
        .input
        .as_ref()
        .ok_or_else(|| Error::Config("no input directory".into()))?;
    let frames = load_sequence(dir)?;
    if frames.len() < 2 {
        return Err(Error::Input {
            path: dir.clone(),
            message: format!("need at least two PGM frames, found {}", frames.len()),
        });
    }
    if let Some(bad) = frames
        .iter()
        .find(|f| f.width() != frames[0].width() || f.height() != frames[0].height())
    {
        return Err(Error::Input {
            path: dir.clone(),
            message: format!(
                "frames differ in size ({}x{} vs {}x{})",
                frames[0].width(),
                frames[0].height(),
                bad.width(),
                bad.height()
            ),
        });
    }
    Ok(frames)
}

/// `detections.csv` and, with `dump_field`, `motion_field.csv`.
pub fn cmd_detect(cfg: &RunConfig) -> Result<Vec<PathBuf>> {
    let frames = load_frames(cfg)?;
    let pairs = detect_sequence(&frames, &cfg.detector)?;
    let out = &cfg.io.out;
    let det_path = out.join("detections.csv");
    write_file(&det_path, |w| write_detections_csv(&pairs, w))?;
    let mut files = vec![det_path];
    if cfg.io.dump_field {
        let field_path = out.join("motion_field.csv");
        write_file(&field_path, |w| write_motion_field_csv(&pairs, w))?;
        files.push(field_path);
    }
    Ok(files)
}

#[derive(Debug, Deserialize)]
struct InitRow {
    x: f64,
    y: f64,
    #[serde(default)]
    vx: f64,
    #[serde(default)]
    vy: f64,
}

/// Read initial object states from a CSV with columns `x,y` and optionally
/// `vx,vy` (pixels per frame).
pub fn read_init_file(path: &Path) -> Result<Vec<Detection>> {
    let input_err = |message: String| Error::Input {
        path: path.to_path_buf(),
        message,
    };
    let mut reader = csv::Reader::from_path(path).map_err(|e| input_err(e.to_string()))?;
    reader
        .deserialize::<InitRow>()
        .map(|row| {
            let r = row.map_err(|e| input_err(e.to_string()))?;
            Ok(Detection::at(r.x, r.y, (r.vx, r.vy)))
        })
        .collect()
}

/// `tracks.csv` and `summary.txt`.
pub fn cmd_track(cfg: &RunConfig) -> Result<Vec<PathBuf>> {
    let frames = load_frames(cfg)?;
    let setup = cfg.tracking_setup();
    let tracker = match &cfg.io.init {
        Some(path) => track_sequence_from(&frames, &read_init_file(path)?, setup)?,
        None => track_sequence(&frames, setup)?,
    };
    let out = &cfg.io.out;
    let tracks_path = out.join("tracks.csv");
    write_file(&tracks_path, |w| {
        write_tracks_csv(&export_tracks(&tracker), w)
    })?;
    let summary_path = out.join("summary.txt");
    write_file(&summary_path, |w| {
        write_track_summary(&tracker, frames.len(), w)
    })?;
    Ok(vec![tracks_path, summary_path])
}

fn write_track_summary<W: Write>(tracker: &Tracker, frames: usize, mut w: W) -> Result<()> {
    let tracks = tracker.tracks();
    let steps = tracks.first().map_or(0, |t| t.history.len());
    writeln!(w, "frames {frames}")?;
    writeln!(w, "tracked frames {steps}")?;
    writeln!(w, "tracks {}", tracks.len())?;
    for t in tracks {
        let occluded = t
            .history
            .iter()
            .filter(|r| r.status == TrackStatus::Occluded)
            .count();
        writeln!(
            w,
            "track {} tracked {} occluded {}",
            t.id,
            t.history.len() - occluded,
            occluded
        )?;
    }
    let any = (0..steps)
        .filter(|&k| {
            tracks
                .iter()
                .any(|t| t.history[k].status == TrackStatus::Occluded)
        })
        .count();
    writeln!(w, "frames with an occluded track {any}")?;
    Ok(())
}

/// One `path_sigma_<sigma>.csv` per noise level for the configured trial.
pub fn cmd_simulate(cfg: &RunConfig) -> Result<Vec<PathBuf>> {
    let scenario = cfg.scenario();
    let paths = simulate_trial(&scenario, scenario.path_trial)?;
    let mut files = Vec::new();
    for p in &paths {
        let path = cfg.io.out.join(path_file_name(p.sigma));
        write_file(&path, |w| write_path_csv(p, w))?;
        files.push(path);
    }
    Ok(files)
}

/// `comparison.csv` (every trial), `summary.csv` and `report.txt`.
pub fn cmd_compare(cfg: &RunConfig) -> Result<Vec<PathBuf>> {
    let result = run_comparison(&cfg.scenario())?;
    let out = &cfg.io.out;
    let files = [
        out.join("comparison.csv"),
        out.join("summary.csv"),
        out.join("report.txt"),
    ];
    write_file(&files[0], |w| write_comparison_csv(&result, w))?;
    write_file(&files[1], |w| write_summary_csv(&result, w))?;
    write_file(&files[2], |w| write_report(&result, w))?;
    Ok(files.to_vec())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tracker::Gate;

    #[test]
    fn empty_config_is_all_defaults() {
        assert_eq!(RunConfig::from_toml_str("").unwrap(), RunConfig::default());
    }

    #[test]
    fn sections_parse() {
        let cfg = RunConfig::from_toml_str(
            r#"
            [io]
            input = "frames"
            [detector]
            block_size = 8
            [ut]
            alpha = 0.5
            [tracker]
            gate_radius = 40.0
            [sim]
            sigma_levels = [2.0]
            [sim.path]
            turn_deg = 45.0
            "#,
        )
        .unwrap();
        assert_eq!(cfg.io.input, Some(PathBuf::from("frames")));
        assert_eq!(cfg.detector.block_size, 8);
        assert_eq!(cfg.ut.alpha, 0.5);
        assert_eq!(cfg.tracker.gate_radius, Gate::Fixed(40.0));
        assert_eq!(cfg.sim.sigma_levels, vec![2.0]);
        assert_eq!(cfg.sim.path.turn_deg, 45.0);
        assert_eq!(cfg.sim.path.speed, 2.0);
    }

    #[test]
    fn unknown_keys_are_config_errors() {
        let err = RunConfig::from_toml_str("[detector]\nblok_size = 8\n").unwrap_err();
        assert_eq!(exit_code(&err), 3);
    }

    #[test]
    fn resolved_config_round_trips() {
        let cfg = RunConfig::default().resolved();
        assert_eq!(cfg.detector.stop_threshold, Some(512));
        assert_eq!(cfg.tracker.init_sigma_position, Some(16.0));
        let text = cfg.to_toml().unwrap();
        assert!(text.contains("gate_radius = \"auto\""));
        assert_eq!(RunConfig::from_toml_str(&text).unwrap(), cfg);
    }

    #[test]
    fn overrides_win() {
        let mut cfg = RunConfig::default();
        Overrides {
            seed: Some(9),
            block_size: Some(8),
            alpha: Some(0.3),
            sigma_levels: Some(vec![1.0, 2.0]),
            trials: Some(5),
            temporal_filter: true,
            ..Overrides::default()
        }
        .apply(&mut cfg);
        assert_eq!(cfg.sim.seed, 9);
        assert_eq!(cfg.detector.block_size, 8);
        assert_eq!(cfg.ut.alpha, 0.3);
        assert_eq!(cfg.sim.sigma_levels, vec![1.0, 2.0]);
        assert_eq!(cfg.sim.trials, 5);
        assert!(cfg.detector.temporal_filter);
    }

    #[test]
    fn validation_errors_map_to_config() {
        let mut cfg = RunConfig::default();
        cfg.ut.alpha = 2.0;
        assert_eq!(exit_code(&cfg.validate(Workflow::Compare).unwrap_err()), 3);
        let cfg = RunConfig::default();
        assert_eq!(exit_code(&cfg.validate(Workflow::Detect).unwrap_err()), 3);
        assert!(cfg.validate(Workflow::Simulate).is_ok());
    }

    #[test]
    fn exit_codes() {
        let input = Error::Input {
            path: PathBuf::from("x"),
            message: String::new(),
        };
        assert_eq!(exit_code(&input), 2);
        assert_eq!(exit_code(&Error::EmptyDetections), 4);
        assert_eq!(exit_code(&Error::ZeroDimension), 1);
    }
}
