//! Monte-Carlo comparison of the unscented and linear Kalman filters on a
//! simulated turning trajectory.

use std::io::Write;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::filters::{kf_step, ukf_step, GaussianState, NoiseModel};
use crate::motion::{
    measurement_noise, process_noise, system_model, unpack_state, MultiObjectLayout, NoiseConfig,
    ObjectKinematics,
};
use crate::ut::{compute_weights, UtConfig};

/// Straight, arc, straight. Angles in degrees, positive turns to the left
/// (counter-clockwise in x-right, y-up coordinates).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TurnSpec {
    pub start: (f64, f64),
    pub heading_deg: f64,
    /// Pixels per frame, constant along the whole path.
    pub speed: f64,
    pub straight_before: usize,
    pub turn_frames: usize,
    pub turn_deg: f64,
    pub straight_after: usize,
}

impl Default for TurnSpec {
    fn default() -> Self {
        Self {
            start: (0.0, 0.0),
            heading_deg: 0.0,
            speed: 2.0,
            straight_before: 50,
            turn_frames: 20,
            turn_deg: 90.0,
            straight_after: 50,
        }
    }
}

impl TurnSpec {
    pub fn frames(&self) -> usize {
        self.straight_before + self.turn_frames + self.straight_after
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [self.start.0, self.start.1, self.heading_deg, self.turn_deg];
        if finite.iter().any(|v| !v.is_finite()) {
            return Err(Error::Config("path parameters must be finite".into()));
        }
        if !(self.speed.is_finite() && self.speed >= 0.0) {
            return Err(Error::Config(format!(
                "speed must be >= 0, got {}",
                self.speed
            )));
        }
        if self.frames() == 0 {
            return Err(Error::Config("path must cover at least one frame".into()));
        }
        if self.turn_frames == 0 && self.turn_deg != 0.0 {
            return Err(Error::Config("a nonzero turn needs turn_frames > 0".into()));
        }
        Ok(())
    }

    /// Position at continuous time `t` (frames).
    pub fn position(&self, t: f64) -> (f64, f64) {
        let s = self.speed;
        let h0 = self.heading_deg.to_radians();
        let t1 = self.straight_before as f64;
        let t2 = t1 + self.turn_frames as f64;

        let along = |p: (f64, f64), h: f64, d: f64| (p.0 + d * h.cos(), p.1 + d * h.sin());
        let p1 = along(self.start, h0, s * t.min(t1));
        if t <= t1 {
            return p1;
        }
        let omega = if self.turn_frames == 0 {
            0.0
        } else {
            self.turn_deg.to_radians() / self.turn_frames as f64
        };
        let arc = |tau: f64| {
            if omega == 0.0 {
                along(p1, h0, s * tau)
            } else {
                let r = s / omega;
                let h = h0 + omega * tau;
                (
                    p1.0 + r * (h.sin() - h0.sin()),
                    p1.1 - r * (h.cos() - h0.cos()),
                )
            }
        };
        if t <= t2 {
            return arc(t - t1);
        }
        let p2 = arc(t2 - t1);
        along(p2, h0 + self.turn_deg.to_radians(), s * (t - t2))
    }
}

/// True positions at frames `0, 1, …, frames − 1`.
pub fn gen_turning_path(spec: &TurnSpec) -> Result<Vec<(f64, f64)>> {
    spec.validate()?;
    Ok((0..spec.frames())
        .map(|k| spec.position(k as f64))
        .collect())
}

/// Adds independent `N(0, sigma²)` noise to x then y of every point, in
/// order. Replaying the same generator state with a different `sigma` scales
/// the same underlying draws.
pub fn add_noise<R: Rng>(path: &[(f64, f64)], sigma: f64, rng: &mut R) -> Vec<(f64, f64)> {
    path.iter()
        .map(|&(x, y)| {
            let ex: f64 = rng.sample(StandardNormal);
            let ey: f64 = rng.sample(StandardNormal);
            (x + sigma * ex, y + sigma * ey)
        })
        .collect()
}

/// Generator for one trial: ChaCha8 seeded with `seed`, on stream `trial`.
pub fn trial_rng(seed: u64, trial: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial as u64);
    rng
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrackingError {
    /// Mean squared Euclidean position error, px².
    pub mse: f64,
    pub rmse: f64,
}

pub fn tracking_error(estimated: &[(f64, f64)], truth: &[(f64, f64)]) -> Result<TrackingError> {
    if estimated.len() != truth.len() {
        return Err(Error::LengthMismatch {
            estimated: estimated.len(),
            truth: truth.len(),
        });
    }
    if truth.is_empty() {
        return Err(Error::DimensionMismatch("empty trajectory".into()));
    }
    let sum: f64 = estimated
        .iter()
        .zip(truth)
        .map(|(e, t)| (e.0 - t.0).powi(2) + (e.1 - t.1).powi(2))
        .sum();
    let mse = sum / truth.len() as f64;
    Ok(TrackingError {
        mse,
        rmse: mse.sqrt(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FilterKind {
    Ukf,
    Kf,
}

impl FilterKind {
    pub const ALL: [FilterKind; 2] = [FilterKind::Ukf, FilterKind::Kf];

    pub fn as_str(&self) -> &'static str {
        match self {
            FilterKind::Ukf => "ukf",
            FilterKind::Kf => "kf",
        }
    }
}

/// Monte-Carlo setup. Both filters use the single-object
/// constant-acceleration model with identical `F`, `H`, `Q` and
/// `R = sigma²·I`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Scenario {
    pub path: TurnSpec,
    pub sigma_levels: Vec<f64>,
    pub trials: usize,
    pub seed: u64,
    /// Trial whose trajectories are kept for plotting.
    pub path_trial: usize,
    pub ut: UtConfig,
    pub process_q: f64,
    /// Initial position standard deviation; `None` uses the noise level.
    pub init_sigma_position: Option<f64>,
    pub init_sigma_velocity: f64,
    pub init_sigma_acceleration: f64,
}

impl Default for Scenario {
    fn default() -> Self {
        Self {
            path: TurnSpec::default(),
            sigma_levels: vec![1.0, 3.0, 5.0, 10.0],
            trials: 100,
            seed: 7,
            path_trial: 0,
            ut: UtConfig::default(),
            process_q: NoiseConfig::default().process_q,
            init_sigma_position: None,
            init_sigma_velocity: 2.0,
            init_sigma_acceleration: 1.0,
        }
    }
}

impl Scenario {
    pub fn validate(&self) -> Result<()> {
        self.path.validate()?;
        self.ut.validate()?;
        if self.trials == 0 {
            return Err(Error::Config("trials must be at least 1".into()));
        }
        if self.path_trial >= self.trials {
            return Err(Error::Config(format!(
                "path_trial {} is not below trials {}",
                self.path_trial, self.trials
            )));
        }
        if self.sigma_levels.is_empty() {
            return Err(Error::Config("sigma_levels is empty".into()));
        }
        if self
            .sigma_levels
            .iter()
            .any(|s| !(s.is_finite() && *s > 0.0))
        {
            return Err(Error::Config("sigma levels must be positive".into()));
        }
        if !(self.process_q.is_finite() && self.process_q >= 0.0) {
            return Err(Error::Config("process_q must be >= 0".into()));
        }
        let init = [
            self.init_sigma_position.unwrap_or(1.0),
            self.init_sigma_velocity,
            self.init_sigma_acceleration,
        ];
        if init.iter().any(|s| !(s.is_finite() && *s >= 0.0)) {
            return Err(Error::Config(
                "initial standard deviations must be >= 0".into(),
            ));
        }
        Ok(())
    }
}

/// Both filters' estimates for one measurement sequence, frame by frame.
#[derive(Debug, Clone, PartialEq)]
pub struct FilterRun {
    pub ukf: Vec<ObjectKinematics>,
    pub kf: Vec<ObjectKinematics>,
}

/// Run both filters over `measurements` taken with noise level `sigma`. The
/// first measurement initialises the position (zero velocity and
/// acceleration) and is the frame-0 estimate; every later frame is one
/// predict/update step.
pub fn run_filters(
    scenario: &Scenario,
    measurements: &[(f64, f64)],
    sigma: f64,
) -> Result<FilterRun> {
    let Some(&(x0, y0)) = measurements.first() else {
        return Err(Error::DimensionMismatch(
            "empty measurement sequence".into(),
        ));
    };
    let layout = MultiObjectLayout::single();
    let model = system_model(&layout);
    let noise = NoiseModel::new(
        process_noise(&layout, scenario.process_q),
        measurement_noise(&layout, sigma),
    )?;
    let weights = compute_weights(layout.state_dim(), &scenario.ut)?;

    let sp = scenario.init_sigma_position.unwrap_or(sigma);
    let axis = [
        sp * sp,
        scenario.init_sigma_velocity.powi(2),
        scenario.init_sigma_acceleration.powi(2),
    ];
    let cov = DMatrix::from_diagonal(&DVector::from_iterator(6, (0..2).flat_map(|_| axis)));
    let mean = DVector::from_vec(vec![x0, 0.0, 0.0, y0, 0.0, 0.0]);
    let init = GaussianState::new(mean, cov)?;

    let mut ukf = init.clone();
    let mut kf = init;
    let mut out = FilterRun {
        ukf: Vec::with_capacity(measurements.len()),
        kf: Vec::with_capacity(measurements.len()),
    };
    let first = |s: &GaussianState| unpack_state(&s.mean).map(|v| v[0]);
    out.ukf.push(first(&ukf)?);
    out.kf.push(first(&kf)?);
    for &(mx, my) in &measurements[1..] {
        let y = DVector::from_vec(vec![mx, my]);
        ukf = ukf_step(&ukf, &model, &noise, &weights, &y)?;
        kf = kf_step(&kf, &model, &noise, &y)?;
        out.ukf.push(first(&ukf)?);
        out.kf.push(first(&kf)?);
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrialRecord {
    pub filter: FilterKind,
    pub sigma: f64,
    pub trial: usize,
    /// Generator stream of this trial (see [`trial_rng`]).
    pub stream: u64,
    pub mse: f64,
    pub rmse: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Aggregate {
    pub filter: FilterKind,
    pub sigma: f64,
    pub trials: usize,
    pub mean_rmse: f64,
    /// Standard error of `mean_rmse` (sample standard deviation / √trials).
    pub stderr_rmse: f64,
    pub mean_mse: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PathRow {
    pub frame: usize,
    pub truth: (f64, f64),
    pub measurement: (f64, f64),
    pub ukf: ObjectKinematics,
    pub kf: ObjectKinematics,
}

/// Trajectories of one trial at one noise level.
#[derive(Debug, Clone, PartialEq)]
pub struct SigmaPath {
    pub sigma: f64,
    pub trial: usize,
    pub rows: Vec<PathRow>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioResult {
    pub scenario: Scenario,
    /// Ordered by trial, then sigma level, then filter (UKF first).
    pub trials: Vec<TrialRecord>,
    /// Ordered by filter (UKF first), then sigma level as configured.
    pub aggregates: Vec<Aggregate>,
    pub paths: Vec<SigmaPath>,
}

impl ScenarioResult {
    pub fn aggregate(&self, filter: FilterKind, sigma: f64) -> Option<&Aggregate> {
        self.aggregates
            .iter()
            .find(|a| a.filter == filter && a.sigma == sigma)
    }
}

fn positions(est: &[ObjectKinematics]) -> Vec<(f64, f64)> {
    est.iter().map(|k| k.position()).collect()
}

/// Trajectories of `trial` at every noise level. The same generator state is
/// replayed for each level, so the levels differ only in scale.
pub fn simulate_trial(scenario: &Scenario, trial: usize) -> Result<Vec<SigmaPath>> {
    scenario.validate()?;
    let truth = gen_turning_path(&scenario.path)?;
    scenario
        .sigma_levels
        .iter()
        .map(|&sigma| {
            let meas = add_noise(&truth, sigma, &mut trial_rng(scenario.seed, trial));
            let run = run_filters(scenario, &meas, sigma)?;
            let rows = (0..truth.len())
                .map(|k| PathRow {
                    frame: k,
                    truth: truth[k],
                    measurement: meas[k],
                    ukf: run.ukf[k],
                    kf: run.kf[k],
                })
                .collect();
            Ok(SigmaPath { sigma, trial, rows })
        })
        .collect()
}

fn run_trial(scenario: &Scenario, truth: &[(f64, f64)], trial: usize) -> Result<Vec<TrialRecord>> {
    let mut out = Vec::with_capacity(2 * scenario.sigma_levels.len());
    for &sigma in &scenario.sigma_levels {
        let meas = add_noise(truth, sigma, &mut trial_rng(scenario.seed, trial));
        let run = run_filters(scenario, &meas, sigma)?;
        for (filter, est) in [(FilterKind::Ukf, &run.ukf), (FilterKind::Kf, &run.kf)] {
            let e = tracking_error(&positions(est), truth)?;
            out.push(TrialRecord {
                filter,
                sigma,
                trial,
                stream: trial as u64,
                mse: e.mse,
                rmse: e.rmse,
            });
        }
    }
    Ok(out)
}

/// The full sweep. Trials run in parallel; results and summation order are
/// fixed by trial index, so the outcome is bit-identical for a given
/// scenario.
pub fn run_comparison(scenario: &Scenario) -> Result<ScenarioResult> {
    scenario.validate()?;
    let truth = gen_turning_path(&scenario.path)?;
    let per_trial = (0..scenario.trials)
        .into_par_iter()
        .map(|t| run_trial(scenario, &truth, t))
        .collect::<Result<Vec<_>>>()?;
    let trials: Vec<TrialRecord> = per_trial.into_iter().flatten().collect();

    let mut aggregates = Vec::new();
    for filter in FilterKind::ALL {
        for &sigma in &scenario.sigma_levels {
            let (rmse, mse): (Vec<f64>, Vec<f64>) = trials
                .iter()
                .filter(|r| r.filter == filter && r.sigma == sigma)
                .map(|r| (r.rmse, r.mse))
                .unzip();
            let n = rmse.len() as f64;
            let mean_rmse = rmse.iter().sum::<f64>() / n;
            let stderr_rmse = if rmse.len() > 1 {
                let var = rmse.iter().map(|r| (r - mean_rmse).powi(2)).sum::<f64>() / (n - 1.0);
                (var / n).sqrt()
            } else {
                0.0
            };
            aggregates.push(Aggregate {
                filter,
                sigma,
                trials: rmse.len(),
                mean_rmse,
                stderr_rmse,
                mean_mse: mse.iter().sum::<f64>() / n,
            });
        }
    }

    Ok(ScenarioResult {
        paths: simulate_trial(scenario, scenario.path_trial)?,
        scenario: scenario.clone(),
        trials,
        aggregates,
    })
}

fn fmt(v: f64) -> String {
    format!("{v:.6}")
}

/// File name for the path CSV of one noise level, e.g. `path_sigma_2.5.csv`.
pub fn path_file_name(sigma: f64) -> String {
    format!("path_sigma_{sigma}.csv")
}

pub fn write_path_csv<W: Write>(path: &SigmaPath, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "frame", "true_x", "true_y", "meas_x", "meas_y", "ukf_x", "ukf_y", "ukf_vx", "ukf_vy",
        "kf_x", "kf_y",
    ])?;
    for r in &path.rows {
        w.write_record([
            r.frame.to_string(),
            fmt(r.truth.0),
            fmt(r.truth.1),
            fmt(r.measurement.0),
            fmt(r.measurement.1),
            fmt(r.ukf.x),
            fmt(r.ukf.y),
            fmt(r.ukf.vx),
            fmt(r.ukf.vy),
            fmt(r.kf.x),
            fmt(r.kf.y),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// One row per filter, sigma and trial.
pub fn write_comparison_csv<W: Write>(result: &ScenarioResult, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["filter", "sigma", "trial", "mse", "rmse"])?;
    for r in &result.trials {
        w.write_record([
            r.filter.as_str().to_string(),
            fmt(r.sigma),
            r.trial.to_string(),
            fmt(r.mse),
            fmt(r.rmse),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_summary_csv<W: Write>(result: &ScenarioResult, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "filter",
        "sigma",
        "trials",
        "mean_rmse",
        "stderr_rmse",
        "mean_mse",
    ])?;
    for a in &result.aggregates {
        w.write_record([
            a.filter.as_str().to_string(),
            fmt(a.sigma),
            a.trials.to_string(),
            fmt(a.mean_rmse),
            fmt(a.stderr_rmse),
            fmt(a.mean_mse),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Plain-text report: a short header followed by one row per filter and
/// noise level.
pub fn write_report<W: Write>(result: &ScenarioResult, mut out: W) -> Result<()> {
    let s = &result.scenario;
    writeln!(out, "turning-path filter comparison")?;
    writeln!(
        out,
        "frames {}  trials {}  seed {}  alpha {}  process_q {}",
        s.path.frames(),
        s.trials,
        s.seed,
        s.ut.alpha,
        s.process_q
    )?;
    writeln!(out)?;
    writeln!(
        out,
        "{:<6} {:>10} {:>12} {:>12} {:>14}",
        "filter", "sigma", "mean_rmse", "stderr", "mean_mse"
    )?;
    for a in &result.aggregates {
        writeln!(
            out,
            "{:<6} {:>10.6} {:>12.6} {:>12.6} {:>14.6}",
            a.filter.as_str(),
            a.sigma,
            a.mean_rmse,
            a.stderr_rmse,
            a.mean_mse
        )?;
    }
    writeln!(out)?;
    writeln!(out, "{:<6} {:>10} {:>12}", "sigma", "", "kf/ukf")?;
    for &sigma in &s.sigma_levels {
        if let (Some(u), Some(k)) = (
            result.aggregate(FilterKind::Ukf, sigma),
            result.aggregate(FilterKind::Kf, sigma),
        ) {
            writeln!(
                out,
                "{:<6} {:>10.6} {:>12.6}",
                "ratio",
                sigma,
                k.mean_rmse / u.mean_rmse
            )?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn heading(a: (f64, f64), b: (f64, f64)) -> f64 {
        (b.1 - a.1).atan2(b.0 - a.0)
    }

    #[test]
    fn default_path_turns_left_by_90() {
        let path = gen_turning_path(&TurnSpec::default()).unwrap();
        assert_eq!(path.len(), 120);
        let first = heading(path[0], path[1]);
        let last = heading(path[118], path[119]);
        assert!((last - first - std::f64::consts::FRAC_PI_2).abs() < 1e-9);
    }

    #[test]
    fn straight_segment_length() {
        let path = gen_turning_path(&TurnSpec::default()).unwrap();
        assert_eq!(path[50], (100.0, 0.0));
        for k in 1..=50 {
            let d = (path[k].0 - path[k - 1].0).hypot(path[k].1 - path[k - 1].1);
            assert!((d - 2.0).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_turn_is_a_line() {
        let spec = TurnSpec {
            turn_deg: 0.0,
            heading_deg: 30.0,
            ..TurnSpec::default()
        };
        let path = gen_turning_path(&spec).unwrap();
        let h = 30f64.to_radians();
        for (k, p) in path.iter().enumerate() {
            let d = 2.0 * k as f64;
            assert!((p.0 - d * h.cos()).abs() < 1e-9 && (p.1 - d * h.sin()).abs() < 1e-9);
        }
    }

    #[test]
    fn arc_has_constant_speed() {
        let path = gen_turning_path(&TurnSpec::default()).unwrap();
        // chord of a 4.5° arc of length 2
        let omega = 90f64.to_radians() / 20.0;
        let chord = 2.0 * (2.0 / omega) * (omega / 2.0).sin();
        for k in 51..=70 {
            let d = (path[k].0 - path[k - 1].0).hypot(path[k].1 - path[k - 1].1);
            assert!((d - chord).abs() < 1e-9, "{k}: {d}");
        }
    }

    #[test]
    fn error_statistics() {
        let truth = [(0.0, 0.0), (1.0, 1.0)];
        assert_eq!(tracking_error(&truth, &truth).unwrap().mse, 0.0);
        let off: Vec<_> = truth.iter().map(|p| (p.0 + 3.0, p.1 + 4.0)).collect();
        let e = tracking_error(&off, &truth).unwrap();
        assert_eq!((e.mse, e.rmse), (25.0, 5.0));
        assert_eq!(
            tracking_error(&[(1.0, 1.0)], &[(0.0, 0.0)]).unwrap().mse,
            2.0
        );
        assert!(matches!(
            tracking_error(&truth[..1], &truth),
            Err(Error::LengthMismatch {
                estimated: 1,
                truth: 2
            })
        ));
    }

    #[test]
    fn noise_is_reproducible_and_scaled() {
        let path = vec![(0.0, 0.0); 10];
        let a = add_noise(&path, 2.0, &mut trial_rng(5, 3));
        let b = add_noise(&path, 2.0, &mut trial_rng(5, 3));
        assert_eq!(a, b);
        let c = add_noise(&path, 4.0, &mut trial_rng(5, 3));
        for (p, q) in a.iter().zip(&c) {
            assert_eq!(2.0 * p.0, q.0);
        }
        assert_ne!(a, add_noise(&path, 2.0, &mut trial_rng(5, 4)));
        let tiny = add_noise(&[(3.0, 4.0)], 1e-300, &mut trial_rng(1, 0));
        assert_eq!(tiny, vec![(3.0, 4.0)]);
    }

    #[test]
    fn noise_standard_deviation() {
        let n = 100_000;
        let path = vec![(0.0, 0.0); n];
        let noisy = add_noise(&path, 3.0, &mut trial_rng(11, 0));
        for axis in [0, 1] {
            let v: Vec<f64> = noisy
                .iter()
                .map(|p| if axis == 0 { p.0 } else { p.1 })
                .collect();
            let mean = v.iter().sum::<f64>() / n as f64;
            let sd = (v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt();
            assert!((sd / 3.0 - 1.0).abs() < 0.02, "axis {axis}: {sd}");
        }
    }

    #[test]
    fn small_comparison_is_deterministic() {
        let scenario = Scenario {
            trials: 4,
            sigma_levels: vec![1.0, 5.0],
            ..Scenario::default()
        };
        let a = run_comparison(&scenario).unwrap();
        let b = run_comparison(&scenario).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.trials.len(), 4 * 2 * 2);
        assert_eq!(a.aggregates.len(), 4);
        assert_eq!(a.paths.len(), 2);
        assert_eq!(a.paths[0].rows.len(), 120);
        assert_eq!(a.aggregates[0].filter, FilterKind::Ukf);
    }

    #[test]
    fn scenario_validation() {
        let bad = [
            Scenario {
                trials: 0,
                ..Scenario::default()
            },
            Scenario {
                sigma_levels: vec![],
                ..Scenario::default()
            },
            Scenario {
                sigma_levels: vec![1.0, -1.0],
                ..Scenario::default()
            },
            Scenario {
                path_trial: 100,
                ..Scenario::default()
            },
        ];
        for s in bad {
            assert!(matches!(s.validate(), Err(Error::Config(_))));
        }
    }

    #[test]
    fn report_has_one_row_per_filter_and_level() {
        let scenario = Scenario {
            trials: 2,
            ..Scenario::default()
        };
        let result = run_comparison(&scenario).unwrap();
        let mut buf = Vec::new();
        write_report(&result, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let rows = text
            .lines()
            .filter(|l| l.starts_with("ukf ") || l.starts_with("kf "))
            .count();
        assert_eq!(rows, 8);
        assert_eq!(path_file_name(2.5), "path_sigma_2.5.csv");
        assert_eq!(path_file_name(10.0), "path_sigma_10.csv");
    }
}
