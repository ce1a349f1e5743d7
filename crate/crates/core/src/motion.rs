//! Stacked constant-acceleration model for `M` objects.
//!
//! Each object owns six consecutive state entries `[x, vx, ax, y, vy, ay]`
//! and two measurement entries `[x, y]`.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::filters::{NoiseModel, SystemModel};

pub const OBJECT_STATE_DIM: usize = 6;
pub const OBJECT_MEASUREMENT_DIM: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MultiObjectLayout {
    pub m: usize,
    pub dt: f64,
}

impl MultiObjectLayout {
    pub fn new(m: usize, dt: f64) -> Result<Self> {
        if m == 0 {
            return Err(Error::Config("object count must be positive".into()));
        }
        if !dt.is_finite() || dt < 0.0 {
            return Err(Error::Config(format!(
                "dt must be finite and non-negative, got {dt}"
            )));
        }
        Ok(Self { m, dt })
    }

    pub fn single() -> Self {
        Self { m: 1, dt: 1.0 }
    }

    pub fn state_dim(&self) -> usize {
        OBJECT_STATE_DIM * self.m
    }

    pub fn measurement_dim(&self) -> usize {
        OBJECT_MEASUREMENT_DIM * self.m
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ObjectKinematics {
    pub x: f64,
    pub vx: f64,
    pub ax: f64,
    pub y: f64,
    pub vy: f64,
    pub ay: f64,
}

impl ObjectKinematics {
    pub fn at(x: f64, y: f64) -> Self {
        Self {
            x,
            y,
            ..Self::default()
        }
    }

    pub fn position(&self) -> (f64, f64) {
        (self.x, self.y)
    }

    pub fn velocity(&self) -> (f64, f64) {
        (self.vx, self.vy)
    }

    fn as_array(&self) -> [f64; OBJECT_STATE_DIM] {
        [self.x, self.vx, self.ax, self.y, self.vy, self.ay]
    }

    pub fn is_finite(&self) -> bool {
        self.as_array().iter().all(|v| v.is_finite())
    }
}

fn object_transition(dt: f64) -> DMatrix<f64> {
    let mut f = DMatrix::identity(OBJECT_STATE_DIM, OBJECT_STATE_DIM);
    for axis in [0, 3] {
        f[(axis, axis + 1)] = dt;
        f[(axis, axis + 2)] = dt * dt / 2.0;
        f[(axis + 1, axis + 2)] = dt;
    }
    f
}

/// Block-diagonal `6M × 6M` transition matrix.
pub fn build_transition(layout: &MultiObjectLayout) -> DMatrix<f64> {
    let block = object_transition(layout.dt);
    let n = layout.state_dim();
    let mut f = DMatrix::zeros(n, n);
    for i in 0..layout.m {
        let o = i * OBJECT_STATE_DIM;
        f.view_mut((o, o), (OBJECT_STATE_DIM, OBJECT_STATE_DIM))
            .copy_from(&block);
    }
    f
}

/// Block-diagonal `2M × 6M` matrix picking `(x_i, y_i)` out of each object.
pub fn build_measurement(layout: &MultiObjectLayout) -> DMatrix<f64> {
    let mut h = DMatrix::zeros(layout.measurement_dim(), layout.state_dim());
    for i in 0..layout.m {
        h[(2 * i, OBJECT_STATE_DIM * i)] = 1.0;
        h[(2 * i + 1, OBJECT_STATE_DIM * i + 3)] = 1.0;
    }
    h
}

/// Constant-acceleration kinematics applied object by object.
pub fn propagate(state: &DVector<f64>, layout: &MultiObjectLayout) -> Result<DVector<f64>> {
    if state.len() != layout.state_dim() {
        return Err(Error::DimensionMismatch(format!(
            "state has {} entries, layout expects {}",
            state.len(),
            layout.state_dim()
        )));
    }
    Ok(propagate_unchecked(state, layout.dt))
}

fn propagate_unchecked(state: &DVector<f64>, dt: f64) -> DVector<f64> {
    let mut out = state.clone();
    let half_dt2 = dt * dt / 2.0;
    for base in (0..state.len()).step_by(3) {
        let (p, v, a) = (state[base], state[base + 1], state[base + 2]);
        out[base] = p + v * dt + a * half_dt2;
        out[base + 1] = v + a * dt;
    }
    out
}

pub fn pack_state(objs: &[ObjectKinematics]) -> DVector<f64> {
    DVector::from_iterator(
        objs.len() * OBJECT_STATE_DIM,
        objs.iter().flat_map(|o| o.as_array()),
    )
}

pub fn unpack_state(v: &DVector<f64>) -> Result<Vec<ObjectKinematics>> {
    if !v.len().is_multiple_of(OBJECT_STATE_DIM) {
        return Err(Error::DimensionMismatch(format!(
            "state length {} is not a multiple of {OBJECT_STATE_DIM}",
            v.len()
        )));
    }
    Ok(v.as_slice()
        .chunks_exact(OBJECT_STATE_DIM)
        .map(|c| ObjectKinematics {
            x: c[0],
            vx: c[1],
            ax: c[2],
            y: c[3],
            vy: c[4],
            ay: c[5],
        })
        .collect())
}

/// Noise tuning shared by the tracker and the simulation harness.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NoiseConfig {
    /// Jerk-style process noise intensity `q` (px²/frame⁶).
    pub process_q: f64,
    /// Measurement standard deviation in pixels.
    pub measurement_sigma: f64,
}

impl Default for NoiseConfig {
    fn default() -> Self {
        Self {
            process_q: 0.05,
            measurement_sigma: 2.0,
        }
    }
}

impl NoiseConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.process_q.is_finite() && self.process_q >= 0.0) {
            return Err(Error::Config(format!(
                "process_q must be >= 0, got {}",
                self.process_q
            )));
        }
        if !(self.measurement_sigma.is_finite() && self.measurement_sigma > 0.0) {
            return Err(Error::Config(format!(
                "measurement_sigma must be > 0, got {}",
                self.measurement_sigma
            )));
        }
        Ok(())
    }
}

/// Diagonal process noise `[q·dt⁴/4, q·dt², q]` per axis per object.
pub fn process_noise(layout: &MultiObjectLayout, q: f64) -> DMatrix<f64> {
    let dt = layout.dt;
    let axis = [q * dt.powi(4) / 4.0, q * dt * dt, q];
    DMatrix::from_diagonal(&DVector::from_iterator(
        layout.state_dim(),
        (0..layout.m * 2).flat_map(|_| axis),
    ))
}

pub fn measurement_noise(layout: &MultiObjectLayout, sigma: f64) -> DMatrix<f64> {
    let d = layout.measurement_dim();
    DMatrix::identity(d, d) * (sigma * sigma)
}

pub fn noise_model(layout: &MultiObjectLayout, cfg: &NoiseConfig) -> Result<NoiseModel> {
    NoiseModel::new(
        process_noise(layout, cfg.process_q),
        measurement_noise(layout, cfg.measurement_sigma),
    )
}

/// The constant-acceleration model exposed through closures (so the unscented
/// filter runs its full sigma-point path) with `F` and `H` attached for the
/// linear filter.
pub fn system_model(layout: &MultiObjectLayout) -> SystemModel {
    let dt = layout.dt;
    let h = build_measurement(layout);
    let h_fn = h.clone();
    SystemModel::nonlinear(
        layout.state_dim(),
        layout.measurement_dim(),
        Arc::new(move |x| propagate_unchecked(x, dt)),
        Arc::new(move |x| &h_fn * x),
    )
    .with_linear_forms(build_transition(layout), h)
    .expect("layout matrices have consistent dimensions")
}
