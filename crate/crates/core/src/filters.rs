//! Linear Kalman filter and the unscented Kalman filter recursion.
//!
//! Both filters are free functions over immutable [`GaussianState`] values so
//! that a caller can swap noise models between steps or run many filters side
//! by side without shared state.

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::ut::{
    compute_sigma_points, cross_moment, matrix_sqrt_psd, reconstruct_statistics, symmetrize,
    SigmaSet, UtWeights,
};

/// Innovation covariances with a larger condition estimate are rejected.
pub const MAX_INNOVATION_CONDITION: f64 = 1e12;

const SYMMETRY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct GaussianState {
    pub mean: DVector<f64>,
    pub cov: DMatrix<f64>,
}

impl GaussianState {
    pub fn new(mean: DVector<f64>, cov: DMatrix<f64>) -> Result<Self> {
        let n = mean.len();
        if cov.nrows() != n || cov.ncols() != n {
            return Err(Error::DimensionMismatch(format!(
                "mean has {n} entries but cov is {}x{}",
                cov.nrows(),
                cov.ncols()
            )));
        }
        if (&cov - cov.transpose()).amax() > SYMMETRY_TOL * (1.0 + cov.amax()) {
            return Err(Error::DimensionMismatch(
                "covariance is not symmetric".into(),
            ));
        }
        if cov.diagonal().iter().any(|&d| d < 0.0) {
            return Err(Error::NotPsd { retries: 0 });
        }
        Ok(Self { mean, cov })
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    /// Marginal over the contiguous block `start..start + len`.
    pub fn marginal(&self, start: usize, len: usize) -> GaussianState {
        GaussianState {
            mean: self.mean.rows(start, len).into_owned(),
            cov: self.cov.view((start, start), (len, len)).into_owned(),
        }
    }
}

/// Additive process and measurement noise covariances.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseModel {
    pub process_cov: DMatrix<f64>,
    pub measurement_cov: DMatrix<f64>,
}

impl NoiseModel {
    pub fn new(process_cov: DMatrix<f64>, measurement_cov: DMatrix<f64>) -> Result<Self> {
        for (name, m) in [("process", &process_cov), ("measurement", &measurement_cov)] {
            if !m.is_square() {
                return Err(Error::DimensionMismatch(format!(
                    "{name} covariance is not square"
                )));
            }
            if (m - m.transpose()).amax() > SYMMETRY_TOL * (1.0 + m.amax()) {
                return Err(Error::DimensionMismatch(format!(
                    "{name} covariance is not symmetric"
                )));
            }
            matrix_sqrt_psd(m)?;
        }
        Ok(Self {
            process_cov,
            measurement_cov,
        })
    }

    /// Keep only the given measurement components.
    pub fn select_measurements(&self, rows: &[usize]) -> NoiseModel {
        NoiseModel {
            process_cov: self.process_cov.clone(),
            measurement_cov: self.measurement_cov.select_rows(rows).select_columns(rows),
        }
    }
}

pub type VectorFn = Arc<dyn Fn(&DVector<f64>) -> DVector<f64> + Send + Sync>;

/// Process function `f` and measurement function `h`, optionally carrying the
/// matrices `F` and `H` when both are linear.
#[derive(Clone)]
pub struct SystemModel {
    state_dim: usize,
    measurement_dim: usize,
    f: VectorFn,
    h: VectorFn,
    transition: Option<DMatrix<f64>>,
    measurement: Option<DMatrix<f64>>,
}

impl fmt::Debug for SystemModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SystemModel")
            .field("state_dim", &self.state_dim)
            .field("measurement_dim", &self.measurement_dim)
            .field("linear_f", &self.transition.is_some())
            .field("linear_h", &self.measurement.is_some())
            .finish()
    }
}

impl SystemModel {
    pub fn nonlinear(state_dim: usize, measurement_dim: usize, f: VectorFn, h: VectorFn) -> Self {
        Self {
            state_dim,
            measurement_dim,
            f,
            h,
            transition: None,
            measurement: None,
        }
    }

    /// Model whose `f` and `h` are the matrix products `F·x` and `H·x`.
    pub fn linear(transition: DMatrix<f64>, measurement: DMatrix<f64>) -> Result<Self> {
        check_linear_dims(&transition, &measurement)?;
        let f_mat = transition.clone();
        let h_mat = measurement.clone();
        Ok(Self {
            state_dim: transition.nrows(),
            measurement_dim: measurement.nrows(),
            f: Arc::new(move |x| &f_mat * x),
            h: Arc::new(move |x| &h_mat * x),
            transition: Some(transition),
            measurement: Some(measurement),
        })
    }

    /// Attach matrix forms to a model built from closures. The caller asserts
    /// that `f(x) = F·x` and `h(x) = H·x`; see [`SystemModel::linear_forms_agree`].
    pub fn with_linear_forms(
        mut self,
        transition: DMatrix<f64>,
        measurement: DMatrix<f64>,
    ) -> Result<Self> {
        check_linear_dims(&transition, &measurement)?;
        if transition.nrows() != self.state_dim || measurement.nrows() != self.measurement_dim {
            return Err(Error::DimensionMismatch(
                "linear forms disagree with model dimensions".into(),
            ));
        }
        self.transition = Some(transition);
        self.measurement = Some(measurement);
        Ok(self)
    }

    pub fn state_dim(&self) -> usize {
        self.state_dim
    }

    pub fn measurement_dim(&self) -> usize {
        self.measurement_dim
    }

    pub fn transition_matrix(&self) -> Option<&DMatrix<f64>> {
        self.transition.as_ref()
    }

    pub fn measurement_matrix(&self) -> Option<&DMatrix<f64>> {
        self.measurement.as_ref()
    }

    pub fn propagate(&self, x: &DVector<f64>) -> DVector<f64> {
        (self.f)(x)
    }

    pub fn measure(&self, x: &DVector<f64>) -> DVector<f64> {
        (self.h)(x)
    }

    /// Spot-check the attached matrix forms against `f` and `h` on the given
    /// sample states.
    pub fn linear_forms_agree<'a, I>(&self, samples: I, tol: f64) -> bool
    where
        I: IntoIterator<Item = &'a DVector<f64>>,
    {
        let (Some(fm), Some(hm)) = (&self.transition, &self.measurement) else {
            return false;
        };
        samples.into_iter().all(|x| {
            let scale = 1.0 + x.amax();
            (self.propagate(x) - fm * x).amax() <= tol * scale
                && (self.measure(x) - hm * x).amax() <= tol * scale
        })
    }

    /// Restrict the measurement to the listed components of `h`.
    pub fn select_measurements(&self, rows: &[usize]) -> SystemModel {
        let h = Arc::clone(&self.h);
        let picked: Vec<usize> = rows.to_vec();
        SystemModel {
            state_dim: self.state_dim,
            measurement_dim: rows.len(),
            f: Arc::clone(&self.f),
            h: Arc::new(move |x| {
                let full = h(x);
                DVector::from_iterator(picked.len(), picked.iter().map(|&r| full[r]))
            }),
            transition: self.transition.clone(),
            measurement: self.measurement.as_ref().map(|m| m.select_rows(rows)),
        }
    }
}

fn check_linear_dims(f: &DMatrix<f64>, h: &DMatrix<f64>) -> Result<()> {
    if !f.is_square() || h.ncols() != f.nrows() {
        return Err(Error::DimensionMismatch(format!(
            "F is {}x{}, H is {}x{}",
            f.nrows(),
            f.ncols(),
            h.nrows(),
            h.ncols()
        )));
    }
    Ok(())
}

fn check_state(state: &GaussianState, model: &SystemModel, noise: &NoiseModel) -> Result<()> {
    let n = model.state_dim();
    if state.dim() != n || noise.process_cov.nrows() != n {
        return Err(Error::DimensionMismatch(format!(
            "model state dimension {n}, state {}, process noise {}",
            state.dim(),
            noise.process_cov.nrows()
        )));
    }
    Ok(())
}

fn check_measurement(model: &SystemModel, noise: &NoiseModel, y: &DVector<f64>) -> Result<()> {
    let d = model.measurement_dim();
    if y.len() != d || noise.measurement_cov.nrows() != d {
        return Err(Error::DimensionMismatch(format!(
            "model measurement dimension {d}, measurement {}, measurement noise {}",
            y.len(),
            noise.measurement_cov.nrows()
        )));
    }
    Ok(())
}

/// Solve `K·S = cross` for the gain `K` against a Cholesky factorization of the
/// innovation covariance `S`.
fn solve_gain(cross: &DMatrix<f64>, innovation_cov: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let eig = innovation_cov.clone().symmetric_eigen();
    let max = eig.eigenvalues.amax();
    let min = eig.eigenvalues.min();
    let condition = if min > 0.0 { max / min } else { f64::INFINITY };
    if condition.is_nan() || condition > MAX_INNOVATION_CONDITION {
        return Err(Error::SingularInnovation { condition });
    }
    let chol = innovation_cov
        .clone()
        .cholesky()
        .ok_or(Error::SingularInnovation { condition })?;
    // S is symmetric, so Kᵀ = S⁻¹·crossᵀ
    Ok(chol.solve(&cross.transpose()).transpose())
}

pub fn kf_predict(
    state: &GaussianState,
    model: &SystemModel,
    noise: &NoiseModel,
) -> Result<GaussianState> {
    let f = model
        .transition_matrix()
        .ok_or(Error::MissingLinearForm("transition"))?;
    check_state(state, model, noise)?;
    let mean = f * &state.mean;
    let cov = f * &state.cov * f.transpose() + &noise.process_cov;
    Ok(GaussianState {
        mean,
        cov: symmetrize(cov),
    })
}

pub fn kf_update(
    state: &GaussianState,
    model: &SystemModel,
    noise: &NoiseModel,
    y: &DVector<f64>,
) -> Result<GaussianState> {
    let h = model
        .measurement_matrix()
        .ok_or(Error::MissingLinearForm("measurement"))?;
    check_state(state, model, noise)?;
    check_measurement(model, noise, y)?;
    let innovation = y - h * &state.mean;
    let cross = &state.cov * h.transpose();
    let s = symmetrize(h * &cross + &noise.measurement_cov);
    let gain = solve_gain(&cross, &s)?;
    let mean = &state.mean + &gain * innovation;
    let cov = &state.cov - &gain * &s * gain.transpose();
    Ok(GaussianState {
        mean,
        cov: symmetrize(cov),
    })
}

pub fn kf_step(
    state: &GaussianState,
    model: &SystemModel,
    noise: &NoiseModel,
    y: &DVector<f64>,
) -> Result<GaussianState> {
    let predicted = kf_predict(state, model, noise)?;
    kf_update(&predicted, model, noise, y)
}

/// Time update: draw sigma points from `state`, push each through `f`, and
/// rebuild the predicted mean and covariance (plus process noise). The
/// propagated sigma set is returned alongside.
pub fn ukf_predict(
    state: &GaussianState,
    model: &SystemModel,
    noise: &NoiseModel,
    w: &UtWeights,
) -> Result<(GaussianState, SigmaSet)> {
    check_state(state, model, noise)?;
    let sigma = compute_sigma_points(&state.mean, &state.cov, w)?;
    let propagated = sigma.map(|x| model.propagate(x));
    let (mean, cov) = reconstruct_statistics(&propagated, w)?;
    let cov = symmetrize(cov + &noise.process_cov);
    Ok((GaussianState { mean, cov }, propagated))
}

/// Measurement update. Sigma points are redrawn from the predicted state, not
/// reused from the time update.
pub fn ukf_update(
    predicted: &GaussianState,
    model: &SystemModel,
    noise: &NoiseModel,
    w: &UtWeights,
    y: &DVector<f64>,
) -> Result<GaussianState> {
    ukf_update_impl(predicted, model, noise, w, y, None)
}

/// Measurement update with the gain rows of `frozen` state components forced to
/// zero, so those components (and their covariance rows) pass through
/// unchanged.
pub fn ukf_update_partial(
    predicted: &GaussianState,
    model: &SystemModel,
    noise: &NoiseModel,
    w: &UtWeights,
    y: &DVector<f64>,
    frozen: &[bool],
) -> Result<GaussianState> {
    if frozen.len() != predicted.dim() {
        return Err(Error::DimensionMismatch(format!(
            "frozen mask has {} entries for a {}-dim state",
            frozen.len(),
            predicted.dim()
        )));
    }
    ukf_update_impl(predicted, model, noise, w, y, Some(frozen))
}

fn ukf_update_impl(
    predicted: &GaussianState,
    model: &SystemModel,
    noise: &NoiseModel,
    w: &UtWeights,
    y: &DVector<f64>,
    frozen: Option<&[bool]>,
) -> Result<GaussianState> {
    check_state(predicted, model, noise)?;
    check_measurement(model, noise, y)?;
    let sigma = compute_sigma_points(&predicted.mean, &predicted.cov, w)?;
    let measured = sigma.map(|x| model.measure(x));

    let cross = cross_moment(&sigma, &measured, w)?;
    let auto = cross_moment(&measured, &measured, w)?;
    let s = symmetrize(auto + &noise.measurement_cov);
    let mut gain = solve_gain(&cross, &s)?;
    if let Some(mask) = frozen {
        for (row, _) in mask.iter().enumerate().filter(|(_, &f)| f) {
            gain.row_mut(row).fill(0.0);
        }
    }

    let expected = &measured.points * w.mean_weights();
    let mean = &predicted.mean + &gain * (y - expected);
    let cov = &predicted.cov - &gain * &s * gain.transpose();
    Ok(GaussianState {
        mean,
        cov: symmetrize(cov),
    })
}

pub fn ukf_step(
    state: &GaussianState,
    model: &SystemModel,
    noise: &NoiseModel,
    w: &UtWeights,
    y: &DVector<f64>,
) -> Result<GaussianState> {
    let (predicted, _) = ukf_predict(state, model, noise, w)?;
    ukf_update(&predicted, model, noise, w, y)
}
