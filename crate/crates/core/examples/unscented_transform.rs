//! Push a Gaussian through a nonlinear map with the scaled unscented
//! transform and compare against a large Monte-Carlo sample.

use nalgebra::{dmatrix, dvector, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use ukf_tracker::ut::{compute_sigma_points, compute_weights, reconstruct_statistics, UtConfig};

fn polar_to_cartesian(v: &DVector<f64>) -> DVector<f64> {
    dvector![v[0] * v[1].cos(), v[0] * v[1].sin()]
}

fn main() -> ukf_tracker::Result<()> {
    // range 10 ± 0.5, bearing 45° ± 15°
    let mean = dvector![10.0, std::f64::consts::FRAC_PI_4];
    let cov = dmatrix![0.25, 0.0; 0.0, 15f64.to_radians().powi(2)];

    for alpha in [1.0, 0.5, 1e-3] {
        let w = compute_weights(2, &UtConfig::new(alpha)?)?;
        let sigma = compute_sigma_points(&mean, &cov, &w)?;
        let (m, p) = reconstruct_statistics(&sigma.map(polar_to_cartesian), &w)?;
        println!(
            "alpha {alpha:<6} lambda {:>9.5}  mean ({:.4}, {:.4})  var ({:.4}, {:.4})",
            w.lambda(),
            m[0],
            m[1],
            p[(0, 0)],
            p[(1, 1)]
        );
    }

    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let n = 200_000;
    let l = cov.map(f64::sqrt);
    let samples: Vec<DVector<f64>> = (0..n)
        .map(|_| {
            let z = dvector![rng.sample(StandardNormal), rng.sample(StandardNormal)];
            polar_to_cartesian(&(&mean + &l * z))
        })
        .collect();
    let m = samples.iter().fold(DVector::zeros(2), |acc, s| acc + s) / n as f64;
    let var = samples
        .iter()
        .fold(DVector::zeros(2), |acc, s| acc + (s - &m).map(|d| d * d))
        / (n - 1) as f64;
    println!(
        "monte carlo       mean ({:.4}, {:.4})  var ({:.4}, {:.4})",
        m[0], m[1], var[0], var[1]
    );
    Ok(())
}
