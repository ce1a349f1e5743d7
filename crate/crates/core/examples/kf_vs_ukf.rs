//! Run the unscented and the linear Kalman filter side by side on one noisy
//! pass of the turning path.

use ukf_tracker::sim::{
    add_noise, gen_turning_path, run_filters, tracking_error, trial_rng, Scenario,
};

fn main() -> ukf_tracker::Result<()> {
    let scenario = Scenario::default();
    let truth = gen_turning_path(&scenario.path)?;
    let sigma = 3.0;
    let meas = add_noise(&truth, sigma, &mut trial_rng(scenario.seed, 0));
    let run = run_filters(&scenario, &meas, sigma)?;

    println!("frame    true x   true y     ukf x    ukf y      kf x     kf y");
    for k in (0..truth.len()).step_by(10) {
        println!(
            "{k:>5} {:>9.2} {:>8.2} {:>9.2} {:>8.2} {:>9.2} {:>8.2}",
            truth[k].0, truth[k].1, run.ukf[k].x, run.ukf[k].y, run.kf[k].x, run.kf[k].y
        );
    }

    let pos = |v: &[ukf_tracker::motion::ObjectKinematics]| -> Vec<(f64, f64)> {
        v.iter().map(|k| k.position()).collect()
    };
    let raw = tracking_error(&meas, &truth)?;
    let ukf = tracking_error(&pos(&run.ukf), &truth)?;
    let kf = tracking_error(&pos(&run.kf), &truth)?;
    println!(
        "rmse  measurements {:.4}  ukf {:.4}  kf {:.4}",
        raw.rmse, ukf.rmse, kf.rmse
    );
    // The model is linear, so the two filters differ only by rounding.
    println!("ukf - kf = {:e}", ukf.rmse - kf.rmse);
    Ok(())
}
