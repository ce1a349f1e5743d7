//! The Monte-Carlo noise sweep: mean RMSE of both filters at each noise
//! level over 100 trials.

use ukf_tracker::sim::{run_comparison, write_report, Scenario};

fn main() -> ukf_tracker::Result<()> {
    let result = run_comparison(&Scenario::default())?;
    write_report(&result, std::io::stdout().lock())
}
