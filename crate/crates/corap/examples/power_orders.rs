//! Effect of the number of coupled projections M on accuracy.
//!
//! Runs the coupled pipeline with M = 2..5 at a fixed SNR. More projections
//! mean more sketched data fused through the shared third-mode factor, but
//! past a small M the accuracy barely moves while the cost keeps growing —
//! which is why M = 2 is the practical default.
//!
//! ```bash
//! cargo run --example power_orders --release
//! ```

use anyhow::Result;

use corap::bench::{run_experiment, summarize, Algorithm, ExperimentConfig};

fn main() -> Result<()> {
    println!(
        "{:<4} {:>13} {:>13} {:>9}",
        "M", "mean_mre", "stderr", "time_s"
    );
    for max_power in 2..=5 {
        let mut cfg = ExperimentConfig::new((50, 50, 50), 8);
        cfg.oversample = 16;
        cfg.max_power = max_power;
        cfg.snr_db = vec![6.0];
        cfg.algorithms = vec![Algorithm::Corap];
        cfg.n_trials = 8;
        cfg.seed = 99; // same seed: every M sees the same instances
        cfg.threads = 1;
        let records = run_experiment(&cfg)?;
        let row = &summarize(&records)[0];
        println!(
            "{:<4} {:>13.6e} {:>13.6e} {:>9.3}",
            max_power, row.mean_mre, row.stderr_mre, row.mean_wall_time_s
        );
    }
    Ok(())
}
