//! Single versus coupled projections as the rank grows.
//!
//! At low SNR and growing rank the subspace estimates that a single random
//! projection produces get noisier, and fusing several coupled projections
//! pays off most. This sweep prints the rap/corap error ratio per rank with
//! the sketch width held at twice the rank.
//!
//! ```bash
//! cargo run --example rank_sweep --release
//! ```

use anyhow::Result;

use corap::bench::{run_experiment, summarize, Algorithm, ExperimentConfig};

fn main() -> Result<()> {
    println!(
        "{:<5} {:>13} {:>13} {:>9}",
        "rank", "mre_rap", "mre_corap", "ratio"
    );
    for rank in [4usize, 8, 12] {
        let mut cfg = ExperimentConfig::new((60, 60, 60), rank);
        cfg.oversample = 2 * rank;
        cfg.max_power = 2;
        cfg.snr_db = vec![-2.0];
        cfg.algorithms = vec![Algorithm::Rap, Algorithm::Corap];
        cfg.n_trials = 8;
        cfg.seed = 7;
        cfg.threads = 1;
        let records = run_experiment(&cfg)?;
        let rows = summarize(&records);
        let mre = |name: &str| -> f64 {
            rows.iter()
                .find(|r| r.algorithm.as_str() == name)
                .map(|r| r.mean_mre)
                .unwrap_or(f64::NAN)
        };
        let (rap, corap) = (mre("rap"), mre("corap"));
        println!(
            "{:<5} {:>13.6e} {:>13.6e} {:>9.3}",
            rank,
            rap,
            corap,
            rap / corap
        );
    }
    Ok(())
}
