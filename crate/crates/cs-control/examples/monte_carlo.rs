//! Config-driven Monte Carlo comparison of the three designs.
//!
//! Loads the sinusoid experiment config, shrinks it to 25 trials so the
//! example finishes quickly, and aggregates per-trial sparsity and tracking
//! error for the ridge, l1-l2, and truncated-ridge designs. The full runs
//! behind the shipped statistics use the same code path via the CLI:
//!
//! ```bash
//! cargo run --release -p cs-control -- experiment \
//!     --config crates/cs-control/configs/sinusoid.toml --out /tmp/sinusoid
//! ```

use cs_control::experiment::{run_monte_carlo, ExperimentConfig, ExperimentContext};
use std::path::Path;

fn main() -> cs_control::Result<()> {
    let config_path =
        Path::new(env!("CARGO_MANIFEST_DIR")).join("configs").join("sinusoid.toml");
    let config = ExperimentConfig::from_file(&config_path)?.with_overrides(None, Some(25))?;
    let ctx = ExperimentContext::new(config)?;

    let summary = run_monte_carlo(&ctx)?;
    println!(
        "{} of {} trials completed, {} hit the iteration budget",
        summary.completed, summary.trials, summary.non_converged
    );

    let s = &summary.sparsity_l1l2;
    println!("\nl1-l2 support size: mean {:.1}, std {:.1}, range [{}, {}]", s.mean, s.std, s.min, s.max);
    println!("ridge support size: {:.0} (always dense)", summary.sparsity_l2.mean);
    println!("compression ratio:  {:.3}", summary.compression_ratio);
    println!("FISTA iterations:   mean {:.0}, max {:.0}", summary.iterations.mean, summary.iterations.max);

    let labels = ["ridge", "l1-l2", "trunc"];
    println!("\ntime-averaged |r - y| of the mean error trace:");
    for (label, err) in labels.iter().zip(summary.time_avg_err.iter()) {
        println!("  {label}: {err:.6e}");
    }

    let rep = &summary.representative;
    println!(
        "\nrepresentative trial {}: seed {}, support {}, {} iterations",
        rep.trial, rep.seed, rep.sparsity_l1l2, rep.iterations
    );
    Ok(())
}
