//! Compressed design: random decimation plus an l1 penalty.
//!
//! Keeps K of the N grid samples (chosen uniformly at random), then solves
//! min ||Phi theta - alpha||^2 + mu1 ||theta||_1 with FISTA. The result
//! tracks almost as well as the dense ridge design while using a fraction
//! of the coefficients, and far fewer measurements.
//!
//! ```bash
//! cargo run --release -p cs-control --example l1l2_design
//! ```

use cs_control::lti::{simulate_output, Plant};
use cs_control::sensing::{build_gram, compress, draw_plan};
use cs_control::signals::{sample_reference, ReferenceSpec, SignalSpace};
use cs_control::solvers::{solve_l1l2_fista, solve_l2, SolverConfig};
use nalgebra::{dmatrix, dvector};

fn main() -> cs_control::Result<()> {
    let plant = Plant::new(
        dmatrix![0.0, 1.0; -0.5, -1.5],
        dvector![0.0, 1.0],
        dvector![-0.5, 1.0],
        dvector![0.0, 0.0],
    )?;
    let space = SignalSpace::new(2.0 * std::f64::consts::PI, 100)?;
    let spec = ReferenceSpec::sin(20, 1.0).plus(ReferenceSpec::cos(50, 1.0));

    let (g, h) = build_gram(&plant, &space)?;
    let r = sample_reference(&spec, &space)?;
    let beta = &r - &h * plant.x0();

    // K = 67 of N = 201 samples survive the decimation.
    let plan = draw_plan(&space, 67, 42)?;
    let (phi, alpha) = compress(&g, &beta, &plan)?;

    let config = SolverConfig {
        mu1: 1.2732395447351628e-2,
        mu2: 1e-4 / space.sample_period(),
        max_iters: 20_000,
        rel_tol: 1e-6,
        ..SolverConfig::default()
    };
    let sparse = solve_l1l2_fista(&phi, &alpha, &config, space)?;
    let dense = solve_l2(&g, &beta, config.mu2, space)?;

    println!(
        "FISTA: {} iterations, converged = {}, residual = {:.4e}",
        sparse.iterations, sparse.converged, sparse.residual
    );
    println!(
        "compressed support {} of {}; ridge support {}",
        sparse.theta.cardinality(1e-12),
        space.len(),
        dense.cardinality(1e-12)
    );

    // Tracking error on a fine grid, transient included.
    let grid: Vec<f64> = (0..400).map(|i| space.horizon() * i as f64 / 400.0).collect();
    let mut err = [0.0f64; 2];
    let traces = [simulate_output(&plant, &dense, &grid)?, simulate_output(&plant, &sparse.theta, &grid)?];
    for (i, &t) in grid.iter().enumerate() {
        let target = spec.evaluate(&space, t);
        err[0] += (traces[0][i] - target).abs();
        err[1] += (traces[1][i] - target).abs();
    }
    println!("\ntime-averaged |r - y|:");
    println!("  ridge (201 coefs, 201 samples): {:.6e}", err[0] / grid.len() as f64);
    println!("  l1-l2 ({} coefs, 67 samples):  {:.6e}", sparse.theta.cardinality(1e-12), err[1] / grid.len() as f64);
    Ok(())
}
