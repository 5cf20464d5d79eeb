//! Isometry constants and certified recovery bounds.
//!
//! For a compressed matrix Phi the level-L isometry constant delta_L
//! measures how far L-column submatrices are from orthonormal. When
//! delta_{2S} < sqrt(2) - 1 the l1 recovery error is bounded by
//! C1 eps1 / sqrt(S) + C2 eps2, and that propagates to a bound on the
//! tracking error of the compressed design. Exact enumeration is exponential
//! in L, so a subsampled Monte Carlo variant covers the sizes enumeration
//! cannot reach; the sampled value never exceeds the exact one.
//!
//! Plant grams on the endpoint-inclusive grid never meet the hypothesis:
//! omega_M t_n is a multiple of pi, so the outermost +/-M columns are nearly
//! parallel and delta_2 alone sits well above the limit. Part one measures
//! that honestly; part two certifies the bounds on a synthetic unitary gram
//! (Fourier columns, one sample row dropped, delta_{2S} = 2S/N exactly).

use cs_control::lti::Plant;
use cs_control::rip::{
    bound_constants, evaluate_bounds, rip_constant_exact, rip_constant_monte_carlo, DELTA_LIMIT,
};
use cs_control::sensing::{build_gram, draw_plan, SensingSystem};
use cs_control::signals::{sample_reference, ReferenceSpec, SignalSpace};
use cs_control::solvers::{solve_l1l2_fista, solve_l2, SolverConfig};
use nalgebra::{dmatrix, dvector, DMatrix, DVector};
use num_complex::Complex64;

// Unitary N x N matrix whose columns are the discrete Fourier vectors,
// ordered to mirror the coefficient layout: conjugate pairs around a real
// center column. Conjugacy is exact to the bit, so the solvers keep their
// solutions on the real-signal subspace.
fn fourier_gram(band: usize) -> DMatrix<Complex64> {
    let n = 2 * band + 1;
    let scale = 1.0 / (n as f64).sqrt();
    let mut g = DMatrix::zeros(n, n);
    for row in 0..n {
        g[(row, band)] = Complex64::new(scale, 0.0);
        for m in 1..=band {
            let (s, c) = (std::f64::consts::TAU * (row * m) as f64 / n as f64).sin_cos();
            g[(row, band + m)] = Complex64::new(scale * c, -scale * s);
            g[(row, band - m)] = Complex64::new(scale * c, scale * s);
        }
    }
    g
}

fn main() -> cs_control::Result<()> {
    let plant = Plant::new(
        dmatrix![0.0, 1.0; -0.5, -1.5],
        dvector![0.0, 1.0],
        dvector![-0.5, 1.0],
        dvector![0.0, 0.0],
    )?;
    // Small band keeps exact enumeration cheap: N = 13.
    let band = 6;
    let space = SignalSpace::new(2.0 * std::f64::consts::PI, band)?;
    let n = space.len();
    let spec = ReferenceSpec::sin(2, 1.0);
    let s = 2;

    // Part one: the plant-derived sensing matrix.
    let r = sample_reference(&spec, &space)?;
    let plan = draw_plan(&space, 10, 3)?;
    let system = SensingSystem::assemble(&plant, &space, r, plan)?;

    let exact = rip_constant_exact(system.phi(), 2 * s)?;
    let sampled = rip_constant_monte_carlo(system.phi(), 2 * s, 200, 99)?;
    println!("plant gram, K = 10:");
    println!(
        "  delta_{}(exact)  = {:.6} over {} supports",
        2 * s,
        exact.delta,
        exact.supports_checked
    );
    println!("  delta_{}(MC 200) = {:.6}", 2 * s, sampled.delta);
    println!(
        "  recovery hypothesis delta < {DELTA_LIMIT:.6}: {} (aliased +/-{band} columns)",
        exact.delta < DELTA_LIMIT
    );
    let theta_star = solve_l2(system.g(), system.beta(), 1e-12, space)?;
    let config = SolverConfig { mu1: 1e-3, mu2: 1e-12, rel_tol: 1e-12, ..SolverConfig::default() };
    let compressed = solve_l1l2_fista(system.phi(), system.alpha(), &config, space)?;
    let report =
        evaluate_bounds(&plant, &space, &system, &spec, &theta_star, &compressed, s, &exact)?;
    println!(
        "  report: applicable = {}, certified = {}, measured coefficient error {:.3e}",
        report.applicable, report.certified, report.measured_coef_error
    );

    // Part two: a synthetic unitary gram through the same pipeline. The
    // ideal solve is aimed at an exactly S-sparse target, so the
    // unrecoverable-tail term collapses and the residual term carries the
    // bound.
    let g = fourier_gram(band);
    let mut target = DVector::zeros(n);
    let z = Complex64::new(2.0, 0.7);
    target[band + 2] = z;
    target[band - 2] = z.conj();
    let forced = &g * &target;
    let r_vec = DVector::from_iterator(n, forced.iter().map(|v| v.re));
    let (_, h) = build_gram(&plant, &space)?;
    let plan = draw_plan(&space, n - 1, 11)?;
    let system = SensingSystem::from_gram(g.clone(), h, r_vec, plant.x0(), plan)?;

    let exact = rip_constant_exact(system.phi(), 2 * s)?;
    println!("\nsynthetic Fourier gram, K = {}:", n - 1);
    println!(
        "  delta_{}(exact)  = {:.6} (2S/N = {:.6})",
        2 * s,
        exact.delta,
        2.0 * s as f64 / n as f64
    );
    let (c1, c2) = bound_constants(exact.delta)?;
    println!("  bound constants: C1 = {c1:.4}, C2 = {c2:.4}");

    let theta_star = solve_l2(&g, system.beta(), 1e-12, space)?;
    let compressed = solve_l1l2_fista(system.phi(), system.alpha(), &config, space)?;
    let report =
        evaluate_bounds(&plant, &space, &system, &spec, &theta_star, &compressed, s, &exact)?;
    println!("  applicable = {}, certified = {}", report.applicable, report.certified);
    let coef_bound = report.coef_bound.expect("hypothesis holds");
    let tracking_bound = report.tracking_bound.expect("hypothesis holds");
    println!(
        "  coefficient error: measured {:.6e} <= bound {:.6e} (ratio {:.3})",
        report.measured_coef_error,
        coef_bound,
        report.measured_coef_error / coef_bound
    );
    println!(
        "  tracking error:    measured {:.6e} <= bound {:.6e}",
        report.compressed_tracking_error, tracking_bound
    );
    Ok(())
}
