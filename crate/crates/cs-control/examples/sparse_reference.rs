//! Reference signals and their exact Fourier coefficients.
//!
//! A reference built from a handful of tones is sparse in the basis: a
//! single sin or cos term occupies exactly two conjugate entries. This
//! example assembles the two-tone reference used by the sinusoid
//! experiment, prints its coefficient support, and verifies the synthesis
//! round trip on a few grid points.

use cs_control::signals::{
    sample_reference, synthesize, reference_to_coefs, ReferenceSpec, SignalSpace,
};

fn main() -> cs_control::Result<()> {
    let space = SignalSpace::new(2.0 * std::f64::consts::PI, 100)?;
    let spec = ReferenceSpec::sin(20, 1.0).plus(ReferenceSpec::cos(50, 1.0));

    let coefs = reference_to_coefs(&spec, &space)?;
    println!("N = {} coefficients, band |m| <= {}", space.len(), space.band());
    println!("support of r(t) = sin(20 w1 t) + cos(50 w1 t): {:?}", coefs.support(1e-12));
    println!("||coefs||_0 = {}", coefs.cardinality(1e-12));
    println!("||coefs||_1 = {:.6}", coefs.norm_l1());

    for m in coefs.support(1e-12) {
        let z = coefs.get(m);
        println!("  m = {m:>3}: {:+.6} {:+.6}i", z.re, z.im);
    }

    // The sampled reference and the synthesized coefficient expansion must
    // agree at every sample instant.
    let samples = sample_reference(&spec, &space)?;
    let mut worst = 0.0f64;
    for (n, &t) in space.sample_instants().iter().enumerate() {
        let direct = samples[n];
        let expanded = synthesize(&coefs, t)?;
        worst = worst.max((direct - expanded).abs());
    }
    println!("\nmax synthesis gap over {} samples: {:.3e}", samples.len(), worst);
    assert!(worst < 1e-10);
    Ok(())
}
