//! Restricted-isometry analysis at desk scale: exact and Monte-Carlo
//! isometry constants, the sparse-recovery bound constants, the kernel energy
//! factor `eta`, and assembly of coefficient / tracking error bounds.

use nalgebra::linalg::SymmetricEigen;
use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lti::{kernel_basis_inner_product, kernel_coefficient_matrix, transient_rows, Plant};
use crate::sensing::SensingSystem;
use crate::signals::{check_imag_residue, CoefVector, ReferenceSpec, SignalSpace};
use crate::solvers::{truncate_top_s, SolveResult};

/// How an isometry constant was obtained. Exhaustive enumeration certifies
/// the value; random support sampling only bounds it from below.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RipMethod {
    ExactEnumeration,
    MonteCarloLowerBound,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RipReport {
    /// Sparsity level the constant refers to.
    pub l: usize,
    /// Isometry constant `delta_l`: the smallest number with
    /// `(1-delta)*||x||^2 <= ||Phi x||^2 <= (1+delta)*||x||^2` over l-sparse x.
    pub delta: f64,
    pub method: RipMethod,
    pub supports_checked: u64,
}

/// Largest support count `rip_constant_exact` is willing to enumerate.
pub const ENUMERATION_GUARD: u64 = 2_000_000;

// True if C(n, l) exceeds cap; exact integer arithmetic.
fn binomial_exceeds(n: usize, l: usize, cap: u64) -> bool {
    let l = l.min(n - l);
    let mut acc: u128 = 1;
    for i in 0..l {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
        if acc > cap as u128 {
            return true;
        }
    }
    false
}

// Eigenvalue range of a Hermitian matrix through the real symmetric
// embedding [[Re, -Im], [Im, Re]], whose spectrum is that of the input with
// doubled multiplicities.
fn hermitian_eigen_range(b: &DMatrix<Complex64>) -> (f64, f64) {
    let l = b.nrows();
    if l == 1 {
        let v = b[(0, 0)].re;
        return (v, v);
    }
    let mut e = DMatrix::<f64>::zeros(2 * l, 2 * l);
    for i in 0..l {
        for j in 0..l {
            let z = b[(i, j)];
            e[(i, j)] = z.re;
            e[(i, l + j)] = -z.im;
            e[(l + i, j)] = z.im;
            e[(l + i, l + j)] = z.re;
        }
    }
    let eig = SymmetricEigen::new(e);
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for &v in eig.eigenvalues.iter() {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    (lo, hi)
}

// Deviation from isometry on one support: the principal submatrix of the
// full Gram matrix at `support`, scored as max(lmax - 1, 1 - lmin).
fn support_deviation(gram: &DMatrix<Complex64>, support: &[usize]) -> f64 {
    let l = support.len();
    let mut b = DMatrix::<Complex64>::zeros(l, l);
    for (i, &si) in support.iter().enumerate() {
        for (j, &sj) in support.iter().enumerate() {
            b[(i, j)] = gram[(si, sj)];
        }
    }
    let (lo, hi) = hermitian_eigen_range(&b);
    (hi - 1.0).max(1.0 - lo)
}

fn validate_level(phi: &DMatrix<Complex64>, l: usize) -> Result<()> {
    if l == 0 || l > phi.ncols() {
        return Err(Error::Domain(format!(
            "sparsity level {l} outside 1..={} columns",
            phi.ncols()
        )));
    }
    Ok(())
}

// Lexicographic walk over all size-l subsets of start..n.
fn for_each_subset(start: usize, n: usize, l: usize, mut f: impl FnMut(&[usize])) {
    if l == 0 {
        f(&[]);
        return;
    }
    if start + l > n {
        return;
    }
    let mut idx: Vec<usize> = (start..start + l).collect();
    loop {
        f(&idx);
        let mut i = l;
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            if idx[i] < n - l + i {
                idx[i] += 1;
                for j in i + 1..l {
                    idx[j] = idx[j - 1] + 1;
                }
                break;
            }
        }
    }
}

/// Exact isometry constant by enumerating every size-`l` column support and
/// taking the extremal Rayleigh quotients of the support Gram matrices.
///
/// Refuses instances with more than [`ENUMERATION_GUARD`] supports; use
/// [`rip_constant_monte_carlo`] for a lower bound there.
pub fn rip_constant_exact(phi: &DMatrix<Complex64>, l: usize) -> Result<RipReport> {
    validate_level(phi, l)?;
    let n = phi.ncols();
    if binomial_exceeds(n, l, ENUMERATION_GUARD) {
        return Err(Error::EnumerationGuard(format!(
            "C({n}, {l}) exceeds the enumeration guard {ENUMERATION_GUARD}; \
             use the Monte-Carlo lower bound instead"
        )));
    }
    let gram = phi.adjoint() * phi;

    // Partition by the smallest support element so the walk parallelizes.
    let per_first: Vec<(f64, u64)> = (0..=n - l)
        .into_par_iter()
        .map(|first| {
            let mut worst = 0.0f64;
            let mut count = 0u64;
            let mut support = vec![0usize; l];
            support[0] = first;
            for_each_subset(first + 1, n, l - 1, |rest| {
                support[1..].copy_from_slice(rest);
                worst = worst.max(support_deviation(&gram, &support));
                count += 1;
            });
            (worst, count)
        })
        .collect();

    let delta = per_first.iter().map(|&(d, _)| d).fold(0.0, f64::max);
    let supports_checked = per_first.iter().map(|&(_, c)| c).sum();
    Ok(RipReport { l, delta, method: RipMethod::ExactEnumeration, supports_checked })
}

/// Lower bound on the isometry constant from randomly sampled supports.
pub fn rip_constant_monte_carlo(
    phi: &DMatrix<Complex64>,
    l: usize,
    trials: usize,
    seed: u64,
) -> Result<RipReport> {
    validate_level(phi, l)?;
    if trials == 0 {
        return Err(Error::Domain("trial count must be at least 1".into()));
    }
    let n = phi.ncols();
    let gram = phi.adjoint() * phi;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pool: Vec<usize> = (0..n).collect();
    let mut delta = 0.0f64;
    for _ in 0..trials {
        for i in 0..l {
            let j = rng.random_range(i..n);
            pool.swap(i, j);
        }
        let mut support = pool[..l].to_vec();
        support.sort_unstable();
        delta = delta.max(support_deviation(&gram, &support));
    }
    Ok(RipReport {
        l,
        delta,
        method: RipMethod::MonteCarloLowerBound,
        supports_checked: trials as u64,
    })
}

/// Threshold below which the recovery bound applies: `sqrt(2) - 1`.
pub const DELTA_LIMIT: f64 = std::f64::consts::SQRT_2 - 1.0;

/// Constants of the sparse-recovery error bound,
/// `C1 = 2*(1 + (sqrt(2)-1)*delta) / (1 - (sqrt(2)+1)*delta)` and
/// `C2 = 4*sqrt(1 + delta) / (1 - (sqrt(2)+1)*delta)`, valid for
/// `delta_2S < sqrt(2) - 1`.
pub fn bound_constants(delta_2s: f64) -> Result<(f64, f64)> {
    if !(delta_2s >= 0.0) {
        return Err(Error::Domain(format!("isometry constant must be nonnegative, got {delta_2s}")));
    }
    if delta_2s >= DELTA_LIMIT {
        return Err(Error::NotApplicable(format!(
            "delta_2S = {delta_2s} is not below sqrt(2)-1 = {DELTA_LIMIT}; the bound hypothesis fails"
        )));
    }
    let denom = 1.0 - (std::f64::consts::SQRT_2 + 1.0) * delta_2s;
    let c1 = 2.0 * (1.0 + (std::f64::consts::SQRT_2 - 1.0) * delta_2s) / denom;
    let c2 = 4.0 * (1.0 + delta_2s).sqrt() / denom;
    Ok((c1, c2))
}

// Composite trapezoid over [0, horizon] with grid doubling from 2^10
// intervals until the integral changes by less than 1e-6 relative. `eval`
// receives whole batches of times so callers can use the uniform-grid fast
// path of the kernel machinery.
fn trapezoid_doubling<F>(horizon: f64, mut eval: F) -> Result<f64>
where
    F: FnMut(&[f64]) -> Result<Vec<f64>>,
{
    let mut intervals = 1024usize;
    let taus: Vec<f64> =
        (0..=intervals).map(|i| horizon * i as f64 / intervals as f64).collect();
    let vals = eval(&taus)?;
    let mut h = horizon / intervals as f64;
    let mut integral = h
        * (0.5 * (vals[0] + vals[intervals])
            + vals[1..intervals].iter().sum::<f64>());

    for _ in 0..14 {
        let midpoints: Vec<f64> = (0..intervals)
            .map(|i| horizon * (2 * i + 1) as f64 / (2 * intervals) as f64)
            .collect();
        let mid_vals = eval(&midpoints)?;
        let refined = 0.5 * integral + 0.5 * h * mid_vals.iter().sum::<f64>();
        intervals *= 2;
        h *= 0.5;
        let done = (refined - integral).abs() <= 1e-6 * refined.abs().max(1e-300);
        integral = refined;
        if done {
            return Ok(integral);
        }
    }
    Err(Error::Internal("quadrature did not converge within 14 grid doublings".into()))
}

/// Energy of the kernel response to one basis frequency:
/// `int_0^T |<kappa(tau,.), psi_omega>|^2 dtau`. Diagnostic building block of
/// [`compute_eta`].
pub fn basis_response_energy(plant: &Plant, omega: f64, horizon: f64) -> Result<f64> {
    trapezoid_doubling(horizon, |taus| {
        taus.iter()
            .map(|&tau| {
                kernel_basis_inner_product(plant, tau, omega, horizon).map(|z| z.norm_sqr())
            })
            .collect()
    })
}

/// The tracking-bound factor
/// `eta = sqrt( sum_m int_0^T |<kappa(tau,.), psi_m>|^2 dtau )`.
pub fn compute_eta(plant: &Plant, space: &SignalSpace) -> Result<f64> {
    let integral = trapezoid_doubling(space.horizon(), |taus| {
        let k = kernel_coefficient_matrix(plant, space, taus)?;
        Ok((0..taus.len()).map(|row| k.row(row).norm_squared()).collect())
    })?;
    Ok(integral.max(0.0).sqrt())
}

/// Continuous tracking error `sqrt( int_0^T (y(tau) - r(tau))^2 dtau )` for
/// the output driven by `theta` from the plant's initial state.
pub fn tracking_error_l2(
    plant: &Plant,
    theta: &CoefVector,
    reference: &ReferenceSpec,
    space: &SignalSpace,
) -> Result<f64> {
    reference.validate(space)?;
    let integral = trapezoid_doubling(space.horizon(), |taus| {
        let kernel = kernel_coefficient_matrix(plant, space, taus)?;
        let forced = kernel * theta.entries();
        let transient = transient_rows(plant, taus)? * plant.x0();
        taus.iter()
            .enumerate()
            .map(|(i, &tau)| {
                let y = transient[i] + check_imag_residue(forced[i], "tracking_error_l2")?;
                let e = y - reference.evaluate(space, tau);
                Ok(e * e)
            })
            .collect()
    })?;
    Ok(integral.max(0.0).sqrt())
}

/// Evaluation of the recovery and tracking bounds for one solved instance,
/// together with the measured quantities they dominate.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundReport {
    /// Sparsity level the ideal vector is compared at.
    pub s: usize,
    /// Tail mass `||theta_star - theta_star_[S]||_1` of the ideal vector.
    pub epsilon1: f64,
    /// Data residual `||Phi*theta_1 - alpha||_2` of the compressed solve.
    pub epsilon2: f64,
    pub delta_2s: f64,
    pub delta_method: RipMethod,
    /// True when `delta_2s` came from exact enumeration; a Monte-Carlo lower
    /// bound cannot certify the hypothesis.
    pub certified: bool,
    /// True when `delta_2s < sqrt(2) - 1` held, so the bounds below exist.
    pub applicable: bool,
    pub c1: Option<f64>,
    pub c2: Option<f64>,
    pub eta: f64,
    /// `C1*eps1/sqrt(S) + C2*eps2`, bounding `||theta_1 - theta_star||_2`.
    pub coef_bound: Option<f64>,
    /// `||y_star - r|| + coef_bound * eta`, bounding `||y_1 - r||`.
    pub tracking_bound: Option<f64>,
    pub measured_coef_error: f64,
    pub ideal_tracking_error: f64,
    pub compressed_tracking_error: f64,
}

/// Assembles a [`BoundReport`]: tail mass of the ideal vector at level `s`,
/// residual of the compressed solve, bound constants from the supplied
/// isometry constant (which must be for level `2s`), the kernel energy
/// factor, and the measured errors the bounds are checked against.
#[allow(clippy::too_many_arguments)]
pub fn evaluate_bounds(
    plant: &Plant,
    space: &SignalSpace,
    system: &SensingSystem,
    reference: &ReferenceSpec,
    theta_star: &CoefVector,
    theta_one: &SolveResult,
    s: usize,
    delta_2s: &RipReport,
) -> Result<BoundReport> {
    if s == 0 {
        return Err(Error::Domain("sparsity level S must be at least 1".into()));
    }
    if delta_2s.l != 2 * s {
        return Err(Error::Domain(format!(
            "isometry constant is for level {}, bounds at S = {s} need level {}",
            delta_2s.l,
            2 * s
        )));
    }
    if system.phi().ncols() != space.len() || theta_star.space() != *space {
        return Err(Error::Dimension("sensing system and space disagree".into()));
    }
    let tail = theta_star.entries() - truncate_top_s(theta_star, s)?.entries();
    let epsilon1 = tail.iter().map(|z| z.norm()).sum::<f64>();
    // Recomputed from the compressed data rather than trusted from the solve,
    // so a result paired with the wrong system cannot pass silently.
    let epsilon2 = (system.phi() * theta_one.theta.entries() - system.alpha()).norm();
    if (epsilon2 - theta_one.residual).abs() > 1e-8 * (1.0 + epsilon2) {
        return Err(Error::Dimension(
            "solve residual does not match the sensing system; mismatched inputs".into(),
        ));
    }
    let eta = compute_eta(plant, space)?;

    let measured_coef_error = (theta_one.theta.entries() - theta_star.entries()).norm();
    let ideal_tracking_error = tracking_error_l2(plant, theta_star, reference, space)?;
    let compressed_tracking_error = tracking_error_l2(plant, &theta_one.theta, reference, space)?;

    let applicable = delta_2s.delta < DELTA_LIMIT;
    let (c1, c2, coef_bound, tracking_bound) = if applicable {
        let (c1, c2) = bound_constants(delta_2s.delta)?;
        let coef = c1 * epsilon1 / (s as f64).sqrt() + c2 * epsilon2;
        let tracking = ideal_tracking_error + coef * eta;
        (Some(c1), Some(c2), Some(coef), Some(tracking))
    } else {
        (None, None, None, None)
    };

    Ok(BoundReport {
        s,
        epsilon1,
        epsilon2,
        delta_2s: delta_2s.delta,
        delta_method: delta_2s.method,
        certified: delta_2s.method == RipMethod::ExactEnumeration,
        applicable,
        c1,
        c2,
        eta,
        coef_bound,
        tracking_bound,
        measured_coef_error,
        ideal_tracking_error,
        compressed_tracking_error,
    })
}
