//! Numerical oracles shared by the integration tests. Everything here is
//! deliberately independent of the library's evaluation paths: plain Taylor
//! matrix exponentials, Simpson quadrature, classical RK4 stepping, and
//! brute-force penalized least-squares enumeration. Keep it that way; these
//! exist to catch bugs in the fast paths, not to mirror them.
#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

/// Scaling-and-squaring Taylor series for exp(M). Converges for any square
/// matrix; crude but method-independent from the library's Pade evaluator.
pub fn expm_taylor(m: &DMatrix<f64>) -> DMatrix<f64> {
    assert!(m.is_square());
    let n = m.nrows();
    let norm = m.iter().map(|x| x.abs()).fold(0.0, f64::max) * n as f64;
    let squarings = if norm > 0.5 { (norm / 0.5).log2().ceil() as i32 } else { 0 };
    let a = m * 0.5f64.powi(squarings);

    let mut sum = DMatrix::<f64>::identity(n, n);
    let mut term = DMatrix::<f64>::identity(n, n);
    for k in 1..200 {
        term = (&term * &a) / k as f64;
        sum += &term;
        if term.iter().map(|x| x.abs()).fold(0.0, f64::max) < 1e-18 {
            break;
        }
    }
    for _ in 0..squarings {
        sum = &sum * &sum;
    }
    sum
}

fn simpson_slice(f: &mut impl FnMut(f64) -> Complex64, a: f64, b: f64) -> Complex64 {
    (f(a) + 4.0 * f(0.5 * (a + b)) + f(b)) * ((b - a) / 6.0)
}

fn adaptive_step(
    f: &mut impl FnMut(f64) -> Complex64,
    a: f64,
    b: f64,
    whole: Complex64,
    tol: f64,
    depth: u32,
) -> Complex64 {
    let mid = 0.5 * (a + b);
    let left = simpson_slice(f, a, mid);
    let right = simpson_slice(f, mid, b);
    let refined = left + right;
    if depth == 0 || (refined - whole).norm() <= 15.0 * tol {
        // Richardson extrapolation of the two estimates.
        return refined + (refined - whole) / 15.0;
    }
    adaptive_step(f, a, mid, left, 0.5 * tol, depth - 1)
        + adaptive_step(f, mid, b, right, 0.5 * tol, depth - 1)
}

/// Adaptive Simpson quadrature of a complex-valued integrand. The interval
/// is pre-split so oscillatory integrands cannot fool the error estimate on
/// a lucky coarse grid.
pub fn adaptive_simpson(
    mut f: impl FnMut(f64) -> Complex64,
    a: f64,
    b: f64,
    tol: f64,
) -> Complex64 {
    if a == b {
        return Complex64::default();
    }
    let pieces = 16;
    let width = (b - a) / pieces as f64;
    let mut total = Complex64::default();
    for i in 0..pieces {
        let lo = a + i as f64 * width;
        let hi = lo + width;
        let whole = simpson_slice(&mut f, lo, hi);
        total += adaptive_step(&mut f, lo, hi, whole, tol / pieces as f64, 40);
    }
    total
}

/// Composite Simpson with 2n panels, for smooth periodic integrands.
pub fn simpson_complex(mut f: impl FnMut(f64) -> Complex64, a: f64, b: f64, n: usize) -> Complex64 {
    let steps = 2 * n;
    let h = (b - a) / steps as f64;
    let mut acc = f(a) + f(b);
    for i in 1..steps {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * f(a + i as f64 * h);
    }
    acc * (h / 3.0)
}

/// Classical fourth-order Runge-Kutta for x' = A x + b u(t), sampling the
/// output y = c' x on the uniform instants grid (including t = 0), with
/// `substeps` RK4 steps between consecutive instants.
pub fn rk4_sampled_outputs(
    a: &DMatrix<f64>,
    b: &DVector<f64>,
    c: &DVector<f64>,
    x0: &DVector<f64>,
    u: impl Fn(f64) -> f64,
    instants: &[f64],
    substeps: usize,
) -> Vec<f64> {
    assert!(instants.len() >= 2);
    let gap = instants[1] - instants[0];
    let h = gap / substeps as f64;
    let deriv = |t: f64, x: &DVector<f64>| a * x + b * u(t);

    let mut x = x0.clone();
    let mut outputs = Vec::with_capacity(instants.len());
    outputs.push(c.dot(&x));
    for i in 1..instants.len() {
        let t_prev = instants[i - 1];
        for s in 0..substeps {
            let t = t_prev + s as f64 * h;
            let k1 = deriv(t, &x);
            let k2 = deriv(t + 0.5 * h, &(&x + 0.5 * h * &k1));
            let k3 = deriv(t + 0.5 * h, &(&x + 0.5 * h * &k2));
            let k4 = deriv(t + h, &(&x + h * &k3));
            x += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        }
        outputs.push(c.dot(&x));
    }
    outputs
}

/// Global minimum of ||Phi v - alpha||^2 + mu1 * ||v||_1 over real v, by
/// exhaustive enumeration of supports and sign patterns. On each candidate
/// support S with signs s, stationarity gives
/// `Phi_S' Phi_S v_S = Phi_S' alpha - (mu1/2) s`; the candidate counts only
/// if the solved signs agree with s. The true minimizer is sign-consistent
/// on its own support, so the sweep always visits it.
pub fn lasso_enumerate(phi: &DMatrix<f64>, alpha: &DVector<f64>, mu1: f64) -> (f64, DVector<f64>) {
    let n = phi.ncols();
    assert!(n <= 16, "enumeration is exponential; keep instances tiny");
    let mut best_obj = alpha.norm_squared();
    let mut best_v = DVector::<f64>::zeros(n);

    for support_mask in 1u32..(1 << n) {
        let support: Vec<usize> = (0..n).filter(|i| support_mask & (1 << i) != 0).collect();
        let s = support.len();
        let phi_s = phi.select_columns(support.iter());
        let gram = phi_s.tr_mul(&phi_s);
        let proj = phi_s.tr_mul(alpha);

        for sign_mask in 0u32..(1 << s) {
            let signs = DVector::<f64>::from_fn(s, |i, _| {
                if sign_mask & (1 << i) != 0 {
                    -1.0
                } else {
                    1.0
                }
            });
            let rhs = &proj - (mu1 / 2.0) * &signs;
            let Some(v_s) = gram.clone().lu().solve(&rhs) else { continue };
            if (0..s).any(|i| v_s[i] * signs[i] <= 0.0) {
                continue;
            }
            let mut v = DVector::<f64>::zeros(n);
            for (i, &idx) in support.iter().enumerate() {
                v[idx] = v_s[i];
            }
            let obj = (phi * &v - alpha).norm_squared() + mu1 * v.iter().map(|x| x.abs()).sum::<f64>();
            if obj < best_obj {
                best_obj = obj;
                best_v = v;
            }
        }
    }
    (best_obj, best_v)
}

/// Deterministic pseudo-random stream for oracle instances; a tiny xorshift
/// so oracle inputs do not depend on any crate the library itself uses.
pub struct TinyRng(pub u64);

impl TinyRng {
    pub fn next_u64(&mut self) -> u64 {
        let mut x = self.0.wrapping_add(0x9E37_79B9_7F4A_7C15);
        self.0 = x;
        x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        x ^ (x >> 31)
    }

    /// Uniform in [-1, 1).
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 / (1u64 << 52) as f64 - 1.0
    }
}
