//! Continuous-time stable LTI plant: state-space representation,
//! matrix-exponential machinery, kernel inner products, and output
//! simulation.
//!
//! The plant output under a band-limited input with coefficients `theta` is
//! `y(tau) = c'*exp(tau*A)*x0 + sum_m theta_m * <kappa(tau,.), psi_m>` where
//! `kappa(tau,t) = c'*exp((tau-t)*A)*b` for `0 <= t < tau` and `0` otherwise.
//! The inner products reduce to one matrix exponential of an augmented
//! `(nu+1) x (nu+1)` matrix per `(tau, omega)` pair.

use nalgebra::{ComplexField, DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::signals::{check_imag_residue, CoefVector, SignalSpace};

/// State-space plant `dx/dt = A x + b u`, `y = c' x`, started at `x(0) = x0`.
///
/// Construction rejects plants that are not strictly stable: every eigenvalue
/// of `A` must have real part below `-1e-12`.
#[derive(Debug, Clone, PartialEq)]
pub struct Plant {
    a: DMatrix<f64>,
    b: DVector<f64>,
    c: DVector<f64>,
    x0: DVector<f64>,
}

impl Plant {
    pub fn new(a: DMatrix<f64>, b: DVector<f64>, c: DVector<f64>, x0: DVector<f64>) -> Result<Self> {
        if !a.is_square() {
            return Err(Error::Dimension(format!(
                "dynamics matrix must be square, got {}x{}",
                a.nrows(),
                a.ncols()
            )));
        }
        let nu = a.nrows();
        if nu == 0 {
            return Err(Error::Dimension("state dimension must be positive".into()));
        }
        for (name, v) in [("b", &b), ("c", &c), ("x0", &x0)] {
            if v.len() != nu {
                return Err(Error::Dimension(format!(
                    "{name} has length {}, state dimension is {nu}",
                    v.len()
                )));
            }
        }
        if a.iter().chain(b.iter()).chain(c.iter()).chain(x0.iter()).any(|x| !x.is_finite()) {
            return Err(Error::Domain("plant data must be finite".into()));
        }
        for lambda in a.clone().complex_eigenvalues().iter() {
            if lambda.re >= -1e-12 {
                return Err(Error::Domain(format!(
                    "plant is not strictly stable: eigenvalue {lambda} has real part >= -1e-12"
                )));
            }
        }
        Ok(Self { a, b, c, x0 })
    }

    /// State dimension `nu`.
    pub fn order(&self) -> usize {
        self.a.nrows()
    }

    pub fn a(&self) -> &DMatrix<f64> {
        &self.a
    }

    pub fn b(&self) -> &DVector<f64> {
        &self.b
    }

    pub fn c(&self) -> &DVector<f64> {
        &self.c
    }

    pub fn x0(&self) -> &DVector<f64> {
        &self.x0
    }

    /// Same dynamics with a different initial state.
    pub fn with_initial_state(&self, x0: DVector<f64>) -> Result<Self> {
        Self::new(self.a.clone(), self.b.clone(), self.c.clone(), x0)
    }
}

/// Transfer function sample `value = c'*(sI - A)^{-1}*b`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransferEval {
    pub s: Complex64,
    pub value: Complex64,
}

impl TransferEval {
    pub fn evaluate(plant: &Plant, s: Complex64) -> Result<Self> {
        let nu = plant.order();
        let mut m = DMatrix::<Complex64>::zeros(nu, nu);
        for i in 0..nu {
            for j in 0..nu {
                m[(i, j)] = Complex64::new(-plant.a[(i, j)], 0.0);
            }
            m[(i, i)] += s;
        }
        let rhs = DVector::from_iterator(nu, plant.b.iter().map(|&x| Complex64::new(x, 0.0)));
        let sol = m
            .lu()
            .solve(&rhs)
            .ok_or_else(|| Error::Domain(format!("{s} is an eigenvalue of the dynamics matrix")))?;
        let value = plant.c.iter().zip(sol.iter()).map(|(&ci, zi)| ci * zi).sum();
        Ok(Self { s, value })
    }
}

// Degree-13 Pade numerator coefficients and the matching 1-norm threshold.
const PADE_B: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];
const PADE_THETA_13: f64 = 5.371920351148152;

/// Matrix exponential by scaling-and-squaring with a degree-13 Pade
/// approximant. Works for real and complex square matrices.
pub fn matrix_exponential<T>(m: &DMatrix<T>) -> Result<DMatrix<T>>
where
    T: ComplexField<RealField = f64>,
{
    if !m.is_square() {
        return Err(Error::Dimension(format!(
            "matrix exponential needs a square matrix, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    if m.iter().any(|x| !x.clone().modulus().is_finite()) {
        return Err(Error::Domain("matrix exponential needs finite entries".into()));
    }
    let n = m.nrows();
    let id = DMatrix::<T>::identity(n, n);
    if n == 0 {
        return Ok(id);
    }

    // 1-norm (max absolute column sum) picks the scaling power.
    let norm = m
        .column_iter()
        .map(|col| col.iter().map(|x| x.clone().modulus()).sum::<f64>())
        .fold(0.0, f64::max);
    let squarings =
        if norm > PADE_THETA_13 { (norm / PADE_THETA_13).log2().ceil() as i32 } else { 0 };

    let scale = T::from_real(0.5f64.powi(squarings));
    let a = m.map(|x| x * scale.clone());
    let a2 = &a * &a;
    let a4 = &a2 * &a2;
    let a6 = &a2 * &a4;

    let u_poly = &a6 * T::from_real(PADE_B[13]) + &a4 * T::from_real(PADE_B[11])
        + &a2 * T::from_real(PADE_B[9]);
    let u = &a
        * (&a6 * u_poly
            + &a6 * T::from_real(PADE_B[7])
            + &a4 * T::from_real(PADE_B[5])
            + &a2 * T::from_real(PADE_B[3])
            + &id * T::from_real(PADE_B[1]));
    let v_poly = &a6 * T::from_real(PADE_B[12]) + &a4 * T::from_real(PADE_B[10])
        + &a2 * T::from_real(PADE_B[8]);
    let v = &a6 * v_poly
        + &a6 * T::from_real(PADE_B[6])
        + &a4 * T::from_real(PADE_B[4])
        + &a2 * T::from_real(PADE_B[2])
        + &id * T::from_real(PADE_B[0]);

    let mut f = (&v - &u)
        .lu()
        .solve(&(&v + &u))
        .ok_or_else(|| Error::Internal("Pade denominator is singular".into()))?;
    for _ in 0..squarings {
        f = &f * &f;
    }
    Ok(f)
}

// [[A, b], [0, j*omega]]: its exponential's top-right block is the Van Loan
// integral int_0^tau exp((tau-s)A) b exp(j*omega*s) ds.
fn augmented_matrix(plant: &Plant, omega: f64) -> DMatrix<Complex64> {
    let nu = plant.order();
    let mut aug = DMatrix::<Complex64>::zeros(nu + 1, nu + 1);
    for i in 0..nu {
        for j in 0..nu {
            aug[(i, j)] = Complex64::new(plant.a[(i, j)], 0.0);
        }
        aug[(i, nu)] = Complex64::new(plant.b[i], 0.0);
    }
    aug[(nu, nu)] = Complex64::new(0.0, omega);
    aug
}

fn kernel_entry(plant: &Plant, e: &DMatrix<Complex64>, root_t: f64) -> Complex64 {
    let nu = plant.order();
    let mut acc = Complex64::default();
    for i in 0..nu {
        acc += plant.c[i] * e[(i, nu)];
    }
    acc / root_t
}

/// Pairing `int_0^tau kappa(tau, t) psi_m(t) dt` of the output kernel with
/// the basis element at angular frequency `omega`, over a horizon of length
/// `horizon`.
///
/// Evaluates `(1/sqrt(horizon)) * [c', 0] * exp(tau*[[A, b],[0, j*omega]]) * [0; 1]`.
/// The basis enters unconjugated: the kernel is real, and this orientation
/// is the one that makes `G * theta` the forced response to the synthesized
/// input `u = sum_m theta_m psi_m`.
pub fn kernel_basis_inner_product(
    plant: &Plant,
    tau: f64,
    omega: f64,
    horizon: f64,
) -> Result<Complex64> {
    if !(0.0..=horizon).contains(&tau) {
        return Err(Error::Domain(format!("tau = {tau} outside [0, {horizon}]")));
    }
    let aug = augmented_matrix(plant, omega);
    let e = matrix_exponential(&aug.map(|z| z * tau))?;
    Ok(kernel_entry(plant, &e, horizon.sqrt()))
}

// Gap of a uniform, increasing grid, or None. The tolerance is tight because
// the stepping evaluation below is only exact for truly uniform grids.
fn uniform_gap(taus: &[f64]) -> Option<f64> {
    if taus.len() < 2 {
        return None;
    }
    let first = taus[0];
    let last = taus[taus.len() - 1];
    let gap = (last - first) / (taus.len() - 1) as f64;
    if !(gap > 0.0) {
        return None;
    }
    let tol = 1e-12 * last.abs().max(1.0);
    taus.iter()
        .enumerate()
        .all(|(i, &t)| (t - (first + gap * i as f64)).abs() <= tol)
        .then_some(gap)
}

/// Matrix of kernel inner products: entry `(row, col)` is
/// `<kappa(taus[row],.), psi_m>` with `m = col - M`.
///
/// Uniform grids (the sampling grid, output plot grids) take a fast path:
/// `exp(t_n*Aug)` is a running product of `exp(gap*Aug)`, one small matrix
/// exponential per frequency instead of one per entry.
pub fn kernel_coefficient_matrix(
    plant: &Plant,
    space: &SignalSpace,
    taus: &[f64],
) -> Result<DMatrix<Complex64>> {
    let horizon = space.horizon();
    for &tau in taus {
        if !(0.0..=horizon).contains(&tau) {
            return Err(Error::Domain(format!("tau = {tau} outside [0, {horizon}]")));
        }
    }
    let nu = plant.order();
    let root_t = horizon.sqrt();
    let mut k = DMatrix::<Complex64>::zeros(taus.len(), space.len());
    let gap = uniform_gap(taus);

    for (col, m) in space.frequencies().enumerate() {
        let aug = augmented_matrix(plant, space.omega(m));
        match gap {
            Some(gap) => {
                let step = matrix_exponential(&aug.map(|z| z * gap))?;
                let mut p = if taus[0] == 0.0 {
                    DMatrix::identity(nu + 1, nu + 1)
                } else {
                    matrix_exponential(&aug.map(|z| z * taus[0]))?
                };
                for row in 0..taus.len() {
                    k[(row, col)] = kernel_entry(plant, &p, root_t);
                    if row + 1 < taus.len() {
                        p *= &step;
                    }
                }
            }
            None => {
                for (row, &tau) in taus.iter().enumerate() {
                    let e = matrix_exponential(&aug.map(|z| z * tau))?;
                    k[(row, col)] = kernel_entry(plant, &e, root_t);
                }
            }
        }
    }
    Ok(k)
}

/// Rows `c'*exp(tau*A)` for each grid time; the transient output is this
/// matrix times `x0`. Split out so Monte-Carlo runs with per-trial initial
/// states reuse one evaluation.
pub fn transient_rows(plant: &Plant, taus: &[f64]) -> Result<DMatrix<f64>> {
    for &tau in taus {
        if tau < 0.0 {
            return Err(Error::Domain(format!("tau = {tau} is negative")));
        }
    }
    let nu = plant.order();
    let mut rows = DMatrix::<f64>::zeros(taus.len(), nu);
    match uniform_gap(taus) {
        Some(gap) => {
            let step = matrix_exponential(&(plant.a() * gap))?;
            let p0 = if taus[0] == 0.0 {
                DMatrix::identity(nu, nu)
            } else {
                matrix_exponential(&(plant.a() * taus[0]))?
            };
            let mut w = plant.c().transpose() * p0;
            for i in 0..taus.len() {
                rows.row_mut(i).copy_from(&w);
                if i + 1 < taus.len() {
                    w *= &step;
                }
            }
        }
        None => {
            for (i, &tau) in taus.iter().enumerate() {
                let e = matrix_exponential(&(plant.a() * tau))?;
                rows.row_mut(i).copy_from(&(plant.c().transpose() * e));
            }
        }
    }
    Ok(rows)
}

/// Plant output at the grid times: transient `c'*exp(tau*A)*x0` plus the
/// forced response `sum_m theta_m * <kappa(tau,.), psi_m>`.
///
/// The forced sum is complex; its imaginary residue must stay below
/// `1e-6 * (1 + |real part|)` or the coefficients do not describe a real
/// input signal.
pub fn simulate_output(plant: &Plant, theta: &CoefVector, taus: &[f64]) -> Result<DVector<f64>> {
    let space = theta.space();
    let kernel = kernel_coefficient_matrix(plant, &space, taus)?;
    let forced = kernel * theta.entries();
    let transient = transient_rows(plant, taus)? * plant.x0();
    let mut y = DVector::<f64>::zeros(taus.len());
    for i in 0..taus.len() {
        y[i] = transient[i] + check_imag_residue(forced[i], "simulate_output")?;
    }
    Ok(y)
}

/// Fourier coefficients of the steady-state (periodic) output: entry `m` is
/// `P(j*omega_m) * theta_m` with `P` the plant transfer function. Zero input
/// entries stay exactly zero, so output sparsity never exceeds input
/// sparsity.
pub fn steady_state_output_coefs(plant: &Plant, theta: &CoefVector) -> Result<CoefVector> {
    let space = theta.space();
    let mut out = CoefVector::zeros(space);
    for m in space.frequencies() {
        let v = theta.get(m);
        if v != Complex64::default() {
            let p = TransferEval::evaluate(plant, Complex64::new(0.0, space.omega(m)))?;
            out.set(m, p.value * v);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use nalgebra::dmatrix;

    // Second-order plant with poles at -0.5 and -1, used throughout the
    // test suite.
    pub(crate) fn test_plant() -> Plant {
        Plant::new(
            dmatrix![0.0, 1.0; -0.5, -1.5],
            DVector::from_vec(vec![0.0, 1.0]),
            DVector::from_vec(vec![-0.5, 1.0]),
            DVector::zeros(2),
        )
        .unwrap()
    }

    fn taylor_expm(m: &DMatrix<Complex64>, terms: usize) -> DMatrix<Complex64> {
        let n = m.nrows();
        let mut sum = DMatrix::<Complex64>::identity(n, n);
        let mut power = DMatrix::<Complex64>::identity(n, n);
        for k in 1..=terms {
            power = (&power * m).map(|z| z / k as f64);
            sum += &power;
        }
        sum
    }

    #[test]
    fn expm_zero_is_identity() {
        let z = DMatrix::<f64>::zeros(4, 4);
        assert_eq!(matrix_exponential(&z).unwrap(), DMatrix::identity(4, 4));
    }

    #[test]
    fn expm_diagonal() {
        let d = dmatrix![0.3, 0.0; 0.0, -7.0];
        let e = matrix_exponential(&d).unwrap();
        assert_abs_diff_eq!(e[(0, 0)], 0.3f64.exp(), epsilon = 1e-14);
        assert_abs_diff_eq!(e[(1, 1)], (-7.0f64).exp(), epsilon = 1e-14);
        assert_eq!(e[(0, 1)], 0.0);
        assert_eq!(e[(1, 0)], 0.0);
    }

    #[test]
    fn expm_matches_taylor_oracle() {
        let plant = test_plant();
        let m = (plant.a() * std::f64::consts::FRAC_PI_2).map(|x| Complex64::new(x, 0.0));
        let pade = matrix_exponential(&m).unwrap();
        let taylor = taylor_expm(&m, 50);
        for (p, t) in pade.iter().zip(taylor.iter()) {
            assert_abs_diff_eq!(p.re, t.re, epsilon = 1e-10);
            assert_abs_diff_eq!(p.im, t.im, epsilon = 1e-10);
        }
    }

    #[test]
    fn expm_complex_rotation() {
        // exp(j*phi) on a 1x1: lands on the unit circle.
        let phi = 2.3;
        let m = DMatrix::from_element(1, 1, Complex64::new(0.0, phi));
        let e = matrix_exponential(&m).unwrap();
        assert_abs_diff_eq!(e[(0, 0)].re, phi.cos(), epsilon = 1e-14);
        assert_abs_diff_eq!(e[(0, 0)].im, phi.sin(), epsilon = 1e-14);
    }

    #[test]
    fn expm_large_norm_scaling() {
        // Norm far above the Pade threshold exercises the squaring phase.
        let m = dmatrix![-40.0, 12.0; 3.0, -55.0].map(|x| Complex64::new(x, 0.0));
        let pade = matrix_exponential(&m).unwrap();
        // Halving trick: exp(M) = exp(M/2)^2 with the half computed by Taylor
        // at a norm where 80 terms are plenty.
        let half = taylor_expm(&m.map(|z| z / 16.0), 80);
        let oracle = &half * &half * &half * &half;
        let oracle = &oracle * &oracle * &oracle * &oracle;
        for (p, t) in pade.iter().zip(oracle.iter()) {
            assert_abs_diff_eq!(p.re, t.re, epsilon = 1e-12);
        }
    }

    #[test]
    fn expm_rejects_bad_input() {
        let rect = DMatrix::<f64>::zeros(2, 3);
        assert!(matches!(matrix_exponential(&rect), Err(Error::Dimension(_))));
        let nan = DMatrix::from_element(1, 1, f64::NAN);
        assert!(matches!(matrix_exponential(&nan), Err(Error::Domain(_))));
    }

    #[test]
    fn plant_rejects_unstable_and_marginal() {
        let b = DVector::from_vec(vec![1.0]);
        assert!(Plant::new(dmatrix![1.0], b.clone(), b.clone(), b.clone()).is_err());
        assert!(Plant::new(dmatrix![0.0], b.clone(), b.clone(), b.clone()).is_err());
        assert!(Plant::new(dmatrix![-1.0], b.clone(), b.clone(), b.clone()).is_ok());
        // Oscillator with no damping: eigenvalues on the imaginary axis.
        let osc = dmatrix![0.0, 1.0; -1.0, 0.0];
        let v2 = DVector::zeros(2);
        assert!(Plant::new(osc, v2.clone(), v2.clone(), v2).is_err());
    }

    #[test]
    fn plant_rejects_dimension_mismatch() {
        let a = dmatrix![-1.0, 0.0; 0.0, -2.0];
        let good = DVector::from_vec(vec![1.0, 1.0]);
        let bad = DVector::from_vec(vec![1.0]);
        assert!(Plant::new(a, good.clone(), bad, good).is_err());
    }

    #[test]
    fn transfer_matches_rational_form() {
        // This realization has P(s) = (s - 0.5)/((s + 0.5)(s + 1)).
        let plant = test_plant();
        for s in [Complex64::new(0.0, 0.0), Complex64::new(0.0, 20.0), Complex64::new(1.0, -3.0)] {
            let eval = TransferEval::evaluate(&plant, s).unwrap();
            let expect = (s - 0.5) / ((s + 0.5) * (s + 1.0));
            assert_abs_diff_eq!(eval.value.re, expect.re, epsilon = 1e-12);
            assert_abs_diff_eq!(eval.value.im, expect.im, epsilon = 1e-12);
        }
    }

    #[test]
    fn kernel_inner_product_at_zero_tau() {
        let plant = test_plant();
        let v = kernel_basis_inner_product(&plant, 0.0, 20.0, 2.0 * std::f64::consts::PI).unwrap();
        assert_eq!(v, Complex64::default());
    }

    #[test]
    fn kernel_first_order_closed_form() {
        // x' = -a x + u, y = x: the pairing with psi_m has the closed form
        // (exp(j*w*tau) - exp(-a*tau)) / ((a + j*w) * sqrt(T)). The sign of
        // the imaginary part pins the basis orientation: G*theta must be the
        // response to u = sum theta_m psi_m, not to its time reversal.
        let a = 0.7;
        let plant = Plant::new(
            dmatrix![-a],
            DVector::from_vec(vec![1.0]),
            DVector::from_vec(vec![1.0]),
            DVector::zeros(1),
        )
        .unwrap();
        let horizon = 5.0;
        for (tau, omega) in [(0.9, 2.0), (2.5, -4.0), (horizon, 11.0)] {
            let got = kernel_basis_inner_product(&plant, tau, omega, horizon).unwrap();
            let jw = Complex64::new(0.0, omega);
            let expect = ((jw * tau).exp() - (-a * tau).exp())
                / ((Complex64::new(a, 0.0) + jw) * horizon.sqrt());
            assert_abs_diff_eq!((got - expect).norm(), 0.0, epsilon = 1e-13);
        }
    }

    #[test]
    fn kernel_inner_product_conjugate_symmetry() {
        let plant = test_plant();
        let horizon = 2.0 * std::f64::consts::PI;
        for (tau, omega) in [(1.0, 7.0), (3.14, 20.0), (horizon, 100.0)] {
            let plus = kernel_basis_inner_product(&plant, tau, omega, horizon).unwrap();
            let minus = kernel_basis_inner_product(&plant, tau, -omega, horizon).unwrap();
            assert_abs_diff_eq!(minus.re, plus.re, epsilon = 1e-13);
            assert_abs_diff_eq!(minus.im, -plus.im, epsilon = 1e-13);
        }
    }

    #[test]
    fn kernel_inner_product_rejects_out_of_range() {
        let plant = test_plant();
        assert!(kernel_basis_inner_product(&plant, -0.1, 0.0, 1.0).is_err());
        assert!(kernel_basis_inner_product(&plant, 1.1, 0.0, 1.0).is_err());
    }

    #[test]
    fn kernel_matrix_fast_path_matches_direct() {
        let plant = test_plant();
        let space = SignalSpace::new(2.0 * std::f64::consts::PI, 6).unwrap();
        let taus = space.sample_instants();
        let k = kernel_coefficient_matrix(&plant, &space, &taus).unwrap();
        assert_eq!(k.nrows(), 13);
        assert_eq!(k.ncols(), 13);
        // First row: tau = 0 kernel vanishes identically.
        assert!(k.row(0).iter().all(|z| *z == Complex64::default()));
        for (row, &tau) in taus.iter().enumerate() {
            for (col, m) in space.frequencies().enumerate() {
                let direct =
                    kernel_basis_inner_product(&plant, tau, space.omega(m), space.horizon())
                        .unwrap();
                assert_abs_diff_eq!(k[(row, col)].re, direct.re, epsilon = 1e-12);
                assert_abs_diff_eq!(k[(row, col)].im, direct.im, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn kernel_matrix_nonuniform_grid() {
        let plant = test_plant();
        let space = SignalSpace::new(2.0 * std::f64::consts::PI, 3).unwrap();
        let taus = [0.0, 0.5, 0.7, 3.0];
        let k = kernel_coefficient_matrix(&plant, &space, &taus).unwrap();
        for (row, &tau) in taus.iter().enumerate() {
            for (col, m) in space.frequencies().enumerate() {
                let direct =
                    kernel_basis_inner_product(&plant, tau, space.omega(m), space.horizon())
                        .unwrap();
                assert_abs_diff_eq!((k[(row, col)] - direct).norm(), 0.0, epsilon = 1e-13);
            }
        }
    }

    #[test]
    fn simulate_zero_everything() {
        let plant = test_plant();
        let space = SignalSpace::new(2.0 * std::f64::consts::PI, 4).unwrap();
        let theta = CoefVector::zeros(space);
        let y = simulate_output(&plant, &theta, &space.sample_instants()).unwrap();
        assert!(y.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn simulate_transient_only_matches_closed_form() {
        // Diagonal dynamics: y = c1*exp(-tau)*x1 + c2*exp(-2tau)*x2.
        let plant = Plant::new(
            dmatrix![-1.0, 0.0; 0.0, -2.0],
            DVector::from_vec(vec![1.0, 1.0]),
            DVector::from_vec(vec![2.0, -1.0]),
            DVector::from_vec(vec![0.3, 0.7]),
        )
        .unwrap();
        let space = SignalSpace::new(4.0, 3).unwrap();
        let theta = CoefVector::zeros(space);
        let taus = space.sample_instants();
        let y = simulate_output(&plant, &theta, &taus).unwrap();
        for (i, &tau) in taus.iter().enumerate() {
            let expect = 2.0 * (-tau).exp() * 0.3 - (-2.0 * tau).exp() * 0.7;
            assert_abs_diff_eq!(y[i], expect, epsilon = 1e-12);
        }
    }

    #[test]
    fn steady_state_dc_gain() {
        let plant = test_plant();
        let space = SignalSpace::new(2.0 * std::f64::consts::PI, 2).unwrap();
        let mut theta = CoefVector::zeros(space);
        theta.set(0, Complex64::new(3.0, 0.0));
        let out = steady_state_output_coefs(&plant, &theta).unwrap();
        // DC gain of (s-0.5)/((s+0.5)(s+1)) is -1.
        assert_abs_diff_eq!(out.get(0).re, -3.0, epsilon = 1e-12);
        assert_eq!(out.cardinality(1e-12), 1);
    }

    #[test]
    fn steady_state_single_tone() {
        let plant = test_plant();
        let space = SignalSpace::new(2.0 * std::f64::consts::PI, 100).unwrap();
        let mut theta = CoefVector::zeros(space);
        theta.set(20, Complex64::new(1.0, 0.0));
        let out = steady_state_output_coefs(&plant, &theta).unwrap();
        let s = Complex64::new(0.0, 20.0);
        let expect = (s - 0.5) / ((s + 0.5) * (s + 1.0));
        assert_abs_diff_eq!((out.get(20) - expect).norm(), 0.0, epsilon = 1e-12);
        assert_eq!(out.cardinality(1e-12), 1);
    }

    #[test]
    fn steady_state_preserves_sparsity() {
        let plant = test_plant();
        let space = SignalSpace::new(2.0 * std::f64::consts::PI, 10).unwrap();
        let mut theta = CoefVector::zeros(space);
        theta.set(-3, Complex64::new(0.0, 1.5));
        theta.set(5, Complex64::new(2.0, -1.0));
        let out = steady_state_output_coefs(&plant, &theta).unwrap();
        assert!(out.cardinality(0.0) <= theta.cardinality(0.0));
        assert_eq!(out.support(1e-12), vec![-3, 5]);
    }
}
