//! Assembly of the discrete least-squares data: Gram matrix `G`, transient
//! matrix `H`, residual target `beta`, random row decimation, and the
//! compressed operator `Phi` with target `alpha`.
//!
//! The decimation is never materialized as a 0/1 matrix; a sampling plan
//! stores the selected row indices and compression is plain row selection.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lti::{kernel_coefficient_matrix, transient_rows, Plant};
use crate::signals::SignalSpace;

/// A drawn sampling pattern: `k` of the `n` grid instants, stored as a
/// strictly increasing list of 1-based indices.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SamplingPlan {
    k: usize,
    seed: u64,
    indices: Vec<usize>,
}

impl SamplingPlan {
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Selected instants as 1-based indices into the sampling grid,
    /// ascending.
    pub fn indices(&self) -> &[usize] {
        &self.indices
    }
}

/// Draws a uniform random `k`-subset of the `n` grid instants, without
/// replacement, sorted ascending. Deterministic in `seed`.
pub fn draw_plan(space: &SignalSpace, k: usize, seed: u64) -> Result<SamplingPlan> {
    let n = space.len();
    if k == 0 || k > n {
        return Err(Error::Domain(format!("sample count {k} outside 1..={n}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pool: Vec<usize> = (1..=n).collect();
    // Partial Fisher-Yates: after k swaps the prefix is a uniform k-subset.
    for i in 0..k {
        let j = rng.random_range(i..n);
        pool.swap(i, j);
    }
    let mut indices = pool[..k].to_vec();
    indices.sort_unstable();
    Ok(SamplingPlan { k, seed, indices })
}

/// Builds the full-grid data matrices: `G[n][m] = <kappa(t_n,.), psi_m>` and
/// `H[n] = c'*exp(t_n*A)`, so the sampled output is `G*theta + H*x0`.
pub fn build_gram(plant: &Plant, space: &SignalSpace) -> Result<(DMatrix<Complex64>, DMatrix<f64>)> {
    let taus = space.sample_instants();
    let g = kernel_coefficient_matrix(plant, space, &taus)?;
    let h = transient_rows(plant, &taus)?;
    Ok((g, h))
}

/// Row selection: `Phi` keeps the plan's rows of `G`, `alpha` the plan's
/// entries of `beta` (promoted to complex for the solver).
pub fn compress(
    g: &DMatrix<Complex64>,
    beta: &DVector<f64>,
    plan: &SamplingPlan,
) -> Result<(DMatrix<Complex64>, DVector<Complex64>)> {
    if g.nrows() != beta.len() {
        return Err(Error::Dimension(format!(
            "G has {} rows but beta has {} entries",
            g.nrows(),
            beta.len()
        )));
    }
    for &idx in plan.indices() {
        if idx < 1 || idx > g.nrows() {
            return Err(Error::Internal(format!(
                "plan index {idx} outside 1..={}; plan invariant violated",
                g.nrows()
            )));
        }
    }
    let k = plan.k();
    let mut phi = DMatrix::<Complex64>::zeros(k, g.ncols());
    let mut alpha = DVector::<Complex64>::zeros(k);
    for (row, &idx) in plan.indices().iter().enumerate() {
        phi.row_mut(row).copy_from(&g.row(idx - 1));
        alpha[row] = Complex64::new(beta[idx - 1], 0.0);
    }
    Ok((phi, alpha))
}

/// The assembled least-squares data for one plant/reference/plan triple.
#[derive(Debug, Clone, PartialEq)]
pub struct SensingSystem {
    g: DMatrix<Complex64>,
    h: DMatrix<f64>,
    r_vec: DVector<f64>,
    beta: DVector<f64>,
    plan: SamplingPlan,
    phi: DMatrix<Complex64>,
    alpha: DVector<Complex64>,
}

impl SensingSystem {
    /// Builds everything from scratch: `G`, `H`, `beta = r - H*x0`, and the
    /// compressed pair.
    pub fn assemble(
        plant: &Plant,
        space: &SignalSpace,
        r_vec: DVector<f64>,
        plan: SamplingPlan,
    ) -> Result<Self> {
        let (g, h) = build_gram(plant, space)?;
        Self::from_gram(g, h, r_vec, plant.x0(), plan)
    }

    /// Assembles from prebuilt `G` and `H`; Monte-Carlo runs share one
    /// `build_gram` across trials.
    pub fn from_gram(
        g: DMatrix<Complex64>,
        h: DMatrix<f64>,
        r_vec: DVector<f64>,
        x0: &DVector<f64>,
        plan: SamplingPlan,
    ) -> Result<Self> {
        let n = g.nrows();
        if g.ncols() != n {
            return Err(Error::Dimension(format!("G must be square, got {}x{}", n, g.ncols())));
        }
        if h.nrows() != n || r_vec.len() != n {
            return Err(Error::Dimension(format!(
                "H rows {} and r length {} must equal N = {n}",
                h.nrows(),
                r_vec.len()
            )));
        }
        if h.ncols() != x0.len() {
            return Err(Error::Dimension(format!(
                "H has {} columns but x0 has length {}",
                h.ncols(),
                x0.len()
            )));
        }
        let beta = &r_vec - &h * x0;
        let (phi, alpha) = compress(&g, &beta, &plan)?;
        Ok(Self { g, h, r_vec, beta, plan, phi, alpha })
    }

    pub fn g(&self) -> &DMatrix<Complex64> {
        &self.g
    }

    pub fn h(&self) -> &DMatrix<f64> {
        &self.h
    }

    pub fn r_vec(&self) -> &DVector<f64> {
        &self.r_vec
    }

    pub fn beta(&self) -> &DVector<f64> {
        &self.beta
    }

    pub fn plan(&self) -> &SamplingPlan {
        &self.plan
    }

    pub fn phi(&self) -> &DMatrix<Complex64> {
        &self.phi
    }

    pub fn alpha(&self) -> &DVector<Complex64> {
        &self.alpha
    }
}

/// Advisory sample count `ceil(C * S * (ln N)^4)` clamped to `[1, N]`; the
/// constant `C` is caller-supplied.
pub fn advise_sample_count(s_theta: usize, n: usize, c: f64) -> Result<usize> {
    if s_theta == 0 {
        return Err(Error::Domain("sparsity level must be at least 1".into()));
    }
    if n < 2 {
        return Err(Error::Domain("grid size must be at least 2".into()));
    }
    if !(c > 0.0) {
        return Err(Error::Domain(format!("constant must be positive, got {c}")));
    }
    let raw = (c * s_theta as f64 * (n as f64).ln().powi(4)).ceil();
    Ok((raw as usize).clamp(1, n))
}
