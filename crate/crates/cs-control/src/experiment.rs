//! Experiment harness: configuration ingestion, Monte-Carlo orchestration
//! over random sampling patterns, baseline comparison, and CSV/JSON output.
//!
//! A configuration describes one plant/reference pair. Each trial draws a
//! fresh sampling pattern (and, when configured, a fresh initial state),
//! solves the full-data ridge design, the compressed `l1`-`l2` design, and
//! the equal-cardinality truncated-ridge baseline, then records tracking
//! error traces on a uniform output grid. Trial seeds are `base + index`,
//! and aggregation is an ordered reduction, so results are byte-reproducible
//! regardless of worker count.

use std::fs;
use std::path::{Path, PathBuf};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::lti::{kernel_coefficient_matrix, transient_rows, Plant};
use crate::rip::{
    evaluate_bounds, rip_constant_exact, rip_constant_monte_carlo, BoundReport, RipReport,
};
use crate::sensing::{build_gram, compress, draw_plan, SamplingPlan, SensingSystem};
use crate::signals::{
    check_imag_residue, sample_reference, CoefVector, ReferenceSpec, SignalSpace,
    DEFAULT_CARDINALITY_ABS_TOL,
};
use crate::solvers::{solve_l1l2_fista, solve_l2, truncate_top_s, RidgeSolver, SolverConfig};

// Distinct seed streams per role, derived from the trial seed.
const X0_SEED_SALT: u64 = 0x9E37_79B9_7F4A_7C15;
const RIP_SEED_SALT: u64 = 0xBF58_476D_1CE4_E5B9;

/// Ridge weight standing in for the unregularized least-squares solution;
/// the data matrix has a structurally zero first row, so a vanishing penalty
/// is the pseudo-inverse surrogate.
pub const IDEAL_RIDGE_MU: f64 = 1e-12;

/// How the initial state is chosen per trial.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum X0Mode {
    /// Use the configured vector for every trial.
    Fixed,
    /// Draw `x0` from the standard normal, independently per trial.
    RandomNormal,
}

/// Which estimator a `[rip]` or `[bounds]` section asks for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RipMethodChoice {
    #[default]
    Exact,
    MonteCarlo,
}

fn default_mc_trials() -> usize {
    2000
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RipSection {
    /// Sparsity level the isometry constant is computed for.
    pub l: usize,
    #[serde(default)]
    pub method: RipMethodChoice,
    #[serde(default = "default_mc_trials")]
    pub trials: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundsSection {
    /// Sparsity level `S` the ideal vector is truncated to; the isometry
    /// constant is computed at `2S`.
    pub s: usize,
    #[serde(default)]
    pub method: RipMethodChoice,
    #[serde(default = "default_mc_trials")]
    pub trials: usize,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum X0Spec {
    Fixed(Vec<f64>),
    Mode(String),
}

#[derive(Deserialize)]
struct RawPlant {
    a: Vec<Vec<f64>>,
    b: Vec<f64>,
    c: Vec<f64>,
    x0: X0Spec,
}

#[derive(Deserialize)]
struct RawSpace {
    horizon: f64,
    band: usize,
}

#[derive(Deserialize, Default)]
struct RawReference {
    #[serde(default)]
    terms: Vec<crate::signals::ReferenceTerm>,
}

#[derive(Deserialize)]
struct RawSampling {
    k: usize,
}

fn default_grid_points() -> usize {
    1000
}

#[derive(Deserialize)]
struct RawExperiment {
    trials: usize,
    seed: u64,
    #[serde(default = "default_grid_points")]
    grid_points: usize,
}

#[derive(Deserialize)]
struct RawConfig {
    plant: RawPlant,
    space: RawSpace,
    #[serde(default)]
    reference: RawReference,
    sampling: RawSampling,
    #[serde(default)]
    solver: SolverConfig,
    experiment: RawExperiment,
    rip: Option<RipSection>,
    bounds: Option<BoundsSection>,
}

/// Validated experiment description; every field has passed its module's
/// invariants before any trial runs.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub plant: Plant,
    pub x0_mode: X0Mode,
    pub space: SignalSpace,
    pub reference: ReferenceSpec,
    pub k: usize,
    pub solver: SolverConfig,
    pub trials: usize,
    pub seed: u64,
    pub grid_points: usize,
    pub rip: Option<RipSection>,
    pub bounds: Option<BoundsSection>,
}

impl ExperimentConfig {
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        Self::from_toml_str(&text)
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let raw: RawConfig =
            toml::from_str(text).map_err(|e| Error::Config(format!("config parse: {e}")))?;

        let rows = raw.plant.a.len();
        if rows == 0 || raw.plant.a.iter().any(|r| r.len() != rows) {
            return Err(Error::Config(format!(
                "plant.a must be a square row-major matrix, got {rows} rows"
            )));
        }
        let a = DMatrix::from_row_iterator(rows, rows, raw.plant.a.iter().flatten().cloned());
        let b = DVector::from_vec(raw.plant.b);
        let c = DVector::from_vec(raw.plant.c);
        let (x0, x0_mode) = match raw.plant.x0 {
            X0Spec::Fixed(v) => (DVector::from_vec(v), X0Mode::Fixed),
            X0Spec::Mode(s) if s == "random-normal" => {
                (DVector::zeros(rows), X0Mode::RandomNormal)
            }
            X0Spec::Mode(s) => {
                return Err(Error::Config(format!(
                    "plant.x0 must be an array or \"random-normal\", got {s:?}"
                )))
            }
        };
        let plant = Plant::new(a, b, c, x0)?;
        let space = SignalSpace::new(raw.space.horizon, raw.space.band)?;
        let reference = ReferenceSpec::new(raw.reference.terms);
        reference.validate(&space)?;
        if raw.sampling.k == 0 || raw.sampling.k > space.len() {
            return Err(Error::Config(format!(
                "sampling.k = {} outside 1..={}",
                raw.sampling.k,
                space.len()
            )));
        }
        raw.solver.validate()?;
        if raw.experiment.trials == 0 {
            return Err(Error::Config("experiment.trials must be at least 1".into()));
        }
        if raw.experiment.grid_points < 2 {
            return Err(Error::Config("experiment.grid_points must be at least 2".into()));
        }
        if let Some(rip) = &raw.rip {
            if rip.l == 0 || rip.trials == 0 {
                return Err(Error::Config("rip.l and rip.trials must be at least 1".into()));
            }
        }
        if let Some(bounds) = &raw.bounds {
            if bounds.s == 0 || bounds.trials == 0 {
                return Err(Error::Config("bounds.s and bounds.trials must be at least 1".into()));
            }
        }
        Ok(Self {
            plant,
            x0_mode,
            space,
            reference,
            k: raw.sampling.k,
            solver: raw.solver,
            trials: raw.experiment.trials,
            seed: raw.experiment.seed,
            grid_points: raw.experiment.grid_points,
            rip: raw.rip,
            bounds: raw.bounds,
        })
    }

    /// Command-line overrides applied after file parsing.
    pub fn with_overrides(mut self, seed: Option<u64>, trials: Option<usize>) -> Result<Self> {
        if let Some(seed) = seed {
            self.seed = seed;
        }
        if let Some(trials) = trials {
            if trials == 0 {
                return Err(Error::Config("trial count must be at least 1".into()));
            }
            self.trials = trials;
        }
        Ok(self)
    }
}

/// Everything that is shared across trials, built once: the data matrices,
/// the ridge factorization, the output grid, and the reference traces.
pub struct ExperimentContext {
    config: ExperimentConfig,
    r_samples: DVector<f64>,
    g: DMatrix<Complex64>,
    h: DMatrix<f64>,
    ridge: RidgeSolver,
    grid: Vec<f64>,
    r_grid: DVector<f64>,
    kernel_grid: DMatrix<Complex64>,
    transient_grid: DMatrix<f64>,
}

impl ExperimentContext {
    pub fn new(config: ExperimentConfig) -> Result<Self> {
        let space = config.space;
        let r_samples = sample_reference(&config.reference, &space)?;
        let (g, h) = build_gram(&config.plant, &space)?;
        let ridge = RidgeSolver::new(&g, space, config.solver.mu2)?;
        let grid: Vec<f64> = (0..config.grid_points)
            .map(|i| space.horizon() * i as f64 / (config.grid_points - 1) as f64)
            .collect();
        let r_grid = DVector::from_iterator(
            grid.len(),
            grid.iter().map(|&t| config.reference.evaluate(&space, t)),
        );
        let kernel_grid = kernel_coefficient_matrix(&config.plant, &space, &grid)?;
        let transient_grid = transient_rows(&config.plant, &grid)?;
        Ok(Self { config, r_samples, g, h, ridge, grid, r_grid, kernel_grid, transient_grid })
    }

    pub fn config(&self) -> &ExperimentConfig {
        &self.config
    }

    pub fn g(&self) -> &DMatrix<Complex64> {
        &self.g
    }

    pub fn h(&self) -> &DMatrix<f64> {
        &self.h
    }

    pub fn r_samples(&self) -> &DVector<f64> {
        &self.r_samples
    }

    pub fn ridge(&self) -> &RidgeSolver {
        &self.ridge
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn r_grid(&self) -> &DVector<f64> {
        &self.r_grid
    }

    pub fn trial_seed(&self, trial: usize) -> u64 {
        self.config.seed.wrapping_add(trial as u64)
    }

    /// Initial state for a trial: the configured vector, or a per-trial
    /// standard-normal draw on its own seed stream.
    pub fn trial_x0(&self, trial: usize) -> DVector<f64> {
        match self.config.x0_mode {
            X0Mode::Fixed => self.config.plant.x0().clone(),
            X0Mode::RandomNormal => {
                let mut rng = ChaCha8Rng::seed_from_u64(self.trial_seed(trial) ^ X0_SEED_SALT);
                DVector::from_fn(self.config.plant.order(), |_, _| {
                    StandardNormal.sample(&mut rng)
                })
            }
        }
    }

    /// Sampled tracking target `beta = r - H*x0`.
    pub fn beta_for(&self, x0: &DVector<f64>) -> DVector<f64> {
        &self.r_samples - &self.h * x0
    }

    /// Output and absolute-error traces on the output grid for one design.
    /// The coefficient vector must be conjugate-symmetric up to solver
    /// tolerance; a larger imaginary residue is an internal error.
    pub fn output_traces(
        &self,
        theta: &CoefVector,
        x0: &DVector<f64>,
    ) -> Result<(DVector<f64>, DVector<f64>)> {
        let forced = &self.kernel_grid * theta.entries();
        let transient = &self.transient_grid * x0;
        let mut y = DVector::<f64>::zeros(self.grid.len());
        for i in 0..self.grid.len() {
            y[i] = transient[i] + check_imag_residue(forced[i], "output trace")?;
        }
        let err = (&self.r_grid - &y).abs();
        Ok((y, err))
    }

    /// Traces for the truncated baseline. A cardinality budget that ends
    /// inside a conjugate pair keeps one half only, so the truncated control
    /// is not exactly real; that is a property of the baseline, not a bug.
    /// The plotted trace is the real part and the error charges the full
    /// complex deviation |r - y|: energy outside the real signal space is
    /// tracking failure.
    pub fn baseline_traces(
        &self,
        theta: &CoefVector,
        x0: &DVector<f64>,
    ) -> (DVector<f64>, DVector<f64>) {
        let forced = &self.kernel_grid * theta.entries();
        let transient = &self.transient_grid * x0;
        let mut y = DVector::<f64>::zeros(self.grid.len());
        let mut err = DVector::<f64>::zeros(self.grid.len());
        for i in 0..self.grid.len() {
            let full = Complex64::new(transient[i], 0.0) + forced[i];
            y[i] = full.re;
            err[i] = (self.r_grid[i] - full).norm();
        }
        (y, err)
    }
}

/// Everything recorded about one completed trial. Index 0 of the design
/// arrays is the full-data ridge design, 1 the compressed design, 2 the
/// truncated baseline.
#[derive(Debug, Clone)]
pub struct TrialData {
    pub trial: usize,
    pub seed: u64,
    pub plan_indices: Vec<usize>,
    pub x0: Vec<f64>,
    pub sparsity_l2: usize,
    pub sparsity_l1l2: usize,
    pub iterations: usize,
    pub converged: bool,
    /// `||Phi*theta - alpha||_2` of the compressed design.
    pub residual: f64,
    pub theta_l2_mag: Vec<f64>,
    pub theta_l1l2_mag: Vec<f64>,
    pub y: [DVector<f64>; 3],
    pub abs_err: [DVector<f64>; 3],
}

#[derive(Debug, Clone)]
pub enum TrialOutcome {
    Completed(Box<TrialData>),
    Failed { trial: usize, seed: u64, reason: String },
}

/// Runs one trial: draw the sampling pattern, solve all three designs, and
/// record output traces. A FISTA iteration-budget miss is flagged in the
/// record, not a failure.
pub fn run_single(ctx: &ExperimentContext, trial: usize) -> Result<TrialData> {
    let cfg = ctx.config();
    let space = cfg.space;
    let seed = ctx.trial_seed(trial);
    let x0 = ctx.trial_x0(trial);
    let beta = ctx.beta_for(&x0);
    let plan = draw_plan(&space, cfg.k, seed)?;
    let (phi, alpha) = compress(&ctx.g, &beta, &plan)?;

    let theta_l2 = ctx.ridge.solve(&beta)?;
    let compressed = solve_l1l2_fista(&phi, &alpha, &cfg.solver, space)?;
    let sparsity_l1l2 = compressed.theta.cardinality(DEFAULT_CARDINALITY_ABS_TOL);
    let theta_trunc = truncate_top_s(&theta_l2, sparsity_l1l2)?;

    let (y_l2, err_l2) = ctx.output_traces(&theta_l2, &x0)?;
    let (y_l1l2, err_l1l2) = ctx.output_traces(&compressed.theta, &x0)?;
    let (y_trunc, err_trunc) = ctx.baseline_traces(&theta_trunc, &x0);

    Ok(TrialData {
        trial,
        seed,
        plan_indices: plan.indices().to_vec(),
        x0: x0.iter().cloned().collect(),
        sparsity_l2: theta_l2.cardinality(DEFAULT_CARDINALITY_ABS_TOL),
        sparsity_l1l2,
        iterations: compressed.iterations,
        converged: compressed.converged,
        residual: compressed.residual,
        theta_l2_mag: theta_l2.entries().iter().map(|z| z.norm()).collect(),
        theta_l1l2_mag: compressed.theta.entries().iter().map(|z| z.norm()).collect(),
        y: [y_l2, y_l1l2, y_trunc],
        abs_err: [err_l2, err_l1l2, err_trunc],
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SummaryStats {
    pub mean: f64,
    pub std: f64,
    pub min: f64,
    pub max: f64,
}

impl SummaryStats {
    fn from_values(vals: &[f64]) -> Self {
        let n = vals.len() as f64;
        let mean = vals.iter().sum::<f64>() / n;
        let std = if vals.len() > 1 {
            (vals.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0)).sqrt()
        } else {
            0.0
        };
        let min = vals.iter().cloned().fold(f64::INFINITY, f64::min);
        let max = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        Self { mean, std, min, max }
    }
}

/// Aggregated Monte-Carlo results. Mean traces average completed trials
/// only; the design index order matches [`TrialData`].
#[derive(Debug, Clone)]
pub struct MonteCarloSummary {
    pub base_seed: u64,
    pub trials: usize,
    pub completed: usize,
    pub failures: Vec<(usize, String)>,
    pub non_converged: usize,
    pub sparsity_l1l2: SummaryStats,
    pub sparsity_l2: SummaryStats,
    pub residual: SummaryStats,
    pub iterations: SummaryStats,
    /// Mean sparsity of the compressed design divided by N.
    pub compression_ratio: f64,
    pub mean_y: [DVector<f64>; 3],
    pub mean_abs_err: [DVector<f64>; 3],
    /// Time average of each mean error trace.
    pub time_avg_err: [f64; 3],
    /// First completed trial, kept as the representative run for the
    /// coefficient output.
    pub representative: Box<TrialData>,
}

/// Runs all configured trials in a worker pool and aggregates by trial
/// index. Failed trials are excluded from every average and reported.
pub fn run_monte_carlo(ctx: &ExperimentContext) -> Result<MonteCarloSummary> {
    let trials = ctx.config().trials;
    let outcomes: Vec<TrialOutcome> = (0..trials)
        .into_par_iter()
        .map(|t| match run_single(ctx, t) {
            Ok(data) => TrialOutcome::Completed(Box::new(data)),
            Err(e) => TrialOutcome::Failed {
                trial: t,
                seed: ctx.trial_seed(t),
                reason: e.to_string(),
            },
        })
        .collect();

    let grid_len = ctx.grid().len();
    let mut failures = Vec::new();
    let mut completed: Vec<&TrialData> = Vec::with_capacity(trials);
    for outcome in &outcomes {
        match outcome {
            TrialOutcome::Completed(data) => completed.push(data),
            TrialOutcome::Failed { trial, reason, .. } => {
                failures.push((*trial, reason.clone()))
            }
        }
    }
    if completed.is_empty() {
        let (trial, reason) = &failures[0];
        return Err(Error::Internal(format!(
            "all {trials} trials failed; trial {trial}: {reason}"
        )));
    }

    let mut mean_y = [(); 3].map(|_| DVector::<f64>::zeros(grid_len));
    let mut mean_abs_err = [(); 3].map(|_| DVector::<f64>::zeros(grid_len));
    for data in &completed {
        for d in 0..3 {
            mean_y[d] += &data.y[d];
            mean_abs_err[d] += &data.abs_err[d];
        }
    }
    let scale = 1.0 / completed.len() as f64;
    for d in 0..3 {
        mean_y[d] *= scale;
        mean_abs_err[d] *= scale;
    }
    let time_avg_err =
        [0, 1, 2].map(|d| mean_abs_err[d].iter().sum::<f64>() / grid_len as f64);

    let collect = |f: &dyn Fn(&TrialData) -> f64| -> Vec<f64> {
        completed.iter().map(|d| f(d)).collect()
    };
    let sparsity_l1l2 = SummaryStats::from_values(&collect(&|d| d.sparsity_l1l2 as f64));
    let sparsity_l2 = SummaryStats::from_values(&collect(&|d| d.sparsity_l2 as f64));
    let residual = SummaryStats::from_values(&collect(&|d| d.residual));
    let iterations = SummaryStats::from_values(&collect(&|d| d.iterations as f64));
    let non_converged = completed.iter().filter(|d| !d.converged).count();
    let representative = Box::new(completed[0].clone());

    Ok(MonteCarloSummary {
        base_seed: ctx.config().seed,
        trials,
        completed: completed.len(),
        failures,
        non_converged,
        sparsity_l1l2,
        sparsity_l2,
        residual,
        iterations,
        compression_ratio: sparsity_l1l2.mean / ctx.config().space.len() as f64,
        mean_y,
        mean_abs_err,
        time_avg_err,
        representative,
    })
}

/// Isometry constant of the compressed operator drawn for one trial.
pub fn rip_for_trial(ctx: &ExperimentContext, trial: usize) -> Result<(SamplingPlan, RipReport)> {
    let section = ctx
        .config()
        .rip
        .ok_or_else(|| Error::Config("this command needs a [rip] section in the config".into()))?;
    let seed = ctx.trial_seed(trial);
    let plan = draw_plan(&ctx.config().space, ctx.config().k, seed)?;
    let x0 = ctx.trial_x0(trial);
    let beta = ctx.beta_for(&x0);
    let (phi, _) = compress(&ctx.g, &beta, &plan)?;
    let report = match section.method {
        RipMethodChoice::Exact => rip_constant_exact(&phi, section.l)?,
        RipMethodChoice::MonteCarlo => {
            rip_constant_monte_carlo(&phi, section.l, section.trials, seed ^ RIP_SEED_SALT)?
        }
    };
    Ok((plan, report))
}

/// Recovery and tracking bounds for one trial's instance: solves the ideal
/// and compressed designs, computes the isometry constant at level `2S`, and
/// assembles the bound report.
pub fn bounds_for_trial(
    ctx: &ExperimentContext,
    trial: usize,
) -> Result<(SamplingPlan, BoundReport)> {
    let section = ctx.config().bounds.ok_or_else(|| {
        Error::Config("this command needs a [bounds] section in the config".into())
    })?;
    let cfg = ctx.config();
    let space = cfg.space;
    let seed = ctx.trial_seed(trial);
    let x0 = ctx.trial_x0(trial);
    let beta = ctx.beta_for(&x0);
    let plan = draw_plan(&space, cfg.k, seed)?;
    let (phi, alpha) = compress(&ctx.g, &beta, &plan)?;

    let theta_star = solve_l2(&ctx.g, &beta, IDEAL_RIDGE_MU, space)?;
    let compressed = solve_l1l2_fista(&phi, &alpha, &cfg.solver, space)?;
    let delta = match section.method {
        RipMethodChoice::Exact => rip_constant_exact(&phi, 2 * section.s)?,
        RipMethodChoice::MonteCarlo => {
            rip_constant_monte_carlo(&phi, 2 * section.s, section.trials, seed ^ RIP_SEED_SALT)?
        }
    };
    let plant = cfg.plant.with_initial_state(x0)?;
    let system = SensingSystem::from_gram(
        ctx.g.clone(),
        ctx.h.clone(),
        ctx.r_samples.clone(),
        plant.x0(),
        plan.clone(),
    )?;
    let report = evaluate_bounds(
        &plant,
        &space,
        &system,
        &cfg.reference,
        &theta_star,
        &compressed,
        section.s,
        &delta,
    )?;
    Ok((plan, report))
}

/// Formats with 12 significant digits in plain decimal notation. The output
/// is deterministic, so repeated runs produce byte-identical files.
pub fn format_significant(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let exponent = x.abs().log10().floor() as i32;
    let decimals = (11 - exponent).clamp(0, 40) as usize;
    format!("{x:.decimals$}")
}

/// Time-series CSV: one row per output grid point, mean traces per design.
pub fn timeseries_csv_string(
    grid: &[f64],
    r: &DVector<f64>,
    y: &[DVector<f64>; 3],
    err: &[DVector<f64>; 3],
) -> String {
    let mut out = String::with_capacity(64 + grid.len() * 120);
    out.push_str("t,r,y_l2,y_l1l2,y_trunc,err_l2,err_l1l2,err_trunc\n");
    for i in 0..grid.len() {
        let cols = [
            grid[i], r[i], y[0][i], y[1][i], y[2][i], err[0][i], err[1][i], err[2][i],
        ];
        let row: Vec<String> = cols.iter().map(|&v| format_significant(v)).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

/// Coefficient-magnitude CSV over frequencies `-M..M`.
pub fn coefficients_csv_string(space: &SignalSpace, mag_l2: &[f64], mag_l1l2: &[f64]) -> String {
    let mut out = String::with_capacity(32 + space.len() * 48);
    out.push_str("m,abs_theta_l2,abs_theta_l1l2\n");
    for (idx, m) in space.frequencies().enumerate() {
        out.push_str(&format!(
            "{m},{},{}\n",
            format_significant(mag_l2[idx]),
            format_significant(mag_l1l2[idx])
        ));
    }
    out
}

/// Config echo embedded in every JSON output.
pub fn config_echo(cfg: &ExperimentConfig) -> Value {
    let a: Vec<Vec<f64>> =
        cfg.plant.a().row_iter().map(|row| row.iter().cloned().collect()).collect();
    let x0 = match cfg.x0_mode {
        X0Mode::Fixed => json!(cfg.plant.x0().iter().cloned().collect::<Vec<f64>>()),
        X0Mode::RandomNormal => json!("random-normal"),
    };
    json!({
        "plant": {
            "a": a,
            "b": cfg.plant.b().iter().cloned().collect::<Vec<f64>>(),
            "c": cfg.plant.c().iter().cloned().collect::<Vec<f64>>(),
            "x0": x0,
        },
        "space": { "horizon": cfg.space.horizon(), "band": cfg.space.band() },
        "reference": cfg.reference,
        "sampling": { "k": cfg.k },
        "solver": cfg.solver,
        "experiment": {
            "trials": cfg.trials,
            "seed": cfg.seed,
            "grid_points": cfg.grid_points,
        },
    })
}

/// Structured summary of a Monte-Carlo run.
pub fn summary_json(ctx: &ExperimentContext, summary: &MonteCarloSummary) -> Value {
    let failures: Vec<Value> = summary
        .failures
        .iter()
        .take(10)
        .map(|(trial, reason)| json!({ "trial": trial, "reason": reason }))
        .collect();
    json!({
        "config": config_echo(ctx.config()),
        "seed": summary.base_seed,
        "trials": {
            "requested": summary.trials,
            "completed": summary.completed,
            "failed": summary.failures.len(),
            "non_converged": summary.non_converged,
            "first_failures": failures,
        },
        "sparsity": {
            "l1l2": summary.sparsity_l1l2,
            "l2": summary.sparsity_l2,
            "compression_ratio": summary.compression_ratio,
        },
        "residual_l1l2": summary.residual,
        "fista_iterations": summary.iterations,
        "tracking_error_time_avg": {
            "l2": summary.time_avg_err[0],
            "l1l2": summary.time_avg_err[1],
            "trunc": summary.time_avg_err[2],
        },
        "representative_trial": {
            "trial": summary.representative.trial,
            "seed": summary.representative.seed,
            "plan_indices": summary.representative.plan_indices,
            "sparsity_l1l2": summary.representative.sparsity_l1l2,
            "iterations": summary.representative.iterations,
            "converged": summary.representative.converged,
        },
    })
}

/// Writes `timeseries.csv`, `coefficients.csv`, and `summary.json` into
/// `out_dir`. All content is rendered before the first byte is written, so
/// serialization problems cannot leave a partial summary behind.
pub fn emit_outputs(
    ctx: &ExperimentContext,
    summary: &MonteCarloSummary,
    out_dir: &Path,
) -> Result<Vec<PathBuf>> {
    let timeseries =
        timeseries_csv_string(ctx.grid(), ctx.r_grid(), &summary.mean_y, &summary.mean_abs_err);
    let coefficients = coefficients_csv_string(
        &ctx.config().space,
        &summary.representative.theta_l2_mag,
        &summary.representative.theta_l1l2_mag,
    );
    let summary_text = to_json_file_string(&summary_json(ctx, summary))?;

    fs::create_dir_all(out_dir)?;
    let paths = [
        ("timeseries.csv", timeseries),
        ("coefficients.csv", coefficients),
        ("summary.json", summary_text),
    ];
    let mut written = Vec::new();
    for (name, content) in paths {
        let path = out_dir.join(name);
        fs::write(&path, content)?;
        written.push(path);
    }
    Ok(written)
}

/// Pretty JSON with a trailing newline.
pub fn to_json_file_string(value: &Value) -> Result<String> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| Error::Internal(format!("JSON serialization: {e}")))?;
    text.push('\n');
    Ok(text)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny_config_text() -> String {
        r#"
[plant]
a = [[0.0, 1.0], [-0.5, -1.5]]
b = [0.0, 1.0]
c = [-0.5, 1.0]
x0 = [0.0, 0.0]

[space]
horizon = 6.283185307179586
band = 6

[[reference.terms]]
kind = "sin"
m = 2
amplitude = 1.0

[sampling]
k = 7

[solver]
mu1 = 1e-4
mu2 = 1e-4

[experiment]
trials = 3
seed = 7
grid_points = 40
"#
        .to_string()
    }

    #[test]
    fn config_parses_and_validates() {
        let cfg = ExperimentConfig::from_toml_str(&tiny_config_text()).unwrap();
        assert_eq!(cfg.space.len(), 13);
        assert_eq!(cfg.k, 7);
        assert_eq!(cfg.x0_mode, X0Mode::Fixed);
        assert_eq!(cfg.solver.max_iters, 20_000); // defaulted
        assert_eq!(cfg.reference.terms.len(), 1);
    }

    #[test]
    fn config_random_x0_mode() {
        let text = tiny_config_text().replace("x0 = [0.0, 0.0]", "x0 = \"random-normal\"");
        let cfg = ExperimentConfig::from_toml_str(&text).unwrap();
        assert_eq!(cfg.x0_mode, X0Mode::RandomNormal);
        let ctx = ExperimentContext::new(cfg).unwrap();
        let a = ctx.trial_x0(0);
        let b = ctx.trial_x0(0);
        let c = ctx.trial_x0(1);
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn config_rejects_bad_fields() {
        let too_many = tiny_config_text().replace("k = 7", "k = 14");
        assert!(ExperimentConfig::from_toml_str(&too_many).is_err());
        let zero_trials = tiny_config_text().replace("trials = 3", "trials = 0");
        assert!(ExperimentConfig::from_toml_str(&zero_trials).is_err());
        let bad_mode = tiny_config_text().replace("x0 = [0.0, 0.0]", "x0 = \"gaussian\"");
        assert!(ExperimentConfig::from_toml_str(&bad_mode).is_err());
        let unstable =
            tiny_config_text().replace("a = [[0.0, 1.0], [-0.5, -1.5]]", "a = [[0.0, 1.0], [0.5, 1.5]]");
        assert!(ExperimentConfig::from_toml_str(&unstable).is_err());
        let ragged =
            tiny_config_text().replace("a = [[0.0, 1.0], [-0.5, -1.5]]", "a = [[0.0, 1.0], [-0.5]]");
        assert!(ExperimentConfig::from_toml_str(&ragged).is_err());
    }

    #[test]
    fn seed_and_trial_overrides() {
        let cfg = ExperimentConfig::from_toml_str(&tiny_config_text()).unwrap();
        let cfg = cfg.with_overrides(Some(99), Some(5)).unwrap();
        assert_eq!(cfg.seed, 99);
        assert_eq!(cfg.trials, 5);
        assert!(cfg.with_overrides(None, Some(0)).is_err());
    }

    #[test]
    fn format_significant_cases() {
        assert_eq!(format_significant(0.0), "0");
        assert_eq!(format_significant(-0.0), "0");
        assert_eq!(format_significant(1.0), "1.00000000000");
        assert_eq!(format_significant(123.456), "123.456000000");
        assert_eq!(format_significant(-0.00123), "-0.00123000000000");
        assert_eq!(format_significant(3.141592653589793), "3.14159265359");
    }

    #[test]
    fn trivial_config_gives_zero_traces() {
        // Zero reference, zero x0, full sampling: every design is zero.
        let text = tiny_config_text()
            .replace(
                "[[reference.terms]]\nkind = \"sin\"\nm = 2\namplitude = 1.0\n",
                "",
            )
            .replace("k = 7", "k = 13")
            .replace("trials = 3", "trials = 1");
        let cfg = ExperimentConfig::from_toml_str(&text).unwrap();
        let ctx = ExperimentContext::new(cfg).unwrap();
        let data = run_single(&ctx, 0).unwrap();
        assert_eq!(data.sparsity_l2, 0);
        assert_eq!(data.sparsity_l1l2, 0);
        for d in 0..3 {
            assert!(data.y[d].iter().all(|&v| v == 0.0));
            assert!(data.abs_err[d].iter().all(|&v| v == 0.0));
        }
    }

    #[test]
    fn single_trial_summary_matches_record() {
        let text = tiny_config_text().replace("trials = 3", "trials = 1");
        let cfg = ExperimentConfig::from_toml_str(&text).unwrap();
        let ctx = ExperimentContext::new(cfg).unwrap();
        let data = run_single(&ctx, 0).unwrap();
        let summary = run_monte_carlo(&ctx).unwrap();
        assert_eq!(summary.completed, 1);
        assert_eq!(summary.sparsity_l1l2.mean, data.sparsity_l1l2 as f64);
        assert_eq!(summary.sparsity_l1l2.std, 0.0);
        assert_eq!(summary.mean_abs_err[1], data.abs_err[1]);
    }

    #[test]
    fn monte_carlo_outputs_are_deterministic() {
        let cfg = ExperimentConfig::from_toml_str(&tiny_config_text()).unwrap();
        let ctx = ExperimentContext::new(cfg).unwrap();
        let s1 = run_monte_carlo(&ctx).unwrap();
        let s2 = run_monte_carlo(&ctx).unwrap();
        let t1 = timeseries_csv_string(ctx.grid(), ctx.r_grid(), &s1.mean_y, &s1.mean_abs_err);
        let t2 = timeseries_csv_string(ctx.grid(), ctx.r_grid(), &s2.mean_y, &s2.mean_abs_err);
        assert_eq!(t1, t2);
        let j1 = to_json_file_string(&summary_json(&ctx, &s1)).unwrap();
        let j2 = to_json_file_string(&summary_json(&ctx, &s2)).unwrap();
        assert_eq!(j1, j2);
    }

    #[test]
    fn csv_headers_are_pinned() {
        let cfg = ExperimentConfig::from_toml_str(&tiny_config_text()).unwrap();
        let ctx = ExperimentContext::new(cfg).unwrap();
        let summary = run_monte_carlo(&ctx).unwrap();
        let ts = timeseries_csv_string(ctx.grid(), ctx.r_grid(), &summary.mean_y, &summary.mean_abs_err);
        assert!(ts.starts_with("t,r,y_l2,y_l1l2,y_trunc,err_l2,err_l1l2,err_trunc\n"));
        let co = coefficients_csv_string(
            &ctx.config().space,
            &summary.representative.theta_l2_mag,
            &summary.representative.theta_l1l2_mag,
        );
        assert!(co.starts_with("m,abs_theta_l2,abs_theta_l1l2\n"));
        assert_eq!(co.lines().count(), 1 + ctx.config().space.len());
        assert!(co.lines().nth(1).unwrap().starts_with("-6,"));
    }

    #[test]
    fn csv_round_trips_at_printed_precision() {
        let cfg = ExperimentConfig::from_toml_str(&tiny_config_text()).unwrap();
        let ctx = ExperimentContext::new(cfg).unwrap();
        let summary = run_monte_carlo(&ctx).unwrap();
        let ts = timeseries_csv_string(ctx.grid(), ctx.r_grid(), &summary.mean_y, &summary.mean_abs_err);
        for (i, line) in ts.lines().skip(1).enumerate() {
            let fields: Vec<f64> = line.split(',').map(|s| s.parse().unwrap()).collect();
            assert_eq!(fields.len(), 8);
            // Parsing the printed value and re-printing reproduces the text.
            let reprint = format_significant(fields[1]);
            assert_eq!(reprint, line.split(',').nth(1).unwrap(), "row {i}");
        }
    }
}
