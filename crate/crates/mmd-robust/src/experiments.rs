//! Config-driven, seeded experiment runners for the simulation study.
//!
//! Five experiments, each a pure function from a config to a table of
//! [`ResultRow`]s plus (for the sweeps) self-contained SVG charts:
//!
//! * [`run_table1`] — Gaussian location under eight Hüber contaminations,
//!   comparing the minimum-MMD estimator against the componentwise mean
//!   and median (and the published JS-GAN numbers).
//! * [`run_eps_sweep`] — MSE as a function of the contamination rate ε.
//! * [`run_dim_sweep`] — error as a function of the ambient dimension for
//!   a Gaussian and a Dirac attack.
//! * [`run_mixture`] — dictionary-mixture density estimation with and
//!   without a gross outlier, against EM (and the published CAVI numbers).
//! * [`run_dependence_demo`] — the dependence coefficient ρ̂_t against its
//!   analytic envelopes, and hidden-Markov weight estimation against the
//!   chain's finite-sample bound.
//!
//! ## Determinism
//!
//! Every repetition draws from its own `ChaCha8` generator seeded as
//! `base_seed·10⁶ + axis·10⁴ + rep` (wrapping), where `axis` enumerates
//! sweep positions. Repetitions are therefore independent of scheduling:
//! they can run on any number of threads and still reproduce the same
//! rows byte for byte. The `seed` column of each row records the stream
//! of its axis (`rep = 0`).
//!
//! ## Reference values
//!
//! Rows for estimators this crate implements carry the published table
//! values in `paper_reference_value` for side-by-side comparison; rows
//! for estimators it does not implement (JS-GAN, CAVI) are emitted as
//! embedded constants with `repetitions = 0` and a `(reported)` marker in
//! the reference id — they are never recomputed.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::baselines::{coordinatewise_median, em_mixture, mean_estimator};
use crate::bounds::bound_hmm;
use crate::contamination::{contaminate, Attack, ContaminationSpec, QLaw};
use crate::dependence::{
    ar_rho_envelope, binary_half_ar_rho_envelope, gaussian_expected_norm, rho_hat, DataProcess,
    IidLaw,
};
use crate::estimator::{
    exact_gradient_descent_gauss, DictionaryCriterion, EstimatorConfig, StepSchedule,
};
use crate::kernels::Kernel;
use crate::mmd::gauss_crit_grad_lipschitz;
use crate::models::{normal_log_pdf, DictionaryComponent, GenerativeModel, ParamVector};
use crate::report::{linear_fit, ResultRow};
use crate::svg::{line_chart, ChartSpec, Series};
use crate::{mean_and_stderr, Error, Result, Sample};

/// Rows plus named SVG charts produced by one experiment run.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentOutput {
    pub rows: Vec<ResultRow>,
    /// `(file_name, svg_markup)` pairs; empty for table-only experiments.
    pub charts: Vec<(String, String)>,
}

/// Seed of repetition `rep` on sweep axis `axis`:
/// `base_seed·10⁶ + axis·10⁴ + rep`, wrapping on overflow.
///
/// Axes are spaced 10⁴ apart, so repetition streams never collide as long
/// as a single axis stays below 10⁴ repetitions.
fn rep_seed(base_seed: u64, axis: u64, rep: u64) -> u64 {
    base_seed
        .wrapping_mul(1_000_000)
        .wrapping_add(axis.wrapping_mul(10_000))
        .wrapping_add(rep)
}

/// Exact-gradient-descent configuration for Gaussian location fits: a
/// constant step `0.8/L` sized from the criterion's gradient Lipschitz
/// constant, run long enough that the iterate has stopped moving (on
/// pilot data 150 steps already reproduce the 600-step iterate exactly;
/// 300 doubles that margin). The exact path uses no model sampling, so
/// the config seed is irrelevant.
fn location_gd_config(gamma: f64, sigma: f64, dim: usize) -> Result<EstimatorConfig> {
    let eta = 0.8 / gauss_crit_grad_lipschitz(gamma, sigma, dim)?;
    Ok(EstimatorConfig {
        step: StepSchedule::Constant(eta),
        ..EstimatorConfig::simulation_default(2, 300, 0)
    })
}

/// Dictionary-weight fits run the exact quadratic descent with a nominal
/// unit step; the solver caps every step at `0.95/λ_max(G)`, so the
/// nominal value only needs to be large enough to hit the cap.
fn dictionary_fit_config(t_steps: usize) -> EstimatorConfig {
    EstimatorConfig {
        step: StepSchedule::Constant(1.0),
        ..EstimatorConfig::simulation_default(2, t_steps, 0)
    }
}

fn check_positive_reps(repetitions: u32) -> Result<()> {
    if repetitions == 0 {
        return Err(Error::Config("repetitions must be ≥ 1".into()));
    }
    Ok(())
}

/// Mean, standard error, and delta-method standard error of the square
/// root, from per-repetition squared errors.
fn sqrt_mse_summary(squared_errors: &[f64]) -> (f64, f64) {
    let (mse, se_mse) = mean_and_stderr(squared_errors);
    if mse <= 0.0 {
        return (0.0, 0.0);
    }
    let root = mse.sqrt();
    // se(√m) ≈ se(m) / (2√m); NaN se (single repetition) propagates.
    (root, se_mse / (2.0 * root))
}

fn squared_norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum()
}

// ---------------------------------------------------------------------------
// Location table
// ---------------------------------------------------------------------------

/// Configuration for [`run_table1`].
#[derive(Debug, Clone, PartialEq)]
pub struct LocationTableConfig {
    /// Ambient dimension (study value: 10).
    pub dim: usize,
    /// Sample size per repetition (study value: 500).
    pub n: usize,
    /// Hüber contamination rate (study value: 0.2).
    pub eps: f64,
    /// Independent repetitions per contamination (study value: 50).
    pub repetitions: u32,
    pub base_seed: u64,
}

impl Default for LocationTableConfig {
    fn default() -> Self {
        LocationTableConfig { dim: 10, n: 500, eps: 0.2, repetitions: 50, base_seed: 1 }
    }
}

/// The eight contamination columns of the location table, in published
/// column order, with the reference `√(MSE/d)` values for each method.
/// JS-GAN was run only in the original study; its mean and standard
/// deviation are embedded verbatim and flagged `(reported)`.
struct TableColumn {
    label: &'static str,
    q: fn(usize) -> QLaw,
    mean_ref: f64,
    median_ref: f64,
    mmd_ref: f64,
    js_gan_ref: (f64, f64),
}

const TABLE1_COLUMNS: [TableColumn; 8] = [
    TableColumn {
        label: "N(0.2*1)",
        q: |d| QLaw::gaussian_shift_ones(0.2, d),
        mean_ref: 0.0379,
        median_ref: 0.0387,
        mmd_ref: 0.0654,
        js_gan_ref: (0.1848, 0.0443),
    },
    TableColumn {
        label: "N(0.5*1)",
        q: |d| QLaw::gaussian_shift_ones(0.5, d),
        mean_ref: 0.0954,
        median_ref: 0.0893,
        mmd_ref: 0.1172,
        js_gan_ref: (0.2036, 0.0346),
    },
    TableColumn {
        label: "N(1*1)",
        q: |d| QLaw::gaussian_shift_ones(1.0, d),
        mean_ref: 0.2033,
        median_ref: 0.1756,
        mmd_ref: 0.1730,
        js_gan_ref: (0.2172, 0.0241),
    },
    TableColumn {
        label: "N(5*1)",
        q: |d| QLaw::gaussian_shift_ones(5.0, d),
        mean_ref: 1.0166,
        median_ref: 0.3106,
        mmd_ref: 0.0634,
        js_gan_ref: (0.1879, 0.0287),
    },
    TableColumn {
        label: "N(10*1)",
        q: |d| QLaw::gaussian_shift_ones(10.0, d),
        mean_ref: 1.9915,
        median_ref: 0.3345,
        mmd_ref: 0.0681,
        js_gan_ref: (0.2204, 0.0423),
    },
    TableColumn {
        label: "cauchy(0.5)",
        q: |d| QLaw::cauchy_ones(0.5, d),
        mean_ref: 0.3577,
        median_ref: 0.0769,
        mmd_ref: 0.0882,
        js_gan_ref: (0.2276, 0.0376),
    },
    TableColumn {
        label: "dirac(1)",
        q: |d| QLaw::dirac_ones(1.0, d),
        mean_ref: 0.2057,
        median_ref: 0.3194,
        mmd_ref: 0.3622,
        js_gan_ref: (0.1969, 0.0342),
    },
    TableColumn {
        label: "dirac(10)",
        q: |d| QLaw::dirac_ones(10.0, d),
        mean_ref: 2.0048,
        median_ref: 0.3258,
        mmd_ref: 0.0601,
        js_gan_ref: (0.1877, 0.0324),
    },
];

/// Gaussian location `N(θ, I_d)` at true θ₀ = 0 under eight Hüber
/// contaminations: for every contamination and every method the table
/// reports `√(MSE/d)` (the per-coordinate error scale the published table
/// uses, metric `sqrt_mse_normalized`) and the plain Euclidean `√MSE`.
///
/// Per repetition, one contaminated sample is drawn and handed to all
/// three estimators, so columns are directly comparable. The minimum-MMD
/// estimate uses the exact criterion gradient (no Monte Carlo): with the
/// experiment kernel the criterion is available in closed form, and
/// descent at step `0.8/L` converges to the same minimizer the stochastic
/// algorithm approaches, without its step-schedule noise.
pub fn run_table1(cfg: &LocationTableConfig) -> Result<ExperimentOutput> {
    check_positive_reps(cfg.repetitions)?;
    let d = cfg.dim;
    let model = GenerativeModel::gaussian_location(1.0, d)?;
    let theta0 = ParamVector::euclidean(vec![0.0; d])?;
    let kernel = Kernel::gaussian((d as f64).sqrt())?;
    let gd_cfg = location_gd_config(kernel.gamma, 1.0, d)?;

    let mut rows = Vec::new();
    for (axis, column) in TABLE1_COLUMNS.iter().enumerate() {
        let spec = ContaminationSpec::huber(cfg.eps, (column.q)(d))?;
        // Per-rep squared Euclidean errors for (mean, median, mmd).
        let per_rep: Vec<[f64; 3]> = (0..cfg.repetitions as u64)
            .into_par_iter()
            .map(|rep| -> Result<[f64; 3]> {
                let mut rng = ChaCha8Rng::seed_from_u64(rep_seed(cfg.base_seed, axis as u64, rep));
                let clean = model.sample(&theta0, cfg.n, &mut rng)?;
                let (data, _) = contaminate(&clean, &spec, &mut rng)?;
                let mmd_fit = exact_gradient_descent_gauss(&kernel, 1.0, &data, &gd_cfg)?;
                Ok([
                    squared_norm(&mean_estimator(&data)),
                    squared_norm(&coordinatewise_median(&data)),
                    squared_norm(&mmd_fit.theta_hat.values),
                ])
            })
            .collect::<Result<_>>()?;

        let axis_seed = rep_seed(cfg.base_seed, axis as u64, 0);
        let methods: [(&str, usize, f64); 3] = [
            ("mean", 0, column.mean_ref),
            ("median", 1, column.median_ref),
            ("mmd", 2, column.mmd_ref),
        ];
        for (method, idx, reference) in methods {
            let squares: Vec<f64> = per_rep.iter().map(|r| r[idx]).collect();
            let (root, se) = sqrt_mse_summary(&squares);
            let sqrt_d = (d as f64).sqrt();
            rows.push(
                ResultRow::new(
                    "location_table",
                    method,
                    column.label,
                    axis as f64,
                    "sqrt_mse_normalized",
                    root / sqrt_d,
                    se / sqrt_d,
                    cfg.repetitions,
                    axis_seed,
                )
                .with_reference(reference, "Table 1"),
            );
            rows.push(ResultRow::new(
                "location_table",
                method,
                column.label,
                axis as f64,
                "sqrt_mse",
                root,
                se,
                cfg.repetitions,
                axis_seed,
            ));
        }
        let (js_val, js_sd) = column.js_gan_ref;
        rows.push(
            ResultRow::new(
                "location_table",
                "js_gan",
                column.label,
                axis as f64,
                "sqrt_mse_normalized",
                js_val,
                js_sd,
                0,
                axis_seed,
            )
            .with_reference(js_val, "Table 1 (reported)"),
        );
    }
    Ok(ExperimentOutput { rows, charts: Vec::new() })
}

// ---------------------------------------------------------------------------
// ε sweep
// ---------------------------------------------------------------------------

/// Configuration for [`run_eps_sweep`].
#[derive(Debug, Clone, PartialEq)]
pub struct EpsSweepConfig {
    /// Ambient dimension (study value: 10).
    pub dim: usize,
    /// Sample size per repetition (study value: 5000).
    pub n: usize,
    /// Contamination rates; 0 is allowed and anchors the clean rate.
    pub eps_grid: Vec<f64>,
    /// Repetitions per grid point (study default: 10; acceptance runs use
    /// enough to resolve the linear trend against repetition noise).
    pub repetitions: u32,
    pub base_seed: u64,
}

impl Default for EpsSweepConfig {
    fn default() -> Self {
        EpsSweepConfig {
            dim: 10,
            n: 5000,
            eps_grid: (0..=10).map(|i| i as f64 * 0.02).collect(),
            repetitions: 10,
            base_seed: 1,
        }
    }
}

/// Minimum-MMD error against the contamination rate for the invisible
/// attack `Q = N(5·𝟏, I_d)`: rows of per-coordinate MSE (`mse_normalized`
/// = `E‖θ̂‖²/d`) per ε, a least-squares line fitted through the strictly
/// positive rates (`fit_slope`, `fit_intercept`, `fit_r_squared` rows —
/// the published figure's linearity claim), and an `error_vs_eps.svg`
/// chart of both.
///
/// The outliers sit at kernel distance `‖5·𝟏‖ = 5√d` from the truth, so
/// the estimator effectively sees `(1−ε)n` clean points: the MSE grows
/// linearly in ε at rate of order `1/n`, which is what the fit measures.
pub fn run_eps_sweep(cfg: &EpsSweepConfig) -> Result<ExperimentOutput> {
    check_positive_reps(cfg.repetitions)?;
    if cfg.eps_grid.is_empty() {
        return Err(Error::Config("eps_grid must be nonempty".into()));
    }
    if cfg.eps_grid.iter().any(|e| !(0.0..1.0).contains(e)) {
        return Err(Error::Config("every ε must lie in [0, 1)".into()));
    }
    let d = cfg.dim;
    let model = GenerativeModel::gaussian_location(1.0, d)?;
    let theta0 = ParamVector::euclidean(vec![0.0; d])?;
    let kernel = Kernel::gaussian((d as f64).sqrt())?;
    let gd_cfg = location_gd_config(kernel.gamma, 1.0, d)?;

    let mut rows = Vec::new();
    let mut curve = Vec::new();
    for (axis, &eps) in cfg.eps_grid.iter().enumerate() {
        let spec = if eps > 0.0 {
            ContaminationSpec::huber(eps, QLaw::gaussian_shift_ones(5.0, d))?
        } else {
            ContaminationSpec::None
        };
        let per_rep: Vec<f64> = (0..cfg.repetitions as u64)
            .into_par_iter()
            .map(|rep| -> Result<f64> {
                let mut rng = ChaCha8Rng::seed_from_u64(rep_seed(cfg.base_seed, axis as u64, rep));
                let clean = model.sample(&theta0, cfg.n, &mut rng)?;
                let (data, _) = contaminate(&clean, &spec, &mut rng)?;
                let fit = exact_gradient_descent_gauss(&kernel, 1.0, &data, &gd_cfg)?;
                Ok(squared_norm(&fit.theta_hat.values) / d as f64)
            })
            .collect::<Result<_>>()?;
        let (mse, se) = mean_and_stderr(&per_rep);
        rows.push(ResultRow::new(
            "eps_sweep",
            "mmd",
            "N(5*1)",
            eps,
            "mse_normalized",
            mse,
            se,
            cfg.repetitions,
            rep_seed(cfg.base_seed, axis as u64, 0),
        ));
        curve.push((eps, mse));
    }

    // The linearity claim concerns the contaminated regime; the ε = 0
    // anchor (pure clean rate) is plotted but not fitted.
    let positive: Vec<(f64, f64)> = curve.iter().copied().filter(|&(e, _)| e > 0.0).collect();
    let mut series = vec![Series::solid("minimum-MMD", curve.clone())];
    if positive.len() >= 2 {
        let xs: Vec<f64> = positive.iter().map(|&(e, _)| e).collect();
        let ys: Vec<f64> = positive.iter().map(|&(_, m)| m).collect();
        let fit = linear_fit(&xs, &ys)?;
        let fit_seed = rep_seed(cfg.base_seed, 0, 0);
        for (metric, value) in [
            ("fit_slope", fit.slope),
            ("fit_intercept", fit.intercept),
            ("fit_r_squared", fit.r_squared),
        ] {
            rows.push(ResultRow::new(
                "eps_sweep",
                "mmd",
                "fit(eps>0)",
                0.0,
                metric,
                value,
                0.0,
                cfg.repetitions,
                fit_seed,
            ));
        }
        let x_lo = xs.iter().cloned().fold(f64::MAX, f64::min);
        let x_hi = xs.iter().cloned().fold(f64::MIN, f64::max);
        series.push(Series::dashed(
            "least-squares fit",
            vec![
                (x_lo, fit.slope * x_lo + fit.intercept),
                (x_hi, fit.slope * x_hi + fit.intercept),
            ],
        ));
    }

    let chart = line_chart(
        &ChartSpec::new(
            "Minimum-MMD error vs contamination rate",
            "contamination rate eps",
            "MSE / d",
        ),
        &series,
    )?;
    Ok(ExperimentOutput { rows, charts: vec![("error_vs_eps.svg".into(), chart)] })
}

// ---------------------------------------------------------------------------
// Dimension sweep
// ---------------------------------------------------------------------------

/// Configuration for [`run_dim_sweep`].
#[derive(Debug, Clone, PartialEq)]
pub struct DimSweepConfig {
    /// Dimension grid (study value: {4, 9, 16, 25, 36, 49, 64}).
    pub dims: Vec<usize>,
    /// Sample size per repetition (study value: 5000).
    pub n: usize,
    /// Hüber contamination rate (study value: 0.1).
    pub eps: f64,
    /// Repetitions per (dimension, attack) cell (study default: 10).
    pub repetitions: u32,
    pub base_seed: u64,
}

impl Default for DimSweepConfig {
    fn default() -> Self {
        DimSweepConfig {
            dims: vec![4, 9, 16, 25, 36, 49, 64],
            n: 5000,
            eps: 0.1,
            repetitions: 10,
            base_seed: 1,
        }
    }
}

/// Minimum-MMD error against the ambient dimension under two attacks:
/// the kernel-invisible `Q = N(5·𝟏, I_d)` and the in-range Dirac `δ_𝟏`.
///
/// Emitted per (attack, d): Euclidean `sqrt_mse` and per-coordinate
/// `sqrt_mse_normalized` rows. Summary rows capture the two published
/// claims — the Gaussian-attack curve is flat in the per-coordinate
/// metric (`max_min_ratio_normalized`), while the Dirac attack biases
/// every coordinate by a constant, making the Euclidean error linear in
/// √d (`fit_slope_vs_sqrt_d`, `fit_r_squared_vs_sqrt_d`). Two charts:
/// `error_vs_dim_gaussian.svg` and `error_vs_dim_dirac.svg`.
pub fn run_dim_sweep(cfg: &DimSweepConfig) -> Result<ExperimentOutput> {
    check_positive_reps(cfg.repetitions)?;
    if cfg.dims.is_empty() {
        return Err(Error::Config("dims must be nonempty".into()));
    }
    if !(0.0..1.0).contains(&cfg.eps) {
        return Err(Error::Config("eps must lie in [0, 1)".into()));
    }

    let attacks: [(&str, fn(usize) -> QLaw); 2] = [
        ("gaussian(5)", |d| QLaw::gaussian_shift_ones(5.0, d)),
        ("dirac(1)", |d| QLaw::dirac_ones(1.0, d)),
    ];

    let mut rows = Vec::new();
    let mut gauss_curve = Vec::new(); // (d, sqrt_mse_normalized)
    let mut dirac_curve = Vec::new(); // (√d, sqrt_mse Euclidean)
    for (ai, (attack_label, q)) in attacks.iter().enumerate() {
        for (di, &d) in cfg.dims.iter().enumerate() {
            let axis = (ai * cfg.dims.len() + di) as u64;
            let model = GenerativeModel::gaussian_location(1.0, d)?;
            let theta0 = ParamVector::euclidean(vec![0.0; d])?;
            let kernel = Kernel::gaussian((d as f64).sqrt())?;
            let gd_cfg = location_gd_config(kernel.gamma, 1.0, d)?;
            let spec = if cfg.eps > 0.0 {
                ContaminationSpec::huber(cfg.eps, q(d))?
            } else {
                ContaminationSpec::None
            };
            let per_rep: Vec<f64> = (0..cfg.repetitions as u64)
                .into_par_iter()
                .map(|rep| -> Result<f64> {
                    let mut rng = ChaCha8Rng::seed_from_u64(rep_seed(cfg.base_seed, axis, rep));
                    let clean = model.sample(&theta0, cfg.n, &mut rng)?;
                    let (data, _) = contaminate(&clean, &spec, &mut rng)?;
                    let fit = exact_gradient_descent_gauss(&kernel, 1.0, &data, &gd_cfg)?;
                    Ok(squared_norm(&fit.theta_hat.values))
                })
                .collect::<Result<_>>()?;
            let (root, se) = sqrt_mse_summary(&per_rep);
            let sqrt_d = (d as f64).sqrt();
            let axis_seed = rep_seed(cfg.base_seed, axis, 0);
            rows.push(ResultRow::new(
                "dim_sweep",
                "mmd",
                attack_label,
                d as f64,
                "sqrt_mse",
                root,
                se,
                cfg.repetitions,
                axis_seed,
            ));
            rows.push(ResultRow::new(
                "dim_sweep",
                "mmd",
                attack_label,
                d as f64,
                "sqrt_mse_normalized",
                root / sqrt_d,
                se / sqrt_d,
                cfg.repetitions,
                axis_seed,
            ));
            if ai == 0 {
                gauss_curve.push((d as f64, root / sqrt_d));
            } else {
                dirac_curve.push((sqrt_d, root));
            }
        }
    }

    let summary_seed = rep_seed(cfg.base_seed, 0, 0);
    let flat_max = gauss_curve.iter().map(|&(_, v)| v).fold(f64::MIN, f64::max);
    let flat_min = gauss_curve.iter().map(|&(_, v)| v).fold(f64::MAX, f64::min);
    if flat_min > 0.0 {
        rows.push(ResultRow::new(
            "dim_sweep",
            "mmd",
            "gaussian(5)",
            0.0,
            "max_min_ratio_normalized",
            flat_max / flat_min,
            0.0,
            cfg.repetitions,
            summary_seed,
        ));
    }

    let mut dirac_series = vec![Series::solid("minimum-MMD", dirac_curve.clone())];
    if dirac_curve.len() >= 2 {
        let xs: Vec<f64> = dirac_curve.iter().map(|&(x, _)| x).collect();
        let ys: Vec<f64> = dirac_curve.iter().map(|&(_, y)| y).collect();
        let fit = linear_fit(&xs, &ys)?;
        for (metric, value) in
            [("fit_slope_vs_sqrt_d", fit.slope), ("fit_r_squared_vs_sqrt_d", fit.r_squared)]
        {
            rows.push(ResultRow::new(
                "dim_sweep",
                "mmd",
                "dirac(1)",
                0.0,
                metric,
                value,
                0.0,
                cfg.repetitions,
                summary_seed,
            ));
        }
        let x_lo = xs.iter().cloned().fold(f64::MAX, f64::min);
        let x_hi = xs.iter().cloned().fold(f64::MIN, f64::max);
        dirac_series.push(Series::dashed(
            "least-squares fit",
            vec![
                (x_lo, fit.slope * x_lo + fit.intercept),
                (x_hi, fit.slope * x_hi + fit.intercept),
            ],
        ));
    }

    let gauss_chart = line_chart(
        &ChartSpec::new(
            "Gaussian attack: per-coordinate error vs dimension",
            "dimension d",
            "sqrt(MSE / d)",
        ),
        &[Series::solid("minimum-MMD", gauss_curve)],
    )?;
    let dirac_chart = line_chart(
        &ChartSpec::new("Dirac attack: error vs sqrt(dimension)", "sqrt(d)", "sqrt(MSE)"),
        &dirac_series,
    )?;
    Ok(ExperimentOutput {
        rows,
        charts: vec![
            ("error_vs_dim_gaussian.svg".into(), gauss_chart),
            ("error_vs_dim_dirac.svg".into(), dirac_chart),
        ],
    })
}

// ---------------------------------------------------------------------------
// Mixture study
// ---------------------------------------------------------------------------

/// Configuration for [`run_mixture`].
#[derive(Debug, Clone, PartialEq)]
pub struct MixtureConfig {
    /// Sample size per repetition (study value: 10000).
    pub n: usize,
    /// Independent repetitions (study value: 50).
    pub repetitions: u32,
    /// Value of the adversarial outlier (study value: 100).
    pub outlier_value: f64,
    /// Random restarts for the EM comparator (study value: 10).
    pub em_restarts: usize,
    /// Fresh draws from the truth on which densities are compared
    /// (study value: 10000).
    pub mae_draws: usize,
    pub base_seed: u64,
}

impl Default for MixtureConfig {
    fn default() -> Self {
        MixtureConfig {
            n: 10_000,
            repetitions: 50,
            outlier_value: 100.0,
            em_restarts: 10,
            mae_draws: 10_000,
            base_seed: 1,
        }
    }
}

/// The three-component truth of the mixture study.
const MIXTURE_TRUE_MEANS: [f64; 3] = [-3.72, 0.11, 4.54];
const MIXTURE_TRUE_WEIGHTS: [f64; 3] = [0.3, 0.3, 0.4];

/// Dictionary-mixture density estimation against EM, with and without one
/// adversarial outlier.
///
/// The truth is the unit-variance mixture `0.3·N(−3.72) + 0.3·N(0.11) +
/// 0.4·N(4.54)`. The minimum-MMD fit selects weights over the 501-component
/// dictionary `N(m, 1), m ∈ {−5, −4.98, …, 5}` by exact quadratic descent
/// on the simplex; EM fits three free means and weights with the best of
/// `em_restarts` random initializations. The outlier arm replaces
/// `⌊1.5⌋ = 1` point of the same sample with `outlier_value`.
///
/// The reported metric is the mean absolute density error `mae` — mean of
/// `|p̂(z) − p(z)|` over `mae_draws` fresh draws `z` from the truth shared
/// by both estimators within a repetition. CAVI rows are published
/// constants (`repetitions = 0`), never recomputed.
pub fn run_mixture(cfg: &MixtureConfig) -> Result<ExperimentOutput> {
    check_positive_reps(cfg.repetitions)?;
    if cfg.mae_draws == 0 {
        return Err(Error::Config("mae_draws must be ≥ 1".into()));
    }
    if cfg.n < 4 {
        return Err(Error::Config("mixture study needs n ≥ 4".into()));
    }
    let truth_components: Vec<DictionaryComponent> = MIXTURE_TRUE_MEANS
        .iter()
        .map(|&mean| DictionaryComponent { mean, sigma: 1.0 })
        .collect();
    let truth = GenerativeModel::mixture(truth_components)?;
    let theta_true = ParamVector::new(
        MIXTURE_TRUE_WEIGHTS.to_vec(),
        crate::models::ParamSpace::Simplex(3),
    )?;
    let p_true = |x: f64| -> f64 {
        MIXTURE_TRUE_WEIGHTS
            .iter()
            .zip(&MIXTURE_TRUE_MEANS)
            .map(|(&w, &m)| w * normal_log_pdf(x, m, 1.0).exp())
            .sum()
    };

    let dictionary: Vec<DictionaryComponent> = (0..=500)
        .map(|i| DictionaryComponent { mean: -5.0 + 0.02 * i as f64, sigma: 1.0 })
        .collect();
    let kernel = Kernel::gaussian(1.0)?;
    // The Gram matrix and its top eigenvalue are data-independent: build
    // them once, share across repetitions.
    let criterion = DictionaryCriterion::new(&kernel, &dictionary)?;
    let fit_cfg = dictionary_fit_config(400);
    let outlier_spec = ContaminationSpec::adversarial(
        1.5 / cfg.n as f64,
        Attack::DiracAt { point: vec![cfg.outlier_value] },
    )?;

    // Per repetition: MAE of (mmd clean, mmd outlier, em clean, em outlier).
    let per_rep: Vec<[f64; 4]> = (0..cfg.repetitions as u64)
        .into_par_iter()
        .map(|rep| -> Result<[f64; 4]> {
            let mut rng = ChaCha8Rng::seed_from_u64(rep_seed(cfg.base_seed, 0, rep));
            let clean = truth.sample(&theta_true, cfg.n, &mut rng)?;
            let (dirty, _) = contaminate(&clean, &outlier_spec, &mut rng)?;

            let mmd_clean = criterion.solve(&clean, &fit_cfg)?;
            let mmd_dirty = criterion.solve(&dirty, &fit_cfg)?;
            // Keep only the dictionary components the simplex projection
            // left active; density evaluation is then a short sum.
            let active = |theta: &[f64]| -> Vec<(f64, f64)> {
                theta
                    .iter()
                    .zip(&dictionary)
                    .filter(|(&w, _)| w > 0.0)
                    .map(|(&w, c)| (w, c.mean))
                    .collect()
            };
            let mmd_clean_active = active(&mmd_clean.theta_hat.values);
            let mmd_dirty_active = active(&mmd_dirty.theta_hat.values);
            let mixture_density = |parts: &[(f64, f64)], x: f64| -> f64 {
                parts.iter().map(|&(w, m)| w * normal_log_pdf(x, m, 1.0).exp()).sum()
            };

            let scalars = |s: &Sample| -> Vec<f64> { s.iter().map(|p| p[0]).collect() };
            let em_clean = em_mixture(&scalars(&clean), 3, cfg.em_restarts, &mut rng)?;
            let em_dirty = em_mixture(&scalars(&dirty), 3, cfg.em_restarts, &mut rng)?;

            let fresh = truth.sample(&theta_true, cfg.mae_draws, &mut rng)?;
            let mae = |p_hat: &dyn Fn(f64) -> f64| -> f64 {
                fresh.iter().map(|z| (p_true(z[0]) - p_hat(z[0])).abs()).sum::<f64>()
                    / cfg.mae_draws as f64
            };
            Ok([
                mae(&|x| mixture_density(&mmd_clean_active, x)),
                mae(&|x| mixture_density(&mmd_dirty_active, x)),
                mae(&|x| em_clean.density(x)),
                mae(&|x| em_dirty.density(x)),
            ])
        })
        .collect::<Result<_>>()?;

    let seed0 = rep_seed(cfg.base_seed, 0, 0);
    let mut rows = Vec::new();
    let computed: [(&str, usize, &str, f64); 4] = [
        ("mmd_dictionary", 0, "clean", 0.0170),
        ("mmd_dictionary", 1, "outlier", 0.0173),
        ("em", 2, "clean", 0.0186),
        ("em", 3, "outlier", 0.0738),
    ];
    for (method, idx, arm, reference) in computed {
        let maes: Vec<f64> = per_rep.iter().map(|r| r[idx]).collect();
        let (mean, se) = mean_and_stderr(&maes);
        rows.push(
            ResultRow::new(
                "mixture_table",
                method,
                arm,
                if arm == "clean" { 0.0 } else { 1.0 },
                "mae",
                mean,
                se,
                cfg.repetitions,
                seed0,
            )
            .with_reference(reference, "Table 2"),
        );
    }
    for (arm, sweep_value, value, sd) in
        [("clean", 0.0, 0.0218, 0.0172), ("outlier", 1.0, 0.0976, 0.0002)]
    {
        rows.push(
            ResultRow::new(
                "mixture_table", "cavi", arm, sweep_value, "mae", value, sd, 0, seed0,
            )
            .with_reference(value, "Table 2 (reported)"),
        );
    }
    Ok(ExperimentOutput { rows, charts: Vec::new() })
}

// ---------------------------------------------------------------------------
// Dependence demo
// ---------------------------------------------------------------------------

/// Configuration for [`run_dependence_demo`].
#[derive(Debug, Clone, PartialEq)]
pub struct DependenceDemoConfig {
    /// Largest lag t at which ρ̂_t is tabulated.
    pub max_lag: usize,
    /// Independent trajectories per ρ̂_t estimate.
    pub n_traj: usize,
    /// Length of each trajectory.
    pub traj_len: usize,
    /// Sample sizes for the hidden-Markov weight-estimation part.
    pub hmm_sample_sizes: Vec<usize>,
    /// Repetitions per HMM sample size.
    pub repetitions: u32,
    pub base_seed: u64,
}

impl Default for DependenceDemoConfig {
    fn default() -> Self {
        DependenceDemoConfig {
            max_lag: 8,
            n_traj: 64,
            traj_len: 512,
            hmm_sample_sizes: vec![500, 5000],
            repetitions: 10,
            base_seed: 1,
        }
    }
}

/// Dependence diagnostics: the estimated RKHS dependence coefficient
/// ρ̂_t for lags `1..=max_lag` on three stationary processes — i.i.d.
/// `N(0,1)` (where ρ_t = 0 exactly), the AR(1) chain `X_t = 0.5·X_{t−1} + ε_t`
/// with its geometric envelope, and the non-mixing binary half-AR chain
/// with its `L/2^t` envelope — followed by hidden-Markov mixture-weight
/// estimation against the chain's finite-sample bound.
///
/// The HMM has three states with Doeblin minorization constant `c = 0.9`
/// (transition `0.9·uniform + 0.1·identity`, hence uniform stationary
/// weights) and unit-variance Gaussian emissions at the mixture-study
/// means. Weights are re-estimated from each trajectory by exact
/// dictionary descent over the three emission components; rows report
/// `‖θ̂ − π‖₂` per sample size next to `bound_hmm` evaluated at the same
/// n (the bound lives on the MMD scale — the two columns share only the
/// 1/√n decay, which is the point of the comparison).
pub fn run_dependence_demo(cfg: &DependenceDemoConfig) -> Result<ExperimentOutput> {
    check_positive_reps(cfg.repetitions)?;
    if cfg.max_lag == 0 {
        return Err(Error::Config("max_lag must be ≥ 1".into()));
    }
    if cfg.hmm_sample_sizes.is_empty() {
        return Err(Error::Config("hmm_sample_sizes must be nonempty".into()));
    }
    let kernel = Kernel::gaussian(1.0)?;
    let l = kernel.lipschitz_constant();
    let mut rows = Vec::new();

    // --- ρ̂_t tables with analytic envelopes where one exists.
    let ar_coeff = 0.5;
    let e_noise = gaussian_expected_norm(1.0, 1)?;
    let processes: [(&str, DataProcess); 3] = [
        ("iid_gauss", DataProcess::iid(IidLaw::GaussianVec { mean: vec![0.0], sigma: 1.0 })?),
        ("ar1(0.5)", DataProcess::ar1(ar_coeff, 1.0)?),
        ("binary_half_ar", DataProcess::binary_half_ar()),
    ];
    for (axis, (label, process)) in processes.iter().enumerate() {
        let seed = rep_seed(cfg.base_seed, axis as u64, 0);
        for t in 1..=cfg.max_lag {
            let est = rho_hat(process, &kernel, t, cfg.n_traj, cfg.traj_len, seed)?;
            rows.push(ResultRow::new(
                "dependence_demo",
                "rho_hat",
                label,
                t as f64,
                "rho",
                est.value,
                est.stderr,
                cfg.n_traj as u32,
                seed,
            ));
            let envelope = match *label {
                "ar1(0.5)" => Some(ar_rho_envelope(ar_coeff, l, e_noise, t)?),
                "binary_half_ar" => Some(binary_half_ar_rho_envelope(l, t)),
                _ => None,
            };
            if let Some(value) = envelope {
                rows.push(ResultRow::new(
                    "dependence_demo",
                    "theory",
                    label,
                    t as f64,
                    "rho_envelope",
                    value,
                    0.0,
                    0,
                    seed,
                ));
            }
        }
    }

    // --- Hidden-Markov weight estimation vs the finite-sample bound.
    let doeblin_c = 0.9;
    let states = 3;
    let uniform = 1.0 / states as f64;
    let transition: Vec<Vec<f64>> = (0..states)
        .map(|i| {
            (0..states)
                .map(|j| doeblin_c * uniform + if i == j { 1.0 - doeblin_c } else { 0.0 })
                .collect()
        })
        .collect();
    let emissions: Vec<DictionaryComponent> = MIXTURE_TRUE_MEANS
        .iter()
        .map(|&mean| DictionaryComponent { mean, sigma: 1.0 })
        .collect();
    let hmm = DataProcess::hidden_markov(
        transition,
        MIXTURE_TRUE_MEANS.to_vec(),
        vec![1.0; states],
    )?;
    let stationary: Vec<f64> =
        hmm.hmm_stationary().expect("hidden_markov always has a stationary law").to_vec();
    let criterion = DictionaryCriterion::new(&kernel, &emissions)?;
    let fit_cfg = dictionary_fit_config(300);
    for (si, &n) in cfg.hmm_sample_sizes.iter().enumerate() {
        let axis = (processes.len() + si) as u64;
        let per_rep: Vec<f64> = (0..cfg.repetitions as u64)
            .into_par_iter()
            .map(|rep| -> Result<f64> {
                let mut rng = ChaCha8Rng::seed_from_u64(rep_seed(cfg.base_seed, axis, rep));
                let sample = hmm.generate(n, &mut rng)?;
                let fit = criterion.solve(&sample, &fit_cfg)?;
                let err = fit
                    .theta_hat
                    .values
                    .iter()
                    .zip(&stationary)
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>()
                    .sqrt();
                Ok(err)
            })
            .collect::<Result<_>>()?;
        let (mean, se) = mean_and_stderr(&per_rep);
        let axis_seed = rep_seed(cfg.base_seed, axis, 0);
        rows.push(ResultRow::new(
            "dependence_demo",
            "mmd_dictionary",
            "hmm(c=0.9)",
            n as f64,
            "weight_error",
            mean,
            se,
            cfg.repetitions,
            axis_seed,
        ));
        rows.push(ResultRow::new(
            "dependence_demo",
            "theory",
            "hmm(c=0.9)",
            n as f64,
            "bound_hmm",
            bound_hmm(n, doeblin_c, 1.0)?,
            0.0,
            0,
            axis_seed,
        ));
    }

    Ok(ExperimentOutput { rows, charts: Vec::new() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::report::render_csv;

    // Small configurations keep every test in the sub-second range; the
    // full study protocol is exercised by the integration suites.

    #[test]
    fn table1_emits_full_grid_with_references() {
        let cfg = LocationTableConfig { dim: 2, n: 40, eps: 0.2, repetitions: 3, base_seed: 5 };
        let out = run_table1(&cfg).unwrap();
        assert!(out.charts.is_empty());
        // 8 columns × (3 methods × 2 metrics + 1 reported row).
        assert_eq!(out.rows.len(), 8 * 7);
        for row in &out.rows {
            assert!(row.value.is_finite() && row.value >= 0.0, "bad value in {row:?}");
        }
        let reported: Vec<_> =
            out.rows.iter().filter(|r| r.method == "js_gan").collect();
        assert_eq!(reported.len(), 8);
        assert!(reported.iter().all(|r| r.repetitions == 0));
        assert!(reported
            .iter()
            .all(|r| r.paper_ref_id.as_deref() == Some("Table 1 (reported)")));
        let computed_refs = out
            .rows
            .iter()
            .filter(|r| r.metric == "sqrt_mse_normalized" && r.method != "js_gan")
            .count();
        assert_eq!(computed_refs, 24);
        // Euclidean and normalized metrics are consistent: ratio √d.
        let sqrt_d = 2.0f64.sqrt();
        for row in out.rows.iter().filter(|r| r.metric == "sqrt_mse") {
            let partner = out
                .rows
                .iter()
                .find(|r| {
                    r.method == row.method
                        && r.sweep_label == row.sweep_label
                        && r.metric == "sqrt_mse_normalized"
                })
                .unwrap();
            assert!((row.value / sqrt_d - partner.value).abs() < 1e-12);
        }
    }

    #[test]
    fn table1_is_deterministic() {
        let cfg = LocationTableConfig { dim: 2, n: 30, eps: 0.1, repetitions: 2, base_seed: 9 };
        let a = render_csv(&run_table1(&cfg).unwrap().rows).unwrap();
        let b = render_csv(&run_table1(&cfg).unwrap().rows).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn eps_sweep_fits_line_and_draws_chart() {
        let cfg = EpsSweepConfig {
            dim: 2,
            n: 60,
            eps_grid: vec![0.0, 0.1, 0.2],
            repetitions: 3,
            base_seed: 3,
        };
        let out = run_eps_sweep(&cfg).unwrap();
        let metrics: Vec<&str> = out.rows.iter().map(|r| r.metric.as_str()).collect();
        assert_eq!(metrics.iter().filter(|m| **m == "mse_normalized").count(), 3);
        for metric in ["fit_slope", "fit_intercept", "fit_r_squared"] {
            assert!(metrics.contains(&metric), "missing {metric}");
        }
        assert_eq!(out.charts.len(), 1);
        assert_eq!(out.charts[0].0, "error_vs_eps.svg");
        assert!(out.charts[0].1.starts_with("<svg"));
        // Two series in the chart: the curve and the fitted line.
        assert_eq!(out.charts[0].1.matches("<polyline").count(), 2);
    }

    #[test]
    fn eps_sweep_rejects_bad_grids() {
        let mut cfg = EpsSweepConfig { eps_grid: vec![], ..EpsSweepConfig::default() };
        assert!(run_eps_sweep(&cfg).is_err());
        cfg.eps_grid = vec![1.0];
        assert!(run_eps_sweep(&cfg).is_err());
    }

    #[test]
    fn dim_sweep_handles_single_degenerate_dimension() {
        // The d = 1 corner: attacks and fits must all stay well-defined.
        let cfg =
            DimSweepConfig { dims: vec![1], n: 40, eps: 0.1, repetitions: 2, base_seed: 11 };
        let out = run_dim_sweep(&cfg).unwrap();
        assert!(out.rows.iter().all(|r| r.value.is_finite()));
        // No line can be fitted through one dimension; the flatness ratio
        // of a single point is still reported (trivially 1).
        assert!(out.rows.iter().any(|r| r.metric == "max_min_ratio_normalized"));
        assert!(!out.rows.iter().any(|r| r.metric == "fit_slope_vs_sqrt_d"));
        assert_eq!(out.charts.len(), 2);
    }

    #[test]
    fn dim_sweep_emits_summary_rows_and_charts() {
        let cfg =
            DimSweepConfig { dims: vec![2, 4], n: 50, eps: 0.1, repetitions: 2, base_seed: 2 };
        let out = run_dim_sweep(&cfg).unwrap();
        // 2 attacks × 2 dims × 2 metrics + ratio + slope + R².
        assert_eq!(out.rows.len(), 8 + 3);
        let ratio = out
            .rows
            .iter()
            .find(|r| r.metric == "max_min_ratio_normalized")
            .unwrap();
        assert!(ratio.value >= 1.0);
        assert_eq!(out.charts.len(), 2);
        assert!(out.charts.iter().all(|(_, svg)| svg.starts_with("<svg")));
    }

    #[test]
    fn mixture_rows_cover_methods_and_arms() {
        let cfg = MixtureConfig {
            n: 300,
            repetitions: 2,
            outlier_value: 100.0,
            em_restarts: 2,
            mae_draws: 400,
            base_seed: 21,
        };
        let out = run_mixture(&cfg).unwrap();
        assert_eq!(out.rows.len(), 6);
        for method in ["mmd_dictionary", "em", "cavi"] {
            for arm in ["clean", "outlier"] {
                let row = out
                    .rows
                    .iter()
                    .find(|r| r.method == method && r.sweep_label == arm)
                    .unwrap_or_else(|| panic!("missing {method}/{arm}"));
                assert!(row.value.is_finite() && row.value >= 0.0);
                assert!(row.paper_reference_value.is_some());
            }
        }
        let cavi: Vec<_> = out.rows.iter().filter(|r| r.method == "cavi").collect();
        assert!(cavi.iter().all(|r| r.repetitions == 0));
        // Densities integrate to one, so two mixtures can differ by at
        // most 2 in mean absolute density; anything near that signals a
        // broken fit even at this tiny sample size.
        for row in out.rows.iter().filter(|r| r.repetitions > 0) {
            assert!(row.value < 0.5, "implausible MAE {}", row.value);
        }
    }

    #[test]
    fn dependence_demo_tabulates_rho_and_hmm_error() {
        let cfg = DependenceDemoConfig {
            max_lag: 3,
            n_traj: 8,
            traj_len: 64,
            hmm_sample_sizes: vec![100, 200],
            repetitions: 2,
            base_seed: 13,
        };
        let out = run_dependence_demo(&cfg).unwrap();
        let rho_rows = out.rows.iter().filter(|r| r.metric == "rho").count();
        assert_eq!(rho_rows, 3 * 3); // three processes × three lags
        let envelopes: Vec<_> =
            out.rows.iter().filter(|r| r.metric == "rho_envelope").collect();
        assert_eq!(envelopes.len(), 2 * 3); // AR and binary-half-AR only
        assert!(envelopes.iter().all(|r| r.value > 0.0));
        // Envelopes decay with the lag.
        for label in ["ar1(0.5)", "binary_half_ar"] {
            let vals: Vec<f64> = envelopes
                .iter()
                .filter(|r| r.sweep_label == label)
                .map(|r| r.value)
                .collect();
            assert!(vals.windows(2).all(|w| w[1] < w[0]), "{label} envelope not decaying");
        }
        for metric in ["weight_error", "bound_hmm"] {
            assert_eq!(out.rows.iter().filter(|r| r.metric == metric).count(), 2);
        }
        let bound = out
            .rows
            .iter()
            .find(|r| r.metric == "bound_hmm" && r.sweep_value == 100.0)
            .unwrap();
        assert!((bound.value - bound_hmm(100, 0.9, 1.0).unwrap()).abs() < 1e-15);
    }

    #[test]
    fn rep_seed_is_injective_over_small_grids() {
        let mut seen = std::collections::HashSet::new();
        for axis in 0..20 {
            for rep in 0..500 {
                assert!(seen.insert(rep_seed(42, axis, rep)));
            }
        }
    }
}
