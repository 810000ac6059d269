//! Serializable run configuration: the TOML schema behind the CLI.
//!
//! Each CLI subcommand deserializes one top-level type from its
//! `--config` file and hands control back to this module:
//!
//! | Subcommand   | Type               | Entry point               |
//! |--------------|--------------------|---------------------------|
//! | `estimate`   | [`EstimateConfig`] | [`EstimateConfig::run`]   |
//! | `experiment` | [`ExperimentConfig`] | [`ExperimentConfig::run`] |
//! | `rho`        | [`RhoConfig`]      | [`RhoConfig::run`]        |
//! | `bounds`     | [`BoundsConfig`]   | [`BoundsConfig::run`]     |
//!
//! All types reject unknown fields, so a typo fails the parse instead of
//! silently running with a default. The seed is never part of the file —
//! it comes in as the CLI's `--seed` so that the same config can be
//! replicated across seeds.

use std::path::Path;

use serde::Deserialize;

use crate::bounds::{standard_report, BoundReport};
use crate::dependence::{rho_hat, DataProcess, IidLaw, RhoEstimate};
use crate::estimator::{
    exact_gradient_descent_dictionary, exact_gradient_descent_gauss, psga, EstimateResult,
    EstimatorConfig, Init, StepSchedule,
};
use crate::experiments::{
    run_dependence_demo, run_dim_sweep, run_eps_sweep, run_mixture, run_table1,
    DependenceDemoConfig, DimSweepConfig, EpsSweepConfig, ExperimentOutput, LocationTableConfig,
    MixtureConfig,
};
use crate::kernels::Kernel;
use crate::mmd::gauss_crit_grad_lipschitz;
use crate::models::{GenerativeModel, ParamVector};
use crate::{Error, Result, Sample};

/// Read and parse a TOML config file into any of the config types.
pub fn load<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path)?;
    Ok(toml::from_str(&text)?)
}

// ---------------------------------------------------------------------------
// Shared building blocks
// ---------------------------------------------------------------------------

/// Kernel selection. The bandwidth defaults to the study convention
/// `γ = √d` for whatever data dimension the run encounters.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelConfig {
    #[serde(default = "default_kernel_family")]
    pub family: String,
    /// Explicit bandwidth; omit for `√d`.
    pub bandwidth: Option<f64>,
}

fn default_kernel_family() -> String {
    "gaussian".into()
}

impl Default for KernelConfig {
    fn default() -> Self {
        KernelConfig { family: default_kernel_family(), bandwidth: None }
    }
}

impl KernelConfig {
    /// Build the kernel for data of dimension `data_dim`.
    pub fn build(&self, data_dim: usize) -> Result<Kernel> {
        let gamma = self.bandwidth.unwrap_or((data_dim as f64).sqrt());
        match self.family.as_str() {
            "gaussian" => Kernel::gaussian(gamma),
            "laplace" => Kernel::laplace(gamma),
            other => {
                Err(Error::Config(format!("unknown kernel family \"{other}\" (gaussian|laplace)")))
            }
        }
    }
}

/// Generative family selection for `estimate`.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ModelConfig {
    GaussianLocation {
        #[serde(default = "one")]
        sigma: f64,
        dim: usize,
    },
    CauchyLocation,
    UniformTranslation,
    /// Evenly spaced dictionary `N(m, σ²)`, `m ∈ {mean_lo, …, mean_hi}`.
    Dictionary {
        mean_lo: f64,
        mean_hi: f64,
        step: f64,
        #[serde(default = "one")]
        sigma: f64,
    },
}

fn one() -> f64 {
    1.0
}

impl ModelConfig {
    pub fn build(&self) -> Result<GenerativeModel> {
        match *self {
            ModelConfig::GaussianLocation { sigma, dim } => {
                GenerativeModel::gaussian_location(sigma, dim)
            }
            ModelConfig::CauchyLocation => Ok(GenerativeModel::CauchyLocation),
            ModelConfig::UniformTranslation => Ok(GenerativeModel::UniformTranslation),
            ModelConfig::Dictionary { mean_lo, mean_hi, step, sigma } => {
                GenerativeModel::gaussian_dictionary(mean_lo, mean_hi, step, sigma)
            }
        }
    }
}

// ---------------------------------------------------------------------------
// estimate
// ---------------------------------------------------------------------------

/// One estimation run: data from a CSV file, a model, a kernel, and the
/// optimizer settings.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EstimateConfig {
    /// CSV file of observations: one row per point, no header, '.' decimal.
    pub data: String,
    pub model: ModelConfig,
    #[serde(default)]
    pub kernel: KernelConfig,
    #[serde(default)]
    pub optimizer: OptimizerConfig,
}

/// Optimizer settings for `estimate`.
///
/// `algorithm = "psga"` runs the projected stochastic gradient algorithm
/// for any model; `"exact"` runs deterministic descent on the closed-form
/// criterion and is available for the Gaussian location family and the
/// dictionary mixture under a Gaussian kernel.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptimizerConfig {
    #[serde(default = "default_algorithm")]
    pub algorithm: String,
    /// Monte-Carlo batch size M (PSGA only; the study protocol is M = n).
    #[serde(default = "default_m_batch")]
    pub m_batch: usize,
    #[serde(default = "default_t_steps")]
    pub t_steps: usize,
    /// `"inverse_sqrt"` (η_t = scale/√t), `"constant"` (η_t = scale), or
    /// `"auto"` — only for `algorithm = "exact"`, which then picks the
    /// largest provably stable constant step.
    #[serde(default = "default_step_kind")]
    pub step_kind: String,
    #[serde(default = "one")]
    pub step_scale: f64,
    #[serde(default)]
    pub averaging: bool,
    /// Explicit starting parameter; omit for the data-driven start
    /// (coordinatewise median / uniform weights).
    pub init_at: Option<Vec<f64>>,
}

fn default_algorithm() -> String {
    "psga".into()
}
fn default_m_batch() -> usize {
    64
}
fn default_t_steps() -> usize {
    500
}
fn default_step_kind() -> String {
    "auto".into()
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        OptimizerConfig {
            algorithm: default_algorithm(),
            m_batch: default_m_batch(),
            t_steps: default_t_steps(),
            step_kind: default_step_kind(),
            step_scale: 1.0,
            averaging: false,
            init_at: None,
        }
    }
}

impl EstimateConfig {
    /// Run the configured estimation on `data`.
    ///
    /// `seed` drives the PSGA model-sampling stream; the exact paths are
    /// deterministic and ignore it.
    pub fn run(&self, data: &Sample, seed: u64) -> Result<EstimateResult> {
        let model = self.model.build()?;
        let kernel = self.kernel.build(model.data_dim())?;
        let opt = &self.optimizer;

        let init = match &opt.init_at {
            Some(values) => {
                let space = model.param_space();
                let vector = ParamVector::new(values.clone(), space)?;
                Init::At(vector)
            }
            None => Init::DataDriven,
        };
        let step = match (opt.step_kind.as_str(), opt.algorithm.as_str()) {
            ("inverse_sqrt", _) => StepSchedule::InverseSqrt(opt.step_scale),
            ("constant", _) => StepSchedule::Constant(opt.step_scale),
            ("auto", "exact") => match &model {
                GenerativeModel::GaussianLocation { sigma, dim } => StepSchedule::Constant(
                    0.8 / gauss_crit_grad_lipschitz(kernel.gamma, *sigma, *dim)?,
                ),
                // The dictionary solver caps steps at 0.95/λ_max itself.
                GenerativeModel::DictionaryMixture { .. } => StepSchedule::Constant(1.0),
                _ => {
                    return Err(Error::Config(
                        "step_kind \"auto\" needs an exact-path model".into(),
                    ))
                }
            },
            ("auto", _) => StepSchedule::InverseSqrt(opt.step_scale),
            (other, _) => {
                return Err(Error::Config(format!(
                    "unknown step_kind \"{other}\" (inverse_sqrt|constant|auto)"
                )))
            }
        };
        let cfg = EstimatorConfig {
            m_batch: opt.m_batch,
            t_steps: opt.t_steps,
            step,
            averaging: opt.averaging,
            init,
            seed,
            record_trajectory: false,
        };

        match opt.algorithm.as_str() {
            "psga" => psga(&kernel, &model, data, &cfg),
            "exact" => match &model {
                GenerativeModel::GaussianLocation { sigma, .. } => {
                    exact_gradient_descent_gauss(&kernel, *sigma, data, &cfg)
                }
                GenerativeModel::DictionaryMixture { components } => {
                    exact_gradient_descent_dictionary(&kernel, components, data, &cfg)
                }
                _ => Err(Error::Config(
                    "algorithm \"exact\" supports gaussian_location and dictionary models".into(),
                )),
            },
            other => Err(Error::Config(format!("unknown algorithm \"{other}\" (psga|exact)"))),
        }
    }
}

// ---------------------------------------------------------------------------
// experiment
// ---------------------------------------------------------------------------

/// Which experiment to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    Table1,
    EpsSweep,
    DimSweep,
    Mixture,
    DependenceDemo,
}

/// Experiment selection plus optional overrides of the study defaults.
///
/// Every field other than `kind` is optional; a field that does not apply
/// to the chosen kind is rejected rather than ignored, so configs stay
/// honest about what they control.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    pub repetitions: Option<u32>,
    pub n: Option<usize>,
    pub dim: Option<usize>,
    pub eps: Option<f64>,
    pub eps_grid: Option<Vec<f64>>,
    pub dims: Option<Vec<usize>>,
    pub outlier_value: Option<f64>,
    pub em_restarts: Option<usize>,
    pub mae_draws: Option<usize>,
    pub max_lag: Option<usize>,
    pub n_traj: Option<usize>,
    pub traj_len: Option<usize>,
    pub hmm_sample_sizes: Option<Vec<usize>>,
}

impl ExperimentConfig {
    /// Reject fields that the chosen experiment does not read.
    fn check_applicable(&self) -> Result<()> {
        use ExperimentKind::*;
        let fields: [(&str, bool, &[ExperimentKind]); 13] = [
            ("repetitions", self.repetitions.is_some(), &[Table1, EpsSweep, DimSweep, Mixture, DependenceDemo]),
            ("n", self.n.is_some(), &[Table1, EpsSweep, DimSweep, Mixture]),
            ("dim", self.dim.is_some(), &[Table1, EpsSweep]),
            ("eps", self.eps.is_some(), &[Table1, DimSweep]),
            ("eps_grid", self.eps_grid.is_some(), &[EpsSweep]),
            ("dims", self.dims.is_some(), &[DimSweep]),
            ("outlier_value", self.outlier_value.is_some(), &[Mixture]),
            ("em_restarts", self.em_restarts.is_some(), &[Mixture]),
            ("mae_draws", self.mae_draws.is_some(), &[Mixture]),
            ("max_lag", self.max_lag.is_some(), &[DependenceDemo]),
            ("n_traj", self.n_traj.is_some(), &[DependenceDemo]),
            ("traj_len", self.traj_len.is_some(), &[DependenceDemo]),
            ("hmm_sample_sizes", self.hmm_sample_sizes.is_some(), &[DependenceDemo]),
        ];
        for (name, set, applies) in fields {
            if set && !applies.contains(&self.kind) {
                return Err(Error::Config(format!(
                    "field \"{name}\" does not apply to this experiment kind"
                )));
            }
        }
        Ok(())
    }

    /// Run the configured experiment with `base_seed` (the CLI's `--seed`).
    pub fn run(&self, base_seed: u64) -> Result<ExperimentOutput> {
        self.check_applicable()?;
        match self.kind {
            ExperimentKind::Table1 => {
                let defaults = LocationTableConfig::default();
                run_table1(&LocationTableConfig {
                    dim: self.dim.unwrap_or(defaults.dim),
                    n: self.n.unwrap_or(defaults.n),
                    eps: self.eps.unwrap_or(defaults.eps),
                    repetitions: self.repetitions.unwrap_or(defaults.repetitions),
                    base_seed,
                })
            }
            ExperimentKind::EpsSweep => {
                let defaults = EpsSweepConfig::default();
                run_eps_sweep(&EpsSweepConfig {
                    dim: self.dim.unwrap_or(defaults.dim),
                    n: self.n.unwrap_or(defaults.n),
                    eps_grid: self.eps_grid.clone().unwrap_or(defaults.eps_grid),
                    repetitions: self.repetitions.unwrap_or(defaults.repetitions),
                    base_seed,
                })
            }
            ExperimentKind::DimSweep => {
                let defaults = DimSweepConfig::default();
                run_dim_sweep(&DimSweepConfig {
                    dims: self.dims.clone().unwrap_or(defaults.dims),
                    n: self.n.unwrap_or(defaults.n),
                    eps: self.eps.unwrap_or(defaults.eps),
                    repetitions: self.repetitions.unwrap_or(defaults.repetitions),
                    base_seed,
                })
            }
            ExperimentKind::Mixture => {
                let defaults = MixtureConfig::default();
                run_mixture(&MixtureConfig {
                    n: self.n.unwrap_or(defaults.n),
                    repetitions: self.repetitions.unwrap_or(defaults.repetitions),
                    outlier_value: self.outlier_value.unwrap_or(defaults.outlier_value),
                    em_restarts: self.em_restarts.unwrap_or(defaults.em_restarts),
                    mae_draws: self.mae_draws.unwrap_or(defaults.mae_draws),
                    base_seed,
                })
            }
            ExperimentKind::DependenceDemo => {
                let defaults = DependenceDemoConfig::default();
                run_dependence_demo(&DependenceDemoConfig {
                    max_lag: self.max_lag.unwrap_or(defaults.max_lag),
                    n_traj: self.n_traj.unwrap_or(defaults.n_traj),
                    traj_len: self.traj_len.unwrap_or(defaults.traj_len),
                    hmm_sample_sizes: self
                        .hmm_sample_sizes
                        .clone()
                        .unwrap_or(defaults.hmm_sample_sizes),
                    repetitions: self.repetitions.unwrap_or(defaults.repetitions),
                    base_seed,
                })
            }
        }
    }
}

// ---------------------------------------------------------------------------
// rho
// ---------------------------------------------------------------------------

/// Stationary process selection for the `rho` subcommand.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ProcessConfig {
    IidGauss {
        #[serde(default = "default_mean")]
        mean: Vec<f64>,
        #[serde(default = "one")]
        sigma: f64,
    },
    IidUniform {
        #[serde(default = "one_usize")]
        dim: usize,
    },
    IidMixture1d {
        weights: Vec<f64>,
        means: Vec<f64>,
        sigmas: Vec<f64>,
    },
    Ar1 {
        a: f64,
        #[serde(default = "one")]
        noise_sigma: f64,
    },
    VectorAr {
        a: Vec<Vec<f64>>,
        #[serde(default = "one")]
        noise_sigma: f64,
        #[serde(default = "default_burn_in")]
        burn_in: usize,
    },
    BinaryHalfAr,
    Hmm {
        transition: Vec<Vec<f64>>,
        emission_means: Vec<f64>,
        emission_sigmas: Vec<f64>,
    },
}

fn default_mean() -> Vec<f64> {
    vec![0.0]
}
fn one_usize() -> usize {
    1
}
fn default_burn_in() -> usize {
    256
}

impl ProcessConfig {
    pub fn build(&self) -> Result<DataProcess> {
        match self {
            ProcessConfig::IidGauss { mean, sigma } => {
                DataProcess::iid(IidLaw::GaussianVec { mean: mean.clone(), sigma: *sigma })
            }
            ProcessConfig::IidUniform { dim } => DataProcess::iid(IidLaw::StdUniform { dim: *dim }),
            ProcessConfig::IidMixture1d { weights, means, sigmas } => {
                DataProcess::iid(IidLaw::GaussianMixture1d {
                    weights: weights.clone(),
                    means: means.clone(),
                    sigmas: sigmas.clone(),
                })
            }
            ProcessConfig::Ar1 { a, noise_sigma } => DataProcess::ar1(*a, *noise_sigma),
            ProcessConfig::VectorAr { a, noise_sigma, burn_in } => {
                DataProcess::vector_ar(a.clone(), *noise_sigma, *burn_in)
            }
            ProcessConfig::BinaryHalfAr => Ok(DataProcess::binary_half_ar()),
            ProcessConfig::Hmm { transition, emission_means, emission_sigmas } => {
                DataProcess::hidden_markov(
                    transition.clone(),
                    emission_means.clone(),
                    emission_sigmas.clone(),
                )
            }
        }
    }
}

/// Dependence-coefficient estimation over a lag range.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RhoConfig {
    pub process: ProcessConfig,
    #[serde(default)]
    pub kernel: KernelConfig,
    #[serde(default = "default_max_lag")]
    pub max_lag: usize,
    #[serde(default = "default_n_traj")]
    pub n_traj: usize,
    #[serde(default = "default_traj_len")]
    pub traj_len: usize,
}

fn default_max_lag() -> usize {
    8
}
fn default_n_traj() -> usize {
    64
}
fn default_traj_len() -> usize {
    512
}

impl RhoConfig {
    /// Estimate ρ̂_t for `t = 1..=max_lag`.
    pub fn run(&self, seed: u64) -> Result<Vec<RhoEstimate>> {
        if self.max_lag == 0 {
            return Err(Error::Config("max_lag must be ≥ 1".into()));
        }
        let process = self.process.build()?;
        let kernel = self.kernel.build(process.data_dim())?;
        (1..=self.max_lag)
            .map(|t| rho_hat(&process, &kernel, t, self.n_traj, self.traj_len, seed))
            .collect()
    }
}

// ---------------------------------------------------------------------------
// bounds
// ---------------------------------------------------------------------------

/// Inputs for the full table of finite-sample bounds.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundsConfig {
    /// Sample size.
    pub n: usize,
    /// Dependence constant Σ (0 for i.i.d. data).
    #[serde(default)]
    pub sigma_coef: f64,
    /// Dependence constant Γ (0 when no almost-sure control is available).
    #[serde(default)]
    pub gamma_coef: f64,
    /// Contamination rate.
    #[serde(default)]
    pub eps: f64,
    /// High-probability level δ.
    #[serde(default = "default_delta")]
    pub delta: f64,
    /// Gaussian model scale.
    #[serde(default = "one")]
    pub sigma: f64,
    /// Ambient dimension.
    #[serde(default = "one_usize")]
    pub d: usize,
    /// Kernel bandwidth; omit for `√d`.
    pub gamma: Option<f64>,
}

fn default_delta() -> f64 {
    0.05
}

impl BoundsConfig {
    /// Evaluate every applicable bound.
    pub fn run(&self) -> Result<Vec<BoundReport>> {
        let gamma = self.gamma.unwrap_or((self.d as f64).sqrt());
        standard_report(
            self.n,
            self.sigma_coef,
            self.gamma_coef,
            self.eps,
            self.delta,
            self.sigma,
            self.d,
            gamma,
        )
    }
}
