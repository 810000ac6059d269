//! Empirical and closed-form MMD² computation.
//!
//! Everything reduces to the kernel expansion of the squared distance,
//!
//! ```text
//! D_k²(P, Q) = E k(X, X') − 2 E k(X, Y) + E k(Y, Y'),
//! ```
//!
//! so the empirical estimators are Gram-matrix sums:
//!
//! * [`mmd2_vstat`] — all pairs including the diagonal. Nonnegative (it is
//!   the squared RKHS norm of the difference of empirical embeddings) but
//!   biased upward by `(1−⟨μ_P,μ_P⟩)/n + (1−⟨μ_Q,μ_Q⟩)/m`.
//! * [`mmd2_ustat`] / [`mmd2_ustat_model_term`] — distinct pairs only,
//!   unbiased, possibly slightly negative.
//! * [`crit`] — the optimization objective `E k(Y,Y') − (2/n)Σᵢ E k(Xᵢ, Y)`
//!   with the θ-independent data-data term dropped. Never clamped: only
//!   criterion *differences* are meaningful.
//!
//! For the Gaussian kernel and Gaussian distributions all of these have
//! closed forms ([`closed_form_gauss_mmd2`], [`gauss_embedding_inner`],
//! [`gauss_kernel_convolution`], [`exact_gauss_crit`]), which serve both as
//! test oracles for the Monte-Carlo paths and as a fast exact-gradient route
//! for the Gaussian location model.
//!
//! # Determinism
//!
//! Gram sums are accumulated per row in index order and the row sums are
//! added in index order, in the serial and the parallel path alike — the
//! result is bit-identical for a fixed input order regardless of thread
//! count. Reordering the input points changes the value only within
//! floating-point associativity noise (≲1e−12 at these scales).

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::dependence::DataProcess;
use crate::kernels::{squared_distance, Kernel};
use crate::{mean_and_stderr, Error, Result, Sample};

/// Kernel-evaluation count above which Gram sums fan out over the rayon
/// pool. The reduction order is row-deterministic either way.
const PARALLEL_PAIRS: usize = 1 << 22;

/// Proxy-sample size multiplier used by [`empirical_mmd_to_truth`]: the
/// unknown population is stood in for by an independent sample 20× the
/// data size.
pub const TRUTH_PROXY_FACTOR: usize = 20;

/// A squared MMD together with its distance-scale square root.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MmdValue {
    /// The squared-MMD estimate. U-statistic values may be slightly
    /// negative; V-statistic values are nonnegative.
    pub squared: f64,
    /// `sqrt(max(squared, 0))` — clamping happens only here, at the
    /// conversion to a distance.
    pub value: f64,
}

impl MmdValue {
    pub fn from_squared(squared: f64) -> Self {
        Self { squared, value: squared.max(0.0).sqrt() }
    }
}

/// `Σᵢ Σⱼ k(xᵢ, yⱼ)` over two point sets, row sums in index order.
pub(crate) fn gram_cross_sum(k: &Kernel, x: &Sample, y: &Sample) -> f64 {
    let row = |xi: &[f64]| -> f64 {
        let mut acc = 0.0;
        for yj in y.iter() {
            acc += k.eval_dist2(squared_distance(xi, yj));
        }
        acc
    };
    let rows: Vec<f64> = if x.len() * y.len() >= PARALLEL_PAIRS {
        (0..x.len()).into_par_iter().map(|i| row(x.point(i))).collect()
    } else {
        x.iter().map(row).collect()
    };
    rows.iter().sum()
}

/// `Σ_{i<j} k(xᵢ, xⱼ)` — the strict upper triangle, row sums in index order.
pub(crate) fn gram_upper_sum(k: &Kernel, x: &Sample) -> f64 {
    let n = x.len();
    let row = |i: usize| -> f64 {
        let xi = x.point(i);
        let mut acc = 0.0;
        for j in (i + 1)..n {
            acc += k.eval_dist2(squared_distance(xi, x.point(j)));
        }
        acc
    };
    let rows: Vec<f64> = if n * n / 2 >= PARALLEL_PAIRS {
        (0..n).into_par_iter().map(row).collect()
    } else {
        (0..n).map(row).collect()
    };
    rows.iter().sum()
}

fn check_dims(x: &Sample, y: &Sample) -> Result<()> {
    if x.dim() != y.dim() {
        return Err(Error::DimensionMismatch(x.dim(), y.dim()));
    }
    Ok(())
}

/// V-statistic estimate of `D_k²(P̂_X, P̂_Y)`: all pairs, diagonal included.
///
/// Radial kernels have `k(x,x) = 1` exactly, so the within-sample sums are
/// assembled as `n + 2·Σ_{i<j} k` rather than by a full double loop.
/// The result is mathematically a squared norm; the (at most ulp-scale)
/// negative values floating point can produce are clamped to zero.
pub fn mmd2_vstat(k: &Kernel, x: &Sample, y: &Sample) -> Result<MmdValue> {
    check_dims(x, y)?;
    let n = x.len() as f64;
    let m = y.len() as f64;
    let sxx = n + 2.0 * gram_upper_sum(k, x);
    let syy = m + 2.0 * gram_upper_sum(k, y);
    let sxy = gram_cross_sum(k, x, y);
    let raw = sxx / (n * n) - 2.0 * sxy / (n * m) + syy / (m * m);
    Ok(MmdValue::from_squared(raw.max(0.0)))
}

/// Unbiased estimate of `E_{X,X'∼P̂}[k(X, X')]` over distinct pairs:
/// `(1/(M(M−1))) Σ_{j≠ℓ} k(yⱼ, y_ℓ)`.
pub fn mmd2_ustat_model_term(k: &Kernel, y: &Sample) -> Result<f64> {
    let m = y.len();
    if m < 2 {
        return Err(Error::NotEnoughPoints { needed: 2, got: m });
    }
    Ok(2.0 * gram_upper_sum(k, y) / (m as f64 * (m - 1) as f64))
}

/// U-statistic estimate of `D_k²(P, Q)`: distinct pairs within each sample,
/// all pairs across. Unbiased; `squared` may be slightly negative.
pub fn mmd2_ustat(k: &Kernel, x: &Sample, y: &Sample) -> Result<MmdValue> {
    check_dims(x, y)?;
    let xx = mmd2_ustat_model_term(k, x)?;
    let yy = mmd2_ustat_model_term(k, y)?;
    let xy = gram_cross_sum(k, x, y) / (x.len() as f64 * y.len() as f64);
    Ok(MmdValue::from_squared(xx - 2.0 * xy + yy))
}

/// The minimum-MMD optimization criterion evaluated with a model sample:
///
/// ```text
/// Crit(θ) ≈ (1/(M(M−1))) Σ_{j≠ℓ} k(Yⱼ, Y_ℓ)  −  (2/(nM)) Σᵢ Σⱼ k(Xᵢ, Yⱼ)
/// ```
///
/// This equals the squared MMD up to the data-only constant
/// `(1/n²)Σ k(Xᵢ, Xⱼ)`, which does not depend on θ and is dropped. The
/// value is **not** clamped — it is routinely negative, and only
/// differences across θ are meaningful.
pub fn crit(k: &Kernel, model_sample: &Sample, data: &Sample) -> Result<f64> {
    check_dims(model_sample, data)?;
    let model_term = mmd2_ustat_model_term(k, model_sample)?;
    let mixed = gram_cross_sum(k, data, model_sample);
    Ok(model_term - 2.0 * mixed / (data.len() as f64 * model_sample.len() as f64))
}

fn check_gauss_params(gamma: f64, sigma: f64) -> Result<()> {
    if !(gamma.is_finite() && gamma > 0.0) {
        return Err(Error::InvalidParameter {
            name: "gamma",
            reason: format!("bandwidth must be positive, got {gamma}"),
        });
    }
    if !(sigma.is_finite() && sigma > 0.0) {
        return Err(Error::InvalidParameter {
            name: "sigma",
            reason: format!("scale must be positive, got {sigma}"),
        });
    }
    Ok(())
}

/// Inner product of Gaussian mean embeddings under the Gaussian kernel:
///
/// ```text
/// ⟨μ_{N(θᵢ,σᵢ²I)}, μ_{N(θⱼ,σⱼ²I)}⟩ = (γ²/(γ²+2s²))^{d/2} exp(−‖θᵢ−θⱼ‖²/(γ²+2s²)),
/// s² = σᵢ² + σⱼ².
/// ```
///
/// Derived coordinatewise from `E exp(−Z²/γ²)` for `Z ∼ N(m, s²)`, the
/// Gaussian convolution identity behind all the closed forms here.
pub fn gauss_embedding_inner(
    gamma: f64,
    sigma_i: f64,
    theta_i: &[f64],
    sigma_j: f64,
    theta_j: &[f64],
) -> Result<f64> {
    check_gauss_params(gamma, sigma_i)?;
    check_gauss_params(gamma, sigma_j)?;
    if theta_i.len() != theta_j.len() {
        return Err(Error::DimensionMismatch(theta_i.len(), theta_j.len()));
    }
    let d = theta_i.len() as f64;
    let denom = gamma * gamma + 2.0 * (sigma_i * sigma_i + sigma_j * sigma_j);
    let scale = (gamma * gamma / denom).powf(d / 2.0);
    Ok(scale * (-squared_distance(theta_i, theta_j) / denom).exp())
}

/// Closed-form squared MMD between two Gaussians with a common scale:
///
/// ```text
/// D_k²(N(θ,σ²I_d), N(θ',σ²I_d)) = 2 (γ²/(4σ²+γ²))^{d/2} [1 − exp(−‖θ−θ'‖²/(4σ²+γ²))]
/// ```
pub fn closed_form_gauss_mmd2(gamma: f64, sigma: f64, theta: &[f64], theta_prime: &[f64]) -> Result<f64> {
    check_gauss_params(gamma, sigma)?;
    if theta.len() != theta_prime.len() {
        return Err(Error::DimensionMismatch(theta.len(), theta_prime.len()));
    }
    let d = theta.len() as f64;
    let denom = 4.0 * sigma * sigma + gamma * gamma;
    let scale = (gamma * gamma / denom).powf(d / 2.0);
    Ok(2.0 * scale * (1.0 - (-squared_distance(theta, theta_prime) / denom).exp()))
}

/// Gaussian-kernel convolution against a Gaussian location model:
///
/// ```text
/// E_{Y∼N(θ,σ²I_d)} k(x, Y) = (γ²/(2σ²+γ²))^{d/2} exp(−‖x−θ‖²/(2σ²+γ²))
/// ```
pub fn gauss_kernel_convolution(gamma: f64, sigma: f64, x: &[f64], theta: &[f64]) -> Result<f64> {
    check_gauss_params(gamma, sigma)?;
    if x.len() != theta.len() {
        return Err(Error::DimensionMismatch(x.len(), theta.len()));
    }
    let d = x.len() as f64;
    let denom = 2.0 * sigma * sigma + gamma * gamma;
    let scale = (gamma * gamma / denom).powf(d / 2.0);
    Ok(scale * (-squared_distance(x, theta) / denom).exp())
}

/// Exact criterion for the Gaussian location model on empirical data:
/// `Crit(θ) = (γ²/(4σ²+γ²))^{d/2} − (2/n) Σᵢ E_{Y∼N(θ,σ²I)} k(Xᵢ, Y)`,
/// with both expectations in closed form (no Monte Carlo).
pub fn exact_gauss_crit(gamma: f64, sigma: f64, theta: &[f64], data: &Sample) -> Result<f64> {
    check_gauss_params(gamma, sigma)?;
    if theta.len() != data.dim() {
        return Err(Error::DimensionMismatch(theta.len(), data.dim()));
    }
    let d = theta.len() as f64;
    let model_term = (gamma * gamma / (4.0 * sigma * sigma + gamma * gamma)).powf(d / 2.0);
    let denom = 2.0 * sigma * sigma + gamma * gamma;
    let scale = (gamma * gamma / denom).powf(d / 2.0);
    let mut mixed = 0.0;
    for x in data.iter() {
        mixed += scale * (-squared_distance(x, theta) / denom).exp();
    }
    Ok(model_term - 2.0 * mixed / data.len() as f64)
}

/// Exact gradient of [`exact_gauss_crit`] in θ:
///
/// ```text
/// ∇Crit(θ) = (4/(n(2σ²+γ²))) (γ²/(2σ²+γ²))^{d/2} Σᵢ (θ−Xᵢ) exp(−‖θ−Xᵢ‖²/(2σ²+γ²))
/// ```
pub fn exact_gauss_crit_grad(gamma: f64, sigma: f64, theta: &[f64], data: &Sample) -> Result<Vec<f64>> {
    check_gauss_params(gamma, sigma)?;
    let d = data.dim();
    if theta.len() != d {
        return Err(Error::DimensionMismatch(theta.len(), d));
    }
    let denom = 2.0 * sigma * sigma + gamma * gamma;
    let scale = (gamma * gamma / denom).powf(d as f64 / 2.0);
    let mut grad = vec![0.0; d];
    for x in data.iter() {
        let w = scale * (-squared_distance(x, theta) / denom).exp();
        for c in 0..d {
            grad[c] += (theta[c] - x[c]) * w;
        }
    }
    let factor = 4.0 / (data.len() as f64 * denom);
    for g in grad.iter_mut() {
        *g *= factor;
    }
    Ok(grad)
}

/// Lipschitz constant of [`exact_gauss_crit_grad`] as a map of θ:
///
/// ```text
/// L = (4/s)·(γ²/s)^{d/2},   s = 2σ² + γ².
/// ```
///
/// Each summand `v ↦ v·e^{−‖v‖²/s}` (with `v = θ − Xᵢ`) has Jacobian
/// `e^{−‖v‖²/s}(I − 2vvᵀ/s)`, whose operator norm `e^{−u}·max(1, |1−2u|)`
/// (`u = ‖v‖²/s`) peaks at 1 when `v = 0`. Gradient descent on the exact
/// criterion with a constant step below `1/L` can therefore never
/// overshoot, whatever the data.
pub fn gauss_crit_grad_lipschitz(gamma: f64, sigma: f64, dim: usize) -> Result<f64> {
    check_gauss_params(gamma, sigma)?;
    if dim == 0 {
        return Err(Error::InvalidParameter {
            name: "dim",
            reason: "dimension must be positive".into(),
        });
    }
    let s = 2.0 * sigma * sigma + gamma * gamma;
    Ok((4.0 / s) * (gamma * gamma / s).powf(dim as f64 / 2.0))
}

/// Mean (with standard error) of `D_k(P̂_n, P⁰)` over repeated draws from a
/// process, the empirical side of the generalization bounds.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalRate {
    pub mean: f64,
    pub stderr: f64,
    pub reps: usize,
}

/// Estimate `E[D_k(P̂_n, P⁰)]` by simulation.
///
/// `P⁰` (the stationary marginal of `proc`) has no finite representation,
/// so each repetition stands it in with a second, independent sample of
/// size [`TRUTH_PROXY_FACTOR`]`·n` from the same process. By the triangle
/// inequality the proxy inflates the estimate by at most
/// `E D_k(Q̂_N, P⁰) ≤ √((1+2Σ)/N)`, which acceptance tolerances account
/// for as explicit slack.
pub fn empirical_mmd_to_truth(
    k: &Kernel,
    proc: &DataProcess,
    n: usize,
    reps: usize,
    seed: u64,
) -> Result<EmpiricalRate> {
    if n < 2 {
        return Err(Error::NotEnoughPoints { needed: 2, got: n });
    }
    if reps < 1 {
        return Err(Error::InvalidParameter { name: "reps", reason: "need at least one repetition".into() });
    }
    let values: Vec<f64> = (0..reps)
        .into_par_iter()
        .map(|rep| -> Result<f64> {
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(rep as u64));
            let data = proc.generate(n, &mut rng)?;
            let proxy = proc.generate(TRUTH_PROXY_FACTOR * n, &mut rng)?;
            Ok(mmd2_vstat(k, &data, &proxy)?.value)
        })
        .collect::<Result<_>>()?;
    let (mean, stderr) = mean_and_stderr(&values);
    Ok(EmpiricalRate { mean, stderr, reps })
}
