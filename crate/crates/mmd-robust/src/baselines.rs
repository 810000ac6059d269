//! Comparator estimators and evaluation metrics for the simulation study.
//!
//! Location comparators: arithmetic mean, coordinatewise median, geometric
//! median (Weiszfeld), median-of-means. Density comparator: EM for a
//! univariate Gaussian mixture with unit component variance. Metrics:
//! root-mean-squared estimation error over repetitions and mean absolute
//! density error over fresh draws from the truth.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::models::{log_sum_exp, normal_log_pdf};
use crate::{mean_and_stderr, Error, Result, Sample};

/// Movement tolerance at which Weiszfeld iteration is declared converged.
pub const WEISZFELD_TOL: f64 = 1e-9;
/// Iteration cap for Weiszfeld.
pub const WEISZFELD_MAX_ITER: usize = 10_000;
/// EM stops once the log-likelihood gain per iteration drops below this.
pub const EM_TOL: f64 = 1e-8;
/// EM iteration cap per restart.
pub const EM_MAX_ITER: usize = 500;

/// Arithmetic mean of the sample (the Gaussian MLE).
pub fn mean_estimator(data: &Sample) -> Vec<f64> {
    let d = data.dim();
    let mut out = vec![0.0; d];
    for p in data.iter() {
        for (o, &v) in out.iter_mut().zip(p) {
            *o += v;
        }
    }
    let n = data.len() as f64;
    for o in &mut out {
        *o /= n;
    }
    out
}

/// Per-coordinate median; for even `n` the two central order statistics
/// are averaged.
pub fn coordinatewise_median(data: &Sample) -> Vec<f64> {
    let n = data.len();
    let d = data.dim();
    let mut out = Vec::with_capacity(d);
    let mut column = vec![0.0; n];
    for j in 0..d {
        for (i, p) in data.iter().enumerate() {
            column[i] = p[j];
        }
        column.sort_by(|a, b| a.total_cmp(b));
        out.push(if n % 2 == 1 {
            column[n / 2]
        } else {
            0.5 * (column[n / 2 - 1] + column[n / 2])
        });
    }
    out
}

/// Output of the Weiszfeld iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct GeometricMedian {
    /// Last iterate (the minimizer when `converged`).
    pub point: Vec<f64>,
    /// Whether the movement tolerance was reached within the iteration cap.
    pub converged: bool,
    /// Iterations actually performed.
    pub iterations: usize,
}

/// Geometric median — the minimizer of `m ↦ Σᵢ ‖xᵢ − m‖` — via Weiszfeld
/// iteration started at the coordinatewise median.
///
/// Iterates coinciding with data points use the Vardi–Zhang modified
/// update, which also recognizes when such a point is itself the
/// minimizer. On non-convergence the last iterate is returned with
/// `converged: false`.
pub fn geometric_median(data: &Sample, tol: f64, max_iter: usize) -> GeometricMedian {
    let mut m = coordinatewise_median(data);
    let d = data.dim();
    let mut next = vec![0.0; d];
    for it in 0..max_iter {
        // Weighted-mean update over points away from the iterate, plus the
        // multiplicity of points sitting exactly on it.
        let mut wsum = 0.0;
        next.iter_mut().for_each(|v| *v = 0.0);
        let mut coincident = 0usize;
        for p in data.iter() {
            let dist = p.iter().zip(&m).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
            if dist < 1e-14 {
                coincident += 1;
                continue;
            }
            let w = 1.0 / dist;
            wsum += w;
            for (o, &v) in next.iter_mut().zip(p) {
                *o += w * v;
            }
        }
        if wsum == 0.0 {
            // All points coincide with the iterate: it is the minimizer.
            return GeometricMedian { point: m, converged: true, iterations: it };
        }
        next.iter_mut().for_each(|v| *v /= wsum);
        if coincident > 0 {
            // Vardi–Zhang: r is the norm of the subgradient contribution of
            // the non-coincident points; multiplicity η can absorb it.
            let r = {
                let mut s = 0.0;
                for (a, b) in next.iter().zip(&m) {
                    s += (a - b) * (a - b) * wsum * wsum;
                }
                s.sqrt()
            };
            let eta = coincident as f64;
            if r <= eta {
                return GeometricMedian { point: m, converged: true, iterations: it };
            }
            let step = 1.0 - eta / r;
            for (nv, &mv) in next.iter_mut().zip(&m) {
                *nv = mv + step * (*nv - mv);
            }
        }
        let movement = next
            .iter()
            .zip(&m)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt();
        std::mem::swap(&mut m, &mut next);
        if movement <= tol {
            return GeometricMedian { point: m, converged: true, iterations: it + 1 };
        }
    }
    GeometricMedian { point: m, converged: false, iterations: max_iter }
}

/// Default block count for median-of-means: `⌈√n⌉`.
pub fn mom_default_blocks(n: usize) -> usize {
    (n as f64).sqrt().ceil() as usize
}

/// Median-of-means: shuffle the data into `n_blocks` (near-)equal blocks,
/// average within each block, then take the coordinatewise median of the
/// block means.
pub fn median_of_means<R: Rng>(data: &Sample, n_blocks: usize, rng: &mut R) -> Result<Vec<f64>> {
    let n = data.len();
    if n_blocks == 0 || n_blocks > n {
        return Err(Error::InvalidParameter {
            name: "n_blocks",
            reason: format!("need 1 ≤ n_blocks ≤ n = {n}, got {n_blocks}"),
        });
    }
    let d = data.dim();
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    // Spread the remainder over the first `n % n_blocks` blocks so block
    // sizes differ by at most one.
    let base = n / n_blocks;
    let extra = n % n_blocks;
    let mut block_means = Vec::with_capacity(n_blocks * d);
    let mut start = 0usize;
    for b in 0..n_blocks {
        let size = base + usize::from(b < extra);
        let mut acc = vec![0.0; d];
        for &i in &order[start..start + size] {
            for (o, &v) in acc.iter_mut().zip(data.point(i)) {
                *o += v;
            }
        }
        for o in &mut acc {
            *o /= size as f64;
        }
        block_means.extend_from_slice(&acc);
        start += size;
    }
    Ok(coordinatewise_median(&Sample::from_flat(block_means, d)?))
}

/// A fitted univariate Gaussian mixture with unit component variance.
#[derive(Debug, Clone, PartialEq)]
pub struct MixtureFit {
    /// Component weights (on the simplex).
    pub weights: Vec<f64>,
    /// Component means.
    pub means: Vec<f64>,
    /// Log-likelihood of the data under the fit.
    pub loglik: f64,
}

impl MixtureFit {
    /// Mixture density at `x`.
    pub fn density(&self, x: f64) -> f64 {
        let logs: Vec<f64> = self
            .weights
            .iter()
            .zip(&self.means)
            .map(|(&w, &m)| w.max(f64::MIN_POSITIVE).ln() + normal_log_pdf(x, m, 1.0))
            .collect();
        log_sum_exp(&logs).exp()
    }
}

/// EM for a univariate Gaussian mixture with the component variance fixed
/// at 1; weights and means are free. The best of `restarts` random
/// initializations (means drawn from the data) is returned.
pub fn em_mixture<R: Rng>(
    data: &[f64],
    k_components: usize,
    restarts: usize,
    rng: &mut R,
) -> Result<MixtureFit> {
    if data.len() < k_components {
        return Err(Error::NotEnoughPoints { needed: k_components, got: data.len() });
    }
    if k_components == 0 || restarts == 0 {
        return Err(Error::InvalidParameter {
            name: "em_mixture",
            reason: "k_components and restarts must be positive".into(),
        });
    }
    // Per-restart seeds drawn up front so restarts can run in parallel yet
    // reproduce exactly.
    let seeds: Vec<u64> = (0..restarts).map(|_| rng.random()).collect();
    let fits: Vec<(MixtureFit, Vec<f64>)> = seeds
        .into_par_iter()
        .map(|seed| em_single_run(data, k_components, &mut ChaCha8Rng::seed_from_u64(seed)))
        .collect();
    // Ties broken by restart order for determinism.
    let best = fits
        .into_iter()
        .max_by(|(a, _), (b, _)| a.loglik.total_cmp(&b.loglik))
        .expect("restarts ≥ 1");
    Ok(best.0)
}

/// One EM run from a random initialization; returns the fit and the
/// per-iteration log-likelihood trace (nondecreasing by the EM guarantee).
pub(crate) fn em_single_run<R: Rng>(
    data: &[f64],
    k: usize,
    rng: &mut R,
) -> (MixtureFit, Vec<f64>) {
    let n = data.len();
    // Naive random restarts: means i.i.d. uniform over the observed data
    // range. Spreading initial means over the full range (rather than onto
    // data points) keeps restarts genuinely diverse — and carries the
    // classical EM fragility that a gross isolated outlier stretches the
    // init range, so some restarts plant a component next to the outlier
    // and converge with it captured.
    let (lo, hi) = data
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| (lo.min(x), hi.max(x)));
    let mut means: Vec<f64> = (0..k).map(|_| rng.random_range(lo..=hi)).collect();
    let mut weights = vec![1.0 / k as f64; k];
    let mut resp = vec![0.0; n * k]; // responsibilities, row per data point
    let mut trace = Vec::new();
    let mut last_ll = f64::NEG_INFINITY;
    for _ in 0..EM_MAX_ITER {
        // E-step: responsibilities and the log-likelihood in one pass.
        let mut ll = 0.0;
        for (i, &x) in data.iter().enumerate() {
            let row = &mut resp[i * k..(i + 1) * k];
            for j in 0..k {
                row[j] = weights[j].max(f64::MIN_POSITIVE).ln() + normal_log_pdf(x, means[j], 1.0);
            }
            let denom = log_sum_exp(row);
            ll += denom;
            for r in row.iter_mut() {
                *r = (*r - denom).exp();
            }
        }
        trace.push(ll);
        if ll - last_ll < EM_TOL && ll.is_finite() {
            break;
        }
        last_ll = ll;
        // M-step with unit variance: weights and means only.
        for j in 0..k {
            let nj: f64 = (0..n).map(|i| resp[i * k + j]).sum();
            if nj < 1e-10 {
                // Component starved of responsibility: reinitialize it at a
                // random data point with a small weight.
                means[j] = data[rng.random_range(0..n)];
                weights[j] = 1.0 / n as f64;
                continue;
            }
            means[j] = (0..n).map(|i| resp[i * k + j] * data[i]).sum::<f64>() / nj;
            weights[j] = nj / n as f64;
        }
        let wsum: f64 = weights.iter().sum();
        for w in &mut weights {
            *w /= wsum;
        }
    }
    let loglik = *trace.last().expect("at least one EM iteration");
    (MixtureFit { weights, means, loglik }, trace)
}

/// Mean absolute density error `(1/N) Σ |p_true(zₗ) − p_hat(zₗ)|` over
/// `n_draws` fresh draws `zₗ` from the true law.
pub fn mae_density<R: Rng>(
    sample_true: impl FnMut(&mut R) -> f64,
    p_true: impl Fn(f64) -> f64,
    p_hat: impl Fn(f64) -> f64,
    n_draws: usize,
    rng: &mut R,
) -> f64 {
    let mut sampler = sample_true;
    let mut acc = 0.0;
    for _ in 0..n_draws {
        let z = sampler(rng);
        acc += (p_true(z) - p_hat(z)).abs();
    }
    acc / n_draws as f64
}

/// `√(mean over repetitions of ‖θ̂ − θ₀‖²)` with the Euclidean norm.
pub fn sqrt_mse(estimates: &[Vec<f64>], truth: &[f64]) -> Result<f64> {
    if estimates.is_empty() {
        return Err(Error::NotEnoughPoints { needed: 1, got: 0 });
    }
    let mut acc = 0.0;
    for est in estimates {
        if est.len() != truth.len() {
            return Err(Error::DimensionMismatch(truth.len(), est.len()));
        }
        acc += est.iter().zip(truth).map(|(a, b)| (a - b) * (a - b)).sum::<f64>();
    }
    Ok((acc / estimates.len() as f64).sqrt())
}

/// Dimension-normalized variant `√(MSE/d)`, comparable across ambient
/// dimensions (the per-coordinate error scale).
pub fn sqrt_mse_normalized(estimates: &[Vec<f64>], truth: &[f64]) -> Result<f64> {
    Ok(sqrt_mse(estimates, truth)? / (truth.len() as f64).sqrt())
}

/// Mean and standard error of per-repetition scalar metrics.
pub fn summarize(values: &[f64]) -> (f64, f64) {
    mean_and_stderr(values)
}
