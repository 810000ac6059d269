//! Stationary data processes and the RKHS dependence coefficient ρ_t.
//!
//! The estimation theory served by this crate replaces classical mixing
//! assumptions with a covariance computed in the kernel's feature space:
//!
//! ```text
//! ρ_t = | E ⟨ k(X_t,·) − μ_{P⁰}, k(X_0,·) − μ_{P⁰} ⟩ |
//!     = | E k(X_0, X_t) − E k(X, X') |        (X ⊥ X', both ∼ P⁰)
//! ```
//!
//! The second form — a lag-t kernel autocovariance — is what
//! [`rho_hat`] estimates by Monte Carlo: lagged pairs from one trajectory
//! against index-matched pairs across two independent trajectories.
//!
//! Generators cover the cases studied in the accompanying experiments:
//!
//! * [`DataProcess::Iid`] — the baseline with ρ_t = 0 at every lag;
//! * [`DataProcess::VectorAr`] — `X_{t+1} = A X_t + ε_{t+1}` with
//!   ‖A‖ < 1, where ρ_t decays geometrically with explicit constants
//!   ([`ar_sigma_gamma`], [`ar_rho_envelope`]);
//! * [`DataProcess::BinaryHalfAr`] — `X_{t+1} = (X_t + η_{t+1})/2` with
//!   fair Bernoulli digits η: **not** β-mixing (the σ-algebra of the past
//!   determines the binary expansion), yet ρ_t ≤ L/2^t, the motivating
//!   example for the coefficient;
//! * [`DataProcess::HiddenMarkov`] — a finite-state chain with Gaussian
//!   emissions, the dependent extension of the mixture-estimation problem.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::kernels::Kernel;
use crate::{Error, Result, Sample};

/// Marginal laws available to the i.i.d. process.
#[derive(Debug, Clone, PartialEq)]
pub enum IidLaw {
    /// `N(mean, σ²I_d)`.
    GaussianVec { mean: Vec<f64>, sigma: f64 },
    /// Uniform on `[0,1]^d`.
    StdUniform { dim: usize },
    /// One-dimensional Gaussian mixture Σ wᵢ N(mᵢ, sᵢ²).
    GaussianMixture1d {
        weights: Vec<f64>,
        means: Vec<f64>,
        sigmas: Vec<f64>,
    },
}

impl IidLaw {
    fn dim(&self) -> usize {
        match self {
            IidLaw::GaussianVec { mean, .. } => mean.len(),
            IidLaw::StdUniform { dim } => *dim,
            IidLaw::GaussianMixture1d { .. } => 1,
        }
    }

    fn draw_into<R: Rng>(&self, out: &mut Vec<f64>, rng: &mut R) {
        match self {
            IidLaw::GaussianVec { mean, sigma } => {
                for &m in mean {
                    let z: f64 = rng.sample(rand_distr::StandardNormal);
                    out.push(m + sigma * z);
                }
            }
            IidLaw::StdUniform { dim } => {
                for _ in 0..*dim {
                    out.push(rng.random());
                }
            }
            IidLaw::GaussianMixture1d { weights, means, sigmas } => {
                let total: f64 = weights.iter().sum();
                let mut u: f64 = rng.random::<f64>() * total;
                let mut idx = weights.len() - 1;
                for (i, &w) in weights.iter().enumerate() {
                    if u < w {
                        idx = i;
                        break;
                    }
                    u -= w;
                }
                let z: f64 = rng.sample(rand_distr::StandardNormal);
                out.push(means[idx] + sigmas[idx] * z);
            }
        }
    }
}

/// A stationary (or burn-in-approximately-stationary) data generator.
#[derive(Debug, Clone, PartialEq)]
pub enum DataProcess {
    /// Independent draws from a fixed marginal law.
    Iid(IidLaw),
    /// `X_{t+1} = A X_t + ε_{t+1}`, ε ∼ N(0, σ²I_d), started at 0 and run
    /// through `burn_in` warm-up steps.
    VectorAr {
        /// Row-major d×d coefficient matrix.
        coeff: Vec<f64>,
        dim: usize,
        noise_sigma: f64,
        burn_in: usize,
        /// Cached operator norm ‖A‖ (largest singular value), < 1.
        op_norm: f64,
    },
    /// `X_{t+1} = (X_t + η_{t+1})/2`, η ∼ Bernoulli(1/2), X₀ ∼ U[0,1]
    /// (already exactly stationary; burn-in kept for uniformity).
    BinaryHalfAr { burn_in: usize },
    /// Finite-state stationary Markov chain with Gaussian emissions
    /// `N(emission_means[s], emission_sigmas[s]²)`, started from the
    /// stationary distribution of the transition matrix.
    HiddenMarkov {
        /// Row-stochastic transition matrix.
        transition: Vec<Vec<f64>>,
        emission_means: Vec<f64>,
        emission_sigmas: Vec<f64>,
        /// Stationary distribution π of `transition` (computed at build).
        stationary: Vec<f64>,
    },
}

/// Default warm-up length used by the autoregressive constructors.
pub const DEFAULT_BURN_IN: usize = 1000;

impl DataProcess {
    /// i.i.d. process with the given marginal.
    pub fn iid(law: IidLaw) -> Result<Self> {
        match &law {
            IidLaw::GaussianVec { mean, sigma } => {
                if mean.is_empty() || !(sigma.is_finite() && *sigma > 0.0) {
                    return Err(Error::Config("GaussianVec needs a nonempty mean and σ > 0".into()));
                }
            }
            IidLaw::StdUniform { dim } => {
                if *dim == 0 {
                    return Err(Error::Config("StdUniform needs dim ≥ 1".into()));
                }
            }
            IidLaw::GaussianMixture1d { weights, means, sigmas } => {
                if weights.is_empty()
                    || weights.len() != means.len()
                    || weights.len() != sigmas.len()
                    || weights.iter().any(|&w| w < 0.0)
                    || weights.iter().sum::<f64>() <= 0.0
                    || sigmas.iter().any(|&s| s <= 0.0)
                {
                    return Err(Error::Config(
                        "GaussianMixture1d needs matching nonnegative weights, means, positive sigmas".into(),
                    ));
                }
            }
        }
        Ok(DataProcess::Iid(law))
    }

    /// Vector AR(1) process; rejects coefficient matrices with operator
    /// norm ≥ 1 (no stationary solution).
    pub fn vector_ar(a: Vec<Vec<f64>>, noise_sigma: f64, burn_in: usize) -> Result<Self> {
        let dim = a.len();
        if dim == 0 || a.iter().any(|row| row.len() != dim) {
            return Err(Error::Config("AR coefficient matrix must be square and nonempty".into()));
        }
        if !(noise_sigma.is_finite() && noise_sigma > 0.0) {
            return Err(Error::Config(format!("AR noise σ must be positive, got {noise_sigma}")));
        }
        let coeff: Vec<f64> = a.iter().flatten().copied().collect();
        if coeff.iter().any(|v| !v.is_finite()) {
            return Err(Error::Config("AR coefficients must be finite".into()));
        }
        let op_norm = operator_norm(&coeff, dim);
        if op_norm >= 1.0 {
            return Err(Error::Config(format!(
                "AR coefficient matrix has operator norm {op_norm:.6} ≥ 1; the process has no stationary law"
            )));
        }
        Ok(DataProcess::VectorAr { coeff, dim, noise_sigma, burn_in, op_norm })
    }

    /// Scalar AR(1) `X_{t+1} = a X_t + ε`, a convenience wrapper.
    pub fn ar1(a: f64, noise_sigma: f64) -> Result<Self> {
        Self::vector_ar(vec![vec![a]], noise_sigma, DEFAULT_BURN_IN)
    }

    /// The non-mixing binary half-AR process.
    pub fn binary_half_ar() -> Self {
        DataProcess::BinaryHalfAr { burn_in: DEFAULT_BURN_IN }
    }

    /// Hidden Markov chain; validates the transition matrix and computes
    /// its stationary distribution by fixed-point iteration.
    pub fn hidden_markov(
        transition: Vec<Vec<f64>>,
        emission_means: Vec<f64>,
        emission_sigmas: Vec<f64>,
    ) -> Result<Self> {
        let d = transition.len();
        if d == 0 || emission_means.len() != d || emission_sigmas.len() != d {
            return Err(Error::Config(
                "HMM needs a square transition matrix with one emission per state".into(),
            ));
        }
        for row in &transition {
            if row.len() != d {
                return Err(Error::Config("HMM transition matrix must be square".into()));
            }
            if row.iter().any(|&p| !(0.0..=1.0 + 1e-12).contains(&p)) {
                return Err(Error::Config("HMM transition probabilities must lie in [0,1]".into()));
            }
            let s: f64 = row.iter().sum();
            if (s - 1.0).abs() > 1e-9 {
                return Err(Error::Config(format!("HMM transition row sums to {s}, expected 1")));
            }
        }
        if emission_sigmas.iter().any(|&s| !(s.is_finite() && s > 0.0)) {
            return Err(Error::Config("HMM emission sigmas must be positive".into()));
        }
        let stationary = stationary_distribution(&transition);
        Ok(DataProcess::HiddenMarkov { transition, emission_means, emission_sigmas, stationary })
    }

    /// Dimension of the generated observations.
    pub fn data_dim(&self) -> usize {
        match self {
            DataProcess::Iid(law) => law.dim(),
            DataProcess::VectorAr { dim, .. } => *dim,
            DataProcess::BinaryHalfAr { .. } | DataProcess::HiddenMarkov { .. } => 1,
        }
    }

    /// Stationary distribution of the hidden chain (HMM only).
    pub fn hmm_stationary(&self) -> Option<&[f64]> {
        match self {
            DataProcess::HiddenMarkov { stationary, .. } => Some(stationary),
            _ => None,
        }
    }

    /// Generate a time-ordered trajectory of length `n`.
    ///
    /// Deterministic per generator state; autoregressive processes run
    /// through their burn-in first so the returned stretch is (nearly)
    /// stationary.
    pub fn generate<R: Rng>(&self, n: usize, rng: &mut R) -> Result<Sample> {
        if n == 0 {
            return Err(Error::NotEnoughPoints { needed: 1, got: 0 });
        }
        let dim = self.data_dim();
        let mut data = Vec::with_capacity(n * dim);
        match self {
            DataProcess::Iid(law) => {
                for _ in 0..n {
                    law.draw_into(&mut data, rng);
                }
            }
            DataProcess::VectorAr { coeff, dim, noise_sigma, burn_in, .. } => {
                let d = *dim;
                let mut x = vec![0.0; d];
                let mut next = vec![0.0; d];
                for step in 0..(burn_in + n) {
                    for (i, slot) in next.iter_mut().enumerate() {
                        let mut acc = 0.0;
                        for j in 0..d {
                            acc += coeff[i * d + j] * x[j];
                        }
                        let z: f64 = rng.sample(rand_distr::StandardNormal);
                        *slot = acc + noise_sigma * z;
                    }
                    std::mem::swap(&mut x, &mut next);
                    if step >= *burn_in {
                        data.extend_from_slice(&x);
                    }
                }
            }
            DataProcess::BinaryHalfAr { burn_in } => {
                let mut x: f64 = rng.random();
                for step in 0..(burn_in + n) {
                    let eta = f64::from(rng.random::<bool>());
                    x = 0.5 * (x + eta);
                    if step >= *burn_in {
                        data.push(x);
                    }
                }
            }
            DataProcess::HiddenMarkov { transition, emission_means, emission_sigmas, stationary } => {
                let mut state = draw_categorical(stationary, rng);
                for _ in 0..n {
                    let z: f64 = rng.sample(rand_distr::StandardNormal);
                    data.push(emission_means[state] + emission_sigmas[state] * z);
                    state = draw_categorical(&transition[state], rng);
                }
            }
        }
        Sample::from_flat(data, dim)
    }
}

fn draw_categorical<R: Rng>(probs: &[f64], rng: &mut R) -> usize {
    let total: f64 = probs.iter().sum();
    let mut u: f64 = rng.random::<f64>() * total;
    for (i, &p) in probs.iter().enumerate() {
        if u < p {
            return i;
        }
        u -= p;
    }
    probs.len() - 1
}

/// Operator norm (largest singular value) of a row-major d×d matrix, by
/// power iteration on AᵀA with a fixed, slightly asymmetric start so the
/// result is deterministic.
fn operator_norm(a: &[f64], d: usize) -> f64 {
    let mut v: Vec<f64> = (0..d).map(|i| 1.0 + 0.01 * i as f64).collect();
    normalize(&mut v);
    let mut av = vec![0.0; d];
    let mut atav = vec![0.0; d];
    let mut lambda = 0.0;
    for _ in 0..500 {
        // av = A v
        for i in 0..d {
            av[i] = (0..d).map(|j| a[i * d + j] * v[j]).sum();
        }
        // atav = Aᵀ av
        for j in 0..d {
            atav[j] = (0..d).map(|i| a[i * d + j] * av[i]).sum();
        }
        let new_lambda: f64 = v.iter().zip(atav.iter()).map(|(x, y)| x * y).sum();
        let norm = atav.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm == 0.0 {
            return 0.0;
        }
        for (slot, &x) in v.iter_mut().zip(atav.iter()) {
            *slot = x / norm;
        }
        if (new_lambda - lambda).abs() <= 1e-15 * new_lambda.abs().max(1.0) {
            lambda = new_lambda;
            break;
        }
        lambda = new_lambda;
    }
    lambda.max(0.0).sqrt()
}

fn normalize(v: &mut [f64]) {
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if n > 0.0 {
        for x in v.iter_mut() {
            *x /= n;
        }
    }
}

/// Stationary distribution of a row-stochastic matrix by iterating π ← πP
/// from the uniform start until the ℓ¹ increment falls below 1e−14.
fn stationary_distribution(p: &[Vec<f64>]) -> Vec<f64> {
    let d = p.len();
    let mut pi = vec![1.0 / d as f64; d];
    let mut next = vec![0.0; d];
    for _ in 0..100_000 {
        for (j, slot) in next.iter_mut().enumerate() {
            *slot = (0..d).map(|i| pi[i] * p[i][j]).sum();
        }
        let delta: f64 = pi.iter().zip(next.iter()).map(|(a, b)| (a - b).abs()).sum();
        pi.copy_from_slice(&next);
        if delta <= 1e-14 {
            break;
        }
    }
    pi
}

/// A Monte-Carlo estimate of ρ_t.
#[derive(Debug, Clone, PartialEq)]
pub struct RhoEstimate {
    /// The lag.
    pub t: usize,
    /// |estimated kernel autocovariance| — nonnegative by construction.
    pub value: f64,
    /// Standard error across trajectory replications.
    pub stderr: f64,
    /// Total number of lagged pairs that entered the estimate.
    pub n_pairs: usize,
}

/// Estimate ρ_t for a process by simulation.
///
/// `n_traj` independent trajectories of length `traj_len` are generated
/// (seeds `seed`, `seed+1`, …). For trajectory r the lagged mean
/// `a_r = mean_s k(X_s^r, X_{s+t}^r)` estimates `E k(X_0, X_t)`, and the
/// cross mean `b_r = mean_s k(X_s^r, X_{s+t}^{r′})` over the *next*
/// trajectory `r′ = r+1 (mod n_traj)` estimates the independent product
/// term `E k(X, X')`. The estimate is `|mean_r (a_r − b_r)|` with a
/// standard error over replications.
///
/// Under stationarity every pair `(X_s, X_{s+t})` has the law of
/// `(X_0, X_t)`, so pooling over `s` only reduces variance. Consecutive
/// replications share one trajectory through the cross term, which makes
/// the standard error slightly optimistic; consumers use generous
/// (4·stderr) slack.
pub fn rho_hat(
    proc: &DataProcess,
    k: &Kernel,
    t: usize,
    n_traj: usize,
    traj_len: usize,
    seed: u64,
) -> Result<RhoEstimate> {
    if t == 0 {
        return Err(Error::InvalidParameter { name: "t", reason: "lag must be ≥ 1".into() });
    }
    if traj_len <= t {
        return Err(Error::InvalidParameter {
            name: "traj_len",
            reason: format!("trajectory length {traj_len} must exceed the lag {t}"),
        });
    }
    if n_traj < 2 {
        return Err(Error::NotEnoughPoints { needed: 2, got: n_traj });
    }
    let trajectories: Vec<Sample> = (0..n_traj)
        .map(|r| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(r as u64));
            proc.generate(traj_len, &mut rng)
        })
        .collect::<Result<_>>()?;

    let pairs_per_traj = traj_len - t;
    let mut diffs = Vec::with_capacity(n_traj);
    for r in 0..n_traj {
        let own = &trajectories[r];
        let other = &trajectories[(r + 1) % n_traj];
        let mut lagged = 0.0;
        let mut cross = 0.0;
        for s in 0..pairs_per_traj {
            lagged += k.eval(own.point(s), own.point(s + t))?;
            cross += k.eval(own.point(s), other.point(s + t))?;
        }
        diffs.push((lagged - cross) / pairs_per_traj as f64);
    }
    let (mean, stderr) = crate::mean_and_stderr(&diffs);
    Ok(RhoEstimate { t, value: mean.abs(), stderr, n_pairs: n_traj * pairs_per_traj })
}

/// The dependence constants of a vector AR process with ‖A‖ < 1, kernel
/// Lipschitz constant `l`, mean noise norm `e_eps = E‖ε₀‖`, and (optionally)
/// an almost-sure noise bound `c`:
///
/// ```text
/// Σ = 2‖A‖·L·E‖ε₀‖ / (1−‖A‖)²
/// Γ = 2c√(L‖A‖) / ((1−‖A‖)(1−√‖A‖))     (needs ‖ε₀‖ ≤ c a.s.)
/// ```
///
/// Γ is `None` for unbounded noise (e.g. Gaussian), in which case only the
/// in-expectation bounds apply.
pub fn ar_sigma_gamma(a_norm: f64, l: f64, e_eps: f64, c: Option<f64>) -> Result<(f64, Option<f64>)> {
    check_unit_interval(a_norm)?;
    if !(l > 0.0 && e_eps > 0.0) {
        return Err(Error::InvalidParameter {
            name: "l/e_eps",
            reason: format!("need positive Lipschitz constant and noise moment, got L={l}, E‖ε‖={e_eps}"),
        });
    }
    let one_minus = 1.0 - a_norm;
    let sigma = 2.0 * a_norm * l * e_eps / (one_minus * one_minus);
    let gamma = match c {
        Some(c) if c > 0.0 => {
            Some(2.0 * c * (l * a_norm).sqrt() / (one_minus * (1.0 - a_norm.sqrt())))
        }
        Some(c) => {
            return Err(Error::InvalidParameter {
                name: "c",
                reason: format!("a.s. noise bound must be positive, got {c}"),
            })
        }
        None => None,
    };
    Ok((sigma, gamma))
}

/// Geometric envelope for the AR coefficient: ρ_t ≤ ‖A‖^t · 2LE‖ε₀‖/(1−‖A‖).
pub fn ar_rho_envelope(a_norm: f64, l: f64, e_eps: f64, t: usize) -> Result<f64> {
    check_unit_interval(a_norm)?;
    Ok(a_norm.powi(t as i32) * 2.0 * l * e_eps / (1.0 - a_norm))
}

/// Envelope for the binary half-AR process: ρ_t ≤ L/2^t, with L the kernel's
/// Lipschitz constant on [0,1].
pub fn binary_half_ar_rho_envelope(l: f64, t: usize) -> f64 {
    l / (1u64 << t.min(63)) as f64
}

/// The binary half-AR process satisfies the summability assumption with the
/// direct constant Σ = 2L (as stated for that process); the general AR
/// formula [`ar_sigma_gamma`] with ‖A‖ = 1/2, E|ε₀| = E|η/2| = 1/4 instead
/// gives Σ = L. Both are reported by the dependence demo; this function
/// returns the pair `(general, direct)`.
pub fn binary_half_ar_sigma(l: f64) -> (f64, f64) {
    let (general, _) = ar_sigma_gamma(0.5, l, 0.25, None).expect("fixed valid inputs");
    (general, 2.0 * l)
}

/// β-mixing envelope of an r-step-minorized Markov chain:
/// `β_t ≤ 2(1−c)^{t/r − 1}`, hitting 0 for the perfectly coupling case
/// c = 1 (the base (1−c) vanishes, and the exponent is positive for t ≥ r;
/// the convention 0^0 = ... never arises because c = 1 short-circuits).
pub fn markov_beta_bound(c: f64, r: usize, t: usize) -> Result<f64> {
    if !(c > 0.0 && c <= 1.0) {
        return Err(Error::InvalidParameter {
            name: "c",
            reason: format!("minorization constant must lie in (0,1], got {c}"),
        });
    }
    if r == 0 || t == 0 {
        return Err(Error::InvalidParameter {
            name: "r/t",
            reason: "period and lag must be ≥ 1".into(),
        });
    }
    if c == 1.0 {
        return Ok(0.0);
    }
    Ok(2.0 * (1.0 - c).powf(t as f64 / r as f64 - 1.0))
}

/// Doeblin minorization constant of a row-stochastic matrix:
/// `c = Σ_j min_i P(i, j)` — the total mass of the common component all
/// rows share, which drives [`markov_beta_bound`] with r = 1.
pub fn doeblin_minorization(p: &[Vec<f64>]) -> f64 {
    let d = p.len();
    (0..d)
        .map(|j| {
            (0..d)
                .map(|i| p[i][j])
                .fold(f64::INFINITY, f64::min)
        })
        .sum()
}

/// `E‖ε‖` for ε ∼ N(0, σ²I_d): σ√2·Γ((d+1)/2)/Γ(d/2).
pub fn gaussian_expected_norm(sigma: f64, d: usize) -> Result<f64> {
    if !(sigma > 0.0) || d == 0 {
        return Err(Error::InvalidParameter {
            name: "sigma/d",
            reason: format!("need σ > 0 and d ≥ 1, got σ={sigma}, d={d}"),
        });
    }
    Ok(sigma * std::f64::consts::SQRT_2 * gamma_half(d + 1) / gamma_half(d))
}

/// Γ(k/2) for integer k ≥ 1, by the recursion Γ(x+1) = xΓ(x) down to
/// Γ(1/2) = √π and Γ(1) = 1.
fn gamma_half(k: usize) -> f64 {
    match k {
        1 => std::f64::consts::PI.sqrt(),
        2 => 1.0,
        _ => (k as f64 / 2.0 - 1.0) * gamma_half(k - 2),
    }
}

fn check_unit_interval(a_norm: f64) -> Result<()> {
    if !(a_norm > 0.0 && a_norm < 1.0) {
        return Err(Error::InvalidParameter {
            name: "a_norm",
            reason: format!("operator norm must lie in (0,1), got {a_norm}"),
        });
    }
    Ok(())
}
