//! Hüber-mixture and adversarial-replacement contamination.
//!
//! Two corruption regimes from robust statistics:
//!
//! * **Hüber** — the data are i.i.d. from the mixture
//!   `(1−ε)P_{θ₀} + εQ`: each clean point is independently replaced with
//!   probability ε by a draw from the noise law `Q`, so the number of
//!   outliers is `Binomial(n, ε)`.
//! * **Adversarial** — exactly `⌊εn⌋` points, at positions chosen
//!   uniformly at random, are overwritten with arbitrary values after the
//!   clean sample is generated (the `|O| ≤ εn` replacement model).
//!
//! [`contaminate`] returns the corrupted sample together with the outlier
//! index set `O` — for diagnostics only. Estimators accept a [`Sample`]
//! and nothing else, so `O` cannot leak into any estimation path.

use rand::Rng;

use crate::{Error, Result, Sample};

/// Noise distributions used as the contamination source `Q`.
#[derive(Debug, Clone, PartialEq)]
pub enum QLaw {
    /// `N(mean, σ²I_d)`.
    GaussianShift { mean: Vec<f64>, sigma: f64 },
    /// Coordinatewise unit-scale Cauchy centered at `loc` (independent
    /// coordinates).
    CauchyVector { loc: Vec<f64> },
    /// Point mass at `point`.
    Dirac { point: Vec<f64> },
}

impl QLaw {
    /// `N(a·𝟏, I_d)` — the shifted-Gaussian contamination family.
    pub fn gaussian_shift_ones(a: f64, d: usize) -> Self {
        QLaw::GaussianShift { mean: vec![a; d], sigma: 1.0 }
    }

    /// Coordinatewise `C(loc, 1)` at a constant center.
    pub fn cauchy_ones(loc: f64, d: usize) -> Self {
        QLaw::CauchyVector { loc: vec![loc; d] }
    }

    /// `δ_{a·𝟏}` — a Dirac at the constant vector.
    pub fn dirac_ones(a: f64, d: usize) -> Self {
        QLaw::Dirac { point: vec![a; d] }
    }

    pub fn dim(&self) -> usize {
        match self {
            QLaw::GaussianShift { mean, .. } => mean.len(),
            QLaw::CauchyVector { loc } => loc.len(),
            QLaw::Dirac { point } => point.len(),
        }
    }

    fn draw_into<R: Rng>(&self, out: &mut [f64], rng: &mut R) {
        match self {
            QLaw::GaussianShift { mean, sigma } => {
                for (slot, &m) in out.iter_mut().zip(mean.iter()) {
                    let z: f64 = rng.sample(rand_distr::StandardNormal);
                    *slot = m + sigma * z;
                }
            }
            QLaw::CauchyVector { loc } => {
                for (slot, &m) in out.iter_mut().zip(loc.iter()) {
                    let u: f64 = rng.random();
                    *slot = m + (std::f64::consts::PI * (u - 0.5)).tan();
                }
            }
            QLaw::Dirac { point } => out.copy_from_slice(point),
        }
    }
}

/// Replacement values for the adversarial regime.
#[derive(Debug, Clone, PartialEq)]
pub enum Attack {
    /// Every corrupted point is set to this fixed value.
    DiracAt { point: Vec<f64> },
    /// Corrupted points are drawn from a noise law.
    SamplerQ(QLaw),
    /// The worst-case placement for the Gaussian location model: a Dirac
    /// at `θ₀ + 𝟏`, i.e. at distance √d from the true mean — far enough to
    /// bias, close enough that the kernel still sees it.
    WorstCaseSphere { theta0: Vec<f64> },
}

impl Attack {
    fn dim(&self) -> usize {
        match self {
            Attack::DiracAt { point } => point.len(),
            Attack::SamplerQ(q) => q.dim(),
            Attack::WorstCaseSphere { theta0 } => theta0.len(),
        }
    }

    fn write<R: Rng>(&self, out: &mut [f64], rng: &mut R) {
        match self {
            Attack::DiracAt { point } => out.copy_from_slice(point),
            Attack::SamplerQ(q) => q.draw_into(out, rng),
            Attack::WorstCaseSphere { theta0 } => {
                for (slot, &t) in out.iter_mut().zip(theta0.iter()) {
                    *slot = t + 1.0;
                }
            }
        }
    }
}

/// What to corrupt and how.
#[derive(Debug, Clone, PartialEq)]
pub enum ContaminationSpec {
    /// Pass the sample through untouched.
    None,
    /// Independent replacement with probability `eps` by a `q` draw.
    Huber { eps: f64, q: QLaw },
    /// Exactly `⌊eps·n⌋` uniformly chosen points overwritten by `attack`.
    Adversarial { eps: f64, attack: Attack },
}

impl ContaminationSpec {
    /// Hüber contamination; requires `0 ≤ ε < 1/2`.
    pub fn huber(eps: f64, q: QLaw) -> Result<Self> {
        check_eps(eps)?;
        Ok(ContaminationSpec::Huber { eps, q })
    }

    /// Adversarial contamination; requires `0 ≤ ε < 1/2`.
    pub fn adversarial(eps: f64, attack: Attack) -> Result<Self> {
        check_eps(eps)?;
        Ok(ContaminationSpec::Adversarial { eps, attack })
    }
}

fn check_eps(eps: f64) -> Result<()> {
    if !(eps.is_finite() && (0.0..0.5).contains(&eps)) {
        return Err(Error::InvalidParameter {
            name: "eps",
            reason: format!("contamination rate must lie in [0, 1/2), got {eps}"),
        });
    }
    Ok(())
}

/// Corrupt a clean sample according to `spec`.
///
/// Returns the corrupted sample and the sorted outlier index set `O`
/// (diagnostics only — estimators never see it). Points outside `O` are
/// bit-identical to the clean input.
pub fn contaminate<R: Rng>(
    clean: &Sample,
    spec: &ContaminationSpec,
    rng: &mut R,
) -> Result<(Sample, Vec<usize>)> {
    match spec {
        ContaminationSpec::None => Ok((clean.clone(), Vec::new())),
        ContaminationSpec::Huber { eps, q } => {
            if q.dim() != clean.dim() {
                return Err(Error::DimensionMismatch(clean.dim(), q.dim()));
            }
            if *eps == 0.0 {
                return Ok((clean.clone(), Vec::new()));
            }
            let mut out = clean.clone();
            let mut outliers = Vec::new();
            for i in 0..clean.len() {
                if rng.random::<f64>() < *eps {
                    q.draw_into(out.point_mut(i), rng);
                    outliers.push(i);
                }
            }
            Ok((out, outliers))
        }
        ContaminationSpec::Adversarial { eps, attack } => {
            if attack.dim() != clean.dim() {
                return Err(Error::DimensionMismatch(clean.dim(), attack.dim()));
            }
            let n = clean.len();
            let count = (eps * n as f64).floor() as usize;
            if count == 0 {
                return Ok((clean.clone(), Vec::new()));
            }
            let mut indices: Vec<usize> = rand::seq::index::sample(rng, n, count).into_vec();
            indices.sort_unstable();
            let mut out = clean.clone();
            for &i in &indices {
                attack.write(out.point_mut(i), rng);
            }
            Ok((out, indices))
        }
    }
}
