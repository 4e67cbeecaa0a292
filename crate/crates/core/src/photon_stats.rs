//! Truncated Fock-space photon-number statistics.
//!
//! Distributions are plain probability vectors over `n = 0..=n_max`. Every
//! operation is a pure function of immutable inputs, so values may be shared
//! freely across threads.

use serde::{Deserialize, Serialize};

use crate::error::{check_non_negative, check_positive, check_probability, Error, Result};

/// Default tolerance on probability mass discarded by truncation.
pub const DEFAULT_TRUNCATION_TOLERANCE: f64 = 1e-12;

/// Default Fock-space cutoff; adequate for pair parameters up to about 0.05.
pub const DEFAULT_N_MAX: usize = 8;

/// Slack allowed above unit mass from floating-point summation.
const MASS_SLACK: f64 = 1e-12;

/// Probability of finding `n` photons in a single mode, truncated at `n_max`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct PhotonNumberDistribution {
    probs: Vec<f64>,
}

impl PhotonNumberDistribution {
    /// Builds a distribution from explicit probabilities `P(0), P(1), ...`.
    ///
    /// Entries must lie in `[0, 1]` and sum to at most one. A deficit below one
    /// is allowed here (it is the truncated tail); use
    /// [`check_truncation`](Self::check_truncation) to bound it.
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.len() < 2 {
            return Err(Error::out_of_range(
                "n_max",
                probs.len() as f64 - 1.0,
                "expected n_max >= 1",
            ));
        }
        for (n, &p) in probs.iter().enumerate() {
            check_probability(&format!("probs[{n}]"), p)?;
        }
        let mass: f64 = probs.iter().sum();
        if mass > 1.0 + MASS_SLACK {
            return Err(Error::out_of_range(
                "total mass",
                mass,
                "expected a total probability <= 1",
            ));
        }
        Ok(Self { probs })
    }

    pub fn vacuum(n_max: usize) -> Result<Self> {
        Self::fock(0, n_max)
    }

    /// Number state `|n⟩`.
    pub fn fock(n: usize, n_max: usize) -> Result<Self> {
        if n > n_max {
            return Err(Error::out_of_range("n", n as f64, "expected n <= n_max"));
        }
        let mut probs = vec![0.0; n_max.max(1) + 1];
        probs[n] = 1.0;
        Self::new(probs)
    }

    /// Thermal (geometric) statistics `P(n) = (1 − λ) λⁿ`, i.e. one arm of a
    /// two-mode squeezed state with `λ = tanh² r`.
    pub fn thermal(lambda: f64, n_max: usize) -> Result<Self> {
        check_pair_parameter(lambda)?;
        let probs = (0..=n_max.max(1))
            .map(|n| (1.0 - lambda) * lambda.powi(n as i32))
            .collect();
        Self::new(probs)
    }

    /// Poissonian (coherent-state) statistics with the given mean.
    pub fn poisson(mean: f64, n_max: usize) -> Result<Self> {
        check_non_negative("mean", mean)?;
        let mut probs = Vec::with_capacity(n_max + 1);
        let mut term = (-mean).exp();
        for n in 0..=n_max.max(1) {
            if n > 0 {
                term *= mean / n as f64;
            }
            probs.push(term);
        }
        Self::new(probs)
    }

    pub fn n_max(&self) -> usize {
        self.probs.len() - 1
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// `P(n)`, zero beyond the cutoff.
    pub fn prob(&self, n: usize) -> f64 {
        self.probs.get(n).copied().unwrap_or(0.0)
    }

    pub fn total_mass(&self) -> f64 {
        self.probs.iter().sum()
    }

    pub fn truncation_loss(&self) -> f64 {
        (1.0 - self.total_mass()).max(0.0)
    }

    pub fn check_truncation(&self, tolerance: f64) -> Result<()> {
        let lost = self.truncation_loss();
        if lost <= tolerance {
            Ok(())
        } else {
            Err(Error::Truncation {
                n_max: self.n_max(),
                lost,
                tolerance,
            })
        }
    }

    /// Mean photon number of the normalized distribution.
    pub fn mean(&self) -> f64 {
        self.raw_moment(|n| n) / self.total_mass()
    }

    fn raw_moment(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.probs
            .iter()
            .enumerate()
            .map(|(n, p)| f(n as f64) * p)
            .sum()
    }
}

impl TryFrom<Vec<f64>> for PhotonNumberDistribution {
    type Error = Error;

    fn try_from(probs: Vec<f64>) -> Result<Self> {
        Self::new(probs)
    }
}

impl From<PhotonNumberDistribution> for Vec<f64> {
    fn from(dist: PhotonNumberDistribution) -> Self {
        dist.probs
    }
}

/// Joint photon-number distribution over (idler, signal) modes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JointNumberDistribution {
    n_max_idler: usize,
    n_max_signal: usize,
    /// Row-major, idler index first.
    probs: Vec<f64>,
}

impl JointNumberDistribution {
    pub fn new(n_max_idler: usize, n_max_signal: usize, probs: Vec<f64>) -> Result<Self> {
        if n_max_idler < 1 || n_max_signal < 1 {
            return Err(Error::out_of_range(
                "n_max",
                n_max_idler.min(n_max_signal) as f64,
                "expected n_max >= 1",
            ));
        }
        if probs.len() != (n_max_idler + 1) * (n_max_signal + 1) {
            return Err(Error::Degenerate(format!(
                "joint distribution needs {} entries, got {}",
                (n_max_idler + 1) * (n_max_signal + 1),
                probs.len()
            )));
        }
        for &p in &probs {
            check_probability("joint probability", p)?;
        }
        let mass: f64 = probs.iter().sum();
        if mass > 1.0 + MASS_SLACK {
            return Err(Error::out_of_range(
                "total mass",
                mass,
                "expected a total probability <= 1",
            ));
        }
        Ok(Self {
            n_max_idler,
            n_max_signal,
            probs,
        })
    }

    pub fn n_max_idler(&self) -> usize {
        self.n_max_idler
    }

    pub fn n_max_signal(&self) -> usize {
        self.n_max_signal
    }

    pub fn get(&self, n_idler: usize, n_signal: usize) -> f64 {
        if n_idler > self.n_max_idler || n_signal > self.n_max_signal {
            return 0.0;
        }
        self.probs[n_idler * (self.n_max_signal + 1) + n_signal]
    }

    pub fn total_mass(&self) -> f64 {
        self.probs.iter().sum()
    }

    pub fn idler_marginal(&self) -> PhotonNumberDistribution {
        let probs = (0..=self.n_max_idler)
            .map(|i| (0..=self.n_max_signal).map(|s| self.get(i, s)).sum::<f64>().min(1.0))
            .collect();
        PhotonNumberDistribution { probs }
    }

    pub fn signal_marginal(&self) -> PhotonNumberDistribution {
        let probs = (0..=self.n_max_signal)
            .map(|s| (0..=self.n_max_idler).map(|i| self.get(i, s)).sum::<f64>().min(1.0))
            .collect();
        PhotonNumberDistribution { probs }
    }
}

/// Pair source driven by a continuous-wave pump.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SourceParams {
    /// Pair-creation slope, pairs per mW per detection window.
    pub alpha: f64,
    /// Pump power in mW.
    pub pump_power: f64,
}

impl SourceParams {
    pub fn lambda(&self) -> Result<f64> {
        lambda_from_pump(self.alpha, self.pump_power)
    }
}

/// Small-squeezing identification `λ = tanh² r ≈ r² = α·P`.
pub fn lambda_from_pump(alpha: f64, pump: f64) -> Result<f64> {
    check_positive("alpha", alpha)?;
    check_non_negative("pump_power", pump)?;
    let lambda = alpha * pump;
    if lambda >= 1.0 {
        return Err(Error::out_of_range(
            "lambda (alpha * pump_power)",
            lambda,
            "expected a pair parameter < 1",
        ));
    }
    Ok(lambda)
}

pub(crate) fn check_pair_parameter(lambda: f64) -> Result<()> {
    if (0.0..1.0).contains(&lambda) {
        Ok(())
    } else {
        Err(Error::out_of_range("lambda", lambda, "expected 0 <= lambda < 1"))
    }
}

/// Phase-randomized two-mode squeezed vacuum: `P(n, n) = (1 − λ) λⁿ`, zero off
/// the diagonal.
///
/// The truncated tail is not checked here; callers that need a bound on it use
/// [`PhotonNumberDistribution::check_truncation`] on a marginal.
pub fn tmss_joint(lambda: f64, n_max: usize) -> Result<JointNumberDistribution> {
    check_pair_parameter(lambda)?;
    if n_max < 1 {
        return Err(Error::out_of_range("n_max", 0.0, "expected n_max >= 1"));
    }
    let dim = n_max + 1;
    let mut probs = vec![0.0; dim * dim];
    for n in 0..dim {
        probs[n * dim + n] = (1.0 - lambda) * lambda.powi(n as i32);
    }
    JointNumberDistribution::new(n_max, n_max, probs)
}

/// Binomial probabilities `C(n, k) η^k (1 − η)^(n − k)` for `k = 0..=n`.
pub(crate) fn binomial_row(n: usize, eta: f64) -> Vec<f64> {
    if eta == 0.0 {
        let mut row = vec![0.0; n + 1];
        row[0] = 1.0;
        return row;
    }
    if eta == 1.0 {
        let mut row = vec![0.0; n + 1];
        row[n] = 1.0;
        return row;
    }
    let mut coeff = 1.0_f64;
    (0..=n)
        .map(|k| {
            if k > 0 {
                coeff = coeff * (n - k + 1) as f64 / k as f64;
            }
            coeff * eta.powi(k as i32) * (1.0 - eta).powi((n - k) as i32)
        })
        .collect()
}

/// Loss channel: every photon independently survives with probability `eta`.
pub fn thin(dist: &PhotonNumberDistribution, eta: f64) -> Result<PhotonNumberDistribution> {
    check_probability("eta", eta)?;
    let mut out = vec![0.0; dist.probs.len()];
    for (n, &p) in dist.probs.iter().enumerate() {
        if p == 0.0 {
            continue;
        }
        for (k, b) in binomial_row(n, eta).into_iter().enumerate() {
            out[k] += p * b;
        }
    }
    for p in &mut out {
        *p = p.clamp(0.0, 1.0);
    }
    Ok(PhotonNumberDistribution { probs: out })
}

/// Zero-delay autocorrelation `⟨n(n − 1)⟩ / ⟨n⟩²` of the normalized distribution.
pub fn g2_zero(dist: &PhotonNumberDistribution) -> Result<f64> {
    let mean = dist.raw_moment(|n| n);
    if mean <= 0.0 {
        return Err(Error::Degenerate(
            "g2(0) is undefined for the vacuum".to_owned(),
        ));
    }
    let pairs = dist.raw_moment(|n| n * (n - 1.0));
    Ok(pairs * dist.total_mass() / (mean * mean))
}

/// Signal statistics conditioned on a click of a threshold idler detector.
#[derive(Debug, Clone, PartialEq)]
pub struct Heralded {
    pub signal: PhotonNumberDistribution,
    pub herald_probability: f64,
}

/// Click probability of a non-number-resolving detector facing `n` photons.
pub fn click_probability(n: usize, efficiency: f64, dark: f64) -> f64 {
    1.0 - (1.0 - dark) * (1.0 - efficiency).powi(n as i32)
}

/// Conditions the signal mode on an idler click with efficiency `eta_idler`
/// and dark-count probability `dark_idler` per window.
pub fn heralded_signal(
    joint: &JointNumberDistribution,
    eta_idler: f64,
    dark_idler: f64,
) -> Result<Heralded> {
    check_probability("eta_idler", eta_idler)?;
    if !(0.0..1.0).contains(&dark_idler) {
        return Err(Error::out_of_range(
            "dark_idler",
            dark_idler,
            "expected a probability in [0, 1)",
        ));
    }
    let mut probs = vec![0.0; joint.n_max_signal + 1];
    for ni in 0..=joint.n_max_idler {
        let click = click_probability(ni, eta_idler, dark_idler);
        if click == 0.0 {
            continue;
        }
        for (ns, p) in probs.iter_mut().enumerate() {
            *p += joint.get(ni, ns) * click;
        }
    }
    let herald_probability: f64 = probs.iter().sum();
    if herald_probability <= 0.0 {
        return Err(Error::Degenerate(
            "herald probability is zero; nothing can be conditioned".to_owned(),
        ));
    }
    let probs = probs
        .into_iter()
        .map(|p| (p / herald_probability).clamp(0.0, 1.0))
        .collect();
    Ok(Heralded {
        signal: PhotonNumberDistribution { probs },
        herald_probability,
    })
}
