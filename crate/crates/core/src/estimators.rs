//! Statistical estimators: heralded probability tables, the cross-correlation
//! and threefold estimates of `p11`, the Poisson posterior, fringe fits and
//! the concurrence lower bound.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{check_non_negative, check_positive, check_probability, Error, Result};
use crate::montecarlo::HeraldedCounts;

/// Correction factor applied to recombined threefold probabilities when no
/// beamsplitter model is configured.
pub const DEFAULT_CORRECTION: f64 = 2.27;

/// A value with its standard deviation.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Uncertain {
    pub value: f64,
    pub sigma: f64,
}

impl Uncertain {
    pub fn new(value: f64, sigma: f64) -> Self {
        Self { value, sigma }
    }

    pub fn exact(value: f64) -> Self {
        Self { value, sigma: 0.0 }
    }
}

/// Heralded detection probabilities `p_mn` (`m` clicks from arm A, `n` from arm B).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProbabilityTable {
    pub p00: Uncertain,
    pub p01: Uncertain,
    pub p10: Uncertain,
    pub p11: Uncertain,
}

impl ProbabilityTable {
    /// Builds the table with `p00` fixed by normalization.
    pub fn from_rates(p10: Uncertain, p01: Uncertain, p11: Uncertain) -> Result<Self> {
        check_probability("p10", p10.value)?;
        check_probability("p01", p01.value)?;
        check_probability("p11", p11.value)?;
        let p00 = 1.0 - p10.value - p01.value - p11.value;
        if p00 <= 0.0 {
            return Err(Error::Degenerate(format!(
                "p00 = {p00} from normalization; detection probabilities leave no vacuum component"
            )));
        }
        let sigma = (p10.sigma.powi(2) + p01.sigma.powi(2) + p11.sigma.powi(2)).sqrt();
        Ok(Self {
            p00: Uncertain::new(p00, sigma),
            p01,
            p10,
            p11,
        })
    }

    pub fn single_sum(&self) -> f64 {
        self.p10.value + self.p01.value
    }
}

/// `(N_{1|H} + N_{2|H}) / N_H ± √(N_{1|H} + N_{2|H}) / N_H`.
pub fn twofold_per_herald(rec: &impl HeraldedCounts) -> Result<Uncertain> {
    heralded_rate("record", rec)
}

fn heralded_rate(name: &str, rec: &impl HeraldedCounts) -> Result<Uncertain> {
    let n_h = rec.heralds();
    if !(n_h > 0.0) {
        return Err(Error::Degenerate(format!("{name}: no heralds recorded")));
    }
    let n = rec.twofold();
    Ok(Uncertain::new(n / n_h, n.sqrt() / n_h))
}

/// `p10` from the record taken with arm B blocked and `p01` from the one taken
/// with arm A blocked; each is the heralded detection count summed over both
/// detectors, divided by `N_H`, with Poisson sigma `√N / N_H`.
pub fn probabilities_from_counts(
    arm_a_only: &impl HeraldedCounts,
    arm_b_only: &impl HeraldedCounts,
    p11: Uncertain,
) -> Result<ProbabilityTable> {
    let p10 = heralded_rate("arm A record", arm_a_only)?;
    let p01 = heralded_rate("arm B record", arm_b_only)?;
    ProbabilityTable::from_rates(p10, p01, p11)
}

/// Table from a single record with both arms open; only `p10 + p01` is
/// observable, so it is split evenly between the two.
pub fn probabilities_from_campaign(
    rec: &impl HeraldedCounts,
    p11: Uncertain,
) -> Result<ProbabilityTable> {
    let sum = heralded_rate("campaign record", rec)?;
    let half = Uncertain::new(sum.value / 2.0, sum.sigma / 2.0);
    ProbabilityTable::from_rates(half, half, p11)
}

/// Normalized cross-correlation `(c/w) / ((s_i/w)(s_s/w))` with Poisson errors.
///
/// With no coincidences the estimate is 0 and the sigma is that of a single count.
pub fn gsi_from_counts(
    coincidences: f64,
    singles_i: f64,
    singles_s: f64,
    windows: f64,
) -> Result<Uncertain> {
    check_non_negative("coincidences", coincidences)?;
    check_positive("windows", windows)?;
    if !(singles_i > 0.0 && singles_s > 0.0) {
        return Err(Error::Degenerate(
            "cross-correlation needs nonzero idler and signal singles".to_owned(),
        ));
    }
    let unit = windows / (singles_i * singles_s);
    if coincidences == 0.0 {
        return Ok(Uncertain::new(0.0, unit));
    }
    let g = coincidences * unit;
    let rel = (1.0 / coincidences + 1.0 / singles_i + 1.0 / singles_s).sqrt();
    Ok(Uncertain::new(g, g * rel))
}

/// Heralded cross-correlation of a record: herald-and-signal coincidences over
/// the product of herald and signal singles.
pub fn gsi_from_record(rec: &impl HeraldedCounts) -> Result<Uncertain> {
    gsi_from_counts(
        rec.n_signal_given_h(),
        rec.n_idler_singles(),
        rec.n_signal_singles(),
        rec.trials(),
    )
}

/// `p11 = 4 p10 p01 / (ḡ − 1)` with first-order error propagation.
pub fn p11_xcorr(p10: Uncertain, p01: Uncertain, gsi: Uncertain) -> Result<Uncertain> {
    check_probability("p10", p10.value)?;
    check_probability("p01", p01.value)?;
    if !(gsi.value > 1.0) {
        return Err(Error::out_of_range(
            "gsi",
            gsi.value,
            "expected a cross-correlation > 1",
        ));
    }
    if gsi.value.is_infinite() {
        return Ok(Uncertain::exact(0.0));
    }
    let d = gsi.value - 1.0;
    let value = 4.0 * p10.value * p01.value / d;
    let sigma = ((4.0 * p01.value / d * p10.sigma).powi(2)
        + (4.0 * p10.value / d * p01.sigma).powi(2)
        + (value / d * gsi.sigma).powi(2))
    .sqrt();
    Ok(Uncertain::new(value, sigma))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Method {
    #[serde(rename = "xcorr")]
    Xcorr,
    #[serde(rename = "threefold-mle")]
    ThreefoldMle,
    #[serde(rename = "threefold-ce")]
    ThreefoldCe,
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Method::Xcorr => "xcorr",
            Method::ThreefoldMle => "threefold-mle",
            Method::ThreefoldCe => "threefold-ce",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConcurrenceEstimate {
    pub value: f64,
    pub sigma: f64,
    pub method: Method,
}

fn bound_value(v: f64, p10: f64, p01: f64, p11: f64) -> f64 {
    let p00 = 1.0 - p10 - p01 - p11;
    v * (p10 + p01) - 2.0 * (p00.max(0.0) * p11).sqrt()
}

/// `C ≥ max(0, V (p01 + p10) − 2 √(p00 p11))`.
///
/// The sigma is first-order propagation of the unclamped expression with
/// `p00` tied to the other entries by normalization. At `p11 = 0` the square
/// root is not differentiable and its contribution is `2 √(p00 σ11)`.
pub fn concurrence_bound(
    visibility: Uncertain,
    t: &ProbabilityTable,
    method: Method,
) -> Result<ConcurrenceEstimate> {
    check_probability("visibility", visibility.value)?;
    let (v, p10, p01, p11) = (visibility.value, t.p10.value, t.p01.value, t.p11.value);
    let p00 = 1.0 - p10 - p01 - p11;
    let raw = bound_value(v, p10, p01, p11);

    let root = if p11 > 0.0 && p00 > 0.0 { (p11 / p00).sqrt() } else { 0.0 };
    let d_single = v + root;
    let p11_term = if p11 > 0.0 && p00 > 0.0 {
        (p00 - p11) / (p00 * p11).sqrt() * t.p11.sigma
    } else {
        2.0 * (p00.max(0.0) * t.p11.sigma).sqrt()
    };
    let sigma = ((p10 + p01).powi(2) * visibility.sigma.powi(2)
        + d_single.powi(2) * (t.p10.sigma.powi(2) + t.p01.sigma.powi(2))
        + p11_term.powi(2))
    .sqrt();
    Ok(ConcurrenceEstimate {
        value: raw.max(0.0),
        sigma,
        method,
    })
}

/// Raw counts behind a probability table, for parametric resampling.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TableCounts {
    pub heralds_a: f64,
    pub detections_a: f64,
    pub heralds_b: f64,
    pub detections_b: f64,
    pub heralds_threefold: f64,
    pub threefold: f64,
    /// Factor applied to the threefold probability.
    pub correction: f64,
}

/// Parametric bootstrap of the concurrence bound: Poisson-resamples every
/// count and draws the visibility from a normal law, each resample on its own
/// stream of a seeded ChaCha generator. The central value is the plug-in
/// estimate; the sigma is the spread of the unclamped resampled bounds.
pub fn bootstrap_concurrence(
    visibility: Uncertain,
    counts: &TableCounts,
    method: Method,
    resamples: u64,
    seed: u64,
) -> Result<ConcurrenceEstimate> {
    check_probability("visibility", visibility.value)?;
    if resamples < 2 {
        return Err(Error::out_of_range(
            "resamples",
            resamples as f64,
            "expected at least 2 resamples",
        ));
    }
    for (name, h) in [
        ("heralds_a", counts.heralds_a),
        ("heralds_b", counts.heralds_b),
        ("heralds_threefold", counts.heralds_threefold),
    ] {
        check_positive(name, h)?;
    }
    let p11_of = |n: f64| {
        let n = if method == Method::ThreefoldCe { n + 1.0 } else { n };
        counts.correction * n / counts.heralds_threefold
    };
    let point = bound_value(
        visibility.value,
        counts.detections_a / counts.heralds_a,
        counts.detections_b / counts.heralds_b,
        p11_of(counts.threefold),
    );
    let v_law = Normal::new(visibility.value, visibility.sigma)
        .map_err(|e| Error::Degenerate(e.to_string()))?;
    let draw = |rng: &mut ChaCha8Rng, mean: f64| -> f64 {
        if mean > 0.0 {
            Poisson::new(mean).map(|p| p.sample(rng)).unwrap_or(mean)
        } else {
            0.0
        }
    };
    let base = ChaCha8Rng::seed_from_u64(seed);
    let samples: Vec<f64> = (0..resamples)
        .map(|i| {
            let mut rng = base.clone();
            rng.set_stream(i);
            let v = v_law.sample(&mut rng).clamp(0.0, 1.0);
            let a = draw(&mut rng, counts.detections_a) / counts.heralds_a;
            let b = draw(&mut rng, counts.detections_b) / counts.heralds_b;
            let c = p11_of(draw(&mut rng, counts.threefold));
            bound_value(v, a, b, c)
        })
        .collect();
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    let var = samples.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / (n - 1.0);
    Ok(ConcurrenceEstimate {
        value: point.max(0.0),
        sigma: var.sqrt(),
        method,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ThreefoldMethod {
    Mle,
    Ce,
}

impl ThreefoldMethod {
    pub fn concurrence_method(self) -> Method {
        match self {
            ThreefoldMethod::Mle => Method::ThreefoldMle,
            ThreefoldMethod::Ce => Method::ThreefoldCe,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThreefoldEstimate {
    pub p11: Uncertain,
    pub method: ThreefoldMethod,
    pub n: u64,
    pub n_heralds: f64,
    pub correction: f64,
}

/// Poisson estimate of the threefold probability, scaled by `correction`:
/// MLE `n/N_H ± √n/N_H`, conservative `(n+1)/N_H ± √(n+1)/N_H`.
pub fn threefold_estimate(
    n: u64,
    n_heralds: f64,
    method: ThreefoldMethod,
    correction: f64,
) -> Result<ThreefoldEstimate> {
    if !(n_heralds > 0.0) {
        return Err(Error::Degenerate("threefold estimate needs N_H > 0".to_owned()));
    }
    check_positive("correction", correction)?;
    if n as f64 > n_heralds {
        return Err(Error::out_of_range(
            "n",
            n as f64,
            "expected at most N_H coincidences",
        ));
    }
    let k = match method {
        ThreefoldMethod::Mle => n as f64,
        ThreefoldMethod::Ce => n as f64 + 1.0,
    };
    Ok(ThreefoldEstimate {
        p11: Uncertain::new(correction * k / n_heralds, correction * k.sqrt() / n_heralds),
        method,
        n,
        n_heralds,
        correction,
    })
}

/// Flat-prior posterior `Ω(p) = N_H e^(−N_H p) (N_H p)^n / n!` of the
/// threefold probability after observing `n` coincidences in `N_H` heralds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Posterior {
    pub n: u64,
    pub n_heralds: f64,
    ln_n_factorial: f64,
}

pub fn posterior_density(n: u64, n_heralds: f64) -> Result<Posterior> {
    if !(n_heralds > 0.0 && n_heralds.is_finite()) {
        return Err(Error::Degenerate("posterior needs N_H > 0".to_owned()));
    }
    Ok(Posterior {
        n,
        n_heralds,
        ln_n_factorial: ln_factorial(n),
    })
}

fn ln_factorial(n: u64) -> f64 {
    if n < 256 {
        (2..=n).map(|k| (k as f64).ln()).sum()
    } else {
        // Stirling series; relative error below 1e-15 in this range.
        let x = n as f64;
        x * x.ln() - x + 0.5 * (2.0 * std::f64::consts::PI * x).ln() + 1.0 / (12.0 * x)
            - 1.0 / (360.0 * x.powi(3))
    }
}

impl Posterior {
    pub fn ln_density(&self, p: f64) -> f64 {
        if p < 0.0 {
            return f64::NEG_INFINITY;
        }
        let x = self.n_heralds * p;
        let power = if self.n == 0 { 0.0 } else { self.n as f64 * x.ln() };
        self.n_heralds.ln() - x + power - self.ln_n_factorial
    }

    pub fn density(&self, p: f64) -> f64 {
        self.ln_density(p).exp()
    }

    /// `(n + 1) / N_H`
    pub fn mean(&self) -> f64 {
        (self.n as f64 + 1.0) / self.n_heralds
    }

    /// `(n + 1)(n + 2) / N_H²`
    pub fn second_moment(&self) -> f64 {
        let n = self.n as f64;
        (n + 1.0) * (n + 2.0) / self.n_heralds.powi(2)
    }

    /// `√(n + 1) / N_H`
    pub fn std_dev(&self) -> f64 {
        (self.n as f64 + 1.0).sqrt() / self.n_heralds
    }
}

/// `C ≈ η (V − 2/√(ḡ − 1))`, clamped at 0.
pub fn simple_concurrence(eta: f64, visibility: f64, gsi: f64) -> Result<f64> {
    check_probability("eta", eta)?;
    check_probability("visibility", visibility)?;
    if !(gsi > 1.0) {
        return Err(Error::out_of_range("gsi", gsi, "expected a cross-correlation > 1"));
    }
    Ok((eta * (visibility - 2.0 / (gsi - 1.0).sqrt())).max(0.0))
}

/// One phase setting of a fringe scan with the counts of detectors 1 and 2.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FringePoint {
    pub phase: f64,
    pub counts: [f64; 2],
}

/// `count(φ) = A (1 + V cos(φ − φ0))` fitted to one detector.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VisibilityFit {
    pub visibility: Uncertain,
    pub amplitude: f64,
    pub phase_offset: f64,
}

/// Fits both detectors of a scan independently.
pub fn fit_visibility(scan: &[FringePoint]) -> Result<[VisibilityFit; 2]> {
    let phases: Vec<f64> = scan.iter().map(|p| p.phase).collect();
    let fit = |k: usize| {
        let counts: Vec<f64> = scan.iter().map(|p| p.counts[k]).collect();
        fit_fringe(&phases, &counts)
    };
    Ok([fit(0)?, fit(1)?])
}

/// Weighted linear least squares of `c0 + c1 cos φ + c2 sin φ` with Poisson
/// weights `1 / max(count, 1)`; `V = √(c1² + c2²) / c0`, clamped to `[0, 1]`.
pub fn fit_fringe(phases: &[f64], counts: &[f64]) -> Result<VisibilityFit> {
    if phases.len() != counts.len() {
        return Err(Error::Degenerate(format!(
            "{} phases but {} count values",
            phases.len(),
            counts.len()
        )));
    }
    for (i, (&phi, &c)) in phases.iter().zip(counts).enumerate() {
        if !phi.is_finite() {
            return Err(Error::out_of_range(format!("scan[{i}].phase"), phi, "expected a finite phase"));
        }
        check_non_negative(&format!("scan[{i}].counts"), c)?;
    }
    let tau = std::f64::consts::TAU;
    let mut distinct: Vec<f64> = phases.iter().map(|p| p.rem_euclid(tau)).collect();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup_by(|a, b| (*a - *b).abs() < 1e-9);
    if distinct.len() >= 2 && (distinct[0] + tau - distinct[distinct.len() - 1]).abs() < 1e-9 {
        distinct.pop();
    }
    if distinct.len() < 4 {
        return Err(Error::Degenerate(format!(
            "visibility fit needs at least 4 distinct phases, got {}",
            distinct.len()
        )));
    }

    let mut normal = [[0.0; 3]; 3];
    let mut rhs = [0.0; 3];
    for (&phi, &y) in phases.iter().zip(counts) {
        let basis = [1.0, phi.cos(), phi.sin()];
        let w = 1.0 / y.max(1.0);
        for i in 0..3 {
            rhs[i] += w * basis[i] * y;
            for j in 0..3 {
                normal[i][j] += w * basis[i] * basis[j];
            }
        }
    }
    let cov = invert3(&normal)?;
    let c: Vec<f64> = (0..3).map(|i| (0..3).map(|j| cov[i][j] * rhs[j]).sum()).collect();
    if !(c[0] > 0.0) {
        return Err(Error::Degenerate("fringe has no counts to fit".to_owned()));
    }
    let r = c[1].hypot(c[2]);
    let v = r / c[0];
    let grad = if r > 0.0 {
        [-v / c[0], c[1] / (c[0] * r), c[2] / (c[0] * r)]
    } else {
        [0.0, 1.0 / c[0], 1.0 / c[0]]
    };
    let var: f64 = (0..3)
        .flat_map(|i| (0..3).map(move |j| (i, j)))
        .map(|(i, j)| grad[i] * cov[i][j] * grad[j])
        .sum();
    Ok(VisibilityFit {
        visibility: Uncertain::new(v.clamp(0.0, 1.0), var.max(0.0).sqrt()),
        amplitude: c[0],
        phase_offset: c[2].atan2(c[1]),
    })
}

fn invert3(m: &[[f64; 3]; 3]) -> Result<[[f64; 3]; 3]> {
    let cof = |r0: usize, r1: usize, c0: usize, c1: usize| m[r0][c0] * m[r1][c1] - m[r0][c1] * m[r1][c0];
    let adj = [
        [cof(1, 2, 1, 2), -cof(0, 2, 1, 2), cof(0, 1, 1, 2)],
        [-cof(1, 2, 0, 2), cof(0, 2, 0, 2), -cof(0, 1, 0, 2)],
        [cof(1, 2, 0, 1), -cof(0, 2, 0, 1), cof(0, 1, 0, 1)],
    ];
    let det = m[0][0] * adj[0][0] + m[0][1] * adj[1][0] + m[0][2] * adj[2][0];
    let scale = m.iter().flatten().fold(0.0_f64, |a, x| a.max(x.abs()));
    if !(det.abs() > 1e-12 * scale.powi(3)) {
        return Err(Error::Degenerate("singular fringe design matrix".to_owned()));
    }
    Ok(adj.map(|row| row.map(|x| x / det)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn empty_counts_give_unit_vacuum() {
        let t = ProbabilityTable::from_rates(
            Uncertain::exact(0.0),
            Uncertain::exact(0.0),
            Uncertain::exact(0.0),
        )
        .unwrap();
        assert_eq!(t.p00.value, 1.0);
    }

    #[test]
    fn full_detection_is_flagged() {
        let r = ProbabilityTable::from_rates(
            Uncertain::exact(0.5),
            Uncertain::exact(0.5),
            Uncertain::exact(0.0),
        );
        assert!(matches!(r, Err(Error::Degenerate(_))));
    }

    #[test]
    fn xcorr_examples() {
        let p = p11_xcorr(
            Uncertain::exact(1e-4),
            Uncertain::exact(1e-4),
            Uncertain::exact(2.0),
        )
        .unwrap();
        assert_relative_eq!(p.value, 4e-8, max_relative = 1e-12);
        let inf = p11_xcorr(
            Uncertain::exact(1e-4),
            Uncertain::exact(1e-4),
            Uncertain::exact(f64::INFINITY),
        )
        .unwrap();
        assert_eq!(inf.value, 0.0);
        assert!(p11_xcorr(Uncertain::exact(1e-4), Uncertain::exact(1e-4), Uncertain::exact(1.0)).is_err());
    }

    #[test]
    fn bound_examples() {
        let t = ProbabilityTable {
            p00: Uncertain::exact(0.0),
            p01: Uncertain::exact(0.5),
            p10: Uncertain::exact(0.5),
            p11: Uncertain::exact(0.0),
        };
        let c = concurrence_bound(Uncertain::exact(1.0), &t, Method::Xcorr).unwrap();
        assert_eq!(c.value, 1.0);

        let t = ProbabilityTable::from_rates(
            Uncertain::exact(1e-5),
            Uncertain::exact(1e-5),
            Uncertain::exact(1e-6),
        )
        .unwrap();
        let c = concurrence_bound(Uncertain::exact(0.965), &t, Method::Xcorr).unwrap();
        assert_eq!(c.value, 0.0);
    }

    #[test]
    fn zero_coincidence_estimates() {
        let mle = threefold_estimate(0, 1e9, ThreefoldMethod::Mle, 2.27).unwrap();
        assert_eq!((mle.p11.value, mle.p11.sigma), (0.0, 0.0));
        let ce = threefold_estimate(0, 1e9, ThreefoldMethod::Ce, 2.27).unwrap();
        assert_relative_eq!(ce.p11.value, 2.27e-9, max_relative = 1e-12);
        assert_eq!(ce.p11.sigma, ce.p11.value);
        assert!(threefold_estimate(3, 2.0, ThreefoldMethod::Mle, 1.0).is_err());
        assert!(threefold_estimate(0, 0.0, ThreefoldMethod::Mle, 1.0).is_err());
    }

    #[test]
    fn posterior_closed_forms() {
        let p = posterior_density(0, 1e6).unwrap();
        assert_relative_eq!(p.mean(), 1e-6);
        assert_relative_eq!(p.std_dev(), 1e-6);
        let p = posterior_density(2, 1e6).unwrap();
        assert_relative_eq!(p.mean(), 3e-6);
        assert_relative_eq!(p.std_dev(), 3f64.sqrt() * 1e-6);
        assert!(posterior_density(1, 0.0).is_err());
        assert_relative_eq!(ln_factorial(300), (2..=300u64).map(|k| (k as f64).ln()).sum::<f64>(), max_relative = 1e-14);
    }

    #[test]
    fn simple_concurrence_limits() {
        assert_relative_eq!(simple_concurrence(1.0, 1.0, f64::INFINITY).unwrap(), 1.0);
        assert_eq!(simple_concurrence(0.5, 2.0 / 3.0, 10.0).unwrap(), 0.0);
        assert!(simple_concurrence(0.5, 0.9, 1.0).is_err());
    }

    #[test]
    fn gsi_estimator_edges() {
        let g = gsi_from_counts(0.0, 100.0, 200.0, 1e6).unwrap();
        assert_eq!(g.value, 0.0);
        assert_relative_eq!(g.sigma, 1e6 / 2e4);
        assert!(gsi_from_counts(1.0, 0.0, 1.0, 10.0).is_err());
    }

    #[test]
    fn fringe_fit_round_trip_and_degenerate_scans() {
        let phases: Vec<f64> = (0..16).map(|k| k as f64 * std::f64::consts::TAU / 16.0).collect();
        let counts: Vec<f64> = phases.iter().map(|p| 1000.0 * (1.0 + 0.965 * (p - 0.4).cos())).collect();
        let fit = fit_fringe(&phases, &counts).unwrap();
        assert_relative_eq!(fit.visibility.value, 0.965, max_relative = 1e-9);
        assert_relative_eq!(fit.phase_offset, 0.4, max_relative = 1e-9);

        let flat = vec![500.0; phases.len()];
        assert!(fit_fringe(&phases, &flat).unwrap().visibility.value < 1e-12);

        let few = [0.0, 1.0, 2.0, std::f64::consts::TAU];
        assert!(fit_fringe(&few, &[1.0, 2.0, 3.0, 1.0]).is_err());
    }

    #[test]
    fn bootstrap_matches_delta_method_scale() {
        let counts = TableCounts {
            heralds_a: 1e8,
            detections_a: 1e4,
            heralds_b: 1e8,
            detections_b: 1.2e4,
            heralds_threefold: 1e8,
            threefold: 20.0,
            correction: 1.0,
        };
        let v = Uncertain::new(0.965, 0.012);
        let boot = bootstrap_concurrence(v, &counts, Method::ThreefoldMle, 4000, 3).unwrap();
        let t = ProbabilityTable::from_rates(
            Uncertain::new(1e-4, 1e2 / 1e8),
            Uncertain::new(1.2e-4, 1.2e4f64.sqrt() / 1e8),
            Uncertain::new(2e-7, 20f64.sqrt() / 1e8),
        )
        .unwrap();
        let delta = concurrence_bound(v, &t, Method::ThreefoldMle).unwrap();
        assert_relative_eq!(boot.value, delta.value, max_relative = 1e-9);
        assert!((boot.sigma / delta.sigma - 1.0).abs() < 0.15, "{} vs {}", boot.sigma, delta.sigma);
        let again = bootstrap_concurrence(v, &counts, Method::ThreefoldMle, 4000, 3).unwrap();
        assert_eq!(boot, again);
    }
}
