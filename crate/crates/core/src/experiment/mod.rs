//! Campaign orchestration: pump-power sweeps, the threefold-coincidence
//! campaign, fringe scans and the transmission budget.

pub mod paper;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{check_non_negative, check_positive, check_probability, Error, Result};
use crate::estimators::{
    concurrence_bound, fit_visibility, gsi_from_record, p11_xcorr,
    probabilities_from_counts, simple_concurrence, twofold_per_herald, threefold_estimate, ConcurrenceEstimate,
    FringePoint, Method, ProbabilityTable, ThreefoldEstimate, ThreefoldMethod,
    Uncertain, VisibilityFit,
};
use crate::montecarlo::{
    expected_counts, run_trials_with, Arm, ExpectedCounts, HeraldedCounts, PhaseMode, TrialConfig,
};
use crate::optics::{
    effective_efficiencies, fringe_probabilities, gsi_model, p11_theory, BeamSplitterCoeffs,
    DetectorParams, MemoryParams,
};
use crate::parallel::Execution;
use crate::photon_stats::{lambda_from_pump, SourceParams, DEFAULT_N_MAX, DEFAULT_TRUNCATION_TOLERANCE};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Mode {
    #[serde(rename = "analytic")]
    Analytic,
    #[serde(rename = "mc", alias = "montecarlo")]
    MonteCarlo,
}

/// Per-stage transmission of the heralded signal photon.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransmissionStages {
    /// Signal photon in the fiber per herald.
    pub fiber: f64,
    pub memory: f64,
    /// Interferometer transmission including both beamsplitter passes.
    pub interferometer: f64,
    pub detector: f64,
}

impl TransmissionStages {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("fiber", self.fiber),
            ("memory", self.memory),
            ("interferometer", self.interferometer),
            ("detector", self.detector),
        ] {
            if !(v > 0.0 && v <= 1.0) {
                return Err(Error::out_of_range(name, v, "expected a stage transmission in (0, 1]"));
            }
        }
        Ok(())
    }

    pub fn product(&self) -> f64 {
        self.fiber * self.memory * self.interferometer * self.detector
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThreefoldConfig {
    pub pump_power: f64,
    /// `N_H` of the analytic campaign; the Monte Carlo campaign counts its own.
    pub heralds: f64,
    /// Measured `p10 + p01` replacing the model value in the analytic campaign.
    pub twofold_per_herald: Option<Uncertain>,
    /// Fixed correction factor; recomputed from the beamsplitter when absent.
    pub correction: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FringeConfig {
    pub pump_power: f64,
    /// Phase settings in radians.
    pub phases: Vec<f64>,
    /// Heralds accumulated per phase setting in the analytic scan.
    pub heralds_per_point: f64,
    pub poisson_noise: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub alpha: f64,
    pub alpha_sigma: f64,
    /// Memory parameters shared by both arms.
    pub memory: MemoryParams,
    pub ratio_sigma: f64,
    pub bs: BeamSplitterCoeffs,
    pub detectors: [DetectorParams; 2],
    pub idler_detector: DetectorParams,
    pub stages: TransmissionStages,
    pub visibility: Uncertain,
    pub coincidence_window_ns: f64,
    /// Informational.
    pub storage_time_ns: f64,
    pub pump_powers: Vec<f64>,
    /// Use the published conditional probabilities as `p_c` at tabulated powers.
    pub reference_rates: bool,
    pub trials: u64,
    pub seed: u64,
    pub mode: Mode,
    pub n_max: usize,
    pub truncation_tolerance: f64,
    pub threefold: ThreefoldConfig,
    pub fringe: FringeConfig,
}

fn even_phases(n: usize) -> Vec<f64> {
    (0..n).map(|k| k as f64 * std::f64::consts::TAU / n as f64).collect()
}

impl ExperimentConfig {
    /// Parameters of the published experiment, evaluated analytically.
    pub fn paper() -> Self {
        let half_dark = paper::ETA_DARK / 2.0;
        Self {
            alpha: paper::ALPHA,
            alpha_sigma: paper::ALPHA_SIGMA,
            memory: MemoryParams {
                eta_echo: paper::ETA_ECHO,
                eta_trans: paper::ETA_ECHO * paper::RATIO_MEAN,
            },
            ratio_sigma: paper::RATIO_SIGMA,
            bs: BeamSplitterCoeffs::MEASURED,
            detectors: [
                DetectorParams {
                    efficiency: 0.2,
                    dark_prob: half_dark,
                },
                DetectorParams {
                    efficiency: 0.4,
                    dark_prob: half_dark,
                },
            ],
            idler_detector: DetectorParams::ideal(1.2e-3),
            stages: TransmissionStages {
                fiber: paper::FIBER,
                memory: paper::MEMORY,
                interferometer: paper::INTERFEROMETER,
                detector: paper::DETECTOR,
            },
            visibility: paper::VISIBILITY,
            coincidence_window_ns: 10.0,
            storage_time_ns: 33.0,
            pump_powers: paper::pump_powers(),
            reference_rates: true,
            trials: 1_000_000_000_000,
            seed: 0,
            mode: Mode::Analytic,
            n_max: DEFAULT_N_MAX,
            truncation_tolerance: DEFAULT_TRUNCATION_TOLERANCE,
            threefold: ThreefoldConfig {
                pump_power: paper::THREEFOLD_PUMP_MW,
                heralds: paper::THREEFOLD_HERALDS,
                twofold_per_herald: Some(paper::TWOFOLD_PER_HERALD),
                correction: None,
            },
            fringe: FringeConfig {
                pump_power: paper::THREEFOLD_PUMP_MW,
                phases: even_phases(16),
                heralds_per_point: 5e8,
                poisson_noise: true,
            },
        }
    }

    /// Boosted efficiencies so that Monte Carlo campaigns of a few million
    /// windows resolve every probability, including threefold coincidences.
    pub fn desk() -> Self {
        Self {
            alpha: 1e-3,
            alpha_sigma: 0.0,
            memory: MemoryParams {
                eta_echo: 0.5,
                eta_trans: 0.1,
            },
            ratio_sigma: 0.0,
            bs: BeamSplitterCoeffs::MEASURED,
            detectors: [DetectorParams::ideal(0.25), DetectorParams::ideal(0.5)],
            idler_detector: DetectorParams::ideal(0.3),
            stages: TransmissionStages {
                fiber: 0.9,
                memory: 0.5,
                interferometer: 0.75,
                detector: 0.375,
            },
            visibility: paper::VISIBILITY,
            coincidence_window_ns: 10.0,
            storage_time_ns: 33.0,
            pump_powers: vec![10.0, 20.0, 30.0, 40.0, 50.0],
            reference_rates: false,
            trials: 25_000_000,
            seed: 42,
            mode: Mode::MonteCarlo,
            n_max: DEFAULT_N_MAX,
            truncation_tolerance: DEFAULT_TRUNCATION_TOLERANCE,
            threefold: ThreefoldConfig {
                pump_power: 20.0,
                heralds: 1.5e5,
                twofold_per_herald: None,
                correction: None,
            },
            fringe: FringeConfig {
                pump_power: 20.0,
                phases: even_phases(12),
                heralds_per_point: 1e5,
                poisson_noise: true,
            },
        }
    }

    pub fn ratio(&self) -> Result<f64> {
        self.memory.ratio()
    }

    /// Combined signal dark-count probability per window.
    pub fn eta_dark(&self) -> f64 {
        1.0 - (1.0 - self.detectors[0].dark_prob) * (1.0 - self.detectors[1].dark_prob)
    }

    /// Fraction of photons entering the interferometer that pass both
    /// beamsplitter passes when the arms are equally lossless.
    fn beamsplitter_throughput(&self) -> f64 {
        let bs = &self.bs;
        bs.transmission() * (bs.at2 + bs.ar2) + bs.reflection() * (bs.br2 + bs.bt2)
    }

    pub fn validate(&self) -> Result<()> {
        check_positive("alpha", self.alpha)?;
        check_non_negative("alpha_sigma", self.alpha_sigma)?;
        check_non_negative("ratio_sigma", self.ratio_sigma)?;
        self.memory.validate().map_err(|e| e.within("memory"))?;
        self.bs.validate().map_err(|e| e.within("bs"))?;
        for (name, det) in ["detectors[0]", "detectors[1]"].iter().zip(&self.detectors) {
            det.validate().map_err(|e| e.within(name))?;
        }
        self.idler_detector.validate().map_err(|e| e.within("idler_detector"))?;
        self.stages.validate().map_err(|e| e.within("stages"))?;
        if self.stages.interferometer > self.beamsplitter_throughput() {
            return Err(Error::out_of_range(
                "stages.interferometer",
                self.stages.interferometer,
                "expected at most the beamsplitter throughput",
            ));
        }
        check_probability("visibility.value", self.visibility.value)?;
        check_non_negative("visibility.sigma", self.visibility.sigma)?;
        check_positive("coincidence_window_ns", self.coincidence_window_ns)?;
        check_non_negative("storage_time_ns", self.storage_time_ns)?;
        if self.pump_powers.is_empty() {
            return Err(Error::Degenerate("pump_powers: expected at least one power".to_owned()));
        }
        for (i, &p) in self.pump_powers.iter().enumerate() {
            lambda_from_pump(self.alpha, p).map_err(|e| e.within(&format!("pump_powers[{i}]")))?;
        }
        if self.trials == 0 {
            return Err(Error::out_of_range("trials", 0.0, "expected at least one trial"));
        }
        if self.n_max < 1 {
            return Err(Error::out_of_range("n_max", 0.0, "expected n_max >= 1"));
        }
        check_positive("truncation_tolerance", self.truncation_tolerance)?;
        lambda_from_pump(self.alpha, self.threefold.pump_power).map_err(|e| e.within("threefold"))?;
        check_positive("threefold.heralds", self.threefold.heralds)?;
        if let Some(c) = self.threefold.correction {
            check_positive("threefold.correction", c)?;
        }
        if let Some(t) = self.threefold.twofold_per_herald {
            check_probability("threefold.twofold_per_herald.value", t.value)?;
        }
        lambda_from_pump(self.alpha, self.fringe.pump_power).map_err(|e| e.within("fringe"))?;
        check_positive("fringe.heralds_per_point", self.fringe.heralds_per_point)?;
        Ok(())
    }

    /// Trial-level configuration of one run at `pump_power`.
    pub fn trial_config(&self, pump_power: f64, blocked: Option<Arm>, seed: u64) -> Result<TrialConfig> {
        let cfg = TrialConfig {
            source: SourceParams {
                alpha: self.alpha,
                pump_power,
            },
            memories: [self.memory; 2],
            heralding_efficiency: self.stages.fiber,
            interferometer_transmission: self.stages.interferometer / self.beamsplitter_throughput(),
            idler_detector: self.idler_detector,
            bs: self.bs,
            detectors: self.detectors,
            phase_mode: PhaseMode::Randomized,
            visibility: self.visibility.value,
            blocked,
            trials: self.trials,
            seed,
            window_ns: self.coincidence_window_ns,
            n_max: self.n_max,
            truncation_tolerance: self.truncation_tolerance,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Correction factor converting recombined threefold probabilities.
    pub fn correction(&self) -> Result<f64> {
        match self.threefold.correction {
            Some(c) => Ok(c),
            None => Ok(effective_efficiencies(&self.bs, &self.detectors[0], &self.detectors[1])?.correction),
        }
    }
}

/// Independent seed for sub-run `tag` of a campaign (splitmix64 finalizer).
pub fn derive_seed(seed: u64, tag: u64) -> u64 {
    let mut z = seed ^ tag.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Counts of the three runs behind one sweep point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PointCounts {
    /// Arm B blocked.
    pub arm_a: ExpectedCounts,
    /// Arm A blocked.
    pub arm_b: ExpectedCounts,
    pub both: ExpectedCounts,
}

/// Runs (or evaluates) the arm-A-only, arm-B-only and open configurations.
pub fn point_counts(cfg: &ExperimentConfig, power: f64, tag: u64, exec: Execution) -> Result<PointCounts> {
    let run = |blocked: Option<Arm>, k: u64| -> Result<ExpectedCounts> {
        let tc = cfg.trial_config(power, blocked, derive_seed(cfg.seed, 3 * tag + k))?;
        match cfg.mode {
            Mode::Analytic => expected_counts(&tc),
            Mode::MonteCarlo => Ok(run_trials_with(&tc, exec)?.as_expected()),
        }
    };
    Ok(PointCounts {
        arm_a: run(Some(Arm::B), 0)?,
        arm_b: run(Some(Arm::A), 1)?,
        both: run(None, 2)?,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub power_mw: f64,
    pub lambda: f64,
    pub gsi_model: f64,
    /// Model curve at the extremes of the `α` and ratio uncertainties.
    pub gsi_model_band: [f64; 2],
    pub gsi_est: Uncertain,
    pub p10: Uncertain,
    pub p01: Uncertain,
    pub p11_xcorr: Uncertain,
    pub p11_theory: f64,
    pub c_bound: ConcurrenceEstimate,
}

impl SweepRow {
    fn herald_free(power: f64) -> Self {
        Self {
            power_mw: power,
            lambda: 0.0,
            gsi_model: f64::NAN,
            gsi_model_band: [f64::NAN; 2],
            gsi_est: Uncertain::new(f64::NAN, f64::NAN),
            p10: Uncertain::exact(0.0),
            p01: Uncertain::exact(0.0),
            p11_xcorr: Uncertain::exact(0.0),
            p11_theory: 0.0,
            c_bound: ConcurrenceEstimate {
                value: 0.0,
                sigma: 0.0,
                method: Method::Xcorr,
            },
        }
    }
}

/// `ḡ` model band from the `α` and ratio uncertainties.
pub fn gsi_band(cfg: &ExperimentConfig, power: f64, p_c: f64) -> Result<[f64; 2]> {
    let ratio = cfg.ratio()?;
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for da in [-1.0, 1.0] {
        for dr in [-1.0, 1.0] {
            let lambda = lambda_from_pump((cfg.alpha + da * cfg.alpha_sigma).max(f64::MIN_POSITIVE), power)?;
            let g = gsi_model(lambda, (ratio + dr * cfg.ratio_sigma).max(0.0), cfg.eta_dark(), p_c)?;
            lo = lo.min(g);
            hi = hi.max(g);
        }
    }
    Ok([lo, hi])
}

/// One row of the sweep from the counts of its three runs.
pub fn sweep_row(cfg: &ExperimentConfig, power: f64, counts: &PointCounts) -> Result<SweepRow> {
    let lambda = lambda_from_pump(cfg.alpha, power)?;
    let table = probabilities_from_counts(&counts.arm_a, &counts.arm_b, Uncertain::exact(0.0))?;
    let (p10, p01) = (table.p10, table.p01);
    let p_c = match (cfg.reference_rates, paper::table_row(power)) {
        (true, Some(row)) => row.p_c(),
        _ => (p10.value + p01.value) / 2.0,
    };
    let ratio = cfg.ratio()?;
    let gsi_est = gsi_from_record(&counts.both)?;
    let p11 = p11_xcorr(p10, p01, gsi_est)?;
    let table = ProbabilityTable::from_rates(p10, p01, p11)?;
    Ok(SweepRow {
        power_mw: power,
        lambda,
        gsi_model: gsi_model(lambda, ratio, cfg.eta_dark(), p_c)?,
        gsi_model_band: gsi_band(cfg, power, p_c)?,
        gsi_est,
        p10,
        p01,
        p11_xcorr: p11,
        p11_theory: p11_theory(p10.value, p01.value, cfg.alpha, power, ratio, cfg.eta_dark(), p_c)?,
        c_bound: concurrence_bound(cfg.visibility, &table, Method::Xcorr)?,
    })
}

/// One row per configured pump power, in configuration order.
pub fn pump_sweep(cfg: &ExperimentConfig) -> Result<Vec<SweepRow>> {
    pump_sweep_with(cfg, Execution::from_env())
}

pub fn pump_sweep_with(cfg: &ExperimentConfig, exec: Execution) -> Result<Vec<SweepRow>> {
    cfg.validate()?;
    cfg.pump_powers
        .iter()
        .enumerate()
        .map(|(i, &power)| {
            if power == 0.0 {
                return Ok(SweepRow::herald_free(power));
            }
            let counts = point_counts(cfg, power, i as u64, exec)?;
            sweep_row(cfg, power, &counts)
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThreefoldResult {
    pub n_heralds: f64,
    pub twofold_per_herald: Uncertain,
    pub correction: f64,
    /// Correction without the `q20 + q02 ≈ q11` approximation.
    pub exact_correction: f64,
    pub mle: ThreefoldEstimate,
    pub ce: ThreefoldEstimate,
    pub c_mle: ConcurrenceEstimate,
    pub c_ce: ConcurrenceEstimate,
}

/// Both threefold estimators and their concurrence bounds, with `p10 + p01`
/// observed on the same campaign and split evenly between the two arms.
pub fn threefold_from_counts(
    cfg: &ExperimentConfig,
    n: u64,
    n_heralds: f64,
    twofold_per_herald: Uncertain,
) -> Result<ThreefoldResult> {
    let correction = cfg.correction()?;
    let exact_correction =
        effective_efficiencies(&cfg.bs, &cfg.detectors[0], &cfg.detectors[1])?.exact_correction;
    let mle = threefold_estimate(n, n_heralds, ThreefoldMethod::Mle, correction)?;
    let ce = threefold_estimate(n, n_heralds, ThreefoldMethod::Ce, correction)?;
    let bound = |est: &ThreefoldEstimate| -> Result<ConcurrenceEstimate> {
        let half = Uncertain::new(twofold_per_herald.value / 2.0, twofold_per_herald.sigma / 2.0);
        let table = ProbabilityTable::from_rates(half, half, est.p11)?;
        concurrence_bound(cfg.visibility, &table, est.method.concurrence_method())
    };
    Ok(ThreefoldResult {
        n_heralds,
        twofold_per_herald,
        correction,
        exact_correction,
        c_mle: bound(&mle)?,
        c_ce: bound(&ce)?,
        mle,
        ce,
    })
}

/// Threefold campaign at `cfg.threefold.pump_power`.
///
/// Analytic mode uses `cfg.threefold.heralds` and either the observed count or
/// a seeded Poisson draw around the expected one. Monte Carlo mode simulates
/// `cfg.trials` windows and uses the sampled counts (`n_observed` then only
/// replaces the threefold count).
pub fn threefold_campaign(cfg: &ExperimentConfig, n_observed: Option<u64>) -> Result<ThreefoldResult> {
    threefold_campaign_with(cfg, n_observed, Execution::from_env())
}

pub fn threefold_campaign_with(
    cfg: &ExperimentConfig,
    n_observed: Option<u64>,
    exec: Execution,
) -> Result<ThreefoldResult> {
    cfg.validate()?;
    let power = cfg.threefold.pump_power;
    let tc = cfg.trial_config(power, None, derive_seed(cfg.seed, u64::MAX))?;
    let (n_heralds, twofold, n) = match cfg.mode {
        Mode::Analytic => {
            let e = expected_counts(&tc)?;
            let n_h = cfg.threefold.heralds;
            let per_herald = if e.heralds() > 0.0 { 1.0 / e.heralds() } else { 0.0 };
            let twofold = match cfg.threefold.twofold_per_herald {
                Some(t) => t,
                None => {
                    let rate = e.twofold() * per_herald;
                    Uncertain::new(rate, (rate * n_h).sqrt() / n_h)
                }
            };
            let n = match n_observed {
                Some(n) => n,
                None => {
                    let mean = e.n12_given_h() * per_herald * n_h;
                    poisson_draw(mean, derive_seed(cfg.seed, u64::MAX - 1))
                }
            };
            (n_h, twofold, n)
        }
        Mode::MonteCarlo => {
            let rec = run_trials_with(&tc, exec)?;
            let twofold = twofold_per_herald(&rec)?;
            (rec.heralds(), twofold, n_observed.unwrap_or(rec.n12_given_h))
        }
    };
    if !(n_heralds > 0.0) {
        return Err(Error::Degenerate("threefold campaign recorded no heralds".to_owned()));
    }
    threefold_from_counts(cfg, n, n_heralds, twofold)
}

fn poisson_draw(mean: f64, seed: u64) -> u64 {
    if !(mean > 0.0) {
        return 0;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Poisson::new(mean).map(|p| p.sample(&mut rng) as u64).unwrap_or(0)
}

/// Both concurrence methods on one simulated pump power.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MethodComparison {
    pub power_mw: f64,
    pub row: SweepRow,
    pub threefold: ThreefoldResult,
    /// `(C_xcorr − C_mle) / √(σ_xcorr² + σ_mle²)`
    pub z_mle: f64,
}

/// Runs the blocked-arm and open configurations at `power` once and applies
/// the cross-correlation method and the threefold method to the same data.
pub fn compare_methods(cfg: &ExperimentConfig, power: f64, exec: Execution) -> Result<MethodComparison> {
    cfg.validate()?;
    let counts = point_counts(cfg, power, 1000, exec)?;
    let row = sweep_row(cfg, power, &counts)?;
    let both = &counts.both;
    let twofold = twofold_per_herald(both)?;
    let threefold = threefold_from_counts(cfg, both.n12_given_h().round() as u64, both.heralds(), twofold)?;
    let (a, b) = (row.c_bound, threefold.c_mle);
    Ok(MethodComparison {
        power_mw: power,
        row,
        threefold,
        z_mle: (a.value - b.value) / (a.sigma.powi(2) + b.sigma.powi(2)).sqrt(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransmissionBudget {
    pub eta_total: f64,
    pub c_detected: f64,
    /// `C_detected` with detector and interferometer losses removed.
    pub c_after_crystals: f64,
}

pub fn transmission_budget(stages: &TransmissionStages, visibility: f64, gsi: f64) -> Result<TransmissionBudget> {
    stages.validate().map_err(|e| e.within("stages"))?;
    let eta_total = stages.product();
    let c_detected = simple_concurrence(eta_total, visibility, gsi)?;
    Ok(TransmissionBudget {
        eta_total,
        c_detected,
        c_after_crystals: c_detected / (stages.interferometer * stages.detector),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FringeScan {
    pub points: Vec<FringePoint>,
    pub fits: [VisibilityFit; 2],
}

/// Heralded counts of both detectors versus the stabilized phase.
///
/// Analytic mode scales the complementary fringes by the heralded detection
/// probability at `cfg.fringe.pump_power` and `heralds_per_point`, optionally
/// with Poisson noise on one stream per phase. Monte Carlo mode simulates
/// `cfg.trials` windows per phase with the phase fixed.
pub fn fringe_scan(cfg: &ExperimentConfig, phases: &[f64]) -> Result<FringeScan> {
    fringe_scan_with(cfg, phases, Execution::from_env())
}

pub fn fringe_scan_with(cfg: &ExperimentConfig, phases: &[f64], exec: Execution) -> Result<FringeScan> {
    cfg.validate()?;
    let power = cfg.fringe.pump_power;
    let points: Vec<FringePoint> = match cfg.mode {
        Mode::Analytic => {
            let tc = cfg.trial_config(power, None, cfg.seed)?;
            let e = expected_counts(&tc)?;
            if !(e.heralds() > 0.0) {
                return Err(Error::Degenerate("fringe scan at a power without heralds".to_owned()));
            }
            let p_det = e.twofold() / e.heralds();
            let [e1, e2] = [cfg.detectors[0].efficiency, cfg.detectors[1].efficiency];
            let mean_eff = (e1 + e2) / 2.0;
            check_positive("detectors[0].efficiency", e1)?;
            check_positive("detectors[1].efficiency", e2)?;
            let base = ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, 77));
            phases
                .iter()
                .enumerate()
                .map(|(i, &phase)| {
                    let (a, b) = fringe_probabilities(phase, cfg.visibility.value, p_det, e1 / mean_eff, e2 / mean_eff)?;
                    let mut counts = [a, b].map(|p| p * cfg.fringe.heralds_per_point);
                    if cfg.fringe.poisson_noise {
                        let mut rng = base.clone();
                        rng.set_stream(i as u64);
                        for c in &mut counts {
                            *c = if *c > 0.0 {
                                Poisson::new(*c).map(|p| p.sample(&mut rng)).unwrap_or(*c)
                            } else {
                                0.0
                            };
                        }
                    }
                    Ok(FringePoint { phase, counts })
                })
                .collect::<Result<_>>()?
        }
        Mode::MonteCarlo => phases
            .iter()
            .enumerate()
            .map(|(i, &phase)| {
                let mut tc = cfg.trial_config(power, None, derive_seed(cfg.seed, 5000 + i as u64))?;
                tc.phase_mode = PhaseMode::Fixed { phase };
                let rec = run_trials_with(&tc, exec)?;
                Ok(FringePoint {
                    phase,
                    counts: [rec.n1_given_h as f64, rec.n2_given_h as f64],
                })
            })
            .collect::<Result<_>>()?,
    };
    let fits = fit_visibility(&points)?;
    Ok(FringeScan { points, fits })
}
