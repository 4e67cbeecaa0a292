//! Trial-level simulation of the heralded two-memory setup.
//!
//! One trial is one coincidence window. Each trial draws an early and a late
//! pair number from the thermal law, heralds on the early idler with a
//! threshold detector, sends the surviving signal photons through the first
//! beamsplitter pass into memory arms A and B (early photons are stored and
//! retrieved with `η_echo`, late photons leak through with `η_trans`), and
//! recombines the arms on the second pass onto detectors 1 and 2.
//!
//! [`run_trials`] samples this model; [`expected_counts`] evaluates its exact
//! expectation. Random numbers come from a ChaCha stream per trial
//! (`stream = trial index`, key derived from the seed), so results are
//! independent of how trials are distributed over workers.

mod expected;
mod trials;

use serde::{Deserialize, Serialize};

use crate::error::{check_probability, Error, Result};
use crate::optics::{BeamSplitterCoeffs, DetectorParams, MemoryParams};
use crate::photon_stats::{SourceParams, DEFAULT_N_MAX, DEFAULT_TRUNCATION_TOLERANCE};

pub use expected::{expected_counts, two_photon_diagonal};
pub use trials::{run_trials, run_trials_with};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Arm {
    A,
    B,
}

/// Relative phase between the two memory arms at recombination.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum PhaseMode {
    /// Phase drifts freely; single photons split incoherently.
    Randomized,
    /// Stabilized phase in radians; single-photon components interfere.
    Fixed { phase: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrialConfig {
    pub source: SourceParams,
    /// Memory of arm A and arm B.
    pub memories: [MemoryParams; 2],
    /// Probability that a heralded signal photon reaches the interferometer.
    pub heralding_efficiency: f64,
    /// Loss inside the interferometer in addition to the beamsplitter coefficients.
    pub interferometer_transmission: f64,
    pub idler_detector: DetectorParams,
    pub bs: BeamSplitterCoeffs,
    /// Detectors 1 and 2 behind output ports `a` and `b`.
    pub detectors: [DetectorParams; 2],
    pub phase_mode: PhaseMode,
    pub visibility: f64,
    /// Arm blocked before the memories, if any.
    pub blocked: Option<Arm>,
    pub trials: u64,
    pub seed: u64,
    pub window_ns: f64,
    /// Fock cutoff for the analytic expectation.
    pub n_max: usize,
    pub truncation_tolerance: f64,
}

impl TrialConfig {
    /// Boosted-efficiency setup suited to desk-scale trial counts.
    pub fn desk(lambda: f64) -> Self {
        Self {
            source: SourceParams {
                alpha: 1e-3,
                pump_power: lambda * 1e3,
            },
            memories: [MemoryParams {
                eta_echo: 0.3,
                eta_trans: 0.3,
            }; 2],
            heralding_efficiency: 1.0,
            interferometer_transmission: 1.0,
            idler_detector: DetectorParams::ideal(0.1),
            bs: BeamSplitterCoeffs::MEASURED,
            detectors: [DetectorParams::ideal(0.25), DetectorParams::ideal(0.5)],
            phase_mode: PhaseMode::Randomized,
            visibility: 0.965,
            blocked: None,
            trials: 1_000_000,
            seed: 0,
            window_ns: 10.0,
            n_max: DEFAULT_N_MAX,
            truncation_tolerance: DEFAULT_TRUNCATION_TOLERANCE,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.source.lambda().map_err(|e| e.within("source"))?;
        for (arm, mem) in ["memories[0]", "memories[1]"].iter().zip(&self.memories) {
            mem.validate().map_err(|e| e.within(arm))?;
        }
        check_probability("heralding_efficiency", self.heralding_efficiency)?;
        check_probability("interferometer_transmission", self.interferometer_transmission)?;
        self.idler_detector.validate().map_err(|e| e.within("idler_detector"))?;
        if self.idler_detector.dark_prob >= 1.0 {
            return Err(Error::out_of_range(
                "idler_detector.dark_prob",
                self.idler_detector.dark_prob,
                "expected a probability in [0, 1)",
            ));
        }
        self.bs.validate().map_err(|e| e.within("bs"))?;
        for (name, det) in ["detectors[0]", "detectors[1]"].iter().zip(&self.detectors) {
            det.validate().map_err(|e| e.within(name))?;
        }
        check_probability("visibility", self.visibility)?;
        if let PhaseMode::Fixed { phase } = self.phase_mode {
            if !phase.is_finite() {
                return Err(Error::out_of_range("phase_mode.phase", phase, "expected a finite phase"));
            }
        }
        if self.trials == 0 {
            return Err(Error::out_of_range("trials", 0.0, "expected at least one trial"));
        }
        if !(self.window_ns > 0.0 && self.window_ns.is_finite()) {
            return Err(Error::out_of_range("window_ns", self.window_ns, "expected > 0"));
        }
        if self.n_max < 1 {
            return Err(Error::out_of_range("n_max", 0.0, "expected n_max >= 1"));
        }
        Ok(())
    }

    pub fn lambda(&self) -> Result<f64> {
        self.source.lambda()
    }

    /// Per-photon probabilities of an early (stored) and a late (transmitted)
    /// signal photon reaching the second beamsplitter pass from arm A and B.
    pub(crate) fn arm_survival(&self) -> ArmSurvival {
        let open = |arm: Arm| if self.blocked == Some(arm) { 0.0 } else { 1.0 };
        let inject = self.heralding_efficiency * self.interferometer_transmission;
        let to_a = inject * self.bs.transmission() * open(Arm::A);
        let to_b = inject * self.bs.reflection() * open(Arm::B);
        ArmSurvival {
            early: [to_a * self.memories[0].eta_echo, to_b * self.memories[1].eta_echo],
            late: [to_a * self.memories[0].eta_trans, to_b * self.memories[1].eta_trans],
        }
    }

    /// Combined dark-count probability of the two signal detectors.
    pub fn signal_dark(&self) -> f64 {
        1.0 - (1.0 - self.detectors[0].dark_prob) * (1.0 - self.detectors[1].dark_prob)
    }
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct ArmSurvival {
    pub early: [f64; 2],
    pub late: [f64; 2],
}

/// Output-port distribution `(k_a, k_b, weight)` of one photon in each arm,
/// including two-photon interference on the recombining beamsplitter.
///
/// Cross-port coincidences use the printed `a11`; bunched and lossy branches
/// follow the per-photon intensities. The measured intensities do not satisfy
/// unitarity exactly, so the weights are renormalized.
pub(crate) fn pair_routing(bs: &BeamSplitterCoeffs) -> [(u32, u32, f64); 6] {
    let a11 = bs.br2 * (bs.ar2 - bs.bt2).powi(2) / bs.ar2;
    let (la, lb) = (bs.loss_a(), bs.loss_b());
    let raw = [
        (1, 1, a11),
        (2, 0, 2.0 * bs.at2 * bs.br2),
        (0, 2, 2.0 * bs.ar2 * bs.bt2),
        (1, 0, bs.at2 * lb + bs.br2 * la),
        (0, 1, bs.ar2 * lb + bs.bt2 * la),
        (0, 0, la * lb),
    ];
    let total: f64 = raw.iter().map(|r| r.2).sum();
    raw.map(|(a, b, w)| (a, b, w / total))
}

/// Probability that a lone photon from `arm` exits port `a` and port `b`
/// when the phase is stabilized.
pub(crate) fn interfering_single(cfg: &TrialConfig, arm: usize, phase: f64) -> (f64, f64) {
    let survive = if arm == 0 {
        cfg.bs.at2 + cfg.bs.ar2
    } else {
        cfg.bs.br2 + cfg.bs.bt2
    };
    let c = cfg.visibility * phase.cos();
    (survive * (1.0 - c) / 2.0, survive * (1.0 + c) / 2.0)
}

/// Integer counts from a simulated campaign.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CountRecord {
    pub trials: u64,
    /// Idler clicks `N_H`.
    pub n_heralds: u64,
    pub n1_given_h: u64,
    pub n2_given_h: u64,
    /// Threefold coincidences `N_{12|H}`.
    pub n12_given_h: u64,
    /// Heralded windows with at least one signal click.
    pub n_signal_given_h: u64,
    pub n1: u64,
    pub n2: u64,
    pub n12: u64,
    /// Windows with at least one signal click.
    pub n_signal_singles: u64,
    pub n_idler_singles: u64,
}

impl CountRecord {
    pub fn check_invariants(&self) -> Result<()> {
        let ok = self.n12_given_h <= self.n1_given_h.min(self.n2_given_h)
            && self.n1_given_h.max(self.n2_given_h) <= self.n_signal_given_h
            && self.n_signal_given_h <= self.n_heralds
            && self.n_heralds <= self.trials
            && self.n12 <= self.n1.min(self.n2)
            && self.n_signal_singles <= self.trials;
        if ok {
            Ok(())
        } else {
            Err(Error::Degenerate(format!("inconsistent count record: {self:?}")))
        }
    }

    /// Wall-clock equivalent of the campaign at the given window length.
    pub fn duration_equivalent(&self, window_ns: f64) -> f64 {
        self.trials as f64 * window_ns * 1e-9
    }

    pub fn as_expected(&self) -> ExpectedCounts {
        ExpectedCounts {
            trials: self.trials as f64,
            n_heralds: self.n_heralds as f64,
            n1_given_h: self.n1_given_h as f64,
            n2_given_h: self.n2_given_h as f64,
            n12_given_h: self.n12_given_h as f64,
            n_signal_given_h: self.n_signal_given_h as f64,
            n1: self.n1 as f64,
            n2: self.n2 as f64,
            n12: self.n12 as f64,
            n_signal_singles: self.n_signal_singles as f64,
            n_idler_singles: self.n_idler_singles as f64,
        }
    }
}

impl std::ops::Add for CountRecord {
    type Output = Self;

    fn add(self, o: Self) -> Self {
        Self {
            trials: self.trials + o.trials,
            n_heralds: self.n_heralds + o.n_heralds,
            n1_given_h: self.n1_given_h + o.n1_given_h,
            n2_given_h: self.n2_given_h + o.n2_given_h,
            n12_given_h: self.n12_given_h + o.n12_given_h,
            n_signal_given_h: self.n_signal_given_h + o.n_signal_given_h,
            n1: self.n1 + o.n1,
            n2: self.n2 + o.n2,
            n12: self.n12 + o.n12,
            n_signal_singles: self.n_signal_singles + o.n_signal_singles,
            n_idler_singles: self.n_idler_singles + o.n_idler_singles,
        }
    }
}

/// Real-valued expectation of every field of a [`CountRecord`].
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExpectedCounts {
    pub trials: f64,
    pub n_heralds: f64,
    pub n1_given_h: f64,
    pub n2_given_h: f64,
    pub n12_given_h: f64,
    pub n_signal_given_h: f64,
    pub n1: f64,
    pub n2: f64,
    pub n12: f64,
    pub n_signal_singles: f64,
    pub n_idler_singles: f64,
}

impl ExpectedCounts {
    /// Same expectation for a different number of trials.
    pub fn scaled_to(&self, trials: f64) -> Self {
        let k = if self.trials > 0.0 { trials / self.trials } else { 0.0 };
        Self {
            trials,
            n_heralds: self.n_heralds * k,
            n1_given_h: self.n1_given_h * k,
            n2_given_h: self.n2_given_h * k,
            n12_given_h: self.n12_given_h * k,
            n_signal_given_h: self.n_signal_given_h * k,
            n1: self.n1 * k,
            n2: self.n2 * k,
            n12: self.n12 * k,
            n_signal_singles: self.n_signal_singles * k,
            n_idler_singles: self.n_idler_singles * k,
        }
    }
}

/// Read access shared by sampled and expected counts.
pub trait HeraldedCounts {
    fn trials(&self) -> f64;
    fn heralds(&self) -> f64;
    fn n1_given_h(&self) -> f64;
    fn n2_given_h(&self) -> f64;
    fn n12_given_h(&self) -> f64;
    fn n_signal_given_h(&self) -> f64;
    fn n1(&self) -> f64;
    fn n2(&self) -> f64;
    fn n12(&self) -> f64;
    fn n_signal_singles(&self) -> f64;
    fn n_idler_singles(&self) -> f64;

    /// `N_{1|H} + N_{2|H}`: heralded detections summed over both detectors.
    fn twofold(&self) -> f64 {
        self.n1_given_h() + self.n2_given_h()
    }
}

macro_rules! impl_counts {
    ($ty:ty, $conv:expr) => {
        impl HeraldedCounts for $ty {
            fn trials(&self) -> f64 {
                $conv(self.trials)
            }
            fn heralds(&self) -> f64 {
                $conv(self.n_heralds)
            }
            fn n1_given_h(&self) -> f64 {
                $conv(self.n1_given_h)
            }
            fn n2_given_h(&self) -> f64 {
                $conv(self.n2_given_h)
            }
            fn n12_given_h(&self) -> f64 {
                $conv(self.n12_given_h)
            }
            fn n_signal_given_h(&self) -> f64 {
                $conv(self.n_signal_given_h)
            }
            fn n1(&self) -> f64 {
                $conv(self.n1)
            }
            fn n2(&self) -> f64 {
                $conv(self.n2)
            }
            fn n12(&self) -> f64 {
                $conv(self.n12)
            }
            fn n_signal_singles(&self) -> f64 {
                $conv(self.n_signal_singles)
            }
            fn n_idler_singles(&self) -> f64 {
                $conv(self.n_idler_singles)
            }
        }
    };
}

impl_counts!(CountRecord, |v: u64| v as f64);
impl_counts!(ExpectedCounts, |v: f64| v);
