//! Linear-optics closed forms: the memory as a beamsplitter ladder, the
//! idler-signal cross-correlation model, and the two-photon algebra of the
//! recombining beamsplitter.
//!
//! Beamsplitter coefficients are stored as measured intensities. The closed
//! forms are evaluated exactly as written in terms of those intensities;
//! amplitudes are never re-derived with sign conventions, because the
//! measured values do not satisfy the lossless unitarity relation exactly.

use serde::{Deserialize, Serialize};

use crate::error::{check_non_negative, check_positive, check_probability, Error, Result};
use crate::photon_stats::check_pair_parameter;

/// Photon-echo memory seen as a linear optical element.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MemoryParams {
    /// Storage-and-retrieval efficiency.
    pub eta_echo: f64,
    /// Direct transmission of the ensemble (unabsorbed light).
    pub eta_trans: f64,
}

impl MemoryParams {
    pub fn from_ratio(eta_echo: f64, ratio: f64) -> Result<Self> {
        check_non_negative("ratio", ratio)?;
        let mem = Self {
            eta_echo,
            eta_trans: ratio * eta_echo,
        };
        mem.validate()?;
        Ok(mem)
    }

    pub fn validate(&self) -> Result<()> {
        check_probability("eta_echo", self.eta_echo)?;
        check_probability("eta_trans", self.eta_trans)?;
        if self.eta_echo + self.eta_trans > 1.0 + 1e-12 {
            return Err(Error::out_of_range(
                "eta_echo + eta_trans",
                self.eta_echo + self.eta_trans,
                "expected at most 1",
            ));
        }
        Ok(())
    }

    /// `η_trans / η_echo`.
    pub fn ratio(&self) -> Result<f64> {
        if self.eta_echo <= 0.0 {
            return Err(Error::out_of_range(
                "eta_echo",
                self.eta_echo,
                "expected > 0 when forming eta_trans / eta_echo",
            ));
        }
        Ok(self.eta_trans / self.eta_echo)
    }
}

/// Intensity coefficients of a lossy beamsplitter.
///
/// A photon in input mode `a` leaves in output `a` with probability `at2` and
/// in output `b` with `ar2`; a photon in `b` leaves in `a` with `br2` and in
/// `b` with `bt2`. The remainder is lost. `T = at2`, `R = br2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BeamSplitterCoeffs {
    pub at2: f64,
    pub ar2: f64,
    pub bt2: f64,
    pub br2: f64,
}

impl BeamSplitterCoeffs {
    /// The characterized beamsplitter of the two-crystal interferometer.
    pub const MEASURED: Self = Self {
        at2: 0.479,
        ar2: 0.422,
        bt2: 0.482,
        br2: 0.409,
    };

    pub const SYMMETRIC_LOSSLESS: Self = Self {
        at2: 0.5,
        ar2: 0.5,
        bt2: 0.5,
        br2: 0.5,
    };

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("at2", self.at2),
            ("ar2", self.ar2),
            ("bt2", self.bt2),
            ("br2", self.br2),
        ] {
            if !(v > 0.0 && v <= 0.5) {
                return Err(Error::out_of_range(name, v, "expected a coefficient in (0, 1/2]"));
            }
        }
        Ok(())
    }

    pub fn transmission(&self) -> f64 {
        self.at2
    }

    pub fn reflection(&self) -> f64 {
        self.br2
    }

    pub fn loss_a(&self) -> f64 {
        (1.0 - self.at2 - self.ar2).max(0.0)
    }

    pub fn loss_b(&self) -> f64 {
        (1.0 - self.bt2 - self.br2).max(0.0)
    }
}

/// Non-number-resolving detector.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DetectorParams {
    pub efficiency: f64,
    /// Dark-count probability per coincidence window.
    pub dark_prob: f64,
}

impl DetectorParams {
    pub fn ideal(efficiency: f64) -> Self {
        Self {
            efficiency,
            dark_prob: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        check_probability("efficiency", self.efficiency)?;
        check_probability("dark_prob", self.dark_prob)
    }
}

/// Two-photon diagonal of the retrieved fields, per heralding signal.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct TwoPhotonDiagonal {
    pub q11: f64,
    pub q20: f64,
    pub q02: f64,
}

impl TwoPhotonDiagonal {
    pub fn validate(&self) -> Result<()> {
        check_non_negative("q11", self.q11)?;
        check_non_negative("q20", self.q20)?;
        check_non_negative("q02", self.q02)?;
        let sum = self.q11 + self.q20 + self.q02;
        if sum > 1.0 + 1e-12 {
            return Err(Error::out_of_range("q11 + q20 + q02", sum, "expected at most 1"));
        }
        Ok(())
    }
}

/// Heisenberg-picture moments behind one memory.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MemoryMoments {
    /// `⟨d_s† d_s⟩`
    pub mean_signal: f64,
    /// `⟨d_i† d_i⟩`
    pub mean_idler: f64,
    /// `⟨d_i† d_i d_s† d_s⟩`
    pub cross_moment: f64,
}

impl MemoryMoments {
    /// Normalized cross-correlation `cross / (mean_signal · mean_idler)`.
    pub fn cross_correlation(&self) -> f64 {
        self.cross_moment / (self.mean_signal * self.mean_idler)
    }
}

/// Moments of the early idler mode and the single output temporal mode that
/// mixes the stored-and-retrieved early signal with the transmitted late one.
pub fn memory_moments(r: f64, mem: &MemoryParams) -> Result<MemoryMoments> {
    check_non_negative("r", r)?;
    mem.validate()?;
    let sinh2 = r.sinh().powi(2);
    let cosh2 = r.cosh().powi(2);
    let total = mem.eta_trans + mem.eta_echo;
    Ok(MemoryMoments {
        mean_signal: total * sinh2,
        mean_idler: sinh2,
        cross_moment: sinh2 * (sinh2 * total + cosh2 * mem.eta_echo),
    })
}

/// Model cross-correlation
/// `g = 1 + 1 / (λ (1 + η_trans/η_echo) + η_dark / p_c)`.
///
/// Returns `+∞` when the denominator vanishes (no pairs, no noise).
pub fn gsi_model(lambda: f64, ratio: f64, eta_dark: f64, p_c: f64) -> Result<f64> {
    check_pair_parameter(lambda)?;
    check_non_negative("ratio", ratio)?;
    check_non_negative("eta_dark", eta_dark)?;
    let noise = if eta_dark > 0.0 {
        if !(p_c > 0.0) {
            return Err(Error::out_of_range(
                "p_c",
                p_c,
                "expected > 0 when eta_dark > 0",
            ));
        }
        eta_dark / p_c
    } else {
        0.0
    };
    let denom = lambda * (1.0 + ratio) + noise;
    Ok(if denom == 0.0 { f64::INFINITY } else { 1.0 + 1.0 / denom })
}

/// Threefold probability predicted by the memory model:
/// `4 p10 p01 [α P (1 + ratio/2) + η_dark / p_c]`.
pub fn p11_theory(
    p10: f64,
    p01: f64,
    alpha: f64,
    pump: f64,
    ratio: f64,
    eta_dark: f64,
    p_c: f64,
) -> Result<f64> {
    check_probability("p10", p10)?;
    check_probability("p01", p01)?;
    check_non_negative("alpha", alpha)?;
    check_non_negative("pump_power", pump)?;
    check_non_negative("ratio", ratio)?;
    check_probability("eta_dark", eta_dark)?;
    check_positive("p_c", p_c)?;
    Ok(4.0 * p10 * p01 * (alpha * pump * (1.0 + ratio / 2.0) + eta_dark / p_c))
}

/// Bunching coefficients `(a11, a20, a02)`: the probability that the
/// components `|11⟩`, `|20⟩`, `|02⟩` of the retrieved fields put one photon
/// into each output port.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BunchingCoefficients {
    pub a11: f64,
    pub a20: f64,
    pub a02: f64,
}

/// `a11 = β_r² (α_r − β_t²/α_r)²`, `a20 = 2 α_t² α_r²`, `a02 = 2 β_t² β_r²`.
pub fn bunching_coefficients(bs: &BeamSplitterCoeffs) -> Result<BunchingCoefficients> {
    bs.validate()?;
    // (α_r − β_t²/α_r)² = (α_r² − β_t²)² / α_r², exact zero when α_r² = β_t².
    let a11 = bs.br2 * (bs.ar2 - bs.bt2).powi(2) / bs.ar2;
    Ok(BunchingCoefficients {
        a11,
        a20: 2.0 * bs.at2 * bs.ar2,
        a02: 2.0 * bs.bt2 * bs.br2,
    })
}

/// `q20 = q11 R / 2T`, `q02 = q11 T / 2R`.
pub fn q_from_q11(q11: f64, r: f64, t: f64) -> Result<(f64, f64)> {
    check_non_negative("q11", q11)?;
    check_positive("R", r)?;
    check_positive("T", t)?;
    Ok((q11 * r / (2.0 * t), q11 * t / (2.0 * r)))
}

/// Coincidence probability per herald between the two outputs of the
/// recombining beamsplitter: `(a11 q11 + a20 q20 + a02 q02) η1 η2`.
pub fn recombined_p11(
    q: &TwoPhotonDiagonal,
    bs: &BeamSplitterCoeffs,
    det1: &DetectorParams,
    det2: &DetectorParams,
) -> Result<f64> {
    q.validate()?;
    det1.validate().map_err(|e| e.within("det1"))?;
    det2.validate().map_err(|e| e.within("det2"))?;
    let a = bunching_coefficients(bs)?;
    Ok((a.a11 * q.q11 + a.a20 * q.q20 + a.a02 * q.q02) * det1.efficiency * det2.efficiency)
}

/// Effective single-arm detection efficiencies and the factor converting a
/// recombined coincidence probability into the separately-measured-arms
/// convention.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EffectiveEfficiencies {
    /// `η_A = α_t² η1 + α_r² η2`
    pub eta_a: f64,
    /// `η_B = β_r² η1 + β_t² η2`
    pub eta_b: f64,
    /// Nominal bunching weight `a20 ≈ a02` used by `correction`.
    pub nominal_bunching: f64,
    /// `η_A η_B / (ā η1 η2)` with `q20 + q02 ≈ q11` and `ā` the nominal weight.
    pub correction: f64,
    /// `η_A η_B / ((a11 + a20 R/2T + a02 T/2R) η1 η2)` without approximations.
    pub exact_correction: f64,
}

/// Computes `η_A`, `η_B` and both forms of the correction factor.
///
/// The nominal bunching weight is the mean of `a20` and `a02` rounded to one
/// decimal, and `q20 + q02` is taken equal to `q11`; this is the
/// approximation that yields 2.27 for the measured beamsplitter at
/// `η1 = η2/2`. `exact_correction` keeps every term.
pub fn effective_efficiencies(
    bs: &BeamSplitterCoeffs,
    det1: &DetectorParams,
    det2: &DetectorParams,
) -> Result<EffectiveEfficiencies> {
    det1.validate().map_err(|e| e.within("det1"))?;
    det2.validate().map_err(|e| e.within("det2"))?;
    check_positive("det1.efficiency", det1.efficiency)?;
    check_positive("det2.efficiency", det2.efficiency)?;
    let a = bunching_coefficients(bs)?;
    let (eta1, eta2) = (det1.efficiency, det2.efficiency);
    let eta_a = bs.at2 * eta1 + bs.ar2 * eta2;
    let eta_b = bs.br2 * eta1 + bs.bt2 * eta2;
    let nominal_bunching = (5.0 * (a.a20 + a.a02)).round() / 10.0;
    let (q20, q02) = q_from_q11(1.0, bs.reflection(), bs.transmission())?;
    let exact_weight = a.a11 + a.a20 * q20 + a.a02 * q02;
    Ok(EffectiveEfficiencies {
        eta_a,
        eta_b,
        nominal_bunching,
        correction: eta_a * eta_b / (nominal_bunching * eta1 * eta2),
        exact_correction: eta_a * eta_b / (exact_weight * eta1 * eta2),
    })
}

/// Complementary single-photon fringes at the two detectors:
/// `P_k = amp_k · p_det · (1 + (−1)^k V cos φ) / 2`.
pub fn fringe_probabilities(
    phase: f64,
    visibility: f64,
    p_det: f64,
    amp1: f64,
    amp2: f64,
) -> Result<(f64, f64)> {
    check_probability("visibility", visibility)?;
    check_probability("p_det", p_det)?;
    check_positive("amp1", amp1)?;
    check_positive("amp2", amp2)?;
    if !phase.is_finite() {
        return Err(Error::out_of_range("phase", phase, "expected a finite phase"));
    }
    let c = visibility * phase.cos();
    Ok((
        amp1 * p_det * (1.0 - c) / 2.0,
        amp2 * p_det * (1.0 + c) / 2.0,
    ))
}
