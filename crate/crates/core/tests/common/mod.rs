//! Closed-form oracles and fixtures shared by the integration tests.
#![allow(dead_code)]

use heraldsim::montecarlo::{Arm, TrialConfig};
use heraldsim::optics::{gsi_model, recombined_p11, DetectorParams, MemoryParams};
use heraldsim::photon_stats::{heralded_signal, thin, tmss_joint, PhotonNumberDistribution};

/// Fock cutoff for oracle distributions; far beyond anything that matters at λ ≤ 0.05.
const ORACLE_N_MAX: usize = 60;

/// Boosted-efficiency configurations for the oracle comparisons:
/// `(λ, η_echo, η_trans, detector η, dark)`.
pub const ORACLE_GRID: [(f64, f64, f64, f64, f64); 6] = [
    (0.01, 0.6, 0.0, 0.5, 0.0),
    (0.02, 0.2, 0.6, 0.5, 0.0),
    (0.03, 0.4, 0.4, 0.3, 1e-4),
    (0.05, 0.15, 0.6, 0.1, 1e-4),
    (0.04, 0.3, 0.6, 0.25, 0.0),
    (0.02, 0.8, 0.2, 0.5, 1e-4),
];

pub fn oracle_config(
    (lambda, echo, trans, eta, dark): (f64, f64, f64, f64, f64),
    trials: u64,
    seed: u64,
) -> TrialConfig {
    let mut c = TrialConfig::desk(lambda);
    c.memories = [MemoryParams {
        eta_echo: echo,
        eta_trans: trans,
    }; 2];
    c.detectors = [DetectorParams {
        efficiency: eta,
        dark_prob: dark,
    }; 2];
    c.trials = trials;
    c.seed = seed;
    c
}

/// Per-photon probability that an early and a late signal photon reach
/// detector `k`, recomputed from the configuration fields.
fn port_fractions(cfg: &TrialConfig, k: usize) -> (f64, f64) {
    let open = |arm| if cfg.blocked == Some(arm) { 0.0 } else { 1.0 };
    let inject = cfg.heralding_efficiency * cfg.interferometer_transmission;
    let bs = &cfg.bs;
    let to_a = inject * bs.at2 * open(Arm::A);
    let to_b = inject * bs.br2 * open(Arm::B);
    let (from_a, from_b) = if k == 0 { (bs.at2, bs.br2) } else { (bs.ar2, bs.bt2) };
    let early = to_a * cfg.memories[0].eta_echo * from_a + to_b * cfg.memories[1].eta_echo * from_b;
    let late = to_a * cfg.memories[0].eta_trans * from_a + to_b * cfg.memories[1].eta_trans * from_b;
    (early, late)
}

fn heralded_early(cfg: &TrialConfig) -> PhotonNumberDistribution {
    let lambda = cfg.lambda().unwrap();
    let joint = tmss_joint(lambda, ORACLE_N_MAX).unwrap();
    heralded_signal(&joint, cfg.idler_detector.efficiency, cfg.idler_detector.dark_prob)
        .unwrap()
        .signal
}

/// Exact click probability of detector `k` given a herald, from the
/// generating functions of the heralded early and the thermal late field.
pub fn heralded_click(cfg: &TrialConfig, k: usize) -> f64 {
    let lambda = cfg.lambda().unwrap();
    let (fe, fl) = port_fractions(cfg, k);
    let eta = cfg.detectors[k].efficiency;
    let early_dark = thin(&heralded_early(cfg), fe * eta).unwrap().prob(0);
    let late = PhotonNumberDistribution::thermal(lambda, ORACLE_N_MAX).unwrap();
    let late_dark = thin(&late, fl * eta).unwrap().prob(0);
    1.0 - (1.0 - cfg.detectors[k].dark_prob) * early_dark * late_dark
}

/// Heralded detection probability summed over both detectors.
pub fn heralded_rate(cfg: &TrialConfig) -> f64 {
    heralded_click(cfg, 0) + heralded_click(cfg, 1)
}

/// Cross-correlation model with the heralded photon's detection probability as `p_c`.
pub fn gsi_oracle(cfg: &TrialConfig) -> f64 {
    let lambda = cfg.lambda().unwrap();
    let ratio = cfg.memories[0].eta_trans / cfg.memories[0].eta_echo;
    let p_c: f64 = (0..2)
        .map(|k| port_fractions(cfg, k).0 * cfg.detectors[k].efficiency)
        .sum();
    gsi_model(lambda, ratio, cfg.signal_dark(), p_c).unwrap()
}

/// Two-photon coincidence per herald plus first-order dark-count cross terms.
pub fn p11_oracle(cfg: &TrialConfig) -> f64 {
    let q = heraldsim::montecarlo::two_photon_diagonal(cfg).unwrap();
    let photons = recombined_p11(&q, &cfg.bs, &cfg.detectors[0], &cfg.detectors[1]).unwrap();
    let [d1, d2] = [cfg.detectors[0].dark_prob, cfg.detectors[1].dark_prob];
    photons + d1 * heralded_click(cfg, 1) + d2 * heralded_click(cfg, 0) - d1 * d2
}

/// Standard score of `observed` against `expected`.
pub fn z(observed: f64, expected: f64, sigma: f64) -> f64 {
    (observed - expected) / sigma
}

/// Removes the run timestamp from emitted JSON so payloads can be compared.
pub fn strip_timestamp(text: &str) -> serde_json::Value {
    let mut v: serde_json::Value = serde_json::from_str(text).unwrap();
    if let Some(m) = v.get_mut("manifest").and_then(|m| m.as_object_mut()) {
        m.remove("timestamp");
    }
    if let Some(m) = v.as_object_mut() {
        m.remove("timestamp");
    }
    v
}

/// Counts of the long threefold campaign: `N_H`, `N_{1|H} + N_{2|H}` and two coincidences.
pub fn campaign_counts_json() -> String {
    serde_json::json!({
        "trials": 1.566e9,
        "n_heralds": 1.566e9,
        "n1_given_h": 139194.0,
        "n2_given_h": 139194.0,
        "n12_given_h": 2.0,
        "n_signal_given_h": 278386.0,
        "n1": 139194.0,
        "n2": 139194.0,
        "n12": 2.0,
        "n_signal_singles": 278386.0,
        "n_idler_singles": 1.566e9
    })
    .to_string()
}
