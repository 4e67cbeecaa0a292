//! Published measurement values of the two-memory entanglement experiment.

use crate::estimators::Uncertain;

/// Pair-creation slope in pairs per mW per window.
pub const ALPHA: f64 = 2.71e-3;
pub const ALPHA_SIGMA: f64 = 0.08e-3;

/// Mean `η_trans / η_echo` over all pump powers.
pub const RATIO_MEAN: f64 = 2.936;
pub const RATIO_SIGMA: f64 = 0.069;

/// Storage-and-retrieval efficiency of each memory.
pub const ETA_ECHO: f64 = 0.15;

/// Dark-count probability per 10 ns window, both signal detectors together.
pub const ETA_DARK: f64 = 2e-6;

pub const VISIBILITY: Uncertain = Uncertain {
    value: 0.965,
    sigma: 0.012,
};

/// `p00` at 8 mW quoted alongside `ḡ ≈ 10`.
pub const P00_8MW: Uncertain = Uncertain {
    value: 0.9997831,
    sigma: 0.0000071,
};

/// Cross-correlation quoted at 8 mW.
pub const GSI_8MW: f64 = 10.0;

/// Stage transmissions: signal in fiber per herald, memory, interferometer, detector.
pub const FIBER: f64 = 0.20;
pub const MEMORY: f64 = 0.15;
pub const INTERFEROMETER: f64 = 0.024;
pub const DETECTOR: f64 = 0.30;

/// Printed readings that disagree with the product of the stages above.
pub const PRINTED_C_DETECTED: f64 = 6.6e-4;
pub const PRINTED_C_AFTER_CRYSTALS: f64 = 0.092;
pub const PRINTED_ETA: f64 = 2.2e-4;

/// Threefold campaign: heralded twofold probability `(N_{1|H} + N_{2|H}) / N_H`.
pub const TWOFOLD_PER_HERALD: Uncertain = Uncertain {
    value: 1.7777e-4,
    sigma: 0.0034e-4,
};

/// Heralds of the threefold campaign. Not printed; it follows from the MLE
/// value `2.27 · 2 / N_H = 2.9e-9` and is consistent with the quoted twofold
/// uncertainty, `√N_2 / N_H = 3.4e-7` for `N_2 = 1.7777e-4 · N_H`.
pub const THREEFOLD_HERALDS: f64 = 1.566e9;
pub const THREEFOLD_COINCIDENCES: u64 = 2;
pub const THREEFOLD_PUMP_MW: f64 = 16.0;

pub const P11_MLE: Uncertain = Uncertain {
    value: 2.9e-9,
    sigma: 2.1e-9,
};
pub const P11_CE: Uncertain = Uncertain {
    value: 3.9e-9,
    sigma: 2.2e-9,
};
pub const C_MLE: Uncertain = Uncertain {
    value: 6.3e-5,
    sigma: 3.8e-5,
};
pub const C_CE: Uncertain = Uncertain {
    value: 3.9e-5,
    sigma: 3.8e-5,
};

/// One row of the conditional-probability table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TableRow {
    pub power_mw: f64,
    pub p01: Uncertain,
    pub p10: Uncertain,
    pub p11: Uncertain,
    pub ratio: Uncertain,
}

impl TableRow {
    /// `(p10 + p01) / 2`, the conditional detection probability used as `p_c`.
    pub fn p_c(&self) -> f64 {
        (self.p10.value + self.p01.value) / 2.0
    }
}

const fn u(value: f64, sigma: f64) -> Uncertain {
    Uncertain { value, sigma }
}

const fn row(power_mw: f64, p01: Uncertain, p10: Uncertain, p11: Uncertain, ratio: Uncertain) -> TableRow {
    TableRow {
        power_mw,
        p01,
        p10,
        p11,
        ratio,
    }
}

pub const TABLE: [TableRow; 7] = [
    row(1.0, u(1.04e-4, 0.14e-4), u(0.82e-4, 0.12e-4), u(1.33e-9, 0.30e-9), u(2.84, 0.33)),
    row(2.0, u(1.193e-4, 0.075e-4), u(0.809e-4, 0.063e-4), u(1.63e-9, 0.19e-9), u(3.03, 0.17)),
    row(3.0, u(0.952e-4, 0.072e-4), u(0.878e-4, 0.070e-4), u(1.61e-9, 0.20e-9), u(2.59, 0.17)),
    row(4.0, u(1.105e-4, 0.072e-4), u(0.902e-4, 0.066e-4), u(2.82e-9, 0.31e-9), u(3.35, 0.19)),
    row(8.0, u(1.185e-4, 0.051e-4), u(0.984e-4, 0.050e-4), u(5.18e-9, 0.40e-9), u(3.13, 0.12)),
    row(13.0, u(1.247e-4, 0.056e-4), u(1.131e-4, 0.052e-4), u(8.79e-9, 0.66e-9), u(2.86, 0.11)),
    row(16.0, u(1.146e-4, 0.047e-4), u(1.175e-4, 0.048e-4), u(9.56e-9, 0.64e-9), u(2.748, 0.093)),
];

pub const TABLE_MEAN_P01: Uncertain = u(1.123e-4, 0.030e-4);
pub const TABLE_MEAN_P10: Uncertain = u(0.957e-4, 0.027e-4);

pub fn table_row(power_mw: f64) -> Option<&'static TableRow> {
    TABLE.iter().find(|r| r.power_mw == power_mw)
}

pub fn pump_powers() -> Vec<f64> {
    TABLE.iter().map(|r| r.power_mw).collect()
}
