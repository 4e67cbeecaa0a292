use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{interfering_single, pair_routing, CountRecord, PhaseMode, TrialConfig};
use crate::error::Result;
use crate::parallel::Execution;

/// Trials per scheduled task. Results do not depend on it.
const BATCH: u64 = 1 << 14;

/// Samples `cfg.trials` windows with the execution strategy from the environment.
pub fn run_trials(cfg: &TrialConfig) -> Result<CountRecord> {
    run_trials_with(cfg, Execution::from_env())
}

pub fn run_trials_with(cfg: &TrialConfig, exec: Execution) -> Result<CountRecord> {
    cfg.validate()?;
    let sampler = Sampler::new(cfg)?;
    let base = ChaCha8Rng::seed_from_u64(cfg.seed);
    let trials = cfg.trials;
    let record = exec.map_reduce(
        trials.div_ceil(BATCH),
        |batch| {
            let start = batch * BATCH;
            let end = (start + BATCH).min(trials);
            let mut tally = CountRecord::default();
            for index in start..end {
                let mut rng = base.clone();
                rng.set_stream(index);
                sampler.trial(&mut rng, &mut tally);
            }
            tally
        },
        |a, b| a + b,
    );
    Ok(record)
}

struct Sampler {
    ln_lambda: Option<f64>,
    idler_eff: f64,
    idler_dark: f64,
    /// Cumulative arm thresholds `[p_A, p_A + p_B]` for early and late photons.
    early: [f64; 2],
    late: [f64; 2],
    /// Cumulative port thresholds for a photon in arm A and arm B.
    route: [[f64; 2]; 2],
    pair: [(u32, u32, f64); 6],
    /// Port thresholds for a lone photon per arm when the phase is fixed.
    single: Option<[[f64; 2]; 2]>,
    eff: [f64; 2],
    dark: [f64; 2],
}

impl Sampler {
    fn new(cfg: &TrialConfig) -> Result<Self> {
        let lambda = cfg.lambda()?;
        let s = cfg.arm_survival();
        let bs = &cfg.bs;
        let mut pair = pair_routing(bs);
        let mut acc = 0.0;
        for p in &mut pair {
            acc += p.2;
            p.2 = acc;
        }
        let single = match cfg.phase_mode {
            PhaseMode::Randomized => None,
            PhaseMode::Fixed { phase } => Some([0, 1].map(|arm| {
                let (pa, pb) = interfering_single(cfg, arm, phase);
                [pa, pa + pb]
            })),
        };
        Ok(Self {
            ln_lambda: (lambda > 0.0).then(|| lambda.ln()),
            idler_eff: cfg.idler_detector.efficiency,
            idler_dark: cfg.idler_detector.dark_prob,
            early: [s.early[0], s.early[0] + s.early[1]],
            late: [s.late[0], s.late[0] + s.late[1]],
            route: [[bs.at2, bs.at2 + bs.ar2], [bs.br2, bs.br2 + bs.bt2]],
            pair,
            single,
            eff: [cfg.detectors[0].efficiency, cfg.detectors[1].efficiency],
            dark: [cfg.detectors[0].dark_prob, cfg.detectors[1].dark_prob],
        })
    }

    fn pairs(&self, rng: &mut ChaCha8Rng) -> u32 {
        match self.ln_lambda {
            None => 0,
            Some(ln) => {
                let u: f64 = rng.random();
                ((1.0 - u).ln() / ln).floor().min(u32::MAX as f64) as u32
            }
        }
    }

    fn split(rng: &mut ChaCha8Rng, n: u32, cut: &[f64; 2], arms: &mut [u32; 2]) {
        for _ in 0..n {
            let u: f64 = rng.random();
            if u < cut[0] {
                arms[0] += 1;
            } else if u < cut[1] {
                arms[1] += 1;
            }
        }
    }

    fn trial(&self, rng: &mut ChaCha8Rng, tally: &mut CountRecord) {
        let n_early = self.pairs(rng);
        let n_late = self.pairs(rng);

        let no_click = (1.0 - self.idler_dark) * (1.0 - self.idler_eff).powi(n_early as i32);
        let herald = rng.random::<f64>() >= no_click;

        let mut arms = [0u32; 2];
        Self::split(rng, n_early, &self.early, &mut arms);
        Self::split(rng, n_late, &self.late, &mut arms);

        let mut ports = [0u32; 2];
        match (arms, &self.single) {
            ([1, 1], _) => {
                let u: f64 = rng.random();
                let (ka, kb, _) = self
                    .pair
                    .iter()
                    .copied()
                    .find(|p| u < p.2)
                    .unwrap_or(self.pair[5]);
                ports = [ka, kb];
            }
            ([1, 0] | [0, 1], Some(single)) => {
                let cut = &single[if arms[0] == 1 { 0 } else { 1 }];
                let u: f64 = rng.random();
                if u < cut[0] {
                    ports[0] = 1;
                } else if u < cut[1] {
                    ports[1] = 1;
                }
            }
            _ => {
                for (arm, &m) in arms.iter().enumerate() {
                    Self::split(rng, m, &self.route[arm], &mut ports);
                }
            }
        }

        let click = [0, 1].map(|k| {
            let quiet = (1.0 - self.dark[k]) * (1.0 - self.eff[k]).powi(ports[k] as i32);
            rng.random::<f64>() >= quiet
        });

        let (c1, c2) = (click[0] as u64, click[1] as u64);
        let any = (click[0] || click[1]) as u64;
        let both = c1 & c2;
        tally.trials += 1;
        tally.n1 += c1;
        tally.n2 += c2;
        tally.n12 += both;
        tally.n_signal_singles += any;
        if herald {
            tally.n_heralds += 1;
            tally.n_idler_singles += 1;
            tally.n1_given_h += c1;
            tally.n2_given_h += c2;
            tally.n12_given_h += both;
            tally.n_signal_given_h += any;
        }
    }
}
