use super::{interfering_single, pair_routing, ExpectedCounts, PhaseMode, TrialConfig};
use crate::error::{Error, Result};
use crate::optics::TwoPhotonDiagonal;
use crate::photon_stats::{
    binomial_row, click_probability, heralded_signal, thin, tmss_joint, PhotonNumberDistribution,
};

/// Largest cutoff the automatic truncation search will try.
const N_MAX_LIMIT: usize = 400;

/// Smallest cutoff `≥ cfg.n_max` whose geometric tail `λ^(N+1)` is within tolerance.
fn cutoff(cfg: &TrialConfig, lambda: f64) -> Result<usize> {
    let mut n = cfg.n_max;
    if lambda == 0.0 {
        return Ok(n);
    }
    while lambda.powi(n as i32 + 1) > cfg.truncation_tolerance {
        n += 1;
        if n > N_MAX_LIMIT {
            return Err(Error::Truncation {
                n_max: N_MAX_LIMIT,
                lost: lambda.powi(N_MAX_LIMIT as i32 + 1),
                tolerance: cfg.truncation_tolerance,
            });
        }
    }
    Ok(n)
}

/// `P(a photons in A, b in B)` after each of `n` photons independently goes to
/// A with `p[0]`, to B with `p[1]`, or is lost.
fn trinomial(n: usize, p: [f64; 2], out: &mut Grid, weight: f64) {
    let kept = p[0] + p[1];
    let frac_a = if kept > 0.0 { p[0] / kept } else { 0.0 };
    for (k, pk) in binomial_row(n, kept.min(1.0)).into_iter().enumerate() {
        if pk == 0.0 {
            continue;
        }
        for (a, pa) in binomial_row(k, frac_a).into_iter().enumerate() {
            out.add(a, k - a, weight * pk * pa);
        }
    }
}

/// Square table over `(m_A, m_B)`.
struct Grid {
    dim: usize,
    v: Vec<f64>,
}

impl Grid {
    fn new(dim: usize) -> Self {
        Self {
            dim,
            v: vec![0.0; dim * dim],
        }
    }

    fn add(&mut self, a: usize, b: usize, w: f64) {
        self.v[a * self.dim + b] += w;
    }

    fn get(&self, a: usize, b: usize) -> f64 {
        self.v[a * self.dim + b]
    }

    fn convolve(&self, other: &Grid) -> Grid {
        let mut out = Grid::new(self.dim + other.dim - 1);
        for a in 0..self.dim {
            for b in 0..self.dim {
                let x = self.get(a, b);
                if x == 0.0 {
                    continue;
                }
                for c in 0..other.dim {
                    for d in 0..other.dim {
                        out.add(a + c, b + d, x * other.get(c, d));
                    }
                }
            }
        }
        out
    }
}

/// Click probabilities `(det1, det2, both, either)` given the arm occupation.
fn detection(cfg: &TrialConfig, m_a: usize, m_b: usize) -> [f64; 4] {
    let bs = &cfg.bs;
    let [d1, d2] = [cfg.detectors[0].dark_prob, cfg.detectors[1].dark_prob];
    let [e1, e2] = [cfg.detectors[0].efficiency, cfg.detectors[1].efficiency];
    let from_quiet = |q1: f64, q2: f64, q12: f64| [1.0 - q1, 1.0 - q2, 1.0 - q1 - q2 + q12, 1.0 - q12];

    if m_a == 1 && m_b == 1 {
        let mut out = [0.0; 4];
        for (ka, kb, w) in pair_routing(bs) {
            let q1 = (1.0 - d1) * (1.0 - e1).powi(ka as i32);
            let q2 = (1.0 - d2) * (1.0 - e2).powi(kb as i32);
            for (o, x) in out.iter_mut().zip(from_quiet(q1, q2, q1 * q2)) {
                *o += w * x;
            }
        }
        return out;
    }
    if let (PhaseMode::Fixed { phase }, 1) = (cfg.phase_mode, m_a + m_b) {
        let (fa, fb) = interfering_single(cfg, if m_a == 1 { 0 } else { 1 }, phase);
        let q1 = (1.0 - d1) * (1.0 - fa * e1);
        let q2 = (1.0 - d2) * (1.0 - fb * e2);
        let q12 = (1.0 - d1) * (1.0 - d2) * (1.0 - fa * e1 - fb * e2);
        return from_quiet(q1, q2, q12);
    }
    let (ma, mb) = (m_a as i32, m_b as i32);
    let q1 = (1.0 - d1) * (1.0 - bs.at2 * e1).powi(ma) * (1.0 - bs.br2 * e1).powi(mb);
    let q2 = (1.0 - d2) * (1.0 - bs.ar2 * e2).powi(ma) * (1.0 - bs.bt2 * e2).powi(mb);
    let q12 = (1.0 - d1)
        * (1.0 - d2)
        * (1.0 - bs.at2 * e1 - bs.ar2 * e2).powi(ma)
        * (1.0 - bs.br2 * e1 - bs.bt2 * e2).powi(mb);
    from_quiet(q1, q2, q12)
}

/// Exact expectation of every [`CountRecord`](super::CountRecord) field under
/// the trial model, with the Fock cutoff raised until the truncated tail is
/// below `cfg.truncation_tolerance`.
pub fn expected_counts(cfg: &TrialConfig) -> Result<ExpectedCounts> {
    cfg.validate()?;
    let lambda = cfg.lambda()?;
    let n_max = cutoff(cfg, lambda)?;
    let s = cfg.arm_survival();
    let dim = n_max + 1;

    let mut early_h = Grid::new(dim);
    let mut early = Grid::new(dim);
    let mut late = Grid::new(dim);
    let mut herald = 0.0;
    for n in 0..=n_max {
        let w = (1.0 - lambda) * lambda.powi(n as i32);
        let h = click_probability(n, cfg.idler_detector.efficiency, cfg.idler_detector.dark_prob);
        herald += w * h;
        trinomial(n, s.early, &mut early_h, w * h);
        trinomial(n, s.early, &mut early, w);
        trinomial(n, s.late, &mut late, w);
    }
    let joint_h = early_h.convolve(&late);
    let joint = early.convolve(&late);

    let mut given_h = [0.0; 4];
    let mut all = [0.0; 4];
    for a in 0..joint.dim {
        for b in 0..joint.dim {
            let (wh, w) = (joint_h.get(a, b), joint.get(a, b));
            if w == 0.0 {
                continue;
            }
            let det = detection(cfg, a, b);
            for k in 0..4 {
                given_h[k] += wh * det[k];
                all[k] += w * det[k];
            }
        }
    }

    let t = cfg.trials as f64;
    Ok(ExpectedCounts {
        trials: t,
        n_heralds: t * herald,
        n1_given_h: t * given_h[0],
        n2_given_h: t * given_h[1],
        n12_given_h: t * given_h[2],
        n_signal_given_h: t * given_h[3],
        n1: t * all[0],
        n2: t * all[1],
        n12: t * all[2],
        n_signal_singles: t * all[3],
        n_idler_singles: t * herald,
    })
}

/// Two-photon diagonal `(q11, q20, q02)` of the arm occupation per herald,
/// built from the heralded signal state, the memory losses and an independent
/// late-bin thermal field.
pub fn two_photon_diagonal(cfg: &TrialConfig) -> Result<TwoPhotonDiagonal> {
    cfg.validate()?;
    let lambda = cfg.lambda()?;
    let n_max = cutoff(cfg, lambda)?;
    let s = cfg.arm_survival();
    let heralded = heralded_signal(
        &tmss_joint(lambda, n_max)?,
        cfg.idler_detector.efficiency,
        cfg.idler_detector.dark_prob,
    )?;
    let kept_early = s.early[0] + s.early[1];
    let kept_late = s.late[0] + s.late[1];
    let e = thin(&heralded.signal, kept_early.min(1.0))?;
    let l = thin(&PhotonNumberDistribution::thermal(lambda, n_max)?, kept_late.min(1.0))?;
    let frac = |p: [f64; 2], kept: f64| if kept > 0.0 { p[0] / kept } else { 0.0 };
    let (fe, fl) = (frac(s.early, kept_early), frac(s.late, kept_late));
    let (e0, e1, e2) = (e.prob(0), e.prob(1), e.prob(2));
    let (l0, l1, l2) = (l.prob(0), l.prob(1), l.prob(2));

    let q11 = e2 * l0 * 2.0 * fe * (1.0 - fe)
        + e0 * l2 * 2.0 * fl * (1.0 - fl)
        + e1 * l1 * (fe * (1.0 - fl) + (1.0 - fe) * fl);
    let q20 = e2 * l0 * fe * fe + e0 * l2 * fl * fl + e1 * l1 * fe * fl;
    let q02 = e2 * l0 * (1.0 - fe).powi(2)
        + e0 * l2 * (1.0 - fl).powi(2)
        + e1 * l1 * (1.0 - fe) * (1.0 - fl);
    Ok(TwoPhotonDiagonal { q11, q20, q02 })
}
