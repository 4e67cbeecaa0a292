use heraldsim::cli::output::format_number;
use heraldsim::estimators::{
    concurrence_bound, fit_fringe, p11_xcorr, posterior_density, threefold_estimate, Method, ProbabilityTable,
    ThreefoldMethod, Uncertain,
};
use heraldsim::experiment::paper;
use heraldsim::experiment::{
    pump_sweep, threefold_campaign, threefold_from_counts, transmission_budget, ExperimentConfig, Mode,
    TransmissionStages,
};
use heraldsim::optics::{gsi_model, p11_theory};
use proptest::prelude::*;

fn bound(v: f64, p10: f64, p01: f64, p11: f64) -> f64 {
    let t = ProbabilityTable::from_rates(Uncertain::exact(p10), Uncertain::exact(p01), Uncertain::exact(p11)).unwrap();
    concurrence_bound(Uncertain::exact(v), &t, Method::Xcorr).unwrap().value
}

proptest! {
    #[test]
    fn bound_is_monotone_in_visibility_and_p11(
        p10 in 1e-6f64..1e-2,
        p01 in 1e-6f64..1e-2,
        p11 in 0.0f64..1e-4,
        dp in 0.0f64..1e-4,
        v in 0.0f64..1.0,
        dv in 0.0f64..0.5,
    ) {
        let v2 = (v + dv).min(1.0);
        prop_assert!(bound(v2, p10, p01, p11) >= bound(v, p10, p01, p11));
        prop_assert!(bound(v, p10, p01, p11 + dp) <= bound(v, p10, p01, p11));
        prop_assert!(bound(v, p10, p01, p11) >= 0.0);
    }

    #[test]
    fn ce_exceeds_mle_and_both_scale_inversely_with_heralds(
        n in 0u64..10_000,
        heralds in 1e4f64..1e12,
        correction in 0.5f64..5.0,
    ) {
        let mle = threefold_estimate(n, heralds, ThreefoldMethod::Mle, correction).unwrap();
        let ce = threefold_estimate(n, heralds, ThreefoldMethod::Ce, correction).unwrap();
        prop_assert!(ce.p11.value > mle.p11.value);
        for est in [mle, ce] {
            let doubled = threefold_estimate(n, 2.0 * heralds, est.method, correction).unwrap();
            prop_assert!((doubled.p11.value * 2.0 - est.p11.value).abs() <= 1e-12 * est.p11.value);
        }
        if n == 0 {
            prop_assert_eq!(ce.p11.sigma, ce.p11.value);
        }
    }

    #[test]
    fn posterior_peaks_at_the_mle(n in 1u64..200, heralds in 1e4f64..1e10) {
        let post = posterior_density(n, heralds).unwrap();
        let mode = n as f64 / heralds;
        prop_assert!(post.density(mode) >= post.density(mode * 1.01));
        prop_assert!(post.density(mode) >= post.density(mode * 0.99));
        prop_assert!(post.density(-1.0) == 0.0);
        prop_assert!((post.std_dev().powi(2) - (post.second_moment() - post.mean().powi(2))).abs()
            <= 1e-12 * post.second_moment());
    }

    #[test]
    fn xcorr_bound_decreases_with_pair_probability(
        p10 in 1e-5f64..1e-2,
        p01 in 1e-5f64..1e-2,
        ratio in 0.0f64..4.0,
        v in 0.5f64..1.0,
    ) {
        let mut last = f64::INFINITY;
        for k in 1..=20 {
            let lambda = 0.0025 * k as f64;
            let g = gsi_model(lambda, ratio, 0.0, 1.0).unwrap();
            let p11 = p11_xcorr(Uncertain::exact(p10), Uncertain::exact(p01), Uncertain::exact(g)).unwrap();
            let c = bound(v, p10, p01, p11.value);
            prop_assert!(c <= last);
            last = c;
        }
    }

    #[test]
    fn xcorr_p11_bounds_the_memory_model(
        p10 in 1e-6f64..1e-3,
        p01 in 1e-6f64..1e-3,
        pump in 0.1f64..20.0,
        ratio in 0.0f64..4.0,
        dark in 0.0f64..1e-5,
    ) {
        let p_c = (p10 + p01) / 2.0;
        let g = gsi_model(paper::ALPHA * pump, ratio, dark, p_c).unwrap();
        let xcorr = p11_xcorr(Uncertain::exact(p10), Uncertain::exact(p01), Uncertain::exact(g)).unwrap();
        let theory = p11_theory(p10, p01, paper::ALPHA, pump, ratio, dark, p_c).unwrap();
        prop_assert!(xcorr.value >= theory * (1.0 - 1e-12));
    }

    #[test]
    fn budget_total_is_the_stage_product(
        fiber in 1e-3f64..1.0,
        memory in 1e-3f64..1.0,
        interferometer in 1e-3f64..1.0,
        detector in 1e-3f64..1.0,
    ) {
        let stages = TransmissionStages { fiber, memory, interferometer, detector };
        let b = transmission_budget(&stages, 0.965, 10.0).unwrap();
        prop_assert_eq!(b.eta_total, fiber * memory * interferometer * detector);
        prop_assert!(b.c_after_crystals >= b.c_detected);
    }

    #[test]
    fn written_numbers_reparse(x in prop::num::f64::NORMAL | prop::num::f64::SUBNORMAL | prop::num::f64::ZERO) {
        let s = format_number(x);
        prop_assert!(s.chars().all(|c| c.is_ascii_digit() || ".-e".contains(c)), "{}", s);
        let back: f64 = s.parse().unwrap();
        if x == 0.0 {
            prop_assert_eq!(back, 0.0);
        } else if x.abs() > 1e-300 {
            prop_assert!(((back - x) / x).abs() <= 5e-9, "{} -> {}", x, s);
        }
    }

    #[test]
    fn noiseless_fringe_fit_recovers_parameters(
        v in 0.05f64..1.0,
        amp in 10.0f64..1e6,
        offset in -3.0f64..3.0,
        points in 4usize..24,
    ) {
        let phases: Vec<f64> = (0..points).map(|k| k as f64 * std::f64::consts::TAU / points as f64).collect();
        let counts: Vec<f64> = phases.iter().map(|p| amp * (1.0 + v * (p - offset).cos())).collect();
        let fit = fit_fringe(&phases, &counts).unwrap();
        prop_assert!((fit.visibility.value - v).abs() < 1e-9);
        prop_assert!((fit.amplitude / amp - 1.0).abs() < 1e-9);
    }
}

#[test]
fn zero_coincidences_leave_the_mle_bound_unsubtracted() {
    let cfg = ExperimentConfig::paper();
    let r = threefold_from_counts(&cfg, 0, paper::THREEFOLD_HERALDS, paper::TWOFOLD_PER_HERALD).unwrap();
    let expected = cfg.visibility.value * paper::TWOFOLD_PER_HERALD.value;
    assert!((r.c_mle.value - expected).abs() <= 1e-15 * expected);
    assert!(r.c_ce.value < r.c_mle.value);
}

#[test]
fn threefold_and_sweep_agree_at_the_highest_power() {
    let mut cfg = ExperimentConfig::paper();
    cfg.mode = Mode::Analytic;
    let three = threefold_campaign(&cfg, Some(paper::THREEFOLD_COINCIDENCES)).unwrap();
    let rows = pump_sweep(&cfg).unwrap();
    let row = rows.iter().find(|r| r.power_mw == paper::THREEFOLD_PUMP_MW).unwrap();
    for c in [three.c_mle, three.c_ce] {
        let combined = (c.sigma.powi(2) + row.c_bound.sigma.powi(2)).sqrt();
        assert!(
            (c.value - row.c_bound.value).abs() <= combined,
            "{:?} vs sweep {:?}",
            c,
            row.c_bound
        );
    }
}

#[test]
fn paper_sweep_shape() {
    let rows = pump_sweep(&ExperimentConfig::paper()).unwrap();
    assert_eq!(rows.len(), 7);
    for pair in rows.windows(2) {
        assert!(pair[1].gsi_model < pair[0].gsi_model);
        assert!(pair[1].c_bound.value <= pair[0].c_bound.value + pair[0].c_bound.sigma);
    }
    assert!((rows[0].gsi_model - 32.0).abs() < 1.0);
    let r8 = &rows[4];
    assert!((r8.p11_xcorr.value / 5.18e-9 - 1.0).abs() < 0.25);
    for r in &rows {
        assert!(r.c_bound.value >= 0.0);
        assert!(r.gsi_model_band[0] <= r.gsi_model && r.gsi_model <= r.gsi_model_band[1]);
    }
}

#[test]
fn paper_budget() {
    let b = transmission_budget(&ExperimentConfig::paper().stages, 0.965, 10.0).unwrap();
    assert!((b.eta_total - 2.16e-4).abs() < 1e-18);
    assert!((b.c_detected - 6.444e-5).abs() < 1e-8);
    let unit = TransmissionStages {
        fiber: 1.0,
        memory: 1.0,
        interferometer: 1.0,
        detector: 1.0,
    };
    let b = transmission_budget(&unit, 0.965, 10.0).unwrap();
    assert_eq!(b.c_after_crystals, b.c_detected);
    assert!((b.c_detected - (0.965 - 2.0 / 3.0)).abs() < 1e-15);
}

#[test]
fn config_json_round_trips() {
    for cfg in [ExperimentConfig::paper(), ExperimentConfig::desk()] {
        let text = serde_json::to_string(&cfg).unwrap();
        let back: ExperimentConfig = serde_json::from_str(&text).unwrap();
        assert_eq!(back, cfg);
    }
}
