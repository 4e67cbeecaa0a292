mod common;

use std::path::Path;
use std::process::{Command, Output};

use heraldsim::cli::output::{parse_csv, round_to_written, FRINGE_HEADER, SWEEP_HEADER};
use heraldsim::cli::{EstimateReport, Report, SimulationOutput};
use heraldsim::experiment::{pump_sweep, ExperimentConfig};
use heraldsim::montecarlo::CountRecord;
use tempfile::TempDir;

fn heraldsim(args: &[&str]) -> Output {
    heraldsim_env(args, &[])
}

fn heraldsim_env(args: &[&str], env: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_heraldsim"));
    cmd.args(args).env_remove("HERALDSIM_THREADS");
    for (k, v) in env {
        cmd.env(k, v);
    }
    cmd.output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn path(dir: &TempDir, name: &str) -> String {
    dir.path().join(name).to_string_lossy().into_owned()
}

fn write(dir: &TempDir, name: &str, contents: &str) -> String {
    let p = path(dir, name);
    std::fs::write(&p, contents).unwrap();
    p
}

fn read(p: impl AsRef<Path>) -> String {
    std::fs::read_to_string(p).unwrap()
}

#[test]
fn simulate_at_zero_pump_gives_zero_counts() {
    let dir = TempDir::new().unwrap();
    let out = path(&dir, "zero.json");
    let run = heraldsim(&["simulate", "--preset", "desk", "--power", "0", "--trials", "5000", "--out", &out]);
    assert_eq!(code(&run), 0, "{}", stderr(&run));
    let parsed: SimulationOutput = serde_json::from_str(&read(&out)).unwrap();
    let rec: CountRecord = serde_json::from_value(serde_json::to_value(parsed.counts).unwrap()).unwrap();
    assert_eq!(
        rec,
        CountRecord {
            trials: 5000,
            ..CountRecord::default()
        }
    );
}

#[test]
fn simulate_is_reproducible_across_runs_and_thread_counts() {
    let dir = TempDir::new().unwrap();
    let mut payloads = Vec::new();
    for (name, threads) in [("a.json", "1"), ("b.json", "1"), ("c.json", "3")] {
        let out = path(&dir, name);
        let args = ["simulate", "--preset", "desk", "--seed", "42", "--trials", "300000", "--out", &out];
        let run = heraldsim_env(&args, &[("HERALDSIM_THREADS", threads)]);
        assert_eq!(code(&run), 0, "{}", stderr(&run));
        let mut v = common::strip_timestamp(&read(&out));
        v["manifest"].as_object_mut().unwrap().remove("command_line");
        payloads.push(v);
    }
    assert_eq!(payloads[0], payloads[1]);
    assert_eq!(payloads[0], payloads[2]);
    assert_eq!(payloads[0]["manifest"]["seed"], 42);
}

#[test]
fn simulate_json_round_trips() {
    let dir = TempDir::new().unwrap();
    for mode in ["analytic", "mc"] {
        let out = path(&dir, &format!("{mode}.json"));
        let run = heraldsim(&["simulate", "--preset", "desk", "--mode", mode, "--trials", "20000", "--out", &out]);
        assert_eq!(code(&run), 0, "{}", stderr(&run));
        let text = read(&out);
        let parsed: SimulationOutput = serde_json::from_str(&text).unwrap();
        assert_eq!(heraldsim::cli::output::to_json(&parsed).unwrap(), text);
    }
}

#[test]
fn invalid_pair_parameter_names_the_field() {
    let dir = TempDir::new().unwrap();
    let cfg = write(&dir, "big.json", r#"{"pump_powers": [500]}"#);
    let run = heraldsim(&["simulate", "--config", &cfg]);
    assert_eq!(code(&run), 2);
    assert!(stderr(&run).contains("pump_powers[0]"), "{}", stderr(&run));
}

#[test]
fn unknown_keys_and_bad_json_are_validation_errors() {
    let dir = TempDir::new().unwrap();
    let typo = write(&dir, "typo.json", r#"{"memory": {"eta_ecko": 0.2}}"#);
    let run = heraldsim(&["sweep", "--config", &typo]);
    assert_eq!(code(&run), 2);
    assert!(stderr(&run).contains("eta_ecko"), "{}", stderr(&run));

    let broken = write(&dir, "broken.json", r#"{"alpha": "#);
    let run = heraldsim(&["sweep", "--config", &broken]);
    assert_eq!(code(&run), 2);
    assert!(stderr(&run).contains("line"), "{}", stderr(&run));

    assert_eq!(code(&heraldsim(&["sweep", "--mode", "quantum"])), 2);
    assert_eq!(code(&heraldsim(&["sweep", "--set", "visibility.value=1.5"])), 2);
}

#[test]
fn missing_config_is_an_io_error() {
    let dir = TempDir::new().unwrap();
    assert_eq!(code(&heraldsim(&["sweep", "--config", &path(&dir, "nope.json")])), 3);
}

#[test]
fn sweep_csv_matches_library_and_reparses() {
    let dir = TempDir::new().unwrap();
    let out = path(&dir, "sweep.csv");
    let run = heraldsim(&["sweep", "--preset", "paper", "--out", &out]);
    assert_eq!(code(&run), 0, "{}", stderr(&run));
    let text = read(&out);
    assert_eq!(text.lines().next().unwrap(), SWEEP_HEADER.join(","));
    let table = parse_csv(&text, &SWEEP_HEADER).unwrap();
    let rows = pump_sweep(&ExperimentConfig::paper()).unwrap();
    assert_eq!(table.len(), 7);
    for (written, r) in table.iter().zip(&rows) {
        let fields = [
            r.power_mw,
            r.lambda,
            r.gsi_model,
            r.gsi_est.value,
            r.gsi_est.sigma,
            r.p10.value,
            r.p10.sigma,
            r.p01.value,
            r.p01.sigma,
            r.p11_xcorr.value,
            r.p11_theory,
            r.c_bound.value,
            r.c_bound.sigma,
        ];
        for (x, w) in fields.iter().zip(written) {
            assert_eq!(round_to_written(*x), *w);
            assert!(((w - x) / x).abs() < 5e-9);
        }
    }
    let manifest: serde_json::Value = serde_json::from_str(&read(format!("{out}.manifest.json"))).unwrap();
    assert_eq!(
        manifest["config_digest"],
        heraldsim::cli::output::config_digest(&ExperimentConfig::paper())
    );
}

#[test]
fn csv_numbers_are_plain() {
    let run = heraldsim(&["sweep", "--preset", "paper"]);
    assert_eq!(code(&run), 0);
    let text = String::from_utf8(run.stdout).unwrap();
    for line in text.lines().skip(1) {
        for field in line.split(',') {
            let digits = field
                .split('e')
                .next()
                .unwrap()
                .chars()
                .filter(char::is_ascii_digit)
                .collect::<String>();
            assert!(digits.trim_start_matches('0').len() <= 9, "{field}");
            assert!(field.chars().all(|c| c.is_ascii_digit() || ".-e".contains(c)), "{field}");
        }
    }
}

#[test]
fn sweep_error_exit_codes() {
    let dir = TempDir::new().unwrap();
    let empty = write(&dir, "empty.json", r#"{"pump_powers": []}"#);
    assert_eq!(code(&heraldsim(&["sweep", "--config", &empty])), 2);
    let unwritable = path(&dir, "missing/dir/out.csv");
    assert_eq!(code(&heraldsim(&["sweep", "--out", &unwritable])), 3);
}

#[test]
fn estimate_on_the_long_campaign() {
    let dir = TempDir::new().unwrap();
    let counts = write(&dir, "campaign.json", &common::campaign_counts_json());
    let run = heraldsim(&["estimate", "--counts", &counts, "--method", "mle"]);
    assert_eq!(code(&run), 0, "{}", stderr(&run));
    let stdout = String::from_utf8(run.stdout).unwrap();
    let line = stdout.lines().next().unwrap();
    let (name, rest) = line.split_once(": C = ").unwrap();
    let (value, sigma) = rest.split_once(" ± ").unwrap();
    let (value, sigma): (f64, f64) = (value.parse().unwrap(), sigma.parse().unwrap());
    assert_eq!(name, "threefold-mle");
    assert!((value - 6.3857e-5).abs() < 1e-8, "{line}");
    assert!((sigma - 3.8135e-5).abs() < 1e-8, "{line}");

    let out = path(&dir, "est.json");
    let run = heraldsim(&["estimate", "--counts", &counts, "--out", &out]);
    assert_eq!(code(&run), 0);
    let report: EstimateReport = serde_json::from_str(&read(&out)).unwrap();
    assert_eq!(report.threefold.len(), 2);
    // The campaign record has no unheralded singles, so no cross-correlation bound.
    assert_eq!(report.concurrence.len(), 2);
    assert_eq!(report.gsi.map(|g| g.value), Some(1.0));
    assert!((report.twofold_per_herald.value - 1.7777e-4).abs() < 1e-8);
}

#[test]
fn estimate_ce_on_zero_coincidences() {
    let dir = TempDir::new().unwrap();
    let mut rec: serde_json::Value = serde_json::from_str(&common::campaign_counts_json()).unwrap();
    rec["n12_given_h"] = 0.0.into();
    rec["n12"] = 0.0.into();
    let counts = write(&dir, "zero.json", &rec.to_string());
    let out = path(&dir, "est.json");
    let run = heraldsim(&["estimate", "--counts", &counts, "--method", "all", "--out", &out]);
    assert_eq!(code(&run), 0, "{}", stderr(&run));
    let report: EstimateReport = serde_json::from_str(&read(&out)).unwrap();
    let (mle, ce) = (&report.threefold[0], &report.threefold[1]);
    assert_eq!(mle.p11.value, 0.0);
    assert!(ce.p11.value > 0.0);
    assert!(report.concurrence[1].value < report.concurrence[0].value);
}

#[test]
fn estimate_reads_simulate_output() {
    let dir = TempDir::new().unwrap();
    let sim = path(&dir, "sim.json");
    let run = heraldsim(&["simulate", "--preset", "desk", "--trials", "2000000", "--power", "40", "--out", &sim]);
    assert_eq!(code(&run), 0, "{}", stderr(&run));
    let run = heraldsim(&["estimate", "--preset", "desk", "--counts", &sim, "--method", "xcorr"]);
    assert_eq!(code(&run), 0, "{}", stderr(&run));
    assert!(String::from_utf8(run.stdout).unwrap().starts_with("xcorr: C = "));
}

#[test]
fn estimate_missing_or_malformed_counts() {
    let dir = TempDir::new().unwrap();
    assert_eq!(code(&heraldsim(&["estimate", "--counts", &path(&dir, "none.json")])), 3);
    let junk = write(&dir, "junk.json", r#"{"heralds": 3}"#);
    assert_eq!(code(&heraldsim(&["estimate", "--counts", &junk])), 2);
}

#[test]
fn fringe_csv_and_fits() {
    let dir = TempDir::new().unwrap();
    let out = path(&dir, "fringe.csv");
    let run = heraldsim(&["fringe", "--preset", "desk", "--mode", "analytic", "--points", "8", "--out", &out]);
    assert_eq!(code(&run), 0, "{}", stderr(&run));
    let table = parse_csv(&read(&out), &FRINGE_HEADER).unwrap();
    assert_eq!(table.len(), 8);
    let sidecar: serde_json::Value = serde_json::from_str(&read(format!("{out}.manifest.json"))).unwrap();
    for fit in sidecar["fits"].as_array().unwrap() {
        let v = fit["visibility"]["value"].as_f64().unwrap();
        let s = fit["visibility"]["sigma"].as_f64().unwrap();
        assert!((v - 0.965).abs() < 4.0 * s + 1e-9, "V = {v} ± {s}");
    }
    assert_eq!(code(&heraldsim(&["fringe", "--points", "3"])), 2);
}

#[test]
fn report_is_valid_json() {
    let run = heraldsim(&["report", "--preset", "paper"]);
    assert_eq!(code(&run), 0, "{}", stderr(&run));
    let report: Report = serde_json::from_slice(&run.stdout).unwrap();
    assert_eq!(report.sweep.len(), 7);
    assert_eq!(report.threefold.mle.n, 2);
    assert!((report.budget.printed_over_computed - 10.0).abs() < 0.5);
    assert_eq!(report.notes.len(), 2);
}

#[test]
fn help_and_unknown_subcommand() {
    assert_eq!(code(&heraldsim(&["--help"])), 0);
    assert_eq!(code(&heraldsim(&["teleport"])), 2);
}
