//! `heraldsim` command line: configuration, run manifests and report emission.
//!
//! Exit codes: 0 on success, 2 for invalid configuration or input, 3 for I/O
//! failures.

pub mod config;
pub mod output;

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::estimators::{
    concurrence_bound, gsi_from_record, p11_xcorr, probabilities_from_campaign, twofold_per_herald,
    ConcurrenceEstimate, Method, ThreefoldEstimate, Uncertain,
};
use crate::experiment::{
    self, fringe_scan_with, paper, pump_sweep_with, threefold_campaign_with, threefold_from_counts,
    transmission_budget, Mode, TransmissionBudget,
};
use crate::montecarlo::{expected_counts, run_trials_with, Arm, CountRecord, ExpectedCounts, HeraldedCounts};
use crate::optics::effective_efficiencies;
use crate::parallel::Execution;
use config::{Overrides, Preset};
use output::{emit, to_json, RunManifest};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Validation(String),
    #[error("{0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Io(_) => 3,
        }
    }
}

impl From<crate::Error> for CliError {
    fn from(e: crate::Error) -> Self {
        CliError::Validation(e.to_string())
    }
}

#[derive(Debug, Parser)]
#[command(name = "heraldsim", version, about = "Heralded single-photon entanglement simulator")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// JSON file overlaid on the preset; unknown keys are rejected.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output file; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub mode: Option<ModeArg>,
    #[arg(long, value_enum, default_value = "paper")]
    pub preset: Preset,
    /// Override a configuration value, e.g. `--set memory.eta_echo=0.2`.
    #[arg(long = "set", value_name = "KEY=JSON")]
    pub set: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Analytic,
    Mc,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BlockArg {
    A,
    B,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Mle,
    Ce,
    Xcorr,
    All,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Count record of one configuration (sampled or expected).
    Simulate {
        #[command(flatten)]
        common: Common,
        /// Pump power in mW; defaults to the first configured power.
        #[arg(long)]
        power: Option<f64>,
        /// Arm blocked before the memories.
        #[arg(long, value_enum)]
        block: Option<BlockArg>,
        #[arg(long)]
        trials: Option<u64>,
    },
    /// Pump-power sweep as CSV.
    Sweep {
        #[command(flatten)]
        common: Common,
    },
    /// Estimators applied to a stored count record.
    Estimate {
        #[command(flatten)]
        common: Common,
        /// JSON count record, or the output of `simulate`.
        #[arg(long)]
        counts: PathBuf,
        #[arg(long, value_enum, default_value = "all")]
        method: MethodArg,
        /// Fixed correction factor instead of the beamsplitter model.
        #[arg(long)]
        correction: Option<f64>,
    },
    /// Phase scan of both detectors as CSV, with fitted visibilities.
    Fringe {
        #[command(flatten)]
        common: Common,
        /// Evenly spaced phases over one period instead of the configured list.
        #[arg(long)]
        points: Option<usize>,
    },
    /// Summary of the sweep, the threefold campaign and the transmission budget.
    Report {
        #[command(flatten)]
        common: Common,
    },
}

impl Common {
    fn resolve(&self) -> Result<experiment::ExperimentConfig, CliError> {
        let overrides = Overrides {
            seed: self.seed,
            mode: self.mode.map(|m| match m {
                ModeArg::Analytic => Mode::Analytic,
                ModeArg::Mc => Mode::MonteCarlo,
            }),
            set: self.set.clone(),
        };
        config::resolve(self.preset, self.config.as_deref(), &overrides)
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let args: Vec<std::ffi::OsString> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let command_line = args.iter().map(|a| a.to_string_lossy().into_owned()).collect();
    match execute(cli.command, command_line) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("heraldsim: {e}");
            e.exit_code()
        }
    }
}

/// Output of `simulate`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationOutput {
    pub manifest: RunManifest,
    pub mode: Mode,
    pub power_mw: f64,
    pub blocked: Option<Arm>,
    pub counts: Counts,
}

/// Sampled integer counts or real-valued expectations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Counts {
    Sampled(CountRecord),
    Expected(ExpectedCounts),
}

impl Counts {
    fn expected(&self) -> ExpectedCounts {
        match self {
            Counts::Sampled(r) => r.as_expected(),
            Counts::Expected(e) => *e,
        }
    }
}

fn execute(command: Command, command_line: Vec<String>) -> Result<(), CliError> {
    let exec = Execution::from_env();
    match command {
        Command::Simulate {
            common,
            power,
            block,
            trials,
        } => {
            let cfg = common.resolve()?;
            let power = power.unwrap_or(cfg.pump_powers[0]);
            let blocked = block.map(|b| match b {
                BlockArg::A => Arm::A,
                BlockArg::B => Arm::B,
            });
            let mut tc = cfg.trial_config(power, blocked, cfg.seed)?;
            if let Some(t) = trials {
                tc.trials = t;
                tc.validate()?;
            }
            let counts = match cfg.mode {
                Mode::Analytic => Counts::Expected(expected_counts(&tc)?),
                Mode::MonteCarlo => Counts::Sampled(run_trials_with(&tc, exec)?),
            };
            let out = SimulationOutput {
                manifest: RunManifest::new(&cfg, command_line),
                mode: cfg.mode,
                power_mw: power,
                blocked,
                counts,
            };
            emit(common.out.as_deref(), &to_json(&out)?)
        }
        Command::Sweep { common } => {
            let cfg = common.resolve()?;
            let rows = pump_sweep_with(&cfg, exec)?;
            emit(common.out.as_deref(), &output::sweep_csv(&rows))?;
            write_manifest(common.out.as_deref(), &RunManifest::new(&cfg, command_line))
        }
        Command::Estimate {
            common,
            counts,
            method,
            correction,
        } => {
            let mut cfg = common.resolve()?;
            if let Some(c) = correction {
                cfg.threefold.correction = Some(c);
            }
            let record = read_counts(&counts)?;
            let report = estimate(&cfg, &record, method)?;
            for c in &report.concurrence {
                println!(
                    "{}: C = {} ± {}",
                    c.method,
                    output::format_number(c.value),
                    output::format_number(c.sigma)
                );
            }
            match common.out.as_deref() {
                Some(p) => emit(Some(p), &to_json(&report)?),
                None => Ok(()),
            }
        }
        Command::Fringe { common, points } => {
            let cfg = common.resolve()?;
            let phases = match points {
                Some(n) => (0..n).map(|k| k as f64 * std::f64::consts::TAU / n as f64).collect(),
                None => cfg.fringe.phases.clone(),
            };
            let scan = fringe_scan_with(&cfg, &phases, exec)?;
            for (k, fit) in scan.fits.iter().enumerate() {
                eprintln!(
                    "detector {}: V = {} ± {}",
                    k + 1,
                    output::format_number(fit.visibility.value),
                    output::format_number(fit.visibility.sigma)
                );
            }
            emit(common.out.as_deref(), &output::fringe_csv(&scan.points))?;
            let manifest = RunManifest::new(&cfg, command_line);
            write_sidecar(common.out.as_deref(), &json!({ "manifest": manifest, "fits": scan.fits }))
        }
        Command::Report { common } => {
            let cfg = common.resolve()?;
            let report = report(&cfg, exec, command_line)?;
            let text = to_json(&report)?;
            emit(common.out.as_deref(), &text)
        }
    }
}

fn write_manifest(out: Option<&Path>, manifest: &RunManifest) -> Result<(), CliError> {
    write_sidecar(out, &serde_json::to_value(manifest).map_err(|e| CliError::Validation(e.to_string()))?)
}

/// Writes `<out>.manifest.json` next to a file output; nothing for stdout.
fn write_sidecar(out: Option<&Path>, value: &Value) -> Result<(), CliError> {
    match out {
        Some(p) => {
            let mut name = p.as_os_str().to_owned();
            name.push(".manifest.json");
            emit(Some(Path::new(&name)), &to_json(value)?)
        }
        None => Ok(()),
    }
}

/// Reads a count record, either bare or wrapped in `simulate` output.
pub fn read_counts(path: &Path) -> Result<ExpectedCounts, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Io(format!("cannot read counts {}: {e}", path.display())))?;
    let value: Value =
        serde_json::from_str(&text).map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))?;
    let inner = value.get("counts").cloned().unwrap_or(value);
    let counts: Counts = serde_json::from_value(inner).map_err(|e| {
        CliError::Validation(format!("{}: not a count record: {e}", path.display()))
    })?;
    Ok(counts.expected())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateReport {
    pub n_heralds: f64,
    pub twofold_per_herald: Uncertain,
    pub gsi: Option<Uncertain>,
    pub threefold: Vec<ThreefoldEstimate>,
    pub concurrence: Vec<ConcurrenceEstimate>,
}

/// Applies the requested estimators to one record with both arms open.
pub fn estimate(
    cfg: &experiment::ExperimentConfig,
    rec: &ExpectedCounts,
    method: MethodArg,
) -> Result<EstimateReport, CliError> {
    let twofold = twofold_per_herald(rec)?;
    let want = |m: MethodArg| method == m || method == MethodArg::All;
    let mut threefold = Vec::new();
    let mut concurrence = Vec::new();
    if want(MethodArg::Mle) || want(MethodArg::Ce) {
        let n = rec.n12_given_h();
        if n.fract() != 0.0 || n < 0.0 {
            return Err(CliError::Validation(format!(
                "threefold estimators need an integer coincidence count, got {n}"
            )));
        }
        let r = threefold_from_counts(cfg, n as u64, rec.heralds(), twofold)?;
        if want(MethodArg::Mle) {
            threefold.push(r.mle);
            concurrence.push(r.c_mle);
        }
        if want(MethodArg::Ce) {
            threefold.push(r.ce);
            concurrence.push(r.c_ce);
        }
    }
    let mut gsi = None;
    if want(MethodArg::Xcorr) {
        let g = gsi_from_record(rec)?;
        // A record without unheralded singles carries no correlation; `all`
        // then reports the threefold methods only.
        if method == MethodArg::All && !(g.value > 1.0) {
            return Ok(EstimateReport {
                n_heralds: rec.heralds(),
                twofold_per_herald: twofold,
                gsi: Some(g),
                threefold,
                concurrence,
            });
        }
        let half = probabilities_from_campaign(rec, Uncertain::exact(0.0))?;
        let p11 = p11_xcorr(half.p10, half.p01, g)?;
        let table = probabilities_from_campaign(rec, p11)?;
        concurrence.push(concurrence_bound(cfg.visibility, &table, Method::Xcorr)?);
        gsi = Some(g);
    }
    Ok(EstimateReport {
        n_heralds: rec.heralds(),
        twofold_per_herald: twofold,
        gsi,
        threefold,
        concurrence,
    })
}

/// Budget evaluated two ways: from the stage product, and from the rounded
/// `η ≈ p10 + p01` reading, next to the printed values it is compared with.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BudgetComparison {
    pub from_stages: TransmissionBudget,
    pub from_rounded_eta: f64,
    pub printed_c_detected: f64,
    pub printed_c_after_crystals: f64,
    /// Printed detected value over the computed one (≈ 10 for a decimal slip).
    pub printed_over_computed: f64,
}

pub fn budget_comparison(cfg: &experiment::ExperimentConfig) -> Result<BudgetComparison, CliError> {
    let from_stages = transmission_budget(&cfg.stages, cfg.visibility.value, paper::GSI_8MW)?;
    let from_rounded_eta =
        crate::estimators::simple_concurrence(paper::PRINTED_ETA, cfg.visibility.value, paper::GSI_8MW)?;
    Ok(BudgetComparison {
        from_stages,
        from_rounded_eta,
        printed_c_detected: paper::PRINTED_C_DETECTED,
        printed_c_after_crystals: paper::PRINTED_C_AFTER_CRYSTALS,
        printed_over_computed: paper::PRINTED_C_DETECTED / from_stages.c_detected,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub manifest: RunManifest,
    pub mode: Mode,
    pub sweep: Vec<experiment::SweepRow>,
    pub threefold: experiment::ThreefoldResult,
    pub effective_efficiencies: crate::optics::EffectiveEfficiencies,
    pub budget: BudgetComparison,
    pub notes: Vec<String>,
}

fn report(
    cfg: &experiment::ExperimentConfig,
    exec: Execution,
    command_line: Vec<String>,
) -> Result<Report, CliError> {
    let sweep = pump_sweep_with(cfg, exec)?;
    let n_observed = (cfg.mode == Mode::Analytic && cfg.threefold.twofold_per_herald.is_some())
        .then_some(paper::THREEFOLD_COINCIDENCES);
    let threefold = threefold_campaign_with(cfg, n_observed, exec)?;
    let eff = effective_efficiencies(&cfg.bs, &cfg.detectors[0], &cfg.detectors[1])?;
    let budget = budget_comparison(cfg)?;
    let notes = vec![
        format!(
            "transmission budget: computed C_detected = {} and C_after_crystals = {}; the printed {} and {} are about {}x larger",
            output::format_number(budget.from_stages.c_detected),
            output::format_number(budget.from_stages.c_after_crystals),
            output::format_number(budget.printed_c_detected),
            output::format_number(budget.printed_c_after_crystals),
            output::format_number((budget.printed_over_computed * 10.0).round() / 10.0),
        ),
        format!(
            "correction factor: {} with the nominal bunching weight, {} with every term kept",
            output::format_number(eff.correction),
            output::format_number(eff.exact_correction),
        ),
    ];
    Ok(Report {
        manifest: RunManifest::new(cfg, command_line),
        mode: cfg.mode,
        sweep,
        threefold,
        effective_efficiencies: eff,
        budget,
        notes,
    })
}
