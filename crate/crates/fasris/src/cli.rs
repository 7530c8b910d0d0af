//! Command-line front end: JSON run configuration, reference-gain
//! resolution, figure and sweep execution, calibration, and self checks.
//!
//! Every table written to disk is paired with a manifest recording the
//! resolved scenario, sweep grid, seed and reference gain, so any published
//! curve can be regenerated byte-for-byte from the manifest alone. Nothing
//! in an output file depends on wall-clock time or machine identity.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::architectures::ArchitectureKind;
use crate::channel::{ArrayConfig, Geometry, LinkBudget, RicianParams, RisConfig, Scenario};
use crate::experiment::{
    calibrate_reference_gain, run_sweep, CalibrationOptions, CalibrationResult, ExperimentError,
    SweepSpec, SweepTable,
};
use crate::reference;
use crate::validate::{run_validation, CHECK_NAMES};

// ── errors ─────────────────────────────────────────────────────────────────

#[derive(Debug, Error)]
pub enum CliError {
    /// Bad configuration or command-line input.
    #[error("config: {0}")]
    Config(String),
    /// Filesystem failure.
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    /// One or more self checks failed.
    #[error("validation failed")]
    Validation,
    #[error(transparent)]
    Experiment(#[from] ExperimentError),
}

impl CliError {
    /// Process exit code: 2 for configuration mistakes, 3 for i/o failures,
    /// 1 for everything that fails after the inputs were accepted.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Io { .. } => 3,
            CliError::Validation | CliError::Experiment(_) => 1,
        }
    }
}

fn read_file(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    fs::write(path, contents).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

// ── configuration ──────────────────────────────────────────────────────────

/// Link budget as configured: the reference gain is optional because it is
/// usually fitted by calibration rather than set by hand.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BudgetConfig {
    pub carrier_hz: f64,
    pub pathloss_exponent: f64,
    /// Fixed reference gain in dB; omit to calibrate or load one.
    pub reference_gain_db: Option<f64>,
    pub noise_dbm: f64,
    pub tx_dbm: f64,
}

impl Default for BudgetConfig {
    fn default() -> Self {
        let budget = reference::default_scenario(reference::DEFAULT_PORT_COUNT).budget;
        Self {
            carrier_hz: budget.carrier_hz,
            pathloss_exponent: budget.pathloss_exponent,
            reference_gain_db: None,
            noise_dbm: budget.noise_dbm,
            tx_dbm: budget.tx_dbm,
        }
    }
}

/// Sweep grid as configured. The `figure` command fixes the grid itself and
/// takes only `trials` and `master_seed` from here.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepConfig {
    pub architectures: Vec<ArchitectureKind>,
    pub n_values: Vec<usize>,
    pub p_dbm_values: Vec<f64>,
    pub trials: usize,
    pub master_seed: u64,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            architectures: ArchitectureKind::ALL.to_vec(),
            n_values: reference::FIGURE2_N_VALUES.to_vec(),
            p_dbm_values: vec![reference::FIGURE2_P_DBM],
            trials: reference::DEFAULT_TRIALS,
            master_seed: reference::DEFAULT_MASTER_SEED,
        }
    }
}

impl SweepConfig {
    fn to_spec(&self) -> SweepSpec {
        SweepSpec {
            architectures: self.architectures.clone(),
            n_values: self.n_values.clone(),
            p_dbm_values: self.p_dbm_values.clone(),
            trials: self.trials,
            master_seed: self.master_seed,
        }
    }
}

/// Complete run configuration. Every field has a default, so `{}` is a
/// valid file and the empty configuration reproduces the reference case
/// study; unknown keys are rejected.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub geometry: Geometry,
    pub link_budget: BudgetConfig,
    pub bs_array: ArrayConfig,
    pub ue_array: ArrayConfig,
    pub ris: RisConfig,
    pub rician_k: f64,
    pub sweep: SweepConfig,
    /// Fit the reference gain at startup when it is not pinned by
    /// `link_budget.reference_gain_db` or `calibration_file`.
    pub auto_calibrate: bool,
    pub calibration_target_bps_hz: f64,
    /// Saved output of a `calibrate` run to reuse instead of refitting.
    pub calibration_file: Option<PathBuf>,
    /// Worker threads; command-line `--workers` takes precedence.
    pub workers: Option<usize>,
}

impl Default for RunConfig {
    fn default() -> Self {
        let s = reference::default_scenario(reference::DEFAULT_PORT_COUNT);
        Self {
            geometry: s.geometry,
            link_budget: BudgetConfig::default(),
            bs_array: s.bs_array,
            ue_array: s.ue_array,
            ris: s.ris,
            rician_k: s.rician.k_factor,
            sweep: SweepConfig::default(),
            auto_calibrate: true,
            calibration_target_bps_hz: reference::CALIBRATION_TARGET_BPS_HZ,
            calibration_file: None,
            workers: None,
        }
    }
}

impl RunConfig {
    /// The configured scenario with the reference gain filled in.
    pub fn scenario_with_gain(&self, reference_gain_db: f64) -> Scenario {
        Scenario {
            geometry: self.geometry,
            budget: LinkBudget {
                carrier_hz: self.link_budget.carrier_hz,
                pathloss_exponent: self.link_budget.pathloss_exponent,
                reference_gain_db,
                noise_dbm: self.link_budget.noise_dbm,
                tx_dbm: self.link_budget.tx_dbm,
            },
            bs_array: self.bs_array,
            ue_array: self.ue_array,
            ris: self.ris,
            rician: RicianParams {
                k_factor: self.rician_k,
            },
        }
    }
}

/// Load a configuration file, or the defaults when no path is given.
pub fn load_config(path: Option<&Path>) -> Result<RunConfig, CliError> {
    match path {
        None => Ok(RunConfig::default()),
        Some(p) => {
            let text = read_file(p)?;
            // serde_json errors carry line and column positions.
            serde_json::from_str(&text)
                .map_err(|e| CliError::Config(format!("{}: {e}", p.display())))
        }
    }
}

// ── command-line surface ───────────────────────────────────────────────────

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
}

impl OutputFormat {
    fn extension(self) -> &'static str {
        match self {
            OutputFormat::Csv => "csv",
            OutputFormat::Json => "json",
        }
    }
}

/// Flags shared by the commands that run an experiment.
#[derive(Debug, Clone, clap::Args)]
pub struct CommonArgs {
    /// JSON run configuration; built-in defaults are used when omitted.
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Master seed, overriding the configuration.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Monte-Carlo trials per cell, overriding the configuration.
    #[arg(long)]
    pub trials: Option<usize>,
    /// Output path (the default name depends on the command).
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
    /// Output format for sweep tables.
    #[arg(long, value_enum, default_value = "csv")]
    pub format: OutputFormat,
    /// Worker threads, overriding the configuration (default: one per core).
    #[arg(long)]
    pub workers: Option<usize>,
}

/// Fold command-line overrides into the configuration.
pub fn apply_overrides(config: &mut RunConfig, common: &CommonArgs) -> Result<(), CliError> {
    if let Some(seed) = common.seed {
        config.sweep.master_seed = seed;
    }
    if let Some(trials) = common.trials {
        if trials == 0 {
            return Err(CliError::Config("trials must be at least 1".into()));
        }
        config.sweep.trials = trials;
    }
    if let Some(workers) = common.workers {
        config.workers = Some(workers);
    }
    Ok(())
}

/// Run `f` on a dedicated pool of `workers` threads, or on the global pool
/// when no count is set. Results never depend on the pool size.
fn with_pool<T: Send>(workers: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T, CliError> {
    match workers {
        None => Ok(f()),
        Some(0) => Err(CliError::Config("workers must be at least 1".into())),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| CliError::Config(format!("thread pool: {e}")))?;
            Ok(pool.install(f))
        }
    }
}

// ── reference-gain resolution ──────────────────────────────────────────────

/// Decide the reference gain, in order of precedence: an explicit
/// `link_budget.reference_gain_db`, then a saved `calibration_file`, then a
/// fresh fit when `auto_calibrate` is on. Returns the gain and the
/// calibration record behind it, if any.
pub fn resolve_reference_gain(
    config: &RunConfig,
) -> Result<(f64, Option<CalibrationResult>), CliError> {
    if let Some(gain) = config.link_budget.reference_gain_db {
        if !gain.is_finite() {
            return Err(CliError::Config("reference_gain_db must be finite".into()));
        }
        return Ok((gain, None));
    }
    if let Some(path) = &config.calibration_file {
        let text = read_file(path)?;
        let cal: CalibrationResult = serde_json::from_str(&text)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        return Ok((cal.reference_gain_db, Some(cal)));
    }
    if config.auto_calibrate {
        let cal = run_calibration(config)?;
        return Ok((cal.reference_gain_db, Some(cal)));
    }
    Err(CliError::Config(
        "no reference gain: set link_budget.reference_gain_db, calibration_file, \
         or auto_calibrate"
            .into(),
    ))
}

/// Fit the reference gain for this configuration. The throughput target is
/// anchored at the standard 10 dBm transmit power regardless of the power
/// the sweep itself uses.
fn run_calibration(config: &RunConfig) -> Result<CalibrationResult, CliError> {
    let mut anchor = config.scenario_with_gain(reference::NOMINAL_REFERENCE_GAIN_DB);
    anchor.budget.tx_dbm = reference::FIGURE2_P_DBM;
    let opts = CalibrationOptions {
        target_bps_hz: config.calibration_target_bps_hz,
        trials: config.sweep.trials,
        master_seed: config.sweep.master_seed,
    };
    Ok(calibrate_reference_gain(&anchor, &opts)?)
}

// ── manifests ──────────────────────────────────────────────────────────────

/// Simulated-against-reference comparison at one cell of a figure.
#[derive(Debug, Clone, Serialize)]
pub struct BaselineReport {
    pub architecture: ArchitectureKind,
    pub n: usize,
    pub p_dbm: f64,
    pub reference_bps_hz: f64,
    pub simulated_bps_hz: f64,
    pub gap_bps_hz: f64,
}

/// Everything needed to regenerate an output file, written next to it.
/// Deliberately timestamp-free so reruns produce identical manifests.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub command: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub figure: Option<u8>,
    pub tool_version: String,
    pub format: OutputFormat,
    pub output: PathBuf,
    pub master_seed: u64,
    pub trials: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub workers: Option<usize>,
    pub reference_gain_db: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub calibration: Option<CalibrationResult>,
    pub scenario: Scenario,
    pub sweep: SweepSpec,
    pub rows: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub baseline_report: Option<BaselineReport>,
}

fn to_pretty_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    s
}

// ── commands ───────────────────────────────────────────────────────────────

/// Grid of one of the two standard figures: 2 sweeps the port count at
/// 10 dBm, 3 sweeps the transmit power at N = 50. Both cover all six
/// architectures; trials and seed come from the configuration.
pub fn figure_spec(figure: u8, sweep: &SweepConfig) -> SweepSpec {
    let (n_values, p_dbm_values) = if figure == 2 {
        (
            reference::FIGURE2_N_VALUES.to_vec(),
            vec![reference::FIGURE2_P_DBM],
        )
    } else {
        (
            vec![reference::FIGURE3_N],
            reference::FIGURE3_P_DBM_VALUES.to_vec(),
        )
    };
    SweepSpec {
        architectures: ArchitectureKind::ALL.to_vec(),
        n_values,
        p_dbm_values,
        trials: sweep.trials,
        master_seed: sweep.master_seed,
    }
}

pub fn cmd_figure(figure: u8, common: &CommonArgs) -> Result<(), CliError> {
    if !(2..=3).contains(&figure) {
        return Err(CliError::Config(format!(
            "unknown figure {figure}; this tool reproduces figures 2 and 3"
        )));
    }
    let stem = if figure == 2 { "figure2" } else { "figure3" };
    execute_grid("figure", Some(figure), common, stem, |config| {
        figure_spec(figure, &config.sweep)
    })
}

pub fn cmd_sweep(common: &CommonArgs) -> Result<(), CliError> {
    execute_grid("sweep", None, common, "sweep", |config| {
        config.sweep.to_spec()
    })
}

fn execute_grid(
    command: &str,
    figure: Option<u8>,
    common: &CommonArgs,
    default_stem: &str,
    spec_for: impl FnOnce(&RunConfig) -> SweepSpec,
) -> Result<(), CliError> {
    let mut config = load_config(common.config.as_deref())?;
    apply_overrides(&mut config, common)?;
    let spec = spec_for(&config);
    let workers = common.workers.or(config.workers);

    let (gain, calibration, scenario, table) = with_pool(workers, || -> Result<_, CliError> {
        let (gain, calibration) = resolve_reference_gain(&config)?;
        let scenario = config.scenario_with_gain(gain);
        let table = run_sweep(&scenario, &spec)?;
        Ok((gain, calibration, scenario, table))
    })??;

    let out = common
        .out
        .clone()
        .unwrap_or_else(|| PathBuf::from(format!("{default_stem}.{}", common.format.extension())));
    let rendered = match common.format {
        OutputFormat::Csv => table.to_csv(),
        OutputFormat::Json => table.to_json_string(),
    };
    write_file(&out, &rendered)?;

    let baseline_report = match figure {
        Some(3) => Some(figure3_baseline(&table)?),
        _ => None,
    };
    let manifest = RunManifest {
        command: command.to_string(),
        figure,
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        format: common.format,
        output: out.clone(),
        master_seed: spec.master_seed,
        trials: spec.trials,
        workers,
        reference_gain_db: gain,
        calibration,
        scenario,
        sweep: spec,
        rows: table.rows.len(),
        baseline_report,
    };
    let manifest_path = out.with_extension("manifest.json");
    write_file(&manifest_path, &to_pretty_json(&manifest))?;

    println!("reference gain {gain:.6} dB");
    if let Some(b) = &manifest.baseline_report {
        println!(
            "baseline: {} at N = {}, P = {} dBm simulates {:.4} bps/Hz against the \
             reference {:.1} (gap {:+.4})",
            b.architecture, b.n, b.p_dbm, b.simulated_bps_hz, b.reference_bps_hz, b.gap_bps_hz
        );
    }
    println!(
        "wrote {} ({} rows) and {}",
        out.display(),
        manifest.rows,
        manifest_path.display()
    );
    Ok(())
}

fn figure3_baseline(table: &SweepTable) -> Result<BaselineReport, CliError> {
    let row = table
        .find(
            ArchitectureKind::Conventional,
            reference::FIGURE3_N,
            reference::FIGURE3_BASELINE_P_DBM,
        )
        .ok_or_else(|| {
            CliError::Config("figure 3 grid lacks its 20 dBm conventional cell".into())
        })?;
    Ok(BaselineReport {
        architecture: ArchitectureKind::Conventional,
        n: row.n,
        p_dbm: row.p_dbm,
        reference_bps_hz: reference::FIGURE3_CONVENTIONAL_20DBM,
        simulated_bps_hz: row.mean_bps_hz,
        gap_bps_hz: row.mean_bps_hz - reference::FIGURE3_CONVENTIONAL_20DBM,
    })
}

/// Fit the reference gain and save the result (always JSON), regardless of
/// any gain already pinned in the configuration.
pub fn cmd_calibrate(common: &CommonArgs) -> Result<(), CliError> {
    let mut config = load_config(common.config.as_deref())?;
    apply_overrides(&mut config, common)?;
    let workers = common.workers.or(config.workers);
    let cal = with_pool(workers, || run_calibration(&config))??;
    let out = common
        .out
        .clone()
        .unwrap_or_else(|| PathBuf::from("calibration.json"));
    write_file(&out, &to_pretty_json(&cal))?;
    println!(
        "calibrated reference gain {:.6} dB; mean throughput {:.6} bps/Hz against the \
         {} bps/Hz target over {} trials (seed {}) -> {}",
        cal.reference_gain_db,
        cal.achieved_bps_hz,
        cal.target_bps_hz,
        cal.trials,
        cal.master_seed,
        out.display()
    );
    Ok(())
}

/// Run the built-in self checks against the reference scenario (the check
/// thresholds assume it; the run configuration is deliberately not used).
/// Prints one line per check and exits nonzero when any fails.
pub fn cmd_validate(inject_fault: Option<&str>, out: Option<&Path>) -> Result<(), CliError> {
    if let Some(name) = inject_fault {
        if !CHECK_NAMES.contains(&name) {
            return Err(CliError::Config(format!(
                "unknown check {name:?}; known checks: {}",
                CHECK_NAMES.join(", ")
            )));
        }
    }
    let report = run_validation(inject_fault);
    let text = report.render_text();
    print!("{text}");
    if let Some(path) = out {
        write_file(path, &text)?;
    }
    if report.all_passed() {
        println!("all checks passed");
        Ok(())
    } else {
        Err(CliError::Validation)
    }
}

// ── tests ──────────────────────────────────────────────────────────────────
