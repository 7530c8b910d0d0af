//! Trial orchestration: seeded Monte-Carlo sweeps, calibration of the
//! reference path gain, and brute-force oracles used for self-checks.
//!
//! Reproducibility contract: every trial owns the RNG stream
//! `(master_seed, trial_index)` and is evaluated independently; trials run
//! in parallel but results are collected by trial index and reduced with
//! compensated summation in fixed order, so a sweep's output is
//! bit-identical for any worker count.
//!
//! Common random numbers: within a trial, one channel realization is
//! synthesized at the largest swept port count and every cell (architecture,
//! N, P) reads leading-port views of it. Smaller port sets are prefixes of
//! larger ones, which makes "more ports never hurt" hold per trial for the
//! port-selecting architectures, and makes the conventional baseline
//! literally identical across N cells. The fluid-RIS spacing grid is not
//! nested across N (the candidate count changes), so its per-trial
//! monotonicity is not asserted.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::architectures::{
    evaluate_bs_fas, evaluate_conventional, evaluate_dual_fas, evaluate_fas_embedded_ris,
    evaluate_fris_with_grid, evaluate_ue_fas, ArchitectureError, ArchitectureKind,
    ArchitectureResult, FrisGrid,
};
use crate::channel::{
    assemble_reflect_parts, ChannelError, ChannelRealization, ChannelTables, Scenario,
};
use crate::numerics::{derive_stream, draw_complex_gaussian, NumericsError, RngStream};

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("invalid sweep spec: {0}")]
    InvalidSpec(&'static str),
    #[error("trial {trial} produced a non-finite throughput in cell ({architecture}, N={n}, P={p_dbm} dBm)")]
    NonFiniteTrial {
        trial: u64,
        architecture: ArchitectureKind,
        n: usize,
        p_dbm: f64,
    },
    #[error("dual search space {size} exceeds the brute-force guard ({limit})")]
    SearchSpaceTooLarge { size: usize, limit: usize },
    #[error(
        "calibration target {target} bps/Hz unreachable on [{lo_db:.2}, {hi_db:.2}] dB: \
         range [{f_lo:.4}, {f_hi:.4}]"
    )]
    CalibrationUnreachable {
        target: f64,
        lo_db: f64,
        hi_db: f64,
        f_lo: f64,
        f_hi: f64,
    },
    #[error(transparent)]
    Channel(#[from] ChannelError),
    #[error(transparent)]
    Architecture(#[from] ArchitectureError),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

// ── per-trial channel state ────────────────────────────────────────────────

/// Everything random a single trial ever touches, drawn in one fixed order:
/// reflect-path Gaussians first, then the relay receive and transmit hops.
pub struct TrialChannels {
    pub reflect: ChannelRealization,
    pub relay_rx: Vec<Complex64>,
    pub relay_tx: Vec<Complex64>,
    pub fris_nlos_in: Vec<Complex64>,
    pub fris_nlos_out: Vec<Complex64>,
}

impl TrialChannels {
    pub fn assemble(stream: &RngStream, scenario: &Scenario, tables: &ChannelTables) -> Self {
        let mut rng = stream.sampler();
        let parts = assemble_reflect_parts(&mut rng, scenario, tables);
        let relay_ports = scenario.relay_port_count();
        let (relay_rx, relay_tx) = match &tables.s_relay {
            Some(s_relay) => {
                let cl = scenario.rician.los_weight();
                let cn = scenario.rician.nlos_weight();
                let mix = |g: &[Complex64], los: &[Complex64]| -> Vec<Complex64> {
                    (0..relay_ports)
                        .map(|i| {
                            let mut colored = Complex64::new(0.0, 0.0);
                            for (j, &gj) in g.iter().enumerate() {
                                colored += s_relay[(i, j)] * gj;
                            }
                            cl * los[i] + cn * colored
                        })
                        .collect()
                };
                let g_rx = draw_complex_gaussian(&mut rng, relay_ports);
                let rx = mix(&g_rx, &tables.relay_los_rx);
                let g_tx = draw_complex_gaussian(&mut rng, relay_ports);
                let tx = mix(&g_tx, &tables.relay_los_tx);
                (rx, tx)
            }
            None => (Vec::new(), Vec::new()),
        };
        Self {
            reflect: parts.realization,
            relay_rx,
            relay_tx,
            fris_nlos_in: parts.fris_nlos_in,
            fris_nlos_out: parts.fris_nlos_out,
        }
    }
}

/// Evaluate one architecture against already-assembled trial channels.
/// `scenario` may ask for fewer ports than the channels carry; the
/// evaluators then read leading-port views.
pub fn evaluate_trial(
    channels: &TrialChannels,
    scenario: &Scenario,
    kind: ArchitectureKind,
) -> Result<ArchitectureResult, ExperimentError> {
    let out = match kind {
        ArchitectureKind::Conventional => evaluate_conventional(&channels.reflect, scenario)?,
        ArchitectureKind::BsFas => evaluate_bs_fas(&channels.reflect, scenario)?,
        ArchitectureKind::UeFas => evaluate_ue_fas(&channels.reflect, scenario)?,
        ArchitectureKind::DualFas => evaluate_dual_fas(&channels.reflect, scenario)?,
        ArchitectureKind::Fris => {
            let grid = FrisGrid::new(scenario)?;
            evaluate_fris_with_grid(
                &grid,
                &channels.fris_nlos_in,
                &channels.fris_nlos_out,
                channels.reflect.path_gain_bs_ris,
                channels.reflect.path_gain_ris_ue,
                scenario,
            )?
        }
        ArchitectureKind::FasEmbeddedRis => {
            evaluate_fas_embedded_ris(&channels.relay_rx, &channels.relay_tx, scenario)?
        }
    };
    Ok(out)
}

/// One architecture, one trial, end to end: derive the trial stream,
/// synthesize the channels at the scenario's own port count, evaluate.
pub fn run_trial(
    master_seed: u64,
    trial_index: u64,
    scenario: &Scenario,
    kind: ArchitectureKind,
) -> Result<ArchitectureResult, ExperimentError> {
    let tables = ChannelTables::new(scenario)?;
    let stream = derive_stream(master_seed, trial_index);
    let channels = TrialChannels::assemble(&stream, scenario, &tables);
    evaluate_trial(&channels, scenario, kind)
}

// ── sweeps ─────────────────────────────────────────────────────────────────

/// Grid of cells to sweep: every architecture at every (N, P) combination.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepSpec {
    pub architectures: Vec<ArchitectureKind>,
    pub n_values: Vec<usize>,
    pub p_dbm_values: Vec<f64>,
    pub trials: usize,
    pub master_seed: u64,
}

impl SweepSpec {
    fn validate(&self) -> Result<(), ExperimentError> {
        if self.architectures.is_empty() {
            return Err(ExperimentError::InvalidSpec("no architectures"));
        }
        if self.n_values.is_empty() {
            return Err(ExperimentError::InvalidSpec("no port counts"));
        }
        if self.n_values.contains(&0) {
            return Err(ExperimentError::InvalidSpec("port count of zero"));
        }
        if self.p_dbm_values.is_empty() {
            return Err(ExperimentError::InvalidSpec("no transmit powers"));
        }
        if !self.p_dbm_values.iter().all(|p| p.is_finite()) {
            return Err(ExperimentError::InvalidSpec("non-finite transmit power"));
        }
        if self.trials == 0 {
            return Err(ExperimentError::InvalidSpec("zero trials"));
        }
        Ok(())
    }
}

/// Mean, normal-approximation 95% half-width, and the sample count behind
/// them.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SummaryStatistics {
    pub mean: f64,
    pub ci95: f64,
    pub trials: usize,
}

impl SummaryStatistics {
    /// Compensated mean/variance over `values` in the order given.
    fn from_values(values: impl Iterator<Item = f64> + Clone, trials: usize) -> Self {
        let mean = neumaier_sum(values.clone()) / trials as f64;
        let ci95 = if trials > 1 {
            let ss = neumaier_sum(values.map(|v| (v - mean) * (v - mean)));
            let var = ss / (trials - 1) as f64;
            1.96 * (var / trials as f64).sqrt()
        } else {
            0.0
        };
        Self { mean, ci95, trials }
    }
}

/// Neumaier-compensated sum in iteration order.
fn neumaier_sum(values: impl Iterator<Item = f64>) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// One output row: a cell of the sweep grid with its summary statistics.
#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub architecture: ArchitectureKind,
    pub n: usize,
    pub p_dbm: f64,
    pub mean_bps_hz: f64,
    pub ci95: f64,
    pub trials: usize,
    pub seed: u64,
}

/// Sweep output in fixed row order: architecture (as listed), then N, then P.
#[derive(Debug, Clone, Serialize)]
pub struct SweepTable {
    pub rows: Vec<SweepRow>,
}

impl SweepTable {
    /// CSV with a fixed column order, LF line endings and floats at 17
    /// significant digits, so equal tables serialize to equal bytes.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("architecture,N,P_dbm,mean_bps_hz,ci95,trials,seed\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                r.architecture.id(),
                r.n,
                format_float(r.p_dbm),
                format_float(r.mean_bps_hz),
                format_float(r.ci95),
                r.trials,
                r.seed
            ));
        }
        out
    }

    pub fn to_json_string(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.rows).expect("rows serialize");
        s.push('\n');
        s
    }

    pub fn find(&self, kind: ArchitectureKind, n: usize, p_dbm: f64) -> Option<&SweepRow> {
        self.rows
            .iter()
            .find(|r| r.architecture == kind && r.n == n && r.p_dbm == p_dbm)
    }
}

/// Scientific notation with 17 significant digits.
pub fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}

struct Cell {
    kind: ArchitectureKind,
    n_idx: usize,
    scenario: Scenario,
}

/// Run the full sweep. Trials parallelize across the active rayon pool;
/// output is independent of the pool size.
pub fn run_sweep(scenario: &Scenario, spec: &SweepSpec) -> Result<SweepTable, ExperimentError> {
    spec.validate()?;
    let cap = *spec.n_values.iter().max().expect("nonempty");
    let cap_scenario = scenario.with_ports(cap);
    cap_scenario.validate()?;
    let tables = ChannelTables::new(&cap_scenario)?;

    // Cell grid in output order; per-N scenarios and fluid-RIS steering
    // tables are built once, outside the trial loop.
    let mut cells = Vec::new();
    for &kind in &spec.architectures {
        for (n_idx, &n) in spec.n_values.iter().enumerate() {
            for &p in &spec.p_dbm_values {
                cells.push(Cell {
                    kind,
                    n_idx,
                    scenario: scenario.with_ports(n).with_tx_dbm(p),
                });
            }
        }
    }
    let fris_grids: Vec<Option<FrisGrid>> = if spec.architectures.contains(&ArchitectureKind::Fris)
    {
        spec.n_values
            .iter()
            .map(|&n| FrisGrid::new(&scenario.with_ports(n)).map(Some))
            .collect::<Result<_, _>>()?
    } else {
        spec.n_values.iter().map(|_| None).collect()
    };

    let per_trial: Vec<Vec<f64>> = (0..spec.trials as u64)
        .into_par_iter()
        .map(|trial| -> Result<Vec<f64>, ExperimentError> {
            let stream = derive_stream(spec.master_seed, trial);
            let channels = TrialChannels::assemble(&stream, &cap_scenario, &tables);
            let mut values = Vec::with_capacity(cells.len());
            for cell in &cells {
                let result = match cell.kind {
                    ArchitectureKind::Fris => {
                        let grid = fris_grids[cell.n_idx].as_ref().expect("grid built");
                        evaluate_fris_with_grid(
                            grid,
                            &channels.fris_nlos_in,
                            &channels.fris_nlos_out,
                            channels.reflect.path_gain_bs_ris,
                            channels.reflect.path_gain_ris_ue,
                            &cell.scenario,
                        )?
                    }
                    kind => evaluate_trial(&channels, &cell.scenario, kind)?,
                };
                if !result.throughput_bps_hz.is_finite() {
                    return Err(ExperimentError::NonFiniteTrial {
                        trial,
                        architecture: cell.kind,
                        n: cell.scenario.bs_array.num_ports,
                        p_dbm: cell.scenario.budget.tx_dbm,
                    });
                }
                values.push(result.throughput_bps_hz);
            }
            Ok(values)
        })
        .collect::<Result<Vec<_>, _>>()?;

    let rows = cells
        .iter()
        .enumerate()
        .map(|(cell_idx, cell)| {
            let stats = SummaryStatistics::from_values(
                per_trial.iter().map(move |t| t[cell_idx]),
                spec.trials,
            );
            SweepRow {
                architecture: cell.kind,
                n: cell.scenario.bs_array.num_ports,
                p_dbm: cell.scenario.budget.tx_dbm,
                mean_bps_hz: stats.mean,
                ci95: stats.ci95,
                trials: stats.trials,
                seed: spec.master_seed,
            }
        })
        .collect();
    Ok(SweepTable { rows })
}

// ── calibration ────────────────────────────────────────────────────────────

#[derive(Debug, Clone, Copy)]
pub struct CalibrationOptions {
    pub target_bps_hz: f64,
    pub trials: usize,
    pub master_seed: u64,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct CalibrationResult {
    pub reference_gain_db: f64,
    pub achieved_bps_hz: f64,
    pub target_bps_hz: f64,
    pub iterations: usize,
    pub trials: usize,
    pub master_seed: u64,
}

/// Fit the reference gain G0 so the mean conventional throughput at the
/// scenario's transmit power hits the target.
///
/// The conventional SNR factorizes as `base_t * g0_lin^2` with `base_t`
/// depending only on the trial, so each trial is synthesized once (through
/// the same path a sweep uses, with the same streams) and the bisection
/// iterates on the scalar map
///
///   f(G0) = mean_t log2(1 + base_t 10^(G0/5)),
///
/// which is strictly increasing in G0. The bracket is +-60 dB around the
/// free-space reference 20 log10(lambda / 4 pi).
pub fn calibrate_reference_gain(
    scenario: &Scenario,
    opts: &CalibrationOptions,
) -> Result<CalibrationResult, ExperimentError> {
    if opts.trials == 0 {
        return Err(ExperimentError::InvalidSpec("zero calibration trials"));
    }
    if !(opts.target_bps_hz > 0.0 && opts.target_bps_hz.is_finite()) {
        return Err(ExperimentError::InvalidSpec("calibration target"));
    }
    let mut unit = scenario.clone();
    unit.budget.reference_gain_db = 0.0;
    unit.validate()?;
    let tables = ChannelTables::new(&unit)?;

    let bases: Vec<f64> = (0..opts.trials as u64)
        .into_par_iter()
        .map(|trial| -> Result<f64, ExperimentError> {
            let stream = derive_stream(opts.master_seed, trial);
            let mut rng = stream.sampler();
            let parts = assemble_reflect_parts(&mut rng, &unit, &tables);
            let conv = evaluate_conventional(&parts.realization, &unit)?;
            Ok(conv.snr_linear)
        })
        .collect::<Result<Vec<_>, _>>()?;

    let mean_at = |g0_db: f64| -> f64 {
        let g0_sq = 10f64.powf(g0_db / 5.0);
        neumaier_sum(bases.iter().map(|b| (1.0 + b * g0_sq).log2())) / opts.trials as f64
    };

    let lambda = scenario.budget.wavelength_m();
    let free_space_db = 20.0 * (lambda / (4.0 * std::f64::consts::PI)).log10();
    let (mut lo, mut hi) = (free_space_db - 60.0, free_space_db + 60.0);
    let (f_lo, f_hi) = (mean_at(lo), mean_at(hi));
    if !(f_lo <= opts.target_bps_hz && opts.target_bps_hz <= f_hi) {
        return Err(ExperimentError::CalibrationUnreachable {
            target: opts.target_bps_hz,
            lo_db: lo,
            hi_db: hi,
            f_lo,
            f_hi,
        });
    }

    let mut iterations = 0usize;
    let mut mid = 0.5 * (lo + hi);
    while hi - lo > 1e-10 && iterations < 200 {
        mid = 0.5 * (lo + hi);
        let f_mid = mean_at(mid);
        if (f_mid - opts.target_bps_hz).abs() <= 1e-9 {
            break;
        }
        if f_mid < opts.target_bps_hz {
            lo = mid;
        } else {
            hi = mid;
        }
        iterations += 1;
    }
    Ok(CalibrationResult {
        reference_gain_db: mid,
        achieved_bps_hz: mean_at(mid),
        target_bps_hz: opts.target_bps_hz,
        iterations,
        trials: opts.trials,
        master_seed: opts.master_seed,
    })
}

// ── oracles and empirical checks ───────────────────────────────────────────

/// Exhaustive dual-FAS search over the full N x N port product, with the
/// same per-pair co-phasing and the same lexicographic tie-breaking as the
/// reduced search. Guarded to small search spaces; this exists to audit the
/// reduced search, not to be fast.
pub fn brute_force_dual_oracle(
    r: &ChannelRealization,
    s: &Scenario,
) -> Result<ArchitectureResult, ExperimentError> {
    const LIMIT: usize = 4096;
    let n_bs = s.bs_array.num_ports;
    let n_ue = s.ue_array.num_ports;
    let size = n_bs * n_ue;
    if size > LIMIT {
        return Err(ExperimentError::SearchSpaceTooLarge { size, limit: LIMIT });
    }
    let m = r.h_bs_ris.rows();
    let mut best_sum = f64::NEG_INFINITY;
    let mut best_pair = (0usize, 0usize);
    for n in 0..n_bs {
        for u in 0..n_ue {
            let h2_row = r.h_ris_ue.row(u);
            let sum: f64 = (0..m)
                .map(|e| h2_row[e].norm() * r.h_bs_ris[(e, n)].norm())
                .sum();
            if sum > best_sum {
                best_sum = sum;
                best_pair = (n, u);
            }
        }
    }
    let gain = best_sum * best_sum;
    let snr = crate::architectures::snr_from_gain(
        s.budget.tx_dbm,
        gain,
        r.path_gain_bs_ris,
        r.path_gain_ris_ue,
        s.budget.noise_dbm,
    );
    Ok(ArchitectureResult {
        snr_linear: snr,
        throughput_bps_hz: (1.0 + snr).log2(),
        selected_bs_port: Some(best_pair.0),
        selected_ue_port: Some(best_pair.1),
        selected_spacing_wavelengths: None,
        selected_relay_rx_port: None,
        selected_relay_tx_port: None,
    })
}

/// Statistical health of the channel synthesis, measured on the scenario's
/// BS-side port array.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct EmpiricalReport {
    pub trials: usize,
    /// max_i | mean |h_i|^2 - 1 | over ports, full Rician vector.
    pub mean_power_max_deviation: f64,
    /// max_ij | empirical diffuse covariance - Jakes R | entrywise.
    pub correlation_max_deviation: f64,
    /// mean_i |E h_i|^2, which should approach K / (K+1).
    pub los_power_fraction: f64,
}

pub fn empirical_checks(
    scenario: &Scenario,
    trials: usize,
    master_seed: u64,
) -> Result<EmpiricalReport, ExperimentError> {
    if trials == 0 {
        return Err(ExperimentError::InvalidSpec("zero check trials"));
    }
    scenario.validate()?;
    let n = scenario.bs_array.num_ports;
    let lambda = scenario.budget.wavelength_m();
    let r = crate::channel::jakes_correlation(n, scenario.bs_array.spacing_wavelengths)?;
    let s = crate::numerics::hermitian_sqrt(&r, None)?;
    let los = crate::channel::array_response(
        &scenario.bs_array.element_offsets(lambda),
        scenario.geometry.bs_to_ris(),
        lambda,
    )?;
    let cl = scenario.rician.los_weight();
    let cn = scenario.rician.nlos_weight();

    let mut mean_acc = vec![Complex64::new(0.0, 0.0); n];
    let mut power_acc = vec![0.0f64; n];
    let mut cov_acc = vec![Complex64::new(0.0, 0.0); n * n];
    for trial in 0..trials as u64 {
        let stream = derive_stream(master_seed, trial);
        let mut rng = stream.sampler();
        let g = draw_complex_gaussian(&mut rng, n);
        let diffuse: Vec<Complex64> = (0..n)
            .map(|i| {
                let mut acc = Complex64::new(0.0, 0.0);
                for (j, &gj) in g.iter().enumerate() {
                    acc += s[(i, j)] * gj;
                }
                acc
            })
            .collect();
        for i in 0..n {
            let h = cl * los[i] + cn * diffuse[i];
            mean_acc[i] += h;
            power_acc[i] += h.norm_sqr();
            for j in 0..n {
                cov_acc[i * n + j] += diffuse[i] * diffuse[j].conj();
            }
        }
    }
    let t = trials as f64;
    let mean_power_max_deviation = power_acc
        .iter()
        .map(|p| (p / t - 1.0).abs())
        .fold(0.0, f64::max);
    let mut correlation_max_deviation = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            let emp = cov_acc[i * n + j] / t;
            correlation_max_deviation = correlation_max_deviation.max((emp - r[(i, j)]).norm());
        }
    }
    let los_power_fraction = mean_acc.iter().map(|m| (m / t).norm_sqr()).sum::<f64>() / n as f64;
    Ok(EmpiricalReport {
        trials,
        mean_power_max_deviation,
        correlation_max_deviation,
        los_power_fraction,
    })
}

// ── tests ──────────────────────────────────────────────────────────────────

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{ArrayConfig, Geometry, LinkBudget, RicianParams, RisConfig};

    fn scenario(num_ports: usize) -> Scenario {
        Scenario {
            geometry: Geometry {
                bs_position: [0.0, 0.0, 5.0],
                ris_position: [15.0, 15.0, 5.0],
                ue_position: [50.0, 0.0, 0.0],
            },
            budget: LinkBudget {
                carrier_hz: 28e9,
                pathloss_exponent: 2.2,
                reference_gain_db: -26.0,
                noise_dbm: -85.0,
                tx_dbm: 10.0,
            },
            bs_array: ArrayConfig {
                num_ports,
                spacing_wavelengths: 0.25,
                axis: [1.0, 0.0, 0.0],
            },
            ue_array: ArrayConfig {
                num_ports,
                spacing_wavelengths: 0.25,
                axis: [1.0, 0.0, 0.0],
            },
            ris: RisConfig {
                rows: 5,
                cols: 5,
                element_spacing_wavelengths: 0.5,
            },
            rician: RicianParams { k_factor: 1.0 },
        }
    }

    #[test]
    fn neumaier_handles_cancellation() {
        let s = neumaier_sum([1e16, 1.0, -1e16].into_iter());
        assert_eq!(s, 1.0);
    }

    #[test]
    fn sweep_row_order_and_shape() {
        let spec = SweepSpec {
            architectures: vec![ArchitectureKind::Conventional, ArchitectureKind::BsFas],
            n_values: vec![4, 8],
            p_dbm_values: vec![10.0, 20.0],
            trials: 10,
            master_seed: 1,
        };
        let table = run_sweep(&scenario(8), &spec).unwrap();
        assert_eq!(table.rows.len(), 8);
        let first = &table.rows[0];
        assert_eq!(first.architecture, ArchitectureKind::Conventional);
        assert_eq!((first.n, first.p_dbm), (4, 10.0));
        let last = &table.rows[7];
        assert_eq!(last.architecture, ArchitectureKind::BsFas);
        assert_eq!((last.n, last.p_dbm), (8, 20.0));
        assert!(table.rows.iter().all(|r| r.mean_bps_hz.is_finite()));
        assert!(table.rows.iter().all(|r| r.trials == 10 && r.seed == 1));
    }

    #[test]
    fn sweep_is_deterministic_across_runs() {
        let spec = SweepSpec {
            architectures: ArchitectureKind::ALL.to_vec(),
            n_values: vec![4, 6],
            p_dbm_values: vec![10.0],
            trials: 25,
            master_seed: 7,
        };
        let a = run_sweep(&scenario(6), &spec).unwrap().to_csv();
        let b = run_sweep(&scenario(6), &spec).unwrap().to_csv();
        assert_eq!(a, b);
    }

    #[test]
    fn conventional_identical_across_port_counts() {
        let spec = SweepSpec {
            architectures: vec![ArchitectureKind::Conventional],
            n_values: vec![4, 8, 12],
            p_dbm_values: vec![10.0],
            trials: 40,
            master_seed: 3,
        };
        let table = run_sweep(&scenario(12), &spec).unwrap();
        let m0 = table.rows[0].mean_bps_hz;
        assert!(table.rows.iter().all(|r| r.mean_bps_hz == m0));
    }

    #[test]
    fn run_trial_matches_sweep_cell_at_cap() {
        let sc = scenario(8);
        let spec = SweepSpec {
            architectures: vec![ArchitectureKind::DualFas],
            n_values: vec![8],
            p_dbm_values: vec![10.0],
            trials: 5,
            master_seed: 11,
        };
        let table = run_sweep(&sc, &spec).unwrap();
        let mean = (0..5)
            .map(|t| {
                run_trial(11, t, &sc, ArchitectureKind::DualFas)
                    .unwrap()
                    .throughput_bps_hz
            })
            .sum::<f64>()
            / 5.0;
        assert!((table.rows[0].mean_bps_hz - mean).abs() < 1e-12);
    }

    #[test]
    fn csv_shape_and_formatting() {
        let spec = SweepSpec {
            architectures: vec![ArchitectureKind::Conventional],
            n_values: vec![4],
            p_dbm_values: vec![10.0],
            trials: 3,
            master_seed: 2,
        };
        let csv = run_sweep(&scenario(4), &spec).unwrap().to_csv();
        let mut lines = csv.lines();
        assert_eq!(
            lines.next().unwrap(),
            "architecture,N,P_dbm,mean_bps_hz,ci95,trials,seed"
        );
        let row = lines.next().unwrap();
        assert!(row.starts_with("conventional,4,1.0000000000000000e1,"));
        assert!(csv.ends_with('\n') && !csv.contains('\r'));
    }

    #[test]
    fn calibration_reaches_target() {
        let opts = CalibrationOptions {
            target_bps_hz: 2.1,
            trials: 200,
            master_seed: 42,
        };
        let cal = calibrate_reference_gain(&scenario(16), &opts).unwrap();
        assert!(
            (cal.achieved_bps_hz - 2.1).abs() < 1e-6,
            "achieved {}",
            cal.achieved_bps_hz
        );
        assert!(cal.reference_gain_db.is_finite());
        // Idempotent: same inputs, same fit.
        let again = calibrate_reference_gain(&scenario(16), &opts).unwrap();
        assert_eq!(cal.reference_gain_db, again.reference_gain_db);
    }

    #[test]
    fn calibration_rejects_unreachable_targets() {
        let opts = CalibrationOptions {
            target_bps_hz: 1e9,
            trials: 20,
            master_seed: 1,
        };
        assert!(matches!(
            calibrate_reference_gain(&scenario(8), &opts),
            Err(ExperimentError::CalibrationUnreachable { .. })
        ));
    }

    #[test]
    fn oracle_guard_trips() {
        let sc = scenario(70);
        let r = crate::channel::assemble_realization(&derive_stream(1, 0), &sc).unwrap();
        assert!(matches!(
            brute_force_dual_oracle(&r, &sc),
            Err(ExperimentError::SearchSpaceTooLarge { .. })
        ));
    }

    #[test]
    fn nan_seed_free_small_sweep_has_tight_ci() {
        let spec = SweepSpec {
            architectures: vec![ArchitectureKind::Conventional],
            n_values: vec![4],
            p_dbm_values: vec![10.0],
            trials: 500,
            master_seed: 5,
        };
        let table = run_sweep(&scenario(4), &spec).unwrap();
        let row = &table.rows[0];
        assert!(row.ci95 > 0.0 && row.ci95 < 0.5);
    }
}
