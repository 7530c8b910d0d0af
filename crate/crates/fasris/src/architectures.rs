//! The six link architectures, each evaluated over one channel realization.
//!
//! All reflect-path architectures share the same physical layer: the RIS
//! applies ideal continuous co-phasing, so for a BS port n and UE port u the
//! cascaded power gain is
//!
//!   gain(u, n) = ( sum_m |h2[u, m]| |h1[m, n]| )^2
//!
//! and they differ only in which index sets they search:
//!
//! * `Conventional`: fixed antennas, port 0 on both sides.
//! * `BsFas`: selects the BS port, UE fixed at port 0.
//! * `UeFas`: selects the UE port, BS fixed at port 0.
//! * `DualFas`: selects both ports over a reduced candidate product.
//! * `Fris`: fixed antennas, but the RIS re-spaces its element grid.
//! * `FasEmbeddedRis`: the RIS hosts a small FAS and decodes-and-forwards,
//!   so the two hops are separate links and the weaker one limits rate.
//!
//! Evaluators accept realizations that are at least as large as the
//! scenario's port counts and read leading-index views, which is what lets a
//! sweep reuse one realization across every N (common random numbers).

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::channel::{array_response, ChannelError, ChannelRealization, RisConfig, Scenario};

#[derive(Debug, Error)]
pub enum ArchitectureError {
    #[error("co-phasing inputs must have equal nonzero length, got {left} and {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("{arch} needs at least {needed} FAS ports, scenario has {got}")]
    TooFewPorts {
        arch: &'static str,
        needed: usize,
        got: usize,
    },
    #[error("realization is smaller than the scenario: {what} has {got}, scenario needs {needed}")]
    RealizationTooSmall {
        what: &'static str,
        needed: usize,
        got: usize,
    },
    #[error(transparent)]
    Channel(#[from] ChannelError),
}

/// Architecture identifiers, in the fixed enumeration order used for sweep
/// rows and output tables.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ArchitectureKind {
    Conventional,
    BsFas,
    UeFas,
    DualFas,
    Fris,
    FasEmbeddedRis,
}

impl ArchitectureKind {
    pub const ALL: [ArchitectureKind; 6] = [
        ArchitectureKind::Conventional,
        ArchitectureKind::BsFas,
        ArchitectureKind::UeFas,
        ArchitectureKind::DualFas,
        ArchitectureKind::Fris,
        ArchitectureKind::FasEmbeddedRis,
    ];

    /// Stable identifier used in tables and config files.
    pub fn id(&self) -> &'static str {
        match self {
            ArchitectureKind::Conventional => "conventional",
            ArchitectureKind::BsFas => "bs_fas",
            ArchitectureKind::UeFas => "ue_fas",
            ArchitectureKind::DualFas => "dual_fas",
            ArchitectureKind::Fris => "fris",
            ArchitectureKind::FasEmbeddedRis => "fas_embedded_ris",
        }
    }
}

impl std::fmt::Display for ArchitectureKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.id())
    }
}

/// Outcome of one evaluation: the post-selection SNR, its throughput, and
/// whichever indices the architecture actually searched.
#[derive(Debug, Clone, PartialEq)]
pub struct ArchitectureResult {
    pub snr_linear: f64,
    pub throughput_bps_hz: f64,
    pub selected_bs_port: Option<usize>,
    pub selected_ue_port: Option<usize>,
    pub selected_spacing_wavelengths: Option<f64>,
    pub selected_relay_rx_port: Option<usize>,
    pub selected_relay_tx_port: Option<usize>,
}

impl ArchitectureResult {
    fn from_snr(snr_linear: f64) -> Self {
        Self {
            snr_linear,
            throughput_bps_hz: (1.0 + snr_linear).log2(),
            selected_bs_port: None,
            selected_ue_port: None,
            selected_spacing_wavelengths: None,
            selected_relay_rx_port: None,
            selected_relay_tx_port: None,
        }
    }
}

// ── shared physical layer ──────────────────────────────────────────────────

/// Cascaded power gain under ideal RIS co-phasing,
/// `(sum_m |h_in[m]| |h_out[m]|)^2`.
pub fn co_phase_gain(h_in: &[Complex64], h_out: &[Complex64]) -> Result<f64, ArchitectureError> {
    if h_in.is_empty() || h_in.len() != h_out.len() {
        return Err(ArchitectureError::LengthMismatch {
            left: h_in.len(),
            right: h_out.len(),
        });
    }
    let s: f64 = h_in
        .iter()
        .zip(h_out)
        .map(|(a, b)| a.norm() * b.norm())
        .sum();
    Ok(s * s)
}

/// Post-combining SNR of the reflect path: transmit power times the squared
/// hop path gains times the cascade gain, over the noise power. Inputs in
/// dBm, output linear.
pub fn snr_from_gain(
    tx_dbm: f64,
    cascade_power_gain: f64,
    path_gain_in: f64,
    path_gain_out: f64,
    noise_dbm: f64,
) -> f64 {
    let tx_mw = 10f64.powf(tx_dbm / 10.0);
    let noise_mw = 10f64.powf(noise_dbm / 10.0);
    let pg = path_gain_in * path_gain_in * path_gain_out * path_gain_out;
    tx_mw * pg * cascade_power_gain / noise_mw
}

/// Amplitude-sum matrix column: `sum_m |h2[u, m]| |h1[m, n]|` for one (u, n)
/// pair, reading leading views of a possibly larger realization.
fn pair_sum(r: &ChannelRealization, u: usize, n: usize) -> f64 {
    let m = r.h_bs_ris.rows();
    let h2_row = r.h_ris_ue.row(u);
    (0..m)
        .map(|e| h2_row[e].norm() * r.h_bs_ris[(e, n)].norm())
        .sum()
}

fn reflect_result(r: &ChannelRealization, s: &Scenario, amplitude_sum: f64) -> ArchitectureResult {
    let gain = amplitude_sum * amplitude_sum;
    ArchitectureResult::from_snr(snr_from_gain(
        s.budget.tx_dbm,
        gain,
        r.path_gain_bs_ris,
        r.path_gain_ris_ue,
        s.budget.noise_dbm,
    ))
}

fn check_views(r: &ChannelRealization, s: &Scenario) -> Result<(), ArchitectureError> {
    if r.h_bs_ris.cols() < s.bs_array.num_ports {
        return Err(ArchitectureError::RealizationTooSmall {
            what: "BS-side ports",
            needed: s.bs_array.num_ports,
            got: r.h_bs_ris.cols(),
        });
    }
    if r.h_ris_ue.rows() < s.ue_array.num_ports {
        return Err(ArchitectureError::RealizationTooSmall {
            what: "UE-side ports",
            needed: s.ue_array.num_ports,
            got: r.h_ris_ue.rows(),
        });
    }
    if r.h_bs_ris.rows() != r.h_ris_ue.cols() {
        return Err(ArchitectureError::RealizationTooSmall {
            what: "RIS elements",
            needed: r.h_bs_ris.rows(),
            got: r.h_ris_ue.cols(),
        });
    }
    Ok(())
}

/// Strict-greater argmax, so ties resolve to the lowest index.
fn argmax(values: impl Iterator<Item = f64>) -> Option<(usize, f64)> {
    let mut best: Option<(usize, f64)> = None;
    for (i, v) in values.enumerate() {
        match best {
            Some((_, b)) if v <= b => {}
            _ => best = Some((i, v)),
        }
    }
    best
}

// ── evaluators ─────────────────────────────────────────────────────────────

/// Fixed antennas on both sides: port 0 against port 0.
pub fn evaluate_conventional(
    r: &ChannelRealization,
    s: &Scenario,
) -> Result<ArchitectureResult, ArchitectureError> {
    check_views(r, s)?;
    Ok(reflect_result(r, s, pair_sum(r, 0, 0)))
}

/// FAS at the BS: best of N BS ports, UE fixed at port 0.
pub fn evaluate_bs_fas(
    r: &ChannelRealization,
    s: &Scenario,
) -> Result<ArchitectureResult, ArchitectureError> {
    check_views(r, s)?;
    let n_ports = s.bs_array.num_ports;
    let (best, sum) = argmax((0..n_ports).map(|n| pair_sum(r, 0, n))).expect("ports >= 1");
    let mut out = reflect_result(r, s, sum);
    out.selected_bs_port = Some(best);
    Ok(out)
}

/// FAS at the UE: best of N UE ports, BS fixed at port 0.
pub fn evaluate_ue_fas(
    r: &ChannelRealization,
    s: &Scenario,
) -> Result<ArchitectureResult, ArchitectureError> {
    check_views(r, s)?;
    let n_ports = s.ue_array.num_ports;
    let (best, sum) = argmax((0..n_ports).map(|u| pair_sum(r, u, 0))).expect("ports >= 1");
    let mut out = reflect_result(r, s, sum);
    out.selected_ue_port = Some(best);
    Ok(out)
}

/// Candidate ports for one side of the dual search: the top-ceil(sqrt(N))
/// ports of the single-sided ranking, the single-sided winner, and port 0.
/// Keeping port 0 in both sets makes the dominance chain
/// `dual >= bs_fas, ue_fas >= conventional` hold per trial by construction.
fn dual_candidates(sums: &[f64]) -> Vec<usize> {
    let n = sums.len();
    let k = ceil_sqrt(n);
    let mut order: Vec<usize> = (0..n).collect();
    // Descending by sum, ascending index on ties: deterministic ranking.
    order.sort_by(|&a, &b| {
        sums[b]
            .partial_cmp(&sums[a])
            .expect("finite sums")
            .then(a.cmp(&b))
    });
    let mut cands: Vec<usize> = order[..k.min(n)].to_vec();
    cands.push(order[0]);
    cands.push(0);
    cands.sort_unstable();
    cands.dedup();
    cands
}

fn ceil_sqrt(n: usize) -> usize {
    let mut k = (n as f64).sqrt() as usize;
    while k * k < n {
        k += 1;
    }
    while k > 1 && (k - 1) * (k - 1) >= n {
        k -= 1;
    }
    k
}

/// FAS at both ends, reduced search: candidate sets are ranked against the
/// opposite side's port 0, then the candidate product is searched
/// exhaustively with per-pair co-phasing. Ties resolve to the lowest
/// (BS port, UE port) pair in lexicographic order.
pub fn evaluate_dual_fas(
    r: &ChannelRealization,
    s: &Scenario,
) -> Result<ArchitectureResult, ArchitectureError> {
    check_views(r, s)?;
    let n_bs = s.bs_array.num_ports;
    let n_ue = s.ue_array.num_ports;

    let bs_sums: Vec<f64> = (0..n_bs).map(|n| pair_sum(r, 0, n)).collect();
    let ue_sums: Vec<f64> = (0..n_ue).map(|u| pair_sum(r, u, 0)).collect();
    let bs_cands = dual_candidates(&bs_sums);
    let ue_cands = dual_candidates(&ue_sums);

    let mut best_sum = f64::NEG_INFINITY;
    let mut best_pair = (0usize, 0usize);
    for &n in &bs_cands {
        for &u in &ue_cands {
            let sum = pair_sum(r, u, n);
            if sum > best_sum {
                best_sum = sum;
                best_pair = (n, u);
            }
        }
    }
    let mut out = reflect_result(r, s, best_sum);
    out.selected_bs_port = Some(best_pair.0);
    out.selected_ue_port = Some(best_pair.1);
    Ok(out)
}

/// Precomputed RIS steering vectors for every candidate element spacing of a
/// fluid RIS. Depends only on the scenario, so sweeps build it once per cell
/// and share it across trials.
#[derive(Debug, Clone)]
pub struct FrisGrid {
    pub spacings: Vec<f64>,
    steering_in: Vec<Vec<Complex64>>,
    steering_out: Vec<Vec<Complex64>>,
}

impl FrisGrid {
    pub fn new(scenario: &Scenario) -> Result<Self, ArchitectureError> {
        let spacings = scenario.fris_spacing_candidates();
        if spacings.is_empty() {
            return Err(ArchitectureError::TooFewPorts {
                arch: "fris",
                needed: 3,
                got: scenario.bs_array.num_ports,
            });
        }
        let lambda = scenario.budget.wavelength_m();
        let mut steering_in = Vec::with_capacity(spacings.len());
        let mut steering_out = Vec::with_capacity(spacings.len());
        for &sp in &spacings {
            let grid = RisConfig {
                rows: scenario.ris.rows,
                cols: scenario.ris.cols,
                element_spacing_wavelengths: sp,
            };
            let offsets = grid.element_offsets(lambda);
            steering_in.push(array_response(
                &offsets,
                scenario.geometry.ris_to_bs(),
                lambda,
            )?);
            steering_out.push(array_response(
                &offsets,
                scenario.geometry.ris_to_ue(),
                lambda,
            )?);
        }
        Ok(Self {
            spacings,
            steering_in,
            steering_out,
        })
    }
}

/// Fluid RIS with fixed single-port terminals: sweeps the element spacing
/// over the candidate grid, rebuilding the LoS structure per spacing while
/// reusing the trial's diffuse draws (common random numbers). Ties resolve
/// to the smallest spacing.
pub fn evaluate_fris_with_grid(
    grid: &FrisGrid,
    nlos_in: &[Complex64],
    nlos_out: &[Complex64],
    path_gain_in: f64,
    path_gain_out: f64,
    s: &Scenario,
) -> Result<ArchitectureResult, ArchitectureError> {
    let m = s.ris.num_elements();
    if nlos_in.len() != m || nlos_out.len() != m {
        return Err(ArchitectureError::LengthMismatch {
            left: nlos_in.len(),
            right: nlos_out.len(),
        });
    }
    let cl = s.rician.los_weight();
    let cn = s.rician.nlos_weight();
    let mut best_sum = f64::NEG_INFINITY;
    let mut best_idx = 0usize;
    for (i, (a_in, a_out)) in grid.steering_in.iter().zip(&grid.steering_out).enumerate() {
        let mut sum = 0.0f64;
        for e in 0..m {
            let hin = cl * a_in[e] + cn * nlos_in[e];
            let hout = cl * a_out[e] + cn * nlos_out[e];
            sum += hin.norm() * hout.norm();
        }
        if sum > best_sum {
            best_sum = sum;
            best_idx = i;
        }
    }
    let gain = best_sum * best_sum;
    let mut out = ArchitectureResult::from_snr(snr_from_gain(
        s.budget.tx_dbm,
        gain,
        path_gain_in,
        path_gain_out,
        s.budget.noise_dbm,
    ));
    out.selected_spacing_wavelengths = Some(grid.spacings[best_idx]);
    Ok(out)
}

/// FAS-embedded RIS operating as a decode-and-forward relay. Each hop picks
/// its best relay port by power; the relay retransmits at the BS power, and
/// the end-to-end rate is limited by the weaker hop:
///
///   SNR_i = P |h_i|^2 pg_i^2 / N0,   throughput = log2(1 + min(SNR1, SNR2)).
pub fn evaluate_fas_embedded_ris(
    hop_rx: &[Complex64],
    hop_tx: &[Complex64],
    s: &Scenario,
) -> Result<ArchitectureResult, ArchitectureError> {
    let ports = s.relay_port_count();
    if ports == 0 {
        return Err(ArchitectureError::TooFewPorts {
            arch: "fas_embedded_ris",
            needed: 4,
            got: s.bs_array.num_ports,
        });
    }
    if hop_rx.len() < ports || hop_tx.len() < ports {
        return Err(ArchitectureError::RealizationTooSmall {
            what: "relay ports",
            needed: ports,
            got: hop_rx.len().min(hop_tx.len()),
        });
    }
    let tx_mw = s.budget.tx_mw();
    let noise_mw = s.budget.noise_mw();
    let pg1 = crate::channel::path_gain(s.geometry.bs_ris_distance(), &s.budget)?;
    let pg2 = crate::channel::path_gain(s.geometry.ris_ue_distance(), &s.budget)?;

    let (rx_port, rx_pow) =
        argmax(hop_rx[..ports].iter().map(|h| h.norm_sqr())).expect("ports >= 1");
    let (tx_port, tx_pow) =
        argmax(hop_tx[..ports].iter().map(|h| h.norm_sqr())).expect("ports >= 1");
    let snr1 = tx_mw * pg1 * pg1 * rx_pow / noise_mw;
    let snr2 = tx_mw * pg2 * pg2 * tx_pow / noise_mw;

    let mut out = ArchitectureResult::from_snr(snr1.min(snr2));
    out.selected_relay_rx_port = Some(rx_port);
    out.selected_relay_tx_port = Some(tx_port);
    Ok(out)
}

// ── tests ──────────────────────────────────────────────────────────────────
