//! Acceptance gate: one test per release criterion, each printing a single
//! `CRITERION k: PASS/FAIL` line plus the measurements behind it. The
//! criteria pin the calibration target, the two standard sweeps against
//! their published reference readings, the per-trial invariants, oracle
//! equivalence of the reduced searches, numerical accuracy, and byte-level
//! reproducibility. Tolerances are stated inline and are not negotiable
//! downward by the implementation.

use std::process::Command;
use std::time::Instant;

use fasris::architectures::{
    evaluate_bs_fas, evaluate_dual_fas, evaluate_ue_fas, snr_from_gain, ArchitectureKind,
};
use fasris::channel::{jakes_correlation, ChannelRealization, ChannelTables, Scenario};
use fasris::experiment::{
    brute_force_dual_oracle, calibrate_reference_gain, empirical_checks, evaluate_trial, run_sweep,
    CalibrationOptions, SweepSpec, SweepTable, TrialChannels,
};
use fasris::numerics::{bessel_j0, derive_stream, hermitian_sqrt, ComplexMatrix};
use fasris::reference;
use fasris::validate::series_j0_oracle;
use num_complex::Complex64;
use rand::Rng;

// ── shared helpers ──────────────────────────────────────────────────────────

const ORDERED_KINDS: [ArchitectureKind; 6] = ArchitectureKind::ALL;

fn kind_label(kind: ArchitectureKind) -> &'static str {
    kind.id()
}

/// Calibrate exactly the way the `calibrate` command does: reference
/// scenario at the default port count, 10 dBm anchor, 5000 trials, seed 42.
fn calibrated_gain_db() -> f64 {
    let mut anchor = reference::default_scenario(reference::DEFAULT_PORT_COUNT);
    anchor.budget.reference_gain_db = reference::NOMINAL_REFERENCE_GAIN_DB;
    anchor.budget.tx_dbm = reference::FIGURE2_P_DBM;
    let cal = calibrate_reference_gain(
        &anchor,
        &CalibrationOptions {
            target_bps_hz: reference::CALIBRATION_TARGET_BPS_HZ,
            trials: reference::DEFAULT_TRIALS,
            master_seed: reference::DEFAULT_MASTER_SEED,
        },
    )
    .expect("calibration converges");
    cal.reference_gain_db
}

fn scenario_with_gain(num_ports: usize, gain_db: f64) -> Scenario {
    let mut s = reference::default_scenario(num_ports);
    s.budget.reference_gain_db = gain_db;
    s
}

fn mean_of(table: &SweepTable, kind: ArchitectureKind, n: usize, p: f64) -> f64 {
    table
        .find(kind, n, p)
        .unwrap_or_else(|| panic!("missing cell {kind} N={n} P={p}"))
        .mean_bps_hz
}

fn verdict(criterion: u32, failures: &[String]) {
    if failures.is_empty() {
        println!("CRITERION {criterion}: PASS");
    } else {
        println!("CRITERION {criterion}: FAIL");
        for f in failures {
            println!("  - {f}");
        }
    }
    assert!(
        failures.is_empty(),
        "criterion {criterion} failed:\n{}",
        failures.join("\n")
    );
}

// ── criterion 1: calibration ────────────────────────────────────────────────

/// The `calibrate` command fits the reference gain so mean conventional
/// throughput at 10 dBm hits 2.1 +/- 0.05 bps/Hz, in under a minute at
/// 5000 trials.
#[test]
fn criterion_1_calibration_hits_target_within_a_minute() {
    let dir = tempfile::TempDir::new().unwrap();
    let started = Instant::now();
    let out = Command::new(env!("CARGO_BIN_EXE_fasris"))
        .args([
            "calibrate",
            "--trials",
            "5000",
            "--seed",
            "42",
            "--out",
            "cal.json",
        ])
        .current_dir(dir.path())
        .output()
        .expect("binary spawns");
    let elapsed = started.elapsed();

    let mut failures = Vec::new();
    if out.status.code() != Some(0) {
        failures.push(format!(
            "calibrate exited with {:?}: {}",
            out.status.code(),
            String::from_utf8_lossy(&out.stderr)
        ));
        verdict(1, &failures);
        return;
    }
    let cal: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("cal.json")).unwrap())
            .unwrap();
    let achieved = cal["achieved_bps_hz"].as_f64().unwrap();
    let gain = cal["reference_gain_db"].as_f64().unwrap();
    let target = reference::CALIBRATION_TARGET_BPS_HZ;
    let tol = reference::CALIBRATION_TOLERANCE_BPS_HZ;
    println!(
        "calibration: G0 = {gain:.6} dB, mean conventional throughput {achieved:.6} bps/Hz \
         (target {target} +/- {tol}), wall time {:.2} s at 5000 trials",
        elapsed.as_secs_f64()
    );
    if (achieved - target).abs() > tol {
        failures.push(format!(
            "achieved {achieved:.6} bps/Hz is outside {target} +/- {tol}"
        ));
    }
    if elapsed.as_secs_f64() >= 60.0 {
        failures.push(format!(
            "took {:.1} s, budget is 60 s",
            elapsed.as_secs_f64()
        ));
    }
    verdict(1, &failures);
}

// ── criterion 2: port-count sweep at N = 100 ────────────────────────────────

/// At N = 100, P = 10 dBm after calibration: every mean within +/- 0.7
/// bps/Hz of its published reading, CI halfwidths under 0.05 bps/Hz, and
/// the exact ordering dual > bs > max(ue, relay) >= min(ue, relay) >
/// fluid-RIS > conventional.
#[test]
fn criterion_2_port_sweep_matches_published_readings_and_ordering() {
    let gain = calibrated_gain_db();
    let scenario = scenario_with_gain(100, gain);
    let table = run_sweep(
        &scenario,
        &SweepSpec {
            architectures: ORDERED_KINDS.to_vec(),
            n_values: vec![100],
            p_dbm_values: vec![reference::FIGURE2_P_DBM],
            trials: reference::DEFAULT_TRIALS,
            master_seed: reference::DEFAULT_MASTER_SEED,
        },
    )
    .unwrap();

    let mut failures = Vec::new();
    println!("port-count sweep at N = 100, P = 10 dBm (calibrated G0 = {gain:.4} dB):");
    for (kind, reference_value) in reference::FIGURE2_N100_REFERENCE {
        let row = table.find(kind, 100, reference::FIGURE2_P_DBM).unwrap();
        println!(
            "  {:<16} mean {:>8.4} bps/Hz (reference {:>4.1}, gap {:>+8.4}), ci95 {:.4}",
            kind_label(kind),
            row.mean_bps_hz,
            reference_value,
            row.mean_bps_hz - reference_value,
            row.ci95
        );
        if row.ci95 >= 0.05 {
            failures.push(format!(
                "{kind} ci95 {:.4} bps/Hz exceeds 0.05 at 5000 trials",
                row.ci95
            ));
        }
        if (row.mean_bps_hz - reference_value).abs() > 0.7 {
            failures.push(format!(
                "{kind} mean {:.4} bps/Hz is outside {reference_value} +/- 0.7",
                row.mean_bps_hz
            ));
        }
    }

    let m = |k| mean_of(&table, k, 100, reference::FIGURE2_P_DBM);
    let dual = m(ArchitectureKind::DualFas);
    let bs = m(ArchitectureKind::BsFas);
    let ue = m(ArchitectureKind::UeFas);
    let relay = m(ArchitectureKind::FasEmbeddedRis);
    let fris = m(ArchitectureKind::Fris);
    let conv = m(ArchitectureKind::Conventional);
    let ordering = [
        (dual > bs, format!("dual {dual:.4} > bs {bs:.4}")),
        (
            bs > ue.max(relay),
            format!("bs {bs:.4} > max(ue, relay) {:.4}", ue.max(relay)),
        ),
        (
            ue.min(relay) > fris,
            format!("min(ue, relay) {:.4} > fris {fris:.4}", ue.min(relay)),
        ),
        (
            fris > conv,
            format!("fris {fris:.4} > conventional {conv:.4}"),
        ),
    ];
    for (holds, description) in ordering {
        if !holds {
            failures.push(format!("ordering violated: expected {description}"));
        }
    }
    verdict(2, &failures);
}

// ── criterion 3: power sweep at N = 50 ──────────────────────────────────────

/// Across P in {8, 12, 16, 20} dBm at N = 50: every architecture's mean
/// strictly increases, the dual-FAS link stays highest at every power, and
/// its 20 dBm mean lands within +/- 1.0 bps/Hz of the published 7.1. The
/// conventional 20 dBm gap against its published 4.4 is reported, not
/// asserted: the two standard sweeps are known not to share a consistent
/// baseline, and hiding that would be worse than printing it.
#[test]
fn criterion_3_power_sweep_trends_and_dual_fas_level() {
    let gain = calibrated_gain_db();
    let scenario = scenario_with_gain(reference::FIGURE3_N, gain);
    let powers = reference::FIGURE3_P_DBM_VALUES;
    let table = run_sweep(
        &scenario,
        &SweepSpec {
            architectures: ORDERED_KINDS.to_vec(),
            n_values: vec![reference::FIGURE3_N],
            p_dbm_values: powers.to_vec(),
            trials: reference::DEFAULT_TRIALS,
            master_seed: reference::DEFAULT_MASTER_SEED,
        },
    )
    .unwrap();

    let mut failures = Vec::new();
    println!("power sweep at N = 50 (calibrated G0 = {gain:.4} dB):");
    for kind in ORDERED_KINDS {
        let means: Vec<f64> = powers
            .iter()
            .map(|&p| mean_of(&table, kind, reference::FIGURE3_N, p))
            .collect();
        println!(
            "  {:<16} {:>8.4} {:>8.4} {:>8.4} {:>8.4} bps/Hz across 8/12/16/20 dBm",
            kind_label(kind),
            means[0],
            means[1],
            means[2],
            means[3]
        );
        for w in means.windows(2) {
            if w[1] <= w[0] {
                failures.push(format!(
                    "{kind} mean did not strictly increase with power: {:.6} -> {:.6}",
                    w[0], w[1]
                ));
            }
        }
    }

    for &p in &powers {
        let dual = mean_of(&table, ArchitectureKind::DualFas, reference::FIGURE3_N, p);
        for kind in ORDERED_KINDS {
            if kind == ArchitectureKind::DualFas {
                continue;
            }
            let other = mean_of(&table, kind, reference::FIGURE3_N, p);
            if dual <= other {
                failures.push(format!(
                    "dual-FAS is not highest at {p} dBm: {dual:.4} vs {kind} {other:.4}"
                ));
            }
        }
    }

    let dual_20 = mean_of(
        &table,
        ArchitectureKind::DualFas,
        reference::FIGURE3_N,
        reference::FIGURE3_BASELINE_P_DBM,
    );
    let conv_20 = mean_of(
        &table,
        ArchitectureKind::Conventional,
        reference::FIGURE3_N,
        reference::FIGURE3_BASELINE_P_DBM,
    );
    println!(
        "  dual-FAS at 20 dBm: {dual_20:.4} bps/Hz (reference {}, gap {:+.4})",
        reference::FIGURE3_DUAL_FAS_20DBM,
        dual_20 - reference::FIGURE3_DUAL_FAS_20DBM
    );
    println!(
        "  baseline discrepancy report: conventional at 20 dBm is {conv_20:.4} bps/Hz vs \
         published {}, gap {:+.4} bps/Hz (calibration anchors the 10 dBm point of the \
         port-count sweep, which the power sweep's published baseline does not share)",
        reference::FIGURE3_CONVENTIONAL_20DBM,
        conv_20 - reference::FIGURE3_CONVENTIONAL_20DBM
    );
    if (dual_20 - reference::FIGURE3_DUAL_FAS_20DBM).abs() > 1.0 {
        failures.push(format!(
            "dual-FAS at 20 dBm {dual_20:.4} bps/Hz is outside {} +/- 1.0",
            reference::FIGURE3_DUAL_FAS_20DBM
        ));
    }
    verdict(3, &failures);
}

// ── criterion 4: per-trial invariants ───────────────────────────────────────

/// Over 5000 trials at N = 20 with common random numbers: the dominance
/// chain holds on every trial, conventional throughput is identical across
/// every port-count cell, and growing the port set from 10 to 20 never
/// lowers any trial's throughput. Zero violations allowed.
#[test]
fn criterion_4_per_trial_invariants_over_5000_trials() {
    let trials = reference::DEFAULT_TRIALS;
    let seed = reference::DEFAULT_MASTER_SEED;
    let full = scenario_with_gain(20, reference::NOMINAL_REFERENCE_GAIN_DB);
    let half = full.with_ports(10);
    let tables = ChannelTables::new(&full).unwrap();

    let mut dominance_violations = 0usize;
    let mut conventional_mismatches = 0usize;
    let mut prefix_violations = [0usize; 4]; // bs, ue, relay, dual
    for trial in 0..trials as u64 {
        let stream = derive_stream(seed, trial);
        let ch = TrialChannels::assemble(&stream, &full, &tables);
        let snr = |s: &Scenario, kind| evaluate_trial(&ch, s, kind).unwrap().snr_linear;

        let conv = snr(&full, ArchitectureKind::Conventional);
        let bs = snr(&full, ArchitectureKind::BsFas);
        let ue = snr(&full, ArchitectureKind::UeFas);
        let dual = snr(&full, ArchitectureKind::DualFas);
        if !(dual >= bs && dual >= ue && bs >= conv && ue >= conv) {
            dominance_violations += 1;
        }

        if snr(&half, ArchitectureKind::Conventional).to_bits() != conv.to_bits() {
            conventional_mismatches += 1;
        }
        for (slot, kind) in [
            ArchitectureKind::BsFas,
            ArchitectureKind::UeFas,
            ArchitectureKind::FasEmbeddedRis,
            ArchitectureKind::DualFas,
        ]
        .into_iter()
        .enumerate()
        {
            if snr(&half, kind) > snr(&full, kind) {
                prefix_violations[slot] += 1;
            }
        }
    }

    // Conventional must also be identical across the full port-count grid,
    // not just between the two views checked above.
    let conv_table = run_sweep(
        &scenario_with_gain(100, reference::NOMINAL_REFERENCE_GAIN_DB),
        &SweepSpec {
            architectures: vec![ArchitectureKind::Conventional],
            n_values: reference::FIGURE2_N_VALUES.to_vec(),
            p_dbm_values: vec![reference::FIGURE2_P_DBM],
            trials,
            master_seed: seed,
        },
    )
    .unwrap();
    let first = conv_table.rows[0].mean_bps_hz;
    let distinct_cells = conv_table
        .rows
        .iter()
        .filter(|r| r.mean_bps_hz.to_bits() != first.to_bits())
        .count();

    println!("per-trial invariants over {trials} trials at N = 20 (views 10 -> 20):");
    println!("  dominance chain violations:            {dominance_violations}");
    println!("  conventional view mismatches:          {conventional_mismatches}");
    println!(
        "  conventional sweep cells off baseline: {distinct_cells} of {}",
        conv_table.rows.len()
    );
    let rate = |v: usize| 100.0 * v as f64 / trials as f64;
    for (slot, name) in ["bs_fas", "ue_fas", "fas_embedded_ris", "dual_fas"]
        .iter()
        .enumerate()
    {
        println!(
            "  prefix regressions {:<18} {:>4} ({:.2}%)",
            format!("{name}:"),
            prefix_violations[slot],
            rate(prefix_violations[slot])
        );
    }

    let mut failures = Vec::new();
    if dominance_violations > 0 {
        failures.push(format!("{dominance_violations} dominance violations"));
    }
    if conventional_mismatches > 0 {
        failures.push(format!(
            "{conventional_mismatches} conventional view mismatches"
        ));
    }
    if distinct_cells > 0 {
        failures.push(format!(
            "conventional mean differs across {distinct_cells} port-count cells"
        ));
    }
    for (slot, name) in ["bs_fas", "ue_fas", "fas_embedded_ris", "dual_fas"]
        .iter()
        .enumerate()
    {
        if prefix_violations[slot] > 0 {
            failures.push(format!(
                "{name} throughput regressed on {} of {trials} trials ({:.2}%) when the \
                 port set grew from 10 to 20",
                prefix_violations[slot],
                rate(prefix_violations[slot])
            ));
        }
    }
    verdict(4, &failures);
}

// ── criterion 5: oracle equivalence of the reduced searches ─────────────────

/// At N = 4 over 1000 trials: the single-sided searches match exhaustive
/// search exactly; the reduced dual search never beats the full N x N
/// oracle and matches it on at least 95% of trials (rate reported).
#[test]
fn criterion_5_reduced_searches_match_exhaustive_oracles() {
    let trials = 1000usize;
    let scenario = scenario_with_gain(4, reference::NOMINAL_REFERENCE_GAIN_DB);
    let tables = ChannelTables::new(&scenario).unwrap();

    // Mirrors the evaluators' scan: amplitudes paired element by element in
    // index order, so agreement is bitwise, not approximate.
    let exhaustive_sum = |r: &ChannelRealization, u: usize, n: usize| -> f64 {
        let row = r.h_ris_ue.row(u);
        (0..r.h_bs_ris.rows())
            .map(|m| row[m].norm() * r.h_bs_ris[(m, n)].norm())
            .sum()
    };
    let snr_of = |r: &ChannelRealization, s: &Scenario, sum: f64| {
        snr_from_gain(
            s.budget.tx_dbm,
            sum * sum,
            r.path_gain_bs_ris,
            r.path_gain_ris_ue,
            s.budget.noise_dbm,
        )
    };

    let mut bs_mismatches = 0usize;
    let mut ue_mismatches = 0usize;
    let mut dual_regressions = 0usize;
    let mut dual_matches = 0usize;
    for trial in 0..trials as u64 {
        let stream = derive_stream(reference::DEFAULT_MASTER_SEED, trial);
        let ch = TrialChannels::assemble(&stream, &scenario, &tables);
        let r = &ch.reflect;

        let best_bs = (0..4)
            .map(|n| exhaustive_sum(r, 0, n))
            .fold(f64::NEG_INFINITY, f64::max);
        let got_bs = evaluate_bs_fas(r, &scenario).unwrap().snr_linear;
        if got_bs.to_bits() != snr_of(r, &scenario, best_bs).to_bits() {
            bs_mismatches += 1;
        }

        let best_ue = (0..4)
            .map(|u| exhaustive_sum(r, u, 0))
            .fold(f64::NEG_INFINITY, f64::max);
        let got_ue = evaluate_ue_fas(r, &scenario).unwrap().snr_linear;
        if got_ue.to_bits() != snr_of(r, &scenario, best_ue).to_bits() {
            ue_mismatches += 1;
        }

        let reduced = evaluate_dual_fas(r, &scenario).unwrap().snr_linear;
        let oracle = brute_force_dual_oracle(r, &scenario).unwrap().snr_linear;
        if reduced > oracle {
            dual_regressions += 1;
        }
        if reduced.to_bits() == oracle.to_bits() {
            dual_matches += 1;
        }
    }

    let match_rate = dual_matches as f64 / trials as f64;
    println!("oracle equivalence at N = 4 over {trials} trials:");
    println!("  bs_fas exhaustive mismatches:  {bs_mismatches}");
    println!("  ue_fas exhaustive mismatches:  {ue_mismatches}");
    println!("  reduced dual above the oracle: {dual_regressions}");
    println!(
        "  reduced dual match rate:       {:.1}% ({} of {trials}, floor 95%)",
        100.0 * match_rate,
        dual_matches
    );

    let mut failures = Vec::new();
    if bs_mismatches > 0 {
        failures.push(format!(
            "bs_fas missed the exhaustive optimum {bs_mismatches} times"
        ));
    }
    if ue_mismatches > 0 {
        failures.push(format!(
            "ue_fas missed the exhaustive optimum {ue_mismatches} times"
        ));
    }
    if dual_regressions > 0 {
        failures.push(format!(
            "reduced dual search exceeded the full oracle {dual_regressions} times"
        ));
    }
    if match_rate < 0.95 {
        failures.push(format!(
            "reduced dual search matched the oracle on {:.1}% of trials, floor is 95%",
            100.0 * match_rate
        ));
    }
    verdict(5, &failures);
}

// ── criterion 6: numerics ───────────────────────────────────────────────────

/// Kernel accuracy: J0 within 1e-10 of the exact series on [0, 20], the
/// Hermitian square root reconstructs within 1e-10, empirical port
/// correlation within 0.02 of theory at 1e5 draws, and the K = 1 LoS power
/// fraction inside [0.48, 0.52].
#[test]
fn criterion_6_numerical_kernels_hold_their_tolerances() {
    let mut failures = Vec::new();

    let mut worst_j0 = 0.0f64;
    let mut x = 0.0;
    while x <= 20.0 + 1e-9 {
        worst_j0 = worst_j0.max((bessel_j0(x).unwrap() - series_j0_oracle(x)).abs());
        x += 0.05;
    }
    if worst_j0 > 1e-10 {
        failures.push(format!(
            "J0 deviates from the series oracle by {worst_j0:.3e}"
        ));
    }

    let mut worst_sqrt = 0.0f64;
    for n in [20usize, 100] {
        let a = jakes_correlation(n, 0.25).unwrap();
        let s = hermitian_sqrt(&a, None).unwrap();
        worst_sqrt = worst_sqrt.max(s.mul(&s).unwrap().max_abs_diff(&a));
    }
    let mut rng = derive_stream(606, 0).sampler();
    let b = ComplexMatrix::from_fn(32, 32, |_, _| {
        Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
    });
    let a = b.mul(&b.hermitian_transpose()).unwrap();
    let s = hermitian_sqrt(&a, None).unwrap();
    worst_sqrt = worst_sqrt.max(s.mul(&s).unwrap().max_abs_diff(&a) / a.max_abs_entry());
    if worst_sqrt > 1e-10 {
        failures.push(format!(
            "Hermitian sqrt reconstruction error {worst_sqrt:.3e} exceeds 1e-10"
        ));
    }

    let report = empirical_checks(&reference::default_scenario(20), 100_000, 2024).unwrap();
    if report.correlation_max_deviation > 0.02 {
        failures.push(format!(
            "port correlation off theory by {:.4} at 1e5 draws",
            report.correlation_max_deviation
        ));
    }
    if !(0.48..=0.52).contains(&report.los_power_fraction) {
        failures.push(format!(
            "LoS power fraction {:.4} outside [0.48, 0.52]",
            report.los_power_fraction
        ));
    }

    println!("numerics: worst J0 error {worst_j0:.3e}, worst sqrt reconstruction {worst_sqrt:.3e}");
    println!(
        "  empirical correlation deviation {:.4}, mean-power deviation {:.4}, \
         LoS power fraction {:.4} over {} draws",
        report.correlation_max_deviation,
        report.mean_power_max_deviation,
        report.los_power_fraction,
        report.trials
    );
    verdict(6, &failures);
}

// ── criterion 7: reproducibility ────────────────────────────────────────────

/// The standard port-count sweep at seed 42 produces byte-identical CSV
/// with 1 worker and with 8.
#[test]
fn criterion_7_worker_count_never_changes_the_bytes() {
    let dir = tempfile::TempDir::new().unwrap();
    let run = |workers: &str, out: &str| {
        let result = Command::new(env!("CARGO_BIN_EXE_fasris"))
            .args([
                "figure",
                "2",
                "--seed",
                "42",
                "--workers",
                workers,
                "--out",
                out,
            ])
            .current_dir(dir.path())
            .output()
            .expect("binary spawns");
        assert!(
            result.status.success(),
            "figure 2 with {workers} workers failed: {}",
            String::from_utf8_lossy(&result.stderr)
        );
        std::fs::read(dir.path().join(out)).unwrap()
    };
    let single = run("1", "w1.csv");
    let eight = run("8", "w8.csv");

    let mut failures = Vec::new();
    println!(
        "reproducibility: {} bytes with 1 worker, {} bytes with 8",
        single.len(),
        eight.len()
    );
    if single != eight {
        let first_diff = single
            .iter()
            .zip(&eight)
            .position(|(a, b)| a != b)
            .unwrap_or(single.len().min(eight.len()));
        failures.push(format!("CSV outputs differ starting at byte {first_diff}"));
    }
    verdict(7, &failures);
}
