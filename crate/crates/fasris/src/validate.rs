//! Self-contained correctness checks, runnable from the CLI and reused by
//! the test suite.
//!
//! Every check compares the production path against an oracle that reaches
//! the same quantity by a different route: J0 against an exact-rational
//! series, the matrix square root against reconstruction, co-phasing against
//! an exhaustive quantized phase search, statistics against their analytic
//! moments, and the selection architectures against their structural
//! dominance and prefix properties. A documented fault-injection hook
//! perturbs one named check so the failure path itself stays tested.

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive};
use serde::Serialize;

use crate::architectures::{co_phase_gain, ArchitectureKind};
use crate::channel::ChannelTables;
use crate::experiment::{empirical_checks, evaluate_trial, run_sweep, SweepSpec, TrialChannels};
use crate::numerics::{
    bessel_j0, complex_gaussian_vector, derive_stream, hermitian_sqrt, ComplexMatrix,
};
use crate::reference;

/// Check names accepted by the fault-injection hook.
pub const CHECK_NAMES: [&str; 9] = [
    "bessel-j0",
    "hermitian-sqrt",
    "port-correlation",
    "mean-power",
    "los-fraction",
    "cophase-oracle",
    "dominance",
    "prefix-monotonicity",
    "determinism",
];

#[derive(Debug, Clone, Serialize)]
pub struct ValidationCheck {
    pub name: &'static str,
    pub passed: bool,
    /// The measured deviation or violation count the threshold applies to.
    pub measured: f64,
    pub threshold: f64,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct ValidationReport {
    pub checks: Vec<ValidationCheck>,
}

impl ValidationReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    /// One line per check, stable format.
    pub fn render_text(&self) -> String {
        let mut out = String::new();
        for c in &self.checks {
            out.push_str(&format!(
                "{:<7} {:<22} measured {:<12.6e} threshold {:<10.3e} {}\n",
                if c.passed { "PASS" } else { "FAIL" },
                c.name,
                c.measured,
                c.threshold,
                c.detail
            ));
        }
        out
    }
}

/// Run the full suite. `fault` names one check whose measurement is
/// deliberately pushed past its threshold, as a test hook for the failure
/// path; see [`CHECK_NAMES`].
pub fn run_validation(fault: Option<&str>) -> ValidationReport {
    let mut checks = vec![check_bessel(), check_hermitian_sqrt()];
    let report = empirical_checks(&reference::default_scenario(20), 100_000, 2024)
        .expect("reference scenario is valid");
    checks.push(ValidationCheck {
        name: "port-correlation",
        passed: true,
        measured: report.correlation_max_deviation,
        threshold: 0.02,
        detail: format!("Jakes covariance over {} draws, N=20", report.trials),
    });
    checks.push(ValidationCheck {
        name: "mean-power",
        passed: true,
        measured: report.mean_power_max_deviation,
        threshold: 0.02,
        detail: "per-port mean |h|^2 against 1".into(),
    });
    checks.push(ValidationCheck {
        name: "los-fraction",
        passed: true,
        measured: (report.los_power_fraction - 0.5).abs(),
        threshold: 0.02,
        detail: format!(
            "measured LoS power fraction {:.4} against K/(K+1) = 0.5",
            report.los_power_fraction
        ),
    });
    checks.push(check_cophase_oracle());
    checks.push(check_dominance());
    checks.push(check_prefix_monotonicity());
    checks.push(check_determinism());

    for c in &mut checks {
        if Some(c.name) == fault {
            c.measured += 10.0 * c.threshold.max(0.1);
            c.detail.push_str(" [fault injected]");
        }
        c.passed = c.measured <= c.threshold;
    }
    ValidationReport { checks }
}

// ── numeric oracles ────────────────────────────────────────────────────────

/// J0 by its Maclaurin series in exact rational arithmetic, rounded to f64
/// only at the very end. Independent of the production evaluation in both
/// arithmetic and code path. Domain |x| <= 25.
pub fn series_j0_oracle(x: f64) -> f64 {
    assert!(
        x.is_finite() && x.abs() <= 25.0,
        "oracle domain is |x| <= 25"
    );
    let xr = BigRational::from_float(x).expect("finite");
    let quarter_sq = &xr * &xr / BigRational::from_integer(BigInt::from(4));
    let eps = BigRational::new(BigInt::one(), pow10(30));
    let mut term = BigRational::one();
    let mut sum = BigRational::one();
    let mut converged = false;
    for k in 1..=120i64 {
        term = -(&term * &quarter_sq) / BigRational::from_integer(BigInt::from(k * k));
        sum += &term;
        if term.abs() < eps {
            converged = true;
            break;
        }
    }
    assert!(converged, "series oracle did not converge");
    sum.to_f64().expect("J0 is within f64 range")
}

fn pow10(exp: usize) -> BigInt {
    (0..exp).fold(BigInt::one(), |acc, _| acc * 10)
}

fn check_bessel() -> ValidationCheck {
    let mut max_dev = 0.0f64;
    let mut worst_x = 0.0f64;
    for i in 0..=2000 {
        let x = i as f64 * 0.01;
        let dev = (bessel_j0(x).unwrap() - series_j0_oracle(x)).abs();
        if dev > max_dev {
            max_dev = dev;
            worst_x = x;
        }
    }
    ValidationCheck {
        name: "bessel-j0",
        passed: true,
        measured: max_dev,
        threshold: 1e-10,
        detail: format!("exact-series oracle on [0, 20], worst at x = {worst_x:.2}"),
    }
}

fn check_hermitian_sqrt() -> ValidationCheck {
    let mut max_rel = 0.0f64;
    for (i, &n) in [2usize, 3, 5, 8, 16, 33, 64].iter().enumerate() {
        let g = complex_gaussian_vector(&derive_stream(31, i as u64), n * n).unwrap();
        let b = ComplexMatrix::from_fn(n, n, |r, c| g[r * n + c]);
        let a = b.mul(&b.hermitian_transpose()).unwrap();
        let s = hermitian_sqrt(&a, None).unwrap();
        let back = s.mul(&s.hermitian_transpose()).unwrap();
        let rel = back.max_abs_diff(&a) / a.max_abs_entry().max(1.0);
        max_rel = max_rel.max(rel);
    }
    ValidationCheck {
        name: "hermitian-sqrt",
        passed: true,
        measured: max_rel,
        threshold: 1e-10,
        detail: "S S^H reconstruction, random PSD up to 64x64".into(),
    }
}

/// Best cascaded gain over exhaustively enumerated quantized RIS phases,
/// `max over phi in {2 pi l / levels}^M of |sum_m e^{j phi_m} z_m|^2`.
/// Lower-bounds the continuous co-phasing optimum and approaches it as the
/// quantization refines; search space guarded to levels^M <= 2^25.
pub fn cophase_grid_oracle(h_in: &[Complex64], h_out: &[Complex64], levels: usize) -> f64 {
    assert_eq!(h_in.len(), h_out.len());
    let m = h_in.len();
    assert!(
        (levels as f64).powi(m as i32) <= (1u64 << 25) as f64,
        "quantized search space too large"
    );
    let z: Vec<Complex64> = h_in.iter().zip(h_out).map(|(a, b)| a * b).collect();
    let phases: Vec<Complex64> = (0..levels)
        .map(|l| Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * l as f64 / levels as f64))
        .collect();
    fn descend(z: &[Complex64], phases: &[Complex64], partial: Complex64) -> f64 {
        match z.split_first() {
            None => partial.norm_sqr(),
            Some((z0, rest)) => phases
                .iter()
                .map(|p| descend(rest, phases, partial + p * z0))
                .fold(f64::NEG_INFINITY, f64::max),
        }
    }
    descend(&z, &phases, Complex64::new(0.0, 0.0))
}

fn check_cophase_oracle() -> ValidationCheck {
    let mut max_rel_gap = 0.0f64;
    for case in 0..5u64 {
        let h_in = complex_gaussian_vector(&derive_stream(77, case), 3).unwrap();
        let h_out = complex_gaussian_vector(&derive_stream(78, case), 3).unwrap();
        let ideal = co_phase_gain(&h_in, &h_out).unwrap();
        let grid = cophase_grid_oracle(&h_in, &h_out, 256);
        // The quantized optimum can never exceed the continuous one.
        assert!(grid <= ideal * (1.0 + 1e-12), "grid {grid} > ideal {ideal}");
        max_rel_gap = max_rel_gap.max((ideal - grid) / ideal);
    }
    ValidationCheck {
        name: "cophase-oracle",
        passed: true,
        measured: max_rel_gap,
        threshold: 5e-3,
        detail: "256-level exhaustive phase search, M = 3, 5 cases".into(),
    }
}

// ── structural checks ──────────────────────────────────────────────────────

fn check_dominance() -> ValidationCheck {
    let scenario = reference::default_scenario(20);
    let tables = ChannelTables::new(&scenario).expect("valid scenario");
    let trials = 2000u64;
    let mut violations = 0usize;
    for t in 0..trials {
        let channels = TrialChannels::assemble(&derive_stream(501, t), &scenario, &tables);
        let thr = |kind| {
            evaluate_trial(&channels, &scenario, kind)
                .expect("evaluation succeeds")
                .throughput_bps_hz
        };
        let conv = thr(ArchitectureKind::Conventional);
        let bs = thr(ArchitectureKind::BsFas);
        let ue = thr(ArchitectureKind::UeFas);
        let dual = thr(ArchitectureKind::DualFas);
        if !(dual >= bs.max(ue) && bs.min(ue) >= conv) {
            violations += 1;
        }
    }
    ValidationCheck {
        name: "dominance",
        passed: true,
        measured: violations as f64,
        threshold: 0.0,
        detail: format!("dual >= bs, ue >= conv per trial, {trials} trials at N = 20"),
    }
}

fn check_prefix_monotonicity() -> ValidationCheck {
    let large = reference::default_scenario(20);
    let small = large.with_ports(10);
    let tables = ChannelTables::new(&large).expect("valid scenario");
    let trials = 500u64;
    let mut violations = 0usize;
    // The reduced dual search and the fluid-RIS spacing grid re-rank their
    // candidate sets as N grows, so neither is nested across port counts;
    // their regressions are reported, not asserted.
    let mut dual_regressions = 0usize;
    for t in 0..trials {
        let channels = TrialChannels::assemble(&derive_stream(613, t), &large, &tables);
        for kind in [
            ArchitectureKind::BsFas,
            ArchitectureKind::UeFas,
            ArchitectureKind::FasEmbeddedRis,
        ] {
            let at10 = evaluate_trial(&channels, &small, kind)
                .unwrap()
                .throughput_bps_hz;
            let at20 = evaluate_trial(&channels, &large, kind)
                .unwrap()
                .throughput_bps_hz;
            if at20 < at10 {
                violations += 1;
            }
        }
        let dual10 = evaluate_trial(&channels, &small, ArchitectureKind::DualFas)
            .unwrap()
            .throughput_bps_hz;
        let dual20 = evaluate_trial(&channels, &large, ArchitectureKind::DualFas)
            .unwrap()
            .throughput_bps_hz;
        if dual20 < dual10 {
            dual_regressions += 1;
        }
        let conv10 = evaluate_trial(&channels, &small, ArchitectureKind::Conventional)
            .unwrap()
            .throughput_bps_hz;
        let conv20 = evaluate_trial(&channels, &large, ArchitectureKind::Conventional)
            .unwrap()
            .throughput_bps_hz;
        if conv10 != conv20 {
            violations += 1;
        }
    }
    ValidationCheck {
        name: "prefix-monotonicity",
        passed: true,
        measured: violations as f64,
        threshold: 0.0,
        detail: format!(
            "port views 10 -> 20 never lose throughput for the exhaustive \
             searchers, {trials} trials; non-nested searches are reported \
             only (reduced dual regressed {dual_regressions}, fluid-RIS \
             spacing grids exempt)"
        ),
    }
}

fn check_determinism() -> ValidationCheck {
    let scenario = reference::default_scenario(8);
    let spec = SweepSpec {
        architectures: ArchitectureKind::ALL.to_vec(),
        n_values: vec![4, 8],
        p_dbm_values: vec![10.0, 16.0],
        trials: 40,
        master_seed: 9,
    };
    let run_in_pool = |threads: usize| {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .expect("pool");
        pool.install(|| run_sweep(&scenario, &spec).expect("sweep").to_csv())
    };
    let single = run_in_pool(1);
    let multi = run_in_pool(4);
    let repeat = run_in_pool(4);
    let mismatches = (single != multi) as usize + (multi != repeat) as usize;
    ValidationCheck {
        name: "determinism",
        passed: true,
        measured: mismatches as f64,
        threshold: 0.0,
        detail: "CSV bytes across 1-thread, 4-thread and repeated runs".into(),
    }
}

// ── tests ──────────────────────────────────────────────────────────────────

#[cfg(test)]
#[allow(clippy::excessive_precision)] // frozen reference digits
mod tests {
    use super::*;

    #[test]
    fn oracle_matches_reference_digits() {
        // 20-digit references computed independently.
        for (x, want) in [
            (0.0, 1.0),
            (std::f64::consts::FRAC_PI_2, 0.47200121576823476745),
            (1.0, 0.76519768655796655145),
            (12.0, 0.047689310796833536624),
            (20.0, 0.16702466434058315473),
        ] {
            let got = series_j0_oracle(x);
            assert!((got - want).abs() < 1e-14, "oracle({x}) = {got}");
        }
    }

    #[test]
    fn grid_oracle_exact_for_two_elements() {
        // Two unit elements with opposite phases: continuous optimum 4,
        // reachable exactly at any even quantization.
        let h_in = [Complex64::new(1.0, 0.0), Complex64::new(-1.0, 0.0)];
        let h_out = [Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0)];
        let grid = cophase_grid_oracle(&h_in, &h_out, 4);
        assert!((grid - 4.0).abs() < 1e-12);
    }

    #[test]
    fn fault_injection_fails_named_check_only() {
        let report = run_validation(Some("bessel-j0"));
        let bessel = report
            .checks
            .iter()
            .find(|c| c.name == "bessel-j0")
            .unwrap();
        assert!(!bessel.passed);
        assert!(
            report
                .checks
                .iter()
                .filter(|c| c.name != "bessel-j0")
                .all(|c| c.passed),
            "only the injected check may fail:\n{}",
            report.render_text()
        );
    }
}
