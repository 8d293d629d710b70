//! Acceptance gate. Runs every criterion at its stated tolerance, prints one
//! line per criterion and exits nonzero if any fails.

use std::f64::consts::FRAC_1_SQRT_2;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use trimoment::moments::{entanglement_s, entanglement_s_full, CorrelatorMode};
use trimoment::operators::{collective_op_dicke, Axis, CollectiveComponent};
use trimoment::oracle::{
    verify_algebra, verify_cancellation_sweep, verify_cancellation_yp, verify_identity_suite,
    verify_product_vanishing, verify_sum_route,
};
use trimoment::sampler::estimate_s_from_samples;
use trimoment::states::{full_to_dicke, ProductState, SymmetricState};

/// S for coeffs [1/sqrt 2, 1/sqrt 2, 0, 0], frozen from a dense 8x8 computation.
const PINNED_S: f64 = 0.07014146471871166;

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome { passed, detail: detail.into() }
}

fn identity_suite() -> Outcome {
    let rs = verify_identity_suite();
    let worst = rs.iter().map(|r| r.max_abs_residual).fold(0.0, f64::max);
    let failed: Vec<_> = rs.iter().filter(|r| !r.passed).map(|r| r.identity_id.as_str()).collect();
    outcome(
        failed.is_empty() && rs.len() == 36,
        format!("{} checks, max residual {worst:.3e}, failed {failed:?}", rs.len()),
    )
}

fn cancellation() -> Outcome {
    let rs = verify_cancellation_sweep(100, 13).expect("sweep");
    let mut worst = rs.iter().map(|r| r.max_abs_residual).fold(0.0, f64::max);
    let mut passed = rs.iter().all(|r| r.passed);
    for k in 0..20 {
        let r = verify_cancellation_yp(-3.0 + 0.3 * k as f64).expect("y'");
        worst = worst.max(r.max_abs_residual);
        passed &= r.passed;
    }
    outcome(passed && worst <= 1e-12, format!("100 (theta, phi) pairs + 20 y' angles, max residual {worst:.3e}"))
}

fn route_equivalence() -> Outcome {
    let mut passed = true;
    let mut parts = Vec::new();
    for n in 3..=6 {
        let r = verify_sum_route(n, 100, 1000 + n as u64).expect("route sweep");
        passed &= r.passed && r.evaluated == 100;
        parts.push(format!("N={n}: dev {:.2e}, skipped {}", r.max_rel_dev, r.skipped));
    }
    outcome(passed, parts.join("; "))
}

fn product_vanishing() -> Outcome {
    let a = verify_product_vanishing(3, 1000, 31).expect("N=3");
    let b = verify_product_vanishing(8, 200, 32).expect("N=8");
    outcome(
        a.passed && b.passed && a.max_s <= 1e-10 && b.max_s <= 1e-10,
        format!("N=3 x1000 max S {:.2e}; N=8 x200 max S {:.2e}", a.max_s, b.max_s),
    )
}

fn representation_agreement() -> Outcome {
    let mut worst: f64 = 0.0;
    for n in 3..=10 {
        for k in 0..50 {
            let s = SymmetricState::random(n, 10_000 * n as u64 + k).expect("state");
            let f = s.to_full().expect("full");
            let d = entanglement_s(&s).expect("dicke report");
            let o = entanglement_s_full(&f, CorrelatorMode::SymmetricFastPath).expect("full report");
            let pairs = [
                (d.mean_spin.jx, o.mean_spin.jx),
                (d.mean_spin.jy, o.mean_spin.jy),
                (d.mean_spin.jz, o.mean_spin.jz),
                (d.var_xp, o.var_xp),
                (d.var_yp, o.var_yp),
                (d.s_parameter, o.s_parameter),
            ];
            for (x, y) in pairs {
                worst = worst.max((x - y).abs());
            }
            for axis in Axis::ALL {
                let jd = collective_op_dicke(axis, n).expect("op");
                let x = trimoment::central_moment(&s, &jd, 2).expect("dicke var");
                let y = trimoment::central_moment(&f, &CollectiveComponent::axis(n, axis), 2).expect("full var");
                worst = worst.max((x - y).abs());
            }
        }
    }
    outcome(worst <= 1e-10, format!("N=3..10 x50, max abs difference {worst:.3e}"))
}

fn algebra() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut passed = true;
    let mut count = 0;
    for n in 1..=6 {
        for r in verify_algebra(n).expect("algebra") {
            worst = worst.max(r.max_abs_residual);
            passed &= r.passed;
            count += 1;
        }
    }
    outcome(passed && worst <= 1e-13, format!("{count} checks for N=1..6, max residual {worst:.3e}"))
}

fn sampler() -> Outcome {
    let shots = 100_000;
    let mut cases: Vec<(String, SymmetricState)> = Vec::new();
    let product = ProductState::random_identical(4, 71).expect("product").to_full().expect("full");
    cases.push(("product N=4".into(), full_to_dicke(&product).expect("dicke")));
    cases.push((
        "pinned N=3".into(),
        SymmetricState::from_real(&[FRAC_1_SQRT_2, FRAC_1_SQRT_2, 0.0, 0.0]).expect("pinned"),
    ));
    for k in 0..18 {
        let n = 3 + k % 4;
        cases.push((format!("random N={n} #{k}"), SymmetricState::random(n, 700 + k as u64).expect("random")));
    }
    let mut passed = true;
    let mut worst_z: f64 = 0.0;
    for (i, (name, s)) in cases.iter().enumerate() {
        let exact = entanglement_s(s).expect("exact");
        let seed = 5000 + i as u64;
        let est = estimate_s_from_samples(s, shots, seed).expect("estimate");
        let exact_m3 = [exact.m3_xp_direct(), exact.m3_yp_direct()];
        for (rec, want) in est.records.iter().zip(exact_m3) {
            let e = rec.estimates.expect("estimates");
            let z = (e.m3 - want).abs() / e.se_m3.max(f64::MIN_POSITIVE);
            worst_z = worst_z.max(if e.se_m3 > 0.0 { z } else { 0.0 });
            if (e.m3 - want).abs() > 5.0 * e.se_m3 + 1e-12 {
                println!("    {name}: {} m3 {} vs exact {want} (se {})", rec.operator_tag, e.m3, e.se_m3);
                passed = false;
            }
        }
        if (est.s_hat - exact.s_parameter).abs() > 5.0 * est.standard_error + 1e-12 {
            println!("    {name}: S_hat {} vs exact {} (se {})", est.s_hat, exact.s_parameter, est.standard_error);
            passed = false;
        }
    }
    let again = estimate_s_from_samples(&cases[1].1, shots, 5001).expect("rerun");
    let first = estimate_s_from_samples(&cases[1].1, shots, 5001).expect("rerun");
    let deterministic = again == first;
    outcome(
        passed && deterministic,
        format!("20 cases at M=1e5, worst m3 deviation {worst_z:.2} SE, deterministic {deterministic}"),
    )
}

fn pins() -> Outcome {
    let s = SymmetricState::from_real(&[FRAC_1_SQRT_2, FRAC_1_SQRT_2, 0.0, 0.0]).expect("pinned");
    let got = entanglement_s(&s).expect("pinned report").s_parameter;
    let w = SymmetricState::from_real(&[0.0, 1.0, 0.0, 0.0]).expect("W");
    let got_w = entanglement_s(&w).expect("W report").s_parameter;
    outcome(
        (got - PINNED_S).abs() <= 1e-12 && got_w.abs() <= 1e-12,
        format!("pinned S {got:.17} (want {PINNED_S}), W-state S {got_w:.3e}"),
    )
}

type Criterion = (&'static str, Duration, fn() -> Outcome);

fn main() -> ExitCode {
    let criteria: [Criterion; 8] = [
        ("identity suite", Duration::from_secs(1), identity_suite),
        ("bipartite cancellation", Duration::from_secs(5), cancellation),
        ("route equivalence", Duration::from_secs(30), route_equivalence),
        ("product-state vanishing", Duration::from_secs(30), product_vanishing),
        ("representation agreement", Duration::from_secs(60), representation_agreement),
        ("algebra invariants", Duration::from_secs(60), algebra),
        ("sampler convergence", Duration::from_secs(120), sampler),
        ("regression pins", Duration::from_secs(60), pins),
    ];
    let mut all = true;
    for (i, (name, budget, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let out = run();
        let elapsed = start.elapsed();
        let ok = out.passed && elapsed <= *budget;
        all &= ok;
        println!(
            "criterion {} [{}] {name}: {} ({:.2}s, budget {}s)",
            i + 1,
            if ok { "PASS" } else { "FAIL" },
            out.detail,
            elapsed.as_secs_f64(),
            budget.as_secs()
        );
    }
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
