use std::process::ExitCode;

use serde::Serialize;
use serde_json::json;

use trimoment::moments::{entanglement_s, RouteTolerance};
use trimoment::oracle::{
    single_atom_relations, verify_algebra, verify_cancellation_sweep, verify_identity_suite_with,
    verify_product_vanishing, verify_sum_route_with, IdentityResult, RouteSummary, VanishingSummary, IDENTITY_TOL,
};
use trimoment::sampler::estimate_s_from_samples;
use trimoment::states::parse_state_json;
use trimoment::{Error, SymmetricState};

use crate::envelope::{read_input, sha256_hex, Envelope, Failure, RunResult, EXIT_INVALID_INPUT, EXIT_VERIFY_FAILED};
use crate::{Common, SampleArgs, StateArgs, VerifyArgs};

pub fn route_tolerance(c: &Common) -> RunResult<RouteTolerance> {
    let ok = |x: f64| x.is_finite() && x > 0.0;
    if !ok(c.tolerance_rel) || !ok(c.tolerance_abs) {
        return Err(Failure::new(EXIT_INVALID_INPUT, "tolerances must be positive and finite"));
    }
    Ok(RouteTolerance { rel: c.tolerance_rel, abs: c.tolerance_abs })
}

fn load_state(a: &StateArgs, bytes: &[u8]) -> Result<SymmetricState, Error> {
    let text = std::str::from_utf8(bytes).map_err(|e| Error::InvalidState(format!("input is not UTF-8: {e}")))?;
    let parsed = parse_state_json(text, a.normalize)?;
    if let Some(n) = a.n_atoms {
        if n != parsed.n_atoms() {
            return Err(Error::InvalidState(format!("--n {n} does not match the state's {} atoms", parsed.n_atoms())));
        }
    }
    parsed.into_symmetric(a.allow_large_n)
}

fn state_envelope<'a>(command: &'a str, a: &'a StateArgs, bytes: &[u8]) -> Envelope<'a> {
    Envelope { command, common: &a.common, input_sha256: Some(sha256_hex(bytes)), extra: Vec::new() }
}

pub fn compute(a: &StateArgs) -> RunResult<ExitCode> {
    let tol = route_tolerance(&a.common)?;
    let bytes = read_input(&a.input)?;
    let env = state_envelope("compute", a, &bytes);
    let report = load_state(a, &bytes).and_then(|s| entanglement_s(&s)).map_err(|e| env.emit_error(&e))?;
    let mut value = serde_json::to_value(&report).map_err(|e| Failure::new(EXIT_VERIFY_FAILED, e.to_string()))?;
    value["routes"]["within_tolerance"] = json!(report.routes_agree(&tol));
    env.emit(&value)?;
    Ok(ExitCode::SUCCESS)
}

#[derive(Serialize)]
struct SweepSummary {
    trials: usize,
    max_residual: f64,
    failed: Vec<String>,
    passed: bool,
}

impl SweepSummary {
    fn from_results(rs: &[IdentityResult]) -> Self {
        let failed: Vec<String> = rs.iter().filter(|r| !r.passed).map(|r| r.identity_id.clone()).collect();
        Self {
            trials: rs.len(),
            max_residual: rs.iter().map(|r| r.max_abs_residual).fold(0.0, f64::max),
            passed: failed.is_empty(),
            failed,
        }
    }
}

#[derive(Serialize)]
struct VerifyReport {
    identities: Vec<IdentityResult>,
    cancellation: SweepSummary,
    sum_route: Vec<RouteSummary>,
    product_vanishing: Vec<VanishingSummary>,
    algebra: SweepSummary,
    passed: bool,
}

fn oracle_failure(e: Error) -> Failure {
    Failure::new(crate::envelope::exit_code(&e), e.to_string())
}

pub fn verify(a: &VerifyArgs) -> RunResult<ExitCode> {
    let tol = route_tolerance(&a.common)?;
    let (t, seed) = (a.trials, a.common.seed);
    if t == 0 {
        return Err(Failure::new(EXIT_INVALID_INPUT, "--trials must be at least 1"));
    }
    if let Some(id) = &a.corrupt_identity {
        let known = trimoment::oracle::identity_table().iter().any(|i| &i.id == id)
            || single_atom_relations().iter().any(|r| r.id == id);
        if !known {
            return Err(Failure::new(EXIT_INVALID_INPUT, format!("unknown identity {id:?}")));
        }
    }
    let identities = verify_identity_suite_with(IDENTITY_TOL, a.corrupt_identity.as_deref());
    let cancellation = SweepSummary::from_results(&verify_cancellation_sweep(t, seed).map_err(oracle_failure)?);
    let sum_route = (3..=6)
        .map(|n| verify_sum_route_with(n, t, seed.wrapping_add(n as u64), &tol))
        .collect::<Result<Vec<_>, _>>()
        .map_err(oracle_failure)?;
    let product_vanishing = vec![
        verify_product_vanishing(3, 10 * t, seed).map_err(oracle_failure)?,
        verify_product_vanishing(8, 2 * t, seed.wrapping_add(1)).map_err(oracle_failure)?,
    ];
    let mut algebra_results = Vec::new();
    for n in 1..=6 {
        algebra_results.extend(verify_algebra(n).map_err(oracle_failure)?.into_iter().map(|mut r| {
            r.identity_id = format!("{}[N={n}]", r.identity_id);
            r
        }));
    }
    let algebra = SweepSummary::from_results(&algebra_results);
    let passed = identities.iter().all(|r| r.passed)
        && cancellation.passed
        && sum_route.iter().all(|r| r.passed)
        && product_vanishing.iter().all(|r| r.passed)
        && algebra.passed;
    let report = VerifyReport { identities, cancellation, sum_route, product_vanishing, algebra, passed };
    let env = Envelope {
        command: "verify",
        common: &a.common,
        input_sha256: None,
        extra: vec![("trials", json!(t))],
    };
    env.emit(&report)?;
    if passed {
        Ok(ExitCode::SUCCESS)
    } else {
        Err(Failure::new(EXIT_VERIFY_FAILED, "verification failed"))
    }
}

pub fn sample(a: &SampleArgs) -> RunResult<ExitCode> {
    route_tolerance(&a.state.common)?;
    let bytes = read_input(&a.state.input)?;
    let mut env = state_envelope("sample", &a.state, &bytes);
    env.extra.push(("shots", json!(a.shots)));
    let state = load_state(&a.state, &bytes).map_err(|e| env.emit_error(&e))?;
    let run = || -> Result<serde_json::Value, Error> {
        let est = estimate_s_from_samples(&state, a.shots, a.state.common.seed)?;
        let exact = entanglement_s(&state)?;
        Ok(json!({
            "s_hat": est.s_hat,
            "standard_error": est.standard_error,
            "s_exact": exact.s_parameter,
            "seed": est.seed,
            "records": est.records,
        }))
    };
    let value = run().map_err(|e| env.emit_error(&e))?;
    env.emit(&value)?;
    Ok(ExitCode::SUCCESS)
}
