//! One function per subcommand. Each validates its parameters and budgets
//! first, so `--dry-run` stops after validation.

use std::path::Path;

use kakeya_core::kakeya::{check_covering_theorem, exhaustive_min_kakeya, greedy_small_kakeya, profile, PointSet};
use kakeya_core::laurent::DEFAULT_POINT_BUDGET;
use kakeya_core::lubin_tate::lt_selftest;
use kakeya_core::maximal::{estimate_constants, EstimateTable};
use kakeya_core::polymethod::{
    adversarial_instance, proof_trace, replay, sz_random_batch, sz_sweep_univariate, ProofTrace, TraceOptions, Verdict,
};
use kakeya_core::{RSpace, Rational, ResidueRing};
use num_rational::BigRational;
use serde_json::{json, Value};

use crate::config::{parse_rational, ExperimentConfig, Params};
use crate::{LabError, Output};

/// Largest `|R^n|` a proof trace accepts unless `--budget` raises it.
pub const TRACE_DEFAULT_BUDGET: u64 = 1 << 12;
/// Largest `|C^n|` for the random Schwartz–Zippel batch.
pub const SZ_POINT_BUDGET: u64 = 1 << 24;

pub fn dispatch(cfg: &ExperimentConfig) -> Result<Output, LabError> {
    let p = &cfg.params;
    match cfg.command.as_str() {
        "lt-selftest" => lt_selftest_cmd(p),
        "sz-verify" => sz_verify_cmd(p),
        "covering" => covering_cmd(p),
        "min-kakeya" => min_kakeya_cmd(p),
        "maximal-dist" => maximal_cmd(p, false),
        "maximal-norm" => maximal_cmd(p, true),
        "proof-trace" => proof_trace_cmd(p),
        "replay" => replay_cmd(p),
        other => Err(LabError::Config(format!("unknown command {other:?}"))),
    }
}

fn need<T: Clone>(v: &Option<T>, name: &str) -> Result<T, LabError> {
    v.clone().ok_or_else(|| LabError::Config(format!("--{name} is required")))
}

fn space(p: &Params) -> Result<RSpace, LabError> {
    Ok(RSpace::new(need(&p.q, "q")?, need(&p.k, "k")?, need(&p.n, "n")?)?)
}

fn rational(v: &Option<String>, name: &str) -> Result<Option<Rational>, LabError> {
    v.as_deref().map(parse_rational).transpose().map_err(|e| match e {
        LabError::Config(m) => LabError::Config(format!("--{name}: {m}")),
        other => other,
    })
}

fn check_budget(size: u64, budget: u64, what: &str) -> Result<(), LabError> {
    if size > budget {
        return Err(LabError::Budget(format!("{what} = {size} exceeds the budget {budget}")));
    }
    Ok(())
}

fn dry(p: &Params, plan: Value) -> Option<Output> {
    p.dry_run
        .unwrap_or(false)
        .then(|| Output { results: json!({ "dry_run": true, "plan": plan }), ..Default::default() })
}

fn read_input(path: &Path) -> Result<String, LabError> {
    std::fs::read_to_string(path).map_err(|e| LabError::Config(format!("cannot read {}: {e}", path.display())))
}

fn lt_selftest_cmd(p: &Params) -> Result<Output, LabError> {
    let qs = p.q.map_or(vec![2, 3], |q| vec![q]);
    let ks = p.k.map_or(vec![1, 2, 3], |k| vec![k]);
    let mut grid = Vec::new();
    for &q in &qs {
        for &k in &ks {
            let ring = ResidueRing::new(q, k)?;
            check_budget(ring.size() as u64, p.budget.unwrap_or(1 << 12), "|A_k|")?;
            grid.push((q, k));
        }
    }
    if let Some(out) = dry(p, json!({ "grid": grid })) {
        return Ok(out);
    }
    let mut reports = Vec::new();
    let mut violations = Vec::new();
    for (q, k) in grid {
        let r = lt_selftest(q, k)?;
        if !r.pass {
            violations.push(format!("LEMMA VIOLATION: Lubin–Tate self-test fails at q = {q}, k = {k}"));
        }
        reports.push(r);
    }
    Ok(Output { results: json!({ "reports": reports }), violations, csv: None })
}

fn sz_verify_cmd(p: &Params) -> Result<Output, LabError> {
    let (q, k, n) = (need(&p.q, "q")?, need(&p.k, "k")?, need(&p.n, "n")?);
    let ring = ResidueRing::new(q, k)?;
    let theta = rational(&p.theta, "theta")?;
    let exhaustive = p.exhaustive.unwrap_or(false);
    let trials = p.trials.unwrap_or(0);
    let max_deg = 3.min(ring.size() - 1);
    let thetas: Vec<Rational> = match theta {
        Some(t) => vec![t],
        None => vec![Rational::new(1, 2), Rational::from_integer(1)],
    };
    if exhaustive && n != 1 {
        return Err(LabError::Config("the exhaustive sweep is univariate: use --n 1".into()));
    }
    if n == 0 {
        return Err(LabError::Config("--n must be positive".into()));
    }
    let cells = (ring.size() as u64).checked_pow(n as u32).unwrap_or(u64::MAX);
    if trials > 0 {
        check_budget(cells, SZ_POINT_BUDGET, "|C^n|")?;
    }
    let plan = json!({
        "exhaustive": exhaustive.then(|| json!({ "max_deg": max_deg, "max_xdeg": 2, "thetas": thetas.iter().map(|t| t.to_string()).collect::<Vec<_>>() })),
        "random": trials,
    });
    if let Some(out) = dry(p, plan) {
        return Ok(out);
    }
    let mut violations = Vec::new();
    let sweep = if exhaustive { Some(sz_sweep_univariate(q, k, max_deg, 2, &thetas)?) } else { None };
    let random = if trials > 0 { Some(sz_random_batch(q, k, n, trials, p.seed.unwrap_or(0), theta)?) } else { None };
    for (name, s) in [("exhaustive", &sweep), ("random", &random)] {
        if let Some(s) = s.as_ref().filter(|s| s.failures > 0) {
            violations
                .push(format!("LEMMA VIOLATION: {} of {} {name} cases reach the counting bound", s.failures, s.cases));
        }
    }
    Ok(Output { results: json!({ "exhaustive": sweep, "random": random }), violations, csv: None })
}

/// The input set, or a greedy Kakeya set from the seed.
fn point_set(p: &Params, sp: RSpace) -> Result<(PointSet, &'static str), LabError> {
    match &p.input {
        Some(path) => Ok((PointSet::parse(sp, &read_input(path)?)?, "input")),
        None => Ok((greedy_small_kakeya(sp, p.seed.unwrap_or(0))?, "greedy")),
    }
}

fn positive_nu(nu: Rational) -> Result<Rational, LabError> {
    if nu <= Rational::from_integer(0) {
        return Err(LabError::Config("no direction meets the ε threshold, so there is no ν to test".into()));
    }
    Ok(nu)
}

fn covering_cmd(p: &Params) -> Result<Output, LabError> {
    let sp = space(p)?;
    check_budget(sp.size(), p.budget.unwrap_or(DEFAULT_POINT_BUDGET), "|R^n|")?;
    let eps = need(&rational(&p.epsilon, "epsilon")?, "epsilon")?;
    let nu = rational(&p.nu, "nu")?;
    if let Some(out) = dry(p, json!({ "space_size": sp.size(), "input": p.input })) {
        return Ok(out);
    }
    let (e, source) = point_set(p, sp)?;
    let nu = match nu {
        Some(nu) => nu,
        None => positive_nu(profile(&e).nu_at(eps))?,
    };
    let report = check_covering_theorem(&e, eps, nu)?;
    let violations = if report.is_violation() {
        vec![format!("THEOREM VIOLATION: |E| = {} < covering bound {}", report.size, report.bound)]
    } else {
        Vec::new()
    };
    let results = json!({
        "source": source,
        "epsilon": eps.to_string(),
        "nu": nu.to_string(),
        "report": report,
        "points": e.indices().collect::<Vec<_>>(),
    });
    Ok(Output { results, violations, csv: None })
}

fn min_kakeya_cmd(p: &Params) -> Result<Output, LabError> {
    let sp = space(p)?;
    let budget = p.budget.unwrap_or(kakeya_core::kakeya::EXHAUSTIVE_DEFAULT_BUDGET);
    check_budget(sp.size(), budget.min(kakeya_core::kakeya::EXHAUSTIVE_MAX_BUDGET), "|R^n|")?;
    if let Some(out) = dry(p, json!({ "space_size": sp.size(), "budget": budget })) {
        return Ok(out);
    }
    let m = exhaustive_min_kakeya(sp, budget)?;
    let one = Rational::from_integer(1);
    let nu = positive_nu(profile(&m.witness).nu_at(one))?;
    let report = check_covering_theorem(&m.witness, one, nu)?;
    let violations = if report.is_violation() {
        vec![format!("THEOREM VIOLATION: minimum size {} < covering bound {}", m.size, report.bound)]
    } else {
        Vec::new()
    };
    let results = json!({
        "size": m.size,
        "nodes": m.nodes,
        "witness": m.witness.indices().collect::<Vec<_>>(),
        "witness_text": m.witness.to_text(),
        "bound": report.bound as u64,
        "covering": report,
    });
    Ok(Output { results, violations, csv: None })
}

fn csv_of<T: serde::Serialize>(rows: &[T]) -> Result<String, LabError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).map_err(|e| LabError::Io(e.to_string()))?;
    }
    String::from_utf8(w.into_inner().map_err(|e| LabError::Io(e.to_string()))?).map_err(|e| LabError::Io(e.to_string()))
}

/// `last / first` of a per-`k` series, the growth proxy for `k`-uniformity.
pub fn growth(values: &[f64]) -> Option<f64> {
    match (values.first(), values.last()) {
        (Some(&a), Some(&b)) if a > 0.0 => Some(b / a),
        _ => None,
    }
}

fn maximal_cmd(p: &Params, norm: bool) -> Result<Output, LabError> {
    let (q, n) = (need(&p.q, "q")?, need(&p.n, "n")?);
    let ks = need(&p.k_values, "k-values")?;
    let trials = need(&p.trials, "trials")? as usize;
    let seed = p.seed.unwrap_or(0);
    for &k in &ks {
        check_budget(RSpace::new(q, k, n)?.size(), p.budget.unwrap_or(DEFAULT_POINT_BUDGET), "|R^n|")?;
    }
    let scalar = p.scalar.clone().unwrap_or_else(|| "f64".into());
    if scalar != "f64" && scalar != "exact" {
        return Err(LabError::Config(format!("--scalar must be f64 or exact, not {scalar:?}")));
    }
    if let Some(out) = dry(p, json!({ "k_values": ks, "trials": trials, "scalar": scalar })) {
        return Ok(out);
    }
    let table: EstimateTable = if scalar == "exact" {
        estimate_constants::<BigRational>(q, &ks, n, trials, seed)?
    } else {
        estimate_constants::<f64>(q, &ks, n, trials, seed)?
    };
    let mut violations = Vec::new();
    for s in &table.summaries {
        if s.lower_bound_failures > 0 {
            violations.push(format!(
                "THEOREM VIOLATION: min φ* lower bound fails in {} of {} trials at k = {}",
                s.lower_bound_failures, s.trials, s.k
            ));
        }
    }
    let dist: Vec<f64> = table.summaries.iter().map(|s| s.max_distribution_ratio).collect();
    let norms: Vec<f64> = table.summaries.iter().map(|s| s.max_norm_ratio).collect();
    let dist_growth = growth(&dist);
    if !norm && dist_growth.is_some_and(|g| g > 2.0) {
        violations.push(format!("distribution ratio grows by {:.3}x across k", dist_growth.unwrap()));
    }
    let csv = if norm { csv_of(&table.summaries)? } else { csv_of(&table.rows)? };
    let results = if norm {
        json!({ "summaries": table.summaries, "norm_growth": growth(&norms) })
    } else {
        json!({ "summaries": table.summaries, "distribution_growth": dist_growth, "rows": table.rows.len() })
    };
    Ok(Output { results, violations, csv: Some(csv) })
}

/// Verdicts that no consistent run may produce.
pub fn trace_violations(t: &ProofTrace) -> Vec<String> {
    let mut v = Vec::new();
    if t.lemma_violation() {
        v.push("LEMMA VIOLATION: the counting lemma fails on ḡ".into());
    }
    match &t.verdict {
        Verdict::ContradictionDerived => v.push("every assertion of the trace held".into()),
        Verdict::FailedAt { reason, .. } if reason.starts_with("consistency") => v.push(reason.clone()),
        _ => {}
    }
    v
}

fn proof_trace_cmd(p: &Params) -> Result<Output, LabError> {
    let sp = space(p)?;
    check_budget(sp.size(), p.budget.unwrap_or(TRACE_DEFAULT_BUDGET), "|R^n|")?;
    let eps = need(&rational(&p.epsilon, "epsilon")?, "epsilon")?;
    let nu = rational(&p.nu, "nu")?;
    if let Some(size) = p.adversarial {
        if size as u64 > sp.size() {
            return Err(LabError::Config(format!("--adversarial {size} exceeds |R^n| = {}", sp.size())));
        }
    }
    let plan = json!({ "space_size": sp.size(), "adversarial": p.adversarial, "input": p.input, "force": p.force });
    if let Some(out) = dry(p, plan) {
        return Ok(out);
    }
    let seed = p.seed.unwrap_or(0);
    let (e, claims, source) = match p.adversarial {
        Some(size) => {
            let (e, c) = adversarial_instance(sp, size, seed)?;
            (e, Some(c), "adversarial")
        }
        None => {
            let (e, s) = point_set(p, sp)?;
            (e, None, s)
        }
    };
    let nu = match (nu, &claims) {
        (Some(nu), _) => nu,
        (None, Some(c)) => positive_nu(Rational::new(c.len() as i64, sp.size() as i64))?,
        (None, None) => positive_nu(profile(&e).nu_at(eps))?,
    };
    let opts = TraceOptions { precision: p.precision, force: p.force.unwrap_or(false), claims };
    let trace = proof_trace(&e, eps, nu, &opts)?;
    let check = replay(&trace)?;
    let mut violations = trace_violations(&trace);
    if !check.ok {
        violations.push(format!("replay disagrees with the run: {}", check.mismatches.join("; ")));
    }
    let results = json!({
        "source": source,
        "terminated_at": trace.terminated_at(),
        "replay": check,
        "trace": trace,
    });
    Ok(Output { results, violations, csv: None })
}

/// A stored trace: either a bare trace or a proof-trace report.
pub fn load_trace(text: &str) -> Result<ProofTrace, LabError> {
    let v: Value = serde_json::from_str(text).map_err(|e| LabError::Config(format!("trace is not JSON: {e}")))?;
    let t = v.pointer("/results/trace").cloned().unwrap_or(v);
    serde_json::from_value(t).map_err(|e| LabError::Config(format!("not a proof trace: {e}")))
}

fn replay_cmd(p: &Params) -> Result<Output, LabError> {
    let path = need(&p.input, "input")?;
    let trace = load_trace(&read_input(&path)?)?;
    let sp = RSpace::new(trace.q, trace.k, trace.n)?;
    check_budget(sp.size(), p.budget.unwrap_or(TRACE_DEFAULT_BUDGET), "|R^n|")?;
    if let Some(out) = dry(p, json!({ "q": trace.q, "k": trace.k, "n": trace.n, "steps": trace.steps.len() })) {
        return Ok(out);
    }
    let check = replay(&trace)?;
    let mut violations = trace_violations(&trace);
    if !check.ok {
        violations.push(format!("replay mismatch: {}", check.mismatches.join("; ")));
    }
    let results = json!({ "replay": check, "verdict": trace.verdict, "terminated_at": trace.terminated_at() });
    Ok(Output { results, violations, csv: None })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn growth_is_last_over_first() {
        assert_eq!(growth(&[0.5, 0.1, 0.75]), Some(1.5));
        assert_eq!(growth(&[0.0, 1.0]), None);
        assert_eq!(growth(&[]), None);
    }

    #[test]
    fn traces_load_bare_or_from_a_report() {
        let sp = RSpace::new(2, 1, 2).unwrap();
        let e = PointSet::full(sp).unwrap();
        let one = Rational::from_integer(1);
        let t = proof_trace(&e, one, Rational::new(3, 4), &TraceOptions::default()).unwrap();
        let bare = serde_json::to_string(&t).unwrap();
        assert_eq!(load_trace(&bare).unwrap(), t);
        let wrapped = json!({ "results": { "trace": t } }).to_string();
        assert_eq!(load_trace(&wrapped).unwrap(), t);
        assert!(matches!(load_trace("{}"), Err(LabError::Config(_))));
    }

    #[test]
    fn dry_runs_skip_the_work() {
        let p = Params {
            q: Some(2),
            k: Some(2),
            n: Some(2),
            epsilon: Some("1".into()),
            dry_run: Some(true),
            ..Default::default()
        };
        let out = proof_trace_cmd(&p).unwrap();
        assert_eq!(out.results["dry_run"], true);
        assert!(out.violations.is_empty());
    }
}
