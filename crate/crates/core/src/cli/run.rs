//! Orchestrates the checks of a scenario in dependency order.

use std::collections::BTreeMap;
use std::time::Instant;

use serde_json::{json, Value};

use super::report::{CheckResult, Report, Status};
use super::scenario::{OmegaSpec, Resolved, Scenario, ScenarioError};
use crate::abelian::{PolarizedAbelianVariety, ValidationReport};
use crate::analysis::{
    anisotropy_check, make_anisotropic, modified_approach_probe, sampson_iota, split_omega, theorem1, AnalysisError,
};
use crate::exterior::KForm;
use crate::scalar::{Field, Q};
use crate::weil::{build_weil_jacobian, custom_surjection, sampson_projection, verify_projection, SurjectionData, WeilJacobian};

fn axioms_json(report: &ValidationReport) -> Value {
    Value::Array(
        report.checks.iter().map(|c| json!({ "name": c.name, "passed": c.passed, "detail": c.detail })).collect(),
    )
}

fn result(name: &'static str, status: Status, summary: impl Into<String>, data: Value) -> CheckResult {
    CheckResult { name, status, reason: None, summary: summary.into(), data }
}

fn skipped(name: &'static str, reason: impl Into<String>) -> CheckResult {
    CheckResult { name, status: Status::Skipped, reason: Some(reason.into()), summary: String::new(), data: Value::Null }
}

/// Lazily built objects shared between checks.
struct Pipeline<'a> {
    scenario: &'a Scenario,
    resolved: Resolved,
    validation: Option<ValidationReport>,
    weil: Option<Result<WeilJacobian, String>>,
    projection: Option<Result<SurjectionData, String>>,
    omega: Option<KForm<Q>>,
    notes: Vec<String>,
}

impl<'a> Pipeline<'a> {
    fn variety(&self) -> &PolarizedAbelianVariety {
        &self.resolved.variety
    }

    fn validation(&mut self) -> &ValidationReport {
        if self.validation.is_none() {
            self.validation = Some(self.resolved.variety.validate());
        }
        self.validation.as_ref().unwrap()
    }

    fn base_valid(&mut self) -> bool {
        self.validation().all_pass()
    }

    fn weil(&mut self) -> Result<&WeilJacobian, String> {
        if self.weil.is_none() {
            let built = if self.base_valid() {
                build_weil_jacobian(self.variety(), self.scenario.p).map_err(|e| e.to_string())
            } else {
                Err("base variety failed validation".to_string())
            };
            self.weil = Some(built);
        }
        self.weil.as_ref().unwrap().as_ref().map_err(Clone::clone)
    }

    fn projection(&mut self) -> Result<&SurjectionData, String> {
        if self.projection.is_none() {
            let built = match self.resolved.custom.clone() {
                Some((source, matrix)) => {
                    let source_report = source.validate();
                    if !self.base_valid() {
                        Err("target variety failed validation".to_string())
                    } else if !source_report.all_pass() {
                        Err(format!("source variety fails: {}", source_report.failures().join(", ")))
                    } else {
                        custom_surjection(&source, self.variety(), matrix).map_err(|e| e.to_string())
                    }
                }
                None => match self.weil() {
                    Ok(w) => sampson_projection(w).map_err(|e| e.to_string()),
                    Err(e) => Err(format!("no Weil Jacobian: {e}")),
                },
            };
            self.projection = Some(built);
        }
        self.projection.as_ref().unwrap().as_ref().map_err(Clone::clone)
    }

    fn omega(&mut self) -> Result<KForm<Q>, String> {
        if let Some(o) = &self.omega {
            return Ok(o.clone());
        }
        let pi = self.projection()?.clone();
        let form = match (&self.scenario.omega_hat, &self.resolved.omega_matrix) {
            (_, Some(m)) => KForm::from_alternating_matrix(m),
            (OmegaSpec::Named(name), None) if name == "pullback" => pi.pullback(&pi.target().kahler_form()),
            (OmegaSpec::Named(name), None) if name == "zero" => KForm::zero(pi.source().real_dim(), 2),
            _ => pi.source().kahler_form(),
        };
        self.omega = Some(form.clone());
        Ok(form)
    }

    fn run_check(&mut self, name: &'static str) -> CheckResult {
        match name {
            "validate" => self.check_validate(),
            "weil" => self.check_weil(),
            "projection" => self.check_projection(),
            "lefschetz" => self.check_lefschetz(),
            "split" => self.check_split(),
            "theorem1" => self.check_theorem1(),
            "iota" => self.check_iota(),
            "modified" => self.check_modified(),
            other => unreachable!("unknown check {other}"),
        }
    }

    fn check_validate(&mut self) -> CheckResult {
        let label = self.variety().label().to_string();
        let report = self.validation().clone();
        let passed = report.checks.iter().filter(|c| c.passed).count();
        let status = if report.all_pass() { Status::Pass } else { Status::Fail };
        let mut r = result(
            "validate",
            status,
            format!("{label}: {passed}/{} relations hold", report.checks.len()),
            json!({ "label": label, "n": self.variety().n(), "relations": axioms_json(&report) }),
        );
        if status == Status::Fail {
            r.reason = Some(format!("failed: {}", report.failures().join(", ")));
        }
        r
    }

    fn check_weil(&mut self) -> CheckResult {
        if !self.base_valid() {
            return skipped("weil", "base variety failed validation");
        }
        let p = self.scenario.p;
        match self.weil() {
            Ok(w) => {
                let report = w.variety().validate();
                let status = if report.all_pass() { Status::Pass } else { Status::Fail };
                result(
                    "weil",
                    status,
                    format!("J^{p}: N = {}, {} axioms checked", w.big_n(), report.checks.len()),
                    json!({ "p": p, "N": w.big_n(), "label": w.variety().label(), "axioms": axioms_json(&report) }),
                )
            }
            Err(e) => {
                let mut r = result("weil", Status::Fail, String::new(), json!({ "p": p }));
                r.reason = Some(e);
                r
            }
        }
    }

    fn check_projection(&mut self) -> CheckResult {
        if !self.base_valid() {
            return skipped("projection", "base variety failed validation");
        }
        let custom = self.resolved.custom.is_some();
        if !custom {
            if let Err(e) = self.weil() {
                return skipped("projection", format!("no Weil Jacobian: {e}"));
            }
        }
        let pi = match self.projection() {
            Ok(pi) => pi.clone(),
            Err(e) => {
                let mut r = result("projection", Status::Fail, String::new(), Value::Null);
                r.reason = Some(e);
                return r;
            }
        };
        let mut data = json!({
            "kind": if custom { "custom" } else { "sampson" },
            "source_dim": pi.source().real_dim(),
            "target_dim": pi.target().real_dim(),
            "fiber_dim": pi.fiber_dim(),
            "kernel_frame_rank": pi.kernel_frame().rank(),
            "kernel_is_complex": pi.kernel_is_complex(),
            "image_index": pi.image_index().to_string(),
        });
        let status = if custom {
            if pi.kernel_is_complex() {
                Status::Pass
            } else {
                Status::Fail
            }
        } else {
            let w = self.weil().unwrap().clone();
            let report = verify_projection(&w, &pi);
            data["properties"] = axioms_json(&report);
            if report.all_pass() {
                Status::Pass
            } else {
                Status::Fail
            }
        };
        result(
            "projection",
            status,
            format!("{} → {}, fiber {}", pi.source().real_dim(), pi.target().real_dim(), pi.fiber_dim()),
            data,
        )
    }

    fn check_lefschetz(&mut self) -> CheckResult {
        if !self.base_valid() {
            return skipped("lefschetz", "base variety failed validation");
        }
        let p = self.scenario.p;
        let two_n = self.variety().real_dim();
        match self.variety().lefschetz_rank(p) {
            Ok(rank) => result(
                "lefschetz",
                if rank == two_n { Status::Pass } else { Status::Fail },
                format!("rank {rank}, expected {two_n}"),
                json!({ "p": p, "rank": rank, "expected": two_n }),
            ),
            Err(e) => {
                let mut r = result("lefschetz", Status::Fail, String::new(), Value::Null);
                r.reason = Some(e.to_string());
                r
            }
        }
    }

    fn check_split(&mut self) -> CheckResult {
        let (pi, omega) = match self.projection().cloned().and_then(|pi| self.omega().map(|o| (pi, o))) {
            Ok(x) => x,
            Err(e) => return skipped("split", e),
        };
        let anisotropic = anisotropy_check(&omega, pi.source().j());
        let mut data = json!({ "anisotropic": anisotropic, "fiber_dim": pi.fiber_dim() });
        if !anisotropic {
            let reference = pi.source().kahler_form();
            if let Ok((t, _)) = make_anisotropic(&omega, &reference, pi.source().j()) {
                data["perturbation_t"] = Value::String(t.canonical_text());
            }
        }
        match split_omega(&pi, &omega) {
            Ok(split) => {
                let checks = split.checks(&pi);
                let ok = checks.all_pass(pi.fiber_dim(), pi.target().real_dim());
                data["checks"] = serde_json::to_value(&checks).unwrap();
                data["alpha"] = Value::String(split.alpha.to_text());
                data["pf_omega_w"] = Value::String(split.pf_omega_w.canonical_text());
                let status = if ok || !anisotropic { Status::Pass } else { Status::Fail };
                let mut r = result("split", status, format!("W ⊕ W^⊥ with dim W = {}", split.fiber_dim()), data);
                if !ok && !anisotropic {
                    r.reason = Some("ω̂ is not anisotropic; split properties are not predicted".into());
                }
                r
            }
            Err(AnalysisError::DegenerateSplit) if !anisotropic => {
                let mut r = skipped("split", "ω̂ is not anisotropic and W meets W^⊥");
                r.data = data;
                r
            }
            Err(e) => {
                let mut r = result("split", Status::Fail, String::new(), data);
                r.reason = Some(e.to_string());
                r
            }
        }
    }

    fn check_theorem1(&mut self) -> CheckResult {
        let (pi, omega) = match self.projection().cloned().and_then(|pi| self.omega().map(|o| (pi, o))) {
            Ok(x) => x,
            Err(e) => return skipped("theorem1", e),
        };
        let cap = u128::from(self.scenario.budgets.terms);
        let mut per_q = Vec::new();
        let mut summary = Vec::new();
        let (mut failed, mut refused) = (false, false);
        for &q in &self.scenario.q {
            match theorem1(&pi, &omega, q, self.scenario.strategy, cap, true) {
                Ok(report) => {
                    let failures = report.failures();
                    failed |= !failures.is_empty();
                    summary.push(format!("q={q}: image {} ≤ {}", report.image_dim, report.h11_target));
                    if report.strategy.expansion_dependent {
                        self.notes.push(format!("theorem1 q={q}: computed by the two-term expansion only"));
                    }
                    per_q.push(json!({ "q": q, "status": if failures.is_empty() { "pass" } else { "fail" },
                                       "failures": failures, "report": report }));
                }
                Err(AnalysisError::BudgetExceeded { estimate, cap }) => {
                    refused = true;
                    summary.push(format!("q={q}: refused"));
                    per_q.push(json!({ "q": q, "status": "refused",
                                       "reason": format!("direct strategy needs {estimate} terms, cap {cap}") }));
                }
                Err(e) => {
                    failed = true;
                    per_q.push(json!({ "q": q, "status": "fail", "reason": e.to_string() }));
                }
            }
        }
        let status = if failed {
            Status::Fail
        } else if refused {
            Status::Refused
        } else {
            Status::Pass
        };
        result("theorem1", status, summary.join("; "), json!({ "per_q": per_q }))
    }

    fn check_iota(&mut self) -> CheckResult {
        if self.resolved.custom.is_some() {
            return skipped("iota", "needs the Sampson projection");
        }
        let (pi, omega) = match self.projection().cloned().and_then(|pi| self.omega().map(|o| (pi, o))) {
            Ok(x) => x,
            Err(e) => return skipped("iota", e),
        };
        let w = self.weil().unwrap().clone();
        let anisotropic = anisotropy_check(&omega, pi.source().j());
        let cap = u128::from(self.scenario.budgets.terms);
        match sampson_iota(&w, &pi, std::slice::from_ref(&omega), self.scenario.strategy, cap) {
            Ok(report) => {
                self.notes.push(format!("iota: {}", report.degree_note));
                if report.strategy.expansion_dependent {
                    self.notes.push("iota: computed by the two-term expansion only".into());
                }
                let status = if anisotropic && !report.bound_holds { Status::Fail } else { Status::Pass };
                result(
                    "iota",
                    status,
                    format!("rank {} of h^{{p,p}} = {}", report.rank, report.h_pp_source),
                    serde_json::to_value(&report).unwrap(),
                )
            }
            Err(AnalysisError::DegenerateCase(reason)) => skipped("iota", reason),
            Err(AnalysisError::BudgetExceeded { estimate, cap }) => CheckResult {
                name: "iota",
                status: Status::Refused,
                reason: Some(format!("direct strategy needs {estimate} terms, cap {cap}")),
                summary: String::new(),
                data: Value::Null,
            },
            Err(e) => {
                let mut r = result("iota", Status::Fail, String::new(), Value::Null);
                r.reason = Some(e.to_string());
                r
            }
        }
    }

    fn check_modified(&mut self) -> CheckResult {
        let pi = match self.projection() {
            Ok(pi) => pi.clone(),
            Err(e) => return skipped("modified", e),
        };
        let budget = usize::try_from(self.scenario.budgets.monomials).unwrap_or(usize::MAX);
        let mut reports = Vec::new();
        let mut summary = Vec::new();
        for &q in &self.scenario.q {
            match modified_approach_probe(&pi, q, budget) {
                Ok(r) => {
                    summary.push(format!("q={q}: {}/{}", r.span_dim, r.target_dim));
                    reports.push(serde_json::to_value(&r).unwrap());
                }
                Err(e) => {
                    let mut r = result("modified", Status::Fail, String::new(), Value::Null);
                    r.reason = Some(e.to_string());
                    return r;
                }
            }
        }
        result("modified", Status::Pass, summary.join("; "), json!({ "per_q": reports }))
    }
}

/// Execute every requested check; `timings` adds wall-clock data to the report.
pub fn run(scenario: &Scenario, timings: bool) -> Result<Report, ScenarioError> {
    let resolved = scenario.resolve()?;
    let mut pipeline = Pipeline {
        scenario,
        resolved,
        validation: None,
        weil: None,
        projection: None,
        omega: None,
        notes: Vec::new(),
    };
    let mut report = Report::new(scenario.clone());
    let mut clock = BTreeMap::new();
    for name in scenario.ordered_checks() {
        let start = Instant::now();
        let r = pipeline.run_check(name);
        clock.insert(name.to_string(), start.elapsed().as_millis() as u64);
        report.checks.push(r);
    }
    report.notes = pipeline.notes;
    if timings {
        report.timings_ms = Some(clock);
    }
    Ok(report)
}
