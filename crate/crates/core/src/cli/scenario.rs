//! Scenario files: what to build and which checks to run.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::abelian::PolarizedAbelianVariety;
use crate::analysis::{Strategy, DEFAULT_TERM_BUDGET};
use crate::linalg::Matrix;
use crate::scalar::{binomial, parse_rational, Scalar, Q};

/// Checks in the order they run.
pub const CHECK_ORDER: [&str; 8] = ["validate", "weil", "projection", "lefschetz", "split", "theorem1", "iota", "modified"];

pub const DEFAULT_MONOMIAL_BUDGET: u64 = 10_000;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ScenarioError {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invalid scenario: {field}: {message}")]
    Validation { field: String, message: String },
}

fn invalid(field: impl Into<String>, message: impl Into<String>) -> ScenarioError {
    ScenarioError::Validation { field: field.into(), message: message.into() }
}

/// A matrix entry: an integer or an exact scalar string such as `"1/2"` or `"1+sqrt(2)"`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Entry {
    Int(i64),
    Text(String),
}

impl Entry {
    fn rational(&self) -> Option<Q> {
        match self {
            Entry::Int(n) => Some(Q::from_integer((*n).into())),
            Entry::Text(s) => parse_rational(s).ok(),
        }
    }

    fn scalar(&self) -> Option<Scalar> {
        match self {
            Entry::Int(n) => Some(Scalar::int(*n)),
            Entry::Text(s) => s.parse().ok(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InlineVariety {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    #[serde(rename = "J")]
    pub j: Vec<Vec<Entry>>,
    #[serde(rename = "E")]
    pub e: Vec<Vec<Entry>>,
    /// Radicand of the real field; absent for ℚ.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum VarietySpec {
    Label(String),
    Inline(InlineVariety),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CustomSurjection {
    pub source: VarietySpec,
    pub matrix: Vec<Vec<Entry>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SurjectionSpec {
    Named(String),
    Custom(CustomSurjection),
}

impl Default for SurjectionSpec {
    fn default() -> Self {
        SurjectionSpec::Named("sampson".into())
    }
}

/// `gram` is the source polarization, `pullback` is `π*ω` and `zero` is 0.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum OmegaSpec {
    Named(String),
    Inline { matrix: Vec<Vec<Entry>> },
}

impl Default for OmegaSpec {
    fn default() -> Self {
        OmegaSpec::Named("gram".into())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Budgets {
    #[serde(default = "default_terms")]
    pub terms: u64,
    #[serde(default = "default_monomials")]
    pub monomials: u64,
}

fn default_terms() -> u64 {
    DEFAULT_TERM_BUDGET as u64
}

fn default_monomials() -> u64 {
    DEFAULT_MONOMIAL_BUDGET
}

impl Default for Budgets {
    fn default() -> Self {
        Budgets { terms: default_terms(), monomials: default_monomials() }
    }
}

fn default_q() -> Vec<usize> {
    vec![1]
}

fn default_checks() -> Vec<String> {
    CHECK_ORDER.iter().map(|s| s.to_string()).collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub variety: VarietySpec,
    pub p: usize,
    #[serde(default = "default_q", alias = "q_list")]
    pub q: Vec<usize>,
    #[serde(default)]
    pub surjection: SurjectionSpec,
    #[serde(default)]
    pub omega_hat: OmegaSpec,
    #[serde(default = "default_checks")]
    pub checks: Vec<String>,
    #[serde(default)]
    pub strategy: Strategy,
    #[serde(default)]
    pub budgets: Budgets,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
}

/// Everything a run needs, built from a valid scenario.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub variety: PolarizedAbelianVariety,
    pub custom: Option<(PolarizedAbelianVariety, Matrix<Q>)>,
    pub omega_matrix: Option<Matrix<Q>>,
    pub source_n: usize,
}

fn rational_matrix(field: &str, rows: &[Vec<Entry>]) -> Result<Matrix<Q>, ScenarioError> {
    let width = rows.first().map_or(0, Vec::len);
    let mut out = Vec::with_capacity(rows.len());
    for (r, row) in rows.iter().enumerate() {
        if row.len() != width {
            return Err(invalid(field, format!("row {r} has {} entries, expected {width}", row.len())));
        }
        let parsed: Option<Vec<Q>> = row.iter().map(Entry::rational).collect();
        out.push(parsed.ok_or_else(|| invalid(field, format!("row {r} has an entry that is not a rational")))?);
    }
    Ok(Matrix::from_rows(out))
}

fn resolve_variety(field: &str, spec: &VarietySpec) -> Result<PolarizedAbelianVariety, ScenarioError> {
    match spec {
        VarietySpec::Label(label) => {
            PolarizedAbelianVariety::catalog(label).map_err(|_| invalid(field, format!("unknown catalog label {label:?}")))
        }
        VarietySpec::Inline(v) => {
            let mut j_rows = Vec::new();
            for (r, row) in v.j.iter().enumerate() {
                let parsed: Option<Vec<Scalar>> = row.iter().map(Entry::scalar).collect();
                let parsed = parsed.ok_or_else(|| invalid(format!("{field}.J"), format!("row {r} has an unparseable scalar")))?;
                j_rows.push(parsed);
            }
            let dim = j_rows.len();
            if dim == 0 || dim % 2 == 1 || j_rows.iter().any(|r| r.len() != dim) {
                return Err(invalid(format!("{field}.J"), "must be a square matrix of even size"));
            }
            for x in j_rows.iter().flatten() {
                match (x.radicand(), v.d) {
                    (Some(r), Some(d)) if r != d => {
                        return Err(invalid(format!("{field}.d"), format!("entry uses sqrt({r}) but d = {d}")))
                    }
                    (Some(r), None) => return Err(invalid(format!("{field}.d"), format!("entry uses sqrt({r}); declare d = {r}"))),
                    _ => {}
                }
            }
            let e = rational_matrix(&format!("{field}.E"), &v.e)?;
            if e.rows() != dim || e.cols() != dim {
                return Err(invalid(format!("{field}.E"), format!("must be {dim}×{dim}")));
            }
            let label = v.label.clone().unwrap_or_else(|| "inline".into());
            PolarizedAbelianVariety::new(label, Matrix::from_rows(j_rows), e).map_err(|err| invalid(field, err.to_string()))
        }
    }
}

impl Scenario {
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("scenario serializes")
    }

    /// Structural validation; mathematical properties are left to the checks.
    pub fn resolve(&self) -> Result<Resolved, ScenarioError> {
        let variety = resolve_variety("variety", &self.variety)?;
        let n = variety.n();
        if self.p % 2 == 0 || self.p == 0 || self.p >= 2 * n {
            return Err(invalid("p", format!("must be odd with 0 < p < {}", 2 * n)));
        }
        for c in &self.checks {
            if !CHECK_ORDER.contains(&c.as_str()) {
                return Err(invalid("checks", format!("unknown check {c:?}; expected one of {}", CHECK_ORDER.join(", "))));
            }
        }
        if self.checks.is_empty() {
            return Err(invalid("checks", "no checks requested"));
        }
        let custom = match &self.surjection {
            SurjectionSpec::Named(name) if name == "sampson" => None,
            SurjectionSpec::Named(name) => return Err(invalid("surjection", format!("unknown surjection {name:?}"))),
            SurjectionSpec::Custom(c) => {
                let source = resolve_variety("surjection.source", &c.source)?;
                let m = rational_matrix("surjection.matrix", &c.matrix)?;
                if m.rows() != variety.real_dim() || m.cols() != source.real_dim() {
                    return Err(invalid(
                        "surjection.matrix",
                        format!("must be {}×{}", variety.real_dim(), source.real_dim()),
                    ));
                }
                Some((source, m))
            }
        };
        let source_n = match &custom {
            Some((s, _)) => s.n(),
            None => {
                let half = binomial(2 * n as i64, self.p as i64) / 2;
                usize::try_from(half).map_err(|_| invalid("p", "Weil Jacobian too large"))?
            }
        };
        let needs_q = self.checks.iter().any(|c| c == "theorem1" || c == "modified");
        for &q in &self.q {
            if q == 0 || q > n {
                return Err(invalid("q", format!("value {q} outside 1..={n}")));
            }
            if needs_q && q + 1 > source_n {
                return Err(invalid("q", format!("value {q} needs N − q − 1 ≥ 0 with N = {source_n}")));
            }
        }
        if needs_q && self.q.is_empty() {
            return Err(invalid("q", "theorem1 and modified need at least one q"));
        }
        let omega_matrix = match &self.omega_hat {
            OmegaSpec::Named(name) if ["gram", "pullback", "zero"].contains(&name.as_str()) => None,
            OmegaSpec::Named(name) => {
                return Err(invalid("omega_hat", format!("unknown form {name:?}; expected gram, pullback, zero or a matrix")))
            }
            OmegaSpec::Inline { matrix } => {
                let m = rational_matrix("omega_hat.matrix", matrix)?;
                if m.rows() != 2 * source_n || m.cols() != 2 * source_n || !m.is_alternating() {
                    return Err(invalid("omega_hat.matrix", format!("must be alternating {0}×{0}", 2 * source_n)));
                }
                Some(m)
            }
        };
        if self.budgets.terms == 0 || self.budgets.monomials == 0 {
            return Err(invalid("budgets", "budgets must be positive"));
        }
        Ok(Resolved { variety, custom, omega_matrix, source_n })
    }

    /// Requested checks in execution order, without duplicates.
    pub fn ordered_checks(&self) -> Vec<&'static str> {
        CHECK_ORDER.iter().copied().filter(|c| self.checks.iter().any(|x| x == c)).collect()
    }
}

/// Parse and validate; the two failure kinds map to different exit codes.
pub fn parse_scenario(text: &str) -> Result<Scenario, ScenarioError> {
    let scenario: Scenario = toml::from_str(text).map_err(|e| ScenarioError::Parse(e.to_string()))?;
    scenario.resolve()?;
    Ok(scenario)
}
