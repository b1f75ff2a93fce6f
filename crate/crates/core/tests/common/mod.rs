//! Independent oracles shared by the integration tests.
//!
//! Nothing here calls into the library's linear algebra: ranks, determinants,
//! Pfaffians and invariant-form bases are recomputed from scratch.

#![allow(dead_code)]

use std::path::PathBuf;

use hodgeprobe::abelian::PolarizedAbelianVariety;
use hodgeprobe::exterior::{KForm, MultiIndex};
use hodgeprobe::linalg::Matrix;
use hodgeprobe::scalar::Q;
use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

pub fn rat(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

pub fn dense(m: &Matrix<Q>) -> Vec<Vec<Q>> {
    (0..m.rows()).map(|i| (0..m.cols()).map(|j| m.get(i, j).clone()).collect()).collect()
}

pub fn rational_j(a: &PolarizedAbelianVariety) -> Vec<Vec<Q>> {
    dense(&a.j().to_rational().expect("rational complex structure"))
}

pub fn mat_mul(a: &[Vec<Q>], b: &[Vec<Q>]) -> Vec<Vec<Q>> {
    let inner = b.len();
    let cols = b.first().map_or(0, Vec::len);
    a.iter()
        .map(|row| {
            (0..cols)
                .map(|j| (0..inner).fold(Q::zero(), |acc, k| acc + &row[k] * &b[k][j]))
                .collect()
        })
        .collect()
}

pub fn transpose(a: &[Vec<Q>]) -> Vec<Vec<Q>> {
    let cols = a.first().map_or(0, Vec::len);
    (0..cols).map(|j| a.iter().map(|r| r[j].clone()).collect()).collect()
}

/// Row rank by plain Gaussian elimination.
pub fn rank(rows: &[Vec<Q>]) -> usize {
    let mut m: Vec<Vec<Q>> = rows.to_vec();
    let cols = m.first().map_or(0, Vec::len);
    let mut r = 0;
    for c in 0..cols {
        let Some(p) = (r..m.len()).find(|&i| !m[i][c].is_zero()) else { continue };
        m.swap(r, p);
        let pivot = m[r][c].clone();
        for i in 0..m.len() {
            if i != r && !m[i][c].is_zero() {
                let f = &m[i][c] / &pivot;
                for k in c..cols {
                    let delta = &f * &m[r][k];
                    m[i][k] -= delta;
                }
            }
        }
        r += 1;
    }
    r
}

/// Basis of the solution space of `A x = 0`, as dense vectors.
pub fn nullspace(a: &[Vec<Q>], cols: usize) -> Vec<Vec<Q>> {
    let mut m: Vec<Vec<Q>> = a.to_vec();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        let Some(p) = (r..m.len()).find(|&i| !m[i][c].is_zero()) else { continue };
        m.swap(r, p);
        let inv = Q::one() / &m[r][c];
        for k in 0..cols {
            m[r][k] = &m[r][k] * &inv;
        }
        for i in 0..m.len() {
            if i != r && !m[i][c].is_zero() {
                let f = m[i][c].clone();
                for k in 0..cols {
                    let delta = &f * &m[r][k];
                    m[i][k] -= delta;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    let free: Vec<usize> = (0..cols).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut v = vec![Q::zero(); cols];
            v[f] = Q::one();
            for (row, &pc) in pivots.iter().enumerate() {
                v[pc] = -m[row][f].clone();
            }
            v
        })
        .collect()
}

pub fn det(a: &[Vec<Q>]) -> Q {
    let n = a.len();
    let mut m = a.to_vec();
    let mut d = Q::one();
    for c in 0..n {
        let Some(p) = (c..n).find(|&i| !m[i][c].is_zero()) else { return Q::zero() };
        if p != c {
            m.swap(p, c);
            d = -d;
        }
        d *= &m[c][c];
        for i in c + 1..n {
            let f = &m[i][c] / &m[c][c];
            for k in c..n {
                let delta = &f * &m[c][k];
                m[i][k] -= delta;
            }
        }
    }
    d
}

/// Pfaffian by expansion along the first row.
pub fn pfaffian(a: &[Vec<Q>]) -> Q {
    let n = a.len();
    if n == 0 {
        return Q::one();
    }
    if n % 2 == 1 {
        return Q::zero();
    }
    let mut total = Q::zero();
    for j in 1..n {
        if a[0][j].is_zero() {
            continue;
        }
        let keep: Vec<usize> = (1..n).filter(|&k| k != j).collect();
        let minor: Vec<Vec<Q>> = keep.iter().map(|&r| keep.iter().map(|&c| a[r][c].clone()).collect()).collect();
        let term = &a[0][j] * pfaffian(&minor);
        if j % 2 == 1 {
            total += term;
        } else {
            total -= term;
        }
    }
    total
}

pub fn submatrix(a: &[Vec<Q>], rows: &[usize], cols: &[usize]) -> Vec<Vec<Q>> {
    rows.iter().map(|&r| cols.iter().map(|&c| a[r][c].clone()).collect()).collect()
}

/// `k`-subsets of `0..n` as ascending bitmasks.
pub fn subsets(n: usize, k: usize) -> Vec<u64> {
    (0u64..(1u64 << n)).filter(|m| m.count_ones() as usize == k).collect()
}

pub fn bits(mask: u64) -> Vec<usize> {
    (0..64).filter(|i| mask >> i & 1 == 1).collect()
}

pub fn factorial(n: usize) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, k| acc * BigInt::from(k))
}

pub fn binomial(n: i64, k: i64) -> BigInt {
    if k < 0 || n < 0 || k > n {
        return BigInt::zero();
    }
    factorial(n as usize) / (factorial(k as usize) * factorial((n - k) as usize))
}

/// Coefficient of `dx^K` in `ω^m`, `ω = Σ_{i<j} E_ij dxⁱ∧dxʲ`: `m!·Pf(E_K)`.
pub fn omega_power_coefficient(e: &[Vec<Q>], k: u64) -> Q {
    let idx = bits(k);
    let m = idx.len() / 2;
    Q::from_integer(factorial(m)) * pfaffian(&submatrix(e, &idx, &idx))
}

/// Sampson's matrix: entry `(j, I)` is the coefficient of `dx^I` in `dxʲ ∧ ω^{(p−1)/2}`.
pub fn sampson_oracle(e: &[Vec<Q>], p: usize) -> Vec<Vec<Q>> {
    let dim = e.len();
    let columns = subsets(dim, p);
    (0..dim)
        .map(|j| {
            columns
                .iter()
                .map(|&i| {
                    if i >> j & 1 == 0 {
                        return Q::zero();
                    }
                    let rest = i & !(1 << j);
                    let below = (rest & ((1u64 << j) - 1)).count_ones();
                    let c = omega_power_coefficient(e, rest);
                    if below % 2 == 1 {
                        -c
                    } else {
                        c
                    }
                })
                .collect()
        })
        .collect()
}

/// Basis of alternating `M` with `JᵀMJ = M`, i.e. rational (1,1) forms when `J` is rational.
pub fn invariant_two_forms(j: &[Vec<Q>]) -> Vec<KForm<Q>> {
    let dim = j.len();
    let pairs: Vec<(usize, usize)> = (0..dim).flat_map(|a| (a + 1..dim).map(move |b| (a, b))).collect();
    // (JᵀMJ − M)_{xy} is linear in the unknowns M_ab, a < b
    let mut eqs = Vec::new();
    for x in 0..dim {
        for y in x + 1..dim {
            let row: Vec<Q> = pairs
                .iter()
                .map(|&(a, b)| {
                    let mut v = &j[a][x] * &j[b][y] - &j[b][x] * &j[a][y];
                    if (a, b) == (x, y) {
                        v -= Q::one();
                    }
                    v
                })
                .collect();
            eqs.push(row);
        }
    }
    nullspace(&eqs, pairs.len())
        .into_iter()
        .map(|v| {
            let terms = pairs
                .iter()
                .zip(v)
                .filter(|(_, x)| !x.is_zero())
                .map(|(&(a, b), x)| (MultiIndex((1 << a) | (1 << b)), x));
            KForm::from_terms(dim, 2, terms)
        })
        .collect()
}

/// Dense coordinates of a form over all `degree`-subsets of `0..ambient`.
pub fn coords(u: &KForm<Q>, ambient: usize, degree: usize) -> Vec<Q> {
    subsets(ambient, degree).into_iter().map(|m| u.coefficient(m)).collect()
}

pub fn rank_of_forms(forms: &[KForm<Q>], ambient: usize, degree: usize) -> usize {
    let rows: Vec<Vec<Q>> = forms.iter().map(|f| coords(f, ambient, degree)).collect();
    if rows.is_empty() {
        0
    } else {
        rank(&rows)
    }
}

/// Products `h₁ ∧ … ∧ h_m` over multisets of basis classes.
pub fn divisor_products(basis: &[KForm<Q>], m: usize, ambient: usize) -> Vec<KForm<Q>> {
    if m == 0 {
        return vec![KForm::constant(ambient, Q::one())];
    }
    let mut out = Vec::new();
    let mut stack: Vec<(usize, KForm<Q>)> = vec![(0, KForm::constant(ambient, Q::one()))];
    for _ in 0..m {
        let mut next = Vec::new();
        for (start, f) in &stack {
            for (i, h) in basis.iter().enumerate().skip(*start) {
                next.push((i, f.wedge(h).unwrap()));
            }
        }
        stack = next;
    }
    out.extend(stack.into_iter().map(|(_, f)| f));
    out
}

/// Whether every form in `candidates` lies in the span of `span`.
pub fn span_contains(span: &[KForm<Q>], candidates: &[KForm<Q>], ambient: usize, degree: usize) -> bool {
    let base = rank_of_forms(span, ambient, degree);
    let mut all = span.to_vec();
    all.extend(candidates.iter().cloned());
    rank_of_forms(&all, ambient, degree) == base
}

pub fn is_positive_definite(s: &[Vec<Q>]) -> bool {
    (1..=s.len()).all(|k| {
        let idx: Vec<usize> = (0..k).collect();
        det(&submatrix(s, &idx, &idx)).is_positive()
    })
}

pub fn is_definite(s: &[Vec<Q>]) -> bool {
    let n = s.len();
    let minors: Vec<Q> = (1..=n).map(|k| det(&submatrix(s, &(0..k).collect::<Vec<_>>(), &(0..k).collect::<Vec<_>>()))).collect();
    let positive = minors.iter().all(|m| m.is_positive());
    let negative = minors.iter().enumerate().all(|(k, m)| if k % 2 == 0 { m.is_negative() } else { m.is_positive() });
    positive || negative
}

pub fn scenario_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("scenarios")
}

pub fn schema_path() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("schema").join("report.schema.json")
}

pub fn coordinate_projection(source: usize, target: usize) -> Matrix<Q> {
    Matrix::from_fn(target, source, |r, c| if r == c { Q::one() } else { Q::zero() })
}

pub struct CliOutput {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

pub fn run_cli(args: &[&str]) -> CliOutput {
    let out = std::process::Command::new(env!("CARGO_BIN_EXE_hodgeprobe"))
        .args(args)
        .output()
        .expect("binary runs");
    CliOutput {
        code: out.status.code().unwrap_or(-1),
        stdout: String::from_utf8_lossy(&out.stdout).into_owned(),
        stderr: String::from_utf8_lossy(&out.stderr).into_owned(),
    }
}

pub fn report_schema() -> jsonschema::JSONSchema {
    let text = std::fs::read_to_string(schema_path()).expect("schema file");
    let value: serde_json::Value = serde_json::from_str(&text).expect("schema is JSON");
    jsonschema::JSONSchema::compile(&value).expect("schema compiles")
}

/// Schema violations, rendered; empty when valid.
pub fn schema_errors(schema: &jsonschema::JSONSchema, report: &serde_json::Value) -> Vec<String> {
    match schema.validate(report) {
        Ok(()) => Vec::new(),
        Err(errors) => errors.map(|e| format!("{} at {}", e, e.instance_path)).collect(),
    }
}

/// Scenario files shipped with the crate and the exit code each must produce.
pub fn shipped_scenarios() -> Vec<(PathBuf, i32)> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(scenario_dir())
        .expect("scenario dir")
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "toml"))
        .collect();
    files.sort();
    files
        .into_iter()
        .map(|p| {
            let code = if p.file_name().unwrap().to_string_lossy().contains("flipped") { 1 } else { 0 };
            (p, code)
        })
        .collect()
}
