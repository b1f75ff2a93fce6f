//! Polarized abelian varieties on the standard lattice `ℤ^{2n}`.
//!
//! A variety is the pair `(J, E)`: a complex structure on `ℝ^{2n}` with
//! entries in `F = ℚ(√d)` and an integral alternating form satisfying the
//! Riemann relations. Hodge-theoretic queries are answered with exact
//! projectors over `F(i)`.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex};

use crate::exterior::{multiset_tuples, FormSpan, KForm, MultiIndex, SubsetIndex};
use crate::linalg::{is_hermitian_positive_definite, is_positive_definite, rational_kernel_of_scalar_rows, EchelonBasis, Matrix, SparseVec};
use num_traits::{One, Zero};

use crate::scalar::{Scalar, Q};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum AbelianError {
    #[error("unknown catalog label `{0}`")]
    UnknownLabel(String),
    #[error("shape error: {0}")]
    Shape(String),
    #[error("p = {p} must be odd with 0 < p < {two_n}")]
    InvalidP { p: usize, two_n: usize },
    #[error("degree {0} out of range")]
    InvalidDegree(usize),
    #[error("bidegree ({a},{b}) does not match form degree {degree}")]
    BidegreeMismatch { a: usize, b: usize, degree: usize },
}

/// Rational classes of type `(k,k)`.
#[derive(Debug, Clone, PartialEq)]
pub struct HodgeBasis {
    pub k: usize,
    pub classes: Vec<KForm<Q>>,
}

impl HodgeBasis {
    pub fn dim(&self) -> usize {
        self.classes.len()
    }
}

/// Pass/fail for one Riemann relation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AxiomCheck {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValidationReport {
    pub checks: Vec<AxiomCheck>,
}

impl ValidationReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> Vec<&'static str> {
        self.checks.iter().filter(|c| !c.passed).map(|c| c.name).collect()
    }
}

#[derive(Clone)]
pub struct PolarizedAbelianVariety {
    label: String,
    n: usize,
    j: Matrix<Scalar>,
    e: Matrix<Q>,
    hodge_cache: Arc<Mutex<HashMap<usize, HodgeBasis>>>,
}

impl PartialEq for PolarizedAbelianVariety {
    fn eq(&self, other: &Self) -> bool {
        self.label == other.label && self.j == other.j && self.e == other.e
    }
}

impl fmt::Debug for PolarizedAbelianVariety {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PolarizedAbelianVariety")
            .field("label", &self.label)
            .field("n", &self.n)
            .field("J", &self.j)
            .field("E", &self.e)
            .finish()
    }
}

pub const CATALOG_LABELS: [&str; 5] = ["A1", "A2", "A3", "B2", "S_sqrt2"];

impl PolarizedAbelianVariety {
    /// Shape checks only; the Riemann relations are checked by [`Self::validate`].
    pub fn new(label: impl Into<String>, j: Matrix<Scalar>, e: Matrix<Q>) -> Result<Self, AbelianError> {
        let dim = j.rows();
        if !j.is_square() || !e.is_square() || e.rows() != dim {
            return Err(AbelianError::Shape("J and E must be square of equal size".into()));
        }
        if dim == 0 || dim % 2 == 1 {
            return Err(AbelianError::Shape(format!("real dimension {dim} must be positive and even")));
        }
        if dim > 64 {
            return Err(AbelianError::Shape(format!("real dimension {dim} exceeds 64")));
        }
        Ok(PolarizedAbelianVariety { label: label.into(), n: dim / 2, j, e, hodge_cache: Default::default() })
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn real_dim(&self) -> usize {
        2 * self.n
    }

    pub fn j(&self) -> &Matrix<Scalar> {
        &self.j
    }

    pub fn e(&self) -> &Matrix<Q> {
        &self.e
    }

    /// The radicand `d` when `J` has entries outside ℚ.
    pub fn radicand(&self) -> Option<u64> {
        self.j.entries().find_map(Scalar::radicand)
    }

    /// Block-diagonal product, coordinates concatenated.
    pub fn product(label: impl Into<String>, factors: &[PolarizedAbelianVariety]) -> Result<Self, AbelianError> {
        let dim: usize = factors.iter().map(|f| f.real_dim()).sum();
        let mut j = Matrix::<Scalar>::zeros(dim, dim);
        let mut e = Matrix::<Q>::zeros(dim, dim);
        let mut offset = 0;
        for f in factors {
            for r in 0..f.real_dim() {
                for c in 0..f.real_dim() {
                    j.set(offset + r, offset + c, f.j.get(r, c).clone());
                    e.set(offset + r, offset + c, f.e.get(r, c).clone());
                }
            }
            offset += f.real_dim();
        }
        PolarizedAbelianVariety::new(label, j, e)
    }

    /// Built-in examples; `A1^k` gives the k-fold power of the Gaussian curve.
    pub fn catalog(label: &str) -> Result<Self, AbelianError> {
        let int = |rows: &[&[i64]]| Matrix::from_i64_rows(rows);
        match label {
            "A1" => PolarizedAbelianVariety::new(
                "A1",
                int(&[&[0, -1], &[1, 0]]).to_scalar(),
                int(&[&[0, 1], &[-1, 0]]),
            ),
            "A2" | "A3" => {
                let k = if label == "A2" { 2 } else { 3 };
                PolarizedAbelianVariety::product(label, &vec![Self::catalog("A1")?; k])
            }
            "B2" => PolarizedAbelianVariety::new(
                "B2",
                int(&[&[0, 0, -1, 0], &[0, 0, 0, -1], &[1, 0, 0, 0], &[0, 1, 0, 0]]).to_scalar(),
                int(&[&[0, 0, 1, 0], &[0, 0, 0, 2], &[-1, 0, 0, 0], &[0, -2, 0, 0]]),
            ),
            "S_sqrt2" => {
                // J = [[0, −Y⁻¹], [Y, 0]] with Y = [[1+√2, 1], [1, 1]]
                let s = Scalar::sqrt(2);
                let half = Scalar::rational(crate::scalar::qf(1, 2));
                let one = Scalar::one();
                let zero = Scalar::zero();
                let y = [[one.clone() + s.clone(), one.clone()], [one.clone(), one.clone()]];
                let y_inv = [
                    [s.clone() * half.clone(), -(s.clone() * half.clone())],
                    [-(s.clone() * half.clone()), (Scalar::int(2) + s.clone()) * half.clone()],
                ];
                let j = Matrix::from_fn(4, 4, |r, c| match (r < 2, c < 2) {
                    (true, false) => -y_inv[r][c - 2].clone(),
                    (false, true) => y[r - 2][c].clone(),
                    _ => zero.clone(),
                });
                PolarizedAbelianVariety::new(
                    "S_sqrt2",
                    j,
                    int(&[&[0, 0, 1, 0], &[0, 0, 0, 1], &[-1, 0, 0, 0], &[0, -1, 0, 0]]),
                )
            }
            _ => {
                if let Some(k) = label.strip_prefix("A1^").and_then(|k| k.parse::<usize>().ok()) {
                    if (1..=32).contains(&k) {
                        return PolarizedAbelianVariety::product(label, &vec![Self::catalog("A1")?; k]);
                    }
                }
                Err(AbelianError::UnknownLabel(label.to_string()))
            }
        }
    }

    /// The four Riemann relations, each reported separately.
    pub fn validate(&self) -> ValidationReport {
        let dim = self.real_dim();
        let j2 = self.j.mul(&self.j);
        let complex = j2 == Matrix::<Scalar>::identity(dim).neg();
        let es = self.e.to_scalar();
        let invariant = self.j.transpose().mul(&es).mul(&self.j) == es;
        let integral = self.e.is_integral() && self.e.is_alternating();
        let sym = es.mul(&self.j);
        let (positive, pos_detail) = match is_positive_definite(&sym) {
            Ok(true) => (true, "E(x,Jy) symmetric positive definite".to_string()),
            Ok(false) => (false, "E(x,Jy) is not positive definite".to_string()),
            Err(_) => (false, "E(x,Jy) is not symmetric".to_string()),
        };
        let verdict = |ok: bool, good: &str, bad: &str| if ok { good.to_string() } else { bad.to_string() };
        ValidationReport {
            checks: vec![
                AxiomCheck {
                    name: "complex_structure",
                    passed: complex,
                    detail: verdict(complex, "J² = −I", "J² ≠ −I"),
                },
                AxiomCheck {
                    name: "invariance",
                    passed: invariant,
                    detail: verdict(invariant, "JᵀEJ = E", "JᵀEJ ≠ E"),
                },
                AxiomCheck { name: "positivity", passed: positive, detail: pos_detail },
                AxiomCheck {
                    name: "integrality",
                    passed: integral,
                    detail: verdict(integral, "E integral alternating", "E not integral alternating"),
                },
            ],
        }
    }

    /// `ω = Σ_{i<j} E_ij dxⁱ∧dxʲ`, so `ω(x, y) = E(x, y)`.
    pub fn kahler_form(&self) -> KForm<Q> {
        KForm::from_alternating_matrix(&self.e)
    }

    /// Complex basis: greedily chosen standard vectors `e_c` with `e_c, J e_c, …` independent.
    pub fn complex_basis(&self) -> Vec<usize> {
        let dim = self.real_dim();
        let mut span = EchelonBasis::<Scalar>::new(dim);
        let mut chosen = Vec::new();
        for c in 0..dim {
            let mut v = vec![Scalar::zero(); dim];
            v[c] = Scalar::one();
            let jv = self.j.column(c);
            let mut trial = span.clone();
            if trial.insert_dense(&v) && trial.insert_dense(&jv) {
                span = trial;
                chosen.push(c);
            }
            if chosen.len() == self.n {
                break;
            }
        }
        chosen
    }

    /// `H(x, y) = E(x, Jy) − i E(x, y)` on [`Self::complex_basis`].
    pub fn hermitian_form(&self) -> Matrix<Scalar> {
        let basis = self.complex_basis();
        let es = self.e.to_scalar();
        let ej = es.mul(&self.j);
        Matrix::from_fn(self.n, self.n, |a, b| {
            let (u, v) = (basis[a], basis[b]);
            ej.get(u, v).clone() - Scalar::i() * es.get(u, v).clone()
        })
    }

    pub fn hermitian_positive_definite(&self) -> bool {
        is_hermitian_positive_definite(&self.hermitian_form())
    }

    /// Projections of `dxⁱ` to types (1,0) and (0,1): `(I ∓ iJᵀ)/2`.
    fn type_projections(&self) -> (Vec<KForm<Scalar>>, Vec<KForm<Scalar>>) {
        let dim = self.real_dim();
        let half = Scalar::rational(crate::scalar::qf(1, 2));
        let mut holo = Vec::with_capacity(dim);
        let mut anti = Vec::with_capacity(dim);
        for i in 0..dim {
            let row = self.j.row(i);
            let make = |sign: i64| {
                let coeffs: Vec<Scalar> = (0..dim)
                    .map(|c| {
                        let delta = if c == i { Scalar::one() } else { Scalar::zero() };
                        (delta + Scalar::int(sign) * Scalar::i() * row[c].clone()) * half.clone()
                    })
                    .collect();
                KForm::from_covector(&coeffs)
            };
            holo.push(make(-1));
            anti.push(make(1));
        }
        (holo, anti)
    }

    /// Type `(a, b)` component of a complexified form.
    pub fn bidegree_component(&self, u: &KForm<Scalar>, a: usize, b: usize) -> Result<KForm<Scalar>, AbelianError> {
        if a + b != u.degree() {
            return Err(AbelianError::BidegreeMismatch { a, b, degree: u.degree() });
        }
        let (holo, anti) = self.type_projections();
        Ok(component_with(&holo, &anti, u, a, b))
    }

    /// ℚ-basis of the rational `(k,k)` classes: rational kernel of `u ↦ u − P_{k,k} u`.
    pub fn rational_hodge_classes(&self, k: usize) -> Result<HodgeBasis, AbelianError> {
        if k > self.n {
            return Err(AbelianError::InvalidDegree(k));
        }
        if let Some(hit) = self.hodge_cache.lock().unwrap().get(&k) {
            return Ok(hit.clone());
        }
        let dim = self.real_dim();
        let index = SubsetIndex::new(dim, 2 * k);
        let (holo, anti) = self.type_projections();
        let columns: Vec<KForm<Scalar>> = {
            use rayon::prelude::*;
            index
                .masks()
                .par_iter()
                .map(|&mask| {
                    let u = KForm::from_terms(dim, 2 * k, [(MultiIndex(mask), Scalar::one())]);
                    u.sub(&component_with(&holo, &anti, &u, k, k))
                })
                .collect()
        };
        let mut rows: Vec<SparseVec<Scalar>> = vec![Vec::new(); index.len()];
        for (col, r) in columns.iter().enumerate() {
            for (m, x) in r.terms() {
                rows[index.position(m.bits()).unwrap()].push((col, x.clone()));
            }
        }
        rows.retain(|r| !r.is_empty());
        let kernel = rational_kernel_of_scalar_rows(&rows, index.len());
        let classes = kernel.iter().map(|v| KForm::from_dense(dim, 2 * k, &index, v)).collect();
        let basis = HodgeBasis { k, classes };
        self.hodge_cache.lock().unwrap().insert(k, basis.clone());
        Ok(basis)
    }

    /// Rank of `u ↦ u ∧ ω^{(p−1)/2}` on 1-forms.
    pub fn lefschetz_rank(&self, p: usize) -> Result<usize, AbelianError> {
        let dim = self.real_dim();
        if p % 2 == 0 || p >= dim {
            return Err(AbelianError::InvalidP { p, two_n: dim });
        }
        let power = self.kahler_form().power((p - 1) / 2);
        let mut span = FormSpan::<Q>::new(dim, p);
        for i in 0..dim {
            span.insert(&KForm::basis(dim, &[i]).wedge(&power).unwrap());
        }
        Ok(span.dim())
    }

    /// Span of all `m`-fold products of rational (1,1) classes.
    pub fn divisor_power_span(&self, m: usize) -> Result<FormSpan<Q>, AbelianError> {
        if m > self.n {
            return Err(AbelianError::InvalidDegree(m));
        }
        let basis = self.rational_hodge_classes(1)?.classes;
        let mut span = FormSpan::new(self.real_dim(), 2 * m);
        if m == 0 {
            span.insert(&KForm::one(self.real_dim()));
            return Ok(span);
        }
        // prefix products are reused along the lexicographic enumeration
        let mut stack: Vec<(usize, KForm<Q>)> = Vec::new();
        for tuple in multiset_tuples(basis.len(), m) {
            let keep = stack.iter().zip(&tuple).take_while(|((i, _), t)| i == *t).count();
            stack.truncate(keep.min(m - 1));
            while stack.len() < m {
                let idx = tuple[stack.len()];
                let prev = stack.last().map_or_else(|| KForm::one(self.real_dim()), |(_, f)| f.clone());
                stack.push((idx, prev.wedge(&basis[idx]).unwrap()));
            }
            span.insert(&stack[m - 1].1);
        }
        Ok(span)
    }
}

/// Multiplicative extension of the degree-one type projections.
fn component_with(holo: &[KForm<Scalar>], anti: &[KForm<Scalar>], u: &KForm<Scalar>, a: usize, b: usize) -> KForm<Scalar> {
    let dim = u.ambient();
    let mut out = KForm::zero(dim, a + b);
    for (mask, c) in u.terms() {
        // partial[t] = product so far with t factors of type (1,0)
        let mut partial: Vec<Option<KForm<Scalar>>> = vec![None; a + 1];
        partial[0] = Some(KForm::constant(dim, c.clone()));
        for (done, i) in mask.indices().into_iter().enumerate() {
            let mut next: Vec<Option<KForm<Scalar>>> = vec![None; a + 1];
            for t in 0..=a.min(done + 1) {
                if done + 1 - t > b {
                    continue;
                }
                let mut acc: Option<KForm<Scalar>> = None;
                if t <= done {
                    if let Some(prev) = &partial[t] {
                        acc = Some(prev.wedge(&anti[i]).unwrap());
                    }
                }
                if t > 0 {
                    if let Some(prev) = &partial[t - 1] {
                        let w = prev.wedge(&holo[i]).unwrap();
                        acc = Some(match acc {
                            Some(x) => x.add(&w),
                            None => w,
                        });
                    }
                }
                next[t] = acc;
            }
            partial = next;
        }
        if let Some(piece) = &partial[a] {
            out = out.add(piece);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::q;

    fn cat(label: &str) -> PolarizedAbelianVariety {
        PolarizedAbelianVariety::catalog(label).unwrap()
    }

    #[test]
    fn catalog_validates() {
        for label in CATALOG_LABELS {
            let a = cat(label);
            assert!(a.validate().all_pass(), "{label}: {:?}", a.validate());
        }
        assert!(cat("A1^4").validate().all_pass());
        assert_eq!(cat("A1^4").n(), 4);
        assert!(matches!(PolarizedAbelianVariety::catalog("Z9"), Err(AbelianError::UnknownLabel(_))));
    }

    #[test]
    fn validation_failures() {
        let a = cat("A1");
        let flipped = PolarizedAbelianVariety::new("bad", a.j().clone(), a.e().neg()).unwrap();
        assert_eq!(flipped.validate().failures(), vec!["positivity"]);
        let mut j = a.j().clone();
        j.set(1, 0, Scalar::int(2));
        let bent = PolarizedAbelianVariety::new("bad", j, a.e().clone()).unwrap();
        assert!(bent.validate().failures().contains(&"complex_structure"));
    }

    #[test]
    fn kahler_examples() {
        assert_eq!(cat("A1").kahler_form(), KForm::basis(2, &[0, 1]));
        assert_eq!(cat("A2").kahler_form(), KForm::basis(4, &[0, 1]).add(&KForm::basis(4, &[2, 3])));
        let b2 = KForm::basis(4, &[0, 2]).add(&KForm::basis(4, &[1, 3]).scale(&q(2)));
        assert_eq!(cat("B2").kahler_form(), b2);
    }

    #[test]
    fn hermitian_examples() {
        assert_eq!(cat("A1").hermitian_form(), Matrix::identity(1));
        assert_eq!(cat("A2").hermitian_form(), Matrix::identity(2));
        for label in CATALOG_LABELS {
            let h = cat(label).hermitian_form();
            assert_eq!(h, h.adjoint(), "{label}");
            assert!(cat(label).hermitian_positive_definite(), "{label}");
        }
    }

    #[test]
    fn kahler_form_is_one_one() {
        for label in CATALOG_LABELS {
            let a = cat(label);
            let w = a.kahler_form().to_scalar();
            assert_eq!(a.bidegree_component(&w, 1, 1).unwrap(), w, "{label}");
            assert_eq!(w.pullback(a.j()), w);
        }
    }

    #[test]
    fn one_form_splits() {
        let a = cat("A1");
        let u = KForm::<Scalar>::basis(2, &[0]);
        let p10 = a.bidegree_component(&u, 1, 0).unwrap();
        let p01 = a.bidegree_component(&u, 0, 1).unwrap();
        assert_eq!(p10.add(&p01), u);
        // (dx + i dy)/2
        assert_eq!(p10.coefficient(0b10), Scalar::i() * Scalar::rational(crate::scalar::qf(1, 2)));
        assert_eq!(a.bidegree_component(&u, 1, 1), Err(AbelianError::BidegreeMismatch { a: 1, b: 1, degree: 1 }));
    }

    #[test]
    fn hodge_dimensions() {
        assert_eq!(cat("A1").rational_hodge_classes(1).unwrap().dim(), 1);
        assert_eq!(cat("A2").rational_hodge_classes(1).unwrap().dim(), 4);
        assert_eq!(cat("A2").rational_hodge_classes(2).unwrap().dim(), 1);
        assert_eq!(cat("A3").rational_hodge_classes(1).unwrap().dim(), 9);
        assert_eq!(cat("A3").rational_hodge_classes(2).unwrap().dim(), 9);
        assert_eq!(cat("A1").rational_hodge_classes(0).unwrap().dim(), 1);
    }

    #[test]
    fn lefschetz_examples() {
        assert_eq!(cat("A1").lefschetz_rank(1).unwrap(), 2);
        assert_eq!(cat("A2").lefschetz_rank(3).unwrap(), 4);
        assert_eq!(cat("A3").lefschetz_rank(3).unwrap(), 6);
        assert!(cat("A2").lefschetz_rank(2).is_err());
    }

    #[test]
    fn divisor_span_examples() {
        assert_eq!(cat("A1").divisor_power_span(1).unwrap().dim(), 1);
        assert_eq!(cat("A2").divisor_power_span(2).unwrap().dim(), 1);
        assert_eq!(cat("A3").divisor_power_span(1).unwrap().dim(), 9);
    }
}
