//! Sparse exterior algebra on a real vector space of dimension at most 64.
//!
//! Basis k-vectors and k-forms are indexed by [`MultiIndex`] bitmasks; a
//! [`KForm`] keeps its nonzero terms sorted by mask value, which is also the
//! canonical basis order of `⋀^k` used by every matrix in this crate.

use std::collections::HashMap;
use std::fmt;

use rayon::prelude::*;

use crate::linalg::{EchelonBasis, Matrix, SparseVec};
use crate::scalar::{Field, Scalar, Q};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ExteriorError {
    #[error("ambient dimensions differ: {0} vs {1}")]
    AmbientMismatch(usize, usize),
    #[error("interior product of a 0-form")]
    DegreeZero,
    #[error("expected degree {expected}, found {found}")]
    DegreeMismatch { expected: usize, found: usize },
    #[error("exterior power index p = {0} must be odd")]
    EvenP(usize),
    #[error("ambient dimension {0} exceeds 64")]
    AmbientTooLarge(usize),
    #[error("malformed form text: {0}")]
    Parse(String),
}

/// Strictly increasing index tuple stored as a bitmask (bit `i` = index `i`, 0-based).
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MultiIndex(pub u64);

impl MultiIndex {
    pub fn from_indices(indices: &[usize]) -> Self {
        let mut bits = 0u64;
        for &i in indices {
            assert!(i < 64, "index {i} out of range");
            assert!(bits & (1 << i) == 0, "repeated index {i}");
            bits |= 1 << i;
        }
        MultiIndex(bits)
    }

    pub fn bits(self) -> u64 {
        self.0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn contains(self, i: usize) -> bool {
        self.0 >> i & 1 == 1
    }

    pub fn indices(self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.len());
        let mut b = self.0;
        while b != 0 {
            out.push(b.trailing_zeros() as usize);
            b &= b - 1;
        }
        out
    }
}

impl fmt::Debug for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let one_based: Vec<String> = self.indices().iter().map(|i| (i + 1).to_string()).collect();
        write!(f, "{{{}}}", one_based.join(","))
    }
}

/// Whether `e_A ∧ e_B = −e_{A∪B}` for disjoint `A`, `B`.
#[inline]
pub fn merge_sign_is_negative(a: u64, b: u64) -> bool {
    // count pairs (x ∈ A, y ∈ B) with x > y
    let mut parity = 0u32;
    let mut rest = b;
    while rest != 0 {
        let y = rest.trailing_zeros();
        parity ^= ((a >> y) >> 1).count_ones() & 1;
        rest &= rest - 1;
    }
    parity == 1
}

/// All `k`-subsets of `0..n` as masks, ascending.
pub fn k_subsets(n: usize, k: usize) -> Vec<u64> {
    assert!(n <= 64);
    if k > n {
        return Vec::new();
    }
    if k == 0 {
        return vec![0];
    }
    let mut out = Vec::new();
    let mut v: u64 = if k == 64 { u64::MAX } else { (1u64 << k) - 1 };
    let limit_bits = n as u32;
    loop {
        if 64 - v.leading_zeros() > limit_bits {
            break;
        }
        out.push(v);
        if v == 0 {
            break;
        }
        // Gosper's hack
        let c = v & v.wrapping_neg();
        let r = v.wrapping_add(c);
        if r == 0 {
            break;
        }
        v = (((r ^ v) >> 2) / c) | r;
    }
    out
}

/// Position lookup for the canonical basis of `⋀^k`.
#[derive(Debug, Clone)]
pub struct SubsetIndex {
    masks: Vec<u64>,
    position: HashMap<u64, usize>,
}

impl SubsetIndex {
    pub fn new(n: usize, k: usize) -> Self {
        let masks = k_subsets(n, k);
        let position = masks.iter().enumerate().map(|(i, &m)| (m, i)).collect();
        SubsetIndex { masks, position }
    }

    pub fn len(&self) -> usize {
        self.masks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.masks.is_empty()
    }

    pub fn mask(&self, i: usize) -> u64 {
        self.masks[i]
    }

    pub fn masks(&self) -> &[u64] {
        &self.masks
    }

    pub fn position(&self, mask: u64) -> Option<usize> {
        self.position.get(&mask).copied()
    }
}

/// Homogeneous alternating k-form (or, read covariantly, a k-vector) on a
/// space of dimension `ambient ≤ 64`, stored sparsely.
#[derive(Clone, PartialEq)]
pub struct KForm<T> {
    ambient: usize,
    degree: usize,
    terms: Vec<(MultiIndex, T)>,
}

/// Elements of `⋀^k V`; same storage as forms, used where the covariant reading matters.
pub type Multivector<T> = KForm<T>;

const PARALLEL_WORK: usize = 1 << 15;

impl<T: Field> KForm<T> {
    pub fn zero(ambient: usize, degree: usize) -> Self {
        assert!(ambient <= 64, "ambient dimension {ambient} exceeds 64");
        KForm { ambient, degree, terms: Vec::new() }
    }

    /// The constant 0-form.
    pub fn constant(ambient: usize, value: T) -> Self {
        let mut out = KForm::zero(ambient, 0);
        if !value.is_zero() {
            out.terms.push((MultiIndex(0), value));
        }
        out
    }

    pub fn one(ambient: usize) -> Self {
        KForm::constant(ambient, T::one())
    }

    /// `dx^{i₁} ∧ … ∧ dx^{i_k}` for the given (0-based, any order) indices.
    pub fn basis(ambient: usize, indices: &[usize]) -> Self {
        let mut out = KForm::one(ambient);
        for &i in indices {
            out = out.wedge(&KForm::from_terms(ambient, 1, [(MultiIndex(1 << i), T::one())])).unwrap();
        }
        out
    }

    /// Sums coefficients of repeated masks; drops zeros.
    pub fn from_terms(ambient: usize, degree: usize, terms: impl IntoIterator<Item = (MultiIndex, T)>) -> Self {
        let mut acc: HashMap<u64, T> = HashMap::new();
        for (m, x) in terms {
            assert_eq!(m.len(), degree, "term {m:?} has wrong degree");
            assert!(ambient == 64 || m.0 >> ambient == 0, "term {m:?} outside ambient {ambient}");
            match acc.get_mut(&m.0) {
                Some(v) => *v += &x,
                None => {
                    acc.insert(m.0, x);
                }
            }
        }
        KForm::from_accumulator(ambient, degree, acc)
    }

    fn from_accumulator(ambient: usize, degree: usize, acc: HashMap<u64, T>) -> Self {
        let mut terms: Vec<(MultiIndex, T)> =
            acc.into_iter().filter(|(_, v)| !v.is_zero()).map(|(m, v)| (MultiIndex(m), v)).collect();
        terms.sort_by_key(|(m, _)| *m);
        KForm { ambient, degree, terms }
    }

    /// 1-form `Σ cᵢ dxⁱ`.
    pub fn from_covector(coeffs: &[T]) -> Self {
        let terms = coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(i, c)| (MultiIndex(1 << i), c.clone()))
            .collect();
        KForm { ambient: coeffs.len(), degree: 1, terms }
    }

    /// 2-form `Σ_{i<j} M_ij dxⁱ ∧ dxʲ`, so that `u(eᵢ, eⱼ) = M_ij` for alternating `M`.
    pub fn from_alternating_matrix(m: &Matrix<T>) -> Self {
        let n = m.rows();
        let mut terms = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                let x = m.get(i, j);
                if !x.is_zero() {
                    terms.push((MultiIndex((1 << i) | (1 << j)), x.clone()));
                }
            }
        }
        terms.sort_by_key(|(m, _)| *m);
        KForm { ambient: n, degree: 2, terms }
    }

    /// Matrix `M_ij = u(eᵢ, eⱼ)` of a 2-form.
    pub fn to_alternating_matrix(&self) -> Matrix<T> {
        assert_eq!(self.degree, 2, "matrix of a non-2-form");
        let mut m = Matrix::zeros(self.ambient, self.ambient);
        for (mask, x) in &self.terms {
            let idx = mask.indices();
            m.set(idx[0], idx[1], x.clone());
            m.set(idx[1], idx[0], -x.clone());
        }
        m
    }

    /// Coefficient vector of a 1-form.
    pub fn to_covector(&self) -> Vec<T> {
        assert_eq!(self.degree, 1);
        let mut v = vec![T::zero(); self.ambient];
        for (m, x) in &self.terms {
            v[m.0.trailing_zeros() as usize] = x.clone();
        }
        v
    }

    pub fn ambient(&self) -> usize {
        self.ambient
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn terms(&self) -> &[(MultiIndex, T)] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, mask: u64) -> T {
        match self.terms.binary_search_by_key(&mask, |(m, _)| m.0) {
            Ok(i) => self.terms[i].1.clone(),
            Err(_) => T::zero(),
        }
    }

    fn coefficient_ref(&self, mask: u64) -> Option<&T> {
        self.terms.binary_search_by_key(&mask, |(m, _)| m.0).ok().map(|i| &self.terms[i].1)
    }

    /// Dense coordinates in the canonical basis of `⋀^degree`.
    pub fn to_dense(&self, index: &SubsetIndex) -> Vec<T> {
        let mut v = vec![T::zero(); index.len()];
        for (m, x) in &self.terms {
            let pos = index.position(m.0).expect("term outside the basis index");
            v[pos] = x.clone();
        }
        v
    }

    pub fn from_dense(ambient: usize, degree: usize, index: &SubsetIndex, coords: &[T]) -> Self {
        let terms = coords
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(i, c)| (MultiIndex(index.mask(i)), c.clone()))
            .collect();
        KForm { ambient, degree, terms }
    }

    pub fn map<U: Field>(&self, f: impl Fn(&T) -> U) -> KForm<U> {
        KForm::from_terms(self.ambient, self.degree, self.terms.iter().map(|(m, x)| (*m, f(x))))
    }

    pub fn scale(&self, s: &T) -> Self {
        if s.is_zero() {
            return KForm::zero(self.ambient, self.degree);
        }
        KForm {
            ambient: self.ambient,
            degree: self.degree,
            terms: self.terms.iter().map(|(m, x)| (*m, x.mul_ref(s))).collect(),
        }
    }

    pub fn neg(&self) -> Self {
        KForm {
            ambient: self.ambient,
            degree: self.degree,
            terms: self.terms.iter().map(|(m, x)| (*m, -x.clone())).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.ambient, other.ambient, "ambient mismatch in sum");
        if self.is_zero() {
            return other.clone();
        }
        if other.is_zero() {
            return self.clone();
        }
        assert_eq!(self.degree, other.degree, "degree mismatch in sum");
        let mut out = Vec::with_capacity(self.terms.len() + other.terms.len());
        let (mut i, mut j) = (0, 0);
        while i < self.terms.len() || j < other.terms.len() {
            let a = self.terms.get(i);
            let b = other.terms.get(j);
            match (a, b) {
                (Some(x), Some(y)) if x.0 == y.0 => {
                    let mut v = x.1.clone();
                    v += &y.1;
                    if !v.is_zero() {
                        out.push((x.0, v));
                    }
                    i += 1;
                    j += 1;
                }
                (Some(x), Some(y)) if x.0 < y.0 => {
                    out.push(x.clone());
                    i += 1;
                }
                (Some(_), Some(y)) => {
                    out.push(y.clone());
                    j += 1;
                }
                (Some(x), None) => {
                    out.push(x.clone());
                    i += 1;
                }
                (None, Some(y)) => {
                    out.push(y.clone());
                    j += 1;
                }
                (None, None) => unreachable!(),
            }
        }
        KForm { ambient: self.ambient, degree: self.degree, terms: out }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    /// Exterior product; the zero form when the degree exceeds the ambient dimension.
    pub fn wedge(&self, other: &Self) -> Result<Self, ExteriorError> {
        if self.ambient != other.ambient {
            return Err(ExteriorError::AmbientMismatch(self.ambient, other.ambient));
        }
        let degree = self.degree + other.degree;
        if degree > self.ambient || self.is_zero() || other.is_zero() {
            return Ok(KForm::zero(self.ambient, degree));
        }
        let accumulate = |chunk: &[(MultiIndex, T)]| {
            let mut acc: HashMap<u64, T> = HashMap::new();
            for (a, x) in chunk {
                for (b, y) in &other.terms {
                    if a.0 & b.0 != 0 {
                        continue;
                    }
                    let mut v = x.mul_ref(y);
                    if merge_sign_is_negative(a.0, b.0) {
                        v = -v;
                    }
                    match acc.get_mut(&(a.0 | b.0)) {
                        Some(slot) => *slot += &v,
                        None => {
                            acc.insert(a.0 | b.0, v);
                        }
                    }
                }
            }
            acc
        };
        let work = self.terms.len() * other.terms.len();
        let acc = if work < PARALLEL_WORK {
            accumulate(&self.terms)
        } else {
            let chunk = (self.terms.len() / (4 * rayon::current_num_threads())).max(1);
            // exact sums: merge order does not affect the result
            self.terms
                .par_chunks(chunk)
                .map(accumulate)
                .reduce(HashMap::new, |mut left, right| {
                    for (m, v) in right {
                        match left.get_mut(&m) {
                            Some(slot) => *slot += &v,
                            None => {
                                left.insert(m, v);
                            }
                        }
                    }
                    left
                })
        };
        Ok(KForm::from_accumulator(self.ambient, degree, acc))
    }

    /// Coefficient of `self ∧ other` at `mask`, without forming the product.
    pub fn wedge_coefficient(&self, other: &Self, mask: u64) -> T {
        let mut acc = T::zero();
        let (small, large, small_is_right) =
            if other.terms.len() <= self.terms.len() { (other, self, true) } else { (self, other, false) };
        for (b, y) in &small.terms {
            if b.0 & !mask != 0 {
                continue;
            }
            let rest = mask & !b.0;
            let Some(x) = large.coefficient_ref(rest) else { continue };
            let negative = if small_is_right {
                merge_sign_is_negative(rest, b.0)
            } else {
                merge_sign_is_negative(b.0, rest)
            };
            let v = x.mul_ref(y);
            if negative {
                acc -= &v;
            } else {
                acc += &v;
            }
        }
        acc
    }

    /// `w ∧ … ∧ w` (`m` factors); `power(w, 0) = 1`.
    pub fn power(&self, m: usize) -> Self {
        let mut out = KForm::one(self.ambient);
        for _ in 0..m {
            out = out.wedge(self).expect("same ambient");
            if out.is_zero() {
                return KForm::zero(self.ambient, self.degree * m);
            }
        }
        out
    }

    /// Contraction `ι_v` in the first slot.
    pub fn interior(&self, v: &[T]) -> Result<Self, ExteriorError> {
        if self.degree == 0 {
            return Err(ExteriorError::DegreeZero);
        }
        if v.len() != self.ambient {
            return Err(ExteriorError::AmbientMismatch(self.ambient, v.len()));
        }
        let mut acc: HashMap<u64, T> = HashMap::new();
        for (m, x) in &self.terms {
            for (pos, i) in m.indices().into_iter().enumerate() {
                if v[i].is_zero() {
                    continue;
                }
                let mut c = x.mul_ref(&v[i]);
                if pos % 2 == 1 {
                    c = -c;
                }
                let key = m.0 & !(1 << i);
                match acc.get_mut(&key) {
                    Some(slot) => *slot += &c,
                    None => {
                        acc.insert(key, c);
                    }
                }
            }
        }
        Ok(KForm::from_accumulator(self.ambient, self.degree - 1, acc))
    }

    /// `u(v₁, …, v_k) = Σ_I u_I det(v_j[I])`.
    pub fn evaluate(&self, vectors: &[Vec<T>]) -> T {
        assert_eq!(vectors.len(), self.degree, "wrong number of arguments");
        let mut acc = T::zero();
        for (m, x) in &self.terms {
            let idx = m.indices();
            let minor = Matrix::from_fn(self.degree, self.degree, |r, c| vectors[c][idx[r]].clone());
            acc += &x.mul_ref(&minor.determinant());
        }
        if self.degree == 0 {
            return self.coefficient(0);
        }
        acc
    }

    /// Pullback along the linear map `x ↦ M x` (`M` is `ambient × source_dim`).
    pub fn pullback(&self, m: &Matrix<T>) -> Self {
        assert_eq!(m.rows(), self.ambient, "pullback matrix has wrong target dimension");
        let source = m.cols();
        let rows: Vec<KForm<T>> = (0..self.ambient).map(|j| KForm::from_covector(m.row(j))).collect();
        let mut out = KForm::zero(source, self.degree);
        if self.degree > source {
            return out;
        }
        for (mask, x) in &self.terms {
            let mut piece = KForm::constant(source, x.clone());
            for i in mask.indices() {
                piece = piece.wedge(&rows[i]).expect("same ambient");
                if piece.is_zero() {
                    break;
                }
            }
            out = out.add(&piece);
        }
        KForm { ambient: source, degree: self.degree, terms: out.terms }
    }

    /// Pairing with a multivector of the same degree: `Σ_I u_I x_I`.
    pub fn pair(&self, x: &Multivector<T>) -> T {
        assert_eq!(self.degree, x.degree);
        let mut acc = T::zero();
        for (m, c) in &self.terms {
            if let Some(y) = x.coefficient_ref(m.0) {
                acc += &c.mul_ref(y);
            }
        }
        acc
    }

    /// Keep only the terms whose masks satisfy `keep`.
    pub fn filter_terms(&self, keep: impl Fn(u64) -> bool) -> Self {
        KForm {
            ambient: self.ambient,
            degree: self.degree,
            terms: self.terms.iter().filter(|(m, _)| keep(m.0)).cloned().collect(),
        }
    }

    /// Canonical text: one `i₁,…,i_k : scalar` line per term (1-based), ascending masks.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (m, x) in &self.terms {
            let idx: Vec<String> = m.indices().iter().map(|i| (i + 1).to_string()).collect();
            out.push_str(&format!("{} : {}\n", idx.join(","), x.canonical_text()));
        }
        out
    }
}

impl<T: Field + std::str::FromStr> KForm<T> {
    pub fn parse_text(ambient: usize, degree: usize, text: &str) -> Result<Self, ExteriorError> {
        let mut terms = Vec::new();
        for line in text.lines().filter(|l| !l.trim().is_empty()) {
            let (lhs, rhs) = line.split_once(':').ok_or_else(|| ExteriorError::Parse(line.into()))?;
            let mut idx = Vec::new();
            for tok in lhs.split(',').map(str::trim).filter(|t| !t.is_empty()) {
                let i: usize = tok.parse().map_err(|_| ExteriorError::Parse(line.into()))?;
                if i == 0 || i > ambient {
                    return Err(ExteriorError::Parse(line.into()));
                }
                idx.push(i - 1);
            }
            if idx.len() != degree {
                return Err(ExteriorError::DegreeMismatch { expected: degree, found: idx.len() });
            }
            let value: T = rhs.trim().parse().map_err(|_| ExteriorError::Parse(line.into()))?;
            let b = KForm::basis(ambient, &idx);
            if b.is_zero() {
                return Err(ExteriorError::Parse(line.into()));
            }
            terms.push((b.terms[0].0, value.mul_ref(&b.terms[0].1)));
        }
        Ok(KForm::from_terms(ambient, degree, terms))
    }
}

impl<T: Field> fmt::Debug for KForm<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "KForm(ambient={}, degree={}) ", self.ambient, self.degree)?;
        let parts: Vec<String> = self.terms.iter().map(|(m, x)| format!("{x}·{m:?}")).collect();
        write!(f, "[{}]", parts.join(" + "))
    }
}

impl KForm<Q> {
    pub fn to_scalar(&self) -> KForm<Scalar> {
        KForm {
            ambient: self.ambient,
            degree: self.degree,
            terms: self.terms.iter().map(|(m, x)| (*m, Scalar::rational(x.clone()))).collect(),
        }
    }
}

impl KForm<Scalar> {
    /// `Some` when every coefficient is rational.
    pub fn to_rational(&self) -> Option<KForm<Q>> {
        let terms: Option<Vec<(MultiIndex, Q)>> =
            self.terms.iter().map(|(m, x)| x.to_rational().map(|r| (*m, r))).collect();
        Some(KForm { ambient: self.ambient, degree: self.degree, terms: terms? })
    }
}

/// Memoized minors `det M[rows, cols]` keyed by row and column masks.
pub struct MinorCache<'a, T> {
    m: &'a Matrix<T>,
    memo: HashMap<(u64, u64), T>,
}

impl<'a, T: Field> MinorCache<'a, T> {
    pub fn new(m: &'a Matrix<T>) -> Self {
        MinorCache { m, memo: HashMap::new() }
    }

    /// Laplace expansion along the lowest row; sub-minors are shared across calls.
    pub fn minor(&mut self, rows: u64, cols: u64) -> T {
        debug_assert_eq!(rows.count_ones(), cols.count_ones());
        if rows == 0 {
            return T::one();
        }
        if let Some(v) = self.memo.get(&(rows, cols)) {
            return v.clone();
        }
        let r0 = rows.trailing_zeros() as usize;
        let rest = rows & (rows - 1);
        let mut acc = T::zero();
        let mut c = cols;
        let mut pos = 0;
        while c != 0 {
            let j = c.trailing_zeros() as usize;
            c &= c - 1;
            let entry = self.m.get(r0, j).clone();
            if !entry.is_zero() {
                let sub = self.minor(rest, cols & !(1 << j));
                let term = entry.mul_ref(&sub);
                if pos % 2 == 0 {
                    acc += &term;
                } else {
                    acc -= &term;
                }
            }
            pos += 1;
        }
        self.memo.insert((rows, cols), acc.clone());
        acc
    }
}

/// Matrix of `⋀^p M` in the canonical `e_I` basis: entry `(I, J) = det M[I, J]`.
pub fn induced_power_map<T: Field>(m: &Matrix<T>, p: usize) -> Matrix<T> {
    assert!(m.is_square(), "induced power of a non-square matrix");
    let n = m.rows();
    assert!(n <= 64 && p <= n);
    let index = SubsetIndex::new(n, p);
    let mut cache = MinorCache::new(m);
    Matrix::from_fn(index.len(), index.len(), |i, j| cache.minor(index.mask(i), index.mask(j)))
}

/// Gram extension `Ê(e_I, e_J) = det E[I, J]` of an alternating form to `⋀^p`, `p` odd.
pub fn gram_extension<T: Field>(e: &Matrix<T>, p: usize) -> Result<Matrix<T>, ExteriorError> {
    if p % 2 == 0 {
        return Err(ExteriorError::EvenP(p));
    }
    Ok(induced_power_map(e, p))
}

/// `Δ : ⋀^{2p} V → ⋀²(⋀^p V)`, `e_K ↦ Σ_{ {A,B} } sgn(A,B) e_A ∧ e_B` over
/// unordered splits of `K` into two `p`-sets.
///
/// The output is a 2-vector on the space `⋀^p V`, whose basis vectors are the
/// `p`-subsets of `0..ambient` in ascending mask order.
pub fn shuffle_comultiplication<T: Field>(p: usize, x: &Multivector<T>) -> Result<Multivector<T>, ExteriorError> {
    if p % 2 == 0 {
        return Err(ExteriorError::EvenP(p));
    }
    if x.degree() != 2 * p {
        return Err(ExteriorError::DegreeMismatch { expected: 2 * p, found: x.degree() });
    }
    let index = SubsetIndex::new(x.ambient(), p);
    if index.len() > 64 {
        return Err(ExteriorError::AmbientTooLarge(index.len()));
    }
    let mut terms = Vec::new();
    for (k, c) in x.terms() {
        let lowest = k.0 & k.0.wrapping_neg();
        for (a, b, negative) in splits(k.0, p) {
            if a & lowest == 0 {
                continue;
            }
            let (ra, rb) = (index.position(a).unwrap(), index.position(b).unwrap());
            // e_A ∧ e_B = −e_B ∧ e_A in ⋀²
            let flip = ra > rb;
            let mask = MultiIndex((1 << ra) | (1 << rb));
            let v = if negative ^ flip { -c.clone() } else { c.clone() };
            terms.push((mask, v));
        }
    }
    Ok(KForm::from_terms(index.len(), 2, terms))
}

/// Ordered splits `K = A ⊔ B` with `|A| = p`, with the sign of `e_A ∧ e_B` relative to `e_K`.
pub fn splits(k: u64, p: usize) -> Vec<(u64, u64, bool)> {
    let idx = MultiIndex(k).indices();
    k_subsets(idx.len(), p)
        .into_iter()
        .map(|sel| {
            let mut a = 0u64;
            for (pos, &i) in idx.iter().enumerate() {
                if sel >> pos & 1 == 1 {
                    a |= 1 << i;
                }
            }
            let b = k & !a;
            (a, b, merge_sign_is_negative(a, b))
        })
        .collect()
}

/// Span of homogeneous forms of one degree, kept in echelon form over the
/// canonical basis of `⋀^degree`.
#[derive(Debug, Clone)]
pub struct FormSpan<T> {
    ambient: usize,
    degree: usize,
    index: SubsetIndex,
    echelon: EchelonBasis<T>,
}

impl<T: Field> FormSpan<T> {
    pub fn new(ambient: usize, degree: usize) -> Self {
        let index = SubsetIndex::new(ambient, degree);
        let echelon = EchelonBasis::new(index.len());
        FormSpan { ambient, degree, index, echelon }
    }

    pub fn ambient(&self) -> usize {
        self.ambient
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    /// Dimension of `⋀^degree` itself.
    pub fn full_dim(&self) -> usize {
        self.index.len()
    }

    pub fn dim(&self) -> usize {
        self.echelon.dim()
    }

    fn coords(&self, u: &KForm<T>) -> SparseVec<T> {
        assert_eq!((u.ambient(), u.degree()), (self.ambient, self.degree), "form outside this span's space");
        // ascending masks map to ascending positions
        u.terms().iter().map(|(m, x)| (self.index.position(m.0).expect("mask in index"), x.clone())).collect()
    }

    /// Adds `u`; returns whether the span grew.
    pub fn insert(&mut self, u: &KForm<T>) -> bool {
        if u.is_zero() {
            return false;
        }
        let v = self.coords(u);
        self.echelon.insert(v)
    }

    pub fn contains(&self, u: &KForm<T>) -> bool {
        u.is_zero() || self.echelon.contains(self.coords(u))
    }

    /// Reduced echelon basis as forms.
    pub fn basis(&self) -> Vec<KForm<T>> {
        self.echelon
            .reduced_rows()
            .into_iter()
            .map(|row| {
                let terms = row.into_iter().map(|(i, x)| (MultiIndex(self.index.mask(i)), x)).collect();
                KForm { ambient: self.ambient, degree: self.degree, terms }
            })
            .collect()
    }
}

/// Nondecreasing index tuples of length `len` over `0..count`, lexicographic.
pub fn multiset_tuples(count: usize, len: usize) -> impl Iterator<Item = Vec<usize>> {
    let mut current: Option<Vec<usize>> = if count == 0 && len > 0 { None } else { Some(vec![0; len]) };
    std::iter::from_fn(move || {
        let out = current.clone()?;
        let mut next = out.clone();
        let mut pos = len;
        loop {
            if pos == 0 {
                current = None;
                break;
            }
            pos -= 1;
            if next[pos] + 1 < count {
                let v = next[pos] + 1;
                for slot in next.iter_mut().skip(pos) {
                    *slot = v;
                }
                current = Some(next);
                break;
            }
        }
        Some(out)
    })
}
