//! Higher Weil Jacobians `J^p(A) = ⋀^p V / ⋀^p L`, Sampson's projection and
//! the pullback/pushforward calculus along surjections of abelian varieties.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use rayon::prelude::*;

use crate::abelian::{AbelianError, AxiomCheck, PolarizedAbelianVariety, ValidationReport};
use crate::exterior::{gram_extension, induced_power_map, splits, k_subsets, ExteriorError, KForm, MultiIndex, SubsetIndex};
use crate::linalg::{hermite_normal_form, integer_kernel, saturate, EchelonBasis, LatticeBasis, Matrix};
use crate::scalar::{Field, Scalar, Q};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum WeilError {
    #[error("p = {0} is even")]
    EvenP(usize),
    #[error("p = {p} out of range 0 < p < {two_n}")]
    InvalidP { p: usize, two_n: usize },
    #[error("invariant violated: {0}")]
    InvariantViolation(String),
    #[error("projection property failed: {0}")]
    PropertyFailure(String),
    #[error("map has rank {rank}, expected {expected}")]
    NotSurjective { rank: usize, expected: usize },
    #[error("map does not commute with the complex structures")]
    NotComplexLinear,
    #[error("map is not integral")]
    NotIntegral,
    #[error("shape error: {0}")]
    Shape(String),
    #[error("form of degree {degree} cannot be integrated over a fiber of dimension {fiber}")]
    DegreeTooLow { degree: usize, fiber: usize },
    #[error("expected degree {expected}, found {found}")]
    DegreeMismatch { expected: usize, found: usize },
    #[error(transparent)]
    Abelian(#[from] AbelianError),
    #[error(transparent)]
    Exterior(#[from] ExteriorError),
}

/// `J^p(A)` together with its base variety.
#[derive(Debug, Clone)]
pub struct WeilJacobian {
    base: PolarizedAbelianVariety,
    p: usize,
    variety: PolarizedAbelianVariety,
}

impl WeilJacobian {
    pub fn base(&self) -> &PolarizedAbelianVariety {
        &self.base
    }

    pub fn p(&self) -> usize {
        self.p
    }

    /// Complex dimension `N = C(2n, p) / 2`.
    pub fn big_n(&self) -> usize {
        self.variety.n()
    }

    pub fn j_hat(&self) -> &Matrix<Scalar> {
        self.variety.j()
    }

    pub fn e_hat(&self) -> &Matrix<Q> {
        self.variety.e()
    }

    /// `J^p(A)` as a polarized abelian variety in its own right.
    pub fn variety(&self) -> &PolarizedAbelianVariety {
        &self.variety
    }

    fn index(&self) -> SubsetIndex {
        SubsetIndex::new(self.base.real_dim(), self.p)
    }

    /// `ψ(dx^I) = ∧_{i∈I} dxⁱ` on 1-forms of `⋀^p V`.
    pub fn psi(&self, u: &KForm<Q>) -> Result<KForm<Q>, WeilError> {
        if u.degree() != 1 || u.ambient() != self.variety.real_dim() {
            return Err(WeilError::DegreeMismatch { expected: 1, found: u.degree() });
        }
        let index = self.index();
        let terms = u.terms().iter().map(|(m, x)| {
            let pos = m.bits().trailing_zeros() as usize;
            (MultiIndex(index.mask(pos)), x.clone())
        });
        Ok(KForm::from_terms(self.base.real_dim(), self.p, terms))
    }

    pub fn psi_inverse(&self, v: &KForm<Q>) -> Result<KForm<Q>, WeilError> {
        if v.degree() != self.p {
            return Err(WeilError::DegreeMismatch { expected: self.p, found: v.degree() });
        }
        let index = self.index();
        let terms = v.terms().iter().map(|(m, x)| (MultiIndex(1 << index.position(m.bits()).unwrap()), x.clone()));
        Ok(KForm::from_terms(self.variety.real_dim(), 1, terms))
    }

    /// `f(η) = η ∘ Δ`: for each `K`, `Σ_{A,B} sgn(A,B) η(e_A, e_B)` over unordered splits.
    pub fn f_map(&self, eta: &KForm<Q>) -> Result<KForm<Q>, WeilError> {
        if eta.degree() != 2 || eta.ambient() != self.variety.real_dim() {
            return Err(WeilError::DegreeMismatch { expected: 2, found: eta.degree() });
        }
        let index = self.index();
        let dim = self.base.real_dim();
        let p = self.p;
        let terms: Vec<(MultiIndex, Q)> = k_subsets(dim, 2 * p)
            .into_par_iter()
            .filter_map(|k| {
                let lowest = k & k.wrapping_neg();
                let mut acc = Q::zero();
                for (a, b, negative) in splits(k, p) {
                    if a & lowest == 0 {
                        continue;
                    }
                    let (ra, rb) = (index.position(a).unwrap(), index.position(b).unwrap());
                    let mut v = eta.coefficient((1 << ra) | (1 << rb));
                    if negative ^ (ra > rb) {
                        v = -v;
                    }
                    acc += &v;
                }
                (!acc.is_zero()).then_some((MultiIndex(k), acc))
            })
            .collect();
        Ok(KForm::from_terms(dim, 2 * p, terms))
    }

    /// `g(β)(e_A, e_B) = β(e_A ∧ e_B)`.
    pub fn g_map(&self, beta: &KForm<Q>) -> Result<KForm<Q>, WeilError> {
        if self.p % 2 == 0 {
            return Err(WeilError::EvenP(self.p));
        }
        if beta.degree() != 2 * self.p || beta.ambient() != self.base.real_dim() {
            return Err(WeilError::DegreeMismatch { expected: 2 * self.p, found: beta.degree() });
        }
        let index = self.index();
        let lowest_first: Vec<(MultiIndex, Q)> = beta
            .terms()
            .iter()
            .flat_map(|(k, x)| {
                let index = &index;
                splits(k.bits(), self.p).into_iter().filter_map(move |(a, b, negative)| {
                    let (ra, rb) = (index.position(a).unwrap(), index.position(b).unwrap());
                    // each unordered pair is met twice; keep the ordered one with ra < rb
                    if ra > rb {
                        return None;
                    }
                    let v = if negative { -x.clone() } else { x.clone() };
                    Some((MultiIndex((1 << ra) | (1 << rb)), v))
                })
            })
            .collect();
        Ok(KForm::from_terms(self.variety.real_dim(), 2, lowest_first))
    }
}

/// Assemble `J^p(A)` and check its axioms.
pub fn build_weil_jacobian(a: &PolarizedAbelianVariety, p: usize) -> Result<WeilJacobian, WeilError> {
    if p % 2 == 0 {
        return Err(WeilError::EvenP(p));
    }
    if p >= a.real_dim() {
        return Err(WeilError::InvalidP { p, two_n: a.real_dim() });
    }
    let base_report = a.validate();
    if !base_report.all_pass() {
        return Err(WeilError::InvariantViolation(format!("base variety: {}", base_report.failures().join(", "))));
    }
    let j_hat = induced_power_map(a.j(), p);
    let e_hat = gram_extension(a.e(), p)?;
    let variety = PolarizedAbelianVariety::new(format!("J^{p}({})", a.label()), j_hat, e_hat)?;
    let report = variety.validate();
    if !report.all_pass() {
        return Err(WeilError::InvariantViolation(report.failures().join(", ")));
    }
    Ok(WeilJacobian { base: a.clone(), p, variety })
}

/// A surjective ℂ-linear lattice map `π : ℝ^{2N} → ℝ^{2n}` with its kernel data.
#[derive(Debug, Clone)]
pub struct SurjectionData {
    source: PolarizedAbelianVariety,
    target: PolarizedAbelianVariety,
    matrix: Matrix<Q>,
    kernel_frame: LatticeBasis,
    lifts: Matrix<Q>,
    image_index: BigInt,
}

impl SurjectionData {
    /// Validates integrality, surjectivity and ℂ-linearity, then builds the
    /// oriented saturated kernel frame and canonical lifts.
    pub fn new(source: PolarizedAbelianVariety, target: PolarizedAbelianVariety, matrix: Matrix<Q>) -> Result<Self, WeilError> {
        let (big, small) = (source.real_dim(), target.real_dim());
        if matrix.rows() != small || matrix.cols() != big {
            return Err(WeilError::Shape(format!(
                "expected a {small}×{big} matrix, found {}×{}",
                matrix.rows(),
                matrix.cols()
            )));
        }
        let int = matrix.to_integer().map_err(|_| WeilError::NotIntegral)?;
        let rank = matrix.rank();
        if rank != small {
            return Err(WeilError::NotSurjective { rank, expected: small });
        }
        let ms = matrix.to_scalar();
        if ms.mul(source.j()) != target.j().mul(&ms) {
            return Err(WeilError::NotComplexLinear);
        }
        let frame = saturate(&LatticeBasis::new(big, integer_kernel(&int)));
        let frame = orient_frame(frame, source.j());
        let columns: Vec<Vec<Q>> = (0..small)
            .map(|j| {
                let e: Vec<Q> = (0..small).map(|i| if i == j { Q::one() } else { Q::zero() }).collect();
                matrix.solve(&e).expect("surjective map has lifts")
            })
            .collect();
        let lifts = Matrix::from_columns(big, &columns);
        let (h, _) = hermite_normal_form(&int.transpose());
        let top: Vec<Vec<BigInt>> = h.row_vecs().into_iter().filter(|r| r.iter().any(|x| !x.is_zero())).collect();
        let image_index = Matrix::from_integer(&Matrix::from_rows(top)).determinant().abs().to_integer();
        Ok(SurjectionData { source, target, matrix, kernel_frame: frame, lifts, image_index })
    }

    pub fn source(&self) -> &PolarizedAbelianVariety {
        &self.source
    }

    pub fn target(&self) -> &PolarizedAbelianVariety {
        &self.target
    }

    pub fn matrix(&self) -> &Matrix<Q> {
        &self.matrix
    }

    pub fn kernel_frame(&self) -> &LatticeBasis {
        &self.kernel_frame
    }

    /// `π ṽ_j = e_j`, one column per target basis vector.
    pub fn lifts(&self) -> &Matrix<Q> {
        &self.lifts
    }

    /// `[ℤ^{2n} : π(ℤ^{2N})]`.
    pub fn image_index(&self) -> &BigInt {
        &self.image_index
    }

    /// Real fiber dimension `2(N − n)`.
    pub fn fiber_dim(&self) -> usize {
        self.source.real_dim() - self.target.real_dim()
    }

    pub fn frame_rational(&self) -> Vec<Vec<Q>> {
        self.kernel_frame.as_rational()
    }

    /// `B = [frame | lifts]`, the adapted basis of the source.
    pub fn adapted_basis(&self) -> Matrix<Q> {
        self.adapted_basis_with(&self.lifts)
    }

    pub fn adapted_basis_with(&self, lifts: &Matrix<Q>) -> Matrix<Q> {
        let mut cols = self.frame_rational();
        cols.extend((0..lifts.cols()).map(|j| lifts.column(j)));
        Matrix::from_columns(self.source.real_dim(), &cols)
    }

    /// Whether the kernel frame spans a `Ĵ`-stable subspace.
    pub fn kernel_is_complex(&self) -> bool {
        let mut span = EchelonBasis::<Scalar>::new(self.source.real_dim());
        let frame: Vec<Vec<Scalar>> =
            self.frame_rational().iter().map(|v| v.iter().map(|x| Scalar::rational(x.clone())).collect()).collect();
        for v in &frame {
            span.insert_dense(v);
        }
        frame.iter().all(|v| span.contains_dense(&self.source.j().mul_vec(v)))
    }

    /// `u ∘ (π × … × π)`.
    pub fn pullback(&self, u: &KForm<Q>) -> KForm<Q> {
        u.pullback(&self.matrix)
    }

    /// Fiber integration against the oriented kernel frame, canonical lifts.
    pub fn pushforward(&self, eta: &KForm<Q>) -> Result<KForm<Q>, WeilError> {
        self.pushforward_with_lifts(eta, &self.lifts)
    }

    /// `(π_*η)(e_J) = Σ_I η_I det B[I, F ∪ J]` with `B = [frame | lifts]`.
    pub fn pushforward_with_lifts(&self, eta: &KForm<Q>, lifts: &Matrix<Q>) -> Result<KForm<Q>, WeilError> {
        let fiber = self.fiber_dim();
        if eta.degree() < fiber {
            return Err(WeilError::DegreeTooLow { degree: eta.degree(), fiber });
        }
        let out_degree = eta.degree() - fiber;
        let small = self.target.real_dim();
        let b = self.adapted_basis_with(lifts);
        let fiber_cols: Vec<usize> = (0..fiber).collect();
        let terms: Vec<(MultiIndex, Q)> = k_subsets(small, out_degree)
            .into_par_iter()
            .filter_map(|jm| {
                let mut cols = fiber_cols.clone();
                cols.extend(MultiIndex(jm).indices().into_iter().map(|j| fiber + j));
                let mut acc = Q::zero();
                for (m, x) in eta.terms() {
                    let minor = b.submatrix(&m.indices(), &cols).determinant();
                    if !minor.is_zero() {
                        acc += &(x * &minor);
                    }
                }
                (!acc.is_zero()).then_some((MultiIndex(jm), acc))
            })
            .collect();
        Ok(KForm::from_terms(small, out_degree, terms))
    }

    /// The same integral computed by pulling `η` back to adapted coordinates.
    pub fn pushforward_adapted(&self, eta: &KForm<Q>) -> Result<KForm<Q>, WeilError> {
        let fiber = self.fiber_dim();
        if eta.degree() < fiber {
            return Err(WeilError::DegreeTooLow { degree: eta.degree(), fiber });
        }
        let adapted = eta.pullback(&self.adapted_basis());
        Ok(FiberCoordinates::new(fiber, self.target.real_dim()).integrate(&adapted))
    }
}

/// Coordinates on the source in which the fiber occupies the lowest `fiber` slots.
#[derive(Debug, Clone, Copy)]
pub struct FiberCoordinates {
    fiber: usize,
    base: usize,
}

impl FiberCoordinates {
    pub fn new(fiber: usize, base: usize) -> Self {
        FiberCoordinates { fiber, base }
    }

    pub fn fiber_mask(&self) -> u64 {
        if self.fiber == 0 {
            0
        } else {
            u64::MAX >> (64 - self.fiber)
        }
    }

    /// Keep terms containing every fiber index; drop those indices.
    pub fn integrate<T: Field>(&self, adapted: &KForm<T>) -> KForm<T> {
        let f = self.fiber_mask();
        let terms = adapted
            .terms()
            .iter()
            .filter(|(m, _)| m.bits() & f == f)
            .map(|(m, x)| (MultiIndex(m.bits() >> self.fiber), x.clone()));
        KForm::from_terms(self.base, adapted.degree() - self.fiber, terms)
    }
}

/// Orient a kernel frame by the complex orientation `u₁, Ĵu₁, u₂, Ĵu₂, …`.
fn orient_frame(frame: LatticeBasis, j: &Matrix<Scalar>) -> LatticeBasis {
    let k = frame.rank();
    if k == 0 {
        return frame;
    }
    let dim = frame.ambient;
    let rational = frame.as_rational();
    let scalar: Vec<Vec<Scalar>> = rational.iter().map(|v| v.iter().map(|x| Scalar::rational(x.clone())).collect()).collect();
    let mut span = EchelonBasis::<Scalar>::new(dim);
    let mut adapted: Vec<Vec<Scalar>> = Vec::with_capacity(k);
    for v in &scalar {
        if span.contains_dense(v) {
            continue;
        }
        let jv = j.mul_vec(v);
        span.insert_dense(v);
        span.insert_dense(&jv);
        adapted.push(v.clone());
        adapted.push(jv);
    }
    assert_eq!(adapted.len(), k, "kernel is not a complex subspace");
    // rows on which the frame is invertible
    let mut rows_span = EchelonBasis::<Q>::new(k);
    let mut rows = Vec::with_capacity(k);
    for r in 0..dim {
        let row: Vec<Q> = rational.iter().map(|v| v[r].clone()).collect();
        if rows_span.insert_dense(&row) {
            rows.push(r);
        }
    }
    let frame_det = Matrix::from_fn(k, k, |a, b| rational[b][rows[a]].clone()).determinant();
    let adapted_det = Matrix::from_fn(k, k, |a, b| adapted[b][rows[a]].clone()).determinant();
    let positive = frame_det.is_positive() == adapted_det.is_positive();
    if positive {
        frame
    } else {
        let mut vectors = frame.vectors;
        let last = vectors.last_mut().unwrap();
        for x in last.iter_mut() {
            *x = -x.clone();
        }
        LatticeBasis::new(dim, vectors)
    }
}

/// `π[j, I] = coefficient of dx^I in dxʲ ∧ ω^{(p−1)/2}`.
pub fn sampson_matrix(w: &WeilJacobian) -> Matrix<Q> {
    let dim = w.base.real_dim();
    let index = w.index();
    let power = w.base.kahler_form().power((w.p - 1) / 2);
    let mut m = Matrix::zeros(dim, index.len());
    for j in 0..dim {
        let row = KForm::basis(dim, &[j]).wedge(&power).unwrap();
        for (mask, x) in row.terms() {
            m.set(j, index.position(mask.bits()).unwrap(), x.clone());
        }
    }
    m
}

/// Contraction of `ω^{(p+1)/2}` against `E^{-T} e_j`; equals `(p+1)/2` times [`sampson_matrix`].
pub fn sampson_contraction_matrix(w: &WeilJacobian) -> Result<Matrix<Q>, WeilError> {
    let dim = w.base.real_dim();
    let index = w.index();
    let power = w.base.kahler_form().power((w.p + 1) / 2);
    let e_inv_t = w.base.e().transpose().inverse().map_err(|_| WeilError::InvariantViolation("E is singular".into()))?;
    let mut m = Matrix::zeros(dim, index.len());
    for j in 0..dim {
        let v = e_inv_t.column(j);
        let row = power.interior(&v)?;
        for (mask, x) in row.terms() {
            m.set(j, index.position(mask.bits()).unwrap(), x.clone());
        }
    }
    Ok(m)
}

/// Sampson's projection `J^p(A) → A` with `c = 1`.
pub fn sampson_projection(w: &WeilJacobian) -> Result<SurjectionData, WeilError> {
    let m = sampson_matrix(w);
    SurjectionData::new(w.variety.clone(), w.base.clone(), m).map_err(|e| WeilError::PropertyFailure(e.to_string()))
}

/// Every defining property of Sampson's projection, checked exactly.
pub fn verify_projection(w: &WeilJacobian, pi: &SurjectionData) -> ValidationReport {
    let m = pi.matrix();
    let base = w.base();
    let ms = m.to_scalar();
    let mut checks = Vec::new();
    let mut push = |name: &'static str, passed: bool, detail: String| checks.push(AxiomCheck { name, passed, detail });
    push("complex_linear", ms.mul(w.j_hat()) == base.j().mul(&ms), "π Ĵ = J π".into());
    let rank = m.rank();
    push("surjective", rank == base.real_dim(), format!("rank {rank} of {}", base.real_dim()));
    push("integral", m.to_integer().is_ok(), "π(ℤ^{2N}) ⊆ ℤ^{2n}".into());
    let frame = pi.kernel_frame().rank();
    push(
        "kernel_frame",
        frame == w.variety().real_dim() - base.real_dim() && pi.kernel_is_complex(),
        format!("{frame} saturated vectors spanning a Ĵ-stable kernel"),
    );
    let power = base.kahler_form().power((w.p() - 1) / 2);
    let pullback_ok = (0..base.real_dim()).all(|j| {
        let dxj = KForm::basis(base.real_dim(), &[j]);
        w.psi(&pi.pullback(&dxj)).ok() == dxj.wedge(&power).ok()
    });
    push("pullback_formula", pullback_ok, "ψ∘π*(dxʲ) = dxʲ ∧ ω^{(p−1)/2}".into());
    let factor = Q::from_integer(BigInt::from((w.p() + 1) / 2));
    let contraction_ok = sampson_contraction_matrix(w).map(|c| c == m.scale(&factor)).unwrap_or(false);
    push("contraction_agrees", contraction_ok, format!("contraction = {factor} · π columnwise"));
    ValidationReport { checks }
}

/// A user-supplied surjection between two varieties.
pub fn custom_surjection(
    source: &PolarizedAbelianVariety,
    target: &PolarizedAbelianVariety,
    matrix: Matrix<Q>,
) -> Result<SurjectionData, WeilError> {
    SurjectionData::new(source.clone(), target.clone(), matrix)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::q;

    fn cat(label: &str) -> PolarizedAbelianVariety {
        PolarizedAbelianVariety::catalog(label).unwrap()
    }

    fn dx(n: usize, idx: &[usize]) -> KForm<Q> {
        KForm::basis(n, idx)
    }

    fn drop_last_factor() -> SurjectionData {
        let m = Matrix::from_fn(4, 6, |r, c| if r == c { q(1) } else { q(0) });
        custom_surjection(&cat("A3"), &cat("A2"), m).unwrap()
    }

    #[test]
    fn weil_p_one_is_base() {
        let w = build_weil_jacobian(&cat("A1"), 1).unwrap();
        assert_eq!(w.j_hat(), cat("A1").j());
        assert_eq!(w.e_hat(), cat("A1").e());
        assert_eq!(w.big_n(), 1);
    }

    #[test]
    fn weil_errors() {
        assert_eq!(build_weil_jacobian(&cat("A2"), 2).unwrap_err(), WeilError::EvenP(2));
        assert_eq!(build_weil_jacobian(&cat("A1"), 3).unwrap_err(), WeilError::InvalidP { p: 3, two_n: 2 });
    }

    #[test]
    fn sampson_on_a2() {
        let w = build_weil_jacobian(&cat("A2"), 3).unwrap();
        assert_eq!(w.big_n(), 2);
        let pi = sampson_projection(&w).unwrap();
        let index = SubsetIndex::new(4, 3);
        let col = |mask: u64| pi.matrix().column(index.position(mask).unwrap());
        let e = |j: usize| (0..4).map(|i| if i == j { q(1) } else { q(0) }).collect::<Vec<_>>();
        assert_eq!(col(0b1101), e(0));
        assert_eq!(col(0b1110), e(1));
        assert_eq!(col(0b0111), e(2));
        assert_eq!(col(0b1011), e(3));
        assert_eq!(pi.kernel_frame().rank(), 0);
    }

    #[test]
    fn sampson_p_one_is_identity() {
        let w = build_weil_jacobian(&cat("A2"), 1).unwrap();
        let pi = sampson_projection(&w).unwrap();
        assert_eq!(pi.matrix(), &Matrix::identity(4));
    }

    #[test]
    fn custom_surjections() {
        let pi = drop_last_factor();
        let frame = pi.kernel_frame().as_rational();
        assert_eq!(frame.len(), 2);
        let mut span = EchelonBasis::<Q>::new(6);
        for v in &frame {
            span.insert_dense(v);
        }
        assert_eq!(span.basis_dense(), vec![
            vec![q(0), q(0), q(0), q(0), q(1), q(0)],
            vec![q(0), q(0), q(0), q(0), q(0), q(1)]
        ]);
        assert!(pi.kernel_is_complex());
        assert_eq!(pi.image_index(), &BigInt::one());

        let doubled = Matrix::from_fn(4, 6, |r, c| if r == c { q(if r < 2 { 2 } else { 1 }) } else { q(0) });
        let pi2 = custom_surjection(&cat("A3"), &cat("A2"), doubled).unwrap();
        assert_eq!(pi2.image_index(), &BigInt::from(4));

        let bent = Matrix::from_fn(4, 6, |r, c| if r == c || (r, c) == (0, 2) { q(1) } else { q(0) });
        assert_eq!(custom_surjection(&cat("A3"), &cat("A2"), bent).unwrap_err(), WeilError::NotComplexLinear);
        let half = Matrix::from_fn(4, 6, |r, c| if r == c { crate::scalar::qf(1, 2) } else { q(0) });
        assert_eq!(custom_surjection(&cat("A3"), &cat("A2"), half).unwrap_err(), WeilError::NotIntegral);
        let flat = Matrix::from_fn(4, 6, |r, c| if r == c && r < 2 { q(1) } else { q(0) });
        assert!(matches!(custom_surjection(&cat("A3"), &cat("A2"), flat), Err(WeilError::NotSurjective { .. })));
    }

    #[test]
    fn pushforward_along_projection() {
        let m = Matrix::from_fn(2, 4, |r, c| if r == c { q(1) } else { q(0) });
        let pi = custom_surjection(&cat("A2"), &cat("A1"), m).unwrap();
        assert_eq!(pi.pushforward(&dx(4, &[2, 3])).unwrap(), KForm::one(2));
        assert_eq!(pi.pushforward(&dx(4, &[0, 2, 3])).unwrap(), dx(2, &[0]));
        assert!(pi.pushforward(&dx(4, &[0, 1])).unwrap().is_zero());
        assert_eq!(pi.pushforward(&dx(4, &[0])).unwrap_err(), WeilError::DegreeTooLow { degree: 1, fiber: 2 });
        assert_eq!(pi.pushforward_adapted(&dx(4, &[0, 2, 3])).unwrap(), dx(2, &[0]));
    }

    #[test]
    fn psi_round_trip() {
        let w = build_weil_jacobian(&cat("A2"), 3).unwrap();
        let index = SubsetIndex::new(4, 3);
        let u = dx(4, &[index.position(0b1101).unwrap()]);
        assert_eq!(w.psi(&u).unwrap(), dx(4, &[0, 2, 3]));
        assert_eq!(w.psi_inverse(&w.psi(&u).unwrap()).unwrap(), u);
    }

    #[test]
    fn f_and_g_for_p_one() {
        let w = build_weil_jacobian(&cat("A2"), 1).unwrap();
        let eta = dx(4, &[0, 2]).add(&dx(4, &[1, 3]).scale(&q(3)));
        assert_eq!(w.f_map(&eta).unwrap(), eta);
        assert_eq!(w.g_map(&eta).unwrap(), eta);
    }

    #[test]
    fn projection_properties_hold() {
        for label in ["A1", "A2", "B2", "S_sqrt2"] {
            for p in [1, 3] {
                if p >= cat(label).real_dim() {
                    continue;
                }
                let w = build_weil_jacobian(&cat(label), p).unwrap();
                let pi = sampson_projection(&w).unwrap();
                let report = verify_projection(&w, &pi);
                assert!(report.all_pass(), "{label} p={p}: {:?}", report.failures());
            }
        }
    }
}
