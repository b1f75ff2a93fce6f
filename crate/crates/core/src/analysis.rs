//! Pushforwards of invariant forms along a surjection `π : Â → A`.
//!
//! The central object is the image of `D ↦ π_*(ω̂^{N−q−1} ∧ D)` over the
//! rational (1,1) classes `D` of the source. It is computed either by brute
//! force (`direct`) or through the split `ω̂ = ω₁ + π*α`, which collapses the
//! binomial expansion of `ω̂^{N−q−1}` to two terms (`two_term`).

use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::abelian::AbelianError;
use crate::exterior::{multiset_tuples, FormSpan, KForm, MultiIndex, SubsetIndex};
use crate::linalg::{is_positive_definite, saturate, primitive_integer_vector, EchelonBasis, LatticeBasis, Matrix};
use crate::scalar::{binomial, factorial, Scalar, Q};
use crate::weil::{FiberCoordinates, SurjectionData, WeilError, WeilJacobian};

/// Default cap on the number of terms the direct strategy may materialize.
pub const DEFAULT_TERM_BUDGET: u128 = 100_000_000;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum AnalysisError {
    #[error("W meets its complement: the form is degenerate on the kernel")]
    DegenerateSplit,
    #[error("direct strategy needs about {estimate} terms, above the cap {cap}")]
    BudgetExceeded { estimate: u128, cap: u128 },
    #[error("q = {q} out of range for n = {n}, N = {big_n}")]
    InvalidQ { q: usize, n: usize, big_n: usize },
    #[error("degenerate case: {0}")]
    DegenerateCase(String),
    #[error("reference form is not anisotropic")]
    NotAnisotropic,
    #[error("form has wrong shape: {0}")]
    Shape(String),
    #[error(transparent)]
    Weil(#[from] WeilError),
    #[error(transparent)]
    Abelian(#[from] AbelianError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    #[default]
    Auto,
    Direct,
    TwoTerm,
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Strategy::Auto => "auto",
            Strategy::Direct => "direct",
            Strategy::TwoTerm => "two_term",
        })
    }
}

/// Symmetric part `½(Ω̂Ĵ − ĴᵀΩ̂)` of `u, v ↦ ω̂(u, Ĵv)`.
fn symmetric_pairing(omega_hat: &KForm<Q>, j_hat: &Matrix<Scalar>) -> Matrix<Scalar> {
    let w = omega_hat.to_alternating_matrix().to_scalar();
    let a = w.mul(j_hat);
    let half = Scalar::rational(crate::scalar::qf(1, 2));
    a.add(&a.transpose()).scale(&half)
}

/// `ω̂(u, Ĵu) ≠ 0` for all `u ≠ 0`, i.e. the symmetric pairing is definite.
pub fn anisotropy_check(omega_hat: &KForm<Q>, j_hat: &Matrix<Scalar>) -> bool {
    if omega_hat.degree() != 2 || omega_hat.ambient() != j_hat.rows() {
        return false;
    }
    let s = symmetric_pairing(omega_hat, j_hat);
    is_positive_definite(&s).unwrap_or(false) || is_positive_definite(&s.neg()).unwrap_or(false)
}

/// Smallest `t ∈ {1, 2, 4, …}` with `ω̂ + t ω̂₀` anisotropic.
pub fn make_anisotropic(
    omega_hat: &KForm<Q>,
    reference: &KForm<Q>,
    j_hat: &Matrix<Scalar>,
) -> Result<(Q, KForm<Q>), AnalysisError> {
    if !anisotropy_check(reference, j_hat) {
        return Err(AnalysisError::NotAnisotropic);
    }
    let mut t = Q::one();
    loop {
        let candidate = omega_hat.add(&reference.scale(&t));
        if anisotropy_check(&candidate, j_hat) {
            return Ok((t, candidate));
        }
        t *= Q::from_integer(BigInt::from(2));
    }
}

/// `ω̂ = ω₁ + π*α` with `ω₁` living on `W = ker π` and `α` on the target.
#[derive(Debug, Clone)]
pub struct SplitPolarization {
    pub omega_hat: KForm<Q>,
    pub w_basis: Vec<Vec<Q>>,
    pub wperp_basis: Vec<Vec<Q>>,
    pub omega1: KForm<Q>,
    pub alpha: KForm<Q>,
    /// Lifts of the target basis inside `W^⊥`.
    pub lifts: Matrix<Q>,
    /// `ω̂` on the oriented kernel frame.
    pub omega_w: Matrix<Q>,
    pub pf_omega_w: Q,
    omega_w_inv: Option<Matrix<Q>>,
}

/// Exact verification of every structural claim about a split.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SplitChecks {
    pub complement_trivial: bool,
    pub wperp_dim: usize,
    pub no_cross_terms: bool,
    pub reconstruction: bool,
    pub omega1_type_11: bool,
    pub alpha_type_11: bool,
    pub w_lattice_rank: usize,
    pub wperp_lattice_rank: usize,
}

impl SplitChecks {
    pub fn all_pass(&self, fiber: usize, base: usize) -> bool {
        self.complement_trivial
            && self.wperp_dim == base
            && self.no_cross_terms
            && self.reconstruction
            && self.omega1_type_11
            && self.alpha_type_11
            && self.w_lattice_rank == fiber
            && self.wperp_lattice_rank == base
    }
}

/// Build `W^⊥ = {x : ω̂(x, W) = 0}` and the transported form `α`.
pub fn split_omega(pi: &SurjectionData, omega_hat: &KForm<Q>) -> Result<SplitPolarization, AnalysisError> {
    let big = pi.source().real_dim();
    let small = pi.target().real_dim();
    if omega_hat.degree() != 2 || omega_hat.ambient() != big {
        return Err(AnalysisError::Shape("ω̂ must be a 2-form on the source".into()));
    }
    let omega = omega_hat.to_alternating_matrix();
    let frame = pi.frame_rational();
    let constraints = Matrix::from_rows(frame.iter().map(|w| omega.transpose().mul_vec(w)).collect::<Vec<_>>());
    let wperp_basis = if frame.is_empty() { Matrix::<Q>::identity(big).row_vecs() } else { constraints.kernel_basis() };
    let mut joint = EchelonBasis::<Q>::new(big);
    for v in frame.iter().chain(&wperp_basis) {
        joint.insert_dense(v);
    }
    if wperp_basis.len() != small || joint.dim() != big {
        return Err(AnalysisError::DegenerateSplit);
    }
    let wperp = Matrix::from_columns(big, &wperp_basis);
    let t = pi.matrix().mul(&wperp);
    let t_inv = t.inverse().map_err(|_| AnalysisError::DegenerateSplit)?;
    let lifts = wperp.mul(&t_inv);
    let alpha_m = lifts.transpose().mul(&omega).mul(&lifts);
    let p_wperp = lifts.mul(pi.matrix());
    let p_w = Matrix::<Q>::identity(big).sub(&p_wperp);
    let omega1_m = p_w.transpose().mul(&omega).mul(&p_w);
    let fm = Matrix::from_columns(big, &frame);
    let omega_w = fm.transpose().mul(&omega).mul(&fm);
    let pf_omega_w = omega_w.pfaffian();
    let omega_w_inv = omega_w.inverse().ok();
    Ok(SplitPolarization {
        omega_hat: omega_hat.clone(),
        w_basis: frame,
        wperp_basis,
        omega1: KForm::from_alternating_matrix(&omega1_m),
        alpha: KForm::from_alternating_matrix(&alpha_m),
        lifts,
        omega_w,
        pf_omega_w,
        omega_w_inv,
    })
}

fn is_j_invariant(m: &Matrix<Q>, j: &Matrix<Scalar>) -> bool {
    let ms = m.to_scalar();
    j.transpose().mul(&ms).mul(j) == ms
}

fn lattice_rank(vectors: &[Vec<Q>]) -> usize {
    let ambient = vectors.first().map_or(0, Vec::len);
    let ints = vectors.iter().map(|v| primitive_integer_vector(v)).collect();
    saturate(&LatticeBasis::new(ambient, ints)).rank()
}

impl SplitPolarization {
    pub fn fiber_dim(&self) -> usize {
        self.w_basis.len()
    }

    pub fn checks(&self, pi: &SurjectionData) -> SplitChecks {
        let big = pi.source().real_dim();
        let fiber = self.fiber_dim();
        let mut joint = EchelonBasis::<Q>::new(big);
        for v in self.w_basis.iter().chain(&self.wperp_basis) {
            joint.insert_dense(v);
        }
        let complement_trivial = joint.dim() == fiber + self.wperp_basis.len();
        let mut cols = self.w_basis.clone();
        cols.extend(self.wperp_basis.iter().cloned());
        let c = Matrix::from_columns(big, &cols);
        let adapted = self.omega_hat.pullback(&c);
        let w_mask: u64 = if fiber == 0 { 0 } else { u64::MAX >> (64 - fiber) };
        let no_cross_terms = adapted.terms().iter().all(|(m, _)| m.bits() & w_mask == 0 || m.bits() & !w_mask == 0);
        let reconstruction = self.omega1.add(&pi.pullback(&self.alpha)) == self.omega_hat;
        SplitChecks {
            complement_trivial,
            wperp_dim: self.wperp_basis.len(),
            no_cross_terms,
            reconstruction,
            omega1_type_11: is_j_invariant(&self.omega1.to_alternating_matrix(), pi.source().j()),
            alpha_type_11: is_j_invariant(&self.alpha.to_alternating_matrix(), pi.target().j()),
            w_lattice_rank: lattice_rank(&self.w_basis),
            wperp_lattice_rank: lattice_rank(&self.wperp_basis),
        }
    }

    /// `s = π_*(ω₁^{m−1} ∧ D)` (a number) and `t = π_*(ω₁^m ∧ D)` (a 2-form).
    ///
    /// With `Ω_W` the kernel block, `ω₁^m = m!·Pf(Ω_W)·vol_W`, and the
    /// `(m−1)`-st power contracts with `D` through `½ Pf(Ω_W) tr(Ω_W⁻¹ D_WW)`.
    pub fn two_term_parts(&self, d: &KForm<Q>) -> (Q, KForm<Q>) {
        let m = self.fiber_dim() / 2;
        let dm = d.to_alternating_matrix();
        let small = self.lifts.cols();
        let d_ll = self.lifts.transpose().mul(&dm).mul(&self.lifts);
        let top = Q::from_integer(factorial(m as u64)) * &self.pf_omega_w;
        let t = KForm::from_alternating_matrix(&d_ll).scale(&top);
        let s = if m == 0 {
            Q::zero()
        } else {
            let fm = Matrix::from_columns(d.ambient(), &self.w_basis);
            let d_ww = fm.transpose().mul(&dm).mul(&fm);
            let inv = self.omega_w_inv.as_ref().expect("nondegenerate on W");
            let prod = inv.mul(&d_ww);
            let trace = (0..prod.rows()).fold(Q::zero(), |acc, i| acc + prod.get(i, i));
            Q::from_integer(factorial(m as u64 - 1)) * &self.pf_omega_w * trace / Q::from_integer(BigInt::from(2))
        };
        debug_assert_eq!(t.ambient(), small);
        (s, t)
    }
}

/// `c₁ = C(K, n−q)`, `c₂ = C(K, n−q−1)` for `K = N−q−1`.
pub fn two_term_constants(big_n: usize, n: usize, q: usize) -> (BigInt, BigInt) {
    let k = big_n as i64 - q as i64 - 1;
    let a = n as i64 - q as i64;
    (binomial(k, a), binomial(k, a - 1))
}

/// `c₁·s·α^{a} + c₂·t ∧ α^{a−1}` with `a = n − q`.
fn two_term_value(split: &SplitPolarization, alpha_powers: &[KForm<Q>], a: usize, c: &(BigInt, BigInt), d: &KForm<Q>) -> KForm<Q> {
    let (s, t) = split.two_term_parts(d);
    let small = split.lifts.cols();
    let mut out = KForm::zero(small, 2 * a);
    if !s.is_zero() && !c.0.is_zero() {
        out = out.add(&alpha_powers[a].scale(&(Q::from_integer(c.0.clone()) * s)));
    }
    if a >= 1 && !c.1.is_zero() && !t.is_zero() {
        out = out.add(&t.wedge(&alpha_powers[a - 1]).unwrap().scale(&Q::from_integer(c.1.clone())));
    }
    out
}

/// `Σ_{j=1}^{k} C(2N, 2j)`, the size of the iterated power computation.
pub fn direct_term_estimate(source_dim: usize, power: usize) -> u128 {
    let mut total: u128 = 0;
    for j in 1..=power {
        let c = binomial(source_dim as i64, 2 * j as i64).to_u128().unwrap_or(u128::MAX);
        total = total.saturating_add(c);
    }
    total
}

/// Which strategy produced a family of pushforwards.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StrategyNote {
    pub requested: Strategy,
    pub used: Strategy,
    pub direct_estimate: String,
    pub expansion_dependent: bool,
}

/// `π_*((Σ_j ω̂_j^{power}) ∧ D)` for every `D`.
pub fn pushforward_family(
    pi: &SurjectionData,
    omegas: &[KForm<Q>],
    power: usize,
    ds: &[KForm<Q>],
    strategy: Strategy,
    cap: u128,
) -> Result<(Vec<KForm<Q>>, StrategyNote), AnalysisError> {
    let fiber = pi.fiber_dim();
    let small = pi.target().real_dim();
    if 2 * power + 2 < fiber {
        return Err(AnalysisError::DegenerateCase(format!("degree {} is below the fiber dimension {fiber}", 2 * power + 2)));
    }
    let out_degree = 2 * power + 2 - fiber;
    let estimate = direct_term_estimate(pi.source().real_dim(), power);
    let used = match strategy {
        Strategy::Auto if estimate <= cap => Strategy::Direct,
        Strategy::Auto => Strategy::TwoTerm,
        Strategy::Direct if estimate > cap => return Err(AnalysisError::BudgetExceeded { estimate, cap }),
        s => s,
    };
    let mut totals: Vec<KForm<Q>> = vec![KForm::zero(small, out_degree); ds.len()];
    match used {
        Strategy::Direct => {
            let b = pi.adapted_basis();
            let ds_adapted: Vec<KForm<Q>> = ds.par_iter().map(|d| d.pullback(&b)).collect();
            let targets = SubsetIndex::new(small, out_degree);
            let fiber_mask = FiberCoordinates::new(fiber, small).fiber_mask();
            for omega in omegas {
                let p = omega.pullback(&b).power(power);
                let pieces: Vec<KForm<Q>> = ds_adapted
                    .par_iter()
                    .map(|d| {
                        let terms = targets.masks().iter().map(|&jm| {
                            let full = fiber_mask | (jm << fiber);
                            (MultiIndex(jm), p.wedge_coefficient(d, full))
                        });
                        KForm::from_terms(small, out_degree, terms)
                    })
                    .collect();
                for (acc, piece) in totals.iter_mut().zip(pieces) {
                    *acc = acc.add(&piece);
                }
            }
        }
        Strategy::TwoTerm => {
            let m = fiber / 2;
            // power = K; the expansion keeps j = m−1 and j = m, i.e. α^{K−m+1} and α^{K−m}
            let a = power + 1 - m;
            let c = (binomial(power as i64, a as i64), binomial(power as i64, a as i64 - 1));
            for omega in omegas {
                let split = split_omega(pi, omega)?;
                let alpha_powers: Vec<KForm<Q>> = (0..=a).map(|k| split.alpha.power(k)).collect();
                let pieces: Vec<KForm<Q>> =
                    ds.par_iter().map(|d| two_term_value(&split, &alpha_powers, a, &c, d)).collect();
                for (acc, piece) in totals.iter_mut().zip(pieces) {
                    *acc = acc.add(&piece);
                }
            }
        }
        Strategy::Auto => unreachable!(),
    }
    let note = StrategyNote {
        requested: strategy,
        used,
        direct_estimate: estimate.to_string(),
        expansion_dependent: used == Strategy::TwoTerm,
    };
    Ok((totals, note))
}

/// The matrix of `D ↦ π_*(ω̂^{N−q−1} ∧ D)` on the source (1,1) classes.
#[derive(Debug, Clone)]
pub struct PushforwardImage {
    pub q: usize,
    pub degree: usize,
    pub forms: Vec<KForm<Q>>,
    pub image_dim: usize,
    pub strategy: StrategyNote,
}

impl PushforwardImage {
    /// Rows in the canonical basis of the target degree.
    pub fn matrix(&self, target_dim: usize) -> Vec<Vec<Q>> {
        let index = SubsetIndex::new(target_dim, self.degree);
        self.forms.iter().map(|f| f.to_dense(&index)).collect()
    }
}

fn check_q(pi: &SurjectionData, q: usize) -> Result<(usize, usize), AnalysisError> {
    let (big_n, n) = (pi.source().n(), pi.target().n());
    if q == 0 || q > n || q + 1 > big_n {
        return Err(AnalysisError::InvalidQ { q, n, big_n });
    }
    Ok((big_n, n))
}

pub fn image_of_pushforward_map(
    pi: &SurjectionData,
    omega_hat: &KForm<Q>,
    q: usize,
    strategy: Strategy,
    cap: u128,
) -> Result<PushforwardImage, AnalysisError> {
    let (big_n, n) = check_q(pi, q)?;
    let ds = pi.source().rational_hodge_classes(1)?.classes;
    let (forms, note) = pushforward_family(pi, std::slice::from_ref(omega_hat), big_n - q - 1, &ds, strategy, cap)?;
    let mut span = FormSpan::new(pi.target().real_dim(), 2 * (n - q));
    for f in &forms {
        span.insert(f);
    }
    Ok(PushforwardImage { q, degree: 2 * (n - q), forms, image_dim: span.dim(), strategy: note })
}

/// Outcome of comparing the two-term formula with the direct pushforward.
#[derive(Debug, Clone)]
pub struct TwoTermCheck {
    pub holds: bool,
    pub c1: BigInt,
    pub c2: BigInt,
    pub residual: KForm<Q>,
}

/// `π_*(ω̂^{N−q−1} ∧ D)` directly versus `α^{n−q−1} ∧ [c₁ s α + c₂ t]`.
pub fn two_term_expansion_check(pi: &SurjectionData, split: &SplitPolarization, q: usize, d: &KForm<Q>) -> Result<TwoTermCheck, AnalysisError> {
    let (big_n, n) = check_q(pi, q)?;
    let power = big_n - q - 1;
    let lhs = pi.pushforward(&split.omega_hat.power(power).wedge(d).unwrap())?;
    let (c1, c2) = two_term_constants(big_n, n, q);
    let a = n - q;
    let alpha_powers: Vec<KForm<Q>> = (0..=a).map(|k| split.alpha.power(k)).collect();
    let rhs = two_term_value(split, &alpha_powers, a, &(c1.clone(), c2.clone()), d);
    let residual = lhs.sub(&rhs);
    Ok(TwoTermCheck { holds: residual.is_zero(), c1, c2, residual })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ContainmentReport {
    pub holds: bool,
    pub span_dim: usize,
    /// Membership in `α^{n−q−1} ∧ H^{1,1}(A, ℚ)`, when a split exists and `q < n`.
    pub sharper: Option<bool>,
}

pub fn containment_check(
    pi: &SurjectionData,
    image: &PushforwardImage,
    split: Option<&SplitPolarization>,
) -> Result<ContainmentReport, AnalysisError> {
    let target = pi.target();
    let n = target.n();
    let k = n - image.q;
    let span = target.divisor_power_span(k)?;
    let holds = image.forms.iter().all(|f| span.contains(f));
    let sharper = match split {
        Some(s) if k >= 1 => {
            let ap = s.alpha.power(k - 1);
            let mut sharp = FormSpan::new(target.real_dim(), 2 * k);
            for h in target.rational_hodge_classes(1)?.classes {
                sharp.insert(&ap.wedge(&h).unwrap());
            }
            Some(image.forms.iter().all(|f| sharp.contains(f)))
        }
        _ => None,
    };
    Ok(ContainmentReport { holds, span_dim: span.dim(), sharper })
}

/// Every number and verdict attached to one value of `q`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Theorem1Report {
    pub q: usize,
    #[serde(rename = "N")]
    pub big_n: usize,
    pub n: usize,
    pub anisotropic: bool,
    pub image_dim: usize,
    pub h11_source: usize,
    pub h11_target: usize,
    /// `image_dim ≤ h^{1,1}_ℚ(A)`; predicted for anisotropic `ω̂`.
    pub bound_holds: bool,
    pub containment_holds: bool,
    pub sharper_containment: Option<bool>,
    /// `Some` when both strategies ran and were compared.
    pub two_term_identity_holds: Option<bool>,
    pub c1: String,
    pub c2: String,
    pub hodge_dim_target: usize,
    pub h_qq_target: usize,
    pub divisor_span_dim: usize,
    pub surjective_onto_hodge: bool,
    /// A map `H^{q,q} → H^{n−q,n−q}` factoring through the image can be injective only if this holds.
    pub injective: bool,
    pub strategy: StrategyNote,
}

impl Theorem1Report {
    /// Failures of predicted invariants (not of hypotheses).
    pub fn failures(&self) -> Vec<&'static str> {
        let mut out = Vec::new();
        if self.anisotropic && !self.bound_holds {
            out.push("bound");
        }
        if !self.containment_holds {
            out.push("containment");
        }
        if self.sharper_containment == Some(false) {
            out.push("sharper_containment");
        }
        if self.two_term_identity_holds == Some(false) {
            out.push("two_term");
        }
        if self.divisor_span_dim < self.hodge_dim_target && self.surjective_onto_hodge {
            out.push("surjectivity_verdict");
        }
        out
    }
}

/// Run every Theorem 1 check for one `q`.
///
/// With `compare_strategies`, a direct run is cross-checked against the
/// two-term expansion whenever the split exists.
pub fn theorem1(
    pi: &SurjectionData,
    omega_hat: &KForm<Q>,
    q: usize,
    strategy: Strategy,
    cap: u128,
    compare_strategies: bool,
) -> Result<Theorem1Report, AnalysisError> {
    let (big_n, n) = check_q(pi, q)?;
    let source = pi.source();
    let target = pi.target();
    let anisotropic = anisotropy_check(omega_hat, source.j());
    let image = image_of_pushforward_map(pi, omega_hat, q, strategy, cap)?;
    let split = split_omega(pi, omega_hat).ok();
    let containment = containment_check(pi, &image, split.as_ref())?;
    let two_term_identity_holds = match (&split, image.strategy.used, compare_strategies) {
        (Some(_), Strategy::Direct, true) => {
            let other = image_of_pushforward_map(pi, omega_hat, q, Strategy::TwoTerm, cap)?;
            Some(other.forms == image.forms)
        }
        _ => None,
    };
    let (c1, c2) = two_term_constants(big_n, n, q);
    let h11_target = target.rational_hodge_classes(1)?.dim();
    let hodge_dim_target = target.rational_hodge_classes(n - q)?.dim();
    let h_qq_target = target.rational_hodge_classes(q)?.dim();
    Ok(Theorem1Report {
        q,
        big_n,
        n,
        anisotropic,
        image_dim: image.image_dim,
        h11_source: source.rational_hodge_classes(1)?.dim(),
        h11_target,
        bound_holds: image.image_dim <= h11_target,
        containment_holds: containment.holds,
        sharper_containment: containment.sharper,
        two_term_identity_holds,
        c1: format!("{c1}/1"),
        c2: format!("{c2}/1"),
        hodge_dim_target,
        h_qq_target,
        divisor_span_dim: containment.span_dim,
        surjective_onto_hodge: image.image_dim == hodge_dim_target,
        injective: image.image_dim >= h_qq_target,
        strategy: image.strategy,
    })
}

/// Rank data of `ι(β) = π_*(g(β) ∧ Σ_j ω̂_j^{N−p−1})` on `H^{p,p}(A, ℚ)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct IotaReport {
    pub p: usize,
    pub n: usize,
    #[serde(rename = "N")]
    pub big_n: usize,
    pub summands: usize,
    pub source_degree: usize,
    pub target_degree: usize,
    pub h_pp_source: usize,
    pub h_target: usize,
    pub rank: usize,
    pub injective: bool,
    pub surjective: bool,
    pub bound: usize,
    pub bound_holds: bool,
    pub strategy: StrategyNote,
    pub degree_note: String,
}

pub fn sampson_iota(
    w: &WeilJacobian,
    pi: &SurjectionData,
    z: &[KForm<Q>],
    strategy: Strategy,
    cap: u128,
) -> Result<IotaReport, AnalysisError> {
    let (p, n, big_n) = (w.p(), w.base().n(), w.big_n());
    if p >= n {
        return Err(AnalysisError::DegenerateCase(format!("p = {p} is not below n = {n}")));
    }
    if big_n < p + 1 {
        return Err(AnalysisError::DegenerateCase(format!("N = {big_n} leaves no power of the forms")));
    }
    let base = w.base();
    let betas = base.rational_hodge_classes(p)?.classes;
    let ds: Vec<KForm<Q>> = betas.iter().map(|b| w.g_map(b)).collect::<Result<_, _>>()?;
    let (forms, note) = pushforward_family(pi, z, big_n - p - 1, &ds, strategy, cap)?;
    let degree = 2 * (n - p);
    let mut span = FormSpan::new(base.real_dim(), degree);
    for f in &forms {
        span.insert(f);
    }
    let h_target = base.rational_hodge_classes(n - p)?.dim();
    let hodge = base.rational_hodge_classes(n - p)?.classes;
    let mut hodge_span = FormSpan::new(base.real_dim(), degree);
    for h in &hodge {
        hodge_span.insert(h);
    }
    let lands_in_hodge = forms.iter().all(|f| hodge_span.contains(f));
    let bound = z.len() * base.rational_hodge_classes(1)?.dim();
    Ok(IotaReport {
        p,
        n,
        big_n,
        summands: z.len(),
        source_degree: 2 * p,
        target_degree: degree,
        h_pp_source: betas.len(),
        h_target,
        rank: span.dim(),
        injective: span.dim() == betas.len(),
        surjective: lands_in_hodge && span.dim() == h_target,
        bound,
        bound_holds: span.dim() <= bound,
        strategy: note,
        degree_note: format!(
            "images have degree 2(n-p) = {degree}, i.e. lie in H^{{{0},{0}}}; a target H^{{{p},{p}}} would need degree {1}",
            n - p,
            2 * p
        ),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProbeVerdict {
    Spans,
    NotDecidedWithinBudget,
    ProvablyProperSubspace,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ProbeReport {
    pub q: usize,
    pub factors: usize,
    pub basis_size: usize,
    pub total_monomials: String,
    pub monomials_examined: usize,
    pub budget: usize,
    pub span_dim: usize,
    pub target_dim: usize,
    pub verdict: ProbeVerdict,
}

/// Span of `π_*(D₁ ∧ … ∧ D_{N−q})` over monomials in graded-lex order.
pub fn modified_approach_probe(pi: &SurjectionData, q: usize, budget: usize) -> Result<ProbeReport, AnalysisError> {
    let (big_n, n) = (pi.source().n(), pi.target().n());
    if q == 0 || q > n {
        return Err(AnalysisError::InvalidQ { q, n, big_n });
    }
    let factors = big_n - q;
    let basis = pi.source().rational_hodge_classes(1)?.classes;
    let target_dim = pi.target().rational_hodge_classes(n - q)?.dim();
    let total = binomial((basis.len() + factors) as i64 - 1, factors as i64);
    let fiber = pi.fiber_dim();
    let small = pi.target().real_dim();
    let b = pi.adapted_basis();
    let adapted: Vec<KForm<Q>> = basis.par_iter().map(|d| d.pullback(&b)).collect();
    let coords = FiberCoordinates::new(fiber, small);
    let targets = SubsetIndex::new(small, 2 * (n - q));
    let mut span = FormSpan::new(small, 2 * (n - q));
    let mut stack: Vec<(usize, KForm<Q>)> = Vec::new();
    let mut examined = 0usize;
    let mut complete = true;
    for tuple in multiset_tuples(basis.len(), factors) {
        if span.dim() == target_dim {
            break;
        }
        if examined == budget {
            complete = false;
            break;
        }
        examined += 1;
        // reuse the longest common prefix; the last factor is never materialized
        let keep = stack.iter().zip(&tuple).take_while(|((i, _), t)| i == *t).count();
        stack.truncate(keep.min(factors - 1));
        while stack.len() + 1 < factors {
            let idx = tuple[stack.len()];
            let prev = stack.last().map_or_else(|| KForm::one(b.cols()), |(_, f)| f.clone());
            stack.push((idx, prev.wedge(&adapted[idx]).unwrap()));
        }
        let prefix = stack.last().map_or_else(|| KForm::one(b.cols()), |(_, f)| f.clone());
        let last = &adapted[tuple[factors - 1]];
        let terms = targets.masks().iter().map(|&jm| {
            let full = coords.fiber_mask() | (jm << fiber);
            (MultiIndex(jm), prefix.wedge_coefficient(last, full))
        });
        span.insert(&KForm::from_terms(small, 2 * (n - q), terms));
    }
    let verdict = if span.dim() == target_dim {
        ProbeVerdict::Spans
    } else if complete && BigInt::from(examined) == total {
        ProbeVerdict::ProvablyProperSubspace
    } else {
        ProbeVerdict::NotDecidedWithinBudget
    };
    Ok(ProbeReport {
        q,
        factors,
        basis_size: basis.len(),
        total_monomials: total.to_string(),
        monomials_examined: examined,
        budget,
        span_dim: span.dim(),
        target_dim,
        verdict,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::abelian::PolarizedAbelianVariety;
    use crate::scalar::q;
    use crate::weil::custom_surjection;

    fn cat(label: &str) -> PolarizedAbelianVariety {
        PolarizedAbelianVariety::catalog(label).unwrap()
    }

    fn product_projection() -> SurjectionData {
        let m = Matrix::from_fn(4, 6, |r, c| if r == c { q(1) } else { q(0) });
        custom_surjection(&cat("A3"), &cat("A2"), m).unwrap()
    }

    #[test]
    fn anisotropy_examples() {
        let a2 = cat("A2");
        let w = a2.kahler_form();
        assert!(anisotropy_check(&w, a2.j()));
        assert!(!anisotropy_check(&KForm::zero(4, 2), a2.j()));
        let mixed = KForm::basis(4, &[0, 1]).sub(&KForm::basis(4, &[2, 3]));
        assert!(!anisotropy_check(&mixed, a2.j()));
        let (t, fixed) = make_anisotropic(&mixed, &w.scale(&q(1)), a2.j()).unwrap();
        assert_eq!(t, q(2));
        assert!(anisotropy_check(&fixed, a2.j()));
        let (t0, w0) = make_anisotropic(&KForm::zero(4, 2), &w, a2.j()).unwrap();
        assert_eq!((t0, w0), (q(1), w));
    }

    #[test]
    fn split_of_product() {
        let pi = product_projection();
        let w = pi.source().kahler_form();
        let split = split_omega(&pi, &w).unwrap();
        assert!(split.checks(&pi).all_pass(2, 4));
        assert_eq!(split.alpha, pi.target().kahler_form());
        assert_eq!(split.omega1, KForm::basis(6, &[4, 5]));
    }

    #[test]
    fn degenerate_split() {
        let pi = product_projection();
        let pulled = pi.pullback(&pi.target().kahler_form());
        assert!(matches!(split_omega(&pi, &pulled), Err(AnalysisError::DegenerateSplit)));
    }

    #[test]
    fn constants() {
        assert_eq!(two_term_constants(3, 2, 1), (BigInt::from(1), BigInt::from(1)));
        assert_eq!(two_term_constants(10, 3, 1), (BigInt::from(28), BigInt::from(8)));
        assert_eq!(two_term_constants(4, 4, 4).1, BigInt::zero());
    }

    #[test]
    fn estimate_and_budget() {
        assert!(direct_term_estimate(20, 8) < DEFAULT_TERM_BUDGET);
        assert!(direct_term_estimate(56, 26) > DEFAULT_TERM_BUDGET);
    }

    #[test]
    fn product_image_and_probe() {
        let pi = product_projection();
        let w = pi.source().kahler_form();
        let img = image_of_pushforward_map(&pi, &w, 1, Strategy::Direct, DEFAULT_TERM_BUDGET).unwrap();
        assert!(img.image_dim <= 4);
        let two = image_of_pushforward_map(&pi, &w, 1, Strategy::TwoTerm, DEFAULT_TERM_BUDGET).unwrap();
        assert_eq!(img.forms, two.forms);
        let probe = modified_approach_probe(&pi, 1, 1000).unwrap();
        assert_eq!(probe.total_monomials, "45");
        assert!(probe.verdict != ProbeVerdict::NotDecidedWithinBudget);
    }

    #[test]
    fn iota_degenerate_when_p_not_below_n() {
        let w = crate::weil::build_weil_jacobian(&cat("A2"), 3).unwrap();
        let pi = crate::weil::sampson_projection(&w).unwrap();
        let z = vec![w.variety().kahler_form()];
        assert!(matches!(sampson_iota(&w, &pi, &z, Strategy::Auto, DEFAULT_TERM_BUDGET), Err(AnalysisError::DegenerateCase(_))));
    }

    fn sampson_a3() -> (WeilJacobian, SurjectionData) {
        let w = crate::weil::build_weil_jacobian(&cat("A3"), 3).unwrap();
        let pi = crate::weil::sampson_projection(&w).unwrap();
        (w, pi)
    }

    #[test]
    fn parts_match_materialized_pushforwards() {
        let (w, pi) = sampson_a3();
        let omega = w.variety().kahler_form();
        let split = split_omega(&pi, &omega).unwrap();
        let checks = split.checks(&pi);
        assert!(checks.all_pass(14, 6), "{checks:?}");
        let m = split.fiber_dim() / 2;
        let classes = pi.source().rational_hodge_classes(1).unwrap().classes;
        let p_low = split.omega1.power(m - 1);
        let p_top = split.omega1.power(m);
        for d in classes.iter().step_by(17).take(4) {
            let (s, t) = split.two_term_parts(d);
            let s_direct = pi.pushforward(&p_low.wedge(d).unwrap()).unwrap();
            let t_direct = pi.pushforward(&p_top.wedge(d).unwrap()).unwrap();
            assert_eq!(s_direct, KForm::constant(6, s));
            assert_eq!(t_direct, t);
        }
    }

    #[test]
    fn sampson_two_term_constants_certified() {
        let (w, pi) = sampson_a3();
        let split = split_omega(&pi, &w.variety().kahler_form()).unwrap();
        let classes = pi.source().rational_hodge_classes(1).unwrap().classes;
        for d in classes.iter().step_by(33) {
            let check = two_term_expansion_check(&pi, &split, 1, d).unwrap();
            assert!(check.holds, "residual {:?}", check.residual);
            assert_eq!((check.c1.clone(), check.c2.clone()), (binomial(8, 2), binomial(8, 1)));
        }
    }

    #[test]
    fn isogeny_has_empty_fiber() {
        let a = cat("A2");
        let m = Matrix::from_fn(4, 4, |r, c| if r == c { q(2) } else { q(0) });
        let pi = custom_surjection(&a, &a, m).unwrap();
        let split = split_omega(&pi, &a.kahler_form()).unwrap();
        assert_eq!(split.fiber_dim(), 0);
        assert!(split.omega1.is_zero());
        let d = &a.rational_hodge_classes(1).unwrap().classes[0];
        let check = two_term_expansion_check(&pi, &split, 1, d).unwrap();
        assert!(check.holds);
        assert_eq!(check.c1, BigInt::zero());
    }

    #[test]
    fn iota_at_p_one_is_lefschetz_multiplication() {
        let a = cat("A3");
        let w = crate::weil::build_weil_jacobian(&a, 1).unwrap();
        let pi = crate::weil::sampson_projection(&w).unwrap();
        let z = vec![w.variety().kahler_form()];
        let report = sampson_iota(&w, &pi, &z, Strategy::Direct, DEFAULT_TERM_BUDGET).unwrap();
        let omega = a.kahler_form();
        let mut span = FormSpan::new(6, 4);
        for b in a.rational_hodge_classes(1).unwrap().classes {
            span.insert(&b.wedge(&omega).unwrap());
        }
        assert_eq!(report.rank, span.dim());
        assert_eq!(report.rank, 9);
    }

    #[test]
    fn probe_is_deterministic() {
        let pi = product_projection();
        let a = modified_approach_probe(&pi, 1, 10).unwrap();
        let b = modified_approach_probe(&pi, 1, 10).unwrap();
        assert_eq!(a, b);
    }
}
