//! Property tests for the algebraic invariants of the library.

mod common;

use common::*;
use hodgeprobe::abelian::PolarizedAbelianVariety;
use hodgeprobe::analysis::{anisotropy_check, make_anisotropic, modified_approach_probe, split_omega};
use hodgeprobe::cli::scenario::parse_scenario;
use hodgeprobe::exterior::{KForm, MultiIndex};
use hodgeprobe::linalg::{hermite_normal_form, is_positive_definite, saturate, LatticeBasis, Matrix};
use hodgeprobe::scalar::Q;
use hodgeprobe::weil::{build_weil_jacobian, custom_surjection};
use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use proptest::prelude::*;

fn q_strategy() -> impl Strategy<Value = Q> {
    (-6i64..=6, 1i64..=4).prop_map(|(n, d)| Q::new(BigInt::from(n), BigInt::from(d)))
}

fn form_strategy(ambient: usize, degree: usize) -> impl Strategy<Value = KForm<Q>> {
    let all = subsets(ambient, degree);
    let n = all.len();
    prop::collection::vec((0..n, q_strategy()), 0..6).prop_map(move |terms| {
        KForm::from_terms(ambient, degree, terms.into_iter().map(|(i, x)| (MultiIndex(all[i]), x)))
    })
}

fn matrix_strategy(rows: usize, cols: usize) -> impl Strategy<Value = Matrix<Q>> {
    prop::collection::vec(q_strategy(), rows * cols)
        .prop_map(move |v| Matrix::from_fn(rows, cols, |i, j| v[i * cols + j].clone()))
}

fn int_matrix_strategy(rows: usize, cols: usize) -> impl Strategy<Value = Matrix<BigInt>> {
    prop::collection::vec(-6i64..=6, rows * cols)
        .prop_map(move |v| Matrix::from_fn(rows, cols, |i, j| BigInt::from(v[i * cols + j])))
}

fn vector_strategy(len: usize) -> impl Strategy<Value = Vec<Q>> {
    prop::collection::vec(q_strategy(), len)
}

fn sorted_strictly(u: &KForm<Q>) -> bool {
    u.terms().windows(2).all(|w| w[0].0 .0 < w[1].0 .0) && u.terms().iter().all(|(_, x)| !x.is_zero())
}

fn product_surjection() -> hodgeprobe::weil::SurjectionData {
    let source = PolarizedAbelianVariety::catalog("A1^3").unwrap();
    let target = PolarizedAbelianVariety::catalog("A2").unwrap();
    custom_surjection(&source, &target, coordinate_projection(6, 4)).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 48, ..ProptestConfig::default() })]

    #[test]
    fn wedge_is_associative(a in form_strategy(6, 1), b in form_strategy(6, 2), c in form_strategy(6, 2)) {
        let left = a.wedge(&b).unwrap().wedge(&c).unwrap();
        let right = a.wedge(&b.wedge(&c).unwrap()).unwrap();
        prop_assert_eq!(left, right);
    }

    #[test]
    fn wedge_is_graded_commutative(a in form_strategy(6, 1), b in form_strategy(6, 2), c in form_strategy(6, 3)) {
        prop_assert_eq!(a.wedge(&b).unwrap(), b.wedge(&a).unwrap());
        prop_assert_eq!(a.wedge(&c).unwrap(), c.wedge(&a).unwrap().neg());
        prop_assert!(a.wedge(&a).unwrap().is_zero());
    }

    #[test]
    fn terms_stay_sorted(a in form_strategy(6, 2), b in form_strategy(6, 2), m in matrix_strategy(4, 4)) {
        prop_assert!(sorted_strictly(&a.add(&b)));
        prop_assert!(sorted_strictly(&a.wedge(&b).unwrap()));
        let alt = m.sub(&m.transpose());
        prop_assert!(sorted_strictly(&KForm::from_alternating_matrix(&alt)));
        prop_assert_eq!(KForm::from_alternating_matrix(&alt).to_alternating_matrix(), alt);
    }

    #[test]
    fn pullback_is_functorial(u in form_strategy(4, 2), a in matrix_strategy(4, 3), b in matrix_strategy(3, 3)) {
        prop_assert_eq!(u.pullback(&a.mul(&b)), u.pullback(&a).pullback(&b));
    }

    #[test]
    fn pullback_preserves_wedge(u in form_strategy(4, 1), v in form_strategy(4, 2), m in matrix_strategy(4, 5)) {
        let lhs = u.wedge(&v).unwrap().pullback(&m);
        let rhs = u.pullback(&m).wedge(&v.pullback(&m)).unwrap();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn interior_is_an_antiderivation(a in form_strategy(5, 2), b in form_strategy(5, 1), v in vector_strategy(5)) {
        let lhs = a.wedge(&b).unwrap().interior(&v).unwrap();
        let rhs = a.interior(&v).unwrap().wedge(&b).unwrap().add(&a.wedge(&b.interior(&v).unwrap()).unwrap());
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn bidegree_components_sum_to_form(u in form_strategy(4, 2)) {
        let a = PolarizedAbelianVariety::catalog("A2").unwrap();
        let s = u.to_scalar();
        let mut total = KForm::zero(4, 2);
        for p in 0..=2 {
            total = total.add(&a.bidegree_component(&s, p, 2 - p).unwrap());
        }
        prop_assert_eq!(total, s);
    }

    #[test]
    fn kernel_basis_satisfies_rank_nullity(m in matrix_strategy(3, 5)) {
        let kernel = m.kernel_basis();
        prop_assert_eq!(m.rank() + kernel.len(), 5);
        prop_assert_eq!(m.rank(), rank(&dense(&m)));
        for v in &kernel {
            prop_assert!(m.mul_vec(v).iter().all(Zero::is_zero));
        }
        prop_assert_eq!(rank(&kernel), kernel.len());
    }

    #[test]
    fn positive_definiteness_matches_sylvester(m in matrix_strategy(3, 3)) {
        let s = m.add(&m.transpose());
        prop_assert_eq!(is_positive_definite(&s).unwrap(), common::is_positive_definite(&dense(&s)));
        let gram = m.transpose().mul(&m);
        prop_assert_eq!(is_positive_definite(&gram).unwrap(), !det(&dense(&m)).is_zero());
    }

    #[test]
    fn hermite_form_is_reached_by_unimodular_rows(a in int_matrix_strategy(3, 4)) {
        let (h, u) = hermite_normal_form(&a);
        prop_assert_eq!(Matrix::from_integer(&u).mul(&Matrix::from_integer(&a)), Matrix::from_integer(&h));
        let det_u = Matrix::from_integer(&u).determinant();
        prop_assert!(det_u.abs().is_one());
        let mut last_pivot: Option<usize> = None;
        for i in 0..h.rows() {
            match (0..h.cols()).find(|&j| !h.get(i, j).is_zero()) {
                Some(j) => {
                    prop_assert!(last_pivot.map_or(true, |p| j > p));
                    prop_assert!(h.get(i, j).is_positive());
                    for r in 0..i {
                        prop_assert!(!h.get(r, j).is_negative() && h.get(r, j) < h.get(i, j));
                    }
                    last_pivot = Some(j);
                }
                None => last_pivot = Some(usize::MAX),
            }
        }
    }

    #[test]
    fn saturation_is_idempotent(a in int_matrix_strategy(2, 4), scale in 1i64..=4) {
        let scaled: Vec<Vec<BigInt>> = (0..2).map(|i| a.row(i).iter().map(|x| x * scale).collect()).collect();
        let once = saturate(&LatticeBasis::new(4, scaled));
        let twice = saturate(&once);
        prop_assert!(once.same_lattice(&twice));
        let original = saturate(&LatticeBasis::new(4, a.row_vecs()));
        prop_assert!(once.same_lattice(&original));
    }

    #[test]
    fn projection_formula_on_product(u in form_strategy(4, 1), eta in form_strategy(6, 3)) {
        let pi = product_surjection();
        let lhs = pi.pushforward(&pi.pullback(&u).wedge(&eta).unwrap()).unwrap();
        let rhs = u.wedge(&pi.pushforward(&eta).unwrap()).unwrap();
        prop_assert_eq!(lhs, rhs);
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 12, ..ProptestConfig::default() })]

    #[test]
    fn split_reconstructs_random_anisotropic_forms(coeffs in prop::collection::vec(-3i64..=3, 0..24)) {
        let pi = product_surjection();
        let source = pi.source();
        let invariant = invariant_two_forms(&rational_j(source));
        let mut omega = KForm::zero(6, 2);
        for (form, c) in invariant.iter().zip(coeffs) {
            omega = omega.add(&form.scale(&rat(c)));
        }
        let j = source.j();
        let (_, omega) = make_anisotropic(&omega, &source.kahler_form(), j).unwrap();
        prop_assert!(anisotropy_check(&omega, j));
        let split = split_omega(&pi, &omega).unwrap();
        let reconstructed = split.omega1.add(&pi.pullback(&split.alpha));
        prop_assert_eq!(reconstructed, omega);
        prop_assert!(split.checks(&pi).all_pass(pi.fiber_dim(), pi.target().real_dim()));
    }

    #[test]
    fn scenario_text_round_trips(p in prop::sample::select(vec![1usize, 3]), q in 1usize..=2, label in prop::sample::select(vec!["A3", "A1^3", "B2"])) {
        let text = format!("variety = \"{label}\"\np = {p}\nq = [{q}]\nchecks = [\"validate\", \"weil\"]\n");
        let scenario = parse_scenario(&text).unwrap();
        let again = parse_scenario(&scenario.to_toml()).unwrap();
        prop_assert_eq!(again.to_toml(), scenario.to_toml());
    }

    #[test]
    fn f_after_g_is_a_scalar_multiple(beta in form_strategy(6, 6)) {
        let w = build_weil_jacobian(&PolarizedAbelianVariety::catalog("A3").unwrap(), 3).unwrap();
        let back = w.f_map(&w.g_map(&beta).unwrap()).unwrap();
        // half of binomial(2p, p) for p = 3
        prop_assert_eq!(back, beta.scale(&rat(10)));
    }
}

#[test]
fn probe_is_deterministic() {
    let a = PolarizedAbelianVariety::catalog("A3").unwrap();
    let w = build_weil_jacobian(&a, 3).unwrap();
    let pi = hodgeprobe::weil::sampson_projection(&w).unwrap();
    let first = modified_approach_probe(&pi, 2, 200).unwrap();
    let second = modified_approach_probe(&pi, 2, 200).unwrap();
    assert_eq!(serde_json::to_value(&first).unwrap(), serde_json::to_value(&second).unwrap());
    assert!(first.monomials_examined <= 200);
}

#[test]
fn wedge_of_basis_covectors_matches_determinant() {
    let x = KForm::<Q>::from_covector(&[rat(1), rat(2), rat(0)]);
    let y = KForm::<Q>::from_covector(&[rat(3), rat(-1), rat(1)]);
    let xy = x.wedge(&y).unwrap();
    let m = vec![vec![rat(1), rat(3)], vec![rat(2), rat(-1)]];
    assert_eq!(xy.coefficient(0b011), det(&m));
    assert_eq!(KForm::<Q>::one(3).wedge(&xy).unwrap(), xy);
    assert!(Q::one() == KForm::<Q>::one(3).coefficient(0));
}
