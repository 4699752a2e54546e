mod common;

use std::sync::Arc;

use common::*;
use more_adapt::prelude::*;
use more_adapt::pool::Excitation;
use nalgebra::DVector;
use proptest::prelude::*;
use rand::Rng;

fn c(k: usize) -> Ladder {
    Ladder::Create(k)
}

fn a(k: usize) -> Ladder {
    Ladder::Annihilate(k)
}

#[test]
fn beh2_sector_sizes() {
    let mi = load("beh2/beh2_y1.23.fcidump");
    let size = |g| enumerate_basis(7, 3, 3, Some(g), &mi.orbital_irreps).unwrap().len();
    assert_eq!((size(0), size(2)), (321, 304));
}

#[test]
fn empty_determinant_basis() {
    let b = enumerate_basis(3, 0, 0, None, &[0, 0, 0]).unwrap();
    assert_eq!(b.dets(), &[Determinant::new(0, 0)]);
}

#[test]
fn rect_sector_sizes() {
    let mi = load("h4_rect/h4_rect_r1.00.fcidump");
    let sizes: Vec<usize> =
        (0..4).map(|g| enumerate_basis(4, 2, 2, Some(g), &mi.orbital_irreps).unwrap().len()).collect();
    assert_eq!(sizes, vec![12, 8, 8, 8]);
    assert_eq!(enumerate_basis(4, 2, 2, None, &mi.orbital_irreps).unwrap().len(), 36);
}

#[test]
fn basis_is_sorted_and_indexed() {
    let b = enumerate_basis(5, 2, 3, None, &[0, 1, 2, 3, 0]).unwrap();
    assert!(b.dets().windows(2).all(|w| w[0] < w[1]));
    for (i, d) in b.dets().iter().enumerate() {
        assert_eq!(b.index_of(d), Some(i));
    }
}

#[test]
fn number_operator_and_hops() {
    let det = Determinant::new(1, 0);
    assert_eq!(apply_string(det, &[c(0), a(0)]), Some((det, 1.0)));
    assert_eq!(apply_string(det, &[c(1), a(0)]), Some((Determinant::new(0, 1), 1.0)));
    assert_eq!(apply_string(det, &[c(0)]), None);
}

#[test]
fn strings_match_dense_ladder_matrices() {
    let n = 8;
    let oracle = Oracle::new(n);
    let mut rng = rng(11);
    for _ in 0..300 {
        let alpha: u64 = rng.gen_range(0..16);
        let beta: u64 = rng.gen_range(0..16);
        let det = Determinant::new(alpha, beta);
        let len = 2 * rng.gen_range(1..=2);
        let string: Vec<Ladder> = (0..len)
            .map(|i| if i < len / 2 { c(rng.gen_range(0..n)) } else { a(rng.gen_range(0..n)) })
            .collect();
        let mut col = DVector::zeros(oracle.dim());
        col[fock_index(&det)] = 1.0;
        let image = oracle.string(&string) * col;
        match apply_string(det, &string) {
            None => assert!(image.amax() == 0.0, "{:?} {:?}", det, string),
            Some((img, phase)) => {
                let mut expected = DVector::zeros(oracle.dim());
                expected[fock_index(&img)] = phase;
                assert_eq!(image, expected, "{:?} {:?}", det, string);
            }
        }
    }
}

#[test]
fn identity_and_number_operators() {
    let basis = Arc::new(enumerate_basis(3, 2, 1, None, &[0, 0, 0]).unwrap());
    let v = random_state(&basis, &mut rng(2));
    assert_eq!(apply_operator(&FermionOperator::identity(), &v).unwrap(), v);
    let det = StateVector::basis_state(basis.clone(), 4);
    let nv = apply_operator(&FermionOperator::number(6), &det).unwrap();
    assert_eq!(nv, det.scaled(3.0));
}

#[test]
fn h2_quadratic_form_matches_dense() {
    let sys = h2();
    let oracle = Oracle::new(4);
    let hd = oracle.hamiltonian(&sys.mi);
    let mut rng = rng(5);
    for _ in 0..20 {
        let v = random_state(&sys.basis, &mut rng);
        let hv = apply_operator(&sys.h, &v).unwrap();
        let dense = embed(&v, 16);
        let expected = dense.dot(&(&hd * &dense));
        assert!((v.dot(&hv) - expected).abs() < 1e-12);
    }
}

#[test]
fn exp_closed_form_single_excitation() {
    let basis = Arc::new(enumerate_basis(2, 1, 0, None, &[0, 0]).unwrap());
    let mut gen = FermionOperator::term(1.0, vec![c(2), a(0)]);
    gen.add_term(-1.0, vec![c(0), a(2)]);
    let v = build_reference(&[(Determinant::new(1, 0), 1.0)], basis.clone()).unwrap();
    let theta = 0.37;
    let w = apply_exp(&gen, theta, &v, 1e-14).unwrap();
    let i0 = basis.index_of(&Determinant::new(1, 0)).unwrap();
    let i1 = basis.index_of(&Determinant::new(2, 0)).unwrap();
    assert!((w.coeffs[i0] - theta.cos()).abs() < 1e-14);
    assert!((w.coeffs[i1] - theta.sin()).abs() < 1e-14);
    assert_eq!(apply_exp(&gen, 0.0, &v, 1e-14).unwrap(), v);
}

#[test]
fn exp_matches_dense_expm_for_pool_generators() {
    let n_spatial = 4;
    let irreps = [0, 0, 0, 0];
    let pool = build_uccgsd_pool(n_spatial, &irreps);
    let basis = Arc::new(enumerate_basis(n_spatial, 2, 2, None, &irreps).unwrap());
    let oracle = Oracle::new(8);
    let mut rng = rng(7);
    for _ in 0..25 {
        let op = &pool[rng.gen_range(0..pool.len())];
        let v = random_state(&basis, &mut rng);
        let w = apply_exp(&op.generator, 0.3, &v, 1e-14).unwrap();
        let expm = (oracle.operator(&op.generator) * 0.3).exp();
        let expected = expm * embed(&v, oracle.dim());
        assert!((embed(&w, oracle.dim()) - &expected).amax() < 1e-12, "{}", op.label);
        let mut x = v.coeffs.clone();
        Generator::compile(&op.generator, &basis).unwrap().exp_in_place(0.3, &mut x).unwrap();
        let compiled = StateVector::from_coeffs(basis.clone(), x).unwrap();
        assert!((embed(&compiled, oracle.dim()) - &expected).amax() < 1e-12, "{}", op.label);
    }
}

#[test]
fn overlapping_double_uses_general_fallback_consistently() {
    // a+_2 a+_1 a_1 a_0 - h.c. is a density-conditioned hop; it still pairs
    // determinants, so both compiled paths must agree with the Taylor series
    let irreps = [0, 0];
    let pool = build_uccgsd_pool(2, &irreps);
    let basis = Arc::new(enumerate_basis(2, 1, 1, None, &irreps).unwrap());
    let op = pool
        .iter()
        .find(|p| matches!(p.label, Excitation::Double { p, q, r, s } if p == 2 && q == 1 && r == 1 && s == 0))
        .unwrap();
    let v = random_state(&basis, &mut rng(3));
    let taylor = apply_exp(&op.generator, -0.8, &v, 1e-14).unwrap();
    let mut x = v.coeffs.clone();
    Generator::compile(&op.generator, &basis).unwrap().exp_in_place(-0.8, &mut x).unwrap();
    let diff = taylor.coeffs.iter().zip(&x).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max);
    assert!(diff < 1e-13);
}

#[test]
fn leaving_the_basis_is_an_error() {
    let irreps = [0, 1];
    let basis = Arc::new(enumerate_basis(2, 1, 0, Some(0), &irreps).unwrap());
    let hop = FermionOperator::term(1.0, vec![c(2), a(0)]);
    let v = StateVector::basis_state(basis.clone(), 0);
    assert!(matches!(apply_operator(&hop, &v), Err(Error::Sector(_))));
    assert!(matches!(SparseOperator::compile(&hop, &basis), Err(Error::Sector(_))));
    let projected = SparseOperator::compile_projected(&hop, &basis).unwrap();
    assert_eq!(projected.nnz(), 0);
}

#[test]
fn reference_outside_basis_is_an_error() {
    let basis = Arc::new(enumerate_basis(2, 1, 1, Some(0), &[0, 1]).unwrap());
    let det = Determinant::from_occupation("ab").unwrap();
    assert!(matches!(build_reference(&[(det, 1.0)], basis), Err(Error::Sector(_))));
}

#[test]
fn rect_csf_spins() {
    let sys = rect("1.00");
    let s2 = SparseOperator::compile(&build_s_squared(4), &sys.basis).unwrap();
    let refs = rect_references(&sys.basis);
    let values: Vec<f64> = refs.iter().map(|r| s2.bilinear(&r.coeffs, &r.coeffs)).collect();
    let expected = [0.0, 0.0, 0.0, 2.0, 2.0, 2.0];
    for (v, e) in values.iter().zip(expected) {
        assert!((v - e).abs() < 1e-12, "{:?}", values);
    }
    let single = csf(&[("2200", 1.0)], &sys.basis);
    assert_eq!(single.coeffs.iter().filter(|&&x| x != 0.0).count(), 1);
}

#[test]
fn sector_sizes_sum_to_unfiltered() {
    let irreps = [0, 3, 1, 2, 0];
    for (na, nb) in [(1, 1), (2, 2), (3, 1), (2, 3)] {
        let total = enumerate_basis(5, na, nb, None, &irreps).unwrap().len();
        let sum: usize = (0..4).map(|g| enumerate_basis(5, na, nb, Some(g), &irreps).unwrap().len()).sum();
        assert_eq!(sum, total);
    }
}

#[test]
fn normal_ordering_matches_dense() {
    let oracle = Oracle::new(6);
    let op = FermionOperator::term(0.7, vec![a(1), c(3), a(0), c(1)]);
    let ordered = op.normal_ordered();
    assert!(max_abs_diff(&oracle.operator(&op), &oracle.operator(&ordered)) < 1e-14);
}

#[test]
fn product_and_adjoint_match_dense() {
    let oracle = Oracle::new(6);
    let mut x = FermionOperator::term(0.3, vec![c(4), a(1)]);
    x.add_term(-1.1, vec![c(2), c(5), a(3), a(0)]);
    x.add_constant(0.25);
    let mut y = FermionOperator::term(0.9, vec![c(1), a(3)]);
    y.add_term(0.4, vec![c(0), a(0)]);
    let prod = x.times(&y);
    assert!(max_abs_diff(&oracle.operator(&prod), &(oracle.operator(&x) * oracle.operator(&y))) < 1e-13);
    assert!(max_abs_diff(&oracle.operator(&x.adjoint()), &oracle.operator(&x).transpose()) < 1e-14);
}

fn rect_setup() -> (System, Vec<Generator>) {
    let sys = rect("1.00");
    let gens = sys.problem.generators.clone();
    (sys, gens)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn exp_is_unitary_and_invertible(seed in any::<u64>(), theta in -3.0f64..3.0) {
        let (sys, gens) = rect_setup();
        let mut rng = rng(seed);
        let op = &sys.pool[rng.gen_range(0..sys.pool.len())];
        let v = random_state(&sys.basis, &mut rng);
        let w = apply_exp(&op.generator, theta, &v, 1e-14).unwrap();
        prop_assert!((w.norm() - 1.0).abs() < 1e-12);
        let back = apply_exp(&op.generator, -theta, &w, 1e-14).unwrap();
        prop_assert!(back.axpy(-1.0, &v).norm() < 1e-10);
        let mut x = v.coeffs.clone();
        let g = &gens[op.id];
        g.exp_in_place(theta, &mut x).unwrap();
        let nx = x.iter().map(|t| t * t).sum::<f64>().sqrt();
        prop_assert!((nx - 1.0).abs() < 1e-12);
    }

    #[test]
    fn apply_operator_is_linear(seed in any::<u64>(), alpha in -2.0f64..2.0, beta in -2.0f64..2.0) {
        let sys = h2();
        let mut rng = rng(seed);
        let u = random_state(&sys.basis, &mut rng);
        let v = random_state(&sys.basis, &mut rng);
        let lhs = apply_operator(&sys.h, &u.scaled(alpha).axpy(beta, &v)).unwrap();
        let rhs = apply_operator(&sys.h, &u).unwrap().scaled(alpha).axpy(beta, &apply_operator(&sys.h, &v).unwrap());
        prop_assert!(lhs.axpy(-1.0, &rhs).norm() < 1e-13 * (1.0 + lhs.norm()));
    }

    #[test]
    fn hermitian_operators_are_symmetric(seed in any::<u64>()) {
        let (sys, _) = rect_setup();
        let mut rng = rng(seed);
        let u = random_state(&sys.basis, &mut rng);
        let v = random_state(&sys.basis, &mut rng);
        for op in [&sys.h, &build_s_squared(4)] {
            let lhs = u.dot(&apply_operator(op, &v).unwrap());
            let rhs = apply_operator(op, &u).unwrap().dot(&v);
            prop_assert!((lhs - rhs).abs() < 1e-12);
        }
    }

    #[test]
    fn determinant_strings_round_trip(alpha in 0u64..64, beta in 0u64..64) {
        let det = Determinant::new(alpha, beta);
        let s = det.occupation_string(6);
        prop_assert_eq!(Determinant::from_occupation(&s).unwrap(), det);
    }
}
