mod common;

use std::sync::Arc;

use common::*;
use more_adapt::prelude::*;
use proptest::prelude::*;
use rand::Rng;

#[test]
fn empty_and_zero_ansatz_leave_the_state() {
    let sys = rect("1.00");
    let v = random_state(&sys.basis, &mut rng(1));
    assert_eq!(evolve(&Ansatz::new(), &sys.problem, &v).unwrap(), v);
    let zero = Ansatz { ops: vec![(3, 0.0), (17, 0.0)] };
    assert_eq!(evolve(&zero, &sys.problem, &v).unwrap(), v);
}

#[test]
fn evolve_matches_dense_product() {
    let sys = rect("1.00");
    let oracle = Oracle::new(8);
    let mut r = rng(2);
    for len in [1, 2, 5] {
        let ansatz = random_ansatz(len, sys.pool.len(), &mut r);
        let v = random_state(&sys.basis, &mut r);
        let u = dense_unitary(&ansatz, &sys.pool, &oracle, &sys.basis);
        let expected = u * nalgebra::DVector::from_vec(v.coeffs.clone());
        let got = evolve(&ansatz, &sys.problem, &v).unwrap();
        let diff = got.coeffs.iter().zip(expected.iter()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(diff < 1e-12, "{}", diff);
        assert!((got.norm() - 1.0).abs() < 1e-12);
    }
}

#[test]
fn sa_energy_matches_dense_on_h2() {
    let sys = h2();
    let oracle = Oracle::new(4);
    let hd = restrict(&oracle.hamiltonian(&sys.mi), &sys.basis);
    let mut r = rng(3);
    let refs = ReferenceSet::new(
        vec![csf(&[("20", 1.0)], &sys.basis), csf(&[("ab", 0.5f64.sqrt()), ("ba", -(0.5f64.sqrt()))], &sys.basis)],
        vec![0.7, 0.3],
    )
    .unwrap();
    for _ in 0..10 {
        let ansatz = random_ansatz(r.gen_range(1..6), sys.pool.len(), &mut r);
        let u = dense_unitary(&ansatz, &sys.pool, &oracle, &sys.basis);
        let dressed = u.transpose() * &hd * &u;
        let mut expected = 0.0;
        for (phi, w) in refs.refs().iter().zip(refs.weights()) {
            let p = nalgebra::DVector::from_vec(phi.coeffs.clone());
            expected += w * p.dot(&(&dressed * &p));
        }
        assert!((sa_energy(&ansatz, &refs, &sys.problem).unwrap() - expected).abs() < 1e-12);
    }
}

#[test]
fn k1_is_the_single_state_energy() {
    let sys = rect("1.00");
    let phi = csf(&[("2200", 1.0)], &sys.basis);
    let refs = ReferenceSet::equal(vec![phi.clone()]).unwrap();
    let ansatz = random_ansatz(4, sys.pool.len(), &mut rng(4));
    let psi = evolve(&ansatz, &sys.problem, &phi).unwrap();
    let e = apply_operator(&sys.h, &psi).unwrap().dot(&psi);
    assert!((sa_energy(&ansatz, &refs, &sys.problem).unwrap() - e).abs() < 1e-12);
}

#[test]
fn eigenvector_references_give_weighted_eigenvalues() {
    let sys = rect("1.20");
    let fci = fci_solve(&sys.h, sys.basis.clone(), 3).unwrap();
    let refs = ReferenceSet::new(fci.vectors.clone(), vec![0.5, 0.3, 0.2]).unwrap();
    let expected = 0.5 * fci.energies[0] + 0.3 * fci.energies[1] + 0.2 * fci.energies[2];
    assert!((sa_energy(&Ansatz::new(), &refs, &sys.problem).unwrap() - expected).abs() < 1e-12);
}

#[test]
fn empty_ansatz_has_empty_gradient() {
    let sys = h2();
    let refs = ReferenceSet::equal(vec![csf(&[("20", 1.0)], &sys.basis)]).unwrap();
    assert!(sa_gradient(&Ansatz::new(), &refs, &sys.problem).unwrap().is_empty());
}

fn finite_difference_check(sys: &System, refs: &ReferenceSet, ansatz: &Ansatz) -> f64 {
    let g = sa_gradient(ansatz, refs, &sys.problem).unwrap();
    let h = 1e-5;
    let mut worst: f64 = 0.0;
    for (m, &gm) in g.iter().enumerate() {
        let mut plus = ansatz.clone();
        plus.ops[m].1 += h;
        let mut minus = ansatz.clone();
        minus.ops[m].1 -= h;
        let fd = (sa_energy(&plus, refs, &sys.problem).unwrap() - sa_energy(&minus, refs, &sys.problem).unwrap()) / (2.0 * h);
        let scale = gm.abs().max(fd.abs()).max(1e-3);
        worst = worst.max((gm - fd).abs() / scale);
    }
    worst
}

#[test]
fn single_parameter_gradient_is_the_commutator() {
    let sys = rect("1.00");
    let phi = csf(&[("2200", 1.0)], &sys.basis);
    let refs = ReferenceSet::equal(vec![phi.clone()]).unwrap();
    let ansatz = Ansatz { ops: vec![(20, 0.4)] };
    let psi = evolve(&ansatz, &sys.problem, &phi).unwrap();
    let a = &sys.pool[20].generator;
    let comm = sys.h.times(a).plus(&a.times(&sys.h).scaled(-1.0));
    let expected = apply_operator(&comm, &psi).unwrap().dot(&psi);
    let g = sa_gradient(&ansatz, &refs, &sys.problem).unwrap();
    assert!((g[0] - expected).abs() < 1e-12);
    assert!(finite_difference_check(&sys, &refs, &ansatz) < 1e-6);
}

#[test]
fn stationary_input_is_returned_unchanged() {
    let sys = rect("1.00");
    let fci = fci_solve(&sys.h, sys.basis.clone(), 1).unwrap();
    let refs = ReferenceSet::equal(vec![fci.vectors[0].clone()]).unwrap();
    let ansatz = Ansatz { ops: vec![(5, 0.0), (24, 0.0)] };
    let res = minimize(&ansatz, &refs, &sys.problem, &OptimizerSettings::default()).unwrap();
    assert!(res.iterations <= 1);
    assert!(res.converged);
    assert_eq!(res.ansatz, ansatz);
}

#[test]
fn two_level_problem_recovers_the_analytic_angle() {
    // H = [[a, b], [b, d]] on span{|10>, |01>} of one electron in two
    // orbitals; exp(t A) rotates by t, so the optimum satisfies tan 2t = 2b / (a - d)
    let mut mi = MolecularIntegrals::zeros(2, 1);
    mi.ms2 = 1;
    let (a, b, d) = (-1.0, 0.3, 0.4);
    mi.set_h(0, 0, a);
    mi.set_h(1, 1, d);
    mi.set_h(0, 1, b);
    let h = build_hamiltonian(&mi);
    let basis = Arc::new(enumerate_basis(2, 1, 0, None, &mi.orbital_irreps).unwrap());
    let pool = build_uccgsd_pool(2, &mi.orbital_irreps);
    let problem = Problem::new(&h, &pool, basis.clone()).unwrap();
    let id = pool.iter().position(|p| p.label.to_string() == "1a<-0a").unwrap();
    let refs = ReferenceSet::equal(vec![csf(&[("a0", 1.0)], &basis)]).unwrap();
    let res = minimize(&Ansatz { ops: vec![(id, 0.0)] }, &refs, &problem, &OptimizerSettings::default()).unwrap();
    let theta = res.ansatz.ops[0].1;
    // |psi> = cos t |a0> + sin t |0a>; E(t) = a cos^2 + d sin^2 + b sin 2t
    let e = |t: f64| a * t.cos().powi(2) + d * t.sin().powi(2) + b * (2.0 * t).sin();
    let exact = 0.5 * (2.0 * b / (a - d)).atan();
    assert!((theta - exact).abs() < 1e-8, "{} {}", theta, exact);
    let lowest = 0.5 * (a + d) - (0.25 * (a - d).powi(2) + b * b).sqrt();
    assert!((e(theta) - lowest).abs() < 1e-12);
    assert!((res.energy - lowest).abs() < 1e-12);
}

#[test]
fn grown_rect_ansatz_reaches_fci() {
    let sys = system("h4_rect/h4_rect_r1.00.fcidump", IrrepSector::Only(vec![0]));
    let fci = fci_solve(&sys.h, sys.basis.clone(), 1).unwrap();
    let refs = ReferenceSet::equal(vec![csf(&[("2200", 1.0)], &sys.basis)]).unwrap();
    let res = run_adapt(&sys.problem, &refs, &StopCriteria::max_ops(15), &OptimizerSettings::default()).unwrap();
    let again = minimize(&res.ansatz, &refs, &sys.problem, &OptimizerSettings::default()).unwrap();
    assert!((again.energy - fci.energies[0]).abs() < 1e-10);
    assert!(again.gradient_inf_norm <= 1e-8);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn gradient_matches_finite_differences(seed in any::<u64>(), len in 1usize..12) {
        let sys = rect("0.80");
        let mut r = rng(seed);
        let ansatz = random_ansatz(len, sys.pool.len(), &mut r);
        let refs = ReferenceSet::equal(rect_references(&sys.basis)[..3].to_vec()).unwrap();
        prop_assert!(finite_difference_check(&sys, &refs, &ansatz) < 1e-6);
    }

    #[test]
    fn equal_weight_energy_is_rotation_invariant(seed in any::<u64>()) {
        let sys = rect("1.10");
        let mut r = rng(seed);
        let ansatz = random_ansatz(6, sys.pool.len(), &mut r);
        let refs = rect_references(&sys.basis);
        let q = random_orthogonal(refs.len(), &mut r);
        let mixed = mix(&refs, &q);
        let e1 = sa_energy(&ansatz, &ReferenceSet::equal(refs).unwrap(), &sys.problem).unwrap();
        let e2 = sa_energy(&ansatz, &ReferenceSet::equal(mixed).unwrap(), &sys.problem).unwrap();
        prop_assert!((e1 - e2).abs() < 1e-10);
    }

    #[test]
    fn minimize_never_raises_the_energy(seed in any::<u64>()) {
        let sys = rect("1.60");
        let mut r = rng(seed);
        let ansatz = random_ansatz(5, sys.pool.len(), &mut r);
        let refs = ReferenceSet::equal(rect_references(&sys.basis)[..2].to_vec()).unwrap();
        let e0 = sa_energy(&ansatz, &refs, &sys.problem).unwrap();
        let res = minimize(&ansatz, &refs, &sys.problem, &OptimizerSettings::default()).unwrap();
        prop_assert!(res.energy <= e0 + 1e-12);
        prop_assert!(res.converged || res.line_search_failed || res.iterations > 0);
    }
}
