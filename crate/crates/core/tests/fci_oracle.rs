mod common;

use std::sync::Arc;

use common::*;
use more_adapt::fci::spin_from_s2;
use more_adapt::prelude::*;
use proptest::prelude::*;

#[test]
fn one_determinant_basis() {
    // four electrons in two orbitals: only |22>
    let sys = h2();
    let basis = Arc::new(enumerate_basis(2, 2, 2, None, &sys.mi.orbital_irreps).unwrap());
    assert_eq!(basis.len(), 1);
    let fci = fci_solve(&sys.h, basis.clone(), 1).unwrap();
    let oracle = Oracle::new(4);
    let expected = oracle.hamiltonian(&sys.mi)[(0b1111, 0b1111)];
    assert!((fci.energies[0] - expected).abs() < 1e-12);
    assert_eq!(fci.vectors[0].coeffs, vec![1.0]);
}

#[test]
fn h2_spectrum_matches_dense_oracle() {
    let sys = h2();
    let oracle = Oracle::new(4);
    let exact = eigenvalues(&restrict(&oracle.hamiltonian(&sys.mi), &sys.basis));
    let fci = fci_solve(&sys.h, sys.basis.clone(), sys.basis.len()).unwrap();
    for (a, b) in fci.energies.iter().zip(&exact) {
        assert!((a - b).abs() < 1e-12);
    }
}

#[test]
fn too_many_states_is_an_error() {
    let sys = h2();
    assert!(matches!(fci_solve(&sys.h, sys.basis.clone(), 5), Err(Error::TooManyStates { .. })));
}

#[test]
fn rect_sectors_sum_to_the_full_space() {
    let sys = rect("1.20");
    let full = fci_solve(&sys.h, sys.basis.clone(), 36).unwrap();
    let mut union = Vec::new();
    let mut sizes = Vec::new();
    for g in 0..8 {
        let b = enumerate_basis(4, 2, 2, Some(g), &sys.mi.orbital_irreps).unwrap();
        if b.is_empty() {
            continue;
        }
        sizes.push(b.len());
        union.extend(fci_solve(&sys.h, Arc::new(b.clone()), b.len()).unwrap().energies);
    }
    sizes.sort_unstable();
    assert_eq!(sizes, vec![8, 8, 8, 12]);
    union.sort_by(f64::total_cmp);
    for (a, b) in union.iter().zip(&full.energies) {
        assert!((a - b).abs() < 1e-10);
    }
}

#[test]
fn spectrum_invariants() {
    for rel in ["h4_rect/h4_rect_r1.00.fcidump", "h4_linear/h4_linear_r1.20.fcidump"] {
        let sys = system(rel, IrrepSector::All);
        let fci = fci_solve(&sys.h, sys.basis.clone(), sys.basis.len()).unwrap();
        assert!(fci.energies.windows(2).all(|w| w[0] <= w[1]), "{:?}", fci.energies.windows(2).find(|w| w[0] > w[1]));
        for (i, v) in fci.vectors.iter().enumerate() {
            assert!(fci.residuals[i] <= 1e-10);
            let s = spin_from_s2(fci.s2_values[i]);
            assert!((fci.s2_values[i] - s * (s + 1.0)).abs() < 1e-8, "{} {}", rel, fci.s2_values[i]);
            for (j, w) in fci.vectors.iter().enumerate().take(i + 1) {
                let expected = if i == j { 1.0 } else { 0.0 };
                assert!((v.dot(w) - expected).abs() < 1e-12);
            }
            assert!(fci.irreps[i].is_some());
        }
    }
}

#[test]
fn square_has_the_singlet_avoided_crossing() {
    // second Ag singlet minus the lowest B1g singlet changes sign across the square
    let gap = |r: &str| {
        let sys = rect(r);
        let f = fci_solve(&sys.h, sys.basis.clone(), 36).unwrap();
        let ag = f.select(Some(0), Some(0.0), 1e-6);
        let b1g = f.select(Some(3), Some(0.0), 1e-6);
        (f.energies[ag[1]] - f.energies[ag[0]], f.energies[ag[1]] - f.energies[b1g[0]])
    };
    let (ag_square, square) = gap("1.00");
    let (_, short) = gap("0.80");
    let (_, long) = gap("1.44");
    assert!(ag_square > 0.0);
    assert!(square < 0.0 && short > 0.0 && long > 0.0);
}

#[test]
fn identical_states_map_to_themselves() {
    let sys = rect("1.30");
    let fci = fci_solve(&sys.h, sys.basis.clone(), 8).unwrap();
    let a = assign_states(&fci.vectors, &fci).unwrap();
    assert_eq!(a.mapping, (0..8).collect::<Vec<_>>());
    assert!(a.overlaps.iter().all(|&o| (o - 1.0).abs() < 1e-12));
    assert!(a.ambiguous.iter().all(|&b| !b));
}

#[test]
fn permuted_states_are_recovered() {
    let sys = rect("1.30");
    let fci = fci_solve(&sys.h, sys.basis.clone(), 6).unwrap();
    let perm = [3, 0, 5, 1, 4, 2];
    let approx: Vec<StateVector> = perm.iter().map(|&i| fci.vectors[i].scaled(-1.0)).collect();
    assert_eq!(assign_states(&approx, &fci).unwrap().mapping, perm.to_vec());
}

#[test]
fn weak_overlap_is_flagged() {
    let sys = rect("1.30");
    let fci = fci_solve(&sys.h, sys.basis.clone(), 4).unwrap();
    let even = fci.vectors[0].scaled(0.6).axpy(0.8, &fci.vectors[1]);
    let third = 1.0 / 3.0f64.sqrt();
    let spread = fci.vectors[0].scaled(third).axpy(third, &fci.vectors[2]).axpy(third, &fci.vectors[3]);
    let a = assign_states(&[even, spread], &fci).unwrap();
    assert!(!a.ambiguous[0]);
    assert!(a.ambiguous[1]);
}

#[test]
fn lanczos_agrees_with_dense() {
    let sys = system("h4_linear/h4_linear_r0.92.fcidump", IrrepSector::All);
    let hm = SparseOperator::compile(&sys.h, &sys.basis).unwrap();
    for n in [1, 3, 5] {
        let d = fci_solve_with(&hm, sys.basis.clone(), n, Solver::Dense).unwrap();
        let l = fci_solve_with(&hm, sys.basis.clone(), n, Solver::Lanczos).unwrap();
        for i in 0..n {
            assert!((d.energies[i] - l.energies[i]).abs() < 1e-10);
            assert!(l.residuals[i] <= 1e-9);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn energies_bound_random_rayleigh_quotients(seed in any::<u64>()) {
        let sys = rect("1.05");
        let fci = fci_solve(&sys.h, sys.basis.clone(), sys.basis.len()).unwrap();
        let v = random_state(&sys.basis, &mut rng(seed));
        let e = apply_operator(&sys.h, &v).unwrap().dot(&v);
        prop_assert!(e >= fci.energies[0] - 1e-12 && e <= fci.energies[35] + 1e-12);
        let expanded: f64 = fci.vectors.iter().zip(&fci.energies).map(|(u, en)| en * u.dot(&v).powi(2)).sum();
        prop_assert!((expanded - e).abs() < 1e-10);
    }
}
