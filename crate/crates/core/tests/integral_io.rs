mod common;

use std::sync::Arc;

use common::*;
use more_adapt::prelude::*;
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::Rng;

fn random_integrals(n: usize, seed: u64) -> MolecularIntegrals {
    let mut rng = rng(seed);
    let mut mi = MolecularIntegrals::zeros(n, 2);
    mi.core_energy = rng.gen_range(-2.0..2.0);
    for p in 0..n {
        for q in 0..=p {
            mi.set_h(p, q, rng.gen_range(-1.0..1.0));
            for r in 0..n {
                for s in 0..=r {
                    if (r, s) <= (p, q) {
                        mi.set_g(p, q, r, s, rng.gen_range(-1.0..1.0));
                    }
                }
            }
        }
    }
    mi
}

#[test]
fn every_fixture_validates() {
    let dirs = ["h2", "h4_rect", "h4_linear", "beh2"];
    let mut count = 0;
    for d in dirs {
        for entry in std::fs::read_dir(fixture_path(d)).unwrap() {
            let path = entry.unwrap().path();
            if path.extension().is_some_and(|e| e == "fcidump") {
                let mi = parse_fcidump(&std::fs::read_to_string(&path).unwrap()).unwrap();
                let report = validate_integrals(&mi);
                assert!(report.passed(), "{}: {:?}", path.display(), report.violations);
                count += 1;
            }
        }
    }
    assert!(count >= 38);
}

#[test]
fn h2_fci_matches_dense_diagonalization() {
    let sys = h2();
    let oracle = Oracle::new(4);
    let hd = oracle.hamiltonian(&sys.mi);
    let sector = restrict(&hd, &sys.basis);
    let exact = eigenvalues(&sector);
    let fci = fci_solve(&sys.h, sys.basis.clone(), 1).unwrap();
    assert!((fci.energies[0] - exact[0]).abs() < 1e-12);
}

#[test]
fn empty_property_file() {
    let p = parse_property_integrals("&FCI NORB=3, &END\n", Axis::Y).unwrap();
    assert!(p.one_body.iter().all(|&v| v == 0.0));
    assert_eq!(p.nuclear_term, 0.0);
}

#[test]
fn property_symmetrization() {
    let p = parse_property_integrals("&FCI NORB=2, &END\n 0.3 1 2 0 0\n", Axis::X).unwrap();
    assert_eq!((p.get(0, 1), p.get(1, 0)), (0.3, 0.3));
}

#[test]
fn randomized_symmetric_tensor_passes() {
    for seed in 0..5 {
        assert!(validate_integrals(&random_integrals(4, seed)).passed());
    }
}

#[test]
fn injected_two_body_asymmetry_is_reported() {
    let mut mi = random_integrals(3, 9);
    let n = mi.n_spatial;
    mi.two_body[((n + 2) * n) * n + 1] += 1e-6;
    let v = validate_integrals(&mi);
    let found = v.find("two_body permutational symmetry").unwrap();
    assert!((found.worst_deviation - 1e-6).abs() < 1e-12);
}

#[test]
fn parsed_integrals_reach_the_sector_fci() {
    let mi = random_integrals(3, 4);
    let text = write_fcidump(&mi);
    let back = parse_fcidump(&text).unwrap();
    let basis = Arc::new(enumerate_basis(3, 1, 1, None, &back.orbital_irreps).unwrap());
    let oracle = Oracle::new(6);
    let exact = eigenvalues(&restrict(&oracle.hamiltonian(&mi), &basis));
    let fci = fci_solve(&build_hamiltonian(&back), basis, 3).unwrap();
    for (e, x) in fci.energies.iter().zip(&exact) {
        assert!((e - x).abs() < 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn write_then_parse_round_trips(seed in any::<u64>(), n in 1usize..5) {
        let mi = random_integrals(n, seed);
        let back = parse_fcidump(&write_fcidump(&mi)).unwrap();
        prop_assert_eq!(back.core_energy, mi.core_energy);
        for (a, b) in back.one_body.iter().zip(&mi.one_body) {
            prop_assert!((a - b).abs() <= 1e-15);
        }
        for (a, b) in back.two_body.iter().zip(&mi.two_body) {
            prop_assert!((a - b).abs() <= 1e-15);
        }
    }

    #[test]
    fn data_line_order_is_irrelevant(seed in any::<u64>()) {
        let mi = random_integrals(3, seed);
        let text = write_fcidump(&mi);
        let (header, data): (Vec<&str>, Vec<&str>) = {
            let lines: Vec<&str> = text.lines().collect();
            let end = lines.iter().position(|l| l.contains("&END")).unwrap();
            (lines[..=end].to_vec(), lines[end + 1..].to_vec())
        };
        let mut shuffled = data.clone();
        shuffled.shuffle(&mut rng(seed ^ 0x5eed));
        let text2 = format!("{}\n{}\n", header.join("\n"), shuffled.join("\n"));
        prop_assert_eq!(parse_fcidump(&text2).unwrap(), parse_fcidump(&text).unwrap());
    }
}
