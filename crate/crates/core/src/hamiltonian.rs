//! Second-quantized Hamiltonian, total spin and dipole operators.

use crate::error::{Error, Result};
use crate::fock::{spin_orbital, FermionOperator, Ladder};
use crate::integral_io::{Axis, MolecularIntegrals, PropertyIntegrals};

/// Conversion from atomic units of dipole (e a0) to Debye.
pub const DEBYE_PER_AU: f64 = 2.541746;

/// Operators built from one set of integrals.
#[derive(Debug, Clone)]
pub struct HamiltonianSet {
    pub h: FermionOperator,
    pub s_squared: FermionOperator,
    pub dipole: Option<[FermionOperator; 3]>,
}

impl HamiltonianSet {
    pub fn new(mi: &MolecularIntegrals, dipoles: Option<&[PropertyIntegrals; 3]>) -> Result<Self> {
        let dipole = match dipoles {
            Some(d) => Some(build_dipole(mi.n_spatial, d)?),
            None => None,
        };
        Ok(Self { h: build_hamiltonian(mi), s_squared: build_s_squared(mi.n_spatial), dipole })
    }
}

/// `H = E_core + sum h_pq a+_p a_q + 1/2 sum (pq|rs) a+_p a+_r a_s a_q`,
/// summed over spin with spatial integrals.
pub fn build_hamiltonian(mi: &MolecularIntegrals) -> FermionOperator {
    let n = mi.n_spatial;
    let mut op = FermionOperator::constant(mi.core_energy);
    for p in 0..n {
        for q in 0..n {
            let h = mi.h(p, q);
            if h == 0.0 {
                continue;
            }
            for beta in [false, true] {
                op.add_term(h, vec![Ladder::Create(spin_orbital(p, beta)), Ladder::Annihilate(spin_orbital(q, beta))]);
            }
        }
    }
    for p in 0..n {
        for q in 0..n {
            for r in 0..n {
                for s in 0..n {
                    let g = mi.g(p, q, r, s);
                    if g == 0.0 {
                        continue;
                    }
                    for sigma in [false, true] {
                        for tau in [false, true] {
                            op.add_term(
                                0.5 * g,
                                vec![
                                    Ladder::Create(spin_orbital(p, sigma)),
                                    Ladder::Create(spin_orbital(r, tau)),
                                    Ladder::Annihilate(spin_orbital(s, tau)),
                                    Ladder::Annihilate(spin_orbital(q, sigma)),
                                ],
                            );
                        }
                    }
                }
            }
        }
    }
    op
}

/// `S^2 = S- S+ + Sz (Sz + 1)` over `n_spatial` orbitals.
pub fn build_s_squared(n_spatial: usize) -> FermionOperator {
    let mut s_plus = FermionOperator::zero();
    let mut s_minus = FermionOperator::zero();
    let mut s_z = FermionOperator::zero();
    for p in 0..n_spatial {
        let (a, b) = (spin_orbital(p, false), spin_orbital(p, true));
        s_plus.add_term(1.0, vec![Ladder::Create(a), Ladder::Annihilate(b)]);
        s_minus.add_term(1.0, vec![Ladder::Create(b), Ladder::Annihilate(a)]);
        s_z.add_term(0.5, vec![Ladder::Create(a), Ladder::Annihilate(a)]);
        s_z.add_term(-0.5, vec![Ladder::Create(b), Ladder::Annihilate(b)]);
    }
    let s_z_plus_one = s_z.plus(&FermionOperator::identity());
    s_minus.times(&s_plus).plus(&s_z.times(&s_z_plus_one))
}

/// `mu_axis = Z_nuc - sum mu_pq a+_p a_q`: the electron charge is folded into
/// the operator so expectation values are total dipoles in e a0.
pub fn build_dipole(n_spatial: usize, pi: &[PropertyIntegrals; 3]) -> Result<[FermionOperator; 3]> {
    let build = |k: usize| -> Result<FermionOperator> {
        let p = &pi[k];
        if p.n_spatial != n_spatial {
            return Err(Error::Dimension(format!(
                "{} dipole integrals have {} orbitals, expected {}",
                p.component.label(),
                p.n_spatial,
                n_spatial
            )));
        }
        if p.component != Axis::ALL[k] {
            return Err(Error::Invalid(format!("dipole component {} given in slot {}", p.component.label(), k)));
        }
        let mut op = FermionOperator::constant(p.nuclear_term);
        for r in 0..n_spatial {
            for s in 0..n_spatial {
                let v = p.get(r, s);
                if v == 0.0 {
                    continue;
                }
                for beta in [false, true] {
                    op.add_term(-v, vec![Ladder::Create(spin_orbital(r, beta)), Ladder::Annihilate(spin_orbital(s, beta))]);
                }
            }
        }
        Ok(op)
    };
    Ok([build(0)?, build(1)?, build(2)?])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{apply_operator, build_reference, enumerate_basis, Determinant, StateVector};
    use std::sync::Arc;

    #[test]
    fn constant_hamiltonian() {
        let mut mi = MolecularIntegrals::zeros(2, 2);
        mi.core_energy = 1.2;
        let h = build_hamiltonian(&mi);
        assert_eq!(h.n_terms(), 0);
        assert_eq!(h.constant_term(), 1.2);
    }

    #[test]
    fn s_squared_is_hermitian() {
        assert!(build_s_squared(3).is_hermitian(1e-14));
    }

    #[test]
    fn s_squared_on_simple_states() {
        let basis = Arc::new(enumerate_basis(2, 1, 1, None, &[0, 0]).unwrap());
        let s2 = build_s_squared(2);
        let closed = build_reference(&[(Determinant::from_occupation("20").unwrap(), 1.0)], basis.clone()).unwrap();
        let w = apply_operator(&s2, &closed).unwrap();
        assert!(w.norm() < 1e-14);
        let plus = build_reference(
            &[(Determinant::from_occupation("ab").unwrap(), 1.0), (Determinant::from_occupation("ba").unwrap(), 1.0)],
            basis.clone(),
        )
        .unwrap();
        let w = apply_operator(&s2, &plus).unwrap();
        assert!((w.dot(&plus) - 2.0).abs() < 1e-14);
        assert!(w.axpy(-2.0, &plus).norm() < 1e-14);
        let minus = build_reference(
            &[(Determinant::from_occupation("ab").unwrap(), 1.0), (Determinant::from_occupation("ba").unwrap(), -1.0)],
            basis,
        )
        .unwrap();
        let w = apply_operator(&s2, &minus).unwrap();
        assert!(w.norm() < 1e-14);
    }

    #[test]
    fn zero_dipole_integrals_give_nuclear_constant() {
        let pi = Axis::ALL.map(|component| PropertyIntegrals {
            component,
            n_spatial: 2,
            one_body: vec![0.0; 4],
            nuclear_term: 0.25,
        });
        let ops = build_dipole(2, &pi).unwrap();
        let basis = Arc::new(enumerate_basis(2, 1, 1, None, &[0, 0]).unwrap());
        let v = StateVector::basis_state(basis, 1);
        for op in &ops {
            let w = apply_operator(op, &v).unwrap();
            assert_eq!(w.dot(&v), 0.25);
        }
    }
}
