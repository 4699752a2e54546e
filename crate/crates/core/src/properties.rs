//! Operator matrices over Ritz, q-sc-EOM or exact states.

use nalgebra::DMatrix;

use crate::adapt::rotated_states;
use crate::error::Result;
use crate::fock::{FermionOperator, SparseOperator, StateVector};
use crate::hamiltonian::DEBYE_PER_AU;
use crate::vqe::{Ansatz, Problem};

/// `<Psi_i| O |Psi_j>` in the operator's units.
#[derive(Debug, Clone, PartialEq)]
pub struct PropertyMatrix {
    pub label: String,
    pub matrix: DMatrix<f64>,
}

/// `C^T M C` with `M_ij = <phi_i| U† O U |phi_j>`.
pub fn operator_in_ritz_basis(
    label: &str,
    op: &SparseOperator,
    ansatz: &Ansatz,
    refs: &[StateVector],
    coeffs: &DMatrix<f64>,
    problem: &Problem,
) -> Result<PropertyMatrix> {
    let states = rotated_states(coeffs, ansatz, refs, problem)?;
    Ok(operator_matrix(label, op, &states))
}

/// As [`operator_in_ritz_basis`] for an operator that is not yet compiled.
/// Components of `op` that leave the working basis are projected out; their
/// matrix elements between states of the basis vanish anyway.
pub fn fermion_operator_in_ritz_basis(
    label: &str,
    op: &FermionOperator,
    ansatz: &Ansatz,
    refs: &[StateVector],
    coeffs: &DMatrix<f64>,
    problem: &Problem,
) -> Result<PropertyMatrix> {
    let compiled = SparseOperator::compile_projected(op, &problem.basis)?;
    operator_in_ritz_basis(label, &compiled, ansatz, refs, coeffs, problem)
}

/// `<v_i| O |v_j>` over explicit states.
pub fn operator_matrix(label: &str, op: &SparseOperator, states: &[StateVector]) -> PropertyMatrix {
    let k = states.len();
    let ov: Vec<StateVector> = states.iter().map(|s| op.apply(s)).collect();
    let m = DMatrix::from_fn(k, k, |i, j| states[i].dot(&ov[j]));
    PropertyMatrix { label: label.to_string(), matrix: m }
}

/// `sum_axis <Psi_i| mu_axis |Psi_j>^2` converted to Debye^2.
pub fn transition_dipole_sq(i: usize, j: usize, dipoles: &[PropertyMatrix; 3]) -> f64 {
    dipoles.iter().map(|d| d.matrix[(i, j)].powi(2)).sum::<f64>() * DEBYE_PER_AU * DEBYE_PER_AU
}

/// Per-axis squared components in Debye^2, in x, y, z order.
pub fn transition_dipole_components(i: usize, j: usize, dipoles: &[PropertyMatrix; 3]) -> [f64; 3] {
    [0, 1, 2].map(|k| dipoles[k].matrix[(i, j)].powi(2) * DEBYE_PER_AU * DEBYE_PER_AU)
}
