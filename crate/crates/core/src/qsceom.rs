//! q-sc-EOM: excited states from the dressed Hamiltonian over a manifold
//! orthogonal to the ground-state reference.

use nalgebra::DMatrix;

use crate::adapt::{build_dressed_hamiltonian, rotated_states, symmetric_eigen_sorted};
use crate::error::{Error, Result};
use crate::fock::StateVector;
use crate::vqe::{check_orthonormal, Ansatz, Problem};

#[derive(Debug, Clone, PartialEq)]
pub struct QscEomResult {
    pub ground_energy: f64,
    pub excited_energies: Vec<f64>,
    /// Column `i` expands excited state `i` over the manifold.
    pub manifold_coeffs: DMatrix<f64>,
    /// `<phi_0| U† H U |phi_j>` for every manifold state `j`.
    pub coupling: Vec<f64>,
    pub coupling_norm: f64,
}

impl QscEomResult {
    /// Reference-space coefficients of all states, ground first: a block
    /// diagonal matrix over `[phi_0, manifold...]`.
    pub fn all_coeffs(&self) -> DMatrix<f64> {
        let m = self.excited_energies.len();
        let mut c = DMatrix::zeros(m + 1, m + 1);
        c[(0, 0)] = 1.0;
        c.view_mut((1, 1), (m, m)).copy_from(&self.manifold_coeffs);
        c
    }

    pub fn energies(&self) -> Vec<f64> {
        std::iter::once(self.ground_energy).chain(self.excited_energies.iter().copied()).collect()
    }

    /// `U phi_0` followed by the excited states.
    pub fn states(&self, ansatz: &Ansatz, phi0: &StateVector, manifold: &[StateVector], problem: &Problem) -> Result<Vec<StateVector>> {
        let refs = references(phi0, manifold);
        rotated_states(&self.all_coeffs(), ansatz, &refs, problem)
    }
}

fn references(phi0: &StateVector, manifold: &[StateVector]) -> Vec<StateVector> {
    std::iter::once(phi0.clone()).chain(manifold.iter().cloned()).collect()
}

pub fn run_qsceom(ground_ansatz: &Ansatz, phi0: &StateVector, manifold: &[StateVector], problem: &Problem) -> Result<QscEomResult> {
    let refs = references(phi0, manifold);
    check_orthonormal(&refs, 1e-10).map_err(|e| Error::Invalid(format!("q-sc-EOM references: {}", e)))?;
    let dressed = build_dressed_hamiltonian(ground_ansatz, &refs, problem)?.matrix;
    let m = manifold.len();
    let block = dressed.view((1, 1), (m, m)).clone_owned();
    let (excited_energies, manifold_coeffs) = symmetric_eigen_sorted(&block);
    let coupling: Vec<f64> = (1..=m).map(|j| dressed[(0, j)]).collect();
    let coupling_norm = coupling.iter().map(|c| c * c).sum::<f64>().sqrt();
    Ok(QscEomResult { ground_energy: dressed[(0, 0)], excited_energies, manifold_coeffs, coupling, coupling_norm })
}
