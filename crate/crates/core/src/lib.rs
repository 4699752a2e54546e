//! Noiseless simulation of adaptive variational eigensolvers for ground and
//! excited states.
//!
//! The crate covers the whole pipeline for small molecules given as FCIDUMP
//! integrals: determinant bases and fermionic operators ([`fock`]), the
//! molecular Hamiltonian, `S^2` and dipole operators ([`hamiltonian`]), the
//! generalized singles-and-doubles pool ([`pool`]), the state-averaged VQE
//! objective and its optimizer ([`vqe`]), the adaptive loop with Ritz
//! diagonalization ([`adapt`]), the q-sc-EOM subspace method ([`qsceom`]),
//! exact diagonalization as a reference ([`fci`]) and transition properties
//! ([`properties`]).
//!
//! ```
//! use std::sync::Arc;
//! use more_adapt::prelude::*;
//!
//! // H2 in a minimal basis, integrals in hartree
//! let text = "&FCI NORB=2,NELEC=2,MS2=0,ORBSYM=1,5, &END
//!  0.6757 1 1 1 1
//!  0.6646 1 1 2 2
//!  0.1813 1 2 1 2
//!  0.6986 2 2 2 2
//! -1.2528 1 1 0 0
//! -0.4756 2 2 0 0
//!  0.7137 0 0 0 0";
//! let mi = parse_fcidump(text)?;
//! let h = build_hamiltonian(&mi);
//! let basis = Arc::new(enumerate_basis(2, 1, 1, Some(0), &mi.orbital_irreps)?);
//! let pool = build_uccgsd_pool(2, &mi.orbital_irreps);
//! let problem = Problem::new(&h, &pool, basis.clone())?;
//!
//! let hf = build_reference(&[(Determinant::from_occupation("20")?, 1.0)], basis.clone())?;
//! let refs = ReferenceSet::equal(vec![hf])?;
//! let result = run_adapt(&problem, &refs, &StopCriteria::max_ops(4), &OptimizerSettings::default())?;
//!
//! let exact = fci_solve(&h, basis, 1)?;
//! assert!((result.ritz.energies[0] - exact.energies[0]).abs() < 1e-10);
//! # Ok::<(), more_adapt::Error>(())
//! ```

pub mod adapt;
pub mod bfgs;
pub mod error;
pub mod fci;
pub mod fock;
pub mod hamiltonian;
pub mod integral_io;
pub mod pool;
pub mod properties;
pub mod qsceom;
pub mod vqe;

pub use error::{Error, Result};

/// The types and functions most programs need.
pub mod prelude {
    pub use crate::adapt::{
        build_dressed_hamiltonian, ritz_diagonalize, run_adapt, screen_pool, select_operator, AdaptResult, AdaptTrace,
        DressedHamiltonian, RitzSolution, Selection, StopCriteria, StopReason, TargetEnergy,
    };
    pub use crate::error::{Error, Result};
    pub use crate::fci::{assign_states, fci_solve, fci_solve_with, Assignment, FciSpectrum, Solver};
    pub use crate::fock::{
        apply_exp, apply_operator, apply_string, build_reference, enumerate_basis, enumerate_sector, Basis, Determinant,
        FermionOperator, Generator, IrrepSector, Ladder, Sector, SparseOperator, StateVector,
    };
    pub use crate::hamiltonian::{build_dipole, build_hamiltonian, build_s_squared, HamiltonianSet, DEBYE_PER_AU};
    pub use crate::integral_io::{
        parse_fcidump, parse_property_integrals, validate_integrals, write_fcidump, Axis, Irrep, MolecularIntegrals,
        PropertyIntegrals,
    };
    pub use crate::pool::{build_uccgsd_pool, PoolOperator};
    pub use crate::properties::{operator_in_ritz_basis, operator_matrix, transition_dipole_sq, PropertyMatrix};
    pub use crate::qsceom::{run_qsceom, QscEomResult};
    pub use crate::vqe::{evolve, minimize, sa_energy, sa_gradient, Ansatz, OptimizerSettings, Problem, ReferenceSet};
}

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/determinants.md")]
    mod determinants {}
    #[doc = include_str!("../../../book/src/operators.md")]
    mod operators {}
    #[doc = include_str!("../../../book/src/pool.md")]
    mod pool {}
    #[doc = include_str!("../../../book/src/ansatz.md")]
    mod ansatz {}
    #[doc = include_str!("../../../book/src/more_adapt.md")]
    mod more_adapt {}
    #[doc = include_str!("../../../book/src/qsceom.md")]
    mod qsceom {}
    #[doc = include_str!("../../../book/src/fci.md")]
    mod fci {}
    #[doc = include_str!("../../../book/src/properties.md")]
    mod properties {}
}
