//! Shared fixtures and an independent dense Jordan-Wigner oracle.
//!
//! The oracle works on the full Fock space of `n` spin orbitals. A Fock
//! state is a bit string with bit `k` set when spin orbital `k` is occupied
//! (`k = 2p` for alpha, `2p + 1` for beta). Ladder operators act as
//! `a_k |n> = (-1)^(n_0 + ... + n_{k-1}) |n - e_k>`, and everything else is
//! built by dense matrix products.

#![allow(dead_code)]

use std::path::PathBuf;
use std::sync::Arc;

use more_adapt::prelude::*;
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn fixture_path(rel: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(rel)
}

pub fn load(rel: &str) -> MolecularIntegrals {
    let text = std::fs::read_to_string(fixture_path(rel)).unwrap();
    parse_fcidump(&text).unwrap()
}

pub fn load_dipoles(stem: &str, n_spatial: usize) -> [FermionOperator; 3] {
    let props = Axis::ALL.map(|ax| {
        let text = std::fs::read_to_string(fixture_path(&format!("{}.dipole_{}", stem, ax.label()))).unwrap();
        parse_property_integrals(&text, ax).unwrap()
    });
    build_dipole(n_spatial, &props).unwrap()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn csf(entries: &[(&str, f64)], basis: &Arc<Basis>) -> StateVector {
    let e: Vec<(Determinant, f64)> =
        entries.iter().map(|(s, c)| (Determinant::from_occupation(s).unwrap(), *c)).collect();
    build_reference(&e, basis.clone()).unwrap()
}

/// The six rectangular H4 references: two closed shells, the open-shell
/// singlet and triplet on orbitals 1 and 2, and two more triplets.
pub fn rect_references(basis: &Arc<Basis>) -> Vec<StateVector> {
    let h = 0.5f64.sqrt();
    vec![
        csf(&[("2200", 1.0)], basis),
        csf(&[("2020", 1.0)], basis),
        csf(&[("2ab0", h), ("2ba0", -h)], basis),
        csf(&[("2ab0", h), ("2ba0", h)], basis),
        csf(&[("ab20", h), ("ba20", h)], basis),
        csf(&[("a2b0", h), ("b2a0", h)], basis),
    ]
}

pub struct System {
    pub mi: MolecularIntegrals,
    pub h: FermionOperator,
    pub basis: Arc<Basis>,
    pub pool: Vec<PoolOperator>,
    pub problem: Problem,
}

pub fn system(rel: &str, irreps: IrrepSector) -> System {
    let mi = load(rel);
    let (na, nb) = mi.electron_split().unwrap();
    let h = build_hamiltonian(&mi);
    let sector = Sector { n_alpha: na, n_beta: nb, irreps };
    let basis = Arc::new(enumerate_sector(mi.n_spatial, sector, &mi.orbital_irreps).unwrap());
    let pool = build_uccgsd_pool(mi.n_spatial, &mi.orbital_irreps);
    let problem = Problem::new(&h, &pool, basis.clone()).unwrap();
    System { mi, h, basis, pool, problem }
}

pub fn h2() -> System {
    system("h2/h2_r1.00.fcidump", IrrepSector::All)
}

pub fn rect(r: &str) -> System {
    system(&format!("h4_rect/h4_rect_r{}.fcidump", r), IrrepSector::All)
}

pub fn random_unit(n: usize, rng: &mut impl Rng) -> Vec<f64> {
    let v: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.into_iter().map(|x| x / norm).collect()
}

pub fn random_state(basis: &Arc<Basis>, rng: &mut impl Rng) -> StateVector {
    StateVector::from_coeffs(basis.clone(), random_unit(basis.len(), rng)).unwrap()
}

pub fn random_ansatz(len: usize, pool_size: usize, rng: &mut impl Rng) -> Ansatz {
    Ansatz { ops: (0..len).map(|_| (rng.gen_range(0..pool_size), rng.gen_range(-1.0..1.0))).collect() }
}

/// Random orthogonal matrix from Gram-Schmidt on a random square matrix.
pub fn random_orthogonal(k: usize, rng: &mut impl Rng) -> DMatrix<f64> {
    let m = DMatrix::from_fn(k, k, |_, _| rng.gen_range(-1.0..1.0));
    m.qr().q()
}

pub fn mix(states: &[StateVector], q: &DMatrix<f64>) -> Vec<StateVector> {
    (0..states.len())
        .map(|j| {
            let mut v = StateVector::zeros(states[0].basis.clone());
            for (i, s) in states.iter().enumerate() {
                v = v.axpy(q[(i, j)], s);
            }
            v
        })
        .collect()
}

// ---------------------------------------------------------------------------
// dense oracle

/// `a_k` on the `2^n`-dimensional Fock space.
pub fn annihilator(n: usize, k: usize) -> DMatrix<f64> {
    let dim = 1usize << n;
    let mut m = DMatrix::zeros(dim, dim);
    for col in 0..dim {
        if col >> k & 1 == 1 {
            let below = (col & ((1 << k) - 1)).count_ones();
            m[(col ^ (1 << k), col)] = if below.is_multiple_of(2) { 1.0 } else { -1.0 };
        }
    }
    m
}

pub struct Oracle {
    pub n: usize,
    pub a: Vec<DMatrix<f64>>,
    pub adag: Vec<DMatrix<f64>>,
}

impl Oracle {
    pub fn new(n: usize) -> Self {
        let a: Vec<DMatrix<f64>> = (0..n).map(|k| annihilator(n, k)).collect();
        let adag = a.iter().map(|m| m.transpose()).collect();
        Self { n, a, adag }
    }

    pub fn dim(&self) -> usize {
        1 << self.n
    }

    pub fn identity(&self) -> DMatrix<f64> {
        DMatrix::identity(self.dim(), self.dim())
    }

    pub fn ladder(&self, l: Ladder) -> &DMatrix<f64> {
        match l {
            Ladder::Create(k) => &self.adag[k],
            Ladder::Annihilate(k) => &self.a[k],
        }
    }

    /// Product of the string's ladder matrices, left to right.
    pub fn string(&self, s: &[Ladder]) -> DMatrix<f64> {
        let mut m = self.identity();
        for &l in s {
            m = &m * self.ladder(l);
        }
        m
    }

    pub fn operator(&self, op: &FermionOperator) -> DMatrix<f64> {
        let mut m = self.identity() * op.constant_term();
        for (s, c) in op.terms() {
            m += self.string(s) * c;
        }
        m
    }

    /// Hamiltonian straight from the integrals, without going through the
    /// crate's operator algebra.
    pub fn hamiltonian(&self, mi: &MolecularIntegrals) -> DMatrix<f64> {
        let n = mi.n_spatial;
        let mut m = self.identity() * mi.core_energy;
        let so = |p: usize, s: usize| 2 * p + s;
        let e: Vec<Vec<DMatrix<f64>>> = (0..2 * n)
            .map(|i| (0..2 * n).map(|j| &self.adag[i] * &self.a[j]).collect())
            .collect();
        for p in 0..n {
            for q in 0..n {
                for s in 0..2 {
                    m += &e[so(p, s)][so(q, s)] * mi.h(p, q);
                }
            }
        }
        // 1/2 sum (pq|rs) a+_p a+_r a_s a_q = 1/2 sum (pq|rs) (E_pq E_rs - delta_qr E_ps)
        for p in 0..n {
            for q in 0..n {
                for r in 0..n {
                    for t in 0..n {
                        let g = mi.g(p, q, r, t);
                        if g == 0.0 {
                            continue;
                        }
                        for s1 in 0..2 {
                            for s2 in 0..2 {
                                let mut term = &e[so(p, s1)][so(q, s1)] * &e[so(r, s2)][so(t, s2)];
                                if q == r && s1 == s2 {
                                    term -= &e[so(p, s1)][so(t, s2)];
                                }
                                m += term * (0.5 * g);
                            }
                        }
                    }
                }
            }
        }
        m
    }

    /// `S^2` from the spin operators as dense matrices.
    pub fn s_squared(&self) -> DMatrix<f64> {
        let n = self.n / 2;
        let dim = self.dim();
        let mut sz = DMatrix::zeros(dim, dim);
        let mut sp = DMatrix::zeros(dim, dim);
        for p in 0..n {
            sz += (&self.adag[2 * p] * &self.a[2 * p] - &self.adag[2 * p + 1] * &self.a[2 * p + 1]) * 0.5;
            sp += &self.adag[2 * p] * &self.a[2 * p + 1];
        }
        let sm = sp.transpose();
        let sx = (&sp + &sm) * 0.5;
        // S_y^2 = -(S+ - S-)^2 / 4
        let d = &sp - &sm;
        let sy2 = -(&d * &d) * 0.25;
        &sx * &sx + sy2 + &sz * &sz
    }
}

/// Fock index of a determinant: bit `2p` for alpha `p`, `2p + 1` for beta `p`.
pub fn fock_index(det: &Determinant) -> usize {
    let mut idx = 0usize;
    for p in 0..32 {
        if det.alpha_occ >> p & 1 == 1 {
            idx |= 1 << (2 * p);
        }
        if det.beta_occ >> p & 1 == 1 {
            idx |= 1 << (2 * p + 1);
        }
    }
    idx
}

pub fn from_fock_index(idx: usize) -> Determinant {
    let (mut a, mut b) = (0u64, 0u64);
    for k in 0..usize::BITS as usize {
        if idx >> k & 1 == 1 {
            if k % 2 == 0 {
                a |= 1 << (k / 2);
            } else {
                b |= 1 << (k / 2);
            }
        }
    }
    Determinant::new(a, b)
}

pub fn embed(v: &StateVector, dim: usize) -> DVector<f64> {
    let mut out = DVector::zeros(dim);
    for (det, c) in v.basis.dets().iter().zip(&v.coeffs) {
        out[fock_index(det)] = *c;
    }
    out
}

/// Rows and columns of a Fock-space matrix belonging to `basis`.
pub fn restrict(m: &DMatrix<f64>, basis: &Basis) -> DMatrix<f64> {
    let idx: Vec<usize> = basis.dets().iter().map(fock_index).collect();
    DMatrix::from_fn(idx.len(), idx.len(), |i, j| m[(idx[i], idx[j])])
}

pub fn sparse_dense(op: &SparseOperator) -> DMatrix<f64> {
    DMatrix::from_row_slice(op.dim(), op.dim(), &op.to_dense())
}

pub fn max_abs_diff(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    (a - b).abs().max()
}

/// Sorted eigenvalues of a symmetric matrix.
pub fn eigenvalues(m: &DMatrix<f64>) -> Vec<f64> {
    let mut e: Vec<f64> = m.clone().symmetric_eigen().eigenvalues.iter().copied().collect();
    e.sort_by(f64::total_cmp);
    e
}

/// `U` of an ansatz as a dense matrix on the sector: factors multiplied
/// left to right in ansatz order.
pub fn dense_unitary(ansatz: &Ansatz, pool: &[PoolOperator], oracle: &Oracle, basis: &Basis) -> DMatrix<f64> {
    let mut u = DMatrix::identity(basis.len(), basis.len());
    for &(id, theta) in &ansatz.ops {
        let a = restrict(&oracle.operator(&pool[id].generator), basis);
        u *= (a * theta).exp();
    }
    u
}
