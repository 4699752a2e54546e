//! Generalized singles-and-doubles (UCCGSD) operator pool.

use std::fmt;

use crate::error::Result;
use crate::fock::{Basis, FermionOperator, Generator, Ladder};
use crate::integral_io::{Irrep, TOTALLY_SYMMETRIC};

/// Spin-orbital indices of an excitation `a+_p a_q` or `a+_p a+_q a_r a_s`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Excitation {
    Single { p: usize, q: usize },
    Double { p: usize, q: usize, r: usize, s: usize },
}

fn so_label(k: usize) -> String {
    format!("{}{}", k / 2, if k.is_multiple_of(2) { 'a' } else { 'b' })
}

impl fmt::Display for Excitation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Excitation::Single { p, q } => write!(f, "{}<-{}", so_label(p), so_label(q)),
            Excitation::Double { p, q, r, s } => {
                write!(f, "{},{}<-{},{}", so_label(p), so_label(q), so_label(r), so_label(s))
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct PoolOperator {
    pub id: usize,
    pub generator: FermionOperator,
    pub label: Excitation,
    pub irrep: Irrep,
}

/// All spin- and symmetry-allowed generalized excitations `T - T†`.
///
/// Singles `a+_p a_q` with `p > q`; doubles `a+_p a+_q a_r a_s` with `p > q`,
/// `r > s` and `(p, q) > (r, s)`, which lists every generator once up to sign.
/// Doubles whose creation and annihilation pairs share one index are kept;
/// they act as density-conditioned single excitations.
pub fn build_uccgsd_pool(n_spatial: usize, orbital_irreps: &[Irrep]) -> Vec<PoolOperator> {
    assert_eq!(orbital_irreps.len(), n_spatial, "one irrep per orbital");
    let n = 2 * n_spatial;
    let spin = |k: usize| k % 2;
    let irrep = |k: usize| orbital_irreps[k / 2];
    let mut pool = Vec::new();
    let mut push = |label: Excitation, irrep: Irrep, string: Vec<Ladder>| {
        let mut generator = FermionOperator::term(1.0, string.clone());
        generator.add_term(-1.0, string.iter().rev().map(|l| l.adjoint()).collect());
        if generator.is_zero() {
            return;
        }
        pool.push(PoolOperator { id: pool.len(), generator, label, irrep });
    };

    for p in 0..n {
        for q in 0..p {
            let g = irrep(p) ^ irrep(q);
            if spin(p) == spin(q) && g == TOTALLY_SYMMETRIC {
                push(Excitation::Single { p, q }, g, vec![Ladder::Create(p), Ladder::Annihilate(q)]);
            }
        }
    }
    for p in 0..n {
        for q in 0..p {
            for r in 0..n {
                for s in 0..r {
                    if (p, q) <= (r, s) {
                        continue;
                    }
                    let g = irrep(p) ^ irrep(q) ^ irrep(r) ^ irrep(s);
                    if spin(p) + spin(q) != spin(r) + spin(s) || g != TOTALLY_SYMMETRIC {
                        continue;
                    }
                    push(
                        Excitation::Double { p, q, r, s },
                        g,
                        vec![Ladder::Create(p), Ladder::Create(q), Ladder::Annihilate(r), Ladder::Annihilate(s)],
                    );
                }
            }
        }
    }
    pool
}

/// Pool generators compiled on one basis, indexed by pool id.
pub fn compile_pool(pool: &[PoolOperator], basis: &Basis) -> Result<Vec<Generator>> {
    use rayon::prelude::*;
    pool.par_iter().map(|op| Generator::compile(&op.generator, basis)).collect()
}
