//! Exact diagonalization within a determinant basis.

use std::sync::Arc;

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};
use crate::fock::{dot, Basis, FermionOperator, SparseOperator, StateVector};
use crate::hamiltonian::build_s_squared;
use crate::integral_io::Irrep;

/// Largest basis handled by the dense eigensolver.
pub const DENSE_LIMIT: usize = 4000;

/// Eigenvalues closer than this are treated as one degenerate level.
const DEGENERACY_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Solver {
    /// Dense up to [`DENSE_LIMIT`], Lanczos above.
    Auto,
    Dense,
    Lanczos,
}

#[derive(Debug, Clone)]
pub struct FciSpectrum {
    pub basis: Arc<Basis>,
    pub energies: Vec<f64>,
    pub vectors: Vec<StateVector>,
    pub s2_values: Vec<f64>,
    /// Irrep of each state, `None` if it mixes irreps (possible only across a degeneracy).
    pub irreps: Vec<Option<Irrep>>,
    /// `||H v - E v||` per state.
    pub residuals: Vec<f64>,
}

impl FciSpectrum {
    pub fn len(&self) -> usize {
        self.energies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.energies.is_empty()
    }

    /// Spin quantum number `s` with `s(s+1)` nearest to the state's `<S^2>`.
    pub fn spin(&self, i: usize) -> f64 {
        spin_from_s2(self.s2_values[i])
    }

    /// Indices of states in `irrep` whose `<S^2>` is within `tol` of `s(s+1)`.
    pub fn select(&self, irrep: Option<Irrep>, s: Option<f64>, tol: f64) -> Vec<usize> {
        (0..self.len())
            .filter(|&i| irrep.is_none() || self.irreps[i] == irrep)
            .filter(|&i| !matches!(s, Some(s) if (self.s2_values[i] - s * (s + 1.0)).abs() > tol))
            .collect()
    }
}

/// Nearest half-integer `s` for an `<S^2>` value.
pub fn spin_from_s2(s2: f64) -> f64 {
    let s = 0.5 * (-1.0 + (1.0 + 4.0 * s2.max(0.0)).sqrt());
    (2.0 * s).round() / 2.0
}

/// Lowest `n_states` eigenpairs of `h` on `basis`.
pub fn fci_solve(h: &FermionOperator, basis: Arc<Basis>, n_states: usize) -> Result<FciSpectrum> {
    let hm = SparseOperator::compile(h, &basis)?;
    fci_solve_with(&hm, basis, n_states, Solver::Auto)
}

/// As [`fci_solve`] for an already compiled Hamiltonian.
pub fn fci_solve_with(h: &SparseOperator, basis: Arc<Basis>, n_states: usize, solver: Solver) -> Result<FciSpectrum> {
    let dim = basis.len();
    if n_states > dim {
        return Err(Error::TooManyStates { requested: n_states, available: dim });
    }
    if h.dim() != dim {
        return Err(Error::Dimension(format!("operator of dimension {} on a basis of {}", h.dim(), dim)));
    }
    let s2 = SparseOperator::compile(&build_s_squared(basis.n_spatial), &basis)?;
    let dense = match solver {
        Solver::Auto => dim <= DENSE_LIMIT,
        Solver::Dense => true,
        Solver::Lanczos => false,
    };
    let (energies, vectors) = if dense { dense_eigen(h, dim) } else { lanczos_lowest(h, dim, n_states)? };

    // include the whole degenerate level straddling the cut, canonicalize, then truncate
    let mut take = n_states.min(energies.len());
    while take > 0 && take < energies.len() && (energies[take] - energies[take - 1]).abs() < DEGENERACY_TOL {
        take += 1;
    }
    let mut energies = energies[..take].to_vec();
    let mut vectors: Vec<Vec<f64>> = vectors[..take].to_vec();
    canonicalize_degenerate(&basis, &s2, &energies, &mut vectors);
    energies.truncate(n_states);
    vectors.truncate(n_states);

    let mut out = FciSpectrum {
        basis: basis.clone(),
        energies,
        vectors: Vec::with_capacity(n_states),
        s2_values: Vec::with_capacity(n_states),
        irreps: Vec::with_capacity(n_states),
        residuals: Vec::with_capacity(n_states),
    };
    let mut hv = vec![0.0; dim];
    for (e, v) in out.energies.iter_mut().zip(vectors) {
        h.matvec(&v, &mut hv);
        // Rayleigh quotient, so rotated degenerate vectors keep their own value
        *e = dot(&v, &hv);
        let e = *e;
        let r = hv.iter().zip(&v).map(|(a, b)| (a - e * b).powi(2)).sum::<f64>().sqrt();
        out.residuals.push(r);
        out.s2_values.push(s2.bilinear(&v, &v));
        out.irreps.push(vector_irrep(&basis, &v));
        out.vectors.push(StateVector { basis: basis.clone(), coeffs: v });
    }
    // rotated degenerate vectors can come out of order at rounding level
    let mut order: Vec<usize> = (0..out.len()).collect();
    order.sort_by(|&a, &b| out.energies[a].total_cmp(&out.energies[b]));
    if order.iter().enumerate().any(|(i, &k)| i != k) {
        out.energies = order.iter().map(|&k| out.energies[k]).collect();
        out.vectors = order.iter().map(|&k| out.vectors[k].clone()).collect();
        out.s2_values = order.iter().map(|&k| out.s2_values[k]).collect();
        out.irreps = order.iter().map(|&k| out.irreps[k]).collect();
        out.residuals = order.iter().map(|&k| out.residuals[k]).collect();
    }
    Ok(out)
}

fn vector_irrep(basis: &Basis, v: &[f64]) -> Option<Irrep> {
    let mut weight = [0.0f64; 8];
    for (i, c) in v.iter().enumerate() {
        weight[basis.irrep_of(i) as usize] += c * c;
    }
    let (g, w) = weight.iter().enumerate().fold((0, 0.0), |acc, (g, &w)| if w > acc.1 { (g, w) } else { acc });
    (w > 1.0 - 1e-8).then_some(g as Irrep)
}

fn dense_eigen(h: &SparseOperator, dim: usize) -> (Vec<f64>, Vec<Vec<f64>>) {
    let mut m = DMatrix::<f64>::zeros(dim, dim);
    for (i, j, v) in h.entries() {
        m[(i, j)] = v;
    }
    let m = 0.5 * (&m + m.transpose());
    let eig = SymmetricEigen::new(m);
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let energies = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = order.iter().map(|&k| eig.eigenvectors.column(k).iter().copied().collect()).collect();
    (energies, vectors)
}

/// Rotates each degenerate group onto simultaneous eigenvectors of the irrep
/// label and `S^2`, then fixes the sign so the largest coefficient is positive.
fn canonicalize_degenerate(basis: &Basis, s2: &SparseOperator, energies: &[f64], vectors: &mut [Vec<f64>]) {
    let n = energies.len();
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && (energies[end] - energies[end - 1]).abs() < DEGENERACY_TOL {
            end += 1;
        }
        let m = end - start;
        if m > 1 {
            let group = &vectors[start..end];
            // irrep labels spaced far beyond the S^2 range of any state here
            let label: Vec<f64> = (0..basis.len()).map(|i| 1000.0 * basis.irrep_of(i) as f64).collect();
            let mut mm = DMatrix::<f64>::zeros(m, m);
            for a in 0..m {
                for b in 0..m {
                    let weighted: f64 = group[a].iter().zip(&group[b]).zip(&label).map(|((x, y), l)| x * y * l).sum();
                    mm[(a, b)] = weighted + s2.bilinear(&group[a], &group[b]);
                }
            }
            let mm = 0.5 * (&mm + mm.transpose());
            let eig = SymmetricEigen::new(mm);
            let mut order: Vec<usize> = (0..m).collect();
            order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
            let rotated: Vec<Vec<f64>> = order
                .iter()
                .map(|&k| {
                    let mut v = vec![0.0; basis.len()];
                    for (a, ga) in group.iter().enumerate().take(m) {
                        let c = eig.eigenvectors[(a, k)];
                        v.iter_mut().zip(ga).for_each(|(vi, g)| *vi += c * g);
                    }
                    v
                })
                .collect();
            for (k, v) in rotated.into_iter().enumerate() {
                vectors[start + k] = v;
            }
        }
        start = end;
    }
    for v in vectors.iter_mut() {
        fix_sign(v);
    }
}

/// Makes the first largest-magnitude coefficient positive.
pub fn fix_sign(v: &mut [f64]) {
    let mut best = 0;
    for (i, c) in v.iter().enumerate() {
        if c.abs() > v[best].abs() + 1e-10 {
            best = i;
        }
    }
    if v.get(best).is_some_and(|&c| c < 0.0) {
        v.iter_mut().for_each(|c| *c = -*c);
    }
}

/// Deterministic pseudo-random start vector (splitmix64).
fn start_vector(dim: usize, seed: u64) -> Vec<f64> {
    (0..dim as u64)
        .map(|i| {
            let mut z = seed.wrapping_add(i.wrapping_mul(0x9E37_79B9_7F4A_7C15));
            z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
            z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
            z ^= z >> 31;
            (z >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        })
        .collect()
}

fn orthogonalize(v: &mut [f64], against: &[Vec<f64>]) {
    for _ in 0..2 {
        for u in against {
            let c = dot(u, v);
            v.iter_mut().zip(u).for_each(|(a, b)| *a -= c * b);
        }
    }
}

/// Lanczos with full reorthogonalization and locking: each round runs in the
/// complement of the vectors already locked and locks the lowest Ritz pair,
/// so degenerate levels are resolved one copy at a time.
fn lanczos_lowest(h: &SparseOperator, dim: usize, n_states: usize) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
    let mut locked: Vec<Vec<f64>> = Vec::new();
    let mut energies = Vec::new();
    let max_krylov = dim.min(400);
    // one extra round so a degenerate partner of the last state is found
    let wanted = (n_states + 1).min(dim);
    while locked.len() < wanted {
        let remaining = dim - locked.len();
        let mut q = start_vector(dim, 0x5EED + locked.len() as u64);
        orthogonalize(&mut q, &locked);
        let norm = dot(&q, &q).sqrt();
        q.iter_mut().for_each(|x| *x /= norm);
        let mut qs: Vec<Vec<f64>> = vec![q];
        let mut alpha: Vec<f64> = Vec::new();
        let mut beta: Vec<f64> = Vec::new();
        let mut w = vec![0.0; dim];
        let mut result: Option<(f64, Vec<f64>)> = None;
        for k in 0..max_krylov.min(remaining) {
            h.matvec(&qs[k], &mut w);
            let a = dot(&w, &qs[k]);
            alpha.push(a);
            orthogonalize(&mut w, &locked);
            orthogonalize(&mut w, &qs);
            let b = dot(&w, &w).sqrt();
            let m = alpha.len();
            let mut t = DMatrix::<f64>::zeros(m, m);
            for i in 0..m {
                t[(i, i)] = alpha[i];
                if i + 1 < m {
                    t[(i, i + 1)] = beta[i];
                    t[(i + 1, i)] = beta[i];
                }
            }
            let eig = SymmetricEigen::new(t);
            let low = (0..m).min_by(|&x, &y| eig.eigenvalues[x].total_cmp(&eig.eigenvalues[y])).unwrap();
            let residual = (b * eig.eigenvectors[(m - 1, low)]).abs();
            let done = residual < 1e-11 || b < 1e-12 || k + 1 == max_krylov.min(remaining);
            if done {
                let mut v = vec![0.0; dim];
                for (i, qi) in qs.iter().enumerate() {
                    let c = eig.eigenvectors[(i, low)];
                    v.iter_mut().zip(qi).for_each(|(a, b)| *a += c * b);
                }
                orthogonalize(&mut v, &locked);
                let nv = dot(&v, &v).sqrt();
                v.iter_mut().for_each(|x| *x /= nv);
                result = Some((eig.eigenvalues[low], v));
                break;
            }
            beta.push(b);
            qs.push(w.iter().map(|x| x / b).collect());
        }
        let (e, v) = result.ok_or_else(|| Error::Numerical("Lanczos produced no Ritz pair".into()))?;
        energies.push(e);
        locked.push(v);
    }
    let mut order: Vec<usize> = (0..energies.len()).collect();
    order.sort_by(|&a, &b| energies[a].total_cmp(&energies[b]));
    Ok((order.iter().map(|&k| energies[k]).collect(), order.iter().map(|&k| locked[k].clone()).collect()))
}

/// Greedy maximum-overlap matching of approximate states to exact ones.
#[derive(Debug, Clone, PartialEq)]
pub struct Assignment {
    /// `mapping[i]` is the exact state assigned to approximate state `i`.
    pub mapping: Vec<usize>,
    /// Squared overlaps `|<approx_i|exact_mapping[i]>|^2`.
    pub overlaps: Vec<f64>,
    /// Overlap below one half.
    pub ambiguous: Vec<bool>,
}

pub fn assign_states(approx: &[StateVector], exact: &FciSpectrum) -> Result<Assignment> {
    if approx.len() > exact.len() {
        return Err(Error::TooManyStates { requested: approx.len(), available: exact.len() });
    }
    let mut pairs = Vec::with_capacity(approx.len() * exact.len());
    for (i, a) in approx.iter().enumerate() {
        if a.basis.dets() != exact.basis.dets() {
            return Err(Error::Invalid("approximate and exact states use different bases".into()));
        }
        for (j, e) in exact.vectors.iter().enumerate() {
            pairs.push((a.dot(e).powi(2), i, j));
        }
    }
    // largest overlap first; ties to the lowest indices
    pairs.sort_by(|x, y| y.0.total_cmp(&x.0).then(x.1.cmp(&y.1)).then(x.2.cmp(&y.2)));
    let mut mapping = vec![usize::MAX; approx.len()];
    let mut overlaps = vec![0.0; approx.len()];
    let mut used = vec![false; exact.len()];
    for (ov, i, j) in pairs {
        if mapping[i] == usize::MAX && !used[j] {
            mapping[i] = j;
            overlaps[i] = ov;
            used[j] = true;
        }
    }
    let ambiguous = overlaps.iter().map(|&o| o < 0.5).collect();
    Ok(Assignment { mapping, overlaps, ambiguous })
}
