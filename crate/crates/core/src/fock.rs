//! Determinants, fermionic operator strings and their action on state vectors.
//!
//! Spin orbitals are interleaved: spin orbital `2p` is spatial orbital `p`
//! with alpha spin and `2p + 1` the same orbital with beta spin. A
//! determinant is the product of creators over its occupied spin orbitals in
//! ascending order applied to the vacuum, so acting with `a_k` or `a†_k`
//! picks up a factor `(-1)^m`, `m` being the number of occupied spin
//! orbitals with index below `k`.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::integral_io::Irrep;

/// Spin orbital index for spatial orbital `p` and spin `s` (0 alpha, 1 beta).
#[inline]
pub fn spin_orbital(p: usize, beta: bool) -> usize {
    2 * p + beta as usize
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Determinant {
    pub alpha_occ: u64,
    pub beta_occ: u64,
}

impl Determinant {
    pub fn new(alpha_occ: u64, beta_occ: u64) -> Self {
        Self { alpha_occ, beta_occ }
    }

    /// Parses an occupation string with one character per spatial orbital:
    /// `0` empty, `a` alpha, `b` beta, `2` doubly occupied.
    pub fn from_occupation(s: &str) -> Result<Self> {
        let mut det = Self::new(0, 0);
        for (p, ch) in s.chars().enumerate() {
            if p >= 64 {
                return Err(Error::Invalid("occupation string longer than 64 orbitals".into()));
            }
            let bit = 1u64 << p;
            match ch {
                '0' => {}
                'a' => det.alpha_occ |= bit,
                'b' => det.beta_occ |= bit,
                '2' => {
                    det.alpha_occ |= bit;
                    det.beta_occ |= bit;
                }
                other => {
                    return Err(Error::Invalid(format!("bad occupation character '{}' in \"{}\"", other, s)));
                }
            }
        }
        Ok(det)
    }

    pub fn occupation_string(&self, n_spatial: usize) -> String {
        (0..n_spatial)
            .map(|p| match ((self.alpha_occ >> p) & 1, (self.beta_occ >> p) & 1) {
                (0, 0) => '0',
                (1, 0) => 'a',
                (0, 1) => 'b',
                _ => '2',
            })
            .collect()
    }

    #[inline]
    pub fn n_alpha(&self) -> u32 {
        self.alpha_occ.count_ones()
    }

    #[inline]
    pub fn n_beta(&self) -> u32 {
        self.beta_occ.count_ones()
    }

    #[inline]
    pub fn is_occupied(&self, so: usize) -> bool {
        let p = so / 2;
        if so.is_multiple_of(2) {
            (self.alpha_occ >> p) & 1 == 1
        } else {
            (self.beta_occ >> p) & 1 == 1
        }
    }

    #[inline]
    fn flip(&mut self, so: usize) {
        let p = so / 2;
        if so.is_multiple_of(2) {
            self.alpha_occ ^= 1 << p;
        } else {
            self.beta_occ ^= 1 << p;
        }
    }

    /// Number of occupied spin orbitals with index below `so`.
    #[inline]
    fn occupied_below(&self, so: usize) -> u32 {
        let p = so / 2;
        let below = (1u64 << p) - 1;
        let mut count = (self.alpha_occ & below).count_ones() + (self.beta_occ & below).count_ones();
        if so % 2 == 1 {
            count += ((self.alpha_occ >> p) & 1) as u32;
        }
        count
    }

    /// XOR of the irreps of all occupied orbitals.
    pub fn irrep(&self, orbital_irreps: &[Irrep]) -> Irrep {
        let mut g = 0;
        for (p, &irrep) in orbital_irreps.iter().enumerate() {
            let n = ((self.alpha_occ >> p) & 1) + ((self.beta_occ >> p) & 1);
            if n == 1 {
                g ^= irrep;
            }
        }
        g
    }
}

/// A single creation or annihilation operator on a spin orbital.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Ladder {
    Create(usize),
    Annihilate(usize),
}

impl Ladder {
    #[inline]
    pub fn index(self) -> usize {
        match self {
            Ladder::Create(i) | Ladder::Annihilate(i) => i,
        }
    }

    #[inline]
    pub fn is_create(self) -> bool {
        matches!(self, Ladder::Create(_))
    }

    pub fn adjoint(self) -> Self {
        match self {
            Ladder::Create(i) => Ladder::Annihilate(i),
            Ladder::Annihilate(i) => Ladder::Create(i),
        }
    }
}

impl fmt::Display for Ladder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Ladder::Create(i) => write!(f, "a+{}", i),
            Ladder::Annihilate(i) => write!(f, "a{}", i),
        }
    }
}

/// Product of ladder operators, written left to right; the rightmost acts first.
pub type OpString = Vec<Ladder>;

/// Applies an operator string to a determinant.
///
/// Returns `None` when the string annihilates the determinant.
pub fn apply_string(det: Determinant, string: &[Ladder]) -> Option<(Determinant, f64)> {
    let mut d = det;
    let mut parity = 0u32;
    for &op in string.iter().rev() {
        let so = op.index();
        if d.is_occupied(so) == op.is_create() {
            return None;
        }
        parity += d.occupied_below(so);
        d.flip(so);
    }
    Some((d, if parity.is_multiple_of(2) { 1.0 } else { -1.0 }))
}

/// Real linear combination of operator strings plus a constant.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FermionOperator {
    terms: BTreeMap<OpString, f64>,
    constant: f64,
}

impl FermionOperator {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: f64) -> Self {
        Self { terms: BTreeMap::new(), constant: c }
    }

    pub fn identity() -> Self {
        Self::constant(1.0)
    }

    /// Single-term operator `coeff * string` (after canonical reordering).
    pub fn term(coeff: f64, string: OpString) -> Self {
        let mut op = Self::zero();
        op.add_term(coeff, string);
        op
    }

    /// Number operator `sum_k n_k` over `n_spin_orbitals`.
    pub fn number(n_spin_orbitals: usize) -> Self {
        let mut op = Self::zero();
        for k in 0..n_spin_orbitals {
            op.add_term(1.0, vec![Ladder::Create(k), Ladder::Annihilate(k)]);
        }
        op
    }

    /// Adds `coeff * string`. Normal-ordered strings are brought to canonical
    /// form (creators and annihilators each sorted by descending index) so
    /// that equal operators merge; strings with a repeated creator or
    /// annihilator vanish.
    pub fn add_term(&mut self, coeff: f64, string: OpString) {
        if coeff == 0.0 {
            return;
        }
        if string.is_empty() {
            self.constant += coeff;
            return;
        }
        let Some((sign, string)) = canonicalize(string) else {
            return;
        };
        let value = self.terms.get(&string).copied().unwrap_or(0.0) + sign * coeff;
        if value == 0.0 {
            self.terms.remove(&string);
        } else {
            self.terms.insert(string, value);
        }
    }

    pub fn add_constant(&mut self, c: f64) {
        self.constant += c;
    }

    pub fn constant_term(&self) -> f64 {
        self.constant
    }

    pub fn terms(&self) -> impl Iterator<Item = (&OpString, f64)> {
        self.terms.iter().map(|(s, &c)| (s, c))
    }

    pub fn n_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty() && self.constant == 0.0
    }

    /// Largest spin-orbital index referenced plus one.
    pub fn n_spin_orbitals(&self) -> usize {
        self.terms.keys().flat_map(|s| s.iter().map(|l| l.index() + 1)).max().unwrap_or(0)
    }

    pub fn scaled(&self, factor: f64) -> Self {
        let mut out = Self::constant(self.constant * factor);
        for (s, c) in self.terms() {
            out.add_term(c * factor, s.clone());
        }
        out
    }

    pub fn plus(&self, other: &Self) -> Self {
        let mut out = self.clone();
        out.constant += other.constant;
        for (s, c) in other.terms() {
            out.add_term(c, s.clone());
        }
        out
    }

    /// Operator product `self * other` (strings concatenated, then normal ordered).
    pub fn times(&self, other: &Self) -> Self {
        let mut out = Self::constant(self.constant * other.constant);
        for (s, c) in self.terms() {
            if other.constant != 0.0 {
                out.add_term(c * other.constant, s.clone());
            }
        }
        for (s, c) in other.terms() {
            if self.constant != 0.0 {
                out.add_term(c * self.constant, s.clone());
            }
        }
        for (s1, c1) in self.terms() {
            for (s2, c2) in other.terms() {
                let mut s = s1.clone();
                s.extend_from_slice(s2);
                out.add_term(c1 * c2, s);
            }
        }
        out.normal_ordered()
    }

    /// Hermitian adjoint.
    pub fn adjoint(&self) -> Self {
        let mut out = Self::constant(self.constant);
        for (s, c) in self.terms() {
            out.add_term(c, s.iter().rev().map(|l| l.adjoint()).collect());
        }
        out
    }

    /// Rewrites every string in normal order (creators left of annihilators)
    /// using the canonical anticommutation relations.
    pub fn normal_ordered(&self) -> Self {
        let mut out = Self::constant(self.constant);
        let mut stack: Vec<(f64, OpString)> = self.terms().map(|(s, c)| (c, s.clone())).collect();
        while let Some((c, s)) = stack.pop() {
            match s.windows(2).position(|w| !w[0].is_create() && w[1].is_create()) {
                None => out.add_term(c, s),
                Some(k) => {
                    // a_i a+_j = delta_ij - a+_j a_i
                    let (i, j) = (s[k].index(), s[k + 1].index());
                    let mut swapped = s.clone();
                    swapped.swap(k, k + 1);
                    stack.push((-c, swapped));
                    if i == j {
                        let mut contracted = s[..k].to_vec();
                        contracted.extend_from_slice(&s[k + 2..]);
                        if contracted.is_empty() {
                            out.constant += c;
                        } else {
                            stack.push((c, contracted));
                        }
                    }
                }
            }
        }
        out
    }

    /// Largest coefficient difference between `self` and `other`.
    pub fn max_difference(&self, other: &Self) -> f64 {
        let diff = self.plus(&other.scaled(-1.0));
        diff.terms().map(|(_, c)| c.abs()).fold(diff.constant.abs(), f64::max)
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.normal_ordered().max_difference(&self.adjoint().normal_ordered()) <= tol
    }

    pub fn is_anti_hermitian(&self, tol: f64) -> bool {
        self.normal_ordered().max_difference(&self.adjoint().normal_ordered().scaled(-1.0)) <= tol
    }
}

/// Sorts the creator block and the annihilator block of a normal-ordered
/// string into descending index order, returning the permutation sign.
/// Strings that are not normal ordered are returned unchanged.
fn canonicalize(mut s: OpString) -> Option<(f64, OpString)> {
    let n_create = s.iter().take_while(|l| l.is_create()).count();
    if s[n_create..].iter().any(|l| l.is_create()) {
        return Some((1.0, s));
    }
    let mut sign = 1.0;
    for block in [0..n_create, n_create..s.len()] {
        let part = &mut s[block];
        for i in 1..part.len() {
            let mut j = i;
            while j > 0 && part[j - 1].index() < part[j].index() {
                part.swap(j - 1, j);
                sign = -sign;
                j -= 1;
            }
        }
        if part.windows(2).any(|w| w[0].index() == w[1].index()) {
            return None;
        }
    }
    Some((sign, s))
}

/// Which irreps a basis covers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum IrrepSector {
    All,
    Only(Vec<Irrep>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sector {
    pub n_alpha: usize,
    pub n_beta: usize,
    pub irreps: IrrepSector,
}

/// Ordered determinant basis of one (or a union of) symmetry sectors.
#[derive(Debug, Clone)]
pub struct Basis {
    pub n_spatial: usize,
    pub orbital_irreps: Vec<Irrep>,
    pub sector: Sector,
    dets: Vec<Determinant>,
    index_of: HashMap<Determinant, usize>,
}

impl PartialEq for Basis {
    fn eq(&self, other: &Self) -> bool {
        self.dets == other.dets && self.orbital_irreps == other.orbital_irreps
    }
}

impl Basis {
    pub fn dets(&self) -> &[Determinant] {
        &self.dets
    }

    pub fn len(&self) -> usize {
        self.dets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dets.is_empty()
    }

    pub fn index_of(&self, det: &Determinant) -> Option<usize> {
        self.index_of.get(det).copied()
    }

    /// Irrep label of basis state `i`.
    pub fn irrep_of(&self, i: usize) -> Irrep {
        self.dets[i].irrep(&self.orbital_irreps)
    }
}

fn combinations(n: usize, k: usize) -> Vec<u64> {
    let mut out = Vec::new();
    if k > n {
        return out;
    }
    if k == 0 {
        out.push(0);
        return out;
    }
    // Gosper's hack walks k-subsets in increasing numeric order.
    let mut x: u64 = (1u64 << k) - 1;
    let limit = 1u64 << n;
    while x < limit {
        out.push(x);
        let c = x & x.wrapping_neg();
        let r = x + c;
        x = (((r ^ x) >> 2) / c) | r;
    }
    out
}

/// All determinants with the given electron counts, optionally restricted to one irrep.
pub fn enumerate_basis(
    n_spatial: usize,
    n_alpha: usize,
    n_beta: usize,
    irrep_filter: Option<Irrep>,
    orbital_irreps: &[Irrep],
) -> Result<Basis> {
    let irreps = match irrep_filter {
        None => IrrepSector::All,
        Some(g) => IrrepSector::Only(vec![g]),
    };
    enumerate_sector(n_spatial, Sector { n_alpha, n_beta, irreps }, orbital_irreps)
}

/// All determinants of a sector; `IrrepSector::Only` may list several irreps.
pub fn enumerate_sector(n_spatial: usize, sector: Sector, orbital_irreps: &[Irrep]) -> Result<Basis> {
    if n_spatial > 63 {
        return Err(Error::Invalid("at most 63 spatial orbitals are supported".into()));
    }
    if orbital_irreps.len() != n_spatial {
        return Err(Error::Dimension(format!("{} orbital irreps for {} orbitals", orbital_irreps.len(), n_spatial)));
    }
    if sector.n_alpha > n_spatial || sector.n_beta > n_spatial {
        return Err(Error::Invalid(format!(
            "cannot place {} alpha / {} beta electrons in {} orbitals",
            sector.n_alpha, sector.n_beta, n_spatial
        )));
    }
    let alphas = combinations(n_spatial, sector.n_alpha);
    let betas = combinations(n_spatial, sector.n_beta);
    let mut dets = Vec::new();
    for &a in &alphas {
        for &b in &betas {
            let det = Determinant::new(a, b);
            let keep = match &sector.irreps {
                IrrepSector::All => true,
                IrrepSector::Only(list) => list.contains(&det.irrep(orbital_irreps)),
            };
            if keep {
                dets.push(det);
            }
        }
    }
    dets.sort();
    let index_of = dets.iter().enumerate().map(|(i, d)| (*d, i)).collect();
    Ok(Basis { n_spatial, orbital_irreps: orbital_irreps.to_vec(), sector, dets, index_of })
}

/// Coefficients over a shared determinant basis.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    pub basis: Arc<Basis>,
    pub coeffs: Vec<f64>,
}

impl StateVector {
    pub fn zeros(basis: Arc<Basis>) -> Self {
        let n = basis.len();
        Self { basis, coeffs: vec![0.0; n] }
    }

    pub fn basis_state(basis: Arc<Basis>, i: usize) -> Self {
        let mut v = Self::zeros(basis);
        v.coeffs[i] = 1.0;
        v
    }

    pub fn from_coeffs(basis: Arc<Basis>, coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.len() != basis.len() {
            return Err(Error::Dimension(format!("{} coefficients for a basis of {}", coeffs.len(), basis.len())));
        }
        Ok(Self { basis, coeffs })
    }

    pub fn dot(&self, other: &Self) -> f64 {
        dot(&self.coeffs, &other.coeffs)
    }

    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn normalized(mut self) -> Result<Self> {
        let n = self.norm();
        if n == 0.0 || !n.is_finite() {
            return Err(Error::Invalid("cannot normalize a zero vector".into()));
        }
        self.coeffs.iter_mut().for_each(|c| *c /= n);
        Ok(self)
    }

    /// `self + alpha * other`.
    pub fn axpy(&self, alpha: f64, other: &Self) -> Self {
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a + alpha * b).collect();
        Self { basis: self.basis.clone(), coeffs }
    }

    pub fn scaled(&self, alpha: f64) -> Self {
        Self { basis: self.basis.clone(), coeffs: self.coeffs.iter().map(|c| alpha * c).collect() }
    }
}

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `op * v`, term by term.
///
/// A string that maps a basis determinant outside the basis is a hard error.
pub fn apply_operator(op: &FermionOperator, v: &StateVector) -> Result<StateVector> {
    let basis = &v.basis;
    let mut w = v.scaled(op.constant_term());
    for (i, det) in basis.dets().iter().enumerate() {
        let ci = v.coeffs[i];
        if ci == 0.0 {
            continue;
        }
        for (string, coeff) in op.terms() {
            if let Some((image, phase)) = apply_string(*det, string) {
                let j = basis.index_of(&image).ok_or_else(|| leave_error(basis, det, string))?;
                w.coeffs[j] += coeff * phase * ci;
            }
        }
    }
    Ok(w)
}

fn leave_error(basis: &Basis, det: &Determinant, string: &[Ladder]) -> Error {
    let s: Vec<String> = string.iter().map(|l| l.to_string()).collect();
    Error::Sector(format!(
        "operator string [{}] maps determinant {} out of the basis",
        s.join(" "),
        det.occupation_string(basis.n_spatial)
    ))
}

/// Truncated-Taylor `exp(theta * A) v`, stopping once a series term has
/// 2-norm below `tol`. At most 60 terms are summed.
pub fn apply_exp(generator: &FermionOperator, theta: f64, v: &StateVector, tol: f64) -> Result<StateVector> {
    taylor_exp(theta, v, tol, |x| apply_operator(generator, x))
}

const TAYLOR_CAP: usize = 60;

fn taylor_exp<F>(theta: f64, v: &StateVector, tol: f64, apply: F) -> Result<StateVector>
where
    F: Fn(&StateVector) -> Result<StateVector>,
{
    if theta == 0.0 {
        return Ok(v.clone());
    }
    let mut sum = v.clone();
    let mut term = v.clone();
    let mut growth: f64 = 0.0;
    for k in 1..=TAYLOR_CAP {
        let next = apply(&term)?.scaled(theta / k as f64);
        let tn = term.norm();
        if tn > 0.0 {
            growth = growth.max(next.norm() / tn * k as f64);
        }
        term = next;
        sum = sum.axpy(1.0, &term);
        if term.norm() < tol {
            return Ok(sum);
        }
    }
    Err(Error::ExpNotConverged { terms: TAYLOR_CAP, theta_norm: growth })
}

/// Builds a normalized reference state from determinant coefficients.
pub fn build_reference(entries: &[(Determinant, f64)], basis: Arc<Basis>) -> Result<StateVector> {
    let mut v = StateVector::zeros(basis.clone());
    for (det, c) in entries {
        let i = basis.index_of(det).ok_or_else(|| {
            Error::Sector(format!("determinant {} is not in the basis", det.occupation_string(basis.n_spatial)))
        })?;
        v.coeffs[i] += c;
    }
    v.normalized()
}

/// Compressed-row real matrix of an operator restricted to a basis.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseOperator {
    dim: usize,
    row_ptr: Vec<usize>,
    cols: Vec<u32>,
    vals: Vec<f64>,
}

impl SparseOperator {
    /// Matrix of `op` on `basis`; errors if any term leaves the basis.
    pub fn compile(op: &FermionOperator, basis: &Basis) -> Result<Self> {
        Self::build(op, basis, false)
    }

    /// `P op P` for the projector `P` onto `basis`: images outside the basis
    /// are dropped. Used for property operators whose symmetry connects the
    /// working sectors to sectors that are not represented.
    pub fn compile_projected(op: &FermionOperator, basis: &Basis) -> Result<Self> {
        Self::build(op, basis, true)
    }

    fn build(op: &FermionOperator, basis: &Basis, project: bool) -> Result<Self> {
        let n = basis.len();
        let terms: Vec<(&OpString, f64)> = op.terms().collect();
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        // column j is op|det_j>; collect triplets and sort into rows
        let mut triplets: Vec<(u32, u32, f64)> = Vec::new();
        for (j, det) in basis.dets().iter().enumerate() {
            if op.constant_term() != 0.0 {
                triplets.push((j as u32, j as u32, op.constant_term()));
            }
            for (string, coeff) in &terms {
                if let Some((image, phase)) = apply_string(*det, string) {
                    match basis.index_of(&image) {
                        Some(i) => triplets.push((i as u32, j as u32, coeff * phase)),
                        None if project => {}
                        None => return Err(leave_error(basis, det, string)),
                    }
                }
            }
        }
        triplets.sort_by_key(|a| (a.0, a.1));
        row_ptr.push(0);
        let mut t = 0;
        for i in 0..n as u32 {
            while t < triplets.len() && triplets[t].0 == i {
                let (_, j, mut v) = triplets[t];
                t += 1;
                while t < triplets.len() && triplets[t].0 == i && triplets[t].1 == j {
                    v += triplets[t].2;
                    t += 1;
                }
                if v != 0.0 {
                    cols.push(j);
                    vals.push(v);
                }
            }
            row_ptr.push(cols.len());
        }
        Ok(Self { dim: n, row_ptr, cols, vals })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    /// `y = A x`.
    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        for (i, yi) in y.iter_mut().enumerate().take(self.dim) {
            let mut s = 0.0;
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                s += self.vals[k] * x[self.cols[k] as usize];
            }
            *yi = s;
        }
    }

    pub fn apply(&self, v: &StateVector) -> StateVector {
        let mut w = StateVector::zeros(v.basis.clone());
        self.matvec(&v.coeffs, &mut w.coeffs);
        w
    }

    /// `<u|A|v>`.
    pub fn bilinear(&self, u: &[f64], v: &[f64]) -> f64 {
        let mut total = 0.0;
        for (i, &ui) in u.iter().enumerate().take(self.dim) {
            if ui == 0.0 {
                continue;
            }
            let mut s = 0.0;
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                s += self.vals[k] * v[self.cols[k] as usize];
            }
            total += ui * s;
        }
        total
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let row = &self.cols[self.row_ptr[i]..self.row_ptr[i + 1]];
        match row.binary_search(&(j as u32)) {
            Ok(k) => self.vals[self.row_ptr[i] + k],
            Err(_) => 0.0,
        }
    }

    /// Row-major dense copy.
    pub fn to_dense(&self) -> Vec<f64> {
        let mut m = vec![0.0; self.dim * self.dim];
        for i in 0..self.dim {
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                m[i * self.dim + self.cols[k] as usize] = self.vals[k];
            }
        }
        m
    }

    /// Stored entries as `(row, col, value)`.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.dim).flat_map(move |i| {
            (self.row_ptr[i]..self.row_ptr[i + 1]).map(move |k| (i, self.cols[k] as usize, self.vals[k]))
        })
    }

    /// Truncated-Taylor `exp(theta * A) v` with the same stopping rule as [`apply_exp`].
    pub fn exp_apply(&self, theta: f64, v: &StateVector, tol: f64) -> Result<StateVector> {
        taylor_exp(theta, v, tol, |x| Ok(self.apply(x)))
    }
}

/// One plane rotation of an anti-Hermitian generator: `A e_j = c e_i` and
/// `A e_i = -c e_j`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairRotation {
    pub i: u32,
    pub j: u32,
    pub c: f64,
}

/// Anti-Hermitian generator compiled for repeated application on one basis.
///
/// Excitation generators `T - T†` couple every determinant to at most one
/// partner, so their exponential is a set of disjoint plane rotations with a
/// closed form. Anything else falls back to the sparse matrix and Taylor.
#[derive(Debug, Clone, PartialEq)]
pub enum Generator {
    Pairs(Vec<PairRotation>),
    General(SparseOperator),
}

impl Generator {
    pub fn compile(op: &FermionOperator, basis: &Basis) -> Result<Self> {
        let m = SparseOperator::compile(op, basis)?;
        let n = m.dim();
        let mut partner: Vec<Option<usize>> = vec![None; n];
        let mut pairwise = true;
        for (i, j, _) in m.entries() {
            if i == j || partner[j].is_some_and(|p| p != i) || partner[i].is_some_and(|p| p != j) {
                pairwise = false;
                break;
            }
            partner[j] = Some(i);
            partner[i] = Some(j);
        }
        if pairwise {
            let mut pairs = Vec::new();
            for (i, j, c) in m.entries() {
                if i < j {
                    if (m.get(j, i) + c).abs() > 1e-14 * c.abs().max(1.0) {
                        return Err(Error::Invalid("generator is not anti-Hermitian on this basis".into()));
                    }
                    pairs.push(PairRotation { i: i as u32, j: j as u32, c });
                }
            }
            Ok(Generator::Pairs(pairs))
        } else {
            Ok(Generator::General(m))
        }
    }

    /// `y = A x`.
    pub fn apply(&self, x: &[f64], y: &mut [f64]) {
        match self {
            Generator::Pairs(pairs) => {
                y.iter_mut().for_each(|v| *v = 0.0);
                for p in pairs {
                    let (i, j) = (p.i as usize, p.j as usize);
                    y[i] += p.c * x[j];
                    y[j] -= p.c * x[i];
                }
            }
            Generator::General(m) => m.matvec(x, y),
        }
    }

    /// `<u|A v>`.
    pub fn bilinear(&self, u: &[f64], v: &[f64]) -> f64 {
        match self {
            Generator::Pairs(pairs) => pairs
                .iter()
                .map(|p| {
                    let (i, j) = (p.i as usize, p.j as usize);
                    p.c * (u[i] * v[j] - u[j] * v[i])
                })
                .sum(),
            Generator::General(m) => m.bilinear(u, v),
        }
    }

    /// In-place `x <- exp(theta * A) x`.
    pub fn exp_in_place(&self, theta: f64, x: &mut [f64]) -> Result<()> {
        if theta == 0.0 {
            return Ok(());
        }
        match self {
            Generator::Pairs(pairs) => {
                let mut rot = Rotations::new(theta);
                for p in pairs {
                    let (s, c) = rot.get(p.c);
                    let (i, j) = (p.i as usize, p.j as usize);
                    let (xi, xj) = (x[i], x[j]);
                    x[i] = c * xi + s * xj;
                    x[j] = c * xj - s * xi;
                }
                Ok(())
            }
            Generator::General(m) => {
                let mut term = x.to_vec();
                let mut next = vec![0.0; x.len()];
                for k in 1..=TAYLOR_CAP {
                    m.matvec(&term, &mut next);
                    let f = theta / k as f64;
                    let mut tn = 0.0;
                    for (t, (nx, xv)) in term.iter_mut().zip(next.iter().zip(x.iter_mut())) {
                        *t = f * nx;
                        *xv += *t;
                        tn += *t * *t;
                    }
                    if tn.sqrt() < 1e-14 {
                        return Ok(());
                    }
                }
                Err(Error::ExpNotConverged { terms: TAYLOR_CAP, theta_norm: theta.abs() })
            }
        }
    }

    /// Returns `<u|A v>`, then applies `exp(-theta * A)` to both `u` and `v`.
    pub fn bilinear_then_unrotate(&self, theta: f64, u: &mut [f64], v: &mut [f64]) -> Result<f64> {
        match self {
            Generator::Pairs(pairs) => {
                let mut rot = Rotations::new(-theta);
                let mut total = 0.0;
                for p in pairs {
                    let (i, j) = (p.i as usize, p.j as usize);
                    let (ui, uj, vi, vj) = (u[i], u[j], v[i], v[j]);
                    total += p.c * (ui * vj - uj * vi);
                    if theta != 0.0 {
                        let (s, c) = rot.get(p.c);
                        u[i] = c * ui + s * uj;
                        u[j] = c * uj - s * ui;
                        v[i] = c * vi + s * vj;
                        v[j] = c * vj - s * vi;
                    }
                }
                Ok(total)
            }
            Generator::General(m) => {
                let total = m.bilinear(u, v);
                self.exp_in_place(-theta, u)?;
                self.exp_in_place(-theta, v)?;
                Ok(total)
            }
        }
    }

    pub fn is_empty(&self) -> bool {
        match self {
            Generator::Pairs(p) => p.is_empty(),
            Generator::General(m) => m.nnz() == 0,
        }
    }
}

/// `sin_cos(c * theta)` memoized on the last coefficient; pair coefficients
/// are almost always `+-1`.
struct Rotations {
    theta: f64,
    last: f64,
    sc: (f64, f64),
}

impl Rotations {
    fn new(theta: f64) -> Self {
        Self { theta, last: 1.0, sc: theta.sin_cos() }
    }

    #[inline]
    fn get(&mut self, c: f64) -> (f64, f64) {
        if c == self.last {
            self.sc
        } else if c == -self.last {
            (-self.sc.0, self.sc.1)
        } else {
            self.last = c;
            self.sc = (c * self.theta).sin_cos();
            self.sc
        }
    }
}
