//! FCIDUMP reader/writer and one-electron property integral files.
//!
//! The FCIDUMP grammar is the usual one: a Fortran-namelist style header
//! (`&FCI NORB=..,NELEC=..,MS2=..,ORBSYM=..., &END`) followed by lines
//! `value i j k l` with 1-based orbital indices. Two-electron integrals are
//! in chemists' notation `(ij|kl)`; `value i j 0 0` is a one-electron
//! integral, `value i 0 0 0` an orbital energy (ignored) and `value 0 0 0 0`
//! the constant (nuclear repulsion plus any frozen-core energy).
//!
//! Property files (dipole integrals, one per Cartesian axis) use the same
//! header and line grammar but only carry `value i j 0 0` entries plus an
//! optional `value 0 0 0 0` nuclear contribution.
//!
//! `ORBSYM` values follow the Molpro numbering, so `ORBSYM - 1` is an
//! [`Irrep`] label that composes by XOR for every abelian point group.

use std::collections::HashMap;
use std::fmt::Write as _;

use crate::error::{Error, Result};

/// Abelian irreducible representation, encoded so that direct products are XOR.
pub type Irrep = u8;

/// The totally symmetric irrep.
pub const TOTALLY_SYMMETRIC: Irrep = 0;

/// Largest irrep label of D2h (the largest abelian group in use).
pub const MAX_IRREP: Irrep = 7;

#[derive(Debug, Clone, PartialEq)]
pub struct MolecularIntegrals {
    pub n_spatial: usize,
    pub n_electrons: usize,
    /// Twice the spin projection recorded in the header.
    pub ms2: i32,
    pub core_energy: f64,
    /// Row-major `n x n`.
    pub one_body: Vec<f64>,
    /// Row-major `n^4`, chemists' notation `(pq|rs)`, stored fully expanded.
    pub two_body: Vec<f64>,
    pub orbital_irreps: Vec<Irrep>,
}

impl MolecularIntegrals {
    /// All-zero integrals over `n_spatial` totally symmetric orbitals.
    pub fn zeros(n_spatial: usize, n_electrons: usize) -> Self {
        Self {
            n_spatial,
            n_electrons,
            ms2: 0,
            core_energy: 0.0,
            one_body: vec![0.0; n_spatial * n_spatial],
            two_body: vec![0.0; n_spatial.pow(4)],
            orbital_irreps: vec![TOTALLY_SYMMETRIC; n_spatial],
        }
    }

    #[inline]
    pub fn h(&self, p: usize, q: usize) -> f64 {
        self.one_body[p * self.n_spatial + q]
    }

    #[inline]
    pub fn g(&self, p: usize, q: usize, r: usize, s: usize) -> f64 {
        let n = self.n_spatial;
        self.two_body[((p * n + q) * n + r) * n + s]
    }

    /// Sets `h_pq` and `h_qp`.
    pub fn set_h(&mut self, p: usize, q: usize, value: f64) {
        let n = self.n_spatial;
        self.one_body[p * n + q] = value;
        self.one_body[q * n + p] = value;
    }

    /// Sets `(pq|rs)` and its seven permutational partners.
    pub fn set_g(&mut self, p: usize, q: usize, r: usize, s: usize, value: f64) {
        for (a, b, c, d) in eightfold(p, q, r, s) {
            let n = self.n_spatial;
            self.two_body[((a * n + b) * n + c) * n + d] = value;
        }
    }

    /// Number of alpha and beta electrons implied by `NELEC` and `MS2`.
    pub fn electron_split(&self) -> Result<(usize, usize)> {
        let n = self.n_electrons as i64;
        let ms2 = self.ms2 as i64;
        if (n + ms2) % 2 != 0 || ms2.abs() > n {
            return Err(Error::Invalid(format!("NELEC={} incompatible with MS2={}", n, ms2)));
        }
        Ok((((n + ms2) / 2) as usize, ((n - ms2) / 2) as usize))
    }
}

/// Cartesian axis of a property operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub const ALL: [Axis; 3] = [Axis::X, Axis::Y, Axis::Z];

    pub fn label(self) -> &'static str {
        match self {
            Axis::X => "x",
            Axis::Y => "y",
            Axis::Z => "z",
        }
    }
}

/// One-electron property integrals `mu_pq = <p| r_axis |q>` (atomic units)
/// plus the nuclear contribution along the same axis.
#[derive(Debug, Clone, PartialEq)]
pub struct PropertyIntegrals {
    pub component: Axis,
    pub n_spatial: usize,
    pub one_body: Vec<f64>,
    pub nuclear_term: f64,
}

impl PropertyIntegrals {
    #[inline]
    pub fn get(&self, p: usize, q: usize) -> f64 {
        self.one_body[p * self.n_spatial + q]
    }
}

fn eightfold(p: usize, q: usize, r: usize, s: usize) -> [(usize, usize, usize, usize); 8] {
    [
        (p, q, r, s),
        (q, p, r, s),
        (p, q, s, r),
        (q, p, s, r),
        (r, s, p, q),
        (s, r, p, q),
        (r, s, q, p),
        (s, r, q, p),
    ]
}

fn canonical_quad(p: usize, q: usize, r: usize, s: usize) -> (usize, usize, usize, usize) {
    let (a, b) = if p >= q { (p, q) } else { (q, p) };
    let (c, d) = if r >= s { (r, s) } else { (s, r) };
    if (a, b) >= (c, d) {
        (a, b, c, d)
    } else {
        (c, d, a, b)
    }
}

#[derive(Debug, Default)]
struct Header {
    norb: Option<usize>,
    nelec: Option<usize>,
    ms2: Option<i32>,
    orbsym: Option<Vec<i64>>,
}

/// Splits the namelist header from the data lines. Returns the header and the
/// (1-based) line number at which data starts.
fn parse_header(lines: &[&str]) -> Result<(Header, usize)> {
    let start = lines
        .iter()
        .position(|l| !l.trim().is_empty())
        .ok_or(Error::Parse { line: 1, message: "empty input".into() })?;
    if !lines[start].trim_start().to_ascii_uppercase().starts_with("&FCI") {
        return Err(Error::Parse { line: start + 1, message: "expected '&FCI' namelist header".into() });
    }
    let mut body = String::new();
    let mut end = None;
    for (idx, raw) in lines.iter().enumerate().skip(start) {
        let mut text = raw.trim().to_string();
        if idx == start {
            text = text[4..].to_string();
        }
        let upper = text.to_ascii_uppercase();
        if let Some(pos) = upper.find("&END").or_else(|| if upper == "/" || upper.ends_with(" /") { upper.rfind('/') } else { None }) {
            body.push_str(&text[..pos]);
            body.push(',');
            end = Some(idx + 1);
            break;
        }
        body.push_str(&text);
        body.push(',');
    }
    let end = end.ok_or(Error::Parse { line: lines.len(), message: "unterminated namelist header (missing &END)".into() })?;

    let mut header = Header::default();
    let mut key: Option<String> = None;
    let mut values: Vec<String> = Vec::new();
    let flush = |key: &Option<String>, values: &mut Vec<String>, header: &mut Header| -> Result<()> {
        if let Some(k) = key {
            let line = start + 1;
            let ints = || -> Result<Vec<i64>> {
                values
                    .iter()
                    .map(|v| {
                        v.parse::<i64>().map_err(|_| Error::Parse { line, message: format!("bad integer '{}' for {}", v, k) })
                    })
                    .collect()
            };
            match k.as_str() {
                "NORB" => header.norb = Some(single(&ints()?, k, line)? as usize),
                "NELEC" => header.nelec = Some(single(&ints()?, k, line)? as usize),
                "MS2" => header.ms2 = Some(single(&ints()?, k, line)? as i32),
                "ORBSYM" => header.orbsym = Some(ints()?),
                _ => {}
            }
        }
        values.clear();
        Ok(())
    };
    for token in body.split(',') {
        let token = token.trim();
        if token.is_empty() {
            continue;
        }
        if let Some((k, v)) = token.split_once('=') {
            flush(&key, &mut values, &mut header)?;
            key = Some(k.trim().to_ascii_uppercase());
            let v = v.trim();
            if !v.is_empty() {
                values.extend(v.split_whitespace().map(str::to_string));
            }
        } else {
            if key.is_none() {
                return Err(Error::Parse { line: start + 1, message: format!("value '{}' without a key", token) });
            }
            values.extend(token.split_whitespace().map(str::to_string));
        }
    }
    flush(&key, &mut values, &mut header)?;
    Ok((header, end))
}

fn single(v: &[i64], key: &str, line: usize) -> Result<i64> {
    match v {
        [x] if *x >= 0 || key == "MS2" => Ok(*x),
        _ => Err(Error::Parse { line, message: format!("{} expects one non-negative integer", key) }),
    }
}

struct DataLine {
    line: usize,
    value: f64,
    idx: [usize; 4],
}

fn data_lines(lines: &[&str], first: usize, norb: usize) -> Result<Vec<DataLine>> {
    let mut out = Vec::new();
    for (offset, raw) in lines.iter().enumerate().skip(first) {
        let line = offset + 1;
        let text = raw.trim();
        if text.is_empty() {
            continue;
        }
        let tokens: Vec<&str> = text.split_whitespace().collect();
        if tokens.len() != 5 {
            return Err(Error::Parse { line, message: format!("expected 'value i j k l', found {} fields", tokens.len()) });
        }
        let value: f64 = tokens[0]
            .replace(['D', 'd'], "E")
            .parse()
            .map_err(|_| Error::Parse { line, message: format!("bad number '{}'", tokens[0]) })?;
        let mut idx = [0usize; 4];
        for (slot, tok) in idx.iter_mut().zip(&tokens[1..]) {
            let v: i64 = tok.parse().map_err(|_| Error::Parse { line, message: format!("bad index '{}'", tok) })?;
            if v < 0 || v as usize > norb {
                return Err(Error::IndexOutOfRange { line, index: v.max(0) as usize, norb });
            }
            *slot = v as usize;
        }
        out.push(DataLine { line, value, idx });
    }
    Ok(out)
}

fn record<K: std::hash::Hash + Eq + std::fmt::Debug>(
    seen: &mut HashMap<K, f64>,
    key: K,
    value: f64,
) -> Result<()> {
    if let Some(&old) = seen.get(&key) {
        if (old - value).abs() > 1e-12 * old.abs().max(1.0) {
            return Err(Error::Inconsistent { what: format!("{:?}", key), first: old, second: value });
        }
    } else {
        seen.insert(key, value);
    }
    Ok(())
}

fn orbital_irreps(header: &Header, norb: usize) -> Result<Vec<Irrep>> {
    match &header.orbsym {
        None => Ok(vec![TOTALLY_SYMMETRIC; norb]),
        Some(sym) => {
            if sym.len() != norb {
                return Err(Error::Parse { line: 1, message: format!("ORBSYM has {} entries, NORB is {}", sym.len(), norb) });
            }
            sym.iter()
                .map(|&s| {
                    if (1..=(MAX_IRREP as i64 + 1)).contains(&s) {
                        Ok((s - 1) as Irrep)
                    } else {
                        Err(Error::Parse { line: 1, message: format!("ORBSYM value {} outside 1..=8", s) })
                    }
                })
                .collect()
        }
    }
}

/// Parses an FCIDUMP file.
pub fn parse_fcidump(text: &str) -> Result<MolecularIntegrals> {
    let lines: Vec<&str> = text.lines().collect();
    let (header, first) = parse_header(&lines)?;
    let norb = header.norb.ok_or(Error::Parse { line: 1, message: "header lacks NORB".into() })?;
    if norb == 0 {
        return Err(Error::Parse { line: 1, message: "NORB must be at least 1".into() });
    }
    let nelec = header.nelec.ok_or(Error::Parse { line: 1, message: "header lacks NELEC".into() })?;
    let mut mi = MolecularIntegrals::zeros(norb, nelec);
    mi.ms2 = header.ms2.unwrap_or(0);
    mi.orbital_irreps = orbital_irreps(&header, norb)?;

    let mut seen2: HashMap<(usize, usize, usize, usize), f64> = HashMap::new();
    let mut seen1: HashMap<(usize, usize), f64> = HashMap::new();
    let mut core: Option<f64> = None;
    for dl in data_lines(&lines, first, norb)? {
        let [i, j, k, l] = dl.idx;
        match (i > 0, j > 0, k > 0, l > 0) {
            (false, false, false, false) => {
                if let Some(old) = core {
                    if (old - dl.value).abs() > 1e-12 * old.abs().max(1.0) {
                        return Err(Error::Inconsistent { what: "core energy".into(), first: old, second: dl.value });
                    }
                }
                core = Some(dl.value);
            }
            (true, false, false, false) => {} // orbital energy
            (true, true, false, false) => {
                let key = (i.max(j) - 1, i.min(j) - 1);
                record(&mut seen1, key, dl.value)?;
                mi.set_h(i - 1, j - 1, dl.value);
            }
            (true, true, true, true) => {
                let key = canonical_quad(i - 1, j - 1, k - 1, l - 1);
                record(&mut seen2, key, dl.value)?;
                mi.set_g(i - 1, j - 1, k - 1, l - 1, dl.value);
            }
            _ => {
                return Err(Error::Parse { line: dl.line, message: format!("unrecognised index pattern {:?}", dl.idx) });
            }
        }
    }
    mi.core_energy = core.unwrap_or(0.0);
    Ok(mi)
}

/// Parses a one-electron property integral file for the given axis.
pub fn parse_property_integrals(text: &str, component: Axis) -> Result<PropertyIntegrals> {
    let lines: Vec<&str> = text.lines().collect();
    let (header, first) = parse_header(&lines)?;
    let norb = header.norb.ok_or(Error::Parse { line: 1, message: "header lacks NORB".into() })?;
    let mut out = PropertyIntegrals { component, n_spatial: norb, one_body: vec![0.0; norb * norb], nuclear_term: 0.0 };
    let mut seen1: HashMap<(usize, usize), f64> = HashMap::new();
    let mut nuclear: Option<f64> = None;
    for dl in data_lines(&lines, first, norb)? {
        let [i, j, k, l] = dl.idx;
        match (i > 0, j > 0, k > 0, l > 0) {
            (false, false, false, false) => {
                if let Some(old) = nuclear {
                    if (old - dl.value).abs() > 1e-12 * old.abs().max(1.0) {
                        return Err(Error::Inconsistent { what: "nuclear term".into(), first: old, second: dl.value });
                    }
                }
                nuclear = Some(dl.value);
            }
            (true, true, false, false) => {
                record(&mut seen1, (i.max(j) - 1, i.min(j) - 1), dl.value)?;
                out.one_body[(i - 1) * norb + (j - 1)] = dl.value;
                out.one_body[(j - 1) * norb + (i - 1)] = dl.value;
            }
            _ => {
                return Err(Error::Parse {
                    line: dl.line,
                    message: format!("property files only carry 'value i j 0 0' entries, found {:?}", dl.idx),
                });
            }
        }
    }
    out.nuclear_term = nuclear.unwrap_or(0.0);
    Ok(out)
}

/// Serializes integrals as FCIDUMP using the shortest round-tripping
/// representation of each value; zero entries are omitted.
pub fn write_fcidump(mi: &MolecularIntegrals) -> String {
    let n = mi.n_spatial;
    let mut s = String::new();
    let _ = writeln!(s, " &FCI NORB={},NELEC={},MS2={},", n, mi.n_electrons, mi.ms2);
    let sym: Vec<String> = mi.orbital_irreps.iter().map(|&g| (g + 1).to_string()).collect();
    let _ = writeln!(s, "  ORBSYM={},", sym.join(","));
    let _ = writeln!(s, "  ISYM=1,\n &END");
    for i in 0..n {
        for j in 0..=i {
            for k in 0..n {
                for l in 0..=k {
                    if (k, l) > (i, j) {
                        continue;
                    }
                    let v = mi.g(i, j, k, l);
                    if v != 0.0 {
                        let _ = writeln!(s, "{:e} {} {} {} {}", v, i + 1, j + 1, k + 1, l + 1);
                    }
                }
            }
        }
    }
    for i in 0..n {
        for j in 0..=i {
            let v = mi.h(i, j);
            if v != 0.0 {
                let _ = writeln!(s, "{:e} {} {} 0 0", v, i + 1, j + 1);
            }
        }
    }
    let _ = writeln!(s, "{:e} 0 0 0 0", mi.core_energy);
    s
}

/// One violated relation in a [`ValidationReport`].
#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub relation: &'static str,
    pub worst_deviation: f64,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn find(&self, relation: &str) -> Option<&Violation> {
        self.violations.iter().find(|v| v.relation == relation)
    }
}

struct Tally {
    relation: &'static str,
    worst: f64,
    count: usize,
}

impl Tally {
    fn new(relation: &'static str) -> Self {
        Self { relation, worst: 0.0, count: 0 }
    }

    fn check(&mut self, deviation: f64, tol: f64) {
        if deviation > tol {
            self.count += 1;
            self.worst = self.worst.max(deviation);
        }
    }

    fn finish(self, report: &mut ValidationReport) {
        if self.count > 0 {
            report.violations.push(Violation { relation: self.relation, worst_deviation: self.worst, count: self.count });
        }
    }
}

/// Checks the symmetry relations the rest of the library relies on.
///
/// Relations: `one_body hermiticity`, `two_body permutational symmetry`
/// (relative tolerance 1e-12), `one_body point-group symmetry` and
/// `two_body point-group symmetry` (integrals between orbitals whose irreps
/// do not multiply to the totally symmetric one must vanish), `irrep labels`
/// and `dimensions`.
pub fn validate_integrals(mi: &MolecularIntegrals) -> ValidationReport {
    let mut report = ValidationReport::default();
    let n = mi.n_spatial;
    if n == 0 || mi.one_body.len() != n * n || mi.two_body.len() != n.pow(4) || mi.orbital_irreps.len() != n {
        report.violations.push(Violation { relation: "dimensions", worst_deviation: f64::INFINITY, count: 1 });
        return report;
    }
    let mut labels = Tally::new("irrep labels");
    for &g in &mi.orbital_irreps {
        labels.check(if g > MAX_IRREP { 1.0 } else { 0.0 }, 0.0);
    }
    labels.finish(&mut report);

    let mut herm = Tally::new("one_body hermiticity");
    let mut sym1 = Tally::new("one_body point-group symmetry");
    for p in 0..n {
        for q in 0..n {
            herm.check((mi.h(p, q) - mi.h(q, p)).abs(), 0.0);
            if mi.orbital_irreps[p] ^ mi.orbital_irreps[q] != TOTALLY_SYMMETRIC {
                sym1.check(mi.h(p, q).abs(), 1e-10);
            }
        }
    }
    herm.finish(&mut report);
    sym1.finish(&mut report);

    let mut perm = Tally::new("two_body permutational symmetry");
    let mut sym2 = Tally::new("two_body point-group symmetry");
    for p in 0..n {
        for q in 0..n {
            for r in 0..n {
                for s in 0..n {
                    let v = mi.g(p, q, r, s);
                    for (a, b, c, d) in eightfold(p, q, r, s).into_iter().skip(1) {
                        let w = mi.g(a, b, c, d);
                        perm.check((v - w).abs() / v.abs().max(w.abs()).max(1.0), 1e-12);
                    }
                    let irr = mi.orbital_irreps[p] ^ mi.orbital_irreps[q] ^ mi.orbital_irreps[r] ^ mi.orbital_irreps[s];
                    if irr != TOTALLY_SYMMETRIC {
                        sym2.check(v.abs(), 1e-10);
                    }
                }
            }
        }
    }
    perm.finish(&mut report);
    sym2.finish(&mut report);
    report
}
