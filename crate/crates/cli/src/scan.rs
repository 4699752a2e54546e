//! Per-geometry calculations and the scan driver.

use std::fmt::Write as _;
use std::path::Path;
use std::result::Result;
use std::sync::Arc;

use log::{info, warn};
use more_adapt::fci::DENSE_LIMIT;
use more_adapt::prelude::*;
use more_adapt::properties::transition_dipole_components;
use rayon::prelude::*;

use crate::config::{GeometrySpec, Method, RunConfig};
use crate::error::ScanError;
use crate::plot;

/// One computed state, matched to its exact counterpart.
#[derive(Debug, Clone, PartialEq)]
pub struct StateRow {
    pub index: usize,
    /// Reference with the largest weight in the state's expansion.
    pub label: String,
    pub energy: f64,
    pub fci_state: usize,
    pub fci_energy: f64,
    pub s2: f64,
    /// `|<state|fci_state>|^2`.
    pub overlap: f64,
}

impl StateRow {
    pub fn error(&self) -> f64 {
        self.energy - self.fci_energy
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PropertyRow {
    pub i: usize,
    pub j: usize,
    /// `|<i|mu_axis|j>|^2` in Debye^2, x, y, z; absent without dipole files.
    pub mu2: Option<[f64; 3]>,
    pub s2_i: f64,
    pub s2_j: f64,
}

impl PropertyRow {
    pub fn mu2_total(&self) -> Option<f64> {
        self.mu2.map(|m| m.iter().sum())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnsatzSummary {
    pub geometry: String,
    pub coordinate: f64,
    pub total_ops: usize,
    pub distinct_ops: usize,
    pub pool_size: usize,
    /// Dimension of the symmetry sector of each reference.
    pub sector_dims: Vec<usize>,
}

impl AnsatzSummary {
    /// Sum of the reference sector dimensions: enough operators to reach
    /// every target state exactly.
    pub fn linear_bound(&self) -> usize {
        self.sector_dims.iter().sum()
    }
}

#[derive(Debug, Clone)]
pub struct GeometryResult {
    pub id: String,
    pub coordinate: f64,
    pub method: Method,
    pub states: Vec<StateRow>,
    pub trace: AdaptTrace,
    /// Number of Ritz energies per trace row.
    pub trace_width: usize,
    pub properties: Vec<PropertyRow>,
    pub summary: AnsatzSummary,
    /// q-sc-EOM only: norm of the ground-manifold coupling block.
    pub coupling_norm: Option<f64>,
    pub stop: Option<StopReason>,
}

struct Stage<'a>(&'a str);

impl Stage<'_> {
    fn at(&self, stage: &'static str) -> impl Fn(more_adapt::Error) -> ScanError + '_ {
        move |source| ScanError::Numerical { geometry: self.0.to_string(), stage, source }
    }
}

fn read(path: &Path) -> Result<String, ScanError> {
    std::fs::read_to_string(path).map_err(|e| ScanError::Config(format!("{}: {}", path.display(), e)))
}

/// Index of the largest `|c_ji|` in column `i`.
fn dominant(coeffs: &nalgebra::DMatrix<f64>, i: usize) -> usize {
    let col = coeffs.column(i);
    (0..col.len()).fold(0, |best, j| if col[j].abs() > col[best].abs() + 1e-12 { j } else { best })
}

/// Lowest exact energy among states overlapping `phi`.
fn target_energy(phi: &StateVector, fci: &FciSpectrum) -> f64 {
    fci.vectors
        .iter()
        .zip(&fci.energies)
        .find(|(v, _)| v.dot(phi).powi(2) > 1e-8)
        .map_or(fci.energies[0], |(_, &e)| e)
}

struct Computed {
    states: Vec<StateVector>,
    energies: Vec<f64>,
    labels: Vec<String>,
    ansatz: Ansatz,
    trace: AdaptTrace,
    trace_width: usize,
    coupling_norm: Option<f64>,
    stop: Option<StopReason>,
}

pub fn run_geometry(cfg: &RunConfig, g: &GeometrySpec) -> Result<GeometryResult, ScanError> {
    let st = Stage(&g.id);
    let mi = parse_fcidump(&read(&g.fcidump)?).map_err(st.at("parse"))?;
    let report = validate_integrals(&mi);
    if !report.passed() {
        warn!("geometry {}: integral checks failed: {:?}", g.id, report.violations);
    }
    let (n_alpha, n_beta) = mi.electron_split().map_err(st.at("parse"))?;
    let irreps = cfg.irrep_sector(&mi.orbital_irreps)?;
    let sector = Sector { n_alpha, n_beta, irreps };
    let basis = Arc::new(enumerate_sector(mi.n_spatial, sector, &mi.orbital_irreps).map_err(st.at("basis"))?);
    info!("geometry {}: {} determinants", g.id, basis.len());
    let h = build_hamiltonian(&mi);
    let hm = SparseOperator::compile(&h, &basis).map_err(st.at("hamiltonian"))?;
    let refs = cfg.reference_states(&basis)?;
    let n_report = match cfg.method {
        Method::Fci => cfg.n_states.unwrap_or(if refs.is_empty() { 6 } else { refs.len() }).min(basis.len()),
        _ => refs.len(),
    };
    let n_fci = if basis.len() <= DENSE_LIMIT { basis.len() } else { (n_report + 10).min(basis.len()) };
    let fci = fci_solve_with(&hm, basis.clone(), n_fci, Solver::Auto).map_err(st.at("fci"))?;
    let pool = build_uccgsd_pool(mi.n_spatial, &mi.orbital_irreps);
    let optimizer: OptimizerSettings = cfg.optimizer.into();
    let labels: Vec<String> = cfg.references.iter().map(|r| r.label.clone()).collect();

    let computed = match cfg.method {
        Method::Fci => Computed {
            states: fci.vectors[..n_report].to_vec(),
            energies: fci.energies[..n_report].to_vec(),
            labels: (0..n_report).map(|i| format!("fci{}", i)).collect(),
            ansatz: Ansatz::new(),
            trace: AdaptTrace::default(),
            trace_width: 0,
            coupling_norm: None,
            stop: None,
        },
        Method::Adapt | Method::MoreAdapt => {
            let problem = Problem::new(&h, &pool, basis.clone()).map_err(st.at("pool"))?;
            let refset = match &cfg.weights {
                Some(w) => ReferenceSet::new(refs.clone(), w.clone()),
                None => ReferenceSet::equal(refs.clone()),
            }
            .map_err(|e| ScanError::Config(e.to_string()))?;
            let mut stop = cfg.stop_criteria();
            if let Some(tol) = cfg.stop.target_fci {
                stop.target = Some(TargetEnergy { energy: target_energy(&refs[0], &fci), tol });
            }
            let res = run_adapt(&problem, &refset, &stop, &optimizer).map_err(st.at("adapt"))?;
            if res.optimizer_warnings > 0 {
                warn!("geometry {}: {} inner optimizations stopped early", g.id, res.optimizer_warnings);
            }
            let states = res.ritz.states(&res.ansatz, refset.refs(), &problem).map_err(st.at("ritz"))?;
            Computed {
                states,
                energies: res.ritz.energies.clone(),
                labels: (0..refs.len()).map(|i| labels[dominant(&res.ritz.coeffs, i)].clone()).collect(),
                ansatz: res.ansatz,
                trace_width: refs.len(),
                trace: res.trace,
                coupling_norm: None,
                stop: Some(res.stop),
            }
        }
        Method::Qsceom => {
            let problem = Problem::new(&h, &pool, basis.clone()).map_err(st.at("pool"))?;
            let phi0 = &refs[cfg.ground];
            let manifold: Vec<StateVector> =
                refs.iter().enumerate().filter(|&(i, _)| i != cfg.ground).map(|(_, s)| s.clone()).collect();
            let mut manifold_labels: Vec<&String> = labels.iter().collect();
            manifold_labels.remove(cfg.ground);
            let refset = ReferenceSet::equal(vec![phi0.clone()]).map_err(|e| ScanError::Config(e.to_string()))?;
            let mut stop = cfg.stop_criteria();
            if let Some(tol) = cfg.stop.target_fci {
                stop.target = Some(TargetEnergy { energy: target_energy(phi0, &fci), tol });
            }
            let ground = run_adapt(&problem, &refset, &stop, &optimizer).map_err(st.at("adapt"))?;
            let q = run_qsceom(&ground.ansatz, phi0, &manifold, &problem).map_err(st.at("qsceom"))?;
            let states = q.states(&ground.ansatz, phi0, &manifold, &problem).map_err(st.at("qsceom"))?;
            let mut state_labels = vec![labels[cfg.ground].clone()];
            state_labels.extend((0..manifold.len()).map(|i| manifold_labels[dominant(&q.manifold_coeffs, i)].clone()));
            Computed {
                states,
                energies: q.energies(),
                labels: state_labels,
                ansatz: ground.ansatz,
                trace: ground.trace,
                trace_width: 1,
                coupling_norm: Some(q.coupling_norm),
                stop: Some(ground.stop),
            }
        }
    };

    let s2 = SparseOperator::compile(&build_s_squared(mi.n_spatial), &basis).map_err(st.at("spin"))?;
    let s2_values: Vec<f64> = computed.states.iter().map(|s| s2.bilinear(&s.coeffs, &s.coeffs)).collect();
    let assignment = assign_states(&computed.states, &fci).map_err(st.at("assign"))?;
    for (i, &amb) in assignment.ambiguous.iter().enumerate() {
        if amb {
            warn!("geometry {}: state {} overlaps its exact counterpart by only {:.3}", g.id, i, assignment.overlaps[i]);
        }
    }
    let states: Vec<StateRow> = (0..computed.states.len())
        .map(|i| StateRow {
            index: i,
            label: computed.labels[i].clone(),
            energy: computed.energies[i],
            fci_state: assignment.mapping[i],
            fci_energy: fci.energies[assignment.mapping[i]],
            s2: s2_values[i],
            overlap: assignment.overlaps[i],
        })
        .collect();

    let dipoles = if g.dipole.is_empty() {
        None
    } else {
        let mut props = Vec::with_capacity(3);
        for (axis, path) in Axis::ALL.iter().zip(&g.dipole) {
            props.push(parse_property_integrals(&read(path)?, *axis).map_err(st.at("dipole"))?);
        }
        let props: [PropertyIntegrals; 3] = props.try_into().expect("three axes");
        let ops = build_dipole(mi.n_spatial, &props).map_err(st.at("dipole"))?;
        let mut mats = Vec::with_capacity(3);
        for (axis, op) in Axis::ALL.iter().zip(&ops) {
            let compiled = SparseOperator::compile_projected(op, &basis).map_err(st.at("dipole"))?;
            mats.push(operator_matrix(axis.label(), &compiled, &computed.states));
        }
        let mats: [PropertyMatrix; 3] = mats.try_into().expect("three axes");
        Some(mats)
    };
    let n = computed.states.len();
    let properties = (0..n)
        .flat_map(|i| (i..n).map(move |j| (i, j)))
        .map(|(i, j)| PropertyRow {
            i,
            j,
            mu2: dipoles.as_ref().map(|d| transition_dipole_components(i, j, d)),
            s2_i: s2_values[i],
            s2_j: s2_values[j],
        })
        .collect();

    let mut sector_dims = Vec::with_capacity(refs.len());
    for entries in cfg.determinants()? {
        let irrep = entries[0].0.irrep(&mi.orbital_irreps);
        let b = enumerate_basis(mi.n_spatial, n_alpha, n_beta, Some(irrep), &mi.orbital_irreps).map_err(st.at("basis"))?;
        sector_dims.push(b.len());
    }
    let summary = AnsatzSummary {
        geometry: g.id.clone(),
        coordinate: g.coordinate,
        total_ops: computed.ansatz.len(),
        distinct_ops: computed.ansatz.n_distinct(),
        pool_size: pool.len(),
        sector_dims,
    };
    info!(
        "geometry {}: max |E - E_FCI| = {:.3e} with {} operators",
        g.id,
        states.iter().map(|s| s.error().abs()).fold(0.0, f64::max),
        summary.total_ops
    );
    Ok(GeometryResult {
        id: g.id.clone(),
        coordinate: g.coordinate,
        method: cfg.method,
        states,
        trace: computed.trace,
        trace_width: computed.trace_width,
        properties,
        summary,
        coupling_norm: computed.coupling_norm,
        stop: computed.stop,
    })
}

fn e(v: f64) -> String {
    format!("{:.11e}", v)
}

/// `state,label,energy,fci_state,fci_energy,error,s2,overlap`.
pub fn energies_csv(r: &GeometryResult) -> String {
    let mut s = String::from("state,label,energy,fci_state,fci_energy,error,s2,overlap\n");
    for row in &r.states {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{}",
            row.index,
            row.label,
            e(row.energy),
            row.fci_state,
            e(row.fci_energy),
            e(row.error()),
            e(row.s2),
            e(row.overlap)
        );
    }
    s
}

/// `i,j,mu2_x,mu2_y,mu2_z,mu2_total,s2_i,s2_j`; dipole columns are empty
/// without dipole integrals.
pub fn properties_csv(r: &GeometryResult) -> String {
    let mut s = String::from("i,j,mu2_x,mu2_y,mu2_z,mu2_total,s2_i,s2_j\n");
    for p in &r.properties {
        let mu = match (p.mu2, p.mu2_total()) {
            (Some(m), Some(t)) => format!("{},{},{},{}", e(m[0]), e(m[1]), e(m[2]), e(t)),
            _ => ",,,".to_string(),
        };
        let _ = writeln!(s, "{},{},{},{},{}", p.i, p.j, mu, e(p.s2_i), e(p.s2_j));
    }
    s
}

/// One row per geometry and state, in scan order.
pub fn curves_csv(results: &[GeometryResult]) -> String {
    let mut s = String::from("geometry,coordinate,state,label,energy,fci_energy,error,s2,overlap\n");
    for r in results {
        for row in &r.states {
            let _ = writeln!(
                s,
                "{},{},{},{},{},{},{},{},{}",
                r.id,
                r.coordinate,
                row.index,
                row.label,
                e(row.energy),
                e(row.fci_energy),
                e(row.error()),
                e(row.s2),
                e(row.overlap)
            );
        }
    }
    s
}

/// `geometry,coordinate,total_ops,distinct_ops,pool_size,sector_dims,linear_bound`,
/// with the sector dimensions joined by `+`.
pub fn summarize_ansatz(summaries: &[AnsatzSummary]) -> String {
    let mut s = String::from("geometry,coordinate,total_ops,distinct_ops,pool_size,sector_dims,linear_bound\n");
    for a in summaries {
        let dims: Vec<String> = a.sector_dims.iter().map(|d| d.to_string()).collect();
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{}",
            a.geometry,
            a.coordinate,
            a.total_ops,
            a.distinct_ops,
            a.pool_size,
            dims.join("+"),
            a.linear_bound()
        );
    }
    s
}

/// q-sc-EOM results: `geometry,state,energy,s2,coupling_norm`.
pub fn qsceom_csv(results: &[GeometryResult]) -> String {
    let mut s = String::from("geometry,state,energy,s2,coupling_norm\n");
    for r in results {
        let c = r.coupling_norm.map(e).unwrap_or_default();
        for row in &r.states {
            let _ = writeln!(s, "{},{},{},{},{}", r.id, row.index, e(row.energy), e(row.s2), c);
        }
    }
    s
}

/// Writes `contents` next to `path` and renames it into place.
pub fn write_atomic(path: &Path, contents: &str) -> Result<(), ScanError> {
    let out = |source| ScanError::Output { path: path.display().to_string(), source };
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(out)?;
    }
    let tmp = path.with_extension("tmp");
    std::fs::write(&tmp, contents).map_err(out)?;
    std::fs::rename(&tmp, path).map_err(out)
}

pub fn write_geometry(out_dir: &Path, r: &GeometryResult) -> Result<(), ScanError> {
    let dir = out_dir.join(&r.id);
    write_atomic(&dir.join("energies.csv"), &energies_csv(r))?;
    write_atomic(&dir.join("trace.csv"), &r.trace.to_csv(r.trace_width))?;
    write_atomic(&dir.join("properties.csv"), &properties_csv(r))
}

#[derive(Debug, Default)]
pub struct ScanReport {
    pub results: Vec<GeometryResult>,
    /// Geometries that failed, with their errors, in scan order.
    pub failures: Vec<(String, ScanError)>,
}

/// Runs every geometry (up to `jobs` at a time), writes per-geometry files
/// as each finishes and the scan-level files at the end. Returns the first
/// failure after everything that succeeded has been written.
pub fn run_scan(cfg: &RunConfig, jobs: Option<usize>) -> Result<ScanReport, ScanError> {
    cfg.validate()?;
    let geometries = cfg.geometry_list()?;
    let out_dir = cfg.out_dir();
    std::fs::create_dir_all(&out_dir).map_err(|source| ScanError::Output { path: out_dir.display().to_string(), source })?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = jobs {
        builder = builder.num_threads(n);
    }
    let threads = builder.build().map_err(|e| ScanError::Config(format!("thread pool: {}", e)))?;
    let outcomes: Vec<Result<GeometryResult, ScanError>> = threads.install(|| {
        geometries
            .par_iter()
            .map(|g| {
                info!("geometry {}: start", g.id);
                let r = run_geometry(cfg, g)?;
                write_geometry(&out_dir, &r)?;
                Ok(r)
            })
            .collect()
    });
    let mut report = ScanReport::default();
    for (g, o) in geometries.iter().zip(outcomes) {
        match o {
            Ok(r) => report.results.push(r),
            Err(e) => report.failures.push((g.id.clone(), e)),
        }
    }
    write_scan_files(&out_dir, cfg.method, &report.results)?;
    if !report.failures.is_empty() {
        let (_, err) = report.failures.remove(0);
        return Err(err);
    }
    Ok(report)
}

pub fn write_scan_files(out_dir: &Path, method: Method, results: &[GeometryResult]) -> Result<(), ScanError> {
    write_atomic(&out_dir.join("curves.csv"), &curves_csv(results))?;
    let summaries: Vec<AnsatzSummary> = results.iter().map(|r| r.summary.clone()).collect();
    write_atomic(&out_dir.join("ansatz.csv"), &summarize_ansatz(&summaries))?;
    if method == Method::Qsceom {
        write_atomic(&out_dir.join("qsceom.csv"), &qsceom_csv(results))?;
    }
    for (name, svg) in plot::panels(results) {
        write_atomic(&out_dir.join(name), &svg)?;
    }
    Ok(())
}
