//! The adaptive outer loop, single-reference (k = 1) and state-averaged (k > 1).

use std::fmt::Write as _;

use nalgebra::{DMatrix, SymmetricEigen};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fci::fix_sign;
use crate::fock::{dot, StateVector};
use crate::vqe::{energy_and_gradient, minimize, Ansatz, OptimizerSettings, Problem, ReferenceSet};

/// Gradient maxima closer than this are ties, resolved towards the smaller pool id.
pub const TIE_TOL: f64 = 1e-12;

/// Evolved references `U phi_i` and `H U phi_i`.
type Evolved = (Vec<Vec<f64>>, Vec<Vec<f64>>);

fn evolved(ansatz: &Ansatz, refs: &[StateVector], problem: &Problem) -> Result<Evolved> {
    let psis: Vec<Vec<f64>> = refs
        .par_iter()
        .map(|phi| {
            let mut x = phi.coeffs.clone();
            for &(id, theta) in ansatz.ops.iter().rev() {
                problem
                    .generators
                    .get(id)
                    .ok_or_else(|| Error::Invalid(format!("pool id {} out of range", id)))?
                    .exp_in_place(theta, &mut x)?;
            }
            Ok(x)
        })
        .collect::<Result<_>>()?;
    let sigmas = psis
        .par_iter()
        .map(|psi| {
            let mut y = vec![0.0; psi.len()];
            problem.h.matvec(psi, &mut y);
            y
        })
        .collect();
    Ok((psis, sigmas))
}

/// `g_j = sum_i w_i <phi_i| U† [H, A_j] U |phi_i>` for every pool operator.
pub fn screen_pool(ansatz: &Ansatz, refs: &ReferenceSet, problem: &Problem) -> Result<Vec<f64>> {
    let (psis, sigmas) = evolved(ansatz, refs.refs(), problem)?;
    let weights = refs.weights();
    Ok(problem
        .generators
        .par_iter()
        .map(|gen| {
            let mut g = 0.0;
            for ((psi, sigma), w) in psis.iter().zip(&sigmas).zip(weights) {
                g += 2.0 * w * gen.bilinear(sigma, psi);
            }
            g
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Selection {
    Operator(usize),
    /// Every gradient is exactly zero.
    Converged,
}

/// Index of the largest `|g_j|`; near-ties go to the smallest index.
pub fn select_operator(g: &[f64]) -> Selection {
    let max = g.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if max == 0.0 {
        return Selection::Converged;
    }
    let id = g.iter().position(|v| v.abs() >= max - TIE_TOL).expect("maximum is attained");
    Selection::Operator(id)
}

/// `Hbar_ij = <phi_i| U† H U |phi_j>`.
#[derive(Debug, Clone, PartialEq)]
pub struct DressedHamiltonian {
    pub matrix: DMatrix<f64>,
}

pub fn build_dressed_hamiltonian(ansatz: &Ansatz, refs: &[StateVector], problem: &Problem) -> Result<DressedHamiltonian> {
    let (psis, sigmas) = evolved(ansatz, refs, problem)?;
    let k = refs.len();
    let m = DMatrix::from_fn(k, k, |i, j| dot(&psis[i], &sigmas[j]));
    let asym = (&m - m.transpose()).abs().max();
    if asym > 1e-10 {
        return Err(Error::Numerical(format!("dressed Hamiltonian asymmetric by {:.3e}", asym)));
    }
    Ok(DressedHamiltonian { matrix: 0.5 * (&m + m.transpose()) })
}

/// Eigen-decomposition of the dressed Hamiltonian; column `i` of `coeffs`
/// holds the reference expansion of state `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct RitzSolution {
    pub energies: Vec<f64>,
    pub coeffs: DMatrix<f64>,
}

impl RitzSolution {
    /// `Psi_i = U sum_j c_ji phi_j`.
    pub fn states(&self, ansatz: &Ansatz, refs: &[StateVector], problem: &Problem) -> Result<Vec<StateVector>> {
        rotated_states(&self.coeffs, ansatz, refs, problem)
    }
}

/// `U sum_j c_ji phi_j` for every column `i` of `coeffs`.
pub fn rotated_states(coeffs: &DMatrix<f64>, ansatz: &Ansatz, refs: &[StateVector], problem: &Problem) -> Result<Vec<StateVector>> {
    let (psis, _) = evolved(ansatz, refs, problem)?;
    let basis = refs[0].basis.clone();
    Ok((0..coeffs.ncols())
        .map(|i| {
            let mut v = vec![0.0; basis.len()];
            for (j, psi) in psis.iter().enumerate() {
                let c = coeffs[(j, i)];
                v.iter_mut().zip(psi).for_each(|(a, b)| *a += c * b);
            }
            StateVector { basis: basis.clone(), coeffs: v }
        })
        .collect())
}

/// Symmetric eigen-decomposition with ascending eigenvalues and a fixed
/// column sign (largest entry positive).
pub fn symmetric_eigen_sorted(m: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let k = m.nrows();
    let eig = SymmetricEigen::new(m.clone());
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let mut coeffs = DMatrix::zeros(k, k);
    for (col, &src) in order.iter().enumerate() {
        let mut v: Vec<f64> = eig.eigenvectors.column(src).iter().copied().collect();
        fix_sign(&mut v);
        coeffs.set_column(col, &nalgebra::DVector::from_vec(v));
    }
    (order.iter().map(|&i| eig.eigenvalues[i]).collect(), coeffs)
}

pub fn ritz_diagonalize(dh: &DressedHamiltonian) -> RitzSolution {
    let (energies, coeffs) = symmetric_eigen_sorted(&dh.matrix);
    RitzSolution { energies, coeffs }
}

/// Energy the run may stop at once reached (useful when the exact answer is known).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TargetEnergy {
    pub energy: f64,
    pub tol: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct StopCriteria {
    /// Stop once the ansatz holds this many operators.
    pub max_ops: Option<usize>,
    /// Stop when the 2-norm of the pool gradient drops below this value.
    pub grad_norm: Option<f64>,
    /// Stop when `E_SA` changes by less than this between macro-iterations.
    pub energy_change: Option<f64>,
    /// Stop when `|E_SA - target| <= tol`.
    pub target: Option<TargetEnergy>,
}

impl StopCriteria {
    pub fn max_ops(n: usize) -> Self {
        Self { max_ops: Some(n), grad_norm: Some(1e-6), ..Self::default() }
    }

    fn is_empty(&self) -> bool {
        self.max_ops.is_none() && self.grad_norm.is_none() && self.energy_change.is_none() && self.target.is_none()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    MaxOperators,
    GradientNorm,
    EnergyChange,
    TargetReached,
    /// Every pool gradient vanished before any other criterion was met.
    PoolExhausted,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceRow {
    pub iter: usize,
    pub pool_id: usize,
    pub max_grad: f64,
    pub grad_norm: f64,
    pub e_sa: f64,
    pub energies: Vec<f64>,
    pub vqe_iterations: usize,
    pub n_ops: usize,
    pub n_distinct_ops: usize,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct AdaptTrace {
    pub rows: Vec<TraceRow>,
}

impl AdaptTrace {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// One row per macro-iteration: `iter,pool_id,max_grad,grad_norm,e_sa,e0..e{k-1},n_distinct_ops`.
    pub fn to_csv(&self, k: usize) -> String {
        let mut s = String::from("iter,pool_id,max_grad,grad_norm,e_sa");
        for i in 0..k {
            let _ = write!(s, ",e{}", i);
        }
        s.push_str(",n_distinct_ops\n");
        for r in &self.rows {
            let _ = write!(s, "{},{},{:.11e},{:.11e},{:.11e}", r.iter, r.pool_id, r.max_grad, r.grad_norm, r.e_sa);
            for e in &r.energies {
                let _ = write!(s, ",{:.11e}", e);
            }
            let _ = writeln!(s, ",{}", r.n_distinct_ops);
        }
        s
    }
}

#[derive(Debug, Clone)]
pub struct AdaptResult {
    pub ansatz: Ansatz,
    pub ritz: RitzSolution,
    pub dressed: DressedHamiltonian,
    pub trace: AdaptTrace,
    pub stop: StopReason,
    /// Some inner optimization ended without meeting its gradient tolerance.
    pub optimizer_warnings: usize,
}

impl AdaptResult {
    pub fn e_sa(&self, refs: &ReferenceSet) -> f64 {
        (0..refs.len()).map(|i| refs.weights()[i] * self.dressed.matrix[(i, i)]).sum()
    }
}

/// Runs screen, select, grow, minimize, dress and diagonalize until a stop criterion holds.
pub fn run_adapt(
    problem: &Problem,
    refs: &ReferenceSet,
    stop: &StopCriteria,
    optimizer: &OptimizerSettings,
) -> Result<AdaptResult> {
    if stop.is_empty() {
        return Err(Error::Invalid("at least one stop criterion is required".into()));
    }
    if refs.basis().dets() != problem.basis.dets() {
        return Err(Error::Invalid("references and problem use different bases".into()));
    }
    let mut ansatz = Ansatz::new();
    let mut trace = AdaptTrace::default();
    let mut warnings = 0;
    let mut e_prev = energy_and_gradient(&ansatz, refs, problem, false)?.0;
    let reason = loop {
        if stop.max_ops.is_some_and(|n| ansatz.len() >= n) {
            break StopReason::MaxOperators;
        }
        if let Some(t) = stop.target {
            if (e_prev - t.energy).abs() <= t.tol {
                break StopReason::TargetReached;
            }
        }
        let g = screen_pool(&ansatz, refs, problem)?;
        let grad_norm = g.iter().map(|x| x * x).sum::<f64>().sqrt();
        if stop.grad_norm.is_some_and(|t| grad_norm < t) {
            break StopReason::GradientNorm;
        }
        let id = match select_operator(&g) {
            Selection::Operator(id) => id,
            Selection::Converged => break StopReason::PoolExhausted,
        };
        ansatz.prepend(id);
        let vqe = minimize(&ansatz, refs, problem, optimizer)?;
        if !vqe.converged {
            warnings += 1;
        }
        ansatz = vqe.ansatz;
        let dressed = build_dressed_hamiltonian(&ansatz, refs.refs(), problem)?;
        let ritz = ritz_diagonalize(&dressed);
        trace.rows.push(TraceRow {
            iter: trace.len() + 1,
            pool_id: id,
            max_grad: g[id].abs(),
            grad_norm,
            e_sa: vqe.energy,
            energies: ritz.energies.clone(),
            vqe_iterations: vqe.iterations,
            n_ops: ansatz.len(),
            n_distinct_ops: ansatz.n_distinct(),
        });
        let change = (e_prev - vqe.energy).abs();
        e_prev = vqe.energy;
        if stop.energy_change.is_some_and(|t| change < t) {
            break StopReason::EnergyChange;
        }
    };
    let dressed = build_dressed_hamiltonian(&ansatz, refs.refs(), problem)?;
    let ritz = ritz_diagonalize(&dressed);
    Ok(AdaptResult { ansatz, ritz, dressed, trace, stop: reason, optimizer_warnings: warnings })
}
