//! State-averaged energy functional, its analytic gradient and BFGS minimization.

use std::sync::Arc;

use rayon::prelude::*;

use crate::bfgs::{self, BfgsOptions, BfgsStatus};
use crate::error::{Error, Result};
use crate::fock::{dot, Basis, FermionOperator, Generator, SparseOperator, StateVector};
use crate::pool::{compile_pool, PoolOperator};

/// Product of exponentials `U = exp(t_0 A_0) exp(t_1 A_1) ... exp(t_{N-1} A_{N-1})`.
///
/// Entry 0 is the most recently added operator and acts last on a state.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Ansatz {
    pub ops: Vec<(usize, f64)>,
}

impl Ansatz {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    pub fn thetas(&self) -> Vec<f64> {
        self.ops.iter().map(|&(_, t)| t).collect()
    }

    pub fn ids(&self) -> Vec<usize> {
        self.ops.iter().map(|&(id, _)| id).collect()
    }

    pub fn with_thetas(&self, thetas: &[f64]) -> Self {
        assert_eq!(thetas.len(), self.ops.len());
        Self { ops: self.ops.iter().zip(thetas).map(|(&(id, _), &t)| (id, t)).collect() }
    }

    /// Adds `exp(0 * A_id)` as the new leftmost factor.
    pub fn prepend(&mut self, id: usize) {
        self.ops.insert(0, (id, 0.0));
    }

    /// Number of different pool operators used.
    pub fn n_distinct(&self) -> usize {
        let mut ids = self.ids();
        ids.sort_unstable();
        ids.dedup();
        ids.len()
    }
}

/// Orthonormal reference states with positive weights summing to one.
#[derive(Debug, Clone)]
pub struct ReferenceSet {
    refs: Vec<StateVector>,
    weights: Vec<f64>,
}

impl ReferenceSet {
    pub fn new(refs: Vec<StateVector>, weights: Vec<f64>) -> Result<Self> {
        if refs.is_empty() {
            return Err(Error::Invalid("at least one reference state is required".into()));
        }
        if refs.len() != weights.len() {
            return Err(Error::Dimension(format!("{} references but {} weights", refs.len(), weights.len())));
        }
        if weights.iter().any(|&w| w.is_nan() || w <= 0.0) || (weights.iter().sum::<f64>() - 1.0).abs() > 1e-12 {
            return Err(Error::Invalid("weights must be positive and sum to 1".into()));
        }
        check_orthonormal(&refs, 1e-12)?;
        Ok(Self { refs, weights })
    }

    /// Equal weights `1/k`.
    pub fn equal(refs: Vec<StateVector>) -> Result<Self> {
        let k = refs.len();
        Self::new(refs, vec![1.0 / k as f64; k])
    }

    pub fn refs(&self) -> &[StateVector] {
        &self.refs
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.refs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.refs.is_empty()
    }

    pub fn basis(&self) -> &Arc<Basis> {
        &self.refs[0].basis
    }
}

/// Errors unless `states` share a basis and are orthonormal to `tol`.
pub fn check_orthonormal(states: &[StateVector], tol: f64) -> Result<()> {
    for (i, u) in states.iter().enumerate() {
        if u.basis != states[0].basis {
            return Err(Error::Invalid("states live on different bases".into()));
        }
        for (j, v) in states.iter().enumerate().take(i + 1) {
            let expected = if i == j { 1.0 } else { 0.0 };
            let overlap = u.dot(v);
            if (overlap - expected).abs() > tol {
                return Err(Error::Invalid(format!("states {} and {} have overlap {:.3e}", i, j, overlap)));
            }
        }
    }
    Ok(())
}

/// The Hamiltonian and pool generators compiled on one working basis.
#[derive(Debug, Clone)]
pub struct Problem {
    pub basis: Arc<Basis>,
    pub h: SparseOperator,
    pub generators: Vec<Generator>,
}

impl Problem {
    pub fn new(h: &FermionOperator, pool: &[PoolOperator], basis: Arc<Basis>) -> Result<Self> {
        let h = SparseOperator::compile(h, &basis)?;
        let generators = compile_pool(pool, &basis)?;
        Ok(Self { basis, h, generators })
    }

    pub fn pool_size(&self) -> usize {
        self.generators.len()
    }

    fn generator(&self, id: usize) -> Result<&Generator> {
        self.generators
            .get(id)
            .ok_or_else(|| Error::Invalid(format!("pool id {} out of range ({} operators)", id, self.generators.len())))
    }

    fn evolve_in_place(&self, ansatz: &Ansatz, x: &mut [f64]) -> Result<()> {
        for &(id, theta) in ansatz.ops.iter().rev() {
            self.generator(id)?.exp_in_place(theta, x)?;
        }
        Ok(())
    }

    fn hv(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; x.len()];
        self.h.matvec(x, &mut y);
        y
    }
}

/// `U(theta) v`, oldest operator first.
pub fn evolve(ansatz: &Ansatz, problem: &Problem, v: &StateVector) -> Result<StateVector> {
    let mut w = v.clone();
    problem.evolve_in_place(ansatz, &mut w.coeffs)?;
    Ok(w)
}

/// `sum_i w_i <phi_i| U† H U |phi_i>`.
pub fn sa_energy(ansatz: &Ansatz, refs: &ReferenceSet, problem: &Problem) -> Result<f64> {
    Ok(energy_and_gradient(ansatz, refs, problem, false)?.0)
}

/// Analytic gradient of [`sa_energy`] with respect to every ansatz angle.
pub fn sa_gradient(ansatz: &Ansatz, refs: &ReferenceSet, problem: &Problem) -> Result<Vec<f64>> {
    Ok(energy_and_gradient(ansatz, refs, problem, true)?.1)
}

/// Energy and gradient in one pass.
///
/// Per reference, `psi = U phi` and `sigma = H psi` are peeled one factor at
/// a time from the left: at position `m` both have had the inverses of
/// factors `0..m` applied, so `dE/dt_m = 2 w <sigma| A_m psi>`.
pub fn energy_and_gradient(
    ansatz: &Ansatz,
    refs: &ReferenceSet,
    problem: &Problem,
    with_gradient: bool,
) -> Result<(f64, Vec<f64>)> {
    let per_ref: Vec<Result<(f64, Vec<f64>)>> = refs
        .refs()
        .par_iter()
        .zip(refs.weights().par_iter())
        .map(|(phi, &w)| {
            let mut psi = phi.coeffs.clone();
            problem.evolve_in_place(ansatz, &mut psi)?;
            let mut sigma = problem.hv(&psi);
            let e = w * dot(&psi, &sigma);
            let mut grad = Vec::new();
            if with_gradient {
                grad.reserve(ansatz.len());
                for &(id, theta) in &ansatz.ops {
                    let g = problem.generator(id)?.bilinear_then_unrotate(theta, &mut sigma, &mut psi)?;
                    grad.push(2.0 * w * g);
                }
            }
            Ok((e, grad))
        })
        .collect();
    let mut energy = 0.0;
    let mut gradient = vec![0.0; if with_gradient { ansatz.len() } else { 0 }];
    for r in per_ref {
        let (e, g) = r?;
        energy += e;
        gradient.iter_mut().zip(&g).for_each(|(a, b)| *a += b);
    }
    Ok((energy, gradient))
}

#[derive(Debug, Clone)]
pub struct VqeResult {
    pub ansatz: Ansatz,
    pub energy: f64,
    pub iterations: usize,
    pub gradient_inf_norm: f64,
    pub converged: bool,
    /// The line search gave up before reaching the gradient tolerance.
    pub line_search_failed: bool,
}

/// BFGS settings for the inner VQE loop.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimizerSettings {
    pub gtol: f64,
    /// Iteration cap; `None` uses `200 * (n_params + 1)`.
    pub max_iter: Option<usize>,
}

impl Default for OptimizerSettings {
    fn default() -> Self {
        Self { gtol: 1e-8, max_iter: None }
    }
}

/// Minimizes the state-averaged energy over the ansatz angles, starting from
/// the angles already stored in `ansatz`.
pub fn minimize(ansatz: &Ansatz, refs: &ReferenceSet, problem: &Problem, settings: &OptimizerSettings) -> Result<VqeResult> {
    let n = ansatz.len();
    let opts = BfgsOptions {
        gtol: settings.gtol,
        max_iter: settings.max_iter.unwrap_or(200 * (n + 1)),
        ..BfgsOptions::default()
    };
    let mut failure: Option<Error> = None;
    let result = bfgs::minimize(
        |x| match energy_and_gradient(&ansatz.with_thetas(x), refs, problem, true) {
            Ok(v) => v,
            Err(e) => {
                failure.get_or_insert(e);
                (f64::NAN, vec![f64::NAN; n])
            }
        },
        &ansatz.thetas(),
        &opts,
    );
    if let Some(e) = failure {
        return Err(e);
    }
    if !result.f.is_finite() {
        return Err(Error::Numerical("non-finite energy during optimization".into()));
    }
    let gradient_inf_norm = result.grad.iter().fold(0.0f64, |m, g| m.max(g.abs()));
    Ok(VqeResult {
        ansatz: ansatz.with_thetas(&result.x),
        energy: result.f,
        iterations: result.iterations,
        gradient_inf_norm,
        converged: result.status == BfgsStatus::Converged,
        line_search_failed: result.status == BfgsStatus::LineSearchFailed,
    })
}
