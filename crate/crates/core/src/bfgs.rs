//! Dense BFGS with a strong-Wolfe line search.
//!
//! The line search is the bracketing/zoom scheme of Nocedal and Wright with
//! safeguarded cubic interpolation. Near a minimum the Armijo test compares
//! values that differ only in their last bits, so a step is also accepted
//! when the value rises by no more than rounding and the directional
//! derivative has dropped enough (the approximate Wolfe test of Hager and
//! Zhang). The inverse Hessian starts as the identity and is rescaled by
//! `s.y / y.y` after the first accepted step.

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BfgsOptions {
    /// Stop when the largest gradient component falls to this value.
    pub gtol: f64,
    pub max_iter: usize,
    pub c1: f64,
    pub c2: f64,
}

impl Default for BfgsOptions {
    fn default() -> Self {
        Self { gtol: 1e-8, max_iter: 1000, c1: 1e-4, c2: 0.9 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BfgsStatus {
    Converged,
    MaxIterations,
    /// No step satisfying the Wolfe conditions was found; the best point so far is returned.
    LineSearchFailed,
}

#[derive(Debug, Clone)]
pub struct BfgsResult {
    pub x: Vec<f64>,
    pub f: f64,
    pub grad: Vec<f64>,
    pub iterations: usize,
    pub evaluations: usize,
    pub status: BfgsStatus,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn inf_norm(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, v| m.max(v.abs()))
}

/// Minimizes `f`, which returns the value and gradient at a point.
pub fn minimize<F>(mut f: F, x0: &[f64], opts: &BfgsOptions) -> BfgsResult
where
    F: FnMut(&[f64]) -> (f64, Vec<f64>),
{
    let n = x0.len();
    let mut x = x0.to_vec();
    let (mut fx, mut g) = f(&x);
    let mut evaluations = 1;
    let mut hinv = identity(n);
    let mut scaled = false;
    let mut iterations = 0;
    let mut status = BfgsStatus::MaxIterations;
    while iterations < opts.max_iter {
        if inf_norm(&g) <= opts.gtol {
            status = BfgsStatus::Converged;
            break;
        }
        let mut d = matvec_neg(&hinv, &g);
        let mut dg = dot(&d, &g);
        if dg >= 0.0 {
            // not a descent direction: restart from steepest descent
            hinv = identity(n);
            scaled = false;
            d = g.iter().map(|v| -v).collect();
            dg = -dot(&g, &g);
        }
        let search = line_search(&mut f, &x, fx, &g, &d, dg, opts);
        evaluations += search.evaluations;
        let Some((alpha, f_new, g_new)) = search.accepted else {
            if !scaled && hinv != identity(n) {
                hinv = identity(n);
                continue;
            }
            status = BfgsStatus::LineSearchFailed;
            break;
        };
        iterations += 1;
        let s: Vec<f64> = d.iter().map(|v| alpha * v).collect();
        let y: Vec<f64> = g_new.iter().zip(&g).map(|(a, b)| a - b).collect();
        x.iter_mut().zip(&s).for_each(|(xi, si)| *xi += si);
        let f_old = fx;
        fx = f_new;
        g = g_new;
        let sy = dot(&s, &y);
        if sy > 1e-300 {
            if !scaled {
                let gamma = sy / dot(&y, &y);
                hinv.iter_mut().for_each(|v| *v *= gamma);
                scaled = true;
            }
            bfgs_update(&mut hinv, &s, &y, sy);
        }
        if f_old - fx <= 0.0 && inf_norm(&s) == 0.0 {
            status = BfgsStatus::LineSearchFailed;
            break;
        }
    }
    if status == BfgsStatus::MaxIterations && inf_norm(&g) <= opts.gtol {
        status = BfgsStatus::Converged;
    }
    BfgsResult { x, f: fx, grad: g, iterations, evaluations, status }
}

fn identity(n: usize) -> Vec<f64> {
    let mut m = vec![0.0; n * n];
    for i in 0..n {
        m[i * n + i] = 1.0;
    }
    m
}

fn matvec_neg(m: &[f64], v: &[f64]) -> Vec<f64> {
    let n = v.len();
    (0..n).map(|i| -dot(&m[i * n..(i + 1) * n], v)).collect()
}

/// `H <- (I - rho s y^T) H (I - rho y s^T) + rho s s^T`.
fn bfgs_update(h: &mut [f64], s: &[f64], y: &[f64], sy: f64) {
    let n = s.len();
    let rho = 1.0 / sy;
    let hy: Vec<f64> = (0..n).map(|i| dot(&h[i * n..(i + 1) * n], y)).collect();
    let yhy = dot(y, &hy);
    let coef = rho * rho * yhy + rho;
    for i in 0..n {
        for j in 0..n {
            h[i * n + j] += coef * s[i] * s[j] - rho * (hy[i] * s[j] + s[i] * hy[j]);
        }
    }
}

struct Search {
    accepted: Option<(f64, f64, Vec<f64>)>,
    evaluations: usize,
}

fn line_search<F>(f: &mut F, x: &[f64], f0: f64, _g0: &[f64], d: &[f64], dg0: f64, opts: &BfgsOptions) -> Search
where
    F: FnMut(&[f64]) -> (f64, Vec<f64>),
{
    let mut evaluations = 0;
    let mut eval = |alpha: f64, evaluations: &mut usize| -> (f64, Vec<f64>, f64) {
        let xt: Vec<f64> = x.iter().zip(d).map(|(xi, di)| xi + alpha * di).collect();
        let (ft, gt) = f(&xt);
        *evaluations += 1;
        let dgt = dot(&gt, d);
        (ft, gt, dgt)
    };

    let eps_f = 1e-14 * f0.abs().max(1e-300);
    let decrease = |alpha: f64, fa: f64, dga: f64| {
        fa <= f0 + opts.c1 * alpha * dg0 || (fa <= f0 + eps_f && dga <= (2.0 * opts.c1 - 1.0) * dg0)
    };
    let alpha_max = 1e3;
    let mut a_prev = 0.0;
    let (mut f_prev, mut dg_prev) = (f0, dg0);
    let mut alpha = 1.0;
    for i in 0..30 {
        let (fa, ga, dga) = eval(alpha, &mut evaluations);
        if !fa.is_finite() {
            alpha = 0.5 * (a_prev + alpha);
            continue;
        }
        if !decrease(alpha, fa, dga) || (i > 0 && fa >= f_prev) {
            let accepted = zoom(&mut eval, &mut evaluations, &decrease, f0, dg0, (a_prev, f_prev, dg_prev), (alpha, fa, dga), opts);
            return Search { accepted, evaluations };
        }
        if dga.abs() <= -opts.c2 * dg0 {
            return Search { accepted: Some((alpha, fa, ga)), evaluations };
        }
        if dga >= 0.0 {
            let accepted = zoom(&mut eval, &mut evaluations, &decrease, f0, dg0, (alpha, fa, dga), (a_prev, f_prev, dg_prev), opts);
            return Search { accepted, evaluations };
        }
        a_prev = alpha;
        f_prev = fa;
        dg_prev = dga;
        alpha = (2.0 * alpha).min(alpha_max);
    }
    Search { accepted: None, evaluations }
}

/// Minimizer of the cubic through `(a, fa, da)` and `(b, fb, db)`, if it lies between them.
fn cubic_min(a: f64, fa: f64, da: f64, b: f64, fb: f64, db: f64) -> Option<f64> {
    let d1 = da + db - 3.0 * (fa - fb) / (a - b);
    let disc = d1 * d1 - da * db;
    if disc < 0.0 {
        return None;
    }
    let d2 = (b - a).signum() * disc.sqrt();
    let t = b - (b - a) * (db + d2 - d1) / (db - da + 2.0 * d2);
    t.is_finite().then_some(t)
}

type Point = (f64, f64, f64);

#[allow(clippy::too_many_arguments)]
fn zoom<E, D>(
    eval: &mut E,
    evaluations: &mut usize,
    decrease: &D,
    f0: f64,
    dg0: f64,
    mut lo: Point,
    mut hi: Point,
    opts: &BfgsOptions,
) -> Option<(f64, f64, Vec<f64>)>
where
    E: FnMut(f64, &mut usize) -> (f64, Vec<f64>, f64),
    D: Fn(f64, f64, f64) -> bool,
{
    for _ in 0..40 {
        let (a_lo, a_hi) = (lo.0, hi.0);
        let width = (a_hi - a_lo).abs();
        if width < 1e-16 * a_lo.abs().max(1.0) {
            break;
        }
        let (left, right) = if a_lo < a_hi { (a_lo, a_hi) } else { (a_hi, a_lo) };
        let guard = 0.1 * width;
        let mut alpha = cubic_min(lo.0, lo.1, lo.2, hi.0, hi.1, hi.2).unwrap_or(0.5 * (a_lo + a_hi));
        if alpha < left + guard || alpha > right - guard {
            alpha = 0.5 * (a_lo + a_hi);
        }
        let (fa, ga, dga) = eval(alpha, evaluations);
        if !decrease(alpha, fa, dga) || fa > lo.1 + 1e-14 * lo.1.abs() {
            hi = (alpha, fa, dga);
        } else {
            if dga.abs() <= -opts.c2 * dg0 {
                return Some((alpha, fa, ga));
            }
            if dga * (a_hi - a_lo) >= 0.0 {
                hi = lo;
            }
            lo = (alpha, fa, dga);
        }
    }
    // accept the best sufficient-decrease point if the curvature test could not be met
    if lo.0 > 0.0 && lo.1 < f0 {
        let (fa, ga, _) = eval(lo.0, evaluations);
        return Some((lo.0, fa, ga));
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rosenbrock() {
        let f = |x: &[f64]| {
            let (a, b) = (x[0], x[1]);
            let v = (1.0 - a).powi(2) + 100.0 * (b - a * a).powi(2);
            let g = vec![-2.0 * (1.0 - a) - 400.0 * a * (b - a * a), 200.0 * (b - a * a)];
            (v, g)
        };
        let r = minimize(f, &[-1.2, 1.0], &BfgsOptions::default());
        assert_eq!(r.status, BfgsStatus::Converged);
        assert!((r.x[0] - 1.0).abs() < 1e-7 && (r.x[1] - 1.0).abs() < 1e-7, "{:?}", r.x);
    }

    #[test]
    fn stationary_start_takes_no_steps() {
        let f = |x: &[f64]| (x[0] * x[0], vec![2.0 * x[0]]);
        let r = minimize(f, &[0.0], &BfgsOptions::default());
        assert_eq!((r.iterations, r.status), (0, BfgsStatus::Converged));
    }

    #[test]
    fn quadratic_is_monotone() {
        let f = |x: &[f64]| {
            let v = 3.0 * x[0] * x[0] + x[1] * x[1] + x[0] * x[1] - x[0];
            (v, vec![6.0 * x[0] + x[1] - 1.0, 2.0 * x[1] + x[0]])
        };
        let x0 = [4.0, -3.0];
        let f0 = f(&x0).0;
        let r = minimize(f, &x0, &BfgsOptions::default());
        assert!(r.f <= f0);
        assert!(r.grad.iter().all(|g| g.abs() <= 1e-8));
    }
}
