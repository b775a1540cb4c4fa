//! Limited-memory BFGS with a backtracking line search.

use std::collections::VecDeque;

#[derive(Clone, Debug)]
pub struct LbfgsOptions {
    pub memory: usize,
    pub max_iter: usize,
    /// Stop once `‖∇f‖_∞ ≤ grad_tol`.
    pub grad_tol: f64,
    /// Armijo constant.
    pub c1: f64,
}

impl Default for LbfgsOptions {
    fn default() -> Self {
        Self { memory: 12, max_iter: 5000, grad_tol: 1e-10, c1: 1e-4 }
    }
}

#[derive(Clone, Debug)]
pub struct LbfgsOutcome {
    pub x: Vec<f64>,
    pub value: f64,
    pub grad: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn inf_norm(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, v| m.max(v.abs()))
}

/// Minimise `f` starting at `x0`. `f` returns the value and the gradient.
///
/// The sufficient-decrease test is relaxed by a few ulps of the objective so
/// that the iteration can keep driving the gradient down after the objective
/// itself has stopped resolving the improvement.
pub fn minimize<F>(f: F, x0: Vec<f64>, opts: &LbfgsOptions) -> LbfgsOutcome
where
    F: Fn(&[f64]) -> (f64, Vec<f64>),
{
    let n = x0.len();
    let mut x = x0;
    let (mut fx, mut gx) = f(&x);
    let mut hist: VecDeque<(Vec<f64>, Vec<f64>, f64)> = VecDeque::with_capacity(opts.memory);
    let mut failures = 0;

    for iter in 0..opts.max_iter {
        if inf_norm(&gx) <= opts.grad_tol {
            return LbfgsOutcome { x, value: fx, grad: gx, iterations: iter, converged: true };
        }

        // two-loop recursion
        let mut d: Vec<f64> = gx.iter().map(|v| -v).collect();
        let mut alphas = Vec::with_capacity(hist.len());
        for (s, y, rho) in hist.iter().rev() {
            let a = rho * dot(s, &d);
            for (di, yi) in d.iter_mut().zip(y) {
                *di -= a * yi;
            }
            alphas.push(a);
        }
        if let Some((s, y, _)) = hist.back() {
            let gamma = dot(s, y) / dot(y, y);
            for di in d.iter_mut() {
                *di *= gamma;
            }
        } else {
            let scale = 1.0 / inf_norm(&gx).max(1.0);
            for di in d.iter_mut() {
                *di *= scale;
            }
        }
        for ((s, y, rho), a) in hist.iter().zip(alphas.iter().rev()) {
            let b = rho * dot(y, &d);
            for (di, si) in d.iter_mut().zip(s) {
                *di += (a - b) * si;
            }
        }

        let mut slope = dot(&gx, &d);
        if slope >= 0.0 {
            hist.clear();
            d = gx.iter().map(|v| -v).collect();
            slope = dot(&gx, &d);
        }

        let slack = 8.0 * f64::EPSILON * fx.abs().max(1.0);
        let mut step = 1.0;
        let mut accepted = None;
        for _ in 0..40 {
            let trial: Vec<f64> = x.iter().zip(&d).map(|(xi, di)| xi + step * di).collect();
            let (ft, gt) = f(&trial);
            if ft.is_finite() && ft <= fx + opts.c1 * step * slope + slack {
                accepted = Some((trial, ft, gt));
                break;
            }
            step *= 0.5;
        }

        let Some((xn, fn_, gn)) = accepted else {
            failures += 1;
            hist.clear();
            if failures >= 3 {
                break;
            }
            continue;
        };

        let s: Vec<f64> = xn.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = gn.iter().zip(&gx).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > 1e-300 * dot(&s, &s).max(1e-300) && sy > 0.0 {
            if hist.len() == opts.memory {
                hist.pop_front();
            }
            hist.push_back((s, y, 1.0 / sy));
        }
        x = xn;
        fx = fn_;
        gx = gn;
        debug_assert_eq!(x.len(), n);
    }

    let converged = inf_norm(&gx) <= opts.grad_tol;
    LbfgsOutcome { x, value: fx, grad: gx, iterations: opts.max_iter, converged }
}
