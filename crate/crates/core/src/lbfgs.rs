//! Limited-memory BFGS with Armijo backtracking, for smooth convex
//! objectives. The caller supplies a closure filling the gradient and
//! returning the value.

use std::collections::VecDeque;

pub(crate) struct LbfgsOptions {
    pub max_iter: usize,
    /// Stop when the sup-norm of the gradient falls below this.
    pub grad_tol: f64,
    pub memory: usize,
}

impl Default for LbfgsOptions {
    fn default() -> Self {
        LbfgsOptions {
            max_iter: 500,
            grad_tol: 1e-8,
            memory: 10,
        }
    }
}

pub(crate) struct LbfgsResult {
    pub x: Vec<f64>,
    pub value: f64,
    pub grad_norm: f64,
    pub iterations: usize,
    pub converged: bool,
}

fn sup_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |acc, x| acc.max(x.abs()))
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn minimize<F>(x0: Vec<f64>, opts: &LbfgsOptions, mut eval: F) -> LbfgsResult
where
    F: FnMut(&[f64], &mut [f64]) -> f64,
{
    let dim = x0.len();
    let mut x = x0;
    let mut grad = vec![0.0; dim];
    let mut value = eval(&x, &mut grad);
    let mut pairs: VecDeque<(Vec<f64>, Vec<f64>, f64)> = VecDeque::new();
    let mut iterations = 0;

    for _ in 0..opts.max_iter {
        let gnorm = sup_norm(&grad);
        if gnorm <= opts.grad_tol {
            return LbfgsResult {
                x,
                value,
                grad_norm: gnorm,
                iterations,
                converged: true,
            };
        }
        iterations += 1;

        // two-loop recursion: direction = H * grad
        let mut dir = grad.clone();
        let mut alphas = Vec::with_capacity(pairs.len());
        for (s, y, rho) in pairs.iter().rev() {
            let alpha = rho * dot(s, &dir);
            for (d, yk) in dir.iter_mut().zip(y) {
                *d -= alpha * yk;
            }
            alphas.push(alpha);
        }
        if let Some((s, y, _)) = pairs.back() {
            let gamma = dot(s, y) / dot(y, y).max(1e-300);
            for d in dir.iter_mut() {
                *d *= gamma;
            }
        }
        for ((s, y, rho), alpha) in pairs.iter().zip(alphas.into_iter().rev()) {
            let beta = rho * dot(y, &dir);
            for (d, sk) in dir.iter_mut().zip(s) {
                *d += (alpha - beta) * sk;
            }
        }

        let mut descent = dot(&grad, &dir);
        if !(descent > 0.0) || !descent.is_finite() {
            // fall back to steepest descent, scaled to unit sup-norm step
            dir.copy_from_slice(&grad);
            let scale = 1.0 / gnorm.max(1e-300);
            for d in dir.iter_mut() {
                *d *= scale;
            }
            descent = dot(&grad, &dir);
            pairs.clear();
        }

        // Armijo backtracking on x - t * dir
        let mut t = 1.0;
        let c1 = 1e-4;
        let mut new_x = vec![0.0; dim];
        let mut new_grad = vec![0.0; dim];
        let mut accepted = false;
        for _ in 0..60 {
            for i in 0..dim {
                new_x[i] = x[i] - t * dir[i];
            }
            let new_value = eval(&new_x, &mut new_grad);
            if new_value <= value - c1 * t * descent || new_value < value - 1e-15 * value.abs() {
                let s: Vec<f64> = new_x.iter().zip(&x).map(|(a, b)| a - b).collect();
                let y: Vec<f64> = new_grad.iter().zip(&grad).map(|(a, b)| a - b).collect();
                let sy = dot(&s, &y);
                let yy = dot(&y, &y);
                if sy > 1e-12 * yy.sqrt() * dot(&s, &s).sqrt() {
                    if pairs.len() == opts.memory {
                        pairs.pop_front();
                    }
                    pairs.push_back((s, y, 1.0 / sy));
                }
                x.copy_from_slice(&new_x);
                grad.copy_from_slice(&new_grad);
                value = new_value;
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if !accepted {
            // line search exhausted: gradient is as converged as the
            // objective's smoothness allows
            break;
        }
    }

    let grad_norm = sup_norm(&grad);
    LbfgsResult {
        converged: grad_norm <= opts.grad_tol,
        x,
        value,
        grad_norm,
        iterations,
    }
}
