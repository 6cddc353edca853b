//! Dual soft-margin SVM by sequential minimal optimization.
//!
//! Working pairs are the maximal violating pair; the two-variable update and
//! its box clipping follow the usual LIBSVM formulation.

use super::kernel::Kernel;

pub const DEFAULT_TOLERANCE: f64 = 1e-3;
const TAU: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub struct DualSolution {
    pub alphas: Vec<f64>,
    /// Decision function is `sum(alpha_i y_i K(x_i, x)) + bias`.
    pub bias: f64,
    pub iterations: usize,
    pub converged: bool,
}

pub fn train(
    xs: &[&[f64]],
    ys: &[f64],
    kernel: &Kernel,
    c: f64,
    tolerance: f64,
    max_iter: usize,
) -> DualSolution {
    let n = xs.len();
    // Q_ij = y_i y_j K(x_i, x_j)
    let mut q = vec![0.0; n * n];
    for i in 0..n {
        for j in i..n {
            let v = ys[i] * ys[j] * kernel.eval(xs[i], xs[j]);
            q[i * n + j] = v;
            q[j * n + i] = v;
        }
    }

    let mut alpha = vec![0.0; n];
    let mut grad = vec![-1.0; n];
    let in_up = |a: f64, y: f64| (y > 0.0 && a < c) || (y < 0.0 && a > 0.0);
    let in_low = |a: f64, y: f64| (y > 0.0 && a > 0.0) || (y < 0.0 && a < c);

    let mut iterations = 0;
    let mut converged = false;
    while iterations < max_iter {
        let mut i = usize::MAX;
        let mut g_max = f64::NEG_INFINITY;
        let mut j = usize::MAX;
        let mut g_min = f64::INFINITY;
        for t in 0..n {
            let v = -ys[t] * grad[t];
            if in_up(alpha[t], ys[t]) && v > g_max {
                g_max = v;
                i = t;
            }
            if in_low(alpha[t], ys[t]) && v < g_min {
                g_min = v;
                j = t;
            }
        }
        if i == usize::MAX || j == usize::MAX || g_max - g_min < tolerance {
            converged = true;
            break;
        }
        iterations += 1;

        let (old_i, old_j) = (alpha[i], alpha[j]);
        let (qii, qjj, qij) = (q[i * n + i], q[j * n + j], q[i * n + j]);
        if ys[i] != ys[j] {
            let quad = (qii + qjj + 2.0 * qij).max(TAU);
            let delta = (-grad[i] - grad[j]) / quad;
            let diff = alpha[i] - alpha[j];
            alpha[i] += delta;
            alpha[j] += delta;
            if diff > 0.0 {
                if alpha[j] < 0.0 {
                    alpha[j] = 0.0;
                    alpha[i] = diff;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = -diff;
            }
            if diff > 0.0 {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = c - diff;
                }
            } else if alpha[j] > c {
                alpha[j] = c;
                alpha[i] = c + diff;
            }
        } else {
            let quad = (qii + qjj - 2.0 * qij).max(TAU);
            let delta = (grad[i] - grad[j]) / quad;
            let sum = alpha[i] + alpha[j];
            alpha[i] -= delta;
            alpha[j] += delta;
            if sum > c {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = sum - c;
                }
            } else if alpha[j] < 0.0 {
                alpha[j] = 0.0;
                alpha[i] = sum;
            }
            if sum > c {
                if alpha[j] > c {
                    alpha[j] = c;
                    alpha[i] = sum - c;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = sum;
            }
        }

        let (di, dj) = (alpha[i] - old_i, alpha[j] - old_j);
        for t in 0..n {
            grad[t] += q[t * n + i] * di + q[t * n + j] * dj;
        }
    }

    DualSolution {
        bias: -rho(&alpha, &grad, ys, c),
        alphas: alpha,
        iterations,
        converged,
    }
}

fn rho(alpha: &[f64], grad: &[f64], ys: &[f64], c: f64) -> f64 {
    let mut upper = f64::INFINITY;
    let mut lower = f64::NEG_INFINITY;
    let mut free_sum = 0.0;
    let mut free = 0usize;
    for ((&a, &g), &y) in alpha.iter().zip(grad).zip(ys) {
        let yg = y * g;
        if a >= c {
            if y < 0.0 {
                upper = upper.min(yg);
            } else {
                lower = lower.max(yg);
            }
        } else if a <= 0.0 {
            if y > 0.0 {
                upper = upper.min(yg);
            } else {
                lower = lower.max(yg);
            }
        } else {
            free += 1;
            free_sum += yg;
        }
    }
    if free > 0 {
        free_sum / free as f64
    } else {
        (upper + lower) / 2.0
    }
}
