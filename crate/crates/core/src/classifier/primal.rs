//! Linear SVM in the primal: deterministic full-batch subgradient descent on
//! the L2-regularized hinge loss.
//!
//! The bias is folded in as a constant feature and regularized with the
//! weights. Subgradient steps are not monotone, so the best iterate seen so
//! far is what gets returned; its objective is recorded once per epoch.

use super::kernel::dot;

#[derive(Clone, Debug, PartialEq)]
pub struct PrimalSolution {
    pub weights: Vec<f64>,
    pub bias: f64,
    /// Best objective after each epoch. Non-increasing.
    pub objective_trace: Vec<f64>,
}

/// `0.5 * |w|^2 + 0.5 * b^2 + c * sum(max(0, 1 - y (w.x + b)))`
pub fn objective(weights: &[f64], bias: f64, xs: &[&[f64]], ys: &[f64], c: f64) -> f64 {
    let reg = 0.5 * (dot(weights, weights) + bias * bias);
    let hinge: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| (1.0 - y * (dot(weights, x) + bias)).max(0.0))
        .sum();
    reg + c * hinge
}

pub fn train(xs: &[&[f64]], ys: &[f64], c: f64, epochs: usize) -> PrimalSolution {
    let n = xs.len();
    let dim = xs.first().map_or(0, |x| x.len());
    // minimize lambda/2 |v|^2 + mean hinge, which has the same minimizer
    let lambda = 1.0 / (c * n as f64);
    let radius = 1.0 / lambda.sqrt();

    let mut w = vec![0.0; dim];
    let mut b = 0.0;
    let mut best_w = w.clone();
    let mut best_b = b;
    let mut best = objective(&w, b, xs, ys, c);
    let mut trace = Vec::with_capacity(epochs);
    let mut grad_w = vec![0.0; dim];

    for epoch in 1..=epochs {
        grad_w.fill(0.0);
        let mut grad_b = 0.0;
        for (x, &y) in xs.iter().zip(ys) {
            if y * (dot(&w, x) + b) < 1.0 {
                for (g, xi) in grad_w.iter_mut().zip(x.iter()) {
                    *g -= y * xi;
                }
                grad_b -= y;
            }
        }
        let eta = 1.0 / (lambda * epoch as f64);
        let shrink = 1.0 - eta * lambda;
        let scale = eta / n as f64;
        for (wi, g) in w.iter_mut().zip(&grad_w) {
            *wi = shrink * *wi - scale * g;
        }
        b = shrink * b - scale * grad_b;

        let norm = (dot(&w, &w) + b * b).sqrt();
        if norm > radius {
            let f = radius / norm;
            w.iter_mut().for_each(|wi| *wi *= f);
            b *= f;
        }

        let obj = objective(&w, b, xs, ys, c);
        if obj < best {
            best = obj;
            best_w.clone_from(&w);
            best_b = b;
        }
        trace.push(best);
    }

    PrimalSolution {
        weights: best_w,
        bias: best_b,
        objective_trace: trace,
    }
}
