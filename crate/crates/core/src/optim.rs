//! Derivative-free local search (Nelder–Mead with adaptive coefficients)
//! and the shared optimizer configuration.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::scalar::Real;

/// Settings shared by the discord and entanglement searches.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OptimizerConfig {
    /// Random starts, in addition to the deterministic ones.
    pub starts: usize,
    pub seed: u64,
    /// Convergence tolerance on the spread of simplex values.
    pub tol: f64,
    /// Convergence tolerance on the simplex extent; `f64::INFINITY`
    /// converges on values alone.
    pub xtol: f64,
    /// Iteration budget per start.
    pub max_iter: usize,
    pub initial_step: f64,
    pub cluster_value_tol: f64,
    pub cluster_state_tol: f64,
    pub clip_eps: f64,
    /// Outer iterations of the separable-state search.
    pub ree_iters: usize,
    /// Maximum number of product terms in the separable ansatz;
    /// `None` means (total dimension)².
    pub ree_terms: Option<usize>,
    /// Stop once the linearized optimality gap (nats) falls below this.
    pub ree_gap_tol: f64,
    /// Residual slack applied to terms that carry an optimizer bound.
    pub slack: f64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            starts: 20,
            seed: 0,
            tol: 1e-10,
            xtol: 1e-8,
            max_iter: 2000,
            initial_step: 0.3,
            cluster_value_tol: 1e-6,
            cluster_state_tol: 1e-3,
            clip_eps: 1e-12,
            ree_iters: 200,
            ree_terms: None,
            ree_gap_tol: 1e-7,
            slack: 1e-4,
        }
    }
}

#[derive(Clone, Debug)]
pub struct LocalMinimum<T> {
    pub x: Vec<T>,
    pub value: T,
    pub iterations: usize,
    pub evaluations: usize,
    pub converged: bool,
}

#[derive(Clone, Copy, Debug)]
pub struct NelderMead<T> {
    pub max_iter: usize,
    pub ftol: T,
    pub xtol: T,
    pub step: T,
    /// Fresh-simplex restarts from the incumbent after convergence.
    pub restarts: usize,
}

impl<T: Real> NelderMead<T> {
    pub fn from_config(cfg: &OptimizerConfig) -> Self {
        Self {
            max_iter: cfg.max_iter,
            ftol: T::of(cfg.tol),
            xtol: T::of(cfg.xtol),
            step: T::of(cfg.initial_step),
            restarts: 2,
        }
    }

    pub fn minimize(&self, f: impl Fn(&[T]) -> T, x0: &[T]) -> LocalMinimum<T> {
        let mut best = self.run(&f, x0, self.step, self.max_iter);
        let mut budget = self.max_iter.saturating_sub(best.iterations);
        let mut step = self.step * T::of(0.1);
        for _ in 0..self.restarts {
            if budget == 0 {
                break;
            }
            let again = self.run(&f, &best.x, step, budget);
            budget = budget.saturating_sub(again.iterations);
            let improved = best.value - again.value;
            let evaluations = best.evaluations + again.evaluations;
            let iterations = best.iterations + again.iterations;
            let stalled = improved <= self.ftol;
            if again.value <= best.value {
                best = LocalMinimum {
                    evaluations,
                    iterations,
                    ..again
                };
            } else {
                best.evaluations = evaluations;
                best.iterations = iterations;
            }
            if stalled {
                break;
            }
            step = step * T::of(0.1);
        }
        best
    }

    fn run(&self, f: &impl Fn(&[T]) -> T, x0: &[T], step: T, max_iter: usize) -> LocalMinimum<T> {
        let n = x0.len();
        if n == 0 {
            return LocalMinimum {
                x: vec![],
                value: f(x0),
                iterations: 0,
                evaluations: 1,
                converged: true,
            };
        }
        let nf = T::of(n as f64);
        let (alpha, beta) = (T::one(), T::one() + T::of(2.0) / nf);
        let gamma = T::of(0.75) - T::one() / (nf + nf);
        let delta = T::one() - T::one() / nf;

        let mut simplex: Vec<Vec<T>> = Vec::with_capacity(n + 1);
        simplex.push(x0.to_vec());
        for i in 0..n {
            let mut v = x0.to_vec();
            v[i] = v[i] + step;
            simplex.push(v);
        }
        let mut values: Vec<T> = simplex.iter().map(|v| f(v)).collect();
        let mut evals = n + 1;
        let mut iters = 0;
        let mut converged = false;

        let mut order: Vec<usize> = (0..=n).collect();
        loop {
            order.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).unwrap_or(std::cmp::Ordering::Equal));
            let (ib, iw, isw) = (order[0], order[n], order[n - 1]);
            let spread = values[iw] - values[ib];
            let extent = simplex
                .iter()
                .flat_map(|v| v.iter().zip(&simplex[ib]).map(|(a, b)| (*a - *b).abs()))
                .fold(T::zero(), T::max);
            if spread <= self.ftol && extent <= self.xtol {
                converged = true;
                break;
            }
            if iters >= max_iter {
                break;
            }
            iters += 1;

            let mut centroid = vec![T::zero(); n];
            for &k in &order[..n] {
                for (c, x) in centroid.iter_mut().zip(&simplex[k]) {
                    *c = *c + *x / nf;
                }
            }
            let along = |t: T| -> Vec<T> {
                centroid
                    .iter()
                    .zip(&simplex[iw])
                    .map(|(c, w)| *c + t * (*c - *w))
                    .collect()
            };
            let xr = along(alpha);
            let fr = f(&xr);
            evals += 1;
            if fr < values[ib] {
                let xe = along(alpha * beta);
                let fe = f(&xe);
                evals += 1;
                if fe < fr {
                    simplex[iw] = xe;
                    values[iw] = fe;
                } else {
                    simplex[iw] = xr;
                    values[iw] = fr;
                }
                continue;
            }
            if fr < values[isw] {
                simplex[iw] = xr;
                values[iw] = fr;
                continue;
            }
            let (xc, fc) = if fr < values[iw] {
                let xc = along(alpha * gamma);
                let fc = f(&xc);
                (xc, fc)
            } else {
                let xc = along(-gamma);
                let fc = f(&xc);
                (xc, fc)
            };
            evals += 1;
            if fc < values[iw].min(fr) {
                simplex[iw] = xc;
                values[iw] = fc;
                continue;
            }
            // shrink towards the best vertex
            let best = simplex[ib].clone();
            for k in 0..=n {
                if k == ib {
                    continue;
                }
                for (x, b) in simplex[k].iter_mut().zip(&best) {
                    *x = *b + delta * (*x - *b);
                }
                values[k] = f(&simplex[k]);
                evals += 1;
            }
        }
        let ib = (0..=n)
            .min_by(|&a, &b| values[a].partial_cmp(&values[b]).unwrap_or(std::cmp::Ordering::Equal))
            .unwrap();
        LocalMinimum {
            x: simplex[ib].clone(),
            value: values[ib],
            iterations: iters,
            evaluations: evals,
            converged,
        }
    }
}

/// Runs one local search per start; results come back in start order
/// regardless of how the work was scheduled.
pub fn multi_start<T: Real>(
    nm: &NelderMead<T>,
    starts: &[Vec<T>],
    f: impl Fn(&[T]) -> T + Sync,
) -> Vec<LocalMinimum<T>> {
    starts.par_iter().map(|x0| nm.minimize(&f, x0)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn nm() -> NelderMead<f64> {
        NelderMead::from_config(&OptimizerConfig::default())
    }

    #[test]
    fn quadratic_bowl() {
        let r = nm().minimize(|x| (x[0] - 1.0).powi(2) + 3.0 * (x[1] + 2.0).powi(2), &[0.0, 0.0]);
        assert!(r.converged);
        assert!((r.x[0] - 1.0).abs() < 1e-6 && (r.x[1] + 2.0).abs() < 1e-6);
        assert!(r.value < 1e-11);
    }

    #[test]
    fn rosenbrock() {
        let f = |x: &[f64]| (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2);
        let r = NelderMead { max_iter: 5000, ..nm() }.minimize(f, &[-1.2, 1.0]);
        assert!((r.x[0] - 1.0).abs() < 1e-5, "{:?}", r);
    }

    #[test]
    fn multi_start_keeps_start_order() {
        let f = |x: &[f64]| (x[0] * x[0] - 1.0).powi(2);
        let res = multi_start(&nm(), &[vec![-2.0], vec![2.0]], f);
        assert!(res[0].x[0] < 0.0 && res[1].x[0] > 0.0);
    }

    #[test]
    fn higher_dimensional_sphere() {
        let f = |x: &[f64]| x.iter().enumerate().map(|(i, v)| (v - i as f64 * 0.1).powi(2)).sum();
        let r = nm().minimize(f, &vec![0.5; 12]);
        assert!(r.value < 1e-9, "{}", r.value);
    }
}
