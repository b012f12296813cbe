//! Forward-backward-forward primal-dual solver for the smoothness objective
//!
//! ```text
//! minimize_{w >= 0}  z^T w - alpha * sum(log(S w)) + beta * ||w||^2
//! ```
//!
//! split as `f(w) = z^T w + indicator(w >= 0)`, `g(d) = -alpha * sum(log d)`
//! composed with `S`, and the smooth `h(w) = beta * ||w||^2`. Each iteration
//! takes a gradient step on `h`, proximal steps on `f` and on the conjugate
//! `g*`, and a forward correction. The log never has to be evaluated inside
//! the iteration; it only appears in the diagnostic objective trace.

use std::fmt;
use std::str::FromStr;

use log::warn;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hypergraph::{CandidateSet, Hypergraph, SelectionMatrix};
use crate::smoothness::DistanceVector;

/// Default starting weight for every candidate.
pub const DEFAULT_INITIAL_WEIGHT: f64 = 1e-2;
/// Floor applied inside `log(S w)` when reporting the objective.
pub const LOG_FLOOR: f64 = 1e-12;

const POWER_ITER_TOL: f64 = 1e-8;
const POWER_ITER_MAX: usize = 10_000;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HslsParams {
    /// Strength of the log-degree term.
    pub alpha: f64,
    /// Strength of the squared-norm term.
    pub beta: f64,
    /// Relative-change stopping threshold.
    pub eta: f64,
    pub max_iter: usize,
    /// Position of `eps` inside `(0, 1 / (1 + mu))`.
    pub epsilon_frac: f64,
}

impl Default for HslsParams {
    fn default() -> Self {
        HslsParams {
            alpha: 1.0,
            beta: 1.0,
            eta: 1e-8,
            max_iter: 10_000,
            epsilon_frac: 0.5,
        }
    }
}

impl HslsParams {
    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::InvalidParams(format!("{name} must be positive, got {v}")))
            }
        };
        positive("alpha", self.alpha)?;
        positive("beta", self.beta)?;
        positive("eta", self.eta)?;
        if self.max_iter < 1 {
            return Err(Error::InvalidParams("max_iter must be at least 1".into()));
        }
        if !(self.epsilon_frac > 0.0 && self.epsilon_frac < 1.0) {
            return Err(Error::InvalidParams(format!(
                "epsilon_frac must lie in (0, 1), got {}",
                self.epsilon_frac
            )));
        }
        Ok(())
    }
}

/// Gradient of `beta * ||x||^2`.
pub fn grad_h(x: &[f64], beta: f64) -> Vec<f64> {
    x.iter().map(|v| 2.0 * beta * v).collect()
}

/// `max(0, x_i - gamma * z_i)`: prox of `gamma * (z^T u + indicator(u >= 0))`.
pub fn prox_f(x: &[f64], z: &[f64], gamma: f64) -> Result<Vec<f64>> {
    if x.len() != z.len() {
        return Err(Error::Dimension {
            what: "prox_f argument vs distances",
            expected: z.len(),
            found: x.len(),
        });
    }
    Ok(x.iter().zip(z).map(|(xi, zi)| (xi - gamma * zi).max(0.0)).collect())
}

/// Prox of `gamma * g` for the log barrier `g(u) = -alpha * sum(log u)`:
/// `(x_i + sqrt(x_i^2 + 4 alpha gamma)) / 2`.
pub fn prox_g(x: &[f64], alpha: f64, gamma: f64) -> Vec<f64> {
    x.iter().map(|&v| log_barrier_prox(v, alpha * gamma)).collect()
}

/// Prox of `gamma * g*`: `x_i - gamma * (y_i + sqrt(y_i^2 + 4 alpha / gamma)) / 2`
/// with `y = x / gamma`.
pub fn prox_g_conj(x: &[f64], alpha: f64, gamma: f64) -> Vec<f64> {
    x.iter().map(|&v| log_barrier_conj_prox(v, alpha * gamma)).collect()
}

// Both closed forms reduce to (x ± sqrt(x^2 + 4c)) / 2 with c = alpha * gamma;
// the branches avoid cancellation when x dominates sqrt(4c).
#[inline]
fn log_barrier_prox(x: f64, c: f64) -> f64 {
    let root = (x * x + 4.0 * c).sqrt();
    if x >= 0.0 {
        0.5 * (x + root)
    } else {
        2.0 * c / (root - x)
    }
}

#[inline]
fn log_barrier_conj_prox(x: f64, c: f64) -> f64 {
    let root = (x * x + 4.0 * c).sqrt();
    if x <= 0.0 {
        0.5 * (x - root)
    } else {
        -2.0 * c / (x + root)
    }
}

/// Step-size interval derived from the Lipschitz constant of `grad h`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepSequence {
    /// Lipschitz constant `2 beta`.
    pub zeta: f64,
    pub spectral_norm: f64,
    /// `zeta + ||S||`.
    pub mu: f64,
    pub eps: f64,
    /// Constant step, inside `[eps, (1 - eps) / mu]`.
    pub gamma: f64,
}

impl StepSequence {
    pub fn upper(&self) -> f64 {
        (1.0 - self.eps) / self.mu
    }
}

pub fn step_sequence(beta: f64, s: &SelectionMatrix, epsilon_frac: f64) -> Result<StepSequence> {
    if !(beta.is_finite() && beta > 0.0) {
        return Err(Error::InvalidParams(format!("beta must be positive, got {beta}")));
    }
    if !(epsilon_frac > 0.0 && epsilon_frac < 1.0) {
        return Err(Error::InvalidParams(format!("epsilon_frac must lie in (0, 1), got {epsilon_frac}")));
    }
    let zeta = 2.0 * beta;
    let spectral_norm = s.spectral_norm(POWER_ITER_TOL, POWER_ITER_MAX);
    let mu = zeta + spectral_norm;
    let eps = epsilon_frac / (1.0 + mu);
    let upper = (1.0 - eps) / mu;
    let gamma = (eps + epsilon_frac * (upper - eps)).clamp(eps, upper);
    Ok(StepSequence {
        zeta,
        spectral_norm,
        mu,
        eps,
        gamma,
    })
}

/// Objective value with `log` floored at [`LOG_FLOOR`].
pub fn objective(z: &[f64], s: &SelectionMatrix, w: &[f64], alpha: f64, beta: f64) -> f64 {
    objective_with_degrees(z, &s.apply(w), w, alpha, beta)
}

fn objective_with_degrees(z: &[f64], degrees: &[f64], w: &[f64], alpha: f64, beta: f64) -> f64 {
    let linear: f64 = z.iter().zip(w).map(|(a, b)| a * b).sum();
    let barrier: f64 = degrees.iter().map(|d| d.max(LOG_FLOOR).ln()).sum();
    let norm2: f64 = w.iter().map(|v| v * v).sum();
    linear - alpha * barrier + beta * norm2
}

/// Output of [`solve`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverState {
    /// Primal weights: the (non-negative) prox point of the last iteration.
    pub w: Vec<f64>,
    /// Dual variable paired with `w`; non-positive at the optimum, where
    /// `d_i = -alpha / (S w)_i`.
    pub d: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    pub step: StepSequence,
    /// Objective at the start point, then after every iteration.
    pub objective_trace: Vec<f64>,
    pub primal_residuals: Vec<f64>,
    pub dual_residuals: Vec<f64>,
}

impl SolverState {
    /// Diagnostics table: iteration, primal_residual, dual_residual, objective.
    pub fn diagnostics_csv(&self) -> String {
        let mut out = String::from("# hsls-format v1\niteration,primal_residual,dual_residual,objective\n");
        out.push_str(&format!("0,,,{}\n", self.objective_trace[0]));
        for i in 0..self.iterations {
            out.push_str(&format!(
                "{},{},{},{}\n",
                i + 1,
                self.primal_residuals[i],
                self.dual_residuals[i],
                self.objective_trace[i + 1]
            ));
        }
        out
    }
}

fn rel_change(new: &[f64], old: &[f64]) -> f64 {
    let num: f64 = new.iter().zip(old).map(|(a, b)| (a - b) * (a - b)).sum();
    let den: f64 = old.iter().map(|v| v * v).sum();
    if den == 0.0 {
        num
    } else {
        num / den
    }
}

/// Runs the primal-dual iteration from `w0` (default `1e-2` everywhere) and
/// `d0` (default `S w0`).
pub fn solve(
    z: &DistanceVector,
    s: &SelectionMatrix,
    params: &HslsParams,
    w0: Option<&[f64]>,
    d0: Option<&[f64]>,
) -> Result<SolverState> {
    params.validate()?;
    let dim = s.cols();
    let n = s.rows();
    if z.len() != dim {
        return Err(Error::Dimension {
            what: "distance vector vs selection matrix columns",
            expected: dim,
            found: z.len(),
        });
    }
    if dim == 0 {
        return Err(Error::InvalidParams("empty candidate set".into()));
    }
    let z = z.as_slice();
    let mut w = match w0 {
        Some(w0) if w0.len() != dim => {
            return Err(Error::Dimension {
                what: "initial weights",
                expected: dim,
                found: w0.len(),
            })
        }
        Some(w0) if w0.iter().any(|v| !(v.is_finite() && *v >= 0.0)) => {
            return Err(Error::InvalidParams("initial weights must be finite and non-negative".into()))
        }
        Some(w0) => w0.to_vec(),
        None => vec![DEFAULT_INITIAL_WEIGHT; dim],
    };
    let mut d = match d0 {
        Some(d0) if d0.len() != n => {
            return Err(Error::Dimension {
                what: "initial dual",
                expected: n,
                found: d0.len(),
            })
        }
        Some(d0) if d0.iter().any(|v| !v.is_finite()) => {
            return Err(Error::InvalidParams("initial dual must be finite".into()))
        }
        Some(d0) => d0.to_vec(),
        None => s.apply(&w),
    };

    let step = step_sequence(params.beta, s, params.epsilon_frac)?;
    let gamma = step.gamma;
    let (alpha, beta) = (params.alpha, params.beta);
    let c = alpha * gamma;

    let mut trace = vec![objective(z, s, &w, alpha, beta)];
    let mut primal_res = Vec::new();
    let mut dual_res = Vec::new();

    let mut sw = vec![0.0; n];
    let mut st_d = vec![0.0; dim];
    let mut y = vec![0.0; dim];
    let mut y_hat = vec![0.0; n];
    let mut p = vec![0.0; dim];
    let mut p_hat = vec![0.0; n];
    let mut sp = vec![0.0; n];
    let mut st_p_hat = vec![0.0; dim];
    let mut w_next = vec![0.0; dim];
    let mut d_next = vec![0.0; n];
    let mut converged = false;
    let mut iterations = 0;

    for iter in 0..params.max_iter {
        s.apply_into(&w, &mut sw);
        s.apply_transpose_into(&d, &mut st_d);
        for k in 0..dim {
            y[k] = w[k] - gamma * (2.0 * beta * w[k] + st_d[k]);
            p[k] = (y[k] - gamma * z[k]).max(0.0);
        }
        for i in 0..n {
            y_hat[i] = d[i] + gamma * sw[i];
            p_hat[i] = log_barrier_conj_prox(y_hat[i], c);
        }
        s.apply_into(&p, &mut sp);
        s.apply_transpose_into(&p_hat, &mut st_p_hat);
        for k in 0..dim {
            let q = p[k] - gamma * (2.0 * beta * p[k] + st_p_hat[k]);
            w_next[k] = w[k] - y[k] + q;
        }
        for i in 0..n {
            let q_hat = p_hat[i] + gamma * sp[i];
            d_next[i] = d[i] - y_hat[i] + q_hat;
        }
        iterations = iter + 1;
        if w_next.iter().chain(&d_next).any(|v| !v.is_finite()) {
            return Err(Error::Diverged { iteration: iterations });
        }
        let pr = rel_change(&w_next, &w);
        let dr = rel_change(&d_next, &d);
        primal_res.push(pr);
        dual_res.push(dr);
        trace.push(objective_with_degrees(z, &sp, &p, alpha, beta));
        std::mem::swap(&mut w, &mut w_next);
        std::mem::swap(&mut d, &mut d_next);
        if pr < params.eta && dr < params.eta {
            // A zero-degree node means the objective is infinite there.
            converged = sp.iter().all(|&v| v > 0.0);
            if !converged {
                warn!("iterates stalled with a zero-degree node after {iterations} iterations");
            }
            break;
        }
    }

    Ok(SolverState {
        w: p,
        d: p_hat,
        iterations,
        converged,
        step,
        objective_trace: trace,
        primal_residuals: primal_res,
        dual_residuals: dual_res,
    })
}

/// How a weight vector becomes a structure.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum SelectionRule {
    /// Keep `w_d > tau * max(w)`.
    RelativeThreshold(f64),
    /// Keep the `m` largest weights, ties by candidate order.
    TopK(usize),
}

impl fmt::Display for SelectionRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SelectionRule::RelativeThreshold(t) => write!(f, "rel:{t}"),
            SelectionRule::TopK(m) => write!(f, "topk:{m}"),
        }
    }
}

impl FromStr for SelectionRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidParams(format!("selection rule `{s}` is not `topk:<m>` or `rel:<tau>`"));
        let (kind, value) = s.trim().split_once(':').ok_or_else(bad)?;
        match kind {
            "topk" => value.parse().map(SelectionRule::TopK).map_err(|_| bad()),
            "rel" => value.parse().map(SelectionRule::RelativeThreshold).map_err(|_| bad()),
            _ => Err(bad()),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Selection {
    pub hypergraph: Hypergraph,
    /// Set when top-k had to pick among all-zero weights.
    pub all_zero: bool,
}

pub fn select_edges(w: &[f64], cands: &CandidateSet, rule: SelectionRule) -> Result<Selection> {
    if w.len() != cands.len() {
        return Err(Error::Dimension {
            what: "weights vs candidates",
            expected: cands.len(),
            found: w.len(),
        });
    }
    let max = w.iter().copied().fold(0.0, f64::max);
    let (keep, all_zero): (Vec<usize>, bool) = match rule {
        SelectionRule::RelativeThreshold(tau) => {
            if !(tau.is_finite() && tau >= 0.0) {
                return Err(Error::InvalidParams(format!("relative threshold must be >= 0, got {tau}")));
            }
            ((0..w.len()).filter(|&d| w[d] > tau * max).collect(), false)
        }
        SelectionRule::TopK(m) => {
            if m < 1 || m > w.len() {
                return Err(Error::InvalidParams(format!(
                    "top-k count {m} must be in 1..={}",
                    w.len()
                )));
            }
            let mut order: Vec<usize> = (0..w.len()).collect();
            order.sort_by(|&a, &b| w[b].total_cmp(&w[a]).then(a.cmp(&b)));
            order.truncate(m);
            let all_zero = max <= 0.0;
            if all_zero {
                warn!("all weights are zero; top-{m} selection is arbitrary");
            }
            (order, all_zero)
        }
    };
    let edges = keep.iter().map(|&d| cands.candidates()[d].clone()).collect();
    let weights = keep.iter().map(|&d| w[d].max(0.0)).collect();
    Ok(Selection {
        hypergraph: Hypergraph::with_weights(cands.num_nodes(), edges, weights)?,
        all_zero,
    })
}
