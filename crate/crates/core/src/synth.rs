//! Synthetic ground truths and smooth signals.
//!
//! Signals are drawn from a zero-mean Gaussian whose covariance is the
//! pseudo-inverse of the star-expansion Laplacian: one vertex per node, one
//! per hyperedge, and a unit edge between a hyperedge vertex and each of its
//! members. Only the node coordinates of each draw are kept.

use log::warn;
use nalgebra::{DMatrix, SymmetricEigen};
use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::hypergraph::{count_full_candidates, enumerate_full_candidates, CardinalitySpec, Hypergraph};
use crate::smoothness::SignalMatrix;

pub const DEFAULT_DIAG_NOISE: f64 = 1e-3;
pub const DEFAULT_NUM_OBS: usize = 250;
/// Eigenvalues at or below this are treated as zero when pseudo-inverting.
pub const EIGEN_CUTOFF: f64 = 1e-10;

const MAX_COVER_ATTEMPTS: usize = 200_000;

/// Samples `num_edges` distinct hyperedges uniformly from all possible ones.
///
/// When `num_edges * max(k) >= N`, draws that leave a node isolated are
/// rejected and resampled, so the result is uniform among covering edge sets.
pub fn random_hypergraph(num_nodes: usize, spec: &CardinalitySpec, num_edges: usize, seed: u64) -> Result<Hypergraph> {
    let total = count_full_candidates(num_nodes, spec)?;
    if num_edges as u128 > total {
        return Err(Error::InvalidParams(format!(
            "{num_edges} edges requested but only {total} are possible"
        )));
    }
    let all = enumerate_full_candidates(num_nodes, spec)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let max_k = *spec.cards().last().expect("spec has a cardinality");
    let can_cover = num_edges * max_k >= num_nodes;

    let mut best: Option<(usize, Vec<usize>)> = None;
    for _ in 0..MAX_COVER_ATTEMPTS {
        let picked = index::sample(&mut rng, all.len(), num_edges).into_vec();
        let mut covered = vec![false; num_nodes];
        for &d in &picked {
            for &v in all.candidates()[d].nodes() {
                covered[v] = true;
            }
        }
        let isolated = covered.iter().filter(|c| !**c).count();
        if isolated == 0 || !can_cover {
            best = Some((isolated, picked));
            break;
        }
        if best.as_ref().is_none_or(|(b, _)| isolated < *b) {
            best = Some((isolated, picked));
        }
    }
    let (isolated, picked) = best.expect("at least one draw");
    if isolated > 0 && can_cover {
        warn!("{isolated} nodes left isolated after {MAX_COVER_ATTEMPTS} draws");
    }
    let edges = picked.into_iter().map(|d| all.candidates()[d].clone()).collect();
    Hypergraph::new(num_nodes, edges)
}

/// Star expansion of a hypergraph and its (regularized) Laplacian.
#[derive(Clone, Debug, PartialEq)]
pub struct StarExpansion {
    pub num_nodes: usize,
    pub num_edges: usize,
    /// `(N + Y) x (N + Y)` bipartite adjacency; node vertices first.
    pub adjacency: DMatrix<f64>,
    /// `degree - adjacency + diag_noise * I`.
    pub laplacian: DMatrix<f64>,
    pub diag_noise: f64,
}

pub fn star_laplacian(h: &Hypergraph, diag_noise: f64) -> Result<StarExpansion> {
    if h.is_empty() {
        return Err(Error::InvalidParams("star expansion of an empty hypergraph".into()));
    }
    if !(diag_noise.is_finite() && diag_noise >= 0.0) {
        return Err(Error::InvalidParams(format!("diagonal noise must be >= 0, got {diag_noise}")));
    }
    let n = h.num_nodes();
    let m = n + h.len();
    let mut adjacency = DMatrix::zeros(m, m);
    for (y, e) in h.edges().iter().enumerate() {
        for &v in e.nodes() {
            adjacency[(v, n + y)] = 1.0;
            adjacency[(n + y, v)] = 1.0;
        }
    }
    let mut laplacian = -adjacency.clone();
    for i in 0..m {
        let degree: f64 = adjacency.row(i).sum();
        laplacian[(i, i)] = degree + diag_noise;
    }
    Ok(StarExpansion {
        num_nodes: n,
        num_edges: h.len(),
        adjacency,
        laplacian,
        diag_noise,
    })
}

/// `V diag(lambda^-1/2)`, the covariance factor of `N(0, L^+)`.
fn covariance_factor(laplacian: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if laplacian.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numeric("non-finite Laplacian entry".into()));
    }
    let eig = SymmetricEigen::try_new(laplacian.clone(), f64::EPSILON, 0)
        .ok_or_else(|| Error::Numeric("symmetric eigendecomposition did not converge".into()))?;
    let mut factor = eig.eigenvectors;
    for (k, &lambda) in eig.eigenvalues.iter().enumerate() {
        let scale = if lambda > EIGEN_CUTOFF { lambda.sqrt().recip() } else { 0.0 };
        factor.column_mut(k).scale_mut(scale);
    }
    Ok(factor)
}

/// `P` draws of the full `(N + Y)`-dimensional vector, one per column.
pub fn sample_full(star: &StarExpansion, num_obs: usize, seed: u64) -> Result<DMatrix<f64>> {
    if num_obs < 1 {
        return Err(Error::InvalidParams("need at least one observation".into()));
    }
    let factor = covariance_factor(&star.laplacian)?;
    let m = factor.nrows();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normals = DMatrix::<f64>::from_fn(m, num_obs, |_, _| StandardNormal.sample(&mut rng));
    Ok(factor * normals)
}

/// Node signals: the first `N` coordinates of each draw.
pub fn sample_smooth_signals(star: &StarExpansion, num_obs: usize, seed: u64) -> Result<SignalMatrix> {
    let full = sample_full(star, num_obs, seed)?;
    let n = star.num_nodes;
    let mut data = Vec::with_capacity(n * num_obs);
    for i in 0..n {
        data.extend(full.row(i).iter());
    }
    SignalMatrix::new(n, num_obs, data)
}

/// Ground truth plus signals in one step.
pub fn synthesize(
    num_nodes: usize,
    spec: &CardinalitySpec,
    num_edges: usize,
    num_obs: usize,
    diag_noise: f64,
    seed: u64,
) -> Result<(Hypergraph, SignalMatrix)> {
    let truth = random_hypergraph(num_nodes, spec, num_edges, seed)?;
    let star = star_laplacian(&truth, diag_noise)?;
    let signals = sample_smooth_signals(&star, num_obs, seed.wrapping_add(0x5eed))?;
    Ok((truth, signals))
}
