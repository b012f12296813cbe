//! K-NN candidate reduction and the truth-overlap diagnostic.
//!
//! For every cardinality `k_l` and node `v_i`, the candidate set receives
//! `{v_i} ∪ s` for every `(k_l - 1)`-subset `s` of the `r_l` nearest neighbors
//! of `v_i`. Neighbor lists for a smaller budget are prefixes of those for a
//! larger one, so the reduced sets are nested in the budgets.

use log::warn;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hypergraph::{binomial, for_each_combination, CandidateSet, CardinalitySpec, Hyperedge, Hypergraph};
use crate::smoothness::SignalMatrix;

/// Every other node of `x` sorted by ascending Euclidean distance from node
/// `i`, ties broken by ascending index.
fn ranked_neighbors(x: &SignalMatrix, i: usize) -> Vec<usize> {
    let xi = x.row(i);
    let mut dist: Vec<(f64, usize)> = (0..x.num_nodes())
        .filter(|&j| j != i)
        .map(|j| {
            let d: f64 = xi.iter().zip(x.row(j)).map(|(a, b)| (a - b) * (a - b)).sum();
            (d, j)
        })
        .collect();
    dist.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    dist.into_iter().map(|(_, j)| j).collect()
}

/// The `r` nearest neighbors of node `i`, self excluded.
pub fn knn(x: &SignalMatrix, i: usize, r: usize) -> Result<Vec<usize>> {
    let n = x.num_nodes();
    if i >= n {
        return Err(Error::IndexOutOfRange { index: i, num_nodes: n });
    }
    if r == 0 || r > n - 1 {
        return Err(Error::InvalidBudget(format!(
            "neighbor count {r} must be in 1..={} for {n} nodes",
            n - 1
        )));
    }
    let mut ranked = ranked_neighbors(x, i);
    ranked.truncate(r);
    Ok(ranked)
}

/// Per-node neighbor lists, one list per cardinality slot.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NeighborLists {
    /// `lists[l][i]` holds the neighbors of node `i` for slot `l`.
    lists: Vec<Vec<Vec<usize>>>,
}

impl NeighborLists {
    /// Budgets above `N - 1` are clamped with a warning.
    pub fn compute(x: &SignalMatrix, budgets: &[usize]) -> Self {
        let n = x.num_nodes();
        let budgets: Vec<usize> = budgets
            .iter()
            .map(|&r| {
                if r > n - 1 {
                    warn!("neighbor budget {r} exceeds N - 1 = {}; clamping", n - 1);
                    n - 1
                } else {
                    r
                }
            })
            .collect();
        let max_r = budgets.iter().copied().max().unwrap_or(0);
        let ranked: Vec<Vec<usize>> = (0..n)
            .into_par_iter()
            .map(|i| {
                let mut r = ranked_neighbors(x, i);
                r.truncate(max_r);
                r
            })
            .collect();
        let lists = budgets
            .iter()
            .map(|&r| ranked.iter().map(|row| row[..r].to_vec()).collect())
            .collect();
        NeighborLists { lists }
    }

    pub fn get(&self, slot: usize, node: usize) -> &[usize] {
        &self.lists[slot][node]
    }

    pub fn num_slots(&self) -> usize {
        self.lists.len()
    }
}

/// Reduced candidate set; `spec` must carry neighbor budgets.
pub fn reduce_candidates(x: &SignalMatrix, spec: &CardinalitySpec) -> Result<CandidateSet> {
    let n = x.num_nodes();
    spec.check_nodes(n)?;
    let budgets = spec
        .neighbors()
        .ok_or_else(|| Error::InvalidBudget("candidate reduction requires neighbor budgets".into()))?;
    for (&k, &r) in spec.cards().iter().zip(budgets) {
        if r + 1 < k {
            return Err(Error::InvalidBudget(format!(
                "budget {r} for cardinality {k} is below k - 1 = {}",
                k - 1
            )));
        }
    }
    let lists = NeighborLists::compute(x, budgets);
    let per_node: Vec<Vec<Hyperedge>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut out = Vec::new();
            for (slot, &k) in spec.cards().iter().enumerate() {
                let nbrs = lists.get(slot, i);
                for_each_combination(nbrs.len(), k - 1, |pick| {
                    let mut nodes: Vec<usize> = pick.iter().map(|&p| nbrs[p]).collect();
                    nodes.push(i);
                    nodes.sort_unstable();
                    out.push(Hyperedge::from_sorted_unchecked(nodes));
                });
            }
            out
        })
        .collect();
    CandidateSet::new(n, per_node.into_iter().flatten().collect())
}

/// Upper bounds on the reduced set size: `(per node, N * per node)` where
/// per node is `sum_l C(r_l, k_l - 1)`.
pub fn reduced_size_bounds(num_nodes: usize, spec: &CardinalitySpec) -> Result<(u128, u128)> {
    let budgets = spec
        .neighbors()
        .ok_or_else(|| Error::InvalidBudget("size bound requires neighbor budgets".into()))?;
    let per_node = spec.cards().iter().zip(budgets).try_fold(0u128, |acc, (&k, &r)| {
        let r = r.min(num_nodes.saturating_sub(1));
        binomial(r as u128, (k - 1) as u128)
            .and_then(|c| acc.checked_add(c))
            .ok_or(Error::Overflow)
    })?;
    let total = per_node.checked_mul(num_nodes as u128).ok_or(Error::Overflow)?;
    Ok((per_node, total))
}

/// Percentage of `truth` edges present in `cands`.
pub fn overlap_percentage(truth: &Hypergraph, cands: &CandidateSet) -> Result<f64> {
    if truth.num_nodes() != cands.num_nodes() {
        return Err(Error::Dimension {
            what: "node count of truth vs candidates",
            expected: truth.num_nodes(),
            found: cands.num_nodes(),
        });
    }
    if truth.is_empty() {
        return Err(Error::Undefined("overlap percentage of an empty truth edge set".into()));
    }
    let hits = truth.edges().iter().filter(|e| cands.contains(e)).count();
    Ok(100.0 * hits as f64 / truth.len() as f64)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OverlapRow {
    pub r: usize,
    /// Budget used for each cardinality, aligned with the sorted cardinalities.
    pub schedule: Vec<usize>,
    pub overlap_percent: f64,
    pub num_candidates: usize,
}

/// Overlap for every shared budget `r` in `r_min..=r_max`.
pub fn overlap_sweep(
    x: &SignalMatrix,
    truth: &Hypergraph,
    cards: &[usize],
    r_min: usize,
    r_max: usize,
) -> Result<Vec<OverlapRow>> {
    let base = CardinalitySpec::new(cards.to_vec())?;
    let floor = base.cards().iter().map(|k| k - 1).max().unwrap_or(1);
    if r_min < floor {
        return Err(Error::InvalidBudget(format!(
            "sweep start {r_min} is below max(k - 1) = {floor}"
        )));
    }
    if r_max < r_min {
        return Err(Error::InvalidBudget(format!("sweep end {r_max} is below start {r_min}")));
    }
    (r_min..=r_max)
        .map(|r| {
            let spec = CardinalitySpec::with_uniform_neighbors(base.cards().to_vec(), r)?;
            let cands = reduce_candidates(x, &spec)?;
            let schedule = spec
                .neighbors()
                .unwrap_or_default()
                .iter()
                .map(|&b| b.min(x.num_nodes() - 1))
                .collect();
            Ok(OverlapRow {
                r,
                schedule,
                overlap_percent: overlap_percentage(truth, &cands)?,
                num_candidates: cands.len(),
            })
        })
        .collect()
}
