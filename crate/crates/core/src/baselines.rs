//! Reference structure learners: the closed-form HGSI weights over a
//! `k - 1` nearest-neighbor candidate set, and plain K-NN hyperedges.

use crate::error::{Error, Result};
use crate::hypergraph::{CandidateSet, CardinalitySpec, Hyperedge, Hypergraph};
use crate::reduction::{reduce_candidates, NeighborLists};
use crate::smoothness::{distance_vector, DistanceVector, SignalMatrix, TvKind};
use crate::solver::{select_edges, SelectionRule};

/// Closed-form weights `1 / (z + 1)`, each in `(0, 1]`.
pub fn hgsi_solve(z: &DistanceVector) -> Vec<f64> {
    z.as_slice().iter().map(|v| 1.0 / (v + 1.0)).collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct HgsiResult {
    pub candidates: CandidateSet,
    pub weights: Vec<f64>,
    pub selected: Hypergraph,
}

/// HGSI end to end: `k - 1` neighbor reduction, distances under `kind`
/// (Max-Square by default at call sites), closed-form weights, selection.
pub fn hgsi_pipeline(x: &SignalMatrix, cards: &[usize], kind: TvKind, rule: SelectionRule) -> Result<HgsiResult> {
    let spec = CardinalitySpec::minimal_neighbors(cards.to_vec())?;
    let candidates = reduce_candidates(x, &spec)?;
    let z = distance_vector(x, &candidates, kind)?;
    let weights = hgsi_solve(&z);
    let rule = match rule {
        SelectionRule::TopK(m) if m > candidates.len() => SelectionRule::TopK(candidates.len()),
        r => r,
    };
    let selected = select_edges(&weights, &candidates, rule)?.hypergraph;
    Ok(HgsiResult {
        candidates,
        weights,
        selected,
    })
}

/// One hyperedge per node and cardinality: the node plus its `k - 1` nearest
/// neighbors. Duplicates are merged; the result is unweighted.
pub fn knn_structure(x: &SignalMatrix, spec: &CardinalitySpec) -> Result<Hypergraph> {
    let n = x.num_nodes();
    spec.check_nodes(n)?;
    let budgets: Vec<usize> = spec.cards().iter().map(|k| k - 1).collect();
    if let Some(&k) = spec.cards().iter().find(|&&k| k - 1 > n - 1) {
        return Err(Error::InvalidBudget(format!("cardinality {k} needs {} neighbors of {n} nodes", k - 1)));
    }
    let lists = NeighborLists::compute(x, &budgets);
    let mut edges = Vec::with_capacity(n * budgets.len());
    for slot in 0..lists.num_slots() {
        for i in 0..n {
            let nodes = lists.get(slot, i).iter().copied().chain(std::iter::once(i));
            edges.push(Hyperedge::new(nodes)?);
        }
    }
    Hypergraph::new(n, edges)
}
