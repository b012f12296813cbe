//! Hypergraph data model and the candidate coordinate system.
//!
//! Every weight vector `w`, distance vector `z` and selection matrix `S` in
//! this crate is indexed by a [`CandidateSet`]. Candidates are kept in the
//! canonical order of (cardinality, sorted node tuple) so that coordinates are
//! reproducible between runs and between the different ways a candidate set
//! can be produced (full enumeration, K-NN reduction, files on disk).

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default cap on the number of candidates materialized by full enumeration.
pub const DEFAULT_CANDIDATE_CAP: u128 = 10_000_000;

/// A set of at least two distinct node indices, stored sorted.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct Hyperedge(Vec<usize>);

impl Hyperedge {
    /// Builds a hyperedge from node indices in any order.
    ///
    /// Repeated indices are rejected rather than silently collapsed, since a
    /// repeated member almost always means a malformed input row.
    pub fn new(nodes: impl IntoIterator<Item = usize>) -> Result<Self> {
        let mut nodes: Vec<usize> = nodes.into_iter().collect();
        nodes.sort_unstable();
        if nodes.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidHyperedge(format!(
                "repeated node index in {nodes:?}"
            )));
        }
        if nodes.len() < 2 {
            return Err(Error::InvalidHyperedge(format!(
                "cardinality {} < 2",
                nodes.len()
            )));
        }
        Ok(Hyperedge(nodes))
    }

    /// Caller guarantees `nodes` is strictly increasing with length >= 2.
    pub(crate) fn from_sorted_unchecked(nodes: Vec<usize>) -> Self {
        debug_assert!(nodes.len() >= 2 && nodes.windows(2).all(|w| w[0] < w[1]));
        Hyperedge(nodes)
    }

    pub fn nodes(&self) -> &[usize] {
        &self.0
    }

    pub fn cardinality(&self) -> usize {
        self.0.len()
    }

    pub fn contains(&self, node: usize) -> bool {
        self.0.binary_search(&node).is_ok()
    }

    pub fn is_subset_of(&self, other: &Hyperedge) -> bool {
        self.0.iter().all(|v| other.contains(*v))
    }

    pub fn max_node(&self) -> usize {
        *self.0.last().expect("hyperedge has at least two nodes")
    }

    /// All unordered member pairs `(i, j)` with `i < j`.
    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.0
            .iter()
            .enumerate()
            .flat_map(move |(a, &i)| self.0[a + 1..].iter().map(move |&j| (i, j)))
    }
}

impl Ord for Hyperedge {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0
            .len()
            .cmp(&other.0.len())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Hyperedge {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl TryFrom<Vec<usize>> for Hyperedge {
    type Error = Error;

    fn try_from(value: Vec<usize>) -> Result<Self> {
        Hyperedge::new(value)
    }
}

impl From<Hyperedge> for Vec<usize> {
    fn from(value: Hyperedge) -> Self {
        value.0
    }
}

impl fmt::Display for Hyperedge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, v) in self.0.iter().enumerate() {
            if k > 0 {
                f.write_str(",")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

/// A hypergraph over `num_nodes` dense node indices.
///
/// Edges are kept in canonical order without duplicates. Weights, when
/// present, are aligned with the edges and non-negative.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Hypergraph {
    num_nodes: usize,
    edges: Vec<Hyperedge>,
    weights: Option<Vec<f64>>,
}

impl Hypergraph {
    /// Unweighted hypergraph. Duplicate edges are merged.
    pub fn new(num_nodes: usize, edges: Vec<Hyperedge>) -> Result<Self> {
        let pairs = edges.into_iter().map(|e| (e, None)).collect();
        Self::from_entries(num_nodes, pairs).map(|(h, _)| h)
    }

    /// Weighted hypergraph. Duplicate edges are merged keeping the larger weight.
    pub fn with_weights(num_nodes: usize, edges: Vec<Hyperedge>, weights: Vec<f64>) -> Result<Self> {
        if edges.len() != weights.len() {
            return Err(Error::Dimension {
                what: "hyperedge weights",
                expected: edges.len(),
                found: weights.len(),
            });
        }
        let pairs = edges.into_iter().zip(weights.into_iter().map(Some)).collect();
        Self::from_entries(num_nodes, pairs).map(|(h, _)| h)
    }

    /// Builds from `(edge, weight)` entries and reports how many duplicates
    /// were merged. Either every entry carries a weight or none does.
    pub fn from_entries(num_nodes: usize, mut entries: Vec<(Hyperedge, Option<f64>)>) -> Result<(Self, usize)> {
        if num_nodes == 0 {
            return Err(Error::InvalidHypergraph("num_nodes must be positive".into()));
        }
        let weighted = entries.first().map(|(_, w)| w.is_some()).unwrap_or(false);
        for (e, w) in &entries {
            if e.max_node() >= num_nodes {
                return Err(Error::IndexOutOfRange {
                    index: e.max_node(),
                    num_nodes,
                });
            }
            match w {
                Some(w) if !(w.is_finite() && *w >= 0.0) => {
                    return Err(Error::InvalidHypergraph(format!(
                        "weight {w} of edge {e} is not a finite non-negative number"
                    )));
                }
                Some(_) if !weighted => {
                    return Err(Error::InvalidHypergraph("mixed weighted and unweighted edges".into()));
                }
                None if weighted => {
                    return Err(Error::InvalidHypergraph("mixed weighted and unweighted edges".into()));
                }
                _ => {}
            }
        }
        entries.sort_by(|a, b| a.0.cmp(&b.0));
        let total = entries.len();
        let mut merged: Vec<(Hyperedge, Option<f64>)> = Vec::with_capacity(total);
        for (e, w) in entries {
            match merged.last_mut() {
                Some((last, lw)) if *last == e => {
                    if let (Some(a), Some(b)) = (lw.as_mut(), w) {
                        *a = a.max(b);
                    }
                }
                _ => merged.push((e, w)),
            }
        }
        let dropped = total - merged.len();
        let (edges, weights): (Vec<_>, Vec<_>) = merged.into_iter().unzip();
        let weights = if weighted {
            Some(weights.into_iter().map(|w| w.unwrap_or(1.0)).collect())
        } else {
            None
        };
        Ok((
            Hypergraph {
                num_nodes,
                edges,
                weights,
            },
            dropped,
        ))
    }

    pub fn num_nodes(&self) -> usize {
        self.num_nodes
    }

    pub fn edges(&self) -> &[Hyperedge] {
        &self.edges
    }

    pub fn weights(&self) -> Option<&[f64]> {
        self.weights.as_deref()
    }

    /// Weight of edge `idx`, 1.0 for unweighted hypergraphs.
    pub fn weight(&self, idx: usize) -> f64 {
        self.weights.as_ref().map_or(1.0, |w| w[idx])
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn contains(&self, edge: &Hyperedge) -> bool {
        self.edges.binary_search(edge).is_ok()
    }

    /// Same edge set with the weights dropped.
    pub fn unweighted(&self) -> Hypergraph {
        Hypergraph {
            num_nodes: self.num_nodes,
            edges: self.edges.clone(),
            weights: None,
        }
    }

    /// Sorted distinct cardinalities present in the edge set.
    pub fn cardinalities(&self) -> Vec<usize> {
        let mut c: Vec<usize> = self.edges.iter().map(Hyperedge::cardinality).collect();
        c.sort_unstable();
        c.dedup();
        c
    }

    /// Number of edges containing each node.
    pub fn node_degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.num_nodes];
        for e in &self.edges {
            for &v in e.nodes() {
                deg[v] += 1;
            }
        }
        deg
    }
}

/// Hyperedge cardinalities `K` with optional per-cardinality neighbor budgets `R`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CardinalitySpec {
    cards: Vec<usize>,
    neighbors: Option<Vec<usize>>,
}

impl CardinalitySpec {
    pub fn new(cards: Vec<usize>) -> Result<Self> {
        let mut cards = cards;
        cards.sort_unstable();
        Self::validate_cards(&cards)?;
        Ok(CardinalitySpec {
            cards,
            neighbors: None,
        })
    }

    /// `neighbors[l]` is the budget for `cards[l]`; pairs are sorted together
    /// by cardinality.
    pub fn with_neighbors(cards: Vec<usize>, neighbors: Vec<usize>) -> Result<Self> {
        if cards.len() != neighbors.len() {
            return Err(Error::InvalidSpec(format!(
                "{} cardinalities but {} neighbor budgets",
                cards.len(),
                neighbors.len()
            )));
        }
        let mut pairs: Vec<(usize, usize)> = cards.into_iter().zip(neighbors).collect();
        pairs.sort_unstable();
        let (cards, neighbors): (Vec<_>, Vec<_>) = pairs.into_iter().unzip();
        Self::validate_cards(&cards)?;
        for (&k, &r) in cards.iter().zip(&neighbors) {
            if r + 1 < k {
                return Err(Error::InvalidBudget(format!(
                    "budget {r} for cardinality {k} is below k - 1 = {}",
                    k - 1
                )));
            }
        }
        Ok(CardinalitySpec {
            cards,
            neighbors: Some(neighbors),
        })
    }

    /// Every cardinality gets the same budget `r`.
    pub fn with_uniform_neighbors(cards: Vec<usize>, r: usize) -> Result<Self> {
        let n = cards.len();
        Self::with_neighbors(cards, vec![r; n])
    }

    /// The HGSI regime: `r_l = k_l - 1` for every cardinality.
    pub fn minimal_neighbors(cards: Vec<usize>) -> Result<Self> {
        let r = cards.iter().map(|k| k.saturating_sub(1)).collect();
        Self::with_neighbors(cards, r)
    }

    fn validate_cards(cards: &[usize]) -> Result<()> {
        if cards.is_empty() {
            return Err(Error::InvalidSpec("no cardinalities given".into()));
        }
        if let Some(&k) = cards.iter().find(|&&k| k < 2) {
            return Err(Error::InvalidSpec(format!("cardinality {k} < 2")));
        }
        if cards.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidSpec(format!("repeated cardinality in {cards:?}")));
        }
        Ok(())
    }

    pub fn cards(&self) -> &[usize] {
        &self.cards
    }

    pub fn neighbors(&self) -> Option<&[usize]> {
        self.neighbors.as_deref()
    }

    pub fn num_cards(&self) -> usize {
        self.cards.len()
    }

    /// Checks every cardinality fits in `num_nodes`.
    pub fn check_nodes(&self, num_nodes: usize) -> Result<()> {
        match self.cards.iter().find(|&&k| k > num_nodes) {
            Some(k) => Err(Error::InvalidSpec(format!(
                "cardinality {k} exceeds node count {num_nodes}"
            ))),
            None => Ok(()),
        }
    }
}

/// Exact binomial coefficient, `None` on overflow.
pub fn binomial(n: u128, k: u128) -> Option<u128> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        // acc = C(n, i) here; C(n, i + 1) = C(n, i) * (n - i) / (i + 1) exactly.
        acc = acc.checked_mul(n - i)? / (i + 1);
    }
    Some(acc)
}

/// Number of possible hyperedges over `num_nodes` nodes with the given cardinalities.
pub fn count_full_candidates(num_nodes: usize, spec: &CardinalitySpec) -> Result<u128> {
    spec.check_nodes(num_nodes)?;
    spec.cards().iter().try_fold(0u128, |acc, &k| {
        binomial(num_nodes as u128, k as u128)
            .and_then(|c| acc.checked_add(c))
            .ok_or(Error::Overflow)
    })
}

/// Enumerates every possible hyperedge, refusing above [`DEFAULT_CANDIDATE_CAP`].
pub fn enumerate_full_candidates(num_nodes: usize, spec: &CardinalitySpec) -> Result<CandidateSet> {
    enumerate_full_candidates_capped(num_nodes, spec, DEFAULT_CANDIDATE_CAP)
}

pub fn enumerate_full_candidates_capped(num_nodes: usize, spec: &CardinalitySpec, cap: u128) -> Result<CandidateSet> {
    let count = count_full_candidates(num_nodes, spec)?;
    if count > cap {
        return Err(Error::Infeasible { count, cap });
    }
    let mut candidates = Vec::with_capacity(count as usize);
    for &k in spec.cards() {
        for_each_combination(num_nodes, k, |c| {
            candidates.push(Hyperedge::from_sorted_unchecked(c.to_vec()))
        });
    }
    Ok(CandidateSet {
        num_nodes,
        candidates,
    })
}

/// Visits every k-subset of `0..n` in lexicographic order.
pub(crate) fn for_each_combination(n: usize, k: usize, mut visit: impl FnMut(&[usize])) {
    if k > n {
        return;
    }
    if k == 0 {
        visit(&[]);
        return;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        visit(&idx);
        let mut pos = k;
        while pos > 0 && idx[pos - 1] == n - k + pos - 1 {
            pos -= 1;
        }
        if pos == 0 {
            return;
        }
        idx[pos - 1] += 1;
        for j in pos..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// Ordered candidate hyperedges; position `d` is coordinate `d` of `w` and `z`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CandidateSet {
    num_nodes: usize,
    candidates: Vec<Hyperedge>,
}

impl CandidateSet {
    /// Canonicalizes order and merges duplicates.
    pub fn new(num_nodes: usize, mut candidates: Vec<Hyperedge>) -> Result<Self> {
        if let Some(e) = candidates.iter().find(|e| e.max_node() >= num_nodes) {
            return Err(Error::IndexOutOfRange {
                index: e.max_node(),
                num_nodes,
            });
        }
        candidates.sort_unstable();
        candidates.dedup();
        Ok(CandidateSet {
            num_nodes,
            candidates,
        })
    }

    pub fn from_hypergraph(h: &Hypergraph) -> Self {
        CandidateSet {
            num_nodes: h.num_nodes(),
            candidates: h.edges().to_vec(),
        }
    }

    pub fn num_nodes(&self) -> usize {
        self.num_nodes
    }

    pub fn candidates(&self) -> &[Hyperedge] {
        &self.candidates
    }

    pub fn len(&self) -> usize {
        self.candidates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.candidates.is_empty()
    }

    pub fn get(&self, d: usize) -> Option<&Hyperedge> {
        self.candidates.get(d)
    }

    pub fn index_of(&self, edge: &Hyperedge) -> Option<usize> {
        self.candidates.binary_search(edge).ok()
    }

    pub fn contains(&self, edge: &Hyperedge) -> bool {
        self.index_of(edge).is_some()
    }

    pub fn is_subset_of(&self, other: &CandidateSet) -> bool {
        self.candidates.iter().all(|e| other.contains(e))
    }

    /// Unweighted hypergraph over all candidates.
    pub fn to_hypergraph(&self) -> Hypergraph {
        Hypergraph {
            num_nodes: self.num_nodes,
            edges: self.candidates.clone(),
            weights: None,
        }
    }
}

/// Binary `N x D` node-candidate membership matrix, stored column-compressed.
///
/// `S[i][d] = 1` iff node `i` belongs to candidate `d`, so `S w` is the
/// weighted degree vector and `S^T d` sums a node vector over each candidate.
#[derive(Clone, Debug, PartialEq)]
pub struct SelectionMatrix {
    rows: usize,
    col_ptr: Vec<usize>,
    row_idx: Vec<usize>,
}

impl SelectionMatrix {
    pub fn from_candidates(cands: &CandidateSet) -> Self {
        let mut col_ptr = Vec::with_capacity(cands.len() + 1);
        let mut row_idx = Vec::with_capacity(cands.candidates().iter().map(Hyperedge::cardinality).sum());
        col_ptr.push(0);
        for e in cands.candidates() {
            row_idx.extend_from_slice(e.nodes());
            col_ptr.push(row_idx.len());
        }
        SelectionMatrix {
            rows: cands.num_nodes(),
            col_ptr,
            row_idx,
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.col_ptr.len() - 1
    }

    pub fn nnz(&self) -> usize {
        self.row_idx.len()
    }

    /// Row indices of the ones in column `d`.
    pub fn column(&self, d: usize) -> &[usize] {
        &self.row_idx[self.col_ptr[d]..self.col_ptr[d + 1]]
    }

    /// `S w`.
    pub fn apply(&self, w: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.rows];
        self.apply_into(w, &mut out);
        out
    }

    pub fn apply_into(&self, w: &[f64], out: &mut [f64]) {
        assert_eq!(w.len(), self.cols(), "S w: weight length");
        assert_eq!(out.len(), self.rows, "S w: output length");
        out.fill(0.0);
        for (d, &wd) in w.iter().enumerate() {
            for &i in self.column(d) {
                out[i] += wd;
            }
        }
    }

    /// `S^T v`.
    pub fn apply_transpose(&self, v: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.cols()];
        self.apply_transpose_into(v, &mut out);
        out
    }

    pub fn apply_transpose_into(&self, v: &[f64], out: &mut [f64]) {
        assert_eq!(v.len(), self.rows, "S^T v: input length");
        assert_eq!(out.len(), self.cols(), "S^T v: output length");
        for (d, o) in out.iter_mut().enumerate() {
            *o = self.column(d).iter().map(|&i| v[i]).sum();
        }
    }

    /// Largest singular value by power iteration on `S^T S`, started from the
    /// normalized all-ones vector.
    pub fn spectral_norm(&self, rel_tol: f64, max_iter: usize) -> f64 {
        if self.nnz() == 0 {
            return 0.0;
        }
        let cols = self.cols();
        let mut v = vec![1.0 / (cols as f64).sqrt(); cols];
        let mut u = vec![0.0; self.rows];
        let mut next = vec![0.0; cols];
        let mut lambda = 0.0;
        for _ in 0..max_iter {
            self.apply_into(&v, &mut u);
            self.apply_transpose_into(&u, &mut next);
            let norm = next.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm == 0.0 {
                return 0.0;
            }
            for (vi, ni) in v.iter_mut().zip(&next) {
                *vi = ni / norm;
            }
            let converged = (norm - lambda).abs() <= rel_tol * norm;
            lambda = norm;
            if converged {
                break;
            }
        }
        lambda.sqrt()
    }
}

/// Exact-match set metrics between a learned and a true edge set.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SetMetrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

/// Precision, recall and F1 of `learned` against `truth`, ignoring weights.
///
/// An empty denominator yields 0, except that two empty edge sets match perfectly.
pub fn set_metrics(learned: &Hypergraph, truth: &Hypergraph) -> Result<SetMetrics> {
    if learned.num_nodes() != truth.num_nodes() {
        return Err(Error::Dimension {
            what: "node count of learned vs truth",
            expected: truth.num_nodes(),
            found: learned.num_nodes(),
        });
    }
    if learned.is_empty() && truth.is_empty() {
        return Ok(SetMetrics {
            precision: 1.0,
            recall: 1.0,
            f1: 1.0,
        });
    }
    let hits = learned.edges().iter().filter(|e| truth.contains(e)).count() as f64;
    let ratio = |den: usize| if den == 0 { 0.0 } else { hits / den as f64 };
    let precision = ratio(learned.len());
    let recall = ratio(truth.len());
    let f1 = if precision + recall > 0.0 {
        2.0 * precision * recall / (precision + recall)
    } else {
        0.0
    };
    Ok(SetMetrics {
        precision,
        recall,
        f1,
    })
}
