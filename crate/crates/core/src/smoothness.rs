//! Hyperedge distance vectors and hypergraph total variation.
//!
//! Each total-variation measure is a pairwise difference between node
//! time-series combined over every unordered member pair of a hyperedge,
//! either summed or maximized. The resulting per-candidate distance `z_d`
//! makes total variation linear in the weights: `TV(w) = z^T w`.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hypergraph::{CandidateSet, Hyperedge, Hypergraph};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Aggregator {
    Sum,
    Max,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PairMeasure {
    SquaredEuclidean,
    L1,
}

/// One of the four total-variation measures.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TvKind {
    pub aggregator: Aggregator,
    pub pair_measure: PairMeasure,
}

impl TvKind {
    pub const SUM_SQUARE: TvKind = TvKind::new(Aggregator::Sum, PairMeasure::SquaredEuclidean);
    pub const SUM_ABSOLUTE: TvKind = TvKind::new(Aggregator::Sum, PairMeasure::L1);
    pub const MAX_ABSOLUTE: TvKind = TvKind::new(Aggregator::Max, PairMeasure::L1);
    pub const MAX_SQUARE: TvKind = TvKind::new(Aggregator::Max, PairMeasure::SquaredEuclidean);

    pub const ALL: [TvKind; 4] = [
        TvKind::SUM_SQUARE,
        TvKind::SUM_ABSOLUTE,
        TvKind::MAX_ABSOLUTE,
        TvKind::MAX_SQUARE,
    ];

    pub const fn new(aggregator: Aggregator, pair_measure: PairMeasure) -> Self {
        TvKind {
            aggregator,
            pair_measure,
        }
    }

    /// Command-line name, e.g. `max-square`.
    pub fn name(&self) -> &'static str {
        match (self.aggregator, self.pair_measure) {
            (Aggregator::Sum, PairMeasure::SquaredEuclidean) => "sum-square",
            (Aggregator::Sum, PairMeasure::L1) => "sum-abs",
            (Aggregator::Max, PairMeasure::L1) => "max-abs",
            (Aggregator::Max, PairMeasure::SquaredEuclidean) => "max-square",
        }
    }

    /// Display label, e.g. `Max-Square`.
    pub fn label(&self) -> &'static str {
        match (self.aggregator, self.pair_measure) {
            (Aggregator::Sum, PairMeasure::SquaredEuclidean) => "Sum-Square",
            (Aggregator::Sum, PairMeasure::L1) => "Sum-Absolute",
            (Aggregator::Max, PairMeasure::L1) => "Max-Absolute",
            (Aggregator::Max, PairMeasure::SquaredEuclidean) => "Max-Square",
        }
    }
}

impl fmt::Display for TvKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for TvKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "sum-square" => Ok(TvKind::SUM_SQUARE),
            "sum-abs" | "sum-absolute" => Ok(TvKind::SUM_ABSOLUTE),
            "max-abs" | "max-absolute" => Ok(TvKind::MAX_ABSOLUTE),
            "max-square" => Ok(TvKind::MAX_SQUARE),
            other => Err(Error::InvalidParams(format!(
                "unknown total variation `{other}` (expected sum-square, sum-abs, max-abs or max-square)"
            ))),
        }
    }
}

/// `N x P` node signals, row `i` is the time-series of node `i`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SignalMatrix {
    num_nodes: usize,
    num_obs: usize,
    data: Vec<f64>,
}

impl SignalMatrix {
    /// Row-major data of length `num_nodes * num_obs`.
    pub fn new(num_nodes: usize, num_obs: usize, data: Vec<f64>) -> Result<Self> {
        if num_nodes < 2 {
            return Err(Error::InvalidParams(format!("signal matrix needs at least 2 nodes, got {num_nodes}")));
        }
        if num_obs < 1 {
            return Err(Error::InvalidParams("signal matrix needs at least 1 observation".into()));
        }
        if data.len() != num_nodes * num_obs {
            return Err(Error::Dimension {
                what: "signal matrix data",
                expected: num_nodes * num_obs,
                found: data.len(),
            });
        }
        if let Some(pos) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidParams(format!(
                "non-finite signal value at node {}, observation {}",
                pos / num_obs,
                pos % num_obs
            )));
        }
        Ok(SignalMatrix {
            num_nodes,
            num_obs,
            data,
        })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let p = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().find(|r| r.len() != p) {
            return Err(Error::Dimension {
                what: "signal row length",
                expected: p,
                found: bad.len(),
            });
        }
        Self::new(rows.len(), p, rows.concat())
    }

    pub fn num_nodes(&self) -> usize {
        self.num_nodes
    }

    pub fn num_obs(&self) -> usize {
        self.num_obs
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.num_obs..(i + 1) * self.num_obs]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }
}

/// Per-candidate distances aligned with a [`CandidateSet`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistanceVector(Vec<f64>);

impl DistanceVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some(v) = values.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
            return Err(Error::InvalidParams(format!("distance {v} is not finite and non-negative")));
        }
        Ok(DistanceVector(values))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

pub fn pair_distance(xi: &[f64], xj: &[f64], measure: PairMeasure) -> Result<f64> {
    if xi.len() != xj.len() {
        return Err(Error::Dimension {
            what: "pair distance",
            expected: xi.len(),
            found: xj.len(),
        });
    }
    Ok(pair_distance_unchecked(xi, xj, measure))
}

#[inline]
fn pair_distance_unchecked(xi: &[f64], xj: &[f64], measure: PairMeasure) -> f64 {
    let diffs = xi.iter().zip(xj).map(|(a, b)| a - b);
    match measure {
        PairMeasure::SquaredEuclidean => diffs.map(|d| d * d).sum(),
        PairMeasure::L1 => diffs.map(f64::abs).sum(),
    }
}

/// Distance of a single hyperedge under `kind`. Indices must be `< N`.
pub fn edge_distance(x: &SignalMatrix, edge: &Hyperedge, kind: TvKind) -> f64 {
    let pairs = edge
        .pairs()
        .map(|(i, j)| pair_distance_unchecked(x.row(i), x.row(j), kind.pair_measure));
    match kind.aggregator {
        Aggregator::Sum => pairs.sum(),
        Aggregator::Max => pairs.fold(0.0, f64::max),
    }
}

/// The distance vector `z` for every candidate, in candidate order.
pub fn distance_vector(x: &SignalMatrix, cands: &CandidateSet, kind: TvKind) -> Result<DistanceVector> {
    check_nodes(x, cands.num_nodes())?;
    if let Some(e) = cands.candidates().iter().find(|e| e.max_node() >= x.num_nodes()) {
        return Err(Error::IndexOutOfRange {
            index: e.max_node(),
            num_nodes: x.num_nodes(),
        });
    }
    let z = cands
        .candidates()
        .par_iter()
        .map(|e| edge_distance(x, e, kind))
        .collect();
    Ok(DistanceVector(z))
}

/// `sum_d w_d z_d` over the hypergraph's edges (unit weights when unweighted).
pub fn total_variation(h: &Hypergraph, x: &SignalMatrix, kind: TvKind) -> Result<f64> {
    check_nodes(x, h.num_nodes())?;
    Ok(h.edges()
        .iter()
        .enumerate()
        .map(|(d, e)| h.weight(d) * edge_distance(x, e, kind))
        .sum())
}

fn check_nodes(x: &SignalMatrix, n: usize) -> Result<()> {
    if x.num_nodes() != n {
        return Err(Error::Dimension {
            what: "node count of signals vs structure",
            expected: n,
            found: x.num_nodes(),
        });
    }
    Ok(())
}
