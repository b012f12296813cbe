//! Benchmark harness: hyperparameter grids, method comparisons and
//! total-variation comparison tables.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use log::{info, warn};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::baselines::{hgsi_pipeline, knn_structure};
use crate::error::{Error, Result};
use crate::hypergraph::{set_metrics, CandidateSet, CardinalitySpec, Hypergraph, SelectionMatrix, SetMetrics};
use crate::reduction::{overlap_percentage, reduce_candidates, OverlapRow};
use crate::smoothness::{distance_vector, total_variation, DistanceVector, SignalMatrix, TvKind};
use crate::solver::{select_edges, solve, HslsParams, SelectionRule};

/// `10^lo, 10^(lo+1), ..., 10^hi`.
pub fn log_grid(lo_exp: i32, hi_exp: i32) -> Vec<f64> {
    (lo_exp..=hi_exp).map(|e| 10f64.powi(e)).collect()
}

/// How grid values map to solver parameters.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum GridScale {
    /// Grid values are used as-is.
    Absolute,
    /// Grid values are relative to the mean candidate distance: the solver
    /// runs on `z / mean(z)`. Scaling `z`, `alpha` and `beta` by the same
    /// factor leaves the minimizer unchanged, so this makes the grid
    /// independent of the units of the signals.
    MeanDistance,
}

impl fmt::Display for GridScale {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GridScale::Absolute => "absolute",
            GridScale::MeanDistance => "mean-distance",
        })
    }
}

impl FromStr for GridScale {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "absolute" => Ok(GridScale::Absolute),
            "mean-distance" => Ok(GridScale::MeanDistance),
            other => Err(Error::InvalidParams(format!(
                "unknown grid scale `{other}` (expected absolute or mean-distance)"
            ))),
        }
    }
}

/// `z / mean(z)` and the mean. Solving on the normalized vector with
/// `(alpha, beta)` gives the minimizer of the raw problem at
/// `(alpha * mean, beta * mean)`, with a step size that does not depend on the
/// units of the signals. An all-zero `z` is returned unchanged with factor 1.
pub fn normalize_distances(z: &DistanceVector) -> Result<(DistanceVector, f64)> {
    let v = z.as_slice();
    let mean = v.iter().sum::<f64>() / v.len().max(1) as f64;
    if mean > 0.0 && mean.is_finite() {
        Ok((DistanceVector::new(v.iter().map(|x| x / mean).collect())?, mean))
    } else {
        Ok((z.clone(), 1.0))
    }
}

/// The distance vector handed to the solver under `scale`, and its factor.
pub fn scaled_distances(z: &DistanceVector, scale: GridScale) -> Result<(DistanceVector, f64)> {
    match scale {
        GridScale::Absolute => Ok((z.clone(), 1.0)),
        GridScale::MeanDistance => normalize_distances(z),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub alpha_grid: Vec<f64>,
    pub beta_grid: Vec<f64>,
    pub tv_kind: TvKind,
    pub rule: SelectionRule,
    pub scale: GridScale,
    /// Stopping and step settings shared by every cell; alpha/beta are overridden.
    pub base: HslsParams,
}

impl GridSpec {
    /// Default 7 x 7 grid over the decades `1e-3 ..= 1e3`, relative to the
    /// mean candidate distance.
    pub fn new(tv_kind: TvKind, rule: SelectionRule) -> Self {
        GridSpec {
            alpha_grid: log_grid(-3, 3),
            beta_grid: log_grid(-3, 3),
            tv_kind,
            rule,
            scale: GridScale::MeanDistance,
            base: HslsParams::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, grid) in [("alpha", &self.alpha_grid), ("beta", &self.beta_grid)] {
            if grid.is_empty() {
                return Err(Error::InvalidParams(format!("{name} grid is empty")));
            }
            if let Some(v) = grid.iter().find(|v| !(v.is_finite() && **v > 0.0)) {
                return Err(Error::InvalidParams(format!("{name} grid value {v} is not positive")));
            }
        }
        Ok(())
    }
}

/// Candidates, distances and selection matrix for one total-variation kind.
#[derive(Clone, Debug)]
pub struct LearningProblem {
    pub candidates: CandidateSet,
    pub z: DistanceVector,
    pub s: SelectionMatrix,
    pub kind: TvKind,
}

impl LearningProblem {
    pub fn new(x: &SignalMatrix, candidates: CandidateSet, kind: TvKind) -> Result<Self> {
        let z = distance_vector(x, &candidates, kind)?;
        let s = SelectionMatrix::from_candidates(&candidates);
        Ok(LearningProblem {
            candidates,
            z,
            s,
            kind,
        })
    }

    /// Total variation of an unweighted selection, summed in canonical edge order.
    fn structure_tv(&self, h: &Hypergraph) -> f64 {
        h.edges()
            .iter()
            .map(|e| self.candidates.index_of(e).map_or(0.0, |d| self.z.as_slice()[d]))
            .sum()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridCell {
    /// Grid values; the raw-scale equivalents are these times
    /// [`GridResult::scale_factor`].
    pub alpha: f64,
    pub beta: f64,
    pub iterations: usize,
    pub converged: bool,
    pub edge_count: usize,
    pub metrics: Option<SetMetrics>,
    /// Unit-weight total variation of the selected structure.
    pub total_variation: f64,
    pub learned: Option<Hypergraph>,
    /// Populated when the cell failed (e.g. divergence); other fields are then zero.
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridResult {
    pub cells: Vec<GridCell>,
    pub best: Option<usize>,
    /// Mean candidate distance under [`GridScale::MeanDistance`], else 1.
    pub scale_factor: f64,
}

/// Best cell by max F1 (with truth) or min total variation, first index on ties.
pub fn best_cell(cells: &[GridCell]) -> Option<usize> {
    let ok = cells.iter().enumerate().filter(|(_, c)| c.error.is_none());
    if cells.iter().any(|c| c.metrics.is_some()) {
        ok.fold(None, |best: Option<(usize, f64)>, (i, c)| {
            let f1 = c.metrics.map_or(f64::NEG_INFINITY, |m| m.f1);
            match best {
                Some((_, b)) if b >= f1 => best,
                _ => Some((i, f1)),
            }
        })
        .map(|(i, _)| i)
    } else {
        ok.fold(None, |best: Option<(usize, f64)>, (i, c)| match best {
            Some((_, b)) if b <= c.total_variation => best,
            _ => Some((i, c.total_variation)),
        })
        .map(|(i, _)| i)
    }
}

fn run_cell(
    problem: &LearningProblem,
    z: &DistanceVector,
    params: HslsParams,
    rule: SelectionRule,
    truth: Option<&Hypergraph>,
) -> GridCell {
    let failed = |msg: String| GridCell {
        alpha: params.alpha,
        beta: params.beta,
        iterations: 0,
        converged: false,
        edge_count: 0,
        metrics: None,
        total_variation: 0.0,
        learned: None,
        error: Some(msg),
    };
    let state = match solve(z, &problem.s, &params, None, None) {
        Ok(s) => s,
        Err(e) => return failed(e.to_string()),
    };
    let selection = match select_edges(&state.w, &problem.candidates, rule) {
        Ok(s) => s,
        Err(e) => return failed(e.to_string()),
    };
    let learned = selection.hypergraph;
    let metrics = match truth.map(|t| set_metrics(&learned, t)).transpose() {
        Ok(m) => m,
        Err(e) => return failed(e.to_string()),
    };
    GridCell {
        alpha: params.alpha,
        beta: params.beta,
        iterations: state.iterations,
        converged: state.converged,
        edge_count: learned.len(),
        metrics,
        total_variation: problem.structure_tv(&learned.unweighted()),
        learned: Some(learned),
        error: None,
    }
}

/// One solve per `(alpha, beta)` cell, alpha-major. Cell failures are
/// recorded, not fatal.
pub fn grid_search(problem: &LearningProblem, grid: &GridSpec, truth: Option<&Hypergraph>) -> Result<GridResult> {
    grid.validate()?;
    if let Some(t) = truth {
        if t.num_nodes() != problem.candidates.num_nodes() {
            return Err(Error::Dimension {
                what: "node count of truth vs candidates",
                expected: problem.candidates.num_nodes(),
                found: t.num_nodes(),
            });
        }
    }
    let (z, scale_factor) = scaled_distances(&problem.z, grid.scale)?;
    let params: Vec<HslsParams> = grid
        .alpha_grid
        .iter()
        .flat_map(|&alpha| {
            grid.beta_grid.iter().map(move |&beta| HslsParams {
                alpha,
                beta,
                ..grid.base
            })
        })
        .collect();
    let cells: Vec<GridCell> = params
        .par_iter()
        .map(|&p| run_cell(problem, &z, p, grid.rule, truth))
        .collect();
    for c in cells.iter().filter(|c| c.error.is_some()) {
        warn!("grid cell alpha={} beta={} failed: {}", c.alpha, c.beta, c.error.as_deref().unwrap_or(""));
    }
    let best = best_cell(&cells);
    Ok(GridResult {
        cells,
        best,
        scale_factor,
    })
}

/// A structure learning method under comparison.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Method {
    Hsls(TvKind),
    Hgsi,
    KnnDirect,
}

impl Method {
    pub fn all() -> Vec<Method> {
        let mut m: Vec<Method> = TvKind::ALL.iter().map(|&k| Method::Hsls(k)).collect();
        m.push(Method::Hgsi);
        m.push(Method::KnnDirect);
        m
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Method::Hsls(k) => write!(f, "hsls:{k}"),
            Method::Hgsi => f.write_str("hgsi"),
            Method::KnnDirect => f.write_str("knn"),
        }
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        match s {
            "hgsi" => Ok(Method::Hgsi),
            "knn" => Ok(Method::KnnDirect),
            _ => match s.strip_prefix("hsls:") {
                Some(kind) => Ok(Method::Hsls(kind.parse()?)),
                None => Err(Error::InvalidParams(format!(
                    "unknown method `{s}` (expected hsls:<tv>, hgsi or knn)"
                ))),
            },
        }
    }
}

/// How many edges the learned structures keep.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum SelectionPolicy {
    /// Top-|truth|, the equal-footing convention when a ground truth exists.
    TruthSize,
    /// Top-|K-NN baseline|, for comparisons without ground truth.
    BaselineSize,
    Fixed(SelectionRule),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CompareSettings {
    pub alpha_grid: Vec<f64>,
    pub beta_grid: Vec<f64>,
    pub base: HslsParams,
    pub policy: SelectionPolicy,
    pub scale: GridScale,
    /// Distance kind used by HGSI.
    pub hgsi_kind: TvKind,
}

impl Default for CompareSettings {
    fn default() -> Self {
        CompareSettings {
            alpha_grid: log_grid(-3, 3),
            beta_grid: log_grid(-3, 3),
            base: HslsParams::default(),
            policy: SelectionPolicy::TruthSize,
            scale: GridScale::MeanDistance,
            hgsi_kind: TvKind::MAX_SQUARE,
        }
    }
}

/// One row of a method comparison.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub method: Method,
    pub tv_kind: Option<TvKind>,
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    /// Multiply `alpha` and `beta` by this for their raw-distance values.
    pub scale_factor: Option<f64>,
    pub selection: Option<SelectionRule>,
    pub learned: Hypergraph,
    pub metrics: Option<SetMetrics>,
    /// Unit-weight total variation of the learned structure per kind name.
    pub total_variation: BTreeMap<String, f64>,
    pub edge_count: usize,
    pub num_candidates: usize,
    pub wall_time_secs: f64,
    pub solver_iterations: Option<usize>,
    pub converged: Option<bool>,
    pub notes: Vec<String>,
}

fn tv_by_kind(h: &Hypergraph, x: &SignalMatrix) -> Result<BTreeMap<String, f64>> {
    let unit = h.unweighted();
    TvKind::ALL
        .iter()
        .map(|&k| Ok((k.name().to_string(), total_variation(&unit, x, k)?)))
        .collect()
}

fn resolve_rule(policy: SelectionPolicy, truth: Option<&Hypergraph>, baseline: &Hypergraph) -> Result<SelectionRule> {
    match policy {
        SelectionPolicy::TruthSize => match truth {
            Some(t) if !t.is_empty() => Ok(SelectionRule::TopK(t.len())),
            _ => Err(Error::InvalidParams("top-|truth| selection needs a nonempty ground truth".into())),
        },
        SelectionPolicy::BaselineSize => Ok(SelectionRule::TopK(baseline.len().max(1))),
        SelectionPolicy::Fixed(rule) => Ok(rule),
    }
}

fn clamp_rule(rule: SelectionRule, available: usize) -> SelectionRule {
    match rule {
        SelectionRule::TopK(m) if m > available => SelectionRule::TopK(available),
        r => r,
    }
}

/// Runs each method on the same signals. HSLS methods share one reduced
/// candidate set built from `spec`'s neighbor budgets.
pub fn compare_methods(
    x: &SignalMatrix,
    truth: Option<&Hypergraph>,
    spec: &CardinalitySpec,
    methods: &[Method],
    settings: &CompareSettings,
) -> Result<Vec<RunReport>> {
    if let Some(t) = truth {
        if t.num_nodes() != x.num_nodes() {
            return Err(Error::Dimension {
                what: "node count of truth vs signals",
                expected: x.num_nodes(),
                found: t.num_nodes(),
            });
        }
    }
    let baseline = knn_structure(x, spec)?;
    let rule = resolve_rule(settings.policy, truth, &baseline)?;
    let needs_reduction = methods.iter().any(|m| matches!(m, Method::Hsls(_)));
    let candidates = if needs_reduction {
        Some(reduce_candidates(x, spec)?)
    } else {
        None
    };
    if let (Some(c), Some(t)) = (&candidates, truth) {
        if let Ok(o) = overlap_percentage(t, c) {
            info!("reduced candidate set: {} candidates, truth overlap {o}%", c.len());
        }
    }

    methods
        .par_iter()
        .map(|&method| {
            let start = Instant::now();
            let mut notes = Vec::new();
            let mut scale_factor = None;
            let (learned, tv_kind, alpha, beta, selection, iterations, converged, num_candidates) = match method {
                Method::Hsls(kind) => {
                    let cands = candidates.clone().expect("reduced for HSLS");
                    let problem = LearningProblem::new(x, cands, kind)?;
                    let rule = clamp_rule(rule, problem.candidates.len());
                    let grid = GridSpec {
                        alpha_grid: settings.alpha_grid.clone(),
                        beta_grid: settings.beta_grid.clone(),
                        tv_kind: kind,
                        rule,
                        scale: settings.scale,
                        base: settings.base,
                    };
                    let result = grid_search(&problem, &grid, truth)?;
                    let best = result
                        .best
                        .ok_or_else(|| Error::Numeric(format!("every grid cell failed for {method}")))?;
                    let cell = &result.cells[best];
                    scale_factor = Some(result.scale_factor);
                    notes.push(if truth.is_some() { "grid=max-f1" } else { "grid=min-tv" }.to_string());
                    (
                        cell.learned.clone().expect("successful cell"),
                        Some(kind),
                        Some(cell.alpha),
                        Some(cell.beta),
                        Some(rule),
                        Some(cell.iterations),
                        Some(cell.converged),
                        problem.candidates.len(),
                    )
                }
                Method::Hgsi => {
                    let r = hgsi_pipeline(x, spec.cards(), settings.hgsi_kind, rule)?;
                    let used = clamp_rule(rule, r.candidates.len());
                    if matches!(settings.policy, SelectionPolicy::TruthSize) {
                        notes.push("selection=top-|truth|".to_string());
                    }
                    (r.selected, Some(settings.hgsi_kind), None, None, Some(used), None, None, r.candidates.len())
                }
                Method::KnnDirect => {
                    let n = baseline.len();
                    (baseline.clone(), None, None, None, None, None, None, n)
                }
            };
            let metrics = truth.map(|t| set_metrics(&learned, t)).transpose()?;
            Ok(RunReport {
                method,
                tv_kind,
                alpha,
                beta,
                scale_factor,
                selection,
                edge_count: learned.len(),
                total_variation: tv_by_kind(&learned, x)?,
                learned,
                metrics,
                num_candidates,
                wall_time_secs: start.elapsed().as_secs_f64(),
                solver_iterations: iterations,
                converged,
                notes,
            })
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TvRow {
    pub structure: String,
    pub signals: String,
    pub kind: TvKind,
    pub total_variation: f64,
    pub edge_count: usize,
}

/// Unit-weight total variation of every named structure on every named signal set.
pub fn tv_table(
    structures: &[(&str, &Hypergraph)],
    signals: &[(&str, &SignalMatrix)],
    kinds: &[TvKind],
) -> Result<Vec<TvRow>> {
    let mut rows = Vec::new();
    for (sname, h) in structures {
        let unit = h.unweighted();
        for (xname, x) in signals {
            if x.num_nodes() != h.num_nodes() {
                return Err(Error::Dimension {
                    what: "node count of signals vs structure",
                    expected: h.num_nodes(),
                    found: x.num_nodes(),
                });
            }
            for &kind in kinds {
                rows.push(TvRow {
                    structure: sname.to_string(),
                    signals: xname.to_string(),
                    kind,
                    total_variation: total_variation(&unit, x, kind)?,
                    edge_count: h.len(),
                });
            }
        }
    }
    Ok(rows)
}

/// Baseline (`K-NN`) vs learned (`HSLS`) structure on each signal set under one kind.
pub fn tv_comparison(
    base: &Hypergraph,
    learned: &Hypergraph,
    signals: &[(&str, &SignalMatrix)],
    kind: TvKind,
) -> Result<Vec<TvRow>> {
    tv_table(&[("K-NN", base), ("HSLS", learned)], signals, &[kind])
}

pub fn tv_rows_csv(rows: &[TvRow]) -> String {
    let mut out = String::from("# hsls-format v1\nstructure,signals,tv_kind,total_variation,edge_count\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            r.structure, r.signals, r.kind, r.total_variation, r.edge_count
        ));
    }
    out
}

/// Table with one column per kind and, per structure, a `TV` row for each
/// signal set and an `|E(H)|` row.
pub fn tv_rows_text(rows: &[TvRow]) -> String {
    let mut kinds: Vec<TvKind> = Vec::new();
    let mut labels: Vec<String> = Vec::new();
    let mut cells: BTreeMap<(String, String), String> = BTreeMap::new();
    let single_signal_set = rows.iter().all(|r| r.signals == rows[0].signals);
    for r in rows {
        if !kinds.contains(&r.kind) {
            kinds.push(r.kind);
        }
        let tv_label = if single_signal_set {
            format!("{} TV", r.structure)
        } else {
            format!("{} TV ({})", r.structure, r.signals)
        };
        let e_label = format!("{} |E(H)|", r.structure);
        for (label, value) in [
            (tv_label, format!("{:.1}", r.total_variation)),
            (e_label, r.edge_count.to_string()),
        ] {
            if !labels.contains(&label) {
                labels.push(label.clone());
            }
            cells.insert((label, r.kind.name().to_string()), value);
        }
    }
    let mut table = vec![std::iter::once(String::new())
        .chain(kinds.iter().map(|k| k.label().to_string()))
        .collect::<Vec<_>>()];
    for label in &labels {
        let mut row = vec![label.clone()];
        for k in &kinds {
            row.push(cells.get(&(label.clone(), k.name().to_string())).cloned().unwrap_or_default());
        }
        table.push(row);
    }
    aligned(&table)
}

fn aligned(table: &[Vec<String>]) -> String {
    let cols = table.iter().map(Vec::len).max().unwrap_or(0);
    let widths: Vec<usize> = (0..cols)
        .map(|c| table.iter().filter_map(|r| r.get(c)).map(String::len).max().unwrap_or(0))
        .collect();
    let mut out = String::new();
    for row in table {
        let line: Vec<String> = row
            .iter()
            .enumerate()
            .map(|(c, v)| if c == 0 { format!("{v:<w$}", w = widths[c]) } else { format!("{v:>w$}", w = widths[c]) })
            .collect();
        out.push_str(line.join("  ").trim_end());
        out.push('\n');
    }
    out
}

fn opt<T: fmt::Display>(v: Option<T>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

const REPORT_COLUMNS: [&str; 18] = [
    "trial",
    "method",
    "tv_kind",
    "alpha",
    "beta",
    "scale_factor",
    "selection",
    "precision",
    "recall",
    "f1",
    "edge_count",
    "num_candidates",
    "tv_sum_square",
    "tv_sum_abs",
    "tv_max_abs",
    "tv_max_square",
    "solver_iterations",
    "notes",
];

fn report_fields(trial: usize, r: &RunReport) -> Vec<String> {
    let tv = |k: TvKind| opt(r.total_variation.get(k.name()));
    vec![
        trial.to_string(),
        r.method.to_string(),
        opt(r.tv_kind),
        opt(r.alpha),
        opt(r.beta),
        opt(r.scale_factor),
        opt(r.selection),
        opt(r.metrics.map(|m| m.precision)),
        opt(r.metrics.map(|m| m.recall)),
        opt(r.metrics.map(|m| m.f1)),
        r.edge_count.to_string(),
        r.num_candidates.to_string(),
        tv(TvKind::SUM_SQUARE),
        tv(TvKind::SUM_ABSOLUTE),
        tv(TvKind::MAX_ABSOLUTE),
        tv(TvKind::MAX_SQUARE),
        opt(r.solver_iterations),
        r.notes.join(";"),
    ]
}

/// Method comparison as CSV. Wall times are left out so that the table is a
/// pure function of the inputs.
pub fn reports_csv(trials: &[(usize, Vec<RunReport>)]) -> String {
    let mut out = String::from("# hsls-format v1\n");
    out.push_str(&REPORT_COLUMNS.join(","));
    out.push('\n');
    for (trial, reports) in trials {
        for r in reports {
            out.push_str(&report_fields(*trial, r).join(","));
            out.push('\n');
        }
    }
    out
}

/// Precision / recall / F1 table in aligned plain text.
pub fn reports_text(reports: &[RunReport]) -> String {
    let mut table = vec![["method", "f1", "precision", "recall", "edges"].map(String::from).to_vec()];
    for r in reports {
        let m = |f: fn(&SetMetrics) -> f64| r.metrics.as_ref().map_or(String::from("-"), |m| format!("{:.4}", f(m)));
        table.push(vec![
            r.method.to_string(),
            m(|m| m.f1),
            m(|m| m.precision),
            m(|m| m.recall),
            r.edge_count.to_string(),
        ]);
    }
    aligned(&table)
}

pub fn grid_csv(grid: &GridResult) -> String {
    let mut out = format!("# hsls-format v1\n# scale_factor: {}\n", grid.scale_factor);
    out.push_str(
        "alpha,beta,iterations,converged,edge_count,precision,recall,f1,total_variation,best,error\n",
    );
    for (i, c) in grid.cells.iter().enumerate() {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{}\n",
            c.alpha,
            c.beta,
            c.iterations,
            c.converged,
            c.edge_count,
            opt(c.metrics.map(|m| m.precision)),
            opt(c.metrics.map(|m| m.recall)),
            opt(c.metrics.map(|m| m.f1)),
            c.total_variation,
            grid.best == Some(i),
            c.error.as_deref().unwrap_or("").replace(',', ";"),
        ));
    }
    out
}

pub fn overlap_csv(rows: &[OverlapRow]) -> String {
    let mut out = String::from("# hsls-format v1\nr,cardinality_schedule,overlap_percent,num_candidates\n");
    for r in rows {
        let schedule: Vec<String> = r.schedule.iter().map(usize::to_string).collect();
        out.push_str(&format!(
            "{},{},{},{}\n",
            r.r,
            schedule.join(";"),
            r.overlap_percent,
            r.num_candidates
        ));
    }
    out
}

/// Bar chart of overlap percentage against the neighbor budget.
pub fn overlap_svg(rows: &[OverlapRow]) -> String {
    let bar = 28.0;
    let gap = 8.0;
    let height = 200.0;
    let left = 48.0;
    let top = 16.0;
    let width = left + rows.len() as f64 * (bar + gap) + gap;
    let mut svg = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\">\n",
        w = width,
        h = top + height + 40.0
    );
    svg.push_str(&format!(
        "<line x1=\"{left}\" y1=\"{top}\" x2=\"{left}\" y2=\"{y}\" stroke=\"black\"/>\n",
        y = top + height
    ));
    for pct in [0, 50, 100] {
        let y = top + height * (1.0 - pct as f64 / 100.0);
        svg.push_str(&format!(
            "<text x=\"{x}\" y=\"{y}\" font-size=\"10\" text-anchor=\"end\">{pct}%</text>\n",
            x = left - 4.0,
            y = y + 3.0
        ));
    }
    for (k, r) in rows.iter().enumerate() {
        let x = left + gap + k as f64 * (bar + gap);
        let h = height * r.overlap_percent / 100.0;
        let color = if r.overlap_percent >= 100.0 { "#2e7d32" } else { "#1565c0" };
        svg.push_str(&format!(
            "<rect x=\"{x}\" y=\"{y}\" width=\"{bar}\" height=\"{h}\" fill=\"{color}\"/>\n",
            y = top + height - h
        ));
        svg.push_str(&format!(
            "<text x=\"{cx}\" y=\"{y}\" font-size=\"10\" text-anchor=\"middle\">{r}</text>\n",
            cx = x + bar / 2.0,
            y = top + height + 14.0,
            r = r.r
        ));
    }
    svg.push_str(&format!(
        "<text x=\"{cx}\" y=\"{y}\" font-size=\"11\" text-anchor=\"middle\">nearest neighbors</text>\n</svg>\n",
        cx = width / 2.0,
        y = top + height + 32.0
    ));
    svg
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hypergraph::{enumerate_full_candidates, Hyperedge};
    use crate::synth::synthesize;

    fn edge(v: &[usize]) -> Hyperedge {
        Hyperedge::new(v.iter().copied()).unwrap()
    }

    fn small_problem() -> (SignalMatrix, Hypergraph, LearningProblem) {
        let spec = CardinalitySpec::new(vec![3]).unwrap();
        let (truth, x) = synthesize(9, &spec, 3, 100, 1e-3, 5).unwrap();
        let cands = enumerate_full_candidates(9, &spec).unwrap();
        let problem = LearningProblem::new(&x, cands, TvKind::MAX_SQUARE).unwrap();
        (x, truth, problem)
    }

    #[test]
    fn log_grid_decades() {
        assert_eq!(log_grid(-3, 3), vec![1e-3, 1e-2, 1e-1, 1.0, 1e1, 1e2, 1e3]);
    }

    #[test]
    fn one_by_one_grid_is_a_single_solve() {
        let (_, truth, problem) = small_problem();
        let mut grid = GridSpec::new(TvKind::MAX_SQUARE, SelectionRule::TopK(truth.len()));
        grid.alpha_grid = vec![1.0];
        grid.beta_grid = vec![1.0];
        grid.scale = GridScale::Absolute;
        let r = grid_search(&problem, &grid, Some(&truth)).unwrap();
        assert_eq!(r.cells.len(), 1);
        assert_eq!(r.best, Some(0));
        let st = solve(&problem.z, &problem.s, &HslsParams::default(), None, None).unwrap();
        let sel = select_edges(&st.w, &problem.candidates, SelectionRule::TopK(truth.len())).unwrap();
        assert_eq!(r.cells[0].learned.as_ref().unwrap(), &sel.hypergraph);
    }

    #[test]
    fn mean_distance_grid_is_unit_free() {
        let (x, truth, problem) = small_problem();
        let mut grid = GridSpec::new(TvKind::MAX_SQUARE, SelectionRule::TopK(truth.len()));
        grid.alpha_grid = vec![0.1, 1.0];
        grid.beta_grid = vec![0.1, 1.0];
        let a = grid_search(&problem, &grid, Some(&truth)).unwrap();
        let scaled: Vec<f64> = x.as_slice().iter().map(|v| v * 4.0).collect();
        let x4 = SignalMatrix::new(x.num_nodes(), x.num_obs(), scaled).unwrap();
        let p4 = LearningProblem::new(&x4, problem.candidates.clone(), TvKind::MAX_SQUARE).unwrap();
        let b = grid_search(&p4, &grid, Some(&truth)).unwrap();
        assert_eq!(b.scale_factor, 16.0 * a.scale_factor);
        assert_eq!(a.best, b.best);
        for (ca, cb) in a.cells.iter().zip(&b.cells) {
            assert_eq!(ca.learned.as_ref().unwrap().edges(), cb.learned.as_ref().unwrap().edges());
            assert_eq!(ca.alpha, cb.alpha);
        }
    }

    #[test]
    fn grid_scale_names() {
        for s in [GridScale::Absolute, GridScale::MeanDistance] {
            assert_eq!(s.to_string().parse::<GridScale>().unwrap(), s);
        }
        assert!("relative".parse::<GridScale>().is_err());
    }

    #[test]
    fn best_is_argmax_f1_and_deterministic() {
        let (_, truth, problem) = small_problem();
        let mut grid = GridSpec::new(TvKind::MAX_SQUARE, SelectionRule::TopK(truth.len()));
        grid.alpha_grid = vec![0.1, 1.0, 1.0];
        grid.beta_grid = vec![0.1, 10.0];
        let r = grid_search(&problem, &grid, Some(&truth)).unwrap();
        let best = r.cells[r.best.unwrap()].metrics.unwrap().f1;
        assert!(r.cells.iter().all(|c| c.metrics.unwrap().f1 <= best));
        assert_eq!(best_cell(&r.cells), r.best);
        // rows 1 and 2 use identical alpha
        assert_eq!(r.cells[2], r.cells[4]);
        assert_eq!(r.cells[3], r.cells[5]);
    }

    #[test]
    fn best_without_truth_minimizes_tv() {
        let (_, _, problem) = small_problem();
        let mut grid = GridSpec::new(TvKind::MAX_SQUARE, SelectionRule::TopK(3));
        grid.alpha_grid = vec![0.01, 1.0, 100.0];
        grid.beta_grid = vec![0.01, 1.0];
        let r = grid_search(&problem, &grid, None).unwrap();
        let best = r.cells[r.best.unwrap()].total_variation;
        assert!(r.cells.iter().all(|c| c.total_variation >= best));
    }

    #[test]
    fn grid_validation() {
        let (_, _, problem) = small_problem();
        let mut grid = GridSpec::new(TvKind::MAX_SQUARE, SelectionRule::TopK(3));
        grid.alpha_grid.clear();
        assert!(grid_search(&problem, &grid, None).is_err());
        grid.alpha_grid = vec![-1.0];
        assert!(grid_search(&problem, &grid, None).is_err());
    }

    #[test]
    fn tv_comparison_rows() {
        let (x, truth, _) = small_problem();
        let rows = tv_comparison(&truth, &truth, &[("x", &x)], TvKind::MAX_SQUARE).unwrap();
        assert_eq!(rows.len(), 2);
        assert_eq!(rows[0].total_variation, rows[1].total_variation);
        assert_eq!(rows[0].total_variation, total_variation(&truth, &x, TvKind::MAX_SQUARE).unwrap());
        assert_eq!(rows[0].edge_count, truth.len());
        let text = tv_rows_text(&rows);
        assert!(text.contains("K-NN TV"));
        assert!(text.contains("HSLS |E(H)|"));
        let two = tv_comparison(&truth, &truth, &[("a", &x), ("b", &x)], TvKind::MAX_SQUARE).unwrap();
        assert!(tv_rows_text(&two).contains("HSLS TV (b)"));
    }

    #[test]
    fn zero_distance_edge_leaves_tv_unchanged() {
        let x = SignalMatrix::from_rows(&[vec![1.0], vec![1.0], vec![1.0], vec![4.0]]).unwrap();
        let base = Hypergraph::new(4, vec![edge(&[2, 3])]).unwrap();
        let more = Hypergraph::new(4, vec![edge(&[2, 3]), edge(&[0, 1, 2])]).unwrap();
        let rows = tv_comparison(&base, &more, &[("x", &x)], TvKind::SUM_SQUARE).unwrap();
        assert_eq!(rows[0].total_variation, rows[1].total_variation);
        assert_eq!(rows[1].edge_count, 2);
    }

    #[test]
    fn tv_comparison_dimension_error() {
        let (x, _, _) = small_problem();
        let other = Hypergraph::new(4, vec![edge(&[0, 1])]).unwrap();
        assert!(tv_comparison(&other, &other, &[("x", &x)], TvKind::SUM_SQUARE).is_err());
    }

    #[test]
    fn method_names_round_trip() {
        for m in Method::all() {
            assert_eq!(m.to_string().parse::<Method>().unwrap(), m);
        }
        assert!("hsls".parse::<Method>().is_err());
    }

    #[test]
    fn compare_methods_reports() {
        let spec = CardinalitySpec::new(vec![3]).unwrap();
        let (truth, x) = synthesize(12, &spec, 4, 120, 1e-3, 2).unwrap();
        let spec = CardinalitySpec::with_uniform_neighbors(vec![3], 4).unwrap();
        let settings = CompareSettings {
            alpha_grid: vec![0.1, 1.0],
            beta_grid: vec![0.1, 1.0],
            ..Default::default()
        };
        let reports = compare_methods(&x, Some(&truth), &spec, &Method::all(), &settings).unwrap();
        assert_eq!(reports.len(), 6);
        for r in &reports {
            let m = r.metrics.unwrap();
            assert!(m.f1.is_finite() && (0.0..=1.0).contains(&m.f1));
            if m.precision + m.recall > 0.0 {
                assert!((m.f1 - 2.0 * m.precision * m.recall / (m.precision + m.recall)).abs() < 1e-12);
            }
            assert_eq!(r.edge_count, r.learned.len());
            assert_eq!(r.total_variation.len(), 4);
            let json = serde_json::to_string(r).unwrap();
            let back: RunReport = serde_json::from_str(&json).unwrap();
            assert_eq!(&back, r);
        }
        let hsls: Vec<&RunReport> = reports.iter().filter(|r| matches!(r.method, Method::Hsls(_))).collect();
        assert!(hsls.iter().all(|r| r.num_candidates == hsls[0].num_candidates));
        assert!(hsls.iter().all(|r| r.edge_count == truth.len()));
        let csv = reports_csv(&[(0, reports.clone())]);
        assert_eq!(csv.lines().count(), 2 + 6);
        assert!(reports_text(&reports).contains("hgsi"));
    }

    #[test]
    fn overlap_outputs() {
        let rows = vec![
            OverlapRow { r: 2, schedule: vec![2], overlap_percent: 50.0, num_candidates: 10 },
            OverlapRow { r: 3, schedule: vec![3], overlap_percent: 100.0, num_candidates: 20 },
        ];
        let csv = overlap_csv(&rows);
        assert!(csv.contains("r,cardinality_schedule,overlap_percent,num_candidates\n2,2,50,10\n3,3,100,20\n"));
        let svg = overlap_svg(&rows);
        assert!(svg.starts_with("<svg"));
        assert_eq!(svg.matches("<rect").count(), 2);
    }
}
