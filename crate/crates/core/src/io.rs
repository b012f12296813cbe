//! On-disk formats: signal CSVs, structure files, incidence matrices, label
//! maps and flat `key=value` experiment configs.
//!
//! Every writer starts with the header comment `# hsls-format v1` and prints
//! floats with the shortest representation that round-trips.

use std::collections::{BTreeSet, HashMap};
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use log::warn;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::eval::{log_grid, GridScale, Method, SelectionPolicy};
use crate::hypergraph::{CandidateSet, CardinalitySpec, Hyperedge, Hypergraph};
use crate::smoothness::{SignalMatrix, TvKind};
use crate::solver::{HslsParams, SelectionRule};
use crate::synth::{DEFAULT_DIAG_NOISE, DEFAULT_NUM_OBS};

pub const FORMAT_HEADER: &str = "# hsls-format v1";

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Bijection between external node labels and dense 0-based indices, in
/// first-appearance order.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct LabelTable {
    labels: Vec<String>,
    index: HashMap<String, usize>,
}

impl LabelTable {
    pub fn new(labels: Vec<String>) -> Result<Self> {
        let mut index = HashMap::with_capacity(labels.len());
        for (i, l) in labels.iter().enumerate() {
            if l.contains([',', '\n', '\r']) {
                return Err(Error::InvalidParams(format!("label `{l}` contains a separator")));
            }
            if index.insert(l.clone(), i).is_some() {
                return Err(Error::InvalidParams(format!("duplicate label `{l}`")));
            }
        }
        Ok(LabelTable { labels, index })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, index: usize) -> Option<&str> {
        self.labels.get(index).map(String::as_str)
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.index.get(label).copied()
    }

    /// `index,label` lines.
    pub fn to_text(&self) -> String {
        let mut out = format!("{FORMAT_HEADER}\nindex,label\n");
        for (i, l) in self.labels.iter().enumerate() {
            let _ = writeln!(out, "{i},{l}");
        }
        out
    }

    pub fn parse(text: &str, source: &Path) -> Result<Self> {
        let mut labels = Vec::new();
        for (lineno, line) in data_lines(text) {
            if line == "index,label" {
                continue;
            }
            let (idx, label) = line
                .split_once(',')
                .ok_or_else(|| Error::parse(source, lineno, "expected `index,label`"))?;
            let idx: usize = idx
                .trim()
                .parse()
                .map_err(|_| Error::parse(source, lineno, format!("bad index `{idx}`")))?;
            if idx != labels.len() {
                return Err(Error::parse(source, lineno, format!("expected index {}, found {idx}", labels.len())));
            }
            labels.push(label.trim().to_string());
        }
        LabelTable::new(labels).map_err(|e| Error::parse(source, 0, e.to_string()))
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::parse(&read_text(path)?, path)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        write_text(path, &self.to_text())
    }
}

/// Non-empty, non-comment lines with 1-based line numbers and any `\r` removed.
fn data_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim_end_matches('\r').trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

/// Parses a signal CSV: one row per node, optional leading label column.
pub fn parse_signals(text: &str, source: &Path) -> Result<(SignalMatrix, Option<LabelTable>)> {
    let mut labeled: Option<bool> = None;
    let mut labels = Vec::new();
    let mut data = Vec::new();
    let mut width: Option<usize> = None;
    let mut rows = 0usize;
    for (line, row) in data_lines(text) {
        let mut fields = row.split(',').map(str::trim);
        let first = fields.next().unwrap_or("");
        let has_label = *labeled.get_or_insert_with(|| first.parse::<f64>().is_err());
        let before = data.len();
        let lead = if has_label {
            labels.push(first.to_string());
            None
        } else {
            Some(first)
        };
        for field in lead.into_iter().chain(fields) {
            let v: f64 = field
                .parse()
                .map_err(|_| Error::parse(source, line, format!("non-numeric value `{field}`")))?;
            if !v.is_finite() {
                return Err(Error::parse(source, line, format!("non-finite value `{field}`")));
            }
            data.push(v);
        }
        let found = data.len() - before;
        match width {
            None if found == 0 => return Err(Error::parse(source, line, "row has no observations")),
            None => width = Some(found),
            Some(w) if w != found => {
                return Err(Error::parse(source, line, format!("ragged row: expected {w} values, found {found}")));
            }
            _ => {}
        }
        rows += 1;
    }
    if rows < 2 {
        return Err(Error::parse(source, 0, format!("need at least 2 node rows, found {rows}")));
    }
    let x = SignalMatrix::new(rows, width.unwrap_or(0), data).map_err(|e| Error::parse(source, 0, e.to_string()))?;
    let labels = if labeled == Some(true) {
        Some(LabelTable::new(labels).map_err(|e| Error::parse(source, 0, e.to_string()))?)
    } else {
        None
    };
    Ok((x, labels))
}

pub fn read_signals(path: &Path) -> Result<(SignalMatrix, Option<LabelTable>)> {
    parse_signals(&read_text(path)?, path)
}

pub fn signals_to_string(x: &SignalMatrix, labels: Option<&LabelTable>) -> Result<String> {
    if let Some(l) = labels {
        if l.len() != x.num_nodes() {
            return Err(Error::Dimension {
                what: "label count vs signal rows",
                expected: x.num_nodes(),
                found: l.len(),
            });
        }
    }
    let mut out = format!("{FORMAT_HEADER}\n");
    for i in 0..x.num_nodes() {
        let mut fields: Vec<String> = Vec::with_capacity(x.num_obs() + 1);
        if let Some(l) = labels {
            fields.push(l.labels()[i].clone());
        }
        fields.extend(x.row(i).iter().map(f64::to_string));
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    Ok(out)
}

pub fn write_signals(path: &Path, x: &SignalMatrix, labels: Option<&LabelTable>) -> Result<()> {
    write_text(path, &signals_to_string(x, labels)?)
}

/// Parses a structure file. The node count comes from `num_nodes`, else
/// from a `# nodes: N` comment, else from the largest index.
pub fn parse_structure(text: &str, source: &Path, num_nodes: Option<usize>) -> Result<Hypergraph> {
    let mut header_nodes = None;
    let mut entries = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let lineno = i + 1;
        let line = raw.trim_end_matches('\r').trim();
        if let Some(rest) = line.strip_prefix('#') {
            if let Some(n) = rest.trim().strip_prefix("nodes:") {
                header_nodes = Some(
                    n.trim()
                        .parse::<usize>()
                        .map_err(|_| Error::parse(source, lineno, format!("bad node count `{}`", n.trim())))?,
                );
            }
            continue;
        }
        if line.is_empty() {
            continue;
        }
        let (nodes, weight) = match line.split_once('\t') {
            Some((n, w)) => {
                let w: f64 = w
                    .trim()
                    .parse()
                    .map_err(|_| Error::parse(source, lineno, format!("bad weight `{}`", w.trim())))?;
                (n, Some(w))
            }
            None => (line, None),
        };
        let idx = nodes
            .split(',')
            .map(|f| {
                f.trim()
                    .parse::<usize>()
                    .map_err(|_| Error::parse(source, lineno, format!("bad node index `{}`", f.trim())))
            })
            .collect::<Result<Vec<_>>>()?;
        let edge = Hyperedge::new(idx).map_err(|e| Error::parse(source, lineno, e.to_string()))?;
        entries.push((lineno, edge, weight));
    }
    let n = match num_nodes.or(header_nodes) {
        Some(n) => n,
        None => match entries.iter().map(|(_, e, _)| e.max_node()).max() {
            Some(m) => m + 1,
            None => return Err(Error::parse(source, 0, "no hyperedges and no `# nodes:` line")),
        },
    };
    if let Some((lineno, e, _)) = entries.iter().find(|(_, e, _)| e.max_node() >= n) {
        return Err(Error::parse(source, *lineno, format!("edge {e} exceeds node count {n}")));
    }
    let weighted = entries.first().is_some_and(|(_, _, w)| w.is_some());
    if let Some((lineno, _, _)) = entries.iter().find(|(_, _, w)| w.is_some() != weighted) {
        return Err(Error::parse(source, *lineno, "mixed weighted and unweighted lines"));
    }
    let (h, merged) = Hypergraph::from_entries(n, entries.into_iter().map(|(_, e, w)| (e, w)).collect())
        .map_err(|e| Error::parse(source, 0, e.to_string()))?;
    if merged > 0 {
        warn!("{}: merged {merged} duplicate hyperedges", source.display());
    }
    Ok(h)
}

pub fn read_structure(path: &Path, num_nodes: Option<usize>) -> Result<Hypergraph> {
    parse_structure(&read_text(path)?, path, num_nodes)
}

/// Canonical text form: header, `# nodes: N`, one edge per line.
pub fn structure_to_string(h: &Hypergraph) -> String {
    let mut out = format!("{FORMAT_HEADER}\n# nodes: {}\n", h.num_nodes());
    for (d, e) in h.edges().iter().enumerate() {
        match h.weights() {
            Some(w) => {
                let _ = writeln!(out, "{e}\t{}", w[d]);
            }
            None => {
                let _ = writeln!(out, "{e}");
            }
        }
    }
    out
}

pub fn write_structure(path: &Path, h: &Hypergraph) -> Result<()> {
    write_text(path, &structure_to_string(h))
}

pub fn read_candidates(path: &Path, num_nodes: Option<usize>) -> Result<CandidateSet> {
    Ok(CandidateSet::from_hypergraph(&read_structure(path, num_nodes)?))
}

pub fn write_candidates(path: &Path, c: &CandidateSet) -> Result<()> {
    write_structure(path, &c.to_hypergraph())
}

/// `N x Y` incidence CSV: `1`/`0` when unweighted, the edge weight otherwise.
pub fn incidence_to_string(h: &Hypergraph) -> String {
    let n = h.num_nodes();
    let y = h.len();
    let mut cells = vec![vec![String::from("0"); y]; n];
    for (d, e) in h.edges().iter().enumerate() {
        let value = match h.weights() {
            Some(w) => w[d].to_string(),
            None => String::from("1"),
        };
        for &v in e.nodes() {
            cells[v][d] = value.clone();
        }
    }
    let mut out = format!("{FORMAT_HEADER}\n");
    for row in cells {
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

pub fn write_incidence(path: &Path, h: &Hypergraph) -> Result<()> {
    write_text(path, &incidence_to_string(h))
}

/// Full experiment configuration for `bench`.
///
/// | key | default |
/// |---|---|
/// | `nodes` | 21 |
/// | `cards` | 3 |
/// | `neighbors` | one per cardinality, equal to it |
/// | `edges` | 10 |
/// | `obs` | 250 |
/// | `noise` | 0.001 |
/// | `seed` | 42 |
/// | `trials` | 1 |
/// | `methods` | all four HSLS kinds, hgsi, knn |
/// | `alpha_grid`, `beta_grid` | 1e-3 .. 1e3 by decades (`alpha`/`beta` set a single value) |
/// | `grid_scale` | `mean-distance` (grid times mean candidate distance) or `absolute` |
/// | `eta` | 1e-8 |
/// | `imax` | 10000 |
/// | `epsilon_frac` | 0.5 |
/// | `select` | `truth` (also `baseline`, `topk:m`, `rel:t`) |
/// | `hgsi_tv` | max-square |
/// | `signals`, `truth` | unset: synthesize instead of reading files |
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub nodes: usize,
    pub cards: Vec<usize>,
    pub neighbors: Option<Vec<usize>>,
    pub edges: usize,
    pub obs: usize,
    pub noise: f64,
    pub seed: u64,
    pub trials: usize,
    pub methods: Vec<Method>,
    pub alpha_grid: Vec<f64>,
    pub beta_grid: Vec<f64>,
    pub grid_scale: GridScale,
    pub eta: f64,
    pub imax: usize,
    pub epsilon_frac: f64,
    pub select: SelectionPolicy,
    pub hgsi_tv: TvKind,
    pub signals: Option<PathBuf>,
    pub truth: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        let p = HslsParams::default();
        ExperimentConfig {
            nodes: 21,
            cards: vec![3],
            neighbors: None,
            edges: 10,
            obs: DEFAULT_NUM_OBS,
            noise: DEFAULT_DIAG_NOISE,
            seed: 42,
            trials: 1,
            methods: Method::all(),
            alpha_grid: log_grid(-3, 3),
            beta_grid: log_grid(-3, 3),
            grid_scale: GridScale::MeanDistance,
            eta: p.eta,
            imax: p.max_iter,
            epsilon_frac: p.epsilon_frac,
            select: SelectionPolicy::TruthSize,
            hgsi_tv: TvKind::MAX_SQUARE,
            signals: None,
            truth: None,
        }
    }
}

fn parse_list<T: std::str::FromStr>(key: &str, value: &str) -> Result<Vec<T>> {
    value
        .split(',')
        .map(|v| {
            v.trim().parse::<T>().map_err(|_| Error::Config {
                key: key.to_string(),
                message: format!("cannot parse `{}`", v.trim()),
            })
        })
        .collect()
}

fn parse_one<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value.trim().parse::<T>().map_err(|_| Error::Config {
        key: key.to_string(),
        message: format!("cannot parse `{}`", value.trim()),
    })
}

fn join<T: ToString>(v: &[T]) -> String {
    v.iter().map(T::to_string).collect::<Vec<_>>().join(",")
}

impl ExperimentConfig {
    pub fn parse(text: &str, source: &Path) -> Result<Self> {
        let mut cfg = ExperimentConfig::default();
        let mut seen = BTreeSet::new();
        for (lineno, line) in data_lines(text) {
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::parse(source, lineno, "expected `key=value`"))?;
            let key = key.trim();
            let value = value.trim();
            if !seen.insert(key.to_string()) {
                return Err(Error::parse(source, lineno, format!("duplicate key `{key}`")));
            }
            cfg.set(key, value).map_err(|e| Error::parse(source, lineno, e.to_string()))?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "nodes" => self.nodes = parse_one(key, value)?,
            "cards" => self.cards = parse_list(key, value)?,
            "neighbors" => self.neighbors = Some(parse_list(key, value)?),
            "edges" => self.edges = parse_one(key, value)?,
            "obs" => self.obs = parse_one(key, value)?,
            "noise" => self.noise = parse_one(key, value)?,
            "seed" => self.seed = parse_one(key, value)?,
            "trials" => self.trials = parse_one(key, value)?,
            "methods" => self.methods = parse_list(key, value)?,
            "alpha_grid" => self.alpha_grid = parse_list(key, value)?,
            "beta_grid" => self.beta_grid = parse_list(key, value)?,
            "alpha" => self.alpha_grid = vec![parse_one(key, value)?],
            "beta" => self.beta_grid = vec![parse_one(key, value)?],
            "grid_scale" => self.grid_scale = parse_one(key, value)?,
            "eta" => self.eta = parse_one(key, value)?,
            "imax" => self.imax = parse_one(key, value)?,
            "epsilon_frac" => self.epsilon_frac = parse_one(key, value)?,
            "select" => {
                self.select = match value {
                    "truth" => SelectionPolicy::TruthSize,
                    "baseline" => SelectionPolicy::BaselineSize,
                    rule => SelectionPolicy::Fixed(parse_one::<SelectionRule>(key, rule)?),
                }
            }
            "hgsi_tv" => self.hgsi_tv = parse_one(key, value)?,
            "signals" => self.signals = Some(PathBuf::from(value)),
            "truth" => self.truth = Some(PathBuf::from(value)),
            _ => {
                return Err(Error::Config {
                    key: key.to_string(),
                    message: "unknown key".into(),
                })
            }
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |key: &str, message: String| Error::Config {
            key: key.to_string(),
            message,
        };
        self.spec().map_err(|e| bad("cards/neighbors", e.to_string()))?;
        for (key, grid) in [("alpha", &self.alpha_grid), ("beta", &self.beta_grid)] {
            if grid.is_empty() || grid.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
                return Err(bad(key, format!("values must be positive, got [{}]", join(grid))));
            }
        }
        if self.methods.is_empty() {
            return Err(bad("methods", "at least one method required".into()));
        }
        if self.trials == 0 {
            return Err(bad("trials", "must be at least 1".into()));
        }
        if self.obs == 0 {
            return Err(bad("obs", "must be at least 1".into()));
        }
        if !(self.noise.is_finite() && self.noise >= 0.0) {
            return Err(bad("noise", format!("must be >= 0, got {}", self.noise)));
        }
        if self.signals.is_some() != self.truth.is_some() && self.signals.is_none() {
            return Err(bad("truth", "a truth file needs a signals file".into()));
        }
        self.params(1.0, 1.0).validate().map_err(|e| bad("eta/imax/epsilon_frac", e.to_string()))
    }

    /// Cardinalities with neighbor budgets; defaults to `r_l = k_l`.
    pub fn spec(&self) -> Result<CardinalitySpec> {
        match &self.neighbors {
            Some(r) => CardinalitySpec::with_neighbors(self.cards.clone(), r.clone()),
            None => CardinalitySpec::with_neighbors(self.cards.clone(), self.cards.clone()),
        }
    }

    pub fn params(&self, alpha: f64, beta: f64) -> HslsParams {
        HslsParams {
            alpha,
            beta,
            eta: self.eta,
            max_iter: self.imax,
            epsilon_frac: self.epsilon_frac,
        }
    }

    /// Every key with its resolved value, in a fixed order.
    pub fn to_text(&self) -> String {
        let select = match self.select {
            SelectionPolicy::TruthSize => "truth".to_string(),
            SelectionPolicy::BaselineSize => "baseline".to_string(),
            SelectionPolicy::Fixed(r) => r.to_string(),
        };
        let neighbors = self.spec().ok().and_then(|s| s.neighbors().map(join)).unwrap_or_default();
        let mut lines = vec![
            format!("nodes={}", self.nodes),
            format!("cards={}", join(&self.cards)),
            format!("neighbors={neighbors}"),
            format!("edges={}", self.edges),
            format!("obs={}", self.obs),
            format!("noise={}", self.noise),
            format!("seed={}", self.seed),
            format!("trials={}", self.trials),
            format!("methods={}", join(&self.methods)),
            format!("alpha_grid={}", join(&self.alpha_grid)),
            format!("beta_grid={}", join(&self.beta_grid)),
            format!("grid_scale={}", self.grid_scale),
            format!("eta={}", self.eta),
            format!("imax={}", self.imax),
            format!("epsilon_frac={}", self.epsilon_frac),
            format!("select={select}"),
            format!("hgsi_tv={}", self.hgsi_tv),
        ];
        if let Some(p) = &self.signals {
            lines.push(format!("signals={}", p.display()));
        }
        if let Some(p) = &self.truth {
            lines.push(format!("truth={}", p.display()));
        }
        lines.join("\n") + "\n"
    }
}

pub fn load_config(path: &Path) -> Result<ExperimentConfig> {
    ExperimentConfig::parse(&read_text(path)?, path)
}
