//! Command-line front end. Each subcommand reads and writes files so the
//! stages can be run and inspected separately.
//!
//! Exit codes: 0 success, 2 invalid input, 3 solver divergence, 1 anything else.

use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use log::{info, warn};

use crate::baselines::knn_structure;
use crate::error::{Error, Result};
use crate::eval::{
    compare_methods, overlap_csv, overlap_svg, reports_csv, reports_text, scaled_distances, tv_rows_csv, tv_rows_text,
    tv_table, CompareSettings, GridScale, RunReport,
};
use crate::hypergraph::{set_metrics, CandidateSet, CardinalitySpec, Hypergraph, SelectionMatrix};
use crate::io::{
    incidence_to_string, load_config, read_candidates, read_signals, read_structure, signals_to_string,
    structure_to_string, write_text, ExperimentConfig, LabelTable, FORMAT_HEADER,
};
use crate::reduction::{overlap_sweep, reduce_candidates};
use crate::smoothness::{distance_vector, SignalMatrix, TvKind};
use crate::solver::{select_edges, solve, HslsParams, SelectionRule};
use crate::synth::{synthesize, DEFAULT_DIAG_NOISE, DEFAULT_NUM_OBS};

#[derive(Debug, Parser)]
#[command(name = "hsls", version, about = "Hypergraph structure learning from smooth node signals")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Random ground-truth hypergraph plus smooth signals drawn on it.
    Synth(SynthArgs),
    /// Nearest-neighbor candidate hyperedges.
    Reduce(ReduceArgs),
    /// Share of ground-truth hyperedges kept as the neighbor budget grows.
    Overlap(OverlapArgs),
    /// Learn a weighted hypergraph from signals.
    Learn(LearnArgs),
    /// Score a learned structure against a ground truth and/or signals.
    Eval(EvalArgs),
    /// Run a full method comparison described by a config file.
    Bench(BenchArgs),
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long, default_value_t = 21)]
    pub nodes: usize,
    /// Comma-separated hyperedge cardinalities.
    #[arg(long, default_value = "3", value_delimiter = ',')]
    pub cards: Vec<usize>,
    /// Number of ground-truth hyperedges.
    #[arg(long, default_value_t = 10)]
    pub edges: usize,
    /// Observations per node.
    #[arg(long, default_value_t = DEFAULT_NUM_OBS)]
    pub obs: usize,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// Diagonal regularizer added to the star-expansion Laplacian.
    #[arg(long, default_value_t = DEFAULT_DIAG_NOISE)]
    pub noise: f64,
    #[arg(long)]
    pub out_structure: PathBuf,
    #[arg(long)]
    pub out_signals: PathBuf,
    /// Also write the N x Y incidence matrix.
    #[arg(long)]
    pub out_incidence: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ReduceArgs {
    #[arg(long)]
    pub signals: PathBuf,
    #[arg(long, value_delimiter = ',')]
    pub cards: Vec<usize>,
    /// Neighbor budget per cardinality (one value applies to all). Defaults to the cardinalities.
    #[arg(long, value_delimiter = ',')]
    pub neighbors: Option<Vec<usize>>,
    /// Candidate file; standard output when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct OverlapArgs {
    #[arg(long)]
    pub truth: PathBuf,
    #[arg(long)]
    pub signals: PathBuf,
    /// Defaults to the cardinalities present in the truth.
    #[arg(long, value_delimiter = ',')]
    pub cards: Option<Vec<usize>>,
    /// Defaults to max(k) - 1.
    #[arg(long)]
    pub rmin: Option<usize>,
    /// Defaults to N - 1.
    #[arg(long)]
    pub rmax: Option<usize>,
    /// Standard output when omitted.
    #[arg(long)]
    pub out_csv: Option<PathBuf>,
    #[arg(long)]
    pub out_svg: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct LearnArgs {
    #[arg(long)]
    pub signals: PathBuf,
    /// Candidate file from `reduce`; alternatively pass --cards and --neighbors.
    #[arg(long, conflicts_with_all = ["cards", "neighbors"])]
    pub candidates: Option<PathBuf>,
    #[arg(long, value_delimiter = ',', required_unless_present = "candidates")]
    pub cards: Option<Vec<usize>>,
    /// Defaults to the cardinalities.
    #[arg(long, value_delimiter = ',')]
    pub neighbors: Option<Vec<usize>>,
    /// sum-square, sum-abs, max-abs or max-square.
    #[arg(long, default_value = "max-square")]
    pub tv: TvKind,
    #[arg(long, default_value_t = 1.0)]
    pub alpha: f64,
    #[arg(long, default_value_t = 1.0)]
    pub beta: f64,
    /// `mean-distance`: alpha and beta are relative to the mean candidate
    /// distance (the solver sees z / mean z). `absolute`: raw values.
    #[arg(long, default_value = "mean-distance")]
    pub scale: GridScale,
    /// Relative-change stopping threshold.
    #[arg(long, default_value_t = 1e-8)]
    pub eta: f64,
    /// Iteration cap.
    #[arg(long, default_value_t = 10_000)]
    pub imax: usize,
    /// `topk:<m>` or `rel:<tau>` (keep w > tau * max w).
    #[arg(long, default_value = "rel:0.1")]
    pub select: SelectionRule,
    /// Learned structure with weights; standard output when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Per-iteration residuals and objective.
    #[arg(long)]
    pub diag: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub learned: PathBuf,
    #[arg(long)]
    pub truth: Option<PathBuf>,
    /// Signals for total-variation rows.
    #[arg(long)]
    pub signals: Option<PathBuf>,
    /// Baseline structure for total-variation rows.
    #[arg(long, conflicts_with = "knn_cards")]
    pub baseline: Option<PathBuf>,
    /// Build the K-NN baseline from the signals with these cardinalities.
    #[arg(long, value_delimiter = ',')]
    pub knn_cards: Option<Vec<usize>>,
    /// Total-variation kind; all four when omitted.
    #[arg(long)]
    pub tv: Option<TvKind>,
    /// Aligned text tables instead of CSV.
    #[arg(long)]
    pub text: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[arg(long)]
    pub config: PathBuf,
    /// Aligned text summary instead of CSV.
    #[arg(long)]
    pub text: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Process exit code for an error.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Diverged { .. } => 3,
        Error::Numeric(_) => 1,
        _ => 2,
    }
}

/// Sizes the global worker pool from `HSLS_THREADS` when set.
pub fn init_threads() {
    if let Ok(v) = std::env::var("HSLS_THREADS") {
        match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => {
                if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
                    warn!("could not size worker pool: {e}");
                }
            }
            _ => warn!("ignoring HSLS_THREADS={v}: expected a positive integer"),
        }
    }
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => write_text(p, text),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|e| Error::io("<stdout>", e))
        }
    }
}

fn labels_path(out: &Path) -> PathBuf {
    let mut name = out.as_os_str().to_owned();
    name.push(".labels");
    PathBuf::from(name)
}

fn persist_labels(out: Option<&Path>, labels: Option<&LabelTable>) -> Result<()> {
    if let (Some(out), Some(labels)) = (out, labels) {
        labels.write(&labels_path(out))?;
    }
    Ok(())
}

fn spec_from(cards: &[usize], neighbors: Option<&[usize]>) -> Result<CardinalitySpec> {
    match neighbors {
        Some([r]) => CardinalitySpec::with_uniform_neighbors(cards.to_vec(), *r),
        Some(r) => CardinalitySpec::with_neighbors(cards.to_vec(), r.to_vec()),
        None => CardinalitySpec::with_neighbors(cards.to_vec(), cards.to_vec()),
    }
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Synth(a) => synth_cmd(a),
        Command::Reduce(a) => reduce_cmd(a),
        Command::Overlap(a) => overlap_cmd(a),
        Command::Learn(a) => learn_cmd(a),
        Command::Eval(a) => eval_cmd(a),
        Command::Bench(a) => bench_cmd(a),
    }
}

fn synth_cmd(a: SynthArgs) -> Result<()> {
    let spec = CardinalitySpec::new(a.cards)?;
    let (truth, x) = synthesize(a.nodes, &spec, a.edges, a.obs, a.noise, a.seed)?;
    write_text(&a.out_structure, &structure_to_string(&truth))?;
    write_text(&a.out_signals, &signals_to_string(&x, None)?)?;
    if let Some(p) = &a.out_incidence {
        write_text(p, &incidence_to_string(&truth))?;
    }
    info!("synthesized {} hyperedges over {} nodes, {} observations", truth.len(), a.nodes, a.obs);
    Ok(())
}

fn reduce_cmd(a: ReduceArgs) -> Result<()> {
    let (x, labels) = read_signals(&a.signals)?;
    let spec = spec_from(&a.cards, a.neighbors.as_deref())?;
    let cands = reduce_candidates(&x, &spec)?;
    info!("{} candidate hyperedges", cands.len());
    emit(a.out.as_deref(), &structure_to_string(&cands.to_hypergraph()))?;
    persist_labels(a.out.as_deref(), labels.as_ref())
}

fn overlap_cmd(a: OverlapArgs) -> Result<()> {
    let (x, _) = read_signals(&a.signals)?;
    let truth = read_structure(&a.truth, Some(x.num_nodes()))?;
    if truth.is_empty() {
        return Err(Error::Undefined("overlap against an empty ground truth".into()));
    }
    let cards = match a.cards {
        Some(c) => c,
        None => {
            let mut c = truth.cardinalities();
            c.sort_unstable();
            c.dedup();
            c
        }
    };
    let floor = cards.iter().max().map_or(1, |k| k.saturating_sub(1).max(1));
    let rmin = a.rmin.unwrap_or(floor);
    let rmax = a.rmax.unwrap_or(x.num_nodes() - 1);
    let rows = overlap_sweep(&x, &truth, &cards, rmin, rmax)?;
    emit(a.out_csv.as_deref(), &overlap_csv(&rows))?;
    if let Some(p) = &a.out_svg {
        write_text(p, &overlap_svg(&rows))?;
    }
    Ok(())
}

fn learn_cmd(a: LearnArgs) -> Result<()> {
    let (x, labels) = read_signals(&a.signals)?;
    let cands = match (&a.candidates, &a.cards) {
        (Some(p), _) => read_candidates(p, Some(x.num_nodes()))?,
        (None, Some(cards)) => reduce_candidates(&x, &spec_from(cards, a.neighbors.as_deref())?)?,
        (None, None) => return Err(Error::InvalidParams("pass --candidates or --cards".into())),
    };
    let params = HslsParams {
        alpha: a.alpha,
        beta: a.beta,
        eta: a.eta,
        max_iter: a.imax,
        ..HslsParams::default()
    };
    let learned = learn(&x, &cands, a.tv, a.scale, &params, a.select, a.diag.as_deref())?;
    emit(a.out.as_deref(), &structure_to_string(&learned))?;
    persist_labels(a.out.as_deref(), labels.as_ref())
}

/// Solve plus selection; used by `learn`.
pub fn learn(
    x: &SignalMatrix,
    cands: &CandidateSet,
    kind: TvKind,
    scale: GridScale,
    params: &HslsParams,
    rule: SelectionRule,
    diag: Option<&Path>,
) -> Result<Hypergraph> {
    let (z, factor) = scaled_distances(&distance_vector(x, cands, kind)?, scale)?;
    if scale == GridScale::MeanDistance {
        info!("mean candidate distance {factor}");
    }
    let s = SelectionMatrix::from_candidates(cands);
    let state = solve(&z, &s, params, None, None)?;
    if !state.converged {
        warn!("solver stopped at the iteration cap ({}) before converging", state.iterations);
    }
    info!("solver: {} iterations, converged={}", state.iterations, state.converged);
    if let Some(p) = diag {
        write_text(p, &state.diagnostics_csv())?;
    }
    let selection = select_edges(&state.w, cands, rule)?;
    if selection.all_zero {
        warn!("all learned weights are zero; top-k picked by candidate order");
    }
    Ok(selection.hypergraph)
}

fn eval_cmd(a: EvalArgs) -> Result<()> {
    let x = a.signals.as_deref().map(read_signals).transpose()?.map(|(x, _)| x);
    let n = x.as_ref().map(SignalMatrix::num_nodes);
    let learned = read_structure(&a.learned, n)?;
    let n = n.unwrap_or(learned.num_nodes());
    let truth = a.truth.as_deref().map(|p| read_structure(p, Some(n))).transpose()?;
    let metrics = truth.as_ref().map(|t| set_metrics(&learned, t)).transpose()?;
    let baseline = match (&a.baseline, &a.knn_cards, &x) {
        (Some(p), _, _) => Some(read_structure(p, Some(n))?),
        (None, Some(cards), Some(x)) => Some(knn_structure(x, &CardinalitySpec::new(cards.clone())?)?),
        (None, Some(_), None) => return Err(Error::InvalidParams("--knn-cards needs --signals".into())),
        _ => None,
    };
    let kinds: Vec<TvKind> = a.tv.map_or(TvKind::ALL.to_vec(), |k| vec![k]);
    let tv_rows = match &x {
        Some(x) => {
            let mut structures: Vec<(&str, &Hypergraph)> = Vec::new();
            if let Some(b) = &baseline {
                structures.push(("K-NN", b));
            }
            if let Some(t) = &truth {
                structures.push(("truth", t));
            }
            structures.push(("HSLS", &learned));
            tv_table(&structures, &[("signals", x)], &kinds)?
        }
        None => Vec::new(),
    };

    let mut out = String::new();
    if a.text {
        if let Some(m) = metrics {
            out.push_str(&format!(
                "precision={:.4}\nrecall={:.4}\nf1={:.4}\nlearned_edges={}\ntruth_edges={}\n",
                m.precision,
                m.recall,
                m.f1,
                learned.len(),
                truth.as_ref().map_or(0, Hypergraph::len)
            ));
        }
        if !tv_rows.is_empty() {
            if !out.is_empty() {
                out.push('\n');
            }
            out.push_str(&tv_rows_text(&tv_rows));
        }
    } else {
        out.push_str(FORMAT_HEADER);
        out.push_str("\nmetric,value\n");
        if let Some(m) = metrics {
            out.push_str(&format!(
                "precision,{}\nrecall,{}\nf1,{}\ntruth_edges,{}\n",
                m.precision,
                m.recall,
                m.f1,
                truth.as_ref().map_or(0, Hypergraph::len)
            ));
        }
        out.push_str(&format!("learned_edges,{}\n", learned.len()));
        if !tv_rows.is_empty() {
            out.push('\n');
            out.push_str(tv_rows_csv(&tv_rows).trim_start_matches(FORMAT_HEADER).trim_start_matches('\n'));
        }
    }
    emit(a.out.as_deref(), &out)
}

/// Every trial of a config: `(trial, reports)`, trial seeds `seed + t`.
pub fn run_bench(cfg: &ExperimentConfig) -> Result<Vec<(usize, Vec<RunReport>)>> {
    let spec = cfg.spec()?;
    let settings = CompareSettings {
        alpha_grid: cfg.alpha_grid.clone(),
        beta_grid: cfg.beta_grid.clone(),
        base: cfg.params(1.0, 1.0),
        policy: cfg.select,
        scale: cfg.grid_scale,
        hgsi_kind: cfg.hgsi_tv,
    };
    if let Some(signals) = &cfg.signals {
        if cfg.trials > 1 {
            warn!("signals come from a file; running a single trial");
        }
        let (x, _) = read_signals(signals)?;
        let truth = cfg.truth.as_deref().map(|p| read_structure(p, Some(x.num_nodes()))).transpose()?;
        let reports = compare_methods(&x, truth.as_ref(), &spec, &cfg.methods, &settings)?;
        return Ok(vec![(0, reports)]);
    }
    let base = CardinalitySpec::new(cfg.cards.clone())?;
    (0..cfg.trials)
        .map(|t| {
            let seed = cfg.seed.wrapping_add(t as u64);
            let (truth, x) = synthesize(cfg.nodes, &base, cfg.edges, cfg.obs, cfg.noise, seed)?;
            let reports = compare_methods(&x, Some(&truth), &spec, &cfg.methods, &settings)?;
            for r in &reports {
                info!("trial {t} {}: {:.3}s", r.method, r.wall_time_secs);
            }
            Ok((t, reports))
        })
        .collect()
}

fn bench_cmd(a: BenchArgs) -> Result<()> {
    let cfg = load_config(&a.config)?;
    let trials = run_bench(&cfg)?;
    let text = if a.text {
        trials
            .iter()
            .map(|(t, r)| format!("trial {t}\n{}", reports_text(r)))
            .collect::<Vec<_>>()
            .join("\n")
    } else {
        let mut out = format!("{FORMAT_HEADER}\n");
        for line in cfg.to_text().lines() {
            out.push_str(&format!("# config: {line}\n"));
        }
        out.push_str(reports_csv(&trials).trim_start_matches(FORMAT_HEADER).trim_start_matches('\n'));
        out
    };
    emit(a.out.as_deref(), &text)
}
