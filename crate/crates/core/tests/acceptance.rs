//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each and
//! exits non-zero if any fails.

use std::panic::{self, AssertUnwindSafe};
use std::path::Path;
use std::process::{Command, ExitCode};
use std::time::Instant;

use nalgebra::{DMatrix, SymmetricEigen};
use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

use hsls::baselines::hgsi_solve;
use hsls::cli::{learn, run_bench};
use hsls::eval::{
    compare_methods, overlap_csv, overlap_svg, reports_csv, tv_comparison, tv_rows_csv, CompareSettings, GridScale,
    Method, SelectionPolicy,
};
use hsls::hypergraph::enumerate_full_candidates;
use hsls::io::{signals_to_string, structure_to_string, ExperimentConfig};
use hsls::reduction::{overlap_sweep, reduce_candidates};
use hsls::smoothness::distance_vector;
use hsls::solver::{objective, prox_f, prox_g, prox_g_conj};
use hsls::synth::{random_hypergraph, sample_full, star_laplacian, synthesize};
use hsls::{
    solve, CandidateSet, CardinalitySpec, DistanceVector, Hyperedge, HslsParams, SelectionMatrix, SelectionRule,
    SignalMatrix, TvKind,
};

struct Outcome {
    pass: bool,
    detail: String,
}

type Criterion = fn() -> Outcome;

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn random_signals(rng: &mut ChaCha8Rng, n: usize, p: usize) -> SignalMatrix {
    let data = (0..n * p).map(|_| rng.random_range(-3.0..3.0)).collect();
    SignalMatrix::new(n, p, data).unwrap()
}

/// Root of a continuous increasing function on `[lo, hi]` by bisection.
fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    for _ in 0..400 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Per-coordinate minimizer of `z u + (u - x)^2 / (2 gamma)` over `u >= 0`,
/// from the sign of the derivative.
fn oracle_prox_f(x: f64, z: f64, gamma: f64) -> f64 {
    let deriv = |u: f64| z + (u - x) / gamma;
    if deriv(0.0) >= 0.0 {
        return 0.0;
    }
    let mut hi = 1.0;
    while deriv(hi) <= 0.0 {
        hi *= 2.0;
    }
    bisect(deriv, 0.0, hi)
}

/// Minimizer of `-alpha gamma log(v) + (v - x)^2 / 2` over `v > 0`.
fn oracle_prox_g(x: f64, alpha: f64, gamma: f64) -> f64 {
    let deriv = |v: f64| -alpha * gamma / v + (v - x);
    let mut lo = 1.0;
    while deriv(lo) >= 0.0 {
        lo *= 0.5;
    }
    let mut hi = 1.0;
    while deriv(hi) <= 0.0 {
        hi *= 2.0;
    }
    bisect(deriv, lo, hi)
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let (mut ef, mut eg, mut moreau) = (0.0f64, 0.0f64, 0.0f64);
    for _ in 0..1000 {
        let x: f64 = rng.random_range(-10.0..10.0);
        let z: f64 = rng.random_range(0.0..10.0);
        let alpha: f64 = 10f64.powf(rng.random_range(-2.0..2.0));
        let beta: f64 = 10f64.powf(rng.random_range(-2.0..2.0));
        let gamma: f64 = rng.random_range(1e-3..1.0) / (1.0 + beta);
        let pf = prox_f(&[x], &[z], gamma).unwrap()[0];
        ef = ef.max((pf - oracle_prox_f(x, z, gamma)).abs());
        let pg = prox_g(&[x], alpha, gamma)[0];
        eg = eg.max((pg - oracle_prox_g(x, alpha, gamma)).abs());
        // x = prox_{gamma g}(x) + gamma prox_{g* / gamma}(x / gamma)
        let back = pg + gamma * prox_g_conj(&[x / gamma], alpha, 1.0 / gamma)[0];
        moreau = moreau.max((back - x).abs());
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(
        ef < 1e-6 && eg < 1e-8 && moreau < 1e-12 && secs < 10.0,
        format!("prox_f err {ef:.1e}, prox_g err {eg:.1e}, Moreau residual {moreau:.1e}, {secs:.2}s"),
    )
}

/// Long-run projected gradient with backtracking on the same objective.
fn reference_solve(z: &[f64], s: &SelectionMatrix, alpha: f64, beta: f64) -> Vec<f64> {
    let f = |w: &[f64]| -> Option<f64> {
        let deg = s.apply(w);
        if deg.iter().any(|&d| d <= 0.0) {
            return None;
        }
        let lin: f64 = z.iter().zip(w).map(|(a, b)| a * b).sum();
        let bar: f64 = deg.iter().map(|d| d.ln()).sum();
        let sq: f64 = w.iter().map(|v| v * v).sum();
        Some(lin - alpha * bar + beta * sq)
    };
    let mut w = vec![1.0; z.len()];
    let mut t = 1.0;
    for _ in 0..2_000_000 {
        let deg = s.apply(&w);
        let inv: Vec<f64> = deg.iter().map(|d| 1.0 / d).collect();
        let back = s.apply_transpose(&inv);
        let g: Vec<f64> = (0..w.len()).map(|d| z[d] - alpha * back[d] + 2.0 * beta * w[d]).collect();
        let fw = f(&w).unwrap();
        t = (t * 1.5f64).min(1e3);
        let next = loop {
            let cand: Vec<f64> = w.iter().zip(&g).map(|(wi, gi)| (wi - t * gi).max(0.0)).collect();
            if let Some(fc) = f(&cand) {
                let lin: f64 = cand.iter().zip(&w).zip(&g).map(|((c, wi), gi)| gi * (c - wi)).sum();
                let quad: f64 = cand.iter().zip(&w).map(|(c, wi)| (c - wi) * (c - wi)).sum::<f64>() / (2.0 * t);
                if fc <= fw + lin + quad + 1e-14 * fw.abs() {
                    break cand;
                }
            }
            t *= 0.5;
        };
        let change = next.iter().zip(&w).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        w = next;
        if change < 1e-14 {
            break;
        }
    }
    w
}

fn criterion_2() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let grid = [0.1, 1.0, 10.0];
    let (mut worst_w, mut worst_obj) = (0.0f64, 0.0f64);
    let mut unconverged = 0;
    for inst in 0..20 {
        let n = 4 + inst % 3;
        let cands = enumerate_full_candidates(n, &CardinalitySpec::new(vec![2, 3]).unwrap()).unwrap();
        let s = SelectionMatrix::from_candidates(&cands);
        let z: Vec<f64> = (0..cands.len()).map(|_| rng.random_range(0.0..5.0)).collect();
        let alpha = grid[rng.random_range(0..3)];
        let beta = grid[rng.random_range(0..3)];
        let params = HslsParams {
            alpha,
            beta,
            eta: 1e-24,
            max_iter: 1_000_000,
            ..HslsParams::default()
        };
        let state = solve(&DistanceVector::new(z.clone()).unwrap(), &s, &params, None, None).unwrap();
        if !state.converged {
            unconverged += 1;
        }
        let reference = reference_solve(&z, &s, alpha, beta);
        let err = state.w.iter().zip(&reference).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        let fa = objective(&z, &s, &state.w, alpha, beta);
        let fb = objective(&z, &s, &reference, alpha, beta);
        worst_w = worst_w.max(err);
        worst_obj = worst_obj.max((fa - fb).abs() / fb.abs().max(1e-300));
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(
        worst_w < 1e-4 && worst_obj < 1e-6 && secs < 120.0,
        format!(
            "max |w - w_ref| {worst_w:.1e}, max rel objective gap {worst_obj:.1e}, {unconverged} hit the cap, {secs:.1}s"
        ),
    )
}

fn criterion_3() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (mut pairs, mut violations, mut out_of_range) = (0usize, 0usize, 0usize);
    for inst in 0..25 {
        let n = 4 + inst % 5;
        let p = rng.random_range(1..6);
        let x = random_signals(&mut rng, n, p);
        let cands = enumerate_full_candidates(n, &CardinalitySpec::new(vec![2, 3]).unwrap()).unwrap();
        let w = hgsi_solve(&distance_vector(&x, &cands, TvKind::MAX_SQUARE).unwrap());
        out_of_range += w.iter().filter(|&&v| !(v > 0.0 && v <= 1.0)).count();
        for (i, ei) in cands.candidates().iter().enumerate() {
            for (j, ej) in cands.candidates().iter().enumerate() {
                if i != j && ei.is_subset_of(ej) {
                    pairs += 1;
                    if w[j] > w[i] {
                        violations += 1;
                    }
                }
            }
        }
    }
    outcome(
        violations == 0 && out_of_range == 0 && pairs > 0,
        format!("{pairs} nested pairs, {violations} monotonicity violations, {out_of_range} weights outside (0, 1]"),
    )
}

fn criterion_4() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut nest_fail = 0;
    for _ in 0..1000 {
        let n = rng.random_range(5..14);
        let p = rng.random_range(1..5);
        let x = random_signals(&mut rng, n, p);
        let cards: Vec<usize> = if rng.random_bool(0.5) { vec![2, 3] } else { vec![rng.random_range(2..5)] };
        let small: Vec<usize> = cards.iter().map(|&k| rng.random_range(k - 1..n + 1)).collect();
        let large: Vec<usize> = small.iter().map(|&r| r + rng.random_range(0..4)).collect();
        let a = reduce_candidates(&x, &CardinalitySpec::with_neighbors(cards.clone(), small).unwrap()).unwrap();
        let b = reduce_candidates(&x, &CardinalitySpec::with_neighbors(cards, large).unwrap()).unwrap();
        if !a.is_subset_of(&b) {
            nest_fail += 1;
        }
    }

    let (mut monotone_fail, mut full_fail, mut bound_fail) = (0, 0, 0);
    for seed in 0..20u64 {
        let cards = if seed % 2 == 0 { vec![3] } else { vec![2, 3] };
        let n = 12 + (seed as usize % 5);
        let spec = CardinalitySpec::new(cards.clone()).unwrap();
        let (truth, x) = synthesize(n, &spec, 6, 60, 1e-3, seed).unwrap();
        let rows = overlap_sweep(&x, &truth, &cards, 2, n - 1).unwrap();
        if rows.windows(2).any(|w| w[1].overlap_percent < w[0].overlap_percent) {
            monotone_fail += 1;
        }
        if rows.last().unwrap().overlap_percent != 100.0 {
            full_fail += 1;
        }
        let minimal = reduce_candidates(&x, &CardinalitySpec::minimal_neighbors(cards.clone()).unwrap()).unwrap();
        if minimal.len() > n * cards.len() {
            bound_fail += 1;
        }
    }
    outcome(
        nest_fail == 0 && monotone_fail == 0 && full_fail == 0 && bound_fail == 0,
        format!(
            "nestedness failures {nest_fail}/1000, non-monotone sweeps {monotone_fail}/20, \
             r=N-1 below 100% {full_fail}/20, N*L bound violations {bound_fail}/20"
        ),
    )
}

fn criterion_5() -> Outcome {
    let start = Instant::now();
    let base = CardinalitySpec::new(vec![3]).unwrap();
    let spec = CardinalitySpec::with_uniform_neighbors(vec![3], 3).unwrap();
    let methods = [Method::Hsls(TvKind::MAX_SQUARE), Method::Hgsi];
    let settings = CompareSettings::default();
    let (mut hsls, mut hgsi) = (Vec::new(), Vec::new());
    for seed in 1..=10u64 {
        let (truth, x) = synthesize(21, &base, 10, 250, 1e-3, seed).unwrap();
        let reports = compare_methods(&x, Some(&truth), &spec, &methods, &settings).unwrap();
        hsls.push(reports[0].metrics.unwrap().f1);
        hgsi.push(reports[1].metrics.unwrap().f1);
    }
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    let (a, b) = (mean(&hsls), mean(&hgsi));
    let secs = start.elapsed().as_secs_f64();
    outcome(
        a >= 0.8 && a > b && secs < 600.0,
        format!("mean F1 HSLS max-square {a:.4} vs HGSI {b:.4} over 10 seeds, {secs:.1}s"),
    )
}

fn criterion_6() -> Outcome {
    let base = CardinalitySpec::new(vec![3]).unwrap();
    let spec = CardinalitySpec::with_uniform_neighbors(vec![3], 3).unwrap();
    let mut methods: Vec<Method> = TvKind::ALL.iter().map(|&k| Method::Hsls(k)).collect();
    methods.push(Method::KnnDirect);
    let settings = CompareSettings {
        policy: SelectionPolicy::BaselineSize,
        ..CompareSettings::default()
    };
    let mut wins = [0usize; 4];
    for seed in 101..=110u64 {
        let (_, x) = synthesize(21, &base, 10, 250, 1e-3, seed).unwrap();
        let reports = compare_methods(&x, None, &spec, &methods, &settings).unwrap();
        let knn = &reports[4];
        for (k, kind) in TvKind::ALL.iter().enumerate() {
            let learned = &reports[k];
            let name = kind.name();
            if learned.edge_count >= knn.edge_count && learned.total_variation[name] <= knn.total_variation[name] {
                wins[k] += 1;
            }
        }
    }
    let detail = TvKind::ALL
        .iter()
        .zip(wins)
        .map(|(k, w)| format!("{k} {w}/10"))
        .collect::<Vec<_>>()
        .join(", ");
    outcome(wins.iter().all(|&w| w >= 8), format!("seeds with TV <= K-NN at >= K-NN size: {detail}"))
}

fn criterion_7() -> Outcome {
    let mut worst_frob = 0.0f64;
    let mut worst_row = 0.0f64;
    let mut min_eig = f64::INFINITY;
    let cases: [(usize, Vec<usize>, usize); 3] = [(20, vec![3], 8), (16, vec![2, 3], 12), (30, vec![4], 10)];
    for (seed, (n, cards, y)) in cases.into_iter().enumerate() {
        let spec = CardinalitySpec::new(cards).unwrap();
        let h = random_hypergraph(n, &spec, y, seed as u64).unwrap();
        let star = star_laplacian(&h, 1e-3).unwrap();
        let l = &star.laplacian;
        for i in 0..l.nrows() {
            worst_row = worst_row.max((l.row(i).sum() - 1e-3).abs());
        }
        let eig = SymmetricEigen::new(l.clone());
        min_eig = min_eig.min(eig.eigenvalues.min());
        let pinv = l.clone().pseudo_inverse(1e-10).unwrap();
        let p = 5000;
        let samples = sample_full(&star, p, 1000 + seed as u64).unwrap();
        let mean = samples.column_mean();
        let centered = DMatrix::from_fn(samples.nrows(), p, |i, j| samples[(i, j)] - mean[i]);
        let cov = &centered * centered.transpose() / (p as f64 - 1.0);
        worst_frob = worst_frob.max((cov - &pinv).norm() / pinv.norm());
    }
    outcome(
        worst_frob < 0.25 && worst_row < 1e-10 && min_eig >= -1e-10,
        format!("max relative Frobenius error {worst_frob:.3}, max row-sum error {worst_row:.1e}, min eigenvalue {min_eig:.2e}"),
    )
}

fn digest(parts: &[&str]) -> String {
    let mut h = Sha256::new();
    for p in parts {
        h.update(p.as_bytes());
        h.update([0u8]);
    }
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

fn library_pipeline() -> Vec<String> {
    let spec = CardinalitySpec::new(vec![2, 3]).unwrap();
    let (truth, x) = synthesize(14, &spec, 6, 80, 1e-3, 7).unwrap();
    let reduced_spec = CardinalitySpec::with_neighbors(vec![2, 3], vec![3, 4]).unwrap();
    let cands = reduce_candidates(&x, &reduced_spec).unwrap();
    let rows = overlap_sweep(&x, &truth, &[2, 3], 2, 13).unwrap();
    let diag = std::env::temp_dir().join(format!("hsls-acc-diag-{}.csv", std::process::id()));
    let learned = learn(&x, &cands, TvKind::MAX_SQUARE, GridScale::MeanDistance, &HslsParams::default(), SelectionRule::TopK(6), Some(&diag)).unwrap();
    let diag_text = std::fs::read_to_string(&diag).unwrap();
    let _ = std::fs::remove_file(&diag);
    let tv = tv_comparison(&truth, &learned, &[("x", &x)], TvKind::MAX_SQUARE).unwrap();
    let cfg = ExperimentConfig::parse(
        "nodes=12\nedges=5\nobs=60\nalpha_grid=0.1,1\nbeta_grid=0.1,1\ntrials=2\n",
        Path::new("inline"),
    )
    .unwrap();
    let bench = reports_csv(&run_bench(&cfg).unwrap());
    vec![
        digest(&[&structure_to_string(&truth), &signals_to_string(&x, None).unwrap()]),
        digest(&[&structure_to_string(&cands.to_hypergraph())]),
        digest(&[&overlap_csv(&rows), &overlap_svg(&rows)]),
        digest(&[&structure_to_string(&learned), &diag_text]),
        digest(&[&tv_rows_csv(&tv)]),
        digest(&[&bench]),
    ]
}

fn cli_pipeline(tag: &str) -> Result<Vec<String>, String> {
    let dir = std::env::temp_dir().join(format!("hsls-acc-{}-{tag}", std::process::id()));
    std::fs::create_dir_all(&dir).map_err(|e| e.to_string())?;
    let bin = env!("CARGO_BIN_EXE_hsls");
    let p = |name: &str| dir.join(name).to_string_lossy().into_owned();
    std::fs::write(p("bench.cfg"), "nodes=12\nedges=5\nobs=60\nalpha_grid=0.1,1\nbeta_grid=1\nmethods=hsls:max-square,hgsi,knn\n")
        .map_err(|e| e.to_string())?;
    let steps: Vec<Vec<String>> = vec![
        vec!["synth", "--nodes", "15", "--cards", "3", "--edges", "7", "--seed", "9", "--out-structure", &p("truth.txt"), "--out-signals", &p("x.csv")],
        vec!["reduce", "--signals", &p("x.csv"), "--cards", "3", "--neighbors", "3", "--out", &p("cands.txt")],
        vec!["overlap", "--truth", &p("truth.txt"), "--signals", &p("x.csv"), "--out-csv", &p("overlap.csv"), "--out-svg", &p("overlap.svg")],
        vec!["learn", "--signals", &p("x.csv"), "--candidates", &p("cands.txt"), "--select", "topk:7", "--out", &p("learned.txt"), "--diag", &p("diag.csv")],
        vec!["eval", "--learned", &p("learned.txt"), "--truth", &p("truth.txt"), "--signals", &p("x.csv"), "--knn-cards", "3", "--out", &p("eval.csv")],
        vec!["bench", "--config", &p("bench.cfg"), "--out", &p("bench.csv")],
    ]
    .into_iter()
    .map(|v| v.into_iter().map(String::from).collect())
    .collect();
    for args in &steps {
        let status = Command::new(bin).args(args).env("HSLS_THREADS", "3").status().map_err(|e| e.to_string())?;
        if !status.success() {
            return Err(format!("`hsls {}` exited with {status}", args[0]));
        }
    }
    let files = ["truth.txt", "x.csv", "cands.txt", "overlap.csv", "overlap.svg", "learned.txt", "diag.csv", "eval.csv", "bench.csv"];
    let hashes = files
        .iter()
        .map(|f| std::fs::read_to_string(p(f)).map(|t| digest(&[&t])).map_err(|e| e.to_string()))
        .collect();
    let _ = std::fs::remove_dir_all(&dir);
    hashes
}

fn criterion_8() -> Outcome {
    let a = library_pipeline();
    let b = library_pipeline();
    let lib_same = a == b;
    match (cli_pipeline("a"), cli_pipeline("b")) {
        (Ok(c), Ok(d)) => outcome(
            lib_same && c == d,
            format!(
                "library stages identical: {lib_same} ({} hashes), CLI artifacts identical: {} ({} files)",
                a.len(),
                c == d,
                c.len()
            ),
        ),
        (Err(e), _) | (_, Err(e)) => outcome(false, format!("CLI pipeline failed: {e}")),
    }
}

fn random_candidates(rng: &mut ChaCha8Rng, n: usize, k: usize, count: usize) -> CandidateSet {
    let mut edges = Vec::with_capacity(count);
    while edges.len() < count {
        let nodes = index::sample(rng, n, k).into_vec();
        edges.push(Hyperedge::new(nodes).unwrap());
    }
    CandidateSet::new(n, edges).unwrap()
}

/// Seconds per iteration from the fastest of repeated 450- and 50-iteration
/// solves; the difference cancels setup cost.
fn per_iteration(cands: &CandidateSet, rng: &mut ChaCha8Rng) -> f64 {
    let s = SelectionMatrix::from_candidates(cands);
    let z = DistanceVector::new((0..cands.len()).map(|_| rng.random_range(0.0..2.0)).collect()).unwrap();
    let run = |iters: usize| {
        let params = HslsParams {
            eta: 1e-300,
            max_iter: iters,
            ..HslsParams::default()
        };
        let t = Instant::now();
        let st = solve(&z, &s, &params, None, None).unwrap();
        assert_eq!(st.iterations, iters);
        t.elapsed().as_secs_f64()
    };
    let fastest = |iters: usize| (0..5).map(|_| run(iters)).fold(f64::INFINITY, f64::min);
    run(50);
    (fastest(450) - fastest(50)) / 400.0
}

fn criterion_9() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    // Cardinality proportional to N, so every column of S has Theta(N) entries.
    let small = random_candidates(&mut rng, 200, 100, 2000);
    let large = random_candidates(&mut rng, 400, 200, 4000);
    let ratio = per_iteration(&large, &mut rng) / per_iteration(&small, &mut rng);
    // Fixed small cardinality: cost follows the nonzeros of S, reported only.
    let small_k = random_candidates(&mut rng, 2000, 3, 20000);
    let large_k = random_candidates(&mut rng, 4000, 3, 40000);
    let sparse_ratio = per_iteration(&large_k, &mut rng) / per_iteration(&small_k, &mut rng);
    outcome(
        (2.5..=6.5).contains(&ratio),
        format!("time ratio (2N, 2D) / (N, D) = {ratio:.2} with k = N/2; fixed k = 3 ratio {sparse_ratio:.2} (informational)"),
    )
}

fn main() -> ExitCode {
    let criteria: [(&str, Criterion); 9] = [
        ("prox oracles", criterion_1),
        ("solver vs projected-gradient reference", criterion_2),
        ("closed-form baseline weights", criterion_3),
        ("candidate reduction properties", criterion_4),
        ("structure recovery", criterion_5),
        ("smoothness dominance", criterion_6),
        ("synthesizer statistics", criterion_7),
        ("determinism", criterion_8),
        ("scaling", criterion_9),
    ];
    let only: Option<usize> = std::env::var("ACCEPTANCE_ONLY").ok().and_then(|v| v.parse().ok());
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let n = i + 1;
        if only.is_some_and(|o| o != n) {
            continue;
        }
        let result = panic::catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            outcome(false, format!("panicked: {msg}"))
        });
        if !result.pass {
            failed += 1;
        }
        println!(
            "acceptance {n} {name}: {} ({})",
            if result.pass { "PASS" } else { "FAIL" },
            result.detail
        );
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} acceptance criteria failed");
        ExitCode::FAILURE
    }
}
