//! Exact computation of `z(m,n)` and `z2(m,n)`.
//!
//! Both numbers come out of the same engine ([`engine`]): a row-major depth
//! first search with incremental admissibility, double-lex symmetry breaking
//! and a counting bound. For `z2` the search is joint over 1-edges and
//! 2-edges; the classical number is computed first and caps `|E1|`.
//!
//! Parallel runs split the tree at a fixed depth into subtasks drained from a
//! shared queue. The only state shared while searching is the best total found
//! so far, which only grows, so stale reads merely weaken pruning.

mod engine;

use std::collections::BTreeMap;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::admissibility::is_admissible;
use crate::grid::{BiGraph, CanonicalKey, GridError, MAX_CELLS};

use engine::{Config, Goal, Shared, Worker, MAX_SIDE};

#[derive(Debug, Clone)]
pub struct SearchOptions {
    pub threads: usize,
    pub time_limit: Option<Duration>,
    /// Report every extremal graph (up to isomorphism) instead of one.
    pub collect_witnesses: bool,
    /// Keep at most this many witnesses, the ones with the smallest canonical keys.
    pub max_witnesses: usize,
    /// Only shuffles the order in which subtasks are handed out.
    pub seed: u64,
    /// Number of decided cells at which the tree is cut into subtasks.
    pub split_depth: usize,
    /// Re-validate every search node with the reference checkers (slow).
    pub paranoid: bool,
    /// Generate only double-lex ordered graphs. Turning this off enumerates
    /// every labeled graph and is meant for cross-checks on small grids.
    pub symmetry_breaking: bool,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions {
            threads: 1,
            time_limit: None,
            collect_witnesses: true,
            max_witnesses: 1000,
            seed: 0,
            split_depth: 3,
            paranoid: false,
            symmetry_breaking: true,
        }
    }
}

impl SearchOptions {
    pub fn with_threads(mut self, threads: usize) -> Self {
        self.threads = threads;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Problem {
    /// 1-edges only: the classical Zarankiewicz number.
    Classical,
    /// 1-edges and 2-edges: the double Zarankiewicz number.
    Double,
}

#[derive(Debug, Clone, Serialize)]
pub struct SearchResult {
    pub problem: Problem,
    pub m: usize,
    pub n: usize,
    /// Maximum `|E1| + |E2|` (best found so far when not exhausted).
    pub value: usize,
    /// Canonical representatives, sorted by canonical key.
    pub witnesses: Vec<BiGraph>,
    /// Distinct isomorphism classes seen at `value`, before the witness cap.
    pub witness_classes: usize,
    #[serde(rename = "nodes")]
    pub nodes_explored: u64,
    pub exhausted: bool,
    #[serde(serialize_with = "ser_secs")]
    pub elapsed: Duration,
}

fn ser_secs<S: serde::Serializer>(d: &Duration, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_f64(d.as_secs_f64())
}

#[derive(Debug, Error)]
pub enum SearchError {
    #[error(transparent)]
    Dimension(#[from] GridError),
    #[error("time limit exceeded after {} nodes; best so far {}", .0.nodes_explored, .0.value)]
    TimeLimitExceeded(Box<SearchResult>),
}

impl SearchError {
    /// The partial result carried by a timeout.
    pub fn partial(&self) -> Option<&SearchResult> {
        match self {
            SearchError::TimeLimitExceeded(r) => Some(r),
            SearchError::Dimension(_) => None,
        }
    }
}

fn check_dims(m: usize, n: usize) -> Result<(), SearchError> {
    if m < 2 || n < 2 || m * n > MAX_CELLS || m > MAX_SIDE || n > MAX_SIDE {
        return Err(GridError::Dimension { m, n }.into());
    }
    Ok(())
}

struct RunOutput {
    best: usize,
    found: Vec<BiGraph>,
    nodes: u64,
    exhausted: bool,
}

fn run(cfg: Config, opts: &SearchOptions, initial_best: usize, deadline: Option<Instant>) -> RunOutput {
    let shared = Shared::new(initial_best, deadline);
    let mut splitter = Worker::new(cfg, &shared);
    let mut tasks = splitter.split(opts.split_depth.min(cfg.m * cfg.n));
    tasks.shuffle(&mut ChaCha8Rng::seed_from_u64(opts.seed));

    let next = AtomicUsize::new(0);
    let threads = opts.threads.max(1).min(tasks.len().max(1));
    let mut partials: Vec<(usize, Vec<BiGraph>, u64)> = std::thread::scope(|scope| {
        let handles: Vec<_> = (0..threads)
            .map(|_| {
                scope.spawn(|| {
                    let mut worker = Worker::new(cfg, &shared);
                    loop {
                        let i = next.fetch_add(1, Ordering::Relaxed);
                        if i >= tasks.len() || shared.stop.load(Ordering::Relaxed) {
                            break;
                        }
                        worker.run_task(&tasks[i]);
                    }
                    (worker.local_best, worker.found, worker.nodes)
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("search worker panicked"))
            .collect()
    });
    partials.push((splitter.local_best, splitter.found, splitter.nodes));

    let nodes = partials.iter().map(|p| p.2).sum::<u64>();
    shared.nodes.fetch_add(nodes, Ordering::Relaxed);
    let exhausted = !shared.stop.load(Ordering::Relaxed);
    match cfg.goal {
        Goal::Census { .. } => RunOutput {
            best: 0,
            found: partials.into_iter().flat_map(|p| p.1).collect(),
            nodes,
            exhausted,
        },
        Goal::Maximize { .. } => {
            let best = partials
                .iter()
                .filter(|p| !p.1.is_empty())
                .map(|p| p.0)
                .max()
                .unwrap_or(0);
            let found = partials.into_iter().filter(|p| p.0 == best).flat_map(|p| p.1).collect();
            RunOutput {
                best,
                found,
                nodes,
                exhausted,
            }
        }
    }
}

/// Canonicalizes, deduplicates and sorts graphs by canonical key.
fn canonical_classes(graphs: Vec<BiGraph>) -> BTreeMap<CanonicalKey, BiGraph> {
    let mut out = BTreeMap::new();
    for g in graphs {
        let (key, rows, cols) = g.canonical_labeling();
        out.entry(key)
            .or_insert_with(|| g.permute(&rows, &cols).expect("labeling is a permutation"));
    }
    out
}

fn finish(
    problem: Problem,
    m: usize,
    n: usize,
    opts: &SearchOptions,
    mut out: RunOutput,
    hint: Option<(usize, BiGraph)>,
    start: Instant,
) -> Result<SearchResult, SearchError> {
    if let Some((value, g)) = hint {
        if value > out.best || out.found.is_empty() {
            out.best = value;
            out.found = vec![g];
        } else if value == out.best {
            out.found.push(g);
        }
    }
    let classes = canonical_classes(out.found);
    let witness_classes = classes.len();
    let keep = if opts.collect_witnesses { opts.max_witnesses } else { 1 };
    let witnesses = classes.into_values().take(keep).collect();
    let result = SearchResult {
        problem,
        m,
        n,
        value: out.best,
        witnesses,
        witness_classes,
        nodes_explored: out.nodes,
        exhausted: out.exhausted,
        elapsed: start.elapsed(),
    };
    if result.exhausted {
        Ok(result)
    } else {
        Err(SearchError::TimeLimitExceeded(Box::new(result)))
    }
}

fn deadline(opts: &SearchOptions, start: Instant) -> Option<Instant> {
    opts.time_limit.map(|d| start + d)
}

/// Exact `z(m,n)`: the largest C4-free set of 1-edges.
pub fn classical_zarankiewicz(m: usize, n: usize, opts: &SearchOptions) -> Result<SearchResult, SearchError> {
    check_dims(m, n)?;
    let start = Instant::now();
    let cfg = Config {
        m,
        n,
        allow_two_edges: false,
        one_edge_cap: m * n,
        goal: Goal::Maximize {
            collect: opts.collect_witnesses,
        },
        paranoid: opts.paranoid,
        symmetry_breaking: opts.symmetry_breaking,
    };
    let out = run(cfg, opts, 0, deadline(opts, start));
    finish(Problem::Classical, m, n, opts, out, None, start)
}

/// Exact `z2(m,n)`: the largest admissible `|E1| + |E2|`.
pub fn double_zarankiewicz(m: usize, n: usize, opts: &SearchOptions) -> Result<SearchResult, SearchError> {
    check_dims(m, n)?;
    let start = Instant::now();
    // |E1| <= z(m,n); the classical optimum is also a starting lower bound
    let classical_opts = SearchOptions {
        collect_witnesses: false,
        ..opts.clone()
    };
    let (cap, hint) = match classical_zarankiewicz(m, n, &classical_opts) {
        Ok(r) => (r.value, r.witnesses.into_iter().next().map(|g| (r.value, g))),
        Err(SearchError::TimeLimitExceeded(partial)) => {
            let hint = partial.witnesses.into_iter().next().map(|g| (partial.value, g));
            let mut res = SearchResult {
                problem: Problem::Double,
                value: hint.as_ref().map_or(0, |h| h.0),
                witnesses: hint.into_iter().map(|h| h.1).collect(),
                elapsed: start.elapsed(),
                ..*partial
            };
            res.witness_classes = res.witnesses.len();
            return Err(SearchError::TimeLimitExceeded(Box::new(res)));
        }
        Err(e) => return Err(e),
    };
    let cfg = Config {
        m,
        n,
        allow_two_edges: true,
        one_edge_cap: cap,
        goal: Goal::Maximize {
            collect: opts.collect_witnesses,
        },
        paranoid: opts.paranoid,
        symmetry_breaking: opts.symmetry_breaking,
    };
    let initial = hint.as_ref().map_or(0, |h| h.0);
    let out = run(cfg, opts, initial, deadline(opts, start));
    finish(Problem::Double, m, n, opts, out, hint, start)
}

/// Certificate check for a lower bound: `g` is admissible with at least `t` edges.
pub fn verify_at_least(g: &BiGraph, t: usize) -> bool {
    g.total() >= t && is_admissible(g).is_admissible()
}

/// All admissible graphs with exactly `t` edges, one per isomorphism class,
/// sorted by canonical key. The witness cap does not apply.
pub fn extremal_census(
    m: usize,
    n: usize,
    t: usize,
    problem: Problem,
    opts: &SearchOptions,
) -> Result<Vec<BiGraph>, SearchError> {
    check_dims(m, n)?;
    let start = Instant::now();
    let cfg = Config {
        m,
        n,
        allow_two_edges: problem == Problem::Double,
        one_edge_cap: m * n,
        goal: Goal::Census { total: t },
        paranoid: opts.paranoid,
        symmetry_breaking: opts.symmetry_breaking,
    };
    let out = run(cfg, opts, 0, deadline(opts, start));
    let exhausted = out.exhausted;
    let nodes = out.nodes;
    let graphs: Vec<BiGraph> = canonical_classes(out.found).into_values().collect();
    if exhausted {
        Ok(graphs)
    } else {
        Err(SearchError::TimeLimitExceeded(Box::new(SearchResult {
            problem,
            m,
            n,
            value: t,
            witness_classes: graphs.len(),
            witnesses: graphs,
            nodes_explored: nodes,
            exhausted,
            elapsed: start.elapsed(),
        })))
    }
}

/// Values stated in the literature for small parameters, used to flag
/// disagreements in reports. Symmetric in `m` and `n`.
pub fn published_value(problem: Problem, m: usize, n: usize) -> Option<usize> {
    let (a, b) = if m >= n { (m, n) } else { (n, m) };
    if b == 2 {
        return Some(a + 1);
    }
    match (problem, a, b) {
        (Problem::Classical, 3, 3) => Some(6),
        (Problem::Classical, 4, 3) => Some(7),
        (Problem::Classical, 4, 4) => Some(9),
        (Problem::Classical, 5, 3) => Some(8),
        (Problem::Classical, 5, 4) => Some(10),
        (Problem::Classical, 5, 5) => Some(12),
        (Problem::Double, 3, 3) => Some(6),
        (Problem::Double, 4, 3) => Some(8),
        (Problem::Double, 4, 4) => Some(10),
        (Problem::Double, 5, 3) => Some(9),
        (Problem::Double, 5, 4) => Some(11),
        (Problem::Double, 5, 5) => Some(14),
        _ => None,
    }
}
