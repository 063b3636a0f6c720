//! Command-line front end. [`run`] takes argv and output streams and returns
//! the process exit code, so the binary is a one-liner and tests can drive
//! it in-process.
//!
//! Exit codes: 0 success, 2 inadmissible graph / refuted expectation /
//! probe red flag, 3 time limit (partial results are still printed),
//! 64 usage, 65 unparsable graph file, 66 unreadable graph file.

use std::io::Write;
use std::path::Path;
use std::time::Duration;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;
use thiserror::Error;

use crate::admissibility::is_admissible;
use crate::forms::BiquadraticForm;
use crate::gram::{
    self, canonical_gram, gram_matches_form, probe_graph, psd_rank, semidefinite_factor, GramMatrix, ProbeOptions,
    DEFAULT_EIG_TOL,
};
use crate::grid::{BiGraph, GridError, RawGraph};
use crate::search::{
    classical_zarankiewicz, double_zarankiewicz, extremal_census, published_value, Problem, SearchError, SearchOptions,
    SearchResult,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_REFUTED: i32 = 2;
pub const EXIT_TIME_LIMIT: i32 = 3;
pub const EXIT_USAGE: i32 = 64;
pub const EXIT_PARSE: i32 = 65;
pub const EXIT_IO: i32 = 66;

/// Graphs shipped with the crate, addressable by name.
pub const FIXTURES: [(&str, &str); 7] = [
    ("thm2_2", include_str!("../fixtures/thm2_2.json")),
    ("thm3_1", include_str!("../fixtures/thm3_1.json")),
    ("thm4_1", include_str!("../fixtures/thm4_1.json")),
    ("thm5_1", include_str!("../fixtures/thm5_1.json")),
    ("thm6_1", include_str!("../fixtures/thm6_1.json")),
    ("z2_5x4_t12", include_str!("../fixtures/z2_5x4_t12.json")),
    ("z2_5x5_t15", include_str!("../fixtures/z2_5x5_t15.json")),
];

#[derive(Debug, Error)]
pub enum LoadError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Parse {
        path: String,
        #[source]
        source: GridError,
    },
    #[error("no fixture named {0:?}")]
    UnknownFixture(String),
}

impl LoadError {
    fn exit_code(&self) -> i32 {
        match self {
            LoadError::Parse { .. } => EXIT_PARSE,
            LoadError::Io { .. } | LoadError::UnknownFixture(_) => EXIT_IO,
        }
    }
}

fn fixture_text(name: &str) -> Option<&'static str> {
    let stem = Path::new(name).file_stem().and_then(|s| s.to_str()).unwrap_or(name);
    FIXTURES.iter().find(|(n, _)| *n == stem).map(|(_, text)| *text)
}

/// Parses a shipped fixture; `name` may carry a directory and `.json`.
pub fn load_fixture(name: &str) -> Result<BiGraph, LoadError> {
    let text = fixture_text(name).ok_or_else(|| LoadError::UnknownFixture(name.to_string()))?;
    BiGraph::from_json(text).map_err(|source| LoadError::Parse {
        path: name.to_string(),
        source,
    })
}

/// File contents, falling back to the shipped fixture of the same name when
/// the path does not exist.
fn read_source(path: &str) -> Result<String, LoadError> {
    match std::fs::read_to_string(path) {
        Ok(text) => Ok(text),
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => match fixture_text(path) {
            Some(text) => Ok(text.to_string()),
            None => Err(LoadError::Io {
                path: path.to_string(),
                source: e,
            }),
        },
        Err(source) => Err(LoadError::Io {
            path: path.to_string(),
            source,
        }),
    }
}

/// The graph document without grid invariants applied.
pub fn load_raw(path: &str) -> Result<RawGraph, LoadError> {
    RawGraph::parse(&read_source(path)?).map_err(|source| LoadError::Parse {
        path: path.to_string(),
        source,
    })
}

pub fn load_graph(path: &str) -> Result<BiGraph, LoadError> {
    BiGraph::from_json(&read_source(path)?).map_err(|source| LoadError::Parse {
        path: path.to_string(),
        source,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Text,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Emit {
    Text,
    Json,
}

#[derive(Debug, Parser)]
#[command(
    name = "z2lab",
    version,
    about = "Zarankiewicz numbers, generalized C4 admissibility and Gram certificates"
)]
pub struct Cli {
    /// Worker threads for search and probes.
    #[arg(long, global = true, env = "Z2LAB_THREADS", default_value_t = 1)]
    pub threads: usize,
    /// Wall-clock limit in seconds; exceeding it exits with code 3.
    #[arg(long, global = true)]
    pub time_limit: Option<f64>,
    #[arg(long, global = true, value_enum, default_value_t = OutputFormat::Text)]
    pub output: OutputFormat,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Exact classical Zarankiewicz number z(m,n).
    Classical { m: usize, n: usize },
    /// Exact double Zarankiewicz number z2(m,n).
    Z2 {
        m: usize,
        n: usize,
        /// Report every extremal class, not just the first.
        #[arg(long)]
        all: bool,
    },
    /// z and z2 for all 2 ≤ m ≤ max_m, 2 ≤ n ≤ max_n, compared with published values.
    Table { max_m: usize, max_n: usize },
    /// Checks admissibility of a graph file and optionally its total.
    Verify {
        graph: String,
        #[arg(long)]
        expect_t: Option<usize>,
    },
    /// All admissible graphs with exactly t edges, up to isomorphism.
    Census {
        m: usize,
        n: usize,
        t: usize,
        /// 1-edges only.
        #[arg(long)]
        classical: bool,
    },
    /// The biquadratic form of a graph.
    Form {
        graph: String,
        #[arg(long, value_enum, default_value_t = Emit::Text)]
        emit: Emit,
    },
    /// Canonical Gram matrix, its rank and a factorization.
    Gram { graph: String },
    /// Numerical probe of the Gram spectrahedron.
    Probe {
        graph: String,
        /// Number of probes.
        #[arg(long, default_value_t = 100)]
        n: usize,
        #[arg(long, default_value_t = 1e-7)]
        tol: f64,
        #[arg(long, default_value_t = 20_000)]
        max_iter: usize,
        #[arg(long)]
        dykstra: bool,
        /// Iterate on full matrices instead of the reduced face.
        #[arg(long)]
        no_face_reduction: bool,
    },
}

struct Ctx<'a> {
    cli: &'a Cli,
    out: &'a mut dyn Write,
    err: &'a mut dyn Write,
}

impl Ctx<'_> {
    fn json(&self) -> bool {
        self.cli.output == OutputFormat::Json
    }

    fn search_options(&self, collect: bool) -> SearchOptions {
        SearchOptions {
            threads: self.cli.threads.max(1),
            time_limit: self.cli.time_limit.map(Duration::from_secs_f64),
            collect_witnesses: collect,
            seed: self.cli.seed,
            ..SearchOptions::default()
        }
    }
}

/// Runs the command line `args` (including the program name).
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let rendered = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{rendered}");
                    EXIT_OK
                }
                _ => {
                    let _ = write!(err, "{rendered}");
                    EXIT_USAGE
                }
            };
        }
    };
    if let Some(t) = cli.time_limit {
        if !(t.is_finite() && t > 0.0) {
            let _ = writeln!(err, "error: --time-limit must be a positive number of seconds");
            return EXIT_USAGE;
        }
    }
    let mut ctx = Ctx { cli: &cli, out, err };
    let code = dispatch(&mut ctx);
    let _ = ctx.out.flush();
    code
}

fn dispatch(ctx: &mut Ctx) -> i32 {
    let res = match &ctx.cli.command {
        Command::Classical { m, n } => cmd_search(ctx, Problem::Classical, *m, *n, true),
        Command::Z2 { m, n, all } => cmd_search(ctx, Problem::Double, *m, *n, *all),
        Command::Table { max_m, max_n } => cmd_table(ctx, *max_m, *max_n),
        Command::Verify { graph, expect_t } => cmd_verify(ctx, graph, *expect_t),
        Command::Census { m, n, t, classical } => {
            let problem = if *classical {
                Problem::Classical
            } else {
                Problem::Double
            };
            cmd_census(ctx, *m, *n, *t, problem)
        }
        Command::Form { graph, emit } => cmd_form(ctx, graph, *emit),
        Command::Gram { graph } => cmd_gram(ctx, graph),
        Command::Probe {
            graph,
            n,
            tol,
            max_iter,
            dykstra,
            no_face_reduction,
        } => {
            let opts = ProbeOptions {
                n_probes: *n,
                tol: *tol,
                max_iter: *max_iter,
                dykstra: *dykstra,
                facial_reduction: !*no_face_reduction,
                seed: ctx.cli.seed,
                threads: ctx.cli.threads.max(1),
                ..ProbeOptions::default()
            };
            cmd_probe(ctx, graph, &opts)
        }
    };
    match res {
        Ok(code) => code,
        Err(Failure::Load(e)) => {
            let _ = writeln!(ctx.err, "error: {e}");
            e.exit_code()
        }
        Err(Failure::Usage(msg)) => {
            let _ = writeln!(ctx.err, "error: {msg}");
            EXIT_USAGE
        }
        Err(Failure::Io(e)) => {
            let _ = writeln!(ctx.err, "error: {e}");
            EXIT_IO
        }
    }
}

enum Failure {
    Load(LoadError),
    Usage(String),
    Io(std::io::Error),
}

impl From<LoadError> for Failure {
    fn from(e: LoadError) -> Self {
        Failure::Load(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Io(e)
    }
}

type CmdResult = Result<i32, Failure>;

fn search(problem: Problem, m: usize, n: usize, opts: &SearchOptions) -> Result<(SearchResult, bool), Failure> {
    let r = match problem {
        Problem::Classical => classical_zarankiewicz(m, n, opts),
        Problem::Double => double_zarankiewicz(m, n, opts),
    };
    match r {
        Ok(r) => Ok((r, true)),
        Err(SearchError::TimeLimitExceeded(partial)) => Ok((*partial, false)),
        Err(SearchError::Dimension(e)) => Err(Failure::Usage(e.to_string())),
    }
}

fn symbol(problem: Problem) -> &'static str {
    match problem {
        Problem::Classical => "z",
        Problem::Double => "z2",
    }
}

fn search_json(r: &SearchResult) -> serde_json::Value {
    let published = published_value(r.problem, r.m, r.n);
    let mut v = serde_json::to_value(r).expect("result serializes");
    v["published"] = json!(published);
    v["agrees_with_published"] = json!(published.map(|p| p == r.value));
    v
}

fn cmd_search(ctx: &mut Ctx, problem: Problem, m: usize, n: usize, all: bool) -> CmdResult {
    let (r, done) = search(problem, m, n, &ctx.search_options(all))?;
    if ctx.json() {
        writeln!(ctx.out, "{}", search_json(&r))?;
    } else {
        let bound = if done { "=" } else { ">=" };
        writeln!(ctx.out, "{}({m},{n}) {bound} {}", symbol(problem), r.value)?;
        writeln!(ctx.out, "exhausted: {}", r.exhausted)?;
        writeln!(ctx.out, "nodes: {}", r.nodes_explored)?;
        match published_value(problem, m, n) {
            Some(p) if p == r.value => writeln!(ctx.out, "published: {p} (agrees)")?,
            Some(p) => writeln!(ctx.out, "published: {p} (DISCREPANCY)")?,
            None => {}
        }
        if all {
            writeln!(ctx.out, "extremal classes: {}", r.witness_classes)?;
        }
        for (k, w) in r.witnesses.iter().enumerate() {
            writeln!(ctx.out, "witness {}: {}", k + 1, w.to_json())?;
            write!(ctx.out, "{}", w.to_ascii())?;
        }
        writeln!(ctx.err, "elapsed: {:.3}s", r.elapsed.as_secs_f64())?;
    }
    Ok(if done { EXIT_OK } else { EXIT_TIME_LIMIT })
}

fn cmd_table(ctx: &mut Ctx, max_m: usize, max_n: usize) -> CmdResult {
    if max_m < 2 || max_n < 2 {
        return Err(Failure::Usage("table bounds must be at least 2".into()));
    }
    let opts = ctx.search_options(true);
    let mut rows = Vec::new();
    let mut all_done = true;
    if !ctx.json() {
        writeln!(
            ctx.out,
            "{:>2} {:>2} {:>4} {:>4} {:>9} {:>9}  status",
            "m", "n", "z", "z2", "pub z", "pub z2"
        )?;
    }
    for m in 2..=max_m {
        for n in 2..=max_n {
            let (z, z_done) = search(Problem::Classical, m, n, &opts)?;
            let (z2, z2_done) = search(Problem::Double, m, n, &opts)?;
            let done = z_done && z2_done;
            all_done &= done;
            let pz = published_value(Problem::Classical, m, n);
            let pz2 = published_value(Problem::Double, m, n);
            let disagrees = pz.is_some_and(|p| p != z.value) || pz2.is_some_and(|p| p != z2.value);
            let status = match (done, disagrees) {
                (false, _) => "INCOMPLETE",
                (true, true) => "DISCREPANCY",
                (true, false) => "ok",
            };
            if ctx.json() {
                rows.push(json!({
                    "m": m,
                    "n": n,
                    "z": z.value,
                    "z2": z2.value,
                    "published_z": pz,
                    "published_z2": pz2,
                    "exhausted": done,
                    "status": status,
                    "z2_classes": z2.witness_classes,
                    "z2_witness": z2.witnesses.first(),
                }));
            } else {
                let show = |v: Option<usize>| v.map_or("-".to_string(), |v| v.to_string());
                writeln!(
                    ctx.out,
                    "{m:>2} {n:>2} {:>4} {:>4} {:>9} {:>9}  {status}",
                    z.value,
                    z2.value,
                    show(pz),
                    show(pz2)
                )?;
                if let (Some(p), Some(w)) = (pz, z.witnesses.first()) {
                    if p != z.value {
                        writeln!(ctx.out, "      z witness: {}", w.to_json())?;
                    }
                }
                if let (Some(p), Some(w)) = (pz2, z2.witnesses.first()) {
                    if p != z2.value {
                        writeln!(ctx.out, "      z2 witness: {}", w.to_json())?;
                    }
                }
            }
        }
    }
    if ctx.json() {
        writeln!(ctx.out, "{}", json!({ "rows": rows }))?;
    }
    Ok(if all_done { EXIT_OK } else { EXIT_TIME_LIMIT })
}

fn cmd_verify(ctx: &mut Ctx, path: &str, expect_t: Option<usize>) -> CmdResult {
    let raw = load_raw(path)?;
    let g = match raw.clone().into_graph() {
        Ok(g) => g,
        Err((field, e @ (GridError::Overlap(_) | GridError::Degenerate(..)))) => {
            // well-formed but not a simple graph: a refuted claim, not a parse failure
            let listed = raw.e1.len() + raw.e2.len();
            if ctx.json() {
                writeln!(
                    ctx.out,
                    "{}",
                    json!({
                        "graph": raw,
                        "listed_total": listed,
                        "expect_t": expect_t,
                        "simple": false,
                        "violation": format!("{field}: {e}"),
                        "ok": false,
                    })
                )?;
            } else {
                writeln!(ctx.out, "listed total: {listed}")?;
                writeln!(ctx.out, "simplicity condition violated at {field}: {e}")?;
                writeln!(ctx.out, "FAILED")?;
            }
            return Ok(EXIT_REFUTED);
        }
        Err((field, source)) => {
            return Err(Failure::Load(LoadError::Parse {
                path: path.to_string(),
                source: GridError::Parse {
                    field,
                    line: 0,
                    column: 0,
                    message: source.to_string(),
                },
            }))
        }
    };
    let verdict = is_admissible(&g);
    let total_ok = expect_t.is_none_or(|t| t == g.total());
    let ok = verdict.is_admissible() && total_ok;
    if ctx.json() {
        writeln!(
            ctx.out,
            "{}",
            json!({
                "graph": g,
                "total": g.total(),
                "expect_t": expect_t,
                "simple": true,
                "verdict": verdict,
                "ok": ok,
            })
        )?;
    } else {
        writeln!(ctx.out, "{g}")?;
        writeln!(ctx.out, "total: {}", g.total())?;
        match verdict.witness() {
            None => writeln!(ctx.out, "admissible: yes")?,
            Some(w) => writeln!(
                ctx.out,
                "admissible: no, witness {}",
                serde_json::to_string(w).expect("witness serializes")
            )?,
        }
        if let Some(t) = expect_t {
            writeln!(
                ctx.out,
                "expected total {t}: {}",
                if total_ok { "matches" } else { "MISMATCH" }
            )?;
        }
        writeln!(ctx.out, "{}", if ok { "OK" } else { "FAILED" })?;
    }
    Ok(if ok { EXIT_OK } else { EXIT_REFUTED })
}

fn cmd_census(ctx: &mut Ctx, m: usize, n: usize, t: usize, problem: Problem) -> CmdResult {
    let opts = ctx.search_options(true);
    let (graphs, done) = match extremal_census(m, n, t, problem, &opts) {
        Ok(g) => (g, true),
        Err(SearchError::TimeLimitExceeded(p)) => (p.witnesses, false),
        Err(SearchError::Dimension(e)) => return Err(Failure::Usage(e.to_string())),
    };
    if ctx.json() {
        writeln!(
            ctx.out,
            "{}",
            json!({ "m": m, "n": n, "t": t, "problem": problem, "exhausted": done, "count": graphs.len(), "graphs": graphs })
        )?;
    } else {
        writeln!(ctx.out, "{} classes with total {t} on {m}x{n}", graphs.len())?;
        writeln!(ctx.out, "exhausted: {done}")?;
        for (k, g) in graphs.iter().enumerate() {
            writeln!(ctx.out, "class {}: {}", k + 1, g.to_json())?;
            write!(ctx.out, "{}", g.to_ascii())?;
        }
    }
    Ok(if done { EXIT_OK } else { EXIT_TIME_LIMIT })
}

fn cmd_form(ctx: &mut Ctx, path: &str, emit: Emit) -> CmdResult {
    let g = load_graph(path)?;
    let f: BiquadraticForm<i64> = BiquadraticForm::from_graph(&g);
    let as_json = emit == Emit::Json || ctx.json();
    if as_json {
        writeln!(ctx.out, "{}", f.to_json())?;
    } else {
        writeln!(ctx.out, "{}", f.to_text())?;
    }
    Ok(EXIT_OK)
}

fn cmd_gram(ctx: &mut Ctx, path: &str) -> CmdResult {
    let g = load_graph(path)?;
    let g0: GramMatrix<f64> = canonical_gram(&g);
    let f: BiquadraticForm<i64> = BiquadraticForm::from_graph(&g);
    let (rank, min_eig) = psd_rank(&g0, DEFAULT_EIG_TOL).expect("canonical Gram matrix is symmetric");
    let exact_rank = g0.exact_rank();
    let matches = gram_matches_form(&g0, &f, 100, 1e-9).expect("shapes agree");
    let factors = semidefinite_factor(&g0, 1e-12).expect("canonical Gram matrix is symmetric");
    let squares = gram::factor_text(&g0, &factors, 1e-12);
    if ctx.json() {
        let gram: serde_json::Value = serde_json::from_str(&g0.to_json()).expect("gram JSON");
        writeln!(
            ctx.out,
            "{}",
            json!({
                "gram": gram,
                "rank": rank,
                "exact_rank": exact_rank,
                "min_eig": min_eig,
                "psd": min_eig >= -DEFAULT_EIG_TOL,
                "total": g.total(),
                "matches_form": matches,
                "squares": squares,
            })
        )?;
    } else {
        let d = g0.dim();
        for r in 0..d {
            let row: Vec<String> = (0..d).map(|c| format!("{}", g0.entries()[(r, c)])).collect();
            writeln!(ctx.out, "{}", row.join(" "))?;
        }
        writeln!(
            ctx.out,
            "rank: {rank} (exact {})",
            exact_rank.map_or("-".into(), |r| r.to_string())
        )?;
        writeln!(ctx.out, "min eigenvalue: {min_eig:.3e}")?;
        writeln!(ctx.out, "|E1|+|E2|: {}", g.total())?;
        writeln!(ctx.out, "matches form: {matches}")?;
        for s in &squares {
            writeln!(ctx.out, "({s})^2")?;
        }
    }
    Ok(EXIT_OK)
}

fn cmd_probe(ctx: &mut Ctx, path: &str, opts: &ProbeOptions) -> CmdResult {
    let g = load_graph(path)?;
    let report = probe_graph::<f64>(&g, opts);
    if ctx.json() {
        writeln!(ctx.out, "{}", report.to_json())?;
    } else {
        writeln!(ctx.out, "{} ({}x{})", report.evidence, report.m, report.n)?;
        writeln!(ctx.out, "probes: {} converged: {}", report.n_probes, report.n_converged)?;
        writeln!(
            ctx.out,
            "min rank found: {}",
            report.min_rank_found.map_or("-".into(), |r| r.to_string())
        )?;
        match report.expected_rank {
            Some(r) => writeln!(ctx.out, "expected rank: {r}")?,
            None => writeln!(ctx.out, "expected rank: - (graph is not admissible)")?,
        }
        writeln!(
            ctx.out,
            "face rank: {} free parameters: {}",
            report.face_rank, report.free_parameters
        )?;
        writeln!(
            ctx.out,
            "max distance to canonical Gram: {}",
            report
                .max_distance_to_canonical
                .map_or("-".into(), |d| format!("{d:.3e}"))
        )?;
        if report.red_flag() {
            writeln!(
                ctx.out,
                "RED FLAG: probes {:?} found a feasible Gram matrix of lower rank",
                report.red_flags
            )?;
        }
    }
    Ok(if report.red_flag() { EXIT_REFUTED } else { EXIT_OK })
}
