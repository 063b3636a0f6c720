//! Depth-first branch and bound over cell assignments.
//!
//! Cells are visited in row-major order. A free cell becomes a 1-edge, the
//! first half of a 2-edge whose partner is a free cell in a later row, or
//! stays empty, tried in that order. Cells already claimed as a partner half
//! are skipped over. Every labeled graph has exactly one decision path.
//!
//! Symmetry: each cell carries a symbol (`0` 1-edge, `1` half, `2` empty) and
//! only graphs whose symbol matrix has lexicographically non-decreasing rows
//! and columns are generated. Every row × column orbit contains such a graph,
//! so maxima and isomorphism-class censuses are unaffected.
//!
//! Admissibility is maintained incrementally with row and column masks and
//! checked against the reference checkers in paranoid mode.

use std::sync::atomic::{AtomicBool, AtomicU64, AtomicUsize, Ordering};
use std::time::Instant;

use crate::admissibility;
use crate::grid::{BiGraph, Cell, TwoEdge};

pub(crate) const MAX_SIDE: usize = 32;

const SYM_ONE: u8 = 0;
const SYM_HALF: u8 = 1;
const SYM_EMPTY: u8 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Goal {
    /// Maximize `|E1| + |E2|`; when `collect` is set, every graph attaining the
    /// maximum is reported.
    Maximize { collect: bool },
    /// Report every graph with exactly this total.
    Census { total: usize },
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct Config {
    pub m: usize,
    pub n: usize,
    pub allow_two_edges: bool,
    /// Upper bound on the number of 1-edges (classical Zarankiewicz number).
    pub one_edge_cap: usize,
    pub goal: Goal,
    pub paranoid: bool,
    /// Restrict to double-lex ordered symbol matrices.
    pub symmetry_breaking: bool,
}

/// Cross-task state: best total seen so far, node budget bookkeeping, and
/// the stop flag raised on timeout.
pub(crate) struct Shared {
    pub best: AtomicUsize,
    pub stop: AtomicBool,
    pub nodes: AtomicU64,
    pub deadline: Option<Instant>,
}

impl Shared {
    pub fn new(initial_best: usize, deadline: Option<Instant>) -> Self {
        Shared {
            best: AtomicUsize::new(initial_best),
            stop: AtomicBool::new(false),
            nodes: AtomicU64::new(0),
            deadline,
        }
    }
}

/// Position in the tree from which a subtask resumes.
#[derive(Clone)]
pub(crate) struct Task {
    state: State,
    idx: usize,
    col_ties: u64,
    row_tie: bool,
}

#[derive(Clone)]
struct State {
    one_rows: [u64; MAX_SIDE],
    occ_rows: [u64; MAX_SIDE],
    occ_cols: [u64; MAX_SIDE],
    sym: [u8; 64],
    edges: [[u8; 4]; 32],
    edge_count: usize,
    ones: usize,
    /// Partner halves placed at cells not yet visited.
    pending: usize,
}

impl State {
    fn empty() -> Self {
        State {
            one_rows: [0; MAX_SIDE],
            occ_rows: [0; MAX_SIDE],
            occ_cols: [0; MAX_SIDE],
            sym: [SYM_EMPTY; 64],
            edges: [[0; 4]; 32],
            edge_count: 0,
            ones: 0,
            pending: 0,
        }
    }

    #[inline]
    fn occupied(&self, r: usize, c: usize) -> bool {
        self.occ_rows[r] >> c & 1 == 1
    }

    #[inline]
    fn occupy(&mut self, r: usize, c: usize) {
        self.occ_rows[r] |= 1 << c;
        self.occ_cols[c] |= 1 << r;
    }

    #[inline]
    fn vacate(&mut self, r: usize, c: usize) {
        self.occ_rows[r] &= !(1 << c);
        self.occ_cols[c] &= !(1 << r);
    }

    /// Condition 2 or 3 holds for the 2-edge `(i,j;p,q)` (0-based).
    #[inline]
    fn edge_violated(&self, e: [u8; 4]) -> bool {
        let [i, j, p, q] = e.map(usize::from);
        if self.occupied(i, q) && self.occupied(p, j) {
            return true;
        }
        // rows k ∉ {i,p} with (k,j),(k,q) occupied; columns l ∉ {j,q} with
        // (i,l),(p,l) occupied; a violation needs (k,l) occupied as well
        let mut rows = self.occ_cols[j] & self.occ_cols[q] & !(1u64 << i | 1u64 << p);
        let cols = self.occ_rows[i] & self.occ_rows[p] & !(1u64 << j | 1u64 << q);
        if cols == 0 {
            return false;
        }
        while rows != 0 {
            let k = rows.trailing_zeros() as usize;
            if self.occ_rows[k] & cols != 0 {
                return true;
            }
            rows &= rows - 1;
        }
        false
    }

    fn any_edge_violated(&self) -> bool {
        self.edges[..self.edge_count].iter().any(|&e| self.edge_violated(e))
    }

    /// Adding a 1-edge at `(r,c)` closes a 2×2 block with an earlier row.
    #[inline]
    fn closes_c4(&self, r: usize, c: usize) -> bool {
        let row = self.one_rows[r] & !(1u64 << c);
        if row == 0 {
            return false;
        }
        (0..r).any(|k| self.one_rows[k] >> c & 1 == 1 && self.one_rows[k] & row != 0)
    }

    fn to_graph(&self, m: usize, n: usize) -> BiGraph {
        let mut g = BiGraph::new(m, n).expect("engine dimensions are valid");
        for r in 0..m {
            let mut bits = self.one_rows[r];
            while bits != 0 {
                let c = bits.trailing_zeros() as usize;
                g.insert_one_edge(Cell::new(r + 1, c + 1))
                    .expect("engine keeps cells disjoint");
                bits &= bits - 1;
            }
        }
        for e in &self.edges[..self.edge_count] {
            let [i, j, p, q] = e.map(usize::from);
            let te = TwoEdge::from_indices(i + 1, j + 1, p + 1, q + 1).expect("nondegenerate by construction");
            g.insert_two_edge(te).expect("engine keeps cells disjoint");
        }
        g
    }
}

pub(crate) struct Worker<'a> {
    cfg: Config,
    shared: &'a Shared,
    cells: usize,
    st: State,
    pub nodes: u64,
    /// Best total this worker reached at a leaf, with the graphs at that total.
    pub local_best: usize,
    pub found: Vec<BiGraph>,
    split_depth: Option<usize>,
    pub tasks: Vec<Task>,
}

impl<'a> Worker<'a> {
    pub fn new(cfg: Config, shared: &'a Shared) -> Self {
        Worker {
            cfg,
            shared,
            cells: cfg.m * cfg.n,
            st: State::empty(),
            nodes: 0,
            local_best: 0,
            found: Vec::new(),
            split_depth: None,
            tasks: Vec::new(),
        }
    }

    /// Explores the tree down to `depth` decided cells and returns the
    /// frontier as independent subtasks (leaves above that depth are
    /// handled directly).
    pub fn split(&mut self, depth: usize) -> Vec<Task> {
        self.split_depth = Some(depth);
        self.dfs(0, u64::MAX, false);
        self.split_depth = None;
        std::mem::take(&mut self.tasks)
    }

    pub fn run_task(&mut self, task: &Task) {
        self.st = task.state.clone();
        self.dfs(task.idx, task.col_ties, task.row_tie);
    }

    fn threshold(&self) -> usize {
        match self.cfg.goal {
            Goal::Census { total } => total,
            Goal::Maximize { collect } => {
                let best = self.local_best.max(self.shared.best.load(Ordering::Relaxed));
                if collect {
                    best
                } else {
                    best + 1
                }
            }
        }
    }

    fn upper_bound(&self, idx: usize) -> usize {
        let st = &self.st;
        let free = self.cells - idx - st.pending;
        let total = st.ones + st.edge_count;
        let ones = free.min(self.cfg.one_edge_cap.saturating_sub(st.ones));
        if self.cfg.allow_two_edges {
            total + ones + (free - ones) / 2
        } else {
            total + ones
        }
    }

    fn leaf(&mut self) {
        let total = self.st.ones + self.st.edge_count;
        match self.cfg.goal {
            Goal::Census { total: want } => {
                if total == want {
                    self.found.push(self.st.to_graph(self.cfg.m, self.cfg.n));
                }
            }
            Goal::Maximize { collect } => {
                if total > self.local_best || self.found.is_empty() && total >= self.local_best {
                    self.local_best = total;
                    self.found.clear();
                    self.found.push(self.st.to_graph(self.cfg.m, self.cfg.n));
                    self.shared.best.fetch_max(total, Ordering::Relaxed);
                } else if collect && total == self.local_best {
                    self.found.push(self.st.to_graph(self.cfg.m, self.cfg.n));
                }
            }
        }
    }

    fn check_paranoid(&self, engine_ok: bool) {
        let g = self.st.to_graph(self.cfg.m, self.cfg.n);
        let reference = admissibility::is_admissible(&g).is_admissible();
        assert_eq!(
            engine_ok, reference,
            "incremental admissibility disagrees with the reference checker on {g}"
        );
    }

    fn dfs(&mut self, idx: usize, col_ties: u64, row_tie: bool) {
        self.nodes += 1;
        // every node reads the flag so the whole stack unwinds promptly
        if self.shared.stop.load(Ordering::Relaxed) {
            return;
        }
        if self.nodes & 0xfff == 0 {
            if let Some(deadline) = self.shared.deadline {
                if Instant::now() >= deadline {
                    self.shared.stop.store(true, Ordering::Relaxed);
                    return;
                }
            }
        }
        if idx == self.cells {
            self.leaf();
            return;
        }
        if self.upper_bound(idx) < self.threshold() {
            return;
        }
        let n = self.cfg.n;
        let (r, c) = (idx / n, idx % n);
        let row_tie = if c == 0 { r > 0 } else { row_tie };
        if let Some(depth) = self.split_depth {
            if idx == depth {
                self.tasks.push(Task {
                    state: self.st.clone(),
                    idx,
                    col_ties,
                    row_tie,
                });
                return;
            }
        }

        // lower bound on this cell's symbol from the ordering constraints
        let mut lb = SYM_ONE;
        if c > 0 && col_ties >> c & 1 == 1 && self.cfg.symmetry_breaking {
            lb = self.st.sym[idx - 1];
        }
        if row_tie && self.cfg.symmetry_breaking {
            lb = lb.max(self.st.sym[idx - n]);
        }
        let next = |s: u8, st: &State| -> (u64, bool) {
            let mut ct = col_ties;
            if c > 0 && ct >> c & 1 == 1 && st.sym[idx - 1] != s {
                ct &= !(1 << c);
            }
            (ct, row_tie && st.sym[idx - n] == s)
        };

        if self.st.occupied(r, c) {
            // partner half placed from an earlier row
            if lb > SYM_HALF {
                return;
            }
            let (ct, rt) = next(SYM_HALF, &self.st);
            self.st.pending -= 1;
            self.dfs(idx + 1, ct, rt);
            self.st.pending += 1;
            return;
        }

        if lb == SYM_ONE && self.st.ones < self.cfg.one_edge_cap {
            self.st.one_rows[r] |= 1 << c;
            self.st.occupy(r, c);
            let ok = !self.st.closes_c4(r, c) && !self.st.any_edge_violated();
            if self.cfg.paranoid {
                self.check_paranoid(ok);
            }
            if ok {
                self.st.sym[idx] = SYM_ONE;
                self.st.ones += 1;
                let (ct, rt) = next(SYM_ONE, &self.st);
                self.dfs(idx + 1, ct, rt);
                self.st.ones -= 1;
                self.st.sym[idx] = SYM_EMPTY;
            }
            self.st.vacate(r, c);
            self.st.one_rows[r] &= !(1 << c);
        }

        if lb <= SYM_HALF && self.cfg.allow_two_edges {
            self.st.occupy(r, c);
            self.st.sym[idx] = SYM_HALF;
            for r2 in r + 1..self.cfg.m {
                for c2 in 0..n {
                    if c2 == c || self.st.occupied(r2, c2) {
                        continue;
                    }
                    self.st.occupy(r2, c2);
                    self.st.sym[r2 * n + c2] = SYM_HALF;
                    let k = self.st.edge_count;
                    self.st.edges[k] = [r as u8, c as u8, r2 as u8, c2 as u8];
                    self.st.edge_count += 1;
                    let ok = !self.st.any_edge_violated();
                    if self.cfg.paranoid {
                        self.check_paranoid(ok);
                    }
                    if ok {
                        self.st.pending += 1;
                        let (ct, rt) = next(SYM_HALF, &self.st);
                        self.dfs(idx + 1, ct, rt);
                        self.st.pending -= 1;
                    }
                    self.st.edge_count -= 1;
                    self.st.sym[r2 * n + c2] = SYM_EMPTY;
                    self.st.vacate(r2, c2);
                }
            }
            self.st.sym[idx] = SYM_EMPTY;
            self.st.vacate(r, c);
        }

        let (ct, rt) = next(SYM_EMPTY, &self.st);
        self.dfs(idx + 1, ct, rt);
    }
}
