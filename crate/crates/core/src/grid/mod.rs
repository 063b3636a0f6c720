//! Doubly-edged bipartite graphs on an `m × n` grid of cells.
//!
//! Rows are the left vertex class, columns the right one. A 1-edge occupies a
//! single cell; a 2-edge occupies two cells in distinct rows and columns
//! (its *halves*). No cell may be used twice. Everything is 1-based.

use std::fmt;

mod canon;
mod json;

pub use canon::{canonical_key_brute_force, CanonicalKey};
pub use json::RawGraph;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Largest supported number of cells, so occupancy fits in one `u64`.
pub const MAX_CELLS: usize = 64;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GridError {
    #[error("dimensions {m}x{n} out of range (need m, n >= 2 and m*n <= 64)")]
    Dimension { m: usize, n: usize },
    #[error("cell ({row},{col}) outside the {m}x{n} grid")]
    Range { row: usize, col: usize, m: usize, n: usize },
    #[error("cell {0} is already occupied")]
    Overlap(Cell),
    #[error("2-edge ({0};{1}) is degenerate: halves share a row or a column")]
    Degenerate(Cell, Cell),
    #[error("{0} is not present in the graph")]
    Missing(String),
    #[error("permutation of length {got} does not match dimension {want}")]
    Permutation { got: usize, want: usize },
    #[error("parse error at {field} (line {line}, column {column}): {message}")]
    Parse {
        field: String,
        line: usize,
        column: usize,
        message: String,
    },
}

/// Two 1-based `(row, col)` positions, the input form of a 2-edge.
pub type IndexPair = ((usize, usize), (usize, usize));

/// A grid cell `(row, col)`, 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Cell {
    pub row: u8,
    pub col: u8,
}

impl Cell {
    pub fn new(row: usize, col: usize) -> Self {
        debug_assert!(row >= 1 && col >= 1 && row <= 64 && col <= 64);
        Cell {
            row: row as u8,
            col: col as u8,
        }
    }

    pub fn row(self) -> usize {
        self.row as usize
    }

    pub fn col(self) -> usize {
        self.col as usize
    }

    pub fn transpose(self) -> Cell {
        Cell {
            row: self.col,
            col: self.row,
        }
    }
}

impl From<(usize, usize)> for Cell {
    fn from((row, col): (usize, usize)) -> Self {
        Cell::new(row, col)
    }
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.row, self.col)
    }
}

impl Serialize for Cell {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        [self.row as usize, self.col as usize].serialize(s)
    }
}

impl<'de> Deserialize<'de> for Cell {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let [row, col] = <[usize; 2]>::deserialize(d)?;
        if row == 0 || col == 0 || row > 64 || col > 64 {
            return Err(serde::de::Error::custom(format!(
                "cell indices are 1-based and at most 64, got [{row},{col}]"
            )));
        }
        Ok(Cell::new(row, col))
    }
}

/// An unordered nondegenerate pair of cells, stored with the smaller cell first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TwoEdge {
    a: Cell,
    b: Cell,
}

impl TwoEdge {
    pub fn new(a: Cell, b: Cell) -> Result<Self, GridError> {
        if a.row == b.row || a.col == b.col {
            return Err(GridError::Degenerate(a, b));
        }
        Ok(if a <= b {
            TwoEdge { a, b }
        } else {
            TwoEdge { a: b, b: a }
        })
    }

    /// Shorthand for `(i,j;k,l)`.
    pub fn from_indices(i: usize, j: usize, k: usize, l: usize) -> Result<Self, GridError> {
        TwoEdge::new(Cell::new(i, j), Cell::new(k, l))
    }

    pub fn first(&self) -> Cell {
        self.a
    }

    pub fn second(&self) -> Cell {
        self.b
    }

    pub fn halves(&self) -> [Cell; 2] {
        [self.a, self.b]
    }

    /// The opposite cells `(i,l)` and `(k,j)` of `(i,j;k,l)`.
    pub fn opposites(&self) -> [Cell; 2] {
        let (a, b) = (self.a, self.b);
        let mut out = [Cell { row: a.row, col: b.col }, Cell { row: b.row, col: a.col }];
        out.sort();
        out
    }

    pub fn transpose(&self) -> TwoEdge {
        TwoEdge::new(self.a.transpose(), self.b.transpose()).expect("transpose keeps nondegeneracy")
    }
}

impl fmt::Display for TwoEdge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{};{},{})", self.a.row, self.a.col, self.b.row, self.b.col)
    }
}

impl Serialize for TwoEdge {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        [self.a, self.b].serialize(s)
    }
}

impl<'de> Deserialize<'de> for TwoEdge {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let [a, b] = <[Cell; 2]>::deserialize(d)?;
        TwoEdge::new(a, b).map_err(serde::de::Error::custom)
    }
}

/// What sits in a cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum CellState {
    OneEdge,
    Half,
    Empty,
}

/// An `m × n` bipartite graph with 1-edges and 2-edges satisfying the
/// simplicity condition: all halves are distinct and none is a 1-edge.
///
/// Values are immutable in spirit: the `add_*` and `remove_*` methods return
/// new graphs. The 2-edge list is kept sorted.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BiGraph {
    m: u8,
    n: u8,
    e1: u64,
    e2: Vec<TwoEdge>,
    occupancy: u64,
}

impl BiGraph {
    pub fn new(m: usize, n: usize) -> Result<Self, GridError> {
        if m < 2 || n < 2 || m * n > MAX_CELLS {
            return Err(GridError::Dimension { m, n });
        }
        Ok(BiGraph {
            m: m as u8,
            n: n as u8,
            e1: 0,
            e2: Vec::new(),
            occupancy: 0,
        })
    }

    /// Builds a graph from 1-based index lists, e.g. fixtures typed in by hand.
    pub fn from_parts(m: usize, n: usize, e1: &[(usize, usize)], e2: &[IndexPair]) -> Result<Self, GridError> {
        let mut g = BiGraph::new(m, n)?;
        for &c in e1 {
            g.insert_one_edge(c.into())?;
        }
        for &(a, b) in e2 {
            g.insert_two_edge(TwoEdge::new(a.into(), b.into())?)?;
        }
        Ok(g)
    }

    pub fn m(&self) -> usize {
        self.m as usize
    }

    pub fn n(&self) -> usize {
        self.n as usize
    }

    pub fn cell_count(&self) -> usize {
        self.m() * self.n()
    }

    /// Occupancy bit of `c`: `(row-1)*n + (col-1)`.
    pub fn bit_index(&self, c: Cell) -> usize {
        (c.row() - 1) * self.n() + (c.col() - 1)
    }

    pub fn cell_at(&self, bit: usize) -> Cell {
        Cell::new(bit / self.n() + 1, bit % self.n() + 1)
    }

    pub fn in_range(&self, c: Cell) -> bool {
        c.row >= 1 && c.col >= 1 && c.row <= self.m && c.col <= self.n
    }

    fn check_range(&self, c: Cell) -> Result<(), GridError> {
        if self.in_range(c) {
            Ok(())
        } else {
            Err(GridError::Range {
                row: c.row(),
                col: c.col(),
                m: self.m(),
                n: self.n(),
            })
        }
    }

    pub fn e1_bits(&self) -> u64 {
        self.e1
    }

    pub fn occupancy(&self) -> u64 {
        self.occupancy
    }

    pub fn occupancy_count(&self) -> usize {
        self.occupancy.count_ones() as usize
    }

    /// 1-edges in row-major (lexicographic) order.
    pub fn e1(&self) -> Vec<Cell> {
        self.bits_to_cells(self.e1)
    }

    pub fn e1_count(&self) -> usize {
        self.e1.count_ones() as usize
    }

    pub fn e2(&self) -> &[TwoEdge] {
        &self.e2
    }

    pub fn e2_count(&self) -> usize {
        self.e2.len()
    }

    /// `|E1| + |E2|`.
    pub fn total(&self) -> usize {
        self.e1_count() + self.e2_count()
    }

    pub fn occupied_cells(&self) -> Vec<Cell> {
        self.bits_to_cells(self.occupancy)
    }

    fn bits_to_cells(&self, mut bits: u64) -> Vec<Cell> {
        let mut out = Vec::with_capacity(bits.count_ones() as usize);
        while bits != 0 {
            let b = bits.trailing_zeros() as usize;
            out.push(self.cell_at(b));
            bits &= bits - 1;
        }
        out
    }

    pub fn is_occupied(&self, c: Cell) -> bool {
        self.in_range(c) && self.occupancy >> self.bit_index(c) & 1 == 1
    }

    pub fn is_one_edge(&self, c: Cell) -> bool {
        self.in_range(c) && self.e1 >> self.bit_index(c) & 1 == 1
    }

    pub fn state(&self, c: Cell) -> CellState {
        if self.is_one_edge(c) {
            CellState::OneEdge
        } else if self.is_occupied(c) {
            CellState::Half
        } else {
            CellState::Empty
        }
    }

    /// The 2-edge that has `c` as a half, if any.
    pub fn two_edge_at(&self, c: Cell) -> Option<TwoEdge> {
        self.e2.iter().copied().find(|e| e.a == c || e.b == c)
    }

    pub fn add_one_edge(&self, c: Cell) -> Result<Self, GridError> {
        let mut g = self.clone();
        g.insert_one_edge(c)?;
        Ok(g)
    }

    pub fn add_two_edge(&self, e: TwoEdge) -> Result<Self, GridError> {
        let mut g = self.clone();
        g.insert_two_edge(e)?;
        Ok(g)
    }

    /// In-place variant of [`BiGraph::add_one_edge`].
    pub fn insert_one_edge(&mut self, c: Cell) -> Result<(), GridError> {
        self.check_range(c)?;
        let bit = 1u64 << self.bit_index(c);
        if self.occupancy & bit != 0 {
            return Err(GridError::Overlap(c));
        }
        self.e1 |= bit;
        self.occupancy |= bit;
        Ok(())
    }

    /// In-place variant of [`BiGraph::add_two_edge`].
    pub fn insert_two_edge(&mut self, e: TwoEdge) -> Result<(), GridError> {
        self.check_range(e.a)?;
        self.check_range(e.b)?;
        for c in e.halves() {
            if self.is_occupied(c) {
                return Err(GridError::Overlap(c));
            }
        }
        self.occupancy |= 1u64 << self.bit_index(e.a);
        self.occupancy |= 1u64 << self.bit_index(e.b);
        let pos = self.e2.binary_search(&e).unwrap_or_else(|p| p);
        self.e2.insert(pos, e);
        Ok(())
    }

    pub fn remove_one_edge(&self, c: Cell) -> Result<Self, GridError> {
        if !self.is_one_edge(c) {
            return Err(GridError::Missing(format!("1-edge {c}")));
        }
        let mut g = self.clone();
        let bit = 1u64 << g.bit_index(c);
        g.e1 &= !bit;
        g.occupancy &= !bit;
        Ok(g)
    }

    pub fn remove_two_edge(&self, e: TwoEdge) -> Result<Self, GridError> {
        let pos = self
            .e2
            .binary_search(&e)
            .map_err(|_| GridError::Missing(format!("2-edge {e}")))?;
        let mut g = self.clone();
        g.e2.remove(pos);
        for c in e.halves() {
            g.occupancy &= !(1u64 << g.bit_index(c));
        }
        Ok(g)
    }

    /// Relabels rows and columns: old row `i` goes to `row_perm[i-1] + 1`,
    /// old column `j` to `col_perm[j-1] + 1` (permutations are 0-based).
    pub fn permute(&self, row_perm: &[usize], col_perm: &[usize]) -> Result<Self, GridError> {
        check_perm(row_perm, self.m())?;
        check_perm(col_perm, self.n())?;
        let map = |c: Cell| Cell::new(row_perm[c.row() - 1] + 1, col_perm[c.col() - 1] + 1);
        let mut g = BiGraph::new(self.m(), self.n())?;
        for c in self.e1() {
            g.insert_one_edge(map(c))?;
        }
        for e in &self.e2 {
            g.insert_two_edge(TwoEdge::new(map(e.a), map(e.b))?)?;
        }
        Ok(g)
    }

    /// Swaps the roles of rows and columns; `(i,j;p,q)` becomes `(j,i;q,p)`.
    pub fn transpose(&self) -> Self {
        let mut g = BiGraph::new(self.n(), self.m()).expect("transposed dims are valid");
        for c in self.e1() {
            g.insert_one_edge(c.transpose()).expect("transpose is injective");
        }
        for e in &self.e2 {
            g.insert_two_edge(e.transpose()).expect("transpose is injective");
        }
        g
    }

    /// Renders the grid with `1` for 1-edges, letters for paired halves and
    /// `.` for empty cells.
    pub fn to_ascii(&self) -> String {
        let mut out = String::new();
        for i in 1..=self.m() {
            for j in 1..=self.n() {
                let c = Cell::new(i, j);
                let ch = match self.state(c) {
                    CellState::OneEdge => '1',
                    CellState::Empty => '.',
                    CellState::Half => {
                        let idx = self.e2.iter().position(|e| e.a == c || e.b == c).unwrap();
                        (b'a' + (idx % 26) as u8) as char
                    }
                };
                if j > 1 {
                    out.push(' ');
                }
                out.push(ch);
            }
            out.push('\n');
        }
        out
    }
}

fn check_perm(p: &[usize], len: usize) -> Result<(), GridError> {
    if p.len() != len {
        return Err(GridError::Permutation {
            got: p.len(),
            want: len,
        });
    }
    let mut seen = 0u64;
    for &x in p {
        if x >= len || seen >> x & 1 == 1 {
            return Err(GridError::Permutation {
                got: p.len(),
                want: len,
            });
        }
        seen |= 1 << x;
    }
    Ok(())
}

impl fmt::Display for BiGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x{} E1={{", self.m, self.n)?;
        for (k, c) in self.e1().iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, "}} E2={{")?;
        for (k, e) in self.e2.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{e}")?;
        }
        write!(f, "}}")
    }
}
