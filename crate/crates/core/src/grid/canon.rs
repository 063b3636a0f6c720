//! Canonical keys under independent row and column permutations.
//!
//! The key of a graph is the lexicographically smallest encoding over all
//! `m! · n!` relabelings, where the encoding is `[m, n]`, then one symbol per
//! cell in row-major order (`0` 1-edge, `1` half, `2` empty), then the sorted
//! list of 2-edges as pairs of bit indices. Transposition is not part of the
//! group.
//!
//! [`canonical_key_brute_force`] computes this literally. The default path
//! reaches the same minimum by picking rows one at a time against an ordered
//! partition of the columns, branching only where rows tie.

use std::fmt;

use itertools::Itertools;

use super::{BiGraph, CellState, TwoEdge};

const SYM_ONE: u8 = 0;
const SYM_HALF: u8 = 1;
const SYM_EMPTY: u8 = 2;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CanonicalKey(Vec<u8>);

impl CanonicalKey {
    pub fn as_bytes(&self) -> &[u8] {
        &self.0
    }
}

impl fmt::Display for CanonicalKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in &self.0 {
            write!(f, "{b:02x}")?;
        }
        Ok(())
    }
}

fn symbol_table(g: &BiGraph) -> Vec<Vec<u8>> {
    (1..=g.m())
        .map(|i| {
            (1..=g.n())
                .map(|j| match g.state((i, j).into()) {
                    CellState::OneEdge => SYM_ONE,
                    CellState::Half => SYM_HALF,
                    CellState::Empty => SYM_EMPTY,
                })
                .collect()
        })
        .collect()
}

/// Encodes the 2-edges after moving old row `r` to `row_pos[r]` and old column
/// `c` to `col_pos[c]` (all 0-based).
fn encode_tail(g: &BiGraph, row_pos: &[usize], col_pos: &[usize]) -> Vec<u8> {
    let n = g.n();
    let mut edges: Vec<(u8, u8)> = g
        .e2()
        .iter()
        .map(|e: &TwoEdge| {
            let idx = |c: super::Cell| (row_pos[c.row() - 1] * n + col_pos[c.col() - 1]) as u8;
            let (a, b) = (idx(e.first()), idx(e.second()));
            if a < b {
                (a, b)
            } else {
                (b, a)
            }
        })
        .collect();
    edges.sort_unstable();
    edges.into_iter().flat_map(|(a, b)| [a, b]).collect()
}

fn assemble(g: &BiGraph, symbols: &[u8], tail: &[u8]) -> CanonicalKey {
    let mut bytes = Vec::with_capacity(2 + symbols.len() + tail.len());
    bytes.push(g.m() as u8);
    bytes.push(g.n() as u8);
    bytes.extend_from_slice(symbols);
    bytes.extend_from_slice(tail);
    CanonicalKey(bytes)
}

/// Literal minimum over every row and column permutation. Exponential; meant
/// for small grids and as a reference for the default algorithm.
pub fn canonical_key_brute_force(g: &BiGraph) -> CanonicalKey {
    let (m, n) = (g.m(), g.n());
    let sym = symbol_table(g);
    let col_perms: Vec<Vec<usize>> = (0..n).permutations(n).collect();
    let mut best: Option<(Vec<u8>, Vec<u8>)> = None;
    let mut symbols = vec![0u8; m * n];
    for row_pos in (0..m).permutations(m) {
        for col_pos in &col_perms {
            for r in 0..m {
                for c in 0..n {
                    symbols[row_pos[r] * n + col_pos[c]] = sym[r][c];
                }
            }
            let better = match &best {
                None => true,
                Some((bs, bt)) => match symbols.as_slice().cmp(bs.as_slice()) {
                    std::cmp::Ordering::Less => true,
                    std::cmp::Ordering::Greater => false,
                    std::cmp::Ordering::Equal => encode_tail(g, &row_pos, col_pos).as_slice() < bt.as_slice(),
                },
            };
            if better {
                best = Some((symbols.clone(), encode_tail(g, &row_pos, col_pos)));
            }
        }
    }
    let (s, t) = best.expect("at least the identity permutation");
    assemble(g, &s, &t)
}

struct Refiner<'a> {
    g: &'a BiGraph,
    sym: Vec<Vec<u8>>,
    row_has_half: Vec<bool>,
    col_has_half: Vec<bool>,
    best_symbols: Option<Vec<u8>>,
    best_tail: Vec<u8>,
    best_rows: Vec<usize>,
    best_cols: Vec<usize>,
}

impl<'a> Refiner<'a> {
    fn new(g: &'a BiGraph) -> Self {
        let sym = symbol_table(g);
        let row_has_half = sym.iter().map(|r| r.contains(&SYM_HALF)).collect();
        let col_has_half = (0..g.n()).map(|c| sym.iter().any(|r| r[c] == SYM_HALF)).collect();
        Refiner {
            g,
            sym,
            row_has_half,
            col_has_half,
            best_symbols: None,
            best_tail: Vec::new(),
            best_rows: Vec::new(),
            best_cols: Vec::new(),
        }
    }

    fn row_vector(&self, r: usize, partition: &[Vec<usize>]) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.g.n());
        for cell in partition {
            let start = out.len();
            out.extend(cell.iter().map(|&c| self.sym[r][c]));
            out[start..].sort_unstable();
        }
        out
    }

    fn search(&mut self, chosen: &mut Vec<usize>, partition: Vec<Vec<usize>>, prefix: &mut Vec<u8>) {
        let m = self.g.m();
        if chosen.len() == m {
            self.leaf(chosen, &partition, prefix);
            return;
        }
        let remaining: Vec<usize> = (0..m).filter(|r| !chosen.contains(r)).collect();
        let vectors: Vec<(usize, Vec<u8>)> = remaining.iter().map(|&r| (r, self.row_vector(r, &partition))).collect();
        let min = vectors.iter().map(|(_, v)| v).min().unwrap().clone();
        if let Some(best) = &self.best_symbols {
            let at = prefix.len();
            let cmp = prefix
                .as_slice()
                .cmp(&best[..at])
                .then_with(|| min.as_slice().cmp(&best[at..at + min.len()]));
            if cmp == std::cmp::Ordering::Greater {
                return;
            }
        }
        // rows without halves and with identical symbol rows are interchangeable
        let mut seen_plain: Vec<&Vec<u8>> = Vec::new();
        let mut branches = Vec::new();
        for (r, v) in &vectors {
            if *v != min {
                continue;
            }
            if !self.row_has_half[*r] {
                if seen_plain.contains(&&self.sym[*r]) {
                    continue;
                }
                seen_plain.push(&self.sym[*r]);
            }
            branches.push(*r);
        }
        for r in branches {
            let mut refined = Vec::with_capacity(partition.len());
            for cell in &partition {
                for s in [SYM_ONE, SYM_HALF, SYM_EMPTY] {
                    let part: Vec<usize> = cell.iter().copied().filter(|&c| self.sym[r][c] == s).collect();
                    if !part.is_empty() {
                        refined.push(part);
                    }
                }
            }
            chosen.push(r);
            let len = prefix.len();
            prefix.extend_from_slice(&min);
            self.search(chosen, refined, prefix);
            prefix.truncate(len);
            chosen.pop();
        }
    }

    fn leaf(&mut self, chosen: &[usize], partition: &[Vec<usize>], symbols: &[u8]) {
        let (m, n) = (self.g.m(), self.g.n());
        if let Some(best) = &self.best_symbols {
            if symbols > best.as_slice() {
                return;
            }
            if symbols < best.as_slice() {
                self.best_symbols = None;
            }
        }
        let mut row_pos = vec![0; m];
        for (p, &r) in chosen.iter().enumerate() {
            row_pos[r] = p;
        }
        // columns that carry halves can still be reordered inside their cell
        let options: Vec<Vec<Vec<usize>>> = partition
            .iter()
            .map(|cell| {
                if cell.len() > 1 && self.col_has_half[cell[0]] {
                    cell.iter().copied().permutations(cell.len()).collect()
                } else {
                    vec![cell.clone()]
                }
            })
            .collect();
        for arrangement in options.iter().multi_cartesian_product() {
            let order: Vec<usize> = arrangement.into_iter().flatten().copied().collect();
            let mut col_pos = vec![0; n];
            for (p, &c) in order.iter().enumerate() {
                col_pos[c] = p;
            }
            let tail = encode_tail(self.g, &row_pos, &col_pos);
            if self.best_symbols.is_none() || tail < self.best_tail {
                self.best_symbols = Some(symbols.to_vec());
                self.best_tail = tail;
                self.best_rows = row_pos.clone();
                self.best_cols = col_pos;
            }
        }
    }
}

impl BiGraph {
    /// Canonical key under row × column permutations.
    pub fn canonical_key(&self) -> CanonicalKey {
        self.canonical_labeling().0
    }

    /// The representative of this graph's isomorphism class whose encoding is
    /// the canonical key.
    pub fn canonical_form(&self) -> BiGraph {
        let (_, rows, cols) = self.canonical_labeling();
        self.permute(&rows, &cols).expect("labeling is a permutation")
    }

    /// Canonical key together with the row and column permutations (old index
    /// to new index, 0-based) that realize it.
    pub fn canonical_labeling(&self) -> (CanonicalKey, Vec<usize>, Vec<usize>) {
        let mut refiner = Refiner::new(self);
        let mut chosen = Vec::with_capacity(self.m());
        let mut prefix = Vec::with_capacity(self.cell_count());
        refiner.search(&mut chosen, vec![(0..self.n()).collect()], &mut prefix);
        let symbols = refiner.best_symbols.take().expect("search reaches a leaf");
        let key = assemble(self, &symbols, &refiner.best_tail);
        (key, refiner.best_rows, refiner.best_cols)
    }

    /// Whether `other` is this graph up to row and column relabeling.
    pub fn is_isomorphic(&self, other: &BiGraph) -> bool {
        self.m() == other.m() && self.n() == other.n() && self.canonical_key() == other.canonical_key()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Cell;

    #[test]
    fn single_one_edge_placements_collapse_to_one_key() {
        let empty = BiGraph::new(4, 3).unwrap();
        let mut keys = std::collections::BTreeSet::new();
        let mut brute = std::collections::BTreeSet::new();
        for i in 1..=4 {
            for j in 1..=3 {
                let g = empty.add_one_edge(Cell::new(i, j)).unwrap();
                keys.insert(g.canonical_key());
                brute.insert(canonical_key_brute_force(&g));
            }
        }
        assert_eq!(keys.len(), 1);
        assert_eq!(keys, brute);
    }

    #[test]
    fn empty_graph_key_is_stable() {
        let g = BiGraph::new(4, 3).unwrap();
        let h = g.permute(&[3, 1, 0, 2], &[2, 0, 1]).unwrap();
        assert_eq!(g.canonical_key(), h.canonical_key());
        assert_eq!(g.canonical_key(), canonical_key_brute_force(&g));
    }

    #[test]
    fn canonical_form_has_the_canonical_key() {
        let g = BiGraph::from_parts(
            4,
            4,
            &[(1, 1), (1, 2), (2, 1), (2, 3), (3, 1), (3, 4), (4, 2), (4, 3), (4, 4)],
            &[((1, 3), (2, 4))],
        )
        .unwrap();
        let c = g.canonical_form();
        assert_eq!(c.canonical_key(), g.canonical_key());
        assert_eq!(g.canonical_key(), canonical_key_brute_force(&g));
        assert_eq!(c.total(), g.total());
    }

    #[test]
    fn distinguishes_pairings_with_equal_symbols() {
        // same occupancy pattern, different pairing of the four halves
        let a = BiGraph::from_parts(3, 3, &[], &[((1, 1), (2, 2)), ((1, 2), (2, 3))]).unwrap();
        let b = BiGraph::from_parts(3, 3, &[], &[((1, 1), (2, 3)), ((1, 2), (2, 1))]).unwrap();
        let b_shape = BiGraph::from_parts(3, 3, &[], &[((1, 2), (2, 1)), ((1, 1), (2, 3))]).unwrap();
        assert_eq!(b, b_shape);
        assert_eq!(
            a.canonical_key() == b.canonical_key(),
            canonical_key_brute_force(&a) == canonical_key_brute_force(&b)
        );
        assert_eq!(a.canonical_key(), canonical_key_brute_force(&a));
        assert_eq!(b.canonical_key(), canonical_key_brute_force(&b));
    }

    #[test]
    fn smaller_prefix_is_not_pruned_by_a_later_row() {
        let g = BiGraph::from_parts(
            5,
            3,
            &[(1, 1), (1, 2), (1, 3), (2, 1), (3, 2), (4, 3), (5, 3)],
            &[((2, 2), (4, 1)), ((3, 1), (5, 2))],
        )
        .unwrap();
        assert_eq!(g.canonical_key(), canonical_key_brute_force(&g));
        let h = g.permute(&[4, 2, 0, 3, 1], &[1, 2, 0]).unwrap();
        assert_eq!(g.canonical_key(), h.canonical_key());
    }
}
