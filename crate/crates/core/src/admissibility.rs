//! Reference checkers for generalized C4-cycles.
//!
//! A graph is admissible when none of the following exist:
//!
//! 1. rows `i ≠ k`, columns `j ≠ l` with `(i,j),(i,l),(k,j),(k,l)` all 1-edges;
//! 2. a 2-edge `(i,j;k,l)` whose opposite cells `(i,l)` and `(k,j)` are both
//!    occupied;
//! 3. a 2-edge `(i,j;p,q)` and a cell `(k,l)` such that `(k,l),(k,j),(k,q),
//!    (i,l),(p,l)` are five distinct occupied cells.
//!
//! "Occupied" means a 1-edge or any half, including the halves of the 2-edge
//! being tested. These checkers are deliberately plain loops; the search
//! engine keeps its own incremental state and is tested against them.

use serde::{Deserialize, Serialize};

use crate::grid::{BiGraph, Cell, TwoEdge};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum WitnessKind {
    ClassicalC4,
    Condition2,
    Condition3,
}

/// A concrete generalized C4-cycle.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Witness {
    pub kind: WitnessKind,
    pub cells: Vec<Cell>,
    pub two_edge: Option<TwoEdge>,
}

impl Witness {
    /// Re-checks the witness against `g` from scratch.
    pub fn is_valid_for(&self, g: &BiGraph) -> bool {
        if !self.cells.iter().all(|&c| g.is_occupied(c)) {
            return false;
        }
        match self.kind {
            WitnessKind::ClassicalC4 => {
                if self.cells.len() != 4 || self.two_edge.is_some() {
                    return false;
                }
                let [a, b, c, d] = [self.cells[0], self.cells[1], self.cells[2], self.cells[3]];
                a.row == b.row
                    && c.row == d.row
                    && a.row != c.row
                    && a.col == c.col
                    && b.col == d.col
                    && a.col != b.col
                    && self.cells.iter().all(|&x| g.is_one_edge(x))
            }
            WitnessKind::Condition2 => {
                let Some(e) = self.two_edge else { return false };
                g.e2().contains(&e) && self.cells.as_slice() == e.opposites()
            }
            WitnessKind::Condition3 => {
                let Some(e) = self.two_edge else { return false };
                if !g.e2().contains(&e) || self.cells.len() != 5 {
                    return false;
                }
                let (k, l) = (self.cells[0].row(), self.cells[0].col());
                let mut expected = condition3_cells(e, k, l).to_vec();
                let mut got = self.cells.clone();
                expected.sort();
                got.sort();
                got.dedup();
                got.len() == 5 && got == expected
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    Admissible,
    Inadmissible(Witness),
}

impl Verdict {
    pub fn is_admissible(&self) -> bool {
        matches!(self, Verdict::Admissible)
    }

    pub fn witness(&self) -> Option<&Witness> {
        match self {
            Verdict::Admissible => None,
            Verdict::Inadmissible(w) => Some(w),
        }
    }
}

impl Serialize for Verdict {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("Verdict", 2)?;
        st.serialize_field("admissible", &self.is_admissible())?;
        st.serialize_field("witness", &self.witness())?;
        st.end()
    }
}

/// The five cells `(k,l),(k,j),(k,q),(i,l),(p,l)` for 2-edge `(i,j;p,q)`.
fn condition3_cells(e: TwoEdge, k: usize, l: usize) -> [Cell; 5] {
    let (i, j) = (e.first().row(), e.first().col());
    let (p, q) = (e.second().row(), e.second().col());
    [
        Cell::new(k, l),
        Cell::new(k, j),
        Cell::new(k, q),
        Cell::new(i, l),
        Cell::new(p, l),
    ]
}

/// Condition 1: a 2×2 block of 1-edges. Halves are not considered.
pub fn find_classical_c4(g: &BiGraph) -> Option<Witness> {
    let (m, n) = (g.m(), g.n());
    let one = |i: usize, j: usize| g.is_one_edge(Cell::new(i, j));
    for i in 1..=m {
        for j in 1..=n {
            if !one(i, j) {
                continue;
            }
            for k in i + 1..=m {
                if !one(k, j) {
                    continue;
                }
                for l in j + 1..=n {
                    if one(i, l) && one(k, l) {
                        return Some(Witness {
                            kind: WitnessKind::ClassicalC4,
                            cells: vec![Cell::new(i, j), Cell::new(i, l), Cell::new(k, j), Cell::new(k, l)],
                            two_edge: None,
                        });
                    }
                }
            }
        }
    }
    None
}

/// Condition 2: a 2-edge with both opposite cells occupied.
pub fn find_condition2(g: &BiGraph) -> Option<Witness> {
    g.e2().iter().find_map(|&e| {
        let opp = e.opposites();
        (g.is_occupied(opp[0]) && g.is_occupied(opp[1])).then(|| Witness {
            kind: WitnessKind::Condition2,
            cells: opp.to_vec(),
            two_edge: Some(e),
        })
    })
}

/// Condition 3: the five-distinct-occupied-cells pattern around a 2-edge.
///
/// Swapping the halves of the 2-edge yields the same five cells, so one
/// orientation is scanned.
pub fn find_condition3(g: &BiGraph) -> Option<Witness> {
    for &e in g.e2() {
        for k in 1..=g.m() {
            for l in 1..=g.n() {
                let cells = condition3_cells(e, k, l);
                if !cells.iter().all(|&c| g.is_occupied(c)) {
                    continue;
                }
                let mut sorted = cells;
                sorted.sort();
                if sorted.windows(2).all(|w| w[0] != w[1]) {
                    return Some(Witness {
                        kind: WitnessKind::Condition3,
                        cells: cells.to_vec(),
                        two_edge: Some(e),
                    });
                }
            }
        }
    }
    None
}

pub fn is_admissible(g: &BiGraph) -> Verdict {
    find_classical_c4(g)
        .or_else(|| find_condition2(g))
        .or_else(|| find_condition3(g))
        .map_or(Verdict::Admissible, Verdict::Inadmissible)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn thm_4x3() -> BiGraph {
        BiGraph::from_parts(
            4,
            3,
            &[(1, 1), (2, 2), (3, 3), (1, 2), (2, 3), (3, 1), (4, 1)],
            &[((4, 2), (1, 3))],
        )
        .unwrap()
    }

    #[test]
    fn full_two_by_two_is_a_classical_c4() {
        let g = BiGraph::from_parts(2, 2, &[(1, 1), (1, 2), (2, 1), (2, 2)], &[]).unwrap();
        let w = find_classical_c4(&g).unwrap();
        assert_eq!(
            w.cells,
            vec![Cell::new(1, 1), Cell::new(1, 2), Cell::new(2, 1), Cell::new(2, 2)]
        );
        assert!(w.is_valid_for(&g));
        assert_eq!(is_admissible(&g), Verdict::Inadmissible(w));
    }

    #[test]
    fn halves_do_not_form_classical_cycles() {
        // (1,1),(2,2) halves plus (1,2),(2,1) one-edges: only condition 2 fires
        let g = BiGraph::from_parts(2, 2, &[(1, 2), (2, 1)], &[((1, 1), (2, 2))]).unwrap();
        assert!(find_classical_c4(&g).is_none());
        assert!(find_condition2(&g).is_some());
    }

    #[test]
    fn the_4x3_construction_is_admissible() {
        let g = thm_4x3();
        assert!(find_classical_c4(&g).is_none());
        assert!(find_condition2(&g).is_none());
        assert!(find_condition3(&g).is_none());
        assert!(is_admissible(&g).is_admissible());
    }

    #[test]
    fn both_opposites_occupied() {
        let g = BiGraph::from_parts(4, 4, &[(1, 4), (2, 3)], &[((1, 3), (2, 4))]).unwrap();
        let w = find_condition2(&g).unwrap();
        assert_eq!(w.cells, vec![Cell::new(1, 4), Cell::new(2, 3)]);
        assert!(w.is_valid_for(&g));
    }

    #[test]
    fn five_cell_pattern() {
        let g = BiGraph::from_parts(5, 5, &[(3, 3), (3, 1), (3, 2), (1, 3), (2, 3)], &[((1, 1), (2, 2))]).unwrap();
        let w = find_condition3(&g).unwrap();
        assert_eq!(w.cells[0], Cell::new(3, 3));
        assert!(w.is_valid_for(&g));
        assert!(find_condition2(&g).is_none());
    }

    #[test]
    fn collapsed_patterns_do_not_count() {
        // (k,l) = (1,3): the cells (1,3),(1,1),(1,3),(1,3),(2,3) collapse to three
        let g = BiGraph::from_parts(3, 3, &[(1, 3), (2, 3)], &[((1, 1), (2, 2))]).unwrap();
        assert!(find_condition3(&g).is_none());
    }

    #[test]
    fn witness_json_shape() {
        let g = BiGraph::from_parts(4, 4, &[(1, 4), (2, 3)], &[((1, 3), (2, 4))]).unwrap();
        let json = serde_json::to_string(&find_condition2(&g).unwrap()).unwrap();
        assert_eq!(
            json,
            r#"{"kind":"Condition2","cells":[[1,4],[2,3]],"two_edge":[[1,3],[2,4]]}"#
        );
        let c4 = BiGraph::from_parts(2, 2, &[(1, 1), (1, 2), (2, 1), (2, 2)], &[]).unwrap();
        let json = serde_json::to_string(&find_classical_c4(&c4).unwrap()).unwrap();
        assert!(json.ends_with(r#""two_edge":null}"#));
    }

    #[test]
    fn invalid_witnesses_are_rejected() {
        let g = thm_4x3();
        let bogus = Witness {
            kind: WitnessKind::Condition2,
            cells: vec![Cell::new(1, 2), Cell::new(4, 3)],
            two_edge: Some(TwoEdge::from_indices(4, 2, 1, 3).unwrap()),
        };
        assert!(!bogus.is_valid_for(&g));
    }
}
