//! Independent oracles shared by the integration tests. Nothing here calls the
//! library's checkers or search; graphs are handled as plain cell lists.
#![allow(dead_code)]

use std::collections::HashSet;

use rand::seq::{IndexedRandom, SliceRandom};
use rand::Rng;
use z2lab::{BiGraph, Cell, TwoEdge};

pub type Pos = (usize, usize);

/// Plain lists `(e1, e2)` read off a graph.
pub fn parts(g: &BiGraph) -> (Vec<Pos>, Vec<(Pos, Pos)>) {
    let e1 = g.e1().iter().map(|c| (c.row(), c.col())).collect();
    let e2 = g
        .e2()
        .iter()
        .map(|e| {
            let (a, b) = (e.first(), e.second());
            ((a.row(), a.col()), (b.row(), b.col()))
        })
        .collect();
    (e1, e2)
}

/// Admissibility straight from the three forbidden patterns: all row pairs and
/// column pairs for the classical cycle, every 2-edge against both opposite
/// cells, and every 2-edge and pivot cell `(k,l)` for the five-cell
/// pattern.
pub fn naive_admissible(m: usize, n: usize, e1: &[Pos], e2: &[(Pos, Pos)]) -> bool {
    let ones: HashSet<Pos> = e1.iter().copied().collect();
    let mut occ = ones.clone();
    for &(a, b) in e2 {
        occ.insert(a);
        occ.insert(b);
    }
    for i in 1..=m {
        for k in i + 1..=m {
            for j in 1..=n {
                for l in j + 1..=n {
                    if [(i, j), (i, l), (k, j), (k, l)].iter().all(|c| ones.contains(c)) {
                        return false;
                    }
                }
            }
        }
    }
    for &((i, j), (p, q)) in e2 {
        if occ.contains(&(i, q)) && occ.contains(&(p, j)) {
            return false;
        }
        // swapping the halves yields the same five cells
        for k in 1..=m {
            for l in 1..=n {
                let cells = [(k, l), (k, j), (k, q), (i, l), (p, l)];
                let distinct: HashSet<Pos> = cells.iter().copied().collect();
                if distinct.len() == 5 && cells.iter().all(|c| occ.contains(c)) {
                    return false;
                }
            }
        }
    }
    true
}

pub fn naive_admissible_graph(g: &BiGraph) -> bool {
    let (e1, e2) = parts(g);
    naive_admissible(g.m(), g.n(), &e1, &e2)
}

/// `z(m,n)` by trying every subset of cells.
pub fn naive_z(m: usize, n: usize) -> usize {
    let cells = m * n;
    assert!(cells <= 20);
    let mut best = 0;
    for mask in 0u32..(1 << cells) {
        let count = mask.count_ones() as usize;
        if count <= best {
            continue;
        }
        let e1: Vec<Pos> = (0..cells)
            .filter(|b| mask >> b & 1 == 1)
            .map(|b| (b / n + 1, b % n + 1))
            .collect();
        if naive_admissible(m, n, &e1, &[]) {
            best = count;
        }
    }
    best
}

/// `z2(m,n)` by enumerating every labeled graph satisfying simplicity: each
/// cell in turn is left empty, made a 1-edge, or paired with a later cell in
/// another row and column. No pruning; every complete graph is checked.
pub fn naive_z2(m: usize, n: usize) -> usize {
    let cells = m * n;
    assert!(cells <= 12);
    let mut best = 0;
    let mut e1 = Vec::new();
    let mut e2 = Vec::new();
    let mut used = vec![false; cells];
    walk(m, n, 0, &mut used, &mut e1, &mut e2, &mut best);
    best
}

fn walk(
    m: usize,
    n: usize,
    from: usize,
    used: &mut Vec<bool>,
    e1: &mut Vec<Pos>,
    e2: &mut Vec<(Pos, Pos)>,
    best: &mut usize,
) {
    let Some(c) = (from..m * n).find(|&c| !used[c]) else {
        if e1.len() + e2.len() > *best && naive_admissible(m, n, e1, e2) {
            *best = e1.len() + e2.len();
        }
        return;
    };
    let pos = |b: usize| (b / n + 1, b % n + 1);
    used[c] = true;
    walk(m, n, c + 1, used, e1, e2, best);
    e1.push(pos(c));
    walk(m, n, c + 1, used, e1, e2, best);
    e1.pop();
    for d in c + 1..m * n {
        if used[d] || d / n == c / n || d % n == c % n {
            continue;
        }
        used[d] = true;
        e2.push((pos(c), pos(d)));
        walk(m, n, c + 1, used, e1, e2, best);
        e2.pop();
        used[d] = false;
    }
    used[c] = false;
}

/// A random graph satisfying simplicity. Each cell is visited in random order
/// and becomes empty, a 1-edge, or a half paired with a random free partner.
pub fn random_graph<R: Rng>(rng: &mut R, m: usize, n: usize) -> BiGraph {
    let p_one: f64 = rng.random_range(0.1..0.6);
    let p_half: f64 = rng.random_range(0.0..0.4);
    let mut order: Vec<Pos> = (1..=m).flat_map(|i| (1..=n).map(move |j| (i, j))).collect();
    order.shuffle(rng);
    let mut used: HashSet<Pos> = HashSet::new();
    let mut g = BiGraph::new(m, n).unwrap();
    for &c in &order {
        if used.contains(&c) {
            continue;
        }
        let r: f64 = rng.random();
        if r < p_one {
            g.insert_one_edge(Cell::new(c.0, c.1)).unwrap();
            used.insert(c);
        } else if r < p_one + p_half {
            let partners: Vec<Pos> = order
                .iter()
                .copied()
                .filter(|d| d.0 != c.0 && d.1 != c.1 && !used.contains(d))
                .collect();
            if let Some(&d) = partners.choose(rng) {
                g.insert_two_edge(TwoEdge::new(Cell::new(c.0, c.1), Cell::new(d.0, d.1)).unwrap())
                    .unwrap();
                used.insert(c);
                used.insert(d);
            }
        }
    }
    g
}

pub fn random_perm<R: Rng>(rng: &mut R, len: usize) -> Vec<usize> {
    let mut p: Vec<usize> = (0..len).collect();
    p.shuffle(rng);
    p
}

/// Dimensions with `m, n >= 2` and at most `cells` cells.
pub fn small_dims(cells: usize) -> Vec<(usize, usize)> {
    (2..=cells / 2)
        .flat_map(|m| (2..=cells / 2).map(move |n| (m, n)))
        .filter(|&(m, n)| m * n <= cells)
        .collect()
}

// resolves from both this package and the acceptance package
pub const FIXTURE_DIR: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/../core/fixtures");

pub fn fixture(name: &str) -> BiGraph {
    let text = std::fs::read_to_string(format!("{FIXTURE_DIR}/{name}.json")).unwrap();
    BiGraph::from_json(&text).unwrap()
}
