mod common;

use std::collections::BTreeSet;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use z2lab::grid::{canonical_key_brute_force, RawGraph};
use z2lab::{BiGraph, Cell, GridError, TwoEdge};

use common::{fixture, random_graph, random_perm};

#[test]
fn dimension_limits() {
    assert!(BiGraph::new(2, 2).is_ok());
    assert!(BiGraph::new(8, 8).is_ok());
    assert!(BiGraph::new(2, 32).is_ok());
    assert!(matches!(BiGraph::new(1, 5), Err(GridError::Dimension { .. })));
    assert!(matches!(BiGraph::new(5, 13), Err(GridError::Dimension { .. })));
}

#[test]
fn insertion_enforces_simplicity() {
    let g = BiGraph::new(3, 3).unwrap();
    let g = g.add_one_edge(Cell::new(1, 1)).unwrap();
    assert!(matches!(g.add_one_edge(Cell::new(1, 1)), Err(GridError::Overlap(_))));
    let half_on_one = TwoEdge::new(Cell::new(1, 1), Cell::new(2, 2)).unwrap();
    assert!(matches!(g.add_two_edge(half_on_one), Err(GridError::Overlap(_))));
    let e = TwoEdge::new(Cell::new(2, 2), Cell::new(3, 3)).unwrap();
    let g = g.add_two_edge(e).unwrap();
    let shares_half = TwoEdge::new(Cell::new(3, 3), Cell::new(1, 2)).unwrap();
    assert!(g.add_two_edge(shares_half).is_err());
    assert!(matches!(g.add_one_edge(Cell::new(4, 1)), Err(GridError::Range { .. })));
    assert_eq!(g.total(), 2);
    assert_eq!(g.occupancy_count(), 3);
}

#[test]
fn degenerate_two_edges_are_rejected() {
    assert!(matches!(
        TwoEdge::new(Cell::new(1, 1), Cell::new(1, 2)),
        Err(GridError::Degenerate(..))
    ));
    assert!(matches!(
        TwoEdge::new(Cell::new(1, 2), Cell::new(3, 2)),
        Err(GridError::Degenerate(..))
    ));
    assert!(TwoEdge::new(Cell::new(1, 1), Cell::new(1, 1)).is_err());
}

#[test]
fn two_edge_is_unordered() {
    let a = TwoEdge::new(Cell::new(4, 2), Cell::new(1, 3)).unwrap();
    let b = TwoEdge::new(Cell::new(1, 3), Cell::new(4, 2)).unwrap();
    assert_eq!(a, b);
    let mut opp = a.opposites().to_vec();
    opp.sort();
    assert_eq!(opp, vec![Cell::new(1, 2), Cell::new(4, 3)]);
}

#[test]
fn removal_round_trips() {
    let g = fixture("thm2_2");
    let e = g.e2()[0];
    let h = g.remove_two_edge(e).unwrap();
    assert_eq!(h.total(), g.total() - 1);
    assert_eq!(h.add_two_edge(e).unwrap(), g);
    let c = g.e1()[0];
    assert_eq!(g.remove_one_edge(c).unwrap().add_one_edge(c).unwrap(), g);
    assert!(h.remove_two_edge(e).is_err());
}

#[test]
fn json_round_trip_on_fixtures() {
    for name in ["thm2_2", "thm3_1", "thm4_1", "thm5_1", "z2_5x4_t12", "z2_5x5_t15"] {
        let g = fixture(name);
        assert_eq!(BiGraph::from_json(&g.to_json()).unwrap(), g, "{name}");
        assert_eq!(BiGraph::from_json(&g.to_json_pretty()).unwrap(), g, "{name}");
    }
}

#[test]
fn json_errors_name_the_field() {
    let bad_cell = r#"{"m":3,"n":3,"e1":[[1,1],[4,1]],"e2":[]}"#;
    match BiGraph::from_json(bad_cell) {
        Err(GridError::Parse { field, .. }) => assert_eq!(field, "e1[1]"),
        other => panic!("unexpected {other:?}"),
    }
    let overlap = r#"{"m":3,"n":3,"e1":[[1,1]],"e2":[[[1,1],[2,2]]]}"#;
    match BiGraph::from_json(overlap) {
        Err(GridError::Parse { field, .. }) => assert_eq!(field, "e2[0]"),
        other => panic!("unexpected {other:?}"),
    }
    let unknown = r#"{"m":3,"n":3,"e1":[],"e2":[],"extra":1}"#;
    assert!(matches!(BiGraph::from_json(unknown), Err(GridError::Parse { .. })));
    let syntax = "{\"m\":3,\n\"n\":}";
    match BiGraph::from_json(syntax) {
        Err(GridError::Parse { line, .. }) => assert_eq!(line, 2),
        other => panic!("unexpected {other:?}"),
    }
}

#[test]
fn raw_parse_keeps_simplicity_violations() {
    let text = std::fs::read_to_string(format!("{}/thm6_1.json", common::FIXTURE_DIR)).unwrap();
    let raw = RawGraph::parse(&text).unwrap();
    assert_eq!(raw.e1.len() + raw.e2.len(), 14);
    let (field, err) = raw.into_graph().unwrap_err();
    assert_eq!(field, "e2[1]");
    assert!(matches!(err, GridError::Overlap(c) if c == Cell::new(3, 5)));
}

#[test]
fn transpose_is_an_involution() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..200 {
        let g = random_graph(&mut rng, 4, 5);
        let t = g.transpose();
        assert_eq!((t.m(), t.n()), (5, 4));
        assert_eq!(t.total(), g.total());
        assert_eq!(t.transpose(), g);
    }
}

#[test]
fn permutation_composition() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..100 {
        let g = random_graph(&mut rng, 4, 4);
        let (r1, c1) = (random_perm(&mut rng, 4), random_perm(&mut rng, 4));
        let (r2, c2) = (random_perm(&mut rng, 4), random_perm(&mut rng, 4));
        let composed_r: Vec<usize> = (0..4).map(|i| r2[r1[i]]).collect();
        let composed_c: Vec<usize> = (0..4).map(|j| c2[c1[j]]).collect();
        let twice = g.permute(&r1, &c1).unwrap().permute(&r2, &c2).unwrap();
        assert_eq!(twice, g.permute(&composed_r, &composed_c).unwrap());
    }
    let g = BiGraph::new(3, 3).unwrap();
    assert!(matches!(
        g.permute(&[0, 1], &[0, 1, 2]),
        Err(GridError::Permutation { .. })
    ));
}

#[test]
fn refined_key_matches_brute_force() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for (m, n) in [(2, 2), (2, 5), (3, 3), (3, 4), (4, 3), (4, 4), (5, 3), (3, 5)] {
        for _ in 0..150 {
            let g = random_graph(&mut rng, m, n);
            assert_eq!(g.canonical_key(), canonical_key_brute_force(&g), "{}", g.to_json());
        }
    }
}

#[test]
fn canonical_labeling_realizes_the_key() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..200 {
        let g = random_graph(&mut rng, 4, 5);
        let (key, rows, cols) = g.canonical_labeling();
        let c = g.permute(&rows, &cols).unwrap();
        assert_eq!(c, g.canonical_form());
        assert_eq!(c.canonical_key(), key);
    }
}

#[test]
fn isomorphism_classes_of_tiny_graphs() {
    // every labeled graph on 2x2 collected by key; class count from brute force
    let cells: Vec<Cell> = (1..=2).flat_map(|i| (1..=2).map(move |j| Cell::new(i, j))).collect();
    let mut refined = BTreeSet::new();
    let mut brute = BTreeSet::new();
    for mask in 0..16u32 {
        let mut g = BiGraph::new(2, 2).unwrap();
        for (b, &c) in cells.iter().enumerate() {
            if mask >> b & 1 == 1 {
                g.insert_one_edge(c).unwrap();
            }
        }
        refined.insert(g.canonical_key());
        brute.insert(canonical_key_brute_force(&g));
    }
    // 0,1,2 (row),2 (col),2 (diag),3,4 ones
    assert_eq!(refined.len(), 7);
    assert_eq!(refined, brute);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn key_invariant_under_relabeling(seed in any::<u64>(), m in 2usize..=5, n in 2usize..=5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = random_graph(&mut rng, m, n);
        let h = g.permute(&random_perm(&mut rng, m), &random_perm(&mut rng, n)).unwrap();
        prop_assert_eq!(g.canonical_key(), h.canonical_key());
        prop_assert!(g.is_isomorphic(&h));
        prop_assert_eq!(g.transpose().canonical_key(), h.transpose().canonical_key());
    }

    #[test]
    fn json_round_trip(seed in any::<u64>(), m in 2usize..=8, n in 2usize..=8) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = random_graph(&mut rng, m, n);
        prop_assert_eq!(BiGraph::from_json(&g.to_json()).unwrap(), g);
    }
}
