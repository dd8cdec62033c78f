mod common;

use std::collections::{BTreeMap, BTreeSet};

use polycomplex::complex::{
    chain_boundary, is_continuous, multiply, validate_complex, validate_morphism, CellId, Chain,
    ComplexMorphism, SparseIncidenceMatrix, TopologicalDataType,
};
use polycomplex::decomposition::{cohen_hickey_with_labels, Label};
use polycomplex::fixtures;
use proptest::prelude::*;

fn matrix(row: usize, col: usize, entries: &[(u8, u8, i64)]) -> SparseIncidenceMatrix {
    let mut m = SparseIncidenceMatrix::new(row, col);
    for &(r, c, v) in entries {
        m.add(
            CellId::new(row, format!("r{r}")),
            CellId::new(col, format!("c{c}")),
            v,
        )
        .unwrap();
    }
    m
}

fn dense(m: &SparseIncidenceMatrix, rows: &[CellId], cols: &[CellId]) -> Vec<Vec<i64>> {
    rows.iter()
        .map(|r| cols.iter().map(|c| m.get(r, c)).collect())
        .collect()
}

#[test]
fn product_with_empty_matrix_is_empty() {
    let m = matrix(2, 1, &[(0, 0, 1), (1, 2, -1)]);
    let empty = SparseIncidenceMatrix::new(1, 0);
    assert!(multiply(&m, &empty).unwrap().is_empty());
    assert!(multiply(&m, &SparseIncidenceMatrix::new(2, 1)).is_err());
}

#[test]
fn flipping_one_triangle_leaves_residue_on_its_edges() {
    let sq = fixtures::combinatorial_square();
    let labels: BTreeMap<String, Label> = [("a", 4), ("b", 2), ("c", 1), ("d", 3)]
        .iter()
        .map(|(n, l)| (n.to_string(), *l))
        .collect();
    let mu = cohen_hickey_with_labels(&sq, labels).unwrap();
    let target = mu.target_complex();
    let mut maps = mu.morphism_maps();
    let (f, t) = (CellId::new(2, "F"), CellId::new(2, "<1,2,3>"));
    assert_eq!(maps[2].get(&f, &t), -1);
    maps[2].add(f.clone(), t, 2).unwrap();
    let good = ComplexMorphism::new(&sq, &target, mu.morphism_maps()).unwrap();
    assert!(validate_morphism(&good).unwrap().is_valid());
    let bad = ComplexMorphism::new(&sq, &target, maps).unwrap();
    let rep = validate_morphism(&bad).unwrap();
    // the residue is 2·δ<1,2,3>: every edge of the flipped triangle is hit
    let rendered = rep.to_string();
    assert_eq!(rep.issues.len(), 3, "{rendered}");
    for e in ["<1,2>", "<1,3>", "<2,3>"] {
        assert!(rendered.contains(e), "{e} missing from {rendered}");
    }
}

#[test]
fn corrupted_fixture_reports_the_endpoints_of_the_flipped_edge() {
    // g runs from b to d, so the flipped (F, g) sign leaves 2 on (F, b) and (F, d)
    let c = common::fixture("square_corrupt");
    let rep = validate_complex(&c);
    assert_eq!(rep.issues.len(), 2, "{rep}");
    let text = rep.to_string();
    assert!(text.contains('b') && text.contains('d'), "{text}");
    assert!(validate_complex(&common::fixture("square")).is_valid());
}

fn cells(prefix: &str, k: usize, n: usize) -> Vec<CellId> {
    (0..n)
        .map(|i| CellId::new(k, format!("{prefix}{i}")))
        .collect()
}

prop_compose! {
    fn sparse(rows: u8, cols: u8)(entries in prop::collection::vec((0..rows, 0..cols, -3i64..=3), 0..20)) -> Vec<(u8, u8, i64)> {
        entries
    }
}

prop_compose! {
    fn relation(n: usize)(pairs in prop::collection::btree_set((0..n, 0..n), 0..3 * n)) -> TopologicalDataType<usize> {
        TopologicalDataType::new((0..n).collect(), pairs).unwrap()
    }
}

fn any_chain(c: &polycomplex::RelationalComplex, k: usize, coeffs: &[i64]) -> Chain {
    Chain::from_terms(k, c.cells(k).zip(coeffs.iter().copied())).unwrap()
}

proptest! {
    #[test]
    fn sparse_product_matches_dense(a in sparse(5, 6), b in sparse(6, 4)) {
        let mut m1 = SparseIncidenceMatrix::new(2, 1);
        for &(r, c, v) in &a {
            m1.add(CellId::new(2, format!("r{r}")), CellId::new(1, format!("m{c}")), v).unwrap();
        }
        let mut m2 = SparseIncidenceMatrix::new(1, 0);
        for &(r, c, v) in &b {
            m2.add(CellId::new(1, format!("m{r}")), CellId::new(0, format!("c{c}")), v).unwrap();
        }
        let (rows, mid, cols) = (cells("r", 2, 5), cells("m", 1, 6), cells("c", 0, 4));
        let (d1, d2) = (dense(&m1, &rows, &mid), dense(&m2, &mid, &cols));
        let p = multiply(&m1, &m2).unwrap();
        prop_assert!(p.entries().values().all(|&v| v != 0));
        let dp = dense(&p, &rows, &cols);
        for i in 0..5 {
            for j in 0..4 {
                let want: i64 = (0..6).map(|k| d1[i][k] * d2[k][j]).sum();
                prop_assert_eq!(dp[i][j], want);
            }
        }
    }

    #[test]
    fn boundary_is_linear(seed in 0u64..1000, x in prop::collection::vec(-4i64..=4, 40), y in prop::collection::vec(-4i64..=4, 40), al in -3i64..=3, be in -3i64..=3) {
        let mut r = common::rng(seed);
        let c = common::random_grid(&mut r, 3, 3, seed % 2 == 0);
        for k in 1..=2 {
            let (cx, cy) = (any_chain(&c, k, &x), any_chain(&c, k, &y));
            let lhs = chain_boundary(&c, &cx.scale(al).unwrap().add(&cy.scale(be).unwrap()).unwrap()).unwrap();
            let rhs = chain_boundary(&c, &cx).unwrap().scale(al).unwrap()
                .add(&chain_boundary(&c, &cy).unwrap().scale(be).unwrap()).unwrap();
            prop_assert_eq!(&lhs, &rhs);
            if k == 2 {
                prop_assert!(chain_boundary(&c, &lhs).unwrap().is_zero());
            }
        }
    }

    #[test]
    fn random_grids_satisfy_chain_condition(seed in 0u64..10_000) {
        let mut r = common::rng(seed);
        let c = common::random_grid(&mut r, 4, 3, true);
        prop_assert!(validate_complex(&c).is_valid());
        prop_assert!(multiply(c.boundary_matrix(2).unwrap(), c.boundary_matrix(1).unwrap()).unwrap().is_empty());
    }

    #[test]
    fn closure_is_idempotent(t in relation(7)) {
        let once = t.closed();
        prop_assert_eq!(once.closure(), once.incidence().clone());
        for p in t.points() {
            prop_assert!(once.incidence().contains(&(*p, *p)));
        }
    }

    #[test]
    fn open_sets_are_closed_under_meet_and_join(
        t in relation(7),
        a in prop::collection::btree_set(0usize..7, 0..7),
        b in prop::collection::btree_set(0usize..7, 0..7),
    ) {
        // saturate both sets upwards so they are open
        let star = t.closure();
        let up = |s: &BTreeSet<usize>| -> BTreeSet<usize> {
            star.iter().filter(|(_, y)| s.contains(y)).map(|(x, _)| *x).collect()
        };
        let (oa, ob) = (up(&a), up(&b));
        prop_assert!(t.is_open(&oa).unwrap() && t.is_open(&ob).unwrap());
        prop_assert!(t.is_open(&oa.intersection(&ob).copied().collect()).unwrap());
        prop_assert!(t.is_open(&oa.union(&ob).copied().collect()).unwrap());
    }

    #[test]
    fn identity_and_constant_maps_are_continuous(t in relation(6)) {
        let id: BTreeMap<usize, usize> = t.points().iter().map(|p| (*p, *p)).collect();
        prop_assert!(is_continuous(&id, &t, &t).unwrap());
        let point = TopologicalDataType::new(BTreeSet::from([0usize]), BTreeSet::new()).unwrap();
        let constant: BTreeMap<usize, usize> = t.points().iter().map(|p| (*p, 0)).collect();
        prop_assert!(is_continuous(&constant, &t, &point).unwrap());
    }
}
