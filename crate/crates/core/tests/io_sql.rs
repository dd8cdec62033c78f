mod common;

use polycomplex::complex::validate_complex;
use polycomplex::io::{export_sql, parse_complex, write_complex};
use polycomplex::{fixtures, RelationalComplex};
use proptest::prelude::*;
use rusqlite::Connection;

fn load(c: &RelationalComplex) -> Connection {
    let db = Connection::open_in_memory().unwrap();
    db.execute_batch(&export_sql(c)).unwrap();
    db
}

fn count(db: &Connection, sql: &str) -> i64 {
    db.query_row(sql, [], |r| r.get(0)).unwrap()
}

#[test]
fn square_fixture_parses() {
    let c = common::fixture("square");
    let counts: Vec<usize> = (0..=2).map(|k| c.cells(k).count()).collect();
    assert_eq!(counts, vec![4, 4, 1]);
    assert!(validate_complex(&c).is_valid());
    assert_eq!(
        write_complex(&c),
        write_complex(&fixtures::combinatorial_square())
    );
}

#[test]
fn square_has_twelve_rows_and_empty_view() {
    let db = load(&common::fixture("square"));
    assert_eq!(count(&db, "SELECT count(*) FROM M"), 12);
    assert_eq!(
        count(&db, "SELECT count(*) FROM M_squared WHERE sigma <> 0"),
        0
    );
    let sigma: i64 = db
        .query_row(
            "SELECT sigma FROM M WHERE cell = 'F' AND boundary = 'e'",
            [],
            |r| r.get(0),
        )
        .unwrap();
    assert_eq!(sigma, -1);
}

#[test]
fn corrupted_square_shows_up_in_the_view() {
    let db = load(&common::fixture("square_corrupt"));
    let mut st = db
        .prepare("SELECT cell, boundary, sigma FROM M_squared WHERE sigma <> 0 ORDER BY boundary")
        .unwrap();
    let rows: Vec<(String, String, i64)> = st
        .query_map([], |r| Ok((r.get(0)?, r.get(1)?, r.get(2)?)))
        .unwrap()
        .map(Result::unwrap)
        .collect();
    assert_eq!(
        rows,
        vec![("F".into(), "b".into(), -2), ("F".into(), "d".into(), 2)]
    );
}

#[test]
fn empty_complex_exports_no_rows() {
    let db = load(&parse_complex("DIM 0 2\n").unwrap());
    assert_eq!(count(&db, "SELECT count(*) FROM M"), 0);
    assert_eq!(count(&db, "SELECT count(*) FROM M_squared"), 0);
}

#[test]
fn names_shared_across_dimensions_are_qualified() {
    // the vertex, an edge and the face are all called x; one edge name has a quote
    let mut b = RelationalComplex::builder(2, 2);
    for (v, p) in [("x", [0.0, 0.0]), ("y", [1.0, 0.0]), ("z", [0.0, 1.0])] {
        b.vertex(v, &p).unwrap();
    }
    for (e, from, to) in [("x", "x", "y"), ("q'r", "y", "z"), ("s", "z", "x")] {
        b.cell(1, e).unwrap();
        b.boundary(1, e, from, -1).unwrap();
        b.boundary(1, e, to, 1).unwrap();
    }
    b.cell(2, "x").unwrap();
    for e in ["x", "q'r", "s"] {
        b.boundary(2, "x", e, 1).unwrap();
    }
    let c = b.build().unwrap();
    assert!(validate_complex(&c).is_valid());
    let db = load(&c);
    assert_eq!(
        count(
            &db,
            "SELECT count(*) FROM M WHERE cell = '2:x' AND boundary = '1:x'"
        ),
        1
    );
    assert_eq!(
        count(&db, "SELECT count(*) FROM M WHERE cell = '1:q''r'"),
        2
    );
    assert_eq!(
        count(&db, "SELECT count(*) FROM M_squared WHERE sigma <> 0"),
        0
    );
}

#[test]
fn every_fixture_round_trips() {
    for name in common::FIXTURES {
        let c = common::fixture(name);
        let text = write_complex(&c);
        assert_eq!(
            write_complex(&parse_complex(&text).unwrap()),
            text,
            "{name}"
        );
    }
}

proptest! {
    #[test]
    fn random_grids_round_trip_and_export_cleanly(seed in 0u64..10_000) {
        let mut r = common::rng(seed);
        let c = common::random_grid(&mut r, 3, 2, true);
        let text = write_complex(&c);
        prop_assert_eq!(write_complex(&parse_complex(&text).unwrap()), text);
        let db = load(&c);
        prop_assert_eq!(count(&db, "SELECT count(*) FROM M_squared WHERE sigma <> 0"), 0);
    }
}
