use std::path::PathBuf;
use std::process::{Command, Output};

use tempfile::TempDir;

use polycomplex::io::parse_complex;

fn fixture(name: &str) -> String {
    format!("{}/fixtures/{name}.cplx", env!("CARGO_MANIFEST_DIR"))
}

fn scratch(dir: &TempDir, name: &str) -> PathBuf {
    dir.path().join(name)
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_polycomplex"))
        .args(args)
        .output()
        .unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn validate_exit_codes() {
    let ok = run(&["validate", &fixture("square")]);
    assert_eq!(code(&ok), 0);
    assert_eq!(stdout(&ok).trim(), "valid");
    let bad = run(&["validate", &fixture("square_corrupt")]);
    assert_eq!(code(&bad), 1);
    assert!(!bad.stderr.is_empty());
}

#[test]
fn volume_prints_one() {
    let o = run(&["volume", &fixture("square")]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout(&o).trim(), "1.0");
    let o = run(&["volume", &fixture("l_shape")]);
    assert_eq!(stdout(&o).trim(), "3.0");
}

#[test]
fn decompose_writes_simplex_listing() {
    let tmp = TempDir::new().unwrap();
    for (method, count) in [("cohen-hickey", 2), ("apex", 4)] {
        let out = scratch(&tmp, &format!("square-{method}.txt"));
        let o = run(&[
            "decompose",
            &fixture("square"),
            "--method",
            method,
            "-o",
            out.to_str().unwrap(),
        ]);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
        let text = std::fs::read_to_string(&out).unwrap();
        let simplices: Vec<&str> = text.lines().filter(|l| l.starts_with("SIMPLEX")).collect();
        assert_eq!(simplices.len(), count, "{text}");
        for l in simplices {
            let t: Vec<&str> = l.split_whitespace().collect();
            assert_eq!(t.len(), 6, "{l}");
            assert_eq!(t[5], "F");
            assert!(t[1] == "1" || t[1] == "-1");
        }
    }
}

#[test]
fn winding_inside_outside_and_on_the_boundary() {
    let o = run(&["winding", &fixture("square"), "--point", "0.3,0.6"]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout(&o).trim(), "F 1");
    let o = run(&["winding", &fixture("square"), "--point", "2,-2"]);
    assert_eq!(stdout(&o).trim(), "F 0");
    let o = run(&["winding", &fixture("square"), "--point", "0,0.5"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn intersect_simplices_prints_the_five_vertices() {
    let o = run(&[
        "intersect-simplices",
        &fixture("star_a"),
        &fixture("star_b"),
    ]);
    assert_eq!(code(&o), 0);
    let mut names: Vec<String> = stdout(&o)
        .lines()
        .map(|l| l.split_whitespace().next().unwrap().to_string())
        .collect();
    names.sort();
    assert_eq!(names, ["1236", "1345", "1346", "2345", "2356"]);
    for l in stdout(&o).lines() {
        assert_eq!(l.split_whitespace().count(), 3, "{l}");
    }
}

#[test]
fn overlay_of_offset_squares() {
    let tmp = TempDir::new().unwrap();
    let out = scratch(&tmp, "offset.cplx");
    let o = run(&[
        "overlay",
        &fixture("offset_a"),
        &fixture("offset_b"),
        "-o",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(&out).unwrap();
    let c = parse_complex(&text).unwrap();
    assert_eq!(c.cells(2).count(), 1);
    assert_eq!(
        text.lines()
            .filter(|l| l.starts_with("# PROVENANCE"))
            .count(),
        1
    );
    let again = scratch(&tmp, "offset2.cplx");
    run(&[
        "overlay",
        &fixture("offset_a"),
        &fixture("offset_b"),
        "-o",
        again.to_str().unwrap(),
    ]);
    assert_eq!(std::fs::read(&out).unwrap(), std::fs::read(&again).unwrap());
    let v = run(&["volume", out.to_str().unwrap()]);
    assert!((stdout(&v).trim().parse::<f64>().unwrap() - 0.25).abs() < 1e-9);
}

#[test]
fn overlay_component_flag() {
    let split = run(&["overlay", &fixture("u_shape"), &fixture("bar")]);
    let merged = run(&[
        "overlay",
        &fixture("u_shape"),
        &fixture("bar"),
        "--no-components",
    ]);
    let faces = |o: &Output| parse_complex(&stdout(o)).unwrap().cells(2).count();
    assert_eq!((faces(&split), faces(&merged)), (2, 1));
}

#[test]
fn export_sql_rows() {
    let o = run(&["export-sql", &fixture("square")]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout(&o).matches("INSERT INTO M").count(), 12);
    assert!(stdout(&o).contains("create view M_squared"));
}

#[test]
fn usage_and_parse_errors_exit_with_three() {
    let tmp = TempDir::new().unwrap();
    assert_eq!(code(&run(&[])), 3);
    assert_eq!(code(&run(&["frobnicate"])), 3);
    assert_eq!(code(&run(&["validate", "/nonexistent/x.cplx"])), 3);
    assert_eq!(
        code(&run(&["winding", &fixture("square"), "--point", "a,b"])),
        3
    );
    let junk = scratch(&tmp, "junk.cplx");
    std::fs::write(&junk, "DIM 2 2\nVERTEX a 0\n").unwrap();
    let o = run(&["validate", junk.to_str().unwrap()]);
    assert_eq!(code(&o), 3);
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 2"));
    assert_eq!(code(&run(&["--help"])), 0);
}

#[test]
fn mismatched_overlay_is_a_validation_failure() {
    let o = run(&["overlay", &fixture("square"), &fixture("cube")]);
    assert_eq!(code(&o), 1);
}
