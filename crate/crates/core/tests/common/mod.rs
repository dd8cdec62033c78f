//! Independent oracles and random generators shared by the integration tests.
#![allow(dead_code)]

use std::collections::BTreeSet;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Signed polygon area by the shoelace formula.
pub fn shoelace(pts: &[[f64; 2]]) -> f64 {
    let n = pts.len();
    (0..n)
        .map(|i| {
            let (p, q) = (pts[i], pts[(i + 1) % n]);
            p[0] * q[1] - q[0] * p[1]
        })
        .sum::<f64>()
        / 2.0
}

/// Sutherland–Hodgman: clips `subject` against a convex counter-clockwise
/// `clip` polygon.
pub fn clip_convex(subject: &[[f64; 2]], clip: &[[f64; 2]]) -> Vec<[f64; 2]> {
    let mut out = subject.to_vec();
    for i in 0..clip.len() {
        let (c0, c1) = (clip[i], clip[(i + 1) % clip.len()]);
        let side =
            |p: [f64; 2]| (c1[0] - c0[0]) * (p[1] - c0[1]) - (c1[1] - c0[1]) * (p[0] - c0[0]);
        let input = std::mem::take(&mut out);
        for j in 0..input.len() {
            let (p, q) = (input[j], input[(j + 1) % input.len()]);
            let (sp, sq) = (side(p), side(q));
            if sp >= 0.0 {
                out.push(p);
            }
            if (sp >= 0.0) != (sq >= 0.0) {
                let t = sp / (sp - sq);
                out.push([p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])]);
            }
        }
        if out.is_empty() {
            break;
        }
    }
    out
}

/// Area of `|poly| ∩ [x0,x1]×[y0,y1]` for a simple counter-clockwise polygon,
/// by clipping against the four half-planes of the rectangle.
pub fn clipped_area(poly: &[[f64; 2]], x0: f64, y0: f64, x1: f64, y1: f64) -> f64 {
    shoelace(&clip_convex(
        poly,
        &[[x0, y0], [x1, y0], [x1, y1], [x0, y1]],
    ))
}

/// Even–odd point-in-polygon test.
pub fn point_in_polygon(p: [f64; 2], poly: &[[f64; 2]]) -> bool {
    let mut inside = false;
    let n = poly.len();
    for i in 0..n {
        let (a, b) = (poly[i], poly[(i + 1) % n]);
        if (a[1] > p[1]) != (b[1] > p[1]) {
            let x = a[0] + (p[1] - a[1]) / (b[1] - a[1]) * (b[0] - a[0]);
            if p[0] < x {
                inside = !inside;
            }
        }
    }
    inside
}

/// Random star-shaped simple polygon around the origin, counter-clockwise.
/// With `convex`, the vertices lie on a circle.
pub fn random_star_polygon(r: &mut impl Rng, k: usize, convex: bool) -> Vec<[f64; 2]> {
    let mut angles: Vec<f64> = (0..k)
        .map(|_| r.gen_range(0.0..std::f64::consts::TAU))
        .collect();
    angles.sort_by(f64::total_cmp);
    angles.dedup_by(|a, b| (*a - *b).abs() < 1e-3);
    let cx = r.gen_range(-5.0..5.0);
    let cy = r.gen_range(-5.0..5.0);
    angles
        .into_iter()
        .map(|t| {
            let rad = if convex { 3.0 } else { r.gen_range(0.5..3.0) };
            [cx + rad * t.cos(), cy + rad * t.sin()]
        })
        .collect()
}

pub fn random_point(r: &mut impl Rng, d: usize) -> Vec<f64> {
    (0..d).map(|_| r.gen_range(0.0..1.0)).collect()
}

/// Result of the side-pair oracle.
pub struct SidePairs {
    /// Vertex sets (positions into `a ++ b`) of the intersection vertices.
    pub vertices: BTreeSet<BTreeSet<usize>>,
    /// True when some side pair is nearly singular or some coordinate of a
    /// solution is nearly zero.
    pub degenerate: bool,
}

/// Enumerates every pair of faces `(A', B')` with `|A'| + |B'| = d + 2`, solves
/// `Σα a = Σβ b, Σα = 1, Σβ = 1` directly, and keeps the strictly positive
/// solutions.
pub fn side_pair_oracle(a: &[Vec<f64>], b: &[Vec<f64>]) -> SidePairs {
    let d = a[0].len();
    let (na, nb) = (a.len(), b.len());
    let mut out = SidePairs {
        vertices: BTreeSet::new(),
        degenerate: false,
    };
    for ma in 1u32..(1 << na) {
        for mb in 1u32..(1 << nb) {
            let ia: Vec<usize> = (0..na).filter(|i| ma & (1 << i) != 0).collect();
            let ib: Vec<usize> = (0..nb).filter(|i| mb & (1 << i) != 0).collect();
            if ia.len() + ib.len() != d + 2 {
                continue;
            }
            let n = d + 2;
            let mut m = DMatrix::<f64>::zeros(n, n);
            for (c, &i) in ia.iter().enumerate() {
                for r in 0..d {
                    m[(r, c)] = a[i][r];
                }
                m[(d, c)] = 1.0;
            }
            for (c, &j) in ib.iter().enumerate() {
                let c = c + ia.len();
                for r in 0..d {
                    m[(r, c)] = -b[j][r];
                }
                m[(d + 1, c)] = 1.0;
            }
            let mut rhs = DVector::<f64>::zeros(n);
            rhs[d] = 1.0;
            rhs[d + 1] = 1.0;
            let svd = m.clone().svd(false, false);
            let smax = svd.singular_values.max();
            let smin = svd.singular_values.min();
            if smin <= 1e-10 * smax {
                out.degenerate = true;
                continue;
            }
            let x = m.lu().solve(&rhs).expect("nonsingular");
            if x.iter().any(|v| v.abs() < 1e-8) {
                out.degenerate = true;
            }
            if x.iter().all(|&v| v > 0.0) {
                let set = ia
                    .iter()
                    .copied()
                    .chain(ib.iter().map(|j| j + na))
                    .collect();
                out.vertices.insert(set);
            }
        }
    }
    out
}

/// A random simplex with `k + 1` vertices in the unit cube of `R^d`.
pub fn random_simplex(r: &mut impl Rng, k: usize, d: usize) -> Vec<Vec<f64>> {
    (0..=k).map(|_| random_point(r, d)).collect()
}

/// Random perturbed `cols × rows` quad grid. Neighbouring faces share edges.
/// With `merge`, some 2×2 blocks lose one quad and the other three are fused
/// into a single L-shaped face (the internal edges stay as loose edges).
pub fn random_grid(
    r: &mut impl Rng,
    cols: usize,
    rows: usize,
    merge: bool,
) -> polycomplex::RelationalComplex {
    use std::collections::BTreeMap;
    let mut b = polycomplex::RelationalComplex::builder(2, 2);
    let v = |i: usize, j: usize| format!("p{i:02}{j:02}");
    for i in 0..=cols {
        for j in 0..=rows {
            let jitter = |r: &mut dyn rand::RngCore, edge: bool| {
                if edge {
                    0.0
                } else {
                    r.gen_range(-0.3..0.3)
                }
            };
            let x = i as f64 + jitter(r, i == 0 || i == cols);
            let y = j as f64 + jitter(r, j == 0 || j == rows);
            b.vertex(&v(i, j), &[x, y]).unwrap();
        }
    }
    let h = |i: usize, j: usize| format!("h{i:02}{j:02}");
    let w = |i: usize, j: usize| format!("w{i:02}{j:02}");
    for i in 0..=cols {
        for j in 0..=rows {
            if i < cols {
                b.cell(1, &h(i, j)).unwrap();
                b.boundary(1, &h(i, j), &v(i, j), -1).unwrap();
                b.boundary(1, &h(i, j), &v(i + 1, j), 1).unwrap();
            }
            if j < rows {
                b.cell(1, &w(i, j)).unwrap();
                b.boundary(1, &w(i, j), &v(i, j), -1).unwrap();
                b.boundary(1, &w(i, j), &v(i, j + 1), 1).unwrap();
            }
        }
    }
    let quad = |i: usize, j: usize| -> BTreeMap<String, i64> {
        BTreeMap::from([
            (h(i, j), 1),
            (w(i + 1, j), 1),
            (h(i, j + 1), -1),
            (w(i, j), -1),
        ])
    };
    let mut faces: BTreeMap<String, BTreeMap<String, i64>> = BTreeMap::new();
    let mut used = BTreeSet::new();
    for i in 0..cols {
        for j in 0..rows {
            if used.contains(&(i, j)) {
                continue;
            }
            let block = merge && i + 1 < cols && j + 1 < rows && r.gen_bool(0.4);
            let free = [(i + 1, j), (i, j + 1), (i + 1, j + 1)]
                .iter()
                .all(|c| !used.contains(c));
            if block && free {
                let mut sum: BTreeMap<String, i64> = BTreeMap::new();
                for (a, c) in [(i, j), (i + 1, j), (i, j + 1)] {
                    for (e, s) in quad(a, c) {
                        *sum.entry(e).or_default() += s;
                    }
                }
                sum.retain(|_, s| *s != 0);
                used.extend([(i, j), (i + 1, j), (i, j + 1), (i + 1, j + 1)]);
                faces.insert(format!("L{i:02}{j:02}"), sum);
            } else {
                used.insert((i, j));
                faces.insert(format!("q{i:02}{j:02}"), quad(i, j));
            }
        }
    }
    for (f, bnd) in &faces {
        b.cell(2, f).unwrap();
        for (e, s) in bnd {
            b.boundary(2, f, e, *s).unwrap();
        }
    }
    b.build().unwrap()
}

/// Loads a shipped fixture by file stem.
pub fn fixture(name: &str) -> polycomplex::RelationalComplex {
    let path = format!("{}/fixtures/{name}.cplx", env!("CARGO_MANIFEST_DIR"));
    polycomplex::io::parse_complex(&std::fs::read_to_string(path).unwrap()).unwrap()
}

pub const FIXTURES: [&str; 10] = [
    "square",
    "square_corrupt",
    "offset_a",
    "offset_b",
    "u_shape",
    "bar",
    "l_shape",
    "cube",
    "star_a",
    "star_b",
];

/// Vertex loop of a planar face, following its oriented boundary edges.
/// Assumes a single boundary loop.
pub fn face_loop(c: &polycomplex::RelationalComplex, face: &str) -> Vec<[f64; 2]> {
    use polycomplex::CellId;
    use std::collections::BTreeMap;
    let mut next: BTreeMap<String, String> = BTreeMap::new();
    for (e, s) in c.boundary_of(&CellId::new(2, face)).terms() {
        let ends = c.boundary_of(e);
        let mut from = None;
        let mut to = None;
        for (v, t) in ends.terms() {
            if t * s > 0 {
                to = Some(v.name.clone());
            } else {
                from = Some(v.name.clone());
            }
        }
        next.insert(from.unwrap(), to.unwrap());
    }
    let start = next.keys().next().unwrap().clone();
    let mut out = Vec::new();
    let mut v = start.clone();
    loop {
        let p = c.coords(&v).unwrap();
        out.push([p[0], p[1]]);
        v = next[&v].clone();
        if v == start {
            break;
        }
    }
    assert_eq!(out.len(), next.len(), "face {face} has more than one loop");
    out
}
