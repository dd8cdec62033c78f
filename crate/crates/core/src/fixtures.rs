//! Ready-made complexes: the combinatorial unit square, polygons, polyhedra
//! built from outward-oriented face loops, prisms, pyramids and hypercubes.

use std::collections::BTreeMap;

use crate::complex::RelationalComplex;

/// The unit square with vertices `a..d`, edges `e..h` and face `F`
/// (`∂F = -e + f - g + h`).
pub fn combinatorial_square() -> RelationalComplex {
    combinatorial_square_with(|_, _, s| s)
}

/// The unit square with every boundary sign passed through `sign`
/// (used to build corrupted variants).
pub fn combinatorial_square_with(sign: impl Fn(&str, &str, i64) -> i64) -> RelationalComplex {
    let mut b = RelationalComplex::builder(2, 2);
    for (n, p) in [
        ("a", [0.0, 1.0]),
        ("b", [1.0, 1.0]),
        ("c", [0.0, 0.0]),
        ("d", [1.0, 0.0]),
    ] {
        b.vertex(n, &p).unwrap();
    }
    for (e, from, to) in [
        ("e", "a", "b"),
        ("f", "a", "c"),
        ("g", "b", "d"),
        ("h", "c", "d"),
    ] {
        b.cell(1, e).unwrap();
        b.boundary(1, e, from, sign(e, from, -1)).unwrap();
        b.boundary(1, e, to, sign(e, to, 1)).unwrap();
    }
    b.cell(2, "F").unwrap();
    for (e, s) in [("e", -1), ("f", 1), ("g", -1), ("h", 1)] {
        b.boundary(2, "F", e, sign("F", e, s)).unwrap();
    }
    b.build().unwrap()
}

/// The same square with vertices named `1..4`, edges `12, 13, 24, 34` and
/// face `S`, so that lexicographic labelling numbers the vertices 1..4.
pub fn numbered_square() -> RelationalComplex {
    let mut b = RelationalComplex::builder(2, 2);
    for (n, p) in [
        ("1", [0.0, 1.0]),
        ("2", [1.0, 1.0]),
        ("3", [0.0, 0.0]),
        ("4", [1.0, 0.0]),
    ] {
        b.vertex(n, &p).unwrap();
    }
    for (from, to) in [("1", "2"), ("1", "3"), ("2", "4"), ("3", "4")] {
        let e = format!("{from}{to}");
        b.cell(1, &e).unwrap();
        b.boundary(1, &e, from, -1).unwrap();
        b.boundary(1, &e, to, 1).unwrap();
    }
    b.cell(2, "S").unwrap();
    for (e, s) in [("12", -1), ("13", 1), ("24", -1), ("34", 1)] {
        b.boundary(2, "S", e, s).unwrap();
    }
    b.build().unwrap()
}

fn pad(i: usize, n: usize) -> String {
    let w = n.saturating_sub(1).to_string().len();
    format!("{i:0w$}")
}

/// One polygonal face with the given vertex loop. A counter-clockwise loop
/// yields a positively oriented face. Vertex names are `{prefix}v00..`,
/// edges `{prefix}e00..`, the face is `name`.
pub fn polygon(name: &str, prefix: &str, pts: &[[f64; 2]]) -> RelationalComplex {
    polygons(&[(name, pts)], prefix)
}

/// Several disjoint polygonal faces in one complex.
pub fn polygons(faces: &[(&str, &[[f64; 2]])], prefix: &str) -> RelationalComplex {
    let total: usize = faces.iter().map(|(_, p)| p.len()).sum();
    let mut b = RelationalComplex::builder(2, 2);
    let mut base = 0;
    for (name, pts) in faces {
        let k = pts.len();
        for (i, p) in pts.iter().enumerate() {
            b.vertex(&format!("{prefix}v{}", pad(base + i, total)), p)
                .unwrap();
        }
        b.cell(2, name).unwrap();
        for i in 0..k {
            let e = format!("{prefix}e{}", pad(base + i, total));
            b.cell(1, &e).unwrap();
            b.boundary(1, &e, &format!("{prefix}v{}", pad(base + i, total)), -1)
                .unwrap();
            b.boundary(
                1,
                &e,
                &format!("{prefix}v{}", pad(base + (i + 1) % k, total)),
                1,
            )
            .unwrap();
            b.boundary(2, name, &e, 1).unwrap();
        }
        base += k;
    }
    b.build().unwrap()
}

/// Axis-aligned rectangle `[x0, x1] × [y0, y1]` as a one-face complex.
pub fn rectangle(
    name: &str,
    prefix: &str,
    x0: f64,
    y0: f64,
    x1: f64,
    y1: f64,
) -> RelationalComplex {
    polygon(name, prefix, &[[x0, y0], [x1, y0], [x1, y1], [x0, y1]])
}

/// A single 3-cell bounded by the given face loops. Loops must be
/// counter-clockwise seen from outside; the cell is then positively oriented.
pub fn polyhedron(name: &str, vertices: &[[f64; 3]], faces: &[Vec<usize>]) -> RelationalComplex {
    let nv = vertices.len();
    let mut b = RelationalComplex::builder(3, 3);
    let vname = |i: usize| format!("v{}", pad(i, nv));
    for (i, p) in vertices.iter().enumerate() {
        b.vertex(&vname(i), p).unwrap();
    }
    let mut edges: BTreeMap<(usize, usize), String> = BTreeMap::new();
    for f in faces {
        for i in 0..f.len() {
            let (u, v) = (f[i], f[(i + 1) % f.len()]);
            let key = (u.min(v), u.max(v));
            let n = edges.len();
            edges.entry(key).or_insert_with(|| format!("e{n:03}"));
        }
    }
    for ((u, v), e) in &edges {
        b.cell(1, e).unwrap();
        b.boundary(1, e, &vname(*u), -1).unwrap();
        b.boundary(1, e, &vname(*v), 1).unwrap();
    }
    b.cell(3, name).unwrap();
    for (k, f) in faces.iter().enumerate() {
        let fname = format!("f{k:03}");
        b.cell(2, &fname).unwrap();
        for i in 0..f.len() {
            let (u, v) = (f[i], f[(i + 1) % f.len()]);
            let e = &edges[&(u.min(v), u.max(v))];
            b.boundary(2, &fname, e, if u < v { 1 } else { -1 })
                .unwrap();
        }
        b.boundary(3, name, &fname, 1).unwrap();
    }
    b.build().unwrap()
}

/// Prism of height `h` over a counter-clockwise polygon in the plane z = 0.
pub fn prism(base: &[[f64; 2]], h: f64) -> RelationalComplex {
    let k = base.len();
    let mut verts: Vec<[f64; 3]> = base.iter().map(|p| [p[0], p[1], 0.0]).collect();
    verts.extend(base.iter().map(|p| [p[0], p[1], h]));
    let mut faces = vec![(0..k).rev().collect::<Vec<_>>(), (k..2 * k).collect()];
    for i in 0..k {
        let j = (i + 1) % k;
        faces.push(vec![i, j, k + j, k + i]);
    }
    polyhedron("P", &verts, &faces)
}

/// Pyramid over a counter-clockwise polygon in z = 0 with the given apex.
pub fn pyramid(base: &[[f64; 2]], apex: [f64; 3]) -> RelationalComplex {
    let k = base.len();
    let mut verts: Vec<[f64; 3]> = base.iter().map(|p| [p[0], p[1], 0.0]).collect();
    verts.push(apex);
    let mut faces = vec![(0..k).rev().collect::<Vec<_>>()];
    for i in 0..k {
        faces.push(vec![i, (i + 1) % k, k]);
    }
    polyhedron("Q", &verts, &faces)
}

/// The standard cubical complex of `[0,1]^n`. Cells are named by strings
/// over `{0, 1, *}`; a `*` marks a free coordinate.
pub fn hypercube(n: usize) -> RelationalComplex {
    let mut b = RelationalComplex::builder(n, n);
    let mut all: Vec<Vec<u8>> = vec![vec![]];
    for _ in 0..n {
        all = all
            .into_iter()
            .flat_map(|p| {
                b"01*".iter().copied().map(move |c| {
                    let mut q = p.clone();
                    q.push(c);
                    q
                })
            })
            .collect();
    }
    let name = |v: &[u8]| String::from_utf8(v.to_vec()).unwrap();
    let mut by_dim: Vec<Vec<Vec<u8>>> = vec![Vec::new(); n + 1];
    for c in all {
        by_dim[c.iter().filter(|&&x| x == b'*').count()].push(c);
    }
    for v in &by_dim[0] {
        let coords: Vec<f64> = v
            .iter()
            .map(|&x| if x == b'1' { 1.0 } else { 0.0 })
            .collect();
        b.vertex(&name(v), &coords).unwrap();
    }
    for (k, cells) in by_dim.iter().enumerate().skip(1) {
        for c in cells {
            b.cell(k, &name(c)).unwrap();
        }
        for c in cells {
            let free: Vec<usize> = (0..n).filter(|&i| c[i] == b'*').collect();
            for (j, &i) in free.iter().enumerate() {
                let s = if j % 2 == 0 { 1 } else { -1 };
                let mut hi = c.clone();
                hi[i] = b'1';
                let mut lo = c.clone();
                lo[i] = b'0';
                b.boundary(k, &name(c), &name(&hi), s).unwrap();
                b.boundary(k, &name(c), &name(&lo), -s).unwrap();
            }
        }
    }
    b.build().unwrap()
}

/// U-shaped octagon: the square `[0,3]×[0,2]` with the notch `[1,2]×[1,2]` removed.
pub fn u_shape_points() -> Vec<[f64; 2]> {
    vec![
        [0.0, 0.0],
        [3.0, 0.0],
        [3.0, 2.0],
        [2.0, 2.0],
        [2.0, 1.0],
        [1.0, 1.0],
        [1.0, 2.0],
        [0.0, 2.0],
    ]
}

/// L-shaped hexagon of area 3.
pub fn l_shape_points() -> Vec<[f64; 2]> {
    vec![
        [0.0, 0.0],
        [2.0, 0.0],
        [2.0, 1.0],
        [1.0, 1.0],
        [1.0, 2.0],
        [0.0, 2.0],
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::validate_complex;

    #[test]
    fn fixtures_are_valid() {
        for c in [
            combinatorial_square(),
            numbered_square(),
            polygon("P", "", &l_shape_points()),
            prism(&u_shape_points(), 1.5),
            pyramid(&l_shape_points(), [0.5, 0.5, 2.0]),
            hypercube(2),
            hypercube(3),
            hypercube(4),
        ] {
            let r = validate_complex(&c);
            assert!(r.is_valid(), "{r}");
        }
    }

    #[test]
    fn hypercube_cell_counts() {
        let c = hypercube(3);
        let counts: Vec<usize> = (0..=3).map(|k| c.cells(k).count()).collect();
        assert_eq!(counts, vec![8, 12, 6, 1]);
    }
}
