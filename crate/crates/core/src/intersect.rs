//! Intersection of two geometric simplices.
//!
//! The intersection is found by minimising the squared distance between a
//! point of each simplex (a quadratic form in the concatenated barycentric
//! coordinates). Its zero set is a convex polytope; every vertex of that
//! polytope is named by the set of simplex vertices with nonzero
//! barycentric coordinate (its *inactive set*). Unions of inactive sets name
//! the higher-dimensional faces.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use crate::complex::{bounding_box, diagonal, RelationalComplex};
use crate::decomposition::{cohen_hickey, Label};
use crate::error::{Error, Result};
use crate::linalg::{self, DenseMatrix};

/// A simplex given by labelled vertex coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct GeometricSimplex {
    labels: Vec<Label>,
    points: Vec<Vec<f64>>,
}

impl GeometricSimplex {
    pub fn new(labels: Vec<Label>, points: Vec<Vec<f64>>) -> Result<Self> {
        if labels.len() != points.len() || points.is_empty() {
            return Err(Error::Precondition(
                "a simplex needs one label per vertex and at least one vertex".into(),
            ));
        }
        let d = points[0].len();
        if let Some(p) = points.iter().find(|p| p.len() != d) {
            return Err(Error::DimensionMismatch {
                context: "simplex vertex",
                expected: d,
                found: p.len(),
            });
        }
        Ok(Self { labels, points })
    }

    /// Vertices labelled `first, first+1, ...`.
    pub fn numbered(first: Label, points: Vec<Vec<f64>>) -> Result<Self> {
        let labels = (0..points.len() as Label).map(|i| first + i).collect();
        Self::new(labels, points)
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.points.len() - 1
    }

    pub fn embedding_dim(&self) -> usize {
        self.points[0].len()
    }

    fn translated(&self, c: &[f64]) -> Self {
        Self {
            labels: self.labels.clone(),
            points: self
                .points
                .iter()
                .map(|p| p.iter().zip(c).map(|(x, o)| x - o).collect())
                .collect(),
        }
    }

    /// Axis-aligned bounding box.
    pub fn bbox(&self) -> (Vec<f64>, Vec<f64>) {
        bounding_box(self.points.iter().map(Vec::as_slice)).expect("non-empty simplex")
    }
}

/// Numerical thresholds of the intersection routines.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Feasibility and activity threshold on barycentric coordinates.
    pub feasibility: f64,
    /// Lagrangian zero test, relative to the KKT max-norm.
    pub lagrangian: f64,
    /// Relative pivot threshold for singularity.
    pub pivot: f64,
    /// Point identification, relative to the bounding-box diagonal.
    pub point: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            feasibility: 1e-9,
            lagrangian: 1e-9,
            pivot: 1e-12,
            point: 1e-7,
        }
    }
}

/// Set of vertex positions in the concatenation `a_0..a_n, b_0..b_m`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct InactiveSet(BTreeSet<usize>);

impl InactiveSet {
    pub fn new<I: IntoIterator<Item = usize>>(positions: I) -> Self {
        Self(positions.into_iter().collect())
    }

    pub fn positions(&self) -> &BTreeSet<usize> {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_subset(&self, other: &InactiveSet) -> bool {
        self.0.is_subset(&other.0)
    }

    pub fn union(&self, other: &InactiveSet) -> InactiveSet {
        InactiveSet(self.0.union(&other.0).copied().collect())
    }

    fn with(&self, v: usize) -> InactiveSet {
        let mut s = self.0.clone();
        s.insert(v);
        InactiveSet(s)
    }

    /// True when the set has a vertex from each of the two simplices.
    pub fn spans_both(&self, n_a: usize) -> bool {
        self.0.iter().any(|&p| p < n_a) && self.0.iter().any(|&p| p >= n_a)
    }

    /// The vertex labels, in position order.
    pub fn labels(&self, a: &GeometricSimplex, b: &GeometricSimplex) -> Vec<Label> {
        self.0.iter().map(|&p| vertex_label(a, b, p)).collect()
    }

    /// Printable name. Single-digit distinct labels are concatenated
    /// (`"1345"`); otherwise labels are joined by commas, and when the two
    /// simplices share labels the positions are written as `a0`, `b2`, ...
    pub fn name(&self, a: &GeometricSimplex, b: &GeometricSimplex) -> String {
        let all: BTreeSet<Label> = a.labels.iter().chain(&b.labels).copied().collect();
        if all.len() != a.len() + b.len() {
            return self
                .0
                .iter()
                .map(|&p| {
                    if p < a.len() {
                        format!("a{p}")
                    } else {
                        format!("b{}", p - a.len())
                    }
                })
                .collect::<Vec<_>>()
                .join(",");
        }
        let l = self.labels(a, b);
        if all.iter().all(|x| (0..10).contains(x)) {
            l.iter().map(Label::to_string).collect()
        } else {
            l.iter().map(Label::to_string).collect::<Vec<_>>().join(",")
        }
    }
}

fn vertex_label(a: &GeometricSimplex, b: &GeometricSimplex, p: usize) -> Label {
    if p < a.len() {
        a.labels[p]
    } else {
        b.labels[p - a.len()]
    }
}

/// The KKT system of the distance minimisation between two simplices.
#[derive(Debug, Clone, PartialEq)]
pub struct KktSystem {
    n_a: usize,
    n_b: usize,
    matrix: DenseMatrix,
    rhs: Vec<f64>,
}

impl KktSystem {
    pub fn matrix(&self) -> &DenseMatrix {
        &self.matrix
    }

    pub fn rhs(&self) -> &[f64] {
        &self.rhs
    }

    /// Number of vertices of the first simplex.
    pub fn n_a(&self) -> usize {
        self.n_a
    }

    pub fn n_b(&self) -> usize {
        self.n_b
    }

    /// Index of the first Lagrangian row; `Λ_b` follows.
    pub fn lagrangian_index(&self) -> usize {
        self.n_a + self.n_b
    }

    /// `xᵀ G x` over the Gram block, i.e. `|Σα_i a_i − Σβ_j b_j|²`.
    pub fn quadratic_form(&self, x: &[f64]) -> f64 {
        let n = self.n_a + self.n_b;
        assert_eq!(x.len(), n);
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                s += x[i] * self.matrix.get(i, j) * x[j];
            }
        }
        s
    }
}

/// Builds the KKT matrix
/// `[[a·a, −a·b, 1, 0], [−b·a, b·b, 0, 1], [1ᵀ, 0, 0, 0], [0, 1ᵀ, 0, 0]]`
/// with right-hand side `(0, .., 0, 1, 1)`.
pub fn assemble_kkt(a: &GeometricSimplex, b: &GeometricSimplex) -> Result<KktSystem> {
    if a.embedding_dim() != b.embedding_dim() {
        return Err(Error::DimensionMismatch {
            context: "simplex pair",
            expected: a.embedding_dim(),
            found: b.embedding_dim(),
        });
    }
    let (na, nb) = (a.len(), b.len());
    let size = na + nb + 2;
    let dot = |p: &[f64], q: &[f64]| p.iter().zip(q).map(|(x, y)| x * y).sum::<f64>();
    let pts: Vec<(&[f64], f64)> = a
        .points
        .iter()
        .map(|p| (p.as_slice(), 1.0))
        .chain(b.points.iter().map(|p| (p.as_slice(), -1.0)))
        .collect();
    let mut m = DenseMatrix::zeros(size, size);
    for (i, (p, si)) in pts.iter().enumerate() {
        for (j, (q, sj)) in pts.iter().enumerate() {
            m.set(i, j, si * sj * dot(p, q));
        }
    }
    for i in 0..na {
        m.set(i, na + nb, 1.0);
        m.set(na + nb, i, 1.0);
    }
    for j in na..na + nb {
        m.set(j, na + nb + 1, 1.0);
        m.set(na + nb + 1, j, 1.0);
    }
    let mut rhs = vec![0.0; size];
    rhs[size - 2] = 1.0;
    rhs[size - 1] = 1.0;
    Ok(KktSystem {
        n_a: na,
        n_b: nb,
        matrix: m,
        rhs,
    })
}

/// Solution of a restricted KKT system, padded with zeros outside the set.
#[derive(Debug, Clone, PartialEq)]
pub struct KktSolution {
    /// `(α_0..α_n, β_0..β_m)`.
    pub x: Vec<f64>,
    pub lambda_a: f64,
    pub lambda_b: f64,
    pub feasible: bool,
}

impl KktSolution {
    pub fn alpha(&self, n_a: usize) -> &[f64] {
        &self.x[..n_a]
    }

    pub fn beta(&self, n_a: usize) -> &[f64] {
        &self.x[n_a..]
    }

    fn padded(&self) -> Vec<f64> {
        let mut v = self.x.clone();
        v.push(self.lambda_a);
        v.push(self.lambda_b);
        v
    }
}

/// Solves the KKT system restricted to the rows and columns of `set`
/// (plus both Lagrangian rows).
pub fn solve_restricted(k: &KktSystem, set: &InactiveSet, tol: &Tolerances) -> Result<KktSolution> {
    if !set.spans_both(k.n_a) || set.0.iter().any(|&p| p >= k.n_a + k.n_b) {
        return Err(Error::Precondition(
            "inactive set must hold vertices of both simplices".into(),
        ));
    }
    let l = k.lagrangian_index();
    let idx: Vec<usize> = set.0.iter().copied().chain([l, l + 1]).collect();
    let sub = k.matrix.submatrix(&idx);
    let rhs: Vec<f64> = idx.iter().map(|&i| k.rhs[i]).collect();
    let sol = linalg::solve(&sub, &rhs, tol.pivot)?;
    let mut x = vec![0.0; l];
    for (i, &p) in set.0.iter().enumerate() {
        x[p] = sol[i];
    }
    let feasible = x.iter().all(|&v| v >= -tol.feasibility);
    Ok(KktSolution {
        x,
        lambda_a: sol[sol.len() - 2],
        lambda_b: sol[sol.len() - 1],
        feasible,
    })
}

/// Nullity of the restricted KKT block: the dimension of the affine set of
/// coordinate pairs supported on `set` that represent a common point.
pub fn solution_space_dim(k: &KktSystem, set: &InactiveSet, tol: &Tolerances) -> usize {
    let l = k.lagrangian_index();
    let idx: Vec<usize> = set.0.iter().copied().chain([l, l + 1]).collect();
    idx.len() - linalg::rank(&k.matrix.submatrix(&idx), tol.pivot)
}

/// An accepted intersection vertex.
#[derive(Debug, Clone, PartialEq)]
pub struct IntersectionVertex {
    pub set: InactiveSet,
    pub point: Vec<f64>,
    pub solution: KktSolution,
}

fn centroid(a: &GeometricSimplex, b: &GeometricSimplex) -> Vec<f64> {
    let d = a.embedding_dim();
    let n = (a.len() + b.len()) as f64;
    let mut c = vec![0.0; d];
    for p in a.points.iter().chain(&b.points) {
        for i in 0..d {
            c[i] += p[i];
        }
    }
    c.iter_mut().for_each(|x| *x /= n);
    c
}

fn point_of(a: &GeometricSimplex, alpha: &[f64], shift: &[f64]) -> Vec<f64> {
    let mut p = shift.to_vec();
    for (q, &w) in a.points.iter().zip(alpha) {
        for i in 0..p.len() {
            p[i] += w * q[i];
        }
    }
    p
}

fn pair_diagonal(a: &GeometricSimplex, b: &GeometricSimplex) -> f64 {
    diagonal(&bounding_box(
        a.points.iter().chain(&b.points).map(Vec::as_slice),
    ))
}

fn lagrangians_vanish(s: &KktSolution, k: &KktSystem, tol: &Tolerances) -> bool {
    let lim = tol.lagrangian * k.matrix.max_norm();
    s.lambda_a.abs() <= lim && s.lambda_b.abs() <= lim
}

fn check_pair(a: &GeometricSimplex, b: &GeometricSimplex) -> Result<()> {
    if a.embedding_dim() != b.embedding_dim() {
        return Err(Error::DimensionMismatch {
            context: "simplex pair",
            expected: a.embedding_dim(),
            found: b.embedding_dim(),
        });
    }
    Ok(())
}

/// Active-set enumeration of the intersection vertices.
///
/// Every pair `{a_i, b_j}` is a starting set. A restricted solve with a
/// negative coordinate is discarded; one with vanishing Lagrangians is an
/// intersection vertex; otherwise every vertex whose gradient component is
/// negative is added to the set and the larger set is queued.
///
/// Non-generic input (singular solves, vertices on faces, sets of the wrong
/// size) is reported as [`Error::DegenerateIntersection`].
pub fn intersection_vertices(
    a: &GeometricSimplex,
    b: &GeometricSimplex,
    tol: &Tolerances,
) -> Result<Vec<IntersectionVertex>> {
    check_pair(a, b)?;
    let shift = centroid(a, b);
    let (ca, cb) = (a.translated(&shift), b.translated(&shift));
    let k = assemble_kkt(&ca, &cb)?;
    let (na, nb) = (a.len(), b.len());
    let d = a.embedding_dim();

    let mut queue: VecDeque<InactiveSet> = VecDeque::new();
    let mut seen: BTreeSet<InactiveSet> = BTreeSet::new();
    for i in 0..na {
        for j in na..na + nb {
            let s = InactiveSet::new([i, j]);
            seen.insert(s.clone());
            queue.push_back(s);
        }
    }
    let mut out: BTreeMap<InactiveSet, IntersectionVertex> = BTreeMap::new();
    while let Some(set) = queue.pop_front() {
        let sol = match solve_restricted(&k, &set, tol) {
            Ok(s) => s,
            Err(Error::Singular) => {
                return Err(Error::DegenerateIntersection(format!(
                    "singular restricted system on {}",
                    set.name(a, b)
                )))
            }
            Err(e) => return Err(e),
        };
        if !sol.feasible {
            continue;
        }
        if lagrangians_vanish(&sol, &k, tol) {
            if set.len() != d + 2 {
                return Err(Error::DegenerateIntersection(format!(
                    "intersection vertex {} has {} instead of {} inactive vertices",
                    set.name(a, b),
                    set.len(),
                    d + 2
                )));
            }
            if set.0.iter().any(|&p| sol.x[p] <= tol.feasibility) {
                return Err(Error::DegenerateIntersection(format!(
                    "intersection vertex {} lies on a face boundary",
                    set.name(a, b)
                )));
            }
            let point = point_of(&ca, sol.alpha(na), &shift);
            out.insert(
                set.clone(),
                IntersectionVertex {
                    set,
                    point,
                    solution: sol,
                },
            );
            continue;
        }
        let g = k.matrix.mul_vec(&sol.padded());
        for (v, &gv) in g.iter().enumerate().take(na + nb) {
            if !set.0.contains(&v) && gv < -tol.feasibility {
                let next = set.with(v);
                if seen.insert(next.clone()) {
                    queue.push_back(next);
                }
            }
        }
    }
    let verts: Vec<IntersectionVertex> = out.into_values().collect();
    let tau = tol.point * pair_diagonal(a, b);
    for (i, u) in verts.iter().enumerate() {
        for w in &verts[i + 1..] {
            if dist(&u.point, &w.point) <= tau {
                return Err(Error::DegenerateIntersection(format!(
                    "vertices {} and {} coincide",
                    u.set.name(a, b),
                    w.set.name(a, b)
                )));
            }
        }
    }
    Ok(verts)
}

fn dist(p: &[f64], q: &[f64]) -> f64 {
    p.iter()
        .zip(q)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Exhaustive vertex enumeration for configurations that are not in general
/// position. Every subset with vertices from both sides is solved; feasible
/// solutions with vanishing Lagrangians are intersection points. Points are
/// deduplicated and each is named by its support (coordinates above the
/// feasibility threshold), which is independent of the subset that found it.
pub fn intersection_vertices_exhaustive(
    a: &GeometricSimplex,
    b: &GeometricSimplex,
    tol: &Tolerances,
) -> Result<Vec<IntersectionVertex>> {
    check_pair(a, b)?;
    let shift = centroid(a, b);
    let (ca, cb) = (a.translated(&shift), b.translated(&shift));
    let k = assemble_kkt(&ca, &cb)?;
    let (na, nb) = (a.len(), b.len());
    let total = na + nb;
    if total > 24 {
        return Err(Error::Precondition(
            "simplices too large for enumeration".into(),
        ));
    }
    let tau = tol.point * pair_diagonal(a, b);
    let mut found: Vec<IntersectionVertex> = Vec::new();
    for mask in 1u32..(1 << total) {
        let set = InactiveSet::new((0..total).filter(|&i| mask & (1 << i) != 0));
        if !set.spans_both(na) {
            continue;
        }
        let sol = match solve_restricted(&k, &set, tol) {
            Ok(s) => s,
            Err(Error::Singular) => continue,
            Err(e) => return Err(e),
        };
        if !sol.feasible || !lagrangians_vanish(&sol, &k, tol) {
            continue;
        }
        let point = point_of(&ca, sol.alpha(na), &shift);
        if found.iter().any(|v| dist(&v.point, &point) <= tau) {
            continue;
        }
        let support = InactiveSet::new((0..total).filter(|&i| sol.x[i] > tol.feasibility));
        if !support.spans_both(na) {
            continue;
        }
        found.push(IntersectionVertex {
            set: support,
            point,
            solution: sol,
        });
    }
    found.sort_by(|u, w| u.set.cmp(&w.set));
    for w in found.windows(2) {
        if w[0].set == w[1].set {
            return Err(Error::DegenerateIntersection(format!(
                "two intersection points share the support {}",
                w[0].set.name(a, b)
            )));
        }
    }
    Ok(found)
}

/// Smallest union-closed family containing `r`.
pub fn union_closure(r: &BTreeSet<InactiveSet>) -> BTreeSet<InactiveSet> {
    let mut x = r.clone();
    let mut frontier: Vec<InactiveSet> = r.iter().cloned().collect();
    while let Some(s) = frontier.pop() {
        let new: Vec<InactiveSet> = x
            .iter()
            .map(|t| t.union(&s))
            .filter(|u| !x.contains(u))
            .collect();
        for u in new {
            if x.insert(u.clone()) {
                frontier.push(u);
            }
        }
    }
    x
}

/// Simplicial boundary of `cell` (read as a sorted vertex string) with all
/// terms outside `x` struck out.
pub fn restricted_boundary(
    x: &BTreeSet<InactiveSet>,
    cell: &InactiveSet,
) -> Result<BTreeMap<InactiveSet, i64>> {
    if !x.contains(cell) {
        return Err(Error::Precondition("cell is not in the family".into()));
    }
    let mut out = BTreeMap::new();
    for (i, &p) in cell.0.iter().enumerate() {
        let mut f = cell.0.clone();
        f.remove(&p);
        let f = InactiveSet(f);
        if x.contains(&f) {
            out.insert(f, if i % 2 == 0 { 1 } else { -1 });
        }
    }
    Ok(out)
}

/// One face of an intersection polytope.
#[derive(Debug, Clone, PartialEq)]
pub struct IntersectionCell {
    pub set: InactiveSet,
    pub dim: usize,
    /// Indices into [`IntersectionComplex::vertices`].
    pub vertices: Vec<usize>,
}

/// The face complex of `a ∩ b` with oriented incidences.
#[derive(Debug, Clone)]
pub struct IntersectionComplex {
    a: GeometricSimplex,
    b: GeometricSimplex,
    cells: Vec<IntersectionCell>,
    points: Vec<Vec<f64>>,
    /// `(cell, facet) -> sign`, indices into `cells`.
    boundary: BTreeMap<(usize, usize), i64>,
    conflict: Option<String>,
    top_sign: i64,
}

impl IntersectionComplex {
    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn cells(&self) -> &[IntersectionCell] {
        &self.cells
    }

    /// Coordinates of the 0-cells, in the order of their appearance in
    /// [`Self::cells`].
    pub fn vertices(&self) -> &[Vec<f64>] {
        &self.points
    }

    /// Dimension of the top cell, or `None` when empty.
    pub fn dim(&self) -> Option<usize> {
        self.cells.iter().map(|c| c.dim).max()
    }

    pub fn embedding_dim(&self) -> usize {
        self.a.embedding_dim()
    }

    /// Index of the top cell.
    pub fn top(&self) -> Option<usize> {
        let d = self.dim()?;
        self.cells.iter().position(|c| c.dim == d)
    }

    /// The requested orientation `signA·signB`.
    pub fn top_sign(&self) -> i64 {
        self.top_sign
    }

    /// Signed facets of a cell.
    pub fn facets(&self, cell: usize) -> impl Iterator<Item = (usize, i64)> + '_ {
        self.boundary
            .range((cell, 0)..(cell + 1, 0))
            .map(|(&(_, f), &s)| (f, s))
    }

    /// Set when the orientation pass met an inconsistency; incidence signs
    /// are then only partially oriented.
    pub fn orientation_conflict(&self) -> Option<&str> {
        self.conflict.as_deref()
    }

    pub fn cell_name(&self, cell: usize) -> String {
        self.cells[cell].set.name(&self.a, &self.b)
    }

    /// Coordinates of a 0-cell.
    pub fn point(&self, cell: usize) -> &[f64] {
        &self.points[self.cells[cell].vertices[0]]
    }

    /// The complex as a relational complex with cells named by their
    /// inactive sets.
    pub fn to_relational(&self) -> Result<RelationalComplex> {
        let top = self.dim().unwrap_or(0);
        let mut b = RelationalComplex::builder(top, self.embedding_dim().max(top));
        for (i, c) in self.cells.iter().enumerate() {
            if c.dim == 0 {
                b.vertex(&self.cell_name(i), self.point(i))?;
            } else {
                b.cell(c.dim, &self.cell_name(i))?;
            }
        }
        for (&(c, f), &s) in &self.boundary {
            let dim = self.cells[c].dim;
            b.boundary(dim, &self.cell_name(c), &self.cell_name(f), s)?;
        }
        b.build()
    }
}

/// Builds the intersection complex from the active-set vertices.
pub fn build_intersection_complex(
    a: &GeometricSimplex,
    b: &GeometricSimplex,
    sign_a: i64,
    sign_b: i64,
    tol: &Tolerances,
) -> Result<IntersectionComplex> {
    let verts = intersection_vertices(a, b, tol)?;
    complex_from_vertices(a, b, verts, sign_a * sign_b, tol)
}

/// Like [`build_intersection_complex`], but falls back to exhaustive vertex
/// enumeration when the pair is not in general position.
pub fn build_intersection_complex_robust(
    a: &GeometricSimplex,
    b: &GeometricSimplex,
    sign_a: i64,
    sign_b: i64,
    tol: &Tolerances,
) -> Result<IntersectionComplex> {
    let verts = match intersection_vertices(a, b, tol) {
        Ok(v) => v,
        Err(Error::DegenerateIntersection(_)) => intersection_vertices_exhaustive(a, b, tol)?,
        Err(e) => return Err(e),
    };
    complex_from_vertices(a, b, verts, sign_a * sign_b, tol)
}

fn complex_from_vertices(
    a: &GeometricSimplex,
    b: &GeometricSimplex,
    verts: Vec<IntersectionVertex>,
    top_sign: i64,
    tol: &Tolerances,
) -> Result<IntersectionComplex> {
    let shift = centroid(a, b);
    let k = assemble_kkt(&a.translated(&shift), &b.translated(&shift))?;
    let r: BTreeSet<InactiveSet> = verts.iter().map(|v| v.set.clone()).collect();
    let x = union_closure(&r);
    let vertex_of: BTreeMap<&InactiveSet, usize> =
        verts.iter().enumerate().map(|(i, v)| (&v.set, i)).collect();

    let mut cells: Vec<IntersectionCell> = x
        .iter()
        .map(|s| {
            if let Some(&i) = vertex_of.get(s) {
                return IntersectionCell {
                    set: s.clone(),
                    dim: 0,
                    vertices: vec![i],
                };
            }
            let vs: Vec<usize> = verts
                .iter()
                .enumerate()
                .filter(|(_, v)| v.set.is_subset(s))
                .map(|(i, _)| i)
                .collect();
            IntersectionCell {
                set: s.clone(),
                dim: solution_space_dim(&k, s, tol),
                vertices: vs,
            }
        })
        .collect();
    cells.sort_by(|p, q| (p.dim, &p.set).cmp(&(q.dim, &q.set)));
    for c in &cells {
        let expect_min = c.dim + 1;
        if c.dim > 0 && c.vertices.len() < expect_min {
            return Err(Error::DegenerateIntersection(format!(
                "face {} of dimension {} has only {} vertices",
                c.set.name(a, b),
                c.dim,
                c.vertices.len()
            )));
        }
    }

    // Facets: contained faces of one dimension lower.
    let mut facets: Vec<Vec<usize>> = vec![Vec::new(); cells.len()];
    for (i, c) in cells.iter().enumerate() {
        if c.dim == 0 {
            continue;
        }
        for (j, f) in cells.iter().enumerate() {
            if f.dim + 1 == c.dim && f.set.is_subset(&c.set) {
                facets[i].push(j);
            }
        }
    }
    let points = verts.into_iter().map(|v| v.point).collect();
    let mut ic = IntersectionComplex {
        a: a.clone(),
        b: b.clone(),
        cells,
        points,
        boundary: BTreeMap::new(),
        conflict: None,
        top_sign,
    };
    orient(&mut ic, &facets);
    if ic.conflict.is_none() {
        orient_top(&mut ic)?;
    }
    Ok(ic)
}

/// Orientation pass: edges get `+1` on their lexicographically smallest
/// endpoint; higher cells get `+1` on their smallest facet, and the sign
/// is carried across each shared ridge so the boundary becomes a cycle.
fn orient(ic: &mut IntersectionComplex, facets: &[Vec<usize>]) {
    let names: Vec<String> = (0..ic.cells.len()).map(|i| ic.cell_name(i)).collect();
    let by_name = |fs: &[usize]| {
        let mut v = fs.to_vec();
        v.sort_by(|&p, &q| names[p].cmp(&names[q]));
        v
    };
    for i in 0..ic.cells.len() {
        let dim = ic.cells[i].dim;
        if dim == 0 {
            continue;
        }
        let fs = by_name(&facets[i]);
        if dim == 1 {
            if fs.len() != 2 {
                ic.conflict
                    .get_or_insert(format!("edge {} has {} endpoints", names[i], fs.len()));
                continue;
            }
            ic.boundary.insert((i, fs[0]), 1);
            ic.boundary.insert((i, fs[1]), -1);
            continue;
        }
        let mut sign: BTreeMap<usize, i64> = BTreeMap::new();
        let Some(&seed) = fs.first() else {
            ic.conflict
                .get_or_insert(format!("cell {} has no facets", names[i]));
            continue;
        };
        sign.insert(seed, 1);
        let mut queue = VecDeque::from([seed]);
        while let Some(f) = queue.pop_front() {
            let sf = sign[&f];
            for (u, su) in ic.facets(f).collect::<Vec<_>>() {
                for &g in &fs {
                    if g == f {
                        continue;
                    }
                    let Some(&sg_u) = ic.boundary.get(&(g, u)) else {
                        continue;
                    };
                    let want = -sf * su * sg_u;
                    match sign.get(&g) {
                        Some(&s) if s != want => {
                            ic.conflict.get_or_insert(format!(
                                "inconsistent orientation of {} in {}",
                                names[g], names[i]
                            ));
                        }
                        Some(_) => {}
                        None => {
                            sign.insert(g, want);
                            queue.push_back(g);
                        }
                    }
                }
            }
        }
        if sign.len() != fs.len() {
            ic.conflict
                .get_or_insert(format!("boundary of {} is not connected", names[i]));
        }
        for (g, s) in sign {
            ic.boundary.insert((i, g), s);
        }
    }
}

/// Flips a full-dimensional top cell so that its signed volume has the
/// sign `signA·signB`.
fn orient_top(ic: &mut IntersectionComplex) -> Result<()> {
    let (Some(top), Some(d)) = (ic.top(), ic.dim()) else {
        return Ok(());
    };
    if d == 0 || d != ic.embedding_dim() {
        return Ok(());
    }
    let rc = ic.to_relational()?;
    let m = cohen_hickey(&rc)?;
    let vol = m.volume(&ic.cell_name(top))?;
    if vol * (ic.top_sign as f64) < 0.0 {
        for (&(c, _), s) in ic.boundary.iter_mut() {
            if c == top {
                *s = -*s;
            }
        }
    }
    Ok(())
}
