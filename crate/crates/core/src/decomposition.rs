//! Signed simplicial decomposition of relational complexes.
//!
//! Two decompositions are provided. [`apex_triangulate`] cones every cell of
//! dimension two or more over its decomposed boundary from a fresh apex
//! vertex. [`cohen_hickey`] instead reuses the smallest labelled vertex of a
//! cell as apex and drops the simplices that would degenerate, which keeps
//! every emitted simplex strictly ascending and far fewer in number.
//!
//! Both produce a [`DecompositionMorphism`]: per-dimension maps from cells to
//! signed simplicial chains that commute with the boundary operators.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::complex::{
    bounding_box, diagonal, validate_complex, validate_morphism, CellId, ComplexMorphism,
    RelationalComplex, SparseIncidenceMatrix, ValidationReport,
};
use crate::error::{checked_add, checked_mul, Error, Result};
use crate::linalg::{self, DenseMatrix};

/// Integer vertex label. Complex vertices get labels `1..=#X_0`; apex
/// vertices get labels `0, -1, -2, ...` so that they sort in front.
pub type Label = i64;

/// Vertex coordinates indexed by label.
pub type LabelCoords = BTreeMap<Label, Vec<f64>>;

/// An ordered tuple of vertex labels.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Simplex(Vec<Label>);

impl Simplex {
    pub fn new(vertices: Vec<Label>) -> Self {
        Self(vertices)
    }

    pub fn vertices(&self) -> &[Label] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len().saturating_sub(1)
    }

    pub fn contains(&self, l: Label) -> bool {
        self.0.contains(&l)
    }

    pub fn is_ascending(&self) -> bool {
        self.0.windows(2).all(|w| w[0] < w[1])
    }

    /// True when some label occurs twice.
    pub fn is_degenerate(&self) -> bool {
        let set: BTreeSet<_> = self.0.iter().collect();
        set.len() != self.0.len()
    }

    /// The face opposite to the `i`-th vertex.
    pub fn face(&self, i: usize) -> Simplex {
        let mut v = self.0.clone();
        v.remove(i);
        Simplex(v)
    }

    fn prepend(&self, a: Label) -> Simplex {
        let mut v = Vec::with_capacity(self.0.len() + 1);
        v.push(a);
        v.extend_from_slice(&self.0);
        Simplex(v)
    }
}

impl fmt::Display for Simplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "<")?;
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{v}")?;
        }
        write!(f, ">")
    }
}

/// Sparse integer combination of simplices of one dimension.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimplicialChain {
    dim: usize,
    terms: BTreeMap<Simplex, i64>,
}

impl SimplicialChain {
    pub fn zero(dim: usize) -> Self {
        Self {
            dim,
            terms: BTreeMap::new(),
        }
    }

    pub fn from_terms<I>(dim: usize, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Vec<Label>, i64)>,
    {
        let mut c = Self::zero(dim);
        for (s, v) in terms {
            c.add_term(Simplex::new(s), v)?;
        }
        Ok(c)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn terms(&self) -> &BTreeMap<Simplex, i64> {
        &self.terms
    }

    pub fn coefficient(&self, s: &Simplex) -> i64 {
        self.terms.get(s).copied().unwrap_or(0)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add_term(&mut self, s: Simplex, value: i64) -> Result<()> {
        if s.0.len() != self.dim + 1 {
            return Err(Error::DimensionMismatch {
                context: "simplicial chain term",
                expected: self.dim,
                found: s.dim(),
            });
        }
        if value == 0 {
            return Ok(());
        }
        let next = checked_add(self.coefficient(&s), value)?;
        if next == 0 {
            self.terms.remove(&s);
        } else {
            self.terms.insert(s, next);
        }
        Ok(())
    }

    pub fn add_scaled(&mut self, other: &SimplicialChain, k: i64) -> Result<()> {
        for (s, &v) in &other.terms {
            self.add_term(s.clone(), checked_mul(v, k)?)?;
        }
        Ok(())
    }

    pub fn negated(&self) -> SimplicialChain {
        SimplicialChain {
            dim: self.dim,
            terms: self.terms.iter().map(|(s, v)| (s.clone(), -v)).collect(),
        }
    }

    /// Drops every simplex that contains label `a`.
    pub fn without_vertex(&self, a: Label) -> SimplicialChain {
        SimplicialChain {
            dim: self.dim,
            terms: self
                .terms
                .iter()
                .filter(|(s, _)| !s.contains(a))
                .map(|(s, v)| (s.clone(), *v))
                .collect(),
        }
    }
}

impl fmt::Display for SimplicialChain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (s, v)) in self.terms.iter().enumerate() {
            let sign = if *v < 0 {
                "-"
            } else if i > 0 {
                "+"
            } else {
                ""
            };
            let mag = v.abs();
            if mag == 1 {
                write!(f, "{sign}{s}")?;
            } else {
                write!(f, "{sign}{mag}{s}")?;
            }
        }
        Ok(())
    }
}

/// Alternating-sign simplicial boundary, extended linearly.
pub fn simplicial_boundary(x: &SimplicialChain) -> Result<SimplicialChain> {
    if x.dim == 0 {
        return Err(Error::Precondition("boundary of a 0-chain".into()));
    }
    let mut out = SimplicialChain::zero(x.dim - 1);
    for (s, &v) in &x.terms {
        for i in 0..s.0.len() {
            let sign = if i % 2 == 0 { v } else { -v };
            out.add_term(s.face(i), sign)?;
        }
    }
    Ok(out)
}

/// Prepends `a` to every simplex of `x`. Simplices that already contain
/// `a` become degenerate terms; they are kept so the caller can decide.
pub fn cone(a: Label, x: &SimplicialChain) -> SimplicialChain {
    SimplicialChain {
        dim: x.dim + 1,
        terms: x.terms.iter().map(|(s, v)| (s.prepend(a), *v)).collect(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Apex,
    CohenHickey,
}

/// Fresh apex vertices registered by [`apex_triangulate`].
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ApexRegistry {
    apexes: BTreeMap<CellId, (Label, Vec<f64>)>,
}

impl ApexRegistry {
    pub fn get(&self, cell: &CellId) -> Option<(Label, &[f64])> {
        self.apexes.get(cell).map(|(l, c)| (*l, c.as_slice()))
    }

    pub fn len(&self) -> usize {
        self.apexes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.apexes.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&CellId, Label, &[f64])> {
        self.apexes.iter().map(|(c, (l, p))| (c, *l, p.as_slice()))
    }
}

/// A signed simplicial decomposition `μ = (μ_n, .., μ_0)` of a complex.
#[derive(Debug, Clone)]
pub struct DecompositionMorphism {
    method: Method,
    dim: usize,
    labels: BTreeMap<String, Label>,
    vertex_names: BTreeMap<Label, String>,
    coords: LabelCoords,
    maps: Vec<BTreeMap<String, SimplicialChain>>,
    apexes: ApexRegistry,
    source_of: BTreeMap<Simplex, String>,
}

impl DecompositionMorphism {
    pub fn method(&self) -> Method {
        self.method
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `μ_0` as a map from vertex name to label.
    pub fn labels(&self) -> &BTreeMap<String, Label> {
        &self.labels
    }

    /// Inverse of `μ_0` (apex labels are absent).
    pub fn vertex_name(&self, l: Label) -> Option<&str> {
        self.vertex_names.get(&l).map(String::as_str)
    }

    pub fn coords(&self) -> &LabelCoords {
        &self.coords
    }

    pub fn apexes(&self) -> &ApexRegistry {
        &self.apexes
    }

    /// `μ_k(cell)`.
    pub fn image(&self, cell: &CellId) -> Option<&SimplicialChain> {
        self.maps.get(cell.dim)?.get(&cell.name)
    }

    /// The top-dimensional n-cell owning `s`, if any.
    pub fn source_of(&self, s: &Simplex) -> Option<&str> {
        self.source_of.get(s).map(String::as_str)
    }

    /// `(cell, simplex, coefficient)` for every term of every `μ_n(c)`.
    pub fn top_terms(&self) -> impl Iterator<Item = (&str, &Simplex, i64)> {
        self.maps[self.dim]
            .iter()
            .flat_map(|(c, ch)| ch.terms.iter().map(move |(s, v)| (c.as_str(), s, *v)))
    }

    pub fn top_simplex_count(&self) -> usize {
        self.maps[self.dim].values().map(SimplicialChain::len).sum()
    }

    /// The simplicial target complex: all simplices of all images together
    /// with their faces, with the alternating boundary.
    pub fn target_complex(&self) -> RelationalComplex {
        let mut by_dim: Vec<BTreeSet<Simplex>> = vec![BTreeSet::new(); self.dim + 1];
        for (k, m) in self.maps.iter().enumerate() {
            for ch in m.values() {
                by_dim[k].extend(ch.terms.keys().cloned());
            }
        }
        for k in (1..=self.dim).rev() {
            let faces: Vec<Simplex> = by_dim[k]
                .iter()
                .flat_map(|s| (0..=k).map(move |i| s.face(i)))
                .collect();
            by_dim[k - 1].extend(faces);
        }
        let emb = self.coords.values().next().map_or(self.dim, Vec::len);
        let mut b = RelationalComplex::builder(self.dim, emb.max(self.dim));
        for s in &by_dim[0] {
            let name = s.to_string();
            match self.coords.get(&s.0[0]) {
                Some(p) if p.len() == emb => b.vertex(&name, p).map(|_| ()),
                _ => b.bare_vertex(&name).map(|_| ()),
            }
            .expect("distinct simplices");
        }
        for (k, simplices) in by_dim.iter().enumerate().skip(1) {
            for s in simplices {
                b.cell(k, &s.to_string()).expect("distinct simplices");
            }
            for s in simplices {
                let mut acc: BTreeMap<Simplex, i64> = BTreeMap::new();
                for i in 0..=k {
                    *acc.entry(s.face(i)).or_default() += if i % 2 == 0 { 1 } else { -1 };
                }
                for (f, v) in acc.into_iter().filter(|(_, v)| *v != 0) {
                    b.boundary(k, &s.to_string(), &f.to_string(), v)
                        .expect("face present");
                }
            }
        }
        b.build().expect("target complex")
    }

    /// The matrices `F_0..F_n` of `μ` against [`Self::target_complex`].
    pub fn morphism_maps(&self) -> Vec<SparseIncidenceMatrix> {
        self.maps
            .iter()
            .enumerate()
            .map(|(k, m)| {
                let mut f = SparseIncidenceMatrix::new(k, k);
                for (cell, ch) in m {
                    for (s, &v) in &ch.terms {
                        f.add(
                            CellId::new(k, cell.clone()),
                            CellId::new(k, s.to_string()),
                            v,
                        )
                        .expect("morphism entry");
                    }
                }
                f
            })
            .collect()
    }

    /// Checks `δ_i ∘ μ_i = μ_{i-1} ∘ ∂_i` against the source complex.
    pub fn check(&self, source: &RelationalComplex) -> Result<ValidationReport> {
        let target = self.target_complex();
        let m = ComplexMorphism::new(source, &target, self.morphism_maps())?;
        validate_morphism(&m)
    }

    /// Signed volume of `μ_n(cell)`.
    pub fn volume(&self, cell: &str) -> Result<f64> {
        let ch = self.maps[self.dim]
            .get(cell)
            .ok_or_else(|| Error::UnknownCell {
                dim: self.dim,
                name: cell.to_string(),
            })?;
        chain_volume(ch, &self.coords)
    }

    /// Winding number of `μ_n(cell)` around `p`.
    pub fn winding_number(&self, cell: &str, p: &[f64], eps: f64) -> Result<i64> {
        let ch = self.maps[self.dim]
            .get(cell)
            .ok_or_else(|| Error::UnknownCell {
                dim: self.dim,
                name: cell.to_string(),
            })?;
        winding_number(p, ch, &self.coords, eps)
    }

    /// Default boundary tolerance for this decomposition's coordinates.
    pub fn boundary_tolerance(&self) -> f64 {
        boundary_tolerance(self.coords.values().map(Vec::as_slice))
    }
}

/// `1e-9` times the bounding-box diagonal of the given points.
pub fn boundary_tolerance<'a, I: IntoIterator<Item = &'a [f64]>>(pts: I) -> f64 {
    1e-9 * diagonal(&bounding_box(pts))
}

/// Labels `1..=#X_0` in lexicographic order of vertex names.
pub fn lexicographic_labels(c: &RelationalComplex) -> BTreeMap<String, Label> {
    c.cells(0)
        .enumerate()
        .map(|(i, v)| (v.name, i as Label + 1))
        .collect()
}

fn ensure_valid(c: &RelationalComplex) -> Result<()> {
    let r = validate_complex(c);
    if !r.is_valid() {
        return Err(Error::InvalidComplex(r.to_string()));
    }
    Ok(())
}

fn base_morphism(
    c: &RelationalComplex,
    labels: BTreeMap<String, Label>,
    method: Method,
) -> Result<DecompositionMorphism> {
    let vertex_names: BTreeMap<Label, String> =
        labels.iter().map(|(n, l)| (*l, n.clone())).collect();
    if vertex_names.len() != labels.len()
        || labels.len() != c.cells(0).count()
        || c.cells(0).any(|v| !labels.contains_key(&v.name))
    {
        return Err(Error::Precondition(
            "vertex labelling must be a bijection onto distinct labels".into(),
        ));
    }
    if labels.values().any(|&l| l <= 0) {
        return Err(Error::Precondition("vertex labels must be positive".into()));
    }
    let coords = labels
        .iter()
        .filter_map(|(n, l)| c.coords(n).map(|p| (*l, p.to_vec())))
        .collect();
    let mut maps = vec![BTreeMap::new(); c.dim() + 1];
    for (n, &l) in &labels {
        maps[0].insert(n.clone(), SimplicialChain::from_terms(0, [(vec![l], 1)])?);
    }
    if c.dim() >= 1 {
        for e in c.cells(1) {
            let b = c.boundary_of(&e);
            let ends: Vec<(Label, i64)> = b
                .terms()
                .iter()
                .map(|(v, s)| (labels[&v.name], *s))
                .collect();
            let [(la, _), (lb, sb)] = ends[..] else {
                return Err(Error::InvalidComplex(format!(
                    "edge {} needs two vertices",
                    e.name
                )));
            };
            if la == lb {
                return Err(Error::LoopEdge(e.name.clone()));
            }
            // D_1(e, max) times the ascending edge.
            let (lo, hi, s) = if la < lb {
                (la, lb, sb)
            } else {
                (lb, la, ends[0].1)
            };
            maps[1].insert(
                e.name.clone(),
                SimplicialChain::from_terms(1, [(vec![lo, hi], s)])?,
            );
        }
    }
    Ok(DecompositionMorphism {
        method,
        dim: c.dim(),
        labels,
        vertex_names,
        coords,
        maps,
        apexes: ApexRegistry::default(),
        source_of: BTreeMap::new(),
    })
}

/// `μ_{k-1}(∂_k c)`.
fn image_of_boundary(
    c: &RelationalComplex,
    maps: &[BTreeMap<String, SimplicialChain>],
    cell: &CellId,
) -> Result<SimplicialChain> {
    let mut acc = SimplicialChain::zero(cell.dim - 1);
    for (d, &a) in c.boundary_of(cell).terms() {
        acc.add_scaled(&maps[d.dim][&d.name], a)?;
    }
    Ok(acc)
}

fn fill_sources(m: &mut DecompositionMorphism) {
    let mut src = BTreeMap::new();
    for (cell, ch) in &m.maps[m.dim] {
        for s in ch.terms.keys() {
            src.entry(s.clone()).or_insert_with(|| cell.clone());
        }
    }
    m.source_of = src;
}

/// Cones every cell of dimension ≥ 2 from a fresh apex at the centroid of
/// its vertices. Apex labels count down from 0, lower dimensions first.
pub fn apex_triangulate(c: &RelationalComplex) -> Result<DecompositionMorphism> {
    ensure_valid(c)?;
    let mut m = base_morphism(c, lexicographic_labels(c), Method::Apex)?;
    let mut next: Label = 0;
    for k in 2..=c.dim() {
        for cell in c.cells(k) {
            let verts = c.incident_vertices(&cell);
            let mut centroid = vec![0.0; c.embedding_dim()];
            for v in &verts {
                for (i, x) in c.coords(v).unwrap_or(&[]).iter().enumerate() {
                    centroid[i] += x;
                }
            }
            let n = verts.len().max(1) as f64;
            centroid.iter_mut().for_each(|x| *x /= n);
            m.coords.insert(next, centroid.clone());
            m.apexes.apexes.insert(cell.clone(), (next, centroid));
            let img = cone(next, &image_of_boundary(c, &m.maps, &cell)?);
            m.maps[k].insert(cell.name.clone(), img);
            next -= 1;
        }
    }
    fill_sources(&mut m);
    Ok(m)
}

/// Cohen–Hickey style decomposition with lexicographic vertex labels.
pub fn cohen_hickey(c: &RelationalComplex) -> Result<DecompositionMorphism> {
    cohen_hickey_with_labels(c, lexicographic_labels(c))
}

/// Cohen–Hickey style decomposition with an explicit vertex labelling:
/// `μ_{k}(c) = a_c ⊗ (μ_{k-1}(∂c) without simplices containing a_c)`, where
/// `a_c` is the smallest label among the vertices of `c`.
pub fn cohen_hickey_with_labels(
    c: &RelationalComplex,
    labels: BTreeMap<String, Label>,
) -> Result<DecompositionMorphism> {
    ensure_valid(c)?;
    let mut m = base_morphism(c, labels, Method::CohenHickey)?;
    for k in 2..=c.dim() {
        for cell in c.cells(k) {
            let apex = c.incident_vertices(&cell).iter().map(|v| m.labels[v]).min();
            let img = match apex {
                Some(a) => cone(a, &image_of_boundary(c, &m.maps, &cell)?.without_vertex(a)),
                None => SimplicialChain::zero(k),
            };
            m.maps[k].insert(cell.name.clone(), img);
        }
    }
    fill_sources(&mut m);
    Ok(m)
}

fn simplex_points<'a>(s: &Simplex, coords: &'a LabelCoords) -> Result<Vec<&'a [f64]>> {
    s.0.iter()
        .map(|l| {
            coords
                .get(l)
                .map(Vec::as_slice)
                .ok_or_else(|| Error::Precondition(format!("no coordinates for label {l}")))
        })
        .collect()
}

fn edge_matrix(pts: &[&[f64]]) -> DenseMatrix {
    let n = pts.len() - 1;
    let mut m = DenseMatrix::zeros(n, n);
    for (j, p) in pts[1..].iter().enumerate() {
        for i in 0..n {
            m.set(i, j, p[i] - pts[0][i]);
        }
    }
    m
}

/// Determinant of the edge-vector matrix of an n-simplex in `R^n`:
/// `n!` times its signed volume.
pub fn simplex_det(s: &Simplex, coords: &LabelCoords) -> Result<f64> {
    let pts = simplex_points(s, coords)?;
    let n = s.dim();
    if let Some(p) = pts.iter().find(|p| p.len() != n) {
        return Err(Error::DimensionMismatch {
            context: "simplex embedding",
            expected: n,
            found: p.len(),
        });
    }
    if n == 0 {
        return Ok(1.0);
    }
    Ok(linalg::determinant(&edge_matrix(&pts)))
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// Signed volume `Σ α_i det(σ_i) / n!`.
pub fn chain_volume(x: &SimplicialChain, coords: &LabelCoords) -> Result<f64> {
    let f = factorial(x.dim);
    let mut vol = 0.0;
    for (s, &a) in &x.terms {
        vol += a as f64 * simplex_det(s, coords)? / f;
    }
    Ok(vol)
}

/// Winding number of the chain's boundary around `p`: the sum of
/// `α_i · sign(det σ_i)` over the simplices strictly containing `p`.
///
/// Insideness uses signed distances to the facet hyperplanes; a point within
/// `eps` of a facet of any simplex is rejected with [`Error::BoundaryPoint`].
pub fn winding_number(
    p: &[f64],
    x: &SimplicialChain,
    coords: &LabelCoords,
    eps: f64,
) -> Result<i64> {
    let n = x.dim;
    if p.len() != n {
        return Err(Error::DimensionMismatch {
            context: "winding point",
            expected: n,
            found: p.len(),
        });
    }
    let mut w = 0i64;
    for (s, &a) in &x.terms {
        let pts = simplex_points(s, coords)?;
        if pts.iter().any(|q| q.len() != n) {
            return Err(Error::DimensionMismatch {
                context: "simplex embedding",
                expected: n,
                found: pts[0].len(),
            });
        }
        if n == 0 {
            continue;
        }
        let e = edge_matrix(&pts);
        let det = linalg::determinant(&e);
        let Some(inv) = linalg::inverse(&e, 1e-12) else {
            continue;
        };
        if det == 0.0 {
            continue;
        }
        let rel: Vec<f64> = (0..n).map(|i| p[i] - pts[0][i]).collect();
        let lam_tail = inv.mul_vec(&rel);
        // Signed distances to the n+1 facet hyperplanes.
        let mut dist = Vec::with_capacity(n + 1);
        let mut grad0 = vec![0.0; n];
        for (i, &l) in lam_tail.iter().enumerate() {
            let g: Vec<f64> = (0..n).map(|j| inv.get(i, j)).collect();
            for j in 0..n {
                grad0[j] -= g[j];
            }
            dist.push(l / norm(&g));
        }
        let lam0 = 1.0 - lam_tail.iter().sum::<f64>();
        dist.push(lam0 / norm(&grad0));
        if dist.iter().any(|&d| d < -eps) {
            continue;
        }
        if dist.iter().any(|&d| d.abs() <= eps) {
            return Err(Error::BoundaryPoint);
        }
        w = checked_add(w, if det > 0.0 { a } else { -a })?;
    }
    Ok(w)
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}
