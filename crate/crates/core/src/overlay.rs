//! Intersection overlay of two full-dimensional complexes.
//!
//! Both complexes are decomposed into signed simplices, every pair of top
//! simplices is intersected, and the signed pieces are summed per pair of
//! source cells. Boundaries introduced by the triangulations cancel in the
//! sum; what remains is the boundary of `c ∩ z`, which is then split into
//! connected components and written out as cells.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use rayon::prelude::*;

use crate::complex::{bounding_box, diagonal, RelationalComplex};
use crate::decomposition::{cohen_hickey, simplex_det, DecompositionMorphism, Simplex};
use crate::error::{checked_add, checked_mul, Error, Result};
use crate::intersect::{
    build_intersection_complex_robust, GeometricSimplex, IntersectionComplex, Tolerances,
};

/// Sparse chain over the cells of one dimension of a [`CellTable`].
pub type TableChain = BTreeMap<usize, i64>;

fn add_to(chain: &mut TableChain, id: usize, v: i64) -> Result<()> {
    let next = checked_add(chain.get(&id).copied().unwrap_or(0), v)?;
    if next == 0 {
        chain.remove(&id);
    } else {
        chain.insert(id, next);
    }
    Ok(())
}

/// Geometric identification of cells. Points are clustered within `tau`;
/// a k-cell is identified by its boundary chain up to sign.
#[derive(Debug, Clone)]
pub struct CellTable {
    tau: f64,
    points: Vec<Vec<f64>>,
    grid: HashMap<Vec<i64>, Vec<usize>>,
    cells: Vec<Vec<Vec<(usize, i64)>>>,
    index: Vec<HashMap<Vec<(usize, i64)>, usize>>,
}

impl CellTable {
    pub fn new(tau: f64) -> Self {
        Self {
            tau,
            points: Vec::new(),
            grid: HashMap::new(),
            cells: Vec::new(),
            index: Vec::new(),
        }
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    fn key(&self, p: &[f64]) -> Vec<i64> {
        let g = if self.tau > 0.0 { 2.0 * self.tau } else { 1.0 };
        p.iter().map(|x| (x / g).floor() as i64).collect()
    }

    /// Returns the id of the representative within `tau` of `p`, creating
    /// one if none exists.
    pub fn insert_point(&mut self, p: &[f64]) -> Result<usize> {
        let base = self.key(p);
        let mut hits = BTreeSet::new();
        let d = p.len();
        for code in 0..3usize.pow(d as u32) {
            let mut k = base.clone();
            let mut c = code;
            for x in k.iter_mut() {
                *x += (c % 3) as i64 - 1;
                c /= 3;
            }
            if let Some(ids) = self.grid.get(&k) {
                for &id in ids {
                    if dist(&self.points[id], p) <= self.tau {
                        hits.insert(id);
                    }
                }
            }
        }
        match hits.len() {
            0 => {
                let id = self.points.len();
                self.points.push(p.to_vec());
                self.grid.entry(base).or_default().push(id);
                Ok(id)
            }
            1 => Ok(*hits.iter().next().unwrap()),
            _ => Err(Error::AmbiguousMerge(p.to_vec())),
        }
    }

    /// Inserts a k-cell (k ≥ 1) by its boundary chain over (k-1)-cells and
    /// returns `(id, flip)` with `chain = flip · ∂(id)`. `None` for a zero chain.
    pub fn insert_cell(&mut self, k: usize, chain: &TableChain) -> Option<(usize, i64)> {
        assert!(k >= 1);
        let mut key: Vec<(usize, i64)> = chain
            .iter()
            .filter(|(_, &v)| v != 0)
            .map(|(&i, &v)| (i, v))
            .collect();
        let first = key.first()?.1;
        let flip = if first < 0 { -1 } else { 1 };
        if flip < 0 {
            key.iter_mut().for_each(|e| e.1 = -e.1);
        }
        while self.cells.len() < k {
            self.cells.push(Vec::new());
            self.index.push(HashMap::new());
        }
        let id = match self.index[k - 1].get(&key) {
            Some(&id) => id,
            None => {
                let id = self.cells[k - 1].len();
                self.cells[k - 1].push(key.clone());
                self.index[k - 1].insert(key, id);
                id
            }
        };
        Some((id, flip))
    }

    pub fn point(&self, id: usize) -> &[f64] {
        &self.points[id]
    }

    pub fn point_count(&self) -> usize {
        self.points.len()
    }

    pub fn cell_count(&self, k: usize) -> usize {
        if k == 0 {
            self.points.len()
        } else {
            self.cells.get(k - 1).map_or(0, Vec::len)
        }
    }

    /// Boundary of a k-cell, k ≥ 1.
    pub fn boundary(&self, k: usize, id: usize) -> &[(usize, i64)] {
        &self.cells[k - 1][id]
    }

    /// All 0-cells below a k-cell.
    pub fn vertices_of(&self, k: usize, id: usize) -> BTreeSet<usize> {
        let mut cur: BTreeSet<usize> = BTreeSet::from([id]);
        for j in (1..=k).rev() {
            cur = cur
                .iter()
                .flat_map(|&c| self.boundary(j, c).iter().map(|e| e.0))
                .collect();
        }
        cur
    }

    /// Start and end vertex of an edge.
    fn edge_ends(&self, id: usize) -> Result<(usize, usize)> {
        match self.boundary(1, id) {
            [(a, sa), (b, sb)] if *sa == -*sb => Ok(if *sa < 0 { (*a, *b) } else { (*b, *a) }),
            other => Err(Error::InvalidComplex(format!("malformed edge {other:?}"))),
        }
    }

    fn edge(&mut self, from: usize, to: usize) -> Option<(usize, i64)> {
        self.insert_cell(1, &TableChain::from([(from, -1), (to, 1)]))
    }
}

fn dist(p: &[f64], q: &[f64]) -> f64 {
    p.iter()
        .zip(q)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// A piece `σ_i ∩ ζ_j` with coefficient `α_i β_j`.
#[derive(Debug, Clone)]
pub struct SignedPiece {
    /// Source cells `(c, z)`.
    pub source: (String, String),
    pub coefficient: i64,
    pub complex: IntersectionComplex,
}

/// Cells of a set of pieces, identified in one table, with the summed top
/// chain and the summed boundary of the top cells.
#[derive(Debug, Clone)]
pub struct MergedCells {
    pub table: CellTable,
    pub top: TableChain,
    pub boundary: TableChain,
    pub dim: usize,
}

/// Inserts a piece and returns its top cell and the boundary chain of the
/// top cell, both in table ids.
fn insert_piece(
    table: &mut CellTable,
    piece: &IntersectionComplex,
) -> Result<Option<((usize, i64), TableChain)>> {
    let Some(top) = piece.top() else {
        return Ok(None);
    };
    let mut ids: Vec<Option<(usize, i64)>> = vec![None; piece.cells().len()];
    let mut top_boundary = TableChain::new();
    for (i, c) in piece.cells().iter().enumerate() {
        if c.dim == 0 {
            ids[i] = Some((table.insert_point(piece.point(i))?, 1));
            continue;
        }
        let mut chain = TableChain::new();
        for (f, s) in piece.facets(i) {
            if let Some((fid, flip)) = ids[f] {
                add_to(&mut chain, fid, s * flip)?;
            }
        }
        if i == top {
            top_boundary = chain.clone();
        }
        ids[i] = table.insert_cell(c.dim, &chain);
    }
    Ok(ids[top].map(|t| (t, top_boundary)))
}

fn merge_into(table: &mut CellTable, pieces: &[&SignedPiece]) -> Result<(TableChain, TableChain)> {
    let mut top = TableChain::new();
    let mut bnd = TableChain::new();
    for p in pieces {
        if let Some(((tid, flip), b)) = insert_piece(table, &p.complex)? {
            add_to(&mut top, tid, checked_mul(p.coefficient, flip)?)?;
            for (id, v) in b {
                add_to(&mut bnd, id, checked_mul(p.coefficient, v)?)?;
            }
        }
    }
    Ok((top, bnd))
}

/// Sums pieces of one source pair: cells are identified geometrically,
/// coefficients added and zero sums dropped.
pub fn merge_cells(pieces: &[SignedPiece], tau: f64) -> Result<MergedCells> {
    let dim = pieces
        .iter()
        .filter_map(|p| p.complex.dim())
        .max()
        .unwrap_or(0);
    let mut table = CellTable::new(tau);
    let refs: Vec<&SignedPiece> = pieces
        .iter()
        .filter(|p| p.complex.dim() == Some(dim))
        .collect();
    let (top, boundary) = merge_into(&mut table, &refs)?;
    Ok(MergedCells {
        table,
        top,
        boundary,
        dim,
    })
}

/// Provenance of an output n-cell.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Provenance {
    pub c: String,
    pub z: String,
    pub component: usize,
}

/// Result of [`overlay_intersection`].
#[derive(Debug, Clone)]
pub struct OverlayComplex {
    pub complex: RelationalComplex,
    pub provenance: BTreeMap<String, Provenance>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OverlayOptions {
    /// Split each source pair into connected components.
    pub components: bool,
    pub intersect: Tolerances,
}

impl Default for OverlayOptions {
    fn default() -> Self {
        Self {
            components: true,
            intersect: Tolerances::default(),
        }
    }
}

struct PieceWinding {
    decomposition: DecompositionMorphism,
    top: String,
}

/// Decompositions of both inputs and all signed pieces.
pub struct OverlayJob {
    dim: usize,
    mu_c: DecompositionMorphism,
    mu_k: DecompositionMorphism,
    pieces: Vec<SignedPiece>,
    windings: Vec<PieceWinding>,
    tau_merge: f64,
    tau_volume: f64,
    eps_boundary: f64,
    options: OverlayOptions,
}

fn check_input(c: &RelationalComplex, n: usize) -> Result<()> {
    if c.dim() != n {
        return Err(Error::DimensionMismatch {
            context: "overlay operand",
            expected: n,
            found: c.dim(),
        });
    }
    if c.embedding_dim() != n {
        return Err(Error::DimensionMismatch {
            context: "overlay embedding",
            expected: n,
            found: c.embedding_dim(),
        });
    }
    Ok(())
}

struct TopSimplex<'a> {
    cell: &'a str,
    coeff: i64,
    sign: i64,
    simplex: GeometricSimplex,
    bbox: (Vec<f64>, Vec<f64>),
}

fn top_simplices(mu: &DecompositionMorphism) -> Result<Vec<TopSimplex<'_>>> {
    let mut out = Vec::new();
    for (cell, s, coeff) in mu.top_terms() {
        let det = simplex_det(s, mu.coords())?;
        if det == 0.0 {
            continue;
        }
        let pts = s
            .vertices()
            .iter()
            .map(|l| mu.coords()[l].clone())
            .collect();
        let simplex = GeometricSimplex::new(s.vertices().to_vec(), pts)?;
        let bbox = simplex.bbox();
        out.push(TopSimplex {
            cell,
            coeff,
            sign: if det > 0.0 { 1 } else { -1 },
            simplex,
            bbox,
        });
    }
    Ok(out)
}

fn boxes_meet(a: &(Vec<f64>, Vec<f64>), b: &(Vec<f64>, Vec<f64>)) -> bool {
    (0..a.0.len()).all(|i| a.0[i] <= b.1[i] && b.0[i] <= a.1[i])
}

fn describe(s: &Simplex) -> String {
    s.to_string()
}

impl OverlayJob {
    pub fn new(
        c: &RelationalComplex,
        k: &RelationalComplex,
        options: OverlayOptions,
    ) -> Result<Self> {
        let n = c.dim();
        check_input(c, n)?;
        check_input(k, n)?;
        if n == 0 {
            return Err(Error::Precondition(
                "overlay needs dimension at least 1".into(),
            ));
        }
        let mu_c = cohen_hickey(c)?;
        let mu_k = cohen_hickey(k)?;
        let diag = diagonal(&bounding_box(
            c.all_coords()
                .values()
                .chain(k.all_coords().values())
                .map(Vec::as_slice),
        ));
        let (sc, sk) = (top_simplices(&mu_c)?, top_simplices(&mu_k)?);
        let pairs: Vec<(&TopSimplex, &TopSimplex)> = sc
            .iter()
            .flat_map(|a| sk.iter().map(move |b| (a, b)))
            .filter(|(a, b)| boxes_meet(&a.bbox, &b.bbox))
            .collect();
        let tol = options.intersect;
        let results: Vec<Result<Option<(SignedPiece, PieceWinding)>>> = pairs
            .par_iter()
            .map(|(a, b)| {
                let ic =
                    build_intersection_complex_robust(&a.simplex, &b.simplex, a.sign, b.sign, &tol)
                        .map_err(|e| match e {
                            Error::DegenerateIntersection(m) => {
                                Error::DegenerateIntersection(format!(
                                    "{} of {} with {} of {}: {m}",
                                    describe(&Simplex::new(a.simplex.labels().to_vec())),
                                    a.cell,
                                    describe(&Simplex::new(b.simplex.labels().to_vec())),
                                    b.cell
                                ))
                            }
                            e => e,
                        })?;
                if ic.dim() != Some(n) || ic.orientation_conflict().is_some() {
                    return Ok(None);
                }
                let rc = ic.to_relational()?;
                let decomposition = cohen_hickey(&rc)?;
                let top = ic.cell_name(ic.top().expect("non-empty"));
                Ok(Some((
                    SignedPiece {
                        source: (a.cell.to_string(), b.cell.to_string()),
                        coefficient: checked_mul(a.coeff, b.coeff)?,
                        complex: ic,
                    },
                    PieceWinding { decomposition, top },
                )))
            })
            .collect();
        let mut pieces = Vec::new();
        let mut windings = Vec::new();
        for r in results {
            if let Some((p, w)) = r? {
                pieces.push(p);
                windings.push(w);
            }
        }
        Ok(Self {
            dim: n,
            mu_c,
            mu_k,
            pieces,
            windings,
            tau_merge: 1e-7 * diag,
            tau_volume: 1e-12 * diag.powi(n as i32),
            eps_boundary: 1e-9 * diag,
            options,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn pieces(&self) -> &[SignedPiece] {
        &self.pieces
    }

    pub fn decompositions(&self) -> (&DecompositionMorphism, &DecompositionMorphism) {
        (&self.mu_c, &self.mu_k)
    }

    /// Boundary tolerance used by the winding queries.
    pub fn eps_boundary(&self) -> f64 {
        self.eps_boundary
    }

    /// `Σ α_i β_j · w(p, σ_i ∩ ζ_j)` over all pieces.
    pub fn summed_winding(&self, p: &[f64]) -> Result<i64> {
        let mut w = 0i64;
        for (piece, pw) in self.pieces.iter().zip(&self.windings) {
            let x = pw
                .decomposition
                .winding_number(&pw.top, p, self.eps_boundary)?;
            w = checked_add(w, checked_mul(piece.coefficient, x)?)?;
        }
        Ok(w)
    }

    /// `Σ_{c,z} w(p, μ_C(c)) · w(p, μ_K(z))`.
    pub fn pair_winding(&self, p: &[f64]) -> Result<i64> {
        let wc = cell_windings(&self.mu_c, p, self.eps_boundary)?;
        let wk = cell_windings(&self.mu_k, p, self.eps_boundary)?;
        let mut w = 0i64;
        for a in &wc {
            for b in &wk {
                w = checked_add(w, checked_mul(*a, *b)?)?;
            }
        }
        Ok(w)
    }

    /// Sums the pieces per source pair and builds the output complex.
    pub fn recompose(&self) -> Result<OverlayComplex> {
        let n = self.dim;
        let mut groups: BTreeMap<(&str, &str), Vec<&SignedPiece>> = BTreeMap::new();
        for p in &self.pieces {
            groups
                .entry((&p.source.0, &p.source.1))
                .or_default()
                .push(p);
        }
        let mut table = CellTable::new(self.tau_merge);
        // (c, z, component, boundary chain over (n-1)-cells)
        let mut outputs: Vec<(String, String, usize, TableChain)> = Vec::new();
        for ((c, z), ps) in groups {
            let (_, mut b) = merge_into(&mut table, &ps)?;
            if n == 1 {
                for (k, chain) in runs_1d(&mut table, &b)?.into_iter().enumerate() {
                    outputs.push((c.to_string(), z.to_string(), k, chain));
                }
                continue;
            }
            if n == 2 {
                b = refine_lines(&mut table, &b)?;
                let verts = chain_vertices(&table, 1, &b);
                b = conform(&mut table, &b, &verts)?;
            }
            if b.is_empty() {
                continue;
            }
            let cells = if self.options.components {
                self.split_components(&table, &b)?
            } else {
                vec![b]
            };
            for (k, chain) in cells.into_iter().enumerate() {
                outputs.push((c.to_string(), z.to_string(), k, chain));
            }
        }
        let mut kept = Vec::new();
        for o in outputs {
            let vol = if n == 1 {
                o.3.iter()
                    .map(|(&v, &s)| s as f64 * table.point(v)[0])
                    .sum()
            } else {
                let vc = virtual_complex(&table, n, &o.3)?;
                cohen_hickey(&vc)?.volume("X")?
            };
            if vol.abs() >= self.tau_volume {
                kept.push(o);
            }
        }
        if n == 2 {
            let used: BTreeSet<usize> = kept
                .iter()
                .flat_map(|o| chain_vertices(&table, 1, &o.3))
                .collect();
            for o in kept.iter_mut() {
                o.3 = conform(&mut table, &o.3, &used)?;
            }
        }
        assemble(&table, n, kept)
    }

    /// Splits a boundary cycle into connected pieces and groups holes with
    /// the component that encloses them.
    fn split_components(&self, table: &CellTable, b: &TableChain) -> Result<Vec<TableChain>> {
        let n = self.dim;
        let facets: Vec<(usize, i64)> = b.iter().map(|(&i, &v)| (i, v)).collect();
        let verts: Vec<BTreeSet<usize>> = facets
            .iter()
            .map(|(i, _)| table.vertices_of(n - 1, *i))
            .collect();
        let mut parent: Vec<usize> = (0..facets.len()).collect();
        fn find(p: &mut [usize], i: usize) -> usize {
            let mut r = i;
            while p[r] != r {
                r = p[r];
            }
            let mut j = i;
            while p[j] != r {
                let next = p[j];
                p[j] = r;
                j = next;
            }
            r
        }
        let mut owner: BTreeMap<usize, usize> = BTreeMap::new();
        for (i, vs) in verts.iter().enumerate() {
            for &v in vs {
                match owner.get(&v) {
                    Some(&j) => {
                        let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                        parent[ri.max(rj)] = ri.min(rj);
                    }
                    None => {
                        owner.insert(v, i);
                    }
                }
            }
        }
        let mut comps: BTreeMap<usize, TableChain> = BTreeMap::new();
        for (i, &(f, v)) in facets.iter().enumerate() {
            let r = find(&mut parent, i);
            comps.entry(r).or_default().insert(f, v);
        }
        let comps: Vec<TableChain> = comps.into_values().collect();
        if comps.len() == 1 {
            return Ok(comps);
        }
        let decs: Vec<DecompositionMorphism> = comps
            .iter()
            .map(|ch| virtual_complex(table, n, ch).and_then(|vc| cohen_hickey(&vc)))
            .collect::<Result<_>>()?;
        // enclosing[i] = components whose winding is nonzero on component i.
        let mut enclosing: Vec<Vec<usize>> = Vec::with_capacity(comps.len());
        for (i, ch) in comps.iter().enumerate() {
            let mut result = None;
            for p in sample_points(table, n, ch) {
                let mut enc = Vec::new();
                let mut ok = true;
                for (j, d) in decs.iter().enumerate() {
                    if j == i {
                        continue;
                    }
                    match d.winding_number("X", &p, self.eps_boundary) {
                        Ok(0) => {}
                        Ok(_) => enc.push(j),
                        Err(Error::BoundaryPoint) => {
                            ok = false;
                            break;
                        }
                        Err(e) => return Err(e),
                    }
                }
                if ok {
                    result = Some(enc);
                    break;
                }
            }
            enclosing.push(result.ok_or(Error::BoundaryPoint)?);
        }
        let depth: Vec<usize> = enclosing.iter().map(Vec::len).collect();
        let mut cells: BTreeMap<usize, TableChain> = BTreeMap::new();
        for i in 0..comps.len() {
            let owner = if depth[i].is_multiple_of(2) {
                i
            } else {
                *enclosing[i]
                    .iter()
                    .find(|&&j| depth[j] + 1 == depth[i])
                    .unwrap_or(&i)
            };
            let e = cells.entry(owner).or_default();
            for (&f, &v) in &comps[i] {
                e.insert(f, v);
            }
        }
        Ok(cells.into_values().collect())
    }
}

fn cell_windings(mu: &DecompositionMorphism, p: &[f64], eps: f64) -> Result<Vec<i64>> {
    let names: BTreeSet<&str> = mu.top_terms().map(|t| t.0).collect();
    names
        .into_iter()
        .map(|c| mu.winding_number(c, p, eps))
        .collect()
}

/// Vertices, then edge midpoints, of a component: points on it that are
/// off every other component.
fn sample_points(table: &CellTable, n: usize, chain: &TableChain) -> Vec<Vec<f64>> {
    let mut edges = BTreeSet::new();
    let mut cur: BTreeSet<usize> = chain.keys().copied().collect();
    for j in (1..n).rev() {
        if j == 1 {
            edges = cur.clone();
        }
        cur = cur
            .iter()
            .flat_map(|&c| table.boundary(j, c).iter().map(|e| e.0))
            .collect();
    }
    let mut out: Vec<Vec<f64>> = cur.iter().map(|&v| table.point(v).to_vec()).collect();
    for e in edges {
        let b = table.boundary(1, e);
        let (p, q) = (table.point(b[0].0), table.point(b[1].0));
        out.push(p.iter().zip(q).map(|(x, y)| 0.5 * (x + y)).collect());
    }
    out
}

fn chain_vertices(table: &CellTable, k: usize, chain: &TableChain) -> BTreeSet<usize> {
    chain
        .keys()
        .flat_map(|&i| table.vertices_of(k, i))
        .collect()
}

/// A one-cell relational complex `X` bounded by `chain`, with all lower
/// cells taken from the table.
fn virtual_complex(table: &CellTable, n: usize, chain: &TableChain) -> Result<RelationalComplex> {
    let mut by_dim: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); n];
    by_dim[n - 1] = chain.keys().copied().collect();
    for k in (1..n).rev() {
        let below: BTreeSet<usize> = by_dim[k]
            .iter()
            .flat_map(|&c| table.boundary(k, c).iter().map(|e| e.0))
            .collect();
        by_dim[k - 1] = below;
    }
    let name = |k: usize, id: usize| format!("c{k}_{id}");
    let mut b = RelationalComplex::builder(n, n);
    for &v in &by_dim[0] {
        b.vertex(&name(0, v), table.point(v))?;
    }
    for (k, cells) in by_dim.iter().enumerate().take(n).skip(1) {
        for &c in cells {
            b.cell(k, &name(k, c))?;
            for &(f, s) in table.boundary(k, c) {
                b.boundary(k, &name(k, c), &name(k - 1, f), s)?;
            }
        }
    }
    b.cell(n, "X")?;
    for (&f, &s) in chain {
        b.boundary(n, "X", &name(n - 1, f), s)?;
    }
    b.build()
}

/// One-dimensional sweep: the net 0-chain is turned into maximal runs of
/// constant nonzero density, each an output 1-cell.
fn runs_1d(table: &mut CellTable, b: &TableChain) -> Result<Vec<TableChain>> {
    let mut pts: Vec<(f64, usize, i64)> =
        b.iter().map(|(&v, &s)| (table.point(v)[0], v, s)).collect();
    pts.sort_by(|p, q| p.0.total_cmp(&q.0));
    let mut out = Vec::new();
    let mut density = 0i64;
    let mut start: Option<usize> = None;
    for (_, v, s) in pts {
        let next = density - s;
        if let Some(l) = start {
            if density != 0 && next != density {
                out.push(TableChain::from([(l, -density), (v, density)]));
                start = None;
            }
        }
        if next != 0 && (start.is_none() || next != density) {
            start = Some(v);
        }
        density = next;
    }
    Ok(out)
}

fn unit(table: &CellTable, s: usize, t: usize) -> [f64; 2] {
    let (p, q) = (table.point(s), table.point(t));
    let l = dist(p, q);
    [(q[0] - p[0]) / l, (q[1] - p[1]) / l]
}

/// Groups edges of a 2-d boundary chain by carrier line, overlays the
/// intervals on each line and keeps maximal runs of constant net
/// coefficient.
fn refine_lines(table: &mut CellTable, b: &TableChain) -> Result<TableChain> {
    let tau = table.tau();
    let segs: Vec<(usize, usize, i64)> = b
        .iter()
        .map(|(&e, &k)| table.edge_ends(e).map(|(s, t)| (s, t, k)))
        .collect::<Result<_>>()?;
    let on_line = |p: &[f64], a: &[f64], d: &[f64]| {
        let (x, y) = (p[0] - a[0], p[1] - a[1]);
        (x * d[1] - y * d[0]).abs() <= tau
    };
    let mut group: Vec<usize> = (0..segs.len()).collect();
    for i in 0..segs.len() {
        if group[i] != i {
            continue;
        }
        let d = unit(table, segs[i].0, segs[i].1);
        let a = table.point(segs[i].0);
        for j in i + 1..segs.len() {
            if group[j] == j
                && on_line(table.point(segs[j].0), a, &d)
                && on_line(table.point(segs[j].1), a, &d)
            {
                group[j] = i;
            }
        }
    }
    let mut out = TableChain::new();
    for g in 0..segs.len() {
        let members: Vec<&(usize, usize, i64)> = segs
            .iter()
            .enumerate()
            .filter(|(i, _)| group[*i] == g)
            .map(|(_, s)| s)
            .collect();
        if members.is_empty() {
            continue;
        }
        let d = unit(table, members[0].0, members[0].1);
        let o = table.point(members[0].0).to_vec();
        let mut vs: Vec<usize> = members.iter().flat_map(|s| [s.0, s.1]).collect();
        let t: BTreeMap<usize, f64> = vs
            .iter()
            .map(|&v| {
                let p = table.point(v);
                (v, (p[0] - o[0]) * d[0] + (p[1] - o[1]) * d[1])
            })
            .collect();
        vs.sort_by(|p, q| t[p].total_cmp(&t[q]).then(p.cmp(q)));
        vs.dedup();
        let pos: BTreeMap<usize, usize> = vs.iter().enumerate().map(|(i, &v)| (v, i)).collect();
        let mut diff = vec![0i64; vs.len()];
        for &&(s, e, k) in &members {
            let (i, j) = (pos[&s], pos[&e]);
            let (lo, hi, k) = if i < j { (i, j, k) } else { (j, i, -k) };
            diff[lo] = checked_add(diff[lo], k)?;
            diff[hi] = checked_add(diff[hi], -k)?;
        }
        let mut density = 0i64;
        let mut run: Option<(usize, i64)> = None;
        for i in 0..vs.len() {
            let next = checked_add(density, diff[i])?;
            if let Some((l, k)) = run {
                if next != k {
                    if let Some((id, flip)) = table.edge(vs[l], vs[i]) {
                        add_to(&mut out, id, k * flip)?;
                    }
                    run = None;
                }
            }
            if next != 0 && run.is_none() {
                run = Some((i, next));
            }
            density = next;
        }
    }
    Ok(out)
}

/// Splits every edge of `chain` at the vertices of `verts` lying in its
/// interior.
fn conform(
    table: &mut CellTable,
    chain: &TableChain,
    verts: &BTreeSet<usize>,
) -> Result<TableChain> {
    let tau = table.tau();
    let mut out = TableChain::new();
    for (&e, &k) in chain {
        let (s, t) = table.edge_ends(e)?;
        let (p, q) = (table.point(s).to_vec(), table.point(t).to_vec());
        let len = dist(&p, &q);
        let d: Vec<f64> = p.iter().zip(&q).map(|(a, b)| (b - a) / len).collect();
        let mut inner: Vec<(f64, usize)> = verts
            .iter()
            .filter(|&&v| v != s && v != t)
            .filter_map(|&v| {
                let r: Vec<f64> = table.point(v).iter().zip(&p).map(|(x, o)| x - o).collect();
                let along: f64 = r.iter().zip(&d).map(|(x, y)| x * y).sum();
                let off = r
                    .iter()
                    .zip(&d)
                    .map(|(x, y)| (x - along * y).powi(2))
                    .sum::<f64>()
                    .sqrt();
                (off <= tau && along > tau && along < len - tau).then_some((along, v))
            })
            .collect();
        if inner.is_empty() {
            add_to(&mut out, e, k)?;
            continue;
        }
        inner.sort_by(|x, y| x.0.total_cmp(&y.0));
        let mut path = vec![s];
        path.extend(inner.iter().map(|x| x.1));
        path.push(t);
        for w in path.windows(2) {
            if let Some((id, flip)) = table.edge(w[0], w[1]) {
                add_to(&mut out, id, k * flip)?;
            }
        }
    }
    Ok(out)
}

fn prefix(k: usize) -> String {
    match k {
        0 => "v".into(),
        1 => "e".into(),
        2 => "f".into(),
        _ => format!("k{k}_"),
    }
}

fn width(n: usize) -> usize {
    n.saturating_sub(1).to_string().len()
}

fn assemble(
    table: &CellTable,
    n: usize,
    kept: Vec<(String, String, usize, TableChain)>,
) -> Result<OverlayComplex> {
    let mut used: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); n];
    for o in &kept {
        used[n - 1].extend(o.3.keys().copied());
    }
    for k in (1..n).rev() {
        let below: BTreeSet<usize> = used[k]
            .iter()
            .flat_map(|&c| table.boundary(k, c).iter().map(|e| e.0))
            .collect();
        used[k - 1].extend(below);
    }
    let names: Vec<BTreeMap<usize, String>> = used
        .iter()
        .enumerate()
        .map(|(k, ids)| {
            let w = width(ids.len());
            ids.iter()
                .enumerate()
                .map(|(i, &id)| (id, format!("{}{i:0w$}", prefix(k))))
                .collect()
        })
        .collect();
    let mut b = RelationalComplex::builder(n, n);
    for (&v, name) in &names[0] {
        b.vertex(name, table.point(v))?;
    }
    for k in 1..n {
        for (&c, name) in &names[k] {
            b.cell(k, name)?;
            for &(f, s) in table.boundary(k, c) {
                b.boundary(k, name, &names[k - 1][&f], s)?;
            }
        }
    }
    let mut provenance = BTreeMap::new();
    for (c, z, comp, chain) in kept {
        let name = format!("{c}^{z}.{comp}");
        b.cell(n, &name)?;
        for (f, s) in chain {
            b.boundary(n, &name, &names[n - 1][&f], s)?;
        }
        provenance.insert(
            name,
            Provenance {
                c,
                z,
                component: comp,
            },
        );
    }
    Ok(OverlayComplex {
        complex: b.build()?,
        provenance,
    })
}

/// Intersection overlay `C ∩ K` of two n-dimensional complexes in `R^n`.
pub fn overlay_intersection(
    c: &RelationalComplex,
    k: &RelationalComplex,
    options: OverlayOptions,
) -> Result<OverlayComplex> {
    OverlayJob::new(c, k, options)?.recompose()
}
