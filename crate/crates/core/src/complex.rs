//! Relational complexes: cells keyed by dimension and name, sparse signed
//! boundary matrices, chains, finite topologies and complex morphisms.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use crate::error::{checked_add, checked_mul, Error, Result};

/// A cell of a relational complex, identified by its dimension and a name
/// that is unique within that dimension.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CellId {
    pub dim: usize,
    pub name: String,
}

impl CellId {
    pub fn new(dim: usize, name: impl Into<String>) -> Self {
        Self {
            dim,
            name: name.into(),
        }
    }
}

impl fmt::Display for CellId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.name)
    }
}

pub(crate) fn check_name(name: &str) -> Result<()> {
    if name.is_empty() || name.chars().any(char::is_whitespace) {
        return Err(Error::InvalidName(name.to_string()));
    }
    Ok(())
}

/// Sparse integer combination of cells of one dimension. Zero coefficients
/// are never stored.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Chain {
    dim: usize,
    terms: BTreeMap<CellId, i64>,
}

impl Chain {
    pub fn zero(dim: usize) -> Self {
        Self {
            dim,
            terms: BTreeMap::new(),
        }
    }

    pub fn from_terms<I>(dim: usize, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (CellId, i64)>,
    {
        let mut c = Self::zero(dim);
        for (id, v) in terms {
            c.add_term(id, v)?;
        }
        Ok(c)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn terms(&self) -> &BTreeMap<CellId, i64> {
        &self.terms
    }

    pub fn coefficient(&self, id: &CellId) -> i64 {
        self.terms.get(id).copied().unwrap_or(0)
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

    pub fn add_term(&mut self, id: CellId, value: i64) -> Result<()> {
        if id.dim != self.dim {
            return Err(Error::DimensionMismatch {
                context: "chain term",
                expected: self.dim,
                found: id.dim,
            });
        }
        if value == 0 {
            return Ok(());
        }
        let cur = self.terms.get(&id).copied().unwrap_or(0);
        let next = checked_add(cur, value)?;
        if next == 0 {
            self.terms.remove(&id);
        } else {
            self.terms.insert(id, next);
        }
        Ok(())
    }

    pub fn add(&self, other: &Chain) -> Result<Chain> {
        let mut out = self.clone();
        for (id, &v) in &other.terms {
            out.add_term(id.clone(), v)?;
        }
        Ok(out)
    }

    pub fn scale(&self, k: i64) -> Result<Chain> {
        let mut out = Chain::zero(self.dim);
        for (id, &v) in &self.terms {
            out.add_term(id.clone(), checked_mul(v, k)?)?;
        }
        Ok(out)
    }
}

/// Sparse signed matrix between the cells of two dimensions, the table
/// `M(cell, boundary, sigma)` restricted to one pair of dimensions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SparseIncidenceMatrix {
    row_dim: usize,
    col_dim: usize,
    entries: BTreeMap<(CellId, CellId), i64>,
}

impl SparseIncidenceMatrix {
    pub fn new(row_dim: usize, col_dim: usize) -> Self {
        Self {
            row_dim,
            col_dim,
            entries: BTreeMap::new(),
        }
    }

    pub fn row_dim(&self) -> usize {
        self.row_dim
    }

    pub fn col_dim(&self) -> usize {
        self.col_dim
    }

    /// Adds `value` to entry `(row, col)`; entries summing to zero are removed.
    pub fn add(&mut self, row: CellId, col: CellId, value: i64) -> Result<()> {
        if row.dim != self.row_dim || col.dim != self.col_dim {
            return Err(Error::DimensionMismatch {
                context: "matrix entry",
                expected: self.row_dim,
                found: row.dim,
            });
        }
        if value == 0 {
            return Ok(());
        }
        let key = (row, col);
        let cur = self.entries.get(&key).copied().unwrap_or(0);
        let next = checked_add(cur, value)?;
        if next == 0 {
            self.entries.remove(&key);
        } else {
            self.entries.insert(key, next);
        }
        Ok(())
    }

    pub fn get(&self, row: &CellId, col: &CellId) -> i64 {
        self.entries
            .get(&(row.clone(), col.clone()))
            .copied()
            .unwrap_or(0)
    }

    pub fn entries(&self) -> &BTreeMap<(CellId, CellId), i64> {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Entries of one row, in column order.
    pub fn row<'a>(&'a self, row: &CellId) -> impl Iterator<Item = (&'a CellId, i64)> + 'a {
        let lo = (row.clone(), CellId::new(0, String::new()));
        let r = row.clone();
        self.entries
            .range(lo..)
            .take_while(move |((x, _), _)| *x == r)
            .map(|((_, y), v)| (y, *v))
    }

    /// `self - other`, both padded with zeros.
    pub fn difference(&self, other: &Self) -> Result<Self> {
        let mut out = self.clone();
        for ((r, c), &v) in &other.entries {
            out.add(
                r.clone(),
                c.clone(),
                v.checked_neg().ok_or(Error::Overflow)?,
            )?;
        }
        Ok(out)
    }
}

/// Sparse matrix product: entry `(x, z) = sum_y m1(x, y) * m2(y, z)`.
pub fn multiply(
    m1: &SparseIncidenceMatrix,
    m2: &SparseIncidenceMatrix,
) -> Result<SparseIncidenceMatrix> {
    if m1.col_dim != m2.row_dim {
        return Err(Error::DimensionMismatch {
            context: "matrix product",
            expected: m1.col_dim,
            found: m2.row_dim,
        });
    }
    let mut out = SparseIncidenceMatrix::new(m1.row_dim, m2.col_dim);
    for ((x, y), &a) in &m1.entries {
        for (z, b) in m2.row(y) {
            out.add(x.clone(), z.clone(), checked_mul(a, b)?)?;
        }
    }
    Ok(out)
}

/// Cells `X_n..X_0`, boundary matrices `D_n..D_1` and vertex coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct RelationalComplex {
    dim: usize,
    embedding_dim: usize,
    cells: Vec<BTreeSet<String>>,
    boundaries: Vec<SparseIncidenceMatrix>,
    coords: BTreeMap<String, Vec<f64>>,
}

impl RelationalComplex {
    pub fn builder(dim: usize, embedding_dim: usize) -> ComplexBuilder {
        ComplexBuilder::new(dim, embedding_dim)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn embedding_dim(&self) -> usize {
        self.embedding_dim
    }

    /// Names of the cells of dimension `k` (empty above the complex dimension).
    pub fn cells(&self, k: usize) -> impl Iterator<Item = CellId> + '_ {
        self.cells
            .get(k)
            .into_iter()
            .flat_map(move |s| s.iter().map(move |n| CellId::new(k, n.clone())))
    }

    pub fn cell_names(&self, k: usize) -> Option<&BTreeSet<String>> {
        self.cells.get(k)
    }

    pub fn contains(&self, id: &CellId) -> bool {
        self.cells.get(id.dim).is_some_and(|s| s.contains(&id.name))
    }

    pub fn cell_count(&self) -> usize {
        self.cells.iter().map(BTreeSet::len).sum()
    }

    /// The boundary matrix `D_k` for `1 <= k <= dim`.
    pub fn boundary_matrix(&self, k: usize) -> Option<&SparseIncidenceMatrix> {
        if k == 0 {
            None
        } else {
            self.boundaries.get(k - 1)
        }
    }

    pub fn coords(&self, vertex: &str) -> Option<&[f64]> {
        self.coords.get(vertex).map(Vec::as_slice)
    }

    pub fn all_coords(&self) -> &BTreeMap<String, Vec<f64>> {
        &self.coords
    }

    /// `∂(cell)` as a chain (zero for vertices).
    pub fn boundary_of(&self, id: &CellId) -> Chain {
        let mut c = Chain::zero(id.dim.saturating_sub(1));
        if let Some(m) = self.boundary_matrix(id.dim) {
            for (y, v) in m.row(id) {
                c.terms.insert(y.clone(), v);
            }
        }
        c
    }

    /// All 0-cells in the closure of `id`.
    pub fn incident_vertices(&self, id: &CellId) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        let mut frontier = vec![id.clone()];
        let mut seen = BTreeSet::new();
        while let Some(c) = frontier.pop() {
            if !seen.insert(c.clone()) {
                continue;
            }
            if c.dim == 0 {
                out.insert(c.name.clone());
                continue;
            }
            for y in self.boundary_of(&c).terms().keys() {
                frontier.push(y.clone());
            }
        }
        out
    }

    /// The finite topology of the complex: boundary incidences pointing from
    /// a cell to the cells of its boundary.
    pub fn topology(&self) -> TopologicalDataType<CellId> {
        let points = (0..=self.dim).flat_map(|k| self.cells(k)).collect();
        let incidence = self
            .boundaries
            .iter()
            .flat_map(|m| m.entries.keys().cloned())
            .collect();
        TopologicalDataType { points, incidence }
    }

    /// Axis-aligned bounding box of the vertex coordinates.
    pub fn bounding_box(&self) -> Option<(Vec<f64>, Vec<f64>)> {
        bounding_box(self.coords.values().map(Vec::as_slice))
    }
}

pub(crate) fn bounding_box<'a, I: IntoIterator<Item = &'a [f64]>>(
    pts: I,
) -> Option<(Vec<f64>, Vec<f64>)> {
    let mut it = pts.into_iter();
    let first = it.next()?;
    let (mut lo, mut hi) = (first.to_vec(), first.to_vec());
    for p in it {
        for (i, &x) in p.iter().enumerate() {
            lo[i] = lo[i].min(x);
            hi[i] = hi[i].max(x);
        }
    }
    Some((lo, hi))
}

pub(crate) fn diagonal(bbox: &Option<(Vec<f64>, Vec<f64>)>) -> f64 {
    match bbox {
        Some((lo, hi)) => lo
            .iter()
            .zip(hi)
            .map(|(a, b)| (b - a) * (b - a))
            .sum::<f64>()
            .sqrt(),
        None => 0.0,
    }
}

/// Incremental construction of a [`RelationalComplex`]. Structural errors
/// (names, references, zero signs) are rejected here; the algebraic chain
/// condition is left to [`validate_complex`].
#[derive(Debug, Clone)]
pub struct ComplexBuilder {
    complex: RelationalComplex,
}

impl ComplexBuilder {
    pub fn new(dim: usize, embedding_dim: usize) -> Self {
        Self {
            complex: RelationalComplex {
                dim,
                embedding_dim,
                cells: vec![BTreeSet::new(); dim + 1],
                boundaries: (1..=dim)
                    .map(|k| SparseIncidenceMatrix::new(k, k - 1))
                    .collect(),
                coords: BTreeMap::new(),
            },
        }
    }

    pub fn has_cell(&self, dim: usize, name: &str) -> bool {
        self.complex.contains(&CellId::new(dim, name))
    }

    pub fn vertex(&mut self, name: &str, coords: &[f64]) -> Result<&mut Self> {
        if coords.len() != self.complex.embedding_dim {
            return Err(Error::DimensionMismatch {
                context: "vertex coordinates",
                expected: self.complex.embedding_dim,
                found: coords.len(),
            });
        }
        self.insert_cell(0, name)?;
        self.complex
            .coords
            .insert(name.to_string(), coords.to_vec());
        Ok(self)
    }

    /// Declares a 0-cell without coordinates (for purely combinatorial use).
    pub fn bare_vertex(&mut self, name: &str) -> Result<&mut Self> {
        self.insert_cell(0, name)?;
        Ok(self)
    }

    pub fn cell(&mut self, dim: usize, name: &str) -> Result<&mut Self> {
        if dim == 0 {
            return Err(Error::Precondition("use vertex() for 0-cells".into()));
        }
        self.insert_cell(dim, name)?;
        Ok(self)
    }

    fn insert_cell(&mut self, dim: usize, name: &str) -> Result<()> {
        check_name(name)?;
        if dim > self.complex.dim {
            return Err(Error::DimensionMismatch {
                context: "cell dimension",
                expected: self.complex.dim,
                found: dim,
            });
        }
        if !self.complex.cells[dim].insert(name.to_string()) {
            return Err(Error::DuplicateCell {
                dim,
                name: name.to_string(),
            });
        }
        Ok(())
    }

    /// Sets `D_dim(cell, boundary) = sigma`.
    pub fn boundary(
        &mut self,
        dim: usize,
        cell: &str,
        boundary: &str,
        sigma: i64,
    ) -> Result<&mut Self> {
        if dim == 0 || dim > self.complex.dim {
            return Err(Error::DimensionMismatch {
                context: "boundary entry",
                expected: self.complex.dim,
                found: dim,
            });
        }
        let row = CellId::new(dim, cell);
        let col = CellId::new(dim - 1, boundary);
        for id in [&row, &col] {
            if !self.complex.contains(id) {
                return Err(Error::UnknownCell {
                    dim: id.dim,
                    name: id.name.clone(),
                });
            }
        }
        if sigma == 0 {
            return Err(Error::ZeroEntry {
                row: cell.into(),
                col: boundary.into(),
            });
        }
        let m = &mut self.complex.boundaries[dim - 1];
        if m.get(&row, &col) != 0 {
            return Err(Error::Precondition(format!(
                "duplicate boundary entry ({cell}, {boundary})"
            )));
        }
        m.add(row, col, sigma)?;
        Ok(self)
    }

    pub fn build(self) -> Result<RelationalComplex> {
        if self.complex.embedding_dim < self.complex.dim {
            return Err(Error::Precondition(format!(
                "embedding dimension {} is below complex dimension {}",
                self.complex.embedding_dim, self.complex.dim
            )));
        }
        Ok(self.complex)
    }
}

/// One defect found by [`validate_complex`] or [`validate_morphism`].
#[derive(Debug, Clone, PartialEq)]
pub enum Issue {
    /// Nonzero entry of `D_dim · D_{dim-1}`.
    NonZeroProduct {
        dim: usize,
        row: CellId,
        col: CellId,
        value: i64,
    },
    /// An edge without exactly two boundary vertices of opposite sign.
    MalformedEdge {
        edge: String,
        detail: String,
    },
    MissingCoordinates {
        vertex: String,
    },
    /// Nonzero entry of `D_dim · F_{dim-1} - F_dim · B_dim`.
    MorphismResidue {
        dim: usize,
        row: CellId,
        col: CellId,
        value: i64,
    },
}

impl fmt::Display for Issue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Issue::NonZeroProduct {
                dim,
                row,
                col,
                value,
            } => {
                write!(
                    f,
                    "D{}*D{} has entry ({row}, {col}) = {value}",
                    dim,
                    dim - 1
                )
            }
            Issue::MalformedEdge { edge, detail } => write!(f, "edge {edge}: {detail}"),
            Issue::MissingCoordinates { vertex } => write!(f, "vertex {vertex} has no coordinates"),
            Issue::MorphismResidue {
                dim,
                row,
                col,
                value,
            } => {
                write!(
                    f,
                    "morphism residue in dimension {dim} at ({row}, {col}) = {value}"
                )
            }
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ValidationReport {
    pub issues: Vec<Issue>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.issues.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.issues.is_empty() {
            return write!(f, "valid");
        }
        for (i, issue) in self.issues.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{issue}")?;
        }
        Ok(())
    }
}

/// Checks the chain condition, edge shape and vertex coordinates.
pub fn validate_complex(c: &RelationalComplex) -> ValidationReport {
    let mut issues = Vec::new();
    for k in 2..=c.dim {
        let lhs = c.boundary_matrix(k).expect("boundary matrix");
        let rhs = c.boundary_matrix(k - 1).expect("boundary matrix");
        match multiply(lhs, rhs) {
            Ok(p) => issues.extend(p.entries.into_iter().map(|((row, col), value)| {
                Issue::NonZeroProduct {
                    dim: k,
                    row,
                    col,
                    value,
                }
            })),
            Err(e) => issues.push(Issue::NonZeroProduct {
                dim: k,
                row: CellId::new(k, "?"),
                col: CellId::new(k - 2, format!("{e}")),
                value: 0,
            }),
        }
    }
    if c.dim >= 1 {
        for e in c.cells(1) {
            let b = c.boundary_of(&e);
            let vals: Vec<i64> = b.terms().values().copied().collect();
            let ok = vals.len() == 2 && vals[0] == -vals[1];
            if !ok {
                issues.push(Issue::MalformedEdge {
                    edge: e.name.clone(),
                    detail: format!(
                        "boundary {:?}",
                        b.terms()
                            .iter()
                            .map(|(k, v)| (k.name.as_str(), *v))
                            .collect::<Vec<_>>()
                    ),
                });
            }
        }
    }
    for v in c.cells(0) {
        if !c.coords.contains_key(&v.name) {
            issues.push(Issue::MissingCoordinates { vertex: v.name });
        }
    }
    ValidationReport { issues }
}

/// Linear extension of the boundary matrix rows.
pub fn chain_boundary(c: &RelationalComplex, x: &Chain) -> Result<Chain> {
    if x.dim == 0 {
        return Err(Error::Precondition("boundary of a 0-chain".into()));
    }
    let mut out = Chain::zero(x.dim - 1);
    let Some(m) = c.boundary_matrix(x.dim) else {
        return Ok(out);
    };
    for (id, &a) in x.terms() {
        if !c.contains(id) {
            return Err(Error::UnknownCell {
                dim: id.dim,
                name: id.name.clone(),
            });
        }
        for (y, s) in m.row(id) {
            out.add_term(y.clone(), checked_mul(a, s)?)?;
        }
    }
    Ok(out)
}

/// A finite set with an incidence relation, i.e. a finite (Alexandrov) topology.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TopologicalDataType<T: Ord + Clone> {
    points: BTreeSet<T>,
    incidence: BTreeSet<(T, T)>,
}

impl<T: Ord + Clone> TopologicalDataType<T> {
    pub fn new(points: BTreeSet<T>, incidence: BTreeSet<(T, T)>) -> Result<Self> {
        if incidence
            .iter()
            .any(|(a, b)| !points.contains(a) || !points.contains(b))
        {
            return Err(Error::Precondition(
                "incidence pair references a point outside the set".into(),
            ));
        }
        Ok(Self { points, incidence })
    }

    pub fn points(&self) -> &BTreeSet<T> {
        &self.points
    }

    pub fn incidence(&self) -> &BTreeSet<(T, T)> {
        &self.incidence
    }

    /// Reflexive-transitive closure of the incidence relation.
    pub fn closure(&self) -> BTreeSet<(T, T)> {
        let mut succ: BTreeMap<&T, Vec<&T>> = BTreeMap::new();
        for (a, b) in &self.incidence {
            succ.entry(a).or_default().push(b);
        }
        let mut out = BTreeSet::new();
        for start in &self.points {
            let mut seen: BTreeSet<&T> = BTreeSet::new();
            let mut queue = VecDeque::from([start]);
            while let Some(x) = queue.pop_front() {
                if !seen.insert(x) {
                    continue;
                }
                out.insert((start.clone(), x.clone()));
                if let Some(next) = succ.get(x) {
                    queue.extend(next.iter().copied());
                }
            }
        }
        out
    }

    /// The closure as a topological data type on the same points.
    pub fn closed(&self) -> Self {
        Self {
            points: self.points.clone(),
            incidence: self.closure(),
        }
    }

    /// `A` is open iff every point incident to a member of `A` lies in `A`.
    pub fn is_open(&self, a: &BTreeSet<T>) -> Result<bool> {
        if !a.is_subset(&self.points) {
            return Err(Error::Precondition(
                "set is not a subset of the points".into(),
            ));
        }
        Ok(self
            .incidence
            .iter()
            .all(|(x, y)| !a.contains(y) || a.contains(x)))
    }
}

/// `f` is continuous iff every incidence pair maps into the closure of the
/// target relation.
pub fn is_continuous<T, U>(
    f: &BTreeMap<T, U>,
    source: &TopologicalDataType<T>,
    target: &TopologicalDataType<U>,
) -> Result<bool>
where
    T: Ord + Clone,
    U: Ord + Clone,
{
    for p in &source.points {
        match f.get(p) {
            Some(img) if target.points.contains(img) => {}
            Some(_) => return Err(Error::Precondition("image outside the target".into())),
            None => return Err(Error::Precondition("map is not total on the source".into())),
        }
    }
    let star = target.closure();
    Ok(source
        .incidence
        .iter()
        .all(|(a, b)| star.contains(&(f[a].clone(), f[b].clone()))))
}

/// Per-dimension maps `F_0..F_n` between two complexes of equal dimension.
#[derive(Debug, Clone)]
pub struct ComplexMorphism<'a> {
    source: &'a RelationalComplex,
    target: &'a RelationalComplex,
    maps: Vec<SparseIncidenceMatrix>,
}

impl<'a> ComplexMorphism<'a> {
    pub fn new(
        source: &'a RelationalComplex,
        target: &'a RelationalComplex,
        maps: Vec<SparseIncidenceMatrix>,
    ) -> Result<Self> {
        if source.dim != target.dim {
            return Err(Error::DimensionMismatch {
                context: "morphism",
                expected: source.dim,
                found: target.dim,
            });
        }
        if maps.len() != source.dim + 1 {
            return Err(Error::DimensionMismatch {
                context: "morphism maps",
                expected: source.dim + 1,
                found: maps.len(),
            });
        }
        for (k, m) in maps.iter().enumerate() {
            if m.row_dim != k || m.col_dim != k {
                return Err(Error::DimensionMismatch {
                    context: "morphism map",
                    expected: k,
                    found: m.row_dim,
                });
            }
        }
        Ok(Self {
            source,
            target,
            maps,
        })
    }

    /// The identity morphism of a complex.
    pub fn identity(c: &'a RelationalComplex) -> Self {
        let maps = (0..=c.dim)
            .map(|k| {
                let mut m = SparseIncidenceMatrix::new(k, k);
                for id in c.cells(k) {
                    m.add(id.clone(), id, 1).expect("identity entry");
                }
                m
            })
            .collect();
        Self {
            source: c,
            target: c,
            maps,
        }
    }

    pub fn source(&self) -> &RelationalComplex {
        self.source
    }

    pub fn target(&self) -> &RelationalComplex {
        self.target
    }

    pub fn map(&self, k: usize) -> &SparseIncidenceMatrix {
        &self.maps[k]
    }
}

/// Lists every nonzero entry of `D_i · F_{i-1} - F_i · B_i`.
pub fn validate_morphism(m: &ComplexMorphism<'_>) -> Result<ValidationReport> {
    let mut issues = Vec::new();
    for k in 1..=m.source.dim {
        let d = m.source.boundary_matrix(k).expect("source boundary");
        let b = m.target.boundary_matrix(k).expect("target boundary");
        let lhs = multiply(d, &m.maps[k - 1])?;
        let rhs = multiply(&m.maps[k], b)?;
        let res = lhs.difference(&rhs)?;
        issues.extend(
            res.entries
                .into_iter()
                .map(|((row, col), value)| Issue::MorphismResidue {
                    dim: k,
                    row,
                    col,
                    value,
                }),
        );
    }
    Ok(ValidationReport { issues })
}
