//! Relational cell complexes: validation, signed simplicial decomposition,
//! simplex intersection by active sets, and overlay of two complexes.

pub mod complex;
pub mod decomposition;
pub mod error;
pub mod fixtures;
pub mod intersect;
pub mod io;
pub mod linalg;
pub mod overlay;

pub use complex::{
    chain_boundary, validate_complex, validate_morphism, CellId, Chain, ComplexBuilder,
    ComplexMorphism, Issue, RelationalComplex, SparseIncidenceMatrix, TopologicalDataType,
    ValidationReport,
};
pub use decomposition::{
    apex_triangulate, cohen_hickey, cohen_hickey_with_labels, DecompositionMorphism, Label, Method,
    Simplex, SimplicialChain,
};
pub use error::{Error, Result};
