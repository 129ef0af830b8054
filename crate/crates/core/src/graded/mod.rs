//! Scalars, sparse linear algebra, chain complexes and BCH groups.

pub mod complex;
pub mod group;
pub mod linalg;
pub mod scalar;

pub use complex::{homology, induced_map, ChainComplex, DegreeWindow, Homology};
pub use group::{bch_group_mul, bch_series, BCHGroupElement, LieOps, NilpotentLie};
pub use linalg::{kernel, rref, solve, Echelon, SVec, SparseMatrix};
pub use scalar::{q, qf, Q};
