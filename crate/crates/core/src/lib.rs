//! Persistence diagram bundles over planar bases: exact Z/2 persistence, vineyard
//! update bijections, stratification of the base by simplex order, and the cellular
//! sheaf of pairs with its global sections and monodromy.

pub mod complex;
pub mod error;
pub mod generators;
pub mod io;
pub mod persistence;
pub mod rational;
pub mod sheaf;
pub mod stratify;
pub mod vineyard;

pub use complex::{induced_indexing, FiltrationValues, Simplex, SimplexIndexing, SimplicialComplex};
pub use error::{Error, Result};
pub use persistence::{diagram, persistent_betti, reduce, Pair, PairSet, PersistenceDiagram};
pub use rational::Rational;
pub use vineyard::{composed_bijection, path_vineyard, transposition_update, PairBijection, Vine, Vineyard};
pub use stratify::{build_stratification, BaseMesh, PLFibration, Point, Stratification};
pub use sheaf::{build_sheaf, enumerate_global_sections, loop_monodromy, propagate, CellularSheaf, Propagation, Section};
