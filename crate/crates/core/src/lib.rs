//! Finite algebraic measure trees.

pub mod dist;
pub mod error;
pub mod io;
pub mod measure;
pub mod random;
pub mod rng;
pub mod sample;
pub mod shapes;
pub mod stats;
pub mod tree;
pub mod triangulation;

pub use error::{Error, Result};
pub use tree::{AlgebraicTree, CanonicalForm, Vertex};
pub use measure::{MeasureTree, Q};
