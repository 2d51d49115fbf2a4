//! Permutons, graphons and finitely forcible limit objects.
//!
//! Exact and Monte Carlo substructure densities, density-expression
//! constructions, verification of forcing constraint systems and
//! Newton-based construction of non-forcibility witnesses.

pub mod clique;
pub mod error;
pub mod estimate;
pub mod forcing;
pub mod graph;
pub mod graphon;
pub mod heatmap;
pub mod mc;
pub mod param;
pub mod perm;
pub mod permuton;
pub mod witness;

pub use error::{Error, Result};
pub use estimate::{Estimate, Moments};
pub use graph::Graph;
pub use graphon::{BlockSizes, Graphon};
pub use param::{Alpha, Probability};
pub use perm::{Permutation, RootedPermutation};
pub use permuton::Permuton;
