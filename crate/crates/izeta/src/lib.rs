//! Spectral toolkit for Ihara zeta functions of large sparse random graphs.
//!
//! The crate has three layers. Exact small-graph machinery (`ihara`) counts
//! non-backtracking cycles and evaluates the zeta function through its
//! determinant form. Ensemble machinery (`graph`, `ensemble`, `linalg`) samples
//! Bernoulli random graphs, builds the rescaled edge-plus-adjacency matrix, and
//! measures its spectrum reproducibly. Closed-form machinery (`limits`) carries
//! the infinite-volume answers those measurements converge to: Catalan moment
//! formulas, the shifted semicircle law, its Stieltjes transform, and the
//! log-determinant integral.

pub mod ensemble;
pub mod error;
pub mod graph;
pub mod ihara;
pub mod limits;
pub mod linalg;

pub use error::{Error, Result};
