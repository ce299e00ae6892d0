//! Parallel local graph clustering.
//!
//! Four seed-based diffusions (Nibble, PR-Nibble, deterministic and
//! randomized heat-kernel PageRank) produce a sparse mass vector, which a
//! sweep cut rounds into a low-conductance cluster. Every kernel has a
//! sequential reference mode and a frontier-based parallel mode whose work
//! is proportional to the vertices and edges it touches, never to the size
//! of the graph.
//!
//! ```
//! use lgc::{diffusion, sweep, Algorithm, DiffusionParams, Execution, Graph};
//!
//! let g = Graph::from_edges(&[(0, 1), (1, 2), (0, 2), (2, 3)], true);
//! let params = DiffusionParams {
//!     algorithm: Algorithm::PrNibbleOptimized,
//!     seed: 0,
//!     alpha: 0.1,
//!     epsilon: 1e-4,
//!     ..DiffusionParams::default()
//! };
//! let result = diffusion::run(&g, &params, Execution::Parallel).unwrap();
//! let profile = sweep::sweep_parallel(&g, &result.p).unwrap();
//! assert!(!profile.best_set().is_empty());
//! ```

pub mod diffusion;
mod error;
pub mod frontier;
pub mod generators;
pub mod graph;
pub mod ncp;
pub mod primitives;
pub mod sparse;
pub mod sweep;

pub use diffusion::{Algorithm, DiffusionParams, DiffusionResult};
pub use error::{Error, Result};
pub use frontier::{Execution, Frontier};
pub use graph::{Graph, VertexId};
pub use sparse::SparseVec;
pub use sweep::SweepProfile;
