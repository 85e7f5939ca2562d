//! Entanglement measures for multipartite quantum states in arbitrary
//! finite dimensions.
//!
//! The crate provides:
//!
//! - dense pure-state and density-matrix types with tensor-index
//!   bookkeeping (partial trace, party permutations, bipartite grouping)
//!   and seeded random-state generation ([`state`]);
//! - the antisymmetric SO(N) generator family and its tensor products
//!   ([`generators`]);
//! - bipartite concurrence: the exact pure-state measure, the
//!   singular-value lower bound for mixed states, Wootters' two-qubit
//!   concurrence as an independent oracle, and a convex-roof sampling
//!   oracle ([`concurrence`]);
//! - residual entanglement (n-way tangle): per-focus monogamy slacks and
//!   their minimum over all foci, plus the three-qubit epsilon-contraction
//!   tangle for cross-validation ([`tangle`]).
//!
//! ```
//! use qtangle::optimize::OptimizerConfig;
//! use qtangle::state::{PureState, State};
//! use qtangle::tangle::residual_entanglement;
//!
//! let ghz = State::Pure(PureState::ghz(3));
//! let report = residual_entanglement(&ghz, &OptimizerConfig::default()).unwrap();
//! assert!((report.residual - 1.0).abs() < 1e-7);
//! ```

pub mod concurrence;
pub mod error;
pub mod generators;
pub mod optimize;
pub mod state;
pub mod tangle;

pub use error::{Error, Result};
pub use state::{Bipartition, DensityMatrix, PureState, State};
