//! Adaptive dynamic bitvectors.
//!
//! A weight-balanced B-tree over bit leaves that turns query-hot subtrees
//! into static leaves with constant-time rank/select, and splits them back
//! when updates arrive. On top of it sit fixed-width dynamic arrays and a
//! dynamic wavelet matrix. Naive reference implementations live in
//! [`oracle`].

pub mod array;
pub mod bitvector;
pub mod engine;
pub mod error;
pub mod leaf;
pub mod oracle;
pub mod packed;
pub mod params;
pub mod stats;
pub mod sums;
pub mod wavelet;

pub use array::AdaptiveArray;
pub use bitvector::AdaptiveBitvector;
pub use engine::{Event, Tree, TreeConfig, Violation};
pub use error::{Error, Result};
pub use params::Params;
pub use stats::{LifetimeStats, SpaceReport};
pub use wavelet::AdaptiveWaveletMatrix;
