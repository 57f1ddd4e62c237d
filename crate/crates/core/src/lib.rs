//! Wrapper feature-subset selection by sequential backward and forward
//! generation, with an accumulated-evidence variant that reuses every
//! subset evaluation made along the search to bias later moves.

pub mod dataset;
pub mod error;
pub mod harness;
pub mod inducers;
pub mod mask;
pub mod prefilter;
pub mod relevance;
pub mod search;

pub use dataset::{Dataset, LabelColumn, SplitPlan, SyntheticSpec};
pub use error::{Error, Result};
pub use inducers::{InducerKind, SubsetScorer};
pub use mask::FeatureMask;
pub use relevance::{AccumulationMode, WeightingFn};
pub use search::{Algorithm, Direction, SearchConfig, SelectionResult};
