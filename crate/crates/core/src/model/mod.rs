//! Exact model representation: feature spaces, boxes, trees, ensembles and
//! additive models, with reference evaluation and interval bounds.

pub mod additive;
pub mod binary32;
pub mod decimal;
pub mod space;
pub mod tree;

pub use additive::{AdditiveModel, PairwiseTerm, UnivariateTerm};
pub use binary32::Binary32;
pub use space::{Feature, FeatureSpace, InputBox, Interval, KeyRange, Point};
pub use tree::{predicted_class, Class, Ensemble, LogitModel, TreeNode};
