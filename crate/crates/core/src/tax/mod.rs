//! Tree algebra over XML documents.
//!
//! Implements the subset of the TAX operators the OLAP layer lowers to:
//! pattern matching into witness trees, selection, projection, grouping and
//! aggregation. Trees are immutable; operators borrow them through
//! [`Fragment`] views and never copy unless a new tree is the result
//! (projection, [`Fragment::to_tree`]).

mod ops;
mod pattern;
mod tree;

use thiserror::Error;

pub use ops::{aggregate, group_forest, projection, selection, selection_where, Group, GroupedForest};
pub use pattern::{match_pattern, Cmp, Edge, PatternNode, PatternTree, ValuePredicate, ValueTarget, WitnessTree};
pub use tree::{DataTree, Fragment, NodeId, NodeKind};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TaxError {
    #[error("invalid pattern: {0}")]
    InvalidPattern(String),
    #[error("grouping key undefined for tree {index}")]
    KeyError { index: usize },
    #[error("measure undefined for a member of group {group}")]
    ExtractError { group: usize },
    #[error("{function} over empty group {group}")]
    EmptyGroupError { group: usize, function: &'static str },
}
