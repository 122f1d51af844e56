//! OLAP operators over a lazily built [`QueryState`].
//!
//! Operators (`slice`, `dice`, `roll_up`, `drill_down`, `rotate`, `switch`,
//! `push`, `pull`, `cube`) only rewrite the state; they consult the schema and
//! the dimension member tables but never fact data. [`evaluate`] lowers a
//! state to a select/group/aggregate plan over the fact document and runs it.

mod eval;
mod pipeline;
mod state;
mod view;

use thiserror::Error;

use crate::model::WarehouseSchema;
use crate::store::{DimensionTable, WarehouseInstance};
use crate::tax::TaxError;

pub use eval::{evaluate, lower, Grouping, KeySpec, Plan};
pub use pipeline::{AxisRef, MeasureOverride, Op, Pipeline, PipelineError, PredicateSpec};
pub use state::{base, Axis, AxisSource, MeasureSelection, MeasureSource, Predicate, QueryState, PULLED_PREFIX};
pub use view::{Cell, CubeView, ViewAxis, ViewMeasure, ALL};

/// Read access to what operators may inspect: the schema and member tables.
pub trait Catalog {
    fn schema(&self) -> &WarehouseSchema;
    fn table(&self, dimension: &str) -> Option<&DimensionTable>;
}

impl<T> Catalog for WarehouseInstance<T> {
    fn schema(&self) -> &WarehouseSchema {
        &self.schema
    }

    fn table(&self, dimension: &str) -> Option<&DimensionTable> {
        self.dimension(dimension)
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AlgebraError {
    #[error("unknown fact class '{0}'")]
    UnknownFactClass(String),
    #[error("dimension '{0}' is not linked by the fact class")]
    UnknownDimension(String),
    #[error("unknown level '{level}' in dimension '{dimension}'")]
    UnknownLevel { dimension: String, level: String },
    #[error("no member '{member}' at level '{level}' of dimension '{dimension}'")]
    UnknownMember { dimension: String, level: String, member: String },
    #[error("level '{level}' has no attribute '{attribute}'")]
    UnknownAttribute { level: String, attribute: String },
    #[error("no measure '{0}' in the query")]
    UnknownMeasure(String),
    #[error("measure '{0}' already exists")]
    DuplicateMeasure(String),
    #[error("a query needs at least one measure")]
    NoMeasures,
    #[error("axis '{0}' appears twice")]
    DuplicateAxis(String),
    #[error("'{0}' is not a dimension axis of the query")]
    NotAnAxis(String),
    #[error("level '{to}' is not coarser than '{from}'")]
    NotCoarser { from: String, to: String },
    #[error("level '{to}' is not finer than '{from}'")]
    NotFiner { from: String, to: String },
    #[error("{0:?} is not a permutation of the axis positions")]
    InvalidPermutation(Vec<usize>),
    #[error("new member order is not a permutation of the current one: {0}")]
    NotAPermutation(String),
    #[error("empty member set for dimension '{0}'")]
    EmptyMemberSet(String),
    #[error("cube needs at least one axis")]
    EmptySubset,
    #[error("attribute '{0}' is not numeric")]
    NonNumericAttribute(String),
    #[error("integrity error: {0}")]
    Integrity(String),
    #[error(transparent)]
    Tax(#[from] TaxError),
}

impl AlgebraError {
    /// Stable machine-readable code.
    pub fn code(&self) -> &'static str {
        match self {
            AlgebraError::UnknownFactClass(_) => "unknown_fact_class",
            AlgebraError::UnknownDimension(_) => "unknown_dimension",
            AlgebraError::UnknownLevel { .. } => "unknown_level",
            AlgebraError::UnknownMember { .. } => "unknown_member",
            AlgebraError::UnknownAttribute { .. } => "unknown_attribute",
            AlgebraError::UnknownMeasure(_) => "unknown_measure",
            AlgebraError::DuplicateMeasure(_) => "duplicate_measure",
            AlgebraError::NoMeasures => "no_measures",
            AlgebraError::DuplicateAxis(_) => "duplicate_axis",
            AlgebraError::NotAnAxis(_) => "not_an_axis",
            AlgebraError::NotCoarser { .. } => "not_coarser",
            AlgebraError::NotFiner { .. } => "not_finer",
            AlgebraError::InvalidPermutation(_) => "invalid_permutation",
            AlgebraError::NotAPermutation(_) => "not_a_permutation",
            AlgebraError::EmptyMemberSet(_) => "empty_member_set",
            AlgebraError::EmptySubset => "empty_subset",
            AlgebraError::NonNumericAttribute(_) => "non_numeric_attribute",
            AlgebraError::Integrity(_) => "integrity",
            AlgebraError::Tax(_) => "evaluation",
        }
    }
}
