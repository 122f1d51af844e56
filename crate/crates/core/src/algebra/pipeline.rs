//! JSON pipeline form: an array of operator objects, `base` first.
//!
//! ```json
//! [{"op": "base", "fact": "sales", "axes": [{"dimension": "d_date", "level": "day"}]},
//!  {"op": "rollup", "dimension": "d_date", "level": "month"}]
//! ```

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{base, AlgebraError, Catalog, Predicate, QueryState};
use crate::model::AggregateFn;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AxisRef {
    pub dimension: String,
    pub level: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeasureOverride {
    pub name: String,
    pub aggregate: AggregateFn,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PredicateSpec {
    pub dimension: String,
    pub level: String,
    pub members: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "lowercase", deny_unknown_fields)]
pub enum Op {
    Base {
        fact: String,
        axes: Vec<AxisRef>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        measures: Option<Vec<MeasureOverride>>,
    },
    Slice { dimension: String, level: String, member: String },
    Dice { predicates: Vec<PredicateSpec> },
    Rollup { dimension: String, level: String },
    Drilldown { dimension: String, level: String },
    Rotate { permutation: Vec<usize> },
    Switch { dimension: String, order: Vec<String> },
    Push { dimension: String, level: String, attribute: String },
    Pull { measure: String },
    Cube { axes: Vec<String> },
}

impl Op {
    pub fn name(&self) -> &'static str {
        match self {
            Op::Base { .. } => "base",
            Op::Slice { .. } => "slice",
            Op::Dice { .. } => "dice",
            Op::Rollup { .. } => "rollup",
            Op::Drilldown { .. } => "drilldown",
            Op::Rotate { .. } => "rotate",
            Op::Switch { .. } => "switch",
            Op::Push { .. } => "push",
            Op::Pull { .. } => "pull",
            Op::Cube { .. } => "cube",
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PipelineError {
    #[error("malformed pipeline JSON at byte {offset}: {message}")]
    Malformed { offset: usize, message: String },
    #[error("pipeline is empty")]
    Empty,
    #[error("op {op_index}: pipeline must start with 'base'")]
    ExpectedBase { op_index: usize },
    #[error("op {op_index}: 'base' may only appear first")]
    UnexpectedBase { op_index: usize },
    #[error("op {op_index} ({op}): {source}")]
    Op {
        op_index: usize,
        op: &'static str,
        #[source]
        source: AlgebraError,
    },
}

impl PipelineError {
    pub fn code(&self) -> &'static str {
        match self {
            PipelineError::Malformed { .. } => "malformed_pipeline",
            PipelineError::Empty => "empty_pipeline",
            PipelineError::ExpectedBase { .. } => "expected_base",
            PipelineError::UnexpectedBase { .. } => "unexpected_base",
            PipelineError::Op { source, .. } => source.code(),
        }
    }

    pub fn op_index(&self) -> Option<usize> {
        match self {
            PipelineError::Malformed { .. } | PipelineError::Empty => None,
            PipelineError::ExpectedBase { op_index }
            | PipelineError::UnexpectedBase { op_index }
            | PipelineError::Op { op_index, .. } => Some(*op_index),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Pipeline {
    pub ops: Vec<Op>,
}

fn byte_offset(text: &str, line: usize, column: usize) -> usize {
    let before: usize = text.split_inclusive('\n').take(line.saturating_sub(1)).map(str::len).sum();
    (before + column.saturating_sub(1)).min(text.len())
}

impl Pipeline {
    pub fn parse(text: &str) -> Result<Pipeline, PipelineError> {
        serde_json::from_str(text).map_err(|e| PipelineError::Malformed {
            offset: byte_offset(text, e.line(), e.column()),
            message: e.to_string(),
        })
    }

    pub fn from_value(value: serde_json::Value) -> Result<Pipeline, PipelineError> {
        serde_json::from_value(value).map_err(|e| PipelineError::Malformed { offset: 0, message: e.to_string() })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("pipeline serializes")
    }

    /// Applies every op in order and returns the final state.
    pub fn apply<C: Catalog + ?Sized>(&self, cat: &C) -> Result<QueryState, PipelineError> {
        let (first, rest) = self.ops.split_first().ok_or(PipelineError::Empty)?;
        let wrap = |op_index: usize, op: &Op| {
            let op = op.name();
            move |source| PipelineError::Op { op_index, op, source }
        };
        let Op::Base { fact, axes, measures } = first else {
            return Err(PipelineError::ExpectedBase { op_index: 0 });
        };
        let axes: Vec<(&str, &str)> = axes.iter().map(|a| (a.dimension.as_str(), a.level.as_str())).collect();
        let measures: Option<Vec<(&str, AggregateFn)>> =
            measures.as_ref().map(|ms| ms.iter().map(|m| (m.name.as_str(), m.aggregate)).collect());
        let mut state = base(cat, fact, &axes, measures.as_deref()).map_err(wrap(0, first))?;

        for (i, op) in rest.iter().enumerate() {
            let idx = i + 1;
            state = match op {
                Op::Base { .. } => return Err(PipelineError::UnexpectedBase { op_index: idx }),
                Op::Slice { dimension, level, member } => state.slice(cat, dimension, level, member),
                Op::Dice { predicates } => {
                    let preds: Vec<Predicate> = predicates
                        .iter()
                        .map(|p| Predicate { dimension: p.dimension.clone(), level: p.level.clone(), members: p.members.clone() })
                        .collect();
                    state.dice(cat, &preds)
                }
                Op::Rollup { dimension, level } => state.roll_up(cat, dimension, level),
                Op::Drilldown { dimension, level } => state.drill_down(cat, dimension, level),
                Op::Rotate { permutation } => state.rotate(permutation),
                Op::Switch { dimension, order } => state.switch(dimension, order),
                Op::Push { dimension, level, attribute } => state.push(cat, dimension, level, attribute),
                Op::Pull { measure } => state.pull(measure),
                Op::Cube { axes } => state.cube(axes),
            }
            .map_err(wrap(idx, op))?;
        }
        Ok(state)
    }
}
