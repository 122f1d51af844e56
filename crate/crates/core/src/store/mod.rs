//! Loaded warehouse data.
//!
//! A [`WarehouseInstance`] is built once from the three document kinds and
//! never mutated afterwards. It keeps both the decoded member tables and fact
//! records and the parsed document trees the algebra evaluates over.

mod dimension;
mod facts;
mod files;
mod integrity;

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::path::PathBuf;

use chrono::NaiveDate;
use rust_decimal::Decimal;
use serde::Serialize;
use thiserror::Error;

use crate::diagnostic::{self, Diagnostic};
use crate::model::{SchemaError, WarehouseSchema};
use crate::number::MeasureValue;
use crate::tax::DataTree;

pub use dimension::load_dimension;
pub use facts::load_facts;
pub use files::WarehouseFiles;
pub use integrity::{check_integrity, validate_warehouse};

/// Coordinate of a fact whose dimension reference is missing.
pub const UNKNOWN: &str = "__unknown__";
/// Coordinate of a member with no ancestor at the requested level.
pub const UNASSIGNED: &str = "__unassigned__";

pub fn is_sentinel(id: &str) -> bool {
    id == UNKNOWN || id == UNASSIGNED
}

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("malformed XML in {document}: {message}")]
    MalformedXml { document: String, message: String },
    #[error(transparent)]
    Schema(#[from] SchemaError),
    #[error("integrity error:\n{}", diagnostic::join(.0))]
    Integrity(Vec<Diagnostic>),
    #[error("cannot read {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("unknown level '{level}' in dimension '{dimension}'")]
    UnknownLevel { dimension: String, level: String },
    #[error("unknown member '{member}' in dimension '{dimension}'")]
    UnknownMember { dimension: String, member: String },
}

/// A typed attribute value of a dimension member.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(untagged)]
pub enum Scalar {
    String(String),
    Integer(i64),
    Decimal(Decimal),
    Date(NaiveDate),
}

impl Scalar {
    pub fn as_decimal(&self) -> Option<Decimal> {
        match self {
            Scalar::Integer(i) => Some(Decimal::from(*i)),
            Scalar::Decimal(d) => Some(*d),
            _ => None,
        }
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scalar::String(s) => f.write_str(s),
            Scalar::Integer(i) => write!(f, "{i}"),
            Scalar::Decimal(d) => f.write_str(&d.canonical()),
            Scalar::Date(d) => write!(f, "{}", d.format("%Y-%m-%d")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ParentRef {
    pub level: String,
    pub member: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DimensionMember {
    pub member_id: String,
    pub level_id: String,
    pub attribute_values: BTreeMap<String, Scalar>,
    /// May skip intermediate levels (ragged hierarchies).
    pub parent: Option<ParentRef>,
}

/// Members of one dimension, indexed by id, with per-level document order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DimensionTable {
    pub dimension_id: String,
    members: Vec<DimensionMember>,
    index: HashMap<String, usize>,
    level_depth: HashMap<String, u32>,
    level_order: HashMap<String, Vec<usize>>,
}

impl DimensionTable {
    pub fn member(&self, id: &str) -> Option<&DimensionMember> {
        self.index.get(id).map(|&i| &self.members[i])
    }

    pub fn members(&self) -> &[DimensionMember] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn has_level(&self, level: &str) -> bool {
        self.level_depth.contains_key(level)
    }

    pub fn depth(&self, level: &str) -> Option<u32> {
        self.level_depth.get(level).copied()
    }

    /// Members of `level` in document order; `None` for an unknown level.
    pub fn level_members(&self, level: &str) -> Option<impl Iterator<Item = &DimensionMember>> {
        self.level_depth.get(level)?;
        let order = self.level_order.get(level).map(Vec::as_slice).unwrap_or(&[]);
        Some(order.iter().map(|&i| &self.members[i]))
    }

    pub fn level_member_ids(&self, level: &str) -> Option<Vec<String>> {
        Some(self.level_members(level)?.map(|m| m.member_id.clone()).collect())
    }

    /// Resolves `member_id` to its ancestor at `target_level`.
    ///
    /// Returns the member itself at its own level, [`UNASSIGNED`] when the
    /// parent chain skips past or stops below the target level, and
    /// [`UNKNOWN`] for an [`UNKNOWN`] input.
    pub fn ancestor_at_level<'a>(&'a self, member_id: &'a str, target_level: &str) -> Result<&'a str, StoreError> {
        let target_depth = self.depth(target_level).ok_or_else(|| StoreError::UnknownLevel {
            dimension: self.dimension_id.clone(),
            level: target_level.to_string(),
        })?;
        if member_id == UNKNOWN {
            return Ok(UNKNOWN);
        }
        let mut m = self.member(member_id).ok_or_else(|| StoreError::UnknownMember {
            dimension: self.dimension_id.clone(),
            member: member_id.to_string(),
        })?;
        loop {
            let depth = self.level_depth[&m.level_id];
            if depth == target_depth {
                return Ok(&m.member_id);
            }
            if depth > target_depth {
                return Ok(UNASSIGNED);
            }
            match m.parent.as_ref().and_then(|p| self.member(&p.member)) {
                Some(p) => m = p,
                None => return Ok(UNASSIGNED),
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FactRecord<T> {
    /// Zero-based position in the fact document.
    pub ordinal: usize,
    pub measure_values: BTreeMap<String, T>,
    /// Dimension id to member id; [`UNKNOWN`] when the reference is missing.
    pub dimension_refs: BTreeMap<String, String>,
}

/// An immutable loaded warehouse.
#[derive(Debug, Clone)]
pub struct WarehouseInstance<T> {
    pub schema: WarehouseSchema,
    dimensions: Vec<DimensionTable>,
    facts: Vec<Vec<FactRecord<T>>>,
    forests: BTreeMap<String, DataTree>,
}

impl<T: MeasureValue> WarehouseInstance<T> {
    /// Loads every document named by the schema. Dangling fact references
    /// are not rejected here; see [`check_integrity`] and
    /// [`load_checked`](Self::load_checked).
    pub fn load(files: &WarehouseFiles, base_dir: impl Into<PathBuf>) -> Result<Self, StoreError> {
        let schema = files.schema(base_dir)?;
        let mut forests = BTreeMap::new();
        let mut dimensions = Vec::new();
        for spec in &schema.dimensions {
            let text = files.require(&spec.document_path)?;
            dimensions.push(load_dimension(text, spec)?);
            forests.insert(spec.document_path.clone(), parse_tree(&spec.document_path, text)?);
        }
        let mut facts = Vec::new();
        for spec in &schema.fact_classes {
            let text = files.require(&spec.document_path)?;
            facts.push(load_facts(text, spec)?);
            forests.insert(spec.document_path.clone(), parse_tree(&spec.document_path, text)?);
        }
        Ok(Self { schema, dimensions, facts, forests })
    }

    /// [`load`](Self::load) followed by [`check_integrity`]; any diagnostic
    /// is an error.
    pub fn load_checked(files: &WarehouseFiles, base_dir: impl Into<PathBuf>) -> Result<Self, StoreError> {
        let inst = Self::load(files, base_dir)?;
        let diags = check_integrity(&inst);
        if diags.is_empty() {
            Ok(inst)
        } else {
            Err(StoreError::Integrity(diags))
        }
    }

    pub fn open(dir: impl Into<PathBuf>) -> Result<Self, StoreError> {
        let dir = dir.into();
        let files = WarehouseFiles::read_dir(&dir)?;
        Self::load_checked(&files, dir)
    }
}

impl<T> WarehouseInstance<T> {
    pub fn dimension(&self, id: &str) -> Option<&DimensionTable> {
        self.dimensions.iter().find(|d| d.dimension_id == id)
    }

    pub fn dimensions(&self) -> &[DimensionTable] {
        &self.dimensions
    }

    pub fn facts(&self, fact_class: &str) -> Option<&[FactRecord<T>]> {
        let i = self.schema.fact_classes.iter().position(|f| f.id == fact_class)?;
        Some(&self.facts[i])
    }

    /// Parsed tree of a dimension or fact document, by its schema path.
    pub fn document(&self, path: &str) -> Option<&DataTree> {
        self.forests.get(path)
    }

    pub fn fact_document(&self, fact_class: &str) -> Option<&DataTree> {
        self.document(&self.schema.fact_class(fact_class)?.document_path)
    }
}

fn parse_tree(document: &str, text: &str) -> Result<DataTree, StoreError> {
    DataTree::parse(text).map_err(|e| StoreError::MalformedXml {
        document: document.to_string(),
        message: e.to_string(),
    })
}
