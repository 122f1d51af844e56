//! Warehouse metadata: the `dw-model.xml` document.
//!
//! The root `DW-model` element holds `dimension` elements (each with its
//! `Level` ladder and typed `attribute` declarations) and `FactDoc` elements
//! (measures plus `dimension/@idref` links). Several `FactDoc` elements may
//! link the same dimensions, which is how constellation schemas are expressed.

mod parse;
mod write;

use std::collections::HashSet;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::diagnostic::{self, Diagnostic};
use crate::xml::identifier_problem;

pub use parse::parse_schema;
pub use write::serialize_schema;

/// Fixed entry filename of a warehouse directory.
pub const MODEL_FILE: &str = "dw-model.xml";

#[derive(Debug, Error)]
pub enum SchemaError {
    #[error("malformed XML in {document}: {message}")]
    MalformedXml { document: String, message: String },
    #[error("schema violation:\n{}", diagnostic::join(.0))]
    SchemaViolation(Vec<Diagnostic>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScalarType {
    String,
    Integer,
    Decimal,
    Date,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NumericType {
    Integer,
    Decimal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AggregateFn {
    Sum,
    Count,
    Min,
    Max,
    Avg,
}

macro_rules! keyword_enum {
    ($ty:ty { $($variant:ident => $text:literal),* $(,)? }) => {
        impl $ty {
            pub fn as_str(self) -> &'static str {
                match self { $(Self::$variant => $text),* }
            }
        }

        impl FromStr for $ty {
            type Err = String;
            fn from_str(s: &str) -> Result<Self, String> {
                match s {
                    $($text => Ok(Self::$variant),)*
                    other => Err(format!("unknown value '{other}'")),
                }
            }
        }

        impl fmt::Display for $ty {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.as_str())
            }
        }
    };
}

keyword_enum!(ScalarType { String => "string", Integer => "integer", Decimal => "decimal", Date => "date" });
keyword_enum!(NumericType { Integer => "integer", Decimal => "decimal" });
keyword_enum!(AggregateFn { Sum => "sum", Count => "count", Min => "min", Max => "max", Avg => "avg" });

impl ScalarType {
    pub fn is_numeric(self) -> bool {
        matches!(self, ScalarType::Integer | ScalarType::Decimal)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AttributeSpec {
    pub name: String,
    #[serde(rename = "type")]
    pub ty: ScalarType,
    pub key: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LevelSpec {
    pub id: String,
    /// 1 is the finest level; rolling up increases depth.
    pub depth: u32,
    pub attributes: Vec<AttributeSpec>,
}

impl LevelSpec {
    pub fn attribute(&self, name: &str) -> Option<&AttributeSpec> {
        self.attributes.iter().find(|a| a.name == name)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DimensionSpec {
    pub id: String,
    /// Path of the dimension document, relative to the metadata document.
    #[serde(rename = "path")]
    pub document_path: String,
    pub levels: Vec<LevelSpec>,
}

impl DimensionSpec {
    pub fn level(&self, id: &str) -> Option<&LevelSpec> {
        self.levels.iter().find(|l| l.id == id)
    }

    /// Levels ordered finest first.
    pub fn levels_by_depth(&self) -> Vec<&LevelSpec> {
        let mut v: Vec<_> = self.levels.iter().collect();
        v.sort_by_key(|l| l.depth);
        v
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MeasureSpec {
    pub name: String,
    #[serde(rename = "type")]
    pub ty: NumericType,
    pub aggregate: AggregateFn,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FactSpec {
    pub id: String,
    #[serde(rename = "path")]
    pub document_path: String,
    pub measures: Vec<MeasureSpec>,
    /// Ids of the linked dimensions.
    pub dimension_links: Vec<String>,
}

impl FactSpec {
    pub fn measure(&self, name: &str) -> Option<&MeasureSpec> {
        self.measures.iter().find(|m| m.name == name)
    }

    pub fn links(&self, dimension: &str) -> bool {
        self.dimension_links.iter().any(|d| d == dimension)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct WarehouseSchema {
    pub dimensions: Vec<DimensionSpec>,
    pub fact_classes: Vec<FactSpec>,
    #[serde(skip)]
    pub source_path: PathBuf,
}

impl WarehouseSchema {
    pub fn dimension(&self, id: &str) -> Option<&DimensionSpec> {
        self.dimensions.iter().find(|d| d.id == id)
    }

    pub fn fact_class(&self, id: &str) -> Option<&FactSpec> {
        self.fact_classes.iter().find(|f| f.id == id)
    }

    /// Directory that relative document paths are resolved against.
    pub fn base_dir(&self) -> &Path {
        self.source_path.parent().unwrap_or(Path::new(""))
    }

    /// Resolves a forward-slash relative document path.
    pub fn resolve(&self, document_path: &str) -> PathBuf {
        let mut p = self.base_dir().to_path_buf();
        for part in document_path.split('/').filter(|s| !s.is_empty()) {
            p.push(part);
        }
        p
    }
}

fn dim_path(d: &DimensionSpec) -> String {
    format!("/DW-model/dimension[@id='{}']", d.id)
}

fn fact_path(f: &FactSpec) -> String {
    format!("/DW-model/FactDoc[@id='{}']", f.id)
}

/// Checks every structural invariant of a schema and reports one diagnostic
/// per violation. An empty result means the schema is valid.
pub fn validate_schema(schema: &WarehouseSchema) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    let mut report = |path: String, msg: String| out.push(Diagnostic::new(MODEL_FILE, path, msg));

    if schema.dimensions.is_empty() {
        report("/DW-model".into(), "no dimension declared".into());
    }
    if schema.fact_classes.is_empty() {
        report("/DW-model".into(), "no FactDoc declared".into());
    }

    let mut dim_ids = HashSet::new();
    let mut doc_paths = HashSet::new();
    for d in &schema.dimensions {
        let path = dim_path(d);
        if let Some(p) = identifier_problem(&d.id) {
            report(path.clone(), format!("dimension id: {p}"));
        }
        if !dim_ids.insert(d.id.as_str()) {
            report(path.clone(), format!("duplicate dimension id '{}'", d.id));
        }
        if !doc_paths.insert(d.document_path.as_str()) {
            report(path.clone(), format!("document path '{}' is already used", d.document_path));
        }
        if d.levels.is_empty() {
            report(path.clone(), "dimension declares no Level".into());
        }

        let mut level_ids = HashSet::new();
        for l in &d.levels {
            let lpath = format!("{path}/Level[@id='{}']", l.id);
            if let Some(p) = identifier_problem(&l.id) {
                report(lpath.clone(), format!("level id: {p}"));
            }
            if !level_ids.insert(l.id.as_str()) {
                report(lpath.clone(), format!("duplicate level id '{}'", l.id));
            }
            let mut names = HashSet::new();
            for a in &l.attributes {
                if !names.insert(a.name.as_str()) {
                    report(
                        format!("{lpath}/attribute[@name='{}']", a.name),
                        format!("duplicate attribute name '{}'", a.name),
                    );
                }
            }
            let keys = l.attributes.iter().filter(|a| a.key).count();
            if !l.attributes.is_empty() && keys != 1 {
                report(
                    lpath.clone(),
                    format!("level must flag exactly one key attribute, found {keys}"),
                );
            }
        }

        let mut depths: Vec<u32> = d.levels.iter().map(|l| l.depth).collect();
        depths.sort_unstable();
        if !depths.iter().enumerate().all(|(i, &dep)| dep as usize == i + 1) {
            report(
                path,
                format!(
                    "non-contiguous depths {:?}, expected 1..{}",
                    depths,
                    depths.len()
                ),
            );
        }
    }

    let mut fact_ids = HashSet::new();
    for f in &schema.fact_classes {
        let path = fact_path(f);
        if let Some(p) = identifier_problem(&f.id) {
            report(path.clone(), format!("fact class id: {p}"));
        }
        if !fact_ids.insert(f.id.as_str()) {
            report(path.clone(), format!("duplicate fact class id '{}'", f.id));
        }
        if !doc_paths.insert(f.document_path.as_str()) {
            report(path.clone(), format!("document path '{}' is already used", f.document_path));
        }
        let mut names = HashSet::new();
        for m in &f.measures {
            if let Some(p) = identifier_problem(&m.name) {
                report(format!("{path}/measure[@name='{}']", m.name), format!("measure name: {p}"));
            }
            if !names.insert(m.name.as_str()) {
                report(
                    format!("{path}/measure[@name='{}']", m.name),
                    format!("duplicate measure name '{}' in fact class '{}'", m.name, f.id),
                );
            }
        }
        if f.dimension_links.is_empty() {
            report(path.clone(), "FactDoc links no dimension".into());
        }
        let mut links = HashSet::new();
        for l in &f.dimension_links {
            let lpath = format!("{path}/dimension[@idref='{l}']");
            if !links.insert(l.as_str()) {
                report(lpath.clone(), format!("duplicate dimension link '{l}'"));
            }
            if schema.dimension(l).is_none() {
                report(lpath, format!("dangling dimension idref '{l}'"));
            }
        }
    }
    out
}
