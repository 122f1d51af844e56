//! The `result`/`cell` wire shape shared by native serialization and
//! generated-query output, parsed back into a comparable cell set.

use std::collections::BTreeMap;
use std::str::FromStr;

use rust_decimal::Decimal;
use thiserror::Error;

use crate::algebra::CubeView;
use crate::number::MeasureValue;
use crate::xml::{elements, tag};

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Coord {
    pub dimension: String,
    pub level: String,
    pub member: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResultCell {
    pub coords: Vec<Coord>,
    /// (measure name, value text)
    pub measures: Vec<(String, String)>,
}

/// Cells in document order.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ResultSet {
    pub cells: Vec<ResultCell>,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("{message} (near: {excerpt:?})")]
pub struct ResultParseError {
    pub message: String,
    pub excerpt: String,
}

fn boundary(text: &str, mut i: usize) -> usize {
    i = i.min(text.len());
    while !text.is_char_boundary(i) {
        i -= 1;
    }
    i
}

fn excerpt(text: &str, pos: usize) -> String {
    text[boundary(text, pos.saturating_sub(40))..boundary(text, pos + 40)].to_string()
}

/// Parses a `result` element. Anything before the root (an XML declaration,
/// leading whitespace) is accepted; any other element shape is an error.
pub fn parse_result_xml(text: &str) -> Result<ResultSet, ResultParseError> {
    let doc = roxmltree::Document::parse(text).map_err(|e| {
        let pos = e.pos();
        let offset: usize = text
            .split_inclusive('\n')
            .take(pos.row.saturating_sub(1) as usize)
            .map(str::len)
            .sum::<usize>()
            + pos.col.saturating_sub(1) as usize;
        ResultParseError { message: e.to_string(), excerpt: excerpt(text, offset) }
    })?;
    let fail = |node: roxmltree::Node<'_, '_>, message: String| ResultParseError {
        message,
        excerpt: excerpt(text, node.range().start),
    };
    let root = doc.root_element();
    if root.tag_name().name() != "result" {
        return Err(fail(root, format!("expected <result>, found <{}>", root.tag_name().name())));
    }
    let mut cells = Vec::new();
    for cell in elements(root) {
        if cell.tag_name().name() != "cell" {
            return Err(fail(cell, format!("unexpected <{}> in <result>", cell.tag_name().name())));
        }
        let mut rc = ResultCell { coords: Vec::new(), measures: Vec::new() };
        for child in elements(cell) {
            let attr = |name: &str| {
                child
                    .attribute(name)
                    .map(str::to_string)
                    .ok_or_else(|| fail(child, format!("<{}> without @{name}", child.tag_name().name())))
            };
            match child.tag_name().name() {
                "coord" => rc.coords.push(Coord {
                    dimension: attr("dimension")?,
                    level: attr("level")?,
                    member: attr("member")?,
                }),
                "measure" => rc.measures.push((attr("name")?, attr("value")?)),
                other => return Err(fail(child, format!("unexpected <{other}> in <cell>"))),
            }
        }
        cells.push(rc);
    }
    Ok(ResultSet { cells })
}

fn numeric(text: &str) -> Option<Decimal> {
    Decimal::from_str(text.trim()).or_else(|_| Decimal::from_scientific(text.trim())).ok()
}

impl ResultSet {
    pub fn from_view<T: MeasureValue>(view: &CubeView<T>) -> ResultSet {
        let cells = view
            .cells
            .iter()
            .map(|c| ResultCell {
                coords: view
                    .axes
                    .iter()
                    .zip(&c.coords)
                    .map(|(a, m)| Coord { dimension: a.id.clone(), level: a.level.clone(), member: m.clone() })
                    .collect(),
                measures: view.measures.iter().zip(&c.values).map(|(m, v)| (m.name.clone(), v.canonical())).collect(),
            })
            .collect();
        ResultSet { cells }
    }

    /// Same layout as [`to_xml`](super::to_xml).
    pub fn to_xml(&self) -> String {
        if self.cells.is_empty() {
            return "<result/>\n".to_string();
        }
        let mut out = String::from("<result>\n");
        for cell in &self.cells {
            out.push_str("  <cell>\n");
            for c in &cell.coords {
                let t = tag("coord", &[("dimension", &c.dimension), ("level", &c.level), ("member", &c.member)], true);
                out.push_str(&format!("    {t}\n"));
            }
            for (name, value) in &cell.measures {
                out.push_str(&format!("    {}\n", tag("measure", &[("name", name), ("value", value)], true)));
            }
            out.push_str("  </cell>\n");
        }
        out.push_str("</result>\n");
        out
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    /// Coordinates to measure values, order-insensitive on both.
    pub fn cell_map(&self) -> BTreeMap<Vec<Coord>, BTreeMap<String, String>> {
        self.cells
            .iter()
            .map(|c| {
                let mut coords = c.coords.clone();
                coords.sort();
                (coords, c.measures.iter().cloned().collect())
            })
            .collect()
    }

    /// Differences as a cell set with exact numeric equality of values.
    pub fn diff(&self, other: &ResultSet) -> Vec<String> {
        self.diff_within(other, Decimal::ZERO)
    }

    /// Like [`diff`](Self::diff), accepting values within `tolerance`.
    pub fn diff_within(&self, other: &ResultSet, tolerance: Decimal) -> Vec<String> {
        let mut out = Vec::new();
        if self.cells.len() != self.cell_map().len() {
            out.push("left side has duplicate cells".to_string());
        }
        if other.cells.len() != other.cell_map().len() {
            out.push("right side has duplicate cells".to_string());
        }
        let (a, b) = (self.cell_map(), other.cell_map());
        let show = |k: &[Coord]| {
            k.iter().map(|c| format!("{}@{}={}", c.dimension, c.level, c.member)).collect::<Vec<_>>().join(", ")
        };
        for (k, va) in &a {
            let Some(vb) = b.get(k) else {
                out.push(format!("only on the left: [{}]", show(k)));
                continue;
            };
            let names: std::collections::BTreeSet<&String> = va.keys().chain(vb.keys()).collect();
            for n in names {
                let (x, y) = (va.get(n), vb.get(n));
                let same = match (x.and_then(|s| numeric(s)), y.and_then(|s| numeric(s))) {
                    (Some(p), Some(q)) => (p - q).abs() <= tolerance,
                    _ => x == y,
                };
                if !same {
                    out.push(format!("[{}] {n}: {x:?} vs {y:?}", show(k)));
                }
            }
        }
        for k in b.keys().filter(|k| !a.contains_key(*k)) {
            out.push(format!("only on the right: [{}]", show(k)));
        }
        out
    }
}
