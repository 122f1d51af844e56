//! Pivot layouts and result serialization (XML, CSV, JSON).

mod pivot;
mod result;

use std::fmt;
use std::str::FromStr;

use serde_json::{json, Value};

use crate::algebra::CubeView;
use crate::number::MeasureValue;
use crate::xml::tag;

pub use pivot::{to_pivot, PivotError, PivotTable};
pub use result::{parse_result_xml, Coord, ResultCell, ResultParseError, ResultSet};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Format {
    Xml,
    Csv,
    Json,
}

impl Format {
    pub fn as_str(self) -> &'static str {
        match self {
            Format::Xml => "xml",
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }

    pub fn content_type(self) -> &'static str {
        match self {
            Format::Xml => "application/xml",
            Format::Csv => "text/csv",
            Format::Json => "application/json",
        }
    }
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "xml" => Ok(Format::Xml),
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(format!("unknown format '{other}' (expected xml, csv or json)")),
        }
    }
}

impl fmt::Display for Format {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

pub fn serialize<T: MeasureValue>(view: &CubeView<T>, format: Format) -> String {
    match format {
        Format::Xml => to_xml(view),
        Format::Csv => to_csv(view),
        Format::Json => to_json(view),
    }
}

/// `<result><cell><coord .../>...<measure .../>...</cell>...</result>`
pub fn to_xml<T: MeasureValue>(view: &CubeView<T>) -> String {
    if view.cells.is_empty() {
        return "<result/>\n".to_string();
    }
    let mut out = String::from("<result>\n");
    for cell in &view.cells {
        out.push_str("  <cell>\n");
        for (axis, member) in view.axes.iter().zip(&cell.coords) {
            let t = tag("coord", &[("dimension", &axis.id), ("level", &axis.level), ("member", member)], true);
            out.push_str(&format!("    {t}\n"));
        }
        for (m, v) in view.measures.iter().zip(&cell.values) {
            let t = tag("measure", &[("name", &m.name), ("value", &v.canonical())], true);
            out.push_str(&format!("    {t}\n"));
        }
        out.push_str("  </cell>\n");
    }
    out.push_str("</result>\n");
    out
}

fn csv_text(rows: Vec<Vec<String>>) -> String {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    for r in rows {
        w.write_record(&r).expect("in-memory CSV write");
    }
    String::from_utf8(w.into_inner().expect("in-memory CSV flush")).expect("CSV of UTF-8 fields")
}

/// Header of axis ids then measure names; one row per cell.
pub fn to_csv<T: MeasureValue>(view: &CubeView<T>) -> String {
    let mut rows = Vec::with_capacity(view.cells.len() + 1);
    rows.push(view.axes.iter().map(|a| a.id.clone()).chain(view.measures.iter().map(|m| m.name.clone())).collect());
    for cell in &view.cells {
        rows.push(cell.coords.iter().cloned().chain(cell.values.iter().map(|v| v.canonical())).collect());
    }
    csv_text(rows)
}

pub(crate) fn number_json<T: MeasureValue>(v: &T) -> Value {
    let text = v.canonical();
    match serde_json::Number::from_str(&text) {
        Ok(n) => Value::Number(n),
        Err(_) => Value::String(text),
    }
}

pub fn view_json<T: MeasureValue>(view: &CubeView<T>) -> Value {
    let cells: Vec<Value> = view
        .cells
        .iter()
        .map(|c| json!({ "coords": c.coords, "values": c.values.iter().map(number_json).collect::<Vec<_>>() }))
        .collect();
    json!({
        "axes": view.axes,
        "measures": view.measures,
        "cells": cells,
        "query": view.query,
    })
}

pub fn to_json<T: MeasureValue>(view: &CubeView<T>) -> String {
    let mut s = serde_json::to_string_pretty(&view_json(view)).expect("JSON values serialize");
    s.push('\n');
    s
}
