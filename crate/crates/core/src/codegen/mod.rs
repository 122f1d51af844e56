//! Compiles a [`QueryState`] to standalone XQuery over the warehouse files.
//!
//! The generated text declares everything it uses in its prolog: one
//! variable per referenced document, the level order of each dimension, and
//! a recursive `local:ancestor` walking `parent/@idref` links. Executed, it
//! prints `<result>` with the same `cell`/`coord`/`measure` shape as
//! [`crate::present::to_xml`].

mod external;

use std::collections::BTreeSet;
use std::fmt::{self, Write as _};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::algebra::{lower, AlgebraError, AxisSource, KeySpec, MeasureSource, QueryState, ALL, PULLED_PREFIX};
use crate::model::{AggregateFn, WarehouseSchema};
use crate::store::{UNASSIGNED, UNKNOWN};

pub use external::{run_external, run_with, ExternalError, PROCESSOR_ENV};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum QueryDialect {
    /// XQuery 3.1 `group by`.
    #[default]
    Xq31,
    /// XQuery 1.0: nested iteration over `distinct-values` of the keys.
    Xq10,
}

impl QueryDialect {
    pub fn as_str(self) -> &'static str {
        match self {
            QueryDialect::Xq31 => "xq31",
            QueryDialect::Xq10 => "xq10",
        }
    }

    fn version(self) -> &'static str {
        match self {
            QueryDialect::Xq31 => "3.1",
            QueryDialect::Xq10 => "1.0",
        }
    }
}

impl FromStr for QueryDialect {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "xq31" => Ok(QueryDialect::Xq31),
            "xq10" => Ok(QueryDialect::Xq10),
            other => Err(format!("unknown dialect '{other}' (expected xq31 or xq10)")),
        }
    }
}

impl fmt::Display for QueryDialect {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GeneratedQuery {
    pub text: String,
    /// Document paths passed to `doc()`, relative to the warehouse directory.
    pub documents: Vec<String>,
    pub dialect: QueryDialect,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CodegenError {
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    /// Reserved: both dialects currently cover every operator.
    #[error("{feature} is not expressible in {dialect}")]
    UnsupportedInDialect { feature: String, dialect: QueryDialect },
}

impl CodegenError {
    pub fn code(&self) -> &'static str {
        match self {
            CodegenError::Algebra(e) => e.code(),
            CodegenError::UnsupportedInDialect { .. } => "unsupported_in_dialect",
        }
    }
}

/// XQuery string literal.
fn lit(s: &str) -> String {
    format!("\"{}\"", s.replace('&', "&amp;").replace('"', "\"\""))
}

/// Literal text inside a direct-constructor attribute value.
fn attr_text(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '{' => out.push_str("{{"),
            '}' => out.push_str("}}"),
            '"' => out.push_str("&quot;"),
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '\n' => out.push_str("&#10;"),
            '\r' => out.push_str("&#13;"),
            '\t' => out.push_str("&#9;"),
            c => out.push(c),
        }
    }
    out
}

const ANCESTOR_FN: &str = r#"declare function local:ancestor($dim as element(dimension), $inst as element(instance)?,
    $target as xs:string, $levels as xs:string*) as element(instance)?
{
  if (empty($inst)) then ()
  else if (string($inst/../@id) eq $target) then $inst
  else if (index-of($levels, string($inst/../@id))[1] gt index-of($levels, $target)[1]) then ()
  else local:ancestor($dim, $dim/Level/instance[@id eq string($inst/parent[1]/@idref)][1], $target, $levels)
};
"#;

fn coord_fn() -> String {
    format!(
        r#"declare function local:coord($fact as element(fact), $dim as element(dimension),
    $target as xs:string, $levels as xs:string*) as xs:string
{{
  let $ref := $fact/dimension[@idref eq string($dim/@id)][1]/@value-id
  return
    if (empty($ref)) then {unknown}
    else
      let $a := local:ancestor($dim, $dim/Level/instance[@id eq string($ref)][1], $target, $levels)
      return if (empty($a)) then {unassigned} else string($a/@id)
}};
"#,
        unknown = lit(UNKNOWN),
        unassigned = lit(UNASSIGNED),
    )
}

const PUSHED_FN: &str = r#"declare function local:pushed($fact as element(fact), $dim as element(dimension),
    $target as xs:string, $levels as xs:string*, $name as xs:string) as xs:decimal
{
  let $c := local:coord($fact, $dim, $target, $levels)
  let $v := $dim/Level/instance[@id eq $c][1]/attribute[@name eq $name][1]/@value
  return if (empty($v)) then 0 else xs:decimal($v)
};
"#;

struct Gen<'a> {
    schema: &'a WarehouseSchema,
    /// Referenced dimension ids, in schema order.
    dims: Vec<&'a str>,
}

impl<'a> Gen<'a> {
    fn dim_var(&self, id: &str) -> String {
        let i = self.dims.iter().position(|d| *d == id).expect("dimension collected");
        format!("$dim{}", i + 1)
    }

    fn levels_var(&self, id: &str) -> String {
        let i = self.dims.iter().position(|d| *d == id).expect("dimension collected");
        format!("$levels{}", i + 1)
    }

    fn coord(&self, fact: &str, dimension: &str, level: &str) -> String {
        format!("local:coord({fact}, {}, {}, {})", self.dim_var(dimension), lit(level), self.levels_var(dimension))
    }

    fn value(&self, fact: &str, source: &MeasureSource) -> String {
        match source {
            MeasureSource::Count => "xs:decimal(1)".to_string(),
            MeasureSource::Native { measure } => {
                format!("xs:decimal({fact}/measure[@name eq {}][1]/@value)", lit(measure))
            }
            MeasureSource::Pushed { dimension, level, attribute } => format!(
                "local:pushed({fact}, {}, {}, {}, {})",
                self.dim_var(dimension),
                lit(level),
                self.levels_var(dimension),
                lit(attribute)
            ),
        }
    }

    fn prolog(&self, state: &QueryState, out: &mut String) -> Vec<String> {
        let fact = self.schema.fact_class(&state.fact_class).expect("checked by lower");
        let mut documents = vec![fact.document_path.clone()];
        let _ = writeln!(
            out,
            "declare variable $facts := doc({})/FactDoc[@id eq {}]/fact;",
            lit(&fact.document_path),
            lit(&fact.id)
        );
        for id in &self.dims {
            let spec = self.schema.dimension(id).expect("linked dimension");
            documents.push(spec.document_path.clone());
            let _ = writeln!(
                out,
                "declare variable {} := doc({})/dimension[@id eq {}];",
                self.dim_var(id),
                lit(&spec.document_path),
                lit(id)
            );
            let levels: Vec<String> = spec.levels_by_depth().iter().map(|l| lit(&l.id)).collect();
            let _ = writeln!(out, "declare variable {} := ({});", self.levels_var(id), levels.join(", "));
        }
        let conds: Vec<String> = state
            .predicates
            .iter()
            .map(|p| {
                let members: Vec<String> = p.members.iter().map(|m| lit(m)).collect();
                format!("{} = ({})", self.coord(".", &p.dimension, &p.level), members.join(", "))
            })
            .collect();
        if conds.is_empty() {
            out.push_str("declare variable $selected := $facts;\n");
        } else {
            let _ = writeln!(out, "declare variable $selected := $facts[{}];", conds.join(" and "));
        }
        documents.sort();
        documents.dedup();
        documents
    }
}

/// Dimensions read by axes, predicates and pushed measures (including
/// pulled ones), in schema order.
fn referenced_dimensions<'a>(schema: &'a WarehouseSchema, state: &QueryState) -> Result<Vec<&'a str>, AlgebraError> {
    let mut ids: BTreeSet<&str> = state.predicates.iter().map(|p| p.dimension.as_str()).collect();
    fn pushed(s: &MeasureSource) -> Option<&str> {
        match s {
            MeasureSource::Pushed { dimension, .. } => Some(dimension),
            _ => None,
        }
    }
    for a in &state.axes {
        match &a.source {
            AxisSource::Dimension { dimension, .. } => ids.extend([dimension.as_str()]),
            AxisSource::Pulled { source, .. } => ids.extend(pushed(source)),
        }
    }
    ids.extend(state.measures.iter().filter_map(|m| pushed(&m.source)));
    let fact = schema
        .fact_class(&state.fact_class)
        .ok_or_else(|| AlgebraError::UnknownFactClass(state.fact_class.clone()))?;
    if let Some(d) = ids.iter().find(|d| !fact.links(d) || schema.dimension(d).is_none()) {
        return Err(AlgebraError::UnknownDimension(d.to_string()));
    }
    Ok(schema.dimensions.iter().map(|d| d.id.as_str()).filter(|d| ids.contains(d)).collect())
}

fn aggregate_expr(function: AggregateFn, values: &str) -> String {
    match function {
        AggregateFn::Sum => format!("sum({values})"),
        AggregateFn::Count => format!("count({values})"),
        AggregateFn::Min => format!("min({values})"),
        AggregateFn::Max => format!("max({values})"),
        AggregateFn::Avg => format!("avg({values})"),
    }
}

/// Axis label triple as emitted in `coord` elements.
fn axis_labels(state: &QueryState) -> Vec<(String, String)> {
    state
        .axes
        .iter()
        .map(|a| match &a.source {
            AxisSource::Dimension { dimension, level } => (dimension.clone(), level.clone()),
            AxisSource::Pulled { name, .. } => (format!("{PULLED_PREFIX}{name}"), "value".to_string()),
        })
        .collect()
}

fn key_expr(g: &Gen<'_>, fact: &str, key: &KeySpec) -> Option<String> {
    match key {
        KeySpec::Member { dimension, level } => Some(g.coord(fact, dimension, level)),
        KeySpec::Pulled { source, .. } => Some(format!("string({})", g.value(fact, source))),
        KeySpec::All { .. } => None,
    }
}

/// `<cell>` constructor; `member(i)` yields the coordinate expression of
/// axis `i`, `None` for `*`.
fn cell_constructor(
    labels: &[(String, String)],
    members: &[Option<String>],
    measures: &[(String, String)],
    indent: &str,
) -> String {
    let mut s = format!("{indent}<cell>\n");
    for ((dim, level), m) in labels.iter().zip(members) {
        let member = match m {
            Some(expr) => format!("{{{expr}}}"),
            None => attr_text(ALL),
        };
        let _ = writeln!(
            s,
            "{indent}  <coord dimension=\"{}\" level=\"{}\" member=\"{member}\"/>",
            attr_text(dim),
            attr_text(level)
        );
    }
    for (name, expr) in measures {
        let _ = writeln!(s, "{indent}  <measure name=\"{}\" value=\"{{{expr}}}\"/>", attr_text(name));
    }
    let _ = write!(s, "{indent}</cell>");
    s
}

fn block_xq31(g: &Gen<'_>, state: &QueryState, keys: &[KeySpec], labels: &[(String, String)]) -> String {
    let mut s = String::new();
    let live: Vec<(usize, String)> =
        keys.iter().enumerate().filter_map(|(i, k)| key_expr(g, "$f", k).map(|e| (i, e))).collect();
    let names: Vec<String> = state.measures.iter().map(|m| m.name.clone()).collect();
    if live.is_empty() {
        s.push_str("  if (empty($selected)) then () else\n");
        for (i, m) in state.measures.iter().enumerate() {
            let _ = writeln!(s, "  let $v{} := for $f in $selected return {}", i + 1, g.value("$f", &m.source));
        }
    } else {
        s.push_str("  for $f in $selected\n");
        for (i, e) in &live {
            let _ = writeln!(s, "  let $k{} := {e}", i + 1);
        }
        for (i, m) in state.measures.iter().enumerate() {
            let _ = writeln!(s, "  let $v{} := {}", i + 1, g.value("$f", &m.source));
        }
        let group: Vec<String> = live.iter().map(|(i, _)| format!("$k{}", i + 1)).collect();
        let _ = writeln!(s, "  group by {}", group.join(", "));
    }
    s.push_str("  return\n");
    let members: Vec<Option<String>> =
        (0..keys.len()).map(|i| live.iter().find(|(j, _)| *j == i).map(|_| format!("$k{}", i + 1))).collect();
    let measures: Vec<(String, String)> = state
        .measures
        .iter()
        .enumerate()
        .map(|(i, m)| (names[i].clone(), aggregate_expr(m.function, &format!("$v{}", i + 1))))
        .collect();
    s.push_str(&cell_constructor(labels, &members, &measures, "    "));
    s
}

fn block_xq10(g: &Gen<'_>, state: &QueryState, keys: &[KeySpec], labels: &[(String, String)]) -> String {
    let mut s = String::new();
    let live: Vec<(usize, String)> =
        keys.iter().enumerate().filter_map(|(i, k)| key_expr(g, "$f", k).map(|e| (i, e))).collect();
    let mut row = String::from("<row");
    for (i, e) in &live {
        let _ = write!(row, " k{}=\"{{{e}}}\"", i + 1);
    }
    for (i, m) in state.measures.iter().enumerate() {
        let _ = write!(row, " v{}=\"{{{}}}\"", i + 1, g.value("$f", &m.source));
    }
    row.push_str("/>");
    let _ = writeln!(s, "  let $rows := for $f in $selected return {row}");
    let mut group = "$rows".to_string();
    if live.is_empty() {
        s.push_str("  return if (empty($rows)) then () else\n");
    } else {
        for (n, (i, _)) in live.iter().enumerate() {
            let k = i + 1;
            let _ = writeln!(s, "  for $x{k} in distinct-values({group}/@k{k})");
            let next = format!("$g{}", n + 1);
            let _ = writeln!(s, "  let {next} := {group}[string(@k{k}) eq $x{k}]");
            group = next;
        }
        s.push_str("  return\n");
    }
    let members: Vec<Option<String>> =
        (0..keys.len()).map(|i| live.iter().find(|(j, _)| *j == i).map(|_| format!("$x{}", i + 1))).collect();
    let measures: Vec<(String, String)> = state
        .measures
        .iter()
        .enumerate()
        .map(|(i, m)| {
            let values = format!("for $a in {group}/@v{} return xs:decimal($a)", i + 1);
            (m.name.clone(), aggregate_expr(m.function, &values))
        })
        .collect();
    s.push_str(&cell_constructor(labels, &members, &measures, "    "));
    s
}

/// Generates the query text for `state`. Deterministic for a given state,
/// schema and dialect.
pub fn compile(state: &QueryState, schema: &WarehouseSchema, dialect: QueryDialect) -> Result<GeneratedQuery, CodegenError> {
    let plan = lower(schema, state)?;
    let g = Gen { schema, dims: referenced_dimensions(schema, state)? };

    let mut text = String::new();
    let _ = writeln!(text, "xquery version \"{}\";", dialect.version());
    let _ = writeln!(text, "(: fact class {}, dialect {} :)", state.fact_class.replace(":)", ": )"), dialect);
    text.push('\n');
    let documents = g.prolog(state, &mut text);
    text.push('\n');
    text.push_str(ANCESTOR_FN);
    text.push('\n');
    text.push_str(&coord_fn());
    let pushes = state
        .measures
        .iter()
        .map(|m| &m.source)
        .chain(state.axes.iter().filter_map(|a| match &a.source {
            AxisSource::Pulled { source, .. } => Some(source),
            AxisSource::Dimension { .. } => None,
        }))
        .any(|s| matches!(s, MeasureSource::Pushed { .. }));
    if pushes {
        text.push('\n');
        text.push_str(PUSHED_FN);
    }
    text.push('\n');

    let labels = axis_labels(state);
    let blocks: Vec<String> = plan
        .groupings
        .iter()
        .map(|gr| match dialect {
            QueryDialect::Xq31 => block_xq31(&g, state, &gr.keys, &labels),
            QueryDialect::Xq10 => block_xq10(&g, state, &gr.keys, &labels),
        })
        .collect();
    text.push_str("<result>{\n");
    for (i, b) in blocks.iter().enumerate() {
        let _ = writeln!(text, "(: grouping {} :)", i + 1);
        text.push_str("(\n");
        text.push_str(b);
        text.push_str("\n)");
        text.push_str(if i + 1 < blocks.len() { ",\n" } else { "\n" });
    }
    text.push_str("}</result>\n");

    Ok(GeneratedQuery { text, documents, dialect })
}
