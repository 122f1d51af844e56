use std::cell::RefCell;
use std::collections::{HashMap, HashSet};
use std::fmt::Write as _;
use std::str::FromStr;

use rust_decimal::Decimal;

use super::view::{Cell, CubeView, ViewAxis, ViewMeasure, ALL};
use super::{AlgebraError, AxisSource, MeasureSelection, MeasureSource, Predicate, QueryState};
use crate::model::{FactSpec, WarehouseSchema};
use crate::number::MeasureValue;
use crate::store::{is_sentinel, StoreError, WarehouseInstance, UNASSIGNED, UNKNOWN};
use crate::tax::{aggregate, group_forest, selection_where, Cmp, Edge, Fragment, NodeId, PatternTree, ValuePredicate};

/// One grouping key component.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum KeySpec {
    /// Ancestor of the fact's member at `level`.
    Member { dimension: String, level: String },
    /// Canonical value of a pulled measure.
    Pulled { name: String, source: MeasureSource },
    /// Collapsed axis: constant `*`.
    All { axis: String },
}

impl KeySpec {
    fn label(&self) -> String {
        match self {
            KeySpec::Member { dimension, level } => format!("{dimension}@{level}"),
            KeySpec::Pulled { name, .. } => format!("μ:{name}"),
            KeySpec::All { axis } => format!("{axis}@{ALL}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Grouping {
    pub keys: Vec<KeySpec>,
}

/// The tree-algebra plan a query state lowers to: one selection over the
/// fact document shared by one group/aggregate branch per grouping.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Plan {
    pub document: String,
    pub pattern: PatternTree,
    pub predicates: Vec<Predicate>,
    pub groupings: Vec<Grouping>,
    pub measures: Vec<MeasureSelection>,
}

impl Plan {
    /// Textual dump, one operator per line in pre-order, children indented.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        let mut indent = 0;
        if self.groupings.len() > 1 {
            let _ = writeln!(out, "union {}", self.groupings.len());
            indent = 1;
        }
        let measures: Vec<String> = self.measures.iter().map(|m| format!("{}:{}", m.name, m.function)).collect();
        let mut select = format!("select {} {}", self.document, self.pattern);
        if !self.predicates.is_empty() {
            let preds: Vec<String> = self
                .predicates
                .iter()
                .map(|p| format!("{}@{} in {{{}}}", p.dimension, p.level, p.members.join(", ")))
                .collect();
            let _ = write!(select, " where {}", preds.join(" and "));
        }
        for g in &self.groupings {
            let pad = |n: usize| "  ".repeat(n);
            let keys: Vec<String> = g.keys.iter().map(KeySpec::label).collect();
            let _ = writeln!(out, "{}aggregate {}", pad(indent), measures.join(", "));
            let _ = writeln!(out, "{}group [{}]", pad(indent + 1), keys.join(", "));
            let _ = writeln!(out, "{}{}", pad(indent + 2), select);
        }
        out
    }
}

/// Lowers a state to its plan. Cube axes expand to every subset, the empty
/// collapse set first, in binary-counter order over the cube axes.
pub fn lower(schema: &WarehouseSchema, state: &QueryState) -> Result<Plan, AlgebraError> {
    let fact = schema
        .fact_class(&state.fact_class)
        .ok_or_else(|| AlgebraError::UnknownFactClass(state.fact_class.clone()))?;
    let pattern = PatternTree::element("FactDoc")
        .with_predicate(0, ValuePredicate::attr("id", Cmp::Eq, fact.id.clone()))
        .child(0, Edge::Pc, "fact")
        .with_output(1);

    let cube: Vec<usize> = match &state.cube_axes {
        None => Vec::new(),
        Some(ids) => state
            .axes
            .iter()
            .enumerate()
            .filter(|(_, a)| ids.contains(&a.id()))
            .map(|(i, _)| i)
            .collect(),
    };
    let mut groupings = Vec::new();
    for mask in 0u64..(1u64 << cube.len()) {
        let collapsed: HashSet<usize> = cube.iter().enumerate().filter(|(b, _)| mask & (1 << b) != 0).map(|(_, &i)| i).collect();
        let keys = state
            .axes
            .iter()
            .enumerate()
            .map(|(i, a)| {
                if collapsed.contains(&i) {
                    KeySpec::All { axis: a.id() }
                } else {
                    match &a.source {
                        AxisSource::Dimension { dimension, level } => {
                            KeySpec::Member { dimension: dimension.clone(), level: level.clone() }
                        }
                        AxisSource::Pulled { name, source } => KeySpec::Pulled { name: name.clone(), source: source.clone() },
                    }
                }
            })
            .collect();
        groupings.push(Grouping { keys });
    }

    Ok(Plan {
        document: fact.document_path.clone(),
        pattern,
        predicates: state.predicates.clone(),
        groupings,
        measures: state.measures.clone(),
    })
}

fn integrity(e: StoreError) -> AlgebraError {
    AlgebraError::Integrity(e.to_string())
}

struct FactReader<'a, T> {
    inst: &'a WarehouseInstance<T>,
    fact: &'a FactSpec,
}

impl<'a, T: MeasureValue> FactReader<'a, T> {
    fn member_ref(&self, f: &Fragment<'a>, dimension: &str) -> &'a str {
        f.child_where("dimension", "idref", dimension)
            .and_then(|d| d.attribute("value-id"))
            .unwrap_or(UNKNOWN)
    }

    fn coordinate(&self, f: &Fragment<'a>, dimension: &str, level: &str) -> Result<&'a str, AlgebraError> {
        let table = self
            .inst
            .dimension(dimension)
            .ok_or_else(|| AlgebraError::UnknownDimension(dimension.to_string()))?;
        let r = self.member_ref(f, dimension);
        table.ancestor_at_level(r, level).map_err(integrity)
    }

    fn value(&self, f: &Fragment<'a>, source: &MeasureSource) -> Result<T, AlgebraError> {
        match source {
            MeasureSource::Count => Ok(T::one()),
            MeasureSource::Native { measure } => {
                let spec = self.fact.measure(measure).ok_or_else(|| AlgebraError::UnknownMeasure(measure.clone()))?;
                f.child_where("measure", "name", measure)
                    .and_then(|m| m.attribute("value"))
                    .and_then(|v| T::parse_measure(v, spec.ty))
                    .ok_or_else(|| AlgebraError::Integrity(format!("fact without a valid '{measure}' measure")))
            }
            MeasureSource::Pushed { dimension, level, attribute } => {
                let c = self.coordinate(f, dimension, level)?;
                if is_sentinel(c) {
                    return Ok(T::zero());
                }
                let table = self.inst.dimension(dimension).expect("resolved above");
                Ok(table
                    .member(c)
                    .and_then(|m| m.attribute_values.get(attribute))
                    .and_then(|s| s.as_decimal())
                    .map(T::from_decimal)
                    .unwrap_or_else(T::zero))
            }
        }
    }

    fn passes(&self, f: &Fragment<'a>, predicates: &[Predicate]) -> Result<bool, AlgebraError> {
        for p in predicates {
            let c = self.coordinate(f, &p.dimension, &p.level)?;
            if !p.members.iter().any(|m| m == c) {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

/// Per-fact coordinates (one per axis) and measure values, decoded once.
struct Row<T> {
    coords: Vec<String>,
    values: Vec<T>,
}

/// Evaluates a query state over an instance.
pub fn evaluate<T: MeasureValue>(inst: &WarehouseInstance<T>, state: &QueryState) -> Result<CubeView<T>, AlgebraError> {
    let plan = lower(&inst.schema, state)?;
    let fact = inst.schema.fact_class(&state.fact_class).expect("checked by lower");
    let tree = inst
        .document(&plan.document)
        .ok_or_else(|| AlgebraError::Integrity(format!("fact document '{}' is not loaded", plan.document)))?;
    let reader = FactReader { inst, fact };

    // selection with the predicate condition
    let failure: RefCell<Option<AlgebraError>> = RefCell::new(None);
    let forest = [tree.as_fragment()];
    let selected = selection_where(&plan.pattern, &forest, |w| {
        if failure.borrow().is_some() {
            return false;
        }
        match reader.passes(&w.output_node(), &plan.predicates) {
            Ok(b) => b,
            Err(e) => {
                *failure.borrow_mut() = Some(e);
                false
            }
        }
    });
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }

    let mut rows: Vec<Row<T>> = Vec::with_capacity(selected.len());
    let mut row_of: HashMap<NodeId, usize> = HashMap::with_capacity(selected.len());
    for f in &selected {
        let mut coords = Vec::with_capacity(state.axes.len());
        for a in &state.axes {
            coords.push(match &a.source {
                AxisSource::Dimension { dimension, level } => reader.coordinate(f, dimension, level)?.to_string(),
                AxisSource::Pulled { source, .. } => reader.value(f, source)?.canonical(),
            });
        }
        let values = state.measures.iter().map(|m| reader.value(f, &m.source)).collect::<Result<Vec<T>, _>>()?;
        row_of.insert(f.root, rows.len());
        rows.push(Row { coords, values });
    }
    let row = |f: &Fragment<'_>| &rows[row_of[&f.root]];

    let mut cells: Vec<Cell<T>> = Vec::new();
    for g in &plan.groupings {
        let collapsed: Vec<bool> = g.keys.iter().map(|k| matches!(k, KeySpec::All { .. })).collect();
        let groups = group_forest(&selected, |f| {
            Some(
                row(f)
                    .coords
                    .iter()
                    .zip(&collapsed)
                    .map(|(c, &all)| if all { ALL.to_string() } else { c.clone() })
                    .collect::<Vec<String>>(),
            )
        })?;
        let mut per_measure = Vec::with_capacity(state.measures.len());
        for (mi, m) in state.measures.iter().enumerate() {
            per_measure.push(aggregate(&groups, |f| Some(row(f).values[mi]), m.function)?);
        }
        for (gi, grp) in groups.groups.iter().enumerate() {
            cells.push(Cell { coords: grp.key.clone(), values: per_measure.iter().map(|v| v[gi].1).collect() });
        }
    }

    let axes = layout(state, &cells);
    let ranks: Vec<HashMap<&str, usize>> = axes
        .iter()
        .map(|a| a.members.iter().enumerate().map(|(i, m)| (m.as_str(), i)).collect())
        .collect();
    let mut keyed: Vec<(Vec<usize>, Cell<T>)> = cells
        .into_iter()
        .map(|c| {
            let k = c
                .coords
                .iter()
                .zip(&ranks)
                .map(|(m, r)| r.get(m.as_str()).copied().unwrap_or(usize::MAX))
                .collect();
            (k, c)
        })
        .collect();
    keyed.sort_by(|a, b| a.0.cmp(&b.0));

    Ok(CubeView {
        axes,
        measures: state.measures.iter().map(|m| ViewMeasure { name: m.name.clone(), function: m.function }).collect(),
        cells: keyed.into_iter().map(|(_, c)| c).collect(),
        query: state.clone(),
    })
}

fn layout<T>(state: &QueryState, cells: &[Cell<T>]) -> Vec<ViewAxis> {
    let cube = state.cube_axes.clone().unwrap_or_default();
    state
        .axes
        .iter()
        .enumerate()
        .map(|(i, a)| {
            let present: HashSet<&str> = cells.iter().map(|c| c.coords[i].as_str()).collect();
            let (level, members) = match &a.source {
                AxisSource::Dimension { level, .. } => {
                    let mut m = a.member_order.clone();
                    for s in [UNASSIGNED, UNKNOWN] {
                        if present.contains(s) {
                            m.push(s.to_string());
                        }
                    }
                    (level.clone(), m)
                }
                AxisSource::Pulled { .. } => {
                    let mut vals: Vec<&str> = present.iter().copied().filter(|v| *v != ALL).collect();
                    vals.sort_by(|x, y| match (Decimal::from_str(x), Decimal::from_str(y)) {
                        (Ok(p), Ok(q)) => p.cmp(&q),
                        _ => x.cmp(y),
                    });
                    ("value".to_string(), vals.into_iter().map(str::to_string).collect())
                }
            };
            let id = a.id();
            ViewAxis { cube: cube.contains(&id), id, level, members }
        })
        .collect()
}
