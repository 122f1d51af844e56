use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use super::{AlgebraError, Catalog};
use crate::model::{AggregateFn, DimensionSpec, FactSpec};
use crate::store::DimensionTable;

/// Axis ids of pulled measures are this prefix followed by the measure name.
pub const PULLED_PREFIX: &str = "μ:";

/// Where a measure's per-fact value comes from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum MeasureSource {
    /// A measure stored in the fact document.
    Native { measure: String },
    /// A numeric attribute of the fact's ancestor member at `level`.
    Pushed { dimension: String, level: String, attribute: String },
    /// Constant 1 per fact.
    Count,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MeasureSelection {
    pub name: String,
    pub function: AggregateFn,
    pub source: MeasureSource,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum AxisSource {
    Dimension { dimension: String, level: String },
    /// A measure turned into a coordinate: its canonical per-fact value.
    Pulled { name: String, source: MeasureSource },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Axis {
    pub source: AxisSource,
    /// Layout order of members. Empty for pulled axes, whose values are only
    /// known once facts are read.
    pub member_order: Vec<String>,
}

impl Axis {
    /// Dimension id, or `μ:<measure>` for a pulled axis.
    pub fn id(&self) -> String {
        match &self.source {
            AxisSource::Dimension { dimension, .. } => dimension.clone(),
            AxisSource::Pulled { name, .. } => format!("{PULLED_PREFIX}{name}"),
        }
    }

    pub fn dimension(&self) -> Option<(&str, &str)> {
        match &self.source {
            AxisSource::Dimension { dimension, level } => Some((dimension, level)),
            AxisSource::Pulled { .. } => None,
        }
    }
}

/// Facts pass when their ancestor at `level` is one of `members`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Predicate {
    pub dimension: String,
    pub level: String,
    pub members: Vec<String>,
}

/// The accumulated meaning of an operator pipeline.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QueryState {
    pub fact_class: String,
    pub predicates: Vec<Predicate>,
    pub axes: Vec<Axis>,
    pub measures: Vec<MeasureSelection>,
    /// Ids of the axes expanded by `cube`, in axis order.
    pub cube_axes: Option<Vec<String>>,
}

struct Ctx<'a, C: Catalog + ?Sized> {
    cat: &'a C,
    fact: &'a FactSpec,
}

impl<'a, C: Catalog + ?Sized> Ctx<'a, C> {
    fn new(cat: &'a C, fact_class: &str) -> Result<Self, AlgebraError> {
        let fact = cat
            .schema()
            .fact_class(fact_class)
            .ok_or_else(|| AlgebraError::UnknownFactClass(fact_class.to_string()))?;
        Ok(Self { cat, fact })
    }

    /// A dimension linked by the fact class, with its member table.
    fn dimension(&self, id: &str) -> Result<(&'a DimensionSpec, &'a DimensionTable), AlgebraError> {
        let unknown = || AlgebraError::UnknownDimension(id.to_string());
        if !self.fact.links(id) {
            return Err(unknown());
        }
        let spec = self.cat.schema().dimension(id).ok_or_else(unknown)?;
        let table = self.cat.table(id).ok_or_else(unknown)?;
        Ok((spec, table))
    }

    fn level_depth(&self, dimension: &str, level: &str) -> Result<u32, AlgebraError> {
        let (spec, _) = self.dimension(dimension)?;
        spec.level(level).map(|l| l.depth).ok_or_else(|| AlgebraError::UnknownLevel {
            dimension: dimension.to_string(),
            level: level.to_string(),
        })
    }

    fn level_members(&self, dimension: &str, level: &str) -> Result<Vec<String>, AlgebraError> {
        self.level_depth(dimension, level)?;
        let (_, table) = self.dimension(dimension)?;
        Ok(table.level_member_ids(level).unwrap_or_default())
    }

    fn check_member(&self, dimension: &str, level: &str, member: &str) -> Result<(), AlgebraError> {
        self.level_depth(dimension, level)?;
        let (_, table) = self.dimension(dimension)?;
        match table.member(member) {
            Some(m) if m.level_id == level => Ok(()),
            _ => Err(AlgebraError::UnknownMember {
                dimension: dimension.to_string(),
                level: level.to_string(),
                member: member.to_string(),
            }),
        }
    }
}

/// Pipeline entry point: `axes` at the given levels in document member
/// order, no predicates, and every native measure with its schema aggregate
/// (or the aggregates of `measures` when given).
pub fn base<C: Catalog + ?Sized>(
    cat: &C,
    fact_class: &str,
    axes: &[(&str, &str)],
    measures: Option<&[(&str, AggregateFn)]>,
) -> Result<QueryState, AlgebraError> {
    let ctx = Ctx::new(cat, fact_class)?;
    let mut seen = HashSet::new();
    let mut out_axes = Vec::new();
    for &(dimension, level) in axes {
        let member_order = ctx.level_members(dimension, level)?;
        if !seen.insert(dimension) {
            return Err(AlgebraError::DuplicateAxis(dimension.to_string()));
        }
        out_axes.push(Axis {
            source: AxisSource::Dimension { dimension: dimension.to_string(), level: level.to_string() },
            member_order,
        });
    }

    let native = |name: &str, function: AggregateFn| MeasureSelection {
        name: name.to_string(),
        function,
        source: MeasureSource::Native { measure: name.to_string() },
    };
    let measures = match measures {
        None => ctx.fact.measures.iter().map(|m| native(&m.name, m.aggregate)).collect(),
        Some(list) => {
            if list.is_empty() {
                return Err(AlgebraError::NoMeasures);
            }
            let mut names = HashSet::new();
            let mut out = Vec::new();
            for &(name, f) in list {
                if ctx.fact.measure(name).is_none() {
                    return Err(AlgebraError::UnknownMeasure(name.to_string()));
                }
                if !names.insert(name) {
                    return Err(AlgebraError::DuplicateMeasure(name.to_string()));
                }
                out.push(native(name, f));
            }
            out
        }
    };
    let mut state = QueryState {
        fact_class: fact_class.to_string(),
        predicates: Vec::new(),
        axes: out_axes,
        measures,
        cube_axes: None,
    };
    if state.measures.is_empty() {
        state.measures.push(count_measure());
    }
    Ok(state)
}

fn count_measure() -> MeasureSelection {
    MeasureSelection { name: "count".to_string(), function: AggregateFn::Count, source: MeasureSource::Count }
}

impl QueryState {
    pub fn axis_ids(&self) -> Vec<String> {
        self.axes.iter().map(Axis::id).collect()
    }

    fn dimension_axis(&self, dimension: &str) -> Result<usize, AlgebraError> {
        self.axes
            .iter()
            .position(|a| matches!(&a.source, AxisSource::Dimension { dimension: d, .. } if d == dimension))
            .ok_or_else(|| AlgebraError::NotAnAxis(dimension.to_string()))
    }

    fn remove_axis(&mut self, idx: usize) {
        let id = self.axes.remove(idx).id();
        if let Some(cube) = &mut self.cube_axes {
            cube.retain(|a| *a != id);
            if cube.is_empty() {
                self.cube_axes = None;
            }
        }
    }

    /// Restricts facts to one member and drops the dimension's axis, if any.
    pub fn slice<C: Catalog + ?Sized>(
        &self,
        cat: &C,
        dimension: &str,
        level: &str,
        member: &str,
    ) -> Result<QueryState, AlgebraError> {
        let ctx = Ctx::new(cat, &self.fact_class)?;
        ctx.check_member(dimension, level, member)?;
        let mut next = self.clone();
        next.predicates.push(Predicate {
            dimension: dimension.to_string(),
            level: level.to_string(),
            members: vec![member.to_string()],
        });
        if let Ok(idx) = next.dimension_axis(dimension) {
            next.remove_axis(idx);
        }
        Ok(next)
    }

    /// Adds member-set predicates: conjunctive across entries, disjunctive
    /// within a set. Axes are unchanged.
    pub fn dice<C: Catalog + ?Sized>(&self, cat: &C, predicates: &[Predicate]) -> Result<QueryState, AlgebraError> {
        let ctx = Ctx::new(cat, &self.fact_class)?;
        let mut next = self.clone();
        for p in predicates {
            ctx.level_depth(&p.dimension, &p.level)?;
            if p.members.is_empty() {
                return Err(AlgebraError::EmptyMemberSet(p.dimension.clone()));
            }
            for m in &p.members {
                ctx.check_member(&p.dimension, &p.level, m)?;
            }
            let mut members = p.members.clone();
            let mut seen = HashSet::new();
            members.retain(|m| seen.insert(m.clone()));
            next.predicates.push(Predicate { dimension: p.dimension.clone(), level: p.level.clone(), members });
        }
        Ok(next)
    }

    fn relevel<C: Catalog + ?Sized>(
        &self,
        cat: &C,
        dimension: &str,
        to_level: &str,
        coarser: bool,
    ) -> Result<QueryState, AlgebraError> {
        let ctx = Ctx::new(cat, &self.fact_class)?;
        let idx = self.dimension_axis(dimension)?;
        let (_, from) = self.axes[idx].dimension().expect("dimension axis");
        let from_depth = ctx.level_depth(dimension, from)?;
        let to_depth = ctx.level_depth(dimension, to_level)?;
        if coarser && to_depth <= from_depth {
            return Err(AlgebraError::NotCoarser { from: from.to_string(), to: to_level.to_string() });
        }
        if !coarser && to_depth >= from_depth {
            return Err(AlgebraError::NotFiner { from: from.to_string(), to: to_level.to_string() });
        }
        let mut next = self.clone();
        next.axes[idx] = Axis {
            source: AxisSource::Dimension { dimension: dimension.to_string(), level: to_level.to_string() },
            member_order: ctx.level_members(dimension, to_level)?,
        };
        Ok(next)
    }

    /// Moves a dimension axis to a strictly coarser level.
    pub fn roll_up<C: Catalog + ?Sized>(&self, cat: &C, dimension: &str, to_level: &str) -> Result<QueryState, AlgebraError> {
        self.relevel(cat, dimension, to_level, true)
    }

    /// Moves a dimension axis to a strictly finer level. Evaluation always
    /// starts from the facts, so no finer aggregate needs to be kept.
    pub fn drill_down<C: Catalog + ?Sized>(&self, cat: &C, dimension: &str, to_level: &str) -> Result<QueryState, AlgebraError> {
        self.relevel(cat, dimension, to_level, false)
    }

    /// Reorders axes: new axis `i` is old axis `permutation[i]`.
    pub fn rotate(&self, permutation: &[usize]) -> Result<QueryState, AlgebraError> {
        let n = self.axes.len();
        let mut seen = vec![false; n];
        let valid = permutation.len() == n
            && permutation.iter().all(|&p| p < n && !std::mem::replace(&mut seen[p], true));
        if !valid {
            return Err(AlgebraError::InvalidPermutation(permutation.to_vec()));
        }
        let mut next = self.clone();
        next.axes = permutation.iter().map(|&p| self.axes[p].clone()).collect();
        if let Some(cube) = &mut next.cube_axes {
            let order = next.axes.iter().map(Axis::id).collect::<Vec<_>>();
            cube.sort_by_key(|id| order.iter().position(|o| o == id));
        }
        Ok(next)
    }

    /// Replaces the member order of one dimension axis.
    pub fn switch(&self, dimension: &str, order: &[String]) -> Result<QueryState, AlgebraError> {
        let idx = self.dimension_axis(dimension)?;
        let current = &self.axes[idx].member_order;
        let mut a: Vec<&String> = current.iter().collect();
        let mut b: Vec<&String> = order.iter().collect();
        a.sort();
        b.sort();
        if a != b {
            let missing: Vec<_> = current.iter().filter(|m| !order.contains(m)).collect();
            let extra: Vec<_> = order.iter().filter(|m| !current.contains(m)).collect();
            return Err(AlgebraError::NotAPermutation(format!("missing {missing:?}, unexpected {extra:?}")));
        }
        let mut next = self.clone();
        next.axes[idx].member_order = order.to_vec();
        Ok(next)
    }

    /// Adds the measure `dimension.level.attribute` (sum of the attribute of
    /// each fact's ancestor at `level`; sentinel coordinates contribute 0).
    pub fn push<C: Catalog + ?Sized>(
        &self,
        cat: &C,
        dimension: &str,
        level: &str,
        attribute: &str,
    ) -> Result<QueryState, AlgebraError> {
        let ctx = Ctx::new(cat, &self.fact_class)?;
        ctx.level_depth(dimension, level)?;
        let (spec, _) = ctx.dimension(dimension)?;
        let attr = spec
            .level(level)
            .and_then(|l| l.attribute(attribute))
            .ok_or_else(|| AlgebraError::UnknownAttribute { level: level.to_string(), attribute: attribute.to_string() })?;
        if !attr.ty.is_numeric() {
            return Err(AlgebraError::NonNumericAttribute(attribute.to_string()));
        }
        let name = format!("{dimension}.{level}.{attribute}");
        if self.measures.iter().any(|m| m.name == name) {
            return Err(AlgebraError::DuplicateMeasure(name));
        }
        let mut next = self.clone();
        next.measures.push(MeasureSelection {
            name,
            function: AggregateFn::Sum,
            source: MeasureSource::Pushed {
                dimension: dimension.to_string(),
                level: level.to_string(),
                attribute: attribute.to_string(),
            },
        });
        Ok(next)
    }

    /// Turns a measure into a trailing pseudo-dimension axis `μ:<name>`. If
    /// no measure is left, an implicit `count` is added.
    pub fn pull(&self, measure: &str) -> Result<QueryState, AlgebraError> {
        let idx = self
            .measures
            .iter()
            .position(|m| m.name == measure)
            .ok_or_else(|| AlgebraError::UnknownMeasure(measure.to_string()))?;
        let axis_id = format!("{PULLED_PREFIX}{measure}");
        if self.axes.iter().any(|a| a.id() == axis_id) {
            return Err(AlgebraError::DuplicateAxis(axis_id));
        }
        let mut next = self.clone();
        let m = next.measures.remove(idx);
        next.axes.push(Axis {
            source: AxisSource::Pulled { name: m.name, source: m.source },
            member_order: Vec::new(),
        });
        if next.measures.is_empty() {
            next.measures.push(count_measure());
        }
        Ok(next)
    }

    /// Requests the 2^k grouping lattice over the given axes.
    pub fn cube(&self, axes: &[String]) -> Result<QueryState, AlgebraError> {
        if axes.is_empty() {
            return Err(AlgebraError::EmptySubset);
        }
        let ids = self.axis_ids();
        for a in axes {
            if !ids.contains(a) {
                return Err(AlgebraError::NotAnAxis(a.clone()));
            }
        }
        let mut next = self.clone();
        next.cube_axes = Some(ids.into_iter().filter(|id| axes.contains(id)).collect());
        Ok(next)
    }
}
