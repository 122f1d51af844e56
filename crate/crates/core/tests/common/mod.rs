//! Shared fixtures: the flat group-by oracle and a random pipeline generator.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use xolap_core::algebra::{AxisRef, AxisSource, MeasureSource, Op, Pipeline, PredicateSpec, QueryState};
use xolap_core::model::AggregateFn;
use xolap_core::sample::{random_warehouse, sample_warehouse, RandomConfig};
use xolap_core::store::{DimensionTable, UNASSIGNED, UNKNOWN};
use xolap_core::{Decimal, Instance};

pub type CellMap = BTreeMap<Vec<String>, Vec<Decimal>>;

pub fn sample() -> Instance {
    Instance::load_checked(&sample_warehouse(), "").expect("SampleWH loads")
}

pub fn random(seed: u64) -> Instance {
    Instance::load_checked(&random_warehouse(&RandomConfig::small(seed)), "").expect("random warehouse loads")
}

pub fn dec(s: &str) -> Decimal {
    Decimal::from_str(s).unwrap()
}

// ── flat oracle ────────────────────────────────────────────────────────

/// Ancestor of `member` at `level`, walking parent links with depths taken
/// from the schema.
fn walk(inst: &Instance, dimension: &str, member: &str, level: &str) -> String {
    if member == UNKNOWN {
        return UNKNOWN.to_string();
    }
    let spec = inst.schema.dimension(dimension).unwrap();
    let depth_of = |l: &str| spec.levels.iter().find(|x| x.id == l).unwrap().depth;
    let target = depth_of(level);
    let table: &DimensionTable = inst.dimension(dimension).unwrap();
    let mut cur = table.member(member).unwrap();
    loop {
        let d = depth_of(&cur.level_id);
        if d == target {
            return cur.member_id.clone();
        }
        if d > target {
            return UNASSIGNED.to_string();
        }
        match cur.parent.as_ref().and_then(|p| table.member(&p.member)) {
            Some(p) => cur = p,
            None => return UNASSIGNED.to_string(),
        }
    }
}

fn fact_coord(inst: &Instance, refs: &BTreeMap<String, String>, dimension: &str, level: &str) -> String {
    let member = refs.get(dimension).map(String::as_str).unwrap_or(UNKNOWN);
    walk(inst, dimension, member, level)
}

fn fact_value(
    inst: &Instance,
    refs: &BTreeMap<String, String>,
    measures: &BTreeMap<String, Decimal>,
    source: &MeasureSource,
) -> Decimal {
    match source {
        MeasureSource::Count => Decimal::ONE,
        MeasureSource::Native { measure } => measures[measure],
        MeasureSource::Pushed { dimension, level, attribute } => {
            let c = fact_coord(inst, refs, dimension, level);
            inst.dimension(dimension)
                .unwrap()
                .member(&c)
                .and_then(|m| m.attribute_values.get(attribute))
                .and_then(|v| v.to_string().parse::<Decimal>().ok())
                .unwrap_or(Decimal::ZERO)
        }
    }
}

fn canonical(d: Decimal) -> String {
    let n = d.normalize();
    if n.is_zero() {
        "0".into()
    } else {
        n.to_string()
    }
}

fn finish(f: AggregateFn, xs: &[Decimal]) -> Decimal {
    match f {
        AggregateFn::Sum => xs.iter().copied().sum(),
        AggregateFn::Count => Decimal::from(xs.len()),
        AggregateFn::Min => xs.iter().copied().min().unwrap(),
        AggregateFn::Max => xs.iter().copied().max().unwrap(),
        AggregateFn::Avg => xs.iter().copied().sum::<Decimal>() / Decimal::from(xs.len()),
    }
}

/// Group-by over the fact records: filter on the predicates, then one pass
/// per collapse subset of the cube axes.
pub fn oracle(inst: &Instance, q: &QueryState) -> CellMap {
    let facts = inst.facts(&q.fact_class).unwrap();
    let cube: Vec<usize> = match &q.cube_axes {
        None => vec![],
        Some(ids) => (0..q.axes.len()).filter(|&i| ids.contains(&q.axes[i].id())).collect(),
    };
    let mut groups: BTreeMap<Vec<String>, Vec<Vec<Decimal>>> = BTreeMap::new();
    for f in facts {
        let pass = q.predicates.iter().all(|p| {
            let c = fact_coord(inst, &f.dimension_refs, &p.dimension, &p.level);
            p.members.contains(&c)
        });
        if !pass {
            continue;
        }
        let coords: Vec<String> = q
            .axes
            .iter()
            .map(|a| match &a.source {
                AxisSource::Dimension { dimension, level } => fact_coord(inst, &f.dimension_refs, dimension, level),
                AxisSource::Pulled { source, .. } => {
                    canonical(fact_value(inst, &f.dimension_refs, &f.measure_values, source))
                }
            })
            .collect();
        let values: Vec<Decimal> =
            q.measures.iter().map(|m| fact_value(inst, &f.dimension_refs, &f.measure_values, &m.source)).collect();
        for subset in 0..(1usize << cube.len()) {
            let mut key = coords.clone();
            for (b, &axis) in cube.iter().enumerate() {
                if subset & (1 << b) != 0 {
                    key[axis] = "*".into();
                }
            }
            let slot = groups.entry(key).or_insert_with(|| vec![Vec::new(); values.len()]);
            for (s, v) in slot.iter_mut().zip(&values) {
                s.push(*v);
            }
        }
    }
    groups
        .into_iter()
        .map(|(k, vs)| (k, q.measures.iter().zip(&vs).map(|(m, xs)| finish(m.function, xs)).collect()))
        .collect()
}

/// Cell map of a view with values normalized for comparison.
pub fn normalized(map: CellMap) -> CellMap {
    map.into_iter().map(|(k, v)| (k, v.into_iter().map(|d| d.normalize()).collect())).collect()
}

// ── random pipelines ───────────────────────────────────────────────────

pub const OPS: [&str; 9] = ["slice", "dice", "rollup", "drilldown", "rotate", "switch", "push", "pull", "cube"];

fn levels(inst: &Instance, dim: &str) -> Vec<(String, u32)> {
    let spec = inst.schema.dimension(dim).unwrap();
    spec.levels.iter().map(|l| (l.id.clone(), l.depth)).collect()
}

fn populated_levels(inst: &Instance, dim: &str) -> Vec<String> {
    let table = inst.dimension(dim).unwrap();
    levels(inst, dim)
        .into_iter()
        .map(|(l, _)| l)
        .filter(|l| table.level_members(l).map(|mut m| m.next().is_some()).unwrap_or(false))
        .collect()
}

fn op_of_kind(rng: &mut ChaCha8Rng, inst: &Instance, state: &QueryState, kind: &str) -> Option<Op> {
    let fact = inst.schema.fact_class(&state.fact_class).unwrap();
    let dims: Vec<String> = fact.dimension_links.clone();
    let dim_axes: Vec<(String, String)> =
        state.axes.iter().filter_map(|a| a.dimension().map(|(d, l)| (d.to_string(), l.to_string()))).collect();
    match kind {
        "slice" => {
            let d = dims.choose(rng)?.clone();
            let level = populated_levels(inst, &d).choose(rng)?.clone();
            let members = inst.dimension(&d)?.level_member_ids(&level)?;
            Some(Op::Slice { dimension: d, level, member: members.choose(rng)?.clone() })
        }
        "dice" => {
            let n = rng.gen_range(1..=2);
            let mut predicates = Vec::new();
            for _ in 0..n {
                let d = dims.choose(rng)?.clone();
                let level = populated_levels(inst, &d).choose(rng)?.clone();
                let all = inst.dimension(&d)?.level_member_ids(&level)?;
                let k = rng.gen_range(1..=all.len());
                let members = all.choose_multiple(rng, k).cloned().collect();
                predicates.push(PredicateSpec { dimension: d, level, members });
            }
            Some(Op::Dice { predicates })
        }
        "rollup" | "drilldown" => {
            let (d, l) = dim_axes.choose(rng)?.clone();
            let ls = levels(inst, &d);
            let from = ls.iter().find(|x| x.0 == l)?.1;
            let targets: Vec<&(String, u32)> =
                ls.iter().filter(|x| if kind == "rollup" { x.1 > from } else { x.1 < from }).collect();
            let to = targets.choose(rng)?.0.clone();
            Some(if kind == "rollup" {
                Op::Rollup { dimension: d, level: to }
            } else {
                Op::Drilldown { dimension: d, level: to }
            })
        }
        "rotate" => {
            let mut permutation: Vec<usize> = (0..state.axes.len()).collect();
            permutation.shuffle(rng);
            Some(Op::Rotate { permutation })
        }
        "switch" => {
            let (d, _) = dim_axes.choose(rng)?.clone();
            let axis = state.axes.iter().find(|a| a.dimension().map(|x| x.0) == Some(d.as_str()))?;
            let mut order = axis.member_order.clone();
            order.shuffle(rng);
            Some(Op::Switch { dimension: d, order })
        }
        "push" => {
            let d = dims.choose(rng)?.clone();
            let spec = inst.schema.dimension(&d)?;
            let level = spec.levels.choose(rng)?;
            let numeric: Vec<_> = level.attributes.iter().filter(|a| a.ty.is_numeric()).collect();
            let attr = numeric.choose(rng)?;
            let name = format!("{d}.{}.{}", level.id, attr.name);
            if state.measures.iter().any(|m| m.name == name) {
                return None;
            }
            Some(Op::Push { dimension: d, level: level.id.clone(), attribute: attr.name.clone() })
        }
        "pull" => {
            let m = state.measures.choose(rng)?;
            Some(Op::Pull { measure: m.name.clone() })
        }
        "cube" => {
            let ids = state.axis_ids();
            if ids.is_empty() {
                return None;
            }
            let k = rng.gen_range(1..=ids.len());
            Some(Op::Cube { axes: ids.choose_multiple(rng, k).cloned().collect() })
        }
        _ => unreachable!(),
    }
}

/// A valid pipeline of at most `max_len` ops (base included) over the
/// first fact class of `inst`.
pub fn random_pipeline(rng: &mut ChaCha8Rng, inst: &Instance, max_len: usize) -> Pipeline {
    let fact = &inst.schema.fact_classes[0];
    let mut dims = fact.dimension_links.clone();
    dims.shuffle(rng);
    let n_axes = rng.gen_range(0..=dims.len().min(3));
    let axes: Vec<AxisRef> = dims[..n_axes]
        .iter()
        .filter_map(|d| {
            let level = populated_levels(inst, d).choose(rng)?.clone();
            Some(AxisRef { dimension: d.clone(), level })
        })
        .collect();
    let measures = if rng.gen_bool(0.2) {
        let funcs = [AggregateFn::Sum, AggregateFn::Count, AggregateFn::Min, AggregateFn::Max, AggregateFn::Avg];
        Some(
            fact.measures
                .iter()
                .map(|m| xolap_core::algebra::MeasureOverride { name: m.name.clone(), aggregate: *funcs.choose(rng).unwrap() })
                .collect(),
        )
    } else {
        None
    };
    let mut ops = vec![Op::Base { fact: fact.id.clone(), axes, measures }];
    let mut state = Pipeline { ops: ops.clone() }.apply(inst).expect("random base is valid");
    let steps = rng.gen_range(0..max_len);
    let mut attempts = 0;
    while ops.len() <= steps && attempts < 50 {
        attempts += 1;
        let kind = *OPS.choose(rng).unwrap();
        let Some(op) = op_of_kind(rng, inst, &state, kind) else { continue };
        ops.push(op);
        match (Pipeline { ops: ops.clone() }).apply(inst) {
            Ok(s) => state = s,
            Err(_) => {
                ops.pop();
            }
        }
    }
    Pipeline { ops }
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn op_names(p: &Pipeline) -> BTreeSet<&'static str> {
    p.ops.iter().map(Op::name).collect()
}

pub mod corrupt;
pub mod laws;
pub mod checks;
pub mod golden;
