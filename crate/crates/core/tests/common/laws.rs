//! Operator laws as plain functions of a warehouse index and seeds, driven
//! by proptest from `laws.rs` and from the acceptance suite.

use std::collections::BTreeMap;
use std::sync::OnceLock;

use proptest::prelude::*;
use proptest::test_runner::TestCaseError;
use rand::seq::SliceRandom;
use xolap_core::algebra::{base, evaluate, lower, AxisSource, MeasureSelection, MeasureSource, QueryState, ALL};
use xolap_core::model::AggregateFn;
use xolap_core::sample::{random_warehouse, RandomConfig};
use xolap_core::{Decimal, Instance, View};

pub const CASES: u32 = 100;

pub fn instances() -> &'static [Instance] {
    static CELL: OnceLock<Vec<Instance>> = OnceLock::new();
    CELL.get_or_init(|| {
        let mut v = vec![super::sample()];
        v.extend((0..6).map(|s| {
            let mut cfg = RandomConfig::small(100 + s);
            cfg.facts = 200;
            Instance::load_checked(&random_warehouse(&cfg), "").unwrap()
        }));
        v
    })
}

/// Warehouses whose every fact resolves at the finest level of every
/// dimension.
pub fn complete_instances() -> &'static [Instance] {
    static CELL: OnceLock<Vec<Instance>> = OnceLock::new();
    CELL.get_or_init(|| {
        let mut v = vec![super::sample()];
        v.extend((0..4).map(|s| {
            let mut cfg = RandomConfig::small(200 + s);
            cfg.facts = 200;
            cfg.missing = 0.0;
            cfg.coarse_refs = 0.0;
            Instance::load_checked(&random_warehouse(&cfg), "").unwrap()
        }));
        v
    })
}

fn state_for(inst: &Instance, seed: u64) -> QueryState {
    let p = super::random_pipeline(&mut super::rng(seed), inst, 6);
    p.apply(inst).unwrap()
}

fn eval(inst: &Instance, s: &QueryState) -> View {
    evaluate(inst, s).unwrap()
}

fn total_of(inst: &Instance, s: &QueryState) -> Option<Vec<Decimal>> {
    let mut flat = s.clone();
    flat.axes.clear();
    flat.cube_axes = None;
    eval(inst, &flat).cells.first().map(|c| c.values.clone())
}

pub fn config() -> ProptestConfig {
    ProptestConfig { cases: CASES, failure_persistence: None, ..ProptestConfig::default() }
}

pub fn roll_up_then_drill_down_is_identity(w: usize, seed: u64) -> Result<(), TestCaseError> {
    let inst = &instances()[w];
    let s = state_for(inst, seed);
    for (i, a) in s.axes.iter().enumerate() {
        let Some((dim, level)) = a.dimension() else { continue };
        let spec = inst.schema.dimension(dim).unwrap();
        let depth = spec.level(level).unwrap().depth;
        for coarser in spec.levels.iter().filter(|l| l.depth > depth) {
            let up = s.roll_up(inst, dim, &coarser.id).unwrap();
            let back = up.drill_down(inst, dim, level).unwrap();
            prop_assert_eq!(&back.axes[i], &base(inst, &s.fact_class, &[(dim, level)], None).unwrap().axes[0]);
            let mut expected = s.clone();
            expected.axes[i].member_order = back.axes[i].member_order.clone();
            prop_assert_eq!(eval(inst, &back).cell_map(), eval(inst, &expected).cell_map());
        }
    }
    Ok(())
}

pub fn rotate_relabels_and_inverts(w: usize, seed: u64) -> Result<(), TestCaseError> {
    let inst = &instances()[w];
    let s = state_for(inst, seed);
    let n = s.axes.len();
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(&mut super::rng(seed ^ 0x5eed));
    let r = s.rotate(&perm).unwrap();
    let mut inverse = vec![0; n];
    for (i, &p) in perm.iter().enumerate() {
        inverse[p] = i;
    }
    prop_assert_eq!(r.rotate(&inverse).unwrap(), s.clone());
    if n == 2 {
        prop_assert_eq!(s.rotate(&[1, 0]).unwrap().rotate(&[1, 0]).unwrap(), s.clone());
    }
    let original = eval(inst, &s).cell_map();
    let rotated = eval(inst, &r).cell_map();
    let relabeled: BTreeMap<Vec<String>, Vec<Decimal>> =
        original.into_iter().map(|(k, v)| (perm.iter().map(|&p| k[p].clone()).collect(), v)).collect();
    prop_assert_eq!(rotated, relabeled);
    Ok(())
}

pub fn switch_keeps_cells(w: usize, seed: u64) -> Result<(), TestCaseError> {
    let inst = &instances()[w];
    let s = state_for(inst, seed);
    let mut rng = super::rng(seed);
    for a in &s.axes {
        let Some((dim, _)) = a.dimension() else { continue };
        let mut order = a.member_order.clone();
        order.shuffle(&mut rng);
        let sw = s.switch(dim, &order).unwrap();
        let before = eval(inst, &s);
        let after = eval(inst, &sw);
        prop_assert_eq!(before.cell_map(), after.cell_map());
        let i = after.axes.iter().position(|x| x.id == dim).unwrap();
        prop_assert_eq!(&after.axes[i].members[..order.len()], order.as_slice());
    }
    Ok(())
}

pub fn cube_groupings_and_grand_total(w: usize, seed: u64, pick: u64) -> Result<(), TestCaseError> {
    let inst = &instances()[w];
    let mut s = state_for(inst, seed);
    s.cube_axes = None;
    let ids = s.axis_ids();
    prop_assume!(!ids.is_empty());
    let chosen: Vec<String> =
        ids.iter().enumerate().filter(|(i, _)| pick & (1 << i) != 0).map(|(_, x)| x.clone()).collect();
    let chosen = if chosen.is_empty() { ids.clone() } else { chosen };
    let c = s.cube(&chosen).unwrap();
    prop_assert_eq!(lower(&inst.schema, &c).unwrap().groupings.len(), 1 << chosen.len());
    if chosen.len() == ids.len() {
        let v = eval(inst, &c);
        let all: Vec<&str> = vec![ALL; ids.len()];
        prop_assert_eq!(v.get(&all).map(<[Decimal]>::to_vec), total_of(inst, &s));
    }
    Ok(())
}

pub fn pull_rearranges_sums(w: usize, seed: u64) -> Result<(), TestCaseError> {
    let inst = &instances()[w];
    let mut s = state_for(inst, seed);
    let fact = inst.schema.fact_class(&s.fact_class).unwrap();
    let m = fact.measures.iter().find(|m| m.aggregate == AggregateFn::Sum).unwrap().name.clone();
    prop_assume!(s.axes.iter().all(|a| a.id() != format!("μ:{m}")));
    s.cube_axes = None;
    s.measures = vec![MeasureSelection {
        name: m.clone(),
        function: AggregateFn::Sum,
        source: MeasureSource::Native { measure: m.clone() },
    }];
    let pulled = s.pull(&m).unwrap();
    prop_assert_eq!(&pulled.measures[0].name, "count");
    let mut rebuilt: BTreeMap<Vec<String>, Decimal> = BTreeMap::new();
    for c in &eval(inst, &pulled).cells {
        let (coords, value) = c.coords.split_at(c.coords.len() - 1);
        *rebuilt.entry(coords.to_vec()).or_default() += super::dec(&value[0]) * c.values[0];
    }
    let original: BTreeMap<Vec<String>, Decimal> =
        eval(inst, &s).cells.iter().map(|c| (c.coords.clone(), c.values[0])).collect();
    prop_assert_eq!(rebuilt, original);
    Ok(())
}

pub fn push_of_ones_is_count(w: usize, seed: u64) -> Result<(), TestCaseError> {
    let inst = &complete_instances()[w];
    let mut s = state_for(inst, seed);
    s.axes.retain(|a| matches!(a.source, AxisSource::Dimension { .. }));
    s.cube_axes = None;
    s.measures = vec![MeasureSelection { name: "count".into(), function: AggregateFn::Count, source: MeasureSource::Count }];
    let fact = inst.schema.fact_class(&s.fact_class).unwrap();
    let dim = &fact.dimension_links[(seed % fact.dimension_links.len() as u64) as usize];
    let finest = inst.schema.dimension(dim).unwrap().levels_by_depth()[0];
    let ones = ["unit", "unit_weight"].into_iter().find(|a| finest.attribute(a).is_some());
    prop_assume!(ones.is_some());
    let ones = ones.unwrap();
    let mut pushed = s.push(inst, dim, &finest.id, ones).unwrap();
    pushed.measures.remove(0);
    prop_assert_eq!(eval(inst, &pushed).cell_map(), eval(inst, &s).cell_map());
    Ok(())
}

pub fn sums_are_conserved(w: usize, seed: u64) -> Result<(), TestCaseError> {
    let inst = &instances()[w];
    let s = state_for(inst, seed);
    let v = eval(inst, &s);
    let Some(total) = total_of(inst, &s) else {
        prop_assert!(v.is_empty());
        return Ok(());
    };
    for (i, m) in s.measures.iter().enumerate() {
        if m.function != AggregateFn::Sum && m.function != AggregateFn::Count {
            continue;
        }
        let sum: Decimal = v.cells.iter().filter(|c| !c.coords.iter().any(|x| x == ALL)).map(|c| c.values[i]).sum();
        prop_assert_eq!(sum, total[i], "measure {}", m.name);
    }
    Ok(())
}

type Law = fn(usize, u64, u64) -> Result<(), TestCaseError>;

/// Every law with the warehouse count it draws from.
pub const ALL_LAWS: [(&str, usize, Law); 7] = [
    ("roll_up then drill_down is identity", 7, |w, s, _| roll_up_then_drill_down_is_identity(w, s)),
    ("rotate relabels and inverts", 7, |w, s, _| rotate_relabels_and_inverts(w, s)),
    ("switch keeps cells", 7, |w, s, _| switch_keeps_cells(w, s)),
    ("cube groupings and grand total", 7, cube_groupings_and_grand_total),
    ("pull rearranges sums", 7, |w, s, _| pull_rearranges_sums(w, s)),
    ("push of ones is count", 5, |w, s, _| push_of_ones_is_count(w, s)),
    ("sums are conserved", 7, |w, s, _| sums_are_conserved(w, s)),
];

/// Runs one law for `CASES` generated cases.
pub fn run_law(warehouses: usize, law: Law) -> Result<(), String> {
    let mut runner = proptest::test_runner::TestRunner::new(config());
    runner
        .run(&(0..warehouses, any::<u64>(), any::<u64>()), |(w, s, p)| law(w, s, p))
        .map_err(|e| e.to_string())
}
