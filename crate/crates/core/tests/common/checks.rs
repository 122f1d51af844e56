//! Whole-suite checks shared by the focused test targets and the
//! acceptance run. Each returns a one-line summary or the first failure.

use std::collections::BTreeSet;

use xolap_core::algebra::{base, evaluate, MeasureSelection, MeasureSource, QueryState, ALL};
use xolap_core::model::AggregateFn;
use xolap_core::sample::{random_warehouse, sample_warehouse, RandomConfig};
use xolap_core::store::{validate_warehouse, UNASSIGNED, UNKNOWN};
use xolap_core::{Decimal, Instance};

use super::corrupt::CORPUS;
use super::{dec, normalized, op_names, oracle, random_pipeline, rng, CellMap, OPS};

fn key(k: &[&str]) -> Vec<String> {
    k.iter().map(|s| s.to_string()).collect()
}

type Expected<'a> = Vec<(&'a [&'a str], &'a str)>;

fn expect(label: &str, got: &CellMap, want: &[(&[&str], &str)]) -> Result<(), String> {
    let want: CellMap = want.iter().map(|(k, v)| (key(k), vec![dec(v)])).collect();
    let got = normalized(got.clone());
    if got != normalized(want.clone()) {
        return Err(format!("{label}: got {got:?}, want {want:?}"));
    }
    Ok(())
}

/// Oracle and engine agree on the fixed SampleWH answers.
pub fn fixed_answers() -> Result<String, String> {
    let inst = super::sample();
    let month = base(&inst, "sales", &[("d_date", "month")], None).unwrap();
    let total = base(&inst, "sales", &[], None).unwrap();
    let store = base(&inst, "sales", &[("d_store", "store")], None).unwrap();
    let s1 = store.slice(&inst, "d_store", "store", "s1").unwrap();
    let cube = base(&inst, "sales", &[("d_date", "month"), ("d_product", "category")], None)
        .unwrap()
        .cube(&["d_date".into(), "d_product".into()])
        .unwrap();
    let cases: Vec<(&str, QueryState, Expected)> = vec![
        ("grand total", total, vec![(&[], "150")]),
        ("month rollup", month, vec![(&["Jan"], "60"), (&["Feb"], "90")]),
        ("slice store s1", s1, vec![(&[], "70")]),
        (
            "cube month x category",
            cube,
            vec![
                (&["Jan", "catA"], "60"),
                (&["Feb", "catA"], "50"),
                (&["Feb", "catB"], "40"),
                (&["Jan", ALL], "60"),
                (&["Feb", ALL], "90"),
                (&[ALL, "catA"], "110"),
                (&[ALL, "catB"], "40"),
                (&[ALL, ALL], "150"),
            ],
        ),
    ];
    for (label, state, want) in &cases {
        expect(&format!("{label} (oracle)"), &oracle(&inst, state), want)?;
        expect(&format!("{label} (engine)"), &evaluate(&inst, state).unwrap().cell_map(), want)?;
    }
    Ok(format!("{} queries", cases.len()))
}

/// Random pipelines over random warehouses equal the oracle exactly.
pub fn oracle_equivalence(warehouses: u64, per_warehouse: usize, max_len: usize) -> Result<String, String> {
    let mut seen = BTreeSet::new();
    let mut cells = 0;
    for seed in 0..warehouses {
        let inst = Instance::load_checked(&random_warehouse(&RandomConfig::small(seed)), "")
            .map_err(|e| format!("seed {seed}: {e}"))?;
        let mut r = rng(1000 + seed);
        for i in 0..per_warehouse {
            let p = random_pipeline(&mut r, &inst, max_len);
            if p.ops.len() > max_len {
                return Err(format!("seed {seed} #{i}: {} ops", p.ops.len()));
            }
            seen.extend(op_names(&p));
            let state = p.apply(&inst).map_err(|e| format!("seed {seed} #{i}: {e}"))?;
            let got = normalized(evaluate(&inst, &state).map_err(|e| format!("seed {seed} #{i}: {e}"))?.cell_map());
            let want = normalized(oracle(&inst, &state));
            if got != want {
                return Err(format!("seed {seed} #{i}: {} differs from the oracle", p.to_json()));
            }
            cells += got.len();
        }
    }
    if let Some(missing) = OPS.iter().find(|op| !seen.contains(*op)) {
        return Err(format!("operator {missing} never generated"));
    }
    Ok(format!("{} pipelines, {cells} cells", warehouses as usize * per_warehouse))
}

/// Each corrupted warehouse yields exactly one diagnostic at the defect;
/// clean warehouses yield none.
pub fn validation_precision() -> Result<String, String> {
    if CORPUS.len() < 15 {
        return Err(format!("corpus has only {} warehouses", CORPUS.len()));
    }
    for d in CORPUS {
        let diags = validate_warehouse(&d.apply(), "").map_err(|e| format!("{}: {e}", d.name))?;
        let ok = diags.len() == 1
            && diags[0].document == d.document
            && diags[0].path.contains(d.location)
            && diags[0].message.contains(d.message);
        if !ok {
            return Err(format!("{}: {diags:?}", d.name));
        }
    }
    let mut clean = vec![("SampleWH".to_string(), sample_warehouse())];
    clean.extend((0..10).map(|s| (format!("random {s}"), random_warehouse(&RandomConfig::small(s)))));
    for (name, files) in &clean {
        let diags = validate_warehouse(files, "").map_err(|e| format!("{name}: {e}"))?;
        if !diags.is_empty() {
            return Err(format!("{name}: false positives {diags:?}"));
        }
    }
    Ok(format!("{} corrupted, {} clean", CORPUS.len(), clean.len()))
}

fn with_count(mut s: QueryState) -> QueryState {
    s.measures.push(MeasureSelection { name: "count".into(), function: AggregateFn::Count, source: MeasureSource::Count });
    s
}

/// On ragged warehouses with missing references, every single-axis rollup
/// conserves the grand total, and the sentinel cells hold exactly the
/// affected facts.
pub fn ragged_and_missing(seeds: std::ops::Range<u64>) -> Result<String, String> {
    let (mut unknown, mut unassigned, mut rollups) = (0usize, 0usize, 0usize);
    for seed in seeds {
        let mut cfg = RandomConfig::desk(2000, seed);
        cfg.ragged = 0.10;
        cfg.missing = 0.05;
        let inst = Instance::load_checked(&random_warehouse(&cfg), "").map_err(|e| format!("seed {seed}: {e}"))?;
        let fact = &inst.schema.fact_classes[0];
        let facts = inst.facts(&fact.id).unwrap();
        let total = with_count(base(&inst, &fact.id, &[], None).unwrap());
        let grand = evaluate(&inst, &total).unwrap().cells[0].values.clone();
        for dim in &fact.dimension_links {
            let missing = facts.iter().filter(|f| f.dimension_refs[dim] == UNKNOWN).count();
            for level in &inst.schema.dimension(dim).unwrap().levels {
                rollups += 1;
                let label = format!("seed {seed} {dim}@{}", level.id);
                let s = with_count(base(&inst, &fact.id, &[(dim, &level.id)], None).unwrap());
                let view = evaluate(&inst, &s).unwrap();
                let count_at = view.measure_index("count").unwrap();
                for (i, m) in s.measures.iter().enumerate() {
                    if m.function == AggregateFn::Sum || m.function == AggregateFn::Count {
                        let sum: Decimal = view.cells.iter().map(|c| c.values[i]).sum();
                        if sum != grand[i] {
                            return Err(format!("{label}: {} sums to {sum}, total {}", m.name, grand[i]));
                        }
                    }
                }
                let got = |member: &str| view.get(&[member]).map(|v| v[count_at]).unwrap_or_default();
                let want = oracle(&inst, &s);
                let want = |member: &str| want.get(&key(&[member])).map(|v| v[count_at]).unwrap_or_default();
                if got(UNKNOWN) != Decimal::from(missing) || want(UNKNOWN) != Decimal::from(missing) {
                    return Err(format!("{label}: {UNKNOWN} holds {}, {missing} facts lack the reference", got(UNKNOWN)));
                }
                if got(UNASSIGNED) != want(UNASSIGNED) {
                    return Err(format!("{label}: {UNASSIGNED} holds {}, oracle {}", got(UNASSIGNED), want(UNASSIGNED)));
                }
                unknown += missing;
                unassigned += usize::try_from(got(UNASSIGNED).mantissa()).unwrap();
            }
        }
    }
    if unknown == 0 || unassigned == 0 {
        return Err(format!("vacuous: {unknown} unknown, {unassigned} unassigned facts"));
    }
    Ok(format!("{rollups} rollups, {unknown} unknown and {unassigned} unassigned fact placements"))
}
