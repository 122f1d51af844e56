//! Committed golden pipelines and the external processor cross-check.

use std::fs;
use std::path::{Path, PathBuf};

use xolap_core::algebra::{evaluate, Pipeline, QueryState};
use xolap_core::codegen::{compile, run_external, QueryDialect, PROCESSOR_ENV};
use xolap_core::model::AggregateFn;
use xolap_core::present::ResultSet;
use xolap_core::sample::{random_warehouse, sample_warehouse, RandomConfig};
use xolap_core::{Decimal, Instance};

pub const DIALECTS: [QueryDialect; 2] = [QueryDialect::Xq31, QueryDialect::Xq10];

pub fn golden_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden")
}

pub fn pipelines() -> Vec<(String, Pipeline)> {
    let mut out: Vec<(String, Pipeline)> = fs::read_dir(golden_dir().join("pipelines"))
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .map(|p| {
            let name = p.file_stem().unwrap().to_string_lossy().into_owned();
            let pipeline = Pipeline::parse(&fs::read_to_string(&p).unwrap()).unwrap();
            (name, pipeline)
        })
        .collect();
    out.sort_by(|a, b| a.0.cmp(&b.0));
    out
}

pub fn golden_path(name: &str, dialect: QueryDialect) -> PathBuf {
    golden_dir().join("xquery").join(format!("{name}.{dialect}.xq"))
}

/// Compiles every golden pipeline in both dialects and compares with the
/// committed text; with `bless`, rewrites the committed text instead.
pub fn golden_mismatches(bless: bool) -> Vec<String> {
    let inst = super::sample();
    let mut mismatches = Vec::new();
    for (name, p) in &pipelines() {
        let state = p.apply(&inst).unwrap_or_else(|e| panic!("{name}: {e}"));
        for d in DIALECTS {
            let q = compile(&state, &inst.schema, d).unwrap();
            if q != compile(&state, &inst.schema, d).unwrap() {
                mismatches.push(format!("{name}.{d}: nondeterministic"));
            }
            let path = golden_path(name, d);
            if bless {
                fs::create_dir_all(path.parent().unwrap()).unwrap();
                fs::write(&path, &q.text).unwrap();
                continue;
            }
            match fs::read_to_string(&path) {
                Ok(expected) if expected == q.text => {}
                Ok(_) => mismatches.push(format!("{name}.{d}: differs from {}", path.display())),
                Err(_) => mismatches.push(format!("{name}.{d}: missing {}", path.display())),
            }
        }
    }
    mismatches
}

pub fn processor_configured() -> bool {
    std::env::var(PROCESSOR_ENV).is_ok_and(|v| !v.trim().is_empty())
}

/// Averages divide, and processors differ in how many digits they keep.
pub fn tolerance(state: &QueryState) -> Decimal {
    if state.measures.iter().any(|m| m.function == AggregateFn::Avg) {
        Decimal::new(1, 15)
    } else {
        Decimal::ZERO
    }
}

/// Native against each dialect, then dialect against dialect.
pub fn cross_check(inst: &Instance, dir: &Path, label: &str, state: &QueryState, failures: &mut Vec<String>) {
    let native = ResultSet::from_view(&evaluate(inst, state).unwrap());
    let tol = tolerance(state);
    let mut executed = Vec::new();
    for d in DIALECTS {
        let q = compile(state, &inst.schema, d).unwrap();
        match run_external(&q, dir) {
            Ok(r) => {
                let diff = native.diff_within(&r, tol);
                if !diff.is_empty() {
                    failures.push(format!("{label}.{d}: {diff:?}"));
                }
                executed.push(r);
            }
            Err(e) => failures.push(format!("{label}.{d}: {e}")),
        }
    }
    if let [a, b] = executed.as_slice() {
        let diff = a.diff_within(b, tol);
        if !diff.is_empty() {
            failures.push(format!("{label}: xq31 vs xq10: {diff:?}"));
        }
    }
}

pub fn external_goldens() -> Vec<String> {
    let dir = tempfile::tempdir().unwrap();
    sample_warehouse().write_to(dir.path()).unwrap();
    let inst = Instance::open(dir.path()).unwrap();
    let mut failures = Vec::new();
    for (name, p) in pipelines() {
        cross_check(&inst, dir.path(), &name, &p.apply(&inst).unwrap(), &mut failures);
    }
    failures
}

/// Ragged parents, missing refs and coarse refs on random warehouses.
pub fn external_random(seeds: u64, per_warehouse: usize) -> Vec<String> {
    let mut failures = Vec::new();
    for seed in 0..seeds {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = RandomConfig::small(seed);
        cfg.facts = 120;
        random_warehouse(&cfg).write_to(dir.path()).unwrap();
        let inst = Instance::open(dir.path()).unwrap();
        let mut rng = super::rng(seed);
        for i in 0..per_warehouse {
            let p = super::random_pipeline(&mut rng, &inst, 6);
            let label = format!("seed {seed} #{i} {}", p.to_json());
            cross_check(&inst, dir.path(), &label, &p.apply(&inst).unwrap(), &mut failures);
        }
    }
    failures
}
