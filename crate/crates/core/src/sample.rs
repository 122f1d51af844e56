//! Warehouse fixtures: the fixed desk-scale `SampleWH` and seeded random
//! warehouses for property tests and benchmarks.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::model::{
    serialize_schema, AggregateFn, AttributeSpec, DimensionSpec, FactSpec, LevelSpec, MeasureSpec, NumericType,
    ScalarType, WarehouseSchema, MODEL_FILE,
};
use crate::store::WarehouseFiles;
use crate::xml::tag;

/// A member as written into a dimension document.
struct MemberDoc {
    id: String,
    attributes: Vec<(String, String)>,
    parent: Option<(String, String)>,
}

struct FactDoc {
    measures: Vec<(String, String)>,
    refs: Vec<(String, String)>,
}

fn render_dimension(id: &str, levels: &[(String, Vec<MemberDoc>)]) -> String {
    let mut out = String::from("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    out.push_str(&tag("dimension", &[("id", id)], false));
    out.push('\n');
    for (level, members) in levels {
        if members.is_empty() {
            out.push_str(&format!("  {}\n", tag("Level", &[("id", level)], true)));
            continue;
        }
        out.push_str(&format!("  {}\n", tag("Level", &[("id", level)], false)));
        for m in members {
            out.push_str(&format!("    {}\n", tag("instance", &[("id", &m.id)], false)));
            for (name, value) in &m.attributes {
                out.push_str(&format!("      {}\n", tag("attribute", &[("name", name), ("value", value)], true)));
            }
            if let Some((level, idref)) = &m.parent {
                out.push_str(&format!("      {}\n", tag("parent", &[("level", level), ("idref", idref)], true)));
            }
            out.push_str("    </instance>\n");
        }
        out.push_str("  </Level>\n");
    }
    out.push_str("</dimension>\n");
    out
}

fn render_facts(id: &str, facts: &[FactDoc]) -> String {
    let mut out = String::from("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    if facts.is_empty() {
        out.push_str(&tag("FactDoc", &[("id", id)], true));
        out.push('\n');
        return out;
    }
    out.push_str(&tag("FactDoc", &[("id", id)], false));
    out.push('\n');
    for f in facts {
        out.push_str("  <fact>\n");
        for (name, value) in &f.measures {
            out.push_str(&format!("    {}\n", tag("measure", &[("name", name), ("value", value)], true)));
        }
        for (dim, member) in &f.refs {
            out.push_str(&format!("    {}\n", tag("dimension", &[("idref", dim), ("value-id", member)], true)));
        }
        out.push_str("  </fact>\n");
    }
    out.push_str("</FactDoc>\n");
    out
}

fn attr(name: &str, ty: ScalarType, key: bool) -> AttributeSpec {
    AttributeSpec { name: name.into(), ty, key }
}

fn level(id: &str, depth: u32, attributes: Vec<AttributeSpec>) -> LevelSpec {
    LevelSpec { id: id.into(), depth, attributes }
}

fn member(id: &str, attrs: &[(&str, &str)], parent: Option<(&str, &str)>) -> MemberDoc {
    MemberDoc {
        id: id.into(),
        attributes: attrs.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect(),
        parent: parent.map(|(l, p)| (l.into(), p.into())),
    }
}

/// The canonical `SampleWH` warehouse.
///
/// * `d_date`: day < month < year; d1 = Jan-01, d2 = Jan-02, d3 = Feb-01,
///   d4 = Feb-02; months Jan, Feb; year 2007.
/// * `d_product`: item < category; p1, p2 in catA, p3 in catB.
/// * `d_store`: store < city; s1, s2 in one city.
/// * fact class `sales` (amount, integer, sum): f0 = (d1, p1, s1, 10),
///   f1 = (d1, p2, s1, 20), f2 = (d2, p1, s2, 30), f3 = (d3, p3, s1, 40),
///   f4 = (d4, p2, s2, 50).
pub fn sample_warehouse() -> WarehouseFiles {
    let key = |n: &str| attr(n, ScalarType::String, true);
    let schema = WarehouseSchema {
        dimensions: vec![
            DimensionSpec {
                id: "d_date".into(),
                document_path: "dimension_date.xml".into(),
                levels: vec![
                    level(
                        "day",
                        1,
                        vec![key("name"), attr("date", ScalarType::Date, false), attr("day_num", ScalarType::Integer, false)],
                    ),
                    level("month", 2, vec![key("name"), attr("month_num", ScalarType::Integer, false)]),
                    level("year", 3, vec![key("name")]),
                ],
            },
            DimensionSpec {
                id: "d_product".into(),
                document_path: "dimension_product.xml".into(),
                levels: vec![
                    level(
                        "item",
                        1,
                        vec![
                            key("name"),
                            attr("unit_weight", ScalarType::Integer, false),
                            attr("price", ScalarType::Decimal, false),
                        ],
                    ),
                    level("category", 2, vec![key("name")]),
                ],
            },
            DimensionSpec {
                id: "d_store".into(),
                document_path: "dimension_store.xml".into(),
                levels: vec![level("store", 1, vec![key("name")]), level("city", 2, vec![key("name")])],
            },
        ],
        fact_classes: vec![FactSpec {
            id: "sales".into(),
            document_path: "facts.xml".into(),
            measures: vec![MeasureSpec { name: "amount".into(), ty: NumericType::Integer, aggregate: AggregateFn::Sum }],
            dimension_links: vec!["d_date".into(), "d_product".into(), "d_store".into()],
        }],
        source_path: MODEL_FILE.into(),
    };

    let date = render_dimension(
        "d_date",
        &[
            (
                "day".into(),
                vec![
                    member("d1", &[("name", "Jan-01"), ("date", "2007-01-01"), ("day_num", "1")], Some(("month", "Jan"))),
                    member("d2", &[("name", "Jan-02"), ("date", "2007-01-02"), ("day_num", "2")], Some(("month", "Jan"))),
                    member("d3", &[("name", "Feb-01"), ("date", "2007-02-01"), ("day_num", "1")], Some(("month", "Feb"))),
                    member("d4", &[("name", "Feb-02"), ("date", "2007-02-02"), ("day_num", "2")], Some(("month", "Feb"))),
                ],
            ),
            (
                "month".into(),
                vec![
                    member("Jan", &[("name", "January"), ("month_num", "1")], Some(("year", "2007"))),
                    member("Feb", &[("name", "February"), ("month_num", "2")], Some(("year", "2007"))),
                ],
            ),
            ("year".into(), vec![member("2007", &[("name", "2007")], None)]),
        ],
    );
    let product = render_dimension(
        "d_product",
        &[
            (
                "item".into(),
                vec![
                    member("p1", &[("name", "Pen"), ("unit_weight", "1"), ("price", "1.50")], Some(("category", "catA"))),
                    member("p2", &[("name", "Pencil"), ("unit_weight", "1"), ("price", "0.75")], Some(("category", "catA"))),
                    member("p3", &[("name", "Paper"), ("unit_weight", "1"), ("price", "4.20")], Some(("category", "catB"))),
                ],
            ),
            (
                "category".into(),
                vec![member("catA", &[("name", "Writing")], None), member("catB", &[("name", "Stationery")], None)],
            ),
        ],
    );
    let store = render_dimension(
        "d_store",
        &[
            (
                "store".into(),
                vec![
                    member("s1", &[("name", "Downtown")], Some(("city", "Lyon"))),
                    member("s2", &[("name", "Airport")], Some(("city", "Lyon"))),
                ],
            ),
            ("city".into(), vec![member("Lyon", &[("name", "Lyon")], None)]),
        ],
    );
    let rows = [("d1", "p1", "s1", 10), ("d1", "p2", "s1", 20), ("d2", "p1", "s2", 30), ("d3", "p3", "s1", 40), ("d4", "p2", "s2", 50)];
    let facts: Vec<FactDoc> = rows
        .iter()
        .map(|(d, p, s, a)| FactDoc {
            measures: vec![("amount".into(), a.to_string())],
            refs: vec![("d_date".into(), d.to_string()), ("d_product".into(), p.to_string()), ("d_store".into(), s.to_string())],
        })
        .collect();

    let mut files = WarehouseFiles::new();
    files.insert(MODEL_FILE, serialize_schema(&schema));
    files.insert("dimension_date.xml", date);
    files.insert("dimension_product.xml", product);
    files.insert("dimension_store.xml", store);
    files.insert("facts.xml", render_facts("sales", &facts));
    files
}

/// Shape of a generated warehouse.
#[derive(Debug, Clone)]
pub struct RandomConfig {
    pub seed: u64,
    pub facts: usize,
    pub dimensions: usize,
    /// Levels per dimension; each dimension gets `1..=max_depth`, or exactly
    /// `max_depth` when `fixed_depth` is set.
    pub max_depth: u32,
    pub fixed_depth: bool,
    /// Member count bound per level.
    pub max_members: usize,
    /// Share of members whose parent skips a level.
    pub ragged: f64,
    /// Share of fact dimension references left out.
    pub missing: f64,
    /// Share of fact references that point above the finest level.
    pub coarse_refs: f64,
}

impl RandomConfig {
    /// The generator behind `gen-sample --facts N --seed S`: three dimensions
    /// of depth three.
    pub fn desk(facts: usize, seed: u64) -> Self {
        Self {
            seed,
            facts,
            dimensions: 3,
            max_depth: 3,
            fixed_depth: true,
            max_members: 20,
            ragged: 0.10,
            missing: 0.05,
            coarse_refs: 0.0,
        }
    }

    /// Small varied warehouses for randomized property checks.
    pub fn small(seed: u64) -> Self {
        Self {
            seed,
            facts: 500,
            dimensions: 3,
            max_depth: 3,
            fixed_depth: false,
            max_members: 20,
            ragged: 0.10,
            missing: 0.05,
            coarse_refs: 0.03,
        }
    }
}

const DIM_NAMES: [&str; 3] = ["dim_a", "dim_b", "dim_c"];

/// Builds a reproducible pseudo-random warehouse. Every level carries a
/// string key `name`, integer `weight`, integer `unit` (always 1) and
/// decimal `rate`; the finest level adds a date `since`. The fact class
/// `events` has an integer `amount` (sum) and a decimal `price` (max).
pub fn random_warehouse(cfg: &RandomConfig) -> WarehouseFiles {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let dims = cfg.dimensions.clamp(1, DIM_NAMES.len());
    let mut specs = Vec::new();
    let mut docs = Vec::new();
    // per dimension: member ids per level, finest first
    let mut level_members: Vec<Vec<Vec<String>>> = Vec::new();

    for &dim in DIM_NAMES.iter().take(dims) {
        let depth = if cfg.fixed_depth { cfg.max_depth.max(1) } else { rng.gen_range(1..=cfg.max_depth.max(1)) };
        let prefix = &dim[4..];
        let level_ids: Vec<String> = (1..=depth).map(|d| format!("{prefix}{d}")).collect();

        let mut counts = Vec::new();
        let mut bound = cfg.max_members.max(1);
        for _ in 0..depth {
            let n = if cfg.fixed_depth { bound } else { rng.gen_range(1..=bound) };
            counts.push(n);
            bound = (n / 3).max(1);
        }

        let ids: Vec<Vec<String>> = level_ids
            .iter()
            .zip(&counts)
            .map(|(l, &n)| (0..n).map(|i| format!("{l}_{i}")).collect())
            .collect();

        let mut levels_doc = Vec::new();
        for (li, lid) in level_ids.iter().enumerate() {
            let mut members = Vec::new();
            for id in &ids[li] {
                let mut attributes = vec![
                    ("name".to_string(), format!("{dim} {id}")),
                    ("weight".to_string(), rng.gen_range(1..10).to_string()),
                    ("unit".to_string(), "1".to_string()),
                    ("rate".to_string(), format!("{}.{}", rng.gen_range(0..5), rng.gen_range(0..10) * 5)),
                ];
                if li == 0 {
                    attributes.push((
                        "since".to_string(),
                        format!("20{:02}-{:02}-{:02}", rng.gen_range(0..25), rng.gen_range(1..13), rng.gen_range(1..29)),
                    ));
                }
                let mut parent_level = li + 1;
                if parent_level + 1 < ids.len() && rng.gen_bool(cfg.ragged) {
                    parent_level += 1;
                }
                let parent = ids
                    .get(parent_level)
                    .and_then(|ps| ps.choose(&mut rng))
                    .map(|p| (level_ids[parent_level].clone(), p.clone()));
                members.push(MemberDoc { id: id.clone(), attributes, parent });
            }
            levels_doc.push((lid.clone(), members));
        }

        let mut levels = Vec::new();
        for (li, lid) in level_ids.iter().enumerate() {
            let mut attrs = vec![
                attr("name", ScalarType::String, true),
                attr("weight", ScalarType::Integer, false),
                attr("unit", ScalarType::Integer, false),
                attr("rate", ScalarType::Decimal, false),
            ];
            if li == 0 {
                attrs.push(attr("since", ScalarType::Date, false));
            }
            levels.push(level(lid, li as u32 + 1, attrs));
        }
        let path = format!("dimension_{dim}.xml");
        docs.push((path.clone(), render_dimension(dim, &levels_doc)));
        specs.push(DimensionSpec { id: dim.to_string(), document_path: path, levels });
        level_members.push(ids);
    }

    let mut facts = Vec::with_capacity(cfg.facts);
    for _ in 0..cfg.facts {
        let amount = rng.gen_range(1..=100).to_string();
        let price = format!("{}.{:02}", rng.gen_range(0..50), rng.gen_range(0..100));
        let mut refs = Vec::new();
        for (di, dim) in DIM_NAMES.iter().take(dims).enumerate() {
            if rng.gen_bool(cfg.missing) {
                continue;
            }
            let levels = &level_members[di];
            let li = if levels.len() > 1 && rng.gen_bool(cfg.coarse_refs) { rng.gen_range(1..levels.len()) } else { 0 };
            let m = levels[li].choose(&mut rng).expect("levels have members");
            refs.push((dim.to_string(), m.clone()));
        }
        facts.push(FactDoc { measures: vec![("amount".into(), amount), ("price".into(), price)], refs });
    }

    let schema = WarehouseSchema {
        dimensions: specs,
        fact_classes: vec![FactSpec {
            id: "events".into(),
            document_path: "facts.xml".into(),
            measures: vec![
                MeasureSpec { name: "amount".into(), ty: NumericType::Integer, aggregate: AggregateFn::Sum },
                MeasureSpec { name: "price".into(), ty: NumericType::Decimal, aggregate: AggregateFn::Max },
            ],
            dimension_links: DIM_NAMES.iter().take(dims).map(|s| s.to_string()).collect(),
        }],
        source_path: MODEL_FILE.into(),
    };

    let mut files = WarehouseFiles::new();
    files.insert(MODEL_FILE, serialize_schema(&schema));
    for (path, text) in docs {
        files.insert(path, text);
    }
    files.insert("facts.xml", render_facts("events", &facts));
    files
}
