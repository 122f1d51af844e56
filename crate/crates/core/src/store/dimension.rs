use std::collections::{BTreeMap, HashMap, HashSet};
use std::str::FromStr;

use chrono::NaiveDate;
use roxmltree::{Document, Node};
use rust_decimal::Decimal;

use super::*;
use crate::model::{DimensionSpec, ScalarType};
use crate::number::MeasureValue;
use crate::xml::{elements, identifier_problem, step};

pub(crate) fn parse_scalar(ty: ScalarType, text: &str) -> Option<Scalar> {
    match ty {
        ScalarType::String => Some(Scalar::String(text.to_string())),
        ScalarType::Integer => text.trim().parse().ok().map(Scalar::Integer),
        ScalarType::Decimal => Decimal::parse_number(text).map(Scalar::Decimal),
        ScalarType::Date => NaiveDate::parse_from_str(text.trim(), "%Y-%m-%d").ok().map(Scalar::Date),
    }
}

/// Loads a dimension document, reporting every problem found.
pub(crate) fn read_dimension(text: &str, spec: &DimensionSpec) -> Result<(DimensionTable, Vec<Diagnostic>), StoreError> {
    let document = spec.document_path.as_str();
    let doc = Document::parse(text).map_err(|e| StoreError::MalformedXml {
        document: document.to_string(),
        message: e.to_string(),
    })?;
    let mut diags = Vec::new();
    let mut report = |path: &str, msg: String| diags.push(Diagnostic::new(document, path, msg));

    let root = doc.root_element();
    let root_path = format!("/{}", step(root, &["id"]));
    if root.tag_name().name() != "dimension" {
        report(&root_path, "root element must be 'dimension'".into());
    } else if root.attribute("id") != Some(spec.id.as_str()) {
        report(&root_path, format!("root @id must be '{}'", spec.id));
    }

    let level_depth: HashMap<String, u32> = spec.levels.iter().map(|l| (l.id.clone(), l.depth)).collect();
    let mut members: Vec<DimensionMember> = Vec::new();
    let mut paths: Vec<String> = Vec::new();
    let mut index: HashMap<String, usize> = HashMap::new();
    let mut seen_levels = HashSet::new();
    // members of rejected levels: references to them are not reported again
    let mut rejected: HashSet<&str> = HashSet::new();

    for level_node in elements(root) {
        let lpath = format!("{root_path}/{}", step(level_node, &["id"]));
        if level_node.tag_name().name() != "Level" {
            report(&lpath, format!("unknown element '{}'", level_node.tag_name().name()));
            continue;
        }
        let Some(level_id) = level_node.attribute("id") else {
            report(&lpath, "missing required attribute '@id'".into());
            continue;
        };
        let Some(level) = spec.level(level_id) else {
            report(&lpath, format!("level '{level_id}' is not declared for dimension '{}'", spec.id));
            rejected.extend(elements(level_node).filter_map(|i| i.attribute("id")));
            continue;
        };
        if !seen_levels.insert(level_id) {
            report(&lpath, format!("level '{level_id}' appears twice"));
            continue;
        }

        for inst in elements(level_node) {
            let ipath = format!("{lpath}/{}", step(inst, &["id"]));
            if inst.tag_name().name() != "instance" {
                report(&ipath, format!("unknown element '{}'", inst.tag_name().name()));
                continue;
            }
            let Some(id) = inst.attribute("id") else {
                report(&ipath, "missing required attribute '@id'".into());
                continue;
            };
            if let Some(p) = identifier_problem(id) {
                report(&ipath, format!("member id: {p}"));
                continue;
            }
            if is_sentinel(id) {
                report(&ipath, format!("member id '{id}' is reserved"));
                continue;
            }
            if index.contains_key(id) {
                report(&ipath, format!("duplicate member id '{id}'"));
                continue;
            }

            let (attribute_values, parent) = read_instance(inst, &ipath, level, &level_depth, &mut report);
            index.insert(id.to_string(), members.len());
            members.push(DimensionMember {
                member_id: id.to_string(),
                level_id: level_id.to_string(),
                attribute_values,
                parent,
            });
            paths.push(ipath);
        }
    }

    // parents can only be checked once every member is known
    for (m, path) in members.iter().zip(&paths) {
        if let Some(p) = &m.parent {
            match index.get(&p.member).map(|&i| &members[i]) {
                None if rejected.contains(p.member.as_str()) => {}
                None => report(path, format!("parent references unknown member '{}'", p.member)),
                Some(target) if target.level_id != p.level => report(
                    path,
                    format!("parent '{}' is at level '{}', not '{}'", p.member, target.level_id, p.level),
                ),
                Some(_) => {}
            }
        }
    }

    let mut level_order: HashMap<String, Vec<usize>> = HashMap::new();
    for (i, m) in members.iter().enumerate() {
        level_order.entry(m.level_id.clone()).or_default().push(i);
    }
    let table = DimensionTable {
        dimension_id: spec.id.clone(),
        members,
        index,
        level_depth,
        level_order,
    };
    Ok((table, diags))
}

fn read_instance(
    inst: Node<'_, '_>,
    ipath: &str,
    level: &crate::model::LevelSpec,
    level_depth: &HashMap<String, u32>,
    report: &mut impl FnMut(&str, String),
) -> (BTreeMap<String, Scalar>, Option<ParentRef>) {
    let mut values = BTreeMap::new();
    let mut parent = None;
    for child in elements(inst) {
        match child.tag_name().name() {
            "attribute" => {
                let apath = format!("{ipath}/{}", step(child, &["name"]));
                let (Some(name), Some(value)) = (child.attribute("name"), child.attribute("value")) else {
                    report(&apath, "attribute needs '@name' and '@value'".into());
                    continue;
                };
                let Some(decl) = level.attribute(name) else {
                    report(&apath, format!("attribute '{name}' is not declared at level '{}'", level.id));
                    continue;
                };
                if values.contains_key(name) {
                    report(&apath, format!("attribute '{name}' given twice"));
                    continue;
                }
                match parse_scalar(decl.ty, value) {
                    Some(v) => {
                        values.insert(name.to_string(), v);
                    }
                    None => report(&apath, format!("value '{value}' is not a valid {}", decl.ty)),
                }
            }
            "parent" => {
                let ppath = format!("{ipath}/parent");
                if parent.is_some() {
                    report(&ppath, "more than one parent".into());
                    continue;
                }
                let (Some(plevel), Some(idref)) = (child.attribute("level"), child.attribute("idref")) else {
                    report(&ppath, "parent needs '@level' and '@idref'".into());
                    continue;
                };
                match level_depth.get(plevel) {
                    None => report(&ppath, format!("parent level '{plevel}' is not declared")),
                    Some(&d) if d <= level.depth => report(
                        &ppath,
                        format!("parent level '{plevel}' is not coarser than '{}'", level.id),
                    ),
                    Some(_) => {
                        parent = Some(ParentRef { level: plevel.to_string(), member: idref.to_string() });
                    }
                }
            }
            other => report(&format!("{ipath}/{other}"), format!("unknown element '{other}'")),
        }
    }
    if let Some(key) = level.attributes.iter().find(|a| a.key) {
        if !values.contains_key(&key.name) && !has_attr_named(inst, &key.name) {
            report(ipath, format!("key attribute '{}' is missing", key.name));
        }
    }
    (values, parent)
}

fn has_attr_named(inst: Node<'_, '_>, name: &str) -> bool {
    elements(inst).any(|c| c.tag_name().name() == "attribute" && c.attribute("name") == Some(name))
}

/// Loads a dimension document into a member table.
pub fn load_dimension(text: &str, spec: &DimensionSpec) -> Result<DimensionTable, StoreError> {
    let (table, diags) = read_dimension(text, spec)?;
    if diags.is_empty() {
        Ok(table)
    } else {
        Err(StoreError::Integrity(diags))
    }
}

impl FromStr for Scalar {
    type Err = ();
    /// Untyped parse used by tooling: integer, then decimal, then string.
    fn from_str(s: &str) -> Result<Self, ()> {
        Ok(parse_scalar(ScalarType::Integer, s)
            .or_else(|| parse_scalar(ScalarType::Decimal, s))
            .unwrap_or_else(|| Scalar::String(s.to_string())))
    }
}
