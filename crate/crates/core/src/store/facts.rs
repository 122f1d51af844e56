use std::collections::BTreeMap;

use roxmltree::Document;

use super::*;
use crate::model::FactSpec;
use crate::xml::{elements, step};

pub(crate) fn read_facts<T: MeasureValue>(
    text: &str,
    spec: &FactSpec,
) -> Result<(Vec<FactRecord<T>>, Vec<Diagnostic>), StoreError> {
    let document = spec.document_path.as_str();
    let doc = Document::parse(text).map_err(|e| StoreError::MalformedXml {
        document: document.to_string(),
        message: e.to_string(),
    })?;
    let mut diags = Vec::new();
    let mut report = |path: &str, msg: String| diags.push(Diagnostic::new(document, path, msg));

    let root = doc.root_element();
    let root_path = format!("/{}", step(root, &["id"]));
    if root.tag_name().name() != "FactDoc" {
        report(&root_path, "root element must be 'FactDoc'".into());
    } else if root.attribute("id") != Some(spec.id.as_str()) {
        report(&root_path, format!("root @id must be '{}'", spec.id));
    }

    let mut records = Vec::new();
    for node in elements(root) {
        if node.tag_name().name() != "fact" {
            report(
                &format!("{root_path}/{}", node.tag_name().name()),
                format!("unknown element '{}'", node.tag_name().name()),
            );
            continue;
        }
        let ordinal = records.len();
        let fpath = format!("{root_path}/fact[{}]", ordinal + 1);
        let mut measure_values = BTreeMap::new();
        let mut dimension_refs = BTreeMap::new();

        for child in elements(node) {
            match child.tag_name().name() {
                "measure" => {
                    let mpath = format!("{fpath}/{}", step(child, &["name"]));
                    let (Some(name), Some(value)) = (child.attribute("name"), child.attribute("value")) else {
                        report(&mpath, format!("fact {ordinal}: measure needs '@name' and '@value'"));
                        continue;
                    };
                    let Some(m) = spec.measure(name) else {
                        report(&mpath, format!("fact {ordinal}: measure '{name}' is not declared"));
                        continue;
                    };
                    if measure_values.contains_key(name) {
                        report(&mpath, format!("fact {ordinal}: measure '{name}' given twice"));
                        continue;
                    }
                    match T::parse_measure(value, m.ty) {
                        Some(v) => {
                            measure_values.insert(name.to_string(), v);
                        }
                        None => report(
                            &mpath,
                            format!("fact {ordinal}: measure '{name}' value '{value}' is not a valid {}", m.ty),
                        ),
                    }
                }
                "dimension" => {
                    let dpath = format!("{fpath}/{}", step(child, &["idref"]));
                    let (Some(dim), Some(member)) = (child.attribute("idref"), child.attribute("value-id")) else {
                        report(&dpath, format!("fact {ordinal}: dimension needs '@idref' and '@value-id'"));
                        continue;
                    };
                    if !spec.links(dim) {
                        report(&dpath, format!("fact {ordinal}: dimension '{dim}' is not linked by '{}'", spec.id));
                        continue;
                    }
                    if dimension_refs.contains_key(dim) {
                        report(&dpath, format!("fact {ordinal}: duplicate reference to dimension '{dim}'"));
                        continue;
                    }
                    dimension_refs.insert(dim.to_string(), member.to_string());
                }
                other => report(&format!("{fpath}/{other}"), format!("fact {ordinal}: unknown element '{other}'")),
            }
        }

        for m in &spec.measures {
            let present = elements(node).any(|c| c.tag_name().name() == "measure" && c.attribute("name") == Some(&m.name));
            if !present {
                report(&fpath, format!("fact {ordinal}: missing measure '{}'", m.name));
            }
        }
        for d in &spec.dimension_links {
            dimension_refs.entry(d.clone()).or_insert_with(|| UNKNOWN.to_string());
        }
        records.push(FactRecord { ordinal, measure_values, dimension_refs });
    }
    Ok((records, diags))
}

/// Loads a fact document. Records keep document order; a fact without a
/// reference to one of its linked dimensions gets [`UNKNOWN`] there.
pub fn load_facts<T: MeasureValue>(text: &str, spec: &FactSpec) -> Result<Vec<FactRecord<T>>, StoreError> {
    let (records, diags) = read_facts(text, spec)?;
    if diags.is_empty() {
        Ok(records)
    } else {
        Err(StoreError::Integrity(diags))
    }
}
