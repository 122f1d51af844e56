use std::path::Path;

use roxmltree::{Document, Node};

use super::*;
use crate::xml::{elements, step, stray_text};

struct Reader {
    diags: Vec<Diagnostic>,
}

impl Reader {
    fn report(&mut self, path: &str, message: impl Into<String>) {
        self.diags.push(Diagnostic::new(MODEL_FILE, path, message));
    }

    fn required<'a>(&mut self, node: Node<'a, '_>, path: &str, attr: &str) -> Option<&'a str> {
        let v = node.attribute(attr);
        if v.is_none() {
            self.report(path, format!("missing required attribute '@{attr}'"));
        }
        v
    }

    fn keyword<T: FromStr<Err = String>>(&mut self, path: &str, attr: &str, text: &str) -> Option<T> {
        match text.parse() {
            Ok(v) => Some(v),
            Err(e) => {
                self.report(path, format!("@{attr}: {e}"));
                None
            }
        }
    }

    fn no_text(&mut self, node: Node<'_, '_>, path: &str) {
        if let Some(t) = stray_text(node) {
            self.report(path, format!("unexpected text '{t}'"));
        }
    }

    fn unknown(&mut self, node: Node<'_, '_>, parent: &str) {
        self.report(
            &format!("{parent}/{}", node.tag_name().name()),
            format!("unknown element '{}'", node.tag_name().name()),
        );
    }

    fn dimension(&mut self, node: Node<'_, '_>, path: &str) -> Option<DimensionSpec> {
        self.no_text(node, path);
        let id = self.required(node, path, "id");
        let doc = self.required(node, path, "path");
        let mut levels = Vec::new();
        for child in elements(node) {
            match child.tag_name().name() {
                "Level" => {
                    let lpath = format!("{path}/{}", step(child, &["id"]));
                    if let Some(l) = self.level(child, &lpath) {
                        levels.push(l);
                    }
                }
                _ => self.unknown(child, path),
            }
        }
        Some(DimensionSpec {
            id: id?.to_string(),
            document_path: doc?.to_string(),
            levels,
        })
    }

    fn level(&mut self, node: Node<'_, '_>, path: &str) -> Option<LevelSpec> {
        self.no_text(node, path);
        let id = self.required(node, path, "id");
        let depth = self.required(node, path, "depth").and_then(|d| match d.parse::<u32>() {
            Ok(v) if v > 0 => Some(v),
            _ => {
                self.report(path, format!("@depth must be a positive integer, got '{d}'"));
                None
            }
        });
        let mut attributes = Vec::new();
        for child in elements(node) {
            match child.tag_name().name() {
                "attribute" => {
                    let apath = format!("{path}/{}", step(child, &["name"]));
                    self.no_text(child, &apath);
                    let name = self.required(child, &apath, "name");
                    let ty = self
                        .required(child, &apath, "type")
                        .and_then(|t| self.keyword::<ScalarType>(&apath, "type", t));
                    let key = match child.attribute("key") {
                        None | Some("false") => Some(false),
                        Some("true") => Some(true),
                        Some(other) => {
                            self.report(&apath, format!("@key must be true or false, got '{other}'"));
                            None
                        }
                    };
                    if let (Some(name), Some(ty), Some(key)) = (name, ty, key) {
                        attributes.push(AttributeSpec { name: name.to_string(), ty, key });
                    }
                }
                _ => self.unknown(child, path),
            }
        }
        Some(LevelSpec {
            id: id?.to_string(),
            depth: depth?,
            attributes,
        })
    }

    fn fact(&mut self, node: Node<'_, '_>, path: &str) -> Option<FactSpec> {
        self.no_text(node, path);
        let id = self.required(node, path, "id");
        let doc = self.required(node, path, "path");
        let mut measures = Vec::new();
        let mut dimension_links = Vec::new();
        for child in elements(node) {
            match child.tag_name().name() {
                "measure" => {
                    let mpath = format!("{path}/{}", step(child, &["name"]));
                    self.no_text(child, &mpath);
                    let name = self.required(child, &mpath, "name");
                    let ty = self
                        .required(child, &mpath, "type")
                        .and_then(|t| self.keyword::<NumericType>(&mpath, "type", t));
                    let aggregate = match child.attribute("aggregate") {
                        None => Some(AggregateFn::Sum),
                        Some(a) => self.keyword::<AggregateFn>(&mpath, "aggregate", a),
                    };
                    if let (Some(name), Some(ty), Some(aggregate)) = (name, ty, aggregate) {
                        measures.push(MeasureSpec { name: name.to_string(), ty, aggregate });
                    }
                }
                "dimension" => {
                    let dpath = format!("{path}/{}", step(child, &["idref"]));
                    self.no_text(child, &dpath);
                    if let Some(r) = self.required(child, &dpath, "idref") {
                        dimension_links.push(r.to_string());
                    }
                }
                _ => self.unknown(child, path),
            }
        }
        Some(FactSpec {
            id: id?.to_string(),
            document_path: doc?.to_string(),
            measures,
            dimension_links,
        })
    }
}

/// Parses `dw-model.xml` text. Relative document paths are later resolved
/// against `base_dir`.
pub fn parse_schema(xml_text: &str, base_dir: &Path) -> Result<WarehouseSchema, SchemaError> {
    let doc = Document::parse(xml_text).map_err(|e| SchemaError::MalformedXml {
        document: MODEL_FILE.to_string(),
        message: e.to_string(),
    })?;
    let root = doc.root_element();
    let mut r = Reader { diags: Vec::new() };
    if root.tag_name().name() != "DW-model" || root.tag_name().namespace().is_some() {
        r.report(
            &format!("/{}", root.tag_name().name()),
            "root element must be 'DW-model'",
        );
        return Err(SchemaError::SchemaViolation(r.diags));
    }
    r.no_text(root, "/DW-model");

    let mut dimensions = Vec::new();
    let mut fact_classes = Vec::new();
    for child in elements(root) {
        match child.tag_name().name() {
            "dimension" => {
                let path = format!("/DW-model/{}", step(child, &["id"]));
                if let Some(d) = r.dimension(child, &path) {
                    dimensions.push(d);
                }
            }
            "FactDoc" => {
                let path = format!("/DW-model/{}", step(child, &["id"]));
                if let Some(f) = r.fact(child, &path) {
                    fact_classes.push(f);
                }
            }
            _ => r.unknown(child, "/DW-model"),
        }
    }

    if !r.diags.is_empty() {
        return Err(SchemaError::SchemaViolation(r.diags));
    }
    let schema = WarehouseSchema {
        dimensions,
        fact_classes,
        source_path: base_dir.join(MODEL_FILE),
    };
    let diags = validate_schema(&schema);
    if diags.is_empty() {
        Ok(schema)
    } else {
        Err(SchemaError::SchemaViolation(diags))
    }
}
