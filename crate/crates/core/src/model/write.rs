use super::WarehouseSchema;
use crate::xml::tag;

/// Renders a schema as `dw-model.xml` text. Elements keep the schema's
/// order, attributes a fixed order, so output is byte-stable.
pub fn serialize_schema(schema: &WarehouseSchema) -> String {
    let mut out = String::from("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<DW-model>\n");
    for d in &schema.dimensions {
        out.push_str("  ");
        out.push_str(&tag("dimension", &[("id", &d.id), ("path", &d.document_path)], false));
        out.push('\n');
        for l in &d.levels {
            let depth = l.depth.to_string();
            let attrs = [("id", l.id.as_str()), ("depth", depth.as_str())];
            out.push_str("    ");
            if l.attributes.is_empty() {
                out.push_str(&tag("Level", &attrs, true));
                out.push('\n');
                continue;
            }
            out.push_str(&tag("Level", &attrs, false));
            out.push('\n');
            for a in &l.attributes {
                out.push_str("      ");
                out.push_str(&tag(
                    "attribute",
                    &[
                        ("name", &a.name),
                        ("type", a.ty.as_str()),
                        ("key", if a.key { "true" } else { "false" }),
                    ],
                    true,
                ));
                out.push('\n');
            }
            out.push_str("    </Level>\n");
        }
        out.push_str("  </dimension>\n");
    }
    for f in &schema.fact_classes {
        out.push_str("  ");
        out.push_str(&tag("FactDoc", &[("id", &f.id), ("path", &f.document_path)], false));
        out.push('\n');
        for m in &f.measures {
            out.push_str("    ");
            out.push_str(&tag(
                "measure",
                &[
                    ("name", &m.name),
                    ("type", m.ty.as_str()),
                    ("aggregate", m.aggregate.as_str()),
                ],
                true,
            ));
            out.push('\n');
        }
        for link in &f.dimension_links {
            out.push_str("    ");
            out.push_str(&tag("dimension", &[("idref", link)], true));
            out.push('\n');
        }
        out.push_str("  </FactDoc>\n");
    }
    out.push_str("</DW-model>\n");
    out
}
