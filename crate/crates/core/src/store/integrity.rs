use std::path::{Path, PathBuf};

use rust_decimal::Decimal;

use super::dimension::read_dimension;
use super::facts::read_facts;
use super::*;

/// One diagnostic per fact reference that names a member missing from the
/// linked dimension, ordered by fact class id, ordinal and dimension.
pub fn check_integrity<T>(instance: &WarehouseInstance<T>) -> Vec<Diagnostic> {
    let mut classes: Vec<_> = instance.schema.fact_classes.iter().enumerate().collect();
    classes.sort_by(|a, b| a.1.id.cmp(&b.1.id));

    let mut out = Vec::new();
    for (ci, spec) in classes {
        for fact in &instance.facts[ci] {
            for (dim, member) in &fact.dimension_refs {
                if member == UNKNOWN {
                    continue;
                }
                let resolves = instance.dimension(dim).is_some_and(|t| t.member(member).is_some());
                if !resolves {
                    out.push(Diagnostic::new(
                        spec.document_path.clone(),
                        format!(
                            "/FactDoc[@id='{}']/fact[{}]/dimension[@idref='{dim}']",
                            spec.id,
                            fact.ordinal + 1
                        ),
                        format!(
                            "fact class '{}', ordinal {}: dimension '{dim}' has no member '{member}'",
                            spec.id, fact.ordinal
                        ),
                    ));
                }
            }
        }
    }
    out
}

/// Runs every check a warehouse can fail: schema structure, dimension and
/// fact document contents, then referential integrity. Later stages only
/// run when earlier ones are clean, so one defect yields one diagnostic.
///
/// Unreadable or malformed documents are errors rather than diagnostics.
pub fn validate_warehouse(files: &WarehouseFiles, base_dir: impl Into<PathBuf>) -> Result<Vec<Diagnostic>, StoreError> {
    let schema = match files.schema(base_dir) {
        Ok(s) => s,
        Err(SchemaError::SchemaViolation(d)) => return Ok(d),
        Err(e) => return Err(e.into()),
    };

    let mut diags = Vec::new();
    for spec in &schema.dimensions {
        let (_, d) = read_dimension(files.require(&spec.document_path)?, spec)?;
        diags.extend(d);
    }
    for spec in &schema.fact_classes {
        let (_, d) = read_facts::<Decimal>(files.require(&spec.document_path)?, spec)?;
        diags.extend(d);
    }
    if !diags.is_empty() {
        return Ok(diags);
    }

    let instance = WarehouseInstance::<Decimal>::load(files, schema.source_path.parent().unwrap_or(Path::new("")))?;
    Ok(check_integrity(&instance))
}
