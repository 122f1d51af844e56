use std::collections::BTreeMap;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use super::StoreError;
use crate::model::{parse_schema, SchemaError, WarehouseSchema, MODEL_FILE};

/// The documents of one warehouse, keyed by their forward-slash path relative
/// to the warehouse directory.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct WarehouseFiles {
    files: BTreeMap<String, String>,
}

impl WarehouseFiles {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, path: impl Into<String>, text: impl Into<String>) {
        self.files.insert(path.into(), text.into());
    }

    pub fn get(&self, path: &str) -> Option<&str> {
        self.files.get(path).map(String::as_str)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str)> {
        self.files.iter().map(|(k, v)| (k.as_str(), v.as_str()))
    }

    /// Text of `dw-model.xml`; empty when absent.
    pub fn model_text(&self) -> &str {
        self.get(MODEL_FILE).unwrap_or_default()
    }

    pub fn schema(&self, base_dir: impl Into<PathBuf>) -> Result<WarehouseSchema, SchemaError> {
        parse_schema(self.model_text(), &base_dir.into())
    }

    pub(crate) fn require(&self, path: &str) -> Result<&str, StoreError> {
        self.get(path).ok_or_else(|| StoreError::Io {
            path: PathBuf::from(path),
            source: io::Error::new(io::ErrorKind::NotFound, "document not found"),
        })
    }

    /// Reads `dw-model.xml` and, when it parses, every document it names.
    /// A schema that does not parse is not an error here; the model text is
    /// kept so validation can report it.
    pub fn read_dir(dir: &Path) -> Result<Self, StoreError> {
        let mut files = Self::new();
        let model = dir.join(MODEL_FILE);
        let text = fs::read_to_string(&model).map_err(|source| StoreError::Io { path: model, source })?;
        files.insert(MODEL_FILE, text);
        if let Ok(schema) = files.schema(dir) {
            let paths = schema
                .dimensions
                .iter()
                .map(|d| &d.document_path)
                .chain(schema.fact_classes.iter().map(|f| &f.document_path));
            for p in paths {
                let full = schema.resolve(p);
                let text = fs::read_to_string(&full).map_err(|source| StoreError::Io { path: full, source })?;
                files.insert(p.clone(), text);
            }
        }
        Ok(files)
    }

    pub fn write_to(&self, dir: &Path) -> io::Result<()> {
        fs::create_dir_all(dir)?;
        for (path, text) in &self.files {
            let mut full = dir.to_path_buf();
            full.extend(path.split('/'));
            if let Some(parent) = full.parent() {
                fs::create_dir_all(parent)?;
            }
            fs::write(full, text)?;
        }
        Ok(())
    }
}
