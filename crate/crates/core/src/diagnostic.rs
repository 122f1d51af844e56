use std::fmt;

use serde::Serialize;

/// One located problem found while parsing, loading or checking a warehouse.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct Diagnostic {
    /// Document the problem was found in, relative to the warehouse directory.
    pub document: String,
    /// Element path inside the document, e.g. `/DW-model/FactDoc[@id='sales']`.
    pub path: String,
    pub message: String,
}

impl Diagnostic {
    pub fn new(
        document: impl Into<String>,
        path: impl Into<String>,
        message: impl Into<String>,
    ) -> Self {
        Self {
            document: document.into(),
            path: path.into(),
            message: message.into(),
        }
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}: {}", self.document, self.path, self.message)
    }
}

/// Newline-joined rendering used inside error messages.
pub(crate) fn join(diags: &[Diagnostic]) -> String {
    diags
        .iter()
        .map(|d| d.to_string())
        .collect::<Vec<_>>()
        .join("\n")
}
