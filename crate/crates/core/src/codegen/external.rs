use std::io::Write as _;
use std::path::Path;
use std::process::Command;

use thiserror::Error;

use super::GeneratedQuery;
use crate::present::{parse_result_xml, ResultParseError, ResultSet};

/// Command template, e.g. `saxon -q:{query_file} -s:{base_dir}/facts.xml`.
pub const PROCESSOR_ENV: &str = "XOLAP_XQUERY_CMD";

#[derive(Debug, Error)]
pub enum ExternalError {
    #[error("no XQuery processor configured (set {PROCESSOR_ENV})")]
    ProcessorUnavailable,
    #[error("processor exited with {status}: {stderr}")]
    ProcessorFailure { status: String, stderr: String },
    #[error("cannot run processor: {0}")]
    Io(#[from] std::io::Error),
    #[error("unparseable processor output: {0}")]
    OutputParseError(#[from] ResultParseError),
}

fn shell_quote(s: &str) -> String {
    format!("'{}'", s.replace('\'', "'\\''"))
}

/// Runs `query` with the processor named by `XOLAP_XQUERY_CMD`.
pub fn run_external(query: &GeneratedQuery, base_dir: &Path) -> Result<ResultSet, ExternalError> {
    match std::env::var(PROCESSOR_ENV) {
        Ok(t) if !t.trim().is_empty() => run_with(query, base_dir, &t),
        _ => Err(ExternalError::ProcessorUnavailable),
    }
}

/// Writes the query to a temporary file, substitutes `{query_file}` and
/// `{base_dir}` (shell-quoted) into `template`, and runs it with `sh -c` in
/// `base_dir`.
pub fn run_with(query: &GeneratedQuery, base_dir: &Path, template: &str) -> Result<ResultSet, ExternalError> {
    let mut file = tempfile::Builder::new().prefix("xolap-").suffix(".xq").tempfile()?;
    file.write_all(query.text.as_bytes())?;
    file.flush()?;
    let base = std::path::absolute(base_dir)?;
    let cmd = template
        .replace("{query_file}", &shell_quote(&file.path().to_string_lossy()))
        .replace("{base_dir}", &shell_quote(&base.to_string_lossy()));
    let out = Command::new("sh").arg("-c").arg(&cmd).current_dir(&base).output()?;
    if !out.status.success() {
        return Err(ExternalError::ProcessorFailure {
            status: out.status.to_string(),
            stderr: String::from_utf8_lossy(&out.stderr).trim().to_string(),
        });
    }
    Ok(parse_result_xml(&String::from_utf8_lossy(&out.stdout))?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codegen::QueryDialect;

    fn query() -> GeneratedQuery {
        GeneratedQuery { text: "<result/>".into(), documents: vec![], dialect: QueryDialect::Xq31 }
    }

    #[test]
    fn echo_processor() {
        let dir = tempfile::tempdir().unwrap();
        let r = run_with(&query(), dir.path(), "cat {query_file}").unwrap();
        assert!(r.is_empty());
        let r = run_with(&query(), dir.path(), "test -d {base_dir} && echo '<result><cell/></result>'").unwrap();
        assert_eq!(r.len(), 1);
    }

    #[test]
    fn failures() {
        let dir = tempfile::tempdir().unwrap();
        let e = run_with(&query(), dir.path(), "echo boom >&2; exit 4").unwrap_err();
        let ExternalError::ProcessorFailure { stderr, .. } = e else { panic!("{e:?}") };
        assert_eq!(stderr, "boom");
        let e = run_with(&query(), dir.path(), "echo 'not xml at all'").unwrap_err();
        let ExternalError::OutputParseError(p) = e else { panic!("{e:?}") };
        assert!(p.excerpt.contains("not xml"));
    }
}
