//! Report, diff, policy, catalog and dictionary documents.
//!
//! Reports are canonical: struct field order fixes the key order, maps are
//! sorted, exposures are pre-sorted, and the layout is two-space pretty JSON
//! with a trailing newline. Equal reports always produce equal bytes.

use gdprscan_core::{
    CatalogEntry, CatalogError, DataPolicy, Exposure, PiiDictionary, PolicyError, Report,
    ReportDiff, ReportError, RuleCatalog, SCHEMA_VERSION,
};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum DocumentError {
    #[error("malformed document: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("invalid report: {0}")]
    Report(#[from] ReportError),
    #[error("invalid data policy: {0}")]
    Policy(#[from] PolicyError),
    #[error("invalid rule catalog: {0}")]
    Catalog(#[from] CatalogError),
}

fn pretty<T: Serialize>(value: &T) -> Vec<u8> {
    let mut out = serde_json::to_vec_pretty(value).expect("document serializes");
    out.push(b'\n');
    out
}

/// Canonical report bytes.
pub fn serialize_report(report: &Report) -> Vec<u8> {
    pretty(report)
}

/// Parses a report and checks its invariants (schema version, fingerprints,
/// order, summary).
pub fn parse_report(bytes: &[u8]) -> Result<Report, DocumentError> {
    let report: Report = serde_json::from_slice(bytes)?;
    report.check()?;
    Ok(report)
}

/// Diff document written by `gdprscan diff --format json`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiffDocument {
    pub schema_version: String,
    pub before_scan_id: String,
    pub after_scan_id: String,
    pub new_exposures: Vec<Exposure>,
    pub resolved_exposures: Vec<Exposure>,
    pub persisting_exposures: Vec<Exposure>,
}

pub fn serialize_diff(before: &Report, after: &Report, diff: &ReportDiff) -> Vec<u8> {
    pretty(&DiffDocument {
        schema_version: SCHEMA_VERSION.into(),
        before_scan_id: before.scan_id.clone(),
        after_scan_id: after.scan_id.clone(),
        new_exposures: diff.new_exposures.clone(),
        resolved_exposures: diff.resolved_exposures.clone(),
        persisting_exposures: diff.persisting_exposures.clone(),
    })
}

/// `{"permitted_categories": [...], "allowlist": [{database_id, table_name, field_name}]}`
pub fn parse_policy(bytes: &[u8]) -> Result<DataPolicy, DocumentError> {
    let policy: DataPolicy = serde_json::from_slice(bytes)?;
    policy.check()?;
    Ok(policy)
}

pub fn serialize_catalog(catalog: &RuleCatalog) -> Vec<u8> {
    pretty(&catalog.entries())
}

pub fn parse_catalog(bytes: &[u8]) -> Result<RuleCatalog, DocumentError> {
    let entries: Vec<CatalogEntry> = serde_json::from_slice(bytes)?;
    Ok(RuleCatalog::from_entries(&entries)?)
}

pub fn parse_dictionary(bytes: &[u8]) -> Result<PiiDictionary, DocumentError> {
    let text = std::str::from_utf8(bytes).map_err(|e| {
        serde_json::Error::io(std::io::Error::new(std::io::ErrorKind::InvalidData, e))
    })?;
    Ok(PiiDictionary::from_json(text)?)
}
