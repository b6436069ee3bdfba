//! Report diffing and the human-readable renderers.

use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt::Write;

use serde::{Deserialize, Serialize};

use crate::catalog::{Principle, RuleId};
use crate::model::{Exposure, Report};

/// Exposures split by fingerprint between two reports.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReportDiff {
    pub new_exposures: Vec<Exposure>,
    pub resolved_exposures: Vec<Exposure>,
    pub persisting_exposures: Vec<Exposure>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum DiffError {
    #[error("schema_version mismatch: before is `{before}`, after is `{after}`")]
    SchemaMismatch { before: String, after: String },
    #[error("{which} report contains duplicate fingerprint {fingerprint}")]
    DuplicateFingerprint {
        which: &'static str,
        fingerprint: String,
    },
}

fn fingerprints<'a>(
    report: &'a Report,
    which: &'static str,
) -> Result<BTreeSet<&'a str>, DiffError> {
    let mut set = BTreeSet::new();
    for e in &report.exposures {
        if !set.insert(e.fingerprint.as_str()) {
            return Err(DiffError::DuplicateFingerprint {
                which,
                fingerprint: e.fingerprint.clone(),
            });
        }
    }
    Ok(set)
}

/// new = after ∖ before, resolved = before ∖ after, persisting = before ∩
/// after (payload taken from `after`). Each list keeps its report's
/// canonical order.
pub fn diff(before: &Report, after: &Report) -> Result<ReportDiff, DiffError> {
    if before.schema_version != after.schema_version {
        return Err(DiffError::SchemaMismatch {
            before: before.schema_version.clone(),
            after: after.schema_version.clone(),
        });
    }
    let old = fingerprints(before, "before")?;
    let new = fingerprints(after, "after")?;
    let mut out = ReportDiff::default();
    for e in &after.exposures {
        if old.contains(e.fingerprint.as_str()) {
            out.persisting_exposures.push(e.clone());
        } else {
            out.new_exposures.push(e.clone());
        }
    }
    out.resolved_exposures = before
        .exposures
        .iter()
        .filter(|e| !new.contains(e.fingerprint.as_str()))
        .cloned()
        .collect();
    Ok(out)
}

fn count_line(n: usize) -> String {
    if n == 1 {
        "1 exposure found".into()
    } else {
        alloc::format!("{n} exposures found")
    }
}

fn exposure_line(out: &mut String, marker: &str, e: &Exposure) {
    let _ = writeln!(
        out,
        "  {marker} {}: {} [{}]",
        e.resource,
        e.detail,
        &e.fingerprint[..e.fingerprint.len().min(12)]
    );
}

/// Census, per-principle counts, then exposures grouped by rule in
/// canonical order.
pub fn render_text(report: &Report) -> String {
    let mut out = String::new();
    let s = &report.summary;
    let _ = writeln!(out, "Privacy exposure report");
    let _ = writeln!(out, "scan_id:    {}", report.scan_id);
    let _ = writeln!(out, "scanned_at: {}", report.scanned_at.to_rfc3339());
    let _ = writeln!(out, "provider:   {}", report.snapshot_provider);
    let _ = writeln!(out);

    let _ = writeln!(out, "Resources scanned");
    for (kind, count) in &s.resources_scanned_by_kind {
        let _ = writeln!(out, "  {:<16}{count:>6}", kind.as_str());
    }
    let total: usize = s.resources_scanned_by_kind.values().sum();
    let _ = writeln!(out, "  {:<16}{total:>6}", "total");
    let _ = writeln!(out);

    let _ = writeln!(out, "Exposures by principle");
    for p in Principle::ALL {
        let n = s.exposures_by_principle.get(&p).copied().unwrap_or(0);
        let _ = writeln!(out, "  {:<32}{n:>6}", p.label());
    }
    let _ = writeln!(out);

    let _ = writeln!(out, "{}", count_line(report.exposures.len()));
    let mut current: Option<RuleId> = None;
    for e in &report.exposures {
        if current != Some(e.rule_id) {
            current = Some(e.rule_id);
            let _ = writeln!(out);
            let _ = writeln!(out, "{} {} ({})", e.rule_id, e.rule_id.title(), e.principle);
        }
        exposure_line(&mut out, "-", e);
    }
    out
}

pub fn render_diff_text(d: &ReportDiff) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{} new, {} resolved, {} persisting",
        d.new_exposures.len(),
        d.resolved_exposures.len(),
        d.persisting_exposures.len()
    );
    let sections = [
        ("New exposures", "+", &d.new_exposures),
        ("Resolved exposures", "-", &d.resolved_exposures),
    ];
    for (title, marker, list) in sections {
        if list.is_empty() {
            continue;
        }
        let _ = writeln!(out);
        let _ = writeln!(out, "{title}");
        for e in list {
            let _ = writeln!(
                out,
                "  {marker} {} {}: {} [{}]",
                e.rule_id,
                e.resource,
                e.detail,
                &e.fingerprint[..e.fingerprint.len().min(12)]
            );
        }
    }
    out
}
