//! Snapshot validation.
//!
//! Errors break resource identity or model invariants and stop a scan.
//! Warnings (dangling attachment references) are reported but do not.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;

use chrono::{DateTime, Duration, Utc};
use serde::{Deserialize, Serialize};

use crate::cidr::Cidr;
use crate::model::{
    AccessGrant, Grantee, PortRange, Resource, ResourceKind, RuleDirection, Snapshot, Table,
    SCHEMA_VERSION,
};

/// Allowed lead of `generated_at` over the scan clock.
pub const CLOCK_SKEW_HOURS: i64 = 24;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Severity {
    Error,
    Warning,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationIssue {
    pub severity: Severity,
    /// JSON-pointer locator into the snapshot document.
    pub path: String,
    pub message: String,
}

impl ValidationIssue {
    pub fn is_error(&self) -> bool {
        self.severity == Severity::Error
    }
}

impl fmt::Display for ValidationIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sev = match self.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        write!(f, "{sev}: {}: {}", self.path, self.message)
    }
}

/// Compares JSON pointers segment by segment, numerically where both
/// segments are array indices.
fn cmp_paths(a: &str, b: &str) -> Ordering {
    let mut xs = a.split('/');
    let mut ys = b.split('/');
    loop {
        match (xs.next(), ys.next()) {
            (None, None) => return Ordering::Equal,
            (None, Some(_)) => return Ordering::Less,
            (Some(_), None) => return Ordering::Greater,
            (Some(x), Some(y)) => {
                let ord = match (x.parse::<u64>(), y.parse::<u64>()) {
                    (Ok(i), Ok(j)) => i.cmp(&j),
                    _ => x.cmp(y),
                };
                if ord != Ordering::Equal {
                    return ord;
                }
            }
        }
    }
}

fn escape_pointer(segment: &str) -> String {
    segment.replace('~', "~0").replace('/', "~1")
}

struct Issues(Vec<ValidationIssue>);

impl Issues {
    fn error(&mut self, path: String, message: String) {
        self.0.push(ValidationIssue {
            severity: Severity::Error,
            path,
            message,
        });
    }

    fn warning(&mut self, path: String, message: String) {
        self.0.push(ValidationIssue {
            severity: Severity::Warning,
            path,
            message,
        });
    }
}

/// Structural validation. Errors come first, then warnings; each group is
/// ordered by path.
pub fn validate_snapshot(snapshot: &Snapshot) -> Vec<ValidationIssue> {
    validate_snapshot_at(snapshot, None)
}

/// As [`validate_snapshot`], additionally rejecting a `generated_at` more
/// than [`CLOCK_SKEW_HOURS`] ahead of `now`.
pub fn validate_snapshot_at(
    snapshot: &Snapshot,
    now: Option<DateTime<Utc>>,
) -> Vec<ValidationIssue> {
    let mut issues = Issues(Vec::new());

    if snapshot.schema_version != SCHEMA_VERSION {
        issues.error(
            "/schema_version".into(),
            format!("unknown schema_version `{}`", snapshot.schema_version),
        );
    }
    if snapshot.provider_id.trim().is_empty() {
        issues.error("/provider_id".into(), "provider_id is empty".into());
    }
    if let Some(now) = now {
        if snapshot.generated_at > now + Duration::hours(CLOCK_SKEW_HOURS) {
            issues.error(
                "/generated_at".into(),
                format!(
                    "generated_at {} is more than {CLOCK_SKEW_HOURS}h after scan time {}",
                    snapshot.generated_at.to_rfc3339(),
                    now.to_rfc3339()
                ),
            );
        }
    }

    let mut ids_by_kind: BTreeMap<(&str, ResourceKind), BTreeSet<&str>> = BTreeMap::new();
    let mut first_seen: BTreeMap<(&str, ResourceKind, &str), usize> = BTreeMap::new();
    for (i, r) in snapshot.resources.iter().enumerate() {
        let base = format!("/resources/{i}");
        let loc = r.locator();
        if loc.region.trim().is_empty() {
            issues.error(format!("{base}/region"), "region is empty".into());
        }
        if loc.id.trim().is_empty() {
            issues.error(format!("{base}/id"), "id is empty".into());
        }
        let key = (loc.region.as_str(), r.kind(), loc.id.as_str());
        if let Some(&first) = first_seen.get(&key) {
            issues.error(
                format!("{base}/id"),
                format!(
                    "duplicate id `{}` for {} in region `{}` (first at /resources/{first})",
                    loc.id,
                    r.kind(),
                    loc.region
                ),
            );
        } else {
            first_seen.insert(key, i);
        }
        ids_by_kind
            .entry((loc.region.as_str(), r.kind()))
            .or_default()
            .insert(loc.id.as_str());
    }

    let exists = |region: &str, kind: ResourceKind, id: &str| {
        ids_by_kind
            .get(&(region, kind))
            .map(|ids| ids.contains(id))
            .unwrap_or(false)
    };

    for (i, r) in snapshot.resources.iter().enumerate() {
        let base = format!("/resources/{i}");
        let region = r.region();
        match r {
            Resource::Server(s) => {
                for (k, fw) in s.attached_firewall_ids.iter().enumerate() {
                    if !exists(region, ResourceKind::Firewall, fw) {
                        issues.warning(
                            format!("{base}/attached_firewall_ids/{k}"),
                            format!("firewall `{fw}` not found in region `{region}`"),
                        );
                    }
                }
                for (k, vol) in s.attached_storage_ids.iter().enumerate() {
                    if !exists(region, ResourceKind::ServerStorage, vol) {
                        issues.warning(
                            format!("{base}/attached_storage_ids/{k}"),
                            format!("server storage `{vol}` not found in region `{region}`"),
                        );
                    }
                }
            }
            Resource::ServerStorage(v) => {
                if let Some(server) = &v.attached_server_id {
                    if !exists(region, ResourceKind::Server, server) {
                        issues.warning(
                            format!("{base}/attached_server_id"),
                            format!("server `{server}` not found in region `{region}`"),
                        );
                    }
                }
            }
            Resource::Database(db) => {
                let mut names = BTreeSet::new();
                for (t, table) in db.tables.iter().enumerate() {
                    let tbase = format!("{base}/tables/{t}");
                    if !names.insert(table.name.as_str()) {
                        issues.error(
                            format!("{tbase}/name"),
                            format!("duplicate table name `{}`", table.name),
                        );
                    }
                    check_table(&mut issues, &tbase, table);
                }
            }
            Resource::Firewall(fw) => {
                let lists = [
                    ("inbound_rules", RuleDirection::Inbound, &fw.inbound_rules),
                    (
                        "outbound_rules",
                        RuleDirection::Outbound,
                        &fw.outbound_rules,
                    ),
                ];
                for (list, direction, rules) in lists {
                    for (k, rule) in rules.iter().enumerate() {
                        let rbase = format!("{base}/{list}/{k}");
                        if let PortRange::Range { low, high } = rule.port_range {
                            if low > high {
                                issues.error(
                                    format!("{rbase}/port_range"),
                                    format!("port range {low}-{high} has low > high"),
                                );
                            }
                        }
                        if rule.cidr.parse::<Cidr>().is_err() {
                            issues.error(
                                format!("{rbase}/cidr"),
                                format!("invalid CIDR `{}`", rule.cidr),
                            );
                        }
                        if rule.direction != direction {
                            issues.error(
                                format!("{rbase}/direction"),
                                format!(
                                    "rule direction `{}` listed under {list}",
                                    rule.direction.as_str()
                                ),
                            );
                        }
                    }
                }
            }
            Resource::LoadBalancer(lb) => {
                if lb.listeners.is_empty() {
                    issues.error(
                        format!("{base}/listeners"),
                        "load balancer has no listeners".into(),
                    );
                }
                for (k, l) in lb.listeners.iter().enumerate() {
                    for (field, port) in [
                        ("frontend_port", l.frontend_port),
                        ("backend_port", l.backend_port),
                    ] {
                        if port == 0 {
                            issues.error(
                                format!("{base}/listeners/{k}/{field}"),
                                "port must be in 1-65535".into(),
                            );
                        }
                    }
                }
            }
            Resource::CloudStorage(cs) => {
                for (list, grants) in [
                    ("read_grants", &cs.read_grants),
                    ("write_grants", &cs.write_grants),
                ] {
                    for (k, g) in grants.iter().enumerate() {
                        check_grant(&mut issues, format!("{base}/{list}/{k}"), g);
                    }
                }
            }
            Resource::AccessPolicy(ap) => {
                if ap.statements.is_empty() {
                    issues.error(
                        format!("{base}/statements"),
                        "access policy has no statements".into(),
                    );
                }
                for (k, st) in ap.statements.iter().enumerate() {
                    if st.actions.is_empty() {
                        issues.error(
                            format!("{base}/statements/{k}/actions"),
                            "statement has no actions".into(),
                        );
                    }
                    if st.resources.is_empty() {
                        issues.error(
                            format!("{base}/statements/{k}/resources"),
                            "statement has no resources".into(),
                        );
                    }
                }
            }
            Resource::Router(rt) => {
                for (k, route) in rt.routes.iter().enumerate() {
                    if route.destination_cidr.parse::<Cidr>().is_err() {
                        issues.error(
                            format!("{base}/routes/{k}/destination_cidr"),
                            format!("invalid CIDR `{}`", route.destination_cidr),
                        );
                    }
                }
            }
        }
    }

    let mut out = issues.0;
    out.sort_by(|a, b| {
        a.severity
            .cmp(&b.severity)
            .then_with(|| cmp_paths(&a.path, &b.path))
            .then_with(|| a.message.cmp(&b.message))
    });
    out
}

fn check_table(issues: &mut Issues, tbase: &str, table: &Table) {
    let fields: BTreeSet<&str> = table.fields.iter().map(|f| f.name.as_str()).collect();
    if fields.len() != table.fields.len() {
        let mut seen = BTreeSet::new();
        for (f, field) in table.fields.iter().enumerate() {
            if !seen.insert(field.name.as_str()) {
                issues.error(
                    format!("{tbase}/fields/{f}/name"),
                    format!("duplicate field name `{}`", field.name),
                );
            }
        }
    }
    match (&table.ttl_attribute, table.ttl_enabled) {
        (None, true) => issues.error(
            format!("{tbase}/ttl_attribute"),
            "ttl_enabled is true but ttl_attribute is missing".into(),
        ),
        (Some(attr), true) if !fields.contains(attr.as_str()) => issues.error(
            format!("{tbase}/ttl_attribute"),
            format!(
                "ttl_attribute `{attr}` is not a field of table `{}`",
                table.name
            ),
        ),
        _ => {}
    }
    for (r, row) in table.sampled_rows.iter().enumerate() {
        for key in row.keys() {
            if !fields.contains(key.as_str()) {
                issues.error(
                    format!("{tbase}/sampled_rows/{r}/{}", escape_pointer(key)),
                    format!(
                        "sampled row key `{key}` is not a field of table `{}`",
                        table.name
                    ),
                );
            }
        }
    }
}

fn check_grant(issues: &mut Issues, path: String, grant: &AccessGrant) {
    let needs_principal = matches!(grant.grantee, Grantee::Account | Grantee::Principal);
    match (needs_principal, grant.principal_id.is_some()) {
        (true, false) => issues.error(
            path,
            format!("grantee `{}` requires principal_id", grant.grantee.as_str()),
        ),
        (false, true) => issues.error(
            path,
            format!(
                "grantee `{}` must not carry principal_id",
                grant.grantee.as_str()
            ),
        ),
        _ => {}
    }
}
