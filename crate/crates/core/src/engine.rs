//! Scan orchestration: validate, evaluate every enabled rule against every
//! resource, sort, and roll up.

use alloc::string::String;
use alloc::vec::Vec;

use chrono::{DateTime, Datelike, Utc};

use crate::catalog::RuleCatalog;
use crate::model::{
    DataPolicy, Exposure, PolicyError, Report, ReportError, Resource, Snapshot, Summary,
};
use crate::pii::{eval_data_minimization, PiiClassifier, PiiDictionary};
use crate::rules;
use crate::validate::{validate_snapshot_at, ValidationIssue};

#[derive(Debug, Clone, PartialEq)]
pub struct ScanConfig {
    pub catalog: RuleCatalog,
    pub policy: DataPolicy,
    pub scan_id: String,
    pub scanned_at: DateTime<Utc>,
    pub dictionary: PiiDictionary,
}

impl ScanConfig {
    /// All rules enabled, empty policy, builtin dictionary.
    pub fn new(scan_id: impl Into<String>, scanned_at: DateTime<Utc>) -> Self {
        Self {
            catalog: RuleCatalog::new(),
            policy: DataPolicy::default(),
            scan_id: scan_id.into(),
            scanned_at,
            dictionary: PiiDictionary::builtin(),
        }
    }

    pub fn with_catalog(mut self, catalog: RuleCatalog) -> Self {
        self.catalog = catalog;
        self
    }

    pub fn with_policy(mut self, policy: DataPolicy) -> Self {
        self.policy = policy;
        self
    }

    pub fn with_dictionary(mut self, dictionary: PiiDictionary) -> Self {
        self.dictionary = dictionary;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ScanError {
    #[error("snapshot has {} validation error(s)", .0.iter().filter(|i| i.is_error()).count())]
    InvalidSnapshot(Vec<ValidationIssue>),
    #[error("invalid data policy: {0}")]
    InvalidPolicy(#[from] PolicyError),
    #[error(transparent)]
    Report(#[from] ReportError),
}

/// Every exposure the enabled rules raise against one resource.
pub fn evaluate_resource(
    resource: &Resource,
    catalog: &RuleCatalog,
    policy: &DataPolicy,
    classifier: &PiiClassifier,
) -> Vec<Exposure> {
    let mut out = match resource {
        Resource::Server(s) => rules::eval_server(s),
        Resource::ServerStorage(v) => rules::eval_server_storage(v),
        Resource::Database(db) => {
            let mut v = rules::eval_database_ic(db);
            if catalog.is_enabled(crate::RuleId::R18) {
                v.extend(eval_data_minimization(db, policy, classifier));
            }
            v.extend(rules::eval_storage_limitation(db));
            v
        }
        Resource::Firewall(fw) => rules::eval_firewall(fw),
        Resource::LoadBalancer(lb) => rules::eval_load_balancer(lb),
        Resource::CloudStorage(cs) => rules::eval_cloud_storage(cs),
        Resource::AccessPolicy(ap) => rules::eval_access_policy(ap),
        Resource::Router(rt) => rules::eval_router(rt),
    };
    out.retain(|e| catalog.is_enabled(e.rule_id));
    out
}

#[cfg(feature = "parallel")]
fn evaluate_all(
    snapshot: &Snapshot,
    config: &ScanConfig,
    classifier: &PiiClassifier,
) -> Vec<Exposure> {
    use rayon::prelude::*;
    snapshot
        .resources
        .par_iter()
        .flat_map_iter(|r| evaluate_resource(r, &config.catalog, &config.policy, classifier))
        .collect()
}

#[cfg(not(feature = "parallel"))]
fn evaluate_all(
    snapshot: &Snapshot,
    config: &ScanConfig,
    classifier: &PiiClassifier,
) -> Vec<Exposure> {
    snapshot
        .resources
        .iter()
        .flat_map(|r| evaluate_resource(r, &config.catalog, &config.policy, classifier))
        .collect()
}

/// Runs a full scan. Refuses snapshots with validation errors; warnings
/// are ignored here and reported by `validate`.
pub fn scan(snapshot: &Snapshot, config: &ScanConfig) -> Result<Report, ScanError> {
    let issues = validate_snapshot_at(snapshot, Some(config.scanned_at));
    if issues.iter().any(ValidationIssue::is_error) {
        return Err(ScanError::InvalidSnapshot(issues));
    }
    config.policy.check()?;

    let classifier = PiiClassifier::new(config.dictionary.clone(), snapshot.generated_at.year());
    let exposures = evaluate_all(snapshot, config, &classifier);
    let summary = summarize(&exposures, snapshot);
    Ok(Report::assemble(
        config.scan_id.clone(),
        config.scanned_at,
        snapshot.provider_id.clone(),
        exposures,
        summary,
    )?)
}

/// Census of the snapshot plus per-kind, per-principle and per-region
/// exposure counts.
pub fn summarize(exposures: &[Exposure], snapshot: &Snapshot) -> Summary {
    let mut summary = Summary {
        resources_scanned_by_kind: snapshot.census(),
        total_exposures: exposures.len(),
        ..Summary::default()
    };
    for e in exposures {
        *summary
            .exposures_by_kind
            .entry(e.resource.kind)
            .or_insert(0) += 1;
        *summary
            .exposures_by_principle
            .entry(e.principle)
            .or_insert(0) += 1;
        *summary
            .exposures_by_region
            .entry(e.resource.region.clone())
            .or_insert(0) += 1;
    }
    summary
}
