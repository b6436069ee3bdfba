//! Privacy rule engine over provider-neutral infrastructure snapshots.
//!
//! The crate is `no_std` (with `alloc`) unless the `std` feature is enabled.
//! It holds everything that is pure: the domain model, snapshot validation,
//! the nineteen rule evaluators, personal-data classification, the scan
//! engine, report diffing and the text renderer. File formats, the
//! provider client and the command-line tool live in the `gdprscan` crate.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod catalog;
pub mod cidr;
pub mod engine;
pub mod fingerprint;
pub mod model;
pub mod pii;
pub mod report;
pub mod rules;
pub mod validate;

pub use catalog::{CatalogEntry, CatalogError, Principle, RuleCatalog, RuleId};
pub use engine::{scan, summarize, ScanConfig, ScanError};
pub use fingerprint::fingerprint;
pub use model::{
    AccessGrant, AccessPolicy, AllowlistEntry, CloudStorage, DataPolicy, Database, Effect,
    Exposure, FieldDescriptor, Firewall, FirewallRule, Grantee, Listener, ListenerProtocol,
    LoadBalancer, Locator, PolicyError, PolicyStatement, PortRange, Protocol, Report, ReportError,
    Resource, ResourceKind, ResourceRef, Route, RouteTarget, Router, Row, RuleDirection, Server,
    ServerState, ServerStorage, Snapshot, Summary, Table, SCHEMA_VERSION,
};
pub use pii::{Evidence, PiiCategory, PiiClassifier, PiiDictionary, PiiFinding};
pub use report::{diff, render_diff_text, render_text, DiffError, ReportDiff};
pub use validate::{validate_snapshot, validate_snapshot_at, Severity, ValidationIssue};
