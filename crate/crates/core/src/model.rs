//! Domain types shared by validation, rules, the engine and reports.
//!
//! Field names match the external document formats (lower_snake_case).
//! Every type here is plain immutable data.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;

use chrono::{DateTime, Utc};
use serde::de::{self, SeqAccess, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::catalog::{Principle, RuleId};
use crate::fingerprint::fingerprint;
use crate::pii::PiiCategory;

/// Document schema version understood by this build. Fingerprints are
/// frozen per schema version.
pub const SCHEMA_VERSION: &str = "1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ResourceKind {
    Server,
    ServerStorage,
    Database,
    Firewall,
    LoadBalancer,
    CloudStorage,
    AccessPolicy,
    Router,
}

impl ResourceKind {
    pub const ALL: [ResourceKind; 8] = [
        ResourceKind::Server,
        ResourceKind::ServerStorage,
        ResourceKind::Database,
        ResourceKind::Firewall,
        ResourceKind::LoadBalancer,
        ResourceKind::CloudStorage,
        ResourceKind::AccessPolicy,
        ResourceKind::Router,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ResourceKind::Server => "server",
            ResourceKind::ServerStorage => "server_storage",
            ResourceKind::Database => "database",
            ResourceKind::Firewall => "firewall",
            ResourceKind::LoadBalancer => "load_balancer",
            ResourceKind::CloudStorage => "cloud_storage",
            ResourceKind::AccessPolicy => "access_policy",
            ResourceKind::Router => "router",
        }
    }
}

impl fmt::Display for ResourceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Where a resource lives and what it is called, without its kind.
/// Flattened into every resource object.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Locator {
    pub region: String,
    pub id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
}

impl Locator {
    pub fn new(region: impl Into<String>, id: impl Into<String>) -> Self {
        Self {
            region: region.into(),
            id: id.into(),
            name: None,
        }
    }

    pub fn named(mut self, name: impl Into<String>) -> Self {
        self.name = Some(name.into());
        self
    }
}

/// Locates one resource: region, kind, id and display name.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ResourceRef {
    pub region: String,
    pub kind: ResourceKind,
    pub id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
}

impl fmt::Display for ResourceRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}/{}", self.region, self.kind, self.id)?;
        if let Some(name) = &self.name {
            write!(f, " ({name})")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ServerState {
    Running,
    Stopped,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Server {
    #[serde(flatten)]
    pub locator: Locator,
    pub state: ServerState,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub purpose_tag: Option<String>,
    #[serde(default)]
    pub attached_firewall_ids: Vec<String>,
    #[serde(default)]
    pub attached_storage_ids: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ServerStorage {
    #[serde(flatten)]
    pub locator: Locator,
    pub encrypted: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub attached_server_id: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub purpose_tag: Option<String>,
}

/// Column name and its declared type.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FieldDescriptor {
    pub name: String,
    pub declared_type: String,
}

/// One sampled row: field name to cell value.
pub type Row = BTreeMap<String, String>;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Table {
    pub name: String,
    #[serde(default)]
    pub fields: Vec<FieldDescriptor>,
    pub ttl_enabled: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ttl_attribute: Option<String>,
    #[serde(default)]
    pub sampled_rows: Vec<Row>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Database {
    #[serde(flatten)]
    pub locator: Locator,
    pub encrypted: bool,
    #[serde(default)]
    pub tables: Vec<Table>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Protocol {
    Tcp,
    Udp,
    Icmp,
    All,
}

impl Protocol {
    pub fn as_str(self) -> &'static str {
        match self {
            Protocol::Tcp => "tcp",
            Protocol::Udp => "udp",
            Protocol::Icmp => "icmp",
            Protocol::All => "all",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RuleDirection {
    Inbound,
    Outbound,
}

impl RuleDirection {
    pub fn as_str(self) -> &'static str {
        match self {
            RuleDirection::Inbound => "inbound",
            RuleDirection::Outbound => "outbound",
        }
    }
}

/// Inclusive port range. Serialized as the string `"all"` or `[low, high]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PortRange {
    All,
    Range { low: u16, high: u16 },
}

impl PortRange {
    pub fn single(port: u16) -> Self {
        PortRange::Range {
            low: port,
            high: port,
        }
    }

    pub fn contains(&self, port: u16) -> bool {
        match *self {
            PortRange::All => true,
            PortRange::Range { low, high } => low <= port && port <= high,
        }
    }
}

impl fmt::Display for PortRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            PortRange::All => f.write_str("all"),
            PortRange::Range { low, high } if low == high => write!(f, "{low}"),
            PortRange::Range { low, high } => write!(f, "{low}-{high}"),
        }
    }
}

impl Serialize for PortRange {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match *self {
            PortRange::All => serializer.serialize_str("all"),
            PortRange::Range { low, high } => [low, high].serialize(serializer),
        }
    }
}

impl<'de> Deserialize<'de> for PortRange {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        struct PortRangeVisitor;

        impl<'de> Visitor<'de> for PortRangeVisitor {
            type Value = PortRange;

            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("\"all\" or a [low, high] port pair")
            }

            fn visit_str<E: de::Error>(self, v: &str) -> Result<PortRange, E> {
                if v == "all" {
                    Ok(PortRange::All)
                } else {
                    Err(E::invalid_value(de::Unexpected::Str(v), &self))
                }
            }

            fn visit_seq<A: SeqAccess<'de>>(self, mut seq: A) -> Result<PortRange, A::Error> {
                let low: u16 = seq
                    .next_element()?
                    .ok_or_else(|| de::Error::invalid_length(0, &self))?;
                let high: u16 = seq
                    .next_element()?
                    .ok_or_else(|| de::Error::invalid_length(1, &self))?;
                if seq.next_element::<de::IgnoredAny>()?.is_some() {
                    return Err(de::Error::invalid_length(3, &self));
                }
                Ok(PortRange::Range { low, high })
            }
        }

        deserializer.deserialize_any(PortRangeVisitor)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FirewallRule {
    pub protocol: Protocol,
    pub port_range: PortRange,
    pub cidr: String,
    pub direction: RuleDirection,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Firewall {
    #[serde(flatten)]
    pub locator: Locator,
    #[serde(default)]
    pub inbound_rules: Vec<FirewallRule>,
    #[serde(default)]
    pub outbound_rules: Vec<FirewallRule>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ListenerProtocol {
    Http,
    Https,
    Tcp,
    Tls,
}

impl ListenerProtocol {
    /// `https` and `tls` carry encrypted traffic; `http` and plain `tcp` do not.
    pub fn is_secure(self) -> bool {
        matches!(self, ListenerProtocol::Https | ListenerProtocol::Tls)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ListenerProtocol::Http => "http",
            ListenerProtocol::Https => "https",
            ListenerProtocol::Tcp => "tcp",
            ListenerProtocol::Tls => "tls",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Listener {
    pub frontend_protocol: ListenerProtocol,
    pub frontend_port: u16,
    pub backend_protocol: ListenerProtocol,
    pub backend_port: u16,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LoadBalancer {
    #[serde(flatten)]
    pub locator: Locator,
    pub listeners: Vec<Listener>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Grantee {
    Public,
    AnyAuthenticated,
    Account,
    Principal,
}

impl Grantee {
    /// Grants that reach beyond a named account or principal.
    pub fn is_unrestricted(self) -> bool {
        matches!(self, Grantee::Public | Grantee::AnyAuthenticated)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Grantee::Public => "public",
            Grantee::AnyAuthenticated => "any_authenticated",
            Grantee::Account => "account",
            Grantee::Principal => "principal",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AccessGrant {
    pub grantee: Grantee,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub principal_id: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CloudStorage {
    #[serde(flatten)]
    pub locator: Locator,
    pub encrypted: bool,
    #[serde(default)]
    pub read_grants: Vec<AccessGrant>,
    #[serde(default)]
    pub write_grants: Vec<AccessGrant>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Effect {
    Allow,
    Deny,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PolicyStatement {
    pub effect: Effect,
    pub actions: Vec<String>,
    pub resources: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AccessPolicy {
    #[serde(flatten)]
    pub locator: Locator,
    pub statements: Vec<PolicyStatement>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RouteTarget {
    InternetGateway,
    Nat,
    Internal,
    Peering,
}

impl RouteTarget {
    pub fn as_str(self) -> &'static str {
        match self {
            RouteTarget::InternetGateway => "internet_gateway",
            RouteTarget::Nat => "nat",
            RouteTarget::Internal => "internal",
            RouteTarget::Peering => "peering",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Route {
    pub destination_cidr: String,
    pub target: RouteTarget,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Router {
    #[serde(flatten)]
    pub locator: Locator,
    #[serde(default)]
    pub routes: Vec<Route>,
}

/// A resource of one of the eight supported kinds, tagged by `kind`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Resource {
    Server(Server),
    ServerStorage(ServerStorage),
    Database(Database),
    Firewall(Firewall),
    LoadBalancer(LoadBalancer),
    CloudStorage(CloudStorage),
    AccessPolicy(AccessPolicy),
    Router(Router),
}

impl Resource {
    pub fn kind(&self) -> ResourceKind {
        match self {
            Resource::Server(_) => ResourceKind::Server,
            Resource::ServerStorage(_) => ResourceKind::ServerStorage,
            Resource::Database(_) => ResourceKind::Database,
            Resource::Firewall(_) => ResourceKind::Firewall,
            Resource::LoadBalancer(_) => ResourceKind::LoadBalancer,
            Resource::CloudStorage(_) => ResourceKind::CloudStorage,
            Resource::AccessPolicy(_) => ResourceKind::AccessPolicy,
            Resource::Router(_) => ResourceKind::Router,
        }
    }

    pub fn locator(&self) -> &Locator {
        match self {
            Resource::Server(r) => &r.locator,
            Resource::ServerStorage(r) => &r.locator,
            Resource::Database(r) => &r.locator,
            Resource::Firewall(r) => &r.locator,
            Resource::LoadBalancer(r) => &r.locator,
            Resource::CloudStorage(r) => &r.locator,
            Resource::AccessPolicy(r) => &r.locator,
            Resource::Router(r) => &r.locator,
        }
    }

    pub fn region(&self) -> &str {
        &self.locator().region
    }

    pub fn id(&self) -> &str {
        &self.locator().id
    }

    pub fn resource_ref(&self) -> ResourceRef {
        make_ref(self.locator(), self.kind())
    }

    /// Canonical ordering key: region, kind, id.
    pub fn sort_key(&self) -> (&str, ResourceKind, &str) {
        (self.region(), self.kind(), self.id())
    }
}

pub(crate) fn make_ref(locator: &Locator, kind: ResourceKind) -> ResourceRef {
    ResourceRef {
        region: locator.region.clone(),
        kind,
        id: locator.id.clone(),
        name: locator.name.clone(),
    }
}

/// Point-in-time inventory of infrastructure resources.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Snapshot {
    pub schema_version: String,
    pub provider_id: String,
    pub generated_at: DateTime<Utc>,
    #[serde(default)]
    pub resources: Vec<Resource>,
}

impl Snapshot {
    pub fn new(provider_id: impl Into<String>, generated_at: DateTime<Utc>) -> Self {
        Self {
            schema_version: SCHEMA_VERSION.into(),
            provider_id: provider_id.into(),
            generated_at,
            resources: Vec::new(),
        }
    }

    pub fn with_resources(mut self, resources: Vec<Resource>) -> Self {
        self.resources = resources;
        self
    }

    /// Per-kind resource counts. Kinds with no resources are absent.
    pub fn census(&self) -> BTreeMap<ResourceKind, usize> {
        let mut census = BTreeMap::new();
        for r in &self.resources {
            *census.entry(r.kind()).or_insert(0) += 1;
        }
        census
    }

    /// Sorts resources by (region, kind, id).
    pub fn sort_canonical(&mut self) {
        self.resources
            .sort_by(|a, b| a.sort_key().cmp(&b.sort_key()));
    }
}

/// One detected violation of a rule by a resource.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Exposure {
    pub fingerprint: String,
    pub rule_id: RuleId,
    pub principle: Principle,
    pub resource: ResourceRef,
    /// Machine-readable locator of the offending element inside the
    /// resource (rule index, listener index, table and field, ...).
    /// Empty when the resource as a whole is at fault.
    pub discriminator: String,
    pub detail: String,
}

impl Exposure {
    /// Builds an exposure, deriving its principle and fingerprint.
    pub fn new(
        rule_id: RuleId,
        resource: ResourceRef,
        discriminator: impl Into<String>,
        detail: impl Into<String>,
    ) -> Self {
        let discriminator = discriminator.into();
        let fingerprint = fingerprint(rule_id, &resource, &discriminator);
        Self {
            fingerprint,
            rule_id,
            principle: rule_id.principle(),
            resource,
            discriminator,
            detail: detail.into(),
        }
    }

    /// Order used in reports: rule, region, kind, id, detail.
    pub fn canonical_cmp(&self, other: &Self) -> Ordering {
        (
            self.rule_id,
            &self.resource.region,
            self.resource.kind,
            &self.resource.id,
            &self.detail,
            &self.fingerprint,
        )
            .cmp(&(
                other.rule_id,
                &other.resource.region,
                other.resource.kind,
                &other.resource.id,
                &other.detail,
                &other.fingerprint,
            ))
    }
}

/// Rollups over the exposures of one scan.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Summary {
    pub resources_scanned_by_kind: BTreeMap<ResourceKind, usize>,
    pub exposures_by_kind: BTreeMap<ResourceKind, usize>,
    pub exposures_by_principle: BTreeMap<Principle, usize>,
    pub exposures_by_region: BTreeMap<String, usize>,
    pub total_exposures: usize,
}

impl Summary {
    /// All three exposure rollups add up to the total.
    pub fn is_consistent(&self) -> bool {
        let kinds: usize = self.exposures_by_kind.values().sum();
        let principles: usize = self.exposures_by_principle.values().sum();
        let regions: usize = self.exposures_by_region.values().sum();
        kinds == self.total_exposures
            && principles == self.total_exposures
            && regions == self.total_exposures
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ReportError {
    #[error("unsupported report schema_version `{0}`")]
    SchemaVersion(String),
    #[error("duplicate exposure fingerprint {0}")]
    DuplicateFingerprint(String),
    #[error("exposure fingerprint {0} does not match its fields")]
    FingerprintMismatch(String),
    #[error("exposure {0} carries the wrong principle for its rule")]
    PrincipleMismatch(String),
    #[error("exposures are not in canonical order")]
    Unsorted,
    #[error("summary rollups do not match the exposure list")]
    InconsistentSummary,
}

/// Result of one scan, ready for serialization and diffing.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Report {
    pub schema_version: String,
    pub scan_id: String,
    pub scanned_at: DateTime<Utc>,
    pub snapshot_provider: String,
    pub exposures: Vec<Exposure>,
    pub summary: Summary,
}

impl Report {
    /// Sorts the exposures canonically and rejects duplicate fingerprints.
    pub fn assemble(
        scan_id: String,
        scanned_at: DateTime<Utc>,
        snapshot_provider: String,
        mut exposures: Vec<Exposure>,
        summary: Summary,
    ) -> Result<Self, ReportError> {
        exposures.sort_by(Exposure::canonical_cmp);
        let report = Self {
            schema_version: SCHEMA_VERSION.into(),
            scan_id,
            scanned_at,
            snapshot_provider,
            exposures,
            summary,
        };
        report.check()?;
        Ok(report)
    }

    /// Checks the report invariants: known schema, unique and recomputable
    /// fingerprints, canonical order, and a summary matching the exposures.
    pub fn check(&self) -> Result<(), ReportError> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(ReportError::SchemaVersion(self.schema_version.clone()));
        }
        let mut seen = BTreeSet::new();
        for e in &self.exposures {
            if e.principle != e.rule_id.principle() {
                return Err(ReportError::PrincipleMismatch(e.fingerprint.clone()));
            }
            if fingerprint(e.rule_id, &e.resource, &e.discriminator) != e.fingerprint {
                return Err(ReportError::FingerprintMismatch(e.fingerprint.clone()));
            }
            if !seen.insert(e.fingerprint.as_str()) {
                return Err(ReportError::DuplicateFingerprint(e.fingerprint.clone()));
            }
        }
        if self
            .exposures
            .windows(2)
            .any(|w| w[0].canonical_cmp(&w[1]) == Ordering::Greater)
        {
            return Err(ReportError::Unsorted);
        }
        let s = &self.summary;
        if !s.is_consistent() || s.total_exposures != self.exposures.len() {
            return Err(ReportError::InconsistentSummary);
        }
        Ok(())
    }

    pub fn count(&self, rule: RuleId) -> usize {
        self.exposures.iter().filter(|e| e.rule_id == rule).count()
    }
}

/// A reviewed (database, table, field) triple exempt from data-minimization
/// findings.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct AllowlistEntry {
    pub database_id: String,
    pub table_name: String,
    pub field_name: String,
}

impl AllowlistEntry {
    pub fn new(
        database_id: impl Into<String>,
        table_name: impl Into<String>,
        field_name: impl Into<String>,
    ) -> Self {
        Self {
            database_id: database_id.into(),
            table_name: table_name.into(),
            field_name: field_name.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PolicyError {
    #[error("allowlist entry {index} has an empty {field}")]
    EmptyComponent { index: usize, field: &'static str },
    #[error("allowlist entry {index} uses a wildcard in {field}")]
    Wildcard { index: usize, field: &'static str },
}

/// Declared collection purpose (as permitted categories) plus the allowlist.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DataPolicy {
    #[serde(default)]
    pub permitted_categories: BTreeSet<PiiCategory>,
    #[serde(default)]
    pub allowlist: BTreeSet<AllowlistEntry>,
}

impl DataPolicy {
    /// Allowlist components must be non-empty literals.
    pub fn check(&self) -> Result<(), PolicyError> {
        for (index, entry) in self.allowlist.iter().enumerate() {
            for (field, value) in [
                ("database_id", &entry.database_id),
                ("table_name", &entry.table_name),
                ("field_name", &entry.field_name),
            ] {
                if value.trim().is_empty() {
                    return Err(PolicyError::EmptyComponent { index, field });
                }
                if value.contains('*') || value.contains('?') {
                    return Err(PolicyError::Wildcard { index, field });
                }
            }
        }
        Ok(())
    }

    pub fn is_allowlisted(&self, database_id: &str, table_name: &str, field_name: &str) -> bool {
        self.allowlist
            .contains(&AllowlistEntry::new(database_id, table_name, field_name))
    }
}
