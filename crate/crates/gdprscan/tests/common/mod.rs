//! Random snapshot generation and a brute-force oracle for the rule set.
//!
//! The oracle is written from the rule statements alone and shares no code
//! with the engine. Personal-data findings are checked against labels
//! attached to the generator vocabulary instead of a second classifier.

#![allow(dead_code)]

use std::collections::BTreeSet;

use chrono::{DateTime, TimeZone, Utc};
use gdprscan::gdprscan_core::{
    AccessGrant, AccessPolicy, AllowlistEntry, CloudStorage, DataPolicy, Database, Effect,
    FieldDescriptor, Firewall, FirewallRule, Grantee, Listener, ListenerProtocol, LoadBalancer,
    Locator, PiiCategory, PolicyStatement, PortRange, Protocol, Report, Resource, ResourceKind,
    Route, RouteTarget, Router, Row, RuleDirection, RuleId, Server, ServerState, ServerStorage,
    Snapshot, Table,
};
use rand::seq::SliceRandom;
use rand::Rng;

pub fn epoch() -> DateTime<Utc> {
    Utc.with_ymd_and_hms(2025, 6, 1, 12, 0, 0).unwrap()
}

pub const REGIONS: [&str; 3] = ["eu-1", "eu-2", "us-1"];

const CIDRS: [&str; 8] = [
    "0.0.0.0/0",
    "::/0",
    "10.0.0.0/8",
    "192.168.1.0/24",
    "203.0.113.7",
    "2001:db8::/32",
    "0.0.0.0/1",
    "::/1",
];
const PORTS: [u16; 10] = [20, 21, 22, 23, 25, 79, 80, 81, 443, 8080];
const PURPOSES: [Option<&str>; 4] = [None, Some(""), Some("  "), Some("billing")];
const ACTIONS: [&str; 6] = [
    "*",
    "storage:*",
    "storage:GetObject",
    "compute:Start*",
    "iam:PassRole",
    " * ",
];
const POLICY_RESOURCES: [&str; 5] = ["*", "bucket/*", "arn:db:users", " *", "*/logs"];

/// Field names with the category a reviewer would assign.
pub const FIELD_VOCAB: [(&str, Option<PiiCategory>); 36] = [
    ("email", Some(PiiCategory::Email)),
    ("customerEmail", Some(PiiCategory::Email)),
    ("e_mail", Some(PiiCategory::Email)),
    ("contact-email-address", Some(PiiCategory::Email)),
    ("ssn", Some(PiiCategory::NationalId)),
    ("passport_number", Some(PiiCategory::NationalId)),
    ("taxId", Some(PiiCategory::NationalId)),
    ("dob", Some(PiiCategory::BirthDate)),
    ("date_of_birth", Some(PiiCategory::BirthDate)),
    ("birthDate", Some(PiiCategory::BirthDate)),
    ("phone", Some(PiiCategory::Phone)),
    ("mobileNumber", Some(PiiCategory::Phone)),
    ("TEL", Some(PiiCategory::Phone)),
    ("ip_address", Some(PiiCategory::IpAddress)),
    ("clientIP", Some(PiiCategory::IpAddress)),
    ("IPAddress", Some(PiiCategory::IpAddress)),
    ("device_id", Some(PiiCategory::DeviceId)),
    ("imei", Some(PiiCategory::DeviceId)),
    ("first_name", Some(PiiCategory::PersonName)),
    ("lastName", Some(PiiCategory::PersonName)),
    ("surname", Some(PiiCategory::PersonName)),
    ("lat", Some(PiiCategory::Geolocation)),
    ("longitude", Some(PiiCategory::Geolocation)),
    ("street", Some(PiiCategory::PostalAddress)),
    ("zip_code", Some(PiiCategory::PostalAddress)),
    ("postal_code", Some(PiiCategory::PostalAddress)),
    ("order_id", None),
    ("amount", None),
    ("status", None),
    ("sku", None),
    ("latency_ms", None),
    ("hotel", None),
    ("telemetry", None),
    ("zipper_size", None),
    ("notes", None),
    ("created_at", None),
];

/// Sample values with the category their shape reveals.
pub const VALUE_VOCAB: [(&str, Option<PiiCategory>); 14] = [
    ("alice@example.com", Some(PiiCategory::Email)),
    ("bob.smith@mail.example.org", Some(PiiCategory::Email)),
    ("192.168.1.10", Some(PiiCategory::IpAddress)),
    ("10.0.0.1", Some(PiiCategory::IpAddress)),
    ("+44 20 7946 0958", Some(PiiCategory::Phone)),
    ("(555) 123-4567", Some(PiiCategory::Phone)),
    ("1985-03-14", Some(PiiCategory::BirthDate)),
    ("1900-01-01", Some(PiiCategory::BirthDate)),
    ("2099-01-01", None),
    ("hello", None),
    ("42", None),
    ("12.50", None),
    ("N/A", None),
    ("", None),
];

pub const TTL_FIELD: &str = "expires_at";

fn field_label(name: &str) -> Option<PiiCategory> {
    FIELD_VOCAB
        .iter()
        .find(|(n, _)| *n == name)
        .and_then(|(_, c)| *c)
}

fn value_label(value: &str) -> Option<PiiCategory> {
    VALUE_VOCAB
        .iter()
        .find(|(v, _)| *v == value)
        .and_then(|(_, c)| *c)
}

fn pick<'a, T, R: Rng>(rng: &mut R, items: &'a [T]) -> &'a T {
    items.choose(rng).unwrap()
}

fn opt_str(v: Option<&str>) -> Option<String> {
    v.map(str::to_string)
}

fn random_port_range<R: Rng>(rng: &mut R) -> PortRange {
    if rng.gen_bool(0.15) {
        return PortRange::All;
    }
    let a = *pick(rng, &PORTS);
    let b = *pick(rng, &PORTS);
    PortRange::Range {
        low: a.min(b),
        high: a.max(b),
    }
}

fn random_firewall_rule<R: Rng>(rng: &mut R, direction: RuleDirection) -> FirewallRule {
    let protocol = *pick(
        rng,
        &[
            Protocol::Tcp,
            Protocol::Tcp,
            Protocol::Udp,
            Protocol::Icmp,
            Protocol::All,
        ],
    );
    FirewallRule {
        protocol,
        port_range: random_port_range(rng),
        cidr: pick(rng, &CIDRS).to_string(),
        direction,
    }
}

fn random_listener_protocol<R: Rng>(rng: &mut R) -> ListenerProtocol {
    *pick(
        rng,
        &[
            ListenerProtocol::Http,
            ListenerProtocol::Https,
            ListenerProtocol::Tcp,
            ListenerProtocol::Tls,
        ],
    )
}

fn random_grant<R: Rng>(rng: &mut R) -> AccessGrant {
    let grantee = *pick(
        rng,
        &[
            Grantee::Public,
            Grantee::AnyAuthenticated,
            Grantee::Account,
            Grantee::Principal,
        ],
    );
    AccessGrant {
        grantee,
        principal_id: matches!(grantee, Grantee::Principal | Grantee::Account)
            .then(|| format!("svc-{}", rng.gen_range(0..5))),
    }
}

pub fn random_table<R: Rng>(rng: &mut R, name: String) -> Table {
    let mut names: Vec<&str> = FIELD_VOCAB.iter().map(|(n, _)| *n).collect();
    names.shuffle(rng);
    names.truncate(rng.gen_range(0..=4));
    let ttl_enabled = rng.gen_bool(0.5);
    if ttl_enabled {
        names.push(TTL_FIELD);
    }
    let rows = (0..rng.gen_range(0..=3))
        .map(|_| {
            let mut row = Row::new();
            for n in &names {
                if rng.gen_bool(0.6) {
                    row.insert(n.to_string(), pick(rng, &VALUE_VOCAB).0.to_string());
                }
            }
            row
        })
        .collect();
    Table {
        name,
        fields: names
            .iter()
            .map(|n| FieldDescriptor {
                name: n.to_string(),
                declared_type: "string".into(),
            })
            .collect(),
        ttl_enabled,
        ttl_attribute: ttl_enabled.then(|| TTL_FIELD.to_string()),
        sampled_rows: rows,
    }
}

pub fn random_database<R: Rng>(rng: &mut R, region: &str, id: String) -> Database {
    Database {
        locator: Locator::new(region, id),
        encrypted: rng.gen_bool(0.5),
        tables: (0..rng.gen_range(0..=3))
            .map(|t| random_table(rng, format!("t{t}")))
            .collect(),
    }
}

/// One resource of a random kind; `n` keeps ids unique.
pub fn random_resource<R: Rng>(rng: &mut R, n: usize) -> Resource {
    let region = *pick(rng, &REGIONS);
    let loc = |prefix: &str| {
        let l = Locator::new(region, format!("{prefix}-{n}"));
        if n.is_multiple_of(3) {
            l.named(format!("{prefix} number {n}"))
        } else {
            l
        }
    };
    match rng.gen_range(0..8) {
        0 => Resource::Server(Server {
            locator: loc("srv"),
            state: *pick(rng, &[ServerState::Running, ServerState::Stopped]),
            purpose_tag: opt_str(*pick(rng, &PURPOSES)),
            attached_firewall_ids: (0..rng.gen_range(0..=2))
                .map(|k| format!("fw-{k}"))
                .collect(),
            attached_storage_ids: (0..rng.gen_range(0..=1))
                .map(|k| format!("vol-{k}"))
                .collect(),
        }),
        1 => Resource::ServerStorage(ServerStorage {
            locator: loc("vol"),
            encrypted: rng.gen_bool(0.5),
            attached_server_id: rng.gen_bool(0.5).then(|| "srv-0".to_string()),
            purpose_tag: opt_str(*pick(rng, &PURPOSES)),
        }),
        2 => {
            let l = loc("db");
            let mut db = random_database(rng, region, l.id.clone());
            db.locator = l;
            Resource::Database(db)
        }
        3 => Resource::Firewall(Firewall {
            locator: loc("fw"),
            inbound_rules: (0..rng.gen_range(0..=3))
                .map(|_| random_firewall_rule(rng, RuleDirection::Inbound))
                .collect(),
            outbound_rules: (0..rng.gen_range(0..=3))
                .map(|_| random_firewall_rule(rng, RuleDirection::Outbound))
                .collect(),
        }),
        4 => Resource::LoadBalancer(LoadBalancer {
            locator: loc("lb"),
            listeners: (0..rng.gen_range(1..=3))
                .map(|_| Listener {
                    frontend_protocol: random_listener_protocol(rng),
                    frontend_port: *pick(rng, &[80, 443, 8080, 8443]),
                    backend_protocol: random_listener_protocol(rng),
                    backend_port: *pick(rng, &[80, 443, 8080, 8443]),
                })
                .collect(),
        }),
        5 => Resource::CloudStorage(CloudStorage {
            locator: loc("bucket"),
            encrypted: rng.gen_bool(0.5),
            read_grants: (0..rng.gen_range(0..=2))
                .map(|_| random_grant(rng))
                .collect(),
            write_grants: (0..rng.gen_range(0..=2))
                .map(|_| random_grant(rng))
                .collect(),
        }),
        6 => Resource::AccessPolicy(AccessPolicy {
            locator: loc("pol"),
            statements: (0..rng.gen_range(1..=3))
                .map(|_| PolicyStatement {
                    effect: if rng.gen_bool(0.75) {
                        Effect::Allow
                    } else {
                        Effect::Deny
                    },
                    actions: (0..rng.gen_range(1..=2))
                        .map(|_| pick(rng, &ACTIONS).to_string())
                        .collect(),
                    resources: (0..rng.gen_range(1..=2))
                        .map(|_| pick(rng, &POLICY_RESOURCES).to_string())
                        .collect(),
                })
                .collect(),
        }),
        _ => Resource::Router(Router {
            locator: loc("rt"),
            routes: (0..rng.gen_range(0..=3))
                .map(|_| Route {
                    destination_cidr: pick(rng, &CIDRS).to_string(),
                    target: *pick(
                        rng,
                        &[
                            RouteTarget::InternetGateway,
                            RouteTarget::Nat,
                            RouteTarget::Internal,
                            RouteTarget::Peering,
                        ],
                    ),
                })
                .collect(),
        }),
    }
}

pub fn random_snapshot<R: Rng>(rng: &mut R, max_resources: usize) -> Snapshot {
    let n = rng.gen_range(0..=max_resources);
    Snapshot::new("random", epoch())
        .with_resources((0..n).map(|i| random_resource(rng, i)).collect())
}

/// A random policy drawing allowlist entries from the snapshot's own fields
/// (and a few that match nothing).
pub fn random_policy<R: Rng>(rng: &mut R, snap: &Snapshot) -> DataPolicy {
    let mut policy = DataPolicy::default();
    for cat in PiiCategory::ALL {
        if rng.gen_bool(0.1) {
            policy.permitted_categories.insert(cat);
        }
    }
    for triple in field_triples(snap) {
        if rng.gen_bool(0.2) {
            policy
                .allowlist
                .insert(AllowlistEntry::new(triple.0, triple.1, triple.2));
        }
    }
    if rng.gen_bool(0.3) {
        policy
            .allowlist
            .insert(AllowlistEntry::new("db-x", "t0", "email"));
    }
    policy
}

pub fn field_triples(snap: &Snapshot) -> Vec<(String, String, String)> {
    let mut out = Vec::new();
    for r in &snap.resources {
        if let Resource::Database(db) = r {
            for t in &db.tables {
                for f in &t.fields {
                    out.push((db.locator.id.clone(), t.name.clone(), f.name.clone()));
                }
            }
        }
    }
    out
}

/// (rule, region, kind, id, discriminator)
pub type Key = (RuleId, String, ResourceKind, String, String);

fn esc(part: &str) -> String {
    let mut s = String::new();
    for c in part.chars() {
        if c == '\\' || c == ':' {
            s.push('\\');
        }
        s.push(c);
    }
    s
}

fn join(parts: &[&str]) -> String {
    parts.iter().map(|p| esc(p)).collect::<Vec<_>>().join(":")
}

fn unrestricted(cidr: &str) -> bool {
    cidr.ends_with("/0")
}

fn port_text(p: &PortRange) -> String {
    match p {
        PortRange::All => "all".into(),
        PortRange::Range { low, high } if low == high => low.to_string(),
        PortRange::Range { low, high } => format!("{low}-{high}"),
    }
}

fn admits_plaintext(rule: &FirewallRule) -> bool {
    let in_range = |port: u16| match rule.port_range {
        PortRange::All => true,
        PortRange::Range { low, high } => low <= port && port <= high,
    };
    match rule.protocol {
        Protocol::All => true,
        Protocol::Tcp => [21u16, 23, 25, 80].into_iter().any(in_range),
        _ => false,
    }
}

fn proto_name(p: Protocol) -> &'static str {
    match p {
        Protocol::Tcp => "tcp",
        Protocol::Udp => "udp",
        Protocol::Icmp => "icmp",
        Protocol::All => "all",
    }
}

fn listener_name(p: ListenerProtocol) -> &'static str {
    match p {
        ListenerProtocol::Http => "http",
        ListenerProtocol::Https => "https",
        ListenerProtocol::Tcp => "tcp",
        ListenerProtocol::Tls => "tls",
    }
}

fn encrypted_leg(p: ListenerProtocol) -> bool {
    matches!(p, ListenerProtocol::Https | ListenerProtocol::Tls)
}

fn has_no_purpose(tag: &Option<String>) -> bool {
    match tag {
        None => true,
        Some(t) => t.chars().all(char::is_whitespace),
    }
}

/// Every exposure the rules demand for `snap` under `policy`, as a sorted
/// multiset of keys.
pub fn oracle(snap: &Snapshot, policy: &DataPolicy, disabled: &BTreeSet<RuleId>) -> Vec<Key> {
    let mut keys = Vec::new();
    for resource in &snap.resources {
        let region = resource.region().to_string();
        let id = resource.id().to_string();
        let kind = resource.kind();
        let mut add = |rule: RuleId, disc: String| {
            if !disabled.contains(&rule) {
                keys.push((rule, region.clone(), kind, id.clone(), disc));
            }
        };
        match resource {
            Resource::Database(db) => {
                if !db.encrypted {
                    add(RuleId::R1, String::new());
                }
                for t in &db.tables {
                    if !t.ttl_enabled {
                        add(RuleId::R19, esc(&t.name));
                    }
                    for f in &t.fields {
                        let mut cats = BTreeSet::new();
                        cats.extend(field_label(&f.name));
                        for row in &t.sampled_rows {
                            if let Some(v) = row.get(&f.name) {
                                cats.extend(value_label(v));
                            }
                        }
                        let allowlisted = policy.allowlist.iter().any(|e| {
                            e.database_id == db.locator.id
                                && e.table_name == t.name
                                && e.field_name == f.name
                        });
                        for c in cats {
                            if allowlisted || policy.permitted_categories.contains(&c) {
                                continue;
                            }
                            add(RuleId::R18, join(&[&t.name, &f.name, c.as_str()]));
                        }
                    }
                }
            }
            Resource::Server(s) => {
                if has_no_purpose(&s.purpose_tag) {
                    add(RuleId::R2, String::new());
                    if matches!(s.state, ServerState::Stopped) {
                        add(RuleId::R3, String::new());
                    }
                }
                if s.attached_firewall_ids.is_empty() {
                    add(RuleId::R4, String::new());
                }
            }
            Resource::ServerStorage(v) => {
                if !v.encrypted {
                    add(RuleId::R5, String::new());
                }
                if has_no_purpose(&v.purpose_tag) && v.attached_server_id.is_none() {
                    add(RuleId::R6, String::new());
                }
            }
            Resource::Firewall(fw) => {
                for (dir, rules, open_rule) in [
                    ("inbound", &fw.inbound_rules, RuleId::R8),
                    ("outbound", &fw.outbound_rules, RuleId::R9),
                ] {
                    for (i, rule) in rules.iter().enumerate() {
                        let disc = join(&[
                            &format!("{dir}#{i}"),
                            proto_name(rule.protocol),
                            &port_text(&rule.port_range),
                            &rule.cidr,
                        ]);
                        if admits_plaintext(rule) {
                            add(RuleId::R7, disc.clone());
                        }
                        if unrestricted(&rule.cidr) {
                            add(open_rule, disc);
                        }
                    }
                }
            }
            Resource::LoadBalancer(lb) => {
                for (i, l) in lb.listeners.iter().enumerate() {
                    if !(encrypted_leg(l.frontend_protocol) && encrypted_leg(l.backend_protocol)) {
                        add(
                            RuleId::R10,
                            join(&[
                                &format!("listener#{i}"),
                                &format!(
                                    "{}/{}",
                                    listener_name(l.frontend_protocol),
                                    l.frontend_port
                                ),
                                &format!(
                                    "{}/{}",
                                    listener_name(l.backend_protocol),
                                    l.backend_port
                                ),
                            ]),
                        );
                    }
                }
                if !lb
                    .listeners
                    .iter()
                    .any(|l| encrypted_leg(l.frontend_protocol))
                {
                    add(RuleId::R11, String::new());
                }
            }
            Resource::CloudStorage(cs) => {
                if !cs.encrypted {
                    add(RuleId::R12, String::new());
                }
                for (rule, name, grants) in [
                    (RuleId::R13, "read", &cs.read_grants),
                    (RuleId::R14, "write", &cs.write_grants),
                ] {
                    for (i, g) in grants.iter().enumerate() {
                        let label = match g.grantee {
                            Grantee::Public => "public",
                            Grantee::AnyAuthenticated => "any_authenticated",
                            _ => continue,
                        };
                        add(rule, join(&[&format!("{name}#{i}"), label]));
                    }
                }
            }
            Resource::AccessPolicy(ap) => {
                for (i, st) in ap.statements.iter().enumerate() {
                    if matches!(st.effect, Effect::Deny) {
                        continue;
                    }
                    if st.actions.iter().any(|a| {
                        let a = a.trim();
                        a == "*" || a.ends_with(":*")
                    }) {
                        add(RuleId::R15, format!("statement#{i}"));
                    }
                    if st.resources.iter().any(|r| r.trim() == "*") {
                        add(RuleId::R16, format!("statement#{i}"));
                    }
                }
            }
            Resource::Router(rt) => {
                for (i, route) in rt.routes.iter().enumerate() {
                    if matches!(route.target, RouteTarget::InternetGateway)
                        && unrestricted(&route.destination_cidr)
                    {
                        add(
                            RuleId::R17,
                            join(&[&format!("route#{i}"), &route.destination_cidr]),
                        );
                    }
                }
            }
        }
    }
    keys.sort();
    keys
}

pub fn report_keys(report: &Report) -> Vec<Key> {
    let mut keys: Vec<Key> = report
        .exposures
        .iter()
        .map(|e| {
            (
                e.rule_id,
                e.resource.region.clone(),
                e.resource.kind,
                e.resource.id.clone(),
                e.discriminator.clone(),
            )
        })
        .collect();
    keys.sort();
    keys
}

/// Σ per kind = Σ per principle = Σ per region = total = exposure count.
pub fn summary_consistent(report: &Report) -> bool {
    let s = &report.summary;
    let by_kind: usize = s.exposures_by_kind.values().sum();
    let by_principle: usize = s.exposures_by_principle.values().sum();
    let by_region: usize = s.exposures_by_region.values().sum();
    by_kind == s.total_exposures
        && by_principle == s.total_exposures
        && by_region == s.total_exposures
        && s.total_exposures == report.exposures.len()
}

/// A snapshot of `n` resources with every kind represented.
pub fn large_snapshot<R: Rng>(rng: &mut R, n: usize) -> Snapshot {
    Snapshot::new("synthetic", epoch())
        .with_resources((0..n).map(|i| random_resource(rng, i)).collect())
}
