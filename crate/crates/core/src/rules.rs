//! Evaluators for the integrity & confidentiality rules (R1–R17) and the
//! storage limitation rule (R19). R18 lives in [`crate::pii`].
//!
//! Every evaluator is a pure function of one resource. Exposures are
//! emitted per offending sub-element (firewall rule, listener, grant,
//! statement, route, table), so one resource can carry several.

use alloc::format;
use alloc::vec::Vec;

use crate::catalog::RuleId;
use crate::cidr::is_catch_all;
use crate::fingerprint::discriminator;
use crate::model::{
    make_ref, AccessGrant, AccessPolicy, CloudStorage, Database, Effect, Exposure, Firewall,
    FirewallRule, LoadBalancer, PortRange, Protocol, ResourceKind, RouteTarget, Router, Server,
    ServerState, ServerStorage,
};

/// TCP ports whose plaintext protocols fail R7: ftp, telnet, smtp, http.
pub const INSECURE_TCP_PORTS: [(u16, &str); 4] =
    [(21, "ftp"), (23, "telnet"), (25, "smtp"), (80, "http")];

/// True when a firewall rule admits an insecure protocol: any rule over
/// all protocols, or a TCP rule whose range covers an insecure port.
/// SSH (tcp/22), TLS ports and ICMP are not insecure.
pub fn is_insecure_rule(rule: &FirewallRule) -> bool {
    match rule.protocol {
        Protocol::All => true,
        Protocol::Tcp => INSECURE_TCP_PORTS
            .iter()
            .any(|&(port, _)| rule.port_range.contains(port)),
        Protocol::Udp | Protocol::Icmp => false,
    }
}

fn is_blank(tag: &Option<alloc::string::String>) -> bool {
    tag.as_deref().map(|t| t.trim().is_empty()).unwrap_or(true)
}

/// R1: the database must be encrypted.
pub fn eval_database_ic(db: &Database) -> Vec<Exposure> {
    if db.encrypted {
        return Vec::new();
    }
    let r = make_ref(&db.locator, ResourceKind::Database);
    let detail = format!("database {} is not encrypted", db.locator.id);
    alloc::vec![Exposure::new(RuleId::R1, r, "", detail)]
}

/// R2 (no purpose), R3 (no purpose and stopped), R4 (no firewall).
pub fn eval_server(server: &Server) -> Vec<Exposure> {
    let mut out = Vec::new();
    let id = &server.locator.id;
    let r = || make_ref(&server.locator, ResourceKind::Server);
    let purposeless = is_blank(&server.purpose_tag);
    if purposeless {
        out.push(Exposure::new(
            RuleId::R2,
            r(),
            "",
            format!("server {id} has no purpose tag"),
        ));
        if server.state == ServerState::Stopped {
            out.push(Exposure::new(
                RuleId::R3,
                r(),
                "",
                format!("server {id} is stopped without a purpose: candidate for removal"),
            ));
        }
    }
    if server.attached_firewall_ids.is_empty() {
        out.push(Exposure::new(
            RuleId::R4,
            r(),
            "",
            format!("server {id} has no attached firewall"),
        ));
    }
    out
}

/// R5 (unencrypted) and R6 (no purpose and not attached to a server).
pub fn eval_server_storage(vol: &ServerStorage) -> Vec<Exposure> {
    let mut out = Vec::new();
    let id = &vol.locator.id;
    let r = || make_ref(&vol.locator, ResourceKind::ServerStorage);
    if !vol.encrypted {
        out.push(Exposure::new(
            RuleId::R5,
            r(),
            "",
            format!("server storage {id} is not encrypted"),
        ));
    }
    if is_blank(&vol.purpose_tag) && vol.attached_server_id.is_none() {
        out.push(Exposure::new(
            RuleId::R6,
            r(),
            "",
            format!("server storage {id} has no purpose tag and no attached server"),
        ));
    }
    out
}

fn firewall_rule_disc(direction: &str, index: usize, rule: &FirewallRule) -> alloc::string::String {
    discriminator(&[
        &format!("{direction}#{index}"),
        rule.protocol.as_str(),
        &port_text(rule.port_range),
        &rule.cidr,
    ])
}

fn port_text(range: PortRange) -> alloc::string::String {
    format!("{range}")
}

/// R7 per rule admitting an insecure protocol (either direction), R8 per
/// inbound rule from a catch-all source, R9 per outbound rule to a
/// catch-all destination.
pub fn eval_firewall(fw: &Firewall) -> Vec<Exposure> {
    let mut out = Vec::new();
    let r = || make_ref(&fw.locator, ResourceKind::Firewall);
    let lists = [
        ("inbound", &fw.inbound_rules),
        ("outbound", &fw.outbound_rules),
    ];
    for (direction, rules) in lists {
        for (index, rule) in rules.iter().enumerate() {
            let disc = firewall_rule_disc(direction, index, rule);
            let line = format!(
                "{direction} rule #{index} {}/{} {}",
                rule.protocol.as_str(),
                rule.port_range,
                rule.cidr
            );
            if is_insecure_rule(rule) {
                out.push(Exposure::new(
                    RuleId::R7,
                    r(),
                    disc.clone(),
                    format!("{line} allows an insecure protocol"),
                ));
            }
            if is_catch_all(&rule.cidr) {
                let (rule_id, what) = if direction == "inbound" {
                    (RuleId::R8, "accepts traffic from any source")
                } else {
                    (RuleId::R9, "sends traffic to any destination")
                };
                out.push(Exposure::new(rule_id, r(), disc, format!("{line} {what}")));
            }
        }
    }
    out
}

/// R10 per listener with an unencrypted frontend or backend leg; R11 once
/// per balancer when no listener has a secure frontend. A balancer serving
/// both http and https passes R11.
pub fn eval_load_balancer(lb: &LoadBalancer) -> Vec<Exposure> {
    let mut out = Vec::new();
    let id = &lb.locator.id;
    let r = || make_ref(&lb.locator, ResourceKind::LoadBalancer);
    for (index, l) in lb.listeners.iter().enumerate() {
        if l.frontend_protocol.is_secure() && l.backend_protocol.is_secure() {
            continue;
        }
        let disc = discriminator(&[
            &format!("listener#{index}"),
            &format!("{}/{}", l.frontend_protocol.as_str(), l.frontend_port),
            &format!("{}/{}", l.backend_protocol.as_str(), l.backend_port),
        ]);
        out.push(Exposure::new(
            RuleId::R10,
            r(),
            disc,
            format!(
                "load balancer {id} listener #{index} {}/{} -> {}/{} is not encrypted end to end",
                l.frontend_protocol.as_str(),
                l.frontend_port,
                l.backend_protocol.as_str(),
                l.backend_port
            ),
        ));
    }
    if !lb.listeners.iter().any(|l| l.frontend_protocol.is_secure()) {
        out.push(Exposure::new(
            RuleId::R11,
            r(),
            "",
            format!("load balancer {id} has no listener with a secure protocol"),
        ));
    }
    out
}

fn grant_disc(list: &str, index: usize, grant: &AccessGrant) -> alloc::string::String {
    discriminator(&[&format!("{list}#{index}"), grant.grantee.as_str()])
}

/// R12 (unencrypted), R13 per unrestricted read grant, R14 per unrestricted
/// write grant.
pub fn eval_cloud_storage(cs: &CloudStorage) -> Vec<Exposure> {
    let mut out = Vec::new();
    let id = &cs.locator.id;
    let r = || make_ref(&cs.locator, ResourceKind::CloudStorage);
    if !cs.encrypted {
        out.push(Exposure::new(
            RuleId::R12,
            r(),
            "",
            format!("cloud storage {id} is not encrypted"),
        ));
    }
    let lists = [
        (RuleId::R13, "read", &cs.read_grants),
        (RuleId::R14, "write", &cs.write_grants),
    ];
    for (rule, list, grants) in lists {
        for (index, g) in grants.iter().enumerate() {
            if g.grantee.is_unrestricted() {
                out.push(Exposure::new(
                    rule,
                    r(),
                    grant_disc(list, index, g),
                    format!(
                        "cloud storage {id} {list} grant #{index} is open to {}",
                        g.grantee.as_str()
                    ),
                ));
            }
        }
    }
    out
}

/// `*` or a `service:*` action grants every action of its scope.
pub fn is_unconditional_action(action: &str) -> bool {
    let a = action.trim();
    a == "*" || a.ends_with(":*")
}

pub fn is_unconditional_resource(resource: &str) -> bool {
    resource.trim() == "*"
}

/// R15 per allow statement with a wildcard action, R16 per allow statement
/// with a wildcard resource. Deny statements never fire.
pub fn eval_access_policy(ap: &AccessPolicy) -> Vec<Exposure> {
    let mut out = Vec::new();
    let id = &ap.locator.id;
    let r = || make_ref(&ap.locator, ResourceKind::AccessPolicy);
    for (index, st) in ap.statements.iter().enumerate() {
        if st.effect == Effect::Deny {
            continue;
        }
        let disc = format!("statement#{index}");
        if let Some(action) = st.actions.iter().find(|a| is_unconditional_action(a)) {
            out.push(Exposure::new(
                RuleId::R15,
                r(),
                disc.clone(),
                format!(
                    "access policy {id} statement #{index} allows unconditional action {action}"
                ),
            ));
        }
        if st
            .resources
            .iter()
            .any(|res| is_unconditional_resource(res))
        {
            out.push(Exposure::new(
                RuleId::R16,
                r(),
                disc,
                format!("access policy {id} statement #{index} applies to every resource"),
            ));
        }
    }
    out
}

/// R17 per catch-all route through an internet gateway. NAT, internal and
/// peering targets do not fire.
pub fn eval_router(rt: &Router) -> Vec<Exposure> {
    let id = &rt.locator.id;
    rt.routes
        .iter()
        .enumerate()
        .filter(|(_, route)| {
            route.target == RouteTarget::InternetGateway && is_catch_all(&route.destination_cidr)
        })
        .map(|(index, route)| {
            Exposure::new(
                RuleId::R17,
                make_ref(&rt.locator, ResourceKind::Router),
                discriminator(&[&format!("route#{index}"), &route.destination_cidr]),
                format!(
                    "router {id} route #{index} sends {} directly to an internet gateway",
                    route.destination_cidr
                ),
            )
        })
        .collect()
}

/// R19 per table without a TTL mechanism.
pub fn eval_storage_limitation(db: &Database) -> Vec<Exposure> {
    db.tables
        .iter()
        .filter(|t| !t.ttl_enabled)
        .map(|t| {
            Exposure::new(
                RuleId::R19,
                make_ref(&db.locator, ResourceKind::Database),
                discriminator(&[&t.name]),
                format!(
                    "database {} table {} has no expiry (TTL) mechanism",
                    db.locator.id, t.name
                ),
            )
        })
        .collect()
}
