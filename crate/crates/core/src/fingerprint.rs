//! Stable exposure fingerprints.
//!
//! The digest input is the byte string
//!
//! ```text
//! rule_id|region|kind|id|discriminator
//! ```
//!
//! where each component has `\` and `|` escaped with a backslash, so the
//! encoding is injective. The digest is SHA-256 rendered as 64 lowercase hex
//! characters. Both the layout and the hash are frozen for schema version 1.

use alloc::string::String;
use core::fmt::Write;

use sha2::{Digest, Sha256};

use crate::catalog::RuleId;
use crate::model::ResourceRef;

/// Builds the canonical digest input.
pub fn fingerprint_input(rule: RuleId, resource: &ResourceRef, discriminator: &str) -> String {
    let mut out = String::new();
    let parts = [
        rule.as_str(),
        resource.region.as_str(),
        resource.kind.as_str(),
        resource.id.as_str(),
        discriminator,
    ];
    for (i, part) in parts.iter().enumerate() {
        if i > 0 {
            out.push('|');
        }
        push_escaped(&mut out, part, &['\\', '|']);
    }
    out
}

/// Fingerprint of an exposure, computed from every field except its detail
/// prose.
pub fn fingerprint(rule: RuleId, resource: &ResourceRef, discriminator: &str) -> String {
    let digest = Sha256::digest(fingerprint_input(rule, resource, discriminator).as_bytes());
    let mut hex = String::with_capacity(64);
    for byte in digest {
        let _ = write!(hex, "{byte:02x}");
    }
    hex
}

pub(crate) fn push_escaped(out: &mut String, part: &str, special: &[char]) {
    for c in part.chars() {
        if special.contains(&c) {
            out.push('\\');
        }
        out.push(c);
    }
}

/// Joins discriminator components with `:`, escaping `\` and `:`.
pub fn discriminator(parts: &[&str]) -> String {
    let mut out = String::new();
    for (i, part) in parts.iter().enumerate() {
        if i > 0 {
            out.push(':');
        }
        push_escaped(&mut out, part, &['\\', ':']);
    }
    out
}
