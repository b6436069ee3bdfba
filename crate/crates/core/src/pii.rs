//! Data-minimization evaluation (R18).
//!
//! Field names are normalized to lowercase tokens and matched against a
//! dictionary of token sequences; sampled cell values are matched against
//! fixed shape tests. Findings whose category is a permitted purpose, or
//! whose (database, table, field) triple is allowlisted, are dropped.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::catalog::RuleId;
use crate::fingerprint::discriminator;
use crate::model::{make_ref, DataPolicy, Database, Exposure, ResourceKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PiiCategory {
    Email,
    PersonName,
    Phone,
    PostalAddress,
    Geolocation,
    IpAddress,
    DeviceId,
    NationalId,
    BirthDate,
}

impl PiiCategory {
    pub const ALL: [PiiCategory; 9] = [
        PiiCategory::Email,
        PiiCategory::PersonName,
        PiiCategory::Phone,
        PiiCategory::PostalAddress,
        PiiCategory::Geolocation,
        PiiCategory::IpAddress,
        PiiCategory::DeviceId,
        PiiCategory::NationalId,
        PiiCategory::BirthDate,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            PiiCategory::Email => "email",
            PiiCategory::PersonName => "person_name",
            PiiCategory::Phone => "phone",
            PiiCategory::PostalAddress => "postal_address",
            PiiCategory::Geolocation => "geolocation",
            PiiCategory::IpAddress => "ip_address",
            PiiCategory::DeviceId => "device_id",
            PiiCategory::NationalId => "national_id",
            PiiCategory::BirthDate => "birth_date",
        }
    }
}

impl fmt::Display for PiiCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Evidence {
    FieldNameMatch,
    ValuePatternMatch,
    Both,
}

impl Evidence {
    pub fn as_str(self) -> &'static str {
        match self {
            Evidence::FieldNameMatch => "field_name_match",
            Evidence::ValuePatternMatch => "value_pattern_match",
            Evidence::Both => "both",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PiiFinding {
    pub database_id: String,
    pub table_name: String,
    pub field_name: String,
    pub category: PiiCategory,
    pub evidence: Evidence,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DictionaryEntry {
    pub category: PiiCategory,
    pub sequences: Vec<Vec<String>>,
}

/// Category to token sequences. Entry order is match priority.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PiiDictionary {
    pub version: u32,
    pub categories: Vec<DictionaryEntry>,
}

const BUILTIN_DICTIONARY: &str = include_str!("../data/pii_dictionary.json");

impl PiiDictionary {
    /// The dictionary shipped in `data/pii_dictionary.json`.
    pub fn builtin() -> Self {
        Self::from_json(BUILTIN_DICTIONARY).expect("bundled PII dictionary is valid")
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        let mut dict: PiiDictionary = serde_json::from_str(text)?;
        for entry in &mut dict.categories {
            for seq in &mut entry.sequences {
                for tok in seq.iter_mut() {
                    *tok = tok.to_lowercase();
                }
            }
            entry.sequences.retain(|s| !s.is_empty());
        }
        Ok(dict)
    }
}

impl Default for PiiDictionary {
    fn default() -> Self {
        Self::builtin()
    }
}

/// Splits an identifier into lowercase tokens at separators, camel-case
/// humps and letter/digit boundaries: `userEmailAddr` → `[user, email, addr]`,
/// `IPAddress` → `[ip, address]`.
pub fn tokenize(name: &str) -> Vec<String> {
    let chars: Vec<char> = name.chars().collect();
    let mut tokens = Vec::new();
    let mut cur = String::new();
    for (i, &c) in chars.iter().enumerate() {
        if !c.is_alphanumeric() {
            if !cur.is_empty() {
                tokens.push(core::mem::take(&mut cur));
            }
            continue;
        }
        if !cur.is_empty() {
            let prev = chars[i - 1];
            let next = chars.get(i + 1).copied();
            let boundary = (prev.is_lowercase() && c.is_uppercase())
                || (prev.is_uppercase()
                    && c.is_uppercase()
                    && next.map(|n| n.is_lowercase()).unwrap_or(false))
                || (prev.is_alphabetic() && c.is_ascii_digit())
                || (prev.is_ascii_digit() && c.is_alphabetic());
            if boundary {
                tokens.push(core::mem::take(&mut cur));
            }
        }
        cur.extend(c.to_lowercase());
    }
    if !cur.is_empty() {
        tokens.push(cur);
    }
    tokens
}

fn contains_sequence(tokens: &[String], seq: &[String]) -> bool {
    !seq.is_empty() && tokens.windows(seq.len()).any(|w| w == seq)
}

fn is_email(v: &str) -> bool {
    let Some((local, domain)) = v.split_once('@') else {
        return false;
    };
    if local.is_empty() || domain.contains('@') || v.chars().any(char::is_whitespace) {
        return false;
    }
    let labels: Vec<&str> = domain.split('.').collect();
    if labels.len() < 2 || labels.iter().any(|l| l.is_empty()) {
        return false;
    }
    let tld = labels[labels.len() - 1];
    tld.len() >= 2 && tld.chars().all(|c| c.is_ascii_alphabetic())
}

fn is_ipv4(v: &str) -> bool {
    let parts: Vec<&str> = v.split('.').collect();
    parts.len() == 4
        && parts.iter().all(|p| {
            !p.is_empty()
                && p.len() <= 3
                && p.bytes().all(|b| b.is_ascii_digit())
                && p.parse::<u16>().map(|n| n <= 255).unwrap_or(false)
        })
}

fn iso_date_parts(v: &str) -> Option<(i32, u32, u32)> {
    let b = v.as_bytes();
    if b.len() != 10 || b[4] != b'-' || b[7] != b'-' {
        return None;
    }
    let digits = |r: core::ops::Range<usize>| {
        v.get(r.clone())
            .filter(|s| s.bytes().all(|c| c.is_ascii_digit()))
    };
    Some((
        digits(0..4)?.parse().ok()?,
        digits(5..7)?.parse().ok()?,
        digits(8..10)?.parse().ok()?,
    ))
}

fn is_phone(v: &str) -> bool {
    if iso_date_parts(v).is_some() {
        return false;
    }
    let body = v.strip_prefix('+').unwrap_or(v);
    if body.is_empty()
        || !body
            .chars()
            .all(|c| c.is_ascii_digit() || matches!(c, ' ' | '-' | '.' | '(' | ')'))
    {
        return false;
    }
    let digits = body.chars().filter(char::is_ascii_digit).count();
    (7..=15).contains(&digits)
}

fn is_birth_date(v: &str, current_year: i32) -> bool {
    match iso_date_parts(v) {
        Some((y, m, d)) => {
            (1900..=current_year).contains(&y) && NaiveDate::from_ymd_opt(y, m, d).is_some()
        }
        None => false,
    }
}

/// Field-name and value classifier. `current_year` bounds plausible birth
/// years; the engine takes it from the snapshot timestamp so scans stay
/// reproducible.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PiiClassifier {
    dictionary: PiiDictionary,
    current_year: i32,
}

impl PiiClassifier {
    pub fn new(dictionary: PiiDictionary, current_year: i32) -> Self {
        Self {
            dictionary,
            current_year,
        }
    }

    pub fn builtin(current_year: i32) -> Self {
        Self::new(PiiDictionary::builtin(), current_year)
    }

    /// Highest-priority category whose token sequence occurs in the
    /// normalized name.
    pub fn classify_field_name(&self, name: &str) -> Option<PiiCategory> {
        let tokens = tokenize(name);
        if tokens.is_empty() {
            return None;
        }
        self.dictionary
            .categories
            .iter()
            .find(|entry| {
                entry
                    .sequences
                    .iter()
                    .any(|s| contains_sequence(&tokens, s))
            })
            .map(|entry| entry.category)
    }

    /// Shape tests in priority order: email, IPv4, phone, ISO birth date.
    pub fn classify_value(&self, value: &str) -> Option<PiiCategory> {
        let v = value.trim();
        if v.is_empty() {
            None
        } else if is_email(v) {
            Some(PiiCategory::Email)
        } else if is_ipv4(v) {
            Some(PiiCategory::IpAddress)
        } else if is_phone(v) {
            Some(PiiCategory::Phone)
        } else if is_birth_date(v, self.current_year) {
            Some(PiiCategory::BirthDate)
        } else {
            None
        }
    }

    /// All findings for a database before policy suppression, in table and
    /// field order. One finding per (field, category).
    pub fn findings(&self, db: &Database) -> Vec<PiiFinding> {
        let mut out = Vec::new();
        for table in &db.tables {
            for field in &table.fields {
                let mut hits: BTreeMap<PiiCategory, (bool, bool)> = BTreeMap::new();
                if let Some(cat) = self.classify_field_name(&field.name) {
                    hits.entry(cat).or_default().0 = true;
                }
                for row in &table.sampled_rows {
                    if let Some(cat) = row.get(&field.name).and_then(|v| self.classify_value(v)) {
                        hits.entry(cat).or_default().1 = true;
                    }
                }
                for (category, (by_name, by_value)) in hits {
                    let evidence = match (by_name, by_value) {
                        (true, true) => Evidence::Both,
                        (true, false) => Evidence::FieldNameMatch,
                        _ => Evidence::ValuePatternMatch,
                    };
                    out.push(PiiFinding {
                        database_id: db.locator.id.clone(),
                        table_name: table.name.clone(),
                        field_name: field.name.clone(),
                        category,
                        evidence,
                    });
                }
            }
        }
        out
    }
}

/// R18: one exposure per personal-data finding that is neither a permitted
/// category nor allowlisted.
pub fn eval_data_minimization(
    db: &Database,
    policy: &DataPolicy,
    classifier: &PiiClassifier,
) -> Vec<Exposure> {
    classifier
        .findings(db)
        .into_iter()
        .filter(|f| !policy.permitted_categories.contains(&f.category))
        .filter(|f| !policy.is_allowlisted(&f.database_id, &f.table_name, &f.field_name))
        .map(|f| {
            Exposure::new(
                RuleId::R18,
                make_ref(&db.locator, ResourceKind::Database),
                discriminator(&[&f.table_name, &f.field_name, f.category.as_str()]),
                format!(
                    "database {} table {} field {} holds {} data ({})",
                    f.database_id,
                    f.table_name,
                    f.field_name,
                    f.category,
                    f.evidence.as_str()
                ),
            )
        })
        .collect()
}
