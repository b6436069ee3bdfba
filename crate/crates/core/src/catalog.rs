//! The rule catalog: nineteen privacy requirements grouped under three
//! data-protection principles.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use serde::{Deserialize, Serialize};

/// Data-protection principle a rule operationalizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Principle {
    IntegrityConfidentiality,
    DataMinimization,
    StorageLimitation,
}

impl Principle {
    pub const ALL: [Principle; 3] = [
        Principle::IntegrityConfidentiality,
        Principle::DataMinimization,
        Principle::StorageLimitation,
    ];

    /// Stable snake_case name, as used in report documents.
    pub fn as_str(self) -> &'static str {
        match self {
            Principle::IntegrityConfidentiality => "integrity_confidentiality",
            Principle::DataMinimization => "data_minimization",
            Principle::StorageLimitation => "storage_limitation",
        }
    }

    /// Display label used in text output.
    pub fn label(self) -> &'static str {
        match self {
            Principle::IntegrityConfidentiality => "Integrity and Confidentiality",
            Principle::DataMinimization => "Data Minimization",
            Principle::StorageLimitation => "Storage Limitation",
        }
    }
}

impl fmt::Display for Principle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Principle {
    type Err = CatalogError;

    /// Accepts snake_case and kebab-case spellings.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.replace('-', "_").to_ascii_lowercase().as_str() {
            "integrity_confidentiality" => Ok(Principle::IntegrityConfidentiality),
            "data_minimization" => Ok(Principle::DataMinimization),
            "storage_limitation" => Ok(Principle::StorageLimitation),
            _ => Err(CatalogError::UnknownPrinciple(s.to_string())),
        }
    }
}

macro_rules! rule_ids {
    ($($id:ident = $n:literal),+ $(,)?) => {
        /// Identifier of one privacy requirement.
        #[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
        pub enum RuleId {
            $($id),+
        }

        impl RuleId {
            pub const ALL: [RuleId; 19] = [$(RuleId::$id),+];

            pub fn number(self) -> u8 {
                match self {
                    $(RuleId::$id => $n),+
                }
            }

            pub fn as_str(self) -> &'static str {
                match self {
                    $(RuleId::$id => stringify!($id)),+
                }
            }
        }

        impl FromStr for RuleId {
            type Err = CatalogError;

            fn from_str(s: &str) -> Result<Self, Self::Err> {
                match s.to_ascii_uppercase().as_str() {
                    $(stringify!($id) => Ok(RuleId::$id),)+
                    _ => Err(CatalogError::UnknownRule(s.to_string())),
                }
            }
        }
    };
}

rule_ids! {
    R1 = 1, R2 = 2, R3 = 3, R4 = 4, R5 = 5, R6 = 6, R7 = 7, R8 = 8, R9 = 9, R10 = 10,
    R11 = 11, R12 = 12, R13 = 13, R14 = 14, R15 = 15, R16 = 16, R17 = 17, R18 = 18, R19 = 19,
}

impl RuleId {
    /// The principle this rule belongs to. Total over all rules.
    pub fn principle(self) -> Principle {
        match self {
            RuleId::R18 => Principle::DataMinimization,
            RuleId::R19 => Principle::StorageLimitation,
            _ => Principle::IntegrityConfidentiality,
        }
    }

    /// Requirement text, worded exactly as the requirement is stated.
    pub fn title(self) -> &'static str {
        match self {
            RuleId::R1 => "A database must be encrypted",
            RuleId::R2 => "Each server must exist with a purpose",
            RuleId::R3 => "Each server without purpose must be removed",
            RuleId::R4 => "Each server must have a corresponding cloud firewall",
            RuleId::R5 => "Each server storage must be encrypted",
            RuleId::R6 => "Each server storage must exist for a purpose",
            RuleId::R7 => "Each cloud firewall must use secure protocols inbound and outbound",
            RuleId::R8 => "Each cloud firewall must limit access to reliable sources",
            RuleId::R9 => {
                "Each cloud firewall must limit outbound communication to reliable sources"
            }
            RuleId::R10 => "Each load balancer must use end to end encryption",
            RuleId::R11 => "Each load balancer must use secure protocols",
            RuleId::R12 => "Each cloud storage resource must be encrypted",
            RuleId::R13 => "Each cloud storage resource must limit access to reliable sources",
            RuleId::R14 => {
                "Each cloud storage resource must limit modification and deletion to reliable sources"
            }
            RuleId::R15 => {
                "Each access management resource must not grant unconditional permissions"
            }
            RuleId::R16 => {
                "Each access management resource must not grant permissions to unconditional resources"
            }
            RuleId::R17 => "Each router must limit outbound communication to reliable sources",
            RuleId::R18 => {
                "Each database must not collect personal data types outside an organization's data collection purpose"
            }
            RuleId::R19 => "Each database tuple must not live indefinitely",
        }
    }
}

impl fmt::Display for RuleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CatalogError {
    #[error("unknown rule id `{0}`")]
    UnknownRule(String),
    #[error("unknown principle `{0}`")]
    UnknownPrinciple(String),
    #[error("rule {0} listed more than once")]
    DuplicateRule(RuleId),
    #[error("rule {0} missing from catalog")]
    MissingRule(RuleId),
    #[error("rule {rule} has principle {found}, expected {expected}")]
    WrongPrinciple {
        rule: RuleId,
        found: Principle,
        expected: Principle,
    },
    #[error("rule {0} title does not match the requirement text")]
    WrongTitle(RuleId),
}

/// One row of the catalog, in its exported shape.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CatalogEntry {
    pub rule_id: RuleId,
    pub principle: Principle,
    pub title: String,
    pub enabled: bool,
}

/// All nineteen rules and whether each one is enabled for a scan.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RuleCatalog {
    enabled: BTreeMap<RuleId, bool>,
}

impl Default for RuleCatalog {
    fn default() -> Self {
        Self::new()
    }
}

impl RuleCatalog {
    /// Catalog with every rule enabled.
    pub fn new() -> Self {
        Self {
            enabled: RuleId::ALL.iter().map(|&r| (r, true)).collect(),
        }
    }

    /// Rebuilds a catalog from exported entries. The entries must cover
    /// R1 through R19 exactly once with the canonical principle and title.
    pub fn from_entries(entries: &[CatalogEntry]) -> Result<Self, CatalogError> {
        let mut enabled = BTreeMap::new();
        for entry in entries {
            if entry.principle != entry.rule_id.principle() {
                return Err(CatalogError::WrongPrinciple {
                    rule: entry.rule_id,
                    found: entry.principle,
                    expected: entry.rule_id.principle(),
                });
            }
            if entry.title != entry.rule_id.title() {
                return Err(CatalogError::WrongTitle(entry.rule_id));
            }
            if enabled.insert(entry.rule_id, entry.enabled).is_some() {
                return Err(CatalogError::DuplicateRule(entry.rule_id));
            }
        }
        if let Some(&missing) = RuleId::ALL.iter().find(|r| !enabled.contains_key(r)) {
            return Err(CatalogError::MissingRule(missing));
        }
        Ok(Self { enabled })
    }

    pub fn is_enabled(&self, rule: RuleId) -> bool {
        self.enabled.get(&rule).copied().unwrap_or(false)
    }

    pub fn set_enabled(&mut self, rule: RuleId, enabled: bool) {
        self.enabled.insert(rule, enabled);
    }

    pub fn disable(mut self, rule: RuleId) -> Self {
        self.set_enabled(rule, false);
        self
    }

    /// Entries in rule order.
    pub fn entries(&self) -> Vec<CatalogEntry> {
        self.enabled
            .iter()
            .map(|(&rule_id, &enabled)| CatalogEntry {
                rule_id,
                principle: rule_id.principle(),
                title: rule_id.title().to_string(),
                enabled,
            })
            .collect()
    }
}
