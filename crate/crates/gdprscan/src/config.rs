//! Optional TOML configuration for `gdprscan scan`. Command-line flags take
//! precedence over every value set here. Relative paths are resolved
//! against the directory holding the configuration file.
//!
//! ```toml
//! policy = "policy.json"
//! dictionary = "pii_dictionary.json"
//! fail_on = "data-minimization"
//! format = "text"
//! disable_rules = ["R7"]
//! sampling_cap = 50
//! ```

use std::path::{Path, PathBuf};

use serde::Deserialize;

#[derive(Debug, Clone, Default, PartialEq, Eq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanFileConfig {
    pub policy: Option<PathBuf>,
    pub dictionary: Option<PathBuf>,
    pub fail_on: Option<String>,
    pub format: Option<String>,
    #[serde(default)]
    pub disable_rules: Vec<String>,
    pub sampling_cap: Option<usize>,
}

impl ScanFileConfig {
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| anyhow::anyhow!("{}: {e}", path.display()))?;
        let mut config: ScanFileConfig =
            toml::from_str(&text).map_err(|e| anyhow::anyhow!("{}: {e}", path.display()))?;
        let base = path.parent().unwrap_or_else(|| Path::new("."));
        for p in [&mut config.policy, &mut config.dictionary]
            .into_iter()
            .flatten()
        {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        Ok(config)
    }
}
