//! The `gdprscan` command line.
//!
//! | exit | meaning                                              |
//! |------|------------------------------------------------------|
//! | 0    | success; no gate tripped                             |
//! | 1    | gate tripped (exposures at the `--fail-on` level, new exposures in a diff, validation errors) |
//! | 2    | usage error, unreadable or malformed input           |

use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::Context;
use chrono::{DateTime, SubsecRound, Utc};
use clap::{Args, Parser, Subcommand, ValueEnum};
use gdprscan_core::{
    diff, render_diff_text, render_text, scan, validate_snapshot_at, Principle, Report, Resource,
    RuleCatalog, RuleId, ScanConfig, ScanError, Snapshot, ValidationIssue, SCHEMA_VERSION,
};

use crate::config::ScanFileConfig;
use crate::documents::{
    parse_dictionary, parse_policy, parse_report, serialize_catalog, serialize_diff,
    serialize_report,
};
use crate::ingest::{
    fetch_inventory, parse_snapshot, read_file, serialize_snapshot, FixtureClient,
    DEFAULT_SAMPLING_CAP,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitCode {
    Clean = 0,
    GateTripped = 1,
    Error = 2,
}

impl From<ExitCode> for std::process::ExitCode {
    fn from(code: ExitCode) -> Self {
        std::process::ExitCode::from(code as u8)
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "gdprscan",
    version,
    about = "Scan infrastructure snapshots for privacy exposures"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Scan a snapshot and write a report.
    Scan(ScanArgs),
    /// Compare two reports by exposure fingerprint.
    Diff(DiffArgs),
    /// List the rule catalog.
    Rules(RulesArgs),
    /// Validate a snapshot document.
    Validate(ValidateArgs),
    /// Assemble a snapshot from a fixture inventory directory.
    Collect(CollectArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Text,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FailOn {
    Any,
    IntegrityConfidentiality,
    DataMinimization,
    StorageLimitation,
}

impl FailOn {
    /// True when the report holds an exposure at this gate level.
    pub fn tripped_by(self, report: &Report) -> bool {
        let principle = match self {
            FailOn::Any => return !report.exposures.is_empty(),
            FailOn::IntegrityConfidentiality => Principle::IntegrityConfidentiality,
            FailOn::DataMinimization => Principle::DataMinimization,
            FailOn::StorageLimitation => Principle::StorageLimitation,
        };
        report.exposures.iter().any(|e| e.principle == principle)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PrincipleArg {
    IntegrityConfidentiality,
    DataMinimization,
    StorageLimitation,
}

impl From<PrincipleArg> for Principle {
    fn from(p: PrincipleArg) -> Self {
        match p {
            PrincipleArg::IntegrityConfidentiality => Principle::IntegrityConfidentiality,
            PrincipleArg::DataMinimization => Principle::DataMinimization,
            PrincipleArg::StorageLimitation => Principle::StorageLimitation,
        }
    }
}

fn parse_rule_id(s: &str) -> Result<RuleId, String> {
    s.parse()
        .map_err(|e: gdprscan_core::CatalogError| e.to_string())
}

fn parse_timestamp(s: &str) -> Result<DateTime<Utc>, String> {
    DateTime::parse_from_rfc3339(s)
        .map(|t| t.with_timezone(&Utc))
        .map_err(|e| format!("expected an ISO-8601 UTC timestamp: {e}"))
}

fn positive(s: &str) -> Result<usize, String> {
    match s.parse::<usize>() {
        Ok(0) => Err("must be a positive integer".into()),
        Ok(n) => Ok(n),
        Err(e) => Err(e.to_string()),
    }
}

#[derive(Debug, Args)]
pub struct ScanArgs {
    #[arg(long)]
    pub snapshot: PathBuf,
    /// Data policy document (permitted categories and allowlist).
    #[arg(long)]
    pub policy: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub fail_on: Option<FailOn>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long = "disable-rule", value_parser = parse_rule_id)]
    pub disable_rule: Vec<RuleId>,
    /// Rows per table considered by value classification.
    #[arg(long, value_parser = positive)]
    pub sampling_cap: Option<usize>,
    /// Replacement personal-data dictionary.
    #[arg(long)]
    pub dictionary: Option<PathBuf>,
    #[arg(long)]
    pub scan_id: Option<String>,
    /// Pin the scan time (ISO-8601, UTC).
    #[arg(long, value_parser = parse_timestamp)]
    pub scanned_at: Option<DateTime<Utc>>,
    /// TOML file with defaults for the flags above.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DiffArgs {
    pub before: PathBuf,
    pub after: PathBuf,
    #[arg(long, value_enum, default_value = "text")]
    pub format: Format,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RulesAction {
    List,
}

#[derive(Debug, Args)]
pub struct RulesArgs {
    #[arg(value_enum)]
    pub action: Option<RulesAction>,
    #[arg(long, value_enum, default_value = "text")]
    pub format: Format,
    #[arg(long, value_enum)]
    pub principle: Option<PrincipleArg>,
    #[arg(long = "disable-rule", value_parser = parse_rule_id)]
    pub disable_rule: Vec<RuleId>,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    #[arg(long)]
    pub snapshot: PathBuf,
    #[arg(long, value_enum, default_value = "text")]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct CollectArgs {
    #[arg(long)]
    pub fixture_dir: PathBuf,
    #[arg(long = "region", required = true)]
    pub regions: Vec<String>,
    #[arg(long, value_parser = positive, default_value_t = DEFAULT_SAMPLING_CAP)]
    pub sampling_cap: usize,
    #[arg(long, value_parser = positive, default_value_t = 50)]
    pub page_size: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() {
                ExitCode::Error
            } else {
                ExitCode::Clean
            };
            let rendered = e.render().to_string();
            let sink: &mut dyn Write = if e.use_stderr() { stderr } else { stdout };
            let _ = sink.write_all(rendered.as_bytes());
            return code;
        }
    };
    let result = match cli.command {
        Command::Scan(a) => cmd_scan(a, stdout, stderr),
        Command::Diff(a) => cmd_diff(a, stdout),
        Command::Rules(a) => cmd_rules(a, stdout),
        Command::Validate(a) => cmd_validate(a, stdout),
        Command::Collect(a) => cmd_collect(a, stdout),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e:#}");
            ExitCode::Error
        }
    }
}

fn emit(out: Option<&Path>, stdout: &mut dyn Write, bytes: &[u8]) -> anyhow::Result<()> {
    match out {
        Some(path) => {
            std::fs::write(path, bytes).with_context(|| format!("writing {}", path.display()))
        }
        None => stdout
            .write_all(bytes)
            .context("writing to standard output"),
    }
}

fn print_issues(sink: &mut dyn Write, issues: &[ValidationIssue]) {
    for issue in issues {
        let _ = writeln!(sink, "{issue}");
    }
}

fn load_snapshot_unvalidated(path: &Path) -> anyhow::Result<Snapshot> {
    let bytes = read_file(path)?;
    let snapshot = parse_snapshot(&bytes).with_context(|| path.display().to_string())?;
    if snapshot.schema_version != SCHEMA_VERSION {
        anyhow::bail!(
            "{}: unknown schema_version `{}` (supported: {SCHEMA_VERSION})",
            path.display(),
            snapshot.schema_version
        );
    }
    Ok(snapshot)
}

pub fn cmd_scan(
    args: ScanArgs,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> anyhow::Result<ExitCode> {
    let file = match &args.config {
        Some(path) => ScanFileConfig::load(path)?,
        None => ScanFileConfig::default(),
    };
    let fail_on = match (args.fail_on, &file.fail_on) {
        (Some(f), _) => Some(f),
        (None, Some(s)) => {
            Some(FailOn::from_str(s, true).map_err(|e| anyhow::anyhow!("config fail_on: {e}"))?)
        }
        (None, None) => None,
    };
    let format = match (args.format, &file.format) {
        (Some(f), _) => f,
        (None, Some(s)) => {
            Format::from_str(s, true).map_err(|e| anyhow::anyhow!("config format: {e}"))?
        }
        (None, None) => Format::Json,
    };
    let sampling_cap = args
        .sampling_cap
        .or(file.sampling_cap)
        .unwrap_or(DEFAULT_SAMPLING_CAP);
    if sampling_cap == 0 {
        anyhow::bail!("sampling cap must be positive");
    }
    let disabled: Vec<RuleId> = if args.disable_rule.is_empty() {
        file.disable_rules
            .iter()
            .map(|s| s.parse::<RuleId>())
            .collect::<Result<_, _>>()?
    } else {
        args.disable_rule.clone()
    };
    let scanned_at = args
        .scanned_at
        .unwrap_or_else(|| Utc::now().trunc_subsecs(0));
    let scan_id = args
        .scan_id
        .clone()
        .unwrap_or_else(|| format!("scan-{}", scanned_at.format("%Y%m%dT%H%M%SZ")));

    let mut snapshot = load_snapshot_unvalidated(&args.snapshot)?;
    let issues = validate_snapshot_at(&snapshot, Some(scanned_at));
    if issues.iter().any(ValidationIssue::is_error) {
        let _ = writeln!(stderr, "{}: snapshot is invalid", args.snapshot.display());
        print_issues(stderr, &issues);
        return Ok(ExitCode::Error);
    }
    print_issues(stderr, &issues);

    for r in &mut snapshot.resources {
        if let Resource::Database(db) = r {
            for t in &mut db.tables {
                t.sampled_rows.truncate(sampling_cap);
            }
        }
    }

    let mut config = ScanConfig::new(scan_id, scanned_at);
    if let Some(path) = args.policy.as_ref().or(file.policy.as_ref()) {
        config.policy =
            parse_policy(&read_file(path)?).with_context(|| path.display().to_string())?;
    }
    if let Some(path) = args.dictionary.as_ref().or(file.dictionary.as_ref()) {
        config.dictionary =
            parse_dictionary(&read_file(path)?).with_context(|| path.display().to_string())?;
    }
    let mut catalog = RuleCatalog::new();
    for rule in disabled {
        catalog.set_enabled(rule, false);
    }
    config.catalog = catalog;

    let report = match scan(&snapshot, &config) {
        Ok(r) => r,
        Err(ScanError::InvalidSnapshot(issues)) => {
            print_issues(stderr, &issues);
            return Ok(ExitCode::Error);
        }
        Err(e) => return Err(e.into()),
    };
    let bytes = match format {
        Format::Json => serialize_report(&report),
        Format::Text => render_text(&report).into_bytes(),
    };
    emit(args.out.as_deref(), stdout, &bytes)?;

    Ok(match fail_on {
        Some(gate) if gate.tripped_by(&report) => ExitCode::GateTripped,
        _ => ExitCode::Clean,
    })
}

fn load_report(path: &Path) -> anyhow::Result<Report> {
    parse_report(&read_file(path)?).with_context(|| path.display().to_string())
}

pub fn cmd_diff(args: DiffArgs, stdout: &mut dyn Write) -> anyhow::Result<ExitCode> {
    let before = load_report(&args.before)?;
    let after = load_report(&args.after)?;
    let d = diff(&before, &after)?;
    let bytes = match args.format {
        Format::Json => serialize_diff(&before, &after, &d),
        Format::Text => render_diff_text(&d).into_bytes(),
    };
    emit(args.out.as_deref(), stdout, &bytes)?;
    Ok(if d.new_exposures.is_empty() {
        ExitCode::Clean
    } else {
        ExitCode::GateTripped
    })
}

pub fn cmd_rules(args: RulesArgs, stdout: &mut dyn Write) -> anyhow::Result<ExitCode> {
    let mut catalog = RuleCatalog::new();
    for &rule in &args.disable_rule {
        catalog.set_enabled(rule, false);
    }
    let filter: Option<Principle> = args.principle.map(Into::into);
    match (args.format, filter) {
        (Format::Json, None) => emit(None, stdout, &serialize_catalog(&catalog))?,
        (Format::Json, Some(p)) => {
            let entries: Vec<_> = catalog
                .entries()
                .into_iter()
                .filter(|e| e.principle == p)
                .collect();
            let mut bytes = serde_json::to_vec_pretty(&entries)?;
            bytes.push(b'\n');
            emit(None, stdout, &bytes)?;
        }
        (Format::Text, _) => {
            for e in catalog.entries() {
                if filter.is_some_and(|p| p != e.principle) {
                    continue;
                }
                writeln!(
                    stdout,
                    "{:<4} {:<26} {:<8} {}",
                    e.rule_id.as_str(),
                    e.principle.as_str(),
                    if e.enabled { "enabled" } else { "disabled" },
                    e.title
                )?;
            }
        }
    }
    Ok(ExitCode::Clean)
}

pub fn cmd_validate(args: ValidateArgs, stdout: &mut dyn Write) -> anyhow::Result<ExitCode> {
    let snapshot = load_snapshot_unvalidated(&args.snapshot)?;
    let issues = validate_snapshot_at(&snapshot, Some(Utc::now()));
    let errors = issues.iter().filter(|i| i.is_error()).count();
    match args.format {
        Format::Json => {
            let mut bytes = serde_json::to_vec_pretty(&issues)?;
            bytes.push(b'\n');
            emit(None, stdout, &bytes)?;
        }
        Format::Text => {
            print_issues(stdout, &issues);
            writeln!(
                stdout,
                "{}: {} error(s), {} warning(s), {} resource(s)",
                args.snapshot.display(),
                errors,
                issues.len() - errors,
                snapshot.resources.len()
            )?;
        }
    }
    Ok(if errors > 0 {
        ExitCode::GateTripped
    } else {
        ExitCode::Clean
    })
}

pub fn cmd_collect(args: CollectArgs, stdout: &mut dyn Write) -> anyhow::Result<ExitCode> {
    let client = FixtureClient::from_dir(&args.fixture_dir, args.page_size)?;
    let snapshot = fetch_inventory(&client, &args.regions, args.sampling_cap)?;
    emit(args.out.as_deref(), stdout, &serialize_snapshot(&snapshot))?;
    Ok(ExitCode::Clean)
}
