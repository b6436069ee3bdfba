//! Snapshot loading and inventory collection.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};

use chrono::{DateTime, SubsecRound, Utc};
use gdprscan_core::{
    validate_snapshot, Resource, ResourceKind, Row, Snapshot, ValidationIssue, SCHEMA_VERSION,
};
use serde::Deserialize;
use thiserror::Error;

/// Default number of rows sampled per table.
pub const DEFAULT_SAMPLING_CAP: usize = 100;

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("malformed snapshot document: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("unknown schema_version `{0}` (supported: {SCHEMA_VERSION})")]
    SchemaVersion(String),
    #[error("invalid snapshot: {0}")]
    Invalid(ValidationIssue),
    #[error("listing {kind} in region {region}: {source}")]
    Client {
        kind: ResourceKind,
        region: String,
        #[source]
        source: ClientError,
    },
    #[error("sampling rows of {database_id}/{table}: {source}")]
    Sampling {
        database_id: String,
        table: String,
        #[source]
        source: ClientError,
    },
    #[error("pagination loop listing {kind} in region {region}: token `{token}` returned twice")]
    PaginationLoop {
        kind: ResourceKind,
        region: String,
        token: String,
    },
    #[error("{0}")]
    Argument(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

/// Transport or provider failure reported by a [`ProviderClient`].
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{0}")]
pub struct ClientError(pub String);

/// One page of a resource listing.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Page {
    pub resources: Vec<Resource>,
    pub next_token: Option<String>,
}

/// Read access to a provider inventory.
///
/// Listings are paginated; a listing is finished when `next_token` is
/// `None`. `sample_rows` must return at most `limit` rows.
pub trait ProviderClient: Sync {
    fn provider_id(&self) -> &str;

    fn list_resources(
        &self,
        kind: ResourceKind,
        region: &str,
        page_token: Option<&str>,
    ) -> Result<Page, ClientError>;

    fn sample_rows(
        &self,
        database_id: &str,
        table_name: &str,
        limit: usize,
    ) -> Result<Vec<Row>, ClientError>;
}

/// Parses a snapshot document without validating it.
pub fn parse_snapshot(bytes: &[u8]) -> Result<Snapshot, IngestError> {
    Ok(serde_json::from_slice(bytes)?)
}

/// Parses and validates a snapshot document. Fails on the first error-level
/// issue; warnings are left for [`validate_snapshot`].
pub fn load_snapshot(bytes: &[u8]) -> Result<Snapshot, IngestError> {
    let snapshot = parse_snapshot(bytes)?;
    if snapshot.schema_version != SCHEMA_VERSION {
        return Err(IngestError::SchemaVersion(snapshot.schema_version));
    }
    if let Some(issue) = validate_snapshot(&snapshot)
        .into_iter()
        .find(ValidationIssue::is_error)
    {
        return Err(IngestError::Invalid(issue));
    }
    Ok(snapshot)
}

pub fn read_file(path: &Path) -> Result<Vec<u8>, IngestError> {
    fs::read(path).map_err(|source| IngestError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Pretty JSON with a trailing newline.
pub fn serialize_snapshot(snapshot: &Snapshot) -> Vec<u8> {
    let mut out = serde_json::to_vec_pretty(snapshot).expect("snapshot serializes");
    out.push(b'\n');
    out
}

/// Lists every kind in every region, follows pagination to the end, samples
/// up to `sampling_cap` rows per table and returns the canonically sorted
/// snapshot stamped with the current time.
pub fn fetch_inventory(
    client: &dyn ProviderClient,
    regions: &[String],
    sampling_cap: usize,
) -> Result<Snapshot, IngestError> {
    fetch_inventory_at(client, regions, sampling_cap, Utc::now().trunc_subsecs(0))
}

pub fn fetch_inventory_at(
    client: &dyn ProviderClient,
    regions: &[String],
    sampling_cap: usize,
    generated_at: DateTime<Utc>,
) -> Result<Snapshot, IngestError> {
    if regions.is_empty() {
        return Err(IngestError::Argument(
            "at least one region is required".into(),
        ));
    }
    if sampling_cap == 0 {
        return Err(IngestError::Argument(
            "sampling cap must be positive".into(),
        ));
    }
    let regions: BTreeSet<&str> = regions.iter().map(String::as_str).collect();
    let jobs: Vec<(ResourceKind, &str)> = ResourceKind::ALL
        .iter()
        .flat_map(|&k| regions.iter().map(move |&r| (k, r)))
        .collect();

    let results: Vec<Result<Vec<Resource>, IngestError>> = std::thread::scope(|s| {
        let handles: Vec<_> = jobs
            .iter()
            .map(|&(kind, region)| s.spawn(move || list_all(client, kind, region, sampling_cap)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("listing thread panicked"))
            .collect()
    });

    let mut snapshot = Snapshot::new(client.provider_id(), generated_at);
    for r in results {
        snapshot.resources.extend(r?);
    }
    snapshot.sort_canonical();
    Ok(snapshot)
}

fn list_all(
    client: &dyn ProviderClient,
    kind: ResourceKind,
    region: &str,
    sampling_cap: usize,
) -> Result<Vec<Resource>, IngestError> {
    let mut out = Vec::new();
    let mut seen = BTreeSet::new();
    let mut token: Option<String> = None;
    loop {
        let page = client
            .list_resources(kind, region, token.as_deref())
            .map_err(|source| IngestError::Client {
                kind,
                region: region.to_string(),
                source,
            })?;
        out.extend(page.resources);
        match page.next_token {
            None => break,
            Some(next) => {
                if !seen.insert(next.clone()) {
                    return Err(IngestError::PaginationLoop {
                        kind,
                        region: region.to_string(),
                        token: next,
                    });
                }
                token = Some(next);
            }
        }
    }
    for resource in &mut out {
        if let Resource::Database(db) = resource {
            for table in &mut db.tables {
                let mut rows = client
                    .sample_rows(&db.locator.id, &table.name, sampling_cap)
                    .map_err(|source| IngestError::Sampling {
                        database_id: db.locator.id.clone(),
                        table: table.name.clone(),
                        source,
                    })?;
                rows.truncate(sampling_cap);
                table.sampled_rows = rows;
            }
        }
    }
    Ok(out)
}

/// In-memory provider serving fixed resources in pages of `page_size`.
/// Page tokens are decimal offsets.
#[derive(Debug, Clone)]
pub struct FixtureClient {
    provider_id: String,
    resources: Vec<Resource>,
    rows: BTreeMap<(String, String), Vec<Row>>,
    page_size: usize,
}

#[derive(Deserialize)]
struct ProviderFile {
    provider_id: String,
}

impl FixtureClient {
    pub fn new(provider_id: impl Into<String>, resources: Vec<Resource>, page_size: usize) -> Self {
        Self {
            provider_id: provider_id.into(),
            resources,
            rows: BTreeMap::new(),
            page_size: page_size.max(1),
        }
    }

    pub fn with_rows(mut self, database_id: &str, table_name: &str, rows: Vec<Row>) -> Self {
        self.rows
            .insert((database_id.to_string(), table_name.to_string()), rows);
        self
    }

    pub fn set_page_size(&mut self, page_size: usize) {
        self.page_size = page_size.max(1);
    }

    /// Loads a fixture directory:
    ///
    /// ```text
    /// provider.json                       {"provider_id": "..."} (optional)
    /// <kind>.json                         array of resources of that kind
    /// rows/<database_id>/<table>.json     array of rows served by sample_rows
    /// ```
    pub fn from_dir(dir: &Path, page_size: usize) -> Result<Self, IngestError> {
        let provider_path = dir.join("provider.json");
        let provider_id = if provider_path.exists() {
            let p: ProviderFile = serde_json::from_slice(&read_file(&provider_path)?)?;
            p.provider_id
        } else {
            "fixture".to_string()
        };
        let mut resources = Vec::new();
        for kind in ResourceKind::ALL {
            let path = dir.join(format!("{}.json", kind.as_str()));
            if !path.exists() {
                continue;
            }
            let listed: Vec<Resource> = serde_json::from_slice(&read_file(&path)?)?;
            if let Some(bad) = listed.iter().find(|r| r.kind() != kind) {
                return Err(IngestError::Argument(format!(
                    "{}: resource `{}` has kind {}, expected {kind}",
                    path.display(),
                    bad.id(),
                    bad.kind()
                )));
            }
            resources.extend(listed);
        }
        let mut client = Self::new(provider_id, resources, page_size);
        let rows_dir = dir.join("rows");
        if rows_dir.is_dir() {
            let io = |path: &Path, source| IngestError::Io {
                path: path.to_path_buf(),
                source,
            };
            let mut db_dirs: Vec<_> = fs::read_dir(&rows_dir)
                .map_err(|e| io(&rows_dir, e))?
                .collect::<Result<_, _>>()
                .map_err(|e| io(&rows_dir, e))?;
            db_dirs.sort_by_key(|e| e.file_name());
            for db_dir in db_dirs {
                let db_path = db_dir.path();
                if !db_path.is_dir() {
                    continue;
                }
                let database_id = db_dir.file_name().to_string_lossy().into_owned();
                let mut files: Vec<_> = fs::read_dir(&db_path)
                    .map_err(|e| io(&db_path, e))?
                    .collect::<Result<_, _>>()
                    .map_err(|e| io(&db_path, e))?;
                files.sort_by_key(|e| e.file_name());
                for f in files {
                    let path = f.path();
                    if path.extension().and_then(|e| e.to_str()) != Some("json") {
                        continue;
                    }
                    let table = path
                        .file_stem()
                        .map(|s| s.to_string_lossy().into_owned())
                        .unwrap_or_default();
                    let rows: Vec<Row> = serde_json::from_slice(&read_file(&path)?)?;
                    client = client.with_rows(&database_id, &table, rows);
                }
            }
        }
        Ok(client)
    }
}

impl ProviderClient for FixtureClient {
    fn provider_id(&self) -> &str {
        &self.provider_id
    }

    fn list_resources(
        &self,
        kind: ResourceKind,
        region: &str,
        page_token: Option<&str>,
    ) -> Result<Page, ClientError> {
        let offset = match page_token {
            None => 0,
            Some(t) => t
                .parse::<usize>()
                .map_err(|_| ClientError(format!("bad page token `{t}`")))?,
        };
        let matching: Vec<&Resource> = self
            .resources
            .iter()
            .filter(|r| r.kind() == kind && r.region() == region)
            .collect();
        if offset > matching.len() {
            return Err(ClientError(format!("page token `{offset}` out of range")));
        }
        let end = (offset + self.page_size).min(matching.len());
        let mut resources: Vec<Resource> =
            matching[offset..end].iter().map(|&r| r.clone()).collect();
        for r in &mut resources {
            if let Resource::Database(db) = r {
                for t in &mut db.tables {
                    t.sampled_rows.clear();
                }
            }
        }
        Ok(Page {
            resources,
            next_token: (end < matching.len()).then(|| end.to_string()),
        })
    }

    fn sample_rows(
        &self,
        database_id: &str,
        table_name: &str,
        limit: usize,
    ) -> Result<Vec<Row>, ClientError> {
        Ok(self
            .rows
            .get(&(database_id.to_string(), table_name.to_string()))
            .map(|rows| rows.iter().take(limit).cloned().collect())
            .unwrap_or_default())
    }
}
