//! Files, provider access and the command-line front end for
//! [`gdprscan_core`].
//!
//! * [`ingest`] loads snapshot documents and assembles snapshots from a
//!   paginated [`ingest::ProviderClient`].
//! * [`documents`] reads and writes report, diff, policy, catalog and
//!   dictionary documents.
//! * [`cli`] wires them into the `gdprscan` binary.

pub mod cli;
pub mod config;
pub mod documents;
pub mod ingest;

pub use gdprscan_core;
