//! Directory-backed revision store.
//!
//! Each publication is a canonical JSON file named `YYYY-MM-DD.json`;
//! `index.json` lists the publication dates in order. Files are replaced
//! atomically, so a failed write leaves the previous state intact.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::containers::{
    read_canonical, write_canonical, CanonicalDocument, ContainerError, ContainerKind,
};
use crate::series::{RevisionedSeries, SeriesError};

const INDEX_FILE: &str = "index.json";

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("{path}: bad index: {reason}")]
    BadIndex { path: PathBuf, reason: String },
    #[error("{path}: {source}")]
    Snapshot {
        path: PathBuf,
        #[source]
        source: ContainerError,
    },
    #[error(transparent)]
    Container(#[from] ContainerError),
    #[error(transparent)]
    Series(#[from] SeriesError),
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Index {
    snapshots: Vec<NaiveDate>,
}

/// Writes `contents` to `path` through a temporary file in the same
/// directory, then renames it into place.
pub fn write_atomic(path: &Path, contents: &[u8]) -> io::Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(contents)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

#[derive(Debug, Clone)]
pub struct RevisionStore {
    root: PathBuf,
}

impl RevisionStore {
    /// Opens an existing store.
    pub fn open(root: impl Into<PathBuf>) -> Result<Self, StoreError> {
        let store = Self { root: root.into() };
        store.read_index()?;
        Ok(store)
    }

    /// Opens a store, creating the directory and an empty index if needed.
    pub fn open_or_create(root: impl Into<PathBuf>) -> Result<Self, StoreError> {
        let store = Self { root: root.into() };
        fs::create_dir_all(&store.root).map_err(|source| store.io(&store.root, source))?;
        if !store.index_path().exists() {
            store.write_index(&Index::default())?;
        }
        store.read_index()?;
        Ok(store)
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn publications(&self) -> Result<Vec<NaiveDate>, StoreError> {
        Ok(self.read_index()?.snapshots)
    }

    /// Appends a snapshot. The date must be later than every recorded one.
    pub fn publish(&self, date: NaiveDate, doc: &CanonicalDocument) -> Result<(), StoreError> {
        let mut index = self.read_index()?;
        if let Some(&latest) = index.snapshots.last() {
            if date <= latest {
                return Err(SeriesError::OutOfOrderPublication { date, latest }.into());
            }
        }
        let text = write_canonical(doc, ContainerKind::Json)?;
        let path = self.snapshot_path(date);
        write_atomic(&path, text.as_bytes()).map_err(|source| self.io(&path, source))?;
        index.snapshots.push(date);
        self.write_index(&index)
    }

    pub fn load_snapshot(&self, date: NaiveDate) -> Result<CanonicalDocument, StoreError> {
        let path = self.snapshot_path(date);
        let text = fs::read_to_string(&path).map_err(|source| self.io(&path, source))?;
        read_canonical(&text, ContainerKind::Json)
            .map_err(|source| StoreError::Snapshot { path, source })
    }

    pub fn load(&self) -> Result<RevisionedSeries<CanonicalDocument>, StoreError> {
        let mut series = RevisionedSeries::new();
        for date in self.publications()? {
            series.record(date, self.load_snapshot(date)?)?;
        }
        Ok(series)
    }

    /// The latest snapshot published on or before `date`.
    pub fn as_of(&self, date: NaiveDate) -> Result<(NaiveDate, CanonicalDocument), StoreError> {
        let published = self
            .publications()?
            .into_iter()
            .take_while(|d| *d <= date)
            .last()
            .ok_or(SeriesError::NoSnapshotYet(date))?;
        Ok((published, self.load_snapshot(published)?))
    }

    fn snapshot_path(&self, date: NaiveDate) -> PathBuf {
        self.root.join(format!("{}.json", date.format("%Y-%m-%d")))
    }

    fn index_path(&self) -> PathBuf {
        self.root.join(INDEX_FILE)
    }

    fn io(&self, path: &Path, source: io::Error) -> StoreError {
        StoreError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    fn read_index(&self) -> Result<Index, StoreError> {
        let path = self.index_path();
        let text = fs::read_to_string(&path).map_err(|source| self.io(&path, source))?;
        let index: Index = serde_json::from_str(&text).map_err(|e| StoreError::BadIndex {
            path: path.clone(),
            reason: e.to_string(),
        })?;
        if index.snapshots.windows(2).any(|w| w[0] >= w[1]) {
            return Err(StoreError::BadIndex {
                path,
                reason: "publication dates are not strictly increasing".into(),
            });
        }
        Ok(index)
    }

    fn write_index(&self, index: &Index) -> Result<(), StoreError> {
        let path = self.index_path();
        let mut text = serde_json::to_string_pretty(index).expect("dates serialize");
        text.push('\n');
        write_atomic(&path, text.as_bytes()).map_err(|source| self.io(&path, source))
    }
}
