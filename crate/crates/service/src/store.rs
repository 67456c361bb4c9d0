//! Append-only judgment store backed by a JSON-lines file.

use std::collections::HashSet;
use std::fs::{File, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use drec_core::evaluation::JudgmentError;
use drec_core::{load_judgments, CoherenceJudgment};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("judgment {0} was already recorded")]
    Duplicate(String),
    #[error("judgment store {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("judgment store {path}: {source}")]
    Corrupt {
        path: PathBuf,
        #[source]
        source: JudgmentError,
    },
}

struct Inner {
    judgments: Vec<CoherenceJudgment>,
    keys: HashSet<String>,
    file: Option<(PathBuf, File)>,
}

/// Writes go through one mutex, so appends are serialized and a reader
/// never sees a half-recorded judgment.
pub struct JudgmentStore {
    inner: Mutex<Inner>,
}

impl JudgmentStore {
    pub fn in_memory() -> Self {
        JudgmentStore {
            inner: Mutex::new(Inner {
                judgments: Vec::new(),
                keys: HashSet::new(),
                file: None,
            }),
        }
    }

    /// Opens (or creates) `path`, replaying any judgments already in it.
    pub fn open(path: &Path) -> Result<Self, StoreError> {
        let io = |source| StoreError::Io {
            path: path.to_path_buf(),
            source,
        };
        let judgments = match std::fs::read(path) {
            Ok(bytes) => load_judgments(&bytes).map_err(|source| StoreError::Corrupt {
                path: path.to_path_buf(),
                source,
            })?,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => Vec::new(),
            Err(e) => return Err(io(e)),
        };
        let keys = judgments.iter().filter_map(|j| j.id.clone()).collect();
        let file = OpenOptions::new()
            .create(true)
            .append(true)
            .open(path)
            .map_err(io)?;
        Ok(JudgmentStore {
            inner: Mutex::new(Inner {
                judgments,
                keys,
                file: Some((path.to_path_buf(), file)),
            }),
        })
    }

    /// Records `judgment`, whose `id` must be set and unseen.
    pub fn append(&self, judgment: CoherenceJudgment) -> Result<(), StoreError> {
        let key = judgment.id.clone().expect("stored judgments carry an id");
        let mut inner = self.inner.lock().expect("store lock");
        if inner.keys.contains(&key) {
            return Err(StoreError::Duplicate(key));
        }
        if let Some((path, file)) = inner.file.as_mut() {
            let mut line = judgment.to_json_line();
            line.push('\n');
            file.write_all(line.as_bytes())
                .and_then(|_| file.sync_data())
                .map_err(|source| StoreError::Io {
                    path: path.clone(),
                    source,
                })?;
        }
        inner.keys.insert(key);
        inner.judgments.push(judgment);
        Ok(())
    }

    pub fn snapshot(&self) -> Vec<CoherenceJudgment> {
        self.inner.lock().expect("store lock").judgments.clone()
    }

    pub fn len(&self) -> usize {
        self.inner.lock().expect("store lock").judgments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}
