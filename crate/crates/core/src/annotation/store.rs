//! Transactional state container with optional JSON snapshot persistence.
//!
//! Every transaction runs under one mutex, so transactions are serializable.
//! Operations validate before they mutate; a failed operation leaves the
//! state untouched. With a snapshot file, each committed write is persisted
//! atomically (temporary file, fsync, rename) before the call returns.

use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::{Mutex, MutexGuard};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::error::{AnnotationError, ErrorCode};
use super::model::*;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct State {
    pub next_user_id: UserId,
    pub next_lease_id: LeaseId,
    pub users: BTreeMap<UserId, User>,
    pub tokens: Vec<TokenRecord>,
    /// Keyed by SHA-256 of the bearer token.
    pub sessions: BTreeMap<String, SessionRecord>,
    /// Corpus order: position in this list is the article's order.
    pub articles: Vec<StoredArticle>,
    pub leases: BTreeMap<LeaseId, Lease>,
    pub batches: BTreeMap<String, AnnotationBatch>,
    pub questions: BTreeMap<String, QuestionState>,
    pub audit: Vec<AuditRecord>,
    #[serde(skip)]
    paragraph_index: HashMap<String, (usize, usize)>,
}

impl State {
    pub fn rebuild_indexes(&mut self) {
        self.paragraph_index = self
            .articles
            .iter()
            .enumerate()
            .flat_map(|(a, art)| art.paragraphs.iter().enumerate().map(move |(p, para)| (para.id.clone(), (a, p))))
            .collect();
    }

    /// `(article position, paragraph position)` of a paragraph id.
    pub fn locate(&self, paragraph_id: &str) -> Option<(usize, usize)> {
        self.paragraph_index.get(paragraph_id).copied()
    }

    pub fn paragraph_view(&self, paragraph_id: &str) -> Option<ParagraphView> {
        let (a, p) = self.locate(paragraph_id)?;
        let art = &self.articles[a];
        let para = &art.paragraphs[p];
        Some(ParagraphView {
            id: para.id.clone(),
            article_title: art.title.clone(),
            category: art.category,
            index: para.index,
            text: para.text.clone(),
        })
    }

    pub fn paragraph_text(&self, paragraph_id: &str) -> Option<&str> {
        let (a, p) = self.locate(paragraph_id)?;
        Some(&self.articles[a].paragraphs[p].text)
    }

    pub fn user_by_email(&self, email: &str) -> Option<&User> {
        self.users.values().find(|u| u.email == email)
    }
}

#[derive(Serialize)]
struct SnapshotOut<'a> {
    schema_version: u32,
    state: &'a State,
}

/// Forward-only migrations, indexed by the version they upgrade from.
type Migration = fn(Value) -> Value;
const MIGRATIONS: &[Migration] = &[];

fn migrate(mut doc: Value) -> Result<State, AnnotationError> {
    let storage = |m: String| AnnotationError::new(ErrorCode::Storage, m);
    let mut version = doc
        .get("schema_version")
        .and_then(Value::as_u64)
        .ok_or_else(|| storage("snapshot has no schema_version".into()))? as u32;
    if version > SCHEMA_VERSION {
        return Err(storage(format!("snapshot schema {version} is newer than supported {SCHEMA_VERSION}")));
    }
    if version == 0 {
        return Err(storage("snapshot schema 0 is not valid".into()));
    }
    while version < SCHEMA_VERSION {
        let state = doc.get_mut("state").map(Value::take).unwrap_or(Value::Null);
        doc["state"] = MIGRATIONS[(version - 1) as usize](state);
        version += 1;
    }
    let state = doc.get_mut("state").map(Value::take).unwrap_or(Value::Null);
    let mut state: State = serde_json::from_value(state).map_err(|e| storage(format!("corrupt snapshot: {e}")))?;
    state.rebuild_indexes();
    Ok(state)
}

pub struct Store {
    state: Mutex<State>,
    path: Option<PathBuf>,
}

impl Store {
    pub fn in_memory() -> Self {
        Store { state: Mutex::new(State::default()), path: None }
    }

    /// Open a snapshot-backed store, creating an empty snapshot if the file
    /// does not exist.
    pub fn open(path: impl AsRef<Path>) -> Result<Self, AnnotationError> {
        let path = path.as_ref().to_path_buf();
        let state = if path.exists() { Self::load(&path)? } else { State::default() };
        let store = Store { state: Mutex::new(state), path: Some(path) };
        if !store.path.as_ref().is_some_and(|p| p.exists()) {
            store.persist(&store.lock())?;
        }
        Ok(store)
    }

    fn load(path: &Path) -> Result<State, AnnotationError> {
        let bytes = fs::read(path).map_err(|e| AnnotationError::new(ErrorCode::Storage, e.to_string()))?;
        let doc: Value = serde_json::from_slice(&bytes)
            .map_err(|e| AnnotationError::new(ErrorCode::Storage, format!("corrupt snapshot: {e}")))?;
        migrate(doc)
    }

    fn lock(&self) -> MutexGuard<'_, State> {
        self.state.lock().unwrap_or_else(|e| e.into_inner())
    }

    fn persist(&self, state: &State) -> Result<(), AnnotationError> {
        let Some(path) = &self.path else { return Ok(()) };
        let io = |e: std::io::Error| AnnotationError::new(ErrorCode::Storage, e.to_string());
        let bytes = serde_json::to_vec(&SnapshotOut { schema_version: SCHEMA_VERSION, state })
            .map_err(|e| AnnotationError::new(ErrorCode::Storage, e.to_string()))?;
        let tmp = path.with_extension("tmp");
        let mut f = fs::File::create(&tmp).map_err(io)?;
        f.write_all(&bytes).map_err(io)?;
        f.sync_all().map_err(io)?;
        fs::rename(&tmp, path).map_err(io)
    }

    pub fn read<T>(&self, f: impl FnOnce(&State) -> T) -> T {
        f(&self.lock())
    }

    /// Run `f` as one transaction. On success the new state is persisted; if
    /// persisting fails the in-memory state is restored from the last
    /// durable snapshot and the error is returned.
    pub fn write<T>(&self, f: impl FnOnce(&mut State) -> Result<T, AnnotationError>) -> Result<T, AnnotationError> {
        let mut guard = self.lock();
        let out = f(&mut guard)?;
        if let Err(e) = self.persist(&guard) {
            if let Some(path) = &self.path {
                match Self::load(path) {
                    Ok(state) => *guard = state,
                    Err(reload) => log::error!("cannot reload snapshot after failed write: {reload}"),
                }
            }
            return Err(e);
        }
        Ok(out)
    }
}
