//! File-per-session store.
//!
//! Each session lives in `<root>/<session_id>.jsonl`: a header line with
//! the configuration and denormalized metrics, then one line per drop and
//! one per game event. Files are written to a hidden temp file in the same
//! directory and renamed into place, so readers see either nothing or the
//! complete record.

use std::fs::{self, File};
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use tempfile::NamedTempFile;
use thiserror::Error;

use crate::difficulty::DdaConfig;
use crate::engine::{DropRecord, GameConfig, GameEvent};
use crate::gesture::GestureConfig;
use crate::metrics::{compute_metrics, SessionMetrics};
use crate::model::SceneConfig;

pub const SCHEMA_VERSION: u32 = 1;
const RECORD_EXT: &str = "jsonl";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionRecord {
    pub session_id: String,
    pub created_at_us: u64,
    pub schema_version: u32,
    pub scene: SceneConfig,
    pub gesture: GestureConfig,
    pub dda: DdaConfig,
    pub feedback_frames: u32,
    pub block_size: u32,
    pub drops: Vec<DropRecord>,
    pub events: Vec<GameEvent>,
    pub metrics: SessionMetrics,
}

impl SessionRecord {
    pub fn new(
        session_id: String,
        created_at_us: u64,
        config: &GameConfig,
        drops: Vec<DropRecord>,
        events: Vec<GameEvent>,
    ) -> Self {
        let metrics = compute_metrics(&drops, config.scene.target_center);
        Self {
            session_id,
            created_at_us,
            schema_version: SCHEMA_VERSION,
            scene: config.scene.clone(),
            gesture: config.gesture,
            dda: config.dda,
            feedback_frames: config.feedback_frames,
            block_size: config.block_size,
            drops,
            events,
            metrics,
        }
    }

    pub fn game_config(&self) -> GameConfig {
        GameConfig {
            scene: self.scene.clone(),
            gesture: self.gesture,
            dda: self.dda,
            feedback_frames: self.feedback_frames,
            block_size: self.block_size,
        }
    }

    pub fn summary(&self) -> SessionSummary {
        SessionSummary {
            session_id: self.session_id.clone(),
            created_at_us: self.created_at_us,
            n_drops: self.metrics.n_drops,
            hit_rate: self.metrics.hit_rate,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionSummary {
    pub session_id: String,
    pub created_at_us: u64,
    pub n_drops: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hit_rate: Option<f64>,
}

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("store at {} is not writable: {source}", path.display())]
    StoreUnwritable { path: PathBuf, source: io::Error },
    #[error("session {0} already exists")]
    DuplicateId(String),
    #[error("session {0} not found")]
    NotFound(String),
    #[error("session {id} has schema version {found}, expected {SCHEMA_VERSION}")]
    SchemaMismatch { id: String, found: u64 },
    #[error("session {id} is corrupt: {reason}")]
    CorruptRecord { id: String, reason: String },
    #[error(transparent)]
    Io(#[from] io::Error),
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Header {
    schema_version: u32,
    session_id: String,
    created_at_us: u64,
    scene: SceneConfig,
    gesture: GestureConfig,
    dda: DdaConfig,
    feedback_frames: u32,
    block_size: u32,
    metrics: SessionMetrics,
    n_drops: u64,
    n_events: u64,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
enum Line {
    Header(Box<Header>),
    Drop(DropRecord),
    Event { event: GameEvent },
}

/// Generates a sortable, collision-resistant session id.
pub fn new_session_id(created_at_us: u64) -> String {
    format!("{created_at_us:016}-{:08x}", rand::random::<u32>())
}

fn valid_id(id: &str) -> bool {
    !id.is_empty()
        && id.len() <= 128
        && !id.starts_with('.')
        && id
            .bytes()
            .all(|b| b.is_ascii_alphanumeric() || b == b'-' || b == b'_')
}

pub fn now_us() -> u64 {
    std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_micros() as u64)
        .unwrap_or(0)
}

#[derive(Debug, Clone)]
pub struct Store {
    root: PathBuf,
}

impl Store {
    /// Opens (creating if needed) a store rooted at `root`.
    pub fn open(root: impl Into<PathBuf>) -> Result<Self, StoreError> {
        let root = root.into();
        fs::create_dir_all(&root).map_err(|source| StoreError::StoreUnwritable {
            path: root.clone(),
            source,
        })?;
        Ok(Self { root })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    fn path_for(&self, id: &str) -> PathBuf {
        self.root.join(format!("{id}.{RECORD_EXT}"))
    }

    pub fn save(&self, record: &SessionRecord) -> Result<String, StoreError> {
        let id = &record.session_id;
        if !valid_id(id) {
            return Err(StoreError::CorruptRecord {
                id: id.clone(),
                reason: "session id must be non-empty [A-Za-z0-9_-]".into(),
            });
        }
        let unwritable = |source| StoreError::StoreUnwritable {
            path: self.root.clone(),
            source,
        };
        let target = self.path_for(id);
        if target.exists() {
            return Err(StoreError::DuplicateId(id.clone()));
        }
        let mut tmp = NamedTempFile::new_in(&self.root).map_err(unwritable)?;
        {
            let mut w = BufWriter::new(tmp.as_file_mut());
            encode_record(&mut w, record).map_err(unwritable)?;
            w.flush().map_err(unwritable)?;
        }
        tmp.as_file().sync_all().map_err(unwritable)?;
        tmp.persist_noclobber(&target).map_err(|e| {
            if e.error.kind() == io::ErrorKind::AlreadyExists {
                StoreError::DuplicateId(id.clone())
            } else {
                unwritable(e.error)
            }
        })?;
        sync_dir(&self.root);
        Ok(id.clone())
    }

    pub fn load(&self, id: &str) -> Result<SessionRecord, StoreError> {
        if !valid_id(id) {
            return Err(StoreError::NotFound(id.to_string()));
        }
        let file = File::open(self.path_for(id)).map_err(|e| match e.kind() {
            io::ErrorKind::NotFound => StoreError::NotFound(id.to_string()),
            _ => StoreError::Io(e),
        })?;
        let record = decode_record(BufReader::new(file), id)?;
        if record.session_id != id {
            return Err(StoreError::CorruptRecord {
                id: id.to_string(),
                reason: format!("header names session {}", record.session_id),
            });
        }
        Ok(record)
    }

    pub fn delete(&self, id: &str) -> Result<(), StoreError> {
        if !valid_id(id) {
            return Err(StoreError::NotFound(id.to_string()));
        }
        match fs::remove_file(self.path_for(id)) {
            Ok(()) => {
                sync_dir(&self.root);
                Ok(())
            }
            Err(e) if e.kind() == io::ErrorKind::NotFound => {
                Err(StoreError::NotFound(id.to_string()))
            }
            Err(e) => Err(StoreError::Io(e)),
        }
    }

    /// Summaries of every stored session, oldest first. Unreadable files are
    /// skipped with a warning.
    pub fn list(&self) -> Result<Vec<SessionSummary>, StoreError> {
        let mut out = Vec::new();
        for entry in fs::read_dir(&self.root)? {
            let path = entry?.path();
            let Some(id) = record_id(&path) else { continue };
            match read_header(&path, &id) {
                Ok(h) => out.push(SessionSummary {
                    session_id: h.session_id,
                    created_at_us: h.created_at_us,
                    n_drops: h.metrics.n_drops,
                    hit_rate: h.metrics.hit_rate,
                }),
                // deleted between read_dir and open
                Err(StoreError::NotFound(_)) => {}
                Err(e) => log::warn!("skipping {}: {e}", path.display()),
            }
        }
        out.sort_by(|a, b| {
            a.created_at_us
                .cmp(&b.created_at_us)
                .then_with(|| a.session_id.cmp(&b.session_id))
        });
        Ok(out)
    }
}

fn record_id(path: &Path) -> Option<String> {
    if path.extension()? != RECORD_EXT {
        return None;
    }
    let stem = path.file_stem()?.to_str()?;
    valid_id(stem).then(|| stem.to_string())
}

fn sync_dir(dir: &Path) {
    #[cfg(unix)]
    if let Ok(d) = File::open(dir) {
        let _ = d.sync_all();
    }
}

fn corrupt(id: &str, reason: impl std::fmt::Display) -> StoreError {
    StoreError::CorruptRecord {
        id: id.to_string(),
        reason: reason.to_string(),
    }
}

fn parse_header(line: &str, id: &str) -> Result<Header, StoreError> {
    let value: serde_json::Value =
        serde_json::from_str(line).map_err(|e| corrupt(id, format!("header: {e}")))?;
    let found = value
        .get("schema_version")
        .and_then(serde_json::Value::as_u64)
        .ok_or_else(|| corrupt(id, "header has no schema_version"))?;
    if found != SCHEMA_VERSION as u64 {
        return Err(StoreError::SchemaMismatch {
            id: id.to_string(),
            found,
        });
    }
    match serde_json::from_value::<Line>(value) {
        Ok(Line::Header(h)) => Ok(*h),
        Ok(_) => Err(corrupt(id, "first line is not a header")),
        Err(e) => Err(corrupt(id, format!("header: {e}"))),
    }
}

fn read_header(path: &Path, id: &str) -> Result<Header, StoreError> {
    let file = File::open(path).map_err(|e| match e.kind() {
        io::ErrorKind::NotFound => StoreError::NotFound(id.to_string()),
        _ => StoreError::Io(e),
    })?;
    let mut first = String::new();
    BufReader::new(file).read_line(&mut first)?;
    parse_header(first.trim_end(), id)
}

/// Writes a record in the store's line format.
pub fn encode_record<W: Write>(mut w: W, record: &SessionRecord) -> io::Result<()> {
    let header = Line::Header(Box::new(Header {
        schema_version: record.schema_version,
        session_id: record.session_id.clone(),
        created_at_us: record.created_at_us,
        scene: record.scene.clone(),
        gesture: record.gesture,
        dda: record.dda,
        feedback_frames: record.feedback_frames,
        block_size: record.block_size,
        metrics: record.metrics,
        n_drops: record.drops.len() as u64,
        n_events: record.events.len() as u64,
    }));
    let mut put = |line: &Line| -> io::Result<()> {
        serde_json::to_writer(&mut w, line)?;
        w.write_all(b"\n")
    };
    put(&header)?;
    for d in &record.drops {
        put(&Line::Drop(*d))?;
    }
    for e in &record.events {
        put(&Line::Event { event: *e })?;
    }
    Ok(())
}

/// Parses and verifies a record in the store's line format. `id` is used
/// for error messages only.
pub fn decode_record<R: BufRead>(r: R, id: &str) -> Result<SessionRecord, StoreError> {
    let mut lines = r.lines();
    let first = match lines.next() {
        Some(l) => l?,
        None => return Err(corrupt(id, "empty record")),
    };
    let header = parse_header(&first, id)?;
    let mut drops = Vec::new();
    let mut events = Vec::new();
    for (i, line) in lines.enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        match serde_json::from_str::<Line>(&line) {
            Ok(Line::Drop(d)) => drops.push(d),
            Ok(Line::Event { event }) => events.push(event),
            Ok(Line::Header(_)) => {
                return Err(corrupt(id, format!("line {}: second header", i + 2)))
            }
            Err(e) => return Err(corrupt(id, format!("line {}: {e}", i + 2))),
        }
    }
    if drops.len() as u64 != header.n_drops || events.len() as u64 != header.n_events {
        return Err(corrupt(
            id,
            format!(
                "expected {} drops and {} events, found {} and {}",
                header.n_drops,
                header.n_events,
                drops.len(),
                events.len()
            ),
        ));
    }
    let recomputed = compute_metrics(&drops, header.scene.target_center);
    if recomputed != header.metrics {
        return Err(corrupt(id, "stored metrics disagree with drops"));
    }
    Ok(SessionRecord {
        session_id: header.session_id,
        created_at_us: header.created_at_us,
        schema_version: header.schema_version,
        scene: header.scene,
        gesture: header.gesture,
        dda: header.dda,
        feedback_frames: header.feedback_frames,
        block_size: header.block_size,
        drops,
        events,
        metrics: header.metrics,
    })
}

/// Reads a standalone record file (same format as the store's files).
pub fn read_record_file(path: &Path) -> Result<SessionRecord, StoreError> {
    let name = path.display().to_string();
    let file = File::open(path).map_err(|e| match e.kind() {
        io::ErrorKind::NotFound => StoreError::NotFound(name.clone()),
        _ => StoreError::Io(e),
    })?;
    decode_record(BufReader::new(file), &name)
}
