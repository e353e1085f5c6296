//! Decision store: records in memory, an append-only journal of decisions
//! and a periodic snapshot that lets the journal be truncated.
//!
//! A decision is appended and synced to the journal before it becomes
//! visible, so replaying snapshot + journal always reproduces the state
//! readers last saw.

use std::collections::BTreeMap;
use std::fs::{self, File, OpenOptions};
use std::io::{self, BufRead, BufReader, Seek, SeekFrom, Write};
use std::path::{Path, PathBuf};

use chrono::{DateTime, Utc};
use econ_events::events::CandidateQuintuple;
use econ_events::selection::Method;
use parking_lot::RwLock;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pending,
    Accepted,
    Rejected,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Action {
    Accept,
    Reject,
}

/// One candidate quintuple under curation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KbRecord {
    pub record_id: String,
    pub event_key: String,
    pub quintuple: CandidateQuintuple,
    pub confidence: f64,
    /// selection methods whose pick this candidate is
    pub methods: Vec<Method>,
    pub status: Status,
    pub provenance: Vec<String>,
    pub decided_at: Option<DateTime<Utc>>,
    pub decided_by: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JournalEntry {
    pub seq: u64,
    pub record_id: String,
    pub action: Action,
    pub curator: String,
    pub at: DateTime<Utc>,
}

#[derive(Debug, Serialize, Deserialize)]
struct Snapshot {
    seq: u64,
    records: Vec<KbRecord>,
}

#[derive(Debug, thiserror::Error)]
pub enum StoreError {
    #[error("no record {0}")]
    NotFound(String),
    #[error("record {record_id} is already {status:?}")]
    Conflict { record_id: String, status: Status },
    #[error("{path}: {source}")]
    Io { path: String, source: io::Error },
    #[error("{path}:{line}: {source}")]
    Corrupt {
        path: String,
        line: usize,
        source: serde_json::Error,
    },
    #[error("journal entry {seq} does not apply: {reason}")]
    Replay { seq: u64, reason: String },
    #[error("snapshot holds {snapshot} records but the candidate set has {candidates}")]
    Mismatch { snapshot: usize, candidates: usize },
}

const JOURNAL: &str = "journal.jsonl";
const SNAPSHOT: &str = "snapshot.json";

struct State {
    records: BTreeMap<String, KbRecord>,
    /// event key -> record ids
    events: BTreeMap<String, Vec<String>>,
    seq: u64,
    journal: File,
    since_snapshot: u64,
}

pub struct Store {
    dir: PathBuf,
    state: RwLock<State>,
    snapshot_every: u64,
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> StoreError + '_ {
    move |source| StoreError::Io {
        path: path.display().to_string(),
        source,
    }
}

/// Checks a decision against the current records and returns every record
/// it changes, without touching the state.
fn plan(
    records: &BTreeMap<String, KbRecord>,
    events: &BTreeMap<String, Vec<String>>,
    entry: &JournalEntry,
) -> Result<Vec<KbRecord>, StoreError> {
    let record = records
        .get(&entry.record_id)
        .ok_or_else(|| StoreError::NotFound(entry.record_id.clone()))?;
    if record.status != Status::Pending {
        return Err(StoreError::Conflict {
            record_id: record.record_id.clone(),
            status: record.status,
        });
    }
    let decide = |r: &KbRecord, status: Status| KbRecord {
        status,
        decided_at: Some(entry.at),
        decided_by: Some(entry.curator.clone()),
        ..r.clone()
    };
    let mut changed = Vec::new();
    match entry.action {
        Action::Reject => changed.push(decide(record, Status::Rejected)),
        Action::Accept => {
            changed.push(decide(record, Status::Accepted));
            for id in &events[&record.event_key] {
                let sibling = &records[id];
                if id != &record.record_id && sibling.status == Status::Pending {
                    changed.push(decide(sibling, Status::Rejected));
                }
            }
        }
    }
    Ok(changed)
}

impl State {
    fn apply(&mut self, changed: Vec<KbRecord>, seq: u64) {
        for r in changed {
            self.records.insert(r.record_id.clone(), r);
        }
        self.seq = seq;
    }
}

fn index(records: &BTreeMap<String, KbRecord>) -> BTreeMap<String, Vec<String>> {
    let mut events: BTreeMap<String, Vec<String>> = BTreeMap::new();
    for r in records.values() {
        events.entry(r.event_key.clone()).or_default().push(r.record_id.clone());
    }
    events
}

/// Reads journal entries; an unparsable final line is a write torn by a
/// crash and is cut off so later appends start on a clean line.
fn read_journal(path: &Path) -> Result<Vec<JournalEntry>, StoreError> {
    let file = match File::open(path) {
        Ok(f) => f,
        Err(e) if e.kind() == io::ErrorKind::NotFound => return Ok(Vec::new()),
        Err(e) => return Err(io_err(path)(e)),
    };
    let mut lines = Vec::new();
    let mut reader = BufReader::new(file);
    let mut buf = String::new();
    loop {
        buf.clear();
        let n = reader.read_line(&mut buf).map_err(io_err(path))?;
        if n == 0 {
            break;
        }
        lines.push(buf.clone());
    }
    let mut entries = Vec::new();
    let mut good_len = 0u64;
    for (i, line) in lines.iter().enumerate() {
        let last = i + 1 == lines.len();
        match serde_json::from_str::<JournalEntry>(line.trim_end()) {
            Ok(e) if line.ends_with('\n') => {
                entries.push(e);
                good_len += line.len() as u64;
            }
            Ok(_) | Err(_) if last => {
                log::warn!("{}: dropping torn final line", path.display());
                let f = OpenOptions::new().write(true).open(path).map_err(io_err(path))?;
                f.set_len(good_len).map_err(io_err(path))?;
                f.sync_all().map_err(io_err(path))?;
            }
            Ok(_) => unreachable!("only the last line can lack a newline"),
            Err(source) => {
                return Err(StoreError::Corrupt {
                    path: path.display().to_string(),
                    line: i + 1,
                    source,
                })
            }
        }
    }
    Ok(entries)
}

impl Store {
    /// Opens the store in `dir`, starting from the snapshot when one exists
    /// and from `initial` otherwise, then replays the journal.
    pub fn open(dir: impl Into<PathBuf>, initial: Vec<KbRecord>) -> Result<Store, StoreError> {
        let dir = dir.into();
        fs::create_dir_all(&dir).map_err(io_err(&dir))?;
        let snapshot_path = dir.join(SNAPSHOT);
        let (mut seq, base) = match fs::read_to_string(&snapshot_path) {
            Ok(text) => {
                let snap: Snapshot = serde_json::from_str(&text).map_err(|source| StoreError::Corrupt {
                    path: snapshot_path.display().to_string(),
                    line: 1,
                    source,
                })?;
                let mut ids: Vec<&str> = initial.iter().map(|r| r.record_id.as_str()).collect();
                ids.sort_unstable();
                let mut snap_ids: Vec<&str> = snap.records.iter().map(|r| r.record_id.as_str()).collect();
                snap_ids.sort_unstable();
                if ids != snap_ids {
                    return Err(StoreError::Mismatch {
                        snapshot: snap_ids.len(),
                        candidates: ids.len(),
                    });
                }
                (snap.seq, snap.records)
            }
            Err(e) if e.kind() == io::ErrorKind::NotFound => (0, initial),
            Err(e) => return Err(io_err(&snapshot_path)(e)),
        };
        let records: BTreeMap<String, KbRecord> = base.into_iter().map(|r| (r.record_id.clone(), r)).collect();
        let events = index(&records);

        let journal_path = dir.join(JOURNAL);
        let entries = read_journal(&journal_path)?;
        let journal = OpenOptions::new()
            .create(true)
            .append(true)
            .open(&journal_path)
            .map_err(io_err(&journal_path))?;
        let mut state = State {
            records,
            events,
            seq,
            journal,
            since_snapshot: 0,
        };
        for entry in entries {
            if entry.seq <= seq {
                continue;
            }
            let changed = plan(&state.records, &state.events, &entry).map_err(|e| StoreError::Replay {
                seq: entry.seq,
                reason: e.to_string(),
            })?;
            state.apply(changed, entry.seq);
            state.since_snapshot += 1;
            seq = entry.seq;
        }
        Ok(Store {
            dir,
            state: RwLock::new(state),
            snapshot_every: 256,
        })
    }

    /// Number of journaled decisions after which a snapshot is taken.
    pub fn with_snapshot_every(mut self, n: u64) -> Store {
        self.snapshot_every = n.max(1);
        self
    }

    pub fn get(&self, record_id: &str) -> Option<KbRecord> {
        self.state.read().records.get(record_id).cloned()
    }

    /// Records of one event; None for an unknown event.
    pub fn event_records(&self, event_key: &str) -> Option<Vec<KbRecord>> {
        let state = self.state.read();
        let ids = state.events.get(event_key)?;
        Some(ids.iter().map(|id| state.records[id].clone()).collect())
    }

    /// Every record in id order, read under one lock.
    pub fn records(&self) -> Vec<KbRecord> {
        self.state.read().records.values().cloned().collect()
    }

    pub fn event_keys(&self) -> Vec<String> {
        self.state.read().events.keys().cloned().collect()
    }

    pub fn seq(&self) -> u64 {
        self.state.read().seq
    }

    pub fn decide(&self, record_id: &str, action: Action, curator: &str) -> Result<KbRecord, StoreError> {
        self.decide_at(record_id, action, curator, Utc::now())
    }

    /// Applies one decision. Decisions are serialized by the write lock; the
    /// journal line is synced before the change is applied.
    pub fn decide_at(
        &self,
        record_id: &str,
        action: Action,
        curator: &str,
        at: DateTime<Utc>,
    ) -> Result<KbRecord, StoreError> {
        let mut state = self.state.write();
        let entry = JournalEntry {
            seq: state.seq + 1,
            record_id: record_id.to_string(),
            action,
            curator: curator.to_string(),
            at,
        };
        let changed = plan(&state.records, &state.events, &entry)?;
        let path = self.dir.join(JOURNAL);
        let mut line = serde_json::to_string(&entry).expect("journal entry serializes");
        line.push('\n');
        state.journal.write_all(line.as_bytes()).map_err(io_err(&path))?;
        state.journal.sync_data().map_err(io_err(&path))?;
        state.apply(changed, entry.seq);
        state.since_snapshot += 1;
        if state.since_snapshot >= self.snapshot_every {
            self.write_snapshot(&mut state)?;
        }
        Ok(state.records[record_id].clone())
    }

    pub fn snapshot(&self) -> Result<(), StoreError> {
        let mut state = self.state.write();
        self.write_snapshot(&mut state)
    }

    /// Writes the snapshot atomically, then empties the journal. A crash
    /// between the two leaves entries the snapshot already covers, which
    /// replay skips by sequence number.
    fn write_snapshot(&self, state: &mut State) -> Result<(), StoreError> {
        let path = self.dir.join(SNAPSHOT);
        let tmp = self.dir.join(format!("{SNAPSHOT}.tmp"));
        let snap = Snapshot {
            seq: state.seq,
            records: state.records.values().cloned().collect(),
        };
        let mut f = File::create(&tmp).map_err(io_err(&tmp))?;
        serde_json::to_writer(&mut f, &snap).expect("snapshot serializes");
        f.write_all(b"\n").map_err(io_err(&tmp))?;
        f.sync_all().map_err(io_err(&tmp))?;
        fs::rename(&tmp, &path).map_err(io_err(&path))?;
        let journal = self.dir.join(JOURNAL);
        state.journal.set_len(0).map_err(io_err(&journal))?;
        state.journal.seek(SeekFrom::End(0)).map_err(io_err(&journal))?;
        state.journal.sync_all().map_err(io_err(&journal))?;
        state.since_snapshot = 0;
        Ok(())
    }
}
