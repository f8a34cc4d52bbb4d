//! Files under the data directory:
//!
//! ```text
//! assignments/<assignment_id>.json
//! submissions/<submission_id>.json
//! sessions/<session_id>/submission.json   copy, so the directory stands alone
//! sessions/<session_id>/snapshot.json     latest state, replaced atomically
//! sessions/<session_id>/events.jsonl      one applied command per line
//! ```

use std::fs::{self, File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use socratic_core::config::AssignmentConfig;
use socratic_core::dialogue::Verdict;

use crate::error::ServiceError;
use crate::session::{Command, Session, SessionState};
use crate::submission::Submission;

/// One line of `events.jsonl`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LoggedEvent {
    pub seq: u64,
    pub event: Command,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub verdict: Option<Verdict>,
    pub state_after: SessionState,
}

pub const SNAPSHOT: &str = "snapshot.json";
pub const EVENTS: &str = "events.jsonl";
pub const SUBMISSION: &str = "submission.json";

/// Writes through a temporary file and a rename so readers never see a
/// partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    let dir = path.parent().unwrap_or(Path::new("."));
    fs::create_dir_all(dir)?;
    let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("file");
    let tmp = dir.join(format!(".{name}.{}.tmp", uuid::Uuid::new_v4().simple()));
    let mut f = File::create(&tmp)?;
    f.write_all(bytes)?;
    f.sync_all()?;
    fs::rename(&tmp, path)
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, ServiceError> {
    let text = fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| ServiceError::Corrupt(format!("{}: {e}", path.display())))
}

pub fn read_events(dir: &Path) -> Result<Vec<LoggedEvent>, ServiceError> {
    let path = dir.join(EVENTS);
    let f = File::open(&path)?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(f).lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let e = serde_json::from_str(&line)
            .map_err(|e| ServiceError::Corrupt(format!("{} line {}: {e}", path.display(), i + 1)))?;
        out.push(e);
    }
    Ok(out)
}

pub fn snapshot_bytes(s: &Session) -> Vec<u8> {
    serde_json::to_vec_pretty(s).expect("session serializes")
}

#[derive(Debug, Clone)]
pub struct Store {
    root: PathBuf,
}

impl Store {
    pub fn open(root: impl Into<PathBuf>) -> Result<Store, ServiceError> {
        let root = root.into();
        for d in ["assignments", "submissions", "sessions"] {
            fs::create_dir_all(root.join(d))?;
        }
        Ok(Store { root })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn session_dir(&self, id: &str) -> PathBuf {
        self.root.join("sessions").join(id)
    }

    pub fn assignments(&self) -> Result<Vec<AssignmentConfig>, ServiceError> {
        let mut paths: Vec<PathBuf> = fs::read_dir(self.root.join("assignments"))?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "json"))
            .collect();
        paths.sort();
        paths
            .iter()
            .map(|p| AssignmentConfig::load(p).map_err(|e| ServiceError::Corrupt(format!("{}: {e}", p.display()))))
            .collect()
    }

    pub fn save_assignment(&self, c: &AssignmentConfig) -> Result<(), ServiceError> {
        let path = self.root.join("assignments").join(format!("{}.json", c.assignment_id));
        write_atomic(&path, &serde_json::to_vec_pretty(c)?)?;
        Ok(())
    }

    fn submission_path(&self, id: &str) -> PathBuf {
        self.root.join("submissions").join(format!("{id}.json"))
    }

    pub fn save_submission(&self, s: &Submission) -> Result<(), ServiceError> {
        write_atomic(&self.submission_path(&s.submission_id), &serde_json::to_vec_pretty(s)?)?;
        Ok(())
    }

    pub fn load_submission(&self, id: &str) -> Result<Option<Submission>, ServiceError> {
        if !valid_id(id) {
            return Ok(None);
        }
        let path = self.submission_path(id);
        if !path.exists() {
            return Ok(None);
        }
        read_json(&path).map(Some)
    }

    /// Creates the session directory with its submission copy and first event.
    pub fn create_session(&self, s: &Session, sub: &Submission, first: &LoggedEvent) -> Result<(), ServiceError> {
        let dir = self.session_dir(&s.session_id);
        fs::create_dir_all(&dir)?;
        write_atomic(&dir.join(SUBMISSION), &serde_json::to_vec_pretty(sub)?)?;
        File::create(dir.join(EVENTS))?;
        self.record(s, first)
    }

    /// Appends the event, then replaces the snapshot.
    pub fn record(&self, s: &Session, e: &LoggedEvent) -> Result<(), ServiceError> {
        let dir = self.session_dir(&s.session_id);
        let mut f = OpenOptions::new().append(true).open(dir.join(EVENTS))?;
        let mut line = serde_json::to_vec(e)?;
        line.push(b'\n');
        f.write_all(&line)?;
        f.sync_data()?;
        write_atomic(&dir.join(SNAPSHOT), &snapshot_bytes(s))?;
        Ok(())
    }

    pub fn load_session(&self, id: &str) -> Result<Option<(Session, Submission)>, ServiceError> {
        if !valid_id(id) {
            return Ok(None);
        }
        let dir = self.session_dir(id);
        if !dir.join(SNAPSHOT).exists() {
            return Ok(None);
        }
        Ok(Some((read_json(&dir.join(SNAPSHOT))?, read_json(&dir.join(SUBMISSION))?)))
    }
}

/// Ids come from clients, so keep them to a safe file-name alphabet.
pub fn valid_id(id: &str) -> bool {
    !id.is_empty() && id.len() <= 64 && id.bytes().all(|b| b.is_ascii_alphanumeric() || b == b'-' || b == b'_')
}
