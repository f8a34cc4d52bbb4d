//! Rebuilding a session from its command log.

use std::path::Path;

use crate::error::ServiceError;
use crate::session::{Command, Env, Outcome, Session};
use crate::store::{read_events, read_json, snapshot_bytes, LoggedEvent, SNAPSHOT, SUBMISSION};
use crate::submission::{restore, Assets, Submission};

fn mismatch(seq: u64, what: &str) -> ServiceError {
    ServiceError::Corrupt(format!("event {seq}: replayed {what} differs from the log"))
}

/// Re-applies every logged command and checks each recorded verdict and
/// state along the way.
pub fn replay(sub: &Submission, events: &[LoggedEvent]) -> Result<Session, ServiceError> {
    let analysis = restore(sub)?;
    let assets = Assets::for_config(&sub.config)?;
    let env = Env { analysis: &analysis, catalog: &assets.catalog, guard: &assets.guard };
    let (first, rest) = events.split_first().ok_or_else(|| ServiceError::Corrupt("empty event log".into()))?;
    let Command::Start(params) = &first.event else {
        return Err(ServiceError::Corrupt("event log does not begin with START".into()));
    };
    let mut s = Session::start(&env, params.clone(), sub.functional.clone())?;
    if s.state != first.state_after {
        return Err(mismatch(first.seq, "state"));
    }
    for e in rest {
        if e.seq != s.revision {
            return Err(mismatch(e.seq, "sequence number"));
        }
        let out = s.apply(&env, &e.event).map_err(|err| ServiceError::Corrupt(format!("event {}: {err}", e.seq)))?;
        let verdict = match out {
            Outcome::Verdict { verdict, .. } => Some(verdict),
            _ => None,
        };
        if verdict != e.verdict {
            return Err(mismatch(e.seq, "verdict"));
        }
        if s.state != e.state_after {
            return Err(mismatch(e.seq, "state"));
        }
    }
    Ok(s)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReplaySummary {
    pub events: usize,
    pub verdicts: usize,
    pub state: &'static str,
}

/// Replays a session directory and checks the result against its snapshot.
pub fn replay_dir(dir: &Path) -> Result<(Session, ReplaySummary), ServiceError> {
    let sub: Submission = read_json(&dir.join(SUBMISSION))?;
    let events = read_events(dir)?;
    let s = replay(&sub, &events)?;
    let stored = std::fs::read(dir.join(SNAPSHOT))?;
    if stored != snapshot_bytes(&s) {
        return Err(ServiceError::Corrupt("replayed session differs from the snapshot".into()));
    }
    let summary = ReplaySummary {
        events: events.len(),
        verdicts: events.iter().filter(|e| e.verdict.is_some()).count(),
        state: s.state.name(),
    };
    Ok((s, summary))
}
