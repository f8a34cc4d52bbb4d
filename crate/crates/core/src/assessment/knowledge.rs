use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::AssessmentError;
use crate::dialogue::{Action, Verdict};
use crate::facts::Analysis;
use crate::kc::{Kc, MisconceptionTag};
use crate::questions::{open_units, AskHistory, Catalog};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistoryEntry {
    pub question_id: String,
    pub kc: Kc,
    pub score: u32,
    /// Session event sequence number, so replays stay byte-identical.
    pub timestamp: u64,
}

/// Per-KC mastery estimates and binary misconception flags.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KnowledgeState {
    pub mastery: BTreeMap<Kc, f64>,
    pub misconceptions: BTreeMap<Kc, BTreeMap<MisconceptionTag, bool>>,
    pub history: Vec<HistoryEntry>,
}

impl KnowledgeState {
    pub fn new(kcs: impl IntoIterator<Item = Kc>, initial: f64) -> KnowledgeState {
        KnowledgeState {
            mastery: kcs.into_iter().map(|k| (k, initial.clamp(0.0, 1.0))).collect(),
            misconceptions: BTreeMap::new(),
            history: Vec::new(),
        }
    }

    /// Sets the flag for a chosen distractor.
    pub fn flag(&mut self, kc: Kc, tag: MisconceptionTag) -> Result<(), AssessmentError> {
        if !self.mastery.contains_key(&kc) {
            return Err(AssessmentError::UnknownKc(kc));
        }
        if tag != MisconceptionTag::None {
            self.misconceptions.entry(kc).or_default().insert(tag, true);
        }
        Ok(())
    }

    pub fn flagged(&self, kc: Kc, tag: MisconceptionTag) -> bool {
        self.misconceptions.get(&kc).and_then(|m| m.get(&tag)).copied().unwrap_or(false)
    }

    /// Active flags in (KC, tag) order.
    pub fn active_flags(&self) -> Vec<(Kc, MisconceptionTag)> {
        self.misconceptions.iter().flat_map(|(k, m)| m.iter().filter(|(_, on)| **on).map(|(t, _)| (*k, *t))).collect()
    }

    /// Moves mastery toward the verdict score by `alpha`, records the chosen
    /// distractor's tag and clears the KC's flags on a pass.
    pub fn update_mastery(
        &mut self,
        kc: Kc,
        question_id: &str,
        verdict: &Verdict,
        chosen_tag: MisconceptionTag,
        alpha: f64,
        timestamp: u64,
    ) -> Result<(), AssessmentError> {
        let m = self.mastery.get_mut(&kc).ok_or(AssessmentError::UnknownKc(kc))?;
        let target = f64::from(verdict.score.min(100)) / 100.0;
        *m = ((1.0 - alpha) * *m + alpha * target).clamp(0.0, 1.0);
        self.flag(kc, chosen_tag)?;
        if verdict.action == Action::Pass {
            if let Some(flags) = self.misconceptions.get_mut(&kc) {
                flags.values_mut().for_each(|f| *f = false);
            }
        }
        self.history.push(HistoryEntry { question_id: question_id.to_owned(), kc, score: verdict.score, timestamp });
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "next", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Next {
    Ask { kc: Kc, unit_id: String },
    Done,
}

fn unit_of_question(question_id: &str) -> Option<&str> {
    question_id.split('/').nth(1)
}

/// Weakest tracked KC that still has an open question (ties by KC order),
/// then its least-asked unit (ties by unit order).
pub fn select_next(
    state: &KnowledgeState,
    a: &Analysis,
    catalog: &Catalog,
    history: &AskHistory,
    asked: u32,
    budget: u32,
) -> Next {
    if asked >= budget {
        return Next::Done;
    }
    let mut best: Option<(f64, Kc, BTreeSet<String>)> = None;
    for (&kc, &m) in &state.mastery {
        if best.as_ref().is_some_and(|(b, _, _)| *b <= m) {
            continue;
        }
        let units = open_units(a, catalog, kc, history);
        if !units.is_empty() {
            best = Some((m, kc, units));
        }
    }
    let Some((_, kc, units)) = best else { return Next::Done };
    let asked_in = |u: &str| history.asked.iter().filter(|q| unit_of_question(q) == Some(u)).count();
    let unit = a
        .facts
        .logic_units
        .iter()
        .filter(|u| units.contains(&u.unit_id))
        .min_by_key(|u| asked_in(&u.unit_id))
        .expect("open units come from the fact record");
    Next::Ask { kc, unit_id: unit.unit_id.clone() }
}
