//! The per-session state machine. Every mutation goes through `apply`, so
//! a persisted command log replays to the same session.

use minilang::Program;
use serde::{Deserialize, Serialize};
use socratic_core::assessment::{
    dialogue_score, functional_score, fuse, select_next, AssessmentReport, FunctionalResult, KnowledgeState, Mode,
    Next, QuestionRecord,
};
use socratic_core::config::{AssignmentConfig, Weights};
use socratic_core::dialogue::backend::parse_similarity;
use socratic_core::dialogue::guard::reply_is_safe;
use socratic_core::dialogue::verify::similarity;
use socratic_core::dialogue::{
    build_prompt_context, guard_turn, render_hint, session_vocabulary, Action, BackendDescriptor, BackendError,
    BackendKind, Classification, GuardConfig, GuardrailRuling, HintLevel, PromptTarget, Role, Speaker, Thresholds,
    Turn, TurnKind, Verdict,
};
use socratic_core::facts::Analysis;
use socratic_core::questions::{generate_followup, generate_question, AskHistory, Catalog, Question, ReferenceReason};
use socratic_core::{Kc, MisconceptionTag};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum SessionState {
    Created,
    Analyzed,
    Tier1Pending,
    Tier2Pending,
    Scaffolding,
    Completed,
    Aborted,
}

impl SessionState {
    pub fn is_terminal(self) -> bool {
        matches!(self, SessionState::Completed | SessionState::Aborted)
    }

    pub fn name(self) -> &'static str {
        match self {
            SessionState::Created => "CREATED",
            SessionState::Analyzed => "ANALYZED",
            SessionState::Tier1Pending => "TIER1_PENDING",
            SessionState::Tier2Pending => "TIER2_PENDING",
            SessionState::Scaffolding => "SCAFFOLDING",
            SessionState::Completed => "COMPLETED",
            SessionState::Aborted => "ABORTED",
        }
    }
}

/// Grading settings copied from the assignment when the session starts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GradingConfig {
    pub thresholds: Thresholds,
    pub weights: Weights,
    pub alpha: f64,
    pub initial_mastery: f64,
    pub followup_cap: u32,
    pub time_limit_secs: u64,
}

impl GradingConfig {
    pub fn from_assignment(c: &AssignmentConfig) -> GradingConfig {
        GradingConfig {
            thresholds: c.thresholds,
            weights: c.weights,
            alpha: c.mastery.alpha,
            initial_mastery: c.mastery.initial,
            followup_cap: c.followup_cap,
            time_limit_secs: c.summative_time_limit_secs,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Tier1Choice {
    pub question_id: String,
    pub choice_index: usize,
    pub correct: bool,
    pub tag: MisconceptionTag,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TranscriptEntry {
    pub seq: u64,
    pub speaker: Speaker,
    pub kind: TurnKind,
    pub text: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub question_id: Option<String>,
}

/// What came back from the external backend for one command.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "result", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum BackendOutcome {
    Reply { text: String },
    Error { error: BackendError },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StartParams {
    pub session_id: String,
    pub submission_id: String,
    pub mode: Mode,
    pub seed: u64,
    pub question_budget: u32,
    pub started_at: u64,
    pub backend: BackendDescriptor,
    pub grading: GradingConfig,
}

/// A state-changing request. The log of these is the session's history.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Command {
    Start(StartParams),
    Tier1 {
        question_id: String,
        choice_index: usize,
    },
    Tier2 {
        text: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        backend: Option<BackendOutcome>,
    },
    Message {
        text: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        backend: Option<BackendOutcome>,
    },
    Abort {
        reason: String,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Outcome {
    Started,
    Tier1Recorded,
    Redirect {
        ruling: GuardrailRuling,
    },
    Verdict {
        verdict: Verdict,
        #[serde(skip_serializing_if = "Option::is_none")]
        hint: Option<String>,
        followup: bool,
    },
    Reply {
        ruling: GuardrailRuling,
        reply: String,
    },
    Aborted,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SessionError {
    #[error("operation not allowed in state {}", state.name())]
    WrongState { state: SessionState },
    #[error("question {question_id} is not the open question")]
    StaleQuestion { question_id: String },
    #[error("choice {0} is out of range")]
    InvalidChoice(usize),
    #[error("the answer is empty")]
    EmptyAnswer,
    #[error("the session has not finished")]
    SessionNotFinished,
    #[error("{0}")]
    Invalid(String),
}

/// Read-only inputs every transition needs.
pub struct Env<'a> {
    pub analysis: &'a Analysis,
    pub catalog: &'a Catalog,
    pub guard: &'a GuardConfig,
}

impl Env<'_> {
    fn program(&self) -> &Program {
        &self.analysis.program
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Session {
    pub session_id: String,
    pub submission_id: String,
    pub mode: Mode,
    pub seed: u64,
    pub state: SessionState,
    pub current_question: Option<Question>,
    /// Reference for the open question; never sent to clients.
    pub current_reference: Option<ReferenceReason>,
    pub tier1: Option<Tier1Choice>,
    pub attempts_used: u32,
    pub followups_used: u32,
    pub asked: Vec<String>,
    pub history: AskHistory,
    pub knowledge: KnowledgeState,
    pub transcript: Vec<TranscriptEntry>,
    pub question_budget: u32,
    pub backend: BackendDescriptor,
    pub slots: Vec<QuestionRecord>,
    pub grading: GradingConfig,
    pub functional: FunctionalResult,
    pub started_at: u64,
    pub abort_reason: Option<String>,
    /// Count of applied commands.
    pub revision: u64,
}

fn question_text(q: &Question) -> String {
    let mut out = q.stem.clone();
    for (i, o) in q.options.iter().enumerate() {
        out.push_str(&format!("\n{}. {}", i + 1, o.text));
    }
    out
}

/// Verdict turns stay in words; the numbers travel in the verdict itself.
fn verdict_text(action: Action) -> &'static str {
    match action {
        Action::Pass => "That explanation covers the key points.",
        Action::HintBroad | Action::HintFocused => "Part of the reasoning is missing.",
        Action::FollowUp => "Not there yet. Let's narrow it down.",
        Action::Fail => "We will leave this question here and move on.",
    }
}

impl Session {
    /// Builds the session and moves it through ANALYZED to its first question.
    pub fn start(env: &Env<'_>, p: StartParams, functional: FunctionalResult) -> Result<Session, SessionError> {
        if p.question_budget == 0 {
            return Err(SessionError::Invalid("question budget must be at least 1".into()));
        }
        let mut s = Session {
            session_id: p.session_id,
            submission_id: p.submission_id,
            mode: p.mode,
            seed: p.seed,
            state: SessionState::Created,
            current_question: None,
            current_reference: None,
            tier1: None,
            attempts_used: 0,
            followups_used: 0,
            asked: Vec::new(),
            history: AskHistory::default(),
            knowledge: KnowledgeState::new(env.analysis.facts.knowledge_components(), p.grading.initial_mastery),
            transcript: Vec::new(),
            question_budget: p.question_budget,
            backend: p.backend,
            slots: Vec::new(),
            grading: p.grading,
            functional,
            started_at: p.started_at,
            abort_reason: None,
            revision: 1,
        };
        s.state = SessionState::Analyzed;
        s.say(Speaker::System, TurnKind::Message, "Submission analyzed.".into(), None);
        s.ask_next(env);
        Ok(s)
    }

    fn say(&mut self, speaker: Speaker, kind: TurnKind, text: String, question_id: Option<String>) {
        self.transcript.push(TranscriptEntry { seq: self.transcript.len() as u64, speaker, kind, text, question_id });
    }

    fn open_id(&self) -> Option<String> {
        self.current_question.as_ref().map(|q| q.question_id.clone())
    }

    fn present(&mut self, q: Question, r: ReferenceReason) {
        self.history.record(&q);
        self.asked.push(q.question_id.clone());
        self.say(Speaker::Agent, TurnKind::Question, question_text(&q), Some(q.question_id.clone()));
        self.current_question = Some(q);
        self.current_reference = Some(r);
        self.tier1 = None;
        self.state = SessionState::Tier1Pending;
    }

    fn ask_next(&mut self, env: &Env<'_>) {
        let next = select_next(
            &self.knowledge,
            env.analysis,
            env.catalog,
            &self.history,
            self.slots.len() as u32,
            self.question_budget,
        );
        let generated = match next {
            Next::Done => None,
            Next::Ask { kc, unit_id } => {
                generate_question(env.analysis, env.catalog, kc, Some(&unit_id), self.seed, &self.history)
                    .ok()
                    .map(|qr| (kc, qr))
            }
        };
        match generated {
            Some((kc, (q, r))) => {
                self.slots.push(QuestionRecord {
                    question_ids: vec![q.question_id.clone()],
                    kc,
                    tier1_correct: Vec::new(),
                    chosen_tags: Vec::new(),
                    verdicts: Vec::new(),
                    score: None,
                });
                self.attempts_used = 0;
                self.followups_used = 0;
                self.present(q, r);
            }
            None => {
                self.current_question = None;
                self.current_reference = None;
                self.tier1 = None;
                self.state = SessionState::Completed;
                self.say(Speaker::System, TurnKind::Message, "Session complete.".into(), None);
            }
        }
    }

    /// Prompt to send to the external backend before applying a turn, if
    /// this session uses one and the turn would reach it.
    pub fn external_prompt(&self, env: &Env<'_>, text: &str, verifier: bool) -> Option<String> {
        if self.backend.kind != BackendKind::External || text.trim().is_empty() {
            return None;
        }
        let ruling = self.rule(env, text);
        if ruling.classification != Classification::OnTopic {
            return None;
        }
        let history: Vec<Turn> =
            self.transcript.iter().map(|t| Turn { speaker: t.speaker, kind: t.kind, text: t.text.clone() }).collect();
        let templates = &self.backend.prompt_templates;
        let facts = &env.analysis.facts;
        if verifier {
            if !matches!(self.state, SessionState::Tier2Pending | SessionState::Scaffolding) {
                return None;
            }
            let reference = self.current_reference.as_ref()?;
            build_prompt_context(
                Role::Verifier,
                templates,
                facts,
                &history,
                PromptTarget::Reference { reference, answer: text },
            )
            .ok()
        } else {
            let q = self.current_question.as_ref()?;
            build_prompt_context(Role::Instructor, templates, facts, &history, PromptTarget::Question(q)).ok()
        }
    }

    fn rule(&self, env: &Env<'_>, text: &str) -> GuardrailRuling {
        let q = self.current_question.as_ref();
        let vocab = session_vocabulary(env.program(), q, env.guard);
        guard_turn(text, &vocab, env.guard, q)
    }

    fn fall_back(&mut self, error: &BackendError) {
        self.backend = BackendDescriptor::rule_based();
        self.say(
            Speaker::System,
            TurnKind::Message,
            format!("External backend failed ({error}); continuing with the rule-based backend."),
            None,
        );
    }

    /// Whether a summative session has run past its time limit at `now`.
    pub fn expired(&self, now: u64) -> bool {
        self.mode == Mode::Summative
            && !self.state.is_terminal()
            && now.saturating_sub(self.started_at) > self.grading.time_limit_secs
    }

    pub fn apply(&mut self, env: &Env<'_>, cmd: &Command) -> Result<Outcome, SessionError> {
        let out = match cmd {
            Command::Start(_) => Err(SessionError::WrongState { state: self.state }),
            Command::Tier1 { question_id, choice_index } => self.tier1(question_id, *choice_index),
            Command::Tier2 { text, backend } => self.tier2(env, text, backend.as_ref()),
            Command::Message { text, backend } => self.message(env, text, backend.as_ref()),
            Command::Abort { reason } => self.abort(reason),
        }?;
        self.revision += 1;
        Ok(out)
    }

    fn tier1(&mut self, question_id: &str, choice: usize) -> Result<Outcome, SessionError> {
        let open = self.state == SessionState::Tier1Pending && self.open_id().as_deref() == Some(question_id);
        if !open {
            if self.asked.iter().any(|q| q == question_id) || self.state == SessionState::Tier1Pending {
                return Err(SessionError::StaleQuestion { question_id: question_id.to_owned() });
            }
            return Err(SessionError::WrongState { state: self.state });
        }
        let q = self.current_question.as_ref().expect("open question");
        let picked = q.options.get(choice).ok_or(SessionError::InvalidChoice(choice))?;
        let record = Tier1Choice {
            question_id: question_id.to_owned(),
            choice_index: choice,
            correct: choice == q.correct_index,
            tag: picked.misconception_tag,
        };
        let text = format!("Selected option {}: {}", choice + 1, picked.text);
        let slot = self.slots.last_mut().expect("an open question has a slot");
        slot.tier1_correct.push(record.correct);
        slot.chosen_tags.push(record.tag);
        self.tier1 = Some(record);
        self.say(Speaker::Student, TurnKind::Answer, text, Some(question_id.to_owned()));
        self.say(
            Speaker::Agent,
            TurnKind::Message,
            "Explain in your own words why you chose that answer.".into(),
            Some(question_id.to_owned()),
        );
        self.state = SessionState::Tier2Pending;
        Ok(Outcome::Tier1Recorded)
    }

    fn tier2(&mut self, env: &Env<'_>, text: &str, backend: Option<&BackendOutcome>) -> Result<Outcome, SessionError> {
        if !matches!(self.state, SessionState::Tier2Pending | SessionState::Scaffolding) {
            return Err(SessionError::WrongState { state: self.state });
        }
        if text.trim().is_empty() {
            return Err(SessionError::EmptyAnswer);
        }
        let qid = self.open_id();
        let ruling = self.rule(env, text);
        if ruling.classification != Classification::OnTopic {
            self.say(Speaker::Student, TurnKind::Message, text.to_owned(), qid.clone());
            self.say(Speaker::Agent, TurnKind::Redirect, ruling.reply.clone(), qid);
            return Ok(Outcome::Redirect { ruling });
        }
        self.say(Speaker::Student, TurnKind::Answer, text.to_owned(), qid.clone());
        let reference = self.current_reference.clone().expect("open question has a reference");
        let tier1_correct = self.tier1.as_ref().is_some_and(|t| t.correct);
        let (rule_sim, matched, missing) = similarity(&reference, text);
        let sim = match backend {
            Some(_) if self.backend.kind != BackendKind::External => rule_sim,
            Some(BackendOutcome::Reply { text }) => match parse_similarity(text) {
                Ok(s) => s,
                Err(e) => {
                    self.fall_back(&e);
                    rule_sim
                }
            },
            Some(BackendOutcome::Error { error }) => {
                self.fall_back(error);
                rule_sim
            }
            None => rule_sim,
        };
        let mut verdict =
            Verdict::new(sim, tier1_correct, self.attempts_used, matched, missing, &self.grading.thresholds);
        if self.mode == Mode::Summative && matches!(verdict.action, Action::HintBroad | Action::HintFocused) {
            verdict.action = Action::FollowUp;
        }
        self.attempts_used += 1;
        self.slots.last_mut().expect("open slot").verdicts.push(verdict.clone());
        self.say(Speaker::Agent, TurnKind::Verdict, verdict_text(verdict.action).into(), qid.clone());
        let mut hint = None;
        let mut followup = false;
        match verdict.action {
            Action::Pass | Action::Fail => {
                self.close_slot(&verdict);
                self.ask_next(env);
            }
            Action::HintBroad | Action::HintFocused => {
                let level = if verdict.action == Action::HintBroad { HintLevel::Broad } else { HintLevel::Focused };
                let text = render_hint(&reference, level, &verdict.missing_atoms);
                self.say(Speaker::Agent, TurnKind::Hint, text.clone(), qid);
                hint = Some(text);
                self.state = SessionState::Scaffolding;
            }
            Action::FollowUp => {
                let next = (self.followups_used < self.grading.followup_cap)
                    .then(|| {
                        let q = self.current_question.as_ref().expect("open question");
                        generate_followup(env.analysis, env.catalog, q, self.seed, &self.history).ok()
                    })
                    .flatten();
                match next {
                    Some((q, r)) => {
                        self.followups_used += 1;
                        self.slots.last_mut().expect("open slot").question_ids.push(q.question_id.clone());
                        self.present(q, r);
                        followup = true;
                    }
                    None => {
                        self.say(
                            Speaker::Agent,
                            TurnKind::Message,
                            "Try again, going through the program one step at a time.".into(),
                            qid,
                        );
                        self.state = SessionState::Scaffolding;
                    }
                }
            }
        }
        Ok(Outcome::Verdict { verdict, hint, followup })
    }

    fn close_slot(&mut self, verdict: &Verdict) {
        let ts = self.transcript.len() as u64;
        let slot = self.slots.last_mut().expect("open slot");
        slot.score = Some(verdict.score);
        let kc: Kc = slot.kc;
        let primary = slot.question_ids[0].clone();
        let tags = slot.chosen_tags.clone();
        let (last, earlier) = tags.split_last().map_or((MisconceptionTag::None, &[][..]), |(l, e)| (*l, e));
        for &t in earlier {
            self.knowledge.flag(kc, t).expect("slot KCs come from the fact record");
        }
        self.knowledge
            .update_mastery(kc, &primary, verdict, last, self.grading.alpha, ts)
            .expect("slot KCs come from the fact record");
    }

    fn message(
        &mut self,
        env: &Env<'_>,
        text: &str,
        backend: Option<&BackendOutcome>,
    ) -> Result<Outcome, SessionError> {
        if !matches!(self.state, SessionState::Tier1Pending | SessionState::Tier2Pending | SessionState::Scaffolding) {
            return Err(SessionError::WrongState { state: self.state });
        }
        if text.trim().is_empty() {
            return Err(SessionError::EmptyAnswer);
        }
        let qid = self.open_id();
        let ruling = self.rule(env, text);
        self.say(Speaker::Student, TurnKind::Message, text.to_owned(), qid.clone());
        let mut reply = ruling.reply.clone();
        if ruling.classification == Classification::OnTopic && self.backend.kind == BackendKind::External {
            match backend {
                Some(BackendOutcome::Reply { text }) => {
                    let open: Vec<&ReferenceReason> = self.current_reference.iter().collect();
                    if reply_is_safe(text, env.program(), &open) {
                        reply = text.clone();
                    }
                }
                Some(BackendOutcome::Error { error }) => self.fall_back(error),
                None => {}
            }
        }
        let kind =
            if ruling.classification == Classification::OnTopic { TurnKind::Message } else { TurnKind::Redirect };
        self.say(Speaker::Agent, kind, reply.clone(), qid);
        Ok(Outcome::Reply { ruling, reply })
    }

    fn abort(&mut self, reason: &str) -> Result<Outcome, SessionError> {
        if self.state.is_terminal() {
            return Err(SessionError::WrongState { state: self.state });
        }
        self.state = SessionState::Aborted;
        self.abort_reason = Some(reason.to_owned());
        self.say(Speaker::System, TurnKind::Message, format!("Session aborted: {reason}."), None);
        Ok(Outcome::Aborted)
    }

    /// Fused report; only for finished sessions. Completed sessions average
    /// over the questions asked, aborted ones over the whole budget.
    pub fn report(&self) -> Result<AssessmentReport, SessionError> {
        if !self.state.is_terminal() {
            return Err(SessionError::SessionNotFinished);
        }
        let scores: Vec<u32> = self.slots.iter().filter_map(|s| s.score).collect();
        let divisor = match self.state {
            SessionState::Completed => self.slots.len(),
            _ => (self.question_budget as usize).max(self.slots.len()),
        };
        let f = functional_score(&self.functional);
        let d = dialogue_score(&scores, divisor);
        let (final_grade, flag) = fuse(f, d, &self.grading.weights);
        Ok(AssessmentReport {
            functional_score: f,
            dialogue_score: d,
            final_grade,
            unproductive_success: flag,
            per_kc: self.knowledge.mastery.clone(),
            misconceptions: self.knowledge.active_flags(),
            per_question: self.slots.clone(),
            functional: self.functional.clone(),
            mode: self.mode,
            state: self.state.name().to_owned(),
        })
    }
}
