//! The operations behind both the HTTP API and the CLI.

use std::collections::{BTreeMap, HashMap};
use std::path::PathBuf;
use std::sync::{Arc, Mutex, MutexGuard, RwLock};
use std::time::{Duration, SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use socratic_core::assessment::Mode;
use socratic_core::config::AssignmentConfig;
use socratic_core::dialogue::backend::{call_external_backend, DEFAULT_TIMEOUT};
use socratic_core::dialogue::{BackendDescriptor, BackendKind, Verdict};
use socratic_core::facts::Analysis;
use socratic_core::Kc;

use crate::error::ServiceError;
use crate::session::{
    BackendOutcome, Command, Env, GradingConfig, Outcome, Session, SessionState, StartParams, TranscriptEntry,
};
use crate::store::{LoggedEvent, Store};
use crate::submission::{self, restore, Assets, Submission};

pub type Clock = Arc<dyn Fn() -> u64 + Send + Sync>;

pub fn system_clock() -> Clock {
    Arc::new(|| SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs()))
}

pub const MAX_QUESTION_BUDGET: u32 = 50;

#[derive(Debug, Clone)]
pub struct ServiceConfig {
    pub data_dir: PathBuf,
    pub backend: BackendDescriptor,
    /// Bearer credential for the external backend. Kept in memory only.
    pub credential: Option<String>,
    pub backend_timeout: Duration,
    /// When set, summative sessions must present exactly this token.
    pub proctor_token: Option<String>,
    pub default_mode: Mode,
}

impl ServiceConfig {
    pub fn new(data_dir: impl Into<PathBuf>) -> ServiceConfig {
        ServiceConfig {
            data_dir: data_dir.into(),
            backend: BackendDescriptor::rule_based(),
            credential: None,
            backend_timeout: DEFAULT_TIMEOUT,
            proctor_token: None,
            default_mode: Mode::Formative,
        }
    }
}

struct Prepared {
    submission: Submission,
    analysis: Analysis,
    assets: Assets,
}

impl Prepared {
    fn env(&self) -> Env<'_> {
        Env { analysis: &self.analysis, catalog: &self.assets.catalog, guard: &self.assets.guard }
    }
}

struct Live {
    session: Session,
    prepared: Arc<Prepared>,
}

#[derive(Debug, Clone, Deserialize)]
pub struct StartRequest {
    pub submission_id: String,
    #[serde(default)]
    pub mode: Option<Mode>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub question_budget: Option<u32>,
    #[serde(default)]
    pub proctor_token: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TestSummary {
    pub name: String,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SubmissionView {
    pub submission_id: String,
    pub assignment_id: String,
    pub received_at: u64,
    pub tests: Vec<TestSummary>,
    pub knowledge_components: Vec<Kc>,
}

impl SubmissionView {
    fn of(s: &Submission) -> SubmissionView {
        SubmissionView {
            submission_id: s.submission_id.clone(),
            assignment_id: s.assignment_id.clone(),
            received_at: s.received_at,
            tests: s.functional.tests.iter().map(|t| TestSummary { name: t.name.clone(), passed: t.passed }).collect(),
            knowledge_components: s.facts.knowledge_components().into_iter().collect(),
        }
    }
}

/// The open question as a student sees it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuestionView {
    pub question_id: String,
    pub kc: Kc,
    pub stem: String,
    pub options: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Progress {
    pub answered: u32,
    pub budget: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionView {
    pub session_id: String,
    pub submission_id: String,
    pub mode: Mode,
    pub state: SessionState,
    pub current_question: Option<QuestionView>,
    pub attempts_used: u32,
    pub asked: Vec<String>,
    pub transcript: Vec<TranscriptEntry>,
    pub progress: Progress,
    pub backend: BackendKind,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub deadline: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub abort_reason: Option<String>,
}

impl SessionView {
    pub fn of(s: &Session) -> SessionView {
        SessionView {
            session_id: s.session_id.clone(),
            submission_id: s.submission_id.clone(),
            mode: s.mode,
            state: s.state,
            current_question: s.current_question.as_ref().map(|q| QuestionView {
                question_id: q.question_id.clone(),
                kc: q.kc,
                stem: q.stem.clone(),
                options: q.options.iter().map(|o| o.text.clone()).collect(),
            }),
            attempts_used: s.attempts_used,
            asked: s.asked.clone(),
            transcript: s.transcript.clone(),
            progress: Progress {
                answered: s.slots.iter().filter(|x| x.score.is_some()).count() as u32,
                budget: s.question_budget,
            },
            backend: s.backend.kind,
            deadline: (s.mode == Mode::Summative).then(|| s.started_at + s.grading.time_limit_secs),
            abort_reason: s.abort_reason.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TurnResponse {
    #[serde(flatten)]
    pub outcome: Outcome,
    pub session: SessionView,
}

/// A student action on an open session.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Action {
    Tier1 { question_id: String, choice_index: usize },
    Tier2 { text: String },
    Message { text: String },
    Abort { reason: String },
}

pub struct Service {
    store: Store,
    cfg: ServiceConfig,
    clock: Clock,
    assignments: RwLock<BTreeMap<String, AssignmentConfig>>,
    submissions: Mutex<HashMap<String, Arc<Prepared>>>,
    sessions: Mutex<HashMap<String, Arc<Mutex<Live>>>>,
}

fn lock<T>(m: &Mutex<T>) -> MutexGuard<'_, T> {
    m.lock().unwrap_or_else(|p| p.into_inner())
}

impl Service {
    pub fn open(cfg: ServiceConfig) -> Result<Service, ServiceError> {
        Service::with_clock(cfg, system_clock())
    }

    pub fn with_clock(cfg: ServiceConfig, clock: Clock) -> Result<Service, ServiceError> {
        let store = Store::open(&cfg.data_dir)?;
        let assignments = store.assignments()?.into_iter().map(|a| (a.assignment_id.clone(), a)).collect();
        Ok(Service {
            store,
            cfg,
            clock,
            assignments: RwLock::new(assignments),
            submissions: Mutex::new(HashMap::new()),
            sessions: Mutex::new(HashMap::new()),
        })
    }

    pub fn store(&self) -> &Store {
        &self.store
    }

    pub fn now(&self) -> u64 {
        (self.clock)()
    }

    pub fn add_assignment(&self, c: AssignmentConfig) -> Result<(), ServiceError> {
        c.validate().map_err(|e| ServiceError::Validation(e.to_string()))?;
        Assets::for_config(&c)?;
        self.store.save_assignment(&c)?;
        self.assignments.write().unwrap_or_else(|p| p.into_inner()).insert(c.assignment_id.clone(), c);
        Ok(())
    }

    pub fn assignments(&self) -> Vec<AssignmentConfig> {
        self.assignments.read().unwrap_or_else(|p| p.into_inner()).values().cloned().collect()
    }

    pub fn submit(&self, assignment_id: &str, source: &str) -> Result<SubmissionView, ServiceError> {
        let config = self
            .assignments
            .read()
            .unwrap_or_else(|p| p.into_inner())
            .get(assignment_id)
            .cloned()
            .ok_or_else(|| ServiceError::UnknownAssignment(assignment_id.to_owned()))?;
        let id = submission::submission_id(assignment_id, source);
        if let Ok(p) = self.prepared(&id) {
            return Ok(SubmissionView::of(&p.submission));
        }
        let (sub, analysis) = submission::create(&config, source, self.now())?;
        let assets = Assets::for_config(&sub.config)?;
        self.store.save_submission(&sub)?;
        let view = SubmissionView::of(&sub);
        lock(&self.submissions).insert(id, Arc::new(Prepared { submission: sub, analysis, assets }));
        Ok(view)
    }

    fn prepared(&self, id: &str) -> Result<Arc<Prepared>, ServiceError> {
        let mut map = lock(&self.submissions);
        if let Some(p) = map.get(id) {
            return Ok(p.clone());
        }
        let sub = self.store.load_submission(id)?.ok_or_else(|| ServiceError::UnknownSubmission(id.to_owned()))?;
        let p = Arc::new(prepare(sub)?);
        map.insert(id.to_owned(), p.clone());
        Ok(p)
    }

    fn live(&self, id: &str) -> Result<Arc<Mutex<Live>>, ServiceError> {
        let mut map = lock(&self.sessions);
        if let Some(l) = map.get(id) {
            return Ok(l.clone());
        }
        let (session, sub) = self.store.load_session(id)?.ok_or_else(|| ServiceError::UnknownSession(id.to_owned()))?;
        let prepared = match self.prepared(&sub.submission_id) {
            Ok(p) => p,
            Err(ServiceError::UnknownSubmission(_)) => Arc::new(prepare(sub)?),
            Err(e) => return Err(e),
        };
        let l = Arc::new(Mutex::new(Live { session, prepared }));
        map.insert(id.to_owned(), l.clone());
        Ok(l)
    }

    pub fn start(&self, req: StartRequest) -> Result<SessionView, ServiceError> {
        let prepared = self.prepared(&req.submission_id)?;
        let mode = req.mode.unwrap_or(self.cfg.default_mode);
        if mode == Mode::Summative {
            let token = req.proctor_token.as_deref().unwrap_or("");
            if token.trim().is_empty() {
                return Err(ServiceError::ProctorTokenRequired);
            }
            if self.cfg.proctor_token.as_deref().is_some_and(|t| t != token) {
                return Err(ServiceError::ProctorTokenRejected);
            }
        }
        let config = &prepared.submission.config;
        let budget = req.question_budget.unwrap_or(config.question_budget);
        if !(1..=MAX_QUESTION_BUDGET).contains(&budget) {
            return Err(ServiceError::Validation(format!(
                "question_budget must be between 1 and {MAX_QUESTION_BUDGET}"
            )));
        }
        let mut backend = self.cfg.backend.clone();
        backend.prompt_templates = prepared.assets.prompts.clone();
        let params = StartParams {
            session_id: uuid::Uuid::new_v4().to_string(),
            submission_id: req.submission_id.clone(),
            mode,
            seed: req.seed,
            question_budget: budget,
            started_at: self.now(),
            backend,
            grading: GradingConfig::from_assignment(config),
        };
        let session = Session::start(&prepared.env(), params.clone(), prepared.submission.functional.clone())?;
        let first = LoggedEvent { seq: 0, event: Command::Start(params), verdict: None, state_after: session.state };
        self.store.create_session(&session, &prepared.submission, &first)?;
        let view = SessionView::of(&session);
        lock(&self.sessions).insert(session.session_id.clone(), Arc::new(Mutex::new(Live { session, prepared })));
        Ok(view)
    }

    pub fn view(&self, id: &str) -> Result<SessionView, ServiceError> {
        let live = self.live(id)?;
        let mut g = lock(&live);
        self.enforce_deadline(&mut g)?;
        Ok(SessionView::of(&g.session))
    }

    /// Applies a command to a copy, persists it, then publishes the copy.
    fn commit(&self, live: &mut Live, cmd: Command) -> Result<Outcome, ServiceError> {
        let mut next = live.session.clone();
        let seq = next.revision;
        let outcome = next.apply(&live.prepared.env(), &cmd)?;
        let verdict: Option<Verdict> = match &outcome {
            Outcome::Verdict { verdict, .. } => Some(verdict.clone()),
            _ => None,
        };
        let event = LoggedEvent { seq, event: cmd, verdict, state_after: next.state };
        self.store.record(&next, &event)?;
        live.session = next;
        Ok(outcome)
    }

    /// Aborts a summative session whose time has run out.
    fn enforce_deadline(&self, live: &mut Live) -> Result<(), ServiceError> {
        if live.session.expired(self.now()) {
            self.commit(live, Command::Abort { reason: "time limit reached".into() })?;
        }
        Ok(())
    }

    pub fn act(&self, id: &str, action: Action) -> Result<TurnResponse, ServiceError> {
        let live = self.live(id)?;
        let (request, revision) = {
            let mut g = lock(&live);
            self.enforce_deadline(&mut g)?;
            let env = g.prepared.env();
            let prompt = match &action {
                Action::Tier2 { text } => g.session.external_prompt(&env, text, true),
                Action::Message { text } => g.session.external_prompt(&env, text, false),
                _ => None,
            };
            (prompt.map(|p| (p, g.session.backend.clone())), g.session.revision)
        };
        // The backend call can take seconds, so it runs without the lock.
        let backend = request.map(|(prompt, desc)| {
            match call_external_backend(&desc, &prompt, self.cfg.credential.as_deref(), self.cfg.backend_timeout) {
                Ok(text) => BackendOutcome::Reply { text },
                Err(error) => BackendOutcome::Error { error },
            }
        });
        let mut g = lock(&live);
        if backend.is_some() && g.session.revision != revision {
            return Err(ServiceError::Conflict);
        }
        self.enforce_deadline(&mut g)?;
        let cmd = match action {
            Action::Tier1 { question_id, choice_index } => Command::Tier1 { question_id, choice_index },
            Action::Tier2 { text } => Command::Tier2 { text, backend },
            Action::Message { text } => Command::Message { text, backend },
            Action::Abort { reason } => Command::Abort { reason },
        };
        let outcome = self.commit(&mut g, cmd)?;
        Ok(TurnResponse { outcome, session: SessionView::of(&g.session) })
    }

    /// Report as canonical JSON bytes.
    pub fn report(&self, id: &str) -> Result<String, ServiceError> {
        let live = self.live(id)?;
        let mut g = lock(&live);
        self.enforce_deadline(&mut g)?;
        let report = g.session.report()?;
        Ok(serde_json::to_string_pretty(&report)?)
    }

    /// Full internal session state, for tests and tooling.
    pub fn snapshot(&self, id: &str) -> Result<Session, ServiceError> {
        let live = self.live(id)?;
        let g = lock(&live);
        Ok(g.session.clone())
    }
}

fn prepare(submission: Submission) -> Result<Prepared, ServiceError> {
    let analysis = restore(&submission)?;
    let assets = Assets::for_config(&submission.config)?;
    Ok(Prepared { submission, analysis, assets })
}
