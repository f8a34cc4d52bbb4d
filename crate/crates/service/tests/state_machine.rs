//! Every action sequence up to a fixed depth, applied to the pure engine,
//! checked against the transition table and the session invariants.

mod common;

use common::*;
use socratic_core::assessment::Mode;
use socratic_core::dialogue::{Action as Step, BackendDescriptor, TurnKind};
use socratic_core::facts::Analysis;
use socratic_service::session::{Command, Env, GradingConfig, Outcome, Session, SessionState, StartParams};
use socratic_service::submission::{analyze_source, Assets};

#[derive(Debug, Clone, Copy)]
enum Move {
    PickRight,
    PickWrong,
    PickStale,
    Explain,
    ExplainPartly,
    Vague,
    AskForCode,
    Chat,
    Abort,
}

const MOVES: [Move; 9] = [
    Move::PickRight,
    Move::PickWrong,
    Move::PickStale,
    Move::Explain,
    Move::ExplainPartly,
    Move::Vague,
    Move::AskForCode,
    Move::Chat,
    Move::Abort,
];

fn command(s: &Session, m: Move) -> Command {
    let open = s.current_question.as_ref();
    let qid = open.map(|q| q.question_id.clone()).unwrap_or_else(|| "NONE/x/y/static".into());
    let right = open.map_or(0, |q| q.correct_index);
    let text = |t: &str| Command::Tier2 { text: t.into(), backend: None };
    match m {
        Move::PickRight => Command::Tier1 { question_id: qid, choice_index: right },
        Move::PickWrong => Command::Tier1 { question_id: qid, choice_index: (right + 1) % 4 },
        Move::PickStale => Command::Tier1 { question_id: s.asked[0].clone(), choice_index: 0 },
        Move::Explain => text(&s.current_reference.as_ref().map(full_answer).unwrap_or_else(|| "the loop".into())),
        Move::ExplainPartly => {
            text(&s.current_reference.as_ref().map(|r| partial_answer(r, &[0])).unwrap_or_else(|| "the loop".into()))
        }
        Move::Vague => text("the loop does its thing"),
        Move::AskForCode => text("just give me the answer"),
        Move::Chat => Command::Message { text: "why does the loop stop?".into(), backend: None },
        Move::Abort => Command::Abort { reason: "test".into() },
    }
}

fn allowed(from: SessionState, to: SessionState) -> bool {
    use SessionState::*;
    from == to
        || matches!(
            (from, to),
            (Tier1Pending, Tier2Pending)
                | (Tier2Pending | Scaffolding, Tier1Pending | Scaffolding | Completed)
                | (Tier1Pending | Tier2Pending | Scaffolding, Aborted)
        )
}

fn invariants(s: &Session, budget: u32, max_attempts: u32) {
    if !s.state.is_terminal() {
        assert!(s.attempts_used < max_attempts);
    }
    assert!(s.slots.len() as u32 <= budget);
    for (i, e) in s.transcript.iter().enumerate() {
        assert_eq!(e.seq, i as u64);
    }
    let open = s.slots.iter().filter(|x| x.score.is_none()).count();
    assert!(open <= 1);
    if let Some(i) = s.slots.iter().position(|x| x.score.is_none()) {
        assert_eq!(i + 1, s.slots.len());
    }
    match s.state {
        SessionState::Tier1Pending => {
            assert!(s.current_question.is_some() && s.current_reference.is_some() && s.tier1.is_none());
            assert_eq!(open, 1);
        }
        SessionState::Tier2Pending | SessionState::Scaffolding => {
            assert!(s.current_question.is_some() && s.tier1.is_some());
        }
        SessionState::Completed => {
            assert!(s.current_question.is_none());
            assert_eq!(open, 0);
        }
        SessionState::Aborted => assert!(s.abort_reason.is_some()),
        SessionState::Created | SessionState::Analyzed => panic!("start left the session in {:?}", s.state),
    }
    assert_eq!(s.report().is_ok(), s.state.is_terminal());
    if s.mode == Mode::Summative {
        assert!(s.transcript.iter().all(|t| t.kind != TurnKind::Hint));
    }
    let chosen: usize = s.slots.iter().map(|x| x.chosen_tags.len()).sum();
    let correct: usize = s.slots.iter().map(|x| x.tier1_correct.len()).sum();
    assert_eq!(chosen, correct);
}

struct World {
    analysis: Analysis,
    assets: Assets,
    functional: socratic_core::assessment::FunctionalResult,
    grading: GradingConfig,
}

fn world(src: &str) -> World {
    let cfg = sum_assignment();
    let (analysis, functional) = analyze_source(&cfg, src).unwrap();
    World {
        analysis,
        assets: Assets::for_config(&cfg).unwrap(),
        functional,
        grading: GradingConfig::from_assignment(&cfg),
    }
}

fn explore(env: &Env<'_>, s: &Session, depth: u32, budget: u32, count: &mut u64) {
    if depth == 0 {
        return;
    }
    for m in MOVES {
        let cmd = command(s, m);
        let mut next = s.clone();
        *count += 1;
        match next.apply(env, &cmd) {
            Ok(out) => {
                assert!(!s.state.is_terminal(), "terminal state accepted {m:?}");
                assert_eq!(next.revision, s.revision + 1);
                assert!(allowed(s.state, next.state), "{:?} -> {:?} on {m:?}", s.state, next.state);
                if let Outcome::Verdict { verdict, .. } = &out {
                    assert!(matches!(cmd, Command::Tier2 { .. }));
                    let closed = matches!(verdict.action, Step::Pass | Step::Fail);
                    if closed {
                        assert!(next.slots[s.slots.len() - 1].score.is_some());
                    } else {
                        assert_eq!(next.attempts_used, s.attempts_used + 1);
                    }
                    if s.attempts_used + 1 >= env_max(s) && verdict.action != Step::Pass {
                        assert_eq!(verdict.action, Step::Fail);
                    }
                    use SessionState::*;
                    let ok = match verdict.action {
                        Step::HintBroad | Step::HintFocused => next.state == Scaffolding,
                        Step::FollowUp => matches!(next.state, Tier1Pending | Scaffolding),
                        Step::Pass | Step::Fail => matches!(next.state, Tier1Pending | Completed),
                    };
                    assert!(ok, "{:?} after {:?}", next.state, verdict.action);
                    if !s.tier1.as_ref().unwrap().correct {
                        assert_ne!(verdict.action, Step::Pass);
                        assert_eq!(verdict.score, 0);
                    }
                }
                if let Outcome::Redirect { .. } = out {
                    assert_eq!(next.state, s.state);
                    assert_eq!(next.attempts_used, s.attempts_used);
                }
                invariants(&next, budget, env_max(s));
                explore(env, &next, depth - 1, budget, count);
            }
            Err(_) => assert_eq!(&next, s, "failed {m:?} changed the session"),
        }
    }
}

fn env_max(s: &Session) -> u32 {
    s.grading.thresholds.max_attempts
}

fn run(mode: Mode, budget: u32, depth: u32) -> u64 {
    let w = world(P1);
    let env = Env { analysis: &w.analysis, catalog: &w.assets.catalog, guard: &w.assets.guard };
    let params = StartParams {
        session_id: "s".into(),
        submission_id: "sub".into(),
        mode,
        seed: 9,
        question_budget: budget,
        started_at: 0,
        backend: BackendDescriptor::rule_based(),
        grading: w.grading.clone(),
    };
    let s = Session::start(&env, params, w.functional.clone()).unwrap();
    invariants(&s, budget, env_max(&s));
    let mut count = 0;
    explore(&env, &s, depth, budget, &mut count);
    count
}

#[test]
fn formative_small_scope() {
    assert!(run(Mode::Formative, 2, 6) > 20_000);
}

#[test]
fn summative_small_scope() {
    assert!(run(Mode::Summative, 2, 6) > 15_000);
}

#[test]
fn single_question_deeper() {
    assert!(run(Mode::Formative, 1, 7) > 80_000);
}
