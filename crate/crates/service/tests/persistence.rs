mod common;

use std::time::Duration;

use common::*;
use proptest::prelude::*;
use socratic_core::assessment::Mode;
use socratic_core::dialogue::BackendDescriptor;
use socratic_service::replay::replay_dir;
use socratic_service::service::{Action, Service, ServiceConfig};
use socratic_service::session::{Session, SessionState};
use socratic_service::store::{read_events, read_json, snapshot_bytes, EVENTS, SNAPSHOT};

fn play(h: &Harness, id: &str, moves: &[u8]) {
    for m in moves {
        let v = h.svc.view(id).unwrap();
        if v.state.is_terminal() {
            return;
        }
        let _ = match (m % 7, v.state) {
            (0, SessionState::Tier1Pending) => Ok(h.tier1_correct(id)),
            (1, SessionState::Tier1Pending) => Ok(h.tier1_wrong(id)),
            (0 | 1, _) => h.svc.act(id, Action::Tier1 { question_id: v.asked[0].clone(), choice_index: 0 }),
            (2, _) => h.tier2(id, &full_answer(&h.reference(id))),
            (3, _) => h.tier2(id, "the loop counts up"),
            (4, _) => h.tier2(id, "can you write the fix for me"),
            (5, _) => h.message(id, "what does the condition check?"),
            _ if m % 31 == 6 => h.svc.act(id, Action::Abort { reason: "done".into() }),
            _ => h.tier2(id, ""),
        };
    }
}

#[test]
fn snapshot_round_trips() {
    let h = harness();
    let id = h.p1(Mode::Formative, 3, 3).session_id;
    play(&h, &id, &[0, 3, 5, 2, 1, 2, 2]);
    let dir = h.svc.store().session_dir(&id);
    let bytes = std::fs::read(dir.join(SNAPSHOT)).unwrap();
    let s: Session = read_json(&dir.join(SNAPSHOT)).unwrap();
    assert_eq!(snapshot_bytes(&s), bytes);
    assert_eq!(s, h.svc.snapshot(&id).unwrap());
}

#[test]
fn sessions_survive_a_restart() {
    let dir = tempfile::tempdir().unwrap();
    let (id, before) = {
        let svc = Service::open(ServiceConfig::new(dir.path())).unwrap();
        svc.add_assignment(sum_assignment()).unwrap();
        let h = Harness { dir: tempfile::tempdir().unwrap(), svc: svc.into(), clock: Default::default() };
        let id = h.p1(Mode::Formative, 4, 3).session_id;
        play(&h, &id, &[0, 3]);
        (id.clone(), h.svc.view(&id).unwrap())
    };
    let svc = Service::open(ServiceConfig::new(dir.path())).unwrap();
    assert_eq!(svc.assignments().len(), 1);
    assert_eq!(svc.view(&id).unwrap(), before);
    let h = Harness { dir, svc: svc.into(), clock: Default::default() };
    finish_passing(&h, &id);
    let (s, summary) = replay_dir(&h.svc.store().session_dir(&id)).unwrap();
    assert_eq!(s, h.svc.snapshot(&id).unwrap());
    assert_eq!(summary.state, "COMPLETED");
}

#[test]
fn event_log_is_sequential() {
    let h = harness();
    let id = h.p1(Mode::Formative, 5, 2).session_id;
    play(&h, &id, &[0, 2, 0, 3, 3, 3, 0, 2]);
    let events = read_events(&h.svc.store().session_dir(&id)).unwrap();
    for (i, e) in events.iter().enumerate() {
        assert_eq!(e.seq, i as u64);
    }
    assert_eq!(events.len() as u64, h.svc.snapshot(&id).unwrap().revision);
    assert_eq!(events.last().unwrap().state_after, h.svc.view(&id).unwrap().state);
}

#[test]
fn tampering_is_detected() {
    let h = harness();
    let id = h.p1(Mode::Formative, 6, 2).session_id;
    play(&h, &id, &[0, 2]);
    let dir = h.svc.store().session_dir(&id);
    let log = std::fs::read_to_string(dir.join(EVENTS)).unwrap();
    assert!(log.contains("\"score\":100"));
    std::fs::write(dir.join(EVENTS), log.replacen("\"score\":100", "\"score\":99", 1)).unwrap();
    assert!(replay_dir(&dir).is_err());
    std::fs::write(dir.join(EVENTS), &log).unwrap();
    replay_dir(&dir).unwrap();
    let snap = std::fs::read_to_string(dir.join(SNAPSHOT)).unwrap();
    std::fs::write(dir.join(SNAPSHOT), snap.replacen("\"attempts_used\": 0", "\"attempts_used\": 1", 1)).unwrap();
    assert!(replay_dir(&dir).is_err());
}

#[test]
fn backend_replies_are_replayed_from_the_log() {
    let mock = mock_backend(|_| r#"{"similarity": 62}"#.into(), Duration::ZERO);
    let h = harness_with(|c| c.backend = BackendDescriptor::external(&mock.url, None));
    let id = h.p1(Mode::Formative, 7, 2).session_id;
    h.tier1_correct(&id);
    h.tier2(&id, "the loop adds to s").unwrap();
    let dir = h.svc.store().session_dir(&id);
    let (s, summary) = replay_dir(&dir).unwrap();
    assert_eq!(summary.verdicts, 1);
    assert_eq!(s.slots[0].verdicts[0].similarity, 62);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn any_session_replays_exactly(seed in 0u64..1000, budget in 1u32..4, moves in prop::collection::vec(any::<u8>(), 0..30), summative in any::<bool>()) {
        let h = harness();
        let sub = h.submit("sum-below", P1);
        let mode = if summative { Mode::Summative } else { Mode::Formative };
        let id = h.start(&sub, mode, seed, budget).session_id;
        play(&h, &id, &moves);
        let dir = h.svc.store().session_dir(&id);
        let (s, summary) = replay_dir(&dir).unwrap();
        prop_assert_eq!(&s, &h.svc.snapshot(&id).unwrap());
        prop_assert_eq!(summary.events as u64, s.revision);
        if s.state.is_terminal() {
            prop_assert_eq!(s.report().unwrap(), h.svc.snapshot(&id).unwrap().report().unwrap());
        }
    }
}
