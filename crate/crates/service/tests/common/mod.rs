#![allow(dead_code)]

use std::io::{BufRead, BufReader, Read, Write};
use std::net::TcpListener;
use std::sync::atomic::{AtomicU64, AtomicUsize, Ordering};
use std::sync::Arc;
use std::time::Duration;

use minilang::Value;
use num_rational::Ratio;
use socratic_core::assessment::Mode;
use socratic_core::config::{AssignmentConfig, FunctionalTest};
use socratic_core::questions::ReferenceReason;
use socratic_service::error::ServiceError;
use socratic_service::service::{Action, Service, ServiceConfig, SessionView, StartRequest, TurnResponse};
use tempfile::TempDir;

pub const P1: &str =
    "int main(int n){ int s = 0; for (int i = 0; i < n; i = i + 1) { s = s + i; } print(s); return 0; }";
pub const P2: &str = "int main(){ int i = 0; while (i < 5) { print(i); } return 0; }";
pub const P3: &str = "int main(){ int[4] a; int j = 0; while (j <= 4) { a[j] = j; j = j + 1; } return 0; }";

pub fn test(name: &str, inputs: &[(&str, i64)], expected: &str) -> FunctionalTest {
    FunctionalTest {
        name: name.into(),
        inputs: inputs.iter().map(|(k, v)| (k.to_string(), Value::Int(*v))).collect(),
        expected_output: expected.into(),
    }
}

/// Triangular numbers: sum of 0..n.
pub fn sum_assignment() -> AssignmentConfig {
    let mut c = AssignmentConfig::new(
        "sum-below",
        vec![test("four", &[("n", 4)], "6"), test("zero", &[("n", 0)], "0"), test("five", &[("n", 5)], "10")],
    );
    c.title = "Sum of the numbers below n".into();
    c
}

pub fn print_assignment() -> AssignmentConfig {
    AssignmentConfig::new("print-five", vec![test("digits", &[], "0\n1\n2\n3\n4")])
}

pub fn fill_assignment() -> AssignmentConfig {
    AssignmentConfig::new("fill", vec![test("runs", &[], "")])
}

pub struct Harness {
    pub dir: TempDir,
    pub svc: Arc<Service>,
    pub clock: Arc<AtomicU64>,
}

pub const T0: u64 = 1_700_000_000;

pub fn harness_with(f: impl FnOnce(&mut ServiceConfig)) -> Harness {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = ServiceConfig::new(dir.path());
    f(&mut cfg);
    let clock = Arc::new(AtomicU64::new(T0));
    let c = clock.clone();
    let svc = Arc::new(Service::with_clock(cfg, Arc::new(move || c.load(Ordering::SeqCst))).unwrap());
    for a in [sum_assignment(), print_assignment(), fill_assignment()] {
        svc.add_assignment(a).unwrap();
    }
    Harness { dir, svc, clock }
}

pub fn harness() -> Harness {
    harness_with(|_| {})
}

impl Harness {
    pub fn submit(&self, assignment: &str, src: &str) -> String {
        self.svc.submit(assignment, src).unwrap().submission_id
    }

    pub fn start(&self, sub: &str, mode: Mode, seed: u64, budget: u32) -> SessionView {
        self.svc
            .start(StartRequest {
                submission_id: sub.into(),
                mode: Some(mode),
                seed,
                question_budget: Some(budget),
                proctor_token: (mode == Mode::Summative).then(|| "proctor".to_owned()),
            })
            .unwrap()
    }

    pub fn p1(&self, mode: Mode, seed: u64, budget: u32) -> SessionView {
        let sub = self.submit("sum-below", P1);
        self.start(&sub, mode, seed, budget)
    }

    pub fn reference(&self, id: &str) -> ReferenceReason {
        self.svc.snapshot(id).unwrap().current_reference.unwrap()
    }

    pub fn correct_index(&self, id: &str) -> usize {
        self.svc.snapshot(id).unwrap().current_question.unwrap().correct_index
    }

    pub fn qid(&self, id: &str) -> String {
        self.svc.view(id).unwrap().current_question.unwrap().question_id
    }

    pub fn tier1(&self, id: &str, choice: usize) -> Result<TurnResponse, ServiceError> {
        self.svc.act(id, Action::Tier1 { question_id: self.qid(id), choice_index: choice })
    }

    pub fn tier1_correct(&self, id: &str) -> TurnResponse {
        self.tier1(id, self.correct_index(id)).unwrap()
    }

    pub fn tier1_wrong(&self, id: &str) -> TurnResponse {
        self.tier1(id, (self.correct_index(id) + 1) % 4).unwrap()
    }

    pub fn tier2(&self, id: &str, text: &str) -> Result<TurnResponse, ServiceError> {
        self.svc.act(id, Action::Tier2 { text: text.into() })
    }

    pub fn message(&self, id: &str, text: &str) -> Result<TurnResponse, ServiceError> {
        self.svc.act(id, Action::Message { text: text.into() })
    }
}

/// An explanation naming every atom of the reference.
pub fn full_answer(r: &ReferenceReason) -> String {
    let parts: Vec<&str> = r.atoms.iter().map(|a| a.text_form.as_str()).collect();
    format!("Because {}.", parts.join(" and "))
}

/// Explanation naming only the atoms at `picks`.
pub fn partial_answer(r: &ReferenceReason, picks: &[usize]) -> String {
    let parts: Vec<&str> = picks.iter().map(|&i| r.atoms[i].text_form.as_str()).collect();
    format!("I think it is about the loop: {}.", parts.join(" and "))
}

/// round(100 * sum of weights), computed with exact fractions.
pub fn expected_similarity(r: &ReferenceReason, picks: &[usize]) -> u32 {
    let w: Ratio<i64> = picks.iter().map(|&i| r.atoms[i].weight).sum();
    let pct = w * 100;
    let floor = pct.floor().to_integer();
    let up = (pct - Ratio::from_integer(floor)) * 2 >= Ratio::from_integer(1);
    (floor + i64::from(up)) as u32
}

/// Drives a session to its end with full answers.
pub fn finish_passing(h: &Harness, id: &str) {
    for _ in 0..200 {
        let v = h.svc.view(id).unwrap();
        match v.state {
            socratic_service::session::SessionState::Tier1Pending => {
                h.tier1_correct(id);
            }
            socratic_service::session::SessionState::Tier2Pending
            | socratic_service::session::SessionState::Scaffolding => {
                let r = h.reference(id);
                h.tier2(id, &full_answer(&r)).unwrap();
            }
            _ => return,
        }
    }
    panic!("session {id} did not finish");
}

/// Minimal HTTP endpoint answering every POST with `{"text": reply}`, or
/// stalling for `delay` first.
pub struct MockBackend {
    pub url: String,
    pub hits: Arc<AtomicUsize>,
}

pub fn mock_backend(reply: impl Fn(&str) -> String + Send + Sync + 'static, delay: Duration) -> MockBackend {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let url = format!("http://{}/generate", listener.local_addr().unwrap());
    let hits = Arc::new(AtomicUsize::new(0));
    let h = hits.clone();
    let reply = Arc::new(reply);
    std::thread::spawn(move || {
        for stream in listener.incoming() {
            let Ok(mut stream) = stream else { continue };
            let h = h.clone();
            let reply = reply.clone();
            std::thread::spawn(move || {
                h.fetch_add(1, Ordering::SeqCst);
                let mut reader = BufReader::new(stream.try_clone().unwrap());
                let mut len = 0usize;
                loop {
                    let mut line = String::new();
                    if reader.read_line(&mut line).unwrap_or(0) == 0 {
                        return;
                    }
                    let l = line.to_ascii_lowercase();
                    if let Some(v) = l.strip_prefix("content-length:") {
                        len = v.trim().parse().unwrap_or(0);
                    }
                    if line == "\r\n" {
                        break;
                    }
                }
                let mut body = vec![0u8; len];
                reader.read_exact(&mut body).ok();
                std::thread::sleep(delay);
                let text = reply(&String::from_utf8_lossy(&body));
                let out = serde_json::json!({ "text": text }).to_string();
                let resp = format!(
                    "HTTP/1.1 200 OK\r\ncontent-type: application/json\r\ncontent-length: {}\r\nconnection: close\r\n\r\n{out}",
                    out.len()
                );
                stream.write_all(resp.as_bytes()).ok();
            });
        }
    });
    MockBackend { url, hits }
}

/// An address nothing listens on.
pub fn unreachable_url() -> String {
    let l = TcpListener::bind("127.0.0.1:0").unwrap();
    let addr = l.local_addr().unwrap();
    drop(l);
    format!("http://{addr}/generate")
}
