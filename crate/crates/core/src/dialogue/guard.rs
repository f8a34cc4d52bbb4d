//! Guardrails over free-text turns: solution requests and off-topic chat
//! are redirected to the open question with fixed replies that never
//! carry code or answer values.

use std::collections::BTreeSet;
use std::path::Path;

use minilang::Program;
use serde::{Deserialize, Serialize};

use crate::kc::Kc;
use crate::questions::{fill, AtomKind, Question, ReferenceReason};
use crate::text::{normalized, tokens};

const BUILTIN: &str = include_str!("../../config/guardrails.json");

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GuardConfig {
    /// Case-insensitive phrases that mark a request for the solution.
    pub solution_phrases: Vec<String>,
    /// Words ignored when measuring overlap with the session vocabulary.
    pub stopwords: Vec<String>,
    /// Programming terms that always count as on topic.
    pub domain_vocabulary: Vec<String>,
}

impl GuardConfig {
    pub fn builtin() -> GuardConfig {
        serde_json::from_str(BUILTIN).expect("built-in guardrail config is valid")
    }

    pub fn load(path: &Path) -> Result<GuardConfig, std::io::Error> {
        let text = std::fs::read_to_string(path)?;
        serde_json::from_str(&text).map_err(std::io::Error::other)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Classification {
    OnTopic,
    SolutionRequest,
    OffTopic,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GuardrailRuling {
    pub classification: Classification,
    pub reply_template_id: String,
    /// Question the student is steered back to.
    pub redirect_target: Option<String>,
    pub reply: String,
}

/// Fixed replies. They hold no digits, braces or semicolons, so they can
/// never spell out a value or a statement.
pub const REPLIES: [(&str, &str); 3] = [
    (
        "redirect-solution",
        "I can't write or fix the code for you. Let's reason it out instead: think about {topic}, then explain the current question in your own words.",
    ),
    (
        "redirect-off-topic",
        "Let's stay with your program. Look back at the current question and think about {topic}.",
    ),
    (
        "nudge-on-topic",
        "Good thought. Connect it to the current question: think about {topic} and say what you expect to happen.",
    ),
];

pub fn reply_text(template_id: &str, kc: Option<Kc>) -> String {
    let pattern = REPLIES.iter().find(|(id, _)| *id == template_id).map(|(_, p)| *p).expect("known reply template");
    let topic = kc.map_or("what the program does step by step", Kc::topic);
    fill(pattern, &[("topic", topic.to_owned())])
}

/// Program identifiers, tokens of the open question's stem and the
/// configured programming terms, minus stopwords.
pub fn session_vocabulary(program: &Program, question: Option<&Question>, cfg: &GuardConfig) -> BTreeSet<String> {
    let mut v: BTreeSet<String> = program.identifiers().iter().map(|s| s.to_lowercase()).collect();
    if let Some(q) = question {
        v.extend(tokens(&q.stem));
    }
    v.extend(cfg.domain_vocabulary.iter().map(|w| w.to_lowercase()));
    for s in &cfg.stopwords {
        v.remove(&s.to_lowercase());
    }
    v
}

fn is_solution_request(text: &str, cfg: &GuardConfig) -> bool {
    let padded = format!(" {} ", normalized(text));
    cfg.solution_phrases.iter().any(|p| padded.contains(&format!(" {} ", normalized(p))))
}

/// Classifies one student turn and picks its reply.
pub fn guard_turn(
    text: &str,
    vocabulary: &BTreeSet<String>,
    cfg: &GuardConfig,
    current: Option<&Question>,
) -> GuardrailRuling {
    let stop: BTreeSet<String> = cfg.stopwords.iter().map(|s| s.to_lowercase()).collect();
    let classification = if is_solution_request(text, cfg) {
        Classification::SolutionRequest
    } else if tokens(text).iter().any(|t| !stop.contains(t) && vocabulary.contains(t)) {
        Classification::OnTopic
    } else {
        Classification::OffTopic
    };
    let template = match classification {
        Classification::SolutionRequest => "redirect-solution",
        Classification::OffTopic => "redirect-off-topic",
        Classification::OnTopic => "nudge-on-topic",
    };
    GuardrailRuling {
        classification,
        reply_template_id: template.to_owned(),
        redirect_target: current.map(|q| q.question_id.clone()),
        reply: reply_text(template, current.map(|q| q.kc)),
    }
}

/// Conservative leak check for any agent reply: no statement punctuation,
/// no line of the submission and no numeric atom of an open question.
pub fn reply_is_safe(reply: &str, program: &Program, open: &[&ReferenceReason]) -> bool {
    if reply.contains([';', '{', '}']) {
        return false;
    }
    if program.source_lines.iter().map(|l| l.trim()).any(|l| !l.is_empty() && reply.contains(l)) {
        return false;
    }
    let toks = tokens(reply);
    !open
        .iter()
        .flat_map(|r| r.atoms.iter())
        .filter(|a| a.kind == AtomKind::Numeric)
        .any(|a| toks.contains(&a.text_form))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::text::has_digit;

    const P1: &str =
        "int main(int n){ int s = 0; for (int i = 0; i < n; i = i + 1) { s = s + i; } print(s); return 0; }";

    fn vocab() -> BTreeSet<String> {
        session_vocabulary(&minilang::parse(P1).unwrap(), None, &GuardConfig::builtin())
    }

    #[test]
    fn solution_request() {
        let r = guard_turn("just give me the code please", &vocab(), &GuardConfig::builtin(), None);
        assert_eq!(r.classification, Classification::SolutionRequest);
        assert_eq!(r.reply_template_id, "redirect-solution");
    }

    #[test]
    fn off_topic() {
        let r = guard_turn("what's the weather", &vocab(), &GuardConfig::builtin(), None);
        assert_eq!(r.classification, Classification::OffTopic);
    }

    #[test]
    fn on_topic() {
        let r = guard_turn("does the loop run 3 times?", &vocab(), &GuardConfig::builtin(), None);
        assert_eq!(r.classification, Classification::OnTopic);
        let r = guard_turn("because the code works", &vocab(), &GuardConfig::builtin(), None);
        assert_eq!(r.classification, Classification::OnTopic);
    }

    #[test]
    fn phrases_need_word_boundaries() {
        let r = guard_turn("the prefix it uses is fine for the loop", &vocab(), &GuardConfig::builtin(), None);
        assert_eq!(r.classification, Classification::OnTopic);
        let r = guard_turn("Can you FIX IT?", &vocab(), &GuardConfig::builtin(), None);
        assert_eq!(r.classification, Classification::SolutionRequest);
    }

    #[test]
    fn replies_are_value_free() {
        for (id, _) in REPLIES {
            for kc in Kc::ALL.map(Some).into_iter().chain([None]) {
                let text = reply_text(id, kc);
                assert!(!has_digit(&text) && !text.contains([';', '{', '}']), "{text}");
            }
        }
    }

    #[test]
    fn leak_check() {
        let p = minilang::parse("int main(){\n  int s =\n    7 * 3;\n  print(s);\n  return s;\n}").unwrap();
        assert!(reply_is_safe("Think about the loop.", &p, &[]));
        assert!(!reply_is_safe("try int s = and then more", &p, &[]));
        assert!(!reply_is_safe("write s = 1; instead", &p, &[]));
    }
}
