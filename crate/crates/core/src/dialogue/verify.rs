//! Rule-based explanation scoring by weighted fact-atom coverage.

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use super::DialogueError;
use crate::questions::{AtomKind, FactAtom, ReferenceReason};
use crate::text::{contains_phrase, raw_tokens, tokens};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Action {
    Pass,
    HintBroad,
    HintFocused,
    FollowUp,
    Fail,
}

/// Similarity cut-offs and the per-question attempt limit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct Thresholds {
    pub pass: u32,
    pub focused: u32,
    pub max_attempts: u32,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds { pass: 75, focused: 40, max_attempts: 3 }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verdict {
    pub similarity: u32,
    pub score: u32,
    pub action: Action,
    pub matched_atoms: Vec<usize>,
    pub missing_atoms: Vec<usize>,
}

/// Whether the answer covers `atom`. Numbers must appear as a standalone
/// token; identifiers match case-sensitively, so the pronoun "I" is not `i`;
/// concepts match any form as a phrase.
pub fn atom_matches(atom: &FactAtom, answer: &str) -> bool {
    match atom.kind {
        AtomKind::Numeric => tokens(answer).contains(&atom.text_form),
        AtomKind::Identifier => raw_tokens(answer).contains(&atom.text_form),
        AtomKind::Concept => {
            let toks = tokens(answer);
            std::iter::once(&atom.text_form).chain(&atom.synonyms).any(|form| contains_phrase(&toks, &tokens(form)))
        }
    }
}

/// Percentage of atom weight covered by `answer`, with the matched and
/// missing atom indices.
pub fn similarity(reference: &ReferenceReason, answer: &str) -> (u32, Vec<usize>, Vec<usize>) {
    let (matched, missing): (Vec<usize>, Vec<usize>) =
        (0..reference.atoms.len()).partition(|&i| atom_matches(&reference.atoms[i], answer));
    let covered: Ratio<i64> = matched.iter().map(|&i| reference.atoms[i].weight).sum();
    let pct = (covered * 100).round().to_integer().clamp(0, 100);
    (pct as u32, matched, missing)
}

/// Twenty points for a correct selection plus four fifths of the
/// similarity, rounded half up; nothing for a wrong selection.
pub fn score(similarity: u32, tier1_correct: bool) -> u32 {
    if !tier1_correct {
        return 0;
    }
    (100 + 4 * similarity.min(100) + 2) / 5
}

/// Next step for the question. A wrong selection never passes and starts
/// on the broad hint; the attempt that reaches the limit fails.
pub fn decide(similarity: u32, tier1_correct: bool, attempts_used: u32, t: &Thresholds) -> Action {
    if tier1_correct && similarity >= t.pass {
        Action::Pass
    } else if attempts_used + 1 >= t.max_attempts {
        Action::Fail
    } else if attempts_used > 0 {
        Action::FollowUp
    } else if tier1_correct && similarity >= t.focused {
        Action::HintFocused
    } else {
        Action::HintBroad
    }
}

impl Verdict {
    pub fn new(
        similarity: u32,
        tier1_correct: bool,
        attempts_used: u32,
        matched_atoms: Vec<usize>,
        missing_atoms: Vec<usize>,
        t: &Thresholds,
    ) -> Verdict {
        Verdict {
            similarity,
            score: score(similarity, tier1_correct),
            action: decide(similarity, tier1_correct, attempts_used, t),
            matched_atoms,
            missing_atoms,
        }
    }
}

pub fn verify_explanation(
    reference: &ReferenceReason,
    answer: &str,
    tier1_correct: bool,
    attempts_used: u32,
    t: &Thresholds,
) -> Result<Verdict, DialogueError> {
    if answer.trim().is_empty() {
        return Err(DialogueError::EmptyAnswer);
    }
    let (sim, matched, missing) = similarity(reference, answer);
    Ok(Verdict::new(sim, tier1_correct, attempts_used, matched, missing, t))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn atom(text: &str, kind: AtomKind, w: (i64, i64), synonyms: &[&str]) -> FactAtom {
        FactAtom {
            text_form: text.into(),
            kind,
            weight: Ratio::new(w.0, w.1),
            synonyms: synonyms.iter().map(|s| s.to_string()).collect(),
        }
    }

    fn final_iter_reference() -> ReferenceReason {
        ReferenceReason {
            question_id: "q".into(),
            atoms: vec![
                atom("2", AtomKind::Numeric, (2, 5), &[]),
                atom("i", AtomKind::Identifier, (3, 20), &[]),
                atom("n", AtomKind::Identifier, (3, 20), &[]),
                atom("loop", AtomKind::Concept, (3, 20), &["loops"]),
                atom("final iteration", AtomKind::Concept, (3, 20), &["last iteration"]),
            ],
            canonical_explanation: "x".into(),
            broad_hint: "b".into(),
            focused_hint: "f".into(),
        }
    }

    #[test]
    fn full_explanation_scores_full_marks() {
        let r = final_iter_reference();
        let v = verify_explanation(
            &r,
            "i is 2 because the loop's last iteration starts when i equals 2 and n is 3",
            true,
            0,
            &Thresholds::default(),
        )
        .unwrap();
        assert_eq!((v.similarity, v.score, v.action), (100, 100, Action::Pass));
        assert!(v.missing_atoms.is_empty());
    }

    #[test]
    fn vague_explanation() {
        let r = final_iter_reference();
        let v = verify_explanation(&r, "because the code works", true, 0, &Thresholds::default()).unwrap();
        assert_eq!((v.similarity, v.score, v.action), (0, 20, Action::HintBroad));
        assert_eq!(v.missing_atoms, vec![0, 1, 2, 3, 4]);
    }

    #[test]
    fn numbers_match_only_as_whole_tokens() {
        let r = final_iter_reference();
        let (s, matched, _) = similarity(&r, "it was 12 or 2nd or -2");
        assert_eq!((s, matched.len()), (0, 0));
        let (s, _, _) = similarity(&r, "it was 2.");
        assert_eq!(s, 40);
    }

    #[test]
    fn identifiers_match_with_case() {
        let r = final_iter_reference();
        let i = r.atoms.iter().position(|a| a.kind == AtomKind::Identifier).unwrap();
        let name = r.atoms[i].text_form.clone();
        let (_, matched, _) = similarity(&r, &format!("then {name} stops"));
        assert!(matched.contains(&i));
        let (_, matched, _) = similarity(&r, &format!("then {} stops", name.to_uppercase()));
        assert!(!matched.contains(&i));
    }

    #[test]
    fn empty_answer_is_rejected() {
        let r = final_iter_reference();
        assert_eq!(verify_explanation(&r, "  \n", true, 0, &Thresholds::default()), Err(DialogueError::EmptyAnswer));
    }

    #[test]
    fn score_examples() {
        assert_eq!(score(50, true), 60);
        assert_eq!(score(0, true), 20);
        assert_eq!(score(100, true), 100);
        assert_eq!(score(100, false), 0);
    }

    #[test]
    fn actions_by_band() {
        let t = Thresholds::default();
        assert_eq!(decide(75, true, 0, &t), Action::Pass);
        assert_eq!(decide(74, true, 0, &t), Action::HintFocused);
        assert_eq!(decide(40, true, 0, &t), Action::HintFocused);
        assert_eq!(decide(39, true, 0, &t), Action::HintBroad);
        assert_eq!(decide(39, true, 1, &t), Action::FollowUp);
        assert_eq!(decide(60, true, 2, &t), Action::Fail);
        assert_eq!(decide(90, false, 0, &t), Action::HintBroad);
        assert_eq!(decide(90, false, 2, &t), Action::Fail);
        assert_eq!(decide(90, true, 2, &t), Action::Pass);
    }

    proptest! {
        #[test]
        fn score_follows_formula(s in 0u32..=100) {
            // Oracle in exact tenths: 20 + 0.8 s = (200 + 8 s) / 10.
            let tenths = 200 + 8 * s;
            let expected = tenths / 10 + u32::from(tenths % 10 >= 5);
            prop_assert_eq!(score(s, true), expected);
            prop_assert!((20..=100).contains(&score(s, true)));
            prop_assert_eq!(score(s, false), 0);
            if s > 0 {
                prop_assert!(score(s - 1, true) <= score(s, true));
            }
        }

        #[test]
        fn action_lattice(s in 0u32..=100, correct in any::<bool>(), attempts in 0u32..6) {
            let t = Thresholds::default();
            let a = decide(s, correct, attempts, &t);
            prop_assert_eq!(a, decide(s, correct, attempts, &t));
            let expected = if correct && s >= 75 {
                Action::Pass
            } else if attempts + 1 >= 3 {
                Action::Fail
            } else if attempts >= 1 {
                Action::FollowUp
            } else if !correct || s < 40 {
                Action::HintBroad
            } else {
                Action::HintFocused
            };
            prop_assert_eq!(a, expected);
        }

        #[test]
        fn similarity_is_bounded(text in "[a-z0-9 ]{0,60}") {
            let (s, m, x) = similarity(&final_iter_reference(), &text);
            prop_assert!(s <= 100);
            prop_assert_eq!(m.len() + x.len(), 5);
        }
    }
}
