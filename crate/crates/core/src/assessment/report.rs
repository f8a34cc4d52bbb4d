use std::collections::BTreeMap;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use super::FunctionalResult;
use crate::config::Weights;
use crate::dialogue::Verdict;
use crate::kc::{Kc, MisconceptionTag};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Mode {
    #[default]
    Formative,
    Summative,
}

/// One question slot: the primary question plus any follow-ups.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuestionRecord {
    pub question_ids: Vec<String>,
    pub kc: Kc,
    pub tier1_correct: Vec<bool>,
    pub chosen_tags: Vec<MisconceptionTag>,
    pub verdicts: Vec<Verdict>,
    /// Score of the closing verdict; None while the slot is open.
    pub score: Option<u32>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssessmentReport {
    pub functional_score: u32,
    pub dialogue_score: u32,
    pub final_grade: u32,
    pub unproductive_success: bool,
    pub per_kc: BTreeMap<Kc, f64>,
    pub misconceptions: Vec<(Kc, MisconceptionTag)>,
    pub per_question: Vec<QuestionRecord>,
    pub functional: FunctionalResult,
    pub mode: Mode,
    /// Terminal session state the report was compiled in.
    pub state: String,
}

fn round_half_up(r: Ratio<i64>) -> u32 {
    // Inputs are non-negative; floor(r + 1/2).
    (r + Ratio::new(1, 2)).floor().to_integer().clamp(0, 100) as u32
}

pub fn functional_score(result: &FunctionalResult) -> u32 {
    round_half_up(result.pass_fraction * 100)
}

/// Mean score over `divisor` slots; slots without a score count as zero.
pub fn dialogue_score(scores: &[u32], divisor: usize) -> u32 {
    let divisor = divisor.max(scores.len());
    if divisor == 0 {
        return 0;
    }
    let sum: i64 = scores.iter().map(|&s| i64::from(s)).sum();
    round_half_up(Ratio::new(sum, divisor as i64))
}

pub fn unproductive_success(functional: u32, dialogue: u32) -> bool {
    functional >= 80 && dialogue < 50
}

/// Weighted final grade and the unproductive-success flag.
pub fn fuse(functional: u32, dialogue: u32, weights: &Weights) -> (u32, bool) {
    let (wf, wd) = weights.exact();
    let grade = wf * i64::from(functional) + wd * i64::from(dialogue);
    (round_half_up(grade), unproductive_success(functional, dialogue))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fusion_examples() {
        let w = Weights::default();
        assert_eq!(fuse(100, 100, &w), (100, false));
        assert_eq!(fuse(100, 20, &w), (60, true));
        assert_eq!(fuse(40, 90, &w), (65, false));
    }

    #[test]
    fn flag_boundaries() {
        assert!(unproductive_success(80, 49));
        assert!(!unproductive_success(79, 49));
        assert!(!unproductive_success(80, 50));
    }

    #[test]
    fn unanswered_slots_count_as_zero() {
        assert_eq!(dialogue_score(&[], 3), 0);
        assert_eq!(dialogue_score(&[90], 3), 30);
        assert_eq!(dialogue_score(&[100, 61], 2), 81);
        assert_eq!(dialogue_score(&[], 0), 0);
    }

    #[test]
    fn functional_rounding() {
        let r = |p, t| FunctionalResult { tests: vec![], pass_fraction: Ratio::new(p, t) };
        assert_eq!(functional_score(&r(1, 2)), 50);
        assert_eq!(functional_score(&r(2, 3)), 67);
        assert_eq!(functional_score(&r(1, 8)), 13);
    }

    #[test]
    fn fusion_is_the_rounded_mean_by_default() {
        for f in 0..=100 {
            for d in 0..=100 {
                // (f + d) / 2 rounded half up, in integers.
                assert_eq!(fuse(f, d, &Weights::default()).0, (f + d).div_ceil(2));
            }
        }
    }
}
