//! Wrong-answer generation. Each rule maps a correct answer to candidate
//! values tagged with the misconception they model; rules run in template
//! order until three distinct distractors exist.

use minilang::{BinOp, Expr, ExprKind};
use serde::{Deserialize, Serialize};

use crate::kc::MisconceptionTag;

/// Trace-derived values the integer rules draw on.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct IntContext {
    /// Values the subject takes at other iterations.
    pub iteration_values: Vec<i64>,
    pub init: Option<i64>,
    pub boundary: Option<i64>,
}

/// Three distinct integers different from `correct`, each tagged. Values
/// below `min` are never produced.
pub fn int_distractors(
    correct: i64,
    rules: &[MisconceptionTag],
    fallback: MisconceptionTag,
    ctx: &IntContext,
    min: Option<i64>,
) -> Vec<(i64, MisconceptionTag)> {
    let mut out: Vec<(i64, MisconceptionTag)> = Vec::new();
    let offer = |v: i64, tag: MisconceptionTag, out: &mut Vec<(i64, MisconceptionTag)>| {
        if out.len() < 3 && v != correct && min.is_none_or(|m| v >= m) && !out.iter().any(|(x, _)| *x == v) {
            out.push((v, tag));
        }
    };
    for &rule in rules {
        let values: Vec<i64> = match rule {
            MisconceptionTag::OffByOne => vec![correct.wrapping_add(1), correct.wrapping_sub(1)],
            MisconceptionTag::IterCountConfusion => ctx.iteration_values.clone(),
            MisconceptionTag::InitValueConfusion => ctx.init.into_iter().collect(),
            MisconceptionTag::BoundsConfusion => ctx.boundary.into_iter().collect(),
            MisconceptionTag::WrongBranch | MisconceptionTag::None => Vec::new(),
        };
        for v in values {
            offer(v, rule, &mut out);
        }
    }
    let mut k: i64 = 2;
    while out.len() < 3 {
        offer(correct.wrapping_add(k), fallback, &mut out);
        offer(correct.wrapping_sub(k), fallback, &mut out);
        k += 1;
    }
    out
}

pub fn negate(op: BinOp) -> BinOp {
    match op {
        BinOp::Lt => BinOp::Ge,
        BinOp::Ge => BinOp::Lt,
        BinOp::Le => BinOp::Gt,
        BinOp::Gt => BinOp::Le,
        BinOp::Eq => BinOp::Ne,
        BinOp::Ne => BinOp::Eq,
        other => other,
    }
}

fn toggle_strictness(op: BinOp) -> Option<BinOp> {
    match op {
        BinOp::Lt => Some(BinOp::Le),
        BinOp::Le => Some(BinOp::Lt),
        BinOp::Gt => Some(BinOp::Ge),
        BinOp::Ge => Some(BinOp::Gt),
        _ => None,
    }
}

fn reverse_direction(op: BinOp) -> Option<BinOp> {
    match op {
        BinOp::Lt => Some(BinOp::Gt),
        BinOp::Gt => Some(BinOp::Lt),
        BinOp::Le => Some(BinOp::Ge),
        BinOp::Ge => Some(BinOp::Le),
        _ => None,
    }
}

const RELATIONAL: [BinOp; 6] = [BinOp::Lt, BinOp::Le, BinOp::Gt, BinOp::Ge, BinOp::Eq, BinOp::Ne];

/// Splits a single relational comparison into its parts.
pub fn comparison(e: &Expr) -> Option<(BinOp, &Expr, &Expr)> {
    match &e.kind {
        ExprKind::Binary { op, lhs, rhs } if op.is_relational() => Some((*op, lhs, rhs)),
        _ => None,
    }
}

pub fn with_op(e: &Expr, op: BinOp) -> Expr {
    let (_, lhs, rhs) = comparison(e).expect("relational comparison");
    rebuild(e, op, lhs.clone(), rhs.clone())
}

fn rebuild(e: &Expr, op: BinOp, lhs: Expr, rhs: Expr) -> Expr {
    Expr { id: e.id, line: e.line, kind: ExprKind::Binary { op, lhs: Box::new(lhs), rhs: Box::new(rhs) } }
}

/// Three distinct wrong conditions for a relational comparison, compared by
/// their rendered text.
pub fn condition_distractors(
    correct: &Expr,
    rules: &[MisconceptionTag],
    fallback: MisconceptionTag,
) -> Vec<(String, MisconceptionTag)> {
    let (op, lhs, rhs) = comparison(correct).expect("condition templates only ground comparisons");
    let correct_text = correct.to_string();
    let mut out: Vec<(String, MisconceptionTag)> = Vec::new();
    let offer = |e: Expr, tag: MisconceptionTag, out: &mut Vec<(String, MisconceptionTag)>| {
        let text = e.to_string();
        if out.len() < 3 && text != correct_text && !out.iter().any(|(t, _)| *t == text) {
            out.push((text, tag));
        }
    };
    for &rule in rules {
        let alt = match rule {
            MisconceptionTag::OffByOne => toggle_strictness(op),
            MisconceptionTag::WrongBranch => Some(negate(op)),
            MisconceptionTag::BoundsConfusion => reverse_direction(op),
            _ => None,
        };
        if let Some(alt) = alt {
            offer(with_op(correct, alt), rule, &mut out);
        }
    }
    if !matches!(op, BinOp::Eq | BinOp::Ne) {
        offer(rebuild(correct, op, rhs.clone(), lhs.clone()), fallback, &mut out);
    }
    for alt in RELATIONAL {
        offer(with_op(correct, alt), fallback, &mut out);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use MisconceptionTag::{BoundsConfusion, InitValueConfusion, IterCountConfusion, OffByOne, WrongBranch};

    fn cond(src: &str) -> Expr {
        let p = minilang::parse(&format!("int main(int i, int n){{ if ({src}) {{ return 1; }} return 0; }}")).unwrap();
        match &p.main().body[0].kind {
            minilang::StmtKind::If { cond, .. } => cond.clone(),
            _ => unreachable!(),
        }
    }

    #[test]
    fn plus_minus_one_first() {
        let d = int_distractors(
            2,
            &[OffByOne, IterCountConfusion, InitValueConfusion],
            IterCountConfusion,
            &IntContext { iteration_values: vec![1, 3], init: Some(0), boundary: None },
            None,
        );
        assert_eq!(d, vec![(3, OffByOne), (1, OffByOne), (0, InitValueConfusion)]);
    }

    #[test]
    fn zero_answer() {
        let d = int_distractors(0, &[OffByOne], IterCountConfusion, &IntContext::default(), None);
        assert_eq!(d[..2], [(1, OffByOne), (-1, OffByOne)]);
        assert_eq!(d.len(), 3);
    }

    #[test]
    fn iteration_count_rules() {
        let ctx = IntContext { iteration_values: vec![], init: Some(0), boundary: Some(3) };
        let d = int_distractors(3, &[OffByOne, InitValueConfusion, BoundsConfusion], IterCountConfusion, &ctx, Some(0));
        assert_eq!(d, vec![(4, OffByOne), (2, OffByOne), (0, InitValueConfusion)]);
    }

    #[test]
    fn fallback_respects_minimum() {
        let d = int_distractors(1, &[OffByOne], OffByOne, &IntContext::default(), Some(1));
        assert_eq!(d, vec![(2, OffByOne), (3, OffByOne), (4, OffByOne)]);
    }

    #[test]
    fn condition_rules() {
        let d = condition_distractors(&cond("i < n"), &[OffByOne, WrongBranch, BoundsConfusion], BoundsConfusion);
        assert_eq!(
            d,
            vec![("i <= n".into(), OffByOne), ("i >= n".into(), WrongBranch), ("i > n".into(), BoundsConfusion)]
        );
    }

    #[test]
    fn equality_falls_back_to_other_operators() {
        let d = condition_distractors(&cond("i == 3"), &[OffByOne, WrongBranch, BoundsConfusion], WrongBranch);
        assert_eq!(d[0], ("i != 3".into(), WrongBranch));
        assert_eq!(d[1].0, "i < 3");
        assert_eq!(d.len(), 3);
    }
}
