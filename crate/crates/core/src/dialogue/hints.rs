//! Tiered hints. Broad hints name only the construct; focused hints point
//! at the highest-weight atom the explanation missed, never at its value.

use serde::{Deserialize, Serialize};

use crate::questions::{AtomKind, ReferenceReason};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum HintLevel {
    Broad,
    Focused,
}

/// Hint text for `level`. `missing` lists atom indices not yet covered;
/// when empty every atom is a candidate target.
pub fn render_hint(reference: &ReferenceReason, level: HintLevel, missing: &[usize]) -> String {
    if level == HintLevel::Broad {
        return reference.broad_hint.clone();
    }
    let pool: Vec<usize> = if missing.is_empty() { (0..reference.atoms.len()).collect() } else { missing.to_vec() };
    // Highest weight first; the earliest atom wins ties.
    let target = pool
        .iter()
        .copied()
        .filter(|&i| i < reference.atoms.len())
        .max_by(|&x, &y| reference.atoms[x].weight.cmp(&reference.atoms[y].weight).then(y.cmp(&x)));
    let Some(i) = target else {
        return reference.focused_hint.clone();
    };
    let atom = &reference.atoms[i];
    match atom.kind {
        AtomKind::Numeric => reference.focused_hint.clone(),
        AtomKind::Identifier => {
            format!("Your explanation should say what happens to {} here. {}", atom.text_form, reference.focused_hint)
        }
        AtomKind::Concept => {
            format!("Explain your choice in terms of the {}. {}", atom.text_form, reference.focused_hint)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::facts::analyze;
    use crate::questions::{generate_question, AskHistory, Catalog};
    use crate::text::{has_digit, tokens};
    use crate::Kc;
    use minilang::{parse, Inputs, Value};

    const P1: &str =
        "int main(int n){ int s = 0; for (int i = 0; i < n; i = i + 1) { s = s + i; } print(s); return 0; }";

    fn reference(kc: Kc, seed: u64) -> (String, ReferenceReason) {
        let a = analyze(&parse(P1).unwrap(), &[Inputs::from([("n".to_owned(), Value::Int(3))])], 10_000).unwrap();
        let (q, r) = generate_question(&a, &Catalog::builtin(), kc, None, seed, &AskHistory::default()).unwrap();
        (q.template_id, r)
    }

    #[test]
    fn broad_hint_for_iteration_count() {
        let (t, r) = reference(Kc::Arithmetic, 0);
        assert_eq!(t, "ITER-COUNT");
        let h = render_hint(&r, HintLevel::Broad, &[]);
        assert!(h.contains("loop") && !has_digit(&h));
    }

    #[test]
    fn focused_hint_points_at_the_missing_value() {
        let (t, r) = reference(Kc::Tracing, 7);
        assert_eq!(t, "VAR-BEFORE-FINAL-ITER");
        let numeric = r.atoms.iter().position(|a| a.kind == AtomKind::Numeric).unwrap();
        let h = render_hint(&r, HintLevel::Focused, &[numeric]);
        let toks = tokens(&h);
        assert!(toks.contains(&"i".to_owned()));
        assert!(h.contains("final iteration"));
        assert!(!toks.contains(&"2".to_owned()));
    }

    #[test]
    fn focused_hint_names_a_missing_concept() {
        let (_, r) = reference(Kc::Tracing, 7);
        let concept = r.atoms.iter().position(|a| a.kind == AtomKind::Concept).unwrap();
        let h = render_hint(&r, HintLevel::Focused, &[concept]);
        assert!(h.contains(&r.atoms[concept].text_form));
    }
}
