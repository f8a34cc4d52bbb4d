//! Question template library. Each template is one JSON document; the
//! built-in set is compiled in and a directory of replacements can be loaded
//! at runtime.

use std::collections::BTreeSet;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::kc::{Kc, MisconceptionTag};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum GroundingKind {
    LoopInit,
    LoopCond,
    LoopUpdate,
    LoopTerm,
    BranchPurpose,
    DeclPurpose,
    VarBeforeFinalIter,
    IterCount,
    NextValue,
    LastValidIndex,
    ExitValue,
    BranchOutcome,
    FinalOutput,
    NonterminatingLine,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum AnswerType {
    Int,
    Line,
    Condition,
    Branch,
    Output,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Concept {
    pub term: String,
    #[serde(default)]
    pub synonyms: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Template {
    pub id: String,
    pub kcs: Vec<Kc>,
    pub standalone: bool,
    pub grounding: GroundingKind,
    pub answer: AnswerType,
    pub pattern: String,
    pub perturbations: Vec<MisconceptionTag>,
    pub fallback_tag: MisconceptionTag,
    #[serde(default)]
    pub non_negative: bool,
    pub concepts: Vec<Concept>,
    pub explanation: String,
    pub broad_hint: String,
    pub focused_hint: String,
}

#[derive(Debug, Error)]
pub enum CatalogError {
    #[error("template {file}: {source}")]
    Json { file: String, source: serde_json::Error },
    #[error("template directory {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("template {id}: {problem}")]
    Invalid { id: String, problem: String },
}

const BUILTIN: [(&str, &str); 14] = [
    ("branch-purpose.json", include_str!("../../templates/branch-purpose.json")),
    ("branch-taken-on-input.json", include_str!("../../templates/branch-taken-on-input.json")),
    ("decl-purpose.json", include_str!("../../templates/decl-purpose.json")),
    ("iter-count.json", include_str!("../../templates/iter-count.json")),
    ("last-valid-array-access.json", include_str!("../../templates/last-valid-array-access.json")),
    ("loop-cond.json", include_str!("../../templates/loop-cond.json")),
    ("loop-init.json", include_str!("../../templates/loop-init.json")),
    ("loop-term.json", include_str!("../../templates/loop-term.json")),
    ("loop-update.json", include_str!("../../templates/loop-update.json")),
    ("next-value.json", include_str!("../../templates/next-value.json")),
    ("nontermination-line.json", include_str!("../../templates/nontermination-line.json")),
    ("output-on-input.json", include_str!("../../templates/output-on-input.json")),
    ("var-before-final-iter.json", include_str!("../../templates/var-before-final-iter.json")),
    ("why-terminates.json", include_str!("../../templates/why-terminates.json")),
];

const STEM_SLOTS: [&str; 9] = ["inputs", "var", "line", "answer", "decl_line", "arm", "pass", "current", "occurrence"];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Catalog {
    templates: Vec<Template>,
}

impl Catalog {
    pub fn builtin() -> Catalog {
        let docs = BUILTIN.iter().map(|(f, s)| (f.to_string(), s.to_string())).collect();
        Catalog::from_documents(docs).expect("built-in templates are valid")
    }

    /// Loads every `*.json` file in `dir`, in file-name order.
    pub fn load_dir(dir: &Path) -> Result<Catalog, CatalogError> {
        let io = |source| CatalogError::Io { path: dir.display().to_string(), source };
        let mut files: Vec<_> = std::fs::read_dir(dir)
            .map_err(io)?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "json"))
            .collect();
        files.sort();
        let mut docs = Vec::new();
        for f in files {
            let text = std::fs::read_to_string(&f).map_err(io)?;
            docs.push((f.display().to_string(), text));
        }
        Catalog::from_documents(docs)
    }

    pub fn from_documents(docs: Vec<(String, String)>) -> Result<Catalog, CatalogError> {
        let mut templates = Vec::new();
        for (file, text) in docs {
            let t: Template = serde_json::from_str(&text).map_err(|source| CatalogError::Json { file, source })?;
            validate(&t)?;
            templates.push(t);
        }
        templates.sort_by(|a, b| a.id.cmp(&b.id));
        let mut seen = BTreeSet::new();
        for t in &templates {
            if !seen.insert(t.id.clone()) {
                return Err(CatalogError::Invalid { id: t.id.clone(), problem: "duplicate template id".into() });
            }
        }
        Ok(Catalog { templates })
    }

    pub fn get(&self, id: &str) -> Option<&Template> {
        self.templates.iter().find(|t| t.id == id)
    }

    /// Templates sorted by id.
    pub fn templates(&self) -> &[Template] {
        &self.templates
    }

    pub fn by_grounding(&self, kind: GroundingKind) -> Option<&Template> {
        self.templates.iter().find(|t| t.grounding == kind)
    }
}

fn validate(t: &Template) -> Result<(), CatalogError> {
    let bad = |problem: String| Err(CatalogError::Invalid { id: t.id.clone(), problem });
    if t.concepts.is_empty() {
        return bad("at least one concept is required for hints".into());
    }
    if t.kcs.is_empty() {
        return bad("no knowledge components".into());
    }
    if t.perturbations.contains(&MisconceptionTag::None) || t.fallback_tag == MisconceptionTag::None {
        return bad("perturbation rules need a misconception tag".into());
    }
    for (what, text, allowed) in [
        ("pattern", &t.pattern, &STEM_SLOTS[..]),
        ("explanation", &t.explanation, &STEM_SLOTS[..]),
        ("broad_hint", &t.broad_hint, &[][..]),
        ("focused_hint", &t.focused_hint, &["var"][..]),
    ] {
        for slot in placeholders(text) {
            if !allowed.contains(&slot.as_str()) {
                return bad(format!("{what} uses unsupported slot {{{slot}}}"));
            }
        }
    }
    for (what, text) in [("broad_hint", &t.broad_hint), ("focused_hint", &t.focused_hint)] {
        if crate::text::has_digit(text) || text.contains(['{', '}']) && what == "broad_hint" {
            return bad(format!("{what} must not contain digits or slots"));
        }
    }
    Ok(())
}

/// Names inside `{...}` slots, in order of appearance.
pub fn placeholders(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut rest = text;
    while let Some(start) = rest.find('{') {
        let Some(len) = rest[start..].find('}') else { break };
        out.push(rest[start + 1..start + len].to_owned());
        rest = &rest[start + len + 1..];
    }
    out
}

/// Replaces `{slot}` occurrences with values; unknown slots are left as-is.
pub fn fill(pattern: &str, values: &[(&str, String)]) -> String {
    let mut out = pattern.to_owned();
    for (k, v) in values {
        out = out.replace(&format!("{{{k}}}"), v);
    }
    out
}
