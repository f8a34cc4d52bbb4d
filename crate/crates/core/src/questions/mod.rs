//! Tier-1 question generation: template selection, grounding, distractors,
//! reference reasons, step chains and narrowing follow-ups.

pub mod catalog;
pub mod distract;
mod ground;

use std::collections::{BTreeMap, BTreeSet};

use minilang::{query_trace, NodeId, StmtKind, TraceAnswer, TraceQuery};
use num_rational::Ratio;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use catalog::{fill, AnswerType, Catalog, CatalogError, Concept, GroundingKind, Template};
pub use distract::IntContext;

use crate::facts::Analysis;
use crate::kc::{Kc, MisconceptionTag};
use ground::{Answer, Candidate};

/// Questions in a step chain never exceed this many.
pub const MAX_CHAIN_STEPS: usize = 4;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Choice {
    /// Text shown to the student.
    pub text: String,
    /// Canonical value compared against the grounding oracle.
    pub value: String,
    pub misconception_tag: MisconceptionTag,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "property", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum StaticProperty {
    /// Source text of the condition of an `if` or loop, optionally negated.
    ConditionText { negated: bool },
    /// Constant step of a loop's update statement.
    UpdateDelta,
    /// Line of the first assignment to a declared variable.
    FirstAssignLine,
}

/// Query that reproduces the correct answer independently of the generator.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Oracle {
    Trace { input_set_id: String, query: TraceQuery },
    Static { node_id: NodeId, property: StaticProperty },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Grounding {
    pub fact_ids: Vec<String>,
    pub input_set_id: Option<String>,
    pub oracle: Oracle,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Question {
    pub question_id: String,
    pub template_id: String,
    pub unit_id: String,
    pub kc: Kc,
    /// What the question is about within its unit (variable, array, ...).
    pub subject: String,
    pub stem: String,
    pub options: Vec<Choice>,
    pub correct_index: usize,
    pub answer_type: AnswerType,
    pub grounding: Grounding,
    pub seed: u64,
}

impl Question {
    pub fn correct(&self) -> &Choice {
        &self.options[self.correct_index]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum AtomKind {
    Numeric,
    Identifier,
    Concept,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FactAtom {
    pub text_form: String,
    pub kind: AtomKind,
    pub weight: Ratio<i64>,
    pub synonyms: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReferenceReason {
    pub question_id: String,
    pub atoms: Vec<FactAtom>,
    pub canonical_explanation: String,
    pub broad_hint: String,
    /// Template hint aimed at the subject variable; never carries the answer.
    pub focused_hint: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepChain {
    pub chain_id: String,
    pub unit_id: String,
    pub steps: Vec<Question>,
    pub references: Vec<ReferenceReason>,
}

/// Questions already asked in a session and when each template was last used.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AskHistory {
    pub asked: BTreeSet<String>,
    pub template_uses: BTreeMap<String, u64>,
    pub clock: u64,
}

impl AskHistory {
    pub fn record(&mut self, q: &Question) {
        self.clock += 1;
        self.asked.insert(q.question_id.clone());
        self.template_uses.insert(q.template_id.clone(), self.clock);
    }

    pub fn was_asked(&self, question_id: &str) -> bool {
        self.asked.contains(question_id)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum QuestionError {
    #[error("no template applies to {kc}")]
    NoApplicableTemplate { kc: Kc },
    #[error("loop {loop_id} ran {observed} iterations; a chain needs at least 2")]
    InsufficientIterations { loop_id: NodeId, observed: usize },
    #[error("no narrower grounding remains")]
    Exhausted,
    #[error("unknown {what} {name}")]
    Unknown { what: &'static str, name: String },
    #[error("oracle has no answer: {0}")]
    Oracle(String),
}

/// Template plus candidate groundings usable for `kc`, optionally in one unit.
fn open_candidates<'c>(
    a: &Analysis,
    catalog: &'c Catalog,
    kc: Kc,
    unit: Option<&str>,
    history: &AskHistory,
) -> Vec<(&'c Template, Vec<Candidate>)> {
    let mut out = Vec::new();
    for t in catalog.templates() {
        if !t.standalone || !t.kcs.contains(&kc) {
            continue;
        }
        let cands: Vec<Candidate> = ground::candidates(a, t)
            .into_iter()
            .filter(|c| unit.is_none_or(|u| u == c.unit_id))
            .filter(|c| a.facts.unit(&c.unit_id).is_some_and(|u| u.knowledge_components.contains(&kc)))
            .filter(|c| !history.was_asked(&question_id(a, t, c)))
            .collect();
        if !cands.is_empty() {
            out.push((t, cands));
        }
    }
    out
}

/// Units holding at least one unasked standalone question for `kc`.
pub fn open_units(a: &Analysis, catalog: &Catalog, kc: Kc, history: &AskHistory) -> BTreeSet<String> {
    open_candidates(a, catalog, kc, None, history)
        .into_iter()
        .flat_map(|(_, cs)| cs.into_iter().map(|c| c.unit_id))
        .collect()
}

fn question_id(a: &Analysis, t: &Template, c: &Candidate) -> String {
    let input = match c.input {
        Some(i) => a.facts.per_input_runs[i].input_set_id.as_str(),
        None => "static",
    };
    format!("{}/{}/{}/{input}", t.id, c.unit_id, c.subject)
}

/// Position of input `i` once the input order is rotated by the seed.
fn input_rank(c: &Candidate, runs: usize, seed: u64) -> usize {
    match c.input {
        Some(i) if runs > 0 => (i + runs - (seed % runs as u64) as usize) % runs,
        _ => 0,
    }
}

fn pick(mut cands: Vec<Candidate>, runs: usize, seed: u64) -> Option<Candidate> {
    // Stable sort keeps program order within one input rank.
    cands.sort_by_key(|c| input_rank(c, runs, seed));
    cands.into_iter().next()
}

/// Picks the least-recently-used applicable template for `kc` (ties by id)
/// and its first unasked grounding, inputs rotated by `seed`.
pub fn generate_question(
    a: &Analysis,
    catalog: &Catalog,
    kc: Kc,
    unit: Option<&str>,
    seed: u64,
    history: &AskHistory,
) -> Result<(Question, ReferenceReason), QuestionError> {
    let open = open_candidates(a, catalog, kc, unit, history);
    let (t, cands) = open
        .into_iter()
        .min_by(|(x, _), (y, _)| {
            let used = |t: &Template| history.template_uses.get(&t.id).copied();
            (used(x), &x.id).cmp(&(used(y), &y.id))
        })
        .ok_or(QuestionError::NoApplicableTemplate { kc })?;
    let c = pick(cands, a.traces.len(), seed).expect("open templates have candidates");
    Ok(build(a, t, &c, kc, seed))
}

fn fnv1a(text: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in text.bytes() {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    h
}

fn shuffle(correct: Choice, distractors: Vec<Choice>, seed: u64, question_id: &str) -> (Vec<Choice>, usize) {
    let mut options = vec![correct.clone()];
    options.extend(distractors);
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ fnv1a(question_id));
    options.shuffle(&mut rng);
    let index = options.iter().position(|o| *o == correct).expect("correct option present");
    (options, index)
}

fn int_choice(v: i64, tag: MisconceptionTag) -> Choice {
    Choice { text: v.to_string(), value: v.to_string(), misconception_tag: tag }
}

fn min_value(t: &Template) -> Option<i64> {
    match t.answer {
        AnswerType::Line => Some(1),
        _ if t.non_negative => Some(0),
        _ => None,
    }
}

const BRANCH_CHOICES: [(&str, &str); 4] = [
    ("TRUE", "true, so the then-branch runs"),
    ("FALSE", "false, so the then-branch is skipped"),
    ("TRUE_SKIP", "true, but the then-branch is skipped"),
    ("FALSE_RUN", "false, but the then-branch runs"),
];

fn branch_choice(value: &str, tag: MisconceptionTag) -> Choice {
    let text = BRANCH_CHOICES.iter().find(|(v, _)| *v == value).expect("known branch value").1;
    Choice { text: text.into(), value: value.into(), misconception_tag: tag }
}

/// The four options of a question, correct first.
fn options_for(t: &Template, c: &Candidate) -> (Choice, Vec<Choice>) {
    match &c.answer {
        Answer::Int(v) => render_int(*v, t, &c.ctx),
        Answer::Line(l) => render_int(i64::from(*l), t, &c.ctx),
        Answer::Condition(e) => {
            let text = e.to_string();
            let correct = Choice { text: text.clone(), value: text, misconception_tag: MisconceptionTag::None };
            let wrong = distract::condition_distractors(e, &t.perturbations, t.fallback_tag)
                .into_iter()
                .map(|(text, tag)| Choice { text: text.clone(), value: text, misconception_tag: tag })
                .collect();
            (correct, wrong)
        }
        Answer::Branch(taken) => {
            let (right, other) = if *taken { ("TRUE", "FALSE") } else { ("FALSE", "TRUE") };
            let wrong = [other, "TRUE_SKIP", "FALSE_RUN"]
                .into_iter()
                .map(|v| branch_choice(v, MisconceptionTag::WrongBranch))
                .collect();
            (branch_choice(right, MisconceptionTag::None), wrong)
        }
        Answer::Output(lines) => {
            let last: i64 = lines.last().and_then(|l| l.parse().ok()).unwrap_or(0);
            let with_last = |v: i64, tag| {
                let mut ls = lines.clone();
                *ls.last_mut().expect("output has a line") = v.to_string();
                Choice { text: ls.join(", "), value: ls.join("\n"), misconception_tag: tag }
            };
            let wrong = distract::int_distractors(last, &t.perturbations, t.fallback_tag, &c.ctx, None)
                .into_iter()
                .map(|(v, tag)| with_last(v, tag))
                .collect();
            (with_last(last, MisconceptionTag::None), wrong)
        }
    }
}

fn render_int(v: i64, t: &Template, ctx: &IntContext) -> (Choice, Vec<Choice>) {
    let wrong = distract::int_distractors(v, &t.perturbations, t.fallback_tag, ctx, min_value(t))
        .into_iter()
        .map(|(x, tag)| int_choice(x, tag))
        .collect();
    (int_choice(v, MisconceptionTag::None), wrong)
}

/// Three tagged distractors for an integer answer, shuffled by `seed`.
pub fn render_distractors(value: i64, template: &Template, ctx: &IntContext, seed: u64) -> Vec<Choice> {
    let mut wrong: Vec<Choice> =
        distract::int_distractors(value, &template.perturbations, template.fallback_tag, ctx, min_value(template))
            .into_iter()
            .map(|(x, tag)| int_choice(x, tag))
            .collect();
    wrong.shuffle(&mut ChaCha8Rng::seed_from_u64(seed ^ fnv1a(&template.id)));
    wrong
}

fn answer_display(answer: &Answer) -> String {
    match answer {
        Answer::Int(v) => v.to_string(),
        Answer::Line(l) => l.to_string(),
        Answer::Condition(e) => e.to_string(),
        Answer::Branch(b) => b.to_string(),
        Answer::Output(lines) => lines.join(", "),
    }
}

const NUMERIC_SHARE: i64 = 40;
const IDENTIFIER_SHARE: i64 = 30;
const CONCEPT_SHARE: i64 = 30;

fn atoms(t: &Template, c: &Candidate) -> Vec<FactAtom> {
    let numeric: Vec<String> = match &c.answer {
        Answer::Int(v) => vec![v.to_string()],
        Answer::Line(l) => vec![l.to_string()],
        Answer::Output(lines) => lines.last().cloned().into_iter().collect(),
        Answer::Condition(_) | Answer::Branch(_) => Vec::new(),
    };
    let mut idents: Vec<String> = Vec::new();
    for i in &c.identifiers {
        if !idents.contains(i) {
            idents.push(i.clone());
        }
    }
    type Forms = Vec<(String, Vec<String>)>;
    let groups: Vec<(AtomKind, i64, Forms)> = vec![
        (AtomKind::Numeric, NUMERIC_SHARE, numeric.into_iter().map(|n| (n, Vec::new())).collect()),
        (AtomKind::Identifier, IDENTIFIER_SHARE, idents.into_iter().map(|n| (n, Vec::new())).collect()),
        (AtomKind::Concept, CONCEPT_SHARE, t.concepts.iter().map(|k| (k.term.clone(), k.synonyms.clone())).collect()),
    ];
    let total: i64 = groups.iter().filter(|g| !g.2.is_empty()).map(|g| g.1).sum();
    let mut out = Vec::new();
    for (kind, share, items) in groups {
        let n = items.len() as i64;
        for (text_form, synonyms) in items {
            out.push(FactAtom { text_form, kind, weight: Ratio::new(share, total * n), synonyms });
        }
    }
    out
}

fn build(a: &Analysis, t: &Template, c: &Candidate, kc: Kc, seed: u64) -> (Question, ReferenceReason) {
    let qid = question_id(a, t, c);
    let stem = fill(&t.pattern, &c.slots);
    let (correct, wrong) = options_for(t, c);
    let (options, correct_index) = shuffle(correct, wrong, seed, &qid);
    let question = Question {
        question_id: qid.clone(),
        template_id: t.id.clone(),
        unit_id: c.unit_id.clone(),
        kc,
        subject: c.subject.clone(),
        stem,
        options,
        correct_index,
        answer_type: t.answer,
        grounding: Grounding {
            fact_ids: c.fact_ids.clone(),
            input_set_id: match &c.oracle {
                Oracle::Trace { input_set_id, .. } if c.input.is_some() => Some(input_set_id.clone()),
                _ => None,
            },
            oracle: c.oracle.clone(),
        },
        seed,
    };
    let mut slots = c.slots.clone();
    slots.push(("answer", answer_display(&c.answer)));
    let hint_var = c.identifiers.first().cloned().unwrap_or_else(|| "the value".into());
    let reference = ReferenceReason {
        question_id: qid,
        atoms: atoms(t, c),
        canonical_explanation: fill(&t.explanation, &slots),
        broad_hint: t.broad_hint.clone(),
        focused_hint: fill(&t.focused_hint, &[("var", hint_var)]),
    };
    (question, reference)
}

/// Evaluates a grounding oracle, giving the canonical value the correct
/// option must carry.
pub fn evaluate_oracle(a: &Analysis, oracle: &Oracle) -> Result<String, QuestionError> {
    match oracle {
        Oracle::Trace { input_set_id, query } => {
            let trace = a
                .trace(input_set_id)
                .ok_or_else(|| QuestionError::Unknown { what: "input set", name: input_set_id.clone() })?;
            match query_trace(&a.program, trace, query).map_err(|e| QuestionError::Oracle(e.to_string()))? {
                TraceAnswer::Int(v) => Ok(v.to_string()),
                TraceAnswer::Line(l) => Ok(l.to_string()),
                TraceAnswer::Bool(b) => Ok(if b { "TRUE" } else { "FALSE" }.into()),
                TraceAnswer::Text(t) => Ok(t),
                TraceAnswer::NotApplicable => Err(QuestionError::Oracle("not applicable".into())),
            }
        }
        Oracle::Static { node_id, property } => {
            let unknown = || QuestionError::Unknown { what: "node", name: node_id.to_string() };
            let s = a.program.stmt(*node_id).ok_or_else(unknown)?;
            match property {
                StaticProperty::ConditionText { negated } => {
                    let cond = match &s.kind {
                        StmtKind::If { cond, .. } | StmtKind::While { cond, .. } | StmtKind::For { cond, .. } => cond,
                        _ => return Err(unknown()),
                    };
                    if !negated {
                        return Ok(cond.to_string());
                    }
                    let (op, _, _) = distract::comparison(cond).ok_or_else(unknown)?;
                    Ok(distract::with_op(cond, distract::negate(op)).to_string())
                }
                StaticProperty::UpdateDelta => {
                    ground::update_step(&a.program, s).map(|(_, d)| d.to_string()).ok_or_else(unknown)
                }
                StaticProperty::FirstAssignLine => {
                    ground::first_assignment(&a.program, s).map(|x| x.line.to_string()).ok_or_else(unknown)
                }
            }
        }
    }
}

fn loop_of_unit(unit_id: &str) -> Option<NodeId> {
    unit_id.strip_prefix("loop-")?.parse().ok()
}

fn iterations_in(a: &Analysis, input: usize, loop_id: NodeId) -> usize {
    a.traces[input]
        .events
        .iter()
        .filter(|e| e.node_id == Some(loop_id) && matches!(e.detail, minilang::EventDetail::LoopIterStart { .. }))
        .count()
}

/// Two to four NEXT-VALUE questions over successive passes of one loop.
pub fn generate_step_chain(
    a: &Analysis,
    catalog: &Catalog,
    loop_id: NodeId,
    input_set_id: &str,
    seed: u64,
) -> Result<StepChain, QuestionError> {
    let input = ground::input_index(a, input_set_id)
        .ok_or_else(|| QuestionError::Unknown { what: "input set", name: input_set_id.into() })?;
    let t = catalog
        .by_grounding(GroundingKind::NextValue)
        .ok_or(QuestionError::Unknown { what: "template", name: "NEXT-VALUE".into() })?;
    let unknown_loop = || QuestionError::Unknown { what: "loop", name: loop_id.to_string() };
    if !a.program.node(loop_id).is_some_and(|n| n.kind.is_loop()) {
        return Err(unknown_loop());
    }
    let observed = iterations_in(a, input, loop_id);
    let insufficient = QuestionError::InsufficientIterations { loop_id, observed };
    if observed < 2 {
        return Err(insufficient);
    }
    let var = ground::chain_var(&a.program, loop_id).ok_or_else(unknown_loop)?;
    let mut steps = Vec::new();
    let mut references = Vec::new();
    for k in 0..observed.min(MAX_CHAIN_STEPS) {
        let Some(c) = ground::next_value(a, loop_id, input, &var, k) else { break };
        let (q, r) = build(a, t, &c, t.kcs[0], seed);
        steps.push(q);
        references.push(r);
    }
    if steps.len() < 2 {
        return Err(insufficient);
    }
    Ok(StepChain {
        chain_id: format!("chain/loop-{loop_id}/{var}/{input_set_id}"),
        unit_id: format!("loop-{loop_id}"),
        steps,
        references,
    })
}

/// Variable of a NEXT-VALUE subject such as `s@2`.
fn subject_var(subject: &str) -> &str {
    subject.split('@').next().unwrap_or(subject)
}

/// A narrower question on the same unit: a NEXT-VALUE step inside its loop
/// or the same template under another input set.
pub fn generate_followup(
    a: &Analysis,
    catalog: &Catalog,
    question: &Question,
    seed: u64,
    history: &AskHistory,
) -> Result<(Question, ReferenceReason), QuestionError> {
    let t = catalog
        .get(&question.template_id)
        .ok_or_else(|| QuestionError::Unknown { what: "template", name: question.template_id.clone() })?;
    let runs = a.traces.len();
    let origin = question.grounding.input_set_id.as_deref().and_then(|id| ground::input_index(a, id));
    let loop_id = loop_of_unit(&question.unit_id);
    let fresh = |c: &Candidate, t: &Template| !history.was_asked(&question_id(a, t, c));

    let step_in = |var: &str, inputs: Vec<usize>| -> Option<(Question, ReferenceReason)> {
        let nv = catalog.by_grounding(GroundingKind::NextValue)?;
        let l = loop_id?;
        for input in inputs {
            let mut k = 0;
            while let Some(c) = ground::next_value(a, l, input, var, k) {
                if fresh(&c, nv) {
                    return Some(build(a, nv, &c, question.kc, seed));
                }
                k += 1;
            }
        }
        None
    };
    let rotated = |first: Option<usize>| -> Vec<usize> {
        let mut order: Vec<usize> = (0..runs).collect();
        order.sort_by_key(|&i| (Some(i) != first, (i + runs - (seed % runs.max(1) as u64) as usize) % runs.max(1)));
        order
    };
    let reground = || -> Option<(Question, ReferenceReason)> {
        let cands: Vec<Candidate> = ground::candidates(a, t)
            .into_iter()
            .filter(|c| c.unit_id == question.unit_id && c.input.is_some() && c.input != origin && fresh(c, t))
            .collect();
        let same_subject: Vec<Candidate> = cands.iter().filter(|c| c.subject == question.subject).cloned().collect();
        let c = pick(if same_subject.is_empty() { cands } else { same_subject }, runs, seed)?;
        Some(build(a, t, &c, question.kc, seed))
    };
    let chain = || loop_id.and_then(|l| ground::chain_var(&a.program, l));

    let found = match t.grounding {
        GroundingKind::VarBeforeFinalIter | GroundingKind::ExitValue | GroundingKind::NextValue => {
            step_in(subject_var(&question.subject), rotated(origin)).or_else(reground)
        }
        _ if origin.is_some() => reground().or_else(|| chain().and_then(|v| step_in(&v, rotated(origin)))),
        _ => chain().and_then(|v| step_in(&v, rotated(None))),
    };
    found.ok_or(QuestionError::Exhausted)
}
