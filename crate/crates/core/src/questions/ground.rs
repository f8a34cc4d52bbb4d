//! Enumerates every concrete grounding of a template over an analysis.
//! Candidates come out in canonical order: program order first, then input
//! set order.

use minilang::{
    visit_stmts, EventDetail, Expr, ExprKind, NodeId, Program, Stmt, StmtKind, Termination, TraceLog, TraceQuery, Type,
};

use super::catalog::{GroundingKind, Template};
use super::distract::{comparison, negate, with_op, IntContext};
use super::{Oracle, StaticProperty};
use crate::facts::{
    condition_vars, counter_step, loop_init_update, loop_written_vars, Analysis, DynamicKind, StaticKind,
};

#[derive(Debug, Clone)]
pub(crate) enum Answer {
    Int(i64),
    Line(u32),
    Condition(Expr),
    Branch(bool),
    Output(Vec<String>),
}

#[derive(Debug, Clone)]
pub(crate) struct Candidate {
    pub unit_id: String,
    pub subject: String,
    /// Index into the analysis runs; `None` for purely structural questions.
    pub input: Option<usize>,
    pub fact_ids: Vec<String>,
    pub oracle: Oracle,
    pub answer: Answer,
    pub slots: Vec<(&'static str, String)>,
    pub ctx: IntContext,
    pub identifiers: Vec<String>,
}

pub(crate) fn candidates(a: &Analysis, t: &Template) -> Vec<Candidate> {
    match t.grounding {
        GroundingKind::LoopInit => loop_init(a),
        GroundingKind::LoopCond => loop_condition(a, false),
        GroundingKind::LoopTerm => loop_condition(a, true),
        GroundingKind::LoopUpdate => loop_update(a),
        GroundingKind::BranchPurpose => branch_purpose(a),
        GroundingKind::DeclPurpose => decl_purpose(a),
        GroundingKind::VarBeforeFinalIter => var_before_final(a),
        GroundingKind::IterCount => iter_count(a),
        GroundingKind::NextValue => next_values(a),
        GroundingKind::LastValidIndex => last_valid(a),
        GroundingKind::ExitValue => exit_value(a),
        GroundingKind::BranchOutcome => branch_outcome(a),
        GroundingKind::FinalOutput => final_output(a),
        GroundingKind::NonterminatingLine => nonterminating(a),
    }
}

/// Human-readable input assignment, e.g. `n = 3, xs = [1, 2]`.
pub(crate) fn render_inputs(a: &Analysis, input: usize) -> String {
    let inputs = &a.facts.per_input_runs[input].inputs;
    if inputs.is_empty() {
        return "no inputs".into();
    }
    a.program
        .main()
        .params
        .iter()
        .filter_map(|p| inputs.get(&p.name).map(|v| format!("{} = {v}", p.name)))
        .collect::<Vec<_>>()
        .join(", ")
}

pub(crate) fn input_index(a: &Analysis, input_set_id: &str) -> Option<usize> {
    a.facts.per_input_runs.iter().position(|r| r.input_set_id == input_set_id)
}

fn loops(p: &Program) -> Vec<(&Stmt, &Expr)> {
    let mut out = Vec::new();
    for f in &p.functions {
        visit_stmts(&f.body, &mut |s| match &s.kind {
            StmtKind::While { cond, .. } | StmtKind::For { cond, .. } => out.push((s, cond)),
            _ => {}
        });
    }
    out
}

fn static_fact_id(a: &Analysis, node: NodeId, pred: impl Fn(&StaticKind) -> bool) -> Option<String> {
    a.facts.static_facts.iter().find(|f| f.node_id == node && pred(&f.kind)).map(|f| f.id.clone())
}

fn loop_fact(a: &Analysis, node: NodeId) -> Vec<String> {
    static_fact_id(a, node, |k| matches!(k, StaticKind::Loop { .. })).into_iter().collect()
}

fn iterations_fact(a: &Analysis, input: usize, loop_id: NodeId) -> Vec<String> {
    let run = &a.facts.per_input_runs[input].input_set_id;
    a.facts
        .dynamic_facts
        .iter()
        .filter(|f| {
            &f.input_set_id == run && matches!(f.kind, DynamicKind::Iterations { loop_id: l, .. } if l == loop_id)
        })
        .map(|f| f.id.clone())
        .collect()
}

/// Literal compared against in a single comparison, if any.
fn cond_constant(cond: &Expr) -> Option<i64> {
    let (_, lhs, rhs) = comparison(cond)?;
    rhs.constant_value().or_else(|| lhs.constant_value())
}

fn loop_unit(id: NodeId) -> String {
    format!("loop-{id}")
}

fn trace_oracle(a: &Analysis, input: usize, query: TraceQuery) -> Oracle {
    Oracle::Trace { input_set_id: a.facts.per_input_runs[input].input_set_id.clone(), query }
}

fn normal(a: &Analysis, input: usize) -> bool {
    a.facts.per_input_runs[input].termination == Termination::Normal
}

fn iter_starts(t: &TraceLog, loop_id: NodeId) -> Vec<usize> {
    t.events
        .iter()
        .enumerate()
        .filter(|(_, e)| e.node_id == Some(loop_id) && matches!(e.detail, EventDetail::LoopIterStart { .. }))
        .map(|(i, _)| i)
        .collect()
}

/// Value of scalar `var` in effect just before event `pos`, in `frame`.
fn value_before(t: &TraceLog, pos: usize, var: &str, frame: u32) -> Option<i64> {
    t.events[..pos].iter().rev().find_map(|e| match &e.detail {
        EventDetail::VarWrite { name, index: None, new_value, .. } if name == var && e.frame == frame => {
            Some(*new_value)
        }
        _ => None,
    })
}

/// First event after `from`, in the same frame, that starts another pass of
/// the loop or lies outside it: the next evaluation of its condition.
fn next_check(p: &Program, t: &TraceLog, from: usize, loop_id: NodeId) -> Option<usize> {
    let frame = t.events[from].frame;
    t.events.iter().enumerate().skip(from + 1).find_map(|(j, e)| {
        let n = e.node_id?;
        if e.frame != frame {
            return None;
        }
        let restart = n == loop_id && matches!(e.detail, EventDetail::LoopIterStart { .. });
        (restart || !p.is_within(n, loop_id)).then_some(j)
    })
}

/// The event at which the loop's last entry finished: the first event after
/// its final header event, in the same frame, outside the loop.
fn exit_event(p: &Program, t: &TraceLog, loop_id: NodeId) -> Option<usize> {
    let entry =
        t.events.iter().rposition(|e| e.node_id == Some(loop_id) && matches!(e.detail, EventDetail::Stmt { .. }))?;
    let frame = t.events[entry].frame;
    t.events
        .iter()
        .enumerate()
        .skip(entry + 1)
        .find(|(_, e)| e.frame == frame && e.node_id.is_some_and(|n| !p.is_within(n, loop_id)))
        .map(|(j, _)| j)
}

fn loop_init(a: &Analysis) -> Vec<Candidate> {
    let mut out = Vec::new();
    for (s, cond) in loops(&a.program) {
        let f = &a.program.functions[a.program.node(s.id).map_or(0, |n| n.function)];
        let (Some(init), _) = loop_init_update(&a.program, f, s) else {
            continue;
        };
        let Some(init_stmt) = a.program.stmt(init) else { continue };
        let (var, value) = match &init_stmt.kind {
            StmtKind::Decl { name, init: Some(e), .. } | StmtKind::Assign { name, value: e } => {
                match e.constant_value() {
                    Some(v) => (name.clone(), v),
                    None => continue,
                }
            }
            _ => continue,
        };
        // Observe the initializer in the first run that executes it.
        let seen = a.traces.iter().enumerate().find_map(|(i, t)| {
            let pos = t
                .events
                .iter()
                .position(|e| e.node_id == Some(init) && matches!(e.detail, EventDetail::VarWrite { .. }))?;
            (pos + 1 < t.events.len()).then_some((i, pos as u64 + 1))
        });
        let Some((input, step)) = seen else { continue };
        out.push(Candidate {
            unit_id: loop_unit(s.id),
            subject: var.clone(),
            input: None,
            fact_ids: loop_fact(a, s.id),
            oracle: trace_oracle(a, input, TraceQuery::ValueAtStep { var: var.clone(), step }),
            answer: Answer::Int(value),
            slots: vec![("line", s.line.to_string()), ("var", var.clone())],
            ctx: IntContext { boundary: cond_constant(cond), ..Default::default() },
            identifiers: vec![var],
        });
    }
    out
}

fn loop_condition(a: &Analysis, negated: bool) -> Vec<Candidate> {
    let mut out = Vec::new();
    for (s, cond) in loops(&a.program) {
        let Some((op, _, _)) = comparison(cond) else { continue };
        let answer = if negated { with_op(cond, negate(op)) } else { cond.clone() };
        out.push(Candidate {
            unit_id: loop_unit(s.id),
            subject: "cond".into(),
            input: None,
            fact_ids: loop_fact(a, s.id),
            oracle: Oracle::Static { node_id: s.id, property: StaticProperty::ConditionText { negated } },
            answer: Answer::Condition(answer),
            slots: vec![("line", s.line.to_string())],
            ctx: IntContext::default(),
            identifiers: condition_vars(cond),
        });
    }
    out
}

fn loop_update(a: &Analysis) -> Vec<Candidate> {
    let mut out = Vec::new();
    for (s, cond) in loops(&a.program) {
        let Some((var, delta)) = update_step(&a.program, s) else { continue };
        out.push(Candidate {
            unit_id: loop_unit(s.id),
            subject: var.clone(),
            input: None,
            fact_ids: loop_fact(a, s.id),
            oracle: Oracle::Static { node_id: s.id, property: StaticProperty::UpdateDelta },
            answer: Answer::Int(delta),
            slots: vec![("line", s.line.to_string()), ("var", var.clone())],
            ctx: IntContext { boundary: cond_constant(cond), ..Default::default() },
            identifiers: vec![var],
        });
    }
    out
}

/// Variable and constant step of a loop's update statement.
pub(crate) fn update_step(p: &Program, s: &Stmt) -> Option<(String, i64)> {
    let f = &p.functions[p.node(s.id)?.function];
    let (_, update) = loop_init_update(p, f, s);
    let (var, delta) = counter_step(p.stmt(update?)?)?;
    Some((var.to_owned(), delta))
}

fn branch_purpose(a: &Analysis) -> Vec<Candidate> {
    let mut out = Vec::new();
    for s in a.program.statements() {
        let StmtKind::If { cond, else_body, .. } = &s.kind else { continue };
        let Some((op, _, _)) = comparison(cond) else { continue };
        let fact_ids: Vec<String> =
            static_fact_id(a, s.id, |k| matches!(k, StaticKind::Conditional { .. })).into_iter().collect();
        let arms = [(false, "then"), (true, "else")];
        for (negated, arm) in arms {
            if negated && else_body.is_none() {
                continue;
            }
            let answer = if negated { with_op(cond, negate(op)) } else { cond.clone() };
            out.push(Candidate {
                unit_id: format!("arm-{}-{arm}", s.id),
                subject: "cond".into(),
                input: None,
                fact_ids: fact_ids.clone(),
                oracle: Oracle::Static { node_id: s.id, property: StaticProperty::ConditionText { negated } },
                answer: Answer::Condition(answer),
                slots: vec![("line", s.line.to_string()), ("arm", format!("{arm}-branch"))],
                ctx: IntContext::default(),
                identifiers: condition_vars(cond),
            });
        }
    }
    out
}

/// First plain assignment to the variable declared by `decl`, in program
/// order within its function.
pub(crate) fn first_assignment<'p>(p: &'p Program, decl: &Stmt) -> Option<&'p Stmt> {
    let StmtKind::Decl { name, .. } = &decl.kind else { return None };
    let f = &p.functions[p.node(decl.id)?.function];
    let mut found = None;
    visit_stmts(&f.body, &mut |x| {
        if found.is_none() && x.id > decl.id && matches!(&x.kind, StmtKind::Assign { name: n, .. } if n == name) {
            found = Some(x);
        }
    });
    found
}

fn decl_purpose(a: &Analysis) -> Vec<Candidate> {
    let mut out = Vec::new();
    for s in a.program.statements() {
        let StmtKind::Decl { name, ty: Type::Int, .. } = &s.kind else { continue };
        let Some(assign) = first_assignment(&a.program, s) else { continue };
        if assign.line == s.line {
            continue;
        }
        let Some(unit) = a.unit_of(assign.id) else { continue };
        out.push(Candidate {
            unit_id: unit.unit_id.clone(),
            subject: name.clone(),
            input: None,
            fact_ids: static_fact_id(a, s.id, |k| matches!(k, StaticKind::Decl { .. })).into_iter().collect(),
            oracle: Oracle::Static { node_id: s.id, property: StaticProperty::FirstAssignLine },
            answer: Answer::Line(assign.line),
            slots: vec![("var", name.clone()), ("decl_line", s.line.to_string())],
            ctx: IntContext { boundary: Some(s.line as i64), ..Default::default() },
            identifiers: vec![name.clone()],
        });
    }
    out
}

fn var_before_final(a: &Analysis) -> Vec<Candidate> {
    let mut out = Vec::new();
    for f in &a.facts.dynamic_facts {
        let DynamicKind::VarBeforeFinalIter { loop_id, var, value } = &f.kind else { continue };
        let Some(input) = input_index(a, &f.input_set_id) else { continue };
        if !normal(a, input) {
            continue;
        }
        let t = &a.traces[input];
        let starts = iter_starts(t, *loop_id);
        let frame = t.events[*starts.last().expect("fact implies an iteration")].frame;
        let mut ctx = IntContext::default();
        if starts.len() >= 2 {
            ctx.iteration_values.extend(value_before(t, starts[starts.len() - 2], var, frame));
        }
        if let Some(exit) = exit_event(&a.program, t, *loop_id) {
            ctx.iteration_values.extend(value_before(t, exit, var, t.events[exit].frame));
        }
        ctx.init = value_before(t, starts[0], var, t.events[starts[0]].frame);
        out.push(Candidate {
            unit_id: loop_unit(*loop_id),
            subject: var.clone(),
            input: Some(input),
            fact_ids: vec![f.id.clone()],
            oracle: trace_oracle(a, input, TraceQuery::VarBeforeFinalIter { loop_id: *loop_id, var: var.clone() }),
            answer: Answer::Int(*value),
            slots: vec![("inputs", render_inputs(a, input)), ("var", var.clone()), ("line", f.line.to_string())],
            ctx,
            identifiers: vec![var.clone()],
        });
    }
    out
}

/// Constant initial value of the loop's control variable.
fn control_init(p: &Program, s: &Stmt) -> Option<i64> {
    let f = &p.functions[p.node(s.id)?.function];
    let (init, _) = loop_init_update(p, f, s);
    match &p.stmt(init?)?.kind {
        StmtKind::Decl { init: Some(e), .. } | StmtKind::Assign { value: e, .. } => e.constant_value(),
        _ => None,
    }
}

fn iter_count(a: &Analysis) -> Vec<Candidate> {
    let mut out = Vec::new();
    for f in &a.facts.dynamic_facts {
        let DynamicKind::Iterations { loop_id, count } = &f.kind else { continue };
        let Some(input) = input_index(a, &f.input_set_id) else { continue };
        let Some(s) = a.program.stmt(*loop_id) else { continue };
        if !normal(a, input) {
            continue;
        }
        let cond = s.exprs()[0];
        out.push(Candidate {
            unit_id: loop_unit(*loop_id),
            subject: "count".into(),
            input: Some(input),
            fact_ids: vec![f.id.clone()],
            oracle: trace_oracle(a, input, TraceQuery::IterCount { loop_id: *loop_id }),
            answer: Answer::Int(*count as i64),
            slots: vec![("inputs", render_inputs(a, input)), ("line", f.line.to_string())],
            ctx: IntContext { init: control_init(&a.program, s), boundary: cond_constant(cond), ..Default::default() },
            identifiers: condition_vars(cond),
        });
    }
    out
}

/// Variable a step chain follows through a loop: the first variable the loop
/// computes besides its counter, else the counter, else a condition variable.
pub(crate) fn chain_var(p: &Program, loop_id: NodeId) -> Option<String> {
    let s = p.stmt(loop_id)?;
    let control = condition_vars(s.exprs()[0]);
    let written = loop_written_vars(p, loop_id);
    written.iter().find(|v| !control.contains(v)).or(written.first()).or(control.first()).cloned()
}

/// NEXT-VALUE question for pass `k` (0-based) of a loop in one run.
pub(crate) fn next_value(a: &Analysis, loop_id: NodeId, input: usize, var: &str, k: usize) -> Option<Candidate> {
    let t = a.traces.get(input)?;
    let s = a.program.stmt(loop_id)?;
    let starts = iter_starts(t, loop_id);
    let start = *starts.get(k)?;
    let frame = t.events[start].frame;
    let current = value_before(t, start, var, frame)?;
    let check = next_check(&a.program, t, start, loop_id)?;
    let answer = value_before(t, check, var, frame)?;
    let mut ctx = IntContext::default();
    // Values the variable takes at neighbouring passes.
    ctx.iteration_values.push(current);
    if let Some(&later) = starts.get(k + 2) {
        ctx.iteration_values.extend(value_before(t, later, var, t.events[later].frame));
    }
    Some(Candidate {
        unit_id: loop_unit(loop_id),
        subject: format!("{var}@{k}"),
        input: Some(input),
        fact_ids: iterations_fact(a, input, loop_id),
        oracle: trace_oracle(a, input, TraceQuery::ValueAtStep { var: var.to_owned(), step: check as u64 }),
        answer: Answer::Int(answer),
        slots: vec![
            ("inputs", render_inputs(a, input)),
            ("pass", (k + 1).to_string()),
            ("line", s.line.to_string()),
            ("var", var.to_owned()),
            ("current", current.to_string()),
        ],
        ctx,
        identifiers: vec![var.to_owned()],
    })
}

fn next_values(a: &Analysis) -> Vec<Candidate> {
    let mut out = Vec::new();
    for (s, _) in loops(&a.program) {
        let Some(var) = chain_var(&a.program, s.id) else { continue };
        for input in 0..a.traces.len() {
            let mut k = 0;
            while let Some(c) = next_value(a, s.id, input, &var, k) {
                out.push(c);
                k += 1;
            }
        }
    }
    out
}

fn last_valid(a: &Analysis) -> Vec<Candidate> {
    let mut out = Vec::new();
    for f in &a.facts.dynamic_facts {
        let DynamicKind::LastValidIndex { array, index } = &f.kind else { continue };
        let Some(input) = input_index(a, &f.input_set_id) else { continue };
        let Some(unit) = a.unit_of(f.node_id) else { continue };
        let function = a.program.node(f.node_id).map_or(0, |n| n.function);
        let size = match a.program.variable_type_in(function, array) {
            Some(Type::Array(n)) => Some(n as i64),
            _ => None,
        };
        out.push(Candidate {
            unit_id: unit.unit_id.clone(),
            subject: array.clone(),
            input: Some(input),
            fact_ids: vec![f.id.clone()],
            oracle: trace_oracle(a, input, TraceQuery::LastValidArrayIndex { name: array.clone() }),
            answer: Answer::Int(*index),
            slots: vec![("inputs", render_inputs(a, input)), ("var", array.clone())],
            ctx: IntContext { boundary: size, ..Default::default() },
            identifiers: vec![array.clone()],
        });
    }
    out
}

fn exit_value(a: &Analysis) -> Vec<Candidate> {
    let mut out = Vec::new();
    for (s, cond) in loops(&a.program) {
        let written = loop_written_vars(&a.program, s.id);
        let Some(var) = condition_vars(cond).into_iter().find(|v| written.contains(v)) else {
            continue;
        };
        for input in 0..a.traces.len() {
            if !normal(a, input) {
                continue;
            }
            let t = &a.traces[input];
            let Some(exit) = exit_event(&a.program, t, s.id) else { continue };
            let Some(value) = value_before(t, exit, &var, t.events[exit].frame) else {
                continue;
            };
            let mut ctx = IntContext { boundary: cond_constant(cond), ..Default::default() };
            if let Some(&last) = iter_starts(t, s.id).last() {
                ctx.iteration_values.extend(value_before(t, last, &var, t.events[last].frame));
            }
            out.push(Candidate {
                unit_id: loop_unit(s.id),
                subject: var.clone(),
                input: Some(input),
                fact_ids: iterations_fact(a, input, s.id),
                oracle: trace_oracle(a, input, TraceQuery::ValueAtStep { var: var.clone(), step: exit as u64 }),
                answer: Answer::Int(value),
                slots: vec![("inputs", render_inputs(a, input)), ("var", var.clone()), ("line", s.line.to_string())],
                ctx,
                identifiers: vec![var.clone()],
            });
        }
    }
    out
}

fn branch_outcome(a: &Analysis) -> Vec<Candidate> {
    let mut out = Vec::new();
    for f in &a.facts.dynamic_facts {
        let DynamicKind::BranchTaken { branch_id, occurrence, taken } = &f.kind else {
            continue;
        };
        let Some(input) = input_index(a, &f.input_set_id) else { continue };
        let Some(StmtKind::If { cond, .. }) = a.program.stmt(*branch_id).map(|s| &s.kind) else {
            continue;
        };
        out.push(Candidate {
            unit_id: format!("arm-{branch_id}-then"),
            subject: format!("occurrence-{occurrence}"),
            input: Some(input),
            fact_ids: vec![f.id.clone()],
            oracle: trace_oracle(a, input, TraceQuery::BranchOutcome { node_id: *branch_id, occurrence: *occurrence }),
            answer: Answer::Branch(*taken),
            slots: vec![
                ("inputs", render_inputs(a, input)),
                ("line", f.line.to_string()),
                ("occurrence", (occurrence + 1).to_string()),
            ],
            ctx: IntContext::default(),
            identifiers: condition_vars(cond),
        });
    }
    out
}

fn final_output(a: &Analysis) -> Vec<Candidate> {
    let mut out = Vec::new();
    let prints: Vec<&Stmt> =
        a.program.statements().into_iter().filter(|s| matches!(s.kind, StmtKind::Print { .. })).collect();
    let mut owners: Vec<String> = Vec::new();
    for p in &prints {
        if let Some(u) = a.unit_of(p.id) {
            if !owners.contains(&u.unit_id) {
                owners.push(u.unit_id.clone());
            }
        }
    }
    for f in &a.facts.dynamic_facts {
        let DynamicKind::Output { text } = &f.kind else { continue };
        let Some(input) = input_index(a, &f.input_set_id) else { continue };
        if !normal(a, input) {
            continue;
        }
        // The last print executed supplies the identifiers and the initializer.
        let last = a.program.stmt(f.node_id);
        let (identifiers, init) = match last.map(|s| &s.kind) {
            Some(StmtKind::Print { value }) => {
                let vars: Vec<String> = value.read_variables().into_iter().map(str::to_owned).collect();
                let init = match &value.kind {
                    ExprKind::Var(v) => declared_constant(&a.program, f.node_id, v),
                    _ => None,
                };
                (vars, init)
            }
            _ => (Vec::new(), None),
        };
        for unit in &owners {
            out.push(Candidate {
                unit_id: unit.clone(),
                subject: "output".into(),
                input: Some(input),
                fact_ids: vec![f.id.clone()],
                oracle: trace_oracle(a, input, TraceQuery::FinalOutput),
                answer: Answer::Output(text.split('\n').map(str::to_owned).collect()),
                slots: vec![("inputs", render_inputs(a, input))],
                ctx: IntContext { init, ..Default::default() },
                identifiers: identifiers.clone(),
            });
        }
    }
    out
}

/// Constant initializer of `var`'s declaration in the function holding `at`.
fn declared_constant(p: &Program, at: NodeId, var: &str) -> Option<i64> {
    let f = &p.functions[p.node(at)?.function];
    let mut found = None;
    visit_stmts(&f.body, &mut |s| {
        if let StmtKind::Decl { name, init: Some(e), .. } = &s.kind {
            if name == var && found.is_none() {
                found = e.constant_value();
            }
        }
    });
    found
}

fn nonterminating(a: &Analysis) -> Vec<Candidate> {
    let mut out = Vec::new();
    for f in &a.facts.dynamic_facts {
        let DynamicKind::Nontermination { loop_id, stalled_vars } = &f.kind else {
            continue;
        };
        let Some(input) = input_index(a, &f.input_set_id) else { continue };
        let Some(s) = a.program.stmt(*loop_id) else { continue };
        let mut identifiers = stalled_vars.clone();
        if identifiers.is_empty() {
            identifiers = condition_vars(s.exprs()[0]);
        }
        let header = a.program.node(*loop_id).map(|n| a.program.functions[n.function].line);
        out.push(Candidate {
            unit_id: loop_unit(*loop_id),
            subject: "loop".into(),
            input: Some(input),
            fact_ids: vec![f.id.clone()],
            oracle: trace_oracle(a, input, TraceQuery::NonterminatingLoopLine),
            answer: Answer::Line(f.line),
            slots: vec![
                ("inputs", render_inputs(a, input)),
                ("var", identifiers.first().cloned().unwrap_or_else(|| "its variables".into())),
            ],
            ctx: IntContext { boundary: header.map(i64::from), ..Default::default() },
            identifiers,
        });
    }
    out
}
