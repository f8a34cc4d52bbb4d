//! Deterministic facts about a submission: structure, per-input runtime
//! observations, and the logic units questions are organised around.

use std::collections::{BTreeMap, BTreeSet};

use minilang::{
    execute, nonterminating_loop, BinOp, EventDetail, Expr, ExprKind, FunctionDef, Inputs, NodeId, NodeKind, Program,
    Stmt, StmtKind, Termination, TraceLog, Type, UnOp, Value,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::kc::Kc;

/// Branch outcomes recorded per `if` node and run.
pub const MAX_BRANCH_OCCURRENCES: u64 = 16;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StaticFact {
    pub id: String,
    pub node_id: NodeId,
    pub line: u32,
    #[serde(flatten)]
    pub kind: StaticKind,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum StaticKind {
    Function {
        name: String,
        arity: usize,
    },
    Decl {
        name: String,
        #[serde(rename = "type")]
        ty: Type,
    },
    Array {
        name: String,
        size: usize,
    },
    Loop {
        loop_kind: NodeKind,
        init_node: Option<NodeId>,
        cond_node: NodeId,
        update_node: Option<NodeId>,
    },
    Conditional {
        cond_node: NodeId,
        has_else: bool,
    },
}

impl StaticKind {
    fn rank(&self) -> u8 {
        match self {
            StaticKind::Function { .. } => 0,
            StaticKind::Decl { .. } => 1,
            StaticKind::Array { .. } => 2,
            StaticKind::Loop { .. } => 3,
            StaticKind::Conditional { .. } => 4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DynamicFact {
    pub id: String,
    pub input_set_id: String,
    pub node_id: NodeId,
    pub line: u32,
    #[serde(flatten)]
    pub kind: DynamicKind,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum DynamicKind {
    Iterations {
        loop_id: NodeId,
        count: u64,
    },
    FinalValue {
        var: String,
        value: i64,
    },
    VarBeforeFinalIter {
        loop_id: NodeId,
        var: String,
        value: i64,
    },
    BranchTaken {
        branch_id: NodeId,
        occurrence: u64,
        taken: bool,
    },
    LastValidIndex {
        array: String,
        index: i64,
    },
    Output {
        text: String,
    },
    /// Loop blamed for exhausting the step budget, with the condition
    /// variables that are never written in its body.
    Nontermination {
        loop_id: NodeId,
        stalled_vars: Vec<String>,
    },
    Fault {
        reason: String,
    },
}

impl DynamicKind {
    fn rank(&self) -> u8 {
        match self {
            DynamicKind::Iterations { .. } => 0,
            DynamicKind::FinalValue { .. } => 1,
            DynamicKind::VarBeforeFinalIter { .. } => 2,
            DynamicKind::BranchTaken { .. } => 3,
            DynamicKind::LastValidIndex { .. } => 4,
            DynamicKind::Output { .. } => 5,
            DynamicKind::Nontermination { .. } => 6,
            DynamicKind::Fault { .. } => 7,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum UnitKind {
    FunctionBody,
    LoopBody,
    BranchArm,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LogicUnit {
    pub unit_id: String,
    pub kind: UnitKind,
    /// Function, loop or `if` node the unit hangs off.
    pub root: NodeId,
    pub line: u32,
    pub function: String,
    pub parent: Option<String>,
    /// Statements whose innermost unit is this one.
    pub node_ids: Vec<NodeId>,
    pub knowledge_components: BTreeSet<Kc>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunRecord {
    pub input_set_id: String,
    pub inputs: Inputs,
    pub termination: Termination,
    pub events: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CodeFacts {
    pub static_facts: Vec<StaticFact>,
    pub dynamic_facts: Vec<DynamicFact>,
    pub logic_units: Vec<LogicUnit>,
    pub per_input_runs: Vec<RunRecord>,
}

impl CodeFacts {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("facts always serialize")
    }

    pub fn unit(&self, unit_id: &str) -> Option<&LogicUnit> {
        self.logic_units.iter().find(|u| u.unit_id == unit_id)
    }

    pub fn run(&self, input_set_id: &str) -> Option<&RunRecord> {
        self.per_input_runs.iter().find(|r| r.input_set_id == input_set_id)
    }

    /// Every knowledge component tagged on some unit.
    pub fn knowledge_components(&self) -> BTreeSet<Kc> {
        self.logic_units.iter().flat_map(|u| u.knowledge_components.iter().copied()).collect()
    }
}

/// A program together with its facts and the traces they came from.
#[derive(Debug, Clone)]
pub struct Analysis {
    pub program: Program,
    pub facts: CodeFacts,
    /// One trace per entry of `facts.per_input_runs`, in the same order.
    pub traces: Vec<TraceLog>,
}

impl Analysis {
    pub fn trace(&self, input_set_id: &str) -> Option<&TraceLog> {
        let i = self.facts.per_input_runs.iter().position(|r| r.input_set_id == input_set_id)?;
        self.traces.get(i)
    }

    /// The unit whose statement partition holds `node`, walking up from
    /// expressions to their statement.
    pub fn unit_of(&self, node: NodeId) -> Option<&LogicUnit> {
        let mut cur = Some(node);
        while let Some(n) = cur {
            if let Some(u) = self.facts.logic_units.iter().find(|u| u.node_ids.contains(&n)) {
                return Some(u);
            }
            cur = self.program.node(n).and_then(|i| i.parent);
        }
        None
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FactError {
    #[error("invalid inputs for {input_set_id}: {reason}")]
    InvalidInputs { input_set_id: String, reason: String },
}

pub fn input_set_id(index: usize) -> String {
    format!("input-{index}")
}

/// Builds the full fact record for `program` under each input set.
pub fn analyze(program: &Program, input_sets: &[Inputs], budget: u64) -> Result<Analysis, FactError> {
    check_all(program, input_sets)?;
    let traces: Vec<TraceLog> = input_sets.iter().map(|i| execute(program, i, budget)).collect();
    let per_input_runs = traces
        .iter()
        .enumerate()
        .map(|(i, t)| RunRecord {
            input_set_id: input_set_id(i),
            inputs: t.inputs.clone(),
            termination: t.termination,
            events: t.events.len(),
        })
        .collect();
    let facts = CodeFacts {
        static_facts: extract_static(program),
        dynamic_facts: dynamic_from_traces(program, &traces),
        logic_units: decompose(program),
        per_input_runs,
    };
    Ok(Analysis { program: program.clone(), facts, traces })
}

fn check_all(program: &Program, input_sets: &[Inputs]) -> Result<(), FactError> {
    for (i, inputs) in input_sets.iter().enumerate() {
        minilang::check_inputs(program, inputs)
            .map_err(|reason| FactError::InvalidInputs { input_set_id: input_set_id(i), reason })?;
    }
    Ok(())
}

pub fn extract_static(program: &Program) -> Vec<StaticFact> {
    let mut out: Vec<(u32, u8, NodeId, StaticKind)> = Vec::new();
    for f in &program.functions {
        out.push((f.line, 0, f.id, StaticKind::Function { name: f.name.clone(), arity: f.params.len() }));
        for p in &f.params {
            if let Type::Array(size) = p.ty {
                out.push((f.line, 2, f.id, StaticKind::Array { name: p.name.clone(), size }));
            }
        }
        minilang::visit_stmts(&f.body, &mut |s| match &s.kind {
            StmtKind::Decl { name, ty, .. } => {
                let decl = StaticKind::Decl { name: name.clone(), ty: *ty };
                out.push((s.line, decl.rank(), s.id, decl));
                if let Type::Array(size) = ty {
                    let arr = StaticKind::Array { name: name.clone(), size: *size };
                    out.push((s.line, arr.rank(), s.id, arr));
                }
            }
            StmtKind::While { cond, .. } | StmtKind::For { cond, .. } => {
                let (init_node, update_node) = loop_init_update(program, f, s);
                let kind =
                    StaticKind::Loop { loop_kind: s.kind.node_kind(), init_node, cond_node: cond.id, update_node };
                out.push((s.line, kind.rank(), s.id, kind));
            }
            StmtKind::If { cond, else_body, .. } => {
                let kind = StaticKind::Conditional { cond_node: cond.id, has_else: else_body.is_some() };
                out.push((s.line, kind.rank(), s.id, kind));
            }
            _ => {}
        });
    }
    out.sort_by_key(|(line, rank, node, _)| (*line, *rank, *node));
    out.into_iter()
        .enumerate()
        .map(|(i, (line, _, node_id, kind))| StaticFact { id: format!("sf-{i}"), node_id, line, kind })
        .collect()
}

/// Scalar variables read by a loop condition.
pub fn condition_vars(cond: &Expr) -> Vec<String> {
    let mut out: Vec<String> = Vec::new();
    cond.walk(&mut |e| {
        if let ExprKind::Var(n) = &e.kind {
            if !out.contains(n) {
                out.push(n.clone());
            }
        }
    });
    out
}

/// Initialising and updating statements of a loop. For a `while` these are
/// the last write to a condition variable before the loop and the last write
/// to one inside its body.
pub fn loop_init_update(program: &Program, f: &FunctionDef, s: &Stmt) -> (Option<NodeId>, Option<NodeId>) {
    match &s.kind {
        StmtKind::For { init, update, .. } => (Some(init.id), Some(update.id)),
        StmtKind::While { cond, .. } => {
            let vars = condition_vars(cond);
            let writes_cond = |x: &Stmt| x.written_variable().is_some_and(|w| vars.iter().any(|v| v == w));
            let mut init = None;
            let mut update = None;
            minilang::visit_stmts(&f.body, &mut |x| {
                if !writes_cond(x) {
                    return;
                }
                if x.id < s.id && !program.is_within(s.id, x.id) {
                    init = Some(x.id);
                } else if x.id != s.id && program.is_within(x.id, s.id) {
                    update = Some(x.id);
                }
            });
            (init, update)
        }
        _ => (None, None),
    }
}

/// Variables read by a loop condition that are never written inside the
/// loop other than by `x = x`.
pub fn unwritten_condition_vars(s: &Stmt) -> Vec<String> {
    let (cond, bodies): (&Expr, Vec<&Stmt>) = match &s.kind {
        StmtKind::While { cond, body } => (cond, collect(body)),
        StmtKind::For { cond, body, update, .. } => {
            let mut all = collect(body);
            all.push(update);
            (cond, all)
        }
        _ => return Vec::new(),
    };
    let mut written = BTreeSet::new();
    for x in bodies {
        let identity =
            matches!(&x.kind, StmtKind::Assign { name, value } if matches!(&value.kind, ExprKind::Var(v) if v == name));
        if let (Some(w), false) = (x.written_variable(), identity) {
            written.insert(w.to_owned());
        }
    }
    condition_reads(cond).into_iter().filter(|v| !written.contains(v)).collect()
}

/// True when no variable in the loop condition can change inside the loop,
/// including conditions that read no variables at all.
pub fn is_stalled(s: &Stmt) -> bool {
    match &s.kind {
        StmtKind::While { cond, .. } | StmtKind::For { cond, .. } => {
            unwritten_condition_vars(s).len() == condition_reads(cond).len()
        }
        _ => false,
    }
}

fn condition_reads(cond: &Expr) -> Vec<String> {
    let mut reads: Vec<String> = Vec::new();
    cond.walk(&mut |e| match &e.kind {
        ExprKind::Var(n) | ExprKind::Index { name: n, .. } if !reads.contains(n) => reads.push(n.clone()),
        _ => {}
    });
    reads
}

fn collect(body: &[Stmt]) -> Vec<&Stmt> {
    let mut out = Vec::new();
    minilang::visit_stmts(body, &mut |s| out.push(s));
    out
}

/// Runs the program once per input set and derives the dynamic facts.
pub fn extract_dynamic(program: &Program, input_sets: &[Inputs], budget: u64) -> Result<Vec<DynamicFact>, FactError> {
    check_all(program, input_sets)?;
    let traces: Vec<TraceLog> = input_sets.iter().map(|i| execute(program, i, budget)).collect();
    Ok(dynamic_from_traces(program, &traces))
}

fn dynamic_from_traces(program: &Program, traces: &[TraceLog]) -> Vec<DynamicFact> {
    let mut out: Vec<(String, NodeId, u32, DynamicKind)> = Vec::new();
    for (i, t) in traces.iter().enumerate() {
        let id = input_set_id(i);
        for (node, line, kind) in run_facts(program, t) {
            out.push((id.clone(), node, line, kind));
        }
    }
    out.sort_by_key(|(_, node, line, kind)| (*line, kind.rank(), *node));
    out.into_iter()
        .enumerate()
        .map(|(i, (input_set_id, node_id, line, kind))| DynamicFact {
            id: format!("df-{i}"),
            input_set_id,
            node_id,
            line,
            kind,
        })
        .collect()
}

fn run_facts(program: &Program, t: &TraceLog) -> Vec<(NodeId, u32, DynamicKind)> {
    let mut out = Vec::new();
    let line_of = |id: NodeId| program.node(id).map_or(0, |n| n.line);

    let mut reached: BTreeSet<NodeId> = BTreeSet::new();
    let mut iterations: BTreeMap<NodeId, u64> = BTreeMap::new();
    let mut last_start: BTreeMap<NodeId, usize> = BTreeMap::new();
    let mut finals: BTreeMap<String, (i64, NodeId, u32)> = BTreeMap::new();
    let mut branches: BTreeMap<NodeId, u64> = BTreeMap::new();
    let mut last_index: BTreeMap<String, (i64, NodeId, u32)> = BTreeMap::new();
    let mut printed: Vec<(&str, NodeId, u32)> = Vec::new();

    for (pos, e) in t.events.iter().enumerate() {
        let node = e.node_id.unwrap_or(0);
        match &e.detail {
            EventDetail::Stmt { node_kind } if node_kind.is_loop() => {
                reached.insert(node);
            }
            EventDetail::LoopIterStart { .. } => {
                *iterations.entry(node).or_default() += 1;
                last_start.insert(node, pos);
            }
            EventDetail::VarWrite { name, index: None, new_value, .. } if e.frame == 0 => {
                finals.insert(name.clone(), (*new_value, node, e.line));
            }
            EventDetail::Branch { taken } => {
                let n = branches.entry(node).or_default();
                if *n < MAX_BRANCH_OCCURRENCES {
                    out.push((
                        node,
                        e.line,
                        DynamicKind::BranchTaken { branch_id: node, occurrence: *n, taken: *taken },
                    ));
                }
                *n += 1;
            }
            EventDetail::ArrayAccess { name, index, in_bounds: true } => {
                last_index.insert(name.clone(), (*index, node, e.line));
            }
            EventDetail::Output { text } => printed.push((text, node, e.line)),
            EventDetail::Fault { reason } => out.push((node, e.line, DynamicKind::Fault { reason: reason.clone() })),
            _ => {}
        }
    }

    for &loop_id in &reached {
        let line = line_of(loop_id);
        let count = iterations.get(&loop_id).copied().unwrap_or(0);
        out.push((loop_id, line, DynamicKind::Iterations { loop_id, count }));
        let Some(&start) = last_start.get(&loop_id) else {
            continue;
        };
        let frame = t.events[start].frame;
        for var in loop_written_vars(program, loop_id) {
            let before = t.events[..start].iter().rev().find_map(|e| match &e.detail {
                EventDetail::VarWrite { name, index: None, new_value, .. } if *name == var && e.frame == frame => {
                    Some(*new_value)
                }
                _ => None,
            });
            if let Some(value) = before {
                out.push((loop_id, line, DynamicKind::VarBeforeFinalIter { loop_id, var, value }));
            }
        }
    }
    for (var, (value, node, line)) in finals {
        out.push((node, line, DynamicKind::FinalValue { var, value }));
    }
    for (array, (index, node, line)) in last_index {
        out.push((node, line, DynamicKind::LastValidIndex { array, index }));
    }
    if let Some(&(_, node, line)) = printed.last() {
        let text = printed.iter().map(|p| p.0).collect::<Vec<_>>().join("\n");
        out.push((node, line, DynamicKind::Output { text }));
    }
    if let Some(loop_id) = blamed_loop(t) {
        let stalled = program.stmt(loop_id).map(unwritten_condition_vars).unwrap_or_default();
        out.push((loop_id, line_of(loop_id), DynamicKind::Nontermination { loop_id, stalled_vars: stalled }));
    }
    debug_assert_eq!(blamed_loop(t), nonterminating_loop(t));
    out
}

/// Counts loop iteration starts in the last 100 events (or the whole trace
/// when none fall in that window) and picks the most frequent loop, latest
/// occurrence winning ties.
fn blamed_loop(t: &TraceLog) -> Option<NodeId> {
    if t.termination != Termination::StepBudgetExceeded {
        return None;
    }
    let pick = |from: usize| {
        let mut tally: BTreeMap<NodeId, (usize, usize)> = BTreeMap::new();
        for (pos, e) in t.events.iter().enumerate().skip(from) {
            if let (EventDetail::LoopIterStart { .. }, Some(id)) = (&e.detail, e.node_id) {
                let entry = tally.entry(id).or_default();
                entry.0 += 1;
                entry.1 = pos;
            }
        }
        tally.into_iter().max_by_key(|(_, v)| *v).map(|(id, _)| id)
    };
    pick(t.events.len().saturating_sub(100)).or_else(|| pick(0))
}

/// Scalars assigned inside a loop that are in scope at the loop header: the
/// for-initializer and any variable declared outside the body.
pub fn loop_written_vars(program: &Program, loop_id: NodeId) -> Vec<String> {
    let Some(s) = program.stmt(loop_id) else {
        return Vec::new();
    };
    let function = program.node(loop_id).map_or(0, |n| n.function);
    let mut body_decls = BTreeSet::new();
    let mut written: Vec<String> = Vec::new();
    let mut consider = |x: &Stmt, in_body: bool| match &x.kind {
        StmtKind::Decl { name, ty: Type::Int, .. } => {
            if in_body {
                body_decls.insert(name.clone());
            } else if !written.contains(name) {
                written.push(name.clone());
            }
        }
        StmtKind::Assign { name, .. } if !written.contains(name) => written.push(name.clone()),
        _ => {}
    };
    match &s.kind {
        StmtKind::For { init, update, body, .. } => {
            consider(init, false);
            for x in collect(body) {
                consider(x, true);
            }
            consider(update, false);
        }
        StmtKind::While { body, .. } => {
            for x in collect(body) {
                consider(x, true);
            }
        }
        _ => {}
    }
    let scalar = |n: &String| program.variable_type_in(function, n) == Some(Type::Int);
    // Control variables first, so questions prefer the loop counter.
    let control = match &s.kind {
        StmtKind::While { cond, .. } | StmtKind::For { cond, .. } => condition_vars(cond),
        _ => Vec::new(),
    };
    let mut out: Vec<String> = written.into_iter().filter(|n| !body_decls.contains(n) && scalar(n)).collect();
    out.sort_by_key(|n| !control.contains(n));
    out
}

/// Splits every function into units and tags each with knowledge components.
pub fn decompose(program: &Program) -> Vec<LogicUnit> {
    let mut units = Vec::new();
    for f in &program.functions {
        let unit_id = format!("fn-{}", f.name);
        units.push(LogicUnit {
            unit_id: unit_id.clone(),
            kind: UnitKind::FunctionBody,
            root: f.id,
            line: f.line,
            function: f.name.clone(),
            parent: None,
            node_ids: Vec::new(),
            knowledge_components: BTreeSet::new(),
        });
        let idx = units.len() - 1;
        fill(f, &f.body, idx, &mut units);
    }
    for u in &mut units {
        u.knowledge_components = tag_unit(program, u);
    }
    units
}

fn fill(f: &FunctionDef, body: &[Stmt], unit: usize, units: &mut Vec<LogicUnit>) {
    for s in body {
        units[unit].node_ids.push(s.id);
        let child = |units: &mut Vec<LogicUnit>, id: String, kind: UnitKind| {
            let parent = units[unit].unit_id.clone();
            units.push(LogicUnit {
                unit_id: id,
                kind,
                root: s.id,
                line: s.line,
                function: f.name.clone(),
                parent: Some(parent),
                node_ids: Vec::new(),
                knowledge_components: BTreeSet::new(),
            });
            units.len() - 1
        };
        match &s.kind {
            StmtKind::If { then_body, else_body, .. } => {
                let t = child(units, format!("arm-{}-then", s.id), UnitKind::BranchArm);
                fill(f, then_body, t, units);
                if let Some(e) = else_body {
                    let u = child(units, format!("arm-{}-else", s.id), UnitKind::BranchArm);
                    fill(f, e, u, units);
                }
            }
            StmtKind::While { body, .. } => {
                let l = child(units, format!("loop-{}", s.id), UnitKind::LoopBody);
                fill(f, body, l, units);
            }
            StmtKind::For { init, update, body, .. } => {
                let l = child(units, format!("loop-{}", s.id), UnitKind::LoopBody);
                units[l].node_ids.push(init.id);
                fill(f, body, l, units);
                units[l].node_ids.push(update.id);
            }
            _ => {}
        }
    }
}

/// `x = x + c` or `x = x - c` with a literal `c`.
pub fn counter_step(s: &Stmt) -> Option<(&str, i64)> {
    let StmtKind::Assign { name, value } = &s.kind else {
        return None;
    };
    let ExprKind::Binary { op, lhs, rhs } = &value.kind else {
        return None;
    };
    let var_is = |e: &Expr| matches!(&e.kind, ExprKind::Var(v) if v == name);
    match op {
        BinOp::Add if var_is(lhs) => rhs.constant_value().map(|c| (name.as_str(), c)),
        BinOp::Add if var_is(rhs) => lhs.constant_value().map(|c| (name.as_str(), c)),
        BinOp::Sub if var_is(lhs) => rhs.constant_value().map(|c| (name.as_str(), c.wrapping_neg())),
        _ => None,
    }
}

fn tag_unit(program: &Program, u: &LogicUnit) -> BTreeSet<Kc> {
    let mut kcs = BTreeSet::new();
    let mut exprs: Vec<&Expr> = Vec::new();
    let mut counter_steps: BTreeSet<NodeId> = BTreeSet::new();
    for &id in &u.node_ids {
        let Some(s) = program.stmt(id) else { continue };
        match &s.kind {
            StmtKind::If { .. } => {
                kcs.insert(Kc::Conditionals);
            }
            StmtKind::ArrayAssign { .. } => {
                kcs.insert(Kc::Arrays);
            }
            _ => {}
        }
        if counter_step(s).is_some() {
            if let StmtKind::Assign { value, .. } = &s.kind {
                counter_steps.insert(value.id);
            }
        }
        // A loop or if header's condition belongs to the unit it controls.
        if !matches!(s.kind, StmtKind::If { .. } | StmtKind::While { .. } | StmtKind::For { .. }) {
            exprs.extend(s.exprs());
        }
    }
    match u.kind {
        UnitKind::LoopBody => {
            kcs.insert(Kc::Loops);
            kcs.insert(Kc::Tracing);
            if let Some(s) = program.stmt(u.root) {
                exprs.extend(s.exprs());
                if is_stalled(s) {
                    kcs.insert(Kc::Termination);
                }
            }
        }
        UnitKind::BranchArm => {
            kcs.insert(Kc::Conditionals);
        }
        UnitKind::FunctionBody => {
            if program.main().id != u.root {
                kcs.insert(Kc::Functions);
            }
        }
    }
    for e in exprs {
        e.walk(&mut |x| match &x.kind {
            ExprKind::Index { .. } => {
                kcs.insert(Kc::Arrays);
            }
            ExprKind::Call { .. } => {
                kcs.insert(Kc::Functions);
            }
            ExprKind::Binary { op: BinOp::Mul | BinOp::Div | BinOp::Rem, .. } => {
                kcs.insert(Kc::Arithmetic);
            }
            ExprKind::Binary { op: BinOp::Add | BinOp::Sub, .. } if !counter_steps.contains(&x.id) => {
                kcs.insert(Kc::Arithmetic);
            }
            ExprKind::Unary { op: UnOp::Neg, operand } if operand.constant_value().is_none() => {
                kcs.insert(Kc::Arithmetic);
            }
            _ => {}
        });
    }
    kcs
}

/// Inclusive value range for one input parameter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Domain {
    pub min: i64,
    pub max: i64,
}

impl Default for Domain {
    fn default() -> Self {
        Domain { min: -8, max: 8 }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct InputDomains {
    #[serde(default)]
    pub default: Domain,
    /// Per-parameter overrides.
    #[serde(default)]
    pub params: BTreeMap<String, Domain>,
}

/// Draws `count` input maps for `main`, reproducibly from `seed`.
pub fn sample_inputs(program: &Program, seed: u64, count: usize, domains: &InputDomains) -> Vec<Inputs> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            program
                .main()
                .params
                .iter()
                .map(|p| {
                    let d = domains.params.get(&p.name).copied().unwrap_or(domains.default);
                    let v = match p.ty {
                        Type::Int => Value::Int(rng.gen_range(d.min..=d.max)),
                        Type::Array(n) => Value::Array((0..n).map(|_| rng.gen_range(d.min..=d.max)).collect()),
                    };
                    (p.name.clone(), v)
                })
                .collect()
        })
        .collect()
}
