//! Point queries over a recorded trace.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ast::{NodeId, NodeKind, Program, Type};
use crate::trace::{EventDetail, Termination, TraceLog};

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "query", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum TraceQuery {
    /// Value of `var` immediately before the last iteration of the loop starts.
    VarBeforeFinalIter {
        loop_id: NodeId,
        var: String,
    },
    IterCount {
        loop_id: NodeId,
    },
    /// Value of `var` in effect just before event `step`, in that event's frame.
    ValueAtStep {
        var: String,
        step: u64,
    },
    /// Value stored by the first write to `var` after event `step`, in that event's frame.
    NextWriteAfter {
        var: String,
        step: u64,
    },
    LastValidArrayIndex {
        name: String,
    },
    /// Outcome of the `occurrence`-th (0-based) evaluation of an `if`.
    BranchOutcome {
        node_id: NodeId,
        occurrence: u64,
    },
    FinalOutput,
    NonterminatingLoopLine,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "answer", content = "value", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum TraceAnswer {
    Int(i64),
    Line(u32),
    Bool(bool),
    Text(String),
    NotApplicable,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum QueryError {
    #[error("invalid query: {0}")]
    InvalidQuery(String),
}

/// Number of trailing events inspected when attributing nontermination.
pub const NONTERMINATION_WINDOW: usize = 100;

pub fn query_trace(program: &Program, trace: &TraceLog, query: &TraceQuery) -> Result<TraceAnswer, QueryError> {
    validate(program, query)?;
    Ok(match query {
        TraceQuery::VarBeforeFinalIter { loop_id, var } => {
            let last = trace
                .events
                .iter()
                .rev()
                .find(|e| e.node_id == Some(*loop_id) && matches!(e.detail, EventDetail::LoopIterStart { .. }));
            match last {
                Some(start) => value_before(trace, var, start.step, start.frame),
                None => TraceAnswer::NotApplicable,
            }
        }
        TraceQuery::IterCount { loop_id } => {
            let entered = trace
                .events
                .iter()
                .any(|e| e.node_id == Some(*loop_id) && matches!(e.detail, EventDetail::Stmt { .. }));
            if !entered {
                return Ok(TraceAnswer::NotApplicable);
            }
            let count = trace
                .events
                .iter()
                .filter(|e| e.node_id == Some(*loop_id) && matches!(e.detail, EventDetail::LoopIterStart { .. }))
                .count();
            TraceAnswer::Int(count as i64)
        }
        TraceQuery::ValueAtStep { var, step } => match trace.events.get(*step as usize) {
            Some(e) => value_before(trace, var, *step, e.frame),
            None => TraceAnswer::NotApplicable,
        },
        TraceQuery::NextWriteAfter { var, step } => {
            let Some(at) = trace.events.get(*step as usize) else {
                return Ok(TraceAnswer::NotApplicable);
            };
            trace.events[*step as usize + 1..]
                .iter()
                .find_map(|e| match &e.detail {
                    EventDetail::VarWrite { name, index: None, new_value, .. }
                        if name == var && e.frame == at.frame =>
                    {
                        Some(TraceAnswer::Int(*new_value))
                    }
                    _ => None,
                })
                .unwrap_or(TraceAnswer::NotApplicable)
        }
        TraceQuery::LastValidArrayIndex { name } => trace
            .events
            .iter()
            .rev()
            .find_map(|e| match &e.detail {
                EventDetail::ArrayAccess { name: n, index, in_bounds: true } if n == name => {
                    Some(TraceAnswer::Int(*index))
                }
                _ => None,
            })
            .unwrap_or(TraceAnswer::NotApplicable),
        TraceQuery::BranchOutcome { node_id, occurrence } => trace
            .events
            .iter()
            .filter_map(|e| match e.detail {
                EventDetail::Branch { taken } if e.node_id == Some(*node_id) => Some(taken),
                _ => None,
            })
            .nth(*occurrence as usize)
            .map_or(TraceAnswer::NotApplicable, TraceAnswer::Bool),
        TraceQuery::FinalOutput => TraceAnswer::Text(trace.output_text()),
        TraceQuery::NonterminatingLoopLine => match nonterminating_loop(trace) {
            Some(id) => TraceAnswer::Line(program.node(id).map_or(0, |n| n.line)),
            None => TraceAnswer::NotApplicable,
        },
    })
}

/// The loop blamed for a budget-exhausted run: the loop whose iteration
/// starts are most frequent among the final events. Ties go to the loop that
/// started an iteration most recently.
pub fn nonterminating_loop(trace: &TraceLog) -> Option<NodeId> {
    if trace.termination != Termination::StepBudgetExceeded {
        return None;
    }
    let blame = |events: &[crate::trace::TraceEvent]| -> Option<NodeId> {
        let mut counts: Vec<(NodeId, usize, u64)> = Vec::new();
        for e in events {
            if let (EventDetail::LoopIterStart { .. }, Some(id)) = (&e.detail, e.node_id) {
                match counts.iter_mut().find(|(n, _, _)| *n == id) {
                    Some(entry) => {
                        entry.1 += 1;
                        entry.2 = e.step;
                    }
                    None => counts.push((id, 1, e.step)),
                }
            }
        }
        counts.into_iter().max_by_key(|(_, count, last)| (*count, *last)).map(|(id, _, _)| id)
    };
    let tail_start = trace.events.len().saturating_sub(NONTERMINATION_WINDOW);
    blame(&trace.events[tail_start..]).or_else(|| blame(&trace.events))
}

fn value_before(trace: &TraceLog, var: &str, step: u64, frame: u32) -> TraceAnswer {
    trace.events[..step as usize]
        .iter()
        .rev()
        .find_map(|e| match &e.detail {
            EventDetail::VarWrite { name, index: None, new_value, .. } if name == var && e.frame == frame => {
                Some(TraceAnswer::Int(*new_value))
            }
            _ => None,
        })
        .unwrap_or(TraceAnswer::NotApplicable)
}

fn validate(program: &Program, query: &TraceQuery) -> Result<(), QueryError> {
    let node_of_kind = |id: NodeId, ok: &dyn Fn(NodeKind) -> bool, what: &str| match program.node(id) {
        Some(n) if ok(n.kind) => Ok(()),
        _ => Err(QueryError::InvalidQuery(format!("node {id} is not {what}"))),
    };
    let scalar = |var: &str| {
        let declared = program.declared_variables().into_iter().any(|(n, t)| n == var && t == Type::Int);
        if declared {
            Ok(())
        } else {
            Err(QueryError::InvalidQuery(format!("no scalar variable named {var}")))
        }
    };
    match query {
        TraceQuery::VarBeforeFinalIter { loop_id, var } => {
            node_of_kind(*loop_id, &NodeKind::is_loop, "a loop")?;
            scalar(var)
        }
        TraceQuery::IterCount { loop_id } => node_of_kind(*loop_id, &NodeKind::is_loop, "a loop"),
        TraceQuery::ValueAtStep { var, .. } | TraceQuery::NextWriteAfter { var, .. } => scalar(var),
        TraceQuery::LastValidArrayIndex { name } => {
            let declared =
                program.declared_variables().into_iter().any(|(n, t)| n == *name && matches!(t, Type::Array(_)));
            if declared {
                Ok(())
            } else {
                Err(QueryError::InvalidQuery(format!("no array named {name}")))
            }
        }
        TraceQuery::BranchOutcome { node_id, .. } => node_of_kind(*node_id, &|k| k == NodeKind::If, "an if statement"),
        TraceQuery::FinalOutput | TraceQuery::NonterminatingLoopLine => Ok(()),
    }
}
