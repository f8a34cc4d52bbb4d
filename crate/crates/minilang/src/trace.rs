//! Execution trace records.
//!
//! A [`TraceLog`] serializes to JSON with a fixed field order (`events`,
//! `termination`, `inputs`, `step_budget`). Each event carries its sequence
//! number, source line, call frame and originating node, followed by a
//! `kind` tag and a kind-specific `payload`.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::ast::{NodeId, NodeKind};

/// A runtime value: a scalar or a fixed-size array.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Value {
    Int(i64),
    Array(Vec<i64>),
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Int(v) => write!(f, "{v}"),
            Value::Array(items) => {
                f.write_str("[")?;
                for (i, v) in items.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{v}")?;
                }
                f.write_str("]")
            }
        }
    }
}

/// Values for the parameters of `main`, keyed by parameter name.
pub type Inputs = BTreeMap<String, Value>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Termination {
    Normal,
    StepBudgetExceeded,
    RuntimeFault,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceEvent {
    pub step: u64,
    pub line: u32,
    /// Call frame the event belongs to; `main` runs in frame 0 and every
    /// call opens the next frame number.
    pub frame: u32,
    pub node_id: Option<NodeId>,
    #[serde(flatten)]
    pub detail: EventDetail,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "payload", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum EventDetail {
    Stmt {
        node_kind: NodeKind,
    },
    VarWrite {
        name: String,
        /// Element index for array element writes.
        index: Option<i64>,
        old_value: Option<i64>,
        new_value: i64,
    },
    Branch {
        taken: bool,
    },
    LoopIterStart {
        iteration_index: u64,
    },
    ArrayAccess {
        name: String,
        index: i64,
        in_bounds: bool,
    },
    Call {
        function: String,
        args: Vec<Value>,
    },
    Return {
        function: String,
        value: i64,
    },
    Output {
        text: String,
    },
    Fault {
        reason: String,
    },
}

impl EventDetail {
    pub fn kind_name(&self) -> &'static str {
        match self {
            EventDetail::Stmt { .. } => "STMT",
            EventDetail::VarWrite { .. } => "VAR_WRITE",
            EventDetail::Branch { .. } => "BRANCH",
            EventDetail::LoopIterStart { .. } => "LOOP_ITER_START",
            EventDetail::ArrayAccess { .. } => "ARRAY_ACCESS",
            EventDetail::Call { .. } => "CALL",
            EventDetail::Return { .. } => "RETURN",
            EventDetail::Output { .. } => "OUTPUT",
            EventDetail::Fault { .. } => "FAULT",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceLog {
    pub events: Vec<TraceEvent>,
    pub termination: Termination,
    pub inputs: Inputs,
    pub step_budget: u64,
}

impl TraceLog {
    /// Printed lines, one per `print` executed.
    pub fn outputs(&self) -> Vec<&str> {
        self.events
            .iter()
            .filter_map(|e| match &e.detail {
                EventDetail::Output { text } => Some(text.as_str()),
                _ => None,
            })
            .collect()
    }

    /// All printed lines joined with newlines.
    pub fn output_text(&self) -> String {
        self.outputs().join("\n")
    }

    pub fn fault(&self) -> Option<(&TraceEvent, &str)> {
        self.events.last().and_then(|e| match &e.detail {
            EventDetail::Fault { reason } => Some((e, reason.as_str())),
            _ => None,
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("trace logs always serialize")
    }

    /// Final value of every scalar written in `main`'s frame, by name.
    pub fn final_main_values(&self) -> BTreeMap<String, i64> {
        let mut out = BTreeMap::new();
        for e in &self.events {
            if let EventDetail::VarWrite { name, index: None, new_value, .. } = &e.detail {
                if e.frame == 0 {
                    out.insert(name.clone(), *new_value);
                }
            }
        }
        out
    }
}

/// Checks that `inputs` supplies a correctly typed value for every parameter
/// of `main`.
pub fn check_inputs(program: &crate::Program, inputs: &Inputs) -> Result<(), String> {
    for p in &program.main().params {
        match (inputs.get(&p.name), p.ty) {
            (None, _) => return Err(format!("missing input for parameter {}", p.name)),
            (Some(Value::Int(_)), crate::Type::Int) => {}
            (Some(Value::Array(items)), crate::Type::Array(n)) if items.len() == n => {}
            (Some(v), ty) => return Err(format!("input {} = {v} does not match parameter type {ty}", p.name)),
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn event_json_layout() {
        let e =
            TraceEvent { step: 3, line: 2, frame: 0, node_id: Some(7), detail: EventDetail::Branch { taken: true } };
        let json = serde_json::to_string(&e).unwrap();
        assert_eq!(json, r#"{"step":3,"line":2,"frame":0,"node_id":7,"kind":"BRANCH","payload":{"taken":true}}"#);
        let back: TraceEvent = serde_json::from_str(&json).unwrap();
        assert_eq!(back, e);
    }

    #[test]
    fn log_field_order() {
        let log = TraceLog {
            events: vec![],
            termination: Termination::Normal,
            inputs: Inputs::from([("n".to_owned(), Value::Int(3))]),
            step_budget: 10,
        };
        assert_eq!(log.to_json(), r#"{"events":[],"termination":"NORMAL","inputs":{"n":3},"step_budget":10}"#);
    }
}
