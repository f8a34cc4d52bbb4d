//! Tracing tree-walking interpreter.
//!
//! One step of the budget is consumed per statement execution and per loop
//! condition evaluation. Runtime faults and budget exhaustion end the run and
//! are recorded in the returned [`TraceLog`]; nothing is raised.

use std::collections::HashMap;

use crate::ast::*;
use crate::trace::*;

pub const DEFAULT_STEP_BUDGET: u64 = 10_000;
pub const MAX_CALL_DEPTH: usize = 64;

pub fn execute(program: &Program, inputs: &Inputs, step_budget: u64) -> TraceLog {
    let mut m = Machine {
        program,
        events: Vec::new(),
        steps_used: 0,
        budget: step_budget,
        next_frame: 0,
        depth: 0,
        iterations: HashMap::new(),
    };
    let termination = match m.run_main(inputs) {
        Ok(()) => Termination::Normal,
        Err(Halt::Budget) => Termination::StepBudgetExceeded,
        Err(Halt::Fault) => Termination::RuntimeFault,
    };
    TraceLog { events: m.events, termination, inputs: inputs.clone(), step_budget }
}

enum Halt {
    Budget,
    /// The FAULT event has already been recorded.
    Fault,
}

enum Flow {
    Next,
    /// Returned value plus the line and node of the `return` statement.
    Return(i64, u32, NodeId),
}

#[derive(Clone)]
enum Slot {
    Int(i64),
    Array(Vec<i64>),
}

struct Frame {
    id: u32,
    scopes: Vec<HashMap<String, Slot>>,
}

impl Frame {
    fn get(&self, name: &str) -> &Slot {
        self.scopes.iter().rev().find_map(|s| s.get(name)).expect("checked program only reads declared variables")
    }

    fn get_mut(&mut self, name: &str) -> &mut Slot {
        self.scopes
            .iter_mut()
            .rev()
            .find_map(|s| s.get_mut(name))
            .expect("checked program only writes declared variables")
    }

    fn declare(&mut self, name: &str, slot: Slot) {
        self.scopes.last_mut().expect("frames always have a scope").insert(name.to_owned(), slot);
    }
}

struct Machine<'p> {
    program: &'p Program,
    events: Vec<TraceEvent>,
    steps_used: u64,
    budget: u64,
    next_frame: u32,
    depth: usize,
    iterations: HashMap<NodeId, u64>,
}

type Exec<T> = Result<T, Halt>;

impl<'p> Machine<'p> {
    fn emit(&mut self, frame: &Frame, line: u32, node_id: Option<NodeId>, detail: EventDetail) {
        self.emit_in(frame.id, line, node_id, detail);
    }

    fn emit_in(&mut self, frame: u32, line: u32, node_id: Option<NodeId>, detail: EventDetail) {
        let step = self.events.len() as u64;
        self.events.push(TraceEvent { step, line, frame, node_id, detail });
    }

    fn fault(&mut self, frame: u32, line: u32, node_id: Option<NodeId>, reason: &str) -> Halt {
        self.emit_in(frame, line, node_id, EventDetail::Fault { reason: reason.to_owned() });
        Halt::Fault
    }

    fn tick(&mut self) -> Exec<()> {
        if self.steps_used >= self.budget {
            return Err(Halt::Budget);
        }
        self.steps_used += 1;
        Ok(())
    }

    fn run_main(&mut self, inputs: &Inputs) -> Exec<()> {
        let main = self.program.main();
        if let Err(reason) = check_inputs(self.program, inputs) {
            return Err(self.fault(0, main.line, Some(main.id), &reason));
        }
        let args: Vec<Value> = main.params.iter().map(|p| inputs[&p.name].clone()).collect();
        self.call(main, args, main.line, 0).map(|_| ())
    }

    fn call(&mut self, f: &'p FunctionDef, args: Vec<Value>, line: u32, caller_frame: u32) -> Exec<i64> {
        if self.depth >= MAX_CALL_DEPTH {
            return Err(self.fault(caller_frame, line, Some(f.id), "recursion depth exceeded"));
        }
        let mut frame = Frame { id: self.next_frame, scopes: vec![HashMap::new()] };
        self.next_frame += 1;
        self.depth += 1;
        self.emit(&frame, line, Some(f.id), EventDetail::Call { function: f.name.clone(), args: args.clone() });
        for (p, arg) in f.params.iter().zip(args) {
            match arg {
                Value::Int(v) => {
                    frame.declare(&p.name, Slot::Int(v));
                    self.emit(
                        &frame,
                        f.line,
                        Some(f.id),
                        EventDetail::VarWrite { name: p.name.clone(), index: None, old_value: None, new_value: v },
                    );
                }
                Value::Array(items) => frame.declare(&p.name, Slot::Array(items)),
            }
        }
        let flow = self.block(&mut frame, &f.body)?;
        let (value, ret_line, node) = match flow {
            Flow::Return(v, line, id) => (v, line, Some(id)),
            Flow::Next => (0, f.end_line, None),
        };
        self.emit(&frame, ret_line, node, EventDetail::Return { function: f.name.clone(), value });
        self.depth -= 1;
        Ok(value)
    }

    fn block(&mut self, frame: &mut Frame, stmts: &'p [Stmt]) -> Exec<Flow> {
        frame.scopes.push(HashMap::new());
        let mut flow = Flow::Next;
        for s in stmts {
            match self.stmt(frame, s) {
                Ok(Flow::Next) => {}
                Ok(ret @ Flow::Return(..)) => {
                    flow = ret;
                    break;
                }
                Err(h) => {
                    frame.scopes.pop();
                    return Err(h);
                }
            }
        }
        frame.scopes.pop();
        Ok(flow)
    }

    fn stmt(&mut self, frame: &mut Frame, s: &'p Stmt) -> Exec<Flow> {
        self.tick()?;
        self.emit(frame, s.line, Some(s.id), EventDetail::Stmt { node_kind: s.kind.node_kind() });
        match &s.kind {
            StmtKind::Decl { name, ty, init } => match (ty, init) {
                (Type::Array(n), _) => frame.declare(name, Slot::Array(vec![0; *n])),
                (Type::Int, Some(e)) => {
                    let v = self.expr(frame, e)?;
                    frame.declare(name, Slot::Int(v));
                    self.write_event(frame, s, name, None, None, v);
                }
                (Type::Int, None) => unreachable!("scalar declarations carry an initializer"),
            },
            StmtKind::Assign { name, value } => {
                let v = self.expr(frame, value)?;
                let Slot::Int(old) = frame.get(name).clone() else {
                    unreachable!("checked program assigns only scalars")
                };
                *frame.get_mut(name) = Slot::Int(v);
                self.write_event(frame, s, name, None, Some(old), v);
            }
            StmtKind::ArrayAssign { name, index, value } => {
                let i = self.expr(frame, index)?;
                let v = self.expr(frame, value)?;
                let old = self.access(frame, s.line, s.id, name, i)?;
                if let Slot::Array(items) = frame.get_mut(name) {
                    items[i as usize] = v;
                }
                self.write_event(frame, s, name, Some(i), Some(old), v);
            }
            StmtKind::If { cond, then_body, else_body } => {
                let taken = self.cond(frame, cond)?;
                self.emit(frame, s.line, Some(s.id), EventDetail::Branch { taken });
                if taken {
                    return self.block(frame, then_body);
                } else if let Some(b) = else_body {
                    return self.block(frame, b);
                }
            }
            StmtKind::While { cond, body } => loop {
                self.tick()?;
                if !self.cond(frame, cond)? {
                    break;
                }
                self.iteration(frame, s);
                if let ret @ Flow::Return(..) = self.block(frame, body)? {
                    return Ok(ret);
                }
            },
            StmtKind::For { init, cond, update, body } => {
                frame.scopes.push(HashMap::new());
                let r = self.for_loop(frame, s, init, cond, update, body);
                frame.scopes.pop();
                return r;
            }
            StmtKind::Print { value } => {
                let v = self.expr(frame, value)?;
                self.emit(frame, s.line, Some(s.id), EventDetail::Output { text: v.to_string() });
            }
            StmtKind::Return { value } => {
                let v = self.expr(frame, value)?;
                return Ok(Flow::Return(v, s.line, s.id));
            }
        }
        Ok(Flow::Next)
    }

    fn for_loop(
        &mut self,
        frame: &mut Frame,
        s: &'p Stmt,
        init: &'p Stmt,
        cond: &'p Expr,
        update: &'p Stmt,
        body: &'p [Stmt],
    ) -> Exec<Flow> {
        self.stmt(frame, init)?;
        loop {
            self.tick()?;
            if !self.cond(frame, cond)? {
                return Ok(Flow::Next);
            }
            self.iteration(frame, s);
            if let ret @ Flow::Return(..) = self.block(frame, body)? {
                return Ok(ret);
            }
            self.stmt(frame, update)?;
        }
    }

    fn iteration(&mut self, frame: &Frame, s: &Stmt) {
        let counter = self.iterations.entry(s.id).or_insert(0);
        let iteration_index = *counter;
        *counter += 1;
        self.emit(frame, s.line, Some(s.id), EventDetail::LoopIterStart { iteration_index });
    }

    fn write_event(
        &mut self,
        frame: &Frame,
        s: &Stmt,
        name: &str,
        index: Option<i64>,
        old_value: Option<i64>,
        new_value: i64,
    ) {
        self.emit(
            frame,
            s.line,
            Some(s.id),
            EventDetail::VarWrite { name: name.to_owned(), index, old_value, new_value },
        );
    }

    /// Records an element access and returns the current element value.
    fn access(&mut self, frame: &Frame, line: u32, node: NodeId, name: &str, index: i64) -> Exec<i64> {
        let Slot::Array(items) = frame.get(name) else { unreachable!("checked program indexes only arrays") };
        let in_bounds = index >= 0 && (index as usize) < items.len();
        let current = if in_bounds { items[index as usize] } else { 0 };
        self.emit(frame, line, Some(node), EventDetail::ArrayAccess { name: name.to_owned(), index, in_bounds });
        if in_bounds {
            Ok(current)
        } else {
            Err(self.fault(frame.id, line, Some(node), "index out of bounds"))
        }
    }

    fn cond(&mut self, frame: &mut Frame, e: &'p Expr) -> Exec<bool> {
        match &e.kind {
            ExprKind::Unary { op: UnOp::Not, operand } => Ok(!self.cond(frame, operand)?),
            ExprKind::Binary { op, lhs, rhs } if op.is_logical() => {
                let l = self.cond(frame, lhs)?;
                match op {
                    BinOp::And if !l => Ok(false),
                    BinOp::Or if l => Ok(true),
                    _ => self.cond(frame, rhs),
                }
            }
            ExprKind::Binary { op, lhs, rhs } => {
                let a = self.expr(frame, lhs)?;
                let b = self.expr(frame, rhs)?;
                Ok(match op {
                    BinOp::Eq => a == b,
                    BinOp::Ne => a != b,
                    BinOp::Lt => a < b,
                    BinOp::Le => a <= b,
                    BinOp::Gt => a > b,
                    BinOp::Ge => a >= b,
                    _ => unreachable!("checked program uses only boolean operators in conditions"),
                })
            }
            _ => unreachable!("checked program has only boolean conditions"),
        }
    }

    fn expr(&mut self, frame: &mut Frame, e: &'p Expr) -> Exec<i64> {
        match &e.kind {
            ExprKind::Const(v) => Ok(*v),
            ExprKind::Var(name) => match frame.get(name) {
                Slot::Int(v) => Ok(*v),
                Slot::Array(_) => unreachable!("checked program reads arrays only by index"),
            },
            ExprKind::Index { name, index } => {
                let i = self.expr(frame, index)?;
                self.access(frame, e.line, e.id, name, i)
            }
            ExprKind::Call { name, args } => {
                let f = self.program.function(name).expect("checked program calls only defined functions");
                let mut values = Vec::with_capacity(args.len());
                for a in args {
                    let v = match &a.kind {
                        ExprKind::Var(n) => match frame.get(n) {
                            Slot::Array(items) => Value::Array(items.clone()),
                            Slot::Int(v) => Value::Int(*v),
                        },
                        _ => Value::Int(self.expr(frame, a)?),
                    };
                    values.push(v);
                }
                self.call(f, values, e.line, frame.id)
            }
            ExprKind::Unary { op: UnOp::Neg, operand } => Ok(self.expr(frame, operand)?.wrapping_neg()),
            ExprKind::Binary { op, lhs, rhs } if op.is_arithmetic() => {
                let a = self.expr(frame, lhs)?;
                let b = self.expr(frame, rhs)?;
                match op {
                    BinOp::Add => Ok(a.wrapping_add(b)),
                    BinOp::Sub => Ok(a.wrapping_sub(b)),
                    BinOp::Mul => Ok(a.wrapping_mul(b)),
                    BinOp::Div | BinOp::Rem if b == 0 => {
                        Err(self.fault(frame.id, e.line, Some(e.id), "division by zero"))
                    }
                    BinOp::Div => Ok(a.wrapping_div(b)),
                    BinOp::Rem => Ok(a.wrapping_rem(b)),
                    _ => unreachable!(),
                }
            }
            _ => unreachable!("checked program has no boolean values outside conditions"),
        }
    }
}
