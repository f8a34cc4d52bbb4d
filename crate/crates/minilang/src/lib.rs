//! MiniLang: a small imperative teaching language with a tracing interpreter.
//!
//! Programs are parsed into an AST whose nodes carry stable pre-order ids,
//! then executed under a step budget to produce a [`TraceLog`].

mod ast;
mod error;
mod interp;
mod lexer;
mod parser;
mod query;
mod trace;

pub use ast::{
    visit_stmts, BinOp, Expr, ExprKind, FunctionDef, NodeId, NodeInfo, NodeKind, Param, Program, Stmt, StmtKind, Type,
    UnOp,
};
pub use error::{LangError, ParseError, SemanticError, SemanticErrorKind};
pub use interp::{execute, DEFAULT_STEP_BUDGET, MAX_CALL_DEPTH};
pub use lexer::{tokenize, Tok, Token};
pub use parser::{parse, parse_statements, MAX_ARRAY_SIZE};
pub use query::{nonterminating_loop, query_trace, QueryError, TraceAnswer, TraceQuery, NONTERMINATION_WINDOW};
pub use trace::{check_inputs, EventDetail, Inputs, Termination, TraceEvent, TraceLog, Value};
