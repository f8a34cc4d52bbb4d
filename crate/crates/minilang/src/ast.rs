//! Syntax tree for MiniLang programs.
//!
//! Every function, statement and expression carries a [`NodeId`] assigned in
//! pre-order during parsing, so ids are stable across re-parses of identical
//! source. [`Program::node`] gives constant-time access to the kind, line,
//! parent and owning function of any node.

use std::fmt;

use serde::{Deserialize, Serialize};

pub type NodeId = u32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum NodeKind {
    Function,
    Decl,
    Assign,
    ArrayAssign,
    If,
    While,
    For,
    Print,
    Return,
    Call,
    Binop,
    Unop,
    Var,
    Const,
    Index,
}

impl NodeKind {
    pub fn is_statement(self) -> bool {
        matches!(
            self,
            NodeKind::Decl
                | NodeKind::Assign
                | NodeKind::ArrayAssign
                | NodeKind::If
                | NodeKind::While
                | NodeKind::For
                | NodeKind::Print
                | NodeKind::Return
        )
    }

    pub fn is_loop(self) -> bool {
        matches!(self, NodeKind::While | NodeKind::For)
    }
}

/// Declared type of a variable or parameter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Type {
    Int,
    Array(usize),
}

impl fmt::Display for Type {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Type::Int => f.write_str("int"),
            Type::Array(n) => write!(f, "int[{n}]"),
        }
    }
}

impl Serialize for Type {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Type {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let text = String::deserialize(d)?;
        if text == "int" {
            return Ok(Type::Int);
        }
        text.strip_prefix("int[")
            .and_then(|rest| rest.strip_suffix(']'))
            .and_then(|n| n.parse().ok())
            .map(Type::Array)
            .ok_or_else(|| serde::de::Error::custom(format!("invalid type `{text}`")))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Program {
    pub functions: Vec<FunctionDef>,
    /// Name of the entry function; always `main`.
    pub entry: String,
    /// Raw source lines; line `n` of the source is `source_lines[n - 1]`.
    pub source_lines: Vec<String>,
    pub(crate) nodes: Vec<NodeInfo>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FunctionDef {
    pub id: NodeId,
    pub name: String,
    pub params: Vec<Param>,
    pub body: Vec<Stmt>,
    pub line: u32,
    /// Line of the closing brace.
    pub end_line: u32,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Param {
    pub name: String,
    pub ty: Type,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Stmt {
    pub id: NodeId,
    pub line: u32,
    pub kind: StmtKind,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StmtKind {
    /// Scalars always carry an initializer; arrays never do.
    Decl {
        name: String,
        ty: Type,
        init: Option<Expr>,
    },
    Assign {
        name: String,
        value: Expr,
    },
    ArrayAssign {
        name: String,
        index: Expr,
        value: Expr,
    },
    If {
        cond: Expr,
        then_body: Vec<Stmt>,
        else_body: Option<Vec<Stmt>>,
    },
    While {
        cond: Expr,
        body: Vec<Stmt>,
    },
    For {
        init: Box<Stmt>,
        cond: Expr,
        update: Box<Stmt>,
        body: Vec<Stmt>,
    },
    Print {
        value: Expr,
    },
    Return {
        value: Expr,
    },
}

impl StmtKind {
    pub fn node_kind(&self) -> NodeKind {
        match self {
            StmtKind::Decl { .. } => NodeKind::Decl,
            StmtKind::Assign { .. } => NodeKind::Assign,
            StmtKind::ArrayAssign { .. } => NodeKind::ArrayAssign,
            StmtKind::If { .. } => NodeKind::If,
            StmtKind::While { .. } => NodeKind::While,
            StmtKind::For { .. } => NodeKind::For,
            StmtKind::Print { .. } => NodeKind::Print,
            StmtKind::Return { .. } => NodeKind::Return,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Expr {
    pub id: NodeId,
    pub line: u32,
    pub kind: ExprKind,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ExprKind {
    Const(i64),
    Var(String),
    Index { name: String, index: Box<Expr> },
    Call { name: String, args: Vec<Expr> },
    Binary { op: BinOp, lhs: Box<Expr>, rhs: Box<Expr> },
    Unary { op: UnOp, operand: Box<Expr> },
}

impl ExprKind {
    pub fn node_kind(&self) -> NodeKind {
        match self {
            ExprKind::Const(_) => NodeKind::Const,
            ExprKind::Var(_) => NodeKind::Var,
            ExprKind::Index { .. } => NodeKind::Index,
            ExprKind::Call { .. } => NodeKind::Call,
            ExprKind::Binary { .. } => NodeKind::Binop,
            ExprKind::Unary { .. } => NodeKind::Unop,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Rem,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    And,
    Or,
}

impl BinOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::Rem => "%",
            BinOp::Eq => "==",
            BinOp::Ne => "!=",
            BinOp::Lt => "<",
            BinOp::Le => "<=",
            BinOp::Gt => ">",
            BinOp::Ge => ">=",
            BinOp::And => "&&",
            BinOp::Or => "||",
        }
    }

    pub fn precedence(self) -> u8 {
        match self {
            BinOp::Or => 1,
            BinOp::And => 2,
            BinOp::Eq | BinOp::Ne => 3,
            BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge => 4,
            BinOp::Add | BinOp::Sub => 5,
            BinOp::Mul | BinOp::Div | BinOp::Rem => 6,
        }
    }

    pub fn is_relational(self) -> bool {
        matches!(self, BinOp::Eq | BinOp::Ne | BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge)
    }

    pub fn is_logical(self) -> bool {
        matches!(self, BinOp::And | BinOp::Or)
    }

    pub fn is_arithmetic(self) -> bool {
        !self.is_relational() && !self.is_logical()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum UnOp {
    Neg,
    Not,
}

/// Index entry for one syntax node.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NodeInfo {
    pub kind: NodeKind,
    pub line: u32,
    pub parent: Option<NodeId>,
    /// Index into [`Program::functions`].
    pub function: usize,
}

impl Program {
    pub fn function(&self, name: &str) -> Option<&FunctionDef> {
        self.functions.iter().find(|f| f.name == name)
    }

    pub fn main(&self) -> &FunctionDef {
        self.function(&self.entry).expect("validated program always has an entry function")
    }

    pub fn node(&self, id: NodeId) -> Option<&NodeInfo> {
        self.nodes.get(id as usize)
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> impl Iterator<Item = (NodeId, &NodeInfo)> {
        self.nodes.iter().enumerate().map(|(i, n)| (i as NodeId, n))
    }

    /// True when `id` equals `ancestor` or lies below it.
    pub fn is_within(&self, id: NodeId, ancestor: NodeId) -> bool {
        let mut cur = Some(id);
        while let Some(n) = cur {
            if n == ancestor {
                return true;
            }
            cur = self.node(n).and_then(|info| info.parent);
        }
        false
    }

    pub fn source_line(&self, line: u32) -> Option<&str> {
        line.checked_sub(1).and_then(|i| self.source_lines.get(i as usize)).map(String::as_str)
    }

    /// Finds a statement by id anywhere in the program.
    pub fn stmt(&self, id: NodeId) -> Option<&Stmt> {
        let info = self.node(id)?;
        if !info.kind.is_statement() {
            return None;
        }
        let mut found = None;
        visit_stmts(&self.functions[info.function].body, &mut |s| {
            if s.id == id {
                found = Some(s);
            }
        });
        found
    }

    /// Finds an expression by id anywhere in the program.
    pub fn expr(&self, id: NodeId) -> Option<&Expr> {
        let info = self.node(id)?;
        if info.kind.is_statement() || info.kind == NodeKind::Function {
            return None;
        }
        let mut found = None;
        visit_stmts(&self.functions[info.function].body, &mut |s| {
            for e in s.exprs() {
                e.walk(&mut |x| {
                    if x.id == id {
                        found = Some(x);
                    }
                });
            }
        });
        found
    }

    /// All statements of all functions in pre-order.
    pub fn statements(&self) -> Vec<&Stmt> {
        let mut out = Vec::new();
        for f in &self.functions {
            visit_stmts(&f.body, &mut |s| out.push(s));
        }
        out
    }

    /// Names declared anywhere in the program (parameters and declarations)
    /// together with their types.
    pub fn declared_variables(&self) -> Vec<(String, Type)> {
        let mut out = Vec::new();
        for f in &self.functions {
            for p in &f.params {
                out.push((p.name.clone(), p.ty));
            }
            visit_stmts(&f.body, &mut |s| {
                if let StmtKind::Decl { name, ty, .. } = &s.kind {
                    out.push((name.clone(), *ty));
                }
            });
        }
        out
    }

    /// Type of `name` as visible in function `function`, if declared there.
    pub fn variable_type_in(&self, function: usize, name: &str) -> Option<Type> {
        let f = self.functions.get(function)?;
        if let Some(p) = f.params.iter().find(|p| p.name == name) {
            return Some(p.ty);
        }
        let mut ty = None;
        visit_stmts(&f.body, &mut |s| {
            if let StmtKind::Decl { name: n, ty: t, .. } = &s.kind {
                if n == name && ty.is_none() {
                    ty = Some(*t);
                }
            }
        });
        ty
    }

    /// Every distinct identifier (variables and functions) in the program.
    pub fn identifiers(&self) -> std::collections::BTreeSet<String> {
        let mut out = std::collections::BTreeSet::new();
        for f in &self.functions {
            out.insert(f.name.clone());
        }
        for (name, _) in self.declared_variables() {
            out.insert(name);
        }
        out
    }
}

/// Visits statements in pre-order, descending into nested bodies.
pub fn visit_stmts<'a>(stmts: &'a [Stmt], f: &mut dyn FnMut(&'a Stmt)) {
    for s in stmts {
        f(s);
        match &s.kind {
            StmtKind::If { then_body, else_body, .. } => {
                visit_stmts(then_body, f);
                if let Some(e) = else_body {
                    visit_stmts(e, f);
                }
            }
            StmtKind::While { body, .. } => visit_stmts(body, f),
            StmtKind::For { init, update, body, .. } => {
                f(init);
                visit_stmts(body, f);
                f(update);
            }
            _ => {}
        }
    }
}

impl Stmt {
    /// Expressions owned directly by this statement (not by nested statements).
    pub fn exprs(&self) -> Vec<&Expr> {
        match &self.kind {
            StmtKind::Decl { init, .. } => init.iter().collect(),
            StmtKind::Assign { value, .. } => vec![value],
            StmtKind::ArrayAssign { index, value, .. } => vec![index, value],
            StmtKind::If { cond, .. } | StmtKind::While { cond, .. } => vec![cond],
            StmtKind::For { cond, .. } => vec![cond],
            StmtKind::Print { value } | StmtKind::Return { value } => vec![value],
        }
    }

    /// Name of the scalar or array variable this statement writes, if any.
    pub fn written_variable(&self) -> Option<&str> {
        match &self.kind {
            StmtKind::Decl { name, .. } | StmtKind::Assign { name, .. } | StmtKind::ArrayAssign { name, .. } => {
                Some(name)
            }
            _ => None,
        }
    }
}

impl Expr {
    /// Visits this expression and all subexpressions in pre-order.
    pub fn walk<'a>(&'a self, f: &mut dyn FnMut(&'a Expr)) {
        f(self);
        match &self.kind {
            ExprKind::Const(_) | ExprKind::Var(_) => {}
            ExprKind::Index { index, .. } => index.walk(f),
            ExprKind::Call { args, .. } => args.iter().for_each(|a| a.walk(f)),
            ExprKind::Binary { lhs, rhs, .. } => {
                lhs.walk(f);
                rhs.walk(f);
            }
            ExprKind::Unary { operand, .. } => operand.walk(f),
        }
    }

    /// Variables read by this expression (including indexed arrays).
    pub fn read_variables(&self) -> Vec<&str> {
        let mut out: Vec<&str> = Vec::new();
        self.walk(&mut |e| match &e.kind {
            ExprKind::Var(n) | ExprKind::Index { name: n, .. } if !out.contains(&n.as_str()) => out.push(n),
            _ => {}
        });
        out
    }

    /// Folds the expression when it only involves literals.
    pub fn constant_value(&self) -> Option<i64> {
        match &self.kind {
            ExprKind::Const(v) => Some(*v),
            ExprKind::Unary { op: UnOp::Neg, operand } => operand.constant_value().map(i64::wrapping_neg),
            ExprKind::Binary { op, lhs, rhs } if op.is_arithmetic() => {
                let (a, b) = (lhs.constant_value()?, rhs.constant_value()?);
                match op {
                    BinOp::Add => Some(a.wrapping_add(b)),
                    BinOp::Sub => Some(a.wrapping_sub(b)),
                    BinOp::Mul => Some(a.wrapping_mul(b)),
                    BinOp::Div if b != 0 => Some(a.wrapping_div(b)),
                    BinOp::Rem if b != 0 => Some(a.wrapping_rem(b)),
                    _ => None,
                }
            }
            _ => None,
        }
    }

    fn precedence(&self) -> u8 {
        match &self.kind {
            ExprKind::Binary { op, .. } => op.precedence(),
            ExprKind::Unary { .. } => 7,
            _ => 8,
        }
    }
}

/// Renders an expression as MiniLang source with minimal parentheses.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            ExprKind::Const(v) => write!(f, "{v}"),
            ExprKind::Var(n) => f.write_str(n),
            ExprKind::Index { name, index } => write!(f, "{name}[{index}]"),
            ExprKind::Call { name, args } => {
                write!(f, "{name}(")?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{a}")?;
                }
                f.write_str(")")
            }
            ExprKind::Unary { op, operand } => {
                f.write_str(match op {
                    UnOp::Neg => "-",
                    UnOp::Not => "!",
                })?;
                if operand.precedence() < 7 {
                    write!(f, "({operand})")
                } else {
                    write!(f, "{operand}")
                }
            }
            ExprKind::Binary { op, lhs, rhs } => {
                let p = op.precedence();
                if lhs.precedence() < p {
                    write!(f, "({lhs})")?;
                } else {
                    write!(f, "{lhs}")?;
                }
                write!(f, " {} ", op.symbol())?;
                // Left-associative: an equal-precedence right operand needs parens.
                if rhs.precedence() <= p {
                    write!(f, "({rhs})")
                } else {
                    write!(f, "{rhs}")
                }
            }
        }
    }
}
