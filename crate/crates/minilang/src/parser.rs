//! Recursive-descent parser and semantic checker.

use std::collections::{HashMap, HashSet};

use crate::ast::*;
use crate::error::{LangError, ParseError, SemanticError, SemanticErrorKind};
use crate::lexer::{tokenize, Tok, Token};

pub const MAX_ARRAY_SIZE: usize = 4096;

/// Parses and checks a complete program.
pub fn parse(source: &str) -> Result<Program, LangError> {
    let tokens = tokenize(source)?;
    let mut p = Parser { tokens, pos: 0 };
    let mut functions = Vec::new();
    while p.peek() != &Tok::Eof {
        functions.push(p.function()?);
    }
    let source_lines: Vec<String> = source.lines().map(str::to_owned).collect();
    let count = assign_ids(&mut functions);
    let nodes = index_nodes(&functions, count);
    let program = Program { functions, entry: "main".to_owned(), source_lines, nodes };
    check(&program)?;
    Ok(program)
}

/// Parses a bare statement sequence without any semantic checks. Used to
/// detect program text embedded in free-form replies.
pub fn parse_statements(source: &str) -> Result<usize, ParseError> {
    let tokens = tokenize(source)?;
    let mut p = Parser { tokens, pos: 0 };
    let mut count = 0;
    while p.peek() != &Tok::Eof {
        p.statement()?;
        count += 1;
    }
    Ok(count)
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.tokens[self.pos].tok
    }

    fn current(&self) -> &Token {
        &self.tokens[self.pos]
    }

    fn line(&self) -> u32 {
        self.current().line
    }

    fn bump(&mut self) -> Token {
        let t = self.tokens[self.pos].clone();
        if self.pos < self.tokens.len() - 1 {
            self.pos += 1;
        }
        t
    }

    fn error<I, S>(&self, expected: I) -> ParseError
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let t = self.current();
        ParseError::new(t.line, t.column, t.tok.to_string()).with_expected(expected)
    }

    fn expect(&mut self, tok: Tok) -> Result<Token, ParseError> {
        if *self.peek() == tok {
            Ok(self.bump())
        } else {
            Err(self.error([tok.to_string()]))
        }
    }

    fn ident(&mut self) -> Result<String, ParseError> {
        match self.peek().clone() {
            Tok::Ident(name) => {
                self.bump();
                Ok(name)
            }
            _ => Err(self.error(["identifier"])),
        }
    }

    fn array_size(&mut self) -> Result<i64, ParseError> {
        self.expect(Tok::LBracket)?;
        let size = match *self.peek() {
            Tok::Int(v) => {
                self.bump();
                v
            }
            _ => return Err(self.error(["integer"])),
        };
        self.expect(Tok::RBracket)?;
        Ok(size)
    }

    fn ty(&mut self) -> Result<(Type, u32), ParseError> {
        let line = self.line();
        self.expect(Tok::KwInt)?;
        if *self.peek() == Tok::LBracket {
            let size = self.array_size()?;
            // Size validity is reported as a semantic error later; keep the raw value.
            let size = usize::try_from(size).unwrap_or(0);
            Ok((Type::Array(size), line))
        } else {
            Ok((Type::Int, line))
        }
    }

    fn function(&mut self) -> Result<FunctionDef, ParseError> {
        let line = self.line();
        if *self.peek() != Tok::KwInt {
            return Err(self.error(["`int`"]));
        }
        self.bump();
        let name = self.ident()?;
        self.expect(Tok::LParen)?;
        let mut params = Vec::new();
        if *self.peek() != Tok::RParen {
            loop {
                let (ty, _) = self.ty().map_err(|e| e.with_expected(["`)`"]))?;
                let pname = self.ident()?;
                params.push(Param { name: pname, ty });
                if *self.peek() == Tok::Comma {
                    self.bump();
                } else {
                    break;
                }
            }
        }
        if *self.peek() != Tok::RParen {
            return Err(self.error(["`,`", "`)`"]));
        }
        self.bump();
        let (body, end_line) = self.block()?;
        Ok(FunctionDef { id: 0, name, params, body, line, end_line })
    }

    /// Parses `{ stmt* }` and returns the statements and the closing brace line.
    fn block(&mut self) -> Result<(Vec<Stmt>, u32), ParseError> {
        self.expect(Tok::LBrace)?;
        let mut stmts = Vec::new();
        while *self.peek() != Tok::RBrace {
            if *self.peek() == Tok::Eof {
                return Err(self.error(["`}`", "statement"]));
            }
            stmts.push(self.statement()?);
        }
        let end = self.bump();
        Ok((stmts, end.line))
    }

    fn statement(&mut self) -> Result<Stmt, ParseError> {
        match self.peek() {
            Tok::KwInt => {
                let s = self.declaration()?;
                self.expect(Tok::Semi)?;
                Ok(s)
            }
            Tok::Ident(_) => {
                let s = self.assignment()?;
                self.expect(Tok::Semi)?;
                Ok(s)
            }
            Tok::KwIf => self.if_statement(),
            Tok::KwWhile => {
                let line = self.line();
                self.bump();
                self.expect(Tok::LParen)?;
                let cond = self.expr()?;
                self.expect(Tok::RParen)?;
                let (body, _) = self.block()?;
                Ok(Stmt { id: 0, line, kind: StmtKind::While { cond, body } })
            }
            Tok::KwFor => {
                let line = self.line();
                self.bump();
                self.expect(Tok::LParen)?;
                let init = match self.peek() {
                    Tok::KwInt => self.declaration()?,
                    Tok::Ident(_) => self.assignment()?,
                    _ => return Err(self.error(["`int`", "identifier"])),
                };
                self.expect(Tok::Semi)?;
                let cond = self.expr()?;
                self.expect(Tok::Semi)?;
                let update = self.assignment()?;
                self.expect(Tok::RParen)?;
                let (body, _) = self.block()?;
                Ok(Stmt {
                    id: 0,
                    line,
                    kind: StmtKind::For { init: Box::new(init), cond, update: Box::new(update), body },
                })
            }
            Tok::KwPrint => {
                let line = self.line();
                self.bump();
                self.expect(Tok::LParen)?;
                let value = self.expr()?;
                self.expect(Tok::RParen)?;
                self.expect(Tok::Semi)?;
                Ok(Stmt { id: 0, line, kind: StmtKind::Print { value } })
            }
            Tok::KwReturn => {
                let line = self.line();
                self.bump();
                let value = self.expr()?;
                self.expect(Tok::Semi)?;
                Ok(Stmt { id: 0, line, kind: StmtKind::Return { value } })
            }
            _ => Err(self.error(["`int`", "identifier", "`if`", "`while`", "`for`", "`print`", "`return`"])),
        }
    }

    fn declaration(&mut self) -> Result<Stmt, ParseError> {
        let (ty, line) = self.ty()?;
        let name = self.ident()?;
        let init = match ty {
            Type::Int => {
                if *self.peek() != Tok::Assign {
                    return Err(self.error(["`=`"]));
                }
                self.bump();
                Some(self.expr()?)
            }
            Type::Array(_) => None,
        };
        Ok(Stmt { id: 0, line, kind: StmtKind::Decl { name, ty, init } })
    }

    fn assignment(&mut self) -> Result<Stmt, ParseError> {
        let line = self.line();
        let name = self.ident()?;
        match self.peek() {
            Tok::Assign => {
                self.bump();
                let value = self.expr()?;
                Ok(Stmt { id: 0, line, kind: StmtKind::Assign { name, value } })
            }
            Tok::LBracket => {
                self.bump();
                let index = self.expr()?;
                self.expect(Tok::RBracket)?;
                self.expect(Tok::Assign)?;
                let value = self.expr()?;
                Ok(Stmt { id: 0, line, kind: StmtKind::ArrayAssign { name, index, value } })
            }
            _ => Err(self.error(["`=`", "`[`"])),
        }
    }

    fn if_statement(&mut self) -> Result<Stmt, ParseError> {
        let line = self.line();
        self.expect(Tok::KwIf)?;
        self.expect(Tok::LParen)?;
        let cond = self.expr()?;
        self.expect(Tok::RParen)?;
        let (then_body, _) = self.block()?;
        let else_body = if *self.peek() == Tok::KwElse {
            self.bump();
            match self.peek() {
                Tok::KwIf => Some(vec![self.if_statement()?]),
                Tok::LBrace => Some(self.block()?.0),
                _ => return Err(self.error(["`{`", "`if`"])),
            }
        } else {
            None
        };
        Ok(Stmt { id: 0, line, kind: StmtKind::If { cond, then_body, else_body } })
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        self.binary(1)
    }

    fn binary_op(&self) -> Option<BinOp> {
        Some(match self.peek() {
            Tok::OrOr => BinOp::Or,
            Tok::AndAnd => BinOp::And,
            Tok::EqEq => BinOp::Eq,
            Tok::NotEq => BinOp::Ne,
            Tok::Lt => BinOp::Lt,
            Tok::Le => BinOp::Le,
            Tok::Gt => BinOp::Gt,
            Tok::Ge => BinOp::Ge,
            Tok::Plus => BinOp::Add,
            Tok::Minus => BinOp::Sub,
            Tok::Star => BinOp::Mul,
            Tok::Slash => BinOp::Div,
            Tok::Percent => BinOp::Rem,
            _ => return None,
        })
    }

    /// Precedence climbing; all binary operators are left-associative.
    fn binary(&mut self, min_prec: u8) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        while let Some(op) = self.binary_op() {
            let prec = op.precedence();
            if prec < min_prec {
                break;
            }
            self.bump();
            let rhs = self.binary(prec + 1)?;
            lhs = Expr { id: 0, line: lhs.line, kind: ExprKind::Binary { op, lhs: Box::new(lhs), rhs: Box::new(rhs) } };
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        let line = self.line();
        let op = match self.peek() {
            Tok::Minus => UnOp::Neg,
            Tok::Bang => UnOp::Not,
            _ => return self.primary(),
        };
        self.bump();
        let operand = self.unary()?;
        Ok(Expr { id: 0, line, kind: ExprKind::Unary { op, operand: Box::new(operand) } })
    }

    fn primary(&mut self) -> Result<Expr, ParseError> {
        let line = self.line();
        match self.peek().clone() {
            Tok::Int(v) => {
                self.bump();
                Ok(Expr { id: 0, line, kind: ExprKind::Const(v) })
            }
            Tok::Ident(name) => {
                self.bump();
                match self.peek() {
                    Tok::LParen => {
                        self.bump();
                        let mut args = Vec::new();
                        if *self.peek() != Tok::RParen {
                            loop {
                                args.push(self.expr()?);
                                if *self.peek() == Tok::Comma {
                                    self.bump();
                                } else {
                                    break;
                                }
                            }
                        }
                        if *self.peek() != Tok::RParen {
                            return Err(self.error(["`,`", "`)`"]));
                        }
                        self.bump();
                        Ok(Expr { id: 0, line, kind: ExprKind::Call { name, args } })
                    }
                    Tok::LBracket => {
                        self.bump();
                        let index = self.expr()?;
                        self.expect(Tok::RBracket)?;
                        Ok(Expr { id: 0, line, kind: ExprKind::Index { name, index: Box::new(index) } })
                    }
                    _ => Ok(Expr { id: 0, line, kind: ExprKind::Var(name) }),
                }
            }
            Tok::LParen => {
                self.bump();
                let e = self.expr()?;
                self.expect(Tok::RParen)?;
                Ok(e)
            }
            _ => Err(self.error(["integer", "identifier", "`(`", "`-`", "`!`"])),
        }
    }
}

/// Numbers every node in pre-order and returns the node count.
fn assign_ids(functions: &mut [FunctionDef]) -> usize {
    fn expr(e: &mut Expr, next: &mut NodeId) {
        e.id = *next;
        *next += 1;
        match &mut e.kind {
            ExprKind::Const(_) | ExprKind::Var(_) => {}
            ExprKind::Index { index, .. } => expr(index, next),
            ExprKind::Call { args, .. } => args.iter_mut().for_each(|a| expr(a, next)),
            ExprKind::Binary { lhs, rhs, .. } => {
                expr(lhs, next);
                expr(rhs, next);
            }
            ExprKind::Unary { operand, .. } => expr(operand, next),
        }
    }

    fn stmt(s: &mut Stmt, next: &mut NodeId) {
        s.id = *next;
        *next += 1;
        match &mut s.kind {
            StmtKind::Decl { init, .. } => {
                if let Some(e) = init {
                    expr(e, next);
                }
            }
            StmtKind::Assign { value, .. } => expr(value, next),
            StmtKind::ArrayAssign { index, value, .. } => {
                expr(index, next);
                expr(value, next);
            }
            StmtKind::If { cond, then_body, else_body } => {
                expr(cond, next);
                then_body.iter_mut().for_each(|s| stmt(s, next));
                if let Some(b) = else_body {
                    b.iter_mut().for_each(|s| stmt(s, next));
                }
            }
            StmtKind::While { cond, body } => {
                expr(cond, next);
                body.iter_mut().for_each(|s| stmt(s, next));
            }
            StmtKind::For { init, cond, update, body } => {
                stmt(init, next);
                expr(cond, next);
                stmt(update, next);
                body.iter_mut().for_each(|s| stmt(s, next));
            }
            StmtKind::Print { value } | StmtKind::Return { value } => expr(value, next),
        }
    }

    let mut next = 0;
    for f in functions {
        f.id = next;
        next += 1;
        f.body.iter_mut().for_each(|s| stmt(s, &mut next));
    }
    next as usize
}

fn index_nodes(functions: &[FunctionDef], count: usize) -> Vec<NodeInfo> {
    let placeholder = NodeInfo { kind: NodeKind::Const, line: 0, parent: None, function: 0 };
    let mut nodes = vec![placeholder; count];

    fn put(nodes: &mut [NodeInfo], id: NodeId, kind: NodeKind, line: u32, parent: Option<NodeId>, function: usize) {
        nodes[id as usize] = NodeInfo { kind, line, parent, function };
    }

    fn expr(nodes: &mut [NodeInfo], e: &Expr, parent: NodeId, function: usize) {
        put(nodes, e.id, e.kind.node_kind(), e.line, Some(parent), function);
        match &e.kind {
            ExprKind::Const(_) | ExprKind::Var(_) => {}
            ExprKind::Index { index, .. } => expr(nodes, index, e.id, function),
            ExprKind::Call { args, .. } => args.iter().for_each(|a| expr(nodes, a, e.id, function)),
            ExprKind::Binary { lhs, rhs, .. } => {
                expr(nodes, lhs, e.id, function);
                expr(nodes, rhs, e.id, function);
            }
            ExprKind::Unary { operand, .. } => expr(nodes, operand, e.id, function),
        }
    }

    fn stmts(nodes: &mut [NodeInfo], list: &[Stmt], parent: NodeId, function: usize) {
        for s in list {
            stmt(nodes, s, parent, function);
        }
    }

    fn stmt(nodes: &mut [NodeInfo], s: &Stmt, parent: NodeId, function: usize) {
        put(nodes, s.id, s.kind.node_kind(), s.line, Some(parent), function);
        for e in s.exprs() {
            expr(nodes, e, s.id, function);
        }
        match &s.kind {
            StmtKind::If { then_body, else_body, .. } => {
                stmts(nodes, then_body, s.id, function);
                if let Some(b) = else_body {
                    stmts(nodes, b, s.id, function);
                }
            }
            StmtKind::While { body, .. } => stmts(nodes, body, s.id, function),
            StmtKind::For { init, update, body, .. } => {
                stmt(nodes, init, s.id, function);
                stmt(nodes, update, s.id, function);
                stmts(nodes, body, s.id, function);
            }
            _ => {}
        }
    }

    for (fi, f) in functions.iter().enumerate() {
        put(&mut nodes, f.id, NodeKind::Function, f.line, None, fi);
        stmts(&mut nodes, &f.body, f.id, fi);
    }
    nodes
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum ExprTy {
    Int,
    Bool,
    Array(usize),
}

impl ExprTy {
    fn name(self) -> String {
        match self {
            ExprTy::Int => "int".into(),
            ExprTy::Bool => "boolean condition".into(),
            ExprTy::Array(n) => format!("int[{n}]"),
        }
    }

    fn of(ty: Type) -> Self {
        match ty {
            Type::Int => ExprTy::Int,
            Type::Array(n) => ExprTy::Array(n),
        }
    }
}

fn sem(line: u32, kind: SemanticErrorKind) -> LangError {
    LangError::Semantic(SemanticError { line, kind })
}

fn check(program: &Program) -> Result<(), LangError> {
    let mut signatures: HashMap<&str, &FunctionDef> = HashMap::new();
    for f in &program.functions {
        if signatures.insert(&f.name, f).is_some() {
            return Err(sem(f.line, SemanticErrorKind::DuplicateFunction(f.name.clone())));
        }
    }
    if !signatures.contains_key(program.entry.as_str()) {
        let line = program.functions.first().map_or(1, |f| f.line);
        return Err(sem(line, SemanticErrorKind::MissingMain));
    }
    for f in &program.functions {
        Checker { signatures: &signatures, scopes: Vec::new(), visible: HashSet::new() }.function(f)?;
    }
    Ok(())
}

struct Checker<'a> {
    signatures: &'a HashMap<&'a str, &'a FunctionDef>,
    scopes: Vec<Vec<(String, Type)>>,
    visible: HashSet<String>,
}

impl Checker<'_> {
    fn declare(&mut self, name: &str, ty: Type, line: u32) -> Result<(), LangError> {
        if let Type::Array(n) = ty {
            if n == 0 || n > MAX_ARRAY_SIZE {
                return Err(sem(line, SemanticErrorKind::BadArraySize { size: n as i64, max: MAX_ARRAY_SIZE }));
            }
        }
        if !self.visible.insert(name.to_owned()) {
            return Err(sem(line, SemanticErrorKind::DuplicateDeclaration(name.to_owned())));
        }
        self.scopes.last_mut().expect("scope stack is never empty inside a function").push((name.to_owned(), ty));
        Ok(())
    }

    fn lookup(&self, name: &str) -> Option<Type> {
        self.scopes.iter().rev().flat_map(|s| s.iter().rev()).find(|(n, _)| n == name).map(|(_, t)| *t)
    }

    fn push(&mut self) {
        self.scopes.push(Vec::new());
    }

    fn pop(&mut self) {
        if let Some(scope) = self.scopes.pop() {
            for (name, _) in scope {
                self.visible.remove(&name);
            }
        }
    }

    fn function(&mut self, f: &FunctionDef) -> Result<(), LangError> {
        self.push();
        for p in &f.params {
            self.declare(&p.name, p.ty, f.line)?;
        }
        self.block(&f.body)?;
        self.pop();
        Ok(())
    }

    fn block(&mut self, stmts: &[Stmt]) -> Result<(), LangError> {
        for s in stmts {
            self.stmt(s)?;
        }
        Ok(())
    }

    fn scoped_block(&mut self, stmts: &[Stmt]) -> Result<(), LangError> {
        self.push();
        let r = self.block(stmts);
        self.pop();
        r
    }

    fn expect_ty(&self, line: u32, expected: ExprTy, found: ExprTy) -> Result<(), LangError> {
        if expected == found {
            Ok(())
        } else {
            Err(sem(line, SemanticErrorKind::TypeMismatch { expected: expected.name(), found: found.name() }))
        }
    }

    fn var_type(&self, name: &str, line: u32) -> Result<Type, LangError> {
        self.lookup(name).ok_or_else(|| sem(line, SemanticErrorKind::UndeclaredIdentifier(name.to_owned())))
    }

    fn stmt(&mut self, s: &Stmt) -> Result<(), LangError> {
        match &s.kind {
            StmtKind::Decl { name, ty, init } => {
                if let Some(e) = init {
                    let t = self.expr(e)?;
                    self.expect_ty(e.line, ExprTy::of(*ty), t)?;
                }
                self.declare(name, *ty, s.line)?;
            }
            StmtKind::Assign { name, value } => {
                let target = self.var_type(name, s.line)?;
                self.expect_ty(s.line, ExprTy::Int, ExprTy::of(target))?;
                let t = self.expr(value)?;
                self.expect_ty(value.line, ExprTy::Int, t)?;
            }
            StmtKind::ArrayAssign { name, index, value } => {
                let target = self.var_type(name, s.line)?;
                if !matches!(target, Type::Array(_)) {
                    return Err(sem(
                        s.line,
                        SemanticErrorKind::TypeMismatch { expected: "int[]".into(), found: "int".into() },
                    ));
                }
                let ti = self.expr(index)?;
                self.expect_ty(index.line, ExprTy::Int, ti)?;
                let tv = self.expr(value)?;
                self.expect_ty(value.line, ExprTy::Int, tv)?;
            }
            StmtKind::If { cond, then_body, else_body } => {
                let t = self.expr(cond)?;
                self.expect_ty(cond.line, ExprTy::Bool, t)?;
                self.scoped_block(then_body)?;
                if let Some(b) = else_body {
                    self.scoped_block(b)?;
                }
            }
            StmtKind::While { cond, body } => {
                let t = self.expr(cond)?;
                self.expect_ty(cond.line, ExprTy::Bool, t)?;
                self.scoped_block(body)?;
            }
            StmtKind::For { init, cond, update, body } => {
                self.push();
                self.stmt(init)?;
                let t = self.expr(cond)?;
                self.expect_ty(cond.line, ExprTy::Bool, t)?;
                self.stmt(update)?;
                self.scoped_block(body)?;
                self.pop();
            }
            StmtKind::Print { value } | StmtKind::Return { value } => {
                let t = self.expr(value)?;
                self.expect_ty(value.line, ExprTy::Int, t)?;
            }
        }
        Ok(())
    }

    fn expr(&self, e: &Expr) -> Result<ExprTy, LangError> {
        match &e.kind {
            ExprKind::Const(_) => Ok(ExprTy::Int),
            ExprKind::Var(name) => Ok(ExprTy::of(self.var_type(name, e.line)?)),
            ExprKind::Index { name, index } => {
                match self.var_type(name, e.line)? {
                    Type::Array(_) => {}
                    Type::Int => {
                        return Err(sem(
                            e.line,
                            SemanticErrorKind::TypeMismatch { expected: "int[]".into(), found: "int".into() },
                        ))
                    }
                }
                let t = self.expr(index)?;
                self.expect_ty(index.line, ExprTy::Int, t)?;
                Ok(ExprTy::Int)
            }
            ExprKind::Call { name, args } => {
                let f = self
                    .signatures
                    .get(name.as_str())
                    .ok_or_else(|| sem(e.line, SemanticErrorKind::UndeclaredFunction(name.clone())))?;
                if f.params.len() != args.len() {
                    return Err(sem(
                        e.line,
                        SemanticErrorKind::ArityMismatch {
                            name: name.clone(),
                            expected: f.params.len(),
                            found: args.len(),
                        },
                    ));
                }
                for (p, a) in f.params.iter().zip(args) {
                    let t = self.expr(a)?;
                    self.expect_ty(a.line, ExprTy::of(p.ty), t)?;
                }
                Ok(ExprTy::Int)
            }
            ExprKind::Unary { op, operand } => {
                let t = self.expr(operand)?;
                let want = match op {
                    UnOp::Neg => ExprTy::Int,
                    UnOp::Not => ExprTy::Bool,
                };
                self.expect_ty(operand.line, want, t)?;
                Ok(want)
            }
            ExprKind::Binary { op, lhs, rhs } => {
                let operand = if op.is_logical() { ExprTy::Bool } else { ExprTy::Int };
                let tl = self.expr(lhs)?;
                self.expect_ty(lhs.line, operand, tl)?;
                let tr = self.expr(rhs)?;
                self.expect_ty(rhs.line, operand, tr)?;
                Ok(if op.is_arithmetic() { ExprTy::Int } else { ExprTy::Bool })
            }
        }
    }
}
