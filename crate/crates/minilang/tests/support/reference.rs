//! Brute-force reference evaluator for MiniLang, written separately from the
//! crate's own front end and interpreter. It shares no code with them and is
//! used only as a test oracle.
#![allow(dead_code)]

use std::collections::{BTreeMap, HashMap};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Arg {
    Int(i64),
    Arr(Vec<i64>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Ending {
    Normal,
    OutOfSteps { loop_line: u32 },
    Fault(String),
}

#[derive(Debug, Clone)]
pub struct Outcome {
    pub outputs: Vec<String>,
    /// Last value assigned to each scalar name inside `main`.
    pub finals: BTreeMap<String, i64>,
    pub ending: Ending,
}

pub fn run(source: &str, args: &BTreeMap<String, Arg>, budget: u64) -> Outcome {
    let toks = lex(source);
    let mut p = P { toks, at: 0 };
    let mut funcs = HashMap::new();
    while p.at < p.toks.len() {
        let f = p.func();
        funcs.insert(f.name.clone(), f);
    }
    let mut ev = Eval {
        funcs: &funcs,
        out: Vec::new(),
        finals: BTreeMap::new(),
        used: 0,
        budget,
        depth: 0,
        loop_stack: Vec::new(),
    };
    let main = &funcs["main"];
    let mut vals = Vec::new();
    for (name, is_arr) in &main.params {
        match (args.get(name), is_arr) {
            (Some(Arg::Int(v)), None) => vals.push(V::I(*v)),
            (Some(Arg::Arr(v)), Some(n)) if v.len() == *n => vals.push(V::A(v.clone())),
            _ => {
                return Outcome { outputs: vec![], finals: BTreeMap::new(), ending: Ending::Fault("bad input".into()) }
            }
        }
    }
    let ending = match ev.invoke(main, vals, true) {
        Ok(_) => Ending::Normal,
        Err(Stop::Steps) => Ending::OutOfSteps { loop_line: *ev.loop_stack.last().unwrap_or(&0) },
        Err(Stop::Fault(r)) => Ending::Fault(r),
    };
    Outcome { outputs: ev.out, finals: ev.finals, ending }
}

// ---- lexing ----

#[derive(Debug, Clone, PartialEq)]
enum T {
    Num(i64),
    Id(String),
    Sym(&'static str),
}

fn lex(src: &str) -> Vec<(T, u32)> {
    const SYMS: [&str; 25] = [
        "&&", "||", "==", "!=", "<=", ">=", "<", ">", "!", "+", "-", "*", "/", "%", "=", "(", ")", "{", "}", "[", "]",
        ";", ",", "//", "\n",
    ];
    let b = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    let mut line = 1;
    'outer: while i < b.len() {
        let c = b[i] as char;
        if c == '\n' {
            line += 1;
            i += 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        if c.is_ascii_digit() {
            let start = i;
            while i < b.len() && b[i].is_ascii_digit() {
                i += 1;
            }
            out.push((T::Num(src[start..i].parse().unwrap()), line));
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < b.len() && (b[i].is_ascii_alphanumeric() || b[i] == b'_') {
                i += 1;
            }
            out.push((T::Id(src[start..i].to_string()), line));
            continue;
        }
        for s in SYMS {
            if src[i..].starts_with(s) {
                if s == "//" {
                    while i < b.len() && b[i] != b'\n' {
                        i += 1;
                    }
                } else {
                    out.push((T::Sym(s), line));
                    i += s.len();
                }
                continue 'outer;
            }
        }
        panic!("reference lexer: unexpected {c:?}");
    }
    out
}

// ---- parsing ----

#[derive(Debug)]
enum E {
    Num(i64),
    Var(String),
    Idx(String, Box<E>, u32),
    Call(String, Vec<E>, u32),
    Neg(Box<E>),
    Not(Box<E>),
    Bin(&'static str, Box<E>, Box<E>, u32),
}

#[derive(Debug)]
enum S {
    Int(String, E, u32),
    Arr(String, usize),
    Set(String, E, u32),
    SetAt(String, E, E, u32),
    If(E, Vec<S>, Vec<S>),
    While(E, Vec<S>, u32),
    For(Box<S>, E, Box<S>, Vec<S>, u32),
    Print(E, u32),
    Ret(E),
}

struct F {
    name: String,
    params: Vec<(String, Option<usize>)>,
    body: Vec<S>,
}

struct P {
    toks: Vec<(T, u32)>,
    at: usize,
}

impl P {
    fn peek(&self) -> &T {
        &self.toks[self.at].0
    }
    fn line(&self) -> u32 {
        self.toks[self.at.min(self.toks.len() - 1)].1
    }
    fn next(&mut self) -> T {
        self.at += 1;
        self.toks[self.at - 1].0.clone()
    }
    fn is(&self, s: &str) -> bool {
        matches!(self.toks.get(self.at), Some((T::Sym(x), _)) if *x == s)
    }
    fn eat(&mut self, s: &str) {
        assert!(self.is(s), "reference parser: expected {s} at token {}", self.at);
        self.at += 1;
    }
    fn ident(&mut self) -> String {
        match self.next() {
            T::Id(s) => s,
            t => panic!("reference parser: expected identifier, got {t:?}"),
        }
    }
    /// `int` or `int[N]`; returns the array size if any.
    fn ty(&mut self) -> Option<usize> {
        assert_eq!(self.ident(), "int");
        if self.is("[") {
            self.eat("[");
            let T::Num(n) = self.next() else { panic!("array size") };
            self.eat("]");
            Some(n as usize)
        } else {
            None
        }
    }

    fn func(&mut self) -> F {
        self.ty();
        let name = self.ident();
        self.eat("(");
        let mut params = Vec::new();
        while !self.is(")") {
            let t = self.ty();
            params.push((self.ident(), t));
            if self.is(",") {
                self.eat(",");
            }
        }
        self.eat(")");
        let body = self.block();
        F { name, params, body }
    }

    fn block(&mut self) -> Vec<S> {
        self.eat("{");
        let mut out = Vec::new();
        while !self.is("}") {
            out.push(self.stmt());
        }
        self.eat("}");
        out
    }

    fn simple(&mut self) -> S {
        let line = self.line();
        if matches!(self.peek(), T::Id(k) if k == "int") {
            let size = self.ty();
            let name = self.ident();
            return match size {
                Some(n) => S::Arr(name, n),
                None => {
                    self.eat("=");
                    S::Int(name, self.expr(), line)
                }
            };
        }
        let name = self.ident();
        if self.is("[") {
            self.eat("[");
            let i = self.expr();
            self.eat("]");
            self.eat("=");
            S::SetAt(name, i, self.expr(), line)
        } else {
            self.eat("=");
            S::Set(name, self.expr(), line)
        }
    }

    fn stmt(&mut self) -> S {
        let line = self.line();
        let kw = match self.peek() {
            T::Id(k) => k.clone(),
            _ => String::new(),
        };
        match kw.as_str() {
            "if" => {
                self.next();
                self.eat("(");
                let c = self.expr();
                self.eat(")");
                let th = self.block();
                let mut el = Vec::new();
                if matches!(self.peek(), T::Id(k) if k == "else") {
                    self.next();
                    if matches!(self.peek(), T::Id(k) if k == "if") {
                        el.push(self.stmt());
                    } else {
                        el = self.block();
                    }
                }
                S::If(c, th, el)
            }
            "while" => {
                self.next();
                self.eat("(");
                let c = self.expr();
                self.eat(")");
                S::While(c, self.block(), line)
            }
            "for" => {
                self.next();
                self.eat("(");
                let init = self.simple();
                self.eat(";");
                let c = self.expr();
                self.eat(";");
                let upd = self.simple();
                self.eat(")");
                S::For(Box::new(init), c, Box::new(upd), self.block(), line)
            }
            "print" => {
                self.next();
                self.eat("(");
                let e = self.expr();
                self.eat(")");
                self.eat(";");
                S::Print(e, line)
            }
            "return" => {
                self.next();
                let e = self.expr();
                self.eat(";");
                S::Ret(e)
            }
            _ => {
                let s = self.simple();
                self.eat(";");
                s
            }
        }
    }

    // precedence climbing over a fixed table
    fn expr(&mut self) -> E {
        self.level(0)
    }

    fn level(&mut self, lvl: usize) -> E {
        const LEVELS: [&[&str]; 6] =
            [&["||"], &["&&"], &["==", "!="], &["<", "<=", ">", ">="], &["+", "-"], &["*", "/", "%"]];
        if lvl == LEVELS.len() {
            return self.unary();
        }
        let mut lhs = self.level(lvl + 1);
        loop {
            let line = self.line();
            let op = LEVELS[lvl].iter().find(|o| self.is(o));
            match op {
                Some(o) => {
                    self.eat(o);
                    let rhs = self.level(lvl + 1);
                    lhs = E::Bin(o, Box::new(lhs), Box::new(rhs), line);
                }
                None => return lhs,
            }
        }
    }

    fn unary(&mut self) -> E {
        let line = self.line();
        if self.is("-") {
            self.eat("-");
            return E::Neg(Box::new(self.unary()));
        }
        if self.is("!") {
            self.eat("!");
            return E::Not(Box::new(self.unary()));
        }
        if self.is("(") {
            self.eat("(");
            let e = self.expr();
            self.eat(")");
            return e;
        }
        match self.next() {
            T::Num(n) => E::Num(n),
            T::Id(name) => {
                if self.is("(") {
                    self.eat("(");
                    let mut args = Vec::new();
                    while !self.is(")") {
                        args.push(self.expr());
                        if self.is(",") {
                            self.eat(",");
                        }
                    }
                    self.eat(")");
                    E::Call(name, args, line)
                } else if self.is("[") {
                    self.eat("[");
                    let i = self.expr();
                    self.eat("]");
                    E::Idx(name, Box::new(i), line)
                } else {
                    E::Var(name)
                }
            }
            t => panic!("reference parser: unexpected {t:?}"),
        }
    }
}

// ---- evaluation ----

#[derive(Debug, Clone)]
enum V {
    I(i64),
    A(Vec<i64>),
}

enum Stop {
    Steps,
    Fault(String),
}

struct Eval<'a> {
    funcs: &'a HashMap<String, F>,
    out: Vec<String>,
    finals: BTreeMap<String, i64>,
    used: u64,
    budget: u64,
    depth: usize,
    /// Lines of the loops currently executing, innermost last.
    loop_stack: Vec<u32>,
}

type Env = Vec<HashMap<String, V>>;

fn lookup<'e>(env: &'e mut Env, name: &str) -> &'e mut V {
    for scope in env.iter_mut().rev() {
        if let Some(v) = scope.get_mut(name) {
            return v;
        }
    }
    panic!("reference evaluator: unbound {name}")
}

impl Eval<'_> {
    fn step(&mut self) -> Result<(), Stop> {
        if self.used == self.budget {
            return Err(Stop::Steps);
        }
        self.used += 1;
        Ok(())
    }

    fn invoke(&mut self, f: &F, args: Vec<V>, is_main: bool) -> Result<i64, Stop> {
        if self.depth == 64 {
            return Err(Stop::Fault("recursion depth exceeded".into()));
        }
        self.depth += 1;
        let mut env: Env = vec![HashMap::new()];
        for ((name, _), v) in f.params.iter().zip(args) {
            if let (true, V::I(x)) = (is_main, &v) {
                self.finals.insert(name.clone(), *x);
            }
            env[0].insert(name.clone(), v);
        }
        let r = self.run_block(&f.body, &mut env, is_main)?;
        self.depth -= 1;
        Ok(r.unwrap_or(0))
    }

    fn run_block(&mut self, body: &[S], env: &mut Env, main: bool) -> Result<Option<i64>, Stop> {
        env.push(HashMap::new());
        for s in body {
            if let Some(r) = self.exec(s, env, main)? {
                env.pop();
                return Ok(Some(r));
            }
        }
        env.pop();
        Ok(None)
    }

    fn note(&mut self, main: bool, name: &str, v: i64) {
        if main {
            self.finals.insert(name.to_string(), v);
        }
    }

    fn exec(&mut self, s: &S, env: &mut Env, main: bool) -> Result<Option<i64>, Stop> {
        self.step()?;
        match s {
            S::Int(name, e, _) => {
                let v = self.eval(e, env)?;
                env.last_mut().unwrap().insert(name.clone(), V::I(v));
                self.note(main, name, v);
            }
            S::Arr(name, n) => {
                env.last_mut().unwrap().insert(name.clone(), V::A(vec![0; *n]));
            }
            S::Set(name, e, _) => {
                let v = self.eval(e, env)?;
                *lookup(env, name) = V::I(v);
                self.note(main, name, v);
            }
            S::SetAt(name, i, e, _) => {
                let i = self.eval(i, env)?;
                let v = self.eval(e, env)?;
                let V::A(items) = lookup(env, name) else { panic!("not an array") };
                if i < 0 || i as usize >= items.len() {
                    return Err(Stop::Fault("index out of bounds".into()));
                }
                items[i as usize] = v;
            }
            S::If(c, th, el) => {
                let branch = if self.eval(c, env)? != 0 { th } else { el };
                return self.run_block(branch, env, main);
            }
            S::While(c, body, line) => {
                self.loop_stack.push(*line);
                loop {
                    self.step()?;
                    if self.eval(c, env)? == 0 {
                        break;
                    }
                    if let Some(r) = self.run_block(body, env, main)? {
                        self.loop_stack.pop();
                        return Ok(Some(r));
                    }
                }
                self.loop_stack.pop();
            }
            S::For(init, c, upd, body, line) => {
                env.push(HashMap::new());
                self.exec(init, env, main)?;
                self.loop_stack.push(*line);
                loop {
                    self.step()?;
                    if self.eval(c, env)? == 0 {
                        break;
                    }
                    if let Some(r) = self.run_block(body, env, main)? {
                        self.loop_stack.pop();
                        env.pop();
                        return Ok(Some(r));
                    }
                    self.exec(upd, env, main)?;
                }
                self.loop_stack.pop();
                env.pop();
            }
            S::Print(e, _) => {
                let v = self.eval(e, env)?;
                self.out.push(v.to_string());
            }
            S::Ret(e) => return Ok(Some(self.eval(e, env)?)),
        }
        Ok(None)
    }

    /// Booleans are represented as 0/1.
    fn eval(&mut self, e: &E, env: &mut Env) -> Result<i64, Stop> {
        Ok(match e {
            E::Num(n) => *n,
            E::Var(name) => match lookup(env, name) {
                V::I(v) => *v,
                V::A(_) => panic!("array used as scalar"),
            },
            E::Idx(name, i, _) => {
                let i = self.eval(i, env)?;
                let V::A(items) = lookup(env, name) else { panic!("not an array") };
                if i < 0 || i as usize >= items.len() {
                    return Err(Stop::Fault("index out of bounds".into()));
                }
                items[i as usize]
            }
            E::Call(name, args, _) => {
                let f = &self.funcs[name];
                let mut vals = Vec::new();
                for a in args {
                    match a {
                        E::Var(n) if matches!(lookup(env, n), V::A(_)) => vals.push(lookup(env, n).clone()),
                        _ => vals.push(V::I(self.eval(a, env)?)),
                    }
                }
                self.invoke(f, vals, false)?
            }
            E::Neg(x) => self.eval(x, env)?.wrapping_neg(),
            E::Not(x) => (self.eval(x, env)? == 0) as i64,
            E::Bin(op, l, r, _) => {
                let a = self.eval(l, env)?;
                if *op == "&&" && a == 0 {
                    return Ok(0);
                }
                if *op == "||" && a != 0 {
                    return Ok(1);
                }
                let b = self.eval(r, env)?;
                match *op {
                    "+" => a.wrapping_add(b),
                    "-" => a.wrapping_sub(b),
                    "*" => a.wrapping_mul(b),
                    "/" | "%" if b == 0 => return Err(Stop::Fault("division by zero".into())),
                    "/" => a.wrapping_div(b),
                    "%" => a.wrapping_rem(b),
                    "==" => (a == b) as i64,
                    "!=" => (a != b) as i64,
                    "<" => (a < b) as i64,
                    "<=" => (a <= b) as i64,
                    ">" => (a > b) as i64,
                    ">=" => (a >= b) as i64,
                    "&&" | "||" => (b != 0) as i64,
                    _ => unreachable!(),
                }
            }
        })
    }
}

/// Loads every `.ml` program under the corpus directory, sorted by file name.
pub fn corpus() -> Vec<(String, String)> {
    let dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("..").join("minilang").join("tests").join("corpus");
    let mut out: Vec<(String, String)> = std::fs::read_dir(&dir)
        .unwrap_or_else(|e| panic!("corpus dir {}: {e}", dir.display()))
        .filter_map(|e| {
            let path = e.ok()?.path();
            (path.extension()? == "ml").then(|| {
                let name = path.file_stem().unwrap().to_string_lossy().into_owned();
                (name, std::fs::read_to_string(&path).unwrap())
            })
        })
        .collect();
    out.sort();
    out
}

/// Number of `while`/`for` headers in a program, counted textually.
pub fn loop_count(source: &str) -> usize {
    lex(source).iter().filter(|(t, _)| matches!(t, T::Id(k) if k == "while" || k == "for")).count()
}
