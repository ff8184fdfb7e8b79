//! Configuration, spec and term files.
//!
//! A configuration is a sequence of statements, one per logical line (a line
//! continues while braces, brackets or parentheses are open):
//!
//! ```text
//! actions { a, b, c }
//! data { d }
//! control { yield }
//! comm a * b -> c
//! strategy rr = cyclic
//! strategy sem = semaphore(k=2, semaphores={r1, r2})
//! deadlock_mode = deferred
//! guard_bound = 16
//! cr(d) = a . b
//! spec E { X = a . Y; Y = b . X; }
//! ```
//!
//! Statements are processed in order, so names must be declared before use.

use std::collections::BTreeSet;
use std::sync::Arc;

use crate::context::{Context, DeadlockMode};
use crate::error::{Error, Result};
use crate::strategy::{Cyclic, Semaphore, Strategy, Uniform};
use crate::syntax::lexer::{Tok, Token, lex_at};
use crate::syntax::parser::Parser;
use crate::syntax::{Action, Name, RecSpec, Term, name};

/// A logical line: its text and the physical line it starts on.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LogicalLine {
    pub line: usize,
    pub text: String,
}

/// Groups physical lines into logical lines, dropping blank and comment-only ones.
pub fn logical_lines(src: &str) -> Vec<LogicalLine> {
    let mut out = Vec::new();
    let mut cur: Option<LogicalLine> = None;
    let mut depth: i64 = 0;
    for (k, raw) in src.lines().enumerate() {
        let code = raw.split('#').next().unwrap_or("");
        if cur.is_none() && code.trim().is_empty() {
            continue;
        }
        let entry = cur.get_or_insert_with(|| LogicalLine { line: k + 1, text: String::new() });
        if !entry.text.is_empty() {
            entry.text.push('\n');
        }
        entry.text.push_str(code);
        for c in code.chars() {
            match c {
                '{' | '[' | '(' => depth += 1,
                '}' | ']' | ')' => depth -= 1,
                _ => {}
            }
        }
        if depth <= 0 {
            depth = 0;
            out.push(cur.take().unwrap());
        }
    }
    if let Some(rest) = cur {
        out.push(rest);
    }
    out
}

/// Builds a context from configuration text, starting from the built-in strategies.
pub fn load_config(src: &str) -> Result<Context> {
    let mut ctx = Context::with_builtins();
    apply_config(&mut ctx, src)?;
    Ok(ctx)
}

/// Applies configuration statements to `ctx`, then validates γ.
pub fn apply_config(ctx: &mut Context, src: &str) -> Result<()> {
    for ll in logical_lines(src) {
        statement(ctx, &ll)?;
    }
    for (d, body) in &ctx.creation {
        if let Some(x) = body.free_vars().into_iter().next() {
            return Err(Error::Config(format!("creation body for `{d}` has free variable `{x}`")));
        }
    }
    ctx.validate_comm()
}

struct Cursor {
    toks: Vec<Token>,
    pos: usize,
}

impl Cursor {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T> {
        let t = &self.toks[self.pos];
        Err(Error::parse(t.line, t.col, msg))
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn eat(&mut self, tok: &Tok) -> bool {
        if self.peek() == tok {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, tok: Tok) -> Result<()> {
        if self.eat(&tok) {
            Ok(())
        } else {
            self.err(format!("expected {}, found {}", tok.describe(), self.peek().describe()))
        }
    }

    fn ident(&mut self) -> Result<String> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                self.bump();
                Ok(s)
            }
            other => self.err(format!("expected identifier, found {}", other.describe())),
        }
    }

    fn int(&mut self) -> Result<usize> {
        match self.peek().clone() {
            Tok::Int(s) => match s.parse() {
                Ok(v) => {
                    self.bump();
                    Ok(v)
                }
                Err(_) => self.err(format!("number `{s}` out of range")),
            },
            other => self.err(format!("expected number, found {}", other.describe())),
        }
    }

    fn end(&mut self) -> Result<()> {
        self.eat(&Tok::Semi);
        if *self.peek() == Tok::Eof { Ok(()) } else { self.err(format!("unexpected {}", self.peek().describe())) }
    }

    /// `{ x, y, ... }` of identifiers.
    fn ident_set(&mut self) -> Result<Vec<String>> {
        self.expect(Tok::LBrace)?;
        let mut out = Vec::new();
        if *self.peek() != Tok::RBrace {
            loop {
                out.push(self.ident()?);
                if !self.eat(&Tok::Comma) {
                    break;
                }
            }
        }
        self.expect(Tok::RBrace)?;
        Ok(out)
    }

    /// Runs the term parser on the remaining tokens, then resumes after it.
    fn with_parser<T>(&mut self, ctx: &Context, vars: &BTreeSet<Name>, f: impl FnOnce(&mut Parser) -> Result<T>) -> Result<T> {
        let rest = self.toks[self.pos..].to_vec();
        let mut p = Parser::new(rest, ctx, vars);
        let out = f(&mut p)?;
        self.pos += p.consumed();
        Ok(out)
    }
}

fn statement(ctx: &mut Context, ll: &LogicalLine) -> Result<()> {
    let toks = lex_at(&ll.text, ll.line, 1)?;
    let mut c = Cursor { toks, pos: 0 };
    let kw = c.ident()?;
    match kw.as_str() {
        "actions" => {
            let names = c.ident_set()?;
            ctx.declare_actions(names.iter().map(String::as_str));
            c.end()
        }
        "data" => {
            let names = c.ident_set()?;
            ctx.declare_data(names.iter().map(String::as_str));
            c.end()
        }
        "control" => {
            c.expect(Tok::LBrace)?;
            if *c.peek() != Tok::RBrace {
                loop {
                    let op = c.ident()?;
                    let arg = if c.eat(&Tok::LParen) {
                        let a = c.ident()?;
                        c.expect(Tok::RParen)?;
                        Some(name(&a))
                    } else {
                        None
                    };
                    ctx.control.insert(Action::Control { op: name(&op), arg });
                    if !c.eat(&Tok::Comma) {
                        break;
                    }
                }
            }
            c.expect(Tok::RBrace)?;
            c.end()
        }
        "comm" => {
            let empty = BTreeSet::new();
            let (a, b, r) = c.with_parser(ctx, &empty, |p| {
                let a = p.action()?;
                p.expect_tok(Tok::Star)?;
                let b = p.action()?;
                p.expect_tok(Tok::Arrow)?;
                let r = p.action()?;
                Ok((a, b, r))
            })?;
            ctx.comm.insert(a, b, r)?;
            c.end()
        }
        "strategy" => {
            let sname = c.ident()?;
            c.expect(Tok::Eq)?;
            let kind = c.ident()?;
            let st: Arc<dyn Strategy> = match kind.as_str() {
                "cyclic" => Arc::new(Cyclic),
                "uniform" => Arc::new(Uniform),
                "semaphore" => {
                    let (mut k, mut sems) = (None, None);
                    c.expect(Tok::LParen)?;
                    loop {
                        let key = c.ident()?;
                        c.expect(Tok::Eq)?;
                        match key.as_str() {
                            "k" => k = Some(c.int()?),
                            "semaphores" => sems = Some(c.ident_set()?),
                            _ => return c.err(format!("unknown semaphore option `{key}`")),
                        }
                        if !c.eat(&Tok::Comma) {
                            break;
                        }
                    }
                    c.expect(Tok::RParen)?;
                    let k = k.ok_or_else(|| Error::Config("semaphore strategy needs k".into()))?;
                    let sems = sems.unwrap_or_default();
                    Arc::new(Semaphore::new(k, sems.iter().map(|s| name(s)))?)
                }
                other => return c.err(format!("unknown strategy kind `{other}`")),
            };
            c.end()?;
            ctx.register_strategy(&sname, st).map(|_| ())
        }
        "deadlock_mode" => {
            c.expect(Tok::Eq)?;
            ctx.deadlock_mode = match c.ident()?.as_str() {
                "immediate" => DeadlockMode::Immediate,
                "deferred" => DeadlockMode::Deferred,
                other => return c.err(format!("unknown deadlock mode `{other}`")),
            };
            c.end()
        }
        "guard_bound" => {
            c.expect(Tok::Eq)?;
            ctx.guard_bound = c.int()?;
            c.end()
        }
        "cr" => {
            c.expect(Tok::LParen)?;
            let d = c.ident()?;
            c.expect(Tok::RParen)?;
            c.expect(Tok::Eq)?;
            if !ctx.knows_datum(&d) {
                return c.err(format!("unknown datum `{d}`"));
            }
            let empty = BTreeSet::new();
            let body = c.with_parser(ctx, &empty, |p| p.term())?;
            c.end()?;
            if ctx.creation.insert(name(&d), body).is_some() {
                return Err(Error::Config(format!("creation body for `{d}` defined twice")));
            }
            Ok(())
        }
        "spec" => {
            let sname = c.ident()?;
            let spec = spec_body(ctx, &mut c, &sname)?;
            c.end()?;
            ctx.register_spec(spec).map(|_| ())
        }
        other => c.err(format!("unknown statement `{other}`")),
    }
}

/// `{ X = t; Y = u; }`. The left-hand sides are collected first so that
/// right-hand sides may mention any of them.
fn spec_body(ctx: &Context, c: &mut Cursor, sname: &str) -> Result<RecSpec> {
    c.expect(Tok::LBrace)?;
    let mut vars = BTreeSet::new();
    let mut depth = 0i64;
    let mut at_start = true;
    for k in c.pos..c.toks.len() {
        let t = &c.toks[k].tok;
        if depth == 0 && at_start {
            if let (Tok::Ident(x), Some(Token { tok: Tok::Eq, .. })) = (t, c.toks.get(k + 1)) {
                vars.insert(name(x));
            }
        }
        at_start = false;
        match t {
            Tok::LBrace | Tok::LBracket | Tok::LParen => depth += 1,
            Tok::RBrace | Tok::RBracket | Tok::RParen => depth -= 1,
            Tok::Semi if depth == 0 => at_start = true,
            _ => {}
        }
        if depth < 0 {
            break;
        }
    }
    let mut equations = std::collections::BTreeMap::new();
    while *c.peek() != Tok::RBrace {
        let x = c.ident()?;
        c.expect(Tok::Eq)?;
        let t: Term = c.with_parser(ctx, &vars, |p| p.term())?;
        if equations.insert(name(&x), t).is_some() {
            return c.err(format!("variable `{x}` defined twice"));
        }
        if !c.eat(&Tok::Semi) {
            break;
        }
    }
    c.expect(Tok::RBrace)?;
    if equations.is_empty() {
        return Err(Error::Config(format!("spec `{sname}` has no equations")));
    }
    Ok(RecSpec::new(sname, equations))
}

/// One entry of a term file: an optional binding name and the term.
#[derive(Clone, Debug)]
pub struct TermEntry {
    pub name: Option<String>,
    pub line: usize,
    pub term: Term,
}

/// Parses a term file: one term or `name = term` binding per logical line.
pub fn parse_term_file(src: &str, ctx: &Context) -> Result<Vec<TermEntry>> {
    let empty = BTreeSet::new();
    let mut out = Vec::new();
    for ll in logical_lines(src) {
        let toks = lex_at(&ll.text, ll.line, 1)?;
        let mut c = Cursor { toks, pos: 0 };
        let binding = match (&c.toks[0].tok, c.toks.get(1).map(|t| &t.tok)) {
            (Tok::Ident(n), Some(Tok::Eq)) => Some(n.clone()),
            _ => None,
        };
        if binding.is_some() {
            c.pos = 2;
        }
        let term = c.with_parser(ctx, &empty, |p| p.term())?;
        c.end()?;
        out.push(TermEntry { name: binding, line: ll.line, term });
    }
    Ok(out)
}
