use std::collections::{BTreeMap, BTreeSet};

use crate::context::Context;
use crate::error::{Error, Result};
use crate::meadow::Rat;
use crate::syntax::lexer::{Tok, Token, lex, lex_at};
use crate::syntax::{Action, ControlState, History, Interleaving, Name, Term, name};

/// Parses a closed term.
pub fn parse_term(text: &str, ctx: &Context) -> Result<Term> {
    parse_term_with_vars(text, ctx, &BTreeSet::new())
}

/// Parses a term in which the identifiers in `vars` denote variables.
pub fn parse_term_with_vars(text: &str, ctx: &Context, vars: &BTreeSet<Name>) -> Result<Term> {
    let toks = lex(text)?;
    let mut p = Parser::new(toks, ctx, vars);
    let t = p.term()?;
    p.expect_eof()?;
    Ok(t)
}

/// Parses a term starting at the given file position (for diagnostics).
pub fn parse_term_at(text: &str, line: usize, col: usize, ctx: &Context, vars: &BTreeSet<Name>) -> Result<Term> {
    let toks = lex_at(text, line, col)?;
    let mut p = Parser::new(toks, ctx, vars);
    let t = p.term()?;
    p.expect_eof()?;
    Ok(t)
}

/// Parses a rational literal `p`, `p/q`, `-p/q`.
pub fn parse_rat(text: &str) -> Result<Rat> {
    text.parse::<Rat>().map_err(|e| Error::parse(1, 1, e.to_string()))
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum Level1 {
    Par,
    LeftMerge,
    Comm,
    PAlt,
}

impl Level1 {
    fn symbol(self) -> &'static str {
        match self {
            Level1::Par => "||",
            Level1::LeftMerge => "||_",
            Level1::Comm => "|",
            Level1::PAlt => "+[p]",
        }
    }
}

pub(crate) struct Parser<'a> {
    toks: Vec<Token>,
    pos: usize,
    ctx: &'a Context,
    vars: &'a BTreeSet<Name>,
}

impl<'a> Parser<'a> {
    pub(crate) fn new(toks: Vec<Token>, ctx: &'a Context, vars: &'a BTreeSet<Name>) -> Parser<'a> {
        Parser { toks, pos: 0, ctx, vars }
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, k: usize) -> &Tok {
        let i = (self.pos + k).min(self.toks.len() - 1);
        &self.toks[i].tok
    }

    fn here(&self) -> (usize, usize) {
        let t = &self.toks[self.pos];
        (t.line, t.col)
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T> {
        let (l, c) = self.here();
        Err(Error::parse(l, c, msg))
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

    pub(crate) fn expect_tok(&mut self, tok: Tok) -> Result<()> {
        self.expect(tok)
    }

    /// Number of tokens consumed so far.
    pub(crate) fn consumed(&self) -> usize {
        self.pos
    }

    pub(crate) fn expect_eof(&mut self) -> Result<()> {
        if *self.peek() == Tok::Eof {
            Ok(())
        } else {
            self.err(format!("unexpected {}", self.peek().describe()))
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
            Tok::Int(s) => {
                let v = s.parse::<usize>();
                match v {
                    Ok(v) => {
                        self.bump();
                        Ok(v)
                    }
                    Err(_) => self.err(format!("number `{s}` out of range")),
                }
            }
            other => self.err(format!("expected number, found {}", other.describe())),
        }
    }

    /// `term := level1 ('+' term)?`
    pub(crate) fn term(&mut self) -> Result<Term> {
        let l = self.level1()?;
        if *self.peek() == Tok::Plus && *self.peek_at(1) != Tok::LBracket {
            self.bump();
            let r = self.term()?;
            return Ok(Term::alt(l, r));
        }
        Ok(l)
    }

    fn level1_op(&self) -> Option<Level1> {
        match self.peek() {
            Tok::BarBar => Some(Level1::Par),
            Tok::LeftMerge => Some(Level1::LeftMerge),
            Tok::Bar => Some(Level1::Comm),
            Tok::Plus if *self.peek_at(1) == Tok::LBracket => Some(Level1::PAlt),
            _ => None,
        }
    }

    fn probability(&mut self) -> Result<Rat> {
        let (l, c) = self.here();
        let neg = self.eat(&Tok::Minus);
        let mut text = String::new();
        if neg {
            text.push('-');
        }
        match self.bump() {
            Tok::Int(n) => text.push_str(&n),
            other => return Err(Error::parse(l, c, format!("expected probability, found {}", other.describe()))),
        }
        if self.eat(&Tok::Slash) {
            match self.bump() {
                Tok::Int(d) => {
                    text.push('/');
                    text.push_str(&d);
                }
                other => return Err(Error::parse(l, c, format!("expected denominator, found {}", other.describe()))),
            }
        }
        let p: Rat = text
            .parse()
            .map_err(|_| Error::parse(l, c, format!("invalid probability literal `{text}`")))?;
        if !p.is_prob() {
            return Err(Error::parse(l, c, format!("invalid probability literal `{text}`: not in [0,1]")));
        }
        Ok(p)
    }

    /// Operators of equal binding strength; mixing different ones without
    /// parentheses is rejected. Chains of one operator nest to the right.
    fn level1(&mut self) -> Result<Term> {
        let first = self.seq_term()?;
        let Some(kind) = self.level1_op() else {
            return Ok(first);
        };
        let mut operands = vec![first];
        let mut probs = Vec::new();
        while let Some(op) = self.level1_op() {
            if op != kind {
                return self.err(format!(
                    "operators `{}` and `{}` bind equally strong; parenthesization required",
                    kind.symbol(),
                    op.symbol()
                ));
            }
            self.bump();
            if op == Level1::PAlt {
                self.expect(Tok::LBracket)?;
                probs.push(self.probability()?);
                self.expect(Tok::RBracket)?;
            }
            operands.push(self.seq_term()?);
        }
        let mut acc = operands.pop().unwrap();
        while let Some(l) = operands.pop() {
            acc = match kind {
                Level1::Par => Term::par(l, acc),
                Level1::LeftMerge => Term::left_merge(l, acc),
                Level1::Comm => Term::comm_merge(l, acc),
                Level1::PAlt => Term::palt(probs.pop().unwrap(), l, acc),
            };
        }
        Ok(acc)
    }

    /// `seq := atom ('.' seq)?`
    fn seq_term(&mut self) -> Result<Term> {
        let l = self.atom()?;
        if self.eat(&Tok::Dot) {
            let r = self.seq_term()?;
            return Ok(Term::seq(l, r));
        }
        Ok(l)
    }

    fn atom(&mut self) -> Result<Term> {
        match self.peek().clone() {
            Tok::LParen => {
                self.bump();
                let t = self.term()?;
                self.expect(Tok::RParen)?;
                Ok(t)
            }
            Tok::Lt => self.rec_constant(),
            Tok::Tilde => Ok(Term::Action(self.action()?)),
            Tok::Ident(s) => match (s.as_str(), self.peek_at(1)) {
                ("delta", _) => {
                    self.bump();
                    Ok(Term::Deadlock)
                }
                ("encap", Tok::LParen) => self.encap(),
                ("si", Tok::LBracket) => self.interleaving(false),
                ("posm", Tok::LBracket) => self.interleaving(true),
                _ if self.vars.contains(s.as_str()) && *self.peek_at(1) != Tok::LParen => {
                    self.bump();
                    Ok(Term::Var(name(&s)))
                }
                _ => Ok(Term::Action(self.action()?)),
            },
            other => self.err(format!("expected a term, found {}", other.describe())),
        }
    }

    /// A single action: plain, `pcr(d)`, `rcr(d)`, control `c` / `c(r)`, or a
    /// control trace `~c(r)`.
    pub(crate) fn action(&mut self) -> Result<Action> {
        let (l, c) = self.here();
        let barred = self.eat(&Tok::Tilde);
        let op = self.ident()?;
        if !barred && (op == "pcr" || op == "rcr") && *self.peek() == Tok::LParen {
            self.bump();
            let d = self.ident()?;
            self.expect(Tok::RParen)?;
            if !self.ctx.knows_datum(&d) {
                return Err(Error::parse(l, c, format!("unknown datum `{d}`")));
            }
            return Ok(if op == "pcr" { Action::Pcr(name(&d)) } else { Action::Rcr(name(&d)) });
        }
        let arg = if *self.peek() == Tok::LParen {
            self.bump();
            let a = self.ident()?;
            self.expect(Tok::RParen)?;
            Some(name(&a))
        } else {
            None
        };
        let control = Action::Control { op: name(&op), arg: arg.clone() };
        if self.ctx.control.contains(&control) {
            return Ok(if barred { control.barred().unwrap() } else { control });
        }
        if barred || arg.is_some() {
            let shown = match &arg {
                Some(a) => format!("{op}({a})"),
                None => op.clone(),
            };
            return Err(Error::parse(l, c, format!("unknown control action `{shown}`")));
        }
        if op == "delta" {
            return Err(Error::parse(l, c, "delta is not an action"));
        }
        if !self.ctx.knows_action(&op) {
            return Err(Error::parse(l, c, format!("unknown action `{op}`")));
        }
        Ok(Action::Plain(name(&op)))
    }

    fn encap(&mut self) -> Result<Term> {
        self.bump();
        self.expect(Tok::LParen)?;
        self.expect(Tok::LBrace)?;
        let mut h = BTreeSet::new();
        if *self.peek() != Tok::RBrace {
            loop {
                if *self.peek() == Tok::Ident("delta".into()) {
                    return self.err("delta may not appear in an encapsulation set");
                }
                h.insert(self.action()?);
                if !self.eat(&Tok::Comma) {
                    break;
                }
            }
        }
        self.expect(Tok::RBrace)?;
        self.expect(Tok::Comma)?;
        let t = self.term()?;
        self.expect(Tok::RParen)?;
        Ok(Term::encap(h, t))
    }

    fn rec_constant(&mut self) -> Result<Term> {
        let (l, c) = self.here();
        self.expect(Tok::Lt)?;
        let x = self.ident()?;
        self.expect(Tok::Bar)?;
        let e = self.ident()?;
        self.expect(Tok::Gt)?;
        let spec = self
            .ctx
            .spec(&e)
            .ok_or_else(|| Error::parse(l, c, format!("unknown spec `{e}`")))?;
        if spec.spec().rhs(&x).is_none() {
            return Err(Error::parse(l, c, format!("spec `{e}` has no variable `{x}`")));
        }
        Ok(Term::Rec(name(&x), spec.clone()))
    }

    fn history(&mut self) -> Result<History> {
        self.expect(Tok::Lt)?;
        let mut pairs = Vec::new();
        if *self.peek() != Tok::Gt {
            loop {
                self.expect(Tok::LParen)?;
                let i = self.int()?;
                self.expect(Tok::Comma)?;
                let n = self.int()?;
                self.expect(Tok::RParen)?;
                pairs.push((i, n));
                if !self.eat(&Tok::Comma) {
                    break;
                }
            }
        }
        self.expect(Tok::Gt)?;
        Ok(History::from_pairs(pairs))
    }

    fn control_state(&mut self) -> Result<ControlState> {
        if self.eat(&Tok::LParen) {
            self.expect(Tok::RParen)?;
            return Ok(ControlState::Unit);
        }
        self.expect(Tok::LBrace)?;
        let mut m = BTreeMap::new();
        if *self.peek() != Tok::RBrace {
            loop {
                let r = self.ident()?;
                self.expect(Tok::Colon)?;
                self.expect(Tok::LBracket)?;
                let mut q = Vec::new();
                if *self.peek() != Tok::RBracket {
                    loop {
                        q.push(self.int()?);
                        if !self.eat(&Tok::Comma) {
                            break;
                        }
                    }
                }
                self.expect(Tok::RBracket)?;
                if m.insert(name(&r), q).is_some() {
                    return self.err(format!("duplicate queue `{r}`"));
                }
                if !self.eat(&Tok::Comma) {
                    break;
                }
            }
        }
        self.expect(Tok::RBrace)?;
        Ok(ControlState::Queues(m))
    }

    /// `si[name; h=<...>; s=...](t1, ..., tn)` and
    /// `posm[name; i=k; h=<...>; s=...](t1, ..., tn)`; options are optional
    /// except `i` for `posm`.
    fn interleaving(&mut self, positional: bool) -> Result<Term> {
        let (l, c) = self.here();
        self.bump();
        self.expect(Tok::LBracket)?;
        let sname = self.ident()?;
        let strategy = self
            .ctx
            .strategy(&sname)
            .ok_or_else(|| Error::parse(l, c, format!("unknown strategy `{sname}`")))?
            .clone();
        let (mut h, mut s, mut idx) = (None, None, None);
        while self.eat(&Tok::Semi) {
            let key = self.ident()?;
            self.expect(Tok::Eq)?;
            match key.as_str() {
                "h" if h.is_none() => h = Some(self.history()?),
                "s" if s.is_none() => s = Some(self.control_state()?),
                "i" if positional && idx.is_none() => idx = Some(self.int()?),
                _ => return self.err(format!("unexpected option `{key}`")),
            }
        }
        self.expect(Tok::RBracket)?;
        self.expect(Tok::LParen)?;
        let mut procs = vec![self.term()?];
        while self.eat(&Tok::Comma) {
            procs.push(self.term()?);
        }
        self.expect(Tok::RParen)?;
        let n = procs.len();
        let history = h.unwrap_or_default();
        if !history.admissible(n) {
            return Err(Error::parse(l, c, format!("history {history} is not valid for {n} processes")));
        }
        let state = s.unwrap_or_else(|| strategy.strategy.initial_state());
        let node = Interleaving { strategy, history, state, procs };
        if positional {
            let i = idx.ok_or_else(|| Error::parse(l, c, "posm needs a position `i=`"))?;
            if i == 0 || i > n {
                return Err(Error::parse(l, c, format!("position {i} out of range 1..={n}")));
            }
            Ok(Term::Posm(i, node.into()))
        } else {
            Ok(Term::Si(node.into()))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx() -> Context {
        Context::with_builtins()
    }

    fn p(s: &str) -> Term {
        parse_term(s, &ctx()).unwrap()
    }

    #[test]
    fn seq_binds_tighter_than_alt() {
        assert_eq!(p("a + b . c"), Term::alt(Term::act("a"), Term::seq(Term::act("b"), Term::act("c"))));
    }

    #[test]
    fn palt_literal() {
        assert_eq!(p("a +[1/2] delta"), Term::palt(Rat::new(1, 2), Term::act("a"), Term::Deadlock));
    }

    #[test]
    fn mixed_level_operators_rejected() {
        let err = parse_term("a || b | c", &ctx()).unwrap_err();
        assert!(err.to_string().contains("parenthesization required"), "{err}");
        assert!(parse_term("(a || b) | c", &ctx()).is_ok());
        assert!(parse_term("a +[1/2] b || c", &ctx()).is_err());
    }

    #[test]
    fn same_operator_chains_nest_right() {
        assert_eq!(p("a || b || c"), Term::par(Term::act("a"), Term::par(Term::act("b"), Term::act("c"))));
        assert_eq!(
            p("a +[1/2] b +[1/3] c"),
            Term::palt(Rat::new(1, 2), Term::act("a"), Term::palt(Rat::new(1, 3), Term::act("b"), Term::act("c")))
        );
    }

    #[test]
    fn bad_probabilities() {
        assert!(parse_term("a +[3/2] b", &ctx()).is_err());
        assert!(parse_term("a +[-1/2] b", &ctx()).is_err());
        assert!(parse_term("a +[1/0] b", &ctx()).is_err());
    }

    #[test]
    fn closed_alphabet() {
        let mut c = ctx();
        c.declare_actions(["a"]);
        assert!(parse_term("a . a", &c).is_ok());
        let err = parse_term("a . b", &c).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, col: 5, .. }), "{err}");
    }

    #[test]
    fn strategies_must_be_registered() {
        assert!(parse_term("si[cyclic](a, b)", &ctx()).is_ok());
        assert!(parse_term("si[nope](a, b)", &ctx()).is_err());
    }

    #[test]
    fn encapsulation_sets() {
        assert!(parse_term("encap({a, b}, a . b)", &ctx()).is_ok());
        assert!(parse_term("encap({delta}, a)", &ctx()).is_err());
    }

    #[test]
    fn interleaving_options() {
        let t = p("posm[cyclic; i=2; h=<(1,2)>; s=()](a, b)");
        match t {
            Term::Posm(2, n) => assert_eq!(n.history.pairs(), &[(1, 2)]),
            other => panic!("{other}"),
        }
        assert!(parse_term("posm[cyclic](a, b)", &ctx()).is_err());
        assert!(parse_term("si[cyclic; h=<(4,2)>](a, b)", &ctx()).is_err());
    }
}
