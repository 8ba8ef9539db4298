//! Recursive-descent parser for the ASCII surface syntax.
//!
//! Parsing happens in two steps. The first builds an untyped tree in which
//! identifiers carry no sort. Elaboration then resolves every identifier,
//! inferring the sorts of free variables from where they are used, and
//! expands the strict-order sugar `<`.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use thiserror::Error;

use super::{Context, Formula, Sort, SortError, Term};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParseError {
    #[error("syntax error at byte {pos}: {message}")]
    Syntax { pos: usize, message: String },
    #[error(transparent)]
    Sort(#[from] SortError),
}

fn syntax<T>(pos: usize, message: impl Into<String>) -> Result<T, ParseError> {
    Err(ParseError::Syntax {
        pos,
        message: message.into(),
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Int(BigInt),
    LParen,
    RParen,
    Dot,
    Colon,
    Comma,
    Amp,
    Bar,
    Arrow,
    Tilde,
    Plus,
    Minus,
    Star,
    Leq,
    Below,
    Eq,
    Lt,
    Eof,
}

fn lex(src: &str) -> Result<Vec<(Tok, usize)>, ParseError> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        let two = if i + 1 < bytes.len() {
            &src[i..i + 2]
        } else {
            ""
        };
        let tok = match two {
            "->" => Some(Tok::Arrow),
            "<=" => Some(Tok::Leq),
            "<<" => Some(Tok::Below),
            _ => None,
        };
        if let Some(t) = tok {
            out.push((t, start));
            i += 2;
            continue;
        }
        let tok = match c {
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            '.' => Tok::Dot,
            ':' => Tok::Colon,
            ',' => Tok::Comma,
            '&' => Tok::Amp,
            '|' => Tok::Bar,
            '~' => Tok::Tilde,
            '+' => Tok::Plus,
            '-' => Tok::Minus,
            '*' => Tok::Star,
            '=' => Tok::Eq,
            '<' => Tok::Lt,
            c if c.is_ascii_digit() => {
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                out.push((Tok::Int(src[start..i].parse().expect("digits")), start));
                continue;
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                while i < bytes.len()
                    && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_' || bytes[i] == b'\'')
                {
                    i += 1;
                }
                out.push((Tok::Ident(src[start..i].to_string()), start));
                continue;
            }
            other => return syntax(start, format!("unexpected character `{other}`")),
        };
        out.push((tok, start));
        i += 1;
    }
    out.push((Tok::Eof, src.len()));
    Ok(out)
}

const KEYWORDS: &[&str] = &[
    "forall", "exists", "meet", "join", "cap", "cup", "compl", "bot", "top", "true", "false",
];

#[derive(Clone, Debug)]
enum RawTerm {
    Ident(String),
    Zero,
    Bot,
    Top,
    Add(Box<RawTerm>, Box<RawTerm>),
    Neg(Box<RawTerm>),
    Lat(LatOp, Box<RawTerm>, Box<RawTerm>),
    Scale(BigInt, Box<RawTerm>),
    Compl(Box<RawTerm>),
    Val(Box<RawTerm>),
}

#[derive(Clone, Copy, Debug)]
enum LatOp {
    Meet,
    Join,
    Cap,
    Cup,
}

#[derive(Clone, Copy, Debug)]
enum Rel {
    Leq,
    Below,
    Eq,
    Lt,
}

#[derive(Clone, Debug)]
enum RawFormula {
    True,
    False,
    Atom(Rel, RawTerm, RawTerm, usize),
    Not(Box<RawFormula>),
    And(Box<RawFormula>, Box<RawFormula>),
    Or(Box<RawFormula>, Box<RawFormula>),
    Implies(Box<RawFormula>, Box<RawFormula>),
    Quant(bool, Vec<(String, Sort)>, Box<RawFormula>),
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn peek_at(&self, k: usize) -> &Tok {
        let i = (self.pos + k).min(self.toks.len() - 1);
        &self.toks[i].0
    }

    fn offset(&self) -> usize {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].0.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn eat(&mut self, t: &Tok) -> bool {
        if self.peek() == t {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, t: Tok, what: &str) -> Result<(), ParseError> {
        if self.eat(&t) {
            Ok(())
        } else {
            syntax(self.offset(), format!("expected {what}"))
        }
    }

    fn is_keyword(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == kw)
    }

    fn formula(&mut self) -> Result<RawFormula, ParseError> {
        if self.is_keyword("forall") || self.is_keyword("exists") {
            return self.quantified();
        }
        self.implication()
    }

    fn quantified(&mut self) -> Result<RawFormula, ParseError> {
        let is_exists = self.is_keyword("exists");
        self.bump();
        let mut binders = Vec::new();
        loop {
            let mut names = vec![self.binder_name()?];
            while self.eat(&Tok::Comma) {
                names.push(self.binder_name()?);
            }
            self.expect(Tok::Colon, "`:` after bound variable")?;
            let sort = match self.bump() {
                Tok::Ident(s) if s == "G" => Sort::G,
                Tok::Ident(s) if s == "L" => Sort::L,
                _ => return syntax(self.toks[self.pos - 1].1, "expected sort `G` or `L`"),
            };
            binders.extend(names.into_iter().map(|n| (n, sort)));
            if !self.eat(&Tok::Comma) {
                break;
            }
        }
        self.expect(Tok::Dot, "`.` after quantifier prefix")?;
        let body = self.formula()?;
        Ok(RawFormula::Quant(is_exists, binders, Box::new(body)))
    }

    fn binder_name(&mut self) -> Result<String, ParseError> {
        let at = self.offset();
        match self.bump() {
            Tok::Ident(s) if !KEYWORDS.contains(&s.as_str()) && s != "P" => Ok(s),
            _ => syntax(at, "expected a variable name"),
        }
    }

    // A quantifier may close any operand chain: its body runs to the end.
    fn operand(
        &mut self,
        next: fn(&mut Parser) -> Result<RawFormula, ParseError>,
    ) -> Result<RawFormula, ParseError> {
        if self.is_keyword("forall") || self.is_keyword("exists") {
            self.quantified()
        } else {
            next(self)
        }
    }

    fn implication(&mut self) -> Result<RawFormula, ParseError> {
        let lhs = self.disjunction()?;
        if self.eat(&Tok::Arrow) {
            let rhs = self.operand(Parser::implication)?;
            return Ok(RawFormula::Implies(Box::new(lhs), Box::new(rhs)));
        }
        Ok(lhs)
    }

    fn disjunction(&mut self) -> Result<RawFormula, ParseError> {
        let mut lhs = self.conjunction()?;
        while self.eat(&Tok::Bar) {
            let rhs = self.operand(Parser::conjunction)?;
            lhs = RawFormula::Or(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn conjunction(&mut self) -> Result<RawFormula, ParseError> {
        let mut lhs = self.negation()?;
        while self.eat(&Tok::Amp) {
            let rhs = self.operand(Parser::negation)?;
            lhs = RawFormula::And(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn negation(&mut self) -> Result<RawFormula, ParseError> {
        if self.eat(&Tok::Tilde) {
            let inner = self.operand(Parser::negation)?;
            return Ok(RawFormula::Not(Box::new(inner)));
        }
        self.formula_primary()
    }

    fn formula_primary(&mut self) -> Result<RawFormula, ParseError> {
        if self.is_keyword("true") {
            self.bump();
            return Ok(RawFormula::True);
        }
        if self.is_keyword("false") {
            self.bump();
            return Ok(RawFormula::False);
        }
        if self.peek() == &Tok::LParen {
            // Either a parenthesized formula or an atom whose left term starts with `(`.
            let save = self.pos;
            self.bump();
            if let Ok(inner) = self.formula() {
                if self.eat(&Tok::RParen) && !self.continues_term() {
                    return Ok(inner);
                }
            }
            self.pos = save;
        }
        self.atom()
    }

    fn continues_term(&self) -> bool {
        match self.peek() {
            Tok::Plus | Tok::Minus | Tok::Star | Tok::Leq | Tok::Below | Tok::Eq | Tok::Lt => true,
            Tok::Ident(s) => matches!(s.as_str(), "meet" | "join" | "cap" | "cup"),
            _ => false,
        }
    }

    fn atom(&mut self) -> Result<RawFormula, ParseError> {
        let at = self.offset();
        let lhs = self.term()?;
        let rel = match self.peek() {
            Tok::Leq => Rel::Leq,
            Tok::Below => Rel::Below,
            Tok::Eq => Rel::Eq,
            Tok::Lt => Rel::Lt,
            _ => return syntax(self.offset(), "expected a relation (`<=`, `<<`, `=`, `<`)"),
        };
        self.bump();
        let rhs = self.term()?;
        Ok(RawFormula::Atom(rel, lhs, rhs, at))
    }

    fn term(&mut self) -> Result<RawTerm, ParseError> {
        let mut lhs = self.lattice_term()?;
        loop {
            if self.eat(&Tok::Plus) {
                let rhs = self.lattice_term()?;
                lhs = RawTerm::Add(Box::new(lhs), Box::new(rhs));
            } else if self.peek() == &Tok::Minus {
                self.bump();
                let rhs = self.lattice_term()?;
                lhs = RawTerm::Add(Box::new(lhs), Box::new(RawTerm::Neg(Box::new(rhs))));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn lattice_term(&mut self) -> Result<RawTerm, ParseError> {
        let mut lhs = self.scale_term()?;
        loop {
            let op = match self.peek() {
                Tok::Ident(s) if s == "meet" => LatOp::Meet,
                Tok::Ident(s) if s == "join" => LatOp::Join,
                Tok::Ident(s) if s == "cap" => LatOp::Cap,
                Tok::Ident(s) if s == "cup" => LatOp::Cup,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.scale_term()?;
            lhs = RawTerm::Lat(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn scale_term(&mut self) -> Result<RawTerm, ParseError> {
        match (self.peek().clone(), self.peek_at(1).clone(), self.peek_at(2).clone()) {
            (Tok::Int(n), Tok::Star, _) => {
                self.bump();
                self.bump();
                let t = self.scale_term()?;
                Ok(RawTerm::Scale(n, Box::new(t)))
            }
            (Tok::Minus, Tok::Int(n), Tok::Star) => {
                self.bump();
                self.bump();
                self.bump();
                let t = self.scale_term()?;
                Ok(RawTerm::Scale(-n, Box::new(t)))
            }
            _ => self.unary_term(),
        }
    }

    fn unary_term(&mut self) -> Result<RawTerm, ParseError> {
        if self.eat(&Tok::Minus) {
            let t = self.unary_term()?;
            return Ok(RawTerm::Neg(Box::new(t)));
        }
        self.primary_term()
    }

    fn primary_term(&mut self) -> Result<RawTerm, ParseError> {
        let at = self.offset();
        match self.bump() {
            Tok::Int(n) if n == BigInt::from(0) => Ok(RawTerm::Zero),
            Tok::Int(_) => syntax(at, "integer literals other than 0 may only appear as scalars `n*t`"),
            Tok::LParen => {
                let t = self.term()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(t)
            }
            Tok::Ident(s) => match s.as_str() {
                "bot" => Ok(RawTerm::Bot),
                "top" => Ok(RawTerm::Top),
                "compl" | "P" if self.peek() == &Tok::LParen => {
                    self.bump();
                    let t = self.term()?;
                    self.expect(Tok::RParen, "`)`")?;
                    Ok(if s == "P" {
                        RawTerm::Val(Box::new(t))
                    } else {
                        RawTerm::Compl(Box::new(t))
                    })
                }
                _ if KEYWORDS.contains(&s.as_str()) => {
                    syntax(at, format!("unexpected keyword `{s}`"))
                }
                _ => Ok(RawTerm::Ident(s)),
            },
            _ => syntax(at, "expected a term"),
        }
    }
}

struct Elaborator {
    scope: Vec<(String, Sort)>,
    free: BTreeMap<String, Sort>,
    // In the collecting pass undetermined atoms are skipped instead of rejected.
    collecting: bool,
}

fn sort_err(subject: impl Into<String>, message: impl Into<String>) -> ParseError {
    ParseError::Sort(SortError {
        subterm: subject.into(),
        message: message.into(),
    })
}

impl Elaborator {
    fn lookup(&self, name: &str) -> Option<Sort> {
        self.scope
            .iter()
            .rev()
            .find(|(n, _)| n == name)
            .map(|(_, s)| *s)
            .or_else(|| self.free.get(name).copied())
    }

    fn is_bound(&self, name: &str) -> bool {
        self.scope.iter().any(|(n, _)| n == name)
    }

    fn synth(&self, t: &RawTerm) -> Option<Sort> {
        match t {
            RawTerm::Ident(n) => self.lookup(n),
            RawTerm::Zero | RawTerm::Add(..) | RawTerm::Neg(..) | RawTerm::Scale(..) => Some(Sort::G),
            RawTerm::Lat(LatOp::Meet | LatOp::Join, ..) => Some(Sort::G),
            RawTerm::Bot
            | RawTerm::Top
            | RawTerm::Lat(LatOp::Cap | LatOp::Cup, ..)
            | RawTerm::Compl(_)
            | RawTerm::Val(_) => Some(Sort::L),
        }
    }

    fn check(&mut self, t: &RawTerm, want: Sort) -> Result<Term, ParseError> {
        let wrong = |found: Sort, t: &dyn std::fmt::Debug| {
            Err(sort_err(
                format!("{t:?}"),
                format!("expected sort {want}, found {found}"),
            ))
        };
        Ok(match t {
            RawTerm::Ident(n) => {
                match self.lookup(n) {
                    Some(s) if s != want => {
                        return Err(sort_err(
                            n.clone(),
                            format!("variable `{n}` has sort {s} but is used as {want}"),
                        ))
                    }
                    Some(_) => {}
                    None => {
                        debug_assert!(!self.is_bound(n));
                        self.free.insert(n.clone(), want);
                    }
                }
                match want {
                    Sort::G => Term::GVar(n.clone()),
                    Sort::L => Term::LVar(n.clone()),
                }
            }
            RawTerm::Zero if want == Sort::G => Term::Zero,
            RawTerm::Zero => return Err(sort_err("0", "`0` is a group term; use `bot` or `top`")),
            RawTerm::Bot | RawTerm::Top if want == Sort::L => {
                if matches!(t, RawTerm::Bot) {
                    Term::Bot
                } else {
                    Term::Top
                }
            }
            RawTerm::Add(a, b) if want == Sort::G => {
                Term::add(self.check(a, Sort::G)?, self.check(b, Sort::G)?)
            }
            RawTerm::Neg(a) if want == Sort::G => Term::neg(self.check(a, Sort::G)?),
            RawTerm::Scale(n, a) if want == Sort::G => {
                Term::IntScale(n.clone(), Box::new(self.check(a, Sort::G)?))
            }
            RawTerm::Lat(op, a, b) => {
                let s = match op {
                    LatOp::Meet | LatOp::Join => Sort::G,
                    LatOp::Cap | LatOp::Cup => Sort::L,
                };
                if s != want {
                    return wrong(s, t);
                }
                let (a, b) = (self.check(a, s)?, self.check(b, s)?);
                match op {
                    LatOp::Meet => Term::gmeet(a, b),
                    LatOp::Join => Term::gjoin(a, b),
                    LatOp::Cap => Term::lmeet(a, b),
                    LatOp::Cup => Term::ljoin(a, b),
                }
            }
            RawTerm::Compl(a) if want == Sort::L => Term::compl(self.check(a, Sort::L)?),
            RawTerm::Val(a) if want == Sort::L => Term::val(self.check(a, Sort::G)?),
            _ => return wrong(self.synth(t).expect("structural sort"), t),
        })
    }

    fn formula(&mut self, f: &RawFormula) -> Result<Formula, ParseError> {
        Ok(match f {
            RawFormula::True => Formula::True,
            RawFormula::False => Formula::False,
            RawFormula::Not(a) => Formula::not(self.formula(a)?),
            RawFormula::And(a, b) => Formula::and(self.formula(a)?, self.formula(b)?),
            RawFormula::Or(a, b) => Formula::or(self.formula(a)?, self.formula(b)?),
            RawFormula::Implies(a, b) => Formula::implies(self.formula(a)?, self.formula(b)?),
            RawFormula::Quant(is_exists, binders, body) => {
                let n = self.scope.len();
                self.scope.extend(binders.iter().cloned());
                let inner = self.formula(body);
                self.scope.truncate(n);
                let mut out = inner?;
                for (v, s) in binders.iter().rev() {
                    out = if *is_exists {
                        Formula::exists(v, *s, out)
                    } else {
                        Formula::forall(v, *s, out)
                    };
                }
                out
            }
            RawFormula::Atom(rel, l, r, pos) => {
                let sort = match rel {
                    Rel::Leq => Some(Sort::G),
                    Rel::Below => Some(Sort::L),
                    Rel::Eq | Rel::Lt => self.synth(l).or_else(|| self.synth(r)),
                };
                let Some(sort) = sort else {
                    if self.collecting {
                        return Ok(Formula::True);
                    }
                    return Err(sort_err(
                        format!("atom at byte {pos}"),
                        "cannot infer the sort of the free variables in this atom",
                    ));
                };
                let (a, b) = (self.check(l, sort)?, self.check(r, sort)?);
                let (order, eq) = match sort {
                    Sort::G => (Formula::GLeq(a.clone(), b.clone()), Formula::GEq(a, b)),
                    Sort::L => (Formula::LBelow(a.clone(), b.clone()), Formula::LEq(a, b)),
                };
                match rel {
                    Rel::Leq | Rel::Below => order,
                    Rel::Eq => eq,
                    Rel::Lt => Formula::and(order, Formula::not(eq)),
                }
            }
        })
    }
}

fn parse_raw(text: &str) -> Result<RawFormula, ParseError> {
    let mut p = Parser {
        toks: lex(text)?,
        pos: 0,
    };
    let f = p.formula()?;
    if p.peek() != &Tok::Eof {
        return syntax(p.offset(), "unexpected trailing input");
    }
    Ok(f)
}

/// Parses a formula, inferring the sorts of free variables from their use.
pub fn parse(text: &str) -> Result<Formula, ParseError> {
    parse_with_context(text, &Context::new())
}

/// Parses a formula whose free variables may be declared in `context`.
pub fn parse_with_context(text: &str, context: &Context) -> Result<Formula, ParseError> {
    let raw = parse_raw(text)?;
    let mut el = Elaborator {
        scope: Vec::new(),
        free: context.clone(),
        collecting: true,
    };
    loop {
        let before = el.free.len();
        el.formula(&raw)?;
        if el.free.len() == before {
            break;
        }
    }
    el.collecting = false;
    el.formula(&raw)
}

/// Parses a single term of the given sort.
pub fn parse_term(text: &str, sort: Sort, context: &Context) -> Result<Term, ParseError> {
    let mut p = Parser {
        toks: lex(text)?,
        pos: 0,
    };
    let t = p.term()?;
    if p.peek() != &Tok::Eof {
        return syntax(p.offset(), "unexpected trailing input");
    }
    let mut el = Elaborator {
        scope: Vec::new(),
        free: context.clone(),
        collecting: false,
    };
    el.check(&t, sort)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spec_examples_parse() {
        let phi = parse("forall v:G. exists a:G. a + a = v").unwrap();
        assert_eq!(phi.to_string(), "forall v:G. exists a:G. a + a = v");
        let phi = parse("forall x:L. bot < x -> exists y:L. bot < y & y < x").unwrap();
        assert_eq!(
            phi.to_string(),
            "forall x:L. bot << x & ~(bot = x) -> (exists y:L. bot << y & ~(bot = y) & (y << x & ~(y = x)))"
        );
        let phi = parse("P(0) = top").unwrap();
        assert_eq!(phi, Formula::LEq(Term::val(Term::Zero), Term::Top));
    }

    #[test]
    fn infers_free_sorts() {
        let phi = parse("P(x) = top").unwrap();
        assert_eq!(phi.free_vars().get("x"), Some(&Sort::G));
        let phi = parse("x = y & y << top").unwrap();
        assert_eq!(phi.free_vars().get("x"), Some(&Sort::L));
        assert!(matches!(parse("x = y"), Err(ParseError::Sort(_))));
        assert!(matches!(parse("x + top = 0"), Err(ParseError::Sort(_))));
        assert!(matches!(parse("exists l:L. P(l) = top"), Err(ParseError::Sort(_))));
        assert!(matches!(parse("P(x) = top & x << top"), Err(ParseError::Sort(_))));
    }

    #[test]
    fn syntax_errors_carry_positions() {
        match parse("forall x:G. x <= ") {
            Err(ParseError::Syntax { pos, .. }) => assert_eq!(pos, 17),
            other => panic!("{other:?}"),
        }
        assert!(matches!(parse("3 <= x"), Err(ParseError::Syntax { .. })));
        assert!(matches!(parse("x <= y)"), Err(ParseError::Syntax { .. })));
    }

    #[test]
    fn precedence() {
        let phi = parse("a - 2*b meet c <= -x").unwrap();
        assert_eq!(phi.to_string(), "a - 2*b meet c <= -x");
        let Formula::GLeq(lhs, _) = &phi else { panic!() };
        assert!(matches!(lhs, Term::Add(_, r) if matches!(&**r, Term::Neg(m) if matches!(&**m, Term::GMeet(..)))));
        let phi = parse("(x + y) meet z = 0 | (a = 0 & b = 0)").unwrap();
        assert_eq!(phi.to_string(), "(x + y) meet z = 0 | a = 0 & b = 0");
        let phi = parse("-2*x = -(2*x)").unwrap();
        assert_eq!(phi.to_string(), "-2*x = -(2*x)");
    }

    #[test]
    fn binder_lists() {
        let phi = parse("forall v1,v2:G, w:L. P(v1 - v2) = w").unwrap();
        assert_eq!(phi.to_string(), "forall v1:G. forall v2:G. forall w:L. P(v1 - v2) = w");
    }

    #[test]
    fn terms_alone() {
        let t = parse_term("P(x meet y)", Sort::L, &Context::new()).unwrap();
        assert_eq!(t.to_string(), "P(x meet y)");
        assert!(parse_term("P(l)", Sort::L, &[("l".to_string(), Sort::L)].into()).is_err());
    }
}
