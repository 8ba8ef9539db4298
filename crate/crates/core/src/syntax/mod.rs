//! The two-sorted language of valued lattice-ordered groups.
//!
//! Sort `G` carries the group (`0`, `+`, `-`, `meet`, `join`, integer
//! scaling) and sort `L` the lattice (`bot`, `top`, `cap`, `cup`, `compl`).
//! The valuation `P` maps `G` to `L`.

mod linear;
mod normal;
mod parser;
mod print;
mod rewrite;

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use thiserror::Error;

use crate::rational::Rational;

pub use linear::LinearGroupTerm;
pub use normal::{alpha_eq, fresh_name, rename_apart, to_prenex, NameSupply};
pub use parser::{parse, parse_term, parse_with_context, ParseError};
pub use rewrite::{
    group_atoms_to_lattice, linearize_group_term, primitive_val, push_valuation,
    push_valuation_formula, remove_complement, JoinOfMeets,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Sort {
    G,
    L,
}

impl fmt::Display for Sort {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Sort::G => write!(f, "G"),
            Sort::L => write!(f, "L"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Term {
    GVar(String),
    LVar(String),
    Zero,
    Add(Box<Term>, Box<Term>),
    Neg(Box<Term>),
    GMeet(Box<Term>, Box<Term>),
    GJoin(Box<Term>, Box<Term>),
    IntScale(BigInt, Box<Term>),
    /// Engine-internal only; the parser never produces it.
    RatScale(Rational, Box<Term>),
    Bot,
    Top,
    LMeet(Box<Term>, Box<Term>),
    LJoin(Box<Term>, Box<Term>),
    Compl(Box<Term>),
    Val(Box<Term>),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Quantifier {
    Exists,
    Forall,
}

impl Quantifier {
    pub fn dual(self) -> Quantifier {
        match self {
            Quantifier::Exists => Quantifier::Forall,
            Quantifier::Forall => Quantifier::Exists,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Formula {
    True,
    False,
    GLeq(Term, Term),
    GEq(Term, Term),
    LBelow(Term, Term),
    LEq(Term, Term),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    Exists(String, Sort, Box<Formula>),
    Forall(String, Sort, Box<Formula>),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("sort error in `{subterm}`: {message}")]
pub struct SortError {
    pub subterm: String,
    pub message: String,
}

impl SortError {
    fn new(subterm: impl fmt::Display, message: impl Into<String>) -> Self {
        SortError {
            subterm: subterm.to_string(),
            message: message.into(),
        }
    }
}

pub type Context = BTreeMap<String, Sort>;

// Term and formula constructors. Short names keep rewrite code readable.
impl Term {
    pub fn gvar(name: &str) -> Term {
        Term::GVar(name.to_string())
    }

    pub fn lvar(name: &str) -> Term {
        Term::LVar(name.to_string())
    }

    pub fn add(a: Term, b: Term) -> Term {
        Term::Add(Box::new(a), Box::new(b))
    }

    pub fn sub(a: Term, b: Term) -> Term {
        Term::Add(Box::new(a), Box::new(Term::neg(b)))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn neg(a: Term) -> Term {
        Term::Neg(Box::new(a))
    }

    pub fn gmeet(a: Term, b: Term) -> Term {
        Term::GMeet(Box::new(a), Box::new(b))
    }

    pub fn gjoin(a: Term, b: Term) -> Term {
        Term::GJoin(Box::new(a), Box::new(b))
    }

    pub fn scale(n: impl Into<BigInt>, a: Term) -> Term {
        Term::IntScale(n.into(), Box::new(a))
    }

    pub fn lmeet(a: Term, b: Term) -> Term {
        Term::LMeet(Box::new(a), Box::new(b))
    }

    pub fn ljoin(a: Term, b: Term) -> Term {
        Term::LJoin(Box::new(a), Box::new(b))
    }

    pub fn compl(a: Term) -> Term {
        Term::Compl(Box::new(a))
    }

    pub fn val(a: Term) -> Term {
        Term::Val(Box::new(a))
    }

    /// The sort of a well-formed term.
    pub fn sort(&self) -> Result<Sort, SortError> {
        use Term::*;
        let expect = |t: &Term, s: Sort| -> Result<(), SortError> {
            let got = t.sort()?;
            if got != s {
                return Err(SortError::new(t, format!("expected sort {s}, found {got}")));
            }
            Ok(())
        };
        match self {
            GVar(_) | Zero => Ok(Sort::G),
            LVar(_) | Bot | Top => Ok(Sort::L),
            Add(a, b) | GMeet(a, b) | GJoin(a, b) => {
                expect(a, Sort::G)?;
                expect(b, Sort::G)?;
                Ok(Sort::G)
            }
            Neg(a) | IntScale(_, a) | RatScale(_, a) => {
                expect(a, Sort::G)?;
                Ok(Sort::G)
            }
            LMeet(a, b) | LJoin(a, b) => {
                expect(a, Sort::L)?;
                expect(b, Sort::L)?;
                Ok(Sort::L)
            }
            Compl(a) => {
                expect(a, Sort::L)?;
                Ok(Sort::L)
            }
            Val(a) => {
                expect(a, Sort::G)?;
                Ok(Sort::L)
            }
        }
    }

    pub fn children(&self) -> Vec<&Term> {
        use Term::*;
        match self {
            GVar(_) | LVar(_) | Zero | Bot | Top => vec![],
            Add(a, b) | GMeet(a, b) | GJoin(a, b) | LMeet(a, b) | LJoin(a, b) => vec![a, b],
            Neg(a) | IntScale(_, a) | RatScale(_, a) | Compl(a) | Val(a) => vec![a],
        }
    }

    /// Rebuilds the term bottom-up, applying `f` to every node after its children.
    pub fn map_bottom_up(&self, f: &mut impl FnMut(Term) -> Term) -> Term {
        use Term::*;
        let t = match self {
            GVar(_) | LVar(_) | Zero | Bot | Top => self.clone(),
            Add(a, b) => Add(bx(a.map_bottom_up(f)), bx(b.map_bottom_up(f))),
            GMeet(a, b) => GMeet(bx(a.map_bottom_up(f)), bx(b.map_bottom_up(f))),
            GJoin(a, b) => GJoin(bx(a.map_bottom_up(f)), bx(b.map_bottom_up(f))),
            LMeet(a, b) => LMeet(bx(a.map_bottom_up(f)), bx(b.map_bottom_up(f))),
            LJoin(a, b) => LJoin(bx(a.map_bottom_up(f)), bx(b.map_bottom_up(f))),
            Neg(a) => Neg(bx(a.map_bottom_up(f))),
            IntScale(n, a) => IntScale(n.clone(), bx(a.map_bottom_up(f))),
            RatScale(q, a) => RatScale(q.clone(), bx(a.map_bottom_up(f))),
            Compl(a) => Compl(bx(a.map_bottom_up(f))),
            Val(a) => Val(bx(a.map_bottom_up(f))),
        };
        f(t)
    }

    pub fn collect_vars(&self, out: &mut BTreeMap<String, Sort>) {
        match self {
            Term::GVar(v) => {
                out.insert(v.clone(), Sort::G);
            }
            Term::LVar(v) => {
                out.insert(v.clone(), Sort::L);
            }
            _ => self.children().into_iter().for_each(|c| c.collect_vars(out)),
        }
    }

    pub fn mentions(&self, name: &str) -> bool {
        match self {
            Term::GVar(v) | Term::LVar(v) => v == name,
            _ => self.children().into_iter().any(|c| c.mentions(name)),
        }
    }

    pub fn contains_compl(&self) -> bool {
        matches!(self, Term::Compl(_)) || self.children().into_iter().any(Term::contains_compl)
    }

    fn rename_var(&self, from: &str, to: &str) -> Term {
        self.map_bottom_up(&mut |t| match t {
            Term::GVar(v) if v == from => Term::GVar(to.to_string()),
            Term::LVar(v) if v == from => Term::LVar(to.to_string()),
            t => t,
        })
    }
}

pub(crate) fn bx<T>(t: T) -> Box<T> {
    Box::new(t)
}

impl Formula {
    pub fn not(a: Formula) -> Formula {
        Formula::Not(bx(a))
    }

    pub fn and(a: Formula, b: Formula) -> Formula {
        Formula::And(bx(a), bx(b))
    }

    pub fn or(a: Formula, b: Formula) -> Formula {
        Formula::Or(bx(a), bx(b))
    }

    pub fn implies(a: Formula, b: Formula) -> Formula {
        Formula::Implies(bx(a), bx(b))
    }

    pub fn exists(v: &str, s: Sort, body: Formula) -> Formula {
        Formula::Exists(v.to_string(), s, bx(body))
    }

    pub fn forall(v: &str, s: Sort, body: Formula) -> Formula {
        Formula::Forall(v.to_string(), s, bx(body))
    }

    pub fn quant(q: Quantifier, v: &str, s: Sort, body: Formula) -> Formula {
        match q {
            Quantifier::Exists => Formula::exists(v, s, body),
            Quantifier::Forall => Formula::forall(v, s, body),
        }
    }

    /// Left-nested conjunction; `true` when empty.
    pub fn conj(items: impl IntoIterator<Item = Formula>) -> Formula {
        items
            .into_iter()
            .reduce(Formula::and)
            .unwrap_or(Formula::True)
    }

    /// Left-nested disjunction; `false` when empty.
    pub fn disj(items: impl IntoIterator<Item = Formula>) -> Formula {
        items
            .into_iter()
            .reduce(Formula::or)
            .unwrap_or(Formula::False)
    }

    pub fn is_atom(&self) -> bool {
        matches!(
            self,
            Formula::GLeq(..) | Formula::GEq(..) | Formula::LBelow(..) | Formula::LEq(..)
        )
    }

    pub fn atom_terms(&self) -> Option<(&Term, &Term)> {
        match self {
            Formula::GLeq(a, b) | Formula::GEq(a, b) | Formula::LBelow(a, b) | Formula::LEq(a, b) => {
                Some((a, b))
            }
            _ => None,
        }
    }

    pub fn is_quantifier_free(&self) -> bool {
        match self {
            Formula::Exists(..) | Formula::Forall(..) => false,
            Formula::Not(a) => a.is_quantifier_free(),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
                a.is_quantifier_free() && b.is_quantifier_free()
            }
            _ => true,
        }
    }

    pub fn atom_count(&self) -> usize {
        match self {
            Formula::True | Formula::False => 0,
            Formula::Not(a) | Formula::Exists(_, _, a) | Formula::Forall(_, _, a) => a.atom_count(),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
                a.atom_count() + b.atom_count()
            }
            _ => 1,
        }
    }

    pub fn quantifier_count(&self) -> usize {
        match self {
            Formula::Exists(_, _, a) | Formula::Forall(_, _, a) => 1 + a.quantifier_count(),
            Formula::Not(a) => a.quantifier_count(),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
                a.quantifier_count() + b.quantifier_count()
            }
            _ => 0,
        }
    }

    pub fn quantifier_depth(&self) -> usize {
        match self {
            Formula::Exists(_, _, a) | Formula::Forall(_, _, a) => 1 + a.quantifier_depth(),
            Formula::Not(a) => a.quantifier_depth(),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
                a.quantifier_depth().max(b.quantifier_depth())
            }
            _ => 0,
        }
    }

    /// Free variables with the sort of their occurrences.
    pub fn free_vars(&self) -> BTreeMap<String, Sort> {
        let mut out = BTreeMap::new();
        self.collect_free(&mut Vec::new(), &mut out);
        out
    }

    fn collect_free(&self, bound: &mut Vec<String>, out: &mut BTreeMap<String, Sort>) {
        match self {
            Formula::True | Formula::False => {}
            Formula::Not(a) => a.collect_free(bound, out),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
                a.collect_free(bound, out);
                b.collect_free(bound, out);
            }
            Formula::Exists(v, _, a) | Formula::Forall(v, _, a) => {
                bound.push(v.clone());
                a.collect_free(bound, out);
                bound.pop();
            }
            _ => {
                let (l, r) = self.atom_terms().expect("atom");
                let mut vars = BTreeMap::new();
                l.collect_vars(&mut vars);
                r.collect_vars(&mut vars);
                for (v, s) in vars {
                    if !bound.contains(&v) {
                        out.insert(v, s);
                    }
                }
            }
        }
    }

    pub fn is_sentence(&self) -> bool {
        self.free_vars().is_empty()
    }

    /// Every variable name used anywhere, bound or free.
    pub fn all_names(&self) -> std::collections::BTreeSet<String> {
        let mut out = std::collections::BTreeSet::new();
        self.visit(&mut |f| {
            if let Formula::Exists(v, _, _) | Formula::Forall(v, _, _) = f {
                out.insert(v.clone());
            }
            if let Some((l, r)) = f.atom_terms() {
                let mut vars = BTreeMap::new();
                l.collect_vars(&mut vars);
                r.collect_vars(&mut vars);
                out.extend(vars.into_keys());
            }
        });
        out
    }

    /// Pre-order traversal.
    pub fn visit(&self, f: &mut impl FnMut(&Formula)) {
        f(self);
        match self {
            Formula::Not(a) | Formula::Exists(_, _, a) | Formula::Forall(_, _, a) => a.visit(f),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
                a.visit(f);
                b.visit(f);
            }
            _ => {}
        }
    }

    /// Applies `f` to both sides of every atom.
    pub fn map_terms(&self, f: &mut impl FnMut(&Term) -> Term) -> Formula {
        self.map_atoms(&mut |atom| match atom {
            Formula::GLeq(a, b) => Formula::GLeq(f(a), f(b)),
            Formula::GEq(a, b) => Formula::GEq(f(a), f(b)),
            Formula::LBelow(a, b) => Formula::LBelow(f(a), f(b)),
            Formula::LEq(a, b) => Formula::LEq(f(a), f(b)),
            other => other.clone(),
        })
    }

    /// Replaces every atom by `f(atom)`.
    pub fn map_atoms(&self, f: &mut impl FnMut(&Formula) -> Formula) -> Formula {
        match self {
            Formula::True | Formula::False => self.clone(),
            Formula::Not(a) => Formula::not(a.map_atoms(f)),
            Formula::And(a, b) => Formula::and(a.map_atoms(f), b.map_atoms(f)),
            Formula::Or(a, b) => Formula::or(a.map_atoms(f), b.map_atoms(f)),
            Formula::Implies(a, b) => Formula::implies(a.map_atoms(f), b.map_atoms(f)),
            Formula::Exists(v, s, a) => Formula::Exists(v.clone(), *s, bx(a.map_atoms(f))),
            Formula::Forall(v, s, a) => Formula::Forall(v.clone(), *s, bx(a.map_atoms(f))),
            atom => f(atom),
        }
    }

    /// Renames free occurrences of `from` to `to`; `to` must not be captured.
    pub fn rename_free(&self, from: &str, to: &str) -> Formula {
        match self {
            Formula::Exists(v, _, _) | Formula::Forall(v, _, _) if v == from => self.clone(),
            Formula::Exists(v, s, a) => Formula::Exists(v.clone(), *s, bx(a.rename_free(from, to))),
            Formula::Forall(v, s, a) => Formula::Forall(v.clone(), *s, bx(a.rename_free(from, to))),
            Formula::Not(a) => Formula::not(a.rename_free(from, to)),
            Formula::And(a, b) => Formula::and(a.rename_free(from, to), b.rename_free(from, to)),
            Formula::Or(a, b) => Formula::or(a.rename_free(from, to), b.rename_free(from, to)),
            Formula::Implies(a, b) => {
                Formula::implies(a.rename_free(from, to), b.rename_free(from, to))
            }
            Formula::True | Formula::False => self.clone(),
            atom => atom.map_terms(&mut |t| t.rename_var(from, to)),
        }
    }

    /// Whether the formula is built from atoms, `true`, `false`, `&`, `|` and `exists` only.
    pub fn is_positive_existential(&self) -> bool {
        match self {
            Formula::Not(_) | Formula::Implies(..) | Formula::Forall(..) => false,
            Formula::And(a, b) | Formula::Or(a, b) => {
                a.is_positive_existential() && b.is_positive_existential()
            }
            Formula::Exists(_, _, a) => a.is_positive_existential(),
            _ => true,
        }
    }

    /// Universal closure over the free variables, in name order.
    pub fn universal_closure(&self) -> Formula {
        self.free_vars()
            .into_iter()
            .rev()
            .fold(self.clone(), |acc, (v, s)| Formula::forall(&v, s, acc))
    }
}

/// Checks that every constructor respects its signature and that variables
/// agree with `context` and with their binders.
pub fn sort_check(phi: &Formula, context: &Context) -> Result<(), SortError> {
    let mut scope: Vec<(String, Sort)> = Vec::new();
    let mut seen_free: Context = context.clone();
    check_formula(phi, &mut scope, &mut seen_free)
}

fn check_formula(
    phi: &Formula,
    scope: &mut Vec<(String, Sort)>,
    free: &mut Context,
) -> Result<(), SortError> {
    match phi {
        Formula::True | Formula::False => Ok(()),
        Formula::Not(a) => check_formula(a, scope, free),
        Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
            check_formula(a, scope, free)?;
            check_formula(b, scope, free)
        }
        Formula::Exists(v, s, a) | Formula::Forall(v, s, a) => {
            scope.push((v.clone(), *s));
            let r = check_formula(a, scope, free);
            scope.pop();
            r
        }
        Formula::GLeq(a, b) | Formula::GEq(a, b) => {
            check_side(phi, a, Sort::G, scope, free)?;
            check_side(phi, b, Sort::G, scope, free)
        }
        Formula::LBelow(a, b) | Formula::LEq(a, b) => {
            check_side(phi, a, Sort::L, scope, free)?;
            check_side(phi, b, Sort::L, scope, free)
        }
    }
}

fn check_side(
    atom: &Formula,
    t: &Term,
    want: Sort,
    scope: &[(String, Sort)],
    free: &mut Context,
) -> Result<(), SortError> {
    let got = t.sort()?;
    if got != want {
        return Err(SortError::new(
            atom,
            format!("side `{t}` has sort {got}, expected {want}"),
        ));
    }
    let mut vars = BTreeMap::new();
    t.collect_vars(&mut vars);
    for (v, s) in vars {
        let declared = scope
            .iter()
            .rev()
            .find(|(n, _)| *n == v)
            .map(|(_, s)| *s)
            .or_else(|| free.get(&v).copied());
        match declared {
            Some(d) if d != s => {
                return Err(SortError::new(
                    t,
                    format!("variable `{v}` is declared {d} but used as {s}"),
                ))
            }
            Some(_) => {}
            None => {
                free.insert(v, s);
            }
        }
    }
    Ok(())
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&print::term_to_string(self))
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&print::formula_to_string(self))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sort_check_examples() {
        let mut ctx = Context::new();
        ctx.insert("x".into(), Sort::G);
        let phi = Formula::LEq(Term::val(Term::gvar("x")), Term::Top);
        assert!(sort_check(&phi, &ctx).is_ok());

        let bad = Term::add(Term::gvar("x"), Term::Top);
        assert!(bad.sort().is_err());
        let phi = Formula::GLeq(bad, Term::Zero);
        assert!(sort_check(&phi, &ctx).is_err());

        let phi = Formula::LEq(Term::val(Term::lvar("l")), Term::Top);
        assert!(sort_check(&phi, &Context::new()).is_err());
    }

    #[test]
    fn binder_sort_must_match_use() {
        let phi = Formula::exists("a", Sort::L, Formula::GLeq(Term::gvar("a"), Term::Zero));
        assert!(sort_check(&phi, &Context::new()).is_err());
        let phi = Formula::and(
            Formula::GLeq(Term::gvar("a"), Term::Zero),
            Formula::LEq(Term::lvar("a"), Term::Top),
        );
        assert!(sort_check(&phi, &Context::new()).is_err());
    }

    #[test]
    fn counting() {
        let phi = parse("forall v:G. exists b:G. b + b = v & 0 <= v").unwrap();
        assert_eq!(phi.quantifier_count(), 2);
        assert_eq!(phi.quantifier_depth(), 2);
        assert_eq!(phi.atom_count(), 2);
        assert!(phi.is_sentence());
    }
}
