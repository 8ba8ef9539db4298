//! Brute-force truth in the finite standard structure `Stan(Q^n)`.
//!
//! Lattice quantifiers range over all `2^n` subsets. A group quantifier
//! introduces `n` rational unknowns, one per point; every atom then unfolds
//! pointwise into linear constraints, and the unknowns are removed again by
//! Fourier–Motzkin elimination. Nothing here depends on the reduction engine.

pub mod lra;

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::algebra::{FinStdStructure, GroupVector, SubsetL};
use crate::rational::Rational;
use crate::syntax::{sort_check, Context, Formula, Sort, SortError, Term};
use lra::{exists_vars, Budget, LinExpr, LinFormula, Rel, Var};

pub use lra::{fm_eliminate, LinConstraint};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OracleError {
    #[error("unbound variable `{0}`")]
    UnboundVariable(String),
    #[error("formula is not quantifier-free")]
    NotQuantifierFree,
    #[error("resource limit: {0}")]
    ResourceLimit(String),
    #[error("value of `{name}` has size {got}, structure has {expected} points")]
    DimensionMismatch {
        name: String,
        expected: usize,
        got: usize,
    },
    #[error(transparent)]
    Sort(#[from] SortError),
}

pub type Result<T> = std::result::Result<T, OracleError>;

/// Values for free variables.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Assignment {
    pub group: BTreeMap<String, GroupVector>,
    pub lattice: BTreeMap<String, SubsetL>,
}

#[derive(Deserialize)]
struct AssignmentRepr {
    #[serde(default)]
    group: BTreeMap<String, GroupVector>,
    #[serde(default)]
    lattice: BTreeMap<String, Vec<usize>>,
}

impl Assignment {
    pub fn new() -> Self {
        Assignment::default()
    }

    pub fn with_group(mut self, name: &str, v: GroupVector) -> Self {
        self.group.insert(name.to_string(), v);
        self
    }

    pub fn with_lattice(mut self, name: &str, s: SubsetL) -> Self {
        self.lattice.insert(name.to_string(), s);
        self
    }

    /// Reads `{"group": {x: ["p/q", ..]}, "lattice": {l: [indices]}}` for a structure of size `n`.
    pub fn from_json(text: &str, n: usize) -> std::result::Result<Self, String> {
        let repr: AssignmentRepr = serde_json::from_str(text).map_err(|e| e.to_string())?;
        let mut out = Assignment::new();
        out.group = repr.group;
        for (k, idx) in repr.lattice {
            let s = SubsetL::from_indices(n, &idx).map_err(|e| format!("lattice `{k}`: {e}"))?;
            out.lattice.insert(k, s);
        }
        Ok(out)
    }

    fn context(&self) -> Context {
        self.group
            .keys()
            .map(|k| (k.clone(), Sort::G))
            .chain(self.lattice.keys().map(|k| (k.clone(), Sort::L)))
            .collect()
    }

    fn check(&self, n: usize) -> Result<()> {
        for (name, v) in &self.group {
            if v.len() != n {
                return Err(OracleError::DimensionMismatch {
                    name: name.clone(),
                    expected: n,
                    got: v.len(),
                });
            }
        }
        for (name, s) in &self.lattice {
            if s.width() != n {
                return Err(OracleError::DimensionMismatch {
                    name: name.clone(),
                    expected: n,
                    got: s.width(),
                });
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OracleLimits {
    pub max_n: usize,
    pub max_quantifiers: usize,
    pub max_atoms: usize,
    /// Case splits allowed inside one elimination.
    pub max_cases: u64,
}

impl Default for OracleLimits {
    fn default() -> Self {
        OracleLimits {
            max_n: 4,
            max_quantifiers: 6,
            max_atoms: 64,
            max_cases: 2_000_000,
        }
    }
}

/// Direct evaluation of a quantifier-free formula.
pub fn eval_qf(s: &FinStdStructure, env: &Assignment, phi: &Formula) -> Result<bool> {
    if !phi.is_quantifier_free() {
        return Err(OracleError::NotQuantifierFree);
    }
    env.check(s.ground_size())?;
    eval_concrete(s, env, phi)
}

fn eval_concrete(s: &FinStdStructure, env: &Assignment, phi: &Formula) -> Result<bool> {
    Ok(match phi {
        Formula::True => true,
        Formula::False => false,
        Formula::Not(a) => !eval_concrete(s, env, a)?,
        Formula::And(a, b) => eval_concrete(s, env, a)? && eval_concrete(s, env, b)?,
        Formula::Or(a, b) => eval_concrete(s, env, a)? || eval_concrete(s, env, b)?,
        Formula::Implies(a, b) => !eval_concrete(s, env, a)? || eval_concrete(s, env, b)?,
        Formula::GLeq(a, b) => group_value(s, env, a)?
            .leq(&group_value(s, env, b)?)
            .expect("equal sizes"),
        Formula::GEq(a, b) => group_value(s, env, a)? == group_value(s, env, b)?,
        Formula::LBelow(a, b) => lattice_value(s, env, a)?
            .below(&lattice_value(s, env, b)?)
            .expect("equal widths"),
        Formula::LEq(a, b) => lattice_value(s, env, a)? == lattice_value(s, env, b)?,
        Formula::Exists(..) | Formula::Forall(..) => return Err(OracleError::NotQuantifierFree),
    })
}

/// The value of a group term under `env`.
pub fn group_value(s: &FinStdStructure, env: &Assignment, t: &Term) -> Result<GroupVector> {
    let n = s.ground_size();
    let g = |t: &Term| group_value(s, env, t);
    Ok(match t {
        Term::GVar(v) => env
            .group
            .get(v)
            .cloned()
            .ok_or_else(|| OracleError::UnboundVariable(v.clone()))?,
        Term::Zero => GroupVector::zero(n),
        Term::Add(a, b) => g(a)?.add(&g(b)?).expect("equal sizes"),
        Term::Neg(a) => g(a)?.neg(),
        Term::GMeet(a, b) => g(a)?.meet(&g(b)?).expect("equal sizes"),
        Term::GJoin(a, b) => g(a)?.join(&g(b)?).expect("equal sizes"),
        Term::IntScale(k, a) => g(a)?.scale(&Rational::from(k.clone())),
        Term::RatScale(q, a) => g(a)?.scale(q),
        _ => return Err(wrong_sort(t)),
    })
}

/// The value of a lattice term under `env`.
pub fn lattice_value(s: &FinStdStructure, env: &Assignment, t: &Term) -> Result<SubsetL> {
    let l = |t: &Term| lattice_value(s, env, t);
    Ok(match t {
        Term::LVar(v) => env
            .lattice
            .get(v)
            .cloned()
            .ok_or_else(|| OracleError::UnboundVariable(v.clone()))?,
        Term::Bot => s.bot(),
        Term::Top => s.top(),
        Term::LMeet(a, b) => l(a)?.meet(&l(b)?).expect("equal widths"),
        Term::LJoin(a, b) => l(a)?.join(&l(b)?).expect("equal widths"),
        Term::Compl(a) => l(a)?.complement(),
        Term::Val(a) => group_value(s, env, a)?.std_valuation(),
        _ => return Err(wrong_sort(t)),
    })
}

fn wrong_sort(t: &Term) -> OracleError {
    match t.sort() {
        Err(e) => OracleError::Sort(e),
        Ok(_) => OracleError::Sort(SortError {
            subterm: t.to_string(),
            message: "term used at the wrong sort".into(),
        }),
    }
}

/// Truth of `phi` in `Stan(Q^n)` with free variables taken from `env`.
pub fn decide_finite(s: &FinStdStructure, phi: &Formula, env: &Assignment) -> Result<bool> {
    decide_finite_with(s, phi, env, &OracleLimits::default())
}

pub fn decide_finite_with(
    s: &FinStdStructure,
    phi: &Formula,
    env: &Assignment,
    limits: &OracleLimits,
) -> Result<bool> {
    let n = s.ground_size();
    if n > limits.max_n {
        return Err(OracleError::ResourceLimit(format!(
            "structure size {n} exceeds the limit {}",
            limits.max_n
        )));
    }
    let q = counted_quantifiers(phi);
    if q > limits.max_quantifiers {
        return Err(OracleError::ResourceLimit(format!(
            "{q} quantifiers exceed the limit {}",
            limits.max_quantifiers
        )));
    }
    let atoms = phi.atom_count();
    if atoms > limits.max_atoms {
        return Err(OracleError::ResourceLimit(format!(
            "{atoms} atoms exceed the limit {}",
            limits.max_atoms
        )));
    }
    env.check(n)?;
    sort_check(phi, &env.context())?;
    if let Some(v) = phi
        .free_vars()
        .keys()
        .find(|v| !env.group.contains_key(*v) && !env.lattice.contains_key(*v))
    {
        return Err(OracleError::UnboundVariable(v.clone()));
    }
    let mut tr = Translator {
        s,
        group: env
            .group
            .iter()
            .map(|(k, v)| {
                let sym = v.values().iter().map(|x| Sym::constant(x.clone())).collect();
                (k.clone(), sym)
            })
            .collect(),
        lattice: env.lattice.iter().map(|(k, v)| (k.clone(), v.clone())).collect(),
        next_var: 0,
        budget: Budget::new(limits.max_cases),
    };
    let out = tr.formula(phi)?;
    match out.as_const() {
        Some(b) => Ok(b),
        None => unreachable!("all unknowns are bound, got {out:?}"),
    }
}

// `exists p:L. ... & p = t & ...` is decided by computing `t`, so it does not count.
fn counted_quantifiers(phi: &Formula) -> usize {
    match phi {
        Formula::Exists(v, Sort::L, body) if defining_conjunct(v, body).is_some() => {
            counted_quantifiers(body)
        }
        Formula::Exists(_, _, a) | Formula::Forall(_, _, a) => 1 + counted_quantifiers(a),
        Formula::Not(a) => counted_quantifiers(a),
        Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
            counted_quantifiers(a) + counted_quantifiers(b)
        }
        _ => 0,
    }
}

fn conjuncts<'a>(phi: &'a Formula, out: &mut Vec<&'a Formula>) {
    match phi {
        Formula::And(a, b) => {
            conjuncts(a, out);
            conjuncts(b, out);
        }
        f => out.push(f),
    }
}

/// A term `t` with `p = t` among the top-level conjuncts of `body`, `t` not mentioning `p`.
fn defining_conjunct<'a>(p: &str, body: &'a Formula) -> Option<&'a Term> {
    let mut cs = Vec::new();
    conjuncts(body, &mut cs);
    cs.into_iter().find_map(|c| match c {
        Formula::LEq(Term::LVar(v), t) | Formula::LEq(t, Term::LVar(v))
            if v == p && !t.mentions(p) =>
        {
            Some(t)
        }
        _ => None,
    })
}

/// A group value at one point: a join of meets of linear expressions.
#[derive(Clone, Debug, PartialEq, Eq)]
struct Sym(Vec<Vec<LinExpr>>);

impl Sym {
    fn constant(c: Rational) -> Sym {
        Sym(vec![vec![LinExpr::constant(c)]])
    }

    fn var(v: Var) -> Sym {
        Sym(vec![vec![LinExpr::var(v)]])
    }

    // Evaluates away min/max when everything is constant.
    fn tidy(self) -> Sym {
        let all_const = self.0.iter().flatten().all(LinExpr::is_constant);
        if all_const {
            let value = self
                .0
                .iter()
                .map(|m| {
                    m.iter()
                        .map(|e| e.constant.clone())
                        .min()
                        .expect("non-empty meet")
                })
                .max()
                .expect("non-empty join");
            return Sym::constant(value);
        }
        let mut joins: Vec<Vec<LinExpr>> = self
            .0
            .into_iter()
            .map(|m| {
                let s: BTreeSet<LinExpr> = m.into_iter().collect();
                s.into_iter().collect()
            })
            .collect();
        joins.sort();
        joins.dedup();
        Sym(joins)
    }

    fn add(&self, other: &Sym) -> Sym {
        let mut out = Vec::new();
        for a in &self.0 {
            for b in &other.0 {
                out.push(a.iter().flat_map(|x| b.iter().map(move |y| x.add(y))).collect());
            }
        }
        Sym(out).tidy()
    }

    fn neg(&self) -> Sym {
        let mut out: Vec<Vec<LinExpr>> = vec![vec![]];
        for meet in &self.0 {
            let mut next = Vec::new();
            for partial in &out {
                for x in meet {
                    let mut p = partial.clone();
                    p.push(x.neg());
                    next.push(p);
                }
            }
            out = next;
        }
        Sym(out).tidy()
    }

    fn meet(&self, other: &Sym) -> Sym {
        let mut out = Vec::new();
        for a in &self.0 {
            for b in &other.0 {
                out.push(a.iter().chain(b).cloned().collect());
            }
        }
        Sym(out).tidy()
    }

    fn join(&self, other: &Sym) -> Sym {
        Sym(self.0.iter().chain(&other.0).cloned().collect()).tidy()
    }

    fn scale(&self, q: &Rational) -> Sym {
        if q.is_negative() {
            return self.scale(&q.abs()).neg();
        }
        Sym(self
            .0
            .iter()
            .map(|m| m.iter().map(|e| e.scale(q)).collect())
            .collect())
        .tidy()
    }

    fn single(&self) -> Option<&LinExpr> {
        match self.0.as_slice() {
            [m] => match m.as_slice() {
                [e] => Some(e),
                _ => None,
            },
            _ => None,
        }
    }

    fn nonneg(&self) -> LinFormula {
        LinFormula::or(
            self.0
                .iter()
                .map(|m| LinFormula::and(m.iter().map(|e| LinFormula::atom(e.clone(), Rel::Ge)))),
        )
    }
}

struct Translator<'a> {
    s: &'a FinStdStructure,
    group: Vec<(String, Vec<Sym>)>,
    lattice: Vec<(String, SubsetL)>,
    next_var: Var,
    budget: Budget,
}

impl Translator<'_> {
    fn n(&self) -> usize {
        self.s.ground_size()
    }

    fn group_term(&self, t: &Term) -> Result<Vec<Sym>> {
        let n = self.n();
        let pointwise2 = |a: &Term, b: &Term, f: fn(&Sym, &Sym) -> Sym| -> Result<Vec<Sym>> {
            let (x, y) = (self.group_term(a)?, self.group_term(b)?);
            Ok(x.iter().zip(&y).map(|(p, q)| f(p, q)).collect())
        };
        Ok(match t {
            Term::GVar(v) => self
                .group
                .iter()
                .rev()
                .find(|(k, _)| k == v)
                .map(|(_, s)| s.clone())
                .ok_or_else(|| OracleError::UnboundVariable(v.clone()))?,
            Term::Zero => vec![Sym::constant(Rational::zero()); n],
            Term::Add(a, b) => pointwise2(a, b, Sym::add)?,
            Term::GMeet(a, b) => pointwise2(a, b, Sym::meet)?,
            Term::GJoin(a, b) => pointwise2(a, b, Sym::join)?,
            Term::Neg(a) => self.group_term(a)?.iter().map(Sym::neg).collect(),
            Term::IntScale(k, a) => {
                let q = Rational::from(k.clone());
                self.group_term(a)?.iter().map(|x| x.scale(&q)).collect()
            }
            Term::RatScale(q, a) => self.group_term(a)?.iter().map(|x| x.scale(q)).collect(),
            _ => unreachable!("sort checked"),
        })
    }

    /// Membership of point `i` in a lattice term, for every `i`.
    fn lattice_term(&self, t: &Term) -> Result<Vec<LinFormula>> {
        let n = self.n();
        Ok(match t {
            Term::LVar(v) => {
                let s = self
                    .lattice
                    .iter()
                    .rev()
                    .find(|(k, _)| k == v)
                    .map(|(_, s)| s)
                    .ok_or_else(|| OracleError::UnboundVariable(v.clone()))?;
                (0..n).map(|i| LinFormula::Const(s.contains(i))).collect()
            }
            Term::Bot => vec![LinFormula::Const(false); n],
            Term::Top => vec![LinFormula::Const(true); n],
            Term::LMeet(a, b) | Term::LJoin(a, b) => {
                let (x, y) = (self.lattice_term(a)?, self.lattice_term(b)?);
                x.into_iter()
                    .zip(y)
                    .map(|(p, q)| {
                        if matches!(t, Term::LMeet(..)) {
                            LinFormula::and([p, q])
                        } else {
                            LinFormula::or([p, q])
                        }
                    })
                    .collect()
            }
            Term::Compl(a) => self.lattice_term(a)?.iter().map(LinFormula::negate).collect(),
            Term::Val(a) => self.group_term(a)?.iter().map(Sym::nonneg).collect(),
            _ => unreachable!("sort checked"),
        })
    }

    fn atom(&self, phi: &Formula) -> Result<LinFormula> {
        Ok(match phi {
            Formula::GLeq(a, b) | Formula::GEq(a, b) => {
                let (x, y) = (self.group_term(a)?, self.group_term(b)?);
                let strict_eq = matches!(phi, Formula::GEq(..));
                LinFormula::and(x.iter().zip(&y).map(|(p, q)| {
                    let up = q.add(&p.neg());
                    if !strict_eq {
                        return up.nonneg();
                    }
                    match up.single() {
                        Some(e) => LinFormula::atom(e.clone(), Rel::Eq),
                        None => LinFormula::and([up.nonneg(), p.add(&q.neg()).nonneg()]),
                    }
                }))
            }
            Formula::LBelow(a, b) | Formula::LEq(a, b) => {
                let (x, y) = (self.lattice_term(a)?, self.lattice_term(b)?);
                let below = matches!(phi, Formula::LBelow(..));
                LinFormula::and(x.into_iter().zip(y).map(|(p, q)| {
                    if below {
                        LinFormula::or([p.negate(), q])
                    } else {
                        LinFormula::or([
                            LinFormula::and([p.clone(), q.clone()]),
                            LinFormula::and([p.negate(), q.negate()]),
                        ])
                    }
                }))
            }
            _ => unreachable!("atoms only"),
        })
    }

    fn formula(&mut self, phi: &Formula) -> Result<LinFormula> {
        Ok(match phi {
            Formula::True => LinFormula::Const(true),
            Formula::False => LinFormula::Const(false),
            Formula::Not(a) => self.formula(a)?.negate(),
            Formula::And(a, b) => {
                let x = self.formula(a)?;
                if x == LinFormula::Const(false) {
                    return Ok(x);
                }
                LinFormula::and([x, self.formula(b)?])
            }
            Formula::Or(a, b) => {
                let x = self.formula(a)?;
                if x == LinFormula::Const(true) {
                    return Ok(x);
                }
                LinFormula::or([x, self.formula(b)?])
            }
            Formula::Implies(a, b) => {
                let x = self.formula(a)?.negate();
                if x == LinFormula::Const(true) {
                    return Ok(x);
                }
                LinFormula::or([x, self.formula(b)?])
            }
            Formula::Exists(v, Sort::L, body) | Formula::Forall(v, Sort::L, body) => {
                let exists = matches!(phi, Formula::Exists(..));
                if exists {
                    if let Some(value) = self.defined_value(v, body)? {
                        return self.with_lattice(v, value, body);
                    }
                }
                let mut parts = Vec::new();
                for sub in self.s.subsets() {
                    let r = self.with_lattice(v, sub, body)?;
                    match (exists, r.as_const()) {
                        (true, Some(true)) => return Ok(r),
                        (false, Some(false)) => return Ok(r),
                        _ => parts.push(r),
                    }
                }
                if exists {
                    LinFormula::or(parts)
                } else {
                    LinFormula::and(parts)
                }
            }
            Formula::Exists(v, Sort::G, body) | Formula::Forall(v, Sort::G, body) => {
                let n = self.n();
                let vars: Vec<Var> = (self.next_var..self.next_var + n).collect();
                self.next_var += n;
                self.group
                    .push((v.clone(), vars.iter().map(|&x| Sym::var(x)).collect()));
                let inner = self.formula(body);
                self.group.pop();
                let inner = inner?;
                let vars: BTreeSet<Var> = vars.into_iter().collect();
                let exhausted = |_| {
                    OracleError::ResourceLimit("elimination exceeded the case-split budget".into())
                };
                if matches!(phi, Formula::Exists(..)) {
                    exists_vars(&vars, &inner, &mut self.budget).map_err(exhausted)?
                } else {
                    exists_vars(&vars, &inner.negate(), &mut self.budget)
                        .map_err(exhausted)?
                        .negate()
                }
            }
            atom => self.atom(atom)?,
        })
    }

    fn with_lattice(&mut self, v: &str, value: SubsetL, body: &Formula) -> Result<LinFormula> {
        self.lattice.push((v.to_string(), value));
        let r = self.formula(body);
        self.lattice.pop();
        r
    }

    fn defined_value(&self, p: &str, body: &Formula) -> Result<Option<SubsetL>> {
        let Some(t) = defining_conjunct(p, body) else {
            return Ok(None);
        };
        let points = self.lattice_term(t)?;
        let bits: Option<Vec<bool>> = points.iter().map(LinFormula::as_const).collect();
        Ok(bits.map(|b| SubsetL::from_predicate(b.len(), |i| b[i])))
    }
}
