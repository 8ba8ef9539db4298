//! Reduction of two-sorted formulas to the lattice sort.
//!
//! A formula becomes `∃p̄ (χ(p̄, w̄) ∧ ⋀ p_i = P(t_i))` with `χ` lattice-sorted.
//! Group atoms are first rewritten as lattice atoms about `P`, `P` is pushed
//! down to primitive linear arguments, and group quantifiers are eliminated
//! innermost first. Mode `tplus` is exact in every divisible densely valued
//! ℓ-group with patching but refuses lattice quantifiers that alternate with an
//! enclosing group quantifier; mode `ec` removes every lattice quantifier as it
//! goes, which is sound for existentially closed structures.

mod block;
mod elim;

use std::fmt;
use std::str::FromStr;

use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::ba::{ba_decide, ba_qe, BaError};
use crate::syntax::{
    group_atoms_to_lattice, push_valuation_formula, rename_apart, sort_check, Formula,
    NameSupply, Sort, SortError, Term,
};
pub use block::{eliminate_group_var, Bound, PrimitiveBlock};
use elim::Eliminator;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Tplus,
    Ec,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Tplus => "tplus",
            Mode::Ec => "ec",
        })
    }
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "tplus" => Ok(Mode::Tplus),
            "ec" => Ok(Mode::Ec),
            other => Err(format!("unknown mode `{other}`, expected tplus or ec")),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SwError {
    #[error(transparent)]
    Sort(SortError),
    #[error("unsupported fragment: {0}")]
    UnsupportedFragment(String),
    #[error("resource limit: {0}")]
    ResourceLimit(String),
    #[error("not primitive: {0}")]
    NotPrimitive(String),
    #[error("not a sentence, free: {}", .0.join(", "))]
    NotSentence(Vec<String>),
    #[error(transparent)]
    Ba(#[from] BaError),
}

/// `χ` together with the terms `t_i` bound to its parameters `p_i`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReductionOutput {
    pub k: usize,
    pub terms: Vec<Term>,
    pub chi: Formula,
    pub mode: Mode,
    /// Names of the lattice parameters standing for `P(t_i)`.
    pub params: Vec<String>,
}

impl ReductionOutput {
    /// `∃p_1 .. p_k (χ ∧ ⋀ p_i = P(t_i))`.
    pub fn assemble(&self) -> Formula {
        let bindings = self
            .params
            .iter()
            .zip(&self.terms)
            .map(|(p, t)| Formula::LEq(Term::lvar(p), Term::val(t.clone())));
        let body = Formula::conj(std::iter::once(self.chi.clone()).chain(bindings));
        self.params
            .iter()
            .rev()
            .fold(body, |acc, p| Formula::exists(p, Sort::L, acc))
    }
}

impl Serialize for ReductionOutput {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Repr {
            k: usize,
            terms: Vec<String>,
            chi: String,
            mode: Mode,
        }
        Repr {
            k: self.k,
            terms: self.terms.iter().map(|t| t.to_string()).collect(),
            chi: self.chi.to_string(),
            mode: self.mode,
        }
        .serialize(s)
    }
}

/// A reduction with its log.
#[derive(Clone, Debug)]
pub struct Reduction {
    pub output: ReductionOutput,
    pub trace: Vec<String>,
    pub eliminations: usize,
}

pub fn reduce(phi: &Formula, mode: Mode) -> Result<ReductionOutput, SwError> {
    reduce_traced(phi, mode).map(|r| r.output)
}

pub fn reduce_traced(phi: &Formula, mode: Mode) -> Result<Reduction, SwError> {
    sort_check(phi, &phi.free_vars()).map_err(SwError::Sort)?;
    let mut trace = Vec::new();
    let renamed = rename_apart(phi);
    let normal = push_valuation_formula(&group_atoms_to_lattice(&renamed));
    trace.push(format!("normalize -> {normal}"));
    let mut supply = NameSupply::for_formula(&normal);
    let mut run = Run {
        mode,
        supply: &mut supply,
        trace: &mut trace,
        eliminations: 0,
    };
    let mut chi = run.process(&normal)?;
    let eliminations = run.eliminations;
    if mode == Mode::Ec || chi.is_quantifier_free() {
        // Quantifier-free simplification is valid in every nontrivial Boolean algebra.
        chi = match ba_qe(&chi) {
            Ok(out) => out,
            Err(BaError::TooManyAtoms { .. }) if mode == Mode::Tplus => chi,
            Err(e) => return Err(e.into()),
        };
    }
    let (chi, terms, params) = extract_terms(&chi, &mut supply);
    trace.push(format!("chi -> {chi}"));
    Ok(Reduction {
        output: ReductionOutput {
            k: terms.len(),
            terms,
            chi,
            mode,
            params,
        },
        trace,
        eliminations,
    })
}

struct Run<'a> {
    mode: Mode,
    supply: &'a mut NameSupply,
    trace: &'a mut Vec<String>,
    eliminations: usize,
}

impl Run<'_> {
    fn process(&mut self, phi: &Formula) -> Result<Formula, SwError> {
        Ok(match phi {
            Formula::Not(a) => Formula::not(self.process(a)?),
            Formula::And(a, b) => Formula::and(self.process(a)?, self.process(b)?),
            Formula::Or(a, b) => Formula::or(self.process(a)?, self.process(b)?),
            Formula::Implies(a, b) => Formula::implies(self.process(a)?, self.process(b)?),
            Formula::Exists(v, Sort::L, a) | Formula::Forall(v, Sort::L, a) => {
                let body = self.process(a)?;
                let exists = matches!(phi, Formula::Exists(..));
                let q = if exists {
                    Formula::exists(v, Sort::L, body)
                } else {
                    Formula::forall(v, Sort::L, body)
                };
                if self.mode == Mode::Ec {
                    self.eliminations += 1;
                    let out = ba_qe(&q)?;
                    self.trace.push(format!("ba_qe {v}:L -> {out}"));
                    out
                } else {
                    q
                }
            }
            Formula::Exists(v, Sort::G, a) | Formula::Forall(v, Sort::G, a) => {
                let body = self.process(a)?;
                self.eliminations += 1;
                let mut el = Eliminator {
                    mode: self.mode,
                    supply: self.supply,
                    trace: self.trace,
                };
                el.eliminate(matches!(phi, Formula::Exists(..)), v, &body)?
            }
            atom => atom.clone(),
        })
    }
}

/// Replaces each distinct `P(t)` by a parameter, in order of first occurrence.
fn extract_terms(chi: &Formula, supply: &mut NameSupply) -> (Formula, Vec<Term>, Vec<String>) {
    let mut terms: Vec<Term> = Vec::new();
    let mut params: Vec<String> = Vec::new();
    let mut replace = |t: &Term| -> Term {
        t.map_bottom_up(&mut |t| match t {
            Term::Val(g) => {
                let i = match terms.iter().position(|x| *x == *g) {
                    Some(i) => i,
                    None => {
                        terms.push((*g).clone());
                        params.push(supply.fresh(&format!("p{}", terms.len())));
                        terms.len() - 1
                    }
                };
                Term::lvar(&params[i])
            }
            t => t,
        })
    };
    let chi = map_atoms_in_order(chi, &mut replace);
    (chi, terms, params)
}

// Left-to-right, so parameters are numbered by first occurrence in print order.
fn map_atoms_in_order(f: &Formula, g: &mut impl FnMut(&Term) -> Term) -> Formula {
    match f {
        Formula::True | Formula::False => f.clone(),
        Formula::Not(a) => Formula::not(map_atoms_in_order(a, g)),
        Formula::And(a, b) => {
            let x = map_atoms_in_order(a, g);
            Formula::and(x, map_atoms_in_order(b, g))
        }
        Formula::Or(a, b) => {
            let x = map_atoms_in_order(a, g);
            Formula::or(x, map_atoms_in_order(b, g))
        }
        Formula::Implies(a, b) => {
            let x = map_atoms_in_order(a, g);
            Formula::implies(x, map_atoms_in_order(b, g))
        }
        Formula::Exists(v, s, a) => Formula::exists(v, *s, map_atoms_in_order(a, g)),
        Formula::Forall(v, s, a) => Formula::forall(v, *s, map_atoms_in_order(a, g)),
        Formula::LBelow(a, b) => {
            let x = g(a);
            Formula::LBelow(x, g(b))
        }
        Formula::LEq(a, b) => {
            let x = g(a);
            Formula::LEq(x, g(b))
        }
        other => other.clone(),
    }
}

/// Truth of a sentence in every existentially closed densely valued ℓ-group.
pub fn decide_ec(sigma: &Formula) -> Result<bool, SwError> {
    decide_ec_traced(sigma).map(|(b, _)| b)
}

pub fn decide_ec_traced(sigma: &Formula) -> Result<(bool, Reduction), SwError> {
    let free: Vec<String> = sigma.free_vars().into_keys().collect();
    if !free.is_empty() {
        return Err(SwError::NotSentence(free));
    }
    let r = reduce_traced(sigma, Mode::Ec)?;
    let verdict = ba_decide(&r.output.assemble())?;
    Ok((verdict, r))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::{parse, parse_with_context, Context};

    fn ec(text: &str) -> bool {
        decide_ec(&parse(text).unwrap()).unwrap()
    }

    #[test]
    fn known_answers() {
        assert!(ec("forall v:G. exists b:G. b + b = v"));
        assert!(ec("forall v:G. exists b:G. 3*b = v"));
        assert!(ec("forall l:L. exists a:G. P(a) = l"));
        assert!(ec("forall x:L. bot < x -> exists y:L. bot < y & y < x"));
        assert!(ec("forall a:L. (a cup compl(a) = top) & (a cap compl(a) = bot)"));
        assert!(ec("exists v:G. 0 <= v & P(-v) = bot"));
        assert!(ec(
            "forall v1,v2:G, w1,w2:L. w1 cap w2 << P(v1 - v2) cap P(v2 - v1) -> \
             exists a:G. w1 << P(a - v1) cap P(v1 - a) & w2 << P(a - v2) cap P(v2 - a)"
        ));
        assert!(!ec("forall a:G. 0 <= a -> exists g:G. (0 <= g & ~(g = 0) & a meet g = 0)"));
        assert!(!ec("top = bot"));
    }

    #[test]
    fn reduce_examples() {
        let ctx: Context = [("a".to_string(), Sort::G)].into();
        let phi = parse_with_context("exists b:G. b + b = a", &ctx).unwrap();
        let r = reduce(&phi, Mode::Tplus).unwrap();
        assert_eq!((r.k, r.chi.clone()), (0, Formula::True));

        let phi = parse_with_context("0 <= a", &ctx).unwrap();
        let r = reduce(&phi, Mode::Tplus).unwrap();
        assert_eq!(r.k, 1);
        assert_eq!(r.terms[0].to_string(), "a");
        assert_eq!(r.chi.to_string(), "p1 = top");
        assert_eq!(r.assemble().to_string(), "exists p1:L. p1 = top & p1 = P(a)");
    }

    #[test]
    fn ec_weak_order_unit_step() {
        let ctx: Context = [("a".to_string(), Sort::G)].into();
        let phi = parse_with_context("exists g:G. 0 <= g & ~(g = 0) & a meet g = 0", &ctx).unwrap();
        let r = reduce(&phi, Mode::Ec).unwrap();
        assert_eq!(r.terms.iter().map(|t| t.to_string()).collect::<Vec<_>>(), vec!["a", "-a"]);
        let json = serde_json::to_value(&r).unwrap();
        assert_eq!(json["mode"], "ec");
        assert_eq!(json["k"], 2);
    }

    #[test]
    fn tplus_rejects_alternation() {
        let phi = parse("exists a:G. forall w:L. w << P(a)").unwrap();
        assert!(matches!(reduce(&phi, Mode::Tplus), Err(SwError::UnsupportedFragment(_))));
        assert!(reduce(&phi, Mode::Ec).is_ok());
        let phi = parse("exists a:G. exists w:L. w << P(a) & ~(w = bot)").unwrap();
        assert!(reduce(&phi, Mode::Tplus).is_ok());
    }

    #[test]
    fn positive_existential_is_preserved() {
        let ctx: Context = [("x".to_string(), Sort::G), ("l".to_string(), Sort::L)].into();
        let phi = parse_with_context("exists a:G. x <= a & l << P(-a) | exists b:G. b = x", &ctx).unwrap();
        assert!(phi.is_positive_existential());
        let r = reduce(&phi, Mode::Tplus).unwrap();
        assert!(r.assemble().is_positive_existential(), "{}", r.chi);
    }
}
