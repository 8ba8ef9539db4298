//! The theory of nontrivial atomless Boolean algebras over the lattice sort.
//!
//! Every atom is turned into an emptiness assertion `t = ⊥` about a Boolean
//! combination `t` of the lattice atoms, kept as a truth table. To eliminate
//! `∃y` from a conjunction `e = ⊥ ∧ ⋀ f_k ≠ ⊥`, write `e₁, e₀` for `e` with `y`
//! set to `⊤, ⊥`. A solution exists in an atomless algebra exactly when
//! `e₁ ⊓ e₀ = ⊥` and each `(f_k₁ ⊓ ¬e₁) ⊔ (f_k₀ ⊓ ¬e₀) ≠ ⊥`.
//! `P`-applications are treated as opaque constants.

mod interval;
mod table;

use std::collections::{BTreeSet, HashMap};

use thiserror::Error;

use crate::syntax::{rename_apart, Formula, Sort, Term};
pub use interval::{interval_check, IntervalAlgebraElem, MintermState, MintermStatus};
pub use table::Table;

/// Largest number of distinct lattice atoms handled in one formula.
pub const MAX_ATOMS: usize = 20;

/// Largest depth accepted by [`interval_check`].
pub const MAX_CHECK_DEPTH: usize = 4;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BaError {
    #[error("not lattice-sorted: {0}")]
    NotLatticeSorted(String),
    #[error("not a sentence, free: {}", .0.join(", "))]
    NotSentence(Vec<String>),
    #[error("{count} lattice atoms, at most {max} supported")]
    TooManyAtoms { count: usize, max: usize },
    #[error("quantifier depth {depth} exceeds {max}")]
    DepthExceeded { depth: usize, max: usize },
}

pub type Result<T> = std::result::Result<T, BaError>;

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
enum BForm {
    Const(bool),
    Zero(Table),
    NonZero(Table),
    And(Vec<BForm>),
    Or(Vec<BForm>),
}

impl BForm {
    fn zero(t: Table) -> BForm {
        if t.is_bot() {
            BForm::Const(true)
        } else if t.is_top() {
            BForm::Const(false)
        } else {
            BForm::Zero(t)
        }
    }

    fn nonzero(t: Table) -> BForm {
        BForm::zero(t).negate()
    }

    fn negate(&self) -> BForm {
        match self {
            BForm::Const(b) => BForm::Const(!b),
            BForm::Zero(t) => BForm::NonZero(t.clone()),
            BForm::NonZero(t) => BForm::Zero(t.clone()),
            BForm::And(xs) => BForm::or(xs.iter().map(BForm::negate).collect()),
            BForm::Or(xs) => BForm::and(xs.iter().map(BForm::negate).collect()),
        }
    }

    fn and(items: Vec<BForm>) -> BForm {
        BForm::combine(items, true)
    }

    fn or(items: Vec<BForm>) -> BForm {
        BForm::combine(items, false)
    }

    // Conjunction when `conj`, else disjunction. Emptiness literals on the
    // absorbing side merge into one: `a = ⊥ ∧ b = ⊥` is `a ⊔ b = ⊥`, and
    // dually `a ≠ ⊥ ∨ b ≠ ⊥` is `a ⊔ b ≠ ⊥`.
    fn combine(items: Vec<BForm>, conj: bool) -> BForm {
        let mut merged: Option<Table> = None;
        let mut rest = BTreeSet::new();
        let mut stack = items;
        while let Some(f) = stack.pop() {
            match f {
                BForm::Const(b) if b == conj => {}
                BForm::Const(_) => return BForm::Const(!conj),
                BForm::And(xs) if conj => stack.extend(xs),
                BForm::Or(xs) if !conj => stack.extend(xs),
                BForm::Zero(t) if conj => merged = Some(merged.map_or(t.clone(), |z| z.join(&t))),
                BForm::NonZero(t) if !conj => {
                    merged = Some(merged.map_or(t.clone(), |z| z.join(&t)))
                }
                other => {
                    rest.insert(other);
                }
            }
        }
        if let Some(z) = &merged {
            if z.is_top() {
                return BForm::Const(!conj);
            }
            // `z = ⊥` and `f ≠ ⊥` clash when `f ⊑ z`; dually their negations exhaust.
            let clash = rest.iter().any(|f| match f {
                BForm::NonZero(t) if conj => t.meet(&z.complement()).is_bot(),
                BForm::Zero(t) if !conj => t.meet(&z.complement()).is_bot(),
                _ => false,
            });
            if clash {
                return BForm::Const(!conj);
            }
        }
        let lit = |t: Table| if conj { BForm::Zero(t) } else { BForm::NonZero(t) };
        let mut out: Vec<BForm> = merged.map(lit).into_iter().collect();
        out.extend(rest);
        match out.len() {
            0 => BForm::Const(conj),
            1 => out.pop().expect("one item"),
            _ if conj => BForm::And(out),
            _ => BForm::Or(out),
        }
    }

    fn depends_on(&self, i: usize) -> bool {
        match self {
            BForm::Const(_) => false,
            BForm::Zero(t) | BForm::NonZero(t) => t.depends_on(i),
            BForm::And(xs) | BForm::Or(xs) => xs.iter().any(|x| x.depends_on(i)),
        }
    }

    fn as_const(&self) -> Option<bool> {
        match self {
            BForm::Const(b) => Some(*b),
            _ => None,
        }
    }
}

fn exists(y: usize, f: BForm) -> BForm {
    if !f.depends_on(y) {
        return f;
    }
    match f {
        BForm::Or(xs) => BForm::or(xs.into_iter().map(|x| exists(y, x)).collect()),
        BForm::And(xs) => {
            let (dep, indep): (Vec<BForm>, Vec<BForm>) = xs.into_iter().partition(|x| x.depends_on(y));
            let inner = match dep.iter().position(|x| matches!(x, BForm::Or(_))) {
                Some(i) => {
                    let mut others = dep;
                    let BForm::Or(alts) = others.remove(i) else {
                        unreachable!("position found an Or")
                    };
                    BForm::or(
                        alts.into_iter()
                            .map(|a| {
                                let mut conj = others.clone();
                                conj.push(a);
                                exists(y, BForm::and(conj))
                            })
                            .collect(),
                    )
                }
                None => eliminate_literals(y, &dep),
            };
            let mut all = indep;
            all.push(inner);
            BForm::and(all)
        }
        lit => eliminate_literals(y, &[lit]),
    }
}

fn eliminate_literals(y: usize, lits: &[BForm]) -> BForm {
    let m = match &lits[0] {
        BForm::Zero(t) | BForm::NonZero(t) => t.arity(),
        _ => unreachable!("literals only"),
    };
    let mut e = Table::bot(m);
    let mut fs = Vec::new();
    for l in lits {
        match l {
            BForm::Zero(t) => e = e.join(t),
            BForm::NonZero(t) => fs.push(t),
            _ => unreachable!("literals only"),
        }
    }
    let (e1, e0) = (e.cofactor(y, true), e.cofactor(y, false));
    let (ne1, ne0) = (e1.complement(), e0.complement());
    let mut out = vec![BForm::zero(e1.meet(&e0))];
    for f in fs {
        let room = f
            .cofactor(y, true)
            .meet(&ne1)
            .join(&f.cofactor(y, false).meet(&ne0));
        out.push(BForm::nonzero(room));
    }
    BForm::and(out)
}

#[derive(Clone, Debug)]
enum Leaf {
    Var(String),
    Opaque(Term),
}

/// The lattice atoms of a formula: its lattice variables and `P`-applications.
struct Universe {
    leaves: Vec<Leaf>,
    keys: Vec<String>,
}

impl Universe {
    fn collect(phi: &Formula) -> Result<Universe> {
        let mut u = Universe {
            leaves: Vec::new(),
            keys: Vec::new(),
        };
        u.walk(phi)?;
        if u.leaves.len() > MAX_ATOMS {
            return Err(BaError::TooManyAtoms {
                count: u.leaves.len(),
                max: MAX_ATOMS,
            });
        }
        Ok(u)
    }

    fn add(&mut self, key: String, leaf: Leaf) {
        if !self.keys.contains(&key) {
            self.keys.push(key);
            self.leaves.push(leaf);
        }
    }

    fn walk(&mut self, phi: &Formula) -> Result<()> {
        match phi {
            Formula::True | Formula::False => Ok(()),
            Formula::Not(a) => self.walk(a),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
                self.walk(a)?;
                self.walk(b)
            }
            Formula::Exists(v, Sort::L, a) | Formula::Forall(v, Sort::L, a) => {
                self.add(var_key(v), Leaf::Var(v.clone()));
                self.walk(a)
            }
            Formula::LBelow(a, b) | Formula::LEq(a, b) => {
                self.term(a)?;
                self.term(b)
            }
            other => Err(BaError::NotLatticeSorted(other.to_string())),
        }
    }

    fn term(&mut self, t: &Term) -> Result<()> {
        match t {
            Term::LVar(v) => self.add(var_key(v), Leaf::Var(v.clone())),
            Term::Val(_) => self.add(t.to_string(), Leaf::Opaque(t.clone())),
            Term::Bot | Term::Top => {}
            Term::LMeet(a, b) | Term::LJoin(a, b) => {
                self.term(a)?;
                self.term(b)?;
            }
            Term::Compl(a) => self.term(a)?,
            other => return Err(BaError::NotLatticeSorted(other.to_string())),
        }
        Ok(())
    }

    fn index_of_var(&self, v: &str) -> usize {
        let key = var_key(v);
        self.keys.iter().position(|k| *k == key).expect("collected")
    }

    fn table(&self, t: &Term) -> Table {
        let m = self.leaves.len();
        match t {
            Term::LVar(v) => Table::atom(m, self.index_of_var(v)),
            Term::Val(_) => {
                let key = t.to_string();
                Table::atom(m, self.keys.iter().position(|k| *k == key).expect("collected"))
            }
            Term::Bot => Table::bot(m),
            Term::Top => Table::top(m),
            Term::LMeet(a, b) => self.table(a).meet(&self.table(b)),
            Term::LJoin(a, b) => self.table(a).join(&self.table(b)),
            Term::Compl(a) => self.table(a).complement(),
            _ => unreachable!("checked during collection"),
        }
    }

    fn convert(&self, phi: &Formula, eliminations: &mut usize) -> BForm {
        match phi {
            Formula::True => BForm::Const(true),
            Formula::False => BForm::Const(false),
            Formula::Not(a) => self.convert(a, eliminations).negate(),
            Formula::And(a, b) => {
                BForm::and(vec![self.convert(a, eliminations), self.convert(b, eliminations)])
            }
            Formula::Or(a, b) => {
                BForm::or(vec![self.convert(a, eliminations), self.convert(b, eliminations)])
            }
            Formula::Implies(a, b) => BForm::or(vec![
                self.convert(a, eliminations).negate(),
                self.convert(b, eliminations),
            ]),
            Formula::LBelow(a, b) => BForm::zero(self.table(a).meet(&self.table(b).complement())),
            Formula::LEq(a, b) => BForm::zero(self.table(a).xor(&self.table(b))),
            Formula::Exists(v, _, a) => {
                *eliminations += 1;
                exists(self.index_of_var(v), self.convert(a, eliminations))
            }
            Formula::Forall(v, _, a) => {
                *eliminations += 1;
                exists(self.index_of_var(v), self.convert(a, eliminations).negate()).negate()
            }
            _ => unreachable!("checked during collection"),
        }
    }

    fn leaf_term(&self, i: usize) -> Term {
        match &self.leaves[i] {
            Leaf::Var(v) => Term::lvar(v),
            Leaf::Opaque(t) => t.clone(),
        }
    }

    /// A term denoting `t`, by Shannon expansion in atom order.
    fn term_of(&self, t: &Table) -> Term {
        self.term_memo(t, &mut HashMap::new())
    }

    fn term_memo(&self, t: &Table, memo: &mut HashMap<Table, Term>) -> Term {
        if t.is_bot() {
            return Term::Bot;
        }
        if t.is_top() {
            return Term::Top;
        }
        if let Some(done) = memo.get(t) {
            return done.clone();
        }
        let i = (0..t.arity()).find(|&i| t.depends_on(i)).expect("non-constant");
        let (t1, t0) = (t.cofactor(i, true), t.cofactor(i, false));
        let y = self.leaf_term(i);
        let ny = Term::compl(y.clone());
        let out = if t0.is_bot() {
            meet_simpl(y, self.term_memo(&t1, memo))
        } else if t1.is_bot() {
            meet_simpl(ny, self.term_memo(&t0, memo))
        } else if t1.is_top() {
            Term::ljoin(y, self.term_memo(&t0, memo))
        } else if t0.is_top() {
            Term::ljoin(ny, self.term_memo(&t1, memo))
        } else {
            Term::ljoin(
                meet_simpl(y, self.term_memo(&t1, memo)),
                meet_simpl(ny, self.term_memo(&t0, memo)),
            )
        };
        memo.insert(t.clone(), out.clone());
        out
    }

    fn formula_of(&self, f: &BForm) -> Formula {
        match f {
            BForm::Const(true) => Formula::True,
            BForm::Const(false) => Formula::False,
            BForm::Zero(t) => self.zero_atom(t),
            BForm::NonZero(t) => Formula::not(self.zero_atom(t)),
            BForm::And(xs) => Formula::conj(xs.iter().map(|x| self.formula_of(x))),
            BForm::Or(xs) => Formula::disj(xs.iter().map(|x| self.formula_of(x))),
        }
    }

    // `t = ⊥`, printed as `t = top` when the complement reads better.
    fn zero_atom(&self, t: &Table) -> Formula {
        let direct = self.term_of(t);
        let dual = self.term_of(&t.complement());
        if dual.to_string().len() < direct.to_string().len() {
            Formula::LEq(dual, Term::Top)
        } else {
            Formula::LEq(direct, Term::Bot)
        }
    }
}

fn var_key(v: &str) -> String {
    format!("var {v}")
}

fn meet_simpl(a: Term, b: Term) -> Term {
    if b == Term::Top {
        a
    } else {
        Term::lmeet(a, b)
    }
}

/// Removes every lattice quantifier; the result is equivalent in all nontrivial
/// atomless Boolean algebras. Group-sorted atoms are rejected.
pub fn ba_qe(phi: &Formula) -> Result<Formula> {
    ba_qe_counted(phi).map(|(f, _)| f)
}

/// [`ba_qe`] together with the number of quantifiers eliminated.
pub fn ba_qe_counted(phi: &Formula) -> Result<(Formula, usize)> {
    let phi = rename_apart(phi);
    let u = Universe::collect(&phi)?;
    let mut count = 0;
    let b = u.convert(&phi, &mut count);
    Ok((u.formula_of(&b), count))
}

/// A compact term equal to `t` in every Boolean algebra, `P`-applications kept opaque.
pub fn simplify_term(t: &Term) -> Result<Term> {
    let mut u = Universe {
        leaves: Vec::new(),
        keys: Vec::new(),
    };
    u.term(t)?;
    if u.leaves.len() > MAX_ATOMS {
        return Err(BaError::TooManyAtoms {
            count: u.leaves.len(),
            max: MAX_ATOMS,
        });
    }
    Ok(u.term_of(&u.table(t)))
}

/// Truth of a lattice sentence in the theory of nontrivial atomless Boolean algebras.
pub fn ba_decide(sigma: &Formula) -> Result<bool> {
    let free: Vec<String> = sigma.free_vars().into_keys().collect();
    if !free.is_empty() {
        return Err(BaError::NotSentence(free));
    }
    let phi = rename_apart(sigma);
    let u = Universe::collect(&phi)?;
    let opaque: Vec<String> = u
        .leaves
        .iter()
        .filter_map(|l| match l {
            Leaf::Opaque(t) => Some(t.to_string()),
            Leaf::Var(_) => None,
        })
        .collect();
    if !opaque.is_empty() {
        return Err(BaError::NotSentence(opaque));
    }
    let b = u.convert(&phi, &mut 0);
    Ok(b.as_const().expect("closed formulas reduce to constants"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse;

    fn qe(text: &str) -> String {
        ba_qe(&parse(text).unwrap()).unwrap().to_string()
    }

    fn decide(text: &str) -> bool {
        ba_decide(&parse(text).unwrap()).unwrap()
    }

    #[test]
    fn qe_examples() {
        assert_eq!(qe("exists y:L. y << l & ~(y = bot) & ~(y = l)"), "~(l = bot)");
        assert_eq!(qe("exists y:L. y cap l = bot & y cup l = top"), "true");
        assert_eq!(qe("exists y:L. y = l"), "true");
        assert_eq!(qe("exists y:L. l << y & y << m"), "l cap compl(m) = bot");
        assert_eq!(qe("forall y:L. y << l"), "l = top");
    }

    #[test]
    fn qe_output_has_no_bound_variables() {
        let out = ba_qe(&parse("forall x:L. exists y:L. x cap y = bot & ~(y cap l = bot)").unwrap()).unwrap();
        assert!(out.is_quantifier_free());
        let free = out.free_vars();
        assert!(free.keys().all(|k| k == "l"));
    }

    #[test]
    fn decide_examples() {
        assert!(decide("forall x:L. bot < x -> exists y:L. bot < y & y < x"));
        assert!(!decide("exists x:L. ~(x = bot) & forall y:L. y << x -> y = bot | y = x"));
        assert!(!decide("top = bot"));
        assert!(decide("forall a:L. (a cup compl(a) = top) & (a cap compl(a) = bot)"));
        assert!(decide("forall x:L. ~(compl(compl(x)) = x) -> top = bot"));
    }

    #[test]
    fn opaque_leaves_pass_through() {
        let phi = parse("exists y:L. y << P(a) & ~(y = bot)").unwrap();
        assert_eq!(ba_qe(&phi).unwrap().to_string(), "~(P(a) = bot)");
        assert!(matches!(ba_decide(&phi), Err(BaError::NotSentence(_))));
    }

    #[test]
    fn simplify_examples() {
        let l = |s: &str| crate::syntax::parse_term(s, Sort::L, &Default::default()).unwrap();
        assert_eq!(simplify_term(&l("x cap (x cup y)")).unwrap().to_string(), "x");
        assert_eq!(simplify_term(&l("P(a) cup compl(P(a))")).unwrap(), Term::Top);
        assert_eq!(simplify_term(&l("x cap compl(y) cap y")).unwrap(), Term::Bot);
    }

    #[test]
    fn group_atoms_are_rejected() {
        let phi = parse("exists a:G. 0 <= a").unwrap();
        assert!(matches!(ba_qe(&phi), Err(BaError::NotLatticeSorted(_))));
    }
}
