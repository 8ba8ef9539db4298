//! Elimination of one group quantifier from a lattice-sorted matrix.
//!
//! At each point, the value of `a` sits below every bound, on some bound
//! `b`, or just above `b` and below everything strictly above it. Substituting
//! each such test point into the `P`-leaves gives lattice terms; `a` exists
//! iff the test points can be assigned to regions that cover `⊤` and satisfy
//! every literal.

use super::block::{eliminate_group_var, leaf_bound, PrimitiveBlock};
use super::{Mode, SwError};
use crate::ba::{ba_qe, simplify_term};
use crate::syntax::{primitive_val, Formula, LinearGroupTerm, NameSupply, Sort, Term};

pub(crate) struct Eliminator<'a> {
    pub mode: Mode,
    pub supply: &'a mut NameSupply,
    pub trace: &'a mut Vec<String>,
}

#[derive(Clone, Debug)]
enum Tree {
    Const(bool),
    /// A subformula not mentioning the variable.
    Opaque(Formula),
    /// An atom mentioning the variable, with its polarity.
    Lit(bool, Formula),
    And(Vec<Tree>),
    Or(Vec<Tree>),
}

impl Tree {
    fn has_lits(&self) -> bool {
        match self {
            Tree::Lit(..) => true,
            Tree::And(xs) | Tree::Or(xs) => xs.iter().any(Tree::has_lits),
            _ => false,
        }
    }

    fn to_formula(&self) -> Formula {
        match self {
            Tree::Const(true) => Formula::True,
            Tree::Const(false) => Formula::False,
            Tree::Opaque(f) => f.clone(),
            Tree::Lit(true, f) => f.clone(),
            Tree::Lit(false, f) => Formula::not(f.clone()),
            Tree::And(xs) => fand(xs.iter().map(Tree::to_formula).collect()),
            Tree::Or(xs) => forr(xs.iter().map(Tree::to_formula).collect()),
        }
    }
}

pub(crate) fn formula_mentions(f: &Formula, v: &str) -> bool {
    match f {
        Formula::True | Formula::False => false,
        Formula::Not(a) | Formula::Exists(_, _, a) | Formula::Forall(_, _, a) => {
            formula_mentions(a, v)
        }
        Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
            formula_mentions(a, v) || formula_mentions(b, v)
        }
        atom => {
            let (x, y) = atom.atom_terms().expect("atom");
            x.mentions(v) || y.mentions(v)
        }
    }
}

/// Conjunction with constant folding.
pub(crate) fn fand(items: Vec<Formula>) -> Formula {
    let mut out = Vec::new();
    for f in items {
        match f {
            Formula::True => {}
            Formula::False => return Formula::False,
            f if !out.contains(&f) => out.push(f),
            _ => {}
        }
    }
    Formula::conj(out)
}

/// Disjunction with constant folding.
pub(crate) fn forr(items: Vec<Formula>) -> Formula {
    let mut out = Vec::new();
    for f in items {
        match f {
            Formula::False => {}
            Formula::True => return Formula::True,
            f if !out.contains(&f) => out.push(f),
            _ => {}
        }
    }
    if out.is_empty() {
        Formula::False
    } else {
        Formula::disj(out)
    }
}

/// Negation pushed through constants, double negation and quantifiers.
pub(crate) fn fnot(f: Formula) -> Formula {
    match f {
        Formula::True => Formula::False,
        Formula::False => Formula::True,
        Formula::Not(a) => *a,
        Formula::Exists(v, s, a) => Formula::forall(&v, s, fnot(*a)),
        Formula::Forall(v, s, a) => Formula::exists(&v, s, fnot(*a)),
        f => Formula::not(f),
    }
}

/// `t = ⊥`, folded when `t` is constant.
fn zero(t: &Term) -> Result<Formula, SwError> {
    let t = simplify_term(t)?;
    Ok(match t {
        Term::Bot => Formula::True,
        Term::Top => Formula::False,
        t => {
            let dual = simplify_term(&Term::compl(t.clone()))?;
            if dual.to_string().len() < t.to_string().len() {
                Formula::LEq(dual, Term::Top)
            } else {
                Formula::LEq(t, Term::Bot)
            }
        }
    })
}

fn nonzero(t: &Term) -> Result<Formula, SwError> {
    Ok(fnot(zero(t)?))
}

/// The term that must be `⊥` for the atom to hold.
fn defect(atom: &Formula) -> Term {
    match atom {
        Formula::LBelow(s, r) => Term::lmeet(s.clone(), Term::compl(r.clone())),
        Formula::LEq(s, r) => Term::ljoin(
            Term::lmeet(s.clone(), Term::compl(r.clone())),
            Term::lmeet(Term::compl(s.clone()), r.clone()),
        ),
        _ => unreachable!("lattice atoms only"),
    }
}

fn big_meet(items: impl IntoIterator<Item = Term>) -> Term {
    items.into_iter().reduce(Term::lmeet).unwrap_or(Term::Top)
}

fn big_join(items: impl IntoIterator<Item = Term>) -> Term {
    items.into_iter().reduce(Term::ljoin).unwrap_or(Term::Bot)
}

/// Above this many test-point assignments, witnesses are placed by regions instead.
const MAX_CHOICE_PATTERNS: usize = 16;

/// Largest reduct, in atoms, produced by one elimination.
pub const MAX_REDUCT_ATOMS: usize = 5_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum TestPoint {
    BelowAll,
    At(usize),
    Above(usize),
}

impl Eliminator<'_> {
    /// `∃a body` or `∀a body` without `a`, for a matrix free of group quantifiers.
    pub fn eliminate(&mut self, exists: bool, a: &str, body: &Formula) -> Result<Formula, SwError> {
        if !formula_mentions(body, a) {
            return Ok(body.clone());
        }
        let mut hoisted = Vec::new();
        let tree = self.nnf(body, exists, a, exists, &mut hoisted)?;
        let inner = self.exists_tree(a, tree)?;
        let mut out = hoisted
            .iter()
            .rev()
            .fold(inner, |acc, w| Formula::exists(w, Sort::L, acc));
        if out.atom_count() > MAX_REDUCT_ATOMS {
            return Err(SwError::ResourceLimit(format!(
                "eliminating `{a}` gives {} atoms, at most {MAX_REDUCT_ATOMS} supported",
                out.atom_count()
            )));
        }
        if self.mode == Mode::Ec && !out.is_quantifier_free() {
            out = ba_qe(&out)?;
        }
        if !exists {
            out = fnot(out);
        }
        let q = if exists { "exists" } else { "forall" };
        self.trace.push(format!("eliminate {q} {a}:G -> {out}"));
        Ok(out)
    }

    fn nnf(
        &self,
        f: &Formula,
        pos: bool,
        a: &str,
        outer_exists: bool,
        hoisted: &mut Vec<String>,
    ) -> Result<Tree, SwError> {
        if !formula_mentions(f, a) {
            return Ok(match f {
                Formula::True => Tree::Const(pos),
                Formula::False => Tree::Const(!pos),
                f if pos => Tree::Opaque(f.clone()),
                f => Tree::Opaque(fnot(f.clone())),
            });
        }
        Ok(match f {
            Formula::Not(x) => self.nnf(x, !pos, a, outer_exists, hoisted)?,
            Formula::And(x, y) | Formula::Or(x, y) => {
                let parts = vec![
                    self.nnf(x, pos, a, outer_exists, hoisted)?,
                    self.nnf(y, pos, a, outer_exists, hoisted)?,
                ];
                if matches!(f, Formula::And(..)) == pos {
                    Tree::And(parts)
                } else {
                    Tree::Or(parts)
                }
            }
            Formula::Implies(x, y) => {
                let parts = vec![
                    self.nnf(x, !pos, a, outer_exists, hoisted)?,
                    self.nnf(y, pos, a, outer_exists, hoisted)?,
                ];
                if pos {
                    Tree::Or(parts)
                } else {
                    Tree::And(parts)
                }
            }
            Formula::Exists(w, Sort::L, x) | Formula::Forall(w, Sort::L, x) => {
                let existential = matches!(f, Formula::Exists(..)) == pos;
                if !existential {
                    let q = if matches!(f, Formula::Exists(..)) { "exists" } else { "forall" };
                    let outer = if outer_exists { "exists" } else { "forall" };
                    return Err(SwError::UnsupportedFragment(format!(
                        "`{q} {w}:L` depends on `{a}` and alternates with `{outer} {a}:G`"
                    )));
                }
                hoisted.push(w.clone());
                self.nnf(x, pos, a, outer_exists, hoisted)?
            }
            Formula::LBelow(..) | Formula::LEq(..) => Tree::Lit(pos, f.clone()),
            other => {
                return Err(SwError::NotPrimitive(format!(
                    "`{other}` is not a lattice atom"
                )))
            }
        })
    }

    fn exists_tree(&mut self, a: &str, t: Tree) -> Result<Formula, SwError> {
        if !t.has_lits() {
            return Ok(t.to_formula());
        }
        match t {
            Tree::Or(xs) => {
                let parts = xs
                    .into_iter()
                    .map(|x| self.exists_tree(a, x))
                    .collect::<Result<Vec<_>, _>>()?;
                Ok(forr(parts))
            }
            Tree::And(xs) => {
                let mut flat = Vec::new();
                flatten_and(xs, &mut flat);
                let (dep, indep): (Vec<Tree>, Vec<Tree>) = flat.into_iter().partition(Tree::has_lits);
                let mut out: Vec<Formula> = indep.iter().map(Tree::to_formula).collect();
                if out.contains(&Formula::False) {
                    return Ok(Formula::False);
                }
                match dep.iter().position(|x| matches!(x, Tree::Or(_))) {
                    Some(i) => {
                        let mut others = dep;
                        let Tree::Or(alts) = others.remove(i) else {
                            unreachable!("position found an Or")
                        };
                        let mut parts = Vec::new();
                        for alt in alts {
                            let mut conj = others.clone();
                            conj.push(alt);
                            parts.push(self.exists_tree(a, Tree::And(conj))?);
                        }
                        out.push(forr(parts));
                    }
                    None => {
                        let lits = dep
                            .into_iter()
                            .map(|x| match x {
                                Tree::Lit(p, f) => (p, f),
                                _ => unreachable!("only literals remain"),
                            })
                            .collect::<Vec<_>>();
                        out.push(self.eliminate_literals(a, &lits)?);
                    }
                }
                Ok(fand(out))
            }
            Tree::Lit(p, f) => self.eliminate_literals(a, &[(p, f)]),
            _ => unreachable!("has literals"),
        }
    }

    fn eliminate_literals(&mut self, a: &str, lits: &[(bool, Formula)]) -> Result<Formula, SwError> {
        if lits.iter().all(|(p, _)| *p) {
            let atoms: Vec<Formula> = lits.iter().map(|(_, f)| f.clone()).collect();
            if let Some((block, side)) = PrimitiveBlock::extract(a, &atoms)? {
                let mut out = side;
                out.push(eliminate_group_var(&block)?);
                return Ok(fand(out));
            }
        }
        let e = big_join(lits.iter().filter(|(p, _)| *p).map(|(_, f)| defect(f)));
        let fs: Vec<Term> = lits
            .iter()
            .filter(|(p, _)| !*p)
            .map(|(_, f)| defect(f))
            .collect();

        let mut bounds: Vec<LinearGroupTerm> = Vec::new();
        for t in std::iter::once(&e).chain(&fs) {
            collect_bounds(t, a, &mut bounds)?;
        }
        let mut points = vec![TestPoint::BelowAll];
        for i in 0..bounds.len() {
            points.push(TestPoint::At(i));
            points.push(TestPoint::Above(i));
        }
        let e_at = points
            .iter()
            .map(|&c| substitute(&e, a, c, &bounds))
            .collect::<Result<Vec<_>, _>>()?;

        let mut out = vec![zero(&big_meet(e_at.iter().cloned()))?];
        // room[k][c]: where test point c satisfies the zero part and makes f_k nonempty.
        let mut room = Vec::new();
        for f in &fs {
            let mut row = Vec::new();
            for (c, ec) in points.iter().zip(&e_at) {
                let fc = substitute(f, a, *c, &bounds)?;
                row.push(simplify_term(&Term::lmeet(fc, Term::compl(ec.clone())))?);
            }
            room.push(row);
        }
        match room.len() {
            0 => {}
            1 => out.push(nonzero(&big_join(room[0].iter().cloned()))?),
            _ => out.push(self.separated_witnesses(&room)?),
        }
        Ok(fand(out))
    }

    /// Each `f_k` needs a witness point using some test point `c_k`; witnesses
    /// using different test points must lie in disjoint regions.
    fn separated_witnesses(&mut self, room: &[Vec<Term>]) -> Result<Formula, SwError> {
        let usable: Vec<Vec<usize>> = room
            .iter()
            .map(|row| (0..row.len()).filter(|&c| row[c] != Term::Bot).collect())
            .collect();
        if usable.iter().any(Vec::is_empty) {
            return Ok(Formula::False);
        }
        let patterns = usable.iter().try_fold(1usize, |acc, u| acc.checked_mul(u.len()));
        match patterns {
            Some(p) if p <= MAX_CHOICE_PATTERNS => self.choice_witnesses(room, &usable),
            _ => self.partition_witnesses(room, &usable),
        }
    }

    /// One disjunct per assignment of test points to the `f_k`.
    fn choice_witnesses(&mut self, room: &[Vec<Term>], usable: &[Vec<usize>]) -> Result<Formula, SwError> {
        let mut idx = vec![0usize; usable.len()];
        let mut alternatives = Vec::new();
        loop {
            let choice: Vec<usize> = idx.iter().zip(usable).map(|(&i, u)| u[i]).collect();
            let f = self.witness_pattern(room, &choice)?;
            if !alternatives.contains(&f) {
                alternatives.push(f);
            }
            let mut k = 0;
            loop {
                if k == idx.len() {
                    return Ok(forr(alternatives));
                }
                idx[k] += 1;
                if idx[k] < usable[k].len() {
                    break;
                }
                idx[k] = 0;
                k += 1;
            }
        }
    }

    /// Disjoint regions, one per test point that can host a witness; each
    /// `f_k` must meet its room inside some region. Space outside the regions
    /// is covered by the zero condition, so the regions need not cover `⊤`.
    fn partition_witnesses(&mut self, room: &[Vec<Term>], usable: &[Vec<usize>]) -> Result<Formula, SwError> {
        let mut points: Vec<usize> = usable.iter().flatten().copied().collect();
        points.sort_unstable();
        points.dedup();
        let names: Vec<String> = points.iter().map(|_| self.supply.fresh("z")).collect();
        let region = |c: usize| Term::lvar(&names[points.iter().position(|&p| p == c).expect("listed")]);
        let mut parts = Vec::new();
        for i in 0..names.len() {
            for j in i + 1..names.len() {
                parts.push(Formula::LEq(
                    Term::lmeet(Term::lvar(&names[i]), Term::lvar(&names[j])),
                    Term::Bot,
                ));
            }
        }
        for (k, u) in usable.iter().enumerate() {
            let reach = big_join(u.iter().map(|&c| Term::lmeet(room[k][c].clone(), region(c))));
            parts.push(Formula::not(Formula::LEq(reach, Term::Bot)));
        }
        Ok(names
            .iter()
            .rev()
            .fold(fand(parts), |acc, n| Formula::exists(n, Sort::L, acc)))
    }

    fn witness_pattern(&mut self, room: &[Vec<Term>], choice: &[usize]) -> Result<Formula, SwError> {
        let mut groups: Vec<usize> = Vec::new();
        for &c in choice {
            if !groups.contains(&c) {
                groups.push(c);
            }
        }
        let group_of = |c: usize| groups.iter().position(|&g| g == c).expect("listed");
        if groups.len() == 1 {
            let parts = choice
                .iter()
                .enumerate()
                .map(|(k, &c)| nonzero(&room[k][c]))
                .collect::<Result<Vec<_>, _>>()?;
            return Ok(fand(parts));
        }
        // Regions z_1 .. z_{g-1} pairwise disjoint; the last group gets what is left.
        let names: Vec<String> = (1..groups.len()).map(|_| self.supply.fresh("z")).collect();
        let region = |g: usize| -> Term {
            if g < names.len() {
                Term::lvar(&names[g])
            } else {
                Term::compl(big_join(names.iter().map(|n| Term::lvar(n))))
            }
        };
        let mut parts = Vec::new();
        for i in 0..names.len() {
            for j in i + 1..names.len() {
                parts.push(Formula::LEq(
                    Term::lmeet(Term::lvar(&names[i]), Term::lvar(&names[j])),
                    Term::Bot,
                ));
            }
        }
        for (k, &c) in choice.iter().enumerate() {
            let t = Term::lmeet(room[k][c].clone(), region(group_of(c)));
            parts.push(Formula::not(Formula::LEq(t, Term::Bot)));
        }
        Ok(names
            .iter()
            .rev()
            .fold(fand(parts), |acc, n| Formula::exists(n, Sort::L, acc)))
    }
}

fn flatten_and(xs: Vec<Tree>, out: &mut Vec<Tree>) {
    for x in xs {
        match x {
            Tree::And(ys) => flatten_and(ys, out),
            Tree::Const(true) => {}
            x => out.push(x),
        }
    }
}

fn collect_bounds(t: &Term, a: &str, out: &mut Vec<LinearGroupTerm>) -> Result<(), SwError> {
    if let Some(lb) = leaf_bound(t, a)? {
        if !out.contains(&lb.bound) {
            out.push(lb.bound);
        }
        return Ok(());
    }
    for c in t.children() {
        if c.sort().ok() == Some(Sort::L) {
            collect_bounds(c, a, out)?;
        }
    }
    Ok(())
}

fn substitute(t: &Term, a: &str, c: TestPoint, bounds: &[LinearGroupTerm]) -> Result<Term, SwError> {
    let out = match t {
        Term::Val(_) => match leaf_bound(t, a)? {
            None => t.clone(),
            Some(lb) => match c {
                TestPoint::BelowAll if lb.lower => Term::Bot,
                TestPoint::BelowAll => Term::Top,
                TestPoint::At(i) | TestPoint::Above(i) if lb.lower => {
                    primitive_val(&bounds[i].sub(&lb.bound))
                }
                TestPoint::At(i) => primitive_val(&lb.bound.sub(&bounds[i])),
                TestPoint::Above(i) => Term::lmeet(
                    primitive_val(&lb.bound.sub(&bounds[i])),
                    Term::compl(primitive_val(&bounds[i].sub(&lb.bound))),
                ),
            },
        },
        Term::LMeet(x, y) => Term::lmeet(substitute(x, a, c, bounds)?, substitute(y, a, c, bounds)?),
        Term::LJoin(x, y) => Term::ljoin(substitute(x, a, c, bounds)?, substitute(y, a, c, bounds)?),
        Term::Compl(x) => Term::compl(substitute(x, a, c, bounds)?),
        other => other.clone(),
    };
    Ok(simplify_term(&out)?)
}
