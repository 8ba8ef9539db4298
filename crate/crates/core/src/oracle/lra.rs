//! Linear rational arithmetic: constraints, negation-normal formulas over
//! them, and Fourier–Motzkin elimination.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::rational::Rational;

pub type Var = usize;

/// `Σ c_v·v + constant`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct LinExpr {
    pub coeffs: BTreeMap<Var, Rational>,
    pub constant: Rational,
}

impl LinExpr {
    pub fn constant(c: Rational) -> Self {
        LinExpr {
            coeffs: BTreeMap::new(),
            constant: c,
        }
    }

    pub fn var(v: Var) -> Self {
        let mut coeffs = BTreeMap::new();
        coeffs.insert(v, Rational::one());
        LinExpr {
            coeffs,
            constant: Rational::zero(),
        }
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn coeff(&self, v: Var) -> Rational {
        self.coeffs.get(&v).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn add(&self, other: &LinExpr) -> LinExpr {
        let mut out = self.clone();
        for (v, c) in &other.coeffs {
            let e = out.coeffs.entry(*v).or_insert_with(Rational::zero);
            *e = &*e + c;
            if e.is_zero() {
                out.coeffs.remove(v);
            }
        }
        out.constant = &out.constant + &other.constant;
        out
    }

    pub fn scale(&self, q: &Rational) -> LinExpr {
        if q.is_zero() {
            return LinExpr::default();
        }
        LinExpr {
            coeffs: self.coeffs.iter().map(|(v, c)| (*v, c * q)).collect(),
            constant: &self.constant * q,
        }
    }

    pub fn neg(&self) -> LinExpr {
        self.scale(&-Rational::one())
    }

    pub fn sub(&self, other: &LinExpr) -> LinExpr {
        self.add(&other.neg())
    }

    /// Replaces `v` by `by`.
    pub fn substitute(&self, v: Var, by: &LinExpr) -> LinExpr {
        let c = self.coeff(v);
        if c.is_zero() {
            return self.clone();
        }
        let mut rest = self.clone();
        rest.coeffs.remove(&v);
        rest.add(&by.scale(&c))
    }

    pub fn eval(&self, values: &BTreeMap<Var, Rational>) -> Option<Rational> {
        let mut acc = self.constant.clone();
        for (v, c) in &self.coeffs {
            acc = acc + values.get(v)? * c;
        }
        Some(acc)
    }
}

impl fmt::Debug for LinExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (v, c) in &self.coeffs {
            write!(f, "{c}·x{v} + ")?;
        }
        write!(f, "{}", self.constant)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Rel {
    Ge,
    Gt,
    Eq,
}

/// `expr rel 0`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LinConstraint {
    pub expr: LinExpr,
    pub rel: Rel,
}

impl fmt::Debug for LinConstraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let r = match self.rel {
            Rel::Ge => ">=",
            Rel::Gt => ">",
            Rel::Eq => "=",
        };
        write!(f, "{:?} {r} 0", self.expr)
    }
}

impl LinConstraint {
    pub fn new(expr: LinExpr, rel: Rel) -> Self {
        LinConstraint { expr, rel }.normalized()
    }

    // Scales so the first coefficient has absolute value 1 (and is positive for equalities).
    fn normalized(self) -> Self {
        let Some(first) = self.expr.coeffs.values().next().cloned() else {
            return self;
        };
        let mut factor = first.abs().recip();
        if self.rel == Rel::Eq && first.is_negative() {
            factor = -factor;
        }
        LinConstraint {
            expr: self.expr.scale(&factor),
            rel: self.rel,
        }
    }

    /// Truth value when no variables are left.
    pub fn constant_truth(&self) -> Option<bool> {
        if !self.expr.is_constant() {
            return None;
        }
        let c = &self.expr.constant;
        Some(match self.rel {
            Rel::Ge => !c.is_negative(),
            Rel::Gt => c.is_positive(),
            Rel::Eq => c.is_zero(),
        })
    }

    pub fn holds(&self, values: &BTreeMap<Var, Rational>) -> Option<bool> {
        let v = self.expr.eval(values)?;
        Some(match self.rel {
            Rel::Ge => !v.is_negative(),
            Rel::Gt => v.is_positive(),
            Rel::Eq => v.is_zero(),
        })
    }

    pub fn mentions(&self, v: Var) -> bool {
        self.expr.coeffs.contains_key(&v)
    }

    pub fn substitute(&self, v: Var, by: &LinExpr) -> LinConstraint {
        LinConstraint::new(self.expr.substitute(v, by), self.rel)
    }
}

/// Negation-normal Boolean combinations of constraints.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub enum LinFormula {
    Const(bool),
    Atom(LinConstraint),
    And(Vec<LinFormula>),
    Or(Vec<LinFormula>),
}

impl LinFormula {
    pub fn atom(expr: LinExpr, rel: Rel) -> LinFormula {
        let c = LinConstraint::new(expr, rel);
        match c.constant_truth() {
            Some(b) => LinFormula::Const(b),
            None => LinFormula::Atom(c),
        }
    }

    pub fn and(items: impl IntoIterator<Item = LinFormula>) -> LinFormula {
        let mut out = BTreeSet::new();
        for f in items {
            match f {
                LinFormula::Const(true) => {}
                LinFormula::Const(false) => return LinFormula::Const(false),
                LinFormula::And(inner) => out.extend(inner),
                f => {
                    out.insert(f);
                }
            }
        }
        match out.len() {
            0 => LinFormula::Const(true),
            1 => out.into_iter().next().expect("one item"),
            _ => LinFormula::And(out.into_iter().collect()),
        }
    }

    pub fn or(items: impl IntoIterator<Item = LinFormula>) -> LinFormula {
        let mut out = BTreeSet::new();
        for f in items {
            match f {
                LinFormula::Const(false) => {}
                LinFormula::Const(true) => return LinFormula::Const(true),
                LinFormula::Or(inner) => out.extend(inner),
                f => {
                    out.insert(f);
                }
            }
        }
        match out.len() {
            0 => LinFormula::Const(false),
            1 => out.into_iter().next().expect("one item"),
            _ => LinFormula::Or(out.into_iter().collect()),
        }
    }

    pub fn negate(&self) -> LinFormula {
        match self {
            LinFormula::Const(b) => LinFormula::Const(!b),
            LinFormula::Atom(c) => match c.rel {
                Rel::Ge => LinFormula::atom(c.expr.neg(), Rel::Gt),
                Rel::Gt => LinFormula::atom(c.expr.neg(), Rel::Ge),
                Rel::Eq => LinFormula::or([
                    LinFormula::atom(c.expr.clone(), Rel::Gt),
                    LinFormula::atom(c.expr.neg(), Rel::Gt),
                ]),
            },
            LinFormula::And(items) => LinFormula::or(items.iter().map(LinFormula::negate)),
            LinFormula::Or(items) => LinFormula::and(items.iter().map(LinFormula::negate)),
        }
    }

    pub fn as_const(&self) -> Option<bool> {
        match self {
            LinFormula::Const(b) => Some(*b),
            _ => None,
        }
    }

    pub fn vars(&self) -> BTreeSet<Var> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut BTreeSet<Var>) {
        match self {
            LinFormula::Const(_) => {}
            LinFormula::Atom(c) => out.extend(c.expr.coeffs.keys().copied()),
            LinFormula::And(items) | LinFormula::Or(items) => {
                items.iter().for_each(|f| f.collect_vars(out))
            }
        }
    }

    fn mentions_any(&self, vars: &BTreeSet<Var>) -> bool {
        match self {
            LinFormula::Const(_) => false,
            LinFormula::Atom(c) => c.expr.coeffs.keys().any(|v| vars.contains(v)),
            LinFormula::And(items) | LinFormula::Or(items) => {
                items.iter().any(|f| f.mentions_any(vars))
            }
        }
    }

    pub fn eval(&self, values: &BTreeMap<Var, Rational>) -> Option<bool> {
        Some(match self {
            LinFormula::Const(b) => *b,
            LinFormula::Atom(c) => c.holds(values)?,
            LinFormula::And(items) => {
                for f in items {
                    if !f.eval(values)? {
                        return Some(false);
                    }
                }
                true
            }
            LinFormula::Or(items) => {
                for f in items {
                    if f.eval(values)? {
                        return Some(true);
                    }
                }
                false
            }
        })
    }

    pub fn from_dnf(dnf: &[Vec<LinConstraint>]) -> LinFormula {
        LinFormula::or(dnf.iter().map(|conj| {
            LinFormula::and(conj.iter().map(|c| LinFormula::atom(c.expr.clone(), c.rel)))
        }))
    }
}

/// Eliminates `var` from one conjunction; `None` when it is unsatisfiable.
fn fm_conj(var: Var, conj: &[LinConstraint]) -> Option<Vec<LinConstraint>> {
    let mut keep = BTreeSet::new();
    let push = |keep: &mut BTreeSet<LinConstraint>, c: LinConstraint| -> Option<()> {
        match c.constant_truth() {
            Some(false) => None,
            Some(true) => Some(()),
            None => {
                keep.insert(c);
                Some(())
            }
        }
    };
    if let Some(eq) = conj.iter().find(|c| c.rel == Rel::Eq && c.mentions(var)) {
        // c·x + e = 0 gives x = -e/c.
        let c = eq.expr.coeff(var);
        let mut rest = eq.expr.clone();
        rest.coeffs.remove(&var);
        let solution = rest.scale(&-c.recip());
        for other in conj {
            if std::ptr::eq(other, eq) {
                continue;
            }
            push(&mut keep, other.substitute(var, &solution))?;
        }
        return Some(keep.into_iter().collect());
    }
    let mut lowers = Vec::new();
    let mut uppers = Vec::new();
    for c in conj {
        let a = c.expr.coeff(var);
        if a.is_zero() {
            push(&mut keep, c.clone())?;
            continue;
        }
        let mut rest = c.expr.clone();
        rest.coeffs.remove(&var);
        let strict = c.rel == Rel::Gt;
        if a.is_positive() {
            // x >= -rest/a
            lowers.push((rest.scale(&-a.recip()), strict));
        } else {
            // x <= rest/|a|
            uppers.push((rest.scale(&a.abs().recip()), strict));
        }
    }
    for (l, sl) in &lowers {
        for (u, su) in &uppers {
            let rel = if *sl || *su { Rel::Gt } else { Rel::Ge };
            push(&mut keep, LinConstraint::new(u.sub(l), rel))?;
        }
    }
    Some(keep.into_iter().collect())
}

/// Fourier–Motzkin elimination of `var` from a formula in disjunctive normal form.
pub fn fm_eliminate(var: Var, dnf: &[Vec<LinConstraint>]) -> Vec<Vec<LinConstraint>> {
    let mut out: Vec<Vec<LinConstraint>> = dnf.iter().filter_map(|c| fm_conj(var, c)).collect();
    out.sort();
    out.dedup();
    out
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BudgetExceeded;

/// Counts case splits so that runaway eliminations stop instead of hanging.
pub struct Budget {
    remaining: u64,
}

impl Budget {
    pub fn new(limit: u64) -> Self {
        Budget { remaining: limit }
    }

    fn tick(&mut self) -> Result<(), BudgetExceeded> {
        if self.remaining == 0 {
            return Err(BudgetExceeded);
        }
        self.remaining -= 1;
        Ok(())
    }
}

/// `∃ vars. f`, as an equivalent formula over the remaining variables.
///
/// Disjunctions distribute the quantifier, conjunctions are split into
/// independent groups of variables, and only a pure conjunction of
/// constraints is handed to Fourier–Motzkin.
pub fn exists_vars(
    vars: &BTreeSet<Var>,
    f: &LinFormula,
    budget: &mut Budget,
) -> Result<LinFormula, BudgetExceeded> {
    budget.tick()?;
    if !f.mentions_any(vars) {
        return Ok(f.clone());
    }
    match f {
        LinFormula::Const(_) => Ok(f.clone()),
        LinFormula::Or(items) => {
            let mut out = Vec::new();
            for g in items {
                let r = exists_vars(vars, g, budget)?;
                if r == LinFormula::Const(true) {
                    return Ok(r);
                }
                out.push(r);
            }
            Ok(LinFormula::or(out))
        }
        LinFormula::Atom(_) => exists_conj(vars, vec![f.clone()], budget),
        LinFormula::And(items) => exists_conj(vars, items.clone(), budget),
    }
}

fn exists_conj(
    vars: &BTreeSet<Var>,
    items: Vec<LinFormula>,
    budget: &mut Budget,
) -> Result<LinFormula, BudgetExceeded> {
    let (inside, outside): (Vec<_>, Vec<_>) = items.into_iter().partition(|g| g.mentions_any(vars));
    let groups = components(vars, inside);
    let mut out = outside;
    if groups.len() > 1 {
        for g in groups {
            let r = exists_vars(vars, &LinFormula::and(g), budget)?;
            if r == LinFormula::Const(false) {
                return Ok(r);
            }
            out.push(r);
        }
        return Ok(LinFormula::and(out));
    }
    let group = groups.into_iter().next().unwrap_or_default();
    let split_at = group
        .iter()
        .enumerate()
        .filter_map(|(i, g)| match g {
            LinFormula::Or(d) => Some((d.len(), i)),
            _ => None,
        })
        .min();
    let r = match split_at {
        None => {
            let mut conj: Vec<LinConstraint> = group
                .into_iter()
                .map(|g| match g {
                    LinFormula::Atom(c) => c,
                    other => unreachable!("flattened conjunction holds atoms only: {other:?}"),
                })
                .collect();
            for v in vars {
                match fm_conj(*v, &conj) {
                    Some(next) => conj = next,
                    None => return Ok(LinFormula::Const(false)),
                }
            }
            LinFormula::and(conj.into_iter().map(LinFormula::Atom))
        }
        Some((_, i)) => {
            let mut rest = group;
            let LinFormula::Or(disjuncts) = rest.swap_remove(i) else {
                unreachable!("picked a disjunction")
            };
            let mut cases = Vec::new();
            for d in disjuncts {
                let case = LinFormula::and(rest.iter().cloned().chain([d]));
                let r = exists_vars(vars, &case, budget)?;
                if r == LinFormula::Const(true) {
                    cases = vec![r];
                    break;
                }
                cases.push(r);
            }
            LinFormula::or(cases)
        }
    };
    out.push(r);
    Ok(LinFormula::and(out))
}

// Groups conjuncts that share eliminated variables.
fn components(vars: &BTreeSet<Var>, items: Vec<LinFormula>) -> Vec<Vec<LinFormula>> {
    let var_sets: Vec<BTreeSet<Var>> = items
        .iter()
        .map(|g| g.vars().intersection(vars).copied().collect())
        .collect();
    let mut parent: Vec<usize> = (0..items.len()).collect();
    fn find(p: &mut [usize], i: usize) -> usize {
        let mut r = i;
        while p[r] != r {
            r = p[r];
        }
        p[i] = r;
        r
    }
    for i in 0..items.len() {
        for j in (i + 1)..items.len() {
            if !var_sets[i].is_disjoint(&var_sets[j]) {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                parent[a] = b;
            }
        }
    }
    let mut groups: BTreeMap<usize, Vec<LinFormula>> = BTreeMap::new();
    for (i, g) in items.into_iter().enumerate() {
        let r = find(&mut parent, i);
        groups.entry(r).or_default().push(g);
    }
    groups.into_values().collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q;

    fn expr(coeffs: &[(Var, i64)], c: i64) -> LinExpr {
        LinExpr {
            coeffs: coeffs.iter().map(|(v, k)| (*v, q(*k, 1))).collect(),
            constant: q(c, 1),
        }
        .add(&LinExpr::default())
    }

    fn ge(coeffs: &[(Var, i64)], c: i64) -> LinConstraint {
        LinConstraint::new(expr(coeffs, c), Rel::Ge)
    }

    const X: Var = 0;
    const Y: Var = 1;
    const Z: Var = 2;

    #[test]
    fn interval_nonemptiness() {
        // x - y >= 0, z - x >= 0
        let out = fm_eliminate(X, &[vec![ge(&[(X, 1), (Y, -1)], 0), ge(&[(Z, 1), (X, -1)], 0)]]);
        assert_eq!(out, vec![vec![ge(&[(Y, -1), (Z, 1)], 0)]]);
    }

    #[test]
    fn unbounded_is_true() {
        let out = fm_eliminate(X, &[vec![LinConstraint::new(expr(&[(X, 1)], 0), Rel::Gt)]]);
        assert_eq!(out, vec![vec![]]);
        assert_eq!(LinFormula::from_dnf(&out), LinFormula::Const(true));
    }

    #[test]
    fn scaled_bounds() {
        // y - 2x >= 0, 3x - z >= 0  ->  3y - 2z >= 0
        let out = fm_eliminate(X, &[vec![ge(&[(X, -2), (Y, 1)], 0), ge(&[(X, 3), (Z, -1)], 0)]]);
        assert_eq!(out, vec![vec![ge(&[(Y, 3), (Z, -2)], 0)]]);
        for y in -2..=2 {
            for z in -2..=2 {
                let exists = (-32..=32).any(|k| {
                    let x = q(k, 8);
                    q(y, 1) - q(2, 1) * &x >= q(0, 1) && q(3, 1) * &x - q(z, 1) >= q(0, 1)
                });
                assert_eq!(exists, 3 * y >= 2 * z, "y={y} z={z}");
            }
        }
    }

    #[test]
    fn equalities_substitute() {
        // x - y = 0, x > 2  ->  y > 2
        let eq = LinConstraint::new(expr(&[(X, 1), (Y, -1)], 0), Rel::Eq);
        let gt = LinConstraint::new(expr(&[(X, 1)], -2), Rel::Gt);
        let out = fm_eliminate(X, &[vec![eq, gt]]);
        assert_eq!(out, vec![vec![LinConstraint::new(expr(&[(Y, 1)], -2), Rel::Gt)]]);
    }

    #[test]
    fn strictness_is_ored() {
        // x > 1 and 1 >= x is infeasible; x >= 1 and 1 >= x is not.
        let a = LinConstraint::new(expr(&[(X, 1)], -1), Rel::Gt);
        let b = ge(&[(X, -1)], 1);
        assert!(fm_eliminate(X, &[vec![a, b.clone()]]).is_empty());
        assert_eq!(fm_eliminate(X, &[vec![ge(&[(X, 1)], -1), b]]), vec![vec![]]);
    }

    #[test]
    fn exists_splits_and_distributes() {
        let vars: BTreeSet<Var> = [X, Z].into();
        // (x > 0 | x < -y) & (z = y)
        let f = LinFormula::and([
            LinFormula::or([
                LinFormula::atom(expr(&[(X, 1)], 0), Rel::Gt),
                LinFormula::atom(expr(&[(X, -1), (Y, -1)], 0), Rel::Gt),
            ]),
            LinFormula::atom(expr(&[(Z, 1), (Y, -1)], 0), Rel::Eq),
        ]);
        let r = exists_vars(&vars, &f, &mut Budget::new(1000)).unwrap();
        assert_eq!(r, LinFormula::Const(true));
    }
}
