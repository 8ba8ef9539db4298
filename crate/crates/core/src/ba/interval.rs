//! The algebra of finite unions of half-open rational intervals in `[0, 1)`,
//! and a bounded checker for lattice sentences in it.

use std::fmt;

use super::{BaError, Result, MAX_CHECK_DEPTH};
use crate::rational::{q, Rational};
use crate::syntax::{Formula, Sort, Term};

/// A finite union of intervals `[p, q)`, sorted, disjoint and non-adjacent.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct IntervalAlgebraElem {
    intervals: Vec<(Rational, Rational)>,
}

impl IntervalAlgebraElem {
    /// Canonicalizes: drops empty pieces, merges overlapping and adjacent ones.
    /// Endpoints are clamped to `[0, 1]`.
    pub fn new(pieces: impl IntoIterator<Item = (Rational, Rational)>) -> Self {
        let clamp = |x: Rational| {
            if x.is_negative() {
                Rational::zero()
            } else if x > Rational::one() {
                Rational::one()
            } else {
                x
            }
        };
        let mut ps: Vec<(Rational, Rational)> = pieces
            .into_iter()
            .map(|(p, q)| (clamp(p), clamp(q)))
            .filter(|(p, q)| p < q)
            .collect();
        ps.sort();
        let mut out: Vec<(Rational, Rational)> = Vec::new();
        for (p, q) in ps {
            match out.last_mut() {
                Some(last) if p <= last.1 => {
                    if q > last.1 {
                        last.1 = q;
                    }
                }
                _ => out.push((p, q)),
            }
        }
        IntervalAlgebraElem { intervals: out }
    }

    pub fn bot() -> Self {
        IntervalAlgebraElem { intervals: vec![] }
    }

    pub fn top() -> Self {
        IntervalAlgebraElem {
            intervals: vec![(Rational::zero(), Rational::one())],
        }
    }

    pub fn intervals(&self) -> &[(Rational, Rational)] {
        &self.intervals
    }

    pub fn is_bot(&self) -> bool {
        self.intervals.is_empty()
    }

    pub fn is_top(&self) -> bool {
        *self == Self::top()
    }

    pub fn meet(&self, o: &Self) -> Self {
        let mut out = Vec::new();
        for (a, b) in &self.intervals {
            for (c, d) in &o.intervals {
                let lo = if a > c { a } else { c };
                let hi = if b < d { b } else { d };
                if lo < hi {
                    out.push((lo.clone(), hi.clone()));
                }
            }
        }
        Self::new(out)
    }

    pub fn join(&self, o: &Self) -> Self {
        Self::new(self.intervals.iter().chain(&o.intervals).cloned())
    }

    pub fn complement(&self) -> Self {
        let mut out = Vec::new();
        let mut at = Rational::zero();
        for (p, q) in &self.intervals {
            out.push((at, p.clone()));
            at = q.clone();
        }
        out.push((at, Rational::one()));
        Self::new(out)
    }

    pub fn below(&self, o: &Self) -> bool {
        self.meet(&o.complement()).is_bot()
    }

    /// The lower half of the first interval; `⊥` for `⊥`.
    pub fn proper_half(&self) -> Self {
        match self.intervals.first() {
            None => Self::bot(),
            Some((lo, hi)) => {
                let mid = (lo + hi) * q(1, 2);
                Self::new([(lo.clone(), mid)])
            }
        }
    }
}

impl fmt::Display for IntervalAlgebraElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_bot() {
            return write!(f, "{{}}");
        }
        let parts: Vec<String> = self
            .intervals
            .iter()
            .map(|(p, q)| format!("[{p}, {q})"))
            .collect();
        write!(f, "{}", parts.join(" u "))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum MintermState {
    ForcedEmpty,
    ForcedNonempty,
    Free,
}

/// Emptiness of each of the `2^m` minterms over `m` lattice variables.
/// Minterm `i` takes variable `j` positively when bit `j` of `i` is set.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct MintermStatus {
    variables: Vec<String>,
    status: Vec<MintermState>,
}

impl MintermStatus {
    pub fn all_free(variables: Vec<String>) -> Self {
        let status = vec![MintermState::Free; 1 << variables.len()];
        MintermStatus { variables, status }
    }

    /// The pattern realized by a concrete tuple.
    pub fn of_tuple(variables: Vec<String>, values: &[IntervalAlgebraElem]) -> Self {
        assert_eq!(variables.len(), values.len(), "one value per variable");
        let status = minterms(values)
            .iter()
            .map(|m| {
                if m.is_bot() {
                    MintermState::ForcedEmpty
                } else {
                    MintermState::ForcedNonempty
                }
            })
            .collect();
        MintermStatus { variables, status }
    }

    pub fn variables(&self) -> &[String] {
        &self.variables
    }

    pub fn status(&self) -> &[MintermState] {
        &self.status
    }

    pub fn set(&mut self, minterm: usize, state: MintermState) {
        self.status[minterm] = state;
    }

    /// Whether some tuple in a nontrivial atomless algebra realizes the pattern.
    /// Minterms partition `⊤ ≠ ⊥`, so at least one must be nonempty.
    pub fn is_realizable(&self) -> bool {
        self.status.iter().any(|s| *s != MintermState::ForcedEmpty)
    }
}

/// The `2^m` minterms of a tuple, indexed as in [`MintermStatus`].
fn minterms(values: &[IntervalAlgebraElem]) -> Vec<IntervalAlgebraElem> {
    let comps: Vec<IntervalAlgebraElem> = values.iter().map(|v| v.complement()).collect();
    (0..1usize << values.len())
        .map(|i| {
            (0..values.len()).fold(IntervalAlgebraElem::top(), |acc, j| {
                acc.meet(if i >> j & 1 == 1 { &values[j] } else { &comps[j] })
            })
        })
        .collect()
}

/// Truth of a lattice sentence in the interval algebra. Each quantifier
/// ranges over the `3^r` elements that take, inside each of the `r`
/// nonempty minterms of the variables in scope, nothing, its proper half,
/// or all of it.
pub fn interval_check(sigma: &Formula, depth: usize) -> Result<bool> {
    if depth > MAX_CHECK_DEPTH {
        return Err(BaError::DepthExceeded {
            depth,
            max: MAX_CHECK_DEPTH,
        });
    }
    let d = sigma.quantifier_depth();
    if d > depth {
        return Err(BaError::DepthExceeded { depth: d, max: depth });
    }
    let free: Vec<String> = sigma.free_vars().into_keys().collect();
    if !free.is_empty() {
        return Err(BaError::NotSentence(free));
    }
    check_lattice_only(sigma)?;
    let mut env = Vec::new();
    Ok(eval(sigma, &mut env))
}

fn check_lattice_only(phi: &Formula) -> Result<()> {
    let mut bad = None;
    phi.visit(&mut |f| match f {
        Formula::GLeq(..) | Formula::GEq(..) | Formula::Exists(_, Sort::G, _) | Formula::Forall(_, Sort::G, _) => {
            bad.get_or_insert_with(|| f.to_string());
        }
        Formula::LBelow(a, b) | Formula::LEq(a, b) => {
            for t in [a, b] {
                if has_val(t) {
                    bad.get_or_insert_with(|| t.to_string());
                }
            }
        }
        _ => {}
    });
    match bad {
        Some(s) => Err(BaError::NotLatticeSorted(s)),
        None => Ok(()),
    }
}

fn has_val(t: &Term) -> bool {
    matches!(t, Term::Val(_)) || t.children().into_iter().any(has_val)
}

type Env = Vec<(String, IntervalAlgebraElem)>;

fn value(t: &Term, env: &Env) -> IntervalAlgebraElem {
    match t {
        Term::LVar(v) => env
            .iter()
            .rev()
            .find(|(k, _)| k == v)
            .map(|(_, x)| x.clone())
            .expect("sentence"),
        Term::Bot => IntervalAlgebraElem::bot(),
        Term::Top => IntervalAlgebraElem::top(),
        Term::LMeet(a, b) => value(a, env).meet(&value(b, env)),
        Term::LJoin(a, b) => value(a, env).join(&value(b, env)),
        Term::Compl(a) => value(a, env).complement(),
        _ => unreachable!("lattice terms only"),
    }
}

fn candidates(env: &Env) -> Vec<IntervalAlgebraElem> {
    let values: Vec<IntervalAlgebraElem> = env.iter().map(|(_, v)| v.clone()).collect();
    let pieces: Vec<IntervalAlgebraElem> = minterms(&values).into_iter().filter(|m| !m.is_bot()).collect();
    let mut out = Vec::new();
    let total = 3usize.pow(pieces.len() as u32);
    for code in 0..total {
        let mut c = code;
        let mut acc = IntervalAlgebraElem::bot();
        for p in &pieces {
            match c % 3 {
                0 => {}
                1 => acc = acc.join(&p.proper_half()),
                _ => acc = acc.join(p),
            }
            c /= 3;
        }
        out.push(acc);
    }
    out
}

fn eval(phi: &Formula, env: &mut Env) -> bool {
    match phi {
        Formula::True => true,
        Formula::False => false,
        Formula::Not(a) => !eval(a, env),
        Formula::And(a, b) => eval(a, env) && eval(b, env),
        Formula::Or(a, b) => eval(a, env) || eval(b, env),
        Formula::Implies(a, b) => !eval(a, env) || eval(b, env),
        Formula::LBelow(a, b) => value(a, env).below(&value(b, env)),
        Formula::LEq(a, b) => value(a, env) == value(b, env),
        Formula::Exists(v, _, body) | Formula::Forall(v, _, body) => {
            let want = matches!(phi, Formula::Exists(..));
            for c in candidates(env) {
                env.push((v.clone(), c));
                let r = eval(body, env);
                env.pop();
                if r == want {
                    return want;
                }
            }
            !want
        }
        _ => unreachable!("lattice formulas only"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse;

    fn iv(pairs: &[(i64, i64, i64, i64)]) -> IntervalAlgebraElem {
        IntervalAlgebraElem::new(pairs.iter().map(|&(a, b, c, d)| (q(a, b), q(c, d))))
    }

    #[test]
    fn canonical_form() {
        let x = iv(&[(1, 2, 1, 1), (0, 1, 1, 4), (1, 4, 1, 2)]);
        assert!(x.is_top());
        let y = iv(&[(1, 4, 1, 2), (0, 1, 1, 8)]);
        assert_eq!(y.intervals()[0], (q(0, 1), q(1, 8)));
        assert_eq!(y.complement(), iv(&[(1, 8, 1, 4), (1, 2, 1, 1)]));
        assert_eq!(y.meet(&y.complement()), IntervalAlgebraElem::bot());
        assert_eq!(y.join(&y.complement()), IntervalAlgebraElem::top());
        assert_eq!(y.proper_half(), iv(&[(0, 1, 1, 16)]));
        assert!(y.proper_half().below(&y));
    }

    #[test]
    fn check_examples() {
        let s = parse("forall x:L. bot < x -> exists y:L. bot < y & y < x").unwrap();
        assert!(interval_check(&s, 2).unwrap());
        let s = parse("exists x:L. x cap compl(x) = bot").unwrap();
        assert!(interval_check(&s, 1).unwrap());
        let s = parse("forall x:L. x = bot | x = top").unwrap();
        assert!(!interval_check(&s, 1).unwrap());
        assert!(matches!(interval_check(&s, 5), Err(BaError::DepthExceeded { .. })));
        let s = parse("forall x:L. exists y:L. y << x").unwrap();
        assert!(matches!(interval_check(&s, 1), Err(BaError::DepthExceeded { .. })));
    }

    #[test]
    fn minterm_patterns() {
        let a = iv(&[(0, 1, 1, 2)]);
        let st = MintermStatus::of_tuple(vec!["a".into(), "b".into()], &[a.clone(), a.complement()]);
        use MintermState::*;
        assert_eq!(st.status(), &[ForcedEmpty, ForcedNonempty, ForcedNonempty, ForcedEmpty]);
        assert!(st.is_realizable());
        let mut none = MintermStatus::all_free(vec!["a".into()]);
        none.set(0, ForcedEmpty);
        none.set(1, ForcedEmpty);
        assert!(!none.is_realizable());
    }
}
