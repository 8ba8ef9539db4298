//! Rewrites toward the lattice-only form used by the elimination engines.

use std::collections::BTreeSet;

use super::normal::NameSupply;
use super::{bx, Formula, LinearGroupTerm, Sort, SortError, Term};
use crate::rational::Rational;

/// `⋁_i ⋀_j ℓ_ij`, each inner list a meet of linear terms.
pub type JoinOfMeets = Vec<Vec<LinearGroupTerm>>;

fn tidy(jm: JoinOfMeets) -> JoinOfMeets {
    let set: BTreeSet<Vec<LinearGroupTerm>> = jm
        .into_iter()
        .map(|m| {
            let s: BTreeSet<LinearGroupTerm> = m.into_iter().collect();
            s.into_iter().collect()
        })
        .collect();
    set.into_iter().collect()
}

fn jm_add(a: &JoinOfMeets, b: &JoinOfMeets) -> JoinOfMeets {
    let mut out = Vec::new();
    for ma in a {
        for mb in b {
            let mut m = Vec::new();
            for x in ma {
                for y in mb {
                    m.push(x.add(y));
                }
            }
            out.push(m);
        }
    }
    tidy(out)
}

fn jm_scale(a: &JoinOfMeets, q: &Rational) -> JoinOfMeets {
    tidy(
        a.iter()
            .map(|m| m.iter().map(|x| x.scale(q)).collect())
            .collect(),
    )
}

// -(⋁_i ⋀_j a_ij) = ⋀_i ⋁_j -a_ij, distributed back into join-of-meets form.
fn jm_neg(a: &JoinOfMeets) -> JoinOfMeets {
    let mut out: JoinOfMeets = vec![vec![]];
    for meet in a {
        let mut next = Vec::new();
        for partial in &out {
            for x in meet {
                let mut p = partial.clone();
                p.push(x.neg());
                next.push(p);
            }
        }
        out = tidy(next);
    }
    out
}

fn jm_meet(a: &JoinOfMeets, b: &JoinOfMeets) -> JoinOfMeets {
    let mut out = Vec::new();
    for ma in a {
        for mb in b {
            out.push(ma.iter().chain(mb).cloned().collect());
        }
    }
    tidy(out)
}

fn jm_join(a: &JoinOfMeets, b: &JoinOfMeets) -> JoinOfMeets {
    tidy(a.iter().chain(b).cloned().collect())
}

/// Rewrites a group term into a join of meets of linear terms.
pub fn linearize_group_term(t: &Term) -> Result<JoinOfMeets, SortError> {
    if t.sort()? != Sort::G {
        return Err(SortError {
            subterm: t.to_string(),
            message: "expected a group term".into(),
        });
    }
    Ok(linearize(t))
}

fn linearize(t: &Term) -> JoinOfMeets {
    match t {
        Term::GVar(v) => vec![vec![LinearGroupTerm::var(v)]],
        Term::Zero => vec![vec![LinearGroupTerm::zero()]],
        Term::Add(a, b) => jm_add(&linearize(a), &linearize(b)),
        Term::Neg(a) => jm_neg(&linearize(a)),
        Term::GMeet(a, b) => jm_meet(&linearize(a), &linearize(b)),
        Term::GJoin(a, b) => jm_join(&linearize(a), &linearize(b)),
        Term::IntScale(n, a) => scale_jm(&linearize(a), &Rational::from(n.clone())),
        Term::RatScale(q, a) => scale_jm(&linearize(a), q),
        _ => unreachable!("sort checked"),
    }
}

fn scale_jm(a: &JoinOfMeets, q: &Rational) -> JoinOfMeets {
    if q.is_zero() {
        vec![vec![LinearGroupTerm::zero()]]
    } else if q.is_positive() {
        jm_scale(a, q)
    } else {
        jm_neg(&jm_scale(a, &q.abs()))
    }
}

/// `P(ℓ)` with `ℓ` in primitive integer form; `⊤` for `ℓ = 0`.
pub fn primitive_val(l: &LinearGroupTerm) -> Term {
    if l.is_zero() {
        Term::Top
    } else {
        Term::val(l.primitive().0.to_term())
    }
}

fn big_meet(items: Vec<Term>) -> Term {
    let items: Vec<Term> = items.into_iter().filter(|t| *t != Term::Top).collect();
    items.into_iter().reduce(Term::lmeet).unwrap_or(Term::Top)
}

fn big_join(items: Vec<Term>) -> Term {
    if items.contains(&Term::Top) {
        return Term::Top;
    }
    items.into_iter().reduce(Term::ljoin).unwrap_or(Term::Bot)
}

/// Pushes every `P` down to primitive linear arguments.
pub fn push_valuation(t: &Term) -> Term {
    match t {
        Term::Val(g) => {
            let jm = linearize(g);
            big_join(
                jm.iter()
                    .map(|m| {
                        let mut seen = BTreeSet::new();
                        let vals = m
                            .iter()
                            .map(primitive_val)
                            .filter(|v| seen.insert(v.to_string()))
                            .collect();
                        big_meet(vals)
                    })
                    .collect(),
            )
        }
        Term::LMeet(a, b) => Term::lmeet(push_valuation(a), push_valuation(b)),
        Term::LJoin(a, b) => Term::ljoin(push_valuation(a), push_valuation(b)),
        Term::Compl(a) => Term::compl(push_valuation(a)),
        other => other.clone(),
    }
}

/// [`push_valuation`] on every lattice-sorted atom side.
pub fn push_valuation_formula(phi: &Formula) -> Formula {
    phi.map_atoms(&mut |atom| match atom {
        Formula::LBelow(a, b) => Formula::LBelow(push_valuation(a), push_valuation(b)),
        Formula::LEq(a, b) => Formula::LEq(push_valuation(a), push_valuation(b)),
        other => other.clone(),
    })
}

fn difference(t: &Term, s: &Term) -> Term {
    match (t, s) {
        (_, Term::Zero) => t.clone(),
        (Term::Zero, _) => Term::neg(s.clone()),
        _ => Term::sub(t.clone(), s.clone()),
    }
}

/// Replaces group atoms: `s <= t` by `P(t - s) = top`, and `s = t` by both directions.
pub fn group_atoms_to_lattice(phi: &Formula) -> Formula {
    let up = |t: Term| Formula::LEq(Term::val(t), Term::Top);
    phi.map_atoms(&mut |atom| match atom {
        Formula::GLeq(s, t) => up(difference(t, s)),
        Formula::GEq(s, t) => Formula::and(up(difference(t, s)), up(difference(s, t))),
        other => other.clone(),
    })
}

// Replaces the leftmost complement whose argument is complement-free.
fn take_innermost_compl(t: &Term, b: &str) -> Option<(Term, Term)> {
    if let Term::Compl(s) = t {
        if !s.contains_compl() {
            return Some((Term::lvar(b), (**s).clone()));
        }
    }
    let rebuild = |t: &Term, i: usize, new: Term| -> Term {
        match (t, i) {
            (Term::LMeet(_, r), 0) => Term::LMeet(bx(new), r.clone()),
            (Term::LMeet(l, _), _) => Term::LMeet(l.clone(), bx(new)),
            (Term::LJoin(_, r), 0) => Term::LJoin(bx(new), r.clone()),
            (Term::LJoin(l, _), _) => Term::LJoin(l.clone(), bx(new)),
            (Term::Compl(_), _) => Term::Compl(bx(new)),
            _ => unreachable!("only lattice nodes contain complements"),
        }
    };
    for (i, c) in t.children().into_iter().enumerate() {
        if c.contains_compl() {
            let (new, s) = take_innermost_compl(c, b)?;
            return Some((rebuild(t, i, new), s));
        }
    }
    None
}

fn remove_in_atom(atom: &Formula, supply: &mut NameSupply) -> Formula {
    let (l, r) = match atom.atom_terms() {
        Some(p) => p,
        None => return atom.clone(),
    };
    if !l.contains_compl() && !r.contains_compl() {
        return atom.clone();
    }
    let b = supply.fresh("b");
    let (l2, r2, s) = if l.contains_compl() {
        let (l2, s) = take_innermost_compl(l, &b).expect("has complement");
        (l2, r.clone(), s)
    } else {
        let (r2, s) = take_innermost_compl(r, &b).expect("has complement");
        (l.clone(), r2, s)
    };
    let replaced = match atom {
        Formula::LBelow(..) => Formula::LBelow(l2, r2),
        _ => Formula::LEq(l2, r2),
    };
    let bv = Term::lvar(&b);
    Formula::exists(
        &b,
        Sort::L,
        Formula::conj([
            Formula::LEq(Term::ljoin(bv.clone(), s.clone()), Term::Top),
            Formula::LEq(Term::lmeet(bv, s), Term::Bot),
            remove_in_atom(&replaced, supply),
        ]),
    )
}

/// Replaces each `compl(s)` by a fresh lattice variable constrained to be the complement of `s`.
pub fn remove_complement(phi: &Formula) -> Formula {
    let mut supply = NameSupply::for_formula(phi);
    phi.map_atoms(&mut |atom| remove_in_atom(atom, &mut supply))
}

#[cfg(test)]
mod tests {
    use super::super::{parse, parse_term, parse_with_context, Context};
    use super::*;

    fn g(text: &str) -> Term {
        parse_term(text, Sort::G, &Context::new()).unwrap()
    }

    fn show(jm: &JoinOfMeets) -> String {
        jm.iter()
            .map(|m| {
                m.iter()
                    .map(|l| l.to_string())
                    .collect::<Vec<_>>()
                    .join(" meet ")
            })
            .collect::<Vec<_>>()
            .join(" | ")
    }

    #[test]
    fn linearize_examples() {
        assert_eq!(show(&linearize(&g("(x meet y) + z"))), "x + z meet y + z");
        assert_eq!(show(&linearize(&g("-(x meet y)"))), "-x | -y");
        assert_eq!(show(&linearize(&g("2*(x join y)"))), "2*x | 2*y");
        assert_eq!(show(&linearize(&g("-2*(x meet y)"))), "-(2*x) | -(2*y)");
        assert!(linearize_group_term(&Term::Top).is_err());
    }

    #[test]
    fn push_valuation_examples() {
        let l = |s: &str| parse_term(s, Sort::L, &Context::new()).unwrap();
        assert_eq!(push_valuation(&l("P(x meet y)")).to_string(), "P(x) cap P(y)");
        assert_eq!(push_valuation(&l("P(3*x)")).to_string(), "P(x)");
        assert_eq!(push_valuation(&l("P(2*x join 4*y)")).to_string(), "P(x) cup P(y)");
        assert_eq!(push_valuation(&l("P(x - x)")).to_string(), "top");
        assert_eq!(push_valuation(&l("P(2*x - 4*y)")).to_string(), "P(x - 2*y)");
    }

    #[test]
    fn group_atom_examples() {
        let ctx: Context = [("x".to_string(), Sort::G), ("y".to_string(), Sort::G)].into();
        let f = |s: &str| group_atoms_to_lattice(&parse_with_context(s, &ctx).unwrap()).to_string();
        assert_eq!(f("x <= y"), "P(y - x) = top");
        assert_eq!(f("0 <= x"), "P(x) = top");
        assert_eq!(f("x = y"), "P(y - x) = top & P(x - y) = top");
        assert_eq!(f("x <= 0"), "P(-x) = top");
    }

    #[test]
    fn remove_complement_examples() {
        let phi = parse("compl(l) cap m = bot").unwrap();
        assert_eq!(
            remove_complement(&phi).to_string(),
            "exists b:L. b cup l = top & b cap l = bot & b cap m = bot"
        );
        let phi = parse("l cap m = bot").unwrap();
        assert_eq!(remove_complement(&phi), phi);
        let phi = parse("compl(compl(l)) = l").unwrap();
        assert_eq!(
            remove_complement(&phi).to_string(),
            "exists b:L. b cup l = top & b cap l = bot & (exists b_1:L. b_1 cup b = top & b_1 cap b = bot & b_1 = l)"
        );
    }
}
