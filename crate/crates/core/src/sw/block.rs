//! Conjunctions of region bounds on one group variable.

use super::SwError;
use crate::ba::simplify_term;
use crate::rational::Rational;
use crate::syntax::{linearize_group_term, primitive_val, Formula, LinearGroupTerm, Term};

/// `region ⊑ P(a − bound)` for a lower bound, `region ⊑ P(bound − a)` for an
/// upper one; strict bounds also exclude equality on the region.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Bound {
    pub region: Term,
    pub bound: LinearGroupTerm,
    pub strict: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PrimitiveBlock {
    pub variable: String,
    pub lowers: Vec<Bound>,
    pub uppers: Vec<Bound>,
}

/// How a `P`-leaf depends on `a`: `P(a − b)` is a lower bound `b`, `P(b − a)` an upper one.
#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) struct LeafBound {
    pub lower: bool,
    pub bound: LinearGroupTerm,
}

/// Reads `P(ℓ)` with `ℓ = c·a + r`, `c ≠ 0`, as a bound on `a` at `−r/c`.
pub(crate) fn leaf_bound(leaf: &Term, a: &str) -> Result<Option<LeafBound>, SwError> {
    let Term::Val(g) = leaf else {
        return Ok(None);
    };
    if !g.mentions(a) {
        return Ok(None);
    }
    let l = linear(g)?;
    let (c, rest) = l.split_off(a);
    if c.is_zero() {
        return Ok(None);
    }
    Ok(Some(LeafBound {
        lower: c.is_positive(),
        bound: rest.scale(&(-Rational::one() / c)),
    }))
}

pub(crate) fn linear(g: &Term) -> Result<LinearGroupTerm, SwError> {
    let jm = linearize_group_term(g).map_err(SwError::Sort)?;
    match jm.as_slice() {
        [m] if m.len() == 1 => Ok(m[0].clone()),
        _ => Err(SwError::NotPrimitive(format!("P({g}) is not in P-normal form"))),
    }
}

fn meet_items<'a>(t: &'a Term, out: &mut Vec<&'a Term>) {
    match t {
        Term::LMeet(x, y) => {
            meet_items(x, out);
            meet_items(y, out);
        }
        other => out.push(other),
    }
}

impl PrimitiveBlock {
    /// Splits positive atoms into a block on `a` plus side conditions not mentioning `a`.
    /// `None` when some atom is not a region bound.
    pub fn extract(a: &str, atoms: &[Formula]) -> Result<Option<(PrimitiveBlock, Vec<Formula>)>, SwError> {
        let mut block = PrimitiveBlock {
            variable: a.to_string(),
            lowers: Vec::new(),
            uppers: Vec::new(),
        };
        let mut side = Vec::new();
        for atom in atoms {
            let (region, rhs) = match atom {
                Formula::LBelow(r, x) => (r, x),
                Formula::LEq(Term::Top, x) | Formula::LEq(x, Term::Top) => (&Term::Top, x),
                _ => return Ok(None),
            };
            if region.mentions(a) {
                return Ok(None);
            }
            let mut items = Vec::new();
            meet_items(rhs, &mut items);
            for item in items {
                if !item.mentions(a) {
                    side.push(Formula::LBelow(region.clone(), item.clone()));
                    continue;
                }
                let (leaf, negated) = match item {
                    Term::Compl(inner) => (&**inner, true),
                    t => (t, false),
                };
                let Some(lb) = leaf_bound(leaf, a)? else {
                    return Ok(None);
                };
                // ¬P(a − b) says a < b; ¬P(b − a) says a > b.
                let b = Bound {
                    region: region.clone(),
                    bound: lb.bound,
                    strict: negated,
                };
                if lb.lower != negated {
                    block.lowers.push(b);
                } else {
                    block.uppers.push(b);
                }
            }
        }
        Ok(Some((block, side)))
    }
}

/// `∃a` of the block: every lower/upper pair must be consistent on the
/// overlap of their regions. One-sided blocks impose nothing.
pub fn eliminate_group_var(block: &PrimitiveBlock) -> Result<Formula, SwError> {
    let mut out = Vec::new();
    for lo in &block.lowers {
        for up in &block.uppers {
            let region = simplify_term(&Term::lmeet(lo.region.clone(), up.region.clone()))?;
            if region == Term::Bot {
                continue;
            }
            let gap = up.bound.sub(&lo.bound);
            let mut target = primitive_val(&gap);
            if lo.strict || up.strict {
                target = Term::lmeet(target, Term::compl(primitive_val(&gap.neg())));
            }
            let target = simplify_term(&target)?;
            let cond = match target {
                Term::Top => continue,
                Term::Bot => Formula::LEq(region, Term::Bot),
                t => Formula::LBelow(region, t),
            };
            if !out.contains(&cond) {
                out.push(cond);
            }
        }
    }
    Ok(Formula::conj(out))
}
