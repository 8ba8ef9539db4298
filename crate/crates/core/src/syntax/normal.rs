//! Bound-variable hygiene and prenex form.

use std::collections::{BTreeSet, HashMap};

use super::{bx, Formula, Quantifier, Sort, Term};

/// Hands out variable names that do not clash with any name seen so far.
#[derive(Clone, Debug, Default)]
pub struct NameSupply {
    used: BTreeSet<String>,
}

impl NameSupply {
    pub fn new(used: impl IntoIterator<Item = String>) -> Self {
        NameSupply {
            used: used.into_iter().collect(),
        }
    }

    pub fn for_formula(phi: &Formula) -> Self {
        NameSupply::new(phi.all_names())
    }

    pub fn reserve(&mut self, name: &str) {
        self.used.insert(name.to_string());
    }

    /// `base` itself when unused, else `base_1`, `base_2`, ...
    pub fn fresh(&mut self, base: &str) -> String {
        let name = fresh_name(base, &self.used);
        self.used.insert(name.clone());
        name
    }
}

pub fn fresh_name(base: &str, used: &BTreeSet<String>) -> String {
    if !used.contains(base) {
        return base.to_string();
    }
    (1..)
        .map(|i| format!("{base}_{i}"))
        .find(|n| !used.contains(n))
        .expect("infinitely many candidates")
}

/// Gives every binder a name distinct from all free variables and all other binders.
pub fn rename_apart(phi: &Formula) -> Formula {
    let mut supply = NameSupply::new(phi.free_vars().into_keys());
    rename_with(phi, &mut HashMap::new(), &mut supply)
}

/// Like [`rename_apart`], drawing names from a caller-owned supply.
pub(crate) fn rename_with(
    phi: &Formula,
    env: &mut HashMap<String, String>,
    supply: &mut NameSupply,
) -> Formula {
    match phi {
        Formula::True | Formula::False => phi.clone(),
        Formula::Not(a) => Formula::not(rename_with(a, env, supply)),
        Formula::And(a, b) => {
            Formula::and(rename_with(a, env, supply), rename_with(b, env, supply))
        }
        Formula::Or(a, b) => Formula::or(rename_with(a, env, supply), rename_with(b, env, supply)),
        Formula::Implies(a, b) => {
            Formula::implies(rename_with(a, env, supply), rename_with(b, env, supply))
        }
        Formula::Exists(v, s, a) | Formula::Forall(v, s, a) => {
            let new = supply.fresh(v);
            let old = env.insert(v.clone(), new.clone());
            let body = rename_with(a, env, supply);
            match old {
                Some(o) => env.insert(v.clone(), o),
                None => env.remove(v),
            };
            match phi {
                Formula::Exists(..) => Formula::Exists(new, *s, bx(body)),
                _ => Formula::Forall(new, *s, bx(body)),
            }
        }
        atom => atom.map_terms(&mut |t| {
            t.map_bottom_up(&mut |t| match t {
                Term::GVar(v) => Term::GVar(env.get(&v).cloned().unwrap_or(v)),
                Term::LVar(v) => Term::LVar(env.get(&v).cloned().unwrap_or(v)),
                t => t,
            })
        }),
    }
}

type Prefix = Vec<(Quantifier, String, Sort)>;

fn dual(prefix: Prefix) -> Prefix {
    prefix
        .into_iter()
        .map(|(q, v, s)| (q.dual(), v, s))
        .collect()
}

fn prenex(phi: &Formula) -> (Prefix, Formula) {
    match phi {
        Formula::Exists(v, s, a) | Formula::Forall(v, s, a) => {
            let q = if matches!(phi, Formula::Exists(..)) {
                Quantifier::Exists
            } else {
                Quantifier::Forall
            };
            let (mut p, m) = prenex(a);
            p.insert(0, (q, v.clone(), *s));
            (p, m)
        }
        Formula::Not(a) => {
            let (p, m) = prenex(a);
            (dual(p), Formula::not(m))
        }
        Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
            let (pa, ma) = prenex(a);
            let (pb, mb) = prenex(b);
            let (mut p, m) = match phi {
                Formula::And(..) => (pa, Formula::and(ma, mb)),
                Formula::Or(..) => (pa, Formula::or(ma, mb)),
                _ => (dual(pa), Formula::implies(ma, mb)),
            };
            p.extend(pb);
            (p, m)
        }
        _ => (Vec::new(), phi.clone()),
    }
}

/// An equivalent formula with all quantifiers in front, binders renamed apart.
pub fn to_prenex(phi: &Formula) -> Formula {
    let (prefix, matrix) = prenex(&rename_apart(phi));
    prefix
        .into_iter()
        .rev()
        .fold(matrix, |acc, (q, v, s)| Formula::quant(q, &v, s, acc))
}

/// Syntactic equality up to the names of bound variables.
pub fn alpha_eq(a: &Formula, b: &Formula) -> bool {
    alpha(a, b, &mut Vec::new(), &mut Vec::new())
}

fn alpha(a: &Formula, b: &Formula, ea: &mut Vec<String>, eb: &mut Vec<String>) -> bool {
    match (a, b) {
        (Formula::True, Formula::True) | (Formula::False, Formula::False) => true,
        (Formula::Not(x), Formula::Not(y)) => alpha(x, y, ea, eb),
        (Formula::And(x1, x2), Formula::And(y1, y2))
        | (Formula::Or(x1, x2), Formula::Or(y1, y2))
        | (Formula::Implies(x1, x2), Formula::Implies(y1, y2)) => {
            alpha(x1, y1, ea, eb) && alpha(x2, y2, ea, eb)
        }
        (Formula::Exists(v, s, x), Formula::Exists(w, t, y))
        | (Formula::Forall(v, s, x), Formula::Forall(w, t, y)) => {
            if s != t {
                return false;
            }
            ea.push(v.clone());
            eb.push(w.clone());
            let r = alpha(x, y, ea, eb);
            ea.pop();
            eb.pop();
            r
        }
        (Formula::GLeq(x1, x2), Formula::GLeq(y1, y2))
        | (Formula::GEq(x1, x2), Formula::GEq(y1, y2))
        | (Formula::LBelow(x1, x2), Formula::LBelow(y1, y2))
        | (Formula::LEq(x1, x2), Formula::LEq(y1, y2)) => {
            term_alpha(x1, y1, ea, eb) && term_alpha(x2, y2, ea, eb)
        }
        _ => false,
    }
}

fn binder_index(env: &[String], v: &str) -> Option<usize> {
    env.iter().rposition(|n| n == v)
}

fn term_alpha(a: &Term, b: &Term, ea: &[String], eb: &[String]) -> bool {
    let var_eq = |v: &str, w: &str| match (binder_index(ea, v), binder_index(eb, w)) {
        (Some(i), Some(j)) => i == j,
        (None, None) => v == w,
        _ => false,
    };
    match (a, b) {
        (Term::GVar(v), Term::GVar(w)) | (Term::LVar(v), Term::LVar(w)) => var_eq(v, w),
        (Term::IntScale(n, x), Term::IntScale(m, y)) => n == m && term_alpha(x, y, ea, eb),
        (Term::RatScale(p, x), Term::RatScale(q, y)) => p == q && term_alpha(x, y, ea, eb),
        _ => {
            std::mem::discriminant(a) == std::mem::discriminant(b)
                && a.children().len() == b.children().len()
                && a
                    .children()
                    .into_iter()
                    .zip(b.children())
                    .all(|(x, y)| term_alpha(x, y, ea, eb))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::super::parse;
    use super::*;

    #[test]
    fn rename_apart_separates_binders() {
        let phi = parse("(exists x:G. 0 <= x) & (exists x:G. x <= 0) & P(x_1) = top").unwrap();
        let r = rename_apart(&phi);
        assert_eq!(
            r.to_string(),
            "(exists x:G. 0 <= x) & (exists x_2:G. x_2 <= 0) & P(x_1) = top"
        );
        assert!(alpha_eq(&phi, &r));
    }

    #[test]
    fn prenex_examples() {
        let phi = parse("(exists a:G. 0 <= a) & l = top").unwrap();
        assert_eq!(to_prenex(&phi).to_string(), "exists a:G. 0 <= a & l = top");
        let phi = parse("~(forall x:L. x = top)").unwrap();
        assert_eq!(to_prenex(&phi).to_string(), "exists x:L. ~(x = top)");
        let phi = parse("forall v:G. exists a:G. a + a = v").unwrap();
        assert!(alpha_eq(&to_prenex(&phi), &phi));
        let phi = parse("(forall x:L. x = top) -> l = top").unwrap();
        assert_eq!(to_prenex(&phi).to_string(), "exists x:L. x = top -> l = top");
    }

    #[test]
    fn prenex_avoids_capture() {
        let phi = parse("(exists x:L. x = top) & (forall x:L. x << l)").unwrap();
        let p = to_prenex(&phi);
        assert_eq!(p.to_string(), "exists x:L. forall x_1:L. x = top & x_1 << l");
    }

    #[test]
    fn alpha_distinguishes_free_from_bound() {
        let a = parse("exists x:L. x = y").unwrap();
        let b = parse("exists y:L. y = y").unwrap();
        assert!(!alpha_eq(&a, &b));
        let c = parse("exists z:L. z = y").unwrap();
        assert!(alpha_eq(&a, &c));
    }
}
