//! Random formulas and structure elements for property checks.

use rand::seq::SliceRandom;
use rand::Rng as _;

use crate::algebra::{GroupVector, SubsetL};
use crate::oracle::Assignment;
use crate::periodic::{PeriodicFn, PeriodicSet};
use crate::rational::{q, Rational};
use crate::seed::Rng;
use crate::syntax::{Formula, Sort, Term};

/// Shape limits for [`formula`].
#[derive(Clone, Debug)]
pub struct Shape {
    pub free_group: Vec<String>,
    pub free_lattice: Vec<String>,
    pub bound_group: Vec<String>,
    pub bound_lattice: Vec<String>,
    pub max_atoms: usize,
}

impl Default for Shape {
    fn default() -> Self {
        Shape {
            free_group: vec!["x".into()],
            free_lattice: vec!["l".into()],
            bound_group: vec!["a".into(), "b".into()],
            bound_lattice: vec!["u".into(), "w".into()],
            max_atoms: 12,
        }
    }
}

/// Small rationals: integers in `[-2, 2]` and a few halves.
pub fn small_rational(rng: &mut Rng) -> Rational {
    const CHOICES: [(i64, i64); 9] = [(-2, 1), (-1, 1), (0, 1), (1, 1), (2, 1), (1, 2), (-1, 2), (3, 2), (-3, 2)];
    let (n, d) = *CHOICES.choose(rng).expect("non-empty");
    q(n, d)
}

pub fn group_vector(rng: &mut Rng, n: usize) -> GroupVector {
    GroupVector::new((0..n).map(|_| small_rational(rng)).collect())
}

pub fn subset(rng: &mut Rng, n: usize) -> SubsetL {
    let bits: Vec<bool> = (0..n).map(|_| rng.gen_bool(0.5)).collect();
    SubsetL::from_predicate(n, |i| bits[i])
}

pub fn assignment(rng: &mut Rng, n: usize, free: &std::collections::BTreeMap<String, Sort>) -> Assignment {
    let mut env = Assignment::new();
    for (name, sort) in free {
        env = match sort {
            Sort::G => env.with_group(name, group_vector(rng, n)),
            Sort::L => env.with_lattice(name, subset(rng, n)),
        };
    }
    env
}

pub fn periodic_fn(rng: &mut Rng, max_k: u32) -> PeriodicFn {
    let k = rng.gen_range(0..=max_k);
    let vals = (0..1usize << k).map(|_| small_rational(rng)).collect();
    crate::periodic::normalize(k, vals).expect("valid length")
}

pub fn positive_periodic_fn(rng: &mut Rng, max_k: u32) -> PeriodicFn {
    let k = rng.gen_range(0..=max_k);
    let vals = (0..1usize << k)
        .map(|_| q(rng.gen_range(1..=12), rng.gen_range(1..=4)))
        .collect();
    crate::periodic::normalize(k, vals).expect("valid length")
}

pub fn nonnegative_periodic_fn(rng: &mut Rng, max_k: u32) -> PeriodicFn {
    let k = rng.gen_range(0..=max_k);
    let vals = (0..1usize << k)
        .map(|_| {
            if rng.gen_bool(0.3) {
                Rational::zero()
            } else {
                q(rng.gen_range(1..=6), rng.gen_range(1..=3))
            }
        })
        .collect();
    crate::periodic::normalize(k, vals).expect("valid length")
}

pub fn periodic_set(rng: &mut Rng, max_k: u32) -> PeriodicSet {
    let k = rng.gen_range(0..=max_k);
    PeriodicSet::normalize(k, subset(rng, 1 << k))
}

struct Gen<'a> {
    rng: &'a mut Rng,
    group_scope: Vec<String>,
    lattice_scope: Vec<String>,
    unused_group: Vec<String>,
    unused_lattice: Vec<String>,
    atoms_left: usize,
}

impl Gen<'_> {
    fn group_var(&mut self) -> Term {
        match self.group_scope.choose(self.rng) {
            Some(v) => Term::gvar(v),
            None => Term::Zero,
        }
    }

    fn group_term(&mut self, depth: u32) -> Term {
        let r = self.rng.gen_range(0..10);
        if depth == 0 || r < 4 {
            return if self.rng.gen_bool(0.1) {
                Term::Zero
            } else {
                self.group_var()
            };
        }
        match r {
            4 | 5 => Term::add(self.group_term(depth - 1), self.group_term(depth - 1)),
            6 => Term::sub(self.group_term(depth - 1), self.group_term(depth - 1)),
            7 => Term::neg(self.group_term(depth - 1)),
            8 => {
                let k: i64 = *[2, 3, -2].choose(self.rng).expect("non-empty");
                Term::scale(k, self.group_term(depth - 1))
            }
            _ => {
                if self.rng.gen_bool(0.5) {
                    Term::gmeet(self.group_term(depth - 1), self.group_term(depth - 1))
                } else {
                    Term::gjoin(self.group_term(depth - 1), self.group_term(depth - 1))
                }
            }
        }
    }

    fn lattice_term(&mut self, depth: u32) -> Term {
        let r = self.rng.gen_range(0..10);
        if depth == 0 || r < 5 {
            return match self.rng.gen_range(0..10) {
                0 => Term::Top,
                1 => Term::Bot,
                2..=5 if !self.lattice_scope.is_empty() => {
                    Term::lvar(self.lattice_scope.choose(self.rng).expect("non-empty"))
                }
                _ => Term::val(self.group_term(1)),
            };
        }
        match r {
            5 | 6 => Term::lmeet(self.lattice_term(depth - 1), self.lattice_term(depth - 1)),
            7 | 8 => Term::ljoin(self.lattice_term(depth - 1), self.lattice_term(depth - 1)),
            _ => Term::compl(self.lattice_term(depth - 1)),
        }
    }

    fn atom(&mut self) -> Formula {
        self.atoms_left = self.atoms_left.saturating_sub(1);
        match self.rng.gen_range(0..4) {
            0 => Formula::GLeq(self.group_term(2), self.group_term(1)),
            1 => Formula::GEq(self.group_term(2), self.group_term(1)),
            2 => Formula::LBelow(self.lattice_term(2), self.lattice_term(2)),
            _ => Formula::LEq(self.lattice_term(2), self.lattice_term(1)),
        }
    }

    fn formula(&mut self, depth: u32) -> Formula {
        if self.atoms_left == 0 {
            return Formula::True;
        }
        if depth == 0 || self.atoms_left <= 1 {
            return self.atom();
        }
        let r = self.rng.gen_range(0..12);
        match r {
            0..=2 if !self.unused_group.is_empty() => {
                let v = self.unused_group.remove(0);
                self.group_scope.push(v.clone());
                let body = self.formula(depth - 1);
                self.group_scope.pop();
                let q = if self.rng.gen_bool(0.5) { Formula::exists } else { Formula::forall };
                q(&v, Sort::G, body)
            }
            3 if !self.unused_lattice.is_empty() => {
                let v = self.unused_lattice.remove(0);
                self.lattice_scope.push(v.clone());
                let body = self.formula(depth - 1);
                self.lattice_scope.pop();
                let q = if self.rng.gen_bool(0.5) { Formula::exists } else { Formula::forall };
                q(&v, Sort::L, body)
            }
            4 => Formula::not(self.formula(depth - 1)),
            5..=7 => Formula::and(self.formula(depth - 1), self.formula(depth - 1)),
            8 | 9 => Formula::or(self.formula(depth - 1), self.formula(depth - 1)),
            10 => Formula::implies(self.formula(depth - 1), self.formula(depth - 1)),
            _ => self.atom(),
        }
    }
}

/// A random well-sorted formula over the variables of `shape`.
pub fn formula(rng: &mut Rng, shape: &Shape) -> Formula {
    let mut g = Gen {
        rng,
        group_scope: shape.free_group.clone(),
        lattice_scope: shape.free_lattice.clone(),
        unused_group: shape.bound_group.clone(),
        unused_lattice: shape.bound_lattice.clone(),
        atoms_left: shape.max_atoms,
    };
    g.formula(5)
}

/// A random lattice sentence of quantifier depth at most `depth`.
pub fn lattice_sentence(rng: &mut Rng, depth: usize) -> Formula {
    fn term(rng: &mut Rng, vars: &[String], d: u32) -> Term {
        if d == 0 || rng.gen_bool(0.45) {
            return match rng.gen_range(0..8) {
                0 => Term::Top,
                1 => Term::Bot,
                _ if vars.is_empty() => Term::Top,
                _ => Term::lvar(vars.choose(rng).expect("non-empty")),
            };
        }
        match rng.gen_range(0..5) {
            0 | 1 => Term::lmeet(term(rng, vars, d - 1), term(rng, vars, d - 1)),
            2 | 3 => Term::ljoin(term(rng, vars, d - 1), term(rng, vars, d - 1)),
            _ => Term::compl(term(rng, vars, d - 1)),
        }
    }
    fn go(rng: &mut Rng, vars: &mut Vec<String>, left: usize, d: u32) -> Formula {
        if left > 0 && (vars.is_empty() || rng.gen_bool(0.45)) {
            let v = ["x", "y", "z", "t"][vars.len()].to_string();
            vars.push(v.clone());
            let body = go(rng, vars, left - 1, d);
            vars.pop();
            return if rng.gen_bool(0.5) {
                Formula::exists(&v, Sort::L, body)
            } else {
                Formula::forall(&v, Sort::L, body)
            };
        }
        if d == 0 || rng.gen_bool(0.35) {
            let (a, b) = (term(rng, vars, 2), term(rng, vars, 2));
            return if rng.gen_bool(0.5) {
                Formula::LBelow(a, b)
            } else {
                Formula::LEq(a, b)
            };
        }
        match rng.gen_range(0..4) {
            0 => Formula::not(go(rng, vars, left, d - 1)),
            1 => Formula::and(go(rng, vars, left, d - 1), go(rng, vars, left, d - 1)),
            2 => Formula::or(go(rng, vars, left, d - 1), go(rng, vars, left, d - 1)),
            _ => Formula::implies(go(rng, vars, left, d - 1), go(rng, vars, left, d - 1)),
        }
    }
    let f = go(rng, &mut Vec::new(), depth, 3);
    debug_assert!(f.quantifier_depth() <= depth);
    f
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed::stream;
    use crate::syntax::sort_check;

    #[test]
    fn generated_formulas_are_well_sorted() {
        let mut rng = stream(1, "gen-test");
        let shape = Shape::default();
        for _ in 0..200 {
            let f = formula(&mut rng, &shape);
            sort_check(&f, &f.free_vars()).unwrap();
            assert!(f.atom_count() <= shape.max_atoms);
            let s = lattice_sentence(&mut rng, 3);
            assert!(s.is_sentence() && s.quantifier_depth() <= 3);
        }
    }
}
