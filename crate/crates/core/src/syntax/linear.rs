use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use super::Term;
use crate::algebra::GroupVector;
use crate::rational::Rational;

/// A rational combination of group variables. The empty map is `0`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct LinearGroupTerm {
    coeffs: BTreeMap<String, Rational>,
}

impl LinearGroupTerm {
    pub fn zero() -> Self {
        LinearGroupTerm::default()
    }

    pub fn var(name: &str) -> Self {
        LinearGroupTerm::from_pairs([(name.to_string(), Rational::one())])
    }

    pub fn from_pairs(pairs: impl IntoIterator<Item = (String, Rational)>) -> Self {
        let mut t = LinearGroupTerm::zero();
        for (v, c) in pairs {
            t.add_coeff(&v, &c);
        }
        t
    }

    fn add_coeff(&mut self, v: &str, c: &Rational) {
        let entry = self.coeffs.entry(v.to_string()).or_insert_with(Rational::zero);
        *entry = &*entry + c;
        if entry.is_zero() {
            self.coeffs.remove(v);
        }
    }

    pub fn coeffs(&self) -> &BTreeMap<String, Rational> {
        &self.coeffs
    }

    pub fn coeff(&self, v: &str) -> Rational {
        self.coeffs.get(v).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn mentions(&self, v: &str) -> bool {
        self.coeffs.contains_key(v)
    }

    pub fn vars(&self) -> impl Iterator<Item = &String> {
        self.coeffs.keys()
    }

    pub fn add(&self, other: &LinearGroupTerm) -> LinearGroupTerm {
        let mut t = self.clone();
        for (v, c) in &other.coeffs {
            t.add_coeff(v, c);
        }
        t
    }

    pub fn sub(&self, other: &LinearGroupTerm) -> LinearGroupTerm {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> LinearGroupTerm {
        self.scale(&-Rational::one())
    }

    pub fn scale(&self, q: &Rational) -> LinearGroupTerm {
        if q.is_zero() {
            return LinearGroupTerm::zero();
        }
        LinearGroupTerm {
            coeffs: self.coeffs.iter().map(|(v, c)| (v.clone(), c * q)).collect(),
        }
    }

    /// The term with `v` removed, and the removed coefficient.
    pub fn split_off(&self, v: &str) -> (Rational, LinearGroupTerm) {
        let mut rest = self.clone();
        let c = rest.coeffs.remove(v).unwrap_or_else(Rational::zero);
        (c, rest)
    }

    /// Replaces `v` by `by`.
    pub fn substitute(&self, v: &str, by: &LinearGroupTerm) -> LinearGroupTerm {
        let (c, rest) = self.split_off(v);
        rest.add(&by.scale(&c))
    }

    /// The positive multiple with coprime integer coefficients, with the factor used.
    ///
    /// Since the valuation ignores positive scaling, `P(t) = P(primitive(t))`.
    pub fn primitive(&self) -> (LinearGroupTerm, Rational) {
        if self.is_zero() {
            return (LinearGroupTerm::zero(), Rational::one());
        }
        let lcm = self
            .coeffs
            .values()
            .fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
        let nums: Vec<BigInt> = self
            .coeffs
            .values()
            .map(|c| c.numer() * (&lcm / c.denom()))
            .collect();
        let gcd = nums.iter().fold(BigInt::zero(), |acc, n| acc.gcd(n));
        let factor = Rational::new(lcm, gcd.abs());
        (self.scale(&factor), factor)
    }

    pub fn is_primitive(&self) -> bool {
        self.primitive().1 == Rational::one()
    }

    /// Evaluates with `lookup` giving each variable's value.
    pub fn eval<'a>(
        &self,
        n: usize,
        lookup: impl Fn(&str) -> Option<&'a GroupVector>,
    ) -> Option<GroupVector> {
        let mut acc = vec![Rational::zero(); n];
        for (v, c) in &self.coeffs {
            let x = lookup(v)?;
            if x.len() != n {
                return None;
            }
            for (a, xi) in acc.iter_mut().zip(x.values()) {
                *a = &*a + &(xi * c);
            }
        }
        Some(GroupVector::new(acc))
    }

    /// A surface term: positive parts first, then subtracted negative parts.
    pub fn to_term(&self) -> Term {
        let monomial = |v: &str, c: &Rational| -> Term {
            let x = Term::gvar(v);
            if c == &Rational::one() {
                x
            } else if c.is_integer() {
                Term::IntScale(c.numer().clone(), Box::new(x))
            } else {
                Term::RatScale(c.clone(), Box::new(x))
            }
        };
        let pos: Vec<_> = self.coeffs.iter().filter(|(_, c)| c.is_positive()).collect();
        let neg: Vec<_> = self.coeffs.iter().filter(|(_, c)| c.is_negative()).collect();
        let mut acc: Option<Term> = None;
        for (v, c) in pos {
            let m = monomial(v, c);
            acc = Some(match acc {
                None => m,
                Some(a) => Term::add(a, m),
            });
        }
        for (v, c) in neg {
            let m = monomial(v, &c.abs());
            acc = Some(match acc {
                None => Term::neg(m),
                Some(a) => Term::sub(a, m),
            });
        }
        acc.unwrap_or(Term::Zero)
    }
}

impl fmt::Display for LinearGroupTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_term())
    }
}

impl fmt::Debug for LinearGroupTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Lin({self})")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q;

    fn lin(pairs: &[(&str, Rational)]) -> LinearGroupTerm {
        LinearGroupTerm::from_pairs(pairs.iter().map(|(v, c)| (v.to_string(), c.clone())))
    }

    #[test]
    fn zero_coefficients_vanish() {
        let t = lin(&[("x", q(1, 1)), ("y", q(2, 1))]).add(&lin(&[("x", q(-1, 1))]));
        assert_eq!(t, lin(&[("y", q(2, 1))]));
        assert!(t.sub(&t).is_zero());
    }

    #[test]
    fn primitive_form() {
        let (p, f) = lin(&[("x", q(3, 1))]).primitive();
        assert_eq!((p, f), (lin(&[("x", q(1, 1))]), q(1, 3)));
        let (p, _) = lin(&[("x", q(1, 2)), ("y", q(-3, 4))]).primitive();
        assert_eq!(p, lin(&[("x", q(2, 1)), ("y", q(-3, 1))]));
        let (p, _) = lin(&[("x", q(-4, 1)), ("y", q(-6, 1))]).primitive();
        assert_eq!(p, lin(&[("x", q(-2, 1)), ("y", q(-3, 1))]));
    }

    #[test]
    fn printing() {
        assert_eq!(lin(&[("x", q(-1, 1)), ("y", q(1, 1))]).to_string(), "y - x");
        assert_eq!(lin(&[("x", q(-2, 1))]).to_string(), "-(2*x)");
        assert_eq!(LinearGroupTerm::zero().to_string(), "0");
        assert_eq!(lin(&[("a", q(2, 1)), ("b", q(-1, 1)), ("c", q(-3, 1))]).to_string(), "2*a - b - 3*c");
    }
}
