//! The countable model of functions `N -> Q` with period `2^k`.
//!
//! A limit element is stored by one period at its least exponent. Stage
//! vectors keep an explicit exponent so that the duplication maps between
//! stages stay visible.

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::algebra::{GroupVector, PointwiseOp, SubsetL};
use crate::rational::Rational;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PeriodicError {
    #[error("expected {expected} values for exponent {k}, got {got}")]
    BadLength { k: u32, expected: usize, got: usize },
    #[error("input must be non-empty")]
    EmptyInput,
    #[error("input must be non-negative")]
    NegativeInput,
    #[error("precondition violated: {0}")]
    PreconditionViolated(&'static str),
    #[error("operation `{0}` needs {1} operand(s)")]
    Arity(&'static str, usize),
}

pub type Result<T> = std::result::Result<T, PeriodicError>;

/// Largest exponent accepted from external input.
pub const MAX_EXPONENT: u32 = 20;

fn period(k: u32) -> usize {
    1usize << k
}

fn check_len(k: u32, got: usize) -> Result<()> {
    if k > MAX_EXPONENT || got != period(k) {
        return Err(PeriodicError::BadLength {
            k,
            expected: if k > MAX_EXPONENT { 0 } else { period(k) },
            got,
        });
    }
    Ok(())
}

fn halves_equal<T: PartialEq>(vals: &[T]) -> bool {
    let (a, b) = vals.split_at(vals.len() / 2);
    a == b
}

fn repeat_to<T: Clone>(vals: &[T], len: usize) -> Vec<T> {
    vals.iter().cycle().take(len).cloned().collect()
}

/// A group element of the periodic model.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct PeriodicFn {
    k: u32,
    vals: Vec<Rational>,
}

#[derive(Serialize, Deserialize)]
struct PeriodicFnRepr {
    k: u32,
    vals: Vec<Rational>,
}

impl Serialize for PeriodicFn {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        PeriodicFnRepr {
            k: self.k,
            vals: self.vals.clone(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for PeriodicFn {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let r = PeriodicFnRepr::deserialize(d)?;
        normalize(r.k, r.vals).map_err(D::Error::custom)
    }
}

impl std::fmt::Display for PeriodicFn {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({},[", self.k)?;
        for (i, v) in self.vals.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{v}")?;
        }
        write!(f, "])")
    }
}

/// Collapses a period while it is two equal halves.
pub fn normalize(k: u32, vals: Vec<Rational>) -> Result<PeriodicFn> {
    check_len(k, vals.len())?;
    let mut k = k;
    let mut vals = vals;
    while k > 0 && halves_equal(&vals) {
        vals.truncate(vals.len() / 2);
        k -= 1;
    }
    Ok(PeriodicFn { k, vals })
}

impl PeriodicFn {
    pub fn constant(value: Rational) -> Self {
        PeriodicFn {
            k: 0,
            vals: vec![value],
        }
    }

    pub fn from_ints(k: u32, vals: &[i64]) -> Result<Self> {
        normalize(k, vals.iter().map(|&v| Rational::from(v)).collect())
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn vals(&self) -> &[Rational] {
        &self.vals
    }

    pub fn value_at(&self, i: usize) -> &Rational {
        &self.vals[i % self.vals.len()]
    }

    /// One period at exponent `k >= self.k()`, as a plain vector.
    pub fn lift(&self, k: u32) -> GroupVector {
        assert!(k >= self.k, "cannot lift below the minimal period");
        GroupVector::new(repeat_to(&self.vals, period(k)))
    }

    pub fn from_vector(k: u32, v: &GroupVector) -> Result<Self> {
        normalize(k, v.values().to_vec())
    }

    pub fn is_nonnegative(&self) -> bool {
        self.vals.iter().all(|v| !v.is_negative())
    }

    pub fn is_zero(&self) -> bool {
        self.k == 0 && self.vals[0].is_zero()
    }

    /// `self <= other` in the pointwise order.
    pub fn leq(&self, other: &PeriodicFn) -> bool {
        let k = self.k.max(other.k);
        (0..period(k)).all(|i| self.value_at(i) <= other.value_at(i))
    }

    /// `self < other`: below and distinct.
    pub fn lt(&self, other: &PeriodicFn) -> bool {
        self.leq(other) && self != other
    }

    pub fn scale(&self, q: &Rational) -> PeriodicFn {
        normalize(self.k, self.vals.iter().map(|v| v * q).collect()).expect("length preserved")
    }

    pub fn neg(&self) -> PeriodicFn {
        self.scale(&-Rational::one())
    }

    pub fn add(&self, other: &PeriodicFn) -> PeriodicFn {
        binary(self, other, |a, b| a + b)
    }

    pub fn meet(&self, other: &PeriodicFn) -> PeriodicFn {
        binary(self, other, |a, b| a.min(b).clone())
    }

    pub fn join(&self, other: &PeriodicFn) -> PeriodicFn {
        binary(self, other, |a, b| a.max(b).clone())
    }
}

fn binary(
    f: &PeriodicFn,
    g: &PeriodicFn,
    op: impl Fn(&Rational, &Rational) -> Rational,
) -> PeriodicFn {
    let k = f.k.max(g.k);
    let vals = (0..period(k))
        .map(|i| op(f.value_at(i), g.value_at(i)))
        .collect();
    normalize(k, vals).expect("length matches exponent")
}

pub fn periodic_op(kind: PointwiseOp, f: &PeriodicFn, g: Option<&PeriodicFn>) -> Result<PeriodicFn> {
    match (kind, g) {
        (PointwiseOp::Neg, None) => Ok(f.neg()),
        (PointwiseOp::Neg, Some(_)) => Err(PeriodicError::Arity("neg", 1)),
        (_, None) => Err(PeriodicError::Arity("binary periodic op", 2)),
        (PointwiseOp::Add, Some(g)) => Ok(f.add(g)),
        (PointwiseOp::Meet, Some(g)) => Ok(f.meet(g)),
        (PointwiseOp::Join, Some(g)) => Ok(f.join(g)),
    }
}

/// A lattice element of the periodic model: a `2^k`-periodic subset of `N`.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct PeriodicSet {
    k: u32,
    mask: SubsetL,
}

#[derive(Serialize, Deserialize)]
struct PeriodicSetRepr {
    k: u32,
    mask: Vec<usize>,
}

impl Serialize for PeriodicSet {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        PeriodicSetRepr {
            k: self.k,
            mask: self.mask.indices(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for PeriodicSet {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let r = PeriodicSetRepr::deserialize(d)?;
        if r.k > MAX_EXPONENT {
            return Err(D::Error::custom("exponent too large"));
        }
        let mask = SubsetL::from_indices(period(r.k), &r.mask).map_err(D::Error::custom)?;
        Ok(PeriodicSet::normalize(r.k, mask))
    }
}

impl std::fmt::Display for PeriodicSet {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({},{{", self.k)?;
        for (i, idx) in self.mask.indices().iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{idx}")?;
        }
        write!(f, "}})")
    }
}

impl PeriodicSet {
    /// Panics if `mask` is not of width `2^k`.
    pub fn normalize(k: u32, mask: SubsetL) -> Self {
        assert_eq!(mask.width(), period(k), "mask width must be 2^k");
        let mut k = k;
        let mut bits: Vec<bool> = (0..mask.width()).map(|i| mask.contains(i)).collect();
        while k > 0 && halves_equal(&bits) {
            bits.truncate(bits.len() / 2);
            k -= 1;
        }
        let mask = SubsetL::from_predicate(bits.len(), |i| bits[i]);
        PeriodicSet { k, mask }
    }

    pub fn from_indices(k: u32, indices: &[usize]) -> Result<Self> {
        if k > MAX_EXPONENT {
            return Err(PeriodicError::PreconditionViolated("exponent too large"));
        }
        let mask = SubsetL::from_indices(period(k), indices).map_err(|_| {
            PeriodicError::PreconditionViolated("mask index out of range")
        })?;
        Ok(PeriodicSet::normalize(k, mask))
    }

    pub fn top() -> Self {
        PeriodicSet {
            k: 0,
            mask: SubsetL::full(1),
        }
    }

    pub fn bot() -> Self {
        PeriodicSet {
            k: 0,
            mask: SubsetL::empty(1),
        }
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn mask(&self) -> &SubsetL {
        &self.mask
    }

    pub fn contains(&self, i: usize) -> bool {
        self.mask.contains(i % self.mask.width())
    }

    pub fn is_empty(&self) -> bool {
        self.mask.is_empty()
    }

    pub fn is_full(&self) -> bool {
        self.mask.is_full()
    }

    pub fn lift(&self, k: u32) -> SubsetL {
        assert!(k >= self.k, "cannot lift below the minimal period");
        SubsetL::from_predicate(period(k), |i| self.contains(i))
    }

    fn combine(&self, other: &PeriodicSet, op: impl Fn(bool, bool) -> bool) -> PeriodicSet {
        let k = self.k.max(other.k);
        let mask = SubsetL::from_predicate(period(k), |i| op(self.contains(i), other.contains(i)));
        PeriodicSet::normalize(k, mask)
    }

    pub fn meet(&self, other: &PeriodicSet) -> PeriodicSet {
        self.combine(other, |a, b| a && b)
    }

    pub fn join(&self, other: &PeriodicSet) -> PeriodicSet {
        self.combine(other, |a, b| a || b)
    }

    pub fn complement(&self) -> PeriodicSet {
        PeriodicSet {
            k: self.k,
            mask: self.mask.complement(),
        }
    }

    pub fn below(&self, other: &PeriodicSet) -> bool {
        let k = self.k.max(other.k);
        (0..period(k)).all(|i| !self.contains(i) || other.contains(i))
    }
}

/// `{i | f(i) >= 0}`.
pub fn periodic_valuation(f: &PeriodicFn) -> PeriodicSet {
    let mask = SubsetL::from_predicate(f.vals.len(), |i| !f.vals[i].is_negative());
    PeriodicSet::normalize(f.k, mask)
}

/// `{i | f(i) = 0}`.
pub fn zero_set(f: &PeriodicFn) -> PeriodicSet {
    let mask = SubsetL::from_predicate(f.vals.len(), |i| f.vals[i].is_zero());
    PeriodicSet::normalize(f.k, mask)
}

/// An element of `Q^(2^n)`, kept at its stage.
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct StageVector {
    n: u32,
    vals: Vec<Rational>,
}

impl StageVector {
    pub fn new(n: u32, vals: Vec<Rational>) -> Result<Self> {
        check_len(n, vals.len())?;
        Ok(StageVector { n, vals })
    }

    pub fn from_ints(n: u32, vals: &[i64]) -> Result<Self> {
        StageVector::new(n, vals.iter().map(|&v| Rational::from(v)).collect())
    }

    pub fn stage(&self) -> u32 {
        self.n
    }

    pub fn vals(&self) -> &[Rational] {
        &self.vals
    }

    pub fn valuation(&self) -> SubsetL {
        GroupVector::new(self.vals.clone()).std_valuation()
    }

    /// The element of the limit this vector represents.
    pub fn to_limit(&self) -> PeriodicFn {
        normalize(self.n, self.vals.clone()).expect("stage length is 2^n")
    }
}

/// Stage `n` to stage `n + 1`: the second half repeats the first.
pub fn alpha_embed(v: &StageVector) -> StageVector {
    StageVector {
        n: v.n + 1,
        vals: repeat_to(&v.vals, 2 * v.vals.len()),
    }
}

/// The lattice half of the stage map, on masks of width `2^n`.
pub fn beta_embed(mask: &SubsetL) -> SubsetL {
    let w = mask.width();
    SubsetL::from_predicate(2 * w, |i| mask.contains(i % w))
}

/// A set strictly between `⊥` and `c`: `c` on the first half of a doubled period, empty on the second.
pub fn split_nonempty(c: &PeriodicSet) -> Result<PeriodicSet> {
    if c.is_empty() {
        return Err(PeriodicError::EmptyInput);
    }
    let w = period(c.k);
    let mask = SubsetL::from_predicate(2 * w, |i| i < w && c.mask.contains(i));
    Ok(PeriodicSet::normalize(c.k + 1, mask))
}

/// For `a, b >= 0`, whether `P(-a) = P(-b)`.
pub fn polar_equiv(a: &PeriodicFn, b: &PeriodicFn) -> Result<bool> {
    if !a.is_nonnegative() || !b.is_nonnegative() {
        return Err(PeriodicError::NegativeInput);
    }
    Ok(periodic_valuation(&a.neg()) == periodic_valuation(&b.neg()))
}

/// Least `n >= 1` with `n·f < g` false, for `0 < f` and `0 < g`.
pub fn archimedean_bound(f: &PeriodicFn, g: &PeriodicFn) -> Result<u64> {
    let zero = PeriodicFn::constant(Rational::zero());
    if !zero.lt(f) || !zero.lt(g) {
        return Err(PeriodicError::PreconditionViolated("expected 0 < f and 0 < g"));
    }
    let mut n: u64 = 1;
    loop {
        if !f.scale(&Rational::from(n as i64)).lt(g) {
            return Ok(n);
        }
        n += 1;
    }
}

/// `1 + max ceil(g(i)/f(i))` over indices with `f(i) > 0`.
pub fn archimedean_ceiling(f: &PeriodicFn, g: &PeriodicFn) -> u64 {
    let k = f.k.max(g.k);
    let mut best = 0u64;
    for i in 0..period(k) {
        let fi = f.value_at(i);
        if fi.is_positive() {
            let c = (g.value_at(i) / fi).ceil();
            let c: u64 = c.try_into().unwrap_or(0);
            best = best.max(c);
        }
    }
    best + 1
}

/// `σf(i) = f(i + 1)`.
pub fn shift(f: &PeriodicFn) -> PeriodicFn {
    let mut vals = f.vals.clone();
    vals.rotate_left(1);
    normalize(f.k, vals).expect("length preserved")
}

/// The lattice automorphism induced by [`shift`].
pub fn induced_lattice_auto(c: &PeriodicSet) -> PeriodicSet {
    let w = c.mask.width();
    let mask = SubsetL::from_predicate(w, |i| c.mask.contains((i + 1) % w));
    PeriodicSet::normalize(c.k, mask)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pf(k: u32, v: &[i64]) -> PeriodicFn {
        PeriodicFn::from_ints(k, v).unwrap()
    }

    fn ps(k: u32, idx: &[usize]) -> PeriodicSet {
        PeriodicSet::from_indices(k, idx).unwrap()
    }

    #[test]
    fn normalize_examples() {
        let f = pf(2, &[3, 5, 3, 5]);
        assert_eq!((f.k(), f.vals().to_vec()), (1, vec![3.into(), 5.into()]));
        assert_eq!(pf(1, &[3, 5]).k(), 1);
        assert_eq!(pf(2, &[1, 2, 3, 4]).k(), 2);
        assert!(matches!(
            normalize(2, vec![Rational::zero(); 3]),
            Err(PeriodicError::BadLength { .. })
        ));
        assert_eq!(pf(3, &[7; 8]), PeriodicFn::constant(7.into()));
    }

    #[test]
    fn op_examples() {
        assert_eq!(
            periodic_op(PointwiseOp::Meet, &pf(0, &[2]), Some(&pf(1, &[1, 3]))).unwrap(),
            pf(1, &[1, 2])
        );
        assert_eq!(
            periodic_op(PointwiseOp::Add, &pf(1, &[1, -1]), Some(&pf(1, &[-1, 1]))).unwrap(),
            pf(0, &[0])
        );
        assert_eq!(
            periodic_op(PointwiseOp::Neg, &pf(1, &[1, 0]), None).unwrap(),
            pf(1, &[-1, 0])
        );
    }

    #[test]
    fn valuation_examples() {
        assert_eq!(periodic_valuation(&pf(2, &[1, -1, 0, -2])), ps(2, &[0, 2]));
        assert_eq!(periodic_valuation(&pf(0, &[-1])), PeriodicSet::bot());
        assert_eq!(periodic_valuation(&pf(0, &[0])), PeriodicSet::top());
        // (2, {0,2}) normalizes to (1, {0})
        assert_eq!(ps(2, &[0, 2]).k(), 1);
    }

    #[test]
    fn stage_examples() {
        let v = StageVector::from_ints(1, &[1, -1]).unwrap();
        assert_eq!(alpha_embed(&v), StageVector::from_ints(2, &[1, -1, 1, -1]).unwrap());
        let b = beta_embed(&SubsetL::from_indices(2, &[0]).unwrap());
        assert_eq!(b, SubsetL::from_indices(4, &[0, 2]).unwrap());
        let v = StageVector::from_ints(1, &[-1, 2]).unwrap();
        let lhs = alpha_embed(&v).valuation();
        assert_eq!(lhs, beta_embed(&v.valuation()));
        assert_eq!(lhs, SubsetL::from_indices(4, &[1, 3]).unwrap());
        assert_eq!(alpha_embed(&v).to_limit(), v.to_limit());
    }

    #[test]
    fn split_examples() {
        assert_eq!(split_nonempty(&PeriodicSet::top()).unwrap(), ps(1, &[0]));
        let c = ps(1, &[0]);
        let s = split_nonempty(&c).unwrap();
        assert_eq!(s, ps(2, &[0]));
        assert!(s.below(&c) && s != c && !s.is_empty());
        assert_eq!(split_nonempty(&ps(1, &[0, 1])).unwrap(), ps(1, &[0]));
        assert_eq!(split_nonempty(&PeriodicSet::bot()), Err(PeriodicError::EmptyInput));
    }

    #[test]
    fn zero_set_examples() {
        assert_eq!(zero_set(&pf(1, &[0, -3])), ps(1, &[0]));
        assert_eq!(zero_set(&pf(0, &[0])), PeriodicSet::top());
        assert_eq!(zero_set(&pf(2, &[1, 2, 3, 4])), PeriodicSet::bot());
    }

    #[test]
    fn polar_examples() {
        assert!(polar_equiv(&pf(1, &[1, 0]), &pf(1, &[2, 0])).unwrap());
        assert!(!polar_equiv(&pf(0, &[1]), &pf(1, &[1, 0])).unwrap());
        let a = pf(2, &[1, 0, 2, 0]);
        assert!(polar_equiv(&a, &a).unwrap());
        assert_eq!(
            polar_equiv(&pf(0, &[-1]), &a),
            Err(PeriodicError::NegativeInput)
        );
    }

    #[test]
    fn archimedean_examples() {
        assert_eq!(archimedean_bound(&pf(0, &[1]), &pf(0, &[5])).unwrap(), 5);
        // 3·(1,2) = (3,6) is still below (3,10) and distinct from it; 4·(1,2) is not below.
        assert_eq!(archimedean_bound(&pf(1, &[1, 2]), &pf(1, &[3, 10])).unwrap(), 4);
        assert_eq!(archimedean_bound(&pf(1, &[0, 1]), &pf(0, &[1])).unwrap(), 2);
        assert!(archimedean_bound(&pf(0, &[0]), &pf(0, &[1])).is_err());
        assert!(archimedean_bound(&pf(1, &[1, -1]), &pf(0, &[1])).is_err());
    }

    #[test]
    fn shift_examples() {
        assert_eq!(shift(&pf(2, &[1, 2, 3, 4])), pf(2, &[2, 3, 4, 1]));
        assert_eq!(induced_lattice_auto(&ps(1, &[0])), ps(1, &[1]));
        let f = pf(2, &[1, -1, 2, -2]);
        let lhs = periodic_valuation(&shift(&f));
        assert_eq!(lhs, induced_lattice_auto(&periodic_valuation(&f)));
        assert_eq!(lhs, ps(1, &[1]));
    }

    #[test]
    fn json_forms() {
        let f = pf(1, &[1, -2]);
        let s = serde_json::to_string(&f).unwrap();
        assert_eq!(s, r#"{"k":1,"vals":["1/1","-2/1"]}"#);
        let back: PeriodicFn = serde_json::from_str(r#"{"k":2,"vals":["1","-2","1","-2"]}"#).unwrap();
        assert_eq!(back, f);
        assert_eq!(serde_json::to_string(&ps(2, &[0, 3])).unwrap(), r#"{"k":2,"mask":[0,3]}"#);
    }
}
