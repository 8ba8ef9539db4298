//! The finite standard structures `Stan(Q^X)` for `X = {0, .., n-1}`.
//!
//! Group elements are rational vectors with pointwise lattice-group
//! operations, lattice elements are subsets of `X` stored as bitsets, and the
//! valuation sends `f` to `{x | f(x) >= 0}`.

use bitvec::prelude::*;
use serde::{Deserialize, Serialize, Serializer};
use thiserror::Error;

use crate::rational::Rational;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AlgebraError {
    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("width mismatch: {0} vs {1}")]
    WidthMismatch(usize, usize),
    #[error("operation `{0}` needs {1} operand(s)")]
    Arity(&'static str, usize),
    #[error("patch precondition violated: f and g differ at index {0}, which lies in C and D")]
    PatchPreconditionViolated(usize),
    #[error("split precondition violated: {0}")]
    SplitPreconditionViolated(String),
    #[error("input must be non-negative")]
    NegativeInput,
    #[error("index {index} out of range for width {width}")]
    IndexOutOfRange { index: usize, width: usize },
    #[error("a standard structure needs a non-empty ground set")]
    EmptyGroundSet,
}

pub type Result<T> = std::result::Result<T, AlgebraError>;

/// An element of `Q^X`.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct GroupVector {
    values: Vec<Rational>,
}

impl std::fmt::Debug for GroupVector {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_tuple("GroupVector").field(&self.values).finish()
    }
}

impl std::fmt::Display for GroupVector {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "(")?;
        for (i, v) in self.values.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{v}")?;
        }
        write!(f, ")")
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PointwiseOp {
    Add,
    Neg,
    Meet,
    Join,
}

impl GroupVector {
    pub fn new(values: Vec<Rational>) -> Self {
        GroupVector { values }
    }

    pub fn from_ints(values: &[i64]) -> Self {
        GroupVector::new(values.iter().map(|&v| Rational::from(v)).collect())
    }

    pub fn zero(n: usize) -> Self {
        GroupVector::new(vec![Rational::zero(); n])
    }

    pub fn constant(n: usize, value: Rational) -> Self {
        GroupVector::new(vec![value; n])
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[Rational] {
        &self.values
    }

    pub fn get(&self, i: usize) -> &Rational {
        &self.values[i]
    }

    fn zip_with(
        &self,
        other: &GroupVector,
        op: impl Fn(&Rational, &Rational) -> Rational,
    ) -> Result<GroupVector> {
        if self.len() != other.len() {
            return Err(AlgebraError::LengthMismatch(self.len(), other.len()));
        }
        Ok(GroupVector::new(
            self.values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| op(a, b))
                .collect(),
        ))
    }

    pub fn add(&self, other: &GroupVector) -> Result<GroupVector> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &GroupVector) -> Result<GroupVector> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn neg(&self) -> GroupVector {
        GroupVector::new(self.values.iter().map(|v| -v).collect())
    }

    pub fn meet(&self, other: &GroupVector) -> Result<GroupVector> {
        self.zip_with(other, |a, b| a.min(b).clone())
    }

    pub fn join(&self, other: &GroupVector) -> Result<GroupVector> {
        self.zip_with(other, |a, b| a.max(b).clone())
    }

    /// Coordinatewise multiplication by a rational.
    pub fn scale(&self, q: &Rational) -> GroupVector {
        GroupVector::new(self.values.iter().map(|v| v * q).collect())
    }

    /// Partial order of the lattice-ordered group: `self <= other` pointwise.
    pub fn leq(&self, other: &GroupVector) -> Result<bool> {
        if self.len() != other.len() {
            return Err(AlgebraError::LengthMismatch(self.len(), other.len()));
        }
        Ok(self.values.iter().zip(&other.values).all(|(a, b)| a <= b))
    }

    pub fn is_nonnegative(&self) -> bool {
        self.values.iter().all(|v| !v.is_negative())
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(Rational::is_zero)
    }

    /// The standard valuation `{x | f(x) >= 0}`.
    pub fn std_valuation(&self) -> SubsetL {
        SubsetL::from_predicate(self.len(), |i| !self.values[i].is_negative())
    }

    /// `{x | f(x) = 0}`.
    pub fn zero_set(&self) -> SubsetL {
        SubsetL::from_predicate(self.len(), |i| self.values[i].is_zero())
    }
}

pub fn pointwise_op(
    kind: PointwiseOp,
    f: &GroupVector,
    g: Option<&GroupVector>,
) -> Result<GroupVector> {
    match (kind, g) {
        (PointwiseOp::Neg, None) => Ok(f.neg()),
        (PointwiseOp::Neg, Some(_)) => Err(AlgebraError::Arity("neg", 1)),
        (_, None) => Err(AlgebraError::Arity("binary pointwise op", 2)),
        (PointwiseOp::Add, Some(g)) => f.add(g),
        (PointwiseOp::Meet, Some(g)) => f.meet(g),
        (PointwiseOp::Join, Some(g)) => f.join(g),
    }
}

pub fn scale(q: &Rational, f: &GroupVector) -> GroupVector {
    f.scale(q)
}

pub fn std_valuation(f: &GroupVector) -> SubsetL {
    f.std_valuation()
}

/// An element of the powerset lattice `P(X)`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SubsetL {
    bits: BitVec<u64, Lsb0>,
}

impl std::fmt::Debug for SubsetL {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{{")?;
        for (i, idx) in self.indices().iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{idx}")?;
        }
        write!(f, "}}/{}", self.width())
    }
}

impl Serialize for SubsetL {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        self.indices().serialize(serializer)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SubsetOp {
    Meet,
    Join,
    Complement,
    Below,
}

/// Result of [`subset_op`]: `below` answers a question, the rest build a set.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SubsetOpResult {
    Set(SubsetL),
    Bool(bool),
}

impl SubsetL {
    pub fn empty(width: usize) -> Self {
        SubsetL {
            bits: bitvec![u64, Lsb0; 0; width],
        }
    }

    pub fn full(width: usize) -> Self {
        SubsetL {
            bits: bitvec![u64, Lsb0; 1; width],
        }
    }

    pub fn from_predicate(width: usize, pred: impl Fn(usize) -> bool) -> Self {
        let mut s = SubsetL::empty(width);
        for i in 0..width {
            if pred(i) {
                s.bits.set(i, true);
            }
        }
        s
    }

    pub fn from_indices(width: usize, indices: &[usize]) -> Result<Self> {
        let mut s = SubsetL::empty(width);
        for &i in indices {
            if i >= width {
                return Err(AlgebraError::IndexOutOfRange { index: i, width });
            }
            s.bits.set(i, true);
        }
        Ok(s)
    }

    /// Low `width` bits of `mask`; used by enumeration loops.
    pub fn from_mask(width: usize, mask: u64) -> Self {
        SubsetL::from_predicate(width, |i| (mask >> i) & 1 == 1)
    }

    pub fn width(&self) -> usize {
        self.bits.len()
    }

    pub fn contains(&self, i: usize) -> bool {
        self.bits[i]
    }

    pub fn set(&mut self, i: usize, value: bool) {
        self.bits.set(i, value);
    }

    pub fn indices(&self) -> Vec<usize> {
        self.bits.iter_ones().collect()
    }

    pub fn count(&self) -> usize {
        self.bits.count_ones()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.not_any()
    }

    pub fn is_full(&self) -> bool {
        self.bits.all()
    }

    fn check_width(&self, other: &SubsetL) -> Result<()> {
        if self.width() != other.width() {
            return Err(AlgebraError::WidthMismatch(self.width(), other.width()));
        }
        Ok(())
    }

    pub fn meet(&self, other: &SubsetL) -> Result<SubsetL> {
        self.check_width(other)?;
        Ok(SubsetL {
            bits: self.bits.clone() & &other.bits,
        })
    }

    pub fn join(&self, other: &SubsetL) -> Result<SubsetL> {
        self.check_width(other)?;
        Ok(SubsetL {
            bits: self.bits.clone() | &other.bits,
        })
    }

    pub fn complement(&self) -> SubsetL {
        SubsetL {
            bits: !self.bits.clone(),
        }
    }

    pub fn below(&self, other: &SubsetL) -> Result<bool> {
        self.check_width(other)?;
        Ok(self.bits.iter_ones().all(|i| other.bits[i]))
    }
}

pub fn subset_op(kind: SubsetOp, c: &SubsetL, d: Option<&SubsetL>) -> Result<SubsetOpResult> {
    match (kind, d) {
        (SubsetOp::Complement, None) => Ok(SubsetOpResult::Set(c.complement())),
        (SubsetOp::Complement, Some(_)) => Err(AlgebraError::Arity("complement", 1)),
        (_, None) => Err(AlgebraError::Arity("binary subset op", 2)),
        (SubsetOp::Meet, Some(d)) => c.meet(d).map(SubsetOpResult::Set),
        (SubsetOp::Join, Some(d)) => c.join(d).map(SubsetOpResult::Set),
        (SubsetOp::Below, Some(d)) => c.below(d).map(SubsetOpResult::Bool),
    }
}

/// `h` equal to `f` on `C`, to `g` on `D`, and `0` elsewhere.
///
/// Requires `f = g` on `C ∩ D`.
pub fn patch(c: &SubsetL, d: &SubsetL, f: &GroupVector, g: &GroupVector) -> Result<GroupVector> {
    c.check_width(d)?;
    if f.len() != g.len() {
        return Err(AlgebraError::LengthMismatch(f.len(), g.len()));
    }
    if f.len() != c.width() {
        return Err(AlgebraError::WidthMismatch(f.len(), c.width()));
    }
    let values = (0..f.len())
        .map(|x| match (c.contains(x), d.contains(x)) {
            (true, true) if f.get(x) != g.get(x) => Err(AlgebraError::PatchPreconditionViolated(x)),
            (true, _) => Ok(f.get(x).clone()),
            (false, true) => Ok(g.get(x).clone()),
            (false, false) => Ok(Rational::zero()),
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(GroupVector::new(values))
}

/// Splits `c` along the disjoint supports of `a` and `b`.
///
/// Returns `(f, g)` with `f + g = c`, `f ∧ g = 0`, `a ∧ g = 0` and `f ∧ b = 0`;
/// `f` keeps `c` where `a` is non-zero.
pub fn ac_split(
    a: &GroupVector,
    b: &GroupVector,
    c: &GroupVector,
) -> Result<(GroupVector, GroupVector)> {
    if a.len() != b.len() {
        return Err(AlgebraError::LengthMismatch(a.len(), b.len()));
    }
    if a.len() != c.len() {
        return Err(AlgebraError::LengthMismatch(a.len(), c.len()));
    }
    for (name, v) in [("a", a), ("b", b), ("c", c)] {
        if !v.is_nonnegative() {
            return Err(AlgebraError::SplitPreconditionViolated(format!(
                "{name} is not non-negative"
            )));
        }
    }
    if !a.meet(b)?.is_zero() {
        return Err(AlgebraError::SplitPreconditionViolated(
            "a meet b is not 0".into(),
        ));
    }
    let f = GroupVector::new(
        (0..a.len())
            .map(|x| {
                if a.get(x).is_zero() {
                    Rational::zero()
                } else {
                    c.get(x).clone()
                }
            })
            .collect(),
    );
    let g = c.sub(&f)?;
    Ok((f, g))
}

/// `b >= 0` with `a ∧ b = 0` and `a ∨ b` a weak order unit: `1` on the zero set of `a`.
pub fn complement_witness(a: &GroupVector) -> Result<GroupVector> {
    if !a.is_nonnegative() {
        return Err(AlgebraError::NegativeInput);
    }
    Ok(GroupVector::new(
        a.values()
            .iter()
            .map(|v| {
                if v.is_zero() {
                    Rational::one()
                } else {
                    Rational::zero()
                }
            })
            .collect(),
    ))
}

/// A non-negative `f` is a weak order unit iff it is strictly positive everywhere.
pub fn is_weak_order_unit(f: &GroupVector) -> Result<bool> {
    if !f.is_nonnegative() {
        return Err(AlgebraError::NegativeInput);
    }
    Ok(f.values().iter().all(Rational::is_positive))
}

/// The diagonal embedding `Stan(Q^X) -> Stan(Q^(X × {0,1}))`.
///
/// The point `(x, i)` is stored at index `x + i·n`.
pub fn double_embed(f: &GroupVector, c: &SubsetL) -> Result<(GroupVector, SubsetL)> {
    if f.len() != c.width() {
        return Err(AlgebraError::WidthMismatch(f.len(), c.width()));
    }
    let n = f.len();
    let mut values = f.values().to_vec();
    values.extend_from_slice(f.values());
    let set = SubsetL::from_predicate(2 * n, |i| c.contains(i % n));
    Ok((GroupVector::new(values), set))
}

/// `Stan(Q^X)` with `|X| = n`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FinStdStructure {
    ground_size: usize,
}

impl FinStdStructure {
    pub fn new(ground_size: usize) -> Result<Self> {
        if ground_size == 0 {
            return Err(AlgebraError::EmptyGroundSet);
        }
        Ok(FinStdStructure { ground_size })
    }

    pub fn ground_size(&self) -> usize {
        self.ground_size
    }

    pub fn top(&self) -> SubsetL {
        SubsetL::full(self.ground_size)
    }

    pub fn bot(&self) -> SubsetL {
        SubsetL::empty(self.ground_size)
    }

    pub fn zero(&self) -> GroupVector {
        GroupVector::zero(self.ground_size)
    }

    /// The `±1` indicator of `s`, whose valuation is `s` itself.
    pub fn indicator(&self, s: &SubsetL) -> GroupVector {
        GroupVector::new(
            (0..self.ground_size)
                .map(|x| {
                    if s.contains(x) {
                        Rational::one()
                    } else {
                        -Rational::one()
                    }
                })
                .collect(),
        )
    }

    /// Every subset of the ground set, in mask order.
    pub fn subsets(&self) -> impl Iterator<Item = SubsetL> + '_ {
        (0..(1u64 << self.ground_size)).map(move |m| SubsetL::from_mask(self.ground_size, m))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q;

    fn gv(v: &[i64]) -> GroupVector {
        GroupVector::from_ints(v)
    }

    fn set(n: usize, idx: &[usize]) -> SubsetL {
        SubsetL::from_indices(n, idx).unwrap()
    }

    #[test]
    fn pointwise_examples() {
        let f = gv(&[1, -2, 3]);
        let g = gv(&[0, 5, -1]);
        assert_eq!(pointwise_op(PointwiseOp::Meet, &f, Some(&g)).unwrap(), gv(&[0, -2, -1]));
        assert_eq!(pointwise_op(PointwiseOp::Join, &f, Some(&g)).unwrap(), gv(&[1, 5, 3]));
        assert_eq!(
            pointwise_op(PointwiseOp::Add, &gv(&[1, 2, 3]), Some(&gv(&[-1, -2, -3]))).unwrap(),
            gv(&[0, 0, 0])
        );
        assert_eq!(
            pointwise_op(PointwiseOp::Add, &gv(&[1]), Some(&gv(&[1, 2]))),
            Err(AlgebraError::LengthMismatch(1, 2))
        );
        assert!(pointwise_op(PointwiseOp::Neg, &f, Some(&g)).is_err());
    }

    #[test]
    fn scale_examples() {
        assert_eq!(scale(&q(1, 2), &gv(&[2, -4, 6])), gv(&[1, -2, 3]));
        assert_eq!(scale(&q(0, 1), &gv(&[7, 9])), gv(&[0, 0]));
        assert_eq!(scale(&q(3, 1), &gv(&[1, 0, -1])), gv(&[3, 0, -3]));
    }

    #[test]
    fn valuation_examples() {
        let f = GroupVector::new(vec![q(1, 1), q(-1, 2), q(0, 1)]);
        assert_eq!(std_valuation(&f), set(3, &[0, 2]));
        assert_eq!(std_valuation(&gv(&[0, 0, 0])), SubsetL::full(3));
        assert_eq!(std_valuation(&gv(&[-1, -1, -1])), SubsetL::empty(3));
    }

    #[test]
    fn subset_examples() {
        assert_eq!(
            subset_op(SubsetOp::Meet, &set(3, &[0, 1]), Some(&set(3, &[1, 2]))).unwrap(),
            SubsetOpResult::Set(set(3, &[1]))
        );
        assert_eq!(
            subset_op(SubsetOp::Complement, &set(3, &[0]), None).unwrap(),
            SubsetOpResult::Set(set(3, &[1, 2]))
        );
        assert_eq!(
            subset_op(SubsetOp::Below, &set(3, &[]), Some(&set(3, &[2]))).unwrap(),
            SubsetOpResult::Bool(true)
        );
        assert_eq!(
            set(2, &[0]).meet(&set(3, &[0])),
            Err(AlgebraError::WidthMismatch(2, 3))
        );
    }

    #[test]
    fn patch_examples() {
        let h = patch(&set(3, &[0, 1]), &set(3, &[1, 2]), &gv(&[3, 2, 9]), &gv(&[7, 2, 4])).unwrap();
        assert_eq!(h, gv(&[3, 2, 4]));
        let h = patch(&set(3, &[0]), &set(3, &[2]), &gv(&[1, 1, 1]), &gv(&[5, 5, 5])).unwrap();
        assert_eq!(h, gv(&[1, 0, 5]));
        let h = patch(&set(3, &[0, 1]), &set(3, &[0, 1]), &gv(&[1, 2, 3]), &gv(&[1, 2, 9])).unwrap();
        assert_eq!(h, gv(&[1, 2, 0]));
        assert_eq!(
            patch(&set(2, &[0]), &set(2, &[0]), &gv(&[1, 0]), &gv(&[2, 0])),
            Err(AlgebraError::PatchPreconditionViolated(0))
        );
    }

    #[test]
    fn ac_split_examples() {
        let (f, g) = ac_split(&gv(&[1, 0, 0]), &gv(&[0, 2, 0]), &gv(&[3, 3, 3])).unwrap();
        assert_eq!((f, g), (gv(&[3, 0, 0]), gv(&[0, 3, 3])));
        let (f, g) = ac_split(&gv(&[0, 0, 0]), &gv(&[0, 0, 0]), &gv(&[1, 1, 1])).unwrap();
        assert_eq!((f, g), (gv(&[0, 0, 0]), gv(&[1, 1, 1])));
        let (f, g) = ac_split(&gv(&[2, 0, 1]), &gv(&[0, 3, 0]), &gv(&[4, 4, 4])).unwrap();
        assert_eq!((f, g), (gv(&[4, 0, 4]), gv(&[0, 4, 0])));
        assert!(matches!(
            ac_split(&gv(&[1, 0]), &gv(&[1, 0]), &gv(&[1, 1])),
            Err(AlgebraError::SplitPreconditionViolated(_))
        ));
        assert!(matches!(
            ac_split(&gv(&[1, 0]), &gv(&[0, 1]), &gv(&[-1, 1])),
            Err(AlgebraError::SplitPreconditionViolated(_))
        ));
    }

    #[test]
    fn complement_witness_examples() {
        assert_eq!(complement_witness(&gv(&[2, 0, 1])).unwrap(), gv(&[0, 1, 0]));
        assert_eq!(complement_witness(&gv(&[0, 0, 0])).unwrap(), gv(&[1, 1, 1]));
        let a = gv(&[1, 1, 1]);
        let b = complement_witness(&a).unwrap();
        assert_eq!(b, gv(&[0, 0, 0]));
        assert!(is_weak_order_unit(&a.join(&b).unwrap()).unwrap());
        assert_eq!(complement_witness(&gv(&[-1])), Err(AlgebraError::NegativeInput));
    }

    #[test]
    fn weak_order_unit_examples() {
        for (v, expected, neg_val) in [
            (gv(&[1, 1, 1]), true, set(3, &[])),
            (gv(&[1, 0, 1]), false, set(3, &[1])),
            (gv(&[0, 0, 0]), false, set(3, &[0, 1, 2])),
        ] {
            assert_eq!(is_weak_order_unit(&v).unwrap(), expected);
            let p = v.neg().std_valuation();
            assert_eq!(p, neg_val);
            assert_eq!(p.is_empty(), expected);
        }
        assert_eq!(is_weak_order_unit(&gv(&[1, -1])), Err(AlgebraError::NegativeInput));
    }

    #[test]
    fn double_embed_examples() {
        let (i, j) = double_embed(&gv(&[1, -2]), &set(2, &[0])).unwrap();
        assert_eq!(i, gv(&[1, -2, 1, -2]));
        assert_eq!(j, set(4, &[0, 2]));
        let (i, j) = double_embed(&gv(&[0]), &SubsetL::full(1)).unwrap();
        assert_eq!(i, gv(&[0, 0]));
        assert!(j.is_full());
        let f = gv(&[-1, 3]);
        let (i, _) = double_embed(&f, &f.std_valuation()).unwrap();
        let (_, j) = double_embed(&f, &f.std_valuation()).unwrap();
        assert_eq!(i.std_valuation(), set(4, &[1, 3]));
        assert_eq!(i.std_valuation(), j);
        assert!(double_embed(&gv(&[1]), &set(2, &[])).is_err());
    }

    #[test]
    fn structure_needs_points() {
        assert_eq!(FinStdStructure::new(0), Err(AlgebraError::EmptyGroundSet));
        let s = FinStdStructure::new(3).unwrap();
        assert_eq!(s.subsets().count(), 8);
        let c = set(3, &[0, 2]);
        assert_eq!(s.indicator(&c).std_valuation(), c);
    }

    #[test]
    fn json_forms() {
        let v = GroupVector::new(vec![q(1, 2), q(-3, 1)]);
        assert_eq!(serde_json::to_string(&v).unwrap(), r#"["1/2","-3/1"]"#);
        assert_eq!(serde_json::to_string(&set(4, &[3, 1])).unwrap(), "[1,3]");
    }
}
