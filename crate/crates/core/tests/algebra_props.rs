use proptest::prelude::*;

use dvlg_core::algebra::{ac_split, double_embed, patch, GroupVector, SubsetL};
use dvlg_core::rational::q;
use dvlg_core::Rational;

fn rational() -> impl Strategy<Value = Rational> {
    (-12i64..=12, 1i64..=4).prop_map(|(n, d)| q(n, d))
}

fn vector(n: usize) -> impl Strategy<Value = GroupVector> {
    prop::collection::vec(rational(), n).prop_map(GroupVector::new)
}

fn nonneg(n: usize) -> impl Strategy<Value = GroupVector> {
    prop::collection::vec((0i64..=8, 1i64..=3).prop_map(|(a, b)| q(a, b)), n).prop_map(GroupVector::new)
}

fn subset(n: usize) -> impl Strategy<Value = SubsetL> {
    prop::collection::vec(any::<bool>(), n).prop_map(move |b| SubsetL::from_predicate(n, |i| b[i]))
}

fn pair() -> impl Strategy<Value = (GroupVector, GroupVector)> {
    (1usize..=5).prop_flat_map(|n| (vector(n), vector(n)))
}

proptest! {
    #[test]
    fn valuation_is_scaling_invariant(f in (1usize..=5).prop_flat_map(vector), k in 1i64..=9) {
        prop_assert_eq!(f.scale(&Rational::from(k)).std_valuation(), f.std_valuation());
    }

    #[test]
    fn valuation_affirms_and_detects_positivity(f in (1usize..=5).prop_flat_map(vector)) {
        prop_assert_eq!(f.std_valuation().is_full(), f.is_nonnegative());
    }

    #[test]
    fn valuation_is_a_lattice_morphism((f, g) in pair()) {
        let (pf, pg) = (f.std_valuation(), g.std_valuation());
        prop_assert_eq!(f.meet(&g).unwrap().std_valuation(), pf.meet(&pg).unwrap());
        prop_assert_eq!(f.join(&g).unwrap().std_valuation(), pf.join(&pg).unwrap());
    }

    #[test]
    fn valuation_of_sum_is_sandwiched((f, g) in pair()) {
        let (pf, pg) = (f.std_valuation(), g.std_valuation());
        let sum = f.add(&g).unwrap().std_valuation();
        prop_assert!(pf.meet(&pg).unwrap().below(&sum).unwrap());
        prop_assert!(sum.below(&pf.join(&pg).unwrap()).unwrap());
    }

    #[test]
    fn patch_agrees_on_both_pieces(
        (c, d, f, g) in (1usize..=5).prop_flat_map(|n| (subset(n), subset(n), vector(n), vector(n)))
    ) {
        let both = c.meet(&d).unwrap();
        let g = GroupVector::new(
            (0..g.len()).map(|i| if both.contains(i) { f.get(i).clone() } else { g.get(i).clone() }).collect(),
        );
        let h = patch(&c, &d, &f, &g).unwrap();
        for i in 0..h.len() {
            if c.contains(i) { prop_assert_eq!(h.get(i), f.get(i)); }
            if d.contains(i) { prop_assert_eq!(h.get(i), g.get(i)); }
        }
    }

    #[test]
    fn patch_rejects_disagreement(n in 1usize..=5, i in 0usize..5) {
        let i = i % n;
        let c = SubsetL::from_predicate(n, |j| j == i);
        let f = GroupVector::zero(n);
        let g = GroupVector::constant(n, Rational::one());
        prop_assert!(patch(&c, &c, &f, &g).is_err());
    }

    #[test]
    fn ac_split_postconditions(
        (side, a, b, c) in (1usize..=5).prop_flat_map(|n| (subset(n), nonneg(n), nonneg(n), nonneg(n)))
    ) {
        let n = a.len();
        let zero = GroupVector::zero(n);
        let keep = |v: &GroupVector, on: bool| GroupVector::new(
            (0..n).map(|i| if side.contains(i) == on { v.get(i).clone() } else { Rational::zero() }).collect(),
        );
        let (a, b) = (keep(&a, true), keep(&b, false));
        let (f, g) = ac_split(&a, &b, &c).unwrap();
        prop_assert_eq!(f.add(&g).unwrap(), c);
        prop_assert!(f.is_nonnegative() && g.is_nonnegative());
        prop_assert_eq!(f.meet(&g).unwrap(), zero.clone());
        prop_assert_eq!(a.meet(&g).unwrap(), zero.clone());
        prop_assert_eq!(f.meet(&b).unwrap(), zero);
    }

    #[test]
    fn double_embed_is_injective_and_commutes(
        (f, g, c, d) in (1usize..=4).prop_flat_map(|n| (vector(n), vector(n), subset(n), subset(n)))
    ) {
        let (ef, ec) = double_embed(&f, &c).unwrap();
        let (eg, ed) = double_embed(&g, &d).unwrap();
        prop_assert_eq!(ef == eg, f == g);
        prop_assert_eq!(ec == ed, c == d);
        let (_, pf) = double_embed(&f, &f.std_valuation()).unwrap();
        prop_assert_eq!(ef.std_valuation(), pf);
    }
}
