use proptest::prelude::*;

use dvlg_core::algebra::PointwiseOp;
use dvlg_core::periodic::{
    alpha_embed, archimedean_bound, archimedean_ceiling, beta_embed, induced_lattice_auto, normalize,
    periodic_op, periodic_valuation, polar_equiv, shift, split_nonempty, zero_set, PeriodicFn, PeriodicSet,
    StageVector,
};
use dvlg_core::rational::q;
use dvlg_core::Rational;

fn vals(k: u32, lo: i64, hi: i64) -> impl Strategy<Value = Vec<Rational>> {
    prop::collection::vec((lo..=hi, 1i64..=3).prop_map(|(a, b)| q(a, b)), 1usize << k)
}

fn periodic(max_k: u32) -> impl Strategy<Value = PeriodicFn> {
    (0..=max_k).prop_flat_map(|k| vals(k, -6, 6).prop_map(move |v| normalize(k, v).unwrap()))
}

fn positive(max_k: u32) -> impl Strategy<Value = PeriodicFn> {
    (0..=max_k).prop_flat_map(|k| vals(k, 1, 9).prop_map(move |v| normalize(k, v).unwrap()))
}

fn nonnegative(max_k: u32) -> impl Strategy<Value = PeriodicFn> {
    (0..=max_k).prop_flat_map(|k| {
        prop::collection::vec(prop_oneof![Just(0i64), 1i64..=4], 1usize << k)
            .prop_map(move |v| PeriodicFn::from_ints(k, &v).unwrap())
    })
}

fn nonempty_set(max_k: u32) -> impl Strategy<Value = PeriodicSet> {
    (0..=max_k)
        .prop_flat_map(|k| (Just(k), prop::collection::btree_set(0..1usize << k, 1..=(1usize << k))))
        .prop_map(|(k, idx)| PeriodicSet::from_indices(k, &idx.into_iter().collect::<Vec<_>>()).unwrap())
}

fn at(f: &PeriodicFn, i: usize) -> Rational {
    f.value_at(i).clone()
}

proptest! {
    #[test]
    fn normalize_is_idempotent_and_preserves_values((k, raw) in (0u32..=4).prop_flat_map(|k| (Just(k), vals(k, -3, 3)))) {
        let f = normalize(k, raw.clone()).unwrap();
        prop_assert_eq!(normalize(f.k(), f.vals().to_vec()).unwrap(), f.clone());
        for i in 0..(1usize << (k + 2)) {
            prop_assert_eq!(at(&f, i), raw[i % raw.len()].clone());
        }
    }

    #[test]
    fn operations_do_not_depend_on_the_lifting_period(f in periodic(3), g in periodic(3), extra in 0u32..=2) {
        for op in [PointwiseOp::Add, PointwiseOp::Meet, PointwiseOp::Join] {
            let direct = periodic_op(op, &f, Some(&g)).unwrap();
            let k = f.k().max(g.k()) + extra;
            let lf = normalize(k, f.lift(k).values().to_vec()).unwrap();
            let lg = normalize(k, g.lift(k).values().to_vec()).unwrap();
            prop_assert_eq!(periodic_op(op, &lf, Some(&lg)).unwrap(), direct);
        }
    }

    #[test]
    fn stage_maps_commute_and_cohere(n in 0u32..=4, seed in any::<u64>()) {
        let vals: Vec<Rational> = (0..1u64 << n).map(|i| q(((seed >> (i % 60)) & 7) as i64 - 3, 1)).collect();
        let v = StageVector::new(n, vals).unwrap();
        let up = alpha_embed(&v);
        prop_assert_eq!(up.valuation(), beta_embed(&v.valuation()));
        prop_assert_eq!(alpha_embed(&up).to_limit(), v.to_limit());
        prop_assert_eq!(up.stage(), n + 1);
    }

    #[test]
    fn split_is_strictly_intermediate(c in nonempty_set(5)) {
        let d = split_nonempty(&c).unwrap();
        prop_assert!(!d.is_empty());
        prop_assert!(d.below(&c));
        prop_assert_ne!(d, c);
    }

    #[test]
    fn polar_equivalence_is_zero_set_equality(a in nonnegative(3), b in nonnegative(3), probes in prop::collection::vec(nonnegative(4), 200)) {
        let eq = polar_equiv(&a, &b).unwrap();
        prop_assert_eq!(eq, zero_set(&a) == zero_set(&b));
        if eq {
            let zero = PeriodicFn::constant(Rational::zero());
            for c in &probes {
                prop_assert_eq!(a.meet(c) == zero, b.meet(c) == zero);
            }
        }
    }

    #[test]
    fn archimedean_bound_is_least_and_within_ceiling(f in positive(5), g in positive(5)) {
        let m = archimedean_bound(&f, &g).unwrap();
        prop_assert!(m <= archimedean_ceiling(&f, &g));
        prop_assert!(!f.scale(&Rational::from(m as i64)).lt(&g));
        if m > 1 {
            prop_assert!(f.scale(&Rational::from(m as i64 - 1)).lt(&g));
        }
    }

    #[test]
    fn shift_is_an_automorphism(f in periodic(3), g in periodic(3)) {
        prop_assert_eq!(shift(&f.add(&g)), shift(&f).add(&shift(&g)));
        prop_assert_eq!(shift(&f.meet(&g)), shift(&f).meet(&shift(&g)));
        prop_assert_eq!(shift(&f.join(&g)), shift(&f).join(&shift(&g)));
        prop_assert_eq!(periodic_valuation(&shift(&f)), induced_lattice_auto(&periodic_valuation(&f)));
        let mut h = f.clone();
        for _ in 0..(1usize << f.k()) {
            h = shift(&h);
        }
        prop_assert_eq!(h, f);
    }
}
