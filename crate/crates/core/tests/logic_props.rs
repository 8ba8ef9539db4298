use proptest::prelude::*;

use dvlg_core::algebra::{FinStdStructure, GroupVector, SubsetL};
use dvlg_core::ba::ba_qe;
use dvlg_core::generate::{self, Shape};
use dvlg_core::oracle::{decide_finite_with, eval_qf, group_value, lattice_value, Assignment, OracleLimits};
use dvlg_core::seed::{stream, Rng};
use dvlg_core::selfcheck::reduct_limits;
use dvlg_core::sw::{decide_ec, reduce, Mode};
use dvlg_core::syntax::{
    alpha_eq, group_atoms_to_lattice, linearize_group_term, parse_with_context, push_valuation, remove_complement, sort_check,
    Formula, Sort, Term,
};

fn formula(seed: u64) -> (Formula, Rng) {
    let mut rng = stream(seed, "logic-props");
    let f = generate::formula(&mut rng, &Shape::default());
    (f, rng)
}

fn sentence(seed: u64) -> Formula {
    let mut rng = stream(seed, "logic-props-sentence");
    let shape = Shape {
        free_group: Vec::new(),
        free_lattice: Vec::new(),
        max_atoms: 8,
        ..Shape::default()
    };
    generate::formula(&mut rng, &shape)
}

fn terms_of(phi: &Formula) -> Vec<Term> {
    let mut out = Vec::new();
    phi.visit(&mut |f| {
        if let Some((a, b)) = f.atom_terms() {
            out.push(a.clone());
            out.push(b.clone());
        }
    });
    out
}

fn qf_part(phi: &Formula) -> Option<Formula> {
    let mut found = None;
    phi.visit(&mut |f| {
        if found.is_none() && f.is_quantifier_free() && !f.is_atom() && f.free_vars().keys().all(|v| v == "x" || v == "l") {
            found = Some(f.clone());
        }
    });
    found
}

// Cases the oracle gives up on are skipped, so give up early.
fn limits() -> OracleLimits {
    OracleLimits {
        max_cases: 200_000,
        ..reduct_limits()
    }
}

fn same_truth(s: &FinStdStructure, a: &Formula, b: &Formula, env: &Assignment) -> Result<(), TestCaseError> {
    let x = decide_finite_with(s, a, env, &limits());
    let y = decide_finite_with(s, b, env, &limits());
    if let (Ok(x), Ok(y)) = (&x, &y) {
        prop_assert_eq!(x, y, "{} vs {}", a, b);
    }
    Ok(())
}

// Binds every quantifier to a new name.
fn rename_bound(phi: &Formula, counter: &mut usize) -> Formula {
    match phi {
        Formula::Exists(v, s, b) | Formula::Forall(v, s, b) => {
            *counter += 1;
            let fresh = format!("r{counter}{v}");
            let body = rename_bound(&b.rename_free(v, &fresh), counter);
            match phi {
                Formula::Exists(..) => Formula::exists(&fresh, *s, body),
                _ => Formula::forall(&fresh, *s, body),
            }
        }
        Formula::Not(a) => Formula::not(rename_bound(a, counter)),
        Formula::And(a, b) => Formula::and(rename_bound(a, counter), rename_bound(b, counter)),
        Formula::Or(a, b) => Formula::or(rename_bound(a, counter), rename_bound(b, counter)),
        Formula::Implies(a, b) => Formula::implies(rename_bound(a, counter), rename_bound(b, counter)),
        other => other.clone(),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn print_then_parse_is_identity(seed in any::<u64>()) {
        let (f, _) = formula(seed);
        let text = f.to_string();
        let back = parse_with_context(&text, &f.free_vars()).unwrap();
        prop_assert!(alpha_eq(&back, &f), "{} reparsed as {}", text, back);
    }

    #[test]
    fn linearization_preserves_values(seed in any::<u64>(), n in 1usize..=3) {
        let (f, mut rng) = formula(seed);
        let env = generate::assignment(&mut rng, n, &[("x".to_string(), Sort::G), ("a".to_string(), Sort::G), ("b".to_string(), Sort::G)].into());
        let s = FinStdStructure::new(n).unwrap();
        for t in terms_of(&f).into_iter().filter(|t| t.sort() == Ok(Sort::G)) {
            let jm = linearize_group_term(&t).unwrap();
            let lookup = |v: &str| env.group.get(v);
            let value = jm
                .iter()
                .map(|meet| meet.iter().map(|l| l.eval(n, lookup).unwrap()).reduce(|a, b| a.meet(&b).unwrap()).unwrap())
                .reduce(|a, b| a.join(&b).unwrap())
                .unwrap_or_else(|| GroupVector::zero(n));
            prop_assert_eq!(value, group_value(&s, &env, &t).unwrap(), "{}", t);
        }
    }

    #[test]
    fn valuation_pushing_preserves_values(seed in any::<u64>(), n in 1usize..=3) {
        let (f, mut rng) = formula(seed);
        let vars = [("x", Sort::G), ("a", Sort::G), ("b", Sort::G), ("l", Sort::L), ("u", Sort::L), ("w", Sort::L)]
            .map(|(v, s)| (v.to_string(), s))
            .into();
        let env = generate::assignment(&mut rng, n, &vars);
        let s = FinStdStructure::new(n).unwrap();
        for t in terms_of(&f).into_iter().filter(|t| t.sort() == Ok(Sort::L)) {
            let pushed = push_valuation(&t);
            prop_assert_eq!(lattice_value(&s, &env, &pushed).unwrap(), lattice_value(&s, &env, &t).unwrap(), "{}", t);
        }
    }

    #[test]
    fn lattice_translation_preserves_truth(seed in any::<u64>(), n in 1usize..=3) {
        let (f, mut rng) = formula(seed);
        let env = generate::assignment(&mut rng, n, &f.free_vars());
        let s = FinStdStructure::new(n).unwrap();
        same_truth(&s, &f, &group_atoms_to_lattice(&f), &env)?;
    }

    #[test]
    fn complement_removal_preserves_truth(seed in any::<u64>(), n in 1usize..=3) {
        let (f, mut rng) = formula(seed);
        let env = generate::assignment(&mut rng, n, &f.free_vars());
        let s = FinStdStructure::new(n).unwrap();
        same_truth(&s, &f, &remove_complement(&f), &env)?;
    }

    #[test]
    fn oracle_agrees_with_direct_evaluation(seed in any::<u64>(), n in 1usize..=3) {
        let (f, mut rng) = formula(seed);
        if let Some(g) = qf_part(&f) {
            let env = generate::assignment(&mut rng, n, &[("x".to_string(), Sort::G), ("l".to_string(), Sort::L)].into());
            let s = FinStdStructure::new(n).unwrap();
            prop_assert_eq!(decide_finite_with(&s, &g, &env, &OracleLimits::default()).unwrap(), eval_qf(&s, &env, &g).unwrap());
        }
    }

    #[test]
    fn oracle_is_invariant_under_point_permutation(seed in any::<u64>(), n in 2usize..=3) {
        let (f, mut rng) = formula(seed);
        let env = generate::assignment(&mut rng, n, &f.free_vars());
        let s = FinStdStructure::new(n).unwrap();
        let mut flipped = Assignment::new();
        for (k, v) in &env.group {
            flipped = flipped.with_group(k, GroupVector::new(v.values().iter().rev().cloned().collect()));
        }
        for (k, c) in &env.lattice {
            flipped = flipped.with_lattice(k, SubsetL::from_predicate(n, |i| c.contains(n - 1 - i)));
        }
        let a = decide_finite_with(&s, &f, &env, &limits());
        let b = decide_finite_with(&s, &f, &flipped, &limits());
        if let (Ok(a), Ok(b)) = (a, b) {
            prop_assert_eq!(a, b);
        }
    }

    #[test]
    fn reductions_have_lattice_shape(seed in any::<u64>()) {
        let (f, _) = formula(seed);
        for mode in [Mode::Tplus, Mode::Ec] {
            if let Ok(r) = reduce(&f, mode) {
                let mut g_symbols = false;
                r.chi.visit(&mut |x| {
                    if matches!(x, Formula::GEq(..) | Formula::GLeq(..)
                        | Formula::Exists(_, Sort::G, _) | Formula::Forall(_, Sort::G, _)) {
                        g_symbols = true;
                    }
                });
                prop_assert!(!g_symbols, "{}", r.chi);
                let whole = r.assemble();
                prop_assert!(sort_check(&whole, &whole.free_vars()).is_ok());
                prop_assert_eq!(r.k, r.terms.len());
            }
        }
    }

    #[test]
    fn positive_existential_formulas_stay_positive(seed in any::<u64>()) {
        let (f, _) = formula(seed);
        if f.is_positive_existential() {
            let r = reduce(&f, Mode::Tplus).unwrap();
            prop_assert!(r.assemble().is_positive_existential(), "{}", r.chi);
        }
    }

    #[test]
    fn lattice_elimination_is_quantifier_free(seed in any::<u64>()) {
        let mut rng = stream(seed, "ba-props");
        let s = generate::lattice_sentence(&mut rng, 3);
        let qf = ba_qe(&s).unwrap();
        prop_assert!(qf.is_quantifier_free());
        prop_assert!(qf.free_vars().keys().all(|v| s.free_vars().contains_key(v)));
    }

    #[test]
    fn decider_is_deterministic_and_ignores_bound_names(seed in any::<u64>()) {
        let sigma = sentence(seed);
        if let Ok(v) = decide_ec(&sigma) {
            prop_assert_eq!(decide_ec(&sigma).unwrap(), v);
            let renamed = rename_bound(&sigma, &mut 0);
            prop_assert_eq!(decide_ec(&renamed).unwrap(), v, "{}", renamed);
        }
    }
}
