//! Bounded witness search for existential sentences in the periodic model.
//!
//! A quantifier-free formula is evaluated pointwise, so its truth at a tuple of
//! `2^k`-periodic functions equals its truth in `Stan(Q^(2^k))` at the lifted
//! vectors. The search therefore reuses the finite oracle.

use rand::seq::SliceRandom;
use thiserror::Error;

use crate::algebra::{FinStdStructure, GroupVector};
use crate::oracle::{eval_qf, Assignment, OracleError};
use crate::periodic::{normalize, PeriodicFn};
use crate::rational::{q, Rational};
use crate::seed::{stream, DEFAULT_SEED};
use crate::syntax::{Formula, Sort};

#[derive(Debug, Error)]
pub enum WitnessError {
    #[error("not an existential sentence over the group sort: {0}")]
    NotExistential(String),
    #[error(transparent)]
    Oracle(#[from] OracleError),
}

#[derive(Clone, Debug)]
pub struct WitnessSearch {
    /// Largest period exponent tried.
    pub max_k: u32,
    pub coefficients: Vec<Rational>,
    /// Candidates tried per period before giving up on it.
    pub budget_per_period: u64,
    pub seed: u64,
}

impl Default for WitnessSearch {
    fn default() -> Self {
        WitnessSearch {
            max_k: 6,
            coefficients: vec![q(-2, 1), q(-1, 1), q(0, 1), q(1, 2), q(1, 1), q(2, 1)],
            budget_per_period: 20_000,
            seed: DEFAULT_SEED,
        }
    }
}

/// Splits `∃a1 … ∃am. ψ` with `ψ` quantifier-free and every `ai` group-sorted.
pub fn existential_prefix(phi: &Formula) -> Option<(Vec<String>, &Formula)> {
    let mut vars = Vec::new();
    let mut body = phi;
    while let Formula::Exists(v, Sort::G, inner) = body {
        vars.push(v.clone());
        body = inner;
    }
    (!vars.is_empty() && body.is_quantifier_free()).then_some((vars, body))
}

pub fn is_existential_over_group(phi: &Formula) -> bool {
    phi.is_sentence() && existential_prefix(phi).is_some()
}

/// A witness tuple of periodic functions, if one is found within the bounds.
pub fn find_witness(
    phi: &Formula,
    search: &WitnessSearch,
) -> Result<Option<Vec<(String, PeriodicFn)>>, WitnessError> {
    let (vars, body) = existential_prefix(phi)
        .filter(|_| phi.is_sentence())
        .ok_or_else(|| WitnessError::NotExistential(phi.to_string()))?;
    let coeffs = &search.coefficients;
    let mut rng = stream(search.seed, "witness");
    for k in 0..=search.max_k {
        let width = 1usize << k;
        let s = FinStdStructure::new(width).expect("width >= 1");
        let slots = width * vars.len();
        let exhaustive = (coeffs.len() as f64).powi(slots as i32) <= search.budget_per_period as f64;
        let total = if exhaustive {
            (coeffs.len() as u64).pow(slots as u32)
        } else {
            search.budget_per_period
        };
        for case in 0..total {
            let digits: Vec<&Rational> = if exhaustive {
                let mut c = case;
                (0..slots)
                    .map(|_| {
                        let d = &coeffs[(c % coeffs.len() as u64) as usize];
                        c /= coeffs.len() as u64;
                        d
                    })
                    .collect()
            } else {
                (0..slots).map(|_| coeffs.choose(&mut rng).expect("non-empty")).collect()
            };
            let mut env = Assignment::new();
            for (j, v) in vars.iter().enumerate() {
                let vals = digits[j * width..(j + 1) * width].iter().map(|r| (*r).clone()).collect();
                env = env.with_group(v, GroupVector::new(vals));
            }
            if eval_qf(&s, &env, body)? {
                let witness = vars
                    .iter()
                    .enumerate()
                    .map(|(j, v)| {
                        let vals = digits[j * width..(j + 1) * width].iter().map(|r| (*r).clone()).collect();
                        (v.clone(), normalize(k, vals).expect("valid length"))
                    })
                    .collect();
                return Ok(Some(witness));
            }
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse;

    #[test]
    fn weak_order_unit_has_constant_witness() {
        let phi = parse("exists v:G. 0 <= v & P(-v) = bot").unwrap();
        let w = find_witness(&phi, &WitnessSearch::default()).unwrap().unwrap();
        assert!(w[0].1.vals().iter().all(Rational::is_positive));
    }

    #[test]
    fn needs_a_nonconstant_period() {
        // Non-zero, non-negative, with a zero: impossible for constants.
        let phi = parse("exists v:G. 0 <= v & ~(v = 0) & ~(P(-v) = bot)").unwrap();
        let w = find_witness(&phi, &WitnessSearch::default()).unwrap().unwrap();
        assert!(w[0].1.k() >= 1);
    }

    #[test]
    fn false_sentences_have_no_witness() {
        let phi = parse("exists v:G. v = 0 & ~(v = 0)").unwrap();
        let small = WitnessSearch { max_k: 2, ..WitnessSearch::default() };
        assert!(find_witness(&phi, &small).unwrap().is_none());
    }

    #[test]
    fn rejects_universal_sentences() {
        let phi = parse("forall v:G. v = v").unwrap();
        assert!(find_witness(&phi, &WitnessSearch::default()).is_err());
    }
}
