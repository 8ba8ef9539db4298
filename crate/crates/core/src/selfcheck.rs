//! The acceptance suite: randomized and known-answer checks of every engine.
//!
//! Each check draws from its own named stream, so runs are reproducible from
//! the seed alone and checks do not perturb one another.

use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use rand::Rng as _;
use serde::Serialize;

use crate::algebra::{ac_split, patch, FinStdStructure, GroupVector, SubsetL};
use crate::ba::{ba_decide, interval_check};
use crate::generate::{self, Shape};
use crate::oracle::{decide_finite_with, fm_eliminate, LinConstraint, OracleLimits};
use crate::periodic::{
    alpha_embed, archimedean_bound, archimedean_ceiling, beta_embed, induced_lattice_auto,
    periodic_valuation, polar_equiv, shift, split_nonempty, zero_set, PeriodicFn, StageVector,
};
use crate::rational::{q, Rational};
use crate::seed::{stream, Rng};
use crate::sw::{decide_ec, reduce, Mode};
use crate::syntax::{parse, Formula};
use crate::witness::{find_witness, WitnessSearch};

#[derive(Clone, Debug, Serialize)]
pub struct CriterionReport {
    pub id: u8,
    pub name: &'static str,
    pub passed: bool,
    pub checked: usize,
    pub required: usize,
    pub failures: Vec<String>,
    #[serde(serialize_with = "millis")]
    pub elapsed: Duration,
    #[serde(serialize_with = "millis")]
    pub budget: Duration,
}

fn millis<S: serde::Serializer>(d: &Duration, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_u128(d.as_millis())
}

impl CriterionReport {
    pub fn line(&self) -> String {
        let verdict = if self.passed { "PASS" } else { "FAIL" };
        let mut s = format!(
            "[{verdict}] {:>2} {:<34} {}/{} checked, {} failures, {:.2}s (budget {}s)",
            self.id,
            self.name,
            self.checked,
            self.required,
            self.failures.len(),
            self.elapsed.as_secs_f64(),
            self.budget.as_secs()
        );
        if let Some(f) = self.failures.first() {
            s.push_str(&format!("\n       first failure: {f}"));
        }
        s
    }
}

struct Tally {
    checked: usize,
    failures: Vec<String>,
}

impl Tally {
    fn new() -> Self {
        Tally {
            checked: 0,
            failures: Vec::new(),
        }
    }

    fn check(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.checked += 1;
        if !ok && self.failures.len() < 20 {
            self.failures.push(what());
        }
    }

    fn fail(&mut self, what: String) {
        if self.failures.len() < 20 {
            self.failures.push(what);
        }
    }
}

fn finish(
    id: u8,
    name: &'static str,
    required: usize,
    budget: Duration,
    start: Instant,
    t: Tally,
) -> CriterionReport {
    let elapsed = start.elapsed();
    CriterionReport {
        id,
        name,
        passed: t.failures.is_empty() && t.checked >= required && elapsed <= budget,
        checked: t.checked,
        required,
        failures: t.failures,
        elapsed,
        budget,
    }
}

pub const CRITERIA: [u8; 10] = [1, 2, 3, 4, 5, 6, 7, 8, 9, 10];

pub fn run(id: u8, seed: u64) -> CriterionReport {
    match id {
        1 => reduction_vs_oracle(seed),
        2 => known_answers(),
        3 => ba_cross_check(seed),
        4 => constructions(seed),
        5 => valuation_axioms(seed),
        6 => directed_system(seed),
        7 => omitted_type_bound(seed),
        8 => polars_and_shift(seed),
        9 => fm_vs_grid(seed),
        10 => completeness_echo(),
        _ => panic!("no criterion {id}"),
    }
}

pub fn run_all(seed: u64) -> Vec<CriterionReport> {
    CRITERIA.iter().map(|&id| run(id, seed)).collect()
}

/// Limits for the reduct side, whose parameters and witness regions add quantifiers.
pub fn reduct_limits() -> OracleLimits {
    OracleLimits {
        max_quantifiers: 16,
        max_atoms: 512,
        ..OracleLimits::default()
    }
}

/// Formulas accepted for the reduction check: in the fragment, and small
/// enough for the oracle on both sides.
pub fn reduction_corpus(seed: u64, count: usize) -> Vec<Formula> {
    let mut rng = stream(seed, "reduction-corpus");
    let shape = Shape::default();
    let mut out = Vec::new();
    let s1 = FinStdStructure::new(1).expect("n >= 1");
    while out.len() < count {
        let phi = generate::formula(&mut rng, &shape);
        if phi.atom_count() > shape.max_atoms || phi.quantifier_count() == 0 {
            continue;
        }
        let Ok(r) = reduce(&phi, Mode::Tplus) else {
            continue;
        };
        let env = generate::assignment(&mut rng, 1, &phi.free_vars());
        let lhs = decide_finite_with(&s1, &phi, &env, &OracleLimits::default());
        let rhs = decide_finite_with(&s1, &r.assemble(), &env, &reduct_limits());
        if lhs.is_ok() && rhs.is_ok() {
            out.push(phi);
        }
    }
    out
}

fn reduction_vs_oracle(seed: u64) -> CriterionReport {
    let start = Instant::now();
    let mut t = Tally::new();
    let corpus = reduction_corpus(seed, 200);
    let mut rng = stream(seed, "reduction-assignments");
    for phi in &corpus {
        let reduct = match reduce(phi, Mode::Tplus) {
            Ok(r) => r.assemble(),
            Err(e) => {
                t.fail(format!("{phi}: {e}"));
                continue;
            }
        };
        for n in 1..=3 {
            let s = FinStdStructure::new(n).expect("n >= 1");
            for _ in 0..10 {
                let env = generate::assignment(&mut rng, n, &phi.free_vars());
                let lhs = decide_finite_with(&s, phi, &env, &OracleLimits::default());
                let rhs = decide_finite_with(&s, &reduct, &env, &reduct_limits());
                match (lhs, rhs) {
                    (Ok(a), Ok(b)) => t.check(a == b, || {
                        format!("n={n} {phi}  vs  {reduct}: {a} != {b} under {env:?}")
                    }),
                    (a, b) => t.fail(format!("n={n} {phi}: oracle {a:?} / {b:?}")),
                }
            }
        }
    }
    let mut r = finish(1, "reduction agrees with oracle", 6000, Duration::from_secs(300), start, t);
    r.required = 6000;
    r
}

/// The fixed decider suite with expected answers.
pub const KNOWN_ANSWERS: [(&str, bool); 9] = [
    ("forall v:G. exists b:G. b + b = v", true),
    ("forall v:G. exists b:G. 3*b = v", true),
    ("forall l:L. exists a:G. P(a) = l", true),
    ("forall x:L. bot < x -> exists y:L. bot < y & y < x", true),
    ("forall a:L. (a cup compl(a) = top) & (a cap compl(a) = bot)", true),
    (
        "forall v1,v2:G, w1,w2:L. w1 cap w2 << P(v1 - v2) cap P(v2 - v1) -> \
         exists a:G. w1 << P(a - v1) cap P(v1 - a) & w2 << P(a - v2) cap P(v2 - a)",
        true,
    ),
    ("exists v:G. 0 <= v & P(-v) = bot", true),
    ("forall a:G. 0 <= a -> exists g:G. (0 <= g & ~(g = 0) & a meet g = 0)", false),
    ("top = bot", false),
];

fn known_answers() -> CriterionReport {
    let start = Instant::now();
    let mut t = Tally::new();
    for (text, expected) in KNOWN_ANSWERS {
        match parse(text).map_err(|e| e.to_string()).and_then(|f| decide_ec(&f).map_err(|e| e.to_string())) {
            Ok(v) => t.check(v == expected, || format!("{text}: got {v}")),
            Err(e) => t.fail(format!("{text}: {e}")),
        }
    }
    finish(2, "known-answer decider suite", 9, Duration::from_secs(10), start, t)
}

fn ba_cross_check(seed: u64) -> CriterionReport {
    let start = Instant::now();
    let mut t = Tally::new();
    let mut rng = stream(seed, "ba-corpus");
    for _ in 0..100 {
        let s = generate::lattice_sentence(&mut rng, 3);
        match (ba_decide(&s), interval_check(&s, 3)) {
            (Ok(a), Ok(b)) => t.check(a == b, || format!("{s}: decide {a}, interval {b}")),
            (a, b) => t.fail(format!("{s}: {a:?} / {b:?}")),
        }
    }
    finish(3, "BA decision vs interval algebra", 100, Duration::from_secs(120), start, t)
}

fn overlap_agreeing_pair(rng: &mut Rng, n: usize) -> (SubsetL, SubsetL, GroupVector, GroupVector) {
    let c = generate::subset(rng, n);
    let d = generate::subset(rng, n);
    let f = generate::group_vector(rng, n);
    let mut g = generate::group_vector(rng, n);
    let both = c.meet(&d).expect("same width");
    let vals: Vec<Rational> = (0..n)
        .map(|i| if both.contains(i) { f.get(i).clone() } else { g.get(i).clone() })
        .collect();
    g = GroupVector::new(vals);
    (c, d, f, g)
}

fn constructions(seed: u64) -> CriterionReport {
    let start = Instant::now();
    let mut t = Tally::new();
    let mut rng = stream(seed, "constructions");
    for _ in 0..1000 {
        let n = rng.gen_range(1..=4);
        let (c, d, f, g) = overlap_agreeing_pair(&mut rng, n);
        match patch(&c, &d, &f, &g) {
            Ok(h) => {
                let ok = (0..n).all(|i| {
                    (!c.contains(i) || h.get(i) == f.get(i)) && (!d.contains(i) || h.get(i) == g.get(i))
                });
                t.check(ok, || format!("patch({c:?}, {d:?}, {f:?}, {g:?}) = {h:?}"));
            }
            Err(e) => t.fail(format!("patch rejected a valid instance: {e}")),
        }
    }
    for _ in 0..1000 {
        let n = rng.gen_range(1..=4);
        let (a, b) = disjoint_nonnegative_pair(&mut rng, n);
        let c = nonnegative_vector(&mut rng, n);
        match ac_split(&a, &b, &c) {
            Ok((f, g)) => {
                let zero = GroupVector::zero(n);
                let ok = f.add(&g).expect("w") == c
                    && f.is_nonnegative()
                    && g.is_nonnegative()
                    && f.meet(&g).expect("w") == zero
                    && a.meet(&g).expect("w") == zero
                    && f.meet(&b).expect("w") == zero;
                t.check(ok, || format!("ac_split({a:?}, {b:?}, {c:?}) = ({f:?}, {g:?})"));
            }
            Err(e) => t.fail(format!("ac_split rejected a valid instance: {e}")),
        }
    }
    finish(4, "patching and splitting", 2000, Duration::from_secs(60), start, t)
}

fn nonnegative_vector(rng: &mut Rng, n: usize) -> GroupVector {
    GroupVector::new((0..n).map(|_| generate::small_rational(rng).abs()).collect())
}

fn disjoint_nonnegative_pair(rng: &mut Rng, n: usize) -> (GroupVector, GroupVector) {
    let side = generate::subset(rng, n);
    let a = nonnegative_vector(rng, n);
    let b = nonnegative_vector(rng, n);
    let keep = |v: &GroupVector, on: bool| {
        GroupVector::new((0..n).map(|i| if side.contains(i) == on { v.get(i).clone() } else { Rational::zero() }).collect())
    };
    (keep(&a, true), keep(&b, false))
}

fn valuation_axioms(seed: u64) -> CriterionReport {
    let start = Instant::now();
    let mut t = Tally::new();
    let mut rng = stream(seed, "valuation");
    for _ in 0..1000 {
        let f = generate::group_vector(&mut rng, 3);
        let g = generate::group_vector(&mut rng, 3);
        let p = |x: &GroupVector| x.std_valuation();
        let pf = p(&f);
        let pg = p(&g);
        let scaling = (1..=5).all(|k| p(&f.scale(&Rational::from(k as i64))) == pf);
        let meet = p(&f.meet(&g).expect("w")) == pf.meet(&pg).expect("w");
        let join = p(&f.join(&g).expect("w")) == pf.join(&pg).expect("w");
        let affirm = !f.is_nonnegative() || pf.is_full();
        let detect = !pf.is_full() || f.is_nonnegative();
        let sum = p(&f.add(&g).expect("w"));
        let inclusion = pf.meet(&pg).expect("w").below(&sum).expect("w")
            && sum.below(&pf.join(&pg).expect("w")).expect("w");
        t.check(scaling && meet && join && affirm && detect && inclusion, || {
            format!("Stan(Q^3): f={f:?} g={g:?}")
        });
    }
    for _ in 0..1000 {
        let f = generate::periodic_fn(&mut rng, 4);
        let g = generate::periodic_fn(&mut rng, 4);
        let p = periodic_valuation;
        let pf = p(&f);
        let pg = p(&g);
        let scaling = (1..=5).all(|k| p(&f.scale(&Rational::from(k as i64))) == pf);
        let meet = p(&f.meet(&g)) == pf.meet(&pg);
        let join = p(&f.join(&g)) == pf.join(&pg);
        let affirm = !f.is_nonnegative() || pf.is_full();
        let detect = !pf.is_full() || f.is_nonnegative();
        let sum = p(&f.add(&g));
        let inclusion = pf.meet(&pg).below(&sum) && sum.below(&pf.join(&pg));
        t.check(scaling && meet && join && affirm && detect && inclusion, || {
            format!("periodic: f={f:?} g={g:?}")
        });
    }
    finish(5, "valuation axioms", 2000, Duration::from_secs(60), start, t)
}

fn directed_system(seed: u64) -> CriterionReport {
    let start = Instant::now();
    let mut t = Tally::new();
    let mut rng = stream(seed, "directed-system");
    for _ in 0..500 {
        let n: u32 = rng.gen_range(0..=5);
        let vals = (0..1usize << n).map(|_| generate::small_rational(&mut rng)).collect();
        let v = StageVector::new(n, vals).expect("valid length");
        let up = alpha_embed(&v);
        let square = up.valuation() == beta_embed(&v.valuation());
        let coherent = up.to_limit() == v.to_limit() && alpha_embed(&up).to_limit() == v.to_limit();
        t.check(square && coherent, || format!("stage element {v:?}"));
    }
    let mut split_checked = 0;
    while split_checked < 500 {
        let c = generate::periodic_set(&mut rng, 5);
        if c.is_empty() {
            continue;
        }
        split_checked += 1;
        match split_nonempty(&c) {
            Ok(d) => t.check(!d.is_empty() && d.below(&c) && d != c, || format!("split({c:?}) = {d:?}")),
            Err(e) => t.fail(format!("split({c:?}): {e}")),
        }
    }
    finish(6, "directed system and atomlessness", 1000, Duration::from_secs(60), start, t)
}

fn omitted_type_bound(seed: u64) -> CriterionReport {
    let start = Instant::now();
    let mut t = Tally::new();
    let mut rng = stream(seed, "archimedean");
    for _ in 0..500 {
        let f = generate::positive_periodic_fn(&mut rng, 5);
        let g = generate::positive_periodic_fn(&mut rng, 5);
        match archimedean_bound(&f, &g) {
            Ok(m) => {
                let ceiling = archimedean_ceiling(&f, &g);
                let times = |n: u64| f.scale(&Rational::from(n as i64));
                let least = !times(m).lt(&g) && (m == 1 || times(m - 1).lt(&g));
                t.check(m <= ceiling && least, || format!("f={f:?} g={g:?}: {m} vs {ceiling}"));
            }
            Err(e) => t.fail(format!("f={f:?} g={g:?}: {e}")),
        }
    }
    finish(7, "archimedean bound", 500, Duration::from_secs(60), start, t)
}

fn polars_and_shift(seed: u64) -> CriterionReport {
    let start = Instant::now();
    let mut t = Tally::new();
    let mut rng = stream(seed, "polars");
    for _ in 0..500 {
        let a = generate::nonnegative_periodic_fn(&mut rng, 3);
        let b = if rng.gen_bool(0.5) {
            // Same zero set, different values.
            let k = a.k();
            let vals = a
                .vals()
                .iter()
                .map(|x| if x.is_zero() { Rational::zero() } else { x * &q(rng.gen_range(1..=5), 2) })
                .collect();
            crate::periodic::normalize(k, vals).expect("valid length")
        } else {
            generate::nonnegative_periodic_fn(&mut rng, 3)
        };
        match polar_equiv(&a, &b) {
            Ok(eq) => {
                let zeros = zero_set(&a) == zero_set(&b);
                let probe = probe_polars(&mut rng, &a, &b);
                t.check(eq == zeros && (!eq || probe), || format!("a={a:?} b={b:?}: {eq} vs zero sets {zeros}"));
            }
            Err(e) => t.fail(format!("a={a:?} b={b:?}: {e}")),
        }
    }
    for _ in 0..500 {
        let f = generate::periodic_fn(&mut rng, 4);
        let lhs = periodic_valuation(&shift(&f));
        let rhs = induced_lattice_auto(&periodic_valuation(&f));
        t.check(lhs == rhs, || format!("shift law fails for {f:?}"));
    }
    finish(8, "polars and automorphism", 1000, Duration::from_secs(60), start, t)
}

// 200 samples: an element disjoint from `a` must be disjoint from `b`, and conversely.
fn probe_polars(rng: &mut Rng, a: &PeriodicFn, b: &PeriodicFn) -> bool {
    (0..200).all(|_| {
        let c = generate::nonnegative_periodic_fn(rng, 4);
        let zero = PeriodicFn::constant(Rational::zero());
        let disjoint = |x: &PeriodicFn| x.meet(&c) == zero;
        disjoint(a) == disjoint(b)
    })
}

/// One random single-variable elimination instance, as a DNF.
///
/// Every bound on `x0` lies in `[-3, 3]` on a half-integer grid, so the
/// `1/8` grid over `[-4, 4]` meets every non-empty solution set.
pub fn fm_instance(rng: &mut Rng) -> Vec<LinConstraint> {
    use crate::oracle::lra::{LinExpr, Rel};
    let count = rng.gen_range(1..=4);
    (0..count)
        .map(|_| {
            let cx: i64 = [1, -1, 2, -2][rng.gen_range(0..4)];
            let cy: i64 = rng.gen_range(-1..=1);
            let c0: i64 = rng.gen_range(-2..=2);
            let e = LinExpr::var(0)
                .scale(&Rational::from(cx))
                .add(&LinExpr::var(1).scale(&Rational::from(cy)))
                .add(&LinExpr::constant(Rational::from(c0)));
            let rel = [Rel::Ge, Rel::Gt, Rel::Eq][rng.gen_range(0..3)];
            LinConstraint::new(e, rel)
        })
        .collect()
}

fn fm_vs_grid(seed: u64) -> CriterionReport {
    let start = Instant::now();
    let mut t = Tally::new();
    let mut rng = stream(seed, "fm");
    let grid: Vec<Rational> = (-32..=32).map(|i| q(i, 8)).collect();
    for _ in 0..500 {
        let conj = fm_instance(&mut rng);
        let y: i64 = rng.gen_range(-1..=1);
        let yv = Rational::from(y);
        let eliminated = fm_eliminate(0, std::slice::from_ref(&conj));
        let at_y = BTreeMap::from([(1, yv.clone())]);
        let after = eliminated.iter().any(|c| c.iter().all(|k| k.holds(&at_y) == Some(true)));
        let before = grid.iter().any(|x| {
            let point = BTreeMap::from([(0, x.clone()), (1, yv.clone())]);
            conj.iter().all(|k| k.holds(&point) == Some(true))
        });
        t.check(after == before, || format!("{conj:?} at y={y}: fm {after}, grid {before}"));
    }
    finish(9, "Fourier-Motzkin vs grid search", 500, Duration::from_secs(60), start, t)
}

fn completeness_echo() -> CriterionReport {
    let start = Instant::now();
    let mut t = Tally::new();
    let search = WitnessSearch::default();
    for entry in crate::corpus::entries() {
        let Ok(phi) = parse(&entry.formula) else {
            t.fail(format!("corpus entry does not parse: {}", entry.formula));
            continue;
        };
        if !crate::witness::is_existential_over_group(&phi) {
            continue;
        }
        match decide_ec(&phi) {
            Ok(true) => match find_witness(&phi, &search) {
                Ok(Some(_)) => t.check(true, String::new),
                Ok(None) => t.check(false, || format!("no witness for {phi}")),
                Err(e) => t.fail(format!("{phi}: {e}")),
            },
            Ok(false) => {}
            Err(e) => t.fail(format!("{phi}: {e}")),
        }
    }
    finish(10, "periodic witnesses for true sentences", 1, Duration::from_secs(180), start, t)
}
