//! `dvlg`: decide, reduce and evaluate sentences about densely valued ℓ-groups.
//!
//! Exit codes: 0 true or pass, 1 false or fail, 2 parse or sort error,
//! 3 outside the supported fragment, 4 resource limit.

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{anyhow, bail, Context as _};
use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use dvlg_core::algebra::{FinStdStructure, PointwiseOp};
use dvlg_core::ba::BaError;
use dvlg_core::corpus;
use dvlg_core::oracle::{decide_finite_with, Assignment, OracleError, OracleLimits};
use dvlg_core::periodic::{
    archimedean_bound, periodic_op, periodic_valuation, polar_equiv, shift, split_nonempty, PeriodicFn,
    PeriodicSet,
};
use dvlg_core::seed::DEFAULT_SEED;
use dvlg_core::selfcheck;
use dvlg_core::sw::{decide_ec_traced, reduce_traced, Mode, SwError};
use dvlg_core::syntax::{parse, Formula, ParseError};
use dvlg_core::witness::{find_witness, is_existential_over_group, WitnessError, WitnessSearch};

#[derive(Parser, Debug)]
#[command(name = "dvlg", version, about = "Decision tools for densely valued lattice-ordered groups")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Reduction mode.
    #[arg(long, global = true, default_value = "ec")]
    mode: Mode,

    /// Ground size for `eval`.
    #[arg(short = 'n', global = true, default_value_t = 2)]
    n: usize,

    /// Seed for randomized checks and witness sampling. DVLG_SEED overrides it.
    #[arg(long, global = true, default_value_t = DEFAULT_SEED)]
    seed: u64,

    /// Print one JSON report per input.
    #[arg(long, global = true)]
    json: bool,

    /// Read inputs from a file, separated by `;`.
    #[arg(long, global = true)]
    file: Option<PathBuf>,

    /// Include the reduction trace.
    #[arg(long, global = true)]
    trace: bool,

    /// Largest period exponent for periodic witness search.
    #[arg(long, global = true)]
    max_period: Option<u32>,

    /// Oracle limits, e.g. `max_n=4,max_cases=100000`.
    #[arg(long, global = true, value_name = "K=V,...")]
    limits: Option<String>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Decide a sentence in every existentially closed densely valued ℓ-group.
    Decide { formula: Option<String> },
    /// Print the reduction of a formula to the lattice sort.
    Reduce { formula: Option<String> },
    /// Evaluate a formula over Stan(Q^n).
    Eval {
        formula: Option<String>,
        /// Values of free variables: {"group": {x: ["1/2", ..]}, "lattice": {l: [0, 2]}}.
        #[arg(long)]
        env: Option<String>,
    },
    /// Computations in the model of 2^k-periodic rational sequences.
    Model {
        #[command(subcommand)]
        op: ModelOp,
    },
    /// Run the known-answer corpus and the acceptance checks.
    Selftest {
        /// Only these criteria, comma separated.
        #[arg(long, value_delimiter = ',')]
        criteria: Vec<u8>,
        /// Skip the randomized criteria and check only the corpus.
        #[arg(long)]
        corpus_only: bool,
    },
}

#[derive(Subcommand, Debug)]
enum ModelOp {
    /// Pointwise operation on periodic functions given as {"k", "vals"}.
    Op {
        kind: OpKind,
        f: String,
        g: Option<String>,
    },
    /// The valuation P(f).
    Valuation { f: String },
    /// A set strictly between bot and a nonempty set given as {"k", "mask"}.
    Split { c: String },
    /// Least n >= 1 such that n*f < g fails.
    Archimedean { f: String, g: String },
    /// The shift f(i + 1).
    Shift { f: String },
    /// Whether two non-negative functions have the same polar.
    Polar { a: String, b: String },
    /// Bounded search for periodic witnesses of an existential sentence.
    Witness { formula: Option<String> },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum OpKind {
    Add,
    Neg,
    Meet,
    Join,
}

impl From<OpKind> for PointwiseOp {
    fn from(k: OpKind) -> Self {
        match k {
            OpKind::Add => PointwiseOp::Add,
            OpKind::Neg => PointwiseOp::Neg,
            OpKind::Meet => PointwiseOp::Meet,
            OpKind::Join => PointwiseOp::Join,
        }
    }
}

#[derive(Serialize)]
struct Stats {
    elapsed_ms: u128,
    eliminations: usize,
    atoms: usize,
}

#[derive(Serialize)]
struct Report {
    command: &'static str,
    input: String,
    verdict: Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    trace: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    witness: Option<Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
    stats: Stats,
    #[serde(skip)]
    text: String,
    #[serde(skip)]
    code: u8,
}

impl Report {
    fn new(command: &'static str, input: &str) -> Self {
        Report {
            command,
            input: input.to_string(),
            verdict: Value::Null,
            trace: None,
            witness: None,
            error: None,
            stats: Stats {
                elapsed_ms: 0,
                eliminations: 0,
                atoms: 0,
            },
            text: String::new(),
            code: 0,
        }
    }

    fn boolean(mut self, v: bool) -> Self {
        self.verdict = Value::Bool(v);
        self.text = v.to_string();
        self.code = if v { 0 } else { 1 };
        self
    }

    fn failed(mut self, code: u8, message: String) -> Self {
        self.code = code;
        self.error = Some(message);
        self
    }
}

const PARSE: u8 = 2;
const UNSUPPORTED: u8 = 3;
const LIMIT: u8 = 4;

fn sw_code(e: &SwError) -> u8 {
    match e {
        SwError::UnsupportedFragment(_) | SwError::NotPrimitive(_) => UNSUPPORTED,
        SwError::ResourceLimit(_) => LIMIT,
        SwError::Ba(b) => ba_code(b),
        SwError::Sort(_) | SwError::NotSentence(_) => PARSE,
    }
}

fn ba_code(e: &BaError) -> u8 {
    match e {
        BaError::TooManyAtoms { .. } | BaError::DepthExceeded { .. } => LIMIT,
        BaError::NotLatticeSorted(_) | BaError::NotSentence(_) => PARSE,
    }
}

fn oracle_code(e: &OracleError) -> u8 {
    match e {
        OracleError::ResourceLimit(_) => LIMIT,
        _ => PARSE,
    }
}

fn witness_code(e: &WitnessError) -> u8 {
    match e {
        WitnessError::NotExistential(_) => UNSUPPORTED,
        WitnessError::Oracle(o) => oracle_code(o),
    }
}

const MAXIMA: OracleLimits = OracleLimits {
    max_n: 8,
    max_quantifiers: 16,
    max_atoms: 1024,
    max_cases: 100_000_000,
};

fn parse_limits(text: &str) -> anyhow::Result<OracleLimits> {
    let mut l = OracleLimits::default();
    for pair in text.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let (k, v) = pair
            .split_once('=')
            .ok_or_else(|| anyhow!("expected key=value, got `{pair}`"))?;
        let v: u64 = v.trim().parse().with_context(|| format!("limit `{k}`"))?;
        let within = |max: u64| {
            if v > max {
                bail!("limit `{k}` = {v} exceeds the maximum {max}");
            }
            Ok(v)
        };
        match k.trim() {
            "max_n" => l.max_n = within(MAXIMA.max_n as u64)? as usize,
            "max_quantifiers" => l.max_quantifiers = within(MAXIMA.max_quantifiers as u64)? as usize,
            "max_atoms" => l.max_atoms = within(MAXIMA.max_atoms as u64)? as usize,
            "max_cases" => l.max_cases = within(MAXIMA.max_cases)?,
            other => bail!("unknown limit `{other}`"),
        }
    }
    Ok(l)
}

/// Inline text, or the `;`-separated blocks of `--file`.
fn inputs(inline: Option<&str>, file: Option<&PathBuf>) -> anyhow::Result<Vec<String>> {
    match (inline, file) {
        (Some(_), Some(_)) => bail!("give either an inline formula or --file, not both"),
        (Some(s), None) => Ok(vec![s.to_string()]),
        (None, Some(p)) => {
            let text = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            let blocks: Vec<String> = text
                .split(';')
                .map(str::trim)
                .filter(|b| !b.is_empty())
                .map(String::from)
                .collect();
            if blocks.is_empty() {
                bail!("{} contains no formulas", p.display());
            }
            Ok(blocks)
        }
        (None, None) => bail!("no formula given"),
    }
}

struct Ctx {
    mode: Mode,
    n: usize,
    seed: u64,
    trace: bool,
    max_period: Option<u32>,
    limits: OracleLimits,
}

impl Ctx {
    fn search(&self, max_k: u32) -> WitnessSearch {
        WitnessSearch {
            max_k,
            seed: self.seed,
            ..WitnessSearch::default()
        }
    }
}

fn parsed(r: Report, text: &str) -> Result<(Report, Formula), Report> {
    match parse(text) {
        Ok(f) => {
            let mut r = r;
            r.stats.atoms = f.atom_count();
            Ok((r, f))
        }
        Err(e @ ParseError::Syntax { .. }) | Err(e @ ParseError::Sort(_)) => Err(r.failed(PARSE, e.to_string())),
    }
}

fn witness_value(w: &[(String, PeriodicFn)]) -> Value {
    Value::Object(w.iter().map(|(k, f)| (k.clone(), json!(f))).collect())
}

fn decide(ctx: &Ctx, text: &str) -> Report {
    let (mut r, phi) = match parsed(Report::new("decide", text), text) {
        Ok(x) => x,
        Err(r) => return r,
    };
    let outcome = match ctx.mode {
        Mode::Ec => decide_ec_traced(&phi),
        // The tplus reduction is sound in every model, so deciding its
        // lattice part still gives truth in the existentially closed models.
        Mode::Tplus => match phi.free_vars().into_keys().collect::<Vec<_>>() {
            free if !free.is_empty() => Err(SwError::NotSentence(free)),
            _ => reduce_traced(&phi, Mode::Tplus).and_then(|red| {
                dvlg_core::ba::ba_decide(&red.output.assemble())
                    .map(|v| (v, red))
                    .map_err(SwError::from)
            }),
        },
    };
    let (verdict, red) = match outcome {
        Ok(x) => x,
        Err(e) => return r.failed(sw_code(&e), e.to_string()),
    };
    r.stats.eliminations = red.eliminations;
    if ctx.trace {
        r.trace = Some(red.trace);
    }
    let mut r = r.boolean(verdict);
    if let Some(max_k) = ctx.max_period {
        if verdict && is_existential_over_group(&phi) {
            match find_witness(&phi, &ctx.search(max_k)) {
                Ok(Some(w)) => {
                    let shown: Vec<String> = w.iter().map(|(k, f)| format!("{k} = {f}")).collect();
                    r.text.push_str(&format!("\nwitness: {}", shown.join(", ")));
                    r.witness = Some(witness_value(&w));
                }
                Ok(None) => r.text.push_str("\nwitness: none within bounds"),
                Err(e) => return r.failed(witness_code(&e), e.to_string()),
            }
        }
    }
    r
}

fn reduce_cmd(ctx: &Ctx, text: &str) -> Report {
    let (mut r, phi) = match parsed(Report::new("reduce", text), text) {
        Ok(x) => x,
        Err(r) => return r,
    };
    match reduce_traced(&phi, ctx.mode) {
        Ok(red) => {
            r.stats.eliminations = red.eliminations;
            let out = &red.output;
            r.verdict = json!(out);
            let mut lines = vec![format!("k = {}", out.k)];
            for (i, t) in out.terms.iter().enumerate() {
                lines.push(format!("p{} := {t}", i + 1));
            }
            lines.push(format!("chi: {}", out.chi));
            r.text = lines.join("\n");
            if ctx.trace {
                r.trace = Some(red.trace);
            }
            r
        }
        Err(e) => r.failed(sw_code(&e), e.to_string()),
    }
}

fn eval(ctx: &Ctx, text: &str, env: Option<&str>) -> Report {
    let (r, phi) = match parsed(Report::new("eval", text), text) {
        Ok(x) => x,
        Err(r) => return r,
    };
    let s = match FinStdStructure::new(ctx.n) {
        Ok(s) => s,
        Err(e) => return r.failed(PARSE, e.to_string()),
    };
    let env = match env.map(|e| Assignment::from_json(e, ctx.n)).transpose() {
        Ok(e) => e.unwrap_or_default(),
        Err(e) => return r.failed(PARSE, format!("--env: {e}")),
    };
    match decide_finite_with(&s, &phi, &env, &ctx.limits) {
        Ok(v) => r.boolean(v),
        Err(e) => r.failed(oracle_code(&e), e.to_string()),
    }
}

fn from_json<T: serde::de::DeserializeOwned>(what: &str, text: &str) -> anyhow::Result<T> {
    serde_json::from_str(text).with_context(|| format!("parsing {what}"))
}

fn model(ctx: &Ctx, op: &ModelOp) -> anyhow::Result<Report> {
    let show = |r: Report, v: Value, text: String| Report { verdict: v, text, ..r };
    Ok(match op {
        ModelOp::Op { kind, f, g } => {
            let r = Report::new("model", &format!("{kind:?} {f} {}", g.as_deref().unwrap_or("")));
            let f: PeriodicFn = from_json("f", f)?;
            let g: Option<PeriodicFn> = g.as_deref().map(|g| from_json("g", g)).transpose()?;
            match periodic_op((*kind).into(), &f, g.as_ref()) {
                Ok(h) => show(r, json!(h), h.to_string()),
                Err(e) => r.failed(PARSE, e.to_string()),
            }
        }
        ModelOp::Valuation { f } => {
            let r = Report::new("model", f);
            let c = periodic_valuation(&from_json("f", f)?);
            show(r, json!(c), c.to_string())
        }
        ModelOp::Split { c } => {
            let r = Report::new("model", c);
            match split_nonempty(&from_json::<PeriodicSet>("c", c)?) {
                Ok(d) => show(r, json!(d), d.to_string()),
                Err(e) => r.failed(PARSE, e.to_string()),
            }
        }
        ModelOp::Archimedean { f, g } => {
            let r = Report::new("model", &format!("{f} {g}"));
            match archimedean_bound(&from_json("f", f)?, &from_json("g", g)?) {
                Ok(n) => show(r, json!(n), n.to_string()),
                Err(e) => r.failed(PARSE, e.to_string()),
            }
        }
        ModelOp::Shift { f } => {
            let r = Report::new("model", f);
            let h = shift(&from_json("f", f)?);
            show(r, json!(h), h.to_string())
        }
        ModelOp::Polar { a, b } => {
            let r = Report::new("model", &format!("{a} {b}"));
            match polar_equiv(&from_json("a", a)?, &from_json("b", b)?) {
                Ok(v) => r.boolean(v),
                Err(e) => r.failed(PARSE, e.to_string()),
            }
        }
        ModelOp::Witness { formula } => {
            let text = inputs(formula.as_deref(), None)?.remove(0);
            let (r, phi) = match parsed(Report::new("model", &text), &text) {
                Ok(x) => x,
                Err(r) => return Ok(r),
            };
            match find_witness(&phi, &ctx.search(ctx.max_period.unwrap_or(6))) {
                Ok(Some(w)) => {
                    let shown: Vec<String> = w.iter().map(|(k, f)| format!("{k} = {f}")).collect();
                    let mut r = r.boolean(true);
                    r.text = shown.join("\n");
                    r.witness = Some(witness_value(&w));
                    r
                }
                Ok(None) => {
                    let mut r = r.boolean(false);
                    r.text = "no witness within bounds".into();
                    r
                }
                Err(e) => r.failed(witness_code(&e), e.to_string()),
            }
        }
    })
}

fn selftest(ctx: &Ctx, criteria: &[u8], corpus_only: bool) -> anyhow::Result<Report> {
    for id in criteria {
        if !selfcheck::CRITERIA.contains(id) {
            bail!("no criterion {id}");
        }
    }
    let mut r = Report::new("selftest", &format!("seed {}", ctx.seed));
    let mut lines = Vec::new();
    let outcomes: Vec<_> = corpus::entries()
        .iter()
        .enumerate()
        .map(|(i, e)| corpus::check(i, e, &ctx.limits))
        .collect();
    for o in &outcomes {
        let tag = if o.passed() { "ok  " } else { "FAIL" };
        lines.push(format!("[{tag}] corpus {:>2} {}", o.index, o.formula));
        for p in &o.problems {
            lines.push(format!("       {p}"));
        }
    }
    let corpus_passed = outcomes.iter().filter(|o| o.passed()).count();
    lines.push(format!("corpus: {corpus_passed}/{} entries pass", outcomes.len()));
    let ids: Vec<u8> = match (corpus_only, criteria.is_empty()) {
        (true, _) => Vec::new(),
        (false, true) => selfcheck::CRITERIA.to_vec(),
        (false, false) => criteria.to_vec(),
    };
    let reports: Vec<_> = ids.iter().map(|&id| selfcheck::run(id, ctx.seed)).collect();
    for rep in &reports {
        lines.push(rep.line());
    }
    let criteria_passed = reports.iter().filter(|c| c.passed).count();
    if !reports.is_empty() {
        lines.push(format!("criteria: {criteria_passed}/{} pass", reports.len()));
    }
    let pass = corpus_passed == outcomes.len() && criteria_passed == reports.len();
    r.verdict = json!({ "passed": pass, "corpus": outcomes, "criteria": reports });
    r.text = lines.join("\n");
    r.code = if pass { 0 } else { 1 };
    Ok(r)
}

fn emit(r: &Report, as_json: bool) {
    if as_json {
        println!("{}", serde_json::to_string(r).expect("reports serialize"));
        return;
    }
    if let Some(t) = &r.trace {
        for line in t {
            println!("  {line}");
        }
    }
    match &r.error {
        Some(e) => eprintln!("error: {e}"),
        None => println!("{}", r.text),
    }
}

fn run(cli: &Cli) -> anyhow::Result<u8> {
    let seed = match std::env::var("DVLG_SEED") {
        Ok(s) => s.trim().parse().with_context(|| format!("DVLG_SEED=`{s}`"))?,
        Err(_) => cli.seed,
    };
    let ctx = Ctx {
        mode: cli.mode,
        n: cli.n,
        seed,
        trace: cli.trace,
        max_period: cli.max_period,
        limits: cli.limits.as_deref().map(parse_limits).transpose()?.unwrap_or_default(),
    };
    if ctx.n > ctx.limits.max_n {
        bail!("-n {} exceeds max_n = {}", ctx.n, ctx.limits.max_n);
    }
    if let Some(k) = ctx.max_period {
        if k > 6 {
            bail!("--max-period {k} exceeds the maximum 6");
        }
    }
    let file = cli.file.as_ref();
    let per_input = |f: &dyn Fn(&str) -> Report, inline: &Option<String>| -> anyhow::Result<Vec<Report>> {
        Ok(inputs(inline.as_deref(), file)?
            .iter()
            .map(|text| {
                let start = Instant::now();
                let mut r = f(text);
                r.stats.elapsed_ms = start.elapsed().as_millis();
                r
            })
            .collect())
    };
    let reports = match &cli.command {
        Command::Decide { formula } => per_input(&|t| decide(&ctx, t), formula)?,
        Command::Reduce { formula } => per_input(&|t| reduce_cmd(&ctx, t), formula)?,
        Command::Eval { formula, env } => per_input(&|t| eval(&ctx, t, env.as_deref()), formula)?,
        Command::Model { op } => {
            let start = Instant::now();
            let mut r = model(&ctx, op)?;
            r.stats.elapsed_ms = start.elapsed().as_millis();
            vec![r]
        }
        Command::Selftest { criteria, corpus_only } => {
            let start = Instant::now();
            let mut r = selftest(&ctx, criteria, *corpus_only)?;
            r.stats.elapsed_ms = start.elapsed().as_millis();
            vec![r]
        }
    };
    for r in &reports {
        emit(r, cli.json);
    }
    Ok(reports.iter().map(|r| r.code).max().unwrap_or(0))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(PARSE)
        }
    }
}
