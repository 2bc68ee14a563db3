use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Duration;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use progfree_core::bounds::bound_report;
use progfree_core::feasex::{check_system, decide_cone_with, expand_witness, verify_farkas, DecideOptions, WitnessFile};
use progfree_core::oracle::verify_vector_ap;
use progfree_core::reduce::{reduce, verify_trace};
use progfree_core::search::{expected_row, search_max, table_csv, verify_table_row, SearchOptions, VerdictCache, CACHE_ENV};
use progfree_core::{
    CheckOptions, ConstraintSystem, DigitSet, Error, InitialMatrix, Method, Outcome, PairScheme, ProgressionRule, RatMatrix,
};

const ADMISSIBLE: u8 = 0;
const TOOL_ERROR: u8 = 1;
const USAGE: u8 = 2;
const NOT_ADMISSIBLE: u8 = 10;
const INCONCLUSIVE: u8 = 11;
const TABLE_DIFFERS: u8 = 12;

#[derive(Parser)]
#[command(name = "progfree", version, about = "Admissibility of balanced digit sets for k-term progressions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Decide whether a digit set is admissible.
    Check(CheckArgs),
    /// Find the largest admissible digit sets modulo p.
    Search(SearchArgs),
    /// Constructions and lower bounds for r_k(Z_m^n).
    Bound(BoundArgs),
    /// Emit or verify an explicit progression for a non-admissible set.
    Witness(WitnessArgs),
    /// Regenerate the table of maximum sizes and diff it against the bundled values.
    Table(TableArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum SchemeArg {
    FirstToAll,
    AllPairs,
}

#[derive(Clone, Copy, ValueEnum)]
enum RuleArg {
    Distinct,
    NonConstant,
}

#[derive(Args)]
struct SetArgs {
    #[arg(long)]
    m: u32,
    #[arg(long)]
    k: usize,
    /// Comma separated residues; may be repeated.
    #[arg(long)]
    digits: Vec<String>,
    /// Interval a:b; may be repeated, the union is taken.
    #[arg(long)]
    interval: Vec<String>,
    #[arg(long, value_enum, default_value = "first-to-all")]
    scheme: SchemeArg,
    #[arg(long, value_enum, default_value = "distinct")]
    rule: RuleArg,
}

impl SetArgs {
    fn digit_set(&self) -> Result<DigitSet, String> {
        let mut items: Vec<&str> = Vec::new();
        for d in &self.digits {
            items.extend(d.split(',').map(str::trim).filter(|s| !s.is_empty()));
        }
        for i in &self.interval {
            if !i.contains(':') {
                return Err(format!("interval {i:?} must look like a:b"));
            }
            items.push(i.trim());
        }
        if items.is_empty() {
            return Err("give --digits or --interval".into());
        }
        DigitSet::parse_compact(self.m, &items.join(",")).map_err(|e| e.to_string())
    }

    fn options(&self) -> CheckOptions {
        CheckOptions {
            scheme: match self.scheme {
                SchemeArg::FirstToAll => PairScheme::FirstToAll,
                SchemeArg::AllPairs => PairScheme::AllPairs,
            },
            rule: match self.rule {
                RuleArg::Distinct => ProgressionRule::Distinct,
                RuleArg::NonConstant => ProgressionRule::NonConstant,
            },
            minimize: false,
        }
    }

    fn system(&self) -> Result<ConstraintSystem, Failure> {
        let d = self.digit_set().map_err(Failure::Usage)?;
        if self.k < 3 {
            return Err(Failure::Usage(format!("k must be at least 3, got {}", self.k)));
        }
        let o = self.options();
        Ok(ConstraintSystem::build(&d, self.k, o.scheme, o.rule)?)
    }
}

#[derive(Clone, Copy, ValueEnum, PartialEq, Eq)]
enum MethodArg {
    Auto,
    Reduce,
    Lp,
}

#[derive(Clone, Copy, ValueEnum, PartialEq, Eq)]
enum Format {
    Json,
    Text,
    Csv,
}

#[derive(Args)]
struct CheckArgs {
    #[command(flatten)]
    set: SetArgs,
    #[arg(long, value_enum, default_value = "auto")]
    method: MethodArg,
    /// A, rref, or custom:FILE holding an invertible transform T (B = TA).
    #[arg(long)]
    initial: Option<String>,
    #[arg(long)]
    dump_matrix: bool,
    #[arg(long)]
    dump_trace: bool,
    /// Shrink the witness support before expanding it.
    #[arg(long)]
    minimize: bool,
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
}

#[derive(Args)]
struct SearchArgs {
    #[arg(long)]
    p: u32,
    #[arg(long)]
    k: usize,
    #[arg(long)]
    jobs: Option<usize>,
    /// Wall-clock budget in seconds.
    #[arg(long)]
    budget: Option<f64>,
    /// Count all maximum sets instead of stopping at the first.
    #[arg(long)]
    count: bool,
    #[arg(long, env = CACHE_ENV)]
    cache: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
    /// List every maximum set in the report.
    #[arg(long)]
    list: bool,
    #[arg(long)]
    allow_composite: bool,
    #[arg(long, value_enum, default_value = "distinct")]
    rule: RuleArg,
}

#[derive(Args)]
struct BoundArgs {
    #[arg(long)]
    m: u32,
    #[arg(long)]
    k: usize,
    #[arg(long)]
    n: usize,
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
}

#[derive(Args)]
struct WitnessArgs {
    #[command(flatten)]
    set: SetArgs,
    /// Include the explicit vectors of the progression.
    #[arg(long)]
    emit_vectors: bool,
    #[arg(long)]
    minimize: bool,
    /// Verify a witness file instead of computing one.
    #[arg(long)]
    verify: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct TableArgs {
    /// Primes in a range a:b or a comma list.
    #[arg(long, default_value = "5:13")]
    p: String,
    /// Lengths in a range a:b or a comma list.
    #[arg(long, default_value = "3:8")]
    k: String,
    #[arg(long)]
    diff: bool,
    #[arg(long)]
    jobs: Option<usize>,
    /// Wall-clock budget per (p, k) in seconds.
    #[arg(long)]
    budget: Option<f64>,
    #[arg(long, env = CACHE_ENV)]
    cache: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
}

enum Failure {
    Usage(String),
    Tool(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidModulus(_)
            | Error::DigitOutOfRange { .. }
            | Error::EmptyDigitSet
            | Error::InvalidLength(_)
            | Error::Parse(_)
            | Error::Hypothesis(_)
            | Error::Divisibility { .. } => Failure::Usage(e.to_string()),
            _ => Failure::Tool(e.to_string()),
        }
    }
}

fn print_json(v: &serde_json::Value) {
    println!("{}", serde_json::to_string_pretty(v).expect("json"));
}

fn parse_initial(spec: &str, system: &ConstraintSystem) -> Result<InitialMatrix, Failure> {
    match spec {
        "A" | "a" => Ok(InitialMatrix::A),
        "rref" | "RREF" => Ok(InitialMatrix::Rref),
        s => match s.strip_prefix("custom:") {
            Some(path) => {
                let text = std::fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{path}: {e}")))?;
                let t = RatMatrix::parse_dump(&text)?;
                let init = InitialMatrix::Custom(t);
                init.apply(system)?;
                Ok(init)
            }
            None => Err(Failure::Usage(format!("unknown initial matrix {s:?}; use A, rref or custom:FILE"))),
        },
    }
}

fn cmd_check(a: &CheckArgs) -> Result<u8, Failure> {
    let system = a.set.system()?;
    let d = &system.digit_set;
    if a.dump_matrix {
        print!("{}", system.matrix.to_dump());
    }
    let initial = a.initial.as_deref().map(|s| parse_initial(s, &system)).transpose()?;
    let mut out = json!({
        "m": d.m(),
        "k": system.k,
        "digits": d.to_interval_notation(),
        "progressions": system.num_columns(),
    });

    if a.method == MethodArg::Reduce || (a.method == MethodArg::Auto && matches!(initial, Some(InitialMatrix::Custom(_)))) {
        let inits = match &initial {
            Some(i) => vec![i.clone()],
            None => vec![InitialMatrix::A, InitialMatrix::Rref],
        };
        for init in inits {
            let trace = reduce(&system, init)?;
            if !verify_trace(&system, &trace) {
                return Err(Failure::Tool("reduction trace failed its own replay".into()));
            }
            if a.dump_trace {
                print!("{}", trace.to_text());
            }
            if trace.outcome == Outcome::Reduced {
                out["admissible"] = json!(true);
                out["method"] = json!(format!("reduce-{}", trace.initial.label()));
                out["steps"] = json!(trace.steps.len());
                return emit_check(a.format, out, ADMISSIBLE);
            }
        }
        if a.method == MethodArg::Reduce {
            out["admissible"] = serde_json::Value::Null;
            out["method"] = json!("reduce");
            out["outcome"] = json!("STUCK");
            return emit_check(a.format, out, INCONCLUSIVE);
        }
    }

    if a.method == MethodArg::Lp {
        let r = decide_cone_with(&system, DecideOptions { minimize: a.minimize })?;
        out["method"] = json!("lp");
        out["rank"] = json!(r.rank);
        out["lp_optimum"] = json!(r.lp_optimum.to_string());
        return match r.witness {
            None => {
                let y = r.farkas.unwrap_or_default();
                if !verify_farkas(&system, &y) {
                    return Err(Failure::Tool("dual multipliers fail to certify the empty cone".into()));
                }
                out["admissible"] = json!(true);
                emit_check(a.format, out, ADMISSIBLE)
            }
            Some(w) => {
                let e = expand_witness(&system, &w)?;
                verify_vector_ap(d, system.k, &e.vectors, system.rule).map_err(Failure::Tool)?;
                out["admissible"] = json!(false);
                out["witness"] = serde_json::to_value(WitnessFile::new(&system, &w, &e, false)).expect("json");
                emit_check(a.format, out, NOT_ADMISSIBLE)
            }
        };
    }

    let v = check_system(&system, a.minimize)?;
    out["admissible"] = json!(v.admissible);
    out["method"] = json!(v.method.label());
    match &v.certificate {
        progfree_core::Certificate::Reduction(t) => {
            if a.dump_trace {
                print!("{}", t.to_text());
            }
            out["steps"] = json!(t.steps.len());
        }
        progfree_core::Certificate::Farkas { rank, lp_optimum, .. } => {
            if a.dump_trace {
                for init in [InitialMatrix::A, InitialMatrix::Rref] {
                    print!("{}", reduce(&system, init)?.to_text());
                }
            }
            out["rank"] = json!(rank);
            out["lp_optimum"] = json!(lp_optimum.to_string());
        }
        progfree_core::Certificate::Witness { witness, expanded } => {
            out["witness"] = serde_json::to_value(WitnessFile::new(&system, witness, expanded, false)).expect("json");
        }
    }
    debug_assert!(v.admissible || v.method == Method::Lp);
    emit_check(a.format, out, if v.admissible { ADMISSIBLE } else { NOT_ADMISSIBLE })
}

fn emit_check(format: Format, out: serde_json::Value, code: u8) -> Result<u8, Failure> {
    match format {
        Format::Json => print_json(&out),
        _ => {
            let verdict = match out["admissible"].as_bool() {
                Some(true) => "admissible",
                Some(false) => "not admissible",
                None => "inconclusive",
            };
            println!("{} mod {} k={}: {verdict} ({})", out["digits"].as_str().unwrap_or(""), out["m"], out["k"], out["method"].as_str().unwrap_or(""));
            if let Some(w) = out.get("witness") {
                println!("witness n={} x={}", w["n"], w["x"]);
            }
        }
    }
    Ok(code)
}

fn budget(secs: Option<f64>) -> Result<Option<Duration>, Failure> {
    secs.map(|s| Duration::try_from_secs_f64(s).map_err(|e| Failure::Usage(format!("bad budget: {e}"))))
        .transpose()
}

fn open_cache(path: &Option<PathBuf>) -> Result<Option<Arc<VerdictCache>>, Failure> {
    match path {
        Some(p) if !p.as_os_str().is_empty() => Ok(Some(Arc::new(VerdictCache::open(p)?))),
        _ => Ok(None),
    }
}

fn cmd_search(a: &SearchArgs) -> Result<u8, Failure> {
    let mut check = CheckOptions::default();
    if let RuleArg::NonConstant = a.rule {
        check.rule = ProgressionRule::NonConstant;
    }
    let opts = SearchOptions {
        count: a.count,
        budget: budget(a.budget)?,
        jobs: a.jobs,
        check,
        cache: open_cache(&a.cache)?,
        allow_composite: a.allow_composite,
        revalidate: true,
        keep_max_sets: a.list,
    };
    let r = search_max(a.p, a.k, &opts)?;
    match a.format {
        Format::Json => print_json(&serde_json::to_value(&r).expect("json")),
        Format::Csv => print!("{}", table_csv(std::slice::from_ref(&r))),
        Format::Text => {
            print!("{}", r.to_text());
            for d in &r.max_sets {
                println!("{}", d.to_interval_notation());
            }
        }
    }
    if r.revalidated == Some(false) {
        return Err(Failure::Tool("a maximum set failed certificate revalidation".into()));
    }
    Ok(0)
}

fn cmd_bound(a: &BoundArgs) -> Result<u8, Failure> {
    let r = bound_report(a.m, a.k, a.n)?;
    match a.format {
        Format::Json => print_json(&serde_json::to_value(&r).expect("json")),
        _ => print!("{}", r.to_text()),
    }
    Ok(0)
}

fn cmd_witness(a: &WitnessArgs) -> Result<u8, Failure> {
    let system = a.set.system()?;
    if let Some(path) = &a.verify {
        let text = std::fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
        let file: WitnessFile = serde_json::from_str(&text).map_err(|e| Failure::Usage(format!("bad witness file: {e}")))?;
        if file.digits != system.digit_set.digits() || file.m != system.digit_set.m() || file.k != system.k {
            return Err(Failure::Usage("witness file is for a different digit set".into()));
        }
        let w = file.witness_for(&system)?;
        let e = expand_witness(&system, &w)?;
        let vectors = file.vectors.as_ref().unwrap_or(&e.vectors);
        verify_vector_ap(&system.digit_set, system.k, vectors, system.rule)
            .map_err(|err| Failure::Tool(format!("witness rejected: {err}")))?;
        println!("witness verified: n={}", vectors[0].len());
        return Ok(NOT_ADMISSIBLE);
    }
    let r = decide_cone_with(&system, DecideOptions { minimize: a.minimize })?;
    let Some(w) = r.witness else {
        eprintln!("{} is admissible; no witness exists", system.digit_set.to_interval_notation());
        return Ok(ADMISSIBLE);
    };
    let e = expand_witness(&system, &w)?;
    verify_vector_ap(&system.digit_set, system.k, &e.vectors, system.rule).map_err(Failure::Tool)?;
    let file = WitnessFile::new(&system, &w, &e, a.emit_vectors);
    let text = serde_json::to_string_pretty(&file).expect("json");
    match &a.out {
        Some(p) => std::fs::write(p, text + "\n").map_err(|e| Failure::Tool(format!("{}: {e}", p.display())))?,
        None => println!("{text}"),
    }
    Ok(NOT_ADMISSIBLE)
}

fn parse_range(s: &str) -> Result<Vec<u32>, Failure> {
    let bad = || Failure::Usage(format!("bad range {s:?}"));
    let mut out = Vec::new();
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        match part.split_once(':') {
            Some((a, b)) => {
                let a: u32 = a.parse().map_err(|_| bad())?;
                let b: u32 = b.parse().map_err(|_| bad())?;
                out.extend(a..=b);
            }
            None => out.push(part.parse().map_err(|_| bad())?),
        }
    }
    out.sort_unstable();
    out.dedup();
    if out.is_empty() {
        return Err(bad());
    }
    Ok(out)
}

fn is_prime(n: u32) -> bool {
    n >= 2 && (2..).take_while(|d| d * d <= n).all(|d| !n.is_multiple_of(d))
}

fn cmd_table(a: &TableArgs) -> Result<u8, Failure> {
    let ps: Vec<u32> = parse_range(&a.p)?.into_iter().filter(|&p| is_prime(p)).collect();
    let ks = parse_range(&a.k)?;
    let opts = SearchOptions {
        count: true,
        budget: budget(a.budget)?,
        jobs: a.jobs,
        cache: open_cache(&a.cache)?,
        ..Default::default()
    };
    let mut reports = Vec::new();
    let mut rows = Vec::new();
    let mut diffs = 0usize;
    for &p in &ps {
        for &k in &ks {
            let k = k as usize;
            let expected = expected_row(p, k);
            match (&expected, a.diff) {
                (Some(e), true) => {
                    let c = verify_table_row(p, k, e, &opts)?;
                    if !c.pass {
                        diffs += 1;
                        for m in &c.mismatches {
                            eprintln!("diff ({p}, {k}): {m}");
                        }
                    }
                    rows.push(serde_json::to_value(&c).expect("json"));
                    reports.push(c.report);
                }
                (None, true) => {
                    eprintln!("({p}, {k}): no bundled reference");
                    let r = search_max(p, k, &opts)?;
                    rows.push(serde_json::to_value(&r).expect("json"));
                    reports.push(r);
                }
                _ => {
                    let r = search_max(p, k, &opts)?;
                    rows.push(serde_json::to_value(&r).expect("json"));
                    reports.push(r);
                }
            }
        }
    }
    match a.format {
        Format::Csv => print!("{}", table_csv(&reports)),
        Format::Json => print_json(&json!({ "table": table_csv(&reports), "rows": rows })),
        Format::Text => {
            print!("{}", table_csv(&reports));
            println!();
            for r in &reports {
                println!(
                    "p={:<3} k={} first={:<24} count={}",
                    r.p,
                    r.k,
                    r.first_set.to_interval_notation(),
                    r.count_at_max.map_or("-".into(), |c| c.to_string())
                );
            }
        }
    }
    if a.diff {
        eprintln!("{diffs} differing cells");
        if diffs > 0 {
            return Ok(TABLE_DIFFERS);
        }
    }
    Ok(0)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Check(a) => cmd_check(a),
        Command::Search(a) => cmd_search(a),
        Command::Bound(a) => cmd_bound(a),
        Command::Witness(a) => cmd_witness(a),
        Command::Table(a) => cmd_table(a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(USAGE)
        }
        Err(Failure::Tool(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(TOOL_ERROR)
        }
    }
}
