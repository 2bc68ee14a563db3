//! Maximum admissible digit sets modulo `p` by depth-first extension.
//!
//! Subsets of an admissible set are admissible, so only admissible sets
//! are extended, each by digits larger than its maximum. The first-level
//! subtrees `{a, …}` run on the rayon pool with private state and are
//! merged in order, so results never depend on scheduling.

pub mod cache;
pub mod expected;

use std::collections::{BTreeMap, HashSet};
use std::sync::Arc;
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::{Serialize, Serializer};

use crate::bounds::construct_for;
use crate::constraints::ConstraintSystem;
use crate::error::{Error, Result};
use crate::feasex::{check_admissible_with, decide_cone, verify_farkas, CheckOptions, Method};
use crate::reduce::{reduce, verify_trace, InitialMatrix, Outcome};
use crate::zmod::{DigitSet, Modulus};

pub use cache::{CachedVerdict, VerdictCache, CACHE_ENV};
pub use expected::{expected_row, expected_rows, ExpectedRow, RowStatus};

#[derive(Clone)]
pub struct SearchOptions {
    /// Count every maximum set; otherwise stop at the first one of each size.
    pub count: bool,
    pub budget: Option<Duration>,
    pub jobs: Option<usize>,
    pub check: CheckOptions,
    pub cache: Option<Arc<VerdictCache>>,
    pub allow_composite: bool,
    /// Re-derive the certificate of every counted maximum set.
    pub revalidate: bool,
    pub keep_max_sets: bool,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions {
            count: true,
            budget: None,
            jobs: None,
            check: CheckOptions::default(),
            cache: None,
            allow_composite: false,
            revalidate: true,
            keep_max_sets: false,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct MethodBreakdown {
    #[serde(rename = "reduce-A")]
    pub reduce_a: u64,
    #[serde(rename = "reduce-RREF")]
    pub reduce_rref: u64,
    /// Admissible by the program after both reductions got stuck.
    #[serde(rename = "lp-admissible")]
    pub lp_admissible: u64,
    #[serde(rename = "lp-witness")]
    pub lp_witness: u64,
    pub transfer: u64,
    pub cache_hits: u64,
}

impl MethodBreakdown {
    fn record(&mut self, admissible: bool, method: Method) {
        match (method, admissible) {
            (Method::ReduceA, _) => self.reduce_a += 1,
            (Method::ReduceRref, _) => self.reduce_rref += 1,
            (Method::Lp, true) => self.lp_admissible += 1,
            (Method::Lp, false) => self.lp_witness += 1,
            (Method::Transfer, _) => self.transfer += 1,
        }
    }

    fn merge(&mut self, o: &MethodBreakdown) {
        self.reduce_a += o.reduce_a;
        self.reduce_rref += o.reduce_rref;
        self.lp_admissible += o.lp_admissible;
        self.lp_witness += o.lp_witness;
        self.transfer += o.transfer;
        self.cache_hits += o.cache_hits;
    }

    pub fn checks(&self) -> u64 {
        self.reduce_a + self.reduce_rref + self.lp_admissible + self.lp_witness + self.transfer
    }
}

fn compact<S: Serializer>(d: &DigitSet, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&d.to_interval_notation())
}

fn compact_opt<S: Serializer>(d: &Option<DigitSet>, s: S) -> std::result::Result<S::Ok, S::Error> {
    match d {
        Some(d) => s.serialize_str(&d.to_interval_notation()),
        None => s.serialize_none(),
    }
}

fn compact_vec<S: Serializer>(v: &[DigitSet], s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(v.iter().map(DigitSet::to_interval_notation))
}

#[derive(Clone, Debug, Serialize)]
pub struct SearchReport {
    pub p: u32,
    pub k: usize,
    pub max_size: usize,
    /// Present when counting and the search completed.
    pub count_at_max: Option<u64>,
    /// Lexicographically first admissible set of maximum size.
    #[serde(serialize_with = "compact")]
    pub first_set: DigitSet,
    /// Lexicographically first maximum set with a reduction certificate.
    #[serde(serialize_with = "compact_opt")]
    pub first_reducible: Option<DigitSet>,
    pub method_breakdown: MethodBreakdown,
    pub elapsed_secs: f64,
    pub complete: bool,
    pub revalidated: Option<bool>,
    #[serde(serialize_with = "compact_vec", skip_serializing_if = "Vec::is_empty")]
    pub max_sets: Vec<DigitSet>,
}

impl SearchReport {
    /// `size` or `>=size`.
    pub fn cell(&self) -> String {
        if self.complete {
            self.max_size.to_string()
        } else {
            format!(">={}", self.max_size)
        }
    }

    pub fn to_text(&self) -> String {
        let mut out = format!(
            "p={} k={} max_size={} count={} complete={}\nfirst_set {}\n",
            self.p,
            self.k,
            self.cell(),
            self.count_at_max.map_or("-".into(), |c| c.to_string()),
            self.complete,
            self.first_set.to_interval_notation()
        );
        if let Some(d) = &self.first_reducible {
            out.push_str(&format!("first_reducible {}\n", d.to_interval_notation()));
        }
        let b = &self.method_breakdown;
        out.push_str(&format!(
            "methods reduce-A={} reduce-RREF={} lp-admissible={} lp-witness={} transfer={} cache-hits={}\n",
            b.reduce_a, b.reduce_rref, b.lp_admissible, b.lp_witness, b.transfer, b.cache_hits
        ));
        if let Some(ok) = self.revalidated {
            out.push_str(&format!("revalidated {ok}\n"));
        }
        out
    }
}

struct Judge<'a> {
    k: usize,
    opts: &'a SearchOptions,
    /// Digit masks that already host a progression; every superset does too.
    obstructions: Vec<u64>,
    stats: MethodBreakdown,
}

impl Judge<'_> {
    fn judge(&mut self, d: &DigitSet) -> Result<(bool, Method)> {
        let mask = d.mask().expect("search moduli fit a mask");
        if self.obstructions.iter().any(|&o| o & !mask == 0) {
            self.stats.record(false, Method::Transfer);
            return Ok((false, Method::Transfer));
        }
        let rule = self.opts.check.rule;
        if let Some(cache) = &self.opts.cache {
            if let Some(v) = cache.get(d, self.k, rule) {
                self.stats.cache_hits += 1;
                self.stats.record(v.admissible, v.method);
                return Ok((v.admissible, v.method));
            }
        }
        let system = ConstraintSystem::build(d, self.k, self.opts.check.scheme, rule)?;
        let (admissible, method) = self.decide(&system)?;
        self.stats.record(admissible, method);
        if let Some(cache) = &self.opts.cache {
            cache.insert(d, self.k, rule, CachedVerdict { admissible, method })?;
        }
        Ok((admissible, method))
    }

    fn decide(&mut self, system: &ConstraintSystem) -> Result<(bool, Method)> {
        if reduce(system, InitialMatrix::A)?.outcome == Outcome::Reduced {
            return Ok((true, Method::ReduceA));
        }
        if reduce(system, InitialMatrix::Rref)?.outcome == Outcome::Reduced {
            return Ok((true, Method::ReduceRref));
        }
        let r = decide_cone(system)?;
        match r.witness {
            None => Ok((true, Method::Lp)),
            Some(w) => {
                if !system.is_kernel_vector(&w) {
                    return Err(Error::InvalidWitness("program returned a non-kernel vector".into()));
                }
                let mut support = 0u64;
                for (v, &c) in system.progressions.iter().zip(&w) {
                    if c > 0 {
                        for &t in &v.terms {
                            support |= 1 << t;
                        }
                    }
                }
                self.obstructions.push(support);
                Ok((false, Method::Lp))
            }
        }
    }
}

#[derive(Default)]
struct Subtree {
    best: usize,
    count: u64,
    first: Option<Vec<u32>>,
    first_reducible: Option<Vec<u32>>,
    max_sets: Vec<(Vec<u32>, Method)>,
    stats: MethodBreakdown,
    truncated: bool,
}

struct Walker<'a> {
    modulus: Modulus,
    judge: Judge<'a>,
    deadline: Option<Instant>,
    out: Subtree,
    /// Sizes below this are never recorded.
    floor: usize,
}

impl Walker<'_> {
    fn record(&mut self, digits: &[u32], method: Method) {
        let size = digits.len();
        if size < self.floor {
            return;
        }
        let o = &mut self.out;
        if size > o.best {
            o.best = size;
            o.count = 0;
            o.first = None;
            o.first_reducible = None;
            o.max_sets.clear();
        }
        if size == o.best {
            o.count += 1;
            if o.first.is_none() {
                o.first = Some(digits.to_vec());
            }
            if o.first_reducible.is_none() && matches!(method, Method::ReduceA | Method::ReduceRref) {
                o.first_reducible = Some(digits.to_vec());
            }
            if self.judge.opts.count {
                o.max_sets.push((digits.to_vec(), method));
            }
        }
    }

    fn walk(&mut self, digits: &mut Vec<u32>) -> Result<()> {
        let p = self.modulus.get();
        let last = *digits.last().expect("nonempty prefix");
        for next in last + 1..p {
            if self.deadline.is_some_and(|t| Instant::now() >= t) {
                self.out.truncated = true;
                return Ok(());
            }
            let reach = digits.len() + (p - next) as usize;
            let target = self.out.best.max(self.floor);
            if reach < target || (!self.judge.opts.count && reach <= self.out.best) {
                return Ok(());
            }
            digits.push(next);
            let d = DigitSet::with_modulus(self.modulus, digits.iter().copied())?;
            let (admissible, method) = self.judge.judge(&d)?;
            if admissible {
                self.record(digits, method);
                self.walk(digits)?;
            }
            digits.pop();
        }
        Ok(())
    }
}

fn run_subtree(modulus: Modulus, k: usize, root: u32, opts: &SearchOptions, deadline: Option<Instant>, floor: usize) -> Result<Subtree> {
    let mut w = Walker {
        modulus,
        judge: Judge {
            k,
            opts,
            obstructions: Vec::new(),
            stats: MethodBreakdown::default(),
        },
        deadline,
        out: Subtree::default(),
        floor,
    };
    let d = DigitSet::with_modulus(modulus, [root])?;
    let (admissible, method) = w.judge.judge(&d)?;
    if admissible {
        w.record(&[root], method);
        w.walk(&mut vec![root])?;
    }
    w.out.stats = std::mem::take(&mut w.judge.stats);
    Ok(w.out)
}

fn validate_modulus(p: u32, k: usize, allow_composite: bool) -> Result<Modulus> {
    let modulus = Modulus::new(p)?;
    if !modulus.is_prime() && !allow_composite {
        return Err(Error::Hypothesis(format!("{p} is not prime; composite moduli need an explicit opt-in")));
    }
    if p > 64 {
        return Err(Error::Hypothesis(format!("search supports moduli up to 64, got {p}")));
    }
    if k < 3 {
        return Err(Error::InvalidLength(k));
    }
    Ok(modulus)
}

fn in_pool<T: Send>(jobs: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match jobs {
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::Hypothesis(format!("cannot start {n} workers: {e}")))?;
            Ok(pool.install(f))
        }
        None => Ok(f()),
    }
}

fn explore(modulus: Modulus, k: usize, opts: &SearchOptions, floor: usize) -> Result<(Vec<Subtree>, Instant)> {
    let start = Instant::now();
    let deadline = opts.budget.map(|b| start + b);
    let p = modulus.get();
    let parts = in_pool(opts.jobs, || {
        (0..p)
            .into_par_iter()
            .map(|a| run_subtree(modulus, k, a, opts, deadline, floor))
            .collect::<Result<Vec<_>>>()
    })??;
    Ok((parts, start))
}

/// Largest admissible digit sets modulo `p` for progression length `k`.
pub fn search_max(p: u32, k: usize, opts: &SearchOptions) -> Result<SearchReport> {
    let modulus = validate_modulus(p, k, opts.allow_composite)?;
    let (parts, start) = explore(modulus, k, opts, 0)?;
    let best = parts.iter().map(|s| s.best).max().unwrap_or(0);
    let mut method_breakdown = MethodBreakdown::default();
    let mut count = 0u64;
    let mut first = None;
    let mut first_reducible = None;
    let mut max_sets = Vec::new();
    let mut truncated = false;
    for s in parts {
        method_breakdown.merge(&s.stats);
        truncated |= s.truncated;
        if s.best != best {
            continue;
        }
        count += s.count;
        first = first.or(s.first);
        first_reducible = first_reducible.or(s.first_reducible);
        max_sets.extend(s.max_sets);
    }
    let to_set = |v: Vec<u32>| DigitSet::with_modulus(modulus, v);
    let first_set = to_set(first.expect("singletons are admissible"))?;
    let complete = !truncated;
    let revalidated = if opts.count && opts.revalidate {
        let ok = in_pool(opts.jobs, || {
            max_sets
                .par_iter()
                .map(|(digits, method)| revalidate(modulus, k, digits, *method, opts.check))
                .collect::<Result<Vec<bool>>>()
        })??;
        Some(ok.into_iter().all(|b| b))
    } else {
        None
    };
    Ok(SearchReport {
        p,
        k,
        max_size: best,
        count_at_max: (opts.count && complete).then_some(count),
        first_set,
        first_reducible: if opts.count && complete {
            first_reducible.map(to_set).transpose()?
        } else {
            None
        },
        method_breakdown,
        elapsed_secs: start.elapsed().as_secs_f64(),
        complete,
        revalidated,
        max_sets: if opts.keep_max_sets {
            max_sets.into_iter().map(|(d, _)| to_set(d)).collect::<Result<_>>()?
        } else {
            Vec::new()
        },
    })
}

/// Rebuilds the certificate of an admissible set from scratch and checks it.
fn revalidate(modulus: Modulus, k: usize, digits: &[u32], method: Method, check: CheckOptions) -> Result<bool> {
    let d = DigitSet::with_modulus(modulus, digits.iter().copied())?;
    let system = ConstraintSystem::build(&d, k, check.scheme, check.rule)?;
    Ok(match method {
        Method::ReduceA | Method::ReduceRref => {
            let init = if method == Method::ReduceA {
                InitialMatrix::A
            } else {
                InitialMatrix::Rref
            };
            let trace = reduce(&system, init)?;
            trace.outcome == Outcome::Reduced && verify_trace(&system, &trace)
        }
        Method::Lp => {
            let r = decide_cone(&system)?;
            r.trivial && r.farkas.as_deref().is_some_and(|y| verify_farkas(&system, y))
        }
        Method::Transfer => false,
    })
}

/// Every admissible set of the given size modulo `p`, in lexicographic order.
pub fn admissible_sets_of_size(p: u32, k: usize, size: usize, opts: &SearchOptions) -> Result<Vec<DigitSet>> {
    let modulus = validate_modulus(p, k, opts.allow_composite)?;
    let mut opts = opts.clone();
    opts.count = true;
    let (parts, _) = explore(modulus, k, &opts, size)?;
    if parts.iter().any(|s| s.truncated) {
        return Err(Error::Hypothesis("budget exhausted before enumeration finished".into()));
    }
    let mut out = Vec::new();
    for s in parts {
        for (digits, _) in s.max_sets.into_iter().filter(|(d, _)| d.len() == size) {
            out.push(DigitSet::with_modulus(modulus, digits)?);
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct OrbitStats {
    pub p: u32,
    pub k: usize,
    pub size: usize,
    pub sets: usize,
    pub orbits: usize,
    /// Orbit size to the number of orbits of that size.
    pub orbit_sizes: BTreeMap<usize, usize>,
}

/// Partitions the admissible sets of `size` into orbits of `x -> ax + b`.
pub fn affine_orbit_count(p: u32, k: usize, size: usize, opts: &SearchOptions) -> Result<OrbitStats> {
    let sets = admissible_sets_of_size(p, k, size, opts)?;
    let modulus = Modulus::new(p)?;
    let units: Vec<u32> = modulus.units().collect();
    let mut seen: HashSet<DigitSet> = HashSet::new();
    let mut orbit_sizes = BTreeMap::new();
    let mut orbits = 0;
    for d in &sets {
        if seen.contains(d) {
            continue;
        }
        let mut orbit = HashSet::new();
        for &a in &units {
            for b in 0..p {
                orbit.insert(d.affine_image(a, b));
            }
        }
        orbits += 1;
        *orbit_sizes.entry(orbit.len()).or_insert(0) += 1;
        seen.extend(orbit);
    }
    Ok(OrbitStats {
        p,
        k,
        size,
        sets: sets.len(),
        orbits,
        orbit_sizes,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct RowCheck {
    pub p: u32,
    pub k: usize,
    pub pass: bool,
    pub mismatches: Vec<String>,
    /// Observations that are not failures.
    pub notes: Vec<String>,
    pub report: SearchReport,
}

/// Runs the search and diffs it against a reference row.
pub fn verify_table_row(p: u32, k: usize, expected: &ExpectedRow, opts: &SearchOptions) -> Result<RowCheck> {
    let report = search_max(p, k, opts)?;
    let mut mismatches = Vec::new();
    let mut notes = Vec::new();
    if expected.p != p || expected.k != k {
        mismatches.push(format!("reference row is for ({}, {})", expected.p, expected.k));
    }
    let found = report.max_size;
    if report.complete {
        if expected.exact && found != expected.max_size {
            mismatches.push(format!("max_size {found}, expected {}", expected.max_size));
        }
        if !expected.exact && found < expected.max_size {
            mismatches.push(format!("max_size {found}, expected at least {}", expected.max_size));
        }
        if let (Some(want), Some(got)) = (expected.count, report.count_at_max) {
            if want != got && found == expected.max_size {
                mismatches.push(format!("count {got}, expected {want}"));
            }
        }
    } else if found < expected.max_size {
        notes.push(format!("budget ran out at size {found}, below {}", expected.max_size));
    }
    match &expected.first_set {
        Some(d) => {
            let v = check_admissible_with(d, k, opts.check)?;
            if !v.admissible {
                mismatches.push(format!("reference set {} is not admissible", d.to_interval_notation()));
            }
            let system = ConstraintSystem::build(d, k, opts.check.scheme, opts.check.rule)?;
            let reduces = |init| -> Result<bool> { Ok(reduce(&system, init)?.outcome == Outcome::Reduced) };
            for label in &expected.initial {
                let init = if label == "A" { InitialMatrix::A } else { InitialMatrix::Rref };
                if !reduces(init)? {
                    mismatches.push(format!("reference set does not reduce with initial {label}"));
                }
            }
            if expected.status == RowStatus::Starred
                && (reduces(InitialMatrix::A)? || reduces(InitialMatrix::Rref)?)
            {
                mismatches.push("starred reference set reduces".into());
            }
            if report.complete && report.count_at_max.is_some() {
                match &report.first_reducible {
                    Some(r) if r == d => {}
                    Some(r) => notes.push(format!(
                        "first reducible maximum set is {}; reference lists {}",
                        r.to_interval_notation(),
                        d.to_interval_notation()
                    )),
                    None => notes.push("no maximum set reduces".into()),
                }
            }
        }
        None => notes.push(format!(
            "reference set unverifiable as printed; size {} checked only against the table",
            expected.max_size
        )),
    }
    if let Some(size) = expected.parenthetical {
        match construct_for(p, k) {
            Ok(d) if d.len() == size => {}
            Ok(d) => mismatches.push(format!("construction has size {}, table prints ({size})", d.len())),
            Err(e) => mismatches.push(format!("no construction for a printed ({size}): {e}")),
        }
    }
    Ok(RowCheck {
        p,
        k,
        pass: mismatches.is_empty(),
        mismatches,
        notes,
        report,
    })
}

/// Table 1 layout: one row per `p`, one column per `k`.
pub fn table_csv(reports: &[SearchReport]) -> String {
    let mut ps: Vec<u32> = reports.iter().map(|r| r.p).collect();
    let mut ks: Vec<usize> = reports.iter().map(|r| r.k).collect();
    ps.sort_unstable();
    ps.dedup();
    ks.sort_unstable();
    ks.dedup();
    let mut out = String::from("p");
    for k in &ks {
        out.push_str(&format!(",{k}"));
    }
    out.push('\n');
    for p in ps {
        out.push_str(&p.to_string());
        for &k in &ks {
            out.push(',');
            if let Some(r) = reports.iter().find(|r| r.p == p && r.k == k) {
                out.push_str(&r.cell());
            }
        }
        out.push('\n');
    }
    out
}
