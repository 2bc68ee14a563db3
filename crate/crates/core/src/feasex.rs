//! Exact decision of whether `{x >= 0 : A x = 0}` contains a nonzero point,
//! integer witness extraction, expansion of a witness into an explicit
//! progression of vectors, and the full admissibility pipeline.
//!
//! The cone is scale invariant, so a nonzero rational point exists iff a
//! nonzero integer point does; a linear program over the normalised slice
//! `Σ x = 1` decides the question exactly. When the slice is empty the
//! optimal dual gives multipliers `y` with `yᵀA >= 1` entrywise, a direct
//! proof that no nonzero nonnegative kernel vector exists.

use indexmap::IndexMap;
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::constraints::{ConstraintSystem, PairScheme};
use crate::error::{Error, Result};
use crate::matrix::RatMatrix;
use crate::oracle;
use crate::rat::Rat;
use crate::reduce::{reduce, InitialMatrix, Outcome, ReductionTrace};
use crate::simplex::maximise_mass;
use crate::zmod::{DigitSet, ProgressionRule};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FeasibilityResult {
    pub trivial: bool,
    /// Primitive nonnegative integer kernel vector; present iff not trivial.
    pub witness: Option<Vec<u64>>,
    pub lp_optimum: Rat,
    pub rank: usize,
    /// Row multipliers `y` over `A` with `yᵀA >= 1`; present iff trivial.
    pub farkas: Option<Vec<Rat>>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct DecideOptions {
    /// Greedily shrink the witness support by re-solving restricted programs.
    pub minimize: bool,
}

pub fn decide_cone(system: &ConstraintSystem) -> Result<FeasibilityResult> {
    decide_cone_with(system, DecideOptions::default())
}

pub fn decide_cone_with(system: &ConstraintSystem, opts: DecideOptions) -> Result<FeasibilityResult> {
    let all: Vec<usize> = (0..system.num_columns()).collect();
    let mut result = decide_columns(system, &all)?;
    if opts.minimize {
        if let Some(w) = result.witness.take() {
            result.witness = Some(minimize_support(system, w)?);
        }
    }
    Ok(result)
}

/// Decides the cone restricted to `cols`; a witness is reported over all
/// columns of the system.
fn decide_columns(system: &ConstraintSystem, cols: &[usize]) -> Result<FeasibilityResult> {
    let a = system.matrix.select_columns(cols);
    if cols.is_empty() {
        return Ok(FeasibilityResult {
            trivial: true,
            witness: None,
            lp_optimum: Rat::zero(),
            rank: 0,
            farkas: Some(vec![Rat::zero(); a.rows()]),
        });
    }
    let (full, pivots, transform) = a.rref_with_transform();
    let rank = pivots.len();
    let r = if rank == 0 {
        RatMatrix::zeros(0, a.cols())
    } else {
        RatMatrix::from_rows((0..rank).map(|i| full.row(i).to_vec()).collect())?
    };
    let sol = maximise_mass(&r, &pivots)?;
    if sol.optimum.is_zero() {
        // Pull the dual back from rows of R to rows of A through E.
        let mut y = vec![Rat::zero(); a.rows()];
        for (i, yi) in sol.dual.iter().take(rank).enumerate() {
            if yi.is_zero() {
                continue;
            }
            for (row, acc) in y.iter_mut().enumerate() {
                let e = transform.get(i, row);
                if !e.is_zero() {
                    *acc = &*acc + &(yi * e);
                }
            }
        }
        let farkas = if cols.len() == system.num_columns() {
            y
        } else {
            Vec::new()
        };
        return Ok(FeasibilityResult {
            trivial: true,
            witness: None,
            lp_optimum: sol.optimum,
            rank,
            farkas: Some(farkas),
        });
    }
    let local = integer_primitive(&sol.x)?;
    let mut witness = vec![0u64; system.num_columns()];
    for (j, &c) in cols.iter().enumerate() {
        witness[c] = local[j];
    }
    if !system.is_kernel_vector(&witness) {
        return Err(Error::Lp("extracted point is not in the kernel".into()));
    }
    Ok(FeasibilityResult {
        trivial: false,
        witness: Some(witness),
        lp_optimum: sol.optimum,
        rank,
        farkas: None,
    })
}

/// Scales a nonnegative rational vector by the lcm of its denominators and
/// divides by the gcd of the result.
fn integer_primitive(x: &[Rat]) -> Result<Vec<u64>> {
    let lcm = x.iter().fold(BigInt::one(), |acc, v| acc.lcm(&v.denom()));
    let ints: Vec<BigInt> = x.iter().map(|v| v.numer() * (&lcm / v.denom())).collect();
    let g = ints.iter().fold(BigInt::zero(), |acc, v| acc.gcd(v));
    if g.is_zero() {
        return Err(Error::Lp("zero point reported as optimal".into()));
    }
    ints.iter()
        .map(|v| {
            (v / &g)
                .to_u64()
                .ok_or_else(|| Error::Lp(format!("witness entry {v} does not fit in u64")))
        })
        .collect()
}

fn minimize_support(system: &ConstraintSystem, mut witness: Vec<u64>) -> Result<Vec<u64>> {
    let mut i = 0;
    loop {
        let support: Vec<usize> = (0..witness.len()).filter(|&c| witness[c] > 0).collect();
        if i >= support.len() {
            return Ok(witness);
        }
        let trial: Vec<usize> = support.iter().copied().filter(|&c| c != support[i]).collect();
        match decide_columns(system, &trial)?.witness {
            Some(w) => {
                witness = w;
                i = 0;
            }
            None => i += 1,
        }
    }
}

/// Whether `y` certifies triviality: `yᵀA >= 1` on every column.
pub fn verify_farkas(system: &ConstraintSystem, y: &[Rat]) -> bool {
    let a = &system.matrix;
    if y.len() != a.rows() {
        return false;
    }
    (0..a.cols()).all(|c| {
        let s: Rat = (0..a.rows())
            .filter(|&r| !y[r].is_zero() && !a.get(r, c).is_zero())
            .map(|r| &y[r] * a.get(r, c))
            .sum();
        s >= Rat::one()
    })
}

/// `k` vectors of `Z_m^n` in arithmetic progression, each in `S(D, n)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExpandedWitness {
    pub n: usize,
    pub vectors: Vec<Vec<u32>>,
    pub diff: Vec<u32>,
}

/// Lays out one coordinate per unit of the witness, then pads with constant
/// coordinates so every digit occurs equally often.
pub fn expand_witness(system: &ConstraintSystem, witness: &[u64]) -> Result<ExpandedWitness> {
    if witness.len() != system.num_columns() {
        return Err(Error::InvalidWitness(format!(
            "length {} but the system has {} columns",
            witness.len(),
            system.num_columns()
        )));
    }
    if witness.iter().all(|&w| w == 0) {
        return Err(Error::InvalidWitness("zero vector".into()));
    }
    if witness.iter().fold(0u64, |g, &w| g.gcd(&w)) != 1 {
        return Err(Error::InvalidWitness("entries share a common factor".into()));
    }
    if !system.is_kernel_vector(witness) {
        return Err(Error::InvalidWitness("not in the kernel of A".into()));
    }
    let d = &system.digit_set;
    let k = system.k;
    let mut vectors: Vec<Vec<u32>> = vec![Vec::new(); k];
    for (v, &count) in system.progressions.iter().zip(witness) {
        for _ in 0..count {
            for (i, vec) in vectors.iter_mut().enumerate() {
                vec.push(v.terms[i]);
            }
        }
    }
    let mut counts = vec![0usize; d.len()];
    for &t in &vectors[0] {
        counts[d.index_of(t).expect("term in D")] += 1;
    }
    let top = *counts.iter().max().expect("nonempty");
    for (idx, &c) in counts.iter().enumerate() {
        let digit = d.digits()[idx];
        for _ in c..top {
            for vec in vectors.iter_mut() {
                vec.push(digit);
            }
        }
    }
    let m = d.m();
    let diff = vectors[1].iter().zip(&vectors[0]).map(|(b, a)| (b + m - a) % m).collect();
    Ok(ExpandedWitness {
        n: d.len() * top,
        vectors,
        diff,
    })
}

/// How a verdict was reached.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    ReduceA,
    ReduceRref,
    Lp,
    /// Non-admissible because a subset already is.
    Transfer,
}

impl Method {
    pub fn label(self) -> &'static str {
        match self {
            Method::ReduceA => "reduce-A",
            Method::ReduceRref => "reduce-RREF",
            Method::Lp => "lp",
            Method::Transfer => "transfer",
        }
    }

    pub fn from_label(s: &str) -> Option<Method> {
        [Method::ReduceA, Method::ReduceRref, Method::Lp, Method::Transfer]
            .into_iter()
            .find(|m| m.label() == s)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Certificate {
    Reduction(ReductionTrace),
    Farkas { multipliers: Vec<Rat>, rank: usize, lp_optimum: Rat },
    Witness { witness: Vec<u64>, expanded: ExpandedWitness },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Verdict {
    pub admissible: bool,
    pub method: Method,
    pub certificate: Certificate,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct CheckOptions {
    pub scheme: PairScheme,
    pub rule: ProgressionRule,
    pub minimize: bool,
}

pub fn check_admissible(d: &DigitSet, k: usize) -> Result<Verdict> {
    check_admissible_with(d, k, CheckOptions::default())
}

pub fn check_admissible_with(d: &DigitSet, k: usize, opts: CheckOptions) -> Result<Verdict> {
    let system = ConstraintSystem::build(d, k, opts.scheme, opts.rule)?;
    check_system(&system, opts.minimize)
}

/// Reduction with `A`, then with its RREF, then the exact program.
pub fn check_system(system: &ConstraintSystem, minimize: bool) -> Result<Verdict> {
    for (init, method) in [(InitialMatrix::A, Method::ReduceA), (InitialMatrix::Rref, Method::ReduceRref)] {
        let trace = reduce(system, init)?;
        if trace.outcome == Outcome::Reduced {
            return Ok(Verdict {
                admissible: true,
                method,
                certificate: Certificate::Reduction(trace),
            });
        }
    }
    let result = decide_cone_with(system, DecideOptions { minimize })?;
    match result.witness {
        None => {
            let multipliers = result.farkas.unwrap_or_default();
            if !verify_farkas(system, &multipliers) {
                return Err(Error::Lp("dual multipliers fail to certify the empty cone".into()));
            }
            Ok(Verdict {
                admissible: true,
                method: Method::Lp,
                certificate: Certificate::Farkas {
                    multipliers,
                    rank: result.rank,
                    lp_optimum: result.lp_optimum,
                },
            })
        }
        Some(witness) => {
            let expanded = expand_witness(system, &witness)?;
            oracle::verify_vector_ap(&system.digit_set, system.k, &expanded.vectors, system.rule)
                .map_err(|e| Error::InvalidWitness(format!("expansion failed re-verification: {e}")))?;
            Ok(Verdict {
                admissible: false,
                method: Method::Lp,
                certificate: Certificate::Witness { witness, expanded },
            })
        }
    }
}

/// The witness file: `{"digits", "m", "k", "x": {"start,diff": count}, "n", "vectors"}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WitnessFile {
    pub digits: Vec<u32>,
    pub m: u32,
    pub k: usize,
    pub x: IndexMap<String, u64>,
    pub n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vectors: Option<Vec<Vec<u32>>>,
}

impl WitnessFile {
    pub fn new(system: &ConstraintSystem, witness: &[u64], expanded: &ExpandedWitness, with_vectors: bool) -> Self {
        let x = system
            .progressions
            .iter()
            .zip(witness)
            .filter(|(_, &c)| c > 0)
            .map(|(p, &c)| (p.key(), c))
            .collect();
        WitnessFile {
            digits: system.digit_set.digits().to_vec(),
            m: system.digit_set.m(),
            k: system.k,
            x,
            n: expanded.n,
            vectors: with_vectors.then(|| expanded.vectors.clone()),
        }
    }

    /// Rebuilds the column vector for `system`.
    pub fn witness_for(&self, system: &ConstraintSystem) -> Result<Vec<u64>> {
        let mut w = vec![0u64; system.num_columns()];
        for (key, &count) in &self.x {
            let (s, d) = key
                .split_once(',')
                .ok_or_else(|| Error::Parse(format!("bad progression key {key:?}")))?;
            let s: u32 = s.parse().map_err(|_| Error::Parse(key.clone()))?;
            let d: u32 = d.parse().map_err(|_| Error::Parse(key.clone()))?;
            let c = system
                .column_of(s, d)
                .ok_or_else(|| Error::InvalidWitness(format!("{key} is not a progression of D")))?;
            w[c] = count;
        }
        Ok(w)
    }
}
