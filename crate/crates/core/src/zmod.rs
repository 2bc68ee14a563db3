//! Residues modulo `m`, digit sets, and the one-dimensional progressions
//! that index the balance constraint system.

use std::fmt;

use num_integer::Integer;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A modulus `m >= 2` together with its least prime factor.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "u32", into = "u32")]
pub struct Modulus {
    m: u32,
    lpf: u32,
}

impl Modulus {
    pub fn new(m: u32) -> Result<Self> {
        if m < 2 {
            return Err(Error::InvalidModulus(m as u64));
        }
        Ok(Self {
            m,
            lpf: smallest_prime_divisor(m),
        })
    }

    #[inline]
    pub fn get(self) -> u32 {
        self.m
    }

    #[inline]
    pub fn least_prime_factor(self) -> u32 {
        self.lpf
    }

    pub fn is_prime(self) -> bool {
        self.lpf == self.m
    }

    #[inline]
    pub fn reduce(self, x: i64) -> u32 {
        x.rem_euclid(self.m as i64) as u32
    }

    /// Multiplicative units, ascending.
    pub fn units(self) -> impl Iterator<Item = u32> {
        let m = self.m;
        (1..m).filter(move |a| a.gcd(&m) == 1)
    }
}

impl TryFrom<u32> for Modulus {
    type Error = Error;
    fn try_from(m: u32) -> Result<Self> {
        Modulus::new(m)
    }
}

impl From<Modulus> for u32 {
    fn from(m: Modulus) -> u32 {
        m.m
    }
}

impl fmt::Display for Modulus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.m)
    }
}

fn smallest_prime_divisor(m: u32) -> u32 {
    if m.is_multiple_of(2) {
        return 2;
    }
    let mut p = 3u32;
    while (p as u64) * (p as u64) <= m as u64 {
        if m.is_multiple_of(p) {
            return p;
        }
        p += 2;
    }
    m
}

/// Smallest prime dividing `m`.
pub fn least_prime_factor(m: Modulus) -> u32 {
    m.least_prime_factor()
}

/// A nonempty subset of `Z_m`, stored as strictly increasing residues.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct DigitSet {
    modulus: Modulus,
    digits: Vec<u32>,
}

impl DigitSet {
    /// Builds a digit set from residues in any order; duplicates are merged.
    pub fn new(m: u32, digits: impl IntoIterator<Item = u32>) -> Result<Self> {
        let modulus = Modulus::new(m)?;
        Self::with_modulus(modulus, digits)
    }

    pub fn with_modulus(modulus: Modulus, digits: impl IntoIterator<Item = u32>) -> Result<Self> {
        let mut digits: Vec<u32> = digits.into_iter().collect();
        if let Some(&bad) = digits.iter().find(|&&d| d >= modulus.get()) {
            return Err(Error::DigitOutOfRange {
                digit: bad as u64,
                m: modulus.get(),
            });
        }
        digits.sort_unstable();
        digits.dedup();
        if digits.is_empty() {
            return Err(Error::EmptyDigitSet);
        }
        Ok(Self { modulus, digits })
    }

    /// The discrete interval `[a, b]`.
    pub fn interval(m: u32, a: u32, b: u32) -> Result<Self> {
        if a > b {
            return Err(Error::Parse(format!("empty interval {a}:{b}")));
        }
        Self::new(m, a..=b)
    }

    /// Parses the compact notation used in data files and on the command
    /// line: `;` or `,` separated items, each a residue `d` or an interval `a:b`.
    pub fn parse_compact(m: u32, s: &str) -> Result<Self> {
        let mut digits = Vec::new();
        for item in s.split([';', ',']).map(str::trim).filter(|t| !t.is_empty()) {
            if let Some((a, b)) = item.split_once(':') {
                let a = parse_residue(a)?;
                let b = parse_residue(b)?;
                if a > b {
                    return Err(Error::Parse(format!("empty interval {item}")));
                }
                digits.extend(a..=b);
            } else {
                digits.push(parse_residue(item)?);
            }
        }
        Self::new(m, digits)
    }

    /// Inverse of [`DigitSet::parse_compact`]: maximal runs become `a:b`.
    pub fn to_compact(&self) -> String {
        let mut out = Vec::new();
        for (a, b) in self.runs() {
            if a == b {
                out.push(a.to_string());
            } else {
                out.push(format!("{a}:{b}"));
            }
        }
        out.join(";")
    }

    /// Interval notation, e.g. `[0,6] ∪ {8}`.
    pub fn to_interval_notation(&self) -> String {
        let mut parts = Vec::new();
        let mut singles = Vec::new();
        let flush = |singles: &mut Vec<u32>, parts: &mut Vec<String>| {
            if !singles.is_empty() {
                let s: Vec<String> = singles.iter().map(u32::to_string).collect();
                parts.push(format!("{{{}}}", s.join(",")));
                singles.clear();
            }
        };
        for (a, b) in self.runs() {
            if b >= a + 2 {
                flush(&mut singles, &mut parts);
                parts.push(format!("[{a},{b}]"));
            } else {
                singles.extend(a..=b);
            }
        }
        flush(&mut singles, &mut parts);
        parts.join(" ∪ ")
    }

    fn runs(&self) -> Vec<(u32, u32)> {
        let mut runs: Vec<(u32, u32)> = Vec::new();
        for &d in &self.digits {
            match runs.last_mut() {
                Some((_, b)) if *b + 1 == d => *b = d,
                _ => runs.push((d, d)),
            }
        }
        runs
    }

    #[inline]
    pub fn modulus(&self) -> Modulus {
        self.modulus
    }

    #[inline]
    pub fn m(&self) -> u32 {
        self.modulus.get()
    }

    #[inline]
    pub fn digits(&self) -> &[u32] {
        &self.digits
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.digits.len()
    }

    /// Always false; digit sets are nonempty by construction.
    pub fn is_empty(&self) -> bool {
        self.digits.is_empty()
    }

    #[inline]
    pub fn contains(&self, d: u32) -> bool {
        self.digits.binary_search(&d).is_ok()
    }

    /// Position of `d` in the ascending digit list.
    #[inline]
    pub fn index_of(&self, d: u32) -> Option<usize> {
        self.digits.binary_search(&d).ok()
    }

    pub fn is_subset_of(&self, other: &DigitSet) -> bool {
        self.modulus == other.modulus && self.digits.iter().all(|&d| other.contains(d))
    }

    /// Bitmask with bit `d` set for every digit; `None` when `m > 64`.
    pub fn mask(&self) -> Option<u64> {
        (self.m() <= 64).then(|| self.digits.iter().fold(0u64, |acc, &d| acc | (1u64 << d)))
    }

    pub fn from_mask(modulus: Modulus, mask: u64) -> Result<Self> {
        Self::with_modulus(modulus, (0..64u32).filter(|&d| mask >> d & 1 == 1))
    }

    /// The set `a·D + b`.
    pub fn affine_image(&self, a: u32, b: u32) -> DigitSet {
        let m = self.m() as u64;
        let digits = self
            .digits
            .iter()
            .map(|&d| ((a as u64 * d as u64 + b as u64) % m) as u32);
        DigitSet::with_modulus(self.modulus, digits).expect("image of a nonempty set is nonempty")
    }

    pub fn with_digit(&self, d: u32) -> Result<DigitSet> {
        DigitSet::with_modulus(self.modulus, self.digits.iter().copied().chain([d]))
    }
}

fn parse_residue(s: &str) -> Result<u32> {
    s.trim()
        .parse::<u32>()
        .map_err(|_| Error::Parse(format!("not a residue: {s:?}")))
}

impl fmt::Display for DigitSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s: Vec<String> = self.digits.iter().map(u32::to_string).collect();
        write!(f, "{{{}}}", s.join(","))
    }
}

/// Which one-dimensional progressions count as non-trivial.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProgressionRule {
    /// The `k` terms must be pairwise distinct. For prime `m` this is the
    /// same as a nonzero difference when `k <= m`, and excludes everything
    /// when `k > m`.
    #[default]
    Distinct,
    /// Any nonzero difference; terms may repeat once the difference has
    /// additive order below `k`.
    NonConstant,
}

impl ProgressionRule {
    /// Whether a coordinate sequence of terms is a progression this rule keeps.
    pub fn accepts(self, terms: &[u32]) -> bool {
        match self {
            ProgressionRule::NonConstant => terms.windows(2).any(|w| w[0] != w[1]),
            ProgressionRule::Distinct => {
                let mut seen = terms.to_vec();
                seen.sort_unstable();
                seen.windows(2).all(|w| w[0] != w[1])
            }
        }
    }
}

/// A non-trivial `k`-term progression inside a digit set.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Progression {
    pub start: u32,
    pub diff: u32,
    pub terms: Vec<u32>,
}

impl Progression {
    pub fn new(m: Modulus, start: u32, diff: u32, k: usize) -> Self {
        let mm = m.get() as u64;
        let terms = (0..k as u64)
            .map(|i| ((start as u64 + i * diff as u64) % mm) as u32)
            .collect();
        Self { start, diff, terms }
    }

    #[inline]
    pub fn k(&self) -> usize {
        self.terms.len()
    }

    #[inline]
    pub fn last(&self) -> u32 {
        *self.terms.last().expect("k >= 3")
    }

    /// The same terms read backwards, as `(last, -diff)`.
    pub fn reversed(&self, m: Modulus) -> Progression {
        Progression::new(m, self.last(), m.get() - self.diff, self.k())
    }

    /// The `start,diff` key used in witness files.
    pub fn key(&self) -> String {
        format!("{},{}", self.start, self.diff)
    }
}

impl fmt::Display for Progression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s: Vec<String> = self.terms.iter().map(u32::to_string).collect();
        write!(f, "({})", s.join(", "))
    }
}

/// All non-trivial `k`-term progressions with every term in `d`, ordered
/// lexicographically by `(start, diff)`.
pub fn enumerate_progressions(d: &DigitSet, k: usize) -> Vec<Progression> {
    enumerate_progressions_with(d, k, ProgressionRule::default())
}

pub fn enumerate_progressions_with(d: &DigitSet, k: usize, rule: ProgressionRule) -> Vec<Progression> {
    let m = d.modulus();
    let mut out = Vec::new();
    for &start in d.digits() {
        for diff in 1..m.get() {
            let p = Progression::new(m, start, diff, k);
            if p.terms.iter().all(|&t| d.contains(t)) && rule.accepts(&p.terms) {
                out.push(p);
            }
        }
    }
    out
}

/// Finds `(a, b)` with `gcd(a, m) = 1` and `d2 = a·d1 + b`, preferring the
/// smallest `a`, then the smallest `b`.
pub fn is_affine_image(d1: &DigitSet, d2: &DigitSet) -> Option<(u32, u32)> {
    if d1.modulus() != d2.modulus() || d1.len() != d2.len() {
        return None;
    }
    let m = d1.modulus();
    m.units()
        .flat_map(|a| (0..m.get()).map(move |b| (a, b)))
        .find(|&(a, b)| d1.affine_image(a, b) == *d2)
}
