//! Brute-force referees for tiny instances. Nothing here goes through the
//! linear program or the reduction engine.

use num_bigint::BigUint;
use num_traits::ToPrimitive;
use rayon::prelude::*;

use crate::bounds::exact_size;
use crate::constraints::ConstraintSystem;
use crate::error::{Error, Result};
use crate::zmod::{DigitSet, ProgressionRule};

pub const DEFAULT_POINT_CAP: u64 = 10_000_000;

/// Every vector of `S(D, n)`, in lexicographic order.
pub struct BalancedVectors {
    next: Option<Vec<u32>>,
}

impl Iterator for BalancedVectors {
    type Item = Vec<u32>;

    fn next(&mut self) -> Option<Vec<u32>> {
        let cur = self.next.take()?;
        let mut succ = cur.clone();
        if next_permutation(&mut succ) {
            self.next = Some(succ);
        }
        Some(cur)
    }
}

fn next_permutation(v: &mut [u32]) -> bool {
    let Some(i) = (1..v.len()).rev().find(|&i| v[i - 1] < v[i]) else {
        return false;
    };
    let j = (i..v.len()).rev().find(|&j| v[j] > v[i - 1]).expect("pivot exists");
    v.swap(i - 1, j);
    v[i..].reverse();
    true
}

fn point_count(d: &DigitSet, n: usize, cap: u64) -> Result<u64> {
    let count: BigUint = exact_size(d, n)?;
    match count.to_u64() {
        Some(c) if c <= cap => Ok(c),
        _ => Err(Error::CapExceeded {
            count: count.to_string(),
            cap,
        }),
    }
}

/// Streams `S(D, n)`; errors if `|D|` does not divide `n` or the set has
/// more than `cap` points.
pub fn materialize_s(d: &DigitSet, n: usize, cap: u64) -> Result<BalancedVectors> {
    point_count(d, n, cap)?;
    let each = n / d.len();
    let first: Vec<u32> = d.digits().iter().flat_map(|&x| std::iter::repeat_n(x, each)).collect();
    Ok(BalancedVectors { next: Some(first) })
}

fn in_s(v: &[u32], d: &DigitSet, each: usize) -> bool {
    let mut counts = vec![0usize; d.len()];
    for &x in v {
        match d.index_of(x) {
            Some(i) => counts[i] += 1,
            None => return false,
        }
    }
    counts.iter().all(|&c| c == each)
}

/// Whether coordinate `j` of a progression satisfies `rule`.
fn coordinate_ok(terms: &[u32], rule: ProgressionRule) -> bool {
    if terms.iter().all(|&t| t == terms[0]) {
        return true;
    }
    match rule {
        ProgressionRule::NonConstant => true,
        ProgressionRule::Distinct => {
            for a in 0..terms.len() {
                for b in a + 1..terms.len() {
                    if terms[a] == terms[b] {
                        return false;
                    }
                }
            }
            true
        }
    }
}

/// Representative of `{c, -c}`: keep `c` when its first nonzero entry is at
/// most its negation.
fn canonical_direction(c: &[u32], m: u32) -> bool {
    match c.iter().find(|&&x| x != 0) {
        Some(&x) => x <= m - x,
        None => false,
    }
}

/// Exhaustive scan for a `k`-term progression with nonzero difference
/// inside `S(D, n)`. Returns the first one in (start, second term) order
/// among differences taken up to sign.
pub fn find_ap_direct(
    d: &DigitSet,
    k: usize,
    n: usize,
    rule: ProgressionRule,
    cap: u64,
) -> Result<Option<Vec<Vec<u32>>>> {
    let points: Vec<Vec<u32>> = materialize_s(d, n, cap)?.collect();
    if points.len() < 2 {
        return Ok(None);
    }
    let each = n / d.len();
    let m = d.m();
    let found = points.par_iter().find_map_first(|u| {
        for w in &points {
            let c: Vec<u32> = w.iter().zip(u).map(|(b, a)| (b + m - a) % m).collect();
            if !canonical_direction(&c, m) {
                continue;
            }
            let mut terms = vec![u.clone(), w.clone()];
            let mut ok = true;
            for _ in 2..k {
                let prev = terms.last().expect("two terms");
                let next: Vec<u32> = prev.iter().zip(&c).map(|(a, b)| (a + b) % m).collect();
                if !in_s(&next, d, each) {
                    ok = false;
                    break;
                }
                terms.push(next);
            }
            if ok && (0..n).all(|j| coordinate_ok(&terms.iter().map(|t| t[j]).collect::<Vec<_>>(), rule)) {
                return Some(terms);
            }
        }
        None
    });
    Ok(found)
}

/// Checks from first principles that `vectors` is a `k`-term progression
/// with nonzero difference, every term in `S(D, n)`, every non-constant
/// coordinate allowed by `rule`.
pub fn verify_vector_ap(
    d: &DigitSet,
    k: usize,
    vectors: &[Vec<u32>],
    rule: ProgressionRule,
) -> std::result::Result<(), String> {
    if vectors.len() != k {
        return Err(format!("expected {k} vectors, got {}", vectors.len()));
    }
    let n = vectors[0].len();
    if n == 0 || !n.is_multiple_of(d.len()) {
        return Err(format!("dimension {n} is not a positive multiple of |D| = {}", d.len()));
    }
    let each = n / d.len();
    let m = d.m();
    for (i, v) in vectors.iter().enumerate() {
        if v.len() != n {
            return Err(format!("vector {i} has length {}", v.len()));
        }
        if v.iter().any(|&x| x >= m) {
            return Err(format!("vector {i} has an entry outside Z_{m}"));
        }
        if !in_s(v, d, each) {
            return Err(format!("vector {i} is not balanced over D"));
        }
    }
    let c: Vec<u32> = (0..n).map(|j| (vectors[1][j] + m - vectors[0][j]) % m).collect();
    if c.iter().all(|&x| x == 0) {
        return Err("common difference is zero".into());
    }
    for i in 1..k {
        for j in 0..n {
            if (vectors[i - 1][j] + c[j]) % m != vectors[i][j] {
                return Err(format!("step {i} breaks the progression at coordinate {j}"));
            }
        }
    }
    for j in 0..n {
        let terms: Vec<u32> = vectors.iter().map(|v| v[j]).collect();
        if !coordinate_ok(&terms, rule) {
            return Err(format!("coordinate {j} repeats a term"));
        }
    }
    Ok(())
}

/// Minimum-weight nonzero `x ∈ Z_{>=0}^ℓ` with `A x = 0` and `Σ x <= cap`,
/// by iterative deepening. Each branch must fix the first unbalanced row,
/// and every column is at least the first one chosen.
pub fn bounded_integer_kernel(system: &ConstraintSystem, weight_cap: u32) -> Option<Vec<u64>> {
    let a = &system.matrix;
    let (rows, cols) = (a.rows(), a.cols());
    if cols == 0 {
        return None;
    }
    let entry = |r: usize, c: usize| a.get(r, c).to_i64().expect("integer constraint matrix");
    let col_entries: Vec<Vec<(usize, i64)>> = (0..cols)
        .map(|c| (0..rows).filter_map(|r| Some((r, entry(r, c))).filter(|(_, v)| *v != 0)).collect())
        .collect();
    let max_abs = col_entries
        .iter()
        .flat_map(|e| e.iter().map(|(_, v)| v.abs()))
        .max()
        .unwrap_or(0);
    let mut fixers: Vec<[Vec<usize>; 2]> = vec![[Vec::new(), Vec::new()]; rows];
    for (c, e) in col_entries.iter().enumerate() {
        for &(r, v) in e {
            fixers[r][usize::from(v > 0)].push(c);
        }
    }

    struct Dfs<'a> {
        col_entries: &'a [Vec<(usize, i64)>],
        fixers: &'a [[Vec<usize>; 2]],
        max_abs: i64,
        y: Vec<i64>,
        x: Vec<u64>,
    }

    impl Dfs<'_> {
        fn add(&mut self, c: usize, sign: i64) {
            for &(r, v) in &self.col_entries[c] {
                self.y[r] += sign * v;
            }
            if sign > 0 {
                self.x[c] += 1;
            } else {
                self.x[c] -= 1;
            }
        }

        fn go(&mut self, remaining: u32, min_col: usize) -> bool {
            let Some(r) = self.y.iter().position(|&v| v != 0) else {
                return true;
            };
            if remaining == 0 || self.y.iter().any(|v| v.abs() > self.max_abs * remaining as i64) {
                return false;
            }
            // y[r] > 0 needs a column with a negative entry at r.
            let fixers = &self.fixers[r][usize::from(self.y[r] < 0)];
            let start = fixers.partition_point(|&c| c < min_col);
            for &c in &fixers[start..] {
                self.add(c, 1);
                if self.go(remaining - 1, min_col) {
                    return true;
                }
                self.add(c, -1);
            }
            false
        }
    }

    for weight in 1..=weight_cap {
        for first in 0..cols {
            let mut dfs = Dfs {
                col_entries: &col_entries,
                fixers: &fixers,
                max_abs,
                y: vec![0; rows],
                x: vec![0; cols],
            };
            dfs.add(first, 1);
            if dfs.go(weight - 1, first) {
                return Some(dfs.x);
            }
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constraints::{build_system, PairScheme};

    #[test]
    fn small_balanced_sets() {
        let d = DigitSet::new(5, [0, 1]).unwrap();
        let pts: Vec<_> = materialize_s(&d, 2, DEFAULT_POINT_CAP).unwrap().collect();
        assert_eq!(pts, vec![vec![0, 1], vec![1, 0]]);
        let d = DigitSet::new(5, [0, 1, 2]).unwrap();
        let pts: Vec<_> = materialize_s(&d, 3, DEFAULT_POINT_CAP).unwrap().collect();
        assert_eq!(pts.len(), 6);
        assert!(pts.windows(2).all(|w| w[0] < w[1]));
        let d = DigitSet::interval(11, 0, 5).unwrap();
        assert_eq!(materialize_s(&d, 6, DEFAULT_POINT_CAP).unwrap().count(), 720);
    }

    #[test]
    fn caps_and_divisibility_are_errors() {
        let d = DigitSet::interval(11, 0, 5).unwrap();
        assert!(matches!(materialize_s(&d, 12, 1000), Err(Error::CapExceeded { .. })));
        assert!(matches!(materialize_s(&d, 7, 1000), Err(Error::Divisibility { .. })));
    }

    #[test]
    fn direct_search() {
        let d = DigitSet::interval(11, 0, 5).unwrap();
        assert!(find_ap_direct(&d, 3, 6, ProgressionRule::Distinct, DEFAULT_POINT_CAP)
            .unwrap()
            .is_none());
        let d = DigitSet::interval(5, 0, 3).unwrap();
        let hit = [4, 8]
            .iter()
            .find_map(|&n| find_ap_direct(&d, 3, n, ProgressionRule::Distinct, DEFAULT_POINT_CAP).unwrap())
            .expect("non-admissible set has a progression at a tiny dimension");
        verify_vector_ap(&d, 3, &hit, ProgressionRule::Distinct).unwrap();
        // A single point cannot host a progression.
        let d = DigitSet::new(5, [2]).unwrap();
        assert!(find_ap_direct(&d, 3, 3, ProgressionRule::Distinct, DEFAULT_POINT_CAP)
            .unwrap()
            .is_none());
    }

    #[test]
    fn verifier_rejects_malformed_progressions() {
        let d = DigitSet::new(5, [0, 1, 2]).unwrap();
        let good = vec![vec![0, 1, 2], vec![1, 2, 0], vec![2, 0, 1]];
        // Z_5: 0,1,2 then 2,3,4 is the real continuation, so this is not an AP.
        assert!(verify_vector_ap(&d, 3, &good, ProgressionRule::Distinct).is_err());
        let constant = vec![vec![0, 1, 2]; 3];
        assert!(verify_vector_ap(&d, 3, &constant, ProgressionRule::Distinct).is_err());
        assert!(verify_vector_ap(&d, 3, &constant[..2], ProgressionRule::Distinct).is_err());
    }

    #[test]
    fn kernel_oracle() {
        let d = DigitSet::interval(11, 0, 5).unwrap();
        let s = build_system(&d, 3, PairScheme::FirstToAll).unwrap();
        assert!(bounded_integer_kernel(&s, 4).is_none());
        let s = build_system(&DigitSet::new(7, [1]).unwrap(), 3, PairScheme::FirstToAll).unwrap();
        assert!(bounded_integer_kernel(&s, 8).is_none());
        let d = DigitSet::interval(7, 0, 4).unwrap();
        let s = build_system(&d, 3, PairScheme::FirstToAll).unwrap();
        let x = bounded_integer_kernel(&s, 8).unwrap();
        assert!(s.is_kernel_vector(&x));
        assert!(x.iter().sum::<u64>() <= 6);
    }
}
