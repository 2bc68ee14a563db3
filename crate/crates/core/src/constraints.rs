//! The homogeneous balance system: one variable per progression, one row
//! per (digit, position pair), stating that the digit occurs equally often
//! at both positions.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::RatMatrix;
use crate::rat::Rat;
use crate::zmod::{enumerate_progressions_with, DigitSet, Progression, ProgressionRule};

/// Which position pairs `(i, j)` generate rows.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PairScheme {
    /// `(1, j)` for `2 <= j <= k`.
    #[default]
    FirstToAll,
    /// Every `(i, j)` with `i < j`.
    AllPairs,
}

impl PairScheme {
    /// 1-based position pairs.
    pub fn pairs(self, k: usize) -> Vec<(usize, usize)> {
        match self {
            PairScheme::FirstToAll => (2..=k).map(|j| (1, j)).collect(),
            PairScheme::AllPairs => (1..=k).flat_map(|i| (i + 1..=k).map(move |j| (i, j))).collect(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct ConstraintSystem {
    pub digit_set: DigitSet,
    pub k: usize,
    pub rule: ProgressionRule,
    pub scheme: PairScheme,
    /// Column order.
    pub progressions: Vec<Progression>,
    pub pairs: Vec<(usize, usize)>,
    /// Rows ordered pair-major, then by ascending digit.
    pub matrix: RatMatrix,
}

/// Builds the system with the default progression rule.
pub fn build_system(d: &DigitSet, k: usize, scheme: PairScheme) -> Result<ConstraintSystem> {
    ConstraintSystem::build(d, k, scheme, ProgressionRule::default())
}

impl ConstraintSystem {
    pub fn build(d: &DigitSet, k: usize, scheme: PairScheme, rule: ProgressionRule) -> Result<Self> {
        if k < 3 {
            return Err(Error::InvalidLength(k));
        }
        let progressions = enumerate_progressions_with(d, k, rule);
        let pairs = scheme.pairs(k);
        let nd = d.len();
        let mut matrix = RatMatrix::zeros(pairs.len() * nd, progressions.len());
        for (pi, &(i, j)) in pairs.iter().enumerate() {
            for (c, v) in progressions.iter().enumerate() {
                let (a, b) = (v.terms[i - 1], v.terms[j - 1]);
                if a == b {
                    continue;
                }
                let ra = pi * nd + d.index_of(a).expect("term in D");
                let rb = pi * nd + d.index_of(b).expect("term in D");
                matrix.set(ra, c, matrix.get(ra, c) + &Rat::one());
                matrix.set(rb, c, matrix.get(rb, c) - &Rat::one());
            }
        }
        Ok(Self {
            digit_set: d.clone(),
            k,
            rule,
            scheme,
            progressions,
            pairs,
            matrix,
        })
    }

    pub fn num_columns(&self) -> usize {
        self.progressions.len()
    }

    /// `(digit, (i, j))` for a row index.
    pub fn row_label(&self, row: usize) -> (u32, (usize, usize)) {
        let nd = self.digit_set.len();
        (self.digit_set.digits()[row % nd], self.pairs[row / nd])
    }

    pub fn column_of(&self, start: u32, diff: u32) -> Option<usize> {
        self.progressions
            .binary_search_by(|p| (p.start, p.diff).cmp(&(start, diff)))
            .ok()
    }

    /// Whether `x` (one count per column) satisfies every balance equation.
    pub fn is_kernel_vector(&self, x: &[u64]) -> bool {
        if x.len() != self.num_columns() {
            return false;
        }
        let xr: Vec<Rat> = x.iter().map(|&v| Rat::from_int(v as i64)).collect();
        self.matrix
            .mul_vec(&xr)
            .map(|y| y.iter().all(Rat::is_zero))
            .unwrap_or(false)
    }

    /// Re-indexes a vector over this system's columns onto `larger`, whose
    /// digit set must contain this one. Missing columns are zero.
    pub fn pad_into(&self, larger: &ConstraintSystem, x: &[u64]) -> Result<Vec<u64>> {
        if !self.digit_set.is_subset_of(&larger.digit_set) || self.k != larger.k {
            return Err(Error::DimensionMismatch("target system does not contain this one".into()));
        }
        let mut out = vec![0u64; larger.num_columns()];
        for (v, &count) in self.progressions.iter().zip(x) {
            if count == 0 {
                continue;
            }
            let c = larger
                .column_of(v.start, v.diff)
                .ok_or_else(|| Error::DimensionMismatch(format!("progression {v} missing")))?;
            out[c] = count;
        }
        Ok(out)
    }

    /// Counts the coordinate progressions of a vector progression
    /// `vectors[0], …, vectors[k-1]`, dropping constant coordinates. For an
    /// AP inside `S(D, n)` the result is a nonnegative kernel vector.
    pub fn project_vector_ap(&self, vectors: &[Vec<u32>]) -> Result<Vec<u64>> {
        if vectors.len() != self.k {
            return Err(Error::DimensionMismatch(format!(
                "expected {} vectors, got {}",
                self.k,
                vectors.len()
            )));
        }
        let n = vectors[0].len();
        let m = self.digit_set.m();
        let mut x = vec![0u64; self.num_columns()];
        #[allow(clippy::needless_range_loop)]
        for j in 0..n {
            let start = vectors[0][j];
            let second = vectors[1][j];
            if start == second {
                continue;
            }
            let diff = (second + m - start) % m;
            let c = self.column_of(start, diff).ok_or_else(|| {
                Error::InvalidWitness(format!("coordinate {j} is not a progression of the system"))
            })?;
            let terms = &self.progressions[c].terms;
            if vectors.iter().zip(terms).any(|(v, &t)| v[j] != t) {
                return Err(Error::InvalidWitness(format!("coordinate {j} is not arithmetic")));
            }
            x[c] += 1;
        }
        Ok(x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn appendix_shape_and_scheme() {
        let d = DigitSet::interval(11, 0, 5).unwrap();
        let s = build_system(&d, 3, PairScheme::FirstToAll).unwrap();
        assert_eq!((s.matrix.rows(), s.matrix.cols()), (12, 12));
        assert_eq!(s.row_label(0), (0, (1, 2)));
        assert_eq!(s.row_label(7), (1, (1, 3)));
        assert_eq!(PairScheme::AllPairs.pairs(4).len(), 6);
    }

    #[test]
    fn empty_progression_set_gives_zero_columns() {
        let d = DigitSet::new(7, [0]).unwrap();
        let s = build_system(&d, 3, PairScheme::FirstToAll).unwrap();
        assert_eq!((s.matrix.rows(), s.matrix.cols()), (2, 0));
    }

    #[test]
    fn rejects_short_progressions() {
        let d = DigitSet::new(7, [0, 1]).unwrap();
        assert!(matches!(build_system(&d, 2, PairScheme::FirstToAll), Err(Error::InvalidLength(2))));
    }

    #[test]
    fn block_sums_vanish() {
        let d = DigitSet::new(13, [0, 1, 2, 3, 5, 6, 8, 9]).unwrap();
        for k in 3..=5 {
            let s = build_system(&d, k, PairScheme::AllPairs).unwrap();
            let nd = d.len();
            for pi in 0..s.pairs.len() {
                for c in 0..s.num_columns() {
                    let sum: Rat = (0..nd).map(|r| s.matrix.get(pi * nd + r, c).clone()).sum();
                    assert!(sum.is_zero());
                }
            }
        }
    }

    #[test]
    fn schemes_share_row_space() {
        let d = DigitSet::interval(7, 0, 4).unwrap();
        let a = build_system(&d, 3, PairScheme::FirstToAll).unwrap();
        let b = build_system(&d, 3, PairScheme::AllPairs).unwrap();
        let (ra, rank_a) = a.matrix.rref();
        let (rb, rank_b) = b.matrix.rref();
        assert_eq!(rank_a, rank_b);
        for r in 0..rank_a {
            assert_eq!(ra.row(r), rb.row(r));
        }
    }

    #[test]
    fn composite_modulus_with_repeats_keeps_literal_coefficients() {
        // diff 3 in Z_9 has order 3, so (0,3,6,0) has v_1 = v_4.
        let d = DigitSet::new(9, [0, 3, 6]).unwrap();
        let s = ConstraintSystem::build(&d, 4, PairScheme::FirstToAll, ProgressionRule::NonConstant).unwrap();
        let c = s.column_of(0, 3).unwrap();
        // pair (1,4): both positions hold 0, so its rows vanish in this column.
        let nd = d.len();
        for r in 2 * nd..3 * nd {
            assert!(s.matrix.get(r, c).is_zero());
        }
        assert_eq!(s.matrix.get(0, c), &Rat::one());
    }
}
