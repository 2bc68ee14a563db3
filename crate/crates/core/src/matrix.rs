//! Dense exact-rational matrices.

use std::fmt;

use crate::error::{Error, Result};
use crate::rat::Rat;

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct RatMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Rat>,
}

impl RatMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![Rat::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, Rat::one());
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<Rat>>) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().position(|r| r.len() != cols) {
            return Err(Error::DimensionMismatch(format!(
                "row {bad} has {} entries, expected {cols}",
                rows[bad].len()
            )));
        }
        let n = rows.len();
        Ok(Self {
            rows: n,
            cols,
            data: rows.into_iter().flatten().collect(),
        })
    }

    pub fn from_i64_rows(rows: &[Vec<i64>]) -> Result<Self> {
        Self::from_rows(rows.iter().map(|r| r.iter().map(|&x| Rat::from_int(x)).collect()).collect())
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> &Rat {
        &self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: Rat) {
        self.data[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[Rat] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn row_is_zero(&self, r: usize) -> bool {
        self.row(r).iter().all(Rat::is_zero)
    }

    pub fn column(&self, c: usize) -> Vec<Rat> {
        (0..self.rows).map(|r| self.get(r, c).clone()).collect()
    }

    pub fn transpose(&self) -> RatMatrix {
        let mut t = RatMatrix::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                t.set(c, r, self.get(r, c).clone());
            }
        }
        t
    }

    pub fn scaled(&self, s: &Rat) -> RatMatrix {
        RatMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|x| x * s).collect(),
        }
    }

    /// Keeps the listed columns, in the given order.
    pub fn select_columns(&self, cols: &[usize]) -> RatMatrix {
        let mut out = RatMatrix::zeros(self.rows, cols.len());
        for r in 0..self.rows {
            for (j, &c) in cols.iter().enumerate() {
                out.set(r, j, self.get(r, c).clone());
            }
        }
        out
    }

    pub fn mul_vec(&self, x: &[Rat]) -> Result<Vec<Rat>> {
        if x.len() != self.cols {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} matrix times vector of length {}",
                self.rows,
                self.cols,
                x.len()
            )));
        }
        Ok((0..self.rows)
            .map(|r| {
                self.row(r)
                    .iter()
                    .zip(x)
                    .filter(|(a, b)| !a.is_zero() && !b.is_zero())
                    .map(|(a, b)| a * b)
                    .sum()
            })
            .collect())
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for c in 0..self.cols {
            self.data.swap(a * self.cols + c, b * self.cols + c);
        }
    }

    /// Gauss-Jordan elimination restricted to the first `pivot_cols`
    /// columns; returns the pivot column of each leading row.
    fn eliminate(&mut self, pivot_cols: usize) -> Vec<usize> {
        let mut pivots = Vec::new();
        let mut lead = 0;
        for c in 0..pivot_cols {
            if lead == self.rows {
                break;
            }
            // First nonzero entry in column order; exact arithmetic needs no
            // magnitude pivoting.
            let Some(p) = (lead..self.rows).find(|&r| !self.get(r, c).is_zero()) else {
                continue;
            };
            self.swap_rows(lead, p);
            let inv = self.get(lead, c).recip();
            if !inv.is_one() {
                for j in c..self.cols {
                    let v = self.get(lead, j);
                    if !v.is_zero() {
                        let v = v * &inv;
                        self.set(lead, j, v);
                    }
                }
            }
            let nz: Vec<(usize, Rat)> = (c..self.cols)
                .filter(|&j| !self.get(lead, j).is_zero())
                .map(|j| (j, self.get(lead, j).clone()))
                .collect();
            for r in 0..self.rows {
                if r == lead {
                    continue;
                }
                let f = self.get(r, c).clone();
                if f.is_zero() {
                    continue;
                }
                for (j, v) in &nz {
                    let cur = self.get(r, *j) - &(&f * v);
                    self.set(r, *j, cur);
                }
            }
            pivots.push(c);
            lead += 1;
        }
        pivots
    }

    /// Reduced row echelon form and rank. Zero rows are kept at the bottom so
    /// the shape is unchanged.
    pub fn rref(&self) -> (RatMatrix, usize) {
        let mut m = self.clone();
        let rank = m.eliminate(m.cols).len();
        (m, rank)
    }

    /// Reduced row echelon form `R`, pivot columns, and an invertible `E`
    /// with `E·self = R`.
    pub fn rref_with_transform(&self) -> (RatMatrix, Vec<usize>, RatMatrix) {
        let mut aug = RatMatrix::zeros(self.rows, self.cols + self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                aug.set(r, c, self.get(r, c).clone());
            }
            aug.set(r, self.cols + r, Rat::one());
        }
        let pivots = aug.eliminate(self.cols);
        let left: Vec<usize> = (0..self.cols).collect();
        let right: Vec<usize> = (self.cols..self.cols + self.rows).collect();
        (aug.select_columns(&left), pivots, aug.select_columns(&right))
    }

    pub fn rank(&self) -> usize {
        self.rref().1
    }

    pub fn is_invertible(&self) -> bool {
        self.rows == self.cols && self.rank() == self.rows
    }

    /// Plain-text dump: one row per line, entries separated by single spaces.
    pub fn to_dump(&self) -> String {
        let mut s = String::new();
        for r in 0..self.rows {
            let line: Vec<String> = self.row(r).iter().map(Rat::to_string).collect();
            s.push_str(&line.join(" "));
            s.push('\n');
        }
        s
    }

    /// Parses the dump format; blank lines and `#` comments are skipped.
    pub fn parse_dump(text: &str) -> Result<RatMatrix> {
        let rows = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .map(|l| l.split_whitespace().map(str::parse).collect::<Result<Vec<Rat>>>())
            .collect::<Result<Vec<_>>>()?;
        RatMatrix::from_rows(rows)
    }
}

/// Exact product `l · r`.
pub fn mat_mul(l: &RatMatrix, r: &RatMatrix) -> Result<RatMatrix> {
    if l.cols != r.rows {
        return Err(Error::DimensionMismatch(format!(
            "cannot multiply {}x{} by {}x{}",
            l.rows, l.cols, r.rows, r.cols
        )));
    }
    let mut out = RatMatrix::zeros(l.rows, r.cols);
    for i in 0..l.rows {
        for k in 0..l.cols {
            let a = l.get(i, k);
            if a.is_zero() {
                continue;
            }
            for j in 0..r.cols {
                let b = r.get(k, j);
                if b.is_zero() {
                    continue;
                }
                let v = out.get(i, j) + &(a * b);
                out.set(i, j, v);
            }
        }
    }
    Ok(out)
}

impl fmt::Debug for RatMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "RatMatrix {}x{}", self.rows, self.cols)?;
        f.write_str(&self.to_dump())
    }
}
