//! Exact primal simplex for the normalised cone program
//!
//! ```text
//! maximise  Σ x_j   subject to   R x = 0,   Σ x_j + s = 1,   x, s >= 0
//! ```
//!
//! where `R` holds the nonzero rows of a reduced row echelon form. The
//! pivot columns of `R` together with the slack `s` form a feasible
//! starting basis, so no phase one is needed. Bland's rule guarantees
//! termination on the (highly degenerate) zero right-hand side.

use crate::error::{Error, Result};
use crate::matrix::RatMatrix;
use crate::rat::Rat;

pub(crate) struct LpSolution {
    pub optimum: Rat,
    /// Optimal `x`.
    pub x: Vec<Rat>,
    /// Dual values: one per row of `R`, then the normalisation row.
    pub dual: Vec<Rat>,
}

/// `r` must be in reduced row echelon form with exactly `pivot_cols.len()`
/// rows, row `i` having its leading one in column `pivot_cols[i]`.
pub(crate) fn maximise_mass(r: &RatMatrix, pivot_cols: &[usize]) -> Result<LpSolution> {
    let rr = r.rows();
    let n = r.cols();
    debug_assert_eq!(rr, pivot_cols.len());
    let width = n + 1;
    let mut t: Vec<Vec<Rat>> = Vec::with_capacity(rr + 1);
    let mut rhs = vec![Rat::zero(); rr + 1];
    for i in 0..rr {
        let mut row = r.row(i).to_vec();
        row.push(Rat::zero());
        t.push(row);
    }
    let mut norm = vec![Rat::one(); width];
    for row in t.iter().take(rr) {
        for (j, v) in row.iter().enumerate().take(n) {
            if !v.is_zero() {
                norm[j] = &norm[j] - v;
            }
        }
    }
    t.push(norm);
    rhs[rr] = Rat::one();
    let mut basis: Vec<usize> = pivot_cols.to_vec();
    basis.push(n);

    let cost = |j: usize| if j < n { Rat::one() } else { Rat::zero() };
    let mut d: Vec<Rat> = (0..width)
        .map(|j| {
            let mut v = cost(j);
            for (i, &b) in basis.iter().enumerate() {
                if b < n && !t[i][j].is_zero() {
                    v = &v - &t[i][j];
                }
            }
            v
        })
        .collect();
    let mut z = Rat::zero();

    while let Some(e) = (0..width).find(|&j| d[j].is_positive()) {
        let mut leave: Option<(usize, Rat)> = None;
        for i in 0..=rr {
            if !t[i][e].is_positive() {
                continue;
            }
            let ratio = &rhs[i] / &t[i][e];
            let better = match &leave {
                None => true,
                Some((li, lr)) => ratio < *lr || (ratio == *lr && basis[i] < basis[*li]),
            };
            if better {
                leave = Some((i, ratio));
            }
        }
        let Some((l, _)) = leave else {
            return Err(Error::Lp("unbounded ray in a bounded program".into()));
        };
        pivot(&mut t, &mut rhs, &mut d, &mut z, l, e);
        basis[l] = e;
    }

    let mut x = vec![Rat::zero(); n];
    for (i, &b) in basis.iter().enumerate() {
        if b < n {
            x[b] = rhs[i].clone();
        }
    }
    let dual = solve_dual(r, &basis)?;
    Ok(LpSolution {
        optimum: z,
        x,
        dual,
    })
}

fn pivot(t: &mut [Vec<Rat>], rhs: &mut [Rat], d: &mut [Rat], z: &mut Rat, l: usize, e: usize) {
    let inv = t[l][e].recip();
    if !inv.is_one() {
        for v in t[l].iter_mut() {
            if !v.is_zero() {
                *v = &*v * &inv;
            }
        }
        rhs[l] = &rhs[l] * &inv;
    }
    let nz: Vec<(usize, Rat)> = t[l]
        .iter()
        .enumerate()
        .filter(|(_, v)| !v.is_zero())
        .map(|(j, v)| (j, v.clone()))
        .collect();
    let pivot_rhs = rhs[l].clone();
    for i in 0..t.len() {
        if i == l || t[i][e].is_zero() {
            continue;
        }
        let f = t[i][e].clone();
        for (j, v) in &nz {
            t[i][*j] = &t[i][*j] - &(&f * v);
        }
        if !pivot_rhs.is_zero() {
            rhs[i] = &rhs[i] - &(&f * &pivot_rhs);
        }
    }
    let f = d[e].clone();
    for (j, v) in &nz {
        d[*j] = &d[*j] - &(&f * v);
    }
    *z = &*z + &(&f * &pivot_rhs);
}

/// Solves `Bᵀ y = c_B` for the final basis.
fn solve_dual(r: &RatMatrix, basis: &[usize]) -> Result<Vec<Rat>> {
    let rr = r.rows();
    let n = r.cols();
    let size = rr + 1;
    // Column of the full constraint matrix for variable j, at row i.
    let entry = |i: usize, j: usize| -> Rat {
        if i < rr {
            if j < n {
                r.get(i, j).clone()
            } else {
                Rat::zero()
            }
        } else {
            Rat::one()
        }
    };
    let mut aug = RatMatrix::zeros(size, size + 1);
    for (bi, &j) in basis.iter().enumerate() {
        for i in 0..size {
            aug.set(bi, i, entry(i, j));
        }
        aug.set(bi, size, if j < n { Rat::one() } else { Rat::zero() });
    }
    let (red, rank) = aug.rref();
    if rank != size || (0..size).any(|i| !red.get(i, i).is_one()) {
        return Err(Error::Lp("final basis is singular".into()));
    }
    Ok((0..size).map(|i| red.get(i, size).clone()).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trivial_cone_has_zero_optimum() {
        // x0 + x1 = 0 forces both to zero.
        let r = RatMatrix::from_i64_rows(&[vec![1, 1]]).unwrap();
        let sol = maximise_mass(&r, &[0]).unwrap();
        assert!(sol.optimum.is_zero());
        // Dual proves it: y·R >= 1 on every column.
        assert_eq!(sol.dual[1], Rat::zero());
        assert!(sol.dual[0] >= Rat::one());
    }

    #[test]
    fn nontrivial_cone_reaches_one() {
        // x0 - x1 = 0 has the ray (1, 1).
        let r = RatMatrix::from_i64_rows(&[vec![1, -1]]).unwrap();
        let sol = maximise_mass(&r, &[0]).unwrap();
        assert_eq!(sol.optimum, Rat::one());
        assert_eq!(sol.x, vec![Rat::new(1, 2), Rat::new(1, 2)]);
    }

    #[test]
    fn empty_rows() {
        let r = RatMatrix::zeros(0, 3);
        let sol = maximise_mass(&r, &[]).unwrap();
        assert_eq!(sol.optimum, Rat::one());
    }
}
