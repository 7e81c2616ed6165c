//! Exact linear algebra over the rationals: Gaussian elimination with
//! consistency checking, and minimal-support solution search by subset
//! enumeration.

use num_rational::BigRational;
use num_traits::Zero;

/// A dense linear system `A x = b` over Q.
#[derive(Clone, Debug)]
pub struct LinearSystem {
    pub rows: Vec<Vec<BigRational>>,
    pub rhs: Vec<BigRational>,
    pub ncols: usize,
}

impl LinearSystem {
    pub fn new(ncols: usize) -> LinearSystem {
        LinearSystem {
            rows: Vec::new(),
            rhs: Vec::new(),
            ncols,
        }
    }

    pub fn push(&mut self, coeffs: Vec<BigRational>, rhs: BigRational) {
        debug_assert_eq!(coeffs.len(), self.ncols);
        self.rows.push(coeffs);
        self.rhs.push(rhs);
    }

    /// Solves the system; free variables are set to zero. Returns None when
    /// the system is inconsistent.
    pub fn solve(&self) -> Option<Vec<BigRational>> {
        let mut a: Vec<Vec<BigRational>> = self.rows.clone();
        let mut b: Vec<BigRational> = self.rhs.clone();
        let n = self.ncols;
        let m = a.len();
        let mut pivot_col_of_row = Vec::new();
        let mut row = 0;
        for col in 0..n {
            // find pivot
            let pr = (row..m).find(|&r| !a[r][col].is_zero());
            let pr = match pr {
                None => continue,
                Some(pr) => pr,
            };
            a.swap(row, pr);
            b.swap(row, pr);
            let inv = a[row][col].recip();
            for c in col..n {
                let v = &a[row][c] * &inv;
                a[row][c] = v;
            }
            b[row] = &b[row] * &inv;
            for r in 0..m {
                if r != row && !a[r][col].is_zero() {
                    let factor = a[r][col].clone();
                    for c in col..n {
                        let v = &a[r][c] - &(&factor * &a[row][c]);
                        a[r][c] = v;
                    }
                    b[r] = &b[r] - &(&factor * &b[row]);
                }
            }
            pivot_col_of_row.push(col);
            row += 1;
            if row == m {
                break;
            }
        }
        // consistency: zero rows must have zero rhs
        for r in row..m {
            if !b[r].is_zero() {
                return None;
            }
        }
        let mut x = vec![BigRational::zero(); n];
        for (r, &col) in pivot_col_of_row.iter().enumerate() {
            x[col] = b[r].clone();
        }
        Some(x)
    }

    /// Solves with every variable outside `support` pinned to zero.
    pub fn solve_on_support(&self, support: &[usize]) -> Option<Vec<BigRational>> {
        let mut sub = LinearSystem::new(support.len());
        for (row, rhs) in self.rows.iter().zip(&self.rhs) {
            // variables outside the support contribute nothing, so the
            // restricted equation must carry the same right-hand side
            let coeffs: Vec<BigRational> = support.iter().map(|&c| row[c].clone()).collect();
            sub.push(coeffs, rhs.clone());
        }
        let x = sub.solve()?;
        let mut full = vec![BigRational::zero(); self.ncols];
        for (k, &c) in support.iter().enumerate() {
            full[c] = x[k].clone();
        }
        Some(full)
    }

    /// Finds a solution of minimal support, enumerating supports in
    /// ascending size and, within a size, in lexicographic order of the
    /// index tuples (so lower-indexed variables are preferred). Supports up
    /// to `max_support` are tried exhaustively; if none works, falls back
    /// to the unconstrained solution with free variables zeroed.
    pub fn solve_minimal_support(&self, max_support: usize) -> Option<Vec<BigRational>> {
        let n = self.ncols;
        let cap = max_support.min(n);
        for size in 0..=cap {
            let mut idx: Vec<usize> = (0..size).collect();
            loop {
                if let Some(x) = self.solve_on_support(&idx) {
                    return Some(x);
                }
                if !next_combination(&mut idx, n) {
                    break;
                }
            }
        }
        self.solve()
    }
}

/// Advances `idx` to the next k-combination of `0..n` in lexicographic
/// order. Returns false after the last combination.
fn next_combination(idx: &mut [usize], n: usize) -> bool {
    let k = idx.len();
    if k == 0 || k > n {
        return false;
    }
    let mut i = k;
    while i > 0 {
        i -= 1;
        if idx[i] < n - k + i {
            idx[i] += 1;
            for j in i + 1..k {
                idx[j] = idx[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;

    fn r(n: i64) -> BigRational {
        BigRational::from_integer(BigInt::from(n))
    }

    #[test]
    fn solves_unique_system() {
        // x + y = 3, x - y = 1 -> x = 2, y = 1
        let mut s = LinearSystem::new(2);
        s.push(vec![r(1), r(1)], r(3));
        s.push(vec![r(1), r(-1)], r(1));
        assert_eq!(s.solve().unwrap(), vec![r(2), r(1)]);
    }

    #[test]
    fn detects_inconsistency() {
        let mut s = LinearSystem::new(1);
        s.push(vec![r(1)], r(1));
        s.push(vec![r(2)], r(3));
        assert!(s.solve().is_none());
    }

    #[test]
    fn minimal_support_prefers_fewest_nonzeros() {
        // x0 + x1 = 2 has the support-1 solution x0 = 2 (and x1 = 2);
        // lexicographic preference picks x0.
        let mut s = LinearSystem::new(2);
        s.push(vec![r(1), r(1)], r(2));
        let x = s.solve_minimal_support(2).unwrap();
        assert_eq!(x, vec![r(2), r(0)]);
    }

    #[test]
    fn minimal_support_zero_solution() {
        let mut s = LinearSystem::new(3);
        s.push(vec![r(1), r(2), r(3)], r(0));
        let x = s.solve_minimal_support(3).unwrap();
        assert_eq!(x, vec![r(0), r(0), r(0)]);
    }

    #[test]
    fn restricted_support_consistency() {
        // x0 + x1 = 2 and x0 - x1 = 0: only the full support works.
        let mut s = LinearSystem::new(2);
        s.push(vec![r(1), r(1)], r(2));
        s.push(vec![r(1), r(-1)], r(0));
        assert!(s.solve_on_support(&[0]).is_none());
        let x = s.solve_minimal_support(2).unwrap();
        assert_eq!(x, vec![r(1), r(1)]);
    }
}
