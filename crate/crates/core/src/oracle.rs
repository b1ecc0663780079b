//! Reference solver used to check the Gauss-Jordan kernels.
//!
//! Deliberately boring and deliberately different: classic Gaussian
//! elimination with partial pivoting (largest magnitude in the column) and
//! an explicit back-substitution pass, written against its own `Vec<Vec>`
//! representation. It shares no row arithmetic with the kernels it
//! validates, so agreement between the two is evidence, not tautology.

use crate::error::{Error, Result};
use crate::matrix::{AugmentedMatrix, Solution};

/// Solves `Ax = b` independently of the Gauss-Jordan path.
pub fn oracle_solve(a: &AugmentedMatrix) -> Result<Solution> {
    let n = a.n();
    let mut m: Vec<Vec<f64>> = (0..n).map(|i| a.row(i).to_vec()).collect();

    for col in 0..n {
        // Partial pivoting: bring the largest remaining entry up.
        let (best, magnitude) = (col..n)
            .map(|r| (r, m[r][col].abs()))
            .max_by(|x, y| x.1.total_cmp(&y.1))
            .expect("non-empty pivot range");
        if magnitude == 0.0 || !magnitude.is_finite() {
            return Err(Error::Singular { pivot: col });
        }
        m.swap(col, best);
        for r in col + 1..n {
            let factor = m[r][col] / m[col][col];
            if factor == 0.0 {
                continue;
            }
            for c in col..=n {
                m[r][c] -= factor * m[col][c];
            }
        }
    }

    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let mut acc = m[row][n];
        for c in row + 1..n {
            acc -= m[row][c] * x[c];
        }
        x[row] = acc / m[row][row];
    }
    Solution::new(x)
}

/// Scaled infinity-norm residual of a candidate solution:
/// `max_i |A_i . x - b_i|` divided by `(max_i sum_j |a_ij| |x_j|) + |b_i|`
/// taken row-wise, so the figure is meaningful across wildly scaled rows.
pub fn residual_inf(a: &AugmentedMatrix, x: &[f64]) -> f64 {
    let n = a.n();
    assert_eq!(x.len(), n);
    let mut worst: f64 = 0.0;
    for i in 0..n {
        let row = a.row(i);
        let mut dot = 0.0;
        let mut scale = row[n].abs();
        for j in 0..n {
            dot += row[j] * x[j];
            scale += (row[j] * x[j]).abs();
        }
        let err = (dot - row[n]).abs() / scale.max(1.0);
        worst = worst.max(err);
    }
    worst
}
