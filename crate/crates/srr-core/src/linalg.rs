//! Exact dense linear algebra over rationals, shared by the simplex
//! verifier and the vertex enumerator.

use num_traits::Zero;

use crate::ratio::Rational;

/// Solves the square system `mat * x = rhs` exactly by Gaussian
/// elimination. Returns `None` when `mat` is singular.
pub(crate) fn solve_square_system(
    mut mat: Vec<Vec<Rational>>,
    mut rhs: Vec<Rational>,
) -> Option<Vec<Rational>> {
    let n = mat.len();
    debug_assert!(mat.iter().all(|row| row.len() == n));
    debug_assert_eq!(rhs.len(), n);
    for col in 0..n {
        let pivot_row = (col..n).find(|&r| !mat[r][col].is_zero())?;
        mat.swap(col, pivot_row);
        rhs.swap(col, pivot_row);
        let pivot = mat[col][col].clone();
        for entry in mat[col].iter_mut() {
            *entry /= &pivot;
        }
        rhs[col] /= &pivot;
        let pivot_vals = mat[col].clone();
        for r in 0..n {
            if r == col || mat[r][col].is_zero() {
                continue;
            }
            let factor = mat[r][col].clone();
            for (entry, p) in mat[r].iter_mut().zip(&pivot_vals) {
                let delta = &factor * p;
                *entry -= delta;
            }
            let delta = &factor * &rhs[col];
            rhs[r] -= delta;
        }
    }
    Some(rhs)
}
