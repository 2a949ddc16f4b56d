//! Independent re-verification of claimed optima.
//!
//! Verification never trusts solver internals: it rebuilds the slack
//! form from the instance, substitutes the claimed solution exactly,
//! and re-derives optimality from the basis certificate by solving for
//! the dual and checking dual feasibility plus complementary
//! slackness. Branched (integer) results carry no basis proof, so for
//! them verification covers feasibility, integrality of the flagged
//! variables, and the objective claim.

use num_traits::{Signed, Zero};

use super::simplex::slack_form;
use super::{LinearProgram, Relation, SolveResult, Status};
use crate::linalg::solve_square_system;
use crate::ratio::Rational;

/// Re-checks a claimed optimal result from scratch: exact feasibility
/// of the solution, the objective value, integrality of flagged
/// variables for branched results, and the basis certificate when one
/// is present. Pure LP claims (no branching) must carry a certificate.
pub fn verify_solution(lp: &LinearProgram, claimed: &SolveResult) -> bool {
    if claimed.status != Status::Optimal {
        return false;
    }
    if claimed.solution.len() != lp.num_vars() {
        return false;
    }
    if claimed.solution.iter().any(|x| x.is_negative()) {
        return false;
    }
    for row in lp.rows() {
        let lhs: Rational = row
            .coeffs
            .iter()
            .zip(&claimed.solution)
            .map(|(a, x)| a * x)
            .sum();
        let ok = match row.relation {
            Relation::Le => lhs <= row.rhs,
            Relation::Ge => lhs >= row.rhs,
        };
        if !ok {
            return false;
        }
    }
    let objective: Rational = lp
        .objective()
        .iter()
        .zip(&claimed.solution)
        .map(|(c, x)| c * x)
        .sum();
    if claimed.objective.as_ref() != Some(&objective) {
        return false;
    }
    if claimed.nodes > 0 {
        let integral_ok = lp
            .integral_vars()
            .iter()
            .zip(&claimed.solution)
            .all(|(&flagged, x)| !flagged || x.is_integer());
        if !integral_ok {
            return false;
        }
    }
    match &claimed.certificate {
        Some(cert) => verify_basis(lp, claimed, &cert.basis),
        // Without a certificate only branched results are verifiable;
        // their optimality rests on the search, not on a basis.
        None => claimed.nodes > 0,
    }
}

/// Optimality from a basis: solve `B^T y = c_B` for the dual, check
/// `d = c - A^T y >= 0` on every slack-form column, and check
/// complementary slackness `d . z = 0` where `z` extends the claimed
/// solution with its slack values.
fn verify_basis(lp: &LinearProgram, claimed: &SolveResult, basis: &[usize]) -> bool {
    let sf = slack_form(lp);
    let total = sf.n + sf.m;
    if basis.len() != sf.m {
        return false;
    }
    if basis.iter().any(|&col| col >= total) {
        return false;
    }
    let mut seen = vec![false; total];
    for &col in basis {
        if seen[col] {
            return false;
        }
        seen[col] = true;
    }

    let transpose: Vec<Vec<Rational>> = basis
        .iter()
        .map(|&col| (0..sf.m).map(|r| sf.entry(r, col)).collect())
        .collect();
    let basic_cost: Vec<Rational> = basis.iter().map(|&col| sf.cost(col)).collect();
    let Some(dual) = solve_square_system(transpose, basic_cost) else {
        return false;
    };

    // Slack values of the claimed solution: s_r = b_r - a_r . x.
    let mut z = claimed.solution.clone();
    for r in 0..sf.m {
        let used: Rational = sf.a[r]
            .iter()
            .zip(&claimed.solution)
            .map(|(a, x)| a * x)
            .sum();
        z.push(&sf.b[r] - used);
    }

    let mut slack_product = Rational::zero();
    for (col, z_col) in z.iter().enumerate().take(total) {
        let mut reduced = sf.cost(col);
        for (r, y) in dual.iter().enumerate() {
            if !y.is_zero() {
                let entry = sf.entry(r, col);
                if !entry.is_zero() {
                    reduced -= y * &entry;
                }
            }
        }
        if reduced.is_negative() {
            return false;
        }
        if !reduced.is_zero() && !z_col.is_zero() {
            slack_product += reduced * z_col;
        }
    }
    slack_product.is_zero()
}
