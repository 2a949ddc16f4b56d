//! Two-phase dense primal simplex over exact rationals.
//!
//! Rows are normalized to `<=` form and given one slack each; rows
//! whose right-hand side is negative after normalization are negated
//! and given an artificial variable, so the initial basis is always
//! feasible. Phase 1 minimizes the artificial sum; phase 2 minimizes
//! the true objective with artificials barred from entering. Bland's
//! rule (lowest eligible index enters, ratio ties broken by lowest
//! basis variable index) makes every solve terminating and
//! deterministic.

use num_traits::{Signed, Zero};

use super::{Certificate, LinearProgram, Relation, SolveResult, Status};
use crate::ratio::Rational;

/// `A x + s = b` with rows in `<=` orientation. The right-hand side
/// may be negative here; the verifier and the solver share this exact
/// construction so certificate column indices agree.
pub(crate) struct SlackForm {
    pub(crate) n: usize,
    pub(crate) m: usize,
    pub(crate) a: Vec<Vec<Rational>>,
    pub(crate) b: Vec<Rational>,
    pub(crate) c: Vec<Rational>,
}

impl SlackForm {
    /// Entry of the slack-form constraint matrix `[A | I]` at `row`,
    /// `col`, where columns `n..n + m` are the slacks.
    pub(crate) fn entry(&self, row: usize, col: usize) -> Rational {
        if col < self.n {
            self.a[row][col].clone()
        } else if col - self.n == row {
            Rational::from_integer(1.into())
        } else {
            Rational::zero()
        }
    }

    /// Objective coefficient of a slack-form column (0 for slacks).
    pub(crate) fn cost(&self, col: usize) -> Rational {
        if col < self.n {
            self.c[col].clone()
        } else {
            Rational::zero()
        }
    }
}

pub(crate) fn slack_form(lp: &LinearProgram) -> SlackForm {
    let n = lp.num_vars();
    let m = lp.num_rows();
    let mut a = Vec::with_capacity(m);
    let mut b = Vec::with_capacity(m);
    for row in lp.rows() {
        match row.relation {
            Relation::Le => {
                a.push(row.coeffs.clone());
                b.push(row.rhs.clone());
            }
            Relation::Ge => {
                a.push(row.coeffs.iter().map(|v| -v).collect());
                b.push(-row.rhs.clone());
            }
        }
    }
    SlackForm {
        n,
        m,
        a,
        b,
        c: lp.objective().to_vec(),
    }
}

struct Tableau {
    w: Vec<Vec<Rational>>,
    rhs: Vec<Rational>,
    basis: Vec<usize>,
}

enum End {
    Optimal,
    Unbounded,
}

pub(crate) fn solve(lp: &LinearProgram) -> SolveResult {
    let sf = slack_form(lp);
    let (n, m) = (sf.n, sf.m);
    let mut pivots = 0u64;

    if m == 0 {
        // Only the bounds x >= 0 remain: the optimum is the origin
        // unless some objective coefficient points downhill.
        if sf.c.iter().any(|c| c.is_negative()) {
            return SolveResult::unbounded(0, 0);
        }
        return SolveResult {
            status: Status::Optimal,
            objective: Some(Rational::zero()),
            solution: vec![Rational::zero(); n],
            certificate: Some(Certificate { basis: Vec::new() }),
            pivots: 0,
            nodes: 0,
        };
    }

    // Assemble the working tableau; negative-rhs rows are negated and
    // receive an artificial column so the starting basis is feasible.
    let needs_artificial: Vec<bool> = sf.b.iter().map(|b| b.is_negative()).collect();
    let num_art = needs_artificial.iter().filter(|&&x| x).count();
    let width = n + m + num_art;
    let mut t = Tableau {
        w: Vec::with_capacity(m),
        rhs: Vec::with_capacity(m),
        basis: Vec::with_capacity(m),
    };
    let mut next_art = n + m;
    for r in 0..m {
        let mut row = vec![Rational::zero(); width];
        for (j, v) in sf.a[r].iter().enumerate() {
            row[j] = v.clone();
        }
        row[n + r] = Rational::from_integer(1.into());
        let mut rhs = sf.b[r].clone();
        if needs_artificial[r] {
            for v in row.iter_mut() {
                if !v.is_zero() {
                    *v = -v.clone();
                }
            }
            rhs = -rhs;
            row[next_art] = Rational::from_integer(1.into());
            t.basis.push(next_art);
            next_art += 1;
        } else {
            t.basis.push(n + r);
        }
        t.w.push(row);
        t.rhs.push(rhs);
    }

    let mut certificate_intact = true;

    if num_art > 0 {
        let mut phase1_cost = vec![Rational::zero(); width];
        for entry in phase1_cost.iter_mut().skip(n + m) {
            *entry = Rational::from_integer(1.into());
        }
        match run_simplex(&mut t, &phase1_cost, width, &mut pivots) {
            End::Unbounded => unreachable!("phase 1 objective is bounded below by zero"),
            End::Optimal => {}
        }
        let residual: Rational = t
            .basis
            .iter()
            .zip(&t.rhs)
            .filter(|(&col, _)| col >= n + m)
            .map(|(_, v)| v.clone())
            .sum();
        if residual.is_positive() {
            return SolveResult::infeasible(pivots, 0);
        }
        // Drive zero-level artificials out of the basis with degenerate
        // pivots; a row with no remaining real coefficient is redundant
        // and dropped (the certificate then no longer covers all rows).
        let mut r = 0;
        while r < t.w.len() {
            if t.basis[r] >= n + m {
                match (0..n + m).find(|&j| !t.w[r][j].is_zero()) {
                    Some(j) => pivot(&mut t, &mut [], r, j, &mut pivots),
                    None => {
                        t.w.remove(r);
                        t.rhs.remove(r);
                        t.basis.remove(r);
                        certificate_intact = false;
                        continue;
                    }
                }
            }
            r += 1;
        }
        for row in t.w.iter_mut() {
            row.truncate(n + m);
        }
    }

    let mut phase2_cost = vec![Rational::zero(); n + m];
    phase2_cost[..n].clone_from_slice(&sf.c);
    match run_simplex(&mut t, &phase2_cost, n + m, &mut pivots) {
        End::Unbounded => SolveResult::unbounded(pivots, 0),
        End::Optimal => {
            let mut solution = vec![Rational::zero(); n];
            for (r, &col) in t.basis.iter().enumerate() {
                if col < n {
                    solution[col] = t.rhs[r].clone();
                }
            }
            let objective: Rational = sf
                .c
                .iter()
                .zip(&solution)
                .map(|(c, x)| c * x)
                .sum();
            let mut basis = t.basis.clone();
            basis.sort_unstable();
            SolveResult {
                status: Status::Optimal,
                objective: Some(objective),
                solution,
                certificate: certificate_intact.then_some(Certificate { basis }),
                pivots,
                nodes: 0,
            }
        }
    }
}

/// Runs Bland-rule simplex to optimality or unboundedness. Entering
/// columns are restricted to `0..col_limit`; `red` is rebuilt from
/// `cost` on entry.
fn run_simplex(t: &mut Tableau, cost: &[Rational], col_limit: usize, pivots: &mut u64) -> End {
    let m = t.w.len();
    let mut red: Vec<Rational> = (0..col_limit)
        .map(|j| {
            let mut v = cost[j].clone();
            for r in 0..m {
                let basic_cost = &cost[t.basis[r]];
                if !basic_cost.is_zero() && !t.w[r][j].is_zero() {
                    v -= basic_cost * &t.w[r][j];
                }
            }
            v
        })
        .collect();

    loop {
        let entering = match (0..col_limit).find(|&j| red[j].is_negative()) {
            Some(j) => j,
            None => return End::Optimal,
        };
        let mut leaving: Option<(usize, Rational)> = None;
        for r in 0..m {
            if !t.w[r][entering].is_positive() {
                continue;
            }
            let ratio = &t.rhs[r] / &t.w[r][entering];
            let better = match &leaving {
                None => true,
                Some((lr, lratio)) => {
                    ratio < *lratio || (ratio == *lratio && t.basis[r] < t.basis[*lr])
                }
            };
            if better {
                leaving = Some((r, ratio));
            }
        }
        let Some((row, _)) = leaving else {
            return End::Unbounded;
        };
        pivot(t, &mut red, row, entering, pivots);
    }
}

/// Pivots the tableau on `(row, col)` and eliminates `col` from the
/// reduced-cost vector (which may be empty during basis repair).
fn pivot(t: &mut Tableau, red: &mut [Rational], row: usize, col: usize, pivots: &mut u64) {
    *pivots += 1;
    let pivot_value = t.w[row][col].clone();
    for entry in t.w[row].iter_mut() {
        if !entry.is_zero() {
            *entry /= &pivot_value;
        }
    }
    t.rhs[row] /= &pivot_value;
    let pivot_row = t.w[row].clone();
    let pivot_rhs = t.rhs[row].clone();

    for r in 0..t.w.len() {
        if r == row || t.w[r][col].is_zero() {
            continue;
        }
        let factor = t.w[r][col].clone();
        for (c, pivot_entry) in pivot_row.iter().enumerate() {
            if !pivot_entry.is_zero() {
                let delta = &factor * pivot_entry;
                t.w[r][c] -= delta;
            }
        }
        let delta = &factor * &pivot_rhs;
        t.rhs[r] -= delta;
    }

    if !red.is_empty() && !red[col].is_zero() {
        let factor = red[col].clone();
        let limit = red.len();
        for (c, pivot_entry) in pivot_row.iter().take(limit).enumerate() {
            if !pivot_entry.is_zero() {
                let delta = &factor * pivot_entry;
                red[c] -= delta;
            }
        }
    }
    t.basis[row] = col;
}
