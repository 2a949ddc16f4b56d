//! Depth-first branch and bound over exact LP relaxations.
//!
//! Branching follows the most-fractional flagged variable (ties to the
//! lowest index); the floor branch is explored first. A node is pruned
//! when its relaxation bound cannot beat the incumbent; when every
//! objective coefficient is an integer and every variable the
//! objective touches is integer-constrained, the bound is rounded up
//! before the comparison. The search is exact and deterministic; a
//! node budget guards the pathological cases, reported as a distinct
//! error.

use num_bigint::BigInt;

use super::{Certificate, LinearProgram, Relation, SolveLimits, SolveResult, Status};
use crate::error::{Error, Result};
use crate::ratio::Rational;

struct Incumbent {
    value: Rational,
    solution: Vec<Rational>,
    certificate: Option<Certificate>,
}

pub(crate) fn solve(lp: &LinearProgram, limits: &SolveLimits) -> Result<SolveResult> {
    let flagged: Vec<usize> = lp
        .integral_vars()
        .iter()
        .enumerate()
        .filter(|(_, &f)| f)
        .map(|(i, _)| i)
        .collect();
    if flagged.is_empty() {
        return Ok(lp.solve_lp());
    }

    // Rounding the relaxation bound up is sound exactly when the
    // objective restricted to feasible integral points is integral.
    let roundable = lp.objective().iter().enumerate().all(|(i, c)| {
        c.is_integer() && (num_traits::Zero::is_zero(c) || lp.integral_vars()[i])
    });

    let mut incumbent: Option<Incumbent> = None;
    let mut nodes = 0u64;
    let mut pivots = 0u64;
    let mut stack: Vec<Vec<(usize, Relation, BigInt)>> = vec![Vec::new()];

    while let Some(extra) = stack.pop() {
        nodes += 1;
        if nodes > limits.max_nodes {
            return Err(Error::NodeLimitExceeded {
                limit: limits.max_nodes,
            });
        }

        let mut node_lp = lp.clone();
        for (var, relation, bound) in &extra {
            let mut coeffs = vec![Rational::from_integer(0.into()); lp.num_vars()];
            coeffs[*var] = Rational::from_integer(1.into());
            let side = match relation {
                Relation::Le => "le",
                Relation::Ge => "ge",
            };
            node_lp.add_row(
                format!("branch_x{var}_{side}_{bound}"),
                coeffs,
                *relation,
                Rational::from_integer(bound.clone()),
            )?;
        }

        let relaxed = node_lp.solve_lp();
        pivots += relaxed.pivots;
        match relaxed.status {
            Status::Infeasible => continue,
            // Added rows only shrink the feasible set, so this can
            // happen at the root alone: the whole relaxation is
            // unbounded and so is the integer program's closure.
            Status::Unbounded => {
                let mut out = SolveResult::unbounded(pivots, nodes);
                out.nodes = nodes;
                return Ok(out);
            }
            Status::Optimal => {}
        }
        let value = relaxed.objective.clone().expect("optimal solve has a value");
        let bound = if roundable && !value.is_integer() {
            value.ceil()
        } else {
            value.clone()
        };
        if let Some(inc) = &incumbent {
            if bound >= inc.value {
                continue;
            }
        }

        match most_fractional(&relaxed.solution, &flagged) {
            None => {
                // All flagged variables integral: a new incumbent, and by
                // the pruning test a strictly better one. The root basis
                // certificate stays valid because the solution optimizes
                // the untightened relaxation.
                incumbent = Some(Incumbent {
                    value,
                    solution: relaxed.solution,
                    certificate: if extra.is_empty() {
                        relaxed.certificate
                    } else {
                        None
                    },
                });
            }
            Some((var, val)) => {
                let floor = val.floor().to_integer();
                let ceil = floor.clone() + 1;
                let mut up = extra.clone();
                up.push((var, Relation::Ge, ceil));
                stack.push(up);
                let mut down = extra;
                down.push((var, Relation::Le, floor));
                stack.push(down);
            }
        }
    }

    Ok(match incumbent {
        Some(inc) => SolveResult {
            status: Status::Optimal,
            objective: Some(inc.value),
            solution: inc.solution,
            certificate: inc.certificate,
            pivots,
            nodes,
        },
        None => SolveResult::infeasible(pivots, nodes),
    })
}

/// The flagged variable whose value sits farthest from an integer,
/// with its value; ties break to the lowest index. `None` when every
/// flagged value is integral.
fn most_fractional(solution: &[Rational], flagged: &[usize]) -> Option<(usize, Rational)> {
    let mut best: Option<(usize, Rational, Rational)> = None;
    for &var in flagged {
        let val = &solution[var];
        let fractional = val - val.floor();
        if num_traits::Zero::is_zero(&fractional) {
            continue;
        }
        let distance = fractional
            .clone()
            .min(Rational::from_integer(1.into()) - &fractional);
        match &best {
            Some((_, _, best_distance)) if distance <= *best_distance => {}
            _ => best = Some((var, val.clone(), distance)),
        }
    }
    best.map(|(var, val, _)| (var, val))
}
