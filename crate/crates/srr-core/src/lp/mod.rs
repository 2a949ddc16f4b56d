//! Exact rational linear and integer programming.
//!
//! Every optimization in this crate runs through this module: a dense
//! two-phase primal simplex over arbitrary-precision rationals with
//! Bland's anti-cycling rule, and a depth-first branch-and-bound layer
//! for integer variables. There is no floating point anywhere, so
//! optima, solutions, and certificates are exact, and solving is
//! deterministic for a given instance.
//!
//! All variables carry an implicit lower bound of zero; constraints
//! are `<=` or `>=` rows. Optimal LP solves return a basis
//! [`Certificate`] that [`verify_solution`] can re-check from scratch,
//! independently of the solver's internal state.
//!
//! # Example
//!
//! ```
//! use srr_core::lp::{LinearProgram, Relation, SolveLimits, Status, verify_solution};
//! use srr_core::ratio::int;
//!
//! // minimize x subject to 2x >= 3, x integral.
//! let mut lp = LinearProgram::minimize(vec![int(1)]);
//! lp.add_row("demand", vec![int(2)], Relation::Ge, int(3)).unwrap();
//! let relaxed = lp.solve_lp();
//! assert_eq!(relaxed.objective, Some(srr_core::ratio::frac(3, 2)));
//! assert!(verify_solution(&lp, &relaxed));
//!
//! lp.set_integral(0).unwrap();
//! let integral = lp.solve_ilp(&SolveLimits::default()).unwrap();
//! assert_eq!(integral.status, Status::Optimal);
//! assert_eq!(integral.objective, Some(int(2)));
//! ```

mod branch;
mod simplex;
mod verify;

pub use verify::verify_solution;

use crate::error::{Error, Result};
use crate::ratio::{format_rational, Rational};

/// Direction of a constraint row.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    /// Left-hand side at most the right-hand side.
    Le,
    /// Left-hand side at least the right-hand side.
    Ge,
}

impl Relation {
    fn symbol(self) -> &'static str {
        match self {
            Relation::Le => "<=",
            Relation::Ge => ">=",
        }
    }
}

#[derive(Debug, Clone)]
pub(crate) struct Row {
    pub(crate) name: String,
    pub(crate) coeffs: Vec<Rational>,
    pub(crate) relation: Relation,
    pub(crate) rhs: Rational,
}

/// A minimization program over nonnegative variables.
#[derive(Debug, Clone)]
pub struct LinearProgram {
    objective: Vec<Rational>,
    rows: Vec<Row>,
    integral: Vec<bool>,
}

impl LinearProgram {
    /// Program minimizing `objective . x` over `x >= 0`, initially
    /// unconstrained otherwise.
    pub fn minimize(objective: Vec<Rational>) -> Self {
        let vars = objective.len();
        LinearProgram {
            objective,
            rows: Vec::new(),
            integral: vec![false; vars],
        }
    }

    /// Number of variables.
    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    /// Number of constraint rows.
    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    /// Objective coefficients.
    pub fn objective(&self) -> &[Rational] {
        &self.objective
    }

    /// Adds a constraint row. The coefficient vector must cover every
    /// variable.
    pub fn add_row(
        &mut self,
        name: impl Into<String>,
        coeffs: Vec<Rational>,
        relation: Relation,
        rhs: Rational,
    ) -> Result<()> {
        if coeffs.len() != self.num_vars() {
            return Err(Error::DimensionMismatch(format!(
                "row has {} coefficients, program has {} variables",
                coeffs.len(),
                self.num_vars()
            )));
        }
        self.rows.push(Row {
            name: name.into(),
            coeffs,
            relation,
            rhs,
        });
        Ok(())
    }

    /// Marks a variable as integer-constrained for [`Self::solve_ilp`].
    pub fn set_integral(&mut self, var: usize) -> Result<()> {
        if var >= self.num_vars() {
            return Err(Error::DimensionMismatch(format!(
                "variable index {var} out of range for {} variables",
                self.num_vars()
            )));
        }
        self.integral[var] = true;
        Ok(())
    }

    /// Which variables are integer-constrained.
    pub fn integral_vars(&self) -> &[bool] {
        &self.integral
    }

    pub(crate) fn rows(&self) -> &[Row] {
        &self.rows
    }

    /// Solves the linear relaxation (integrality flags ignored).
    pub fn solve_lp(&self) -> SolveResult {
        simplex::solve(self)
    }

    /// Solves with integrality enforced on flagged variables, by
    /// depth-first branch and bound over exact LP relaxations.
    ///
    /// Fails with [`Error::NodeLimitExceeded`] when the node budget in
    /// `limits` runs out before the search completes.
    pub fn solve_ilp(&self, limits: &SolveLimits) -> Result<SolveResult> {
        branch::solve(self, limits)
    }

    /// Plain-text dump for debugging: the objective, then one line per
    /// row (`name: coefficients relation rhs`, coefficients in `p/q`
    /// form), then the integer-constrained variables if any.
    pub fn dump_text(&self) -> String {
        let fmt_vec = |v: &[Rational]| {
            v.iter()
                .map(format_rational)
                .collect::<Vec<_>>()
                .join(" ")
        };
        let mut out = format!("minimize: {}\n", fmt_vec(&self.objective));
        for row in &self.rows {
            out.push_str(&format!(
                "{}: {} {} {}\n",
                row.name,
                fmt_vec(&row.coeffs),
                row.relation.symbol(),
                format_rational(&row.rhs)
            ));
        }
        let flagged: Vec<String> = self
            .integral
            .iter()
            .enumerate()
            .filter(|(_, &f)| f)
            .map(|(i, _)| format!("x{i}"))
            .collect();
        if !flagged.is_empty() {
            out.push_str(&format!("integral: {}\n", flagged.join(" ")));
        }
        out
    }
}

/// Outcome classification of a solve.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    /// A finite optimum was found; solution and objective are set.
    Optimal,
    /// No feasible point exists.
    Infeasible,
    /// The objective is unbounded below on the feasible set.
    Unbounded,
}

/// Basis certificate for an optimal LP solve: the column indices of an
/// optimal basis in the slack form `A x + s = b` (structural columns
/// first, then one slack per row). [`verify_solution`] re-derives
/// optimality from it without trusting the solver.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Certificate {
    /// Basis column indices, ascending.
    pub basis: Vec<usize>,
}

/// Result of [`LinearProgram::solve_lp`] or
/// [`LinearProgram::solve_ilp`].
#[derive(Debug, Clone)]
pub struct SolveResult {
    pub status: Status,
    /// Optimal objective value when `status` is `Optimal`.
    pub objective: Option<Rational>,
    /// Optimal assignment (one value per variable) when `status` is
    /// `Optimal`, empty otherwise.
    pub solution: Vec<Rational>,
    /// Optimality certificate. Present for LP solves; present for ILP
    /// solves only when the incumbent was already optimal at the root
    /// relaxation (the basis then certifies the relaxation, which the
    /// integral solution attains).
    pub certificate: Option<Certificate>,
    /// Total simplex pivots performed.
    pub pivots: u64,
    /// Branch-and-bound nodes explored; 0 for pure LP solves.
    pub nodes: u64,
}

impl SolveResult {
    pub(crate) fn infeasible(pivots: u64, nodes: u64) -> Self {
        SolveResult {
            status: Status::Infeasible,
            objective: None,
            solution: Vec::new(),
            certificate: None,
            pivots,
            nodes,
        }
    }

    pub(crate) fn unbounded(pivots: u64, nodes: u64) -> Self {
        SolveResult {
            status: Status::Unbounded,
            objective: None,
            solution: Vec::new(),
            certificate: None,
            pivots,
            nodes,
        }
    }
}

/// Resource budget for branch and bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SolveLimits {
    /// Maximum number of branch-and-bound nodes to explore.
    pub max_nodes: u64,
}

impl Default for SolveLimits {
    fn default() -> Self {
        SolveLimits {
            max_nodes: 1_000_000,
        }
    }
}

impl SolveLimits {
    /// Budget with the given node cap.
    pub fn with_max_nodes(max_nodes: u64) -> Self {
        SolveLimits { max_nodes }
    }
}
