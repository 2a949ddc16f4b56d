//! Lower bounds on the number of servers needed to cover a region.
//!
//! Every recovery set for file `i` contains a point off any hyperplane
//! that misses `e_i` (points on a hyperplane can only XOR to points on
//! it). So for each hyperplane `H`, the multiplicities of the points
//! off `H` must add up to the largest total demand, over the region,
//! of the files whose unit point lies off `H`. These `2^k - 1` linear
//! inequalities in the `n_j` yield:
//!
//! - [`hyperplane_bound`]: the exact LP or ILP optimum over them —
//!   always a valid lower bound, needing only the generating set;
//! - [`averaging_bound`]: sum all inequalities; each point appears in
//!   exactly `2^(k-1)` of them;
//! - [`file_split_bound`]: split the inequalities by whether a chosen
//!   file's unit point is off the hyperplane and round each half;
//! - [`parity_bound`]: sum only the inequalities of hyperplanes
//!   through a chosen point, where that point's multiplicity never
//!   appears.
//!
//! The three closed forms replace the right-hand sides with the caps
//! themselves, which is only valid when every cap is attained in the
//! region; they carry an `applicable` flag that is false when some cap
//! is strictly redundant. The LP/ILP bounds have no such hypothesis.

use std::fmt;

use num_traits::Zero;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::gf2::{enumerate_hyperplanes, num_points, point_support, subset_indices, Hyperplane};
use crate::lp::{LinearProgram, Relation, SolveLimits, Status};
use crate::ratio::{ceil_to_u64, format_rational, to_u64, JsonRational, Rational};
use crate::region::RegionSpec;

/// One hyperplane inequality: the multiplicities of the points off the
/// hyperplane sum to at least `rhs`.
///
/// `rhs` is the maximum, over the region's generating vectors, of the
/// total demand of the files whose unit point is off the hyperplane;
/// it can be fractional when the generating vectors are. When no cap
/// of the region is strictly redundant it equals the cap of that file
/// subset.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HyperplaneInequality {
    pub hyperplane: Hyperplane,
    pub rhs: Rational,
}

impl HyperplaneInequality {
    /// Points whose multiplicities appear on the left-hand side: the
    /// points off the hyperplane.
    pub fn lhs_points(&self) -> &[u32] {
        &self.hyperplane.outside
    }

    /// 1-based files whose unit point is off the hyperplane.
    pub fn files(&self) -> Vec<usize> {
        subset_indices(self.hyperplane.excluded_units)
    }
}

impl fmt::Display for HyperplaneInequality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (pos, j) in self.hyperplane.outside.iter().enumerate() {
            if pos > 0 {
                write!(f, " + ")?;
            }
            write!(f, "n_{j}")?;
        }
        write!(f, " >= {}", format_rational(&self.rhs))
    }
}

impl Serialize for HyperplaneInequality {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Repr<'a> {
            coeff: u32,
            points: &'a [u32],
            files: Vec<usize>,
            rhs: JsonRational,
        }
        Repr {
            coeff: self.hyperplane.coeff,
            points: self.lhs_points(),
            files: self.files(),
            rhs: JsonRational(self.rhs.clone()),
        }
        .serialize(serializer)
    }
}

/// The `2^k - 1` hyperplane inequalities of a region, in ascending
/// order of hyperplane coefficient mask.
pub fn hyperplane_inequalities(region: &RegionSpec) -> Result<Vec<HyperplaneInequality>> {
    let generators = region.generating_set()?;
    enumerate_hyperplanes(region.k())?
        .into_iter()
        .map(|hyperplane| {
            let rhs = generators
                .iter()
                .map(|g| g.masked_sum(hyperplane.excluded_units))
                .fold(Rational::zero(), |acc, s| acc.max(s));
            Ok(HyperplaneInequality { hyperplane, rhs })
        })
        .collect()
}

/// Whether the relaxation or the integer program is solved.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundMode {
    Lp,
    Ilp,
}

fn hyperplane_program(region: &RegionSpec) -> Result<LinearProgram> {
    let ell = num_points(region.k()) as usize;
    let mut lp = LinearProgram::minimize(vec![Rational::from_integer(1.into()); ell]);
    for ineq in hyperplane_inequalities(region)? {
        let mut coeffs = vec![Rational::zero(); ell];
        for &j in ineq.lhs_points() {
            coeffs[(j - 1) as usize] = Rational::from_integer(1.into());
        }
        lp.add_row(
            format!("off_hyperplane_{}", ineq.hyperplane.coeff),
            coeffs,
            Relation::Ge,
            ineq.rhs,
        )?;
    }
    Ok(lp)
}

/// Exact optimum of the relaxed hyperplane program: minimize the total
/// multiplicity subject to all hyperplane inequalities over real
/// `n_j >= 0`. The (possibly fractional) value before any rounding.
pub fn hyperplane_lp_optimum(region: &RegionSpec) -> Result<Rational> {
    let lp = hyperplane_program(region)?;
    let res = lp.solve_lp();
    if res.status != Status::Optimal {
        return Err(Error::Verification(format!(
            "hyperplane relaxation ended {:?} on a feasible bounded program",
            res.status
        )));
    }
    Ok(res.objective.expect("optimal result carries an objective"))
}

/// Lower bound from the hyperplane program: the ceiling of the
/// relaxation optimum in [`BoundMode::Lp`], the exact integer optimum
/// in [`BoundMode::Ilp`]. Valid for every region, with no
/// non-redundancy hypothesis.
pub fn hyperplane_bound(
    region: &RegionSpec,
    mode: BoundMode,
    limits: &SolveLimits,
) -> Result<u64> {
    match mode {
        BoundMode::Lp => Ok(ceil_to_u64(&hyperplane_lp_optimum(region)?)),
        BoundMode::Ilp => {
            let mut lp = hyperplane_program(region)?;
            for j in 0..num_points(region.k()) as usize {
                lp.set_integral(j)?;
            }
            let res = lp.solve_ilp(limits)?;
            if res.status != Status::Optimal {
                return Err(Error::Verification(format!(
                    "hyperplane integer program ended {:?} on a feasible bounded program",
                    res.status
                )));
            }
            let objective = res.objective.expect("optimal result carries an objective");
            to_u64(&objective)
                .ok_or_else(|| Error::Verification("non-integral integer optimum".into()))
        }
    }
}

/// A bound value together with whether its hypothesis holds; bounds
/// whose `applicable` flag is false are reported but excluded from
/// [`BoundReport::best`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct AppliedBound {
    pub value: u64,
    pub applicable: bool,
}

fn caps_applicable(region: &RegionSpec) -> Result<bool> {
    Ok(!region.has_strictly_redundant_cap()?)
}

/// Averaging bound: the cap sum divided by `2^(k-1)`, rounded up.
/// Summing all hyperplane inequalities counts every point `2^(k-1)`
/// times; the caps stand in for the right-hand sides, so the value is
/// applicable only when no cap is strictly redundant.
pub fn averaging_bound(region: &RegionSpec) -> Result<AppliedBound> {
    let k = region.k();
    let divisor = 1u128 << (k - 1);
    let value = u128::from(region.cap_sum()).div_ceil(divisor) as u64;
    Ok(AppliedBound {
        value,
        applicable: caps_applicable(region)?,
    })
}

/// Per-file split bound: values indexed by file, and their maximum.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FileSplitBound {
    /// `per_file[i - 1]` is the bound obtained by splitting on file `i`.
    pub per_file: Vec<u64>,
    pub value: u64,
    pub applicable: bool,
}

/// File-split bound, for `k >= 2`: for each file `i`, the hyperplane
/// inequalities split into those whose off-hyperplane files avoid `i`
/// and those that include it; rounding each part separately before
/// averaging can beat [`averaging_bound`].
pub fn file_split_bound(region: &RegionSpec) -> Result<FileSplitBound> {
    let k = region.k();
    if k < 2 {
        return Err(Error::InvalidParameter(format!(
            "file-split bound needs k >= 2, got k = {k}"
        )));
    }
    let divisor = 1u128 << (k - 2);
    let per_file: Vec<u64> = (1..=k)
        .map(|i| {
            let bit = 1u32 << (i - 1);
            let mut without = 0u128;
            let mut with = 0u128;
            for mask in region.masks() {
                if mask & bit == 0 {
                    without += u128::from(region.cap(mask));
                } else {
                    with += u128::from(region.cap(mask));
                }
            }
            let alpha = without.div_ceil(divisor);
            let beta = with.div_ceil(divisor);
            ((alpha + beta).div_ceil(2)) as u64
        })
        .collect();
    let value = per_file.iter().copied().max().expect("k >= 2 files");
    Ok(FileSplitBound {
        per_file,
        value,
        applicable: caps_applicable(region)?,
    })
}

/// Per-point parity bound: values indexed by point, and their maximum.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ParityBound {
    /// `per_point[j - 1]` is the bound from the hyperplanes through
    /// point `j`.
    pub per_point: Vec<u64>,
    pub value: u64,
    pub applicable: bool,
}

/// Parity bound, for `k >= 2`: for each point `j`, sum the
/// inequalities of the hyperplanes containing `j` — exactly those
/// whose off-hyperplane file set meets the support of `j` in an even
/// number of files. Point `j` never appears on the left, so the other
/// multiplicities alone must reach the sum divided by `2^(k-2)`.
pub fn parity_bound(region: &RegionSpec) -> Result<ParityBound> {
    let k = region.k();
    if k < 2 {
        return Err(Error::InvalidParameter(format!(
            "parity bound needs k >= 2, got k = {k}"
        )));
    }
    let divisor = 1u128 << (k - 2);
    let per_point: Vec<u64> = (1..=num_points(k))
        .map(|j| {
            let support = point_support(j, k);
            let sum: u128 = region
                .masks()
                .filter(|mask| (mask & support).count_ones().is_multiple_of(2))
                .map(|mask| u128::from(region.cap(mask)))
                .sum();
            sum.div_ceil(divisor) as u64
        })
        .collect();
    let value = per_point.iter().copied().max().expect("at least one point");
    Ok(ParityBound {
        per_point,
        value,
        applicable: caps_applicable(region)?,
    })
}

/// All lower bounds of a region in one report.
///
/// `best` is the maximum over the applicable entries; the hyperplane
/// LP/ILP bounds are always applicable, the closed forms only when no
/// cap is strictly redundant. The split and parity bounds exist only
/// for `k >= 2`, the ILP bound only when requested.
#[derive(Debug, Clone, Serialize)]
pub struct BoundReport {
    pub k: usize,
    pub cap_sum: u64,
    pub averaging: AppliedBound,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub file_split: Option<FileSplitBound>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub parity: Option<ParityBound>,
    /// Exact relaxation optimum before the ceiling.
    pub relaxation_optimum: JsonRational,
    pub hyperplane_lp: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub hyperplane_ilp: Option<u64>,
    pub best: u64,
}

/// Evaluates every bound on `region`. The integer hyperplane bound is
/// solved only when `include_ilp` is set (it is the one potentially
/// expensive entry); `limits` caps its search.
pub fn bound_report(
    region: &RegionSpec,
    include_ilp: bool,
    limits: &SolveLimits,
) -> Result<BoundReport> {
    let k = region.k();
    let averaging = averaging_bound(region)?;
    let file_split = if k >= 2 {
        Some(file_split_bound(region)?)
    } else {
        None
    };
    let parity = if k >= 2 { Some(parity_bound(region)?) } else { None };
    let relaxation = hyperplane_lp_optimum(region)?;
    let hyperplane_lp = ceil_to_u64(&relaxation);
    let hyperplane_ilp = if include_ilp {
        Some(hyperplane_bound(region, BoundMode::Ilp, limits)?)
    } else {
        None
    };

    let mut best = hyperplane_lp;
    if let Some(ilp) = hyperplane_ilp {
        best = best.max(ilp);
    }
    if averaging.applicable {
        best = best.max(averaging.value);
    }
    if let Some(fs) = &file_split {
        if fs.applicable {
            best = best.max(fs.value);
        }
    }
    if let Some(p) = &parity {
        if p.applicable {
            best = best.max(p.value);
        }
    }
    Ok(BoundReport {
        k,
        cap_sum: region.cap_sum(),
        averaging,
        file_split,
        parity,
        relaxation_optimum: JsonRational(relaxation),
        hyperplane_lp,
        hyperplane_ilp,
        best,
    })
}

impl BoundReport {
    /// The report as a markdown table.
    pub fn to_markdown(&self) -> String {
        fn yes_no(applicable: bool) -> &'static str {
            if applicable {
                "yes"
            } else {
                "no"
            }
        }
        fn argmax(values: &[u64]) -> usize {
            let max = values.iter().copied().max().unwrap_or(0);
            values.iter().position(|&v| v == max).unwrap_or(0) + 1
        }
        let mut out = String::new();
        out.push_str("| bound | value | applicable | notes |\n");
        out.push_str("|---|---:|---|---|\n");
        out.push_str(&format!(
            "| averaging | {} | {} | cap sum {} over divisor {} |\n",
            self.averaging.value,
            yes_no(self.averaging.applicable),
            self.cap_sum,
            1u64 << (self.k - 1),
        ));
        if let Some(fs) = &self.file_split {
            out.push_str(&format!(
                "| file split | {} | {} | largest at file {} |\n",
                fs.value,
                yes_no(fs.applicable),
                argmax(&fs.per_file),
            ));
        }
        if let Some(p) = &self.parity {
            out.push_str(&format!(
                "| parity | {} | {} | largest at point {} |\n",
                p.value,
                yes_no(p.applicable),
                argmax(&p.per_point),
            ));
        }
        out.push_str(&format!(
            "| hyperplane LP | {} | yes | relaxation optimum {} |\n",
            self.hyperplane_lp,
            format_rational(&self.relaxation_optimum.0),
        ));
        if let Some(ilp) = self.hyperplane_ilp {
            out.push_str(&format!(
                "| hyperplane ILP | {ilp} | yes | exact integer optimum |\n"
            ));
        }
        out.push_str(&format!("| best | {} |  |  |\n", self.best));
        out
    }
}
