//! Service regions of storage designs: membership, coverage, and
//! exact minimum design sizes.
//!
//! A design serves a demand when the requested rate of every file can
//! be split across that file's recovery sets without overloading any
//! point: rates routed to sets containing point `j` must sum to at
//! most the multiplicity of `j`. Membership is therefore an exact
//! feasibility LP over the per-set rates; the satisfying rates form an
//! [`Allocation`], which is always re-verified by substitution before
//! being returned.
//!
//! Per-file rows use the `>=` form (routing at least the demanded
//! rate): any allocation overshooting a demand can be scaled back set
//! by set, so the served region is unchanged and feasibility is easier
//! to state.
//!
//! A design *covers* a region when it serves every demand in it;
//! because served sets are closed downward and convex, checking the
//! region's generating set suffices. [`exact_nmin`] inverts the
//! question: the fewest servers any design needs to cover a region,
//! computed by a single integer program over point multiplicities and
//! per-generator allocations.

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use num_traits::{Signed, Zero};

use crate::error::{Error, Result};
use crate::gf2::{num_points, recovery_catalog, PointMultiset, RecoverySet};
use crate::lp::{LinearProgram, Relation, SolveLimits, SolveResult, Status};
use crate::par;
use crate::ratio::{to_u64, JsonRational, Rational};
use crate::region::{Demand, RegionSpec};

/// Largest `k` for which [`exact_nmin`] will build its integer
/// program; the variable count grows with the full recovery catalog.
pub const MAX_NMIN_K: usize = 4;

/// Rates routed to recovery sets: the feasibility witness for serving
/// a demand. Entries with zero rate are omitted.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Allocation {
    entries: Vec<AllocationEntry>,
}

/// One routed rate: `rate` of the file `set.file` served by `set`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AllocationEntry {
    pub set: RecoverySet,
    pub rate: Rational,
}

impl Allocation {
    /// Allocation from explicit entries; zero rates are dropped.
    pub fn new(entries: Vec<AllocationEntry>) -> Self {
        Allocation {
            entries: entries
                .into_iter()
                .filter(|e| !e.rate.is_zero())
                .collect(),
        }
    }

    /// The empty allocation (serves only the zero demand).
    pub fn empty() -> Self {
        Allocation {
            entries: Vec::new(),
        }
    }

    /// Routed entries, zero-rate ones omitted.
    pub fn entries(&self) -> &[AllocationEntry] {
        &self.entries
    }

    /// Total rate routed to recovery sets of `file`.
    pub fn file_total(&self, file: usize) -> Rational {
        self.entries
            .iter()
            .filter(|e| e.set.file == file)
            .map(|e| e.rate.clone())
            .sum()
    }

    /// Total rate landing on point `j`.
    pub fn point_load(&self, j: u32) -> Rational {
        self.entries
            .iter()
            .filter(|e| e.set.points.contains(&j))
            .map(|e| e.rate.clone())
            .sum()
    }
}

impl Serialize for Allocation {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Entry<'a> {
            file: usize,
            recovery: &'a [u32],
            rate: JsonRational,
        }
        let entries: Vec<Entry> = self
            .entries
            .iter()
            .map(|e| Entry {
                file: e.set.file,
                recovery: &e.set.points,
                rate: JsonRational(e.rate.clone()),
            })
            .collect();
        entries.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Allocation {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Entry {
            file: usize,
            recovery: Vec<u32>,
            rate: JsonRational,
        }
        let entries = Vec::<Entry>::deserialize(deserializer)?;
        let entries = entries
            .into_iter()
            .map(|e| {
                if e.rate.0.is_negative() {
                    return Err(D::Error::custom(format!(
                        "field \"rate\": negative rate on recovery set {:?}",
                        e.recovery
                    )));
                }
                let mut points = e.recovery;
                points.sort_unstable();
                Ok(AllocationEntry {
                    set: RecoverySet {
                        file: e.file,
                        points,
                    },
                    rate: e.rate.0,
                })
            })
            .collect::<std::result::Result<Vec<_>, _>>()?;
        Ok(Allocation::new(entries))
    }
}

/// Checks an allocation against a design and a demand by exact
/// substitution: every set must be a valid recovery set for its file,
/// rates nonnegative, per-file totals at least the demanded rates, and
/// per-point loads within multiplicities.
pub fn verify_allocation(
    design: &PointMultiset,
    demand: &Demand,
    allocation: &Allocation,
) -> Result<bool> {
    let k = design.k();
    if demand.len() != k {
        return Err(Error::DimensionMismatch(format!(
            "demand has {} entries, design has k = {k}",
            demand.len()
        )));
    }
    for entry in allocation.entries() {
        if entry.set.file == 0 || entry.set.file > k {
            return Ok(false);
        }
        if !entry.set.is_valid(k) {
            return Ok(false);
        }
        if entry.rate.is_negative() {
            return Ok(false);
        }
    }
    for file in 1..=k {
        if allocation.file_total(file) < *demand.rate(file) {
            return Ok(false);
        }
    }
    for j in 1..=num_points(k) {
        if allocation.point_load(j) > Rational::from_integer(design.count(j).into()) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Membership LP shared by the public entry points; the catalog is
/// passed in so batch callers build it once.
fn membership_with_catalog(
    design: &PointMultiset,
    catalog: &[Vec<RecoverySet>],
    demand: &Demand,
) -> Result<Option<Allocation>> {
    let k = design.k();
    if demand.len() != k {
        return Err(Error::DimensionMismatch(format!(
            "demand has {} entries, design has k = {k}",
            demand.len()
        )));
    }
    let sets: Vec<&RecoverySet> = catalog.iter().flatten().collect();
    // Minimizing the total routed rate keeps the witness canonical and
    // the LP bounded; feasibility alone decides membership.
    let mut lp = LinearProgram::minimize(vec![Rational::from_integer(1.into()); sets.len()]);
    for file in 1..=k {
        let coeffs: Vec<Rational> = sets
            .iter()
            .map(|s| {
                if s.file == file {
                    Rational::from_integer(1.into())
                } else {
                    Rational::zero()
                }
            })
            .collect();
        lp.add_row(
            format!("file_{file}"),
            coeffs,
            Relation::Ge,
            demand.rate(file).clone(),
        )?;
    }
    for j in 1..=num_points(k) {
        let coeffs: Vec<Rational> = sets
            .iter()
            .map(|s| {
                if s.points.contains(&j) {
                    Rational::from_integer(1.into())
                } else {
                    Rational::zero()
                }
            })
            .collect();
        lp.add_row(
            format!("point_{j}"),
            coeffs,
            Relation::Le,
            Rational::from_integer(design.count(j).into()),
        )?;
    }
    let res = lp.solve_lp();
    match res.status {
        Status::Infeasible => Ok(None),
        Status::Optimal => {
            let entries: Vec<AllocationEntry> = sets
                .iter()
                .zip(&res.solution)
                .filter(|(_, rate)| !rate.is_zero())
                .map(|(set, rate)| AllocationEntry {
                    set: (*set).clone(),
                    rate: rate.clone(),
                })
                .collect();
            let allocation = Allocation::new(entries);
            if !verify_allocation(design, demand, &allocation)? {
                return Err(Error::Verification(
                    "membership witness failed substitution".into(),
                ));
            }
            Ok(Some(allocation))
        }
        Status::Unbounded => unreachable!("nonnegative objective cannot be unbounded"),
    }
}

/// Whether the design serves `demand`; on success returns the routing
/// witness, re-verified by substitution.
pub fn in_service_region(
    design: &PointMultiset,
    demand: &Demand,
) -> Result<Option<Allocation>> {
    let catalog = recovery_catalog(design.k())?;
    membership_with_catalog(design, &catalog, demand)
}

/// Coverage of one generating vector.
#[derive(Debug, Clone, Serialize)]
pub struct CoverageItem {
    pub vector: Demand,
    /// Routing witness, absent when the vector is not served.
    pub allocation: Option<Allocation>,
}

/// Result of checking a design against a whole region.
#[derive(Debug, Clone, Serialize)]
pub struct Coverage {
    /// Whether every generating vector is served.
    pub covered: bool,
    /// One item per generating vector, in canonical order.
    pub items: Vec<CoverageItem>,
}

impl Coverage {
    /// The first unserved generating vector, if any.
    pub fn first_violation(&self) -> Option<&Demand> {
        self.items
            .iter()
            .find(|item| item.allocation.is_none())
            .map(|item| &item.vector)
    }
}

/// Checks whether the design serves every demand of `region` by
/// testing its generating vectors (membership is downward closed and
/// convex, so they decide the whole region). Vector checks run as one
/// batch.
pub fn check_coverage(design: &PointMultiset, region: &RegionSpec) -> Result<Coverage> {
    if design.k() != region.k() {
        return Err(Error::DimensionMismatch(format!(
            "design has k = {}, region has k = {}",
            design.k(),
            region.k()
        )));
    }
    let catalog = recovery_catalog(design.k())?;
    let generators = region.generating_set()?;
    let outcomes: Vec<Result<CoverageItem>> = par::map_batch(generators, |vector| {
        let allocation = membership_with_catalog(design, &catalog, &vector)?;
        Ok(CoverageItem { vector, allocation })
    });
    let items = outcomes.into_iter().collect::<Result<Vec<_>>>()?;
    Ok(Coverage {
        covered: items.iter().all(|i| i.allocation.is_some()),
        items,
    })
}

/// Whether the design serves every demand of `region`.
pub fn covers_region(design: &PointMultiset, region: &RegionSpec) -> Result<bool> {
    Ok(check_coverage(design, region)?.covered)
}

/// A generating vector together with its routing witness.
#[derive(Debug, Clone, Serialize)]
pub struct VectorAllocation {
    pub vector: Demand,
    pub allocation: Allocation,
}

/// Result of [`exact_nmin`]: the minimum number of servers, a design
/// attaining it, and verified allocations for every generating vector.
#[derive(Debug, Clone, Serialize)]
pub struct NminResult {
    pub size: u64,
    pub design: PointMultiset,
    pub allocations: Vec<VectorAllocation>,
}

/// Exact minimum number of servers over all designs covering `region`,
/// as one integer program: integral multiplicities `n_j` are minimized
/// subject to, for every generating vector, a nonnegative routing of
/// that vector within the loads `n_j`. The witness design is the
/// optimum found by the deterministic depth-first search; its
/// allocations are re-verified by substitution before returning.
///
/// Supports `k <= 4`; fails with [`Error::NodeLimitExceeded`] when
/// `limits` is exhausted.
pub fn exact_nmin(region: &RegionSpec, limits: &SolveLimits) -> Result<NminResult> {
    let k = region.k();
    if k > MAX_NMIN_K {
        return Err(Error::LimitExceeded {
            operation: "exact_nmin",
            limit: MAX_NMIN_K,
            k,
        });
    }
    let catalog = recovery_catalog(k)?;
    let sets: Vec<&RecoverySet> = catalog.iter().flatten().collect();
    let generators = region.generating_set()?;
    let ell = num_points(k) as usize;
    let num_vars = ell + generators.len() * sets.len();

    // Variables: n_1..n_ell (integral, cost 1), then one allocation
    // block per generating vector (continuous, cost 0).
    let mut objective = vec![Rational::zero(); num_vars];
    for slot in objective.iter_mut().take(ell) {
        *slot = Rational::from_integer(1.into());
    }
    let mut lp = LinearProgram::minimize(objective);
    for j in 0..ell {
        lp.set_integral(j)?;
    }
    for (i, vector) in generators.iter().enumerate() {
        let block = ell + i * sets.len();
        for file in 1..=k {
            let mut coeffs = vec![Rational::zero(); num_vars];
            for (s, set) in sets.iter().enumerate() {
                if set.file == file {
                    coeffs[block + s] = Rational::from_integer(1.into());
                }
            }
            lp.add_row(
                format!("gen{i}_file_{file}"),
                coeffs,
                Relation::Ge,
                vector.rate(file).clone(),
            )?;
        }
        for j in 1..=num_points(k) {
            let mut coeffs = vec![Rational::zero(); num_vars];
            coeffs[(j - 1) as usize] = Rational::from_integer((-1).into());
            for (s, set) in sets.iter().enumerate() {
                if set.points.contains(&j) {
                    coeffs[block + s] = Rational::from_integer(1.into());
                }
            }
            lp.add_row(format!("gen{i}_point_{j}"), coeffs, Relation::Le, Rational::zero())?;
        }
    }

    let res = lp.solve_ilp(limits)?;
    debug_assert_eq!(res.status, Status::Optimal, "covering designs always exist");
    extract_nmin_result(region, &generators, &sets, res, ell)
}

fn extract_nmin_result(
    region: &RegionSpec,
    generators: &[Demand],
    sets: &[&RecoverySet],
    res: SolveResult,
    ell: usize,
) -> Result<NminResult> {
    if res.status != Status::Optimal {
        return Err(Error::Verification(format!(
            "minimum-size program ended {:?} though scaled designs are feasible",
            res.status
        )));
    }
    let counts: Vec<u64> = res.solution[..ell]
        .iter()
        .map(|x| to_u64(x).ok_or_else(|| Error::Verification("non-integral multiplicity".into())))
        .collect::<Result<Vec<_>>>()?;
    let design = PointMultiset::from_counts(region.k(), counts)?;
    let size = design.total();
    if Some(Rational::from_integer(size.into())) != res.objective {
        return Err(Error::Verification(
            "design size disagrees with the reported optimum".into(),
        ));
    }
    let mut allocations = Vec::with_capacity(generators.len());
    for (i, vector) in generators.iter().enumerate() {
        let block = ell + i * sets.len();
        let entries: Vec<AllocationEntry> = sets
            .iter()
            .enumerate()
            .filter(|(s, _)| !res.solution[block + s].is_zero())
            .map(|(s, set)| AllocationEntry {
                set: (*set).clone(),
                rate: res.solution[block + s].clone(),
            })
            .collect();
        let allocation = Allocation::new(entries);
        if !verify_allocation(&design, vector, &allocation)? {
            return Err(Error::Verification(format!(
                "allocation for generating vector {i} failed substitution"
            )));
        }
        allocations.push(VectorAllocation {
            vector: vector.clone(),
            allocation,
        });
    }
    Ok(NminResult {
        size,
        design,
        allocations,
    })
}

/// Closed-form two-file allocation: route demand 1 through `{2}` and
/// the rest through `{1,3}`, demand 2 through `{1}` and the rest
/// through `{2,3}`. Valid whenever the three service inequalities
/// hold, which is exactly membership for two files:
/// `lambda_1 <= n_2 + n_3`, `lambda_2 <= n_1 + n_3`, and
/// `lambda_1 + lambda_2 <= n_1 + n_2`.
pub fn allocate_k2(design: &PointMultiset, demand: &Demand) -> Result<Allocation> {
    if design.k() != 2 {
        return Err(Error::InvalidParameter(format!(
            "closed-form allocation needs k = 2, got k = {}",
            design.k()
        )));
    }
    if demand.len() != 2 {
        return Err(Error::DimensionMismatch(format!(
            "demand has {} entries, design has k = 2",
            demand.len()
        )));
    }
    let n = |j: u32| Rational::from_integer(design.count(j).into());
    let (l1, l2) = (demand.rate(1).clone(), demand.rate(2).clone());
    if l1 > n(2) + n(3) {
        return Err(Error::PreconditionViolated(format!(
            "lambda_1 > n_2 + n_3 ({} > {})",
            l1,
            n(2) + n(3)
        )));
    }
    if l2 > n(1) + n(3) {
        return Err(Error::PreconditionViolated(format!(
            "lambda_2 > n_1 + n_3 ({} > {})",
            l2,
            n(1) + n(3)
        )));
    }
    if l1.clone() + &l2 > n(1) + n(2) {
        return Err(Error::PreconditionViolated(format!(
            "lambda_1 + lambda_2 > n_1 + n_2 ({} > {})",
            l1.clone() + &l2,
            n(1) + n(2)
        )));
    }

    let zero = Rational::zero();
    let direct_1 = l1.clone().min(n(2));
    let spill_1 = (l1.clone() - n(2)).max(zero.clone());
    let direct_2 = l2.clone().min(n(1));
    let spill_2 = (l2.clone() - n(1)).max(zero);
    let set = |file: usize, points: Vec<u32>| RecoverySet { file, points };
    let allocation = Allocation::new(vec![
        AllocationEntry {
            set: set(1, vec![2]),
            rate: direct_1,
        },
        AllocationEntry {
            set: set(1, vec![1, 3]),
            rate: spill_1,
        },
        AllocationEntry {
            set: set(2, vec![1]),
            rate: direct_2,
        },
        AllocationEntry {
            set: set(2, vec![2, 3]),
            rate: spill_2,
        },
    ]);
    if !verify_allocation(design, demand, &allocation)? {
        return Err(Error::Verification(
            "closed-form two-file allocation failed substitution".into(),
        ));
    }
    Ok(allocation)
}
