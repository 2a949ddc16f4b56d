//! Demand regions cut out by per-subset rate caps.
//!
//! A region on `k` files is described by a cap `T(S)` for every
//! nonempty subset `S` of files: the demand vectors it contains are
//! exactly the nonnegative vectors whose rate sum over each `S` stays
//! within `T(S)`. Distinct cap tables can describe the same region;
//! [`RegionSpec::canonicalize`] computes the unique pointwise-minimal
//! table (monotone and subadditive) by replacing each cap with the
//! tightest combination of the others until a fixpoint is reached.
//!
//! Regions are bounded polytopes, so they are also described by their
//! vertex set, or more compactly by their *generating set*: the
//! vertices not dominated componentwise by another vertex. Everything
//! below the generating set is in the region, which makes it the right
//! interface for coverage checks.
//!
//! # Example
//!
//! ```
//! use srr_core::ratio::int;
//! use srr_core::region::{Demand, RegionSpec};
//!
//! // Two files: each alone capped at 2, together at 3.
//! let region = RegionSpec::new(2, vec![2, 2, 3]).unwrap();
//! let gen = region.generating_set().unwrap();
//! let expected: Vec<Demand> = vec![
//!     Demand::new(vec![int(1), int(2)]).unwrap(),
//!     Demand::new(vec![int(2), int(1)]).unwrap(),
//! ];
//! assert_eq!(gen, expected);
//! ```

use std::collections::BTreeSet;

use num_traits::{Signed, Zero};
use serde::de::Error as _;
use serde::ser::SerializeStruct;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::gf2::{self, subset_indices};
use crate::linalg::solve_square_system;
use crate::lp::{LinearProgram, Relation, Status};
use crate::ratio::{JsonRational, Rational};

/// Largest cap value accepted; keeps every internal `u64` sum of caps
/// far from overflow.
pub const MAX_CAP: u64 = 1_000_000_000_000;

/// A demand vector: one requested rate per file, nonnegative.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Demand {
    rates: Vec<Rational>,
}

impl Demand {
    /// Demand with the given per-file rates; every rate must be
    /// nonnegative.
    pub fn new(rates: Vec<Rational>) -> Result<Self> {
        if let Some(pos) = rates.iter().position(|r| r.is_negative()) {
            return Err(Error::InvalidInput(format!(
                "lambda[{pos}] is negative"
            )));
        }
        Ok(Demand { rates })
    }

    /// Zero demand on `k` files.
    pub fn zero(k: usize) -> Self {
        Demand {
            rates: vec![Rational::zero(); k],
        }
    }

    /// Number of files.
    pub fn len(&self) -> usize {
        self.rates.len()
    }

    /// Whether the demand covers zero files.
    pub fn is_empty(&self) -> bool {
        self.rates.is_empty()
    }

    /// Per-file rates.
    pub fn rates(&self) -> &[Rational] {
        &self.rates
    }

    /// Rate of the 1-based file `i`.
    pub fn rate(&self, i: usize) -> &Rational {
        &self.rates[i - 1]
    }

    /// Sum of the rates of the files in `mask`.
    pub fn masked_sum(&self, mask: u32) -> Rational {
        let mut sum = Rational::zero();
        for (idx, rate) in self.rates.iter().enumerate() {
            if mask >> idx & 1 == 1 {
                sum += rate;
            }
        }
        sum
    }

    /// Componentwise `self <= other`.
    pub fn dominated_by(&self, other: &Demand) -> bool {
        self.rates.len() == other.rates.len()
            && self.rates.iter().zip(&other.rates).all(|(a, b)| a <= b)
    }
}

impl Serialize for Demand {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = serializer.serialize_struct("Demand", 1)?;
        let lambda: Vec<JsonRational> =
            self.rates.iter().map(|r| JsonRational(r.clone())).collect();
        st.serialize_field("lambda", &lambda)?;
        st.end()
    }
}

impl<'de> Deserialize<'de> for Demand {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Dto {
            lambda: Vec<JsonRational>,
        }
        let dto = Dto::deserialize(deserializer)?;
        Demand::new(dto.lambda.into_iter().map(|r| r.0).collect())
            .map_err(|e| D::Error::custom(e.to_string()))
    }
}

/// Cap table of a demand region: one value per nonempty subset of the
/// `k` files, indexed by subset bitmask.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RegionSpec {
    k: usize,
    /// `values[mask]` for `mask in 1..2^k`; entry 0 is unused and zero.
    values: Vec<u64>,
}

impl RegionSpec {
    /// Region from caps listed in ascending bitmask order
    /// (`caps[mask - 1]` is the cap of `mask`).
    pub fn new(k: usize, caps: Vec<u64>) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidParameter("region needs k >= 1".into()));
        }
        if k > gf2::MAX_ENUM_K {
            return Err(Error::LimitExceeded {
                operation: "RegionSpec::new",
                limit: gf2::MAX_ENUM_K,
                k,
            });
        }
        let expected = (1usize << k) - 1;
        if caps.len() != expected {
            return Err(Error::DimensionMismatch(format!(
                "expected {expected} caps for k = {k}, got {}",
                caps.len()
            )));
        }
        if let Some(&big) = caps.iter().find(|&&v| v > MAX_CAP) {
            return Err(Error::InvalidParameter(format!(
                "cap {big} exceeds the supported maximum {MAX_CAP}"
            )));
        }
        let mut values = vec![0u64; 1 << k];
        values[1..].copy_from_slice(&caps);
        Ok(RegionSpec { k, values })
    }

    /// Region with `cap(mask) = f(mask)` for every nonempty mask.
    pub fn from_fn(k: usize, f: impl Fn(u32) -> u64) -> Result<Self> {
        if k == 0 || k > gf2::MAX_ENUM_K {
            return RegionSpec::new(k, Vec::new());
        }
        let caps = (1..1u32 << k).map(f).collect();
        RegionSpec::new(k, caps)
    }

    /// Region capping every subset at the same value.
    pub fn uniform(k: usize, cap: u64) -> Result<Self> {
        RegionSpec::from_fn(k, |_| cap)
    }

    /// Number of files.
    pub fn k(&self) -> usize {
        self.k
    }

    /// Cap of a nonempty subset mask.
    pub fn cap(&self, mask: u32) -> u64 {
        assert!(
            mask >= 1 && (mask as usize) < (1 << self.k),
            "mask {mask:#b} out of range for k = {}",
            self.k
        );
        self.values[mask as usize]
    }

    /// All nonempty subset masks, ascending.
    pub fn masks(&self) -> impl Iterator<Item = u32> {
        1..(1u32 << self.k)
    }

    /// Sum of all caps.
    pub fn cap_sum(&self) -> u64 {
        self.values.iter().sum()
    }

    /// The unique minimal cap table describing the same region:
    /// repeatedly lower each cap to the best superset cap (monotone
    /// closure) and to the best two-part split (subadditive closure)
    /// until nothing changes. The result is idempotent and never
    /// raises a cap.
    pub fn canonicalize(&self) -> RegionSpec {
        let mut values = self.values.clone();
        while canonical_sweep(&mut values, self.k) {}
        RegionSpec {
            k: self.k,
            values,
        }
    }

    /// Whether the table is already monotone and subadditive.
    pub fn is_canonical(&self) -> bool {
        let mut probe = self.values.clone();
        !canonical_sweep(&mut probe, self.k)
    }

    /// Whether `demand` satisfies every subset cap.
    pub fn contains(&self, demand: &Demand) -> Result<bool> {
        if demand.len() != self.k {
            return Err(Error::DimensionMismatch(format!(
                "demand has {} entries, region has k = {}",
                demand.len(),
                self.k
            )));
        }
        Ok(self
            .masks()
            .all(|mask| demand.masked_sum(mask) <= Rational::from_integer(self.cap(mask).into())))
    }

    /// All vertices of the region polytope, sorted lexicographically.
    ///
    /// Every vertex is the unique solution of `k` tight constraints
    /// chosen from the subset caps and the nonnegativity bounds, so the
    /// enumeration walks `k`-subsets of those constraints, pruning
    /// choices that are linearly dependent on the ones already made.
    pub fn vertices(&self) -> Result<Vec<Demand>> {
        let k = self.k;
        // Constraint list: one row per nonempty mask, then one
        // nonnegativity row per file.
        let mut rows: Vec<(Vec<Rational>, Rational)> = Vec::new();
        for mask in self.masks() {
            let coeffs: Vec<Rational> = (0..k)
                .map(|i| {
                    if mask >> i & 1 == 1 {
                        Rational::from_integer(1.into())
                    } else {
                        Rational::zero()
                    }
                })
                .collect();
            rows.push((coeffs, Rational::from_integer(self.cap(mask).into())));
        }
        for i in 0..k {
            let mut coeffs = vec![Rational::zero(); k];
            coeffs[i] = Rational::from_integer(1.into());
            rows.push((coeffs, Rational::zero()));
        }

        let mut found: BTreeSet<Vec<Rational>> = BTreeSet::new();
        let mut chosen: Vec<usize> = Vec::with_capacity(k);
        let mut echelon: Vec<Vec<Rational>> = Vec::with_capacity(k);
        self.collect_vertices(&rows, 0, &mut chosen, &mut echelon, &mut found);
        found.into_iter().map(Demand::new).collect()
    }

    fn collect_vertices(
        &self,
        rows: &[(Vec<Rational>, Rational)],
        start: usize,
        chosen: &mut Vec<usize>,
        echelon: &mut Vec<Vec<Rational>>,
        found: &mut BTreeSet<Vec<Rational>>,
    ) {
        let k = self.k;
        if chosen.len() == k {
            let mat: Vec<Vec<Rational>> = chosen.iter().map(|&r| rows[r].0.clone()).collect();
            let rhs: Vec<Rational> = chosen.iter().map(|&r| rows[r].1.clone()).collect();
            // Independent by the pruning below, so always solvable.
            let candidate =
                solve_square_system(mat, rhs).expect("chosen constraint rows are independent");
            if candidate.iter().all(|x| !x.is_negative()) {
                let demand = Demand {
                    rates: candidate.clone(),
                };
                let feasible = self.masks().all(|mask| {
                    demand.masked_sum(mask) <= Rational::from_integer(self.cap(mask).into())
                });
                if feasible {
                    found.insert(candidate);
                }
            }
            return;
        }
        for r in start..rows.len() {
            if rows.len() - r < k - chosen.len() {
                break;
            }
            // Reduce the candidate row against the echelon built so far;
            // a vanishing residue means linear dependence on the current
            // choice, which no completion can repair.
            let mut residue = rows[r].0.clone();
            for pivot_row in echelon.iter() {
                let lead = pivot_row
                    .iter()
                    .position(|v| !v.is_zero())
                    .expect("echelon rows are nonzero");
                if !residue[lead].is_zero() {
                    let factor = residue[lead].clone() / pivot_row[lead].clone();
                    for (res, piv) in residue.iter_mut().zip(pivot_row) {
                        let delta = &factor * piv;
                        *res -= delta;
                    }
                }
            }
            if residue.iter().all(|v| v.is_zero()) {
                continue;
            }
            echelon.push(residue);
            chosen.push(r);
            self.collect_vertices(rows, r + 1, chosen, echelon, found);
            chosen.pop();
            echelon.pop();
        }
    }

    /// The generating set: vertices not componentwise dominated by
    /// another vertex, sorted lexicographically. Every demand in the
    /// region lies below some member, so checking a property on the
    /// generating set checks it on the whole region.
    pub fn generating_set(&self) -> Result<Vec<Demand>> {
        let vertices = self.vertices()?;
        Ok(vertices
            .iter()
            .filter(|v| {
                !vertices
                    .iter()
                    .any(|w| w != *v && v.dominated_by(w))
            })
            .cloned()
            .collect())
    }

    /// Closed-form generating set for `k = 2` canonical tables
    /// `(x, y, sigma)`: the demands `(x, sigma - x)` and
    /// `(sigma - y, y)`. Requires monotonicity (`sigma >= max(x, y)`)
    /// and subadditivity (`sigma <= x + y`).
    pub fn generating_set_k2(&self) -> Result<Vec<Demand>> {
        if self.k != 2 {
            return Err(Error::InvalidParameter(format!(
                "closed-form generating set needs k = 2, got k = {}",
                self.k
            )));
        }
        let (x, y, sigma) = (self.cap(0b01), self.cap(0b10), self.cap(0b11));
        if sigma < x.max(y) {
            return Err(Error::PreconditionViolated(format!(
                "cap table not monotone: T({{1,2}}) = {sigma} < max(T({{1}}), T({{2}})) = {}",
                x.max(y)
            )));
        }
        if sigma > x + y {
            return Err(Error::PreconditionViolated(format!(
                "cap table not subadditive: T({{1,2}}) = {sigma} > T({{1}}) + T({{2}}) = {}",
                x + y
            )));
        }
        let mut set = BTreeSet::new();
        set.insert(vec![
            Rational::from_integer(x.into()),
            Rational::from_integer((sigma - x).into()),
        ]);
        set.insert(vec![
            Rational::from_integer((sigma - y).into()),
            Rational::from_integer(y.into()),
        ]);
        set.into_iter().map(Demand::new).collect()
    }

    /// Whether the cap of `mask` is *strictly* redundant: the maximum
    /// of the masked rate sum over the region stays strictly below it.
    /// Ties (maximum equals the cap) are not strict.
    pub fn is_strictly_redundant(&self, mask: u32) -> Result<bool> {
        let k = self.k;
        assert!(
            mask >= 1 && (mask as usize) < (1 << k),
            "mask {mask:#b} out of range for k = {k}"
        );
        // Maximize the masked sum: minimize its negation.
        let objective: Vec<Rational> = (0..k)
            .map(|i| {
                if mask >> i & 1 == 1 {
                    Rational::from_integer((-1).into())
                } else {
                    Rational::zero()
                }
            })
            .collect();
        let mut lp = LinearProgram::minimize(objective);
        for m in self.masks() {
            let coeffs: Vec<Rational> = (0..k)
                .map(|i| {
                    if m >> i & 1 == 1 {
                        Rational::from_integer(1.into())
                    } else {
                        Rational::zero()
                    }
                })
                .collect();
            lp.add_row(
                format!("cap_{}", m),
                coeffs,
                Relation::Le,
                Rational::from_integer(self.cap(m).into()),
            )?;
        }
        let res = lp.solve_lp();
        // Regions are nonempty (zero demand) and every file is capped
        // by its singleton row, so the LP always has a finite optimum.
        debug_assert_eq!(res.status, Status::Optimal);
        let max_sum = -res.objective.expect("bounded nonempty region");
        Ok(max_sum < Rational::from_integer(self.cap(mask).into()))
    }

    /// Whether any cap is strictly redundant. The closed-form bounds
    /// in [`crate::bounds`] are stated for tables without strictly
    /// redundant caps, so they report this as their applicability.
    pub fn has_strictly_redundant_cap(&self) -> Result<bool> {
        for mask in self.masks() {
            if self.is_strictly_redundant(mask)? {
                return Ok(true);
            }
        }
        Ok(false)
    }
}

/// Whether two cap tables describe the same set of demands, decided by
/// comparing vertex enumerations.
pub fn regions_equal(a: &RegionSpec, b: &RegionSpec) -> Result<bool> {
    if a.k() != b.k() {
        return Err(Error::DimensionMismatch(format!(
            "cannot compare regions with k = {} and k = {}",
            a.k(),
            b.k()
        )));
    }
    Ok(a.vertices()? == b.vertices()?)
}

/// One full canonicalization sweep over every nonempty mask in
/// ascending order: monotone then subadditive replacements. Returns
/// whether anything changed; the cap sum never increases.
pub(crate) fn canonical_sweep(values: &mut [u64], k: usize) -> bool {
    let full = 1u32 << k;
    let mut changed = false;
    for s in 1..full {
        // Supersets can only tighten: T(S) <= T(V) for S inside V.
        for v in (s + 1)..full {
            if v & s == s && values[v as usize] < values[s as usize] {
                values[s as usize] = values[v as usize];
                changed = true;
            }
        }
        // Two-part splits can only tighten: T(S) <= T(U) + T(S minus U).
        for u in 1..s {
            if u & s == u {
                let rest = s & !u;
                if rest == 0 {
                    continue;
                }
                let split = values[u as usize] + values[rest as usize];
                if split < values[s as usize] {
                    values[s as usize] = split;
                    changed = true;
                }
            }
        }
    }
    changed
}

/// The lower set of the convex hull of finitely many demands: all
/// demands componentwise below some convex combination of the points.
#[derive(Debug, Clone)]
pub struct LowerHull {
    dim: usize,
    points: Vec<Demand>,
}

/// Builds the lower set of `conv(points)`. Needs at least one point;
/// all points must share a dimension.
pub fn lower_set_conv_hull(points: &[Demand]) -> Result<LowerHull> {
    let Some(first) = points.first() else {
        return Err(Error::InvalidParameter(
            "convex hull needs at least one point".into(),
        ));
    };
    let dim = first.len();
    if let Some(odd) = points.iter().find(|p| p.len() != dim) {
        return Err(Error::DimensionMismatch(format!(
            "hull points mix dimensions {dim} and {}",
            odd.len()
        )));
    }
    Ok(LowerHull {
        dim,
        points: points.to_vec(),
    })
}

impl LowerHull {
    /// Whether `demand` is below some convex combination of the hull
    /// points, decided by an exact feasibility LP over the combination
    /// weights.
    pub fn contains(&self, demand: &Demand) -> Result<bool> {
        if demand.len() != self.dim {
            return Err(Error::DimensionMismatch(format!(
                "demand has {} entries, hull has dimension {}",
                demand.len(),
                self.dim
            )));
        }
        let p = self.points.len();
        let mut lp = LinearProgram::minimize(vec![Rational::zero(); p]);
        let ones = vec![Rational::from_integer(1.into()); p];
        lp.add_row("weights_le", ones.clone(), Relation::Le, Rational::from_integer(1.into()))?;
        lp.add_row("weights_ge", ones, Relation::Ge, Rational::from_integer(1.into()))?;
        for coord in 1..=self.dim {
            let coeffs: Vec<Rational> = self
                .points
                .iter()
                .map(|pt| pt.rate(coord).clone())
                .collect();
            lp.add_row(
                format!("coord_{coord}"),
                coeffs,
                Relation::Ge,
                demand.rate(coord).clone(),
            )?;
        }
        Ok(lp.solve_lp().status == Status::Optimal)
    }
}

impl Serialize for RegionSpec {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Entry {
            subset: Vec<usize>,
            value: u64,
        }
        let mut st = serializer.serialize_struct("RegionSpec", 2)?;
        st.serialize_field("k", &self.k)?;
        let table: Vec<Entry> = self
            .masks()
            .map(|mask| Entry {
                subset: subset_indices(mask),
                value: self.cap(mask),
            })
            .collect();
        st.serialize_field("T", &table)?;
        st.end()
    }
}

impl<'de> Deserialize<'de> for RegionSpec {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Entry {
            subset: Vec<usize>,
            value: u64,
        }
        #[derive(Deserialize)]
        struct Dto {
            k: usize,
            #[serde(rename = "T")]
            table: Vec<Entry>,
        }
        let dto = Dto::deserialize(deserializer)?;
        if dto.k == 0 || dto.k > gf2::MAX_ENUM_K {
            return Err(D::Error::custom(format!(
                "field \"k\": must be between 1 and {}, got {}",
                gf2::MAX_ENUM_K,
                dto.k
            )));
        }
        let expected = (1usize << dto.k) - 1;
        let mut caps: Vec<Option<u64>> = vec![None; expected];
        for entry in &dto.table {
            let mask = gf2::subset_from_indices(&entry.subset, dto.k)
                .map_err(|e| D::Error::custom(format!("field \"T\": {e}")))?;
            if mask == 0 {
                return Err(D::Error::custom(
                    "field \"T\": the empty subset has no cap",
                ));
            }
            let slot = &mut caps[mask as usize - 1];
            if slot.is_some() {
                return Err(D::Error::custom(format!(
                    "field \"T\": duplicate entry for subset {:?}",
                    entry.subset
                )));
            }
            *slot = Some(entry.value);
        }
        let mut values = Vec::with_capacity(expected);
        for (idx, cap) in caps.into_iter().enumerate() {
            match cap {
                Some(v) => values.push(v),
                None => {
                    return Err(D::Error::custom(format!(
                        "field \"T\": missing entry for subset {:?}",
                        subset_indices(idx as u32 + 1)
                    )))
                }
            }
        }
        RegionSpec::new(dto.k, values).map_err(|e| D::Error::custom(e.to_string()))
    }
}
