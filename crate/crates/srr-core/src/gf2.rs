//! Binary projective geometry `PG(k-1, 2)`: points, hyperplanes,
//! recovery sets, and point multisets (storage designs).
//!
//! Points are indexed `1..=2^k - 1`. The coordinate vector of point
//! `j` is the `k`-bit binary expansion of `j` with coordinate 1 as the
//! most significant bit, so the unit vector `e_i` is the point with
//! index `2^(k-i)`. Subsets of the file set `[k]` travel as bitmasks
//! in which bit `i - 1` stands for file `i`.
//!
//! A *recovery set* for file `i` is a set of points that is linearly
//! independent over GF(2) and XORs to `e_i`. Independence plus the
//! target sum is equivalent to subset-minimality (no proper subset
//! also sums to `e_i`): a dependent solution contains a dependency
//! whose removal leaves a smaller solution, and conversely dropping
//! points from an independent solution changes the sum.
//!
//! # Example
//!
//! ```
//! use srr_core::gf2;
//!
//! // Point 3 of PG(2,2) is (0,1,1); e_1 is point 4.
//! assert_eq!(gf2::point_vector(3, 3).unwrap(), vec![0, 1, 1]);
//! assert_eq!(gf2::unit_point(1, 3), 4);
//!
//! // File 2 of a three-file geometry has eight recovery sets:
//! // {2} itself, three pairs, and four independent triples.
//! let sets = gf2::enumerate_recovery_sets(3, 2).unwrap();
//! assert_eq!(sets.len(), 8);
//! ```

use std::collections::BTreeMap;

use serde::de::Error as _;
use serde::ser::SerializeStruct;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Largest `k` for which exhaustive enumeration (points, hyperplanes,
/// recovery sets) is supported; the point count scales as `2^k - 1`.
pub const MAX_ENUM_K: usize = 5;

/// Number of points of `PG(k-1, 2)`.
pub fn num_points(k: usize) -> u32 {
    (1u32 << k) - 1
}

fn check_k(k: usize, operation: &'static str) -> Result<()> {
    if k == 0 {
        return Err(Error::InvalidParameter(format!(
            "{operation} needs k >= 1, got k = 0"
        )));
    }
    if k > MAX_ENUM_K {
        return Err(Error::LimitExceeded {
            operation,
            limit: MAX_ENUM_K,
            k,
        });
    }
    Ok(())
}

fn check_point(j: u32, k: usize) -> Result<()> {
    if j == 0 || j > num_points(k) {
        return Err(Error::PointOutOfRange {
            index: j,
            k,
            max: num_points(k),
        });
    }
    Ok(())
}

/// Coordinate vector of point `j`, coordinate 1 first.
pub fn point_vector(j: u32, k: usize) -> Result<Vec<u8>> {
    check_k(k, "point_vector")?;
    check_point(j, k)?;
    Ok((0..k).map(|c| ((j >> (k - 1 - c)) & 1) as u8).collect())
}

/// Point index of a coordinate vector, coordinate 1 first.
/// Inverse of [`point_vector`] on nonzero vectors.
pub fn vector_index(bits: &[u8]) -> u32 {
    bits.iter().fold(0, |acc, &b| (acc << 1) | u32::from(b & 1))
}

/// Point index of the unit vector `e_i`, for a 1-based file index `i`.
pub fn unit_point(i: usize, k: usize) -> u32 {
    assert!(i >= 1 && i <= k, "file index {i} out of range 1..={k}");
    1 << (k - i)
}

/// Subset mask of the files in the support of point `j` (bit `i - 1`
/// set when coordinate `i` of `j` is 1).
pub fn point_support(j: u32, k: usize) -> u32 {
    (1..=k)
        .filter(|&i| (j >> (k - i)) & 1 == 1)
        .fold(0, |m, i| m | (1 << (i - 1)))
}

/// GF(2) pairing of two index-encoded vectors: 0 when `popcount(a & b)`
/// is even, 1 when odd.
pub fn dot_parity(a: u32, b: u32) -> u32 {
    (a & b).count_ones() & 1
}

/// 1-based element list of a subset mask, ascending.
pub fn subset_indices(mask: u32) -> Vec<usize> {
    (0..32).filter(|b| mask >> b & 1 == 1).map(|b| b + 1).collect()
}

/// Subset mask from a list of 1-based elements in `1..=k`.
/// Rejects out-of-range and duplicate elements.
pub fn subset_from_indices(indices: &[usize], k: usize) -> Result<u32> {
    let mut mask = 0u32;
    for &i in indices {
        if i == 0 || i > k {
            return Err(Error::InvalidInput(format!(
                "subset element {i} out of range 1..={k}"
            )));
        }
        let bit = 1 << (i - 1);
        if mask & bit != 0 {
            return Err(Error::InvalidInput(format!("duplicate subset element {i}")));
        }
        mask |= bit;
    }
    Ok(mask)
}

/// A hyperplane of `PG(k-1, 2)`, identified by its nonzero coefficient
/// mask `coeff` (encoded like a point index): the hyperplane contains
/// exactly the points `j` with `popcount(coeff & j)` even.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Hyperplane {
    /// Coefficient mask, `1..=2^k - 1`.
    pub coeff: u32,
    /// Points on the hyperplane, ascending. Always `2^(k-1) - 1` of them.
    pub members: Vec<u32>,
    /// Points off the hyperplane, ascending. Always `2^(k-1)` of them.
    pub outside: Vec<u32>,
    /// Subset mask of files whose unit point lies off the hyperplane;
    /// equals the support of `coeff`.
    pub excluded_units: u32,
}

/// All `2^k - 1` hyperplanes, in ascending order of coefficient mask.
pub fn enumerate_hyperplanes(k: usize) -> Result<Vec<Hyperplane>> {
    check_k(k, "enumerate_hyperplanes")?;
    let planes = (1..=num_points(k))
        .map(|coeff| {
            let (members, outside): (Vec<u32>, Vec<u32>) =
                (1..=num_points(k)).partition(|&j| dot_parity(coeff, j) == 0);
            Hyperplane {
                coeff,
                members,
                outside,
                excluded_units: point_support(coeff, k),
            }
        })
        .collect();
    Ok(planes)
}

/// Whether a set of points is linearly independent over GF(2).
/// Computed by inserting each point into an XOR basis.
pub fn is_independent(points: &[u32]) -> bool {
    let mut basis: Vec<u32> = Vec::with_capacity(points.len());
    for &p in points {
        let mut v = p;
        for &b in &basis {
            v = v.min(v ^ b);
        }
        if v == 0 {
            return false;
        }
        basis.push(v);
        basis.sort_unstable_by(|a, b| b.cmp(a));
    }
    true
}

/// A recovery set: points that are independent over GF(2) and XOR to
/// the unit vector of `file`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct RecoverySet {
    /// 1-based file index this set recovers.
    pub file: usize,
    /// Point indices, ascending.
    pub points: Vec<u32>,
}

impl RecoverySet {
    /// Whether `self.points` is independent and XORs to `e_file`.
    pub fn is_valid(&self, k: usize) -> bool {
        !self.points.is_empty()
            && self.points.iter().all(|&j| j >= 1 && j <= num_points(k))
            && is_independent(&self.points)
            && self.points.iter().fold(0, |a, &j| a ^ j) == unit_point(self.file, k)
    }
}

/// All recovery sets for `file`, ordered by size and then
/// lexicographically by point list.
pub fn enumerate_recovery_sets(k: usize, file: usize) -> Result<Vec<RecoverySet>> {
    check_k(k, "enumerate_recovery_sets")?;
    if file == 0 || file > k {
        return Err(Error::InvalidParameter(format!(
            "file index {file} out of range 1..={k}"
        )));
    }
    let target = unit_point(file, k);
    let n = num_points(k);
    let mut sets = Vec::new();
    // Independent sets have at most k elements, so sizes beyond k
    // cannot occur.
    let mut stack: Vec<u32> = Vec::with_capacity(k);
    for size in 1..=k {
        collect_recovery_sets(n, size, 1, target, &mut stack, &mut sets);
    }
    Ok(sets
        .into_iter()
        .map(|points| RecoverySet { file, points })
        .collect())
}

/// Extends `stack` with combinations from `next..=n` of the given
/// remaining size, in lexicographic order, keeping exactly the
/// independent ones that XOR to `target`.
fn collect_recovery_sets(
    n: u32,
    size: usize,
    next: u32,
    target: u32,
    stack: &mut Vec<u32>,
    out: &mut Vec<Vec<u32>>,
) {
    if stack.len() == size {
        let xor = stack.iter().fold(0, |a, &j| a ^ j);
        if xor == target && is_independent(stack) {
            out.push(stack.clone());
        }
        return;
    }
    let remaining = (size - stack.len()) as u32;
    let mut j = next;
    while j + remaining - 1 <= n {
        stack.push(j);
        collect_recovery_sets(n, size, j + 1, target, stack, out);
        stack.pop();
        j += 1;
    }
}

/// Recovery sets for every file: entry `i - 1` lists the sets for
/// file `i`, each in canonical order.
pub fn recovery_catalog(k: usize) -> Result<Vec<Vec<RecoverySet>>> {
    (1..=k).map(|i| enumerate_recovery_sets(k, i)).collect()
}

/// A multiset of points of `PG(k-1, 2)`: a storage design assigning a
/// multiplicity (number of servers) to each point.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PointMultiset {
    k: usize,
    counts: Vec<u64>,
}

impl PointMultiset {
    /// The empty design on `PG(k-1, 2)`.
    pub fn new(k: usize) -> Result<Self> {
        check_k(k, "PointMultiset::new")?;
        Ok(PointMultiset {
            k,
            counts: vec![0; num_points(k) as usize],
        })
    }

    /// Design with the given multiplicity per point index.
    pub fn from_counts(k: usize, counts: Vec<u64>) -> Result<Self> {
        check_k(k, "PointMultiset::from_counts")?;
        if counts.len() != num_points(k) as usize {
            return Err(Error::DimensionMismatch(format!(
                "expected {} multiplicities for k = {k}, got {}",
                num_points(k),
                counts.len()
            )));
        }
        Ok(PointMultiset { k, counts })
    }

    /// Geometry dimension parameter `k`.
    pub fn k(&self) -> usize {
        self.k
    }

    /// Multiplicity of point `j`.
    pub fn count(&self, j: u32) -> u64 {
        assert!(j >= 1 && j <= num_points(self.k), "point {j} out of range");
        self.counts[(j - 1) as usize]
    }

    /// Adds `copies` servers at point `j`.
    pub fn add(&mut self, j: u32, copies: u64) -> Result<()> {
        check_point(j, self.k)?;
        self.counts[(j - 1) as usize] += copies;
        Ok(())
    }

    /// Adds every point of `other`, point by point.
    pub fn extend(&mut self, other: &PointMultiset) -> Result<()> {
        if other.k != self.k {
            return Err(Error::DimensionMismatch(format!(
                "cannot merge designs for k = {} and k = {}",
                self.k, other.k
            )));
        }
        for (mine, theirs) in self.counts.iter_mut().zip(&other.counts) {
            *mine += theirs;
        }
        Ok(())
    }

    /// Total number of servers.
    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// `(point index, multiplicity)` for every point with nonzero
    /// multiplicity, ascending by index.
    pub fn support(&self) -> impl Iterator<Item = (u32, u64)> + '_ {
        self.counts
            .iter()
            .enumerate()
            .filter(|(_, &c)| c > 0)
            .map(|(idx, &c)| (idx as u32 + 1, c))
    }

    /// Multiplicities indexed by `point - 1`.
    pub fn counts(&self) -> &[u64] {
        &self.counts
    }
}

impl Serialize for PointMultiset {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        // Keys ascend numerically and zero multiplicities are omitted,
        // so equal designs serialize to identical bytes.
        let mut st = serializer.serialize_struct("PointMultiset", 2)?;
        st.serialize_field("k", &self.k)?;
        let n: BTreeMap<u32, u64> = self.support().collect();
        let n: serde_json::Map<String, serde_json::Value> = n
            .into_iter()
            .map(|(j, c)| (j.to_string(), serde_json::Value::from(c)))
            .collect();
        st.serialize_field("n", &n)?;
        st.end()
    }
}

impl<'de> Deserialize<'de> for PointMultiset {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Dto {
            k: usize,
            n: serde_json::Map<String, serde_json::Value>,
        }
        let dto = Dto::deserialize(deserializer)?;
        let mut design = PointMultiset::new(dto.k).map_err(|e| D::Error::custom(e.to_string()))?;
        for (key, value) in &dto.n {
            let j: u32 = key.parse().map_err(|_| {
                D::Error::custom(format!("field \"n\": key {key:?} is not a point index"))
            })?;
            let copies = value.as_u64().ok_or_else(|| {
                D::Error::custom(format!(
                    "field \"n\": multiplicity of point {j} must be a nonnegative integer, got {value}"
                ))
            })?;
            design.add(j, copies).map_err(|e| {
                D::Error::custom(format!("field \"n\": {e}"))
            })?;
        }
        Ok(design)
    }
}

/// The simplex design on a nonempty subset `s` of files: one server at
/// every point whose support lies inside `s` (that is, `2^|s| - 1`
/// servers).
pub fn simplex_points(s: u32, k: usize) -> Result<PointMultiset> {
    check_k(k, "simplex_points")?;
    if s == 0 {
        return Err(Error::InvalidParameter(
            "simplex design needs a nonempty file subset".into(),
        ));
    }
    if s >= 1 << k {
        return Err(Error::InvalidParameter(format!(
            "subset mask {s:#b} has elements beyond k = {k}"
        )));
    }
    let mut design = PointMultiset::new(k)?;
    for j in 1..=num_points(k) {
        if point_support(j, k) & !s == 0 {
            design.add(j, 1)?;
        }
    }
    Ok(design)
}

/// The two-point design `{e_i, e_j}` for distinct files `i` and `j`:
/// half of a two-file simplex.
pub fn half_simplex_pair(i: usize, j: usize, k: usize) -> Result<PointMultiset> {
    check_k(k, "half_simplex_pair")?;
    if i == 0 || i > k || j == 0 || j > k {
        return Err(Error::InvalidParameter(format!(
            "file indices ({i}, {j}) out of range 1..={k}"
        )));
    }
    if i == j {
        return Err(Error::InvalidParameter(format!(
            "half-simplex pair needs two distinct files, got ({i}, {j})"
        )));
    }
    let mut design = PointMultiset::new(k)?;
    design.add(unit_point(i, k), 1)?;
    design.add(unit_point(j, k), 1)?;
    Ok(design)
}
