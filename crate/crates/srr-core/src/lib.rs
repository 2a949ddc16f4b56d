//! Exact computations on service rate regions of binary simplex-coded
//! storage.
//!
//! A storage design places coded symbols on servers; each server holds
//! one point of the binary projective geometry `PG(k-1, 2)`, and a
//! design is a multiset of such points. The *service rate region* of a
//! design is the set of demand vectors (one rate per file) that the
//! design can serve when every request is routed to a recovery set for
//! its file. This crate computes with those regions exactly, over
//! arbitrary-precision rationals:
//!
//! - [`gf2`]: points, hyperplanes, and recovery sets of `PG(k-1, 2)`;
//!   point multisets (designs).
//! - [`region`]: demand regions cut out by per-subset caps; canonical
//!   forms, vertex and generating-set enumeration, membership.
//! - [`lp`]: an exact rational LP/ILP solver with verifiable
//!   certificates; every optimization in the crate goes through it.
//! - [`service`]: membership of a demand in a design's service region,
//!   coverage of a whole region, and exact minimum design sizes.
//! - [`bounds`]: lower bounds on the number of servers needed to cover
//!   a region, from closed forms to hyperplane LP/ILP bounds.
//! - [`construct`]: explicit designs (two-file schemes, replicated
//!   simplex designs) with verified coverage and optimality reports.
//! - [`par`]: batch execution, data-parallel when the `parallel`
//!   feature (default) is on, sequential otherwise.
//!
//! # Example
//!
//! Find the exact minimum number of servers for a three-file region,
//! and a design achieving it:
//!
//! ```
//! use srr_core::lp::SolveLimits;
//! use srr_core::region::RegionSpec;
//! use srr_core::service::exact_nmin;
//!
//! // Cap each subset S of files at |S| + 1.
//! let region = RegionSpec::from_fn(3, |s| s.count_ones() as u64 + 1).unwrap();
//! let result = exact_nmin(&region, &SolveLimits::default()).unwrap();
//! assert_eq!(result.size, 6);
//! ```

pub mod bounds;
pub mod construct;
mod error;
pub mod gf2;
mod linalg;
pub mod lp;
pub mod par;
pub mod ratio;
pub mod region;
pub mod service;

pub use error::{Error, Result};
pub use gf2::{PointMultiset, RecoverySet};
pub use ratio::Rational;
pub use region::{Demand, RegionSpec};
pub use service::{exact_nmin, Allocation, NminResult};
