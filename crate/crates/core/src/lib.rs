//! Exact solvers for bin packing with minimum color fragmentation: items carry
//! a size and a color, bins a capacity, and the objective counts, over all
//! colors, the bins holding at least one item of that color.
//!
//! The main route compiles one exact decision diagram per bin capacity
//! ([`bdd`]) and searches for one path per bin that covers every item exactly
//! once ([`search`]). [`mip`] writes the equivalent integer programs for
//! external solvers, [`matching`] handles the two-items-per-bin special case
//! and [`instgen`] produces random benchmark instances.

pub mod bdd;
pub mod error;
pub mod instgen;
pub mod matching;
pub mod mip;
pub mod model;
pub mod oracle;
pub mod search;

pub use error::{Error, Result};
pub use model::{
    canonical_order, evaluate, objective_lower_bound, Canonical, Instance, Item, ItemId, Outcome,
    Solution, SolveReport, Status,
};
