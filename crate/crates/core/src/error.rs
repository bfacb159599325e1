use thiserror::Error;

use crate::model::ItemId;

/// Errors raised by the data model and the solvers built on top of it.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("instance has no bins")]
    NoBins,
    #[error("bin {bin} has zero capacity")]
    ZeroCapacity { bin: usize },
    #[error("item {id} has zero size")]
    ZeroSize { id: ItemId },
    #[error("item {id} has color 0; colors start at 1")]
    ZeroColor { id: ItemId },
    #[error("item id {id} appears more than once")]
    DuplicateItem { id: ItemId },
    #[error("item {id} is not assigned to any bin")]
    UnassignedItem { id: ItemId },
    #[error("assignment refers to unknown item {id}")]
    UnknownItem { id: ItemId },
    #[error("item {id} is assigned to bin {bin}, but the instance has {bins} bins")]
    UnknownBin { id: ItemId, bin: usize, bins: usize },
    #[error("bin {bin} holds {load} units but has capacity {capacity}")]
    CapacityViolation {
        bin: usize,
        load: u64,
        capacity: u32,
    },
    #[error("enumeration budget of {limit} exceeded")]
    BudgetExceeded { limit: u64 },
    #[error("items are not grouped into contiguous color blocks (color {color} reappears at layer {layer})")]
    ColorsNotContiguous { color: u32, layer: usize },
    #[error("malformed path: {0}")]
    MalformedPath(String),
    #[error("invalid pair count q = {q}: {reason}")]
    InvalidQ { q: usize, reason: String },
    #[error("some bin can hold three or more items; the pairing method does not apply")]
    NotTwoPerBin,
    #[error("inconsistent variable values: {0}")]
    InconsistentValues(String),
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("invalid generator configuration: {0}")]
    InvalidConfig(String),
    #[error("invalid json: {0}")]
    Json(String),
}

pub type Result<T> = std::result::Result<T, Error>;
