use alloc::string::String;

use thiserror::Error;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("unknown column `{0}`")]
    UnknownColumn(String),
    #[error("unknown state `{state}` for column `{column}`")]
    UnknownState { column: String, state: String },
    #[error("header mismatch: {0}")]
    HeaderMismatch(String),
    #[error("cannot parse `{value}` in column `{column}` as {expected}")]
    UnparseableCell {
        column: String,
        value: String,
        expected: &'static str,
    },
    #[error("invalid column spec for `{column}`: {reason}")]
    InvalidColumnSpec { column: String, reason: String },
    #[error("dataset is empty after cleaning ({dropped} rows dropped)")]
    EmptyAfterCleaning { dropped: usize },
    #[error("column `{0}` is not numeric")]
    NonNumericColumn(String),
    #[error("invalid binning for `{column}`: {reason}")]
    InvalidBinning { column: String, reason: String },
    #[error("invalid roles: {0}")]
    InvalidRoles(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("joint cardinality {cardinality} exceeds cap {cap}")]
    CardinalityCap { cardinality: u128, cap: u128 },
    #[error("unidentifiable: conditioning cell has zero mass ({0})")]
    UnidentifiableCell(String),
    #[error("identity residual {residual:e} exceeds tolerance in {identity}")]
    IdentityBreach { identity: &'static str, residual: f64 },
    #[error("invalid structural causal model: {0}")]
    InvalidScm(String),
    #[error("invalid query: {0}")]
    InvalidQuery(String),
}
