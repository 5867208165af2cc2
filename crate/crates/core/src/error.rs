use alloc::boxed::Box;

/// Errors raised while building models, cells and affinity vectors.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("{0} must not be empty")]
    Empty(&'static str),
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
    #[error("coincident sites (separation {separation:e})")]
    CoincidentSites { separation: f64 },
    #[error("representatives {first} and {second} coincide")]
    DuplicateRepresentatives { first: usize, second: usize },
    #[error("label {label} out of range for {k} clusters")]
    LabelOutOfRange { label: usize, k: usize },
    #[error("cluster {0} has no members")]
    EmptyCluster(usize),
    #[error("point outside the generator domain")]
    OutsideDomain,
    #[error("halfspace normal is zero")]
    ZeroNormal,
    #[error("bounding box does not contain the query point")]
    QueryOutsideBox,
    #[error("point lies outside the cell (violation {violation:e})")]
    OutsideCell { violation: f64 },
    #[error("chord is unbounded")]
    UnboundedChord,
    #[error("influence cell has empty interior")]
    EmptyCell,
    #[error("invalid {name}: {reason}")]
    InvalidParameter {
        name: &'static str,
        reason: &'static str,
    },
    #[error("malformed affinity vector")]
    MalformedAffinity,
    #[error("representatives span a rank-zero subspace")]
    RankZero,
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("at index {index}: {source}")]
    AtIndex { index: usize, source: Box<Error> },
}

impl Error {
    pub(crate) fn at(self, index: usize) -> Self {
        Error::AtIndex {
            index,
            source: Box::new(self),
        }
    }

    pub(crate) fn invalid(name: &'static str, reason: &'static str) -> Self {
        Error::InvalidParameter { name, reason }
    }
}

pub type Result<T> = core::result::Result<T, Error>;
