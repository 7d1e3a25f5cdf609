use thiserror::Error;

/// Errors surfaced by system validation, the J calculus and the oracle.
///
/// Verdicts that are merely blocked (for example order checks on a system
/// that is not densely defined) are report states, not errors.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("atom {atom} has non-positive mass")]
    InvalidMass { atom: usize },

    #[error("phi({atom}) = {target} is outside the atom range 0..{size}")]
    InvalidMap {
        atom: usize,
        target: usize,
        size: usize,
    },

    #[error("invalid tail parameters: {0}")]
    InvalidTail(String),

    #[error("literal `{0}` is not representable exactly; use `p/q` or integer form in rational mode")]
    MixedField(String),

    #[error("fiber is not representable as a finite set plus one tail segment")]
    UnsupportedTailFiber,

    #[error("unsupported analysis on a geometric tail model: {0}")]
    UnsupportedTailAnalysis(String),

    #[error("recursion and direct J computations disagree at order {order}, atom {atom}")]
    RecursionDirectMismatch { order: usize, atom: usize },

    #[error("infinite value encountered in {0}")]
    InfiniteValue(String),

    #[error("alternating test needs orders up to {needed} but only {available} are available")]
    DepthExceedsData { needed: usize, available: usize },

    #[error("oracle disagrees with the pointwise criteria: {0}")]
    OracleMismatch(String),

    #[error("the oracle works on finite spaces only")]
    RefusesTailSpace,

    #[error("unknown example `{0}`")]
    UnknownExample(String),
}

pub type Result<T> = std::result::Result<T, Error>;
