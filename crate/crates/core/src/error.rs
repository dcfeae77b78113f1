use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("modulus {0} is not an odd prime")]
    InvalidModulus(u32),

    #[error("generator `{name}`: {reason}")]
    InvalidGenerator { name: String, reason: String },

    #[error("degree {degree} exceeds truncation {truncation}")]
    DegreeOutOfRange { degree: usize, truncation: usize },

    #[error("ambient dimensions differ ({left} vs {right})")]
    AmbientMismatch { left: usize, right: usize },

    #[error("elements belong to different algebras")]
    ForeignElement,

    #[error("relation is not homogeneous")]
    NonHomogeneous,

    #[error("relation of degree 0 would kill the unit")]
    DegreeZeroRelation,

    #[error("tensor width {width} is not p^2 = {expected}")]
    WidthMismatch { width: usize, expected: usize },

    #[error("algebra is defined over F_{algebra}, tensor power requested over F_{requested}")]
    FieldMismatch { algebra: u32, requested: u32 },

    #[error(
        "kernel of restriction in degree {degree}: nullspace has dimension {linear}, \
         type-1/type-2 span has dimension {combinatorial}"
    )]
    KernelMismatch {
        degree: usize,
        linear: usize,
        combinatorial: usize,
    },

    #[error("vector is not sigma-invariant")]
    NotInvariant,

    #[error("consistency check failed in degree {degree}: {detail}")]
    CheckFailed { degree: usize, detail: String },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}
