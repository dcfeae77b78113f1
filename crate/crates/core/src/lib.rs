//! Exact computations around the kernel of cohomological restriction maps.
//!
//! The crate works over a prime field F_p (p odd) and provides:
//!
//! - [`linalg`]: sparse exact linear algebra (echelon forms, kernels, quotients).
//! - [`algebra`]: truncated graded-commutative algebras built from exterior,
//!   truncated polynomial and divided power generators, with quotients and a
//!   minimal-generator profiler for the augmentation ideal.
//! - [`tensor`]: the tensor power `S = R^{⊗p²}` with its Künneth word basis,
//!   the signed cyclic rotation σ, and the three orbit types.
//! - [`restriction`]: invariants, coinvariants, the norm (restriction) map to
//!   the index-p² subgroup, cup products in the two-column model and the
//!   minimal-generator profile of the kernel as an `S^σ`-module.
//! - [`abelian`]: the `V^{⊕n} ⋊ ⟨σ⟩` example with unipotent σ.
//! - [`oracle`]: an independent brute-force recomputation in word coordinates.

pub mod abelian;
pub mod algebra;
pub mod error;
pub mod field;
pub mod linalg;
pub mod oracle;
pub mod restriction;
pub mod tensor;

pub use algebra::{
    build_algebra, ideal_minimal_generators, multiply, quotient_algebra, AlgebraSpec, Element,
    GeneratorKind, GeneratorProfile, GeneratorSpec, GradedAlgebra, Monomial, QuotientMap,
};
pub use error::{Error, Result};
pub use field::PrimeField;
pub use linalg::{nullspace, quotient_dim, rref, SparseMatrix, SparseVec, Subspace};
pub use restriction::{KernelProfile, KernelRow};
pub use tensor::{CyclicAction, OrbitClass, OrbitType, SignedWord, TensorElement, TensorPower, TensorWord};
