//! Tubal-matrix algebra for third-order real tensors.
//!
//! A tensor `A ∈ R^{m×n×p}` is treated as an `m×n` matrix whose entries are
//! tubal scalars (real `p`-vectors). Multiplication of tubal scalars is
//! parameterized by an invertible `p×p` transform `L`:
//!
//! ```text
//! a ⊙_L b = L⁻¹ ((L a) ∘ (L b))
//! ```
//!
//! and lifts to the matrix product `*_L`, which acts slice-wise in the
//! transform domain. On top of that the crate provides:
//!
//! - transform construction and classification ([`transform`]);
//! - the tubal scalar ring: unit, inverse, transpose, symmetry ([`scalar`]);
//! - tubal vectors and matrices, `*_L`, transpose, orthogonality ([`linalg`]);
//! - the T-SVD `A = U *_L S *_L Vᵀ`, T-/B-singular spectra and the two
//!   best-low-rank truncations ([`tsvd`]);
//! - brute-force reference implementations for cross-checking ([`oracle`]);
//! - text/binary tensor files and transform JSON ([`io`]);
//! - desk-scale property suites used by the CLI `verify` command ([`verify`]).

pub mod error;
pub mod io;
pub mod linalg;
pub mod oracle;
pub mod scalar;
pub mod transform;
pub mod tsvd;
pub mod verify;

pub use error::{Result, TubalError};
pub use linalg::{
    fold, from_slices, identity, is_orthogonal, mat_tprod, mat_transpose, slices, unfold, CMat,
    TubalMatrix, TubalVector,
};
pub use scalar::TubalScalar;
pub use transform::{ConjStructure, Transform, TransformClass};
pub use tsvd::{
    complex_svd, g_part, rank_factorization, spectrum, truncate_brank, truncate_tubal, tsvd,
    validate_s_diagonal, SDiagonal, SDiagonalReport, SliceSvd, SpectrumReport, TsvdFactors,
};
