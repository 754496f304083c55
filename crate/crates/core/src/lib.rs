//! Chordal-distance codes on Stiefel manifolds: bounds, algebraic
//! constructions, certification and numerical search.

// `!(x <= tol)` is used on purpose so that NaN fails the check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod atlas;
pub mod binary_codes;
pub mod bounds;
pub mod designs;
pub mod error;
pub mod numkernel;
pub mod optimizer;
pub mod orthoplex_codes;
pub mod scalar;
pub mod simplex_codes;
pub mod verifier;

pub use error::{Error, Result};
pub use num_complex::Complex;
pub use numkernel::{FieldTag, Matrix, StiefelCode, StiefelPoint};
pub use scalar::{Real, Scalar};
pub use verifier::{certify, certify_default, Classification, CodeReport};

pub type Matrix64 = Matrix<f64>;
pub type Matrix32 = Matrix<f32>;
pub type IntMatrix = Matrix<i64>;
pub type StiefelPoint64 = StiefelPoint<f64>;
pub type StiefelPoint32 = StiefelPoint<f32>;
pub type StiefelCode64 = StiefelCode<f64>;
pub type StiefelCode32 = StiefelCode<f32>;
pub type CodeReport64 = CodeReport<f64>;
pub type CodeReport32 = CodeReport<f32>;
