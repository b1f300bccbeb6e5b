//! Numerical verification of short-interval explicit formulas for the
//! Goldbach counting function R(n).
//!
//! The crate sieves Λ, convolves it into R(n), evaluates sums over the
//! nontrivial zeros of ζ, samples the circle-method exponential sums, and
//! compares both sides of each formula against its error bound.

pub mod arith;
pub mod circle;
pub mod cmath;
pub mod config;
pub mod convolution;
pub mod error;
pub mod exp_sums;
pub mod goldbach;
pub mod lambda;
pub mod quad;
pub mod report;
pub mod stats;
pub mod sum;
pub mod verifier;
pub mod zero_sums;
pub mod zeros;

pub use error::{Error, Result};
pub use goldbach::{CesaroWeight, RMethod, RWindow, WindowSpec};
pub use lambda::{LambdaEntry, LambdaWindow, PsiSource, PsiTable, PsiValue};
pub use report::{Report, VerificationReport};
pub use verifier::{Arithmetic, Tolerances};
pub use zeros::{ZeroSet, ZeroSource};
