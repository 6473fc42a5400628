//! Newton-type resistance functionals over convex functions, the nose-stretch
//! variation family with its quadratic resistance law, and a
//! convexity-constrained minimizer.
//!
//! The crate is `no_std` with `alloc`; the `std` feature only enables
//! `std::error::Error` plumbing through `core::error::Error`.
#![cfg_attr(not(feature = "std"), no_std)]
// `!(x > 0.0)` rejects NaN along with nonpositive values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod error;
pub mod geometry;
pub mod hull;
pub mod math;
pub mod optimizer;
pub mod resistance;
pub mod stretch;
pub mod toy;

pub use error::{Error, Hypothesis, Result};
pub use math::{Vec2, Vec3};
