//! Numerical laboratory for the Grushin heat equation with a nonlinear
//! memory term,
//!
//! ```text
//! u_t - (Δ_x + |x|² Δ_y) u = κ₁ ∫₀ᵗ (t-s)^{-γ} |u|^{p₁-1} u(s) ds + κ₂ |u|^{p₂-1} u,
//! ```
//!
//! on `ℝ^N × ℝ^k`, together with the tools used to study when its solutions
//! blow up: Riemann–Liouville fractional calculus ([`fraccalc`]), the
//! bi-radial discretisation of the Grushin operator ([`grushin`]), an IMEX
//! time stepper with an exact or compressed memory ledger ([`memsolver`]),
//! the scalar integro-differential reduction ([`odereduce`]) and the
//! rescaled test-function estimates ([`testfn`]).

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod fraccalc;
pub mod grushin;
pub mod memsolver;
pub mod odereduce;
pub mod quad;
pub mod special;
pub mod testfn;

pub use error::{Error, Result};
