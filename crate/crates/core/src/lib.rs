//! Large-N asymptotics of multiplicative spherical integrals
//!
//! ```text
//! I_N(θ̄, X) = ∫ Δ_θ̄(U* X U)^{βN/2} dU,   Δ_θ̄(M) = Π_i det([M]_i)^{θ_i − θ_{i+1}}
//! ```
//!
//! over Haar-distributed orthogonal (`β = 1`) or unitary (`β = 2`) matrices,
//! for a positive definite `X` and a finitely supported `θ̄`.
//!
//! * [`measure`]: atomic spectral measures and their `G`, `T`, `S̃` transforms.
//! * [`rate`]: the limit `J(θ, λ, μ)` and its pairing with extremal eigenvalues.
//! * [`variational`]: the rank-one simplex problem behind `J`, solved in closed
//!   form and by an independent mirror-ascent oracle, plus the interlacing
//!   (secular equation) machinery used for deflation.
//! * [`randmat`]: spectra, Haar sampling, log-domain `Δ`, and deflation.
//! * [`montecarlo`]: estimators of `(1/N) log I_N` and exact small-N oracles.
//! * [`cli`]: JSON-configured batch commands behind the `spherical` binary.

// `!(x > 0.0)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
mod error;
pub mod measure;
pub mod montecarlo;
pub mod quadrature;
pub mod randmat;
pub mod rate;
pub mod variational;

pub use error::{Error, Result};
pub use measure::{DiscreteMeasure, TransformValue};
pub use montecarlo::{McEstimate, SamplingPlan};
pub use randmat::{Beta, SpectrumSpec};
pub use rate::{rate_multi, rate_single, OutlierSet, RateResult, Regime, ThetaVector};
pub use variational::{SimplexPoint, VariationalSolution};
