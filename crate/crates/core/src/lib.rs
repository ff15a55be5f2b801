//! Source-term recovery for non-uniform discrete dynamical systems.
//!
//! The state of the system lives on the index set `Λ = {0, r/N} + 2ℤ` and evolves by
//!
//! ```text
//! x_{λ + r/N}     = A x_λ + w     λ ∈ 2ℤ
//! x_{λ + 2 - r/N} = A x_λ + w     λ ∈ 2ℤ⁺ + r/N ∪ {r/N}
//! x_{λ - 2 - r/N} = A x_λ + w     λ ∈ 2ℤ⁻ + r/N
//! ```
//!
//! starting from two initial states `x₀` and `x₋₂`. The observer only sees the time-space
//! samples `⟨x_λ, g_j⟩` against a Bessel family `{g_j}` and wants the forcing term `w` back.
//!
//! The crate is `no_std` (it needs `alloc`) and is organised bottom-up:
//!
//! * [`lambda`]: exact arithmetic on `Λ`, the finite windows `[2K]`, the successor map.
//! * [`numerics`]: dense complex linear algebra (backed by `nalgebra`).
//! * [`frames`]: frame operators, optimal bounds, canonical duals, subspace frames.
//! * [`dynamics`]: simulation, closed forms, data matrices and row-space diagnostics.
//! * [`recovery`]: finite and infinite-iteration reconstruction, recoverability conditions
//!   and the Vandermonde nullifier that defeats finite recovery.
//! * [`scenarios`]: deterministic builders for the worked examples.
#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod dynamics;
mod error;
pub mod frames;
pub mod lambda;
pub mod numerics;
pub mod random;
pub mod recovery;
pub mod scenarios;
mod tolerances;

pub use error::{Error, Result};
pub use lambda::{Branch, IndexMap, LambdaIndex, Rational, SpectralParams};
pub use numerics::{c64, CMat, CVec};
pub use tolerances::Tolerances;
