//! Numerical laboratory for finite-time blow-up of
//!
//! ```text
//! u_tt - Δu + μ/(1+t) u_t = |u|^p,   (t, x) ∈ [0, ∞) × R^n
//! ```
//!
//! with compactly supported radial data of size ε.
//!
//! The crate is organised bottom-up:
//!
//! - [`exponents`]: critical exponents, regime constants ℓ and t₀, the
//!   comparison-ODE parameters (a, q) and the admissibility predicate.
//! - [`specfun`]: the spherical mean φ, the modified Bessel function K_α,
//!   the time weight λ and the test function ψ = λφ.
//! - [`transform`]: Liouville time changes between the damped problem and
//!   the variable-speed problems, plus pullback and cross checks.
//! - [`ode_oracle`]: the comparison ODE f'' = m(t+R)^{-q} f^p with
//!   blow-up detection and δ-sweeps.
//! - [`radial`]: the radially symmetric finite-difference solver, lifespan
//!   estimation and ε-sweeps.
//! - [`functionals`]: F, F₁ and the inequality chain evaluated along
//!   computed trajectories.
//!
//! [`quadrature`] and [`powerlaw`] are shared numerical plumbing.

// quadrature tables keep all published digits; `!(x > 0.0)` also rejects NaN
#![allow(clippy::excessive_precision, clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod exponents;
pub mod functionals;
pub mod ode_oracle;
pub mod powerlaw;
pub mod quadrature;
pub mod radial;
pub mod specfun;
pub mod transform;

pub use error::{Error, Result};
pub use exponents::{ModelParams, Regime, RegimeConstants};
pub use ode_oracle::{BlowupReport, KatoProblem, Termination};
pub use powerlaw::PowerLawFit;
pub use radial::{DataProfile, RadialField, RadialGrid, SolverConfig, Trajectory};
pub use specfun::{LambdaWeight, PhiFunction};
