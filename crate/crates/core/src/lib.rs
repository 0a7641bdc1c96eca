//! Normalized radial solutions of
//! `−Δ_p u = λ|u|^{p−2}u + μ|u|^{q−2}u + |u|^{p*−2}u` on ℝ^N with
//! `‖u‖_p^p = a^p`: thresholds, ground states, constrained solvers,
//! bubble expansions and scaling-law sweeps.

// `!(x > 0.0)` is used on purpose so that NaN is rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod asymptotics;
pub mod bubbles;
pub mod error;
pub mod experiments;
pub mod functionals;
pub mod numerics;
pub mod ode;
pub mod par;
pub mod params;
pub mod radial;
pub mod solvers;
pub mod thresholds;

pub use error::{Error, Result};
pub use params::{classify_regime, derive_exponents, Params, Regime, RegimeKind};
pub use radial::{GridSpec, NormTriple, RadialFunction, RadialGrid};
