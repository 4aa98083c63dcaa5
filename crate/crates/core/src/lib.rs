//! Self-induced transparency solitons in resonant media: dispersion law,
//! pulse velocity, soliton profile and Maxwell–Bloch propagation.
//!
//! All quantities use the internal units described in [`params`].

pub mod dispersion;
pub mod error;
pub mod lineshape;
pub mod mbe;
pub mod params;
pub mod quadrature;
pub mod roots;
pub mod soliton;

pub use dispersion::{solve, solve_with, BroadenedForm, DispersionSolution, Regime};
pub use error::{Result, SitError};
pub use lineshape::LineshapeAverages;
pub use params::{validate, LineShape, MediumParams, PulseParams};
