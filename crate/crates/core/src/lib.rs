//! Theta-kernel diffusion on the rational points of a Tate elliptic curve.
//!
//! The crate covers finite-precision arithmetic in an unramified local
//! field, truncated q-series of the Tate curve, the theta kernel and its
//! circle-pair integrals, the radial spectrum and Kozyrev wavelets, the heat
//! semigroup, exact-event simulation of the jump process, potential theory
//! on the circle skeleton, and recovery of `v(q)` from degree spectra.

pub mod error;
pub mod hearing;
pub mod heat;
pub mod kernel;
pub mod local_field;
pub mod markov;
pub mod ratio_serde;
pub mod skeleton;
pub mod spectral;
pub mod tate_model;

pub use error::{FieldError, HearingError, ModelError, SimulationError, SkeletonError, SpectralError};
