//! Numerical laboratory for the singular porous-media-type equation
//! `∂ₜu = ½ ∂²ₓₓ β(u)`.
//!
//! Two independent solvers are provided and cross-checked:
//!
//! * [`particle`]: an interacting particle system advanced with the Euler
//!   scheme, whose empirical law is smoothed by a Gaussian kernel density
//!   estimate with plug-in bandwidth selection ([`kde`]);
//! * [`relaxation`]: a deterministic relaxation scheme with ENO
//!   reconstruction, Godunov flux and explicit Runge-Kutta time stepping.
//!
//! [`harness`] wires both solvers to the benchmark test cases, error
//! metrics and CSV output, and [`acceptance`] holds the end-to-end checks
//! run by `pmlab validate`.

pub mod acceptance;
pub mod error;
pub mod harness;
pub mod kde;
pub mod models;
pub mod noise;
pub mod particle;
pub mod quad;
pub mod stats;
pub mod relaxation;

pub use error::{Error, Result};
