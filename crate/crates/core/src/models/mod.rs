//! Nonlinearities, initial densities and the exact Barenblatt reference.

mod barenblatt;
mod beta;
mod density;

pub use barenblatt::{barenblatt, barenblatt_translated, pme_reference, BarenblattProfile};
pub use beta::{BetaKind, BetaSpec, Degeneracy};
pub use density::{Component, DensitySpec};
