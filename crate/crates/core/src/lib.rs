//! Scattering-matrix simulation of a resonator-based two-port beam splitter.
//!
//! A weak phase grating inside a resonator transfers intensity from the
//! direct beam into one diffracted beam a little at a time; a beam-blocking
//! aperture suppresses build-up in all other diffraction orders (quantum
//! Zeno suppression). This crate builds the per-pass scattering operators,
//! iterates them on the beam state, and extracts switch points, loss
//! curves, and inelastic-scattering efficiencies.
//!
//! Core numerics are generic over the scalar type through [`scalar::Real`];
//! the aliases at the crate root pin `f64`, which every shipped tolerance
//! assumes.

pub mod analysis;
pub mod error;
pub mod io;
pub mod optics;
pub mod resonator;
pub mod scalar;
pub mod special;

pub use error::{Error, Result};
pub use scalar::Real;

pub type ScatteringOperator64 = optics::ScatteringOperator<f64>;
pub type GratingSpec64 = optics::GratingSpec<f64>;
pub type BeamState64 = resonator::BeamState<f64>;
pub type IntensityTrace64 = resonator::IntensityTrace<f64>;
pub type ScenarioConfig64 = resonator::ScenarioConfig<f64>;
pub type SwitchPointResult64 = analysis::SwitchPointResult<f64>;

pub type ScatteringOperator32 = optics::ScatteringOperator<f32>;
pub type BeamState32 = resonator::BeamState<f32>;
