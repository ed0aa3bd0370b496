//! Delta-kick cooling of ultracold ⁸⁵Rb and dipole-barrier velocity selection.
//!
//! The crate has two halves. The classical half ([`fields`], [`ensemble`],
//! [`protocols`], [`tof`]) follows a Monte Carlo phase-space sample of an atom
//! cloud through free flight, pulsed magnetic kicks and time-of-flight
//! imaging. The quantum half ([`quantum`]) solves the 1D Schrödinger equation
//! for a V-shaped magnetic trap with a moving Gaussian dipole barrier.
//!
//! Everything is SI internally. Laboratory units are converted at the edge
//! with the helpers in [`constants::units`].

pub mod constants;
pub mod ensemble;
pub mod error;
pub mod export;
pub mod fields;
pub mod protocols;
pub mod quantum;
pub mod tof;

pub use constants::{AtomSpecies, PhysicalConstants, CONSTANTS};
pub use ensemble::{Atom, Ensemble, ThermalSpec};
pub use error::{Error, Result};
pub use fields::{Axis, CoilPair, FieldConfiguration, FieldSource, Gravity, Polarity};

/// Library version, recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
