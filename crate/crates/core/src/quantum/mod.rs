//! One-dimensional quantum dynamics in a V-shaped magnetic trap with a
//! moving Gaussian dipole barrier.
//!
//! Energies are in joules and lengths in metres throughout. The trap centre
//! sits at x = 0.

mod decay;
mod eigen;
mod grid;
mod levels;
mod potential;
mod propagate;
mod sweep;

pub use decay::{tunneling_decay, DecayConfig, DecayResult, DEFAULT_TUNNEL_BARRIER_NK, SURVIVAL_RISE_TOLERANCE};
pub use eigen::{stationary_states, states_in_window, StationaryState, LEAKAGE_THRESHOLD};
pub use grid::{Grid1D, Wavefunction, MIN_POINTS};
pub use levels::{airy_ai_prime_zero, airy_ai_zero, v_trap_energy_scale, v_trap_level, v_trap_levels_below};
pub use potential::{find_well, PotentialSpec, Trajectory, WellGeometry};
pub use propagate::{evolve, Absorber, Propagator, DEFAULT_ABSORBER_FRACTION, DEFAULT_ABSORBER_POWER};
pub use sweep::{
    count_quasi_bound_states, quasi_bound_states, sweep_transfer, transfer_vs_depth, DepthPoint, StateTransfer,
    SweepConfig, SweepResult,
};
