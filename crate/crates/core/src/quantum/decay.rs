//! Tunneling of a quasi-bound state out of the auxiliary well.

use std::io::Write;

use crate::constants::units::{kelvin_to_joule, CM, NK, UK, UM, US};
use crate::constants::{AtomSpecies, CONSTANTS};
use crate::error::{domain, Error, Result};
use crate::export::write_csv;

use super::eigen::{stationary_states_unchecked, states_in_window, StationaryState};
use super::grid::{Grid1D, Wavefunction};
use super::potential::{find_well, PotentialSpec, Trajectory, WellGeometry};
use super::propagate::{Absorber, Propagator};

/// Largest rise of the survival curve accepted as numerical noise.
pub const SURVIVAL_RISE_TOLERANCE: f64 = 1e-4;

#[derive(Debug, Clone, PartialEq)]
pub struct DecayConfig {
    /// Static potential; the barrier does not move.
    pub spec: PotentialSpec,
    pub grid: Grid1D,
    pub dt: f64,
    pub mass: f64,
    pub horizon: f64,
    pub record_interval: usize,
    /// Leading fraction of the horizon left out of the exponential fit.
    pub transient_fraction: f64,
    pub absorber: Option<Absorber>,
}

impl DecayConfig {
    /// 300 µK/cm trap with a 10 µm barrier of the given height held at
    /// x = 30 µm. The grid reaches only 30 µm past the trap centre so that
    /// atoms leaving the well run into the absorber instead of returning.
    pub fn narrow_barrier(barrier_height: f64) -> Result<Self> {
        Ok(Self {
            spec: PotentialSpec::new(kelvin_to_joule(300.0 * UK) / CM, barrier_height, 10.0 * UM, Trajectory::fixed(30.0 * UM))?,
            grid: Grid1D::new(-30.0 * UM, 100.0 * UM, 2048)?,
            dt: 1.0 * US,
            mass: AtomSpecies::rb85().mass(),
            horizon: 0.2,
            record_interval: 1000,
            transient_fraction: 0.1,
            absorber: Some(Absorber::default()),
        })
    }

    /// Default barrier height for the tunneling configuration.
    pub fn standard() -> Result<Self> {
        Self::narrow_barrier(kelvin_to_joule(DEFAULT_TUNNEL_BARRIER_NK * NK))
    }
}

/// Barrier height, in nK, used for the 10 µm tunneling configuration.
pub const DEFAULT_TUNNEL_BARRIER_NK: f64 = 267.0;

#[derive(Debug, Clone, PartialEq)]
pub struct DecayResult {
    /// Decay rate from the exponential fit, 1/s.
    pub rate: f64,
    /// Time for survival to fall by 1/e.
    pub lifetime: f64,
    pub secular_period: f64,
    /// 1 − exp(−rate·secular_period).
    pub per_period_loss: f64,
    /// Rows of (t, survival).
    pub survival: Vec<[f64; 2]>,
    pub well: WellGeometry,
    pub bound_states: usize,
    /// Initial state energy above the well minimum.
    pub level_above_minimum: f64,
}

impl DecayResult {
    pub fn write_csv<W: Write>(&self, out: &mut W) -> Result<()> {
        write_csv(out, &["t", "survival"], &self.survival)
    }
}

/// Well-only levels with a hard wall at the barrier top: the grid they live
/// on, every level below the barrier, and the oscillation period set by
/// the two lowest levels.
fn well_levels(v: &[f64], grid: &Grid1D, mass: f64, well: &WellGeometry) -> Result<(Vec<StationaryState>, f64)> {
    let region = well.region(grid.len());
    if region.len() < 64 {
        return domain("well region too small to hold a quasi-bound state");
    }
    let dx = grid.dx();
    let sub = Grid1D::new(grid.x(region.start), grid.x(region.start) + region.len() as f64 * dx, region.len())?;
    let local = &v[region];
    let lowest = stationary_states_unchecked(local, &sub, mass, 2)?;
    let tau = 2.0 * std::f64::consts::PI * CONSTANTS.hbar / (lowest[1].energy - lowest[0].energy);
    let bound = states_in_window(local, &sub, mass, well.min_energy, well.peak_energy)?;
    Ok((bound, tau))
}

/// Evolve the lowest quasi-bound state under the static barrier and fit
/// the decay of the probability left in the well.
pub fn tunneling_decay(cfg: &DecayConfig) -> Result<DecayResult> {
    if !(cfg.horizon > 0.0) || cfg.record_interval == 0 {
        return domain("horizon and record interval must be positive");
    }
    if !(0.0..0.9).contains(&cfg.transient_fraction) {
        return domain("transient fraction must lie in [0, 0.9)");
    }
    let v = cfg.spec.sample(&cfg.grid, 0.0);
    let Some(well) = find_well(&v, &cfg.grid, cfg.spec.trajectory.position(0.0)) else {
        return domain("potential has no auxiliary well");
    };
    let (levels, tau) = well_levels(&v, &cfg.grid, cfg.mass, &well)?;
    let Some(initial) = levels.first() else {
        return domain("well supports no quasi-bound state");
    };
    let bound_states = levels.len();
    let region = well.region(cfg.grid.len());
    let mut amplitude = vec![0.0; cfg.grid.len()];
    amplitude[region.clone()].copy_from_slice(&initial.amplitude);

    let mut prop = Propagator::new(cfg.grid, cfg.mass, cfg.dt, cfg.absorber)?;
    let mut w = Wavefunction::from_real(cfg.grid, &amplitude)?;
    let total = (cfg.horizon / cfg.dt).round() as usize;
    let mut survival = vec![[0.0, w.probability(region.clone())]];
    let start = cfg.transient_fraction * cfg.horizon;
    let mut lowest = f64::INFINITY;
    let mut done = 0;
    while done < total {
        let chunk = cfg.record_interval.min(total - done);
        prop.run(&mut w, &cfg.spec, chunk)?;
        done += chunk;
        let s = w.probability(region.clone());
        // the non-resonant part of the initial state sloshes out during the transient
        if w.time >= start {
            if s - lowest > SURVIVAL_RISE_TOLERANCE {
                return Err(Error::NonMonotoneSurvival { rise: s - lowest, time: w.time });
            }
            lowest = lowest.min(s);
        }
        survival.push([w.time, s]);
    }

    let pts: Vec<(f64, f64)> = survival.iter().filter(|r| r[0] >= start && r[1] > 0.0).map(|r| (r[0], r[1].ln())).collect();
    if pts.len() < 3 {
        return Err(Error::Fit("too few survival samples after the transient".into()));
    }
    let n = pts.len() as f64;
    let tm = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let ym = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - tm) * (p.1 - ym)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - tm).powi(2)).sum();
    let rate = -sxy / sxx;
    Ok(DecayResult {
        rate,
        lifetime: 1.0 / rate,
        secular_period: tau,
        per_period_loss: 1.0 - (-rate * tau).exp(),
        survival,
        well,
        bound_states,
        level_above_minimum: initial.energy - well.min_energy,
    })
}
