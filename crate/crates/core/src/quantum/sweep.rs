//! Thermal velocity selection by an adiabatically swept barrier.

use std::io::Write;

use rayon::prelude::*;

use crate::constants::units::{kelvin_to_joule, CM, NK, UK, UM, US};
use crate::constants::{AtomSpecies, CONSTANTS};
use crate::error::{domain, Error, Result};
use crate::export::write_csv;

use super::eigen::{stationary_states, states_in_window, StationaryState};
use super::grid::{Grid1D, Wavefunction};
use super::levels::v_trap_level;
use super::potential::{find_well, PotentialSpec, Trajectory, WellGeometry};
use super::propagate::{Absorber, Propagator};

/// States evolved concurrently; fixed so results do not depend on the thread count.
const BATCH: usize = 4;

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub temperature: f64,
    /// Trap, barrier and barrier path; the sweep ends at the last knot.
    pub spec: PotentialSpec,
    pub grid: Grid1D,
    pub dt: f64,
    pub mass: f64,
    pub absorber: Option<Absorber>,
    /// Steps between time-series samples.
    pub record_interval: usize,
    /// Boltzmann weight the thermal basis may leave out.
    pub neglected_weight: f64,
    /// Capture probability treated as nothing.
    pub capture_floor: f64,
    /// Stop after this many consecutive states captured below the floor.
    pub empty_run: usize,
    /// Steps between barrier recomputations; 1 samples every step.
    pub barrier_refresh: usize,
}

impl SweepConfig {
    /// 1.3 µK cloud, 300 µK/cm trap, 600 nK barrier of 20 µm waist swept at
    /// 0.5 mm/s over ±250 µm, or ±62.5 µm when `shortened`.
    pub fn standard(shortened: bool) -> Result<Self> {
        let species = AtomSpecies::rb85();
        let half = if shortened { 62.5 * UM } else { 250.0 * UM };
        let trajectory = Trajectory::linear_sweep(-half, half, 0.5e-3)?;
        Ok(Self {
            temperature: 1.3 * UK,
            spec: PotentialSpec::new(kelvin_to_joule(300.0 * UK) / CM, kelvin_to_joule(600.0 * NK), 20.0 * UM, trajectory)?,
            grid: Grid1D::symmetric(400.0 * UM, 8192)?,
            dt: 0.5 * US,
            mass: species.mass(),
            absorber: Some(Absorber::default()),
            record_interval: 2000,
            neglected_weight: 1e-3,
            capture_floor: 1e-3,
            empty_run: 3,
            barrier_refresh: 1,
        })
    }

    pub fn duration(&self) -> f64 {
        self.spec.trajectory.end_time()
    }

    pub fn steps(&self) -> usize {
        (self.duration() / self.dt).round() as usize
    }

    fn validate(&self) -> Result<()> {
        if !(self.temperature > 0.0) {
            return domain("temperature must be positive");
        }
        if !(self.spec.slope > 0.0) {
            return domain("thermal basis needs a V-trap slope > 0");
        }
        if self.steps() == 0 {
            return domain("sweep shorter than one time step");
        }
        if self.record_interval == 0 || self.empty_run == 0 {
            return domain("record interval and empty run must be positive");
        }
        if !(self.neglected_weight > 0.0 && self.neglected_weight < 1.0) {
            return domain("neglected weight must lie in (0, 1)");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StateTransfer {
    pub index: usize,
    /// Numerical eigenenergy on the grid.
    pub energy: f64,
    /// Boltzmann weight from the closed-form spectrum.
    pub weight: f64,
    pub capture: f64,
    pub absorbed: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub transfer: f64,
    pub states: Vec<StateTransfer>,
    /// Basis size demanded by the neglected-weight rule.
    pub required_states: usize,
    /// Rows of (t, transfer, absorbed), Boltzmann-weighted over evolved states.
    pub series: Vec<[f64; 3]>,
    pub final_well: Option<WellGeometry>,
}

impl SweepResult {
    pub fn write_series_csv<W: Write>(&self, out: &mut W) -> Result<()> {
        write_csv(out, &["t", "transfer", "absorbed"], &self.series)
    }
}

/// Boltzmann weights of the lowest `count` bare-trap levels and the size of
/// the basis needed to leave out at most `neglected` weight.
fn thermal_weights(slope: f64, mass: f64, temperature: f64, neglected: f64) -> (Vec<f64>, usize) {
    let kt = CONSTANTS.k_boltzmann * temperature;
    let mut boltz = Vec::new();
    let mut z = 0.0;
    let mut j = 0;
    loop {
        let b = (-v_trap_level(j, slope, mass) / kt).exp();
        z += b;
        boltz.push(b);
        j += 1;
        if b < 1e-17 * z {
            break;
        }
    }
    let weights: Vec<f64> = boltz.iter().map(|b| b / z).collect();
    let mut tail: f64 = weights.iter().sum();
    let mut required = 0;
    for w in &weights {
        if tail <= neglected {
            break;
        }
        tail -= w;
        required += 1;
    }
    (weights, required)
}

/// Number of bare-trap levels whose classical turning point lies inside the grid.
fn basis_capacity(grid: &Grid1D, slope: f64, mass: f64) -> usize {
    let reach = grid.x_min().abs().min(grid.x_max().abs()) * slope;
    let mut j = 0;
    while v_trap_level(j, slope, mass) < reach {
        j += 1;
    }
    j
}

/// Highest kinetic energy the grid can represent.
fn resolved_energy(grid: &Grid1D, mass: f64) -> f64 {
    let k = std::f64::consts::PI / grid.dx();
    (CONSTANTS.hbar * k).powi(2) / (2.0 * mass)
}

fn region_probability(w: &Wavefunction, well: Option<WellGeometry>) -> f64 {
    well.map_or(0.0, |g| w.probability(g.region(w.grid.len())))
}

fn evolve_state(cfg: &SweepConfig, state: &StationaryState) -> Result<(f64, f64, Vec<[f64; 2]>)> {
    let mut prop = Propagator::new(cfg.grid, cfg.mass, cfg.dt, cfg.absorber)?;
    prop.set_barrier_refresh(cfg.barrier_refresh)?;
    let mut w = Wavefunction::from_real(cfg.grid, &state.amplitude)?;
    let total = cfg.steps();
    let mut series = Vec::with_capacity(total / cfg.record_interval + 2);
    let well_at = |t: f64| {
        let c = cfg.spec.trajectory.position(t);
        find_well(&cfg.spec.sample(&cfg.grid, t), &cfg.grid, c)
    };
    series.push([region_probability(&w, well_at(0.0)), 0.0]);
    let mut done = 0;
    while done < total {
        let chunk = cfg.record_interval.min(total - done);
        prop.run(&mut w, &cfg.spec, chunk)?;
        done += chunk;
        series.push([region_probability(&w, well_at(w.time)), w.absorbed]);
    }
    let capture = series.last().unwrap()[0];
    Ok((capture, w.absorbed, series))
}

/// Boltzmann-averaged probability of ending up in the auxiliary well.
///
/// States are evolved in ascending energy and the loop ends once
/// `empty_run` consecutive states are captured below `capture_floor`.
pub fn sweep_transfer(cfg: &SweepConfig) -> Result<SweepResult> {
    cfg.validate()?;
    let (weights, required) = thermal_weights(cfg.spec.slope, cfg.mass, cfg.temperature, cfg.neglected_weight);
    let capacity = basis_capacity(&cfg.grid, cfg.spec.slope, cfg.mass);
    if required > capacity {
        return Err(Error::Capacity { required, capacity });
    }
    let bare = cfg.spec.with_barrier_height(0.0);
    let bare_v = bare.sample(&cfg.grid, 0.0);
    let end = cfg.duration();
    let final_well = find_well(&cfg.spec.sample(&cfg.grid, end), &cfg.grid, cfg.spec.trajectory.position(end));

    let mut basis: Vec<StationaryState> = Vec::new();
    let mut states = Vec::new();
    let mut series: Vec<[f64; 3]> = Vec::new();
    let mut empty = 0;
    let mut next = 0;
    'outer: while next < required {
        let batch_end = (next + BATCH).min(required);
        if v_trap_level(batch_end - 1, cfg.spec.slope, cfg.mass) > resolved_energy(&cfg.grid, cfg.mass) {
            return Err(Error::Capacity { required: batch_end, capacity: next });
        }
        if basis.len() < batch_end {
            let want = (2 * basis.len()).max(16).max(batch_end).min(required);
            basis = stationary_states(&bare_v, &cfg.grid, cfg.mass, want)?;
        }
        let results: Vec<Result<(f64, f64, Vec<[f64; 2]>)>> =
            (next..batch_end).into_par_iter().map(|k| evolve_state(cfg, &basis[k])).collect();
        for (k, r) in (next..batch_end).zip(results) {
            let (capture, absorbed, s) = r?;
            let w = weights[k];
            if series.is_empty() {
                series = (0..s.len()).map(|i| [(i * cfg.record_interval) as f64 * cfg.dt, 0.0, 0.0]).collect();
                if let Some(last) = series.last_mut() {
                    last[0] = end.min(cfg.steps() as f64 * cfg.dt);
                }
            }
            for (row, v) in series.iter_mut().zip(&s) {
                row[1] += w * v[0];
                row[2] += w * v[1];
            }
            states.push(StateTransfer { index: k, energy: basis[k].energy, weight: w, capture, absorbed });
            empty = if capture < cfg.capture_floor { empty + 1 } else { 0 };
            if empty >= cfg.empty_run {
                break 'outer;
            }
        }
        next = batch_end;
    }
    let transfer = states.iter().map(|s| s.weight * s.capture).sum();
    Ok(SweepResult { transfer, states, required_states: required, series, final_well })
}

/// Eigenstates of the frozen potential below the barrier top that keep more
/// than half their probability inside the well. Empty when there is no well.
pub fn quasi_bound_states(spec: &PotentialSpec, grid: &Grid1D, mass: f64) -> Result<(Option<WellGeometry>, Vec<StationaryState>)> {
    let v = spec.sample(grid, 0.0);
    let Some(well) = find_well(&v, grid, spec.trajectory.position(0.0)) else {
        return Ok((None, Vec::new()));
    };
    let region = well.region(grid.len());
    let dx = grid.dx();
    let states = states_in_window(&v, grid, mass, well.min_energy, well.peak_energy)?
        .into_iter()
        .filter(|s| s.amplitude[region.clone()].iter().map(|a| a * a).sum::<f64>() * dx > 0.5)
        .collect();
    Ok((Some(well), states))
}

/// Number of quasi-bound states supported by the frozen potential.
pub fn count_quasi_bound_states(spec: &PotentialSpec, grid: &Grid1D, mass: f64) -> Result<usize> {
    Ok(quasi_bound_states(spec, grid, mass)?.1.len())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DepthPoint {
    /// Barrier height U0 used for this point.
    pub depth: f64,
    pub transfer: f64,
    pub bound_states: usize,
    pub states_evolved: usize,
}

/// Sweep transfer against barrier height, with the quasi-bound-state count
/// of the well at the end of each sweep.
pub fn transfer_vs_depth(depths: &[f64], base: &SweepConfig) -> Result<Vec<DepthPoint>> {
    if depths.is_empty() {
        return domain("depth list is empty");
    }
    if depths.windows(2).any(|w| !(w[1] > w[0])) || depths[0] < 0.0 {
        return domain("depths must be non-negative and ascending");
    }
    let end = base.duration();
    depths
        .iter()
        .map(|&d| {
            let cfg = SweepConfig { spec: base.spec.with_barrier_height(d), ..base.clone() };
            let r = sweep_transfer(&cfg)?;
            let bound = count_quasi_bound_states(&cfg.spec.frozen(end), &cfg.grid, cfg.mass)?;
            Ok(DepthPoint { depth: d, transfer: r.transfer, bound_states: bound, states_evolved: r.states.len() })
        })
        .collect()
}
