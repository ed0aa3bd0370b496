//! Browser demo: three small simulations sized to run interactively.
//!
//! The functions here are plain Rust so they can be tested natively; the
//! `wasm` module wraps them for JavaScript and flattens the results into
//! `Float64Array`s.

use deltakick::constants::units::{joule_to_kelvin, kelvin_to_joule, CM, MM, MS, NK, UK, UM};
use deltakick::ensemble::sample_ensemble;
use deltakick::protocols::{optimal_quadrupole_kick, KickShape};
use deltakick::quantum::{quasi_bound_states, Grid1D, PotentialSpec, Trajectory};
use deltakick::tof::{expansion_curve, fit_temperature};
use deltakick::{AtomSpecies, Axis, Error, Gravity, Result, ThermalSpec};

#[cfg(target_arch = "wasm32")]
mod wasm;

/// Upper bound on atoms per request, to keep the page responsive.
pub const MAX_ATOMS: usize = 50_000;

/// Kick pulse length used by the phase-space view.
const KICK_DURATION: f64 = 0.5 * MS;

fn check_atoms(atoms: usize) -> Result<()> {
    if atoms == 0 || atoms > MAX_ATOMS {
        return Err(Error::Domain(format!("atom count must be 1..={MAX_ATOMS}, got {atoms}")));
    }
    Ok(())
}

/// One axis of phase space before and after an impulse kick.
#[derive(Debug, Clone, PartialEq)]
pub struct KickView {
    /// Positions in mm and velocities in cm/s, at the start of the kick.
    pub before: (Vec<f64>, Vec<f64>),
    /// The same atoms right after it.
    pub after: (Vec<f64>, Vec<f64>),
    /// Kick strength actually applied: 1/s for the lens, cm/s for the cone.
    pub strength: f64,
    pub temperature_before: f64,
    pub temperature_after: f64,
}

impl KickView {
    pub fn ratio(&self) -> f64 {
        self.temperature_after / self.temperature_before
    }
}

/// Expand a cloud for `t_f_ms`, then kick it with a harmonic lens along x
/// or a quadrupole cone along z. `strength_factor` scales the kick relative
/// to the optimum for the expanded cloud.
pub fn kick_view(
    temperature_uk: f64,
    radius_mm: f64,
    t_f_ms: f64,
    strength_factor: f64,
    quadrupole: bool,
    atoms: usize,
    seed: u64,
) -> Result<KickView> {
    check_atoms(atoms)?;
    if !(strength_factor >= 0.0) {
        return Err(Error::Domain("strength factor must be non-negative".into()));
    }
    let species = AtomSpecies::rb85();
    let spec = ThermalSpec::isotropic(temperature_uk * UK, radius_mm * MM, 3)?;
    let mut e = sample_ensemble(&spec, atoms, &species, seed)?;
    e.free_expansion(t_f_ms * MS, &Gravity::off())?;
    let (shape, axis) = if quadrupole { (KickShape::Quadrupole, Axis::Z) } else { (KickShape::Harmonic { axis: Axis::X }, Axis::X) };
    let optimum = if quadrupole {
        optimal_quadrupole_kick(species.thermal_velocity(e.temperature(axis)?))?
    } else {
        e.optimal_linear_kick(axis)?.max(0.0)
    };
    let strength = strength_factor * optimum;
    let snapshot = |e: &deltakick::Ensemble| -> (Vec<f64>, Vec<f64>) {
        let i = axis.index();
        e.atoms.iter().map(|a| (a.position[i] / MM, a.velocity[i] / CM)).unzip()
    };
    let before = snapshot(&e);
    let temperature_before = e.temperature(axis)?;
    let field = shape.field(strength, KICK_DURATION, &species, Gravity::off())?;
    e.impulse_kick(&field, KICK_DURATION)?;
    Ok(KickView {
        before,
        after: snapshot(&e),
        strength: if quadrupole { strength / CM } else { strength },
        temperature_before,
        temperature_after: e.temperature(axis)?,
    })
}

/// Time-of-flight sizes of a free cloud and the fitted temperature.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpansionView {
    pub times_ms: Vec<f64>,
    pub sizes_mm: Vec<f64>,
    pub errors_mm: Vec<f64>,
    pub fit_temperature_uk: f64,
    pub fit_error_uk: f64,
    pub fit_size_mm: f64,
}

pub fn expansion_view(temperature_uk: f64, radius_mm: f64, last_delay_ms: f64, points: usize, atoms: usize, seed: u64) -> Result<ExpansionView> {
    check_atoms(atoms)?;
    if !(2..=64).contains(&points) || !(last_delay_ms > 0.0) {
        return Err(Error::Domain("need 2..=64 delays and a positive last delay".into()));
    }
    let species = AtomSpecies::rb85();
    let spec = ThermalSpec::isotropic(temperature_uk * UK, radius_mm * MM, 3)?;
    let e = sample_ensemble(&spec, atoms, &species, seed)?;
    let delays: Vec<f64> = (0..points).map(|i| i as f64 * last_delay_ms * MS / (points - 1) as f64).collect();
    let curve = expansion_curve(&e, &delays, Axis::Z, &Gravity::off())?;
    let fit = fit_temperature(&curve, &species)?;
    Ok(ExpansionView {
        times_ms: curve.times.iter().map(|t| t / MS).collect(),
        sizes_mm: curve.rms_sizes.iter().map(|s| s / MM).collect(),
        errors_mm: curve.standard_errors.iter().map(|s| s / MM).collect(),
        fit_temperature_uk: fit.temperature / UK,
        fit_error_uk: fit.temperature_err / UK,
        fit_size_mm: fit.sigma0 / MM,
    })
}

/// V-trap plus a static Gaussian barrier and the levels bound behind it.
#[derive(Debug, Clone, PartialEq)]
pub struct WellView {
    pub x_um: Vec<f64>,
    pub potential_nk: Vec<f64>,
    /// Quasi-bound levels in nK, ascending. Empty without a well.
    pub levels_nk: Vec<f64>,
    /// Bottom and rim of the well in nK, if there is one.
    pub well_nk: Option<(f64, f64)>,
}

pub const WELL_POINTS: usize = 1024;

/// 300 µK/cm trap with a barrier of the given height and waist centred at
/// `centre_um`.
pub fn well_view(barrier_nk: f64, waist_um: f64, centre_um: f64) -> Result<WellView> {
    if !(centre_um > 0.0 && centre_um <= 500.0) || !(waist_um > 0.0 && waist_um <= 100.0) {
        return Err(Error::Domain("centre must be in (0, 500] µm and waist in (0, 100] µm".into()));
    }
    let slope = kelvin_to_joule(300.0 * UK) / CM;
    let spec = PotentialSpec::new(slope, kelvin_to_joule(barrier_nk * NK), waist_um * UM, Trajectory::fixed(centre_um * UM))?;
    let grid = Grid1D::new(-20.0 * UM, (centre_um + 3.0 * waist_um + 40.0) * UM, WELL_POINTS)?;
    let (well, states) = quasi_bound_states(&spec, &grid, AtomSpecies::rb85().mass())?;
    let nk = |e: f64| joule_to_kelvin(e) / NK;
    Ok(WellView {
        x_um: grid.points().iter().map(|x| x / UM).collect(),
        potential_nk: spec.sample(&grid, 0.0).into_iter().map(nk).collect(),
        levels_nk: states.iter().map(|s| nk(s.energy)).collect(),
        well_nk: well.map(|w| (nk(w.min_energy), nk(w.peak_energy))),
    })
}
