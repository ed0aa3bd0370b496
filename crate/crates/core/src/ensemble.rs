//! Classical phase-space sample of an atom cloud.
//!
//! Every atom draws its random numbers from its own ChaCha stream
//! (`stream = atom index`), so sampling and propagation give the same bits
//! no matter how the work is split between threads.

use nalgebra::{Matrix6, Vector3, Vector6};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::constants::{AtomSpecies, CONSTANTS};
use crate::error::{domain, Result};
use crate::fields::{Axis, FieldConfiguration, Gravity};

/// Largest leapfrog step used when the caller does not choose one.
pub const MAX_DEFAULT_STEP: f64 = 10e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Atom {
    pub position: Vector3<f64>,
    pub velocity: Vector3<f64>,
    pub m_f: i8,
    /// Set once the atom has passed within the node radius of a field zero.
    pub node_touched: bool,
}

/// Initial Gaussian cloud description.
#[derive(Debug, Clone, PartialEq)]
pub struct ThermalSpec {
    pub temperature: [f64; 3],
    pub rms_radius: [f64; 3],
    spin_populations: Vec<(i8, f64)>,
    pub spin_position_correlation: f64,
}

impl ThermalSpec {
    /// Populations are normalized here; zero temperatures or radii give
    /// degenerate (point-like) distributions along that axis.
    pub fn new(
        temperature: [f64; 3],
        rms_radius: [f64; 3],
        spin_populations: Vec<(i8, f64)>,
        spin_position_correlation: f64,
    ) -> Result<Self> {
        if temperature.iter().chain(rms_radius.iter()).any(|v| !(*v >= 0.0 && v.is_finite())) {
            return domain("temperatures and radii must be finite and non-negative");
        }
        if spin_populations.is_empty() {
            return domain("at least one spin population is required");
        }
        if spin_populations.iter().any(|(_, w)| !(*w >= 0.0 && w.is_finite())) {
            return domain("spin population weights must be non-negative");
        }
        let total: f64 = spin_populations.iter().map(|(_, w)| w).sum();
        if !(total > 0.0) {
            return domain("spin population weights sum to zero");
        }
        if !(-1.0..=1.0).contains(&spin_position_correlation) {
            return domain(format!("spin-position correlation {spin_position_correlation} outside [-1, 1]"));
        }
        let mut pops: Vec<(i8, f64)> = spin_populations.into_iter().map(|(m, w)| (m, w / total)).collect();
        pops.sort_by_key(|(m, _)| *m);
        Ok(Self { temperature, rms_radius, spin_populations: pops, spin_position_correlation })
    }

    /// Same temperature and radius on every axis, all atoms in one sublevel.
    pub fn isotropic(temperature: f64, rms_radius: f64, m_f: i8) -> Result<Self> {
        Self::new([temperature; 3], [rms_radius; 3], vec![(m_f, 1.0)], 0.0)
    }

    /// Equal weight in every sublevel of the manifold.
    pub fn uniform_spins(temperature: f64, rms_radius: f64, f_ground: u8, correlation: f64) -> Result<Self> {
        let f = f_ground as i8;
        Self::new([temperature; 3], [rms_radius; 3], (-f..=f).map(|m| (m, 1.0)).collect(), correlation)
    }

    pub fn spin_populations(&self) -> &[(i8, f64)] {
        &self.spin_populations
    }

    fn draw_spin(&self, u: f64) -> i8 {
        let mut acc = 0.0;
        for &(m, w) in &self.spin_populations {
            acc += w;
            if u < acc {
                return m;
            }
        }
        self.spin_populations.iter().rev().find(|(_, w)| *w > 0.0).map(|(m, _)| *m).unwrap()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Ensemble {
    pub atoms: Vec<Atom>,
    pub species: AtomSpecies,
    pub seed: u64,
    pub time: f64,
}

struct Draw {
    atom: Atom,
    latent: (f64, f64),
}

fn draw_atom(spec: &ThermalSpec, species: &AtomSpecies, seed: u64, index: u64) -> Draw {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    let mut normal = || -> f64 { rng.sample(StandardNormal) };
    let mut position = Vector3::zeros();
    let mut velocity = Vector3::zeros();
    for i in 0..3 {
        position[i] = spec.rms_radius[i] * normal();
    }
    for i in 0..3 {
        velocity[i] = species.thermal_velocity(spec.temperature[i]) * normal();
    }
    let z1 = normal();
    let eps = normal();
    let u: f64 = rng.gen();
    let rho = spec.spin_position_correlation;
    let z2 = rho * z1 + (1.0 - rho * rho).max(0.0).sqrt() * eps;
    Draw {
        atom: Atom { position, velocity, m_f: spec.draw_spin(u), node_touched: false },
        latent: (z1, z2),
    }
}

/// Sample `n` atoms from `spec`.
///
/// With a non-zero spin–position correlation the sampled spins are reassigned
/// through a Gaussian copula: radial distance is paired with the first latent
/// variable, `|m_F|` with the second. Positive coefficients put the largest
/// `|m_F|` nearest the cloud centre.
pub fn sample_ensemble(spec: &ThermalSpec, n: usize, species: &AtomSpecies, seed: u64) -> Result<Ensemble> {
    if n == 0 {
        return domain("ensemble needs at least one atom");
    }
    for &(m, _) in spec.spin_populations() {
        species.check_m_f(m)?;
    }
    let draws: Vec<Draw> = (0..n as u64).into_par_iter().map(|i| draw_atom(spec, species, seed, i)).collect();
    let mut atoms: Vec<Atom> = draws.iter().map(|d| d.atom).collect();

    if spec.spin_position_correlation != 0.0 && n > 1 {
        let mut by_radius: Vec<usize> = (0..n).collect();
        by_radius.sort_by(|&a, &b| atoms[a].position.norm().total_cmp(&atoms[b].position.norm()).then(a.cmp(&b)));
        let mut latent: Vec<(f64, f64)> = draws.iter().map(|d| d.latent).collect();
        latent.sort_by(|a, b| a.0.total_cmp(&b.0));
        // atom by_radius[k] receives latent pair k; rank atoms by its second component
        let mut second = vec![0.0; n];
        for (k, &atom) in by_radius.iter().enumerate() {
            second[atom] = latent[k].1;
        }
        let mut by_second: Vec<usize> = (0..n).collect();
        by_second.sort_by(|&a, &b| second[a].total_cmp(&second[b]).then(a.cmp(&b)));
        let mut spins: Vec<i8> = atoms.iter().map(|a| a.m_f).collect();
        spins.sort_by(|a, b| b.unsigned_abs().cmp(&a.unsigned_abs()).then(b.cmp(a)));
        for (rank, &atom) in by_second.iter().enumerate() {
            atoms[atom].m_f = spins[rank];
        }
    }

    Ok(Ensemble { atoms, species: *species, seed, time: 0.0 })
}

/// Default leapfrog step: min(duration/100, 10 µs).
pub fn default_step(duration: f64) -> f64 {
    (duration / 100.0).min(MAX_DEFAULT_STEP)
}

fn shifted_moments(values: impl Iterator<Item = f64> + Clone) -> (f64, f64, usize) {
    let first = values.clone().next().unwrap_or(0.0);
    let mut n = 0usize;
    let mut s1 = 0.0;
    let mut s2 = 0.0;
    for v in values {
        let d = v - first;
        s1 += d;
        s2 += d * d;
        n += 1;
    }
    let mean = first + s1 / n as f64;
    let var = if n > 1 { ((s2 - s1 * s1 / n as f64) / (n as f64 - 1.0)).max(0.0) } else { 0.0 };
    (mean, var, n)
}

impl Ensemble {
    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    /// Ballistic flight: `x ← x + v·t + a·t²/2`, `v ← v + a·t`.
    pub fn free_expansion(&mut self, duration: f64, gravity: &Gravity) -> Result<()> {
        if !(duration >= 0.0) {
            return domain(format!("expansion time must be non-negative, got {duration}"));
        }
        let a = gravity.acceleration;
        let half_t2 = 0.5 * duration * duration;
        self.atoms.par_iter_mut().for_each(|atom| {
            atom.position += atom.velocity * duration + a * half_t2;
            atom.velocity += a * duration;
        });
        self.time += duration;
        Ok(())
    }

    /// Velocity-Verlet integration through a square field pulse.
    pub fn apply_kick(&mut self, config: &FieldConfiguration, duration: f64, step: f64) -> Result<()> {
        if !(duration > 0.0) {
            return domain(format!("kick duration must be positive, got {duration}"));
        }
        if !(step > 0.0) || step > duration * (1.0 + 1e-12) {
            return domain(format!("kick step {step} must lie in (0, duration]"));
        }
        for atom in &self.atoms {
            self.species.check_m_f(atom.m_f)?;
        }
        if config.is_field_free() {
            return self.free_expansion(duration, &config.gravity);
        }
        let steps = (duration / step - 1e-9).ceil().max(1.0) as usize;
        let h = duration / steps as f64;
        let species = self.species;
        let mass = species.mass();
        self.atoms.par_iter_mut().for_each(|atom| {
            let moment = species.moment(atom.m_f);
            let mut sample = config.force_raw(&atom.position, moment, mass);
            atom.node_touched |= sample.at_node;
            for _ in 0..steps {
                atom.velocity += sample.force * (0.5 * h / mass);
                atom.position += atom.velocity * h;
                sample = config.force_raw(&atom.position, moment, mass);
                atom.node_touched |= sample.at_node;
                atom.velocity += sample.force * (0.5 * h / mass);
            }
        });
        self.time += duration;
        Ok(())
    }

    /// Instantaneous impulse `Δv = F(x)/m·duration`; positions stay put.
    pub fn impulse_kick(&mut self, config: &FieldConfiguration, duration: f64) -> Result<()> {
        if !(duration > 0.0) {
            return domain(format!("kick duration must be positive, got {duration}"));
        }
        for atom in &self.atoms {
            self.species.check_m_f(atom.m_f)?;
        }
        let species = self.species;
        let mass = species.mass();
        self.atoms.par_iter_mut().for_each(|atom| {
            let sample = config.force_raw(&atom.position, species.moment(atom.m_f), mass);
            atom.node_touched |= sample.at_node;
            atom.velocity += sample.force * (duration / mass);
        });
        Ok(())
    }

    fn require_two(&self) -> Result<()> {
        if self.atoms.len() < 2 {
            return domain(format!("statistics need at least two atoms, have {}", self.atoms.len()));
        }
        Ok(())
    }

    /// Kinetic temperature m·Var(v)/k_B along `axis`.
    pub fn temperature(&self, axis: Axis) -> Result<f64> {
        self.require_two()?;
        let i = axis.index();
        let (_, var, _) = shifted_moments(self.atoms.iter().map(|a| a.velocity[i]));
        Ok(self.species.mass() * var / CONSTANTS.k_boltzmann)
    }

    /// Centred rms extent along `axis`.
    pub fn cloud_size(&self, axis: Axis) -> Result<f64> {
        self.require_two()?;
        let i = axis.index();
        let (_, var, _) = shifted_moments(self.atoms.iter().map(|a| a.position[i]));
        Ok(var.sqrt())
    }

    pub fn mean_position(&self, axis: Axis) -> f64 {
        let i = axis.index();
        shifted_moments(self.atoms.iter().map(|a| a.position[i])).0
    }

    /// Mean kinetic energy ½m⟨v²⟩ along `axis`, not centred.
    pub fn mean_kinetic_energy(&self, axis: Axis) -> f64 {
        let i = axis.index();
        let s: f64 = self.atoms.iter().map(|a| a.velocity[i] * a.velocity[i]).sum();
        0.5 * self.species.mass() * s / self.atoms.len() as f64
    }

    /// Sample covariance of (x, y, z, vx, vy, vz).
    pub fn phase_space_covariance(&self) -> Result<Matrix6<f64>> {
        self.require_two()?;
        let n = self.atoms.len() as f64;
        let row = |a: &Atom| Vector6::new(a.position.x, a.position.y, a.position.z, a.velocity.x, a.velocity.y, a.velocity.z);
        let mean = self.atoms.iter().map(row).fold(Vector6::zeros(), |acc, r| acc + r) / n;
        let mut cov = Matrix6::zeros();
        for a in &self.atoms {
            let d = row(a) - mean;
            cov += d * d.transpose();
        }
        Ok(cov / (n - 1.0))
    }

    /// sqrt(det Cov(x_a, v_a)), the rms phase-space area along one axis.
    pub fn phase_space_area(&self, axis: Axis) -> Result<f64> {
        let cov = self.phase_space_covariance()?;
        let i = axis.index();
        let det = cov[(i, i)] * cov[(i + 3, i + 3)] - cov[(i, i + 3)] * cov[(i + 3, i)];
        Ok(det.max(0.0).sqrt())
    }

    /// Cov(x_a, v_a)/Var(x_a): the linear impulse coefficient that removes the
    /// position-velocity correlation along `axis`.
    pub fn optimal_linear_kick(&self, axis: Axis) -> Result<f64> {
        let cov = self.phase_space_covariance()?;
        let i = axis.index();
        if cov[(i, i)] == 0.0 {
            return domain("cloud has zero extent along the kick axis");
        }
        Ok(cov[(i, i + 3)] / cov[(i, i)])
    }

    /// Keep only the atoms for which `keep` holds.
    pub fn retain(&mut self, keep: impl Fn(&Atom) -> bool) {
        self.atoms.retain(|a| keep(a));
    }

    /// Atoms in sublevel `m_f`, as a separate ensemble.
    pub fn spin_class(&self, m_f: i8) -> Ensemble {
        Ensemble {
            atoms: self.atoms.iter().filter(|a| a.m_f == m_f).copied().collect(),
            species: self.species,
            seed: self.seed,
            time: self.time,
        }
    }

    /// Sorted list of the sublevels present.
    pub fn spins_present(&self) -> Vec<i8> {
        let mut s: Vec<i8> = self.atoms.iter().map(|a| a.m_f).collect();
        s.sort_unstable();
        s.dedup();
        s
    }
}
