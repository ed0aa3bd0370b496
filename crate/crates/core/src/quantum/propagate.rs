//! Strang split-operator propagation with a multiplicative absorbing layer.

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::constants::CONSTANTS;
use crate::error::{domain, Error, Result};

use super::grid::{Grid1D, Wavefunction};
use super::potential::PotentialSpec;

/// Fraction of the domain covered by the absorber at each edge.
pub const DEFAULT_ABSORBER_FRACTION: f64 = 0.1;
/// Exponent of the per-step mask `sin(π/2·r)^p`, r running 0 → 1 from the edge inward.
pub const DEFAULT_ABSORBER_POWER: f64 = 0.125;

/// Barrier values are computed out to this many waists from each component.
const BARRIER_REACH: f64 = 4.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Absorber {
    pub fraction: f64,
    pub power: f64,
}

impl Default for Absorber {
    fn default() -> Self {
        Self { fraction: DEFAULT_ABSORBER_FRACTION, power: DEFAULT_ABSORBER_POWER }
    }
}

impl Absorber {
    fn mask(&self, n: usize) -> Vec<f64> {
        let width = ((n as f64 * self.fraction).round() as usize).min(n / 2);
        let mut m = vec![1.0; n];
        for i in 0..width {
            let r = i as f64 / width as f64;
            let v = (0.5 * std::f64::consts::PI * r).sin().powf(self.power);
            m[i] = v;
            m[n - 1 - i] = v;
        }
        m
    }
}

/// Reusable propagator for one grid, mass and time step.
pub struct Propagator {
    grid: Grid1D,
    dt: f64,
    kinetic: Vec<Complex64>,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    scratch: Vec<Complex64>,
    mask: Option<Vec<f64>>,
    edge: usize,
    trap_full: Vec<Complex64>,
    trap_half: Vec<Complex64>,
    trap_key: f64,
    barrier_a: Vec<Complex64>,
    barrier_b: Vec<Complex64>,
    refresh: usize,
}

impl Propagator {
    pub fn new(grid: Grid1D, mass: f64, dt: f64, absorber: Option<Absorber>) -> Result<Self> {
        if !(dt > 0.0) {
            return domain(format!("time step must be positive, got {dt}"));
        }
        let limit = grid.stability_limit(mass);
        if dt >= limit {
            return Err(Error::Stability { dt, limit });
        }
        let n = grid.len();
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(n);
        let inverse = planner.plan_fft_inverse(n);
        let scratch_len = forward.get_inplace_scratch_len().max(inverse.get_inplace_scratch_len());
        let scale = 1.0 / n as f64;
        let kinetic = grid
            .wavenumbers()
            .iter()
            .map(|k| Complex64::from_polar(scale, -CONSTANTS.hbar * k * k * dt / (2.0 * mass)))
            .collect();
        let mask = absorber.map(|a| a.mask(n));
        let edge = mask.as_ref().map_or(0, |m| m.iter().take_while(|v| **v < 1.0).count());
        Ok(Self {
            grid,
            dt,
            kinetic,
            forward,
            inverse,
            scratch: vec![Complex64::new(0.0, 0.0); scratch_len],
            mask,
            edge,
            trap_full: Vec::new(),
            trap_half: Vec::new(),
            trap_key: f64::NAN,
            barrier_a: vec![Complex64::new(1.0, 0.0); n],
            barrier_b: vec![Complex64::new(1.0, 0.0); n],
            refresh: 1,
        })
    }

    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// Recompute the barrier every `every` steps, holding it at the block
    /// midpoint in between. `1` samples it at the midpoint of every step.
    pub fn set_barrier_refresh(&mut self, every: usize) -> Result<()> {
        if every == 0 {
            return domain("barrier refresh interval must be at least 1");
        }
        self.refresh = every;
        Ok(())
    }

    fn prepare_trap(&mut self, slope: f64) {
        if self.trap_key == slope {
            return;
        }
        let h = CONSTANTS.hbar;
        let pts = self.grid.points();
        self.trap_full = pts.iter().map(|x| Complex64::cis(-slope * x.abs() * self.dt / h)).collect();
        self.trap_half = pts.iter().map(|x| Complex64::cis(-slope * x.abs() * self.dt / (2.0 * h))).collect();
        self.trap_key = slope;
    }

    /// Half-step barrier phase at time `t`, written into `buf` over the
    /// returned index range.
    fn barrier_half(&self, spec: &PotentialSpec, t: f64, buf: &mut [Complex64]) -> (usize, usize) {
        if spec.barrier_height == 0.0 {
            return (0, 0);
        }
        let c = spec.trajectory.position(t);
        let reach = BARRIER_REACH * spec.waist;
        let offs = spec.dither().iter().map(|d| d.0);
        let lo_x = offs.clone().fold(f64::INFINITY, f64::min) + c - reach;
        let hi_x = offs.fold(f64::NEG_INFINITY, f64::max) + c + reach;
        let dx = self.grid.dx();
        let n = self.grid.len();
        let lo = (((lo_x - self.grid.x_min()) / dx).floor().max(0.0) as usize).min(n);
        let hi = (((hi_x - self.grid.x_min()) / dx).ceil().max(0.0) as usize + 1).min(n);
        let scale = -self.dt / (2.0 * CONSTANTS.hbar);
        for (i, b) in buf.iter_mut().enumerate().take(hi).skip(lo) {
            *b = Complex64::cis(scale * spec.barrier_at(self.grid.x(i), t));
        }
        (lo, hi.max(lo))
    }

    fn apply_kinetic(&mut self, psi: &mut [Complex64]) {
        self.forward.process_with_scratch(psi, &mut self.scratch);
        psi.iter_mut().zip(&self.kinetic).for_each(|(p, k)| *p *= k);
        self.inverse.process_with_scratch(psi, &mut self.scratch);
    }

    fn apply_mask(&self, w: &mut Wavefunction) {
        let Some(mask) = &self.mask else { return };
        let n = w.psi.len();
        let mut lost = 0.0;
        for i in (0..self.edge).chain(n - self.edge..n) {
            let m = mask[i];
            let p = &mut w.psi[i];
            lost += p.norm_sqr() * (1.0 - m * m);
            *p *= m;
        }
        w.absorbed += lost * self.grid.dx();
    }

    /// Advance `w` by `steps` Strang steps. Adjacent potential half-steps
    /// are fused into one multiplication.
    pub fn run(&mut self, w: &mut Wavefunction, spec: &PotentialSpec, steps: usize) -> Result<()> {
        if w.grid != self.grid {
            return domain("wavefunction grid differs from the propagator grid");
        }
        if steps == 0 {
            return Ok(());
        }
        self.prepare_trap(spec.slope);
        let dt = self.dt;
        let t0 = w.time;
        let m = self.refresh as u64;
        let start = (t0 / dt).round().max(0.0) as u64;
        let moving = !spec.trajectory.is_static();
        let block = |j: usize| if moving { (start + j as u64) / m } else { 0 };
        let sample_time = |blk: u64| t0 + ((blk * m) as f64 - start as f64 + 0.5 * m as f64) * dt;

        let mut cur = std::mem::take(&mut self.barrier_a);
        let mut next = std::mem::take(&mut self.barrier_b);
        let mut cur_blk = block(0);
        let mut cur_win = self.barrier_half(spec, sample_time(cur_blk), &mut cur);
        let mut full: Vec<Complex64> = cur[cur_win.0..cur_win.1].iter().map(|c| c * c).collect();

        for (p, t) in w.psi.iter_mut().zip(&self.trap_half) {
            *p *= t;
        }
        for i in cur_win.0..cur_win.1 {
            w.psi[i] *= cur[i];
        }

        for j in 0..steps {
            self.apply_kinetic(&mut w.psi);
            if j + 1 == steps {
                for (p, t) in w.psi.iter_mut().zip(&self.trap_half) {
                    *p *= t;
                }
                for i in cur_win.0..cur_win.1 {
                    w.psi[i] *= cur[i];
                }
            } else {
                for (p, t) in w.psi.iter_mut().zip(&self.trap_full) {
                    *p *= t;
                }
                let blk = block(j + 1);
                if blk == cur_blk {
                    for (p, f) in w.psi[cur_win.0..cur_win.1].iter_mut().zip(&full) {
                        *p *= f;
                    }
                } else {
                    let next_win = self.barrier_half(spec, sample_time(blk), &mut next);
                    for i in cur_win.0..cur_win.1 {
                        w.psi[i] *= cur[i];
                    }
                    for i in next_win.0..next_win.1 {
                        w.psi[i] *= next[i];
                    }
                    std::mem::swap(&mut cur, &mut next);
                    cur_win = next_win;
                    cur_blk = blk;
                    if m > 1 || !moving {
                        full.clear();
                        full.extend(cur[cur_win.0..cur_win.1].iter().map(|c| c * c));
                    }
                }
            }
            self.apply_mask(w);
        }
        w.time = t0 + steps as f64 * dt;
        self.barrier_a = cur;
        self.barrier_b = next;
        Ok(())
    }

    /// Advance `w` by `steps` Strang steps in an arbitrary fixed potential
    /// sampled on the grid.
    pub fn run_static(&mut self, w: &mut Wavefunction, potential: &[f64], steps: usize) -> Result<()> {
        if w.grid != self.grid || potential.len() != self.grid.len() {
            return domain("wavefunction or potential does not match the propagator grid");
        }
        if steps == 0 {
            return Ok(());
        }
        let scale = -self.dt / (2.0 * CONSTANTS.hbar);
        let half: Vec<Complex64> = potential.iter().map(|v| Complex64::cis(scale * v)).collect();
        let full: Vec<Complex64> = half.iter().map(|c| c * c).collect();
        w.psi.iter_mut().zip(&half).for_each(|(p, h)| *p *= h);
        for j in 0..steps {
            self.apply_kinetic(&mut w.psi);
            let phase = if j + 1 == steps { &half } else { &full };
            w.psi.iter_mut().zip(phase).for_each(|(p, h)| *p *= h);
            self.apply_mask(w);
        }
        w.time += steps as f64 * self.dt;
        Ok(())
    }

    /// ⟨H⟩ with the kinetic term evaluated spectrally.
    pub fn energy(&mut self, w: &Wavefunction, potential: &[f64], mass: f64) -> f64 {
        let mut buf = w.psi.clone();
        self.forward.process_with_scratch(&mut buf, &mut self.scratch);
        let n = self.grid.len() as f64;
        let kin: f64 = buf
            .iter()
            .zip(self.grid.wavenumbers())
            .map(|(c, k)| c.norm_sqr() * CONSTANTS.hbar * CONSTANTS.hbar * k * k / (2.0 * mass))
            .sum::<f64>()
            * self.grid.dx()
            / n;
        let pot: f64 = w.psi.iter().zip(potential).map(|(c, v)| c.norm_sqr() * v).sum::<f64>() * self.grid.dx();
        (kin + pot) / w.norm()
    }
}

/// Propagate a copy of `psi` through `steps` steps of length `dt`.
pub fn evolve(
    psi: &Wavefunction,
    spec: &PotentialSpec,
    mass: f64,
    dt: f64,
    steps: usize,
    absorber: Option<Absorber>,
) -> Result<Wavefunction> {
    let mut p = Propagator::new(psi.grid, mass, dt, absorber)?;
    let mut w = psi.clone();
    p.run(&mut w, spec, steps)?;
    Ok(w)
}
