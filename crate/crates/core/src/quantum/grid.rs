use std::io::Write;

use num_complex::Complex64;

use crate::constants::CONSTANTS;
use crate::error::{domain, Result};
use crate::export::write_csv;

pub const MIN_POINTS: usize = 64;

/// Uniform periodic grid `x_i = x_min + i·dx`, `dx = (x_max − x_min)/n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid1D {
    x_min: f64,
    x_max: f64,
    n: usize,
}

impl Grid1D {
    pub fn new(x_min: f64, x_max: f64, n: usize) -> Result<Self> {
        if !(x_max > x_min) || !x_min.is_finite() || !x_max.is_finite() {
            return domain(format!("grid needs x_max > x_min, got [{x_min}, {x_max}]"));
        }
        if n < MIN_POINTS {
            return domain(format!("grid needs at least {MIN_POINTS} points, got {n}"));
        }
        Ok(Self { x_min, x_max, n })
    }

    pub fn symmetric(half_width: f64, n: usize) -> Result<Self> {
        Self::new(-half_width, half_width, n)
    }

    pub fn x_min(&self) -> f64 {
        self.x_min
    }

    pub fn x_max(&self) -> f64 {
        self.x_max
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn dx(&self) -> f64 {
        (self.x_max - self.x_min) / self.n as f64
    }

    pub fn x(&self, i: usize) -> f64 {
        self.x_min + i as f64 * self.dx()
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.x(i)).collect()
    }

    /// Angular wavenumbers in FFT order.
    pub fn wavenumbers(&self) -> Vec<f64> {
        let dk = 2.0 * std::f64::consts::PI / (self.n as f64 * self.dx());
        (0..self.n)
            .map(|j| if j < self.n.div_ceil(2) { j as f64 } else { j as f64 - self.n as f64 } * dk)
            .collect()
    }

    /// Index of the grid point nearest to `x`, clamped to the grid.
    pub fn nearest(&self, x: f64) -> usize {
        let k = ((x - self.x_min) / self.dx()).round();
        k.clamp(0.0, (self.n - 1) as f64) as usize
    }

    /// Largest split-operator step m·dx²/(π·ħ) for this grid.
    pub fn stability_limit(&self, mass: f64) -> f64 {
        mass * self.dx() * self.dx() / (std::f64::consts::PI * CONSTANTS.hbar)
    }

    /// Kinetic energy unit ħ²/(2m·dx²) of the finite-difference Hamiltonian.
    pub fn kinetic_unit(&self, mass: f64) -> f64 {
        CONSTANTS.hbar * CONSTANTS.hbar / (2.0 * mass * self.dx() * self.dx())
    }
}

/// Complex amplitude on a grid, normalized so that Σ|ψ|²·dx is the
/// probability still on the grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Wavefunction {
    pub grid: Grid1D,
    pub psi: Vec<Complex64>,
    pub time: f64,
    /// Probability removed by the absorbing layer so far.
    pub absorbed: f64,
}

impl Wavefunction {
    /// Normalized copy of real amplitudes.
    pub fn from_real(grid: Grid1D, values: &[f64]) -> Result<Self> {
        Self::from_complex(grid, values.iter().map(|v| Complex64::new(*v, 0.0)).collect())
    }

    pub fn from_complex(grid: Grid1D, psi: Vec<Complex64>) -> Result<Self> {
        if psi.len() != grid.len() {
            return domain("amplitude count does not match the grid");
        }
        let mut w = Self { grid, psi, time: 0.0, absorbed: 0.0 };
        let norm = w.norm();
        if !(norm > 0.0) || !norm.is_finite() {
            return domain("wavefunction has zero or non-finite norm");
        }
        let s = 1.0 / norm.sqrt();
        w.psi.iter_mut().for_each(|c| *c *= s);
        Ok(w)
    }

    /// Gaussian packet with position rms `sigma` and mean wavenumber `k0`.
    pub fn gaussian(grid: Grid1D, centre: f64, sigma: f64, k0: f64) -> Result<Self> {
        if !(sigma > 0.0) {
            return domain("packet width must be positive");
        }
        let psi = grid
            .points()
            .iter()
            .map(|&x| {
                let d = x - centre;
                Complex64::from_polar((-d * d / (4.0 * sigma * sigma)).exp(), k0 * x)
            })
            .collect();
        Self::from_complex(grid, psi)
    }

    pub fn norm(&self) -> f64 {
        self.psi.iter().map(|c| c.norm_sqr()).sum::<f64>() * self.grid.dx()
    }

    /// Probability on grid indices `range`.
    pub fn probability(&self, range: std::ops::Range<usize>) -> f64 {
        self.psi[range].iter().map(|c| c.norm_sqr()).sum::<f64>() * self.grid.dx()
    }

    pub fn mean_position(&self) -> f64 {
        let dx = self.grid.dx();
        self.psi.iter().enumerate().map(|(i, c)| self.grid.x(i) * c.norm_sqr()).sum::<f64>() * dx / self.norm()
    }

    pub fn position_variance(&self) -> f64 {
        let dx = self.grid.dx();
        let m = self.mean_position();
        self.psi.iter().enumerate().map(|(i, c)| (self.grid.x(i) - m).powi(2) * c.norm_sqr()).sum::<f64>() * dx / self.norm()
    }

    /// ⟨self|other⟩.
    pub fn overlap(&self, other: &Wavefunction) -> Complex64 {
        self.psi.iter().zip(&other.psi).map(|(a, b)| a.conj() * b).sum::<Complex64>() * self.grid.dx()
    }

    pub fn conjugate(&self) -> Self {
        let mut w = self.clone();
        w.psi.iter_mut().for_each(|c| *c = c.conj());
        w
    }

    pub fn write_csv<W: Write>(&self, out: &mut W) -> Result<()> {
        write_csv(out, &["x", "re", "im"], self.psi.iter().enumerate().map(|(i, c)| [self.grid.x(i), c.re, c.im]))
    }
}
