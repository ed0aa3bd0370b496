//! Time-of-flight thermometry.

use nalgebra::{SMatrix, SVector};

use crate::constants::{AtomSpecies, CONSTANTS};
use crate::ensemble::Ensemble;
use crate::error::{domain, Error, Result};
use crate::fields::{Axis, Gravity};

/// Cloud size against time after release.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpansionCurve {
    pub times: Vec<f64>,
    pub rms_sizes: Vec<f64>,
    pub standard_errors: Vec<f64>,
    pub axis: Axis,
}

impl ExpansionCurve {
    pub fn new(times: Vec<f64>, rms_sizes: Vec<f64>, standard_errors: Vec<f64>, axis: Axis) -> Result<Self> {
        if times.len() < 3 {
            return domain(format!("expansion curve needs at least 3 points, got {}", times.len()));
        }
        if rms_sizes.len() != times.len() || standard_errors.len() != times.len() {
            return domain("times, sizes and errors must have equal lengths");
        }
        if times.windows(2).any(|w| !(w[1] > w[0])) {
            return domain("expansion times must be strictly increasing");
        }
        if rms_sizes.iter().any(|s| !(*s > 0.0 && s.is_finite())) {
            return domain("rms sizes must be positive");
        }
        if standard_errors.iter().any(|s| !(*s >= 0.0 && s.is_finite())) {
            return domain("standard errors must be non-negative");
        }
        Ok(Self { times, rms_sizes, standard_errors, axis })
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

/// Leave-one-out jackknife of the centred rms along one axis, O(n).
pub fn jackknife_rms(values: &[f64]) -> Result<(f64, f64)> {
    let n = values.len();
    if n < 3 {
        return domain("jackknife needs at least three samples");
    }
    let nf = n as f64;
    let mean = values.iter().sum::<f64>() / nf;
    let ss: f64 = values.iter().map(|v| (v - mean) * (v - mean)).sum();
    let size = (ss / (nf - 1.0)).sqrt();
    let loo = |v: f64| {
        let d = v - mean;
        ((ss - d * d * nf / (nf - 1.0)) / (nf - 2.0)).max(0.0).sqrt()
    };
    let loo_mean = values.iter().map(|&v| loo(v)).sum::<f64>() / nf;
    let spread: f64 = values.iter().map(|&v| (loo(v) - loo_mean).powi(2)).sum();
    Ok((size, ((nf - 1.0) / nf * spread).sqrt()))
}

/// Sizes of the freely expanding cloud at `delays` after its current time.
pub fn expansion_curve(e: &Ensemble, delays: &[f64], axis: Axis, gravity: &Gravity) -> Result<ExpansionCurve> {
    if delays.len() < 3 {
        return domain("expansion curve needs at least 3 delays");
    }
    if delays[0] < 0.0 || delays.windows(2).any(|w| !(w[1] > w[0])) {
        return domain("delays must be non-negative and strictly increasing");
    }
    let i = axis.index();
    let mut sizes = Vec::with_capacity(delays.len());
    let mut errors = Vec::with_capacity(delays.len());
    let a = gravity.acceleration[i];
    let mut column: Vec<f64> = vec![0.0; e.atoms.len()];
    for &t in delays {
        for (c, atom) in column.iter_mut().zip(&e.atoms) {
            *c = atom.position[i] + atom.velocity[i] * t + 0.5 * a * t * t;
        }
        let (s, err) = jackknife_rms(&column)?;
        sizes.push(s);
        errors.push(err);
    }
    ExpansionCurve::new(delays.to_vec(), sizes, errors, axis)
}

/// Result of the linear fit σ² = σ₀² + (k_B T/m)·t².
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TemperatureFit {
    /// Unconstrained best-fit temperature; negative if the slope is.
    pub temperature: f64,
    pub temperature_err: f64,
    pub sigma0: f64,
    /// Covariance of (σ₀², slope) in m⁴, m⁴/s², m⁴/s⁴.
    pub covariance: [[f64; 2]; 2],
    /// Set when the slope is consistent with zero at one standard deviation.
    pub upper_limit: Option<f64>,
    pub negative_slope: bool,
}

impl TemperatureFit {
    pub fn relative_uncertainty(&self) -> f64 {
        (self.temperature_err / self.temperature).abs()
    }
}

/// Weighted least squares in (t², σ²) with weights 1/(2σ·δσ)².
///
/// Zero standard errors anywhere switch to equal weights. The covariance is
/// the unscaled inverse normal matrix, so it reflects the supplied errors.
pub fn fit_temperature(curve: &ExpansionCurve, species: &AtomSpecies) -> Result<TemperatureFit> {
    if curve.len() < 3 {
        return domain("temperature fit needs at least 3 points");
    }
    let xs: Vec<f64> = curve.times.iter().map(|t| t * t).collect();
    let ys: Vec<f64> = curve.rms_sizes.iter().map(|s| s * s).collect();
    let unweighted = curve.standard_errors.iter().any(|e| *e == 0.0);
    let ws: Vec<f64> = curve
        .rms_sizes
        .iter()
        .zip(&curve.standard_errors)
        .map(|(s, e)| if unweighted { 1.0 } else { 1.0 / (2.0 * s * e).powi(2) })
        .collect();
    let sw: f64 = ws.iter().sum();
    let xbar = ws.iter().zip(&xs).map(|(w, x)| w * x).sum::<f64>() / sw;
    let ybar = ws.iter().zip(&ys).map(|(w, y)| w * y).sum::<f64>() / sw;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for ((w, x), y) in ws.iter().zip(&xs).zip(&ys) {
        sxx += w * (x - xbar) * (x - xbar);
        sxy += w * (x - xbar) * (y - ybar);
    }
    if !(sxx > 0.0) {
        return Err(Error::Fit("expansion times do not constrain the slope".into()));
    }
    let slope = sxy / sxx;
    let intercept = ybar - slope * xbar;
    let var_slope = 1.0 / sxx;
    let cov = [[1.0 / sw + xbar * xbar * var_slope, -xbar * var_slope], [-xbar * var_slope, var_slope]];
    let scale = species.mass() / CONSTANTS.k_boltzmann;
    let slope_err = var_slope.sqrt();
    let upper_limit = (slope - slope_err <= 0.0).then(|| (slope + slope_err).max(0.0) * scale);
    Ok(TemperatureFit {
        temperature: slope * scale,
        temperature_err: slope_err * scale,
        sigma0: intercept.max(0.0).sqrt(),
        covariance: cov,
        upper_limit,
        negative_slope: slope < 0.0,
    })
}

/// Rectangular window for [`density_image`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImageWindow {
    pub horizontal: (f64, f64),
    pub vertical: (f64, f64),
}

impl ImageWindow {
    /// Smallest window holding every atom, padded by `margin` on each side.
    pub fn covering(e: &Ensemble, plane: (Axis, Axis), margin: f64) -> Self {
        let span = |axis: Axis| {
            let i = axis.index();
            let (lo, hi) = e
                .atoms
                .iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), a| (lo.min(a.position[i]), hi.max(a.position[i])));
            (lo - margin, hi + margin)
        };
        Self { horizontal: span(plane.0), vertical: span(plane.1) }
    }
}

/// Projected, optionally blurred 2D histogram. `counts` is row-major with
/// `ny` rows of `nx` columns; row 0 is the lowest vertical coordinate.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityImage {
    pub nx: usize,
    pub ny: usize,
    pub window: ImageWindow,
    pub blur_rms: f64,
    pub counts: Vec<f64>,
    /// Atoms that fell outside the window.
    pub outside: usize,
}

impl DensityImage {
    pub fn at(&self, ix: usize, iy: usize) -> f64 {
        self.counts[iy * self.nx + ix]
    }

    pub fn total(&self) -> f64 {
        self.counts.iter().sum()
    }

    pub fn bin_width(&self) -> (f64, f64) {
        (
            (self.window.horizontal.1 - self.window.horizontal.0) / self.nx as f64,
            (self.window.vertical.1 - self.window.vertical.0) / self.ny as f64,
        )
    }

    /// Bin centres and summed counts along the horizontal or vertical direction.
    pub fn marginal(&self, horizontal: bool) -> (Vec<f64>, Vec<f64>) {
        let (dx, dy) = self.bin_width();
        if horizontal {
            let xs = (0..self.nx).map(|i| self.window.horizontal.0 + (i as f64 + 0.5) * dx).collect();
            let m = (0..self.nx).map(|i| (0..self.ny).map(|j| self.at(i, j)).sum()).collect();
            (xs, m)
        } else {
            let ys = (0..self.ny).map(|j| self.window.vertical.0 + (j as f64 + 0.5) * dy).collect();
            let m = (0..self.ny).map(|j| (0..self.nx).map(|i| self.at(i, j)).sum()).collect();
            (ys, m)
        }
    }
}

fn bin_of(v: f64, lo: f64, hi: f64, n: usize) -> Option<usize> {
    if !(v >= lo && v < hi) {
        return None;
    }
    let k = ((v - lo) / (hi - lo) * n as f64).floor() as usize;
    Some(k.min(n - 1))
}

/// Convolve one line with a Gaussian, renormalizing the kernel at the edges
/// so that no counts are lost.
fn blur_line(line: &[f64], sigma_bins: f64) -> Vec<f64> {
    let n = line.len();
    let reach = ((4.0 * sigma_bins).ceil() as usize).min(n);
    let kernel: Vec<f64> = (0..=reach).map(|d| (-0.5 * (d as f64 / sigma_bins).powi(2)).exp()).collect();
    let mut out = vec![0.0; n];
    for (src, &value) in line.iter().enumerate() {
        if value == 0.0 {
            continue;
        }
        let lo = src.saturating_sub(reach);
        let hi = (src + reach).min(n - 1);
        let norm: f64 = (lo..=hi).map(|t| kernel[t.abs_diff(src)]).sum();
        for (t, o) in out.iter_mut().enumerate().take(hi + 1).skip(lo) {
            *o += value * kernel[t.abs_diff(src)] / norm;
        }
    }
    out
}

/// 2D histogram of atom positions on `plane`, blurred by a Gaussian
/// point-spread of rms `blur_rms`.
pub fn density_image(
    e: &Ensemble,
    plane: (Axis, Axis),
    bins: (usize, usize),
    window: ImageWindow,
    blur_rms: f64,
) -> Result<DensityImage> {
    let (nx, ny) = bins;
    if nx < 2 || ny < 2 {
        return domain("image needs at least 2 bins per axis");
    }
    if !(window.horizontal.1 > window.horizontal.0) || !(window.vertical.1 > window.vertical.0) {
        return domain("image window must have positive extent");
    }
    if !(blur_rms >= 0.0) {
        return domain("blur must be non-negative");
    }
    let (ih, iv) = (plane.0.index(), plane.1.index());
    let mut counts = vec![0.0; nx * ny];
    let mut outside = 0;
    for atom in &e.atoms {
        let bx = bin_of(atom.position[ih], window.horizontal.0, window.horizontal.1, nx);
        let by = bin_of(atom.position[iv], window.vertical.0, window.vertical.1, ny);
        match (bx, by) {
            (Some(i), Some(j)) => counts[j * nx + i] += 1.0,
            _ => outside += 1,
        }
    }
    let mut image = DensityImage { nx, ny, window, blur_rms, counts, outside };
    if blur_rms > 0.0 {
        let (dx, dy) = image.bin_width();
        for j in 0..ny {
            let row = blur_line(&image.counts[j * nx..(j + 1) * nx], blur_rms / dx);
            image.counts[j * nx..(j + 1) * nx].copy_from_slice(&row);
        }
        for i in 0..nx {
            let col: Vec<f64> = (0..ny).map(|j| image.counts[j * nx + i]).collect();
            for (j, v) in blur_line(&col, blur_rms / dy).into_iter().enumerate() {
                image.counts[j * nx + i] = v;
            }
        }
    }
    Ok(image)
}

/// One Gaussian of a two-component profile fit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Component {
    /// Fraction of the total area.
    pub weight: f64,
    pub width: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BimodalFit {
    pub narrow: Component,
    pub broad: Component,
    pub centre: f64,
    pub residual_norm: f64,
    pub iterations: usize,
    /// Widths within 5% of each other, or one component carries < 1% of the area.
    pub unimodal: bool,
}

/// Starting point for [`fit_bimodal`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BimodalGuess {
    pub centre: f64,
    pub narrow: Component,
    pub broad: Component,
}

impl BimodalGuess {
    /// Moment-based guess: narrow at a third of the rms, broad slightly wider.
    pub fn from_profile(xs: &[f64], ys: &[f64]) -> Self {
        let total: f64 = ys.iter().sum();
        let centre = xs.iter().zip(ys).map(|(x, y)| x * y).sum::<f64>() / total;
        let var = xs.iter().zip(ys).map(|(x, y)| (x - centre).powi(2) * y).sum::<f64>() / total;
        let rms = var.sqrt();
        Self {
            centre,
            narrow: Component { weight: 0.3, width: rms / 3.0 },
            broad: Component { weight: 0.7, width: rms * 1.2 },
        }
    }
}

pub const BIMODAL_MAX_ITERATIONS: usize = 200;
pub const BIMODAL_TOLERANCE: f64 = 1e-10;

type P5 = SVector<f64, 5>;

// parameters: [a1, s1, a2, s2, c] with peak amplitudes a and rms widths s
fn gauss_model(p: &P5, x: f64) -> (f64, P5) {
    let d = x - p[4];
    let g1 = (-0.5 * d * d / (p[1] * p[1])).exp();
    let g2 = (-0.5 * d * d / (p[3] * p[3])).exp();
    let value = p[0] * g1 + p[2] * g2;
    let grad = P5::new(
        g1,
        p[0] * g1 * d * d / p[1].powi(3),
        g2,
        p[2] * g2 * d * d / p[3].powi(3),
        p[0] * g1 * d / (p[1] * p[1]) + p[2] * g2 * d / (p[3] * p[3]),
    );
    (value, grad)
}

fn sum_squares(p: &P5, xs: &[f64], ys: &[f64]) -> f64 {
    xs.iter().zip(ys).map(|(&x, &y)| (gauss_model(p, x).0 - y).powi(2)).sum()
}

/// Two-Gaussian fit of a sampled 1D profile by damped Gauss–Newton.
pub fn fit_bimodal(xs: &[f64], ys: &[f64], guess: &BimodalGuess) -> Result<BimodalFit> {
    if xs.len() != ys.len() {
        return domain("profile abscissae and values differ in length");
    }
    if xs.len() < 16 {
        return domain(format!("bimodal fit needs at least 16 samples, got {}", xs.len()));
    }
    if ys.iter().any(|y| !(*y >= 0.0)) {
        return domain("profile must be non-negative");
    }
    if !(guess.narrow.width > 0.0 && guess.broad.width > 0.0) {
        return domain("initial widths must be positive");
    }
    let spacing = (xs[xs.len() - 1] - xs[0]).abs() / (xs.len() - 1) as f64;
    let area: f64 = ys.iter().sum::<f64>() * spacing;
    if !(area > 0.0) {
        return domain("profile is empty");
    }
    let root2pi = (2.0 * std::f64::consts::PI).sqrt();
    let amp = |c: &Component| area * c.weight / (c.width * root2pi);
    let mut p = P5::new(amp(&guess.narrow), guess.narrow.width, amp(&guess.broad), guess.broad.width, guess.centre);
    let mut cost = sum_squares(&p, xs, ys);
    let mut lambda = 1e-3;
    let mut iterations = 0;
    while iterations < BIMODAL_MAX_ITERATIONS {
        iterations += 1;
        let mut jtj = SMatrix::<f64, 5, 5>::zeros();
        let mut jtr = P5::zeros();
        for (&x, &y) in xs.iter().zip(ys) {
            let (v, g) = gauss_model(&p, x);
            jtj += g * g.transpose();
            jtr += g * (v - y);
        }
        let mut accepted = false;
        while lambda < 1e12 {
            let mut damped = jtj;
            for k in 0..5 {
                damped[(k, k)] += lambda * jtj[(k, k)].max(1e-300);
            }
            let Some(step) = damped.cholesky().map(|c| c.solve(&(-jtr))) else {
                lambda *= 10.0;
                continue;
            };
            let trial = p + step;
            if trial[1] > 0.0 && trial[3] > 0.0 && trial[0] >= 0.0 && trial[2] >= 0.0 {
                let trial_cost = sum_squares(&trial, xs, ys);
                if trial_cost <= cost {
                    let change = (cost - trial_cost) / cost.max(f64::MIN_POSITIVE);
                    p = trial;
                    cost = trial_cost;
                    lambda = (lambda / 10.0).max(1e-12);
                    accepted = true;
                    if change < BIMODAL_TOLERANCE {
                        lambda = f64::INFINITY;
                    }
                    break;
                }
            }
            lambda *= 10.0;
        }
        if !accepted || !lambda.is_finite() {
            break;
        }
    }
    let areas = [p[0] * p[1], p[2] * p[3]];
    let total = areas[0] + areas[1];
    if !(total > 0.0) {
        return Err(Error::Fit("both components vanished".into()));
    }
    let mut comps = [
        Component { weight: areas[0] / total, width: p[1] },
        Component { weight: areas[1] / total, width: p[3] },
    ];
    if comps[0].width > comps[1].width {
        comps.swap(0, 1);
    }
    let unimodal = (comps[1].width - comps[0].width) <= 0.05 * comps[1].width
        || comps[0].weight < 0.01
        || comps[1].weight < 0.01;
    Ok(BimodalFit {
        narrow: comps[0],
        broad: comps[1],
        centre: p[4],
        residual_norm: cost.sqrt(),
        iterations,
        unimodal,
    })
}
