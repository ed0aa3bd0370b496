//! Lowest eigenpairs of the finite-difference Hamiltonian
//! `−ħ²/2m·∂² + V` with hard walls, by Sturm-sequence bisection and inverse
//! iteration. Work is done in units of ħ²/(2m·dx²), where the matrix has
//! diagonal `2 + V/unit` and off-diagonal −1.

use crate::error::{domain, Error, Result};

use super::grid::Grid1D;

/// Edge amplitude, relative to the peak, above which a state is said to leak.
pub const LEAKAGE_THRESHOLD: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct StationaryState {
    pub energy: f64,
    /// Real amplitudes normalized to Σψ²·dx = 1.
    pub amplitude: Vec<f64>,
    /// ‖Hψ − Eψ‖/‖ψ‖ in grid units.
    pub residual: f64,
}

/// Number of eigenvalues strictly below `lambda`.
fn sturm_count(diag: &[f64], lambda: f64) -> usize {
    let mut count = 0;
    let mut q = 1.0;
    for (i, &d) in diag.iter().enumerate() {
        q = if i == 0 { d - lambda } else { d - lambda - 1.0 / q };
        if q == 0.0 {
            q = -f64::EPSILON * (d.abs() + lambda.abs() + 2.0);
        }
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

fn bisect(diag: &[f64], k: usize, mut lo: f64, mut hi: f64) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if sturm_count(diag, mid) > k {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Solve (T − λ)x = b for T with diagonal `diag` and unit negative
/// off-diagonals, by LU with partial pivoting.
fn shifted_solve(diag: &[f64], lambda: f64, b: &mut [f64]) {
    let n = diag.len();
    // rows hold (main, first super, second super) after pivoting
    let mut u0 = vec![0.0; n];
    let mut u1 = vec![0.0; n];
    let mut u2 = vec![0.0; n];
    let mut l = vec![0.0; n];
    let mut swapped = vec![false; n];
    let tiny = f64::EPSILON * 1e-3;
    let mut cur = [diag[0] - lambda, -1.0, 0.0];
    for i in 0..n {
        if i + 1 < n {
            let next = [-1.0, diag[i + 1] - lambda, if i + 2 < n { -1.0 } else { 0.0 }];
            if cur[0].abs() >= next[0].abs() {
                let piv = if cur[0] == 0.0 { tiny } else { cur[0] };
                let m = next[0] / piv;
                u0[i] = piv;
                u1[i] = cur[1];
                u2[i] = cur[2];
                l[i] = m;
                cur = [next[1] - m * cur[1], next[2] - m * cur[2], 0.0];
            } else {
                let m = cur[0] / next[0];
                u0[i] = next[0];
                u1[i] = next[1];
                u2[i] = next[2];
                l[i] = m;
                swapped[i] = true;
                cur = [cur[1] - m * next[1], cur[2] - m * next[2], 0.0];
            }
        } else {
            u0[i] = if cur[0] == 0.0 { tiny } else { cur[0] };
        }
    }
    for i in 0..n - 1 {
        if swapped[i] {
            b.swap(i, i + 1);
        }
        b[i + 1] -= l[i] * b[i];
    }
    for i in (0..n).rev() {
        let mut s = b[i];
        if i + 1 < n {
            s -= u1[i] * b[i + 1];
        }
        if i + 2 < n {
            s -= u2[i] * b[i + 2];
        }
        b[i] = s / u0[i];
    }
}

fn normalize(v: &mut [f64]) {
    let s = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.iter_mut().for_each(|x| *x /= s);
}

fn residual(diag: &[f64], lambda: f64, v: &[f64]) -> f64 {
    let n = v.len();
    let mut r2 = 0.0;
    for i in 0..n {
        let mut hv = diag[i] * v[i];
        if i > 0 {
            hv -= v[i - 1];
        }
        if i + 1 < n {
            hv -= v[i + 1];
        }
        r2 += (hv - lambda * v[i]).powi(2);
    }
    r2.sqrt()
}

struct Solver {
    diag: Vec<f64>,
    lo: f64,
    hi: f64,
}

impl Solver {
    fn new(potential: &[f64], unit: f64) -> Self {
        let diag: Vec<f64> = potential.iter().map(|v| 2.0 + v / unit).collect();
        let lo = diag.iter().cloned().fold(f64::INFINITY, f64::min) - 2.0;
        let hi = diag.iter().cloned().fold(f64::NEG_INFINITY, f64::max) + 2.0;
        Self { diag, lo, hi }
    }

    /// Eigenpairs with indices `ks` (ascending), orthogonalized within
    /// near-degenerate clusters.
    fn pairs(&self, ks: std::ops::Range<usize>) -> Vec<(f64, Vec<f64>, f64)> {
        let n = self.diag.len();
        let mut out: Vec<(f64, Vec<f64>, f64)> = Vec::with_capacity(ks.len());
        let mut lo = self.lo;
        for k in ks {
            let lambda = bisect(&self.diag, k, lo, self.hi);
            lo = lo.max(lambda - 1e-12 * (1.0 + lambda.abs()));
            let scale = (self.hi - self.lo).abs();
            let mut v: Vec<f64> = (0..n).map(|i| 1.0 + 0.5 * ((i as f64) * 0.618_033_988_7).fract()).collect();
            normalize(&mut v);
            for _ in 0..4 {
                shifted_solve(&self.diag, lambda, &mut v);
                normalize(&mut v);
                for (mu, u, _) in out.iter().rev().take_while(|(mu, _, _)| (lambda - mu).abs() < 1e-7 * scale) {
                    let _ = mu;
                    let d: f64 = u.iter().zip(&v).map(|(a, b)| a * b).sum();
                    v.iter_mut().zip(u).for_each(|(x, y)| *x -= d * y);
                }
                normalize(&mut v);
            }
            // fix the sign so the largest lobe is positive
            let peak = v.iter().cloned().fold(0.0f64, |a, x| if x.abs() > a.abs() { x } else { a });
            if peak < 0.0 {
                v.iter_mut().for_each(|x| *x = -*x);
            }
            let r = residual(&self.diag, lambda, &v);
            out.push((lambda, v, r));
        }
        out
    }
}

fn finish(grid: &Grid1D, unit: f64, raw: Vec<(f64, Vec<f64>, f64)>) -> Vec<StationaryState> {
    let s = 1.0 / grid.dx().sqrt();
    raw.into_iter()
        .map(|(lambda, v, r)| StationaryState {
            energy: lambda * unit,
            amplitude: v.into_iter().map(|x| x * s).collect(),
            residual: r,
        })
        .collect()
}

fn check_leakage(states: &[StationaryState], first_index: usize) -> Result<()> {
    for (j, st) in states.iter().enumerate() {
        let peak = st.amplitude.iter().fold(0.0f64, |a, x| a.max(x.abs()));
        let edge = st.amplitude[0].abs().max(st.amplitude[st.amplitude.len() - 1].abs());
        let ratio = edge / peak;
        if ratio > LEAKAGE_THRESHOLD {
            return Err(Error::BoundaryLeakage { state: first_index + j, ratio });
        }
    }
    Ok(())
}

/// The `k` lowest eigenpairs of the potential sampled on `grid`.
pub fn stationary_states(potential: &[f64], grid: &Grid1D, mass: f64, k: usize) -> Result<Vec<StationaryState>> {
    if potential.len() != grid.len() {
        return domain("potential length does not match the grid");
    }
    if k == 0 || k > grid.len() {
        return domain(format!("cannot return {k} states from a {}-point grid", grid.len()));
    }
    let unit = grid.kinetic_unit(mass);
    let solver = Solver::new(potential, unit);
    let states = finish(grid, unit, solver.pairs(0..k));
    check_leakage(&states, 0)?;
    Ok(states)
}

/// Like [`stationary_states`] without the leakage check, for potentials
/// that end on a deliberate hard wall.
pub(crate) fn stationary_states_unchecked(potential: &[f64], grid: &Grid1D, mass: f64, k: usize) -> Result<Vec<StationaryState>> {
    if potential.len() != grid.len() || k == 0 || k > grid.len() {
        return domain("bad potential length or state count");
    }
    let unit = grid.kinetic_unit(mass);
    Ok(finish(grid, unit, Solver::new(potential, unit).pairs(0..k)))
}

/// All eigenpairs with energy in [e_lo, e_hi). No leakage check: callers
/// look for states localized away from the edges.
pub fn states_in_window(potential: &[f64], grid: &Grid1D, mass: f64, e_lo: f64, e_hi: f64) -> Result<Vec<StationaryState>> {
    if potential.len() != grid.len() {
        return domain("potential length does not match the grid");
    }
    if !(e_hi > e_lo) {
        return Ok(Vec::new());
    }
    let unit = grid.kinetic_unit(mass);
    let solver = Solver::new(potential, unit);
    let first = sturm_count(&solver.diag, e_lo / unit);
    let last = sturm_count(&solver.diag, e_hi / unit);
    Ok(finish(grid, unit, solver.pairs(first..last)))
}
