use crate::error::{domain, Result};

use super::grid::Grid1D;

/// Piecewise-linear barrier-centre path, held constant outside its knots.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    knots: Vec<(f64, f64)>,
}

impl Trajectory {
    /// Knots are (time, position) pairs with strictly increasing times.
    pub fn new(knots: Vec<(f64, f64)>) -> Result<Self> {
        if knots.is_empty() {
            return domain("trajectory needs at least one knot");
        }
        if knots.windows(2).any(|w| !(w[1].0 > w[0].0)) {
            return domain("trajectory times must be strictly increasing");
        }
        if knots.iter().any(|(t, x)| !t.is_finite() || !x.is_finite()) {
            return domain("trajectory knots must be finite");
        }
        Ok(Self { knots })
    }

    pub fn fixed(x: f64) -> Self {
        Self { knots: vec![(0.0, x)] }
    }

    /// Constant-speed move from `start` to `stop` beginning at t = 0.
    pub fn linear_sweep(start: f64, stop: f64, speed: f64) -> Result<Self> {
        if !(speed > 0.0) {
            return domain(format!("sweep speed must be positive, got {speed}"));
        }
        if start == stop {
            return Ok(Self::fixed(start));
        }
        Self::new(vec![(0.0, start), ((stop - start).abs() / speed, stop)])
    }

    pub fn position(&self, t: f64) -> f64 {
        let k = &self.knots;
        if t <= k[0].0 {
            return k[0].1;
        }
        for w in k.windows(2) {
            let ((t0, x0), (t1, x1)) = (w[0], w[1]);
            if t <= t1 {
                return x0 + (x1 - x0) * (t - t0) / (t1 - t0);
            }
        }
        k[k.len() - 1].1
    }

    /// True when the barrier never moves.
    pub fn is_static(&self) -> bool {
        self.knots.iter().all(|k| k.1 == self.knots[0].1)
    }

    pub fn end_time(&self) -> f64 {
        self.knots[self.knots.len() - 1].0
    }
}

/// V-shaped trap `α·|x|` plus a (possibly dithered) Gaussian barrier
/// `U0·Σ wᵢ·exp(−2(x − x_c(t) − oᵢ)²/w²)`, with `w` the 1/e² radius.
#[derive(Debug, Clone, PartialEq)]
pub struct PotentialSpec {
    pub slope: f64,
    pub barrier_height: f64,
    pub waist: f64,
    pub trajectory: Trajectory,
    dither: Vec<(f64, f64)>,
}

impl PotentialSpec {
    pub fn new(slope: f64, barrier_height: f64, waist: f64, trajectory: Trajectory) -> Result<Self> {
        Self::with_dither(slope, barrier_height, waist, trajectory, vec![(0.0, 1.0)])
    }

    /// `dither` lists (offset, weight) pairs; weights are normalized here.
    pub fn with_dither(
        slope: f64,
        barrier_height: f64,
        waist: f64,
        trajectory: Trajectory,
        dither: Vec<(f64, f64)>,
    ) -> Result<Self> {
        if !(slope >= 0.0) || !(barrier_height >= 0.0) {
            return domain("trap slope and barrier height must be non-negative");
        }
        if !(waist > 0.0) {
            return domain(format!("barrier waist must be positive, got {waist}"));
        }
        if dither.is_empty() || dither.iter().any(|(o, w)| !(*w >= 0.0) || !o.is_finite()) {
            return domain("dither needs finite offsets and non-negative weights");
        }
        let total: f64 = dither.iter().map(|d| d.1).sum();
        if !(total > 0.0) {
            return domain("dither weights sum to zero");
        }
        let dither = dither.into_iter().map(|(o, w)| (o, w / total)).collect();
        Ok(Self { slope, barrier_height, waist, trajectory, dither })
    }

    pub fn dither(&self) -> &[(f64, f64)] {
        &self.dither
    }

    pub fn trap_at(&self, x: f64) -> f64 {
        self.slope * x.abs()
    }

    pub fn barrier_at(&self, x: f64, t: f64) -> f64 {
        if self.barrier_height == 0.0 {
            return 0.0;
        }
        let c = self.trajectory.position(t);
        let w2 = self.waist * self.waist;
        self.barrier_height
            * self.dither.iter().map(|(o, wt)| wt * (-2.0 * (x - c - o).powi(2) / w2).exp()).sum::<f64>()
    }

    pub fn potential_at(&self, x: f64, t: f64) -> f64 {
        self.trap_at(x) + self.barrier_at(x, t)
    }

    pub fn sample(&self, grid: &Grid1D, t: f64) -> Vec<f64> {
        grid.points().iter().map(|&x| self.potential_at(x, t)).collect()
    }

    /// Same potential with the barrier held where it is at time `t`.
    pub fn frozen(&self, t: f64) -> Self {
        Self { trajectory: Trajectory::fixed(self.trajectory.position(t)), ..self.clone() }
    }

    pub fn with_barrier_height(&self, barrier_height: f64) -> Self {
        Self { barrier_height, ..self.clone() }
    }

    pub fn with_waist(&self, waist: f64) -> Self {
        Self { waist, ..self.clone() }
    }
}

/// Auxiliary well on the far side of the barrier from the trap centre.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WellGeometry {
    pub peak_index: usize,
    pub min_index: usize,
    pub peak_x: f64,
    pub peak_energy: f64,
    pub min_x: f64,
    pub min_energy: f64,
    /// +1 when the well lies at larger x than the peak, −1 otherwise.
    pub outward: i8,
}

impl WellGeometry {
    /// Depth below the barrier shoulder.
    pub fn depth(&self) -> f64 {
        self.peak_energy - self.min_energy
    }

    /// Grid indices on the well side of the peak.
    pub fn region(&self, n: usize) -> std::ops::Range<usize> {
        if self.outward > 0 {
            self.peak_index + 1..n
        } else {
            0..self.peak_index
        }
    }
}

/// Walk outward from the barrier centre: up to the first local maximum,
/// then down to the next local minimum. `None` if either runs off the grid.
pub fn find_well(values: &[f64], grid: &Grid1D, barrier_centre: f64) -> Option<WellGeometry> {
    let n = values.len();
    let outward: i8 = if barrier_centre < 0.0 { -1 } else { 1 };
    let step = |i: usize| -> Option<usize> {
        if outward > 0 {
            (i + 1 < n).then_some(i + 1)
        } else {
            i.checked_sub(1)
        }
    };
    let mut i = grid.nearest(barrier_centre);
    // climb to the barrier top
    loop {
        let j = step(i)?;
        if values[j] > values[i] {
            i = j;
        } else {
            break;
        }
    }
    let peak = i;
    let mut climbed = false;
    let mut k = peak;
    while let Some(j) = step(k) {
        if values[j] <= values[k] {
            k = j;
        } else {
            climbed = true;
            break;
        }
    }
    if !climbed || k == peak {
        return None;
    }
    Some(WellGeometry {
        peak_index: peak,
        min_index: k,
        peak_x: grid.x(peak),
        peak_energy: values[peak],
        min_x: grid.x(k),
        min_energy: values[k],
        outward,
    })
}
