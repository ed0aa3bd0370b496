//! Magnetostatic sources and the spin-dependent potential they create.
//!
//! Physical coils use the exact on-axis loop field and a second-order
//! near-axis expansion off axis:
//! `B_z ≈ B(z) − ρ²/4·B''(z)`, `B_ρ ≈ −ρ/2·B'(z)`. Clouds are millimetres
//! across against a 4 cm coil radius, so the truncation is small.

use nalgebra::{Matrix3, Vector3};

use crate::constants::{AtomSpecies, CONSTANTS};
use crate::error::{domain, Result};

/// Finite-difference step for coil gradients and forces, in metres.
pub const DEFAULT_FD_STEP: f64 = 1e-6;

/// Distance from a field zero inside which the magnetic force is switched off.
pub const DEFAULT_NODE_EPSILON: f64 = 1e-9;

/// Cartesian axis. The coil axis is `Z`; gravity points along `-Y` by default.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub const ALL: [Axis; 3] = [Axis::X, Axis::Y, Axis::Z];

    pub fn index(self) -> usize {
        match self {
            Axis::X => 0,
            Axis::Y => 1,
            Axis::Z => 2,
        }
    }

    pub fn unit(self) -> Vector3<f64> {
        let mut u = Vector3::zeros();
        u[self.index()] = 1.0;
        u
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Polarity {
    /// Anti-Helmholtz currents: quadrupole field with a zero at the centre.
    Opposed,
    /// Same-sense currents: bias field with a curvature at the centre.
    Aligned,
}

/// Two coaxial circular coils centred on z = ±half_separation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoilPair {
    pub radius: f64,
    pub half_separation: f64,
    pub turns: u32,
    pub current: f64,
    pub polarity: Polarity,
}

impl CoilPair {
    pub const LAB_RADIUS: f64 = 0.04;
    pub const LAB_HALF_SEPARATION: f64 = 0.04;
    pub const LAB_TURNS: u32 = 200;
    pub const LAB_MAX_CURRENT: f64 = 18.0;

    pub fn new(radius: f64, half_separation: f64, turns: u32, current: f64, polarity: Polarity) -> Result<Self> {
        if !(radius > 0.0) || !(half_separation > 0.0) {
            return domain("coil radius and half separation must be positive");
        }
        if turns == 0 {
            return domain("coil needs at least one turn");
        }
        if !current.is_finite() {
            return domain("coil current must be finite");
        }
        Ok(Self { radius, half_separation, turns, current, polarity })
    }

    /// The 200-turn, 4 cm radius, 8 cm spacing MOT coils, limited to 18 A.
    pub fn lab_coil(current: f64, polarity: Polarity) -> Result<Self> {
        if current.abs() > Self::LAB_MAX_CURRENT {
            return domain(format!("lab coil current {current} A exceeds 18 A"));
        }
        Self::new(Self::LAB_RADIUS, Self::LAB_HALF_SEPARATION, Self::LAB_TURNS, current, polarity)
    }

    pub fn with_current(&self, current: f64) -> Self {
        Self { current, ..*self }
    }

    /// Field of one loop at axial offset `u` and its first two derivatives.
    fn loop_derivatives(&self, u: f64) -> [f64; 3] {
        let r2 = self.radius * self.radius;
        let k = 0.5 * CONSTANTS.mu0 * f64::from(self.turns) * self.current * r2;
        let q = r2 + u * u;
        let q_32 = q * q.sqrt();
        let b = k / q_32;
        let b1 = -3.0 * k * u / (q_32 * q);
        let b2 = 3.0 * k * (4.0 * u * u - r2) / (q_32 * q * q);
        [b, b1, b2]
    }

    /// On-axis field and its first two z-derivatives.
    fn axial_derivatives(&self, z: f64) -> [f64; 3] {
        let upper = self.loop_derivatives(z - self.half_separation);
        let lower = self.loop_derivatives(z + self.half_separation);
        let sign = match self.polarity {
            Polarity::Opposed => -1.0,
            Polarity::Aligned => 1.0,
        };
        [upper[0] + sign * lower[0], upper[1] + sign * lower[1], upper[2] + sign * lower[2]]
    }

    /// Near-axis field vector.
    pub fn field(&self, p: &Vector3<f64>) -> Vector3<f64> {
        let [b, b1, b2] = self.axial_derivatives(p.z);
        let rho2 = p.x * p.x + p.y * p.y;
        Vector3::new(-0.5 * p.x * b1, -0.5 * p.y * b1, b - 0.25 * rho2 * b2)
    }
}

/// Axial field of a coil pair, exact sum of the two loop fields.
pub fn on_axis_field(pair: &CoilPair, z: f64) -> f64 {
    pair.axial_derivatives(z)[0]
}

/// Ideal linear quadrupole, `B = B'·(−x/2, −y/2, z)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IdealQuadrupole {
    pub axial_gradient: f64,
}

/// Ideal one-dimensional harmonic field along `axis`: `|B| = bias + curvature·s²/2`.
///
/// Transverse field variation is dropped, so the force is exactly linear in
/// the axial coordinate. Kicks along several axes are applied in sequence.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IdealHarmonic {
    pub axial_curvature: f64,
    pub bias: f64,
    pub axis: Axis,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FieldSource {
    Coil(CoilPair),
    Quadrupole(IdealQuadrupole),
    Harmonic(IdealHarmonic),
}

impl FieldSource {
    fn field(&self, p: &Vector3<f64>) -> Vector3<f64> {
        match self {
            FieldSource::Coil(c) => c.field(p),
            FieldSource::Quadrupole(q) => q.axial_gradient * Vector3::new(-0.5 * p.x, -0.5 * p.y, p.z),
            FieldSource::Harmonic(h) => {
                let s = p[h.axis.index()];
                h.axis.unit() * (h.bias + 0.5 * h.axial_curvature * s * s)
            }
        }
    }

    /// Jacobian ∂B_i/∂x_j; `None` for coils, which go through finite differences.
    fn jacobian(&self, p: &Vector3<f64>) -> Option<Matrix3<f64>> {
        match self {
            FieldSource::Coil(_) => None,
            FieldSource::Quadrupole(q) => {
                let g = q.axial_gradient;
                Some(Matrix3::from_diagonal(&Vector3::new(-0.5 * g, -0.5 * g, g)))
            }
            FieldSource::Harmonic(h) => {
                let i = h.axis.index();
                let mut j = Matrix3::zeros();
                j[(i, i)] = h.axial_curvature * p[i];
                Some(j)
            }
        }
    }

    fn is_zero(&self) -> bool {
        match self {
            FieldSource::Coil(c) => c.current == 0.0,
            FieldSource::Quadrupole(q) => q.axial_gradient == 0.0,
            FieldSource::Harmonic(h) => h.axial_curvature == 0.0 && h.bias == 0.0,
        }
    }
}

/// Uniform gravitational acceleration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Gravity {
    pub acceleration: Vector3<f64>,
}

impl Gravity {
    pub fn off() -> Self {
        Self { acceleration: Vector3::zeros() }
    }

    /// Standard gravity along −y, perpendicular to the horizontal coil axis.
    pub fn standard() -> Self {
        Self::along(Axis::Y)
    }

    /// Standard gravity pointing along `-axis`.
    pub fn along(axis: Axis) -> Self {
        Self { acceleration: -CONSTANTS.gravity_g * axis.unit() }
    }

    pub fn from_flag(enabled: bool) -> Self {
        if enabled {
            Self::standard()
        } else {
            Self::off()
        }
    }

    pub fn is_enabled(&self) -> bool {
        self.acceleration != Vector3::zeros()
    }
}

impl Default for Gravity {
    fn default() -> Self {
        Self::off()
    }
}

/// Result of a force evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ForceSample {
    pub force: Vector3<f64>,
    /// The point lies within the node radius of a field zero; magnetic force was dropped.
    pub at_node: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FieldConfiguration {
    pub sources: Vec<FieldSource>,
    pub gravity: Gravity,
    pub fd_step: f64,
    pub node_epsilon: f64,
}

impl FieldConfiguration {
    pub fn new(sources: Vec<FieldSource>, gravity: Gravity) -> Self {
        Self {
            sources,
            gravity,
            fd_step: DEFAULT_FD_STEP,
            node_epsilon: DEFAULT_NODE_EPSILON,
        }
    }

    /// No magnetic sources; gravity only.
    pub fn empty(gravity: Gravity) -> Self {
        Self::new(Vec::new(), gravity)
    }

    pub fn quadrupole(axial_gradient: f64, gravity: Gravity) -> Self {
        Self::new(vec![FieldSource::Quadrupole(IdealQuadrupole { axial_gradient })], gravity)
    }

    pub fn harmonic(axial_curvature: f64, bias: f64, axis: Axis, gravity: Gravity) -> Self {
        Self::new(
            vec![FieldSource::Harmonic(IdealHarmonic { axial_curvature, bias, axis })],
            gravity,
        )
    }

    pub fn coil(pair: CoilPair, gravity: Gravity) -> Self {
        Self::new(vec![FieldSource::Coil(pair)], gravity)
    }

    pub fn with_fd_step(mut self, h: f64) -> Self {
        self.fd_step = h;
        self
    }

    /// True when every source carries zero field.
    pub fn is_field_free(&self) -> bool {
        self.sources.iter().all(FieldSource::is_zero)
    }

    fn has_coils(&self) -> bool {
        self.sources.iter().any(|s| matches!(s, FieldSource::Coil(_)))
    }

    pub fn field(&self, p: &Vector3<f64>) -> Vector3<f64> {
        self.sources.iter().fold(Vector3::zeros(), |acc, s| acc + s.field(p))
    }

    pub fn field_magnitude(&self, p: &Vector3<f64>) -> f64 {
        self.field(p).norm()
    }

    /// Signed on-axis B_z(0, 0, z).
    fn axial_component(&self, z: f64) -> f64 {
        self.field(&Vector3::new(0.0, 0.0, z)).z
    }

    /// Gradient of |B|, analytic for ideal sources, central differences otherwise.
    fn magnitude_gradient(&self, p: &Vector3<f64>) -> (f64, Vector3<f64>) {
        let b = self.field(p);
        let mag = b.norm();
        if !self.has_coils() {
            if mag == 0.0 {
                return (0.0, Vector3::zeros());
            }
            let jac = self
                .sources
                .iter()
                .filter_map(|s| s.jacobian(p))
                .fold(Matrix3::zeros(), |acc, j| acc + j);
            return (mag, jac.transpose() * (b / mag));
        }
        let h = self.fd_step;
        let mut grad = Vector3::zeros();
        for i in 0..3 {
            let mut hi = Vector3::zeros();
            hi[i] = h;
            grad[i] = (self.field_magnitude(&(p + hi)) - self.field_magnitude(&(p - hi))) / (2.0 * h);
        }
        (mag, grad)
    }

    /// Force on an atom with magnetic moment `moment` (J/T) and mass `mass`,
    /// without range checks on m_F.
    pub(crate) fn force_raw(&self, p: &Vector3<f64>, moment: f64, mass: f64) -> ForceSample {
        let gravity = mass * self.gravity.acceleration;
        if moment == 0.0 || self.sources.is_empty() {
            return ForceSample { force: gravity, at_node: false };
        }
        let (mag, grad) = self.magnitude_gradient(p);
        let gnorm = grad.norm();
        if mag == 0.0 || mag < self.node_epsilon * gnorm {
            return ForceSample { force: gravity, at_node: true };
        }
        ForceSample { force: gravity - moment * grad, at_node: false }
    }

    pub(crate) fn potential_raw(&self, p: &Vector3<f64>, moment: f64, mass: f64) -> f64 {
        let magnetic = if moment == 0.0 { 0.0 } else { moment * self.field_magnitude(p) };
        magnetic - mass * self.gravity.acceleration.dot(p)
    }
}

/// dB_z/dz on the coil axis.
pub fn axial_gradient(config: &FieldConfiguration, z: f64) -> f64 {
    let mut total = 0.0;
    let h = config.fd_step;
    for source in &config.sources {
        total += match source {
            FieldSource::Quadrupole(q) => q.axial_gradient,
            FieldSource::Harmonic(hm) if hm.axis == Axis::Z => hm.axial_curvature * z,
            FieldSource::Harmonic(_) => 0.0,
            FieldSource::Coil(c) => (on_axis_field(c, z + h) - on_axis_field(c, z - h)) / (2.0 * h),
        };
    }
    total
}

/// d²B_z/dz² on the coil axis.
pub fn axial_curvature(config: &FieldConfiguration, z: f64) -> f64 {
    let mut total = 0.0;
    let h = config.fd_step;
    for source in &config.sources {
        total += match source {
            FieldSource::Quadrupole(_) => 0.0,
            FieldSource::Harmonic(hm) if hm.axis == Axis::Z => hm.axial_curvature,
            FieldSource::Harmonic(_) => 0.0,
            FieldSource::Coil(c) => {
                (on_axis_field(c, z + h) - 2.0 * on_axis_field(c, z) + on_axis_field(c, z - h)) / (h * h)
            }
        };
    }
    total
}

/// Axial field including every source, for plotting.
pub fn total_axial_field(config: &FieldConfiguration, z: f64) -> f64 {
    config.axial_component(z)
}

/// U = g_F·m_F·μ_B·|B| − m·g⃗·r.
pub fn potential_energy(
    config: &FieldConfiguration,
    position: &Vector3<f64>,
    m_f: i8,
    species: &AtomSpecies,
) -> Result<f64> {
    species.check_m_f(m_f)?;
    Ok(config.potential_raw(position, species.moment(m_f), species.mass()))
}

/// F = −∇U, including gravity when enabled.
pub fn force(
    config: &FieldConfiguration,
    position: &Vector3<f64>,
    m_f: i8,
    species: &AtomSpecies,
) -> Result<ForceSample> {
    species.check_m_f(m_f)?;
    Ok(config.force_raw(position, species.moment(m_f), species.mass()))
}

/// Angular trap frequency sqrt(g_F·m_F·μ_B·B''/m) of a harmonic field.
pub fn harmonic_angular_frequency(curvature: f64, m_f: i8, species: &AtomSpecies) -> f64 {
    (species.moment(m_f) * curvature / species.mass()).max(0.0).sqrt()
}

/// Curvature that gives angular frequency `omega` for the given sublevel.
pub fn curvature_for_frequency(omega: f64, m_f: i8, species: &AtomSpecies) -> f64 {
    omega * omega * species.mass() / species.moment(m_f)
}

/// Quadrupole gradient whose on-axis force gives velocity change `dv` over `duration`.
pub fn gradient_for_impulse(dv: f64, duration: f64, m_f: i8, species: &AtomSpecies) -> f64 {
    dv * species.mass() / (species.moment(m_f) * duration)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn rb() -> AtomSpecies {
        AtomSpecies::rb85()
    }

    /// Brute-force Biot–Savart on-axis field of one loop, summing wire segments.
    fn biot_savart_loop_bz(radius: f64, z0: f64, ampere_turns: f64, z: f64) -> f64 {
        let segments = 720;
        let mut bz = 0.0;
        for k in 0..segments {
            let phi = 2.0 * std::f64::consts::PI * (k as f64 + 0.5) / segments as f64;
            let dphi = 2.0 * std::f64::consts::PI / segments as f64;
            let dl = Vector3::new(-phi.sin(), phi.cos(), 0.0) * radius * dphi;
            let r = Vector3::new(-radius * phi.cos(), -radius * phi.sin(), z - z0);
            let db = dl.cross(&r) / r.norm().powi(3);
            bz += db.z;
        }
        CONSTANTS.mu0 * ampere_turns / (4.0 * std::f64::consts::PI) * bz
    }

    #[test]
    fn on_axis_matches_biot_savart() {
        let pair = CoilPair::lab_coil(18.0, Polarity::Opposed).unwrap();
        for z in [-0.01, -0.002, 0.0013, 0.02] {
            let oracle = biot_savart_loop_bz(0.04, 0.04, 3600.0, z) - biot_savart_loop_bz(0.04, -0.04, 3600.0, z);
            assert_relative_eq!(on_axis_field(&pair, z), oracle, max_relative = 1e-10, epsilon = 1e-15);
        }
    }

    #[test]
    fn opposed_pair_vanishes_at_centre() {
        let pair = CoilPair::lab_coil(18.0, Polarity::Opposed).unwrap();
        assert_eq!(on_axis_field(&pair, 0.0), 0.0);
    }

    #[test]
    fn lab_coil_gradient_and_curvature() {
        let opposed = FieldConfiguration::coil(CoilPair::lab_coil(18.0, Polarity::Opposed).unwrap(), Gravity::off());
        let g = axial_gradient(&opposed, 0.0);
        assert!((1.4..=1.6).contains(&g), "gradient {g} T/m");
        let aligned = FieldConfiguration::coil(CoilPair::lab_coil(18.0, Polarity::Aligned).unwrap(), Gravity::off())
            .with_fd_step(1e-4);
        let c = axial_curvature(&aligned, 0.0);
        assert!((55.0..=60.0).contains(&c), "curvature {c} T/m^2");
    }

    #[test]
    fn helmholtz_cancels_curvature() {
        let r = 0.04;
        let pair = CoilPair::new(r, r / 2.0, 100, 5.0, Polarity::Aligned).unwrap();
        let cfg = FieldConfiguration::coil(pair, Gravity::off()).with_fd_step(1e-4);
        let b0 = on_axis_field(&pair, 0.0);
        assert!(axial_curvature(&cfg, 0.0).abs() < 1e-3 * b0 / (r * r));
    }

    #[test]
    fn ideal_models_are_analytic() {
        let q = FieldConfiguration::quadrupole(1.8, Gravity::off());
        for z in [-0.01, 0.0, 0.003] {
            assert_eq!(axial_gradient(&q, z), 1.8);
        }
        let h = FieldConfiguration::harmonic(60.0, 1e-4, Axis::Z, Gravity::off());
        assert_eq!(axial_curvature(&h, 0.0), 60.0);
    }

    #[test]
    fn zero_moment_feels_nothing() {
        let q = FieldConfiguration::quadrupole(0.3, Gravity::off());
        for p in [Vector3::new(1e-3, 2e-3, -4e-3), Vector3::zeros()] {
            assert_eq!(potential_energy(&q, &p, 0, &rb()).unwrap(), 0.0);
        }
    }

    #[test]
    fn quadrupole_potential_value() {
        let q = FieldConfiguration::quadrupole(0.05, Gravity::off());
        let u = potential_energy(&q, &Vector3::new(0.0, 0.0, 0.01), 3, &rb()).unwrap();
        let oracle = CONSTANTS.bohr_magneton * 0.05 * 0.01;
        assert_relative_eq!(u, oracle, max_relative = 1e-12);
        let t = u / CONSTANTS.k_boltzmann;
        assert!((t - 3.36e-4).abs() < 0.05e-4, "{t}");
        let anti = potential_energy(&q, &Vector3::new(0.0, 0.0, 0.01), -3, &rb()).unwrap();
        assert_relative_eq!(anti, -u, max_relative = 1e-14);
    }

    #[test]
    fn m_f_out_of_range() {
        let q = FieldConfiguration::quadrupole(0.05, Gravity::off());
        assert!(potential_energy(&q, &Vector3::zeros(), 4, &rb()).is_err());
        assert!(force(&q, &Vector3::zeros(), -5, &rb()).is_err());
    }

    #[test]
    fn harmonic_force_is_linear_and_odd() {
        let b2 = 60.0;
        let h = FieldConfiguration::harmonic(b2, 0.0, Axis::Z, Gravity::off());
        let mu = rb().moment(3);
        for z in [1e-4, 2.5e-3] {
            let f = force(&h, &Vector3::new(0.0, 0.0, z), 3, &rb()).unwrap().force;
            assert_relative_eq!(f.z, -mu * b2 * z, max_relative = 1e-14);
            let fm = force(&h, &Vector3::new(0.0, 0.0, -z), 3, &rb()).unwrap().force;
            assert_eq!(fm.z, -f.z);
            let f2 = force(&h, &Vector3::new(0.0, 0.0, 2.0 * z), 3, &rb()).unwrap().force;
            assert_relative_eq!(f2.z, 2.0 * f.z, max_relative = 1e-12);
        }
    }

    #[test]
    fn quadrupole_on_axis_force_gives_expected_impulse() {
        let q = FieldConfiguration::quadrupole(0.2, Gravity::off());
        let f = force(&q, &Vector3::new(0.0, 0.0, 1e-3), 3, &rb()).unwrap().force;
        let a = f.norm() / rb().mass();
        assert_relative_eq!(a, CONSTANTS.bohr_magneton * 0.2 / 1.41e-25, max_relative = 1e-12);
        assert!((a - 13.15).abs() < 0.1, "{a}");
        let dv = a * 3e-3;
        assert!((dv - 0.04).abs() < 0.002, "{dv}");
    }

    #[test]
    fn quadrupole_cone_has_constant_force_on_axis() {
        let q = FieldConfiguration::quadrupole(0.7, Gravity::off());
        let f1 = force(&q, &Vector3::new(0.0, 0.0, 1e-5), 3, &rb()).unwrap().force.norm();
        for z in [3e-4, -2e-3, 0.01] {
            let f = force(&q, &Vector3::new(0.0, 0.0, z), 3, &rb()).unwrap().force.norm();
            assert_relative_eq!(f, f1, max_relative = 1e-12);
        }
    }

    #[test]
    fn node_is_flagged() {
        let q = FieldConfiguration::quadrupole(0.7, Gravity::off());
        let s = force(&q, &Vector3::new(1e-10, 0.0, 0.0), 3, &rb()).unwrap();
        assert!(s.at_node);
        assert_eq!(s.force, Vector3::zeros());
        let s = force(&q, &Vector3::new(1e-6, 0.0, 0.0), 3, &rb()).unwrap();
        assert!(!s.at_node);
    }

    #[test]
    fn finite_difference_matches_analytic_force() {
        let ideal = [
            FieldConfiguration::quadrupole(0.5, Gravity::off()),
            FieldConfiguration::harmonic(80.0, 2e-4, Axis::Z, Gravity::off()),
        ];
        let species = rb();
        let h = 1e-6;
        for cfg in &ideal {
            for p in [Vector3::new(3e-4, -2e-4, 1e-3), Vector3::new(-1e-3, 5e-4, -2e-3)] {
                let f = force(cfg, &p, 3, &species).unwrap().force;
                let mut fd = Vector3::zeros();
                for i in 0..3 {
                    let mut d = Vector3::zeros();
                    d[i] = h;
                    let up = potential_energy(cfg, &(p + d), 3, &species).unwrap();
                    let dn = potential_energy(cfg, &(p - d), 3, &species).unwrap();
                    fd[i] = -(up - dn) / (2.0 * h);
                }
                assert!((f - fd).norm() <= 1e-6 * f.norm(), "{f} vs {fd}");
            }
        }
    }

    #[test]
    fn gravity_adds_weight() {
        let cfg = FieldConfiguration::empty(Gravity::standard());
        let f = force(&cfg, &Vector3::zeros(), 3, &rb()).unwrap().force;
        assert_relative_eq!(f.y, -rb().mass() * CONSTANTS.gravity_g);
        let u = potential_energy(&cfg, &Vector3::new(0.0, 1e-3, 0.0), 0, &rb()).unwrap();
        assert_relative_eq!(u, rb().mass() * CONSTANTS.gravity_g * 1e-3);
    }

    #[test]
    fn coil_force_points_to_centre() {
        let cfg = FieldConfiguration::coil(CoilPair::lab_coil(10.0, Polarity::Opposed).unwrap(), Gravity::off());
        let f = force(&cfg, &Vector3::new(0.0, 0.0, 1e-3), 3, &rb()).unwrap().force;
        assert!(f.z < 0.0);
        let g = axial_gradient(&cfg, 0.0);
        assert_relative_eq!(f.z, -rb().moment(3) * g, max_relative = 1e-4);
    }

    #[test]
    fn lab_harmonic_frequency() {
        let omega = harmonic_angular_frequency(60.0, 3, &rb());
        assert!((omega - 62.8).abs() < 0.3, "{omega}");
        assert_relative_eq!(curvature_for_frequency(omega, 3, &rb()), 60.0, max_relative = 1e-12);
    }
}
