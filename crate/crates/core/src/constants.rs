//! Fundamental constants, the ⁸⁵Rb species record and unit conversions.

use crate::error::{domain, Result};

/// Fundamental constants (CODATA 2018), SI units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalConstants {
    pub planck_h: f64,
    pub hbar: f64,
    pub k_boltzmann: f64,
    pub bohr_magneton: f64,
    pub mu0: f64,
    pub gravity_g: f64,
}

pub const CONSTANTS: PhysicalConstants = PhysicalConstants {
    planck_h: 6.626_070_15e-34,
    hbar: 6.626_070_15e-34 / (2.0 * std::f64::consts::PI),
    k_boltzmann: 1.380_649e-23,
    bohr_magneton: 9.274_010_078_3e-24,
    mu0: 1.256_637_062_12e-6,
    gravity_g: 9.806_65,
};

/// Atomic species data needed by the classical and quantum models.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AtomSpecies {
    mass: f64,
    d2_wavelength: f64,
    f_ground: u8,
    g_f: f64,
}

impl AtomSpecies {
    pub fn new(mass: f64, d2_wavelength: f64, f_ground: u8, g_f: f64) -> Result<Self> {
        if !(mass > 0.0 && mass.is_finite()) {
            return domain(format!("species mass must be positive, got {mass}"));
        }
        if !(d2_wavelength > 0.0 && d2_wavelength.is_finite()) {
            return domain(format!("D2 wavelength must be positive, got {d2_wavelength}"));
        }
        if !g_f.is_finite() {
            return domain("Landé factor must be finite");
        }
        Ok(Self { mass, d2_wavelength, f_ground, g_f })
    }

    /// ⁸⁵Rb in the F = 3 ground manifold.
    pub fn rb85() -> Self {
        Self {
            mass: 1.4100e-25,
            d2_wavelength: 780.241e-9,
            f_ground: 3,
            g_f: 1.0 / 3.0,
        }
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn d2_wavelength(&self) -> f64 {
        self.d2_wavelength
    }

    pub fn f_ground(&self) -> u8 {
        self.f_ground
    }

    pub fn g_f(&self) -> f64 {
        self.g_f
    }

    /// Magnetic moment g_F·m_F·μ_B of the given sublevel.
    pub fn moment(&self, m_f: i8) -> f64 {
        self.g_f * f64::from(m_f) * CONSTANTS.bohr_magneton
    }

    pub fn check_m_f(&self, m_f: i8) -> Result<()> {
        if i16::from(m_f).unsigned_abs() > u16::from(self.f_ground) {
            return domain(format!("|m_F| = {} exceeds F = {}", m_f.unsigned_abs(), self.f_ground));
        }
        Ok(())
    }

    /// 1D rms velocity sqrt(k_B·T/m) of a thermal cloud.
    pub fn thermal_velocity(&self, temperature: f64) -> f64 {
        (CONSTANTS.k_boltzmann * temperature.max(0.0) / self.mass).sqrt()
    }

    /// Inverse of [`thermal_velocity`](Self::thermal_velocity).
    pub fn temperature_from_velocity(&self, v_rms: f64) -> f64 {
        self.mass * v_rms * v_rms / CONSTANTS.k_boltzmann
    }
}

/// Velocity change from absorbing one photon on the D2 line, h/(m·λ).
pub fn recoil_velocity(species: &AtomSpecies) -> f64 {
    CONSTANTS.planck_h / (species.mass * species.d2_wavelength)
}

/// m·v_rec²/k_B.
pub fn recoil_temperature(species: &AtomSpecies) -> f64 {
    let v = recoil_velocity(species);
    species.mass * v * v / CONSTANTS.k_boltzmann
}

/// de Broglie wavelength h/(m·v_rms) using the 1D rms velocity at `temperature_1d`.
pub fn de_broglie_wavelength(species: &AtomSpecies, temperature_1d: f64) -> Result<f64> {
    if !(temperature_1d > 0.0) {
        return domain(format!("temperature must be positive, got {temperature_1d}"));
    }
    Ok(CONSTANTS.planck_h / (species.mass * species.thermal_velocity(temperature_1d)))
}

/// Exact conversions between laboratory units and SI.
pub mod units {
    use super::CONSTANTS;

    pub const GAUSS: f64 = 1e-4;
    pub const GAUSS_PER_CM: f64 = 1e-2;
    pub const GAUSS_PER_CM2: f64 = 1.0;
    pub const CM: f64 = 1e-2;
    pub const MM: f64 = 1e-3;
    pub const UM: f64 = 1e-6;
    pub const MS: f64 = 1e-3;
    pub const US: f64 = 1e-6;
    pub const UK: f64 = 1e-6;
    pub const NK: f64 = 1e-9;

    /// Energy k_B·T in joules for a temperature in kelvin.
    pub fn kelvin_to_joule(t: f64) -> f64 {
        CONSTANTS.k_boltzmann * t
    }

    pub fn joule_to_kelvin(e: f64) -> f64 {
        e / CONSTANTS.k_boltzmann
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn hbar_consistent_with_h() {
        let c = CONSTANTS;
        assert_relative_eq!(c.hbar, c.planck_h / (2.0 * std::f64::consts::PI), max_relative = 1e-12);
        for v in [c.planck_h, c.hbar, c.k_boltzmann, c.bohr_magneton, c.mu0, c.gravity_g] {
            assert!(v > 0.0);
        }
    }

    #[test]
    fn rb85_record() {
        let rb = AtomSpecies::rb85();
        assert_eq!(rb.f_ground(), 3);
        assert!((779e-9..=781e-9).contains(&rb.d2_wavelength()));
        assert_relative_eq!(rb.g_f(), 1.0 / 3.0);
        assert!(AtomSpecies::new(0.0, 780e-9, 3, 0.5).is_err());
    }

    #[test]
    fn recoil_velocity_of_rb85() {
        // h / (m λ) with the CODATA value of h typed out independently
        let oracle = 6.626_070_15e-34 / (1.41e-25 * 780.241e-9);
        let v = recoil_velocity(&AtomSpecies::rb85());
        assert_relative_eq!(v, oracle, max_relative = 1e-12);
        assert!((v - 6.0e-3).abs() < 0.06e-3, "v_rec = {v}");
        let rb = AtomSpecies::rb85();
        assert_relative_eq!(v * rb.mass() * rb.d2_wavelength(), CONSTANTS.planck_h, max_relative = 1e-12);
    }

    #[test]
    fn recoil_scales_inversely_with_mass() {
        let rb = AtomSpecies::rb85();
        let heavy = AtomSpecies::new(2.0 * rb.mass(), rb.d2_wavelength(), 3, rb.g_f()).unwrap();
        assert_relative_eq!(recoil_velocity(&heavy), 0.5 * recoil_velocity(&rb), max_relative = 1e-14);
        let heavier = AtomSpecies::new(4.0 * rb.mass(), rb.d2_wavelength(), 3, rb.g_f()).unwrap();
        assert_relative_eq!(recoil_temperature(&heavier), 0.25 * recoil_temperature(&rb), max_relative = 1e-13);
    }

    #[test]
    fn recoil_temperature_of_rb85() {
        let t = recoil_temperature(&AtomSpecies::rb85());
        assert!((t - 0.37e-6).abs() < 0.02 * 0.37e-6, "T_rec = {t}");
        let ratio = t / 6e-6;
        assert!((ratio - 0.062).abs() < 0.002, "ratio = {ratio}");
    }

    #[test]
    fn de_broglie_anchors() {
        let rb = AtomSpecies::rb85();
        let at_6uk = de_broglie_wavelength(&rb, 6e-6).unwrap();
        assert!((0.19e-6..=0.20e-6).contains(&at_6uk), "{at_6uk}");
        let at_5nk = de_broglie_wavelength(&rb, 5e-9).unwrap();
        assert!((at_5nk - 6.7e-6).abs() < 0.1e-6, "{at_5nk}");
        let quarter = de_broglie_wavelength(&rb, 24e-6).unwrap();
        assert_relative_eq!(quarter, 0.5 * at_6uk, max_relative = 1e-12);
        assert!(de_broglie_wavelength(&rb, 0.0).is_err());
        assert!(de_broglie_wavelength(&rb, -1e-6).is_err());
    }

    #[test]
    fn de_broglie_at_recoil_is_optical_wavelength() {
        let rb = AtomSpecies::rb85();
        let lam = de_broglie_wavelength(&rb, recoil_temperature(&rb)).unwrap();
        assert_relative_eq!(lam, rb.d2_wavelength(), max_relative = 1e-6);
    }

    #[test]
    fn m_f_range() {
        let rb = AtomSpecies::rb85();
        assert!(rb.check_m_f(3).is_ok());
        assert!(rb.check_m_f(-3).is_ok());
        assert!(rb.check_m_f(4).is_err());
        assert!(rb.check_m_f(-4).is_err());
    }
}
