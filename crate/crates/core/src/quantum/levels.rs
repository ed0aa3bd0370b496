//! Closed-form spectrum of the symmetric linear trap U = α·|x|.
//!
//! Even states satisfy ψ'(0) = 0 and sit at the zeros of Ai'; odd states
//! satisfy ψ(0) = 0 and sit at the zeros of Ai. Energies are the zero
//! magnitudes times (α²ħ²/2m)^{1/3}.

use crate::constants::CONSTANTS;

const AI_ZEROS: [f64; 10] = [
    2.338107410460, 4.087949444131, 5.520559828096, 6.786708090072, 7.944133587113,
    9.022650853341, 10.040174341558, 11.008524303733, 11.936015563236, 12.828776752866,
];

const AI_PRIME_ZEROS: [f64; 10] = [
    1.018792971647, 3.248197582180, 4.820099211179, 6.163307355639, 7.372177255050,
    8.488486734020, 9.535449052434, 10.527660396957, 11.475056633480, 12.384788371846,
];

/// Magnitude of the k-th zero of Ai (k ≥ 1).
pub fn airy_ai_zero(k: usize) -> f64 {
    assert!(k >= 1, "zeros are numbered from 1");
    if k <= AI_ZEROS.len() {
        return AI_ZEROS[k - 1];
    }
    let t = 3.0 * std::f64::consts::PI / 8.0 * (4.0 * k as f64 - 1.0);
    t.powf(2.0 / 3.0) * (1.0 + 5.0 / 48.0 * t.powi(-2) - 5.0 / 36.0 * t.powi(-4))
}

/// Magnitude of the k-th zero of Ai' (k ≥ 1).
pub fn airy_ai_prime_zero(k: usize) -> f64 {
    assert!(k >= 1, "zeros are numbered from 1");
    if k <= AI_PRIME_ZEROS.len() {
        return AI_PRIME_ZEROS[k - 1];
    }
    let t = 3.0 * std::f64::consts::PI / 8.0 * (4.0 * k as f64 - 3.0);
    t.powf(2.0 / 3.0) * (1.0 - 7.0 / 48.0 * t.powi(-2) + 35.0 / 288.0 * t.powi(-4))
}

/// Energy unit (α²ħ²/2m)^{1/3}.
pub fn v_trap_energy_scale(slope: f64, mass: f64) -> f64 {
    (slope * slope * CONSTANTS.hbar * CONSTANTS.hbar / (2.0 * mass)).cbrt()
}

/// Energy of level `j` (0 = ground, even).
pub fn v_trap_level(j: usize, slope: f64, mass: f64) -> f64 {
    let zero = if j % 2 == 0 { airy_ai_prime_zero(j / 2 + 1) } else { airy_ai_zero(j / 2 + 1) };
    zero * v_trap_energy_scale(slope, mass)
}

/// All levels with energy below `e_max`, ascending.
pub fn v_trap_levels_below(e_max: f64, slope: f64, mass: f64) -> Vec<f64> {
    let mut out = Vec::new();
    let mut j = 0;
    loop {
        let e = v_trap_level(j, slope, mass);
        if e >= e_max {
            return out;
        }
        out.push(e);
        j += 1;
    }
}
