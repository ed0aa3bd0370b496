use deltakick::constants::units::{GAUSS_PER_CM, MM, MS};
use deltakick::ensemble::sample_ensemble;
use deltakick::fields::{force, potential_energy};
use deltakick::protocols::*;
use deltakick::*;
use nalgebra::Vector3;
use proptest::prelude::*;

fn rb() -> AtomSpecies {
    AtomSpecies::rb85()
}

fn rms(values: impl Iterator<Item = f64>) -> f64 {
    let v: Vec<f64> = values.collect();
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    (v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n).sqrt()
}

#[test]
fn sampled_cloud_has_the_quoted_rms_velocity() {
    let spec = ThermalSpec::isotropic(7.5e-6, 0.25 * MM, 3).unwrap();
    let e = sample_ensemble(&spec, 100_000, &rb(), 11).unwrap();
    for axis in Axis::ALL {
        let v = rms(e.atoms.iter().map(|a| a.velocity[axis.index()]));
        assert!((v / 0.027 - 1.0).abs() < 0.01, "{axis:?}: {v}");
        let t = e.temperature(axis).unwrap();
        // standard error of a variance estimate is √(2/n)
        assert!((t / 7.5e-6 - 1.0).abs() < 3.0 * (2.0f64 / 1e5).sqrt());
    }
}

/// Two-sample Kolmogorov–Smirnov statistic.
fn ks(mut a: Vec<f64>, mut b: Vec<f64>) -> f64 {
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (mut i, mut j, mut d) = (0, 0, 0.0f64);
    while i < a.len() && j < b.len() {
        if a[i] <= b[j] {
            i += 1;
        } else {
            j += 1;
        }
        d = d.max((i as f64 / a.len() as f64 - j as f64 / b.len() as f64).abs());
    }
    d
}

#[test]
fn different_seeds_draw_from_one_distribution() {
    let spec = ThermalSpec::isotropic(7.5e-6, 0.25 * MM, 3).unwrap();
    let n = 20_000;
    let a = sample_ensemble(&spec, n, &rb(), 1).unwrap();
    let b = sample_ensemble(&spec, n, &rb(), 2).unwrap();
    assert_ne!(a.atoms, b.atoms);
    // critical value for p = 1e-3 is 1.95·√(2/n)
    let critical = 1.95 * (2.0 / n as f64).sqrt();
    for axis in Axis::ALL {
        let i = axis.index();
        let d = ks(a.atoms.iter().map(|x| x.velocity[i]).collect(), b.atoms.iter().map(|x| x.velocity[i]).collect());
        assert!(d < critical, "{axis:?}: D = {d}");
    }
}

#[test]
fn free_flight_size_matches_closed_form() {
    let spec = ThermalSpec::isotropic(7.5e-6, 0.25 * MM, 3).unwrap();
    let mut e = sample_ensemble(&spec, 100_000, &rb(), 5).unwrap();
    e.free_expansion(11.0 * MS, &Gravity::off()).unwrap();
    let expected = (0.25e-3f64.powi(2) + (0.027 * 11e-3f64).powi(2)).sqrt();
    assert!((expected - 0.389e-3).abs() < 0.002e-3);
    for axis in Axis::ALL {
        let s = e.cloud_size(axis).unwrap();
        assert!((s / expected - 1.0).abs() < 0.01, "{axis:?}: {s}");
    }
    assert!(e.free_expansion(-1.0, &Gravity::off()).is_err());
}

#[test]
fn impulse_and_integrated_kicks_agree_for_short_pulses() {
    let species = rb();
    let omega = 62.8;
    let field = FieldConfiguration::harmonic(fields::curvature_for_frequency(omega, 3, &species), 0.0, Axis::X, Gravity::off());
    let spec = ThermalSpec::isotropic(7.5e-6, 0.1 * MM, 3).unwrap();
    let prepared = prepare_cloud(&spec, 20.0 * MS, &Gravity::off(), 50_000, 9, &species).unwrap();
    for t_k in [0.2 * MS, 0.75 * MS] {
        assert!(omega * t_k <= 0.05);
        let (a, _) = kick_prepared(&prepared, &field, t_k, KickMode::Impulse, &[]).unwrap();
        let (b, _) = kick_prepared(&prepared, &field, t_k, KickMode::Integrated { step: None }, &[]).unwrap();
        let diff = (a.temperature_after[0] / b.temperature_after[0] - 1.0).abs();
        assert!(diff <= 0.02, "t_k {t_k}: {diff}");
        assert!(b.ratio(Axis::X) < 1.0);
    }
}

#[test]
fn quadrupole_kick_near_optimum_cools_four_to_tenfold() {
    let delays: Vec<f64> = (0..8).map(|i| i as f64 * 20.0 * MS / 7.0).collect();
    let template = KickTemplate::new(11.0 * MS, 3.0 * MS, KickShape::Quadrupole, delays, KickMode::Integrated { step: None }).unwrap();
    let strengths: Vec<f64> = (0..7).map(|i| 0.032 + 0.003 * i as f64).collect();
    let best = |r0: f64| {
        let spec = ThermalSpec::isotropic(7.5e-6, r0, 3).unwrap();
        let scan = scan_kick_strength(&spec, &template, &strengths, true, 100_000, 3, &rb()).unwrap();
        scan.best().result.ratio(Axis::Z)
    };
    let compact = best(0.1 * MM);
    assert!((0.1..=0.25).contains(&compact), "best axial ratio {compact}");
    // a 0.25 mm cloud only expands 1.56× in 11 ms, which caps the cooling
    let wide = best(0.25 * MM);
    let cap = predicted_cooling_ratio(0.25 * MM, rb().thermal_velocity(7.5e-6), 11.0 * MS).unwrap();
    assert!(wide > 0.25 && wide > 0.9 * cap, "{wide} vs {cap}");
}

#[test]
fn strong_kick_focuses_the_cloud() {
    let spec = ThermalSpec::isotropic(7.5e-6, 0.25 * MM, 3).unwrap();
    let delays: Vec<f64> = (0..21).map(|i| i as f64 * MS).collect();
    let template = KickTemplate::new(11.0 * MS, 3.0 * MS, KickShape::Quadrupole, delays, KickMode::Integrated { step: None }).unwrap();
    let v_rms = rb().thermal_velocity(7.5e-6);
    let optimum = optimal_quadrupole_kick(v_rms).unwrap();
    let scan = scan_kick_strength(&spec, &template, &[optimum, 2.5 * optimum], false, 50_000, 4, &rb()).unwrap();
    let strong = &scan.points[1].result;
    let curve = strong.expansion_curves[Axis::Z.index()].as_ref().unwrap();
    let smallest = (0..curve.len()).min_by(|&a, &b| curve.rms_sizes[a].total_cmp(&curve.rms_sizes[b])).unwrap();
    assert!(curve.times[smallest] > 0.0);
    assert!(strong.ratio(Axis::Z) > scan.points[0].result.ratio(Axis::Z));
}

#[test]
fn harmonic_kicks_obey_the_liouville_product_rule() {
    let spec = ThermalSpec::isotropic(7.5e-6, 0.1 * MM, 3).unwrap();
    let template = KickTemplate::new(0.0, 0.1 * MS, KickShape::Harmonic { axis: Axis::X }, vec![], KickMode::Impulse).unwrap();
    let times: Vec<f64> = [5.0, 10.0, 20.0, 30.0].iter().map(|t| t * MS).collect();
    let scan = scan_expansion_ratio(&spec, &template, &times, &[], false, 100_000, 8, &rb()).unwrap();
    for p in &scan.points {
        let product = p.result.liouville_product_ratio(Axis::X, &rb());
        assert!((product - 1.0).abs() < 0.03, "expansion {}: {product}", p.param);
        let law = 1.0 / (p.param * p.param);
        assert!((p.result.ratio(Axis::X) / law - 1.0).abs() < 0.05);
    }
}

#[test]
fn harmonic_kick_duration_minimum() {
    let species = rb();
    let omega = 62.8;
    let t_f = 30.0 * MS;
    let nominal = optimal_harmonic_duration(omega, t_f).unwrap();
    let field = FieldConfiguration::harmonic(fields::curvature_for_frequency(omega, 3, &species), 0.0, Axis::X, Gravity::off());
    // point-like cloud so that x = v·t_f holds
    let spec = ThermalSpec::new([7.5e-6; 3], [1e-6; 3], vec![(3, 1.0)], 0.0).unwrap();
    let template = KickTemplate::new(t_f, nominal, KickShape::Harmonic { axis: Axis::X }, vec![], KickMode::Impulse).unwrap();
    let durations: Vec<f64> = (0..21).map(|i| nominal * (0.75 + 0.025 * i as f64)).collect();
    let scan = scan_kick_duration(&spec, &template, &field, &durations, 20_000, 2, &species).unwrap();
    assert!((scan.best().param / nominal - 1.0).abs() <= 0.025 + 1e-12, "{}", scan.best().param / nominal);
}

#[test]
fn runs_are_bit_identical() {
    let spec = ThermalSpec::uniform_spins(6e-6, 0.25 * MM, 3, 0.4).unwrap();
    let field = FieldConfiguration::quadrupole(30.0 * GAUSS_PER_CM, Gravity::standard());
    let sched = KickSchedule::new(5.0 * MS, 2.0 * MS, field, vec![0.0, 5.0 * MS, 10.0 * MS], KickMode::Integrated { step: None }).unwrap();
    let a = run_kick_experiment(&spec, &sched, true, 5000, 77, &rb()).unwrap();
    let b = run_kick_experiment(&spec, &sched, true, 5000, 77, &rb()).unwrap();
    assert_eq!(a, b);
}

#[test]
fn multispin_cloud_splits_into_cold_core_and_hot_halo() {
    let species = rb();
    let spec = ThermalSpec::uniform_spins(7.5e-6, 0.25 * MM, 3, 0.0).unwrap();
    let dv = optimal_quadrupole_kick(species.thermal_velocity(7.5e-6)).unwrap();
    let field = KickShape::Quadrupole.field(dv, 3.0 * MS, &species, Gravity::off()).unwrap();
    let sched = KickSchedule::new(11.0 * MS, 3.0 * MS, field, vec![20.0 * MS], KickMode::Integrated { step: None }).unwrap();
    let r = molasses_multispin_experiment(&spec, &sched, Axis::Z, 100_000, 6, &species).unwrap();
    assert!(!r.bimodal.unimodal);
    assert!(r.bimodal.narrow.width * 2.0 < r.bimodal.broad.width, "{:?}", r.bimodal);
    let zero = r.per_spin.iter().find(|s| s.m_f == 0).unwrap();
    let three = r.per_spin.iter().find(|s| s.m_f == 3).unwrap();
    assert!(three.temperature_after[2] < 0.5 * three.temperature_before[2]);
    // m_F = 0 feels no field: its temperature is untouched
    assert_eq!(zero.temperature_after, zero.temperature_before);
}

#[test]
fn correlated_spins_narrow_the_central_stripe() {
    let species = rb();
    let dv = optimal_quadrupole_kick(species.thermal_velocity(7.5e-6)).unwrap();
    let field = KickShape::Quadrupole.field(dv, 3.0 * MS, &species, Gravity::off()).unwrap();
    let sched = KickSchedule::new(11.0 * MS, 3.0 * MS, field, vec![20.0 * MS], KickMode::Integrated { step: None }).unwrap();
    let width = |c: f64| {
        let spec = ThermalSpec::uniform_spins(7.5e-6, 0.25 * MM, 3, c).unwrap();
        molasses_multispin_experiment(&spec, &sched, Axis::Z, 100_000, 6, &species).unwrap().bimodal.narrow.width
    };
    let (plain, correlated) = (width(0.0), width(0.9));
    assert!(correlated < plain, "{correlated} vs {plain}");
}

#[test]
fn single_spin_multispin_request_is_refused() {
    let spec = ThermalSpec::isotropic(7.5e-6, 0.25 * MM, 3).unwrap();
    let field = FieldConfiguration::quadrupole(0.1, Gravity::off());
    let sched = KickSchedule::new(1.0 * MS, 1.0 * MS, field, vec![], KickMode::Impulse).unwrap();
    assert!(molasses_multispin_experiment(&spec, &sched, Axis::Z, 100, 0, &rb()).is_err());
}

/// Jacobian of the one-atom map through a leapfrog harmonic kick, by
/// central differences.
fn kick_jacobian(omega: f64, duration: f64, step: f64, base: [f64; 2]) -> f64 {
    let species = rb();
    let field = FieldConfiguration::harmonic(fields::curvature_for_frequency(omega, 3, &species), 0.0, Axis::Z, Gravity::off());
    let run = |x: f64, v: f64| {
        let atom = Atom { position: Vector3::new(0.0, 0.0, x), velocity: Vector3::new(0.0, 0.0, v), m_f: 3, node_touched: false };
        let mut e = Ensemble { atoms: vec![atom], species, seed: 0, time: 0.0 };
        e.apply_kick(&field, duration, step).unwrap();
        (e.atoms[0].position.z, e.atoms[0].velocity.z)
    };
    let (hx, hv) = (1e-7, 1e-4);
    let (xp, vp) = run(base[0] + hx, base[1]);
    let (xm, vm) = run(base[0] - hx, base[1]);
    let (xq, vq) = run(base[0], base[1] + hv);
    let (xr, vr) = run(base[0], base[1] - hv);
    let j = [[(xp - xm) / (2.0 * hx), (xq - xr) / (2.0 * hv)], [(vp - vm) / (2.0 * hx), (vq - vr) / (2.0 * hv)]];
    j[0][0] * j[1][1] - j[0][1] * j[1][0]
}

#[test]
fn leapfrog_map_preserves_phase_space_volume() {
    for base in [[1e-4, 0.0], [1e-4, 0.02], [-3e-4, -0.01]] {
        let det = kick_jacobian(62.8, 3.0 * MS, 10e-6, base);
        assert!((det - 1.0).abs() < 1e-10, "{base:?}: {det}");
    }
}

fn covariance_area(e: &Ensemble, axis: Axis) -> f64 {
    e.phase_space_area(axis).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn linear_evolution_conserves_phase_space_area(
        seed in 0u64..1000,
        legs in prop::collection::vec((0.0f64..20e-3, 0.0f64..3e-3), 1..4),
    ) {
        let species = rb();
        let spec = ThermalSpec::new([7.5e-6, 3e-6, 5e-6], [0.1e-3, 0.2e-3, 0.15e-3], vec![(3, 1.0)], 0.0).unwrap();
        let mut e = sample_ensemble(&spec, 4000, &species, seed).unwrap();
        let before: Vec<f64> = Axis::ALL.iter().map(|a| covariance_area(&e, *a)).collect();
        let field = FieldConfiguration::harmonic(fields::curvature_for_frequency(62.8, 3, &species), 0.0, Axis::Z, Gravity::off());
        for (flight, kick) in legs {
            e.free_expansion(flight, &Gravity::off()).unwrap();
            if kick > 0.0 {
                e.apply_kick(&field, kick, kick / 50.0).unwrap();
            }
        }
        for (axis, b) in Axis::ALL.iter().zip(before) {
            let a = covariance_area(&e, *axis);
            prop_assert!((a / b - 1.0).abs() < 1e-6, "{:?}: {} vs {}", axis, a, b);
        }
    }

    #[test]
    fn zeeman_energy_is_linear_in_sublevel(
        x in -5e-3f64..5e-3, y in -5e-3f64..5e-3, z in -5e-3f64..5e-3,
        current in 1.0f64..18.0,
        m in -3i8..=3,
    ) {
        let species = rb();
        let pair = CoilPair::lab_coil(current, Polarity::Opposed).unwrap();
        let config = FieldConfiguration::coil(pair, Gravity::off());
        let p = Vector3::new(x, y, z);
        let u1 = potential_energy(&config, &p, 1, &species).unwrap();
        let um = potential_energy(&config, &p, m, &species).unwrap();
        prop_assert!((um - m as f64 * u1).abs() <= 1e-12 * u1.abs().max(1e-40));
        let f1 = force(&config, &p, 1, &species).unwrap();
        let fm = force(&config, &p, m, &species).unwrap();
        prop_assert!((fm.force - f1.force * m as f64).norm() <= 1e-9 * f1.force.norm().max(1e-40));
    }

    #[test]
    fn spin_filter_returns_an_untouched_subset(seed in 0u64..500, gradient_g_cm in 5.0f64..60.0) {
        let species = rb();
        let spec = ThermalSpec::uniform_spins(6e-6, 0.25e-3, 3, 0.0).unwrap();
        let e = sample_ensemble(&spec, 700, &species, seed).unwrap();
        let kept = magnetic_trap_spin_filter(&e, gradient_g_cm * GAUSS_PER_CM).unwrap();
        let mut cursor = e.atoms.iter();
        for a in &kept.atoms {
            prop_assert!(cursor.any(|b| b == a), "kept atoms must appear in order, unmodified");
            let threshold = spin_filter_threshold(a.m_f, &species).unwrap();
            prop_assert!(gradient_g_cm * GAUSS_PER_CM > threshold);
        }
        let expected = e.atoms.iter().filter(|a| spin_filter_threshold(a.m_f, &species).is_some_and(|t| gradient_g_cm * GAUSS_PER_CM > t)).count();
        prop_assert_eq!(kept.len(), expected);
    }
}
