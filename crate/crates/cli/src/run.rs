//! Experiment dispatch and output files.

use std::fs;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use deltakick::constants::units::{joule_to_kelvin, NK};
use deltakick::export::{write_csv, write_curve, write_ensemble};
use deltakick::fields::{axial_curvature, axial_gradient, total_axial_field};
use deltakick::protocols::{
    molasses_multispin_experiment, run_kick_experiment, scan_expansion_ratio, scan_kick_strength, KickMode, KickSchedule, KickShape,
    KickTemplate, REFERENCE_M_F,
};
use deltakick::quantum::{
    count_quasi_bound_states, sweep_transfer, transfer_vs_depth, tunneling_decay, Absorber, DecayConfig, Grid1D, PotentialSpec,
    SweepConfig, Trajectory,
};
use deltakick::fields::curvature_for_frequency;
use deltakick::{AtomSpecies, Axis, CoilPair, FieldConfiguration, Gravity, Polarity, ThermalSpec};

use crate::config::{Kind, RunConfig};

pub const MANIFEST: &str = "manifest.txt";

/// A finished run: file names and contents, written in order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outputs {
    pub files: Vec<(String, Vec<u8>)>,
}

impl Outputs {
    fn new() -> Self {
        Self { files: Vec::new() }
    }

    fn add(&mut self, name: &str, body: Vec<u8>) {
        self.files.push((name.to_string(), body));
    }

    pub fn write_to(&self, dir: &Path) -> std::io::Result<Vec<PathBuf>> {
        fs::create_dir_all(dir)?;
        self.files
            .iter()
            .map(|(name, body)| {
                let p = dir.join(name);
                fs::write(&p, body)?;
                Ok(p)
            })
            .collect()
    }
}

fn csv<R: AsRef<[f64]>>(header: &[&str], rows: impl IntoIterator<Item = R>) -> deltakick::Result<Vec<u8>> {
    let mut buf = Vec::new();
    write_csv(&mut buf, header, rows)?;
    Ok(buf)
}

fn axis_of(c: &RunConfig) -> Axis {
    match c.word("axis") {
        "x" => Axis::X,
        "y" => Axis::Y,
        _ => Axis::Z,
    }
}

fn mode_of(c: &RunConfig) -> KickMode {
    match c.word("mode") {
        "impulse" => KickMode::Impulse,
        _ => KickMode::Integrated { step: c.optional("step") },
    }
}

fn shape_of(c: &RunConfig) -> KickShape {
    match c.word("shape") {
        "harmonic" => KickShape::Harmonic { axis: axis_of(c) },
        _ => KickShape::Quadrupole,
    }
}

fn thermal(c: &RunConfig) -> deltakick::Result<ThermalSpec> {
    ThermalSpec::isotropic(c.number("temperature"), c.number("radius"), c.number("m_f") as i8)
}

const RESULT_HEADER: [&str; 9] = ["axis", "T_before", "T_after", "ratio", "sigma_initial", "sigma_before", "sigma_after", "fit_T", "fit_err"];

fn kick(c: &RunConfig, species: &AtomSpecies, out: &mut Outputs) -> deltakick::Result<()> {
    let spec = thermal(c)?;
    let gravity = Gravity::from_flag(c.flag("gravity"));
    let shape = shape_of(c);
    let field = match shape {
        KickShape::Quadrupole => FieldConfiguration::quadrupole(c.number("gradient"), gravity),
        KickShape::Harmonic { axis } => {
            FieldConfiguration::harmonic(curvature_for_frequency(c.number("omega"), REFERENCE_M_F, species), 0.0, axis, gravity)
        }
    };
    let schedule = KickSchedule::new(c.number("t_f"), c.number("t_k"), field, c.list("delays").to_vec(), mode_of(c))?;
    let r = run_kick_experiment(&spec, &schedule, c.flag("gravity"), c.count("n"), c.seed(), species)?;
    let rows = Axis::ALL.map(|a| {
        let i = a.index();
        let (ft, fe) = r.fits[i].map_or((f64::NAN, f64::NAN), |f| (f.temperature, f.temperature_err));
        [i as f64, r.temperature_before[i], r.temperature_after[i], r.cooling_ratio[i], r.size_initial[i], r.size_before[i], r.size_after[i], ft, fe]
    });
    out.add("result.csv", csv(&RESULT_HEADER, rows)?);
    let mut buf = Vec::new();
    match &r.expansion_curves[shape.measured_axis().index()] {
        Some(curve) => write_curve(&mut buf, curve)?,
        None => write_csv(&mut buf, &deltakick::export::CURVE_HEADER, Vec::<[f64; 3]>::new())?,
    }
    out.add("expansion.csv", buf);
    if c.flag("write_ensemble") {
        let mut e = deltakick::ensemble::sample_ensemble(&spec, c.count("n"), species, c.seed())?;
        e.free_expansion(schedule.expansion_time, &gravity)?;
        let mut field = schedule.field.clone();
        field.gravity = gravity;
        match schedule.mode {
            KickMode::Integrated { step } => {
                e.apply_kick(&field, schedule.kick_duration, step.unwrap_or(deltakick::ensemble::default_step(schedule.kick_duration)))?
            }
            KickMode::Impulse => e.impulse_kick(&field, schedule.kick_duration)?,
        }
        let mut buf = Vec::new();
        write_ensemble(&mut buf, &e)?;
        out.add("ensemble.csv", buf);
    }
    Ok(())
}

fn template(c: &RunConfig, t_f: f64) -> deltakick::Result<KickTemplate> {
    KickTemplate::new(t_f, c.number("t_k"), shape_of(c), c.list("delays").to_vec(), mode_of(c))
}

fn scan_strength(c: &RunConfig, species: &AtomSpecies, out: &mut Outputs) -> deltakick::Result<()> {
    let t = template(c, c.number("t_f"))?;
    let strengths = match t.shape {
        KickShape::Quadrupole => c.list("delta_v"),
        KickShape::Harmonic { .. } => c.list("kappa"),
    };
    let curve = scan_kick_strength(&thermal(c)?, &t, strengths, c.flag("gravity"), c.count("n"), c.seed(), species)?;
    let mut buf = Vec::new();
    curve.write_csv(&mut buf)?;
    out.add("scan.csv", buf);
    Ok(())
}

fn scan_expansion(c: &RunConfig, species: &AtomSpecies, out: &mut Outputs) -> deltakick::Result<()> {
    let t = template(c, 0.0)?;
    let strengths = if c.values.contains_key("delta_v") { c.list("delta_v") } else { &[] };
    let curve = scan_expansion_ratio(&thermal(c)?, &t, c.list("t_f"), strengths, c.flag("gravity"), c.count("n"), c.seed(), species)?;
    let mut buf = Vec::new();
    curve.write_csv(&mut buf)?;
    out.add("scan.csv", buf);
    out.add("strengths.csv", csv(&["param", "strength"], curve.points.iter().map(|p| [p.param, p.strength]))?);
    Ok(())
}

fn multispin(c: &RunConfig, species: &AtomSpecies, out: &mut Outputs) -> deltakick::Result<()> {
    let f = species.f_ground() as i8;
    let pops = c.list("populations");
    if pops.len() != (2 * f + 1) as usize {
        return Err(deltakick::Error::Domain(format!("populations needs {} weights, ordered m_F = {f} down to {}", 2 * f + 1, -f)));
    }
    let populations = pops.iter().enumerate().map(|(i, w)| (f - i as i8, *w)).collect();
    let temperature = c.number("temperature");
    let radius = c.number("radius");
    let spec = ThermalSpec::new([temperature; 3], [radius; 3], populations, c.number("correlation"))?;
    let gravity = Gravity::from_flag(c.flag("gravity"));
    let field = FieldConfiguration::quadrupole(c.number("gradient"), gravity);
    let schedule = KickSchedule::new(c.number("t_f"), c.number("t_k"), field, c.list("delays").to_vec(), mode_of(c))?;
    let r = molasses_multispin_experiment(&spec, &schedule, axis_of(c), c.count("n"), c.seed(), species)?;
    out.add(
        "spins.csv",
        csv(
            &["mF", "atoms", "T_before_x", "T_before_y", "T_before_z", "T_after_x", "T_after_y", "T_after_z"],
            r.per_spin.iter().map(|s| {
                let (b, a) = (s.temperature_before, s.temperature_after);
                [s.m_f as f64, s.atoms as f64, b[0], b[1], b[2], a[0], a[1], a[2]]
            }),
        )?,
    );
    out.add("profile.csv", csv(&["x", "counts"], r.profile_positions.iter().zip(&r.profile_counts).map(|(x, n)| [*x, *n]))?);
    let b = r.bimodal;
    out.add(
        "bimodal.csv",
        csv(
            &["delay", "narrow_weight", "narrow_width", "broad_weight", "broad_width", "centre", "residual", "unimodal"],
            [[r.profile_delay, b.narrow.weight, b.narrow.width, b.broad.weight, b.broad.width, b.centre, b.residual_norm, b.unimodal as u8 as f64]],
        )?,
    );
    Ok(())
}

fn coil_field(c: &RunConfig, out: &mut Outputs) -> deltakick::Result<()> {
    let polarity = if c.word("polarity") == "aligned" { Polarity::Aligned } else { Polarity::Opposed };
    let pair = CoilPair::new(c.number("radius"), c.number("half_separation"), c.count("turns") as u32, c.number("current"), polarity)?;
    let field = FieldConfiguration::coil(pair, Gravity::off());
    let (lo, hi, n) = (c.number("z_min"), c.number("z_max"), c.count("points"));
    let zs: Vec<f64> = if n == 1 { vec![lo] } else { (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect() };
    out.add(
        "field.csv",
        csv(
            &["z", "Bz", "dBz_dz", "d2Bz_dz2"],
            zs.iter().map(|&z| [z, total_axial_field(&field, z), axial_gradient(&field, z), axial_curvature(&field, z)]),
        )?,
    );
    out.add("summary.csv", csv(&["gradient_centre", "curvature_centre"], [[axial_gradient(&field, 0.0), axial_curvature(&field, 0.0)]])?);
    Ok(())
}

fn absorber(c: &RunConfig) -> Option<Absorber> {
    let fraction = c.number("absorber_fraction");
    (fraction > 0.0).then(|| Absorber { fraction, power: c.number("absorber_power") })
}

fn sweep_config(c: &RunConfig, barrier: f64) -> deltakick::Result<SweepConfig> {
    let trajectory = Trajectory::linear_sweep(c.number("start"), c.number("stop"), c.number("speed"))?;
    let mut cfg = SweepConfig::standard(false)?;
    cfg.temperature = c.number("temperature");
    cfg.spec = PotentialSpec::new(c.number("slope"), barrier, c.number("waist"), trajectory)?;
    cfg.grid = Grid1D::symmetric(c.number("half_width"), c.count("points"))?;
    cfg.dt = c.number("dt");
    cfg.absorber = absorber(c);
    cfg.record_interval = c.count("record_interval");
    cfg.neglected_weight = c.number("neglected_weight");
    cfg.capture_floor = c.number("capture_floor");
    cfg.empty_run = c.count("empty_run");
    cfg.barrier_refresh = c.count("barrier_refresh");
    Ok(cfg)
}

fn qm_sweep(c: &RunConfig, out: &mut Outputs) -> deltakick::Result<()> {
    let cfg = sweep_config(c, c.number("barrier"))?;
    let r = sweep_transfer(&cfg)?;
    let mut buf = Vec::new();
    r.write_series_csv(&mut buf)?;
    out.add("sweep.csv", buf);
    out.add(
        "states.csv",
        csv(&["index", "energy", "weight", "capture", "absorbed"], r.states.iter().map(|s| [s.index as f64, s.energy, s.weight, s.capture, s.absorbed]))?,
    );
    let bound = count_quasi_bound_states(&cfg.spec.frozen(cfg.duration()), &cfg.grid, cfg.mass)?;
    out.add(
        "result.csv",
        csv(
            &["transfer", "required_states", "states_evolved", "bound_states"],
            [[r.transfer, r.required_states as f64, r.states.len() as f64, bound as f64]],
        )?,
    );
    Ok(())
}

fn qm_depth_scan(c: &RunConfig, out: &mut Outputs) -> deltakick::Result<()> {
    let base = sweep_config(c, 0.0)?;
    let points = transfer_vs_depth(c.list("depths"), &base)?;
    out.add(
        "transfer_vs_depth.csv",
        csv(&["depth_nK", "transfer", "bound_states"], points.iter().map(|p| [joule_to_kelvin(p.depth) / NK, p.transfer, p.bound_states as f64]))?,
    );
    Ok(())
}

fn qm_decay(c: &RunConfig, out: &mut Outputs) -> deltakick::Result<()> {
    let mut cfg = DecayConfig::narrow_barrier(c.number("barrier"))?;
    cfg.spec = PotentialSpec::new(c.number("slope"), c.number("barrier"), c.number("waist"), Trajectory::fixed(c.number("centre")))?;
    cfg.grid = Grid1D::new(c.number("x_min"), c.number("x_max"), c.count("points"))?;
    cfg.dt = c.number("dt");
    cfg.horizon = c.number("horizon");
    cfg.record_interval = c.count("record_interval");
    cfg.transient_fraction = c.number("transient_fraction");
    cfg.absorber = absorber(c);
    let r = tunneling_decay(&cfg)?;
    let mut buf = Vec::new();
    r.write_csv(&mut buf)?;
    out.add("survival.csv", buf);
    out.add(
        "result.csv",
        csv(
            &["rate", "lifetime", "secular_period", "per_period_loss", "bound_states", "level_above_minimum", "well_depth"],
            [[r.rate, r.lifetime, r.secular_period, r.per_period_loss, r.bound_states as f64, r.level_above_minimum, r.well.depth()]],
        )?,
    );
    Ok(())
}

/// SHA-256 of the canonical config text, as lowercase hex.
pub fn config_hash(c: &RunConfig) -> String {
    Sha256::digest(c.serialize().as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
}

fn manifest(c: &RunConfig, files: &[String]) -> Vec<u8> {
    let mut s = String::new();
    s.push_str(&format!("experiment = {}\n", c.kind));
    s.push_str(&format!("config_sha256 = {}\n", config_hash(c)));
    s.push_str(&format!("seed = {}\n", c.seed()));
    s.push_str(&format!("deltakick_cli = {}\n", env!("CARGO_PKG_VERSION")));
    s.push_str(&format!("deltakick = {}\n", deltakick::VERSION));
    s.push_str(&format!("files = {}\n", files.join(", ")));
    s.push_str("\n# canonical configuration\n");
    s.push_str(&c.serialize());
    s.into_bytes()
}

/// Run the experiment and collect its files, manifest last.
pub fn execute(c: &RunConfig) -> deltakick::Result<Outputs> {
    let species = AtomSpecies::rb85();
    let mut out = Outputs::new();
    match c.kind {
        Kind::Kick => kick(c, &species, &mut out)?,
        Kind::ScanStrength => scan_strength(c, &species, &mut out)?,
        Kind::ScanExpansion => scan_expansion(c, &species, &mut out)?,
        Kind::Multispin => multispin(c, &species, &mut out)?,
        Kind::CoilField => coil_field(c, &mut out)?,
        Kind::QmSweep => qm_sweep(c, &mut out)?,
        Kind::QmDepthScan => qm_depth_scan(c, &mut out)?,
        Kind::QmDecay => qm_decay(c, &mut out)?,
    }
    let names: Vec<String> = out.files.iter().map(|f| f.0.clone()).collect();
    out.add(MANIFEST, manifest(c, &names));
    Ok(out)
}
