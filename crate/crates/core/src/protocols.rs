//! Experiment drivers and closed-form predictions for delta-kick cooling.

use std::io::Write;

use crate::constants::{AtomSpecies, CONSTANTS};
use crate::ensemble::{default_step, sample_ensemble, Ensemble, ThermalSpec};
use crate::error::{domain, Result};
use crate::export::write_csv;
use crate::fields::{curvature_for_frequency, gradient_for_impulse, Axis, FieldConfiguration, Gravity};
use crate::tof::{
    density_image, expansion_curve, fit_bimodal, fit_temperature, BimodalFit, BimodalGuess, ExpansionCurve,
    ImageWindow, TemperatureFit,
};

/// Sublevel of the reference atom used to convert kick strengths into fields.
pub const REFERENCE_M_F: i8 = 3;

/// Kick duration 1/(ω²·t_f) that cancels the position–velocity correlation
/// of a point source.
pub fn optimal_harmonic_duration(omega: f64, t_f: f64) -> Result<f64> {
    if !(omega > 0.0) || !(t_f > 0.0) {
        return domain("trap frequency and expansion time must be positive");
    }
    Ok(1.0 / (omega * omega * t_f))
}

/// Temperature ratio r₀²/(r₀² + (v₀·t_f)²) reached by an ideal harmonic kick.
pub fn predicted_cooling_ratio(r0: f64, v0: f64, t_f: f64) -> Result<f64> {
    if !(r0 > 0.0) || !(v0 >= 0.0) || !(t_f >= 0.0) {
        return domain("r0 must be positive, v0 and t_f non-negative");
    }
    let spread = v0 * t_f;
    Ok(r0 * r0 / (r0 * r0 + spread * spread))
}

/// Quadrupole impulse equal to the 1D mean speed, v_rms·sqrt(2/π).
pub fn optimal_quadrupole_kick(v_rms: f64) -> Result<f64> {
    if !(v_rms > 0.0) {
        return domain("rms velocity must be positive");
    }
    Ok(v_rms * (2.0 / std::f64::consts::PI).sqrt())
}

/// Smallest mean-kinetic-energy ratio of a 1D point source under a
/// constant-magnitude kick, 1 − 2/π.
pub fn quadrupole_ke_ratio() -> f64 {
    1.0 - 2.0 / std::f64::consts::PI
}

/// (√N·τ₀, N·τ₀): time for an adiabatic expansion to cool by N, at the start
/// and at the end of the expansion.
pub fn adiabatic_time_comparison(cooling_factor: f64, secular_period: f64) -> Result<(f64, f64)> {
    if !(cooling_factor >= 1.0) || !(secular_period > 0.0) {
        return domain("cooling factor must be ≥ 1 and secular period positive");
    }
    Ok((cooling_factor.sqrt() * secular_period, cooling_factor * secular_period))
}

/// Shape of the pulsed field, with a common strength parameter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum KickShape {
    /// Strength is the on-axis velocity impulse Δv (m/s) for the reference atom.
    Quadrupole,
    /// Strength is κ = ω²·t_k (1/s) for the reference atom: Δv = −κ·x.
    Harmonic { axis: Axis },
}

impl KickShape {
    pub fn field(&self, strength: f64, duration: f64, species: &AtomSpecies, gravity: Gravity) -> Result<FieldConfiguration> {
        if !(strength >= 0.0) || !(duration > 0.0) {
            return domain("kick strength must be non-negative and duration positive");
        }
        Ok(match self {
            KickShape::Quadrupole => FieldConfiguration::quadrupole(
                gradient_for_impulse(strength, duration, REFERENCE_M_F, species),
                gravity,
            ),
            KickShape::Harmonic { axis } => FieldConfiguration::harmonic(
                curvature_for_frequency((strength / duration).sqrt(), REFERENCE_M_F, species),
                0.0,
                *axis,
                gravity,
            ),
        })
    }

    /// Axis along which the kick is judged: the coil axis for quadrupoles.
    pub fn measured_axis(&self) -> Axis {
        match self {
            KickShape::Quadrupole => Axis::Z,
            KickShape::Harmonic { axis } => *axis,
        }
    }
}

/// How the pulse is propagated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum KickMode {
    /// Leapfrog integration; `None` uses [`default_step`].
    Integrated { step: Option<f64> },
    /// Instantaneous impulse.
    Impulse,
}

#[derive(Debug, Clone, PartialEq)]
pub struct KickSchedule {
    pub expansion_time: f64,
    pub kick_duration: f64,
    pub field: FieldConfiguration,
    pub post_expansion_times: Vec<f64>,
    pub mode: KickMode,
}

fn check_times(expansion_time: f64, kick_duration: f64, post: &[f64]) -> Result<()> {
    if !(expansion_time >= 0.0) {
        return domain(format!("expansion time must be non-negative, got {expansion_time}"));
    }
    if !(kick_duration > 0.0) {
        return domain(format!("kick duration must be positive, got {kick_duration}"));
    }
    if post.iter().any(|t| !(*t >= 0.0)) || post.windows(2).any(|w| !(w[1] > w[0])) {
        return domain("post-kick delays must be non-negative and strictly increasing");
    }
    Ok(())
}

impl KickSchedule {
    pub fn new(
        expansion_time: f64,
        kick_duration: f64,
        field: FieldConfiguration,
        post_expansion_times: Vec<f64>,
        mode: KickMode,
    ) -> Result<Self> {
        check_times(expansion_time, kick_duration, &post_expansion_times)?;
        Ok(Self { expansion_time, kick_duration, field, post_expansion_times, mode })
    }
}

/// A schedule with the field left open, for scans.
#[derive(Debug, Clone, PartialEq)]
pub struct KickTemplate {
    pub expansion_time: f64,
    pub kick_duration: f64,
    pub shape: KickShape,
    pub post_expansion_times: Vec<f64>,
    pub mode: KickMode,
}

impl KickTemplate {
    pub fn new(
        expansion_time: f64,
        kick_duration: f64,
        shape: KickShape,
        post_expansion_times: Vec<f64>,
        mode: KickMode,
    ) -> Result<Self> {
        check_times(expansion_time, kick_duration, &post_expansion_times)?;
        Ok(Self { expansion_time, kick_duration, shape, post_expansion_times, mode })
    }

    pub fn schedule(&self, strength: f64, species: &AtomSpecies, gravity: Gravity) -> Result<KickSchedule> {
        KickSchedule::new(
            self.expansion_time,
            self.kick_duration,
            self.shape.field(strength, self.kick_duration, species, gravity)?,
            self.post_expansion_times.clone(),
            self.mode,
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentResult {
    /// Direct-variance temperatures of the sampled cloud.
    pub temperature_before: [f64; 3],
    /// Direct-variance temperatures right after the kick.
    pub temperature_after: [f64; 3],
    pub size_initial: [f64; 3],
    /// Sizes at the start of the kick.
    pub size_before: [f64; 3],
    /// Sizes at the end of the kick.
    pub size_after: [f64; 3],
    /// temperature_after / temperature_before.
    pub cooling_ratio: [f64; 3],
    /// Post-kick expansion curves per axis; absent with fewer than 3 delays
    /// or a degenerate axis.
    pub expansion_curves: [Option<ExpansionCurve>; 3],
    pub fits: [Option<TemperatureFit>; 3],
    pub atoms: usize,
    pub node_touched: usize,
}

impl ExperimentResult {
    pub fn ratio(&self, axis: Axis) -> f64 {
        self.cooling_ratio[axis.index()]
    }

    /// v_rms·size after the kick over the same product before expansion.
    pub fn liouville_product_ratio(&self, axis: Axis, species: &AtomSpecies) -> f64 {
        let i = axis.index();
        let v = |t: f64| species.thermal_velocity(t);
        (v(self.temperature_after[i]) * self.size_after[i]) / (v(self.temperature_before[i]) * self.size_initial[i])
    }
}

/// A cloud sampled and expanded up to the kick.
#[derive(Debug, Clone)]
pub struct PreparedCloud {
    pub ensemble: Ensemble,
    pub temperature_before: [f64; 3],
    pub size_initial: [f64; 3],
}

fn per_axis(f: impl Fn(Axis) -> Result<f64>) -> Result<[f64; 3]> {
    Ok([f(Axis::X)?, f(Axis::Y)?, f(Axis::Z)?])
}

pub fn prepare_cloud(
    spec: &ThermalSpec,
    expansion_time: f64,
    gravity: &Gravity,
    n: usize,
    seed: u64,
    species: &AtomSpecies,
) -> Result<PreparedCloud> {
    let mut ensemble = sample_ensemble(spec, n, species, seed)?;
    let temperature_before = per_axis(|a| ensemble.temperature(a))?;
    let size_initial = per_axis(|a| ensemble.cloud_size(a))?;
    ensemble.free_expansion(expansion_time, gravity)?;
    Ok(PreparedCloud { ensemble, temperature_before, size_initial })
}

/// Kick a prepared cloud and measure it. Returns the ensemble at the end of the kick.
pub fn kick_prepared(
    prepared: &PreparedCloud,
    field: &FieldConfiguration,
    kick_duration: f64,
    mode: KickMode,
    post_expansion_times: &[f64],
) -> Result<(ExperimentResult, Ensemble)> {
    check_times(0.0, kick_duration, post_expansion_times)?;
    let mut e = prepared.ensemble.clone();
    let size_before = per_axis(|a| e.cloud_size(a))?;
    match mode {
        KickMode::Integrated { step } => e.apply_kick(field, kick_duration, step.unwrap_or(default_step(kick_duration)))?,
        KickMode::Impulse => e.impulse_kick(field, kick_duration)?,
    }
    let temperature_after = per_axis(|a| e.temperature(a))?;
    let size_after = per_axis(|a| e.cloud_size(a))?;
    let tb = prepared.temperature_before;
    let cooling_ratio = [0, 1, 2].map(|i| temperature_after[i] / tb[i]);
    let mut expansion_curves: [Option<ExpansionCurve>; 3] = [None, None, None];
    let mut fits: [Option<TemperatureFit>; 3] = [None, None, None];
    if post_expansion_times.len() >= 3 {
        for axis in Axis::ALL {
            if let Ok(curve) = expansion_curve(&e, post_expansion_times, axis, &field.gravity) {
                fits[axis.index()] = fit_temperature(&curve, &e.species).ok();
                expansion_curves[axis.index()] = Some(curve);
            }
        }
    }
    let node_touched = e.atoms.iter().filter(|a| a.node_touched).count();
    let result = ExperimentResult {
        temperature_before: tb,
        temperature_after,
        size_initial: prepared.size_initial,
        size_before,
        size_after,
        cooling_ratio,
        expansion_curves,
        fits,
        atoms: e.len(),
        node_touched,
    };
    Ok((result, e))
}

/// Sample, expand for t_f, kick, then image the free expansion.
///
/// `gravity` overrides whatever the schedule's field carries.
pub fn run_kick_experiment(
    spec: &ThermalSpec,
    schedule: &KickSchedule,
    gravity: bool,
    n: usize,
    seed: u64,
    species: &AtomSpecies,
) -> Result<ExperimentResult> {
    let g = Gravity::from_flag(gravity);
    let mut field = schedule.field.clone();
    field.gravity = g;
    let prepared = prepare_cloud(spec, schedule.expansion_time, &g, n, seed, species)?;
    Ok(kick_prepared(&prepared, &field, schedule.kick_duration, schedule.mode, &schedule.post_expansion_times)?.0)
}

/// Seed for scan point `index`, mixed from the master seed (SplitMix64 finalizer).
pub fn point_seed(master: u64, index: u64) -> u64 {
    let mut z = master ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanPoint {
    /// Kick strength, kick duration or expansion ratio, depending on the scan.
    pub param: f64,
    /// Strength used at this point.
    pub strength: f64,
    pub result: ExperimentResult,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanCurve {
    pub points: Vec<ScanPoint>,
    pub axis: Axis,
}

pub const SCAN_HEADER: [&str; 8] = ["param", "T_before", "T_after", "ratio", "sigma_before", "sigma_after", "fit_T", "fit_err"];

impl ScanCurve {
    pub fn ratios(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.result.ratio(self.axis)).collect()
    }

    /// Point with the lowest cooling ratio.
    pub fn best(&self) -> &ScanPoint {
        self.points
            .iter()
            .min_by(|a, b| a.result.ratio(self.axis).total_cmp(&b.result.ratio(self.axis)))
            .expect("scan curves are never empty")
    }

    pub fn best_index(&self) -> usize {
        let best = self.best() as *const ScanPoint;
        self.points.iter().position(|p| std::ptr::eq(p, best)).unwrap()
    }

    pub fn write_csv<W: Write>(&self, out: &mut W) -> Result<()> {
        let i = self.axis.index();
        write_csv(
            out,
            &SCAN_HEADER,
            self.points.iter().map(|p| {
                let r = &p.result;
                let (fit_t, fit_err) = r.fits[i].map_or((f64::NAN, f64::NAN), |f| (f.temperature, f.temperature_err));
                [p.param, r.temperature_before[i], r.temperature_after[i], r.cooling_ratio[i], r.size_before[i], r.size_after[i], fit_t, fit_err]
            }),
        )
    }
}

/// One experiment per strength, each with its own derived seed.
pub fn scan_kick_strength(
    spec: &ThermalSpec,
    template: &KickTemplate,
    strengths: &[f64],
    gravity: bool,
    n: usize,
    seed: u64,
    species: &AtomSpecies,
) -> Result<ScanCurve> {
    if strengths.is_empty() {
        return domain("strength list is empty");
    }
    let g = Gravity::from_flag(gravity);
    let mut points = Vec::with_capacity(strengths.len());
    for (k, &s) in strengths.iter().enumerate() {
        let prepared = prepare_cloud(spec, template.expansion_time, &g, n, point_seed(seed, k as u64), species)?;
        let field = template.shape.field(s, template.kick_duration, species, g)?;
        let (result, _) = kick_prepared(&prepared, &field, template.kick_duration, template.mode, &template.post_expansion_times)?;
        points.push(ScanPoint { param: s, strength: s, result });
    }
    Ok(ScanCurve { points, axis: template.shape.measured_axis() })
}

/// Scan the kick duration at fixed field; `param` is t_k.
pub fn scan_kick_duration(
    spec: &ThermalSpec,
    template: &KickTemplate,
    field: &FieldConfiguration,
    durations: &[f64],
    n: usize,
    seed: u64,
    species: &AtomSpecies,
) -> Result<ScanCurve> {
    if durations.is_empty() {
        return domain("duration list is empty");
    }
    let mut points = Vec::with_capacity(durations.len());
    for (k, &t_k) in durations.iter().enumerate() {
        let prepared = prepare_cloud(spec, template.expansion_time, &field.gravity, n, point_seed(seed, k as u64), species)?;
        let (result, _) = kick_prepared(&prepared, field, t_k, template.mode, &template.post_expansion_times)?;
        points.push(ScanPoint { param: t_k, strength: t_k, result });
    }
    Ok(ScanCurve { points, axis: template.shape.measured_axis() })
}

/// Re-optimized kicks at each expansion time; `param` is the measured
/// expansion ratio r_f/r₀ along the kick axis.
///
/// Harmonic kicks use κ = Cov(x, v)/Var(x) of the expanded cloud, which
/// removes the linear correlation exactly. Quadrupole kicks take the best of
/// `quadrupole_strengths`.
pub fn scan_expansion_ratio(
    spec: &ThermalSpec,
    template: &KickTemplate,
    expansion_times: &[f64],
    quadrupole_strengths: &[f64],
    gravity: bool,
    n: usize,
    seed: u64,
    species: &AtomSpecies,
) -> Result<ScanCurve> {
    if expansion_times.is_empty() {
        return domain("expansion-time list is empty");
    }
    let g = Gravity::from_flag(gravity);
    let axis = template.shape.measured_axis();
    let i = axis.index();
    let mut points = Vec::with_capacity(expansion_times.len());
    for (k, &t_f) in expansion_times.iter().enumerate() {
        let prepared = prepare_cloud(spec, t_f, &g, n, point_seed(seed, k as u64), species)?;
        let expansion = prepared.ensemble.cloud_size(axis)? / prepared.size_initial[i];
        let (strength, result) = match template.shape {
            KickShape::Harmonic { .. } => {
                let kappa = prepared.ensemble.optimal_linear_kick(axis)?.max(0.0);
                let field = template.shape.field(kappa, template.kick_duration, species, g)?;
                let (r, _) = kick_prepared(&prepared, &field, template.kick_duration, template.mode, &template.post_expansion_times)?;
                (kappa, r)
            }
            KickShape::Quadrupole => {
                if quadrupole_strengths.is_empty() {
                    return domain("quadrupole re-optimization needs a strength grid");
                }
                let mut best: Option<(f64, ExperimentResult)> = None;
                for &s in quadrupole_strengths {
                    let field = template.shape.field(s, template.kick_duration, species, g)?;
                    let (r, _) = kick_prepared(&prepared, &field, template.kick_duration, template.mode, &template.post_expansion_times)?;
                    if best.as_ref().map_or(true, |(_, b)| r.cooling_ratio[i] < b.cooling_ratio[i]) {
                        best = Some((s, r));
                    }
                }
                best.unwrap()
            }
        };
        points.push(ScanPoint { param: expansion, strength, result });
    }
    Ok(ScanCurve { points, axis })
}

/// Gradient that holds sublevel `m_f` against gravity, or `None` for
/// sublevels that are not pulled toward weak field.
pub fn spin_filter_threshold(m_f: i8, species: &AtomSpecies) -> Option<f64> {
    let moment = species.moment(m_f);
    (moment > 0.0).then(|| species.mass() * CONSTANTS.gravity_g / moment)
}

/// Keep the atoms a quadrupole trap of the given gradient holds against gravity.
pub fn magnetic_trap_spin_filter(e: &Ensemble, gradient: f64) -> Result<Ensemble> {
    if !(gradient > 0.0) {
        return domain(format!("trap gradient must be positive, got {gradient}"));
    }
    let weight = e.species.mass() * CONSTANTS.gravity_g;
    let mut out = e.clone();
    let species = e.species;
    out.retain(|a| species.moment(a.m_f) * gradient > weight);
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpinClassResult {
    pub m_f: i8,
    pub atoms: usize,
    pub temperature_before: [f64; 3],
    pub temperature_after: [f64; 3],
}

#[derive(Debug, Clone, PartialEq)]
pub struct MultiSpinResult {
    pub per_spin: Vec<SpinClassResult>,
    /// Bin centres and counts of the summed profile along the measured axis.
    pub profile_positions: Vec<f64>,
    pub profile_counts: Vec<f64>,
    /// Delay after the kick at which the profile was taken.
    pub profile_delay: f64,
    pub bimodal: BimodalFit,
}

/// Number of profile bins in [`molasses_multispin_experiment`].
pub const PROFILE_BINS: usize = 96;

/// Kick a cloud spread over several sublevels. Each atom feels its own
/// potential; the summed density along `axis` is taken at the last
/// post-kick delay (or at the end of the kick) and split into two Gaussians.
pub fn molasses_multispin_experiment(
    spec: &ThermalSpec,
    schedule: &KickSchedule,
    axis: Axis,
    n: usize,
    seed: u64,
    species: &AtomSpecies,
) -> Result<MultiSpinResult> {
    if spec.spin_populations().iter().filter(|(_, w)| *w > 0.0).count() < 2 {
        return domain("multi-spin experiment needs at least two populated sublevels");
    }
    let gravity = schedule.field.gravity;
    let initial = sample_ensemble(spec, n, species, seed)?;
    let prepared = {
        let mut e = initial.clone();
        let temperature_before = per_axis(|a| e.temperature(a))?;
        let size_initial = per_axis(|a| e.cloud_size(a))?;
        e.free_expansion(schedule.expansion_time, &gravity)?;
        PreparedCloud { ensemble: e, temperature_before, size_initial }
    };
    let (_, mut kicked) = kick_prepared(&prepared, &schedule.field, schedule.kick_duration, schedule.mode, &[])?;

    let mut per_spin = Vec::new();
    for m in initial.spins_present() {
        let before = initial.spin_class(m);
        let after = kicked.spin_class(m);
        let temps = |e: &Ensemble| per_axis(|a| if e.len() >= 2 { e.temperature(a) } else { Ok(f64::NAN) });
        per_spin.push(SpinClassResult {
            m_f: m,
            atoms: after.len(),
            temperature_before: temps(&before)?,
            temperature_after: temps(&after)?,
        });
    }

    let delay = schedule.post_expansion_times.last().copied().unwrap_or(0.0);
    kicked.free_expansion(delay, &gravity)?;
    let centre = kicked.mean_position(axis);
    let half = 4.0 * kicked.cloud_size(axis)?;
    let other = if axis == Axis::X { Axis::Y } else { Axis::X };
    let window = ImageWindow {
        horizontal: (centre - half, centre + half),
        vertical: ImageWindow::covering(&kicked, (other, other), 1e-6).vertical,
    };
    let image = density_image(&kicked, (axis, other), (PROFILE_BINS, 2), window, 0.0)?;
    let (xs, counts) = image.marginal(true);
    let guess = BimodalGuess::from_profile(&xs, &counts);
    let bimodal = fit_bimodal(&xs, &counts, &guess)?;
    Ok(MultiSpinResult { per_spin, profile_positions: xs, profile_counts: counts, profile_delay: delay, bimodal })
}
