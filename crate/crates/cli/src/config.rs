//! Flat `key = value` run configuration.
//!
//! Every physical key carries its unit as a suffix (`t_f_ms`, `gradient_G_per_cm`).
//! Values are converted to SI on parsing; [`RunConfig::serialize`] writes
//! them back with SI suffixes, so a parse/serialize/parse cycle is exact.

use std::collections::BTreeMap;
use std::fmt;

use deltakick::constants::units::kelvin_to_joule;
use deltakick::export::fmt_f64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Kind {
    Kick,
    ScanStrength,
    ScanExpansion,
    Multispin,
    CoilField,
    QmSweep,
    QmDepthScan,
    QmDecay,
}

impl Kind {
    pub const ALL: [Kind; 8] = [
        Kind::Kick,
        Kind::ScanStrength,
        Kind::ScanExpansion,
        Kind::Multispin,
        Kind::CoilField,
        Kind::QmSweep,
        Kind::QmDepthScan,
        Kind::QmDecay,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Kind::Kick => "kick",
            Kind::ScanStrength => "scan-strength",
            Kind::ScanExpansion => "scan-expansion",
            Kind::Multispin => "multispin",
            Kind::CoilField => "coil-field",
            Kind::QmSweep => "qm-sweep",
            Kind::QmDepthScan => "qm-depth-scan",
            Kind::QmDecay => "qm-decay",
        }
    }

    pub fn from_name(s: &str) -> Option<Kind> {
        Kind::ALL.into_iter().find(|k| k.name() == s)
    }

    pub fn keys(self) -> &'static [Key] {
        match self {
            Kind::Kick => KICK,
            Kind::ScanStrength => SCAN_STRENGTH,
            Kind::ScanExpansion => SCAN_EXPANSION,
            Kind::Multispin => MULTISPIN,
            Kind::CoilField => COIL_FIELD,
            Kind::QmSweep => QM_SWEEP,
            Kind::QmDepthScan => QM_DEPTH_SCAN,
            Kind::QmDecay => QM_DECAY,
        }
    }

    /// Defaults in config syntax; keys missing here have no default.
    pub fn defaults(self) -> &'static str {
        match self {
            Kind::Kick => KICK_DEFAULTS,
            Kind::ScanStrength => SCAN_STRENGTH_DEFAULTS,
            Kind::ScanExpansion => SCAN_EXPANSION_DEFAULTS,
            Kind::Multispin => MULTISPIN_DEFAULTS,
            Kind::CoilField => COIL_FIELD_DEFAULTS,
            Kind::QmSweep => QM_SWEEP_DEFAULTS,
            Kind::QmDepthScan => QM_DEPTH_SCAN_DEFAULTS,
            Kind::QmDecay => QM_DECAY_DEFAULTS,
        }
    }
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Physical dimension of a key, which fixes the accepted unit suffixes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dim {
    /// Plain number, no suffix.
    Number,
    /// Non-negative integer, no suffix.
    Count,
    /// Signed integer, no suffix.
    Integer,
    /// `true` / `false`.
    Flag,
    /// One of a fixed set of words.
    Choice(&'static [&'static str]),
    Time,
    Length,
    Temperature,
    /// Energies may be given as temperatures (k_B·T).
    Energy,
    /// Potential slope in J/m, or as temperature per length.
    Slope,
    Velocity,
    Gradient,
    Curvature,
    AngularFrequency,
    Rate,
    Current,
}

impl Dim {
    /// (suffix, factor to SI); the first entry is the SI suffix used when serializing.
    fn units(self) -> &'static [(&'static str, Conversion)] {
        use Conversion::Scale;
        match self {
            Dim::Time => &[("s", Scale(1.0)), ("ms", Scale(1e-3)), ("us", Scale(1e-6))],
            Dim::Length => &[("m", Scale(1.0)), ("cm", Scale(1e-2)), ("mm", Scale(1e-3)), ("um", Scale(1e-6))],
            Dim::Temperature => &[("K", Scale(1.0)), ("mK", Scale(1e-3)), ("uK", Scale(1e-6)), ("nK", Scale(1e-9))],
            Dim::Energy => &[
                ("J", Scale(1.0)),
                ("K", Conversion::Boltzmann(1.0)),
                ("uK", Conversion::Boltzmann(1e-6)),
                ("nK", Conversion::Boltzmann(1e-9)),
            ],
            Dim::Slope => &[
                ("J_per_m", Scale(1.0)),
                ("K_per_m", Conversion::Boltzmann(1.0)),
                ("uK_per_cm", Conversion::Boltzmann(1e-4)),
            ],
            Dim::Velocity => &[("m_per_s", Scale(1.0)), ("cm_per_s", Scale(1e-2)), ("mm_per_s", Scale(1e-3))],
            Dim::Gradient => &[("T_per_m", Scale(1.0)), ("G_per_cm", Scale(1e-2))],
            Dim::Curvature => &[("T_per_m2", Scale(1.0)), ("G_per_cm2", Scale(1.0))],
            Dim::AngularFrequency => &[("rad_per_s", Scale(1.0)), ("Hz", Scale(std::f64::consts::TAU))],
            Dim::Rate => &[("per_s", Scale(1.0)), ("per_ms", Scale(1e3))],
            Dim::Current => &[("A", Scale(1.0))],
            _ => &[],
        }
    }

    fn describe(self) -> String {
        let units: Vec<&str> = self.units().iter().map(|u| u.0).collect();
        match self {
            Dim::Number => "a number".into(),
            Dim::Count => "a non-negative integer below 2^53".into(),
            Dim::Integer => "an integer".into(),
            Dim::Flag => "true or false".into(),
            Dim::Choice(words) => format!("one of {}", words.join(", ")),
            _ => format!("a unit suffix among {}", units.join(", ")),
        }
    }

    fn has_units(self) -> bool {
        !self.units().is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Conversion {
    Scale(f64),
    /// k_B times the scale, for temperature-equivalent energies.
    Boltzmann(f64),
}

impl Conversion {
    fn apply(self, v: f64) -> f64 {
        match self {
            Conversion::Scale(s) => v * s,
            Conversion::Boltzmann(s) => kelvin_to_joule(v * s),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Bound {
    Any,
    Positive,
    NonNegative,
    /// Closed interval.
    Within(i64, i64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Key {
    pub name: &'static str,
    pub dim: Dim,
    pub list: bool,
    pub bound: Bound,
}

const fn key(name: &'static str, dim: Dim, bound: Bound) -> Key {
    Key { name, dim, list: false, bound }
}

const fn list(name: &'static str, dim: Dim, bound: Bound) -> Key {
    Key { name, dim, list: true, bound }
}

const SHAPES: &[&str] = &["quadrupole", "harmonic"];
const AXES: &[&str] = &["x", "y", "z"];
const MODES: &[&str] = &["integrated", "impulse"];
const POLARITIES: &[&str] = &["opposed", "aligned"];

use Bound::{Any, NonNegative, Positive};

const KICK: &[Key] = &[
    key("seed", Dim::Count, Any),
    key("temperature", Dim::Temperature, NonNegative),
    key("radius", Dim::Length, NonNegative),
    key("m_f", Dim::Integer, Bound::Within(-3, 3)),
    key("n", Dim::Count, Positive),
    key("gravity", Dim::Flag, Any),
    key("shape", Dim::Choice(SHAPES), Any),
    key("axis", Dim::Choice(AXES), Any),
    key("t_f", Dim::Time, NonNegative),
    key("t_k", Dim::Time, Positive),
    key("gradient", Dim::Gradient, NonNegative),
    key("omega", Dim::AngularFrequency, NonNegative),
    list("delays", Dim::Time, NonNegative),
    key("mode", Dim::Choice(MODES), Any),
    key("step", Dim::Time, Positive),
    key("write_ensemble", Dim::Flag, Any),
];

const SCAN_STRENGTH: &[Key] = &[
    key("seed", Dim::Count, Any),
    key("temperature", Dim::Temperature, NonNegative),
    key("radius", Dim::Length, NonNegative),
    key("m_f", Dim::Integer, Bound::Within(-3, 3)),
    key("n", Dim::Count, Positive),
    key("gravity", Dim::Flag, Any),
    key("shape", Dim::Choice(SHAPES), Any),
    key("axis", Dim::Choice(AXES), Any),
    key("t_f", Dim::Time, NonNegative),
    key("t_k", Dim::Time, Positive),
    list("delta_v", Dim::Velocity, NonNegative),
    list("kappa", Dim::Rate, NonNegative),
    list("delays", Dim::Time, NonNegative),
    key("mode", Dim::Choice(MODES), Any),
    key("step", Dim::Time, Positive),
];

const SCAN_EXPANSION: &[Key] = &[
    key("seed", Dim::Count, Any),
    key("temperature", Dim::Temperature, NonNegative),
    key("radius", Dim::Length, NonNegative),
    key("m_f", Dim::Integer, Bound::Within(-3, 3)),
    key("n", Dim::Count, Positive),
    key("gravity", Dim::Flag, Any),
    key("shape", Dim::Choice(SHAPES), Any),
    key("axis", Dim::Choice(AXES), Any),
    list("t_f", Dim::Time, NonNegative),
    key("t_k", Dim::Time, Positive),
    list("delta_v", Dim::Velocity, NonNegative),
    list("delays", Dim::Time, NonNegative),
    key("mode", Dim::Choice(MODES), Any),
    key("step", Dim::Time, Positive),
];

const MULTISPIN: &[Key] = &[
    key("seed", Dim::Count, Any),
    key("temperature", Dim::Temperature, NonNegative),
    key("radius", Dim::Length, NonNegative),
    list("populations", Dim::Number, NonNegative),
    key("correlation", Dim::Number, Bound::Within(-1, 1)),
    key("n", Dim::Count, Positive),
    key("gravity", Dim::Flag, Any),
    key("axis", Dim::Choice(AXES), Any),
    key("t_f", Dim::Time, NonNegative),
    key("t_k", Dim::Time, Positive),
    key("gradient", Dim::Gradient, NonNegative),
    list("delays", Dim::Time, NonNegative),
    key("mode", Dim::Choice(MODES), Any),
    key("step", Dim::Time, Positive),
];

const COIL_FIELD: &[Key] = &[
    key("seed", Dim::Count, Any),
    key("radius", Dim::Length, Positive),
    key("half_separation", Dim::Length, Positive),
    key("turns", Dim::Count, Positive),
    key("current", Dim::Current, Any),
    key("polarity", Dim::Choice(POLARITIES), Any),
    key("z_min", Dim::Length, Any),
    key("z_max", Dim::Length, Any),
    key("points", Dim::Count, Positive),
];

const QM_SWEEP: &[Key] = &[
    key("seed", Dim::Count, Any),
    key("temperature", Dim::Temperature, Positive),
    key("slope", Dim::Slope, Positive),
    key("barrier", Dim::Energy, NonNegative),
    key("waist", Dim::Length, Positive),
    key("start", Dim::Length, Any),
    key("stop", Dim::Length, Any),
    key("speed", Dim::Velocity, Positive),
    key("half_width", Dim::Length, Positive),
    key("points", Dim::Count, Positive),
    key("dt", Dim::Time, Positive),
    key("record_interval", Dim::Count, Positive),
    key("neglected_weight", Dim::Number, Positive),
    key("capture_floor", Dim::Number, NonNegative),
    key("empty_run", Dim::Count, Positive),
    key("barrier_refresh", Dim::Count, Positive),
    key("absorber_fraction", Dim::Number, NonNegative),
    key("absorber_power", Dim::Number, Positive),
];

const QM_DEPTH_SCAN: &[Key] = &[
    key("seed", Dim::Count, Any),
    key("temperature", Dim::Temperature, Positive),
    key("slope", Dim::Slope, Positive),
    list("depths", Dim::Energy, NonNegative),
    key("waist", Dim::Length, Positive),
    key("start", Dim::Length, Any),
    key("stop", Dim::Length, Any),
    key("speed", Dim::Velocity, Positive),
    key("half_width", Dim::Length, Positive),
    key("points", Dim::Count, Positive),
    key("dt", Dim::Time, Positive),
    key("record_interval", Dim::Count, Positive),
    key("neglected_weight", Dim::Number, Positive),
    key("capture_floor", Dim::Number, NonNegative),
    key("empty_run", Dim::Count, Positive),
    key("barrier_refresh", Dim::Count, Positive),
    key("absorber_fraction", Dim::Number, NonNegative),
    key("absorber_power", Dim::Number, Positive),
];

const QM_DECAY: &[Key] = &[
    key("seed", Dim::Count, Any),
    key("slope", Dim::Slope, Positive),
    key("barrier", Dim::Energy, NonNegative),
    key("waist", Dim::Length, Positive),
    key("centre", Dim::Length, Any),
    key("x_min", Dim::Length, Any),
    key("x_max", Dim::Length, Any),
    key("points", Dim::Count, Positive),
    key("dt", Dim::Time, Positive),
    key("horizon", Dim::Time, Positive),
    key("record_interval", Dim::Count, Positive),
    key("transient_fraction", Dim::Number, NonNegative),
    key("absorber_fraction", Dim::Number, NonNegative),
    key("absorber_power", Dim::Number, Positive),
];

const THERMAL_DEFAULTS: &str = "
seed = 0
temperature_uK = 7.5
radius_mm = 0.25
n = 100000
gravity = true
mode = integrated
delays_ms = 0, 2, 4, 6, 8, 10, 12, 14, 16, 18, 20
";

const KICK_DEFAULTS: &str = "
m_f = 3
shape = quadrupole
axis = z
t_f_ms = 11
t_k_ms = 1
gradient_G_per_cm = 32.7
omega_rad_per_s = 62.8
write_ensemble = false
";

const SCAN_STRENGTH_DEFAULTS: &str = "
m_f = 3
shape = quadrupole
axis = z
t_f_ms = 11
t_k_ms = 1
";

const SCAN_EXPANSION_DEFAULTS: &str = "
m_f = 3
shape = harmonic
axis = x
t_f_ms = 5, 10, 20, 40
t_k_ms = 1
";

const MULTISPIN_DEFAULTS: &str = "
temperature_uK = 6
populations = 1, 1, 1, 1, 1, 1, 1
correlation = 0.5
axis = z
t_f_ms = 11
t_k_ms = 1
gradient_G_per_cm = 32.7
";

const COIL_FIELD_DEFAULTS: &str = "
seed = 0
radius_cm = 4
half_separation_cm = 4
turns = 200
current_A = 18
polarity = opposed
z_min_cm = -4
z_max_cm = 4
points = 161
";

const QM_COMMON_DEFAULTS: &str = "
seed = 0
temperature_uK = 1.3
slope_uK_per_cm = 300
waist_um = 20
start_um = -250
stop_um = 250
speed_mm_per_s = 0.5
half_width_um = 400
points = 8192
dt_us = 0.5
record_interval = 2000
neglected_weight = 0.001
capture_floor = 0.001
empty_run = 3
barrier_refresh = 1
absorber_fraction = 0.1
absorber_power = 0.125
";

const QM_SWEEP_DEFAULTS: &str = "
barrier_nK = 600
";

const QM_DEPTH_SCAN_DEFAULTS: &str = "";

const QM_DECAY_DEFAULTS: &str = "
seed = 0
slope_uK_per_cm = 300
barrier_nK = 267
waist_um = 10
centre_um = 30
x_min_um = -30
x_max_um = 100
points = 2048
dt_us = 1
horizon_s = 0.2
record_interval = 1000
transient_fraction = 0.1
absorber_fraction = 0.1
absorber_power = 0.125
";

fn default_layers(kind: Kind) -> Vec<&'static str> {
    match kind {
        Kind::Kick | Kind::ScanStrength | Kind::ScanExpansion | Kind::Multispin => vec![THERMAL_DEFAULTS, kind.defaults()],
        Kind::QmSweep | Kind::QmDepthScan => vec![QM_COMMON_DEFAULTS, kind.defaults()],
        Kind::CoilField | Kind::QmDecay => vec![kind.defaults()],
    }
}

/// Full default configuration text for a kind.
pub fn default_text(kind: Kind) -> String {
    let mut lines: Vec<&str> = Vec::new();
    for line in default_layers(kind).into_iter().flat_map(str::lines).filter(|l| !l.trim().is_empty()) {
        let key = line.split('=').next().unwrap_or("").trim();
        lines.retain(|l| l.split('=').next().unwrap_or("").trim() != key);
        lines.push(line);
    }
    format!("experiment = {}\n{}\n", kind.name(), lines.join("\n"))
}

/// Integers above this lose precision as `f64`.
pub const MAX_EXACT_INTEGER: f64 = 9_007_199_254_740_992.0;

#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Number(f64),
    List(Vec<f64>),
    Word(String),
}

/// One problem found while parsing. `line` is 1-based; `None` for
/// whole-config problems such as a missing key.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError {
    pub line: Option<usize>,
    pub field: String,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(l) => write!(f, "line {l}: {}: {}", self.field, self.message),
            None => write!(f, "{}: {}", self.field, self.message),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub kind: Kind,
    /// SI values keyed by base name.
    pub values: BTreeMap<&'static str, Value>,
}

struct Entry {
    line: usize,
    key: String,
    raw: String,
}

fn split_lines(text: &str, errors: &mut Vec<ConfigError>) -> Vec<Entry> {
    let mut out = Vec::new();
    for (i, raw_line) in text.lines().enumerate() {
        let line = raw_line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        match line.split_once('=') {
            Some((k, v)) if !k.trim().is_empty() => out.push(Entry { line: i + 1, key: k.trim().to_string(), raw: v.trim().to_string() }),
            _ => errors.push(ConfigError { line: Some(i + 1), field: line.to_string(), message: "expected `key = value`".into() }),
        }
    }
    out
}

fn all_units() -> impl Iterator<Item = &'static str> + Clone {
    [
        Dim::Time,
        Dim::Length,
        Dim::Temperature,
        Dim::Energy,
        Dim::Slope,
        Dim::Velocity,
        Dim::Gradient,
        Dim::Curvature,
        Dim::AngularFrequency,
        Dim::Rate,
        Dim::Current,
    ]
    .into_iter()
    .flat_map(|d| d.units().iter().map(|u| u.0))
}

enum Resolved {
    Found(&'static Key, Option<Conversion>),
    WrongUnit(&'static Key, String),
    Unknown,
}

fn resolve(kind: Kind, name: &str) -> Resolved {
    let keys = kind.keys();
    for k in keys {
        if name == k.name && !k.dim.has_units() {
            return Resolved::Found(k, None);
        }
        if let Some(rest) = name.strip_prefix(k.name).and_then(|r| r.strip_prefix('_')) {
            if let Some((_, c)) = k.dim.units().iter().find(|u| u.0 == rest) {
                return Resolved::Found(k, Some(*c));
            }
        }
    }
    for k in keys {
        if name == k.name {
            return Resolved::WrongUnit(k, "missing unit suffix".into());
        }
        if let Some(rest) = name.strip_prefix(k.name).and_then(|r| r.strip_prefix('_')) {
            let why = if all_units().any(|u| u == rest) { "does not fit" } else { "is not a known unit" };
            return Resolved::WrongUnit(k, format!("`{rest}` {why}"));
        }
    }
    Resolved::Unknown
}

/// `a, b, c` or `linspace(a, b, n)`.
fn parse_numbers(raw: &str) -> Result<Vec<f64>, String> {
    let parse = |s: &str| s.trim().parse::<f64>().map_err(|_| format!("`{}` is not a number", s.trim()));
    if let Some(inner) = raw.strip_prefix("linspace(").and_then(|r| r.strip_suffix(')')) {
        let parts: Vec<&str> = inner.split(',').collect();
        if parts.len() != 3 {
            return Err("linspace takes (start, stop, count)".into());
        }
        let (a, b) = (parse(parts[0])?, parse(parts[1])?);
        let n: usize = parts[2].trim().parse().map_err(|_| "linspace count must be an integer".to_string())?;
        if n < 2 {
            return Err("linspace count must be at least 2".into());
        }
        return Ok((0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect());
    }
    raw.split(',').map(parse).collect()
}

fn check_bound(bound: Bound, v: f64) -> Result<(), String> {
    if !v.is_finite() {
        return Err("must be finite".into());
    }
    match bound {
        Bound::Any => Ok(()),
        Bound::Positive if v > 0.0 => Ok(()),
        Bound::Positive => Err(format!("must be positive, got {}", fmt_f64(v))),
        Bound::NonNegative if v >= 0.0 => Ok(()),
        Bound::NonNegative => Err(format!("must be non-negative, got {}", fmt_f64(v))),
        Bound::Within(lo, hi) if v >= lo as f64 && v <= hi as f64 => Ok(()),
        Bound::Within(lo, hi) => Err(format!("must lie in [{lo}, {hi}], got {}", fmt_f64(v))),
    }
}

fn parse_value(k: &Key, conv: Option<Conversion>, raw: &str) -> Result<Value, String> {
    match k.dim {
        Dim::Flag => match raw {
            "true" | "false" => Ok(Value::Word(raw.into())),
            _ => Err(format!("expected {}", k.dim.describe())),
        },
        Dim::Choice(words) => {
            if words.contains(&raw) {
                Ok(Value::Word(raw.into()))
            } else {
                Err(format!("expected {}, got `{raw}`", k.dim.describe()))
            }
        }
        _ => {
            let nums = parse_numbers(raw)?;
            if nums.is_empty() || (!k.list && nums.len() != 1) {
                return Err(if k.list { "list is empty".into() } else { "expected a single value".into() });
            }
            if matches!(k.dim, Dim::Count | Dim::Integer) && nums.iter().any(|v| v.fract() != 0.0) {
                return Err(format!("expected {}", k.dim.describe()));
            }
            if k.dim == Dim::Count && nums.iter().any(|v| *v < 0.0 || *v > MAX_EXACT_INTEGER) {
                return Err(format!("expected {}", k.dim.describe()));
            }
            // bounds are checked on the value as written; unit factors are positive
            for v in &nums {
                check_bound(k.bound, *v)?;
            }
            let si: Vec<f64> = nums.into_iter().map(|v| conv.map_or(v, |c| c.apply(v))).collect();
            Ok(if k.list { Value::List(si) } else { Value::Number(si[0]) })
        }
    }
}

fn ingest(
    kind: Kind,
    text: &str,
    values: &mut BTreeMap<&'static str, Value>,
    errors: &mut Vec<ConfigError>,
    seen: &mut BTreeMap<&'static str, usize>,
) {
    for e in split_lines(text, errors) {
        if e.key == "experiment" {
            match Kind::from_name(&e.raw) {
                Some(k) if k == kind => {}
                Some(k) => errors.push(ConfigError {
                    line: Some(e.line),
                    field: e.key,
                    message: format!("config is for `{k}` but `{kind}` was requested"),
                }),
                None => errors.push(ConfigError { line: Some(e.line), field: e.key, message: format!("unknown experiment `{}`", e.raw) }),
            }
            continue;
        }
        match resolve(kind, &e.key) {
            Resolved::Found(k, conv) => {
                if let Some(prev) = seen.insert(k.name, e.line) {
                    errors.push(ConfigError {
                        line: Some(e.line),
                        field: e.key.clone(),
                        message: format!("`{}` already set on line {prev}", k.name),
                    });
                    continue;
                }
                match parse_value(k, conv, &e.raw) {
                    Ok(v) => {
                        values.insert(k.name, v);
                    }
                    Err(m) => errors.push(ConfigError { line: Some(e.line), field: e.key, message: m }),
                }
            }
            Resolved::WrongUnit(k, why) => {
                let units: Vec<&str> = k.dim.units().iter().map(|u| u.0).collect();
                let expect = if units.is_empty() { "no unit suffix".to_string() } else { format!("one of {}", units.join(", ")) };
                errors.push(ConfigError { line: Some(e.line), field: e.key, message: format!("unit mismatch: {why}; `{}` takes {expect}", k.name) })
            }
            Resolved::Unknown => {
                errors.push(ConfigError { line: Some(e.line), field: e.key, message: format!("unknown key for `{kind}`") })
            }
        }
    }
}

fn word_of<'a>(values: &'a BTreeMap<&'static str, Value>, k: &str) -> Option<&'a str> {
    match values.get(k) {
        Some(Value::Word(w)) => Some(w),
        _ => None,
    }
}

fn require(values: &BTreeMap<&'static str, Value>, name: &str, why: &str, errors: &mut Vec<ConfigError>) {
    if !values.contains_key(name) {
        errors.push(ConfigError { line: None, field: name.into(), message: format!("missing required key ({why})") });
    }
}

fn check_whole(kind: Kind, values: &BTreeMap<&'static str, Value>, errors: &mut Vec<ConfigError>) {
    let list = |k: &str| match values.get(k) {
        Some(Value::List(v)) => Some(v.clone()),
        _ => None,
    };
    let increasing = |k: &str, errors: &mut Vec<ConfigError>| {
        if let Some(v) = list(k) {
            if v.windows(2).any(|w| !(w[1] > w[0])) {
                errors.push(ConfigError { line: None, field: k.into(), message: "values must be strictly increasing".into() });
            }
        }
    };
    match kind {
        Kind::ScanStrength => {
            if word_of(values, "shape") == Some("harmonic") {
                require(values, "kappa", "harmonic strength scan", errors);
            } else {
                require(values, "delta_v", "quadrupole strength scan", errors);
            }
        }
        Kind::ScanExpansion => {
            if word_of(values, "shape") == Some("quadrupole") {
                require(values, "delta_v", "quadrupole kicks are re-optimized over a Δv grid", errors);
            }
            increasing("t_f", errors);
        }
        Kind::QmDepthScan => {
            require(values, "depths", "depth scan", errors);
            increasing("depths", errors);
        }
        Kind::CoilField => {
            if let (Some(Value::Number(a)), Some(Value::Number(b))) = (values.get("z_min"), values.get("z_max")) {
                if !(b > a) {
                    errors.push(ConfigError { line: None, field: "z_max".into(), message: "must exceed z_min".into() });
                }
            }
        }
        Kind::QmDecay => {
            if let (Some(Value::Number(a)), Some(Value::Number(b))) = (values.get("x_min"), values.get("x_max")) {
                if !(b > a) {
                    errors.push(ConfigError { line: None, field: "x_max".into(), message: "must exceed x_min".into() });
                }
            }
        }
        _ => {}
    }
    increasing("delays", errors);
    for k in kind.keys() {
        if !k.list && !values.contains_key(k.name) && k.name != "step" {
            require(values, k.name, "no default", errors);
        }
    }
}

impl RunConfig {
    /// Parse `text` on top of the defaults for `kind`. Collects every problem.
    pub fn parse(kind: Kind, text: &str) -> Result<Self, Vec<ConfigError>> {
        let mut values = BTreeMap::new();
        let mut errors = Vec::new();
        for layer in default_layers(kind) {
            ingest(kind, layer, &mut values, &mut errors, &mut BTreeMap::new());
        }
        debug_assert!(errors.is_empty(), "defaults for {kind} do not parse: {errors:?}");
        let mut user = BTreeMap::new();
        let mut seen = BTreeMap::new();
        ingest(kind, text, &mut user, &mut errors, &mut seen);
        values.extend(user);
        check_whole(kind, &values, &mut errors);
        if errors.is_empty() {
            Ok(Self { kind, values })
        } else {
            Err(errors)
        }
    }

    /// Canonical text: experiment line, then every set key in declaration
    /// order with SI suffixes.
    pub fn serialize(&self) -> String {
        let mut s = format!("experiment = {}\n", self.kind.name());
        for k in self.kind.keys() {
            let Some(v) = self.values.get(k.name) else { continue };
            let name = match k.dim.units().first() {
                Some((unit, _)) => format!("{}_{unit}", k.name),
                None => k.name.to_string(),
            };
            let text = match v {
                Value::Number(x) => fmt_f64(*x),
                Value::List(xs) => xs.iter().map(|x| fmt_f64(*x)).collect::<Vec<_>>().join(", "),
                Value::Word(w) => w.clone(),
            };
            s.push_str(&format!("{name} = {text}\n"));
        }
        s
    }

    pub fn number(&self, k: &str) -> f64 {
        match self.values.get(k) {
            Some(Value::Number(x)) => *x,
            other => panic!("config key `{k}` is not a number: {other:?}"),
        }
    }

    pub fn optional(&self, k: &str) -> Option<f64> {
        match self.values.get(k) {
            Some(Value::Number(x)) => Some(*x),
            _ => None,
        }
    }

    pub fn count(&self, k: &str) -> usize {
        self.number(k) as usize
    }

    pub fn list(&self, k: &str) -> &[f64] {
        match self.values.get(k) {
            Some(Value::List(x)) => x,
            other => panic!("config key `{k}` is not a list: {other:?}"),
        }
    }

    pub fn word(&self, k: &str) -> &str {
        word_of(&self.values, k).unwrap_or_else(|| panic!("config key `{k}` is not a word"))
    }

    pub fn flag(&self, k: &str) -> bool {
        self.word(k) == "true"
    }

    pub fn seed(&self) -> u64 {
        self.number("seed") as u64
    }

    pub fn set_seed(&mut self, seed: u64) {
        self.values.insert("seed", Value::Number(seed as f64));
    }
}
