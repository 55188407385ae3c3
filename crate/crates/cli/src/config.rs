//! Run configuration: a sectioned TOML file read strictly.
//!
//! Energies are given in units of the vibrational quantum `ω` (set by
//! `model.omega`) and times in units of the vibrational period `2π/ω`. Both
//! are converted to internal units here and nowhere else.

use std::f64::consts::TAU;
use std::fmt;
use std::ops::Range;
use std::path::{Path, PathBuf};

use ppwpi_core::model::Polarization;
use ppwpi_core::signal::{default_control, SweepMode};
use ppwpi_core::{ModelParams, PulseParams, VibronicBasis};
use serde::Deserialize;
use toml::Spanned;

/// A configuration problem, located by key path and line.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub key: String,
    pub line: Option<usize>,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(line) => write!(f, "{} (line {line}): {}", self.key, self.message),
            None => write!(f, "{}: {}", self.key, self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFile {
    model: Option<Spanned<RawModel>>,
    pump: Option<Spanned<RawPulse>>,
    probe: Option<Spanned<RawPulse>>,
    control: Option<Spanned<RawPulse>>,
    delays: Option<Spanned<RawDelays>>,
    sweep: Option<Spanned<RawSweep>>,
    run: Option<Spanned<RawRun>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawModel {
    omega: Option<Spanned<f64>>,
    delta_sq: Option<Spanned<f64>>,
    eps1: Option<Spanned<f64>>,
    eps1p: Option<Spanned<f64>>,
    eps2: Option<Spanned<f64>>,
    #[serde(rename = "J")]
    j: Option<Spanned<f64>>,
    m: Option<Spanned<f64>>,
    n_max: Option<Spanned<i64>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPulse {
    amplitude: Option<Spanned<f64>>,
    sigma: Option<Spanned<f64>>,
    omega_c: Option<Spanned<f64>>,
    polarization: Option<Spanned<String>>,
    phase: Option<Spanned<f64>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScan {
    start: f64,
    stop: f64,
    count: usize,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum RawTimes {
    One(f64),
    List(Vec<f64>),
    Scan(RawScan),
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDelays {
    #[serde(rename = "t_PA")]
    t_pa: Option<Spanned<f64>>,
    #[serde(rename = "t_CA")]
    t_ca: Option<Spanned<RawTimes>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSweep {
    #[serde(rename = "sigma_A")]
    sigma_a: Option<Spanned<Vec<f64>>>,
    #[serde(rename = "sigma_C")]
    sigma_c: Option<Spanned<Vec<f64>>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRun {
    mode: Option<Spanned<String>>,
    output: Option<Spanned<String>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Pp,
    Ppd,
    Sweep(SweepMode),
    Selftest,
}

impl Mode {
    pub const NAMES: [&'static str; 6] = ["pp", "ppd", "sweep-pp", "sweep-ppd-impulsive", "sweep-ppd-control", "selftest"];

    fn parse(name: &str) -> Option<Mode> {
        Some(match name {
            "pp" => Mode::Pp,
            "ppd" => Mode::Ppd,
            "sweep-pp" => Mode::Sweep(SweepMode::Pp),
            "sweep-ppd-impulsive" => Mode::Sweep(SweepMode::PpdImpulsiveControl),
            "sweep-ppd-control" => Mode::Sweep(SweepMode::PpdFiniteControl),
            "selftest" => Mode::Selftest,
            _ => return None,
        })
    }
}

/// Validated configuration in internal units.
#[derive(Clone, Debug)]
pub struct RunConfig {
    pub mode: Mode,
    pub model: ModelParams,
    pub basis: VibronicBasis,
    pub pump: PulseParams,
    pub probe: PulseParams,
    pub control: PulseParams,
    pub t_pa: f64,
    /// Probe delays, internal time units.
    pub t_ca: Vec<f64>,
    /// `(σ_A, σ_C)` pairs, internal time units, pump-major order.
    pub sweep: Vec<(f64, f64)>,
    pub output: Option<PathBuf>,
}

impl RunConfig {
    /// Vibrational period, the unit of every time in the file.
    pub fn period(&self) -> f64 {
        self.model.period()
    }
}

/// Maps byte offsets to 1-based line numbers.
struct Lines {
    starts: Vec<usize>,
}

impl Lines {
    fn new(text: &str) -> Self {
        let mut starts = vec![0];
        starts.extend(text.match_indices('\n').map(|(i, _)| i + 1));
        Lines { starts }
    }

    fn line(&self, span: &Range<usize>) -> usize {
        self.starts.partition_point(|&s| s <= span.start)
    }
}

struct Reader<'a> {
    lines: &'a Lines,
}

impl Reader<'_> {
    fn err(&self, key: &str, span: Option<&Range<usize>>, message: impl Into<String>) -> ConfigError {
        ConfigError { key: key.to_string(), line: span.map(|s| self.lines.line(s)), message: message.into() }
    }

    fn required<'v, T>(&self, section: &str, table: Option<&'v Spanned<impl Sized>>, key: &str, value: Option<&'v Spanned<T>>) -> Result<&'v Spanned<T>, ConfigError> {
        value.ok_or_else(|| {
            let msg = match table {
                Some(_) => "missing required key".to_string(),
                None => format!("missing required key (no [{section}] section)"),
            };
            self.err(&format!("{section}.{key}"), table.map(|t| t.span()).as_ref(), msg)
        })
    }

    fn check(&self, key: &str, v: &Spanned<f64>, ok: bool, why: &str) -> Result<f64, ConfigError> {
        if ok && v.get_ref().is_finite() {
            Ok(*v.get_ref())
        } else {
            Err(self.err(key, Some(&v.span()), format!("{why}, got {}", v.get_ref())))
        }
    }

    fn positive(&self, key: &str, v: &Spanned<f64>) -> Result<f64, ConfigError> {
        self.check(key, v, *v.get_ref() > 0.0, "must be positive")
    }

    fn finite(&self, key: &str, v: &Spanned<f64>) -> Result<f64, ConfigError> {
        self.check(key, v, true, "must be finite")
    }

    fn non_negative(&self, key: &str, v: &Spanned<f64>) -> Result<f64, ConfigError> {
        self.check(key, v, *v.get_ref() >= 0.0, "must be non-negative")
    }
}

/// Reads and validates a configuration file.
pub fn load(path: &Path) -> Result<RunConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|e| ConfigError {
        key: path.display().to_string(),
        line: None,
        message: format!("cannot read: {e}"),
    })?;
    parse(&text)
}

fn clean_path(path: &serde_path_to_error::Path) -> String {
    path.to_string().split('.').filter(|s| !s.starts_with("$__serde")).collect::<Vec<_>>().join(".")
}

/// Parses and validates configuration text.
pub fn parse(text: &str) -> Result<RunConfig, ConfigError> {
    let lines = Lines::new(text);
    let r = Reader { lines: &lines };
    let de = toml::de::Deserializer::parse(text).map_err(|e| r.err("<document>", e.span().as_ref(), e.message()))?;
    let raw: RawFile = serde_path_to_error::deserialize(de).map_err(|e| {
        let key = clean_path(e.path());
        let inner = e.into_inner();
        r.err(if key.is_empty() || key == "?" { "<document>" } else { &key }, inner.span().as_ref(), inner.message())
    })?;

    // model
    let m = raw.model.as_ref();
    let mv = m.map(|s| s.get_ref());
    let omega = r.positive("model.omega", r.required("model", m, "omega", mv.and_then(|v| v.omega.as_ref()))?)?;
    let delta_sq = r.non_negative("model.delta_sq", r.required("model", m, "delta_sq", mv.and_then(|v| v.delta_sq.as_ref()))?)?;
    let eps1 = r.finite("model.eps1", r.required("model", m, "eps1", mv.and_then(|v| v.eps1.as_ref()))?)?;
    let eps1p = r.finite("model.eps1p", r.required("model", m, "eps1p", mv.and_then(|v| v.eps1p.as_ref()))?)?;
    let j = r.finite("model.J", r.required("model", m, "J", mv.and_then(|v| v.j.as_ref()))?)?;
    let n_max_raw = r.required("model", m, "n_max", mv.and_then(|v| v.n_max.as_ref()))?;
    let n_max = match usize::try_from(*n_max_raw.get_ref()) {
        Ok(n) if n >= 1 => n,
        _ => return Err(r.err("model.n_max", Some(&n_max_raw.span()), format!("must be at least 1, got {}", n_max_raw.get_ref()))),
    };
    let eps2 = match mv.and_then(|v| v.eps2.as_ref()) {
        Some(v) => r.finite("model.eps2", v)?,
        None => eps1 + eps1p,
    };
    let dipole = match mv.and_then(|v| v.m.as_ref()) {
        Some(v) => r.positive("model.m", v)?,
        None => 1.0,
    };
    let params = ModelParams::new(omega, delta_sq.sqrt(), eps1 * omega, eps1p * omega, j * omega)
        .map_err(|e| r.err("model", m.map(|s| s.span()).as_ref(), e.to_string()))?
        .with_eps2(eps2 * omega)
        .with_dipole(dipole);
    let basis = VibronicBasis::new(n_max).map_err(|e| r.err("model.n_max", Some(&n_max_raw.span()), e.to_string()))?;
    let period = TAU / omega;

    // run
    let run = raw.run.as_ref();
    let mode_raw = r.required("run", run, "mode", run.and_then(|v| v.get_ref().mode.as_ref()))?;
    let mode = Mode::parse(mode_raw.get_ref()).ok_or_else(|| {
        r.err("run.mode", Some(&mode_raw.span()), format!("unknown mode `{}`, expected one of {}", mode_raw.get_ref(), Mode::NAMES.join(", ")))
    })?;
    let output = run.and_then(|v| v.get_ref().output.as_ref()).map(|o| PathBuf::from(o.get_ref()));

    // pulses
    let pulse = |name: &str, raw: Option<&Spanned<RawPulse>>, default_polarization: Polarization| -> Result<PulseParams, ConfigError> {
        let v = raw.map(|s| s.get_ref());
        let key = |k: &str| format!("{name}.{k}");
        let sigma = r.positive(&key("sigma"), r.required(name, raw, "sigma", v.and_then(|p| p.sigma.as_ref()))?)?;
        let omega_c = r.finite(&key("omega_c"), r.required(name, raw, "omega_c", v.and_then(|p| p.omega_c.as_ref()))?)?;
        let amplitude = match v.and_then(|p| p.amplitude.as_ref()) {
            Some(a) => r.positive(&key("amplitude"), a)?,
            None => 1.0,
        };
        let phase = match v.and_then(|p| p.phase.as_ref()) {
            Some(a) => r.finite(&key("phase"), a)?,
            None => 0.0,
        };
        let polarization = match v.and_then(|p| p.polarization.as_ref()) {
            Some(p) => parse_polarization(&r, &key("polarization"), p)?,
            None => default_polarization,
        };
        Ok(PulseParams { amplitude, sigma: sigma * period, omega_c: omega_c * omega, t_center: 0.0, polarization, phase })
    };
    let pump = pulse("pump", raw.pump.as_ref(), Polarization::V)?;
    let probe = pulse("probe", raw.probe.as_ref(), Polarization::H)?;
    let control = match raw.control.as_ref() {
        Some(c) => {
            let v = c.get_ref();
            let base = default_control(&params).map_err(|e| r.err("control", Some(&c.span()), e.to_string()))?;
            let mut p = base;
            if let Some(s) = &v.sigma {
                p.sigma = r.positive("control.sigma", s)? * period;
            }
            if let Some(w) = &v.omega_c {
                p.omega_c = r.finite("control.omega_c", w)? * omega;
            }
            if let Some(a) = &v.amplitude {
                p.amplitude = r.positive("control.amplitude", a)?;
            }
            if let Some(a) = &v.phase {
                p.phase = r.finite("control.phase", a)?;
            }
            if let Some(pol) = &v.polarization {
                p.polarization = parse_polarization(&r, "control.polarization", pol)?;
            }
            p
        }
        None => default_control(&params).map_err(|e| r.err("control", None, e.to_string()))?,
    };

    // delays
    let delays = raw.delays.as_ref().map(|d| d.get_ref());
    let t_pa = match delays.and_then(|d| d.t_pa.as_ref()) {
        Some(v) => r.non_negative("delays.t_PA", v)? * period,
        None => 0.0,
    };
    let t_ca = match delays.and_then(|d| d.t_ca.as_ref()) {
        Some(v) => times(&r, "delays.t_CA", v)?.into_iter().map(|t| t * period).collect(),
        None => vec![0.0],
    };

    // sweep grid
    let mut sweep = Vec::new();
    if let Mode::Sweep(_) = mode {
        let s = raw.sweep.as_ref();
        let sv = s.map(|x| x.get_ref());
        let grid = |k: &str, v: Option<&Spanned<Vec<f64>>>| -> Result<Vec<f64>, ConfigError> {
            let v = r.required("sweep", s, k, v)?;
            if v.get_ref().is_empty() {
                return Err(r.err(&format!("sweep.{k}"), Some(&v.span()), "must list at least one duration"));
            }
            for &x in v.get_ref() {
                if !(x > 0.0 && x.is_finite()) {
                    return Err(r.err(&format!("sweep.{k}"), Some(&v.span()), format!("durations must be positive, got {x}")));
                }
            }
            Ok(v.get_ref().iter().map(|x| x * period).collect())
        };
        let a = grid("sigma_A", sv.and_then(|x| x.sigma_a.as_ref()))?;
        let c = grid("sigma_C", sv.and_then(|x| x.sigma_c.as_ref()))?;
        for &sa in &a {
            for &sc in &c {
                sweep.push((sa, sc));
            }
        }
    } else if let Some(s) = raw.sweep.as_ref() {
        return Err(r.err("sweep", Some(&s.span()), format!("only used by sweep modes, not `{}`", mode_raw.get_ref())));
    }

    Ok(RunConfig { mode, model: params, basis, pump, probe, control, t_pa, t_ca, sweep, output })
}

fn parse_polarization(r: &Reader<'_>, key: &str, v: &Spanned<String>) -> Result<Polarization, ConfigError> {
    match v.get_ref().as_str() {
        "H" => Ok(Polarization::H),
        "V" => Ok(Polarization::V),
        other => Err(r.err(key, Some(&v.span()), format!("expected \"H\" or \"V\", got \"{other}\""))),
    }
}

fn times(r: &Reader<'_>, key: &str, v: &Spanned<RawTimes>) -> Result<Vec<f64>, ConfigError> {
    let bad = |msg: String| r.err(key, Some(&v.span()), msg);
    let list = match v.get_ref() {
        RawTimes::One(t) => vec![*t],
        RawTimes::List(ts) => ts.clone(),
        RawTimes::Scan(RawScan { start, stop, count }) => match *count {
            0 => return Err(bad("scan count must be at least 1".into())),
            1 => vec![*start],
            n => (0..n).map(|i| start + (stop - start) * i as f64 / (n - 1) as f64).collect(),
        },
    };
    if list.is_empty() {
        return Err(bad("must list at least one delay".into()));
    }
    if let Some(t) = list.iter().find(|t| !(**t >= 0.0 && t.is_finite())) {
        return Err(bad(format!("delays must be non-negative, got {t}")));
    }
    Ok(list)
}
