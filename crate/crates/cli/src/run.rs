//! Mode dispatch and CSV output.

use std::io::Write as _;
use std::path::Path;

use ppwpi_core::selftest::{run_selftest, SelftestReport};
use ppwpi_core::signal::{duration_sweep, Signal, SweepSetup, DEFAULT_DENOMINATOR_FLOOR};
use ppwpi_core::{Delays, DimerModel, Experiment, Pulses};
use rayon::prelude::*;

use crate::config::{ConfigError, Mode, RunConfig};

pub const EXIT_OK: u8 = 0;
pub const EXIT_USAGE: u8 = 1;
pub const EXIT_CONFIG: u8 = 2;
pub const EXIT_NUMERICAL: u8 = 3;
pub const EXIT_SELFTEST: u8 = 4;

pub const SIGNIFICANT_DIGITS: usize = 12;

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("config error: {0}")]
    Config(#[from] ConfigError),
    #[error("numerical error at {context}: {source}")]
    Numerical {
        context: String,
        #[source]
        source: ppwpi_core::Error,
    },
    #[error("cannot write {path}: {source}")]
    Output {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("selftest failed")]
    Selftest,
}

impl RunError {
    pub fn exit_code(&self) -> u8 {
        match self {
            RunError::Config(_) | RunError::Output { .. } => EXIT_CONFIG,
            RunError::Numerical { .. } => EXIT_NUMERICAL,
            RunError::Selftest => EXIT_SELFTEST,
        }
    }
}

fn numerical(context: impl Into<String>) -> impl FnOnce(ppwpi_core::Error) -> RunError {
    let context = context.into();
    move |source| RunError::Numerical { context, source }
}

/// `%.12g`-style formatting: shortest of fixed and scientific, trailing
/// zeros removed.
pub fn format_number(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let p = SIGNIFICANT_DIGITS;
    let sci = format!("{:.*e}", p - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("scientific format has an exponent");
    let exp: i32 = exp.parse().expect("exponent is an integer");
    let trim = |s: &str| -> String {
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s.to_string()
        }
    };
    if exp < -4 || exp >= p as i32 {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{sign}{:02}", trim(mantissa), exp.abs())
    } else {
        let decimals = (p as i32 - 1 - exp).max(0) as usize;
        trim(&format!("{x:.decimals$}"))
    }
}

fn csv(header: &[&str], rows: &[Vec<f64>]) -> String {
    let mut out = header.join(",");
    out.push('\n');
    for row in rows {
        let cells: Vec<String> = row.iter().map(|&x| format_number(x)).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

pub const PP_HEADER: [&str; 4] = ["t_CA", "HH-HV", "HH+2HV", "r_PP"];
pub const PPD_HEADER: [&str; 4] = ["t_CA", "VHH-VHV", "VHH+2VHV", "r_PPD"];
pub const SWEEP_HEADER: [&str; 3] = ["sigma_A", "sigma_C", "r"];

/// Signal rows for every probe delay, in file order.
fn delay_scan(config: &RunConfig, model: &DimerModel, with_control: bool) -> Result<Vec<Vec<f64>>, RunError> {
    let period = config.period();
    config
        .t_ca
        .par_iter()
        .map(|&t_ca| {
            let context = format!("t_CA = {} T", format_number(t_ca / period));
            let mut pulses = Pulses::new(config.pump, config.probe);
            if with_control {
                pulses = pulses.with_control(config.control);
            }
            let delays = Delays::new(if with_control { config.t_pa } else { 0.0 }, t_ca).map_err(numerical(context.clone()))?;
            let exp = Experiment::new(model.clone(), pulses, delays).map_err(numerical(context.clone()))?;
            let s: Signal = if with_control { exp.ppd_signal() } else { exp.pp_signal() }.map_err(numerical(context))?;
            Ok(vec![t_ca / period, s.numerator, s.denominator, s.anisotropy])
        })
        .collect()
}

/// Runs a configured calculation and returns its CSV text; `None` for the
/// selftest mode, which only reports.
pub fn execute(config: &RunConfig) -> Result<Option<String>, RunError> {
    let model = || DimerModel::new(config.model, config.basis).map_err(numerical("model construction"));
    let period = config.period();
    match config.mode {
        Mode::Pp => Ok(Some(csv(&PP_HEADER, &delay_scan(config, &model()?, false)?))),
        Mode::Ppd => Ok(Some(csv(&PPD_HEADER, &delay_scan(config, &model()?, true)?))),
        Mode::Sweep(mode) => {
            let setup = SweepSetup {
                model: model()?,
                pump: config.pump,
                probe: config.probe,
                control: config.control,
                t_pa: config.t_pa,
                floor: DEFAULT_DENOMINATOR_FLOOR,
            };
            let rows = duration_sweep(&setup, &config.sweep, mode).map_err(numerical("duration sweep"))?;
            let rows: Vec<Vec<f64>> = rows.iter().map(|r| vec![r.sigma_pump / period, r.sigma_probe / period, r.anisotropy]).collect();
            Ok(Some(csv(&SWEEP_HEADER, &rows)))
        }
        Mode::Selftest => {
            let report = run_selftest(config.basis.n_max());
            print_report(&report);
            if report.passed() {
                Ok(None)
            } else {
                Err(RunError::Selftest)
            }
        }
    }
}

pub fn print_report(report: &SelftestReport) {
    for c in &report.checks {
        println!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
    }
    let passed = report.checks.iter().filter(|c| c.passed).count();
    println!(
        "{passed}/{} checks passed at n_max = {} in {:.1} s",
        report.checks.len(),
        report.n_max,
        report.elapsed.as_secs_f64()
    );
}

/// Writes `text` to `path` through a temporary file in the same directory,
/// so a failed write never leaves a partial file behind.
pub fn write_atomically(path: &Path, text: &str) -> Result<(), RunError> {
    let fail = |source| RunError::Output { path: path.display().to_string(), source };
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(fail)?;
    tmp.write_all(text.as_bytes()).map_err(fail)?;
    tmp.persist(path).map_err(|e| fail(e.error))?;
    Ok(())
}

/// One-line summary of the configuration for the log.
pub fn describe(config: &RunConfig) -> String {
    let t = config.period();
    format!(
        "n_max = {}, δ² = {}, J = {} ω, σ_A = {} T, σ_C = {} T",
        config.basis.n_max(),
        format_number(config.model.delta * config.model.delta),
        format_number(config.model.coupling / config.model.omega),
        format_number(config.pump.sigma / t),
        format_number(config.probe.sigma / t),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_use_twelve_significant_digits() {
        assert_eq!(format_number(0.4), "0.4");
        assert_eq!(format_number(1.0 / 3.0), "0.333333333333");
        assert_eq!(format_number(-2.0 / 3.0), "-0.666666666667");
        assert_eq!(format_number(123456.0), "123456");
        assert_eq!(format_number(1.5e-7), "1.5e-07");
        assert_eq!(format_number(-1.234567890123456e20), "-1.23456789012e+20");
        assert_eq!(format_number(0.0), "0");
        assert_eq!(format_number(1e-5), "1e-05");
        assert_eq!(format_number(0.0001), "0.0001");
        assert_eq!(format_number(999999999999.9), "1e+12");
    }

    #[test]
    fn csv_layout() {
        let text = csv(&SWEEP_HEADER, &[vec![0.25, 0.01, 0.7], vec![0.25, 0.25, 0.4]]);
        assert_eq!(text, "sigma_A,sigma_C,r\n0.25,0.01,0.7\n0.25,0.25,0.4\n");
    }
}
