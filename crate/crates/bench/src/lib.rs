//! Shared fixtures for the benchmarks.

use ppwpi_core::signal::{red_shifted_probe, vertical_pump};
use ppwpi_core::{Delays, DimerModel, Experiment, ModelParams, Pulses, Result, VibronicBasis};

/// Homodimer with δ² = 2.5 in units of ω = 1.
pub fn homodimer(n_max: usize, coupling: f64) -> Result<DimerModel> {
    DimerModel::new(ModelParams::homodimer(1.0, 2.5f64.sqrt(), 0.0, coupling)?, VibronicBasis::new(n_max)?)
}

/// Vertical pump and red-shifted probe of equal width `sigma`, probe delayed
/// by `t_ca`.
pub fn pump_probe(n_max: usize, sigma: f64, t_ca: f64) -> Result<Experiment> {
    let model = homodimer(n_max, 0.1)?;
    let pump = vertical_pump(model.params(), sigma)?;
    let probe = red_shifted_probe(model.params(), sigma)?;
    Experiment::new(model, Pulses::new(pump, probe), Delays::new(0.0, t_ca)?)
}
