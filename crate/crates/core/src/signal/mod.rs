//! Pathway evaluation, overlap tables and polarization anisotropies.
//!
//! Pulse centres are fixed by the delays: control at `-t_PA`, pump at `0`,
//! probe at `t_CA`. Every pathway starts in the vibronic ground state and is
//! carried to the probe centre before projection, so bra and ket are
//! compared at the same time. Pulse overlap between different pulses is
//! neglected.

mod pathway;
mod tables;

use std::borrow::Cow;
use std::collections::HashMap;

use num_complex::Complex64 as C64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::{DimerModel, ElectronicState, ModelParams, PathwayState, Polarization, PulseParams, Site};
use crate::propagators::{build_block, BlockKind, PropagatorBlock, PulseId};

pub use pathway::{PathwaySpec, Step};
pub use tables::{
    pp_ratio_term, pp_zero_delay_closed_form, ppd_ratio_term, ppd_zero_delay_closed_form, Combination, OrientationTable,
    OverlapTable, Signal, PPD_OVERLAPS, PPD_TABLE, PP_HALVED_TABLE, PP_OVERLAPS, PP_TABLE,
};

/// Relative floor on anisotropy denominators.
pub const DEFAULT_DENOMINATOR_FLOOR: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Delays {
    /// Control centre to pump centre.
    pub t_pa: f64,
    /// Pump centre to probe centre.
    pub t_ca: f64,
}

impl Delays {
    pub fn new(t_pa: f64, t_ca: f64) -> Result<Self> {
        let d = Delays { t_pa, t_ca };
        d.validate()?;
        Ok(d)
    }

    pub fn zero() -> Self {
        Delays { t_pa: 0.0, t_ca: 0.0 }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("t_pa", self.t_pa), ("t_ca", self.t_ca)] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::invalid(name, format!("delays must be non-negative, got {v}")));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Pulses {
    pub pump: PulseParams,
    pub probe: PulseParams,
    pub control: Option<PulseParams>,
}

impl Pulses {
    pub fn new(pump: PulseParams, probe: PulseParams) -> Self {
        Pulses { pump, probe, control: None }
    }

    pub fn with_control(mut self, control: PulseParams) -> Self {
        self.control = Some(control);
        self
    }
}

/// Pump resonant at the ground-state equilibrium geometry,
/// `Ω_A = ε₁ + δ²ω`.
pub fn vertical_pump(params: &ModelParams, sigma: f64) -> Result<PulseParams> {
    PulseParams::new(1.0, sigma, params.eps1 + params.delta * params.delta * params.omega).map(|p| p.polarized(Polarization::V))
}

/// Probe resonant at the outer turning point of the excited-state motion,
/// `Ω_C = ε₁ - 3δ²ω`.
pub fn red_shifted_probe(params: &ModelParams, sigma: f64) -> Result<PulseParams> {
    PulseParams::new(1.0, sigma, params.eps1 - 3.0 * params.delta * params.delta * params.omega)
}

/// Pre-resonant control: `Ω_P = ε₁ - 5δ²ω`, `σ_P = T/8`, weak amplitude.
pub fn default_control(params: &ModelParams) -> Result<PulseParams> {
    PulseParams::new(0.1, params.period() / 8.0, params.eps1 - 5.0 * params.delta * params.delta * params.omega)
        .map(|p| p.polarized(Polarization::V))
}

/// Duration of the impulsive control, `T/200`.
pub fn impulsive_control_sigma(params: &ModelParams) -> f64 {
    params.period() / 200.0
}

/// `control` shortened to `sigma` with its area `E·σ` held fixed.
pub fn area_renormalized(control: &PulseParams, sigma: f64) -> Result<PulseParams> {
    let mut p = *control;
    p.amplitude = control.amplitude * control.sigma / sigma;
    p.sigma = sigma;
    p.validate()?;
    Ok(p)
}

/// One signal point: model, positioned pulses and their prebuilt blocks.
#[derive(Clone, Debug)]
pub struct Experiment {
    model: DimerModel,
    pulses: Pulses,
    delays: Delays,
    floor: f64,
    blocks: HashMap<(PulseId, BlockKind), PropagatorBlock>,
}

impl Experiment {
    /// Positions the pulses and builds every block used by the pump-probe
    /// and pump-probe-difference overlap tables.
    pub fn new(model: DimerModel, pulses: Pulses, delays: Delays) -> Result<Self> {
        delays.validate()?;
        let mut pulses = pulses;
        pulses.pump.t_center = 0.0;
        pulses.probe.t_center = delays.t_ca;
        if let Some(c) = pulses.control.as_mut() {
            c.t_center = -delays.t_pa;
        }

        let mut wanted: Vec<(PulseId, BlockKind)> = Vec::new();
        for s in Site::BOTH {
            wanted.push((PulseId::Pump, BlockKind::Up(s)));
            for t in Site::BOTH {
                wanted.push((PulseId::Probe, BlockKind::Se { from: s, to: t }));
            }
            if pulses.control.is_some() {
                wanted.push((PulseId::Control, BlockKind::Gsb(s)));
            }
        }
        let mut exp = Experiment { model, pulses, delays, floor: DEFAULT_DENOMINATOR_FLOOR, blocks: HashMap::new() };
        for (id, kind) in wanted {
            let block = build_block(&exp.model, exp.pulse(id)?, kind)?.for_pulse(id);
            exp.blocks.insert((id, kind), block);
        }
        Ok(exp)
    }

    pub fn with_floor(mut self, floor: f64) -> Self {
        self.floor = floor;
        self
    }

    pub fn model(&self) -> &DimerModel {
        &self.model
    }

    pub fn pulses(&self) -> &Pulses {
        &self.pulses
    }

    pub fn delays(&self) -> Delays {
        self.delays
    }

    pub fn pulse(&self, id: PulseId) -> Result<&PulseParams> {
        match id {
            PulseId::Pump => Ok(&self.pulses.pump),
            PulseId::Probe => Ok(&self.pulses.probe),
            PulseId::Control => self
                .pulses
                .control
                .as_ref()
                .ok_or_else(|| Error::InvalidPathway("pathway uses the control pulse but none is configured".into())),
        }
    }

    pub fn block(&self, id: PulseId, kind: BlockKind) -> Result<Cow<'_, PropagatorBlock>> {
        match self.blocks.get(&(id, kind)) {
            Some(b) => Ok(Cow::Borrowed(b)),
            None => Ok(Cow::Owned(build_block(&self.model, self.pulse(id)?, kind)?.for_pulse(id))),
        }
    }

    /// Applies the pathway's actions at their pulse centres with free
    /// evolution in between, ending at the probe centre. The projection is
    /// left to [`Experiment::overlap`].
    pub fn evaluate_pathway(&self, spec: &PathwaySpec) -> Result<PathwayState> {
        spec.validate()?;
        let mut state = PathwayState::initial(self.model.basis());
        let mut now: Option<f64> = None;
        for step in spec.steps() {
            let t = self.pulse(step.pulse)?.t_center;
            if let Some(prev) = now {
                if t < prev {
                    return Err(Error::InvalidPathway(format!("{spec}: actions are not in order of arrival")));
                }
                state = state.evolve(&self.model, t - prev);
            }
            state = self.block(step.pulse, step.kind)?.apply(&state)?;
            now = Some(t);
        }
        let end = self.pulses.probe.t_center;
        if let Some(prev) = now {
            if prev > end {
                return Err(Error::InvalidPathway(format!("{spec}: acts after the probe")));
            }
            state = state.evolve(&self.model, end - prev);
        }
        Ok(state)
    }

    /// `⟨bra|ket⟩` of the projected components.
    pub fn overlap(&self, bra: &PathwaySpec, ket: &PathwaySpec) -> Result<C64> {
        if bra.projection() != ket.projection() {
            return Err(Error::ProjectionMismatch { bra: bra.to_string(), ket: ket.to_string() });
        }
        let b = self.evaluate_pathway(bra)?;
        let k = self.evaluate_pathway(ket)?;
        let p = bra.projection();
        let missing = |s: &PathwayState| Error::ManifoldMismatch { expected: p.manifold(), found: s.manifold() };
        let bv = b.component(p).ok_or_else(|| missing(&b))?;
        let kv = k.component(p).ok_or_else(|| missing(&k))?;
        Ok(bv.dotc(kv))
    }

    pub fn overlap_table(&self, pairs: &[(&str, &str)]) -> Result<OverlapTable> {
        let specs = tables::parse_pairs(pairs)?;
        let values = specs.iter().map(|(b, k)| self.overlap(b, k)).collect::<Result<Vec<_>>>()?;
        OverlapTable::new(specs, values)
    }

    pub fn pp_overlaps(&self) -> Result<OverlapTable> {
        self.overlap_table(&PP_OVERLAPS)
    }

    pub fn ppd_overlaps(&self) -> Result<OverlapTable> {
        self.overlap_table(&PPD_OVERLAPS)
    }

    /// Stimulated-emission pump-probe combinations and `r_PP`.
    pub fn pp_signal(&self) -> Result<Signal> {
        self.pp_overlaps()?.anisotropy(&PP_TABLE, self.floor)
    }

    /// Stimulated-emission pump-probe-difference combinations and `r_PPD`.
    pub fn ppd_signal(&self) -> Result<Signal> {
        self.ppd_overlaps()?.anisotropy(&PPD_TABLE, self.floor)
    }

    /// `HH - HV`
    pub fn se_hh_minus_hv(&self) -> Result<f64> {
        Ok(PP_TABLE.numerator.evaluate(self.pp_overlaps()?.values()))
    }

    /// `HH + 2HV`
    pub fn se_hh_plus_2hv(&self) -> Result<f64> {
        Ok(PP_TABLE.denominator.evaluate(self.pp_overlaps()?.values()))
    }

    pub fn anisotropy_pp(&self) -> Result<f64> {
        self.pp_signal().map(|s| s.anisotropy)
    }

    /// `VHH - VHV`
    pub fn ppd_vhh_minus_vhv(&self) -> Result<f64> {
        Ok(PPD_TABLE.numerator.evaluate(self.ppd_overlaps()?.values()))
    }

    /// `VHH + 2VHV`
    pub fn ppd_vhh_plus_2vhv(&self) -> Result<f64> {
        Ok(PPD_TABLE.denominator.evaluate(self.ppd_overlaps()?.values()))
    }

    pub fn anisotropy_ppd(&self) -> Result<f64> {
        self.ppd_signal().map(|s| s.anisotropy)
    }
}

/// Whether the pathway ends on a different site than the one it was last
/// driven to, so that only free-evolution transfer can populate the
/// projected component.
pub fn requires_transfer(spec: &PathwaySpec) -> bool {
    match (spec.steps().last().map(|s| s.kind.target()), spec.projection()) {
        (Some(ElectronicState::Exciton(a)), ElectronicState::Exciton(b)) => a != b,
        _ => false,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SweepMode {
    Pp,
    PpdImpulsiveControl,
    PpdFiniteControl,
}

/// Fixed ingredients of a duration sweep; pump and probe durations are
/// replaced per grid point.
#[derive(Clone, Debug)]
pub struct SweepSetup {
    pub model: DimerModel,
    pub pump: PulseParams,
    pub probe: PulseParams,
    /// Finite control; the impulsive mode shortens it with its area fixed.
    pub control: PulseParams,
    pub t_pa: f64,
    pub floor: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SweepRow {
    pub sigma_pump: f64,
    pub sigma_probe: f64,
    pub anisotropy: f64,
}

impl SweepSetup {
    /// Zero-delay anisotropy at one `(σ_A, σ_C)`.
    pub fn point(&self, sigma_pump: f64, sigma_probe: f64, mode: SweepMode) -> Result<f64> {
        let mut pump = self.pump;
        pump.sigma = sigma_pump;
        pump.validate()?;
        let mut probe = self.probe;
        probe.sigma = sigma_probe;
        probe.validate()?;
        let pulses = Pulses::new(pump, probe);
        let pulses = match mode {
            SweepMode::Pp => pulses,
            SweepMode::PpdFiniteControl => pulses.with_control(self.control),
            SweepMode::PpdImpulsiveControl => {
                pulses.with_control(area_renormalized(&self.control, impulsive_control_sigma(self.model.params()))?)
            }
        };
        let exp = Experiment::new(self.model.clone(), pulses, Delays::new(self.t_pa, 0.0)?)?.with_floor(self.floor);
        match mode {
            SweepMode::Pp => exp.anisotropy_pp(),
            _ => exp.anisotropy_ppd(),
        }
    }
}

/// Zero-delay anisotropy over a grid of `(σ_A, σ_C)`, evaluated in parallel
/// and returned in grid order.
pub fn duration_sweep(setup: &SweepSetup, grid: &[(f64, f64)], mode: SweepMode) -> Result<Vec<SweepRow>> {
    if grid.is_empty() {
        return Err(Error::invalid("sigma_grid", "must not be empty"));
    }
    grid.par_iter()
        .map(|&(sigma_pump, sigma_probe)| {
            setup
                .point(sigma_pump, sigma_probe, mode)
                .map(|anisotropy| SweepRow { sigma_pump, sigma_probe, anisotropy })
                .map_err(|e| Error::AtSweepPoint { sigma_pump, sigma_probe, source: Box::new(e) })
        })
        .collect()
}
