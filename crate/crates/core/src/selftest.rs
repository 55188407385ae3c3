//! Invariant suite run by `dimer-ppwpi selftest`.

use std::f64::consts::TAU;
use std::time::{Duration, Instant};

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use crate::error::Result;
use crate::model::{fc_table, max_abs, DimerModel, ExcitonEvolution, ModelParams, PulseParams, VibronicBasis};
use crate::propagators::{build_block, BlockKind};
use crate::model::Site;
use crate::signal::{
    area_renormalized, default_control, ppd_zero_delay_closed_form, pp_zero_delay_closed_form, red_shifted_probe,
    requires_transfer, vertical_pump, Delays, Experiment, OverlapTable, Pulses, PPD_OVERLAPS, PPD_TABLE, PP_HALVED_TABLE,
    PP_OVERLAPS, PP_TABLE,
};

pub const INVARIANCE_TOL: f64 = 1e-12;
/// Phase factors are applied as rounded unit complex numbers, so the shift
/// survives at a few ulps of each overlap.
pub const PHASE_TOL: f64 = 1e-10;
pub const CLOSED_FORM_TOL: f64 = 1e-10;
pub const UNITARITY_TOL: f64 = 1e-12;
pub const GROUP_TOL: f64 = 1e-10;
pub const COMPLETENESS_TOL: f64 = 1e-10;

#[derive(Clone, Debug)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug)]
pub struct SelftestReport {
    pub n_max: usize,
    pub checks: Vec<Check>,
    pub elapsed: Duration,
}

impl SelftestReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

/// Caption model (`δ² = 2.5`, `ω = 1`, `ε₁ = ε₁′ = 0`) with coupling `j`.
fn caption_model(n_max: usize, j: f64) -> Result<DimerModel> {
    DimerModel::new(ModelParams::homodimer(1.0, 2.5f64.sqrt(), 0.0, j)?, VibronicBasis::new(n_max)?)
}

#[derive(Clone, Copy)]
struct Knobs {
    j: f64,
    t_pa: f64,
    t_ca: f64,
    impulsive_control: bool,
    amplitude: f64,
    dipole: f64,
    phases: [f64; 3],
    /// pump and probe duration in periods
    width: f64,
}

impl Default for Knobs {
    fn default() -> Self {
        Knobs { j: 0.1, t_pa: 0.3 * TAU, t_ca: 0.0, impulsive_control: false, amplitude: 1.0, dipole: 1.0, phases: [0.0; 3], width: 0.25 }
    }
}

fn experiment(n_max: usize, k: &Knobs) -> Result<Experiment> {
    let model = caption_model(n_max, k.j)?;
    let params = model.params().with_dipole(k.dipole);
    let model = DimerModel::new(params, *model.basis())?;
    let scale = |p: PulseParams, phase: f64| PulseParams { amplitude: p.amplitude * k.amplitude, phase, ..p };
    let mut control = default_control(&params)?;
    if k.impulsive_control {
        control = area_renormalized(&control, params.period() / 200.0)?;
    }
    let pulses = Pulses::new(
        scale(vertical_pump(&params, k.width * params.period())?, k.phases[0]),
        scale(red_shifted_probe(&params, k.width * params.period())?, k.phases[1]),
    )
    .with_control(scale(control, k.phases[2]));
    Experiment::new(model, pulses, Delays::new(k.t_pa, k.t_ca)?)
}

/// Pump-probe, finite-control and impulsive-control anisotropies. The
/// finite-control point uses short pump and probe pulses, where its
/// denominator is well away from zero.
fn anisotropies(n_max: usize, k: &Knobs) -> Result<[f64; 3]> {
    let pp = experiment(n_max, k)?.anisotropy_pp()?;
    let finite = experiment(n_max, &Knobs { width: 0.01, ..*k })?.anisotropy_ppd()?;
    let impulsive = experiment(n_max, &Knobs { impulsive_control: true, ..*k })?.anisotropy_ppd()?;
    Ok([pp, finite, impulsive])
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

fn transfer_overlaps_vanish(n_max: usize) -> Result<(bool, String)> {
    let mut zeroed = 0;
    let mut worst = 0.0f64;
    for j in [0.1, 1.0] {
        let exp = experiment(n_max, &Knobs { j, ..Knobs::default() })?;
        for table in [exp.pp_overlaps()?, exp.ppd_overlaps()?] {
            for ((b, k), v) in table.pairs().iter().zip(table.values()) {
                if requires_transfer(b) || requires_transfer(k) {
                    zeroed += 1;
                    worst = worst.max(v.norm());
                }
            }
        }
    }
    Ok((worst == 0.0 && zeroed > 0, format!("{zeroed} transfer overlaps, largest |value| {worst:e}")))
}

fn coupling_independence(n_max: usize) -> Result<(bool, String)> {
    let reference = anisotropies(n_max, &Knobs { j: 0.0, ..Knobs::default() })?;
    let mut worst = 0.0f64;
    for j in [0.1, 1.0] {
        worst = worst.max(max_diff(&reference, &anisotropies(n_max, &Knobs { j, ..Knobs::default() })?));
    }
    Ok((worst <= INVARIANCE_TOL, format!("max |Δr| over J ∈ {{0, 0.1, 1}}: {worst:e}")))
}

fn amplitude_invariance(n_max: usize) -> Result<(bool, String)> {
    let base = anisotropies(n_max, &Knobs::default())?;
    let scaled = anisotropies(n_max, &Knobs { amplitude: 3.7, dipole: 0.6, ..Knobs::default() })?;
    let d = max_diff(&base, &scaled);
    Ok((d <= INVARIANCE_TOL, format!("max |Δr| under E×3.7, m×0.6: {d:e}")))
}

fn phase_invariance(n_max: usize) -> Result<(bool, String)> {
    let base = anisotropies(n_max, &Knobs::default())?;
    let shifted = anisotropies(n_max, &Knobs { phases: [0.7, -1.9, 2.4], ..Knobs::default() })?;
    let d = max_diff(&base, &shifted);
    let model = caption_model(n_max, 0.1)?;
    let pulse = red_shifted_probe(model.params(), model.params().period() / 4.0)?;
    let mut identical = true;
    for kind in [BlockKind::Gsb(Site::One), BlockKind::Se { from: Site::One, to: Site::OnePrime }, BlockKind::Esa { from: Site::OnePrime, to: Site::OnePrime }] {
        identical &= build_block(&model, &pulse, kind)?.matrix == build_block(&model, &pulse.with_phase(1.234), kind)?.matrix;
    }
    Ok((d <= PHASE_TOL && identical, format!("max |Δr| under phase shifts: {d:e}; second-order blocks bit-identical: {identical}")))
}

fn relabeled_table(exp: &Experiment, pairs: &[(&str, &str)]) -> Result<OverlapTable> {
    let original = exp.overlap_table(pairs)?;
    let swapped: Vec<_> = original.pairs().iter().map(|(b, k)| (b.relabeled(), k.relabeled())).collect();
    let values = swapped.iter().map(|(b, k)| exp.overlap(b, k)).collect::<Result<Vec<_>>>()?;
    OverlapTable::new(swapped, values)
}

fn relabeling_invariance(n_max: usize) -> Result<(bool, String)> {
    let exp = experiment(n_max, &Knobs { t_ca: 0.37 * TAU, ..Knobs::default() })?;
    let mut worst = 0.0f64;
    for (pairs, table) in [(&PP_OVERLAPS, &PP_TABLE), (&PPD_OVERLAPS, &PPD_TABLE)] {
        let a = exp.overlap_table(pairs)?;
        let b = relabeled_table(&exp, pairs)?;
        let scale = a.max_abs();
        for (x, y) in a.values().iter().zip(b.values()) {
            worst = worst.max((x - y).norm() / scale);
        }
        for c in [table.numerator, table.denominator] {
            let (x, y) = (c.evaluate(a.values()), c.evaluate(b.values()));
            worst = worst.max((x - y).abs() / scale);
        }
    }
    Ok((worst <= INVARIANCE_TOL, format!("max relative change under 1↔1′: {worst:e}")))
}

fn halved_forms_agree(n_max: usize) -> Result<(bool, String)> {
    let exp = experiment(n_max, &Knobs { t_ca: 0.37 * TAU, ..Knobs::default() })?;
    let t = exp.pp_overlaps()?;
    let v = t.values();
    let scale = t.max_abs();
    let dn = (PP_TABLE.numerator.evaluate(v) - PP_HALVED_TABLE.numerator.evaluate(v)).abs() / scale;
    let dd = (PP_TABLE.denominator.evaluate(v) - PP_HALVED_TABLE.denominator.evaluate(v)).abs() / scale;
    let d = dn.max(dd);
    Ok((d <= INVARIANCE_TOL, format!("full vs halved forms at t_CA = 0.37 T: {d:e}")))
}

fn zero_delay_closed_forms(n_max: usize) -> Result<(bool, String)> {
    let pp = experiment(n_max, &Knobs::default())?.pp_overlaps()?;
    let d_pp = (pp.anisotropy(&PP_TABLE, 0.0)?.anisotropy - pp_zero_delay_closed_form(pp.values())).abs();
    let ppd = experiment(n_max, &Knobs { impulsive_control: true, ..Knobs::default() })?.ppd_overlaps()?;
    let d_ppd = (ppd.anisotropy(&PPD_TABLE, 0.0)?.anisotropy - ppd_zero_delay_closed_form(ppd.values())).abs();
    let ok = d_pp <= CLOSED_FORM_TOL && d_ppd <= CLOSED_FORM_TOL;
    Ok((ok, format!("pump-probe {d_pp:e}, difference signal {d_ppd:e}")))
}

fn fc_completeness(_n_max: usize) -> Result<(bool, String)> {
    let f = fc_table(30, 2.5f64.sqrt());
    let row: f64 = (0..30).map(|e| f[(0, e)].powi(2)).sum();
    let gram = f.transpose() * &f - DMatrix::<f64>::identity(30, 30);
    let interior = gram.view((0, 0), (7, 7)).amax();
    let ok = (row - 1.0).abs() <= COMPLETENESS_TOL && interior <= 1e-8;
    Ok((ok, format!("|Σ⟨0|e⟩² - 1| = {:e}, interior 7×7 defect {interior:e} (n = 30)", (row - 1.0).abs())))
}

fn unitarity_and_group(n_max: usize) -> Result<(bool, String)> {
    let model = caption_model(n_max, 0.1)?;
    let evo = ExcitonEvolution::new(model.params(), model.basis());
    let (t1, t2) = (0.37 * TAU, 0.81 * TAU);
    let u1 = evo.matrix(t1);
    let u2 = evo.matrix(t2);
    let id = DMatrix::<C64>::identity(u1.nrows(), u1.ncols());
    let unitarity = max_abs(&(u1.adjoint() * &u1 - &id));
    let group = max_abs(&(evo.matrix(t1 + t2) - &u2 * &u1));
    let ok = unitarity <= UNITARITY_TOL && group <= GROUP_TOL;
    Ok((ok, format!("‖U†U - 1‖ = {unitarity:e}, ‖U(t₁+t₂) - U(t₂)U(t₁)‖ = {group:e}")))
}

/// Runs every invariant at basis size `n_max`.
pub fn run_selftest(n_max: usize) -> SelftestReport {
    type CheckFn = fn(usize) -> Result<(bool, String)>;
    let suite: [(&'static str, CheckFn); 9] = [
        ("zero-delay transfer overlaps vanish", transfer_overlaps_vanish),
        ("zero-delay anisotropies independent of J", coupling_independence),
        ("amplitude invariance", amplitude_invariance),
        ("phase invariance", phase_invariance),
        ("homodimer relabeling invariance", relabeling_invariance),
        ("full and halved pump-probe forms agree", halved_forms_agree),
        ("zero-delay closed forms agree", zero_delay_closed_forms),
        ("Franck-Condon completeness", fc_completeness),
        ("one-exciton propagator unitarity and group property", unitarity_and_group),
    ];
    let start = Instant::now();
    let checks = suite
        .iter()
        .map(|&(name, f)| match f(n_max) {
            Ok((passed, detail)) => Check { name, passed, detail },
            Err(e) => Check { name, passed: false, detail: format!("error: {e}") },
        })
        .collect();
    SelftestReport { n_max, checks, elapsed: start.elapsed() }
}
