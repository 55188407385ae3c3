//! First- and second-order pulse actions as matrices over the vibronic
//! basis.
//!
//! A pulse centred at `t_I` is applied as a single operator at `t_I`; free
//! evolution between pulse centres is handled by the caller. Each block
//! maps the amplitudes of one electronic state (columns) onto another
//! (rows). Second-order blocks carry the prefactor `(iEm/2)²` and no optical
//! phase; first-order blocks carry `(iEm/2)` and `e^{∓iφ}`.

use std::collections::HashSet;
use std::f64::consts::TAU;
use std::fmt;
use std::sync::Mutex;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::model::{DimerModel, ElectronicState, Mode, PathwayState, PulseParams, Site, VibronicBasis};
use crate::special::nested_unchecked;

/// Relative contribution of the last intermediate level above which a
/// truncation warning is logged.
pub const TRUNCATION_WARN: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PulseId {
    Control,
    Pump,
    Probe,
}

impl PulseId {
    pub fn letter(self) -> char {
        match self {
            PulseId::Control => 'p',
            PulseId::Pump => 'a',
            PulseId::Probe => 'c',
        }
    }

    pub fn from_letter(c: char) -> Option<Self> {
        match c {
            'p' => Some(PulseId::Control),
            'a' => Some(PulseId::Pump),
            'c' => Some(PulseId::Probe),
            _ => None,
        }
    }
}

impl fmt::Display for PulseId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.letter())
    }
}

/// One pulse action.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BlockKind {
    /// `0 → s`
    Up(Site),
    /// `s → 0`
    Down(Site),
    /// `0 → s → 0`
    Gsb(Site),
    /// `from → 0 → to`
    Se { from: Site, to: Site },
    /// `from → 2 → to`
    Esa { from: Site, to: Site },
}

impl BlockKind {
    pub fn order(self) -> u8 {
        match self {
            BlockKind::Up(_) | BlockKind::Down(_) => 1,
            _ => 2,
        }
    }

    pub fn source(self) -> ElectronicState {
        match self {
            BlockKind::Up(_) | BlockKind::Gsb(_) => ElectronicState::Ground,
            BlockKind::Down(s) => ElectronicState::Exciton(s),
            BlockKind::Se { from, .. } | BlockKind::Esa { from, .. } => ElectronicState::Exciton(from),
        }
    }

    pub fn target(self) -> ElectronicState {
        match self {
            BlockKind::Down(_) | BlockKind::Gsb(_) => ElectronicState::Ground,
            BlockKind::Up(s) => ElectronicState::Exciton(s),
            BlockKind::Se { to, .. } | BlockKind::Esa { to, .. } => ElectronicState::Exciton(to),
        }
    }

    /// Same action with site labels exchanged.
    pub fn relabeled(self) -> Self {
        match self {
            BlockKind::Up(s) => BlockKind::Up(s.other()),
            BlockKind::Down(s) => BlockKind::Down(s.other()),
            BlockKind::Gsb(s) => BlockKind::Gsb(s.other()),
            BlockKind::Se { from, to } => BlockKind::Se { from: from.other(), to: to.other() },
            BlockKind::Esa { from, to } => BlockKind::Esa { from: from.other(), to: to.other() },
        }
    }
}

/// A pulse action between two electronic states.
#[derive(Clone, Debug, PartialEq)]
pub struct PropagatorBlock {
    pub kind: BlockKind,
    pub pulse: Option<PulseId>,
    /// Rows index the target state, columns the source state.
    pub matrix: DMatrix<C64>,
    /// Largest contribution of the last intermediate level, relative to the
    /// largest element; zero for blocks without an intermediate sum.
    pub truncation: f64,
}

impl PropagatorBlock {
    pub fn order(&self) -> u8 {
        self.kind.order()
    }

    pub fn from_state(&self) -> ElectronicState {
        self.kind.source()
    }

    pub fn to_state(&self) -> ElectronicState {
        self.kind.target()
    }

    pub fn for_pulse(mut self, id: PulseId) -> Self {
        self.pulse = Some(id);
        self
    }

    /// Applies the block to the source component of `state`.
    pub fn apply(&self, state: &PathwayState) -> Result<PathwayState> {
        let source = self.from_state();
        let amplitudes = state.component(source).ok_or(Error::ManifoldMismatch {
            expected: source.manifold(),
            found: state.manifold(),
        })?;
        let out = &self.matrix * amplitudes;
        Ok(match self.to_state() {
            ElectronicState::Ground => PathwayState::Ground(out),
            ElectronicState::Biexciton => PathwayState::TwoExciton(out),
            ElectronicState::Exciton(Site::One) => PathwayState::OneExciton { site1p: out.map(|_| C64::new(0.0, 0.0)), site1: out },
            ElectronicState::Exciton(Site::OnePrime) => PathwayState::OneExciton { site1: out.map(|_| C64::new(0.0, 0.0)), site1p: out },
        })
    }
}

fn first_order_prefactor(model: &DimerModel, pulse: &PulseParams) -> C64 {
    C64::new(0.0, 0.5 * pulse.amplitude * model.params().dipole)
}

fn second_order_prefactor(model: &DimerModel, pulse: &PulseParams) -> C64 {
    let c = first_order_prefactor(model, pulse);
    c * c
}

/// `∫ exp(-t²/2σ² + iΔt) dt`
fn gaussian_filter(sigma: f64, detuning: f64) -> f64 {
    TAU.sqrt() * sigma * (-0.5 * sigma * sigma * detuning * detuning).exp()
}

/// Embeds a single-mode matrix on `mode` with the identity on the other
/// mode.
fn embed(basis: &VibronicBasis, mode: Mode, single: &DMatrix<C64>) -> DMatrix<C64> {
    let dim = basis.dim();
    let other = match mode {
        Mode::A => Mode::B,
        Mode::B => Mode::A,
    };
    DMatrix::from_fn(dim, dim, |r, c| {
        if basis.level(r, other) == basis.level(c, other) {
            single[(basis.level(r, mode), basis.level(c, mode))]
        } else {
            C64::new(0.0, 0.0)
        }
    })
}

/// `M[ν, ν̄] = Σ_k w[ν,k] w[ν̄,k] I(ω(k-ν̄) + d, ω(k-ν) + d)` and the weight
/// of its `k = n-1` term relative to the largest element. The weight is taken
/// over the lower half of the levels: the top levels are cut off by the basis
/// itself, so their sums never converge and say nothing about the states a
/// calculation populates.
fn intermediate_sum(w: &DMatrix<f64>, omega: f64, d: f64, sigma: f64) -> (DMatrix<C64>, f64) {
    let n = w.nrows();
    let offset = n as isize - 1;
    let span = 2 * n - 1;
    // I depends on (k-ν̄, k-ν) only
    let table: Vec<C64> = (0..span * span)
        .map(|idx| {
            let i = (idx / span) as isize - offset;
            let j = (idx % span) as isize - offset;
            nested_unchecked(omega * i as f64 + d, omega * j as f64 + d, sigma)
        })
        .collect();
    let lookup = |i: isize, j: isize| table[(i + offset) as usize * span + (j + offset) as usize];

    let interior = n.div_ceil(2);
    let mut m = DMatrix::zeros(n, n);
    let mut last = 0.0f64;
    let mut scale = 0.0f64;
    for nu in 0..n {
        for nub in 0..n {
            let mut acc = C64::new(0.0, 0.0);
            let mut term = C64::new(0.0, 0.0);
            for k in 0..n {
                term = lookup(k as isize - nub as isize, k as isize - nu as isize) * (w[(nu, k)] * w[(nub, k)]);
                acc += term;
            }
            m[(nu, nub)] = acc;
            if nu < interior && nub < interior {
                last = last.max(term.norm());
                scale = scale.max(acc.norm());
            }
        }
    }
    let truncation = if scale > 0.0 { last / scale } else { 0.0 };
    (m, truncation)
}

/// Logs at warn level once per block kind and process, at debug level
/// afterwards, so scans do not flood the log.
fn warn_truncation(kind: BlockKind, truncation: f64) {
    static WARNED: Mutex<Option<HashSet<BlockKind>>> = Mutex::new(None);
    if truncation <= TRUNCATION_WARN {
        return;
    }
    let first = WARNED
        .lock()
        .map(|mut w| w.get_or_insert_with(HashSet::new).insert(kind))
        .unwrap_or(true);
    let level = if first { log::Level::Warn } else { log::Level::Debug };
    log::log!(level, "{kind:?}: last intermediate level contributes {truncation:.2e} of the largest element; consider raising n_max");
}

fn same_site(model: &DimerModel, pulse: &PulseParams, kind: BlockKind, mode: Mode, w: &DMatrix<f64>, d: f64) -> PropagatorBlock {
    let (single, truncation) = intermediate_sum(w, model.params().omega, d, pulse.sigma);
    warn_truncation(kind, truncation);
    let c = second_order_prefactor(model, pulse);
    PropagatorBlock { kind, pulse: None, matrix: embed(model.basis(), mode, &single) * c, truncation }
}

/// Ground → site `s` → ground.
pub fn gsb_block(model: &DimerModel, pulse: &PulseParams, site: Site) -> Result<PropagatorBlock> {
    pulse.validate()?;
    let d = model.params().site_energy(site) - pulse.omega_c;
    Ok(same_site(model, pulse, BlockKind::Gsb(site), site.mode(), model.fc(), d))
}

/// Site `s` → ground → site `s`.
pub fn se_block(model: &DimerModel, pulse: &PulseParams, site: Site) -> Result<PropagatorBlock> {
    pulse.validate()?;
    let d = pulse.omega_c - model.params().site_energy(site);
    let w = model.fc().transpose();
    Ok(same_site(model, pulse, BlockKind::Se { from: site, to: site }, site.mode(), &w, d))
}

/// Site `s` → two-exciton → site `s`; filters the mode of the other site.
pub fn esa_block(model: &DimerModel, pulse: &PulseParams, site: Site) -> Result<PropagatorBlock> {
    pulse.validate()?;
    let p = model.params();
    let d = p.eps2 - p.site_energy(site) - pulse.omega_c;
    Ok(same_site(model, pulse, BlockKind::Esa { from: site, to: site }, site.other().mode(), model.fc(), d))
}

/// Element `[(ν)_{to}, (ν̄)_{from}] = c · F[ν_p, ν̄_p] · F[ν̄_q, ν_q] · I(α, β)`
/// where `p` is the mode of `from`, `q` the mode of `to`, and `(α, β)`
/// depend only on `(ν_p - ν̄_p, ν̄_q - ν_q)`.
fn cross(model: &DimerModel, pulse: &PulseParams, kind: BlockKind, from: Site, to: Site, args: impl Fn(f64, f64) -> (f64, f64)) -> Result<PropagatorBlock> {
    pulse.validate()?;
    if from == to {
        return Err(Error::invalid("site", "cross-site blocks need two distinct sites"));
    }
    let basis = model.basis();
    let f = model.fc();
    let n = basis.n_max();
    let omega = model.params().omega;
    let offset = n as isize - 1;
    let span = 2 * n - 1;
    let table: Vec<C64> = (0..span * span)
        .map(|idx| {
            let dp = ((idx / span) as isize - offset) as f64;
            let dq = ((idx % span) as isize - offset) as f64;
            let (a, b) = args(omega * dp, omega * dq);
            nested_unchecked(a, b, pulse.sigma)
        })
        .collect();
    let (p, q) = (from.mode(), to.mode());
    let c = second_order_prefactor(model, pulse);
    let matrix = DMatrix::from_fn(basis.dim(), basis.dim(), |r, col| {
        let (np, nq) = (basis.level(r, p), basis.level(r, q));
        let (mp, mq) = (basis.level(col, p), basis.level(col, q));
        let i = (np as isize - mp as isize + offset) as usize;
        let j = (mq as isize - nq as isize + offset) as usize;
        c * (f[(np, mp)] * f[(mq, nq)]) * table[i * span + j]
    });
    Ok(PropagatorBlock { kind, pulse: None, matrix, truncation: 0.0 })
}

/// Site `from` → ground → site `to`, `from ≠ to`.
pub fn se_cross_block(model: &DimerModel, pulse: &PulseParams, from: Site, to: Site) -> Result<PropagatorBlock> {
    let p = model.params();
    let (e_from, e_to, w) = (p.site_energy(from), p.site_energy(to), pulse.omega_c);
    cross(model, pulse, BlockKind::Se { from, to }, from, to, |dp, dq| (w - e_from + dp, w - e_to + dq))
}

/// Site `from` → two-exciton → site `to`, `from ≠ to`.
pub fn esa_cross_block(model: &DimerModel, pulse: &PulseParams, from: Site, to: Site) -> Result<PropagatorBlock> {
    let p = model.params();
    let (g_from, g_to, w) = (p.eps2 - p.site_energy(from), p.eps2 - p.site_energy(to), pulse.omega_c);
    cross(model, pulse, BlockKind::Esa { from, to }, from, to, |dp, dq| (-dq + g_from - w, -dp + g_to - w))
}

/// Ground → site `s`, first order.
pub fn first_order_up(model: &DimerModel, pulse: &PulseParams, site: Site) -> Result<PropagatorBlock> {
    pulse.validate()?;
    let c = first_order_prefactor(model, pulse) * C64::from_polar(1.0, -pulse.phase);
    let eps = model.params().site_energy(site);
    let omega = model.params().omega;
    let single = DMatrix::from_fn(model.basis().n_max(), model.basis().n_max(), |nu, nub| {
        let detuning = omega * (nu as f64 - nub as f64) + eps - pulse.omega_c;
        c * (model.fc()[(nub, nu)] * gaussian_filter(pulse.sigma, detuning))
    });
    let matrix = embed(model.basis(), site.mode(), &single);
    Ok(PropagatorBlock { kind: BlockKind::Up(site), pulse: None, matrix, truncation: 0.0 })
}

/// Site `s` → ground, first order.
pub fn first_order_down(model: &DimerModel, pulse: &PulseParams, site: Site) -> Result<PropagatorBlock> {
    pulse.validate()?;
    let c = first_order_prefactor(model, pulse) * C64::from_polar(1.0, pulse.phase);
    let eps = model.params().site_energy(site);
    let omega = model.params().omega;
    let single = DMatrix::from_fn(model.basis().n_max(), model.basis().n_max(), |nu, nub| {
        let detuning = pulse.omega_c - omega * (nub as f64 - nu as f64) - eps;
        c * (model.fc()[(nu, nub)] * gaussian_filter(pulse.sigma, detuning))
    });
    let matrix = embed(model.basis(), site.mode(), &single);
    Ok(PropagatorBlock { kind: BlockKind::Down(site), pulse: None, matrix, truncation: 0.0 })
}

/// Builds the block for any action kind.
pub fn build_block(model: &DimerModel, pulse: &PulseParams, kind: BlockKind) -> Result<PropagatorBlock> {
    match kind {
        BlockKind::Up(s) => first_order_up(model, pulse, s),
        BlockKind::Down(s) => first_order_down(model, pulse, s),
        BlockKind::Gsb(s) => gsb_block(model, pulse, s),
        BlockKind::Se { from, to } if from == to => se_block(model, pulse, from),
        BlockKind::Se { from, to } => se_cross_block(model, pulse, from, to),
        BlockKind::Esa { from, to } if from == to => esa_block(model, pulse, from),
        BlockKind::Esa { from, to } => esa_cross_block(model, pulse, from, to),
    }
}
