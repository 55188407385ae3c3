//! Electronic-vibrational model of the dimer: parameters, the truncated
//! two-mode basis, Franck–Condon overlaps, manifold energies and the free
//! propagators that act between pulses.
//!
//! Conventions:
//! - exciting site 1 displaces mode `a`, exciting site 1′ displaces mode `b`,
//!   the two-exciton state displaces both;
//! - every manifold has frequency `ω` in both modes and energy
//!   `ε_offset + ω(ν_a + ν_b)` (zero-point energy dropped);
//! - a one-exciton amplitude on site `s` is expanded in the vibrational
//!   eigenbasis of that site, so mode `a` (site 1) or mode `b` (site 1′) is
//!   counted in displaced-oscillator levels.

use std::f64::consts::{SQRT_2, TAU};
use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

/// Largest vibrational level accepted by the Franck–Condon routines.
pub const FC_LEVEL_CAP: usize = 512;

/// Per-mode level cap used when none is configured.
pub const DEFAULT_N_MAX: usize = 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Site {
    One,
    OnePrime,
}

impl Site {
    pub const BOTH: [Site; 2] = [Site::One, Site::OnePrime];

    pub fn other(self) -> Site {
        match self {
            Site::One => Site::OnePrime,
            Site::OnePrime => Site::One,
        }
    }

    /// Mode displaced by exciting this site.
    pub fn mode(self) -> Mode {
        match self {
            Site::One => Mode::A,
            Site::OnePrime => Mode::B,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Site::One => "1",
            Site::OnePrime => "1′",
        }
    }
}

impl fmt::Display for Site {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Manifold {
    Ground,
    OneExciton,
    TwoExciton,
}

impl fmt::Display for Manifold {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Manifold::Ground => "ground",
            Manifold::OneExciton => "one-exciton",
            Manifold::TwoExciton => "two-exciton",
        })
    }
}

/// Electronic state with one-exciton site resolution.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ElectronicState {
    Ground,
    Exciton(Site),
    Biexciton,
}

impl ElectronicState {
    pub fn manifold(self) -> Manifold {
        match self {
            ElectronicState::Ground => Manifold::Ground,
            ElectronicState::Exciton(_) => Manifold::OneExciton,
            ElectronicState::Biexciton => Manifold::TwoExciton,
        }
    }
}

impl fmt::Display for ElectronicState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ElectronicState::Ground => f.write_str("0"),
            ElectronicState::Exciton(s) => s.fmt(f),
            ElectronicState::Biexciton => f.write_str("2"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Mode {
    A,
    B,
}

/// Which modes an overlap matrix displaces.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum DisplacedModes {
    A,
    B,
    Both,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Polarization {
    H,
    V,
}

/// Dimer energetics. Energies and `ω` share one unit; `ħ = 1`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ModelParams {
    pub omega: f64,
    /// Dimensionless displacement; the Huang–Rhys factor is `δ²`.
    pub delta: f64,
    pub eps1: f64,
    pub eps1p: f64,
    pub eps2: f64,
    /// Site–site electronic coupling `J`.
    pub coupling: f64,
    /// Transition dipole magnitude `m`.
    pub dipole: f64,
}

impl ModelParams {
    /// Parameters with `ε₂ = ε₁ + ε₁′` and unit dipole.
    pub fn new(omega: f64, delta: f64, eps1: f64, eps1p: f64, coupling: f64) -> Result<Self> {
        let p = ModelParams { omega, delta, eps1, eps1p, eps2: eps1 + eps1p, coupling, dipole: 1.0 };
        p.validate()?;
        Ok(p)
    }

    /// Equal-energy dimer with site energy `eps`.
    pub fn homodimer(omega: f64, delta: f64, eps: f64, coupling: f64) -> Result<Self> {
        Self::new(omega, delta, eps, eps, coupling)
    }

    pub fn with_eps2(mut self, eps2: f64) -> Self {
        self.eps2 = eps2;
        self
    }

    pub fn with_dipole(mut self, dipole: f64) -> Self {
        self.dipole = dipole;
        self
    }

    pub fn with_coupling(mut self, coupling: f64) -> Self {
        self.coupling = coupling;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.omega > 0.0 && self.omega.is_finite()) {
            return Err(Error::invalid("omega", format!("must be positive, got {}", self.omega)));
        }
        if !(self.delta >= 0.0 && self.delta.is_finite()) {
            return Err(Error::invalid("delta", format!("must be non-negative, got {}", self.delta)));
        }
        if !(self.dipole > 0.0 && self.dipole.is_finite()) {
            return Err(Error::invalid("dipole", format!("must be positive, got {}", self.dipole)));
        }
        for (name, v) in [("eps1", self.eps1), ("eps1p", self.eps1p), ("eps2", self.eps2), ("coupling", self.coupling)] {
            if !v.is_finite() {
                return Err(Error::invalid(name, "must be finite"));
            }
        }
        Ok(())
    }

    pub fn is_homodimer(&self) -> bool {
        self.eps1 == self.eps1p
    }

    pub fn site_energy(&self, site: Site) -> f64 {
        match site {
            Site::One => self.eps1,
            Site::OnePrime => self.eps1p,
        }
    }

    pub fn offset(&self, state: ElectronicState) -> f64 {
        match state {
            ElectronicState::Ground => 0.0,
            ElectronicState::Exciton(s) => self.site_energy(s),
            ElectronicState::Biexciton => self.eps2,
        }
    }

    /// Dimensionless minimum shift `x₀ = √2 δ`.
    pub fn displacement(&self) -> f64 {
        SQRT_2 * self.delta
    }

    /// Vibrational period `2π/ω`.
    pub fn period(&self) -> f64 {
        TAU / self.omega
    }

    /// Parameters with the site labels exchanged.
    pub fn relabeled(&self) -> Self {
        ModelParams { eps1: self.eps1p, eps1p: self.eps1, ..*self }
    }
}

/// One Gaussian pulse `E f(t - t_I) cos(Ω(t - t_I) + φ)` with
/// `f(t) = exp(-t²/2σ²)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PulseParams {
    pub amplitude: f64,
    pub sigma: f64,
    pub omega_c: f64,
    pub t_center: f64,
    pub polarization: Polarization,
    pub phase: f64,
}

impl PulseParams {
    pub fn new(amplitude: f64, sigma: f64, omega_c: f64) -> Result<Self> {
        let p = PulseParams { amplitude, sigma, omega_c, t_center: 0.0, polarization: Polarization::H, phase: 0.0 };
        p.validate()?;
        Ok(p)
    }

    pub fn at(mut self, t_center: f64) -> Self {
        self.t_center = t_center;
        self
    }

    pub fn polarized(mut self, polarization: Polarization) -> Self {
        self.polarization = polarization;
        self
    }

    pub fn with_phase(mut self, phase: f64) -> Self {
        self.phase = phase;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return Err(Error::invalid("sigma", format!("must be positive, got {}", self.sigma)));
        }
        for (name, v) in [
            ("amplitude", self.amplitude),
            ("omega_c", self.omega_c),
            ("t_center", self.t_center),
            ("phase", self.phase),
        ] {
            if !v.is_finite() {
                return Err(Error::invalid(name, "must be finite"));
            }
        }
        Ok(())
    }
}

/// Truncated product basis `(ν_a, ν_b)`, `0 ≤ ν < n_max`, indexed
/// `ν_a · n_max + ν_b`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct VibronicBasis {
    n_max: usize,
}

impl VibronicBasis {
    pub fn new(n_max: usize) -> Result<Self> {
        if n_max == 0 {
            return Err(Error::invalid("n_max", "must be at least 1"));
        }
        if n_max > FC_LEVEL_CAP {
            return Err(Error::LevelCap { level: n_max, cap: FC_LEVEL_CAP });
        }
        Ok(VibronicBasis { n_max })
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn dim(&self) -> usize {
        self.n_max * self.n_max
    }

    #[inline]
    pub fn index(&self, nu_a: usize, nu_b: usize) -> usize {
        debug_assert!(nu_a < self.n_max && nu_b < self.n_max);
        nu_a * self.n_max + nu_b
    }

    #[inline]
    pub fn levels(&self, index: usize) -> (usize, usize) {
        (index / self.n_max, index % self.n_max)
    }

    #[inline]
    pub fn quanta(&self, index: usize) -> usize {
        let (a, b) = self.levels(index);
        a + b
    }

    /// Level of `mode` in the state at `index`.
    #[inline]
    pub fn level(&self, index: usize, mode: Mode) -> usize {
        let (a, b) = self.levels(index);
        match mode {
            Mode::A => a,
            Mode::B => b,
        }
    }
}

/// Single-mode overlaps `F[g, e] = ⟨g|e⟩` for levels below `n`, where `|e⟩`
/// belongs to the oscillator shifted by `x₀ = √2 λ`. `F[0, 1] > 0` for
/// `λ > 0`.
pub fn fc_table(n: usize, lambda: f64) -> DMatrix<f64> {
    let mut f = DMatrix::zeros(n, n);
    if n == 0 {
        return f;
    }
    f[(0, 0)] = (-0.5 * lambda * lambda).exp();
    for e in 1..n {
        f[(0, e)] = lambda * f[(0, e - 1)] / (e as f64).sqrt();
    }
    for g in 0..n - 1 {
        let norm = ((g + 1) as f64).sqrt().recip();
        f[(g + 1, 0)] = -lambda * f[(g, 0)] * norm;
        for e in 1..n {
            f[(g + 1, e)] = (-lambda * f[(g, e)] + (e as f64).sqrt() * f[(g, e - 1)]) * norm;
        }
    }
    f
}

/// Overlap between level `nu_g` of the undisplaced oscillator and level
/// `nu_e` of the oscillator shifted by `displacement` (dimensionless).
pub fn fc_overlap(nu_g: usize, nu_e: usize, displacement: f64) -> Result<f64> {
    let top = nu_g.max(nu_e);
    if top >= FC_LEVEL_CAP {
        return Err(Error::LevelCap { level: top, cap: FC_LEVEL_CAP });
    }
    if !displacement.is_finite() {
        return Err(Error::invalid("displacement", "must be finite"));
    }
    Ok(fc_table(top + 1, displacement / SQRT_2)[(nu_g, nu_e)])
}

/// Two-mode overlap matrix with ground levels as rows and displaced levels
/// as columns; undisplaced modes contribute a Kronecker delta.
pub fn fc_matrix(basis: &VibronicBasis, modes: DisplacedModes, delta: f64) -> DMatrix<f64> {
    let f = fc_table(basis.n_max(), delta);
    let n = basis.dim();
    DMatrix::from_fn(n, n, |r, c| {
        let (ra, rb) = basis.levels(r);
        let (ca, cb) = basis.levels(c);
        let fa = || f[(ra, ca)];
        let fb = || f[(rb, cb)];
        match modes {
            DisplacedModes::A if rb == cb => fa(),
            DisplacedModes::B if ra == ca => fb(),
            DisplacedModes::Both => fa() * fb(),
            _ => 0.0,
        }
    })
}

/// `ε_offset + ω(ν_a + ν_b)` over the basis.
pub fn manifold_energies(params: &ModelParams, basis: &VibronicBasis, state: ElectronicState) -> DVector<f64> {
    let offset = params.offset(state);
    DVector::from_fn(basis.dim(), |i, _| offset + params.omega * basis.quanta(i) as f64)
}

/// `exp(-2πi·cycles)` with the integer part of `cycles` removed first, so
/// whole periods return exactly to the starting phase.
fn phase_of_cycles(cycles: f64) -> C64 {
    let frac = cycles - cycles.round();
    C64::from_polar(1.0, -TAU * frac)
}

/// Diagonal of `exp(-iH₀t)` in the ground manifold.
pub fn ground_propagator(params: &ModelParams, basis: &VibronicBasis, t: f64) -> DVector<C64> {
    let cycles = params.omega * t / TAU;
    DVector::from_fn(basis.dim(), |i, _| phase_of_cycles(cycles * basis.quanta(i) as f64))
}

/// Diagonal of `exp(-iH₂t)` in the two-exciton manifold.
pub fn two_exciton_propagator(params: &ModelParams, basis: &VibronicBasis, t: f64) -> DVector<C64> {
    let offset = C64::from_polar(1.0, -params.eps2 * t);
    ground_propagator(params, basis, t).map(|p| p * offset)
}

/// Free evolution in the one-exciton manifold.
///
/// The Hamiltonian acts on `(site-1 amplitudes, site-1′ amplitudes)`, each
/// in its own site eigenbasis; the diagonal blocks are the site energies and
/// the coupling block is `J·⟨(ν)_{1′}|(ν̄)_1⟩`.
#[derive(Clone, Debug)]
pub struct ExcitonEvolution {
    dim: usize,
    kind: EvolutionKind,
}

#[derive(Clone, Debug)]
enum EvolutionKind {
    Diagonal(DVector<f64>),
    Eigen { values: DVector<f64>, vectors: DMatrix<f64> },
}

impl ExcitonEvolution {
    pub fn new(params: &ModelParams, basis: &VibronicBasis) -> Self {
        let h = exciton_hamiltonian(params, basis);
        let dim = basis.dim();
        let kind = if params.coupling == 0.0 {
            EvolutionKind::Diagonal(h.diagonal())
        } else {
            assert!(
                (&h - h.transpose()).amax() == 0.0,
                "one-exciton Hamiltonian must be symmetric"
            );
            let eig = SymmetricEigen::new(h);
            EvolutionKind::Eigen { values: eig.eigenvalues, vectors: eig.eigenvectors }
        };
        ExcitonEvolution { dim, kind }
    }

    /// Applies `exp(-iH t)` to the pair of site components.
    pub fn apply(&self, t: f64, site1: &DVector<C64>, site1p: &DVector<C64>) -> (DVector<C64>, DVector<C64>) {
        let n = self.dim;
        match &self.kind {
            EvolutionKind::Diagonal(e) => {
                let phase = |k: usize| C64::from_polar(1.0, -e[k] * t);
                (
                    DVector::from_fn(n, |i, _| site1[i] * phase(i)),
                    DVector::from_fn(n, |i, _| site1p[i] * phase(n + i)),
                )
            }
            EvolutionKind::Eigen { values, vectors } => {
                let mut psi = DVector::<C64>::zeros(2 * n);
                psi.rows_mut(0, n).copy_from(site1);
                psi.rows_mut(n, n).copy_from(site1p);
                let (re, im) = split(&psi);
                let mut coeff_re = vectors.tr_mul(&re);
                let mut coeff_im = vectors.tr_mul(&im);
                for k in 0..2 * n {
                    let p = C64::from_polar(1.0, -values[k] * t);
                    let c = C64::new(coeff_re[k], coeff_im[k]) * p;
                    coeff_re[k] = c.re;
                    coeff_im[k] = c.im;
                }
                let out_re = vectors * coeff_re;
                let out_im = vectors * coeff_im;
                let out = DVector::from_fn(2 * n, |i, _| C64::new(out_re[i], out_im[i]));
                (out.rows(0, n).into_owned(), out.rows(n, n).into_owned())
            }
        }
    }

    /// Dense `exp(-iH t)` in the `(site 1, site 1′)` block layout.
    pub fn matrix(&self, t: f64) -> DMatrix<C64> {
        match &self.kind {
            EvolutionKind::Diagonal(e) => DMatrix::from_diagonal(&e.map(|x| C64::from_polar(1.0, -x * t))),
            EvolutionKind::Eigen { values, vectors } => {
                let v = vectors.map(|x| C64::new(x, 0.0));
                let phased = DMatrix::from_fn(v.nrows(), v.ncols(), |r, c| v[(r, c)] * C64::from_polar(1.0, -values[c] * t));
                phased * v.transpose()
            }
        }
    }
}

fn split(v: &DVector<C64>) -> (DVector<f64>, DVector<f64>) {
    (v.map(|c| c.re), v.map(|c| c.im))
}

/// Real symmetric one-exciton Hamiltonian in the `(site 1, site 1′)` layout.
pub fn exciton_hamiltonian(params: &ModelParams, basis: &VibronicBasis) -> DMatrix<f64> {
    let n = basis.dim();
    let f = fc_table(basis.n_max(), params.delta);
    let e1 = manifold_energies(params, basis, ElectronicState::Exciton(Site::One));
    let e1p = manifold_energies(params, basis, ElectronicState::Exciton(Site::OnePrime));
    let mut h = DMatrix::zeros(2 * n, 2 * n);
    for i in 0..n {
        h[(i, i)] = e1[i];
        h[(n + i, n + i)] = e1p[i];
    }
    if params.coupling != 0.0 {
        // ⟨(ν_a)_g (ν_b)_e | (ν̄_a)_e (ν̄_b)_g⟩ = F[ν_a, ν̄_a] · F[ν̄_b, ν_b]
        for r in 0..n {
            let (ra, rb) = basis.levels(r);
            for c in 0..n {
                let (ca, cb) = basis.levels(c);
                let v = params.coupling * (f[(ra, ca)] * f[(cb, rb)]);
                h[(n + r, c)] = v;
                h[(c, n + r)] = v;
            }
        }
    }
    h
}

/// Largest modulus among complex entries.
pub fn max_abs<'a>(values: impl IntoIterator<Item = &'a C64>) -> f64 {
    values.into_iter().fold(0.0, |m, z| m.max(z.norm()))
}

/// Dense `exp(-iH_ex t)` for the one-exciton manifold.
pub fn one_exciton_propagator(params: &ModelParams, basis: &VibronicBasis, t: f64) -> Result<DMatrix<C64>> {
    params.validate()?;
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::invalid("t", format!("must be non-negative, got {t}")));
    }
    Ok(ExcitonEvolution::new(params, basis).matrix(t))
}

/// Model, basis and every quantity derived from them, built once and shared
/// read-only.
#[derive(Clone, Debug)]
pub struct DimerModel {
    params: ModelParams,
    basis: VibronicBasis,
    fc: Arc<DMatrix<f64>>,
    evolution: Arc<ExcitonEvolution>,
}

impl DimerModel {
    pub fn new(params: ModelParams, basis: VibronicBasis) -> Result<Self> {
        params.validate()?;
        Ok(DimerModel {
            params,
            basis,
            fc: Arc::new(fc_table(basis.n_max(), params.delta)),
            evolution: Arc::new(ExcitonEvolution::new(&params, &basis)),
        })
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn basis(&self) -> &VibronicBasis {
        &self.basis
    }

    /// Single-mode overlap table `⟨g|e⟩`, rows ground.
    pub fn fc(&self) -> &DMatrix<f64> {
        &self.fc
    }

    pub fn evolution(&self) -> &ExcitonEvolution {
        &self.evolution
    }

    /// Same model with the site labels exchanged.
    pub fn relabeled(&self) -> Result<Self> {
        DimerModel::new(self.params.relabeled(), self.basis)
    }
}

/// Bra- or ket-side wave packet.
#[derive(Clone, Debug, PartialEq)]
pub enum PathwayState {
    Ground(DVector<C64>),
    OneExciton { site1: DVector<C64>, site1p: DVector<C64> },
    TwoExciton(DVector<C64>),
}

impl PathwayState {
    /// Vibronic ground state `|(0, 0)₀⟩`.
    pub fn initial(basis: &VibronicBasis) -> Self {
        let mut v = DVector::zeros(basis.dim());
        v[0] = C64::new(1.0, 0.0);
        PathwayState::Ground(v)
    }

    pub fn manifold(&self) -> Manifold {
        match self {
            PathwayState::Ground(_) => Manifold::Ground,
            PathwayState::OneExciton { .. } => Manifold::OneExciton,
            PathwayState::TwoExciton(_) => Manifold::TwoExciton,
        }
    }

    /// Amplitude vector on one electronic state, if the manifold matches.
    pub fn component(&self, state: ElectronicState) -> Option<&DVector<C64>> {
        match (self, state) {
            (PathwayState::Ground(v), ElectronicState::Ground) => Some(v),
            (PathwayState::TwoExciton(v), ElectronicState::Biexciton) => Some(v),
            (PathwayState::OneExciton { site1, .. }, ElectronicState::Exciton(Site::One)) => Some(site1),
            (PathwayState::OneExciton { site1p, .. }, ElectronicState::Exciton(Site::OnePrime)) => Some(site1p),
            _ => None,
        }
    }

    pub fn norm_squared(&self) -> f64 {
        match self {
            PathwayState::Ground(v) | PathwayState::TwoExciton(v) => v.norm_squared(),
            PathwayState::OneExciton { site1, site1p } => site1.norm_squared() + site1p.norm_squared(),
        }
    }

    /// Advances the state by `t` under its manifold's free Hamiltonian.
    /// `t = 0` is the identity exactly.
    pub fn evolve(self, model: &DimerModel, t: f64) -> Self {
        if t == 0.0 {
            return self;
        }
        let (p, b) = (model.params(), model.basis());
        match self {
            PathwayState::Ground(v) => PathwayState::Ground(v.component_mul(&ground_propagator(p, b, t))),
            PathwayState::TwoExciton(v) => PathwayState::TwoExciton(v.component_mul(&two_exciton_propagator(p, b, t))),
            PathwayState::OneExciton { site1, site1p } => {
                let (site1, site1p) = model.evolution().apply(t, &site1, &site1p);
                PathwayState::OneExciton { site1, site1p }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use super::*;

    fn caption_params(coupling: f64) -> ModelParams {
        ModelParams::homodimer(1.0, 2.5f64.sqrt(), 0.0, coupling).unwrap()
    }

    /// Overlap of the undisplaced ground wavefunction with one shifted by
    /// `x0`, by trapezoidal quadrature on the position grid.
    fn ground_overlap_by_quadrature(x0: f64) -> f64 {
        let psi = |x: f64| PI.powf(-0.25) * (-0.5 * x * x).exp();
        let h = 1e-3;
        (-20_000..=20_000).map(|k| {
            let x = k as f64 * h;
            psi(x) * psi(x - x0) * h
        })
        .sum()
    }

    #[test]
    fn zero_displacement_is_identity() {
        let f = fc_table(6, 0.0);
        assert_eq!(f, DMatrix::identity(6, 6));
        let basis = VibronicBasis::new(3).unwrap();
        assert_eq!(fc_matrix(&basis, DisplacedModes::Both, 0.0), DMatrix::identity(9, 9));
    }

    #[test]
    fn ground_overlap_matches_position_space() {
        let x0 = 5f64.sqrt();
        let v = fc_overlap(0, 0, x0).unwrap();
        assert!((v - (-1.25f64).exp()).abs() < 1e-15);
        assert!((v - 0.286_504_796_860_190_1).abs() < 1e-15);
        assert!((v - ground_overlap_by_quadrature(x0)).abs() < 1e-12);
    }

    #[test]
    fn first_excited_overlap_has_sign_of_shift() {
        assert!(fc_overlap(0, 1, 1.0).unwrap() > 0.0);
        assert!(fc_overlap(1, 0, 1.0).unwrap() < 0.0);
    }

    #[test]
    fn row_completeness_at_thirty_levels() {
        let f = fc_table(30, 2.5f64.sqrt());
        let s: f64 = (0..30).map(|e| f[(0, e)].powi(2)).sum();
        assert!((s - 1.0).abs() < 1e-10);
    }

    fn orthogonality_defect(n: usize, block: usize) -> f64 {
        let f = fc_table(n, 2.5f64.sqrt());
        (f.transpose() * &f - DMatrix::<f64>::identity(n, n)).view((0, 0), (block, block)).amax()
    }

    #[test]
    fn interior_block_is_orthogonal() {
        // reference defects from the closed-form Laguerre overlaps at 40 digits
        assert!(orthogonality_defect(30, 7) < 1e-8);
        let d10 = orthogonality_defect(30, 10);
        assert!((d10 - 6.848_436_129_147_59e-7).abs() < 1e-6 * d10, "{d10}");
        let d = orthogonality_defect(30, 6);
        assert!((d - 2.741_822_582_525_59e-12).abs() < 1e-3 * d, "{d}");
    }

    #[test]
    fn truncation_defect_shrinks_when_basis_doubles() {
        assert!(orthogonality_defect(32, 8) <= 0.5 * orthogonality_defect(16, 8));
        assert!((orthogonality_defect(24, 8) - 6.864_820_408_086_14e-5).abs() < 1e-12);
    }

    #[test]
    fn overlap_matches_laguerre_form() {
        assert!((fc_overlap(3, 5, 5f64.sqrt()).unwrap() + 0.316_985_412_279_268_6).abs() < 1e-15);
    }

    #[test]
    fn level_cap_is_reported() {
        assert!(matches!(fc_overlap(FC_LEVEL_CAP, 0, 1.0), Err(Error::LevelCap { .. })));
        assert!(VibronicBasis::new(0).is_err());
    }

    #[test]
    fn fc_matrix_mode_a_factorises() {
        let basis = VibronicBasis::new(4).unwrap();
        let m = fc_matrix(&basis, DisplacedModes::A, 0.8);
        let x0 = 0.8 * SQRT_2;
        for r in 0..basis.dim() {
            for c in 0..basis.dim() {
                let (ra, rb) = basis.levels(r);
                let (ca, cb) = basis.levels(c);
                let expected = if rb == cb { fc_overlap(ra, ca, x0).unwrap() } else { 0.0 };
                assert!((m[(r, c)] - expected).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn basis_index_round_trip() {
        let basis = VibronicBasis::new(5).unwrap();
        for i in 0..basis.dim() {
            let (a, b) = basis.levels(i);
            assert_eq!(basis.index(a, b), i);
        }
        assert_eq!(basis.index(1, 0), 5);
    }

    #[test]
    fn energies_examples() {
        let p = ModelParams::homodimer(1.0, 1.0, 10.0, 0.0).unwrap();
        let basis = VibronicBasis::new(4).unwrap();
        assert_eq!(manifold_energies(&p, &basis, ElectronicState::Ground)[0], 0.0);
        assert_eq!(manifold_energies(&p, &basis, ElectronicState::Exciton(Site::One))[basis.index(2, 1)], 13.0);
    }

    #[test]
    fn ground_propagator_examples() {
        let p = caption_params(0.0);
        let basis = VibronicBasis::new(4).unwrap();
        assert!(ground_propagator(&p, &basis, 0.0).iter().all(|&z| z == C64::new(1.0, 0.0)));
        for z in ground_propagator(&p, &basis, p.period()).iter() {
            assert!((z - C64::new(1.0, 0.0)).norm() < 1e-14);
        }
        let z = ground_propagator(&p, &basis, 0.5 * PI)[basis.index(2, 1)];
        assert!((z - C64::i()).norm() < 1e-15);
    }

    #[test]
    fn exciton_propagator_at_zero_is_identity() {
        let basis = VibronicBasis::new(4).unwrap();
        let u = one_exciton_propagator(&caption_params(0.3), &basis, 0.0).unwrap();
        assert!(max_abs(&(u - DMatrix::identity(32, 32))) < 1e-13);
    }

    #[test]
    fn uncoupled_exciton_propagator_does_not_mix_sites() {
        let basis = VibronicBasis::new(4).unwrap();
        let u = one_exciton_propagator(&caption_params(0.0), &basis, 1.7).unwrap();
        let n = basis.dim();
        assert_eq!(max_abs(&u.view((0, n), (n, n))), 0.0);
        assert_eq!(max_abs(&u.view((n, 0), (n, n))), 0.0);
    }

    #[test]
    fn exciton_propagator_is_unitary_with_group_property() {
        let basis = VibronicBasis::new(5).unwrap();
        let evo = ExcitonEvolution::new(&caption_params(0.37), &basis);
        let u1 = evo.matrix(0.8);
        let u2 = evo.matrix(1.9);
        let id = DMatrix::<C64>::identity(50, 50);
        assert!(max_abs(&(u1.adjoint() * &u1 - &id)) < 1e-12);
        assert!(max_abs(&(evo.matrix(2.7) - &u1 * &u2)) < 1e-10);
    }

    /// Fixed-step RK4 on `i dψ/dt = Hψ`.
    fn rk4(h: &DMatrix<f64>, psi0: &DVector<C64>, t: f64, steps: usize) -> DVector<C64> {
        let hc = h.map(|x| C64::new(x, 0.0));
        let dt = t / steps as f64;
        let rhs = |psi: &DVector<C64>| -> DVector<C64> { (&hc * psi) * C64::new(0.0, -1.0) };
        let (half, full, sixth) = (C64::from(0.5 * dt), C64::from(dt), C64::from(dt / 6.0));
        let two = C64::from(2.0);
        let mut psi = psi0.clone();
        for _ in 0..steps {
            let k1 = rhs(&psi);
            let k2 = rhs(&(&psi + &k1 * half));
            let k3 = rhs(&(&psi + &k2 * half));
            let k4 = rhs(&(&psi + &k3 * full));
            psi += (k1 + k2 * two + k3 * two + k4) * sixth;
        }
        psi
    }

    #[test]
    fn coupled_transfer_matches_time_stepping() {
        let params = caption_params(0.2);
        let basis = VibronicBasis::new(6).unwrap();
        let model = DimerModel::new(params, basis).unwrap();
        let n = basis.dim();
        let start = DVector::from_fn(n, |i, _| C64::new(model.fc()[(0, basis.level(i, Mode::A))] * if basis.level(i, Mode::B) == 0 { 1.0 } else { 0.0 }, 0.0));
        let state = PathwayState::OneExciton { site1: start.clone(), site1p: DVector::zeros(n) }.evolve(&model, 3.0);
        let mut psi0 = DVector::zeros(2 * n);
        psi0.rows_mut(0, n).copy_from(&start);
        let oracle = rk4(&exciton_hamiltonian(&params, &basis), &psi0, 3.0, 30_000);
        let transferred = oracle.rows(n, n).norm_squared();
        let PathwayState::OneExciton { site1p, .. } = state else { unreachable!() };
        assert!(transferred > 1e-3);
        assert!((site1p.norm_squared() - transferred).abs() < 1e-8);
    }

    #[test]
    fn homodimer_hamiltonian_is_label_symmetric() {
        // exchanging sites together with modes maps H onto itself
        let params = caption_params(0.4);
        let basis = VibronicBasis::new(4).unwrap();
        let h = exciton_hamiltonian(&params, &basis);
        let n = basis.dim();
        let swap = |k: usize| {
            let (site, i) = (k / n, k % n);
            let (a, b) = basis.levels(i);
            (1 - site) * n + basis.index(b, a)
        };
        for r in 0..2 * n {
            for c in 0..2 * n {
                assert_eq!(h[(r, c)], h[(swap(r), swap(c))]);
            }
        }
    }

    #[test]
    fn parameters_are_validated() {
        assert!(ModelParams::new(0.0, 1.0, 0.0, 0.0, 0.0).is_err());
        assert!(ModelParams::new(1.0, -1.0, 0.0, 0.0, 0.0).is_err());
        assert!(ModelParams::new(1.0, 1.0, 0.0, 0.0, 0.0).unwrap().with_dipole(0.0).validate().is_err());
        assert!(PulseParams::new(1.0, 0.0, 0.0).is_err());
        assert_eq!(ModelParams::new(1.0, 1.0, 2.0, 3.0, 0.0).unwrap().eps2, 5.0);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(32))]

            #[test]
            fn exciton_propagator_is_unitary(j in -1.0..1.0f64, t in 0.0..20.0f64) {
                let params = caption_params(j);
                let u = one_exciton_propagator(&params, &VibronicBasis::new(5).unwrap(), t).unwrap();
                let id = DMatrix::<C64>::identity(u.nrows(), u.ncols());
                prop_assert!(max_abs(&(u.adjoint() * &u - id)) < 1e-12);
            }

            #[test]
            fn exciton_propagator_composes(j in -1.0..1.0f64, t1 in -10.0..10.0f64, t2 in -10.0..10.0f64) {
                let params = caption_params(j);
                let basis = VibronicBasis::new(5).unwrap();
                let evo = ExcitonEvolution::new(&params, &basis);
                prop_assert!(max_abs(&(evo.matrix(t1 + t2) - evo.matrix(t2) * evo.matrix(t1))) < 1e-10);
            }

            #[test]
            fn overlap_rows_are_normalised_deep_in_the_basis(delta in 0.0..1.8f64, g in 0usize..4) {
                let f = fc_table(40, delta);
                let row: f64 = (0..40).map(|e| f[(g, e)].powi(2)).sum();
                prop_assert!((row - 1.0).abs() < 1e-10);
            }

            #[test]
            fn ground_phases_return_after_whole_periods(k in -50i32..50, nu_a in 0usize..6, nu_b in 0usize..6) {
                let params = caption_params(0.0);
                let basis = VibronicBasis::new(6).unwrap();
                let p = ground_propagator(&params, &basis, k as f64 * params.period());
                prop_assert!((p[basis.index(nu_a, nu_b)] - C64::new(1.0, 0.0)).norm() < 1e-12);
            }
        }
    }
}
