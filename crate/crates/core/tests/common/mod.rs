//! Brute-force reference for the pulse propagator blocks: vibrational
//! overlaps from position-space quadrature of Hermite functions and the
//! time integrals from a Richardson-extrapolated trapezoid grid.

use std::collections::HashMap;
use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use ppwpi_core::{BlockKind, DimerModel, ElectronicState, PulseParams, Site};

/// Hermite functions `ψ_0..ψ_{n-1}` at `x`.
fn hermite_functions(n: usize, x: f64) -> Vec<f64> {
    let mut psi = vec![0.0; n];
    psi[0] = PI.powf(-0.25) * (-0.5 * x * x).exp();
    if n > 1 {
        psi[1] = 2f64.sqrt() * x * psi[0];
    }
    for k in 1..n.saturating_sub(1) {
        let kf = k as f64;
        psi[k + 1] = (2.0 / (kf + 1.0)).sqrt() * x * psi[k] - (kf / (kf + 1.0)).sqrt() * psi[k - 1];
    }
    psi
}

/// `⟨ψ_m(x + s₁)|ψ_n(x + s₂)⟩` for all `m, n < levels`.
fn shifted_overlaps(levels: usize, s1: f64, s2: f64) -> DMatrix<f64> {
    let (lo, hi, dx) = (-25.0, 25.0, 1e-3);
    let steps = ((hi - lo) / dx) as usize;
    let mut out = DMatrix::<f64>::zeros(levels, levels);
    for i in 0..=steps {
        let x = lo + i as f64 * dx;
        let a = hermite_functions(levels, x + s1);
        let b = hermite_functions(levels, x + s2);
        for m in 0..levels {
            for n in 0..levels {
                out[(m, n)] += a[m] * b[n] * dx;
            }
        }
    }
    // orthogonal pairs come out at quadrature noise; make them exact zeros
    out.map(|v| if v.abs() < 1e-14 { 0.0 } else { v })
}

/// Which modes each electronic state displaces.
fn displaced(state: ElectronicState) -> (bool, bool) {
    match state {
        ElectronicState::Ground => (false, false),
        ElectronicState::Exciton(Site::One) => (true, false),
        ElectronicState::Exciton(Site::OnePrime) => (false, true),
        ElectronicState::Biexciton => (true, true),
    }
}

pub struct BlockOracle<'a> {
    model: &'a DimerModel,
    pulse: &'a PulseParams,
    /// `[displaced?][displaced?]` single-mode overlap tables.
    overlaps: [[DMatrix<f64>; 2]; 2],
    cache: HashMap<(u64, u64), C64>,
}

impl<'a> BlockOracle<'a> {
    pub fn new(model: &'a DimerModel, pulse: &'a PulseParams) -> Self {
        let n = model.basis().n_max();
        // excited-state minima sit at -x₀
        let x0 = model.params().displacement();
        let shift = |d: bool| if d { x0 } else { 0.0 };
        let table = |a: bool, b: bool| shifted_overlaps(n, shift(a), shift(b));
        BlockOracle {
            model,
            pulse,
            overlaps: [[table(false, false), table(false, true)], [table(true, false), table(true, true)]],
            cache: HashMap::new(),
        }
    }

    /// `⟨ν|ν̄⟩` between eigenstates of two electronic states.
    fn overlap(&self, bra: ElectronicState, i: usize, ket: ElectronicState, j: usize) -> f64 {
        let basis = self.model.basis();
        let (ba, bb) = displaced(bra);
        let (ka, kb) = displaced(ket);
        let (ia, ib) = basis.levels(i);
        let (ja, jb) = basis.levels(j);
        self.overlaps[ba as usize][ka as usize][(ia, ja)] * self.overlaps[bb as usize][kb as usize][(ib, jb)]
    }

    fn energy(&self, state: ElectronicState, i: usize) -> f64 {
        let p = self.model.params();
        p.offset(state) + p.omega * self.model.basis().quanta(i) as f64
    }

    fn envelope(&self, t: f64) -> f64 {
        (-t * t / (2.0 * self.pulse.sigma * self.pulse.sigma)).exp()
    }

    fn step(&self, phases: &[f64]) -> (f64, usize) {
        let sigma = self.pulse.sigma;
        let half = 8.0 * sigma;
        let fastest = phases.iter().fold(1.0 / sigma, |m, p| m.max(p.abs()));
        let h = (sigma / 200.0).min(0.01 / fastest);
        let n = (2.0 * half / h).ceil() as usize;
        (half, n)
    }

    /// `∫ f(t) e^{iφt} dt`
    fn single(&self, phi: f64) -> C64 {
        let (half, n) = self.step(&[phi]);
        let h = 2.0 * half / n as f64;
        let sum: C64 = (0..=n)
            .map(|i| {
                let t = -half + i as f64 * h;
                let w = if i == 0 || i == n { 0.5 } else { 1.0 };
                C64::from_polar(self.envelope(t) * w, phi * t)
            })
            .sum();
        sum * h
    }

    /// `∫dt₂ ∫_{t₁<t₂} dt₁ f(t₂) f(t₁) e^{iφ₂t₂ + iφ₁t₁}` by nested cumulative
    /// trapezoids.
    fn ordered_trapezoid(&self, phi1: f64, phi2: f64, n: usize, half: f64) -> C64 {
        let h = 2.0 * half / n as f64;
        let g = |t: f64, phi: f64| C64::from_polar(self.envelope(t), phi * t);
        let mut inner = C64::new(0.0, 0.0);
        let mut prev = g(-half, phi1);
        let mut outer = C64::new(0.0, 0.0);
        for i in 1..=n {
            let t = -half + i as f64 * h;
            let cur = g(t, phi1);
            inner += (prev + cur) * (0.5 * h);
            prev = cur;
            let w = if i == n { 0.5 } else { 1.0 };
            outer += g(t, phi2) * inner * w;
        }
        outer * h
    }

    fn ordered(&mut self, phi1: f64, phi2: f64) -> C64 {
        let key = (phi1.to_bits(), phi2.to_bits());
        if let Some(v) = self.cache.get(&key) {
            return *v;
        }
        let (half, n) = self.step(&[phi1, phi2]);
        let coarse = self.ordered_trapezoid(phi1, phi2, n, half);
        let fine = self.ordered_trapezoid(phi1, phi2, 2 * n, half);
        let v = (fine * 4.0 - coarse) / 3.0;
        self.cache.insert(key, v);
        v
    }

    fn prefactor(&self) -> C64 {
        C64::new(0.0, 0.5 * self.pulse.amplitude * self.model.params().dipole)
    }

    /// `(source, intermediate, target, first action absorbs)` of a
    /// second-order block.
    fn route(kind: BlockKind) -> (ElectronicState, ElectronicState, ElectronicState, bool) {
        use ElectronicState::{Biexciton, Exciton, Ground};
        match kind {
            BlockKind::Gsb(s) => (Ground, Exciton(s), Ground, true),
            BlockKind::Se { from, to } => (Exciton(from), Ground, Exciton(to), false),
            BlockKind::Esa { from, to } => (Exciton(from), Biexciton, Exciton(to), true),
            _ => unreachable!("first-order kinds have no intermediate state"),
        }
    }

    /// Reference matrix for `kind`, rows indexing the target state.
    pub fn block(&mut self, kind: BlockKind) -> DMatrix<C64> {
        let dim = self.model.basis().dim();
        let omega_c = self.pulse.omega_c;
        let c = self.prefactor();
        match kind {
            BlockKind::Up(s) | BlockKind::Down(s) => {
                let up = matches!(kind, BlockKind::Up(_));
                let (from, to) = if up { (ElectronicState::Ground, ElectronicState::Exciton(s)) } else { (ElectronicState::Exciton(s), ElectronicState::Ground) };
                let sign = if up { -1.0 } else { 1.0 };
                let phase = C64::from_polar(1.0, sign * self.pulse.phase);
                DMatrix::from_fn(dim, dim, |z, x| {
                    let ov = self.overlap(to, z, from, x);
                    if ov.abs() < 1e-300 {
                        return C64::new(0.0, 0.0);
                    }
                    let phi = self.energy(to, z) - self.energy(from, x) + sign * omega_c;
                    c * phase * ov * self.single(phi)
                })
            }
            _ => {
                let (from, via, to, absorb_first) = Self::route(kind);
                let (s1, s2) = if absorb_first { (-1.0, 1.0) } else { (1.0, -1.0) };
                let mut m = DMatrix::zeros(dim, dim);
                for z in 0..dim {
                    for x in 0..dim {
                        let mut acc = C64::new(0.0, 0.0);
                        for y in 0..dim {
                            let w = self.overlap(to, z, via, y) * self.overlap(via, y, from, x);
                            if w == 0.0 {
                                continue;
                            }
                            let phi1 = self.energy(via, y) - self.energy(from, x) + s1 * omega_c;
                            let phi2 = self.energy(to, z) - self.energy(via, y) + s2 * omega_c;
                            acc += self.ordered(phi1, phi2) * w;
                        }
                        m[(z, x)] = acc * c * c;
                    }
                }
                m
            }
        }
    }
}

/// `‖a - b‖_F / ‖b‖_F`
pub fn relative_frobenius(a: &DMatrix<C64>, b: &DMatrix<C64>) -> f64 {
    (a - b).norm() / b.norm()
}
