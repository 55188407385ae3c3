//! Complex error function and the ordered double Gaussian integral
//!
//! ```text
//! I(α, β) = ∫dτ₂ ∫_{τ₁<τ₂} dτ₁ exp{-τ₁²/2σ² + iατ₁ - τ₂²/2σ² - iβτ₂}
//!         = πσ² exp{-σ²(α²+β²)/2} (1 - erf(iσ(α+β)/2))
//! ```
//!
//! that every second-order pulse propagator reduces to.

mod faddeeva;
pub mod quadrature;

use std::f64::consts::PI;

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

pub use faddeeva::{faddeeva, faddeeva_real};

pub(crate) const TWO_OVER_SQRT_PI: f64 = std::f64::consts::FRAC_2_SQRT_PI;

/// Radius inside which `erf` is summed from its Maclaurin series.
const SERIES_RADIUS: f64 = 2.0;

/// Detunings and duration of one ordered double integral.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NestedIntegralArgs {
    /// Detuning carried by the earlier time τ₁ (rad/time).
    pub alpha: f64,
    /// Detuning carried by the later time τ₂ (rad/time).
    pub beta: f64,
    /// Gaussian pulse duration.
    pub sigma: f64,
}

impl NestedIntegralArgs {
    pub fn new(alpha: f64, beta: f64, sigma: f64) -> Result<Self> {
        let args = NestedIntegralArgs { alpha, beta, sigma };
        args.validate()?;
        Ok(args)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return Err(Error::invalid("sigma", format!("must be positive and finite, got {}", self.sigma)));
        }
        if !self.alpha.is_finite() {
            return Err(Error::invalid("alpha", "must be finite"));
        }
        if !self.beta.is_finite() {
            return Err(Error::invalid("beta", "must be finite"));
        }
        Ok(())
    }
}

/// Error function of a complex argument.
///
/// Odd symmetry is exact: the value is always computed for the
/// representative with `Re z > 0` (or `Re z = 0, Im z ≥ 0`) and negated.
pub fn complex_erf(z: C64) -> Result<C64> {
    if !(z.re.is_finite() && z.im.is_finite()) {
        return Err(Error::invalid("z", "must be finite"));
    }
    if z.re < 0.0 || (z.re == 0.0 && z.im < 0.0) {
        return complex_erf(-z).map(|v| -v);
    }

    let value = if z.norm() <= SERIES_RADIUS {
        erf_series(z)
    } else if z.re == 0.0 {
        // erf(iy) = i exp(y²) Im w(y)
        C64::new(0.0, (z.im * z.im).exp() * faddeeva_real(z.im).im)
    } else {
        // erf z = 1 - exp(-z²) w(iz), with iz in the upper half plane
        let exponent = C64::new((z.im - z.re) * (z.im + z.re), -2.0 * z.re * z.im);
        C64::new(1.0, 0.0) - exponent.exp() * faddeeva(C64::new(-z.im, z.re))
    };

    if value.re.is_finite() && value.im.is_finite() {
        Ok(value)
    } else {
        Err(Error::ErfOverflow { re: z.re, im: z.im })
    }
}

fn erf_series(z: C64) -> C64 {
    let z2 = z * z;
    let mut power = z;
    let mut sum = z;
    for k in 1..200 {
        power *= -z2 / k as f64;
        let term = power / (2 * k + 1) as f64;
        sum += term;
        if term.norm() <= 1e-17 * sum.norm() {
            break;
        }
    }
    sum * TWO_OVER_SQRT_PI
}

/// Closed form of the ordered double Gaussian integral.
///
/// Evaluated as `πσ² exp{-σ²(α-β)²/4} w(-σ(α+β)/2)`, which is the same
/// quantity with the growth of `erf` on the imaginary axis folded into the
/// Faddeeva function, so it stays finite for any detuning.
pub fn nested_gaussian_integral(args: NestedIntegralArgs) -> Result<C64> {
    args.validate()?;
    Ok(nested_unchecked(args.alpha, args.beta, args.sigma))
}

#[inline]
pub(crate) fn nested_unchecked(alpha: f64, beta: f64, sigma: f64) -> C64 {
    let diff = sigma * (alpha - beta);
    let y = 0.5 * sigma * (alpha + beta);
    PI * sigma * sigma * (-0.25 * diff * diff).exp() * faddeeva_real(-y)
}

/// Direct numerical evaluation of the ordered double integral.
///
/// The region τ₁ < τ₂ is parametrised by the centre `s = (τ₁+τ₂)/2` and the
/// separation `d = τ₂ - τ₁ ≥ 0`. The integrand is entire in `s`, so the
/// centre line is moved to `Im s = σ²(α-β)/2` where it no longer oscillates;
/// the separation runs along the real half-line. The integrand factorises in
/// these coordinates; each factor is truncated at ten widths of the envelope
/// and integrated by adaptive Gauss–Kronrod quadrature.
pub fn quadrature_oracle(args: NestedIntegralArgs) -> Result<C64> {
    args.validate()?;
    let NestedIntegralArgs { alpha, beta, sigma } = args;
    // τ₁ = s - d/2, τ₂ = s + d/2 splits the integrand into a centre factor
    // and a separation factor
    let shift = 0.5 * sigma * sigma * (alpha - beta);
    let inv_var = 1.0 / (sigma * sigma);
    let centre = |u: f64| {
        let s = C64::new(u, shift);
        (-s * s * inv_var + C64::i() * (alpha - beta) * s).exp()
    };
    let separation = |d: f64| C64::from_polar((-0.25 * d * d * inv_var).exp(), -0.5 * (alpha + beta) * d);

    let span = 10.0 * sigma;
    let tol = |scale: f64| quadrature::Tolerance { abs: 1e-17 * scale, rel: 1e-14, max_intervals: 4000 };
    // |centre| integrates to √π σ e^{-σ²(α-β)²/4}; |separation| to √π σ
    let centre_scale = PI.sqrt() * sigma * (-0.25 * (sigma * (alpha - beta)).powi(2)).exp();
    let s_part = quadrature::integrate(centre, -span, span, 8, tol(centre_scale))?;
    let d_part = quadrature::integrate(separation, 0.0, 2.0 * span, 16, tol(PI.sqrt() * sigma))?;
    Ok(s_part.value * d_part.value)
}
