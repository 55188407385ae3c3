//! Faddeeva function `w(z) = exp(-z²) erfc(-iz)`.
//!
//! First-quadrant values come from the Poppe–Wijers scheme: a Maclaurin
//! series near the origin, Gautschi's truncated Laplace continued fraction
//! with a Taylor correction in the intermediate region, and the bare
//! continued fraction far from the origin. The other quadrants follow from
//! `w(-conj z) = conj w(z)` and `w(-z) = 2 exp(-z²) - w(z)`.

use num_complex::Complex64 as C64;

use super::TWO_OVER_SQRT_PI;

pub fn faddeeva(z: C64) -> C64 {
    let x = z.re.abs();
    let y = z.im.abs();
    let w = first_quadrant(x, y);

    if z.im < 0.0 {
        // w(z) = 2 exp(-z²) - w(-z), and -z lies in the upper half plane
        let upper = if z.re > 0.0 { w.conj() } else { w };
        let exponent = C64::new((y - x) * (y + x), -2.0 * z.re * z.im);
        2.0 * exponent.exp() - upper
    } else if z.re < 0.0 {
        w.conj()
    } else {
        w
    }
}

/// `w(x)` for real `x`. The real part is exactly `exp(-x²)` and the
/// imaginary part is odd in `x`, so `w(-x) == conj(w(x))` bit for bit.
pub fn faddeeva_real(x: f64) -> C64 {
    let w = first_quadrant(x.abs(), 0.0);
    if x < 0.0 {
        w.conj()
    } else {
        w
    }
}

fn first_quadrant(x: f64, y: f64) -> C64 {
    let xs = x / 6.3;
    let ys = y / 4.4;
    let mut qrho = xs * xs + ys * ys;

    if qrho < 0.085264 {
        let xquad = (x - y) * (x + y);
        let yquad = 2.0 * x * y;
        // exp(z²)·w(z) = 1 + (2i/√π) z Σ z^{2k} / (k! (2k+1))
        qrho = (1.0 - 0.85 * ys) * qrho.sqrt();
        let n = (6.0 + 72.0 * qrho).round() as usize + 4;
        let mut j = (2 * n + 1) as f64;
        let mut xsum = 1.0 / j;
        let mut ysum = 0.0;
        for i in (1..=n).rev() {
            j -= 2.0;
            let fi = i as f64;
            let xaux = (xsum * xquad - ysum * yquad) / fi;
            ysum = (xsum * yquad + ysum * xquad) / fi;
            xsum = xaux + 1.0 / j;
        }
        let u1 = 1.0 - TWO_OVER_SQRT_PI * (xsum * y + ysum * x);
        let v1 = TWO_OVER_SQRT_PI * (xsum * x - ysum * y);
        let daux = (-xquad).exp();
        let u2 = daux * yquad.cos();
        let v2 = -daux * yquad.sin();
        let mut w = C64::new(u1 * u2 - v1 * v2, u1 * v2 + v1 * u2);
        if y == 0.0 {
            w.re = (-x * x).exp();
        }
        return w;
    }

    let (h, kapn, nu) = if qrho > 1.0 {
        let rho = qrho.sqrt();
        (0.0, 0usize, (3.0 + 1442.0 / (26.0 * rho + 77.0)) as usize + 6)
    } else {
        let rho = (1.0 - ys) * (1.0 - qrho).sqrt();
        (
            1.88 * rho,
            (7.0 + 34.0 * rho).round() as usize + 4,
            (16.0 + 26.0 * rho).round() as usize + 6,
        )
    };
    let h2 = 2.0 * h;
    let use_taylor = h > 0.0;
    let mut qlambda = if use_taylor { h2.powi(kapn as i32) } else { 0.0 };

    let (mut rx, mut ry, mut sx, mut sy) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for n in (0..=nu).rev() {
        let np1 = (n + 1) as f64;
        let tx = y + h + np1 * rx;
        let ty = x - np1 * ry;
        let c = 0.5 / (tx * tx + ty * ty);
        rx = c * tx;
        ry = c * ty;
        if use_taylor && n <= kapn {
            let tx = qlambda + sx;
            let new_sx = rx * tx - ry * sy;
            sy = ry * tx + rx * sy;
            sx = new_sx;
            qlambda /= h2;
        }
    }

    let mut w = if use_taylor {
        C64::new(TWO_OVER_SQRT_PI * sx, TWO_OVER_SQRT_PI * sy)
    } else {
        C64::new(TWO_OVER_SQRT_PI * rx, TWO_OVER_SQRT_PI * ry)
    };
    if y == 0.0 {
        w.re = (-x * x).exp();
    }
    w
}
