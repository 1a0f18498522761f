//! Complex Γ and ζ.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

const BORWEIN_TERMS: usize = 60;
const POLE_EPS: f64 = 1e-12;

/// Whether `z` is (numerically) one of `0, -1, -2, …`.
pub fn is_nonpositive_integer(z: Complex64) -> bool {
    z.im.abs() < POLE_EPS && z.re < 0.5 && (z.re - z.re.round()).abs() < POLE_EPS
}

fn lanczos(z: Complex64) -> Complex64 {
    let z = z - 1.0;
    let mut x = Complex64::new(LANCZOS[0], 0.0);
    for (i, c) in LANCZOS.iter().enumerate().skip(1) {
        x += c / (z + i as f64);
    }
    let t = z + LANCZOS_G + 0.5;
    (2.0 * PI).sqrt() * t.powc(z + 0.5) * (-t).exp() * x
}

/// `Γ(z)`, by the Lanczos approximation and the reflection formula.
pub fn gamma(z: Complex64) -> Result<Complex64> {
    if is_nonpositive_integer(z) {
        return Err(Error::PoleArgument(format!("Γ at {z}")));
    }
    if z.re < 0.5 {
        let s = (PI * z).sin();
        Ok(PI / (s * lanczos(1.0 - z)))
    } else {
        Ok(lanczos(z))
    }
}

/// `1/Γ(z)`, an entire function: zero at the poles of `Γ`.
pub fn rgamma(z: Complex64) -> Complex64 {
    if is_nonpositive_integer(z) {
        return Complex64::new(0.0, 0.0);
    }
    if z.re < 0.5 {
        (PI * z).sin() * lanczos(1.0 - z) / PI
    } else {
        1.0 / lanczos(z)
    }
}

fn borwein_weights(n: usize) -> Vec<f64> {
    let mut d = Vec::with_capacity(n + 1);
    let mut term = 1.0 / n as f64;
    let mut acc = term;
    d.push(n as f64 * acc);
    for i in 1..=n {
        term *= (n + i - 1) as f64 * (n - i + 1) as f64 * 4.0 / ((2 * i - 1) as f64 * (2 * i) as f64);
        acc += term;
        d.push(n as f64 * acc);
    }
    d
}

/// `ζ(s)` for `Re s ≥ 0` from the alternating η series with Borwein's
/// acceleration.
fn zeta_borwein(s: Complex64) -> Complex64 {
    let n = BORWEIN_TERMS;
    let d = borwein_weights(n);
    let mut sum = Complex64::new(0.0, 0.0);
    for k in 0..n {
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        sum += sign * (d[k] - d[n]) * Complex64::new((k + 1) as f64, 0.0).powc(-s);
    }
    let eta = -sum / d[n];
    eta / (1.0 - Complex64::new(2.0, 0.0).powc(1.0 - s))
}

/// The Riemann zeta function, continued to all `s ≠ 1`.
pub fn zeta(s: Complex64) -> Result<Complex64> {
    if (s - 1.0).norm() < POLE_EPS {
        return Err(Error::PoleArgument("ζ at 1".into()));
    }
    if s.re >= 0.0 {
        return Ok(zeta_borwein(s));
    }
    let one_minus = 1.0 - s;
    let factor = Complex64::new(2.0, 0.0).powc(s)
        * Complex64::new(PI, 0.0).powc(s - 1.0)
        * (PI * s / 2.0).sin()
        * gamma(one_minus)?;
    Ok(factor * zeta_borwein(one_minus))
}
