use std::f64::consts::PI;

use crate::error::{Error, Result};

// Lanczos coefficients for g = 7, nine terms (the GSL set).
const LANCZOS_G: f64 = 7.0;
const LANCZOS_P: [f64; 9] = [
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

/// Gamma function on the positive half-line.
///
/// Small positive integers return the exact factorial; everything else goes
/// through the Lanczos sum, with the reflection formula below 1/2.
pub fn gamma(x: f64) -> Result<f64> {
    if !x.is_finite() || x <= 0.0 {
        return Err(Error::Domain(format!("gamma requires a finite x > 0, got {x}")));
    }
    Ok(gamma_positive(x))
}

fn gamma_positive(x: f64) -> f64 {
    if x.fract() == 0.0 && x <= 30.0 {
        return (1..x as u32).map(f64::from).product();
    }
    if x < 0.5 {
        return PI / ((PI * x).sin() * lanczos(1.0 - x));
    }
    lanczos(x)
}

fn lanczos(x: f64) -> f64 {
    let x = x - 1.0;
    let mut acc = LANCZOS_P[0];
    for (i, p) in LANCZOS_P.iter().enumerate().skip(1) {
        acc += p / (x + i as f64);
    }
    let t = x + LANCZOS_G + 0.5;
    // exp of the combined logarithm keeps t^(x+1/2) from overflowing near x = 170
    (2.0 * PI).sqrt() * ((x + 0.5) * t.ln() - t).exp() * acc
}

/// Γ(a + m) / Γ(a) as an explicit rising product, exact up to rounding.
pub fn rising_factorial(a: f64, m: u32) -> f64 {
    (0..m).map(|j| a + f64::from(j)).product()
}
