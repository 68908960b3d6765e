use serde::{Deserialize, Serialize};

use super::dd::Dd;
use crate::error::{Error, Result};

/// Largest |z| handled by the power series.
///
/// The alternating terms peak near e^z / sqrt(2πz); at z = 40 that is about
/// 1e16, which double-double accumulation (about 32 digits) still absorbs
/// with room to spare.
pub const SERIES_Z_MAX: f64 = 40.0;

/// Largest |z| accepted; beyond [`SERIES_Z_MAX`] only the Hankel expansion is used.
pub const BESSEL_Z_MAX: f64 = 200.0;

const ASYMPTOTIC_TERMS: u32 = 60;

/// Below this |z| the Hankel expansion is not attempted.
const ASYMPTOTIC_Z_MIN: f64 = 16.0;

/// Up to this |z| the series runs in plain f64.
const PLAIN_SERIES_Z_MAX: f64 = 1.0;

const TERM_BUDGET: u32 = 400;

/// A real Bessel order ν with ν > -1/2.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct BesselOrder(f64);

impl BesselOrder {
    pub fn new(nu: f64) -> Result<Self> {
        if !nu.is_finite() || nu <= -0.5 {
            return Err(Error::Domain(format!("Bessel order must satisfy nu > -1/2, got {nu}")));
        }
        Ok(BesselOrder(nu))
    }

    pub fn value(self) -> f64 {
        self.0
    }

    /// The order ν + s.
    pub fn shifted(self, s: u32) -> BesselOrder {
        BesselOrder(self.0 + f64::from(s))
    }
}

/// The normalized Bessel function 𝚥_ν(z) = Γ(ν+1) Σ (-1)^m (z/2)^{2m} / (m! Γ(ν+m+1)).
///
/// The Gamma ratio telescopes, so the m-th term is (-z²/4)^m / (m! (ν+1)_m) and
/// is generated by a two-factor recurrence. Terms and partial sums are carried
/// in double-double arithmetic; the sum stops once two consecutive terms fall
/// below machine epsilon times the partial sum.
pub fn normalized_bessel(order: BesselOrder, z: f64) -> Result<f64> {
    let nu = order.value();
    if !z.is_finite() || z.abs() > BESSEL_Z_MAX {
        return Err(Error::Convergence { z, nu });
    }
    let a = z.abs();
    if a >= ASYMPTOTIC_Z_MIN {
        if let Some(v) = asymptotic(nu, a)? {
            return Ok(v);
        }
        if a > SERIES_Z_MAX {
            return Err(Error::Convergence { z, nu });
        }
    }
    if a <= PLAIN_SERIES_Z_MAX {
        return plain_series(nu, z);
    }
    series(nu, z)
}

/// The series in plain f64, for small |z| where the terms stay below about e^|z|.
fn plain_series(nu: f64, z: f64) -> Result<f64> {
    let neg_q = -0.25 * z * z;
    let mut term = 1.0f64;
    let mut sum = 1.0f64;
    for m in 1..=TERM_BUDGET {
        let mf = f64::from(m);
        term *= neg_q / (mf * (nu + mf));
        sum += term;
        if term.abs() <= 0.5 * f64::EPSILON * sum.abs() {
            return Ok(sum);
        }
    }
    Err(Error::Convergence { z, nu })
}

fn series(nu: f64, z: f64) -> Result<f64> {
    if z == 0.0 {
        return Ok(1.0);
    }
    let half = 0.5 * z;
    let neg_q = -Dd::prod(half, half);
    let mut term = Dd::ONE;
    let mut sum = Dd::ONE;
    let mut quiet = 0;
    for m in 1..=TERM_BUDGET {
        let mf = f64::from(m);
        let denom = Dd::sum(nu, mf).mul_f64(mf);
        term = (term * neg_q) / denom;
        sum = sum + term;
        if term.abs_hi() <= f64::EPSILON * sum.abs_hi() {
            quiet += 1;
            if quiet == 2 {
                return Ok(sum.to_f64());
            }
        } else {
            quiet = 0;
        }
    }
    Err(Error::Convergence { z, nu })
}

/// Hankel's expansion J_ν(z) ~ sqrt(2/(πz)) (P cos χ - Q sin χ), χ = z - νπ/2 - π/4,
/// rescaled by Γ(ν+1)(2/z)^ν. `None` when the terms start growing before
/// reaching full precision.
fn asymptotic(nu: f64, z: f64) -> Result<Option<f64>> {
    let mu = 4.0 * nu * nu;
    let mut p = 1.0;
    let mut q = 0.0;
    let mut term = 1.0f64;
    let mut last = f64::INFINITY;
    let mut converged = false;
    for k in 1..=ASYMPTOTIC_TERMS {
        let kf = f64::from(k);
        let odd = 2.0 * kf - 1.0;
        term *= (mu - odd * odd) / (kf * 8.0 * z);
        if term.abs() > last {
            break;
        }
        last = term.abs();
        match k % 4 {
            1 => q += term,
            2 => p -= term,
            3 => q -= term,
            _ => p += term,
        }
        if term.abs() <= 1e-17 * p.abs().max(q.abs()) {
            converged = true;
            break;
        }
    }
    if !converged {
        return Ok(None);
    }
    let chi = z - (0.5 * nu + 0.25) * std::f64::consts::PI;
    let j = (2.0 / (std::f64::consts::PI * z)).sqrt() * (p * chi.cos() - q * chi.sin());
    Ok(Some(super::gamma(nu + 1.0)? * (2.0 / z).powf(nu) * j))
}

/// d/dz 𝚥_ν(z) = -z / (2(ν+1)) 𝚥_{ν+1}(z).
pub fn normalized_bessel_derivative(order: BesselOrder, z: f64) -> Result<f64> {
    let next = normalized_bessel(order.shifted(1), z)?;
    Ok(-z / (2.0 * (order.value() + 1.0)) * next)
}
