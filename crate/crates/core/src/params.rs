use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::special_fn::{gamma, BesselOrder};

/// A validated deformation pair (k, n) together with its derived constants.
///
/// `n` is the deformation denominator (the transform deforms with a = 2/n)
/// and `k` the reflection multiplicity. The standing assumption is
/// ν = kn - n/2 > -1/2, which keeps the kernel uniformly bounded.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawParams", into = "RawParams")]
pub struct Params {
    k: f64,
    n: u32,
    nu: f64,
    measure_const: f64,
}

#[derive(Serialize, Deserialize)]
struct RawParams {
    k: f64,
    n: u32,
}

impl TryFrom<RawParams> for Params {
    type Error = Error;
    fn try_from(raw: RawParams) -> Result<Self> {
        Params::new(raw.k, raw.n)
    }
}

impl From<Params> for RawParams {
    fn from(p: Params) -> Self {
        RawParams { k: p.k, n: p.n }
    }
}

impl Params {
    pub fn new(k: f64, n: u32) -> Result<Self> {
        if n == 0 {
            return Err(Error::Domain("n must be a positive integer".into()));
        }
        if !k.is_finite() {
            return Err(Error::Domain(format!("k must be finite, got {k}")));
        }
        let nf = f64::from(n);
        let nu = k * nf - nf / 2.0;
        if nu <= -0.5 {
            return Err(Error::Domain(format!(
                "kn - n/2 = {nu} violates the standing assumption kn - n/2 > -1/2 (k = {k}, n = {n})"
            )));
        }
        let measure_const = (nf / 2.0).powf(nu) / (2.0 * gamma(nu + 1.0)?);
        Ok(Params { k, n, nu, measure_const })
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn n_f64(&self) -> f64 {
        f64::from(self.n)
    }

    /// ν = kn - n/2, the order of the even kernel part.
    pub fn nu(&self) -> f64 {
        self.nu
    }

    pub fn bessel_order(&self) -> BesselOrder {
        BesselOrder::new(self.nu).expect("validated at construction")
    }

    /// c_{k,n} in dμ = c_{k,n} |x|^{2k+2/n-2} dx.
    pub fn measure_const(&self) -> f64 {
        self.measure_const
    }

    /// kn + 1 - n/2, the constant part of the Euler-type operator H.
    pub fn euler_shift(&self) -> f64 {
        self.nu + 1.0
    }

    /// 2k + 2/n, the shift in the operator inverted by the averaging operator T.
    pub fn lp_shift(&self) -> f64 {
        2.0 * self.k + 2.0 / self.n_f64()
    }

    /// 2k + 2/n - 1, the homogeneity degree of the measure.
    pub fn homogeneity(&self) -> f64 {
        self.lp_shift() - 1.0
    }

    /// (-1)^n, the sign relating the inverse transform to the forward one.
    pub fn parity_sign(&self) -> f64 {
        if self.n % 2 == 0 {
            1.0
        } else {
            -1.0
        }
    }

    /// Power 2/n carried by the multiplication operator.
    pub fn mult_power(&self) -> f64 {
        2.0 / self.n_f64()
    }

    /// Deformed variable u = sgn(x) |x|^{1/n}.
    pub fn to_u(&self, x: f64) -> f64 {
        x.signum() * x.abs().powf(1.0 / self.n_f64())
    }

    /// Inverse of [`Params::to_u`]: x = sgn(u) |u|^n.
    pub fn to_x(&self, u: f64) -> f64 {
        u.signum() * u.abs().powi(self.n as i32)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn derived_constants() {
        let p = Params::new(1.0, 1).unwrap();
        assert_eq!(p.nu(), 0.5);
        assert_eq!(p.euler_shift(), 1.5);
        assert_eq!(p.lp_shift(), 4.0);
        assert_eq!(p.homogeneity(), 3.0);
        assert_relative_eq!(p.measure_const(), 1.0 / (2.0 * std::f64::consts::PI).sqrt(), max_relative = 1e-14);
        assert_eq!(p.parity_sign(), -1.0);
        assert_eq!(Params::new(0.8, 2).unwrap().parity_sign(), 1.0);
    }

    #[test]
    fn standing_assumption_boundary() {
        assert!(Params::new(0.1, 1).is_ok());
        assert!(matches!(Params::new(0.0, 1), Err(Error::Domain(_))));
        assert!(Params::new(1.0, 0).is_err());
        assert!(Params::new(f64::NAN, 2).is_err());
    }

    #[test]
    fn deformed_variable_round_trip() {
        let p = Params::new(1.0, 3).unwrap();
        for &x in &[-8.0, -0.3, 0.0, 0.7, 27.0] {
            assert_relative_eq!(p.to_x(p.to_u(x)), x, max_relative = 1e-14);
        }
        assert_relative_eq!(p.to_u(-8.0), -2.0, max_relative = 1e-15);
    }

    #[test]
    fn serde_validates() {
        let p: Params = serde_json::from_str(r#"{"k": 1.0, "n": 3}"#).unwrap();
        assert_eq!(p.nu(), 1.5);
        assert!(serde_json::from_str::<Params>(r#"{"k": 0.0, "n": 1}"#).is_err());
    }
}
