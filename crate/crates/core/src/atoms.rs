//! Exact symbolic algebra on finite sums of deformed-Gaussian atoms.
//!
//! An atom is `coeff · x^parity · |x|^exponent · exp(-rate · n · |x|^{2/n})`.
//! Sums of atoms are closed under multiplication by |x|^{2/n}, the Euler
//! operator x d/dx, and the deformed Laplacian |x|^{2-2/n} Δ_k, so every
//! iterated-operator sequence built from those operators is computed here
//! exactly, up to floating-point rounding in the coefficients. Exponents are
//! kept as exact rationals so that like terms always merge.

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;
use num_rational::Ratio;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::Params;
use crate::special_fn::{binomial, StirlingTable};

pub type Exponent = Ratio<i64>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    fn as_u8(self) -> u8 {
        match self {
            Parity::Even => 0,
            Parity::Odd => 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Atom {
    pub coeff: Complex64,
    pub parity: Parity,
    pub exponent: Exponent,
    pub rate: f64,
}

impl Atom {
    pub fn exponent_f64(&self) -> f64 {
        self.exponent.to_f64().unwrap_or(f64::NAN)
    }

    /// Total power of |x| at the origin, counting the odd factor x.
    pub fn origin_power(&self) -> f64 {
        self.exponent_f64() + f64::from(self.parity.as_u8())
    }

    pub fn evaluate(&self, params: &Params, x: f64) -> Complex64 {
        let r = x.abs();
        let mut v = self.coeff
            * r.powf(self.exponent_f64())
            * (-self.rate * params.n_f64() * r.powf(params.mult_power())).exp();
        if self.parity == Parity::Odd {
            v *= x;
        }
        v
    }
}

type Key = (u8, Exponent, u64);

/// A canonical finite sum of atoms: no two terms share (parity, exponent,
/// rate) and no term has an exactly zero coefficient. Terms are ordered by
/// that key, so equal sums have identical term lists.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct AtomSum {
    terms: Vec<Atom>,
}

fn key_of(a: &Atom) -> Key {
    (a.parity.as_u8(), a.exponent, a.rate.to_bits())
}

fn parity_of(p: u8) -> Parity {
    if p == 0 {
        Parity::Even
    } else {
        Parity::Odd
    }
}

#[derive(Default)]
struct Builder {
    map: BTreeMap<Key, Complex64>,
}

impl Builder {
    fn push(&mut self, coeff: Complex64, parity: Parity, exponent: Exponent, rate: f64) {
        if coeff.is_zero() {
            return;
        }
        *self
            .map
            .entry((parity.as_u8(), exponent, rate.to_bits()))
            .or_insert_with(Complex64::zero) += coeff;
    }

    fn finish(self) -> AtomSum {
        let terms = self
            .map
            .into_iter()
            .filter(|(_, c)| !c.is_zero())
            .map(|((p, e, r), c)| Atom {
                coeff: c,
                parity: parity_of(p),
                exponent: e,
                rate: f64::from_bits(r),
            })
            .collect();
        AtomSum { terms }
    }
}

fn ratio_f64(r: Exponent) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

fn two_over_n(params: &Params) -> Exponent {
    Ratio::new(2, i64::from(params.n()))
}

fn real(v: f64) -> Complex64 {
    Complex64::new(v, 0.0)
}

impl AtomSum {
    pub fn zero() -> Self {
        AtomSum { terms: Vec::new() }
    }

    /// A single atom. The rate must be positive and finite; the exponent may
    /// be any rational (negative exponents describe functions singular at 0).
    pub fn atom(coeff: Complex64, parity: Parity, exponent: Exponent, rate: f64) -> Result<Self> {
        Self::from_atoms([Atom { coeff, parity, exponent, rate }])
    }

    /// The deformed Gaussian exp(-s n |x|^{2/n}).
    pub fn gaussian(rate: f64) -> Result<Self> {
        Self::atom(real(1.0), Parity::Even, Exponent::zero(), rate)
    }

    /// x · exp(-s n |x|^{2/n}).
    pub fn odd_gaussian(rate: f64) -> Result<Self> {
        Self::atom(real(1.0), Parity::Odd, Exponent::zero(), rate)
    }

    pub fn from_atoms<I: IntoIterator<Item = Atom>>(atoms: I) -> Result<Self> {
        let mut b = Builder::default();
        for a in atoms {
            if !(a.rate.is_finite() && a.rate > 0.0) {
                return Err(Error::Domain(format!("atom rate must be positive, got {}", a.rate)));
            }
            if !(a.coeff.re.is_finite() && a.coeff.im.is_finite()) {
                return Err(Error::Data("atom coefficient is not finite".into()));
            }
            b.push(a.coeff, a.parity, a.exponent, a.rate);
        }
        Ok(b.finish())
    }

    pub fn terms(&self) -> &[Atom] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Whether some term is unbounded at the origin (negative total power).
    pub fn singular_at_origin(&self) -> bool {
        self.terms.iter().any(|a| a.origin_power() < 0.0)
    }

    /// Pointwise value. At x = 0 the limit is returned when it exists and
    /// every exponent is an integer; otherwise a domain error.
    pub fn evaluate(&self, params: &Params, x: f64) -> Result<Complex64> {
        if x != 0.0 {
            return Ok(self.evaluate_nonzero(params, x));
        }
        let mut v = Complex64::zero();
        for a in &self.terms {
            if !a.exponent.is_integer() {
                return Err(Error::Domain(format!(
                    "fractional exponent {} has no value assigned at x = 0",
                    a.exponent
                )));
            }
            let power = a.origin_power();
            if power < 0.0 {
                return Err(Error::Domain("atom sum is singular at x = 0".into()));
            }
            if power == 0.0 {
                v += a.coeff;
            }
        }
        Ok(v)
    }

    /// Pointwise value for x ≠ 0 (no checks).
    pub fn evaluate_nonzero(&self, params: &Params, x: f64) -> Complex64 {
        self.terms.iter().map(|a| a.evaluate(params, x)).sum()
    }

    pub fn scale(&self, c: Complex64) -> AtomSum {
        self.map_terms(|a, b| b.push(a.coeff * c, a.parity, a.exponent, a.rate))
    }

    pub fn scale_real(&self, c: f64) -> AtomSum {
        self.scale(real(c))
    }

    pub fn add(&self, other: &AtomSum) -> AtomSum {
        let mut b = Builder::default();
        for a in self.terms.iter().chain(other.terms.iter()) {
            b.push(a.coeff, a.parity, a.exponent, a.rate);
        }
        b.finish()
    }

    pub fn sub(&self, other: &AtomSum) -> AtomSum {
        self.add(&other.scale_real(-1.0))
    }

    /// Linear combination Σ c_i f_i.
    pub fn combine<'a, I: IntoIterator<Item = (f64, &'a AtomSum)>>(parts: I) -> AtomSum {
        let mut b = Builder::default();
        for (c, f) in parts {
            if c == 0.0 {
                continue;
            }
            for a in &f.terms {
                b.push(a.coeff * c, a.parity, a.exponent, a.rate);
            }
        }
        b.finish()
    }

    fn map_terms<F: FnMut(&Atom, &mut Builder)>(&self, mut f: F) -> AtomSum {
        let mut b = Builder::default();
        for a in &self.terms {
            f(a, &mut b);
        }
        b.finish()
    }

    /// Multiplication by |x|^{2/n}.
    pub fn apply_mult(&self, params: &Params) -> AtomSum {
        let p = two_over_n(params);
        self.map_terms(|a, b| b.push(a.coeff, a.parity, a.exponent + p, a.rate))
    }

    /// The Euler operator x d/dx.
    ///
    /// Even (a, s) ↦ a·(a, s) - 2s·(a + 2/n, s); odd (a, s) ↦ (a+1)·(a, s) - 2s·(a + 2/n, s).
    pub fn apply_euler(&self, params: &Params) -> AtomSum {
        let p = two_over_n(params);
        self.map_terms(|a, b| {
            let lead = match a.parity {
                Parity::Even => ratio_f64(a.exponent),
                Parity::Odd => ratio_f64(a.exponent) + 1.0,
            };
            b.push(a.coeff * lead, a.parity, a.exponent, a.rate);
            b.push(a.coeff * (-2.0 * a.rate), a.parity, a.exponent + p, a.rate);
        })
    }

    /// The deformed Laplacian |x|^{2-2/n} Δ_k, with
    /// Δ_k f = f'' + (2k/x) f' - k (f(x) - f(-x)) / x².
    ///
    /// Writing p = 2/n, an even atom (a, s) maps to
    ///   a(a - 1 + 2k)·(a - p) - 2s(2a + p - 1 + 2k)·(a) + 4s²·(a + p)
    /// and an odd atom (a, s), where the difference term contributes -2k f / x², to
    ///   a(a + 1 + 2k)·(a - p) - 2s(2a + p + 1 + 2k)·(a) + 4s²·(a + p).
    pub fn apply_laplacian(&self, params: &Params) -> AtomSum {
        let p = two_over_n(params);
        let pf = params.mult_power();
        let k = params.k();
        self.map_terms(|t, b| {
            let a = ratio_f64(t.exponent);
            let s = t.rate;
            let (low, mid) = match t.parity {
                Parity::Even => (a * (a - 1.0 + 2.0 * k), 2.0 * a + pf - 1.0 + 2.0 * k),
                Parity::Odd => (a * (a + 1.0 + 2.0 * k), 2.0 * a + pf + 1.0 + 2.0 * k),
            };
            b.push(t.coeff * low, t.parity, t.exponent - p, s);
            b.push(t.coeff * (-2.0 * s * mid), t.parity, t.exponent, s);
            b.push(t.coeff * (4.0 * s * s), t.parity, t.exponent + p, s);
        })
    }

    /// H = n x d/dx + (kn + 1 - n/2).
    pub fn apply_h(&self, params: &Params) -> AtomSum {
        AtomSum::combine([(params.n_f64(), &self.apply_euler(params)), (params.euler_shift(), self)])
    }

    /// E⁺ = n |x|^{2/n}.
    pub fn apply_raise(&self, params: &Params) -> AtomSum {
        self.apply_mult(params).scale_real(params.n_f64())
    }

    /// E⁻ = n |x|^{2-2/n} Δ_k.
    pub fn apply_lower(&self, params: &Params) -> AtomSum {
        self.apply_laplacian(params).scale_real(params.n_f64())
    }

    /// x^j f^{(j)}, computed from the radial derivative of each atom.
    ///
    /// This path is independent of the Euler operator: for x ≠ 0 an even
    /// atom is φ(|x|) and x^j f^{(j)} = r^j φ^{(j)}(r); an odd atom is
    /// sgn(x) ψ(|x|) with ψ = r^{a+1} e^{...} and x^j f^{(j)} = sgn(x) r^j ψ^{(j)}(r).
    pub fn apply_xjdj(&self, params: &Params, j: u32) -> AtomSum {
        let p = two_over_n(params);
        let one = Exponent::from_integer(1);
        let mut b = Builder::default();
        for t in &self.terms {
            let start = match t.parity {
                Parity::Even => t.exponent,
                Parity::Odd => t.exponent + one,
            };
            // radial terms r^c e^{-s n r^p}: D_r (r^c e) = c r^{c-1} e - 2s r^{c+p-1} e
            let mut radial: BTreeMap<Exponent, Complex64> = BTreeMap::new();
            radial.insert(start, t.coeff);
            for _ in 0..j {
                let mut next: BTreeMap<Exponent, Complex64> = BTreeMap::new();
                for (&c, &coeff) in &radial {
                    let cf = ratio_f64(c);
                    if cf != 0.0 {
                        *next.entry(c - one).or_insert_with(Complex64::zero) += coeff * cf;
                    }
                    *next.entry(c + p - one).or_insert_with(Complex64::zero) +=
                        coeff * (-2.0 * t.rate);
                }
                next.retain(|_, v| !v.is_zero());
                radial = next;
            }
            let lift = Exponent::from_integer(i64::from(j));
            for (c, coeff) in radial {
                match t.parity {
                    Parity::Even => b.push(coeff, Parity::Even, c + lift, t.rate),
                    Parity::Odd => b.push(coeff, Parity::Odd, c + lift - one, t.rate),
                }
            }
        }
        b.finish()
    }

    /// f(x / r) as an atom sum (dilation of the argument).
    pub fn dilate_argument(&self, params: &Params, r: f64) -> Result<AtomSum> {
        if !(r.is_finite() && r > 0.0) {
            return Err(Error::Domain(format!("dilation radius must be positive, got {r}")));
        }
        let rate_factor = r.powf(-params.mult_power());
        Ok(self.map_terms(|a, b| {
            let power = -(a.exponent_f64() + f64::from(a.parity.as_u8()));
            b.push(a.coeff * r.powf(power), a.parity, a.exponent, a.rate * rate_factor)
        }))
    }

    /// Largest coefficient discrepancy against `other`, measured relative to
    /// max(1, |c|). Terms missing on one side count with their full size.
    pub fn max_relative_diff(&self, other: &AtomSum) -> f64 {
        let mut map: BTreeMap<Key, (Complex64, Complex64)> = BTreeMap::new();
        for a in &self.terms {
            map.entry(key_of(a)).or_default().0 += a.coeff;
        }
        for a in &other.terms {
            map.entry(key_of(a)).or_default().1 += a.coeff;
        }
        map.values()
            .map(|(x, y)| (x - y).norm() / 1f64.max(x.norm()).max(y.norm()))
            .fold(0.0, f64::max)
    }

    pub fn approx_eq(&self, other: &AtomSum, tol: f64) -> bool {
        self.max_relative_diff(other) <= tol
    }

    /// Largest |coefficient|, zero for the empty sum.
    pub fn max_coeff(&self) -> f64 {
        self.terms.iter().map(|a| a.coeff.norm()).fold(0.0, f64::max)
    }
}

impl fmt::Display for AtomSum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, a) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            let odd = if a.parity == Parity::Odd { "x·" } else { "" };
            write!(f, "({:.6}{:+.6}i)·{odd}|x|^{}·e^(-{}·n|x|^(2/n))", a.coeff.re, a.coeff.im, a.exponent, a.rate)?;
        }
        Ok(())
    }
}

/// Applies `op` `times` times.
fn iterate<F: Fn(&AtomSum) -> AtomSum>(f: &AtomSum, times: u32, op: F) -> AtomSum {
    (0..times).fold(f.clone(), |acc, _| op(&acc))
}

/// H^m f by direct iteration.
pub fn iterate_h(f: &AtomSum, m: u32, params: &Params) -> AtomSum {
    iterate(f, m, |g| g.apply_h(params))
}

/// f_m = Σ_{l≤m} Σ_{j≤l} C(m,l) (kn+1-n/2)^{m-l} n^l S(l,j) x^j f^{(j)}.
pub fn sequence_f_m(f: &AtomSum, m: u32, params: &Params, table: &StirlingTable) -> Result<AtomSum> {
    let m_us = m as usize;
    table.require(m_us)?;
    let xjdj: Vec<AtomSum> = (0..=m).map(|j| f.apply_xjdj(params, j)).collect();
    let shift = params.euler_shift();
    let n = params.n_f64();
    let mut parts = Vec::new();
    for l in 0..=m_us {
        let outer = binomial(m_us, l) as f64 * shift.powi((m_us - l) as i32) * n.powi(l as i32);
        for (j, g) in xjdj.iter().enumerate().take(l + 1) {
            let s = table.second(l, j);
            if s != 0 {
                parts.push((outer * s as f64, g));
            }
        }
    }
    Ok(AtomSum::combine(parts))
}

/// Ways of building the sequence f̃_{β,l}.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FTildeConstruction {
    /// (-1)^l Σ_{j≤l} Σ_{m≤j} s(l,j) C(j,m) β^{j-m} f_m.
    StirlingSum,
    /// f̃_{β,0} = f, f̃_{β,l} = ((β - l) I + H) f̃_{β,l-1}.
    Recursion,
    /// (-1)^l (-βI - H)_l f, the falling factorial evaluated at an operator.
    FallingFactorial,
}

/// f̃_{β,l} through the explicit Stirling double sum.
pub fn sequence_f_tilde(
    f: &AtomSum,
    beta: u32,
    l: u32,
    params: &Params,
    table: &StirlingTable,
) -> Result<AtomSum> {
    sequence_f_tilde_with(FTildeConstruction::StirlingSum, f, beta, l, params, table)
}

pub fn sequence_f_tilde_with(
    construction: FTildeConstruction,
    f: &AtomSum,
    beta: u32,
    l: u32,
    params: &Params,
    table: &StirlingTable,
) -> Result<AtomSum> {
    if l > beta {
        return Err(Error::Domain(format!("f̃_(β,l) needs l <= β, got l = {l}, β = {beta}")));
    }
    table.require(l as usize)?;
    let sign = if l % 2 == 0 { 1.0 } else { -1.0 };
    match construction {
        FTildeConstruction::StirlingSum => {
            let fms: Vec<AtomSum> =
                (0..=l).map(|m| sequence_f_m(f, m, params, table)).collect::<Result<_>>()?;
            let b = f64::from(beta);
            let mut parts = Vec::new();
            for j in 0..=l as usize {
                let s = table.first_signed(l as usize, j);
                if s == 0 {
                    continue;
                }
                for (m, fm) in fms.iter().enumerate().take(j + 1) {
                    let c = sign * s as f64 * binomial(j, m) as f64 * b.powi((j - m) as i32);
                    parts.push((c, fm));
                }
            }
            Ok(AtomSum::combine(parts))
        }
        FTildeConstruction::Recursion => {
            let mut g = f.clone();
            for step in 1..=l {
                let shift = f64::from(beta) - f64::from(step);
                g = AtomSum::combine([(shift, &g), (1.0, &g.apply_h(params))]);
            }
            Ok(g)
        }
        FTildeConstruction::FallingFactorial => {
            // (λ)_l = Π_{j<l} (λ - j) with λ = -β - H
            let mut g = f.clone();
            for j in 0..l {
                let c = -f64::from(beta) - f64::from(j);
                g = AtomSum::combine([(c, &g), (-1.0, &g.apply_h(params))]);
            }
            Ok(g.scale_real(sign))
        }
    }
}

/// Evaluates the polynomial Σ_j coeffs[j] H^j at the operator H, applied to f.
pub fn polynomial_in_h(f: &AtomSum, coeffs: &[f64], params: &Params) -> AtomSum {
    let mut power = f.clone();
    let mut parts = Vec::with_capacity(coeffs.len());
    let mut powers = Vec::with_capacity(coeffs.len());
    for _ in coeffs {
        powers.push(power.clone());
        power = power.apply_h(params);
    }
    for (c, p) in coeffs.iter().zip(powers.iter()) {
        parts.push((*c, p));
    }
    AtomSum::combine(parts)
}

/// g_m = Σ_{l≤m} C(m,l) (2k+2/n)^{m-l} (x d/dx)^l f.
pub fn sequence_g_m(f: &AtomSum, m: u32, params: &Params) -> AtomSum {
    let m_us = m as usize;
    let shift = params.lp_shift();
    let mut powers = Vec::with_capacity(m_us + 1);
    let mut cur = f.clone();
    for _ in 0..=m {
        powers.push(cur.clone());
        cur = cur.apply_euler(params);
    }
    AtomSum::combine(
        powers
            .iter()
            .enumerate()
            .map(|(l, g)| (binomial(m_us, l) as f64 * shift.powi((m_us - l) as i32), g)),
    )
}

/// h_{α,β} = (n |x|^{2-2/n} Δ_k)^α (n |x|^{2/n})^β f.
pub fn sequence_h(f: &AtomSum, alpha: u32, beta: u32, params: &Params) -> AtomSum {
    let raised = iterate(f, beta, |g| g.apply_raise(params));
    iterate(&raised, alpha, |g| g.apply_lower(params))
}

/// Wire format of a single atom.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AtomRecord {
    pub coeff_re: f64,
    pub coeff_im: f64,
    pub parity: u8,
    pub exponent_num: i64,
    pub exponent_den: i64,
    pub rate: f64,
}

impl AtomSum {
    pub fn to_records(&self) -> Vec<AtomRecord> {
        self.terms
            .iter()
            .map(|a| AtomRecord {
                coeff_re: a.coeff.re,
                coeff_im: a.coeff.im,
                parity: a.parity.as_u8(),
                exponent_num: *a.exponent.numer(),
                exponent_den: *a.exponent.denom(),
                rate: a.rate,
            })
            .collect()
    }

    pub fn from_records(records: &[AtomRecord]) -> Result<Self> {
        let atoms = records
            .iter()
            .map(|r| {
                let parity = match r.parity {
                    0 => Parity::Even,
                    1 => Parity::Odd,
                    other => return Err(Error::Parse(format!("parity must be 0 or 1, got {other}"))),
                };
                if r.exponent_den == 0 {
                    return Err(Error::Parse("exponent_den must be nonzero".into()));
                }
                let exponent = Ratio::new(r.exponent_num, r.exponent_den);
                if exponent.is_negative() {
                    return Err(Error::Parse(format!("exponent must be >= 0, got {exponent}")));
                }
                Ok(Atom { coeff: Complex64::new(r.coeff_re, r.coeff_im), parity, exponent, rate: r.rate })
            })
            .collect::<Result<Vec<_>>>()?;
        AtomSum::from_atoms(atoms)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.to_records())?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let records: Vec<AtomRecord> = serde_json::from_str(text)?;
        Self::from_records(&records)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fd;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn p11() -> Params {
        Params::new(1.0, 1).unwrap()
    }

    fn e(num: i64, den: i64) -> Exponent {
        Ratio::new(num, den)
    }

    fn single(coeff: f64, parity: Parity, exp: Exponent, rate: f64) -> AtomSum {
        AtomSum::atom(real(coeff), parity, exp, rate).unwrap()
    }

    /// A mixed test family covering both parities and fractional exponents.
    fn family(params: &Params) -> Vec<AtomSum> {
        let n = i64::from(params.n());
        vec![
            AtomSum::gaussian(0.5).unwrap(),
            AtomSum::gaussian(1.3).unwrap(),
            AtomSum::odd_gaussian(0.7).unwrap(),
            single(0.6, Parity::Even, e(2, n), 0.9)
                .add(&single(-1.1, Parity::Odd, e(4, n), 0.5)),
        ]
    }

    #[test]
    fn evaluate_examples() {
        let p = p11();
        let g = AtomSum::gaussian(0.5).unwrap();
        assert_eq!(g.evaluate(&p, 0.0).unwrap(), real(1.0));
        assert_abs_diff_eq!(g.evaluate(&p, 1.0).unwrap().re, (-0.5_f64).exp(), epsilon = 1e-15);
        let odd = AtomSum::odd_gaussian(1.0).unwrap();
        assert_abs_diff_eq!(odd.evaluate(&p, -2.0).unwrap().re, -2.0 * (-4.0_f64).exp(), epsilon = 1e-15);
        assert_eq!(odd.evaluate(&p, 0.0).unwrap(), real(0.0));
    }

    #[test]
    fn evaluate_at_origin_rejects_fractional_exponents() {
        let p = Params::new(1.0, 3).unwrap();
        let f = single(1.0, Parity::Even, e(2, 3), 1.0);
        assert!(matches!(f.evaluate(&p, 0.0), Err(Error::Domain(_))));
        assert!(f.evaluate(&p, 0.5).is_ok());
    }

    #[test]
    fn canonical_merging() {
        let a = AtomSum::gaussian(0.5).unwrap();
        let sum = a.add(&a);
        assert_eq!(sum.len(), 1);
        assert_eq!(sum.terms()[0].coeff, real(2.0));
        assert!(a.sub(&a).is_zero());
        // 2/4 and 1/2 are the same exponent
        let x = single(1.0, Parity::Even, e(2, 4), 1.0).add(&single(1.0, Parity::Even, e(1, 2), 1.0));
        assert_eq!(x.len(), 1);
    }

    #[test]
    fn mult_bookkeeping() {
        let p = p11();
        assert!(AtomSum::zero().apply_mult(&p).is_zero());
        let g = AtomSum::gaussian(0.5).unwrap().apply_mult(&p);
        assert_eq!(g.terms()[0].exponent, e(2, 1));
        assert_eq!(g.terms()[0].coeff, real(1.0));
    }

    #[test]
    fn euler_of_gaussian() {
        let p = p11();
        let g = AtomSum::gaussian(0.5).unwrap().apply_euler(&p);
        let expect = single(-1.0, Parity::Even, e(2, 1), 0.5);
        assert!(g.approx_eq(&expect, 0.0));
        assert!(AtomSum::zero().apply_euler(&p).is_zero());
    }

    #[test]
    fn laplacian_of_gaussian_k1_n1() {
        let p = p11();
        let lf = AtomSum::gaussian(0.5).unwrap().apply_laplacian(&p);
        let expect = single(1.0, Parity::Even, e(2, 1), 0.5).add(&single(-3.0, Parity::Even, e(0, 1), 0.5));
        assert!(lf.approx_eq(&expect, 1e-15), "{lf}");
        assert!(AtomSum::zero().apply_laplacian(&p).is_zero());
    }

    #[test]
    fn h_examples() {
        let p = p11();
        let f = AtomSum::gaussian(0.5).unwrap();
        let hf = f.apply_h(&p);
        let expect = single(1.5, Parity::Even, e(0, 1), 0.5).add(&single(-1.0, Parity::Even, e(2, 1), 0.5));
        assert!(hf.approx_eq(&expect, 1e-15));
        assert!(AtomSum::zero().apply_h(&p).is_zero());
        let table = StirlingTable::new(6).unwrap();
        assert!(sequence_f_m(&f, 1, &p, &table).unwrap().approx_eq(&hf, 1e-15));
    }

    #[test]
    fn operators_match_finite_differences() {
        for &(k, n) in &[(1.0, 1), (0.8, 2), (1.0, 3), (0.35, 1), (0.6, 4)] {
            let p = Params::new(k, n).unwrap();
            for f in family(&p) {
                let lf = f.apply_laplacian(&p);
                let ef = f.apply_euler(&p);
                let mf = f.apply_mult(&p);
                let g = |x: f64| f.evaluate_nonzero(&p, x);
                for &x in &[-3.0, -1.7, -0.5, 0.5, 0.9, 2.2, 3.0] {
                    let h = 2e-3;
                    let fd_l = fd::deformed_laplacian(&g, &p, x, h);
                    let ex_l = lf.evaluate_nonzero(&p, x);
                    assert!((fd_l - ex_l).norm() <= 1e-6 * 1f64.max(ex_l.norm()), "L k={k} n={n} x={x}: {fd_l} vs {ex_l}");
                    let fd_e = fd::euler(&g, x, h);
                    assert!((fd_e - ef.evaluate_nonzero(&p, x)).norm() <= 1e-7);
                    let m = x.abs().powf(2.0 / f64::from(n)) * g(x);
                    assert!((m - mf.evaluate_nonzero(&p, x)).norm() <= 1e-14);
                }
            }
        }
    }

    #[test]
    fn xjdj_matches_falling_factorial_of_euler() {
        // x^j D^j = E(E-1)...(E-j+1) with E = x d/dx
        for &(k, n) in &[(1.0, 1), (0.8, 2), (1.0, 3)] {
            let p = Params::new(k, n).unwrap();
            for f in family(&p) {
                for j in 0..=5u32 {
                    let mut g = f.clone();
                    for i in 0..j {
                        g = AtomSum::combine([(1.0, &g.apply_euler(&p)), (-f64::from(i), &g)]);
                    }
                    assert!(f.apply_xjdj(&p, j).approx_eq(&g, 1e-12), "j={j}");
                }
            }
        }
    }

    #[test]
    fn f_m_equals_iterated_h() {
        let table = StirlingTable::new(8).unwrap();
        for &(k, n) in &[(1.0, 1), (0.8, 2), (1.0, 3)] {
            let p = Params::new(k, n).unwrap();
            for f in family(&p) {
                assert!(sequence_f_m(&f, 0, &p, &table).unwrap().approx_eq(&f, 0.0));
                for m in 1..=5 {
                    let fm = sequence_f_m(&f, m, &p, &table).unwrap();
                    assert!(fm.approx_eq(&iterate_h(&f, m, &p), 1e-12), "m={m}");
                }
            }
        }
    }

    #[test]
    fn f_m_table_too_small() {
        let table = StirlingTable::new(2).unwrap();
        let f = AtomSum::gaussian(0.5).unwrap();
        assert!(matches!(sequence_f_m(&f, 3, &p11(), &table), Err(Error::Capacity(_))));
    }

    #[test]
    fn f_tilde_constructions_individually() {
        let p = Params::new(0.8, 2).unwrap();
        let table = StirlingTable::new(8).unwrap();
        let f = AtomSum::gaussian(0.5).unwrap();
        for c in [FTildeConstruction::StirlingSum, FTildeConstruction::Recursion, FTildeConstruction::FallingFactorial] {
            let g = sequence_f_tilde_with(c, &f, 3, 0, &p, &table).unwrap();
            assert!(g.approx_eq(&f, 0.0));
            assert!(sequence_f_tilde_with(c, &f, 1, 2, &p, &table).is_err());
        }
        let rec = sequence_f_tilde_with(FTildeConstruction::Recursion, &f, 1, 1, &p, &table).unwrap();
        assert!(rec.approx_eq(&f.apply_h(&p), 1e-15));
        // each construction is its own polynomial in H:
        // Stirling sum = (-1)^l (H+β)_l, recursion = (H+β-1)_l, closed form = rising (H+β)^(l)
        for beta in 0..=4u32 {
            for l in 0..=beta {
                let b = f64::from(beta);
                let poly = |roots: Vec<f64>, scale: f64| {
                    // Π (H - r) expanded as coefficients
                    let mut c = vec![scale];
                    for r in roots {
                        let mut next = vec![0.0; c.len() + 1];
                        for (d, v) in c.iter().enumerate() {
                            next[d + 1] += v;
                            next[d] -= r * v;
                        }
                        c = next;
                    }
                    c
                };
                let sign = if l % 2 == 0 { 1.0 } else { -1.0 };
                let stir = polynomial_in_h(&f, &poly((0..l).map(|i| f64::from(i) - b).collect(), sign), &p);
                let rec = polynomial_in_h(&f, &poly((1..=l).map(|i| f64::from(i) - b).collect(), 1.0), &p);
                let fall = polynomial_in_h(&f, &poly((0..l).map(|i| -b - f64::from(i)).collect(), 1.0), &p);
                let get = |c| sequence_f_tilde_with(c, &f, beta, l, &p, &table).unwrap();
                assert!(get(FTildeConstruction::StirlingSum).approx_eq(&stir, 1e-12));
                assert!(get(FTildeConstruction::Recursion).approx_eq(&rec, 1e-12));
                assert!(get(FTildeConstruction::FallingFactorial).approx_eq(&fall, 1e-12));
            }
        }
    }

    #[test]
    fn g_m_examples() {
        let p = p11();
        let f = AtomSum::gaussian(0.5).unwrap();
        assert!(sequence_g_m(&f, 0, &p).approx_eq(&f, 0.0));
        let g1 = sequence_g_m(&f, 1, &p);
        let expect = single(4.0, Parity::Even, e(0, 1), 0.5).add(&single(-1.0, Parity::Even, e(2, 1), 0.5));
        assert!(g1.approx_eq(&expect, 1e-15));
        for &(k, n) in &[(1.0, 1), (0.8, 2), (1.0, 3)] {
            let p = Params::new(k, n).unwrap();
            for m in 0..=3 {
                let gm = sequence_g_m(&f, m, &p);
                let next = AtomSum::combine([(1.0, &gm.apply_euler(&p)), (p.lp_shift(), &gm)]);
                assert!(sequence_g_m(&f, m + 1, &p).approx_eq(&next, 1e-12));
            }
        }
    }

    #[test]
    fn h_sequence_and_commutator_identity() {
        for &(k, n) in &[(1.0, 1), (0.8, 2), (1.0, 3)] {
            let p = Params::new(k, n).unwrap();
            for f in family(&p) {
                let raised = iterate(&f, 2, |g| g.apply_raise(&p));
                assert!(sequence_h(&f, 0, 2, &p).approx_eq(&raised, 0.0));
                for beta in 0..=4u32 {
                    // n L (M^β f) = 4β M^{β-1}((β-1) f + H f) + M^β (n L f), M = n|x|^{2/n}
                    let lhs = sequence_h(&f, 1, beta, &p);
                    let bracket = AtomSum::combine([(f64::from(beta) - 1.0, &f), (1.0, &f.apply_h(&p))]);
                    let first = if beta == 0 {
                        AtomSum::zero()
                    } else {
                        iterate(&bracket, beta - 1, |g| g.apply_raise(&p)).scale_real(4.0 * f64::from(beta))
                    };
                    let second = iterate(&f.apply_lower(&p), beta, |g| g.apply_raise(&p));
                    assert!(lhs.approx_eq(&first.add(&second), 1e-12), "beta={beta}");
                }
            }
        }
    }

    #[test]
    fn dilation_matches_pointwise() {
        let p = Params::new(0.8, 2).unwrap();
        let f = family(&p)[3].clone();
        let d = f.dilate_argument(&p, 0.25).unwrap();
        for &x in &[-1.0, 0.1, 0.4] {
            assert!((d.evaluate_nonzero(&p, x) - f.evaluate_nonzero(&p, x / 0.25)).norm() < 1e-12);
        }
        assert!(f.dilate_argument(&p, 0.0).is_err());
    }

    #[test]
    fn json_round_trip() {
        let p = Params::new(1.0, 3).unwrap();
        let f = family(&p)[3].clone();
        let text = f.to_json().unwrap();
        assert_eq!(AtomSum::from_json(&text).unwrap(), f);
        assert!(AtomSum::from_json(r#"[{"coeff_re":1,"coeff_im":0,"parity":2,"exponent_num":0,"exponent_den":1,"rate":1}]"#).is_err());
        assert!(AtomSum::from_json(r#"[{"coeff_re":1,"coeff_im":0,"parity":0,"exponent_num":0,"exponent_den":1,"rate":-1}]"#).is_err());
    }

    #[test]
    fn singular_flag() {
        let p = Params::new(1.0, 1).unwrap();
        // a generic atom with a < 2/n picks up a negative exponent under L
        let f = single(1.0, Parity::Even, e(1, 1), 1.0);
        let lf = f.apply_laplacian(&p);
        assert!(lf.singular_at_origin());
        assert!(!AtomSum::gaussian(1.0).unwrap().apply_laplacian(&p).singular_at_origin());
    }

    proptest! {
        #[test]
        fn euler_pointwise(k in 0.2f64..2.0, n in 1u32..5, rate in 0.2f64..2.0, x in 0.3f64..2.5, neg in any::<bool>()) {
            let Ok(p) = Params::new(k, n) else { return Ok(()) };
            let f = single(1.0, Parity::Even, e(2, i64::from(n)), rate).add(&AtomSum::odd_gaussian(rate).unwrap());
            let x = if neg { -x } else { x };
            let g = |t: f64| f.evaluate_nonzero(&p, t);
            let fd = fd::euler(&g, x, 1e-3);
            let ex = f.apply_euler(&p).evaluate_nonzero(&p, x);
            prop_assert!((fd - ex).norm() <= 1e-7 * 1f64.max(ex.norm()));
        }

        #[test]
        fn mult_pointwise(k in 0.2f64..2.0, n in 1u32..5, x in -4.0f64..4.0) {
            prop_assume!(x.abs() > 1e-3);
            let Ok(p) = Params::new(k, n) else { return Ok(()) };
            let f = AtomSum::gaussian(0.5).unwrap().add(&AtomSum::odd_gaussian(1.5).unwrap());
            let lhs = f.apply_mult(&p).evaluate_nonzero(&p, x);
            let rhs = f.evaluate_nonzero(&p, x) * x.abs().powf(2.0 / f64::from(n));
            prop_assert!((lhs - rhs).norm() <= 1e-14);
        }
    }
}
