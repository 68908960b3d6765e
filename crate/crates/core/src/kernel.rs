//! The transform kernel B(x, y), its derivative recursions, and the
//! rewrite-rule expansion of iterated operators applied to it.
//!
//! With w = |x|^{1/n}, v = |y|^{1/n} and z = n w v the kernel is
//!   B(x, y) = 𝚥_ν(z) + (-i)^n (n/2)^n / ((ν+1)···(ν+n)) · xy · 𝚥_{ν+n}(z).

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fd;
use crate::params::Params;
use crate::special_fn::{normalized_bessel, rising_factorial, BESSEL_Z_MAX};

/// Largest ℓ and α accepted by the expansions.
pub const MAX_EXPANSION_ORDER: u32 = 3;

/// (-i)^n by its period-4 cycle.
pub fn minus_i_pow(n: u32) -> Complex64 {
    match n % 4 {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, -1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, 1.0),
    }
}

/// The Bessel argument n |xy|^{1/n}.
pub fn kernel_argument(params: &Params, x: f64, y: f64) -> f64 {
    params.n_f64() * (x * y).abs().powf(1.0 / params.n_f64())
}

/// (-i)^n (n/2)^n Γ(ν+1) / Γ(ν+n+1), the constant in front of the odd part.
pub fn odd_prefactor(params: &Params) -> Complex64 {
    let n = params.n();
    let mag = (params.n_f64() / 2.0).powi(n as i32) / rising_factorial(params.nu() + 1.0, n);
    minus_i_pow(n) * mag
}

pub fn kernel_even(params: &Params, x: f64, y: f64) -> Result<f64> {
    normalized_bessel(params.bessel_order(), kernel_argument(params, x, y))
}

pub fn kernel_odd(params: &Params, x: f64, y: f64) -> Result<Complex64> {
    let xy = x * y;
    if xy == 0.0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let j = normalized_bessel(params.bessel_order().shifted(params.n()), kernel_argument(params, x, y))?;
    Ok(odd_prefactor(params) * (xy * j))
}

pub fn kernel(params: &Params, x: f64, y: f64) -> Result<Complex64> {
    Ok(kernel_odd(params, x, y)? + kernel_even(params, x, y)?)
}

/// One term coeff · w^{x_pow} · v^{y_pow} · (xy)^{odd} · 𝚥_{ν+shift}(n w v).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KernelTerm {
    pub coeff: Complex64,
    pub x_pow: u32,
    pub y_pow: u32,
    pub shift: u32,
    pub odd: bool,
}

impl KernelTerm {
    pub fn evaluate(&self, params: &Params, x: f64, y: f64) -> Result<Complex64> {
        let inv_n = 1.0 / params.n_f64();
        let w = x.abs().powf(inv_n);
        let v = y.abs().powf(inv_n);
        let j = normalized_bessel(params.bessel_order().shifted(self.shift), params.n_f64() * w * v)?;
        let mut val = self.coeff * (pow_u(w, self.x_pow) * pow_u(v, self.y_pow) * j);
        if self.odd {
            val *= x * y;
        }
        Ok(val)
    }
}

fn pow_u(base: f64, e: u32) -> f64 {
    if e == 0 {
        1.0
    } else {
        base.powi(e as i32)
    }
}

pub fn evaluate_terms(terms: &[KernelTerm], params: &Params, x: f64, y: f64) -> Result<Complex64> {
    terms.iter().try_fold(Complex64::new(0.0, 0.0), |acc, t| Ok(acc + t.evaluate(params, x, y)?))
}

fn merge(terms: Vec<KernelTerm>) -> Vec<KernelTerm> {
    let mut out: Vec<KernelTerm> = Vec::with_capacity(terms.len());
    for t in terms {
        if t.coeff == Complex64::new(0.0, 0.0) {
            continue;
        }
        match out
            .iter_mut()
            .find(|o| o.x_pow == t.x_pow && o.y_pow == t.y_pow && o.shift == t.shift && o.odd == t.odd)
        {
            Some(o) => o.coeff += t.coeff,
            None => out.push(t),
        }
    }
    out.retain(|t| t.coeff != Complex64::new(0.0, 0.0));
    out.sort_by_key(|t| (t.odd, t.shift, t.x_pow, t.y_pow));
    out
}

/// The kernel itself as a term list.
pub fn base_terms(params: &Params) -> Vec<KernelTerm> {
    vec![
        KernelTerm { coeff: Complex64::new(1.0, 0.0), x_pow: 0, y_pow: 0, shift: 0, odd: false },
        KernelTerm { coeff: odd_prefactor(params), x_pow: 0, y_pow: 0, shift: params.n(), odd: true },
    ]
}

/// x d/dx applied to each term:
///   w^a 𝚥_μ ↦ (a/n) w^a 𝚥_μ - n/(2(μ+1)) w^{a+2} v² 𝚥_{μ+1},
/// with a/n replaced by (a+n)/n when the term carries xy.
pub fn rewrite_euler(terms: &[KernelTerm], params: &Params) -> Vec<KernelTerm> {
    let n = params.n_f64();
    let mut out = Vec::with_capacity(2 * terms.len());
    for t in terms {
        let mu = params.nu() + f64::from(t.shift);
        let a = f64::from(t.x_pow) + if t.odd { n } else { 0.0 };
        out.push(KernelTerm { coeff: t.coeff * (a / n), ..*t });
        out.push(KernelTerm {
            coeff: t.coeff * (-n / (2.0 * (mu + 1.0))),
            x_pow: t.x_pow + 2,
            y_pow: t.y_pow + 2,
            shift: t.shift + 1,
            odd: t.odd,
        });
    }
    merge(out)
}

/// n |x|^{2-2/n} Δ_k applied to each term. With b = a for even terms and
/// b = a + n for terms carrying xy,
///   w^a 𝚥_μ ↦ ((b(b+2ν) - 2kn²·odd)/n) w^{a-2} 𝚥_μ
///            - (n(b+ν-μ)/(μ+1)) w^a v² 𝚥_{μ+1} - n w^a v² 𝚥_μ.
pub fn rewrite_laplacian(terms: &[KernelTerm], params: &Params) -> Vec<KernelTerm> {
    let n = params.n_f64();
    let nu = params.nu();
    let mut out = Vec::with_capacity(3 * terms.len());
    for t in terms {
        let mu = nu + f64::from(t.shift);
        let (b, diff) = if t.odd {
            (f64::from(t.x_pow) + n, 2.0 * params.k() * n * n)
        } else {
            (f64::from(t.x_pow), 0.0)
        };
        let low = (b * (b + 2.0 * nu) - diff) / n;
        if low != 0.0 {
            // a = 0 always has a vanishing low coefficient; a is even otherwise
            debug_assert!(t.x_pow >= 2);
            out.push(KernelTerm { coeff: t.coeff * low, x_pow: t.x_pow - 2, ..*t });
        }
        out.push(KernelTerm {
            coeff: t.coeff * (-n * (b + nu - mu) / (mu + 1.0)),
            x_pow: t.x_pow,
            y_pow: t.y_pow + 2,
            shift: t.shift + 1,
            odd: t.odd,
        });
        out.push(KernelTerm { coeff: t.coeff * -n, y_pow: t.y_pow + 2, ..*t });
    }
    merge(out)
}

/// Which form of a recursion ingredient is in use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    /// The recursion as usually written.
    Nominal,
    /// As obtained by differentiating the ansatz directly.
    Derived,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Candidate {
    pub variant: Variant,
    pub formula: String,
    pub residual: f64,
}

/// Outcome of deciding one ambiguous ingredient by the finite-difference oracle.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Resolution {
    pub item: String,
    pub candidates: Vec<Candidate>,
    pub chosen: Variant,
    /// Whether the candidates coincide numerically at these parameters.
    pub indistinguishable: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Choices {
    c11: Variant,
    c_mult: Variant,
    d_mult: Variant,
}

/// Coefficient tables c[ℓ][j], d[ℓ][j] with
///   (x d/dx)^ℓ 𝚥_ν(z) = Σ_j c_{j,ℓ} |xy|^{2j/n} 𝚥_{ν+j}(z),
///   (x d/dx)^ℓ (xy 𝚥_{ν+n}(z)) = Σ_j d_{j,ℓ} |xy|^{2j/n} xy 𝚥_{ν+n+j}(z).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DerivativeCoeffs {
    pub l_max: u32,
    pub c: Vec<Vec<f64>>,
    pub d: Vec<Vec<f64>>,
    pub resolutions: Vec<Resolution>,
}

fn build_tables(params: &Params, l_max: u32, ch: Choices) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
    let n = params.n_f64();
    let nu = params.nu();
    let k = params.k();
    let l_max = l_max as usize;
    let mut c = vec![vec![0.0; l_max + 1]; l_max + 1];
    let mut d = vec![vec![0.0; l_max + 1]; l_max + 1];
    c[0][0] = 1.0;
    d[0][0] = 1.0;
    let c_mult = |j: usize| match ch.c_mult {
        Variant::Nominal => 2.0 * k / n,
        Variant::Derived => 2.0 * j as f64 / n,
    };
    let d_mult = |j: usize| match ch.d_mult {
        Variant::Nominal => 2.0 * k / n + 1.0,
        Variant::Derived => 2.0 * j as f64 / n + 1.0,
    };
    for l in 1..=l_max {
        for j in 1..=l {
            let diag = -n / (2.0 * (nu + j as f64));
            c[l][j] = if l == 1 {
                match ch.c11 {
                    Variant::Nominal => -n / (2.0 * nu),
                    Variant::Derived => -n / (2.0 * (nu + 1.0)),
                }
            } else if j == 1 {
                2.0 / n * c[l - 1][1]
            } else if j == l {
                diag * c[l - 1][l - 1]
            } else {
                c_mult(j) * c[l - 1][j] + diag * c[l - 1][j - 1]
            };
        }
        d[l][0] = 1.0;
        for j in 1..=l {
            let diag = -n / (2.0 * (nu + n + j as f64));
            d[l][j] = if j == l {
                diag * d[l - 1][l - 1]
            } else {
                d_mult(j) * d[l - 1][j] + diag * d[l - 1][j - 1]
            };
        }
    }
    (c, d)
}

/// Points at which the oracle compares expansions; all keep the stencil away from 0.
const ORACLE_POINTS: [(f64, f64); 3] = [(0.7, 1.3), (-1.1, 0.9), (1.6, -0.6)];
const ORACLE_STEP: f64 = 1e-2;

fn nested_euler(f: &dyn Fn(f64) -> Complex64, times: u32, x: f64, h: f64) -> Complex64 {
    if times == 0 {
        return f(x);
    }
    let inner = |t: f64| nested_euler(f, times - 1, t, h);
    fd::euler(&inner, x, h)
}

/// (x d/dx)^ℓ applied by nested five-point differences.
pub fn fd_euler_power(f: &dyn Fn(f64) -> Complex64, l: u32, x: f64, h: f64) -> Complex64 {
    nested_euler(f, l, x, h)
}

fn even_expansion(params: &Params, c: &[f64], x: f64, y: f64) -> Result<f64> {
    let t = (x * y).abs().powf(2.0 / params.n_f64());
    let z = kernel_argument(params, x, y);
    let mut acc = 0.0;
    for (j, cj) in c.iter().enumerate() {
        if *cj != 0.0 {
            acc += cj * t.powi(j as i32) * normalized_bessel(params.bessel_order().shifted(j as u32), z)?;
        }
    }
    Ok(acc)
}

fn odd_expansion(params: &Params, d: &[f64], x: f64, y: f64) -> Result<f64> {
    let t = (x * y).abs().powf(2.0 / params.n_f64());
    let z = kernel_argument(params, x, y);
    let mut acc = 0.0;
    for (j, dj) in d.iter().enumerate() {
        if *dj != 0.0 {
            let order = params.bessel_order().shifted(params.n() + j as u32);
            acc += dj * t.powi(j as i32) * x * y * normalized_bessel(order, z)?;
        }
    }
    Ok(acc)
}

/// Largest relative gap between an expansion of order `l` and nested finite
/// differences, over the oracle points.
fn oracle_residual(params: &Params, l: u32, odd: bool, row: &[f64]) -> f64 {
    let mut worst: f64 = 0.0;
    for &(x, y) in &ORACLE_POINTS {
        let base = |t: f64| -> Complex64 {
            let v = if odd {
                normalized_bessel(params.bessel_order().shifted(params.n()), kernel_argument(params, t, y))
                    .map(|j| t * y * j)
            } else {
                normalized_bessel(params.bessel_order(), kernel_argument(params, t, y))
            };
            Complex64::new(v.unwrap_or(f64::NAN), 0.0)
        };
        let fdv = fd_euler_power(&base, l, x, ORACLE_STEP).re;
        let ex = if odd { odd_expansion(params, row, x, y) } else { even_expansion(params, row, x, y) };
        let r = match ex {
            Ok(v) if v.is_finite() => (v - fdv).abs() / 1f64.max(fdv.abs()),
            _ => f64::INFINITY,
        };
        worst = worst.max(r);
    }
    worst
}

fn resolve(
    item: &str,
    formulas: [(Variant, String); 2],
    residual: impl Fn(Variant) -> f64,
) -> Resolution {
    let candidates: Vec<Candidate> = formulas
        .into_iter()
        .map(|(variant, formula)| Candidate { variant, formula, residual: residual(variant) })
        .collect();
    let (a, b) = (candidates[0].residual, candidates[1].residual);
    let indistinguishable = a.is_finite() && b.is_finite() && (a - b).abs() <= 1e-9;
    // prefer the derived form when both fit equally well
    let chosen = if indistinguishable {
        Variant::Derived
    } else if a <= b {
        candidates[0].variant
    } else {
        candidates[1].variant
    };
    Resolution { item: item.to_string(), candidates, chosen, indistinguishable }
}

/// Builds the tables, deciding each ambiguous ingredient by comparing both
/// candidate forms against finite differences of the kernel parts.
pub fn derivative_coeffs(params: &Params, l_max: u32) -> Result<DerivativeCoeffs> {
    if l_max == 0 {
        return Err(Error::Domain("derivative tables need l_max >= 1".into()));
    }
    if l_max > MAX_EXPANSION_ORDER {
        return Err(Error::Capacity(format!(
            "kernel derivative tables are validated up to order {MAX_EXPANSION_ORDER}, requested {l_max}"
        )));
    }
    let derived = Choices { c11: Variant::Derived, c_mult: Variant::Derived, d_mult: Variant::Derived };

    let c11 = resolve(
        "c_{1,1} base case",
        [
            (Variant::Nominal, "-n/(2ν)".to_string()),
            (Variant::Derived, "-n/(2(ν+1))".to_string()),
        ],
        |v| {
            let (c, _) = build_tables(params, 1, Choices { c11: v, ..derived });
            oracle_residual(params, 1, false, &c[1])
        },
    );
    let c_mult = resolve(
        "c_{j,ℓ} interior multiplier",
        [
            (Variant::Nominal, "2k/n".to_string()),
            (Variant::Derived, "2j/n".to_string()),
        ],
        |v| {
            let (c, _) = build_tables(params, 3, Choices { c11: c11.chosen, c_mult: v, ..derived });
            oracle_residual(params, 3, false, &c[3])
        },
    );
    let d_mult = resolve(
        "d_{j,ℓ} interior multiplier",
        [
            (Variant::Nominal, "2k/n + 1".to_string()),
            (Variant::Derived, "2j/n + 1".to_string()),
        ],
        |v| {
            let (_, d) = build_tables(params, 3, Choices { d_mult: v, ..derived });
            oracle_residual(params, 3, true, &d[3])
        },
    );
    let choices = Choices { c11: c11.chosen, c_mult: c_mult.chosen, d_mult: d_mult.chosen };
    let (c, d) = build_tables(params, l_max, choices);
    Ok(DerivativeCoeffs { l_max, c, d, resolutions: vec![c11, c_mult, d_mult] })
}

impl DerivativeCoeffs {
    /// Term list for (x d/dx)^ℓ B.
    pub fn euler_terms(&self, params: &Params, l: u32) -> Result<Vec<KernelTerm>> {
        if l > self.l_max {
            return Err(Error::Capacity(format!("tables cover ℓ <= {}, requested {l}", self.l_max)));
        }
        let odd_c = odd_prefactor(params);
        let mut terms = Vec::new();
        let row = l as usize;
        for j in 0..=row {
            let jj = 2 * j as u32;
            terms.push(KernelTerm {
                coeff: Complex64::new(self.c[row][j], 0.0),
                x_pow: jj,
                y_pow: jj,
                shift: j as u32,
                odd: false,
            });
            terms.push(KernelTerm { coeff: odd_c * self.d[row][j], x_pow: jj, y_pow: jj, shift: params.n() + j as u32, odd: true });
        }
        Ok(merge(terms))
    }
}

/// Term list for (n |x|^{2-2/n} Δ_k)^α (x d/dx)^ℓ B.
pub fn iterated_kernel_terms(
    params: &Params,
    coeffs: &DerivativeCoeffs,
    alpha: u32,
    l: u32,
) -> Result<Vec<KernelTerm>> {
    if alpha > MAX_EXPANSION_ORDER {
        return Err(Error::Capacity(format!(
            "iterated kernels are validated for α <= {MAX_EXPANSION_ORDER}, requested {alpha}"
        )));
    }
    let mut terms = coeffs.euler_terms(params, l)?;
    for _ in 0..alpha {
        terms = rewrite_laplacian(&terms, params);
    }
    Ok(terms)
}

/// Value of (n |x|^{2-2/n} Δ_k)^α (x d/dx)^ℓ B(x, y).
pub fn iterated_kernel_expansion(
    params: &Params,
    alpha: u32,
    l: u32,
    x: f64,
    y: f64,
) -> Result<Complex64> {
    let coeffs = derivative_coeffs(params, l.max(1))?;
    let terms = iterated_kernel_terms(params, &coeffs, alpha, l)?;
    evaluate_terms(&terms, params, x, y)
}

/// Relative gap between the expansion of n^α (|x|^{2-2/n}Δ_k)^α (x d/dx)^ℓ B(·, y)
/// at x and nested five-point differences with step h.
pub fn expansion_fd_residual(params: &Params, coeffs: &DerivativeCoeffs, alpha: u32, l: u32, x: f64, y: f64, h: f64) -> Result<f64> {
    if alpha > 1 {
        return Err(Error::Capacity("the nested-difference oracle covers α ≤ 1".into()));
    }
    let terms = iterated_kernel_terms(params, coeffs, alpha, l)?;
    let ex = evaluate_terms(&terms, params, x, y)?;
    let b = |t: f64| kernel(params, t, y).unwrap_or(Complex64::new(f64::NAN, 0.0));
    let inner = |t: f64| fd_euler_power(&b, l, t, h);
    let fdv = if alpha == 0 { inner(x) } else { fd::deformed_laplacian(&inner, params, x, h) * params.n_f64() };
    Ok((ex - fdv).norm() / ex.norm().max(1.0))
}

/// Relative residual of |x|^{2-2/n}Δ_k B(·, y) = -|y|^{2/n} B(·, y) at x by
/// five-point differences.
pub fn eigenfunction_fd_residual(params: &Params, x: f64, y: f64, h: f64) -> Result<f64> {
    let b = |t: f64| kernel(params, t, y).unwrap_or(Complex64::new(f64::NAN, 0.0));
    let lhs = fd::deformed_laplacian(&b, params, x, h);
    let rhs = kernel(params, x, y)? * (-y.abs().powf(params.mult_power()));
    Ok((lhs - rhs).norm() / rhs.norm().max(1.0))
}

/// Empirical sup of |B| together with its refinement history.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KernelBoundReport {
    pub m_estimate: f64,
    pub grid_spec: String,
    /// Sup found at each refinement level, coarsest first.
    pub history: Vec<f64>,
    pub stable: bool,
}

/// Scans |B(x, y)| over products xy with n |xy|^{1/n} ≤ z_max.
///
/// |B| depends on (x, y) only through xy, so the scan runs over the deformed
/// product t = sgn(xy) |xy|^{1/n} ∈ [-z_max/n, z_max/n], at `points` and two
/// successive doublings.
pub fn kernel_bound_scan(params: &Params, z_max: f64, points: usize) -> Result<KernelBoundReport> {
    if !(z_max > 0.0 && z_max <= BESSEL_Z_MAX) {
        return Err(Error::Domain(format!("scan radius must lie in (0, {BESSEL_Z_MAX}], got {z_max}")));
    }
    if points < 2 {
        return Err(Error::Domain("scan needs at least 2 points".into()));
    }
    let t_max = z_max / params.n_f64();
    let mut history = Vec::with_capacity(3);
    for level in 0..3 {
        let m = points << level;
        let mut sup: f64 = 0.0;
        for i in 0..=m {
            let t = -t_max + 2.0 * t_max * i as f64 / m as f64;
            let xy = params.to_x(t);
            sup = sup.max(kernel(params, xy, 1.0)?.norm());
        }
        history.push(sup);
    }
    let stable = (history[2] - history[1]).abs() < 1e-3 && (history[1] - history[0]).abs() < 1e-3;
    Ok(KernelBoundReport {
        m_estimate: history[2],
        grid_spec: format!("{} to {} uniform points in sgn(xy)|xy|^(1/n) on [-{t_max}, {t_max}]", points + 1, (points << 2) + 1),
        history,
        stable,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn p(k: f64, n: u32) -> Params {
        Params::new(k, n).unwrap()
    }

    #[test]
    fn phase_table() {
        for n in 0..12u32 {
            let expect = Complex64::new(0.0, -1.0).powu(n);
            assert!((minus_i_pow(n) - expect).norm() < 1e-15);
        }
    }

    #[test]
    fn worked_values() {
        let q = p(1.0, 1);
        assert_eq!(kernel_even(&q, 0.0, 3.0).unwrap(), 1.0);
        assert_abs_diff_eq!(kernel_even(&q, 1.0, std::f64::consts::PI).unwrap(), 0.0, epsilon = 1e-15);
        assert_eq!(kernel_odd(&q, 0.0, 2.0).unwrap(), Complex64::new(0.0, 0.0));
        let b = kernel(&q, 1.0, 1.0).unwrap();
        assert_abs_diff_eq!(b.re, 1f64.sin(), epsilon = 1e-15);
        // -i (1/2)(2/3) 𝚥_{3/2}(1) with 𝚥_{3/2}(1) = 3(sin 1 - cos 1)
        let odd = -(1.0 / 3.0) * 3.0 * (1f64.sin() - 1f64.cos());
        assert_abs_diff_eq!(b.im, odd, epsilon = 1e-15);
        assert_abs_diff_eq!(b.im, -0.301169, epsilon = 1e-6);
        assert_eq!(kernel(&q, 0.0, 7.3).unwrap(), Complex64::new(1.0, 0.0));
    }

    #[test]
    fn odd_prefactor_n2() {
        // (-i)^2 (1)^2 / (ν+1)(ν+2)
        let q = p(0.8, 2);
        let nu = q.nu();
        let expect = -1.0 / ((nu + 1.0) * (nu + 2.0));
        assert_abs_diff_eq!(odd_prefactor(&q).re, expect, epsilon = 1e-15);
    }

    #[test]
    fn outside_validated_domain() {
        let q = p(1.0, 1);
        assert!(matches!(kernel(&q, 30.0, 7.0), Err(Error::Convergence { .. })));
    }

    #[test]
    fn derived_forms_win_and_tables_match_euler_rewrites() {
        for &(k, n) in &[(1.0, 1), (0.8, 2), (1.0, 3), (0.35, 1)] {
            let q = p(k, n);
            let dc = derivative_coeffs(&q, 3).unwrap();
            assert_eq!(dc.resolutions.len(), 3);
            for r in &dc.resolutions {
                assert_eq!(r.chosen, Variant::Derived, "{} at k={k}, n={n}", r.item);
            }
            for l in 0..=3 {
                d_eq(&dc, &q, l);
            }
        }
    }

    fn d_eq(dc: &DerivativeCoeffs, q: &Params, l: u32) {
        let mut via_rules = base_terms(q);
        for _ in 0..l {
            via_rules = rewrite_euler(&via_rules, q);
        }
        let tables = dc.euler_terms(q, l).unwrap();
        assert_eq!(via_rules.len(), tables.len(), "l={l}");
        for (a, b) in via_rules.iter().zip(tables.iter()) {
            assert_eq!((a.x_pow, a.y_pow, a.shift, a.odd), (b.x_pow, b.y_pow, b.shift, b.odd));
            assert!((a.coeff - b.coeff).norm() <= 1e-13 * 1f64.max(a.coeff.norm()));
        }
    }

    #[test]
    fn nominal_base_case_is_rejected_by_the_oracle() {
        let q = p(1.0, 1);
        let dc = derivative_coeffs(&q, 1).unwrap();
        let c11 = &dc.resolutions[0];
        let nominal = c11.candidates.iter().find(|c| c.variant == Variant::Nominal).unwrap();
        let derived = c11.candidates.iter().find(|c| c.variant == Variant::Derived).unwrap();
        assert!(derived.residual < 1e-8, "{}", derived.residual);
        assert!(nominal.residual > 1e-2);
        assert_abs_diff_eq!(dc.c[1][1], -1.0 / 3.0, epsilon = 1e-15);
        assert!(dc.d.iter().all(|row| row[0] == 1.0));
    }

    #[test]
    fn order_limits() {
        let q = p(1.0, 1);
        assert!(derivative_coeffs(&q, 0).is_err());
        assert!(matches!(derivative_coeffs(&q, 4), Err(Error::Capacity(_))));
        assert!(iterated_kernel_expansion(&q, 4, 0, 1.0, 1.0).is_err());
    }

    #[test]
    fn no_operators_gives_the_kernel() {
        for &(k, n) in &[(1.0, 1), (0.8, 2), (1.0, 3)] {
            let q = p(k, n);
            for &(x, y) in &[(0.7, 1.3), (-1.2, 0.4), (2.0, -2.0)] {
                let v = iterated_kernel_expansion(&q, 0, 0, x, y).unwrap();
                assert!((v - kernel(&q, x, y).unwrap()).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn eigenfunction_relation_by_rewrite() {
        // n |x|^{2-2/n} Δ_k B(·, y) = -n |y|^{2/n} B
        for &(k, n) in &[(1.0, 1), (0.8, 2), (1.0, 3)] {
            let q = p(k, n);
            for &(x, y) in &[(0.7, 1.3), (-1.2, 0.4), (2.0, -2.0), (0.3, -3.0)] {
                let lhs = iterated_kernel_expansion(&q, 1, 0, x, y).unwrap();
                let rhs = kernel(&q, x, y).unwrap() * (-q.n_f64() * y.abs().powf(2.0 / q.n_f64()));
                assert!((lhs - rhs).norm() < 1e-12 * 1f64.max(rhs.norm()), "k={k} n={n} ({x},{y})");
            }
        }
    }

    #[test]
    fn expansions_match_nested_finite_differences() {
        for &(k, n) in &[(1.0, 1), (0.8, 2), (1.0, 3)] {
            let q = p(k, n);
            let dc = derivative_coeffs(&q, 3).unwrap();
            for &(x, y) in &[(0.7, 1.3), (-0.9, 1.1), (1.5, -0.8)] {
                for l in 0..=3u32 {
                    for alpha in 0..=1u32 {
                        let rel = expansion_fd_residual(&q, &dc, alpha, l, x, y, 1e-2).unwrap();
                        assert!(rel < 1e-4, "k={k} n={n} l={l} alpha={alpha}: {rel}");
                    }
                }
            }
        }
    }

    #[test]
    fn eigenfunction_by_differences() {
        for &(k, n) in &[(1.0, 1), (0.8, 2), (1.0, 3)] {
            let q = p(k, n);
            for i in 0..=8 {
                let x = 0.5 + 0.25 * f64::from(i);
                for &y in &[0.4, 1.3, -2.1] {
                    assert!(eigenfunction_fd_residual(&q, x, y, 1e-3).unwrap() < 1e-5);
                    assert!(eigenfunction_fd_residual(&q, -x, y, 1e-3).unwrap() < 1e-5);
                }
            }
        }
    }

    #[test]
    fn bound_scan() {
        for &(k, n) in &[(1.0, 1), (0.8, 2), (1.0, 3)] {
            let r = kernel_bound_scan(&p(k, n), 30.0, 400).unwrap();
            assert!(r.m_estimate >= 1.0 - 1e-12);
            assert!(r.stable, "{r:?}");
            assert_eq!(r.history.len(), 3);
        }
        assert!(kernel_bound_scan(&p(1.0, 1), 250.0, 10).is_err());
    }

    proptest! {
        #[test]
        fn symmetry_and_parity(x in -3.0f64..3.0, y in -3.0f64..3.0) {
            for q in [p(1.0, 1), p(0.8, 2), p(1.0, 3)] {
                let a = kernel(&q, x, y).unwrap();
                let b = kernel(&q, y, x).unwrap();
                prop_assert!((a - b).norm() <= 1e-14);
                let e1 = kernel_even(&q, x, y).unwrap();
                prop_assert!((e1 - kernel_even(&q, -x, y).unwrap()).abs() <= 1e-15);
                let o1 = kernel_odd(&q, x, y).unwrap();
                prop_assert!((o1 + kernel_odd(&q, -x, y).unwrap()).norm() <= 1e-14);
            }
        }
    }
}
