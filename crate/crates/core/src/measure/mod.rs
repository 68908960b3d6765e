//! The weighted measure dμ = c |x|^{2k+2/n-2} dx on ℝ, realized in the
//! deformed variable u = sgn(x)|x|^{1/n}, where it becomes c n |u|^{2ν+1} du.

mod rules;

use std::fmt::Write as _;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::atoms::AtomSum;
use crate::error::{Error, Result};
use crate::params::Params;
use crate::special_fn::gamma;

pub use rules::{gauss_jacobi, gauss_legendre, power_weight_rule, Rule};

/// Truncation radius, node count and panels per half-line.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub u_max: f64,
    pub points: usize,
    pub panels: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec { u_max: 8.0, points: 512, panels: 16 }
    }
}

impl GridSpec {
    pub fn new(u_max: f64, points: usize, panels: usize) -> Self {
        GridSpec { u_max, points, panels }
    }

    /// Same layout with twice the nodes per panel.
    pub fn refined(&self) -> GridSpec {
        GridSpec { points: self.points * 2, ..*self }
    }

    pub fn nodes_per_panel(&self) -> usize {
        self.points / (2 * self.panels.max(1))
    }

    fn validate(&self) -> Result<()> {
        if !(self.u_max.is_finite() && self.u_max > 0.0) {
            return Err(Error::Domain(format!("u_max must be positive, got {}", self.u_max)));
        }
        if self.points < 64 || self.points % 2 != 0 {
            return Err(Error::Domain(format!("points must be even and at least 64, got {}", self.points)));
        }
        if self.panels == 0 || self.points % (2 * self.panels) != 0 {
            return Err(Error::Domain(format!(
                "points ({}) must split evenly into 2 × {} panels",
                self.points, self.panels
            )));
        }
        Ok(())
    }
}

/// Nodes and weights with Σ w_i g(x_i) ≈ ∫ g dμ.
///
/// Nodes are ascending in u, symmetric about 0 (node i mirrors node
/// len-1-i) and never 0. Each half-line is split into equal panels; the
/// panel touching the origin uses a Gauss–Jacobi rule that absorbs |u|^{2ν+1}
/// exactly, the others Gauss–Legendre with the density folded into the weights.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureGrid {
    params: Params,
    spec: GridSpec,
    u: Vec<f64>,
    x: Vec<f64>,
    weights: Vec<f64>,
    /// Barycentric weights for each panel's nodes, positive half-line, inner panel first.
    bary: Vec<Vec<f64>>,
}

impl QuadratureGrid {
    pub fn new(params: Params, spec: GridSpec) -> Result<Self> {
        spec.validate()?;
        let m = spec.nodes_per_panel();
        let h = spec.u_max / spec.panels as f64;
        let gamma_exp = 2.0 * params.nu() + 1.0;
        let dens = params.measure_const() * params.n_f64();
        let gl = gauss_legendre(m)?;
        let gj = power_weight_rule(m, gamma_exp)?;

        let mut pos_u = Vec::with_capacity(spec.points / 2);
        let mut pos_w = Vec::with_capacity(spec.points / 2);
        let mut bary = Vec::with_capacity(spec.panels);
        for p in 0..spec.panels {
            let lo = h * p as f64;
            let panel_nodes: Vec<f64> = if p == 0 {
                for (t, w) in gj.nodes.iter().zip(&gj.weights) {
                    pos_u.push(t * h);
                    pos_w.push(w * h.powf(gamma_exp + 1.0) * dens);
                }
                gj.nodes.iter().map(|t| t * h).collect()
            } else {
                let r = gl.mapped(lo, lo + h);
                for (u, w) in r.nodes.iter().zip(&r.weights) {
                    pos_u.push(*u);
                    pos_w.push(w * dens * u.powf(gamma_exp));
                }
                r.nodes
            };
            bary.push(barycentric_weights(&panel_nodes));
        }
        let half = pos_u.len();
        let mut u = Vec::with_capacity(2 * half);
        let mut weights = Vec::with_capacity(2 * half);
        for i in (0..half).rev() {
            u.push(-pos_u[i]);
            weights.push(pos_w[i]);
        }
        u.extend_from_slice(&pos_u);
        weights.extend_from_slice(&pos_w);
        let x = u.iter().map(|&v| params.to_x(v)).collect();
        Ok(QuadratureGrid { params, spec, u, x, weights, bary })
    }

    pub fn params(&self) -> &Params {
        &self.params
    }

    pub fn spec(&self) -> GridSpec {
        self.spec
    }

    pub fn u_max(&self) -> f64 {
        self.spec.u_max
    }

    pub fn len(&self) -> usize {
        self.u.len()
    }

    pub fn is_empty(&self) -> bool {
        self.u.is_empty()
    }

    pub fn u_nodes(&self) -> &[f64] {
        &self.u
    }

    pub fn x_nodes(&self) -> &[f64] {
        &self.x
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Index of the node at -u_i.
    pub fn mirror(&self, i: usize) -> usize {
        self.len() - 1 - i
    }

    /// Whether `other` has the same parameters and layout.
    pub fn same_as(&self, other: &QuadratureGrid) -> bool {
        self.params == other.params && self.spec == other.spec
    }

    /// Σ w_i g(x_i), summed in ascending node order.
    pub fn integrate_fn(&self, g: impl Fn(f64) -> Complex64) -> Complex64 {
        self.x.iter().zip(&self.weights).map(|(x, w)| g(*x) * *w).sum()
    }

    /// Interpolates node samples at an arbitrary u, panel by panel.
    /// Values beyond the truncation radius are taken to be zero.
    fn interpolate(&self, values: &[Complex64], u: f64) -> Complex64 {
        let u_max = self.spec.u_max;
        if !(u.abs() <= u_max) {
            return Complex64::new(0.0, 0.0);
        }
        let m = self.spec.nodes_per_panel();
        let h = u_max / self.spec.panels as f64;
        let p = ((u.abs() / h) as usize).min(self.spec.panels - 1);
        let half = self.len() / 2;
        let (start, nodes_sign) = if u >= 0.0 { (half + p * m, 1.0) } else { (half - (p + 1) * m, -1.0) };
        let bw = &self.bary[p];
        let mut num = Complex64::new(0.0, 0.0);
        let mut den = 0.0;
        for j in 0..m {
            // positive-side order j maps to index start + j, mirrored side reversed
            let idx = if nodes_sign > 0.0 { start + j } else { start + m - 1 - j };
            let diff = u - self.u[idx];
            if diff == 0.0 {
                return values[idx];
            }
            let c = bw[j] / diff * nodes_sign;
            num += values[idx] * c;
            den += c;
        }
        num / den
    }
}

fn barycentric_weights(nodes: &[f64]) -> Vec<f64> {
    // rescale differences to keep the products in range for large panels
    let span = nodes.last().unwrap_or(&1.0) - nodes.first().unwrap_or(&0.0);
    let scale = if span > 0.0 { 4.0 / span } else { 1.0 };
    nodes
        .iter()
        .enumerate()
        .map(|(j, xj)| {
            let prod: f64 = nodes
                .iter()
                .enumerate()
                .filter(|(m, _)| *m != j)
                .map(|(_, xm)| (xj - xm) * scale)
                .product();
            1.0 / prod
        })
        .collect()
}

/// Which L^p exponent to use.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum LpExponent {
    Finite(f64),
    Infinity,
}

impl LpExponent {
    pub fn new(p: f64) -> Result<Self> {
        if p == f64::INFINITY {
            Ok(LpExponent::Infinity)
        } else if p.is_finite() && p >= 1.0 {
            Ok(LpExponent::Finite(p))
        } else {
            Err(Error::Domain(format!("L^p needs 1 <= p <= ∞, got {p}")))
        }
    }

    pub fn value(self) -> f64 {
        match self {
            LpExponent::Finite(p) => p,
            LpExponent::Infinity => f64::INFINITY,
        }
    }
}

/// Complex samples aligned with the nodes of a shared grid.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    grid: Arc<QuadratureGrid>,
    values: Vec<Complex64>,
}

impl GridFunction {
    pub fn new(grid: Arc<QuadratureGrid>, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Data(format!(
                "{} samples for a grid of {} nodes",
                values.len(),
                grid.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !(v.re.is_finite() && v.im.is_finite())) {
            return Err(Error::Data(format!("sample {i} is not finite")));
        }
        Ok(GridFunction { grid, values })
    }

    pub fn zeros(grid: Arc<QuadratureGrid>) -> Self {
        let n = grid.len();
        GridFunction { grid, values: vec![Complex64::new(0.0, 0.0); n] }
    }

    /// Samples `f` at the x-nodes, in parallel; order of results is fixed.
    pub fn from_fn<F: Fn(f64) -> Complex64 + Sync>(grid: Arc<QuadratureGrid>, f: F) -> Result<Self> {
        let values: Vec<Complex64> = grid.x_nodes().par_iter().map(|&x| f(x)).collect();
        Self::new(grid, values)
    }

    pub fn from_real_fn<F: Fn(f64) -> f64 + Sync>(grid: Arc<QuadratureGrid>, f: F) -> Result<Self> {
        Self::from_fn(grid, |x| Complex64::new(f(x), 0.0))
    }

    pub fn from_atoms(grid: Arc<QuadratureGrid>, f: &AtomSum) -> Result<Self> {
        let params = *grid.params();
        Self::from_fn(grid, |x| f.evaluate_nonzero(&params, x))
    }

    pub fn grid(&self) -> &Arc<QuadratureGrid> {
        &self.grid
    }

    pub fn params(&self) -> &Params {
        self.grid.params()
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    fn check_same(&self, other: &GridFunction) -> Result<()> {
        if !self.grid.same_as(&other.grid) {
            return Err(Error::Plan("grid functions live on different grids".into()));
        }
        Ok(())
    }

    pub fn map(&self, f: impl Fn(f64, Complex64) -> Complex64) -> Result<GridFunction> {
        let values = self.grid.x_nodes().iter().zip(&self.values).map(|(x, v)| f(*x, *v)).collect();
        GridFunction::new(self.grid.clone(), values)
    }

    pub fn zip_with(
        &self,
        other: &GridFunction,
        f: impl Fn(Complex64, Complex64) -> Complex64,
    ) -> Result<GridFunction> {
        self.check_same(other)?;
        let values = self.values.iter().zip(&other.values).map(|(a, b)| f(*a, *b)).collect();
        GridFunction::new(self.grid.clone(), values)
    }

    pub fn add(&self, other: &GridFunction) -> Result<GridFunction> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &GridFunction) -> Result<GridFunction> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn mul(&self, other: &GridFunction) -> Result<GridFunction> {
        self.zip_with(other, |a, b| a * b)
    }

    pub fn scale(&self, c: Complex64) -> GridFunction {
        GridFunction { grid: self.grid.clone(), values: self.values.iter().map(|v| v * c).collect() }
    }

    /// Σ w_i f_i in ascending node order.
    pub fn integrate(&self) -> Complex64 {
        self.values.iter().zip(self.grid.weights()).map(|(v, w)| v * *w).sum()
    }

    pub fn lp_norm(&self, p: LpExponent) -> f64 {
        match p {
            LpExponent::Infinity => self.sup_norm(),
            LpExponent::Finite(p) => {
                let s: f64 = self.values.iter().zip(self.grid.weights()).map(|(v, w)| w * v.norm().powf(p)).sum();
                s.powf(1.0 / p)
            }
        }
    }

    /// L^p norm for a raw exponent, rejecting p < 1.
    pub fn norm(&self, p: f64) -> Result<f64> {
        Ok(self.lp_norm(LpExponent::new(p)?))
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Value at an arbitrary x by per-panel polynomial interpolation in u;
    /// zero beyond the grid's truncation radius.
    pub fn evaluate_at(&self, x: f64) -> Complex64 {
        self.grid.interpolate(&self.values, self.grid.params().to_u(x))
    }

    /// Samples this function on another grid with the same parameters.
    pub fn resample(&self, target: Arc<QuadratureGrid>) -> Result<GridFunction> {
        if target.params() != self.grid.params() {
            return Err(Error::Plan("cannot resample across parameter sets".into()));
        }
        let values = target.x_nodes().iter().map(|&x| self.evaluate_at(x)).collect();
        GridFunction::new(target, values)
    }

    /// Smallest R with |f| < threshold at every node beyond [-R, R].
    pub fn support_radius(&self, threshold: f64) -> f64 {
        self.grid
            .x_nodes()
            .iter()
            .zip(&self.values)
            .filter(|(_, v)| v.norm() >= threshold)
            .map(|(x, _)| x.abs())
            .fold(0.0, f64::max)
    }

    /// Fraction of ∫|f| dμ carried by |x| > radius.
    pub fn mass_outside(&self, radius: f64) -> f64 {
        let mut outside = 0.0;
        let mut total = 0.0;
        for ((x, v), w) in self.grid.x_nodes().iter().zip(&self.values).zip(self.grid.weights()) {
            let m = v.norm() * w;
            total += m;
            if x.abs() > radius {
                outside += m;
            }
        }
        if total == 0.0 {
            0.0
        } else {
            outside / total
        }
    }

    /// CSV with header u,x,re,im and 17 significant digits.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("u,x,re,im\n");
        for ((u, x), v) in self.grid.u_nodes().iter().zip(self.grid.x_nodes()).zip(&self.values) {
            let _ = writeln!(s, "{},{},{},{}", fmt17(*u), fmt17(*x), fmt17(v.re), fmt17(v.im));
        }
        s
    }

    /// Reads a CSV written by [`GridFunction::to_csv`] back onto `grid`.
    pub fn from_csv(grid: Arc<QuadratureGrid>, text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate();
        match lines.next() {
            Some((_, h)) if h.trim() == "u,x,re,im" => {}
            _ => return Err(Error::Parse("expected header u,x,re,im".into())),
        }
        let mut values = Vec::with_capacity(grid.len());
        for (lineno, line) in lines {
            if line.trim().is_empty() {
                continue;
            }
            let cols: Vec<&str> = line.split(',').collect();
            if cols.len() != 4 {
                return Err(Error::Parse(format!("line {}: expected 4 columns", lineno + 1)));
            }
            let num = |c: &str, name: &str| {
                c.trim().parse::<f64>().map_err(|e| Error::Parse(format!("line {}: {name}: {e}", lineno + 1)))
            };
            let u = num(cols[0], "u")?;
            let i = values.len();
            if i >= grid.len() || (u - grid.u_nodes()[i]).abs() > 1e-12 * 1f64.max(u.abs()) {
                return Err(Error::Parse(format!("line {}: node does not match the grid", lineno + 1)));
            }
            values.push(Complex64::new(num(cols[2], "re")?, num(cols[3], "im")?));
        }
        GridFunction::new(grid, values)
    }
}

/// Round-trip decimal with 17 significant digits.
pub fn fmt17(v: f64) -> String {
    format!("{v:.16e}")
}

/// Value of a weight integral with the gap between two rule sizes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WeightIntegral {
    pub value: f64,
    pub refinement_gap: f64,
}

const WEIGHT_RULE_NODES: usize = 64;

/// ∫ (1 + scale |x|^{2/n})^{-e} dμ over all of ℝ.
///
/// In u the integrand is 2 c n u^γ (1 + scale u²)^{-e} on (0, ∞), γ = 2ν+1.
/// The substitution u = t/(1-t) maps it onto [0, 1) as
/// t^γ (1-t)^{2e-γ-2} · c n ((1-t)² + scale t²)^{-e}, which a Gauss–Jacobi
/// rule integrates without truncation. Convergence needs 2e > γ + 1.
pub fn power_weight_integral(params: &Params, scale: f64, e: f64) -> Result<WeightIntegral> {
    if !(scale > 0.0 && scale.is_finite()) {
        return Err(Error::Domain(format!("weight scale must be positive, got {scale}")));
    }
    let g = 2.0 * params.nu() + 1.0;
    let threshold = params.euler_shift();
    if !(e > threshold) {
        return Err(Error::Divergence(format!(
            "∫(1 + {scale}|x|^(2/n))^(-{e}) dμ diverges unless the exponent exceeds kn + 1 - n/2 = {threshold}"
        )));
    }
    let a = 2.0 * e - g - 2.0;
    let eval = |m: usize| -> Result<f64> {
        let r = gauss_jacobi(m, a, g)?;
        // t = (1+s)/2: t^γ(1-t)^a = 2^{-(a+γ)} (1+s)^γ (1-s)^a, dt = ds/2
        let jac = 0.5f64.powf(a + g + 1.0);
        let dens = 2.0 * params.measure_const() * params.n_f64();
        Ok(r.nodes
            .iter()
            .zip(&r.weights)
            .map(|(s, w)| {
                let t = 0.5 * (1.0 + s);
                w * jac * dens * ((1.0 - t).powi(2) + scale * t * t).powf(-e)
            })
            .sum())
    };
    let coarse = eval(WEIGHT_RULE_NODES)?;
    let fine = eval(2 * WEIGHT_RULE_NODES)?;
    Ok(WeightIntegral { value: fine, refinement_gap: (fine - coarse).abs() })
}

/// σ(m) = ∫ (1 + n|x|^{2/n})^{-m} dμ, finite for m > kn + 1 - n/2.
pub fn sigma_integral(params: &Params, m: u32) -> Result<WeightIntegral> {
    power_weight_integral(params, params.n_f64(), f64::from(m))
}

/// Closed form of [`sigma_integral`]: c n^{-ν} B(ν+1, m-ν-1).
pub fn sigma_closed_form(params: &Params, m: u32) -> Result<f64> {
    let nu = params.nu();
    let b = f64::from(m) - nu - 1.0;
    if b <= 0.0 {
        return Err(Error::Divergence(format!("σ({m}) diverges")));
    }
    Ok(params.measure_const() * params.n_f64().powf(-nu) * gamma(nu + 1.0)? * gamma(b)? / gamma(f64::from(m))?)
}

/// ‖(1 + |·|^{2/n})^{-β}‖_p.
pub fn weight_lp_norm(params: &Params, beta: f64, p: f64) -> Result<WeightIntegral> {
    if !(p.is_finite() && p >= 1.0) {
        return Err(Error::Domain(format!("weight norm needs finite p >= 1, got {p}")));
    }
    let w = power_weight_integral(params, 1.0, beta * p)?;
    let value = w.value.powf(1.0 / p);
    Ok(WeightIntegral { value, refinement_gap: w.refinement_gap * value / (p * w.value) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn grid(k: f64, n: u32, spec: GridSpec) -> Arc<QuadratureGrid> {
        Arc::new(QuadratureGrid::new(Params::new(k, n).unwrap(), spec).unwrap())
    }

    fn gaussian(params: Params, s: f64) -> impl Fn(f64) -> Complex64 {
        move |x: f64| Complex64::new((-s * params.n_f64() * x.abs().powf(2.0 / params.n_f64())).exp(), 0.0)
    }

    #[test]
    fn layout() {
        let g = grid(1.0, 1, GridSpec::default());
        assert_eq!(g.len(), 512);
        assert!(g.u_nodes().windows(2).all(|w| w[0] < w[1]));
        assert!(g.u_nodes().iter().all(|u| *u != 0.0));
        for i in 0..g.len() {
            assert_eq!(g.u_nodes()[i], -g.u_nodes()[g.mirror(i)]);
            assert!(g.weights()[i] > 0.0);
        }
        assert!(QuadratureGrid::new(Params::new(1.0, 1).unwrap(), GridSpec::new(8.0, 62, 1)).is_err());
        assert!(QuadratureGrid::new(Params::new(1.0, 1).unwrap(), GridSpec::new(8.0, 512, 7)).is_err());
        assert!(QuadratureGrid::new(Params::new(1.0, 1).unwrap(), GridSpec::new(-1.0, 512, 16)).is_err());
    }

    #[test]
    fn gaussian_probability_k1_n1() {
        let g = grid(1.0, 1, GridSpec::default());
        let p = *g.params();
        let v = g.integrate_fn(gaussian(p, 0.5));
        assert!((v.re - 1.0).abs() < 1e-8, "{v}");
        let fine = grid(1.0, 1, GridSpec::default().refined());
        assert!((fine.integrate_fn(gaussian(p, 0.5)) - v).norm() < 1e-10);
    }

    #[test]
    fn gaussian_mass_all_pairs() {
        // ∫ e^{-s n |x|^{2/n}} dμ = (2s)^{-(ν+1)}, the transform of the Gaussian at 0
        for &(k, n) in &[(1.0, 1), (0.8, 2), (1.0, 3), (0.35, 1), (0.3, 2)] {
            let g = grid(k, n, GridSpec::default());
            let p = *g.params();
            for &s in &[0.4, 0.5, 1.0, 2.0] {
                let v = g.integrate_fn(gaussian(p, s)).re;
                assert_relative_eq!(v, (2.0 * s).powf(-(p.nu() + 1.0)), max_relative = 1e-10);
            }
        }
    }

    #[test]
    fn odd_functions_integrate_to_zero() {
        let g = grid(0.8, 2, GridSpec::default());
        assert!(g.integrate_fn(|x| Complex64::new(x * (-x.abs()).exp(), 0.0)).norm() < 1e-14);
    }

    #[test]
    fn lp_norms_of_gaussian() {
        let g = grid(1.0, 1, GridSpec::default());
        let p = *g.params();
        let f = GridFunction::from_fn(g.clone(), gaussian(p, 0.5)).unwrap();
        assert!((f.lp_norm(LpExponent::Finite(1.0)) - 1.0).abs() < 1e-8);
        // sup over the grid, attained at the innermost node
        assert!((f.lp_norm(LpExponent::Infinity) - 1.0).abs() < 1e-4);
        // ‖f‖_2² = ∫ e^{-x²} dμ = 2^{-3/2}... with s = 1: (2)^{-3/2}
        assert_relative_eq!(f.lp_norm(LpExponent::Finite(2.0)), 2f64.powf(-0.75), max_relative = 1e-10);
        let z = GridFunction::zeros(g);
        assert_eq!(z.norm(3.0).unwrap(), 0.0);
        assert_eq!(z.integrate(), Complex64::new(0.0, 0.0));
        assert!(f.norm(0.5).is_err());
    }

    #[test]
    fn homogeneity_under_dilation() {
        for &(k, n) in &[(1.0, 1), (0.8, 2), (1.0, 3)] {
            let g = grid(k, n, GridSpec::default());
            let p = *g.params();
            let f = gaussian(p, 1.5);
            let base = g.integrate_fn(&f).re;
            for &t in &[0.5, 2.0] {
                let scaled = g.integrate_fn(|x| f(t * x)).re;
                assert_relative_eq!(scaled, t.powf(-p.homogeneity()) * base, max_relative = 1e-8);
            }
        }
    }

    #[test]
    fn interpolation_reproduces_smooth_functions() {
        for &(k, n) in &[(1.0, 1), (0.8, 2), (1.0, 3)] {
            let g = grid(k, n, GridSpec::default());
            let p = *g.params();
            let f = GridFunction::from_fn(g.clone(), gaussian(p, 0.5)).unwrap();
            for &x in &[-2.7, -1.0, -0.013, 0.0, 1e-4, 0.5, 1.3, 3.0] {
                let exact = gaussian(p, 0.5)(x);
                assert!((f.evaluate_at(x) - exact).norm() < 1e-10, "k={k} n={n} x={x}");
            }
            assert_eq!(f.evaluate_at(p.to_x(9.0)), Complex64::new(0.0, 0.0));
        }
    }

    #[test]
    fn csv_round_trip() {
        let g = grid(1.0, 3, GridSpec::new(4.0, 64, 2));
        let f = GridFunction::from_fn(g.clone(), |x| Complex64::new(x.sin(), x.cos())).unwrap();
        let text = f.to_csv();
        assert!(text.starts_with("u,x,re,im\n"));
        let back = GridFunction::from_csv(g.clone(), &text).unwrap();
        assert_eq!(back, f);
        assert!(GridFunction::from_csv(g, "a,b\n").is_err());
    }

    #[test]
    fn sigma_values() {
        let p = Params::new(1.0, 1).unwrap();
        let s = sigma_integral(&p, 2).unwrap();
        let expect = std::f64::consts::PI / (2.0 * (2.0 * std::f64::consts::PI).sqrt());
        assert_relative_eq!(s.value, expect, max_relative = 1e-12);
        assert!(s.refinement_gap < 1e-8);
        assert_relative_eq!(expect, 0.626657, max_relative = 1e-6);
        // threshold ν + 1 = 3/2, so m = 1 diverges
        assert!(matches!(sigma_integral(&p, 1), Err(Error::Divergence(_))));
        assert!(matches!(sigma_integral(&Params::new(1.0, 2).unwrap(), 2), Err(Error::Divergence(_))));
        for &(k, n) in &[(0.8, 2), (1.0, 3), (0.35, 1)] {
            let q = Params::new(k, n).unwrap();
            for m in 3..8 {
                let s = sigma_integral(&q, m).unwrap();
                assert_relative_eq!(s.value, sigma_closed_form(&q, m).unwrap(), max_relative = 1e-10);
            }
        }
    }

    #[test]
    fn weight_norm_against_grid_quadrature() {
        // decays slowly, so compare on a wide grid with a loose tolerance
        let p = Params::new(1.0, 1).unwrap();
        let w = weight_lp_norm(&p, 3.0, 2.0).unwrap();
        let g = grid(1.0, 1, GridSpec::new(400.0, 8000, 200));
        let direct = g.integrate_fn(|x| Complex64::new((1.0 + x * x).powf(-6.0), 0.0)).re.sqrt();
        assert_relative_eq!(w.value, direct, max_relative = 1e-6);
    }

    proptest! {
        #[test]
        fn holder(seed in 0u64..1000) {
            let g = grid(0.8, 2, GridSpec::new(4.0, 64, 2));
            let mut state = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            let mut next = move || {
                state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                ((state >> 11) as f64 / (1u64 << 53) as f64) * 2.0 - 1.0
            };
            let f = GridFunction::new(g.clone(), (0..g.len()).map(|_| Complex64::new(next(), next())).collect()).unwrap();
            let h = GridFunction::new(g.clone(), (0..g.len()).map(|_| Complex64::new(next(), next())).collect()).unwrap();
            let lhs = f.mul(&h).unwrap().norm(1.0).unwrap();
            prop_assert!(lhs <= f.norm(2.0).unwrap() * h.norm(2.0).unwrap() + 1e-12);
        }

        #[test]
        fn linearity(a in -2.0f64..2.0, b in -2.0f64..2.0) {
            let g = grid(1.0, 1, GridSpec::new(6.0, 64, 4));
            let p = *g.params();
            let f = GridFunction::from_fn(g.clone(), gaussian(p, 0.5)).unwrap();
            let h = GridFunction::from_fn(g.clone(), |x| Complex64::new(x * (-x * x).exp(), 1.0 / (1.0 + x * x))).unwrap();
            let comb = f.scale(Complex64::new(a, 0.0)).add(&h.scale(Complex64::new(b, 0.0))).unwrap();
            let lhs = comb.integrate();
            let rhs = f.integrate() * a + h.integrate() * b;
            prop_assert!((lhs - rhs).norm() <= 1e-13);
        }
    }
}
