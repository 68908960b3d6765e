//! Seminorms of the adapted Schwartz space and membership diagnostics.
//!
//! All seminorms use the scaled operators n|x|^{2/n} and n|x|^{2-2/n}Δ_k, so
//! entries differ from the unscaled definition by the factor n^{α+β}.

use num_complex::Complex64;
use serde::Serialize;

use crate::atoms::{sequence_f_m, sequence_f_tilde, sequence_g_m, AtomSum};
use crate::error::{Error, Result};
use crate::measure::{weight_lp_norm, GridFunction, LpExponent, QuadratureGrid};
use crate::params::Params;
use crate::special_fn::{binomial, StirlingTable};

/// Largest α, β, ℓ accepted for atom sums.
pub const ATOM_RANGE_MAX: u32 = 5;
/// Largest α, β, ℓ accepted for grid functions.
pub const GRID_RANGE_MAX: u32 = 3;

const SAMPLES: usize = 4000;
const TAIL_REL: f64 = 1e-17;

/// A supremum over ℝ∖{0} together with how it was bounded.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SupEstimate {
    pub value: f64,
    /// Bound on |f| for |u| beyond `tail_start_u`.
    pub tail_bound: f64,
    pub tail_start_u: f64,
    /// Some term is unbounded at the origin; `value` is +∞.
    pub singular: bool,
}

fn term_bound(c: f64, power: f64, rate: f64, n: f64, u: f64) -> f64 {
    c * u.powf(n * power) * (-rate * n * u * u).exp()
}

/// sup_{x≠0} |f(x)| for an atom sum.
///
/// Each term is bounded by |c| u^{n p} e^{-s n u²} with u = |x|^{1/n}, which
/// decreases for u² > p/(2s). The sum is sampled densely in u on both sides
/// up to a radius U past every such turning point where the summed term
/// bounds are negligible, local maxima are refined by golden-section search,
/// and the summed bound at U covers everything beyond.
pub fn atom_sup(f: &AtomSum, params: &Params) -> SupEstimate {
    if f.is_zero() {
        return SupEstimate { value: 0.0, tail_bound: 0.0, tail_start_u: 0.0, singular: false };
    }
    if f.singular_at_origin() {
        return SupEstimate { value: f64::INFINITY, tail_bound: 0.0, tail_start_u: 0.0, singular: true };
    }
    let n = params.n_f64();
    let terms: Vec<(f64, f64, f64)> = f.terms().iter().map(|a| (a.coeff.norm(), a.origin_power(), a.rate)).collect();
    let turning = |p: f64, s: f64| (p.max(0.0) / (2.0 * s)).sqrt();
    let scale = terms
        .iter()
        .map(|&(c, p, s)| term_bound(c, p, s, n, turning(p, s)))
        .fold(0.0f64, f64::max);
    let mut u_end = terms.iter().map(|&(_, p, s)| turning(p, s)).fold(1.0f64, f64::max) * 1.5;
    let bound_at = |u: f64| terms.iter().map(|&(c, p, s)| term_bound(c, p, s, n, u)).sum::<f64>();
    while bound_at(u_end) > TAIL_REL * scale {
        u_end *= 1.25;
    }
    let tail = bound_at(u_end);

    // limit at the origin from the terms of total power zero
    let origin: Complex64 = f.terms().iter().filter(|a| a.origin_power() == 0.0).map(|a| a.coeff).sum();
    let mut best = origin.norm();
    for sign in [1.0, -1.0] {
        let g = |u: f64| f.evaluate_nonzero(params, sign * u.powf(n)).norm();
        let h = u_end / SAMPLES as f64;
        let vals: Vec<f64> = (1..=SAMPLES).map(|j| g(h * j as f64)).collect();
        for j in 0..SAMPLES {
            let left = if j == 0 { best.min(vals[0]) } else { vals[j - 1] };
            let right = if j + 1 < SAMPLES { vals[j + 1] } else { 0.0 };
            if vals[j] >= left && vals[j] >= right {
                let lo = h * j as f64;
                let hi = h * (j + 2) as f64;
                best = best.max(vals[j]).max(golden_max(&g, lo.max(h * 1e-6), hi));
            }
        }
    }
    SupEstimate { value: best.max(tail), tail_bound: tail, tail_start_u: u_end, singular: false }
}

fn golden_max(g: &impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut gc, mut gd) = (g(c), g(d));
    for _ in 0..80 {
        if gc > gd {
            b = d;
            d = c;
            gd = gc;
            c = b - r * (b - a);
            gc = g(c);
        } else {
            a = c;
            c = d;
            gc = gd;
            d = a + r * (b - a);
            gd = g(d);
        }
    }
    gc.max(gd)
}

/// (n|x|^{2/n})^α (n|x|^{2-2/n}Δ_k)^β f as an atom sum.
pub fn scaled_operator(f: &AtomSum, alpha: u32, beta: u32, params: &Params) -> AtomSum {
    let mut g = f.clone();
    for _ in 0..beta {
        g = g.apply_lower(params);
    }
    for _ in 0..alpha {
        g = g.apply_raise(params);
    }
    g
}

/// P_{α,β}(f) = sup_{x≠0} |(n|x|^{2/n})^α (n|x|^{2-2/n}Δ_k)^β f|.
pub fn seminorm_p(alpha: u32, beta: u32, f: &AtomSum, params: &Params) -> f64 {
    atom_sup(&scaled_operator(f, alpha, beta, params), params).value
}

/// Q_β(f) = sup_{x≠0} (1 + |x|^{2/n})^β |f|, from the exact expansion Σ_a C(β,a) |x|^{2a/n} f.
pub fn seminorm_q(beta: u32, f: &AtomSum, params: &Params) -> f64 {
    let mut acc = AtomSum::zero();
    let mut power = f.clone();
    for a in 0..=beta {
        acc = acc.add(&power.scale_real(binomial(beta as usize, a as usize) as f64));
        power = power.apply_mult(params);
    }
    atom_sup(&acc, params).value
}

/// The binomial bound Q_β(f) ≤ Σ_a C(β,a) n^{-a} P_{a,0}(f).
pub fn seminorm_q_bound(beta: u32, f: &AtomSum, params: &Params) -> f64 {
    (0..=beta)
        .map(|a| binomial(beta as usize, a as usize) as f64 * params.n_f64().powi(-(a as i32)) * seminorm_p(a, 0, f, params))
        .sum()
}

/// x^ℓ f^{(ℓ)} = Σ_j s(ℓ,j) (x d/dx)^j f.
pub fn xldl_by_stirling(f: &AtomSum, l: u32, params: &Params, table: &StirlingTable) -> Result<AtomSum> {
    table.require(l as usize)?;
    let mut acc = AtomSum::zero();
    let mut theta = f.clone();
    for j in 0..=l {
        let s = table.first_signed(l as usize, j as usize);
        if s != 0 {
            acc = acc.add(&theta.scale_real(s as f64));
        }
        theta = theta.apply_euler(params);
    }
    Ok(acc)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    ExactAtom,
    GridEstimate,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeminormEntry {
    pub alpha: u32,
    pub beta: u32,
    pub ell: u32,
    pub value: f64,
    pub method: Method,
    /// Decay certified beyond the sampled range (always false for grid estimates).
    pub certified: bool,
    /// Numerical support radius in u (|value| < 1e-10 beyond), grid estimates only.
    pub support_u: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeminormReport {
    pub params: Params,
    pub entries: Vec<SeminormEntry>,
}

impl SeminormReport {
    pub fn all_finite(&self) -> bool {
        self.entries.iter().all(|e| e.value.is_finite())
    }

    pub fn max_value(&self) -> f64 {
        self.entries.iter().map(|e| e.value).fold(0.0, f64::max)
    }

    /// CSV with header alpha,beta,ell,value,method,certified.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("alpha,beta,ell,value,method,certified\n");
        for e in &self.entries {
            let m = match e.method {
                Method::ExactAtom => "exact-atom",
                Method::GridEstimate => "grid-estimate",
            };
            s.push_str(&format!("{},{},{},{},{},{}\n", e.alpha, e.beta, e.ell, crate::measure::fmt17(e.value), m, e.certified));
        }
        s
    }
}

/// Input to [`membership_report`].
#[derive(Debug, Clone, Copy)]
pub enum Member<'a> {
    Atoms(&'a AtomSum),
    Grid(&'a GridFunction),
}

/// Every sup |(n|x|^{2/n})^α (n|x|^{2-2/n}Δ_k)^β (x^ℓ f^{(ℓ)})| for α, β, ℓ ≤ range.
pub fn membership_report(f: Member<'_>, params: &Params, range: u32) -> Result<SeminormReport> {
    match f {
        Member::Atoms(a) => atom_report(a, params, range),
        Member::Grid(g) => grid_report(g, range),
    }
}

fn atom_report(f: &AtomSum, params: &Params, range: u32) -> Result<SeminormReport> {
    if range > ATOM_RANGE_MAX {
        return Err(Error::Capacity(format!("atom reports go up to range {ATOM_RANGE_MAX}, got {range}")));
    }
    let table = StirlingTable::new(range as usize)?;
    let mut entries = Vec::new();
    for ell in 0..=range {
        let base = xldl_by_stirling(f, ell, params, &table)?;
        for beta in 0..=range {
            let mut g = base.clone();
            for _ in 0..beta {
                g = g.apply_lower(params);
            }
            for alpha in 0..=range {
                let est = atom_sup(&g, params);
                entries.push(SeminormEntry {
                    alpha,
                    beta,
                    ell,
                    value: est.value,
                    method: Method::ExactAtom,
                    certified: !est.singular,
                    support_u: None,
                });
                g = g.apply_raise(params);
            }
        }
    }
    entries.sort_by_key(|e| (e.alpha, e.beta, e.ell));
    Ok(SeminormReport { params: *params, entries })
}

/// Derivative in u, panel by panel, from the polynomial through each panel's nodes.
fn u_derivative(grid: &QuadratureGrid, v: &[Complex64]) -> Vec<Complex64> {
    let m = grid.spec().nodes_per_panel();
    let u = grid.u_nodes();
    let mut out = vec![Complex64::new(0.0, 0.0); v.len()];
    for start in (0..v.len()).step_by(m) {
        let nodes = &u[start..start + m];
        let w: Vec<f64> = (0..m)
            .map(|j| 1.0 / (0..m).filter(|&k| k != j).map(|k| nodes[j] - nodes[k]).product::<f64>())
            .collect();
        for i in 0..m {
            let mut diag = 0.0;
            let mut acc = Complex64::new(0.0, 0.0);
            for j in 0..m {
                if j != i {
                    let d = (w[j] / w[i]) / (nodes[i] - nodes[j]);
                    diag -= d;
                    acc += v[start + j] * d;
                }
            }
            out[start + i] = acc + v[start + i] * diag;
        }
    }
    out
}

/// x d/dx = (1/n) u d/du on grid samples.
fn grid_theta(grid: &QuadratureGrid, v: &[Complex64]) -> Vec<Complex64> {
    let n = grid.params().n_f64();
    u_derivative(grid, v).iter().zip(grid.u_nodes()).map(|(d, u)| d * (u / n)).collect()
}

/// n|x|^{2-2/n}Δ_k = n u^{-2} [θ² + (2k-1)θ - k(I - R)] with R f(x) = f(-x).
fn grid_lower(grid: &QuadratureGrid, v: &[Complex64]) -> Vec<Complex64> {
    let p = grid.params();
    let (n, k) = (p.n_f64(), p.k());
    let t1 = grid_theta(grid, v);
    let t2 = grid_theta(grid, &t1);
    (0..v.len())
        .map(|i| {
            let u = grid.u_nodes()[i];
            let refl = v[i] - v[grid.mirror(i)];
            (t2[i] + t1[i] * (2.0 * k - 1.0) - refl * k) * (n / (u * u))
        })
        .collect()
}

fn grid_report(f: &GridFunction, range: u32) -> Result<SeminormReport> {
    if range > GRID_RANGE_MAX {
        return Err(Error::Capacity(format!("grid reports go up to range {GRID_RANGE_MAX}, got {range}")));
    }
    let grid = f.grid().clone();
    let params = *grid.params();
    let table = StirlingTable::new(range as usize)?;
    let n = params.n_f64();
    let sup = |v: &[Complex64]| v.iter().map(|c| c.norm()).fold(0.0, f64::max);
    let support = |v: &[Complex64]| {
        grid.u_nodes().iter().zip(v).filter(|(_, c)| c.norm() >= 1e-10).map(|(u, _)| u.abs()).fold(0.0, f64::max)
    };
    let mut thetas = vec![f.values().to_vec()];
    for _ in 0..range {
        let next = grid_theta(&grid, thetas.last().unwrap());
        thetas.push(next);
    }
    let mut entries = Vec::new();
    for ell in 0..=range {
        let mut base = vec![Complex64::new(0.0, 0.0); grid.len()];
        for j in 0..=ell {
            let s = table.first_signed(ell as usize, j as usize) as f64;
            for (b, t) in base.iter_mut().zip(&thetas[j as usize]) {
                *b += t * s;
            }
        }
        let mut g = base;
        for beta in 0..=range {
            if beta > 0 {
                g = grid_lower(&grid, &g);
            }
            let mut h = g.clone();
            for alpha in 0..=range {
                if alpha > 0 {
                    h = h.iter().zip(grid.u_nodes()).map(|(c, u)| c * (n * u * u)).collect();
                }
                entries.push(SeminormEntry {
                    alpha,
                    beta,
                    ell,
                    value: sup(&h),
                    method: Method::GridEstimate,
                    certified: false,
                    support_u: Some(support(&h)),
                });
            }
        }
    }
    entries.sort_by_key(|e| (e.alpha, e.beta, e.ell));
    Ok(SeminormReport { params, entries })
}

/// Both sides of the finiteness equivalence for ranges ≤ `range`: whether every
/// P_{α,β}(f_m) is finite, and whether every membership entry is finite.
pub fn finiteness_equivalence(f: &AtomSum, params: &Params, range: u32) -> Result<(bool, bool)> {
    let table = StirlingTable::new(range as usize)?;
    let mut via_fm = true;
    for m in 0..=range {
        let fm = sequence_f_m(f, m, params, &table)?;
        for alpha in 0..=range {
            for beta in 0..=range {
                via_fm &= seminorm_p(alpha, beta, &fm, params).is_finite();
            }
        }
    }
    let via_def = membership_report(Member::Atoms(f), params, range)?.all_finite();
    Ok((via_fm, via_def))
}

/// One cell of the sandwich P(f_ℓ) ≤ P(f̃_{β,ℓ}) ≤ Σ |s(ℓ,j)| C(j,m) β^{j-m} P(f_m).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SandwichCell {
    pub alpha: u32,
    pub beta: u32,
    pub ell: u32,
    pub lower: f64,
    pub middle: f64,
    pub upper: f64,
}

impl SandwichCell {
    /// Largest violation of either inequality relative to max(1, middle).
    pub fn violation(&self) -> f64 {
        let scale = self.middle.max(1.0);
        ((self.lower - self.middle).max(0.0) + (self.middle - self.upper).max(0.0)) / scale
    }
}

/// The sandwich for α ≤ alpha_max, β ≤ beta_max and ℓ ≤ β.
pub fn sandwich(f: &AtomSum, params: &Params, alpha_max: u32, beta_max: u32) -> Result<Vec<SandwichCell>> {
    let table = StirlingTable::new(beta_max as usize)?;
    let fms = (0..=beta_max).map(|m| sequence_f_m(f, m, params, &table)).collect::<Result<Vec<_>>>()?;
    let mut cells = Vec::new();
    for beta in 0..=beta_max {
        for ell in 0..=beta {
            let tilde = sequence_f_tilde(f, beta, ell, params, &table)?;
            for alpha in 0..=alpha_max {
                let p_fm: Vec<f64> = fms.iter().map(|g| seminorm_p(alpha, beta, g, params)).collect();
                let mut upper = 0.0;
                for j in 0..=ell {
                    let s = table.first_signed(ell as usize, j as usize).unsigned_abs() as f64;
                    for m in 0..=j {
                        upper += s
                            * binomial(j as usize, m as usize) as f64
                            * f64::from(beta).powi((j - m) as i32)
                            * p_fm[m as usize];
                    }
                }
                cells.push(SandwichCell {
                    alpha,
                    beta,
                    ell,
                    lower: p_fm[ell as usize],
                    middle: seminorm_p(alpha, beta, &tilde, params),
                    upper,
                });
            }
        }
    }
    Ok(cells)
}

/// The chain ‖f‖_p ≤ ‖g_m‖_p ≤ ‖(1+|·|^{2/n})^{-β}‖_p Q_β(g_m).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EmbeddingChain {
    pub f_norm: f64,
    pub gm_norm: f64,
    pub weight_norm: f64,
    pub q_beta: f64,
    pub bound: f64,
}

impl EmbeddingChain {
    pub fn holds(&self, slack: f64) -> bool {
        self.f_norm <= self.gm_norm + slack && self.gm_norm <= self.bound + slack
    }

    pub fn slack(&self) -> f64 {
        self.bound - self.f_norm
    }
}

pub fn embedding_constants(f: &AtomSum, p: f64, beta: u32, m: u32, grid: std::sync::Arc<QuadratureGrid>) -> Result<EmbeddingChain> {
    let e = LpExponent::new(p)?;
    if e == LpExponent::Infinity {
        return Err(Error::Domain("the embedding chain is stated for finite p".into()));
    }
    let params = *grid.params();
    let weight_norm = weight_lp_norm(&params, f64::from(beta), p)?.value;
    let gm = sequence_g_m(f, m, &params);
    let f_norm = GridFunction::from_atoms(grid.clone(), f)?.lp_norm(e);
    let gm_norm = GridFunction::from_atoms(grid, &gm)?.lp_norm(e);
    let q_beta = seminorm_q(beta, &gm, &params);
    Ok(EmbeddingChain { f_norm, gm_norm, weight_norm, q_beta, bound: weight_norm * q_beta })
}

/// Smallest integer β with β p > kn + 1 - n/2.
pub fn embedding_beta_threshold(params: &Params, p: f64) -> u32 {
    (params.euler_shift() / p).floor() as u32 + 1
}
