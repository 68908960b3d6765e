//! Generalized translation and convolution (both computed on the Fourier
//! side), approximate identities, and the averaging operator T.

use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::atoms::{sequence_g_m, AtomSum};
use crate::error::{Error, Result};
use crate::kernel::kernel;
use crate::measure::{gauss_legendre, power_weight_rule, GridFunction, GridSpec, LpExponent, QuadratureGrid};
use crate::params::Params;
use crate::transform::TransformPlan;

fn c(v: f64) -> Complex64 {
    Complex64::new(v, 0.0)
}

/// The multiplier B((-1)^n x0, y_j) on the plan's target grid.
fn translation_multiplier(plan: &TransformPlan, x0: f64) -> Result<GridFunction> {
    let params = *plan.params();
    let xs = x0 * params.parity_sign();
    let values = plan
        .target()
        .x_nodes()
        .par_iter()
        .map(|&y| kernel(&params, xs, y))
        .collect::<Result<Vec<_>>>()?;
    GridFunction::new(plan.target().clone(), values)
}

/// τ_{x0} f = F⁻¹( B((-1)^n x0, ·) F f ).
pub fn translate(plan: &TransformPlan, f: &GridFunction, x0: f64) -> Result<GridFunction> {
    let ff = plan.forward(f)?;
    plan.inverse(&ff.mul(&translation_multiplier(plan, x0)?)?)
}

/// Largest |F(τ_{x0} f)(y) / F f(y) - B((-1)^n x0, y)| over target nodes where |F f| > floor.
pub fn translation_multiplier_residual(plan: &TransformPlan, f: &GridFunction, x0: f64, floor: f64) -> Result<f64> {
    let ff = plan.forward(f)?;
    let ft = plan.forward(&translate(plan, f, x0)?)?;
    let mult = translation_multiplier(plan, x0)?;
    let mut worst: f64 = 0.0;
    for ((a, b), m) in ft.values().iter().zip(ff.values()).zip(mult.values()) {
        if b.norm() > floor {
            worst = worst.max((a / b - m).norm());
        }
    }
    Ok(worst)
}

/// f ⋆ g = F⁻¹(F f · F g).
pub fn convolve(plan: &TransformPlan, f: &GridFunction, g: &GridFunction) -> Result<GridFunction> {
    plan.inverse(&plan.forward(f)?.mul(&plan.forward(g)?)?)
}

/// (f ⋆ g)(x) = ∫ f(y) (τ_x g)((-1)^n y) dμ(y), with τ_x g sampled on the
/// source grid and (-1)^n y read off the mirrored node.
pub fn convolve_direct(plan: &TransformPlan, f: &GridFunction, g: &GridFunction, x: f64) -> Result<Complex64> {
    let tg = translate(plan, g, x)?;
    let grid = plan.source();
    let odd_n = plan.params().n() % 2 == 1;
    let mut acc = c(0.0);
    for i in 0..grid.len() {
        let j = if odd_n { grid.mirror(i) } else { i };
        acc += f.values()[i] * tg.values()[j] * grid.weights()[i];
    }
    Ok(acc)
}

/// ‖f ⋆ g‖_q / (‖f‖_p ‖g‖_r) for 1/p + 1/r = 1/q + 1.
pub fn young_check(plan: &TransformPlan, f: &GridFunction, g: &GridFunction, p: f64, r: f64, q: f64) -> Result<f64> {
    let (pe, re, qe) = (LpExponent::new(p)?, LpExponent::new(r)?, LpExponent::new(q)?);
    let inv = |e: LpExponent| 1.0 / e.value();
    if (inv(pe) + inv(re) - inv(qe) - 1.0).abs() > 1e-12 {
        return Err(Error::Domain(format!("Young exponents need 1/p + 1/r = 1/q + 1, got p={p}, r={r}, q={q}")));
    }
    let denom = f.lp_norm(pe) * g.lp_norm(re);
    if denom == 0.0 {
        return Err(Error::Domain("Young ratio is undefined for a zero factor".into()));
    }
    Ok(convolve(plan, f, g)?.lp_norm(qe) / denom)
}

/// ‖τ_x f‖_p / ‖f‖_p for each x.
pub fn translation_norm_ratios(plan: &TransformPlan, f: &GridFunction, xs: &[f64], p: f64) -> Result<Vec<f64>> {
    let e = LpExponent::new(p)?;
    let base = f.lp_norm(e);
    if base == 0.0 {
        return Err(Error::Domain("translation ratio is undefined for the zero function".into()));
    }
    xs.iter().map(|&x| Ok(translate(plan, f, x)?.lp_norm(e) / base)).collect()
}

/// exp(-1/(1 - (u/u0)²)) for |u| < u0, zero beyond.
pub fn bump_profile(u: f64, u0: f64) -> f64 {
    let t = u / u0;
    if t.abs() >= 1.0 {
        0.0
    } else {
        (-1.0 / (1.0 - t * t)).exp()
    }
}

/// The bump profile as a function of x.
pub fn bump(params: &Params, u0: f64) -> impl Fn(f64) -> f64 + Sync + Send + Copy {
    let p = *params;
    move |x: f64| bump_profile(p.to_u(x), u0)
}

/// Nodes per half-line for the grid on which an approximate identity base is integrated.
const BASE_GRID_POINTS: usize = 256;
const BASE_GRID_PANELS: usize = 8;

/// A non-negative base φ with ∫ φ dμ = 1 and its dilations
/// φ_r(x) = r^{-(2k+2/n-1)} φ(x / r).
#[derive(Debug, Clone)]
pub struct ApproxIdentity {
    params: Params,
    u0: f64,
    norm: f64,
    grid: Arc<QuadratureGrid>,
}

impl ApproxIdentity {
    /// The bump supported on |u| < u0, normalized numerically.
    pub fn bump(params: Params, u0: f64) -> Result<Self> {
        if !(u0.is_finite() && u0 > 0.0) {
            return Err(Error::Domain(format!("bump radius must be positive, got {u0}")));
        }
        let grid = Arc::new(QuadratureGrid::new(params, GridSpec::new(u0, BASE_GRID_POINTS, BASE_GRID_PANELS))?);
        let prof = bump(&params, u0);
        let mass = grid.integrate_fn(|x| c(prof(x))).re;
        Ok(ApproxIdentity { params, u0, norm: 1.0 / mass, grid })
    }

    pub fn params(&self) -> &Params {
        &self.params
    }

    /// Radius of the base's support in u.
    pub fn support_u(&self) -> f64 {
        self.u0
    }

    pub fn value(&self, x: f64) -> f64 {
        self.norm * bump_profile(self.params.to_u(x), self.u0)
    }

    pub fn dilated_value(&self, r: f64, x: f64) -> f64 {
        r.powf(-self.params.homogeneity()) * self.value(x / r)
    }

    /// ∫ φ dμ on the base's own grid.
    pub fn mass(&self) -> f64 {
        self.grid.integrate_fn(|x| c(self.value(x))).re
    }

    /// φ_r sampled on a grid.
    pub fn dilate(&self, grid: Arc<QuadratureGrid>, r: f64) -> Result<GridFunction> {
        check_radius(r)?;
        GridFunction::from_real_fn(grid, |x| self.dilated_value(r, x))
    }

    /// F φ at one point, integrated on the base's own grid.
    pub fn fourier_at(&self, y: f64) -> Result<Complex64> {
        let mut acc = c(0.0);
        for (x, w) in self.grid.x_nodes().iter().zip(self.grid.weights()) {
            acc += kernel(&self.params, *x, y)? * (self.value(*x) * w);
        }
        Ok(acc)
    }

    /// F φ_r on the plan's target grid, from F φ_r(y) = F φ(r y).
    pub fn fourier_dilated(&self, plan: &TransformPlan, r: f64) -> Result<GridFunction> {
        check_radius(r)?;
        let values = plan
            .target()
            .x_nodes()
            .par_iter()
            .map(|&y| self.fourier_at(r * y))
            .collect::<Result<Vec<_>>>()?;
        GridFunction::new(plan.target().clone(), values)
    }

    /// f ⋆ φ_r.
    pub fn mollify(&self, plan: &TransformPlan, f: &GridFunction, r: f64) -> Result<GridFunction> {
        plan.inverse(&plan.forward(f)?.mul(&self.fourier_dilated(plan, r)?)?)
    }
}

fn check_radius(r: f64) -> Result<()> {
    if !(r.is_finite() && r > 0.0) {
        return Err(Error::Domain(format!("dilation radius must be positive, got {r}")));
    }
    Ok(())
}

/// ‖f ⋆ φ_r - f‖_p for each r of the schedule.
pub fn approx_identity_convergence(
    plan: &TransformPlan,
    f: &GridFunction,
    phi: &ApproxIdentity,
    p: f64,
    schedule: &[f64],
) -> Result<Vec<f64>> {
    Ok(approx_identity_convergence_multi(plan, f, phi, &[p], schedule)?.remove(0))
}

/// [`approx_identity_convergence`] for several exponents at once, one row per p.
pub fn approx_identity_convergence_multi(
    plan: &TransformPlan,
    f: &GridFunction,
    phi: &ApproxIdentity,
    ps: &[f64],
    schedule: &[f64],
) -> Result<Vec<Vec<f64>>> {
    let exps = ps.iter().map(|&p| LpExponent::new(p)).collect::<Result<Vec<_>>>()?;
    if exps.contains(&LpExponent::Infinity) {
        return Err(Error::Domain("approximate-identity convergence is stated for finite p".into()));
    }
    let ff = plan.forward(f)?;
    let mut rows = vec![Vec::with_capacity(schedule.len()); exps.len()];
    for &r in schedule {
        let diff = plan.inverse(&ff.mul(&phi.fourier_dilated(plan, r)?)?)?.sub(f)?;
        for (row, e) in rows.iter_mut().zip(&exps) {
            row.push(diff.lp_norm(*e));
        }
    }
    Ok(rows)
}

/// Nodes of the t-rule in [`t_operator_at`].
pub const T_RULE_NODES: usize = 64;

/// (T f)(x) = ∫_0^1 f(tx) t^{2k+2/n-1} dt, by a Gauss rule carrying the power weight.
pub fn t_operator_at(params: &Params, f: impl Fn(f64) -> Complex64, x: f64) -> Result<Complex64> {
    let rule = power_weight_rule(T_RULE_NODES, params.homogeneity())?;
    Ok(rule.nodes.iter().zip(&rule.weights).map(|(t, w)| f(t * x) * *w).sum())
}

/// T applied to an atom sum, evaluated at each x.
pub fn t_operator_atoms(params: &Params, f: &AtomSum, xs: &[f64]) -> Result<Vec<Complex64>> {
    xs.iter().map(|&x| t_operator_at(params, |t| f.evaluate(params, t).unwrap_or(c(f64::NAN)), x)).collect()
}

/// T applied to a grid function, reading off-grid values by interpolation.
pub fn t_operator_grid(f: &GridFunction) -> Result<GridFunction> {
    let params = *f.params();
    let values = f
        .grid()
        .x_nodes()
        .par_iter()
        .map(|&x| t_operator_at(&params, |t| f.evaluate_at(t), x))
        .collect::<Result<Vec<_>>>()?;
    GridFunction::new(f.grid().clone(), values)
}

/// sup |T((x d/dx + 2k + 2/n) f) - f| over the given points.
pub fn t_inverse_residual(params: &Params, f: &AtomSum, xs: &[f64]) -> Result<f64> {
    let g = AtomSum::combine([(1.0, &f.apply_euler(params)), (params.lp_shift(), f)]);
    let tg = t_operator_atoms(params, &g, xs)?;
    let mut worst: f64 = 0.0;
    for (x, v) in xs.iter().zip(tg) {
        worst = worst.max((v - f.evaluate(params, *x)?).norm());
    }
    Ok(worst)
}

/// (‖f‖_p, ‖g_m‖_p) on a grid.
pub fn gm_inequality(f: &AtomSum, m: u32, p: f64, grid: Arc<QuadratureGrid>) -> Result<(f64, f64)> {
    let e = LpExponent::new(p)?;
    if e == LpExponent::Infinity {
        return Err(Error::Domain("the g_m inequality is stated for finite p".into()));
    }
    let params = *grid.params();
    let gm = sequence_g_m(f, m, &params);
    let lhs = GridFunction::from_atoms(grid.clone(), f)?.lp_norm(e);
    let rhs = GridFunction::from_atoms(grid, &gm)?.lp_norm(e);
    Ok((lhs, rhs))
}

/// Classical mollification in u: g(u) = ∫ f(u - s) η_δ(s) ds with η_δ the
/// normalized bump of radius δ.
pub fn classical_mollify(params: &Params, f: impl Fn(f64) -> f64 + Sync, delta: f64) -> Result<impl Fn(f64) -> f64 + Sync> {
    if !(delta.is_finite() && delta > 0.0) {
        return Err(Error::Domain(format!("mollifier width must be positive, got {delta}")));
    }
    // composite rule on [-δ, δ]: 8 panels of 16 nodes
    let panels = 8;
    let gl = gauss_legendre(16)?;
    let mut nodes = Vec::new();
    let mut weights = Vec::new();
    for pidx in 0..panels {
        let lo = -delta + 2.0 * delta * pidx as f64 / panels as f64;
        let hi = lo + 2.0 * delta / panels as f64;
        let r = gl.mapped(lo, hi);
        for (s, w) in r.nodes.iter().zip(&r.weights) {
            let b = bump_profile(*s, delta);
            nodes.push(*s);
            weights.push(w * b);
        }
    }
    let total: f64 = weights.iter().sum();
    for w in &mut weights {
        *w /= total;
    }
    let p = *params;
    let samples: Vec<(f64, f64)> = nodes.into_iter().zip(weights).collect();
    Ok(move |x: f64| {
        let u = p.to_u(x);
        samples.iter().map(|(s, w)| w * f(p.to_x(u - s))).sum()
    })
}

/// Outcome of replaying the ε/2 + ε/2 density argument.
#[derive(Debug, Clone, Serialize)]
pub struct DensityReport {
    pub p: f64,
    pub epsilon: f64,
    pub delta: f64,
    /// ‖f - g‖_p with g the classical mollification of f.
    pub f_minus_g: f64,
    pub schedule: Vec<f64>,
    /// ‖φ_r ⋆ g - g‖_p along the schedule.
    pub mollifier_errors: Vec<f64>,
    /// First r of the schedule with ‖φ_r ⋆ g - g‖_p < ε/2, if any.
    pub chosen_r: Option<f64>,
    /// ‖f - φ_r ⋆ g‖_p at the chosen r.
    pub total_error: Option<f64>,
    pub success: bool,
}

/// Tent in u of half-width a: max(0, 1 - |u|/a).
pub fn tent(params: &Params, a: f64) -> impl Fn(f64) -> f64 + Sync + Send + Copy {
    let p = *params;
    move |x: f64| (1.0 - p.to_u(x).abs() / a).max(0.0)
}

/// Replays the density argument for f: pick δ halving until ‖f - g‖_p < ε/2,
/// then walk the schedule until ‖φ_r ⋆ g - g‖_p < ε/2, and report
/// ‖f - φ_r ⋆ g‖_p, bounded by the triangle inequality by ε.
pub fn density_experiment(
    plan: &TransformPlan,
    f: impl Fn(f64) -> f64 + Sync + Copy,
    phi: &ApproxIdentity,
    p: f64,
    epsilon: f64,
    schedule: &[f64],
) -> Result<DensityReport> {
    let e = LpExponent::new(p)?;
    if !(epsilon > 0.0) {
        return Err(Error::Domain("ε must be positive".into()));
    }
    let params = *plan.params();
    let grid = plan.source().clone();
    let fg = GridFunction::from_real_fn(grid.clone(), f)?;
    let mut delta = 0.5;
    let mut g;
    let mut f_minus_g;
    loop {
        let m = classical_mollify(&params, f, delta)?;
        g = GridFunction::from_real_fn(grid.clone(), m)?;
        f_minus_g = fg.sub(&g)?.lp_norm(e);
        if f_minus_g < epsilon / 2.0 || delta < 1e-3 {
            break;
        }
        delta /= 2.0;
    }
    let mut errors = Vec::with_capacity(schedule.len());
    let mut chosen = None;
    let mut total = None;
    let fourier_g = plan.forward(&g)?;
    for &r in schedule {
        let conv = plan.inverse(&fourier_g.mul(&phi.fourier_dilated(plan, r)?)?)?;
        let err = conv.sub(&g)?.lp_norm(e);
        errors.push(err);
        if chosen.is_none() && err < epsilon / 2.0 {
            chosen = Some(r);
            total = Some(conv.sub(&fg)?.lp_norm(e));
            break;
        }
    }
    let success = f_minus_g < epsilon / 2.0 && total.is_some_and(|t| t < epsilon);
    Ok(DensityReport {
        p,
        epsilon,
        delta,
        f_minus_g,
        schedule: schedule.to_vec(),
        mollifier_errors: errors,
        chosen_r: chosen,
        total_error: total,
        success,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::GridSpec;
    use approx::assert_relative_eq;

    fn params(k: f64, n: u32) -> Params {
        Params::new(k, n).unwrap()
    }

    fn plan(p: Params) -> TransformPlan {
        TransformPlan::for_rate(p, 0.5, 512, 16).unwrap()
    }

    fn gauss(plan: &TransformPlan, s: f64) -> GridFunction {
        plan.sample(&AtomSum::gaussian(s).unwrap()).unwrap()
    }

    #[test]
    fn translation_by_zero_is_identity() {
        for &(k, n) in &[(1.0, 1), (0.8, 2), (1.0, 3)] {
            let pl = plan(params(k, n));
            let f = gauss(&pl, 0.5);
            assert!(translate(&pl, &f, 0.0).unwrap().sub(&f).unwrap().sup_norm() <= 1e-5);
        }
    }

    #[test]
    fn translation_multiplier_identity() {
        let pl = plan(params(1.0, 1));
        let f = gauss(&pl, 0.5);
        for &x0 in &[0.3, -0.8, 1.5] {
            assert!(translation_multiplier_residual(&pl, &f, x0, 1e-3).unwrap() <= 1e-6);
        }
    }

    #[test]
    fn convolution_commutes_and_matches_direct_form() {
        for &(k, n) in &[(1.0, 1), (0.8, 2)] {
            let pl = plan(params(k, n));
            let f = gauss(&pl, 0.5);
            let g = pl.sample(&AtomSum::gaussian(0.9).unwrap().add(&AtomSum::odd_gaussian(0.7).unwrap())).unwrap();
            let fg = convolve(&pl, &f, &g).unwrap();
            let gf = convolve(&pl, &g, &f).unwrap();
            assert!(fg.sub(&gf).unwrap().sup_norm() <= 1e-8);
            let grid = pl.source();
            for &i in &[grid.len() / 2, grid.len() / 2 + 20, grid.len() / 2 - 35, 100, grid.len() - 150] {
                let x = grid.x_nodes()[i];
                let direct = convolve_direct(&pl, &f, &g, x).unwrap();
                assert!((direct - fg.values()[i]).norm() <= 1e-4, "x={x}");
            }
        }
    }

    #[test]
    fn gaussian_convolution_closed_form() {
        // F f F g is again a Gaussian: rates s1, s2 give rate s1 s2/(s1+s2)
        let p = params(1.0, 1);
        let pl = plan(p);
        let (s1, s2) = (0.5, 0.8);
        let fg = convolve(&pl, &gauss(&pl, s1), &gauss(&pl, s2)).unwrap();
        let s3 = s1 * s2 / (s1 + s2);
        let amp = (2.0 * s1).powf(-(p.nu() + 1.0)) * (2.0 * s2).powf(-(p.nu() + 1.0)) / (2.0 * s3).powf(-(p.nu() + 1.0));
        for (x, v) in pl.source().x_nodes().iter().zip(fg.values()) {
            let exact = amp * (-s3 * x * x).exp();
            assert!((v - c(exact)).norm() < 1e-7);
        }
    }

    #[test]
    fn tight_gaussian_acts_like_delta() {
        let p = params(1.0, 1);
        let src = Arc::new(QuadratureGrid::new(p, GridSpec::new(8.6, 1024, 32)).unwrap());
        let tgt = Arc::new(QuadratureGrid::new(p, GridSpec::new(9.0, 512, 16)).unwrap());
        let pl = TransformPlan::new(src, tgt).unwrap();
        let f = gauss(&pl, 0.5);
        let g = gauss(&pl, 32.0);
        let mass = g.integrate().re;
        let fg = convolve(&pl, &f, &g).unwrap();
        let expect = f.scale(c(mass));
        assert!(fg.sub(&expect).unwrap().sup_norm() <= 0.05 * expect.sup_norm());
    }

    #[test]
    fn young_ratios() {
        let pl = plan(params(1.0, 1));
        let f = gauss(&pl, 0.5);
        let r = young_check(&pl, &f, &f, 1.0, 1.0, 1.0).unwrap();
        assert!(r.is_finite() && r > 0.0);
        assert!(young_check(&pl, &f, &f, 2.0, 1.0, 2.0).unwrap().is_finite());
        assert!(young_check(&pl, &f, &f, 2.0, 2.0, 2.0).is_err());
        let z = GridFunction::zeros(pl.source().clone());
        assert!(young_check(&pl, &z, &f, 1.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn identity_base_normalization_and_dilation() {
        for &(k, n) in &[(1.0, 1), (0.8, 2), (1.0, 3)] {
            let p = params(k, n);
            let phi = ApproxIdentity::bump(p, 1.0).unwrap();
            assert!((phi.mass() - 1.0).abs() < 1e-10);
            let fine = Arc::new(QuadratureGrid::new(p, GridSpec::new(1.0, 2048, 32)).unwrap());
            for &r in &[0.5, 0.25] {
                let d = phi.dilate(fine.clone(), r).unwrap();
                assert!((d.integrate().re - 1.0).abs() < 1e-6, "k={k} n={n} r={r}");
                assert_relative_eq!(phi.dilated_value(r, 0.0), r.powf(-p.homogeneity()) * phi.value(0.0), max_relative = 1e-12);
            }
            assert_eq!(phi.dilated_value(1.0, 0.3), phi.value(0.3));
            assert!(phi.dilate(fine, 0.0).is_err());
        }
    }

    #[test]
    fn fourier_of_dilation_is_scaled_fourier() {
        let p = params(1.0, 1);
        let phi = ApproxIdentity::bump(p, 1.0).unwrap();
        let fine = Arc::new(QuadratureGrid::new(p, GridSpec::new(1.0, 2048, 32)).unwrap());
        let r = 0.5;
        let d = phi.dilate(fine.clone(), r).unwrap();
        for &y in &[0.0, 0.7, -2.0, 5.0] {
            let direct: Complex64 = fine
                .x_nodes()
                .iter()
                .zip(fine.weights())
                .zip(d.values())
                .map(|((x, w), v)| kernel(&p, *x, y).unwrap() * v * *w)
                .sum();
            assert!((direct - phi.fourier_at(r * y).unwrap()).norm() < 1e-8);
        }
    }

    #[test]
    fn constant_schedule_gives_equal_errors() {
        let pl = plan(params(1.0, 1));
        let f = gauss(&pl, 0.5);
        let phi = ApproxIdentity::bump(*pl.params(), 1.0).unwrap();
        let e = approx_identity_convergence(&pl, &f, &phi, 2.0, &[1.0, 1.0]).unwrap();
        assert_eq!(e[0], e[1]);
    }

    #[test]
    fn t_operator_examples() {
        let p = params(1.0, 1);
        let one = AtomSum::gaussian(1e-300).unwrap();
        let v = t_operator_atoms(&p, &one, &[0.7]).unwrap()[0];
        assert!((v.re - 0.25).abs() < 1e-12);
        let f = AtomSum::gaussian(0.5).unwrap();
        let xs: Vec<f64> = (-12..=12).map(|i| f64::from(i) * 0.25).collect();
        assert!(t_inverse_residual(&p, &f, &xs).unwrap() <= 1e-8);
        let z = t_operator_atoms(&p, &AtomSum::zero(), &xs).unwrap();
        assert!(z.iter().all(|v| *v == c(0.0)));
    }

    #[test]
    fn t_operator_on_grid_matches_atoms() {
        let p = params(0.8, 2);
        let grid = Arc::new(QuadratureGrid::new(p, GridSpec::default()).unwrap());
        let f = AtomSum::gaussian(0.5).unwrap();
        let tg = t_operator_grid(&GridFunction::from_atoms(grid.clone(), &f).unwrap()).unwrap();
        let ta = t_operator_atoms(&p, &f, grid.x_nodes()).unwrap();
        for (a, b) in tg.values().iter().zip(ta) {
            assert!((a - b).norm() < 1e-9);
        }
    }

    #[test]
    fn gm_norms() {
        let p = params(1.0, 1);
        let grid = Arc::new(QuadratureGrid::new(p, GridSpec::default()).unwrap());
        let f = AtomSum::gaussian(0.5).unwrap();
        let (a, b) = gm_inequality(&f, 0, 2.0, grid.clone()).unwrap();
        assert_eq!(a, b);
        let (a, b) = gm_inequality(&f, 1, 2.0, grid).unwrap();
        assert!(a < b);
    }

    #[test]
    fn classical_mollifier_reproduces_smooth_functions() {
        let p = params(1.0, 1);
        let m = classical_mollify(&p, |x: f64| 2.0 + 0.0 * x, 0.1).unwrap();
        assert!((m(0.4) - 2.0).abs() < 1e-12);
        assert!(classical_mollify(&p, |x: f64| x, 0.0).is_err());
    }
}
