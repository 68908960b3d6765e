//! Forward and inverse transform by dense kernel-matrix quadrature.

use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::atoms::{sequence_h, AtomSum, Parity};
use crate::error::{Error, Result};
use crate::fd;
use crate::kernel::{kernel, kernel_argument};
use crate::measure::{GridFunction, GridSpec, QuadratureGrid};
use crate::params::Params;
use crate::special_fn::BESSEL_Z_MAX;

/// A source grid, a target grid and the kernel values B(x_i, y_j) between them.
///
/// The forward transform maps functions on the source grid to the target
/// grid; the inverse maps back. Both reuse the same cached matrix.
#[derive(Debug, Clone)]
pub struct TransformPlan {
    params: Params,
    source: Arc<QuadratureGrid>,
    target: Arc<QuadratureGrid>,
    /// Row j holds B(x_i, y_j) for every source node i.
    cache: Vec<Vec<Complex64>>,
}

/// Kernel argument reached by the grids of [`TransformPlan::for_rate`].
pub const PLAN_Z: f64 = 80.0;

/// Kernel argument reached by the grids of [`TransformPlan::for_support`].
pub const SUPPORT_PLAN_Z: f64 = 120.0;

/// Truncation radius in u beyond which e^{-s n u²} < tol.
pub fn decay_radius(params: &Params, rate: f64, tol: f64) -> f64 {
    ((1.0 / tol).ln() / (rate * params.n_f64())).sqrt()
}

impl TransformPlan {
    pub fn new(source: Arc<QuadratureGrid>, target: Arc<QuadratureGrid>) -> Result<Self> {
        if source.params() != target.params() {
            return Err(Error::Plan("source and target grids carry different parameters".into()));
        }
        let params = *source.params();
        let xs = source.x_nodes();
        let ys = target.x_nodes();
        let x_far = xs.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        let y_far = ys.iter().fold(0.0f64, |m, y| m.max(y.abs()));
        let z = kernel_argument(&params, x_far, y_far);
        if z > BESSEL_Z_MAX {
            return Err(Error::Plan(format!(
                "grids reach kernel argument n|xy|^(1/n) = {z:.3}, beyond the validated {BESSEL_Z_MAX}"
            )));
        }
        let cache = ys
            .par_iter()
            .map(|&y| xs.iter().map(|&x| kernel(&params, x, y)).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        Ok(TransformPlan { params, source, target, cache })
    }

    /// Grids for inputs numerically supported in |u| <= radius_u: the source
    /// stops at radius_u and the target reaches kernel argument [`SUPPORT_PLAN_Z`].
    pub fn for_support(params: Params, radius_u: f64) -> Result<Self> {
        if !(radius_u.is_finite() && radius_u > 0.0) {
            return Err(Error::Domain(format!("support radius must be positive, got {radius_u}")));
        }
        let ut = SUPPORT_PLAN_Z / (params.n_f64() * radius_u);
        Self::with_specs(params, GridSpec::new(radius_u, 1024, 16), GridSpec::new(ut, 1024, 32))
    }

    /// Source and target grids from separate specs.
    pub fn with_specs(params: Params, source: GridSpec, target: GridSpec) -> Result<Self> {
        let s = Arc::new(QuadratureGrid::new(params, source)?);
        let t = Arc::new(QuadratureGrid::new(params, target)?);
        Self::new(s, t)
    }

    /// Source and target both the grid of `spec`.
    pub fn symmetric(params: Params, spec: GridSpec) -> Result<Self> {
        let g = Arc::new(QuadratureGrid::new(params, spec)?);
        Self::new(g.clone(), g)
    }

    /// Grids sized for inputs decaying at least like e^{-s n |x|^{2/n}}.
    ///
    /// The source radius u_s and target radius u_t are chosen so that the
    /// input and its transformed Gaussian (rate 1/(4s)) both decay by e^{-L}
    /// at the edges. Then n u_s u_t = 2L, so L = PLAN_Z / 2 independently of s.
    pub fn for_rate(params: Params, rate: f64, points: usize, panels: usize) -> Result<Self> {
        if !(rate.is_finite() && rate > 0.0) {
            return Err(Error::Domain(format!("rate must be positive, got {rate}")));
        }
        let l = 0.5 * PLAN_Z;
        let n = params.n_f64();
        let us = (l / (n * rate)).sqrt();
        let ut = (4.0 * l * rate / n).sqrt();
        let src = Arc::new(QuadratureGrid::new(params, GridSpec::new(us, points, panels))?);
        let tgt = Arc::new(QuadratureGrid::new(params, GridSpec::new(ut, points, panels))?);
        Self::new(src, tgt)
    }

    pub fn params(&self) -> &Params {
        &self.params
    }

    pub fn source(&self) -> &Arc<QuadratureGrid> {
        &self.source
    }

    pub fn target(&self) -> &Arc<QuadratureGrid> {
        &self.target
    }

    /// Cached B(x_i, y_j).
    pub fn kernel_at(&self, i: usize, j: usize) -> Complex64 {
        self.cache[j][i]
    }

    fn check_on(&self, f: &GridFunction, grid: &QuadratureGrid, role: &str) -> Result<()> {
        if !f.grid().same_as(grid) {
            return Err(Error::Plan(format!("function is not sampled on the plan's {role} grid")));
        }
        Ok(())
    }

    /// (F f)(y_j) = Σ_i w_i f(x_i) B(x_i, y_j).
    pub fn forward(&self, f: &GridFunction) -> Result<GridFunction> {
        self.check_on(f, &self.source, "source")?;
        let wf: Vec<Complex64> = f.values().iter().zip(self.source.weights()).map(|(v, w)| v * *w).collect();
        let values = self
            .cache
            .par_iter()
            .map(|row| row.iter().zip(&wf).map(|(b, v)| b * v).sum())
            .collect();
        GridFunction::new(self.target.clone(), values)
    }

    /// (F⁻¹ g)(x_i) = (F g)((-1)^n x_i), integrating over the target grid.
    pub fn inverse(&self, g: &GridFunction) -> Result<GridFunction> {
        self.check_on(g, &self.target, "target")?;
        let wg: Vec<Complex64> = g.values().iter().zip(self.target.weights()).map(|(v, w)| v * *w).collect();
        let odd_n = self.params.n() % 2 == 1;
        let values = (0..self.source.len())
            .into_par_iter()
            .map(|i| {
                let col = if odd_n { self.source.mirror(i) } else { i };
                self.cache.iter().zip(&wg).map(|(row, v)| row[col] * v).sum()
            })
            .collect();
        GridFunction::new(self.source.clone(), values)
    }

    /// F f at an arbitrary point, by direct summation with fresh kernel values.
    pub fn forward_at(&self, f: &GridFunction, y: f64) -> Result<Complex64> {
        self.check_on(f, &self.source, "source")?;
        let mut acc = Complex64::new(0.0, 0.0);
        for ((x, v), w) in self.source.x_nodes().iter().zip(f.values()).zip(self.source.weights()) {
            acc += kernel(&self.params, *x, y)? * (v * *w);
        }
        Ok(acc)
    }

    pub fn sample(&self, f: &AtomSum) -> Result<GridFunction> {
        GridFunction::from_atoms(self.source.clone(), f)
    }

    pub fn forward_atoms(&self, f: &AtomSum) -> Result<GridFunction> {
        self.forward(&self.sample(f)?)
    }
}

/// The exact transform of e^{-s n |x|^{2/n}}: (2s)^{-(ν+1)} e^{-n |x|^{2/n} / (4s)}.
pub fn gaussian_closed_form(params: &Params, s: f64) -> Result<AtomSum> {
    if !(s.is_finite() && s > 0.0) {
        return Err(Error::Domain(format!("Gaussian rate must be positive, got {s}")));
    }
    let c = (2.0 * s).powf(-(params.nu() + 1.0));
    AtomSum::atom(Complex64::new(c, 0.0), Parity::Even, 0.into(), 1.0 / (4.0 * s))
}

/// Source wide enough for Gaussians of rate ≥ `slowest_rate` (decay 1e-14),
/// target covering |y| ≤ radius.
pub fn eigenpair_plan(params: Params, slowest_rate: f64, radius: f64) -> Result<TransformPlan> {
    let us = decay_radius(&params, slowest_rate, 1e-14);
    let ut = radius.powf(1.0 / params.n_f64()) * 1.05;
    TransformPlan::with_specs(params, GridSpec::new(us, 512, 16), GridSpec::new(ut, 128, 4))
}

/// Largest deviation |F f(y) - g(y)| over target nodes with |y| ≤ radius.
pub fn max_deviation(plan: &TransformPlan, f: &AtomSum, expected: &AtomSum, radius: f64) -> Result<f64> {
    let ff = plan.forward_atoms(f)?;
    let params = plan.params();
    let mut worst: f64 = 0.0;
    for (y, v) in plan.target().x_nodes().iter().zip(ff.values()) {
        if y.abs() <= radius {
            worst = worst.max((v - expected.evaluate_nonzero(params, *y)).norm());
        }
    }
    Ok(worst)
}

/// Round-trip error sup_i |F⁻¹ F f (x_i) - f(x_i)| over source nodes.
pub fn round_trip_error(plan: &TransformPlan, f: &AtomSum) -> Result<f64> {
    let sampled = plan.sample(f)?;
    let back = plan.inverse(&plan.forward(&sampled)?)?;
    Ok(back.sub(&sampled)?.sup_norm())
}

/// Points |y| ∈ [0.5, 2.5], both signs, at which range-side identities are checked.
pub fn check_points() -> Vec<f64> {
    let pos: Vec<f64> = (0..9).map(|i| 0.5 + 0.25 * f64::from(i)).collect();
    pos.iter().map(|y| -y).chain(pos.iter().copied()).collect()
}

/// Step for range-side finite differences.
pub const RANGE_FD_STEP: f64 = 0.02;

fn relative_sup(pairs: &[(Complex64, Complex64)]) -> f64 {
    let scale = pairs.iter().map(|(_, b)| b.norm()).fold(1.0, f64::max);
    pairs.iter().map(|(a, b)| (a - b).norm()).fold(0.0, f64::max) / scale
}

/// Residuals of
///   F(x f') = -(y d/dy + 2k + 2/n - 1) F f,
///   F(|x|^{2/n} f) = -|y|^{2-2/n} Δ_k F f,
///   F(|x|^{2-2/n} Δ_k f) = -|y|^{2/n} F f,
/// each as sup |lhs - rhs| / max(1, sup |rhs|) over [`check_points`].
/// Domain-side operators act exactly on atoms; range-side ones by finite
/// differences of F f evaluated off-grid.
pub fn intertwining_residuals(plan: &TransformPlan, f: &AtomSum) -> Result<[f64; 3]> {
    let params = *plan.params();
    let base = plan.sample(f)?;
    let fe = plan.sample(&f.apply_euler(&params))?;
    let fm = plan.sample(&f.apply_mult(&params))?;
    let fl = plan.sample(&f.apply_laplacian(&params))?;
    let h = RANGE_FD_STEP;
    let d = params.homogeneity();
    let pts = check_points();
    let rows = pts
        .par_iter()
        .map(|&y| -> Result<[(Complex64, Complex64); 3]> {
            let ff = |t: f64| plan.forward_at(&base, t).unwrap_or(Complex64::new(f64::NAN, 0.0));
            let fy = ff(y);
            let e = fd::euler(&ff, y, h) + fy * d;
            let l = fd::deformed_laplacian(&ff, &params, y, h);
            let m = fy * y.abs().powf(params.mult_power());
            Ok([
                (plan.forward_at(&fe, y)?, -e),
                (plan.forward_at(&fm, y)?, -l),
                (plan.forward_at(&fl, y)?, -m),
            ])
        })
        .collect::<Result<Vec<_>>>()?;
    let mut out = [0.0; 3];
    for (slot, r) in out.iter_mut().enumerate() {
        let pairs: Vec<_> = rows.iter().map(|row| row[slot]).collect();
        *r = relative_sup(&pairs);
    }
    Ok(out)
}

/// Largest α and β accepted by [`ladder_identity`].
pub const LADDER_MAX_ORDER: u32 = 2;

/// Residual between (n|y|^{2/n})^α (n|y|^{2-2/n}Δ_k)^β (F f)(y), with the
/// range-side operators by nested finite differences, and
/// (-1)^{α+β} F(h_{α,β})(y), with h_{α,β} = (n|x|^{2-2/n}Δ_k)^α (n|x|^{2/n})^β f
/// computed exactly. Relative sup over [`check_points`].
pub fn ladder_identity(plan: &TransformPlan, f: &AtomSum, alpha: u32, beta: u32) -> Result<f64> {
    if alpha > LADDER_MAX_ORDER || beta > LADDER_MAX_ORDER {
        return Err(Error::Capacity(format!(
            "range-side finite differences are validated for α, β <= {LADDER_MAX_ORDER}"
        )));
    }
    let params = *plan.params();
    let base = plan.sample(f)?;
    let h_ab = plan.sample(&sequence_h(f, alpha, beta, &params))?;
    let sign = if (alpha + beta) % 2 == 0 { 1.0 } else { -1.0 };
    let n = params.n_f64();
    let pts = check_points();
    let pairs = pts
        .par_iter()
        .map(|&y| -> Result<(Complex64, Complex64)> {
            let ff = |t: f64| plan.forward_at(&base, t).unwrap_or(Complex64::new(f64::NAN, 0.0));
            let lhs = fd::iterated_scaled_laplacian(&ff, &params, beta, y, RANGE_FD_STEP)
                * (n * y.abs().powf(params.mult_power())).powi(alpha as i32);
            let rhs = plan.forward_at(&h_ab, y)? * sign;
            Ok((lhs, rhs))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(relative_sup(&pairs))
}

/// Summary of comparing a forward transform to a known closed form.
#[derive(Debug, Clone, Serialize)]
pub struct ClosedFormSummary {
    pub k: f64,
    pub n: u32,
    pub s: f64,
    pub radius: f64,
    pub max_abs_error_vs_closed_form: f64,
}
