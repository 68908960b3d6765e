//! Gauss rules on [-1, 1].

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};
use crate::special_fn::gamma;

/// A quadrature rule: ascending nodes and their weights.
#[derive(Debug, Clone, PartialEq)]
pub struct Rule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl Rule {
    /// Maps the rule affinely onto [lo, hi], scaling the weights by the Jacobian.
    pub fn mapped(&self, lo: f64, hi: f64) -> Rule {
        let half = 0.5 * (hi - lo);
        let mid = 0.5 * (hi + lo);
        Rule {
            nodes: self.nodes.iter().map(|t| mid + half * t).collect(),
            weights: self.weights.iter().map(|w| w * half).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

/// m-point Gauss–Legendre rule by Newton iteration on P_m.
pub fn gauss_legendre(m: usize) -> Result<Rule> {
    if m == 0 {
        return Err(Error::Domain("a Gauss rule needs at least one node".into()));
    }
    let mut nodes = vec![0.0; m];
    let mut weights = vec![0.0; m];
    let mf = m as f64;
    for i in 0..m.div_ceil(2) {
        let mut t = (std::f64::consts::PI * (i as f64 + 0.75) / (mf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre(m, t);
            dp = d;
            let step = p / d;
            t -= step;
            if step.abs() <= 1e-16 {
                break;
            }
        }
        let (_, d) = legendre(m, t);
        dp = if d != 0.0 { d } else { dp };
        let w = 2.0 / ((1.0 - t * t) * dp * dp);
        nodes[i] = -t;
        nodes[m - 1 - i] = t;
        weights[i] = w;
        weights[m - 1 - i] = w;
    }
    if m % 2 == 1 {
        nodes[m / 2] = 0.0;
    }
    Ok(Rule { nodes, weights })
}

/// P_m(t) and P_m'(t) by the three-term recurrence.
fn legendre(m: usize, t: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = t;
    for j in 2..=m {
        let jf = j as f64;
        let p2 = ((2.0 * jf - 1.0) * t * p1 - (jf - 1.0) * p0) / jf;
        p0 = p1;
        p1 = p2;
    }
    if m == 1 {
        return (t, 1.0);
    }
    let d = m as f64 * (t * p1 - p0) / (t * t - 1.0);
    (p1, d)
}

/// m-point Gauss–Jacobi rule for the weight (1-t)^a (1+t)^b on [-1, 1],
/// by the Golub–Welsch eigenvalue method.
pub fn gauss_jacobi(m: usize, a: f64, b: f64) -> Result<Rule> {
    if m == 0 {
        return Err(Error::Domain("a Gauss rule needs at least one node".into()));
    }
    if !(a > -1.0 && b > -1.0 && a.is_finite() && b.is_finite()) {
        return Err(Error::Domain(format!("Jacobi exponents must exceed -1, got a = {a}, b = {b}")));
    }
    let ab = a + b;
    let mut jac = DMatrix::<f64>::zeros(m, m);
    for j in 0..m {
        let jf = j as f64;
        let diag = if j == 0 {
            (b - a) / (ab + 2.0)
        } else {
            (b * b - a * a) / ((2.0 * jf + ab) * (2.0 * jf + ab + 2.0))
        };
        jac[(j, j)] = diag;
        if j + 1 < m {
            let i = jf + 1.0;
            let sq = if j == 0 {
                4.0 * (1.0 + a) * (1.0 + b) / ((2.0 + ab).powi(2) * (3.0 + ab))
            } else {
                4.0 * i * (i + a) * (i + b) * (i + ab)
                    / ((2.0 * i + ab).powi(2) * (2.0 * i + ab + 1.0) * (2.0 * i + ab - 1.0))
            };
            let off = sq.sqrt();
            jac[(j, j + 1)] = off;
            jac[(j + 1, j)] = off;
        }
    }
    let mu0 = 2f64.powf(ab + 1.0) * gamma(a + 1.0)? * gamma(b + 1.0)? / gamma(ab + 2.0)?;
    let eig = SymmetricEigen::new(jac);
    let mut pairs: Vec<(f64, f64)> = (0..m)
        .map(|i| (eig.eigenvalues[i], mu0 * eig.eigenvectors[(0, i)].powi(2)))
        .collect();
    pairs.sort_by(|x, y| x.0.total_cmp(&y.0));
    Ok(Rule { nodes: pairs.iter().map(|p| p.0).collect(), weights: pairs.iter().map(|p| p.1).collect() })
}

/// Gauss rule on [0, 1] for the weight t^c: Gauss–Jacobi with (a, b) = (0, c),
/// mapped by t = (1 + s)/2.
pub fn power_weight_rule(m: usize, c: f64) -> Result<Rule> {
    let r = gauss_jacobi(m, 0.0, c)?;
    let scale = 0.5f64.powf(c + 1.0);
    Ok(Rule {
        nodes: r.nodes.iter().map(|s| 0.5 * (1.0 + s)).collect(),
        weights: r.weights.iter().map(|w| w * scale).collect(),
    })
}
