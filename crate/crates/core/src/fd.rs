//! Five-point central-difference realizations of the differential-difference
//! operators, for functions only available pointwise.
//!
//! All stencils are fourth order. Callers pick `h`; near the origin the
//! stencil must not straddle zero, since every operator here is only defined
//! on ℝ∖{0}.

use num_complex::Complex64;

use crate::params::Params;

/// f'(x) by the five-point stencil.
pub fn first_derivative<F: Fn(f64) -> Complex64 + ?Sized>(f: &F, x: f64, h: f64) -> Complex64 {
    (f(x - 2.0 * h) - f(x - h) * 8.0 + f(x + h) * 8.0 - f(x + 2.0 * h)) / (12.0 * h)
}

/// f''(x) by the five-point stencil.
pub fn second_derivative<F: Fn(f64) -> Complex64 + ?Sized>(f: &F, x: f64, h: f64) -> Complex64 {
    (-f(x - 2.0 * h) + f(x - h) * 16.0 - f(x) * 30.0 + f(x + h) * 16.0 - f(x + 2.0 * h))
        / (12.0 * h * h)
}

/// x f'(x).
pub fn euler<F: Fn(f64) -> Complex64 + ?Sized>(f: &F, x: f64, h: f64) -> Complex64 {
    first_derivative(f, x, h) * x
}

/// The Dunkl Laplacian f'' + (2k/x) f' - k (f(x) - f(-x)) / x².
pub fn dunkl_laplacian<F: Fn(f64) -> Complex64 + ?Sized>(
    f: &F,
    k: f64,
    x: f64,
    h: f64,
) -> Complex64 {
    second_derivative(f, x, h) + first_derivative(f, x, h) * (2.0 * k / x)
        - (f(x) - f(-x)) * (k / (x * x))
}

/// |x|^{2-2/n} Δ_k f.
pub fn deformed_laplacian<F: Fn(f64) -> Complex64 + ?Sized>(
    f: &F,
    params: &Params,
    x: f64,
    h: f64,
) -> Complex64 {
    dunkl_laplacian(f, params.k(), x, h) * x.abs().powf(2.0 - params.mult_power())
}

/// n |x|^{2-2/n} Δ_k applied `times` times, by nesting the stencil.
pub fn iterated_scaled_laplacian(
    f: &dyn Fn(f64) -> Complex64,
    params: &Params,
    times: u32,
    x: f64,
    h: f64,
) -> Complex64 {
    if times == 0 {
        return f(x);
    }
    let n = params.n_f64();
    let inner = |y: f64| iterated_scaled_laplacian(f, params, times - 1, y, h);
    deformed_laplacian(&inner, params, x, h) * n
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn c(v: f64) -> Complex64 {
        Complex64::new(v, 0.0)
    }

    #[test]
    fn derivatives_of_a_gaussian() {
        let f = |x: f64| c((-x * x / 2.0).exp());
        let x = 0.9;
        let g: f64 = (-x * x / 2.0_f64).exp();
        assert_abs_diff_eq!(first_derivative(&f, x, 1e-2).re, -x * g, epsilon = 1e-8);
        assert_abs_diff_eq!(second_derivative(&f, x, 1e-2).re, (x * x - 1.0) * g, epsilon = 1e-8);
        assert_abs_diff_eq!(euler(&f, x, 1e-2).re, -x * x * g, epsilon = 1e-8);
    }

    #[test]
    fn dunkl_laplacian_of_gaussian_k1() {
        // Δ_1 e^{-x²/2} = (x² - 3) e^{-x²/2}
        let f = |x: f64| c((-x * x / 2.0).exp());
        for &x in &[-2.0, -0.7, 0.6, 1.9] {
            let expect: f64 = (x * x - 3.0) * (-x * x / 2.0_f64).exp();
            assert_abs_diff_eq!(dunkl_laplacian(&f, 1.0, x, 1e-2).re, expect, epsilon = 1e-7);
        }
    }

    #[test]
    fn difference_term_acts_on_odd_part_only() {
        // for odd f = x, Δ_k x = 2k/x - 2k/x = 0
        let f = |x: f64| c(x);
        assert_abs_diff_eq!(dunkl_laplacian(&f, 0.7, 1.3, 1e-2).norm(), 0.0, epsilon = 1e-12);
    }
}
