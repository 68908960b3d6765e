//! Scalar special functions and combinatorial numbers.

mod bessel;
mod dd;
mod gamma;
mod stirling;

pub use bessel::{normalized_bessel, normalized_bessel_derivative, BesselOrder, BESSEL_Z_MAX};
pub use gamma::{gamma, rising_factorial};
pub use stirling::{binomial, falling_factorial_coeffs, StirlingTable, STIRLING_MAX_ORDER};
