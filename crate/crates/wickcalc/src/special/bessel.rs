//! Normalized modified Bessel and MacDonald functions used by the full-plane su(1,1) chart.

use super::quadrature::{log_integral_unimodal, Tolerance};
use crate::error::Result;
use statrs::function::gamma::ln_gamma;

/// `I~_nu(y) = sum_n (y/2)^(2n) Gamma(nu+1) / (n! Gamma(nu+n+1))`, so that `I~_nu(0) = 1`.
///
/// Summed by the term ratio `(y/2)^2 / (n (nu + n))`; requires `nu > -1`, `y >= 0`.
pub fn bessel_modified(nu: f64, y: f64) -> f64 {
    let x = 0.25 * y * y;
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut n = 1.0;
    loop {
        term *= x / (n * (nu + n));
        sum += term;
        if term < 1e-17 * sum && n > x.sqrt() {
            return sum;
        }
        n += 1.0;
    }
}

/// `d/dy` of [`bessel_modified`].
pub fn bessel_modified_deriv(nu: f64, y: f64) -> f64 {
    // term_n' = 2n term_n / y
    let x = 0.25 * y * y;
    let mut term = 1.0;
    let mut sum = 0.0;
    let mut n = 1.0;
    loop {
        term *= x / (n * (nu + n));
        let add = term * 2.0 * n / y;
        sum += add;
        if add < 1e-17 * sum.abs().max(1e-300) && n > x.sqrt() {
            return sum;
        }
        n += 1.0;
    }
}

/// Natural log of `(y/2)^nu / Gamma(nu+1) * int_R exp(-y cosh t - nu t) dt`.
pub fn ln_macdonald_modified(nu: f64, y: f64) -> Result<f64> {
    let mode = -(nu / y).asinh();
    let width = 1.0 / (y * mode.cosh()).sqrt().max(1e-3);
    let tol = Tolerance { abs: 0.0, rel: 1e-14, max_intervals: 2000 };
    // cosh t - 1 = 2 sinh^2(t/2) keeps the integrand accurate for large y
    let li = log_integral_unimodal(|t| -2.0 * y * (0.5 * t).sinh().powi(2) - nu * t, mode, width, tol)?;
    Ok(nu * (0.5 * y).ln() - ln_gamma(nu + 1.0) - y + li)
}

/// `M~_nu(y) = (y/2)^nu / Gamma(nu+1) * int_R exp(-y cosh t - nu t) dt` for `y > 0`.
///
/// The density of the full-plane chart is this function divided by `hbar`.
pub fn macdonald_modified(nu: f64, y: f64) -> Result<f64> {
    ln_macdonald_modified(nu, y).map(f64::exp)
}
