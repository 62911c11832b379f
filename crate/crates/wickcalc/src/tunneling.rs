//! The quantum cylinder: theta kernel and Gaussian measure, and the exponentially small
//! corrections to the flat Kähler data and to the flat star product.
//!
//! With `q' = e^(-pi^2/hbar)` the kernel is `k(r) = theta(r - hbar, e^-hbar)` and the
//! density of `dm` against `dr dphi` is `Theta(r)/2` where
//! `Theta(r) = theta(i pi (r - hbar)/hbar, q')`. Everything that distinguishes the quantum
//! cylinder from the flat plane is carried by `Theta - 1 = O(q')`.

use crate::algebra::models::{cylinder, su11_prime};
use crate::error::{Error, Result};
use crate::representation::{self, ResidualReport};
use crate::special::density::{solve_density, DensityFunction};
use crate::special::{solve_kernel, KernelFunction};
use crate::wick::expansion::linear_fit;
use crate::C64;
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Smallest `hbar` whose corrections stay above double-precision resolution.
pub const HBAR_FLOOR: f64 = 0.45;

/// The `hbar` sequence used for the exponent regressions.
pub const DEFAULT_HBARS: [f64; 5] = [0.6, 0.8, 1.0, 1.25, 1.5];

/// Half-width of the coefficient range of [`cylinder_kernel`].
pub const KERNEL_TERMS: usize = 64;

const SAMPLES: usize = 201;

fn check_hbar(hbar: f64) -> Result<()> {
    if !(hbar > 0.0) || !hbar.is_finite() {
        return Err(Error::Domain(format!("hbar must be positive, got {hbar}")));
    }
    if hbar < HBAR_FLOOR {
        return Err(Error::PrecisionFloor(hbar));
    }
    Ok(())
}

pub fn cylinder_kernel(hbar: f64) -> Result<KernelFunction<f64>> {
    solve_kernel(&cylinder(1.0, 0.0, hbar), KERNEL_TERMS)
}

/// The Gaussian `l`; the density of `dm` itself is [`measure_density`].
pub fn cylinder_measure(hbar: f64) -> Result<DensityFunction> {
    solve_density(&cylinder(1.0, 0.0, hbar))
}

/// `Theta(r)/2`, the density of `dm` against `dr dphi`.
pub fn measure_density(hbar: f64, r: f64) -> Result<f64> {
    Ok(0.5 * dual_theta(hbar, r)[0])
}

/// `[Theta, Theta', Theta'']` in `r`, summed term by term on the dual series.
pub fn dual_theta(hbar: f64, r: f64) -> [f64; 3] {
    let w = PI / hbar;
    let s = r - hbar;
    let mut out = [1.0, 0.0, 0.0];
    let mut n = 1.0_f64;
    loop {
        let q = (-PI * PI * n * n / hbar).exp();
        let k = n * w;
        let (sn, cs) = (k * s).sin_cos();
        out[0] += 2.0 * q * cs;
        out[1] -= 2.0 * q * k * sn;
        out[2] -= 2.0 * q * k * k * cs;
        if q * k * k < 1e-20 {
            break;
        }
        n += 1.0;
    }
    out
}

/// `hbar (ln Theta)''`: the deviation of the density of `omega` from the flat value `1/2`.
pub fn form_deviation(hbar: f64, r: f64) -> f64 {
    let [t, t1, t2] = dual_theta(hbar, r);
    hbar * (t2 / t - (t1 / t).powi(2))
}

/// `dm/dm^omega0 - 1 = Theta - 1`.
pub fn measure_deviation(hbar: f64, r: f64) -> f64 {
    let w = PI / hbar;
    let s = r - hbar;
    let mut sum = 0.0;
    let mut n = 1.0_f64;
    loop {
        let q = (-PI * PI * n * n / hbar).exp();
        sum += 2.0 * q * (n * w * s).cos();
        if q < 1e-30 {
            break;
        }
        n += 1.0;
    }
    sum
}

fn samples(window: (f64, f64)) -> impl Iterator<Item = f64> {
    let (a, b) = window;
    (0..SAMPLES).map(move |i| a + (b - a) * i as f64 / (SAMPLES - 1) as f64)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TunnelingReport {
    pub hbars: Vec<f64>,
    /// `max_r |omega - omega0|` (density against `dr dphi`).
    pub form_gaps: Vec<f64>,
    /// `max_r |dm/dm^omega0 - 1|`.
    pub measure_gaps: Vec<f64>,
    /// Coefficient of `1/hbar` in `ln gap ~ a + b ln(1/hbar) + c/hbar`.
    pub slope: f64,
    /// Slope of the plain fit `ln gap ~ a + c/hbar`.
    pub raw_slope: f64,
    pub measure_slope: f64,
    pub target: f64,
    pub relative_error: f64,
    pub measure_relative_error: f64,
}

impl TunnelingReport {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("report serializes")
    }

    /// Plot-ready table `hbar,inv_hbar,form_gap,ln_form_gap,measure_gap,ln_measure_gap`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("hbar,inv_hbar,form_gap,ln_form_gap,measure_gap,ln_measure_gap\n");
        for ((h, f), m) in self.hbars.iter().zip(&self.form_gaps).zip(&self.measure_gaps) {
            s += &format!("{h:.10e},{:.10e},{f:.10e},{:.10e},{m:.10e},{:.10e}\n", 1.0 / h, f.ln(), m.ln());
        }
        s
    }
}

/// Least squares of `y` on the columns `[1, ln x, x]`; returns the coefficient of `x`.
fn fit_with_power(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() < 4 {
        return Err(Error::FitUnstable(f64::NAN));
    }
    let a = DMatrix::from_fn(x.len(), 3, |i, j| match j {
        0 => 1.0,
        1 => x[i].ln(),
        _ => x[i],
    });
    let b = DVector::from_column_slice(y);
    let sol = a.svd(true, true).solve(&b, 1e-14).map_err(|_| Error::FitUnstable(f64::NAN))?;
    Ok(sol[2])
}

/// `(max |omega - omega0|, max |dm/dm^omega0 - 1|)` over `window` in `r`, one period
/// `[0, 2 hbar]` when absent.
pub fn gaps(hbar: f64, window: Option<(f64, f64)>) -> Result<(f64, f64)> {
    check_hbar(hbar)?;
    let win = window.unwrap_or((0.0, 2.0 * hbar));
    Ok(samples(win).fold((0.0_f64, 0.0_f64), |(f, m), r| {
        (f.max(form_deviation(hbar, r).abs()), m.max(measure_deviation(hbar, r).abs()))
    }))
}

/// Gaps over `window` in `r` (one period `[0, 2 hbar]` per `hbar` when absent) and their
/// regressions against `1/hbar`.
pub fn tunneling_gap(hbars: &[f64], window: Option<(f64, f64)>) -> Result<TunnelingReport> {
    for &h in hbars {
        check_hbar(h)?;
    }
    let (form_gaps, measure_gaps): (Vec<f64>, Vec<f64>) =
        hbars.iter().map(|&h| gaps(h, window)).collect::<Result<Vec<_>>>()?.into_iter().unzip();
    let inv: Vec<f64> = hbars.iter().map(|h| 1.0 / h).collect();
    let lf: Vec<f64> = form_gaps.iter().map(|g| g.ln()).collect();
    let lm: Vec<f64> = measure_gaps.iter().map(|g| g.ln()).collect();
    let slope = fit_with_power(&inv, &lf)?;
    let (raw_slope, _, _) = linear_fit(&inv, &lf);
    let (measure_slope, _, _) = linear_fit(&inv, &lm);
    let target = -PI * PI;
    Ok(TunnelingReport {
        hbars: hbars.to_vec(),
        form_gaps,
        measure_gaps,
        slope,
        raw_slope,
        measure_slope,
        target,
        relative_error: ((slope - target) / target).abs(),
        measure_relative_error: ((measure_slope - target) / target).abs(),
    })
}

/// `e^(i winding phi) P(r)` with `P` given by ascending coefficients.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CylinderSymbol {
    pub winding: i32,
    pub poly: Vec<f64>,
}

impl CylinderSymbol {
    pub fn radial(poly: &[f64]) -> Self {
        Self { winding: 0, poly: poly.to_vec() }
    }

    pub fn wave(winding: i32) -> Self {
        Self { winding, poly: vec![1.0] }
    }

    pub fn eval(&self, r: f64, phi: f64) -> C64 {
        C64::from_polar(1.0, self.winding as f64 * phi) * horner(&self.poly, r)
    }
}

fn horner(p: &[f64], x: f64) -> f64 {
    p.iter().rev().fold(0.0, |acc, c| acc * x + c)
}

fn derivative(p: &[f64]) -> Vec<f64> {
    p.iter().enumerate().skip(1).map(|(j, c)| j as f64 * c).collect()
}

fn is_zero(p: &[f64]) -> bool {
    p.iter().all(|c| *c == 0.0)
}

/// `p(a x + b)`.
fn compose_affine(p: &[f64], a: f64, b: f64) -> Vec<f64> {
    let mut out = vec![0.0; p.len().max(1)];
    let mut power = vec![1.0];
    for c in p {
        for (o, q) in out.iter_mut().zip(&power) {
            *o += c * q;
        }
        let mut next = vec![0.0; power.len() + 1];
        for (i, q) in power.iter().enumerate() {
            next[i] += b * q;
            next[i + 1] += a * q;
        }
        power = next;
    }
    out
}

/// Flat quantization of a [`CylinderSymbol`]: `T e_n = e^(hbar m^2/4) f(n + m/2) e_(n+m)` in
/// the orthonormal basis, `m = -winding`, with `f` chosen so that the flat (Gaussian)
/// average of `f` reproduces `P`.
#[derive(Clone, Debug, PartialEq)]
pub struct ShiftOperator {
    pub m: i64,
    pub f: Vec<f64>,
}

impl ShiftOperator {
    pub fn quantize(hbar: f64, psi: &CylinderSymbol) -> Self {
        // the flat symbol averages f over nu ~ N((r - hbar)/2 hbar, 1/2 hbar), so
        // Q(nu) = P(2 hbar nu + hbar) and f = exp(-D^2/4 hbar) Q
        let q = compose_affine(&psi.poly, 2.0 * hbar, hbar);
        let mut f = vec![0.0; q.len()];
        let mut d = q;
        let mut coef = 1.0;
        let mut j = 0;
        while !is_zero(&d) {
            for (o, c) in f.iter_mut().zip(&d) {
                *o += coef * c;
            }
            d = derivative(&derivative(&d));
            j += 1;
            coef *= -1.0 / (4.0 * hbar * j as f64);
        }
        Self { m: -(psi.winding as i64), f }
    }

    pub fn entry(&self, hbar: f64, n: i64) -> f64 {
        let m = self.m as f64;
        (hbar * m * m / 4.0).exp() * horner(&self.f, n as f64 + m / 2.0)
    }
}

/// Exact symbol at `(r, phi)` of the operator `e_n -> t(n) e_(n+m)` (orthonormal basis).
fn shift_symbol(hbar: f64, m: i64, t: impl Fn(i64) -> f64, r: f64, phi: f64) -> C64 {
    let mf = m as f64;
    let center = (r - hbar) / (2.0 * hbar);
    let half = (12.0 / hbar.sqrt() + 10.0).ceil() as i64;
    let c = center.round() as i64;
    let expo = |nu: f64| nu * r - hbar * nu * nu - hbar * nu;
    let top = expo(center);
    let (mut num, mut den) = (0.0, 0.0);
    for n in (c - half)..=(c + half) {
        let nu = n as f64 + mf / 2.0;
        num += t(n) * (expo(nu) - top).exp();
        den += (expo(n as f64) - top).exp();
    }
    C64::from_polar(1.0, -mf * phi) * (-hbar * mf * mf / 4.0).exp() * (num / den)
}

/// Exact symbol of `T_psi T_chi`.
pub fn product_symbol(hbar: f64, psi: &ShiftOperator, chi: &ShiftOperator, r: f64, phi: f64) -> C64 {
    let m = psi.m + chi.m;
    shift_symbol(hbar, m, |n| psi.entry(hbar, n + chi.m) * chi.entry(hbar, n), r, phi)
}

/// Exact symbol of a single flat quantization.
pub fn shift_operator_symbol(hbar: f64, op: &ShiftOperator, r: f64, phi: f64) -> C64 {
    shift_symbol(hbar, op.m, |n| op.entry(hbar, n), r, phi)
}

/// `sum_s ((2 hbar)^s / s!) d^s psi dbar^s chi` with `z = r/2 + i phi`; finite for
/// radial polynomials, summed to convergence otherwise.
pub fn flat_series(hbar: f64, psi: &CylinderSymbol, chi: &CylinderSymbol, r: f64, phi: f64) -> C64 {
    let k1 = psi.winding as f64 / 2.0;
    let k2 = chi.winding as f64 / 2.0;
    // d acts as D + k1 on psi's radial part, dbar as D - k2 on chi's
    let step = |p: &[f64], shift: f64| -> Vec<f64> {
        let mut out = derivative(p);
        out.resize(p.len().max(1), 0.0);
        for (o, c) in out.iter_mut().zip(p) {
            *o += shift * c;
        }
        out
    };
    let mut a = psi.poly.clone();
    let mut b = chi.poly.clone();
    let mut sum = 0.0;
    let mut coef = 1.0;
    for s in 1..400 {
        let term = coef * horner(&a, r) * horner(&b, r);
        sum += term;
        if is_zero(&a) || is_zero(&b) || (s > 4 && term.abs() < 1e-18 * sum.abs()) {
            break;
        }
        a = step(&a, k1);
        b = step(&b, -k2);
        coef *= 2.0 * hbar / s as f64;
    }
    C64::from_polar(1.0, (psi.winding + chi.winding) as f64 * phi) * sum
}

/// Sample points `(r, phi)` across one period `[0, 2 hbar]` of the tunneling term.
pub fn default_points(hbar: f64) -> Vec<(f64, f64)> {
    samples((0.0, 2.0 * hbar)).map(|r| (r, 0.3)).collect()
}

/// `max |sigma(T_psi T_chi) - flat series|` over `points`.
pub fn star_expansion_remainder_at(
    hbar: f64,
    psi: &CylinderSymbol,
    chi: &CylinderSymbol,
    points: &[(f64, f64)],
) -> Result<f64> {
    check_hbar(hbar)?;
    let tp = ShiftOperator::quantize(hbar, psi);
    let tc = ShiftOperator::quantize(hbar, chi);
    Ok(points
        .iter()
        .map(|&(r, phi)| (product_symbol(hbar, &tp, &tc, r, phi) - flat_series(hbar, psi, chi, r, phi)).norm())
        .fold(0.0, f64::max))
}

pub fn star_expansion_remainder(hbar: f64, psi: &CylinderSymbol, chi: &CylinderSymbol) -> Result<f64> {
    star_expansion_remainder_at(hbar, psi, chi, &default_points(hbar))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RemainderScan {
    pub hbars: Vec<f64>,
    pub remainders: Vec<f64>,
    pub slope: f64,
    pub target: f64,
    pub relative_error: f64,
}

/// Remainders over `hbars` and the slope of `ln remainder` against `1/hbar`.
pub fn remainder_scan(hbars: &[f64], psi: &CylinderSymbol, chi: &CylinderSymbol) -> Result<RemainderScan> {
    let remainders = hbars.iter().map(|&h| star_expansion_remainder(h, psi, chi)).collect::<Result<Vec<_>>>()?;
    if remainders.iter().any(|r| !(*r > 0.0)) {
        return Err(Error::FitUnstable(0.0));
    }
    let inv: Vec<f64> = hbars.iter().map(|h| 1.0 / h).collect();
    let lr: Vec<f64> = remainders.iter().map(|r| r.ln()).collect();
    let (slope, _, _) = linear_fit(&inv, &lr);
    let target = -PI * PI;
    Ok(RemainderScan {
        hbars: hbars.to_vec(),
        remainders,
        slope,
        target,
        relative_error: ((slope - target) / target).abs(),
    })
}

/// `e^(i phi) * e^(-i phi)` through the kernel integral with the literal extensions
/// `e^(+-(z - w)/2)`, whose product is periodic: `e^(hbar/2) Theta(r + hbar)/Theta(r)`.
pub fn winding_pair_integral(hbar: f64, r: f64) -> f64 {
    (hbar / 2.0).exp() * dual_theta(hbar, r + hbar)[0] / dual_theta(hbar, r)[0]
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HeatKernelComparison {
    /// `(1/2 pi hbar) e^(-|z-z'|^2/2 hbar) theta(2 pi (phi - phi')/hbar, e^(-2 pi^2/hbar))`.
    pub lhs: f64,
    /// `(1/2 pi hbar) e^(-|z-z'|^2/2 hbar)`.
    pub rhs: f64,
    /// `lhs/rhs - 1`, summed from the winding terms directly.
    pub ratio_minus_one: f64,
}

/// Flat heat kernel on the cylinder (images over the cycle) against its flat part.
/// Points are `(r, phi)` in the strip chart `z = r/2 + i phi`.
pub fn heat_kernel_comparison(hbar: f64, x: (f64, f64), y: (f64, f64)) -> Result<HeatKernelComparison> {
    check_hbar(hbar)?;
    let dr = (x.0 - y.0) / 2.0;
    let dphi = x.1 - y.1;
    let flat = (-(dr * dr + dphi * dphi) / (2.0 * hbar)).exp() / (2.0 * PI * hbar);
    let mut winding = 0.0;
    let mut n = 1.0_f64;
    loop {
        let a = (-2.0 * PI * PI * n * n / hbar - 2.0 * PI * n * dphi / hbar).exp();
        let b = (-2.0 * PI * PI * n * n / hbar + 2.0 * PI * n * dphi / hbar).exp();
        winding += a + b;
        if a + b < 1e-30 * (1.0 + winding) && 2.0 * PI * n > dphi.abs() {
            break;
        }
        n += 1.0;
    }
    Ok(HeatKernelComparison { lhs: flat * (1.0 + winding), rhs: flat, ratio_minus_one: winding })
}

#[derive(Clone, Debug, Serialize)]
pub struct PrimeSeriesReport {
    pub relations: ResidualReport,
    /// Largest `|(A^2 - C B)_nn + lambda^2|` and off-diagonal entry on interior indices.
    pub casimir_residual: f64,
    /// Largest `|A_nn - hbar (n+1)|` and off-diagonal entry of `A`.
    pub spectrum_residual: f64,
}

impl PrimeSeriesReport {
    pub fn max(&self) -> f64 {
        self.relations.max().max(self.casimir_residual).max(self.spectrum_residual)
    }
}

/// Prime-series operators on the strip space `n = -M..M`: relations, Casimir `-lambda^2`
/// and the spectrum of `A` on interior indices (margin 2).
pub fn prime_series_check(lambda: f64, hbar: f64, m: usize) -> Result<PrimeSeriesReport> {
    if !(lambda > 0.0) {
        return Err(Error::Domain(format!("lambda must be positive, got {lambda}")));
    }
    let model = su11_prime(lambda, hbar);
    let ops = representation::build(&model, m)?;
    let margin = 2;
    let relations = representation::verify_relations(&model, &ops, margin);
    let (lo, hi) = ops.space.interior(margin);
    let a = &ops.a[0].matrix;
    let cas = &(a * a) - &(&ops.c.matrix * &ops.b.matrix);
    let mut casimir_residual = 0.0_f64;
    let mut spectrum_residual = 0.0_f64;
    for i in lo..hi {
        for j in lo..hi {
            let target = if i == j { -lambda * lambda } else { 0.0 };
            casimir_residual = casimir_residual.max((cas[(i, j)] - target).norm());
            let ta = if i == j { hbar * (ops.space.exponent(i) + 1) as f64 } else { 0.0 };
            spectrum_residual = spectrum_residual.max((a[(i, j)] - ta).norm());
        }
    }
    Ok(PrimeSeriesReport { relations, casimir_residual, spectrum_residual })
}

/// `max |k(r) l(r) - Theta(r)/2|` relative to `Theta/2`, with `k` from the kernel
/// coefficients and `l` from the Gaussian density.
pub fn dual_representation_residual(hbar: f64, rs: &[f64]) -> Result<f64> {
    let k = cylinder_kernel(hbar)?;
    let l = cylinder_measure(hbar)?;
    let mut worst = 0.0_f64;
    for &r in rs {
        let lhs = k.eval(r) * l.eval(r)?;
        let rhs = measure_density(hbar, r)?;
        worst = worst.max((lhs - rhs).abs() / rhs);
    }
    Ok(worst)
}
