//! Measure densities `l(r)` for which `dm = k l dzbar dz` reproduces the kernel.

use super::bessel::ln_macdonald_modified;
use super::quadrature::{adaptive, adaptive_to_infinity, log_integral_unimodal, Tolerance};
use super::{solve_kernel, KernelFunction};
use crate::algebra::models::zeeman_roots;
use crate::algebra::{ModelData, ModelKind, Structure};
use crate::error::{Error, Result};
use crate::poly::Polynomial;
use crate::real::re;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;
use std::f64::consts::PI;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum DensityKind {
    /// `hbar (N+1) (1+r)^-(N+2)` on `r > 0`.
    Sphere { n: usize },
    /// `2a (1-r)^((2a-hbar)/hbar)` on the unit disk.
    PowerDisk { a: f64 },
    /// `M~_nu(2 sqrt(r)/hbar) / hbar` on the plane.
    Macdonald { nu: f64 },
    /// Euler integral for the Zeeman leaf with polar roots `t_+`, `|t_-|`.
    Euler { n: usize, t_plus: f64, t_minus_abs: f64 },
    /// `(hbar/4 pi)^(1/2) e^(-(r-hbar)^2/4 hbar)` on the strip axis.
    Gaussian,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DensityFunction {
    pub kind: DensityKind,
    pub hbar: f64,
    /// Domain of `r`; infinite ends are stored as infinities.
    pub lower: f64,
    pub upper: f64,
    /// `(1/hbar) int l dr` as computed by quadrature.
    pub normalization: f64,
}

fn softplus(x: f64) -> f64 {
    if x > 35.0 {
        x
    } else {
        x.exp().ln_1p()
    }
}

fn quad_tol() -> Tolerance {
    Tolerance { abs: 1e-14, rel: 1e-13, max_intervals: 4000 }
}

impl DensityFunction {
    fn new(kind: DensityKind, hbar: f64) -> Self {
        let (lower, upper) = match kind {
            DensityKind::PowerDisk { .. } => (0.0, 1.0),
            DensityKind::Gaussian => (f64::NEG_INFINITY, f64::INFINITY),
            _ => (0.0, f64::INFINITY),
        };
        Self { kind, hbar, lower, upper, normalization: f64::NAN }
    }

    /// `ln l(r)`.
    pub fn ln_eval(&self, r: f64) -> Result<f64> {
        let h = self.hbar;
        match self.kind {
            DensityKind::Sphere { n } => Ok((h * (n + 1) as f64).ln() - (n + 2) as f64 * r.ln_1p()),
            DensityKind::PowerDisk { a } => Ok((2.0 * a).ln() + (2.0 * a - h) / h * (-r).ln_1p()),
            DensityKind::Macdonald { nu } => Ok(ln_macdonald_modified(nu, 2.0 * r.sqrt() / h)? - h.ln()),
            DensityKind::Euler { n, t_plus, t_minus_abs } => {
                let p = t_plus / h;
                let q = 1.0 + (t_plus + t_minus_abs) / h;
                let m = (n + 2) as f64;
                let lr = r.ln();
                // lambda = e^s; integrand exp(phi) is log-concave in s
                let phi = |s: f64| (p + 1.0) * s - m * softplus(s + lr) - q * softplus(s);
                let dphi = |s: f64| {
                    (p + 1.0) - m / (1.0 + (-(s + lr)).exp()) - q / (1.0 + (-s).exp())
                };
                let (mut lo, mut hi) = (-400.0, 400.0);
                for _ in 0..200 {
                    let mid = 0.5 * (lo + hi);
                    if dphi(mid) > 0.0 {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                let li = log_integral_unimodal(phi, 0.5 * (lo + hi), 1.0, Tolerance { abs: 0.0, rel: 1e-14, max_intervals: 2000 })?;
                let pre = (h * (n + 1) as f64).ln() + ln_gamma(q) - ln_gamma(p) - ln_gamma(1.0 + t_minus_abs / h);
                Ok(pre + li)
            }
            DensityKind::Gaussian => Ok(0.5 * (h / (4.0 * PI)).ln() - (r - h) * (r - h) / (4.0 * h)),
        }
    }

    pub fn eval(&self, r: f64) -> Result<f64> {
        if r < self.lower || r > self.upper {
            return Ok(0.0);
        }
        if self.upper == 1.0 && r == 1.0 {
            return Ok(0.0);
        }
        self.ln_eval(r).map(f64::exp)
    }

    fn eval_or_nan(&self, r: f64) -> f64 {
        self.eval(r).unwrap_or(f64::NAN)
    }

    /// `(1/hbar) int f(r) l(r) dr` over the domain.
    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> Result<f64> {
        let h = self.hbar;
        let tol = quad_tol();
        let v = match self.kind {
            DensityKind::PowerDisk { a } => {
                // 1 - r = s^m flattens the endpoint power (1-r)^p into s^(m(p+1)-1)
                let p = (2.0 * a - h) / h;
                let m = (2.0 / (p + 1.0)).ceil().max(1.0);
                adaptive(
                    |s| {
                        let u = s.powf(m);
                        f(1.0 - u) * 2.0 * a * s.powf(m * (p + 1.0) - 1.0) * m
                    },
                    0.0,
                    1.0,
                    tol,
                )?
            }
            DensityKind::Gaussian => {
                let w = 40.0 * h.sqrt();
                adaptive(|r| f(r) * self.eval_or_nan(r), h - w, h + w, tol)?
            }
            DensityKind::Macdonald { .. } => {
                adaptive_to_infinity(|s| 2.0 * s * f(s * s) * self.eval_or_nan(s * s), 0.0, tol)?
            }
            _ => adaptive_to_infinity(|r| f(r) * self.eval_or_nan(r), 0.0, tol)?,
        };
        Ok(v / h)
    }

    /// Largest relative residual of `conj(E)(-hbar theta) l = r D(-hbar theta - hbar) l`,
    /// `theta = r d/dr`, at the sample points; radial charts only.
    pub fn flip_residual(&self, model: &ModelData<f64>, samples: &[f64]) -> Result<f64> {
        let Some(fact) = model.factorization() else {
            return Err(Error::NoPositiveSolution("the flip equation is stated in the radial chart".into()));
        };
        let h = self.hbar;
        let x = Polynomial::var(1, 0);
        let e_flip = fact.script_e_poly(&model.spec).conj().compose(&[x.scale(re(-h))]);
        let d_flip = fact.script_d_poly(&model.spec).compose(&[&x.scale(re(-h)) - &Polynomial::real_constant(1, h)]);
        let order = e_flip.degree().max(d_flip.degree()) as usize;
        if order > 2 {
            return Err(Error::NoPositiveSolution(format!("operator order {order} above 2")));
        }
        let mut worst: f64 = 0.0;
        for &r in samples {
            // theta = d/du with u = ln r; five-point stencils
            let step = 1e-3;
            let f = |u: f64| self.eval_or_nan(u.exp());
            let u = r.ln();
            let v: Vec<f64> = (-2..=2).map(|k| f(u + k as f64 * step)).collect();
            let d1 = (v[0] - 8.0 * v[1] + 8.0 * v[3] - v[4]) / (12.0 * step);
            let d2 = (-v[0] + 16.0 * v[1] - 30.0 * v[2] + 16.0 * v[3] - v[4]) / (12.0 * step * step);
            let thetas = [v[2], d1, d2];
            let apply = |p: &Polynomial<f64>| -> f64 {
                p.coeffs().iter().zip(thetas).map(|(c, t)| c.re * t).sum()
            };
            let lhs = apply(&e_flip);
            let rhs = r * apply(&d_flip);
            let scale = v[2].abs().max(lhs.abs()).max(f64::MIN_POSITIVE);
            worst = worst.max((lhs - rhs).abs() / scale);
        }
        Ok(worst)
    }
}

fn density_kind(model: &ModelData<f64>) -> Result<DensityKind> {
    let h = model.hbar();
    match (&model.structure, model.kind) {
        (Structure::Strip(_), _) => Ok(DensityKind::Gaussian),
        (Structure::Radial(f), ModelKind::Su2Sphere) => Ok(DensityKind::Sphere { n: f.level.unwrap_or(0) }),
        (Structure::Radial(f), ModelKind::Su11Variant1) => Ok(DensityKind::PowerDisk { a: f.vacuum[0] }),
        (Structure::Radial(f), ModelKind::Su11Variant2) => Ok(DensityKind::Macdonald { nu: 2.0 * f.vacuum[0] / h }),
        (Structure::Radial(f), ModelKind::Zeeman) => {
            let n = f.level.ok_or_else(|| Error::NoPositiveSolution("Zeeman vacuum is not at an integer level".into()))?;
            let (tp, tm) = zeeman_roots(f.vacuum[0], f.vacuum[1]);
            Ok(DensityKind::Euler { n, t_plus: tp, t_minus_abs: tm.abs() })
        }
        (_, k) => Err(Error::NoPositiveSolution(format!("no registered density for {k}"))),
    }
}

/// Registered positive solution of the flipped equation, with its normalization and the first
/// moments `(1/hbar) int r^n l = 1/c_n` (strip: `int e^(n r) l`) checked against the kernel.
pub fn solve_density(model: &ModelData<f64>) -> Result<DensityFunction> {
    let kind = density_kind(model)?;
    let mut d = DensityFunction::new(kind, model.hbar());
    let norm_tol = if matches!(d.kind, DensityKind::Euler { .. }) { 1e-8 } else { 1e-10 };
    for w in d.ln_eval_probe() {
        if !w.is_finite() {
            return Err(Error::NoPositiveSolution("density is not finite on the domain".into()));
        }
    }
    d.normalization = d.integrate(|_| 1.0)?;
    if (d.normalization - 1.0).abs() > norm_tol {
        return Err(Error::NoPositiveSolution(format!("normalization {}", d.normalization)));
    }
    let kernel: KernelFunction<f64> = solve_kernel(model, 8)?;
    for n in kernel.indices().filter(|&n| n != 0 && n.abs() <= 3) {
        let w = 1.0 / kernel.coefficient(n).unwrap_or(f64::NAN);
        // scaled by 1/w so the quadrature's absolute tolerance is relative to the moment
        let ratio = match d.kind {
            DensityKind::Gaussian => d.integrate(|r| (n as f64 * r).exp() / w)?,
            _ => d.integrate(|r| r.powi(n as i32) / w)?,
        };
        let moment = ratio * w;
        if (ratio - 1.0).abs() > 1e-7 {
            return Err(Error::NoPositiveSolution(format!("moment {n}: {moment} against weight {w}")));
        }
    }
    Ok(d)
}

impl DensityFunction {
    fn ln_eval_probe(&self) -> Vec<f64> {
        let pts: &[f64] = match self.kind {
            DensityKind::PowerDisk { .. } => &[0.1, 0.5, 0.9],
            DensityKind::Gaussian => &[-1.0, 0.0, 1.0],
            _ => &[0.1, 1.0, 10.0],
        };
        pts.iter().map(|&r| self.ln_eval(r).unwrap_or(f64::NAN)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::models;

    #[test]
    fn variant1_closed_form() {
        let m = models::su11_variant1::<f64>(1.0, 1.0);
        let d = solve_density(&m).unwrap();
        assert!((d.eval(0.25).unwrap() - 2.0 * 0.75).abs() < 1e-14);
        assert!((d.normalization - 1.0).abs() < 1e-10);
        let m = models::su11_variant1::<f64>(0.3, 1.0);
        let d = solve_density(&m).unwrap();
        assert!((d.normalization - 1.0).abs() < 1e-10, "weak endpoint singularity");
    }

    #[test]
    fn gaussian_weights_from_quadrature() {
        for h in [0.5, 1.0, 2.0] {
            let m = models::cylinder::<f64>(1.0, 0.0, h);
            let d = solve_density(&m).unwrap();
            for n in [-2i32, 1, 3] {
                let v = d.integrate(|r| (n as f64 * r).exp()).unwrap();
                let w = (h * (n * n + n) as f64).exp();
                assert!((v - w).abs() < 1e-10 * w, "h={h} n={n}");
            }
        }
    }

    #[test]
    fn sphere_and_bessel_normalized() {
        for n in [1, 4, 9] {
            let d = solve_density(&models::sphere::<f64>(n)).unwrap();
            assert!((d.normalization - 1.0).abs() < 1e-10);
        }
        let d = solve_density(&models::su11_variant2::<f64>(1.0, 0.5)).unwrap();
        assert!((d.normalization - 1.0).abs() < 1e-10);
    }

    #[test]
    fn zeeman_euler_integral() {
        for (n, a2, h) in [(1usize, 1.0, 1.0), (3, 2.0, 0.5)] {
            let m = models::zeeman::<f64>(n, a2, h);
            let d = solve_density(&m).unwrap();
            assert!((d.normalization - 1.0).abs() < 1e-8);
            for r in [0.2, 1.0, 3.0] {
                assert!(d.eval(r).unwrap() > 0.0);
            }
        }
    }

    #[test]
    fn flip_equation_residuals() {
        let samples = [0.2, 0.45, 0.7];
        let cases = [
            models::su11_variant1::<f64>(1.0, 0.5),
            models::su11_variant2::<f64>(1.0, 0.5),
            models::sphere::<f64>(3),
            models::zeeman::<f64>(2, 1.0, 1.0),
        ];
        for m in &cases {
            let d = solve_density(m).unwrap();
            let res = d.flip_residual(m, &samples).unwrap();
            assert!(res < 1e-6, "{} {res}", m.kind);
        }
    }

    #[test]
    fn unregistered_vacuum_has_no_density() {
        let m = models::zeeman_with_vacuum::<f64>(-2.5, 1.0, 1.0);
        assert_eq!(solve_density(&m).unwrap_err().code(), "NO_POSITIVE_SOLUTION");
    }
}
