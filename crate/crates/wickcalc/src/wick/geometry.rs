//! Kähler data of the kernel: `omega = i hbar dbar d ln k = i g dzbar ^ dz`, the curvature
//! term `sigma_1` and the integrated dimension formula.

use super::{Leaf, RadialMap};
use crate::error::{Error, Result};
use crate::special::quadrature::gauss_legendre;
use crate::special::semiclassical::{classical_momentum, h_function};
use crate::special::theta::theta_series_derivs;
use crate::special::Chart;
use crate::algebra::ModelKind;
use crate::C64;

/// Kähler data of one leaf as functions of the chart variable `r`.
#[derive(Clone, Copy, Debug)]
pub struct KahlerData<'a> {
    pub leaf: &'a Leaf,
}

impl<'a> KahlerData<'a> {
    pub fn new(leaf: &'a Leaf) -> Self {
        Self { leaf }
    }

    /// `F = hbar ln k(r)`.
    pub fn potential(&self, r: f64) -> f64 {
        self.leaf.hbar() * self.leaf.kernel(C64::new(r, 0.0)).re.ln()
    }

    /// `[L', L'', L''', L'''']` for `L = ln k`.
    pub fn log_derivs(&self, r: f64) -> [f64; 4] {
        let leaf = self.leaf;
        let u: [f64; 5] = match leaf.chart() {
            Chart::Strip => {
                let h = leaf.hbar();
                let t = theta_series_derivs::<5>(C64::new(r - h, 0.0), (-h).exp()).unwrap_or([C64::new(f64::NAN, 0.0); 5]);
                std::array::from_fn(|j| t[j].re / t[0].re)
            }
            Chart::Radial if leaf.model.kind == ModelKind::Su2Sphere => {
                let n = (leaf.dim() - 1) as f64;
                let mut out = [1.0; 5];
                for j in 1..5 {
                    out[j] = out[j - 1] * (n - (j - 1) as f64) / (1.0 + r);
                }
                out
            }
            Chart::Radial => {
                let k = leaf.space().kernel.eval_derivs(r);
                std::array::from_fn(|j| k[j] / k[0])
            }
        };
        let [_, u1, u2, u3, u4] = u;
        [
            u1,
            u2 - u1 * u1,
            u3 - 3.0 * u1 * u2 + 2.0 * u1.powi(3),
            u4 - 4.0 * u1 * u3 - 3.0 * u2 * u2 + 12.0 * u1 * u1 * u2 - 6.0 * u1.powi(4),
        ]
    }

    /// `[g, g', g'']` with `g = hbar (r L')'` (radial) or `hbar L''` (strip).
    pub fn omega_derivs(&self, r: f64) -> [f64; 3] {
        let h = self.leaf.hbar();
        let [l1, l2, l3, l4] = self.log_derivs(r);
        match self.leaf.chart() {
            Chart::Radial => [h * (l1 + r * l2), h * (2.0 * l2 + r * l3), h * (3.0 * l3 + r * l4)],
            Chart::Strip => [h * l2, h * l3, h * l4],
        }
    }

    pub fn omega(&self, r: f64) -> f64 {
        self.omega_derivs(r)[0]
    }

    /// `sigma_1 = -(1/2) g^-1 d dbar ln g`.
    pub fn sigma1(&self, r: f64) -> f64 {
        let [g, g1, g2] = self.omega_derivs(r);
        let lg1 = g1 / g;
        let lg2 = g2 / g - lg1 * lg1;
        match self.leaf.chart() {
            Chart::Radial => -(lg1 + r * lg2) / (2.0 * g),
            Chart::Strip => -lg2 / (2.0 * g),
        }
    }

    /// Classical density `g0 = (r F0')'` of the leaf through the vacuum, from `H(r F0') = r`;
    /// `1/2` on the flat cylinder.
    pub fn omega0(&self, r: f64) -> Result<f64> {
        let m = &self.leaf.model;
        match m.kind {
            ModelKind::Cylinder => Ok(0.5),
            k if k.is_strip() => Err(Error::NoSolution(format!("no classical density registered for {k}"))),
            _ => {
                let s = classical_momentum(m, r)?;
                let e = 1e-3;
                let h = |t: f64| h_function(m, t);
                let dh = (8.0 * (h(s + e)? - h(s - e)?) - (h(s + 2.0 * e)? - h(s - 2.0 * e)?)) / (12.0 * e);
                Ok(1.0 / dh)
            }
        }
    }

    /// `k l`, the density of `dm` against `dr dphi`.
    pub fn measure(&self, r: f64) -> f64 {
        self.leaf.measure_density(r)
    }
}

fn compact_integral(leaf: &Leaf, f: impl Fn(f64) -> f64) -> Result<f64> {
    if !leaf.map.is_compact() {
        return Err(Error::NoSolution("the integrated dimension formula needs a compact leaf".into()));
    }
    // u = (r-1)/(r+1) keeps the nodes away from the extreme radii
    let map = RadialMap::Compact;
    Ok(gauss_legendre(200, -1.0, 1.0).into_iter().map(|(u, w)| w * map.jacobian(u) * f(map.radius(u))).sum())
}

/// `(1/2 pi hbar) int (1 + hbar sigma_1) dm^omega = (1/hbar) int g dr + int sigma_1 g dr`.
pub fn dimension_formula(leaf: &Leaf) -> Result<f64> {
    let kd = KahlerData::new(leaf);
    let h = leaf.hbar();
    compact_integral(leaf, |r| {
        let g = kd.omega(r);
        g / h + kd.sigma1(r) * g
    })
}

/// `(1/pi) int sigma_1 dm^omega = 2 int sigma_1 g dr`.
pub fn gauss_bonnet(leaf: &Leaf) -> Result<f64> {
    let kd = KahlerData::new(leaf);
    compact_integral(leaf, |r| 2.0 * kd.sigma1(r) * kd.omega(r))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::models;

    #[test]
    fn sphere_geometry() {
        for n in [2usize, 5, 10] {
            let leaf = Leaf::new(&models::sphere(n), 0).unwrap();
            let kd = KahlerData::new(&leaf);
            let h = leaf.hbar();
            for r in [0.1, 1.0, 7.0] {
                assert!((kd.omega(r) - 2.0 / (1.0 + r).powi(2)).abs() < 1e-12);
                assert!((kd.sigma1(r) - 0.5).abs() < 1e-10);
                assert!((kd.measure(r) / kd.omega(r) - (1.0 + h / 2.0)).abs() < 1e-12);
                // the classical leaf through the vacuum has radius 1 + hbar/2
                assert!((kd.omega0(r).unwrap() - (1.0 + h / 2.0) * kd.omega(r)).abs() < 1e-8);
            }
            let dim = dimension_formula(&leaf).unwrap();
            assert!((dim - (n + 1) as f64).abs() < 1e-6, "{dim}");
            assert!((gauss_bonnet(&leaf).unwrap() - 2.0).abs() < 1e-6);
        }
    }

    #[test]
    fn zeeman_dimension() {
        let leaf = Leaf::new(&models::zeeman(3, 1.0, 0.5), 0).unwrap();
        let dim = dimension_formula(&leaf).unwrap();
        assert!((dim - 4.0).abs() < 1e-6, "{dim}");
        assert!((gauss_bonnet(&leaf).unwrap() - 2.0).abs() < 1e-6);
    }

    #[test]
    fn cylinder_is_nearly_flat() {
        let leaf = Leaf::new(&models::cylinder(1.0, 0.0, 1.0), 8).unwrap();
        let kd = KahlerData::new(&leaf);
        for r in [-1.0, 0.3, 2.0] {
            assert!((kd.omega(r) - 0.5).abs() < 5e-3);
            assert!(kd.sigma1(r).abs() < 5e-2);
        }
    }
}
