//! Coherent states, probability function, Wick symbols and the star product on one leaf.
//!
//! Coherent vectors are kept in orthonormal coordinates `u_n = b_n / sqrt(w_n)`, where
//! `e_x` has components `v_n = z^n / sqrt(w_n)` (radial) or `e^(n z) / sqrt(w_n)` (strip).
//! They are normalized with the exact kernel, so `(1/2 pi hbar) int v v^H / K dm` is the
//! identity of the truncated space.

pub mod expansion;
pub mod geometry;
pub mod grid;
pub mod star;
pub mod symbol;

use crate::algebra::ModelKind;
use crate::ModelData;
use crate::error::{Error, Result};
use crate::representation::{self, CMatrix, Operators, RepSpace, WickOperator};
use crate::special::theta::theta;
use crate::special::{solve_density, Chart, ClosedForm, DensityFunction, DensityKind, KernelFunction};
use crate::C64;
use nalgebra::DVector;
use std::f64::consts::PI;
use std::sync::Arc;

pub use expansion::{hbar_expansion_check, ExpansionReport};
pub use geometry::{dimension_formula, gauss_bonnet, KahlerData};
pub use grid::{chart_point, radius_of, ChartGrid, RadialMap};
pub use star::{
    frobenius_defect, probability_normalization, probability_operator_apply, resolution_defect, sphere_harmonic_eigenvalue, sphere_spectral_check,
    star_operator_route, star_quadrature_route, QuadratureStar, SpectralRow,
};
pub use symbol::{symbol_from_operator, wick_operator_from_extension, wick_operator_from_symbol, SymbolField};

/// Values of `p(x, y)` below this end the search for a local grid window.
const WINDOW_TAIL: f64 = 1e-30;

#[derive(Clone, Debug)]
enum ExactKernel {
    /// `(1 + w)^N`
    Binomial(i32),
    /// `(1 - w)^-p`
    Geometric(f64),
    /// `I~_nu(2 sqrt(w) / hbar)` summed in `w`
    Bessel { nu: f64, hbar: f64 },
    /// `theta(w - hbar, e^-hbar)`
    Theta(f64),
    /// The stored series is the whole kernel.
    Series(KernelFunction<f64>),
}

impl ExactKernel {
    fn eval(&self, w: C64) -> C64 {
        match self {
            ExactKernel::Binomial(n) => (1.0 + w).powi(*n),
            ExactKernel::Geometric(p) => (1.0 - w).powf(-p),
            ExactKernel::Bessel { nu, hbar } => {
                let x = w / (hbar * hbar);
                let mut term = C64::new(1.0, 0.0);
                let mut sum = term;
                let mut n = 1.0;
                loop {
                    term *= x / (n * (nu + n));
                    sum += term;
                    if term.norm() < 1e-17 * sum.norm() && n * n > x.norm() {
                        return sum;
                    }
                    n += 1.0;
                }
            }
            ExactKernel::Theta(h) => theta(w - h, (-h).exp()).unwrap_or(C64::new(f64::NAN, f64::NAN)),
            ExactKernel::Series(k) => k.eval_complex(w),
        }
    }
}

/// A leaf together with its truncated representation, exact kernel and reproducing measure.
#[derive(Clone, Debug)]
pub struct Leaf {
    pub model: ModelData,
    pub ops: Operators<f64>,
    pub density: DensityFunction,
    pub map: RadialMap,
    kernel: ExactKernel,
}

impl Leaf {
    /// `size` is the truncated dimension (radial) or the half-width `M` (strip).
    pub fn new(model: &ModelData, size: usize) -> Result<Self> {
        let ops = representation::build(model, size)?;
        let density = solve_density(model)?;
        let k = &ops.space.kernel;
        let kernel = match (k.closed_form, k.chart) {
            (_, _) if ops.space.exact => ExactKernel::Series(k.clone()),
            (ClosedForm::Geometric, Chart::Radial) => ExactKernel::Geometric(k.shape[0]),
            (ClosedForm::Bessel, _) => ExactKernel::Bessel { nu: k.shape[0], hbar: k.hbar },
            (ClosedForm::Theta, Chart::Strip) => ExactKernel::Theta(k.hbar),
            _ => return Err(Error::NoSolution(format!("no exact kernel evaluator for {}", model.kind))),
        };
        let kernel = match (model.kind, kernel) {
            (ModelKind::Su2Sphere, _) => ExactKernel::Binomial(ops.space.dim() as i32 - 1),
            (_, k) => k,
        };
        let map = match (model.kind.is_strip(), model.kind) {
            (true, _) => RadialMap::Axis,
            (_, ModelKind::Su11Variant1) => RadialMap::Disk,
            (_, ModelKind::Su11Variant2) => RadialMap::Plane,
            (_, ModelKind::Zeeman) => RadialMap::Graded,
            _ => RadialMap::Compact,
        };
        Ok(Self { model: model.clone(), ops, density, map, kernel })
    }

    pub fn space(&self) -> &Arc<RepSpace<f64>> {
        &self.ops.space
    }

    pub fn hbar(&self) -> f64 {
        self.ops.space.hbar
    }

    pub fn chart(&self) -> Chart {
        self.ops.space.chart
    }

    pub fn dim(&self) -> usize {
        self.ops.space.dim()
    }

    pub fn radius(&self, z: C64) -> f64 {
        radius_of(self.chart(), z)
    }

    /// Exact `k(w)` at a complex argument.
    pub fn kernel(&self, w: C64) -> C64 {
        self.kernel.eval(w)
    }

    /// `K(x|x) = k(r_x)`.
    pub fn kernel_diag(&self, x: C64) -> f64 {
        self.kernel(C64::new(self.radius(x), 0.0)).re
    }

    /// `ln K(x|x)`, finite where `K` itself overflows (sphere of high level).
    pub fn ln_kernel_diag(&self, x: C64) -> f64 {
        match self.kernel {
            ExactKernel::Binomial(n) => n as f64 * self.radius(x).ln_1p(),
            _ => self.kernel_diag(x).ln(),
        }
    }

    /// `e_x / sqrt(K(x|x))` in orthonormal coordinates, assembled in logarithms.
    pub fn normalized_coherent(&self, z: C64) -> DVector<C64> {
        let sp = self.space();
        let half = 0.5 * self.ln_kernel_diag(z);
        let lz = match self.chart() {
            Chart::Radial if z == C64::new(0.0, 0.0) => None,
            Chart::Radial => Some(z.ln()),
            Chart::Strip => Some(z),
        };
        DVector::from_fn(sp.dim(), |i, _| {
            let n = sp.exponent(i);
            match lz {
                None if n == 0 => C64::new((-0.5 * sp.log_weights[i] - half).exp(), 0.0),
                None => C64::new(0.0, 0.0),
                Some(l) => (l * n as f64 - 0.5 * sp.log_weights[i] - half).exp(),
            }
        })
    }

    /// `K(x|y) = <e_y, e_x>`: `k(zbar_x z_y)` or `k(zbar_x + z_y)`.
    pub fn kernel_pair(&self, x: C64, y: C64) -> C64 {
        match self.chart() {
            Chart::Radial => self.kernel(x.conj() * y),
            Chart::Strip => self.kernel(x.conj() + y),
        }
    }

    /// `p(x, y) = |K(x|y)|^2 / (K(x|x) K(y|y))`.
    pub fn probability(&self, x: C64, y: C64) -> f64 {
        self.kernel_pair(x, y).norm_sqr() / (self.kernel_diag(x) * self.kernel_diag(y))
    }

    /// Components of `e_x` in orthonormal coordinates.
    pub fn coherent(&self, z: C64) -> DVector<C64> {
        let sp = self.space();
        let lz = match self.chart() {
            Chart::Radial if z == C64::new(0.0, 0.0) => None,
            Chart::Radial => Some(z.ln()),
            Chart::Strip => Some(z),
        };
        DVector::from_fn(sp.dim(), |i, _| {
            let n = sp.exponent(i);
            match lz {
                None if n == 0 => C64::new((-0.5 * sp.log_weights[i]).exp(), 0.0),
                None => C64::new(0.0, 0.0),
                Some(l) => (l * n as f64 - 0.5 * sp.log_weights[i]).exp(),
            }
        })
    }

    /// `T~_mn = T_mn sqrt(w_m / w_n)`: the matrix in orthonormal coordinates.
    pub fn orthonormal(&self, op: &WickOperator<f64>) -> CMatrix<f64> {
        let lw = &self.space().log_weights;
        CMatrix::from_fn(op.dim(), op.dim(), |m, n| op.matrix[(m, n)] * (0.5 * (lw[m] - lw[n])).exp())
    }

    pub fn from_orthonormal(&self, m: CMatrix<f64>) -> WickOperator<f64> {
        let lw = &self.space().log_weights;
        let d = m.nrows();
        WickOperator::new(CMatrix::from_fn(d, d, |i, j| m[(i, j)] * (0.5 * (lw[j] - lw[i])).exp()), self.space().clone())
    }

    /// `<T e_y, e_x> = v_x^H T~ v_y` for a matrix already in orthonormal coordinates.
    pub fn matrix_element(&self, tt: &CMatrix<f64>, x: &DVector<C64>, y: &DVector<C64>) -> C64 {
        x.dotc(&(tt * y))
    }

    /// Wick symbol `<T e_x, e_x> / K(x|x)`.
    pub fn symbol_at(&self, tt: &CMatrix<f64>, z: C64) -> C64 {
        let v = self.coherent(z);
        self.matrix_element(tt, &v, &v) / self.kernel_diag(z)
    }

    /// Coherent projection `Pi(x) = e_x e_x^* / K(x|x)`.
    pub fn projection(&self, z: C64) -> WickOperator<f64> {
        let v = self.coherent(z);
        let m = &v * v.adjoint() / C64::new(self.kernel_diag(z), 0.0);
        self.from_orthonormal(m)
    }

    /// `k(r) l(r)`, the density of `dm` against `dr dphi`.
    pub fn measure_density(&self, r: f64) -> f64 {
        let h = self.hbar();
        match self.density.kind {
            DensityKind::Sphere { n } => h * (n + 1) as f64 / (1.0 + r).powi(2),
            DensityKind::PowerDisk { a } => 2.0 * a / (1.0 - r).powi(2),
            DensityKind::Gaussian => {
                let t = theta(C64::new(0.0, PI * (r - h) / h), (-PI * PI / h).exp());
                0.5 * t.map(|t| t.re).unwrap_or(f64::NAN)
            }
            _ => {
                let lk = self.kernel(C64::new(r, 0.0)).re.ln();
                (lk + self.density.ln_eval(r).unwrap_or(f64::NAN)).exp()
            }
        }
    }

    /// `k l dr/ds` in the grid's radial coordinate.
    fn weight_density(&self, s: f64) -> f64 {
        match (self.map, &self.density.kind) {
            (RadialMap::Compact, DensityKind::Sphere { n }) => 0.5 * self.hbar() * (n + 1) as f64,
            (RadialMap::Disk, DensityKind::PowerDisk { a }) => 2.0 * a * (2.0 * s).sinh(),
            (map, _) => self.measure_density(map.radius(s)) * map.jacobian(s),
        }
    }

    /// Product grid on the window `[s0, s1]` of the radial coordinate.
    pub fn grid(&self, n_radial: usize, n_angle: usize, window: (f64, f64)) -> ChartGrid {
        let h = self.hbar();
        let chart = self.chart();
        let mut nodes = Vec::with_capacity(n_radial * n_angle);
        let mut radii = Vec::with_capacity(n_radial * n_angle);
        let mut weights = Vec::with_capacity(n_radial * n_angle);
        for (s, ws) in crate::special::quadrature::gauss_legendre(n_radial, window.0, window.1) {
            let r = self.map.radius(s);
            let w = ws * self.weight_density(s) / (h * n_angle as f64);
            for j in 0..n_angle {
                let phi = 2.0 * PI * j as f64 / n_angle as f64;
                nodes.push(chart_point(chart, r, phi));
                radii.push(r);
                weights.push(w);
            }
        }
        ChartGrid { chart, map: self.map, nodes, radii, weights, n_radial, n_angle, window }
    }

    /// Window of the radial coordinate outside which `p(x, .)` is negligible.
    pub fn local_window(&self, x: C64) -> (f64, f64) {
        let (lo, hi) = self.map.domain();
        if self.map.is_compact() {
            return (lo, hi);
        }
        let sx = self.map.coordinate(self.radius(x));
        let phi = match self.chart() {
            Chart::Radial => x.arg(),
            Chart::Strip => x.im,
        };
        let mut ends = [lo, hi];
        for (end, dir) in ends.iter_mut().zip([-1.0, 1.0]) {
            let mut s = sx;
            let mut step = 0.05;
            loop {
                let t = s + dir * step;
                if (dir < 0.0 && t <= *end) || (dir > 0.0 && t >= *end) {
                    break;
                }
                let y = chart_point(self.chart(), self.map.radius(t), phi);
                if self.probability(x, y) < WINDOW_TAIL {
                    *end = t;
                    break;
                }
                s = t;
                step *= 1.5;
            }
        }
        (ends[0], ends[1])
    }

    /// Grid adapted to `x` (the whole chart for compact leaves).
    pub fn local_grid(&self, x: C64, n_radial: usize, n_angle: usize) -> ChartGrid {
        self.grid(n_radial, n_angle, self.local_window(x))
    }

    /// Default grid sizes per chart around `center` (`r = hbar` on the strip axis when absent).
    pub fn default_grid(&self, center: Option<C64>) -> ChartGrid {
        let x = center.unwrap_or(match self.chart() {
            Chart::Radial => C64::new(0.5, 0.0),
            Chart::Strip => chart_point(Chart::Strip, self.hbar(), 0.0),
        });
        match self.map {
            RadialMap::Compact | RadialMap::Graded => self.grid(96, 96, self.map.domain()),
            // the pole of (1 - zbar_x z_y)^-p near the rim needs the finer angle
            RadialMap::Disk => self.local_grid(x, 128, 192),
            RadialMap::Plane => self.local_grid(x, 128, 96),
            RadialMap::Axis => {
                let r = self.radius(x);
                let w = 16.0 * self.hbar().sqrt();
                self.grid(192, 96, (r - w, r + w))
            }
        }
    }

    /// Unit vector `(xi_1, xi_2, xi_3)` of a sphere chart point.
    pub fn sphere_point(z: C64) -> [f64; 3] {
        let r = z.norm_sqr();
        let p = -2.0 * z / (1.0 + r);
        [p.re, p.im, (r - 1.0) / (r + 1.0)]
    }

    /// Chart point of a unit vector (the north pole `xi_3 = 1` is not in the chart).
    pub fn sphere_chart(xi: [f64; 3]) -> C64 {
        let r = (1.0 + xi[2]) / (1.0 - xi[2]);
        -C64::new(xi[0], xi[1]) * (1.0 + r) / 2.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::models;

    #[test]
    fn sphere_probability_closed_form() {
        let leaf = Leaf::new(&models::sphere(5), 0).unwrap();
        let x = C64::new(0.3, -0.8);
        let y = C64::new(-1.4, 0.2);
        let (a, b) = (Leaf::sphere_point(x), Leaf::sphere_point(y));
        let dot: f64 = a.iter().zip(&b).map(|(p, q)| p * q).sum();
        let p = leaf.probability(x, y);
        assert!((p - ((1.0 + dot) / 2.0).powi(5)).abs() < 1e-14);
        assert!((leaf.probability(x, x) - 1.0).abs() < 1e-15);
        // antipode of x
        let anti = Leaf::sphere_chart([-a[0], -a[1], -a[2]]);
        assert!(leaf.probability(x, anti) < 1e-15);
        assert!((Leaf::sphere_chart(a) - x).norm() < 1e-14);
    }

    #[test]
    fn coherent_norm_matches_kernel() {
        let leaf = Leaf::new(&models::sphere(6), 0).unwrap();
        let z = C64::new(0.7, 0.4);
        let v = leaf.coherent(z);
        assert!((v.norm_squared() - leaf.kernel_diag(z)).abs() < 1e-12 * leaf.kernel_diag(z));
        let leaf = Leaf::new(&models::cylinder(1.0, 0.0, 1.0), 24).unwrap();
        let z = chart_point(Chart::Strip, 0.8, 1.3);
        let v = leaf.coherent(z);
        assert!((v.norm_squared() / leaf.kernel_diag(z) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn projection_is_rank_one() {
        let leaf = Leaf::new(&models::sphere(4), 0).unwrap();
        let (x, y) = (C64::new(0.2, 0.9), C64::new(-0.5, 0.1));
        let px = leaf.projection(x);
        let py = leaf.projection(y);
        assert!(px.mul(&px).sub(&px).max_abs() < 1e-12);
        assert!((px.trace().re - 1.0).abs() < 1e-12);
        assert!((px.mul(&py).trace().re - leaf.probability(x, y)).abs() < 1e-10);
        assert!(px.sub(&px.adjoint()).max_abs() < 1e-12);
    }

    #[test]
    fn probability_bounds_and_separation() {
        let leaf = Leaf::new(&models::sphere(3), 0).unwrap();
        let g = leaf.grid(12, 12, (-1.0, 1.0));
        let spacing = g.spacing();
        for (i, &x) in g.nodes.iter().enumerate() {
            for (j, &y) in g.nodes.iter().enumerate() {
                let p = leaf.probability(x, y);
                assert!((0.0..=1.0 + 1e-12).contains(&p));
                if i != j && p > 1.0 - 1e-9 {
                    assert!((x - y).norm() < spacing);
                }
            }
        }
    }
}
