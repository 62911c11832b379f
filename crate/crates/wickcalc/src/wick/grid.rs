//! Product quadrature grids on a chart: Gauss–Legendre in a radial coordinate times the
//! trapezoid rule in the angle (or period).

use crate::special::Chart;
use crate::C64;
use serde::Serialize;
use std::f64::consts::PI;

/// Radial coordinate `s` used for the Gauss–Legendre factor.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum RadialMap {
    /// `u = (r-1)/(r+1)` on `(-1, 1)`; on the sphere `u = xi_3`.
    Compact,
    /// `r = exp(pi sinh s)` on `(-3, 3)`: both ends of `(0, inf)` pushed out double
    /// exponentially, for densities with non-integer powers at `r -> 0` and `r -> inf`.
    Graded,
    /// `r = tanh^2 tau`, `tau >= 0`.
    Disk,
    /// `r = s^2`, `s >= 0`.
    Plane,
    /// `s = r` on the strip axis.
    Axis,
}

impl RadialMap {
    pub fn radius(self, s: f64) -> f64 {
        match self {
            RadialMap::Compact => (1.0 + s) / (1.0 - s),
            RadialMap::Graded => (PI * s.sinh()).exp(),
            RadialMap::Disk => s.tanh().powi(2),
            RadialMap::Plane => s * s,
            RadialMap::Axis => s,
        }
    }

    pub fn coordinate(self, r: f64) -> f64 {
        match self {
            RadialMap::Compact => (r - 1.0) / (r + 1.0),
            RadialMap::Graded => (r.ln() / PI).asinh(),
            RadialMap::Disk => r.sqrt().atanh(),
            RadialMap::Plane => r.sqrt(),
            RadialMap::Axis => r,
        }
    }

    /// `dr/ds`.
    pub fn jacobian(self, s: f64) -> f64 {
        match self {
            RadialMap::Compact => 2.0 / (1.0 - s).powi(2),
            RadialMap::Graded => PI * s.cosh() * (PI * s.sinh()).exp(),
            RadialMap::Disk => 2.0 * s.tanh() / s.cosh().powi(2),
            RadialMap::Plane => 2.0 * s,
            RadialMap::Axis => 1.0,
        }
    }

    /// Whether the whole leaf is covered by one finite window.
    pub fn is_compact(self) -> bool {
        matches!(self, RadialMap::Compact | RadialMap::Graded)
    }

    /// Natural domain of `s`.
    pub fn domain(self) -> (f64, f64) {
        match self {
            RadialMap::Compact => (-1.0, 1.0),
            RadialMap::Graded => (-3.0, 3.0),
            RadialMap::Disk | RadialMap::Plane => (0.0, f64::INFINITY),
            RadialMap::Axis => (f64::NEG_INFINITY, f64::INFINITY),
        }
    }
}

/// Chart point with radial value `r` and angle `phi`.
pub fn chart_point(chart: Chart, r: f64, phi: f64) -> C64 {
    match chart {
        Chart::Radial => C64::from_polar(r.max(0.0).sqrt(), phi),
        Chart::Strip => C64::new(0.5 * r, phi),
    }
}

/// `r` of a chart point: `|z|^2` or `z + zbar`.
pub fn radius_of(chart: Chart, z: C64) -> f64 {
    match chart {
        Chart::Radial => z.norm_sqr(),
        Chart::Strip => 2.0 * z.re,
    }
}

/// Nodes are stored radius-major: node `i * n_angle + j` sits at radial node `i`, angle `j`.
/// Weights integrate `(1/2 pi hbar) int f dm`.
#[derive(Clone, Debug, Serialize)]
pub struct ChartGrid {
    pub chart: Chart,
    pub map: RadialMap,
    pub nodes: Vec<C64>,
    pub radii: Vec<f64>,
    pub weights: Vec<f64>,
    pub n_radial: usize,
    pub n_angle: usize,
    /// Window of the radial coordinate `s`.
    pub window: (f64, f64),
}

impl ChartGrid {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn angle(&self, j: usize) -> f64 {
        2.0 * PI * j as f64 / self.n_angle as f64
    }

    /// `sum_i w_i f_i`.
    pub fn integrate(&self, values: &[C64]) -> C64 {
        self.weights.iter().zip(values).map(|(w, v)| v * *w).sum()
    }

    /// Smallest distance between distinct nodes in the chart.
    pub fn spacing(&self) -> f64 {
        let mut best = f64::INFINITY;
        for i in 0..self.n_radial {
            for j in 0..self.n_angle {
                let a = self.nodes[i * self.n_angle + j];
                let right = self.nodes[i * self.n_angle + (j + 1) % self.n_angle];
                if self.n_angle > 1 {
                    best = best.min((a - right).norm());
                }
                if i + 1 < self.n_radial {
                    best = best.min((a - self.nodes[(i + 1) * self.n_angle + j]).norm());
                }
            }
        }
        best
    }
}
