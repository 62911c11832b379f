//! Wick symbols on grids and the two ways back to operators.

use super::grid::ChartGrid;
use super::Leaf;
use crate::error::{Error, Result};
use crate::representation::{CMatrix, WickOperator};
use crate::special::Chart;
use crate::C64;
use nalgebra::DMatrix;
use std::f64::consts::PI;
use std::sync::Arc;

/// Values of a symbol on the nodes of a grid.
#[derive(Clone, Debug)]
pub struct SymbolField {
    pub grid: Arc<ChartGrid>,
    pub values: Vec<C64>,
}

impl SymbolField {
    /// Samples `f` at the grid nodes.
    pub fn sample(grid: &Arc<ChartGrid>, f: impl Fn(C64) -> C64) -> Self {
        Self { grid: grid.clone(), values: grid.nodes.iter().map(|&z| f(z)).collect() }
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.norm()))
    }

    pub fn max_abs_diff(&self, other: &SymbolField) -> f64 {
        self.values.iter().zip(&other.values).fold(0.0, |m, (a, b)| m.max((a - b).norm()))
    }

    /// Largest imaginary part (zero to rounding for real symbols).
    pub fn max_imag(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.im.abs()))
    }

    /// `(1/2 pi hbar) int psi dm` by the grid weights.
    pub fn integral(&self) -> C64 {
        self.grid.integrate(&self.values)
    }

    pub fn conj(&self) -> Self {
        Self { grid: self.grid.clone(), values: self.values.iter().map(|v| v.conj()).collect() }
    }
}

/// `psi(x) = tr(T Pi(x))` on the grid nodes.
pub fn symbol_from_operator(leaf: &Leaf, op: &WickOperator<f64>, grid: &Arc<ChartGrid>) -> SymbolField {
    let tt = leaf.orthonormal(op);
    SymbolField::sample(grid, |z| leaf.symbol_at(&tt, z))
}

/// Least-squares inversion of the symbol map on a product grid.
///
/// With `v_m^* v_n = r^((m+n)/2) e^(i(n-m) phi) / sqrt(w_m w_n)` (strip: `e^((m+n) r/2)`),
/// each angular Fourier mode `q` of `K psi` is a radial fit for the diagonal `n - m = q` of `T~`.
pub fn wick_operator_from_symbol(leaf: &Leaf, field: &SymbolField) -> Result<WickOperator<f64>> {
    let g = &field.grid;
    let sp = leaf.space();
    let d = sp.dim();
    if g.n_radial < d || g.n_angle < 2 * d - 1 {
        return Err(Error::IllConditioned(format!(
            "{}x{} grid for dimension {d}; need at least {d}x{}",
            g.n_radial,
            g.n_angle,
            2 * d - 1
        )));
    }
    let na = g.n_angle;
    let radial: Vec<f64> = (0..g.n_radial).map(|i| g.radii[i * na]).collect();
    let lam: Vec<f64> = radial
        .iter()
        .map(|&r| match leaf.chart() {
            Chart::Radial => r.ln(),
            Chart::Strip => r,
        })
        .collect();
    let lk: Vec<f64> = radial.iter().map(|&r| leaf.kernel(C64::new(r, 0.0)).re.ln()).collect();
    let mut tt = CMatrix::<f64>::zeros(d, d);
    for q in -(d as i64 - 1)..=(d as i64 - 1) {
        // Fourier coefficient of psi in the angle, per radial node
        let rhs: Vec<C64> = (0..g.n_radial)
            .map(|i| {
                (0..na)
                    .map(|j| field.values[i * na + j] * C64::from_polar(1.0, -(q as f64) * 2.0 * PI * j as f64 / na as f64))
                    .sum::<C64>()
                    / na as f64
            })
            .collect();
        let ms: Vec<usize> = (0..d).filter(|&m| (0..d as i64).contains(&(m as i64 + q))).collect();
        let mut a = DMatrix::<f64>::from_fn(g.n_radial, ms.len(), |i, c| {
            let m = ms[c];
            let n = (m as i64 + q) as usize;
            let e = (sp.exponent(m) + sp.exponent(n)) as f64;
            (0.5 * e * lam[i] - 0.5 * (sp.log_weights[m] + sp.log_weights[n]) - lk[i]).exp()
        });
        let scale: Vec<f64> = a.column_iter().map(|c| c.norm()).collect();
        if scale.iter().any(|s| !(*s > 0.0) || !s.is_finite()) {
            return Err(Error::IllConditioned(format!("basis function vanishes on the grid in mode {q}")));
        }
        for (c, s) in scale.iter().enumerate() {
            a.column_mut(c).scale_mut(1.0 / s);
        }
        let b = DMatrix::<f64>::from_fn(g.n_radial, 2, |i, k| if k == 0 { rhs[i].re } else { rhs[i].im });
        let svd = a.svd(true, true);
        let smax = svd.singular_values.max();
        let smin = svd.singular_values.min();
        if smin < 1e-13 * smax {
            return Err(Error::IllConditioned(format!("Gram matrix loses rank in mode {q}: {smin:e} / {smax:e}")));
        }
        let x = svd.solve(&b, 0.0).map_err(|e| Error::IllConditioned(e.to_string()))?;
        for (c, &m) in ms.iter().enumerate() {
            let n = (m as i64 + q) as usize;
            tt[(m, n)] = C64::new(x[(c, 0)], x[(c, 1)]) / scale[c];
        }
    }
    Ok(leaf.from_orthonormal(tt))
}

/// Operator whose symbol has the sesqui-holomorphic extension `f(w, z)` (`w` stands for `zbar`).
///
/// `F = f k` expands as `sum_mn a_mn w^m z^n` (strip: `e^(m w + n z)`) with `T~_mn =
/// a_mn sqrt(w_m w_n)`. Coefficients of total degree `m + n` are read off a torus whose
/// radius balances the kernel terms of that degree. Entries below the rounding floor of their
/// transform, `eps max|F| rho^-(m+n) sqrt(w_m w_n)`, are set to zero: the symbol does not
/// determine them.
pub fn wick_operator_from_extension(leaf: &Leaf, f: &dyn Fn(C64, C64) -> C64) -> Result<WickOperator<f64>> {
    let sp = leaf.space();
    let d = sp.dim();
    let lw = &sp.log_weights;
    let p = 2 * d + 8;
    let strip = leaf.chart() == Chart::Strip;
    let mut tt = CMatrix::<f64>::zeros(d, d);
    let mut samples = vec![C64::new(0.0, 0.0); p * p];
    for s in 0..=(2 * d - 2) {
        let j = s.div_ceil(2).clamp(1, d.max(2) - 1).min(d - 1);
        let lam = if d > 1 { 0.5 * (lw[j] - lw[j - 1]) } else { 0.0 };
        for a in 0..p {
            let theta = 2.0 * PI * (a as f64 + 0.3) / p as f64;
            for b in 0..p {
                let chi = 2.0 * PI * (b as f64 + 0.1) / p as f64;
                let (w, z) = if strip {
                    (C64::new(lam, theta + chi), C64::new(lam, theta - chi))
                } else {
                    (C64::from_polar(lam.exp(), theta + chi), C64::from_polar(lam.exp(), theta - chi))
                };
                let k = if strip { leaf.kernel(w + z) } else { leaf.kernel(w * z) };
                samples[a * p + b] = f(w, z) * k;
            }
        }
        let fmax = samples.iter().fold(0.0f64, |m, v| m.max(v.norm()));
        let es = (s as i64 + 2 * sp.offset) as f64;
        // theta-mode es, then chi-modes for every split m + n = s
        let theta_row: Vec<C64> = (0..p)
            .map(|b| {
                (0..p)
                    .map(|a| samples[a * p + b] * C64::from_polar(1.0, -es * 2.0 * PI * (a as f64 + 0.3) / p as f64))
                    .sum::<C64>()
            })
            .collect();
        for m in s.saturating_sub(d - 1)..=s.min(d - 1) {
            let n = s - m;
            let dd = (sp.exponent(m) - sp.exponent(n)) as f64;
            let c: C64 = (0..p)
                .map(|b| theta_row[b] * C64::from_polar(1.0, -dd * 2.0 * PI * (b as f64 + 0.1) / p as f64))
                .sum::<C64>()
                / (p * p) as f64;
            // a_mn rho^(m+n) = c
            if c.norm() > 64.0 * f64::EPSILON * fmax {
                tt[(m, n)] = c * (-es * lam + 0.5 * (lw[m] + lw[n])).exp();
            }
        }
    }
    Ok(leaf.from_orthonormal(tt))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::models;
    use crate::wick::Leaf;

    #[test]
    fn unity_symbol_is_identity() {
        let leaf = Leaf::new(&models::sphere(6), 0).unwrap();
        let g = Arc::new(leaf.grid(16, 16, (-1.0, 1.0)));
        let one = SymbolField::sample(&g, |_| C64::new(1.0, 0.0));
        let op = wick_operator_from_symbol(&leaf, &one).unwrap();
        assert!(op.sub(&WickOperator::identity(leaf.space())).max_abs() < 1e-10);
    }

    #[test]
    fn coarse_grid_is_rejected() {
        let leaf = Leaf::new(&models::sphere(6), 0).unwrap();
        let g = Arc::new(leaf.grid(5, 16, (-1.0, 1.0)));
        let one = SymbolField::sample(&g, |_| C64::new(1.0, 0.0));
        assert_eq!(wick_operator_from_symbol(&leaf, &one).unwrap_err().code(), "ILL_CONDITIONED");
    }

    #[test]
    fn sphere_level_one_x3() {
        let leaf = Leaf::new(&models::sphere(1), 0).unwrap();
        let g = Arc::new(leaf.grid(8, 8, (-1.0, 1.0)));
        let x3 = SymbolField::sample(&g, |z| C64::new(Leaf::sphere_point(z)[2], 0.0));
        let op = wick_operator_from_symbol(&leaf, &x3).unwrap();
        let [_, _, x3_hat] = leaf.ops.sphere_coordinates();
        assert!(op.sub(&x3_hat).max_abs() < 1e-12);
        assert!((op.matrix[(0, 0)].re + 1.0).abs() < 1e-12 && (op.matrix[(1, 1)].re - 1.0).abs() < 1e-12);
    }

    #[test]
    fn round_trip_low_degree() {
        let leaf = Leaf::new(&models::sphere(8), 0).unwrap();
        let g = Arc::new(leaf.grid(24, 24, (-1.0, 1.0)));
        let psi = SymbolField::sample(&g, |z| {
            let x = Leaf::sphere_point(z);
            C64::new(x[0] * x[2] - 0.3 * x[1] * x[1] + x[2].powi(3), 0.7 * x[0] * x[1] * x[2])
        });
        let op = wick_operator_from_symbol(&leaf, &psi).unwrap();
        let back = symbol_from_operator(&leaf, &op, &g);
        assert!(back.max_abs_diff(&psi) < 1e-8, "{}", back.max_abs_diff(&psi));
    }

    #[test]
    fn extension_reproduces_coordinates() {
        let leaf = Leaf::new(&models::sphere(12), 0).unwrap();
        let xs = leaf.ops.sphere_coordinates();
        let x3 = wick_operator_from_extension(&leaf, &|w, z| (w * z - 1.0) / (w * z + 1.0)).unwrap();
        assert!(x3.sub(&xs[2]).max_abs() < 1e-10, "{}", x3.sub(&xs[2]).max_abs());
        // xi_1 + i xi_2 = -2z/(1+wz)
        let x12 = wick_operator_from_extension(&leaf, &|w, z| -2.0 * z / (1.0 + w * z)).unwrap();
        let expect = xs[0].add(&xs[1].scale(C64::i()));
        assert!(x12.sub(&expect).max_abs() < 1e-10, "{}", x12.sub(&expect).max_abs());
    }

    #[test]
    fn strip_extension_of_axis_operator() {
        // symbol of A is hbar + hbar theta'/theta at r = w + z (a0 = 0)
        let h = 0.7;
        let leaf = Leaf::new(&models::cylinder(1.0, 0.0, h), 12).unwrap();
        let sym = move |w: C64, z: C64| {
            let t = crate::special::theta::theta_series_derivs::<2>(w + z - h, (-h).exp()).unwrap();
            h + h * t[1] / t[0]
        };
        let a = wick_operator_from_extension(&leaf, &sym).unwrap();
        let (lo, hi) = leaf.space().interior(4);
        let diff = a.sub(&leaf.ops.a[0]);
        assert!(diff.max_abs_block(lo, hi) < 1e-8, "{}", diff.max_abs_block(lo, hi));
    }
}
