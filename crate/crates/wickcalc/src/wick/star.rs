//! Star product by operator composition and by the kernel integral, and the probability
//! operator.

use super::grid::ChartGrid;
use super::symbol::{symbol_from_operator, SymbolField};
use super::Leaf;
use crate::error::{Error, Result};
use crate::representation::{CMatrix, WickOperator};
use crate::C64;
use nalgebra::{DMatrix, DVector};
use serde::Serialize;
use std::sync::Arc;

/// Symbol of `psi^ chi^`.
pub fn star_operator_route(leaf: &Leaf, psi: &WickOperator<f64>, chi: &WickOperator<f64>, grid: &Arc<ChartGrid>) -> SymbolField {
    symbol_from_operator(leaf, &psi.mul(chi), grid)
}

/// `sum_y w_y v_y v_y^H / K(y|y)` over a quadrature grid.
fn resolution(leaf: &Leaf, grid: &ChartGrid) -> CMatrix<f64> {
    let d = leaf.dim();
    let mut r = CMatrix::<f64>::zeros(d, d);
    for (&y, &w) in grid.nodes.iter().zip(&grid.weights) {
        let v = leaf.coherent(y);
        let c = w / leaf.kernel_diag(y);
        r.ger(C64::new(c, 0.0), &v, &v.conjugate(), C64::new(1.0, 0.0));
    }
    r
}

/// Largest entry of `(1/2 pi hbar) int e_y e_y^* / K(y|y) dm(y) - I` on a grid covering the leaf.
pub fn resolution_defect(leaf: &Leaf, grid: &ChartGrid) -> f64 {
    let d = leaf.dim();
    (resolution(leaf, grid) - CMatrix::<f64>::identity(d, d)).iter().fold(0.0, |m, v| m.max(v.norm()))
}

/// `max(|int psi*chi - tr(psi^ chi^)|, |int psi*chi - int chi*psi|)` with integrals
/// `(1/2 pi hbar) int . dm` on a grid covering a compact leaf.
pub fn frobenius_defect(leaf: &Leaf, psi: &WickOperator<f64>, chi: &WickOperator<f64>, grid: &Arc<ChartGrid>) -> f64 {
    let pc = star_operator_route(leaf, psi, chi, grid).integral();
    let cp = star_operator_route(leaf, chi, psi, grid).integral();
    let tr = psi.mul(chi).trace();
    (pc - tr).norm().max((pc - cp).norm())
}

/// Kernel-integral star product on a fixed evaluation grid.
///
/// `(psi * chi)(x) = (1/2 pi hbar) int psi#(x|y) chi#(y|x) p(x,y) dm(y)` with
/// `psi#(x|y) K(x|y) = <psi^ e_y, e_x>`. The resolution matrices of the integration grids
/// (one per evaluation node, shared on compact leaves) do not depend on the factors and are
/// built once.
pub struct QuadratureStar {
    pub eval: Arc<ChartGrid>,
    resolutions: Vec<CMatrix<f64>>,
    coherent: Vec<(DVector<C64>, f64)>,
}

impl QuadratureStar {
    pub fn new(leaf: &Leaf, eval: &Arc<ChartGrid>, n_radial: usize, n_angle: usize) -> Self {
        let resolutions = if leaf.map.is_compact() {
            vec![resolution(leaf, &leaf.grid(n_radial, n_angle, leaf.map.domain()))]
        } else {
            eval.nodes.iter().map(|&x| resolution(leaf, &leaf.local_grid(x, n_radial, n_angle))).collect()
        };
        let coherent = eval.nodes.iter().map(|&x| (leaf.coherent(x), leaf.kernel_diag(x))).collect();
        Self { eval: eval.clone(), resolutions, coherent }
    }

    pub fn star(&self, leaf: &Leaf, psi: &WickOperator<f64>, chi: &WickOperator<f64>) -> SymbolField {
        let ps = leaf.orthonormal(psi);
        let ch = leaf.orthonormal(chi);
        let values = self
            .coherent
            .iter()
            .enumerate()
            .map(|(i, (v, k))| {
                let r = &self.resolutions[i.min(self.resolutions.len() - 1)];
                let left = ps.adjoint() * v;
                let right = &ch * v;
                left.dotc(&(r * right)) / *k
            })
            .collect();
        SymbolField { grid: self.eval.clone(), values }
    }
}

/// One-shot [`QuadratureStar`].
pub fn star_quadrature_route(
    leaf: &Leaf,
    psi: &WickOperator<f64>,
    chi: &WickOperator<f64>,
    eval: &Arc<ChartGrid>,
    n_radial: usize,
    n_angle: usize,
) -> SymbolField {
    QuadratureStar::new(leaf, eval, n_radial, n_angle).star(leaf, psi, chi)
}

/// Largest node difference between the two routes; `QUADRATURE_RESOLUTION` beyond `tol`.
pub fn compare_routes(operator: &SymbolField, quadrature: &SymbolField, tol: f64) -> Result<f64> {
    let d = operator.max_abs_diff(quadrature);
    if d > tol {
        return Err(Error::QuadratureResolution(d));
    }
    Ok(d)
}

/// `(1/2 pi hbar) int p(x, y) dm(y)` by the grid.
pub fn probability_normalization(leaf: &Leaf, grid: &ChartGrid, x: C64) -> f64 {
    grid.nodes.iter().zip(&grid.weights).map(|(&y, &w)| w * leaf.probability(x, y)).sum()
}

/// `(P psi)(x) = (1/2 pi hbar) int p(x, y) psi(y) dm(y)` at the given points.
pub fn probability_operator_at(leaf: &Leaf, psi: &SymbolField, points: &[C64]) -> Vec<C64> {
    let g = &psi.grid;
    points
        .iter()
        .map(|&x| g.nodes.iter().zip(&g.weights).zip(&psi.values).map(|((&y, &w), v)| v * (w * leaf.probability(x, y))).sum())
        .collect()
}

/// `P psi` on every node of the symbol's grid.
pub fn probability_operator_apply(leaf: &Leaf, psi: &SymbolField) -> SymbolField {
    SymbolField { grid: psi.grid.clone(), values: probability_operator_at(leaf, psi, &psi.grid.nodes) }
}

/// `S_ij = sqrt(w_i) p(x_i, x_j) sqrt(w_j)`, the symmetric form of the discretized operator.
pub fn probability_matrix(leaf: &Leaf, grid: &ChartGrid) -> DMatrix<f64> {
    let n = grid.len();
    DMatrix::from_fn(n, n, |i, j| (grid.weights[i] * grid.weights[j]).sqrt() * leaf.probability(grid.nodes[i], grid.nodes[j]))
}

/// `(N+1)! N! / ((N+1+k)! (N-k)!)`, zero for `k > N`.
pub fn sphere_harmonic_eigenvalue(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    (1..=k).map(|j| (n + 1 - j) as f64 / (n + 1 + j) as f64).product()
}

#[derive(Clone, Debug, Serialize)]
pub struct SpectralRow {
    pub k: usize,
    pub harmonic: String,
    pub expected: f64,
    /// Largest `|P Y - lambda Y|` over the test points.
    pub error: f64,
}

fn legendre(k: usize, x: f64) -> f64 {
    let (mut p0, mut p1) = (1.0, x);
    if k == 0 {
        return p0;
    }
    for j in 1..k {
        let p2 = ((2 * j + 1) as f64 * x * p1 - j as f64 * p0) / (j + 1) as f64;
        p0 = p1;
        p1 = p2;
    }
    p1
}

/// Applies `P` on the level-`n` sphere to zonal, sectoral and tesseral harmonics of degree
/// `0..=k_max` on a 96 x 96 grid.
pub fn sphere_spectral_check(n: usize, k_max: usize) -> Result<Vec<SpectralRow>> {
    let leaf = Leaf::new(&crate::algebra::models::sphere(n), 0)?;
    let grid = Arc::new(leaf.grid(96, 96, (-1.0, 1.0)));
    let points = [C64::new(0.3, 0.1), C64::new(-0.8, 0.9), C64::new(1.7, -0.4), C64::new(0.05, -2.5)];
    let mut rows = Vec::new();
    for k in 0..=k_max {
        let mut families: Vec<(String, Box<dyn Fn([f64; 3]) -> C64>)> =
            vec![(format!("P_{k}(xi3)"), Box::new(move |x: [f64; 3]| C64::new(legendre(k, x[2]), 0.0)))];
        if k >= 1 {
            families.push((format!("(xi1+i xi2)^{k}"), Box::new(move |x: [f64; 3]| C64::new(x[0], x[1]).powi(k as i32))));
            families.push((
                format!("(xi1+i xi2)^{} xi3", k - 1),
                Box::new(move |x: [f64; 3]| C64::new(x[0], x[1]).powi(k as i32 - 1) * x[2]),
            ));
        }
        for (name, y) in families {
            let field = SymbolField::sample(&grid, |z| y(Leaf::sphere_point(z)));
            let applied = probability_operator_at(&leaf, &field, &points);
            let lam = sphere_harmonic_eigenvalue(n, k);
            let error = points.iter().zip(&applied).fold(0.0f64, |m, (&x, v)| m.max((v - y(Leaf::sphere_point(x)) * lam).norm()));
            rows.push(SpectralRow { k, harmonic: name, expected: lam, error });
        }
    }
    Ok(rows)
}
