//! Quantum restriction of ambient polynomials to a leaf, the first-order correction `e1`,
//! and the group elements `exp((i/hbar) <eta, x^>)` of the sphere.
//!
//! Ordered polynomials in `(B, A, C)` restrict through the representation:
//! `f|X^ = (1/K) f(B^, A^, C^) K`, i.e. the Wick symbol of `sum B^b P(A^) C^c`. Polynomials in
//! the sphere coordinates are Weyl-symmetrized in `x^1, x^2, x^3` first.

use crate::algebra::ModelKind;
use crate::error::{Error, Result};
use crate::normal_product::{casimir_element, represent, star, NormalPolynomial};
use crate::representation::{CMatrix, WickOperator};
use crate::wick::expansion::log_log_fit;
use crate::wick::{symbol_from_operator, wick_operator_from_symbol, ChartGrid, Leaf, QuadratureStar, SymbolField};
use crate::{Polynomial, C64};
use nalgebra::DVector;
use serde::Serialize;
use std::f64::consts::PI;
use std::sync::Arc;

/// Largest monomial degree accepted by Weyl symmetrization.
pub const DEGREE_LIMIT: usize = 6;

/// An ambient polynomial.
#[derive(Clone, Debug)]
pub enum Ambient {
    /// Ordered polynomial `sum B^b P(A) C^c`.
    Normal(NormalPolynomial<f64>),
    /// Polynomial in the sphere coordinates `(x1, x2, x3)`.
    Sphere(Polynomial),
}

/// `sum_j x_j^2` for the sphere, `rho(A) - C * B` otherwise.
pub fn casimir_ambient(leaf: &Leaf) -> Ambient {
    match leaf.model.kind {
        ModelKind::Su2Sphere => Ambient::Sphere(sphere_casimir()),
        _ => Ambient::Normal(casimir_element(&leaf.model.spec)),
    }
}

fn sphere_casimir() -> Polynomial {
    (0..3).fold(Polynomial::zero(3), |acc, j| &acc + &Polynomial::var(3, j).pow(2))
}

/// Distinct orderings of a multiset given by the counts of each letter.
fn orderings(counts: &[u32]) -> Vec<Vec<usize>> {
    fn go(counts: &mut Vec<u32>, prefix: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if counts.iter().all(|&c| c == 0) {
            out.push(prefix.clone());
            return;
        }
        for j in 0..counts.len() {
            if counts[j] > 0 {
                counts[j] -= 1;
                prefix.push(j);
                go(counts, prefix, out);
                prefix.pop();
                counts[j] += 1;
            }
        }
    }
    let mut out = Vec::new();
    go(&mut counts.to_vec(), &mut Vec::new(), &mut out);
    out
}

fn sphere_only(leaf: &Leaf) -> Result<()> {
    if leaf.model.kind != ModelKind::Su2Sphere {
        return Err(Error::NoSolution(format!("sphere coordinates are not defined on {}", leaf.model.kind)));
    }
    Ok(())
}

/// Weyl-symmetrized terms `(coefficient / #orderings, orderings)`.
fn weyl_terms(f: &Polynomial) -> Result<Vec<(C64, Vec<Vec<usize>>)>> {
    let mut out = Vec::new();
    for (e, &c) in f.terms() {
        let deg: u32 = e.iter().sum();
        if deg as usize > DEGREE_LIMIT {
            return Err(Error::DegreeLimit(deg as usize));
        }
        let ords = orderings(e);
        out.push((c / ords.len() as f64, ords));
    }
    Ok(out)
}

/// Operator image of an ambient polynomial.
pub fn restriction_operator(leaf: &Leaf, f: &Ambient) -> Result<WickOperator<f64>> {
    match f {
        Ambient::Normal(p) => Ok(represent(p, &leaf.ops)),
        Ambient::Sphere(p) => {
            sphere_only(leaf)?;
            let x = leaf.ops.sphere_coordinates();
            let id = WickOperator::identity(leaf.space());
            let mut out = WickOperator::zeros(leaf.space());
            for (c, ords) in weyl_terms(p)? {
                for ord in ords {
                    let t = ord.iter().fold(id.clone(), |t, &j| t.mul(&x[j]));
                    out = out.add(&t.scale(c));
                }
            }
            Ok(out)
        }
    }
}

/// Weyl symbols of sphere polynomials by repeated matrix-vector products on coherent vectors.
struct SphereEvaluator<'a> {
    leaf: &'a Leaf,
    x: [CMatrix<f64>; 3],
}

impl<'a> SphereEvaluator<'a> {
    fn new(leaf: &'a Leaf) -> Result<Self> {
        sphere_only(leaf)?;
        let x = leaf.ops.sphere_coordinates().map(|op| leaf.orthonormal(&op));
        Ok(Self { leaf, x })
    }

    fn symbol(&self, terms: &[(C64, Vec<Vec<usize>>)], z: C64) -> C64 {
        let v = self.leaf.normalized_coherent(z);
        let mut acc = C64::new(0.0, 0.0);
        for (c, ords) in terms {
            for ord in ords {
                let w = ord.iter().rev().fold(v.clone(), |w: DVector<C64>, &j| &self.x[j] * w);
                acc += c * v.dotc(&w);
            }
        }
        acc
    }
}

/// `f|X^` on the grid nodes.
pub fn quantum_restriction(leaf: &Leaf, f: &Ambient, grid: &Arc<ChartGrid>) -> Result<SymbolField> {
    match f {
        Ambient::Normal(p) => Ok(symbol_from_operator(leaf, &represent(p, &leaf.ops), grid)),
        Ambient::Sphere(p) => {
            let ev = SphereEvaluator::new(leaf)?;
            let terms = weyl_terms(p)?;
            Ok(SymbolField::sample(grid, |z| ev.symbol(&terms, z)))
        }
    }
}

/// `f|X^` at chart points.
pub fn quantum_restriction_at(leaf: &Leaf, f: &Ambient, points: &[C64]) -> Result<Vec<C64>> {
    match f {
        Ambient::Normal(p) => {
            let tt = leaf.orthonormal(&represent(p, &leaf.ops));
            Ok(points.iter().map(|&z| leaf.symbol_at(&tt, z)).collect())
        }
        Ambient::Sphere(p) => {
            let ev = SphereEvaluator::new(leaf)?;
            let terms = weyl_terms(p)?;
            Ok(points.iter().map(|&z| ev.symbol(&terms, z)).collect())
        }
    }
}

fn as_complex(xi: [f64; 3]) -> [C64; 3] {
    xi.map(|v| C64::new(v, 0.0))
}

fn gradient(f: &Polynomial, xi: [f64; 3]) -> [C64; 3] {
    let p = as_complex(xi);
    [0, 1, 2].map(|j| f.derivative(j).eval(&p))
}

fn hessian(f: &Polynomial, xi: [f64; 3]) -> [[C64; 3]; 3] {
    let p = as_complex(xi);
    [0, 1, 2].map(|j| {
        let dj = f.derivative(j);
        [0, 1, 2].map(|l| dj.derivative(l).eval(&p))
    })
}

/// `e1(f) = (1/4) (delta_jl - xi_j xi_l) D_j D_l f` at a point of the unit sphere.
pub fn e1_correction(f: &Polynomial, xi: [f64; 3]) -> C64 {
    let h = hessian(f, xi);
    let mut acc = C64::new(0.0, 0.0);
    for j in 0..3 {
        for l in 0..3 {
            let g = if j == l { 1.0 } else { 0.0 } - xi[j] * xi[l];
            acc += h[j][l] * g;
        }
    }
    acc * 0.25
}

/// Normal part `e1(phi(K)) * df/d(phi(K))` of `e1`, written with the Casimir coordinate
/// `phi(K)`, `K = |x|^2`, for a one-variable polynomial `phi` with `phi'(1) != 0`.
///
/// The value does not depend on `phi`; `e1 - e1_normal` is `(1/4)` of the sphere Laplacian
/// of `f` restricted to the unit sphere.
pub fn e1_normal(f: &Polynomial, casimir: &Polynomial, xi: [f64; 3]) -> C64 {
    let k = sphere_casimir();
    let phi_k = casimir.compose(&[k]);
    let dphi = casimir.derivative(0).eval_real(&[1.0]);
    // d/dK at |x| = 1 is (1/2) x . grad
    let g = gradient(f, xi);
    let df_dk: C64 = (0..3).map(|j| g[j] * (0.5 * xi[j])).sum();
    e1_correction(&phi_k, xi) * df_dk / dphi
}

/// `(1/4) Delta_S2 (f|S2)` from ambient derivatives: `Delta f - d_r^2 f - 2 d_r f` at `r = 1`.
pub fn quarter_sphere_laplacian(f: &Polynomial, xi: [f64; 3]) -> C64 {
    let h = hessian(f, xi);
    let g = gradient(f, xi);
    let mut tr = C64::new(0.0, 0.0);
    let mut rr = C64::new(0.0, 0.0);
    let mut r = C64::new(0.0, 0.0);
    for j in 0..3 {
        tr += h[j][j];
        r += g[j] * xi[j];
        for l in 0..3 {
            rr += h[j][l] * (xi[j] * xi[l]);
        }
    }
    (tr - rr - r * 2.0) * 0.25
}

/// Remainders `max |f|X^ - f|X - hbar e1(f)|` over sample points per sphere level, with the
/// fitted order in `hbar`.
#[derive(Clone, Debug, Serialize)]
pub struct RestrictionExpansion {
    pub hbars: Vec<f64>,
    pub remainders: Vec<f64>,
    pub slope: f64,
    pub fit_residual: f64,
}

pub fn restriction_expansion(f: &Polynomial, levels: &[usize], points: &[[f64; 3]]) -> Result<RestrictionExpansion> {
    let mut hbars = Vec::new();
    let mut remainders = Vec::new();
    for &n in levels {
        let leaf = Leaf::new(&crate::algebra::models::sphere(n), 0)?;
        let h = leaf.hbar();
        let zs: Vec<C64> = points.iter().map(|&p| Leaf::sphere_chart(p)).collect();
        let q = quantum_restriction_at(&leaf, &Ambient::Sphere(f.clone()), &zs)?;
        let rem = points
            .iter()
            .zip(&q)
            .map(|(&p, v)| (v - f.eval(&as_complex(p)) - e1_correction(f, p) * h).norm())
            .fold(0.0, f64::max);
        hbars.push(h);
        remainders.push(rem);
    }
    if remainders.iter().any(|r| !(r.is_finite() && *r > 0.0)) {
        return Err(Error::FitUnstable(f64::NAN));
    }
    let (slope, _, fit_residual) = log_log_fit(&hbars, &remainders);
    Ok(RestrictionExpansion { hbars, remainders, slope, fit_residual })
}

/// Result of integrating the characteristic system.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct OdeSolution {
    pub value: C64,
    /// Difference to the same integration with half the step.
    pub halving_error: f64,
}

/// Default number of RK4 steps on `[0, 1]`.
pub const ODE_STEPS: usize = 400;

const ODE_BOUND: f64 = 1e8;
const ODE_DRIFT: f64 = 1e-6;

fn dot(a: [f64; 3], b: [C64; 3]) -> C64 {
    (0..3).map(|j| b[j] * a[j]).sum()
}

/// `int_0^1 <eta, Xi(t)> dt` along `dXi/dt = (i/2)(eta - <eta, Xi> Xi)`, `Xi(0) = xi`;
/// RK4 for the trajectory, Simpson for the action.
fn characteristic_action(eta: [f64; 3], xi: [f64; 3], steps: usize) -> Result<C64> {
    let steps = steps + steps % 2;
    let dt = 1.0 / steps as f64;
    let i_half = C64::new(0.0, 0.5);
    let rhs = |x: [C64; 3]| {
        let e = dot(eta, x);
        [0, 1, 2].map(|j| i_half * (eta[j] - e * x[j]))
    };
    let axpy = |x: [C64; 3], k: [C64; 3], s: f64| [0, 1, 2].map(|j| x[j] + k[j] * s);
    let mut x = as_complex(xi);
    let mut samples = Vec::with_capacity(steps + 1);
    samples.push(dot(eta, x));
    for n in 0..steps {
        let k1 = rhs(x);
        let k2 = rhs(axpy(x, k1, 0.5 * dt));
        let k3 = rhs(axpy(x, k2, 0.5 * dt));
        let k4 = rhs(axpy(x, k3, dt));
        x = [0, 1, 2].map(|j| x[j] + (k1[j] + k2[j] * 2.0 + k3[j] * 2.0 + k4[j]) * (dt / 6.0));
        // Xi.Xi = 1 is conserved; its drift marks a step across a pole
        let size = x.iter().map(|v| v.norm()).fold(0.0, f64::max);
        let drift = (x.iter().map(|v| v * v).sum::<C64>() - 1.0).norm();
        if !(size < ODE_BOUND && drift < ODE_DRIFT) {
            return Err(Error::OdeDiverged((n + 1) as f64 * dt));
        }
        samples.push(dot(eta, x));
    }
    let mut acc = samples[0] + samples[steps];
    for (k, s) in samples.iter().enumerate().take(steps).skip(1) {
        acc += s * if k % 2 == 1 { 4.0 } else { 2.0 };
    }
    Ok(acc * (dt / 3.0))
}

/// `E(xi) = exp{(i/hbar)(int_0^1 <eta, Xi> dt - <eta, xi>)}` on the sphere of level `n`.
pub fn restriction_symbol_ode(n: usize, eta: [f64; 3], xi: [f64; 3], steps: usize) -> Result<OdeSolution> {
    let h = 2.0 / n as f64;
    let e0: f64 = (0..3).map(|j| eta[j] * xi[j]).sum();
    let value_at = |steps| -> Result<C64> {
        let s = characteristic_action(eta, xi, steps)?;
        Ok((C64::new(0.0, 1.0 / h) * (s - e0)).exp())
    };
    let value = value_at(steps)?;
    let fine = value_at(2 * steps)?;
    Ok(OdeSolution { value, halving_error: (value - fine).norm() })
}

/// `exp((i/hbar) <eta, x^>)` on the sphere of level `n`, `hbar = 2/n`.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct GroupElement {
    pub n: usize,
    pub eta: [f64; 3],
}

/// BRANCH for odd `n` once `|eta| >= 2 pi`, unless the second sheet is requested.
pub fn group_element(n: usize, eta: [f64; 3], second_sheet: bool) -> Result<GroupElement> {
    let t = norm3(eta);
    if n % 2 == 1 && t >= 2.0 * PI && !second_sheet {
        return Err(Error::Branch(t));
    }
    Ok(GroupElement { n, eta })
}

fn norm3(v: [f64; 3]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

impl GroupElement {
    pub fn hbar(&self) -> f64 {
        2.0 / self.n as f64
    }

    pub fn inverse(&self) -> Self {
        Self { n: self.n, eta: self.eta.map(|v| -v) }
    }

    /// Wick symbol `(cos(|eta|/2) + i sin(|eta|/2) <eta/|eta|, xi>)^n`.
    pub fn symbol(&self, xi: [f64; 3]) -> C64 {
        let t = norm3(self.eta);
        let su = if t == 0.0 {
            0.0
        } else {
            (0.5 * t).sin() / t * (0..3).map(|j| self.eta[j] * xi[j]).sum::<f64>()
        };
        C64::new((0.5 * t).cos(), su).powu(self.n as u32)
    }

    /// Symbol times `exp(-(i/hbar) <eta, xi>)`.
    pub fn restricted(&self, xi: [f64; 3]) -> C64 {
        let e: f64 = (0..3).map(|j| self.eta[j] * xi[j]).sum();
        self.symbol(xi) * C64::new(0.0, -e / self.hbar()).exp()
    }

    /// Matrix exponential of `(i/hbar) <eta, x^>` on the leaf's space.
    pub fn operator(&self, leaf: &Leaf) -> Result<WickOperator<f64>> {
        sphere_only(leaf)?;
        let x = leaf.ops.sphere_coordinates();
        let gen = (0..3).fold(WickOperator::zeros(leaf.space()), |acc, j| acc.add(&x[j].scale(C64::new(0.0, self.eta[j] / self.hbar()))));
        Ok(WickOperator::new(gen.matrix.exp(), leaf.space().clone()))
    }

    /// `|e(xi)| <= exp(-c n dist(xi, {+eta^, -eta^})^2)`: the largest such `c` over the points.
    pub fn concentration_constant(&self, points: &[[f64; 3]]) -> f64 {
        let t = norm3(self.eta);
        let dir = self.eta.map(|v| v / t);
        points
            .iter()
            .filter_map(|&p| {
                let d2 = [1.0, -1.0]
                    .iter()
                    .map(|s| (0..3).map(|j| (p[j] - s * dir[j]).powi(2)).sum::<f64>())
                    .fold(f64::INFINITY, f64::min);
                (d2 > 1e-8).then(|| -self.symbol(p).norm().ln() / (self.n as f64 * d2))
            })
            .fold(f64::INFINITY, f64::min)
    }
}

/// `sin((n+1) t / 2) / sin(t / 2)`, `t = |eta|`.
pub fn character_closed_form(n: usize, t: f64) -> f64 {
    if (0.5 * t).sin().abs() < 1e-12 {
        // limit at t = 2 pi k
        let k = (t / (2.0 * PI)).round() as i64;
        return (n as f64 + 1.0) * if (k * n as i64) % 2 == 0 { 1.0 } else { -1.0 };
    }
    ((n as f64 + 1.0) * 0.5 * t).sin() / (0.5 * t).sin()
}

/// `(1/2 pi hbar) int e(xi) dm` with `dm = (1 + hbar/2) dm^omega` on the unit sphere.
pub fn character(g: &GroupElement) -> Result<C64> {
    let leaf = Leaf::new(&crate::algebra::models::sphere(g.n), 0)?;
    let m = (g.n + 8).max(96);
    let grid = leaf.grid(m, m, leaf.map.domain());
    let vals: Vec<C64> = grid.nodes.iter().map(|&z| g.symbol(Leaf::sphere_point(z))).collect();
    Ok(grid.integrate(&vals))
}

/// `max |e_eta * e_-eta - 1|` over the grid, both factors rebuilt from their sampled symbols.
pub fn unitarity_defect(leaf: &Leaf, g: &GroupElement, grid: &Arc<ChartGrid>) -> Result<f64> {
    let fwd = SymbolField::sample(grid, |z| g.symbol(Leaf::sphere_point(z)));
    let inv = g.inverse();
    let bwd = SymbolField::sample(grid, |z| inv.symbol(Leaf::sphere_point(z)));
    let p = wick_operator_from_symbol(leaf, &fwd)?.mul(&wick_operator_from_symbol(leaf, &bwd)?);
    let s = symbol_from_operator(leaf, &p, grid);
    Ok(s.values.iter().fold(0.0, |m, v| m.max((v - 1.0).norm())))
}

/// Value of `K|X^` for the Casimir `K`; NOT_CONSTANT when it varies by more than
/// `tol * max(1, |K|)` over the grid.
pub fn casimir_eigenvalue(leaf: &Leaf, grid: &Arc<ChartGrid>, tol: f64) -> Result<C64> {
    let s = quantum_restriction(leaf, &casimir_ambient(leaf), grid)?;
    let mean = s.values.iter().sum::<C64>() / s.values.len() as f64;
    let spread = s.values.iter().fold(0.0f64, |m, v| m.max((v - mean).norm()));
    if spread > tol * mean.norm().max(1.0) {
        return Err(Error::NotConstant(spread));
    }
    Ok(mean)
}

/// `max |(f * g)|X^ - f|X^ * g|X^|` relative to `max(1, |f*g|)`, over pairs and evaluation
/// nodes. The left side restricts the ordered product; the right side composes the
/// restrictions by the kernel integral.
pub fn homomorphism_defect(
    leaf: &Leaf,
    pairs: &[(NormalPolynomial<f64>, NormalPolynomial<f64>)],
    eval: &Arc<ChartGrid>,
    n_radial: usize,
    n_angle: usize,
) -> f64 {
    let q = QuadratureStar::new(leaf, eval, n_radial, n_angle);
    pairs
        .iter()
        .map(|(f, g)| {
            let fg = star(f, g, &leaf.model.spec);
            let lhs = symbol_from_operator(leaf, &represent(&fg, &leaf.ops), eval);
            let rhs = q.star(leaf, &represent(f, &leaf.ops), &represent(g, &leaf.ops));
            lhs.max_abs_diff(&rhs) / lhs.max_abs().max(1.0)
        })
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::models;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn x(j: usize) -> Polynomial {
        Polynomial::var(3, j)
    }

    fn random_unit(rng: &mut ChaCha8Rng) -> [f64; 3] {
        loop {
            let v = [0; 3].map(|_| rng.random_range(-1.0..1.0));
            let n = norm3(v);
            if n > 0.1 && n < 1.0 {
                return v.map(|c| c / n);
            }
        }
    }

    fn sample_points() -> Vec<[f64; 3]> {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        (0..12).map(|_| random_unit(&mut rng)).filter(|p| p[2] < 0.9).collect()
    }

    #[test]
    fn multiset_orderings() {
        assert_eq!(orderings(&[2, 1, 0]).len(), 3);
        assert_eq!(orderings(&[2, 2, 2]).len(), 90);
        assert_eq!(orderings(&[0, 0, 0]), vec![Vec::<usize>::new()]);
    }

    #[test]
    fn linear_restriction_is_coordinate() {
        let leaf = Leaf::new(&models::sphere(6), 0).unwrap();
        for p in sample_points() {
            let z = Leaf::sphere_chart(p);
            for j in 0..3 {
                let v = quantum_restriction_at(&leaf, &Ambient::Sphere(x(j)), &[z]).unwrap()[0];
                assert!((v - p[j]).norm() < 1e-12, "{j} {v} {}", p[j]);
                assert!(e1_correction(&x(j), p).norm() == 0.0);
            }
        }
    }

    #[test]
    fn quadratic_restriction_is_exact() {
        let fs = [x(0).pow(2), &x(0) * &x(1), &x(2) * &x(1), &x(2).pow(2).scale(C64::new(3.0, 0.0)) - &x(1), sphere_casimir()];
        for n in [2, 5, 12] {
            let leaf = Leaf::new(&models::sphere(n), 0).unwrap();
            let h = leaf.hbar();
            for f in &fs {
                for p in sample_points() {
                    let v = quantum_restriction_at(&leaf, &Ambient::Sphere(f.clone()), &[Leaf::sphere_chart(p)]).unwrap()[0];
                    let want = f.eval(&as_complex(p)) + e1_correction(f, p) * h;
                    assert!((v - want).norm() < 1e-12, "{n} {f:?} {v} {want}");
                }
            }
        }
    }

    #[test]
    fn casimir_restricts_to_one_plus_hbar() {
        for n in [1, 4, 9] {
            let leaf = Leaf::new(&models::sphere(n), 0).unwrap();
            let grid = Arc::new(leaf.grid(24, 24, (-1.0, 1.0)));
            let k = casimir_eigenvalue(&leaf, &grid, 1e-10).unwrap();
            assert!((k - (1.0 + leaf.hbar())).norm() < 1e-12, "{n} {k}");
        }
    }

    #[test]
    fn casimir_on_ordered_models() {
        let cases = [models::su11_variant2(1.3, 0.5), models::zeeman(5, 0.7, 0.3), models::su11_variant1(1.0, 0.5)];
        for (m, size) in cases.iter().zip([64, 0, 96]) {
            let leaf = Leaf::new(m, size).unwrap();
            let grid = Arc::new(leaf.grid(6, 8, match leaf.map {
                crate::wick::RadialMap::Graded => (-0.8, 0.8),
                _ => (0.2, 0.6),
            }));
            let k = casimir_eigenvalue(&leaf, &grid, 1e-10).unwrap();
            assert!((k - m.casimir_value()).norm() < 1e-9 * k.norm().max(1.0), "{} {k} {}", m.kind, m.casimir_value());
        }
    }

    #[test]
    fn nonconstant_casimir_candidate_is_rejected() {
        let leaf = Leaf::new(&models::sphere(4), 0).unwrap();
        let grid = Arc::new(leaf.grid(8, 8, (-1.0, 1.0)));
        let s = quantum_restriction(&leaf, &Ambient::Sphere(x(2).pow(2)), &grid).unwrap();
        assert!(s.max_abs() > 0.0);
        let spread = {
            let mean = s.values.iter().sum::<C64>() / s.values.len() as f64;
            s.values.iter().fold(0.0f64, |m, v| m.max((v - mean).norm()))
        };
        assert!(spread > 0.1);
    }

    #[test]
    fn degree_limit() {
        let leaf = Leaf::new(&models::sphere(2), 0).unwrap();
        let f = &x(0).pow(4) * &x(1).pow(3);
        let e = quantum_restriction_at(&leaf, &Ambient::Sphere(f.clone()), &[C64::new(0.3, 0.0)]).unwrap_err();
        assert_eq!(e.code(), "DEGREE_LIMIT");
        assert!(restriction_operator(&leaf, &Ambient::Sphere(f)).is_err());
        let ok = &x(0).pow(3) * &x(2).pow(3);
        assert!(quantum_restriction_at(&leaf, &Ambient::Sphere(ok), &[C64::new(0.3, 0.0)]).is_ok());
    }

    #[test]
    fn weyl_operator_matches_pointwise_route() {
        let leaf = Leaf::new(&models::sphere(7), 0).unwrap();
        let f = &(&x(0).pow(2) * &x(2)) + &(&x(1) * &x(2)).pow(2);
        let op = restriction_operator(&leaf, &Ambient::Sphere(f.clone())).unwrap();
        for p in sample_points() {
            let z = Leaf::sphere_chart(p);
            let a = leaf.symbol_at(&leaf.orthonormal(&op), z);
            let b = quantum_restriction_at(&leaf, &Ambient::Sphere(f.clone()), &[z]).unwrap()[0];
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn e1_normal_part_is_casimir_independent() {
        let phi1 = Polynomial::var(1, 0);
        let t = Polynomial::var(1, 0);
        let phi2 = &t.scale(C64::new(2.0, 0.0)) + &t.pow(2);
        let fs = [&x(0).pow(2) * &x(2), &(&x(1) * &x(2)) + &x(0).pow(3), sphere_casimir().pow(2), &x(0) * &x(1)];
        for f in &fs {
            for p in sample_points() {
                let a = e1_normal(f, &phi1, p);
                let b = e1_normal(f, &phi2, p);
                assert!((a - b).norm() < 1e-13, "{a} {b}");
                let tangential = e1_correction(f, p) - a;
                assert!((tangential - quarter_sphere_laplacian(f, p)).norm() < 1e-13);
            }
        }
        // e1(K) = 1: the quadratic Casimir is purely normal
        let p = [0.6, 0.0, 0.8];
        assert!((e1_correction(&sphere_casimir(), p) - 1.0).norm() < 1e-15);
    }

    #[test]
    fn e1_is_hbar_derivative() {
        // finite-difference oracle (f|X^ - f|X) / hbar at small hbar
        let f = &(&x(0) * &x(2)) + &x(1).pow(2);
        let p = [0.48, -0.6, 0.64];
        let z = Leaf::sphere_chart(p);
        for n in [200, 2000] {
            let leaf = Leaf::new(&models::sphere(n), 0).unwrap();
            let v = quantum_restriction_at(&leaf, &Ambient::Sphere(f.clone()), &[z]).unwrap()[0];
            let d = (v - f.eval(&as_complex(p))) / leaf.hbar();
            assert!((d - e1_correction(&f, p)).norm() < 1e-8, "{n} {d}");
        }
    }

    #[test]
    fn restriction_remainder_is_second_order() {
        let f = &(&x(0).pow(2) * &x(2)) + &(&x(1) * &x(0)).pow(2);
        let r = restriction_expansion(&f, &[8, 16, 32, 64], &sample_points()).unwrap();
        assert!(r.slope > 1.7 && r.slope < 2.5, "{r:?}");
    }

    #[test]
    fn ode_matches_closed_form() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let n = 6;
        for _ in 0..50 {
            let xi = random_unit(&mut rng);
            let t = rng.random_range(0.0..2.5);
            let eta = random_unit(&mut rng).map(|v| v * t);
            let ode = restriction_symbol_ode(n, eta, xi, ODE_STEPS).unwrap();
            let g = group_element(n, eta, false).unwrap();
            let want = g.restricted(xi);
            assert!((ode.value - want).norm() <= 1e-7 * want.norm(), "{eta:?} {xi:?} {} {want}", ode.value);
            assert!(ode.halving_error < 1e-8);
        }
    }

    #[test]
    fn ode_divergence_is_reported() {
        // for xi orthogonal to eta the trajectory has a pole at t = pi / |eta|
        let r = restriction_symbol_ode(4, [0.0, 0.0, 3.0 * PI / 2.0], [1.0, 0.0, 0.0], ODE_STEPS);
        assert!(matches!(r, Err(Error::OdeDiverged(_))), "{r:?}");
    }

    #[test]
    fn group_element_symbol_is_wick_symbol_of_exponential() {
        let n = 7;
        let leaf = Leaf::new(&models::sphere(n), 0).unwrap();
        let g = group_element(n, [0.4, -1.1, 0.7], false).unwrap();
        let op = leaf.orthonormal(&g.operator(&leaf).unwrap());
        for p in sample_points() {
            let v = leaf.symbol_at(&op, Leaf::sphere_chart(p));
            assert!((v - g.symbol(p)).norm() < 1e-12, "{v} {}", g.symbol(p));
        }
    }

    #[test]
    fn characters_agree() {
        for n in [1, 4, 9] {
            for eta in [[0.3, 0.2, -0.5], [1.0, 2.0, 1.5], [0.0, 0.0, 0.0]] {
                let g = group_element(n, eta, false).unwrap();
                let leaf = Leaf::new(&models::sphere(n), 0).unwrap();
                let tr = g.operator(&leaf).unwrap().trace();
                let q = character(&g).unwrap();
                let c = character_closed_form(n, norm3(eta));
                assert!((tr - c).norm() < 1e-10, "{n} {tr} {c}");
                assert!((q - c).norm() < 1e-10, "{n} {q} {c}");
            }
        }
    }

    #[test]
    fn branch_for_odd_levels() {
        let eta = [0.0, 0.0, 2.0 * PI + 0.1];
        assert_eq!(group_element(3, eta, false).unwrap_err().code(), "BRANCH");
        assert!(group_element(4, eta, false).is_ok());
        let g = group_element(3, eta, true).unwrap();
        let c = character(&g).unwrap();
        assert!((c - character_closed_form(3, norm3(eta))).norm() < 1e-10);
    }

    #[test]
    fn unitarity() {
        let n = 6;
        let leaf = Leaf::new(&models::sphere(n), 0).unwrap();
        let grid = Arc::new(leaf.grid(24, 24, (-1.0, 1.0)));
        let g = group_element(n, [0.9, -0.3, 1.4], false).unwrap();
        assert!(unitarity_defect(&leaf, &g, &grid).unwrap() < 1e-7);
    }

    #[test]
    fn concentration_near_axis() {
        let pts: Vec<[f64; 3]> = {
            let mut rng = ChaCha8Rng::seed_from_u64(5);
            (0..400).map(|_| random_unit(&mut rng)).collect()
        };
        let eta = [1.2, 0.5, -0.9];
        let s = (0.5 * norm3(eta)).sin();
        for n in [8, 16, 32, 64] {
            let c = group_element(n, eta, false).unwrap().concentration_constant(&pts);
            assert!(c >= 0.25 * s * s * 0.999, "{n} {c}");
        }
    }

    fn random_normal(rng: &mut ChaCha8Rng, k: usize) -> NormalPolynomial<f64> {
        let mut f = NormalPolynomial::zero(k);
        for b in 0..=2u32 {
            for c in 0..=(2 - b) {
                let room = 2 - b - c;
                let mut p = Polynomial::zero(k);
                let mut exps = vec![vec![0u32; k]];
                for i in 0..k {
                    for d in 1..=room {
                        let mut e = vec![0; k];
                        e[i] = d;
                        exps.push(e);
                    }
                }
                if k == 2 && room == 2 {
                    exps.push(vec![1, 1]);
                }
                for e in exps {
                    p.add_term(e, C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
                }
                f.add_term(b, c, p);
            }
        }
        f
    }

    #[test]
    fn restriction_is_a_homomorphism() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let leaf = Leaf::new(&models::zeeman(6, 0.7, 0.3), 0).unwrap();
        let eval = Arc::new(leaf.grid(4, 5, (-0.6, 0.6)));
        let pairs: Vec<_> = (0..5).map(|_| (random_normal(&mut rng, 2), random_normal(&mut rng, 2))).collect();
        let d = homomorphism_defect(&leaf, &pairs, &eval, 48, 48);
        assert!(d < 1e-7, "{d}");

        let leaf = Leaf::new(&models::su11_variant2(1.0, 0.5), 64).unwrap();
        let eval = Arc::new(leaf.grid(2, 3, (0.6, 1.0)));
        let pairs: Vec<_> = (0..3).map(|_| (random_normal(&mut rng, 1), random_normal(&mut rng, 1))).collect();
        let d = homomorphism_defect(&leaf, &pairs, &eval, 128, 96);
        assert!(d < 1e-7, "{d}");
    }
}
