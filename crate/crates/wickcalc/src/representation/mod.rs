//! Truncated spaces of antiholomorphic sections and the matrices of `A`, `B`, `C` on them.
//!
//! Matrices act on coefficient columns: entry `(m, n)` is the `b_m` component of `T b_n`,
//! with basis `b_n = zbar^n` (radial) or `e^(n zbar)` (strip) and `<b_m, b_n> = delta_mn w_n`.

use crate::algebra::{ModelData, ModelKind, Structure};
use crate::error::{Error, Result};
use crate::real::{re, Cx, Real};
use crate::special::{solve_kernel, Chart, KernelFunction};
use nalgebra::DMatrix;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use std::sync::Arc;

pub type CMatrix<T> = DMatrix<Cx<T>>;

/// Default distance from the truncation edge below which relations are not checked.
pub const DEFAULT_MARGIN: usize = 2;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Real + Serialize", deserialize = "T: Real + serde::de::DeserializeOwned"))]
pub struct RepSpace<T: Real> {
    pub model: ModelKind,
    pub chart: Chart,
    /// Exponent of the first basis vector (`0` radial, `-M` strip).
    pub offset: i64,
    pub weights: Vec<T>,
    pub log_weights: Vec<T>,
    pub hbar: T,
    /// The space is the whole representation (no truncation edge).
    pub exact: bool,
    pub kernel: KernelFunction<T>,
}

impl<T: Real> RepSpace<T> {
    pub fn dim(&self) -> usize {
        self.weights.len()
    }

    /// Exponent `n` of basis vector `i`.
    pub fn exponent(&self, i: usize) -> i64 {
        i as i64 + self.offset
    }

    /// Index range `[lo, hi)` at distance `>= margin` from truncation edges.
    pub fn interior(&self, margin: usize) -> (usize, usize) {
        let d = self.dim();
        if self.exact {
            return (0, d);
        }
        let hi = d.saturating_sub(margin);
        let lo = if self.chart == Chart::Strip { margin.min(hi) } else { 0 };
        (lo, hi)
    }

    /// `w_n / w_m` computed from log-weights.
    pub fn weight_ratio(&self, n: usize, m: usize) -> T {
        (self.log_weights[n] - self.log_weights[m]).exp()
    }
}

/// Space for `model`: `size` is the truncated dimension (radial, ignored when compact) or
/// the strip half-width `M` (basis `n = -M..M`).
pub fn build_space<T: Real>(model: &ModelData<T>, size: usize) -> Result<RepSpace<T>> {
    let (kernel, exact) = match &model.structure {
        Structure::Strip(_) => (solve_kernel(model, size)?, false),
        Structure::Radial(f) => match f.level {
            Some(_) => (solve_kernel(model, 0)?, true),
            None => (solve_kernel(model, size.max(1) - 1)?, false),
        },
    };
    let log_weights: Vec<T> = kernel.log_coeffs.iter().map(|l| -*l).collect();
    Ok(RepSpace {
        model: model.kind,
        chart: kernel.chart,
        offset: kernel.offset,
        weights: log_weights.iter().map(|l| l.exp()).collect(),
        log_weights,
        hbar: model.hbar(),
        exact,
        kernel,
    })
}

/// Dense operator on a [`RepSpace`].
#[derive(Clone, Debug)]
pub struct WickOperator<T: Real> {
    pub matrix: CMatrix<T>,
    pub space: Arc<RepSpace<T>>,
}

impl<T: Real> WickOperator<T> {
    pub fn new(matrix: CMatrix<T>, space: Arc<RepSpace<T>>) -> Self {
        assert_eq!(matrix.nrows(), space.dim());
        Self { matrix, space }
    }

    pub fn zeros(space: &Arc<RepSpace<T>>) -> Self {
        let d = space.dim();
        Self::new(CMatrix::from_element(d, d, Cx::zero()), space.clone())
    }

    pub fn identity(space: &Arc<RepSpace<T>>) -> Self {
        let d = space.dim();
        Self::new(CMatrix::from_fn(d, d, |i, j| if i == j { Cx::one() } else { Cx::zero() }), space.clone())
    }

    pub fn diagonal(space: &Arc<RepSpace<T>>, f: impl Fn(usize) -> Cx<T>) -> Self {
        let d = space.dim();
        Self::new(CMatrix::from_fn(d, d, |i, j| if i == j { f(i) } else { Cx::zero() }), space.clone())
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// Adjoint for `<b_m, b_n> = delta_mn w_n`: `(T*)_mn = conj(T_nm) w_n / w_m`.
    pub fn adjoint(&self) -> Self {
        let s = &self.space;
        let d = self.dim();
        let m = CMatrix::from_fn(d, d, |i, j| {
            let t = self.matrix[(j, i)];
            if t.is_zero() {
                t
            } else {
                t.conj() * s.weight_ratio(j, i)
            }
        });
        Self::new(m, s.clone())
    }

    pub fn mul(&self, other: &Self) -> Self {
        Self::new(&self.matrix * &other.matrix, self.space.clone())
    }

    pub fn add(&self, other: &Self) -> Self {
        Self::new(&self.matrix + &other.matrix, self.space.clone())
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self::new(&self.matrix - &other.matrix, self.space.clone())
    }

    pub fn scale(&self, c: Cx<T>) -> Self {
        Self::new(self.matrix.map(|x| x * c), self.space.clone())
    }

    /// `[self, other]`.
    pub fn commutator(&self, other: &Self) -> Self {
        self.mul(other).sub(&other.mul(self))
    }

    /// `self other + other self`.
    pub fn anticommutator(&self, other: &Self) -> Self {
        self.mul(other).add(&other.mul(self))
    }

    pub fn trace(&self) -> Cx<T> {
        self.matrix.diagonal().iter().fold(Cx::zero(), |a, b| a + *b)
    }

    /// Largest entry modulus on the block `[lo, hi) x [lo, hi)`.
    pub fn max_abs_block(&self, lo: usize, hi: usize) -> T {
        let mut m = T::zero();
        for i in lo..hi {
            for j in lo..hi {
                m = m.max(self.matrix[(i, j)].norm());
            }
        }
        m
    }

    pub fn max_abs(&self) -> T {
        self.max_abs_block(0, self.dim())
    }

    /// Scalar value on the interior block, or NOT_SCALAR if off-diagonal entries or the
    /// spread of the diagonal exceed `tol` relative to the diagonal size.
    pub fn scalar_value(&self, margin: usize, tol: T) -> Result<Cx<T>> {
        let (lo, hi) = self.space.interior(margin);
        if hi <= lo {
            return Err(Error::NotScalar(f64::NAN));
        }
        let diag: Vec<Cx<T>> = (lo..hi).map(|i| self.matrix[(i, i)]).collect();
        let n = T::from_usize_(diag.len());
        let mean = diag.iter().fold(Cx::zero(), |a, b| a + *b) / n;
        let scale = mean.norm().max(T::one());
        let mut spread = T::zero();
        for i in lo..hi {
            for j in lo..hi {
                let target = if i == j { mean } else { Cx::zero() };
                spread = spread.max((self.matrix[(i, j)] - target).norm());
            }
        }
        if spread > tol * scale {
            return Err(Error::NotScalar(spread.f64()));
        }
        Ok(mean)
    }
}

impl WickOperator<f64> {
    /// All entries as `row,col,re,im` with 10 significant digits.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("row,col,re,im\n");
        for i in 0..self.dim() {
            for j in 0..self.dim() {
                let z = self.matrix[(i, j)];
                s.push_str(&format!("{i},{j},{:.9e},{:.9e}\n", z.re, z.im));
            }
        }
        s
    }

    pub fn to_json(&self) -> serde_json::Value {
        let d = self.dim();
        let part = |f: fn(&Cx<f64>) -> f64| -> Vec<Vec<f64>> {
            (0..d).map(|i| (0..d).map(|j| f(&self.matrix[(i, j)])).collect()).collect()
        };
        serde_json::json!({
            "model": self.space.model.name(),
            "dim": d,
            "offset": self.space.offset,
            "re": part(|z| z.re),
            "im": part(|z| z.im),
        })
    }
}

/// `A_1..A_k`, `B`, `C` on a common space, with the axis values behind the diagonal `A_i`.
#[derive(Clone, Debug)]
pub struct Operators<T: Real> {
    pub space: Arc<RepSpace<T>>,
    pub a: Vec<WickOperator<T>>,
    pub b: WickOperator<T>,
    pub c: WickOperator<T>,
    /// `axis[i]` is the point `gamma^{hbar(n+1)}(a)` that `A` takes on basis vector `i`.
    pub axis: Vec<Vec<T>>,
}

/// Builds `A`, `B`, `C` by their action on basis vectors.
///
/// Radial: `A b_n = gamma^{hbar(n+1)}(a) b_n`, `B b_n = D(hbar(n+1)) b_{n+1}`,
/// `C b_n = E(hbar n) b_{n-1}`. Strip: `A e^n = (a0 + hbar(n+1)) e^n`,
/// `B e^n = M(a0 + hbar(n+1)) e^{-hbar(n+1)} e^{n+1}`, `C e^n = conj(M)(a0 + hbar n) e^{hbar n} e^{n-1}`.
pub fn build_operators<T: Real>(model: &ModelData<T>, space: RepSpace<T>) -> Operators<T> {
    let space = Arc::new(space);
    let d = space.dim();
    let h = model.hbar();
    let mut b = CMatrix::from_element(d, d, Cx::zero());
    let mut c = CMatrix::from_element(d, d, Cx::zero());
    let axis: Vec<Vec<T>>;
    match &model.structure {
        Structure::Radial(f) => {
            axis = (0..d).map(|i| model.spec.flow.apply(h * T::from_usize_(i + 1), &f.vacuum)).collect();
            for i in 0..d {
                if i + 1 < d {
                    b[(i + 1, i)] = f.script_d(&model.spec, h * T::from_usize_(i + 1));
                }
                if i > 0 {
                    c[(i - 1, i)] = f.script_e(&model.spec, h * T::from_usize_(i));
                }
            }
        }
        Structure::Strip(s) => {
            axis = (0..d).map(|i| vec![s.a0 + h * T::from_i64_(space.exponent(i) + 1)]).collect();
            for i in 0..d {
                let n = T::from_i64_(space.exponent(i));
                if i + 1 < d {
                    let t = h * (n + T::one());
                    b[(i + 1, i)] = s.m.eval_real(&[s.a0 + t]) * (-t).exp();
                }
                if i > 0 {
                    let t = h * n;
                    c[(i - 1, i)] = s.m.eval_real(&[s.a0 + t]).conj() * t.exp();
                }
            }
        }
    }
    let k = axis[0].len();
    let a = (0..k).map(|j| WickOperator::diagonal(&space, |i| re(axis[i][j]))).collect();
    Operators { b: WickOperator::new(b, space.clone()), c: WickOperator::new(c, space.clone()), a, axis, space }
}

/// Convenience: space and operators for `model` at truncation `size`.
pub fn build<T: Real>(model: &ModelData<T>, size: usize) -> Result<Operators<T>> {
    Ok(build_operators(model, build_space(model, size)?))
}

impl<T: Real> Operators<T> {
    /// Diagonal operator `p(A)` for a polynomial in the axis variables.
    pub fn function_of_a(&self, p: &crate::poly::Polynomial<T>) -> WickOperator<T> {
        WickOperator::diagonal(&self.space, |i| p.eval_real(&self.axis[i]))
    }

    /// Sphere coordinates `x3 = A - hbar/2`, `x1 = -(B+C)/2`, `x2 = (B-C)/(2i)`.
    pub fn sphere_coordinates(&self) -> [WickOperator<T>; 3] {
        let half = re(T::c(0.5));
        let h = self.space.hbar;
        let x3 = self.a[0].sub(&WickOperator::identity(&self.space).scale(re(h / T::c(2.0))));
        let x1 = self.b.add(&self.c).scale(-half);
        let x2 = self.b.sub(&self.c).scale(Cx::new(T::zero(), -half.re));
        [x1, x2, x3]
    }

    /// Zeeman generators `S0 = A1 - hbar`, `S1 = (B+C)/2`, `S2 = (B-C)/(2i)`,
    /// `S3 = A2 + (hbar/2) A1 - hbar^2/2`.
    pub fn zeeman_generators(&self) -> [WickOperator<T>; 4] {
        let h = self.space.hbar;
        let half = T::c(0.5);
        let id = WickOperator::identity(&self.space);
        let s0 = self.a[0].sub(&id.scale(re(h)));
        let s1 = self.b.add(&self.c).scale(re(half));
        let s2 = self.b.sub(&self.c).scale(Cx::new(T::zero(), -half));
        let s3 = self.a[1].add(&self.a[0].scale(re(half * h))).sub(&id.scale(re(half * h * h)));
        [s0, s1, s2, s3]
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RelationResidual {
    pub name: String,
    /// Largest interior entry of the relation, relative to the largest entry of its terms
    /// (at least 1).
    pub residual: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ResidualReport {
    pub model: String,
    pub dim: usize,
    pub margin: usize,
    pub relations: Vec<RelationResidual>,
}

impl ResidualReport {
    pub fn max(&self) -> f64 {
        self.relations.iter().map(|r| r.residual).fold(0.0, f64::max)
    }

    /// TRUNCATION_UNSOUND if any relation exceeds `tol`.
    pub fn require(&self, tol: f64) -> Result<()> {
        match self.relations.iter().enumerate().find(|(_, r)| !(r.residual <= tol)) {
            Some((i, r)) => Err(Error::TruncationUnsound { residual: r.residual, index: i }),
            None => Ok(()),
        }
    }
}

fn relative_residual<T: Real>(lhs: &WickOperator<T>, rhs: &WickOperator<T>, lo: usize, hi: usize) -> f64 {
    let scale = lhs.max_abs_block(lo, hi).max(rhs.max_abs_block(lo, hi)).max(T::one());
    (lhs.sub(rhs).max_abs_block(lo, hi) / scale).f64()
}

/// Residuals of the permutation relations on the interior block, plus the model-specific list
/// (su(2) brackets for the sphere, the six quadratic relations for Zeeman).
pub fn verify_relations<T: Real>(model: &ModelData<T>, ops: &Operators<T>, margin: usize) -> ResidualReport {
    let (lo, hi) = ops.space.interior(margin);
    let mut rel = Vec::new();
    let mut push = |name: &str, lhs: WickOperator<T>, rhs: WickOperator<T>| {
        rel.push(RelationResidual { name: name.into(), residual: relative_residual(&lhs, &rhs, lo, hi) });
    };
    let lambda = ops.function_of_a(&model.spec.lambda_poly());
    push("[C,B] = lambda(A)", ops.c.commutator(&ops.b), lambda);
    let shifted = model.spec.flow.at(model.hbar());
    for (j, aj) in ops.a.iter().enumerate() {
        let g = ops.function_of_a(&shifted[j]);
        push(&format!("C A{} = gamma(A){} C", j + 1, j + 1), ops.c.mul(aj), g.mul(&ops.c));
    }
    push("C = B*", ops.c.clone(), ops.b.adjoint());
    match model.kind {
        ModelKind::Su2Sphere => {
            let [x1, x2, x3] = ops.sphere_coordinates();
            let h = model.hbar();
            let i_over_h = Cx::new(T::zero(), T::one() / h);
            push("(i/h)[x1,x2] = x3", x1.commutator(&x2).scale(i_over_h), x3.clone());
            push("(i/h)[x2,x3] = x1", x2.commutator(&x3).scale(i_over_h), x1.clone());
            push("(i/h)[x3,x1] = x2", x3.commutator(&x1).scale(i_over_h), x2.clone());
            for (k, x) in [x1, x2, x3].iter().enumerate() {
                push(&format!("x{} = x{}*", k + 1, k + 1), x.clone(), x.adjoint());
            }
        }
        ModelKind::Zeeman => {
            let [s0, s1, s2, s3] = ops.zeeman_generators();
            let h = model.hbar();
            let ih2 = Cx::new(T::zero(), h / T::c(2.0));
            let ih = Cx::new(T::zero(), h * T::c(2.0));
            push("[S1,S2] = (ih/2){S0,S3}", s1.commutator(&s2), s0.anticommutator(&s3).scale(ih2));
            push("[S0,S1] = 2ih S2", s0.commutator(&s1), s2.scale(ih));
            push("[S2,S3] = -(ih/2){S0,S1}", s2.commutator(&s3), s0.anticommutator(&s1).scale(-ih2));
            push("[S0,S2] = -2ih S1", s0.commutator(&s2), s1.scale(-ih));
            push("[S3,S1] = -(ih/2){S0,S2}", s3.commutator(&s1), s0.anticommutator(&s2).scale(-ih2));
            push("[S0,S3] = 0", s0.commutator(&s3), WickOperator::zeros(&ops.space));
        }
        _ => {}
    }
    ResidualReport { model: model.kind.name().into(), dim: ops.space.dim(), margin, relations: rel }
}

/// `sum (x^j)^2` for the sphere, `rho(A) - C B` otherwise.
pub fn casimir_matrix<T: Real>(model: &ModelData<T>, ops: &Operators<T>) -> WickOperator<T> {
    if model.kind == ModelKind::Su2Sphere {
        let [x1, x2, x3] = ops.sphere_coordinates();
        return x1.mul(&x1).add(&x2.mul(&x2)).add(&x3.mul(&x3));
    }
    ops.function_of_a(&model.spec.rho).sub(&ops.c.mul(&ops.b))
}

/// Scalar value of [`casimir_matrix`] on the interior, NOT_SCALAR otherwise.
pub fn casimir_value<T: Real>(model: &ModelData<T>, ops: &Operators<T>, margin: usize, tol: T) -> Result<Cx<T>> {
    casimir_matrix(model, ops).scalar_value(margin, tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::models;

    #[test]
    fn sphere_level_one() {
        let m = models::sphere::<f64>(1);
        let ops = build(&m, 0).unwrap();
        assert_eq!(ops.space.dim(), 2);
        let [_, _, x3] = ops.sphere_coordinates();
        assert!((x3.matrix[(0, 0)].re + 1.0).abs() < 1e-15);
        assert!((x3.matrix[(1, 1)].re - 1.0).abs() < 1e-15);
        let k = casimir_value(&m, &ops, 0, 1e-12).unwrap();
        assert!((k.re - 3.0).abs() < 1e-12);
    }

    #[test]
    fn sphere_relations_exact() {
        for n in [1, 2, 7, 16, 32] {
            let m = models::sphere::<f64>(n);
            let ops = build(&m, 0).unwrap();
            let rep = verify_relations(&m, &ops, 0);
            assert!(rep.max() < 1e-12, "N={n} {rep:?}");
            let k = casimir_value(&m, &ops, 0, 1e-12).unwrap();
            assert!((k.re - (1.0 + m.hbar())).abs() < 1e-12);
        }
    }

    #[test]
    fn sphere_in_single_precision() {
        let m = models::sphere::<f32>(6);
        let ops = build(&m, 0).unwrap();
        assert!(verify_relations(&m, &ops, 0).max() < 1e-5);
    }

    #[test]
    fn variant2_weights_and_lowering() {
        let m = models::su11_variant2::<f64>(1.0, 0.5);
        let ops = build(&m, 64).unwrap();
        assert_eq!(ops.space.dim(), 64);
        let mut w = 1.0;
        for j in 1..10 {
            let t = 0.5 * j as f64;
            w *= t * (2.0 + t);
            assert!((ops.space.weights[j] - w).abs() < 1e-12 * w);
        }
        assert!((ops.c.matrix[(0, 1)].re - 1.25).abs() < 1e-15);
        let rep = verify_relations(&m, &ops, DEFAULT_MARGIN);
        assert!(rep.max() < 1e-10, "{rep:?}");
        let k = casimir_value(&m, &ops, DEFAULT_MARGIN, 1e-12).unwrap();
        assert!((k.re - 1.0).abs() < 1e-10);
    }

    #[test]
    fn prime_series_casimir() {
        let m = models::su11_prime::<f64>(1.0, 1.0);
        let ops = build(&m, 16).unwrap();
        assert_eq!(ops.space.dim(), 33);
        let rep = verify_relations(&m, &ops, DEFAULT_MARGIN);
        assert!(rep.max() < 1e-10, "{rep:?}");
        let k = casimir_value(&m, &ops, DEFAULT_MARGIN, 1e-12).unwrap();
        assert!((k.re + 1.0).abs() < 1e-10 && k.im.abs() < 1e-10);
        for (i, n) in (-16..=16).enumerate() {
            assert!((ops.a[0].matrix[(i, i)].re - (n as f64 + 1.0)).abs() < 1e-15);
        }
        assert_eq!(ops.space.weights[16], 1.0);
    }

    #[test]
    fn zeeman_six_relations() {
        for n in [1, 4] {
            let m = models::zeeman::<f64>(n, 1.0, 1.0);
            let ops = build(&m, 0).unwrap();
            assert_eq!(ops.space.dim(), n + 1);
            let rep = verify_relations(&m, &ops, 0);
            assert!(rep.max() < 1e-10, "{rep:#?}");
            let k = casimir_value(&m, &ops, 0, 1e-12).unwrap();
            assert!((k.re - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn all_models_pass_relations() {
        let cases: Vec<(ModelData<f64>, usize)> = vec![
            (models::cylinder(1.0, 0.0, 1.0), 8),
            (models::su11_prime(0.7, 0.5), 12),
            (models::su11_variant1(1.0, 0.5), 40),
            (models::su11_variant2(1.0, 0.5), 40),
            (models::sphere(5), 0),
            (models::zeeman(3, 2.0, 0.5), 0),
        ];
        for (m, size) in cases {
            let ops = build(&m, size).unwrap();
            let rep = verify_relations(&m, &ops, DEFAULT_MARGIN);
            rep.require(1e-10).unwrap();
            let adj = rep.relations.iter().find(|r| r.name == "C = B*").unwrap();
            assert!(adj.residual < 1e-12, "{} {}", m.kind, adj.residual);
        }
    }

    #[test]
    fn strip_weights_are_gaussian_moments() {
        let m = models::cylinder::<f64>(1.0, 0.0, 1.0);
        let space = build_space(&m, 8).unwrap();
        for (i, w) in space.weights.iter().enumerate() {
            let n = space.exponent(i) as f64;
            assert!((w - (n * n + n).exp()).abs() < 1e-12 * w);
        }
    }

    #[test]
    fn exports() {
        let m = models::sphere::<f64>(1);
        let ops = build(&m, 0).unwrap();
        let csv = ops.b.to_csv();
        assert!(csv.starts_with("row,col,re,im\n"));
        assert_eq!(csv.lines().count(), 5);
        let j = ops.b.to_json();
        assert_eq!(j["dim"], 2);
    }
}
