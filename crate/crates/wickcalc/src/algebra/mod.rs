//! Surface-of-revolution algebras: deforming flows, permutation relations and the
//! factorization data that fixes a complex structure on a leaf.

pub mod models;

use crate::error::{Error, Result};
use crate::poly::Polynomial;
use crate::real::{re, Cx, Real};
use num_traits::Zero;
use serde::{Deserialize, Serialize};

pub use models::{ModelData, ModelKind, Structure, StripData};

/// Closed-form polynomial flow on the axis space.
///
/// `trajectory[i]` is a polynomial in `(t, A_1, ..., A_k)` giving the i-th component of
/// the flowed point. `invariants` are polynomials in `A` conserved by the flow.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Real + Serialize", deserialize = "T: Real + serde::de::DeserializeOwned"))]
pub struct FlowSpec<T: Real> {
    pub dim: usize,
    pub trajectory: Vec<Polynomial<T>>,
    pub invariants: Vec<Polynomial<T>>,
}

impl<T: Real> FlowSpec<T> {
    /// `A -> A + t` on the line.
    pub fn translation() -> Self {
        let t = Polynomial::var(2, 0);
        let a = Polynomial::var(2, 1);
        Self { dim: 1, trajectory: vec![&t + &a], invariants: vec![] }
    }

    /// Flow of `2 d/dA1 - A1 d/dA2`, preserving `A1^2 + 4 A2`.
    pub fn zeeman() -> Self {
        let t = Polynomial::<T>::var(3, 0);
        let a1 = Polynomial::var(3, 1);
        let a2 = Polynomial::var(3, 2);
        let c = |x: f64| re(T::c(x));
        let first = &a1 + &t.scale(c(2.0));
        let second = &(&a2 - &(&a1 * &t)) - &(&t * &t);
        let b1 = Polynomial::var(2, 0);
        let b2 = Polynomial::var(2, 1);
        let kappa = &(&b1 * &b1) + &b2.scale(c(4.0));
        Self { dim: 2, trajectory: vec![first, second], invariants: vec![kappa] }
    }

    /// The flow map at fixed time as polynomials in `A`.
    pub fn at(&self, t: T) -> Vec<Polynomial<T>> {
        let mut subs = vec![Polynomial::real_constant(self.dim, t)];
        subs.extend((0..self.dim).map(|i| Polynomial::var(self.dim, i)));
        self.trajectory.iter().map(|p| p.compose(&subs)).collect()
    }

    /// The trajectory through `a` as polynomials in `t`.
    pub fn through(&self, a: &[T]) -> Vec<Polynomial<T>> {
        let mut subs = vec![Polynomial::var(1, 0)];
        subs.extend(a.iter().map(|&ai| Polynomial::real_constant(1, ai)));
        self.trajectory.iter().map(|p| p.compose(&subs)).collect()
    }

    pub fn apply(&self, t: T, a: &[T]) -> Vec<T> {
        let mut x = vec![t];
        x.extend_from_slice(a);
        self.trajectory.iter().map(|p| p.eval_real(&x).re).collect()
    }

    /// Generator `v` of the flow, as polynomials in `A`.
    pub fn vector_field(&self) -> Vec<Polynomial<T>> {
        let mut subs = vec![Polynomial::zero(self.dim)];
        subs.extend((0..self.dim).map(|i| Polynomial::var(self.dim, i)));
        self.trajectory.iter().map(|p| p.derivative(0).compose(&subs)).collect()
    }

    /// Largest violation of `g^s(g^t(a)) = g^{s+t}(a)` over the samples.
    pub fn group_law_residual(&self, samples: &[(T, T, Vec<T>)]) -> T {
        samples
            .iter()
            .map(|(s, t, a)| {
                let lhs = self.apply(*s, &self.apply(*t, a));
                let rhs = self.apply(*s + *t, a);
                lhs.iter().zip(&rhs).map(|(x, y)| (*x - *y).abs()).fold(T::zero(), T::max)
            })
            .fold(T::zero(), T::max)
    }

    /// Largest drift of the invariants along the samples.
    pub fn invariant_residual(&self, samples: &[(T, Vec<T>)]) -> T {
        let mut worst = T::zero();
        for (t, a) in samples {
            let moved = self.apply(*t, a);
            for k in &self.invariants {
                worst = worst.max((k.eval_real(&moved) - k.eval_real(a)).norm());
            }
        }
        worst
    }
}

/// Permutation-relation data `[C,B] = lambda(A)`, `CA = gamma^hbar(A) C`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Real + Serialize", deserialize = "T: Real + serde::de::DeserializeOwned"))]
pub struct AlgebraSpec<T: Real> {
    pub model: String,
    pub flow: FlowSpec<T>,
    pub rho: Polynomial<T>,
    pub hbar: T,
}

impl<T: Real> AlgebraSpec<T> {
    pub fn dim(&self) -> usize {
        self.flow.dim
    }

    /// `p o gamma^t` as a polynomial in `A`.
    pub fn shifted(&self, p: &Polynomial<T>, t: T) -> Polynomial<T> {
        p.compose(&self.flow.at(t))
    }

    /// `lambda^hbar = rho - rho o gamma^{-hbar}` as a polynomial.
    pub fn lambda_poly(&self) -> Polynomial<T> {
        &self.rho - &self.shifted(&self.rho, -self.hbar)
    }

    pub fn lambda_h(&self, a: &[T]) -> T {
        self.lambda_poly().eval_real(a).re
    }

    /// Forward differences `Delta^k lambda`, `Delta f = f o gamma^hbar - f`, until they vanish.
    pub fn lambda_differences(&self) -> Vec<Polynomial<T>> {
        let lam = self.lambda_poly();
        let scale = lam.max_abs_coeff().max(T::one());
        let tol = T::c(1e3) * T::epsilon() * scale;
        let bound = lam.degree() as usize * self.max_flow_degree() + 2;
        let mut out = vec![lam.clone()];
        let mut cur = lam;
        for _ in 0..bound {
            let next = (&self.shifted(&cur, self.hbar) - &cur).pruned(T::zero());
            if next.max_abs_coeff() <= tol {
                break;
            }
            out.push(next.clone());
            cur = next;
        }
        out
    }

    fn max_flow_degree(&self) -> usize {
        self.flow.trajectory.iter().map(|p| p.degree() as usize).max().unwrap_or(1).max(1)
    }

    /// `Lambda^hbar(A, t) = sum_k t^k Delta^k lambda(A) / (k+1)!`.
    pub fn big_lambda_h(&self, a: &[T], t: T) -> T {
        let mut acc = T::zero();
        let mut fact = T::one();
        let mut tk = T::one();
        for (k, d) in self.lambda_differences().iter().enumerate() {
            fact *= T::from_usize_(k + 1);
            acc += tk * d.eval_real(a).re / fact;
            tk *= t;
        }
        acc
    }

    /// `v(rho)`, the classical limit of `lambda^hbar / hbar`.
    pub fn classical_lambda(&self, a: &[T]) -> T {
        let v = self.flow.vector_field();
        let mut acc = Cx::zero();
        for (i, vi) in v.iter().enumerate() {
            acc += self.rho.derivative(i).eval_real(a) * vi.eval_real(a);
        }
        acc.re
    }

    pub fn with_hbar(&self, hbar: T) -> Self {
        Self { hbar, ..self.clone() }
    }
}

/// Splitting `rho - g = D E` that fixes the complex structure `z = C / conj(D)(A)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Real + Serialize", deserialize = "T: Real + serde::de::DeserializeOwned"))]
pub struct Factorization<T: Real> {
    pub g: Polynomial<T>,
    #[serde(rename = "D")]
    pub d: Polynomial<T>,
    #[serde(rename = "E")]
    pub e: Polynomial<T>,
    pub vacuum: Vec<T>,
    pub polar: Option<Vec<T>>,
    /// `None` stands for an infinite polar time.
    pub t_star: Option<T>,
    pub level: Option<usize>,
}

impl<T: Real> Factorization<T> {
    /// `D(gamma^t(a))` as a polynomial in `t`.
    pub fn script_d_poly(&self, spec: &AlgebraSpec<T>) -> Polynomial<T> {
        self.d.compose(&spec.flow.through(&self.vacuum))
    }

    /// `E(gamma^t(a))` as a polynomial in `t`.
    pub fn script_e_poly(&self, spec: &AlgebraSpec<T>) -> Polynomial<T> {
        self.e.compose(&spec.flow.through(&self.vacuum))
    }

    pub fn script_d(&self, spec: &AlgebraSpec<T>, t: T) -> Cx<T> {
        self.d.eval_real(&spec.flow.apply(t, &self.vacuum))
    }

    pub fn script_e(&self, spec: &AlgebraSpec<T>, t: T) -> Cx<T> {
        self.e.eval_real(&spec.flow.apply(t, &self.vacuum))
    }

    /// Number of nonzero kernel coefficients beyond `c_0`, if the leaf is compact.
    pub fn degree(&self) -> Option<usize> {
        self.level
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InvariantCheck {
    pub name: String,
    pub pass: bool,
    pub residual: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ValidationReport {
    pub checks: Vec<InvariantCheck>,
    /// `None` when the polar time is infinite.
    pub t_star: Option<f64>,
    pub level: Option<usize>,
}

impl ValidationReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

/// Search window for the polar time.
#[derive(Clone, Copy, Debug)]
pub struct RootBracket<T> {
    pub t_max: T,
    pub steps: usize,
}

impl<T: Real> RootBracket<T> {
    pub fn default_for(spec: &AlgebraSpec<T>, fact: &Factorization<T>) -> Self {
        let scale = fact.vacuum.iter().fold(T::one(), |m, a| m.max(a.abs())) + spec.hbar;
        Self { t_max: T::c(100.0) * scale, steps: 20_000 }
    }
}

fn level_tol<T: Real>() -> T {
    T::c(1e-9).max(T::c(1e3) * T::epsilon())
}

/// Bisection root of `f` on `[lo, hi]` with `f(lo) > 0 >= f(hi)`.
fn bisect<T: Real>(f: impl Fn(T) -> T, mut lo: T, mut hi: T) -> T {
    let tol = T::c(1e-12).max(T::c(4.0) * T::epsilon());
    for _ in 0..200 {
        let mid = (lo + hi) / T::c(2.0);
        if hi - lo <= tol * (T::one() + mid.abs()) {
            return mid;
        }
        if f(mid) > T::zero() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    (lo + hi) / T::c(2.0)
}

/// First positive time at which `rho(gamma^t(a))` returns to `rho(a)`.
pub fn polar_time<T: Real>(spec: &AlgebraSpec<T>, a: &[T], bracket: RootBracket<T>) -> Option<T> {
    let traj = spec.flow.through(a);
    let excess = &spec.rho.compose(&traj) - &Polynomial::constant(1, spec.rho.eval_real(a));
    let f = |t: T| excess.eval_real(&[t]).re;
    let scale = excess.max_abs_coeff().max(T::epsilon());
    let h = bracket.t_max / T::from_usize_(bracket.steps);
    let mut prev = h;
    if f(prev) <= T::zero() {
        return None;
    }
    for i in 2..=bracket.steps {
        let t = h * T::from_usize_(i);
        let v = f(t);
        if v <= T::c(1e-14) * scale {
            return Some(bisect(f, prev, t));
        }
        prev = t;
    }
    None
}

/// Checks the factorization invariants and computes the polar time.
pub fn validate_factorization<T: Real>(
    spec: &AlgebraSpec<T>,
    fact: &Factorization<T>,
    bracket: RootBracket<T>,
) -> Result<ValidationReport> {
    let tol = level_tol::<T>();
    let a = &fact.vacuum;
    let traj = spec.flow.through(a);
    let de = (&fact.d * &fact.e).compose(&traj);
    let target = (&spec.rho - &fact.g).compose(&traj);
    let scale = target.max_abs_coeff().max(T::one());
    let mut checks = Vec::new();
    let mut push = |name: &str, residual: T, pass: bool| {
        checks.push(InvariantCheck { name: name.into(), pass, residual: residual.f64() })
    };

    let r_de = de.distance(&target) / scale;
    push("D*E = rho - g along trajectory", r_de, r_de <= tol);
    if r_de > tol {
        return Err(Error::InconsistentFactorization(format!("residual {:e}", r_de.f64())));
    }
    let ea = fact.e.eval_real(a).norm();
    push("E(a) = 0", ea, ea <= tol * scale);
    if ea > tol * scale {
        return Err(Error::InconsistentFactorization(format!("E(a) = {:e}", ea.f64())));
    }
    let da = fact.d.eval_real(a).norm();
    push("D(a) != 0", da, da > tol * scale);
    if da <= tol * scale {
        return Err(Error::InconsistentFactorization("D(a) vanishes".into()));
    }
    let g_drift = fact.g.compose(&traj).distance(&Polynomial::constant(1, fact.g.eval_real(a)));
    push("g invariant along trajectory", g_drift, g_drift <= tol * scale);
    let g_vac = (fact.g.eval_real(a) - spec.rho.eval_real(a)).norm();
    push("g(a) = rho(a)", g_vac, g_vac <= tol * scale);

    let t_star = polar_time(spec, a, bracket);
    let mut level = None;
    if let Some(ts) = t_star {
        let astar = spec.flow.apply(ts, a);
        let d_polar = fact.d.eval_real(&astar).norm();
        push("D(a*) = 0", d_polar, d_polar <= T::c(1e-6).max(tol) * scale);
        let q = ts / spec.hbar - T::one();
        let frac = (q - q.round()).abs();
        push("t* = (N+1) hbar", frac, frac < tol);
        if frac >= tol || q.round() < T::one() {
            return Err(Error::NonQuantizedLevel(format!("t*/hbar - 1 = {}", q.f64())));
        }
        let n = q.round().to_usize().unwrap_or(0);
        if let Some(expected) = fact.level {
            push("level matches", T::from_usize_(n.abs_diff(expected)), n == expected);
        }
        level = Some(n);
        let samples = 64;
        let mut worst = T::infinity();
        let rho_a = spec.rho.eval_real(a).re;
        for i in 1..samples {
            let t = ts * T::from_usize_(i) / T::from_usize_(samples);
            worst = worst.min(spec.rho.eval_real(&spec.flow.apply(t, a)).re - rho_a);
        }
        push("rho(gamma^t a) > rho(a) on (0, t*)", worst, worst > T::zero());
    }
    Ok(ValidationReport { checks, t_star: t_star.map(|t| t.f64()), level })
}

/// Rescales hbar so that a compact leaf with fixed vacuum reaches level `n`.
pub fn quantize_hbar<T: Real>(
    spec: &AlgebraSpec<T>,
    fact: &Factorization<T>,
    n: usize,
) -> Result<(AlgebraSpec<T>, Factorization<T>)> {
    if n == 0 {
        return Err(Error::NoSolution("level 0 gives a one-dimensional space".into()));
    }
    let ts = polar_time(spec, &fact.vacuum, RootBracket::default_for(spec, fact))
        .ok_or_else(|| Error::NoSolution("leaf is not compact".into()))?;
    let hbar = ts / T::from_usize_(n + 1);
    let mut f = fact.clone();
    f.t_star = Some(ts);
    f.level = Some(n);
    Ok((spec.with_hbar(hbar), f))
}
