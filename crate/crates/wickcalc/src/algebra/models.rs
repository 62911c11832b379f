//! Registry of the concrete leaves handled by the workbench.

use super::{AlgebraSpec, Factorization, FlowSpec};
use crate::error::{Error, Result};
use crate::poly::Polynomial;
use crate::real::{re, Cx, Real};
use serde::{Deserialize, Serialize};
use std::fmt;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ModelKind {
    #[serde(rename = "cylinder")]
    Cylinder,
    #[serde(rename = "su11-prime")]
    Su11Prime,
    #[serde(rename = "su11-variant1")]
    Su11Variant1,
    #[serde(rename = "su11-variant2")]
    Su11Variant2,
    #[serde(rename = "su2-sphere")]
    Su2Sphere,
    #[serde(rename = "zeeman")]
    Zeeman,
}

impl ModelKind {
    /// All registered models, alphabetized by name.
    pub const ALL: [ModelKind; 6] = [
        ModelKind::Cylinder,
        ModelKind::Su11Prime,
        ModelKind::Su11Variant1,
        ModelKind::Su11Variant2,
        ModelKind::Su2Sphere,
        ModelKind::Zeeman,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Cylinder => "cylinder",
            ModelKind::Su11Prime => "su11-prime",
            ModelKind::Su11Variant1 => "su11-variant1",
            ModelKind::Su11Variant2 => "su11-variant2",
            ModelKind::Su2Sphere => "su2-sphere",
            ModelKind::Zeeman => "zeeman",
        }
    }

    pub fn from_name(name: &str) -> Result<Self> {
        Self::ALL
            .iter()
            .copied()
            .find(|k| k.name() == name)
            .ok_or_else(|| Error::UnknownModel(name.to_string()))
    }

    pub fn is_strip(self) -> bool {
        matches!(self, ModelKind::Cylinder | ModelKind::Su11Prime)
    }

    pub fn is_compact(self) -> bool {
        matches!(self, ModelKind::Su2Sphere | ModelKind::Zeeman)
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Data of a leaf with periodic (cylinder) topology: `rho - g = M conj(M)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Real + Serialize", deserialize = "T: Real + serde::de::DeserializeOwned"))]
pub struct StripData<T: Real> {
    pub a0: T,
    #[serde(rename = "M")]
    pub m: Polynomial<T>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Real + Serialize", deserialize = "T: Real + serde::de::DeserializeOwned"))]
pub enum Structure<T: Real> {
    #[serde(rename = "radial")]
    Radial(Factorization<T>),
    #[serde(rename = "strip")]
    Strip(StripData<T>),
}

/// A registered model: algebra plus the complex-structure data on one leaf.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Real + Serialize", deserialize = "T: Real + serde::de::DeserializeOwned"))]
pub struct ModelData<T: Real> {
    pub kind: ModelKind,
    pub spec: AlgebraSpec<T>,
    pub structure: Structure<T>,
    /// Named scalar parameters the model was built from (a, lambda, N, ...).
    pub params: Vec<(String, f64)>,
}

impl<T: Real> ModelData<T> {
    pub fn hbar(&self) -> T {
        self.spec.hbar
    }

    pub fn factorization(&self) -> Option<&Factorization<T>> {
        match &self.structure {
            Structure::Radial(f) => Some(f),
            Structure::Strip(_) => None,
        }
    }

    pub fn strip(&self) -> Option<&StripData<T>> {
        match &self.structure {
            Structure::Strip(s) => Some(s),
            Structure::Radial(_) => None,
        }
    }

    pub fn param(&self, name: &str) -> Option<f64> {
        self.params.iter().find(|(k, _)| k == name).map(|(_, v)| *v)
    }

    /// Value of the Casimir element `rho(A) - C B` on the leaf.
    pub fn casimir_value(&self) -> Cx<T> {
        match &self.structure {
            Structure::Radial(f) => self.spec.rho.eval_real(&f.vacuum),
            Structure::Strip(s) => {
                let m = s.m.eval_real(&[s.a0]);
                self.spec.rho.eval_real(&[s.a0]) - re(m.norm_sqr())
            }
        }
    }

    /// Rebuilds a compact model at level `n` using the family's quantization rule.
    pub fn quantize_level(&self, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::NoSolution("level 0 gives a one-dimensional space".into()));
        }
        match self.kind {
            ModelKind::Su2Sphere => Ok(sphere(n)),
            ModelKind::Zeeman => {
                let a2 = T::c(self.param("a2").unwrap_or(1.0));
                Ok(zeeman(n, a2, self.hbar()))
            }
            k => Err(Error::NoSolution(format!("{k} is not compact"))),
        }
    }
}

fn c<T: Real>(x: f64) -> Cx<T> {
    re(T::c(x))
}

fn upoly<T: Real>(coeffs: &[T]) -> Polynomial<T> {
    Polynomial::from_real_coeffs(coeffs)
}

/// Unit sphere in su(2)*, written as `rho = -A^2` with `A = x3 + hbar/2`; `hbar = 2/N`.
pub fn sphere<T: Real>(n: usize) -> ModelData<T> {
    assert!(n >= 1, "sphere level must be positive");
    let hbar = T::c(2.0) / T::from_usize_(n);
    let a = -(T::from_usize_(n + 1)) * hbar / T::c(2.0);
    let spec = AlgebraSpec {
        model: ModelKind::Su2Sphere.name().into(),
        flow: FlowSpec::translation(),
        rho: upoly(&[T::zero(), T::zero(), -T::one()]),
        hbar,
    };
    let fact = Factorization {
        g: Polynomial::real_constant(1, -a * a),
        d: upoly(&[-a, -T::one()]),
        e: upoly(&[-a, T::one()]),
        vacuum: vec![a],
        polar: Some(vec![-a]),
        t_star: Some(-a - a),
        level: Some(n),
    };
    ModelData {
        kind: ModelKind::Su2Sphere,
        spec,
        structure: Structure::Radial(fact),
        params: vec![("N".into(), n as f64)],
    }
}

fn su11_spec<T: Real>(kind: ModelKind, hbar: T) -> AlgebraSpec<T> {
    AlgebraSpec {
        model: kind.name().into(),
        flow: FlowSpec::translation(),
        rho: upoly(&[T::zero(), T::zero(), T::one()]),
        hbar,
    }
}

/// Upper sheet of `A^2 - BC = a^2` with `D = A + a`, `E = A - a` (disk chart).
pub fn su11_variant1<T: Real>(a: T, hbar: T) -> ModelData<T> {
    let fact = Factorization {
        g: Polynomial::real_constant(1, a * a),
        d: upoly(&[a, T::one()]),
        e: upoly(&[-a, T::one()]),
        vacuum: vec![a],
        polar: None,
        t_star: None,
        level: None,
    };
    ModelData {
        kind: ModelKind::Su11Variant1,
        spec: su11_spec(ModelKind::Su11Variant1, hbar),
        structure: Structure::Radial(fact),
        params: vec![("a".into(), a.f64())],
    }
}

/// Same leaf with `D = 1`, `E = A^2 - a^2` (full-plane chart, Bessel kernel).
pub fn su11_variant2<T: Real>(a: T, hbar: T) -> ModelData<T> {
    let fact = Factorization {
        g: Polynomial::real_constant(1, a * a),
        d: upoly(&[T::one()]),
        e: upoly(&[-a * a, T::zero(), T::one()]),
        vacuum: vec![a],
        polar: None,
        t_star: None,
        level: None,
    };
    ModelData {
        kind: ModelKind::Su11Variant2,
        spec: su11_spec(ModelKind::Su11Variant2, hbar),
        structure: Structure::Radial(fact),
        params: vec![("a".into(), a.f64())],
    }
}

/// Roots `t_+ >= t_-` of the Zeeman polar quadratic.
pub fn zeeman_roots<T: Real>(a1: T, a2: T) -> (T, T) {
    let half = T::c(0.5);
    let s = (a1 * a1 + T::c(8.0) * a2).sqrt();
    (half * a1.abs() + half * s, half * a1.abs() - half * s)
}

/// Zeeman quadratic algebra, `rho = A2^2`, at level `n` (`a1 = -(n+1) hbar`).
pub fn zeeman<T: Real>(n: usize, a2: T, hbar: T) -> ModelData<T> {
    zeeman_with_vacuum(-T::from_usize_(n + 1) * hbar, a2, hbar)
}

/// Zeeman algebra with an arbitrary vacuum `(a1, a2)`, `a1 < 0 < a2`.
pub fn zeeman_with_vacuum<T: Real>(a1: T, a2: T, hbar: T) -> ModelData<T> {
    let (tp, _) = zeeman_roots(a1, a2);
    let half = T::c(0.5);
    let x1 = Polynomial::<T>::var(2, 0);
    let x2 = Polynomial::<T>::var(2, 1);
    let cst = |v: T| Polynomial::real_constant(2, v);
    let kappa = &(&x1 * &x1) + &x2.scale(c(4.0));
    let g = (&kappa - &cst(tp * tp)).scale(re(tp * tp / T::c(4.0)));
    let shift = -a2 + half * tp * a1;
    let d = &(&x2 + &x1.scale(re(half * tp))) + &cst(shift);
    let e = &(&x2 - &x1.scale(re(half * tp))) + &cst(shift);
    let t_star = a1.abs();
    let q = t_star / hbar - T::one();
    let level = if (q - q.round()).abs() < T::c(1e-9) && q.round() >= T::one() { q.round().to_usize() } else { None };
    let spec = AlgebraSpec {
        model: ModelKind::Zeeman.name().into(),
        flow: FlowSpec::zeeman(),
        rho: &x2 * &x2,
        hbar,
    };
    let fact = Factorization {
        g,
        d,
        e,
        vacuum: vec![a1, a2],
        polar: Some(vec![-a1, a2]),
        t_star: Some(t_star),
        level,
    };
    ModelData {
        kind: ModelKind::Zeeman,
        spec,
        structure: Structure::Radial(fact),
        params: vec![("a1".into(), a1.f64()), ("a2".into(), a2.f64())],
    }
}

/// One-sheet hyperboloid `BC - A^2 = lambda^2` with `M(A) = A - i lambda`, `a0 = 0`.
pub fn su11_prime<T: Real>(lambda: T, hbar: T) -> ModelData<T> {
    ModelData {
        kind: ModelKind::Su11Prime,
        spec: su11_spec(ModelKind::Su11Prime, hbar),
        structure: Structure::Strip(StripData {
            a0: T::zero(),
            m: Polynomial::from_coeffs(&[Cx::new(T::zero(), -lambda), Cx::new(T::one(), T::zero())]),
        }),
        params: vec![("lambda".into(), lambda.f64())],
    }
}

/// Flat cylinder `B C = mu^2` with `rho = 0`: `[C,B] = 0`, `CA = (A + hbar) C`.
pub fn cylinder<T: Real>(mu: T, a0: T, hbar: T) -> ModelData<T> {
    ModelData {
        kind: ModelKind::Cylinder,
        spec: AlgebraSpec {
            model: ModelKind::Cylinder.name().into(),
            flow: FlowSpec::translation(),
            rho: Polynomial::zero(1),
            hbar,
        },
        structure: Structure::Strip(StripData { a0, m: Polynomial::real_constant(1, mu) }),
        params: vec![("mu".into(), mu.f64()), ("a0".into(), a0.f64())],
    }
}
