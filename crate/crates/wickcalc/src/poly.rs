//! Sparse multivariate polynomials with complex coefficients.
//!
//! Axis polynomials (rho, g, D, E, M, Casimir functions) live here. A polynomial in
//! one variable serializes as a plain ascending coefficient array.

use crate::real::{re, Cx, Real};
use num_traits::{One, Zero};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::collections::BTreeMap;
use std::ops::{Add, Mul, Neg, Sub};

#[derive(Clone, Debug, PartialEq)]
pub struct Polynomial<T: Real> {
    nvars: usize,
    terms: BTreeMap<Vec<u32>, Cx<T>>,
}

impl<T: Real> Polynomial<T> {
    pub fn zero(nvars: usize) -> Self {
        Self { nvars, terms: BTreeMap::new() }
    }

    pub fn constant(nvars: usize, c: Cx<T>) -> Self {
        let mut p = Self::zero(nvars);
        p.add_term(vec![0; nvars], c);
        p
    }

    pub fn real_constant(nvars: usize, c: T) -> Self {
        Self::constant(nvars, re(c))
    }

    /// The coordinate function `x_i`.
    pub fn var(nvars: usize, i: usize) -> Self {
        assert!(i < nvars, "variable index out of range");
        let mut e = vec![0; nvars];
        e[i] = 1;
        let mut p = Self::zero(nvars);
        p.add_term(e, Cx::one());
        p
    }

    /// Univariate polynomial from ascending real coefficients.
    pub fn from_real_coeffs(c: &[T]) -> Self {
        Self::from_coeffs(&c.iter().map(|&x| re(x)).collect::<Vec<_>>())
    }

    /// Univariate polynomial from ascending complex coefficients.
    pub fn from_coeffs(c: &[Cx<T>]) -> Self {
        let mut p = Self::zero(1);
        for (i, &ci) in c.iter().enumerate() {
            p.add_term(vec![i as u32], ci);
        }
        p
    }

    pub fn from_terms(nvars: usize, terms: impl IntoIterator<Item = (Vec<u32>, Cx<T>)>) -> Self {
        let mut p = Self::zero(nvars);
        for (e, c) in terms {
            assert_eq!(e.len(), nvars, "exponent length mismatch");
            p.add_term(e, c);
        }
        p
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<u32>, &Cx<T>)> {
        self.terms.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add_term(&mut self, e: Vec<u32>, c: Cx<T>) {
        if c.is_zero() {
            return;
        }
        let entry = self.terms.entry(e.clone()).or_insert_with(Cx::zero);
        *entry += c;
        if entry.is_zero() {
            self.terms.remove(&e);
        }
    }

    /// Total degree; zero polynomial has degree 0.
    pub fn degree(&self) -> u32 {
        self.terms.keys().map(|e| e.iter().sum()).max().unwrap_or(0)
    }

    pub fn max_abs_coeff(&self) -> T {
        self.terms.values().map(|c| c.norm()).fold(T::zero(), T::max)
    }

    /// Drops coefficients below `tol` times the largest coefficient.
    pub fn pruned(&self, tol: T) -> Self {
        let cut = tol * self.max_abs_coeff();
        Self {
            nvars: self.nvars,
            terms: self.terms.iter().filter(|(_, c)| c.norm() > cut).map(|(e, c)| (e.clone(), *c)).collect(),
        }
    }

    /// Dense ascending coefficients of a univariate polynomial.
    pub fn coeffs(&self) -> Vec<Cx<T>> {
        assert_eq!(self.nvars, 1, "coeffs() needs a univariate polynomial");
        let d = self.degree() as usize;
        let mut out = vec![Cx::zero(); if self.is_zero() { 0 } else { d + 1 }];
        for (e, c) in &self.terms {
            out[e[0] as usize] = *c;
        }
        out
    }

    pub fn eval(&self, x: &[Cx<T>]) -> Cx<T> {
        assert_eq!(x.len(), self.nvars, "argument count mismatch");
        let mut acc = Cx::zero();
        for (e, c) in &self.terms {
            let mut m = *c;
            for (xi, &k) in x.iter().zip(e) {
                m *= xi.powu(k);
            }
            acc += m;
        }
        acc
    }

    pub fn eval_real(&self, x: &[T]) -> Cx<T> {
        let xs: Vec<Cx<T>> = x.iter().map(|&v| re(v)).collect();
        self.eval(&xs)
    }

    pub fn scale(&self, s: Cx<T>) -> Self {
        let mut p = Self::zero(self.nvars);
        for (e, c) in &self.terms {
            p.add_term(e.clone(), *c * s);
        }
        p
    }

    pub fn conj(&self) -> Self {
        Self { nvars: self.nvars, terms: self.terms.iter().map(|(e, c)| (e.clone(), c.conj())).collect() }
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut out = Self::constant(self.nvars, Cx::one());
        for _ in 0..k {
            out = &out * self;
        }
        out
    }

    /// Substitutes polynomial `subs[i]` (all in a common variable set) for variable `i`.
    pub fn compose(&self, subs: &[Polynomial<T>]) -> Polynomial<T> {
        assert_eq!(subs.len(), self.nvars, "substitution count mismatch");
        let m = subs.first().map(|s| s.nvars).unwrap_or(0);
        let mut out = Polynomial::zero(m);
        for (e, c) in &self.terms {
            let mut t = Polynomial::constant(m, *c);
            for (s, &k) in subs.iter().zip(e) {
                if k > 0 {
                    t = &t * &s.pow(k);
                }
            }
            out = &out + &t;
        }
        out
    }

    /// Partial derivative in variable `i`.
    pub fn derivative(&self, i: usize) -> Self {
        let mut p = Self::zero(self.nvars);
        for (e, c) in &self.terms {
            if e[i] > 0 {
                let mut f = e.clone();
                f[i] -= 1;
                p.add_term(f, *c * T::from_usize_(e[i] as usize));
            }
        }
        p
    }

    /// Largest coefficient difference to `other`.
    pub fn distance(&self, other: &Self) -> T {
        (self - other).max_abs_coeff()
    }
}

impl<T: Real> Add for &Polynomial<T> {
    type Output = Polynomial<T>;
    fn add(self, rhs: Self) -> Polynomial<T> {
        assert_eq!(self.nvars, rhs.nvars, "variable count mismatch");
        let mut p = self.clone();
        for (e, c) in &rhs.terms {
            p.add_term(e.clone(), *c);
        }
        p
    }
}

impl<T: Real> Sub for &Polynomial<T> {
    type Output = Polynomial<T>;
    fn sub(self, rhs: Self) -> Polynomial<T> {
        self + &(-rhs)
    }
}

impl<T: Real> Neg for &Polynomial<T> {
    type Output = Polynomial<T>;
    fn neg(self) -> Polynomial<T> {
        self.scale(-Cx::one())
    }
}

impl<T: Real> Mul for &Polynomial<T> {
    type Output = Polynomial<T>;
    fn mul(self, rhs: Self) -> Polynomial<T> {
        assert_eq!(self.nvars, rhs.nvars, "variable count mismatch");
        let mut p = Polynomial::zero(self.nvars);
        for (ea, ca) in &self.terms {
            for (eb, cb) in &rhs.terms {
                let e: Vec<u32> = ea.iter().zip(eb).map(|(a, b)| a + b).collect();
                p.add_term(e, *ca * *cb);
            }
        }
        p
    }
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum Coef<T> {
    Real(T),
    Complex([T; 2]),
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum Repr<T> {
    Dense(Vec<Coef<T>>),
    Sparse { vars: usize, terms: Vec<(Vec<u32>, Coef<T>)> },
}

fn coef_out<T: Real>(c: &Cx<T>) -> Coef<T> {
    if c.im == T::zero() {
        Coef::Real(c.re)
    } else {
        Coef::Complex([c.re, c.im])
    }
}

fn coef_in<T: Real>(c: Coef<T>) -> Cx<T> {
    match c {
        Coef::Real(x) => re(x),
        Coef::Complex([a, b]) => Cx::new(a, b),
    }
}

impl<T: Real + Serialize> Serialize for Polynomial<T> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let repr = if self.nvars == 1 {
            Repr::Dense(self.coeffs().iter().map(coef_out).collect())
        } else {
            Repr::Sparse {
                vars: self.nvars,
                terms: self.terms.iter().map(|(e, c)| (e.clone(), coef_out(c))).collect(),
            }
        };
        repr.serialize(s)
    }
}

impl<'de, T: Real + DeserializeOwned> Deserialize<'de> for Polynomial<T> {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        Ok(match Repr::<T>::deserialize(d)? {
            Repr::Dense(c) => Polynomial::from_coeffs(&c.into_iter().map(coef_in).collect::<Vec<_>>()),
            Repr::Sparse { vars, terms } => {
                if terms.iter().any(|(e, _)| e.len() != vars) {
                    return Err(serde::de::Error::custom("exponent length differs from vars"));
                }
                Polynomial::from_terms(vars, terms.into_iter().map(|(e, c)| (e, coef_in(c))))
            }
        })
    }
}
