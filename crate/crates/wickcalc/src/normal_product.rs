//! Normally ordered polynomials `sum B^beta P(A) C^gamma` and their product through the left
//! regular representation.

use crate::algebra::AlgebraSpec;
use crate::error::{Error, Result};
use crate::poly::Polynomial;
use crate::real::{re, Cx, Real};
use crate::representation::{Operators, WickOperator};
use std::collections::BTreeMap;
use std::fmt;

/// `terms[(beta, gamma)]` is the polynomial `P` in `A = (A_1..A_k)` of `B^beta P(A) C^gamma`.
#[derive(Clone, Debug, PartialEq)]
pub struct NormalPolynomial<T: Real> {
    pub nvars: usize,
    pub terms: BTreeMap<(u32, u32), Polynomial<T>>,
}

impl<T: Real> NormalPolynomial<T> {
    pub fn zero(nvars: usize) -> Self {
        Self { nvars, terms: BTreeMap::new() }
    }

    pub fn one(nvars: usize) -> Self {
        Self::monomial(nvars, 0, Polynomial::real_constant(nvars, T::one()), 0)
    }

    pub fn monomial(nvars: usize, beta: u32, p: Polynomial<T>, gamma: u32) -> Self {
        let mut out = Self::zero(nvars);
        out.add_term(beta, gamma, p);
        out
    }

    pub fn b(nvars: usize) -> Self {
        Self::monomial(nvars, 1, Polynomial::real_constant(nvars, T::one()), 0)
    }

    pub fn c(nvars: usize) -> Self {
        Self::monomial(nvars, 0, Polynomial::real_constant(nvars, T::one()), 1)
    }

    pub fn a(nvars: usize, i: usize) -> Self {
        Self::monomial(nvars, 0, Polynomial::var(nvars, i), 0)
    }

    pub fn from_a(p: Polynomial<T>) -> Self {
        Self::monomial(p.nvars(), 0, p, 0)
    }

    /// Every monomial `B^b A^alpha C^c` with `b + |alpha| + c <= degree`, coefficients drawn
    /// from `coeff` in a fixed order.
    pub fn dense(nvars: usize, degree: u32, mut coeff: impl FnMut() -> Cx<T>) -> Self {
        fn exponents(nvars: usize, room: u32) -> Vec<Vec<u32>> {
            if nvars == 0 {
                return vec![vec![]];
            }
            let mut out = Vec::new();
            for d in 0..=room {
                for mut rest in exponents(nvars - 1, room - d) {
                    rest.insert(0, d);
                    out.push(rest);
                }
            }
            out
        }
        let mut out = Self::zero(nvars);
        for b in 0..=degree {
            for c in 0..=(degree - b) {
                let mut p = Polynomial::zero(nvars);
                for e in exponents(nvars, degree - b - c) {
                    p.add_term(e, coeff());
                }
                out.add_term(b, c, p);
            }
        }
        out
    }

    pub fn add_term(&mut self, beta: u32, gamma: u32, p: Polynomial<T>) {
        if p.is_zero() {
            return;
        }
        let slot = self.terms.entry((beta, gamma)).or_insert_with(|| Polynomial::zero(self.nvars));
        *slot = &*slot + &p;
        if slot.is_zero() {
            self.terms.remove(&(beta, gamma));
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (&(b, c), p) in &other.terms {
            out.add_term(b, c, p.clone());
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(re(-T::one())))
    }

    pub fn scale(&self, s: Cx<T>) -> Self {
        let mut out = Self::zero(self.nvars);
        for (&(b, c), p) in &self.terms {
            out.add_term(b, c, p.scale(s));
        }
        out
    }

    /// Largest coefficient modulus.
    pub fn max_abs_coeff(&self) -> T {
        self.terms.values().fold(T::zero(), |m, p| m.max(p.max_abs_coeff()))
    }

    pub fn distance(&self, other: &Self) -> T {
        self.sub(other).max_abs_coeff()
    }

    /// Total degree counting `B`, `C` and the `A`-degree.
    pub fn degree(&self) -> u32 {
        self.terms.iter().map(|(&(b, c), p)| b + c + p.degree()).max().unwrap_or(0)
    }

    pub fn pruned(&self, tol: T) -> Self {
        let mut out = Self::zero(self.nvars);
        for (&(b, c), p) in &self.terms {
            out.add_term(b, c, p.pruned(tol));
        }
        out
    }

    /// Same coefficients read as a commutative polynomial in `(B, A_1..A_k, C)`.
    pub fn to_commutative(&self) -> Polynomial<T> {
        let k = self.nvars;
        let mut out = Polynomial::zero(k + 2);
        for (&(b, c), p) in &self.terms {
            for (e, coef) in p.terms() {
                let mut ex = vec![b];
                ex.extend(e.iter().copied());
                ex.push(c);
                out.add_term(ex, *coef);
            }
        }
        out
    }

    pub fn from_commutative(p: &Polynomial<T>) -> Self {
        let k = p.nvars() - 2;
        let mut out = Self::zero(k);
        for (e, coef) in p.terms() {
            let a = Polynomial::from_terms(k, [(e[1..=k].to_vec(), *coef)]);
            out.add_term(e[0], e[k + 1], a);
        }
        out
    }
}

/// Left multiplications by `B`, `A_i` and `C` on normal polynomials.
#[derive(Clone, Debug)]
pub struct LeftRegular<T: Real> {
    spec: AlgebraSpec<T>,
    lambda: Polynomial<T>,
}

pub fn left_regular<T: Real>(spec: &AlgebraSpec<T>) -> LeftRegular<T> {
    LeftRegular { spec: spec.clone(), lambda: spec.lambda_poly() }
}

impl<T: Real> LeftRegular<T> {
    fn shift(&self, p: &Polynomial<T>, steps: u32) -> Polynomial<T> {
        if steps == 0 {
            return p.clone();
        }
        self.spec.shifted(p, self.spec.hbar * T::from_usize_(steps as usize))
    }

    pub fn l_b(&self, g: &NormalPolynomial<T>) -> NormalPolynomial<T> {
        let mut out = NormalPolynomial::zero(g.nvars);
        for (&(b, c), p) in &g.terms {
            out.add_term(b + 1, c, p.clone());
        }
        out
    }

    /// `P(A) g`: since `A B = B gamma^hbar(A)`, `P(A) B^b = B^b P(gamma^{b hbar}(A))`.
    pub fn l_poly_a(&self, pa: &Polynomial<T>, g: &NormalPolynomial<T>) -> NormalPolynomial<T> {
        let mut out = NormalPolynomial::zero(g.nvars);
        for (&(b, c), p) in &g.terms {
            out.add_term(b, c, &self.shift(pa, b) * p);
        }
        out
    }

    pub fn l_a(&self, i: usize, g: &NormalPolynomial<T>) -> NormalPolynomial<T> {
        self.l_poly_a(&Polynomial::var(g.nvars, i), g)
    }

    /// `C B^b P C^c = B^b P(gamma^hbar) C^{c+1} + B^{b-1} S_b P C^c` with
    /// `S_b = sum_{j<b} lambda(gamma^{j hbar}(A))`.
    pub fn l_c(&self, g: &NormalPolynomial<T>) -> NormalPolynomial<T> {
        let mut out = NormalPolynomial::zero(g.nvars);
        for (&(b, c), p) in &g.terms {
            out.add_term(b, c + 1, self.shift(p, 1));
            if b > 0 {
                let mut s = Polynomial::zero(g.nvars);
                for j in 0..b {
                    s = &s + &self.shift(&self.lambda, j);
                }
                out.add_term(b - 1, c, &s * p);
            }
        }
        out
    }
}

/// `f * g = sum f_{beta,gamma}: L_B^beta P(L_A) L_C^gamma g`, applied right to left.
pub fn star<T: Real>(f: &NormalPolynomial<T>, g: &NormalPolynomial<T>, spec: &AlgebraSpec<T>) -> NormalPolynomial<T> {
    let l = left_regular(spec);
    let mut out = NormalPolynomial::zero(g.nvars);
    let max_c = f.terms.keys().map(|k| k.1).max().unwrap_or(0);
    // L_C^gamma g for every gamma in use
    let mut c_powers = vec![g.clone()];
    for _ in 0..max_c {
        let next = l.l_c(c_powers.last().expect("nonempty"));
        c_powers.push(next);
    }
    for (&(b, c), p) in &f.terms {
        let mut t = l.l_poly_a(p, &c_powers[c as usize]);
        for _ in 0..b {
            t = l.l_b(&t);
        }
        out = out.add(&t);
    }
    out
}

/// Casimir element `rho(A) - C * B` of the algebra.
pub fn casimir_element<T: Real>(spec: &AlgebraSpec<T>) -> NormalPolynomial<T> {
    let k = spec.dim();
    let cb = star(&NormalPolynomial::c(k), &NormalPolynomial::b(k), spec);
    NormalPolynomial::from_a(spec.rho.clone()).sub(&cb)
}

/// Coefficientwise `|K * f - f * K|`.
pub fn casimir_centrality<T: Real>(spec: &AlgebraSpec<T>, f: &NormalPolynomial<T>) -> T {
    let k = casimir_element(spec);
    star(&k, f, spec).distance(&star(f, &k, spec))
}

/// Classical bracket `lim (f*g - g*f)/(i hbar)` on commutative polynomials in `(B, A, C)`:
/// `{C,B} = -i v(rho)`, `{C,A_j} = -i v_j C`, `{A_j,B} = -i v_j B`.
pub fn poisson_bracket<T: Real>(spec: &AlgebraSpec<T>, f: &Polynomial<T>, g: &Polynomial<T>) -> Polynomial<T> {
    let k = spec.dim();
    let lift = |p: &Polynomial<T>| -> Polynomial<T> {
        let subs: Vec<Polynomial<T>> = (0..k).map(|i| Polynomial::var(k + 2, i + 1)).collect();
        p.compose(&subs)
    };
    let v: Vec<Polynomial<T>> = spec.flow.vector_field().iter().map(&lift).collect();
    let vrho = (0..k).fold(Polynomial::zero(k + 2), |acc, i| &acc + &(&lift(&spec.rho.derivative(i)) * &v[i]));
    let mi = Cx::new(T::zero(), -T::one());
    let bvar = Polynomial::var(k + 2, 0);
    let cvar = Polynomial::var(k + 2, k + 1);
    // brackets {x_a, x_b} for x = (B, A_1..A_k, C)
    let n = k + 2;
    let mut table = vec![vec![Polynomial::zero(n); n]; n];
    table[k + 1][0] = vrho.scale(mi);
    table[0][k + 1] = vrho.scale(-mi);
    for j in 0..k {
        let cj = (&v[j] * &cvar).scale(mi);
        table[k + 1][j + 1] = cj.clone();
        table[j + 1][k + 1] = cj.scale(re(-T::one()));
        let bj = (&v[j] * &bvar).scale(mi);
        table[j + 1][0] = bj.clone();
        table[0][j + 1] = bj.scale(re(-T::one()));
    }
    let mut out = Polynomial::zero(n);
    for a in 0..n {
        let fa = f.derivative(a);
        if fa.is_zero() {
            continue;
        }
        for b in 0..n {
            if table[a][b].is_zero() {
                continue;
            }
            out = &out + &(&(&fa * &g.derivative(b)) * &table[a][b]);
        }
    }
    out
}

/// Image `sum B^beta P(A) C^gamma` of a normal polynomial under the operator representation.
pub fn represent<T: Real>(f: &NormalPolynomial<T>, ops: &Operators<T>) -> WickOperator<T> {
    let mut out = WickOperator::zeros(&ops.space);
    let id = WickOperator::identity(&ops.space);
    for (&(b, c), p) in &f.terms {
        let mut t = ops.function_of_a(p);
        for _ in 0..b {
            t = ops.b.mul(&t);
        }
        let mut cpow = id.clone();
        for _ in 0..c {
            cpow = cpow.mul(&ops.c);
        }
        out = out.add(&t.mul(&cpow));
    }
    out
}

fn fmt_num(x: f64) -> String {
    format!("{x:?}")
}

impl<T: Real> fmt::Display for NormalPolynomial<T> {
    /// Terms `(re,im) * B^i A^(j1,...,jk) C^l` joined by ` + `; the zero polynomial is `0`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (&(b, c), p) in &self.terms {
            for (e, coef) in p.terms() {
                if !first {
                    write!(f, " + ")?;
                }
                first = false;
                let exps: Vec<String> = e.iter().map(|x| x.to_string()).collect();
                write!(
                    f,
                    "({},{}) * B^{b} A^({}) C^{c}",
                    fmt_num(coef.re.f64()),
                    fmt_num(coef.im.f64()),
                    exps.join(",")
                )?;
            }
        }
        Ok(())
    }
}

impl<T: Real> NormalPolynomial<T> {
    /// Parses the [`Display`](fmt::Display) format. A bare real number is accepted as a coefficient.
    pub fn parse(s: &str, nvars: usize) -> Result<Self> {
        let bad = |m: &str| Error::ConfigInvalid(format!("normal polynomial: {m} in '{s}'"));
        let s = s.trim();
        let mut out = Self::zero(nvars);
        if s == "0" {
            return Ok(out);
        }
        for term in s.split(" + ") {
            let (coef, mono) = term.split_once('*').ok_or_else(|| bad("missing '*'"))?;
            let coef = coef.trim();
            let z = if let Some(inner) = coef.strip_prefix('(').and_then(|c| c.strip_suffix(')')) {
                let (a, b) = inner.split_once(',').ok_or_else(|| bad("coefficient"))?;
                let a: f64 = a.trim().parse().map_err(|_| bad("coefficient"))?;
                let b: f64 = b.trim().parse().map_err(|_| bad("coefficient"))?;
                Cx::new(T::c(a), T::c(b))
            } else {
                re(T::c(coef.parse::<f64>().map_err(|_| bad("coefficient"))?))
            };
            let mut beta = 0;
            let mut gamma = 0;
            let mut alpha = vec![0u32; nvars];
            for tok in mono.split_whitespace() {
                if let Some(x) = tok.strip_prefix("B^") {
                    beta = x.parse().map_err(|_| bad("B exponent"))?;
                } else if let Some(x) = tok.strip_prefix("C^") {
                    gamma = x.parse().map_err(|_| bad("C exponent"))?;
                } else if let Some(x) = tok.strip_prefix("A^(").and_then(|x| x.strip_suffix(')')) {
                    let parts: Vec<&str> = x.split(',').collect();
                    if parts.len() != nvars {
                        return Err(bad("A exponent count"));
                    }
                    for (i, p) in parts.iter().enumerate() {
                        alpha[i] = p.trim().parse().map_err(|_| bad("A exponent"))?;
                    }
                } else {
                    return Err(bad("token"));
                }
            }
            out.add_term(beta, gamma, Polynomial::from_terms(nvars, [(alpha, z)]));
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::models;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn su11(h: f64) -> AlgebraSpec<f64> {
        models::su11_variant2::<f64>(1.0, h).spec
    }

    fn random_poly(rng: &mut ChaCha8Rng, k: usize, deg: u32) -> NormalPolynomial<f64> {
        let mut out = NormalPolynomial::zero(k);
        for _ in 0..4 {
            let b = rng.random_range(0..=deg);
            let c = rng.random_range(0..=deg - b);
            let rest = deg - b - c;
            let mut e = vec![0u32; k];
            if k > 0 && rest > 0 {
                e[rng.random_range(0..k)] = rng.random_range(0..=rest);
            }
            let z = Cx::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            out.add_term(b, c, Polynomial::from_terms(k, [(e, z)]));
        }
        out
    }

    #[test]
    fn left_regular_examples() {
        let s = su11(0.5);
        let l = left_regular(&s);
        let b = NormalPolynomial::<f64>::b(1);
        let want = NormalPolynomial::parse("(1,0) * B^1 A^(1) C^0 + (0.5,0) * B^1 A^(0) C^0", 1).unwrap();
        assert!(l.l_a(0, &b).distance(&want) < 1e-15);
        assert_eq!(l.l_b(&NormalPolynomial::one(1)), b);
        let cb = l.l_c(&b);
        let want = NormalPolynomial::parse("1 * B^1 A^(0) C^1 + 1 * B^0 A^(1) C^0 + -0.25 * B^0 A^(0) C^0", 1).unwrap();
        assert!(cb.distance(&want) < 1e-15, "{cb}");
    }

    #[test]
    fn unit_and_commutation() {
        let s = su11(0.5);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let g = random_poly(&mut rng, 1, 3);
        assert!(star(&NormalPolynomial::one(1), &g, &s).distance(&g) < 1e-15);
        assert!(star(&g, &NormalPolynomial::one(1), &s).distance(&g) < 1e-15);
        let c2 = NormalPolynomial::<f64>::c(1);
        let b = NormalPolynomial::<f64>::b(1);
        let lhs = star(&star(&c2, &c2, &s), &b, &s);
        let rhs = star(&c2, &star(&c2, &b, &s), &s);
        assert_eq!(lhs.distance(&rhs), 0.0);
    }

    #[test]
    fn associativity_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let specs = [su11(0.5), models::zeeman::<f64>(3, 1.0, 0.5).spec, models::sphere::<f64>(4).spec];
        for s in &specs {
            let k = s.dim();
            for _ in 0..20 {
                let f = random_poly(&mut rng, k, 3);
                let g = random_poly(&mut rng, k, 3);
                let h = random_poly(&mut rng, k, 3);
                let lhs = star(&star(&f, &g, s), &h, s);
                let rhs = star(&f, &star(&g, &h, s), s);
                let scale = lhs.max_abs_coeff().max(1.0);
                assert!(lhs.distance(&rhs) <= 1e-12 * scale, "{}", s.model);
            }
        }
    }

    #[test]
    fn dense_counts_monomials() {
        let mut k = 0.0;
        let f = NormalPolynomial::<f64>::dense(2, 2, || {
            k += 1.0;
            Cx::new(k, 0.0)
        });
        // b + c + |alpha| <= 2 in four variables: C(6, 2) = 15 monomials
        assert_eq!(k, 15.0);
        assert_eq!(f.degree(), 2);
        assert_eq!(NormalPolynomial::<f64>::dense(1, 0, || Cx::new(1.0, 0.0)), NormalPolynomial::one(1));
    }

    #[test]
    fn casimir_is_central() {
        let s = su11(0.5);
        for f in ["1 * B^1 A^(0) C^0", "1 * B^0 A^(2) C^1", "1 * B^0 A^(0) C^0"] {
            let f = NormalPolynomial::parse(f, 1).unwrap();
            assert!(casimir_centrality(&s, &f) < 1e-14);
        }
        let z = models::zeeman::<f64>(2, 1.0, 1.0).spec;
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let f = random_poly(&mut rng, 2, 3);
        assert!(casimir_centrality(&z, &f) < 1e-12);
    }

    #[test]
    fn classical_limit_of_commutators() {
        for s0 in [su11(1.0), models::zeeman::<f64>(2, 1.0, 1.0).spec] {
            let k = s0.dim();
            let mut gens = vec![NormalPolynomial::<f64>::b(k), NormalPolynomial::c(k)];
            gens.extend((0..k).map(|i| NormalPolynomial::a(k, i)));
            for f in &gens {
                for g in &gens {
                    let pb = NormalPolynomial::from_commutative(&poisson_bracket(&s0, &f.to_commutative(), &g.to_commutative()));
                    let err = |h: f64| {
                        let s = s0.with_hbar(h);
                        let comm = star(f, g, &s).sub(&star(g, f, &s)).scale(Cx::new(0.0, -1.0 / h));
                        comm.distance(&pb)
                    };
                    let (e1, e2) = (err(1e-2), err(1e-3));
                    assert!(e1 < 0.1 && e2 <= 0.11 * e1 + 1e-12, "{f} {g}: {e1} {e2}");
                }
            }
        }
    }

    #[test]
    fn homomorphism_into_matrices() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let cases = [(models::su11_variant2::<f64>(1.0, 0.5), 40usize), (models::zeeman(4, 1.0, 0.5), 0)];
        for (m, size) in &cases {
            let ops = crate::representation::build(m, *size).unwrap();
            let (lo, hi) = ops.space.interior(8);
            for _ in 0..5 {
                let f = random_poly(&mut rng, m.spec.dim(), 2);
                let g = random_poly(&mut rng, m.spec.dim(), 2);
                let lhs = represent(&star(&f, &g, &m.spec), &ops);
                let rhs = represent(&f, &ops).mul(&represent(&g, &ops));
                let scale = lhs.max_abs_block(lo, hi).max(1.0);
                assert!(lhs.sub(&rhs).max_abs_block(lo, hi) <= 1e-10 * scale, "{}", m.kind);
            }
        }
    }

    #[test]
    fn text_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let f = random_poly(&mut rng, 2, 3);
        let s = f.to_string();
        let back = NormalPolynomial::<f64>::parse(&s, 2).unwrap();
        assert_eq!(f, back);
        assert_eq!(back.to_string(), s);
        assert_eq!(NormalPolynomial::<f64>::parse("0", 1).unwrap(), NormalPolynomial::zero(1));
        assert!(NormalPolynomial::<f64>::parse("1 * Q^2", 1).is_err());
    }
}
