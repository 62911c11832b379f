//! Registry of named checks per model.

use crate::config::Scenario;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;
use std::sync::Arc;
use wickcalc::algebra::models::ModelKind;
use wickcalc::normal_product::{star, NormalPolynomial};
use wickcalc::representation::{self, WickOperator};
use wickcalc::restriction::{
    character, character_closed_form, group_element, homomorphism_defect, restriction_symbol_ode, ODE_STEPS,
};
use wickcalc::special::theta::theta_jacobi_transform;
use wickcalc::special::{solve_kernel, DEFAULT_TRUNCATION};
use wickcalc::tunneling::{self, CylinderSymbol};
use wickcalc::wick::{self, chart_point, Leaf, SymbolField};
use wickcalc::{Result, C64};

#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Outcome {
    pub value: f64,
    pub target: f64,
    pub tolerance: f64,
    pub pass: bool,
    pub table: Option<Table>,
}

impl Outcome {
    fn near(value: f64, target: f64, tolerance: f64) -> Self {
        Self { value, target, tolerance, pass: (value - target).abs() <= tolerance, table: None }
    }

    fn below(value: f64, tolerance: f64) -> Self {
        Self::near(value, 0.0, tolerance)
    }

    fn with_table(mut self, header: &[&str], rows: Vec<Vec<f64>>) -> Self {
        self.table = Some(Table { header: header.iter().map(|s| s.to_string()).collect(), rows });
        self
    }
}

type Runner = Box<dyn Fn(&Scenario) -> Result<Outcome> + Send + Sync>;

pub struct Check {
    pub id: String,
    pub suites: Vec<&'static str>,
    pub run: Runner,
}

fn check(id: impl Into<String>, suites: &[&'static str], run: impl Fn(&Scenario) -> Result<Outcome> + Send + Sync + 'static) -> Check {
    Check { id: id.into(), suites: suites.to_vec(), run: Box::new(run) }
}

/// Checks registered for `kind`, sorted by id.
pub fn registry(kind: ModelKind) -> Vec<Check> {
    let mut out = vec![
        check("relations", &["algebra"], relations),
        check("associativity", &["algebra", "properties"], associativity),
    ];
    match kind {
        ModelKind::Su2Sphere => {
            for j in 0..3 {
                for l in 0..3 {
                    out.push(check(format!("quaternion-x{}-x{}", j + 1, l + 1), &["quaternion"], move |s| quaternion(s, j, l)));
                }
            }
            out.extend([
                check("casimir-1-plus-hbar", &["quaternion", "algebra"], casimir_sphere),
                check("dimension-formula", &["geometry"], |s| {
                    let leaf = Leaf::new(&s.model, 0)?;
                    Ok(Outcome::near(wick::dimension_formula(&leaf)?, (s.n + 1) as f64, 1e-6))
                }),
                check("gauss-bonnet", &["geometry"], |s| {
                    let leaf = Leaf::new(&s.model, 0)?;
                    Ok(Outcome::near(wick::gauss_bonnet(&leaf)?, 2.0, 1e-6))
                }),
                check("probability-spectrum", &["geometry"], |s| {
                    let rows = wick::sphere_spectral_check(s.n, s.n + 2)?;
                    let table = rows.iter().map(|r| vec![r.k as f64, r.expected, r.error]).collect();
                    Ok(Outcome::below(rows.iter().fold(0.0, |m, r| m.max(r.error)), 1e-8)
                        .with_table(&["k", "eigenvalue", "error"], table))
                }),
                check("character", &["restriction"], character_check),
                check("restriction-ode", &["restriction"], restriction_ode),
                check("resolution-of-identity", &["properties"], |s| {
                    let leaf = Leaf::new(&s.model, 0)?;
                    let m = 2 * s.n + 8;
                    Ok(Outcome::below(wick::resolution_defect(&leaf, &leaf.grid(m, m, (-1.0, 1.0))), 1e-10))
                }),
                check("frobenius-trace", &["properties"], frobenius),
                check("adjointness", &["properties"], adjointness),
            ]);
        }
        ModelKind::Su11Variant1 => out.push(check("kernel-closed-form", &["kernel"], kernel_closed_form)),
        ModelKind::Su11Variant2 | ModelKind::Zeeman => out.extend([
            check("kernel-closed-form", &["kernel"], kernel_closed_form),
            check("homomorphism", &["restriction"], homomorphism),
        ]),
        ModelKind::Su11Prime => out.push(check("prime-series", &["algebra"], |s| {
            let rep = tunneling::prime_series_check(s.lambda, s.hbar, s.size)?;
            Ok(Outcome::below(rep.max(), 1e-10))
        })),
        ModelKind::Cylinder => out.extend([
            check("kernel-closed-form", &["kernel"], kernel_closed_form),
            check("tunneling-slope", &["tunneling"], |s| {
                let rep = tunneling::tunneling_gap(&s.hbars, None)?;
                let rows = rep.hbars.iter().zip(&rep.form_gaps).map(|(h, g)| vec![1.0 / h, g.ln()]).collect();
                Ok(Outcome::near(rep.slope, rep.target, 0.02 * PI * PI).with_table(&["inv_hbar", "ln_gap"], rows))
            }),
            check("measure-slope", &["tunneling"], |s| {
                let rep = tunneling::tunneling_gap(&s.hbars, None)?;
                let rows = rep.hbars.iter().zip(&rep.measure_gaps).map(|(h, g)| vec![1.0 / h, g.ln()]).collect();
                Ok(Outcome::near(rep.measure_slope, rep.target, 0.02 * PI * PI).with_table(&["inv_hbar", "ln_gap"], rows))
            }),
            check("star-remainder-slope", &["tunneling"], |s| {
                let r = CylinderSymbol::radial(&[0.0, 1.0]);
                let scan = tunneling::remainder_scan(&s.hbars, &r, &r)?;
                let rows = scan.hbars.iter().zip(&scan.remainders).map(|(h, g)| vec![1.0 / h, g.ln()]).collect();
                Ok(Outcome::near(scan.slope, scan.target, 0.05 * PI * PI).with_table(&["inv_hbar", "ln_remainder"], rows))
            }),
            check("heat-kernel-winding", &["tunneling"], |s| {
                let c = tunneling::heat_kernel_comparison(s.hbar, (s.hbar, 0.0), (s.hbar, 0.0))?;
                let target = 2.0 * (-2.0 * PI * PI / s.hbar).exp();
                Ok(Outcome::near(c.ratio_minus_one, target, 0.1 * target))
            }),
            check("jacobi-transform", &["theta"], |_| {
                let mut worst = 0.0_f64;
                for h in [0.5, 1.0, 2.0] {
                    for i in 0..=60 {
                        let (l, r) = theta_jacobi_transform(-3.0 + 0.1 * i as f64, h)?;
                        worst = worst.max((l - r).abs() / r.abs());
                    }
                }
                Ok(Outcome::below(worst, 1e-12))
            }),
            check("dual-representation", &["theta"], |s| {
                let rs: Vec<f64> = (0..=60).map(|i| -3.0 + 0.1 * i as f64).collect();
                Ok(Outcome::below(tunneling::dual_representation_residual(s.hbar, &rs)?, 1e-12))
            }),
        ]),
    }
    if kind != ModelKind::Su11Prime {
        out.push(check("p-normalization", &["properties"], p_normalization));
    }
    out.sort_by(|a, b| a.id.cmp(&b.id));
    out
}

/// Suite names available for `kind`, sorted, including `all`.
pub fn suites(kind: ModelKind) -> Vec<&'static str> {
    let mut s: Vec<&'static str> = registry(kind).iter().flat_map(|c| c.suites.clone()).collect();
    s.push("all");
    s.sort();
    s.dedup();
    s
}

fn leaf_size(s: &Scenario) -> usize {
    match s.kind {
        ModelKind::Su2Sphere | ModelKind::Zeeman => 0,
        _ => s.size,
    }
}

fn relations(s: &Scenario) -> Result<Outcome> {
    let ops = representation::build(&s.model, leaf_size(s))?;
    let margin = if s.kind.is_compact() { 0 } else { representation::DEFAULT_MARGIN };
    Ok(Outcome::below(representation::verify_relations(&s.model, &ops, margin).max(), 1e-10))
}

fn random_c(rng: &mut ChaCha8Rng) -> C64 {
    C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
}

fn associativity(s: &Scenario) -> Result<Outcome> {
    let spec = &s.model.spec;
    let k = spec.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(s.seed);
    let mut worst = 0.0_f64;
    for _ in 0..20 {
        let mut draw = || NormalPolynomial::dense(k, 2, || random_c(&mut rng));
        let (f, g, h) = (draw(), draw(), draw());
        let lhs = star(&star(&f, &g, spec), &h, spec);
        let rhs = star(&f, &star(&g, &h, spec), spec);
        worst = worst.max(lhs.distance(&rhs) / lhs.max_abs_coeff().max(1.0));
    }
    Ok(Outcome::below(worst, 1e-12))
}

fn quaternion(s: &Scenario, j: usize, l: usize) -> Result<Outcome> {
    let leaf = Leaf::new(&s.model, 0)?;
    let x = leaf.ops.sphere_coordinates();
    let g = Arc::new(leaf.grid(6, 6, (-1.0, 1.0)));
    let op = wick::star_operator_route(&leaf, &x[j], &x[l], &g);
    let qu = wick::star_quadrature_route(&leaf, &x[j], &x[l], &g, 8, 8);
    // x^j * x^j = 1, x^j * x^l = -i eps_jlm x^m
    let expect = if j == l {
        SymbolField::sample(&g, |_| C64::new(1.0, 0.0))
    } else {
        let m = 3 - j - l;
        let sign = if (j + 1) % 3 == l { 1.0 } else { -1.0 };
        SymbolField::sample(&g, move |z| C64::new(0.0, -sign) * Leaf::sphere_point(z)[m])
    };
    Ok(Outcome::below(op.max_abs_diff(&expect).max(qu.max_abs_diff(&expect)), 1e-10))
}

fn casimir_sphere(s: &Scenario) -> Result<Outcome> {
    let ops = representation::build(&s.model, 0)?;
    let x = ops.sphere_coordinates();
    let sum = x[0].mul(&x[0]).add(&x[1].mul(&x[1])).add(&x[2].mul(&x[2]));
    let target = 1.0 + s.hbar;
    let m = &sum.matrix;
    let mut diag = target;
    let mut off = 0.0_f64;
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            if i == j {
                if (m[(i, i)].re - target).abs() > (diag - target).abs() {
                    diag = m[(i, i)].re;
                }
                off = off.max(m[(i, i)].im.abs());
            } else {
                off = off.max(m[(i, j)].norm());
            }
        }
    }
    let mut out = Outcome::near(diag, target, 1e-12);
    out.pass &= off <= 1e-12;
    Ok(out)
}

fn character_check(s: &Scenario) -> Result<Outcome> {
    let leaf = Leaf::new(&s.model, 0)?;
    let dir = [1.0 / 3.0, 2.0 / 3.0, 2.0 / 3.0];
    let mut worst = 0.0_f64;
    let mut rows = Vec::new();
    for t in [0.3, 1.0, 2.0] {
        let g = group_element(s.n, dir.map(|d| d * t), false)?;
        let exact = character_closed_form(s.n, t);
        let quad = character(&g)?;
        let trace = g.operator(&leaf)?.trace();
        let e = (quad - exact).norm().max((trace - exact).norm());
        rows.push(vec![t, exact, quad.re, trace.re]);
        worst = worst.max(e);
    }
    Ok(Outcome::below(worst, 1e-7).with_table(&["abs_eta", "closed_form", "quadrature", "trace"], rows))
}

fn random_unit(rng: &mut ChaCha8Rng) -> [f64; 3] {
    loop {
        let v: [f64; 3] = [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)];
        let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        if n > 0.1 && n <= 1.0 {
            return v.map(|x| x / n);
        }
    }
}

fn restriction_ode(s: &Scenario) -> Result<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(s.seed);
    let mut worst = 0.0_f64;
    for _ in 0..50 {
        let xi = random_unit(&mut rng);
        let t = rng.random_range(0.0..2.5);
        let eta = random_unit(&mut rng).map(|v| v * t);
        let ode = restriction_symbol_ode(s.n, eta, xi, ODE_STEPS)?;
        let want = group_element(s.n, eta, false)?.restricted(xi);
        worst = worst.max((ode.value - want).norm() / want.norm());
    }
    Ok(Outcome::below(worst, 1e-7))
}

fn sphere_operators(leaf: &Leaf) -> (WickOperator<f64>, WickOperator<f64>) {
    let x = leaf.ops.sphere_coordinates();
    (x[0].mul(&x[2]).add(&x[1]), x[2].mul(&x[2]).mul(&x[1]))
}

fn frobenius(s: &Scenario) -> Result<Outcome> {
    let leaf = Leaf::new(&s.model, 0)?;
    let m = 2 * s.n + 16;
    let g = Arc::new(leaf.grid(m, m, (-1.0, 1.0)));
    let (psi, chi) = sphere_operators(&leaf);
    Ok(Outcome::below(wick::frobenius_defect(&leaf, &psi, &chi, &g), 1e-10))
}

fn adjointness(s: &Scenario) -> Result<Outcome> {
    let leaf = Leaf::new(&s.model, 0)?;
    let m = (2 * s.n + 8).max(16);
    let g = Arc::new(leaf.grid(m, m, (-1.0, 1.0)));
    let (psi, chi) = sphere_operators(&leaf);
    let op = psi.add(&chi.scale(C64::new(0.0, 1.0)));
    let sym = wick::symbol_from_operator(&leaf, &op, &g);
    let adj = wick::symbol_from_operator(&leaf, &op.adjoint(), &g);
    Ok(Outcome::below(adj.max_abs_diff(&sym.conj()) / sym.max_abs().max(1.0), 1e-10))
}

fn p_normalization(s: &Scenario) -> Result<Outcome> {
    let leaf = Leaf::new(&s.model, leaf_size(s))?;
    let mut worst = 0.0_f64;
    let points: Vec<C64> = match s.kind {
        ModelKind::Cylinder => vec![chart_point(leaf.chart(), s.hbar, 0.0), chart_point(leaf.chart(), -0.7, 2.0)],
        ModelKind::Su11Variant1 => vec![C64::new(0.0, 0.0), C64::new(0.3, 0.4), C64::new(-0.1, 0.8)],
        _ => vec![C64::new(0.2, 0.3), C64::new(-1.5, 1.0), C64::new(0.0, 0.0)],
    };
    let compact = if s.kind == ModelKind::Su2Sphere {
        let m = 4 * s.n + 32;
        Some(leaf.grid(m, m, (-1.0, 1.0)))
    } else {
        None
    };
    for x in points {
        let g = match &compact {
            Some(g) => g.clone(),
            None => leaf.default_grid(Some(x)),
        };
        worst = worst.max((wick::probability_normalization(&leaf, &g, x) - 1.0).abs());
    }
    Ok(Outcome::below(worst, 1e-8))
}

fn kernel_closed_form(s: &Scenario) -> Result<Outcome> {
    let worst = match s.kind {
        ModelKind::Zeeman => {
            let k = solve_kernel(&s.model, DEFAULT_TRUNCATION)?;
            let a1 = -((s.n + 1) as f64) * s.hbar;
            let a2 = s.inputs["a2"].as_f64().unwrap_or(f64::NAN);
            let (tp, tm) = wickcalc::algebra::models::zeeman_roots(a1, a2);
            let mut want = 1.0;
            let mut worst = 0.0_f64;
            for (j, c) in k.coeffs.iter().enumerate() {
                if j > 0 {
                    let jf = j as f64;
                    want *= (s.n + 1 - j) as f64 / jf * (tp - jf * s.hbar) / (tm.abs() + jf * s.hbar);
                }
                worst = worst.max((c - want).abs() / want.abs());
            }
            if k.coeffs.len() != s.n + 1 {
                worst = f64::INFINITY;
            }
            worst
        }
        _ => {
            let terms = if s.kind == ModelKind::Su11Variant1 { 512 } else { DEFAULT_TRUNCATION };
            let k = solve_kernel(&s.model, terms)?;
            let rs: &[f64] = match s.kind {
                ModelKind::Su11Variant1 => &[0.1, 0.5, 0.9],
                ModelKind::Cylinder => &[-2.0, 0.0, 1.5],
                _ => &[0.0, 0.3, 1.0, 4.0],
            };
            let mut worst = 0.0_f64;
            for &r in rs {
                let exact = k.closed_form_value(r).unwrap_or(f64::NAN);
                worst = worst.max((k.eval(r) - exact).abs() / exact.abs());
            }
            worst
        }
    };
    Ok(Outcome::below(worst, 1e-12))
}

fn homomorphism(s: &Scenario) -> Result<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(s.seed);
    let k = s.model.spec.dim();
    let pairs: Vec<_> = (0..s.pairs)
        .map(|_| {
            let f = NormalPolynomial::dense(k, 2, || random_c(&mut rng));
            let g = NormalPolynomial::dense(k, 2, || random_c(&mut rng));
            (f, g)
        })
        .collect();
    let d = if s.kind == ModelKind::Zeeman {
        let leaf = Leaf::new(&s.model, 0)?;
        let eval = Arc::new(leaf.grid(4, 5, (-0.6, 0.6)));
        homomorphism_defect(&leaf, &pairs, &eval, 48, 48)
    } else {
        let leaf = Leaf::new(&s.model, s.size)?;
        let eval = Arc::new(leaf.grid(2, 3, (0.6, 1.0)));
        homomorphism_defect(&leaf, &pairs, &eval, 128, 96)
    };
    Ok(Outcome::below(d, 1e-7))
}
