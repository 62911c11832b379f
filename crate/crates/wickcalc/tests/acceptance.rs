//! Acceptance suite: one line per criterion, nonzero exit when any fails.
//!
//! Run with `cargo test -p wickcalc --test acceptance`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Instant;
use wickcalc::algebra::models::{self, zeeman_roots, ModelKind};
use wickcalc::normal_product::{star, NormalPolynomial};
use wickcalc::representation::{self, WickOperator};
use wickcalc::restriction::{
    character, character_closed_form, group_element, homomorphism_defect, restriction_symbol_ode, ODE_STEPS,
};
use wickcalc::special::theta::theta_jacobi_transform;
use wickcalc::special::{solve_kernel, DEFAULT_TRUNCATION};
use wickcalc::tunneling::{self, CylinderSymbol, DEFAULT_HBARS};
use wickcalc::wick::{self, chart_point, Leaf, SymbolField};
use wickcalc::{ModelData, Result, C64};

const SEED: u64 = 2024;

/// Worst error against its tolerance, plus a short description of what was measured.
struct Measured {
    worst: f64,
    tol: f64,
    detail: String,
}

impl Measured {
    fn new(worst: f64, tol: f64, detail: impl Into<String>) -> Self {
        Self { worst, tol, detail: detail.into() }
    }

    fn pass(&self) -> bool {
        self.worst.is_finite() && self.worst <= self.tol
    }
}

fn rng() -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(SEED)
}

fn random_c(rng: &mut ChaCha8Rng) -> C64 {
    C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
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

fn quaternion_table() -> Result<Measured> {
    let leaf = Leaf::new(&models::sphere(1), 0)?;
    assert_eq!(leaf.hbar(), 2.0);
    let x = leaf.ops.sphere_coordinates();
    let g = Arc::new(leaf.grid(6, 6, (-1.0, 1.0)));
    let (mut op_err, mut qu_err) = (0.0_f64, 0.0_f64);
    for j in 0..3 {
        for l in 0..3 {
            let expect = if j == l {
                SymbolField::sample(&g, |_| C64::new(1.0, 0.0))
            } else {
                let m = 3 - j - l;
                let sign = if (j + 1) % 3 == l { 1.0 } else { -1.0 };
                SymbolField::sample(&g, move |z| C64::new(0.0, -sign) * Leaf::sphere_point(z)[m])
            };
            op_err = op_err.max(wick::star_operator_route(&leaf, &x[j], &x[l], &g).max_abs_diff(&expect));
            qu_err = qu_err.max(wick::star_quadrature_route(&leaf, &x[j], &x[l], &g, 8, 8).max_abs_diff(&expect));
        }
    }
    Ok(Measured::new(op_err.max(qu_err), 1e-10, format!("operator {op_err:.1e}, quadrature {qu_err:.1e}")))
}

fn casimir() -> Result<Measured> {
    let mut worst = 0.0_f64;
    for n in 1..=16 {
        let model = models::sphere::<f64>(n);
        let target = 1.0 + model.hbar();
        let x = representation::build(&model, 0)?.sphere_coordinates();
        let m = x[0].mul(&x[0]).add(&x[1].mul(&x[1])).add(&x[2].mul(&x[2])).matrix;
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                let want = if i == j { target } else { 0.0 };
                worst = worst.max((m[(i, j)] - C64::new(want, 0.0)).norm());
            }
        }
    }
    Ok(Measured::new(worst, 1e-12, "max |sum x^2 - (1+hbar) I|, N = 1..16"))
}

fn dimension() -> Result<Measured> {
    let mut worst = 0.0_f64;
    for n in [2, 5, 10] {
        let leaf = Leaf::new(&models::sphere(n), 0)?;
        if leaf.dim() != n + 1 {
            return Ok(Measured::new(f64::INFINITY, 1e-6, format!("dim {} at N = {n}", leaf.dim())));
        }
        let d = wick::dimension_formula(&leaf)?;
        if d.round() as usize != n + 1 {
            return Ok(Measured::new(f64::INFINITY, 1e-6, format!("quadrature {d} at N = {n}")));
        }
        worst = worst.max((d - (n + 1) as f64).abs()).max((wick::gauss_bonnet(&leaf)? - 2.0).abs());
    }
    Ok(Measured::new(worst, 1e-6, "dimension and Gauss-Bonnet residuals, N = 2, 5, 10"))
}

fn spectrum() -> Result<Measured> {
    let rows = wick::sphere_spectral_check(4, 6)?;
    let worst = rows.iter().fold(0.0_f64, |m, r| m.max(r.error));
    let killed = rows.iter().filter(|r| r.k > 4).all(|r| r.expected == 0.0);
    Ok(Measured::new(if killed { worst } else { f64::INFINITY }, 1e-8, "N = 4, k = 0..6"))
}

fn characters() -> Result<Measured> {
    let dir = [1.0 / 3.0, 2.0 / 3.0, 2.0 / 3.0];
    let mut worst = 0.0_f64;
    for n in [3, 6] {
        let leaf = Leaf::new(&models::sphere(n), 0)?;
        for t in [0.3, 1.0, 2.0] {
            let g = group_element(n, dir.map(|d| d * t), false)?;
            let oracle = ((n + 1) as f64 * t / 2.0).sin() / (t / 2.0).sin();
            let exact = character_closed_form(n, t);
            let quad = character(&g)?;
            let trace = g.operator(&leaf)?.trace();
            worst = worst.max((quad - trace).norm()).max((quad - oracle).norm()).max((exact - oracle).abs());
        }
    }
    Ok(Measured::new(worst, 1e-7, "quadrature vs trace vs sin ratio"))
}

fn restriction_ode() -> Result<Measured> {
    let mut rng = rng();
    let mut worst = 0.0_f64;
    for _ in 0..50 {
        let xi = random_unit(&mut rng);
        let t = rng.random_range(0.0..2.5);
        let eta = random_unit(&mut rng).map(|v| v * t);
        let ode = restriction_symbol_ode(6, eta, xi, ODE_STEPS)?;
        let want = group_element(6, eta, false)?.restricted(xi);
        worst = worst.max((ode.value - want).norm() / want.norm());
    }
    Ok(Measured::new(worst, 1e-7, "50 random points, N = 6"))
}

fn kernels() -> Result<Measured> {
    let rel = |a: f64, b: f64| (a - b).abs() / b.abs();
    let k1 = solve_kernel(&models::su11_variant1(1.0, 0.5), 512)?;
    let mut v1 = 0.0_f64;
    for r in [0.1, 0.5, 0.9] {
        v1 = v1.max(rel(k1.eval(r), (1.0 - r).powf(-(2.0 + 0.5) / 0.5)));
    }
    let k2 = solve_kernel(&models::su11_variant2(1.0, 0.5), DEFAULT_TRUNCATION)?;
    let mut v2 = 0.0_f64;
    for r in [0.0, 0.3, 1.0, 4.0] {
        v2 = v2.max(rel(k2.eval(r), k2.closed_form_value(r).unwrap_or(f64::NAN)));
    }
    let (a2, hbar) = (0.7, 0.3);
    let mut zee = 0.0_f64;
    for n in [1usize, 3] {
        let k = solve_kernel(&models::zeeman(n, a2, hbar), DEFAULT_TRUNCATION)?;
        if k.coeffs.len() != n + 1 {
            zee = f64::INFINITY;
            continue;
        }
        let (tp, tm) = zeeman_roots(-((n + 1) as f64) * hbar, a2);
        let mut want = 1.0;
        for (j, c) in k.coeffs.iter().enumerate() {
            if j > 0 {
                let jf = j as f64;
                want *= (n + 1 - j) as f64 / jf * (tp - jf * hbar) / (tm.abs() + jf * hbar);
            }
            zee = zee.max(rel(*c, want));
        }
    }
    Ok(Measured::new(v1.max(v2).max(zee), 1e-12, format!("variant I {v1:.1e}, variant II {v2:.1e}, Zeeman {zee:.1e}")))
}

fn registered() -> Vec<(ModelKind, ModelData, usize)> {
    vec![
        (ModelKind::Su2Sphere, models::sphere(4), 0),
        (ModelKind::Su11Variant1, models::su11_variant1(1.0, 0.5), 96),
        (ModelKind::Su11Variant2, models::su11_variant2(1.0, 0.5), 64),
        (ModelKind::Zeeman, models::zeeman(6, 0.7, 0.3), 0),
        (ModelKind::Su11Prime, models::su11_prime(1.0, 1.0), 16),
        (ModelKind::Cylinder, models::cylinder(1.0, 0.0, 1.0), 16),
    ]
}

fn relations() -> Result<Measured> {
    let mut worst = 0.0_f64;
    for (kind, model, size) in registered() {
        let ops = representation::build(&model, size)?;
        let margin = if kind.is_compact() { 0 } else { representation::DEFAULT_MARGIN };
        worst = worst.max(representation::verify_relations(&model, &ops, margin).max());
    }
    Ok(Measured::new(worst, 1e-10, "six registered models"))
}

fn random_pairs(k: usize, count: usize) -> Vec<(NormalPolynomial<f64>, NormalPolynomial<f64>)> {
    let mut rng = rng();
    (0..count)
        .map(|_| {
            let f = NormalPolynomial::dense(k, 2, || random_c(&mut rng));
            let g = NormalPolynomial::dense(k, 2, || random_c(&mut rng));
            (f, g)
        })
        .collect()
}

fn homomorphism() -> Result<Measured> {
    let v2 = models::su11_variant2(1.0, 0.5);
    let leaf = Leaf::new(&v2, 64)?;
    let eval = Arc::new(leaf.grid(2, 3, (0.6, 1.0)));
    let d2 = homomorphism_defect(&leaf, &random_pairs(v2.spec.dim(), 20), &eval, 128, 96);
    let z = models::zeeman(6, 0.7, 0.3);
    let leaf = Leaf::new(&z, 0)?;
    let eval = Arc::new(leaf.grid(4, 5, (-0.6, 0.6)));
    let dz = homomorphism_defect(&leaf, &random_pairs(z.spec.dim(), 20), &eval, 48, 48);
    Ok(Measured::new(d2.max(dz), 1e-7, format!("variant II {d2:.1e}, Zeeman {dz:.1e}")))
}

fn jacobi() -> Result<Measured> {
    let mut worst = 0.0_f64;
    for h in [0.5, 1.0, 2.0] {
        for i in 0..=60 {
            let (l, r) = theta_jacobi_transform(-3.0 + 0.1 * i as f64, h)?;
            worst = worst.max((l - r).abs() / r.abs());
        }
    }
    Ok(Measured::new(worst, 1e-12, "hbar = 0.5, 1, 2; 61 points"))
}

fn tunneling_slopes() -> Result<Measured> {
    let pi2 = PI * PI;
    let rep = tunneling::tunneling_gap(&DEFAULT_HBARS, None)?;
    let r = CylinderSymbol::radial(&[0.0, 1.0]);
    let scan = tunneling::remainder_scan(&DEFAULT_HBARS, &r, &r)?;
    let form = (rep.slope + pi2).abs() / pi2;
    let rem = (scan.slope + pi2).abs() / pi2;
    // two tolerances folded into one ratio: the worse of form/2% and remainder/5%
    let ratio = (form / 0.02).max(rem / 0.05);
    Ok(Measured::new(
        ratio,
        1.0,
        format!("form slope {:.4} ({:.2}%), remainder slope {:.4} ({:.2}%)", rep.slope, 100.0 * form, scan.slope, 100.0 * rem),
    ))
}

fn heat_kernel() -> Result<Measured> {
    let c = tunneling::heat_kernel_comparison(1.0, (1.0, 0.0), (1.0, 0.0))?;
    let target = 2.0 * (-2.0 * PI * PI).exp();
    let rel = (c.ratio_minus_one - target).abs() / target;
    Ok(Measured::new(rel, 0.1, format!("ratio - 1 = {:.4e}, 2e^(-2pi^2) = {target:.4e}", c.ratio_minus_one)))
}

fn sphere_operators(leaf: &Leaf) -> (WickOperator<f64>, WickOperator<f64>) {
    let x = leaf.ops.sphere_coordinates();
    (x[0].mul(&x[2]).add(&x[1]), x[2].mul(&x[2]).mul(&x[1]))
}

fn properties() -> Result<Measured> {
    let mut notes = Vec::new();
    let mut ratio = 0.0_f64;
    let mut record = |name: &str, value: f64, tol: f64| {
        ratio = ratio.max(value / tol);
        notes.push(format!("{name} {value:.1e}"));
    };

    let mut rng = rng();
    let mut assoc = 0.0_f64;
    for (_, model, _) in registered() {
        let spec = &model.spec;
        for _ in 0..20 {
            let mut draw = || NormalPolynomial::dense(spec.dim(), 2, || random_c(&mut rng));
            let (f, g, h) = (draw(), draw(), draw());
            let lhs = star(&star(&f, &g, spec), &h, spec);
            let rhs = star(&f, &star(&g, &h, spec), spec);
            assoc = assoc.max(lhs.distance(&rhs) / lhs.max_abs_coeff().max(1.0));
        }
    }
    record("associativity", assoc, 1e-12);

    let n = 3;
    let leaf = Leaf::new(&models::sphere(n), 0)?;
    let (psi, chi) = sphere_operators(&leaf);
    let m = 2 * n + 16;
    let g = Arc::new(leaf.grid(m, m, (-1.0, 1.0)));
    record("frobenius", wick::frobenius_defect(&leaf, &psi, &chi, &g), 1e-10);
    let m = 2 * n + 8;
    record("resolution", wick::resolution_defect(&leaf, &leaf.grid(m, m, (-1.0, 1.0))), 1e-10);
    let m = 16;
    let g = Arc::new(leaf.grid(m, m, (-1.0, 1.0)));
    let op = psi.add(&chi.scale(C64::new(0.0, 1.0)));
    let sym = wick::symbol_from_operator(&leaf, &op, &g);
    let adj = wick::symbol_from_operator(&leaf, &op.adjoint(), &g);
    record("adjointness", adj.max_abs_diff(&sym.conj()) / sym.max_abs().max(1.0), 1e-10);

    let mut pnorm = 0.0_f64;
    for (kind, model, size) in registered() {
        if kind == ModelKind::Su11Prime {
            continue;
        }
        let leaf = Leaf::new(&model, size)?;
        let points: Vec<C64> = match kind {
            ModelKind::Cylinder => vec![chart_point(leaf.chart(), 1.0, 0.0), chart_point(leaf.chart(), -0.7, 2.0)],
            ModelKind::Su11Variant1 => vec![C64::new(0.0, 0.0), C64::new(0.3, 0.4), C64::new(-0.1, 0.8)],
            _ => vec![C64::new(0.2, 0.3), C64::new(-1.5, 1.0), C64::new(0.0, 0.0)],
        };
        for x in points {
            let g = if kind == ModelKind::Su2Sphere { leaf.grid(48, 48, (-1.0, 1.0)) } else { leaf.default_grid(Some(x)) };
            pnorm = pnorm.max((wick::probability_normalization(&leaf, &g, x) - 1.0).abs());
        }
    }
    record("p-normalization", pnorm, 1e-8);
    Ok(Measured::new(ratio, 1.0, format!("worst error/tolerance; {}", notes.join(", "))))
}

type Criterion = (&'static str, f64, fn() -> Result<Measured>);

fn main() -> ExitCode {
    let criteria: [Criterion; 13] = [
        ("quaternion table", 1.0, quaternion_table),
        ("casimir eigenvalue", 1.0, casimir),
        ("dimension formulas", 10.0, dimension),
        ("probability spectrum", 30.0, spectrum),
        ("character cross-validation", 30.0, characters),
        ("restriction symbol ODE", 10.0, restriction_ode),
        ("kernel closed forms", 1.0, kernels),
        ("relation residuals", 5.0, relations),
        ("homomorphism", 60.0, homomorphism),
        ("jacobi transform", 1.0, jacobi),
        ("tunneling exponent", 120.0, tunneling_slopes),
        ("heat-kernel winding", 1.0, heat_kernel),
        ("property suites", 120.0, properties),
    ];
    let mut failed = 0;
    for (i, (name, budget, run)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let result = run();
        let secs = t.elapsed().as_secs_f64();
        let (pass, line) = match result {
            Ok(m) => (m.pass() && secs < *budget, format!("{:.3e} (tol {:.0e}) {}", m.worst, m.tol, m.detail)),
            Err(e) => (false, format!("error {}: {e}", e.code())),
        };
        if !pass {
            failed += 1;
        }
        println!("{} {:>2} {name}: {line} [{secs:.2}s / {budget}s]", if pass { "PASS" } else { "FAIL" }, i + 1);
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
