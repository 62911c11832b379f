//! Reproducing kernels from the first-order recurrence on their series coefficients, the
//! matching measure densities, theta and Bessel-type special functions and quadrature.

pub mod bessel;
pub mod density;
pub mod quadrature;
pub mod semiclassical;
pub mod theta;

use crate::algebra::{ModelData, ModelKind, Structure};
use crate::error::{Error, Result};
use crate::real::{Cx, Real};
use num_traits::Zero;
use serde::{Deserialize, Serialize};

pub use density::{solve_density, DensityFunction, DensityKind};

/// Default number of series terms kept for non-compact kernels.
pub const DEFAULT_TRUNCATION: usize = 256;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Chart {
    /// `k` is a function of `r = |z|^2`; basis `zbar^n`.
    Radial,
    /// `k` is a function of `r = z + zbar`; basis `e^(n zbar)`, `2 pi i`-periodic.
    Strip,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ClosedForm {
    Geometric,
    Bessel,
    JacobiPoly,
    Theta,
    None,
}

/// Series `k(r) = sum_n c_n r^n` (radial) or `sum_n c_n e^(n r)` (strip).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Real + Serialize", deserialize = "T: Real + serde::de::DeserializeOwned"))]
pub struct KernelFunction<T: Real> {
    /// Index of `coeffs[0]`; negative only in the strip chart.
    pub offset: i64,
    pub coeffs: Vec<T>,
    pub log_coeffs: Vec<T>,
    /// Polynomial degree `N` when the leaf is compact.
    pub degree: Option<usize>,
    /// Convergence radius in `r`; `None` when infinite.
    pub radius: Option<T>,
    pub closed_form: ClosedForm,
    pub chart: Chart,
    pub hbar: T,
    /// Parameters of the closed form (`p` for `(1-r)^-p`, `nu` for Bessel, ...).
    pub shape: Vec<T>,
}

impl<T: Real> KernelFunction<T> {
    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn indices(&self) -> impl Iterator<Item = i64> + '_ {
        (0..self.coeffs.len() as i64).map(move |i| i + self.offset)
    }

    /// `c_n`, or `None` outside the stored range.
    pub fn coefficient(&self, n: i64) -> Option<T> {
        let i = n - self.offset;
        (i >= 0 && (i as usize) < self.coeffs.len()).then(|| self.coeffs[i as usize])
    }

    /// Weights `w_n = 1/c_n` of the monomial basis.
    pub fn weights(&self) -> Vec<T> {
        self.log_coeffs.iter().map(|l| (-*l).exp()).collect()
    }

    fn exponent(&self, n: i64, r: T) -> T {
        match self.chart {
            Chart::Radial => T::from_i64_(n) * r.ln(),
            Chart::Strip => T::from_i64_(n) * r,
        }
    }

    /// `[k, k', ..., k^(4)]` in the chart variable `r` from the truncated series.
    pub fn eval_derivs(&self, r: T) -> [T; 5] {
        let mut out = [T::zero(); 5];
        if self.chart == Chart::Radial && r == T::zero() {
            for (i, o) in out.iter_mut().enumerate() {
                if let Some(c) = self.coefficient(i as i64) {
                    let f: usize = (1..=i).product();
                    *o = c * T::from_usize_(f);
                }
            }
            return out;
        }
        for (i, n) in self.indices().enumerate() {
            let t = (self.log_coeffs[i] + self.exponent(n, r)).exp();
            let nf = T::from_i64_(n);
            // falling factorial n(n-1)...(n-j+1) / r^j (radial) or n^j (strip)
            let mut f = T::one();
            for (j, o) in out.iter_mut().enumerate() {
                *o += t * f;
                f = match self.chart {
                    Chart::Radial => f * (nf - T::from_usize_(j)) / r,
                    Chart::Strip => f * nf,
                };
            }
        }
        out
    }

    pub fn eval(&self, r: T) -> T {
        if self.chart == Chart::Radial && r == T::zero() {
            return self.coefficient(0).unwrap_or(T::zero());
        }
        self.indices()
            .enumerate()
            .map(|(i, n)| (self.log_coeffs[i] + self.exponent(n, r)).exp())
            .fold(T::zero(), |a, b| a + b)
    }

    /// Series at a complex argument `w` (`k(w)` radial, `sum c_n e^(n w)` strip).
    pub fn eval_complex(&self, w: Cx<T>) -> Cx<T> {
        let mut acc = Cx::zero();
        match self.chart {
            Chart::Radial => {
                if w.is_zero() {
                    return Cx::new(self.coefficient(0).unwrap_or(T::zero()), T::zero());
                }
                let lw = w.ln();
                for (i, n) in self.indices().enumerate() {
                    acc += (lw * T::from_i64_(n) + self.log_coeffs[i]).exp();
                }
            }
            Chart::Strip => {
                for (i, n) in self.indices().enumerate() {
                    acc += (w * T::from_i64_(n) + self.log_coeffs[i]).exp();
                }
            }
        }
        acc
    }

    /// Largest relative violation of `conj(E(n hbar)) c_n = D(n hbar) c_{n-1}` over the stored range.
    pub fn recurrence_residual(&self, model: &ModelData<T>) -> T {
        let Some(fact) = model.factorization() else { return T::zero() };
        let mut worst = T::zero();
        for n in 1..self.coeffs.len() {
            let t = model.hbar() * T::from_usize_(n);
            let lhs = fact.script_e(&model.spec, t).conj() * self.coeffs[n];
            let rhs = fact.script_d(&model.spec, t) * self.coeffs[n - 1];
            let scale = lhs.norm().max(rhs.norm()).max(T::min_positive_value());
            worst = worst.max((lhs - rhs).norm() / scale);
        }
        worst
    }
}

fn closed_form_of(kind: ModelKind) -> ClosedForm {
    match kind {
        ModelKind::Su2Sphere | ModelKind::Su11Variant1 => ClosedForm::Geometric,
        ModelKind::Su11Variant2 => ClosedForm::Bessel,
        ModelKind::Zeeman => ClosedForm::JacobiPoly,
        ModelKind::Cylinder | ModelKind::Su11Prime => ClosedForm::Theta,
    }
}

/// Ratio-test radius from the last 16 coefficient ratios, extrapolated in `1/n`.
///
/// Ratios `c_{n-1}/c_n` that grow like a power of `n` signal an entire kernel (`None`).
pub fn estimate_radius<T: Real>(log_coeffs: &[T]) -> Option<T> {
    let m = log_coeffs.len();
    if m < 20 {
        return None;
    }
    let pts: Vec<(T, T)> = (m - 16..m)
        .map(|n| (T::from_usize_(n), (log_coeffs[n - 1] - log_coeffs[n]).exp()))
        .collect();
    let (n0, r0) = pts[0];
    let (n1, r1) = pts[15];
    let growth = (r1 / r0).ln() / (n1 / n0).ln();
    if !growth.is_finite() || growth > T::c(0.5) {
        return None;
    }
    // least squares for ratio = R + b/n + c/n^2
    let mut ata = [[T::zero(); 3]; 3];
    let mut atb = [T::zero(); 3];
    for &(n, r) in &pts {
        let row = [T::one(), T::one() / n, T::one() / (n * n)];
        for i in 0..3 {
            for j in 0..3 {
                ata[i][j] += row[i] * row[j];
            }
            atb[i] += row[i] * r;
        }
    }
    solve3(ata, atb).map(|x| x[0])
}

fn solve3<T: Real>(mut a: [[T; 3]; 3], mut b: [T; 3]) -> Option<[T; 3]> {
    for col in 0..3 {
        let piv = (col..3).max_by(|&i, &j| a[i][col].abs().partial_cmp(&a[j][col].abs()).unwrap())?;
        if a[piv][col] == T::zero() {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..3 {
            let f = a[row][col] / a[col][col];
            for k in col..3 {
                let v = a[col][k];
                a[row][k] -= f * v;
            }
            let v = b[col];
            b[row] -= f * v;
        }
    }
    let mut x = [T::zero(); 3];
    for i in (0..3).rev() {
        let mut s = b[i];
        for k in i + 1..3 {
            s -= a[i][k] * x[k];
        }
        x[i] = s / a[i][i];
    }
    Some(x)
}

/// Kernel coefficients `c_n = prod_{j<=n} D(j hbar) / conj(E(j hbar))` (radial) or the
/// Gaussian-moment coefficients `c_n = e^(-hbar n^2 - hbar n)`, `|n| <= m` (strip).
///
/// `m` truncates non-compact series; compact leaves stop at their level `N`.
pub fn solve_kernel<T: Real>(model: &ModelData<T>, m: usize) -> Result<KernelFunction<T>> {
    let hbar = model.hbar();
    let closed_form = closed_form_of(model.kind);
    match &model.structure {
        Structure::Strip(_) => {
            let mm = m as i64;
            let log_coeffs: Vec<T> = (-mm..=mm)
                .map(|n| {
                    let nf = T::from_i64_(n);
                    -hbar * nf * nf - hbar * nf
                })
                .collect();
            Ok(KernelFunction {
                offset: -mm,
                coeffs: log_coeffs.iter().map(|l| l.exp()).collect(),
                log_coeffs,
                degree: None,
                radius: None,
                closed_form,
                chart: Chart::Strip,
                hbar,
                shape: vec![],
            })
        }
        Structure::Radial(fact) => {
            let last = fact.level.unwrap_or(m);
            let mut coeffs = vec![T::one()];
            let mut log_coeffs = vec![T::zero()];
            let mut scale = T::zero();
            for j in 1..=last {
                let t = hbar * T::from_usize_(j);
                scale = scale.max(fact.script_e(&model.spec, t).norm());
            }
            let tol = T::c(1e-12).max(T::c(100.0) * T::epsilon()) * scale.max(T::one());
            for j in 1..=last {
                let t = hbar * T::from_usize_(j);
                let e = fact.script_e(&model.spec, t);
                if e.norm() <= tol {
                    return Err(Error::DivisionByZeroRecurrence(j));
                }
                let ratio = fact.script_d(&model.spec, t) / e.conj();
                if ratio.re <= T::zero() || ratio.im.abs() > T::c(1e-9) * ratio.norm() {
                    return Err(Error::NegativeWeight(j));
                }
                coeffs.push(coeffs[j - 1] * ratio.re);
                log_coeffs.push(log_coeffs[j - 1] + ratio.re.ln());
            }
            let radius = if fact.level.is_some() { None } else { estimate_radius(&log_coeffs) };
            let shape = match model.kind {
                ModelKind::Su11Variant1 => {
                    let a = fact.vacuum[0];
                    vec![(T::c(2.0) * a + hbar) / hbar]
                }
                ModelKind::Su11Variant2 => vec![T::c(2.0) * fact.vacuum[0] / hbar],
                ModelKind::Su2Sphere => vec![T::from_usize_(fact.level.unwrap_or(0))],
                _ => vec![],
            };
            Ok(KernelFunction {
                offset: 0,
                coeffs,
                log_coeffs,
                degree: fact.level,
                radius,
                closed_form,
                chart: Chart::Radial,
                hbar,
                shape,
            })
        }
    }
}

impl KernelFunction<f64> {
    /// Closed-form value for the tagged kernels, where one is registered.
    pub fn closed_form_value(&self, r: f64) -> Option<f64> {
        match (self.closed_form, self.chart) {
            (ClosedForm::Geometric, Chart::Radial) if self.degree.is_some() => {
                Some((1.0 + r).powf(self.shape[0]))
            }
            (ClosedForm::Geometric, Chart::Radial) => Some((1.0 - r).powf(-self.shape[0])),
            (ClosedForm::Bessel, _) => Some(bessel::bessel_modified(self.shape[0], 2.0 * r.sqrt() / self.hbar)),
            (ClosedForm::Theta, Chart::Strip) => {
                theta::theta(num_complex::Complex64::new(r - self.hbar, 0.0), (-self.hbar).exp()).ok().map(|c| c.re)
            }
            _ => None,
        }
    }

    /// Coefficients as CSV with header `n,c_n`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("n,c_n\n");
        for (i, n) in self.indices().enumerate() {
            s.push_str(&format!("{n},{:.10e}\n", self.coeffs[i]));
        }
        s
    }
}
