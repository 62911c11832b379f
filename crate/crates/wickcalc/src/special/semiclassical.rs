//! Leading-order kernel asymptotics: `hbar ln k(r) -> F0(r)` with `H(r F0'(r)) = r`.

use super::quadrature::{adaptive, Tolerance};
use crate::algebra::ModelData;
use crate::error::{Error, Result};

/// `H(s) = conj(E(s)) / D(s)` evaluated at real time `s`.
pub fn h_function(model: &ModelData<f64>, s: f64) -> Result<f64> {
    let fact = model.factorization().ok_or_else(|| Error::NoSolution("radial chart required".into()))?;
    Ok((fact.script_e(&model.spec, s).conj() / fact.script_d(&model.spec, s)).re)
}

/// Solution `s = r F0'(r)` of `H(s) = r` on the branch starting at `s = 0`.
pub fn classical_momentum(model: &ModelData<f64>, r: f64) -> Result<f64> {
    if r <= 0.0 {
        return Ok(0.0);
    }
    let fact = model.factorization().ok_or_else(|| Error::NoSolution("radial chart required".into()))?;
    let cap = fact.t_star.unwrap_or(f64::INFINITY);
    let mut hi = 1.0f64.min(0.5 * cap);
    while h_function(model, hi)? < r {
        let next = if cap.is_finite() { 0.5 * (hi + cap) } else { 2.0 * hi };
        if next == hi || hi > 1e12 {
            return Err(Error::NoSolution(format!("H(s) = {r} has no root below the polar time")));
        }
        hi = next;
    }
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if h_function(model, mid)? < r {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Kähler potential `F0(r) = int_0^r s(rho)/rho d rho`.
pub fn classical_potential(model: &ModelData<f64>, r: f64) -> Result<f64> {
    let mut failed = None;
    let v = adaptive(
        |rho| {
            if rho == 0.0 {
                return 0.0;
            }
            match classical_momentum(model, rho) {
                Ok(s) => s / rho,
                Err(e) => {
                    failed.get_or_insert(e);
                    f64::NAN
                }
            }
        },
        0.0,
        r,
        Tolerance { abs: 1e-13, rel: 1e-12, max_intervals: 400 },
    );
    match failed {
        Some(e) => Err(e),
        None => v,
    }
}

/// `(errors, rates)` of `hbar ln k_hbar(r) - F0(r)` over the `hbar` sequence; rates are
/// `log2(e_i / e_{i+1})` for halving sequences.
pub fn kernel_law_rates(
    r: f64,
    hbars: &[f64],
    model_at: impl Fn(f64) -> ModelData<f64>,
    truncation: usize,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut errs = Vec::new();
    for &h in hbars {
        let m = model_at(h);
        let k = super::solve_kernel(&m, truncation)?;
        let f0 = classical_potential(&m, r)?;
        errs.push(h * k.eval(r).ln() - f0);
    }
    let rates = errs.windows(2).zip(hbars.windows(2)).map(|(e, h)| (e[0] / e[1]).abs().ln() / (h[0] / h[1]).ln()).collect();
    Ok((errs, rates))
}
