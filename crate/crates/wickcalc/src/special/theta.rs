//! Theta series `theta(alpha, q) = sum_n q^(n^2) e^(n alpha)` and its Jacobi transform.

use crate::error::{Error, Result};
use num_complex::Complex64;
use std::f64::consts::PI;

/// Nome above which [`theta`] evaluates through the transformed series.
pub const DUAL_SWITCH: f64 = 0.5;

fn check_nome(q: f64) -> Result<()> {
    if !(0.0..1.0).contains(&q) {
        return Err(Error::Divergent(q));
    }
    Ok(())
}

/// Symmetric direct summation, stopping once both tails fall below `1e-18` of the sum.
pub fn theta_series(alpha: Complex64, q: f64) -> Result<Complex64> {
    theta_series_derivs::<1>(alpha, q).map(|d| d[0])
}

/// `[theta, d theta/d alpha, ...]` up to order `K-1` by the direct series.
pub fn theta_series_derivs<const K: usize>(alpha: Complex64, q: f64) -> Result<[Complex64; K]> {
    check_nome(q)?;
    let mut out = [Complex64::new(0.0, 0.0); K];
    out[0] = Complex64::new(1.0, 0.0);
    if q == 0.0 {
        return Ok(out);
    }
    let lq = q.ln();
    // terms grow until n passes |Re alpha| / (2 |ln q|)
    let peak = alpha.re.abs() / (2.0 * lq.abs());
    let mut n = 1.0_f64;
    loop {
        let tp = (n * n * lq + n * alpha).exp();
        let tm = (n * n * lq - n * alpha).exp();
        // d^k/dalpha^k picks up n^k on the + branch and (-n)^k on the - branch
        let mut nk = 1.0;
        for (k, d) in out.iter_mut().enumerate() {
            let mk = if k % 2 == 0 { nk } else { -nk };
            *d += tp * nk + tm * mk;
            nk *= n;
        }
        let scale = out[0].norm().max(f64::MIN_POSITIVE);
        if n > peak && (tp.norm() + tm.norm()) * n.powi(K as i32) < 1e-18 * scale {
            break;
        }
        n += 1.0;
        if n > 1e7 {
            return Err(Error::Divergent(q));
        }
    }
    Ok(out)
}

/// `theta(alpha, e^-h)` for `q` close to 1 through
/// `theta(alpha, e^-h) = sqrt(pi/h) e^(alpha^2/4h) theta(i pi alpha / h, e^(-pi^2/h))`.
pub fn theta_dual(alpha: Complex64, q: f64) -> Result<Complex64> {
    check_nome(q)?;
    if q == 0.0 {
        return Ok(Complex64::new(1.0, 0.0));
    }
    let h = -q.ln();
    let i = Complex64::i();
    let pre = (PI / h).sqrt() * (alpha * alpha / (4.0 * h)).exp();
    Ok(pre * theta_series(i * PI * alpha / h, (-PI * PI / h).exp())?)
}

/// Theta function with automatic switch to the dual series when `q > DUAL_SWITCH`.
pub fn theta(alpha: Complex64, q: f64) -> Result<Complex64> {
    check_nome(q)?;
    if q > DUAL_SWITCH {
        theta_dual(alpha, q)
    } else {
        theta_series(alpha, q)
    }
}

/// Both sides of the Jacobi transform at `alpha = r - hbar`, each summed directly.
///
/// Returns `(theta(r-h, e^-h), sqrt(pi/h) e^((r-h)^2/4h) theta(i pi (r-h)/h, e^(-pi^2/h)))`.
pub fn theta_jacobi_transform(r: f64, hbar: f64) -> Result<(f64, f64)> {
    let s = r - hbar;
    let lhs = theta_series(Complex64::new(s, 0.0), (-hbar).exp())?;
    let rhs = (PI / hbar).sqrt()
        * (s * s / (4.0 * hbar)).exp()
        * theta_series(Complex64::new(0.0, PI * s / hbar), (-PI * PI / hbar).exp())?;
    Ok((lhs.re, rhs.re))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    #[test]
    fn zero_nome_is_one() {
        assert_eq!(theta(c(3.7), 0.0).unwrap(), c(1.0));
        assert_eq!(theta(Complex64::new(-1.0, 2.0), 0.0).unwrap(), c(1.0));
    }

    #[test]
    fn small_nome_value() {
        // 1 + 2 (0.1 + 0.1^4 + 0.1^9 + 0.1^16)
        let oracle = 1.0 + 2.0 * (0.1 + 1e-4 + 1e-9 + 1e-16);
        let v = theta(c(0.0), 0.1).unwrap();
        assert!((v.re - oracle).abs() < 1e-15);
        assert!((v.re - 1.200200002).abs() < 1e-10);
    }

    #[test]
    fn nome_at_one_diverges() {
        assert_eq!(theta(c(0.0), 1.0).unwrap_err().code(), "DIVERGENT");
        assert_eq!(theta(c(0.0), 1.3).unwrap_err().code(), "DIVERGENT");
    }

    #[test]
    fn quasi_periodicity() {
        for &h in &[0.5f64, 1.0, 2.0] {
            let q = (-h).exp();
            for i in 0..=12 {
                let r = -3.0 + 0.5 * i as f64;
                let k = |x: f64| theta(c(x - h), q).unwrap().re;
                let rel = (k(r + 2.0 * h) - r.exp() * k(r)).abs() / k(r + 2.0 * h);
                assert!(rel < 1e-12, "h={h} r={r} rel={rel}");
            }
        }
    }

    #[test]
    fn jacobi_transform_and_symmetry() {
        for &(r, h) in &[(1.0, 1.0), (0.0, 2.0), (2.5, 0.5)] {
            let (l, rr) = theta_jacobi_transform(r, h).unwrap();
            assert!((l - rr).abs() / l < 1e-12);
        }
        let (a, _) = theta_jacobi_transform(1.0 + 0.7, 1.0).unwrap();
        let (b, _) = theta_jacobi_transform(1.0 - 0.7, 1.0).unwrap();
        assert!((a - b).abs() < 1e-14 * a);
    }

    #[test]
    fn dual_switch_agrees_with_direct() {
        let alpha = Complex64::new(0.3, 0.8);
        let q = 0.9;
        let d = theta_series(alpha, q).unwrap();
        let t = theta(alpha, q).unwrap();
        assert!((d - t).norm() < 1e-12 * d.norm());
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let a = Complex64::new(0.4, 0.2);
        let q = 0.3;
        let d = theta_series_derivs::<3>(a, q).unwrap();
        let h = 1e-5;
        let fd1 = (theta_series(a + h, q).unwrap() - theta_series(a - h, q).unwrap()) / (2.0 * h);
        let fd2 = (theta_series(a + h, q).unwrap() - 2.0 * d[0] + theta_series(a - h, q).unwrap()) / (h * h);
        assert!((d[1] - fd1).norm() < 1e-8);
        assert!((d[2] - fd2).norm() < 1e-4);
    }
}
