//! Gamma function and the modified Bessel function of the second kind.

use std::f64::consts::PI;

use crate::error::{Error, Result};

pub fn gamma(x: f64) -> f64 {
    libm::tgamma(x)
}

/// Modified Bessel function of the second kind K_nu(x) for real order
/// nu in (0, 1) and x > 0.
///
/// Three regimes: the reflection formula over power series of I_{+-nu} for
/// x <= 2, Steed's continued fraction (Temme's CF2) for 2 < x <= 25, and the
/// Hankel asymptotic series beyond that.
pub fn bessel_k(nu: f64, x: f64) -> Result<f64> {
    if !(nu > 0.0 && nu < 1.0) {
        return Err(Error::invalid(format!("Bessel order {nu} outside (0, 1)")));
    }
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::invalid(format!(
            "Bessel argument {x} must be positive"
        )));
    }
    Ok(if x <= 2.0 {
        k_series(nu, x)
    } else if x <= 25.0 {
        k_continued_fraction(nu, x)
    } else {
        k_hankel(nu, x)
    })
}

fn bessel_i_series(nu: f64, x: f64) -> f64 {
    let q = 0.25 * x * x;
    let mut term = (0.5 * x).powf(nu) / gamma(nu + 1.0);
    let mut sum = term;
    for k in 1..200 {
        let kf = k as f64;
        term *= q / (kf * (kf + nu));
        sum += term;
        if term.abs() <= 1e-17 * sum.abs() {
            break;
        }
    }
    sum
}

fn k_series(nu: f64, x: f64) -> f64 {
    PI * (bessel_i_series(-nu, x) - bessel_i_series(nu, x)) / (2.0 * (nu * PI).sin())
}

// Steed's algorithm for K_mu and K_{mu+1}, |mu| <= 1/2.
fn k_continued_fraction(nu: f64, x: f64) -> f64 {
    let (mu, shift) = if nu <= 0.5 {
        (nu, false)
    } else {
        (nu - 1.0, true)
    };
    let mut b = 2.0 * (1.0 + x);
    let mut d = 1.0 / b;
    let mut h = d;
    let mut delh = d;
    let mut q1 = 0.0;
    let mut q2 = 1.0;
    let a1 = 0.25 - mu * mu;
    let mut q = a1;
    let mut c = a1;
    let mut a = -a1;
    let mut s = 1.0 + q * delh;
    for i in 1..10_000 {
        let fi = i as f64;
        a -= 2.0 * fi;
        c = -a * c / (fi + 1.0);
        let qnew = (q1 - b * q2) / a;
        q1 = q2;
        q2 = qnew;
        q += c * qnew;
        b += 2.0;
        d = 1.0 / (b + a * d);
        delh *= b * d - 1.0;
        h += delh;
        let dels = q * delh;
        s += dels;
        if (dels / s).abs() < 1e-17 {
            break;
        }
    }
    let h = a1 * h;
    let k_mu = (PI / (2.0 * x)).sqrt() * (-x).exp() / s;
    if shift {
        k_mu * (mu + x + 0.5 - h) / x
    } else {
        k_mu
    }
}

fn k_hankel(nu: f64, x: f64) -> f64 {
    let four_nu2 = 4.0 * nu * nu;
    let mut term = 1.0f64;
    let mut sum = 1.0;
    for k in 1..60 {
        let odd = (2 * k - 1) as f64;
        let next = term * (four_nu2 - odd * odd) / (k as f64 * 8.0 * x);
        if next.abs() >= term.abs() && k >= 10 {
            break;
        }
        term = next;
        sum += term;
        if term.abs() < 1e-17 * sum.abs() {
            break;
        }
    }
    (PI / (2.0 * x)).sqrt() * (-x).exp() * sum
}

#[cfg(test)]
mod tests {
    use super::*;

    // Trapezoid rule on K_nu(x) = int_0^inf exp(-x cosh u) cosh(nu u) du; the
    // integrand is entire and decays doubly exponentially, so a plain uniform
    // grid converges to machine precision.
    fn k_integral(nu: f64, x: f64) -> f64 {
        let h: f64 = 1.0 / 64.0;
        let mut sum = 0.5 * (-x).exp();
        let mut u = h;
        loop {
            let v = (-x * u.cosh()).exp() * (nu * u).cosh();
            sum += v;
            if v < 1e-300 || u > 50.0 {
                break;
            }
            u += h;
        }
        sum * h
    }

    #[test]
    fn half_order_closed_form() {
        let want = (PI / 2.0).sqrt() * (-1.0f64).exp();
        assert!((bessel_k(0.5, 1.0).unwrap() - want).abs() < 1e-12);
        assert!((want - 0.46106850).abs() < 1e-8);
        for &x in &[1e-3, 0.1, 1.9, 2.1, 7.0, 24.9, 25.1, 30.0] {
            let exact = (PI / (2.0 * x)).sqrt() * (-x).exp();
            let got = bessel_k(0.5, x).unwrap();
            assert!(((got - exact) / exact).abs() < 1e-12, "x={x}");
        }
    }

    #[test]
    fn matches_integral_representation() {
        for &nu in &[0.1, 0.3, 0.5, 0.7, 0.9] {
            for &x in &[
                1e-3, 0.01, 0.5, 1.0, 2.0, 2.0001, 3.5, 10.0, 20.0, 25.0, 26.0, 30.0,
            ] {
                let got = bessel_k(nu, x).unwrap();
                let oracle = k_integral(nu, x);
                let rel = ((got - oracle) / oracle).abs();
                assert!(
                    rel < 1e-9,
                    "nu={nu} x={x} got={got} oracle={oracle} rel={rel:e}"
                );
            }
        }
        let oracle = k_integral(0.3, 2.0);
        assert!((bessel_k(0.3, 2.0).unwrap() - oracle).abs() < 1e-8);
    }

    #[test]
    fn positive_and_decreasing() {
        for &nu in &[0.2, 0.5, 0.8] {
            let mut prev = f64::INFINITY;
            let mut x = 1e-3;
            while x < 30.0 {
                let k = bessel_k(nu, x).unwrap();
                assert!(k > 0.0 && k < prev, "nu={nu} x={x}");
                prev = k;
                x *= 1.1;
            }
        }
    }

    #[test]
    fn rejects_bad_arguments() {
        assert!(bessel_k(0.0, 1.0).is_err());
        assert!(bessel_k(1.0, 1.0).is_err());
        assert!(bessel_k(0.5, 0.0).is_err());
        assert!(bessel_k(0.5, -1.0).is_err());
    }

    #[test]
    fn gamma_values() {
        assert!((gamma(0.5) - PI.sqrt()).abs() < 1e-14);
        assert!((gamma(5.0) - 24.0).abs() < 1e-12);
        // Gamma(-s) = -Gamma(1-s)/s
        let s = 0.3;
        assert!((gamma(-s) + gamma(1.0 - s) / s).abs() < 1e-12);
    }
}
