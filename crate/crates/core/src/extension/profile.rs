//! Per-mode extension profile
//!
//! psi_s(lambda, y) = y^{2s}/(4^s Gamma(s)) int_0^inf e^{-lambda t} e^{-y^2/4t} t^{-1-s} dt,
//!
//! the factor by which the eigenmode with eigenvalue lambda is carried to
//! height y. Substituting t = y^2 v / 4 removes the prefactor:
//!
//! psi_s(lambda, y) = (1/Gamma(s)) int_0^inf exp(-(z^2/4) v - 1/v) v^{-1-s} dv, z = sqrt(lambda) y.

use crate::error::{Error, Result};
use crate::quadrature::{check_open_unit, QuadratureConfig, QuadratureSpec};
use crate::special::{bessel_k, gamma};

/// Margin (in e-folds below the peak) at which the v-grid is cut.
const CUT_NATS: f64 = 50.0;

/// Below this z the defect 1 - psi is integrated directly instead of being
/// formed by subtraction.
const DEFECT_SWITCH: f64 = 1.0;

fn check_args(lambda: f64, s: f64, y: f64) -> Result<()> {
    check_open_unit(s)?;
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(Error::invalid(format!(
            "eigenvalue must be >= 0, got {lambda}"
        )));
    }
    if !(y >= 0.0 && y.is_finite()) {
        return Err(Error::invalid(format!("height must be >= 0, got {y}")));
    }
    Ok(())
}

/// psi_s(lambda, y) by log-grid quadrature.
pub fn per_mode_profile(lambda: f64, s: f64, y: f64, config: QuadratureConfig) -> Result<f64> {
    check_args(lambda, s, y)?;
    if y == 0.0 {
        return Ok(1.0);
    }
    let z = lambda.sqrt() * y;
    let beta = 0.25 * z * z;
    let tol = config.tail_tol * 1e-2;
    let v_lo = 1.0 / (z + CUT_NATS);
    let v_pow = (tol * s * gamma(s)).powf(-1.0 / s);
    let v_hi = if beta > 0.0 {
        ((z + CUT_NATS) / beta).min(v_pow)
    } else {
        v_pow
    };
    let spec = QuadratureSpec::new(v_lo, v_hi.max(v_lo * 10.0), config);
    let integral = spec.integrate(|v| (-beta * v - 1.0 / v).exp() * v.powf(-1.0 - s))?;
    Ok(integral / gamma(s))
}

/// 1 - psi_s(lambda, y) without cancellation for small sqrt(lambda) y:
/// (1/Gamma(s)) int_0^inf (1 - e^{-(z^2/4) v}) e^{-1/v} v^{-1-s} dv.
pub fn profile_defect(lambda: f64, s: f64, y: f64, config: QuadratureConfig) -> Result<f64> {
    check_args(lambda, s, y)?;
    if y == 0.0 || lambda == 0.0 {
        return Ok(0.0);
    }
    let z = lambda.sqrt() * y;
    if z >= DEFECT_SWITCH {
        return Ok(1.0 - per_mode_profile(lambda, s, y, config)?);
    }
    let beta = 0.25 * z * z;
    let tol = config.tail_tol * 1e-2;
    let v_lo = 1.0 / (z + CUT_NATS);
    // the integrand tends to v^{-1-s}; its tail v^{-s}/s must be small
    // against the value ~ beta^s Gamma(1-s)/(s Gamma(s))
    let v_hi = (tol * gamma(1.0 - s) / gamma(s)).powf(-1.0 / s) / beta;
    let spec = QuadratureSpec::new(v_lo, v_hi, config);
    let integral =
        spec.integrate(|v| -(-beta * v).exp_m1() * (-1.0 / v).exp() * v.powf(-1.0 - s))?;
    Ok(integral / gamma(s))
}

/// psi_s(lambda, y) = (2^{1-s}/Gamma(s)) z^s K_s(z), z = sqrt(lambda) y.
pub fn per_mode_profile_bessel(lambda: f64, s: f64, y: f64) -> Result<f64> {
    check_args(lambda, s, y)?;
    let z = lambda.sqrt() * y;
    if z == 0.0 {
        return Ok(1.0);
    }
    if z > 700.0 {
        return Ok(0.0);
    }
    Ok(2f64.powf(1.0 - s) / gamma(s) * z.powf(s) * bessel_k(s, z)?)
}
