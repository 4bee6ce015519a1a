//! Trapezoid quadrature on a logarithmic time grid.
//!
//! Improper integrals over t in (0, inf) are mapped through t = e^u and
//! summed with the trapezoid rule on a uniform u-grid. For integrands that
//! decay exponentially (or faster) in u at both ends this converges
//! geometrically in the node count.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::special::gamma;

/// User-facing quadrature settings.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadratureConfig {
    pub nodes: usize,
    pub tail_tol: f64,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self {
            nodes: 2000,
            tail_tol: 1e-12,
        }
    }
}

/// A concrete log-grid: bounds for u = ln t, node count and tail tolerance.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadratureSpec {
    pub u_min: f64,
    pub u_max: f64,
    pub nodes: usize,
    pub tail_tol: f64,
}

impl QuadratureSpec {
    pub fn new(t_min: f64, t_max: f64, config: QuadratureConfig) -> Self {
        assert!(
            t_min > 0.0 && t_max > t_min,
            "bad log-grid bounds [{t_min}, {t_max}]"
        );
        Self {
            u_min: t_min.ln(),
            u_max: t_max.ln(),
            nodes: config.nodes.max(3),
            tail_tol: config.tail_tol,
        }
    }

    pub fn step(&self) -> f64 {
        (self.u_max - self.u_min) / (self.nodes - 1) as f64
    }

    /// Nodes t_k and trapezoid weights for `dt` (the Jacobian e^u is folded in).
    pub fn nodes_and_weights(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        let h = self.step();
        let last = self.nodes - 1;
        (0..self.nodes).map(move |k| {
            let t = (self.u_min + k as f64 * h).exp();
            let w = if k == 0 || k == last { 0.5 * h } else { h };
            (t, w * t)
        })
    }

    /// Integrates `g` over t in (0, inf). The neglected tails are estimated
    /// from the decay rate between the two outermost nodes at each end and
    /// must stay below `tail_tol` relative to the result.
    pub fn integrate<G: Fn(f64) -> f64>(&self, g: G) -> Result<f64> {
        let h = self.step();
        let mut sum = 0.0;
        let mut first = [0.0; 2];
        let mut last = [0.0; 2];
        for (k, (t, w)) in self.nodes_and_weights().enumerate() {
            let v = g(t);
            sum += w * v;
            if k < 2 {
                first[k] = (v * t).abs();
            }
            if k + 2 >= self.nodes {
                last[k + 2 - self.nodes] = (v * t).abs();
            }
        }
        let tail = tail_estimate(first[0], first[1], h) + tail_estimate(last[1], last[0], h);
        let scale = sum.abs().max(f64::MIN_POSITIVE);
        if tail > self.tail_tol * scale && tail > 0.0 {
            return Err(Error::Quadrature {
                defect: tail / scale,
                tolerance: self.tail_tol,
            });
        }
        Ok(sum)
    }
}

/// Decay rate (per unit u) assumed when the two outermost samples do not
/// decrease, e.g. when both sit at rounding-noise level.
const MIN_TAIL_RATE: f64 = 1e-2;

// Geometric extrapolation of the integrand beyond the grid edge: `edge` is the
// |integrand| (per du) at the outermost node, `inner` at its neighbour.
fn tail_estimate(edge: f64, inner: f64, h: f64) -> f64 {
    if edge == 0.0 {
        return 0.0;
    }
    let rate = if inner > edge {
        ((inner / edge).ln() / h).max(MIN_TAIL_RATE)
    } else {
        MIN_TAIL_RATE
    };
    edge / rate
}

/// |Gamma(-s)| = Gamma(1 - s) / s.
pub fn abs_gamma_neg(s: f64) -> f64 {
    gamma(1.0 - s) / s
}

/// lambda^s through the Balakrishnan integral
/// (1/|Gamma(-s)|) int_0^inf (1 - e^{-lambda t}) t^{-1-s} dt.
pub fn balakrishnan_power(lambda: f64, s: f64, config: QuadratureConfig) -> Result<f64> {
    if !(lambda > 0.0) {
        return Err(Error::invalid(format!(
            "Balakrishnan needs lambda > 0, got {lambda}"
        )));
    }
    check_open_unit(s)?;
    let spec = balakrishnan_grid(lambda, s, config);
    let integral = spec.integrate(|t| -(-lambda * t).exp_m1() * t.powf(-1.0 - s))?;
    Ok(integral / abs_gamma_neg(s))
}

// In v = lambda t the du-integrand behaves like v^{1-s} near 0 and v^{-s}
// near infinity; cut both where they fall below tol/100.
fn balakrishnan_grid(lambda: f64, s: f64, config: QuadratureConfig) -> QuadratureSpec {
    let tol = config.tail_tol * 1e-2;
    let v_min = tol.powf(1.0 / (1.0 - s));
    let v_max = tol.powf(-1.0 / s);
    QuadratureSpec::new(v_min / lambda, v_max / lambda, config)
}

pub(crate) fn check_open_unit(s: f64) -> Result<()> {
    if s > 0.0 && s < 1.0 {
        Ok(())
    } else {
        Err(Error::invalid(format!("exponent s = {s} outside (0, 1)")))
    }
}

pub(crate) fn check_half_open_unit(s: f64) -> Result<()> {
    if s > 0.0 && s <= 1.0 {
        Ok(())
    } else {
        Err(Error::invalid(format!("exponent s = {s} outside (0, 1]")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn balakrishnan_examples() {
        let q = QuadratureConfig::default();
        assert!((balakrishnan_power(4.0, 0.5, q).unwrap() - 2.0).abs() < 1e-8);
        for &s in &[0.1, 0.3, 0.5, 0.7, 0.9] {
            assert!((balakrishnan_power(1.0, s, q).unwrap() - 1.0).abs() < 1e-8);
        }
        let got = balakrishnan_power(3.0, 0.3, q).unwrap();
        assert!((got - 3f64.powf(0.3)).abs() < 1e-8);
        assert!((got - 1.390_389_17).abs() < 1e-8);
    }

    #[test]
    fn balakrishnan_wide_range() {
        let q = QuadratureConfig::default();
        for &lambda in &[1e-4, 0.37, 9.8, 1e3, 1e6] {
            for &s in &[0.3, 0.5, 0.7] {
                let got = balakrishnan_power(lambda, s, q).unwrap();
                let want = f64::powf(lambda, s);
                assert!(((got - want) / want).abs() < 1e-10, "lambda={lambda} s={s}");
            }
        }
    }

    #[test]
    fn tail_violation_is_reported() {
        let spec = QuadratureSpec::new(1e-2, 1e2, QuadratureConfig::default());
        // 1/(1+t)^2 per dt, du-integrand ~ t^{-1} at the top: clearly truncated
        let err = spec
            .integrate(|t| 1.0 / ((1.0 + t) * (1.0 + t)))
            .unwrap_err();
        assert!(matches!(err, Error::Quadrature { .. }));
    }

    #[test]
    fn rejects_bad_exponents() {
        let q = QuadratureConfig::default();
        assert!(balakrishnan_power(1.0, 0.0, q).is_err());
        assert!(balakrishnan_power(1.0, 1.0, q).is_err());
        assert!(balakrishnan_power(0.0, 0.5, q).is_err());
    }
}
