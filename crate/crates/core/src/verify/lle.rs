//! Local lower estimate for the killed extended heat kernel:
//!
//! q_t^D(z, z') >= c / (nu_a(B(y0, sqrt t)) t^{d_H/d_W})
//! for z, z' in D(z0, eps sqrt t), t <= (eps R)^2.

use serde::Serialize;

use super::geometry::KilledSetup;
use crate::error::{Error, Result};
use crate::extension::nu_a_ball;

/// An entry counts as positive only above this multiple of the sum of the
/// absolute values of its spectral terms.
const POSITIVITY_MARGIN: f64 = 1e-13;

/// Descending default epsilon grid.
pub const DEFAULT_EPSILONS: [f64; 9] = [1.0, 0.8, 0.6, 0.4, 0.3, 0.2, 0.15, 0.1, 0.05];

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LleReport {
    pub epsilons: Vec<f64>,
    /// Normalized minimum for each epsilon (0 when some entry is not
    /// resolved as positive).
    pub minima: Vec<f64>,
    /// Largest epsilon with a strictly positive minimum.
    pub epsilon_star: Option<f64>,
    pub c_star: Option<f64>,
    /// Global time grid; each epsilon uses the times t <= (eps R)^2.
    pub times: Vec<f64>,
}

impl LleReport {
    pub fn positive(&self) -> bool {
        self.c_star.is_some_and(|c| c > 0.0)
    }
}

/// Log-spaced times from (eps_min R)^2 / 4 to R^2.
pub fn lle_times(radius: f64, eps_min: f64, count: usize) -> Vec<f64> {
    let lo = (eps_min * radius).powi(2) / 4.0;
    let hi = radius * radius;
    (0..count)
        .map(|i| lo * (hi / lo).powf(i as f64 / (count - 1).max(1) as f64))
        .collect()
}

/// Scans `epsilons` (any order; reported descending).
pub fn lle_check(setup: &KilledSetup, epsilons: &[f64], time_count: usize) -> Result<LleReport> {
    if epsilons.is_empty() || epsilons.iter().any(|&e| !(e > 0.0 && e <= 1.0)) {
        return Err(Error::invalid("epsilons must lie in (0, 1]"));
    }
    if time_count < 2 {
        return Err(Error::invalid("need at least two sample times"));
    }
    let mut eps = epsilons.to_vec();
    eps.sort_by(|a, b| b.total_cmp(a));
    eps.dedup();
    let radius = setup.domain.radius;
    let y0 = setup.domain.y0;
    let times = lle_times(radius, *eps.last().unwrap(), time_count);
    let alpha = setup.graph.d_h() / setup.graph.d_w();
    let a = setup.ext.grid().weight_exponent();
    let dec = setup.spectral();
    let vals = dec.values();
    let vecs = dec.vectors();

    let minima = eps
        .iter()
        .map(|&e| {
            let mut best = f64::INFINITY;
            for &t in times
                .iter()
                .filter(|&&t| t <= (e * radius).powi(2) * (1.0 + 1e-12))
            {
                let set = setup.sub_domain(e * t.sqrt())?;
                let scale = nu_a_ball(a, y0, t.sqrt()) * t.powf(alpha);
                let w: Vec<f64> = vals.iter().map(|&l| (-l * t).exp()).collect();
                for (p, &z) in set.iter().enumerate() {
                    for &zp in &set[p..] {
                        let (mut q, mut abs) = (0.0, 0.0);
                        for (i, wi) in w.iter().enumerate() {
                            let term = wi * vecs[(z, i)] * vecs[(zp, i)];
                            q += term;
                            abs += term.abs();
                        }
                        let v = if q > POSITIVITY_MARGIN * abs {
                            q * scale
                        } else {
                            0.0
                        };
                        best = best.min(v);
                    }
                }
            }
            Ok(if best.is_finite() { best } else { 0.0 })
        })
        .collect::<Result<Vec<f64>>>()?;

    let star = eps.iter().zip(&minima).find(|(_, &m)| m > 0.0);
    Ok(LleReport {
        epsilon_star: star.map(|(&e, _)| e),
        c_star: star.map(|(_, &m)| m),
        epsilons: eps,
        minima,
        times,
    })
}
