//! Oscillation decay of caloric functions over shrinking cylinders:
//! osc_{C(delta R)} u <= theta osc_{C(R)} u with theta < 1.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::geometry::{evolve_on, oscillation, AnisotropicCylinder, KilledSetup};
use crate::error::{Error, Result};

/// Times sampled per cylinder.
pub const CYLINDER_TIMES: usize = 12;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OscillationReport {
    pub delta: f64,
    /// Worst observed ratio over the non-degenerate trials.
    pub theta: f64,
    pub ratios: Vec<f64>,
    /// osc over C(R) and C(delta R) for the worst trial.
    pub outer_osc: f64,
    pub inner_osc: f64,
    /// Hoelder exponent log(theta) / log(delta), capped at 1.
    pub alpha: f64,
    pub trials: usize,
    pub degenerate: usize,
}

/// delta = eps^2 / sqrt 2 from the local lower estimate's epsilon.
pub fn delta_from_epsilon(eps: f64) -> f64 {
    eps * eps / 2f64.sqrt()
}

/// The cylinder of scale R placed after a quarter-depth of free evolution,
/// so that the initial data are not part of it.
pub fn standard_cylinder(radius: f64) -> AnisotropicCylinder {
    AnisotropicCylinder {
        t0: 1.25 * radius * radius,
        radius,
    }
}

/// (osc over C(R), osc over C(delta R)) of u(t) = P_t^D g, g given by its
/// spectral coefficients.
pub fn caloric_oscillations(
    setup: &KilledSetup,
    coeffs: &[f64],
    cylinder: AnisotropicCylinder,
    delta: f64,
) -> Result<(f64, f64)> {
    let dec = setup.spectral();
    let mut out = [0.0; 2];
    for (slot, cyl) in out.iter_mut().zip([cylinder, cylinder.shrink(delta)]) {
        let set = setup.sub_domain(cyl.radius)?;
        let values: Vec<f64> = cyl
            .times(CYLINDER_TIMES)
            .into_iter()
            .flat_map(|t| evolve_on(dec, coeffs, t, &set))
            .collect();
        *slot = oscillation(values);
    }
    Ok((out[0], out[1]))
}

/// Runs `trials` caloric functions from seeded uniform(-1, 1) data.
pub fn oscillation_check(
    setup: &KilledSetup,
    cylinder: AnisotropicCylinder,
    delta: f64,
    trials: usize,
    seed: u64,
) -> Result<OscillationReport> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::invalid(format!(
            "delta must lie in (0, 1), got {delta}"
        )));
    }
    if cylinder.radius > setup.domain.radius * (1.0 + 1e-12) || cylinder.t0 < cylinder.depth() {
        return Err(Error::invalid(
            "cylinder must lie inside the product domain after time 0",
        ));
    }
    let dec = setup.spectral();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let data: Vec<Vec<f64>> = (0..trials)
        .map(|_| {
            (0..dec.dim())
                .map(|_| rng.random_range(-1.0..1.0))
                .collect()
        })
        .collect();
    let mut ratios = Vec::new();
    let mut degenerate = 0;
    let (mut theta, mut outer_osc, mut inner_osc) = (0.0f64, 0.0, 0.0);
    for g in &data {
        let coeffs = dec.coefficients(g);
        let (outer, inner) = caloric_oscillations(setup, &coeffs, cylinder, delta)?;
        let scale = g.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if !(outer > 1e-12 * scale) {
            degenerate += 1;
            continue;
        }
        let ratio = inner / outer;
        if ratio >= theta {
            theta = ratio;
            outer_osc = outer;
            inner_osc = inner;
        }
        ratios.push(ratio);
    }
    let alpha = if ratios.is_empty() {
        0.0
    } else {
        (theta.ln() / delta.ln()).min(1.0)
    };
    Ok(OscillationReport {
        delta,
        theta,
        ratios,
        outer_osc,
        inner_osc,
        alpha,
        trials,
        degenerate,
    })
}
