//! Parabolic Harnack inequality with anisotropic cylinders: for nonnegative
//! caloric u on Q = (0, (eps R)^2) x D(z0, R),
//!
//! sup_{Q-} u <= C inf_{Q+} u,
//! Q- = ((l^3 eps R)^2, (l^2 eps R)^2) x D(z0, eta R),
//! Q+ = ((l eps R)^2, (eps R)^2) x D(z0, eta R).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::geometry::{evolve_on, time_samples, KilledSetup};
use crate::error::{Error, Result};

/// Times sampled in each of Q- and Q+.
pub const WINDOW_TIMES: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PhiParameters {
    pub epsilon: f64,
    pub eta: f64,
    pub l: f64,
}

impl Default for PhiParameters {
    fn default() -> Self {
        Self {
            epsilon: 1.0,
            eta: 0.5,
            l: std::f64::consts::FRAC_1_SQRT_2,
        }
    }
}

impl PhiParameters {
    /// Time windows of Q- and Q+ for a domain of scale R.
    pub fn windows(&self, radius: f64) -> ((f64, f64), (f64, f64)) {
        let er = self.epsilon * radius;
        let l = self.l;
        (
            ((l.powi(3) * er).powi(2), (l * l * er).powi(2)),
            ((l * er).powi(2), er * er),
        )
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PhiReport {
    pub parameters: PhiParameters,
    /// Largest sup_{Q-} u / inf_{Q+} u over the kept trials.
    pub constant: f64,
    pub ratios: Vec<f64>,
    pub trials: usize,
    /// Trials with inf over Q+ numerically zero.
    pub discarded: usize,
}

impl PhiReport {
    pub fn discard_fraction(&self) -> f64 {
        self.discarded as f64 / self.trials.max(1) as f64
    }
}

/// sup over Q- and inf over Q+ of u(t) = P_t^D g (spectral coefficients).
pub fn phi_extremes(
    setup: &KilledSetup,
    coeffs: &[f64],
    params: PhiParameters,
) -> Result<(f64, f64)> {
    let dec = setup.spectral();
    let set = setup.sub_domain(params.eta * setup.domain.radius)?;
    let (minus, plus) = params.windows(setup.domain.radius);
    let sup = time_samples(minus.0, minus.1, WINDOW_TIMES)
        .into_iter()
        .flat_map(|t| evolve_on(dec, coeffs, t, &set))
        .fold(f64::NEG_INFINITY, f64::max);
    let inf = time_samples(plus.0, plus.1, WINDOW_TIMES)
        .into_iter()
        .flat_map(|t| evolve_on(dec, coeffs, t, &set))
        .fold(f64::INFINITY, f64::min);
    Ok((sup, inf))
}

/// Nonnegative data made of one to three approximate point sources placed
/// at uniformly drawn positions of the continuum domain, so that the same
/// seed gives comparable data on every level.
fn point_sources(setup: &KilledSetup, rng: &mut ChaCha8Rng) -> Result<Vec<f64>> {
    let d = &setup.domain;
    let pos = setup.graph.positions();
    let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
    for &x in &d.vertices {
        for k in 0..2 {
            lo[k] = lo[k].min(pos[x][k]);
            hi[k] = hi[k].max(pos[x][k]);
        }
    }
    let nodes = setup.ext.grid().nodes();
    let mass = setup.ext.mass();
    let mut g = vec![0.0; d.len()];
    let sources = rng.random_range(1..=3);
    for _ in 0..sources {
        let mut placed = false;
        for _ in 0..1000 {
            let p = [
                lo[0] + (hi[0] - lo[0]) * rng.random::<f64>(),
                lo[1] + (hi[1] - lo[1]) * rng.random::<f64>(),
            ];
            let y = d.radius * rng.random::<f64>();
            let weight = rng.random_range(0.5..1.0);
            let x = setup.graph.nearest_vertex(p);
            let j = d
                .layers
                .iter()
                .copied()
                .min_by(|&a, &b| (nodes[a] - y).abs().total_cmp(&(nodes[b] - y).abs()))
                .expect("domain has layers");
            let z = setup.ext.index(x, j);
            if let Some(local) = d.local(z) {
                g[local] += weight / mass[z];
                placed = true;
                break;
            }
        }
        if !placed {
            return Err(Error::invalid(
                "could not place a source inside the product domain",
            ));
        }
    }
    Ok(g)
}

pub fn phi_check(
    setup: &KilledSetup,
    params: PhiParameters,
    trials: usize,
    seed: u64,
) -> Result<PhiReport> {
    if !(params.eta > 0.0 && params.eta <= 1.0 && params.epsilon > 0.0 && params.epsilon <= 1.0) {
        return Err(Error::invalid("eta and epsilon must lie in (0, 1]"));
    }
    if !(params.l > 0.0 && params.l < 1.0) {
        return Err(Error::invalid("l must lie in (0, 1)"));
    }
    let dec = setup.spectral();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut ratios = Vec::new();
    let mut discarded = 0;
    for _ in 0..trials {
        let g = point_sources(setup, &mut rng)?;
        let (sup, inf) = phi_extremes(setup, &dec.coefficients(&g), params)?;
        if !(inf > 1e-12 * sup.abs()) {
            discarded += 1;
            continue;
        }
        ratios.push(sup / inf);
    }
    Ok(PhiReport {
        parameters: params,
        constant: ratios.iter().copied().fold(0.0, f64::max),
        ratios,
        trials,
        discarded,
    })
}
