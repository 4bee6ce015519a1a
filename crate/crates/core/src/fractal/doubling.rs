//! Fit of the volume-doubling constants (C_VD, gamma) in
//! V(x, R) <= C_VD V(y, r) ((d(x, y) + R) / r)^gamma, 0 < r <= R.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::FractalGraph;
use crate::error::{Error, Result};

/// Step of the exponent grid.
const GAMMA_STEP: f64 = 0.01;
const GAMMA_MAX: f64 = 8.0;
/// C_VD is reported on the buckets 2^{k/8}.
const C_BUCKETS_PER_OCTAVE: f64 = 8.0;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct VdSample {
    pub x: usize,
    pub y: usize,
    pub r: f64,
    pub big_r: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DoublingFit {
    pub c_vd: f64,
    pub gamma: f64,
    pub samples: usize,
}

impl DoublingFit {
    /// Largest ratio lhs / rhs over `samples`; <= 1 means the inequality holds.
    pub fn worst_ratio(&self, graph: &FractalGraph, samples: &[VdSample]) -> Result<f64> {
        let mut worst = 0.0f64;
        for s in samples {
            let (rho, ell) = log_terms(graph, s)?;
            worst = worst.max((rho - self.gamma * ell - self.c_vd.ln()).exp());
        }
        Ok(worst)
    }
}

/// Random quadruples: y = x half of the time, radii log-uniform between twice
/// the mesh size and half the diameter.
pub fn sample_quadruples(graph: &FractalGraph, count: usize, seed: u64) -> Result<Vec<VdSample>> {
    let diam = graph.diameter()?;
    let lo = (2.0 * graph.mesh()).min(0.5 * diam).ln();
    let hi = (0.5 * diam).ln();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = graph.len();
    Ok((0..count)
        .map(|_| {
            let x = rng.random_range(0..n);
            let y = if rng.random_bool(0.5) {
                x
            } else {
                rng.random_range(0..n)
            };
            let a = rng.random_range(lo..=hi).exp();
            let b = rng.random_range(lo..=hi).exp();
            VdSample {
                x,
                y,
                r: a.min(b),
                big_r: a.max(b),
            }
        })
        .collect())
}

fn log_terms(graph: &FractalGraph, s: &VdSample) -> Result<(f64, f64)> {
    if !(s.r > 0.0 && s.r <= s.big_r) {
        return Err(Error::invalid(format!(
            "need 0 < r <= R, got r={} R={}",
            s.r, s.big_r
        )));
    }
    let big = graph.ball_volume(s.x, s.big_r)?;
    let small = graph.ball_volume(s.y, s.r)?;
    let d = graph.distance(s.x, s.y)?;
    Ok(((big / small).ln(), ((d + s.big_r) / s.r).ln()))
}

/// Tightest envelope: for each gamma on the grid take the smallest C that
/// covers every sample, then keep the gamma with the least total log-slack.
/// Ties resolve to the smaller gamma. C is rounded up to its bucket.
pub fn fit_doubling(graph: &FractalGraph, samples: &[VdSample]) -> Result<DoublingFit> {
    if samples.is_empty() {
        return Err(Error::invalid("doubling fit needs at least one sample"));
    }
    let terms: Vec<(f64, f64)> = samples
        .iter()
        .map(|s| log_terms(graph, s))
        .collect::<Result<_>>()?;
    let sum_rho: f64 = terms.iter().map(|t| t.0).sum();
    let sum_ell: f64 = terms.iter().map(|t| t.1).sum();
    let count = terms.len() as f64;

    let mut best = (f64::INFINITY, 0.0, 0.0);
    let steps = (GAMMA_MAX / GAMMA_STEP).round() as usize;
    for k in 1..=steps {
        let gamma = k as f64 * GAMMA_STEP;
        let log_c = terms
            .iter()
            .map(|(rho, ell)| rho - gamma * ell)
            .fold(f64::NEG_INFINITY, f64::max)
            .max(0.0);
        let slack = count * log_c + gamma * sum_ell - sum_rho;
        if slack < best.0 - 1e-12 * slack.abs().max(1.0) {
            best = (slack, gamma, log_c);
        }
    }
    let (_, gamma, log_c) = best;
    let bucket = (log_c / std::f64::consts::LN_2 * C_BUCKETS_PER_OCTAVE - 1e-12)
        .ceil()
        .max(0.0);
    Ok(DoublingFit {
        c_vd: 2f64.powf(bucket / C_BUCKETS_PER_OCTAVE),
        gamma,
        samples: samples.len(),
    })
}

/// Samples `count` (>= 100) quadruples with `seed` and fits them.
pub fn fit_doubling_sampled(graph: &FractalGraph, count: usize, seed: u64) -> Result<DoublingFit> {
    if count < 100 {
        return Err(Error::invalid(format!(
            "doubling fit needs >= 100 samples, got {count}"
        )));
    }
    let samples = sample_quadruples(graph, count, seed)?;
    fit_doubling(graph, &samples)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fractal::{build_fractal, Family, FractalSpec};

    #[test]
    fn single_trivial_sample() {
        let g = build_fractal(FractalSpec::new(Family::Interval, 3)).unwrap();
        let s = VdSample {
            x: 2,
            y: 2,
            r: 0.3,
            big_r: 0.3,
        };
        let fit = fit_doubling(&g, &[s]).unwrap();
        assert_eq!(fit.c_vd, 1.0);
        assert!(fit.worst_ratio(&g, &[s]).unwrap() <= 1.0 + 1e-12);
    }

    #[test]
    fn interval_exponent_is_one() {
        let g = build_fractal(FractalSpec::new(Family::Interval, 6)).unwrap();
        let samples = sample_quadruples(&g, 400, 11).unwrap();
        let fit = fit_doubling(&g, &samples).unwrap();
        assert!((fit.gamma - 1.0).abs() <= 0.15, "gamma = {}", fit.gamma);
        assert!(fit.worst_ratio(&g, &samples).unwrap() <= 1.0 + 1e-12);
    }

    #[test]
    fn gasket_exponent_is_hausdorff_dimension() {
        let g = build_fractal(FractalSpec::new(Family::Gasket, 5)).unwrap();
        let samples = sample_quadruples(&g, 400, 5).unwrap();
        let fit = fit_doubling(&g, &samples).unwrap();
        let d_h = g.d_h();
        assert!(
            (fit.gamma - d_h).abs() <= 0.15 * d_h,
            "gamma = {}",
            fit.gamma
        );
        assert!(fit.worst_ratio(&g, &samples).unwrap() <= 1.0 + 1e-12);
    }

    #[test]
    fn deterministic_given_seed() {
        let g = build_fractal(FractalSpec::new(Family::Gasket, 3)).unwrap();
        let a = fit_doubling_sampled(&g, 150, 9).unwrap();
        let b = fit_doubling_sampled(&g, 150, 9).unwrap();
        assert_eq!(a, b);
        assert!(fit_doubling_sampled(&g, 10, 9).is_err());
    }
}
