//! Besov-type seminorms built from the pairwise increment mass
//! D(f, r) = sum over ordered pairs with d(x, y) < r of |f(x) - f(y)|^2 mu(x) mu(y).

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fractal::FractalGraph;
use crate::quadrature::check_open_unit;
use crate::spectral::SpectralDecomposition;

/// Per-radius increment masses and the resulting seminorm.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BesovReport {
    /// Dyadic radii, largest first.
    pub radii: Vec<f64>,
    /// D(f, r) for each radius.
    pub values: Vec<f64>,
    pub alpha: f64,
    pub beta: f64,
    /// N = max_r D(f, r) / r^{alpha + beta}.
    pub seminorm: f64,
    pub maximizing_radius: f64,
}

/// D(f, r) for a single radius.
pub fn besov_d(graph: &FractalGraph, f: &[f64], r: f64) -> Result<f64> {
    Ok(besov_profile(graph, f, &[r])?[0])
}

/// D(f, r) for several radii in one pass over the pairs.
pub fn besov_profile(graph: &FractalGraph, f: &[f64], radii: &[f64]) -> Result<Vec<f64>> {
    let n = graph.len();
    if f.len() != n {
        return Err(Error::invalid("function length differs from vertex count"));
    }
    if radii.iter().any(|&r| !(r > 0.0)) {
        return Err(Error::invalid("radii must be positive"));
    }
    let metric = graph.metric()?;
    let mu = graph.measure();
    let rows = crate::par::map_indices(n, |x| {
        let mut acc = vec![0.0; radii.len()];
        let row = metric.row(x);
        for y in 0..n {
            if y == x {
                continue;
            }
            let w = (f[x] - f[y]).powi(2) * mu[x] * mu[y];
            for (a, &r) in acc.iter_mut().zip(radii) {
                if row[y] < r {
                    *a += w;
                }
            }
        }
        acc
    });
    let mut total = vec![0.0; radii.len()];
    for row in rows {
        for (t, v) in total.iter_mut().zip(row) {
            *t += v;
        }
    }
    Ok(total)
}

/// Radii 2^{-k} diam for k = 0..=level.
pub fn dyadic_radii(graph: &FractalGraph) -> Result<Vec<f64>> {
    let diam = graph.diameter()?;
    Ok((0..=graph.level())
        .map(|k| diam * 0.5f64.powi(k as i32))
        .collect())
}

/// N_{alpha, beta}(f) over the dyadic radius set.
pub fn besov_norm(graph: &FractalGraph, f: &[f64], alpha: f64, beta: f64) -> Result<BesovReport> {
    let radii = dyadic_radii(graph)?;
    let values = besov_profile(graph, f, &radii)?;
    let (mut seminorm, mut maximizing_radius) = (0.0, radii[0]);
    for (&r, &d) in radii.iter().zip(&values) {
        let q = d / r.powf(alpha + beta);
        if q > seminorm {
            seminorm = q;
            maximizing_radius = r;
        }
    }
    Ok(BesovReport {
        radii,
        values,
        alpha,
        beta,
        seminorm,
        maximizing_radius,
    })
}

/// E^(s)(f, f) = sum_i lambda_i^s <f, phi_i>^2 for s in (0, 1).
pub fn fractional_energy(dec: &SpectralDecomposition, s: f64, f: &[f64]) -> Result<f64> {
    check_open_unit(s)?;
    dec.fractional_energy(s, f)
}

/// Ratios E^(s)(f,f) / N_{d_H, s d_W}(f) over an ensemble.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EquivalenceReport {
    pub s: f64,
    pub alpha: f64,
    pub beta: f64,
    pub ratios: Vec<f64>,
    pub min: f64,
    pub max: f64,
    pub spread: f64,
    /// Ensemble members skipped as constant.
    pub excluded: usize,
}

pub fn equivalence_ratio(
    graph: &FractalGraph,
    dec: &SpectralDecomposition,
    s: f64,
    ensemble: &[Vec<f64>],
) -> Result<EquivalenceReport> {
    check_open_unit(s)?;
    let alpha = graph.d_h();
    let beta = s * graph.d_w();
    let mut ratios = Vec::new();
    let mut excluded = 0;
    for f in ensemble {
        let e = fractional_energy(dec, s, f)?;
        let n = besov_norm(graph, f, alpha, beta)?.seminorm;
        let scale = f
            .iter()
            .fold(0.0f64, |m, v| m.max(v.abs()))
            .max(f64::MIN_POSITIVE);
        if n <= 1e-24 * scale * scale || e <= 1e-24 * scale * scale {
            excluded += 1;
            continue;
        }
        ratios.push(e / n);
    }
    if ratios.is_empty() {
        return Err(Error::invalid("ensemble contains no nonconstant function"));
    }
    let min = ratios.iter().copied().fold(f64::INFINITY, f64::min);
    let max = ratios.iter().copied().fold(0.0, f64::max);
    Ok(EquivalenceReport {
        s,
        alpha,
        beta,
        ratios,
        min,
        max,
        spread: max / min,
        excluded,
    })
}

/// Seeded ensemble: `random` functions with spectral coefficients
/// xi_i / (1 + lambda_i), xi_i standard normal (constant mode dropped),
/// followed by the eigenfunctions phi_1 .. phi_eigen.
pub fn spectral_ensemble(
    dec: &SpectralDecomposition,
    random: usize,
    eigen: usize,
    seed: u64,
) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(random + eigen);
    for _ in 0..random {
        let coeffs: Vec<f64> = dec
            .values()
            .iter()
            .enumerate()
            .map(|(i, &l)| {
                let xi: f64 = StandardNormal.sample(&mut rng);
                if i == 0 {
                    0.0
                } else {
                    xi / (1.0 + l)
                }
            })
            .collect();
        out.push(dec.synthesize(&coeffs));
    }
    for i in 1..=eigen.min(dec.dim().saturating_sub(1)) {
        out.push(dec.vector(i).to_vec());
    }
    out
}
