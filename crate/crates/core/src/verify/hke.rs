//! Two-sided sub-Gaussian heat kernel bounds
//!
//! c1 t^{-d_H/d_W} exp(-c2 X) <= p_t(x, y) <= c3 t^{-d_H/d_W} exp(-c4 X),
//! X = (d(x, y)^{d_W} / t)^{1/(d_W - 1)},
//!
//! fitted as envelopes over a sample, and the multiplicative scaling of the
//! spectrum between consecutive levels.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::fractal::{FractalGraph, FractalSpec};
use crate::spectral::{eigenvalues, GeneratorOperator, SpectralDecomposition};

/// Number of log-spaced sample times in the scaling window.
pub const WINDOW_SAMPLES: usize = 41;

/// Off-diagonal values below this fraction of the on-diagonal value at the
/// same time are rounding noise and are left out of the exponent fit.
const OFF_DIAGONAL_FLOOR: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HkeFitReport {
    /// Least-squares slope of log p_t(x, x) against log t, pooled over points.
    pub on_diagonal_slope: f64,
    /// Per-point slopes.
    pub point_slopes: Vec<f64>,
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    pub c4: f64,
    pub window: (f64, f64),
    /// Largest relative violation of the two bounds over the sample.
    pub max_violation: f64,
    /// Off-diagonal samples used for c2, c4.
    pub pairs_used: usize,
    /// Off-diagonal samples dropped as numerically zero.
    pub pairs_dropped: usize,
}

/// The admissible scaling window [tau^{-m+1}, tau^{-2}] for a level-m graph.
pub fn scaling_window(graph: &FractalGraph) -> Result<(f64, f64)> {
    let tau = graph.scaling().time_scale;
    let m = graph.level() as i32;
    if m < 4 {
        return Err(Error::invalid(format!(
            "scaling window needs level >= 4, got {m}"
        )));
    }
    Ok((tau.powi(1 - m), tau.powi(-2)))
}

/// Log-spaced sample times covering `window`.
pub fn window_times(window: (f64, f64), count: usize) -> Vec<f64> {
    let (lo, hi) = window;
    if count == 1 {
        return vec![lo];
    }
    (0..count)
        .map(|i| lo * (hi / lo).powf(i as f64 / (count - 1) as f64))
        .collect()
}

/// Default evaluation points: the self-similar fixed points (outer corners)
/// for the gasket and the Vicsek set, the midpoint for the interval.
pub fn default_points(graph: &FractalGraph) -> Vec<usize> {
    use crate::fractal::Family;
    let h = 3f64.sqrt() / 2.0;
    let targets: Vec<[f64; 2]> = match graph.family() {
        Family::Interval => vec![[0.5, 0.0]],
        Family::Gasket => vec![[0.0, 0.0], [1.0, 0.0], [0.5, h]],
        Family::Vicsek => vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [1.0, 1.0]],
    };
    let mut pts: Vec<usize> = targets
        .into_iter()
        .map(|p| graph.nearest_vertex(p))
        .collect();
    pts.dedup();
    pts
}

fn ls_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
    }
    sxy / sxx
}

/// Fits the on-diagonal slope and the envelope constants over `points`
/// (diagonal) and all pairs (x, y), x in `points` (off-diagonal), at
/// log-spaced times in `window`.
pub fn fit_on_diagonal(
    dec: &SpectralDecomposition,
    graph: &FractalGraph,
    points: &[usize],
    window: (f64, f64),
) -> Result<HkeFitReport> {
    let n = graph.len();
    if dec.dim() != n {
        return Err(Error::invalid("decomposition and graph differ in size"));
    }
    if points.is_empty() || points.iter().any(|&x| x >= n) {
        return Err(Error::invalid(
            "evaluation points must be nonempty vertex ids",
        ));
    }
    let (lo, hi) = scaling_window(graph)?;
    let (t_lo, t_hi) = window;
    // tiny slack for windows computed by the same powers
    if !(t_lo < t_hi) || t_lo < lo * (1.0 - 1e-12) || t_hi > hi * (1.0 + 1e-12) {
        return Err(Error::invalid(format!(
            "window [{t_lo:e}, {t_hi:e}] outside the resolved range [{lo:e}, {hi:e}]"
        )));
    }
    let alpha = graph.d_h() / graph.d_w();
    let d_w = graph.d_w();
    let times = window_times(window, WINDOW_SAMPLES);
    let log_t: Vec<f64> = times.iter().map(|t| t.ln()).collect();
    let metric = graph.metric()?;

    // heat kernel rows p_t(x, .) for every point and time
    let rows: Vec<Vec<Vec<f64>>> = points
        .iter()
        .map(|&x| {
            times
                .iter()
                .map(|&t| {
                    let mut delta = vec![0.0; n];
                    delta[x] = 1.0 / dec.measure()[x];
                    dec.semigroup_apply(t, &delta)
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;

    let mut point_slopes = Vec::with_capacity(points.len());
    let (mut c1, mut c3) = (f64::INFINITY, 0.0f64);
    for (p, &x) in points.iter().enumerate() {
        let diag: Vec<f64> = rows[p].iter().map(|r| r[x]).collect();
        if diag.iter().any(|&v| !(v > 0.0)) {
            return Err(Error::invalid("non-positive on-diagonal heat kernel"));
        }
        let logs: Vec<f64> = diag.iter().map(|v| v.ln()).collect();
        point_slopes.push(ls_slope(&log_t, &logs));
        for (&v, &t) in diag.iter().zip(&times) {
            let scaled = v * t.powf(alpha);
            c1 = c1.min(scaled);
            c3 = c3.max(scaled);
        }
    }
    // pooled slope with a common intercept per point equals the mean slope
    let on_diagonal_slope = point_slopes.iter().sum::<f64>() / point_slopes.len() as f64;

    let (mut c2, mut c4) = (0.0f64, f64::INFINITY);
    let mut samples = Vec::new();
    let mut pairs_dropped = 0;
    for (p, &x) in points.iter().enumerate() {
        for (k, &t) in times.iter().enumerate() {
            let row = &rows[p][k];
            let diag = row[x];
            for y in (0..n).filter(|&y| y != x) {
                let v = row[y];
                if !(v > OFF_DIAGONAL_FLOOR * diag) {
                    pairs_dropped += 1;
                    continue;
                }
                let big_x = (metric.get(x, y).powf(d_w) / t).powf(1.0 / (d_w - 1.0));
                let big_y = -(v * t.powf(alpha)).ln();
                c2 = c2.max((big_y + c1.ln()) / big_x);
                c4 = c4.min((big_y + c3.ln()) / big_x);
                samples.push((big_x, big_y));
            }
        }
    }
    if samples.is_empty() {
        c4 = 0.0;
    }
    // relative violation of both bounds over the full sample (diagonal: X = 0)
    let mut max_violation = 0.0f64;
    let mut check = |big_x: f64, big_y: f64| {
        let scaled = (-big_y).exp();
        let lower = c1 * (-c2 * big_x).exp();
        let upper = c3 * (-c4 * big_x).exp();
        max_violation = max_violation
            .max((lower - scaled) / lower)
            .max((scaled - upper) / upper);
    };
    for (p, &x) in points.iter().enumerate() {
        for (k, &t) in times.iter().enumerate() {
            check(0.0, -(rows[p][k][x] * t.powf(alpha)).ln());
        }
    }
    for &(bx, by) in &samples {
        check(bx, by);
    }
    Ok(HkeFitReport {
        on_diagonal_slope,
        point_slopes,
        c1,
        c2,
        c3,
        c4,
        window,
        max_violation: max_violation.max(0.0),
        pairs_used: samples.len(),
        pairs_dropped,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DecimationReport {
    pub level: u32,
    pub time_scale: f64,
    /// Observed level-to-level factor of the unnormalized graph spectrum,
    /// tau lambda_k(m) / lambda_k(m + 1) (the generators carry the factor
    /// tau^m), for the lowest nonzero modes.
    pub ratios: Vec<f64>,
    /// max_k |ratio_k / tau - 1|.
    pub max_relative_error: f64,
    /// log(mean ratio) / log(1/contraction).
    pub fitted_walk_dimension: f64,
}

/// Compares the lowest `modes` nonzero eigenvalues at levels m and m + 1.
pub fn decimation_ratios(spec: FractalSpec, modes: usize) -> Result<DecimationReport> {
    if modes == 0 {
        return Err(Error::invalid("need at least one mode"));
    }
    let coarse = crate::fractal::build_fractal(spec)?;
    let fine = crate::fractal::build_fractal(FractalSpec::new(spec.family, spec.level + 1))?;
    let a = eigenvalues(&GeneratorOperator::from_graph(&coarse)?)?;
    let b = eigenvalues(&GeneratorOperator::from_graph(&fine)?)?;
    if a.len() <= modes {
        return Err(Error::invalid("coarse level has too few modes"));
    }
    let scaling = spec.family.scaling();
    let tau = scaling.time_scale;
    let ratios: Vec<f64> = (1..=modes).map(|k| tau * a[k] / b[k]).collect();
    let max_relative_error = ratios
        .iter()
        .map(|r| (r / tau - 1.0).abs())
        .fold(0.0, f64::max);
    let mean = ratios.iter().sum::<f64>() / ratios.len() as f64;
    Ok(DecimationReport {
        level: spec.level,
        time_scale: tau,
        ratios,
        max_relative_error,
        fitted_walk_dimension: mean.ln() / (1.0 / scaling.contraction).ln(),
    })
}
