//! Elliptic Harnack inequality and Hoelder decay for nonnegative solutions
//! of (-L)^s u = 0 in a ball with prescribed exterior values.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::dirichlet::{solve_fractional_dirichlet, DirichletProblem};
use crate::error::{Error, Result};
use crate::extension::{dtn, DtnOptions};
use crate::fractal::FractalGraph;
use crate::spectral::SpectralDecomposition;

/// Families of nonnegative exterior data.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum ExteriorData {
    /// Indicator of the third of the exterior vertices farthest from x0.
    FarThird,
    /// Independent uniform(0, 1) values.
    Random {
        seed: u64,
    },
    Constant(f64),
}

impl ExteriorData {
    pub fn label(&self) -> String {
        match self {
            ExteriorData::FarThird => "far_third".into(),
            ExteriorData::Random { seed } => format!("random_{seed}"),
            ExteriorData::Constant(c) => format!("constant_{c}"),
        }
    }

    fn values(&self, graph: &FractalGraph, x0: usize, exterior: &[usize]) -> Result<Vec<f64>> {
        let n = graph.len();
        let mut f = vec![0.0; n];
        match *self {
            ExteriorData::FarThird => {
                let row = graph.metric()?.row(x0);
                let mut ext = exterior.to_vec();
                ext.sort_by(|&a, &b| row[b].total_cmp(&row[a]).then(a.cmp(&b)));
                let k = ext.len().div_ceil(3);
                ext[..k].iter().for_each(|&x| f[x] = 1.0);
            }
            ExteriorData::Random { seed } => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                f.iter_mut().for_each(|v| *v = rng.random::<f64>());
            }
            ExteriorData::Constant(c) => {
                if c < 0.0 {
                    return Err(Error::invalid("exterior data must be nonnegative"));
                }
                f.iter_mut().for_each(|v| *v = c);
            }
        }
        Ok(f)
    }
}

/// Omega = B(x0, R) with the given exterior data.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct HarnackConfig {
    pub x0: usize,
    pub radius: f64,
    pub data: ExteriorData,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HarnackRun {
    pub x0: usize,
    pub radius: f64,
    pub data: String,
    pub sup: f64,
    pub inf: f64,
    /// sup / inf over B(x0, eta R); None when degenerate.
    pub ratio: Option<f64>,
    pub degenerate: bool,
    /// Radii 2^{-k} eta R of the nested balls and the oscillation of u on them.
    pub radii: Vec<f64>,
    pub osc: Vec<f64>,
    /// Slope of log osc_k against log(r_k^{2/d_W} / R), r_k = 2^{-k} eta R.
    pub alpha_raw: Option<f64>,
    /// alpha_raw capped at 1.
    pub alpha: Option<f64>,
    /// Slope of log osc_k against log r_k: the exponent in the metric.
    pub metric_exponent: Option<f64>,
    /// max over Omega of the Neumann trace of the extension, relative to
    /// its maximum over all vertices.
    pub trace_residual: f64,
    pub solver_residual: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HarnackReport {
    pub s: f64,
    pub eta: f64,
    pub runs: Vec<HarnackRun>,
    /// Largest ratio over non-degenerate runs.
    pub worst_ratio: Option<f64>,
    pub alpha_min: Option<f64>,
    pub alpha_max: Option<f64>,
    pub trace_residual_max: f64,
}

/// Default inner-ball factor.
pub const DEFAULT_ETA: f64 = 0.5;

fn slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let num: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let den: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    num / den
}

/// Oscillation decay over nested balls.
#[derive(Clone, Debug, PartialEq)]
pub struct HolderFit {
    pub radii: Vec<f64>,
    pub osc: Vec<f64>,
    /// Slope of log osc against log(r^{2/d_W} / R).
    pub alpha_raw: Option<f64>,
    /// Slope of log osc against log r.
    pub metric_exponent: Option<f64>,
}

/// Hoelder fit over the nested balls B(x0, 2^{-k} start), k = 0, 1, ...,
/// normalized by the domain radius. Balls with fewer than two vertices end the sequence; at least
/// two nondegenerate balls are needed for a fit.
pub fn holder_fit(
    graph: &FractalGraph,
    u: &[f64],
    x0: usize,
    start: f64,
    radius: f64,
) -> Result<HolderFit> {
    let (mut radii, mut osc) = (Vec::new(), Vec::new());
    let mut r = start;
    loop {
        let ball = graph.ball(x0, r)?;
        if ball.len() < 2 {
            break;
        }
        let (lo, hi) = ball
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| {
                (lo.min(u[x]), hi.max(u[x]))
            });
        radii.push(r);
        osc.push(hi - lo);
        r *= 0.5;
    }
    let scale = u.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let usable = osc.iter().take_while(|&&o| o > 1e-12 * scale).count();
    if usable < 2 {
        return Ok(HolderFit {
            radii,
            osc,
            alpha_raw: None,
            metric_exponent: None,
        });
    }
    let d_w = graph.d_w();
    let log_osc: Vec<f64> = osc[..usable].iter().map(|o| o.ln()).collect();
    let xs: Vec<f64> = radii[..usable]
        .iter()
        .map(|r| (r.powf(2.0 / d_w) / radius).ln())
        .collect();
    let xm: Vec<f64> = radii[..usable].iter().map(|r| r.ln()).collect();
    Ok(HolderFit {
        alpha_raw: Some(slope(&xs, &log_osc)),
        metric_exponent: Some(slope(&xm, &log_osc)),
        radii,
        osc,
    })
}

pub fn harnack_holder_main(
    graph: &FractalGraph,
    dec: &SpectralDecomposition,
    s: f64,
    geometry: &[HarnackConfig],
    eta: f64,
) -> Result<HarnackReport> {
    if !(eta > 0.0 && eta <= 1.0) {
        return Err(Error::invalid("eta must lie in (0, 1]"));
    }
    if geometry.is_empty() {
        return Err(Error::invalid("no configurations"));
    }
    let dtn_opts = DtnOptions::default();
    let mut runs = Vec::with_capacity(geometry.len());
    for cfg in geometry {
        let omega = graph.ball(cfg.x0, cfg.radius)?;
        let inside = {
            let mut v = vec![false; graph.len()];
            omega.iter().for_each(|&x| v[x] = true);
            v
        };
        let exterior: Vec<usize> = (0..graph.len()).filter(|&x| !inside[x]).collect();
        let datum = cfg.data.values(graph, cfg.x0, &exterior)?;
        let problem = DirichletProblem::new(s, &omega, datum)?;
        let sol = solve_fractional_dirichlet(dec, &problem)?;
        let u = &sol.u;

        let inner = graph.ball(cfg.x0, eta * cfg.radius)?;
        let sup = inner
            .iter()
            .map(|&x| u[x])
            .fold(f64::NEG_INFINITY, f64::max);
        let inf = inner.iter().map(|&x| u[x]).fold(f64::INFINITY, f64::min);
        let degenerate = !(inf > 1e-12 * sup.abs().max(f64::MIN_POSITIVE));
        let ratio = (!degenerate).then(|| sup / inf);

        // interior estimate: the nested balls start at the inner ball
        let HolderFit {
            radii,
            osc,
            alpha_raw,
            metric_exponent,
        } = holder_fit(graph, u, cfg.x0, eta * cfg.radius, cfg.radius)?;

        // the extension of u must have vanishing conormal derivative over Omega
        let trace = dtn(dec, s, u, dtn_opts)?.values;
        let total = trace.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let on_omega = omega.iter().fold(0.0f64, |m, &x| m.max(trace[x].abs()));
        let trace_residual = if total > 0.0 { on_omega / total } else { 0.0 };

        runs.push(HarnackRun {
            x0: cfg.x0,
            radius: cfg.radius,
            data: cfg.data.label(),
            sup,
            inf,
            ratio,
            degenerate,
            radii,
            osc,
            alpha_raw,
            alpha: alpha_raw.map(|a| a.min(1.0)),
            metric_exponent,
            trace_residual,
            solver_residual: sol.residual,
        });
    }
    let ok = runs.iter().filter(|r| !r.degenerate);
    let worst_ratio = ok.clone().filter_map(|r| r.ratio).reduce(f64::max);
    let alphas: Vec<f64> = ok.filter_map(|r| r.alpha).collect();
    Ok(HarnackReport {
        s,
        eta,
        worst_ratio,
        alpha_min: alphas.iter().copied().reduce(f64::min),
        alpha_max: alphas.iter().copied().reduce(f64::max),
        trace_residual_max: runs.iter().map(|r| r.trace_residual).fold(0.0, f64::max),
        runs,
    })
}
