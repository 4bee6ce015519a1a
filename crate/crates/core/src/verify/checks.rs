//! Registry of named checks. Each check builds what it needs for a
//! (family, level, s, seed) context, runs at fixed tolerances and returns a
//! [`CheckReport`].

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::geometry::ProductGeometry;
use super::harnack::{harnack_holder_main, ExteriorData, HarnackConfig, DEFAULT_ETA};
use super::hke::{decimation_ratios, default_points, fit_on_diagonal, scaling_window};
use super::lle::{lle_check, DEFAULT_EPSILONS};
use super::oscillation::{delta_from_epsilon, oscillation_check, standard_cylinder};
use super::phi::{phi_check, PhiParameters};
use super::report::CheckReport;
use crate::dirichlet::{
    equivalence_ratio, solve_fractional_dirichlet, spectral_ensemble, DirichletProblem,
};
use crate::error::{Error, Result};
use crate::extension::{
    assemble_extended_operator, dtn, poisson_extend, solve_extension_bvp, BvpOptions, DtnOptions,
    YGrid, DEFAULT_CELLS,
};
use crate::fractal::{build_fractal, Family, FractalGraph, FractalSpec};
use crate::quadrature::{balakrishnan_power, QuadratureConfig};
use crate::spectral::{
    eigendecompose, jump_form_apply, killed_decomposition, GeneratorOperator, SpectralDecomposition,
};

/// Every registered check, in the order `verify-all` runs them.
pub const CHECK_NAMES: [&str; 12] = [
    "spectrum",
    "fracpow",
    "dtn",
    "bvp",
    "besov",
    "dirichlet",
    "hke",
    "decimation",
    "lle",
    "oscillation",
    "phi",
    "harnack",
];

/// Inputs shared by all checks.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CheckContext {
    pub family: Family,
    pub level: u32,
    pub s: f64,
    pub seed: u64,
}

impl CheckContext {
    fn report(&self, claim: &str, with_s: bool) -> CheckReport {
        CheckReport::new(
            claim,
            self.family.name(),
            self.level,
            with_s.then_some(self.s),
            self.seed,
        )
    }
}

pub fn is_check(name: &str) -> bool {
    CHECK_NAMES.contains(&name)
}

/// False for checks whose outcome does not involve the fractional order.
pub fn depends_on_s(name: &str) -> bool {
    !matches!(name, "spectrum" | "hke" | "decimation")
}

/// Runs the check called `name`.
pub fn run_check(name: &str, ctx: &CheckContext) -> Result<CheckReport> {
    match name {
        "spectrum" => check_spectrum(ctx),
        "fracpow" => check_fracpow(ctx),
        "dtn" => check_dtn(ctx),
        "bvp" => check_bvp(ctx),
        "besov" => check_besov(ctx),
        "dirichlet" => check_dirichlet(ctx),
        "hke" => check_hke(ctx),
        "decimation" => check_decimation(ctx),
        "lle" => check_lle(ctx),
        "oscillation" => check_oscillation(ctx),
        "phi" => check_phi(ctx),
        "harnack" => check_harnack(ctx),
        other => Err(Error::invalid(format!(
            "unknown check `{other}` (known: {})",
            CHECK_NAMES.join(", ")
        ))),
    }
}

/// Largest level at which the product-domain checks stay within the dense
/// size limit.
pub fn product_level(family: Family, level: u32) -> u32 {
    let cap = match family {
        Family::Interval => 6,
        Family::Gasket => 4,
        Family::Vicsek => 3,
    };
    level.min(cap)
}

/// Largest level used by the elliptic Harnack check.
pub fn harnack_level(family: Family, level: u32) -> u32 {
    let cap = match family {
        Family::Interval => 8,
        Family::Gasket => 5,
        Family::Vicsek => 3,
    };
    level.min(cap)
}

fn setup(
    family: Family,
    level: u32,
) -> Result<(FractalGraph, GeneratorOperator, SpectralDecomposition)> {
    let graph = build_fractal(FractalSpec::new(family, level))?;
    let op = GeneratorOperator::from_graph(&graph)?;
    let dec = eigendecompose(&op)?;
    Ok((graph, op, dec))
}

fn random_functions(n: usize, count: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| (0..n).map(|_| rng.random_range(-1.0..1.0)).collect())
        .collect()
}

fn rel_error(a: &[f64], b: &[f64]) -> f64 {
    let num = a
        .iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max);
    let den = b.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if den > 0.0 {
        num / den
    } else {
        num
    }
}

/// Eigen-residual and orthonormality; closed forms on the interval.
fn check_spectrum(ctx: &CheckContext) -> Result<CheckReport> {
    let (graph, op, dec) = setup(ctx.family, ctx.level)?;
    let (residual, gram) = dec.check_against(&op);
    let mut report = ctx
        .report("spectrum", false)
        .statistic("dimension", dec.dim())?
        .statistic("eigen_residual", residual)?
        .statistic("orthonormality_defect", gram)?;
    let mut pass = residual <= 1e-9 && gram <= 1e-9 && dec.values()[0] == 0.0;
    if ctx.family == Family::Interval {
        let n = (graph.len() - 1) as f64;
        let h = 1.0 / n;
        let closed = |k: f64| 2.0 / (h * h) * (1.0 - (k * std::f64::consts::PI / n).cos());
        let neumann = dec
            .values()
            .iter()
            .enumerate()
            .skip(1)
            .map(|(k, &l)| ((l - closed(k as f64)) / closed(k as f64)).abs())
            .fold(0.0, f64::max);
        let interior: Vec<usize> = (1..graph.len() - 1).collect();
        let kd = killed_decomposition(&op, &interior)?;
        let dirichlet = kd
            .spectral()
            .values()
            .iter()
            .enumerate()
            .map(|(k, &l)| ((l - closed((k + 1) as f64)) / closed((k + 1) as f64)).abs())
            .fold(0.0, f64::max);
        report = report
            .statistic("neumann_closed_form_error", neumann)?
            .statistic("dirichlet_closed_form_error", dirichlet)?;
        pass &= neumann <= 1e-10 && dirichlet <= 1e-10;
    }
    Ok(report.with_pass(pass))
}

/// Balakrishnan integral against lambda^s; jump-kernel form against the
/// spectral apply on seeded random functions.
fn check_fracpow(ctx: &CheckContext) -> Result<CheckReport> {
    let (_, _, dec) = setup(ctx.family, ctx.level)?;
    let q = QuadratureConfig::default();
    let mut balakrishnan = 0.0f64;
    for &l in &dec.values()[1..] {
        let b = balakrishnan_power(l, ctx.s, q)?;
        balakrishnan = balakrishnan.max(((b - l.powf(ctx.s)) / l.powf(ctx.s)).abs());
    }
    let mut jump = 0.0f64;
    for f in random_functions(dec.dim(), 10, ctx.seed) {
        let a = jump_form_apply(&dec, ctx.s, &f, q)?;
        let b = dec.fractional_apply(ctx.s, &f)?;
        jump = jump.max(rel_error(&a, &b));
    }
    Ok(ctx
        .report("fracpow", true)
        .parameter("random_functions", 10)?
        .statistic("balakrishnan_max_rel_error", balakrishnan)?
        .statistic("jump_max_rel_error", jump)?
        .with_pass(balakrishnan <= 1e-8 && jump <= 1e-4))
}

/// DtN map at the default resolution against the spectral apply, and the
/// improvement when the y-mesh is refined.
fn check_dtn(ctx: &CheckContext) -> Result<CheckReport> {
    let (_, _, dec) = setup(ctx.family, ctx.level)?;
    let opts = DtnOptions::default();
    let fs = random_functions(dec.dim(), 3, ctx.seed);
    let (mut err, mut err_fine) = (0.0f64, 0.0f64);
    let mut base = None;
    for f in &fs {
        let exact = dec.fractional_apply(ctx.s, f)?;
        let coarse = dtn(&dec, ctx.s, f, opts)?;
        let fine = crate::extension::dtn_at(
            &dec,
            ctx.s,
            f,
            coarse.y1 * 2f64.powf(-1.0 / ctx.s),
            opts.quadrature,
        )?;
        err = err.max(rel_error(&coarse.values, &exact));
        err_fine = err_fine.max(rel_error(&fine, &exact));
        base.get_or_insert((coarse.cells, coarse.y1, coarse.estimate));
    }
    let (cells, y1, estimate) = base.expect("at least one function");
    let ratio = err_fine / err;
    Ok(ctx
        .report("dtn", true)
        .parameter("tolerance", opts.tolerance)?
        .statistic("cells", cells)?
        .statistic("y1", y1)?
        .statistic("error_estimate", estimate)?
        .statistic("max_rel_error", err)?
        .statistic("refined_max_rel_error", err_fine)?
        .statistic("refinement_ratio", ratio)?
        .with_pass(err <= 1e-2 && ratio <= 0.6))
}

/// Finite-difference extension against the spectral Poisson extension at
/// 80, 160 and 320 cells.
fn check_bvp(ctx: &CheckContext) -> Result<CheckReport> {
    let (_, op, dec) = setup(ctx.family, ctx.level)?;
    let f = &random_functions(dec.dim(), 1, ctx.seed)[0];
    let mut gaps = Vec::new();
    for cells in [DEFAULT_CELLS / 2, DEFAULT_CELLS, 2 * DEFAULT_CELLS] {
        let grid = YGrid::for_gap(ctx.s, dec.spectral_gap(), cells)?;
        let ext = assemble_extended_operator(&op, &grid);
        let fd = solve_extension_bvp(&ext, f, BvpOptions::default())?;
        let spectral = poisson_extend(&dec, f, &grid, QuadratureConfig::default())?;
        gaps.push(fd.field.sup_distance(&spectral));
    }
    let orders: Vec<f64> = gaps.windows(2).map(|w| (w[0] / w[1]).log2()).collect();
    let pass = gaps[1] <= 1e-2 && orders.iter().all(|&p| p >= 1.0);
    Ok(ctx
        .report("bvp", true)
        .parameter(
            "cells",
            [DEFAULT_CELLS / 2, DEFAULT_CELLS, 2 * DEFAULT_CELLS],
        )?
        .statistic("sup_gaps", &gaps)?
        .statistic("observed_orders", &orders)?
        .with_pass(pass))
}

/// Spread of the fractional energy over the Besov seminorm on the seeded
/// 25-function ensemble.
fn check_besov(ctx: &CheckContext) -> Result<CheckReport> {
    let (graph, _, dec) = setup(ctx.family, ctx.level)?;
    let ensemble = spectral_ensemble(&dec, 20, 5, ctx.seed);
    let r = equivalence_ratio(&graph, &dec, ctx.s, &ensemble)?;
    Ok(ctx
        .report("besov", true)
        .parameter("ensemble", "20 random + 5 eigenfunctions")?
        .parameter("threshold", 50.0)?
        .statistic("alpha", r.alpha)?
        .statistic("beta", r.beta)?
        .statistic("min_ratio", r.min)?
        .statistic("max_ratio", r.max)?
        .statistic("spread", r.spread)?
        .statistic("excluded", r.excluded)?
        .with_pass(r.spread <= 50.0))
}

/// Residual and maximum principle on seeded random Dirichlet problems.
fn check_dirichlet(ctx: &CheckContext) -> Result<CheckReport> {
    let (_, _, dec) = setup(ctx.family, ctx.level)?;
    let n = dec.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(ctx.seed);
    let (mut worst_residual, mut worst_excess) = (0.0f64, 0.0f64);
    let mut solved = 0;
    while solved < 10 {
        let domain: Vec<usize> = (0..n).filter(|_| rng.random_bool(0.5)).collect();
        if domain.is_empty() || domain.len() == n {
            continue;
        }
        let datum: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..1.0)).collect();
        let p = DirichletProblem::new(ctx.s, &domain, datum)?;
        let sol = solve_fractional_dirichlet(&dec, &p)?;
        let norm = p.datum_norm();
        worst_residual = worst_residual.max(sol.residual / norm);
        let ext = p.exterior();
        let lo = ext
            .iter()
            .map(|&x| p.datum()[x])
            .fold(f64::INFINITY, f64::min);
        let hi = ext
            .iter()
            .map(|&x| p.datum()[x])
            .fold(f64::NEG_INFINITY, f64::max);
        for &x in p.domain() {
            worst_excess = worst_excess.max(lo - sol.u[x]).max(sol.u[x] - hi);
        }
        solved += 1;
    }
    Ok(ctx
        .report("dirichlet", true)
        .parameter("problems", solved)?
        .statistic("max_relative_residual", worst_residual)?
        .statistic("max_principle_excess", worst_excess)?
        .with_pass(worst_residual <= 1e-9 && worst_excess <= 1e-10))
}

/// On-diagonal slope and envelope constants over the scaling window.
fn check_hke(ctx: &CheckContext) -> Result<CheckReport> {
    let (graph, _, dec) = setup(ctx.family, ctx.level)?;
    let window = scaling_window(&graph)?;
    let points = default_points(&graph);
    let r = fit_on_diagonal(&dec, &graph, &points, window)?;
    let target = -graph.d_h() / graph.d_w();
    let rel = (r.on_diagonal_slope / target - 1.0).abs();
    Ok(ctx
        .report("hke", false)
        .parameter("points", &points)?
        .parameter("window", window)?
        .statistic("on_diagonal_slope", r.on_diagonal_slope)?
        .statistic("target_slope", target)?
        .statistic("slope_rel_error", rel)?
        .statistic("point_slopes", &r.point_slopes)?
        .statistic("c1", r.c1)?
        .statistic("c2", r.c2)?
        .statistic("c3", r.c3)?
        .statistic("c4", r.c4)?
        .statistic("max_violation", r.max_violation)?
        .statistic("pairs_used", r.pairs_used)?
        .statistic("pairs_dropped", r.pairs_dropped)?
        .with_pass(rel <= 0.05 && r.max_violation <= 1e-9))
}

/// Eigenvalue ratios between this level and the next.
fn check_decimation(ctx: &CheckContext) -> Result<CheckReport> {
    let tolerance = match ctx.family {
        Family::Vicsek => 0.05,
        _ => 0.02,
    };
    let r = decimation_ratios(FractalSpec::new(ctx.family, ctx.level), 3)?;
    let dw_error = (r.fitted_walk_dimension / ctx.family.scaling().d_w - 1.0).abs();
    Ok(ctx
        .report("decimation", false)
        .parameter("modes", 3)?
        .parameter("tolerance", tolerance)?
        .statistic("time_scale", r.time_scale)?
        .statistic("ratios", &r.ratios)?
        .statistic("max_relative_error", r.max_relative_error)?
        .statistic("fitted_walk_dimension", r.fitted_walk_dimension)?
        .statistic("walk_dimension_rel_error", dw_error)?
        .with_pass(r.max_relative_error <= tolerance && dw_error <= 0.02))
}

fn check_lle(ctx: &CheckContext) -> Result<CheckReport> {
    let geo = ProductGeometry::standard(ctx.family, product_level(ctx.family, ctx.level), ctx.s);
    let setup = geo.build()?;
    let r = lle_check(&setup, &DEFAULT_EPSILONS, 24)?;
    let monotone = r.minima.windows(2).all(|w| w[0] <= w[1] * (1.0 + 1e-12));
    let pass = r.positive() && r.epsilon_star.is_some_and(|e| e >= 0.05) && monotone;
    Ok(ctx
        .report("lle", true)
        .parameter("geometry", &geo)?
        .parameter("epsilons", &r.epsilons)?
        .statistic("domain_nodes", setup.domain.len())?
        .statistic("minima", &r.minima)?
        .statistic("epsilon_star", r.epsilon_star)?
        .statistic("c_star", r.c_star)?
        .statistic("monotone_in_epsilon", monotone)?
        .with_pass(pass))
}

fn check_oscillation(ctx: &CheckContext) -> Result<CheckReport> {
    let geo = ProductGeometry::standard(ctx.family, product_level(ctx.family, ctx.level), ctx.s);
    let setup = geo.build()?;
    let eps = lle_check(&setup, &DEFAULT_EPSILONS, 24)?
        .epsilon_star
        .ok_or_else(|| Error::invalid("local lower estimate failed; no delta available"))?;
    let delta = delta_from_epsilon(eps);
    let cylinder = standard_cylinder(setup.domain.radius);
    let r = oscillation_check(&setup, cylinder, delta, 50, ctx.seed)?;
    let pass = !r.ratios.is_empty() && r.theta < 1.0 && r.alpha > 0.0 && r.alpha <= 1.0;
    Ok(ctx
        .report("oscillation", true)
        .parameter("geometry", &geo)?
        .parameter("cylinder", cylinder)?
        .parameter("epsilon", eps)?
        .parameter("delta", delta)?
        .parameter("trials", r.trials)?
        .statistic("theta", r.theta)?
        .statistic("outer_osc", r.outer_osc)?
        .statistic("inner_osc", r.inner_osc)?
        .statistic("alpha", r.alpha)?
        .statistic("degenerate", r.degenerate)?
        .with_pass(pass))
}

/// Parabolic Harnack constant at this level and the one below; the two
/// must agree within a factor 1.5.
fn check_phi(ctx: &CheckContext) -> Result<CheckReport> {
    let level = product_level(ctx.family, ctx.level);
    if level < 3 {
        return Err(Error::invalid("parabolic Harnack check needs level >= 3"));
    }
    let params = PhiParameters::default();
    let mut constants = Vec::new();
    let mut discards = Vec::new();
    let mut levels = Vec::new();
    for m in [level - 1, level] {
        let geo = ProductGeometry::standard(ctx.family, m, ctx.s);
        let r = phi_check(&geo.build()?, params, 30, ctx.seed)?;
        constants.push(r.constant);
        discards.push(r.discard_fraction());
        levels.push(m);
    }
    let stability = constants.iter().copied().fold(0.0, f64::max)
        / constants.iter().copied().fold(f64::INFINITY, f64::min);
    let pass = stability <= 1.5
        && discards.iter().all(|&d| d < 0.5)
        && constants.iter().all(|c| c.is_finite());
    Ok(ctx
        .report("phi", true)
        .parameter("levels", &levels)?
        .parameter("parameters", params)?
        .parameter("trials", 30)?
        .statistic("constants", &constants)?
        .statistic("discard_fractions", &discards)?
        .statistic("level_stability", stability)?
        .with_pass(pass))
}

/// Default Harnack geometry: a center and two radii.
pub fn harnack_geometry(family: Family) -> ([f64; 2], [f64; 2]) {
    match family {
        Family::Interval => ([0.5, 0.0], [0.4, 0.3]),
        Family::Gasket => ([0.375, 3f64.sqrt() / 8.0], [0.5, 0.375]),
        Family::Vicsek => ([0.5, 0.5], [0.5, 0.375]),
    }
}

/// Elliptic Harnack ratios and Hoelder exponents at this level and the one
/// below, for two radii and two exterior data families.
fn check_harnack(ctx: &CheckContext) -> Result<CheckReport> {
    let level = harnack_level(ctx.family, ctx.level);
    if level < 3 {
        return Err(Error::invalid("Harnack check needs level >= 3"));
    }
    let (center, radii) = harnack_geometry(ctx.family);
    let data = [
        ExteriorData::FarThird,
        ExteriorData::Random { seed: ctx.seed },
    ];
    let mut per_config = Vec::new();
    let mut alpha_means = Vec::new();
    let mut all_alpha_ok = true;
    let mut degenerate = 0;
    let mut trace_max = 0.0f64;
    let mut solver_max = 0.0f64;
    let mut runs = Vec::new();
    for m in [level - 1, level] {
        let (graph, _, dec) = setup(ctx.family, m)?;
        let x0 = graph.nearest_vertex(center);
        let mut alphas = Vec::new();
        for &r in &radii {
            let cfgs: Vec<HarnackConfig> = data
                .iter()
                .map(|&d| HarnackConfig {
                    x0,
                    radius: r,
                    data: d,
                })
                .collect();
            let rep = harnack_holder_main(&graph, &dec, ctx.s, &cfgs, DEFAULT_ETA)?;
            for run in &rep.runs {
                if run.degenerate {
                    degenerate += 1;
                    continue;
                }
                if let Some(a) = run.alpha {
                    all_alpha_ok &= a > 0.0 && a <= 1.0;
                    alphas.push(a);
                }
                all_alpha_ok &= run.ratio.is_some_and(|q| q >= 1.0);
                solver_max = solver_max.max(run.solver_residual);
            }
            trace_max = trace_max.max(rep.trace_residual_max);
            per_config.push((m, r, rep.worst_ratio));
            runs.extend(rep.runs);
        }
        alpha_means.push(if alphas.is_empty() {
            f64::NAN
        } else {
            alphas.iter().sum::<f64>() / alphas.len() as f64
        });
    }
    let worst: Vec<f64> = per_config.iter().filter_map(|c| c.2).collect();
    let ratio_stability = if worst.is_empty() {
        f64::INFINITY
    } else {
        worst.iter().copied().fold(0.0, f64::max)
            / worst.iter().copied().fold(f64::INFINITY, f64::min)
    };
    let alpha_stability = (alpha_means[1] / alpha_means[0] - 1.0).abs();
    let pass = ratio_stability <= 1.5
        && all_alpha_ok
        && alpha_stability <= 0.15
        && trace_max <= 0.05
        && worst.len() == per_config.len();
    Ok(ctx
        .report("harnack", true)
        .parameter("levels", [level - 1, level])?
        .parameter("center", center)?
        .parameter("radii", radii)?
        .parameter("eta", DEFAULT_ETA)?
        .parameter("data", data.iter().map(|d| d.label()).collect::<Vec<_>>())?
        .statistic("worst_ratios", &per_config)?
        .statistic("ratio_stability", ratio_stability)?
        .statistic("alpha_means", &alpha_means)?
        .statistic("alpha_stability", alpha_stability)?
        .statistic("degenerate_runs", degenerate)?
        .statistic("trace_residual_max", trace_max)?
        .statistic("solver_residual_max", solver_max)?
        .statistic("runs", &runs)?
        .with_pass(pass))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_check_is_an_error() {
        let ctx = CheckContext {
            family: Family::Interval,
            level: 4,
            s: 0.5,
            seed: 0,
        };
        assert!(run_check("nope", &ctx).is_err());
        assert!(is_check("lle") && !is_check("nope"));
    }

    #[test]
    fn cheap_checks_pass_on_small_interval() {
        let ctx = CheckContext {
            family: Family::Interval,
            level: 5,
            s: 0.5,
            seed: 3,
        };
        for name in [
            "spectrum",
            "fracpow",
            "besov",
            "dirichlet",
            "decimation",
            "hke",
        ] {
            let r = run_check(name, &ctx).unwrap();
            assert!(r.pass, "{name}: {:?}", r.statistics);
            assert_eq!(r.claim, name);
            assert_eq!(r.seed, 3);
        }
    }
}
