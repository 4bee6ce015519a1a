//! One function per subcommand.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::Path;
use std::time::Instant;

use fracharm::dirichlet::{
    equivalence_ratio, read_problem, solve_fractional_dirichlet, spectral_ensemble,
    write_solution_csv,
};
use fracharm::extension::{dtn, poisson_extend, DtnOptions, YGrid};
use fracharm::fractal::{
    build_fractal, write_edges_csv, write_vertices_csv, FractalGraph, FractalSpec,
};
use fracharm::output::{sig17, to_json_string};
use fracharm::spectral::{GeneratorOperator, SpectralDecomposition};
use fracharm::verify::checks::{depends_on_s, run_check, CheckContext};
use fracharm::verify::{
    scaling_window, window_times, write_index, write_report, IndexEntry, ReportIndex,
    WINDOW_SAMPLES,
};

use crate::cache::{load_or_compute, CacheStatus};
use crate::config::{validate_check, RunConfig};
use crate::{Failure, UsageError};

fn graph(cfg: &RunConfig) -> Result<FractalGraph, Failure> {
    Ok(build_fractal(FractalSpec::new(cfg.family, cfg.level))?)
}

fn decomposition(cfg: &RunConfig, g: &FractalGraph) -> Result<SpectralDecomposition, Failure> {
    let (dec, status) = load_or_compute(&cfg.cache_dir, g)?;
    if status == CacheStatus::Hit {
        eprintln!(
            "using cached decomposition from {}",
            cfg.cache_dir.display()
        );
    }
    Ok(dec)
}

fn create(cfg: &RunConfig, name: &str) -> Result<BufWriter<File>, Failure> {
    fs::create_dir_all(&cfg.out_dir)?;
    Ok(BufWriter::new(File::create(cfg.out_dir.join(name))?))
}

fn write_json<T: serde::Serialize>(cfg: &RunConfig, name: &str, value: &T) -> Result<(), Failure> {
    let mut w = create(cfg, name)?;
    writeln!(
        w,
        "{}",
        to_json_string(value).map_err(fracharm::Error::from)?
    )?;
    Ok(())
}

/// Reads one value per vertex: plain numbers per line, or CSV whose last
/// column is numeric. Lines that do not parse as a number (headers) are
/// skipped.
pub fn read_function(path: &Path, n: usize) -> Result<Vec<f64>, Failure> {
    let text = fs::read_to_string(path)
        .map_err(|e| UsageError(format!("cannot read {}: {e}", path.display())))?;
    let values: Vec<f64> = text
        .lines()
        .map(|l| l.split('#').next().unwrap_or("").trim())
        .filter(|l| !l.is_empty())
        .filter_map(|l| l.rsplit(',').next().and_then(|v| v.trim().parse().ok()))
        .collect();
    if values.len() != n {
        return Err(UsageError(format!(
            "{} holds {} values but the graph has {n} vertices",
            path.display(),
            values.len()
        ))
        .into());
    }
    Ok(values)
}

fn input_or_eigenfunction(
    dec: &SpectralDecomposition,
    input: Option<&Path>,
) -> Result<Vec<f64>, Failure> {
    match input {
        Some(p) => read_function(p, dec.dim()),
        None if dec.dim() > 1 => Ok(dec.vector(1).to_vec()),
        None => Err(UsageError("graph has a single vertex".into()).into()),
    }
}

pub fn build(cfg: &RunConfig) -> Result<(), Failure> {
    let g = graph(cfg)?;
    write_vertices_csv(&g, create(cfg, "vertices.csv")?)?;
    write_edges_csv(&g, create(cfg, "edges.csv")?)?;
    eprintln!(
        "{} level {}: {} vertices, {} edges",
        g.family(),
        g.level(),
        g.len(),
        g.edges().len()
    );
    Ok(())
}

pub fn spectrum(cfg: &RunConfig) -> Result<(), Failure> {
    let g = graph(cfg)?;
    let dec = decomposition(cfg, &g)?;
    let mut w = create(cfg, "eigenvalues.csv")?;
    writeln!(w, "index,lambda")?;
    for (i, l) in dec.values().iter().enumerate() {
        writeln!(w, "{i},{}", sig17(*l))?;
    }
    let (residual, gram) = dec.check_against(&GeneratorOperator::from_graph(&g)?);
    eprintln!("eigenpair residual {residual:.3e}, orthonormality defect {gram:.3e}");
    Ok(())
}

pub fn heatkernel(cfg: &RunConfig, times: Option<&str>, x: usize, y: usize) -> Result<(), Failure> {
    let g = graph(cfg)?;
    if x >= g.len() || y >= g.len() {
        return Err(UsageError(format!(
            "vertex out of range (graph has {} vertices)",
            g.len()
        ))
        .into());
    }
    let dec = decomposition(cfg, &g)?;
    let times: Vec<f64> = match times {
        Some(list) => list
            .split(',')
            .map(|t| {
                t.trim()
                    .parse()
                    .map_err(|_| UsageError(format!("invalid time `{t}`")))
            })
            .collect::<Result<_, _>>()?,
        None => {
            let window =
                scaling_window(&g).unwrap_or((1.0 / dec.lambda_max(), 1.0 / dec.spectral_gap()));
            window_times(window, WINDOW_SAMPLES)
        }
    };
    let mut w = create(cfg, "heatkernel.csv")?;
    writeln!(w, "t,p")?;
    for t in times {
        writeln!(w, "{},{}", sig17(t), sig17(dec.heat_kernel(t, x, y)?))?;
    }
    Ok(())
}

pub fn fracpow(cfg: &RunConfig, input: Option<&Path>) -> Result<(), Failure> {
    let g = graph(cfg)?;
    let dec = decomposition(cfg, &g)?;
    let f = input_or_eigenfunction(&dec, input)?;
    for &s in &cfg.s_values {
        let out = dec.fractional_apply(s, &f)?;
        let mut w = create(cfg, &format!("fracpow_s{s}.csv"))?;
        writeln!(w, "vertex_id,f,value")?;
        for (x, (a, b)) in f.iter().zip(&out).enumerate() {
            writeln!(w, "{x},{},{}", sig17(*a), sig17(*b))?;
        }
    }
    Ok(())
}

pub fn extend(cfg: &RunConfig, input: Option<&Path>) -> Result<(), Failure> {
    let g = graph(cfg)?;
    let dec = decomposition(cfg, &g)?;
    let f = input_or_eigenfunction(&dec, input)?;
    let options = DtnOptions {
        quadrature: cfg.quadrature,
        ..DtnOptions::default()
    };
    for s in cfg.fractional_s()? {
        let grid = YGrid::for_gap(s, dec.spectral_gap(), cfg.cells)?;
        let field = poisson_extend(&dec, &f, &grid, cfg.quadrature)?;
        field.write_csv(create(cfg, &format!("extension_s{s}.csv"))?)?;
        let map = dtn(&dec, s, &f, options)?;
        let exact = dec.fractional_apply(s, &f)?;
        let mut w = create(cfg, &format!("dtn_s{s}.csv"))?;
        writeln!(w, "vertex_id,dtn,fractional")?;
        for (x, (a, b)) in map.values.iter().zip(&exact).enumerate() {
            writeln!(w, "{x},{},{}", sig17(*a), sig17(*b))?;
        }
        eprintln!(
            "s = {s}: DtN extracted at y1 = {:.3e} (estimated error {:.2e})",
            map.y1, map.estimate
        );
    }
    Ok(())
}

pub fn dirichlet(cfg: &RunConfig, problem: &Path) -> Result<(), Failure> {
    let g = graph(cfg)?;
    let file = File::open(problem)
        .map_err(|e| UsageError(format!("cannot read {}: {e}", problem.display())))?;
    let p = read_problem(file, g.len())?;
    let dec = decomposition(cfg, &g)?;
    let sol = solve_fractional_dirichlet(&dec, &p)?;
    write_solution_csv(&sol.u, create(cfg, "solution.csv")?)?;
    write_json(
        cfg,
        "dirichlet.json",
        &serde_json::json!({
            "s": p.s(),
            "domain_size": p.domain().len(),
            "iterations": sol.iterations,
            "residual": sol.residual,
        }),
    )
}

pub fn besov(cfg: &RunConfig) -> Result<(), Failure> {
    let g = graph(cfg)?;
    let dec = decomposition(cfg, &g)?;
    let ensemble = spectral_ensemble(&dec, 20, 5, cfg.seed);
    for s in cfg.fractional_s()? {
        let report = equivalence_ratio(&g, &dec, s, &ensemble)?;
        eprintln!("s = {s}: ratio spread {:.3}", report.spread);
        write_json(cfg, &format!("besov_s{s}.json"), &report)?;
    }
    Ok(())
}

/// Runs `checks` at every configured s (once for checks independent of s),
/// writes one JSON report per run plus index.json.
pub fn verify(cfg: &RunConfig, checks: &[String]) -> Result<(), Failure> {
    if checks.is_empty() {
        return Err(UsageError("no checks given".into()).into());
    }
    for c in checks {
        validate_check(c)?;
    }
    let s_values = cfg.fractional_s()?;
    let started = Instant::now();
    let mut index = ReportIndex::default();
    let mut numerical = false;
    for name in checks {
        let orders = if depends_on_s(name) {
            &s_values[..]
        } else {
            &s_values[..1]
        };
        for &s in orders {
            let ctx = CheckContext {
                family: cfg.family,
                level: cfg.level,
                s,
                seed: cfg.seed,
            };
            let t = Instant::now();
            let entry = match run_check(name, &ctx) {
                Ok(report) => write_report(&cfg.out_dir, &report)?,
                Err(e) => {
                    numerical |= e.is_numerical();
                    IndexEntry {
                        claim: name.clone(),
                        file: String::new(),
                        pass: false,
                        error: Some(e.to_string()),
                    }
                }
            };
            eprintln!(
                "{:<12} s={s:<4} {} ({:.2?}){}",
                name,
                if entry.pass { "pass" } else { "FAIL" },
                t.elapsed(),
                entry
                    .error
                    .as_deref()
                    .map(|e| format!(": {e}"))
                    .unwrap_or_default()
            );
            index.runs.push(entry);
        }
    }
    write_index(&cfg.out_dir, &index)?;
    eprintln!("{} runs in {:.2?}", index.runs.len(), started.elapsed());
    if index.all_pass() {
        Ok(())
    } else if numerical {
        Err(Failure::Numerical("a check could not be evaluated".into()))
    } else {
        Err(Failure::Check)
    }
}

pub fn report(cfg: &RunConfig) -> Result<(), Failure> {
    let path = cfg.out_dir.join("index.json");
    let text = fs::read_to_string(&path)
        .map_err(|e| UsageError(format!("cannot read {}: {e}", path.display())))?;
    let index: ReportIndex = serde_json::from_str(&text)
        .map_err(|e| UsageError(format!("{} is not an index: {e}", path.display())))?;
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    for run in &index.runs {
        writeln!(
            out,
            "{:<5} {:<12} {}",
            if run.pass { "pass" } else { "FAIL" },
            run.claim,
            run.error.as_deref().unwrap_or(&run.file)
        )?;
    }
    let passed = index.runs.iter().filter(|r| r.pass).count();
    writeln!(out, "{passed}/{} passed", index.runs.len())?;
    if index.all_pass() {
        Ok(())
    } else {
        Err(Failure::Check)
    }
}
