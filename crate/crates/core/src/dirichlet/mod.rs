//! Nonlocal Dirichlet problems (-L)^s u = 0 in a vertex set with prescribed
//! exterior values, and the Besov seminorms equivalent to the fractional energy.

mod besov;
mod io;

use serde::Serialize;

pub use besov::{
    besov_d, besov_norm, besov_profile, dyadic_radii, equivalence_ratio, fractional_energy,
    spectral_ensemble, BesovReport, EquivalenceReport,
};
pub use io::{parse_problem, read_problem, write_problem, write_solution_csv};

use crate::error::{Error, Result};
use crate::linalg::{self, CgSummary, DenseMatrix};
use crate::quadrature::check_open_unit;
use crate::spectral::SpectralDecomposition;

/// (-L)^s u = 0 on `domain`, u = datum outside.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DirichletProblem {
    s: f64,
    domain: Vec<usize>,
    /// Values on every vertex; entries on the domain are ignored.
    datum: Vec<f64>,
}

impl DirichletProblem {
    /// `datum` has one value per vertex; only the exterior entries matter.
    pub fn new(s: f64, domain: &[usize], datum: Vec<f64>) -> Result<Self> {
        check_open_unit(s)?;
        let n = datum.len();
        let mut dom = domain.to_vec();
        dom.sort_unstable();
        dom.dedup();
        if dom.len() != domain.len() {
            return Err(Error::invalid("domain lists a vertex twice"));
        }
        if dom.is_empty() {
            return Err(Error::invalid("domain is empty"));
        }
        if dom.len() >= n {
            return Err(Error::invalid("domain must leave a nonempty exterior"));
        }
        if let Some(&x) = dom.iter().find(|&&x| x >= n) {
            return Err(Error::invalid(format!("domain vertex {x} out of range")));
        }
        if datum.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("exterior datum must be finite"));
        }
        Ok(Self {
            s,
            domain: dom,
            datum,
        })
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    pub fn domain(&self) -> &[usize] {
        &self.domain
    }

    pub fn datum(&self) -> &[f64] {
        &self.datum
    }

    pub fn vertex_count(&self) -> usize {
        self.datum.len()
    }

    /// Exterior vertices, ascending.
    pub fn exterior(&self) -> Vec<usize> {
        let mut inside = vec![false; self.datum.len()];
        self.domain.iter().for_each(|&x| inside[x] = true);
        (0..self.datum.len()).filter(|&x| !inside[x]).collect()
    }

    /// max |datum| over the exterior.
    pub fn datum_norm(&self) -> f64 {
        self.exterior()
            .iter()
            .map(|&x| self.datum[x].abs())
            .fold(0.0, f64::max)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DirichletSolution {
    pub u: Vec<f64>,
    pub iterations: usize,
    /// max over the domain of |(-L)^s u|.
    pub residual: f64,
}

/// Solves A_{OO} u_O = -A_{O,ext} f with A the symmetric form matrix
/// A[x, y] = mu(x) ((-L)^s)[x, y] (conjugate gradients), so that
/// E^(s)(u, h) = 0 for every h supported in the domain.
pub fn solve_fractional_dirichlet(
    dec: &SpectralDecomposition,
    problem: &DirichletProblem,
) -> Result<DirichletSolution> {
    let n = dec.dim();
    if problem.vertex_count() != n {
        return Err(Error::invalid("problem size differs from decomposition"));
    }
    let s = problem.s();
    let table = dec.fractional_matrix(s)?;
    let mu = dec.measure();
    let dom = problem.domain();
    let ext = problem.exterior();
    let f = problem.datum();
    let k = dom.len();
    // form matrix on the domain (symmetric: mu(x) M[x,y] = sum_i lambda_i^s phi_i(x) phi_i(y) mu(x) mu(y))
    let mut a = DenseMatrix::zeros(k);
    for (q, &y) in dom.iter().enumerate() {
        for (p, &x) in dom.iter().enumerate() {
            a[(p, q)] = mu[x] * table[(x, y)];
        }
    }
    for q in 0..k {
        for p in 0..q {
            let avg = 0.5 * (a[(p, q)] + a[(q, p)]);
            a[(p, q)] = avg;
            a[(q, p)] = avg;
        }
    }
    let b: Vec<f64> = dom
        .iter()
        .map(|&x| -mu[x] * ext.iter().map(|&y| table[(x, y)] * f[y]).sum::<f64>())
        .collect();
    let diag: Vec<f64> = (0..k).map(|p| a[(p, p)]).collect();
    // start from the exterior mean so that constant data is solved exactly
    let ext_mass: f64 = ext.iter().map(|&y| mu[y]).sum();
    let mean = ext.iter().map(|&y| f[y] * mu[y]).sum::<f64>() / ext_mass;
    let mut x = vec![mean; k];
    let mut summary = CgSummary {
        iterations: 0,
        relative_residual: 0.0,
    };
    let target = 1e-10 * problem.datum_norm().max(f64::MIN_POSITIVE);
    let mut u = f.to_vec();
    let mut residual = f64::INFINITY;
    // tighten the CG tolerance until the pointwise residual meets the target
    let mut tol = 1e-12;
    for _ in 0..4 {
        let step = linalg::conjugate_gradient(
            |v, out| a.matvec(v, out),
            &diag,
            &b,
            &mut x,
            tol,
            10 * k + 100,
        )?;
        summary.iterations += step.iterations;
        for (&xv, &v) in dom.iter().zip(&x) {
            u[xv] = v;
        }
        residual = weak_solution_residual(dec, s, &u, dom)?;
        if residual <= target {
            break;
        }
        tol *= 1e-2;
    }
    Ok(DirichletSolution {
        u,
        iterations: summary.iterations,
        residual,
    })
}

/// max over x in `domain` of |((-L)^s u)(x)|.
pub fn weak_solution_residual(
    dec: &SpectralDecomposition,
    s: f64,
    u: &[f64],
    domain: &[usize],
) -> Result<f64> {
    let applied = dec.fractional_apply(s, u)?;
    Ok(domain.iter().map(|&x| applied[x].abs()).fold(0.0, f64::max))
}
