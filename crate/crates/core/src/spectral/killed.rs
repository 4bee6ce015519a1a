//! Semigroups killed on leaving a vertex set (Dirichlet condition outside).

use super::{eigendecompose, GeneratorOperator, SpectralDecomposition};
use crate::error::{Error, Result};

/// Spectral decomposition of the generator restricted to `domain`, together
/// with the map from local indices to vertices of the ambient graph.
#[derive(Clone, Debug)]
pub struct KilledDecomposition {
    domain: Vec<usize>,
    ambient: usize,
    spectral: SpectralDecomposition,
}

/// Decomposes the principal submatrix of `op` on `domain` (sorted on output).
pub fn killed_decomposition(
    op: &GeneratorOperator,
    domain: &[usize],
) -> Result<KilledDecomposition> {
    let n = op.dim();
    let mut dom = domain.to_vec();
    dom.sort_unstable();
    dom.dedup();
    if dom.len() != domain.len() {
        return Err(Error::invalid("domain lists a vertex twice"));
    }
    if dom.is_empty() {
        return Err(Error::invalid("killing domain is empty"));
    }
    if let Some(&bad) = dom.iter().find(|&&x| x >= n) {
        return Err(Error::invalid(format!("domain vertex {bad} out of range")));
    }
    if op.is_conservative() && dom.len() == n {
        return Err(Error::invalid(
            "killing domain must leave its complement nonempty",
        ));
    }
    let spectral = eigendecompose(&op.restrict(&dom)?)?;
    Ok(KilledDecomposition {
        domain: dom,
        ambient: n,
        spectral,
    })
}

impl KilledDecomposition {
    pub fn domain(&self) -> &[usize] {
        &self.domain
    }

    pub fn spectral(&self) -> &SpectralDecomposition {
        &self.spectral
    }

    pub fn lambda_min(&self) -> f64 {
        self.spectral.values()[0]
    }

    /// Values of an ambient function on the domain.
    pub fn restrict(&self, f: &[f64]) -> Vec<f64> {
        assert_eq!(f.len(), self.ambient);
        self.domain.iter().map(|&x| f[x]).collect()
    }

    /// Extends a domain function by zero.
    pub fn extend(&self, f: &[f64]) -> Vec<f64> {
        assert_eq!(f.len(), self.domain.len());
        let mut out = vec![0.0; self.ambient];
        for (&x, &v) in self.domain.iter().zip(f) {
            out[x] = v;
        }
        out
    }

    /// P_t^Omega applied to a domain function; t = 0 is the identity.
    pub fn evolve(&self, t: f64, f: &[f64]) -> Result<Vec<f64>> {
        if t == 0.0 {
            Ok(f.to_vec())
        } else {
            self.spectral.semigroup_apply(t, f)
        }
    }
}

/// For a trajectory t -> u(t) on the domain, the most negative entry of
/// u(t) - P^Omega_{t-s} u(s) over all pairs s < t from `times`.
/// Nonnegative output means the super-mean value inequality holds.
pub fn super_mean_value_violation<U>(
    kd: &KilledDecomposition,
    trajectory: U,
    times: &[f64],
) -> Result<f64>
where
    U: Fn(f64) -> Vec<f64>,
{
    check_times(times)?;
    let states: Vec<Vec<f64>> = times.iter().map(|&t| trajectory(t)).collect();
    let mut worst = f64::INFINITY;
    for (a, &s) in times.iter().enumerate() {
        for (b, &t) in times.iter().enumerate().skip(a + 1) {
            let pushed = kd.evolve(t - s, &states[a])?;
            let m = states[b]
                .iter()
                .zip(&pushed)
                .map(|(u, p)| u - p)
                .fold(f64::INFINITY, f64::min);
            worst = worst.min(m);
        }
    }
    Ok(worst)
}

/// Super-mean value check for the caloric function u(t) = P_t^Omega u0.
pub fn super_mean_value_check(kd: &KilledDecomposition, u0: &[f64], times: &[f64]) -> Result<f64> {
    if u0.len() != kd.domain().len() {
        return Err(Error::invalid(
            "initial data length differs from domain size",
        ));
    }
    if u0.iter().any(|&v| v < 0.0) {
        return Err(Error::invalid("initial data must be nonnegative"));
    }
    let coeffs = kd.spectral.coefficients(u0);
    let values = kd.spectral.values().to_vec();
    super_mean_value_violation(
        kd,
        |t| {
            let c: Vec<f64> = coeffs
                .iter()
                .zip(&values)
                .map(|(c, l)| c * (-l * t).exp())
                .collect();
            kd.spectral.synthesize(&c)
        },
        times,
    )
}

fn check_times(times: &[f64]) -> Result<()> {
    if times.len() < 2 {
        return Err(Error::invalid("need at least two sample times"));
    }
    if times.iter().any(|&t| !(t >= 0.0) || !t.is_finite())
        || times.windows(2).any(|w| w[1] <= w[0])
    {
        return Err(Error::invalid(
            "sample times must be nonnegative and increasing",
        ));
    }
    Ok(())
}
