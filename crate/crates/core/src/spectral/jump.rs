//! Jump-kernel representation of (-L)^s:
//!
//! ((-L)^s f)(x) = -(1/|Gamma(-s)|) sum_{y != x} K(x,y) (f(y) - f(x)) mu(y),
//! K(x,y) = int_0^inf p_t(x,y) t^{-1-s} dt.
//!
//! Off the diagonal sum_i phi_i(x) phi_i(y) = 0 (completeness), so the heat
//! kernel can be evaluated as sum_i expm1(-lambda_i t) phi_i(x) phi_i(y),
//! which stays accurate at small t where p_t(x,y) is tiny.

use super::SpectralDecomposition;
use crate::error::{Error, Result};
use crate::quadrature::{abs_gamma_neg, check_open_unit, QuadratureConfig, QuadratureSpec};

/// Log-grid for the jump-kernel time integral. The lower cut makes the
/// small-time part (which grows like (lambda_max t)^{1-s}) negligible; the
/// upper cut makes the long-time remainder t^{-s}/s negligible relative to
/// the scale set by the spectral gap.
pub fn jump_quadrature(
    dec: &SpectralDecomposition,
    s: f64,
    config: QuadratureConfig,
) -> Result<QuadratureSpec> {
    check_open_unit(s)?;
    let gap = dec.spectral_gap();
    if !(gap > 0.0) {
        return Err(Error::invalid("jump kernel needs a positive spectral gap"));
    }
    let tol = config.tail_tol * 1e-2;
    let t_min = tol.powf(1.0 / (1.0 - s)) / dec.lambda_max();
    let t_max = tol.powf(-1.0 / s) / gap;
    Ok(QuadratureSpec::new(t_min, t_max, config))
}

/// K(x, y) for x != y by direct quadrature of the heat kernel.
pub fn jump_kernel(
    dec: &SpectralDecomposition,
    s: f64,
    x: usize,
    y: usize,
    config: QuadratureConfig,
) -> Result<f64> {
    if x == y {
        return Err(Error::invalid(
            "jump kernel is only defined off the diagonal",
        ));
    }
    let n = dec.dim();
    if x >= n || y >= n {
        return Err(Error::invalid(format!(
            "vertex index out of range ({x}, {y})"
        )));
    }
    let spec = jump_quadrature(dec, s, config)?;
    let modes: Vec<(f64, f64)> = (0..n)
        .map(|i| {
            (
                dec.values()[i],
                dec.vectors()[(x, i)] * dec.vectors()[(y, i)],
            )
        })
        .collect();
    spec.integrate(|t| {
        let p: f64 = modes.iter().map(|&(l, w)| (-l * t).exp_m1() * w).sum();
        p * t.powf(-1.0 - s)
    })
}

/// Applies the jump form to f. The time integral is evaluated per mode on
/// the same grid as `jump_kernel` (so the assembled kernel equals the
/// pairwise quadrature up to summation order) and then synthesized.
/// Requires a conservative decomposition (lambda_0 = 0, phi_0 = 1).
pub fn jump_form_apply(
    dec: &SpectralDecomposition,
    s: f64,
    f: &[f64],
    config: QuadratureConfig,
) -> Result<Vec<f64>> {
    let n = dec.dim();
    if f.len() != n {
        return Err(Error::invalid("function length differs from dimension"));
    }
    if dec.values()[0] != 0.0 {
        return Err(Error::invalid(
            "jump form needs a conservative decomposition",
        ));
    }
    let spec = jump_quadrature(dec, s, config)?;
    let weights = crate::par::map_indices(n, |i| {
        let l = dec.values()[i];
        if l == 0.0 {
            Ok(0.0)
        } else {
            spec.integrate(|t| (-l * t).exp_m1() * t.powf(-1.0 - s))
        }
    })
    .into_iter()
    .collect::<Result<Vec<f64>>>()?;
    let kernel = dec.kernel_from_weights(&weights);
    let mu = dec.measure();
    let norm = abs_gamma_neg(s);
    Ok((0..n)
        .map(|x| {
            let acc: f64 = (0..n)
                .filter(|&y| y != x)
                .map(|y| kernel[(x, y)] * (f[y] - f[x]) * mu[y])
                .sum();
            -acc / norm
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fractal::{build_fractal, Family, FractalSpec};
    use crate::linalg;
    use crate::spectral::{eigendecompose, GeneratorOperator};

    fn dec(family: Family, level: u32) -> SpectralDecomposition {
        let g = build_fractal(FractalSpec::new(family, level)).unwrap();
        eigendecompose(&GeneratorOperator::from_graph(&g).unwrap()).unwrap()
    }

    #[test]
    fn constants_are_annihilated() {
        let d = dec(Family::Gasket, 2);
        let out =
            jump_form_apply(&d, 0.6, &vec![3.0; d.dim()], QuadratureConfig::default()).unwrap();
        assert!(out.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn matches_spectral_route() {
        let d = dec(Family::Interval, 4);
        let f: Vec<f64> = (0..d.dim())
            .map(|i| ((i * 7 + 3) % 11) as f64 / 11.0 - 0.4)
            .collect();
        for &s in &[0.3, 0.5, 0.8] {
            let jump = jump_form_apply(&d, s, &f, QuadratureConfig::default()).unwrap();
            let spectral = d.fractional_apply(s, &f).unwrap();
            let diff: Vec<f64> = jump.iter().zip(&spectral).map(|(a, b)| a - b).collect();
            let rel = d.norm(&diff) / d.norm(&spectral);
            assert!(rel <= 1e-4, "s={s}: {rel:e}");
        }
    }

    #[test]
    fn pairwise_kernel_is_symmetric_positive_and_consistent() {
        let d = dec(Family::Gasket, 1);
        let q = QuadratureConfig::default();
        let s = 0.5;
        let spec = jump_quadrature(&d, s, q).unwrap();
        let weights: Vec<f64> = d
            .values()
            .iter()
            .map(|&l| {
                if l == 0.0 {
                    0.0
                } else {
                    spec.integrate(|t| (-l * t).exp_m1() * t.powf(-1.5))
                        .unwrap()
                }
            })
            .collect();
        let assembled = d.kernel_from_weights(&weights);
        for x in 0..d.dim() {
            for y in 0..d.dim() {
                if x == y {
                    continue;
                }
                let k = jump_kernel(&d, s, x, y, q).unwrap();
                assert!(k > 0.0);
                assert_eq!(k, jump_kernel(&d, s, y, x, q).unwrap());
                assert!((k - assembled[(x, y)]).abs() <= 1e-9 * k.abs().max(1.0));
            }
        }
        assert!(jump_kernel(&d, s, 0, 0, q).is_err());
        assert!(linalg::max_abs(&weights) > 0.0);
    }
}
