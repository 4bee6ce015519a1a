//! Harmonic extension to the half-space X x (0, inf) with the weight y^{1-2s}:
//! per-mode profiles, the spectral (Poisson) extension, the discrete
//! degenerate operator and its variational solver, the Dirichlet-to-Neumann
//! map, and killed kernels of the extended diffusion.

mod grid;
mod killed;
mod operator;
mod profile;

use std::io::Write;

use serde::Serialize;

pub use grid::{nu_a_ball, weight_integral, YGrid, DEFAULT_CELLS, TOP_DECAY};
pub use killed::{extended_killed_kernel, product_domain, ExtendedKilledKernel, ProductDomain};
pub use operator::{
    assemble_extended_operator, solve_extension_bvp, BvpOptions, BvpSolution, ExtendedOperator,
};
pub use profile::{per_mode_profile, per_mode_profile_bessel, profile_defect};

use crate::error::{Error, Result};
use crate::quadrature::{check_open_unit, QuadratureConfig};
use crate::special::gamma;
use crate::spectral::SpectralDecomposition;

/// Values U(x_i, y_j) of an extension, stored layer by layer
/// (entry j * n + x).
#[derive(Clone, Debug, PartialEq)]
pub struct ExtensionField {
    grid: YGrid,
    n: usize,
    values: Vec<f64>,
}

impl ExtensionField {
    pub(crate) fn from_layers(grid: YGrid, n: usize, values: Vec<f64>) -> Self {
        assert_eq!(values.len(), n * (grid.cells() + 1));
        Self { grid, n, values }
    }

    pub fn s(&self) -> f64 {
        self.grid.s()
    }

    pub fn grid(&self) -> &YGrid {
        &self.grid
    }

    pub fn vertex_count(&self) -> usize {
        self.n
    }

    pub fn value(&self, x: usize, j: usize) -> f64 {
        self.values[j * self.n + x]
    }

    pub fn layer(&self, j: usize) -> &[f64] {
        &self.values[j * self.n..(j + 1) * self.n]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// max |U - V| over all nodes.
    pub fn sup_distance(&self, other: &ExtensionField) -> f64 {
        assert_eq!(self.values.len(), other.values.len());
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// CSV with columns x_id, y_index, y_value, U.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "x_id,y_index,y_value,U")?;
        for (j, &y) in self.grid.nodes().iter().enumerate() {
            for x in 0..self.n {
                writeln!(
                    w,
                    "{x},{j},{},{}",
                    crate::output::sig17(y),
                    crate::output::sig17(self.value(x, j))
                )?;
            }
        }
        Ok(())
    }
}

/// U(x, y_j) = sum_i <f, phi_i> phi_i(x) psi_s(lambda_i, y_j) with s taken
/// from the grid. The bottom layer is f itself.
pub fn poisson_extend(
    dec: &SpectralDecomposition,
    f: &[f64],
    grid: &YGrid,
    config: QuadratureConfig,
) -> Result<ExtensionField> {
    let n = dec.dim();
    if f.len() != n {
        return Err(Error::invalid("function length differs from dimension"));
    }
    let s = grid.s();
    let coeffs = dec.coefficients(f);
    let layers = crate::par::map_indices(grid.cells() + 1, |j| -> Result<Vec<f64>> {
        if j == 0 {
            return Ok(f.to_vec());
        }
        let y = grid.nodes()[j];
        let weighted = coeffs
            .iter()
            .zip(dec.values())
            .map(|(&c, &l)| Ok(c * per_mode_profile(l, s, y, config)?))
            .collect::<Result<Vec<f64>>>()?;
        Ok(dec.synthesize(&weighted))
    });
    let mut values = Vec::with_capacity(n * (grid.cells() + 1));
    for layer in layers {
        values.extend(layer?);
    }
    Ok(ExtensionField::from_layers(grid.clone(), n, values))
}

/// 2^{2s-1} Gamma(s) / Gamma(1-s); (-L)^s f = -this * lim y^{1-2s} dU/dy.
pub fn dtn_constant(s: f64) -> f64 {
    2f64.powf(2.0 * s - 1.0) * gamma(s) / gamma(1.0 - s)
}

/// Relative error bound of the first-cell extraction for the stiffest mode:
/// psi = 1 - A z^{2s} + B z^2 + ..., so the extraction is off by
/// (B/A) z^{2-2s} with B/A = Gamma(1+s) 4^{s-1} / Gamma(2-s), z = sqrt(lambda_max) y_1.
pub fn dtn_error_estimate(s: f64, lambda_max: f64, y1: f64) -> f64 {
    let ratio = gamma(1.0 + s) * 4f64.powf(s - 1.0) / gamma(2.0 - s);
    ratio * (lambda_max.max(0.0).sqrt() * y1).powf(2.0 - 2.0 * s)
}

/// Settings for the spectral Dirichlet-to-Neumann map.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DtnOptions {
    /// Accepted estimated relative error.
    pub tolerance: f64,
    /// Cell count of the coarsest graded grid tried.
    pub base_cells: usize,
    /// Maximum number of grid doublings.
    pub max_doublings: u32,
    #[serde(skip)]
    pub quadrature: QuadratureConfig,
}

impl Default for DtnOptions {
    fn default() -> Self {
        Self {
            tolerance: 1e-2,
            base_cells: DEFAULT_CELLS,
            max_doublings: 24,
            quadrature: QuadratureConfig::default(),
        }
    }
}

/// Output of the Dirichlet-to-Neumann map.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DtnResult {
    pub values: Vec<f64>,
    /// First grid height used by the extraction.
    pub y1: f64,
    /// Cell count of the graded grid whose first node is y1.
    pub cells: usize,
    /// Estimated relative extraction error.
    pub estimate: f64,
}

/// DtN map evaluated from the spectral extension. The graded grid (default
/// top, cell count base_cells * 2^k) is refined until the estimated
/// boundary-layer error is at most a quarter of the tolerance; only the
/// first node above the boundary is evaluated.
pub fn dtn(
    dec: &SpectralDecomposition,
    s: f64,
    f: &[f64],
    options: DtnOptions,
) -> Result<DtnResult> {
    check_open_unit(s)?;
    let y_max = YGrid::default_y_max(dec.spectral_gap())?;
    let kappa = YGrid::grading_exponent(s);
    let lambda_max = dec.lambda_max();
    let mut cells = options.base_cells.max(1);
    let mut estimate = f64::INFINITY;
    for _ in 0..=options.max_doublings {
        let y1 = y_max * (cells as f64).powf(-kappa);
        estimate = dtn_error_estimate(s, lambda_max, y1);
        if estimate <= 0.25 * options.tolerance {
            return Ok(DtnResult {
                values: dtn_at(dec, s, f, y1, options.quadrature)?,
                y1,
                cells,
                estimate,
            });
        }
        cells *= 2;
    }
    Err(Error::Resolution {
        estimate,
        tolerance: options.tolerance,
    })
}

/// First-cell DtN extraction at a prescribed height y1:
/// -C (U(y1) - U(0)) 2s / y1^{2s}, with U(y1) - U(0) formed per mode
/// without cancellation.
pub fn dtn_at(
    dec: &SpectralDecomposition,
    s: f64,
    f: &[f64],
    y1: f64,
    config: QuadratureConfig,
) -> Result<Vec<f64>> {
    check_open_unit(s)?;
    if f.len() != dec.dim() {
        return Err(Error::invalid("function length differs from dimension"));
    }
    if !(y1 > 0.0) {
        return Err(Error::invalid("extraction height must be positive"));
    }
    let scale = dtn_constant(s) * 2.0 * s / y1.powf(2.0 * s);
    let multipliers = crate::par::map_indices(dec.dim(), |i| {
        profile_defect(dec.values()[i], s, y1, config)
    })
    .into_iter()
    .collect::<Result<Vec<f64>>>()?;
    let coeffs: Vec<f64> = dec
        .coefficients(f)
        .iter()
        .zip(&multipliers)
        .map(|(c, m)| c * m * scale)
        .collect();
    Ok(dec.synthesize(&coeffs))
}

/// DtN map from a tabulated extension field, using its first two layers.
/// Fails with a resolution error if the estimated error (driven by the
/// largest eigenvalue `lambda_max`) exceeds `tolerance`.
pub fn dtn_from_field(
    field: &ExtensionField,
    lambda_max: f64,
    tolerance: f64,
) -> Result<DtnResult> {
    let s = field.s();
    let y1 = field.grid().nodes()[1];
    let estimate = dtn_error_estimate(s, lambda_max, y1);
    if estimate > tolerance {
        return Err(Error::Resolution {
            estimate,
            tolerance,
        });
    }
    let scale = -dtn_constant(s) * 2.0 * s / y1.powf(2.0 * s);
    let values = field
        .layer(1)
        .iter()
        .zip(field.layer(0))
        .map(|(u1, u0)| scale * (u1 - u0))
        .collect();
    Ok(DtnResult {
        values,
        y1,
        cells: field.grid().cells(),
        estimate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fractal::{build_fractal, Family, FractalSpec};
    use crate::spectral::{eigendecompose, GeneratorOperator};

    fn dec(family: Family, level: u32) -> SpectralDecomposition {
        let g = build_fractal(FractalSpec::new(family, level)).unwrap();
        eigendecompose(&GeneratorOperator::from_graph(&g).unwrap()).unwrap()
    }

    fn rel_err(d: &SpectralDecomposition, a: &[f64], b: &[f64]) -> f64 {
        let diff: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
        d.norm(&diff) / d.norm(b)
    }

    #[test]
    fn constants_extend_to_constants() {
        let d = dec(Family::Gasket, 2);
        let grid = YGrid::for_gap(0.3, d.spectral_gap(), 20).unwrap();
        let field =
            poisson_extend(&d, &vec![2.0; d.dim()], &grid, QuadratureConfig::default()).unwrap();
        assert!(field.values().iter().all(|&v| (v - 2.0).abs() < 1e-9));
        let out = dtn(&d, 0.3, &vec![2.0; d.dim()], DtnOptions::default()).unwrap();
        assert!(out.values.iter().all(|v| v.abs() < 1e-9));
    }

    #[test]
    fn half_order_eigenmode_profile() {
        let d = dec(Family::Interval, 4);
        let grid = YGrid::for_gap(0.5, d.spectral_gap(), 40).unwrap();
        let phi = d.vector(1).to_vec();
        let field = poisson_extend(&d, &phi, &grid, QuadratureConfig::default()).unwrap();
        let k = d.values()[1].sqrt();
        for (j, &y) in grid.nodes().iter().enumerate() {
            for x in 0..d.dim() {
                assert!((field.value(x, j) - phi[x] * (-k * y).exp()).abs() < 1e-8);
            }
        }
        // only the constant mode survives at the top
        let f: Vec<f64> = (0..d.dim()).map(|i| (i as f64 * 0.7).sin()).collect();
        let far = YGrid::new(0.5, 30.0 / k, 10).unwrap();
        let field = poisson_extend(&d, &f, &far, QuadratureConfig::default()).unwrap();
        let mean = d.inner(&f, &vec![1.0; d.dim()]);
        assert!(field.layer(10).iter().all(|u| (u - mean).abs() <= 1e-10));
    }

    #[test]
    fn dtn_of_eigenfunction_at_half() {
        let d = dec(Family::Interval, 4);
        assert!((dtn_constant(0.5) - 1.0).abs() < 1e-15);
        let phi = d.vector(1).to_vec();
        let out = dtn(&d, 0.5, &phi, DtnOptions::default()).unwrap();
        let k = d.values()[1].sqrt();
        for (o, p) in out.values.iter().zip(&phi) {
            assert!((o - k * p).abs() <= 1e-3 * k);
        }
    }

    #[test]
    fn dtn_matches_fractional_power_and_refines() {
        let d = dec(Family::Gasket, 3);
        let f: Vec<f64> = (0..d.dim())
            .map(|i| ((i * 13 + 5) % 17) as f64 / 17.0)
            .collect();
        for &s in &[0.3, 0.5, 0.7] {
            let want = d.fractional_apply(s, &f).unwrap();
            let out = dtn(&d, s, &f, DtnOptions::default()).unwrap();
            let err = rel_err(&d, &out.values, &want);
            assert!(err <= 1e-2, "s={s}: {err:e}");
            let finer = dtn_at(
                &d,
                s,
                &f,
                out.y1 * 2f64.powf(-YGrid::grading_exponent(s)),
                QuadratureConfig::default(),
            )
            .unwrap();
            let err2 = rel_err(&d, &finer, &want);
            assert!(err2 <= 0.6 * err, "s={s}: {err:e} -> {err2:e}");
        }
    }

    #[test]
    fn field_route_reports_resolution() {
        let d = dec(Family::Interval, 4);
        let grid = YGrid::for_gap(0.7, d.spectral_gap(), 160).unwrap();
        let f = d.vector(2).to_vec();
        let field = poisson_extend(&d, &f, &grid, QuadratureConfig::default()).unwrap();
        let err = dtn_from_field(&field, d.lambda_max(), 1e-2).unwrap_err();
        assert!(matches!(err, Error::Resolution { .. }));
        let grid = YGrid::for_gap(0.5, d.spectral_gap(), 160).unwrap();
        let field = poisson_extend(&d, &f, &grid, QuadratureConfig::default()).unwrap();
        let ok = dtn_from_field(&field, d.lambda_max(), 1e-2).unwrap();
        let want = d.fractional_apply(0.5, &f).unwrap();
        assert!(rel_err(&d, &ok.values, &want) <= 1e-2);
    }

    #[test]
    fn csv_export() {
        let d = dec(Family::Interval, 1);
        let grid = YGrid::new(0.5, 1.0, 2).unwrap();
        let field =
            poisson_extend(&d, &[0.0, 1.0, 2.0], &grid, QuadratureConfig::default()).unwrap();
        let mut buf = Vec::new();
        field.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "x_id,y_index,y_value,U");
        assert_eq!(lines.len(), 1 + 3 * 3);
        assert!(lines[2].starts_with("1,0,0.0000000000000000e0,1.0000000000000000e0"));
    }
}
