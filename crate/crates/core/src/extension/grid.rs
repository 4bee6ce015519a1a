//! Graded grid in the extension variable y with the weight y^a, a = 1 - 2s.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::quadrature::check_open_unit;

/// Decay target for the slowest non-constant mode at the top of the grid.
pub const TOP_DECAY: f64 = 1e-6;

/// Default number of y-cells.
pub const DEFAULT_CELLS: usize = 160;

/// Nodes 0 = y_0 < ... < y_M = y_max with y_j = y_max (j/M)^kappa,
/// kappa = max(1, 1/s), and the weight integrals of y^a used by the
/// conservative discretization.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct YGrid {
    s: f64,
    y_max: f64,
    nodes: Vec<f64>,
    cell_weights: Vec<f64>,
    link_weights: Vec<f64>,
}

impl YGrid {
    pub fn new(s: f64, y_max: f64, cells: usize) -> Result<Self> {
        check_open_unit(s)?;
        if !(y_max > 0.0 && y_max.is_finite()) {
            return Err(Error::invalid(format!(
                "y_max must be positive, got {y_max}"
            )));
        }
        if cells == 0 {
            return Err(Error::invalid("y-grid needs at least one cell"));
        }
        let kappa = Self::grading_exponent(s);
        let nodes: Vec<f64> = (0..=cells)
            .map(|j| {
                if j == cells {
                    y_max
                } else {
                    y_max * (j as f64 / cells as f64).powf(kappa)
                }
            })
            .collect();
        let a = 1.0 - 2.0 * s;
        let link_weights: Vec<f64> = nodes
            .windows(2)
            .map(|w| weight_integral(a, w[0], w[1]))
            .collect();
        let cell_weights: Vec<f64> = (0..=cells)
            .map(|j| {
                let lo = if j == 0 {
                    0.0
                } else {
                    0.5 * (nodes[j - 1] + nodes[j])
                };
                let hi = if j == cells {
                    y_max
                } else {
                    0.5 * (nodes[j] + nodes[j + 1])
                };
                weight_integral(a, lo, hi)
            })
            .collect();
        Ok(Self {
            s,
            y_max,
            nodes,
            cell_weights,
            link_weights,
        })
    }

    /// y_max such that exp(-sqrt(lambda_1) y_max) = TOP_DECAY.
    pub fn default_y_max(lambda_1: f64) -> Result<f64> {
        if !(lambda_1 > 0.0) {
            return Err(Error::invalid(
                "default y_max needs a positive spectral gap",
            ));
        }
        Ok(-TOP_DECAY.ln() / lambda_1.sqrt())
    }

    /// Grid with the default top and `cells` cells.
    pub fn for_gap(s: f64, lambda_1: f64, cells: usize) -> Result<Self> {
        Self::new(s, Self::default_y_max(lambda_1)?, cells)
    }

    pub fn grading_exponent(s: f64) -> f64 {
        (1.0 / s).max(1.0)
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    pub fn weight_exponent(&self) -> f64 {
        1.0 - 2.0 * self.s
    }

    pub fn y_max(&self) -> f64 {
        self.y_max
    }

    /// Number of cells M (there are M + 1 nodes).
    pub fn cells(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// w_j: integral of y^a over the dual cell of node j.
    pub fn cell_weights(&self) -> &[f64] {
        &self.cell_weights
    }

    /// integral of y^a over [y_j, y_{j+1}].
    pub fn link_weights(&self) -> &[f64] {
        &self.link_weights
    }
}

/// integral_lo^hi y^a dy for 0 <= lo <= hi, a > -1.
pub fn weight_integral(a: f64, lo: f64, hi: f64) -> f64 {
    let p = 1.0 + a;
    (hi.powf(p) - lo.powf(p)) / p
}

/// nu_a(B(y0, r)) = integral over (y0 - r, y0 + r) of |y|^a dy on the full line.
pub fn nu_a_ball(a: f64, y0: f64, r: f64) -> f64 {
    let p = 1.0 + a;
    let prim = |y: f64| y.signum() * y.abs().powf(p) / p;
    prim(y0 + r) - prim(y0 - r)
}
