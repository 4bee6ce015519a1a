//! Anisotropic product domains and cylinders for the parabolic checks.
//!
//! A point z = (x, y) of the extended space has the distance scale r in y
//! and r^{2/d_W} in x; the time depth of a cylinder of scale r is r^2.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::extension::{
    assemble_extended_operator, extended_killed_kernel, product_domain, ExtendedKilledKernel,
    ExtendedOperator, ProductDomain, YGrid,
};
use crate::fractal::{build_fractal, Family, FractalGraph, FractalSpec};
use crate::spectral::{GeneratorOperator, SpectralDecomposition};

/// Parameters of an extended test geometry: a level-m graph times a
/// y-grid, and the product domain D(z0, R), z0 = (x0, 0).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProductGeometry {
    pub family: Family,
    pub level: u32,
    pub s: f64,
    /// Target position of x0; the nearest vertex is used.
    pub center: [f64; 2],
    /// Domain scale R (y-radius R, x-radius R^{2/d_W}).
    pub radius: f64,
    pub cells: usize,
    pub y_max: f64,
}

impl ProductGeometry {
    /// Default geometry for a family: x-radius 1/4 around the midpoint on
    /// the interval and the center of the Vicsek set, 1/2 around the central
    /// junction of the gasket; 24 y-cells up to 2R.
    pub fn standard(family: Family, level: u32, s: f64) -> Self {
        let (center, x_radius) = match family {
            Family::Interval => ([0.5, 0.0], 0.25),
            Family::Gasket => ([0.5, 3f64.sqrt() / 4.0], 0.5),
            Family::Vicsek => ([0.5, 0.5], 0.25),
        };
        let radius = f64::powf(x_radius, family.scaling().d_w / 2.0);
        Self {
            family,
            level,
            s,
            center,
            radius,
            cells: 24,
            y_max: 2.0 * radius,
        }
    }

    pub fn with_level(&self, level: u32) -> Self {
        Self {
            level,
            ..self.clone()
        }
    }

    pub fn build(&self) -> Result<KilledSetup> {
        let graph = build_fractal(FractalSpec::new(self.family, self.level))?;
        let op = GeneratorOperator::from_graph(&graph)?;
        let grid = YGrid::new(self.s, self.y_max, self.cells)?;
        let ext = assemble_extended_operator(&op, &grid);
        let x0 = graph.nearest_vertex(self.center);
        let domain = product_domain(&graph, &ext, x0, 0.0, self.radius)?;
        let kernel = extended_killed_kernel(&ext, &domain)?;
        Ok(KilledSetup {
            graph,
            ext,
            domain,
            kernel,
        })
    }
}

/// Everything the parabolic checks need about one product domain.
#[derive(Debug)]
pub struct KilledSetup {
    pub graph: FractalGraph,
    pub ext: ExtendedOperator,
    pub domain: ProductDomain,
    pub kernel: ExtendedKilledKernel,
}

impl KilledSetup {
    pub fn d_w(&self) -> f64 {
        self.graph.d_w()
    }

    /// Local indices (into the domain) of D(z0, r) for r <= R.
    pub fn sub_domain(&self, r: f64) -> Result<Vec<usize>> {
        let d = &self.domain;
        let vertices = self.graph.ball(d.x0, r.powf(2.0 / self.d_w()))?;
        let nodes = self.ext.grid().nodes();
        let mut out: Vec<usize> = d
            .layers
            .iter()
            .filter(|&&j| (nodes[j] - d.y0).abs() < r)
            .flat_map(|&j| vertices.iter().map(move |&x| (x, j)))
            .filter_map(|(x, j)| d.local(self.ext.index(x, j)))
            .collect();
        out.sort_unstable();
        if out.is_empty() {
            return Err(Error::invalid(format!(
                "sub-domain of scale {r} contains no nodes"
            )));
        }
        Ok(out)
    }

    pub fn spectral(&self) -> &SpectralDecomposition {
        self.kernel.spectral()
    }
}

/// Cylinder C((t0, z0), r) = (t0 - r^2, t0) x D(z0, r).
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct AnisotropicCylinder {
    pub t0: f64,
    pub radius: f64,
}

impl AnisotropicCylinder {
    pub fn x_radius(&self, d_w: f64) -> f64 {
        self.radius.powf(2.0 / d_w)
    }

    pub fn y_radius(&self) -> f64 {
        self.radius
    }

    pub fn depth(&self) -> f64 {
        self.radius * self.radius
    }

    /// The concentric cylinder of scale delta * r with the same top time.
    pub fn shrink(&self, delta: f64) -> Self {
        Self {
            t0: self.t0,
            radius: delta * self.radius,
        }
    }

    /// `count` midpoint times in (t0 - r^2, t0).
    pub fn times(&self, count: usize) -> Vec<f64> {
        time_samples(self.t0 - self.depth(), self.t0, count)
    }
}

/// `count` midpoint samples of the open interval (lo, hi).
pub fn time_samples(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    (0..count)
        .map(|k| lo + (hi - lo) * (k as f64 + 0.5) / count as f64)
        .collect()
}

/// u(t, z) = sum_i e^{-lambda_i t} c_i phi_i(z) on the local indices `subset`.
pub fn evolve_on(
    dec: &SpectralDecomposition,
    coeffs: &[f64],
    t: f64,
    subset: &[usize],
) -> Vec<f64> {
    let weights: Vec<f64> = dec
        .values()
        .iter()
        .zip(coeffs)
        .map(|(&l, &c)| (-l * t).exp() * c)
        .collect();
    subset
        .iter()
        .map(|&z| {
            weights
                .iter()
                .enumerate()
                .filter(|(_, w)| **w != 0.0)
                .map(|(i, w)| w * dec.vectors()[(z, i)])
                .sum()
        })
        .collect()
}

/// max - min of the values.
pub fn oscillation(values: impl IntoIterator<Item = f64>) -> f64 {
    let (lo, hi) = values
        .into_iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
            (lo.min(v), hi.max(v))
        });
    if lo.is_finite() {
        hi - lo
    } else {
        0.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cylinder_scaling() {
        let c = AnisotropicCylinder {
            t0: 1.0,
            radius: 0.5,
        };
        assert_eq!(c.depth(), 0.25);
        assert!((c.x_radius(2.0) - 0.5).abs() < 1e-15);
        assert!((c.x_radius(4.0) - 0.5f64.sqrt()).abs() < 1e-15);
        let t = c.times(4);
        assert!(t.iter().all(|&x| x > 0.75 && x < 1.0));
        assert_eq!(c.shrink(0.5).depth(), 0.0625);
        assert_eq!(oscillation([1.0, -2.0, 0.5]), 3.0);
        assert_eq!(oscillation(Vec::new()), 0.0);
    }

    #[test]
    fn standard_geometry_builds() {
        let g = ProductGeometry::standard(Family::Interval, 4, 0.5);
        let setup = g.build().unwrap();
        assert!(!setup.domain.is_empty());
        let all = setup.sub_domain(g.radius).unwrap();
        assert_eq!(all.len(), setup.domain.len());
        let small = setup.sub_domain(0.01).unwrap();
        assert!(small.len() < all.len());
        // the evolution of a single mode is the mode times its decay
        let dec = setup.spectral();
        let mut c = vec![0.0; dec.dim()];
        c[0] = 1.0;
        let u = evolve_on(dec, &c, 0.3, &all);
        let want = (-dec.values()[0] * 0.3).exp() * dec.vector(0)[all[3]];
        assert!((u[3] - want).abs() < 1e-14);
    }
}
