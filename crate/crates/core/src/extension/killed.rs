//! Heat kernels of the extended diffusion killed on leaving an anisotropic
//! product domain D(z0, R) = B(x0, R^{2/d_W}) x (y0 - R, y0 + R).
//!
//! The grid covers y >= 0 only; the layer y = 0 carries a zero-flux
//! condition, which is the even reflection of the two-sided space.

use serde::Serialize;

use super::ExtendedOperator;
use crate::error::{Error, Result};
use crate::fractal::FractalGraph;
use crate::linalg::DenseMatrix;
use crate::spectral::{eigendecompose, SpectralDecomposition};

/// Node set of a product domain on the extended grid.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProductDomain {
    pub x0: usize,
    pub y0: f64,
    pub radius: f64,
    /// Base vertices within distance radius^{2/d_W} of x0.
    pub vertices: Vec<usize>,
    /// Layer indices j with |y_j - y0| < radius.
    pub layers: Vec<usize>,
    /// Extended node indices (layer-major, ascending).
    pub nodes: Vec<usize>,
}

impl ProductDomain {
    pub fn x_radius(&self, d_w: f64) -> f64 {
        self.radius.powf(2.0 / d_w)
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Local position of extended node z, if inside.
    pub fn local(&self, z: usize) -> Option<usize> {
        self.nodes.binary_search(&z).ok()
    }
}

/// D(z0, R) for z0 = (x0, y0).
pub fn product_domain(
    graph: &FractalGraph,
    ext: &ExtendedOperator,
    x0: usize,
    y0: f64,
    radius: f64,
) -> Result<ProductDomain> {
    if graph.len() != ext.base_dim() {
        return Err(Error::invalid("graph and extended operator differ in size"));
    }
    if !(radius > 0.0) || !(y0 >= 0.0) {
        return Err(Error::invalid(
            "product domain needs radius > 0 and y0 >= 0",
        ));
    }
    let vertices = graph.ball(x0, radius.powf(2.0 / graph.d_w()))?;
    let layers: Vec<usize> = ext
        .grid()
        .nodes()
        .iter()
        .enumerate()
        .filter(|(_, &y)| (y - y0).abs() < radius)
        .map(|(j, _)| j)
        .collect();
    let mut nodes: Vec<usize> = layers
        .iter()
        .flat_map(|&j| vertices.iter().map(move |&x| ext.index(x, j)))
        .collect();
    nodes.sort_unstable();
    if nodes.is_empty() {
        return Err(Error::invalid("product domain contains no grid nodes"));
    }
    if nodes.len() == ext.dim() {
        return Err(Error::invalid(
            "product domain must leave its complement nonempty",
        ));
    }
    Ok(ProductDomain {
        x0,
        y0,
        radius,
        vertices,
        layers,
        nodes,
    })
}

/// Spectral data of the killed extended diffusion on a product domain.
#[derive(Clone, Debug)]
pub struct ExtendedKilledKernel {
    domain: ProductDomain,
    spectral: SpectralDecomposition,
}

pub fn extended_killed_kernel(
    ext: &ExtendedOperator,
    domain: &ProductDomain,
) -> Result<ExtendedKilledKernel> {
    if domain.is_empty() {
        return Err(Error::invalid("empty product domain"));
    }
    if domain.len() >= ext.dim() {
        return Err(Error::invalid("product domain must be a proper subset"));
    }
    let gen = ext.generator(Some(&domain.nodes))?;
    Ok(ExtendedKilledKernel {
        domain: domain.clone(),
        spectral: eigendecompose(&gen)?,
    })
}

impl ExtendedKilledKernel {
    pub fn domain(&self) -> &ProductDomain {
        &self.domain
    }

    pub fn spectral(&self) -> &SpectralDecomposition {
        &self.spectral
    }

    /// q_t^D(z, z') for local indices, density with respect to mu_a.
    pub fn kernel(&self, t: f64) -> Result<DenseMatrix> {
        self.spectral.heat_matrix(t)
    }

    pub fn entry(&self, t: f64, a: usize, b: usize) -> Result<f64> {
        self.spectral.heat_kernel(t, a, b)
    }

    /// Kernel rows restricted to a set of local indices: the table
    /// q_t^D(z, z') for z, z' in `subset`.
    pub fn sub_kernel(&self, t: f64, subset: &[usize]) -> Result<DenseMatrix> {
        let vals = self.spectral.values();
        let k = subset.len();
        let weights: Vec<f64> = vals.iter().map(|&l| (-l * t).exp()).collect();
        if !(t > 0.0) {
            return Err(Error::invalid("time must be positive"));
        }
        let mut out = DenseMatrix::zeros(k);
        let v = self.spectral.vectors();
        for (i, &w) in weights.iter().enumerate() {
            if w < 1e-300 {
                continue;
            }
            for (b, &zb) in subset.iter().enumerate() {
                let wb = w * v[(zb, i)];
                for (a, &za) in subset.iter().enumerate().take(b + 1) {
                    out[(a, b)] += wb * v[(za, i)];
                }
            }
        }
        for b in 0..k {
            for a in 0..b {
                out[(b, a)] = out[(a, b)];
            }
        }
        Ok(out)
    }
}
