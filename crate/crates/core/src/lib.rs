//! Fractional powers of Dirichlet-form generators on graph approximations of
//! self-similar fractals, their harmonic extension to the upper half-space
//! with the weight y^{1-2s}, and empirical checks of the resulting regularity
//! estimates (sub-Gaussian heat kernel bounds, local lower estimates,
//! oscillation decay, parabolic and elliptic Harnack inequalities).
//!
//! ```
//! use fracharm::fractal::{build_fractal, Family, FractalSpec};
//! use fracharm::spectral::{eigendecompose, GeneratorOperator};
//!
//! let graph = build_fractal(FractalSpec::new(Family::Gasket, 4))?;
//! let dec = eigendecompose(&GeneratorOperator::from_graph(&graph)?)?;
//! let f: Vec<f64> = graph.positions().iter().map(|p| p[0]).collect();
//! let half = dec.fractional_apply(0.5, &f)?; // (-L)^{1/2} f
//! let p = dec.heat_kernel(1e-3, 0, 0)?; // p_t(x, x)
//! assert_eq!(half.len(), graph.len());
//! assert!(p > 0.0);
//! # Ok::<(), fracharm::Error>(())
//! ```

// `!(x > 0.0)` is used on purpose: it also rejects NaN. Index loops mirror
// the matrix formulas they implement.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod dirichlet;
pub mod error;
pub mod extension;
pub mod fractal;
pub mod linalg;
pub mod output;
pub mod quadrature;
pub mod special;
pub mod spectral;
pub mod verify;

mod par;

pub use error::{Error, Result};
