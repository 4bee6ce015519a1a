//! WebAssembly bindings for the browser demo in `www/`.
//!
//! A [`Demo`] owns one level-m graph and its eigendecomposition; the page
//! asks it for the spectrum, heat-kernel snapshots and fractional harmonic
//! functions, and draws the returned vertex values on a canvas.

use fracharm::dirichlet::{solve_fractional_dirichlet, DirichletProblem};
use fracharm::fractal::{build_fractal, Family, FractalGraph, FractalSpec};
use fracharm::spectral::{eigendecompose, GeneratorOperator, SpectralDecomposition};
use wasm_bindgen::prelude::*;

/// Largest level offered per family; keeps the dense eigensolver interactive.
pub fn demo_max_level(family: Family) -> u32 {
    match family {
        Family::Gasket => 5,
        Family::Vicsek => 3,
        Family::Interval => 8,
    }
}

fn js_err(e: impl std::fmt::Display) -> JsError {
    JsError::new(&e.to_string())
}

#[wasm_bindgen]
pub struct Demo {
    graph: FractalGraph,
    dec: SpectralDecomposition,
}

#[wasm_bindgen]
impl Demo {
    /// Builds the graph of `family` ("gasket", "vicsek", "interval") at `level`
    /// and diagonalizes its generator.
    #[wasm_bindgen(constructor)]
    pub fn new(family: &str, level: u32) -> Result<Demo, JsError> {
        let family: Family = family.parse().map_err(js_err)?;
        if level > demo_max_level(family) {
            return Err(JsError::new(&format!(
                "the demo stops at level {} for {family}",
                demo_max_level(family)
            )));
        }
        let graph = build_fractal(FractalSpec::new(family, level)).map_err(js_err)?;
        let op = GeneratorOperator::from_graph(&graph).map_err(js_err)?;
        let dec = eigendecompose(&op).map_err(js_err)?;
        Ok(Demo { graph, dec })
    }

    #[wasm_bindgen(js_name = vertexCount)]
    pub fn vertex_count(&self) -> usize {
        self.graph.len()
    }

    /// Vertex coordinates, flattened as x0, y0, x1, y1, ...
    pub fn positions(&self) -> Vec<f64> {
        self.graph
            .positions()
            .iter()
            .flat_map(|p| [p[0], p[1]])
            .collect()
    }

    /// Edge endpoints, flattened as i0, j0, i1, j1, ...
    pub fn edges(&self) -> Vec<u32> {
        self.graph
            .edges()
            .iter()
            .flat_map(|e| [e.i as u32, e.j as u32])
            .collect()
    }

    /// Eigenvalues of -L in increasing order.
    pub fn eigenvalues(&self) -> Vec<f64> {
        self.dec.values().to_vec()
    }

    /// Vertex nearest to the plane point (x, y); used to map clicks.
    #[wasm_bindgen(js_name = nearestVertex)]
    pub fn nearest_vertex(&self, x: f64, y: f64) -> usize {
        self.graph.nearest_vertex([x, y])
    }

    /// Heat kernel p_t(x0, .) as a function of the second vertex.
    #[wasm_bindgen(js_name = heatKernel)]
    pub fn heat_kernel(&self, t: f64, x0: usize) -> Result<Vec<f64>, JsError> {
        if x0 >= self.graph.len() {
            return Err(JsError::new("vertex out of range"));
        }
        (0..self.graph.len())
            .map(|y| self.dec.heat_kernel(t, x0, y).map_err(js_err))
            .collect()
    }

    /// Solution of (-L)^s u = 0 in the ball B(x0, radius) with exterior
    /// datum u = 1 on the vertices left of x = 1/3 and 0 elsewhere.
    #[wasm_bindgen(js_name = harmonicInBall)]
    pub fn harmonic_in_ball(&self, s: f64, x0: usize, radius: f64) -> Result<Vec<f64>, JsError> {
        let domain = self.graph.ball(x0, radius).map_err(js_err)?;
        let datum = self
            .graph
            .positions()
            .iter()
            .map(|p| if p[0] < 1.0 / 3.0 { 1.0 } else { 0.0 })
            .collect();
        let problem = DirichletProblem::new(s, &domain, datum).map_err(js_err)?;
        let solution = solve_fractional_dirichlet(&self.dec, &problem).map_err(js_err)?;
        Ok(solution.u)
    }
}
