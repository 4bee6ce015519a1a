//! Discrete extended Dirichlet form on the product grid X x {y_0, ..., y_M}:
//!
//! E_a(U, V) = sum_j w_j E(U_j, V_j) + sum_x mu(x) sum_j hw_j (U_{j+1} - U_j)(V_{j+1} - V_j) / dy_j^2
//!
//! with w_j the y^a-mass of the dual cell of y_j and hw_j that of [y_j, y_{j+1}].
//! Its generator with respect to mu_a(x, j) = mu(x) w_j is the conservative
//! discretization of L + y^{-a} d/dy (y^a d/dy). Node (x, j) has index j n + x.

use serde::Serialize;

use super::{ExtensionField, YGrid};
use crate::error::{Error, Result};
use crate::linalg::{self, CgSummary, DenseMatrix};
use crate::spectral::GeneratorOperator;

#[derive(Clone, Debug)]
pub struct ExtendedOperator {
    n: usize,
    measure: Vec<f64>,
    edges: Vec<(usize, usize, f64)>,
    grid: YGrid,
    // hw_j / dy_j^2
    vertical: Vec<f64>,
}

/// Builds the product form from the base generator (conductances are read
/// off the symmetrized matrix) and the y-grid.
pub fn assemble_extended_operator(op: &GeneratorOperator, grid: &YGrid) -> ExtendedOperator {
    let n = op.dim();
    let mu = op.measure();
    let sym = op.symmetric();
    let mut edges = Vec::new();
    for j in 0..n {
        for i in 0..j {
            let v = sym[(i, j)];
            if v != 0.0 {
                edges.push((i, j, v * (mu[i] * mu[j]).sqrt()));
            }
        }
    }
    let vertical = grid
        .link_weights()
        .iter()
        .zip(grid.nodes().windows(2))
        .map(|(hw, w)| hw / ((w[1] - w[0]) * (w[1] - w[0])))
        .collect();
    ExtendedOperator {
        n,
        measure: mu.to_vec(),
        edges,
        grid: grid.clone(),
        vertical,
    }
}

impl ExtendedOperator {
    pub fn base_dim(&self) -> usize {
        self.n
    }

    pub fn layers(&self) -> usize {
        self.grid.cells() + 1
    }

    pub fn dim(&self) -> usize {
        self.n * self.layers()
    }

    pub fn grid(&self) -> &YGrid {
        &self.grid
    }

    pub fn base_measure(&self) -> &[f64] {
        &self.measure
    }

    pub fn index(&self, x: usize, j: usize) -> usize {
        j * self.n + x
    }

    /// mu_a(x, j) = mu(x) w_j for every node.
    pub fn mass(&self) -> Vec<f64> {
        let w = self.grid.cell_weights();
        (0..self.dim())
            .map(|z| self.measure[z % self.n] * w[z / self.n])
            .collect()
    }

    /// E_a(U, V).
    pub fn energy(&self, u: &[f64], v: &[f64]) -> f64 {
        assert_eq!(u.len(), self.dim());
        assert_eq!(v.len(), self.dim());
        let n = self.n;
        let w = self.grid.cell_weights();
        let mut horizontal = 0.0;
        for j in 0..self.layers() {
            let o = j * n;
            let layer: f64 = self
                .edges
                .iter()
                .map(|&(a, b, c)| c * (u[o + a] - u[o + b]) * (v[o + a] - v[o + b]))
                .sum();
            horizontal += w[j] * layer;
        }
        let mut vertical = 0.0;
        for x in 0..n {
            let col: f64 = self
                .vertical
                .iter()
                .enumerate()
                .map(|(j, g)| {
                    let (lo, hi) = (j * n + x, (j + 1) * n + x);
                    g * (u[hi] - u[lo]) * (v[hi] - v[lo])
                })
                .sum();
            vertical += self.measure[x] * col;
        }
        horizontal + vertical
    }

    /// Stiffness matrix K applied to U, so that E_a(U, V) = <K U, V>.
    pub fn apply_stiffness(&self, u: &[f64], out: &mut [f64]) {
        let n = self.n;
        let w = self.grid.cell_weights();
        out.iter_mut().for_each(|o| *o = 0.0);
        for j in 0..self.layers() {
            let o = j * n;
            for &(a, b, c) in &self.edges {
                let flux = w[j] * c * (u[o + a] - u[o + b]);
                out[o + a] += flux;
                out[o + b] -= flux;
            }
        }
        for (j, g) in self.vertical.iter().enumerate() {
            for x in 0..n {
                let (lo, hi) = (j * n + x, (j + 1) * n + x);
                let flux = self.measure[x] * g * (u[hi] - u[lo]);
                out[hi] += flux;
                out[lo] -= flux;
            }
        }
    }

    /// Diagonal of K.
    pub fn stiffness_diagonal(&self) -> Vec<f64> {
        let n = self.n;
        let w = self.grid.cell_weights();
        let mut d = vec![0.0; self.dim()];
        for j in 0..self.layers() {
            for &(a, b, c) in &self.edges {
                d[j * n + a] += w[j] * c;
                d[j * n + b] += w[j] * c;
            }
        }
        for (j, g) in self.vertical.iter().enumerate() {
            for x in 0..n {
                d[j * n + x] += self.measure[x] * g;
                d[(j + 1) * n + x] += self.measure[x] * g;
            }
        }
        d
    }

    /// Symmetrized generator -M^{-1/2} K M^{-1/2} restricted to `nodes`
    /// (all nodes if `None`); Neumann at y = 0 and y = y_max, Dirichlet
    /// across the boundary of a proper node set.
    pub fn generator(&self, nodes: Option<&[usize]>) -> Result<GeneratorOperator> {
        let all: Vec<usize>;
        let idx = match nodes {
            Some(idx) => idx,
            None => {
                all = (0..self.dim()).collect();
                &all
            }
        };
        let k = idx.len();
        if k > crate::spectral::MAX_DENSE_DIM {
            return Err(Error::SizeLimit {
                what: "product domain size",
                value: k,
                max: crate::spectral::MAX_DENSE_DIM,
            });
        }
        let mut local = vec![usize::MAX; self.dim()];
        for (a, &z) in idx.iter().enumerate() {
            if z >= self.dim() {
                return Err(Error::invalid(format!("node {z} out of range")));
            }
            local[z] = a;
        }
        let mass = self.mass();
        let sub_mass: Vec<f64> = idx.iter().map(|&z| mass[z]).collect();
        let diag = self.stiffness_diagonal();
        let mut sym = DenseMatrix::zeros(k);
        for (a, &z) in idx.iter().enumerate() {
            sym[(a, a)] = -diag[z] / mass[z];
        }
        let w = self.grid.cell_weights();
        let n = self.n;
        let mut couple = |z1: usize, z2: usize, kval: f64| {
            let (a, b) = (local[z1], local[z2]);
            if a != usize::MAX && b != usize::MAX {
                let v = kval / (mass[z1] * mass[z2]).sqrt();
                sym[(a, b)] += v;
                sym[(b, a)] += v;
            }
        };
        for j in 0..self.layers() {
            for &(a, b, c) in &self.edges {
                couple(j * n + a, j * n + b, w[j] * c);
            }
        }
        for (j, g) in self.vertical.iter().enumerate() {
            for x in 0..n {
                couple(j * n + x, (j + 1) * n + x, self.measure[x] * g);
            }
        }
        GeneratorOperator::from_parts(sym, sub_mass, nodes.is_none())
    }
}

/// Settings of the extension boundary value solver.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BvpOptions {
    pub tolerance: f64,
    /// Iteration cap as a multiple of the number of unknowns.
    pub max_iter_factor: usize,
}

impl Default for BvpOptions {
    fn default() -> Self {
        Self {
            tolerance: 1e-10,
            max_iter_factor: 10,
        }
    }
}

#[derive(Clone, Debug)]
pub struct BvpSolution {
    pub field: ExtensionField,
    pub summary: CgSummary,
}

/// Minimizes E_a with U(., 0) = f and U(., y_max) = <f, 1>_mu / mu(X) by
/// conjugate gradients on the interior layers. The initial guess
/// interpolates linearly in y between the two boundary layers.
pub fn solve_extension_bvp(
    ext: &ExtendedOperator,
    f: &[f64],
    options: BvpOptions,
) -> Result<BvpSolution> {
    let n = ext.base_dim();
    if f.len() != n {
        return Err(Error::invalid(
            "boundary datum length differs from vertex count",
        ));
    }
    let layers = ext.layers();
    if layers < 3 {
        return Err(Error::invalid("need at least one interior layer"));
    }
    let total_mass: f64 = ext.base_measure().iter().sum();
    let mean = linalg::dot(f, ext.base_measure()) / total_mass;
    let y_max = ext.grid().y_max();
    let mut full = vec![0.0; ext.dim()];
    for (j, &y) in ext.grid().nodes().iter().enumerate() {
        for x in 0..n {
            full[j * n + x] = if j + 1 == layers {
                mean
            } else {
                mean + (f[x] - mean) * (1.0 - y / y_max)
            };
        }
    }
    // boundary contribution: b = -K_{IB} U_B
    let interior = n..(layers - 1) * n;
    let mut boundary = full.clone();
    boundary[interior.clone()].iter_mut().for_each(|v| *v = 0.0);
    let mut kb = vec![0.0; ext.dim()];
    ext.apply_stiffness(&boundary, &mut kb);
    let b: Vec<f64> = kb[interior.clone()].iter().map(|v| -v).collect();
    let diag = ext.stiffness_diagonal()[interior.clone()].to_vec();
    let mut x = full[interior.clone()].to_vec();
    let m = x.len();
    let apply = |v: &[f64], res: &mut [f64]| {
        let mut padded = vec![0.0; ext.dim()];
        padded[n..n + v.len()].copy_from_slice(v);
        let mut out = vec![0.0; ext.dim()];
        ext.apply_stiffness(&padded, &mut out);
        res.copy_from_slice(&out[n..n + v.len()]);
    };
    let summary = linalg::conjugate_gradient(
        apply,
        &diag,
        &b,
        &mut x,
        options.tolerance,
        options.max_iter_factor * m,
    )?;
    full[interior].copy_from_slice(&x);
    Ok(BvpSolution {
        field: ExtensionField::from_layers(ext.grid().clone(), n, full),
        summary,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::extension::poisson_extend;
    use crate::fractal::{build_fractal, Family, FractalSpec};
    use crate::quadrature::QuadratureConfig;
    use crate::spectral::eigendecompose;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn setup(
        family: Family,
        level: u32,
        s: f64,
        cells: usize,
    ) -> (
        crate::fractal::FractalGraph,
        GeneratorOperator,
        ExtendedOperator,
    ) {
        let g = build_fractal(FractalSpec::new(family, level)).unwrap();
        let op = GeneratorOperator::from_graph(&g).unwrap();
        let grid = YGrid::new(s, 2.0, cells).unwrap();
        let ext = assemble_extended_operator(&op, &grid);
        (g, op, ext)
    }

    #[test]
    fn energy_basics() {
        let (_, _, ext) = setup(Family::Gasket, 2, 0.3, 12);
        assert!(
            ext.energy(&vec![1.0; ext.dim()], &vec![1.0; ext.dim()])
                .abs()
                < 1e-12
        );
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut ku = vec![0.0; ext.dim()];
        for _ in 0..100 {
            let u: Vec<f64> = (0..ext.dim())
                .map(|_| rng.random_range(-1.0..1.0))
                .collect();
            let e = ext.energy(&u, &u);
            assert!(e >= 0.0);
            ext.apply_stiffness(&u, &mut ku);
            assert!((linalg::dot(&ku, &u) - e).abs() <= 1e-10 * e);
        }
    }

    #[test]
    fn separable_energy_splits() {
        let (g, _, ext) = setup(Family::Vicsek, 1, 0.4, 9);
        let f: Vec<f64> = (0..g.len()).map(|i| (i as f64).cos()).collect();
        let grid = ext.grid().clone();
        let gy: Vec<f64> = grid
            .nodes()
            .iter()
            .map(|y| (1.0 + y).ln() + y * y)
            .collect();
        let u: Vec<f64> = (0..ext.dim())
            .map(|z| f[z % g.len()] * gy[z / g.len()])
            .collect();
        // independent one-dimensional assembly
        let nu_g2: f64 = grid
            .cell_weights()
            .iter()
            .zip(&gy)
            .map(|(w, v)| w * v * v)
            .sum();
        let dg: f64 = (0..grid.cells())
            .map(|j| {
                let dy = grid.nodes()[j + 1] - grid.nodes()[j];
                grid.link_weights()[j] * ((gy[j + 1] - gy[j]) / dy).powi(2)
            })
            .sum();
        let mu_f2: f64 = f.iter().zip(g.measure()).map(|(v, m)| v * v * m).sum();
        let want = nu_g2 * g.energy(&f, &f) + mu_f2 * dg;
        let got = ext.energy(&u, &u);
        assert!(((got - want) / want).abs() <= 1e-12);
    }

    #[test]
    fn generator_is_conservative_and_matches_stiffness() {
        let (_, _, ext) = setup(Family::Interval, 2, 0.5, 6);
        let gen = ext.generator(None).unwrap();
        assert!(gen.is_conservative());
        let dec = eigendecompose(&gen).unwrap();
        assert!(dec.values()[1] > 0.0);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let u: Vec<f64> = (0..ext.dim())
            .map(|_| rng.random_range(-1.0..1.0))
            .collect();
        let lu = gen.apply(&u);
        let mut ku = vec![0.0; ext.dim()];
        ext.apply_stiffness(&u, &mut ku);
        let mass = ext.mass();
        for z in 0..ext.dim() {
            assert!((lu[z] + ku[z] / mass[z]).abs() <= 1e-9 * (ku[z] / mass[z]).abs().max(1.0));
        }
    }

    #[test]
    fn bvp_constants_and_minimality() {
        let (_, _, ext) = setup(Family::Gasket, 1, 0.5, 10);
        let c = vec![1.5; ext.base_dim()];
        let sol = solve_extension_bvp(&ext, &c, BvpOptions::default()).unwrap();
        assert_eq!(sol.summary.iterations, 0);
        assert!(sol.field.values().iter().all(|&v| (v - 1.5).abs() < 1e-14));

        let f: Vec<f64> = (0..ext.base_dim())
            .map(|i| (i as f64 * 1.3).sin())
            .collect();
        let sol = solve_extension_bvp(&ext, &f, BvpOptions::default()).unwrap();
        let u = sol.field.values().to_vec();
        let e0 = ext.energy(&u, &u);
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let n = ext.base_dim();
        for _ in 0..20 {
            let mut v = u.clone();
            for z in n..ext.dim() - n {
                v[z] += 1e-3 * rng.random_range(-1.0..1.0);
            }
            assert!(ext.energy(&v, &v) >= e0 * (1.0 - 1e-12));
        }
    }

    #[test]
    fn bvp_matches_poisson_extension() {
        let g = build_fractal(FractalSpec::new(Family::Interval, 4)).unwrap();
        let op = GeneratorOperator::from_graph(&g).unwrap();
        let dec = eigendecompose(&op).unwrap();
        let f: Vec<f64> = (0..g.len()).map(|i| g.positions()[i][0].powi(2)).collect();
        let mut gaps = Vec::new();
        for cells in [80, 160, 320] {
            let grid = YGrid::for_gap(0.5, dec.spectral_gap(), cells).unwrap();
            let ext = assemble_extended_operator(&op, &grid);
            let sol = solve_extension_bvp(&ext, &f, BvpOptions::default()).unwrap();
            let exact = poisson_extend(&dec, &f, &grid, QuadratureConfig::default()).unwrap();
            gaps.push(sol.field.sup_distance(&exact));
        }
        assert!(gaps[1] <= 1e-2, "{gaps:?}");
        assert!(
            gaps[0] / gaps[1] >= 2.0 && gaps[1] / gaps[2] >= 2.0,
            "{gaps:?}"
        );
    }
}
