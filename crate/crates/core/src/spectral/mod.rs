//! Spectral calculus for the generator L of a weighted graph: the heat
//! semigroup, fractional powers (spectral, Balakrishnan and jump-kernel
//! routes) and Dirichlet-killed semigroups.

mod cache;
mod jump;
mod killed;

use crate::error::{Error, Result};
use crate::fractal::FractalGraph;
use crate::linalg::{self, DenseMatrix};
use crate::quadrature::check_half_open_unit;

pub use cache::{fnv1a64, read_cache, write_cache, CACHE_MAGIC};
pub use jump::{jump_form_apply, jump_kernel, jump_quadrature};
pub use killed::{
    killed_decomposition, super_mean_value_check, super_mean_value_violation, KilledDecomposition,
};

/// Largest dimension handed to the dense eigensolver.
pub const MAX_DENSE_DIM: usize = 4000;

/// The mu-symmetrized generator S = D^{1/2} A D^{-1/2}, where
/// A f(x) = mu(x)^{-1} sum_y c_xy (f(y) - f(x)) and D = diag(mu).
#[derive(Clone, Debug)]
pub struct GeneratorOperator {
    sym: DenseMatrix,
    measure: Vec<f64>,
    conservative: bool,
}

impl GeneratorOperator {
    pub fn from_graph(graph: &FractalGraph) -> Result<Self> {
        let n = graph.len();
        check_dim(n)?;
        let mu = graph.measure();
        let mut sym = DenseMatrix::zeros(n);
        for e in graph.edges() {
            let off = e.conductance / (mu[e.i] * mu[e.j]).sqrt();
            sym[(e.i, e.j)] = off;
            sym[(e.j, e.i)] = off;
        }
        for x in 0..n {
            sym[(x, x)] = -graph.degree(x) / mu[x];
        }
        Ok(Self {
            sym,
            measure: mu.to_vec(),
            conservative: true,
        })
    }

    /// Wraps an explicit symmetrized matrix. `conservative` marks generators
    /// whose kernel is spanned by D^{1/2} 1 (no killing).
    pub fn from_parts(sym: DenseMatrix, measure: Vec<f64>, conservative: bool) -> Result<Self> {
        check_dim(sym.dim())?;
        if measure.len() != sym.dim() {
            return Err(Error::invalid(
                "measure length differs from operator dimension",
            ));
        }
        let scale = linalg::max_abs(sym.as_slice()).max(1.0);
        let asym = sym.max_asymmetry();
        if asym > 1e-12 * scale {
            return Err(Error::invalid(format!(
                "operator not symmetric (defect {asym:e})"
            )));
        }
        Ok(Self {
            sym,
            measure,
            conservative,
        })
    }

    pub fn dim(&self) -> usize {
        self.sym.dim()
    }

    pub fn symmetric(&self) -> &DenseMatrix {
        &self.sym
    }

    pub fn measure(&self) -> &[f64] {
        &self.measure
    }

    pub fn is_conservative(&self) -> bool {
        self.conservative
    }

    /// Dirichlet restriction to `domain` (principal submatrix).
    pub fn restrict(&self, domain: &[usize]) -> Result<Self> {
        let sym = self.sym.principal(domain);
        let measure = domain.iter().map(|&x| self.measure[x]).collect();
        Ok(Self {
            sym,
            measure,
            conservative: false,
        })
    }

    /// (L f)(x) through the symmetrized matrix.
    pub fn apply(&self, f: &[f64]) -> Vec<f64> {
        let sq: Vec<f64> = f
            .iter()
            .zip(&self.measure)
            .map(|(v, m)| v * m.sqrt())
            .collect();
        let mut out = vec![0.0; f.len()];
        self.sym.matvec(&sq, &mut out);
        out.iter_mut()
            .zip(&self.measure)
            .for_each(|(o, m)| *o /= m.sqrt());
        out
    }
}

fn check_dim(n: usize) -> Result<()> {
    if n > MAX_DENSE_DIM {
        return Err(Error::SizeLimit {
            what: "operator dimension",
            value: n,
            max: MAX_DENSE_DIM,
        });
    }
    if n == 0 {
        return Err(Error::invalid("empty operator"));
    }
    Ok(())
}

/// Eigenpairs of -L: ascending eigenvalues and eigenvectors orthonormal in
/// the mu-weighted inner product, stored column-major.
#[derive(Clone, Debug)]
pub struct SpectralDecomposition {
    values: Vec<f64>,
    vectors: DenseMatrix,
    measure: Vec<f64>,
}

/// Full dense eigendecomposition of -L.
pub fn eigendecompose(op: &GeneratorOperator) -> Result<SpectralDecomposition> {
    let n = op.dim();
    let mut neg = op.sym.clone();
    for j in 0..n {
        for i in 0..n {
            neg[(i, j)] = -neg[(i, j)];
        }
    }
    let eig = linalg::symmetric_eigen(&neg)?;
    let mut values = eig.values;
    let mut vectors = eig.vectors.expect("vectors requested");
    let inv_sqrt: Vec<f64> = op.measure.iter().map(|m| 1.0 / m.sqrt()).collect();
    for i in 0..n {
        let col = vectors.column_mut(i);
        for (v, w) in col.iter_mut().zip(&inv_sqrt) {
            *v *= w;
        }
        normalize_sign(col);
    }
    if op.conservative {
        let top = values.last().copied().unwrap_or(0.0).abs().max(1.0);
        if values[0].abs() > 1e-9 * top {
            return Err(Error::invalid(format!(
                "conservative operator has lowest eigenvalue {:e}; graph disconnected?",
                values[0]
            )));
        }
        // the kernel is known exactly: constants
        values[0] = 0.0;
        vectors.column_mut(0).iter_mut().for_each(|v| *v = 1.0);
    }
    Ok(SpectralDecomposition {
        values,
        vectors,
        measure: op.measure.clone(),
    })
}

/// Eigenvalues of -L only (no eigenvectors); cheaper for large graphs.
pub fn eigenvalues(op: &GeneratorOperator) -> Result<Vec<f64>> {
    let n = op.dim();
    let mut neg = op.sym.clone();
    for j in 0..n {
        for i in 0..n {
            neg[(i, j)] = -neg[(i, j)];
        }
    }
    let mut values = linalg::symmetric_eigenvalues(&neg)?;
    if op.conservative {
        values[0] = 0.0;
    }
    Ok(values)
}

// First component above noise level made positive.
fn normalize_sign(v: &mut [f64]) {
    let scale = linalg::max_abs(v);
    if let Some(first) = v.iter().find(|x| x.abs() > 1e-10 * scale) {
        if *first < 0.0 {
            v.iter_mut().for_each(|x| *x = -*x);
        }
    }
}

impl SpectralDecomposition {
    pub(crate) fn from_raw(values: Vec<f64>, vectors: DenseMatrix, measure: Vec<f64>) -> Self {
        Self {
            values,
            vectors,
            measure,
        }
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn vectors(&self) -> &DenseMatrix {
        &self.vectors
    }

    pub fn vector(&self, i: usize) -> &[f64] {
        self.vectors.column(i)
    }

    pub fn measure(&self) -> &[f64] {
        &self.measure
    }

    pub fn lambda_max(&self) -> f64 {
        *self.values.last().expect("non-empty decomposition")
    }

    /// Smallest strictly positive eigenvalue.
    pub fn spectral_gap(&self) -> f64 {
        self.values
            .iter()
            .copied()
            .find(|&l| l > 0.0)
            .unwrap_or(0.0)
    }

    /// <f, g>_mu.
    pub fn inner(&self, f: &[f64], g: &[f64]) -> f64 {
        f.iter()
            .zip(g)
            .zip(&self.measure)
            .map(|((a, b), m)| a * b * m)
            .sum()
    }

    pub fn norm(&self, f: &[f64]) -> f64 {
        self.inner(f, f).sqrt()
    }

    /// Spectral coefficients <f, phi_i>_mu.
    pub fn coefficients(&self, f: &[f64]) -> Vec<f64> {
        assert_eq!(
            f.len(),
            self.dim(),
            "function length differs from dimension"
        );
        let weighted: Vec<f64> = f.iter().zip(&self.measure).map(|(a, m)| a * m).collect();
        (0..self.dim())
            .map(|i| linalg::dot(self.vector(i), &weighted))
            .collect()
    }

    /// sum_i c_i phi_i.
    pub fn synthesize(&self, coeffs: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.dim()];
        for (i, &c) in coeffs.iter().enumerate() {
            if c == 0.0 {
                continue;
            }
            for (o, v) in out.iter_mut().zip(self.vector(i)) {
                *o += c * v;
            }
        }
        out
    }

    /// sum_i m(lambda_i) <f, phi_i> phi_i.
    pub fn apply_multiplier<M: Fn(f64) -> f64>(&self, f: &[f64], m: M) -> Vec<f64> {
        let c: Vec<f64> = self
            .coefficients(f)
            .into_iter()
            .zip(&self.values)
            .map(|(c, &l)| c * m(l))
            .collect();
        self.synthesize(&c)
    }

    /// Kernel (w.r.t. mu) of the multiplier: K(x,y) = sum_i m(lambda_i) phi_i(x) phi_i(y).
    /// Assembled as rank-one updates on the upper triangle and mirrored, so the
    /// result is exactly symmetric.
    pub fn kernel_matrix<M: Fn(f64) -> f64>(&self, m: M) -> DenseMatrix {
        let weights: Vec<f64> = self.values.iter().map(|&l| m(l)).collect();
        self.kernel_from_weights(&weights)
    }

    /// K(x,y) = sum_i w_i phi_i(x) phi_i(y) for per-mode weights w_i.
    pub fn kernel_from_weights(&self, weights: &[f64]) -> DenseMatrix {
        assert_eq!(weights.len(), self.dim(), "one weight per mode");
        let n = self.dim();
        let mut k = DenseMatrix::zeros(n);
        for (i, &w) in weights.iter().enumerate() {
            if w == 0.0 {
                continue;
            }
            let phi = self.vector(i);
            for y in 0..n {
                let wy = w * phi[y];
                let col = k.column_mut(y);
                for x in 0..=y {
                    col[x] += wy * phi[x];
                }
            }
        }
        for y in 0..n {
            for x in 0..y {
                k[(y, x)] = k[(x, y)];
            }
        }
        k
    }

    /// p_t(x, y), the heat kernel density with respect to mu.
    pub fn heat_matrix(&self, t: f64) -> Result<DenseMatrix> {
        check_time(t)?;
        Ok(self.kernel_matrix(|l| (-l * t).exp()))
    }

    pub fn heat_kernel(&self, t: f64, x: usize, y: usize) -> Result<f64> {
        check_time(t)?;
        Ok(self
            .values
            .iter()
            .enumerate()
            .map(|(i, &l)| (-l * t).exp() * self.vectors[(x, i)] * self.vectors[(y, i)])
            .sum())
    }

    /// P_t f.
    pub fn semigroup_apply(&self, t: f64, f: &[f64]) -> Result<Vec<f64>> {
        check_time(t)?;
        Ok(self.apply_multiplier(f, |l| (-l * t).exp()))
    }

    /// (-L)^s f for s in (0, 1].
    pub fn fractional_apply(&self, s: f64, f: &[f64]) -> Result<Vec<f64>> {
        check_half_open_unit(s)?;
        Ok(self.apply_multiplier(f, |l| power(l, s)))
    }

    /// Dense matrix M of (-L)^s acting on vertex values: ((-L)^s f)(x) = sum_y M[x,y] f(y).
    pub fn fractional_matrix(&self, s: f64) -> Result<DenseMatrix> {
        check_half_open_unit(s)?;
        let mut k = self.kernel_matrix(|l| power(l, s));
        let n = self.dim();
        for y in 0..n {
            let m = self.measure[y];
            k.column_mut(y).iter_mut().for_each(|v| *v *= m);
        }
        Ok(k)
    }

    /// E^(s)(f, f) = sum_i lambda_i^s <f, phi_i>^2.
    pub fn fractional_energy(&self, s: f64, f: &[f64]) -> Result<f64> {
        check_half_open_unit(s)?;
        Ok(self
            .coefficients(f)
            .iter()
            .zip(&self.values)
            .map(|(c, &l)| power(l, s) * c * c)
            .sum())
    }

    /// Largest residual max_x |(-L)phi_i - lambda_i phi_i| / max(1, lambda_i) and
    /// largest deviation of the Gram matrix from the identity.
    pub fn check_against(&self, op: &GeneratorOperator) -> (f64, f64) {
        let n = self.dim();
        let mut resid = 0.0f64;
        for i in 0..n {
            let phi = self.vector(i);
            let lphi = op.apply(phi);
            let r = lphi
                .iter()
                .zip(phi)
                .map(|(a, p)| (-a - self.values[i] * p).abs())
                .fold(0.0, f64::max);
            resid = resid.max(r / self.values[i].abs().max(1.0));
        }
        let mut gram = 0.0f64;
        for i in 0..n {
            for j in 0..=i {
                let g = self.inner(self.vector(i), self.vector(j));
                let want = if i == j { 1.0 } else { 0.0 };
                gram = gram.max((g - want).abs());
            }
        }
        (resid, gram)
    }
}

/// lambda^s with 0^s = 0.
#[inline]
pub(crate) fn power(lambda: f64, s: f64) -> f64 {
    if lambda <= 0.0 {
        0.0
    } else {
        lambda.powf(s)
    }
}

fn check_time(t: f64) -> Result<()> {
    if t > 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(format!("time must be positive, got {t}")))
    }
}
