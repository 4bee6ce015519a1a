//! Dense symmetric eigensolver and a matrix-free conjugate gradient solver.
//!
//! Matrices are stored column-major: entry (i, j) lives at `data[j * n + i]`.
//! For the symmetric inputs used here that is the same as row-major, but the
//! eigenvector output is column-major (column j is eigenvector j).

use crate::error::{Error, Result};

/// Maximum number of implicit QL sweeps spent on a single eigenvalue.
pub const MAX_QL_SWEEPS: usize = 50;

/// Dense square matrix, column-major.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseMatrix {
    n: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![0.0; n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_column_major(n: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), n * n, "column-major buffer has wrong length");
        Self { n, data }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn column(&self, j: usize) -> &[f64] {
        &self.data[j * self.n..(j + 1) * self.n]
    }

    pub fn column_mut(&mut self, j: usize) -> &mut [f64] {
        &mut self.data[j * self.n..(j + 1) * self.n]
    }

    pub fn matvec(&self, x: &[f64], out: &mut [f64]) {
        assert_eq!(x.len(), self.n);
        out.iter_mut().for_each(|o| *o = 0.0);
        for (j, &xj) in x.iter().enumerate() {
            if xj == 0.0 {
                continue;
            }
            for (o, &a) in out.iter_mut().zip(self.column(j)) {
                *o += a * xj;
            }
        }
    }

    pub fn max_asymmetry(&self) -> f64 {
        let mut worst = 0.0f64;
        for j in 0..self.n {
            for i in 0..j {
                worst = worst.max((self[(i, j)] - self[(j, i)]).abs());
            }
        }
        worst
    }

    /// Principal submatrix on `idx` (in the given order).
    pub fn principal(&self, idx: &[usize]) -> Self {
        let k = idx.len();
        let mut out = Self::zeros(k);
        for (b, &j) in idx.iter().enumerate() {
            for (a, &i) in idx.iter().enumerate() {
                out[(a, b)] = self[(i, j)];
            }
        }
        out
    }
}

impl std::ops::Index<(usize, usize)> for DenseMatrix {
    type Output = f64;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[j * self.n + i]
    }
}

impl std::ops::IndexMut<(usize, usize)> for DenseMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[j * self.n + i]
    }
}

/// Eigenvalues (ascending) and, optionally, orthonormal eigenvectors.
#[derive(Clone, Debug)]
pub struct SymmetricEigen {
    pub values: Vec<f64>,
    pub vectors: Option<DenseMatrix>,
}

/// Full eigendecomposition of a symmetric matrix by Householder
/// tridiagonalization followed by implicit-shift QL.
pub fn symmetric_eigen(a: &DenseMatrix) -> Result<SymmetricEigen> {
    decompose(a, true)
}

/// Eigenvalues only; skips all orthogonal accumulation.
pub fn symmetric_eigenvalues(a: &DenseMatrix) -> Result<Vec<f64>> {
    decompose(a, false).map(|e| e.values)
}

fn decompose(a: &DenseMatrix, want_vectors: bool) -> Result<SymmetricEigen> {
    let n = a.dim();
    if n == 0 {
        return Ok(SymmetricEigen {
            values: Vec::new(),
            vectors: want_vectors.then(|| DenseMatrix::zeros(0)),
        });
    }
    let mut v = a.clone();
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    tridiagonalize(&mut v, &mut d, &mut e, want_vectors);
    ql_implicit(&mut d, &mut e, want_vectors.then_some(&mut v))?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| d[i].total_cmp(&d[j]));
    let values: Vec<f64> = order.iter().map(|&i| d[i]).collect();
    let vectors = want_vectors.then(|| {
        let mut sorted = DenseMatrix::zeros(n);
        for (dst, &src) in order.iter().enumerate() {
            sorted.data[dst * n..(dst + 1) * n].copy_from_slice(v.column(src));
        }
        sorted
    });
    Ok(SymmetricEigen { values, vectors })
}

// Householder reduction to tridiagonal form. On exit `d` holds the diagonal,
// `e[1..]` the subdiagonal, and `v` the accumulated orthogonal transform when
// requested. Column-major indexing keeps every inner loop contiguous.
fn tridiagonalize(v: &mut DenseMatrix, d: &mut [f64], e: &mut [f64], accumulate: bool) {
    let n = v.n;
    let at = |i: usize, j: usize| j * n + i;
    let vd = &mut v.data;

    for j in 0..n {
        d[j] = vd[at(n - 1, j)];
    }

    for i in (1..n).rev() {
        let scale: f64 = d[..i].iter().map(|x| x.abs()).sum();
        let mut h = 0.0;
        if scale == 0.0 {
            e[i] = d[i - 1];
            for j in 0..i {
                d[j] = vd[at(i - 1, j)];
                vd[at(i, j)] = 0.0;
                vd[at(j, i)] = 0.0;
            }
        } else {
            for dk in d[..i].iter_mut() {
                *dk /= scale;
                h += *dk * *dk;
            }
            let f = d[i - 1];
            let mut g = h.sqrt();
            if f > 0.0 {
                g = -g;
            }
            e[i] = scale * g;
            h -= f * g;
            d[i - 1] = f - g;
            e[..i].iter_mut().for_each(|x| *x = 0.0);

            for j in 0..i {
                let f = d[j];
                vd[at(j, i)] = f;
                let mut g = e[j] + vd[at(j, j)] * f;
                let col = &vd[at(0, j)..at(0, j) + n];
                for k in (j + 1)..i {
                    g += col[k] * d[k];
                    e[k] += col[k] * f;
                }
                e[j] = g;
            }
            let mut f = 0.0;
            for j in 0..i {
                e[j] /= h;
                f += e[j] * d[j];
            }
            let hh = f / (h + h);
            for j in 0..i {
                e[j] -= hh * d[j];
            }
            for j in 0..i {
                let f = d[j];
                let g = e[j];
                let col = &mut vd[at(0, j)..at(0, j) + n];
                for k in j..i {
                    col[k] -= f * e[k] + g * d[k];
                }
                d[j] = col[i - 1];
                col[i] = 0.0;
            }
        }
        d[i] = h;
    }

    if !accumulate {
        for i in 0..n {
            d[i] = vd[at(i, i)];
        }
        e[0] = 0.0;
        return;
    }

    for i in 0..n - 1 {
        vd[at(n - 1, i)] = vd[at(i, i)];
        vd[at(i, i)] = 1.0;
        let h = d[i + 1];
        if h != 0.0 {
            for k in 0..=i {
                d[k] = vd[at(k, i + 1)] / h;
            }
            for j in 0..=i {
                let mut g = 0.0;
                for k in 0..=i {
                    g += vd[at(k, i + 1)] * vd[at(k, j)];
                }
                for k in 0..=i {
                    vd[at(k, j)] -= g * d[k];
                }
            }
        }
        for k in 0..=i {
            vd[at(k, i + 1)] = 0.0;
        }
    }
    for j in 0..n {
        d[j] = vd[at(n - 1, j)];
        vd[at(n - 1, j)] = 0.0;
    }
    vd[at(n - 1, n - 1)] = 1.0;
    e[0] = 0.0;
}

// Implicit-shift QL on the symmetric tridiagonal (d, e). Rotations are applied
// to the columns of `v` when present.
fn ql_implicit(d: &mut [f64], e: &mut [f64], mut v: Option<&mut DenseMatrix>) -> Result<()> {
    let n = d.len();
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = 0.0;

    let eps = f64::EPSILON;
    let mut f = 0.0;
    let mut tst1 = 0.0f64;
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n - 1 {
            if e[m].abs() <= eps * tst1 {
                break;
            }
            m += 1;
        }
        if m > l {
            let mut sweeps = 0;
            loop {
                sweeps += 1;
                if sweeps > MAX_QL_SWEEPS {
                    return Err(Error::NoConvergence { index: l });
                }
                let g = d[l];
                let mut p = (d[l + 1] - g) / (2.0 * e[l]);
                let mut r = p.hypot(1.0);
                if p < 0.0 {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for di in d[l + 2..].iter_mut() {
                    *di -= h;
                }
                f += h;

                p = d[m];
                let mut c = 1.0;
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = 0.0;
                let mut s2 = 0.0;
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    let g = c * e[i];
                    h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    if let Some(v) = v.as_deref_mut() {
                        let nn = v.n;
                        let (lo, hi) = v.data.split_at_mut((i + 1) * nn);
                        let col_i = &mut lo[i * nn..];
                        let col_i1 = &mut hi[..nn];
                        for (a, b) in col_i.iter_mut().zip(col_i1.iter_mut()) {
                            let hk = *b;
                            *b = s * *a + c * hk;
                            *a = c * *a - s * hk;
                        }
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if e[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = 0.0;
    }
    Ok(())
}

/// Outcome of a conjugate gradient solve.
#[derive(Clone, Copy, Debug)]
pub struct CgSummary {
    pub iterations: usize,
    pub relative_residual: f64,
}

/// Jacobi-preconditioned conjugate gradients for `A x = b` with `A` symmetric
/// positive definite and given only through `apply`. `x` holds the initial
/// guess on entry. Fails with [`Error::SolverStalled`] if the relative residual
/// has not dropped below `tol` after `max_iter` iterations.
pub fn conjugate_gradient<F>(
    apply: F,
    diag: &[f64],
    b: &[f64],
    x: &mut [f64],
    tol: f64,
    max_iter: usize,
) -> Result<CgSummary>
where
    F: Fn(&[f64], &mut [f64]),
{
    let n = b.len();
    let b_norm = norm2(b);
    if b_norm == 0.0 {
        x.iter_mut().for_each(|xi| *xi = 0.0);
        return Ok(CgSummary {
            iterations: 0,
            relative_residual: 0.0,
        });
    }
    let mut r = vec![0.0; n];
    apply(x, &mut r);
    for (ri, bi) in r.iter_mut().zip(b) {
        *ri = bi - *ri;
    }
    let mut rel = norm2(&r) / b_norm;
    if rel <= tol {
        return Ok(CgSummary {
            iterations: 0,
            relative_residual: rel,
        });
    }
    let mut z: Vec<f64> = r.iter().zip(diag).map(|(ri, di)| ri / di).collect();
    let mut p = z.clone();
    let mut ap = vec![0.0; n];
    let mut rz = dot(&r, &z);
    for it in 1..=max_iter {
        apply(&p, &mut ap);
        let alpha = rz / dot(&p, &ap);
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        rel = norm2(&r) / b_norm;
        if rel <= tol {
            return Ok(CgSummary {
                iterations: it,
                relative_residual: rel,
            });
        }
        for i in 0..n {
            z[i] = r[i] / diag[i];
        }
        let rz_next = dot(&r, &z);
        let beta = rz_next / rz;
        rz = rz_next;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    Err(Error::SolverStalled {
        iterations: max_iter,
        residual: rel,
    })
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn max_abs(a: &[f64]) -> f64 {
    a.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn random_symmetric(n: usize, seed: u64) -> DenseMatrix {
        // small LCG; only used to get a non-trivial matrix
        let mut state = seed;
        let mut next = || {
            state = state
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            ((state >> 11) as f64 / (1u64 << 53) as f64) - 0.5
        };
        let mut m = DenseMatrix::zeros(n);
        for j in 0..n {
            for i in 0..=j {
                let x = next();
                m[(i, j)] = x;
                m[(j, i)] = x;
            }
        }
        m
    }

    #[test]
    fn reconstructs_random_symmetric() {
        let n = 23;
        let a = random_symmetric(n, 7);
        let eig = symmetric_eigen(&a).unwrap();
        let v = eig.vectors.unwrap();
        for w in eig.values.windows(2) {
            assert!(w[0] <= w[1]);
        }
        for i in 0..n {
            for j in 0..n {
                let rec: f64 = (0..n).map(|k| v[(i, k)] * eig.values[k] * v[(j, k)]).sum();
                assert!((rec - a[(i, j)]).abs() < 1e-12, "({i},{j})");
                let ortho: f64 = (0..n).map(|k| v[(k, i)] * v[(k, j)]).sum();
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((ortho - want).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn values_only_matches_full() {
        let a = random_symmetric(31, 3);
        let full = symmetric_eigen(&a).unwrap().values;
        let only = symmetric_eigenvalues(&a).unwrap();
        for (x, y) in full.iter().zip(&only) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn handles_diagonal_and_tiny() {
        let mut a = DenseMatrix::zeros(3);
        a[(0, 0)] = 3.0;
        a[(1, 1)] = -1.0;
        a[(2, 2)] = 2.0;
        let eig = symmetric_eigen(&a).unwrap();
        assert_eq!(eig.values, vec![-1.0, 2.0, 3.0]);
        let one = DenseMatrix::from_column_major(1, vec![5.0]);
        assert_eq!(symmetric_eigen(&one).unwrap().values, vec![5.0]);
    }

    #[test]
    fn cg_solves_spd_system() {
        let n = 12;
        // 1-D Dirichlet Laplacian
        let apply = |x: &[f64], out: &mut [f64]| {
            for i in 0..n {
                let left = if i > 0 { x[i - 1] } else { 0.0 };
                let right = if i + 1 < n { x[i + 1] } else { 0.0 };
                out[i] = 2.0 * x[i] - left - right;
            }
        };
        let b = vec![1.0; n];
        let mut x = vec![0.0; n];
        let summary = conjugate_gradient(apply, &vec![2.0; n], &b, &mut x, 1e-12, 100).unwrap();
        assert!(summary.iterations <= n);
        // exact solution x_i = (i+1)(n-i)/2
        for (i, xi) in x.iter().enumerate() {
            let exact = (i as f64 + 1.0) * (n - i) as f64 / 2.0;
            assert!((xi - exact).abs() < 1e-9);
        }
    }

    #[test]
    fn cg_reports_stall() {
        let apply = |x: &[f64], out: &mut [f64]| {
            out[0] = x[0];
            out[1] = 1e8 * x[1];
        };
        let mut x = vec![0.0; 2];
        let err =
            conjugate_gradient(apply, &[1.0, 1.0], &[1.0, 1.0], &mut x, 1e-30, 1).unwrap_err();
        assert!(matches!(err, Error::SolverStalled { iterations: 1, .. }));
    }
}
