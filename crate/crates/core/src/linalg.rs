//! Dense pseudoinverse oracle and a Jacobi-preconditioned conjugate gradient
//! solver for `A^T W A`.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};
use crate::sparse::SparseRows;

/// Eigenvalues below `PINV_REL_TOL * lambda_max` are treated as zero.
pub const PINV_REL_TOL: f64 = 1e-12;

/// Dense `A^T diag(w) A`.
pub fn weighted_gram_dense(a: &SparseRows, w: &[f64]) -> DMatrix<f64> {
    let n = a.ncols();
    let mut g = DMatrix::<f64>::zeros(n, n);
    for (j, &wj) in w.iter().enumerate().take(a.nrows()) {
        if wj == 0.0 {
            continue;
        }
        let (idx, val) = a.row(j);
        for (p, &cp) in idx.iter().enumerate() {
            let s = wj * val[p];
            for (q, &cq) in idx.iter().enumerate() {
                g[(cp, cq)] += s * val[q];
            }
        }
    }
    g
}

/// Moore-Penrose pseudoinverse of a symmetric positive semidefinite matrix,
/// kept in factored form `M^+ = F^T F` with `F = diag(lambda^-1/2) V^T`
/// restricted to the retained eigenpairs.
#[derive(Debug, Clone)]
pub struct PsdPseudoInverse {
    factor: DMatrix<f64>,
    eigenvalues: Vec<f64>,
}

impl PsdPseudoInverse {
    pub fn new(m: DMatrix<f64>) -> Result<Self> {
        Self::with_tolerance(m, PINV_REL_TOL)
    }

    pub fn with_tolerance(m: DMatrix<f64>, rel_tol: f64) -> Result<Self> {
        if m.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("matrix has non-finite entries".into()));
        }
        let n = m.nrows();
        let eig = SymmetricEigen::new(m);
        let top = eig.eigenvalues.iter().fold(0.0f64, |a, &b| a.max(b));
        let cutoff = rel_tol * top;
        let kept: Vec<usize> = (0..n).filter(|&k| top > 0.0 && eig.eigenvalues[k] > cutoff).collect();
        let mut factor = DMatrix::<f64>::zeros(kept.len(), n);
        for (r, &k) in kept.iter().enumerate() {
            let s = eig.eigenvalues[k].sqrt().recip();
            for c in 0..n {
                factor[(r, c)] = s * eig.eigenvectors[(c, k)];
            }
        }
        Ok(Self { factor, eigenvalues: kept.iter().map(|&k| eig.eigenvalues[k]).collect() })
    }

    /// Numerical rank.
    pub fn rank(&self) -> usize {
        self.eigenvalues.len()
    }

    /// `a^T M^+ a` for sparse row `j` of `a`.
    pub fn quad_form_row(&self, a: &SparseRows, j: usize) -> f64 {
        let (idx, val) = a.row(j);
        (0..self.factor.nrows())
            .map(|r| {
                let t: f64 = idx.iter().zip(val).map(|(&c, &v)| self.factor[(r, c)] * v).sum();
                t * t
            })
            .sum()
    }

    /// `y^T M^+ y` for a dense vector.
    pub fn quad_form(&self, y: &[f64]) -> f64 {
        (0..self.factor.nrows())
            .map(|r| {
                let t: f64 = y.iter().enumerate().map(|(c, &v)| self.factor[(r, c)] * v).sum();
                t * t
            })
            .sum()
    }
}

/// Symmetric sparse matrix in CSR form, used for `A^T W A + ridge I`.
#[derive(Debug, Clone)]
pub struct SparseGram {
    n: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<f64>,
}

impl SparseGram {
    pub fn assemble(a: &SparseRows, w: &[f64], ridge: f64) -> Self {
        let n = a.ncols();
        let mut trip: Vec<(usize, usize, f64)> = Vec::new();
        for (j, &wj) in w.iter().enumerate().take(a.nrows()) {
            if wj == 0.0 {
                continue;
            }
            let (idx, val) = a.row(j);
            for (p, &cp) in idx.iter().enumerate() {
                let s = wj * val[p];
                for (q, &cq) in idx.iter().enumerate() {
                    trip.push((cp, cq, s * val[q]));
                }
            }
        }
        if ridge > 0.0 {
            trip.extend((0..n).map(|c| (c, c, ridge)));
        }
        // Stable sort keeps the per-entry summation order fixed.
        trip.sort_by_key(|&(r, c, _)| (r, c));
        let mut indptr = vec![0usize; n + 1];
        let mut indices = Vec::new();
        let mut values: Vec<f64> = Vec::new();
        let mut last = None;
        for (r, c, v) in trip {
            if last == Some((r, c)) {
                *values.last_mut().unwrap() += v;
            } else {
                indices.push(c);
                values.push(v);
                indptr[r + 1] += 1;
                last = Some((r, c));
            }
        }
        for r in 0..n {
            indptr[r + 1] += indptr[r];
        }
        Self { n, indptr, indices, values }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        for (r, out) in y.iter_mut().enumerate() {
            let (lo, hi) = (self.indptr[r], self.indptr[r + 1]);
            *out = self.indices[lo..hi].iter().zip(&self.values[lo..hi]).map(|(&c, &v)| v * x[c]).sum();
        }
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n)
            .map(|r| {
                let (lo, hi) = (self.indptr[r], self.indptr[r + 1]);
                self.indices[lo..hi].iter().position(|&c| c == r).map_or(0.0, |p| self.values[lo + p])
            })
            .collect()
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Outcome of a converged solve.
#[derive(Debug, Clone)]
pub struct CgSolution {
    pub x: Vec<f64>,
    pub iterations: usize,
    pub relative_residual: f64,
}

/// Jacobi-preconditioned CG for `M x = b` with `M` symmetric PSD and `b` in
/// the range of `M`. Stops when `||b - Mx|| <= tol ||b||`.
pub fn pcg(m: &SparseGram, b: &[f64], tol: f64, max_iter: usize) -> Result<CgSolution> {
    let n = m.dim();
    let bnorm = dot(b, b).sqrt();
    let mut x = vec![0.0; n];
    if bnorm == 0.0 {
        return Ok(CgSolution { x, iterations: 0, relative_residual: 0.0 });
    }
    let inv_diag: Vec<f64> = m.diagonal().into_iter().map(|d| if d > 0.0 { d.recip() } else { 1.0 }).collect();
    let mut r = b.to_vec();
    let mut z: Vec<f64> = r.iter().zip(&inv_diag).map(|(a, d)| a * d).collect();
    let mut p = z.clone();
    let mut mp = vec![0.0; n];
    let mut rz = dot(&r, &z);
    let mut res = 1.0;
    for it in 1..=max_iter {
        m.matvec(&p, &mut mp);
        let pmp = dot(&p, &mp);
        if pmp <= 0.0 {
            break;
        }
        let alpha = rz / pmp;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * mp[i];
        }
        res = dot(&r, &r).sqrt() / bnorm;
        if res <= tol {
            return Ok(CgSolution { x, iterations: it, relative_residual: res });
        }
        for i in 0..n {
            z[i] = r[i] * inv_diag[i];
        }
        let rz_next = dot(&r, &z);
        let beta = rz_next / rz;
        rz = rz_next;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    Err(Error::SolverFailure { iterations: max_iter, residual: res, tolerance: tol })
}
