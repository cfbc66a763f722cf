//! Linear PCA: pooled scatter matrix, cyclic Jacobi eigensolver, truncation
//! error accounting and projection onto the leading eigenvectors.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{dot, Matrix};

pub const DEFAULT_OFF_DIAG_TOL: f64 = 1e-10;
pub const DEFAULT_MAX_SWEEPS: usize = 100;

const SYMMETRY_TOL: f64 = 1e-12;

/// `N` samples of dimension `d`, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct DataMatrix {
    data: Matrix,
}

impl DataMatrix {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        let Some(first) = rows.first() else {
            return Err(Error::InsufficientSamples { needed: 1, got: 0 });
        };
        let d = first.len();
        if let Some(bad) = rows.iter().find(|r| r.len() != d) {
            return Err(Error::dims("data matrix row", d, bad.len()));
        }
        Ok(Self {
            data: Matrix::from_rows(&rows).expect("rows checked"),
        })
    }

    pub fn from_matrix(data: Matrix) -> Result<Self> {
        if data.rows() == 0 {
            return Err(Error::InsufficientSamples { needed: 1, got: 0 });
        }
        Ok(Self { data })
    }

    pub fn n_samples(&self) -> usize {
        self.data.rows()
    }

    pub fn dim(&self) -> usize {
        self.data.cols()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        self.data.row(i)
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> + '_ {
        (0..self.n_samples()).map(move |i| self.data.row(i))
    }

    pub fn mean(&self) -> Vec<f64> {
        let mut mean = vec![0.0; self.dim()];
        for row in self.rows() {
            for (m, &v) in mean.iter_mut().zip(row) {
                *m += v;
            }
        }
        let n = self.n_samples() as f64;
        mean.iter_mut().for_each(|m| *m /= n);
        mean
    }
}

/// Total scatter matrix `S = 1/N Σ (x - x̄)(x - x̄)ᵀ`.
pub fn scatter_matrix(data: &DataMatrix) -> Matrix {
    let d = data.dim();
    let mean = data.mean();
    let mut s = Matrix::zeros(d, d);
    let mut centered = vec![0.0; d];
    for row in data.rows() {
        for ((c, &x), &m) in centered.iter_mut().zip(row).zip(&mean) {
            *c = x - m;
        }
        for i in 0..d {
            let ci = centered[i];
            if ci == 0.0 {
                continue;
            }
            let out = &mut s.row_mut(i)[i..];
            for (o, &cj) in out.iter_mut().zip(&centered[i..]) {
                *o += ci * cj;
            }
        }
    }
    let n = data.n_samples() as f64;
    for i in 0..d {
        for j in i..d {
            let v = s[(i, j)] / n;
            s[(i, j)] = v;
            s[(j, i)] = v;
        }
    }
    s
}

/// Eigenpairs of a symmetric matrix, eigenvalues sorted descending.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenDecomposition {
    pub eigenvalues: Vec<f64>,
    /// Column `i` is the unit eigenvector paired with `eigenvalues[i]`.
    pub eigenvectors: Matrix,
    pub sweeps: usize,
}

impl EigenDecomposition {
    pub fn vector(&self, i: usize) -> Vec<f64> {
        self.eigenvectors.column(i)
    }
}

fn off_diagonal_norm(a: &Matrix) -> f64 {
    let n = a.rows();
    let mut sum = 0.0;
    for i in 0..n {
        for j in (i + 1)..n {
            sum += a[(i, j)] * a[(i, j)];
        }
    }
    (2.0 * sum).sqrt()
}

fn check_symmetric(s: &Matrix) -> Result<()> {
    let (r, c) = s.shape();
    if r != c {
        return Err(Error::dims("square matrix", r, c));
    }
    let scale = s.max_abs().max(1.0);
    for i in 0..r {
        for j in (i + 1)..r {
            let diff = (s[(i, j)] - s[(j, i)]).abs();
            if diff > SYMMETRY_TOL * scale || diff.is_nan() {
                return Err(Error::NotSymmetric {
                    row: i,
                    col: j,
                    diff,
                });
            }
        }
    }
    Ok(())
}

/// Cyclic Jacobi eigendecomposition of a symmetric matrix.
///
/// Sweeps visit `(p, q)` pairs in row-major order. Converged when the
/// off-diagonal Frobenius norm is at most `off_diag_tol`. Eigenvectors are
/// sign-normalized so their largest-magnitude component is positive, which
/// makes the result a pure function of the input.
pub fn jacobi_eigendecompose(
    s: &Matrix,
    off_diag_tol: f64,
    max_sweeps: usize,
) -> Result<EigenDecomposition> {
    check_symmetric(s)?;
    let n = s.rows();
    let mut a = s.clone();
    // Work on the exactly-symmetric average so rotations stay consistent.
    for i in 0..n {
        for j in (i + 1)..n {
            let v = 0.5 * (a[(i, j)] + a[(j, i)]);
            a[(i, j)] = v;
            a[(j, i)] = v;
        }
    }
    let mut v = Matrix::identity(n);

    let mut sweeps = 0;
    loop {
        let off = off_diagonal_norm(&a);
        if off <= off_diag_tol {
            break;
        }
        if sweeps == max_sweeps {
            return Err(Error::NotConverged {
                sweeps,
                off_diagonal: off,
            });
        }
        sweeps += 1;
        for p in 0..n {
            for q in (p + 1)..n {
                rotate(&mut a, &mut v, p, q);
            }
        }
    }

    let raw: Vec<f64> = (0..n).map(|i| a[(i, i)]).collect();
    let mut order: Vec<usize> = (0..n).collect();
    // Stable: tied eigenvalues keep their diagonal order.
    order.sort_by(|&x, &y| raw[y].total_cmp(&raw[x]));

    let mut vectors = Matrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        let mut col = v.column(src);
        normalize_sign(&mut col);
        for (i, c) in col.into_iter().enumerate() {
            vectors[(i, dst)] = c;
        }
    }
    Ok(EigenDecomposition {
        eigenvalues: order.iter().map(|&i| raw[i]).collect(),
        eigenvectors: vectors,
        sweeps,
    })
}

/// One Jacobi rotation zeroing `a[p][q]`, accumulated into `v`.
fn rotate(a: &mut Matrix, v: &mut Matrix, p: usize, q: usize) {
    let apq = a[(p, q)];
    if apq == 0.0 {
        return;
    }
    let n = a.rows();
    let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
    let t = if theta.abs() > 1e150 {
        0.5 / theta
    } else {
        theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
    };
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;

    for k in 0..n {
        if k == p || k == q {
            continue;
        }
        let akp = a[(k, p)];
        let akq = a[(k, q)];
        let new_kp = c * akp - s * akq;
        let new_kq = s * akp + c * akq;
        a[(k, p)] = new_kp;
        a[(p, k)] = new_kp;
        a[(k, q)] = new_kq;
        a[(q, k)] = new_kq;
    }
    a[(p, p)] -= t * apq;
    a[(q, q)] += t * apq;
    a[(p, q)] = 0.0;
    a[(q, p)] = 0.0;

    for k in 0..n {
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = c * vkp - s * vkq;
        v[(k, q)] = s * vkp + c * vkq;
    }
}

/// Flips `x` so its largest-magnitude component (first one on ties) is positive.
fn normalize_sign(x: &mut [f64]) {
    let mut best = 0;
    for (i, v) in x.iter().enumerate() {
        if v.abs() > x[best].abs() {
            best = i;
        }
    }
    if x.get(best).is_some_and(|&v| v < 0.0) {
        x.iter_mut().for_each(|v| *v = -*v);
    }
}

/// `E_k = ½ Σ_{i>k} λ_i` for eigenvalues sorted descending.
pub fn truncation_error(eigenvalues: &[f64], k: usize) -> Result<f64> {
    let d = eigenvalues.len();
    if k > d {
        return Err(Error::OutOfRange {
            what: "k",
            value: k,
            min: 0,
            max: d,
        });
    }
    // Smallest terms first.
    Ok(0.5 * eigenvalues[k..].iter().rev().sum::<f64>())
}

/// `E_k` for every `k` in `0..=d`.
pub fn truncation_curve(eigenvalues: &[f64]) -> Vec<f64> {
    let d = eigenvalues.len();
    let mut curve = vec![0.0; d + 1];
    let mut tail = 0.0;
    for k in (0..d).rev() {
        tail += eigenvalues[k];
        curve[k] = 0.5 * tail;
    }
    curve
}

/// Smallest `k >= 1` whose truncation error is within `budget`.
pub fn smallest_k_within(eigenvalues: &[f64], budget: f64) -> usize {
    let curve = truncation_curve(eigenvalues);
    (1..curve.len())
        .find(|&k| curve[k] <= budget)
        .unwrap_or(eigenvalues.len())
        .max(1)
}

/// A fitted PCA projection.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PcaModel {
    pub mean: Vec<f64>,
    /// `k` orthonormal rows of dimension `d`.
    pub basis: Matrix,
    /// All `d` eigenvalues, descending, clamped at zero.
    pub eigenvalues: Vec<f64>,
}

impl PcaModel {
    /// Fits on all rows of `data`, keeping the `k` leading eigenvectors.
    pub fn fit(data: &DataMatrix, k: usize) -> Result<Self> {
        let d = data.dim();
        if data.n_samples() < 2 {
            return Err(Error::InsufficientSamples {
                needed: 2,
                got: data.n_samples(),
            });
        }
        if k == 0 || k > d {
            return Err(Error::OutOfRange {
                what: "k",
                value: k,
                min: 1,
                max: d,
            });
        }
        let s = scatter_matrix(data);
        // Absolute tolerance for matrices of unit scale or larger, relative below.
        let tol = DEFAULT_OFF_DIAG_TOL * s.frobenius_norm().min(1.0);
        let eig = jacobi_eigendecompose(&s, tol, DEFAULT_MAX_SWEEPS)?;

        let mut basis = Matrix::zeros(k, d);
        for r in 0..k {
            for i in 0..d {
                basis[(r, i)] = eig.eigenvectors[(i, r)];
            }
        }
        Ok(Self {
            mean: data.mean(),
            basis,
            eigenvalues: eig.eigenvalues.iter().map(|&l| l.max(0.0)).collect(),
        })
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn k(&self) -> usize {
        self.basis.rows()
    }

    pub fn truncation_error(&self) -> f64 {
        truncation_error(&self.eigenvalues, self.k()).expect("k <= d by construction")
    }

    /// `z = basis · (x − mean)`.
    pub fn project(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.dim() {
            return Err(Error::dims("pca project input", self.dim(), x.len()));
        }
        let centered: Vec<f64> = x.iter().zip(&self.mean).map(|(a, m)| a - m).collect();
        Ok((0..self.k())
            .map(|r| dot(self.basis.row(r), &centered))
            .collect())
    }

    /// `x̂ = mean + basisᵀ · z`.
    pub fn reconstruct(&self, z: &[f64]) -> Result<Vec<f64>> {
        if z.len() != self.k() {
            return Err(Error::dims("pca reconstruct input", self.k(), z.len()));
        }
        let mut out = self.basis.mul_vec_transposed(z);
        for (o, m) in out.iter_mut().zip(&self.mean) {
            *o += m;
        }
        Ok(out)
    }
}
