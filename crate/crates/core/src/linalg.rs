//! Small dense linear algebra for symmetric positive-definite matrices.
//!
//! Dimensions here are tiny (the quadrature is low-dimensional), so everything
//! is a row-major `Vec<f64>` and the eigensolver is cyclic Jacobi.

use crate::error::{Error, Result};

const JACOBI_MAX_SWEEPS: usize = 100;

/// Square row-major matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    n: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(n: usize) -> Self {
        Self { n, data: vec![0.0; n * n] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn diag(d: &[f64]) -> Self {
        let mut m = Self::zeros(d.len());
        for (i, &v) in d.iter().enumerate() {
            m[(i, i)] = v;
        }
        m
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(Error::InvalidInput("empty matrix".into()));
        }
        let mut data = Vec::with_capacity(n * n);
        for (i, r) in rows.iter().enumerate() {
            if r.len() != n {
                return Err(Error::NotSquare { rows: n, row: i, len: r.len() });
            }
            if r.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidInput(format!("non-finite entry in row {i}")));
            }
            data.extend_from_slice(r);
        }
        Ok(Self { n, data })
    }

    /// Builds a matrix whose columns are the given vectors.
    pub fn from_columns(cols: &[Vec<f64>]) -> Self {
        let n = cols.len();
        let mut m = Self::zeros(n);
        for (j, c) in cols.iter().enumerate() {
            for i in 0..n {
                m[(i, j)] = c[i];
            }
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.data.chunks(self.n).map(|r| r.to_vec()).collect()
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.n).map(|i| self[(i, j)]).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.n);
        for i in 0..self.n {
            for j in 0..self.n {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    pub fn mul(&self, other: &Self) -> Self {
        let n = self.n;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                for j in 0..n {
                    out.data[i * n + j] += a * other.data[k * n + j];
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        self.data.chunks(self.n).map(|r| dot(r, x)).collect()
    }

    /// `Mᵀx` without forming the transpose.
    pub fn tr_mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n];
        for (i, &xi) in x.iter().enumerate() {
            for j in 0..self.n {
                out[j] += self[(i, j)] * xi;
            }
        }
        out
    }

    pub fn frobenius(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    pub fn determinant(&self) -> f64 {
        match lu(self) {
            Some((f, _, sign)) => (0..self.n).map(|i| f[(i, i)]).product::<f64>() * sign,
            None => 0.0,
        }
    }

    /// Inverse by LU with partial pivoting.
    pub fn inverse(&self) -> Result<Self> {
        let n = self.n;
        let (f, perm, _) = lu(self).ok_or(Error::SingularMatrix)?;
        let mut inv = Self::zeros(n);
        for col in 0..n {
            let mut b: Vec<f64> = (0..n).map(|i| if perm[i] == col { 1.0 } else { 0.0 }).collect();
            for i in 0..n {
                for k in 0..i {
                    b[i] -= f[(i, k)] * b[k];
                }
            }
            for i in (0..n).rev() {
                for k in i + 1..n {
                    b[i] -= f[(i, k)] * b[k];
                }
                b[i] /= f[(i, i)];
            }
            for i in 0..n {
                inv[(i, col)] = b[i];
            }
        }
        Ok(inv)
    }
}

impl std::ops::Index<(usize, usize)> for Matrix {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.n + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.n + j]
    }
}

// Packed LU; returns None when a pivot is negligible relative to the matrix scale.
fn lu(m: &Matrix) -> Option<(Matrix, Vec<usize>, f64)> {
    let n = m.n;
    let scale = m.data.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    if scale == 0.0 {
        return None;
    }
    let mut f = m.clone();
    let mut perm: Vec<usize> = (0..n).collect();
    let mut sign = 1.0;
    for k in 0..n {
        let p = (k..n)
            .max_by(|&a, &b| f[(a, k)].abs().total_cmp(&f[(b, k)].abs()))
            .unwrap();
        if f[(p, k)].abs() <= 1e-14 * scale {
            return None;
        }
        if p != k {
            for j in 0..n {
                f.data.swap(p * n + j, k * n + j);
            }
            perm.swap(p, k);
            sign = -sign;
        }
        for i in k + 1..n {
            let l = f[(i, k)] / f[(k, k)];
            f[(i, k)] = l;
            for j in k + 1..n {
                f.data[i * n + j] -= l * f.data[k * n + j];
            }
        }
    }
    Some((f, perm, sign))
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Cyclic Jacobi eigendecomposition of a symmetric matrix.
///
/// Eigenvalues come back ascending; eigenvectors are the matching columns,
/// each sign-normalized so its largest-magnitude component is positive.
pub fn jacobi_eigen(sym: &Matrix) -> (Vec<f64>, Matrix) {
    let n = sym.n;
    let mut a = sym.clone();
    let mut v = Matrix::identity(n);
    let scale = sym.frobenius();
    for _ in 0..JACOBI_MAX_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[(i, j)] * a[(i, j)])
            .sum::<f64>()
            .sqrt();
        if off < 1e-14 * scale || off == 0.0 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = c * akp - s * akq;
                    a[(k, q)] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = c * apk - s * aqk;
                    a[(q, k)] = s * apk + c * aqk;
                }
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].total_cmp(&a[(j, j)]));
    let values: Vec<f64> = order.iter().map(|&i| a[(i, i)]).collect();
    let cols: Vec<Vec<f64>> = order
        .iter()
        .map(|&j| {
            let mut c = v.column(j);
            let big = c.iter().copied().fold(0.0f64, |m, x| if x.abs() > m.abs() { x } else { m });
            if big < 0.0 {
                c.iter_mut().for_each(|x| *x = -*x);
            }
            c
        })
        .collect();
    (values, Matrix::from_columns(&cols))
}

/// Symmetric positive-definite matrix with cached spectral factors.
#[derive(Debug, Clone, PartialEq)]
pub struct SpdMatrix {
    a: Matrix,
    sqrt: Matrix,
    inv_sqrt: Matrix,
    inv: Matrix,
    eigenvalues: Vec<f64>,
    eigenvectors: Matrix,
}

impl SpdMatrix {
    /// Validates and factors `½(raw + rawᵀ)`.
    pub fn new(raw: &Matrix) -> Result<Self> {
        let n = raw.n;
        let mut a = Matrix::zeros(n);
        for i in 0..n {
            for j in 0..n {
                a[(i, j)] = 0.5 * (raw[(i, j)] + raw[(j, i)]);
            }
        }
        let (values, vecs) = jacobi_eigen(&a);
        let top = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if let Some(&bad) = values.iter().find(|&&l| l <= 1e-12 * top) {
            return Err(Error::NotPositiveDefinite { eigenvalue: bad });
        }
        let spectral = |f: &dyn Fn(f64) -> f64| {
            let mut m = Matrix::zeros(n);
            for (k, &l) in values.iter().enumerate() {
                let fl = f(l);
                for i in 0..n {
                    for j in 0..n {
                        m[(i, j)] += fl * vecs[(i, k)] * vecs[(j, k)];
                    }
                }
            }
            m
        };
        Ok(Self {
            sqrt: spectral(&|l| l.sqrt()),
            inv_sqrt: spectral(&|l| 1.0 / l.sqrt()),
            inv: spectral(&|l| 1.0 / l),
            a,
            eigenvalues: values,
            eigenvectors: vecs,
        })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        Self::new(&Matrix::from_rows(rows)?)
    }

    pub fn identity(n: usize) -> Self {
        Self::new(&Matrix::identity(n)).expect("identity is SPD")
    }

    pub fn dim(&self) -> usize {
        self.a.n
    }

    pub fn entries(&self) -> &Matrix {
        &self.a
    }

    pub fn sqrt(&self) -> &Matrix {
        &self.sqrt
    }

    pub fn inv_sqrt(&self) -> &Matrix {
        &self.inv_sqrt
    }

    pub fn inverse(&self) -> &Matrix {
        &self.inv
    }

    /// Ascending.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// Columns match `eigenvalues`.
    pub fn eigenvectors(&self) -> &Matrix {
        &self.eigenvectors
    }

    pub fn det(&self) -> f64 {
        self.eigenvalues.iter().product()
    }

    /// Operator norm ‖A‖.
    pub fn norm(&self) -> f64 {
        *self.eigenvalues.last().unwrap()
    }

    /// ‖√A‖.
    pub fn sqrt_norm(&self) -> f64 {
        self.norm().sqrt()
    }

    /// ‖(√A)^{-1}‖.
    pub fn inv_sqrt_norm(&self) -> f64 {
        1.0 / self.eigenvalues[0].sqrt()
    }

    /// Smallest eigenvalue of √A.
    pub fn d_min(&self) -> f64 {
        self.eigenvalues[0].sqrt()
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        self.a.mul_vec(x)
    }

    /// ⟨Ax, y⟩.
    pub fn bilinear(&self, x: &[f64], y: &[f64]) -> f64 {
        let n = self.a.n;
        let mut s = 0.0;
        for i in 0..n {
            s += y[i] * dot(&self.a.data[i * n..(i + 1) * n], x);
        }
        s
    }

    /// ⟨Ax, x⟩.
    pub fn quad(&self, x: &[f64]) -> f64 {
        self.bilinear(x, x)
    }

    pub fn check_dim(&self, len: usize) -> Result<()> {
        if len != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: len });
        }
        Ok(())
    }

    /// Radius beyond which the Gaussian tail falls below `tail_tol`:
    /// R = ‖(√A)^{-1}‖·√(2 ln(1/tol) + n ln(2+R²)), two fixed-point steps.
    pub fn tail_radius(&self, tail_tol: f64) -> f64 {
        let s = self.inv_sqrt_norm();
        let n = self.dim() as f64;
        let base = 2.0 * (1.0 / tail_tol).ln();
        let mut r = s * base.sqrt();
        for _ in 0..2 {
            r = s * (base + n * (2.0 + r * r).ln()).sqrt();
        }
        r
    }
}

/// Unit vector.
#[derive(Debug, Clone, PartialEq)]
pub struct Direction(Vec<f64>);

impl Direction {
    /// Normalizes `v`; fails on zero or non-finite input.
    pub fn new(v: Vec<f64>) -> Result<Self> {
        let r = norm(&v);
        if !r.is_finite() || r == 0.0 || v.is_empty() {
            return Err(Error::InvalidInput("direction must be a finite nonzero vector".into()));
        }
        Ok(Self(v.into_iter().map(|x| x / r).collect()))
    }

    pub fn axis(n: usize, k: usize) -> Self {
        let mut v = vec![0.0; n];
        v[k] = 1.0;
        Self(v)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn negated(&self) -> Self {
        Self(self.0.iter().map(|x| -x).collect())
    }
}

/// Orthogonal matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Rotation(Matrix);

impl Rotation {
    pub fn identity(n: usize) -> Self {
        Self(Matrix::identity(n))
    }

    /// Wraps `m` after checking `mᵀm = I` within 1e-9.
    pub fn from_matrix(m: Matrix) -> Result<Self> {
        let gram = m.transpose().mul(&m);
        if gram.max_abs_diff(&Matrix::identity(m.dim())) > 1e-9 {
            return Err(Error::InvalidInput("rotation matrix is not orthogonal".into()));
        }
        Ok(Self(m))
    }

    pub fn matrix(&self) -> &Matrix {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.dim()
    }

    /// O·x.
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        self.0.mul_vec(x)
    }

    /// Oᵀ·x.
    pub fn apply_inverse(&self, x: &[f64]) -> Vec<f64> {
        self.0.tr_mul_vec(x)
    }

    /// The image of −e_n.
    pub fn axis_direction(&self) -> Vec<f64> {
        let n = self.dim();
        self.0.column(n - 1).into_iter().map(|x| -x).collect()
    }
}

/// Householder reflection O with O(−e_n) = u (identity when u ≈ −e_n).
pub fn rotation_to_minus_en(u: &Direction) -> Rotation {
    let n = u.dim();
    let mut v: Vec<f64> = u.as_slice().iter().map(|x| -x).collect();
    v[n - 1] -= 1.0;
    // v = −e_n − u
    let vv = dot(&v, &v);
    if vv.sqrt() < 1e-8 {
        return Rotation::identity(n);
    }
    let mut h = Matrix::identity(n);
    for i in 0..n {
        for j in 0..n {
            h[(i, j)] -= 2.0 * v[i] * v[j] / vv;
        }
    }
    Rotation(h)
}

/// OᵀAO.
pub fn conjugate(a: &SpdMatrix, o: &Rotation) -> Result<SpdMatrix> {
    if a.dim() != o.dim() {
        return Err(Error::DimensionMismatch { expected: a.dim(), found: o.dim() });
    }
    SpdMatrix::new(&o.0.transpose().mul(&a.a).mul(&o.0))
}

/// Returns ⟨Au,u⟩ when |Au − ⟨Au,u⟩u| ≤ tol·‖A‖.
pub fn eigenspace_membership(a: &SpdMatrix, u: &Direction, tol: f64) -> Option<f64> {
    let au = a.apply(u.as_slice());
    let lambda = dot(&au, u.as_slice());
    let r: Vec<f64> = au.iter().zip(u.as_slice()).map(|(x, y)| x - lambda * y).collect();
    (norm(&r) <= tol * a.norm() && lambda > 0.0).then_some(lambda)
}

/// |Au − ⟨Au,u⟩u|.
pub fn eigen_residual(a: &SpdMatrix, u: &Direction) -> f64 {
    let au = a.apply(u.as_slice());
    let lambda = dot(&au, u.as_slice());
    let r: Vec<f64> = au.iter().zip(u.as_slice()).map(|(x, y)| x - lambda * y).collect();
    norm(&r)
}

/// Completes `first` (unit) to an orthonormal basis by Gram–Schmidt against
/// the coordinate axes, taking axes in order of least overlap.
pub fn orthonormal_complement(first: &[f64]) -> Vec<Vec<f64>> {
    let n = first.len();
    let mut basis = vec![first.to_vec()];
    let mut axes: Vec<usize> = (0..n).collect();
    axes.sort_by(|&i, &j| first[i].abs().total_cmp(&first[j].abs()));
    for k in axes {
        if basis.len() == n {
            break;
        }
        let mut v = vec![0.0; n];
        v[k] = 1.0;
        for _ in 0..2 {
            for b in &basis {
                let c = dot(&v, b);
                v.iter_mut().zip(b).for_each(|(x, y)| *x -= c * y);
            }
        }
        let r = norm(&v);
        if r > 1e-6 {
            basis.push(v.into_iter().map(|x| x / r).collect());
        }
    }
    basis.remove(0);
    basis
}
