//! Minimal dense linear algebra for small matrices: row-major storage,
//! a cyclic Jacobi symmetric eigensolver, Householder complement bases and
//! a pivoted Gaussian solver. Alphabets in this problem domain are tiny, so
//! everything here is O(n^3) without apology.

use crate::scalar::{cast, Scalar};

/// Dense row-major matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Mat<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Scalar> Mat<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Mat {
            rows,
            cols,
            data: vec![T::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Mat::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = T::one();
        }
        m
    }

    /// Builds from row-major data; panics if the length does not match.
    pub fn from_rows(rows: usize, cols: usize, data: Vec<T>) -> Self {
        assert_eq!(data.len(), rows * cols, "row-major data length");
        Mat { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn col(&self, j: usize) -> Vec<T> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn transpose(&self) -> Mat<T> {
        let mut t = Mat::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    pub fn matmul(&self, other: &Mat<T>) -> Mat<T> {
        assert_eq!(self.cols, other.rows, "matmul dimensions");
        let mut out = Mat::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == T::zero() {
                    continue;
                }
                for j in 0..other.cols {
                    out[(i, j)] = out[(i, j)] + a * other[(k, j)];
                }
            }
        }
        out
    }

    pub fn matvec(&self, v: &[T]) -> Vec<T> {
        assert_eq!(self.cols, v.len(), "matvec dimensions");
        (0..self.rows)
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(v)
                    .map(|(&a, &x)| a * x)
                    .sum::<T>()
            })
            .collect()
    }

    /// x^T M x for a square matrix.
    pub fn quadratic_form(&self, x: &[T]) -> T {
        dot(&self.matvec(x), x)
    }

    pub fn scale(&self, s: T) -> Mat<T> {
        let mut out = self.clone();
        for v in &mut out.data {
            *v = *v * s;
        }
        out
    }

    pub fn add(&self, other: &Mat<T>) -> Mat<T> {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let mut out = self.clone();
        for (v, w) in out.data.iter_mut().zip(&other.data) {
            *v = *v + *w;
        }
        out
    }

    pub fn sub(&self, other: &Mat<T>) -> Mat<T> {
        self.add(&other.scale(-T::one()))
    }

    pub fn frobenius_norm(&self) -> T {
        self.data.iter().map(|&v| v * v).sum::<T>().sqrt()
    }

    pub fn max_asymmetry(&self) -> T {
        assert_eq!(self.rows, self.cols);
        let mut worst = T::zero();
        for i in 0..self.rows {
            for j in (i + 1)..self.cols {
                worst = worst.max((self[(i, j)] - self[(j, i)]).abs());
            }
        }
        worst
    }
}

impl<T: Scalar> std::ops::Index<(usize, usize)> for Mat<T> {
    type Output = T;
    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.data[i * self.cols + j]
    }
}

impl<T: Scalar> std::ops::IndexMut<(usize, usize)> for Mat<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        &mut self.data[i * self.cols + j]
    }
}

pub fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(&x, &y)| x * y).sum()
}

pub fn norm2<T: Scalar>(a: &[T]) -> T {
    dot(a, a).sqrt()
}

pub fn norm2_sq<T: Scalar>(a: &[T]) -> T {
    dot(a, a)
}

/// Symmetric eigendecomposition by cyclic Jacobi rotations.
///
/// Returns eigenvalues in ascending order and the matching eigenvectors as
/// matrix columns. Each eigenvector is sign-normalized so its first component
/// of nonnegligible magnitude is positive, which keeps downstream consumers
/// deterministic.
pub fn jacobi_eigh<T: Scalar>(m: &Mat<T>) -> (Vec<T>, Mat<T>) {
    assert_eq!(m.rows, m.cols, "jacobi_eigh needs a square matrix");
    let n = m.rows;
    let mut a = m.clone();
    let mut v = Mat::identity(n);
    if n == 0 {
        return (Vec::new(), v);
    }

    let tol = T::epsilon() * cast::<T>(n as f64) * a.frobenius_norm().max(T::one());
    for _sweep in 0..64 {
        let mut off = T::zero();
        for i in 0..n {
            for j in (i + 1)..n {
                off = off + a[(i, j)] * a[(i, j)];
            }
        }
        if off.sqrt() <= tol {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                if apq.abs() <= T::epsilon() * tol.max(T::min_positive_value()) {
                    continue;
                }
                let app = a[(p, p)];
                let aqq = a[(q, q)];
                let theta = (aqq - app) / (cast::<T>(2.0) * apq);
                let t = {
                    let sign = if theta >= T::zero() { T::one() } else { -T::one() };
                    sign / (theta.abs() + (theta * theta + T::one()).sqrt())
                };
                let c = T::one() / (t * t + T::one()).sqrt();
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
    order.sort_by(|&i, &j| {
        a[(i, i)]
            .partial_cmp(&a[(j, j)])
            .unwrap_or(std::cmp::Ordering::Equal)
    });

    let eigenvalues: Vec<T> = order.iter().map(|&i| a[(i, i)]).collect();
    let mut vectors = Mat::zeros(n, n);
    for (new_j, &old_j) in order.iter().enumerate() {
        let column: Vec<T> = (0..n).map(|i| v[(i, old_j)]).collect();
        let column = sign_normalize(column);
        for i in 0..n {
            vectors[(i, new_j)] = column[i];
        }
    }
    (eigenvalues, vectors)
}

/// Flips a vector so its first component with magnitude above a relative
/// threshold is positive.
fn sign_normalize<T: Scalar>(mut v: Vec<T>) -> Vec<T> {
    let scale = norm2(&v);
    let threshold = cast::<T>(1e-12) * scale.max(T::one());
    if let Some(first) = v.iter().find(|x| x.abs() > threshold) {
        if *first < T::zero() {
            for x in &mut v {
                *x = -*x;
            }
        }
    }
    v
}

/// Orthonormal basis of the orthogonal complement of a unit vector with
/// strictly positive first entry, via the Householder reflector exchanging
/// the vector with -e1. Returns an n x (n-1) matrix whose columns span the
/// complement.
pub fn complement_basis<T: Scalar>(unit: &[T]) -> Mat<T> {
    let n = unit.len();
    assert!(n >= 1);
    // v = unit + e1; reflector H = I - 2 vv^T/(v^T v) maps unit -> -e1, so
    // columns 2..n of H are orthonormal and orthogonal to `unit`.
    let mut v = unit.to_vec();
    v[0] = v[0] + T::one();
    let vv = norm2_sq(&v);
    let mut basis = Mat::zeros(n, n.saturating_sub(1));
    for j in 1..n {
        for i in 0..n {
            let e = if i == j { T::one() } else { T::zero() };
            basis[(i, j - 1)] = e - cast::<T>(2.0) * v[i] * v[j] / vv;
        }
    }
    basis
}

/// Projects a symmetric matrix onto the span of `basis` columns: B^T M B.
pub fn project_symmetric<T: Scalar>(m: &Mat<T>, basis: &Mat<T>) -> Mat<T> {
    basis.transpose().matmul(&m.matmul(basis))
}

/// Solves a square linear system by Gaussian elimination with partial
/// pivoting. Returns `None` when the matrix is numerically singular.
pub fn solve<T: Scalar>(a: &Mat<T>, b: &[T]) -> Option<Vec<T>> {
    assert_eq!(a.rows, a.cols);
    assert_eq!(a.rows, b.len());
    let n = a.rows;
    let mut m = a.clone();
    let mut rhs = b.to_vec();

    for col in 0..n {
        let (pivot_row, pivot_val) = (col..n)
            .map(|r| (r, m[(r, col)].abs()))
            .max_by(|x, y| x.1.partial_cmp(&y.1).unwrap_or(std::cmp::Ordering::Equal))?;
        if pivot_val <= T::epsilon() * cast::<T>(n as f64) * a.frobenius_norm().max(T::one()) {
            return None;
        }
        if pivot_row != col {
            for j in 0..n {
                let tmp = m[(col, j)];
                m[(col, j)] = m[(pivot_row, j)];
                m[(pivot_row, j)] = tmp;
            }
            rhs.swap(col, pivot_row);
        }
        for r in (col + 1)..n {
            let f = m[(r, col)] / m[(col, col)];
            if f == T::zero() {
                continue;
            }
            for j in col..n {
                m[(r, j)] = m[(r, j)] - f * m[(col, j)];
            }
            rhs[r] = rhs[r] - f * rhs[col];
        }
    }

    let mut x = vec![T::zero(); n];
    for row in (0..n).rev() {
        let mut acc = rhs[row];
        for j in (row + 1)..n {
            acc = acc - m[(row, j)] * x[j];
        }
        x[row] = acc / m[(row, row)];
    }
    Some(x)
}
