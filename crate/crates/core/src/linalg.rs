//! Small dense complex linear algebra helpers.
//!
//! All matrices in this crate are at most 16×16 (two-qubit superoperators and
//! Choi matrices), so everything here is plain dense arithmetic on top of
//! `nalgebra`. Vectorization is column-stacking throughout:
//! `vec(A X B) = (Bᵀ ⊗ A) vec(X)`.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type ComplexMatrix = DMatrix<Complex64>;
pub type RealMatrix = DMatrix<f64>;

pub const HERMITIAN_TOL: f64 = 1e-12;

#[inline]
pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

#[inline]
pub fn cr(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

pub fn identity(n: usize) -> ComplexMatrix {
    ComplexMatrix::identity(n, n)
}

pub fn zeros(rows: usize, cols: usize) -> ComplexMatrix {
    ComplexMatrix::zeros(rows, cols)
}

pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a.kronecker(b)
}

pub fn real_kron(a: &RealMatrix, b: &RealMatrix) -> RealMatrix {
    a.kronecker(b)
}

/// Single-qubit Pauli matrix for one of `I`, `X`, `Y`, `Z`.
pub fn pauli(symbol: char) -> Result<ComplexMatrix> {
    let z = cr(0.0);
    let o = cr(1.0);
    let m = match symbol {
        'I' => [o, z, z, o],
        'X' => [z, o, o, z],
        'Y' => [z, c(0.0, -1.0), c(0.0, 1.0), z],
        'Z' => [o, z, z, -o],
        other => {
            return Err(Error::InvalidParameter(format!(
                "unknown Pauli symbol '{other}'"
            )))
        }
    };
    Ok(ComplexMatrix::from_row_slice(2, 2, &m))
}

/// Tensor product of single-qubit Paulis, leftmost symbol most significant.
pub fn pauli_string(label: &str) -> Result<ComplexMatrix> {
    if label.is_empty() {
        return Err(Error::InvalidParameter("empty Pauli label".into()));
    }
    let mut out = identity(1);
    for ch in label.chars() {
        out = kron(&out, &pauli(ch)?);
    }
    Ok(out)
}

pub fn hermitian_part(m: &ComplexMatrix) -> ComplexMatrix {
    (m + m.adjoint()) * cr(0.5)
}

pub fn is_hermitian(m: &ComplexMatrix, tol: f64) -> bool {
    m.is_square() && (m - m.adjoint()).iter().all(|z| z.norm() <= tol)
}

/// Eigen-decomposition of a Hermitian matrix. Eigenvalues are returned in
/// ascending order with matching eigenvector columns.
pub fn hermitian_eigen(m: &ComplexMatrix) -> (Vec<f64>, ComplexMatrix) {
    let n = m.nrows();
    let eig = hermitian_part(m).symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    (values, vectors)
}

pub fn hermitian_eigenvalues(m: &ComplexMatrix) -> Vec<f64> {
    hermitian_eigen(m).0
}

pub fn min_eigenvalue(m: &ComplexMatrix) -> f64 {
    hermitian_eigenvalues(m)
        .into_iter()
        .fold(f64::INFINITY, f64::min)
}

/// Schatten-1 norm of a Hermitian matrix.
pub fn trace_norm(m: &ComplexMatrix) -> f64 {
    hermitian_eigenvalues(m).iter().map(|v| v.abs()).sum()
}

pub fn frobenius(m: &ComplexMatrix) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Largest elementwise modulus.
pub fn max_abs(m: &ComplexMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn trace(m: &ComplexMatrix) -> Complex64 {
    m.trace()
}

/// Trace over the first tensor factor of a `(d1·d2)×(d1·d2)` matrix.
pub fn partial_trace_first(m: &ComplexMatrix, d1: usize, d2: usize) -> ComplexMatrix {
    let mut out = zeros(d2, d2);
    for i in 0..d2 {
        for j in 0..d2 {
            let mut acc = cr(0.0);
            for a in 0..d1 {
                acc += m[(a * d2 + i, a * d2 + j)];
            }
            out[(i, j)] = acc;
        }
    }
    out
}

/// Trace over the second tensor factor of a `(d1·d2)×(d1·d2)` matrix.
pub fn partial_trace_second(m: &ComplexMatrix, d1: usize, d2: usize) -> ComplexMatrix {
    let mut out = zeros(d1, d1);
    for a in 0..d1 {
        for b in 0..d1 {
            let mut acc = cr(0.0);
            for i in 0..d2 {
                acc += m[(a * d2 + i, b * d2 + i)];
            }
            out[(a, b)] = acc;
        }
    }
    out
}

/// Column-stacking vectorization.
pub fn vec_columns(m: &ComplexMatrix) -> ComplexMatrix {
    // nalgebra storage is column-major, which is exactly column stacking
    ComplexMatrix::from_column_slice(m.len(), 1, m.as_slice())
}

pub fn unvec_columns(v: &ComplexMatrix, rows: usize, cols: usize) -> ComplexMatrix {
    ComplexMatrix::from_column_slice(rows, cols, v.as_slice())
}

/// Superoperator of `X ↦ A X B` under column stacking.
pub fn sandwich_superop(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    kron(&b.transpose(), a)
}

/// Matrix exponential (scaling and squaring with a degree-13 Padé approximant).
pub fn expm(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch("expm of a non-square matrix".into()));
    }
    if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::Numeric("expm input has non-finite entries".into()));
    }
    let out = m.clone().exp();
    if out.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::Numeric("expm produced non-finite entries".into()));
    }
    Ok(out)
}

/// Row-major real and imaginary parts, the layout used by every exported file.
pub fn to_row_major(m: &ComplexMatrix) -> (Vec<f64>, Vec<f64>) {
    let mut re = Vec::with_capacity(m.len());
    let mut im = Vec::with_capacity(m.len());
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            re.push(m[(i, j)].re);
            im.push(m[(i, j)].im);
        }
    }
    (re, im)
}

pub fn from_row_major(rows: usize, cols: usize, re: &[f64], im: &[f64]) -> Result<ComplexMatrix> {
    if re.len() != rows * cols || im.len() != rows * cols {
        return Err(Error::Format(format!(
            "expected {} entries for a {rows}×{cols} matrix, got {} real / {} imaginary",
            rows * cols,
            re.len(),
            im.len()
        )));
    }
    let data: Vec<Complex64> = re.iter().zip(im).map(|(&r, &i)| c(r, i)).collect();
    Ok(ComplexMatrix::from_row_slice(rows, cols, &data))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pauli_algebra() {
        let x = pauli('X').unwrap();
        let y = pauli('Y').unwrap();
        let z = pauli('Z').unwrap();
        let ixy = &x * &y;
        assert!((ixy - &z * c(0.0, 1.0)).iter().all(|v| v.norm() < 1e-15));
        assert!(pauli('Q').is_err());
        assert_eq!(pauli_string("XZI").unwrap().nrows(), 8);
    }

    #[test]
    fn vectorization_identity() {
        let a = ComplexMatrix::from_fn(3, 3, |i, j| c(i as f64 + 0.5, j as f64 - 1.0));
        let b = ComplexMatrix::from_fn(3, 3, |i, j| c((i * j) as f64, 1.0));
        let x = ComplexMatrix::from_fn(3, 3, |i, j| c(j as f64, i as f64 * 0.3));
        let lhs = vec_columns(&(&a * &x * &b));
        let rhs = sandwich_superop(&a, &b) * vec_columns(&x);
        assert!((lhs - rhs).iter().all(|v| v.norm() < 1e-12));
    }

    #[test]
    fn partial_traces_of_product() {
        let a = ComplexMatrix::from_fn(2, 2, |i, j| c((i + 2 * j) as f64, 0.0));
        let b = ComplexMatrix::from_fn(3, 3, |i, j| c(1.0, (i as f64) - (j as f64)));
        let ab = kron(&a, &b);
        let pt1 = partial_trace_first(&ab, 2, 3);
        let pt2 = partial_trace_second(&ab, 2, 3);
        assert!((pt1 - &b * a.trace()).iter().all(|v| v.norm() < 1e-12));
        assert!((pt2 - &a * b.trace()).iter().all(|v| v.norm() < 1e-12));
    }

    #[test]
    fn eigen_sorted_and_reconstructs() {
        let h = pauli_string("XZ").unwrap() * cr(0.7) + pauli_string("ZI").unwrap() * cr(0.2);
        let (vals, vecs) = hermitian_eigen(&h);
        assert!(vals.windows(2).all(|w| w[0] <= w[1]));
        let diag = ComplexMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
            4,
            vals.iter().map(|&v| cr(v)),
        ));
        let rebuilt = &vecs * diag * vecs.adjoint();
        assert!((rebuilt - h).iter().all(|v| v.norm() < 1e-12));
    }
}
