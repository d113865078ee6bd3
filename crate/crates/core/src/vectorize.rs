//! Column-stacking vectorization and Kronecker products.
//!
//! Entry (p, q) of an N x N operator (1-based, as usually written) lands at
//! position p + (q - 1) N of the vector. With 0-based storage that is
//! `p + q * n`. Getting this backwards silently transposes every
//! superoperator built on top of it.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::numlin::ComplexMatrix;

/// An N x N operator flattened column by column into a length-N^2 vector.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorizedOperator {
    data: Vec<Complex64>,
    dim: usize,
}

impl VectorizedOperator {
    pub fn new(data: Vec<Complex64>) -> Result<Self> {
        let dim = exact_sqrt(data.len()).ok_or(Error::NotPerfectSquare(data.len()))?;
        Ok(Self { data, dim })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn into_inner(self) -> Vec<Complex64> {
        self.data
    }
}

fn exact_sqrt(len: usize) -> Option<usize> {
    let r = (len as f64).sqrt().round() as usize;
    (r * r == len).then_some(r)
}

pub fn vec(m: &ComplexMatrix) -> Result<VectorizedOperator> {
    let n = m.ensure_square()?;
    let mut data = Vec::with_capacity(n * n);
    for q in 0..n {
        for p in 0..n {
            data.push(m[(p, q)]);
        }
    }
    Ok(VectorizedOperator { data, dim: n })
}

pub fn unvec(v: &VectorizedOperator) -> ComplexMatrix {
    let n = v.dim;
    let mut m = ComplexMatrix::zeros(n, n);
    for q in 0..n {
        for p in 0..n {
            m[(p, q)] = v.data[p + q * n];
        }
    }
    m
}

/// Inverse of [`vec`] for a raw slice; fails unless the length is a perfect square.
pub fn unvec_slice(v: &[Complex64]) -> Result<ComplexMatrix> {
    Ok(unvec(&VectorizedOperator::new(v.to_vec())?))
}

/// Kronecker product `A ⊗ B`.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let (ra, ca) = a.shape();
    let (rb, cb) = b.shape();
    let mut out = ComplexMatrix::zeros(ra * rb, ca * cb);
    for i in 0..ra {
        for j in 0..ca {
            let aij = a[(i, j)];
            for k in 0..rb {
                for l in 0..cb {
                    out[(i * rb + k, j * cb + l)] = aij * b[(k, l)];
                }
            }
        }
    }
    out
}

/// Matrix of `eta -> A eta B` acting on `vec(eta)`, namely `B^T ⊗ A`.
pub fn sandwich_matrix(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    let n = a.ensure_square()?;
    let m = b.ensure_square()?;
    if n != m {
        return Err(Error::DimensionMismatch {
            op: "sandwich_matrix",
            left: a.shape(),
            right: b.shape(),
        });
    }
    Ok(kron(&b.transpose(), a))
}
