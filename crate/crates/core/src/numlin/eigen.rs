//! General complex eigendecomposition: Householder reduction to Hessenberg
//! form, shifted QR iteration to a complex Schur form `A = Z T Z^H`, then
//! back-substitution on `T` for the right eigenvectors.

use num_complex::Complex64;

use super::matrix::{vec_norm, ComplexMatrix, ONE, ZERO};
use super::svd::condition_number;
use crate::error::{Error, Result};

const MAX_ITER_PER_EIGENVALUE: usize = 60;

/// Eigenvalues with unit-norm, phase-fixed right eigenvectors (as columns).
#[derive(Debug, Clone)]
pub struct Spectrum {
    pub eigenvalues: Vec<Complex64>,
    pub eigenvectors: ComplexMatrix,
    /// `|A v_k - e_k v_k|_2` measured against the input matrix.
    pub residuals: Vec<f64>,
}

impl Spectrum {
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn eigenvector(&self, k: usize) -> Vec<Complex64> {
        self.eigenvectors.column(k)
    }

    /// 2-norm condition number of the eigenvector matrix; diverges at an
    /// exceptional point where eigenvectors coalesce.
    pub fn eigenvector_condition(&self) -> f64 {
        condition_number(&self.eigenvectors)
    }
}

/// Scales `v` to unit norm and rotates its phase so the largest-magnitude
/// entry is real and non-negative. Near-ties go to the lowest index.
pub fn normalize_phase(v: &mut [Complex64]) {
    let norm = vec_norm(v);
    if norm == 0.0 {
        return;
    }
    let max = v.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let pivot = v
        .iter()
        .position(|z| z.norm() >= max * (1.0 - 1e-9))
        .unwrap_or(0);
    let phase = v[pivot].conj() / v[pivot].norm();
    for z in v.iter_mut() {
        *z = *z * phase / norm;
    }
    v[pivot] = Complex64::new(v[pivot].re, 0.0);
}

fn hessenberg(a: &mut ComplexMatrix, z: &mut ComplexMatrix) {
    let n = a.rows();
    for k in 0..n.saturating_sub(2) {
        let x: Vec<Complex64> = (k + 1..n).map(|i| a[(i, k)]).collect();
        let tail: f64 = x[1..].iter().map(Complex64::norm_sqr).sum();
        if tail == 0.0 {
            continue;
        }
        let xnorm = vec_norm(&x);
        let phase = if x[0].norm() > 0.0 { x[0] / x[0].norm() } else { ONE };
        let alpha = -phase * xnorm;
        let mut v = x;
        v[0] -= alpha;
        let vn = vec_norm(&v);
        for vi in v.iter_mut() {
            *vi /= vn;
        }
        // A <- (I - 2 v v^H) A (I - 2 v v^H), Z <- Z (I - 2 v v^H)
        for j in 0..n {
            let s: Complex64 = v.iter().enumerate().map(|(i, vi)| vi.conj() * a[(k + 1 + i, j)]).sum();
            for (i, vi) in v.iter().enumerate() {
                a[(k + 1 + i, j)] -= *vi * s * 2.0;
            }
        }
        for m in [&mut *a, &mut *z] {
            for i in 0..n {
                let s: Complex64 = v.iter().enumerate().map(|(j, vj)| m[(i, k + 1 + j)] * vj).sum();
                for (j, vj) in v.iter().enumerate() {
                    m[(i, k + 1 + j)] -= s * vj.conj() * 2.0;
                }
            }
        }
        for i in k + 2..n {
            a[(i, k)] = ZERO;
        }
    }
}

fn givens(a: Complex64, b: Complex64) -> (f64, Complex64) {
    let r = (a.norm_sqr() + b.norm_sqr()).sqrt();
    if r == 0.0 {
        return (1.0, ZERO);
    }
    if a.norm() == 0.0 {
        return (0.0, ONE);
    }
    let c = a.norm() / r;
    let s = (a / a.norm()) * b.conj() / r;
    (c, s)
}

fn wilkinson_shift(h: &ComplexMatrix, hi: usize) -> Complex64 {
    let (a, b, c, d) = (h[(hi - 1, hi - 1)], h[(hi - 1, hi)], h[(hi, hi - 1)], h[(hi, hi)]);
    let half = (a - d) * 0.5;
    let disc = (half * half + b * c).sqrt();
    let mean = (a + d) * 0.5;
    let (m1, m2) = (mean + disc, mean - disc);
    if (m1 - d).norm() <= (m2 - d).norm() {
        m1
    } else {
        m2
    }
}

/// Reduces an upper Hessenberg `h` to upper triangular form in place,
/// accumulating the unitary transformations into `z`.
fn schur(h: &mut ComplexMatrix, z: &mut ComplexMatrix) -> Result<()> {
    let n = h.rows();
    if n < 2 {
        return Ok(());
    }
    let eps = f64::EPSILON;
    let norm = h.frobenius_norm().max(f64::MIN_POSITIVE);
    let mut hi = n - 1;
    let mut iter = 0;
    let mut rotations: Vec<(f64, Complex64)> = Vec::with_capacity(n);
    while hi > 0 {
        let mut lo = hi;
        while lo > 0 {
            let mut s = h[(lo - 1, lo - 1)].norm() + h[(lo, lo)].norm();
            if s == 0.0 {
                s = norm;
            }
            if h[(lo, lo - 1)].norm() <= eps * s {
                h[(lo, lo - 1)] = ZERO;
                break;
            }
            lo -= 1;
        }
        if lo == hi {
            hi -= 1;
            iter = 0;
            continue;
        }
        iter += 1;
        if iter > MAX_ITER_PER_EIGENVALUE {
            return Err(Error::NoConvergence {
                unconverged: (0..=hi).collect(),
            });
        }
        let mu = if iter % 10 == 0 {
            // Exceptional shift to break cycles.
            h[(hi, hi)] + Complex64::new(0.75 * h[(hi, hi - 1)].norm(), 0.0)
        } else {
            wilkinson_shift(h, hi)
        };

        for k in lo..=hi {
            h[(k, k)] -= mu;
        }
        rotations.clear();
        for k in lo..hi {
            let (c, s) = givens(h[(k, k)], h[(k + 1, k)]);
            for j in k..n {
                let (x, y) = (h[(k, j)], h[(k + 1, j)]);
                h[(k, j)] = x * c + s * y;
                h[(k + 1, j)] = -s.conj() * x + y * c;
            }
            h[(k + 1, k)] = ZERO;
            rotations.push((c, s));
        }
        for (offset, &(c, s)) in rotations.iter().enumerate() {
            let k = lo + offset;
            for i in 0..=(k + 1).min(hi) {
                let (p, q) = (h[(i, k)], h[(i, k + 1)]);
                h[(i, k)] = p * c + q * s.conj();
                h[(i, k + 1)] = -p * s + q * c;
            }
            for i in 0..n {
                let (p, q) = (z[(i, k)], z[(i, k + 1)]);
                z[(i, k)] = p * c + q * s.conj();
                z[(i, k + 1)] = -p * s + q * c;
            }
        }
        for k in lo..=hi {
            h[(k, k)] += mu;
        }
    }
    Ok(())
}

/// Right eigenvectors of an upper triangular matrix, as columns.
fn triangular_eigenvectors(t: &ComplexMatrix) -> ComplexMatrix {
    let n = t.rows();
    let smin = (f64::EPSILON * t.frobenius_norm()).max(f64::MIN_POSITIVE);
    let mut x = ComplexMatrix::zeros(n, n);
    for k in 0..n {
        let mut col = vec![ZERO; n];
        col[k] = ONE;
        let lambda = t[(k, k)];
        for i in (0..k).rev() {
            let s: Complex64 = (i + 1..=k).map(|j| t[(i, j)] * col[j]).sum();
            let mut d = t[(i, i)] - lambda;
            if d.norm() < smin {
                d = Complex64::new(smin, 0.0);
            }
            col[i] = -s / d;
            let big = col[i].norm();
            if big > 1e150 {
                for c in col.iter_mut().take(k + 1) {
                    *c /= big;
                }
            }
        }
        x.set_column(k, &col);
    }
    x
}

/// Full right-eigendecomposition of a general complex matrix.
///
/// Every eigenpair must satisfy `|A v - e v| <= tol_eig * |A|_F`, otherwise
/// [`Error::ResidualExceeded`] is returned.
pub fn eig(a: &ComplexMatrix, tol_eig: f64) -> Result<Spectrum> {
    let n = a.ensure_square()?;
    if !(tol_eig > 0.0) {
        return Err(Error::BadTolerance(tol_eig));
    }
    let mut t = a.clone();
    let mut z = ComplexMatrix::identity(n);
    hessenberg(&mut t, &mut z);
    schur(&mut t, &mut z)?;

    let y = triangular_eigenvectors(&t);
    let vectors = &z * &y;
    let eigenvalues: Vec<Complex64> = (0..n).map(|k| t[(k, k)]).collect();
    let bound = tol_eig * a.frobenius_norm();
    let mut eigenvectors = ComplexMatrix::zeros(n, n);
    let mut residuals = Vec::with_capacity(n);
    for (k, &lambda) in eigenvalues.iter().enumerate() {
        let mut v = vectors.column(k);
        normalize_phase(&mut v);
        let av = a.apply(&v)?;
        let r = vec_norm(&av.iter().zip(&v).map(|(x, y)| x - lambda * y).collect::<Vec<_>>());
        if r > bound {
            return Err(Error::ResidualExceeded {
                index: k,
                residual: r,
                bound,
            });
        }
        residuals.push(r);
        eigenvectors.set_column(k, &v);
    }
    Ok(Spectrum {
        eigenvalues,
        eigenvectors,
        residuals,
    })
}

/// Eigenvalues only, via the same Schur route.
pub fn eigenvalues(a: &ComplexMatrix) -> Result<Vec<Complex64>> {
    let n = a.ensure_square()?;
    let mut t = a.clone();
    let mut z = ComplexMatrix::identity(n);
    hessenberg(&mut t, &mut z);
    schur(&mut t, &mut z)?;
    Ok((0..n).map(|k| t[(k, k)]).collect())
}
