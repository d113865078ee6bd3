//! Singular value decomposition by one-sided (Hestenes) Jacobi rotations,
//! with the null-space, rank and subspace helpers built on it.

use num_complex::Complex64;

use super::matrix::{vec_norm, ComplexMatrix, ZERO};
use crate::error::{Error, Result};

const MAX_SWEEPS: usize = 80;

/// `A = U diag(s) V^H` with singular values in descending order.
///
/// `u` is m x n; columns belonging to zero singular values are zero.
#[derive(Debug, Clone)]
pub struct Svd {
    pub u: ComplexMatrix,
    pub singular_values: Vec<f64>,
    pub v: ComplexMatrix,
}

impl Svd {
    pub fn sigma_max(&self) -> f64 {
        self.singular_values.first().copied().unwrap_or(0.0)
    }

    /// Number of singular values above `tol_rank * sigma_max`.
    pub fn rank(&self, tol_rank: f64) -> usize {
        let cut = tol_rank * self.sigma_max();
        if self.sigma_max() == 0.0 {
            return 0;
        }
        self.singular_values.iter().filter(|&&s| s > cut).count()
    }

    pub fn reconstruct(&self) -> ComplexMatrix {
        let sigma: Vec<Complex64> = self.singular_values.iter().map(|&s| Complex64::new(s, 0.0)).collect();
        &(&self.u * &ComplexMatrix::diagonal(&sigma)) * &self.v.adjoint()
    }
}

pub fn svd(a: &ComplexMatrix) -> Svd {
    let (m, n) = a.shape();
    // Column-major working copies.
    let mut w: Vec<Vec<Complex64>> = (0..n).map(|j| a.column(j)).collect();
    let mut v: Vec<Vec<Complex64>> = (0..n)
        .map(|j| {
            let mut e = vec![ZERO; n];
            e[j] = Complex64::new(1.0, 0.0);
            e
        })
        .collect();

    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let alpha: f64 = w[p].iter().map(Complex64::norm_sqr).sum();
                let beta: f64 = w[q].iter().map(Complex64::norm_sqr).sum();
                let gamma: Complex64 = w[p].iter().zip(&w[q]).map(|(x, y)| x.conj() * y).sum();
                let g = gamma.norm();
                if g == 0.0 || g <= f64::EPSILON * alpha.sqrt() * beta.sqrt() {
                    continue;
                }
                rotated = true;
                // Rescale before normalizing so subnormal overlaps still give |phase| = 1.
                let scaled = gamma / gamma.re.abs().max(gamma.im.abs());
                let phase = scaled.conj() / scaled.norm();
                let zeta = (beta - alpha) / (2.0 * g);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for cols in [&mut w, &mut v] {
                    let (left, right) = cols.split_at_mut(q);
                    for (x, y) in left[p].iter_mut().zip(right[0].iter_mut()) {
                        let yq = *y * phase;
                        let xp = *x;
                        *x = xp * c - yq * s;
                        *y = xp * s + yq * c;
                    }
                }
            }
        }
        if !rotated {
            break;
        }
    }

    let mut order: Vec<(usize, f64)> = w.iter().map(|col| vec_norm(col)).enumerate().collect();
    order.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));

    let mut u = ComplexMatrix::zeros(m, n);
    let mut vm = ComplexMatrix::zeros(n, n);
    let mut singular_values = Vec::with_capacity(n);
    for (k, &(j, s)) in order.iter().enumerate() {
        singular_values.push(s);
        if s > 0.0 {
            let col: Vec<Complex64> = w[j].iter().map(|z| z / s).collect();
            u.set_column(k, &col);
        }
        vm.set_column(k, &v[j]);
    }
    Svd {
        u,
        singular_values,
        v: vm,
    }
}

/// Jacobi rotations work with squared entries, so a norm that overflows
/// would silently zero every singular value.
fn ensure_in_range(a: &ComplexMatrix) -> Result<()> {
    if a.frobenius_norm().is_finite() {
        Ok(())
    } else {
        Err(Error::OutOfRange { max_abs: a.max_abs() })
    }
}

/// Orthonormal basis of the numerical null space: right singular vectors with
/// `sigma <= tol_rank * sigma_max`. A zero matrix has the full space as null space.
pub fn null_space(a: &ComplexMatrix, tol_rank: f64) -> Result<Vec<Vec<Complex64>>> {
    if !(tol_rank > 0.0) {
        return Err(Error::BadTolerance(tol_rank));
    }
    ensure_in_range(a)?;
    let d = svd(a);
    let r = d.rank(tol_rank);
    Ok((r..d.singular_values.len()).map(|k| d.v.column(k)).collect())
}

pub fn rank(a: &ComplexMatrix, tol_rank: f64) -> Result<usize> {
    if !(tol_rank > 0.0) {
        return Err(Error::BadTolerance(tol_rank));
    }
    ensure_in_range(a)?;
    Ok(svd(a).rank(tol_rank))
}

/// sigma_max / sigma_min (infinite for singular input).
pub fn condition_number(a: &ComplexMatrix) -> f64 {
    let d = svd(a);
    let smin = d.singular_values.last().copied().unwrap_or(0.0);
    if smin == 0.0 {
        f64::INFINITY
    } else {
        d.sigma_max() / smin
    }
}

/// Orthonormal basis of the span of `vectors`, dropping directions below
/// `tol * sigma_max`.
pub fn orthonormal_basis(vectors: &[Vec<Complex64>], tol: f64) -> Result<Vec<Vec<Complex64>>> {
    if vectors.is_empty() {
        return Ok(Vec::new());
    }
    let m = ComplexMatrix::from_columns(vectors)?;
    let d = svd(&m);
    let r = d.rank(tol);
    Ok((0..r).map(|k| d.u.column(k)).collect())
}

/// Distance between the spans of two vector sets: the larger of the two
/// Frobenius projection residuals `|Q_b - P_a Q_b|`, `|Q_a - P_b Q_a|`.
/// Zero iff the spans coincide; at least 1 if the dimensions differ.
pub fn subspace_distance(a: &[Vec<Complex64>], b: &[Vec<Complex64>]) -> Result<f64> {
    let qa = orthonormal_basis(a, 1e-12)?;
    let qb = orthonormal_basis(b, 1e-12)?;
    let residual = |basis: &[Vec<Complex64>], others: &[Vec<Complex64>]| -> f64 {
        others
            .iter()
            .map(|x| {
                let mut r = x.clone();
                for q in basis {
                    let c: Complex64 = q.iter().zip(x).map(|(a, b)| a.conj() * b).sum();
                    for (ri, qi) in r.iter_mut().zip(q) {
                        *ri -= c * qi;
                    }
                }
                r.iter().map(Complex64::norm_sqr).sum::<f64>()
            })
            .sum::<f64>()
            .sqrt()
    };
    Ok(residual(&qa, &qb).max(residual(&qb, &qa)))
}
