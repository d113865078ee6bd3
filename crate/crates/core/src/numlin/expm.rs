//! Matrix exponential by scaling and squaring with diagonal Padé approximants.
//!
//! Degree selection and the theta thresholds follow Higham, "The scaling and
//! squaring method for the matrix exponential revisited" (SIAM J. Matrix Anal.
//! Appl. 26, 2005). No eigendecomposition is involved, so defective inputs
//! are handled like any other matrix.

use num_complex::Complex64;

use super::lu::solve;
use super::matrix::ComplexMatrix;
use crate::error::{Error, Result};

const THETA: [(usize, f64); 5] = [
    (3, 1.495585217958292e-2),
    (5, 2.539_398_330_063_23e-1),
    (7, 9.504178996162932e-1),
    (9, 2.097847961257068e0),
    (13, 5.371920351148152e0),
];

// Squarings beyond this would need a norm far outside double range anyway.
const MAX_SQUARINGS: i32 = 1100;

/// Coefficients b_0..b_m of the [m/m] Padé approximant to e^x, with b_0 = 1.
fn pade_coefficients(m: usize) -> Vec<f64> {
    let mut b = vec![1.0; m + 1];
    for j in 1..=m {
        b[j] = b[j - 1] * (m - j + 1) as f64 / (j as f64 * (2 * m - j + 1) as f64);
    }
    b
}

fn axpy_sum(terms: &[(f64, &ComplexMatrix)], n: usize) -> ComplexMatrix {
    let mut out = ComplexMatrix::zeros(n, n);
    for &(c, m) in terms {
        out = &out + &m.scale_re(c);
    }
    out
}

/// Returns (U, V) with the approximant r_m(A) = (V - U)^{-1} (V + U).
fn pade_terms(a: &ComplexMatrix, m: usize) -> (ComplexMatrix, ComplexMatrix) {
    let n = a.rows();
    let b = pade_coefficients(m);
    let id = ComplexMatrix::identity(n);
    let a2 = a * a;
    if m < 13 {
        // Even powers A^0, A^2, ..., A^{m-1}.
        let mut pows = vec![id, a2.clone()];
        while pows.len() * 2 <= m {
            let next = pows.last().unwrap() * &a2;
            pows.push(next);
        }
        let odd: Vec<(f64, &ComplexMatrix)> = (0..=m / 2).map(|k| (b[2 * k + 1], &pows[k])).collect();
        let even: Vec<(f64, &ComplexMatrix)> = (0..=m / 2).map(|k| (b[2 * k], &pows[k])).collect();
        let u = a * &axpy_sum(&odd, n);
        let v = axpy_sum(&even, n);
        return (u, v);
    }
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;
    let inner_u = axpy_sum(&[(b[13], &a6), (b[11], &a4), (b[9], &a2)], n);
    let u = a * &(&(&a6 * &inner_u) + &axpy_sum(&[(b[7], &a6), (b[5], &a4), (b[3], &a2), (b[1], &id)], n));
    let inner_v = axpy_sum(&[(b[12], &a6), (b[10], &a4), (b[8], &a2)], n);
    let v = &(&a6 * &inner_v) + &axpy_sum(&[(b[6], &a6), (b[4], &a4), (b[2], &a2), (b[0], &id)], n);
    (u, v)
}

/// e^A for a square complex matrix.
pub fn matexp(a: &ComplexMatrix) -> Result<ComplexMatrix> {
    let n = a.ensure_square()?;
    if n == 0 {
        return Ok(ComplexMatrix::zeros(0, 0));
    }
    if n == 1 {
        let z = a[(0, 0)].exp();
        return ComplexMatrix::from_row_major(1, 1, vec![z]).map_err(|_| Error::Overflow { norm: a.norm_1() });
    }
    let norm = a.norm_1();
    if !norm.is_finite() {
        return Err(Error::Overflow { norm });
    }

    let (m, squarings) = match THETA.iter().find(|(_, theta)| norm <= *theta) {
        Some(&(m, _)) => (m, 0),
        None => {
            let s = (norm / THETA[4].1).log2().ceil().max(0.0) as i32;
            (13, s)
        }
    };
    if squarings > MAX_SQUARINGS {
        return Err(Error::Overflow { norm });
    }
    let scaled = a.scale_re(2f64.powi(-squarings));
    let (u, v) = pade_terms(&scaled, m);
    let mut r = solve(&(&v - &u), &(&v + &u)).map_err(|_| Error::Overflow { norm })?;
    for _ in 0..squarings {
        r = &r * &r;
        if !r.is_finite() {
            return Err(Error::Overflow { norm });
        }
    }
    if !r.is_finite() {
        return Err(Error::Overflow { norm });
    }
    Ok(r)
}

/// e^{-i H t}, the propagator of a constant generator over time `t`.
pub fn propagate(h: &ComplexMatrix, t: f64) -> Result<ComplexMatrix> {
    matexp(&h.scale(Complex64::new(0.0, -t)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numlin::lu::det;
    use crate::numlin::matrix::{I, ONE};
    use crate::random::random_matrix;
    use proptest::prelude::*;
    use rand::{rngs::StdRng, SeedableRng};

    /// Truncated Taylor series, kept independent of the Padé path.
    fn taylor(a: &ComplexMatrix, terms: usize) -> ComplexMatrix {
        let n = a.rows();
        let mut term = ComplexMatrix::identity(n);
        let mut sum = term.clone();
        for k in 1..terms {
            term = (&term * a).scale_re(1.0 / k as f64);
            sum = &sum + &term;
        }
        sum
    }

    #[test]
    fn pade_13_matches_reference_coefficients() {
        // Higham's b_k for m = 13 normalized by b_0 = 64764752532480000.
        let b = pade_coefficients(13);
        let reference = [
            64764752532480000.0,
            32382376266240000.0,
            7771770303897600.0,
            1187353796428800.0,
            129060195264000.0,
            10559470521600.0,
            670442572800.0,
            33522128640.0,
            1323241920.0,
            40840800.0,
            960960.0,
            16380.0,
            182.0,
            1.0,
        ];
        for (k, r) in reference.iter().enumerate() {
            assert!((b[k] - r / reference[0]).abs() <= 1e-15 * b[k].abs().max(1e-30) * 10.0);
        }
    }

    #[test]
    fn zero_gives_identity() {
        let e = matexp(&ComplexMatrix::zeros(3, 3)).unwrap();
        assert_eq!(e, ComplexMatrix::identity(3));
    }

    #[test]
    fn pauli_rotation() {
        let jt = 1.0;
        let e = matexp(&ComplexMatrix::pauli_x().scale(-I * jt)).unwrap();
        let expected = &ComplexMatrix::identity(2).scale_re(jt.cos()) - &ComplexMatrix::pauli_x().scale(I * jt.sin());
        assert!(e.distance(&expected) < 1e-14);
        let t = taylor(&ComplexMatrix::pauli_x().scale(-I * jt), 30);
        assert!(e.distance(&t) < 1e-14);
    }

    #[test]
    fn nilpotent_input_is_exact() {
        // J sigma_x + i J sigma_z squares to zero.
        let h = &ComplexMatrix::pauli_x() + &ComplexMatrix::pauli_z().scale(I);
        let t = 0.8;
        let e = propagate(&h, t).unwrap();
        let expected = &ComplexMatrix::identity(2) - &h.scale(I * t);
        assert!(e.distance(&expected) < 1e-14);
    }

    #[test]
    fn large_norm_uses_squaring() {
        let a = ComplexMatrix::diagonal(&[Complex64::new(20.0, 0.0), Complex64::new(-3.0, 5.0)]);
        let e = matexp(&a).unwrap();
        assert!((e[(0, 0)] - ONE * 20f64.exp()).norm() / 20f64.exp() < 1e-13);
        assert!((e[(1, 1)] - Complex64::new(-3.0, 5.0).exp()).norm() < 1e-13);
    }

    #[test]
    fn overflow_is_reported() {
        let a = ComplexMatrix::diagonal(&[Complex64::new(800.0, 0.0), ONE]);
        assert!(matches!(matexp(&a), Err(Error::Overflow { .. })));
    }

    #[test]
    fn matches_taylor_for_small_norm() {
        let mut rng = StdRng::seed_from_u64(7);
        for n in 2..6 {
            let a = random_matrix(&mut rng, n);
            let a = a.scale_re(1.0 / a.frobenius_norm());
            assert!(matexp(&a).unwrap().distance(&taylor(&a, 30)) < 1e-13);
        }
    }

    proptest! {
        #[test]
        fn inverse_pair(seed in any::<u64>(), n in 2usize..6, norm in 0.01f64..5.0) {
            let mut rng = StdRng::seed_from_u64(seed);
            let a = random_matrix(&mut rng, n);
            let a = a.scale_re(norm / a.frobenius_norm());
            let prod = &matexp(&a).unwrap() * &matexp(&a.scale_re(-1.0)).unwrap();
            prop_assert!(prod.distance(&ComplexMatrix::identity(n)) < 1e-10);
        }

        #[test]
        fn traceless_has_unit_det(seed in any::<u64>(), n in 2usize..5, norm in 0.01f64..5.0) {
            let mut rng = StdRng::seed_from_u64(seed);
            let mut a = random_matrix(&mut rng, n);
            let shift = a.trace() / n as f64;
            for i in 0..n {
                a[(i, i)] -= shift;
            }
            let a = a.scale_re(norm / a.frobenius_norm());
            let d = det(&matexp(&a).unwrap()).unwrap();
            prop_assert!((d - ONE).norm() < 1e-10);
        }
    }
}
