//! Seeded random test inputs: complex Gaussian matrices and states, and
//! PT-symmetric Hamiltonians under the exchange parity.

use num_complex::Complex64;
use rand::Rng;
use rand::distributions::Distribution;

use crate::numlin::{vec_norm, ComplexMatrix, ONE};

struct StandardNormal;

impl Distribution<f64> for StandardNormal {
    // Box-Muller; rand_distr is not worth a dependency for this.
    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let u1: f64 = rng.gen_range(f64::EPSILON..1.0);
        let u2: f64 = rng.gen();
        (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
    }
}

pub fn random_complex<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    Complex64::new(StandardNormal.sample(rng), StandardNormal.sample(rng))
}

/// n x n matrix with i.i.d. standard complex Gaussian entries.
pub fn random_matrix<R: Rng + ?Sized>(rng: &mut R, n: usize) -> ComplexMatrix {
    let data = (0..n * n).map(|_| random_complex(rng)).collect();
    ComplexMatrix::from_row_major(n, n, data).expect("finite samples")
}

/// Unit-norm random state.
pub fn random_state<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<Complex64> {
    let v: Vec<Complex64> = (0..n).map(|_| random_complex(rng)).collect();
    let norm = vec_norm(&v);
    v.into_iter().map(|z| z / norm).collect()
}

/// The exchange (anti-diagonal) parity, P^2 = 1.
pub fn exchange_parity(n: usize) -> ComplexMatrix {
    let mut p = ComplexMatrix::zeros(n, n);
    for i in 0..n {
        p[(i, n - 1 - i)] = ONE;
    }
    p
}

/// Random H with P conj(H) P = H for the exchange parity P, so the
/// spectrum is real or closed under complex conjugation.
pub fn random_pt_symmetric<R: Rng + ?Sized>(rng: &mut R, n: usize) -> ComplexMatrix {
    let a = random_matrix(rng, n);
    let p = exchange_parity(n);
    let mirrored = &(&p * &a.conj()) * &p;
    (&a + &mirrored).scale_re(0.5)
}

/// Random Hermitian matrix.
pub fn random_hermitian<R: Rng + ?Sized>(rng: &mut R, n: usize) -> ComplexMatrix {
    let a = random_matrix(rng, n);
    (&a + &a.adjoint()).scale_re(0.5)
}
