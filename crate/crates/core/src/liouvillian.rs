//! Static Hamiltonians: the Liouvillian superoperator, its zero modes
//! (intertwining operators) and its exponentially evolving eigen-operators.

use std::cmp::Ordering;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::numlin::{
    eig, null_space, subspace_distance, svd, ComplexMatrix, Spectrum, Tolerances, I, ONE, ZERO,
};
use crate::vectorize::{kron, unvec_slice, vec};

/// Relative tolerance for declaring an operator Hermitian.
pub const HERMITIAN_TOL: f64 = 1e-10;
/// Default tolerance for [`classify_pt_phase`].
pub const DEFAULT_PHASE_TOL: f64 = 1e-9;
/// Rates closer than this (relative to the superoperator norm) form a cluster.
pub const RATE_CLUSTER_TOL: f64 = 1e-7;
/// `|rate| <= ZERO_RATE_TOL * |L|_F` counts as a zero mode.
pub const ZERO_RATE_TOL: f64 = 1e-8;

/// An operator paired with its superoperator eigenvalue.
///
/// For static Hamiltonians `rate` is the exponent E in
/// `<psi(t)|op|psi(t)> = e^{E t} <psi(0)|op|psi(0)>`; in Floquet use it holds
/// the per-period multiplier instead.
#[derive(Debug, Clone)]
pub struct EigenOperator {
    /// Unit Frobenius norm, phase fixed.
    pub op: ComplexMatrix,
    pub rate: Complex64,
    pub hermitian: bool,
    pub residual: f64,
}

#[derive(Debug, Clone)]
pub struct LiouvillianResult {
    pub liouvillian: ComplexMatrix,
    /// Hermitian basis of the zero-rate eigenspace.
    pub conserved: Vec<EigenOperator>,
    /// Eigen-operators with nonzero rate, in canonical order.
    pub transient: Vec<EigenOperator>,
    pub hamiltonian_spectrum: Spectrum,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PtPhase {
    Symmetric,
    Broken,
    ExceptionalPoint,
}

impl PtPhase {
    pub fn as_str(self) -> &'static str {
        match self {
            PtPhase::Symmetric => "symmetric",
            PtPhase::Broken => "broken",
            PtPhase::ExceptionalPoint => "exceptional-point",
        }
    }
}

impl std::fmt::Display for PtPhase {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// `L = -i (H^T ⊗ 1 - 1 ⊗ H^dagger)`, so that `L vec(eta) = vec(-i (eta H - H^dagger eta))`.
pub fn build_liouvillian(h: &ComplexMatrix) -> Result<ComplexMatrix> {
    let n = h.ensure_square()?;
    let id = ComplexMatrix::identity(n);
    let generator = &kron(&h.transpose(), &id) - &kron(&id, &h.adjoint());
    Ok(generator.scale(-I))
}

/// `-i (eta H - H^dagger eta)`, the action of the Liouvillian on an operator.
pub fn liouvillian_action(eta: &ComplexMatrix, h: &ComplexMatrix) -> Result<ComplexMatrix> {
    let commutator_like = &eta.matmul(h)? - &h.adjoint().matmul(eta)?;
    Ok(commutator_like.scale(-I))
}

/// Orders complex numbers by real part, then imaginary part.
pub fn canonical_cmp(a: &Complex64, b: &Complex64) -> Ordering {
    a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im))
}

/// All N^2 rates `-i (e_p - conj(e_q))` implied by the spectrum of `h`.
pub fn predicted_rates(h: &ComplexMatrix, tol_eig: f64) -> Result<Vec<Complex64>> {
    let spectrum = eig(h, tol_eig)?;
    Ok(rates_from_spectrum(&spectrum.eigenvalues))
}

pub(crate) fn rates_from_spectrum(eps: &[Complex64]) -> Vec<Complex64> {
    let mut rates: Vec<Complex64> = eps
        .iter()
        .flat_map(|p| eps.iter().map(move |q| -I * (p - q.conj())))
        .collect();
    rates.sort_by(canonical_cmp);
    rates
}

/// `|eta H - H^dagger eta|_F`; zero exactly for intertwiners.
pub fn verify_intertwining(eta: &ComplexMatrix, h: &ComplexMatrix) -> Result<f64> {
    if eta.shape() != h.shape() {
        return Err(Error::DimensionMismatch {
            op: "verify_intertwining",
            left: eta.shape(),
            right: h.shape(),
        });
    }
    Ok((&eta.matmul(h)? - &h.adjoint().matmul(eta)?).frobenius_norm())
}

fn intertwining_bound(eta: &ComplexMatrix, h: &ComplexMatrix) -> f64 {
    1e-8 * (eta.frobenius_norm() * h.frobenius_norm()).max(1.0)
}

/// Sign convention for Hermitian operators: the first largest-magnitude
/// entry (row-major) has positive real part, or positive imaginary part if
/// it is purely imaginary.
pub(crate) fn fix_hermitian_sign(op: ComplexMatrix) -> ComplexMatrix {
    let max = op.max_abs();
    let Some(pivot) = op.as_slice().iter().find(|z| z.norm() >= max * (1.0 - 1e-9)) else {
        return op;
    };
    let flip = if pivot.re.abs() > 1e-12 * pivot.norm() {
        pivot.re < 0.0
    } else {
        pivot.im < 0.0
    };
    if flip {
        op.scale(-ONE)
    } else {
        op
    }
}

/// Hermitian basis of the span of `ms`, assuming that span is closed under
/// the adjoint. Candidates `(M + M^dagger)/2` and `-i (M - M^dagger)/2` are
/// Gram-Schmidt orthonormalized in the Hilbert-Schmidt inner product;
/// candidates whose remainder falls below `tol` are discarded.
pub(crate) fn hermitian_basis(ms: &[ComplexMatrix], tol: f64) -> Vec<ComplexMatrix> {
    let target = ms.len();
    let mut basis: Vec<ComplexMatrix> = Vec::with_capacity(target);
    for m in ms {
        let md = m.adjoint();
        let sym = (m + &md).scale_re(0.5);
        let anti = (m - &md).scale(-I * 0.5);
        for candidate in [sym, anti] {
            if basis.len() == target {
                break;
            }
            let mut r = candidate;
            // Two passes keep the basis orthonormal to working precision.
            for _ in 0..2 {
                for b in &basis {
                    let c = b.hs_inner(&r).expect("same shape").re;
                    r = &r - &b.scale_re(c);
                }
            }
            let norm = r.frobenius_norm();
            if norm > tol {
                let r = r.scale_re(1.0 / norm);
                // Clear rounding-level anti-Hermitian parts.
                let r = (&r + &r.adjoint()).scale_re(0.5);
                basis.push(r);
            }
        }
    }
    basis.into_iter().map(fix_hermitian_sign).collect()
}

/// If `op` is Hermitian up to a global phase, returns that Hermitian
/// representative (unit norm, sign fixed).
pub(crate) fn hermitian_representative(op: &ComplexMatrix) -> Option<ComplexMatrix> {
    let opd = op.adjoint();
    let re_part = (op + &opd).scale_re(0.5);
    let im_part = (op - &opd).scale(-I * 0.5);
    let (a, b) = (re_part.frobenius_norm(), im_part.frobenius_norm());
    let (major, minor) = if a >= b { (re_part, im_part) } else { (im_part, re_part) };
    let major_norm = a.max(b);
    if major_norm == 0.0 {
        return None;
    }
    // op = e^{i phi} M requires the two Hermitian parts to be parallel.
    let overlap = major.hs_inner(&minor).ok()?.re / major_norm;
    let perpendicular = (&minor - &major.scale_re(overlap / major_norm)).frobenius_norm();
    if perpendicular > 1e-9 {
        return None;
    }
    Some(fix_hermitian_sign(major.scale_re(1.0 / major_norm)))
}

/// Orthonormal Hermitian basis of the intertwining operators of `h`
/// (null space of the Liouvillian, extracted by SVD).
pub fn conserved_operators(h: &ComplexMatrix, tol_rank: f64) -> Result<Vec<EigenOperator>> {
    let l = build_liouvillian(h)?;
    conserved_from_liouvillian(&l, h, tol_rank)
}

fn conserved_from_liouvillian(l: &ComplexMatrix, h: &ComplexMatrix, tol_rank: f64) -> Result<Vec<EigenOperator>> {
    let null = null_space(l, tol_rank)?;
    if null.is_empty() {
        log::warn!("Liouvillian has no zero modes at tol_rank = {tol_rank:e}");
        return Ok(Vec::new());
    }
    let ms = null.iter().map(|v| unvec_slice(v)).collect::<Result<Vec<_>>>()?;
    let hermitian = hermitian_basis(&ms, tol_rank.max(1e-12));
    if hermitian.len() != null.len() {
        log::warn!(
            "Hermitian basis has {} elements for a {}-dimensional null space",
            hermitian.len(),
            null.len()
        );
    }
    let vecs = hermitian
        .iter()
        .map(|m| vec(m).map(|v| v.into_inner()))
        .collect::<Result<Vec<_>>>()?;
    let drift = subspace_distance(&vecs, &null)?;
    if drift > 1e-6 {
        log::warn!("Hermitian basis drifted from the null space by {drift:e}");
    }
    hermitian
        .into_iter()
        .map(|op| {
            let residual = liouvillian_action(&op, h)?.frobenius_norm();
            Ok(EigenOperator {
                op,
                rate: ZERO,
                hermitian: true,
                residual,
            })
        })
        .collect()
}

/// Phase angle used for ordering, with rounding-level imaginary parts
/// snapped to zero so that real rates sort stably.
pub(crate) fn ordering_phase(z: Complex64) -> f64 {
    let im = if z.im.abs() <= 1e-12 * z.norm().max(1.0) { 0.0 } else { z.im };
    im.atan2(z.re)
}

/// Canonical order: `key` ascending, then phase descending (so `+i` rates
/// come before `-i` rates of equal magnitude).
pub(crate) fn sort_canonical(ops: &mut [EigenOperator], key: impl Fn(Complex64) -> f64) {
    ops.sort_by(|a, b| {
        let (ka, kb) = (key(a.rate), key(b.rate));
        let tie = 1e-12 * ka.abs().max(kb.abs()).max(1.0);
        if (ka - kb).abs() > tie {
            ka.total_cmp(&kb)
        } else {
            ordering_phase(b.rate).total_cmp(&ordering_phase(a.rate))
        }
    });
}

/// Eigenpairs of a superoperator `s` (as unvectorized operators) with the
/// `skip` smallest-by-`key` eigenvalues removed. Eigenvectors within a
/// cluster of nearly equal eigenvalues are orthonormalized against each
/// other; real eigenvalues get Hermitian representatives when possible.
pub(crate) fn superoperator_modes(
    s: &ComplexMatrix,
    tol_eig: f64,
    skip: usize,
    key: impl Fn(Complex64) -> f64,
    is_real: impl Fn(Complex64) -> bool,
    residual: impl Fn(&ComplexMatrix, Complex64) -> Result<f64>,
) -> Result<Vec<EigenOperator>> {
    let spectrum = eig(s, tol_eig)?;
    let mut order: Vec<usize> = (0..spectrum.len()).collect();
    order.sort_by(|&a, &b| key(spectrum.eigenvalues[a]).total_cmp(&key(spectrum.eigenvalues[b])));
    let kept: Vec<usize> = order.into_iter().skip(skip).collect();

    let cluster_tol = RATE_CLUSTER_TOL * s.frobenius_norm().max(f64::MIN_POSITIVE);
    let mut taken = vec![false; kept.len()];
    let mut out = Vec::with_capacity(kept.len());
    for a in 0..kept.len() {
        if taken[a] {
            continue;
        }
        let center = spectrum.eigenvalues[kept[a]];
        let members: Vec<usize> = (a..kept.len())
            .filter(|&b| !taken[b] && (spectrum.eigenvalues[kept[b]] - center).norm() <= cluster_tol)
            .collect();
        let mut accepted: Vec<Vec<Complex64>> = Vec::new();
        for &b in &members {
            taken[b] = true;
            let mut v = spectrum.eigenvector(kept[b]);
            if members.len() > 1 {
                for q in &accepted {
                    let c: Complex64 = q.iter().zip(&v).map(|(x, y)| x.conj() * y).sum();
                    for (vi, qi) in v.iter_mut().zip(q) {
                        *vi -= c * qi;
                    }
                }
                let norm = crate::numlin::vec_norm(&v);
                if norm < 1e-6 {
                    // Defective cluster: keep the solver's vector as is.
                    v = spectrum.eigenvector(kept[b]);
                } else {
                    v.iter_mut().for_each(|z| *z /= norm);
                    crate::numlin::normalize_phase(&mut v);
                }
            }
            accepted.push(v.clone());
            let lambda = spectrum.eigenvalues[kept[b]];
            let mut op = unvec_slice(&v)?;
            if is_real(lambda) {
                if let Some(herm) = hermitian_representative(&op) {
                    op = herm;
                }
            }
            let res = residual(&op, lambda)?;
            let hermitian = op.distance(&op.adjoint()) <= HERMITIAN_TOL;
            out.push(EigenOperator {
                op,
                rate: lambda,
                hermitian,
                residual: res,
            });
        }
    }
    sort_canonical(&mut out, key);
    Ok(out)
}

/// All N^2 eigen-operators of the Liouvillian of `h`, split into the
/// conserved (zero-rate, Hermitian basis from the SVD null space) and the
/// transient (nonzero-rate) ones.
pub fn eigen_operators(h: &ComplexMatrix, tol: Tolerances) -> Result<LiouvillianResult> {
    let hamiltonian_spectrum = eig(h, tol.eig)?;
    let l = build_liouvillian(h)?;
    let conserved = conserved_from_liouvillian(&l, h, tol.rank)?;

    let zero_cut = ZERO_RATE_TOL * l.frobenius_norm();
    let transient = superoperator_modes(
        &l,
        tol.eig,
        conserved.len(),
        |z| z.norm(),
        |z| z.im.abs() <= zero_cut,
        |op, rate| Ok((&liouvillian_action(op, h)? - &op.scale(rate)).frobenius_norm()),
    )?;
    let zero_like = transient.iter().filter(|e| e.rate.norm() <= zero_cut).count();
    if zero_like > 0 {
        log::debug!("{zero_like} near-zero rates beyond the null space (defective Liouvillian)");
    }
    Ok(LiouvillianResult {
        liouvillian: l,
        conserved,
        transient,
        hamiltonian_spectrum,
    })
}

/// `eta_{k+1} = eta_k H / scale`, starting from an intertwiner `eta1`.
/// The default scale is the spectral norm of `h`.
pub fn recursive_tower(
    eta1: &ComplexMatrix,
    h: &ComplexMatrix,
    count: usize,
    scale: Option<f64>,
) -> Result<Vec<ComplexMatrix>> {
    let residual = verify_intertwining(eta1, h)?;
    if residual > intertwining_bound(eta1, h) {
        return Err(Error::NotIntertwiner { residual });
    }
    let s = match scale {
        Some(s) if s > 0.0 && s.is_finite() => s,
        Some(s) => return Err(Error::InvalidParameter(format!("tower scale must be positive, got {s}"))),
        None => {
            let norm = svd(h).sigma_max();
            if norm > 0.0 {
                norm
            } else {
                1.0
            }
        }
    };
    let mut tower = Vec::with_capacity(count);
    let mut current = eta1.clone();
    for _ in 0..count {
        current = current.matmul(h)?.scale_re(1.0 / s);
        let residual = verify_intertwining(&current, h)?;
        if residual > intertwining_bound(&current, h) {
            return Err(Error::NotIntertwiner { residual });
        }
        tower.push(current.clone());
    }
    Ok(tower)
}

/// Classifies the spectrum of `h` as PT-symmetric (all real), broken
/// (complex-conjugate pairs) or at an exceptional point (coalescing
/// eigenvalues with a near-singular eigenvector matrix).
///
/// Eigenvalues at a second-order EP split by O(sqrt(eps)) in floating
/// point, so the collision and conditioning tests use `sqrt(tol)`.
pub fn classify_pt_phase(h: &ComplexMatrix, tol: f64) -> Result<PtPhase> {
    h.ensure_square()?;
    if !(tol > 0.0) {
        return Err(Error::BadTolerance(tol));
    }
    let spectrum = eig(h, crate::numlin::DEFAULT_TOL_EIG)?;
    let norm = h.frobenius_norm();
    if is_exceptional(&spectrum, tol, norm) {
        return Ok(PtPhase::ExceptionalPoint);
    }
    let broken = spectrum.eigenvalues.iter().any(|e| e.im.abs() > tol * norm);
    Ok(if broken { PtPhase::Broken } else { PtPhase::Symmetric })
}

pub(crate) fn is_exceptional(spectrum: &Spectrum, tol: f64, scale: f64) -> bool {
    let root = tol.sqrt();
    let ev = &spectrum.eigenvalues;
    let collide = (0..ev.len()).any(|i| (i + 1..ev.len()).any(|j| (ev[i] - ev[j]).norm() <= root * scale));
    collide && spectrum.eigenvector_condition() > 1.0 / root
}

/// `|P conj(H) P^{-1} - H|_F` for an involutory parity `p`.
pub fn verify_pt_symmetry(h: &ComplexMatrix, p: &ComplexMatrix) -> Result<f64> {
    let n = p.ensure_square()?;
    if h.shape() != p.shape() {
        return Err(Error::DimensionMismatch {
            op: "verify_pt_symmetry",
            left: h.shape(),
            right: p.shape(),
        });
    }
    let residual = p.matmul(p)?.distance(&ComplexMatrix::identity(n));
    if residual > 1e-10 {
        return Err(Error::NotInvolutory { residual });
    }
    Ok(p.matmul(&h.conj())?.matmul(p)?.distance(h))
}
