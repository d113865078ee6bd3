//! Time-periodic Hamiltonians built from piecewise-constant segments and
//! instantaneous kicks: the one-period propagator, the superoperator
//! `G = G_F^T ⊗ G_F^dagger`, its stroboscopic invariants and multiplier
//! eigen-operators, time-origin shifts and dense expectation traces.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::liouvillian::{hermitian_basis, is_exceptional, superoperator_modes, EigenOperator, PtPhase};
use crate::numlin::{
    eig, expectation, inverse, matexp, propagate, svd, vec_dot, vec_norm, ComplexMatrix, Spectrum,
    Tolerances, I, ONE, DEFAULT_TOL_EIG,
};
use crate::vectorize::{sandwich_matrix, unvec_slice, vec};

/// Relative spread of |kappa| tolerated in the symmetric phase.
pub const DEFAULT_MODULUS_TOL: f64 = 1e-7;
/// Unit multipliers: `|lambda - 1| <= UNIT_MULTIPLIER_TOL * max|lambda|`.
pub const UNIT_MULTIPLIER_TOL: f64 = 1e-8;
/// Dense-time resolution used when the caller has no preference.
pub const DEFAULT_STEPS_PER_PERIOD: usize = 200;

const DURATION_TOL: f64 = 1e-12;
const EP_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub enum Event {
    /// Evolves by `exp(-i H duration)`.
    Segment { duration: f64, generator: ComplexMatrix },
    /// Applies `exp(K)` instantaneously.
    Kick { generator: ComplexMatrix },
}

impl Event {
    pub fn segment(duration: f64, generator: ComplexMatrix) -> Self {
        Event::Segment { duration, generator }
    }

    pub fn kick(generator: ComplexMatrix) -> Self {
        Event::Kick { generator }
    }

    pub fn generator(&self) -> &ComplexMatrix {
        match self {
            Event::Segment { generator, .. } | Event::Kick { generator } => generator,
        }
    }

    pub fn duration(&self) -> f64 {
        match self {
            Event::Segment { duration, .. } => *duration,
            Event::Kick { .. } => 0.0,
        }
    }

    fn factor(&self) -> Result<ComplexMatrix> {
        match self {
            Event::Segment { duration, generator } => propagate(generator, *duration),
            Event::Kick { generator } => matexp(generator),
        }
    }
}

/// One period of a piecewise-constant drive, events in chronological order.
#[derive(Debug, Clone, PartialEq)]
pub struct Schedule {
    dim: usize,
    period: f64,
    events: Vec<Event>,
}

impl Schedule {
    pub fn new(period: f64, events: Vec<Event>) -> Result<Self> {
        if !(period > 0.0 && period.is_finite()) {
            return Err(Error::InvalidSchedule(format!("period must be positive, got {period}")));
        }
        let first = events
            .first()
            .ok_or_else(|| Error::InvalidSchedule("schedule has no events".into()))?;
        let dim = first.generator().ensure_square()?;
        let mut total = 0.0;
        for (k, e) in events.iter().enumerate() {
            let shape = e.generator().shape();
            if shape != (dim, dim) {
                return Err(Error::InvalidSchedule(format!(
                    "event {k} has a {}x{} generator, expected {dim}x{dim}",
                    shape.0, shape.1
                )));
            }
            let d = e.duration();
            if !(d >= 0.0 && d.is_finite()) {
                return Err(Error::InvalidSchedule(format!("event {k} has duration {d}")));
            }
            total += d;
        }
        if (total - period).abs() > DURATION_TOL * period {
            return Err(Error::InvalidSchedule(format!(
                "segment durations sum to {total}, period is {period}"
            )));
        }
        Ok(Self { dim, period, events })
    }

    /// A single segment lasting the whole period.
    pub fn constant(h: ComplexMatrix, period: f64) -> Result<Self> {
        Self::new(period, vec![Event::segment(period, h)])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn events(&self) -> &[Event] {
        &self.events
    }

    /// Start time of each event within the period.
    fn start_times(&self) -> Vec<f64> {
        let mut t = 0.0;
        self.events
            .iter()
            .map(|e| {
                let start = t;
                t += e.duration();
                start
            })
            .collect()
    }
}

#[derive(Debug, Clone)]
pub struct FloquetPropagator {
    pub gf: ComplexMatrix,
    pub kappa: Spectrum,
    pub phase: PtPhase,
}

/// Time-ordered product of the event factors, earliest rightmost.
pub fn period_propagator(s: &Schedule) -> Result<ComplexMatrix> {
    ordered_product(s.events())
}

fn ordered_product(events: &[Event]) -> Result<ComplexMatrix> {
    let mut g = ComplexMatrix::identity(events.first().map_or(0, |e| e.generator().rows()));
    for e in events {
        g = e.factor()?.matmul(&g)?;
    }
    Ok(g)
}

pub fn propagator(s: &Schedule) -> Result<FloquetPropagator> {
    propagator_with(s, DEFAULT_TOL_EIG, DEFAULT_MODULUS_TOL)
}

pub fn propagator_with(s: &Schedule, tol_eig: f64, modulus_tol: f64) -> Result<FloquetPropagator> {
    let gf = period_propagator(s)?;
    let kappa = eig(&gf, tol_eig)?;
    let phase = classify_floquet_phase(&kappa, modulus_tol)?;
    Ok(FloquetPropagator { gf, kappa, phase })
}

/// Symmetric when all |kappa| agree to `tol` (relative), Broken otherwise,
/// ExceptionalPoint when eigenvalues coalesce with a near-singular
/// eigenvector matrix.
pub fn classify_floquet_phase(kappa: &Spectrum, tol: f64) -> Result<PtPhase> {
    if !(tol > 0.0) {
        return Err(Error::BadTolerance(tol));
    }
    let moduli: Vec<f64> = kappa.eigenvalues.iter().map(|k| k.norm()).collect();
    let max = moduli.iter().copied().fold(0.0, f64::max);
    let min = moduli.iter().copied().fold(f64::INFINITY, f64::min);
    if is_exceptional(kappa, EP_TOL, max.max(f64::MIN_POSITIVE)) {
        return Ok(PtPhase::ExceptionalPoint);
    }
    Ok(if max - min <= tol * max { PtPhase::Symmetric } else { PtPhase::Broken })
}

/// Spread of |kappa| relative to the largest modulus; zero in the
/// symmetric phase, positive when broken.
pub fn modulus_splitting(gf: &ComplexMatrix) -> Result<f64> {
    let moduli: Vec<f64> = crate::numlin::eigenvalues(gf)?.iter().map(|k| k.norm()).collect();
    let max = moduli.iter().copied().fold(0.0, f64::max);
    let min = moduli.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(if max > 0.0 { (max - min) / max } else { 0.0 })
}

/// How a pair of non-unit multipliers is related.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Pairing {
    /// `b = conj(a)` with `|a| = |b| = 1`.
    Conjugate,
    /// Equal phases with `|a b| = 1`.
    EqualPhase,
    Unpaired,
}

pub fn detect_pairing(a: Complex64, b: Complex64, tol: f64) -> Pairing {
    if (b - a.conj()).norm() <= tol && (a.norm() - 1.0).abs() <= tol {
        Pairing::Conjugate
    } else if (a.norm() * b.norm() - 1.0).abs() <= tol && (a.arg() - b.arg()).abs() <= tol {
        Pairing::EqualPhase
    } else {
        Pairing::Unpaired
    }
}

/// Matrix of `eta -> G_F^dagger eta G_F` on `vec(eta)`.
pub fn build_floquet_superoperator(gf: &ComplexMatrix) -> Result<ComplexMatrix> {
    sandwich_matrix(&gf.adjoint(), gf)
}

/// `G_F^dagger eta G_F - eta`.
pub fn stroboscopic_defect(eta: &ComplexMatrix, gf: &ComplexMatrix) -> Result<ComplexMatrix> {
    Ok(&gf.adjoint().matmul(eta)?.matmul(gf)? - eta)
}

/// Hermitian basis of the operators with `G_F^dagger eta G_F = eta`, from
/// the SVD null space of `G - 1`.
pub fn stroboscopic_conserved(gf: &ComplexMatrix, tol_rank: f64) -> Result<Vec<EigenOperator>> {
    if !(tol_rank > 0.0) {
        return Err(Error::BadTolerance(tol_rank));
    }
    let g = build_floquet_superoperator(gf)?;
    let shifted = &g - &ComplexMatrix::identity(g.rows());
    let d = svd(&shifted);
    // Unit multipliers have scale 1, so the cutoff never drops below tol_rank.
    let cut = tol_rank * d.sigma_max().max(1.0);
    let null: Vec<Vec<Complex64>> = d
        .singular_values
        .iter()
        .enumerate()
        .filter(|(_, &s)| s <= cut)
        .map(|(k, _)| d.v.column(k))
        .collect();
    if null.is_empty() {
        log::warn!("no stroboscopic invariants at tol_rank = {tol_rank:e}");
        return Ok(Vec::new());
    }
    let ms = null.iter().map(|v| unvec_slice(v)).collect::<Result<Vec<_>>>()?;
    hermitian_basis(&ms, tol_rank.max(1e-12))
        .into_iter()
        .map(|op| {
            let residual = stroboscopic_defect(&op, gf)?.frobenius_norm();
            Ok(EigenOperator {
                op,
                rate: ONE,
                hermitian: true,
                residual,
            })
        })
        .collect()
}

#[derive(Debug, Clone)]
pub struct FloquetModes {
    pub superoperator: ComplexMatrix,
    /// Unit-multiplier operators, Hermitian basis.
    pub conserved: Vec<EigenOperator>,
    /// Remaining eigen-operators ordered by `|lambda - 1|`.
    pub transient: Vec<EigenOperator>,
}

impl FloquetModes {
    pub fn all(&self) -> impl Iterator<Item = &EigenOperator> {
        self.conserved.iter().chain(&self.transient)
    }
}

pub fn floquet_modes(gf: &ComplexMatrix, tol: Tolerances) -> Result<FloquetModes> {
    let superoperator = build_floquet_superoperator(gf)?;
    let conserved = stroboscopic_conserved(gf, tol.rank)?;
    let scale = superoperator.frobenius_norm();
    let gd = gf.adjoint();
    let transient = superoperator_modes(
        &superoperator,
        tol.eig,
        conserved.len(),
        |z| (z - ONE).norm(),
        |z| z.im.abs() <= UNIT_MULTIPLIER_TOL * scale,
        |op, lambda| Ok((&gd.matmul(op)?.matmul(gf)? - &op.scale(lambda)).frobenius_norm()),
    )?;
    Ok(FloquetModes {
        superoperator,
        conserved,
        transient,
    })
}

/// All N^2 pairs (eta, lambda); the `rate` field holds the multiplier.
pub fn floquet_eigen_operators(gf: &ComplexMatrix, tol: Tolerances) -> Result<Vec<EigenOperator>> {
    let modes = floquet_modes(gf, tol)?;
    Ok(modes.conserved.into_iter().chain(modes.transient).collect())
}

/// All N^2 products `kappa_p conj(kappa_q)`.
pub fn predicted_multipliers(kappa: &[Complex64]) -> Vec<Complex64> {
    kappa
        .iter()
        .flat_map(|p| kappa.iter().map(move |q| p * q.conj()))
        .collect()
}

#[derive(Debug, Clone)]
pub struct Candidate {
    pub op: ComplexMatrix,
    /// Linearly independent of the seed (Hilbert-Schmidt Gram test).
    pub independent: bool,
}

#[derive(Debug, Clone)]
pub struct RecursiveCandidates {
    pub symmetrized: Candidate,
    pub antisymmetrized: Candidate,
}

/// `(eta1 G + G^dagger eta1)/2` and `-i (eta1 G - G^dagger eta1)/2` for a
/// stroboscopic invariant `eta1`.
pub fn recursive_floquet(eta1: &ComplexMatrix, gf: &ComplexMatrix) -> Result<RecursiveCandidates> {
    let scale = (eta1.frobenius_norm() * gf.frobenius_norm().powi(2)).max(1.0);
    let residual = stroboscopic_defect(eta1, gf)?.frobenius_norm();
    if residual > 1e-8 * scale {
        return Err(Error::NotConserved { residual });
    }
    let right = eta1.matmul(gf)?;
    let left = gf.adjoint().matmul(eta1)?;
    let sym = (&right + &left).scale_re(0.5);
    let anti = (&right - &left).scale(-I * 0.5);
    let tag = |op: ComplexMatrix| {
        let independent = independent_of(&op, eta1, 1e-10 * scale);
        Candidate { op, independent }
    };
    Ok(RecursiveCandidates {
        symmetrized: tag(sym),
        antisymmetrized: tag(anti),
    })
}

fn independent_of(op: &ComplexMatrix, seed: &ComplexMatrix, zero: f64) -> bool {
    let (a, b) = (op.frobenius_norm(), seed.frobenius_norm());
    if a <= zero || b == 0.0 {
        return false;
    }
    let overlap = op.hs_inner(seed).map(|z| z.norm()).unwrap_or(0.0);
    // Normalized Gram determinant.
    1.0 - (overlap / (a * b)).powi(2) > 1e-8
}

/// Moves the time origin to `t0`: returns `S`, the propagator over
/// `[0, t0]`, and the cyclically rotated schedule whose one-period
/// propagator is `S G_F S^{-1}`. A segment straddling `t0` is split.
pub fn time_shift(s: &Schedule, t0: f64) -> Result<(ComplexMatrix, Schedule)> {
    let period = s.period();
    if !(t0 >= 0.0 && t0 < period) {
        return Err(Error::InvalidParameter(format!("time shift {t0} outside [0, {period})")));
    }
    if t0 == 0.0 {
        return Ok((ComplexMatrix::identity(s.dim()), s.clone()));
    }
    let snap = DURATION_TOL * period;
    let mut before = Vec::new();
    let mut after = Vec::new();
    for (e, start) in s.events().iter().zip(s.start_times()) {
        match e {
            Event::Kick { .. } => {
                if (start - t0).abs() <= snap {
                    return Err(Error::ShiftOnKick { t0 });
                }
                if start < t0 {
                    before.push(e.clone());
                } else {
                    after.push(e.clone());
                }
            }
            Event::Segment { duration, generator } => {
                let end = start + duration;
                if end <= t0 + snap {
                    before.push(e.clone());
                } else if start >= t0 - snap {
                    after.push(e.clone());
                } else {
                    before.push(Event::segment(t0 - start, generator.clone()));
                    after.push(Event::segment(end - t0, generator.clone()));
                }
            }
        }
    }
    let sm = if before.is_empty() {
        ComplexMatrix::identity(s.dim())
    } else {
        ordered_product(&before)?
    };
    after.extend(before);
    Ok((sm, Schedule::new(period, after)?))
}

/// `S^{-1 dagger} eta S^{-1}`: an invariant of `G_F` mapped to the shifted frame.
pub fn shift_invariant(eta: &ComplexMatrix, s: &ComplexMatrix) -> Result<ComplexMatrix> {
    let si = inverse(s)?;
    si.adjoint().matmul(eta)?.matmul(&si)
}

#[derive(Debug, Clone)]
pub struct TraceSeries {
    /// Sample times in units of the period.
    pub times: Vec<f64>,
    /// `values[alpha][k]`: ratio `<psi(t_k)|eta|psi(t_k)> / <psi(0)|eta|psi(0)>`,
    /// or the raw expectation when the initial value vanishes.
    pub values: Vec<Vec<Complex64>>,
    pub stroboscopic_indices: Vec<usize>,
    pub labels: Vec<String>,
    /// False where the initial expectation was too small to divide by.
    pub normalized: Vec<bool>,
    /// Largest relative gap between the dense-time state and `G_F^m psi0`.
    pub drift: f64,
}

/// One propagator per substep of the period. Kicks at local time 0 belong
/// to the first substep; otherwise a kick at time `t` belongs to the substep
/// ending at or after `t`.
fn substep_propagators(s: &Schedule, steps: usize) -> Result<Vec<ComplexMatrix>> {
    let period = s.period();
    let snap = DURATION_TOL * period;
    let starts = s.start_times();
    let edge = |j: usize| period * j as f64 / steps as f64;
    (0..steps)
        .map(|j| {
            let (a, b) = (edge(j), edge(j + 1));
            let mut u = ComplexMatrix::identity(s.dim());
            for (e, &start) in s.events().iter().zip(&starts) {
                let factor = match e {
                    Event::Kick { generator } => {
                        let inside = if j == 0 { start <= b + snap } else { start > a + snap && start <= b + snap };
                        if !inside {
                            continue;
                        }
                        matexp(generator)?
                    }
                    Event::Segment { duration, generator } => {
                        let overlap = (start + duration).min(b) - start.max(a);
                        if overlap <= 0.0 {
                            continue;
                        }
                        propagate(generator, overlap)?
                    }
                };
                u = factor.matmul(&u)?;
            }
            Ok(u)
        })
        .collect()
}

/// Dense-time expectation traces. Within a period the state advances by
/// substep propagators; at each period boundary it is reset to
/// `G_F^m psi0`, and the gap is reported as `drift`.
pub fn evolve_trace(
    s: &Schedule,
    psi0: &[Complex64],
    etas: &[ComplexMatrix],
    steps_per_period: usize,
    periods: usize,
) -> Result<TraceSeries> {
    let n = s.dim();
    if psi0.len() != n {
        return Err(Error::DimensionMismatch {
            op: "evolve_trace",
            left: (psi0.len(), 1),
            right: (n, n),
        });
    }
    if vec_norm(psi0) == 0.0 {
        return Err(Error::ZeroState);
    }
    if steps_per_period == 0 || periods == 0 {
        return Err(Error::InvalidParameter("steps per period and periods must be positive".into()));
    }
    for eta in etas {
        if eta.shape() != (n, n) {
            return Err(Error::DimensionMismatch {
                op: "evolve_trace",
                left: eta.shape(),
                right: (n, n),
            });
        }
    }
    let steps = substep_propagators(s, steps_per_period)?;
    let gf = period_propagator(s)?;

    let norm0 = vec_norm(psi0).powi(2);
    let mut denominators = Vec::with_capacity(etas.len());
    let mut normalized = Vec::with_capacity(etas.len());
    for eta in etas {
        let e0 = expectation(eta, psi0)?;
        let ok = e0.norm() > 1e-12 * eta.frobenius_norm() * norm0;
        normalized.push(ok);
        denominators.push(if ok { e0 } else { ONE });
    }

    let total = steps_per_period * periods;
    let mut times = Vec::with_capacity(total + 1);
    let mut values: Vec<Vec<Complex64>> = vec![Vec::with_capacity(total + 1); etas.len()];
    let mut stroboscopic_indices = Vec::with_capacity(periods + 1);
    let mut record = |psi: &[Complex64], k: usize, values: &mut Vec<Vec<Complex64>>| -> Result<()> {
        times.push(k as f64 / steps_per_period as f64);
        for ((eta, d), series) in etas.iter().zip(&denominators).zip(values.iter_mut()) {
            series.push(expectation(eta, psi)? / d);
        }
        Ok(())
    };

    let mut psi = psi0.to_vec();
    let mut strobe = psi0.to_vec();
    let mut drift: f64 = 0.0;
    record(&psi, 0, &mut values)?;
    stroboscopic_indices.push(0);
    for m in 0..periods {
        for (j, u) in steps.iter().enumerate() {
            psi = u.apply(&psi)?;
            let k = m * steps_per_period + j + 1;
            if j + 1 == steps_per_period {
                strobe = gf.apply(&strobe)?;
                let gap: Vec<Complex64> = psi.iter().zip(&strobe).map(|(a, b)| a - b).collect();
                let reference = vec_norm(&strobe);
                if reference > 0.0 {
                    drift = drift.max(vec_norm(&gap) / reference);
                }
                psi.clone_from(&strobe);
                stroboscopic_indices.push(k);
            }
            record(&psi, k, &mut values)?;
        }
    }
    if drift > 1e-8 {
        log::warn!("dense-time evolution drifted from G_F^m psi0 by {drift:e}");
    }
    Ok(TraceSeries {
        times,
        values,
        stroboscopic_indices,
        labels: (1..=etas.len()).map(|k| format!("eta{k}")).collect(),
        normalized,
        drift,
    })
}

/// Cosine of the angle between two operators in the Hilbert-Schmidt
/// geometry; 1 when they agree up to normalization and phase.
pub fn alignment(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<f64> {
    let (va, vb) = (vec(a)?, vec(b)?);
    let denom = vec_norm(va.as_slice()) * vec_norm(vb.as_slice());
    if denom == 0.0 {
        return Ok(0.0);
    }
    Ok(vec_dot(va.as_slice(), vb.as_slice()).norm() / denom)
}
