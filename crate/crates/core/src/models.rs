//! The two PT-symmetric dimers: `H1(t) = J sx + i gamma f(t) sz` (quantum,
//! constant or square-wave drive) and `H2(t) = J sy + i gamma f(t) sz`
//! (classical, constant or delta-kicked drive), with their closed forms.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::floquet::{modulus_splitting, period_propagator, Event, Schedule};
use crate::liouvillian::verify_intertwining;
use crate::numlin::{propagate, ComplexMatrix, I, ONE};

/// Imaginary residue allowed in closed-form coefficients, relative to their size.
pub const REALNESS_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Waveform {
    Static,
    SquareWave,
    DeltaKicks,
}

impl Waveform {
    pub fn as_str(self) -> &'static str {
        match self {
            Waveform::Static => "static",
            Waveform::SquareWave => "square",
            Waveform::DeltaKicks => "kicks",
        }
    }
}

impl fmt::Display for Waveform {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Waveform {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "static" => Ok(Waveform::Static),
            "square" => Ok(Waveform::SquareWave),
            "kicks" => Ok(Waveform::DeltaKicks),
            other => Err(Error::InvalidParameter(format!(
                "unknown waveform '{other}' (expected static, square or kicks)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Model {
    Quantum,
    Classical,
}

impl Model {
    pub fn name(self) -> &'static str {
        match self {
            Model::Quantum => "quantum-dimer",
            Model::Classical => "classical-dimer",
        }
    }

    /// The periodic waveform this model is defined with.
    pub fn driven_waveform(self) -> Waveform {
        match self {
            Model::Quantum => Waveform::SquareWave,
            Model::Classical => Waveform::DeltaKicks,
        }
    }

    pub fn supports(self, w: Waveform) -> bool {
        w == Waveform::Static || w == self.driven_waveform()
    }
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Model {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "quantum-dimer" => Ok(Model::Quantum),
            "classical-dimer" => Ok(Model::Classical),
            other => Err(Error::InvalidParameter(format!(
                "unknown model '{other}' (expected quantum-dimer or classical-dimer)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DimerParams {
    pub j: f64,
    pub gamma: f64,
    pub period: f64,
    pub waveform: Waveform,
}

impl DimerParams {
    pub fn new(j: f64, gamma: f64, period: f64, waveform: Waveform) -> Result<Self> {
        if !(j > 0.0 && j.is_finite()) {
            return Err(Error::InvalidParameter(format!("J must be positive, got {j}")));
        }
        if !(gamma >= 0.0 && gamma.is_finite()) {
            return Err(Error::InvalidParameter(format!("gamma must be non-negative, got {gamma}")));
        }
        if !(period > 0.0 && period.is_finite()) {
            return Err(Error::InvalidParameter(format!("T must be positive, got {period}")));
        }
        Ok(Self { j, gamma, period, waveform })
    }

    /// `sqrt(J^2 - gamma^2)`, real below the transition and positive
    /// imaginary above it.
    pub fn delta(&self) -> Complex64 {
        Complex64::new(self.j * self.j - self.gamma * self.gamma, 0.0).sqrt()
    }
}

pub fn quantum_hamiltonian(j: f64, gamma: f64) -> ComplexMatrix {
    &ComplexMatrix::pauli_x().scale_re(j) + &ComplexMatrix::pauli_z().scale(I * gamma)
}

pub fn classical_hamiltonian(j: f64, gamma: f64) -> ComplexMatrix {
    &ComplexMatrix::pauli_y().scale_re(j) + &ComplexMatrix::pauli_z().scale(I * gamma)
}

/// The undriven Hamiltonian (`f = 1`).
pub fn hamiltonian(model: Model, p: &DimerParams) -> ComplexMatrix {
    match model {
        Model::Quantum => quantum_hamiltonian(p.j, p.gamma),
        Model::Classical => classical_hamiltonian(p.j, p.gamma),
    }
}

fn unsupported(model: Model, w: Waveform) -> Error {
    Error::UnsupportedWaveform {
        model: model.name(),
        waveform: w.as_str(),
    }
}

/// Static: one segment. Square wave: `H1(+gamma)` for T/2, then `H1(-gamma)`.
pub fn quantum_dimer(p: &DimerParams) -> Result<Schedule> {
    let t = p.period;
    match p.waveform {
        Waveform::Static => Schedule::constant(quantum_hamiltonian(p.j, p.gamma), t),
        Waveform::SquareWave => Schedule::new(
            t,
            vec![
                Event::segment(t / 2.0, quantum_hamiltonian(p.j, p.gamma)),
                Event::segment(t / 2.0, quantum_hamiltonian(p.j, -p.gamma)),
            ],
        ),
        Waveform::DeltaKicks => Err(unsupported(Model::Quantum, p.waveform)),
    }
}

/// Static: one segment. Delta kicks: free evolution under `J sy` for T/2,
/// kick `exp(-gamma T sz)`, free evolution for T/2, kick `exp(+gamma T sz)`
/// at the end of the period (the `t = 0` delta of the next period).
/// The propagator is `e^{gamma T sz} e^{-iJT sy/2} e^{-gamma T sz} e^{-iJT sy/2}`.
pub fn classical_dimer(p: &DimerParams) -> Result<Schedule> {
    let t = p.period;
    match p.waveform {
        Waveform::Static => Schedule::constant(classical_hamiltonian(p.j, p.gamma), t),
        Waveform::DeltaKicks => {
            let free = ComplexMatrix::pauli_y().scale_re(p.j);
            let kick = ComplexMatrix::pauli_z().scale_re(p.gamma * t);
            Schedule::new(
                t,
                vec![
                    Event::segment(t / 2.0, free.clone()),
                    Event::kick(kick.scale_re(-1.0)),
                    Event::segment(t / 2.0, free),
                    Event::kick(kick),
                ],
            )
        }
        Waveform::SquareWave => Err(unsupported(Model::Classical, p.waveform)),
    }
}

pub fn dimer_schedule(model: Model, p: &DimerParams) -> Result<Schedule> {
    match model {
        Model::Quantum => quantum_dimer(p),
        Model::Classical => classical_dimer(p),
    }
}

#[derive(Debug, Clone)]
pub struct EtaPm {
    pub plus: ComplexMatrix,
    pub minus: ComplexMatrix,
    pub rate_plus: Complex64,
    pub rate_minus: Complex64,
}

/// Closed-form eigen-operators of the static dimers, with rates `+-2i Delta`.
pub fn analytic_eta_pm(model: Model, p: &DimerParams) -> Result<EtaPm> {
    if p.waveform != Waveform::Static {
        return Err(unsupported(model, p.waveform));
    }
    let delta = p.delta();
    if delta.norm() <= 1e-12 * p.j {
        return Err(Error::AtExceptionalPoint);
    }
    let j2 = p.j * p.j;
    let build = |a: Complex64| {
        let m = match model {
            Model::Quantum => ComplexMatrix::from_2x2(a * a, -I * a, I * a, Complex64::new(j2, 0.0)),
            Model::Classical => ComplexMatrix::from_2x2(a * a, -a, -a, Complex64::new(j2, 0.0)),
        };
        m.scale_re(1.0 / j2)
    };
    Ok(EtaPm {
        plus: build(p.gamma + I * delta),
        minus: build(p.gamma - I * delta),
        rate_plus: 2.0 * I * delta,
        rate_minus: -2.0 * I * delta,
    })
}

/// One-period propagator coefficients.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FloquetCoefficients {
    /// `G = g0 + i gx sx + gy sy`.
    Quantum { g0: f64, gx: f64, gy: f64 },
    /// `G = g0 + gx sx + i gy sy + gz sz`.
    Classical { g0: f64, gx: f64, gy: f64, gz: f64 },
}

impl FloquetCoefficients {
    pub fn g0(&self) -> f64 {
        match *self {
            FloquetCoefficients::Quantum { g0, .. } | FloquetCoefficients::Classical { g0, .. } => g0,
        }
    }

    pub fn matrix(&self) -> ComplexMatrix {
        let id = ComplexMatrix::identity(2);
        let (x, y, z) = (ComplexMatrix::pauli_x(), ComplexMatrix::pauli_y(), ComplexMatrix::pauli_z());
        match *self {
            FloquetCoefficients::Quantum { g0, gx, gy } => {
                &(&id.scale_re(g0) + &x.scale(I * gx)) + &y.scale_re(gy)
            }
            FloquetCoefficients::Classical { g0, gx, gy, gz } => {
                &(&(&id.scale_re(g0) + &x.scale_re(gx)) + &y.scale(I * gy)) + &z.scale_re(gz)
            }
        }
    }

    /// Positive in the symmetric phase, negative when broken, zero on the
    /// exceptional contour. Equals `1 - g0^2` because `det G = 1`.
    pub fn symmetry_margin(&self) -> f64 {
        match *self {
            FloquetCoefficients::Quantum { gx, gy, .. } => gx * gx - gy * gy,
            FloquetCoefficients::Classical { gx, gy, gz, .. } => gy * gy - gx * gx - gz * gz,
        }
    }

    /// Eigenvalues of the propagator.
    pub fn kappa(&self) -> [Complex64; 2] {
        let root = Complex64::new(-self.symmetry_margin(), 0.0).sqrt();
        let g0 = Complex64::new(self.g0(), 0.0);
        [g0 + root, g0 - root]
    }
}

/// `sin(z)/z`, with a series near zero.
fn sinc(z: Complex64) -> Complex64 {
    if z.norm() < 1e-4 {
        let z2 = z * z;
        ONE - z2 / 6.0 + z2 * z2 / 120.0
    } else {
        z.sin() / z
    }
}

fn real_part(z: Complex64, what: &str) -> Result<f64> {
    if z.im.abs() > REALNESS_TOL * z.norm().max(1.0) {
        log::warn!("{what} has imaginary residue {:e}", z.im);
        return Err(Error::ComplexCoefficient { imag: z.im });
    }
    Ok(z.re)
}

/// Square-wave coefficients `(G0, Gx, Gy)` evaluated with complex Delta,
/// before the realness check. The sinc form of `[J^2 cos(Delta T) -
/// gamma^2] / Delta^2` and friends is finite through Delta = 0.
pub fn quantum_coefficients_complex(p: &DimerParams) -> [Complex64; 3] {
    let (j, gamma, t) = (p.j, p.gamma, p.period);
    let delta = p.delta();
    let half = sinc(delta * (t / 2.0));
    let half2 = half * half;
    [
        ONE - half2 * (j * j * t * t / 2.0),
        -sinc(delta * t) * (j * t),
        -half2 * (j * gamma * t * t / 2.0),
    ]
}

pub fn analytic_floquet_coeffs(model: Model, p: &DimerParams) -> Result<FloquetCoefficients> {
    if p.waveform != model.driven_waveform() {
        return Err(unsupported(model, p.waveform));
    }
    match model {
        Model::Quantum => {
            let [g0, gx, gy] = quantum_coefficients_complex(p);
            Ok(FloquetCoefficients::Quantum {
                g0: real_part(g0, "G0")?,
                gx: real_part(gx, "Gx")?,
                gy: real_part(gy, "Gy")?,
            })
        }
        Model::Classical => {
            let (s, c) = (p.j * p.period / 2.0).sin_cos();
            let g = 2.0 * p.gamma * p.period;
            Ok(FloquetCoefficients::Classical {
                g0: c * c - s * s * g.cosh(),
                gx: -c * s * g.sinh(),
                gy: -c * s * (1.0 + g.cosh()),
                gz: -s * s * g.sinh(),
            })
        }
    }
}

/// Coefficients `(c0, cx, cy, cz)` with `m = c0 + cx sx + cy sy + cz sz`.
pub fn pauli_decompose(m: &ComplexMatrix) -> Result<[Complex64; 4]> {
    if m.shape() != (2, 2) {
        return Err(Error::BadShape {
            rows: m.rows(),
            cols: m.cols(),
            len: 4,
        });
    }
    let half = |p: &ComplexMatrix| (p * m).trace() / 2.0;
    Ok([
        m.trace() / 2.0,
        half(&ComplexMatrix::pauli_x()),
        half(&ComplexMatrix::pauli_y()),
        half(&ComplexMatrix::pauli_z()),
    ])
}

/// Analytic phase indicator: positive symmetric, negative broken.
pub fn symmetry_margin(model: Model, p: &DimerParams) -> Result<f64> {
    match p.waveform {
        Waveform::Static if model.supports(Waveform::Static) => Ok(p.j * p.j - p.gamma * p.gamma),
        _ => analytic_floquet_coeffs(model, p).map(|c| c.symmetry_margin()),
    }
}

/// Relative |kappa| splitting below which the numerical propagator counts
/// as symmetric. Rounding near the contour stays far below this.
pub const DICHOTOMY_THRESHOLD: f64 = 1e-6;

/// Numerical phase indicator from the composed propagator: true when broken.
pub fn numeric_broken(model: Model, p: &DimerParams) -> Result<bool> {
    let gf = period_propagator(&dimer_schedule(model, p)?)?;
    Ok(modulus_splitting(&gf)? > DICHOTOMY_THRESHOLD)
}

const BISECTION_STEPS: usize = 200;

fn bisect<F>(mut lo: f64, mut hi: f64, tol: f64, mut side: F) -> Result<f64>
where
    F: FnMut(f64) -> Result<bool>,
{
    let (a, b) = (side(lo)?, side(hi)?);
    if a == b {
        return Err(Error::NoSignChange { lo, hi });
    }
    for _ in 0..BISECTION_STEPS {
        if hi - lo <= tol * hi.abs().max(1.0) {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if side(mid)? == a {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// gamma/J on the exceptional contour between `g_lo` and `g_hi` at fixed
/// JT (J = 1), by bisection on the analytic margin.
pub fn bisect_analytic(model: Model, waveform: Waveform, jt: f64, g_lo: f64, g_hi: f64, tol: f64) -> Result<f64> {
    bisect(g_lo, g_hi, tol, |g| {
        Ok(symmetry_margin(model, &DimerParams::new(1.0, g, jt, waveform)?)? > 0.0)
    })
}

/// Same contour located from the numerical |kappa| dichotomy.
pub fn bisect_numeric(model: Model, waveform: Waveform, jt: f64, g_lo: f64, g_hi: f64, tol: f64) -> Result<f64> {
    bisect(g_lo, g_hi, tol, |g| numeric_broken(model, &DimerParams::new(1.0, g, jt, waveform)?))
}

/// `gamma T` on the kicked classical contour, `tanh(gamma T) = |cos(JT/2)|`.
pub fn classical_contour_closed_form(jt: f64) -> Option<f64> {
    let c = (jt / 2.0).cos().abs();
    (c < 1.0 && c > 0.0).then(|| c.atanh())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContourPoint {
    pub gamma_over_j: f64,
    pub jt: f64,
    /// The numerical classifier flips across the point.
    pub confirmed: bool,
}

/// Rectangular grid over (gamma/J, JT), both axes inclusive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub gamma: (f64, f64, usize),
    pub jt: (f64, f64, usize),
}

impl Grid {
    pub fn new(gamma: (f64, f64, usize), jt: (f64, f64, usize)) -> Result<Self> {
        for (name, (lo, hi, n)) in [("gamma", gamma), ("JT", jt)] {
            if n < 2 {
                return Err(Error::InvalidParameter(format!("{name} axis needs at least 2 points")));
            }
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(Error::InvalidParameter(format!("{name} axis bounds {lo}:{hi} are not increasing")));
            }
        }
        if gamma.0 < 0.0 || jt.0 <= 0.0 {
            return Err(Error::InvalidParameter("grid needs gamma >= 0 and JT > 0".into()));
        }
        Ok(Self { gamma, jt })
    }

    fn axis((lo, hi, n): (f64, f64, usize)) -> Vec<f64> {
        (0..n).map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64).collect()
    }

    pub fn gamma_values(&self) -> Vec<f64> {
        Self::axis(self.gamma)
    }

    pub fn jt_values(&self) -> Vec<f64> {
        Self::axis(self.jt)
    }
}

/// Exceptional contour points: every sign change of the analytic margin
/// along a gamma row is refined by bisection and checked against the
/// numerical classifier a small step to either side.
pub fn ep_contour(model: Model, waveform: Waveform, grid: &Grid) -> Result<Vec<ContourPoint>> {
    if !model.supports(waveform) {
        return Err(unsupported(model, waveform));
    }
    let gammas = grid.gamma_values();
    let mut points = Vec::new();
    for jt in grid.jt_values() {
        let margins = gammas
            .iter()
            .map(|&g| symmetry_margin(model, &DimerParams::new(1.0, g, jt, waveform)?))
            .collect::<Result<Vec<_>>>()?;
        for k in 0..gammas.len() - 1 {
            if (margins[k] > 0.0) == (margins[k + 1] > 0.0) {
                continue;
            }
            let g = bisect_analytic(model, waveform, jt, gammas[k], gammas[k + 1], 1e-13)?;
            let step = 1e-4 * (gammas[k + 1] - gammas[k]).max(1e-3);
            let below = numeric_broken(model, &DimerParams::new(1.0, (g - step).max(0.0), jt, waveform)?)?;
            let above = numeric_broken(model, &DimerParams::new(1.0, g + step, jt, waveform)?)?;
            points.push(ContourPoint {
                gamma_over_j: g,
                jt,
                confirmed: below != above,
            });
        }
    }
    Ok(points)
}

/// `exp(-i pi sz / 4)`, mapping the quantum dimer onto the classical one.
pub fn basis_rotation() -> ComplexMatrix {
    propagate(&ComplexMatrix::pauli_z(), std::f64::consts::FRAC_PI_4).expect("2x2 input")
}

/// `R eta R^dagger`.
pub fn rotate(eta: &ComplexMatrix) -> ComplexMatrix {
    let r = basis_rotation();
    &(&r * eta) * &r.adjoint()
}

/// Largest `|R H1 R^dagger - H2|_F` over both signs of the drive.
pub fn basis_rotation_check(p: &DimerParams) -> f64 {
    [p.gamma, -p.gamma]
        .into_iter()
        .map(|g| rotate(&quantum_hamiltonian(p.j, g)).distance(&classical_hamiltonian(p.j, g)))
        .fold(0.0, f64::max)
}

/// Intertwining residual under H2 of a quantum-dimer intertwiner after rotation.
pub fn rotated_intertwiner_residual(eta: &ComplexMatrix, p: &DimerParams) -> Result<f64> {
    verify_intertwining(&rotate(eta), &classical_hamiltonian(p.j, p.gamma))
}

/// `|+x> = (1, 1)/sqrt(2)`.
pub fn plus_x() -> Vec<Complex64> {
    let r = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    vec![r, r]
}
