use intertwine::floquet::{
    detect_pairing, floquet_modes, modulus_splitting, predicted_multipliers, propagator_with, recursive_floquet,
    stroboscopic_defect, Candidate, FloquetModes, Pairing, DEFAULT_MODULUS_TOL,
};
use intertwine::models::{analytic_floquet_coeffs, FloquetCoefficients, Model};
use intertwine::ComplexMatrix;
use serde::Serialize;

use super::{max_mismatch, operator_entries, span_residual, OperatorEntry, SourceInfo, TolInfo};
use crate::config::Config;
use crate::error::CliResult;
use crate::output::{cx_vec, f, mat, Csv, Cx, OutDir};

#[derive(Debug, Serialize)]
struct FloquetReport {
    command: &'static str,
    source: SourceInfo,
    dimension: usize,
    period: f64,
    tolerances: TolInfo,
    propagator: Vec<Vec<Cx>>,
    kappa: Vec<Cx>,
    kappa_modulus: Vec<f64>,
    modulus_splitting: f64,
    pt_phase: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pairing: Option<&'static str>,
    conserved_count: usize,
    transient_count: usize,
    max_multiplier_mismatch: f64,
    eigen_operators: Vec<OperatorEntry>,
    recursive: Recursive,
    #[serde(skip_serializing_if = "Option::is_none")]
    closed_form: Option<ClosedForm>,
}

#[derive(Debug, Serialize)]
#[serde(untagged)]
enum Recursive {
    Checked {
        seed: Vec<Vec<Cx>>,
        symmetrized: CandidateReport,
        antisymmetrized: CandidateReport,
    },
    Unavailable {
        unavailable: String,
    },
}

#[derive(Debug, Serialize)]
struct CandidateReport {
    operator: Vec<Vec<Cx>>,
    independent: bool,
    /// `|G^dagger eta G - eta| / |eta|`.
    defect: f64,
    /// Relative distance from the span of the conserved basis.
    span_residual: f64,
}

#[derive(Debug, Serialize)]
struct ClosedForm {
    coefficients: Coefficients,
    kappa: Vec<Cx>,
    symmetry_margin: f64,
    relative_distance: f64,
}

#[derive(Debug, Serialize)]
struct Coefficients {
    g0: f64,
    gx: f64,
    gy: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    gz: Option<f64>,
}

impl From<FloquetCoefficients> for Coefficients {
    fn from(c: FloquetCoefficients) -> Self {
        match c {
            FloquetCoefficients::Quantum { g0, gx, gy } => Coefficients { g0, gx, gy, gz: None },
            FloquetCoefficients::Classical { g0, gx, gy, gz } => Coefficients { g0, gx, gy, gz: Some(gz) },
        }
    }
}

/// The seed a built-in model is known to conserve, or the first basis operator.
pub fn seed_operator(cfg: &Config, modes: &FloquetModes) -> Option<ComplexMatrix> {
    match cfg.builtin() {
        Some((Model::Quantum, _)) => Some(ComplexMatrix::pauli_x()),
        Some((Model::Classical, _)) => Some(ComplexMatrix::pauli_y()),
        None => modes.conserved.first().map(|e| e.op.clone()),
    }
}

fn candidate(c: &Candidate, gf: &ComplexMatrix, basis: &[&ComplexMatrix]) -> CliResult<CandidateReport> {
    let norm = c.op.frobenius_norm();
    let defect = stroboscopic_defect(&c.op, gf)?.frobenius_norm();
    Ok(CandidateReport {
        operator: mat(&c.op),
        independent: c.independent,
        defect: if norm > 0.0 { defect / norm } else { 0.0 },
        span_residual: span_residual(&c.op, basis)?,
    })
}

pub fn run(cfg: &Config) -> CliResult<()> {
    let schedule = cfg.schedule()?;
    let fp = propagator_with(&schedule, cfg.tol.eig, DEFAULT_MODULUS_TOL)?;
    let modes = floquet_modes(&fp.gf, cfg.tol)?;
    let kappa = &fp.kappa.eigenvalues;
    let predicted = predicted_multipliers(kappa);
    let entries = operator_entries(&modes.conserved, &modes.transient, &predicted, cfg.tol.rank)?;

    let pairing = (kappa.len() == 2).then(|| match detect_pairing(kappa[0], kappa[1], DEFAULT_MODULUS_TOL) {
        Pairing::Conjugate => "conjugate",
        Pairing::EqualPhase => "equal-phase",
        Pairing::Unpaired => "unpaired",
    });

    let basis: Vec<&ComplexMatrix> = modes.conserved.iter().map(|e| &e.op).collect();
    let recursive = match seed_operator(cfg, &modes) {
        None => Recursive::Unavailable { unavailable: "no conserved operator to seed from".into() },
        Some(seed) => match recursive_floquet(&seed, &fp.gf) {
            Ok(rc) => Recursive::Checked {
                seed: mat(&seed),
                symmetrized: candidate(&rc.symmetrized, &fp.gf, &basis)?,
                antisymmetrized: candidate(&rc.antisymmetrized, &fp.gf, &basis)?,
            },
            Err(e) => Recursive::Unavailable { unavailable: e.to_string() },
        },
    };

    let closed_form = match cfg.builtin() {
        Some((model, params)) if params.waveform == model.driven_waveform() => {
            let c = analytic_floquet_coeffs(model, &params)?;
            let m = c.matrix();
            Some(ClosedForm {
                coefficients: c.into(),
                kappa: cx_vec(&c.kappa()),
                symmetry_margin: c.symmetry_margin(),
                relative_distance: fp.gf.distance(&m) / fp.gf.frobenius_norm(),
            })
        }
        _ => None,
    };

    let report = FloquetReport {
        command: "floquet",
        source: SourceInfo::of(cfg)?,
        dimension: schedule.dim(),
        period: schedule.period(),
        tolerances: cfg.tol.into(),
        propagator: mat(&fp.gf),
        kappa: cx_vec(kappa),
        kappa_modulus: kappa.iter().map(|k| k.norm()).collect(),
        modulus_splitting: modulus_splitting(&fp.gf)?,
        pt_phase: fp.phase.as_str(),
        pairing,
        conserved_count: modes.conserved.len(),
        transient_count: modes.transient.len(),
        max_multiplier_mismatch: max_mismatch(&entries),
        eigen_operators: entries,
        recursive,
        closed_form,
    };

    println!(
        "N = {}, T = {}, phase: {}, conserved: {}, transient: {}, max |lambda - predicted| = {:e}",
        report.dimension,
        report.period,
        report.pt_phase,
        report.conserved_count,
        report.transient_count,
        report.max_multiplier_mismatch
    );
    if let Some(c) = &report.closed_form {
        println!("closed-form propagator relative distance: {:e}", c.relative_distance);
    }

    let mut out = OutDir::create(&cfg.out)?;
    if cfg.formats.json {
        out.write_json("floquet.json", &report)?;
    }
    if cfg.formats.csv {
        let mut csv = Csv::new(&[
            "index",
            "kind",
            "re_multiplier",
            "im_multiplier",
            "abs_multiplier",
            "re_predicted",
            "im_predicted",
            "hermitian",
            "rank",
            "residual",
        ]);
        for e in &report.eigen_operators {
            csv.row(&[
                e.index.to_string(),
                e.kind.to_string(),
                f(e.value.0),
                f(e.value.1),
                f(e.value.0.hypot(e.value.1)),
                f(e.predicted.0),
                f(e.predicted.1),
                u8::from(e.hermitian).to_string(),
                e.rank.to_string(),
                f(e.residual),
            ]);
        }
        out.write("floquet.csv", &csv.finish())?;
    }
    if cfg.formats.gnuplot {
        out.write("floquet.gp", MULTIPLIER_GP)?;
    }
    out.announce();
    Ok(())
}

const MULTIPLIER_GP: &str = r#"set datafile separator ","
set key autotitle columnhead
set xlabel "Re lambda"
set ylabel "Im lambda"
set size ratio -1
set grid
set parametric
set trange [0:2*pi]
plot cos(t), sin(t) with lines dt 2 lc rgb "gray" title "|lambda| = 1", \
     "floquet.csv" using 3:4 with points pt 7 ps 1.5 title "multipliers", \
     "floquet.csv" using 6:7 with points pt 6 ps 2.5 title "kappa_p conj(kappa_q)"
pause -1
"#;
