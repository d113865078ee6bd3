use intertwine::floquet::alignment;
use intertwine::liouvillian::{classify_pt_phase, eigen_operators, predicted_rates, DEFAULT_PHASE_TOL};
use intertwine::models::analytic_eta_pm;
use num_complex::Complex64;
use serde::Serialize;

use super::{max_mismatch, operator_entries, OperatorEntry, SourceInfo, TolInfo};
use crate::config::Config;
use crate::error::CliResult;
use crate::output::{cx_vec, f, mat, Csv, Cx, OutDir};

#[derive(Debug, Serialize)]
struct StaticReport {
    command: &'static str,
    source: SourceInfo,
    dimension: usize,
    tolerances: TolInfo,
    hamiltonian: Vec<Vec<Cx>>,
    hamiltonian_spectrum: Vec<Cx>,
    pt_phase: &'static str,
    conserved_count: usize,
    transient_count: usize,
    max_rate_mismatch: f64,
    eigen_operators: Vec<OperatorEntry>,
    #[serde(skip_serializing_if = "Option::is_none")]
    closed_form: Option<ClosedForm>,
}

#[derive(Debug, Serialize)]
#[serde(untagged)]
enum ClosedForm {
    Pair {
        rate_plus: Cx,
        rate_minus: Cx,
        alignment_plus: f64,
        alignment_minus: f64,
    },
    Unavailable {
        unavailable: String,
    },
}

pub fn run(cfg: &Config) -> CliResult<()> {
    let h = cfg.static_hamiltonian()?;
    let result = eigen_operators(&h, cfg.tol)?;
    let predicted = predicted_rates(&h, cfg.tol.eig)?;
    let phase = classify_pt_phase(&h, DEFAULT_PHASE_TOL)?;
    let entries = operator_entries(&result.conserved, &result.transient, &predicted, cfg.tol.rank)?;

    let closed_form = cfg.builtin().map(|(model, params)| match analytic_eta_pm(model, &params) {
        Ok(pm) => {
            let best = |rate: Complex64, op| {
                result
                    .transient
                    .iter()
                    .min_by(|a, b| (a.rate - rate).norm().total_cmp(&(b.rate - rate).norm()))
                    .map_or(Ok(0.0), |e| alignment(&e.op, op))
            };
            match (best(pm.rate_plus, &pm.plus), best(pm.rate_minus, &pm.minus)) {
                (Ok(a), Ok(b)) => ClosedForm::Pair {
                    rate_plus: pm.rate_plus.into(),
                    rate_minus: pm.rate_minus.into(),
                    alignment_plus: a,
                    alignment_minus: b,
                },
                (Err(e), _) | (_, Err(e)) => ClosedForm::Unavailable { unavailable: e.to_string() },
            }
        }
        Err(e) => ClosedForm::Unavailable { unavailable: e.to_string() },
    });

    let report = StaticReport {
        command: "static",
        source: SourceInfo::of(cfg)?,
        dimension: h.rows(),
        tolerances: cfg.tol.into(),
        hamiltonian: mat(&h),
        hamiltonian_spectrum: cx_vec(&result.hamiltonian_spectrum.eigenvalues),
        pt_phase: phase.as_str(),
        conserved_count: result.conserved.len(),
        transient_count: result.transient.len(),
        max_rate_mismatch: max_mismatch(&entries),
        eigen_operators: entries,
        closed_form,
    };

    println!(
        "N = {}, PT phase: {}, conserved: {}, transient: {}, max |rate - predicted| = {:e}",
        report.dimension, report.pt_phase, report.conserved_count, report.transient_count, report.max_rate_mismatch
    );

    let mut out = OutDir::create(&cfg.out)?;
    if cfg.formats.json {
        out.write_json("static.json", &report)?;
    }
    if cfg.formats.csv {
        let mut csv = Csv::new(&[
            "index", "kind", "re_rate", "im_rate", "re_predicted", "im_predicted", "hermitian", "rank", "residual",
        ]);
        for e in &report.eigen_operators {
            csv.row(&[
                e.index.to_string(),
                e.kind.to_string(),
                f(e.value.0),
                f(e.value.1),
                f(e.predicted.0),
                f(e.predicted.1),
                u8::from(e.hermitian).to_string(),
                e.rank.to_string(),
                f(e.residual),
            ]);
        }
        out.write("static.csv", &csv.finish())?;
    }
    if cfg.formats.gnuplot {
        out.write("static.gp", SPECTRUM_GP)?;
    }
    out.announce();
    Ok(())
}

const SPECTRUM_GP: &str = r#"set datafile separator ","
set key autotitle columnhead
set xlabel "Re rate"
set ylabel "Im rate"
set grid
plot "static.csv" using 3:4 with points pt 7 ps 1.5 title "Liouvillian", \
     "static.csv" using 5:6 with points pt 6 ps 2.5 title "-i(e_p - conj(e_q))"
pause -1
"#;
