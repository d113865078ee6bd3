pub mod floquet;
pub mod scan;
pub mod static_run;
pub mod trace;
pub mod verify;

use intertwine::liouvillian::EigenOperator;
use intertwine::numlin::{min_cost_assignment, rank};
use intertwine::{ComplexMatrix, Tolerances};
use num_complex::Complex64;
use serde::Serialize;

use crate::config::{Config, Source};
use crate::error::CliResult;
use crate::output::{mat, Cx};

#[derive(Debug, Serialize)]
#[serde(untagged)]
pub enum SourceInfo {
    Builtin {
        model: &'static str,
        waveform: &'static str,
        #[serde(rename = "J")]
        j: f64,
        gamma: f64,
        #[serde(rename = "T")]
        period: f64,
        #[serde(rename = "JT")]
        jt: f64,
    },
    File {
        input: String,
        kind: &'static str,
    },
}

impl SourceInfo {
    pub fn of(cfg: &Config) -> CliResult<Self> {
        Ok(match cfg.source()? {
            Source::Builtin { model, params } => SourceInfo::Builtin {
                model: model.name(),
                waveform: params.waveform.as_str(),
                j: params.j,
                gamma: params.gamma,
                period: params.period,
                jt: params.j * params.period,
            },
            Source::Hamiltonian { path, .. } => SourceInfo::File {
                input: path.display().to_string(),
                kind: "hamiltonian",
            },
            Source::Schedule { path, .. } => SourceInfo::File {
                input: path.display().to_string(),
                kind: "schedule",
            },
        })
    }
}

#[derive(Debug, Serialize)]
pub struct TolInfo {
    pub eig: f64,
    pub rank: f64,
}

impl From<Tolerances> for TolInfo {
    fn from(t: Tolerances) -> Self {
        TolInfo { eig: t.eig, rank: t.rank }
    }
}

#[derive(Debug, Serialize)]
pub struct OperatorEntry {
    pub index: usize,
    pub kind: &'static str,
    pub value: Cx,
    pub predicted: Cx,
    pub hermitian: bool,
    pub rank: usize,
    pub residual: f64,
    pub operator: Vec<Vec<Cx>>,
}

/// `predicted` reordered to best match `computed` (total distance minimized).
pub fn match_to(computed: &[Complex64], predicted: &[Complex64]) -> CliResult<Vec<Complex64>> {
    let n = computed.len();
    let cost: Vec<f64> = computed
        .iter()
        .flat_map(|x| predicted.iter().map(move |y| (x - y).norm()))
        .collect();
    let assignment = min_cost_assignment(&cost, n)?;
    Ok(assignment.iter().map(|&j| predicted[j]).collect())
}

/// Conserved operators first, then transient, each with its matched prediction.
pub fn operator_entries(
    conserved: &[EigenOperator],
    transient: &[EigenOperator],
    predicted: &[Complex64],
    tol_rank: f64,
) -> CliResult<Vec<OperatorEntry>> {
    let all: Vec<(&'static str, &EigenOperator)> = conserved
        .iter()
        .map(|e| ("conserved", e))
        .chain(transient.iter().map(|e| ("transient", e)))
        .collect();
    let values: Vec<Complex64> = all.iter().map(|(_, e)| e.rate).collect();
    let matched = match_to(&values, predicted)?;
    all.iter()
        .zip(matched)
        .enumerate()
        .map(|(index, ((kind, e), p))| {
            Ok(OperatorEntry {
                index: index + 1,
                kind,
                value: e.rate.into(),
                predicted: p.into(),
                hermitian: e.hermitian,
                rank: rank(&e.op, tol_rank)?,
                residual: e.residual,
                operator: mat(&e.op),
            })
        })
        .collect()
}

pub fn max_mismatch(entries: &[OperatorEntry]) -> f64 {
    entries
        .iter()
        .map(|e| (Complex64::new(e.value.0, e.value.1) - Complex64::new(e.predicted.0, e.predicted.1)).norm())
        .fold(0.0, f64::max)
}

/// Relative distance of `op` from the span of the orthonormal `basis`.
pub fn span_residual(op: &ComplexMatrix, basis: &[&ComplexMatrix]) -> CliResult<f64> {
    let norm = op.frobenius_norm();
    if norm == 0.0 {
        return Ok(0.0);
    }
    let mut rest = op.clone();
    for b in basis {
        let c = b.hs_inner(op)?;
        rest = &rest - &b.scale(c);
    }
    Ok(rest.frobenius_norm() / norm)
}
