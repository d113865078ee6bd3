use intertwine::floquet::{evolve_trace, floquet_modes, period_propagator, recursive_floquet, Event};
use intertwine::liouvillian::eigen_operators;
use intertwine::numlin::{expectation, vec_norm, ONE};
use intertwine::ComplexMatrix;
use num_complex::Complex64;
use serde::Serialize;

use super::floquet::seed_operator;
use super::SourceInfo;
use crate::config::Config;
use crate::error::CliResult;
use crate::output::{cx_vec, f, mat, Csv, Cx, OutDir};

/// A traced operator and the exponent `L` with reference curve `exp(L t/T)`.
struct Traced {
    label: String,
    op: ComplexMatrix,
    log_multiplier: Complex64,
}

#[derive(Debug, Serialize)]
struct TraceReport {
    command: &'static str,
    source: SourceInfo,
    period: f64,
    psi0: Vec<Cx>,
    steps_per_period: usize,
    periods: usize,
    /// Largest relative gap between dense-time evolution and `G_F^m psi0`.
    drift: f64,
    operators: Vec<TracedReport>,
}

#[derive(Debug, Serialize)]
struct TracedReport {
    label: String,
    multiplier: Cx,
    log_multiplier: Cx,
    normalized: bool,
    initial_expectation: Cx,
    /// Largest stroboscopic `|<psi_m|eta|psi_m> - lambda^m <psi_0|eta|psi_0>|`,
    /// relative to `|eta| |psi_m|^2`.
    stroboscopic_deviation: f64,
    operator: Vec<Vec<Cx>>,
}

fn operators(cfg: &Config) -> CliResult<Vec<Traced>> {
    let schedule = cfg.schedule()?;
    let period = schedule.period();
    if let [Event::Segment { generator, .. }] = schedule.events() {
        let result = eigen_operators(generator, cfg.tol)?;
        let conserved = result.conserved.iter().enumerate().map(|(k, e)| Traced {
            label: format!("conserved{}", k + 1),
            op: e.op.clone(),
            log_multiplier: Complex64::new(0.0, 0.0),
        });
        let offset = result.conserved.len();
        let transient = result.transient.iter().enumerate().map(|(k, e)| Traced {
            label: format!("lambda{}", offset + k + 1),
            op: e.op.clone(),
            log_multiplier: e.rate * period,
        });
        return Ok(conserved.chain(transient).collect());
    }

    let gf = period_propagator(&schedule)?;
    let modes = floquet_modes(&gf, cfg.tol)?;
    let mut traced = Vec::new();
    let named = cfg.builtin().is_some() && modes.conserved.len() == 2;
    let pair = match seed_operator(cfg, &modes) {
        Some(seed) if named => recursive_floquet(&seed, &gf)
            .ok()
            .filter(|rc| rc.antisymmetrized.independent)
            .map(|rc| (seed, rc.antisymmetrized.op)),
        _ => None,
    };
    match pair {
        Some((eta1, eta2)) => {
            for (label, op) in [("eta1", eta1), ("eta2", eta2)] {
                traced.push(Traced { label: label.into(), op, log_multiplier: Complex64::new(0.0, 0.0) });
            }
        }
        None => {
            for (k, e) in modes.conserved.iter().enumerate() {
                traced.push(Traced {
                    label: format!("conserved{}", k + 1),
                    op: e.op.clone(),
                    log_multiplier: Complex64::new(0.0, 0.0),
                });
            }
        }
    }
    let offset = modes.conserved.len();
    for (k, e) in modes.transient.iter().enumerate() {
        traced.push(Traced {
            label: format!("lambda{}", offset + k + 1),
            op: e.op.clone(),
            log_multiplier: e.rate.ln(),
        });
    }
    Ok(traced)
}

pub fn run(cfg: &Config) -> CliResult<()> {
    let schedule = cfg.schedule()?;
    let psi0 = cfg.initial_state(schedule.dim())?;
    let traced = operators(cfg)?;
    let ops: Vec<ComplexMatrix> = traced.iter().map(|t| t.op.clone()).collect();
    let series = evolve_trace(&schedule, &psi0, &ops, cfg.steps_per_period, cfg.periods)?;
    let gf = period_propagator(&schedule)?;
    let mut state_norms = Vec::with_capacity(cfg.periods + 1);
    let mut psi = psi0.clone();
    for _ in 0..=cfg.periods {
        state_norms.push(vec_norm(&psi).powi(2));
        psi = gf.apply(&psi)?;
    }

    let mut reports = Vec::with_capacity(traced.len());
    let mut csv = Csv::new(&[
        "t_over_T",
        "operator_label",
        "re_value",
        "im_value",
        "is_stroboscopic",
        "re_lambda_pow_t",
        "im_lambda_pow_t",
        "normalized",
    ]);
    for (a, t) in traced.iter().enumerate() {
        let normalized = series.normalized[a];
        let e0 = expectation(&t.op, &psi0)?;
        let scale = if normalized { ONE } else { e0 };
        let mut strobe = series.stroboscopic_indices.iter().peekable();
        let mut m = 0;
        let mut deviation: f64 = 0.0;
        for (k, (&time, &value)) in series.times.iter().zip(&series.values[a]).enumerate() {
            let reference = (t.log_multiplier * time).exp() * scale;
            let is_strobe = strobe.next_if_eq(&&k).is_some();
            if is_strobe {
                let denominator = if normalized { e0.norm() } else { 1.0 };
                let err = (value - reference).norm() * denominator;
                deviation = deviation.max(err / (t.op.frobenius_norm() * state_norms[m]));
                m += 1;
            }
            csv.row(&[
                f(time),
                t.label.clone(),
                f(value.re),
                f(value.im),
                u8::from(is_strobe).to_string(),
                f(reference.re),
                f(reference.im),
                u8::from(normalized).to_string(),
            ]);
        }
        reports.push(TracedReport {
            label: t.label.clone(),
            multiplier: t.log_multiplier.exp().into(),
            log_multiplier: t.log_multiplier.into(),
            normalized,
            initial_expectation: e0.into(),
            stroboscopic_deviation: deviation,
            operator: mat(&t.op),
        });
    }

    let report = TraceReport {
        command: "trace",
        source: SourceInfo::of(cfg)?,
        period: schedule.period(),
        psi0: cx_vec(&psi0),
        steps_per_period: cfg.steps_per_period,
        periods: cfg.periods,
        drift: series.drift,
        operators: reports,
    };

    for r in &report.operators {
        println!(
            "{:<12} lambda = {:+.6}{:+.6}i  normalized = {}  stroboscopic deviation = {:e}",
            r.label, r.multiplier.0, r.multiplier.1, r.normalized, r.stroboscopic_deviation
        );
    }
    println!("drift = {:e}", report.drift);

    let mut out = OutDir::create(&cfg.out)?;
    if cfg.formats.csv {
        out.write("trace.csv", &csv.finish())?;
    }
    if cfg.formats.json {
        out.write_json("trace.json", &report)?;
    }
    if cfg.formats.gnuplot {
        let labels: Vec<&str> = report.operators.iter().map(|r| r.label.as_str()).collect();
        out.write("trace.gp", &gnuplot(&labels))?;
    }
    out.announce();
    Ok(())
}

fn gnuplot(labels: &[&str]) -> String {
    let mut s = String::from(
        "set datafile separator \",\"\nset xlabel \"t/T\"\nset grid\nset key top left\n",
    );
    s.push_str(&format!("set multiplot layout {},1\n", labels.len().max(1)));
    for label in labels {
        s.push_str(&format!(
            "set ylabel \"Re <{label}>\"\n\
             plot \"trace.csv\" using 1:(strcol(2) eq \"{label}\" ? $3 : NaN) with lines lw 2 title \"{label}\", \\\n\
             \x20    \"\" using 1:(strcol(2) eq \"{label}\" ? $6 : NaN) with lines dt 3 lc rgb \"black\" title \"lambda^t\", \\\n\
             \x20    \"\" using 1:(strcol(2) eq \"{label}\" && $5 == 1 ? $3 : NaN) with points pt 7 title \"t = mT\"\n"
        ));
    }
    s.push_str("unset multiplot\npause -1\n");
    s
}
