use intertwine::floquet::{propagator_with, DEFAULT_MODULUS_TOL};
use intertwine::models::{
    bisect_numeric, classical_contour_closed_form, dimer_schedule, ep_contour, symmetry_margin, DimerParams, Model,
    Waveform,
};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::Config;
use crate::error::{CliError, CliResult};
use crate::output::{f, Csv, OutDir};

pub const THREADS_ENV: &str = "INTERTWINE_THREADS";

#[derive(Debug, Clone, Serialize)]
struct Point {
    gamma_over_j: f64,
    jt: f64,
    phase: String,
    /// `max|kappa| / min|kappa|`.
    kappa_ratio: f64,
    analytic_margin: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
}

#[derive(Debug, Serialize)]
struct ContourRow {
    jt: f64,
    gamma_over_j: f64,
    gamma_t: f64,
    confirmed: bool,
    /// Root of the numerical |kappa| dichotomy in the same bracket.
    numeric_gamma_over_j: Option<f64>,
    /// Closed-form `gamma T` where one exists.
    closed_form_gamma_t: Option<f64>,
}

#[derive(Debug, Serialize)]
struct Agreement {
    points: usize,
    confirmed: usize,
    numeric_found: usize,
    max_numeric_deviation: f64,
    closed_form_points: usize,
    max_closed_form_deviation: f64,
}

#[derive(Debug, Serialize)]
struct ScanReport {
    command: &'static str,
    model: &'static str,
    waveform: &'static str,
    grid: GridInfo,
    counts: Counts,
    contour: Vec<ContourRow>,
    agreement: Agreement,
    points: Vec<Point>,
}

#[derive(Debug, Serialize)]
struct GridInfo {
    gamma_over_j: (f64, f64, usize),
    jt: (f64, f64, usize),
}

#[derive(Debug, Default, Serialize)]
struct Counts {
    symmetric: usize,
    broken: usize,
    exceptional_point: usize,
    error: usize,
}

fn thread_pool() -> CliResult<rayon::ThreadPool> {
    let threads = match std::env::var(THREADS_ENV) {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n >= 1 => n,
            _ => return Err(CliError::config(format!("{THREADS_ENV} must be a positive integer, got '{v}'"))),
        },
        Err(_) => 0,
    };
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| CliError::config(format!("cannot start thread pool: {e}")))
}

fn evaluate(model: Model, waveform: Waveform, g: f64, jt: f64, cfg: &Config) -> Point {
    let result = (|| -> intertwine::Result<(String, f64, f64)> {
        let p = DimerParams::new(1.0, g, jt, waveform)?;
        let fp = propagator_with(&dimer_schedule(model, &p)?, cfg.tol.eig, DEFAULT_MODULUS_TOL)?;
        let moduli: Vec<f64> = fp.kappa.eigenvalues.iter().map(|k| k.norm()).collect();
        let max = moduli.iter().copied().fold(0.0, f64::max);
        let min = moduli.iter().copied().fold(f64::INFINITY, f64::min);
        Ok((fp.phase.as_str().to_string(), max / min, symmetry_margin(model, &p)?))
    })();
    match result {
        Ok((phase, kappa_ratio, analytic_margin)) => {
            Point { gamma_over_j: g, jt, phase, kappa_ratio, analytic_margin, error: None }
        }
        Err(e) => {
            log::warn!("scan point gamma/J = {g}, JT = {jt}: {e}");
            Point {
                gamma_over_j: g,
                jt,
                phase: "error".into(),
                kappa_ratio: f64::NAN,
                analytic_margin: f64::NAN,
                error: Some(e.to_string()),
            }
        }
    }
}

fn closed_form_gamma_t(model: Model, waveform: Waveform, jt: f64) -> Option<f64> {
    match (model, waveform) {
        (_, Waveform::Static) => Some(jt),
        (Model::Classical, Waveform::DeltaKicks) => classical_contour_closed_form(jt),
        _ => None,
    }
}

pub fn run(cfg: &Config) -> CliResult<()> {
    let (model, params) = cfg.builtin().ok_or_else(|| CliError::config("scan needs a built-in --model"))?;
    let waveform = params.waveform;
    let grid = cfg.grid;
    let gammas = grid.gamma_values();
    let jts = grid.jt_values();
    let cells: Vec<(f64, f64)> = jts.iter().flat_map(|&t| gammas.iter().map(move |&g| (g, t))).collect();

    let pool = thread_pool()?;
    let points: Vec<Point> =
        pool.install(|| cells.par_iter().map(|&(g, t)| evaluate(model, waveform, g, t, cfg)).collect());

    let mut counts = Counts::default();
    for p in &points {
        match p.phase.as_str() {
            "symmetric" => counts.symmetric += 1,
            "broken" => counts.broken += 1,
            "exceptional-point" => counts.exceptional_point += 1,
            _ => counts.error += 1,
        }
    }

    let step = (grid.gamma.1 - grid.gamma.0) / (grid.gamma.2 - 1) as f64;
    let raw = ep_contour(model, waveform, &grid)?;
    let contour: Vec<ContourRow> = pool.install(|| {
        raw.par_iter()
            .map(|c| {
                let (lo, hi) = ((c.gamma_over_j - step).max(0.0), c.gamma_over_j + step);
                ContourRow {
                    jt: c.jt,
                    gamma_over_j: c.gamma_over_j,
                    gamma_t: c.gamma_over_j * c.jt,
                    confirmed: c.confirmed,
                    numeric_gamma_over_j: bisect_numeric(model, waveform, c.jt, lo, hi, 1e-13).ok(),
                    closed_form_gamma_t: closed_form_gamma_t(model, waveform, c.jt),
                }
            })
            .collect()
    });

    let numeric: Vec<f64> = contour
        .iter()
        .filter_map(|c| c.numeric_gamma_over_j.map(|n| (n - c.gamma_over_j).abs()))
        .collect();
    let closed: Vec<f64> = contour
        .iter()
        .filter_map(|c| c.closed_form_gamma_t.map(|x| (x - c.gamma_t).abs()))
        .collect();
    let agreement = Agreement {
        points: contour.len(),
        confirmed: contour.iter().filter(|c| c.confirmed).count(),
        numeric_found: numeric.len(),
        max_numeric_deviation: numeric.iter().copied().fold(0.0, f64::max),
        closed_form_points: closed.len(),
        max_closed_form_deviation: closed.iter().copied().fold(0.0, f64::max),
    };

    println!(
        "{} points: {} symmetric, {} broken, {} exceptional, {} failed",
        points.len(),
        counts.symmetric,
        counts.broken,
        counts.exceptional_point,
        counts.error
    );
    println!(
        "contour: {} points, {} confirmed numerically, max |analytic - numeric| = {:e}, max |gamma T - closed form| = {:e} over {} points",
        agreement.points,
        agreement.confirmed,
        agreement.max_numeric_deviation,
        agreement.max_closed_form_deviation,
        agreement.closed_form_points
    );

    let report = ScanReport {
        command: "scan",
        model: model.name(),
        waveform: waveform.as_str(),
        grid: GridInfo { gamma_over_j: grid.gamma, jt: grid.jt },
        counts,
        contour,
        agreement,
        points,
    };

    let mut out = OutDir::create(&cfg.out)?;
    if cfg.formats.csv {
        let mut csv = Csv::new(&["gamma_over_j", "jt", "phase", "kappa_ratio", "analytic_margin"]);
        for p in &report.points {
            csv.row(&[f(p.gamma_over_j), f(p.jt), p.phase.clone(), f(p.kappa_ratio), f(p.analytic_margin)]);
        }
        out.write("scan.csv", &csv.finish())?;
        let opt = |x: Option<f64>| x.map(f).unwrap_or_default();
        let mut csv = Csv::new(&[
            "jt",
            "gamma_over_j",
            "gamma_t",
            "confirmed",
            "numeric_gamma_over_j",
            "closed_form_gamma_t",
        ]);
        for c in &report.contour {
            csv.row(&[
                f(c.jt),
                f(c.gamma_over_j),
                f(c.gamma_t),
                u8::from(c.confirmed).to_string(),
                opt(c.numeric_gamma_over_j),
                opt(c.closed_form_gamma_t),
            ]);
        }
        out.write("contour.csv", &csv.finish())?;
    }
    if cfg.formats.json {
        out.write_json("scan.json", &report)?;
    }
    if cfg.formats.gnuplot {
        out.write("scan.gp", SCAN_GP)?;
    }
    out.announce();
    Ok(())
}

const SCAN_GP: &str = r##"set datafile separator ","
set xlabel "JT"
set ylabel "gamma/J"
set key outside
plot "scan.csv" using 2:(strcol(3) eq "symmetric" ? $1 : NaN) with points pt 5 ps 0.6 lc rgb "#4070c0" title "symmetric", \
     "" using 2:(strcol(3) eq "broken" ? $1 : NaN) with points pt 5 ps 0.6 lc rgb "#c04040" title "broken", \
     "" using 2:(strcol(3) eq "exceptional-point" ? $1 : NaN) with points pt 7 lc rgb "black" title "exceptional point", \
     "contour.csv" using 1:2 with points pt 6 ps 1.2 lc rgb "black" title "contour"
pause -1
"##;
