use std::path::{Path, PathBuf};

use intertwine::floquet::{Event, Schedule};
use intertwine::models::{dimer_schedule, hamiltonian, plus_x, DimerParams, Grid, Model, Waveform};
use intertwine::{ComplexMatrix, Tolerances};
use num_complex::Complex64;
use serde::Deserialize;

use crate::args::{Command, Options};
use crate::error::{CliError, CliResult};

pub const DEFAULT_OUT: &str = "intertwine-out";
pub const DEFAULT_GRID: &str = "0:2:41,0.1:4:40";
pub const DEFAULT_PERIODS: usize = 50;

#[derive(Debug, Clone)]
pub enum Source {
    Builtin { model: Model, params: DimerParams },
    Hamiltonian { h: ComplexMatrix, period: Option<f64>, path: PathBuf },
    Schedule { schedule: Schedule, path: PathBuf },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Formats {
    pub csv: bool,
    pub json: bool,
    pub gnuplot: bool,
}

#[derive(Debug, Clone)]
pub struct Config {
    pub command: Command,
    pub source: Option<Source>,
    pub tol: Tolerances,
    pub tol_eig_override: Option<f64>,
    pub psi0: Option<Vec<Complex64>>,
    pub steps_per_period: usize,
    pub periods: usize,
    pub grid: Grid,
    pub out: PathBuf,
    pub out_given: bool,
    pub formats: Formats,
}

impl Config {
    pub fn from_options(command: Command, o: &Options) -> CliResult<Self> {
        let tol = Tolerances {
            eig: positive("tol-eig", o.tol_eig)?.unwrap_or(Tolerances::default().eig),
            rank: positive("tol-rank", o.tol_rank)?.unwrap_or(Tolerances::default().rank),
        };
        let steps_per_period = match o.steps_per_period {
            Some(0) => return Err(CliError::config("--steps-per-period must be at least 1")),
            Some(n) => n,
            None => intertwine::floquet::DEFAULT_STEPS_PER_PERIOD,
        };
        let periods = match o.periods {
            Some(0) => return Err(CliError::config("--periods must be at least 1")),
            Some(n) => n,
            None => DEFAULT_PERIODS,
        };
        let grid = parse_grid(o.grid.as_deref().unwrap_or(DEFAULT_GRID))?;
        let formats = parse_formats(o.format.as_deref().unwrap_or("csv,json"))?;
        let mut psi0 = o.psi0.as_deref().map(parse_psi0).transpose()?;

        let source = match (&o.model, &o.input) {
            (Some(_), Some(_)) => return Err(CliError::config("--model and --input are mutually exclusive")),
            (Some(name), None) => Some(builtin(command, name, o)?),
            (None, Some(path)) => {
                let (source, file_psi0) = read_input(path, o)?;
                if psi0.is_none() {
                    psi0 = file_psi0;
                }
                Some(source)
            }
            (None, None) if command == Command::Verify => None,
            (None, None) => return Err(CliError::config("one of --model or --input is required")),
        };
        if command == Command::Scan && !matches!(source, Some(Source::Builtin { .. })) {
            return Err(CliError::config("scan needs a built-in --model"));
        }

        Ok(Self {
            command,
            source,
            tol,
            tol_eig_override: o.tol_eig,
            psi0,
            steps_per_period,
            periods,
            grid,
            out: o.out.clone().unwrap_or_else(|| PathBuf::from(DEFAULT_OUT)),
            out_given: o.out.is_some(),
            formats,
        })
    }

    pub fn source(&self) -> CliResult<&Source> {
        self.source.as_ref().ok_or_else(|| CliError::config("no input source"))
    }

    pub fn builtin(&self) -> Option<(Model, DimerParams)> {
        match self.source {
            Some(Source::Builtin { model, params }) => Some((model, params)),
            _ => None,
        }
    }

    /// The time-independent Hamiltonian for static analysis.
    pub fn static_hamiltonian(&self) -> CliResult<ComplexMatrix> {
        match self.source()? {
            Source::Builtin { model, params } => {
                if params.waveform != Waveform::Static {
                    return Err(CliError::config(format!(
                        "static analysis needs --waveform static, got {}",
                        params.waveform
                    )));
                }
                Ok(hamiltonian(*model, params))
            }
            Source::Hamiltonian { h, .. } => Ok(h.clone()),
            Source::Schedule { schedule, path } => match schedule.events() {
                [Event::Segment { generator, .. }] => Ok(generator.clone()),
                _ => Err(CliError::config(format!(
                    "{}: static analysis needs a single-segment schedule or a hamiltonian",
                    path.display()
                ))),
            },
        }
    }

    pub fn schedule(&self) -> CliResult<Schedule> {
        match self.source()? {
            Source::Builtin { model, params } => dimer_schedule(*model, params).map_err(config_err),
            Source::Hamiltonian { h, period, path } => {
                let period = period.ok_or_else(|| {
                    CliError::config(format!(
                        "{}: missing field `period` (T), required for {} mode; add it to the file or pass --JT",
                        path.display(),
                        self.command.name()
                    ))
                })?;
                Schedule::constant(h.clone(), period).map_err(config_err)
            }
            Source::Schedule { schedule, .. } => Ok(schedule.clone()),
        }
    }

    /// The initial state, defaulting to |+x> for two-level systems.
    pub fn initial_state(&self, dim: usize) -> CliResult<Vec<Complex64>> {
        match &self.psi0 {
            Some(v) if v.len() == dim => Ok(v.clone()),
            Some(v) => Err(CliError::config(format!("psi0 has {} components but N = {dim}", v.len()))),
            None if dim == 2 => Ok(plus_x()),
            None => Err(CliError::config(format!("psi0 is required for N = {dim}"))),
        }
    }
}

fn config_err(e: intertwine::Error) -> CliError {
    CliError::Config(e.to_string())
}

fn positive(name: &str, v: Option<f64>) -> CliResult<Option<f64>> {
    match v {
        Some(x) if !(x > 0.0 && x.is_finite()) => Err(CliError::config(format!("--{name} must be positive, got {x}"))),
        other => Ok(other),
    }
}

fn builtin(command: Command, name: &str, o: &Options) -> CliResult<Source> {
    let model: Model = name.parse().map_err(config_err)?;
    let waveform = match o.waveform.as_deref() {
        Some(w) => w.parse().map_err(config_err)?,
        None if command == Command::Static => Waveform::Static,
        None => model.driven_waveform(),
    };
    if !model.supports(waveform) {
        return Err(CliError::config(format!("{model} does not support the {waveform} waveform")));
    }
    let j = o.j.unwrap_or(1.0);
    let gamma = o.gamma.unwrap_or(0.5 * j);
    let jt = o.jt.unwrap_or(1.0);
    let params = DimerParams::new(j, gamma, jt / j, waveform).map_err(config_err)?;
    Ok(Source::Builtin { model, params })
}

type RawComplex = [f64; 2];
type RawMatrix = Vec<Vec<RawComplex>>;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct InputFile {
    hamiltonian: Option<RawMatrix>,
    period: Option<f64>,
    schedule: Option<RawSchedule>,
    psi0: Option<Vec<RawComplex>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSchedule {
    period: f64,
    events: Vec<RawEvent>,
}

#[derive(Debug, Deserialize)]
#[serde(rename_all = "lowercase", deny_unknown_fields)]
enum RawEvent {
    Segment { duration: f64, h: RawMatrix },
    Kick { k: RawMatrix },
}

fn to_complex(c: &RawComplex) -> Complex64 {
    Complex64::new(c[0], c[1])
}

fn to_matrix(raw: &RawMatrix, field: &str, path: &Path) -> CliResult<ComplexMatrix> {
    let rows: Vec<Vec<Complex64>> = raw.iter().map(|r| r.iter().map(to_complex).collect()).collect();
    let m = ComplexMatrix::from_rows(&rows)
        .map_err(|e| CliError::config(format!("{}: field `{field}`: {e}", path.display())))?;
    if !m.is_square() || m.rows() == 0 {
        return Err(CliError::config(format!(
            "{}: field `{field}` must be a non-empty square matrix, got {}x{}",
            path.display(),
            m.rows(),
            m.cols()
        )));
    }
    if !m.is_finite() {
        return Err(CliError::config(format!("{}: field `{field}` has non-finite entries", path.display())));
    }
    Ok(m)
}

fn read_input(path: &Path, o: &Options) -> CliResult<(Source, Option<Vec<Complex64>>)> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::config(format!("cannot read {}: {e}", path.display())))?;
    let file: InputFile = serde_json::from_str(&text)
        .map_err(|e| CliError::config(format!("{}: {e}", path.display())))?;
    let psi0 = file.psi0.as_ref().map(|v| v.iter().map(to_complex).collect());
    let source = match (file.hamiltonian, file.schedule) {
        (Some(_), Some(_)) => {
            return Err(CliError::config(format!(
                "{}: give either `hamiltonian` or `schedule`, not both",
                path.display()
            )))
        }
        (None, None) => {
            return Err(CliError::config(format!(
                "{}: missing field `hamiltonian` or `schedule`",
                path.display()
            )))
        }
        (Some(raw), None) => {
            let h = to_matrix(&raw, "hamiltonian", path)?;
            let period = match (file.period, o.jt) {
                (Some(t), _) => Some(t),
                (None, Some(jt)) => Some(jt / o.j.unwrap_or(1.0)),
                (None, None) => None,
            };
            if let Some(t) = period {
                if !(t > 0.0 && t.is_finite()) {
                    return Err(CliError::config(format!("{}: period must be positive, got {t}", path.display())));
                }
            }
            Source::Hamiltonian { h, period, path: path.to_path_buf() }
        }
        (None, Some(raw)) => {
            if file.period.is_some() {
                return Err(CliError::config(format!(
                    "{}: top-level `period` conflicts with `schedule.period`",
                    path.display()
                )));
            }
            let events = raw
                .events
                .iter()
                .enumerate()
                .map(|(k, e)| match e {
                    RawEvent::Segment { duration, h } => {
                        Ok(Event::segment(*duration, to_matrix(h, &format!("schedule.events[{k}].segment.h"), path)?))
                    }
                    RawEvent::Kick { k: m } => Ok(Event::kick(to_matrix(m, &format!("schedule.events[{k}].kick.k"), path)?)),
                })
                .collect::<CliResult<Vec<_>>>()?;
            let schedule = Schedule::new(raw.period, events)
                .map_err(|e| CliError::config(format!("{}: {e}", path.display())))?;
            Source::Schedule { schedule, path: path.to_path_buf() }
        }
    };
    Ok((source, psi0))
}

pub fn parse_psi0(s: &str) -> CliResult<Vec<Complex64>> {
    let bad = || CliError::config(format!("--psi0 expects \"re,im;re,im;...\", got \"{s}\""));
    let v = s
        .split(';')
        .map(|pair| {
            let (re, im) = pair.split_once(',').ok_or_else(bad)?;
            let re: f64 = re.trim().parse().map_err(|_| bad())?;
            let im: f64 = im.trim().parse().map_err(|_| bad())?;
            if !(re.is_finite() && im.is_finite()) {
                return Err(bad());
            }
            Ok(Complex64::new(re, im))
        })
        .collect::<CliResult<Vec<_>>>()?;
    if v.iter().all(|z| *z == Complex64::new(0.0, 0.0)) {
        return Err(CliError::config("--psi0 must be nonzero"));
    }
    Ok(v)
}

pub fn parse_grid(s: &str) -> CliResult<Grid> {
    let bad = || CliError::config(format!("--grid expects \"gmin:gmax:n,tmin:tmax:n\", got \"{s}\""));
    let axis = |part: &str| -> CliResult<(f64, f64, usize)> {
        let fields: Vec<&str> = part.split(':').collect();
        let [lo, hi, n] = fields.as_slice() else {
            return Err(bad());
        };
        Ok((
            lo.trim().parse().map_err(|_| bad())?,
            hi.trim().parse().map_err(|_| bad())?,
            n.trim().parse().map_err(|_| bad())?,
        ))
    };
    let (g, t) = s.split_once(',').ok_or_else(bad)?;
    Grid::new(axis(g)?, axis(t)?).map_err(config_err)
}

pub fn parse_formats(s: &str) -> CliResult<Formats> {
    let mut f = Formats { csv: false, json: false, gnuplot: false };
    for item in s.split(',').map(str::trim).filter(|x| !x.is_empty()) {
        match item {
            "csv" => f.csv = true,
            "json" => f.json = true,
            "gnuplot" => f.gnuplot = true,
            other => return Err(CliError::config(format!("unknown format '{other}' (expected csv, json, gnuplot)"))),
        }
    }
    if !(f.csv || f.json || f.gnuplot) {
        return Err(CliError::config("--format needs at least one of csv, json, gnuplot"));
    }
    Ok(f)
}
