use intertwine::selfcheck::{run_suite, SuiteOptions, SuiteReport};
use serde::Serialize;

use crate::config::Config;
use crate::error::{CliError, CliResult};
use crate::output::{f, Csv, OutDir};

#[derive(Debug, Serialize)]
struct Row<'a> {
    name: &'a str,
    measured: f64,
    bound: f64,
    passed: bool,
    note: &'a str,
}

pub fn table(report: &SuiteReport) -> String {
    let width = report.checks.iter().map(|c| c.name.len()).max().unwrap_or(0);
    let mut s = format!("{:<width$}  {:>10}  {:>10}  result  note\n", "check", "measured", "bound");
    for c in &report.checks {
        s.push_str(&format!(
            "{:<width$}  {:>10.3e}  {:>10.3e}  {:<6}  {}\n",
            c.name,
            c.measured,
            c.bound,
            if c.passed { "PASS" } else { "FAIL" },
            c.note
        ));
    }
    s
}

pub fn run(cfg: &Config) -> CliResult<()> {
    let opts = SuiteOptions { tolerance: cfg.tol_eig_override, ..SuiteOptions::default() };
    let report = run_suite(&opts);
    print!("{}", table(&report));

    if cfg.out_given {
        let rows: Vec<Row> = report
            .checks
            .iter()
            .map(|c| Row { name: c.name, measured: c.measured, bound: c.bound, passed: c.passed, note: &c.note })
            .collect();
        let mut out = OutDir::create(&cfg.out)?;
        if cfg.formats.json {
            out.write_json("verify.json", &rows)?;
        }
        if cfg.formats.csv {
            let mut csv = Csv::new(&["name", "measured", "bound", "passed"]);
            for r in &rows {
                csv.row(&[r.name.to_string(), f(r.measured), f(r.bound), u8::from(r.passed).to_string()]);
            }
            out.write("verify.csv", &csv.finish())?;
        }
        out.announce();
    }

    let failed: Vec<&str> = report.failures().map(|c| c.name).collect();
    if failed.is_empty() {
        println!("all {} checks passed", report.checks.len());
        Ok(())
    } else {
        Err(CliError::Verify(failed.join(", ")))
    }
}
