use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use intertwine::ComplexMatrix;
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{CliError, CliResult};

/// A complex number serialized as `[re, im]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Cx(pub f64, pub f64);

impl From<Complex64> for Cx {
    fn from(z: Complex64) -> Self {
        Cx(z.re, z.im)
    }
}

pub fn cx_vec(v: &[Complex64]) -> Vec<Cx> {
    v.iter().copied().map(Cx::from).collect()
}

/// Row-major nested `[re, im]` arrays.
pub fn mat(m: &ComplexMatrix) -> Vec<Vec<Cx>> {
    m.row_vecs().iter().map(|r| cx_vec(r)).collect()
}

pub fn f(x: f64) -> String {
    format!("{x:.16e}")
}

/// Comma-joined CSV builder with a fixed header.
pub struct Csv {
    text: String,
}

impl Csv {
    pub fn new(header: &[&str]) -> Self {
        let mut text = header.join(",");
        text.push('\n');
        Self { text }
    }

    pub fn row(&mut self, cells: &[String]) {
        let _ = writeln!(self.text, "{}", cells.join(","));
    }

    pub fn finish(self) -> String {
        self.text
    }
}

/// Writes output files under one directory and remembers what it wrote.
pub struct OutDir {
    dir: PathBuf,
    written: Vec<PathBuf>,
}

impl OutDir {
    pub fn create(dir: &Path) -> CliResult<Self> {
        std::fs::create_dir_all(dir).map_err(|source| CliError::Io { path: dir.to_path_buf(), source })?;
        Ok(Self { dir: dir.to_path_buf(), written: Vec::new() })
    }

    pub fn write(&mut self, name: &str, contents: &str) -> CliResult<()> {
        let path = self.dir.join(name);
        std::fs::write(&path, contents).map_err(|source| CliError::Io { path: path.clone(), source })?;
        self.written.push(path);
        Ok(())
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> CliResult<()> {
        let mut text = serde_json::to_string_pretty(value).expect("report types serialize");
        text.push('\n');
        self.write(name, &text)
    }

    pub fn announce(&self) {
        for p in &self.written {
            println!("wrote {}", p.display());
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_format_round_trips() {
        for x in [0.1, -1.0 / 3.0, 1e-300, 6.02e23] {
            assert_eq!(f(x).parse::<f64>().unwrap(), x);
        }
    }

    #[test]
    fn complex_serializes_as_pair() {
        let s = serde_json::to_string(&Cx(1.5, -2.0)).unwrap();
        assert_eq!(s, "[1.5,-2.0]");
    }
}
