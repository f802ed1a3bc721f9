//! Exact-number rendering and file emission.

use std::path::{Path, PathBuf};

use num_bigint::BigInt;
use serde::Serialize;
use sublab::scalar::{format_decimal, format_rational};
use sublab::{OrderedPoint, Scalar, Q};

use crate::error::CliResult;

pub const SCHEMA_VERSION: u32 = 1;
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// An exactly known number: canonical `"p/q"` plus a decimal rendering.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ExactNum {
    pub exact: String,
    pub decimal: String,
}

impl ExactNum {
    pub fn new(r: &Q, digits: usize) -> Self {
        ExactNum { exact: format_rational(r), decimal: format_decimal(r, digits) }
    }

    pub fn from_int(n: u64, digits: usize) -> Self {
        Self::new(&Q::from_integer(BigInt::from(n)), digits)
    }
}

pub fn exact_point<T: Scalar>(x: &OrderedPoint<T>, digits: usize) -> Vec<ExactNum> {
    x.coords().iter().map(|c| ExactNum::new(&c.to_rational(), digits)).collect()
}

/// Points stored as integer numerators over a common `scale`.
pub fn exact_scaled(x: &OrderedPoint<i128>, scale: &Q, digits: usize) -> Vec<ExactNum> {
    x.coords()
        .iter()
        .map(|c| ExactNum::new(&(Q::from_integer(BigInt::from(*c)) / scale), digits))
        .collect()
}

/// The JSON envelope written by every command.
#[derive(Serialize)]
pub struct Envelope<'a, C: Serialize, R: Serialize> {
    pub schema_version: u32,
    pub tool_version: &'static str,
    pub command: &'a str,
    pub config: &'a C,
    pub result: R,
}

pub struct Emitter {
    dir: PathBuf,
    written: Vec<PathBuf>,
}

impl Emitter {
    pub fn new(dir: &Path) -> CliResult<Self> {
        std::fs::create_dir_all(dir)?;
        Ok(Emitter { dir: dir.to_path_buf(), written: Vec::new() })
    }

    pub fn json<C: Serialize, R: Serialize>(
        &mut self,
        name: &str,
        command: &str,
        config: &C,
        result: R,
    ) -> CliResult<PathBuf> {
        let env = Envelope { schema_version: SCHEMA_VERSION, tool_version: TOOL_VERSION, command, config, result };
        let mut text = serde_json::to_string_pretty(&env)?;
        text.push('\n');
        self.text(name, &text)
    }

    pub fn csv(&mut self, name: &str, header: &[&str], rows: &[Vec<String>]) -> CliResult<PathBuf> {
        let path = self.dir.join(name);
        let mut w = csv::Writer::from_path(&path)?;
        w.write_record(header)?;
        for r in rows {
            w.write_record(r)?;
        }
        w.flush()?;
        self.written.push(path.clone());
        Ok(path)
    }

    pub fn text(&mut self, name: &str, body: &str) -> CliResult<PathBuf> {
        let path = self.dir.join(name);
        std::fs::write(&path, body)?;
        self.written.push(path.clone());
        Ok(path)
    }

    pub fn written(&self) -> &[PathBuf] {
        &self.written
    }
}

pub fn histogram_rows(h: &std::collections::BTreeMap<u64, u64>) -> Vec<Vec<String>> {
    h.iter().map(|(k, c)| vec![k.to_string(), c.to_string()]).collect()
}
