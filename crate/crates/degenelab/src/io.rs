//! Tabular reports written as CSV or JSON.

use std::fs;
use std::path::{Path, PathBuf};

use degenelab_core::certificates::CertificateReport;
use degenelab_core::experiment::DiracExperimentReport;
use degenelab_core::mesh::{lp_norm, w11_seminorm};
use degenelab_core::{GridFunction, SolveReport};
use serde_json::{Map, Value};

use crate::config::Format;
use crate::error::Error;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(u64),
    Bool(bool),
    Text(String),
}

impl Cell {
    /// CSV text: reals with 17 significant digits.
    pub fn render(&self) -> String {
        match self {
            Cell::Num(x) => format_real(*x),
            Cell::Int(n) => n.to_string(),
            Cell::Bool(b) => b.to_string(),
            Cell::Text(s) => s.clone(),
        }
    }

    fn to_json(&self) -> Value {
        match self {
            Cell::Num(x) => serde_json::Number::from_f64(*x).map_or(Value::Null, Value::Number),
            Cell::Int(n) => Value::from(*n),
            Cell::Bool(b) => Value::Bool(*b),
            Cell::Text(s) => Value::String(s.clone()),
        }
    }
}

pub fn format_real(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else if x.is_nan() {
        "NaN".into()
    } else if x > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

/// A named table; the name becomes the file stem.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: String,
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(name: impl Into<String>, header: &[&'static str]) -> Self {
        Table {
            name: name.into(),
            header: header.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.header.len(), "row width of table {}", self.name);
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> Result<String, Error> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::render))?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }

    /// Array of objects; keys come out sorted.
    pub fn to_json(&self) -> Value {
        Value::Array(
            self.rows
                .iter()
                .map(|row| {
                    let obj: Map<String, Value> = self
                        .header
                        .iter()
                        .zip(row)
                        .map(|(h, c)| (h.to_string(), c.to_json()))
                        .collect();
                    Value::Object(obj)
                })
                .collect(),
        )
    }

    pub fn write(&self, dir: &Path, format: Format) -> Result<PathBuf, Error> {
        fs::create_dir_all(dir)?;
        let (path, text) = match format {
            Format::Csv => (dir.join(format!("{}.csv", self.name)), self.to_csv()?),
            Format::Json => {
                let mut s = serde_json::to_string_pretty(&self.to_json())?;
                s.push('\n');
                (dir.join(format!("{}.json", self.name)), s)
            }
        };
        fs::write(&path, text)?;
        Ok(path)
    }
}

pub fn solution_table(name: &str, u: &GridFunction) -> Table {
    let mut t = Table::new(name, &["r", "value"]);
    for (r, v) in u.mesh().nodes().iter().zip(u.values()) {
        t.push(vec![Cell::Num(*r), Cell::Num(*v)]);
    }
    t
}

pub const SUMMARY_HEADER: [&str; 6] = ["n", "iters", "residual", "linf", "l_gamma2", "w11"];

/// One summary row; `n = 0` marks an untruncated datum.
pub fn summary_row(n: u64, rep: &SolveReport, gamma: f64) -> Vec<Cell> {
    let u = &rep.solution;
    vec![
        Cell::Int(n),
        Cell::Int(rep.iterations as u64),
        Cell::Num(rep.final_residual()),
        Cell::Num(u.max_abs()),
        Cell::Num(lp_norm(u, (gamma + 2.0) / 2.0)),
        Cell::Num(w11_seminorm(u)),
    ]
}

pub fn certificate_table(reports: &[CertificateReport]) -> Table {
    let mut t = Table::new("certificates", &["name", "k", "lhs", "rhs", "slack", "passed"]);
    for r in reports {
        t.push(vec![
            Cell::Text(r.name.clone()),
            Cell::Num(r.k),
            Cell::Num(r.lhs),
            Cell::Num(r.rhs),
            Cell::Num(r.slack),
            Cell::Bool(r.passed),
        ]);
    }
    t
}

pub fn dirac_table(name: &str, report: &DiracExperimentReport) -> Table {
    let mut t = Table::new(
        name,
        &[
            "n",
            "sup_tail",
            "pairing_phi1",
            "pairing_phi2",
            "energy",
            "flux_phi1",
            "flux_phi2",
        ],
    );
    for r in &report.records {
        t.push(vec![
            Cell::Int(r.n),
            Cell::Num(r.sup_tail),
            Cell::Num(r.pairings[0]),
            Cell::Num(r.pairings[1]),
            Cell::Num(report.energy_lhs(r)),
            Cell::Num(r.flux_pairings[0]),
            Cell::Num(r.flux_pairings[1]),
        ]);
    }
    t
}
