//! Deterministic JSON and CSV renderings. Rationals are always `num/den`.

use std::fmt::Write as _;
use std::str::FromStr;

use serde_json::{json, Value};

use crate::domain::{enumerate_cosets, Params};
use crate::error::Error;
use crate::interval::BoundedValue;
use crate::matrix::RationalMatrix;
use crate::operator::Spectrum;
use crate::oracle::GreenTable;
use crate::rational::render;
use crate::verify::{Report, Status};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Json,
    Csv,
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s {
            "json" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            other => Err(Error::Parse(format!("unknown format {other:?}"))),
        }
    }
}

/// Canonical coset labels in matrix order.
pub fn coset_labels(params: &Params) -> Vec<String> {
    enumerate_cosets(params).iter().map(|c| c.compact(params.q())).collect()
}

/// Valuation labels `0..m` for `m × m` matrices.
pub fn valuation_labels(m: u32) -> Vec<String> {
    (0..m).map(|s| s.to_string()).collect()
}

fn entries_json(matrix: &RationalMatrix) -> Value {
    Value::Array(
        (0..matrix.rows())
            .map(|i| Value::Array(matrix.row(i).iter().map(|v| Value::String(render(v))).collect()))
            .collect(),
    )
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("values serialize");
    s.push('\n');
    s
}

pub fn matrix_json(params: &Params, order: &[String], matrix: &RationalMatrix) -> Value {
    json!({ "params": params, "order": order, "entries": entries_json(matrix) })
}

/// Header row of labels, then one labelled row per matrix row.
pub fn matrix_csv(order: &[String], matrix: &RationalMatrix) -> String {
    let mut out = String::new();
    let header: Vec<String> = std::iter::once(String::new()).chain(order.iter().map(|s| csv_field(s))).collect();
    writeln!(out, "{}", header.join(",")).unwrap();
    for (i, label) in order.iter().enumerate() {
        let row: Vec<String> = matrix.row(i).iter().map(render).collect();
        writeln!(out, "{},{}", csv_field(label), row.join(",")).unwrap();
    }
    out
}

pub fn render_matrix(params: &Params, order: &[String], matrix: &RationalMatrix, format: Format) -> String {
    match format {
        Format::Json => pretty(&matrix_json(params, order, matrix)),
        Format::Csv => matrix_csv(order, matrix),
    }
}

pub fn green_json(table: &GreenTable) -> Value {
    json!({
        "params": table.params,
        "normalization": table.normalization.label(),
        "order": coset_labels(&table.params),
        "entries": entries_json(&table.matrix),
    })
}

/// `row,col,value` with coset labels.
pub fn green_csv(table: &GreenTable) -> String {
    let labels = coset_labels(&table.params);
    let mut out = String::from("row,col,value\n");
    for (i, a) in labels.iter().enumerate() {
        for (j, b) in labels.iter().enumerate() {
            writeln!(out, "{a},{b},{}", render(table.get(i, j))).unwrap();
        }
    }
    out
}

pub fn render_green(table: &GreenTable, format: Format) -> String {
    match format {
        Format::Json => pretty(&green_json(table)),
        Format::Csv => green_csv(table),
    }
}

pub fn render_spectrum(params: &Params, spectrum: &Spectrum, format: Format) -> String {
    match format {
        Format::Json => pretty(&json!({
            "params": params,
            "eigenvalues": spectrum.eigenvalues,
            "kernel_dim": spectrum.kernel_dim,
        })),
        Format::Csv => {
            let mut out = format!("# kernel_dim={}\nindex,eigenvalue\n", spectrum.kernel_dim);
            for (i, v) in spectrum.eigenvalues.iter().enumerate() {
                writeln!(out, "{i},{v:e}").unwrap();
            }
            out
        }
    }
}

pub fn render_bounded(value: &BoundedValue, format: Format) -> String {
    match format {
        Format::Json => pretty(&json!(value)),
        Format::Csv => format!("center,radius\n{},{}\n", render(&value.center), render(&value.radius)),
    }
}

pub fn render_report(report: &Report, format: Format) -> String {
    match format {
        Format::Json => pretty(&report.to_json()),
        Format::Csv => {
            let mut out = String::from("name,params,status,witness\n");
            for c in &report.checks {
                let params = c.params.map(|p| p.to_string()).unwrap_or_default();
                let status = match c.status {
                    Status::Pass => "pass",
                    Status::Fail => "fail",
                    Status::Skipped => "skipped",
                };
                let witness = c.witness.as_ref().map(Value::to_string).unwrap_or_default();
                writeln!(out, "{},{},{status},{}", csv_field(&c.name), csv_field(&params), csv_field(&witness)).unwrap();
            }
            let s = report.summary();
            writeln!(out, "# pass={} fail={} skipped={}", s.pass, s.fail, s.skipped).unwrap();
            out
        }
    }
}
