//! Fixed tables printed by the CLI.

use std::fmt::Write as _;
use std::str::FromStr;

use serde_json::{json, Map, Value};

use crate::error::Result;
use crate::lorentz::poincare_project;
use crate::parallel::identities::frame_identity_checks;
use crate::parallel::{adapted_frame, detq_derivatives_at_0, detq_numeric_derivatives, DETQ_ORDERS};
use crate::surface::point_geometry;
use crate::zoo::{CurvatureSpec, Family, Model, ModelSpec};

use super::csv_field;

/// Tolerance used to mark rows of the `lemma-residuals` table.
pub const LEMMA_TABLE_TOL: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum TableName {
    CurvatureCatalog,
    DetqDerivatives,
    LemmaResiduals,
}

impl FromStr for TableName {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "curvature-catalog" => Ok(Self::CurvatureCatalog),
            "detq-derivatives" => Ok(Self::DetqDerivatives),
            "lemma-residuals" => Ok(Self::LemmaResiduals),
            _ => Err(format!(
                "unknown table '{s}' (expected curvature-catalog, detq-derivatives or lemma-residuals)"
            )),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, clap::ValueEnum)]
pub enum TableFormat {
    #[default]
    Text,
    Csv,
    Json,
}

/// A titled table of JSON scalars.
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub title: String,
    pub headers: Vec<&'static str>,
    pub rows: Vec<Vec<Value>>,
}

fn cell_text(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        Value::Number(n) => match n.as_f64() {
            Some(x) if n.is_f64() => format!("{x:.10}"),
            _ => n.to_string(),
        },
        other => other.to_string(),
    }
}

impl Table {
    pub fn column(&self, name: &str) -> Option<usize> {
        self.headers.iter().position(|h| *h == name)
    }

    pub fn to_text(&self) -> String {
        let cells: Vec<Vec<String>> = self.rows.iter().map(|r| r.iter().map(cell_text).collect()).collect();
        let widths: Vec<usize> = (0..self.headers.len())
            .map(|j| {
                cells
                    .iter()
                    .map(|r| r[j].chars().count())
                    .chain([self.headers[j].len()])
                    .max()
                    .unwrap_or(0)
            })
            .collect();
        let mut out = format!("{}\n", self.title);
        let line = |out: &mut String, row: &[String]| {
            let parts: Vec<String> = row.iter().zip(&widths).map(|(c, w)| format!("{c:<w$}")).collect();
            out.push_str(parts.join("  ").trim_end());
            out.push('\n');
        };
        let header: Vec<String> = self.headers.iter().map(|h| h.to_string()).collect();
        line(&mut out, &header);
        line(&mut out, &widths.iter().map(|w| "-".repeat(*w)).collect::<Vec<_>>());
        for r in &cells {
            line(&mut out, r);
        }
        out
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.headers.join(",");
        out.push('\n');
        for r in &self.rows {
            let row: Vec<String> = r
                .iter()
                .map(|v| match v {
                    Value::Number(n) => n.to_string(),
                    other => csv_field(&cell_text(other)),
                })
                .collect();
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self) -> String {
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|r| {
                let m: Map<String, Value> = self.headers.iter().map(|h| h.to_string()).zip(r.iter().cloned()).collect();
                Value::Object(m)
            })
            .collect();
        let mut s = serde_json::to_string_pretty(&json!({ "title": self.title, "rows": rows })).expect("table serialises");
        s.push('\n');
        s
    }

    pub fn render(&self, format: TableFormat) -> String {
        match format {
            TableFormat::Text => self.to_text(),
            TableFormat::Csv => self.to_csv(),
            TableFormat::Json => self.to_json(),
        }
    }
}

pub fn table(which: TableName) -> Result<Table> {
    match which {
        TableName::CurvatureCatalog => curvature_catalog(),
        TableName::DetqDerivatives => detq_derivatives(),
        TableName::LemmaResiduals => lemma_residuals(),
    }
}

/// Models swept by `curvature-catalog`.
pub fn catalog_models() -> Vec<ModelSpec> {
    let mut out: Vec<ModelSpec> = Vec::new();
    for kappa_gamma in [0.0, 0.5, 1.0, 2.0] {
        out.push(Family::Gamma { kappa_gamma }.into());
    }
    for c in [0.1, 0.25, 0.5, 0.75, 0.9] {
        out.push(Family::OneMinusOne { c }.into());
    }
    for c in [0.1, 0.25, 0.5, 0.75, 0.9] {
        out.push(Family::OneOne { c }.into());
    }
    for tau in [-1.5, -2.0, -5.0] {
        out.push(Family::Tau { tau }.into());
    }
    out.push(
        Family::Kk {
            c: 0.5,
            kappa: CurvatureSpec::Constant(0.5),
            kappa_tilde: CurvatureSpec::Constant(-0.5),
        }
        .into(),
    );
    out.push(
        Family::Kk {
            c: 0.5,
            kappa: CurvatureSpec::Tanh { scale: 1.0, shift: 0.0 },
            kappa_tilde: CurvatureSpec::Tanh { scale: 1.0, shift: 0.0 },
        }
        .into(),
    );
    out
}

fn num(x: f64) -> Value {
    json!(x)
}

pub fn curvature_catalog() -> Result<Table> {
    let mut rows = Vec::new();
    for spec in catalog_models() {
        let model = spec.build()?;
        let u = model.surface.domain.centre();
        let pg = point_geometry(&model.surface, u)?;
        rows.push(vec![
            json!(spec.label()),
            json!(format!("{:?}", u)),
            num(pg.c),
            num(pg.lambdas[0]),
            num(pg.lambdas[1]),
            num(pg.lambdas[2]),
            num(pg.h),
            num(pg.rho),
            num(pg.k),
        ]);
    }
    Ok(Table {
        title: "principal data at the chart centre".into(),
        headers: vec!["model", "u", "C", "lambda1", "lambda2", "lambda3", "H", "rho", "K"],
        rows,
    })
}

/// Models used by `detq-derivatives` and `lemma-residuals`.
pub fn derivative_models() -> Vec<ModelSpec> {
    vec![
        Family::OneOne { c: 0.3 }.into(),
        Family::OneMinusOne { c: 0.6 }.into(),
        Family::Tau { tau: -2.0 }.into(),
    ]
}

pub fn detq_derivatives() -> Result<Table> {
    let mut rows = Vec::new();
    for spec in derivative_models() {
        let model = spec.build()?;
        let pg = point_geometry(&model.surface, model.surface.domain.centre())?;
        let af = adapted_frame(&pg)?;
        let closed = detq_derivatives_at_0(&af, pg.rho);
        let numeric = detq_numeric_derivatives(&af);
        for k in 1..=8 {
            let c = DETQ_ORDERS.iter().position(|&o| o == k).map(|i| closed[i]);
            let n = numeric[k - 1];
            rows.push(vec![
                json!(spec.label()),
                json!(k),
                c.map_or(Value::Null, num),
                num(n),
                c.map_or(Value::Null, |c| num((c - n).abs())),
            ]);
        }
    }
    Ok(Table {
        title: "d^k det Q / dl^k at l = 0 (odd k > 1: numeric only)".into(),
        headers: vec!["model", "k", "closed_form", "numeric", "abs_diff"],
        rows,
    })
}

pub fn lemma_models() -> Vec<ModelSpec> {
    vec![
        Family::OneOne { c: 0.3 }.into(),
        Family::Tau { tau: -2.0 }.into(),
        Family::OneMinusOne { c: 0.5 }.into(),
    ]
}

pub fn lemma_residuals() -> Result<Table> {
    let mut rows = Vec::new();
    for spec in lemma_models() {
        let model = spec.build()?;
        let u = model.surface.domain.centre();
        for check in frame_identity_checks(&model.surface, u)? {
            let status = match check.passes(LEMMA_TABLE_TOL) {
                Some(true) => "pass".to_string(),
                Some(false) => "fail".to_string(),
                None => format!("skipped: {}", check.skipped.clone().unwrap_or_default()),
            };
            rows.push(vec![
                json!(spec.label()),
                json!(check.name),
                check.residual.map_or(Value::Null, num),
                json!(status),
            ]);
        }
    }
    Ok(Table {
        title: format!("frame identities at the chart centre (tolerance {LEMMA_TABLE_TOL:e})"),
        headers: vec!["model", "identity", "residual", "status"],
        rows,
    })
}

/// Chart grid points of both factors projected to the Poincaré disk, as CSV.
pub fn poincare_dump(model: &Model, n: usize) -> Result<String> {
    let mut out = String::from("factor,u1,u2,u3,disk_x,disk_y\n");
    for u in model.surface.domain.grid(n) {
        let x = model.surface.product_point(u)?;
        for (factor, p) in [(1, &x.p), (2, &x.q)] {
            let d = poincare_project(p);
            writeln!(out, "{factor},{},{},{},{},{}", u[0], u[1], u[2], d[0], d[1]).expect("write to string");
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_names_parse() {
        assert_eq!("detq-derivatives".parse::<TableName>().unwrap(), TableName::DetqDerivatives);
        assert!("nope".parse::<TableName>().unwrap_err().contains("unknown table"));
    }

    #[test]
    fn catalog_rows() {
        let t = curvature_catalog().unwrap();
        let col = |n: &str| t.column(n).unwrap();
        let get = |label: &str, c: usize| -> f64 {
            let row = t.rows.iter().find(|r| r[0] == json!(label)).unwrap();
            row[c].as_f64().unwrap()
        };
        let h = 0.5f64.sqrt();
        let m11 = "M_11(c=0.5)";
        assert!(get(m11, col("C")).abs() < 1e-9);
        assert!(get(m11, col("H")).abs() < 1e-9);
        for (c, want) in [("lambda1", -h), ("lambda2", 0.0), ("lambda3", h)] {
            assert!((get(m11, col(c)) - want).abs() < 1e-7);
        }
        let tau = "M_tau(tau=-2)";
        for (c, want) in [("lambda1", 0.0), ("lambda2", 0.408248290463863), ("lambda3", 1.224744871391589)] {
            assert!((get(tau, col(c)) - want).abs() < 1e-7, "{c}");
        }
    }

    #[test]
    fn detq_table_second_derivative() {
        let t = detq_derivatives().unwrap();
        for r in t.rows.iter().filter(|r| r[1] == json!(2)) {
            assert!(r[4].as_f64().unwrap() < 1e-5);
        }
        assert!(t.rows.iter().filter(|r| r[1] == json!(3)).all(|r| r[2].is_null()));
    }

    #[test]
    fn renderings_agree_on_shape() {
        let t = lemma_residuals().unwrap();
        assert_eq!(t.to_csv().lines().count(), t.rows.len() + 1);
        let v: Value = serde_json::from_str(&t.to_json()).unwrap();
        assert_eq!(v["rows"].as_array().unwrap().len(), t.rows.len());
        assert!(t.to_text().contains("connection_skew"));
        assert!(t.to_csv().contains("hypothesis"));
    }

    #[test]
    fn dump_is_well_formed() {
        let model = ModelSpec::from(Family::Gamma { kappa_gamma: 1.0 }).build().unwrap();
        let csv = poincare_dump(&model, 3).unwrap();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 1 + 2 * 27);
        for l in &lines[1..] {
            let f: Vec<f64> = l.split(',').map(|x| x.parse().unwrap()).collect();
            assert_eq!(f.len(), 6);
            assert!(f[4].hypot(f[5]) < 1.0);
        }
    }
}
