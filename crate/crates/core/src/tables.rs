//! Plain tabular output (CSV, aligned text, JSON) and the standard table
//! layouts for moments, coefficients, efficiencies and prediction constants.

use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::estimation::{linear_model, mse_and_rec};
use crate::moments::moment_set;
use crate::prediction::PredictionProblem;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
    Text,
}

impl std::str::FromStr for Format {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            "text" | "txt" => Ok(Format::Text),
            other => Err(Error::Parse(format!("unknown format '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Precision {
    /// Fixed number of decimals.
    Fixed(usize),
    /// Shortest representation that parses back to the same `f64`.
    Full,
}

pub const DEFAULT_PRECISION: Precision = Precision::Fixed(5);

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(i64),
    Real(f64),
    Text(String),
    Empty,
}

impl Cell {
    fn render(&self, precision: Precision) -> String {
        match self {
            Cell::Int(i) => i.to_string(),
            Cell::Real(x) => match precision {
                Precision::Fixed(d) => format!("{x:.d$}"),
                Precision::Full => format!("{x:?}"),
            },
            Cell::Text(s) => s.clone(),
            Cell::Empty => String::new(),
        }
    }

    fn parse(s: &str) -> Cell {
        let s = s.trim();
        if s.is_empty() {
            Cell::Empty
        } else if let Ok(i) = s.parse::<i64>() {
            Cell::Int(i)
        } else if let Ok(x) = s.parse::<f64>() {
            Cell::Real(x)
        } else {
            Cell::Text(s.to_string())
        }
    }

    fn to_json(&self) -> Value {
        match self {
            Cell::Int(i) => json!(i),
            Cell::Real(x) => json!(x),
            Cell::Text(s) => json!(s),
            Cell::Empty => Value::Null,
        }
    }

    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Cell::Int(i) => Some(*i as f64),
            Cell::Real(x) => Some(*x),
            _ => None,
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Real(x)
    }
}

impl From<usize> for Cell {
    fn from(i: usize) -> Self {
        Cell::Int(i as i64)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub title: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(title: impl Into<String>, columns: &[&str]) -> Self {
        Self { title: title.into(), columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, mut row: Vec<Cell>) {
        row.resize(self.columns.len(), Cell::Empty);
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    /// Real cells rounded to `decimals`, matching what a fixed-precision
    /// CSV parses back to.
    pub fn rounded(&self, decimals: usize) -> Table {
        let mut t = self.clone();
        for cell in t.rows.iter_mut().flatten() {
            if let Cell::Real(x) = cell {
                *x = format!("{x:.decimals$}").parse().expect("formatted float parses");
            }
        }
        t
    }

    pub fn to_csv(&self, precision: Precision) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.columns).expect("in-memory write");
        for row in &self.rows {
            w.write_record(row.iter().map(|c| c.render(precision))).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 output")
    }

    /// Lines starting with `#` are skipped.
    pub fn from_csv(title: impl Into<String>, text: &str) -> Result<Table> {
        let mut r = csv::ReaderBuilder::new().flexible(false).comment(Some(b'#')).from_reader(text.as_bytes());
        let columns = r.headers()?.iter().map(str::to_string).collect();
        let mut rows = Vec::new();
        for rec in r.records() {
            rows.push(rec?.iter().map(Cell::parse).collect());
        }
        Ok(Table { title: title.into(), columns, rows })
    }

    pub fn to_text(&self, precision: Precision) -> String {
        let cells: Vec<Vec<String>> = self.rows.iter().map(|r| r.iter().map(|c| c.render(precision)).collect()).collect();
        let widths: Vec<usize> = self
            .columns
            .iter()
            .enumerate()
            .map(|(j, h)| cells.iter().map(|r| r[j].len()).chain([h.len()]).max().unwrap_or(0))
            .collect();
        let line = |items: &[String]| {
            items
                .iter()
                .zip(&widths)
                .map(|(s, w)| format!("{s:>w$}"))
                .collect::<Vec<_>>()
                .join("  ")
                .trim_end()
                .to_string()
        };
        let mut out = String::new();
        if !self.title.is_empty() {
            out.push_str(&self.title);
            out.push('\n');
        }
        out.push_str(&line(&self.columns));
        out.push('\n');
        for r in &cells {
            out.push_str(&line(r));
            out.push('\n');
        }
        out
    }

    /// Records keyed by column name, values at full precision.
    pub fn to_json(&self) -> Value {
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|r| {
                let obj = self.columns.iter().zip(r).map(|(c, v)| (c.clone(), v.to_json())).collect();
                Value::Object(obj)
            })
            .collect();
        json!({ "title": self.title, "columns": self.columns, "rows": rows })
    }

    pub fn render(&self, format: Format, precision: Precision) -> String {
        match format {
            Format::Csv => self.to_csv(precision),
            Format::Text => self.to_text(precision),
            Format::Json => serde_json::to_string_pretty(&self.to_json()).expect("json value serializes") + "\n",
        }
    }
}

fn check_identities(n: usize, psi: f64) -> Result<()> {
    moment_set(n, psi)?.verify(1e-8)
}

/// Means of order statistics, one row per `(n, r, ψ)`.
pub fn means_table(ns: &[usize], psis: &[f64]) -> Result<Table> {
    let mut t = Table::new("Means of order statistics", &["n", "r", "psi", "mean"]);
    for &psi in psis {
        for &n in ns {
            check_identities(n, psi)?;
            let ms = moment_set(n, psi)?;
            for r in 1..=n {
                t.push(vec![n.into(), r.into(), psi.into(), ms.means[r - 1].into()]);
            }
        }
    }
    Ok(t)
}

/// Variances and covariances, one row per `(n, r, s)` with `r ≤ s`.
pub fn covariance_table(ns: &[usize], psis: &[f64]) -> Result<Table> {
    let mut t = Table::new("Variances and covariances of order statistics", &["n", "r", "s", "psi", "cov"]);
    for &psi in psis {
        for &n in ns {
            check_identities(n, psi)?;
            let ms = moment_set(n, psi)?;
            for r in 1..=n {
                for s in r..=n {
                    t.push(vec![n.into(), r.into(), s.into(), psi.into(), ms.cov.get(r - 1, s - 1).into()]);
                }
            }
        }
    }
    Ok(t)
}

/// Second raw moments `E[Z_{r:n}²]`.
pub fn second_moment_table(ns: &[usize], psis: &[f64]) -> Result<Table> {
    let mut t = Table::new("Second moments of order statistics", &["n", "r", "psi", "moment2"]);
    for &psi in psis {
        for &n in ns {
            check_identities(n, psi)?;
            let ms = moment_set(n, psi)?;
            for r in 1..=n {
                t.push(vec![n.into(), r.into(), psi.into(), ms.second_moments[r - 1].into()]);
            }
        }
    }
    Ok(t)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CoefficientKind {
    BlueLocation,
    BlueScale,
    BlieLocation,
    BlieScale,
}

impl CoefficientKind {
    pub const ALL: [CoefficientKind; 4] = [
        CoefficientKind::BlueLocation,
        CoefficientKind::BlueScale,
        CoefficientKind::BlieLocation,
        CoefficientKind::BlieScale,
    ];

    pub fn title(self) -> &'static str {
        match self {
            CoefficientKind::BlueLocation => "Coefficients of the BLUE of location",
            CoefficientKind::BlueScale => "Coefficients of the BLUE of scale",
            CoefficientKind::BlieLocation => "Coefficients of the BLIE of location",
            CoefficientKind::BlieScale => "Coefficients of the BLIE of scale",
        }
    }
}

/// Weights `c_1 … c_{n−m}` for each `(ψ, n, m)`, padded with empty cells.
pub fn coefficient_table(kind: CoefficientKind, psis: &[f64], schemes: &[(usize, usize)]) -> Result<Table> {
    let width = schemes.iter().map(|s| s.0).max().unwrap_or(0);
    let mut cols = vec!["psi".to_string(), "n".into(), "m".into()];
    cols.extend((1..=width).map(|i| format!("c{i}")));
    let mut t = Table { title: kind.title().into(), columns: cols, rows: Vec::new() };
    for &psi in psis {
        for &(n, m) in schemes {
            let model = linear_model(n, m, psi)?;
            let c = model.coefficients();
            let w = match kind {
                CoefficientKind::BlueLocation => &c.a,
                CoefficientKind::BlueScale => &c.b,
                CoefficientKind::BlieLocation => &c.a_inv,
                CoefficientKind::BlieScale => &c.b_inv,
            };
            let mut row: Vec<Cell> = vec![psi.into(), n.into(), m.into()];
            row.extend(w.iter().map(|&x| Cell::from(x)));
            t.push(row);
        }
    }
    Ok(t)
}

/// `V1, V2, V3` and the efficiencies of the BLIEs relative to the BLUEs.
pub fn efficiency_table(psis: &[f64], schemes: &[(usize, usize)]) -> Result<Table> {
    let mut t = Table::new(
        "Variance factors of the BLUEs and efficiency of the BLIEs",
        &["psi", "n", "m", "V1", "V2", "V3", "REC_location", "REC_scale"],
    );
    for &psi in psis {
        for &(n, m) in schemes {
            let model = linear_model(n, m, psi)?;
            let c = model.coefficients();
            let e = mse_and_rec(c);
            t.push(vec![
                psi.into(),
                n.into(),
                m.into(),
                c.v1.into(),
                c.v2.into(),
                c.v3.into(),
                e.rec_location.into(),
                e.rec_scale.into(),
            ]);
        }
    }
    Ok(t)
}

/// `V4` and `MSPE(BLUP)/MSPE(BLIP)` for each `(ψ, n, m, q)`.
pub fn prediction_table(psis: &[f64], schemes: &[(usize, usize, usize)]) -> Result<Table> {
    let mut t = Table::new(
        "Prediction constants",
        &["psi", "n", "m", "q", "V4", "MSPE_BLUP", "MSPE_BLIP", "REC"],
    );
    for &psi in psis {
        for &(n, m, q) in schemes {
            let p = PredictionProblem::new(n, m, q, psi)?;
            t.push(vec![
                psi.into(),
                n.into(),
                m.into(),
                q.into(),
                p.v4.into(),
                p.mspe(crate::Predictor::Blup).into(),
                p.mspe(crate::Predictor::Blip).into(),
                p.rec().into(),
            ]);
        }
    }
    Ok(t)
}

/// Censoring schemes `(n, m)` with `m = 0 … ⌊n/2⌋ − 1`.
pub fn standard_schemes(ns: &[usize]) -> Vec<(usize, usize)> {
    ns.iter().flat_map(|&n| (0..n / 2).map(move |m| (n, m))).collect()
}

/// Prediction targets `(n, m, q)` for `m = 1 … ⌊n/2⌋ − 1` and every unobserved `q`.
pub fn standard_prediction_schemes(ns: &[usize]) -> Vec<(usize, usize, usize)> {
    ns.iter()
        .flat_map(|&n| (1..n / 2).flat_map(move |m| (n - m + 1..=n).map(move |q| (n, m, q))))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_round_trips() {
        let t = means_table(&[1, 2, 3], &[1.0, 2.5]).unwrap();
        let full = t.to_csv(Precision::Full);
        assert_eq!(Table::from_csv(t.title.clone(), &full).unwrap(), t);
        let five = t.to_csv(DEFAULT_PRECISION);
        let back = Table::from_csv(t.title.clone(), &five).unwrap();
        assert_eq!(back, t.rounded(5));
        assert_eq!(back.to_csv(DEFAULT_PRECISION), five);
    }

    #[test]
    fn formats_render() {
        let t = means_table(&[1], &[2.0]).unwrap();
        assert_eq!(t.to_csv(DEFAULT_PRECISION), "n,r,psi,mean\n1,1,2.00000,0.55556\n");
        let text = t.to_text(DEFAULT_PRECISION);
        assert!(text.lines().nth(2).unwrap().ends_with("0.55556"));
        let j = t.to_json();
        assert_eq!(j["rows"][0]["n"], json!(1));
        assert!((j["rows"][0]["mean"].as_f64().unwrap() - 5.0 / 9.0).abs() < 1e-15);
        assert!("yaml".parse::<Format>().is_err());
    }

    #[test]
    fn layouts_have_expected_sizes() {
        let schemes = standard_schemes(&[6, 10]);
        assert_eq!(schemes.len(), 8);
        assert_eq!(standard_prediction_schemes(&[6, 10]).len(), 3 + 10);
        let c = coefficient_table(CoefficientKind::BlueLocation, &[1.0], &schemes).unwrap();
        assert_eq!(c.columns.len(), 13);
        assert_eq!(c.rows[1][3 + 5], Cell::Empty);
        let cov = covariance_table(&[2], &[1.0]).unwrap();
        let total: f64 = cov.rows.iter().map(|r| {
            let v = r[4].as_f64().unwrap();
            if r[1] == r[2] { v } else { 2.0 * v }
        }).sum();
        assert!((total - 2.0 * 1.4375).abs() < 1e-12);
        assert_eq!(efficiency_table(&[1.0, 2.0], &schemes).unwrap().rows.len(), 16);
    }
}
