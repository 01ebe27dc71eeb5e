//! Result tables written as CSV or JSON, numbers at 6 significant digits.

use std::io::Write;
use std::path::Path;

use serde_json::{Map, Value};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Text(String),
    Flag(bool),
}

/// `x` with 6 significant digits, plain notation for moderate magnitudes.
pub fn sig6(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let e = x.abs().log10().floor() as i32;
    if (-4..6).contains(&e) {
        let decimals = (5 - e).max(0) as usize;
        let s = format!("{x:.decimals$}");
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s
        }
    } else {
        format!("{x:.5e}")
    }
}

impl Cell {
    fn text(&self) -> String {
        match self {
            Cell::Num(x) => sig6(*x),
            Cell::Int(i) => i.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Flag(b) => b.to_string(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Num(x) => sig6(*x).parse::<f64>().ok().and_then(serde_json::Number::from_f64).map_or(Value::Null, Value::Number),
            Cell::Int(i) => Value::from(*i),
            Cell::Text(s) => Value::from(s.clone()),
            Cell::Flag(b) => Value::from(*b),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
    /// Free-form lines printed as `# key: value` in CSV, a `meta` object in JSON.
    pub meta: Vec<(String, String)>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Table { columns: columns.iter().map(|c| c.to_string()).collect(), ..Table::default() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn meta(&mut self, key: &str, value: impl ToString) {
        self.meta.push((key.to_string(), value.to_string()));
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Csv => {
                let mut out = String::new();
                for (k, v) in &self.meta {
                    out.push_str(&format!("# {k}: {v}\n"));
                }
                let mut w = csv::Writer::from_writer(Vec::new());
                w.write_record(&self.columns).expect("in-memory write");
                for r in &self.rows {
                    w.write_record(r.iter().map(Cell::text)).expect("in-memory write");
                }
                out.push_str(&String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8"));
                out
            }
            Format::Json => {
                let rows: Vec<Value> = self
                    .rows
                    .iter()
                    .map(|r| {
                        let mut o = Map::new();
                        for (c, v) in self.columns.iter().zip(r) {
                            o.insert(c.clone(), v.json());
                        }
                        Value::Object(o)
                    })
                    .collect();
                let mut doc = Map::new();
                let meta: Map<String, Value> = self.meta.iter().map(|(k, v)| (k.clone(), Value::from(v.clone()))).collect();
                doc.insert("meta".into(), Value::Object(meta));
                doc.insert("rows".into(), Value::Array(rows));
                let mut s = serde_json::to_string_pretty(&Value::Object(doc)).expect("serializable");
                s.push('\n');
                s
            }
        }
    }
}

/// Writes to `out` or standard output.
pub fn emit(text: &str, out: Option<&Path>) -> Result<(), CliError> {
    match out {
        Some(p) => std::fs::write(p, text).map_err(|source| CliError::Write { path: p.to_path_buf(), source }),
        None => {
            let mut so = std::io::stdout().lock();
            so.write_all(text.as_bytes()).map_err(|source| CliError::Write { path: "<stdout>".into(), source })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn six_significant_digits() {
        assert_eq!(sig6(0.5140221), "0.514022");
        assert_eq!(sig6(110.25634), "110.256");
        assert_eq!(sig6(-3.742e-4), "-0.0003742");
        assert_eq!(sig6(6.7601234e-7), "6.76012e-7");
        assert_eq!(sig6(4150.0), "4150");
        assert_eq!(sig6(0.0), "0");
    }

    #[test]
    fn csv_and_json() {
        let mut t = Table::new(&["spot_pct", "price"]);
        t.meta("delta_scale", "1e-3");
        t.push(vec![Cell::Num(100.0), Cell::Num(0.51402)]);
        assert_eq!(t.render(Format::Csv), "# delta_scale: 1e-3\nspot_pct,price\n100,0.51402\n");
        let v: Value = serde_json::from_str(&t.render(Format::Json)).unwrap();
        assert_eq!(v["rows"][0]["price"], 0.51402);
    }
}
