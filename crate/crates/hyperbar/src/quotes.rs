//! Quote files: CSV with header `maturity,strike,price[,implied_vol]`.

use std::path::Path;

use hyperbar_core::calibration::MarketQuote;
use log::warn;
use serde::Deserialize;

use crate::error::CliError;

#[derive(Debug, Deserialize)]
struct Row {
    maturity: f64,
    strike: f64,
    price: f64,
    #[serde(default)]
    implied_vol: Option<f64>,
}

/// Parses quotes; duplicate `(maturity, strike)` rows keep the last one.
pub fn parse_quotes(text: &str, path: &Path) -> Result<Vec<MarketQuote>, CliError> {
    let err = |line: u64, msg: String| CliError::Format { path: path.to_path_buf(), msg: format!("line {line}: {msg}") };
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
    let headers = rdr.headers().map_err(|e| err(1, e.to_string()))?.clone();
    for need in ["maturity", "strike", "price"] {
        if !headers.iter().any(|h| h == need) {
            return Err(err(1, format!("missing column `{need}`")));
        }
    }
    let mut out: Vec<(u64, MarketQuote)> = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| err(e.position().map_or(0, |p| p.line()), e.to_string()))?;
        let line = rec.position().map_or(0, |p| p.line());
        let row: Row = rec.deserialize(Some(&headers)).map_err(|e| err(line, e.to_string()))?;
        if !(row.maturity > 0.0 && row.strike > 0.0 && row.price > 0.0) {
            return Err(err(line, "maturity, strike and price must be positive".into()));
        }
        let q = MarketQuote { maturity: row.maturity, strike: row.strike, price: row.price, implied_vol: row.implied_vol };
        if let Some(old) = out.iter_mut().find(|(_, o)| o.maturity == q.maturity && o.strike == q.strike) {
            warn!("line {line}: duplicate quote (T = {}, K = {}) replaces line {}", q.maturity, q.strike, old.0);
            *old = (line, q);
        } else {
            out.push((line, q));
        }
    }
    Ok(out.into_iter().map(|(_, q)| q).collect())
}

pub fn load_quotes(path: &Path) -> Result<Vec<MarketQuote>, CliError> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Read { path: path.to_path_buf(), source })?;
    parse_quotes(&text, path)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_dedups() {
        let t = "maturity,strike,price\n0.5,100,5\n0.5,110,2\n0.5,100,5.5\n1,100,8\n";
        let q = parse_quotes(t, Path::new("q.csv")).unwrap();
        assert_eq!(q.len(), 3);
        assert_eq!(q[0].price, 5.5);
    }

    #[test]
    fn negative_price_reports_line() {
        let t = "maturity,strike,price,implied_vol\n0.5,100,5,0.2\n0.5,110,-2,\n";
        let e = parse_quotes(t, Path::new("q.csv")).unwrap_err();
        assert!(e.to_string().contains("line 3"), "{e}");
    }

    #[test]
    fn missing_column() {
        assert!(parse_quotes("maturity,price\n1,2\n", Path::new("q.csv")).is_err());
    }
}
