//! Price-panel loading, log-return construction, and rolling estimation
//! windows.
//!
//! Dates are opaque ISO-8601 strings used only as ordered labels; there is no
//! calendar logic. Rows with any missing or non-positive price are dropped
//! listwise so that all tickers stay aligned on common dates.

use std::path::Path;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("malformed input: {0}")]
    MalformedFile(String),
    #[error("panel has fewer than 2 usable rows")]
    EmptyPanel,
    #[error("duplicated date {0}")]
    DuplicateDate(String),
    #[error("insufficient history: need {needed} rows before {start}, have {available}")]
    InsufficientHistory { needed: usize, start: String, available: usize },
}

/// Aligned positive price matrix, one column per ticker, system first.
#[derive(Debug, Clone)]
pub struct PricePanel {
    pub dates: Vec<String>,
    pub tickers: Vec<String>,
    /// prices[row][col]
    pub prices: Vec<Vec<f64>>,
    /// rows discarded during loading for missing or non-positive cells
    pub dropped_rows: usize,
}

#[derive(Debug, Clone)]
pub struct ReturnPanel {
    pub dates: Vec<String>,
    pub tickers: Vec<String>,
    /// returns[row][col], one fewer row than the price panel
    pub returns: Vec<Vec<f64>>,
}

impl ReturnPanel {
    pub fn n_days(&self) -> usize {
        self.returns.len()
    }

    pub fn column(&self, k: usize) -> Vec<f64> {
        self.returns.iter().map(|r| r[k]).collect()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("date,");
        out.push_str(&self.tickers.join(","));
        out.push('\n');
        for (d, row) in self.dates.iter().zip(&self.returns) {
            out.push_str(d);
            for v in row {
                out.push(',');
                out.push_str(&format!("{v}"));
            }
            out.push('\n');
        }
        out
    }
}

/// One estimation task: a fixed-length lookback slice and the next day's
/// realized returns for backtesting.
#[derive(Debug, Clone)]
pub struct EstimationWindow {
    pub as_of_date: String,
    pub target_date: String,
    /// lookback[row][col], exactly the configured window length
    pub lookback: Vec<Vec<f64>>,
    pub target_return: Vec<f64>,
}

/// Load a `date,<ticker>,...` CSV. Rows failing to parse or containing a
/// non-positive price are dropped and counted; duplicated dates are an error.
pub fn load_price_panel(path: &Path) -> Result<PricePanel, IngestError> {
    let mut reader = csv::ReaderBuilder::new()
        .flexible(true)
        .from_path(path)
        .map_err(|e| IngestError::MalformedFile(e.to_string()))?;
    let headers = reader
        .headers()
        .map_err(|e| IngestError::MalformedFile(e.to_string()))?
        .clone();
    if headers.len() < 3 {
        return Err(IngestError::MalformedFile(
            "need a date column and at least 2 ticker columns".into(),
        ));
    }
    let tickers: Vec<String> = headers.iter().skip(1).map(str::to_string).collect();
    let mut rows: Vec<(String, Vec<f64>)> = Vec::new();
    let mut dropped = 0usize;
    for record in reader.records() {
        let record = record.map_err(|e| IngestError::MalformedFile(e.to_string()))?;
        if record.len() != headers.len() {
            dropped += 1;
            continue;
        }
        let date = record[0].to_string();
        let parsed: Option<Vec<f64>> = record
            .iter()
            .skip(1)
            .map(|cell| cell.trim().parse::<f64>().ok().filter(|p| *p > 0.0 && p.is_finite()))
            .collect();
        match parsed {
            Some(prices) => rows.push((date, prices)),
            None => dropped += 1,
        }
    }
    rows.sort_by(|a, b| a.0.cmp(&b.0));
    for pair in rows.windows(2) {
        if pair[0].0 == pair[1].0 {
            return Err(IngestError::DuplicateDate(pair[0].0.clone()));
        }
    }
    if rows.len() < 2 {
        return Err(IngestError::EmptyPanel);
    }
    let (dates, prices) = rows.into_iter().unzip();
    Ok(PricePanel { dates, tickers, prices, dropped_rows: dropped })
}

/// returns[t][k] = ln(prices[t+1][k] / prices[t][k])
pub fn to_log_returns(panel: &PricePanel) -> Result<ReturnPanel, IngestError> {
    if panel.prices.len() < 2 {
        return Err(IngestError::EmptyPanel);
    }
    let mut returns = Vec::with_capacity(panel.prices.len() - 1);
    for t in 1..panel.prices.len() {
        let row: Vec<f64> = panel.prices[t]
            .iter()
            .zip(&panel.prices[t - 1])
            .map(|(p1, p0)| (p1 / p0).ln())
            .collect();
        returns.push(row);
    }
    Ok(ReturnPanel {
        dates: panel.dates[1..].to_vec(),
        tickers: panel.tickers.clone(),
        returns,
    })
}

/// One estimation window per trading day in [start_date, end_date]; each
/// lookback holds exactly `window_len` rows ending the day before the target.
pub fn rolling_windows(
    panel: &ReturnPanel,
    window_len: usize,
    start_date: &str,
    end_date: &str,
) -> Result<Vec<EstimationWindow>, IngestError> {
    let first_target = panel
        .dates
        .iter()
        .position(|d| d.as_str() >= start_date)
        .ok_or_else(|| IngestError::InsufficientHistory {
            needed: window_len,
            start: start_date.to_string(),
            available: 0,
        })?;
    if first_target < window_len {
        return Err(IngestError::InsufficientHistory {
            needed: window_len,
            start: start_date.to_string(),
            available: first_target,
        });
    }
    let mut windows = Vec::new();
    for t in first_target..panel.n_days() {
        if panel.dates[t].as_str() > end_date {
            break;
        }
        windows.push(EstimationWindow {
            as_of_date: panel.dates[t - 1].clone(),
            target_date: panel.dates[t].clone(),
            lookback: panel.returns[t - window_len..t].to_vec(),
            target_return: panel.returns[t].clone(),
        });
    }
    Ok(windows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write_csv(content: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(content.as_bytes()).unwrap();
        f
    }

    #[test]
    fn loads_simple_panel() {
        let f = write_csv(
            "date,SYS,AAA\n2020-01-02,100,50\n2020-01-03,110,51\n2020-01-06,99,49\n",
        );
        let p = load_price_panel(f.path()).unwrap();
        assert_eq!(p.dates.len(), 3);
        assert_eq!(p.tickers, vec!["SYS", "AAA"]);
        assert_eq!(p.prices[1], vec![110.0, 51.0]);
        assert_eq!(p.dropped_rows, 0);
    }

    #[test]
    fn drops_bad_rows_with_count() {
        let f = write_csv(
            "date,SYS,AAA\n2020-01-02,100,50\n2020-01-03,NA,51\n2020-01-06,99,49\n2020-01-07,98,-1\n",
        );
        let p = load_price_panel(f.path()).unwrap();
        assert_eq!(p.dates.len(), 2);
        assert_eq!(p.dropped_rows, 2);
    }

    #[test]
    fn duplicate_date_rejected() {
        let f = write_csv("date,SYS,AAA\n2020-01-02,100,50\n2020-01-02,110,51\n");
        assert!(matches!(load_price_panel(f.path()), Err(IngestError::DuplicateDate(_))));
    }

    #[test]
    fn too_few_rows_rejected() {
        let f = write_csv("date,SYS,AAA\n2020-01-02,100,50\n");
        assert!(matches!(load_price_panel(f.path()), Err(IngestError::EmptyPanel)));
        let f = write_csv("date,SYS\n2020-01-02,100\n2020-01-03,101\n");
        assert!(matches!(load_price_panel(f.path()), Err(IngestError::MalformedFile(_))));
    }

    fn toy_returns(n: usize) -> ReturnPanel {
        ReturnPanel {
            dates: (0..n).map(|i| format!("2020-{:02}-{:02}", 1 + i / 28, 1 + i % 28)).collect(),
            tickers: vec!["SYS".into(), "AAA".into()],
            returns: (0..n).map(|i| vec![i as f64 * 1e-4, -(i as f64) * 1e-4]).collect(),
        }
    }

    #[test]
    fn log_return_values() {
        let panel = PricePanel {
            dates: vec!["d1".into(), "d2".into(), "d3".into(), "d4".into()],
            tickers: vec!["SYS".into()],
            prices: vec![vec![100.0], vec![100.0], vec![110.0], vec![99.0]],
            dropped_rows: 0,
        };
        let r = to_log_returns(&panel).unwrap();
        assert_eq!(r.returns.len(), 3);
        assert_eq!(r.returns[0][0], 0.0);
        assert!((r.returns[1][0] - 0.0953102).abs() < 1e-6);
        assert!((r.returns[2][0] - (99.0f64 / 110.0).ln()).abs() < 1e-12);
        // round trip: cumulated log-returns reconstruct the price ratio
        let total: f64 = r.returns.iter().map(|row| row[0]).sum();
        assert!((total.exp() - 99.0 / 100.0).abs() < 1e-12);
    }

    #[test]
    fn rolling_window_counting() {
        let panel = toy_returns(1310);
        let start = panel.dates[1305].clone();
        let windows = rolling_windows(&panel, 1305, &start, "2999-01-01").unwrap();
        assert_eq!(windows.len(), 5);
        for w in &windows {
            assert_eq!(w.lookback.len(), 1305);
            assert!(w.as_of_date < w.target_date);
        }
        // consecutive windows overlap in all but one row
        assert_eq!(windows[0].lookback[1..], windows[1].lookback[..1304]);
    }

    #[test]
    fn insufficient_history() {
        let panel = toy_returns(100);
        let start = panel.dates[10].clone();
        assert!(matches!(
            rolling_windows(&panel, 1305, &start, "2999-01-01"),
            Err(IngestError::InsufficientHistory { .. })
        ));
    }

    #[test]
    fn deterministic_windows() {
        let panel = toy_returns(300);
        let start = panel.dates[250].clone();
        let a = rolling_windows(&panel, 250, &start, "2999-01-01").unwrap();
        let b = rolling_windows(&panel, 250, &start, "2999-01-01").unwrap();
        assert_eq!(a.len(), b.len());
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.target_date, y.target_date);
            assert_eq!(x.lookback, y.lookback);
        }
    }
}
