//! Backtest and GSIB report generation over pipeline outputs.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::backtest::{
    conditional_subset, dq_test, hit_sequence, loss_la, loss_lm, lr_cc, lr_ind, lr_uc,
};
use crate::gsib::{
    adjusted_score, arpe, gsib_score, min_distance_weights, IndicatorPanel, WeightVector,
    CATEGORIES,
};

#[derive(Debug, Error)]
pub enum RunnerError {
    #[error("bad configuration: {0}")]
    BadConfig(String),
    #[error("{failed} of {total} windows failed (tolerance 5%)")]
    TooManyFailures { failed: usize, total: usize },
    #[error("missing results: {0}")]
    MissingResults(String),
    #[error(transparent)]
    Ingest(#[from] crate::ingest::IngestError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("malformed results file: {0}")]
    Malformed(String),
}

struct RiskRow {
    date: String,
    ticker: String,
    model: String,
    alpha: f64,
    beta: f64,
    var: f64,
    covar: f64,
}

fn read_risk_csv(path: &Path) -> Result<Vec<RiskRow>, RunnerError> {
    if !path.exists() {
        return Err(RunnerError::MissingResults(path.display().to_string()));
    }
    let mut rdr = csv::Reader::from_path(path).map_err(|e| RunnerError::Malformed(e.to_string()))?;
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| RunnerError::Malformed(e.to_string()))?;
        let f = |i: usize| -> Result<f64, RunnerError> {
            rec[i].parse().map_err(|_| RunnerError::Malformed(format!("field {i} in {rec:?}")))
        };
        rows.push(RiskRow {
            date: rec[0].to_string(),
            ticker: rec[1].to_string(),
            model: rec[2].to_string(),
            alpha: f(3)?,
            beta: f(4)?,
            var: f(5)?,
            covar: f(6)?,
        });
    }
    Ok(rows)
}

fn read_returns_csv(path: &Path) -> Result<(Vec<String>, BTreeMap<String, Vec<f64>>), RunnerError> {
    if !path.exists() {
        return Err(RunnerError::MissingResults(path.display().to_string()));
    }
    let mut rdr = csv::Reader::from_path(path).map_err(|e| RunnerError::Malformed(e.to_string()))?;
    let tickers: Vec<String> =
        rdr.headers().map_err(|e| RunnerError::Malformed(e.to_string()))?.iter().skip(1).map(str::to_string).collect();
    let mut by_date = BTreeMap::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| RunnerError::Malformed(e.to_string()))?;
        let vals: Result<Vec<f64>, _> = rec.iter().skip(1).map(str::parse::<f64>).collect();
        by_date.insert(
            rec[0].to_string(),
            vals.map_err(|e| RunnerError::Malformed(e.to_string()))?,
        );
    }
    Ok((tickers, by_date))
}

/// Run the two-stage backtest battery over `risk.csv` + `returns.csv` in a
/// results directory. The system ticker is read from the manifest. Writes
/// `backtest.csv` with one row per (ticker, model, alpha, beta, stage, test).
pub fn backtest_report(results_dir: &Path) -> Result<PathBuf, RunnerError> {
    let rows = read_risk_csv(&results_dir.join("risk.csv"))?;
    let (tickers, returns) = read_returns_csv(&results_dir.join("returns.csv"))?;
    let manifest: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(results_dir.join("manifest.json"))
            .map_err(|_| RunnerError::MissingResults("manifest.json".into()))?,
    )
    .map_err(|e| RunnerError::Malformed(e.to_string()))?;
    let system = manifest["system_ticker"]
        .as_str()
        .ok_or_else(|| RunnerError::Malformed("manifest lacks system_ticker".into()))?;
    let sys_col = tickers
        .iter()
        .position(|t| t == system)
        .ok_or_else(|| RunnerError::Malformed("system ticker not in returns.csv".into()))?;

    // group forecast paths by (ticker, model, alpha, beta)
    let mut groups: BTreeMap<(String, String, String, String), Vec<&RiskRow>> = BTreeMap::new();
    for r in &rows {
        groups
            .entry((r.ticker.clone(), r.model.clone(), format!("{}", r.alpha), format!("{}", r.beta)))
            .or_default()
            .push(r);
    }

    let mut out = String::from("ticker,model,alpha,beta,stage,test,statistic,df,p_value\n");
    for ((ticker, model, alpha_s, beta_s), mut g) in groups {
        g.sort_by(|a, b| a.date.cmp(&b.date));
        let bank_col = match tickers.iter().position(|t| *t == ticker) {
            Some(c) => c,
            None => continue,
        };
        let mut realized_bank = Vec::new();
        let mut realized_sys = Vec::new();
        let mut var_path = Vec::new();
        let mut covar_path = Vec::new();
        for r in &g {
            if let Some(row) = returns.get(&r.date) {
                realized_bank.push(row[bank_col]);
                realized_sys.push(row[sys_col]);
                var_path.push(r.var);
                covar_path.push(r.covar);
            }
        }
        if realized_bank.len() < 10 {
            continue;
        }
        let alpha: f64 = alpha_s.parse().unwrap();
        let beta: f64 = beta_s.parse().unwrap();
        let mut push = |stage: &str, test: &str, stat: f64, df: usize, p: Option<f64>| {
            out.push_str(&format!(
                "{ticker},{model},{alpha},{beta},{stage},{test},{stat:.10},{df},{}\n",
                p.map(|v| format!("{v:.10}")).unwrap_or_default()
            ));
        };

        let hits = hit_sequence(&realized_bank, &var_path, alpha).unwrap();
        for (name, r) in [("uc", lr_uc(&hits)), ("ind", lr_ind(&hits)), ("cc", lr_cc(&hits))] {
            push("var", name, r.statistic, r.df, Some(r.p_value));
        }
        if hits.n() > 6 {
            let r = dq_test(&hits, &var_path, 4);
            push("var", "dq", r.statistic, r.df, Some(r.p_value));
        }
        push("var", "lm", loss_lm(&realized_bank, &var_path).unwrap(), 0, None);
        push("var", "la", loss_la(&realized_bank, &var_path, alpha).unwrap(), 0, None);

        if let Ok(sub) = conditional_subset(&hits, &realized_sys, &covar_path, beta) {
            for (name, r) in [("uc", lr_uc(&sub))] {
                push("covar", name, r.statistic, r.df, Some(r.p_value));
            }
            if sub.n() >= 2 {
                let cc = lr_cc(&sub);
                push("covar", "cc", cc.statistic, cc.df, Some(cc.p_value));
            }
            // losses restricted to the distress days
            let mut sys_d = Vec::new();
            let mut cov_d = Vec::new();
            for t in 0..hits.n() {
                if hits.bits[t] == 1 {
                    sys_d.push(realized_sys[t]);
                    cov_d.push(covar_path[t]);
                }
            }
            push("covar", "lm", loss_lm(&sys_d, &cov_d).unwrap(), 0, None);
            push("covar", "la", loss_la(&sys_d, &cov_d, beta).unwrap(), 0, None);
            if sub.low_power() {
                push("covar", "low_power", 1.0, 0, None);
            }
        }
    }
    let path = results_dir.join("backtest.csv");
    std::fs::write(&path, out)?;
    Ok(path)
}

/// Summarize pipeline outputs: per-model mean p-values and losses from
/// `backtest.csv`, and cross-bank average CoVaR paths from `risk.csv`.
pub fn emit_report(results_dir: &Path) -> Result<Vec<PathBuf>, RunnerError> {
    let risk_path = results_dir.join("risk.csv");
    let rows = read_risk_csv(&risk_path)?;
    if rows.is_empty() {
        return Err(RunnerError::MissingResults("risk.csv holds no rows".into()));
    }
    let bt_path = results_dir.join("backtest.csv");
    if !bt_path.exists() {
        return Err(RunnerError::MissingResults("backtest.csv (run the backtest step first)".into()));
    }

    // summary: mean statistic / p-value per (model, alpha, beta, stage, test)
    let mut acc: BTreeMap<(String, String, String, String, String), (f64, f64, usize, usize)> =
        BTreeMap::new();
    let mut rdr = csv::Reader::from_path(&bt_path).map_err(|e| RunnerError::Malformed(e.to_string()))?;
    for rec in rdr.records() {
        let rec = rec.map_err(|e| RunnerError::Malformed(e.to_string()))?;
        let key = (
            rec[1].to_string(),
            rec[2].to_string(),
            rec[3].to_string(),
            rec[4].to_string(),
            rec[5].to_string(),
        );
        let stat: f64 = rec[6].parse().unwrap_or(f64::NAN);
        let p: f64 = rec[8].parse().unwrap_or(f64::NAN);
        let e = acc.entry(key).or_insert((0.0, 0.0, 0, 0));
        e.0 += stat;
        e.2 += 1;
        if p.is_finite() {
            e.1 += p;
            e.3 += 1;
        }
    }
    let mut summary = String::from("model,alpha,beta,stage,test,mean_statistic,mean_p_value,n_banks\n");
    for ((model, alpha, beta, stage, test), (s, p, n, np)) in acc {
        let mean_p = if np > 0 { format!("{:.10}", p / np as f64) } else { String::new() };
        summary.push_str(&format!(
            "{model},{alpha},{beta},{stage},{test},{:.10},{mean_p},{n}\n",
            s / n as f64
        ));
    }
    let summary_path = results_dir.join("summary.csv");
    std::fs::write(&summary_path, summary)?;

    // cross-bank averages per (date, model, alpha, beta)
    let mut avg: BTreeMap<(String, String, String, String), (f64, f64, usize)> = BTreeMap::new();
    for r in &rows {
        let key =
            (r.date.clone(), r.model.clone(), format!("{}", r.alpha), format!("{}", r.beta));
        let e = avg.entry(key).or_insert((0.0, 0.0, 0));
        e.0 += r.covar;
        e.1 += r.var;
        e.2 += 1;
    }
    let mut avg_out = String::from("date,model,alpha,beta,avg_covar,avg_var,n_banks\n");
    for ((date, model, alpha, beta), (c, v, n)) in avg {
        avg_out.push_str(&format!(
            "{date},{model},{alpha},{beta},{:.10},{:.10},{n}\n",
            c / n as f64,
            v / n as f64
        ));
    }
    let avg_path = results_dir.join("avg_covar.csv");
    std::fs::write(&avg_path, avg_out)?;
    Ok(vec![summary_path, avg_path])
}

/// Read a `year,ticker,size,...,cja` indicator CSV.
pub fn read_indicator_panel(path: &Path) -> Result<IndicatorPanel, RunnerError> {
    let mut rdr = csv::Reader::from_path(path).map_err(|e| RunnerError::Malformed(e.to_string()))?;
    let mut years = Vec::new();
    let mut banks = Vec::new();
    let mut categories: [Vec<f64>; 5] = Default::default();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| RunnerError::Malformed(e.to_string()))?;
        if rec.len() != 7 {
            return Err(RunnerError::Malformed(format!("expected 7 columns, got {}", rec.len())));
        }
        years.push(rec[0].parse().map_err(|_| RunnerError::Malformed("bad year".into()))?);
        banks.push(rec[1].to_string());
        for c in 0..5 {
            categories[c].push(
                rec[c + 2]
                    .parse()
                    .map_err(|_| RunnerError::Malformed(format!("bad {} value", CATEGORIES[c])))?,
            );
        }
    }
    let panel = IndicatorPanel { years, banks, categories };
    panel.validate().map_err(|e| RunnerError::Malformed(e.to_string()))?;
    Ok(panel)
}

/// GSIB comparison table: equal-weight score, target score, minimum-distance
/// weights and the adjusted score, one block per year. The scores CSV is
/// `year,ticker,score` with delta-CoVaR-based targets in basis points.
pub fn gsib_report(
    indicators: &Path,
    scores: &Path,
    out_dir: &Path,
) -> Result<Vec<PathBuf>, RunnerError> {
    let panel = read_indicator_panel(indicators)?;
    let mut rdr = csv::Reader::from_path(scores).map_err(|e| RunnerError::Malformed(e.to_string()))?;
    let mut target_map: BTreeMap<(i32, String), f64> = BTreeMap::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| RunnerError::Malformed(e.to_string()))?;
        let year: i32 = rec[0].parse().map_err(|_| RunnerError::Malformed("bad year".into()))?;
        let score: f64 = rec[2].parse().map_err(|_| RunnerError::Malformed("bad score".into()))?;
        target_map.insert((year, rec[1].to_string()), score);
    }
    let target: Vec<f64> = panel
        .years
        .iter()
        .zip(&panel.banks)
        .map(|(y, b)| {
            target_map
                .get(&(*y, b.clone()))
                .copied()
                .ok_or_else(|| RunnerError::Malformed(format!("no target score for {b} in {y}")))
        })
        .collect::<Result<_, _>>()?;

    let equal = gsib_score(&panel, &WeightVector::equal());
    let w_min = min_distance_weights(&panel, &target)
        .map_err(|e| RunnerError::Malformed(e.to_string()))?;
    let adjusted = adjusted_score(&panel, &w_min);
    let arpe_equal = arpe(&target, &equal).map_err(|e| RunnerError::Malformed(e.to_string()))?;
    let arpe_min = arpe(&target, &adjusted).map_err(|e| RunnerError::Malformed(e.to_string()))?;

    std::fs::create_dir_all(out_dir)?;
    let mut table = String::from(
        "year,ticker,size,interconnectedness,substitutability,complexity,cja,score,dcovar_score,ad_score\n",
    );
    for r in 0..panel.n_rows() {
        table.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{}\n",
            panel.years[r],
            panel.banks[r],
            panel.categories[0][r],
            panel.categories[1][r],
            panel.categories[2][r],
            panel.categories[3][r],
            panel.categories[4][r],
            equal[r],
            target[r],
            adjusted[r]
        ));
    }
    let table_path = out_dir.join("gsib.csv");
    std::fs::write(&table_path, table)?;

    let mut weights = String::from(
        "w_size,w_interconnectedness,w_substitutability,w_complexity,w_cja,arpe_equal,arpe_min\n",
    );
    weights.push_str(&format!(
        "{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6}\n",
        w_min.w[0], w_min.w[1], w_min.w[2], w_min.w[3], w_min.w[4], arpe_equal, arpe_min
    ));
    let weights_path = out_dir.join("gsib_weights.csv");
    std::fs::write(&weights_path, weights)?;
    Ok(vec![table_path, weights_path])
}
