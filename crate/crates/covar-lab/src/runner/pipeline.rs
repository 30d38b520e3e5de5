//! The rolling-window estimation pipeline.

use std::path::PathBuf;

use rayon::prelude::*;

use crate::covar::{
    covar_eq_gaussian, covar_leq_copula, covar_leq_mixture, to_return_space, RiskRecord,
};
use crate::garch::{fit_gjr, GarchFit, Likelihood};
use crate::ingest::{load_price_panel, rolling_windows, to_log_returns, EstimationWindow};
use crate::mvmodels::{fit_em, EmConfig, MixtureFamily, MixtureFit};
use crate::unidist::{InnovationDist, SkewT};

use super::config::{ModelKind, RunConfig};
use super::reports::RunnerError;

#[derive(Debug)]
pub struct PipelineOutput {
    pub risk_csv: PathBuf,
    pub returns_csv: PathBuf,
    pub manifest: PathBuf,
    pub n_windows: usize,
    pub n_failed: usize,
}

/// Everything fitted once per window and shared across its risk queries.
struct WindowFits {
    qmle: Vec<GarchFit>,
    skewt: Vec<GarchFit>,
    mixtures: Vec<(MixtureFamily, MixtureFit)>,
}

fn mixture_families(models: &[ModelKind]) -> Vec<MixtureFamily> {
    models
        .iter()
        .filter_map(|m| match m {
            ModelKind::MNormal => Some(MixtureFamily::MNormal),
            ModelKind::Mgh => Some(MixtureFamily::Mgh),
            ModelKind::Mnts => Some(MixtureFamily::Mnts),
            ModelKind::Copula => None,
        })
        .collect()
}

/// Standardized residual matrix with columns in ticker order; fits whose AR
/// term was dropped keep one extra leading residual, so align on the common
/// tail length.
fn residual_matrix(fits: &[GarchFit]) -> nalgebra::DMatrix<f64> {
    let len = fits.iter().map(|f| f.residuals.len()).min().unwrap();
    let mut m = nalgebra::DMatrix::zeros(len, fits.len());
    for (j, f) in fits.iter().enumerate() {
        let off = f.residuals.len() - len;
        for i in 0..len {
            m[(i, j)] = f.residuals[off + i];
        }
    }
    m
}

fn fit_window(
    window: &EstimationWindow,
    cfg: &RunConfig,
    skip_dependence: bool,
) -> Result<WindowFits, String> {
    let n_tickers = window.lookback[0].len();
    let series: Vec<Vec<f64>> = (0..n_tickers)
        .map(|k| window.lookback.iter().map(|row| row[k]).collect())
        .collect();
    let need_qmle = !mixture_families(&cfg.models).is_empty();
    let need_skewt = cfg.models.contains(&ModelKind::Copula);
    let qmle: Vec<GarchFit> = if need_qmle {
        series
            .iter()
            .map(|s| fit_gjr(s, Likelihood::Normal).map_err(|e| e.to_string()))
            .collect::<Result<_, _>>()?
    } else {
        Vec::new()
    };
    let skewt: Vec<GarchFit> = if need_skewt {
        series
            .iter()
            .map(|s| fit_gjr(s, Likelihood::SkewT).map_err(|e| e.to_string()))
            .collect::<Result<_, _>>()?
    } else {
        Vec::new()
    };
    let mut mixtures = Vec::new();
    if need_qmle && !skip_dependence {
        let resid = residual_matrix(&qmle);
        for family in mixture_families(&cfg.models) {
            let fit = fit_em(&resid, family, &EmConfig::default()).map_err(|e| e.to_string())?;
            mixtures.push((family, fit));
        }
    }
    Ok(WindowFits { qmle, skewt, mixtures })
}

fn mixture_rows(
    window: &EstimationWindow,
    fits: &WindowFits,
    cfg: &RunConfig,
    tickers: &[String],
    sys_idx: usize,
) -> Result<Vec<RiskRecord>, String> {
    let mut rows = Vec::new();
    let sys_fit = &fits.qmle[sys_idx];
    let sys_sigma = sys_fit.forecast_sigma();
    for (family, mixture) in &fits.mixtures {
        let model = match family {
            MixtureFamily::MNormal => "mnormal",
            MixtureFamily::Mgh => "mgh",
            MixtureFamily::Mnts => "mnts",
        };
        for j in 0..tickers.len() {
            if j == sys_idx {
                continue;
            }
            let bank_fit = &fits.qmle[j];
            let bank_sigma = bank_fit.forecast_sigma();
            let mut law = mixture.bivariate_margin(sys_idx, j).map_err(|e| e.to_string())?;
            law.fft_points = cfg.fft_points;
            let bank_margin = law.margin_y();
            for [alpha, beta] in &cfg.levels {
                let q_bank = bank_margin.quantile(*alpha);
                let var = bank_fit.var_forecast(bank_sigma, q_bank);
                let c = covar_leq_mixture(&law, *alpha, *beta).map_err(|e| e.to_string())?;
                let c_med = covar_leq_mixture(&law, 0.5, *beta).map_err(|e| e.to_string())?;
                let covar = to_return_space(c, sys_fit, sys_sigma);
                let covar_median = to_return_space(c_med, sys_fit, sys_sigma);
                rows.push(RiskRecord {
                    date: window.target_date.clone(),
                    ticker: tickers[j].clone(),
                    model: model.to_string(),
                    alpha: *alpha,
                    beta: *beta,
                    var,
                    covar,
                    covar_median,
                    delta_covar: covar - covar_median,
                });
                if *family == MixtureFamily::MNormal {
                    let rho = law.correlation();
                    let c_eq = covar_eq_gaussian(rho, *alpha, *beta);
                    let c_eq_med = covar_eq_gaussian(rho, 0.5, *beta);
                    let covar_eq = to_return_space(c_eq, sys_fit, sys_sigma);
                    let covar_eq_med = to_return_space(c_eq_med, sys_fit, sys_sigma);
                    rows.push(RiskRecord {
                        date: window.target_date.clone(),
                        ticker: tickers[j].clone(),
                        model: "mnormal-eq".to_string(),
                        alpha: *alpha,
                        beta: *beta,
                        var,
                        covar: covar_eq,
                        covar_median: covar_eq_med,
                        delta_covar: covar_eq - covar_eq_med,
                    });
                }
            }
        }
    }
    Ok(rows)
}

fn copula_rows(
    window: &EstimationWindow,
    fits: &WindowFits,
    cfg: &RunConfig,
    tickers: &[String],
    sys_idx: usize,
) -> Result<Vec<RiskRecord>, String> {
    let mut rows = Vec::new();
    let sys_fit = &fits.skewt[sys_idx];
    let sys_sigma = sys_fit.forecast_sigma();
    let sys_shape = sys_fit.shape.ok_or("missing system skew-t shape")?;
    let sys_margin = InnovationDist::skew_t(sys_shape.nu, sys_shape.xi);
    let sys_dist = SkewT::new(sys_shape.nu, sys_shape.xi);
    let len = fits.skewt.iter().map(|f| f.residuals.len()).min().unwrap();
    for j in 0..tickers.len() {
        if j == sys_idx {
            continue;
        }
        let bank_fit = &fits.skewt[j];
        let bank_sigma = bank_fit.forecast_sigma();
        let bank_shape = bank_fit.shape.ok_or("missing bank skew-t shape")?;
        let bank_dist = SkewT::new(bank_shape.nu, bank_shape.xi);
        let sys_off = sys_fit.residuals.len() - len;
        let bank_off = bank_fit.residuals.len() - len;
        let pseudo: Vec<(f64, f64)> = (0..len)
            .map(|t| {
                (
                    sys_dist.cdf(sys_fit.residuals[sys_off + t]).clamp(1e-10, 1.0 - 1e-10),
                    bank_dist.cdf(bank_fit.residuals[bank_off + t]).clamp(1e-10, 1.0 - 1e-10),
                )
            })
            .collect();
        let copula = crate::copulas::select_by_aic(&pseudo).map_err(|e| e.to_string())?;
        for [alpha, beta] in &cfg.levels {
            let q_bank = bank_dist.quantile(*alpha);
            let var = bank_fit.var_forecast(bank_sigma, q_bank);
            let c = covar_leq_copula(&copula, &sys_margin, *alpha, *beta)
                .map_err(|e| e.to_string())?;
            let c_med = covar_leq_copula(&copula, &sys_margin, 0.5, *beta)
                .map_err(|e| e.to_string())?;
            let covar = to_return_space(c, sys_fit, sys_sigma);
            let covar_median = to_return_space(c_med, sys_fit, sys_sigma);
            rows.push(RiskRecord {
                date: window.target_date.clone(),
                ticker: tickers[j].clone(),
                model: "copula".to_string(),
                alpha: *alpha,
                beta: *beta,
                var,
                covar,
                covar_median,
                delta_covar: covar - covar_median,
            });
        }
    }
    Ok(rows)
}

/// One chunk of consecutive windows sharing a dependence fit (the first
/// window's), re-estimated every `refit_every` windows.
fn chunk_rows(
    chunk: &[EstimationWindow],
    cfg: &RunConfig,
    tickers: &[String],
    sys_idx: usize,
) -> Vec<Result<Vec<RiskRecord>, String>> {
    let anchor_fits = match fit_window(&chunk[0], cfg, false) {
        Ok(f) => f,
        Err(e) => return chunk.iter().map(|_| Err(e.clone())).collect(),
    };
    chunk
        .iter()
        .enumerate()
        .map(|(i, window)| {
            // margins refit per window; dependence reused from the anchor
            let fits = if i == 0 {
                None
            } else {
                match fit_window(window, cfg, true) {
                    Ok(mut f) => {
                        f.mixtures = anchor_fits.mixtures.clone();
                        Some(f)
                    }
                    Err(e) => return Err(e),
                }
            };
            let fits = fits.as_ref().unwrap_or(&anchor_fits);
            let mut rows = mixture_rows(window, fits, cfg, tickers, sys_idx)?;
            if cfg.models.contains(&ModelKind::Copula) {
                rows.extend(copula_rows(window, fits, cfg, tickers, sys_idx)?);
            }
            Ok(rows)
        })
        .collect()
}

fn write_risk_csv(path: &PathBuf, rows: &[RiskRecord], flip_sign: bool) -> std::io::Result<()> {
    use std::io::Write;
    let mut f = std::fs::File::create(path)?;
    writeln!(f, "date,ticker,model,alpha,beta,var,covar,covar_median,delta_covar")?;
    let s = if flip_sign { -1.0 } else { 1.0 };
    for r in rows {
        writeln!(
            f,
            "{},{},{},{},{},{:.10},{:.10},{:.10},{:.10}",
            r.date,
            r.ticker,
            r.model,
            r.alpha,
            r.beta,
            s * r.var,
            s * r.covar,
            s * r.covar_median,
            s * r.delta_covar
        )?;
    }
    Ok(())
}

/// Run the full pipeline described by the config. Per-window failures are
/// tolerated up to 5% of all windows; beyond that the run fails.
pub fn run_pipeline(cfg: &RunConfig) -> Result<PipelineOutput, RunnerError> {
    cfg.validate();
    let panel = load_price_panel(std::path::Path::new(&cfg.input_csv))?;
    let sys_idx = panel
        .tickers
        .iter()
        .position(|t| *t == cfg.system_ticker)
        .ok_or_else(|| RunnerError::BadConfig(format!("unknown system ticker {}", cfg.system_ticker)))?;
    let returns = to_log_returns(&panel)?;
    let windows = rolling_windows(&returns, cfg.window_len, &cfg.start_date, &cfg.end_date)?;
    if windows.is_empty() {
        return Err(RunnerError::BadConfig("evaluation span holds no trading days".into()));
    }
    let tickers = returns.tickers.clone();

    let chunks: Vec<&[EstimationWindow]> = windows.chunks(cfg.refit_every).collect();
    let run = || -> Vec<Vec<Result<Vec<RiskRecord>, String>>> {
        chunks
            .par_iter()
            .map(|chunk| chunk_rows(chunk, cfg, &tickers, sys_idx))
            .collect()
    };
    let results: Vec<Result<Vec<RiskRecord>, String>> = match cfg.effective_workers() {
        0 => run().into_iter().flatten().collect(),
        n => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| RunnerError::BadConfig(e.to_string()))?
            .install(run)
            .into_iter()
            .flatten()
            .collect(),
    };

    let n_windows = windows.len();
    let mut rows: Vec<RiskRecord> = Vec::new();
    let mut n_failed = 0usize;
    let mut failures: Vec<String> = Vec::new();
    for (i, res) in results.into_iter().enumerate() {
        match res {
            Ok(mut r) => rows.append(&mut r),
            Err(e) => {
                n_failed += 1;
                failures.push(format!("{} {}", windows[i].target_date, e));
            }
        }
    }
    for f in failures.iter().take(10) {
        eprintln!("window failed: {f}");
    }
    if n_failed * 20 > n_windows {
        return Err(RunnerError::TooManyFailures { failed: n_failed, total: n_windows });
    }
    rows.sort_by(|a, b| {
        (&a.date, &a.ticker, &a.model, a.alpha, a.beta)
            .partial_cmp(&(&b.date, &b.ticker, &b.model, b.alpha, b.beta))
            .unwrap()
    });

    let out = std::path::Path::new(&cfg.output_dir);
    std::fs::create_dir_all(out)?;
    let risk_csv = out.join("risk.csv");
    write_risk_csv(&risk_csv, &rows, cfg.flip_sign)?;
    let returns_csv = out.join("returns.csv");
    std::fs::write(&returns_csv, returns.to_csv())?;
    let manifest = out.join("manifest.json");
    let manifest_body = serde_json::json!({
        "config_hash": cfg.digest(),
        "seed": cfg.seed,
        "version": env!("CARGO_PKG_VERSION"),
        "system_ticker": cfg.system_ticker,
        "models": cfg.models.iter().map(|m| m.label()).collect::<Vec<_>>(),
        "levels": cfg.levels,
        "window_len": cfg.window_len,
        "n_windows": n_windows,
        "n_failed": n_failed,
    });
    std::fs::write(&manifest, serde_json::to_string_pretty(&manifest_body).unwrap())?;
    Ok(PipelineOutput { risk_csv, returns_csv, manifest, n_windows, n_failed })
}
