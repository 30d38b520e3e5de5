//! End-to-end run on a synthetic three-bank panel: generate prices, run the
//! rolling-window pipeline with the multivariate normal model, then backtest.

use std::io::Write;

use covar_lab::runner::{backtest_report, emit_report, run_pipeline, RunConfig};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

fn main() {
    let dir = std::env::temp_dir().join("covar-lab-toy");
    std::fs::create_dir_all(&dir).unwrap();
    let csv_path = dir.join("prices.csv");

    // correlated GARCH-free returns are enough for a demo panel
    let n_days = 420;
    let tickers = ["SYS", "AAA", "BBB"];
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut prices = vec![100.0; tickers.len()];
    let mut file = std::fs::File::create(&csv_path).unwrap();
    writeln!(file, "date,{}", tickers.join(",")).unwrap();
    for day in 0..n_days {
        let common: f64 = StandardNormal.sample(&mut rng);
        let row: Vec<String> = prices
            .iter_mut()
            .map(|p| {
                let own: f64 = StandardNormal.sample(&mut rng);
                *p *= (0.012 * (0.6 * common + 0.8 * own)).exp();
                format!("{p:.6}")
            })
            .collect();
        writeln!(file, "2023-{:02}-{:02},{}", 1 + day / 28, 1 + day % 28, row.join(",")).unwrap();
    }

    let toml = format!(
        r#"
input_csv = "{}"
system_ticker = "SYS"
models = ["mnormal"]
levels = [[0.05, 0.05]]
window_len = 250
refit_every = 20
output_dir = "{}"
"#,
        csv_path.display(),
        dir.join("out").display()
    );
    let cfg = RunConfig::from_toml(&toml).unwrap();
    let out = run_pipeline(&cfg).expect("pipeline failed");
    println!("pipeline: {} windows, {} failed", out.n_windows, out.n_failed);
    println!("risk table at {}", out.risk_csv.display());

    let results = out.risk_csv.parent().unwrap();
    let bt = backtest_report(results).expect("backtest failed");
    println!("backtest at {}", bt.display());
    for p in emit_report(results).expect("report failed") {
        println!("report at {}", p.display());
    }
}
