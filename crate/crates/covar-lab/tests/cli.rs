//! CLI surface tests: the three subcommands against generated inputs.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::Command;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

fn bin() -> PathBuf {
    let mut p = std::env::current_exe().unwrap();
    p.pop();
    if p.ends_with("deps") {
        p.pop();
    }
    p.join("covar-lab")
}

fn write_prices(dir: &Path, n_days: usize) -> PathBuf {
    let csv_path = dir.join("prices.csv");
    let tickers = ["SYS", "AAA", "BBB"];
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut prices = vec![100.0f64; tickers.len()];
    let mut file = std::fs::File::create(&csv_path).unwrap();
    writeln!(file, "date,{}", tickers.join(",")).unwrap();
    for day in 0..n_days {
        let common: f64 = StandardNormal.sample(&mut rng);
        let row: Vec<String> = prices
            .iter_mut()
            .map(|p| {
                let own: f64 = StandardNormal.sample(&mut rng);
                *p *= (0.011 * (0.5 * common + 0.85 * own)).exp();
                format!("{p:.6}")
            })
            .collect();
        writeln!(file, "2022-{:02}-{:02},{}", 1 + day / 28, 1 + day % 28, row.join(","))
            .unwrap();
    }
    csv_path
}

#[test]
fn run_backtest_and_gsib_subcommands() {
    let dir = tempfile::tempdir().unwrap();
    let prices = write_prices(dir.path(), 300);
    let out_dir = dir.path().join("out");
    let cfg_path = dir.path().join("run.toml");
    std::fs::write(
        &cfg_path,
        format!(
            r#"
input_csv = "{}"
system_ticker = "SYS"
models = ["mnormal"]
levels = [[0.05, 0.05]]
window_len = 250
refit_every = 40
output_dir = "{}"
"#,
            prices.display(),
            out_dir.display()
        ),
    )
    .unwrap();

    let st = Command::new(bin()).args(["run", "--config"]).arg(&cfg_path).status().unwrap();
    assert!(st.success(), "run subcommand failed");
    assert!(out_dir.join("risk.csv").exists());
    assert!(out_dir.join("returns.csv").exists());
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out_dir.join("manifest.json")).unwrap())
            .unwrap();
    assert!(manifest["config_hash"].is_string());
    assert!(manifest["seed"].is_number());

    let st = Command::new(bin())
        .args(["backtest", "--summary", "--results"])
        .arg(&out_dir)
        .status()
        .unwrap();
    assert!(st.success(), "backtest subcommand failed");
    assert!(out_dir.join("backtest.csv").exists());
    assert!(out_dir.join("summary.csv").exists());
    assert!(out_dir.join("avg_covar.csv").exists());

    // flip-sign changes the sign of every reported value
    let flipped_dir = dir.path().join("flipped");
    let cfg2 = std::fs::read_to_string(&cfg_path)
        .unwrap()
        .replace(&out_dir.display().to_string(), &flipped_dir.display().to_string());
    let cfg2_path = dir.path().join("run2.toml");
    std::fs::write(&cfg2_path, cfg2).unwrap();
    let st = Command::new(bin())
        .args(["run", "--flip-sign", "--config"])
        .arg(&cfg2_path)
        .status()
        .unwrap();
    assert!(st.success());
    let plain = std::fs::read_to_string(out_dir.join("risk.csv")).unwrap();
    let flipped = std::fs::read_to_string(flipped_dir.join("risk.csv")).unwrap();
    let val = |line: &str, col: usize| -> f64 { line.split(',').nth(col).unwrap().parse().unwrap() };
    for (a, b) in plain.lines().skip(1).zip(flipped.lines().skip(1)) {
        for col in [5, 6] {
            assert!((val(a, col) + val(b, col)).abs() < 1e-12);
        }
    }

    // gsib subcommand on a small hand panel
    let ind_path = dir.path().join("indicators.csv");
    std::fs::write(
        &ind_path,
        "year,ticker,size,interconnectedness,substitutability,complexity,cja\n\
         2024,AAA,100,50,10,40,30\n\
         2024,BBB,300,150,30,120,90\n\
         2024,CCC,600,300,60,240,180\n",
    )
    .unwrap();
    let scores_path = dir.path().join("scores.csv");
    std::fs::write(
        &scores_path,
        "year,ticker,score\n2024,AAA,1000\n2024,BBB,3000\n2024,CCC,6000\n",
    )
    .unwrap();
    let gsib_out = dir.path().join("gsib");
    let st = Command::new(bin())
        .args(["gsib", "--indicators"])
        .arg(&ind_path)
        .arg("--scores")
        .arg(&scores_path)
        .arg("--out")
        .arg(&gsib_out)
        .status()
        .unwrap();
    assert!(st.success(), "gsib subcommand failed");
    let table = std::fs::read_to_string(gsib_out.join("gsib.csv")).unwrap();
    assert!(table.lines().count() == 4);
    let weights = std::fs::read_to_string(gsib_out.join("gsib_weights.csv")).unwrap();
    // the targets are exactly proportional to the indicators, so any simplex
    // weight vector reproduces them and the fitted ARPE must be ~0
    let last = weights.lines().nth(1).unwrap();
    let arpe_min: f64 = last.split(',').nth(6).unwrap().parse().unwrap();
    assert!(arpe_min < 1e-6, "arpe_min {arpe_min}");
}

#[test]
fn run_fails_cleanly_on_missing_input() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = dir.path().join("bad.toml");
    std::fs::write(
        &cfg_path,
        format!(
            "input_csv = \"{}\"\nsystem_ticker = \"SYS\"\nmodels = [\"mnormal\"]\noutput_dir = \"{}\"\n",
            dir.path().join("nope.csv").display(),
            dir.path().join("out").display()
        ),
    )
    .unwrap();
    let out = Command::new(bin()).args(["run", "--config"]).arg(&cfg_path).output().unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("error"));
}
