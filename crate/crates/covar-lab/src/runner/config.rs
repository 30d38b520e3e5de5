//! Run configuration, parsed from TOML.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ModelKind {
    MNormal,
    Mgh,
    Mnts,
    Copula,
}

impl ModelKind {
    pub fn label(&self) -> &'static str {
        match self {
            ModelKind::MNormal => "mnormal",
            ModelKind::Mgh => "mgh",
            ModelKind::Mnts => "mnts",
            ModelKind::Copula => "copula",
        }
    }
}

fn default_window() -> usize {
    1305
}

fn default_seed() -> u64 {
    0
}

fn default_levels() -> Vec<[f64; 2]> {
    // the evaluation grid: (alpha, beta) pairs; the 0.5 median state is
    // always computed internally for delta CoVaR
    vec![[0.05, 0.05], [0.05, 0.025], [0.025, 0.05], [0.01, 0.05]]
}

fn default_refit() -> usize {
    1
}

fn default_fft() -> usize {
    1 << 13
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunConfig {
    /// price CSV with header `date,<system>,<bank>,...`
    pub input_csv: String,
    /// ticker treated as the system; must be a CSV column
    pub system_ticker: String,
    pub models: Vec<ModelKind>,
    /// (alpha, beta) pairs
    #[serde(default = "default_levels")]
    pub levels: Vec<[f64; 2]>,
    #[serde(default = "default_window")]
    pub window_len: usize,
    pub start_date: String,
    pub end_date: String,
    #[serde(default = "default_seed")]
    pub seed: u64,
    /// worker threads; 0 lets rayon decide. Overridden by COVAR_LAB_WORKERS.
    #[serde(default)]
    pub workers: usize,
    pub output_dir: String,
    /// re-estimate dependence every N windows (margins refit every window)
    #[serde(default = "default_refit")]
    pub refit_every: usize,
    /// FFT grid size for characteristic-function inversions
    #[serde(default = "default_fft")]
    pub fft_points: usize,
    /// emit values with flipped sign (display convention)
    #[serde(default)]
    pub flip_sign: bool,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, toml::de::Error> {
        let cfg: RunConfig = toml::from_str(text)?;
        cfg.validate();
        Ok(cfg)
    }

    pub fn validate(&self) {
        assert!(!self.models.is_empty(), "model set must be nonempty");
        for [a, b] in &self.levels {
            assert!(*a > 0.0 && *a < 1.0 && *b > 0.0 && *b < 1.0, "levels must be in (0,1)");
        }
        assert!(self.window_len >= 250, "window too short");
        assert!(self.refit_every >= 1);
    }

    pub fn effective_workers(&self) -> usize {
        std::env::var("COVAR_LAB_WORKERS")
            .ok()
            .and_then(|v| v.parse().ok())
            .unwrap_or(self.workers)
    }

    /// Hash of the canonical serialized config, recorded in the manifest.
    pub fn digest(&self) -> String {
        use sha2::{Digest, Sha256};
        let canonical = toml::to_string(self).expect("config serializes");
        let mut h = Sha256::new();
        h.update(canonical.as_bytes());
        format!("{:x}", h.finalize())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_minimal_toml() {
        let cfg = RunConfig::from_toml(
            r#"
input_csv = "prices.csv"
system_ticker = "SYS"
models = ["MNormal", "Copula"]
start_date = "2019-01-01"
end_date = "2019-12-31"
output_dir = "out"
"#,
        )
        .unwrap();
        assert_eq!(cfg.window_len, 1305);
        assert_eq!(cfg.models, vec![ModelKind::MNormal, ModelKind::Copula]);
        assert_eq!(cfg.levels.len(), 4);
        assert!(!cfg.flip_sign);
    }

    #[test]
    fn digest_is_stable_and_sensitive() {
        let base = r#"
input_csv = "prices.csv"
system_ticker = "SYS"
models = ["MNormal"]
start_date = "2019-01-01"
end_date = "2019-12-31"
output_dir = "out"
"#;
        let a = RunConfig::from_toml(base).unwrap().digest();
        let b = RunConfig::from_toml(base).unwrap().digest();
        assert_eq!(a, b);
        let c = RunConfig::from_toml(&base.replace("SYS", "XYZ")).unwrap().digest();
        assert_ne!(a, c);
    }
}
