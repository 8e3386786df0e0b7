//! Run configuration read from flat TOML with dotted keys.
//!
//! ```toml
//! model.k = 7
//! model.m = 4
//! model.lambda.mean = 3.0
//! model.lambda.sin = [[1, -2.0]]
//! model.mu.mean = 5.0
//! model.mu.sin = [[1, 4.0]]
//! series.q = 10
//! ```
//!
//! Every section but `model` has defaults. Unknown keys are rejected.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::busy::BusyOracleConfig;
use crate::error::{Error, Result};
use crate::model::{ModelSpec, PhaseIndex, RateFunction};
use crate::oracle::OracleConfig;
use crate::series::QuadratureSpec;
use crate::waiting::WaitKind;

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RateConfig {
    pub mean: f64,
    /// `[harmonic, coefficient]` pairs for `cos 2πht`.
    #[serde(default)]
    pub cos: Vec<(u32, f64)>,
    /// `[harmonic, coefficient]` pairs for `sin 2πht`.
    #[serde(default)]
    pub sin: Vec<(u32, f64)>,
}

impl RateConfig {
    pub fn build(&self) -> Result<RateFunction> {
        RateFunction::new(self.mean, self.cos.clone(), self.sin.clone())
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub k: usize,
    pub m: usize,
    pub lambda: RateConfig,
    pub mu: RateConfig,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SeriesConfig {
    pub q: usize,
    pub panels: usize,
    pub order: usize,
}

impl Default for SeriesConfig {
    fn default() -> Self {
        let quad = QuadratureSpec::default();
        Self { q: 10, panels: quad.panels, order: quad.order }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OracleSection {
    pub levels: usize,
    pub grid: usize,
    pub tol: f64,
    pub max_periods: usize,
    pub substeps: usize,
}

impl Default for OracleSection {
    fn default() -> Self {
        let c = OracleConfig::default();
        Self { levels: c.levels, grid: c.grid, tol: c.tol, max_periods: c.max_periods, substeps: c.substeps }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    pub dir: PathBuf,
    /// Any of `csv`, `json`.
    pub formats: Vec<String>,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self { dir: PathBuf::from("out"), formats: vec!["csv".into(), "json".into()] }
    }
}

impl OutputConfig {
    pub fn csv(&self) -> bool {
        self.formats.iter().any(|f| f == "csv")
    }

    pub fn json(&self) -> bool {
        self.formats.iter().any(|f| f == "json")
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AnalyzeConfig {
    pub levels: Vec<usize>,
    /// Number of equally spaced times in `[0, 1)`.
    pub times: usize,
}

impl Default for AnalyzeConfig {
    fn default() -> Self {
        Self { levels: vec![1, 2, 3, 4, 5], times: 16 }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BoundsConfig {
    pub levels: Vec<usize>,
    pub orders: Vec<usize>,
    pub reference_q: usize,
    pub times: usize,
}

impl Default for BoundsConfig {
    fn default() -> Self {
        Self { levels: vec![3, 4, 5], orders: vec![3, 5, 10], reference_q: 40, times: 16 }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct WaitingConfig {
    pub u: Vec<f64>,
    pub kind: String,
    pub horizon: f64,
    pub step: f64,
}

impl Default for WaitingConfig {
    fn default() -> Self {
        Self { u: vec![0.2, 0.7], kind: "queue".into(), horizon: 3.0, step: 0.01 }
    }
}

impl WaitingConfig {
    pub fn kind(&self) -> Result<WaitKind> {
        self.kind.parse()
    }

    pub fn horizons(&self) -> Result<Vec<f64>> {
        if !(self.step > 0.0 && self.horizon >= 0.0) {
            return Err(Error::Config("waiting.step must be positive and waiting.horizon nonnegative".into()));
        }
        let n = (self.horizon / self.step).round() as usize;
        Ok((0..=n).map(|i| i as f64 * self.step).collect())
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BusyConfig {
    pub j: usize,
    pub a: usize,
    pub s: usize,
    pub u: f64,
    pub horizon: f64,
    pub h: f64,
    pub levels: usize,
}

impl Default for BusyConfig {
    fn default() -> Self {
        Self { j: 1, a: 0, s: 0, u: 0.0, horizon: 5.0, h: 0.005, levels: BusyOracleConfig::default().levels }
    }
}

impl BusyConfig {
    pub fn start(&self) -> PhaseIndex {
        PhaseIndex { a: self.a, s: self.s }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub model: ModelConfig,
    #[serde(default)]
    pub series: SeriesConfig,
    #[serde(default)]
    pub oracle: OracleSection,
    #[serde(default)]
    pub output: OutputConfig,
    #[serde(default)]
    pub analyze: AnalyzeConfig,
    #[serde(default)]
    pub bounds: BoundsConfig,
    #[serde(default)]
    pub waiting: WaitingConfig,
    #[serde(default)]
    pub busy: BusyConfig,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    /// Builds the model, surfacing model errors as configuration errors.
    pub fn spec(&self) -> Result<ModelSpec> {
        let as_config = |e: Error| Error::Config(e.to_string());
        let lambda = self.model.lambda.build().map_err(as_config)?;
        let mu = self.model.mu.build().map_err(as_config)?;
        ModelSpec::new(self.model.k, self.model.m, lambda, mu).map_err(as_config)
    }

    pub fn quadrature(&self) -> QuadratureSpec {
        QuadratureSpec { panels: self.series.panels, order: self.series.order }
    }

    pub fn oracle_config(&self) -> OracleConfig {
        let o = &self.oracle;
        OracleConfig { levels: o.levels, grid: o.grid, tol: o.tol, max_periods: o.max_periods, substeps: o.substeps }
    }

    fn validate(&self) -> Result<()> {
        let spec = self.spec()?;
        let bad = |msg: &str| Err(Error::Config(msg.to_string()));
        if self.series.panels == 0 || self.series.order == 0 {
            return bad("series.panels and series.order must be positive");
        }
        if self.oracle.levels < 2 || self.oracle.grid == 0 || self.oracle.substeps == 0 {
            return bad("oracle.levels must be at least 2; oracle.grid and oracle.substeps positive");
        }
        if !(self.oracle.tol > 0.0) {
            return bad("oracle.tol must be positive");
        }
        if let Some(f) = self.output.formats.iter().find(|f| *f != "csv" && *f != "json") {
            return Err(Error::Config(format!("unknown output format `{f}` (expected csv or json)")));
        }
        if self.analyze.levels.contains(&0) || self.bounds.levels.contains(&0) {
            return bad("levels must be >= 1");
        }
        if self.analyze.times == 0 || self.bounds.times == 0 {
            return bad("time grids need at least one point");
        }
        self.waiting.kind()?;
        self.waiting.horizons()?;
        if self.busy.j == 0 || self.busy.a >= spec.k() || self.busy.s >= spec.m() {
            return bad("busy.j must be >= 1 and (busy.a, busy.s) a valid phase");
        }
        if !(self.busy.h > 0.0 && self.busy.horizon > 0.0) {
            return bad("busy.h and busy.horizon must be positive");
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const EXAMPLE: &str = r#"
model.k = 7
model.m = 4
model.lambda.mean = 3.0
model.lambda.sin = [[1, -2.0]]
model.mu.mean = 5.0
model.mu.sin = [[1, 4.0]]
series.q = 5
oracle.levels = 40
"#;

    #[test]
    fn parses_dotted_keys() {
        let cfg = RunConfig::from_toml(EXAMPLE).unwrap();
        assert_eq!(cfg.series.q, 5);
        assert_eq!(cfg.oracle.levels, 40);
        assert_eq!(cfg.oracle.grid, 512);
        let spec = cfg.spec().unwrap();
        let reference = ModelSpec::e7_e4_example();
        for t in [0.0, 0.1, 0.6] {
            assert_eq!(spec.lambda().value(t), reference.lambda().value(t));
            assert_eq!(spec.mu().value(t), reference.mu().value(t));
        }
    }

    #[test]
    fn rejects_unknown_keys() {
        let err = RunConfig::from_toml(&format!("{EXAMPLE}\nseries.qq = 3\n")).unwrap_err();
        assert!(matches!(err, Error::Config(_)));
        let err = RunConfig::from_toml(&format!("{EXAMPLE}\nextra.x = 3\n")).unwrap_err();
        assert!(matches!(err, Error::Config(_)));
    }

    #[test]
    fn coprimality_is_a_config_error() {
        let text = EXAMPLE.replace("model.m = 4", "model.m = 14");
        let err = RunConfig::from_toml(&text).unwrap_err();
        assert!(matches!(err, Error::Config(ref msg) if msg.contains("coprime")), "{err}");
    }

    #[test]
    fn rejects_bad_wait_kind() {
        assert!(RunConfig::from_toml(&format!("{EXAMPLE}\nwaiting.kind = \"total\"\n")).is_err());
    }
}
